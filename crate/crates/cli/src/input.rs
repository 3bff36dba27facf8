//! Sample acquisition shared by the subcommands: either a file in original
//! units or the seeded synthetic sampler.

use crate::{CliError, DataArgs};
use denest::samples::{self, RawSamples};

#[derive(Debug, Clone, Copy)]
pub struct SynthSpec {
    pub mu: f64,
    pub sigma2: f64,
    pub n: usize,
}

pub fn parse_synth(text: &str) -> Result<SynthSpec, CliError> {
    let rest = text
        .strip_prefix("normal:")
        .ok_or_else(|| CliError::BadInput(format!("unknown synth spec {text:?}")))?;
    let parts: Vec<&str> = rest.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::BadInput(format!(
            "synth spec {text:?} must be normal:MU,SIGMA2,N"
        )));
    }
    let mu: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| CliError::BadInput(format!("bad mean in {text:?}")))?;
    let sigma2: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| CliError::BadInput(format!("bad variance in {text:?}")))?;
    let n: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| CliError::BadInput(format!("bad count in {text:?}")))?;
    Ok(SynthSpec { mu, sigma2, n })
}

/// Where the samples came from, which decides whether rescaling applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    File,
    Synthetic,
}

pub fn acquire(data: &DataArgs) -> Result<(RawSamples, Source), CliError> {
    match (&data.input, &data.synth) {
        (Some(path), None) => Ok((samples::load_samples_path(path)?, Source::File)),
        (None, Some(spec)) => {
            let spec = parse_synth(spec)?;
            let raw = if spec.n == 0 {
                RawSamples::empty("synthetic (empty)")
            } else {
                samples::sample_truncated_normal(spec.n, spec.mu, spec.sigma2, data.seed)?
            };
            Ok((raw, Source::Synthetic))
        }
        (None, None) => Err(CliError::BadInput("provide --input PATH or --synth SPEC".into())),
        (Some(_), Some(_)) => {
            Err(CliError::BadInput("--input and --synth are mutually exclusive".into()))
        }
    }
}
