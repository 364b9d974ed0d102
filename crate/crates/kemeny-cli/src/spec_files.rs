//! Model spec files (JSON): parsing, validation, and input digests.
//!
//! Chain specs: `{"kind":"dtmc","P":[[...]]}` or `{"kind":"ctmc","Q":[[...]]}`
//! with an optional `"labels":[...]`. Diffusion specs carry coefficient
//! expressions as text and an interval whose endpoints may be the
//! strings `"-inf"` / `"inf"`.

use crate::{CliError, CliResult};
use kemeny_core::diffusion::{Boundary, DiffusionSpec};
use kemeny_core::{Expr, GeneratorMatrix, TransitionMatrix};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum ModelFile {
    Dtmc {
        #[serde(rename = "P")]
        p: Vec<Vec<f64>>,
        labels: Option<Vec<String>>,
    },
    Ctmc {
        #[serde(rename = "Q")]
        q: Vec<Vec<f64>>,
        labels: Option<Vec<String>>,
    },
    Diffusion {
        drift: String,
        sigma: String,
        interval: IntervalSpec,
        left_boundary: Boundary,
        right_boundary: Boundary,
        anchor: Option<f64>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntervalSpec {
    left: Endpoint,
    right: Endpoint,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Endpoint {
    Number(f64),
    Word(String),
}

impl Endpoint {
    fn resolve(&self, side: &str) -> CliResult<f64> {
        match self {
            Endpoint::Number(v) => Ok(*v),
            Endpoint::Word(w) => match w.as_str() {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(CliError::SchemaError {
                    message: format!("interval.{side}: expected a number, \"inf\" or \"-inf\", got \"{other}\""),
                }),
            },
        }
    }
}

/// A validated model plus its optional state labels.
#[derive(Debug)]
pub enum LoadedModel {
    Dtmc(TransitionMatrix, Option<Vec<String>>),
    Ctmc(GeneratorMatrix, Option<Vec<String>>),
    Diffusion(DiffusionSpec),
}

impl LoadedModel {
    pub fn kind(&self) -> &'static str {
        match self {
            LoadedModel::Dtmc(..) => "dtmc",
            LoadedModel::Ctmc(..) => "ctmc",
            LoadedModel::Diffusion(..) => "diffusion",
        }
    }
}

/// Load and validate a model spec; returns the model and the SHA-256
/// digest of the raw file bytes.
pub fn load_model(path: &Path) -> CliResult<(LoadedModel, String)> {
    let bytes = std::fs::read(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            CliError::FileNotFound { path: path.display().to_string() }
        } else {
            CliError::Io { path: path.display().to_string(), source: e }
        }
    })?;
    let digest = hex_digest(&bytes);
    let parsed: ModelFile = serde_json::from_slice(&bytes).map_err(|e| {
        if e.classify() == serde_json::error::Category::Data {
            CliError::SchemaError { message: e.to_string() }
        } else {
            CliError::MalformedJson { line: e.line(), column: e.column(), message: e.to_string() }
        }
    })?;
    let model = match parsed {
        ModelFile::Dtmc { p, labels } => {
            check_labels(&labels, p.len())?;
            let p = TransitionMatrix::validate(&p).map_err(small_state_schema)?;
            LoadedModel::Dtmc(p, labels)
        }
        ModelFile::Ctmc { q, labels } => {
            check_labels(&labels, q.len())?;
            let q = GeneratorMatrix::validate(&q).map_err(small_state_schema)?;
            LoadedModel::Ctmc(q, labels)
        }
        ModelFile::Diffusion { drift, sigma, interval, left_boundary, right_boundary, anchor } => {
            let left = interval.left.resolve("left")?;
            let right = interval.right.resolve("right")?;
            let spec = DiffusionSpec::new(
                Expr::parse(&drift)?,
                Expr::parse(&sigma)?,
                (left, right),
                left_boundary,
                right_boundary,
                anchor,
            )?;
            let probe = spec.sigma_probe();
            if probe.min_value < 1e-3 * probe.max_value {
                eprintln!(
                    "warning: sigma({:.6e}) = {:.3e} is nearly zero approaching an endpoint; \
                     accepted, but quadrature loses accuracy there",
                    probe.min_x, probe.min_value
                );
            }
            LoadedModel::Diffusion(spec)
        }
    };
    Ok((model, digest))
}

fn check_labels(labels: &Option<Vec<String>>, n: usize) -> CliResult<()> {
    if let Some(l) = labels {
        if l.len() != n {
            return Err(CliError::SchemaError {
                message: format!("labels has {} entries for {} states", l.len(), n),
            });
        }
    }
    Ok(())
}

// the n >= 2 precondition reads as a schema problem at the file boundary
fn small_state_schema(e: kemeny_core::Error) -> CliError {
    match e {
        kemeny_core::Error::TooFewStates { n } => {
            CliError::SchemaError { message: format!("n >= 2 states required, got {n}") }
        }
        other => CliError::Model(other),
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let out = h.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}
