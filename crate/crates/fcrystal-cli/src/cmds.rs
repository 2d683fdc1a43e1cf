//! Subcommand execution and the exit-code contract.

use fcrystal::lattice::laurent_mat_from_json;
use fcrystal::{FieldTower, Lattice};
use serde_json::{json, Value};
use thiserror::Error;

use crate::args::{Cli, Cmd};

pub struct Outcome {
    pub code: i32,
    pub payload: Value,
}

impl Outcome {
    fn success(payload: Value) -> Self {
        Outcome { code: 0, payload }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(e.to_string())
}

/// Resolve `@path` to file contents, otherwise treat the string as inline JSON.
fn read_input(s: &str) -> Result<Value, CliError> {
    let text = if let Some(path) = s.strip_prefix('@') {
        std::fs::read_to_string(path)
            .map_err(|e| CliError::Invalid(format!("cannot read {path}: {e}")))?
    } else {
        s.to_string()
    };
    serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("malformed JSON: {e}")))
}

fn parse_field(s: &str) -> Result<FieldTower, CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::Invalid(format!(
            "field must be given as p,e,m — got {s:?}"
        )));
    }
    let p: u64 = parts[0].trim().parse().map_err(invalid)?;
    let e: u32 = parts[1].trim().parse().map_err(invalid)?;
    let m: u32 = parts[2].trim().parse().map_err(invalid)?;
    FieldTower::new(p, e, m).map_err(invalid)
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    let tower = parse_field(&cli.field)?;
    match cli.cmd {
        Cmd::Hodge { b, twist, lattice } => {
            let b = laurent_mat_from_json(&tower, &read_input(&b)?).map_err(invalid)?;
            if b.nrows() != b.ncols() {
                return Err(CliError::Invalid("operator matrix must be square".into()));
            }
            let lat = match lattice {
                Some(s) => Lattice::from_json(&tower, &read_input(&s)?).map_err(invalid)?,
                None => Lattice::standard(&tower, b.nrows()),
            };
            let image = lat.transformed(&b, twist).map_err(invalid)?;
            let mu = lat.relative_position(&image).map_err(invalid)?;
            let mut payload = json!({ "mu": mu.to_json() });
            if cli.transcript {
                payload["transcript"] = json!({
                    "lattice": lat.to_json(),
                    "image": image.to_json(),
                    "pivot_exponents": image.pivot_exponents(),
                });
            }
            Ok(Outcome::success(payload))
        }
    }
}
