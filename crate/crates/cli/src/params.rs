//! Parameter input: a JSON file, inline flags, or both (flags win).

use std::path::PathBuf;

use clap::Args;
use heun_core::HeunParams;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// `δ` is derived and is rejected as an input key.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    a: Option<f64>,
    q: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    gamma: Option<f64>,
    epsilon: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// JSON file with keys a, q, alpha, beta, gamma, epsilon
    #[arg(long, global = true)]
    pub params: Option<PathBuf>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub q: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub epsilon: Option<f64>,
}

impl ParamArgs {
    fn merged(&self) -> Result<ParamsFile, CliError> {
        let mut f = match &self.params {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::input(format!("malformed parameter JSON: {e}")))?
            }
            None => ParamsFile::default(),
        };
        macro_rules! over {
            ($($k:ident),*) => { $( if self.$k.is_some() { f.$k = self.$k; } )* };
        }
        over!(a, q, alpha, beta, gamma, epsilon);
        Ok(f)
    }

    /// Full parameter set; `q` defaults to 0 when `allow_missing_q`.
    pub fn resolve(&self, allow_missing_q: bool) -> Result<HeunParams, CliError> {
        let f = self.merged()?;
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| CliError::input(format!("missing parameter {name}")));
        let q = match f.q {
            Some(q) => q,
            None if allow_missing_q => 0.0,
            None => return Err(CliError::input("missing parameter q")),
        };
        HeunParams::new(
            need(f.a, "a")?,
            q,
            need(f.alpha, "alpha")?,
            need(f.beta, "beta")?,
            need(f.gamma, "gamma")?,
            need(f.epsilon, "epsilon")?,
        )
        .map_err(|e| CliError::input(e.to_string()))
    }

    pub fn resolve_a(&self) -> Result<f64, CliError> {
        self.merged()?.a.ok_or_else(|| CliError::input("missing parameter a"))
    }
}

/// Parameters as echoed in reports, with the derived `δ`.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedParams {
    pub a: f64,
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub delta: f64,
}

impl From<&HeunParams> for ResolvedParams {
    fn from(p: &HeunParams) -> Self {
        Self {
            a: p.a,
            q: p.q,
            alpha: p.alpha,
            beta: p.beta,
            gamma: p.gamma,
            epsilon: p.epsilon,
            delta: p.delta(),
        }
    }
}

impl std::fmt::Display for ResolvedParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "a = {}, q = {}, alpha = {}, beta = {}, gamma = {}, epsilon = {}, delta = {}",
            self.a, self.q, self.alpha, self.beta, self.gamma, self.epsilon, self.delta
        )
    }
}
