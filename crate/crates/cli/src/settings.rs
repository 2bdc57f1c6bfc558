//! Effective configuration: a config file overlaid with command-line flags.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use roughjump::stochgen::{FbmMethod, GeneratorConfig, JumpLaw};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// What `simulate` draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum SimModel {
    Fbm,
    CompoundPoisson,
    Mixed,
    Wealth,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Auto,
    Cholesky,
    Circulant,
}

impl From<Method> for FbmMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Auto => FbmMethod::Auto,
            Method::Cholesky => FbmMethod::Cholesky,
            Method::Circulant => FbmMethod::Circulant,
        }
    }
}

/// Generator fields that may be left unset.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorOverrides {
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stream: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hurst: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jump_law: Option<JumpLaw>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
}

macro_rules! overlay_fields {
    ($dst:expr, $src:expr, $($f:ident),*) => {
        $(if $src.$f.is_some() {
            $dst.$f = $src.$f;
        })*
    };
}

impl GeneratorOverrides {
    fn overlay(&mut self, top: GeneratorOverrides) {
        overlay_fields!(self, top, horizon, n, d, stream, hurst, sigma, rate, jump_law, drift, x0, method);
    }

    pub fn build(&self, seed: u64, default_n: usize) -> GeneratorConfig {
        let mut g = GeneratorConfig::new(seed, self.n.unwrap_or(default_n));
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f.clone() { g.$f = v; })* };
        }
        set!(horizon, d, stream, hurst, sigma, rate, jump_law, drift, x0);
        if let Some(m) = self.method {
            g.method = m.into();
        }
        g
    }
}

/// Every setting any subcommand reads. Unset fields fall back to the
/// command's defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(rename = "fn", skip_serializing_if = "Option::is_none")]
    pub function: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub triples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub proof_terms: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<SimModel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ns: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ps: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "is_empty_generator")]
    pub generator: GeneratorOverrides,
}

fn is_empty_generator(g: &GeneratorOverrides) -> bool {
    *g == GeneratorOverrides::default()
}

impl Settings {
    /// Reads a JSON or TOML file, chosen by extension (JSON otherwise).
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        if is_toml {
            toml::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
        } else {
            serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
        }
    }

    /// Fields set in `top` win.
    pub fn overlay(mut self, top: Settings) -> Self {
        overlay_fields!(
            self, top, path, function, p, tol, seed, out, format, workers, triples, proof_terms, model, pi, w0, seeds,
            ns, ps
        );
        self.generator.overlay(top.generator);
        self
    }

    pub fn require_path(&self) -> Result<&Path, CliError> {
        self.path
            .as_deref()
            .ok_or_else(|| CliError::Precondition("missing --path".into()))
    }

    pub fn require_p(&self) -> Result<f64, CliError> {
        self.p.ok_or_else(|| CliError::Precondition("missing --p".into()))
    }

    pub fn require_function(&self) -> Result<&str, CliError> {
        self.function
            .as_deref()
            .ok_or_else(|| CliError::Precondition("missing --fn".into()))
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(1e-6)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(Format::Json)
    }
}
