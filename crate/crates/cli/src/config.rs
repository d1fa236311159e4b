use std::path::{Path, PathBuf};

use anyhow::Context;
use kerrlab::selftest::SelftestConfig;
use kerrlab::KerrParams;
use serde::{Deserialize, Serialize};

use crate::args::{Format, GlobalArgs};
use crate::UsageError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub ode_tol: Option<f64>,
    pub quad_tol: Option<f64>,
    pub root_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub format: Option<Format>,
    pub path: Option<PathBuf>,
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub a: Option<f64>,
    #[serde(rename = "M")]
    pub m: Option<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))
            .map_err(|e| UsageError(format!("{e:#}")))?;
        serde_json::from_str(&text)
            .map_err(|e| UsageError(format!("config {}: {e}", path.display())).into())
    }
}

/// Flags merged over the config file over the defaults.
#[derive(Debug, Clone)]
pub struct Settings {
    pub params: KerrParams,
    pub ode_tol: f64,
    pub quad_tol: f64,
    pub root_tol: f64,
    pub seed: u64,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

impl Settings {
    pub fn resolve(flags: &GlobalArgs) -> anyhow::Result<Self> {
        let file = match &flags.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let d = SelftestConfig::default();
        let a = flags.a.or(file.a).unwrap_or(d.a);
        let m = flags.m.or(file.m).unwrap_or(d.m);
        let params = KerrParams::new(a, m).map_err(|e| UsageError(e.to_string()))?;
        let tol =
            |flag: Option<f64>, cfg: Option<f64>, def: f64, name: &str| -> anyhow::Result<f64> {
                let v = flag.or(cfg).unwrap_or(def);
                if v > 0.0 && v.is_finite() {
                    Ok(v)
                } else {
                    Err(UsageError(format!("{name} must be positive, got {v}")).into())
                }
            };
        Ok(Self {
            params,
            ode_tol: tol(flags.ode_tol, file.tolerances.ode_tol, d.ode_tol, "ode_tol")?,
            quad_tol: tol(
                flags.quad_tol,
                file.tolerances.quad_tol,
                d.quad_tol,
                "quad_tol",
            )?,
            root_tol: tol(
                flags.root_tol,
                file.tolerances.root_tol,
                d.root_tol,
                "root_tol",
            )?,
            seed: flags.seed.or(file.seed).unwrap_or(d.seed),
            format: flags.format.or(file.output.format),
            out: flags.out.clone().or(file.output.path),
        })
    }

    pub fn selftest_config(&self) -> SelftestConfig {
        SelftestConfig {
            a: self.params.a(),
            m: self.params.m(),
            seed: self.seed,
            ode_tol: self.ode_tol,
            quad_tol: self.quad_tol,
            root_tol: self.root_tol,
        }
    }
}
