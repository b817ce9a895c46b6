//! TOML sweep-configuration documents.
//!
//! A document has two tables: `[system]` mirrors [`SystemConfig`] with powers
//! given in dB or linear units, `[sweep]` mirrors [`SweepSpec`]. Example:
//!
//! ```toml
//! [system]
//! e_db = 20.0
//! e_i_db = 5.0
//! target_rate = 1.0
//! omega1 = 0.5
//! d1 = 0.5
//! path_loss_exp = 4.0
//! interferers_t1 = 2
//! interferers_t2 = 2
//! interferers_relay = 2
//! interval = [1.0, 1.5]
//!
//! [sweep]
//! variable = "E_over_EI_dB"
//! grid = [0.0, 5.0, 10.0, 15.0, 20.0]
//! estimators = ["mc_exact", "mc_ub", "analytic_lb"]
//! trials = 1000000
//! seed = 1
//! ```

use crate::scenario::SystemConfig;
use crate::sweep::{db_to_linear, EstimatorChoice, SweepSpec, SweepVariable};
use serde::Deserialize;
use std::path::Path;
use thiserror::Error;

/// Configuration-loading failure.
#[derive(Debug, Error)]
pub enum ConfigLoadError {
    /// The file could not be read.
    #[error("reading {path}: {source}")]
    Io {
        /// Offending path.
        path: String,
        /// Underlying error.
        source: std::io::Error,
    },
    /// The document is not valid TOML or misses required keys.
    #[error("parsing {path}: {source}")]
    Parse {
        /// Offending path.
        path: String,
        /// Underlying error.
        source: toml::de::Error,
    },
    /// The document is structurally valid but inconsistent.
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    system: System,
    sweep: Sweep,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct System {
    e_db: Option<f64>,
    e: Option<f64>,
    e_i_db: Option<f64>,
    e_i: Option<f64>,
    #[serde(default = "default_rate")]
    target_rate: f64,
    phi: Option<f64>,
    #[serde(default = "default_half")]
    omega1: f64,
    #[serde(default = "default_half")]
    d1: f64,
    #[serde(default = "default_path_loss")]
    path_loss_exp: f64,
    #[serde(default)]
    interferers_t1: usize,
    #[serde(default)]
    interferers_t2: usize,
    #[serde(default)]
    interferers_relay: usize,
    #[serde(default = "default_interval")]
    interval: [f64; 2],
    rho_t1: Option<Vec<f64>>,
    rho_t2: Option<Vec<f64>>,
    rho_relay: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sweep {
    variable: SweepVariable,
    grid: Vec<f64>,
    e_over_ei_db: Option<f64>,
    estimators: Vec<EstimatorChoice>,
    #[serde(default = "default_trials")]
    trials: u64,
    #[serde(default = "default_seed")]
    seed: u64,
}

fn default_rate() -> f64 {
    1.0
}
fn default_half() -> f64 {
    0.5
}
fn default_path_loss() -> f64 {
    4.0
}
fn default_interval() -> [f64; 2] {
    [1.0, 1.5]
}
fn default_trials() -> u64 {
    1_000_000
}
fn default_seed() -> u64 {
    1
}

fn pick_power(
    db: Option<f64>,
    linear: Option<f64>,
    field: &str,
    default: f64,
) -> Result<f64, ConfigLoadError> {
    match (db, linear) {
        (Some(_), Some(_)) => Err(ConfigLoadError::Invalid(format!(
            "{field}: give either the dB or the linear form, not both"
        ))),
        (Some(db), None) => Ok(db_to_linear(db)),
        (None, Some(lin)) => Ok(lin),
        (None, None) => Ok(default),
    }
}

/// Parses a TOML document into a runnable sweep.
pub fn parse_document(text: &str, origin: &str) -> Result<SweepSpec, ConfigLoadError> {
    let doc: Document = toml::from_str(text).map_err(|source| ConfigLoadError::Parse {
        path: origin.to_string(),
        source,
    })?;
    let tx_power = pick_power(doc.system.e_db, doc.system.e, "e", 1.0)?;
    let interferer_power = pick_power(doc.system.e_i_db, doc.system.e_i, "e_i", 0.0)?;
    let base = SystemConfig {
        tx_power,
        interferer_power,
        target_rate: doc.system.target_rate,
        phi_override: doc.system.phi,
        omega1: doc.system.omega1,
        d1: doc.system.d1,
        path_loss_exp: doc.system.path_loss_exp,
        l1: doc.system.interferers_t1,
        l2: doc.system.interferers_t2,
        lr: doc.system.interferers_relay,
        interval: (doc.system.interval[0], doc.system.interval[1]),
        explicit_rho_t1: doc.system.rho_t1,
        explicit_rho_t2: doc.system.rho_t2,
        explicit_rho_relay: doc.system.rho_relay,
    };
    let spec = SweepSpec {
        variable: doc.sweep.variable,
        grid: doc.sweep.grid,
        base,
        ratio_db: doc.sweep.e_over_ei_db,
        estimators: doc.sweep.estimators,
        n_trials: doc.sweep.trials,
        seed: doc.sweep.seed,
    };
    spec.validate()
        .map_err(|e| ConfigLoadError::Invalid(e.to_string()))?;
    Ok(spec)
}

/// Loads and validates a sweep configuration file.
pub fn load_document(path: &Path) -> Result<SweepSpec, ConfigLoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigLoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_document(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
        [system]
        e_db = 20.0
        e_i_db = 5.0
        omega1 = 0.5
        d1 = 0.4
        interferers_t1 = 2
        interferers_t2 = 2
        interferers_relay = 3

        [sweep]
        variable = "E_over_EI_dB"
        grid = [0.0, 10.0, 20.0]
        estimators = ["mc_exact", "analytic_lb"]
        trials = 5000
        seed = 7
    "#;

    #[test]
    fn sample_parses() {
        let spec = parse_document(SAMPLE, "sample").unwrap();
        assert_eq!(spec.variable, SweepVariable::EOverEiDb);
        assert_eq!(spec.grid.len(), 3);
        assert_eq!(spec.n_trials, 5000);
        assert_eq!(spec.seed, 7);
        assert!((spec.base.tx_power - 100.0).abs() < 1e-12);
        assert!((spec.base.interferer_power - db_to_linear(5.0)).abs() < 1e-12);
        assert_eq!(spec.base.lr, 3);
    }

    #[test]
    fn rejects_double_power_spec() {
        let text = SAMPLE.replace("e_db = 20.0", "e_db = 20.0\n        e = 100.0");
        assert!(matches!(
            parse_document(&text, "sample"),
            Err(ConfigLoadError::Invalid(_))
        ));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_grid() {
        let text = SAMPLE.replace("seed = 7", "seed = 7\n        bogus = 1");
        assert!(matches!(
            parse_document(&text, "sample"),
            Err(ConfigLoadError::Parse { .. })
        ));
        let text = SAMPLE.replace("[0.0, 10.0, 20.0]", "[0.0, 0.0]");
        match parse_document(&text, "sample") {
            Err(ConfigLoadError::Invalid(msg)) => assert!(msg.contains("grid")),
            other => panic!("expected invalid-grid error, got {other:?}"),
        }
    }

    #[test]
    fn explicit_variances_flow_through() {
        let text = SAMPLE
            .replace("interferers_t1 = 2", "interferers_t1 = 2\n        rho_t1 = [1.0, 0.5]");
        let spec = parse_document(&text, "sample").unwrap();
        assert_eq!(spec.base.explicit_rho_t1.as_deref(), Some(&[1.0, 0.5][..]));
        spec.scenario_at(10.0).unwrap();
    }
}
