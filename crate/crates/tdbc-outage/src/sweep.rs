//! Parameter sweeps and plot-ready CSV output.
//!
//! A sweep pins one scenario knob to a grid, evaluates the requested
//! estimators at every point (concurrently, in grid order) and emits one CSV
//! row per point. The three built-in presets reproduce the canonical
//! experiment family: outage versus transmit power at a fixed
//! signal-to-interference ratio, outage versus that ratio, and outage versus
//! relay placement.

use crate::analytic::{self, AnalyticError};
use crate::mc::{self, Estimator, OutageEstimate};
use crate::scenario::{ConfigError, Scenario, SystemConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// `10^{x/10}`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Which scenario knob the sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    /// Transmit power in dB (optionally dragging the interferer power along
    /// at a fixed ratio).
    #[serde(rename = "E_dB")]
    EDb,
    /// Signal-to-interference power ratio in dB at fixed interferer power.
    #[serde(rename = "E_over_EI_dB")]
    EOverEiDb,
    /// Normalized relay position.
    #[serde(rename = "D1")]
    D1,
    /// Outage threshold, bypassing the target rate.
    #[serde(rename = "phi")]
    Phi,
}

impl SweepVariable {
    /// Name used in the CSV `sweep_var` column.
    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariable::EDb => "E_dB",
            SweepVariable::EOverEiDb => "E_over_EI_dB",
            SweepVariable::D1 => "D1",
            SweepVariable::Phi => "phi",
        }
    }
}

/// Estimators a sweep can request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorChoice {
    /// Monte Carlo of the full post-combining SINR.
    McExact,
    /// Monte Carlo of the bounded SINR.
    McUb,
    /// Closed-form outage lower bound.
    AnalyticLb,
    /// Small-threshold asymptote.
    Asymptotic,
}

/// A full sweep description.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// The varied knob.
    pub variable: SweepVariable,
    /// Strictly increasing grid of values for it.
    pub grid: Vec<f64>,
    /// Scenario template; the swept knob overrides the matching field.
    pub base: SystemConfig,
    /// For [`SweepVariable::EDb`]: hold `E/E_I` at this many dB while `E`
    /// moves. Without it the interferer power stays at the template value.
    pub ratio_db: Option<f64>,
    /// Estimators to evaluate (deduplicated, order-insensitive).
    pub estimators: Vec<EstimatorChoice>,
    /// Monte Carlo trials per grid point.
    pub n_trials: u64,
    /// Base seed shared by every grid point.
    pub seed: u64,
}

/// Sweep failure.
#[derive(Debug, Error)]
pub enum SweepError {
    /// Invalid sweep or scenario configuration.
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// Closed-form evaluation failed at a grid point.
    #[error("analytic evaluation failed at {variable} = {value}: {source}")]
    Analytic {
        /// Sweep variable name.
        variable: &'static str,
        /// Grid point.
        value: f64,
        /// Underlying failure.
        source: AnalyticError,
    },
    /// File output failed.
    #[error("writing {path}: {source}")]
    Io {
        /// Destination that failed.
        path: PathBuf,
        /// Underlying error.
        source: io::Error,
    },
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// The grid value.
    pub value: f64,
    /// Monte Carlo estimate of the exact-SINR outage.
    pub mc_exact: Option<OutageEstimate>,
    /// Monte Carlo estimate of the bounded-SINR outage.
    pub mc_ub: Option<OutageEstimate>,
    /// Closed-form lower bound.
    pub analytic_lb: Option<f64>,
    /// Small-threshold asymptote.
    pub asymptotic: Option<f64>,
}

/// Evaluated sweep in grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    /// The varied knob.
    pub variable: SweepVariable,
    /// One row per grid point.
    pub rows: Vec<SweepRow>,
}

impl SweepSpec {
    fn wants(&self, choice: EstimatorChoice) -> bool {
        self.estimators.contains(&choice)
    }

    fn wants_mc(&self) -> bool {
        self.wants(EstimatorChoice::McExact) || self.wants(EstimatorChoice::McUb)
    }

    fn wants_analytic(&self) -> bool {
        self.wants(EstimatorChoice::AnalyticLb) || self.wants(EstimatorChoice::Asymptotic)
    }

    /// Validates grid shape, estimator set, trial budget, and analytic
    /// eligibility.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.grid.is_empty() {
            return Err(ConfigError {
                field: "grid",
                reason: "must not be empty".into(),
            });
        }
        if !self.grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(ConfigError {
                field: "grid",
                reason: "must be strictly increasing".into(),
            });
        }
        if self.estimators.is_empty() {
            return Err(ConfigError {
                field: "estimators",
                reason: "select at least one estimator".into(),
            });
        }
        if self.wants_mc() && self.n_trials < 1000 {
            return Err(ConfigError {
                field: "trials",
                reason: "Monte Carlo estimators need at least 1000 trials".into(),
            });
        }
        if self.wants_analytic() {
            if self.base.l1 == 0 || self.base.lr == 0 {
                return Err(ConfigError {
                    field: "estimators",
                    reason: "analytic estimators need interferers at T1 and the relay \
                             (interference-free runs are Monte Carlo only)"
                        .into(),
                });
            }
            let interferer_power_fixed = !matches!(self.variable, SweepVariable::EDb)
                || self.ratio_db.is_none();
            if interferer_power_fixed && self.base.interferer_power <= 0.0 {
                return Err(ConfigError {
                    field: "estimators",
                    reason: "analytic estimators need interferer_power > 0".into(),
                });
            }
        }
        self.scenario_at(self.grid[0]).map(|_| ())
    }

    /// Scenario at one grid value.
    pub fn scenario_at(&self, value: f64) -> Result<Scenario, ConfigError> {
        let mut cfg = self.base.clone();
        match self.variable {
            SweepVariable::EDb => {
                cfg.tx_power = db_to_linear(value);
                if let Some(ratio) = self.ratio_db {
                    cfg.interferer_power = cfg.tx_power / db_to_linear(ratio);
                }
            }
            SweepVariable::EOverEiDb => {
                cfg.tx_power = cfg.interferer_power * db_to_linear(value);
            }
            SweepVariable::D1 => cfg.d1 = value,
            SweepVariable::Phi => cfg.phi_override = Some(value),
        }
        Scenario::new(cfg)
    }
}

/// Runs every grid point (concurrently) and assembles rows in grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable, SweepError> {
    spec.validate()?;
    let rows: Result<Vec<SweepRow>, SweepError> = spec
        .grid
        .par_iter()
        .map(|&value| {
            let scn = spec.scenario_at(value)?;
            let analytic_err = |source| SweepError::Analytic {
                variable: spec.variable.as_str(),
                value,
                source,
            };
            let analytic_lb = spec
                .wants(EstimatorChoice::AnalyticLb)
                .then(|| analytic::lower_bound_outage(&scn).map(|b| b.value))
                .transpose()
                .map_err(analytic_err)?;
            let asymptotic = spec
                .wants(EstimatorChoice::Asymptotic)
                .then(|| analytic::asymptotic_outage(&scn))
                .transpose()
                .map_err(analytic_err)?;
            let mc_exact = spec
                .wants(EstimatorChoice::McExact)
                .then(|| mc::estimate_outage(&scn, Estimator::Exact, spec.n_trials, spec.seed));
            let mc_ub = spec
                .wants(EstimatorChoice::McUb)
                .then(|| mc::estimate_outage(&scn, Estimator::UpperBound, spec.n_trials, spec.seed));
            Ok(SweepRow {
                value,
                mc_exact,
                mc_ub,
                analytic_lb,
                asymptotic,
            })
        })
        .collect();
    Ok(SweepTable {
        variable: spec.variable,
        rows: rows?,
    })
}

/// CSV header shared by every sweep output.
pub const CSV_HEADER: &str =
    "sweep_var,value,mc_exact,mc_exact_ci,mc_ub,mc_ub_ci,analytic_lb,asymptotic";

/// Full-precision decimal rendering (17 significant digits round-trips f64
/// exactly).
pub fn format_full(v: f64) -> String {
    format!("{v:.16e}")
}

fn format_opt(v: Option<f64>) -> String {
    v.map(format_full).unwrap_or_default()
}

/// Writes the table as UTF-8 CSV: one row per grid point, missing estimators
/// as empty fields.
pub fn emit_csv<W: Write>(table: &SweepTable, mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in &table.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            table.variable.as_str(),
            format_full(row.value),
            format_opt(row.mc_exact.map(|e| e.p_hat)),
            format_opt(row.mc_exact.map(|e| e.ci_halfwidth)),
            format_opt(row.mc_ub.map(|e| e.p_hat)),
            format_opt(row.mc_ub.map(|e| e.ci_halfwidth)),
            format_opt(row.analytic_lb),
            format_opt(row.asymptotic),
        )?;
    }
    Ok(())
}

/// Renders the table to an in-memory CSV string.
pub fn csv_string(table: &SweepTable) -> String {
    let mut buf = Vec::new();
    emit_csv(table, &mut buf).expect("vec write cannot fail");
    String::from_utf8(buf).expect("csv output is ASCII")
}

/// Writes the table to a file, reporting failures with the path attached.
pub fn write_csv_file(table: &SweepTable, path: &Path) -> Result<(), SweepError> {
    let format = || -> io::Result<()> {
        let mut file = std::fs::File::create(path)?;
        emit_csv(table, &mut file)?;
        file.sync_all()
    };
    format().map_err(|source| SweepError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Built-in experiment presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Outage versus transmit power with `E/E_I` pinned at 30 dB; shows the
    /// interference floor. Equal interferer counts everywhere.
    Fig2,
    /// Outage versus `E/E_I` with the interferer power pinned at 5 dB.
    Fig3,
    /// Outage versus relay placement with one terminal interferer and a
    /// configurable relay-side count; shows the optimum drifting toward the
    /// far terminal.
    Fig4,
}

impl Preset {
    /// Preset names accepted on the command line.
    pub const NAMES: [&'static str; 3] = ["fig2", "fig3", "fig4"];

    /// Parses a preset name.
    pub fn from_name(name: &str) -> Option<Preset> {
        match name {
            "fig2" => Some(Preset::Fig2),
            "fig3" => Some(Preset::Fig3),
            "fig4" => Some(Preset::Fig4),
            _ => None,
        }
    }

    /// The sweep this preset pins down. `interferers` sets the per-node count
    /// for the power sweeps and the relay-side count for the placement sweep
    /// (defaulting to 1, 1 and 5 respectively).
    pub fn spec(self, interferers: Option<usize>) -> SweepSpec {
        let shared = SystemConfig {
            tx_power: 1.0,
            interferer_power: 1.0,
            target_rate: 1.0,
            omega1: 0.5,
            d1: 0.5,
            path_loss_exp: 4.0,
            interval: (1.0, 1.5),
            ..SystemConfig::default()
        };
        let estimators = vec![
            EstimatorChoice::McExact,
            EstimatorChoice::McUb,
            EstimatorChoice::AnalyticLb,
        ];
        match self {
            Preset::Fig2 => {
                let l = interferers.unwrap_or(1);
                SweepSpec {
                    variable: SweepVariable::EDb,
                    grid: (0..=12).map(|i| 5.0 * i as f64).collect(),
                    base: SystemConfig {
                        l1: l,
                        l2: l,
                        lr: l,
                        ..shared
                    },
                    ratio_db: Some(30.0),
                    estimators,
                    n_trials: 1_000_000,
                    seed: 1,
                }
            }
            Preset::Fig3 => {
                let l = interferers.unwrap_or(1);
                SweepSpec {
                    variable: SweepVariable::EOverEiDb,
                    grid: (0..=8).map(|i| 5.0 * i as f64).collect(),
                    base: SystemConfig {
                        interferer_power: db_to_linear(5.0),
                        l1: l,
                        l2: l,
                        lr: l,
                        ..shared
                    },
                    ratio_db: None,
                    estimators,
                    n_trials: 1_000_000,
                    seed: 1,
                }
            }
            Preset::Fig4 => SweepSpec {
                variable: SweepVariable::D1,
                grid: (0..=16).map(|i| 0.1 + 0.05 * i as f64).collect(),
                base: SystemConfig {
                    tx_power: db_to_linear(30.0),
                    interferer_power: db_to_linear(10.0),
                    l1: 1,
                    l2: 1,
                    lr: interferers.unwrap_or(5),
                    ..shared
                },
                ratio_db: None,
                estimators,
                n_trials: 1_000_000,
                seed: 1,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec() -> SweepSpec {
        let mut spec = Preset::Fig3.spec(Some(1));
        spec.grid = vec![10.0, 20.0];
        spec.n_trials = 2000;
        spec
    }

    #[test]
    fn header_is_pinned() {
        assert_eq!(
            CSV_HEADER,
            "sweep_var,value,mc_exact,mc_exact_ci,mc_ub,mc_ub_ci,analytic_lb,asymptotic"
        );
    }

    #[test]
    fn formatting_round_trips_bits() {
        for v in [0.1, 1.0 / 3.0, 2.5e-13, 7.0, 1e300, 4.9e-324] {
            let s = format_full(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{s}");
        }
    }

    #[test]
    fn validation_rejects_bad_specs() {
        let mut spec = tiny_spec();
        spec.grid = vec![];
        assert_eq!(spec.validate().unwrap_err().field, "grid");

        let mut spec = tiny_spec();
        spec.grid = vec![3.0, 2.0];
        assert_eq!(spec.validate().unwrap_err().field, "grid");

        let mut spec = tiny_spec();
        spec.estimators.clear();
        assert_eq!(spec.validate().unwrap_err().field, "estimators");

        let mut spec = tiny_spec();
        spec.n_trials = 10;
        assert_eq!(spec.validate().unwrap_err().field, "trials");

        let mut spec = tiny_spec();
        spec.base.lr = 0;
        assert_eq!(spec.validate().unwrap_err().field, "estimators");

        // pure-MC spec with no interferers is fine
        let mut spec = tiny_spec();
        spec.base.l1 = 0;
        spec.base.l2 = 0;
        spec.base.lr = 0;
        spec.estimators = vec![EstimatorChoice::McExact];
        spec.validate().unwrap();

        // interference-free benchmark: power sweep at zero interferer power
        let mut spec = Preset::Fig2.spec(None);
        spec.base.l1 = 0;
        spec.base.l2 = 0;
        spec.base.lr = 0;
        spec.base.interferer_power = 0.0;
        spec.ratio_db = None;
        spec.n_trials = 2000;
        spec.estimators = vec![EstimatorChoice::McExact];
        spec.validate().unwrap();
    }

    #[test]
    fn db_conversion_matches_manual_linear_run() {
        let spec = tiny_spec();
        let table = run_sweep(&spec).unwrap();
        // re-run the second grid point by hand with linear powers
        let mut cfg = spec.base.clone();
        cfg.tx_power = cfg.interferer_power * db_to_linear(20.0);
        let scn = Scenario::new(cfg).unwrap();
        let manual = mc::estimate_outage(&scn, Estimator::Exact, spec.n_trials, spec.seed);
        assert_eq!(
            table.rows[1].mc_exact.unwrap().p_hat.to_bits(),
            manual.p_hat.to_bits()
        );
    }

    #[test]
    fn ratio_lock_tracks_interferer_power() {
        let spec = Preset::Fig2.spec(None);
        let scn = spec.scenario_at(40.0).unwrap();
        assert!((scn.config.tx_power - 1e4).abs() < 1e-9);
        assert!((scn.config.interferer_power - 10.0).abs() < 1e-12);
    }

    #[test]
    fn rows_follow_grid_order_with_missing_fields_empty() {
        let mut spec = tiny_spec();
        spec.estimators = vec![EstimatorChoice::AnalyticLb];
        let table = run_sweep(&spec).unwrap();
        let csv = csv_string(&table);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let first = lines.next().unwrap();
        assert!(first.starts_with("E_over_EI_dB,1.0000000000000000e1,,,,,"));
        assert_eq!(first.split(',').count(), 8);
        // analytic column filled, asymptotic empty
        assert!(!first.split(',').nth(6).unwrap().is_empty());
        assert!(first.split(',').nth(7).unwrap().is_empty());
    }

    #[test]
    fn identical_seeds_give_identical_csv() {
        let spec = tiny_spec();
        let a = csv_string(&run_sweep(&spec).unwrap());
        let b = csv_string(&run_sweep(&spec).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn preset_names_resolve() {
        for name in Preset::NAMES {
            assert!(Preset::from_name(name).is_some());
        }
        assert!(Preset::from_name("fig9").is_none());
        for preset in [Preset::Fig2, Preset::Fig3, Preset::Fig4] {
            preset.spec(None).validate().unwrap();
        }
    }
}
