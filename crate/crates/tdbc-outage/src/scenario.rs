//! Scenario construction: user-level knobs (powers, geometry, interferer
//! layout) turned into the parameter set shared by the simulator and the
//! closed-form evaluator.
//!
//! All nodes sit on a line: terminal `T1` at 0, terminal `T2` at 1, the relay
//! between them at `d1`. Mean channel gains follow a `distance^{-n}` path-loss
//! law, and each node's interferers sit at normalized distances evenly spread
//! over a configurable interval.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative separation below which two interferer variances count as
/// duplicates (the partial-fraction weights blow up).
pub const MIN_RHO_SEPARATION: f64 = 1e-9;

/// Configuration validation error, carrying the offending field.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{field}: {reason}")]
pub struct ConfigError {
    /// Name of the field that failed validation.
    pub field: &'static str,
    /// Human-readable reason.
    pub reason: String,
}

impl ConfigError {
    fn new(field: &'static str, reason: impl Into<String>) -> Self {
        ConfigError {
            field,
            reason: reason.into(),
        }
    }
}

/// Every scenario knob, with powers in linear units (the unit AWGN variance
/// sets the scale).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Common transmit power `E` of both terminals and the relay, linear.
    pub tx_power: f64,
    /// Per-interferer transmit power `E_I`, linear. Zero is allowed and means
    /// an interference-free run (Monte Carlo only).
    pub interferer_power: f64,
    /// Target rate in bit/s/Hz; the outage threshold is `2^{3 rate} - 1`.
    pub target_rate: f64,
    /// Direct override of the target SINR threshold, bypassing the rate.
    #[serde(default)]
    pub phi_override: Option<f64>,
    /// Relay power split toward the `T1 -> R` observation; the complement
    /// goes to `T2 -> R`. Strictly inside (0, 1).
    pub omega1: f64,
    /// Normalized `T1`-relay distance, strictly inside (0, 1).
    pub d1: f64,
    /// Path-loss exponent.
    pub path_loss_exp: f64,
    /// Interferer counts at `T1`, `T2` and the relay.
    pub l1: usize,
    /// Interferer count at `T2`.
    pub l2: usize,
    /// Interferer count at the relay.
    pub lr: usize,
    /// Normalized distance interval over which each node's interferers are
    /// evenly placed.
    pub interval: (f64, f64),
    /// Explicit interferer channel variances at `T1`, overriding placement.
    #[serde(default)]
    pub explicit_rho_t1: Option<Vec<f64>>,
    /// Explicit interferer channel variances at `T2`.
    #[serde(default)]
    pub explicit_rho_t2: Option<Vec<f64>>,
    /// Explicit interferer channel variances at the relay.
    #[serde(default)]
    pub explicit_rho_relay: Option<Vec<f64>>,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            tx_power: 1.0,
            interferer_power: 0.0,
            target_rate: 1.0,
            phi_override: None,
            omega1: 0.5,
            d1: 0.5,
            path_loss_exp: 4.0,
            l1: 0,
            l2: 0,
            lr: 0,
            interval: (1.0, 1.5),
            explicit_rho_t1: None,
            explicit_rho_t2: None,
            explicit_rho_relay: None,
        }
    }
}

impl SystemConfig {
    /// Complement of the relay power split.
    pub fn omega2(&self) -> f64 {
        1.0 - self.omega1
    }

    /// Outage threshold `φ`: the override if set, else `2^{3 rate} - 1`.
    pub fn target_sinr(&self) -> f64 {
        self.phi_override
            .unwrap_or_else(|| (3.0 * self.target_rate).exp2() - 1.0)
    }

    /// Field-level validation. Comparisons are written so that NaN fields
    /// fail them.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.tx_power.is_finite() || self.tx_power <= 0.0 {
            return Err(ConfigError::new("tx_power", "must be finite and > 0"));
        }
        if !self.interferer_power.is_finite() || self.interferer_power < 0.0 {
            return Err(ConfigError::new(
                "interferer_power",
                "must be finite and >= 0",
            ));
        }
        let rate_ok = self.target_rate.is_finite() && self.target_rate > 0.0;
        if !rate_ok && self.phi_override.is_none() {
            return Err(ConfigError::new(
                "target_rate",
                "must be > 0 (or set phi_override)",
            ));
        }
        if let Some(phi) = self.phi_override {
            if !phi.is_finite() || phi <= 0.0 {
                return Err(ConfigError::new("phi_override", "must be finite and > 0"));
            }
        }
        // omega2 = 0 leaves the relayed SINR component undefined, so both
        // endpoints are excluded.
        let omega_ok = self.omega1 > 0.0 && self.omega1 < 1.0;
        if !omega_ok {
            return Err(ConfigError::new("omega1", "must lie strictly in (0, 1)"));
        }
        let d1_ok = self.d1 > 0.0 && self.d1 < 1.0;
        if !d1_ok {
            return Err(ConfigError::new("d1", "must lie strictly in (0, 1)"));
        }
        if !self.path_loss_exp.is_finite() || self.path_loss_exp <= 0.0 {
            return Err(ConfigError::new("path_loss_exp", "must be finite and > 0"));
        }
        let (a1, a2) = self.interval;
        let interval_ok = a1 > 0.0 && a2 >= a1 && a2.is_finite();
        if !interval_ok {
            return Err(ConfigError::new(
                "interval",
                "requires 0 < alpha1 <= alpha2",
            ));
        }
        for (field, explicit, count) in [
            ("explicit_rho_t1", &self.explicit_rho_t1, self.l1),
            ("explicit_rho_t2", &self.explicit_rho_t2, self.l2),
            ("explicit_rho_relay", &self.explicit_rho_relay, self.lr),
        ] {
            if let Some(rho) = explicit {
                if rho.len() != count {
                    return Err(ConfigError::new(
                        field,
                        format!("has {} entries but the count is {}", rho.len(), count),
                    ));
                }
                if rho.iter().any(|&v| !v.is_finite() || v <= 0.0) {
                    return Err(ConfigError::new(field, "entries must be finite and > 0"));
                }
            }
        }
        Ok(())
    }
}

/// Mean squared channel gains of the three inter-node links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    /// Direct `T1 <-> T2` link variance (distance normalized to 1).
    pub omega0: f64,
    /// `T1 <-> R` link variance, `d1^{-n}`.
    pub omega1: f64,
    /// `T2 <-> R` link variance, `(1 - d1)^{-n}`.
    pub omega2: f64,
}

/// Interferer channel variances for one node with the evenly-spaced placement
/// rule: `L` interferers at distances `alpha1 + (k-1)(alpha2-alpha1)/(L-1)`,
/// the single-interferer case sitting at `alpha1`.
pub fn placement_rho(count: usize, interval: (f64, f64), path_loss_exp: f64) -> Vec<f64> {
    let (a1, a2) = interval;
    (0..count)
        .map(|k| {
            let d = if count == 1 {
                a1
            } else {
                a1 + k as f64 * (a2 - a1) / (count - 1) as f64
            };
            d.powf(-path_loss_exp)
        })
        .collect()
}

/// Link variances plus the per-node interferer variance lists implied by a
/// configuration.
pub fn build_geometry(cfg: &SystemConfig) -> Result<(Geometry, [Vec<f64>; 3]), ConfigError> {
    cfg.validate()?;
    let n = cfg.path_loss_exp;
    let geo = Geometry {
        omega0: 1.0,
        omega1: cfg.d1.powf(-n),
        omega2: (1.0 - cfg.d1).powf(-n),
    };
    let rho = |explicit: &Option<Vec<f64>>, count: usize| {
        explicit
            .clone()
            .unwrap_or_else(|| placement_rho(count, cfg.interval, n))
    };
    Ok((
        geo,
        [
            rho(&cfg.explicit_rho_t1, cfg.l1),
            rho(&cfg.explicit_rho_t2, cfg.l2),
            rho(&cfg.explicit_rho_relay, cfg.lr),
        ],
    ))
}

/// Partial-fraction weights turning a sum of independent exponentials with
/// distinct means into a signed mixture of exponentials.
///
/// Returns `p~_k = w_k / ρ_k` with `w_k = Π_{j≠k} ρ_k/(ρ_k - ρ_j)`, so that
/// `f(t) = Σ_k (p~_k / E_I) exp(-t/(E_I ρ_k))` is the density of
/// `E_I Σ_k g_k` for any number of summands. For two or fewer entries these
/// weights coincide with the plain `Π_{j≠k} 1/(ρ_k - ρ_j)` form.
pub fn mixture_coefficients(rho: &[f64]) -> Result<Vec<f64>, ConfigError> {
    for (k, &rk) in rho.iter().enumerate() {
        if !rk.is_finite() || rk <= 0.0 {
            return Err(ConfigError::new("rho", "entries must be finite and > 0"));
        }
        for &rj in &rho[..k] {
            if (rk - rj).abs() < MIN_RHO_SEPARATION * rk.abs().max(rj.abs()) {
                return Err(ConfigError::new(
                    "rho",
                    format!("duplicate variances {rj} and {rk}: mixture is singular"),
                ));
            }
        }
    }
    Ok(rho
        .iter()
        .enumerate()
        .map(|(k, &rk)| {
            let w: f64 = rho
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &rj)| rk / (rk - rj))
                .product();
            w / rk
        })
        .collect())
}

/// One node's interferer description: variances plus mixture weights.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceProfile {
    rho: Vec<f64>,
    mix: Vec<f64>,
}

impl InterferenceProfile {
    /// Builds the profile, failing on non-positive or duplicate variances.
    pub fn new(rho: Vec<f64>) -> Result<Self, ConfigError> {
        let mix = mixture_coefficients(&rho)?;
        Ok(InterferenceProfile { rho, mix })
    }

    /// Number of interferers.
    pub fn len(&self) -> usize {
        self.rho.len()
    }

    /// True when the node sees no interferers.
    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// Interferer channel variances.
    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    /// Mixture weights `p~_k` (sum against `ρ_k` is one).
    pub fn mix(&self) -> &[f64] {
        &self.mix
    }
}

/// Every derived symbol entering the closed forms.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedConstants {
    /// Transmit power `E`, linear.
    pub tx_power: f64,
    /// Interferer power `E_I`, linear.
    pub interferer_power: f64,
    /// Relay power split and complement.
    pub omega1: f64,
    /// `1 - omega1`.
    pub omega2: f64,
    /// Direct-link variance.
    pub big_omega0: f64,
    /// `T1 -> R` variance.
    pub big_omega1: f64,
    /// `T2 -> R` variance.
    pub big_omega2: f64,
    /// Outage threshold `φ = 2^{3 R_t} - 1` (or the override).
    pub phi: f64,
    /// `1/Ω0 - 1/λ2`.
    pub phi_a: f64,
    /// `1/Ω0 - 1/λ1`; always below `phi_a`.
    pub phi_b: f64,
    /// `(1/Ω1 + (ω1+1)/(ω2 Ω2))^{-1}`.
    pub lambda1: f64,
    /// `(1/Ω1 + ω1/(ω2 Ω2))^{-1}`.
    pub lambda2: f64,
}

impl DerivedConstants {
    /// Assembles the constants from explicit link variances; scenario
    /// construction feeds this from the geometry, tests feed it directly.
    pub fn from_parts(
        tx_power: f64,
        interferer_power: f64,
        geometry: Geometry,
        omega1: f64,
        phi: f64,
    ) -> Self {
        let omega2 = 1.0 - omega1;
        let lambda1 =
            1.0 / (1.0 / geometry.omega1 + (omega1 + 1.0) / (omega2 * geometry.omega2));
        let lambda2 = 1.0 / (1.0 / geometry.omega1 + omega1 / (omega2 * geometry.omega2));
        DerivedConstants {
            tx_power,
            interferer_power,
            omega1,
            omega2,
            big_omega0: geometry.omega0,
            big_omega1: geometry.omega1,
            big_omega2: geometry.omega2,
            phi,
            phi_a: 1.0 / geometry.omega0 - 1.0 / lambda2,
            phi_b: 1.0 / geometry.omega0 - 1.0 / lambda1,
            lambda1,
            lambda2,
        }
    }

    /// `β_{j,k} = (E Ω0 / E_I)(1/ρ_{1,j} + ω2 Φa Ω2 / ρ_{R,k})`.
    pub fn beta(&self, rho_1j: f64, rho_rk: f64) -> f64 {
        self.tx_power * self.big_omega0 / self.interferer_power
            * (1.0 / rho_1j + self.omega2 * self.phi_a * self.big_omega2 / rho_rk)
    }

    /// `ϑ_j(φ) = (φ/λ2 + E/(E_I ρ_{1,j})) / Φa`; only meaningful when
    /// `Φa != 0`.
    pub fn vartheta(&self, rho_1j: f64, phi: f64) -> f64 {
        (phi / self.lambda2 + self.tx_power / (self.interferer_power * rho_1j)) / self.phi_a
    }
}

/// A validated scenario: configuration, derived constants, and the three
/// interference profiles. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// The originating configuration.
    pub config: SystemConfig,
    /// Derived constants at the configured threshold.
    pub consts: DerivedConstants,
    /// Interferers at terminal `T1`.
    pub t1: InterferenceProfile,
    /// Interferers at terminal `T2` (only used when analyzing `T2`).
    pub t2: InterferenceProfile,
    /// Interferers at the relay.
    pub relay: InterferenceProfile,
}

impl Scenario {
    /// Validates the configuration and derives everything downstream.
    pub fn new(config: SystemConfig) -> Result<Self, ConfigError> {
        let (geometry, [rho_t1, rho_t2, rho_relay]) = build_geometry(&config)?;
        let consts = DerivedConstants::from_parts(
            config.tx_power,
            config.interferer_power,
            geometry,
            config.omega1,
            config.target_sinr(),
        );
        Ok(Scenario {
            t1: InterferenceProfile::new(rho_t1)?,
            t2: InterferenceProfile::new(rho_t2)?,
            relay: InterferenceProfile::new(rho_relay)?,
            config,
            consts,
        })
    }

    /// The same network viewed from terminal `T2`: distances, power split and
    /// terminal interferers swap roles, so analyzing the swapped scenario "at
    /// T1" yields the outage at `T2` of the original.
    pub fn terminal_swapped(&self) -> Result<Self, ConfigError> {
        let mut cfg = self.config.clone();
        cfg.d1 = 1.0 - self.config.d1;
        cfg.omega1 = self.config.omega2();
        cfg.l1 = self.config.l2;
        cfg.l2 = self.config.l1;
        cfg.explicit_rho_t1 = self.config.explicit_rho_t2.clone();
        cfg.explicit_rho_t2 = self.config.explicit_rho_t1.clone();
        Scenario::new(cfg)
    }
}
