//! Monte Carlo estimation of the outage probability by direct simulation of
//! the three-slot protocol.
//!
//! Reproducibility contract: every trial draws from its own counter-derived
//! substream, so an estimate depends only on `(seed, n_trials)` — never on
//! how the trials were partitioned across workers.

use crate::scenario::Scenario;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer; a bijective 64-bit mix.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based per-trial random stream (SplitMix64).
///
/// `(seed, trial)` is hashed into the initial counter, after which each call
/// advances the counter by the golden-ratio increment and finalizes it. Two
/// streams overlap only if their hashed origins land within a few increments
/// of each other, which is negligible for any realistic trial count.
#[derive(Debug, Clone)]
pub struct TrialRng {
    state: u64,
}

impl TrialRng {
    /// Stream for one `(seed, trial)` pair.
    pub fn new(seed: u64, trial: u64) -> Self {
        TrialRng {
            state: mix64(seed ^ mix64(trial.wrapping_mul(GOLDEN) ^ 0x6A09_E667_F3BC_C909)),
        }
    }

    /// Next raw 64-bit value.
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform draw in `[0, 1)` with 53-bit resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Exponential draw with the given mean (inverse CDF).
    #[inline]
    pub fn exponential(&mut self, mean: f64) -> f64 {
        -mean * (1.0 - self.uniform()).ln()
    }
}

/// One realization of every squared channel gain and the two interference
/// power sums entering the terminal-`T1` SINR.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDraw {
    /// Direct-link squared gain `|h0|^2`.
    pub g0: f64,
    /// `T1 -> R` squared gain `|h1|^2`.
    pub g1: f64,
    /// `T2 -> R` squared gain `|h2|^2`.
    pub g2: f64,
    /// Per-interferer squared gains at the relay.
    pub relay_gains: Vec<f64>,
    /// Per-interferer squared gains at `T1`.
    pub terminal_gains: Vec<f64>,
    /// Relay interference power `S = E_I Σ relay_gains`.
    pub s: f64,
    /// Terminal interference power `T = E_I Σ terminal_gains`.
    pub t: f64,
}

/// Which SINR expression the estimator thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Full post-combining SINR of the simulated protocol.
    Exact,
    /// High-SNR approximation: direct SINR plus the harmonic mean of the two
    /// relayed-path components.
    Approx,
    /// Upper bound: direct SINR plus the minimum of the two components. Its
    /// outage is the quantity the closed-form expressions describe.
    UpperBound,
}

/// A Monte Carlo outage estimate with its normal-approximation confidence
/// half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEstimate {
    /// Fraction of trials in outage.
    pub p_hat: f64,
    /// 95% half-width `1.96 sqrt(p(1-p)/n)`.
    pub ci_halfwidth: f64,
    /// Number of trials.
    pub n_trials: u64,
    /// The SINR expression that was thresholded.
    pub estimator: Estimator,
}

/// Draws one frame: fading gains stay fixed across the three slots (only the
/// interference power sums enter the SINR, so per-slot interferer symbols
/// need no separate draws).
pub fn sample_draw(rng: &mut TrialRng, scn: &Scenario) -> ChannelDraw {
    let c = &scn.consts;
    let g0 = rng.exponential(c.big_omega0);
    let g1 = rng.exponential(c.big_omega1);
    let g2 = rng.exponential(c.big_omega2);
    let relay_gains: Vec<f64> = scn
        .relay
        .rho()
        .iter()
        .map(|&rho| rng.exponential(rho))
        .collect();
    let terminal_gains: Vec<f64> = scn
        .t1
        .rho()
        .iter()
        .map(|&rho| rng.exponential(rho))
        .collect();
    let e_i = c.interferer_power;
    ChannelDraw {
        g0,
        g1,
        g2,
        s: e_i * relay_gains.iter().sum::<f64>(),
        t: e_i * terminal_gains.iter().sum::<f64>(),
        relay_gains,
        terminal_gains,
    }
}

/// Post-combining SINR at `T1`: direct-link term plus the amplified relayed
/// term, with the relay's scaling normalized by its total received power and
/// the self-interference already removed.
pub fn sinr_exact(draw: &ChannelDraw, scn: &Scenario) -> f64 {
    let c = &scn.consts;
    let e = c.tx_power;
    let norm = c.omega1 * e * draw.g1 + c.omega2 * e * draw.g2 + draw.s + 1.0;
    let a1_sq = c.omega1 / norm;
    let a2_sq = c.omega2 / norm;
    let direct = e * draw.g0 / (draw.t + 1.0);
    let relayed = a2_sq * e * e * draw.g1 * draw.g2
        / ((a1_sq + a2_sq) * e * draw.g1 * (draw.s + 1.0) + draw.t + 1.0);
    direct + relayed
}

/// The two relayed-path component SINRs: the `T1 -> R` hop and the
/// interference-amplified `T2 -> R -> T1` hop.
fn component_sinrs(draw: &ChannelDraw, scn: &Scenario) -> (f64, f64, f64) {
    let c = &scn.consts;
    let e = c.tx_power;
    let direct = e * draw.g0 / (draw.t + 1.0);
    let first = e * draw.g1 / (draw.t + 1.0);
    let second =
        c.omega2 * e * draw.g2 / (draw.s + c.omega1 * draw.t + c.omega1 + 1.0);
    (direct, first, second)
}

/// Harmonic-mean approximation of the relayed term; reduces to the direct
/// term alone when both components vanish.
pub fn sinr_approx(draw: &ChannelDraw, scn: &Scenario) -> f64 {
    let (direct, c1, c2) = component_sinrs(draw, scn);
    if c1 + c2 == 0.0 {
        direct
    } else {
        direct + c1 * c2 / (c1 + c2)
    }
}

/// Upper bound on the SINR from `ab/(a+b) <= min(a, b)`.
pub fn sinr_upper_bound(draw: &ChannelDraw, scn: &Scenario) -> f64 {
    let (direct, c1, c2) = component_sinrs(draw, scn);
    direct + c1.min(c2)
}

/// Estimates the outage probability `Pr(SINR < φ)` over `n_trials`
/// independent frames. Bit-identical for a fixed `(seed, n_trials)` whatever
/// the rayon worker count.
pub fn estimate_outage(
    scn: &Scenario,
    estimator: Estimator,
    n_trials: u64,
    seed: u64,
) -> OutageEstimate {
    assert!(n_trials >= 1, "need at least one trial");
    let phi = scn.consts.phi;
    let outages: u64 = (0..n_trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = TrialRng::new(seed, trial);
            let draw = sample_draw(&mut rng, scn);
            let sinr = match estimator {
                Estimator::Exact => sinr_exact(&draw, scn),
                Estimator::Approx => sinr_approx(&draw, scn),
                Estimator::UpperBound => sinr_upper_bound(&draw, scn),
            };
            u64::from(sinr < phi)
        })
        .sum();
    let p_hat = outages as f64 / n_trials as f64;
    OutageEstimate {
        p_hat,
        ci_halfwidth: 1.96 * (p_hat * (1.0 - p_hat) / n_trials as f64).sqrt(),
        n_trials,
        estimator,
    }
}
