//! Outage probability of the three-slot amplify-and-forward two-way relay
//! protocol under co-channel interference.
//!
//! Two terminals exchange messages through a relay over three time slots,
//! every node disturbed by a finite set of Rayleigh-faded interferers. This
//! crate evaluates the outage probability of that link along two independent
//! routes and cross-certifies them:
//!
//! * [`mc`] — a Monte Carlo simulator of the post-combining SINR with
//!   counter-based per-trial random streams (bit-reproducible at any worker
//!   count), offering the exact SINR, its harmonic-mean approximation, and
//!   the min-based upper bound as selectable estimators;
//! * [`analytic`] — the closed-form lower bound on the outage probability and
//!   its small-threshold asymptote, built from a hypoexponential mixture
//!   representation of the interference and a sign-dependent case analysis of
//!   two auxiliary integrals;
//! * [`quadrature`] — an adaptive Gauss–Kronrod integrator evaluating the
//!   same integrals with no shared special-function code, used as the arbiter
//!   in tests and as the runtime fallback for slowly converging series;
//! * [`specfun`] — the exponential integral, integer-order incomplete gamma,
//!   and a geometrically tail-bounded series evaluator;
//! * [`scenario`] — geometry, powers and interferer placement turned into the
//!   exact parameter set both routes consume;
//! * [`sweep`]/[`config`] — parameter sweeps, presets and plot-ready CSV.
//!
//! ```
//! use tdbc_outage::{analytic, mc, scenario::{Scenario, SystemConfig}};
//!
//! let scn = Scenario::new(SystemConfig {
//!     tx_power: 100.0,        // 20 dB
//!     interferer_power: 1.0,  // 0 dB
//!     target_rate: 1.0,       // bit/s/Hz, threshold 2^3 - 1
//!     l1: 1, l2: 1, lr: 1,    // one interferer per node
//!     ..SystemConfig::default()
//! })?;
//!
//! let bound = analytic::lower_bound_outage(&scn)?.value;
//! let sim = mc::estimate_outage(&scn, mc::Estimator::UpperBound, 100_000, 7);
//! assert!((bound - sim.p_hat).abs() < 3.0 * sim.ci_halfwidth);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod analytic;
pub mod config;
pub mod mc;
pub mod quadrature;
pub mod scenario;
pub mod specfun;
pub mod sweep;

pub use analytic::{asymptotic_outage, lower_bound_outage};
pub use mc::{estimate_outage, Estimator};
pub use scenario::{Scenario, SystemConfig};
pub use sweep::{run_sweep, Preset, SweepSpec};
