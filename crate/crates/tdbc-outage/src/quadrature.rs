//! Adaptive Gauss–Kronrod integration and independent reference evaluations
//! of every integral the closed forms claim to solve.
//!
//! The reference routines here deliberately avoid the exponential-integral
//! and series code in [`crate::specfun`]: the integrands are assembled from
//! `exp` and rational functions only, so a bug cannot certify itself. Outside
//! tests they serve as the fallback path when the series evaluator gives up.

use crate::scenario::{DerivedConstants, InterferenceProfile};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use thiserror::Error;

/// Tolerances and subdivision budget for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Absolute tolerance on the accumulated error estimate.
    pub abs_tol: f64,
    /// Relative tolerance against the accumulated integral value.
    pub rel_tol: f64,
    /// Maximum number of interval bisections.
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

/// Integration failure.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    /// The subdivision budget ran out before the tolerance was met.
    #[error("tolerance not met: achieved {achieved:e}, requested {requested:e}")]
    ToleranceNotMet {
        /// Error estimate actually reached.
        achieved: f64,
        /// Tolerance that was asked for.
        requested: f64,
    },
    /// Invalid tolerance specification.
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(&'static str),
}

/// Integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    /// The integral estimate.
    pub value: f64,
    /// Accumulated absolute error estimate.
    pub error_estimate: f64,
    /// Number of bisections performed.
    pub subdivisions: usize,
}

// 15-point Kronrod abscissae on [-1, 1] with the embedded 7-point Gauss rule,
// at their customary published precision.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_33,
    0.949_107_912_342_758_524_526_189_684_047_85,
    0.864_864_423_359_769_072_789_712_788_640_93,
    0.741_531_185_599_394_439_863_864_773_280_79,
    0.586_087_235_467_691_130_294_144_838_258_73,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_24,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_08,
    0.279_705_391_489_276_667_901_467_771_423_78,
    0.381_830_050_505_118_944_950_369_775_488_97,
    0.417_959_183_673_469_387_755_102_040_816_33,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_2,
    0.104_790_010_322_250_183_839_876_322_541_52,
    0.140_653_259_715_525_918_745_189_590_510_24,
    0.169_004_726_639_267_902_826_583_426_598_55,
    0.190_350_578_064_785_409_913_256_402_421_01,
    0.204_432_940_075_298_892_414_161_999_234_65,
    0.209_482_141_084_727_828_012_999_174_891_71,
];

/// One Gauss–Kronrod 15(7) pass over `[a, b]`: value and error estimate.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut kronrod = f_center * WGK[7];
    let mut gauss = 0.0;
    for (j, &weight) in WG.iter().enumerate().take(3) {
        let x = half * XGK[2 * j + 1];
        let sum = f(center - x) + f(center + x);
        gauss += weight * sum;
        kronrod += WGK[2 * j + 1] * sum;
    }
    gauss += WG[3] * f_center;
    for j in 0..4 {
        let x = half * XGK[2 * j];
        kronrod += WGK[2 * j] * (f(center - x) + f(center + x));
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Segment {
    value: f64,
    error: f64,
    a: f64,
    b: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive integration of `f` over `[a, b]`: the interval with the
/// worst error estimate is bisected until the summed estimate satisfies
/// `max(abs_tol, rel_tol * |integral|)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<QuadResult, QuadError> {
    let tolerances_ok = spec.abs_tol > 0.0 && spec.rel_tol > 0.0;
    if !tolerances_ok {
        return Err(QuadError::InvalidSpec("tolerances must be positive"));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            subdivisions: 0,
        });
    }

    let (value, error) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { value, error, a, b });
    let mut total_value = value;
    let mut total_error = error;

    for subdivisions in 0..spec.max_subdivisions {
        if total_error <= spec.abs_tol.max(spec.rel_tol * total_value.abs()) {
            return Ok(QuadResult {
                value: total_value,
                error_estimate: total_error,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap cannot be empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval no longer splittable in f64
            heap.push(worst);
            break;
        }
        let (lv, le) = gk15(&f, worst.a, mid);
        let (rv, re) = gk15(&f, mid, worst.b);
        total_value += lv + rv - worst.value;
        total_error += le + re - worst.error;
        heap.push(Segment {
            value: lv,
            error: le,
            a: worst.a,
            b: mid,
        });
        heap.push(Segment {
            value: rv,
            error: re,
            a: mid,
            b: worst.b,
        });
    }

    if total_error <= spec.abs_tol.max(spec.rel_tol * total_value.abs()) {
        return Ok(QuadResult {
            value: total_value,
            error_estimate: total_error,
            subdivisions: spec.max_subdivisions,
        });
    }
    Err(QuadError::ToleranceNotMet {
        achieved: total_error,
        requested: spec.abs_tol.max(spec.rel_tol * total_value.abs()),
    })
}

/// Integration over `[0, ∞)` via the substitution `t = u/(1-u)`.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(
    f: F,
    spec: &QuadratureSpec,
) -> Result<QuadResult, QuadError> {
    integrate(
        |u| {
            let one_minus = 1.0 - u;
            f(u / one_minus) / (one_minus * one_minus)
        },
        0.0,
        1.0,
        spec,
    )
}

/// Reference value of the relay-side integral
/// `Θ_k(φ) = ∫_0^φ e^{-Φb r/E} / ((φ-r)/(E Ω2) + ω2/(E_I ρ_{R,k})) dr`.
///
/// The denominator is bounded below by `ω2/(E_I ρ_{R,k}) > 0`, so the
/// integrand is smooth on the whole interval.
pub fn quad_theta(
    c: &DerivedConstants,
    relay: &InterferenceProfile,
    k: usize,
    phi: f64,
    spec: &QuadratureSpec,
) -> Result<f64, QuadError> {
    let rho = relay.rho()[k];
    let e = c.tx_power;
    let offset = c.omega2 / (c.interferer_power * rho);
    let rate = c.phi_b / e;
    integrate(
        |r| (-rate * r).exp() / ((phi - r) / (e * c.big_omega2) + offset),
        0.0,
        phi,
        spec,
    )
    .map(|q| q.value)
}

/// Reference value of the terminal-side integral
/// `Ξ_j(φ) = ∫_0^φ e^{-Φb r/E} / (Φa r/E + φ/(E λ2) + 1/(E_I ρ_{1,j})) dr`.
///
/// Positivity of the denominator on `[0, φ]` holds for every sign of `Φa`
/// because `Φa + 1/λ2 = 1/Ω0 > 0`.
pub fn quad_xi(
    c: &DerivedConstants,
    t1: &InterferenceProfile,
    j: usize,
    phi: f64,
    spec: &QuadratureSpec,
) -> Result<f64, QuadError> {
    let rho = t1.rho()[j];
    let e = c.tx_power;
    let offset = phi / (e * c.lambda2) + 1.0 / (c.interferer_power * rho);
    let slope = c.phi_a / e;
    let rate = c.phi_b / e;
    integrate(
        |r| (-rate * r).exp() / (slope * r + offset),
        0.0,
        phi,
        spec,
    )
    .map(|q| q.value)
}

/// Reference value of the relayed-path term `P2(φ)`: the inner interference
/// averages are exponential integrals solved in closed elementary form, and
/// the remaining one-dimensional integral over the direct-link SINR share is
/// done adaptively. Fully independent of the series/Ei branch logic.
///
/// The mixture-weighted sum lives inside the integrand: the signed weights
/// can dwarf their sum, so integrating term by term would let per-term
/// tolerances be amplified by the cancellation. Summing pointwise keeps that
/// amplification at the f64 noise floor.
pub fn quad_p2(
    c: &DerivedConstants,
    t1: &InterferenceProfile,
    relay: &InterferenceProfile,
    phi: f64,
    spec: &QuadratureSpec,
) -> Result<f64, QuadError> {
    if phi == 0.0 {
        return Ok(0.0);
    }
    let e = c.tx_power;
    let ei_pow = c.interferer_power;
    let prefactor =
        (-phi / (e * c.lambda1)).exp() / (ei_pow * ei_pow * e * c.big_omega0);
    let integrand = |r: f64| {
        let decay = (-c.phi_b * r / e).exp();
        let mut sum = 0.0;
        for (&p_j, &rho_1j) in t1.mix().iter().zip(t1.rho()) {
            let b = c.phi_a * r / e + phi / (e * c.lambda2) + 1.0 / (ei_pow * rho_1j);
            let terminal = p_j * (1.0 / b + 1.0 / (b * b));
            let mut relay_sum = 0.0;
            for (&q_k, &rho_rk) in relay.mix().iter().zip(relay.rho()) {
                let a = (phi - r) / (c.omega2 * e * c.big_omega2) + 1.0 / (ei_pow * rho_rk);
                relay_sum += q_k / a;
            }
            sum += terminal * relay_sum;
        }
        decay * sum
    };
    Ok(prefactor * integrate(integrand, 0.0, phi, spec)?.value)
}

/// Reference value of the direct-path term `P1(φ)` by a one-dimensional
/// quadrature over the interference mixture density.
pub fn quad_p1(
    c: &DerivedConstants,
    t1: &InterferenceProfile,
    phi: f64,
    spec: &QuadratureSpec,
) -> Result<f64, QuadError> {
    let e0 = c.tx_power * c.big_omega0;
    let ei_pow = c.interferer_power;
    integrate_semi_infinite(
        |t| {
            let density: f64 = t1
                .mix()
                .iter()
                .zip(t1.rho())
                .map(|(&p, &rho)| p / ei_pow * (-t / (ei_pow * rho)).exp())
                .sum();
            density * (-(t + 1.0) * phi / e0).exp()
        },
        spec,
    )
    .map(|q| q.value)
}

/// Reference outage CDF of the bounded SINR, `1 - P1(φ) - P2(φ)`, with both
/// pieces evaluated by quadrature.
pub fn quad_cdf_ub(
    c: &DerivedConstants,
    t1: &InterferenceProfile,
    relay: &InterferenceProfile,
    phi: f64,
    spec: &QuadratureSpec,
) -> Result<f64, QuadError> {
    if phi == 0.0 {
        return Ok(0.0);
    }
    let p1 = quad_p1(c, t1, phi, spec)?;
    let p2 = quad_p2(c, t1, relay, phi, spec)?;
    Ok(1.0 - p1 - p2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{Scenario, SystemConfig};

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn polynomial_and_trig() {
        let q = integrate(|x| x * x, 0.0, 1.0, &spec()).unwrap();
        assert!((q.value - 1.0 / 3.0).abs() < 1e-14);
        let q = integrate(|x| x.sin(), 0.0, std::f64::consts::PI, &spec()).unwrap();
        assert!((q.value - 2.0).abs() < 1e-13);
    }

    #[test]
    fn steep_exponential() {
        // dynamic range of ~e^300 exercises the adaptive refinement
        let q = integrate(|x| x.exp(), 0.0, 300.0, &spec()).unwrap();
        let want = 300f64.exp() - 1.0;
        assert!((q.value - want).abs() / want < 1e-12);
    }

    #[test]
    fn semi_infinite_moments() {
        let q = integrate_semi_infinite(|t| (-t).exp(), &spec()).unwrap();
        assert!((q.value - 1.0).abs() < 1e-12);
        let q = integrate_semi_infinite(|t| t * (-t).exp(), &spec()).unwrap();
        assert!((q.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn budget_exhaustion_reports_achieved_error() {
        let tight = QuadratureSpec {
            abs_tol: 1e-300,
            rel_tol: 1e-300,
            max_subdivisions: 3,
        };
        match integrate(|x| 1.0 / (1e-5 + x * x), -1.0, 1.0, &tight) {
            Err(QuadError::ToleranceNotMet { achieved, .. }) => assert!(achieved > 0.0),
            other => panic!("expected tolerance failure, got {other:?}"),
        }
    }

    #[test]
    fn refinement_invariance() {
        // doubling the subdivision budget must not move a converged result
        let f = |x: f64| (-(x * x)).exp() / (1.0 + x);
        let a = integrate(f, 0.0, 5.0, &spec()).unwrap().value;
        let wide = QuadratureSpec {
            max_subdivisions: 4000,
            abs_tol: 1e-13,
            rel_tol: 1e-12,
        };
        let b = integrate(f, 0.0, 5.0, &wide).unwrap().value;
        assert!((a - b).abs() <= 1e-10 * b.abs());
    }

    fn demo_scenario() -> Scenario {
        Scenario::new(SystemConfig {
            tx_power: 10.0,
            interferer_power: 2.0,
            target_rate: 1.0,
            l1: 2,
            l2: 1,
            lr: 3,
            ..SystemConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn oracle_integrals_vanish_at_zero_threshold() {
        let scn = demo_scenario();
        let c = &scn.consts;
        assert_eq!(quad_theta(c, &scn.relay, 0, 0.0, &spec()).unwrap(), 0.0);
        assert_eq!(quad_xi(c, &scn.t1, 0, 0.0, &spec()).unwrap(), 0.0);
        assert_eq!(quad_p2(c, &scn.t1, &scn.relay, 0.0, &spec()).unwrap(), 0.0);
        assert_eq!(
            quad_cdf_ub(c, &scn.t1, &scn.relay, 0.0, &spec()).unwrap(),
            0.0
        );
    }

    #[test]
    fn theta_log_case_matches_elementary_form() {
        // With Φb = 0 the integral has an elementary antiderivative.
        // d1 = 0.5, n = 4 gives Ω1 = Ω2 = 16; ω1 = 0.875 makes Φb exactly 0.
        let scn = Scenario::new(SystemConfig {
            tx_power: 10.0,
            interferer_power: 2.0,
            target_rate: 1.0,
            omega1: 0.875,
            l1: 1,
            l2: 1,
            lr: 1,
            ..SystemConfig::default()
        })
        .unwrap();
        let c = &scn.consts;
        assert_eq!(c.phi_b, 0.0);
        let phi = 7.0;
        let rho = scn.relay.rho()[0];
        let want = c.tx_power
            * c.big_omega2
            * (1.0 + phi * c.interferer_power * rho / (c.omega2 * c.tx_power * c.big_omega2))
                .ln();
        let got = quad_theta(c, &scn.relay, 0, phi, &spec()).unwrap();
        assert!((got - want).abs() / want < 1e-10);
    }

    #[test]
    fn cdf_is_a_probability() {
        let scn = demo_scenario();
        let v = quad_cdf_ub(&scn.consts, &scn.t1, &scn.relay, 7.0, &spec()).unwrap();
        assert!((0.0..=1.0).contains(&v), "got {v}");
    }
}
