//! Special functions backing the closed-form outage expressions.
//!
//! Three building blocks live here: the exponential integral `Ei`, the lower
//! incomplete gamma function of integer order, and a series evaluator for
//! sums of the form `Σ_l η1^l η4^{-(l+1)} (η2 φ + η3)^{-(l+1)} φ(l+1, φ η4)`
//! whose truncation point is chosen from an a-priori geometric tail bound
//! rather than an empirical stopping rule.
//!
//! All routines are pure `f64` functions; there is no shared state.

use thiserror::Error;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Default cap on series terms before the caller should fall back to
/// quadrature.
pub const DEFAULT_SERIES_CAP: usize = 20_000;

/// Default relative tolerance for the series tail bound.
pub const DEFAULT_SERIES_REL_TOL: f64 = 1e-12;

/// Largest exponent magnitude the series evaluator accepts before `exp`
/// under/overflow would corrupt the recurrences.
const MAX_SERIES_EXPONENT: f64 = 700.0;

const MAX_ITER: usize = 500;

/// Errors from special-function evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFunError {
    /// Input outside the function's domain.
    #[error("domain error: {0}")]
    Domain(&'static str),
    /// The certified truncation point exceeds the configured cap; the caller
    /// is expected to fall back to direct quadrature.
    #[error("series needs {required} terms but the cap is {cap}")]
    SeriesCapExceeded { required: usize, cap: usize },
    /// Series or continued fraction failed to converge within the iteration
    /// budget.
    #[error("iteration budget exhausted in {0}")]
    NoConvergence(&'static str),
}

/// Exponential integral Ei(x), principal value for `x > 0`.
///
/// Strategy: convergent power series for `0 < x <= 40`, divergent asymptotic
/// expansion truncated at its smallest term beyond; `Ei(x) = -E1(-x)` on the
/// negative axis with a series/continued-fraction split at `-1`. Relative
/// accuracy is better than 1e-12 for `|x|` in `[1e-6, 700]` away from the
/// positive real zero near 0.3725, where relative error is limited by the
/// inherent cancellation of any f64 evaluation.
pub fn exp_integral_ei(x: f64) -> Result<f64, SpecFunError> {
    if !x.is_finite() {
        return Err(SpecFunError::Domain("Ei requires a finite argument"));
    }
    if x == 0.0 {
        return Err(SpecFunError::Domain("Ei is undefined at x = 0"));
    }
    if x > 0.0 {
        if x <= 40.0 {
            ei_power_series(x)
        } else {
            ei_asymptotic(x)
        }
    } else {
        Ok(-e1(-x)?)
    }
}

/// Ei by its everywhere-convergent power series; used on (0, 40].
fn ei_power_series(x: f64) -> Result<f64, SpecFunError> {
    // Ei(x) = γ + ln x + Σ_{k>=1} x^k / (k · k!). All terms are positive for
    // x > 0, so the sum carries no cancellation.
    let mut factorial_term = 1.0;
    let mut sum = 0.0;
    for k in 1..=MAX_ITER {
        factorial_term *= x / k as f64;
        let contribution = factorial_term / k as f64;
        sum += contribution;
        if contribution < sum * 1e-17 {
            return Ok(EULER_GAMMA + x.ln() + sum);
        }
    }
    Err(SpecFunError::NoConvergence("Ei power series"))
}

/// Ei by the asymptotic expansion e^x/x · Σ k!/x^k, truncated at the
/// smallest term; used for x > 40 where that term is below 1e-14 relative.
fn ei_asymptotic(x: f64) -> Result<f64, SpecFunError> {
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    for k in 1..=MAX_ITER {
        let next = term * k as f64 / x;
        if next >= term {
            break;
        }
        term = next;
        sum += term;
        if term < sum * 1e-18 {
            break;
        }
    }
    Ok(x.exp() / x * sum)
}

/// Exponentially scaled value `e^u Ei(-u)` for `u > 0`, computed without
/// forming either factor.
///
/// The closed-form outage branches combine `Ei` differences with exponential
/// prefactors whose separate evaluation would under/overflow long before the
/// product does; the continued fraction for `E1` delivers the scaled product
/// directly (`e^u Ei(-u) = -e^u E1(u)`).
pub fn exp_scaled_ei_neg(u: f64) -> Result<f64, SpecFunError> {
    if !u.is_finite() || u <= 0.0 {
        return Err(SpecFunError::Domain("exp_scaled_ei_neg requires u > 0"));
    }
    if u <= 1.0 {
        Ok(u.exp() * -e1(u)?)
    } else {
        Ok(-upper_gamma_cf(0.0, u)?)
    }
}

/// E1(y) for y > 0: series below 1, Lentz continued fraction above.
fn e1(y: f64) -> Result<f64, SpecFunError> {
    debug_assert!(y > 0.0);
    if y <= 1.0 {
        // E1(y) = -γ - ln y + Σ_{k>=1} (-1)^{k+1} y^k / (k · k!)
        let mut factorial_term = 1.0;
        let mut sum = 0.0;
        for k in 1..=MAX_ITER {
            factorial_term *= -y / k as f64;
            let contribution = -factorial_term / k as f64;
            sum += contribution;
            if contribution.abs() < sum.abs() * 1e-17 {
                return Ok(-EULER_GAMMA - y.ln() + sum);
            }
        }
        Err(SpecFunError::NoConvergence("E1 series"))
    } else {
        // E1(y) = Γ(0, y) = e^{-y} · CF
        Ok((-y).exp() * upper_gamma_cf(0.0, y)?)
    }
}

/// Continued-fraction factor F with Γ(a, x) = e^{-x} x^a F, by the modified
/// Lentz method. Requires x > a + 1 for fast convergence.
fn upper_gamma_cf(a: f64, x: f64) -> Result<f64, SpecFunError> {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut f = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            return Ok(f);
        }
    }
    Err(SpecFunError::NoConvergence("upper gamma continued fraction"))
}

/// Lower incomplete gamma function `φ(n, x) = ∫_0^x t^{n-1} e^{-t} dt` for
/// integer order `n >= 1`.
///
/// Evaluated by the ascending series for `x < n + 1` and by the complement
/// `Γ(n) - Γ(n, x)` (continued fraction) for larger `x`; the naive upward
/// recurrence `φ(n+1, x) = n φ(n, x) - x^n e^{-x}` is never used because it
/// cancels catastrophically once `n` outgrows `x`.
pub fn lower_inc_gamma(n: u32, x: f64) -> Result<f64, SpecFunError> {
    if n < 1 {
        return Err(SpecFunError::Domain("lower_inc_gamma requires n >= 1"));
    }
    if !x.is_finite() || x < 0.0 {
        return Err(SpecFunError::Domain(
            "lower_inc_gamma requires finite x >= 0",
        ));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let a = f64::from(n);
    if x < a + 1.0 {
        // φ(n, x) = x^n e^{-x} Σ_{k>=0} x^k / (n (n+1) ... (n+k))
        let mut term = 1.0 / a;
        let mut sum = term;
        for k in 1..=MAX_ITER {
            term *= x / (a + k as f64);
            sum += term;
            if term < sum * 1e-17 {
                let log_prefactor = a * x.ln() - x;
                return Ok(if log_prefactor > f64::MAX.ln() {
                    f64::INFINITY
                } else {
                    log_prefactor.exp() * sum
                });
            }
        }
        Err(SpecFunError::NoConvergence("lower gamma series"))
    } else {
        // φ(n, x) = Γ(n) - e^{-x} x^n · CF. At the series/fraction crossover
        // the two sides are comparable, so the subtraction loses at most one
        // bit.
        let log_upper = a * x.ln() - x;
        let upper = if log_upper > f64::MAX.ln() {
            f64::INFINITY
        } else {
            log_upper.exp() * upper_gamma_cf(a, x)?
        };
        Ok(factorial(n - 1) - upper)
    }
}

/// (n)! in f64; infinity from 171! on, matching the overflow of the true
/// value.
pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0_f64, |acc, k| acc * k as f64)
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Parameters of the truncated series `Σ_l Δ_l` with
/// `Δ_l = η1^l η4^{-(l+1)} (η2 φ + η3)^{-(l+1)} φ(l+1, φ η4)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesParams {
    /// Numerator base; zero collapses the series to its first term.
    pub eta1: f64,
    /// Denominator slope.
    pub eta2: f64,
    /// Denominator offset.
    pub eta3: f64,
    /// Exponential rate.
    pub eta4: f64,
    /// Upper limit of the underlying integral.
    pub phi: f64,
    /// Requested relative tail tolerance.
    pub rel_tol: f64,
}

impl SeriesParams {
    /// Validates positivity and the root-test ratio `η1 φ / (η2 φ + η3) < 1`.
    pub fn new(
        eta1: f64,
        eta2: f64,
        eta3: f64,
        eta4: f64,
        phi: f64,
        rel_tol: f64,
    ) -> Result<Self, SpecFunError> {
        let p = SeriesParams {
            eta1,
            eta2,
            eta3,
            eta4,
            phi,
            rel_tol,
        };
        let all = [eta1, eta2, eta3, eta4, phi, rel_tol];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(SpecFunError::Domain("series parameters must be finite"));
        }
        if eta1 < 0.0 || eta2 <= 0.0 || eta3 <= 0.0 || eta4 <= 0.0 {
            return Err(SpecFunError::Domain(
                "series parameters require eta1 >= 0 and eta2, eta3, eta4 > 0",
            ));
        }
        if phi <= 0.0 || rel_tol <= 0.0 {
            return Err(SpecFunError::Domain("series requires phi, rel_tol > 0"));
        }
        if p.ratio() >= 1.0 {
            return Err(SpecFunError::Domain(
                "geometric ratio eta1*phi/(eta2*phi+eta3) must be below one",
            ));
        }
        Ok(p)
    }

    /// Geometric ratio `r = η1 φ / (η2 φ + η3)` of the root test.
    pub fn ratio(&self) -> f64 {
        self.eta1 * self.phi / (self.eta2 * self.phi + self.eta3)
    }
}

/// Result of a certified series summation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    /// The truncated sum `Σ_{l=0}^{L} Δ_l`.
    pub value: f64,
    /// Number of terms used (`L + 1`).
    pub terms_used: usize,
    /// A-priori bound on the discarded tail `Σ_{l>L} Δ_l`.
    pub tail_bound: f64,
}

/// Sums `Σ_l Δ_l` with a truncation point certified by the geometric tail
/// bound `C r^{L+1} / (1 - r)`, where `r` is the root-test ratio and
/// `C = (1 - e^{-η4 φ}) / (η4 (η2 φ + η3))` bounds every term.
///
/// Internally each term is expressed through the scaled moment
/// `J_l = ∫_0^1 u^l e^{-x u} du` with `x = η4 φ`, so `Δ_l = r^l D J_l` with
/// `D = φ/(η2 φ + η3)`. The `J_l` are produced by the downward recurrence
/// `J_{l-1} = (x J_l + e^{-x}) / l`, which only adds positive quantities and
/// therefore cannot amplify error; as extra insurance the value is re-seeded
/// from a direct series every 256 steps.
///
/// Fails with [`SpecFunError::SeriesCapExceeded`] when the certified `L`
/// exceeds `cap`, and with a domain error when `η4 φ > 700` (the recurrence
/// would underflow); callers fall back to quadrature in both cases.
pub fn delta_series_sum(params: &SeriesParams, cap: usize) -> Result<SeriesSum, SpecFunError> {
    let r = params.ratio();
    let x = params.eta4 * params.phi;
    if x > MAX_SERIES_EXPONENT {
        return Err(SpecFunError::Domain(
            "series exponent eta4*phi too large; use quadrature",
        ));
    }
    let scale = params.phi / (params.eta2 * params.phi + params.eta3);
    // J_0 = (1 - e^{-x})/x, which also equals the term bound C up to `scale`.
    let j0 = -f64::exp_m1(-x) / x;

    if r == 0.0 {
        return Ok(SeriesSum {
            value: scale * j0,
            terms_used: 1,
            tail_bound: 0.0,
        });
    }

    // Smallest L with r^{L+1}/(1-r) <= rel_tol, using Δ_0 = C as the
    // conservative stand-in for the (monotone growing) partial sum.
    let needed = (params.rel_tol * (1.0 - r)).ln() / r.ln();
    if !needed.is_finite() || needed > (cap + 1) as f64 {
        return Err(SpecFunError::SeriesCapExceeded {
            required: needed.max(0.0).min(usize::MAX as f64) as usize,
            cap,
        });
    }
    let last = (needed.ceil() as usize).max(1) - 1;

    // Descending J pass: stable seed at l = last, then the downward
    // recurrence, re-seeded every 256 steps.
    let exp_neg_x = (-x).exp();
    let mut j_values = vec![0.0_f64; last + 1];
    let mut j = seed_j(last, x)?;
    j_values[last] = j;
    for l in (0..last).rev() {
        j = (x * j + exp_neg_x) / (l + 1) as f64;
        if (l % 256) == 0 && l > 0 && x < (l + 2) as f64 {
            j = seed_j(l, x)?;
        }
        j_values[l] = j;
    }

    // Ascending accumulation of Δ_l = scale · r^l · J_l.
    let mut value = 0.0;
    let mut r_power = 1.0;
    for &jl in &j_values {
        value += scale * r_power * jl;
        r_power *= r;
    }

    let tail_bound = scale * j0 * r_power / (1.0 - r);
    Ok(SeriesSum {
        value,
        terms_used: last + 1,
        tail_bound,
    })
}

/// Direct evaluation of `J_l = ∫_0^1 u^l e^{-x u} du`.
fn seed_j(l: usize, x: f64) -> Result<f64, SpecFunError> {
    let lf = l as f64;
    if x < lf + 2.0 {
        // Ascending series e^{-x} Σ_m x^m / ((l+1)...(l+1+m)); the term ratio
        // x/(l+1+m) stays below one throughout.
        let mut term = 1.0 / (lf + 1.0);
        let mut sum = term;
        for m in 1..=MAX_ITER {
            term *= x / (lf + 1.0 + m as f64);
            sum += term;
            if term < sum * 1e-17 {
                return Ok((-x).exp() * sum);
            }
        }
        Err(SpecFunError::NoConvergence("J seed series"))
    } else {
        // J_l = l! x^{-(l+1)} · P(l+1, x) with P = 1 - Q from the continued
        // fraction; valid since x >= l + 2.
        let a = lf + 1.0;
        let q = (a * x.ln() - x - ln_factorial(l)).exp() * upper_gamma_cf(a, x)?;
        Ok((ln_factorial(l) - a * x.ln()).exp() * (1.0 - q))
    }
}
