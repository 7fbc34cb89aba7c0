//! Special functions: normal CDF and inverse, log-gamma, digamma/trigamma,
//! regularized incomplete gamma and beta, and a generic bisection quantile.
//!
//! Everything is generic over [`Real`]; accuracy targets (≈1e-12 absolute)
//! apply to `f64`.

use crate::error::{PaaError, Result};
use crate::scalar::Real;

/// Convergence controls for iterative evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance<S: Real = f64> {
    pub abs_tol: S,
    pub max_iter: usize,
}

impl<S: Real> Tolerance<S> {
    pub fn new(abs_tol: S, max_iter: usize) -> Result<Self> {
        if !(abs_tol >= S::epsilon() * S::lit(100.0)) {
            return Err(PaaError::InvalidArgument(format!(
                "abs_tol {abs_tol} below 100 machine epsilons"
            )));
        }
        if max_iter == 0 {
            return Err(PaaError::InvalidArgument("max_iter must be positive".into()));
        }
        Ok(Self { abs_tol, max_iter })
    }
}

impl<S: Real> Default for Tolerance<S> {
    fn default() -> Self {
        Self { abs_tol: S::lit(1e-12).max(S::epsilon() * S::lit(100.0)), max_iter: 200 }
    }
}

const ERF_SERIES_LIMIT: f64 = 2.0;

/// `erfc(x)` for `x >= 0`.
fn erfc_nonneg<S: Real>(x: S) -> S {
    let two = S::lit(2.0);
    if x < S::lit(ERF_SERIES_LIMIT) {
        // erf(x) = 2/√π · e^{-x²} · Σ 2ⁿ x^{2n+1} / (1·3·…·(2n+1)), all terms positive.
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut n = 0usize;
        while n < 500 {
            n += 1;
            term = term * two * x2 / S::from_usize_lossy(2 * n + 1);
            sum = sum + term;
            if term <= sum * S::epsilon() {
                break;
            }
        }
        let erf = two / S::PI().sqrt() * (-x2).exp() * sum;
        S::one() - erf
    } else {
        // Continued fraction erfc(x) = e^{-x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + …)))).
        let tiny = S::min_positive_value() / S::epsilon();
        let mut f = x;
        let mut c = x;
        let mut d = S::zero();
        for n in 1..1000 {
            let a = S::from_usize_lossy(n) / two;
            d = x + a * d;
            if d.abs() < tiny {
                d = tiny;
            }
            c = x + a / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = d.recip();
            let delta = c * d;
            f = f * delta;
            if (delta - S::one()).abs() <= S::epsilon() {
                break;
            }
        }
        (-x * x).exp() / (S::PI().sqrt() * f)
    }
}

/// Complementary error function.
pub fn erfc<S: Real>(x: S) -> S {
    if x.is_nan() {
        return x;
    }
    if x >= S::zero() {
        erfc_nonneg(x)
    } else {
        S::lit(2.0) - erfc_nonneg(-x)
    }
}

/// Error function.
pub fn erf<S: Real>(x: S) -> S {
    S::one() - erfc(x)
}

/// Standard normal density.
#[inline]
pub fn std_normal_pdf<S: Real>(z: S) -> S {
    (-(z * z) / S::lit(2.0)).exp() / (S::lit(2.0) * S::PI()).sqrt()
}

/// Standard normal CDF Φ(z), through the complementary error function.
pub fn std_normal_cdf<S: Real>(z: S) -> S {
    S::lit(0.5) * erfc(-z / S::SQRT_2())
}

/// Φ⁻¹(p): Acklam's rational approximation polished by Halley steps on Φ.
pub fn std_normal_inv_cdf<S: Real>(p: S) -> Result<S> {
    if !(p > S::zero() && p < S::one()) {
        return Err(PaaError::Domain(format!("normal quantile level {p} outside (0, 1)")));
    }
    let pf = p.as_f64();
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549671010005891e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] =
        [7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00, 3.754408661907416e+00];
    let p_low = 0.02425;
    let x0 = if pf < p_low {
        let q = (-2.0 * pf.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if pf <= 1.0 - p_low {
        let q = pf - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - pf).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let mut x = S::lit(x0);
    let half = S::lit(0.5);
    for _ in 0..3 {
        let e = std_normal_cdf(x) - p;
        let u = e * (S::lit(2.0) * S::PI()).sqrt() * (x * x * half).exp();
        let step = u / (S::one() + x * u * half);
        if !step.is_finite() {
            break;
        }
        x = x - step;
    }
    Ok(x)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Γ(x) for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma<S: Real>(x: S) -> S {
    if x < S::lit(0.5) {
        // Reflection: Γ(x)Γ(1−x) = π / sin(πx).
        let pi = S::PI();
        return (pi / (pi * x).sin().abs()).ln() - ln_gamma(S::one() - x);
    }
    let x = x - S::one();
    let mut a = S::lit(LANCZOS[0]);
    let t = x + S::lit(LANCZOS_G + 0.5);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a = a + S::lit(c) / (x + S::from_usize_lossy(i));
    }
    S::lit(0.5) * (S::lit(2.0) * S::PI()).ln() + (x + S::lit(0.5)) * t.ln() - t + a.ln()
}

/// Digamma ψ(x) for `x > 0`: recurrence up to `x ≥ 6`, then the asymptotic series.
pub fn digamma<S: Real>(x: S) -> Result<S> {
    if !(x > S::zero()) || !x.is_finite() {
        return Err(PaaError::Domain(format!("digamma argument {x} must be positive")));
    }
    let mut x = x;
    let mut acc = S::zero();
    while x < S::lit(6.0) {
        acc = acc - x.recip();
        x = x + S::one();
    }
    let inv = x.recip();
    let inv2 = inv * inv;
    let series = inv2
        * (S::lit(1.0 / 12.0)
            - inv2
                * (S::lit(1.0 / 120.0)
                    - inv2
                        * (S::lit(1.0 / 252.0)
                            - inv2 * (S::lit(1.0 / 240.0) - inv2 * S::lit(1.0 / 132.0)))));
    Ok(acc + x.ln() - S::lit(0.5) * inv - series)
}

/// Trigamma ψ'(x) for `x > 0`: recurrence up to `x ≥ 10`, then the asymptotic series.
pub fn trigamma<S: Real>(x: S) -> Result<S> {
    if !(x > S::zero()) || !x.is_finite() {
        return Err(PaaError::Domain(format!("trigamma argument {x} must be positive")));
    }
    let mut x = x;
    let mut acc = S::zero();
    while x < S::lit(10.0) {
        acc = acc + (x * x).recip();
        x = x + S::one();
    }
    let inv = x.recip();
    let inv2 = inv * inv;
    let series = inv
        + inv2 / S::lit(2.0)
        + inv * inv2
            * (S::lit(1.0 / 6.0)
                - inv2
                    * (S::lit(1.0 / 30.0)
                        - inv2 * (S::lit(1.0 / 42.0) - inv2 * (S::lit(1.0 / 30.0) - inv2 * S::lit(5.0 / 66.0)))));
    Ok(acc + series)
}

/// Regularized lower incomplete gamma `P(a, x)`: series for `x < a + 1`,
/// Lentz continued fraction for the complement otherwise.
pub fn reg_incomplete_gamma<S: Real>(a: S, x: S) -> Result<S> {
    if !(a > S::zero()) || !a.is_finite() {
        return Err(PaaError::Domain(format!("incomplete gamma shape {a} must be positive")));
    }
    if x.is_nan() || x < S::zero() {
        return Err(PaaError::Domain(format!("incomplete gamma argument {x} must be nonnegative")));
    }
    if x == S::zero() {
        return Ok(S::zero());
    }
    if x.is_infinite() {
        return Ok(S::one());
    }
    let max_iter = 200 + (10.0 * a.as_f64().sqrt()) as usize + x.as_f64().sqrt() as usize * 10;
    let log_prefactor = a * x.ln() - x - ln_gamma(a);
    if x < a + S::one() {
        let mut ap = a;
        let mut del = a.recip();
        let mut sum = del;
        for _ in 0..max_iter {
            ap = ap + S::one();
            del = del * x / ap;
            sum = sum + del;
            if del.abs() < sum.abs() * S::epsilon() {
                break;
            }
        }
        Ok((sum * log_prefactor.exp()).min(S::one()))
    } else {
        let tiny = S::min_positive_value() / S::epsilon();
        let mut b = x + S::one() - a;
        let mut c = tiny.recip();
        let mut d = b.recip();
        let mut h = d;
        for i in 1..max_iter {
            let fi = S::from_usize_lossy(i);
            let an = -fi * (fi - a);
            b = b + S::lit(2.0);
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = d.recip();
            let del = d * c;
            h = h * del;
            if (del - S::one()).abs() <= S::epsilon() {
                break;
            }
        }
        Ok((S::one() - log_prefactor.exp() * h).max(S::zero()))
    }
}

fn beta_cf<S: Real>(a: S, b: S, x: S) -> S {
    let tiny = S::min_positive_value() / S::epsilon();
    let one = S::one();
    let two = S::lit(2.0);
    let qab = a + b;
    let qap = a + one;
    let qam = a - one;
    let mut c = one;
    let mut d = one - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = d.recip();
    let mut h = d;
    let max_iter = 300 + (10.0 * (a.as_f64() + b.as_f64()).sqrt()) as usize;
    for m in 1..max_iter {
        let mf = S::from_usize_lossy(m);
        let m2 = two * mf;
        let aa = mf * (b - mf) * x / ((qam + m2) * (a + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        h = h * d * c;
        let aa = -(a + mf) * (qab + mf) * x / ((a + m2) * (qap + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        let del = d * c;
        h = h * del;
        if (del - one).abs() <= S::epsilon() {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`, continued fraction with the
/// symmetry switch at `x = (a + 1)/(a + b + 2)`.
pub fn reg_incomplete_beta<S: Real>(a: S, b: S, x: S) -> Result<S> {
    if !(a > S::zero()) || !(b > S::zero()) || !a.is_finite() || !b.is_finite() {
        return Err(PaaError::Domain(format!("incomplete beta shapes ({a}, {b}) must be positive")));
    }
    if x.is_nan() || x < S::zero() || x > S::one() {
        return Err(PaaError::Domain(format!("incomplete beta argument {x} outside [0, 1]")));
    }
    if x == S::zero() {
        return Ok(S::zero());
    }
    if x == S::one() {
        return Ok(S::one());
    }
    let ln_front =
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (S::one() - x).ln();
    let front = ln_front.exp();
    let v = if x < (a + S::one()) / (a + b + S::lit(2.0)) {
        front * beta_cf(a, b, x) / a
    } else {
        S::one() - front * beta_cf(b, a, S::one() - x) / b
    };
    Ok(v.max(S::zero()).min(S::one()))
}

/// Inverts a nondecreasing CDF by bisection. The bracket is widened by
/// doubling its width (up to `tol.max_iter` times) until it straddles `p`.
pub fn quantile_by_bisection<S, F>(cdf: F, p: S, bracket: (S, S), tol: Tolerance<S>) -> Result<S>
where
    S: Real,
    F: Fn(S) -> S,
{
    if !(p > S::zero() && p < S::one()) {
        return Err(PaaError::Domain(format!("quantile level {p} outside (0, 1)")));
    }
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(PaaError::InvalidArgument(format!("bad bracket ({lo}, {hi})")));
    }
    let mut expansions = 0;
    while cdf(lo) > p {
        let w = hi - lo;
        lo = lo - w;
        expansions += 1;
        if expansions > tol.max_iter || !lo.is_finite() {
            return Err(PaaError::NoConvergence("could not bracket quantile from below".into()));
        }
    }
    while cdf(hi) < p {
        let w = hi - lo;
        hi = hi + w;
        expansions += 1;
        if expansions > tol.max_iter || !hi.is_finite() {
            return Err(PaaError::NoConvergence("could not bracket quantile from above".into()));
        }
    }
    let two = S::lit(2.0);
    let mut mid = (lo + hi) / two;
    for _ in 0..tol.max_iter.max(64) {
        mid = (lo + hi) / two;
        let f = cdf(mid);
        if (f - p).abs() <= tol.abs_tol {
            return Ok(mid);
        }
        if f < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= S::epsilon() * (lo.abs().max(hi.abs()).max(S::one())) {
            break;
        }
    }
    Ok(mid)
}
