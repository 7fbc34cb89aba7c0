//! Parametric demand laws with maximum-likelihood fitting.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{PaaError, Result};
use crate::optimizer::{nelder_mead_with, NelderMeadOptions};
use crate::special::{
    digamma, ln_gamma, quantile_by_bisection, reg_incomplete_beta, reg_incomplete_gamma, std_normal_cdf,
    std_normal_inv_cdf, trigamma, Tolerance,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistFamily {
    Normal,
    Exponential,
    ChiSquare,
    StudentT,
    InverseGamma,
}

impl DistFamily {
    pub const ALL: [DistFamily; 5] =
        [DistFamily::InverseGamma, DistFamily::StudentT, DistFamily::Exponential, DistFamily::ChiSquare, DistFamily::Normal];

    pub fn name(&self) -> &'static str {
        match self {
            DistFamily::Normal => "normal",
            DistFamily::Exponential => "exponential",
            DistFamily::ChiSquare => "chi_square",
            DistFamily::StudentT => "student_t",
            DistFamily::InverseGamma => "inverse_gamma",
        }
    }

    fn positive_support(&self) -> bool {
        matches!(self, DistFamily::Exponential | DistFamily::ChiSquare | DistFamily::InverseGamma)
    }
}

impl std::str::FromStr for DistFamily {
    type Err = PaaError;
    fn from_str(s: &str) -> Result<Self> {
        DistFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| PaaError::Parse(format!("unknown distribution family `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistParams {
    Normal { mu: f64, sigma: f64 },
    Exponential { lambda: f64 },
    ChiSquare { k: f64 },
    StudentT { loc: f64, scale: f64, nu: f64 },
    InverseGamma { alpha: f64, beta: f64 },
}

pub const T_NU_MIN: f64 = 1.5;
pub const T_NU_MAX: f64 = 50.0;
const NEWTON_MAX_ITER: usize = 100;

impl DistParams {
    pub fn family(&self) -> DistFamily {
        match self {
            DistParams::Normal { .. } => DistFamily::Normal,
            DistParams::Exponential { .. } => DistFamily::Exponential,
            DistParams::ChiSquare { .. } => DistFamily::ChiSquare,
            DistParams::StudentT { .. } => DistFamily::StudentT,
            DistParams::InverseGamma { .. } => DistFamily::InverseGamma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        let valid = match *self {
            DistParams::Normal { mu, sigma } => mu.is_finite() && ok(sigma),
            DistParams::Exponential { lambda } => ok(lambda),
            DistParams::ChiSquare { k } => ok(k),
            DistParams::StudentT { loc, scale, nu } => loc.is_finite() && ok(scale) && ok(nu),
            DistParams::InverseGamma { alpha, beta } => ok(alpha) && ok(beta),
        };
        if valid {
            Ok(())
        } else {
            Err(PaaError::Domain(format!("invalid parameters {self:?}")))
        }
    }

    /// Log density; `-∞` outside the support.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        match *self {
            DistParams::Normal { mu, sigma } => {
                let z = (x - mu) / sigma;
                -0.5 * z * z - sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
            }
            DistParams::Exponential { lambda } => {
                if x < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    lambda.ln() - lambda * x
                }
            }
            DistParams::ChiSquare { k } => {
                if x <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    (k / 2.0 - 1.0) * x.ln() - x / 2.0 - (k / 2.0) * 2f64.ln() - ln_gamma(k / 2.0)
                }
            }
            DistParams::StudentT { loc, scale, nu } => {
                let z = (x - loc) / scale;
                ln_gamma((nu + 1.0) / 2.0)
                    - ln_gamma(nu / 2.0)
                    - 0.5 * (nu * std::f64::consts::PI).ln()
                    - scale.ln()
                    - (nu + 1.0) / 2.0 * (z * z / nu).ln_1p()
            }
            DistParams::InverseGamma { alpha, beta } => {
                if x <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    alpha * beta.ln() - ln_gamma(alpha) - (alpha + 1.0) * x.ln() - beta / x
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            DistParams::Normal { mu, sigma } => std_normal_cdf((x - mu) / sigma),
            DistParams::Exponential { lambda } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-lambda * x).exp_m1()
                }
            }
            DistParams::ChiSquare { k } => {
                if x <= 0.0 {
                    0.0
                } else {
                    reg_incomplete_gamma(k / 2.0, x / 2.0).unwrap_or(f64::NAN)
                }
            }
            DistParams::StudentT { loc, scale, nu } => {
                let z = (x - loc) / scale;
                let tail = 0.5 * reg_incomplete_beta(nu / 2.0, 0.5, nu / (nu + z * z)).unwrap_or(f64::NAN);
                if z >= 0.0 {
                    1.0 - tail
                } else {
                    tail
                }
            }
            DistParams::InverseGamma { alpha, beta } => {
                if x <= 0.0 {
                    0.0
                } else {
                    1.0 - reg_incomplete_gamma(alpha, beta / x).unwrap_or(f64::NAN)
                }
            }
        }
    }

    /// Mean, when finite.
    pub fn mean(&self) -> Option<f64> {
        match *self {
            DistParams::Normal { mu, .. } => Some(mu),
            DistParams::Exponential { lambda } => Some(1.0 / lambda),
            DistParams::ChiSquare { k } => Some(k),
            DistParams::StudentT { loc, nu, .. } => (nu > 1.0).then_some(loc),
            DistParams::InverseGamma { alpha, beta } => (alpha > 1.0).then(|| beta / (alpha - 1.0)),
        }
    }
}

/// Sum of log densities.
pub fn log_likelihood(params: &DistParams, samples: &[f64]) -> f64 {
    samples.iter().map(|&x| params.ln_pdf(x)).sum()
}

/// Inverse CDF at level `p`.
pub fn quantile(params: &DistParams, p: f64) -> Result<f64> {
    params.validate()?;
    if !(p > 0.0 && p < 1.0) {
        return Err(PaaError::Domain(format!("quantile level {p} outside (0, 1)")));
    }
    let tol = Tolerance::default();
    match *params {
        DistParams::Normal { mu, sigma } => Ok(mu + sigma * std_normal_inv_cdf(p)?),
        DistParams::Exponential { lambda } => Ok(-(-p).ln_1p() / lambda),
        DistParams::ChiSquare { k } => quantile_by_bisection(|x| params.cdf(x), p, (0.0, 2.0 * k.max(1.0)), tol),
        DistParams::StudentT { loc, scale, .. } => {
            quantile_by_bisection(|x| params.cdf(x), p, (loc - 4.0 * scale, loc + 4.0 * scale), tol)
        }
        DistParams::InverseGamma { alpha, beta } => {
            quantile_by_bisection(|x| params.cdf(x), p, (0.0, 2.0 * beta / alpha), tol)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MleOptions {
    /// Fixes the Student-t degrees of freedom instead of estimating them.
    pub t_df: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MleFit {
    pub params: DistParams,
    /// Set when an iterative fit fell back to moment estimates.
    pub warning: Option<String>,
}

struct Moments {
    mean: f64,
    var: f64,
    excess_kurtosis: f64,
}

fn moments(x: &[f64]) -> Moments {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m4 = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    let excess_kurtosis = if var > 0.0 { m4 / (var * var) - 3.0 } else { 0.0 };
    Moments { mean, var, excess_kurtosis }
}

/// Maximum-likelihood fit with default options.
pub fn mle_fit(family: DistFamily, samples: &[f64]) -> Result<DistParams> {
    mle_fit_with(family, samples, &MleOptions::default()).map(|f| f.params)
}

/// Maximum-likelihood fit. Normal and Exponential are closed form;
/// ChiSquare and InverseGamma solve their shape score by damped Newton;
/// StudentT runs Nelder–Mead over `(loc, ln scale, ν)` with `ν` clamped to
/// `[1.5, 50]`.
pub fn mle_fit_with(family: DistFamily, samples: &[f64], opts: &MleOptions) -> Result<MleFit> {
    if samples.len() < 3 {
        return Err(PaaError::InsufficientData(format!("MLE needs at least 3 samples, got {}", samples.len())));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(PaaError::NonFinite("MLE samples"));
    }
    if family.positive_support() {
        if let Some(bad) = samples.iter().find(|&&v| v <= 0.0) {
            return Err(PaaError::Domain(format!("{} fit needs positive samples, found {bad}", family.name())));
        }
    }
    let m = moments(samples);
    if !(m.var > 0.0) && family != DistFamily::Exponential {
        return Err(PaaError::Domain(format!("{} fit on a constant sample", family.name())));
    }
    let n = samples.len() as f64;
    let fit = match family {
        DistFamily::Normal => MleFit { params: DistParams::Normal { mu: m.mean, sigma: m.var.sqrt() }, warning: None },
        DistFamily::Exponential => MleFit { params: DistParams::Exponential { lambda: 1.0 / m.mean }, warning: None },
        DistFamily::ChiSquare => {
            let c = samples.iter().map(|x| x.ln()).sum::<f64>() / n - 2f64.ln();
            let score = |k: f64| Ok::<_, PaaError>((digamma(k / 2.0)? - c, 0.5 * trigamma(k / 2.0)?));
            let ll = |k: f64| log_likelihood(&DistParams::ChiSquare { k }, samples);
            match damped_newton(m.mean, score, ll) {
                Some(k) => MleFit { params: DistParams::ChiSquare { k }, warning: None },
                None => fallback(DistParams::ChiSquare { k: m.mean }),
            }
        }
        DistFamily::InverseGamma => {
            let mean_inv = samples.iter().map(|x| 1.0 / x).sum::<f64>() / n;
            let mean_ln = samples.iter().map(|x| x.ln()).sum::<f64>() / n;
            let c = mean_inv.ln() + mean_ln;
            let score = |a: f64| Ok::<_, PaaError>((a.ln() - digamma(a)? - c, 1.0 / a - trigamma(a)?));
            let ll = |a: f64| log_likelihood(&DistParams::InverseGamma { alpha: a, beta: a / mean_inv }, samples);
            let a0 = m.mean * m.mean / m.var + 2.0;
            match damped_newton(a0, score, ll) {
                Some(alpha) => MleFit { params: DistParams::InverseGamma { alpha, beta: alpha / mean_inv }, warning: None },
                None => fallback(DistParams::InverseGamma { alpha: a0, beta: m.mean * (a0 - 1.0) }),
            }
        }
        DistFamily::StudentT => fit_student_t(samples, &m, opts.t_df)?,
    };
    fit.params.validate()?;
    Ok(fit)
}

fn fallback(params: DistParams) -> MleFit {
    let msg = format!("{} Newton iteration did not converge; using moment estimates", params.family().name());
    warn!("{msg}");
    MleFit { params, warning: Some(msg) }
}

/// Newton on a scalar score for a positive parameter. Steps are halved
/// while they leave the domain or lower the log-likelihood.
fn damped_newton<G, L>(x0: f64, score: G, ll: L) -> Option<f64>
where
    G: Fn(f64) -> Result<(f64, f64)>,
    L: Fn(f64) -> f64,
{
    let mut x = x0;
    let mut cur = ll(x);
    for _ in 0..NEWTON_MAX_ITER {
        let (g, dg) = score(x).ok()?;
        if !g.is_finite() || !dg.is_finite() || dg == 0.0 {
            return None;
        }
        let mut step = g / dg;
        let mut accepted = false;
        for _ in 0..60 {
            let cand = x - step;
            if cand > 0.0 {
                let v = ll(cand);
                if v.is_finite() && v >= cur - 1e-12 * cur.abs().max(1.0) {
                    x = cand;
                    cur = v;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            return None;
        }
        if step.abs() <= 1e-12 * x.max(1.0) {
            return Some(x);
        }
    }
    None
}

fn fit_student_t(samples: &[f64], m: &Moments, t_df: Option<f64>) -> Result<MleFit> {
    let clamp = |nu: f64| nu.clamp(T_NU_MIN, T_NU_MAX);
    if let Some(nu) = t_df {
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(PaaError::InvalidArgument(format!("fixed t degrees of freedom {nu} must be positive")));
        }
    }
    let nu0 = match t_df {
        Some(nu) => nu,
        None if m.excess_kurtosis > 0.0 => clamp(6.0 / m.excess_kurtosis + 4.0),
        None => T_NU_MAX,
    };
    let scale0 = if nu0 > 2.0 { (m.var * (nu0 - 2.0) / nu0).sqrt() } else { m.var.sqrt() };
    let nll = |loc: f64, ln_scale: f64, nu: f64| {
        -log_likelihood(&DistParams::StudentT { loc, scale: ln_scale.exp(), nu }, samples)
    };
    let spread = m.var.sqrt();
    let opts = NelderMeadOptions {
        tol: Tolerance { abs_tol: 1e-8 * (1.0 + spread), max_iter: 4000 },
        f_tol: Some(1e-10 * samples.len() as f64),
        initial_step: 0.1,
    };
    let (params, converged) = match t_df {
        Some(nu) => {
            let r = nelder_mead_with(|p: &[f64]| nll(p[0], p[1], nu), &[m.mean, scale0.ln()], &opts)?;
            (DistParams::StudentT { loc: r.x[0], scale: r.x[1].exp(), nu }, r.converged)
        }
        None => {
            let r = nelder_mead_with(|p: &[f64]| nll(p[0], p[1], clamp(p[2])), &[m.mean, scale0.ln(), nu0], &opts)?;
            (DistParams::StudentT { loc: r.x[0], scale: r.x[1].exp(), nu: clamp(r.x[2]) }, r.converged)
        }
    };
    let warning = (!converged).then(|| {
        let msg = "student_t likelihood search hit its iteration cap".to_string();
        warn!("{msg}");
        msg
    });
    Ok(MleFit { params, warning })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{open_uniform, rng_from_seed, std_normal};

    fn normal_draws(n: usize, mu: f64, sd: f64, seed: u64) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        (0..n).map(|_| mu + sd * std_normal(&mut rng)).collect()
    }

    fn chi_square_draws(n: usize, k: usize, seed: u64) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        (0..n).map(|_| (0..k).map(|_| std_normal(&mut rng).powi(2)).sum()).collect()
    }

    fn gamma_int_draws(n: usize, shape: usize, rate: f64, seed: u64) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        (0..n).map(|_| (0..shape).map(|_| -open_uniform(&mut rng).ln()).sum::<f64>() / rate).collect()
    }

    fn t_draws(n: usize, loc: f64, scale: f64, nu: usize, seed: u64) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        (0..n)
            .map(|_| {
                let z = std_normal(&mut rng);
                let chi: f64 = (0..nu).map(|_| std_normal(&mut rng).powi(2)).sum();
                loc + scale * z / (chi / nu as f64).sqrt()
            })
            .collect()
    }

    #[test]
    fn normal_closed_form() {
        let x = normal_draws(20_000, 60.0, 10.0, 1);
        let DistParams::Normal { mu, sigma } = mle_fit(DistFamily::Normal, &x).unwrap() else { panic!() };
        assert!((mu - 60.0).abs() < 0.3 && (sigma - 10.0).abs() < 0.3);
    }

    #[test]
    fn exponential_closed_form() {
        let p = mle_fit(DistFamily::Exponential, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(p, DistParams::Exponential { lambda: 0.5 });
    }

    #[test]
    fn chi_square_matches_grid_oracle() {
        let x = chi_square_draws(10_000, 7, 2);
        let DistParams::ChiSquare { k } = mle_fit(DistFamily::ChiSquare, &x).unwrap() else { panic!() };
        let grid = (100..=2000).map(|i| i as f64 / 100.0);
        let oracle = grid
            .max_by(|a, b| {
                log_likelihood(&DistParams::ChiSquare { k: *a }, &x)
                    .partial_cmp(&log_likelihood(&DistParams::ChiSquare { k: *b }, &x))
                    .unwrap()
            })
            .unwrap();
        assert!((k - oracle).abs() <= 0.01, "{k} vs grid {oracle}");
        assert!((k - 7.0).abs() < 0.2);
    }

    #[test]
    fn inverse_gamma_recovers_shape() {
        // 1/Gamma(shape 6, rate 2) is InverseGamma(6, 2).
        let x: Vec<f64> = gamma_int_draws(20_000, 6, 2.0, 3).into_iter().map(|g| 1.0 / g).collect();
        let DistParams::InverseGamma { alpha, beta } = mle_fit(DistFamily::InverseGamma, &x).unwrap() else { panic!() };
        assert!((alpha - 6.0).abs() < 0.25 && (beta - 2.0).abs() < 0.1, "{alpha} {beta}");
    }

    #[test]
    fn student_t_recovers_parameters() {
        let x = t_draws(5_000, 10.0, 2.0, 5, 4);
        let DistParams::StudentT { loc, scale, nu } = mle_fit(DistFamily::StudentT, &x).unwrap() else { panic!() };
        assert!((loc - 10.0).abs() < 0.15 && (scale - 2.0).abs() < 0.15 && (nu - 5.0).abs() < 1.5, "{loc} {scale} {nu}");
    }

    #[test]
    fn fixed_t_df() {
        let x = normal_draws(500, 60.0, 10.0, 5);
        let fit = mle_fit_with(DistFamily::StudentT, &x, &MleOptions { t_df: Some(4.0) }).unwrap();
        assert!(matches!(fit.params, DistParams::StudentT { nu, .. } if nu == 4.0));
    }

    #[test]
    fn support_errors() {
        for f in [DistFamily::ChiSquare, DistFamily::InverseGamma, DistFamily::Exponential] {
            assert!(mle_fit(f, &[1.0, -2.0, 3.0]).is_err());
        }
        assert!(mle_fit(DistFamily::Normal, &[1.0, 2.0]).is_err());
        assert!(mle_fit(DistFamily::Normal, &[2.0, 2.0, 2.0]).is_err());
    }

    #[test]
    fn quantile_examples() {
        let q = quantile(&DistParams::Normal { mu: 60.0, sigma: 10.0 }, 0.75).unwrap();
        assert!((q - 66.7449).abs() < 1e-3);
        let q = quantile(&DistParams::Exponential { lambda: 4.0 }, 1.0 - (-1f64).exp()).unwrap();
        assert!((q - 0.25).abs() < 1e-12);
        let t = DistParams::StudentT { loc: 0.0, scale: 1.0, nu: 5.0 };
        let q = quantile(&t, 0.75).unwrap();
        // Independent bisection on the incomplete-beta CDF.
        let cdf = |x: f64| 1.0 - 0.5 * reg_incomplete_beta(2.5, 0.5, 5.0 / (5.0 + x * x)).unwrap();
        let (mut lo, mut hi) = (0.0, 5.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if cdf(mid) < 0.75 {
                lo = mid
            } else {
                hi = mid
            }
        }
        assert!((q - 0.5 * (lo + hi)).abs() < 1e-6);
        assert!((q - 0.726_686_7).abs() < 1e-6);
        assert!(quantile(&t, 1.0).is_err());
    }

    #[test]
    fn log_likelihood_examples() {
        let ll = log_likelihood(&DistParams::Normal { mu: 0.0, sigma: 1.0 }, &[0.0]);
        assert!((ll + 0.5 * (2.0 * std::f64::consts::PI).ln()).abs() < 1e-15);
        let ll = log_likelihood(&DistParams::Exponential { lambda: 1.0 }, &[1.0, 2.0]);
        assert!((ll + 3.0).abs() < 1e-15);
        assert_eq!(log_likelihood(&DistParams::ChiSquare { k: 3.0 }, &[-1.0]), f64::NEG_INFINITY);
    }

    fn sample_for(family: DistFamily, seed: u64) -> Vec<f64> {
        match family {
            DistFamily::Normal => normal_draws(300, 60.0, 10.0, seed),
            DistFamily::Exponential => gamma_int_draws(300, 1, 0.5, seed),
            DistFamily::ChiSquare => chi_square_draws(300, 4, seed),
            DistFamily::StudentT => t_draws(300, 3.0, 2.0, 4, seed),
            DistFamily::InverseGamma => gamma_int_draws(300, 5, 1.0, seed).into_iter().map(|g| 1.0 / g).collect(),
        }
    }

    fn perturb(p: &DistParams, f: f64) -> DistParams {
        match *p {
            DistParams::Normal { mu, sigma } => DistParams::Normal { mu: mu * f, sigma: sigma / f },
            DistParams::Exponential { lambda } => DistParams::Exponential { lambda: lambda * f },
            DistParams::ChiSquare { k } => DistParams::ChiSquare { k: k * f },
            DistParams::StudentT { loc, scale, nu } => DistParams::StudentT { loc: loc + f - 1.0, scale: scale * f, nu },
            DistParams::InverseGamma { alpha, beta } => DistParams::InverseGamma { alpha: alpha * f, beta },
        }
    }

    #[test]
    fn mle_beats_perturbations() {
        for family in DistFamily::ALL {
            let x = sample_for(family, 10);
            let p = mle_fit(family, &x).unwrap();
            let best = log_likelihood(&p, &x);
            for f in [0.97, 0.99, 1.01, 1.03] {
                assert!(log_likelihood(&perturb(&p, f), &x) <= best + 1e-9, "{family:?} {f}");
            }
        }
    }

    #[test]
    fn scale_equivariance() {
        let c = 3.5;
        for family in [DistFamily::Exponential, DistFamily::Normal, DistFamily::StudentT, DistFamily::InverseGamma] {
            let x = sample_for(family, 20);
            let y: Vec<f64> = x.iter().map(|v| v * c).collect();
            let (a, b) = (mle_fit(family, &x).unwrap(), mle_fit(family, &y).unwrap());
            match (a, b) {
                (DistParams::Exponential { lambda: l1 }, DistParams::Exponential { lambda: l2 }) => {
                    assert!((c / l1 - 1.0 / l2).abs() < 1e-9 * c / l1)
                }
                (DistParams::Normal { mu: m1, sigma: s1 }, DistParams::Normal { mu: m2, sigma: s2 }) => {
                    assert!((c * m1 - m2).abs() < 1e-9 * m2.abs() && (c * s1 - s2).abs() < 1e-9 * s2)
                }
                (DistParams::StudentT { loc: l1, scale: s1, .. }, DistParams::StudentT { loc: l2, scale: s2, .. }) => {
                    assert!((c * l1 - l2).abs() < 1e-4 * s2 && (c * s1 - s2).abs() < 1e-4 * s2)
                }
                (DistParams::InverseGamma { beta: b1, .. }, DistParams::InverseGamma { beta: b2, .. }) => {
                    assert!((c * b1 - b2).abs() < 1e-8 * b2)
                }
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn quantiles_increase_and_round_trip() {
        let params = [
            DistParams::Normal { mu: 60.0, sigma: 10.0 },
            DistParams::Exponential { lambda: 0.1 },
            DistParams::ChiSquare { k: 7.0 },
            DistParams::StudentT { loc: 60.0, scale: 9.0, nu: 6.0 },
            DistParams::InverseGamma { alpha: 30.0, beta: 1800.0 },
        ];
        for p in params {
            let mut prev = f64::NEG_INFINITY;
            for i in 1..100 {
                let level = i as f64 / 100.0;
                let q = quantile(&p, level).unwrap();
                assert!(q > prev, "{p:?} at {level}");
                prev = q;
                assert!((p.cdf(q) - level).abs() <= 1e-11, "{p:?} round trip at {level}");
            }
        }
    }

    #[test]
    fn fit_then_quantile_recovers_truth() {
        let cases: Vec<(DistFamily, Vec<f64>, DistParams)> = vec![
            (DistFamily::Normal, normal_draws(10_000, 60.0, 10.0, 31), DistParams::Normal { mu: 60.0, sigma: 10.0 }),
            (DistFamily::Exponential, gamma_int_draws(10_000, 1, 0.5, 32), DistParams::Exponential { lambda: 0.5 }),
            (DistFamily::ChiSquare, chi_square_draws(10_000, 7, 33), DistParams::ChiSquare { k: 7.0 }),
            (DistFamily::StudentT, t_draws(10_000, 60.0, 5.0, 6, 34), DistParams::StudentT { loc: 60.0, scale: 5.0, nu: 6.0 }),
            (
                DistFamily::InverseGamma,
                gamma_int_draws(10_000, 8, 0.5, 35).into_iter().map(|g| 1.0 / g).collect(),
                DistParams::InverseGamma { alpha: 8.0, beta: 0.5 },
            ),
        ];
        for (family, x, truth) in cases {
            let fitted = mle_fit(family, &x).unwrap();
            let (qf, qt) = (quantile(&fitted, 0.75).unwrap(), quantile(&truth, 0.75).unwrap());
            assert!(((qf - qt) / qt).abs() < 0.02, "{family:?}: {qf} vs {qt}");
        }
    }

    #[test]
    fn family_names_round_trip() {
        for f in DistFamily::ALL {
            assert_eq!(f.name().parse::<DistFamily>().unwrap(), f);
        }
        assert!("gumbel".parse::<DistFamily>().is_err());
    }
}
