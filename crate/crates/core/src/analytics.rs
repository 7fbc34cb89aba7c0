//! Closed-form results for Gaussian candidate policies and Gaussian demand.

use serde::{Deserialize, Serialize};

use crate::error::{PaaError, Result};
use crate::newsvendor::{CostParams, WeightBox};
use crate::paa::{column_distance, PolicyEvalMatrix};
use crate::scalar::Real;
use crate::special::{reg_incomplete_beta, std_normal_cdf, std_normal_inv_cdf, std_normal_pdf};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemandGaussian<S: Real = f64> {
    pub mu: S,
    pub var: S,
}

impl<S: Real> DemandGaussian<S> {
    pub fn new(mu: S, var: S) -> Result<Self> {
        if !mu.is_finite() || !(var > S::zero()) || !var.is_finite() {
            return Err(PaaError::Domain(format!("demand N({mu}, {var}) needs finite mean and positive variance")));
        }
        Ok(Self { mu, var })
    }
}

/// Two jointly normal candidate order quantities with a common variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPolicyPair<S: Real = f64> {
    pub mu1: S,
    pub mu2: S,
    pub var: S,
    pub rho: S,
}

impl<S: Real> GaussianPolicyPair<S> {
    pub fn new(mu1: S, mu2: S, var: S, rho: S) -> Result<Self> {
        if !(var > S::zero()) || !(rho.abs() <= S::one()) {
            return Err(PaaError::Domain(format!("policy pair needs var > 0 and |rho| <= 1, got {var}, {rho}")));
        }
        Ok(Self { mu1, mu2, var, rho })
    }

    /// Variance of the equal-weight mixture, `(1 + ρ)σ²/2`.
    pub fn mixture_var(&self) -> S {
        (S::one() + self.rho) * self.var / S::lit(2.0)
    }
}

/// `E[C(Q − d)]` for `Q ~ N(μ_i, σ_i²)` independent of `d ~ N(μ_d, σ_d²)`:
/// with `m = μ_i − μ_d`, `s² = σ_i² + σ_d²`,
/// `J = (c_o + c_u) s φ(m/s) + c_o m Φ(m/s) − c_u m (1 − Φ(m/s))`.
pub fn expected_cost_j<S: Real>(mu_i: S, var_i: S, demand: &DemandGaussian<S>, costs: &CostParams<S>) -> Result<S> {
    if var_i < S::zero() || !var_i.is_finite() || !mu_i.is_finite() {
        return Err(PaaError::Domain(format!("policy N({mu_i}, {var_i}) invalid")));
    }
    let s2 = var_i + demand.var;
    if !(s2 > S::zero()) {
        return Err(PaaError::Domain("total variance must be positive".into()));
    }
    let s = s2.sqrt();
    let m = mu_i - demand.mu;
    let z = m / s;
    let cdf = std_normal_cdf(z);
    Ok((costs.overage() + costs.underage()) * s * std_normal_pdf(z) + costs.overage() * m * cdf
        - costs.underage() * m * (S::one() - cdf))
}

/// Gain from averaging two equal-mean candidates with weights ½, ½:
/// `J(μ, σ²) − J(μ, (1 + ρ)σ²/2)`.
pub fn diversification_gain<S: Real>(pair: &GaussianPolicyPair<S>, demand: &DemandGaussian<S>, costs: &CostParams<S>) -> Result<S> {
    if pair.mu1 != pair.mu2 {
        return Err(PaaError::InvalidArgument(format!("candidate means differ: {} vs {}", pair.mu1, pair.mu2)));
    }
    Ok(expected_cost_j(pair.mu1, pair.var, demand, costs)? - expected_cost_j(pair.mu1, pair.mixture_var(), demand, costs)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanShift<S: Real = f64> {
    /// Cost-minimizing mean order quantity.
    pub mean: S,
    /// `J` at that mean.
    pub cost: S,
}

/// Mean order quantity minimizing `J` for a policy of variance `var`:
/// `μ_d + √(σ² + σ_d²) Φ⁻¹(c_u / (c_o + c_u))`.
pub fn optimal_mean_shift<S: Real>(var: S, demand: &DemandGaussian<S>, costs: &CostParams<S>) -> Result<MeanShift<S>> {
    let s = (var + demand.var).sqrt();
    let mean = demand.mu + s * std_normal_inv_cdf(costs.critical_ratio())?;
    Ok(MeanShift { mean, cost: expected_cost_j(mean, var, demand, costs)? })
}

/// Mean absolute difference of candidates `i` and `j`'s held-out quantities.
pub fn l1_policy_distance<S: Real>(matrix: &PolicyEvalMatrix<S>, i: usize, j: usize) -> Result<S> {
    let m = matrix.num_candidates();
    if i >= m || j >= m {
        return Err(PaaError::InvalidArgument(format!("candidate index out of range for {m} candidates")));
    }
    Ok(column_distance(matrix, i, j))
}

/// `max(c_o, c_u) · max(|L|, U) · δ`.
pub fn improvement_bound<S: Real>(costs: &CostParams<S>, bx: &WeightBox<S>, delta: S) -> Result<S> {
    if !(delta >= S::zero()) {
        return Err(PaaError::Domain(format!("distance must be nonnegative, got {delta}")));
    }
    Ok(costs.overage().max(costs.underage()) * bx.magnitude() * delta)
}

/// Variances of two overfitting polynomial candidates (`σ², ρ`) and of their
/// correctly specified low-order parts (`σ_β², ρ_β`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverfitSetup<S: Real = f64> {
    pub var: S,
    pub rho: S,
    pub var_beta: S,
    pub rho_beta: S,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverfitCheck<S: Real = f64> {
    /// `σ² > σ_β²` and `ρσ² < ρ_βσ_β²`.
    pub preconditions_hold: bool,
    /// `σ² − σ_β²`: excess variance of a single candidate.
    pub single_excess: S,
    /// `(1 + ρ)σ²/2 − (1 + ρ_β)σ_β²/2`: excess variance of the equal-weight average.
    pub averaged_excess: S,
    /// `averaged_excess − single_excess = (ρσ² − ρ_βσ_β²)/2 − (σ² − σ_β²)/2`.
    pub margin: S,
    pub inequality_holds: bool,
}

pub fn overfit_reduction_check<S: Real>(setup: &OverfitSetup<S>) -> Result<OverfitCheck<S>> {
    let OverfitSetup { var, rho, var_beta, rho_beta } = *setup;
    if !(var > S::zero()) || !(var_beta > S::zero()) || !(rho.abs() <= S::one()) || !(rho_beta.abs() <= S::one()) {
        return Err(PaaError::Domain("overfit setup needs positive variances and correlations in [-1, 1]".into()));
    }
    let two = S::lit(2.0);
    let single_excess = var - var_beta;
    let averaged_excess = (S::one() + rho) * var / two - (S::one() + rho_beta) * var_beta / two;
    let margin = (rho * var - rho_beta * var_beta) / two - (var - var_beta) / two;
    Ok(OverfitCheck {
        preconditions_hold: var > var_beta && rho * var < rho_beta * var_beta,
        single_excess,
        averaged_excess,
        margin,
        inequality_holds: margin < S::zero(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OlsFit<S: Real = f64> {
    pub slope: S,
    pub intercept: S,
    pub r_squared: S,
    /// Two-sided p-value of the slope's t statistic on `n − 2` degrees of freedom.
    pub slope_p_value: S,
    pub n: usize,
}

/// Simple least squares of `y` on `x`.
pub fn ols_fit<S: Real>(x: &[S], y: &[S]) -> Result<OlsFit<S>> {
    if x.len() != y.len() {
        return Err(PaaError::LengthMismatch { expected: x.len(), got: y.len() });
    }
    let n = x.len();
    if n < 3 {
        return Err(PaaError::InsufficientData(format!("regression needs at least 3 points, got {n}")));
    }
    let nn = S::from_usize_lossy(n);
    let mx = x.iter().fold(S::zero(), |a, &v| a + v) / nn;
    let my = y.iter().fold(S::zero(), |a, &v| a + v) / nn;
    let (mut sxx, mut sxy, mut syy) = (S::zero(), S::zero(), S::zero());
    for (&a, &b) in x.iter().zip(y) {
        sxx = sxx + (a - mx) * (a - mx);
        sxy = sxy + (a - mx) * (b - my);
        syy = syy + (b - my) * (b - my);
    }
    if !(sxx > S::zero()) {
        return Err(PaaError::Domain("regressor has zero variance".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse = x.iter().zip(y).fold(S::zero(), |a, (&u, &v)| {
        let r = v - intercept - slope * u;
        a + r * r
    });
    let r_squared = if syy > S::zero() { (S::one() - sse / syy).max(S::zero()) } else { S::zero() };
    let df = S::from_usize_lossy(n - 2);
    let se = (sse / df / sxx).sqrt();
    let slope_p_value = if se > S::zero() {
        let t = slope / se;
        reg_incomplete_beta(df / S::lit(2.0), S::lit(0.5), df / (df + t * t))?
    } else if slope == S::zero() {
        S::one()
    } else {
        S::zero()
    };
    Ok(OlsFit { slope, intercept, r_squared, slope_p_value, n })
}

/// One point of the diversification curve: gain and mixture variance at `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainPoint<S: Real = f64> {
    pub rho: S,
    pub gain: S,
    pub paa_variance: S,
}

/// Diversification gain over an evenly spaced `ρ` grid on `[-1, 1]`.
pub fn gain_curve<S: Real>(mu: S, var: S, demand: &DemandGaussian<S>, costs: &CostParams<S>, points: usize) -> Result<Vec<GainPoint<S>>> {
    if points < 2 {
        return Err(PaaError::InvalidArgument("gain curve needs at least 2 points".into()));
    }
    (0..points)
        .map(|k| {
            let rho = -S::one() + S::lit(2.0) * S::from_usize_lossy(k) / S::from_usize_lossy(points - 1);
            let pair = GaussianPolicyPair::new(mu, mu, var, rho)?;
            Ok(GainPoint { rho, gain: diversification_gain(&pair, demand, costs)?, paa_variance: pair.mixture_var() })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{rng_from_seed, std_normal, uniform_in};

    fn c(c_o: f64, c_u: f64) -> CostParams<f64> {
        CostParams::new(c_o, c_u).unwrap()
    }

    fn mc_cost(mu: f64, var: f64, dem: &DemandGaussian<f64>, costs: &CostParams<f64>, n: usize, seed: u64) -> f64 {
        let mut rng = rng_from_seed(seed);
        (0..n)
            .map(|_| {
                let q = mu + var.sqrt() * std_normal(&mut rng);
                let d = dem.mu + dem.var.sqrt() * std_normal(&mut rng);
                costs.cost(q, d)
            })
            .sum::<f64>()
            / n as f64
    }

    #[test]
    fn j_examples() {
        let d = DemandGaussian::new(0.0, 1.0).unwrap();
        let j = expected_cost_j(0.0, 0.0, &d, &c(1.0, 1.0)).unwrap();
        assert!((j - 2.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
        let mc = mc_cost(0.0, 0.0, &d, &c(1.0, 1.0), 200_000, 1);
        assert!((j - mc).abs() / j < 0.01);
        let d4 = DemandGaussian::new(0.0, 4.0).unwrap();
        let j4 = expected_cost_j(0.0, 0.0, &d4, &c(1.0, 1.0)).unwrap();
        assert!((j4 - 2.0 * j).abs() < 1e-12);
        let d = DemandGaussian::new(60.0, 100.0).unwrap();
        for (mu, var) in [(55.0, 20.0), (70.0, 0.0), (66.0, 50.0)] {
            let j = expected_cost_j(mu, var, &d, &c(1.0, 3.0)).unwrap();
            let mc = mc_cost(mu, var, &d, &c(1.0, 3.0), 400_000, 2);
            assert!((j - mc).abs() / j < 0.01, "{j} vs {mc}");
        }
    }

    #[test]
    fn gain_examples() {
        let d = DemandGaussian::new(0.0, 10.0).unwrap();
        let costs = c(1.0, 3.0);
        let one = GaussianPolicyPair::new(0.5, 0.5, 100.0, 1.0).unwrap();
        assert_eq!(diversification_gain(&one, &d, &costs).unwrap(), 0.0);
        let anti = GaussianPolicyPair::new(0.0, 0.0, 100.0, -1.0).unwrap();
        let g = diversification_gain(&anti, &d, &costs).unwrap();
        let expect = expected_cost_j(0.0, 100.0, &d, &costs).unwrap() - expected_cost_j(0.0, 0.0, &d, &costs).unwrap();
        assert!((g - expect).abs() < 1e-12);
        assert!(diversification_gain(&GaussianPolicyPair::new(0.0, 1.0, 1.0, 0.0).unwrap(), &d, &costs).is_err());
        // Monte Carlo of the ½–½ mixture of two independent N(0.5, 100) policies.
        let pair = GaussianPolicyPair::new(0.5, 0.5, 100.0, 0.0).unwrap();
        let mut rng = rng_from_seed(3);
        let n = 400_000;
        let (mut single, mut mixed) = (0.0, 0.0);
        for _ in 0..n {
            let q1 = 0.5 + 10.0 * std_normal(&mut rng);
            let q2 = 0.5 + 10.0 * std_normal(&mut rng);
            let dd = 10f64.sqrt() * std_normal(&mut rng);
            single += costs.cost(q1, dd);
            mixed += costs.cost(0.5 * (q1 + q2), dd);
        }
        let realized = (single - mixed) / n as f64;
        let g = diversification_gain(&pair, &d, &costs).unwrap();
        assert!((realized - g).abs() / g < 0.03, "{realized} vs {g}");
    }

    #[test]
    fn gain_is_monotone() {
        let costs = c(1.0, 3.0);
        let d = DemandGaussian::new(0.0, 10.0).unwrap();
        let curve = gain_curve(0.5, 100.0, &d, &costs, 41).unwrap();
        assert!(curve.windows(2).all(|w| w[1].gain < w[0].gain));
        assert!(curve.iter().all(|p| p.gain >= 0.0));
        assert_eq!(curve.last().unwrap().gain, 0.0);
        let pair = GaussianPolicyPair::new(0.5, 0.5, 100.0, 0.2).unwrap();
        let mut prev = f64::INFINITY;
        for var_d in [1.0, 5.0, 20.0, 80.0] {
            let g = diversification_gain(&pair, &DemandGaussian::new(0.0, var_d).unwrap(), &costs).unwrap();
            assert!(g < prev);
            prev = g;
        }
    }

    #[test]
    fn mean_shift_examples() {
        let d = DemandGaussian::new(60.0, 100.0).unwrap();
        assert_eq!(optimal_mean_shift(30.0, &d, &c(2.0, 2.0)).unwrap().mean, 60.0);
        let z = std_normal_inv_cdf(0.75).unwrap();
        assert!((optimal_mean_shift(0.0, &d, &c(1.0, 3.0)).unwrap().mean - (60.0 + 10.0 * z)).abs() < 1e-12);
        let s = optimal_mean_shift(300.0, &d, &c(1.0, 3.0)).unwrap();
        assert!((s.mean - 73.49).abs() < 5e-3);
        // Grid oracle on J.
        let best = (0..=20_000)
            .map(|k| 60.0 + k as f64 * 1e-3)
            .min_by(|a, b| {
                let ja = expected_cost_j(*a, 300.0, &d, &c(1.0, 3.0)).unwrap();
                let jb = expected_cost_j(*b, 300.0, &d, &c(1.0, 3.0)).unwrap();
                ja.partial_cmp(&jb).unwrap()
            })
            .unwrap();
        assert!((best - s.mean).abs() < 1e-3);
    }

    #[test]
    fn distance_and_bound() {
        let m = PolicyEvalMatrix::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0], vec![3.5, 4.5, 5.5]],
            vec![0.0; 3],
        )
        .unwrap();
        assert_eq!(l1_policy_distance(&m, 0, 1).unwrap(), 0.0);
        assert_eq!(l1_policy_distance(&m, 0, 2).unwrap(), 2.5);
        assert!(l1_policy_distance(&m, 0, 3).is_err());
        let bx = WeightBox::new(-1.0, 2.0).unwrap();
        assert_eq!(improvement_bound(&c(1.0, 3.0), &bx, 1.0).unwrap(), 6.0);
        assert_eq!(improvement_bound(&c(1.0, 3.0), &bx, 0.0).unwrap(), 0.0);
        let mut rng = rng_from_seed(8);
        let r: Vec<Vec<f64>> = (0..2).map(|_| (0..17).map(|_| uniform_in(&mut rng, -5.0, 5.0)).collect()).collect();
        let direct = r[0].iter().zip(&r[1]).map(|(a, b)| (a - b).abs()).sum::<f64>() / 17.0;
        let m = PolicyEvalMatrix::new(vec!["a".into(), "b".into()], r, vec![0.0; 17]).unwrap();
        assert!((l1_policy_distance(&m, 0, 1).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn overfit_examples() {
        let ok = overfit_reduction_check(&OverfitSetup::<f64> { var: 2.0, rho: 0.0, var_beta: 1.0, rho_beta: 0.5 }).unwrap();
        assert!(ok.preconditions_hold && ok.inequality_holds);
        assert!((ok.margin + 0.75).abs() < 1e-12);
        assert!((ok.averaged_excess - ok.single_excess - ok.margin).abs() < 1e-12);
        let edge = overfit_reduction_check(&OverfitSetup { var: 1.0, rho: 0.3, var_beta: 1.0, rho_beta: 0.3 }).unwrap();
        assert_eq!(edge.margin, 0.0);
        assert!(!edge.inequality_holds && !edge.preconditions_hold);
    }

    #[test]
    fn ols_examples() {
        let x = [1.0f64, 2.0, 3.0, 4.0, 5.0];
        let perfect = ols_fit(&x, &[3.0, 5.0, 7.0, 9.0, 11.0]).unwrap();
        assert!((perfect.r_squared - 1.0).abs() < 1e-12 && (perfect.slope - 2.0).abs() < 1e-12);
        assert_eq!(perfect.slope_p_value, 0.0);
        let flat = ols_fit(&x, &[4.0; 5]).unwrap();
        assert_eq!((flat.slope, flat.r_squared), (0.0, 0.0));
        // Normal equations oracle: [n Σx; Σx Σx²][a b]ᵀ = [Σy Σxy]ᵀ.
        let y = [2.1, 3.9, 6.2, 7.8, 10.1];
        let fit = ols_fit(&x, &y).unwrap();
        let (n, sx, sxx) = (5.0, 15.0, 55.0);
        let sy: f64 = y.iter().sum();
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let det = n * sxx - sx * sx;
        assert!((fit.intercept - (sxx * sy - sx * sxy) / det).abs() < 1e-12);
        assert!((fit.slope - (n * sxy - sx * sy) / det).abs() < 1e-12);
        // t = slope/se on 3 df; two-sided p from a t-table oracle: t ≈ 38.7 → p ≈ 3.8e-5.
        assert!(fit.slope_p_value > 1e-5 && fit.slope_p_value < 1e-4, "{}", fit.slope_p_value);
        assert!(ols_fit(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }
}
