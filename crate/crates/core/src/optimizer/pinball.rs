//! Linear quantile (pinball-loss) estimation.

use serde::{Deserialize, Serialize};

use super::lp::{solve_lp, LinearProgram, LpStatus};
use crate::error::{PaaError, Result};
use crate::newsvendor::saa_quantile;
use crate::scalar::Real;

/// Coefficient penalty. Column 0 of the design is the intercept and is never
/// penalized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "lambda", rename_all = "snake_case")]
pub enum Penalty {
    None,
    L1(f64),
    L2(f64),
}

impl Penalty {
    pub fn lambda(&self) -> f64 {
        match *self {
            Penalty::None => 0.0,
            Penalty::L1(l) | Penalty::L2(l) => l,
        }
    }
}

pub const SUBGRADIENT_ITERS: usize = 5000;

/// Minimizes `(1/t) Σ [c_o (q·x_j − d_j)⁺ + c_u (d_j − q·x_j)⁺] + λ·penalty(q)`
/// with `c_u = ratio`, `c_o = 1 − ratio`.
///
/// Unpenalized and L1 problems are solved exactly as linear programs; among
/// tied optima the smallest intercept is returned. L2 uses an averaged
/// subgradient method whose quadratic term is applied through its proximal map.
pub fn fit_pinball_linear<S: Real>(design: &[Vec<S>], demands: &[S], ratio: S, reg: Penalty) -> Result<Vec<S>> {
    let t = design.len();
    if t == 0 {
        return Err(PaaError::InsufficientData("empty design".into()));
    }
    if demands.len() != t {
        return Err(PaaError::LengthMismatch { expected: t, got: demands.len() });
    }
    if !(ratio > S::zero() && ratio < S::one()) {
        return Err(PaaError::Domain(format!("ratio {ratio} outside (0, 1)")));
    }
    let p = design[0].len();
    if p == 0 {
        return Err(PaaError::InvalidArgument("design has no columns".into()));
    }
    if let Some(row) = design.iter().find(|r| r.len() != p) {
        return Err(PaaError::DimensionMismatch { expected: p, got: row.len() });
    }
    if design.iter().flatten().chain(demands).any(|v| !v.is_finite()) {
        return Err(PaaError::NonFinite("pinball design"));
    }
    let lambda = reg.lambda();
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(PaaError::InvalidArgument(format!("penalty weight {lambda} must be finite and nonnegative")));
    }
    match reg {
        Penalty::None | Penalty::L1(_) => solve_exact(design, demands, ratio, S::lit(lambda)),
        Penalty::L2(_) => Ok(subgradient_l2(design, demands, ratio, S::lit(lambda))),
    }
}

fn solve_exact<S: Real>(design: &[Vec<S>], demands: &[S], ratio: S, lambda: S) -> Result<Vec<S>> {
    let t = design.len();
    let p = design[0].len();
    let tf = S::from_usize_lossy(t);
    let (c_o, c_u) = (S::one() - ratio, ratio);
    // Layout: [q⁺ (p) | q⁻ (p) | u (t) | v (t)]
    let nv = 2 * p + 2 * t;
    let mut c = vec![S::zero(); nv];
    for k in 1..p {
        c[k] = lambda;
        c[p + k] = lambda;
    }
    for j in 0..t {
        c[2 * p + j] = c_o / tf;
        c[2 * p + t + j] = c_u / tf;
    }
    let mut lp = LinearProgram::new(c);
    for (j, (x, &d)) in design.iter().zip(demands).enumerate() {
        let mut row = vec![S::zero(); nv];
        for k in 0..p {
            row[k] = x[k];
            row[p + k] = -x[k];
        }
        row[2 * p + j] = -S::one();
        row[2 * p + t + j] = S::one();
        lp.add_eq(row, d);
    }
    let mut tb = vec![S::zero(); nv];
    tb[0] = S::one();
    tb[p] = -S::one();
    lp.tie_break = Some(tb);
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(PaaError::Internal(format!("pinball LP ended {:?}", sol.status)));
    }
    Ok((0..p).map(|k| sol.x[k] - sol.x[p + k]).collect())
}

fn subgradient_l2<S: Real>(design: &[Vec<S>], demands: &[S], ratio: S, lambda: S) -> Vec<S> {
    let t = design.len();
    let p = design[0].len();
    let tf = S::from_usize_lossy(t);
    let (c_o, c_u) = (S::one() - ratio, ratio);
    // Root-mean-square column norm, so the step size does not shrink with t.
    let max_norm = (0..p)
        .map(|k| (design.iter().map(|x| x[k] * x[k]).sum::<S>() / tf).sqrt())
        .fold(S::zero(), S::max);
    let alpha0 = if max_norm > S::zero() { max_norm.recip() } else { S::one() };

    let mut q = vec![S::zero(); p];
    q[0] = saa_quantile(demands, ratio).unwrap_or_else(|_| S::zero());
    let mut avg = vec![S::zero(); p];
    let mut grad = vec![S::zero(); p];
    for s in 1..=SUBGRADIENT_ITERS {
        grad.iter_mut().for_each(|g| *g = S::zero());
        for (x, &d) in design.iter().zip(demands) {
            let r: S = x.iter().zip(&q).map(|(&a, &b)| a * b).sum::<S>() - d;
            // At a kink the underage side is taken.
            let w = if r > S::zero() { c_o } else { -c_u };
            for (g, &xk) in grad.iter_mut().zip(x) {
                *g = *g + w * xk;
            }
        }
        let alpha = alpha0 / S::from_usize_lossy(s).sqrt();
        for k in 0..p {
            let moved = q[k] - alpha * grad[k] / tf;
            q[k] = if k == 0 { moved } else { moved / (S::one() + S::lit(2.0) * alpha * lambda) };
        }
        let sf = S::from_usize_lossy(s);
        for k in 0..p {
            avg[k] = avg[k] + (q[k] - avg[k]) / sf;
        }
    }
    avg
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn loss(design: &[Vec<f64>], d: &[f64], ratio: f64, q: &[f64]) -> f64 {
        design
            .iter()
            .zip(d)
            .map(|(x, &dj)| {
                let r: f64 = x.iter().zip(q).map(|(a, b)| a * b).sum::<f64>() - dj;
                if r > 0.0 { (1.0 - ratio) * r } else { -ratio * r }
            })
            .sum::<f64>()
            / d.len() as f64
    }

    #[test]
    fn intercept_only_smallest_minimizer() {
        let design = vec![vec![1.0]; 4];
        let d = [1.0, 2.0, 3.0, 4.0];
        let q = fit_pinball_linear(&design, &d, 0.75, Penalty::None).unwrap();
        // Brute-force scan over a fine grid: the objective is flat on [3, 4].
        let best = (0..=5000).map(|i| i as f64 / 1000.0).map(|v| loss(&design, &d, 0.75, &[v])).fold(f64::INFINITY, f64::min);
        let smallest = (0..=5000).map(|i| i as f64 / 1000.0).find(|&v| loss(&design, &d, 0.75, &[v]) <= best + 1e-12).unwrap();
        assert!((q[0] - smallest).abs() < 1e-9);
        assert!((q[0] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn perfect_linear_fit() {
        let xs = [0.0, 0.5, 1.0, 1.5, 2.0, 3.0];
        let design: Vec<Vec<f64>> = xs.iter().map(|&x| vec![1.0, x]).collect();
        let d: Vec<f64> = xs.iter().map(|x| 2.0 + 5.0 * x).collect();
        let q = fit_pinball_linear(&design, &d, 0.75, Penalty::None).unwrap();
        assert!((q[0] - 2.0).abs() < 1e-9 && (q[1] - 5.0).abs() < 1e-9);
    }

    #[test]
    fn heavy_l2_shrinks_slopes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let design: Vec<Vec<f64>> = (0..40).map(|_| vec![1.0, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
        let d: Vec<f64> = design.iter().map(|x| 10.0 + 3.0 * x[1] - 2.0 * x[2] + rng.gen_range(-1.0..1.0)).collect();
        let q = fit_pinball_linear(&design, &d, 0.6, Penalty::L2(1e6)).unwrap();
        assert!(q[1].abs() < 1e-3 && q[2].abs() < 1e-3);
        let light = fit_pinball_linear(&design, &d, 0.6, Penalty::L2(1e-6)).unwrap();
        assert!((light[1] - 3.0).abs() < 0.5, "{light:?}");
    }

    #[test]
    fn l1_penalty_shrinks() {
        let xs: Vec<f64> = (0..30).map(|i| i as f64 / 10.0).collect();
        let design: Vec<Vec<f64>> = xs.iter().map(|&x| vec![1.0, x]).collect();
        let d: Vec<f64> = xs.iter().map(|x| 1.0 + 0.5 * x).collect();
        let free = fit_pinball_linear(&design, &d, 0.5, Penalty::L1(0.0)).unwrap();
        let heavy = fit_pinball_linear(&design, &d, 0.5, Penalty::L1(100.0)).unwrap();
        assert!((free[1] - 0.5).abs() < 1e-9);
        assert!(heavy[1].abs() < 1e-12);
    }

    #[test]
    fn crossing_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..20 {
            let t = 30 + trial;
            let ratio = rng.gen_range(0.1..0.9);
            let design: Vec<Vec<f64>> = (0..t).map(|_| vec![1.0, rng.gen_range(0.0..2.0)]).collect();
            let d: Vec<f64> = design.iter().map(|x| 5.0 + x[1] * 2.0 + rng.gen_range(-2.0..2.0)).collect();
            let q = fit_pinball_linear(&design, &d, ratio, Penalty::None).unwrap();
            let below = design
                .iter()
                .zip(&d)
                .filter(|(x, &dj)| dj < x[0] * q[0] + x[1] * q[1] - 1e-9)
                .count() as f64
                / t as f64;
            let slack = 2.0 / t as f64;
            assert!(below >= ratio - slack - 1e-12 && below <= ratio + slack + 1e-12, "below {below} ratio {ratio}");
        }
    }

    #[test]
    fn lp_beats_random_perturbations() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let design: Vec<Vec<f64>> = (0..25).map(|_| vec![1.0, rng.gen_range(-1.0..1.0)]).collect();
        let d: Vec<f64> = design.iter().map(|x| 3.0 - x[1] + rng.gen_range(0.0..1.0)).collect();
        let q = fit_pinball_linear(&design, &d, 0.3, Penalty::None).unwrap();
        let base = loss(&design, &d, 0.3, &q);
        for _ in 0..200 {
            let pert = [q[0] + rng.gen_range(-0.1..0.1), q[1] + rng.gen_range(-0.1..0.1)];
            assert!(loss(&design, &d, 0.3, &pert) >= base - 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_pinball_linear::<f64>(&[], &[], 0.5, Penalty::None).is_err());
        assert!(fit_pinball_linear(&[vec![1.0]], &[1.0, 2.0], 0.5, Penalty::None).is_err());
        assert!(fit_pinball_linear(&[vec![1.0]], &[1.0], 1.0, Penalty::None).is_err());
        assert!(fit_pinball_linear(&[vec![1.0]], &[1.0], 0.5, Penalty::L1(-1.0)).is_err());
    }
}
