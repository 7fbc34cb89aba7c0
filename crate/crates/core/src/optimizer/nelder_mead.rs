use crate::error::{PaaError, Result};
use crate::scalar::Real;
use crate::special::Tolerance;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions<S: Real = f64> {
    /// `abs_tol` bounds the simplex diameter at termination.
    pub tol: Tolerance<S>,
    /// Optional stop on the spread of function values across the simplex.
    pub f_tol: Option<S>,
    /// Initial edge length, relative to `max(|x0_i|, 1)`.
    pub initial_step: S,
}

impl<S: Real> NelderMeadOptions<S> {
    pub fn new(tol: Tolerance<S>) -> Self {
        Self { tol, f_tol: None, initial_step: S::lit(0.1) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult<S: Real = f64> {
    pub x: Vec<S>,
    pub value: S,
    pub iterations: usize,
    /// False when `max_iter` ran out before the stopping rule fired; `x` is
    /// then the best point seen.
    pub converged: bool,
}

/// Minimizes `f` from `x0` with the default options for `tol`.
pub fn nelder_mead<S, F>(f: F, x0: &[S], tol: Tolerance<S>) -> Result<NelderMeadResult<S>>
where
    S: Real,
    F: FnMut(&[S]) -> S,
{
    nelder_mead_with(f, x0, &NelderMeadOptions::new(tol))
}

/// Standard Nelder–Mead (reflection 1, expansion 2, contraction ½, shrink ½).
/// Non-finite objective values are treated as `+∞`.
pub fn nelder_mead_with<S, F>(mut f: F, x0: &[S], opts: &NelderMeadOptions<S>) -> Result<NelderMeadResult<S>>
where
    S: Real,
    F: FnMut(&[S]) -> S,
{
    let n = x0.len();
    if n == 0 {
        return Err(PaaError::InvalidArgument("nelder_mead needs at least one coordinate".into()));
    }
    let mut eval = |x: &[S]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            S::infinity()
        }
    };
    let f0 = eval(x0);
    if !f0.is_finite() {
        return Err(PaaError::Domain("objective is not finite at the starting point".into()));
    }
    let half = S::lit(0.5);
    let two = S::lit(2.0);

    let mut simplex: Vec<Vec<S>> = Vec::with_capacity(n + 1);
    let mut values: Vec<S> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    values.push(f0);
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] = v[i] + opts.initial_step * x0[i].abs().max(S::one());
        values.push(eval(&v));
        simplex.push(v);
    }

    let mut order: Vec<usize> = (0..=n).collect();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.tol.max_iter {
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        let diameter = simplex
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[best]).map(|(a, b)| (*a - *b).abs()))
            .fold(S::zero(), S::max);
        let spread = values[worst] - values[best];
        if diameter < opts.tol.abs_tol || opts.f_tol.is_some_and(|ft| spread <= ft) {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![S::zero(); n];
        for &idx in &order[..n] {
            for (c, &x) in centroid.iter_mut().zip(&simplex[idx]) {
                *c = *c + x;
            }
        }
        let nf = S::from_usize_lossy(n);
        centroid.iter_mut().for_each(|c| *c = *c / nf);

        let along = |coef: S, from: &[S]| -> Vec<S> {
            centroid.iter().zip(from).map(|(&c, &w)| c + coef * (c - w)).collect()
        };
        let reflected = along(S::one(), &simplex[worst]);
        let fr = eval(&reflected);
        if fr < values[best] {
            let expanded = along(two, &simplex[worst]);
            let fe = eval(&expanded);
            if fe < fr {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
            continue;
        }
        if fr < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[worst] {
            let c = along(half, &simplex[worst]);
            let v = eval(&c);
            (c, v)
        } else {
            let c = along(-half, &simplex[worst]);
            let v = eval(&c);
            (c, v)
        };
        if fc < values[worst].min(fr) {
            simplex[worst] = contracted;
            values[worst] = fc;
            continue;
        }
        let anchor = simplex[best].clone();
        for &idx in &order[1..] {
            let v: Vec<S> = anchor.iter().zip(&simplex[idx]).map(|(&a, &x)| a + half * (x - a)).collect();
            values[idx] = eval(&v);
            simplex[idx] = v;
        }
    }
    let best = (0..=n)
        .min_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap_or(0);
    Ok(NelderMeadResult { x: simplex[best].clone(), value: values[best], iterations, converged })
}

/// Golden-section search for a minimum of a unimodal `f` on `[lo, hi]`.
pub fn golden_section<S, F>(mut f: F, lo: S, hi: S, tol: Tolerance<S>) -> Result<(S, S)>
where
    S: Real,
    F: FnMut(S) -> S,
{
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(PaaError::InvalidArgument(format!("bad interval [{lo}, {hi}]")));
    }
    let inv_phi = (S::lit(5.0).sqrt() - S::one()) / S::lit(2.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..tol.max_iter.max(200) {
        if (b - a).abs() <= tol.abs_tol * (S::one() + a.abs().max(b.abs())) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = (a + b) / S::lit(2.0);
    let fx = f(x);
    Ok((x, fx))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tight() -> Tolerance<f64> {
        Tolerance { abs_tol: 1e-10, max_iter: 10_000 }
    }

    #[test]
    fn one_dimensional_quadratic() {
        let r = nelder_mead(|x: &[f64]| (x[0] - 3.0).powi(2), &[0.0], tight()).unwrap();
        assert!(r.converged);
        assert!((r.x[0] - 3.0).abs() < 1e-6);
    }

    #[test]
    fn anisotropic_bowl() {
        let r = nelder_mead(|x: &[f64]| x[0] * x[0] + 10.0 * x[1] * x[1], &[1.3, -0.7], tight()).unwrap();
        assert!(r.x[0].abs() < 1e-5 && r.x[1].abs() < 1e-5);
    }

    #[test]
    fn normal_likelihood_matches_closed_form() {
        let data = [58.1, 61.0, 72.3, 49.9, 63.4, 55.5, 67.2, 60.6];
        let n = data.len() as f64;
        let mean = data.iter().sum::<f64>() / n;
        let sd = (data.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n).sqrt();
        let nll = |p: &[f64]| {
            let s = p[1].exp();
            data.iter().map(|d| ((d - p[0]) / s).powi(2) / 2.0 + s.ln()).sum::<f64>()
        };
        let r = nelder_mead(nll, &[50.0, 2.0], tight()).unwrap();
        assert!((r.x[0] - mean).abs() < 1e-4);
        assert!((r.x[1].exp() - sd).abs() < 1e-4);
    }

    #[test]
    fn non_convergence_is_flagged() {
        let tol = Tolerance { abs_tol: 1e-12, max_iter: 3 };
        let r = nelder_mead(|x: &[f64]| (x[0] - 3.0).powi(2), &[0.0], tol).unwrap();
        assert!(!r.converged);
        assert!(r.value <= 9.0);
    }

    #[test]
    fn bad_start_rejected() {
        assert!(nelder_mead(|_x: &[f64]| f64::NAN, &[0.0], tight()).is_err());
        assert!(nelder_mead(|_x: &[f64]| 0.0, &[], tight()).is_err());
    }

    #[test]
    fn golden_section_finds_parabola_vertex() {
        let (x, _) = golden_section(|x: f64| (x - 1.25).powi(2), -3.0, 4.0, tight()).unwrap();
        assert!((x - 1.25).abs() < 1e-6);
    }

    #[test]
    fn f32_quadratic() {
        let tol = Tolerance { abs_tol: 1e-4f32, max_iter: 2000 };
        let r = nelder_mead(|x: &[f32]| (x[0] - 3.0).powi(2), &[0.0f32], tol).unwrap();
        assert!((r.x[0] - 3.0).abs() < 1e-3);
    }
}
