//! Policy averaging: held-out evaluations of every candidate, a weight LP
//! over them, and the resulting weighted policy.

use std::io::Read;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidates::{fit_candidate, CandidateSpec, FittedPolicy};
use crate::error::{PaaError, Result};
use crate::newsvendor::{empirical_cost, CostParams, Dataset, FoldPlan, WeightBox};
use crate::optimizer::{solve_lp, LinearProgram, LpStatus};
use crate::rng::derive_seed;
use crate::scalar::Real;

/// Columns closer than this in mean absolute difference are flagged as
/// near-duplicates.
pub const DUPLICATE_TOL: f64 = 1e-9;

/// Held-out order quantities: entry `(i, j)` is candidate `i` fitted without
/// observation `j`'s fold and evaluated at observation `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Real + Serialize", deserialize = "S: Real + Deserialize<'de>"))]
pub struct PolicyEvalMatrix<S: Real = f64> {
    labels: Vec<String>,
    values: Vec<Vec<S>>,
    demands: Vec<S>,
}

impl<S: Real> PolicyEvalMatrix<S> {
    pub fn new(labels: Vec<String>, values: Vec<Vec<S>>, demands: Vec<S>) -> Result<Self> {
        if values.is_empty() {
            return Err(PaaError::InvalidArgument("need at least one candidate".into()));
        }
        if labels.len() != values.len() {
            return Err(PaaError::LengthMismatch { expected: values.len(), got: labels.len() });
        }
        if demands.is_empty() {
            return Err(PaaError::InsufficientData("need at least one observation".into()));
        }
        for row in &values {
            if row.len() != demands.len() {
                return Err(PaaError::LengthMismatch { expected: demands.len(), got: row.len() });
            }
        }
        if values.iter().flatten().chain(&demands).any(|v| !v.is_finite()) {
            return Err(PaaError::NonFinite("policy evaluation matrix"));
        }
        Ok(Self { labels, values, demands })
    }

    pub fn num_candidates(&self) -> usize {
        self.values.len()
    }

    pub fn num_obs(&self) -> usize {
        self.demands.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Held-out order quantities of candidate `i`.
    pub fn row(&self, i: usize) -> &[S] {
        &self.values[i]
    }

    pub fn demands(&self) -> &[S] {
        &self.demands
    }

    /// The rows of the listed candidates, in the given order.
    pub fn select(&self, candidates: &[usize]) -> Result<Self> {
        if let Some(&i) = candidates.iter().find(|&&i| i >= self.num_candidates()) {
            return Err(PaaError::InvalidArgument(format!("candidate index {i} out of range")));
        }
        Self::new(
            candidates.iter().map(|&i| self.labels[i].clone()).collect(),
            candidates.iter().map(|&i| self.values[i].clone()).collect(),
            self.demands.clone(),
        )
    }

    /// `Σ_i ω_i M_ij` for every `j`.
    pub fn combine(&self, weights: &[S]) -> Vec<S> {
        (0..self.num_obs()).map(|j| weights.iter().zip(&self.values).fold(S::zero(), |acc, (&w, r)| acc + w * r[j])).collect()
    }
}

impl PolicyEvalMatrix<f64> {
    /// Reads a CSV whose header is the candidate labels followed by
    /// `demand`; each record is one held-out observation.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header.last().map(String::as_str) != Some("demand") || header.len() < 2 {
            return Err(PaaError::Parse("header must list candidate labels followed by `demand`".into()));
        }
        let m = header.len() - 1;
        let mut values = vec![Vec::new(); m];
        let mut demands = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != m + 1 {
                return Err(PaaError::Parse(format!("record {}: expected {} fields, got {}", line + 1, m + 1, rec.len())));
            }
            for (k, field) in rec.iter().enumerate() {
                let v: f64 = field
                    .parse()
                    .map_err(|_| PaaError::Parse(format!("record {}: `{field}` is not a number", line + 1)))?;
                if k < m {
                    values[k].push(v);
                } else {
                    demands.push(v);
                }
            }
        }
        Self::new(header[..m].to_vec(), values, demands)
    }
}

/// Fits every candidate on every reduced fold and evaluates it on the
/// held-out rows. Cells run in parallel with seeds derived from
/// `(seed, fold, candidate)`; the result does not depend on scheduling.
pub fn build_fold_matrix(
    data: &Dataset<f64>,
    specs: &[CandidateSpec],
    costs: &CostParams<f64>,
    plan: &FoldPlan,
    seed: u64,
) -> Result<PolicyEvalMatrix<f64>> {
    if specs.is_empty() {
        return Err(PaaError::InvalidArgument("need at least one candidate".into()));
    }
    if plan.len() != data.len() {
        return Err(PaaError::LengthMismatch { expected: data.len(), got: plan.len() });
    }
    let folds = plan.folds();
    let cells: Vec<(usize, usize)> = (0..folds.len()).flat_map(|f| (0..specs.len()).map(move |i| (f, i))).collect();
    let reduced: Vec<Dataset<f64>> = folds.iter().map(|fold| data.without(fold)).collect::<Result<_>>()?;
    let results: Vec<Result<Vec<f64>>> = cells
        .par_iter()
        .map(|&(f, i)| {
            let wrap = |e: PaaError| PaaError::FoldFit { candidate: specs[i].label(), fold: f, source: Box::new(e) };
            let policy = fit_candidate(&specs[i], &reduced[f], costs, derive_seed(seed, &[f as u64, i as u64])).map_err(wrap)?;
            folds[f].iter().map(|&j| policy.evaluate_row(data.row(j)).map_err(wrap)).collect()
        })
        .collect();
    let mut values = vec![vec![0.0; data.len()]; specs.len()];
    for (&(f, i), res) in cells.iter().zip(results) {
        for (&j, q) in folds[f].iter().zip(res?) {
            values[i][j] = q;
        }
    }
    PolicyEvalMatrix::new(specs.iter().map(CandidateSpec::label).collect(), values, data.demands())
}

/// Fits every candidate on the complete dataset, in parallel. Seeds are
/// derived from `(seed, u64::MAX, candidate)` so they never coincide with a
/// fold's.
pub fn fit_full(specs: &[CandidateSpec], data: &Dataset<f64>, costs: &CostParams<f64>, seed: u64) -> Result<Vec<FittedPolicy>> {
    specs
        .par_iter()
        .enumerate()
        .map(|(i, spec)| fit_candidate(spec, data, costs, derive_seed(seed, &[u64::MAX, i as u64])))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Real + Serialize", deserialize = "S: Real + Deserialize<'de>"))]
pub struct WeightSolution<S: Real = f64> {
    pub weights: Vec<S>,
    /// Held-out empirical cost of the weighted policy.
    pub cv_cost: S,
    /// Held-out empirical cost of each candidate on its own.
    pub per_candidate_cv_cost: Vec<S>,
    /// Candidate pairs whose held-out columns are practically identical.
    pub near_duplicates: Vec<(usize, usize)>,
    pub pivots: usize,
}

/// Mean absolute difference between candidates `i` and `j` over the held-out
/// observations.
pub fn column_distance<S: Real>(matrix: &PolicyEvalMatrix<S>, i: usize, j: usize) -> S {
    let (a, b) = (matrix.row(i), matrix.row(j));
    a.iter().zip(b).fold(S::zero(), |acc, (&x, &y)| acc + (x - y).abs()) / S::from_usize_lossy(a.len())
}

/// Solves the weight LP
/// `min (c_o/t) Σ u_j + (c_u/t) Σ v_j` subject to
/// `Σ_i ω_i M_ij − u_j + v_j = d_j`, `Σ ω_i = 1`, `L ≤ ω_i ≤ U`, `u, v ≥ 0`.
pub fn solve_weights<S: Real>(matrix: &PolicyEvalMatrix<S>, costs: &CostParams<S>, bx: &WeightBox<S>) -> Result<WeightSolution<S>> {
    let m = matrix.num_candidates();
    let t = matrix.num_obs();
    let tn = S::from_usize_lossy(t);
    let mut objective = vec![S::zero(); m];
    objective.extend(std::iter::repeat_n(costs.overage() / tn, t));
    objective.extend(std::iter::repeat_n(costs.underage() / tn, t));
    let mut lp = LinearProgram::new(objective);
    for j in 0..t {
        let mut row = vec![S::zero(); m + 2 * t];
        for i in 0..m {
            row[i] = matrix.row(i)[j];
        }
        row[m + j] = -S::one();
        row[m + t + j] = S::one();
        lp.add_eq(row, matrix.demands()[j]);
    }
    let mut simplex = vec![S::zero(); m + 2 * t];
    simplex[..m].iter_mut().for_each(|v| *v = S::one());
    lp.add_eq(simplex, S::one());
    for i in 0..m {
        lp.set_bounds(i, bx.lower(), bx.upper());
    }
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(PaaError::Internal(format!("weight LP ended {:?}; a unit vector is always feasible", sol.status)));
    }
    let per_candidate_cv_cost =
        (0..m).map(|i| empirical_cost(matrix.row(i), matrix.demands(), costs)).collect::<Result<Vec<S>>>()?;
    let mut weights = sol.x[..m].to_vec();
    if m == 1 {
        // Undo the bound shift's rounding: the simplex row forces ω = 1.
        weights[0] = S::one();
    }
    let mut cv_cost = empirical_cost(&matrix.combine(&weights), matrix.demands(), costs)?;
    // Guard against round-off leaving the vertex a hair above a unit vector.
    if let Some((best, &c)) = per_candidate_cv_cost.iter().enumerate().min_by(|a, b| a.1.partial_cmp(b.1).unwrap()) {
        if c < cv_cost {
            weights = vec![S::zero(); m];
            weights[best] = S::one();
            cv_cost = c;
        }
    }
    let tol = S::lit(DUPLICATE_TOL);
    let near_duplicates =
        (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).filter(|&(i, j)| column_distance(matrix, i, j) < tol).collect();
    Ok(WeightSolution { weights, cv_cost, per_candidate_cv_cost, near_duplicates, pivots: sol.pivots })
}

/// The weighted policy `x ↦ Σ ω_i Q_i(x)` over candidates fitted on the
/// complete dataset.
pub fn assemble_paa_policy(weights: &WeightSolution<f64>, full_fit_policies: Vec<FittedPolicy>) -> Result<FittedPolicy> {
    FittedPolicy::weighted("paa", weights.weights.clone(), full_fit_policies)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundStyle {
    /// `[−ln n / 15, 1 + ln n / 15]`
    Narrow,
    /// `[−ln n, 1 + ln n]`
    Wide,
    Fixed { lower: f64, upper: f64 },
}

pub fn bound_schedule<S: Real>(n: usize, style: BoundStyle) -> Result<WeightBox<S>> {
    if n < 2 {
        return Err(PaaError::InsufficientData(format!("bound schedule needs n >= 2, got {n}")));
    }
    let ln = S::from_usize_lossy(n).ln();
    match style {
        BoundStyle::Narrow => {
            let w = ln / S::lit(15.0);
            WeightBox::new(-w, S::one() + w)
        }
        BoundStyle::Wide => WeightBox::new(-ln, S::one() + ln),
        BoundStyle::Fixed { lower, upper } => WeightBox::new(S::lit(lower), S::lit(upper)),
    }
}

/// Everything produced by one policy-averaging run.
#[derive(Debug, Clone)]
pub struct PaaFit {
    pub matrix: PolicyEvalMatrix<f64>,
    pub solution: WeightSolution<f64>,
    pub candidates: Vec<FittedPolicy>,
    pub policy: FittedPolicy,
}

/// Fold matrix, weight solve, full-data refits and assembly in one call.
pub fn fit_paa(
    data: &Dataset<f64>,
    specs: &[CandidateSpec],
    costs: &CostParams<f64>,
    plan: &FoldPlan,
    bx: &WeightBox<f64>,
    seed: u64,
) -> Result<PaaFit> {
    let matrix = build_fold_matrix(data, specs, costs, plan, seed)?;
    let solution = solve_weights(&matrix, costs, bx)?;
    let candidates = fit_full(specs, data, costs, seed)?;
    let policy = assemble_paa_policy(&solution, candidates.clone())?;
    Ok(PaaFit { matrix, solution, candidates, policy })
}
