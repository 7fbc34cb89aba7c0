//! Domain types and the newsvendor cost primitives.

use serde::{Deserialize, Serialize};

use crate::error::{PaaError, Result};
use crate::scalar::Real;

/// Unit overage and underage costs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCosts<S>", into = "RawCosts<S>")]
#[serde(bound(serialize = "S: Real + Serialize", deserialize = "S: Real + Deserialize<'de>"))]
pub struct CostParams<S: Real = f64> {
    overage: S,
    underage: S,
}

#[derive(Serialize, Deserialize)]
struct RawCosts<S> {
    overage: S,
    underage: S,
}

impl<S: Real> TryFrom<RawCosts<S>> for CostParams<S> {
    type Error = PaaError;
    fn try_from(r: RawCosts<S>) -> Result<Self> {
        CostParams::new(r.overage, r.underage)
    }
}

impl<S: Real> From<CostParams<S>> for RawCosts<S> {
    fn from(c: CostParams<S>) -> Self {
        RawCosts { overage: c.overage, underage: c.underage }
    }
}

impl<S: Real> CostParams<S> {
    pub fn new(overage: S, underage: S) -> Result<Self> {
        if !overage.is_finite() || !underage.is_finite() {
            return Err(PaaError::NonFinite("cost parameters"));
        }
        if overage <= S::zero() || underage <= S::zero() {
            return Err(PaaError::InvalidArgument(format!(
                "costs must be positive (c_o={overage}, c_u={underage})"
            )));
        }
        Ok(Self { overage, underage })
    }

    /// Builds costs with `c_o + c_u = 1` from a critical ratio in (0, 1).
    pub fn from_ratio(ratio: S) -> Result<Self> {
        if !(ratio > S::zero() && ratio < S::one()) {
            return Err(PaaError::Domain(format!("critical ratio {ratio} outside (0, 1)")));
        }
        Self::new(S::one() - ratio, ratio)
    }

    #[inline]
    pub fn overage(&self) -> S {
        self.overage
    }

    #[inline]
    pub fn underage(&self) -> S {
        self.underage
    }

    #[inline]
    pub fn critical_ratio(&self) -> S {
        critical_ratio(self)
    }

    /// Cost of ordering `q` against demand `d`, without input validation.
    #[inline]
    pub fn cost(&self, q: S, d: S) -> S {
        if q >= d {
            self.overage * (q - d)
        } else {
            self.underage * (d - q)
        }
    }
}

/// `c_u / (c_o + c_u)`, the demand quantile level of the optimal order.
#[inline]
pub fn critical_ratio<S: Real>(costs: &CostParams<S>) -> S {
    costs.underage / (costs.overage + costs.underage)
}

/// `c_o·max(q − d, 0) + c_u·max(d − q, 0)`.
pub fn newsvendor_cost<S: Real>(q: S, d: S, costs: &CostParams<S>) -> Result<S> {
    if !q.is_finite() || !d.is_finite() {
        return Err(PaaError::NonFinite("order quantity or demand"));
    }
    Ok(costs.cost(q, d))
}

/// Mean newsvendor cost over paired order quantities and demands.
pub fn empirical_cost<S: Real>(q_values: &[S], demands: &[S], costs: &CostParams<S>) -> Result<S> {
    if q_values.len() != demands.len() {
        return Err(PaaError::LengthMismatch { expected: demands.len(), got: q_values.len() });
    }
    if demands.is_empty() {
        return Err(PaaError::InsufficientData("empirical cost needs at least one pair".into()));
    }
    let mut total = S::zero();
    for (&q, &d) in q_values.iter().zip(demands) {
        total = total + newsvendor_cost(q, d, costs)?;
    }
    Ok(total / S::from_usize_lossy(demands.len()))
}

/// Box bounds `L ≤ ω_i ≤ U` on the averaging weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Real + Serialize", deserialize = "S: Real + Deserialize<'de>"))]
pub struct WeightBox<S: Real = f64> {
    lower: S,
    upper: S,
}

impl<S: Real> WeightBox<S> {
    pub fn new(lower: S, upper: S) -> Result<Self> {
        if !lower.is_finite() || !upper.is_finite() {
            return Err(PaaError::NonFinite("weight bounds"));
        }
        if lower > S::zero() || upper < S::one() {
            return Err(PaaError::InvalidArgument(format!(
                "weight box needs L <= 0 <= 1 <= U, got [{lower}, {upper}]"
            )));
        }
        Ok(Self { lower, upper })
    }

    /// The plain simplex box `[0, 1]`.
    pub fn simplex() -> Self {
        Self { lower: S::zero(), upper: S::one() }
    }

    #[inline]
    pub fn lower(&self) -> S {
        self.lower
    }

    #[inline]
    pub fn upper(&self) -> S {
        self.upper
    }

    /// `max(|L|, U)`.
    pub fn magnitude(&self) -> S {
        self.lower.abs().max(self.upper)
    }
}

/// One observed period: demand, covariates, and a time stamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Real + Serialize", deserialize = "S: Real + Deserialize<'de>"))]
pub struct Observation<S: Real = f64> {
    pub demand: S,
    pub covariates: Vec<S>,
    /// Position of the period on the time axis; defaults to the row index.
    pub time: S,
}

/// Ordered demand observations with covariate vectors of a common dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Real + Serialize", deserialize = "S: Real + Deserialize<'de>"))]
pub struct Dataset<S: Real = f64> {
    rows: Vec<Observation<S>>,
    dim: usize,
}

impl<S: Real> Dataset<S> {
    /// Validates rows: at least two, finite nonnegative demand, common covariate dimension.
    pub fn new(rows: Vec<Observation<S>>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(PaaError::InsufficientData(format!(
                "dataset needs at least 2 rows, got {}",
                rows.len()
            )));
        }
        Self::new_unchecked_len(rows)
    }

    fn new_unchecked_len(rows: Vec<Observation<S>>) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.covariates.len());
        for (i, r) in rows.iter().enumerate() {
            if !r.demand.is_finite() || r.covariates.iter().any(|v| !v.is_finite()) {
                return Err(PaaError::NonFinite("dataset row"));
            }
            if r.demand < S::zero() {
                return Err(PaaError::Domain(format!("row {i}: negative demand {}", r.demand)));
            }
            if r.covariates.len() != dim {
                return Err(PaaError::DimensionMismatch { expected: dim, got: r.covariates.len() });
            }
        }
        Ok(Self { rows, dim })
    }

    /// i.i.d. dataset: demands only, time stamps are row indices.
    pub fn from_demands(demands: &[S]) -> Result<Self> {
        Self::new(
            demands
                .iter()
                .enumerate()
                .map(|(i, &d)| Observation { demand: d, covariates: Vec::new(), time: S::from_usize_lossy(i) })
                .collect(),
        )
    }

    /// Feature dataset from parallel demand and covariate lists.
    pub fn from_parts(demands: &[S], covariates: Vec<Vec<S>>) -> Result<Self> {
        if demands.len() != covariates.len() {
            return Err(PaaError::LengthMismatch { expected: demands.len(), got: covariates.len() });
        }
        Self::new(
            demands
                .iter()
                .zip(covariates)
                .enumerate()
                .map(|(i, (&d, x))| Observation { demand: d, covariates: x, time: S::from_usize_lossy(i) })
                .collect(),
        )
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Covariate dimension (0 in the i.i.d. case).
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn rows(&self) -> &[Observation<S>] {
        &self.rows
    }

    #[inline]
    pub fn row(&self, i: usize) -> &Observation<S> {
        &self.rows[i]
    }

    pub fn demands(&self) -> Vec<S> {
        self.rows.iter().map(|r| r.demand).collect()
    }

    /// Rows not listed in `excluded`, in original order. Used for the reduced
    /// fitting sets, which may hold a single row.
    pub fn without(&self, excluded: &[usize]) -> Result<Self> {
        let rows: Vec<_> = self
            .rows
            .iter()
            .enumerate()
            .filter(|(i, _)| !excluded.contains(i))
            .map(|(_, r)| r.clone())
            .collect();
        if rows.is_empty() {
            return Err(PaaError::InsufficientData("holdout removes every row".into()));
        }
        Ok(Self { rows, dim: self.dim })
    }

    /// Rows `range`, preserving order. May hold a single row.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Result<Self> {
        if range.end > self.rows.len() || range.is_empty() {
            return Err(PaaError::InvalidArgument(format!(
                "slice {range:?} of a {}-row dataset",
                self.rows.len()
            )));
        }
        Ok(Self { rows: self.rows[range].to_vec(), dim: self.dim })
    }
}

/// Partition of `0..t` into held-out folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    batch_size: usize,
    folds: Vec<Vec<usize>>,
}

impl FoldPlan {
    /// Exact leave-one-out.
    pub fn leave_one_out(t: usize) -> Result<Self> {
        Self::contiguous(t, 1)
    }

    /// Contiguous batches of `batch_size`; the last fold may be shorter.
    pub fn contiguous(t: usize, batch_size: usize) -> Result<Self> {
        if batch_size == 0 {
            return Err(PaaError::InvalidArgument("batch size must be positive".into()));
        }
        if t < 2 {
            return Err(PaaError::InsufficientData(format!("fold plan needs t >= 2, got {t}")));
        }
        if batch_size >= t {
            return Err(PaaError::InvalidArgument(format!(
                "batch size {batch_size} leaves no training rows out of {t}"
            )));
        }
        let folds = (0..t)
            .step_by(batch_size)
            .map(|start| (start..(start + batch_size).min(t)).collect())
            .collect();
        Ok(Self { batch_size, folds })
    }

    #[inline]
    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    #[inline]
    pub fn folds(&self) -> &[Vec<usize>] {
        &self.folds
    }

    /// Number of rows covered.
    pub fn len(&self) -> usize {
        self.folds.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.folds.is_empty()
    }
}

/// Weighted critical-ratio quantile: the smallest value `v` whose cumulative
/// weight reaches `ratio` of the total mass. Exact ties (up to a relative
/// 1e-12) resolve to the smaller order statistic. Returns `None` when the
/// total weight is not positive.
pub fn weighted_quantile<S: Real>(values: &[S], weights: &[S], ratio: S) -> Option<S> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
    let total: S = weights.iter().copied().sum();
    if !(total > S::zero()) {
        return None;
    }
    let target = ratio * total * (S::one() - S::lit(1e-12));
    let mut cum = S::zero();
    for &i in &idx {
        cum = cum + weights[i];
        if cum >= target {
            return Some(values[i]);
        }
    }
    idx.last().map(|&i| values[i])
}

/// Sample-average-approximation order quantity: the smallest minimizer of
/// the empirical newsvendor cost, i.e. the `⌈t·ratio⌉`-th order statistic.
pub fn saa_quantile<S: Real>(values: &[S], ratio: S) -> Result<S> {
    if values.is_empty() {
        return Err(PaaError::InsufficientData("SAA on an empty sample".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(PaaError::NonFinite("SAA sample"));
    }
    let ones = vec![S::one(); values.len()];
    weighted_quantile(values, &ones, ratio).ok_or_else(|| PaaError::Internal("unit weights sum to zero".into()))
}
