//! Dense two-phase primal simplex.
//!
//! Problems are stated over bounded variables and converted to standard form
//! (`A y = b`, `y ≥ 0`, `b ≥ 0`). Pricing is Dantzig's rule; after a run of
//! degenerate pivots the solver switches to Bland's rule until the objective
//! moves again, which rules out cycling. Ratio-test ties go to the basic
//! variable with the smallest index, so the vertex returned is deterministic.

use crate::error::{PaaError, Result};
use crate::scalar::Real;

/// `min c·x` subject to `A_eq x = b_eq`, `A_ub x ≤ b_ub`, `lo ≤ x ≤ hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<S: Real = f64> {
    pub objective: Vec<S>,
    pub a_eq: Vec<Vec<S>>,
    pub b_eq: Vec<S>,
    pub a_ub: Vec<Vec<S>>,
    pub b_ub: Vec<S>,
    /// Per-variable `(lo, hi)`; either side may be infinite.
    pub bounds: Vec<(S, S)>,
    /// Secondary objective minimized over the optimal face, for a
    /// reproducible choice among alternate optima.
    pub tie_break: Option<Vec<S>>,
}

impl<S: Real> LinearProgram<S> {
    /// Nonnegative variables, no constraints yet.
    pub fn new(objective: Vec<S>) -> Self {
        let n = objective.len();
        Self {
            objective,
            a_eq: Vec::new(),
            b_eq: Vec::new(),
            a_ub: Vec::new(),
            b_ub: Vec::new(),
            bounds: vec![(S::zero(), S::infinity()); n],
            tie_break: None,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_eq(&mut self, row: Vec<S>, rhs: S) -> &mut Self {
        self.a_eq.push(row);
        self.b_eq.push(rhs);
        self
    }

    pub fn add_ub(&mut self, row: Vec<S>, rhs: S) -> &mut Self {
        self.a_ub.push(row);
        self.b_ub.push(rhs);
        self
    }

    pub fn set_bounds(&mut self, var: usize, lo: S, hi: S) -> &mut Self {
        self.bounds[var] = (lo, hi);
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if n == 0 {
            return Err(PaaError::InvalidArgument("linear program has no variables".into()));
        }
        if self.bounds.len() != n {
            return Err(PaaError::LengthMismatch { expected: n, got: self.bounds.len() });
        }
        if let Some(tb) = &self.tie_break {
            if tb.len() != n {
                return Err(PaaError::LengthMismatch { expected: n, got: tb.len() });
            }
        }
        if self.a_eq.len() != self.b_eq.len() {
            return Err(PaaError::LengthMismatch { expected: self.a_eq.len(), got: self.b_eq.len() });
        }
        if self.a_ub.len() != self.b_ub.len() {
            return Err(PaaError::LengthMismatch { expected: self.a_ub.len(), got: self.b_ub.len() });
        }
        for row in self.a_eq.iter().chain(&self.a_ub) {
            if row.len() != n {
                return Err(PaaError::LengthMismatch { expected: n, got: row.len() });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(PaaError::NonFinite("constraint matrix"));
            }
        }
        if self.b_eq.iter().chain(&self.b_ub).chain(&self.objective).any(|v| !v.is_finite()) {
            return Err(PaaError::NonFinite("objective or right-hand side"));
        }
        for (i, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == S::infinity() || hi == S::neg_infinity() {
                return Err(PaaError::InvalidArgument(format!("variable {i} has bounds ({lo}, {hi})")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<S: Real = f64> {
    /// Primal point; empty unless `status` is `Optimal`.
    pub x: Vec<S>,
    /// `c·x` when optimal, `-∞` when unbounded, NaN when infeasible.
    pub objective_value: S,
    pub status: LpStatus,
    pub pivots: usize,
}

#[derive(Debug, Clone, Copy)]
enum VarMap<S> {
    /// `x = lo + y`
    Shift { col: usize, lo: S },
    /// `x = hi − y`
    Reflect { col: usize, hi: S },
    /// `x = y⁺ − y⁻`
    Split { pos: usize, neg: usize },
}

impl<S: Real> VarMap<S> {
    /// Adds coefficient `a` on `x` to a row expressed in `y`, returning the
    /// constant moved to the right-hand side.
    fn scatter(&self, a: S, row: &mut [S]) -> S {
        match *self {
            VarMap::Shift { col, lo } => {
                row[col] = row[col] + a;
                a * lo
            }
            VarMap::Reflect { col, hi } => {
                row[col] = row[col] - a;
                a * hi
            }
            VarMap::Split { pos, neg } => {
                row[pos] = row[pos] + a;
                row[neg] = row[neg] - a;
                S::zero()
            }
        }
    }

    fn recover(&self, y: &[S]) -> S {
        match *self {
            VarMap::Shift { col, lo } => lo + y[col],
            VarMap::Reflect { col, hi } => hi - y[col],
            VarMap::Split { pos, neg } => y[pos] - y[neg],
        }
    }
}

struct Tableau<S: Real> {
    /// Constraint rows, each `ncols + 1` long with the rhs last.
    rows: Vec<Vec<S>>,
    basis: Vec<usize>,
    ncols: usize,
    /// Columns at or past this index are artificial.
    first_artificial: usize,
    pivots: usize,
}

enum Step {
    Optimal,
    Unbounded,
}

const DEGENERATE_STREAK: usize = 50;

impl<S: Real> Tableau<S> {
    fn rhs(&self, i: usize) -> S {
        self.rows[i][self.ncols]
    }

    fn pivot(&mut self, r: usize, c: usize, objectives: &mut [&mut Vec<S>]) {
        let width = self.ncols + 1;
        let inv = self.rows[r][c].recip();
        for v in self.rows[r].iter_mut() {
            *v = *v * inv;
        }
        self.rows[r][c] = S::one();
        let pivot_row = std::mem::take(&mut self.rows[r]);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[c];
            if factor != S::zero() {
                for j in 0..width {
                    let p = pivot_row[j];
                    if p != S::zero() {
                        row[j] = row[j] - factor * p;
                    }
                }
                row[c] = S::zero();
            }
        }
        for obj in objectives.iter_mut() {
            let factor = obj[c];
            if factor != S::zero() {
                for j in 0..width {
                    obj[j] = obj[j] - factor * pivot_row[j];
                }
                obj[c] = S::zero();
            }
        }
        self.rows[r] = pivot_row;
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Ratio test on column `c`: smallest `rhs / a` over positive `a`, ties to
    /// the smallest basic index.
    fn leaving_row(&self, c: usize) -> Option<usize> {
        let ptol = S::pivot_tol();
        let mut best: Option<(usize, S)> = None;
        for (i, row) in self.rows.iter().enumerate() {
            let a = row[c];
            if a > ptol {
                let ratio = self.rhs(i).max(S::zero()) / a;
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let tie = (ratio - br).abs() <= S::epsilon() * S::lit(64.0) * (S::one() + br.abs());
                        if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
        }
        best.map(|(i, _)| i)
    }

    /// Runs primal simplex on `obj` (reduced costs, last entry `−z`).
    /// `eligible` filters entering columns; `extra` rows are kept in sync.
    fn optimize(
        &mut self,
        obj: &mut Vec<S>,
        extra: &mut [&mut Vec<S>],
        eligible: &dyn Fn(usize, &[S]) -> bool,
        max_pivots: usize,
    ) -> Result<Step> {
        let dtol = S::feas_tol();
        let mut degenerate = 0usize;
        loop {
            if self.pivots > max_pivots {
                return Err(PaaError::NoConvergence(format!("simplex exceeded {max_pivots} pivots")));
            }
            let bland = degenerate >= DEGENERATE_STREAK;
            let mut entering: Option<usize> = None;
            let mut most_negative = -dtol;
            for j in 0..self.ncols {
                let r = obj[j];
                if r < -dtol && eligible(j, obj) {
                    if bland {
                        entering = Some(j);
                        break;
                    }
                    if r < most_negative {
                        most_negative = r;
                        entering = Some(j);
                    }
                }
            }
            let Some(c) = entering else { return Ok(Step::Optimal) };
            let Some(r) = self.leaving_row(c) else { return Ok(Step::Unbounded) };
            let step = self.rhs(r).max(S::zero()) / self.rows[r][c];
            if step <= S::epsilon() {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            let mut objectives: Vec<&mut Vec<S>> = Vec::with_capacity(1 + extra.len());
            objectives.push(obj);
            for e in extra.iter_mut() {
                objectives.push(e);
            }
            self.pivot(r, c, &mut objectives);
        }
    }

    /// Reduced-cost row for costs `c` over the current basis.
    fn price(&self, c: &[S]) -> Vec<S> {
        let mut obj: Vec<S> = c.to_vec();
        obj.push(S::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = c[b];
            if cb != S::zero() {
                for (o, &v) in obj.iter_mut().zip(&self.rows[i]) {
                    *o = *o - cb * v;
                }
            }
        }
        obj
    }
}

/// Solves `lp` exactly (up to floating point) by the two-phase simplex method.
pub fn solve_lp<S: Real>(lp: &LinearProgram<S>) -> Result<LpSolution<S>> {
    lp.validate()?;
    let n = lp.num_vars();

    // Variable transformation to nonnegative columns.
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0usize;
    let mut upper_rows: Vec<(usize, S)> = Vec::new();
    for &(lo, hi) in &lp.bounds {
        if lo.is_finite() {
            maps.push(VarMap::Shift { col: ncols, lo });
            if hi.is_finite() {
                upper_rows.push((ncols, hi - lo));
            }
            ncols += 1;
        } else if hi.is_finite() {
            maps.push(VarMap::Reflect { col: ncols, hi });
            ncols += 1;
        } else {
            maps.push(VarMap::Split { pos: ncols, neg: ncols + 1 });
            ncols += 2;
        }
    }
    let n_struct = ncols;
    let n_slack = lp.a_ub.len() + upper_rows.len();
    let n_rows = lp.a_eq.len() + n_slack;

    // Assemble rows over structural + slack columns.
    let mut rows: Vec<(Vec<S>, S)> = Vec::with_capacity(n_rows);
    for (a, &b) in lp.a_eq.iter().zip(&lp.b_eq) {
        let mut row = vec![S::zero(); n_struct + n_slack];
        let shift: S = a.iter().zip(&maps).map(|(&v, m)| if v != S::zero() { m.scatter(v, &mut row) } else { S::zero() }).sum();
        rows.push((row, b - shift));
    }
    let mut slack = n_struct;
    for (a, &b) in lp.a_ub.iter().zip(&lp.b_ub) {
        let mut row = vec![S::zero(); n_struct + n_slack];
        let shift: S = a.iter().zip(&maps).map(|(&v, m)| if v != S::zero() { m.scatter(v, &mut row) } else { S::zero() }).sum();
        row[slack] = S::one();
        slack += 1;
        rows.push((row, b - shift));
    }
    for &(col, width) in &upper_rows {
        let mut row = vec![S::zero(); n_struct + n_slack];
        row[col] = S::one();
        row[slack] = S::one();
        slack += 1;
        rows.push((row, width));
    }
    for (row, b) in rows.iter_mut() {
        if *b < S::zero() {
            row.iter_mut().for_each(|v| *v = -*v);
            *b = -*b;
        }
    }

    // Crash basis: a column that is +1-scalable and nonzero only in this row.
    let base_cols = n_struct + n_slack;
    let mut nonzeros = vec![0usize; base_cols];
    for (row, _) in &rows {
        for (j, v) in row.iter().enumerate() {
            if *v != S::zero() {
                nonzeros[j] += 1;
            }
        }
    }
    let mut basis = vec![usize::MAX; n_rows];
    let mut used = vec![false; base_cols];
    for (i, (row, _)) in rows.iter().enumerate() {
        // Prefer slacks, then structural singletons.
        let candidate = (n_struct..base_cols)
            .chain(0..n_struct)
            .find(|&j| !used[j] && nonzeros[j] == 1 && row[j] > S::zero());
        if let Some(j) = candidate {
            basis[i] = j;
            used[j] = true;
        }
    }
    let n_art = basis.iter().filter(|&&b| b == usize::MAX).count();
    let total = base_cols + n_art;
    let mut tab_rows = Vec::with_capacity(n_rows);
    let mut art = base_cols;
    for (i, (row, b)) in rows.into_iter().enumerate() {
        let mut full = row;
        full.resize(total + 1, S::zero());
        full[total] = b;
        if basis[i] == usize::MAX {
            full[art] = S::one();
            basis[i] = art;
            art += 1;
        } else {
            let scale = full[basis[i]].recip();
            full.iter_mut().for_each(|v| *v = *v * scale);
            full[basis[i]] = S::one();
        }
        tab_rows.push(full);
    }
    let mut tab = Tableau { rows: tab_rows, basis, ncols: total, first_artificial: base_cols, pivots: 0 };
    let max_pivots = 50 * (total + n_rows) + 1000;

    let mut cost = vec![S::zero(); total];
    for (m, &c) in maps.iter().zip(&lp.objective) {
        if c != S::zero() {
            m.scatter(c, &mut cost);
        }
    }
    let mut cost2 = lp.tie_break.as_ref().map(|tb| {
        let mut v = vec![S::zero(); total];
        for (m, &c) in maps.iter().zip(tb) {
            if c != S::zero() {
                m.scatter(c, &mut v);
            }
        }
        v
    });

    // Phase 1.
    if n_art > 0 {
        let mut c1 = vec![S::zero(); total];
        c1[base_cols..].iter_mut().for_each(|v| *v = S::one());
        let mut obj1 = tab.price(&c1);
        tab.optimize(&mut obj1, &mut [], &|_, _| true, max_pivots)?;
        let infeas = -obj1[total];
        let scale = tab.rows.iter().map(|r| r[total].abs()).fold(S::one(), S::max);
        if infeas > S::feas_tol() * scale {
            return Ok(LpSolution { x: Vec::new(), objective_value: S::nan(), status: LpStatus::Infeasible, pivots: tab.pivots });
        }
        // Drive remaining artificials out of the basis; drop redundant rows.
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= tab.first_artificial {
                let col = (0..tab.first_artificial)
                    .filter(|&j| tab.rows[i][j].abs() > S::pivot_tol())
                    .max_by(|&a, &b| tab.rows[i][a].abs().partial_cmp(&tab.rows[i][b].abs()).unwrap());
                match col {
                    Some(j) => tab.pivot(i, j, &mut []),
                    None => {
                        tab.rows.remove(i);
                        tab.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    // Phase 2.
    let first_art = tab.first_artificial;
    let mut obj = tab.price(&cost);
    let step = match cost2.as_mut() {
        Some(c2) => {
            let mut obj2 = tab.price(c2);
            let s = tab.optimize(&mut obj, &mut [&mut obj2], &|j, _| j < first_art, max_pivots)?;
            if matches!(s, Step::Optimal) {
                // Lexicographic pass: stay on the optimal face of the primary objective.
                let primary = obj.clone();
                let tol = S::feas_tol();
                let face = move |j: usize, _: &[S]| j < first_art && primary[j].abs() <= tol;
                let mut keep = [&mut obj];
                tab.optimize(&mut obj2, &mut keep, &face, max_pivots)?;
            }
            s
        }
        None => tab.optimize(&mut obj, &mut [], &|j, _| j < first_art, max_pivots)?,
    };
    if matches!(step, Step::Unbounded) {
        return Ok(LpSolution {
            x: Vec::new(),
            objective_value: S::neg_infinity(),
            status: LpStatus::Unbounded,
            pivots: tab.pivots,
        });
    }

    let mut y = vec![S::zero(); total];
    for (i, &b) in tab.basis.iter().enumerate() {
        y[b] = tab.rows[i][total].max(S::zero());
    }
    let x: Vec<S> = maps.iter().map(|m| m.recover(&y)).collect();
    let objective_value = x.iter().zip(&lp.objective).map(|(&a, &b)| a * b).sum();
    Ok(LpSolution { x, objective_value, status: LpStatus::Optimal, pivots: tab.pivots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn max_violation(lp: &LinearProgram<f64>, x: &[f64]) -> f64 {
        let dot = |a: &[f64]| a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>();
        let mut v: f64 = 0.0;
        for (a, b) in lp.a_eq.iter().zip(&lp.b_eq) {
            v = v.max((dot(a) - b).abs());
        }
        for (a, b) in lp.a_ub.iter().zip(&lp.b_ub) {
            v = v.max(dot(a) - b);
        }
        for (xi, (lo, hi)) in x.iter().zip(&lp.bounds) {
            v = v.max(lo - xi).max(xi - hi);
        }
        v
    }

    #[test]
    fn maximize_single_variable() {
        let mut lp = LinearProgram::<f64>::new(vec![-1.0]);
        lp.add_ub(vec![1.0], 1.0);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.x[0] - 1.0).abs() < 1e-12);
        assert!((s.objective_value + 1.0).abs() < 1e-12);
    }

    #[test]
    fn simplex_puts_mass_on_cheapest() {
        let c = vec![3.0, 1.5, 2.0, 7.0];
        let mut lp = LinearProgram::new(c);
        lp.add_eq(vec![1.0; 4], 1.0);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.x, vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_eq(vec![1.0], -1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);

        let mut lp = LinearProgram::new(vec![-1.0, 0.0]);
        lp.add_ub(vec![-1.0, 1.0], 1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_and_reflected_bounds() {
        // min |x − 2.5| + (−y) with x free, y ≤ 4 (no lower bound), y ≥ x − 10.
        let mut lp = LinearProgram::<f64>::new(vec![0.0, -1.0, 1.0]);
        lp.set_bounds(0, f64::NEG_INFINITY, f64::INFINITY);
        lp.set_bounds(1, f64::NEG_INFINITY, 4.0);
        lp.add_ub(vec![1.0, 0.0, -1.0], 2.5);
        lp.add_ub(vec![-1.0, 0.0, -1.0], -2.5);
        lp.add_ub(vec![1.0, -1.0, 0.0], 10.0);
        let s = solve_lp(&lp).unwrap();
        assert!((s.x[0] - 2.5).abs() < 1e-9);
        assert!((s.x[1] - 4.0).abs() < 1e-9);
        assert!((s.objective_value + 4.0).abs() < 1e-9);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::<f64>::new(vec![1.0, 2.0]);
        lp.add_eq(vec![1.0, 1.0], 2.0);
        lp.add_eq(vec![2.0, 2.0], 4.0);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && s.x[1].abs() < 1e-12);
    }

    #[test]
    fn tie_break_picks_smallest() {
        // min 0 over x ∈ [1, 3]: every point optimal, tie-break min x.
        let mut lp = LinearProgram::<f64>::new(vec![0.0]);
        lp.set_bounds(0, f64::NEG_INFINITY, f64::INFINITY);
        lp.add_ub(vec![1.0], 3.0);
        lp.add_ub(vec![-1.0], -1.0);
        lp.tie_break = Some(vec![1.0]);
        let s = solve_lp(&lp).unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-12);
    }

    /// Brute-force oracle: enumerate every vertex of a ≤-constrained box
    /// problem in up to three variables.
    fn vertex_oracle(c: &[f64], a: &[Vec<f64>], b: &[f64], hi: f64) -> Option<f64> {
        let n = c.len();
        let mut planes: Vec<(Vec<f64>, f64)> = a.iter().cloned().zip(b.iter().copied()).collect();
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = -1.0;
            planes.push((e.clone(), 0.0));
            e[i] = 1.0;
            planes.push((e, hi));
        }
        let feasible = |x: &[f64]| planes.iter().all(|(p, r)| p.iter().zip(x).map(|(u, v)| u * v).sum::<f64>() <= r + 1e-9);
        let mut best: Option<f64> = None;
        let k = planes.len();
        let mut idx = vec![0usize; n];
        fn solve(m: &mut [Vec<f64>], rhs: &mut [f64]) -> Option<Vec<f64>> {
            let n = rhs.len();
            for col in 0..n {
                let p = (col..n).max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())?;
                if m[p][col].abs() < 1e-12 {
                    return None;
                }
                m.swap(col, p);
                rhs.swap(col, p);
                for r in 0..n {
                    if r != col {
                        let f = m[r][col] / m[col][col];
                        for cc in 0..n {
                            m[r][cc] -= f * m[col][cc];
                        }
                        rhs[r] -= f * rhs[col];
                    }
                }
            }
            Some((0..n).map(|i| rhs[i] / m[i][i]).collect())
        }
        fn rec(start: usize, depth: usize, idx: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
            if depth == idx.len() {
                visit(idx);
                return;
            }
            for i in start..k {
                idx[depth] = i;
                rec(i + 1, depth + 1, idx, k, visit);
            }
        }
        rec(0, 0, &mut idx, k, &mut |sel: &[usize]| {
            let mut m: Vec<Vec<f64>> = sel.iter().map(|&i| planes[i].0.clone()).collect();
            let mut r: Vec<f64> = sel.iter().map(|&i| planes[i].1).collect();
            if let Some(x) = solve(&mut m, &mut r) {
                if feasible(&x) {
                    let v: f64 = c.iter().zip(&x).map(|(p, q)| p * q).sum();
                    best = Some(best.map_or(v, |bv: f64| bv.min(v)));
                }
            }
        });
        best
    }

    #[test]
    fn matches_vertex_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.gen_range(1..=3);
            let m = rng.gen_range(1..=4);
            let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let a: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let b: Vec<f64> = (0..m).map(|_| rng.gen_range(-0.5..2.0)).collect();
            let mut lp = LinearProgram::new(c.clone());
            for i in 0..n {
                lp.set_bounds(i, 0.0, 5.0);
            }
            for (row, &r) in a.iter().zip(&b) {
                lp.add_ub(row.clone(), r);
            }
            let s = solve_lp(&lp).unwrap();
            match vertex_oracle(&c, &a, &b, 5.0) {
                Some(best) => {
                    assert_eq!(s.status, LpStatus::Optimal);
                    assert!((s.objective_value - best).abs() < 1e-6, "{} vs {}", s.objective_value, best);
                    assert!(max_violation(&lp, &s.x) <= 1e-8);
                }
                None => assert_eq!(s.status, LpStatus::Infeasible),
            }
        }
    }

    #[test]
    fn f32_program() {
        let mut lp = LinearProgram::<f32>::new(vec![-1.0, -1.0]);
        lp.add_ub(vec![1.0, 2.0], 4.0);
        lp.add_ub(vec![3.0, 1.0], 6.0);
        let s = solve_lp(&lp).unwrap();
        assert!((s.objective_value + 2.8).abs() < 1e-4);
    }
}
