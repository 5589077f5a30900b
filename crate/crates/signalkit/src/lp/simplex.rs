//! Two-phase dense simplex with Bland's anti-cycling rule, generic over the
//! scalar type. In `f64` this is the workhorse behind every game value and
//! concavification LP; in `BigRational` it doubles as an exact solver for
//! small oracle problems.

use crate::scalar::LpScalar;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
}

/// A dense LP: optimize `objective · x` subject to `constraint_matrix · x
/// {≤,=,≥} rhs` and per-variable lower bounds (`None` means free).
#[derive(Debug, Clone)]
pub struct LinearProgram<S> {
    pub objective: Vec<S>,
    pub constraint_matrix: Vec<Vec<S>>,
    pub rhs: Vec<S>,
    pub row_senses: Vec<RowSense>,
    pub lower_bounds: Vec<Option<S>>,
    pub sense: Sense,
}

impl<S: LpScalar> LinearProgram<S> {
    /// All variables default to lower bound zero.
    pub fn new(sense: Sense, objective: Vec<S>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            constraint_matrix: Vec::new(),
            rhs: Vec::new(),
            row_senses: Vec::new(),
            lower_bounds: vec![Some(S::zero()); n],
            sense,
        }
    }

    pub fn add_row(&mut self, coeffs: Vec<S>, sense: RowSense, rhs: S) {
        self.constraint_matrix.push(coeffs);
        self.row_senses.push(sense);
        self.rhs.push(rhs);
    }

    pub fn free_variable(&mut self, j: usize) {
        self.lower_bounds[j] = None;
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.objective.len();
        let m = self.constraint_matrix.len();
        if self.rhs.len() != m || self.row_senses.len() != m {
            return Err(LpError::Dimension(format!(
                "{} rows but {} rhs entries and {} senses",
                m,
                self.rhs.len(),
                self.row_senses.len()
            )));
        }
        if self.lower_bounds.len() != n {
            return Err(LpError::Dimension(format!(
                "{} variables but {} lower bounds",
                n,
                self.lower_bounds.len()
            )));
        }
        for (i, row) in self.constraint_matrix.iter().enumerate() {
            if row.len() != n {
                return Err(LpError::Dimension(format!(
                    "row {} has {} coefficients, expected {}",
                    i,
                    row.len(),
                    n
                )));
            }
            if row.iter().any(|v| !v.to_f64_approx().is_finite()) {
                return Err(LpError::NonFinite("constraint matrix"));
            }
        }
        if self.objective.iter().any(|v| !v.to_f64_approx().is_finite()) {
            return Err(LpError::NonFinite("objective"));
        }
        if self.rhs.iter().any(|v| !v.to_f64_approx().is_finite()) {
            return Err(LpError::NonFinite("rhs"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Pivoting stalled past the iteration cap; never reported as optimal.
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct LpSolution<S> {
    pub status: LpStatus,
    pub primal: Vec<S>,
    /// Row duals in the caller's sign convention: `objective − dualᵀA` are
    /// the reduced costs, zero on variables strictly above their bound.
    pub dual: Vec<S>,
    pub value: S,
    /// Objective of the dual solution; equals `value` at an exact optimum.
    pub dual_value: S,
}

impl<S: LpScalar> LpSolution<S> {
    fn non_optimal(status: LpStatus) -> Self {
        LpSolution {
            status,
            primal: Vec::new(),
            dual: Vec::new(),
            value: S::zero(),
            dual_value: S::zero(),
        }
    }
}

pub fn solve_lp<S: LpScalar>(lp: &LinearProgram<S>) -> Result<LpSolution<S>, LpError> {
    lp.validate()?;
    Ok(Tableau::build(lp).solve(lp))
}

/// Column bookkeeping: where each original variable landed in the
/// standardized (all variables ≥ 0) problem.
enum VarMap {
    Shifted { col: usize },
    Split { pos: usize, neg: usize },
}

struct Tableau<S> {
    /// m rows of coefficients followed by the rhs column.
    rows: Vec<Vec<S>>,
    zrow: Vec<S>,
    zval: S,
    basis: Vec<usize>,
    art_start: usize,
    /// Original row index per tableau row (rows can be dropped as redundant).
    row_origin: Vec<usize>,
    row_negated: Vec<bool>,
    var_map: Vec<VarMap>,
    /// Phase-2 objective over standardized columns.
    obj: Vec<S>,
    obj_offset: S,
    m_orig: usize,
}

impl<S: LpScalar> Tableau<S> {
    fn build(lp: &LinearProgram<S>) -> Self {
        let n = lp.num_vars();
        let m = lp.constraint_matrix.len();

        let mut var_map = Vec::with_capacity(n);
        let mut n_cols = 0usize;
        for lb in &lp.lower_bounds {
            match lb {
                Some(_) => {
                    var_map.push(VarMap::Shifted { col: n_cols });
                    n_cols += 1;
                }
                None => {
                    var_map.push(VarMap::Split {
                        pos: n_cols,
                        neg: n_cols + 1,
                    });
                    n_cols += 2;
                }
            }
        }
        let n_slack = lp
            .row_senses
            .iter()
            .filter(|s| !matches!(s, RowSense::Eq))
            .count();
        let n_struct = n_cols + n_slack;
        let art_start = n_struct;
        let width = n_struct + m + 1; // + artificials + rhs

        // Internally we always maximize.
        let negate_obj = matches!(lp.sense, Sense::Minimize);
        let mut obj = vec![S::zero(); n_struct];
        let mut obj_offset = S::zero();
        for (j, c) in lp.objective.iter().enumerate() {
            let c = if negate_obj { -c.clone() } else { c.clone() };
            match &var_map[j] {
                VarMap::Shifted { col } => {
                    obj[*col] = c.clone();
                    if let Some(l) = &lp.lower_bounds[j] {
                        obj_offset = obj_offset + c * l.clone();
                    }
                }
                VarMap::Split { pos, neg } => {
                    obj[*pos] = c.clone();
                    obj[*neg] = -c;
                }
            }
        }

        let mut rows = Vec::with_capacity(m);
        let mut row_negated = vec![false; m];
        let mut slack_cursor = n_cols;
        for i in 0..m {
            let mut row = vec![S::zero(); width];
            let mut rhs = lp.rhs[i].clone();
            for (j, a) in lp.constraint_matrix[i].iter().enumerate() {
                match &var_map[j] {
                    VarMap::Shifted { col } => {
                        row[*col] = row[*col].clone() + a.clone();
                        if let Some(l) = &lp.lower_bounds[j] {
                            rhs = rhs - a.clone() * l.clone();
                        }
                    }
                    VarMap::Split { pos, neg } => {
                        row[*pos] = row[*pos].clone() + a.clone();
                        row[*neg] = row[*neg].clone() - a.clone();
                    }
                }
            }
            match lp.row_senses[i] {
                RowSense::Le => {
                    row[slack_cursor] = S::one();
                    slack_cursor += 1;
                }
                RowSense::Ge => {
                    row[slack_cursor] = -S::one();
                    slack_cursor += 1;
                }
                RowSense::Eq => {}
            }
            if rhs < S::zero() {
                for v in row.iter_mut() {
                    *v = -v.clone();
                }
                rhs = -rhs;
                row_negated[i] = true;
            }
            row[art_start + i] = S::one();
            row[width - 1] = rhs;
            rows.push(row);
        }

        Tableau {
            rows,
            zrow: vec![S::zero(); width],
            zval: S::zero(),
            basis: (0..m).map(|i| art_start + i).collect(),
            art_start,
            row_origin: (0..m).collect(),
            row_negated,
            var_map,
            obj,
            obj_offset,
            m_orig: m,
        }
    }

    fn width(&self) -> usize {
        self.zrow.len()
    }

    /// Recompute the objective row `c − c_B B⁻¹ A` for the given costs
    /// (costs indexed over all columns, artificials implicitly zero).
    fn reset_objective(&mut self, costs: &[S]) {
        let width = self.width();
        let mut zrow = vec![S::zero(); width];
        for (j, zj) in zrow.iter_mut().enumerate().take(costs.len()) {
            *zj = costs[j].clone();
        }
        let mut zval = S::zero();
        let basis = self.basis.clone();
        for (i, &bj) in basis.iter().enumerate() {
            let cb = if bj < costs.len() {
                costs[bj].clone()
            } else {
                S::zero()
            };
            if cb == S::zero() {
                continue;
            }
            for j in 0..width - 1 {
                zrow[j] = zrow[j].clone() - cb.clone() * self.rows[i][j].clone();
            }
            zval = zval + cb * self.rows[i][width - 1].clone();
        }
        self.zrow = zrow;
        self.zval = zval;
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let width = self.width();
        let piv = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.clone() / piv.clone();
        }
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let factor = self.rows[i][c].clone();
            if factor == S::zero() {
                continue;
            }
            for j in 0..width {
                let delta = factor.clone() * self.rows[r][j].clone();
                self.rows[i][j] = self.rows[i][j].clone() - delta;
            }
        }
        let factor = self.zrow[c].clone();
        if factor != S::zero() {
            for j in 0..width - 1 {
                let delta = factor.clone() * self.rows[r][j].clone();
                self.zrow[j] = self.zrow[j].clone() - delta;
            }
            self.zval = self.zval.clone() + factor * self.rows[r][width - 1].clone();
        }
        self.basis[r] = c;
    }

    /// Dantzig's rule with the leaving row chosen, among minimum ratios, for
    /// the largest pivot element — small pivots are what corrupt a dense
    /// tableau. A long streak of degenerate pivots switches to Bland's rule
    /// (lowest improving index, lowest basis index on ties), whose
    /// termination guarantee rules out cycling.
    fn run(&mut self, allow_artificial: bool, cap: usize) -> Result<(), LpStatus> {
        let tol = S::pivot_tol();
        let width = self.width();
        let col_limit = if allow_artificial {
            width - 1
        } else {
            self.art_start
        };
        let bland_after = 50 + 2 * self.rows.len();
        let mut stalled = 0usize;
        for _ in 0..cap {
            let bland = stalled >= bland_after;
            let mut entering: Option<usize> = None;
            for j in 0..col_limit {
                if self.zrow[j] > tol {
                    match entering {
                        Some(e) if !bland && self.zrow[j] > self.zrow[e] => {
                            entering = Some(j);
                        }
                        None => {
                            entering = Some(j);
                            if bland {
                                break;
                            }
                        }
                        _ => {}
                    }
                }
            }
            let c = match entering {
                Some(c) => c,
                None => return Ok(()),
            };
            let mut min_ratio: Option<S> = None;
            for i in 0..self.rows.len() {
                if self.rows[i][c] > tol {
                    let ratio = self.rows[i][width - 1].clone() / self.rows[i][c].clone();
                    if min_ratio.as_ref().is_none_or(|mr| ratio < *mr) {
                        min_ratio = Some(ratio);
                    }
                }
            }
            let min_ratio = match min_ratio {
                Some(m) => m,
                None => return Err(LpStatus::Unbounded),
            };
            let tie_cut = min_ratio.clone() + tol.clone() * (S::one() + min_ratio.abs());
            let mut leave: Option<usize> = None;
            for i in 0..self.rows.len() {
                if self.rows[i][c] > tol {
                    let ratio = self.rows[i][width - 1].clone() / self.rows[i][c].clone();
                    if ratio > tie_cut {
                        continue;
                    }
                    match leave {
                        None => leave = Some(i),
                        Some(l) => {
                            let better = if bland {
                                self.basis[i] < self.basis[l]
                            } else {
                                self.rows[i][c] > self.rows[l][c]
                            };
                            if better {
                                leave = Some(i);
                            }
                        }
                    }
                }
            }
            let r = leave.expect("min ratio row exists");
            if min_ratio > tol {
                stalled = 0;
            } else {
                stalled += 1;
            }
            self.pivot(r, c);
        }
        Err(LpStatus::NumericalFailure)
    }

    fn solve(mut self, lp: &LinearProgram<S>) -> LpSolution<S> {
        let cap = 10_000 + 200 * (self.rows.len() + self.width());

        // Phase 1: maximize −Σ artificials.
        let mut phase1_costs = vec![S::zero(); self.width() - 1];
        for j in self.art_start..self.width() - 1 {
            phase1_costs[j] = -S::one();
        }
        self.reset_objective(&phase1_costs);
        if let Err(status) = self.run(false, cap) {
            // Phase 1 is bounded below by construction, so only a stall.
            return LpSolution::non_optimal(status);
        }
        let feas_slack = -self.zval.clone();
        let infeas_tol = S::pivot_tol() * S::from_f64_approx(100.0);
        if feas_slack > infeas_tol {
            return LpSolution::non_optimal(LpStatus::Infeasible);
        }

        // Drive remaining basic artificials out, dropping redundant rows.
        let tol = S::pivot_tol();
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] >= self.art_start {
                let mut pivot_col = None;
                for j in 0..self.art_start {
                    if self.rows[r][j].clone().abs() > tol {
                        pivot_col = Some(j);
                        break;
                    }
                }
                match pivot_col {
                    Some(c) => {
                        self.pivot(r, c);
                        r += 1;
                    }
                    None => {
                        self.rows.remove(r);
                        self.basis.remove(r);
                        self.row_origin.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }

        // Phase 2.
        let obj = self.obj.clone();
        self.reset_objective(&obj);
        match self.run(false, cap) {
            Ok(()) => {}
            Err(status) => return LpSolution::non_optimal(status),
        }
        self.extract(lp)
    }

    fn extract(&self, lp: &LinearProgram<S>) -> LpSolution<S> {
        let width = self.width();
        let mut std_x = vec![S::zero(); self.art_start];
        for (i, &bj) in self.basis.iter().enumerate() {
            if bj < self.art_start {
                std_x[bj] = self.rows[i][width - 1].clone();
            }
        }
        let negate = matches!(lp.sense, Sense::Minimize);

        let mut primal = Vec::with_capacity(lp.num_vars());
        for (j, vm) in self.var_map.iter().enumerate() {
            let v = match vm {
                VarMap::Shifted { col } => {
                    let l = lp.lower_bounds[j].clone().expect("shifted var has bound");
                    l + std_x[*col].clone()
                }
                VarMap::Split { pos, neg } => std_x[*pos].clone() - std_x[*neg].clone(),
            };
            primal.push(v);
        }
        let value: S = lp
            .objective
            .iter()
            .zip(primal.iter())
            .fold(S::zero(), |acc, (c, x)| acc + c.clone() * x.clone());

        // Duals: reduced cost of artificial column i is −y_i.
        let mut dual = vec![S::zero(); self.m_orig];
        for &orig in &self.row_origin {
            let mut y = -self.zrow[self.art_start + orig].clone();
            if self.row_negated[orig] {
                y = -y;
            }
            if negate {
                y = -y;
            }
            dual[orig] = y;
        }
        // z* = c_B B⁻¹ b = yᵀ b(standardized); map back through offset/sign.
        let std_opt = self.zval.clone() + self.obj_offset.clone();
        let dual_value = if negate { -std_opt } else { std_opt };

        LpSolution {
            status: LpStatus::Optimal,
            primal,
            dual,
            value,
            dual_value,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn single_bound() {
        let mut lp = LinearProgram::<f64>::new(Sense::Maximize, vec![1.0]);
        lp.add_row(vec![1.0], RowSense::Le, 3.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.value - 3.0).abs() < 1e-12);
        assert!((sol.primal[0] - 3.0).abs() < 1e-12);
        assert!((sol.dual_value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_sign_conflict() {
        let mut lp = LinearProgram::<f64>::new(Sense::Maximize, vec![1.0]);
        lp.add_row(vec![1.0], RowSense::Le, -1.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_ray() {
        let mut lp = LinearProgram::<f64>::new(Sense::Maximize, vec![1.0, 0.0]);
        lp.add_row(vec![0.0, 1.0], RowSense::Le, 1.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn minimize_with_free_variable_and_equalities() {
        // min x + 2y  s.t.  x + y = 4,  x − y ≥ 0,  x ≥ 0, y free.
        // Optimum at y as small as allowed: x − y ≥ 0 and x + y = 4 give
        // y ≤ 2; pushing y down to… y has cost 2 > cost of x, so y → −∞?
        // No: x = 4 − y, objective = 4 − y + 2y = 4 + y, so minimize y.
        // y unbounded below with x = 4 − y ≥ 0 and x − y = 4 − 2y ≥ 0: both
        // hold for all y ≤ 2, so the LP is unbounded below.
        let mut lp = LinearProgram::<f64>::new(Sense::Minimize, vec![1.0, 2.0]);
        lp.free_variable(1);
        lp.add_row(vec![1.0, 1.0], RowSense::Eq, 4.0);
        lp.add_row(vec![1.0, -1.0], RowSense::Ge, 0.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);

        // Adding y ≥ −1 pins the optimum at y = −1, x = 5, value 3.
        let mut lp2 = lp.clone();
        lp2.add_row(vec![0.0, 1.0], RowSense::Ge, -1.0);
        let sol2 = solve_lp(&lp2).unwrap();
        assert_eq!(sol2.status, LpStatus::Optimal);
        assert!((sol2.value - 3.0).abs() < 1e-9, "value {}", sol2.value);
        assert!((sol2.primal[0] - 5.0).abs() < 1e-9);
        assert!((sol2.primal[1] + 1.0).abs() < 1e-9);
        assert!((sol2.value - sol2.dual_value).abs() < 1e-9);
    }

    #[test]
    fn redundant_equality_rows_are_dropped() {
        let mut lp = LinearProgram::<f64>::new(Sense::Maximize, vec![1.0, 1.0]);
        lp.add_row(vec![1.0, 1.0], RowSense::Eq, 2.0);
        lp.add_row(vec![2.0, 2.0], RowSense::Eq, 4.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exact_rational_solution() {
        // max x + y  s.t.  2x + y ≤ 3, x + 3y ≤ 4  → x = 1, y = 1 exactly.
        let mut lp =
            LinearProgram::<BigRational>::new(Sense::Maximize, vec![rat(1, 1), rat(1, 1)]);
        lp.add_row(vec![rat(2, 1), rat(1, 1)], RowSense::Le, rat(3, 1));
        lp.add_row(vec![rat(1, 1), rat(3, 1)], RowSense::Le, rat(4, 1));
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.value, rat(2, 1));
        assert_eq!(sol.primal, vec![rat(1, 1), rat(1, 1)]);
        assert_eq!(sol.dual_value, rat(2, 1));
    }

    #[test]
    fn dimension_errors() {
        let mut lp = LinearProgram::<f64>::new(Sense::Maximize, vec![1.0, 1.0]);
        lp.add_row(vec![1.0], RowSense::Le, 1.0);
        assert!(matches!(solve_lp(&lp), Err(LpError::Dimension(_))));

        let mut lp2 = LinearProgram::<f64>::new(Sense::Maximize, vec![f64::NAN]);
        lp2.add_row(vec![1.0], RowSense::Le, 1.0);
        assert!(matches!(solve_lp(&lp2), Err(LpError::NonFinite(_))));
    }

    /// Solve a 3×3 linear system by Gaussian elimination; None if singular.
    fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
        let mut m = [[0.0f64; 4]; 3];
        for i in 0..3 {
            m[i][..3].copy_from_slice(&a[i]);
            m[i][3] = b[i];
        }
        for col in 0..3 {
            let piv = (col..3).max_by(|&i, &j| {
                m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap()
            })?;
            if m[piv][col].abs() < 1e-10 {
                return None;
            }
            m.swap(col, piv);
            for i in 0..3 {
                if i != col {
                    let f = m[i][col] / m[col][col];
                    for j in col..4 {
                        m[i][j] -= f * m[col][j];
                    }
                }
            }
        }
        Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
    }

    /// Brute-force optimum of max cᵀx over {Ax ≤ b} by enumerating all
    /// vertices (triples of tight constraints).
    fn vertex_enumeration_opt(c: &[f64; 3], rows: &[[f64; 3]], offs: &[f64]) -> Option<f64> {
        let m = rows.len();
        let mut best: Option<f64> = None;
        for i in 0..m {
            for j in i + 1..m {
                for k in j + 1..m {
                    let a = [rows[i], rows[j], rows[k]];
                    let b = [offs[i], offs[j], offs[k]];
                    if let Some(x) = solve3(a, b) {
                        let feasible = rows.iter().zip(offs).all(|(r, &o)| {
                            r.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() <= o + 1e-7
                        });
                        if feasible {
                            let v = c.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
                            best = Some(best.map_or(v, |bv: f64| bv.max(v)));
                        }
                    }
                }
            }
        }
        best
    }

    #[test]
    fn matches_vertex_enumeration_on_random_lps() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..50 {
            let c: [f64; 3] = [
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            ];
            // Random halfspaces plus the box [0,3]^3; origin always feasible.
            let mut rows: Vec<[f64; 3]> = Vec::new();
            let mut offs: Vec<f64> = Vec::new();
            for _ in 0..5 {
                let r = [
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ];
                rows.push(r);
                offs.push(rng.gen_range(0.1..2.0));
            }
            for j in 0..3 {
                let mut r = [0.0; 3];
                r[j] = 1.0;
                rows.push(r);
                offs.push(3.0);
                r[j] = -1.0;
                rows.push(r);
                offs.push(0.0);
            }

            let mut lp = LinearProgram::<f64>::new(Sense::Maximize, c.to_vec());
            for j in 0..3 {
                lp.free_variable(j);
            }
            for (r, &o) in rows.iter().zip(&offs) {
                lp.add_row(r.to_vec(), RowSense::Le, o);
            }
            let sol = solve_lp(&lp).unwrap();
            assert_eq!(sol.status, LpStatus::Optimal, "trial {trial}");
            let brute = vertex_enumeration_opt(&c, &rows, &offs).unwrap();
            assert!(
                (sol.value - brute).abs() <= 1e-7,
                "trial {trial}: simplex {} vs vertices {}",
                sol.value,
                brute
            );
            assert!(
                (sol.value - sol.dual_value).abs() <= 1e-7,
                "trial {trial}: duality gap {}",
                (sol.value - sol.dual_value).abs()
            );
            // For ≤ rows in a max problem the duals are nonnegative and the
            // reduced costs of free variables vanish.
            for (i, y) in sol.dual.iter().enumerate() {
                assert!(*y >= -1e-9, "trial {trial}: dual[{i}] = {y}");
            }
            for j in 0..3 {
                let ay: f64 = rows
                    .iter()
                    .zip(&sol.dual)
                    .map(|(r, y)| r[j] * y)
                    .sum();
                assert!(
                    (c[j] - ay).abs() <= 1e-7,
                    "trial {trial}: reduced cost {} on free var {j}",
                    c[j] - ay
                );
            }
        }
    }
}
