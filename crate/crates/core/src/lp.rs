//! Exact two-phase primal simplex over rationals.
//!
//! Problems have the form `min c·x` subject to linear rows (`≤`, `≥`, `=`),
//! `x ≥ 0` and optional finite upper bounds. Bland's rule picks both the
//! entering column (lowest index with negative reduced cost) and the leaving
//! row (lowest basic index among ratio ties), so every solve is
//! deterministic and terminates. The returned point is a basic feasible
//! solution together with exact duals.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::rational::Rational;

pub const DEFAULT_PIVOT_LIMIT: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

impl RowSense {
    fn flipped(self) -> Self {
        match self {
            RowSense::Le => RowSense::Ge,
            RowSense::Ge => RowSense::Le,
            RowSense::Eq => RowSense::Eq,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            RowSense::Le => "<=",
            RowSense::Ge => ">=",
            RowSense::Eq => "=",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpRow {
    pub coeffs: Vec<(usize, Rational)>,
    pub sense: RowSense,
    pub rhs: Rational,
}

impl LpRow {
    pub fn activity(&self, x: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .fold(Rational::zero(), |acc, (j, a)| acc + a * &x[*j])
    }
}

/// `min objective·x` s.t. `rows`, `0 ≤ x_j ≤ upper_j`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct LinearProgram {
    pub objective: Vec<Rational>,
    pub rows: Vec<LpRow>,
    pub upper: Vec<Option<Rational>>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        Self {
            objective: vec![Rational::zero(); num_vars],
            rows: Vec::new(),
            upper: vec![None; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, Rational)>, sense: RowSense, rhs: Rational) {
        self.rows.push(LpRow { coeffs, sense, rhs });
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// What occupies a basis position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BasicVar {
    Structural(usize),
    /// Slack or surplus of a model row.
    RowSlack(usize),
    /// Slack of the upper bound of a structural variable.
    BoundSlack(usize),
    /// Artificial left at zero on a redundant equality.
    Artificial(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<Rational>,
    pub objective: Rational,
    /// One multiplier per model row: `≥ 0` on `≥` rows, `≤ 0` on `≤` rows.
    pub row_duals: Vec<Rational>,
    /// One multiplier per variable for its upper bound (`≤ 0`, zero when
    /// the variable has no bound or the bound is implied by a row).
    pub bound_duals: Vec<Rational>,
    pub basis: Vec<BasicVar>,
    pub pivots: usize,
}

impl LpSolution {
    fn non_optimal(status: LpStatus, pivots: usize) -> Self {
        Self {
            status,
            x: Vec::new(),
            objective: Rational::zero(),
            row_duals: Vec::new(),
            bound_duals: Vec::new(),
            basis: Vec::new(),
            pivots,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LpError {
    #[error("pivot limit of {0} reached; the solver did not terminate")]
    PivotLimit(usize),
    #[error("solution is not optimal (status {0:?})")]
    NotOptimal(LpStatus),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum RowOrigin {
    Model(usize),
    Bound(usize),
}

/// Internal equality system `T x = rhs` after adding slacks and artificials.
struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    /// Column that formed the identity for each row at start.
    unit_col: Vec<usize>,
    num_cols: usize,
    first_artificial: usize,
    pivots: usize,
    limit: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize, cost_row: &mut [Rational], obj: &mut Rational) {
        let p = self.rows[r][c].clone();
        if !p.is_one() {
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v /= &p;
                }
            }
            self.rhs[r] /= &p;
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let pivot_rhs = self.rhs[r].clone();
        let nz: Vec<usize> = (0..self.num_cols)
            .filter(|&k| !pivot_row[k].is_zero())
            .collect();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for &k in &nz {
                row[k] -= &f * &pivot_row[k];
            }
            self.rhs[i] -= &f * &pivot_rhs;
        }
        if !cost_row[c].is_zero() {
            let f = cost_row[c].clone();
            for &k in &nz {
                cost_row[k] -= &f * &pivot_row[k];
            }
            *obj += &f * &pivot_rhs;
        }
        self.rows[r] = pivot_row;
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Reduced costs and current objective for cost vector `c`.
    fn price(&self, c: &[Rational]) -> (Vec<Rational>, Rational) {
        let mut d = c.to_vec();
        let mut obj = Rational::zero();
        for (i, &b) in self.basis.iter().enumerate() {
            if c[b].is_zero() {
                continue;
            }
            for (k, v) in self.rows[i].iter().enumerate() {
                if !v.is_zero() {
                    d[k] -= &c[b] * v;
                }
            }
            obj += &c[b] * &self.rhs[i];
        }
        (d, obj)
    }

    /// Runs Bland-rule iterations until optimal or unbounded.
    fn optimize(
        &mut self,
        cost_row: &mut [Rational],
        obj: &mut Rational,
        allow_artificial: bool,
    ) -> Result<bool, LpError> {
        loop {
            let limit = if allow_artificial {
                self.num_cols
            } else {
                self.first_artificial
            };
            let entering = (0..limit).find(|&k| cost_row[k].is_negative());
            let Some(c) = entering else {
                return Ok(true);
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &leave {
                    None => true,
                    Some((li, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, _)) = leave else {
                return Ok(false);
            };
            if self.pivots >= self.limit {
                return Err(LpError::PivotLimit(self.limit));
            }
            self.pivot(r, c, cost_row, obj);
        }
    }
}

/// Upper bounds that a nonnegative `≤`/`=` row already enforces.
fn implied_bound(lp: &LinearProgram, j: usize, u: &Rational) -> bool {
    lp.rows.iter().any(|row| {
        row.sense != RowSense::Ge
            && row.coeffs.iter().all(|(_, a)| !a.is_negative())
            && row
                .coeffs
                .iter()
                .any(|(k, a)| *k == j && a.is_positive() && &(&row.rhs / a) <= u)
    })
}

pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    solve_with_limit(lp, DEFAULT_PIVOT_LIMIT)
}

pub fn solve_with_limit(lp: &LinearProgram, limit: usize) -> Result<LpSolution, LpError> {
    let n = lp.num_vars();

    // Collect rows: model rows then explicit bound rows, normalized to rhs ≥ 0.
    let mut origins = Vec::new();
    let mut dense: Vec<Vec<Rational>> = Vec::new();
    let mut senses = Vec::new();
    let mut rhs = Vec::new();
    let mut flips = Vec::new();
    let mut push = |origin: RowOrigin, coeffs: Vec<Rational>, sense: RowSense, b: Rational| {
        let flip = b.is_negative();
        if flip {
            dense.push(coeffs.into_iter().map(|v| -v).collect());
            senses.push(sense.flipped());
            rhs.push(-b);
        } else {
            dense.push(coeffs);
            senses.push(sense);
            rhs.push(b);
        }
        flips.push(flip);
        origins.push(origin);
    };
    for (i, row) in lp.rows.iter().enumerate() {
        let mut coeffs = vec![Rational::zero(); n];
        for (j, a) in &row.coeffs {
            coeffs[*j] += a;
        }
        push(RowOrigin::Model(i), coeffs, row.sense, row.rhs.clone());
    }
    for (j, u) in lp.upper.iter().enumerate() {
        let Some(u) = u else { continue };
        if implied_bound(lp, j, u) {
            continue;
        }
        let mut coeffs = vec![Rational::zero(); n];
        coeffs[j] = Rational::one();
        push(RowOrigin::Bound(j), coeffs, RowSense::Le, u.clone());
    }

    let m = dense.len();
    let num_slack = senses.iter().filter(|s| **s != RowSense::Eq).count();
    let num_art = senses.iter().filter(|s| **s != RowSense::Le).count();
    let num_cols = n + num_slack + num_art;
    let first_artificial = n + num_slack;

    let mut rows = Vec::with_capacity(m);
    let mut unit_col = Vec::with_capacity(m);
    let mut slack_of_row = vec![None; m];
    let mut next_slack = n;
    let mut next_art = first_artificial;
    for (i, mut coeffs) in dense.into_iter().enumerate() {
        coeffs.resize(num_cols, Rational::zero());
        match senses[i] {
            RowSense::Le => {
                coeffs[next_slack] = Rational::one();
                unit_col.push(next_slack);
                slack_of_row[i] = Some(next_slack);
                next_slack += 1;
            }
            RowSense::Ge => {
                coeffs[next_slack] = -Rational::one();
                slack_of_row[i] = Some(next_slack);
                next_slack += 1;
                coeffs[next_art] = Rational::one();
                unit_col.push(next_art);
                next_art += 1;
            }
            RowSense::Eq => {
                coeffs[next_art] = Rational::one();
                unit_col.push(next_art);
                next_art += 1;
            }
        }
        rows.push(coeffs);
    }

    let mut tab = Tableau {
        rows,
        rhs,
        basis: unit_col.clone(),
        unit_col,
        num_cols,
        first_artificial,
        pivots: 0,
        limit,
    };

    // Phase 1: minimize the sum of artificials.
    if num_art > 0 {
        let mut c1 = vec![Rational::zero(); num_cols];
        for v in c1.iter_mut().skip(first_artificial) {
            *v = Rational::one();
        }
        let (mut d, mut obj) = tab.price(&c1);
        tab.optimize(&mut d, &mut obj, true)?;
        if obj.is_positive() {
            return Ok(LpSolution::non_optimal(LpStatus::Infeasible, tab.pivots));
        }
        // Drive zero-level artificials out of the basis where possible.
        for r in 0..m {
            if tab.basis[r] < first_artificial {
                continue;
            }
            if let Some(c) = (0..first_artificial).find(|&k| !tab.rows[r][k].is_zero()) {
                let mut dummy = vec![Rational::zero(); num_cols];
                let mut dummy_obj = Rational::zero();
                tab.pivot(r, c, &mut dummy, &mut dummy_obj);
            }
        }
    }

    // Phase 2.
    let mut c2 = vec![Rational::zero(); num_cols];
    c2[..n].clone_from_slice(&lp.objective);
    let (mut d, mut obj) = tab.price(&c2);
    if !tab.optimize(&mut d, &mut obj, false)? {
        return Ok(LpSolution::non_optimal(LpStatus::Unbounded, tab.pivots));
    }

    let mut x = vec![Rational::zero(); n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.rhs[i].clone();
        }
    }
    // y = c_B B^{-1}; column `unit_col[i]` of the tableau is B^{-1} e_i.
    let mut row_duals = vec![Rational::zero(); lp.rows.len()];
    let mut bound_duals = vec![Rational::zero(); n];
    for i in 0..m {
        let col = tab.unit_col[i];
        let mut y = Rational::zero();
        for (k, &b) in tab.basis.iter().enumerate() {
            if !c2[b].is_zero() && !tab.rows[k][col].is_zero() {
                y += &c2[b] * &tab.rows[k][col];
            }
        }
        if flips[i] {
            y = -y;
        }
        match origins[i] {
            RowOrigin::Model(r) => row_duals[r] = y,
            RowOrigin::Bound(j) => bound_duals[j] = y,
        }
    }
    let col_owner = |col: usize| -> BasicVar {
        if col < n {
            return BasicVar::Structural(col);
        }
        if col < first_artificial {
            let row = slack_of_row.iter().position(|s| *s == Some(col)).unwrap();
            return match origins[row] {
                RowOrigin::Model(r) => BasicVar::RowSlack(r),
                RowOrigin::Bound(j) => BasicVar::BoundSlack(j),
            };
        }
        let row = tab.unit_col.iter().position(|&u| u == col).unwrap();
        match origins[row] {
            RowOrigin::Model(r) => BasicVar::Artificial(r),
            RowOrigin::Bound(j) => BasicVar::BoundSlack(j),
        }
    };
    let basis = tab.basis.iter().map(|&c| col_owner(c)).collect();
    let objective = lp
        .objective
        .iter()
        .zip(&x)
        .fold(Rational::zero(), |acc, (c, v)| acc + c * v);
    debug_assert_eq!(objective, obj);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        objective,
        row_duals,
        bound_duals,
        basis,
        pivots: tab.pivots,
    })
}

/// Result of checking a solution for integrality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Integrality {
    pub integral: bool,
    /// First variable with a denominator other than 1.
    pub first_fractional: Option<usize>,
}

pub fn assert_integral(sol: &LpSolution) -> Result<Integrality, LpError> {
    if !sol.is_optimal() {
        return Err(LpError::NotOptimal(sol.status));
    }
    let first_fractional = sol.x.iter().position(|v| !v.is_integer());
    Ok(Integrality {
        integral: first_fractional.is_none(),
        first_fractional,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum DualityViolation {
    NotOptimal,
    PrimalRow(usize),
    PrimalBound(usize),
    DualSign(usize),
    BoundDualSign(usize),
    ReducedCost(usize),
    StrongDuality { primal: Rational, dual: Rational },
    SlacknessRow(usize),
    SlacknessBound(usize),
    SlacknessColumn(usize),
}

impl fmt::Display for DualityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Verifies primal and dual feasibility, strong duality and complementary
/// slackness exactly.
pub fn check_optimality(lp: &LinearProgram, sol: &LpSolution) -> Result<(), DualityViolation> {
    if !sol.is_optimal() {
        return Err(DualityViolation::NotOptimal);
    }
    let n = lp.num_vars();
    let x = &sol.x;
    for (j, v) in x.iter().enumerate() {
        if v.is_negative() {
            return Err(DualityViolation::PrimalBound(j));
        }
        if let Some(u) = &lp.upper[j] {
            if v > u {
                return Err(DualityViolation::PrimalBound(j));
            }
        }
    }
    let mut reduced = lp.objective.clone();
    let mut dual_obj = Rational::zero();
    for (i, row) in lp.rows.iter().enumerate() {
        let act = row.activity(x);
        let y = &sol.row_duals[i];
        let ok = match row.sense {
            RowSense::Le => act <= row.rhs,
            RowSense::Ge => act >= row.rhs,
            RowSense::Eq => act == row.rhs,
        };
        if !ok {
            return Err(DualityViolation::PrimalRow(i));
        }
        let sign_ok = match row.sense {
            RowSense::Le => !y.is_positive(),
            RowSense::Ge => !y.is_negative(),
            RowSense::Eq => true,
        };
        if !sign_ok {
            return Err(DualityViolation::DualSign(i));
        }
        if !y.is_zero() && act != row.rhs {
            return Err(DualityViolation::SlacknessRow(i));
        }
        for (j, a) in &row.coeffs {
            reduced[*j] -= a * y;
        }
        dual_obj += y * &row.rhs;
    }
    for j in 0..n {
        let v = &sol.bound_duals[j];
        if v.is_zero() {
            continue;
        }
        let Some(u) = &lp.upper[j] else {
            return Err(DualityViolation::BoundDualSign(j));
        };
        if v.is_positive() {
            return Err(DualityViolation::BoundDualSign(j));
        }
        if &x[j] != u {
            return Err(DualityViolation::SlacknessBound(j));
        }
        reduced[j] -= v;
        dual_obj += v * u;
    }
    for j in 0..n {
        if reduced[j].is_negative() {
            return Err(DualityViolation::ReducedCost(j));
        }
        if !reduced[j].is_zero() && !x[j].is_zero() {
            return Err(DualityViolation::SlacknessColumn(j));
        }
    }
    if dual_obj != sol.objective {
        return Err(DualityViolation::StrongDuality {
            primal: sol.objective.clone(),
            dual: dual_obj,
        });
    }
    Ok(())
}

/// Re-solves the basis system `B x_B = b` from scratch and compares it with
/// the reported primal point.
pub fn basis_reproduces_point(lp: &LinearProgram, sol: &LpSolution) -> bool {
    if !sol.is_optimal() {
        return false;
    }
    let n = lp.num_vars();
    // Rows: every model row plus every bound row that is tight or basic.
    // Build the full equality system with one slack per inequality row.
    let mut eqs: Vec<(Vec<(usize, Rational)>, Rational)> = Vec::new();
    let mut slack_index = n;
    let mut slack_of_model = vec![None; lp.rows.len()];
    for (i, row) in lp.rows.iter().enumerate() {
        let mut coeffs = row.coeffs.clone();
        match row.sense {
            RowSense::Le => {
                coeffs.push((slack_index, Rational::one()));
                slack_of_model[i] = Some(slack_index);
                slack_index += 1;
            }
            RowSense::Ge => {
                coeffs.push((slack_index, -Rational::one()));
                slack_of_model[i] = Some(slack_index);
                slack_index += 1;
            }
            RowSense::Eq => {}
        }
        eqs.push((coeffs, row.rhs.clone()));
    }
    let mut slack_of_bound = vec![None; n];
    for j in 0..n {
        if let Some(u) = &lp.upper[j] {
            if implied_bound(lp, j, u) {
                continue;
            }
            eqs.push((vec![(j, Rational::one()), (slack_index, Rational::one())], u.clone()));
            slack_of_bound[j] = Some(slack_index);
            slack_index += 1;
        }
    }
    let cols: Vec<Option<usize>> = sol
        .basis
        .iter()
        .map(|b| match *b {
            BasicVar::Structural(j) => Some(j),
            BasicVar::RowSlack(r) => slack_of_model[r],
            BasicVar::BoundSlack(j) => slack_of_bound[j],
            BasicVar::Artificial(_) => None,
        })
        .collect();
    if cols.len() != eqs.len() {
        return false;
    }
    // Dense system restricted to basic columns; artificial positions get a
    // unit column on their own row and must come out as zero.
    let m = eqs.len();
    let mut mat = vec![vec![Rational::zero(); m + 1]; m];
    for (i, (coeffs, b)) in eqs.iter().enumerate() {
        for (k, col) in cols.iter().enumerate() {
            if let Some(col) = col {
                for (c, a) in coeffs {
                    if c == col {
                        mat[i][k] += a;
                    }
                }
            }
        }
        mat[i][m] = b.clone();
    }
    for (k, b) in sol.basis.iter().enumerate() {
        if let BasicVar::Artificial(r) = b {
            mat[*r][k] = Rational::one();
        }
    }
    let Some(values) = gauss_solve(mat) else {
        return false;
    };
    let mut x = vec![Rational::zero(); n];
    for (k, col) in cols.iter().enumerate() {
        match col {
            Some(j) if *j < n => x[*j] = values[k].clone(),
            None if !values[k].is_zero() => return false,
            _ => {}
        }
    }
    x == sol.x
}

/// Solves a square augmented system; `None` when singular.
fn gauss_solve(mut a: Vec<Vec<Rational>>) -> Option<Vec<Rational>> {
    let m = a.len();
    for col in 0..m {
        let piv = (col..m).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let p = a[col][col].clone();
        for v in a[col].iter_mut() {
            *v /= &p;
        }
        let prow = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (k, v) in row.iter_mut().enumerate() {
                if !prow[k].is_zero() {
                    *v -= &f * &prow[k];
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[m].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn r(v: i64) -> Rational {
        int(v)
    }

    #[test]
    fn fixed_by_two_rows() {
        // min t  s.t. t >= 1, t <= 1
        let mut lp = LinearProgram::new(1);
        lp.objective[0] = r(1);
        lp.add_row(vec![(0, r(1))], RowSense::Ge, r(1));
        lp.add_row(vec![(0, r(1))], RowSense::Le, r(1));
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.x, vec![r(1)]);
        check_optimality(&lp, &sol).unwrap();
        assert!(basis_reproduces_point(&lp, &sol));
    }

    #[test]
    fn unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.objective[0] = r(-1);
        lp.add_row(vec![(0, r(1))], RowSense::Ge, r(0));
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn infeasible_and_integrality_error() {
        let mut lp = LinearProgram::new(1);
        lp.add_row(vec![(0, r(1))], RowSense::Ge, r(2));
        lp.upper[0] = Some(r(1));
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
        assert_eq!(
            assert_integral(&sol),
            Err(LpError::NotOptimal(LpStatus::Infeasible))
        );
    }

    #[test]
    fn odd_cycle_matching_vertex_is_fractional() {
        // Fractional perfect matching polytope of a triangle: each vertex
        // covered exactly once. The unique feasible point is y = 1/2.
        let mut lp = LinearProgram::new(3);
        for (a, b) in [(0, 1), (1, 2), (0, 2)] {
            lp.add_row(vec![(a, r(1)), (b, r(1))], RowSense::Eq, r(1));
        }
        lp.upper = vec![Some(r(1)); 3];
        let sol = solve(&lp).unwrap();
        let check = assert_integral(&sol).unwrap();
        assert!(!check.integral);
        assert_eq!(check.first_fractional, Some(0));
        assert_eq!(sol.x[0], Rational::new(1.into(), 2.into()));
        check_optimality(&lp, &sol).unwrap();
    }

    #[test]
    fn negative_rhs_and_equalities() {
        // min x + 2y  s.t. -x - y <= -3, x - y = 1, y <= 5
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![r(1), r(2)];
        lp.add_row(vec![(0, r(-1)), (1, r(-1))], RowSense::Le, r(-3));
        lp.add_row(vec![(0, r(1)), (1, r(-1))], RowSense::Eq, r(1));
        lp.upper[1] = Some(r(5));
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.x, vec![r(2), r(1)]);
        assert_eq!(sol.objective, r(4));
        check_optimality(&lp, &sol).unwrap();
        assert!(basis_reproduces_point(&lp, &sol));
    }

    #[test]
    fn redundant_equality_keeps_artificial() {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![r(1), r(1)];
        lp.add_row(vec![(0, r(1)), (1, r(1))], RowSense::Eq, r(2));
        lp.add_row(vec![(0, r(2)), (1, r(2))], RowSense::Eq, r(4));
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.objective, r(2));
        check_optimality(&lp, &sol).unwrap();
        assert!(basis_reproduces_point(&lp, &sol));
    }

    #[test]
    fn pivot_limit_reported() {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![r(-1), r(-1)];
        lp.add_row(vec![(0, r(1))], RowSense::Le, r(1));
        lp.add_row(vec![(1, r(1))], RowSense::Le, r(1));
        assert_eq!(solve_with_limit(&lp, 1), Err(LpError::PivotLimit(1)));
    }
}
