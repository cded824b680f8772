//! Input selection: certified exact solves, bounds, LP rounding and the
//! exhaustive oracle.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::controllability::{
    is_structurally_controllable, is_switched_structurally_controllable, MatchedPair,
};
use crate::graph::{
    maximum_matching, min_cost_max_matching_inputs, MatchingCostError, SystemBipartite,
};
use crate::ilp::{
    build_p1, build_p2, build_p3, build_p4, build_p4fix, build_p5, build_p5fix, BuildError,
    IlpModel, Problem, Variable,
};
use crate::lp::{
    assert_integral, check_optimality, solve, DualityViolation, LinearProgram, LpError,
    LpSolution, LpStatus, RowSense,
};
use crate::model::{ModeInput, StructuredSystem, SwitchedStructuredSystem};
use crate::rational::{int, Rational};
use crate::tu::{classify, incidence_of, ConstraintClass, Flag};

pub const DEFAULT_ORACLE_CAP: usize = 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// LP relaxation solved exactly under a restricted-TU certificate.
    ExactLp,
    ExactOracle,
    RoundedFeasible,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundingCertificate {
    pub f: usize,
    #[serde(serialize_with = "crate::rational::ser")]
    pub lp_bound: Rational,
    pub perfect_matching_in_a: bool,
    /// `f · lp_bound`, reported only with a perfect matching in `B(A)`.
    #[serde(serialize_with = "crate::rational::ser_opt")]
    pub bound: Option<Rational>,
    pub within_bound: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolveStats {
    pub pivots: usize,
    pub basis_size: usize,
    pub rows: usize,
    pub variables: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SelectionResult {
    pub problem: Problem,
    pub k: Option<usize>,
    /// Selected inputs in flat order (mode, input), 0-based.
    pub selected: Vec<ModeInput>,
    #[serde(serialize_with = "crate::rational::ser")]
    pub cost: Rational,
    pub provenance: Provenance,
    /// Edges used by a matching that certifies condition (ii).
    pub matching: Vec<MatchedPair>,
    pub rounding: Option<RoundingCertificate>,
    pub stats: Option<SolveStats>,
}

impl SelectionResult {
    pub fn inputs_of_mode(&self, mode: usize) -> Vec<usize> {
        self.selected
            .iter()
            .filter(|mi| mi.mode == mode)
            .map(|mi| mi.input)
            .collect()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SelectionError {
    #[error("incidence matrix is not certified restricted TU (restricted_tu = {0:?}); use bounds, rounding or the oracle")]
    Uncertified(Flag, Box<ConstraintClass>),
    #[error("no input selection satisfies the cardinality bound k = {0:?}")]
    Infeasible(Option<usize>),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Solver(#[from] LpError),
    #[error("LP optimum is fractional at variable {0}")]
    Fractional(usize),
    #[error("LP certificate check failed: {0}")]
    Duality(DualityViolation),
    #[error("problem {0:?} does not apply to this system")]
    WrongProblem(Problem),
    #[error("{inputs} inputs exceed the enumeration cap of {cap}")]
    TooLarge { inputs: usize, cap: usize },
    #[error("problem {0:?} requires k")]
    MissingK(Problem),
}

/// An optimal LP vertex with its exact optimality certificate checked.
pub fn solve_certified(lp: &LinearProgram) -> Result<LpSolution, SelectionError> {
    let sol = solve(lp)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(SelectionError::Infeasible(None)),
        LpStatus::Unbounded => unreachable!("selection LPs are bounded"),
    }
    check_optimality(lp, &sol).map_err(SelectionError::Duality)?;
    Ok(sol)
}

fn stats(model: &IlpModel, sol: &LpSolution) -> SolveStats {
    SolveStats {
        pivots: sol.pivots,
        basis_size: sol.basis.len(),
        rows: model.rows.len(),
        variables: model.num_vars(),
    }
}

fn matching_from(model: &IlpModel, x: &[Rational]) -> Vec<MatchedPair> {
    (0..model.num_edges)
        .filter(|&e| x[e].is_one())
        .map(|e| match model.variables[e] {
            Variable::Edge { state, partner } => MatchedPair { state, partner },
            Variable::Input { .. } => unreachable!(),
        })
        .collect()
}

fn input_cost(costs: &[Rational], mask: &[bool]) -> Rational {
    costs
        .iter()
        .zip(mask)
        .filter(|(_, s)| **s)
        .fold(Rational::zero(), |acc, (c, _)| acc + c)
}

fn flat_selected(inputs: &[ModeInput], mask: &[bool]) -> Vec<ModeInput> {
    inputs
        .iter()
        .zip(mask)
        .filter(|(_, s)| **s)
        .map(|(mi, _)| *mi)
        .collect()
}

/// Solves the relaxation of a built model and reads off an integral
/// selection mask.
fn exact_from_model(model: &IlpModel) -> Result<(LpSolution, Vec<bool>), SelectionError> {
    let lp = model.relaxation();
    let sol = solve_certified(&lp).map_err(|e| match e {
        SelectionError::Infeasible(_) => SelectionError::Infeasible(model.k),
        other => other,
    })?;
    let check = assert_integral(&sol)?;
    if let Some(v) = check.first_fractional {
        return Err(SelectionError::Fractional(v));
    }
    let mask = (0..model.num_inputs())
        .map(|j| sol.x[model.input_var(j)].is_one())
        .collect();
    Ok((sol, mask))
}

fn certified(w: &crate::tu::IncidenceMatrix) -> Result<(), SelectionError> {
    let class = classify(w);
    if class.restricted_tu.is_yes() {
        Ok(())
    } else {
        Err(SelectionError::Uncertified(class.restricted_tu, Box::new(class)))
    }
}

/// Optimal selection for P1, P2 or P3 through the LP relaxation. Refuses
/// unless the incidence matrix is restricted TU.
pub fn solve_exact(
    sys: &StructuredSystem,
    problem: Problem,
    k: Option<usize>,
) -> Result<SelectionResult, SelectionError> {
    certified(&incidence_of(sys))?;
    let model = match problem {
        Problem::P1 => build_p1(sys)?,
        Problem::P2 => build_p2(sys, k.ok_or(SelectionError::MissingK(problem))?)?,
        Problem::P3 => build_p3(sys)?,
        other => return Err(SelectionError::WrongProblem(other)),
    };
    let (sol, mask) = exact_from_model(&model)?;
    let cert = is_structurally_controllable(sys, &mask);
    assert!(cert.controllable, "LP selection failed the controllability re-check");
    Ok(SelectionResult {
        problem,
        k: model.k,
        selected: flat_selected(&model.inputs, &mask),
        cost: input_cost(sys.costs(), &mask),
        provenance: Provenance::ExactLp,
        matching: matching_from(&model, &sol.x),
        rounding: None,
        stats: Some(stats(&model, &sol)),
    })
}

/// Switched counterpart of [`solve_exact`]. For the shared-input problems
/// the selection refers to columns of the common `B` and is reported as
/// mode 0.
pub fn solve_exact_switched(
    sw: &SwitchedStructuredSystem,
    problem: Problem,
    k: Option<usize>,
) -> Result<SelectionResult, SelectionError> {
    let need_k = || k.ok_or(SelectionError::MissingK(problem));
    let model = match problem {
        Problem::P4 => build_p4(sw)?,
        Problem::P5 => build_p5(sw, need_k()?)?,
        Problem::P4fix => build_p4fix(sw)?,
        Problem::P5fix => build_p5fix(sw, need_k()?)?,
        other => return Err(SelectionError::WrongProblem(other)),
    };
    certified(&model.incidence)?;
    let (sol, mask) = exact_from_model(&model)?;
    let costs: Vec<Rational> = model.objective[model.num_edges..].to_vec();
    let ok = if matches!(problem, Problem::P4fix | Problem::P5fix) {
        is_switched_structurally_controllable(&sw.fixed_input_reduction(), &mask).controllable
    } else {
        is_switched_structurally_controllable(sw, &mask).controllable
    };
    assert!(ok, "LP selection failed the controllability re-check");
    Ok(SelectionResult {
        problem,
        k: model.k,
        selected: flat_selected(&model.inputs, &mask),
        cost: input_cost(&costs, &mask),
        provenance: Provenance::ExactLp,
        matching: matching_from(&model, &sol.x),
        rounding: None,
        stats: Some(stats(&model, &sol)),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundsReport {
    #[serde(serialize_with = "crate::rational::ser")]
    pub c_mat: Rational,
    #[serde(serialize_with = "crate::rational::ser")]
    pub c_lp: Rational,
    pub ordered: bool,
    pub f: usize,
    /// Fractional input values of the LP optimum.
    #[serde(serialize_with = "crate::rational::ser_vec")]
    pub t_lp: Vec<Rational>,
}

/// `c*_mat ≤ c*_LP`, both exact, plus the rounding factor `f`.
pub fn bounds(sys: &StructuredSystem) -> Result<BoundsReport, SelectionError> {
    let model = build_p1(sys)?;
    let sol = solve_certified(&model.relaxation())?;
    let bip = SystemBipartite::fixed(sys);
    let (_, c_mat) = min_cost_max_matching_inputs(&bip, sys.costs()).map_err(|e| match e {
        MatchingCostError::NotSaturable(_) => SelectionError::Build(BuildError::NotControllable),
        MatchingCostError::Solver(s) => SelectionError::Solver(s),
    })?;
    let c_lp = sol.objective.clone();
    Ok(BoundsReport {
        ordered: c_mat <= c_lp,
        c_mat,
        c_lp,
        f: model.incidence.max_row_sum(),
        t_lp: sol.x[model.num_edges..].to_vec(),
    })
}

/// Selects every input with positive LP value, then recovers a matching by
/// solving the edge subproblem with the selection fixed.
pub fn lp_round(sys: &StructuredSystem) -> Result<SelectionResult, SelectionError> {
    let model = build_p1(sys)?;
    let mut lp = model.relaxation();
    let sol = solve_certified(&lp)?;
    let mask: Vec<bool> = (0..sys.m())
        .map(|j| sol.x[model.input_var(j)].is_positive())
        .collect();
    for (j, &s) in mask.iter().enumerate() {
        lp.add_row(
            vec![(model.input_var(j), Rational::one())],
            RowSense::Eq,
            if s { Rational::one() } else { Rational::zero() },
        );
    }
    let fixed = solve_certified(&lp)?;
    if let Some(v) = assert_integral(&fixed)?.first_fractional {
        return Err(SelectionError::Fractional(v));
    }
    let cert = is_structurally_controllable(sys, &mask);
    assert!(cert.controllable, "rounded selection failed the controllability re-check");
    let cost = input_cost(sys.costs(), &mask);
    let bip = SystemBipartite::fixed(sys);
    let perfect = maximum_matching(&bip.state_part()).saturates_left();
    let f = model.incidence.max_row_sum();
    let bound = perfect.then(|| &sol.objective * int(f as i64));
    let solve_stats = stats(&model, &sol);
    let within_bound = bound.as_ref().map(|b| &cost <= b);
    Ok(SelectionResult {
        problem: Problem::P1,
        k: None,
        selected: flat_selected(&model.inputs, &mask),
        cost,
        provenance: Provenance::RoundedFeasible,
        matching: matching_from(&model, &fixed.x),
        rounding: Some(RoundingCertificate {
            f,
            lp_bound: sol.objective,
            perfect_matching_in_a: perfect,
            bound,
            within_bound,
        }),
        stats: Some(solve_stats),
    })
}

/// Costs as integers after scaling by the common denominator.
fn scaled_costs(costs: &[Rational]) -> Option<Vec<i128>> {
    let lcm = costs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    costs
        .iter()
        .map(|c| (c * Rational::from_integer(lcm.clone())).to_integer().to_i128())
        .collect()
}

fn lex_cmp(a: u64, b: u64) -> Ordering {
    // Lexicographic order of the sorted index lists of two bit sets.
    let (mut a, mut b) = (a, b);
    loop {
        match (a == 0, b == 0) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let (la, lb) = (a.trailing_zeros(), b.trailing_zeros());
        if la != lb {
            return la.cmp(&lb);
        }
        a &= a - 1;
        b &= b - 1;
    }
}

/// Minimum `(cost, subset)` over all masks passing `feasible`.
fn enumerate(
    costs: &[Rational],
    k: Option<usize>,
    cover: &[u64],
    feasible: impl Fn(&[bool]) -> bool,
) -> Result<Option<u64>, SelectionError> {
    let m = costs.len();
    let scaled = scaled_costs(costs).ok_or(SelectionError::TooLarge {
        inputs: m,
        cap: DEFAULT_ORACLE_CAP,
    })?;
    let mut best: Option<(i128, u64)> = None;
    let mut mask_buf = vec![false; m];
    for mask in 0u64..(1u64 << m) {
        if let Some(k) = k {
            if mask.count_ones() as usize > k {
                continue;
            }
        }
        if cover.iter().any(|&c| c & mask == 0) {
            continue;
        }
        let cost: i128 = (0..m).filter(|&j| mask >> j & 1 == 1).map(|j| scaled[j]).sum();
        if let Some((bc, bm)) = best {
            if cost > bc || (cost == bc && lex_cmp(mask, bm) != Ordering::Less) {
                continue;
            }
        }
        for (j, slot) in mask_buf.iter_mut().enumerate() {
            *slot = mask >> j & 1 == 1;
        }
        if feasible(&mask_buf) {
            best = Some((cost, mask));
        }
    }
    Ok(best.map(|(_, m)| m))
}

fn mask_vec(mask: u64, m: usize) -> Vec<bool> {
    (0..m).map(|j| mask >> j & 1 == 1).collect()
}

fn cover_masks(w: &crate::tu::IncidenceMatrix) -> Vec<u64> {
    w.entries
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, &v)| v == 1)
                .fold(0u64, |acc, (j, _)| acc | 1 << j)
        })
        .collect()
}

/// Exhaustive optimum for P1 (`k = None`) or P2; ties go to the
/// lexicographically smallest subset.
pub fn brute_force(
    sys: &StructuredSystem,
    k: Option<usize>,
) -> Result<SelectionResult, SelectionError> {
    brute_force_with_cap(sys, k, DEFAULT_ORACLE_CAP)
}

pub fn brute_force_with_cap(
    sys: &StructuredSystem,
    k: Option<usize>,
    cap: usize,
) -> Result<SelectionResult, SelectionError> {
    let m = sys.m();
    if m > cap || m > 63 {
        return Err(SelectionError::TooLarge { inputs: m, cap });
    }
    let cover = cover_masks(&incidence_of(sys));
    let best = enumerate(sys.costs(), k, &cover, |mask| {
        is_structurally_controllable(sys, mask).controllable
    })?
    .ok_or(SelectionError::Infeasible(k))?;
    let mask = mask_vec(best, m);
    let cert = is_structurally_controllable(sys, &mask);
    Ok(SelectionResult {
        problem: if k.is_some() { Problem::P2 } else { Problem::P1 },
        k,
        selected: flat_selected(
            &(0..m).map(|input| ModeInput { mode: 0, input }).collect::<Vec<_>>(),
            &mask,
        ),
        cost: input_cost(sys.costs(), &mask),
        provenance: Provenance::ExactOracle,
        matching: cert.matching,
        rounding: None,
        stats: None,
    })
}

/// Exhaustive optimum for the switched problems. With `shared`, subsets of
/// the common input matrix are applied in every mode and paid once.
pub fn brute_force_switched(
    sw: &SwitchedStructuredSystem,
    k: Option<usize>,
    shared: bool,
) -> Result<SelectionResult, SelectionError> {
    let problem = match (shared, k.is_some()) {
        (false, false) => Problem::P4,
        (false, true) => Problem::P5,
        (true, false) => Problem::P4fix,
        (true, true) => Problem::P5fix,
    };
    if shared && !sw.shares_input_matrix() {
        return Err(SelectionError::Build(BuildError::InputMatrixNotShared));
    }
    let (costs, inputs): (Vec<Rational>, Vec<ModeInput>) = if shared {
        let md = &sw.modes()[0];
        (
            md.costs.clone(),
            (0..md.m()).map(|input| ModeInput { mode: 0, input }).collect(),
        )
    } else {
        (sw.flat_costs(), sw.flat_inputs())
    };
    let m = costs.len();
    if m > DEFAULT_ORACLE_CAP {
        return Err(SelectionError::TooLarge {
            inputs: m,
            cap: DEFAULT_ORACLE_CAP,
        });
    }
    // A shared B is one time-invariant matrix, so its copies in later modes
    // add no rank: controllability is judged with B in mode 1 only.
    let reduced;
    let target = if shared {
        reduced = sw.fixed_input_reduction();
        &reduced
    } else {
        sw
    };
    let best = enumerate(&costs, k, &[], |mask| {
        is_switched_structurally_controllable(target, mask).controllable
    })?
    .ok_or(SelectionError::Infeasible(k))?;
    let mask = mask_vec(best, m);
    let cert = is_switched_structurally_controllable(target, &mask);
    Ok(SelectionResult {
        problem,
        k,
        selected: flat_selected(&inputs, &mask),
        cost: input_cost(&costs, &mask),
        provenance: Provenance::ExactOracle,
        matching: cert.matching,
        rounding: None,
        stats: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SparsityPattern;

    fn sys(n: usize, a: &[(usize, usize)], m: usize, b: &[(usize, usize)], c: &[i64]) -> StructuredSystem {
        StructuredSystem::new(
            SparsityPattern::from_entries(n, n, a.iter().copied()).unwrap(),
            SparsityPattern::from_entries(n, m, b.iter().copied()).unwrap(),
            c.iter().map(|&v| int(v)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn cheaper_input_chosen() {
        // One state without self-loop, two inputs of cost 3 and 5.
        let s = sys(1, &[], 2, &[(0, 0), (0, 1)], &[3, 5]);
        let r = solve_exact(&s, Problem::P1, None).unwrap();
        assert_eq!(r.cost, int(3));
        assert_eq!(r.selected, vec![ModeInput { mode: 0, input: 0 }]);
        let b = bounds(&s).unwrap();
        assert_eq!(b.c_mat, int(3));
        assert_eq!(b.c_lp, int(3));
        assert_eq!(brute_force(&s, None).unwrap().cost, int(3));
    }

    #[test]
    fn infeasible_cardinality() {
        // Two isolated states need two dedicated inputs.
        let s = sys(2, &[], 2, &[(0, 0), (1, 1)], &[1, 1]);
        assert!(matches!(
            solve_exact(&s, Problem::P2, Some(1)),
            Err(SelectionError::Infeasible(Some(1)))
        ));
        assert!(matches!(brute_force(&s, Some(0)), Err(SelectionError::Infeasible(Some(0)))));
    }

    #[test]
    fn refuses_uncertified() {
        // Three source states, inputs forming an odd cycle on them.
        let s = sys(3, &[(0, 0), (1, 1), (2, 2)], 3, &[(0, 0), (1, 0), (1, 1), (2, 1), (0, 2), (2, 2)], &[1, 1, 1]);
        assert!(matches!(
            solve_exact(&s, Problem::P1, None),
            Err(SelectionError::Uncertified(Flag::No, _))
        ));
        let r = lp_round(&s).unwrap();
        assert_eq!(r.provenance, Provenance::RoundedFeasible);
        let oracle = brute_force(&s, None).unwrap();
        assert_eq!(oracle.cost, int(2));
        let cert = r.rounding.unwrap();
        assert_eq!(cert.lp_bound, Rational::new(3.into(), 2.into()));
        assert_eq!(cert.within_bound, Some(true));
    }

    #[test]
    fn lexicographic_ties() {
        assert_eq!(lex_cmp(0b10101, 0b11010), Ordering::Less);
        assert_eq!(lex_cmp(0b011, 0b111), Ordering::Less);
        assert_eq!(lex_cmp(0b110, 0b011), Ordering::Greater);
    }
}
