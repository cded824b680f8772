//! Integer programs for the input selection problems and their LP
//! relaxations.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::controllability::{is_structurally_controllable, is_switched_structurally_controllable};
use crate::graph::{RightVertex, SystemBipartite};
use crate::lp::{LinearProgram, RowSense};
use crate::model::{ModeInput, StructuredSystem, SwitchedStructuredSystem};
use crate::rational::{int, Rational};
use crate::tu::{build_switched_incidence, incidence_of, IncidenceMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    P1,
    P2,
    P3,
    P4,
    P5,
    P4fix,
    P5fix,
}

impl Problem {
    pub fn needs_k(self) -> bool {
        matches!(self, Problem::P2 | Problem::P5 | Problem::P5fix)
    }

    pub fn is_switched(self) -> bool {
        matches!(self, Problem::P4 | Problem::P5 | Problem::P4fix | Problem::P5fix)
    }

    pub fn name(self) -> &'static str {
        match self {
            Problem::P1 => "p1",
            Problem::P2 => "p2",
            Problem::P3 => "p3",
            Problem::P4 => "p4",
            Problem::P5 => "p5",
            Problem::P4fix => "p4fix",
            Problem::P5fix => "p5fix",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowGroup {
    /// Each left state vertex matched exactly once.
    Assignment,
    /// Each input and right state vertex matched at most once.
    Capacity,
    /// Each source component touched by a selected input.
    Coverage,
    /// An input's edges are usable only if the input is selected.
    Linking,
    Cardinality,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModelRow {
    pub group: RowGroup,
    pub label: String,
    pub coeffs: Vec<(usize, i64)>,
    pub sense: RowSense,
    pub rhs: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Variable {
    Edge { state: usize, partner: RightVertex },
    Input { mode: usize, input: usize },
}

/// Binary program over edge variables `y` followed by input variables `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct IlpModel {
    pub problem: Problem,
    pub variables: Vec<Variable>,
    pub num_edges: usize,
    pub objective: Vec<Rational>,
    pub rows: Vec<ModelRow>,
    pub inputs: Vec<ModeInput>,
    pub incidence: IncidenceMatrix,
    pub k: Option<usize>,
    /// Penalty added to every input cost (P3 only).
    pub gamma: Option<Rational>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum BuildError {
    #[error("the system is not structurally controllable even with every input selected")]
    NotControllable,
    #[error("cardinality bound k must be at least 1")]
    InvalidK,
    #[error("modes do not share one input matrix and cost vector")]
    InputMatrixNotShared,
}

impl IlpModel {
    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_inputs(&self) -> usize {
        self.variables.len() - self.num_edges
    }

    pub fn input_var(&self, flat: usize) -> usize {
        self.num_edges + flat
    }

    pub fn var_name(&self, v: usize) -> String {
        if v < self.num_edges {
            format!("y{}", v + 1)
        } else {
            format!("t{}", v - self.num_edges + 1)
        }
    }

    /// Dense constraint matrix.
    pub fn matrix(&self) -> Vec<Vec<i64>> {
        self.rows
            .iter()
            .map(|row| {
                let mut dense = vec![0; self.num_vars()];
                for &(j, a) in &row.coeffs {
                    dense[j] = a;
                }
                dense
            })
            .collect()
    }

    pub fn rows_in(&self, group: RowGroup) -> Vec<&ModelRow> {
        self.rows.iter().filter(|r| r.group == group).collect()
    }

    /// LP relaxation with `0 ≤ x ≤ 1`.
    pub fn relaxation(&self) -> LinearProgram {
        let mut lp = LinearProgram::new(self.num_vars());
        lp.objective = self.objective.clone();
        for row in &self.rows {
            lp.add_row(
                row.coeffs.iter().map(|&(j, a)| (j, int(a))).collect(),
                row.sense,
                int(row.rhs),
            );
        }
        lp.upper = vec![Some(Rational::one()); self.num_vars()];
        lp
    }

    /// The model in the CPLEX LP text format. Objective coefficients are
    /// multiplied by the least common multiple of their denominators so the
    /// file holds integers only.
    pub fn to_lp_format(&self) -> String {
        let scale = self
            .objective
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let mut out = String::new();
        let _ = writeln!(out, "\\ problem {}", self.problem.name());
        if !scale.is_one() {
            let _ = writeln!(out, "\\ objective scaled by {scale}");
        }
        let _ = writeln!(out, "Minimize");
        let terms: Vec<(usize, BigInt)> = self
            .objective
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| (j, (c * Rational::from_integer(scale.clone())).to_integer()))
            .collect();
        let obj = if terms.is_empty() {
            format!("0 {}", self.var_name(0))
        } else {
            self.linear(terms)
        };
        let _ = writeln!(out, " obj: {obj}");
        let _ = writeln!(out, "Subject To");
        for row in &self.rows {
            let terms = row.coeffs.iter().map(|&(j, a)| (j, BigInt::from(a))).collect();
            let _ = writeln!(
                out,
                " {}: {} {} {}",
                row.label,
                self.linear(terms),
                row.sense.symbol(),
                row.rhs
            );
        }
        let _ = writeln!(out, "Bounds");
        for v in 0..self.num_vars() {
            let _ = writeln!(out, " 0 <= {} <= 1", self.var_name(v));
        }
        let _ = writeln!(out, "Binaries");
        for v in 0..self.num_vars() {
            let _ = writeln!(out, " {}", self.var_name(v));
        }
        let _ = writeln!(out, "End");
        out
    }

    fn linear(&self, terms: Vec<(usize, BigInt)>) -> String {
        let mut s = String::new();
        for (k, (j, a)) in terms.into_iter().enumerate() {
            let neg = a < BigInt::zero();
            let mag = if neg { -a } else { a };
            if k == 0 {
                if neg {
                    s.push_str("- ");
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            if !mag.is_one() {
                let _ = write!(s, "{mag} ");
            }
            s.push_str(&self.var_name(j));
        }
        s
    }
}

struct Layout<'a> {
    bip: &'a SystemBipartite,
    w: IncidenceMatrix,
    inputs: Vec<ModeInput>,
    costs: Vec<Rational>,
    input_label: Vec<String>,
    state_label: Box<dyn Fn(usize, usize) -> String + 'a>,
}

fn assemble(problem: Problem, lay: Layout<'_>, k: Option<usize>, gamma: Option<Rational>) -> IlpModel {
    let bip = lay.bip;
    let ne = bip.num_edges();
    let m = bip.num_inputs;
    let n = bip.n;
    let mut variables: Vec<Variable> = bip
        .edges
        .iter()
        .map(|&(state, r)| Variable::Edge {
            state,
            partner: bip.right[r],
        })
        .collect();
    variables.extend(lay.inputs.iter().map(|mi| Variable::Input {
        mode: mi.mode,
        input: mi.input,
    }));
    let mut objective = vec![Rational::zero(); ne];
    objective.extend(lay.costs.iter().map(|c| match &gamma {
        Some(g) => c + g,
        None => c.clone(),
    }));

    let mut rows = Vec::new();
    for i in 0..n {
        let coeffs = (0..ne).filter(|&e| bip.edges[e].0 == i).map(|e| (e, 1)).collect();
        rows.push(ModelRow {
            group: RowGroup::Assignment,
            label: format!("assign_x{}", i + 1),
            coeffs,
            sense: RowSense::Eq,
            rhs: 1,
        });
    }
    for (rv, vertex) in bip.right.iter().enumerate() {
        let coeffs = (0..ne).filter(|&e| bip.edges[e].1 == rv).map(|e| (e, 1)).collect();
        let label = match *vertex {
            RightVertex::Input(j) => format!("cap_{}", lay.input_label[j]),
            RightVertex::State { mode, state } => format!("cap_{}", (lay.state_label)(mode, state)),
        };
        rows.push(ModelRow {
            group: RowGroup::Capacity,
            label,
            coeffs,
            sense: RowSense::Le,
            rhs: 1,
        });
    }
    for (i, row) in lay.w.entries.iter().enumerate() {
        let coeffs = (0..m).filter(|&j| row[j] == 1).map(|j| (ne + j, -1)).collect();
        rows.push(ModelRow {
            group: RowGroup::Coverage,
            label: format!("cover_s{}", i + 1),
            coeffs,
            sense: RowSense::Le,
            rhs: -1,
        });
    }
    for j in 0..m {
        let mut coeffs: Vec<(usize, i64)> = bip.input_edges[j].iter().map(|&e| (e, 1)).collect();
        coeffs.push((ne + j, -1));
        rows.push(ModelRow {
            group: RowGroup::Linking,
            label: format!("link_{}", lay.input_label[j]),
            coeffs,
            sense: RowSense::Le,
            rhs: 0,
        });
    }
    if let Some(k) = k {
        rows.push(ModelRow {
            group: RowGroup::Cardinality,
            label: "card".to_string(),
            coeffs: (0..m).map(|j| (ne + j, 1)).collect(),
            sense: RowSense::Le,
            rhs: k as i64,
        });
    }
    IlpModel {
        problem,
        variables,
        num_edges: ne,
        objective,
        rows,
        inputs: lay.inputs,
        incidence: lay.w,
        k,
        gamma,
    }
}

fn fixed_layout<'a>(sys: &StructuredSystem, bip: &'a SystemBipartite) -> Layout<'a> {
    Layout {
        bip,
        w: incidence_of(sys),
        inputs: (0..sys.m()).map(|input| ModeInput { mode: 0, input }).collect(),
        costs: sys.costs().to_vec(),
        input_label: (1..=sys.m()).map(|j| format!("u{j}")).collect(),
        state_label: Box::new(|_, s| format!("x{}", s + 1)),
    }
}

fn check_k(k: usize) -> Result<(), BuildError> {
    if k < 1 {
        Err(BuildError::InvalidK)
    } else {
        Ok(())
    }
}

fn require_controllable(sys: &StructuredSystem) -> Result<(), BuildError> {
    if is_structurally_controllable(sys, &vec![true; sys.m()]).controllable {
        Ok(())
    } else {
        Err(BuildError::NotControllable)
    }
}

pub fn build_p1(sys: &StructuredSystem) -> Result<IlpModel, BuildError> {
    require_controllable(sys)?;
    let bip = SystemBipartite::fixed(sys);
    Ok(assemble(Problem::P1, fixed_layout(sys, &bip), None, None))
}

pub fn build_p2(sys: &StructuredSystem, k: usize) -> Result<IlpModel, BuildError> {
    check_k(k)?;
    require_controllable(sys)?;
    let bip = SystemBipartite::fixed(sys);
    Ok(assemble(Problem::P2, fixed_layout(sys, &bip), Some(k), None))
}

/// `m · c_max`, or 1 when every cost is zero.
pub fn cardinality_penalty(costs: &[Rational]) -> Rational {
    let c_max = costs.iter().max().cloned().unwrap_or_else(Rational::zero);
    if c_max.is_zero() {
        Rational::one()
    } else {
        c_max * int(costs.len() as i64)
    }
}

pub fn build_p3(sys: &StructuredSystem) -> Result<IlpModel, BuildError> {
    require_controllable(sys)?;
    let bip = SystemBipartite::fixed(sys);
    let gamma = cardinality_penalty(sys.costs());
    Ok(assemble(Problem::P3, fixed_layout(sys, &bip), None, Some(gamma)))
}

fn switched_layout<'a>(sw: &SwitchedStructuredSystem, bip: &'a SystemBipartite) -> Layout<'a> {
    let single = sw.p() == 1;
    let inputs = sw.flat_inputs();
    let input_label = inputs
        .iter()
        .map(|mi| {
            if single {
                format!("u{}", mi.input + 1)
            } else {
                format!("u{}_m{}", mi.input + 1, mi.mode + 1)
            }
        })
        .collect();
    Layout {
        bip,
        w: build_switched_incidence(sw),
        inputs,
        costs: sw.flat_costs(),
        input_label,
        state_label: Box::new(move |mode, s| {
            if single {
                format!("x{}", s + 1)
            } else {
                format!("x{}_m{}", s + 1, mode + 1)
            }
        }),
    }
}

fn build_switched(
    problem: Problem,
    sw: &SwitchedStructuredSystem,
    k: Option<usize>,
) -> Result<IlpModel, BuildError> {
    if let Some(k) = k {
        check_k(k)?;
    }
    if !is_switched_structurally_controllable(sw, &vec![true; sw.total_inputs()]).controllable {
        return Err(BuildError::NotControllable);
    }
    let bip = SystemBipartite::switched(sw);
    Ok(assemble(problem, switched_layout(sw, &bip), k, None))
}

pub fn build_p4(sw: &SwitchedStructuredSystem) -> Result<IlpModel, BuildError> {
    build_switched(Problem::P4, sw, None)
}

pub fn build_p5(sw: &SwitchedStructuredSystem, k: usize) -> Result<IlpModel, BuildError> {
    build_switched(Problem::P5, sw, Some(k))
}

/// Shared-input variants: the input matrix is kept in mode 1 only.
pub fn build_p4fix(sw: &SwitchedStructuredSystem) -> Result<IlpModel, BuildError> {
    if !sw.shares_input_matrix() {
        return Err(BuildError::InputMatrixNotShared);
    }
    build_switched(Problem::P4fix, &sw.fixed_input_reduction(), None)
}

pub fn build_p5fix(sw: &SwitchedStructuredSystem, k: usize) -> Result<IlpModel, BuildError> {
    if !sw.shares_input_matrix() {
        return Err(BuildError::InputMatrixNotShared);
    }
    build_switched(Problem::P5fix, &sw.fixed_input_reduction(), Some(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SparsityPattern;

    fn tiny() -> StructuredSystem {
        let a = SparsityPattern::from_entries(1, 1, [(0, 0)]).unwrap();
        let b = SparsityPattern::from_entries(1, 1, [(0, 0)]).unwrap();
        StructuredSystem::new(a, b, vec![int(1)]).unwrap()
    }

    #[test]
    fn counts_for_single_state() {
        let m = build_p1(&tiny()).unwrap();
        assert_eq!(m.rows.len(), 5);
        assert_eq!(m.num_vars(), 3);
        assert_eq!(m.num_edges, 2);
        assert!(m.matrix().iter().flatten().all(|v| (-1..=1).contains(v)));
    }

    #[test]
    fn k_zero_rejected() {
        assert_eq!(build_p2(&tiny(), 0), Err(BuildError::InvalidK));
        assert_eq!(build_p2(&tiny(), 1).unwrap().rows.len(), 6);
    }

    #[test]
    fn uncontrollable_rejected() {
        let a = SparsityPattern::from_entries(2, 2, []).unwrap();
        let b = SparsityPattern::from_entries(2, 1, [(0, 0)]).unwrap();
        let sys = StructuredSystem::new(a, b, vec![int(1)]).unwrap();
        assert_eq!(build_p1(&sys), Err(BuildError::NotControllable));
    }

    #[test]
    fn penalty_formula() {
        assert_eq!(cardinality_penalty(&vec![int(1); 6]), int(6));
        assert_eq!(cardinality_penalty(&[int(0), int(0)]), int(1));
        let m = build_p3(&tiny()).unwrap();
        assert_eq!(m.objective[m.input_var(0)], int(2));
    }

    #[test]
    fn lp_export_shape() {
        let text = build_p2(&tiny(), 1).unwrap().to_lp_format();
        assert!(text.starts_with("\\ problem p2\nMinimize\n obj: t1\n"));
        assert!(text.contains(" assign_x1: y1 + y2 = 1\n"));
        assert!(text.contains(" cover_s1: - t1 <= -1\n"));
        assert!(text.contains(" link_u1: y1 - t1 <= 0\n"));
        assert!(text.contains(" card: t1 <= 1\n"));
        assert!(text.ends_with("Binaries\n y1\n y2\n t1\nEnd\n"));
    }
}
