//! Structural controllability of fixed and switched structured systems.

use serde::Serialize;

use crate::graph::{
    hall_violator, input_reachable_states, maximum_matching, strongly_connected_components,
    BipartiteGraph, HallViolator, RightVertex, SccDecomposition, StateDigraph, SystemBipartite,
};
use crate::model::{union_system, SparsityPattern, StructuredSystem, SwitchedStructuredSystem};

/// Maximum rank over all realizations of the pattern.
pub fn generic_rank(p: &SparsityPattern) -> usize {
    let g = BipartiteGraph::new(p.rows(), p.cols(), p.entries());
    maximum_matching(&g).size()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SourceActuation {
    pub component: usize,
    pub states: Vec<usize>,
    /// Lowest-index selected input hitting a state of this component.
    pub input: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MatchedPair {
    pub state: usize,
    pub partner: RightVertex,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ControllabilityCertificate {
    pub controllable: bool,
    pub all_reachable: bool,
    pub sources: Vec<SourceActuation>,
    /// First source component with no selected input, if any.
    pub failing_source: Option<usize>,
    pub unreachable_states: Vec<usize>,
    pub saturating: bool,
    /// Left-saturating matching when `saturating`, else a maximum matching.
    pub matching: Vec<MatchedPair>,
    pub deficient: Option<HallViolator>,
}

/// Per source component, the lowest selected input touching it.
fn source_actuation(
    scc: &SccDecomposition,
    b: &SparsityPattern,
    selected: &[bool],
) -> Vec<SourceActuation> {
    scc.source_components()
        .into_iter()
        .map(|c| {
            let input = (0..b.cols()).find(|&j| {
                selected[j]
                    && scc.components[c]
                        .iter()
                        .any(|&x| b.contains(x, j))
            });
            SourceActuation {
                component: c,
                states: scc.components[c].clone(),
                input,
            }
        })
        .collect()
}

fn certify(
    a_reach: &SparsityPattern,
    b_reach: &SparsityPattern,
    bip: &SystemBipartite,
    selected: &[bool],
) -> ControllabilityCertificate {
    let scc = strongly_connected_components(&StateDigraph::from_pattern(a_reach));
    let reach = input_reachable_states(a_reach, b_reach, selected);
    let sources = source_actuation(&scc, b_reach, selected);
    let failing_source = sources
        .iter()
        .find(|s| s.input.is_none())
        .map(|s| s.component);
    let unreachable_states: Vec<usize> = (0..reach.len()).filter(|&i| !reach[i]).collect();
    let g = bip.restricted(selected);
    let m = maximum_matching(&g);
    let deficient = hall_violator(&g, &m);
    let matching = m
        .pairs()
        .into_iter()
        .map(|(state, r)| MatchedPair {
            state,
            partner: bip.right[r],
        })
        .collect();
    let all_reachable = unreachable_states.is_empty();
    let saturating = deficient.is_none();
    ControllabilityCertificate {
        controllable: all_reachable && saturating,
        all_reachable,
        sources,
        failing_source,
        unreachable_states,
        saturating,
        matching,
        deficient,
    }
}

/// Reachability of every state plus an `X_L`-saturating matching in
/// `B(A, B_selected)`.
pub fn is_structurally_controllable(
    sys: &StructuredSystem,
    selected: &[bool],
) -> ControllabilityCertificate {
    assert_eq!(selected.len(), sys.m(), "selection length");
    certify(sys.a(), sys.b(), &SystemBipartite::fixed(sys), selected)
}

/// Generic rank of `[A_1 … A_p B_1 … B_p]` equal to `n` plus reachability
/// in the union digraph. `selected` is flat and mode-major.
pub fn is_switched_structurally_controllable(
    sw: &SwitchedStructuredSystem,
    selected: &[bool],
) -> ControllabilityCertificate {
    assert_eq!(selected.len(), sw.total_inputs(), "selection length");
    let u = union_system(sw);
    certify(&u.a_union, &u.b_stack, &SystemBipartite::switched(sw), selected)
}

/// Flat mode-major mask from per-mode input lists; `None` on a bad index.
pub fn flatten_selection(sw: &SwitchedStructuredSystem, per_mode: &[Vec<usize>]) -> Option<Vec<bool>> {
    if per_mode.len() != sw.p() {
        return None;
    }
    let offsets = sw.mode_offsets();
    let mut mask = vec![false; sw.total_inputs()];
    for (k, inputs) in per_mode.iter().enumerate() {
        for &j in inputs {
            if j >= sw.modes()[k].b.cols() {
                return None;
            }
            mask[offsets[k] + j] = true;
        }
    }
    Some(mask)
}
