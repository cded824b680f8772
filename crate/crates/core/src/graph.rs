//! Digraphs, strongly connected components, bipartite matchings.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use num_traits::One;

use crate::lp::{solve, LinearProgram, LpError, RowSense};
use crate::model::{SparsityPattern, StructuredSystem, SwitchedStructuredSystem};
use crate::rational::Rational;

/// State digraph of a pattern `A`: edge `x_j -> x_i` whenever `A[i][j]` is
/// nonzero. Adjacency lists are sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateDigraph {
    out: Vec<Vec<usize>>,
}

impl StateDigraph {
    pub fn from_pattern(a: &SparsityPattern) -> Self {
        let mut out = vec![Vec::new(); a.cols()];
        for (i, j) in a.entries() {
            out[j].push(i);
        }
        for list in &mut out {
            list.sort_unstable();
            list.dedup();
        }
        Self { out }
    }

    pub fn num_vertices(&self) -> usize {
        self.out.len()
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(u, vs)| vs.iter().map(move |&v| (u, v)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SccDecomposition {
    /// Components ordered by their smallest member; members sorted.
    pub components: Vec<Vec<usize>>,
    pub component_of: Vec<usize>,
    /// Edges of the condensation, sorted and deduplicated.
    pub condensation: Vec<(usize, usize)>,
    /// Components with no incoming edge from another component.
    pub is_source: Vec<bool>,
}

impl SccDecomposition {
    pub fn source_components(&self) -> Vec<usize> {
        (0..self.components.len())
            .filter(|&c| self.is_source[c])
            .collect()
    }
}

/// Tarjan's algorithm, iterative.
pub fn strongly_connected_components(g: &StateDigraph) -> SccDecomposition {
    let n = g.num_vertices();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut raw: Vec<Vec<usize>> = Vec::new();
    let mut next = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if let Some(&w) = g.successors(v).get(*pos) {
                *pos += 1;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().unwrap();
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                raw.push(comp);
            }
        }
    }
    raw.sort_by_key(|c| c[0]);
    let mut component_of = vec![0; n];
    for (c, comp) in raw.iter().enumerate() {
        for &v in comp {
            component_of[v] = c;
        }
    }
    let mut cond = BTreeSet::new();
    for (u, v) in g.edges() {
        let (cu, cv) = (component_of[u], component_of[v]);
        if cu != cv {
            cond.insert((cu, cv));
        }
    }
    let mut is_source = vec![true; raw.len()];
    for &(_, cv) in &cond {
        is_source[cv] = false;
    }
    SccDecomposition {
        components: raw,
        component_of,
        condensation: cond.into_iter().collect(),
        is_source,
    }
}

/// States reachable from the selected input columns of `b` through `a`.
pub fn input_reachable_states(
    a: &SparsityPattern,
    b: &SparsityPattern,
    selected: &[bool],
) -> Vec<bool> {
    let g = StateDigraph::from_pattern(a);
    let mut seen = vec![false; a.rows()];
    let mut queue = VecDeque::new();
    for (i, j) in b.entries() {
        if selected[j] && !seen[i] {
            seen[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &w in g.successors(v) {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Plain bipartite graph with sorted adjacency from left to right.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteGraph {
    pub n_left: usize,
    pub n_right: usize,
    pub adj: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    pub fn new(n_left: usize, n_right: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); n_left];
        for (l, r) in edges {
            adj[l].push(r);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Self {
            n_left,
            n_right,
            adj,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    pub left: Vec<Option<usize>>,
    pub right: Vec<Option<usize>>,
}

impl Matching {
    pub fn size(&self) -> usize {
        self.left.iter().flatten().count()
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.left
            .iter()
            .enumerate()
            .filter_map(|(l, r)| r.map(|r| (l, r)))
            .collect()
    }

    pub fn saturates_left(&self) -> bool {
        self.left.iter().all(Option::is_some)
    }
}

/// Hopcroft-Karp. Vertices and neighbours are scanned in increasing order.
pub fn maximum_matching(g: &BipartiteGraph) -> Matching {
    let mut m = Matching {
        left: vec![None; g.n_left],
        right: vec![None; g.n_right],
    };
    let mut dist = vec![usize::MAX; g.n_left];
    loop {
        // BFS layering from free left vertices.
        let mut queue = VecDeque::new();
        for l in 0..g.n_left {
            if m.left[l].is_none() {
                dist[l] = 0;
                queue.push_back(l);
            } else {
                dist[l] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(l) = queue.pop_front() {
            for &r in &g.adj[l] {
                match m.right[r] {
                    None => found = true,
                    Some(l2) if dist[l2] == usize::MAX => {
                        dist[l2] = dist[l] + 1;
                        queue.push_back(l2);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            return m;
        }
        let mut it = vec![0usize; g.n_left];
        for l in 0..g.n_left {
            if m.left[l].is_none() {
                augment(g, &mut m, &mut dist, &mut it, l);
            }
        }
    }
}

fn augment(
    g: &BipartiteGraph,
    m: &mut Matching,
    dist: &mut [usize],
    it: &mut [usize],
    start: usize,
) -> bool {
    // Iterative DFS along the layered graph.
    let mut path: Vec<usize> = vec![start];
    while let Some(&l) = path.last() {
        let mut advanced = false;
        while it[l] < g.adj[l].len() {
            let r = g.adj[l][it[l]];
            it[l] += 1;
            match m.right[r] {
                None => {
                    // Flip the path ending in r.
                    let mut r = r;
                    while let Some(l) = path.pop() {
                        let prev = m.left[l];
                        m.left[l] = Some(r);
                        m.right[r] = Some(l);
                        match prev {
                            Some(p) => r = p,
                            None => break,
                        }
                    }
                    return true;
                }
                Some(l2) if dist[l2] == dist[l] + 1 => {
                    path.push(l2);
                    advanced = true;
                    break;
                }
                _ => {}
            }
        }
        if !advanced {
            dist[l] = usize::MAX;
            path.pop();
        }
    }
    false
}

/// A left set `S` whose neighbourhood is smaller than `S`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HallViolator {
    pub left: Vec<usize>,
    pub neighbours: Vec<usize>,
}

/// Alternating-path search from unmatched left vertices of a maximum
/// matching; `None` when the matching saturates the left side.
pub fn hall_violator(g: &BipartiteGraph, m: &Matching) -> Option<HallViolator> {
    if m.saturates_left() {
        return None;
    }
    let mut seen_l = vec![false; g.n_left];
    let mut seen_r = vec![false; g.n_right];
    let mut queue = VecDeque::new();
    for l in 0..g.n_left {
        if m.left[l].is_none() {
            seen_l[l] = true;
            queue.push_back(l);
        }
    }
    while let Some(l) = queue.pop_front() {
        for &r in &g.adj[l] {
            if seen_r[r] {
                continue;
            }
            seen_r[r] = true;
            if let Some(l2) = m.right[r] {
                if !seen_l[l2] {
                    seen_l[l2] = true;
                    queue.push_back(l2);
                }
            }
        }
    }
    Some(HallViolator {
        left: (0..g.n_left).filter(|&l| seen_l[l]).collect(),
        neighbours: (0..g.n_right).filter(|&r| seen_r[r]).collect(),
    })
}

/// Right-hand vertex of a system bipartite graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RightVertex {
    /// Flat input index (mode-major for switched systems).
    Input(usize),
    /// Copy of state `state` belonging to mode `mode` (always 0 for fixed systems).
    State { mode: usize, state: usize },
}

/// The bipartite graph `B(A, B)` with left side `X_L` and right side `U`
/// followed by `X_R`. For a switched system the right side holds every
/// flat input followed by one copy of `X_R` per mode.
///
/// Edge order: input edges grouped by input (states ascending), then
/// state edges mode by mode, row-major within a mode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemBipartite {
    pub n: usize,
    pub num_inputs: usize,
    pub right: Vec<RightVertex>,
    /// `(left state, right vertex index)`.
    pub edges: Vec<(usize, usize)>,
    /// Edge indices incident to each flat input.
    pub input_edges: Vec<Vec<usize>>,
}

impl SystemBipartite {
    pub fn fixed(sys: &StructuredSystem) -> Self {
        Self::build(sys.n(), &[(sys.a(), sys.b())])
    }

    pub fn switched(sw: &SwitchedStructuredSystem) -> Self {
        let parts: Vec<_> = sw.modes().iter().map(|m| (&m.a, &m.b)).collect();
        Self::build(sw.n(), &parts)
    }

    fn build(n: usize, parts: &[(&SparsityPattern, &SparsityPattern)]) -> Self {
        let num_inputs: usize = parts.iter().map(|(_, b)| b.cols()).sum();
        let mut right: Vec<RightVertex> = (0..num_inputs).map(RightVertex::Input).collect();
        for mode in 0..parts.len() {
            right.extend((0..n).map(|state| RightVertex::State { mode, state }));
        }
        let mut edges = Vec::new();
        let mut input_edges = vec![Vec::new(); num_inputs];
        let mut flat = 0;
        for (_, b) in parts {
            for j in 0..b.cols() {
                for i in b.column(j) {
                    input_edges[flat].push(edges.len());
                    edges.push((i, flat));
                }
                flat += 1;
            }
        }
        for (mode, (a, _)) in parts.iter().enumerate() {
            for (i, j) in a.entries() {
                edges.push((i, num_inputs + mode * n + j));
            }
        }
        Self {
            n,
            num_inputs,
            right,
            edges,
            input_edges,
        }
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_input_edges(&self) -> usize {
        self.input_edges.iter().map(Vec::len).sum()
    }

    /// Graph keeping state edges and the edges of selected inputs only.
    pub fn restricted(&self, selected: &[bool]) -> BipartiteGraph {
        let keep = |&&(_, r): &&(usize, usize)| r >= self.num_inputs || selected[r];
        BipartiteGraph::new(
            self.n,
            self.right.len(),
            self.edges.iter().filter(keep).copied(),
        )
    }

    pub fn graph(&self) -> BipartiteGraph {
        BipartiteGraph::new(self.n, self.right.len(), self.edges.iter().copied())
    }

    /// Graph with state edges only (right side still indexed as in `right`).
    pub fn state_part(&self) -> BipartiteGraph {
        self.restricted(&vec![false; self.num_inputs])
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MatchingCostError {
    #[error("no matching saturates the state vertices even with every input")]
    NotSaturable(HallViolator),
    #[error(transparent)]
    Solver(#[from] LpError),
}

/// Cheapest total cost of the inputs used by a matching that saturates
/// `X_L`, over all such matchings. Solved as an LP over the edge variables;
/// the assignment rows form a bipartite incidence matrix, so the optimal
/// vertex is integral. `costs` is indexed by flat input.
pub fn min_cost_max_matching_inputs(
    bip: &SystemBipartite,
    costs: &[Rational],
) -> Result<(Vec<(usize, RightVertex)>, Rational), MatchingCostError> {
    let g = bip.graph();
    let m = maximum_matching(&g);
    if let Some(h) = hall_violator(&g, &m) {
        return Err(MatchingCostError::NotSaturable(h));
    }
    let ne = bip.num_edges();
    let mut lp = LinearProgram::new(ne);
    for (j, edges) in bip.input_edges.iter().enumerate() {
        for &e in edges {
            lp.objective[e] = costs[j].clone();
        }
    }
    for i in 0..bip.n {
        let coeffs = (0..ne)
            .filter(|&e| bip.edges[e].0 == i)
            .map(|e| (e, Rational::one()))
            .collect();
        lp.add_row(coeffs, RowSense::Eq, Rational::one());
    }
    for rv in 0..bip.right.len() {
        let coeffs: Vec<_> = (0..ne)
            .filter(|&e| bip.edges[e].1 == rv)
            .map(|e| (e, Rational::one()))
            .collect();
        if !coeffs.is_empty() {
            lp.add_row(coeffs, RowSense::Le, Rational::one());
        }
    }
    lp.upper = vec![Some(Rational::one()); ne];
    let sol = solve(&lp)?;
    assert!(sol.is_optimal(), "a saturating matching exists");
    let pairs = (0..ne)
        .filter(|&e| sol.x[e].is_one())
        .map(|e| (bip.edges[e].0, bip.right[bip.edges[e].1]))
        .collect();
    assert!(
        sol.x.iter().all(|v| v.is_integer()),
        "matching LP returned a fractional vertex"
    );
    Ok((pairs, sol.objective))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pattern(n: usize, m: usize, e: &[(usize, usize)]) -> SparsityPattern {
        SparsityPattern::from_entries(n, m, e.iter().copied()).unwrap()
    }

    #[test]
    fn scc_ordering_and_sources() {
        // 0 <-> 1, 1 -> 2, 3 alone, 3 -> 2
        let a = pattern(4, 4, &[(1, 0), (0, 1), (2, 1), (2, 3)]);
        let d = strongly_connected_components(&StateDigraph::from_pattern(&a));
        assert_eq!(d.components, vec![vec![0, 1], vec![2], vec![3]]);
        assert_eq!(d.condensation, vec![(0, 1), (2, 1)]);
        assert_eq!(d.source_components(), vec![0, 2]);
    }

    #[test]
    fn deep_chain_does_not_overflow() {
        let n = 50_000;
        let e: Vec<_> = (0..n - 1).map(|i| (i + 1, i)).collect();
        let d = strongly_connected_components(&StateDigraph::from_pattern(&pattern(n, n, &e)));
        assert_eq!(d.components.len(), n);
        assert_eq!(d.source_components(), vec![0]);
    }

    #[test]
    fn matching_and_hall_witness() {
        // Left 0,1,2 all only adjacent to right 0 or 1.
        let g = BipartiteGraph::new(3, 3, [(0, 0), (1, 0), (2, 0), (2, 1)]);
        let m = maximum_matching(&g);
        assert_eq!(m.size(), 2);
        let h = hall_violator(&g, &m).unwrap();
        assert!(h.neighbours.len() < h.left.len());
        assert_eq!(h.neighbours, vec![0]);
    }

    #[test]
    fn system_bipartite_layout() {
        let a = pattern(2, 2, &[(1, 0)]);
        let b = pattern(2, 1, &[(0, 0)]);
        let sys = StructuredSystem::new(a, b, vec![crate::rational::int(1)]).unwrap();
        let sb = SystemBipartite::fixed(&sys);
        assert_eq!(sb.edges, vec![(0, 0), (1, 1)]);
        assert_eq!(sb.right[1], RightVertex::State { mode: 0, state: 0 });
        assert!(maximum_matching(&sb.graph()).saturates_left());
        assert!(!maximum_matching(&sb.state_part()).saturates_left());
    }
}
