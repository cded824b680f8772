//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;
use std::path::PathBuf;

use inputsel_core::graph::SystemBipartite;
use inputsel_core::lp::{LinearProgram, RowSense};
use inputsel_core::model::{Mode, SparsityPattern, StructuredSystem, SwitchedStructuredSystem};
use inputsel_core::rational::{int, Rational};
use inputsel_core::controllability::is_structurally_controllable;
use inputsel_core::controllability::is_switched_structurally_controllable;
use nalgebra::DMatrix;
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Pattern from 0-based entries; repeated entries collapse.
pub fn pattern(rows: usize, cols: usize, entries: &[(usize, usize)]) -> SparsityPattern {
    let mut e = entries.to_vec();
    e.sort_unstable();
    e.dedup();
    SparsityPattern::from_entries(rows, cols, e).unwrap()
}

pub fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn unit_costs(m: usize) -> Vec<Rational> {
    vec![int(1); m]
}

fn random_costs(rng: &mut ChaCha8Rng, m: usize) -> Vec<Rational> {
    (0..m)
        .map(|_| {
            if rng.gen_bool(0.15) {
                Rational::new(rng.gen_range(1..20).into(), rng.gen_range(2..5).into())
            } else {
                int(rng.gen_range(0..10))
            }
        })
        .collect()
}

fn random_pattern(rng: &mut ChaCha8Rng, rows: usize, cols: usize, p: f64) -> SparsityPattern {
    let mut e = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            if rng.gen_bool(p) {
                e.push((i, j));
            }
        }
    }
    pattern(rows, cols, &e)
}

/// Random pattern pair with no guarantees.
pub fn random_raw_system(rng: &mut ChaCha8Rng, n_max: usize, m_max: usize) -> StructuredSystem {
    let n = rng.gen_range(1..=n_max);
    let m = rng.gen_range(1..=m_max);
    let (pa, pb) = (rng.gen_range(0.1..0.45), rng.gen_range(0.15..0.5));
    let a = random_pattern(rng, n, n, pa);
    let b = random_pattern(rng, n, m, pb);
    let costs = random_costs(rng, m);
    StructuredSystem::new(a, b, costs).unwrap()
}

/// Random system that is structurally controllable with every input.
pub fn random_system(rng: &mut ChaCha8Rng, n_max: usize, m_max: usize) -> StructuredSystem {
    loop {
        let sys = random_raw_system(rng, n_max, m_max);
        if is_structurally_controllable(&sys, &vec![true; sys.m()]).controllable {
            return sys;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Sssi,
    ExtendedSssi,
    RowMonotone,
    ColumnMonotone,
    Permutable,
    BlockDiagonal,
}

pub const FAMILIES: [Family; 6] = [
    Family::Sssi,
    Family::ExtendedSssi,
    Family::RowMonotone,
    Family::ColumnMonotone,
    Family::Permutable,
    Family::BlockDiagonal,
];

fn monotone_vector(rng: &mut ChaCha8Rng, len: usize) -> Vec<u8> {
    let ones = rng.gen_range(0..=len);
    let mut v: Vec<u8> = (0..len).map(|i| u8::from(i < ones)).collect();
    if rng.gen_bool(0.5) {
        v.reverse();
    }
    v
}

fn row_monotone(rng: &mut ChaCha8Rng, r: usize, m: usize) -> Vec<Vec<u8>> {
    (0..r).map(|_| monotone_vector(rng, m)).collect()
}

fn column_monotone(rng: &mut ChaCha8Rng, r: usize, m: usize) -> Vec<Vec<u8>> {
    let cols: Vec<Vec<u8>> = (0..m).map(|_| monotone_vector(rng, r)).collect();
    (0..r).map(|i| (0..m).map(|j| cols[j][i]).collect()).collect()
}

fn permute(rng: &mut ChaCha8Rng, w: Vec<Vec<u8>>) -> Vec<Vec<u8>> {
    let r = w.len();
    let m = w.first().map_or(0, Vec::len);
    let mut rp: Vec<usize> = (0..r).collect();
    let mut cp: Vec<usize> = (0..m).collect();
    rp.shuffle(rng);
    cp.shuffle(rng);
    rp.iter().map(|&i| cp.iter().map(|&j| w[i][j]).collect()).collect()
}

/// An `r × m` incidence matrix from the requested family.
pub fn family_matrix(rng: &mut ChaCha8Rng, family: Family, r: usize, m: usize) -> Vec<Vec<u8>> {
    match family {
        Family::Sssi => {
            let mut w = vec![vec![0; m]; r];
            for j in 0..m {
                if rng.gen_bool(0.85) {
                    w[rng.gen_range(0..r)][j] = 1;
                }
            }
            w
        }
        Family::ExtendedSssi => {
            let groups: Vec<usize> = (0..r).map(|_| rng.gen_range(0..r.min(3))).collect();
            let col_group: Vec<Option<usize>> = (0..m)
                .map(|_| rng.gen_bool(0.85).then(|| rng.gen_range(0..r.min(3))))
                .collect();
            (0..r)
                .map(|i| (0..m).map(|j| u8::from(col_group[j] == Some(groups[i]))).collect())
                .collect()
        }
        Family::RowMonotone => row_monotone(rng, r, m),
        Family::ColumnMonotone => column_monotone(rng, r, m),
        Family::Permutable => {
            let w = if rng.gen_bool(0.5) {
                row_monotone(rng, r, m)
            } else {
                column_monotone(rng, r, m)
            };
            permute(rng, w)
        }
        Family::BlockDiagonal => {
            let mut w = vec![vec![0; m]; r];
            let (mut r0, mut c0) = (0, 0);
            while r0 < r && c0 < m {
                let br = rng.gen_range(1..=(r - r0).min(3));
                let bc = rng.gen_range(1..=(m - c0).min(3));
                let block = if rng.gen_bool(0.5) {
                    row_monotone(rng, br, bc)
                } else {
                    column_monotone(rng, br, bc)
                };
                for i in 0..br {
                    for j in 0..bc {
                        w[r0 + i][c0 + j] = block[i][j];
                    }
                }
                r0 += br;
                c0 += bc;
            }
            permute(rng, w)
        }
    }
}

/// A system whose source components and incidence matrix are prescribed.
/// Source components are small cycles; every other state has an edge from
/// an earlier state so it never becomes a source. Returns `None` if the
/// result is not controllable with all inputs.
pub fn system_with_incidence(
    rng: &mut ChaCha8Rng,
    w: &[Vec<u8>],
    n_max: usize,
) -> Option<StructuredSystem> {
    let r = w.len();
    let m = w[0].len();
    let mut sizes: Vec<usize> = vec![1; r];
    let mut n = r;
    while n < n_max && rng.gen_bool(0.4) {
        sizes[rng.gen_range(0..r)] += 1;
        n += 1;
    }
    let extra = rng.gen_range(0..=n_max.saturating_sub(n));
    let mut edges = Vec::new();
    let mut members = Vec::new();
    let mut next = 0;
    for &s in &sizes {
        let states: Vec<usize> = (next..next + s).collect();
        next += s;
        if s > 1 {
            for k in 0..s {
                edges.push((states[(k + 1) % s], states[k]));
            }
        }
        for &x in &states {
            if rng.gen_bool(0.5) {
                edges.push((x, x));
            }
        }
        members.push(states);
    }
    for x in next..next + extra {
        edges.push((x, rng.gen_range(0..x)));
        for y in 0..x {
            if rng.gen_bool(0.15) {
                edges.push((x, y));
            }
        }
        if rng.gen_bool(0.4) {
            edges.push((x, x));
        }
    }
    let n = next + extra;
    let mut b = Vec::new();
    for j in 0..m {
        for i in 0..r {
            if w[i][j] == 1 {
                let comp = &members[i];
                b.push((comp[rng.gen_range(0..comp.len())], j));
            }
        }
        for x in next..n {
            if rng.gen_bool(0.2) {
                b.push((x, j));
            }
        }
    }
    let sys = StructuredSystem::new(pattern(n, n, &edges), pattern(n, m, &b), random_costs(rng, m)).ok()?;
    is_structurally_controllable(&sys, &vec![true; m])
        .controllable
        .then_some(sys)
}

/// Controllable system whose incidence matrix belongs to `family`.
pub fn random_family_system(rng: &mut ChaCha8Rng, family: Family, n_max: usize, m_max: usize) -> StructuredSystem {
    loop {
        let r = rng.gen_range(1..=n_max.min(4));
        let m = rng.gen_range(1..=m_max);
        let w = family_matrix(rng, family, r, m);
        if w.iter().any(|row| row.iter().all(|&v| v == 0)) {
            continue;
        }
        if let Some(sys) = system_with_incidence(rng, &w, n_max) {
            return sys;
        }
    }
}

fn random_mode(rng: &mut ChaCha8Rng, n: usize, m: usize, p_a: f64) -> Mode {
    Mode {
        a: random_pattern(rng, n, n, p_a),
        b: random_pattern(rng, n, m, 0.3),
        costs: random_costs(rng, m),
        original_columns: (1..=m).collect(),
    }
}

/// Two-mode system, switched-controllable with all inputs, without any
/// structural promise.
pub fn random_switched(rng: &mut ChaCha8Rng, n_max: usize, m_max: usize) -> SwitchedStructuredSystem {
    loop {
        let n = rng.gen_range(1..=n_max);
        let modes = (0..2)
            .map(|_| {
                let m = rng.gen_range(1..=m_max);
                random_mode(rng, n, m, 0.2)
            })
            .collect();
        let Ok((sw, _)) = SwitchedStructuredSystem::new(modes) else { continue };
        if sw.total_inputs() > 0
            && is_switched_structurally_controllable(&sw, &vec![true; sw.total_inputs()]).controllable
        {
            return sw;
        }
    }
}

/// Two-mode system satisfying the joint SSSI constraint: every input of
/// every mode touches at most one source component of the union digraph.
pub fn random_joint_sssi(rng: &mut ChaCha8Rng, n_max: usize, m_max: usize) -> SwitchedStructuredSystem {
    use inputsel_core::graph::{strongly_connected_components, StateDigraph};
    loop {
        let n = rng.gen_range(2..=n_max);
        let a1 = random_pattern(rng, n, n, 0.2);
        let a2 = random_pattern(rng, n, n, 0.2);
        let union = a1.or(&a2);
        let scc = strongly_connected_components(&StateDigraph::from_pattern(&union));
        let sources: Vec<Vec<usize>> = scc
            .source_components()
            .into_iter()
            .map(|c| scc.components[c].clone())
            .collect();
        let non_source: Vec<usize> = (0..n)
            .filter(|&x| !sources.iter().any(|s| s.contains(&x)))
            .collect();
        let mut modes = Vec::new();
        for a in [a1, a2] {
            let m = rng.gen_range(1..=m_max);
            let mut b = Vec::new();
            for j in 0..m {
                if rng.gen_bool(0.8) {
                    let comp = &sources[rng.gen_range(0..sources.len())];
                    for &x in comp {
                        if rng.gen_bool(0.6) {
                            b.push((x, j));
                        }
                    }
                }
                for &x in &non_source {
                    if rng.gen_bool(0.25) {
                        b.push((x, j));
                    }
                }
            }
            modes.push(Mode {
                a,
                b: pattern(n, m, &b),
                costs: random_costs(rng, m),
                original_columns: (1..=m).collect(),
            });
        }
        let Ok((sw, _)) = SwitchedStructuredSystem::new(modes) else { continue };
        if sw.total_inputs() > 0
            && is_switched_structurally_controllable(&sw, &vec![true; sw.total_inputs()]).controllable
        {
            return sw;
        }
    }
}

/// Two or three modes sharing one time-invariant `B`, controllable with
/// all of its columns.
pub fn random_shared_b(rng: &mut ChaCha8Rng, n_max: usize, m_max: usize) -> SwitchedStructuredSystem {
    loop {
        let n = rng.gen_range(1..=n_max);
        let m = rng.gen_range(1..=m_max);
        let b = random_pattern(rng, n, m, 0.3);
        if (0..m).any(|j| b.is_zero_column(j)) {
            continue;
        }
        let costs = random_costs(rng, m);
        let p = rng.gen_range(2..=3);
        let modes = (0..p)
            .map(|_| Mode {
                a: random_pattern(rng, n, n, 0.2),
                b: b.clone(),
                costs: costs.clone(),
                original_columns: (1..=m).collect(),
            })
            .collect();
        let (sw, _) = SwitchedStructuredSystem::new(modes).unwrap();
        let reduced = sw.fixed_input_reduction();
        if is_switched_structurally_controllable(&reduced, &vec![true; m]).controllable {
            return sw;
        }
    }
}

// ---------------------------------------------------------------------------
// Oracles

/// States reachable from the selected inputs, by plain BFS over adjacency
/// rebuilt from the raw pattern.
pub fn bfs_reachable(a: &SparsityPattern, b: &SparsityPattern, selected: &[bool]) -> Vec<bool> {
    let n = a.rows();
    let mut seen = vec![false; n];
    let mut q = VecDeque::new();
    for j in 0..b.cols() {
        if !selected[j] {
            continue;
        }
        for i in 0..n {
            if b.contains(i, j) && !seen[i] {
                seen[i] = true;
                q.push_back(i);
            }
        }
    }
    while let Some(v) = q.pop_front() {
        for i in 0..n {
            if a.contains(i, v) && !seen[i] {
                seen[i] = true;
                q.push_back(i);
            }
        }
    }
    seen
}

/// Kuhn's augmenting-path algorithm on `left × right` adjacency.
pub fn kuhn_matching_size(adj: &[Vec<usize>], n_right: usize) -> usize {
    fn try_kuhn(v: usize, adj: &[Vec<usize>], used: &mut [bool], mt: &mut [Option<usize>]) -> bool {
        for &to in &adj[v] {
            if used[to] {
                continue;
            }
            used[to] = true;
            if mt[to].is_none() || try_kuhn(mt[to].unwrap(), adj, used, mt) {
                mt[to] = Some(v);
                return true;
            }
        }
        false
    }
    let mut mt = vec![None; n_right];
    let mut size = 0;
    for v in 0..adj.len() {
        let mut used = vec![false; n_right];
        if try_kuhn(v, adj, &mut used, &mut mt) {
            size += 1;
        }
    }
    size
}

pub fn pattern_matching_size(p: &SparsityPattern) -> usize {
    let adj: Vec<Vec<usize>> = (0..p.rows())
        .map(|i| (0..p.cols()).filter(|&j| p.contains(i, j)).collect())
        .collect();
    kuhn_matching_size(&adj, p.cols())
}

/// Switched rank test rebuilt from scratch: matching size of
/// `[A_1 … A_p B_sel]` and reachability in the union digraph.
pub fn switched_oracle(sw: &SwitchedStructuredSystem, selected: &[bool]) -> bool {
    let n = sw.n();
    let mut stacked = SparsityPattern::new(n, 0);
    let mut union = SparsityPattern::new(n, n);
    for md in sw.modes() {
        stacked = stacked.hcat(&md.a);
        union = union.or(&md.a);
    }
    let mut b_cols = Vec::new();
    let mut flat = 0;
    for md in sw.modes() {
        for j in 0..md.b.cols() {
            if selected[flat] {
                b_cols.push((md, j));
            }
            flat += 1;
        }
    }
    let mut b_entries = Vec::new();
    for (k, (md, j)) in b_cols.iter().enumerate() {
        for i in 0..n {
            if md.b.contains(i, *j) {
                b_entries.push((i, k));
            }
        }
    }
    let b_sel = pattern(n, b_cols.len(), &b_entries);
    let full = stacked.hcat(&b_sel);
    let reach = bfs_reachable(&union, &b_sel, &vec![true; b_cols.len()]);
    pattern_matching_size(&full) == n && reach.iter().all(|&r| r)
}

/// Laplace expansion along the first row.
pub fn cofactor_det(m: &[Vec<i64>]) -> i64 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    if n == 1 {
        return m[0][0];
    }
    let mut total = 0;
    for j in 0..n {
        if m[0][j] == 0 {
            continue;
        }
        let minor: Vec<Vec<i64>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| *v).collect())
            .collect();
        let sign = if j % 2 == 0 { 1 } else { -1 };
        total += sign * m[0][j] * cofactor_det(&minor);
    }
    total
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Every square submatrix has determinant in `{0, ±1}`.
pub fn tu_by_determinants(m: &[Vec<i64>]) -> bool {
    let r = m.len();
    let c = m.first().map_or(0, Vec::len);
    for k in 1..=r.min(c) {
        for rs in subsets(r, k) {
            for cs in subsets(c, k) {
                let sub: Vec<Vec<i64>> = rs.iter().map(|&i| cs.iter().map(|&j| m[i][j]).collect()).collect();
                if cofactor_det(&sub).abs() > 1 {
                    return false;
                }
            }
        }
    }
    true
}

pub fn numeric_rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > 1e-8 * max).count()
}

fn realize(p: &SparsityPattern, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(p.rows(), p.cols(), |i, j| {
        if p.contains(i, j) {
            rng.gen_range(1.0..2.0)
        } else {
            0.0
        }
    })
}

fn majority(votes: [usize; 3]) -> usize {
    if votes[0] == votes[1] || votes[0] == votes[2] {
        votes[0]
    } else {
        votes[1]
    }
}

/// Rank of a random realization, majority over three seeds.
pub fn numeric_generic_rank(p: &SparsityPattern, seed: u64) -> usize {
    let votes = [0, 1, 2].map(|s| {
        let mut r = rng(seed * 3 + s);
        numeric_rank(&realize(p, &mut r))
    });
    majority(votes)
}

/// Kalman rank test on a random realization, majority over three seeds.
pub fn kalman_controllable(sys: &StructuredSystem, selected: &[bool], seed: u64) -> bool {
    let n = sys.n();
    let cols: Vec<usize> = (0..sys.m()).filter(|&j| selected[j]).collect();
    let votes = [0, 1, 2].map(|s| {
        let mut r = rng(seed * 3 + s);
        let a = realize(sys.a(), &mut r);
        let b_full = realize(sys.b(), &mut r);
        let b = DMatrix::from_fn(n, cols.len(), |i, k| b_full[(i, cols[k])]);
        let mut blocks = Vec::new();
        let mut cur = b.clone();
        for _ in 0..n {
            blocks.push(cur.clone());
            cur = &a * &cur;
        }
        let total_cols = cols.len() * n;
        let mut ctrb = DMatrix::zeros(n, total_cols);
        for (k, blk) in blocks.iter().enumerate() {
            for i in 0..n {
                for j in 0..cols.len() {
                    ctrb[(i, k * cols.len() + j)] = blk[(i, j)];
                }
            }
        }
        numeric_rank(&ctrb)
    });
    majority(votes) == n
}

/// Minimum matched-input cost over all `X_L`-saturating matchings, by
/// exhaustive recursion over left vertices.
pub fn min_cost_matching_enumerated(bip: &SystemBipartite, costs: &[Rational]) -> Option<Rational> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); bip.n];
    for &(l, r) in &bip.edges {
        adj[l].push(r);
    }
    fn go(
        l: usize,
        adj: &[Vec<usize>],
        used: &mut Vec<bool>,
        num_inputs: usize,
        costs: &[Rational],
        acc: Rational,
        best: &mut Option<Rational>,
    ) {
        if l == adj.len() {
            if best.as_ref().map_or(true, |b| acc < *b) {
                *best = Some(acc);
            }
            return;
        }
        for &r in &adj[l] {
            if used[r] {
                continue;
            }
            used[r] = true;
            let add = if r < num_inputs { costs[r].clone() } else { Rational::zero() };
            go(l + 1, adj, used, num_inputs, costs, &acc + add, best);
            used[r] = false;
        }
    }
    let mut best = None;
    let mut used = vec![false; bip.right.len()];
    go(0, &adj, &mut used, bip.num_inputs, costs, Rational::zero(), &mut best);
    best
}

/// Optimum of a bounded LP by enumerating every choice of tight
/// constraints; `None` when infeasible.
pub fn lp_by_vertex_enumeration(lp: &LinearProgram) -> Option<Rational> {
    let n = lp.num_vars();
    // Constraints as (coeffs, sense, rhs) over dense vectors.
    let mut cons: Vec<(Vec<Rational>, RowSense, Rational)> = Vec::new();
    for row in &lp.rows {
        let mut v = vec![Rational::zero(); n];
        for (j, a) in &row.coeffs {
            v[*j] += a;
        }
        cons.push((v, row.sense, row.rhs.clone()));
    }
    for j in 0..n {
        let mut v = vec![Rational::zero(); n];
        v[j] = int(1);
        cons.push((v.clone(), RowSense::Ge, Rational::zero()));
        if let Some(u) = &lp.upper[j] {
            cons.push((v, RowSense::Le, u.clone()));
        }
    }
    let feasible = |x: &[Rational]| {
        cons.iter().all(|(a, s, b)| {
            let act: Rational = a.iter().zip(x).map(|(p, q)| p * q).fold(Rational::zero(), |s, v| s + v);
            match s {
                RowSense::Le => act <= *b,
                RowSense::Ge => act >= *b,
                RowSense::Eq => act == *b,
            }
        })
    };
    let mut best: Option<Rational> = None;
    for pick in subsets(cons.len(), n) {
        let mut mat: Vec<Vec<Rational>> = pick
            .iter()
            .map(|&k| {
                let mut row = cons[k].0.clone();
                row.push(cons[k].2.clone());
                row
            })
            .collect();
        let Some(x) = solve_square(&mut mat) else { continue };
        if !feasible(&x) {
            continue;
        }
        let obj = lp.objective.iter().zip(&x).map(|(c, v)| c * v).fold(Rational::zero(), |s, v| s + v);
        if best.as_ref().map_or(true, |b| obj < *b) {
            best = Some(obj);
        }
    }
    best
}

fn solve_square(a: &mut [Vec<Rational>]) -> Option<Vec<Rational>> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = &a[r][col] / &a[col][col];
                for k in col..=n {
                    let v = &f * &a[col][k];
                    a[r][k] -= v;
                }
            }
        }
    }
    Some((0..n).map(|i| &a[i][n] / &a[i][i]).collect())
}

pub fn is_nonneg(v: &Rational) -> bool {
    !v.is_negative()
}
