//! Sparsity patterns, fixed and switched structured systems, and the JSON
//! document format used to store them.
//!
//! Indices are 0-based in memory and 1-based in documents.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::Signed;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::rational::{format_rational, parse_rational, Rational};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("{field}: index ({row}, {col}) out of range for a {rows}x{cols} pattern")]
    OutOfRange {
        field: String,
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("{field}: duplicate entry ({row}, {col})")]
    Duplicate { field: String, row: usize, col: usize },
    #[error("{field}: negative cost {value}")]
    NegativeCost { field: String, value: String },
    #[error("{field}: invalid cost {value:?}")]
    InvalidCost { field: String, value: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("switched system has no modes")]
    NoModes,
}

/// A {0,*} matrix stored as its set of free entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SparsityPattern {
    rows: usize,
    cols: usize,
    nonzeros: BTreeSet<(usize, usize)>,
}

impl SparsityPattern {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            nonzeros: BTreeSet::new(),
        }
    }

    /// Builds a pattern from 0-based `(row, col)` pairs, rejecting
    /// out-of-range and repeated entries.
    pub fn from_entries<I>(rows: usize, cols: usize, entries: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut pattern = Self::new(rows, cols);
        for (row, col) in entries {
            if row >= rows || col >= cols {
                return Err(ModelError::OutOfRange {
                    field: "pattern".into(),
                    row: row + 1,
                    col: col + 1,
                    rows,
                    cols,
                });
            }
            if !pattern.nonzeros.insert((row, col)) {
                return Err(ModelError::Duplicate {
                    field: "pattern".into(),
                    row: row + 1,
                    col: col + 1,
                });
            }
        }
        Ok(pattern)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            nonzeros: (0..n).map(|i| (i, i)).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.nonzeros.len()
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.nonzeros.contains(&(row, col))
    }

    /// Nonzeros in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.nonzeros.iter().copied()
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = usize> + '_ {
        self.nonzeros
            .iter()
            .filter(move |&&(_, c)| c == col)
            .map(|&(r, _)| r)
    }

    pub fn is_zero_column(&self, col: usize) -> bool {
        self.column(col).next().is_none()
    }

    /// Keeps only the listed columns, renumbered in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut out = Self::new(self.rows, cols.len());
        for (new, &old) in cols.iter().enumerate() {
            for r in self.column(old) {
                out.nonzeros.insert((r, new));
            }
        }
        out
    }

    /// Entrywise OR of two equally sized patterns.
    pub fn or(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            nonzeros: self.nonzeros.union(&other.nonzeros).copied().collect(),
        }
    }

    /// Horizontal concatenation `[self, other]`.
    pub fn hcat(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        let mut out = self.clone();
        out.cols += other.cols;
        out.nonzeros
            .extend(other.nonzeros.iter().map(|&(r, c)| (r, c + self.cols)));
        out
    }

    pub fn transpose(&self) -> Self {
        Self {
            rows: self.cols,
            cols: self.rows,
            nonzeros: self.nonzeros.iter().map(|&(r, c)| (c, r)).collect(),
        }
    }
}

/// A fixed structured system `(A, B)` with per-input costs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuredSystem {
    a: SparsityPattern,
    b: SparsityPattern,
    costs: Vec<Rational>,
}

impl StructuredSystem {
    pub fn new(
        a: SparsityPattern,
        b: SparsityPattern,
        costs: Vec<Rational>,
    ) -> Result<Self, ModelError> {
        if a.rows() != a.cols() {
            return Err(ModelError::DimensionMismatch(format!(
                "A is {}x{}, expected square",
                a.rows(),
                a.cols()
            )));
        }
        if b.rows() != a.rows() {
            return Err(ModelError::DimensionMismatch(format!(
                "B has {} rows but A has {}",
                b.rows(),
                a.rows()
            )));
        }
        if costs.len() != b.cols() {
            return Err(ModelError::DimensionMismatch(format!(
                "{} costs given for {} inputs",
                costs.len(),
                b.cols()
            )));
        }
        if let Some((i, c)) = costs.iter().enumerate().find(|(_, c)| c.is_negative()) {
            return Err(ModelError::NegativeCost {
                field: format!("costs[{}]", i + 1),
                value: format_rational(c),
            });
        }
        Ok(Self { a, b, costs })
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn m(&self) -> usize {
        self.b.cols()
    }

    pub fn a(&self) -> &SparsityPattern {
        &self.a
    }

    pub fn b(&self) -> &SparsityPattern {
        &self.b
    }

    pub fn costs(&self) -> &[Rational] {
        &self.costs
    }

    pub fn with_costs(&self, costs: Vec<Rational>) -> Result<Self, ModelError> {
        Self::new(self.a.clone(), self.b.clone(), costs)
    }

    /// Inputs whose column of `B` is empty. They can never help.
    pub fn useless_inputs(&self) -> Vec<usize> {
        (0..self.m()).filter(|&j| self.b.is_zero_column(j)).collect()
    }
}

/// One mode `(A_k, B_k)` of a switched system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mode {
    pub a: SparsityPattern,
    pub b: SparsityPattern,
    pub costs: Vec<Rational>,
    /// 1-based column of the document's `B_k` for each retained input.
    pub original_columns: Vec<usize>,
}

impl Mode {
    pub fn m(&self) -> usize {
        self.b.cols()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrippedColumn {
    pub mode: usize,
    pub column: usize,
}

impl fmt::Display for StrippedColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "mode {}: column {} of B is zero and was dropped",
            self.mode + 1,
            self.column
        )
    }
}

/// A switched structured system with `p` modes sharing the state dimension.
/// Every retained input column is nonzero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwitchedStructuredSystem {
    n: usize,
    modes: Vec<Mode>,
}

/// Flat identity of an input of a switched system: mode and column within
/// the mode (both 0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ModeInput {
    pub mode: usize,
    pub input: usize,
}

impl SwitchedStructuredSystem {
    /// Validates the modes and strips zero input columns from each `B_k`.
    pub fn new(modes: Vec<Mode>) -> Result<(Self, Vec<StrippedColumn>), ModelError> {
        let first = modes.first().ok_or(ModelError::NoModes)?;
        let n = first.a.rows();
        let mut stripped = Vec::new();
        let mut kept = Vec::with_capacity(modes.len());
        for (k, mode) in modes.into_iter().enumerate() {
            if mode.a.rows() != n || mode.a.cols() != n {
                return Err(ModelError::DimensionMismatch(format!(
                    "mode {}: A is {}x{}, expected {n}x{n}",
                    k + 1,
                    mode.a.rows(),
                    mode.a.cols()
                )));
            }
            let sys = StructuredSystem::new(mode.a, mode.b, mode.costs).map_err(|e| match e {
                ModelError::DimensionMismatch(msg) => {
                    ModelError::DimensionMismatch(format!("mode {}: {msg}", k + 1))
                }
                ModelError::NegativeCost { field, value } => ModelError::NegativeCost {
                    field: format!("modes[{}].{field}", k + 1),
                    value,
                },
                other => other,
            })?;
            let original = if mode.original_columns.len() == sys.m() {
                mode.original_columns
            } else {
                (1..=sys.m()).collect()
            };
            let keep: Vec<usize> = (0..sys.m()).filter(|&j| !sys.b.is_zero_column(j)).collect();
            stripped.extend(
                (0..sys.m())
                    .filter(|j| !keep.contains(j))
                    .map(|j| StrippedColumn {
                        mode: k,
                        column: original[j],
                    }),
            );
            kept.push(Mode {
                b: sys.b.select_columns(&keep),
                costs: keep.iter().map(|&j| sys.costs[j].clone()).collect(),
                original_columns: keep.iter().map(|&j| original[j]).collect(),
                a: sys.a,
            });
        }
        Ok((Self { n, modes: kept }, stripped))
    }

    /// Lifts a fixed system to a one-mode switched system.
    pub fn from_fixed(sys: &StructuredSystem) -> (Self, Vec<StrippedColumn>) {
        Self::new(vec![Mode {
            a: sys.a.clone(),
            b: sys.b.clone(),
            costs: sys.costs.clone(),
            original_columns: (1..=sys.m()).collect(),
        }])
        .expect("a valid fixed system is a valid single mode")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn total_inputs(&self) -> usize {
        self.modes.iter().map(Mode::m).sum()
    }

    /// All inputs in mode-major order; position in this list is the
    /// column index in `B̂`.
    pub fn flat_inputs(&self) -> Vec<ModeInput> {
        self.modes
            .iter()
            .enumerate()
            .flat_map(|(mode, md)| (0..md.m()).map(move |input| ModeInput { mode, input }))
            .collect()
    }

    pub fn flat_costs(&self) -> Vec<Rational> {
        self.modes.iter().flat_map(|m| m.costs.iter().cloned()).collect()
    }

    /// Column offset of each mode inside `B̂`.
    pub fn mode_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.p());
        let mut acc = 0;
        for m in &self.modes {
            offsets.push(acc);
            acc += m.m();
        }
        offsets
    }

    /// True when every mode carries the same `B` pattern and costs.
    pub fn shares_input_matrix(&self) -> bool {
        let first = &self.modes[0];
        self.modes
            .iter()
            .all(|m| m.b == first.b && m.costs == first.costs)
    }

    /// The system with `B` kept in mode 1 only; all later modes lose
    /// their inputs.
    pub fn fixed_input_reduction(&self) -> Self {
        let modes = self
            .modes
            .iter()
            .enumerate()
            .map(|(k, md)| {
                if k == 0 {
                    md.clone()
                } else {
                    Mode {
                        a: md.a.clone(),
                        b: SparsityPattern::new(self.n, 0),
                        costs: Vec::new(),
                        original_columns: Vec::new(),
                    }
                }
            })
            .collect();
        Self {
            n: self.n,
            modes,
        }
    }

    /// Duplicates mode `k` at the end of the mode list.
    pub fn with_duplicated_mode(&self, k: usize) -> Self {
        let mut modes = self.modes.clone();
        modes.push(self.modes[k].clone());
        Self { n: self.n, modes }
    }
}

/// The union data of a switched system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnionSystem {
    /// `Â = A_1 ∨ … ∨ A_p`
    pub a_union: SparsityPattern,
    /// `B̂ = [B_1, …, B_p]`
    pub b_stack: SparsityPattern,
    /// `Â′ = [A_1, …, A_p]`
    pub a_stack: SparsityPattern,
}

pub fn union_system(sw: &SwitchedStructuredSystem) -> UnionSystem {
    let n = sw.n();
    let mut a_union = SparsityPattern::new(n, n);
    let mut a_stack = SparsityPattern::new(n, 0);
    let mut b_stack = SparsityPattern::new(n, 0);
    for mode in sw.modes() {
        a_union = a_union.or(&mode.a);
        a_stack = a_stack.hcat(&mode.a);
        b_stack = b_stack.hcat(&mode.b);
    }
    UnionSystem {
        a_union,
        b_stack,
        a_stack,
    }
}

impl UnionSystem {
    /// `(Â, B̂)` as a fixed system with the flattened costs.
    pub fn as_fixed(&self, sw: &SwitchedStructuredSystem) -> StructuredSystem {
        StructuredSystem::new(self.a_union.clone(), self.b_stack.clone(), sw.flat_costs())
            .expect("union of valid modes is valid")
    }
}

// ---------------------------------------------------------------------------
// Document format

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemDoc {
    n: usize,
    m: usize,
    #[serde(rename = "A")]
    a: Vec<[usize; 2]>,
    #[serde(rename = "B")]
    b: Vec<[usize; 2]>,
    costs: Vec<Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModeDoc {
    #[serde(rename = "A")]
    a: Vec<[usize; 2]>,
    #[serde(rename = "B")]
    b: Vec<[usize; 2]>,
    costs: Vec<Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SwitchedDoc {
    n: usize,
    modes: Vec<ModeDoc>,
}

#[derive(Serialize)]
struct SystemOut<'a> {
    n: usize,
    m: usize,
    #[serde(rename = "A")]
    a: Vec<[usize; 2]>,
    #[serde(rename = "B")]
    b: Vec<[usize; 2]>,
    costs: Vec<&'a Value>,
}

#[derive(Serialize)]
struct ModeOut<'a> {
    #[serde(rename = "A")]
    a: Vec<[usize; 2]>,
    #[serde(rename = "B")]
    b: Vec<[usize; 2]>,
    costs: Vec<&'a Value>,
}

#[derive(Serialize)]
struct SwitchedOut<'a> {
    n: usize,
    modes: Vec<ModeOut<'a>>,
}

fn pattern_from_doc(
    field: &str,
    rows: usize,
    cols: usize,
    entries: &[[usize; 2]],
) -> Result<SparsityPattern, ModelError> {
    let mut pattern = SparsityPattern::new(rows, cols);
    for (k, &[i, j]) in entries.iter().enumerate() {
        if i == 0 || j == 0 || i > rows || j > cols {
            return Err(ModelError::OutOfRange {
                field: format!("{field}[{}]", k + 1),
                row: i,
                col: j,
                rows,
                cols,
            });
        }
        if !pattern.nonzeros.insert((i - 1, j - 1)) {
            return Err(ModelError::Duplicate {
                field: format!("{field}[{}]", k + 1),
                row: i,
                col: j,
            });
        }
    }
    Ok(pattern)
}

fn costs_from_doc(field: &str, values: &[Value]) -> Result<Vec<Rational>, ModelError> {
    values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let field = format!("{field}[{}]", k + 1);
            let text = match v {
                Value::Number(num) => num.to_string(),
                Value::String(s) => s.clone(),
                other => {
                    return Err(ModelError::InvalidCost {
                        field,
                        value: other.to_string(),
                    })
                }
            };
            let value = parse_rational(&text).ok_or_else(|| ModelError::InvalidCost {
                field: field.clone(),
                value: text.clone(),
            })?;
            if value.is_negative() {
                return Err(ModelError::NegativeCost { field, value: text });
            }
            Ok(value)
        })
        .collect()
}

fn pattern_to_doc(p: &SparsityPattern) -> Vec<[usize; 2]> {
    p.entries().map(|(i, j)| [i + 1, j + 1]).collect()
}

fn cost_to_doc(c: &Rational) -> Value {
    if c.is_integer() {
        if let Ok(v) = c.to_integer().to_string().parse::<u64>() {
            return Value::from(v);
        }
    }
    Value::String(format_rational(c))
}

fn malformed(e: serde_json::Error) -> ModelError {
    ModelError::Malformed(format!("line {} column {}: {e}", e.line(), e.column()))
}

pub fn parse_system(text: &str) -> Result<StructuredSystem, ModelError> {
    let doc: SystemDoc = serde_json::from_str(text).map_err(malformed)?;
    let a = pattern_from_doc("A", doc.n, doc.n, &doc.a)?;
    let b = pattern_from_doc("B", doc.n, doc.m, &doc.b)?;
    let costs = costs_from_doc("costs", &doc.costs)?;
    if costs.len() != doc.m {
        return Err(ModelError::DimensionMismatch(format!(
            "costs has {} entries but m = {}",
            costs.len(),
            doc.m
        )));
    }
    StructuredSystem::new(a, b, costs)
}

/// Parses a switched document. Zero columns of each `B_k` are removed and
/// reported in the returned list.
pub fn parse_switched_system(
    text: &str,
) -> Result<(SwitchedStructuredSystem, Vec<StrippedColumn>), ModelError> {
    let doc: SwitchedDoc = serde_json::from_str(text).map_err(malformed)?;
    if doc.modes.is_empty() {
        return Err(ModelError::NoModes);
    }
    let mut modes = Vec::with_capacity(doc.modes.len());
    for (k, md) in doc.modes.iter().enumerate() {
        let prefix = format!("modes[{}]", k + 1);
        let costs = costs_from_doc(&format!("{prefix}.costs"), &md.costs)?;
        let m = costs.len();
        let a = pattern_from_doc(&format!("{prefix}.A"), doc.n, doc.n, &md.a)?;
        let b = pattern_from_doc(&format!("{prefix}.B"), doc.n, m, &md.b)?;
        modes.push(Mode {
            a,
            b,
            costs,
            original_columns: (1..=m).collect(),
        });
    }
    SwitchedStructuredSystem::new(modes)
}

pub fn serialize_system(sys: &StructuredSystem) -> String {
    let costs: Vec<Value> = sys.costs.iter().map(cost_to_doc).collect();
    let out = SystemOut {
        n: sys.n(),
        m: sys.m(),
        a: pattern_to_doc(&sys.a),
        b: pattern_to_doc(&sys.b),
        costs: costs.iter().collect(),
    };
    serde_json::to_string_pretty(&out).expect("system serializes")
}

pub fn serialize_switched_system(sw: &SwitchedStructuredSystem) -> String {
    let costs: Vec<Vec<Value>> = sw
        .modes
        .iter()
        .map(|m| m.costs.iter().map(cost_to_doc).collect())
        .collect();
    let out = SwitchedOut {
        n: sw.n,
        modes: sw
            .modes
            .iter()
            .zip(&costs)
            .map(|(m, c)| ModeOut {
                a: pattern_to_doc(&m.a),
                b: pattern_to_doc(&m.b),
                costs: c.iter().collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&out).expect("switched system serializes")
}
