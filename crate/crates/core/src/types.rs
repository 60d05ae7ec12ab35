//! Value types shared by every construction and by the verifier.
//!
//! Norms are always carried squared. Square roots are only taken when a
//! matrix entry is emitted.

use serde::Serialize;

use crate::error::Error;

/// Comparison tolerances.
///
/// `branch_eps` steers the algorithmic decisions (singleton vs. block,
/// readiness inequalities); `verify_eps` bounds the deviations accepted by
/// the verifier. Both are absolute for quantities of order one and grow
/// linearly with the magnitude of the operands compared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub branch_eps: f64,
    pub verify_eps: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            branch_eps: 1e-12,
            verify_eps: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn new(branch_eps: f64, verify_eps: f64) -> Result<Self, Error> {
        if !(branch_eps > 0.0 && branch_eps <= verify_eps && verify_eps.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "tolerances must satisfy 0 < branch_eps <= verify_eps (got {branch_eps}, {verify_eps})"
            )));
        }
        Ok(Tolerances {
            branch_eps,
            verify_eps,
        })
    }

    /// Same branch tolerance, different verification tolerance. The branch
    /// tolerance is lowered if it would exceed the new verification bound.
    pub fn with_verify_eps(self, verify_eps: f64) -> Result<Self, Error> {
        Tolerances::new(self.branch_eps.min(verify_eps), verify_eps)
    }

    fn scaled(eps: f64, a: f64, b: f64) -> f64 {
        eps * 1f64.max(a.abs()).max(b.abs())
    }

    /// `a == b` up to the branch tolerance.
    pub fn eq(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= Self::scaled(self.branch_eps, a, b)
    }

    /// `a <= b` up to the branch tolerance.
    pub fn le(&self, a: f64, b: f64) -> bool {
        a <= b + Self::scaled(self.branch_eps, a, b)
    }

    /// `a < b` strictly, i.e. not `a >= b` up to the branch tolerance.
    pub fn lt(&self, a: f64, b: f64) -> bool {
        !self.le(b, a)
    }

    /// Deviation check used by the verifier.
    pub fn within_verify(&self, deviation: f64, scale: f64) -> bool {
        deviation.abs() <= self.verify_eps * 1f64.max(scale.abs())
    }
}

fn check_positive(what: &str, values: &[f64]) -> Result<(), Error> {
    if values.is_empty() {
        return Err(Error::InvalidInput(format!("{what} must not be empty")));
    }
    if let Some((i, v)) = values
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v > 0.0))
    {
        return Err(Error::InvalidInput(format!(
            "{what} entry {} must be a positive finite number (got {v})",
            i + 1
        )));
    }
    Ok(())
}

/// Ordered squared norms of the prospective frame vectors.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct NormSequence(Vec<f64>);

impl NormSequence {
    pub fn new(squared_norms: Vec<f64>) -> Result<Self, Error> {
        check_positive("squared norm sequence", &squared_norms)?;
        Ok(NormSequence(squared_norms))
    }

    /// Builds the sequence from unsquared norms.
    pub fn from_norms(norms: &[f64]) -> Result<Self, Error> {
        Self::new(norms.iter().map(|a| a * a).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Reorders by `order[i]` = index of the entry placed at position `i`.
    pub fn permuted(&self, order: &[usize]) -> NormSequence {
        NormSequence(order.iter().map(|&i| self.0[i]).collect())
    }
}

/// Ordered eigenvalues of the target frame operator; row `m` of a
/// constructed frame carries `values()[m]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    pub fn new(eigenvalues: Vec<f64>) -> Result<Self, Error> {
        check_positive("spectrum", &eigenvalues)?;
        Ok(Spectrum(eigenvalues))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sorted_ascending(&self) -> Spectrum {
        let mut v = self.0.clone();
        v.sort_by(f64::total_cmp);
        Spectrum(v)
    }

    pub fn permuted(&self, order: &[usize]) -> Spectrum {
        Spectrum(order.iter().map(|&i| self.0[i]).collect())
    }
}

/// `sum(norms) - sum(spectrum)`. Constructions require this to vanish.
pub fn trace_gap(norms: &NormSequence, spectrum: &Spectrum) -> f64 {
    norms.total() - spectrum.total()
}

/// Support of one synthesis-matrix column (0-based rows).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Column {
    /// One entry at `row`.
    Single { row: usize, value: f64 },
    /// Entries on rows `row` and `row + 1`.
    Double { row: usize, upper: f64, lower: f64 },
}

impl Column {
    pub fn norm_sq(&self) -> f64 {
        match *self {
            Column::Single { value, .. } => value * value,
            Column::Double { upper, lower, .. } => upper * upper + lower * lower,
        }
    }

    /// Nonzero entries as `(row, value)`, top row first.
    pub fn entries(&self) -> impl Iterator<Item = (usize, f64)> {
        let pair = match *self {
            Column::Single { row, value } => [(row, value), (row + 1, 0.0)],
            Column::Double { row, upper, lower } => [(row, upper), (row + 1, lower)],
        };
        pair.into_iter().filter(|&(_, v)| v != 0.0)
    }

    pub fn value_at(&self, r: usize) -> f64 {
        self.entries()
            .find(|&(row, _)| row == r)
            .map_or(0.0, |(_, v)| v)
    }

    pub fn dot(&self, other: &Column) -> f64 {
        self.entries().map(|(r, v)| v * other.value_at(r)).sum()
    }

    pub fn nonzeros(&self) -> usize {
        self.entries().count()
    }

    pub fn scaled(&self, factor: f64) -> Column {
        match *self {
            Column::Single { row, value } => Column::Single {
                row,
                value: value * factor,
            },
            Column::Double { row, upper, lower } => Column::Double {
                row,
                upper: upper * factor,
                lower: lower * factor,
            },
        }
    }
}

/// `M x N` synthesis matrix in which every column is supported on one row
/// or on two adjacent rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseFrame {
    rows: usize,
    columns: Vec<Column>,
}

fn clean_zero(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

impl SparseFrame {
    pub fn new(rows: usize, columns: Vec<Column>) -> Result<Self, Error> {
        if rows == 0 {
            return Err(Error::InvalidInput("frame must have at least one row".into()));
        }
        let mut cleaned = Vec::with_capacity(columns.len());
        for (n, col) in columns.into_iter().enumerate() {
            let col = match col {
                Column::Single { row, value } => Column::Single {
                    row,
                    value: clean_zero(value),
                },
                Column::Double { row, upper, lower } => Column::Double {
                    row,
                    upper: clean_zero(upper),
                    lower: clean_zero(lower),
                },
            };
            let bottom = match col {
                Column::Single { row, .. } => row,
                Column::Double { row, .. } => row + 1,
            };
            if bottom >= rows {
                return Err(Error::InvalidInput(format!(
                    "column {} reaches row {} of a {}-row frame",
                    n + 1,
                    bottom + 1,
                    rows
                )));
            }
            if col.nonzeros() == 0 {
                return Err(Error::InvalidInput(format!("column {} is zero", n + 1)));
            }
            if col.entries().any(|(_, v)| !v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "column {} has a non-finite entry",
                    n + 1
                )));
            }
            cleaned.push(col);
        }
        Ok(SparseFrame {
            rows,
            columns: cleaned,
        })
    }

    /// Builds a frame from 0-based `(row, column, value)` triples.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, Error> {
        let mut per_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); cols];
        for &(r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(Error::InvalidInput(format!(
                    "entry ({}, {}) outside a {rows}x{cols} matrix",
                    r + 1,
                    c + 1
                )));
            }
            if per_col[c].iter().any(|&(row, _)| row == r) {
                return Err(Error::InvalidInput(format!(
                    "duplicate entry ({}, {})",
                    r + 1,
                    c + 1
                )));
            }
            if v != 0.0 {
                per_col[c].push((r, v));
            }
        }
        let columns = per_col
            .into_iter()
            .enumerate()
            .map(|(c, mut e)| {
                e.sort_by_key(|&(r, _)| r);
                match e.as_slice() {
                    [(row, value)] => Ok(Column::Single {
                        row: *row,
                        value: *value,
                    }),
                    [(r0, upper), (r1, lower)] if r1 == &(r0 + 1) => Ok(Column::Double {
                        row: *r0,
                        upper: *upper,
                        lower: *lower,
                    }),
                    [] => Err(Error::InvalidInput(format!("column {} is zero", c + 1))),
                    _ => Err(Error::InvalidInput(format!(
                        "column {} is not supported on one row or two adjacent rows",
                        c + 1
                    ))),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        SparseFrame::new(rows, columns)
    }

    /// Dense row-major input; every column must still be sparse.
    pub fn from_dense(dense: &[Vec<f64>]) -> Result<Self, Error> {
        let rows = dense.len();
        let cols = dense.first().map_or(0, Vec::len);
        if dense.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidInput("ragged dense matrix".into()));
        }
        let triplets: Vec<_> = dense
            .iter()
            .enumerate()
            .flat_map(|(r, row)| {
                row.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(move |(c, v)| (r, c, *v))
            })
            .collect();
        SparseFrame::from_triplets(rows, cols, &triplets)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, n: usize) -> &Column {
        &self.columns[n]
    }

    /// Nonzero `(row, column, value)` triples, 0-based, sorted by column then row.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        self.columns
            .iter()
            .enumerate()
            .flat_map(|(n, c)| c.entries().map(move |(m, v)| (m, n, v)))
            .collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.cols()]; self.rows];
        for (m, n, v) in self.triplets() {
            out[m][n] = v;
        }
        out
    }

    pub fn column_norms_sq(&self) -> Vec<f64> {
        self.columns.iter().map(Column::norm_sq).collect()
    }

    pub fn nonzeros(&self) -> usize {
        self.columns.iter().map(Column::nonzeros).sum()
    }
}

/// Partition `n_1 <= ... <= n_M = N` certifying spectral-tetris readiness.
///
/// `indices()[k]` is the number of columns whose squared norms fit entirely
/// into the first `k + 1` eigenvalues, which is also the 1-based index of
/// the last such column. `strict()[k]` records whether that partial sum
/// falls short of the eigenvalue sum, i.e. whether a block straddles rows
/// `k` and `k + 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReadyPartition {
    indices: Vec<usize>,
    strict: Vec<bool>,
}

impl ReadyPartition {
    pub(crate) fn new(indices: Vec<usize>, strict: Vec<bool>) -> Self {
        debug_assert_eq!(indices.len(), strict.len());
        ReadyPartition { indices, strict }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn strict(&self) -> &[bool] {
        &self.strict
    }

    /// Number of 2x2 blocks the construction will place.
    pub fn block_count(&self) -> usize {
        self.strict.iter().filter(|s| **s).count()
    }
}

/// One subspace request: weight `nu > 0` (unsquared) and dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubspaceSpec {
    pub weight: f64,
    pub dim: usize,
}

/// Weighted fusion-frame request.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FusionProblem {
    subspaces: Vec<SubspaceSpec>,
    spectrum: Spectrum,
    ordering: Option<Vec<usize>>,
}

impl FusionProblem {
    /// `ordering`, when given, lists a 0-based subspace label for each of
    /// the `sum(dim)` slots.
    pub fn new(
        subspaces: Vec<SubspaceSpec>,
        spectrum: Spectrum,
        ordering: Option<Vec<usize>>,
    ) -> Result<Self, Error> {
        if subspaces.is_empty() {
            return Err(Error::InvalidInput("subspace list must not be empty".into()));
        }
        for (k, s) in subspaces.iter().enumerate() {
            if !(s.weight.is_finite() && s.weight > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "subspace {} weight must be positive (got {})",
                    k + 1,
                    s.weight
                )));
            }
            if s.dim == 0 {
                return Err(Error::InvalidInput(format!(
                    "subspace {} dimension must be at least 1",
                    k + 1
                )));
            }
        }
        if let Some(order) = &ordering {
            let mut counts = vec![0usize; subspaces.len()];
            for &label in order {
                if label >= subspaces.len() {
                    return Err(Error::InvalidInput(format!(
                        "ordering references unknown subspace {}",
                        label + 1
                    )));
                }
                counts[label] += 1;
            }
            if let Some(k) = (0..subspaces.len()).find(|&k| counts[k] != subspaces[k].dim) {
                return Err(Error::InvalidInput(format!(
                    "ordering lists subspace {} {} times but its dimension is {}",
                    k + 1,
                    counts[k],
                    subspaces[k].dim
                )));
            }
        }
        Ok(FusionProblem {
            subspaces,
            spectrum,
            ordering,
        })
    }

    pub fn subspaces(&self) -> &[SubspaceSpec] {
        &self.subspaces
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn ordering(&self) -> Option<&[usize]> {
        self.ordering.as_deref()
    }

    /// Total number of frame vectors, `sum(dim)`.
    pub fn slot_count(&self) -> usize {
        self.subspaces.iter().map(|s| s.dim).sum()
    }
}

/// A sparse frame whose columns are partitioned into tight generating sets,
/// one per weighted subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionFrame {
    frame: SparseFrame,
    parts: Vec<Vec<usize>>,
    weights: Vec<f64>,
}

impl FusionFrame {
    /// Only checks that `parts` partitions the columns and that weights are
    /// positive; tightness is checked by [`crate::fusion::assemble_fusion`]
    /// and reported by [`crate::verify::audit`].
    pub fn new(
        frame: SparseFrame,
        parts: Vec<Vec<usize>>,
        weights: Vec<f64>,
    ) -> Result<Self, Error> {
        check_partition(frame.cols(), &parts)?;
        if parts.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} parts but {} weights",
                parts.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidInput(format!("weight {w} must be positive")));
        }
        Ok(FusionFrame {
            frame,
            parts,
            weights,
        })
    }

    pub fn frame(&self) -> &SparseFrame {
        &self.frame
    }

    /// 0-based column indices per subspace.
    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    /// Unsquared weights `nu_k`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Checks that `parts` is a partition of `0..cols` into non-empty sets.
pub fn check_partition(cols: usize, parts: &[Vec<usize>]) -> Result<(), Error> {
    let mut seen = vec![false; cols];
    for (k, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(Error::InvalidInput(format!("part {} is empty", k + 1)));
        }
        for &c in part {
            if c >= cols {
                return Err(Error::InvalidInput(format!(
                    "part {} references column {} of a {cols}-column frame",
                    k + 1,
                    c + 1
                )));
            }
            if std::mem::replace(&mut seen[c], true) {
                return Err(Error::InvalidInput(format!(
                    "column {} appears in more than one part",
                    c + 1
                )));
            }
        }
    }
    if let Some(c) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidInput(format!(
            "column {} is not assigned to any part",
            c + 1
        )));
    }
    Ok(())
}
