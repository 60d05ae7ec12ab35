//! Readiness certification and the greedy row-by-row construction.
//!
//! The construction walks a cursor `(row, column)` through the synthesis
//! matrix. While the next squared norm still fits into the current row it
//! becomes a singleton; when it overshoots, the remaining row mass `x` is
//! split with the next two columns into a 2x2 block whose lower row spills
//! into the following row.
//!
//! The cursor tracks `S_n` (sum of the first `n` squared norms) and `L_m`
//! (sum of the first `m + 1` eigenvalues) instead of per-row residuals, so
//! every branch decision is the same floating-point comparison that
//! [`readiness_partition`] makes.

use std::fmt;

use serde::Serialize;

use crate::blocks::make_block;
use crate::error::Error;
use crate::types::{trace_gap, Column, NormSequence, ReadyPartition, SparseFrame, Spectrum, Tolerances};

/// Why an ordering is not ready. Rows and columns are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum ReadinessFailure {
    /// Squared norms and eigenvalues have different sums.
    TraceMismatch { gap: f64 },
    /// The squared norms are used up before the eigenvalue sum of `row` is
    /// exceeded, leaving nothing for the later rows.
    NormsExhausted { row: usize },
    /// A block must start right after column `after_column` to close `row`,
    /// but the next row closes after fewer than two further columns.
    BlockGap { row: usize, after_column: usize, gap: usize },
    /// The second column of the block closing `row` is lighter than the
    /// mass the block must place on `row`.
    BlockShortfall {
        row: usize,
        column: usize,
        required: f64,
        available: f64,
        shortfall: f64,
    },
}

impl fmt::Display for ReadinessFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReadinessFailure::TraceMismatch { gap } => {
                write!(f, "sum of squared norms minus sum of eigenvalues is {gap}")
            }
            ReadinessFailure::NormsExhausted { row } => write!(
                f,
                "row {row}: partition index condition fails, squared norms run out before the row closes"
            ),
            ReadinessFailure::BlockGap {
                row,
                after_column,
                gap,
            } => write!(
                f,
                "row {row}: block condition fails, the block after column {after_column} needs two columns but only {gap} fit before the next row closes"
            ),
            ReadinessFailure::BlockShortfall {
                row,
                column,
                required,
                available,
                shortfall,
            } => write!(
                f,
                "row {row}: block condition fails, column {column} has squared norm {available} below the residual row mass {required} (shortfall {shortfall})"
            ),
        }
    }
}

impl ReadinessFailure {
    /// Row (1-based) the failure refers to, if any.
    pub fn row(&self) -> Option<usize> {
        match self {
            ReadinessFailure::TraceMismatch { .. } => None,
            ReadinessFailure::NormsExhausted { row }
            | ReadinessFailure::BlockGap { row, .. }
            | ReadinessFailure::BlockShortfall { row, .. } => Some(*row),
        }
    }

    pub(crate) fn into_error(self) -> Error {
        match self {
            ReadinessFailure::TraceMismatch { gap } => Error::TraceMismatch { gap },
            other => Error::NotReady(other),
        }
    }
}

/// Computes the readiness partition of the given orderings, or the first
/// row at which readiness fails.
pub fn readiness_partition(
    norms: &NormSequence,
    spectrum: &Spectrum,
    tol: &Tolerances,
) -> Result<ReadyPartition, ReadinessFailure> {
    let a = norms.values();
    let lambda = spectrum.values();
    let (n_cols, n_rows) = (a.len(), lambda.len());
    if !tol.eq(norms.total(), spectrum.total()) {
        return Err(ReadinessFailure::TraceMismatch {
            gap: trace_gap(norms, spectrum),
        });
    }
    let mut prefix = Vec::with_capacity(n_cols + 1);
    prefix.push(0.0);
    for (n, v) in a.iter().enumerate() {
        prefix.push(prefix[n] + v);
    }

    let mut indices = Vec::with_capacity(n_rows);
    let mut strict = Vec::with_capacity(n_rows);
    let mut lam_prefix = Vec::with_capacity(n_rows);
    let mut lam = 0.0;
    let mut n = 0;
    for (k, &l) in lambda.iter().enumerate() {
        lam += l;
        lam_prefix.push(lam);
        if k + 1 == n_rows {
            indices.push(n_cols);
            strict.push(false);
        } else {
            while n < n_cols && tol.le(prefix[n + 1], lam) {
                n += 1;
            }
            if n == n_cols {
                return Err(ReadinessFailure::NormsExhausted { row: k + 1 });
            }
            indices.push(n);
            strict.push(tol.lt(prefix[n], lam));
        }
        // block condition for the previous row, now that its successor's index is known
        if k > 0 && strict[k - 1] {
            let prev = indices[k - 1];
            let gap = indices[k] - prev;
            if gap < 2 {
                return Err(ReadinessFailure::BlockGap {
                    row: k,
                    after_column: prev,
                    gap,
                });
            }
            let required = lam_prefix[k - 1] - prefix[prev];
            let available = a[prev + 1];
            if !tol.le(required, available) {
                return Err(ReadinessFailure::BlockShortfall {
                    row: k,
                    column: prev + 2,
                    required,
                    available,
                    shortfall: required - available,
                });
            }
        }
    }
    Ok(ReadyPartition::new(indices, strict))
}

/// Builds the frame for a ready ordering. Row `m` of the result has squared
/// sum `spectrum[m]` and column `n` has squared norm `norms[n]`.
pub fn stc_construct(
    norms: &NormSequence,
    spectrum: &Spectrum,
    tol: &Tolerances,
) -> Result<SparseFrame, Error> {
    readiness_partition(norms, spectrum, tol).map_err(ReadinessFailure::into_error)?;
    let run = run_cursor(norms.values(), spectrum.values(), false, tol).map_err(|stuck| {
        Error::Defect(format!(
            "construction stuck on a ready ordering at row {}, column {}: {}",
            stuck.row, stuck.column, stuck.detail
        ))
    })?;
    SparseFrame::new(spectrum.len(), run.columns)
}

/// Runs the cursor without checking readiness first, so that a non-ready
/// ordering fails wherever the construction actually gets stuck.
pub fn greedy_construct(
    norms: &NormSequence,
    spectrum: &Spectrum,
    tol: &Tolerances,
) -> Result<SparseFrame, Error> {
    let run = run_cursor(norms.values(), spectrum.values(), false, tol).map_err(|stuck| Error::CursorStuck {
        row: stuck.row,
        column: stuck.column,
        detail: stuck.detail,
    })?;
    SparseFrame::new(spectrum.len(), run.columns)
}

/// Cursor state at which a run could not continue (1-based positions).
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Stuck {
    pub row: usize,
    pub column: usize,
    pub detail: String,
}

/// Result of a cursor run over a possibly reordered norm sequence.
#[derive(Debug, Clone)]
pub(crate) struct CursorRun {
    pub columns: Vec<Column>,
    /// `order[i]` is the input index of the norm at final position `i`.
    pub order: Vec<usize>,
    /// 0-based positions `(n, n + 1)` of each adjacent exchange, in order.
    pub swaps: Vec<(usize, usize)>,
    /// Cursor positions `(row, column)` visited, 0-based.
    #[cfg_attr(not(test), allow(dead_code))]
    pub trace: Vec<(usize, usize)>,
}

/// Runs the cursor. With `reorder`, a block whose second column is no
/// heavier than the residual row mass triggers an exchange of the two
/// columns instead, and the lighter norm is placed as a singleton.
pub(crate) fn run_cursor(
    norms: &[f64],
    spectrum: &[f64],
    reorder: bool,
    tol: &Tolerances,
) -> Result<CursorRun, Stuck> {
    let mut a = norms.to_vec();
    let mut order: Vec<usize> = (0..a.len()).collect();
    let mut swaps = Vec::new();
    let mut trace = Vec::new();
    let mut columns = Vec::with_capacity(a.len());
    let (n_cols, n_rows) = (a.len(), spectrum.len());
    let stuck = |row: usize, column: usize, detail: String| Stuck {
        row: row + 1,
        column: column + 1,
        detail,
    };

    let mut s = 0.0;
    let mut lam = 0.0;
    let mut n = 0;
    for m in 0..n_rows {
        lam += spectrum[m];
        loop {
            if tol.eq(s, lam) {
                break;
            }
            if n == n_cols {
                return Err(stuck(
                    m,
                    n,
                    format!("no columns left, row still needs mass {}", lam - s),
                ));
            }
            trace.push((m, n));
            if tol.le(s + a[n], lam) {
                columns.push(Column::Single {
                    row: m,
                    value: a[n].sqrt(),
                });
                s += a[n];
                n += 1;
                continue;
            }
            let x = lam - s;
            if reorder && n + 1 < n_cols && tol.le(a[n + 1], x) {
                a.swap(n, n + 1);
                order.swap(n, n + 1);
                swaps.push((n, n + 1));
                columns.push(Column::Single {
                    row: m,
                    value: a[n].sqrt(),
                });
                s += a[n];
                n += 1;
                continue;
            }
            if m + 1 == n_rows {
                return Err(stuck(
                    m,
                    n,
                    format!("last row overflows: squared norm {} exceeds residual {x}", a[n]),
                ));
            }
            if n + 1 == n_cols {
                return Err(stuck(
                    m,
                    n,
                    format!("block needed for residual {x} but only one column remains"),
                ));
            }
            let block = make_block(x, a[n], a[n + 1], tol)
                .map_err(|e| stuck(m, n, e.to_string()))?;
            let next_lam = lam + spectrum[m + 1];
            let after = s + a[n] + a[n + 1];
            if !tol.le(after, next_lam) {
                return Err(stuck(
                    m,
                    n,
                    format!(
                        "block spills {} into row {}, which only holds {}",
                        a[n] + a[n + 1] - x,
                        m + 2,
                        spectrum[m + 1]
                    ),
                ));
            }
            columns.push(Column::Double {
                row: m,
                upper: block.left.0,
                lower: block.left.1,
            });
            columns.push(Column::Double {
                row: m,
                upper: block.right.0,
                lower: block.right.1,
            });
            trace.push((m, n + 1));
            s = after;
            n += 2;
            break;
        }
    }
    if n != n_cols {
        return Err(stuck(
            n_rows - 1,
            n,
            format!("{} columns left over after the last row", n_cols - n),
        ));
    }
    Ok(CursorRun {
        columns,
        order,
        swaps,
        trace,
    })
}
