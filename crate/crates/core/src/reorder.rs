//! Construction from orderings that are not ready, by exchanging adjacent
//! norms on the fly.
//!
//! Whenever a block is needed at columns `n, n + 1` but the residual row
//! mass is at least `a_{n+1}^2`, the two norms are exchanged and the lighter
//! one is placed as a singleton. If every pair of squared norms fits under
//! the smallest eigenvalue, this always terminates with a valid frame.

use serde::Serialize;

use crate::error::Error;
use crate::stc::run_cursor;
use crate::types::{trace_gap, NormSequence, SparseFrame, Spectrum, Tolerances};

/// Whether the success guarantee for [`str_construct`] applies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrVerdict {
    pub trace_gap: f64,
    pub trace_ok: bool,
    /// Largest `a_i^2 + a_j^2` over `i != j`; `None` for a single norm.
    pub max_pair: Option<f64>,
    pub min_eigenvalue: f64,
    /// `min_eigenvalue - max_pair`; non-negative when the pair bound holds.
    pub pair_margin: f64,
    pub pair_ok: bool,
    /// At least as many vectors as rows.
    pub enough_vectors: bool,
}

impl StrVerdict {
    pub fn holds(&self) -> bool {
        self.trace_ok && self.pair_ok && self.enough_vectors
    }

    pub fn describe_failures(&self) -> String {
        let mut out = Vec::new();
        if !self.trace_ok {
            out.push(format!("trace gap {}", self.trace_gap));
        }
        if !self.pair_ok {
            out.push(format!(
                "largest pair of squared norms {} exceeds smallest eigenvalue {} (margin {})",
                self.max_pair.unwrap_or(f64::NAN),
                self.min_eigenvalue,
                self.pair_margin
            ));
        }
        if !self.enough_vectors {
            out.push("fewer vectors than rows".to_string());
        }
        out.join("; ")
    }
}

pub fn str_preconditions(norms: &NormSequence, spectrum: &Spectrum, tol: &Tolerances) -> StrVerdict {
    let gap = trace_gap(norms, spectrum);
    let mut top = [f64::NEG_INFINITY; 2];
    for &v in norms.values() {
        if v > top[0] {
            top = [v, top[0]];
        } else if v > top[1] {
            top[1] = v;
        }
    }
    let max_pair = (norms.len() >= 2).then(|| top[0] + top[1]);
    let min_eigenvalue = spectrum.min();
    let pair_margin = max_pair.map_or(f64::INFINITY, |p| min_eigenvalue - p);
    StrVerdict {
        trace_gap: gap,
        trace_ok: tol.eq(norms.total(), spectrum.total()),
        max_pair,
        min_eigenvalue,
        pair_margin,
        pair_ok: max_pair.is_none_or(|p| tol.le(p, min_eigenvalue)),
        enough_vectors: norms.len() >= spectrum.len(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReorderMode {
    /// Requires the pair bound; a failure is a defect.
    Guaranteed,
    /// Runs regardless; getting stuck is reported as infeasibility.
    BestEffort,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReorderOutcome {
    pub frame: SparseFrame,
    /// Squared norms in the order actually used; column `n` has norm
    /// `ordering[n]`.
    pub ordering: NormSequence,
    /// `order[n]` is the input index of the norm in column `n`.
    pub order: Vec<usize>,
    /// 0-based positions `(n, n + 1)` exchanged, in the order performed.
    pub swaps: Vec<(usize, usize)>,
}

/// Builds a frame with the given spectrum from any ordering of `norms`,
/// exchanging adjacent norms whenever the required block does not exist.
pub fn str_construct(
    norms: &NormSequence,
    spectrum: &Spectrum,
    mode: ReorderMode,
    tol: &Tolerances,
) -> Result<ReorderOutcome, Error> {
    let verdict = str_preconditions(norms, spectrum, tol);
    if !verdict.trace_ok {
        return Err(Error::TraceMismatch {
            gap: verdict.trace_gap,
        });
    }
    if mode == ReorderMode::Guaranteed && !verdict.holds() {
        return Err(Error::ReorderPrecondition(verdict.describe_failures()));
    }
    let run = run_cursor(norms.values(), spectrum.values(), true, tol).map_err(|stuck| match mode {
        ReorderMode::Guaranteed => Error::Defect(format!(
            "reordering failed although its preconditions hold (row {}, column {}: {})",
            stuck.row, stuck.column, stuck.detail
        )),
        ReorderMode::BestEffort => Error::ReorderStuck {
            row: stuck.row,
            column: stuck.column,
            detail: stuck.detail,
        },
    })?;
    Ok(ReorderOutcome {
        frame: SparseFrame::new(spectrum.len(), run.columns)?,
        ordering: norms.permuted(&run.order),
        order: run.order,
        swaps: run.swaps,
    })
}
