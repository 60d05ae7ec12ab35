use serde::Serialize;

use super::LabeledNormSequence;
use crate::error::Error;
use crate::stc::{readiness_partition, stc_construct, ReadinessFailure};
use crate::types::{Spectrum, Tolerances};

/// How a row's window is bounded: by the lower half of a block coming in
/// from the previous row, and by the upper half of a block leaving for the
/// next row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowCase {
    BlockToBlock,
    BlockToBoundary,
    BoundaryToBlock,
    BoundaryToBoundary,
}

/// Columns with a nonzero entry on one row. Any two of them are
/// non-orthogonal; two columns outside a common window are orthogonal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Window {
    /// 1-based row.
    pub row: usize,
    pub case: WindowCase,
    /// 1-based columns, ascending.
    pub columns: Vec<usize>,
    /// 1-based subspace labels of those columns.
    pub labels: Vec<usize>,
    /// `(label, first column, second column)`, all 1-based.
    pub conflicts: Vec<(usize, usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowReport {
    pub windows: Vec<Window>,
    pub pass: bool,
}

impl WindowReport {
    pub fn first_conflict(&self) -> Option<(usize, usize, usize)> {
        self.windows.iter().flat_map(|w| w.conflicts.iter().copied()).next()
    }
}

/// Lays out the construction for a labeled ordering and flags every row on
/// which two columns of the same subspace meet.
pub fn check_window_conditions(
    labels: &LabeledNormSequence,
    spectrum: &Spectrum,
    tol: &Tolerances,
) -> Result<WindowReport, Error> {
    let norms = labels.norms();
    let partition =
        readiness_partition(&norms, spectrum, tol).map_err(ReadinessFailure::into_error)?;
    let frame = stc_construct(&norms, spectrum, tol)?;
    let slot_labels = labels.labels();
    let strict = partition.strict();

    let mut per_row: Vec<Vec<usize>> = vec![Vec::new(); frame.rows()];
    for (n, column) in frame.columns().iter().enumerate() {
        for (r, _) in column.entries() {
            per_row[r].push(n);
        }
    }
    let windows: Vec<Window> = per_row
        .into_iter()
        .enumerate()
        .map(|(r, cols)| {
            let entering = r > 0 && strict[r - 1];
            let leaving = strict[r];
            let case = match (entering, leaving) {
                (true, true) => WindowCase::BlockToBlock,
                (true, false) => WindowCase::BlockToBoundary,
                (false, true) => WindowCase::BoundaryToBlock,
                (false, false) => WindowCase::BoundaryToBoundary,
            };
            let mut conflicts = Vec::new();
            for (i, &a) in cols.iter().enumerate() {
                for &b in &cols[i + 1..] {
                    if slot_labels[a] == slot_labels[b] {
                        conflicts.push((slot_labels[a] + 1, a + 1, b + 1));
                    }
                }
            }
            Window {
                row: r + 1,
                case,
                labels: cols.iter().map(|&n| slot_labels[n] + 1).collect(),
                columns: cols.iter().map(|n| n + 1).collect(),
                conflicts,
            }
        })
        .collect();
    let pass = windows.iter().all(|w| w.conflicts.is_empty());
    Ok(WindowReport { windows, pass })
}
