//! Independent numerical audit of constructed frames and fusion frames.
//!
//! Nothing here calls into the constructors. Operators are assembled densely
//! from the raw entries, subspace projections come from a fresh
//! Gram-Schmidt basis of each part, and spectra from a Jacobi eigensolver.
//!
//! Deviations are absolute. When the largest operator eigenvalue exceeds
//! 10^3 every tolerance is multiplied by `max_eigenvalue / 10^3`, so large
//! spectra are judged relative to their magnitude.

mod linalg;

use serde::Serialize;

pub use linalg::{orthonormal_basis, projection, symmetric_eigenvalues, DenseMatrix};

use crate::error::Error;
use crate::types::{FusionFrame, SparseFrame, Spectrum, Tolerances};

const SCALE_THRESHOLD: f64 = 1e3;

/// `F F^T` accumulated entry by entry.
pub fn frame_operator(frame: &SparseFrame) -> DenseMatrix {
    let m = frame.rows();
    let mut s = DenseMatrix::zeros(m, m);
    for column in frame.columns() {
        let entries: Vec<(usize, f64)> = column.entries().collect();
        for &(i, vi) in &entries {
            for &(j, vj) in &entries {
                s[(i, j)] += vi * vj;
            }
        }
    }
    s
}

fn dense_column(frame: &SparseFrame, n: usize) -> Vec<f64> {
    let mut v = vec![0.0; frame.rows()];
    for (r, x) in frame.column(n).entries() {
        v[r] = x;
    }
    v
}

/// Orthonormal basis of the span of one part.
pub fn part_basis(frame: &SparseFrame, part: &[usize], rank_tolerance: f64) -> Vec<Vec<f64>> {
    let vectors: Vec<Vec<f64>> = part.iter().map(|&n| dense_column(frame, n)).collect();
    orthonormal_basis(&vectors, rank_tolerance)
}

/// `sum_k nu_k^2 P_k`, with each `P_k` built from an orthonormalized basis
/// of the part's columns (their norms play no role).
pub fn fusion_operator(fusion: &FusionFrame, tol: &Tolerances) -> Result<DenseMatrix, Error> {
    let frame = fusion.frame();
    let m = frame.rows();
    let mut s = DenseMatrix::zeros(m, m);
    for (k, (part, weight)) in fusion.parts().iter().zip(fusion.weights()).enumerate() {
        let basis = part_basis(frame, part, tol.verify_eps);
        if basis.is_empty() {
            return Err(Error::DegeneratePart {
                part: k + 1,
                detail: "columns span the zero subspace".into(),
            });
        }
        s.add_assign_scaled(&projection(&basis, m), weight * weight);
    }
    Ok(s)
}

/// What the audited object is supposed to satisfy. Every field is optional;
/// absent expectations are not checked.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuditExpectations {
    pub spectrum: Option<Spectrum>,
    /// Squared column norms in column order.
    pub norms_sq: Option<Vec<f64>>,
    /// Unsquared subspace weights, one per part.
    pub weights: Option<Vec<f64>>,
    /// Subspace dimensions, one per part.
    pub dims: Option<Vec<usize>>,
}

pub enum AuditTarget<'a> {
    Frame(&'a SparseFrame),
    Fusion(&'a FusionFrame),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparsityStats {
    pub nonzeros: usize,
    pub per_column: Vec<usize>,
    pub max_per_column: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartReport {
    /// 1-based column indices.
    pub columns: Vec<usize>,
    pub weight: f64,
    pub rank: usize,
    pub expected_dim: Option<usize>,
    /// Largest `|<f_i, f_j>|` between distinct columns of the part.
    pub max_inner_product: f64,
    /// Largest entry of `|F_J F_J^T - nu^2 P_J|`.
    pub tightness_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub rows: usize,
    pub cols: usize,
    /// Operator eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    pub expected_spectrum: Option<Vec<f64>>,
    pub spectrum_match: Option<bool>,
    pub spectrum_max_deviation: Option<f64>,
    pub column_norm_deviations: Vec<f64>,
    pub max_norm_deviation: Option<f64>,
    pub parts: Vec<PartReport>,
    /// Largest entry of `|sum nu_k^2 P_k - F F^T|` for fusion targets.
    pub fusion_operator_deviation: Option<f64>,
    pub sparsity: SparsityStats,
    /// Smallest and largest operator eigenvalue.
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// Whether the columns span the ambient space.
    pub spanning: bool,
    pub tolerance: f64,
    pub scale: f64,
    pub failures: Vec<String>,
    pub pass: bool,
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

/// Fills a [`VerificationReport`]; `pass` is true iff every checked
/// deviation is within tolerance.
pub fn audit(
    target: AuditTarget<'_>,
    expected: &AuditExpectations,
    tol: &Tolerances,
) -> Result<VerificationReport, Error> {
    let (frame, fusion) = match target {
        AuditTarget::Frame(f) => (f, None),
        AuditTarget::Fusion(ff) => (ff.frame(), Some(ff)),
    };
    let operator = frame_operator(frame);
    let eigenvalues = symmetric_eigenvalues(&operator, tol.verify_eps)?;
    let lower_bound = eigenvalues.first().copied().unwrap_or(0.0);
    let upper_bound = eigenvalues.last().copied().unwrap_or(0.0);
    let scale = 1f64.max(upper_bound.abs() / SCALE_THRESHOLD);
    let limit = tol.verify_eps * scale;
    let mut failures = Vec::new();

    let (expected_spectrum, spectrum_match, spectrum_max_deviation) = match &expected.spectrum {
        None => (None, None, None),
        Some(spectrum) => {
            let want = spectrum.sorted_ascending().values().to_vec();
            let deviation = if want.len() == eigenvalues.len() {
                want.iter()
                    .zip(&eigenvalues)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            } else {
                failures.push(format!(
                    "expected {} eigenvalues, frame has {} rows",
                    want.len(),
                    eigenvalues.len()
                ));
                f64::INFINITY
            };
            let ok = deviation <= limit;
            if !ok && deviation.is_finite() {
                failures.push(format!("spectrum deviation {deviation}"));
            }
            (Some(want), Some(ok), Some(deviation))
        }
    };

    let norms = frame.column_norms_sq();
    let (column_norm_deviations, max_norm_deviation) = match &expected.norms_sq {
        None => (Vec::new(), None),
        Some(want) if want.len() != norms.len() => {
            failures.push(format!(
                "expected {} column norms, frame has {} columns",
                want.len(),
                norms.len()
            ));
            (Vec::new(), Some(f64::INFINITY))
        }
        Some(want) => {
            let devs: Vec<f64> = norms.iter().zip(want).map(|(a, b)| a - b).collect();
            let worst = max_abs(&devs);
            if worst > limit {
                failures.push(format!("column norm deviation {worst}"));
            }
            (devs, Some(worst))
        }
    };

    let mut parts = Vec::new();
    let mut fusion_operator_deviation = None;
    if let Some(ff) = fusion {
        let m = frame.rows();
        if let Some(w) = &expected.weights {
            let mismatch = w.len() != ff.weights().len()
                || w.iter().zip(ff.weights()).any(|(a, b)| (a - b).abs() > limit);
            if mismatch {
                failures.push(format!("weights {:?} differ from expected {w:?}", ff.weights()));
            }
        }
        if let Some(d) = &expected.dims {
            if d.len() != ff.parts().len() {
                failures.push(format!(
                    "expected {} subspaces, bundle has {}",
                    d.len(),
                    ff.parts().len()
                ));
            }
        }
        for (k, (part, &weight)) in ff.parts().iter().zip(ff.weights()).enumerate() {
            let basis = part_basis(frame, part, tol.verify_eps);
            let mut gram = DenseMatrix::zeros(m, m);
            let mut max_inner: f64 = 0.0;
            for (a, &i) in part.iter().enumerate() {
                for &j in &part[a + 1..] {
                    max_inner = max_inner.max(frame.column(i).dot(frame.column(j)).abs());
                }
                for (r, vr) in frame.column(i).entries() {
                    for (c, vc) in frame.column(i).entries() {
                        gram[(r, c)] += vr * vc;
                    }
                }
            }
            let target = projection(&basis, m).scaled(weight * weight);
            let tightness_deviation = gram.max_abs_diff(&target);
            let expected_dim = expected.dims.as_ref().and_then(|d| d.get(k).copied());
            if tightness_deviation > limit {
                failures.push(format!(
                    "part {} is not tight with bound {} (deviation {tightness_deviation})",
                    k + 1,
                    weight * weight
                ));
            }
            if let Some(d) = expected_dim {
                if d != basis.len() {
                    failures.push(format!(
                        "part {} spans dimension {}, expected {d}",
                        k + 1,
                        basis.len()
                    ));
                }
            }
            parts.push(PartReport {
                columns: part.iter().map(|c| c + 1).collect(),
                weight,
                rank: basis.len(),
                expected_dim,
                max_inner_product: max_inner,
                tightness_deviation,
            });
        }
        let deviation = match fusion_operator(ff, tol) {
            Ok(s) => s.max_abs_diff(&operator),
            Err(e) => {
                failures.push(e.to_string());
                f64::INFINITY
            }
        };
        if deviation > limit && deviation.is_finite() {
            failures.push(format!("fusion operator differs from frame operator by {deviation}"));
        }
        fusion_operator_deviation = Some(deviation);
    }

    let per_column: Vec<usize> = frame.columns().iter().map(|c| c.nonzeros()).collect();
    let sparsity = SparsityStats {
        nonzeros: per_column.iter().sum(),
        max_per_column: per_column.iter().copied().max().unwrap_or(0),
        per_column,
    };
    let spanning = lower_bound > limit;
    let pass = failures.is_empty();
    Ok(VerificationReport {
        rows: frame.rows(),
        cols: frame.cols(),
        eigenvalues,
        expected_spectrum,
        spectrum_match,
        spectrum_max_deviation,
        column_norm_deviations,
        max_norm_deviation,
        parts,
        fusion_operator_deviation,
        sparsity,
        lower_bound,
        upper_bound,
        spanning,
        tolerance: tol.verify_eps,
        scale,
        failures,
        pass,
    })
}
