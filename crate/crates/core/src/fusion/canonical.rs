use serde::Serialize;

use super::PartGram;
use crate::error::Error;
use crate::types::{check_partition, Column, FusionFrame, NormSequence, SparseFrame, Tolerances};
use crate::verify::frame_operator;

/// One rewriting step. Column numbers are 1-based and refer to the frame as
/// it was just before the step.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "case")]
pub enum CanonicalStep {
    /// Two colinear columns of one part merged into the first.
    #[serde(rename = "merge")]
    Merge {
        part: usize,
        kept: usize,
        removed: usize,
        norm_sq: f64,
    },
    /// Both columns of a 2x2 block in one part replaced by singletons.
    #[serde(rename = "split")]
    Split {
        part: usize,
        columns: (usize, usize),
        row: usize,
        x: f64,
        y: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Canonicalized {
    pub norms: NormSequence,
    pub fusion: FusionFrame,
    pub steps: Vec<CanonicalStep>,
}

fn part_of(parts: &[Vec<usize>], cols: usize) -> Vec<usize> {
    let mut owner = vec![0; cols];
    for (k, p) in parts.iter().enumerate() {
        for &c in p {
            owner[c] = k;
        }
    }
    owner
}

fn find_split(frame: &SparseFrame, owner: &[usize], tol: &Tolerances) -> Option<(usize, usize, usize, f64, f64)> {
    let cols = frame.columns();
    for a in 0..cols.len() {
        let Column::Double { row, upper: ua, lower: la } = cols[a] else {
            continue;
        };
        for b in a + 1..cols.len() {
            let Column::Double { row: rb, upper: ub, lower: lb } = cols[b] else {
                continue;
            };
            if rb != row || owner[a] != owner[b] {
                continue;
            }
            let x = ua * ua + ub * ub;
            let y = la * la + lb * lb;
            if tol.within_verify(ua * la + ub * lb, x.max(y)) {
                return Some((a, b, row, x, y));
            }
        }
    }
    None
}

fn support(c: &Column) -> Vec<usize> {
    c.entries().map(|(r, _)| r).collect()
}

fn find_merge(frame: &SparseFrame, owner: &[usize], tol: &Tolerances) -> Option<(usize, usize)> {
    let cols = frame.columns();
    for a in 0..cols.len() {
        for b in a + 1..cols.len() {
            if owner[a] != owner[b] || support(&cols[a]) != support(&cols[b]) {
                continue;
            }
            let (na, nb) = (cols[a].norm_sq(), cols[b].norm_sq());
            let inner = cols[a].dot(&cols[b]);
            if tol.within_verify(na * nb - inner * inner, na * nb) {
                return Some((a, b));
            }
        }
    }
    None
}

fn is_orthogonal(frame: &SparseFrame, part: &[usize], tol: &Tolerances) -> bool {
    part.iter().enumerate().all(|(i, &a)| {
        part[i + 1..].iter().all(|&b| {
            let (ca, cb) = (frame.column(a), frame.column(b));
            tol.within_verify(ca.dot(cb), ca.norm_sq().max(cb.norm_sq()))
        })
    })
}

/// Rewrites the frame so that every part consists of orthogonal columns of
/// equal norm, without changing the frame operator or the subspaces.
///
/// Each part must be a tight frame for its span. Blocks lying entirely in
/// one part are split into singletons first, then colinear columns of one
/// part are merged, one step at a time, until neither applies.
pub fn canonicalize(frame: &SparseFrame, parts: &[Vec<usize>], tol: &Tolerances) -> Result<Canonicalized, Error> {
    check_partition(frame.cols(), parts)?;
    let mut weights = Vec::with_capacity(parts.len());
    for (k, part) in parts.iter().enumerate() {
        let gram = PartGram::new(frame, part);
        let bound = gram.bound();
        let deviation = gram.deviation(bound);
        if !tol.within_verify(deviation, bound * bound) {
            return Err(Error::NonTightPart {
                part: k + 1,
                deviation,
            });
        }
        weights.push(bound.sqrt());
    }

    let target = frame_operator(frame);
    let scale = target.max_abs().max(1.0);
    let mut columns = frame.columns().to_vec();
    let mut parts = parts.to_vec();
    let mut steps = Vec::new();
    loop {
        let current = SparseFrame::new(frame.rows(), columns.clone())?;
        let drift = frame_operator(&current).max_abs_diff(&target);
        if !tol.within_verify(drift, scale) {
            return Err(Error::Defect(format!(
                "canonicalization changed the frame operator by {drift}"
            )));
        }
        let owner = part_of(&parts, columns.len());
        if let Some((a, b, row, x, y)) = find_split(&current, &owner, tol) {
            columns[a] = Column::Single { row, value: x.sqrt() };
            columns[b] = Column::Single {
                row: row + 1,
                value: y.sqrt(),
            };
            steps.push(CanonicalStep::Split {
                part: owner[a] + 1,
                columns: (a + 1, b + 1),
                row: row + 1,
                x,
                y,
            });
            continue;
        }
        if let Some((a, b)) = find_merge(&current, &owner, tol) {
            let (na, nb) = (columns[a].norm_sq(), columns[b].norm_sq());
            columns[a] = columns[a].scaled(((na + nb) / na).sqrt());
            columns.remove(b);
            for p in parts.iter_mut() {
                p.retain(|&c| c != b);
                for c in p.iter_mut() {
                    if *c > b {
                        *c -= 1;
                    }
                }
            }
            steps.push(CanonicalStep::Merge {
                part: owner[a] + 1,
                kept: a + 1,
                removed: b + 1,
                norm_sq: na + nb,
            });
            continue;
        }
        if let Some(k) = parts.iter().position(|p| !is_orthogonal(&current, p, tol)) {
            return Err(Error::DegeneratePart {
                part: k + 1,
                detail: "tight but not orthogonal, and no block split or colinear merge applies".into(),
            });
        }
        let norms = NormSequence::new(current.column_norms_sq())?;
        let fusion = FusionFrame::new(current, parts, weights)?;
        return Ok(Canonicalized { norms, fusion, steps });
    }
}
