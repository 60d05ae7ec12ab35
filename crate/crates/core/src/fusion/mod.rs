//! Weighted fusion frames built from sparse frames.
//!
//! Subspace `k` with weight `nu_k` and dimension `d_k` contributes `d_k`
//! slots of squared norm `nu_k^2` to the norm sequence. If the slots of one
//! subspace end up pairwise orthogonal in the constructed frame, their span
//! is `W_k` and `sum_k nu_k^2 P_k` equals the frame operator.

mod canonical;
mod ordering;
mod windows;

use serde::Serialize;

pub use canonical::{canonicalize, CanonicalStep, Canonicalized};
pub use ordering::{periodic_ordering, spread_ordering};
pub use windows::{check_window_conditions, Window, WindowCase, WindowReport};

use crate::error::Error;
use crate::reorder::{str_construct, str_preconditions, ReorderMode, StrVerdict};
use crate::types::{
    FusionFrame, FusionProblem, NormSequence, SparseFrame, Spectrum, SubspaceSpec, Tolerances,
};

/// One norm slot: squared weight, subspace label and copy index (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Slot {
    pub norm_sq: f64,
    pub label: usize,
    pub copy: usize,
}

/// Ordered slots; slot `n` becomes column `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledNormSequence {
    slots: Vec<Slot>,
}

impl LabeledNormSequence {
    /// Slots for the given label order, with norms from `subspaces`.
    pub fn from_ordering(subspaces: &[SubspaceSpec], ordering: &[usize]) -> Result<Self, Error> {
        let mut copies = vec![0usize; subspaces.len()];
        let mut slots = Vec::with_capacity(ordering.len());
        for &label in ordering {
            let spec = subspaces.get(label).ok_or_else(|| {
                Error::InvalidInput(format!("ordering references unknown subspace {}", label + 1))
            })?;
            slots.push(Slot {
                norm_sq: spec.weight * spec.weight,
                label,
                copy: copies[label],
            });
            copies[label] += 1;
        }
        if let Some(k) = (0..subspaces.len()).find(|&k| copies[k] != subspaces[k].dim) {
            return Err(Error::InvalidInput(format!(
                "ordering lists subspace {} {} times but its dimension is {}",
                k + 1,
                copies[k],
                subspaces[k].dim
            )));
        }
        let seq = LabeledNormSequence { slots };
        NormSequence::new(seq.norm_values())?;
        Ok(seq)
    }

    /// Slots from parallel lists of squared norms and labels.
    pub fn from_pairs(norms_sq: &[f64], labels: &[usize]) -> Result<Self, Error> {
        if norms_sq.len() != labels.len() {
            return Err(Error::InvalidInput(format!(
                "{} squared norms but {} labels",
                norms_sq.len(),
                labels.len()
            )));
        }
        NormSequence::new(norms_sq.to_vec())?;
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut copies = vec![0usize; k];
        let slots = norms_sq
            .iter()
            .zip(labels)
            .map(|(&norm_sq, &label)| {
                let copy = copies[label];
                copies[label] += 1;
                Slot {
                    norm_sq,
                    label,
                    copy,
                }
            })
            .collect();
        Ok(LabeledNormSequence { slots })
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    fn norm_values(&self) -> Vec<f64> {
        self.slots.iter().map(|s| s.norm_sq).collect()
    }

    pub fn norms(&self) -> NormSequence {
        NormSequence::new(self.norm_values()).expect("slot norms are positive")
    }

    pub fn labels(&self) -> Vec<usize> {
        self.slots.iter().map(|s| s.label).collect()
    }

    /// `order[n]` is the current position of the slot moved to position `n`.
    pub fn permuted(&self, order: &[usize]) -> LabeledNormSequence {
        LabeledNormSequence {
            slots: order.iter().map(|&i| self.slots[i]).collect(),
        }
    }

    /// 0-based columns carrying each label.
    pub fn parts(&self, subspaces: usize) -> Vec<Vec<usize>> {
        let mut parts = vec![Vec::new(); subspaces];
        for (n, s) in self.slots.iter().enumerate() {
            parts[s.label].push(n);
        }
        parts
    }
}

/// Outcome of one sufficient condition, with its slack. `margin` is `None`
/// when the condition is vacuous; negative margins mean violation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub name: String,
    pub satisfied: bool,
    pub margin: Option<f64>,
    pub detail: String,
}

impl ConditionCheck {
    fn inequality(name: &str, slack: f64, tol: &Tolerances, scale: f64, detail: String) -> Self {
        ConditionCheck {
            name: name.to_string(),
            satisfied: slack >= -tol.branch_eps * scale,
            margin: Some(slack),
            detail,
        }
    }

    fn equality(name: &str, lhs: f64, rhs: f64, tol: &Tolerances, detail: String) -> Self {
        ConditionCheck {
            name: name.to_string(),
            satisfied: tol.eq(lhs, rhs),
            margin: Some(-(lhs - rhs).abs()),
            detail,
        }
    }

    fn vacuous(name: &str, detail: &str) -> Self {
        ConditionCheck {
            name: name.to_string(),
            satisfied: true,
            margin: None,
            detail: detail.to_string(),
        }
    }
}

fn all_satisfied(checks: &[ConditionCheck]) -> bool {
    checks.iter().all(|c| c.satisfied)
}

/// Tightness test local to the constructors: `S^2 = c S` with
/// `S = F_J F_J^T` restricted to the rows the part touches.
struct PartGram {
    gram: Vec<Vec<f64>>,
}

impl PartGram {
    fn new(frame: &SparseFrame, part: &[usize]) -> Self {
        let mut rows: Vec<usize> = part
            .iter()
            .flat_map(|&n| frame.column(n).entries().map(|(r, _)| r))
            .collect();
        rows.sort_unstable();
        rows.dedup();
        let index = |r: usize| rows.binary_search(&r).expect("row present");
        let mut gram = vec![vec![0.0; rows.len()]; rows.len()];
        for &n in part {
            for (r, vr) in frame.column(n).entries() {
                for (c, vc) in frame.column(n).entries() {
                    gram[index(r)][index(c)] += vr * vc;
                }
            }
        }
        PartGram { gram }
    }

    fn trace(&self) -> f64 {
        (0..self.gram.len()).map(|i| self.gram[i][i]).sum()
    }

    /// Largest entry of `|S^2 - bound * S|`.
    fn deviation(&self, bound: f64) -> f64 {
        let g = &self.gram;
        let d = g.len();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let sq: f64 = (0..d).map(|k| g[i][k] * g[k][j]).sum();
                worst = worst.max((sq - bound * g[i][j]).abs());
            }
        }
        worst
    }

    /// Frame bound estimate `tr(S^2) / tr(S)`.
    fn bound(&self) -> f64 {
        let g = &self.gram;
        let sq: f64 = g.iter().flatten().map(|v| v * v).sum();
        sq / self.trace()
    }
}

fn tight_within(frame: &SparseFrame, part: &[usize], bound: f64, tol: &Tolerances) -> (bool, f64) {
    let dev = PartGram::new(frame, part).deviation(bound);
    (tol.within_verify(dev, bound * bound), dev)
}

/// Pairs a frame with a labeling of its columns, checking that the columns
/// of label `k` form a tight frame for their span with bound `weights[k]^2`.
///
/// Orthogonal columns of squared norm `nu_k^2` are the usual case; any tight
/// generating set is accepted. On failure the worst non-orthogonal pair of a
/// failing part is reported, or else the first norm mismatch.
pub fn assemble_fusion(
    frame: &SparseFrame,
    labels: &LabeledNormSequence,
    weights: &[f64],
    tol: &Tolerances,
) -> Result<FusionFrame, Error> {
    if labels.len() != frame.cols() {
        return Err(Error::InvalidInput(format!(
            "{} labels for {} columns",
            labels.len(),
            frame.cols()
        )));
    }
    let parts = labels.parts(weights.len().max(labels.labels().iter().max().map_or(0, |m| m + 1)));
    if parts.len() != weights.len() {
        return Err(Error::InvalidInput(format!(
            "labels reference {} subspaces but {} weights were given",
            parts.len(),
            weights.len()
        )));
    }
    assemble_parts(frame.clone(), parts, weights.to_vec(), tol)
}

/// [`assemble_fusion`] for explicit 0-based column sets.
pub fn assemble_parts(
    frame: SparseFrame,
    parts: Vec<Vec<usize>>,
    weights: Vec<f64>,
    tol: &Tolerances,
) -> Result<FusionFrame, Error> {
    let fusion = FusionFrame::new(frame, parts, weights)?;
    let frame = fusion.frame();
    let mut worst_pair: Option<(usize, usize, usize, f64)> = None;
    let mut first_norm: Option<Error> = None;
    for (k, (part, &w)) in fusion.parts().iter().zip(fusion.weights()).enumerate() {
        let bound = w * w;
        if tight_within(frame, part, bound, tol).0 {
            continue;
        }
        let mut pair_found = false;
        for (i, &a) in part.iter().enumerate() {
            for &b in &part[i + 1..] {
                let inner = frame.column(a).dot(frame.column(b));
                if !tol.within_verify(inner, bound) {
                    pair_found = true;
                    if worst_pair.is_none_or(|(_, _, _, v)| inner.abs() > v.abs()) {
                        worst_pair = Some((k, a, b, inner));
                    }
                }
            }
        }
        if !pair_found && first_norm.is_none() {
            if let Some(&n) = part
                .iter()
                .find(|&&n| !tol.within_verify(frame.column(n).norm_sq() - bound, bound))
            {
                first_norm = Some(Error::NormMismatch {
                    part: k + 1,
                    column: n + 1,
                    norm_sq: frame.column(n).norm_sq(),
                    expected: bound,
                });
            }
        }
    }
    if let Some((k, a, b, inner)) = worst_pair {
        return Err(Error::NonOrthogonalPart {
            part: k + 1,
            first: a + 1,
            second: b + 1,
            inner,
        });
    }
    if let Some(e) = first_norm {
        return Err(e);
    }
    Ok(fusion)
}

/// How slots are ordered before construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderingStrategy {
    /// The problem's own ordering (required).
    Explicit,
    /// [`spread_ordering`] over the subspaces sorted by ascending weight.
    Spread,
    /// [`periodic_ordering`]; all dimensions must be equal.
    Periodic,
}

/// Record of a weighted fusion construction. Labels and positions are
/// 1-based; labels refer to the problem's subspace order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstructionReport {
    /// Spectrum used, ascending; row `m` carries `spectrum[m]`.
    pub spectrum: Vec<f64>,
    pub initial_ordering: Vec<usize>,
    pub final_ordering: Vec<usize>,
    pub swaps: Vec<(usize, usize)>,
    pub conditions: Vec<ConditionCheck>,
    pub reorder_verdict: StrVerdict,
    /// Whether the success guarantee applied to this run.
    pub guaranteed: bool,
    pub windows: WindowReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionConstruction {
    pub fusion: FusionFrame,
    pub report: ConstructionReport,
}

fn sorted_problem(problem: &FusionProblem) -> (Vec<usize>, Vec<SubspaceSpec>) {
    sorted_problem_parts(problem.subspaces())
}

fn sorted_problem_parts(subs: &[SubspaceSpec]) -> (Vec<usize>, Vec<SubspaceSpec>) {
    let mut by_weight: Vec<usize> = (0..subs.len()).collect();
    by_weight.sort_by(|&i, &j| subs[i].weight.total_cmp(&subs[j].weight).then(i.cmp(&j)));
    let sorted = by_weight.iter().map(|&i| subs[i]).collect();
    (by_weight, sorted)
}

/// Average-to-peak ratio of the spectrum against `d / M`; large subspaces
/// need a flat spectrum for the spacing condition to be satisfiable.
fn flatness_note(spectrum: &Spectrum, dim: usize) -> String {
    let m = spectrum.len() as f64;
    let ratio = spectrum.total() / m / (2.0 * spectrum.max());
    format!(
        "average(lambda) / (2 max lambda) = {ratio:.6} vs d / M = {:.6}: {}",
        dim as f64 / m,
        if ratio >= dim as f64 / m {
            "spectrum is flat enough for this dimension"
        } else {
            "spectrum is not flat enough for subspaces of this dimension"
        }
    )
}

/// Checks the sufficient conditions for the given labeled ordering against
/// an ascending spectrum and ascending weights.
fn weighted_conditions(
    sorted_subspaces: &[SubspaceSpec],
    slots: &LabeledNormSequence,
    spectrum: &Spectrum,
    tol: &Tolerances,
) -> Vec<ConditionCheck> {
    let lam = spectrum.values();
    let norms = slots.norms();
    let scale = spectrum.total().max(1.0);
    let mut checks = vec![ConditionCheck::equality(
        "trace",
        norms.total(),
        spectrum.total(),
        tol,
        format!(
            "sum of squared norms {} vs sum of eigenvalues {}",
            norms.total(),
            spectrum.total()
        ),
    )];
    let k = sorted_subspaces.len();
    checks.push(if k >= 2 {
        let pair = sorted_subspaces[k - 2].weight.powi(2) + sorted_subspaces[k - 1].weight.powi(2);
        ConditionCheck::inequality(
            "largest_weights",
            lam[0] - pair,
            tol,
            scale,
            format!("two largest squared weights sum to {pair}, smallest eigenvalue is {}", lam[0]),
        )
    } else {
        ConditionCheck::vacuous("largest_weights", "only one subspace")
    });

    let values = norms.values();
    let mut prefix = vec![0.0];
    for v in values {
        prefix.push(prefix.last().unwrap() + v);
    }
    let mut last_seen: Vec<Option<usize>> = vec![None; sorted_subspaces.len().max(slots.labels().iter().max().map_or(0, |m| m + 1))];
    let mut worst: Option<(f64, usize, usize)> = None;
    for (n, s) in slots.slots().iter().enumerate() {
        if let Some(prev) = last_seen[s.label] {
            let sum = prefix[n] - prefix[prev];
            if worst.is_none_or(|(w, _, _)| sum < w) {
                worst = Some((sum, prev, n));
            }
        }
        last_seen[s.label] = Some(n);
    }
    let peak = spectrum.max();
    checks.push(match worst {
        None => ConditionCheck::vacuous("spacing", "no subspace repeats"),
        Some((sum, prev, n)) => {
            let max_dim = sorted_subspaces.iter().map(|s| s.dim).max().unwrap_or(1);
            let mut detail = format!(
                "tightest repeat: slots {}..{} carry {sum}, need at least 2 max lambda = {}",
                prev + 1,
                n,
                2.0 * peak
            );
            let check = ConditionCheck::inequality("spacing", sum - 2.0 * peak, tol, scale, String::new());
            if !check.satisfied {
                detail.push_str("; ");
                detail.push_str(&flatness_note(spectrum, max_dim));
            }
            ConditionCheck { detail, ..check }
        }
    });
    checks
}

/// Builds a weighted fusion frame with the prescribed weights, dimensions
/// and spectrum, using the problem's ordering if it has one and the spread
/// ordering otherwise.
pub fn construct_weighted_fusion(problem: &FusionProblem, tol: &Tolerances) -> Result<FusionConstruction, Error> {
    let strategy = if problem.ordering().is_some() {
        OrderingStrategy::Explicit
    } else {
        OrderingStrategy::Spread
    };
    construct_weighted_fusion_with(problem, strategy, tol)
}

pub fn construct_weighted_fusion_with(
    problem: &FusionProblem,
    strategy: OrderingStrategy,
    tol: &Tolerances,
) -> Result<FusionConstruction, Error> {
    let (by_weight, sorted) = sorted_problem(problem);
    let spectrum = problem.spectrum().sorted_ascending();
    let ordering: Vec<usize> = match strategy {
        OrderingStrategy::Explicit => problem
            .ordering()
            .ok_or_else(|| Error::InvalidInput("explicit ordering requested but none given".into()))?
            .to_vec(),
        OrderingStrategy::Spread => spread_ordering(&sorted).into_iter().map(|k| by_weight[k]).collect(),
        OrderingStrategy::Periodic => {
            let d = problem.subspaces()[0].dim;
            if problem.subspaces().iter().any(|s| s.dim != d) {
                return Err(Error::InvalidInput(
                    "periodic ordering needs all subspaces of the same dimension".into(),
                ));
            }
            periodic_ordering(sorted.len(), d).into_iter().map(|k| by_weight[k]).collect()
        }
    };
    let slots = LabeledNormSequence::from_ordering(problem.subspaces(), &ordering)?;
    let conditions = weighted_conditions(&sorted, &slots, &spectrum, tol);
    if !all_satisfied(&conditions) {
        return Err(Error::ConditionsViolated(conditions));
    }
    build_from_slots(problem, slots, spectrum, conditions, tol)
}

fn build_from_slots(
    problem: &FusionProblem,
    slots: LabeledNormSequence,
    spectrum: Spectrum,
    conditions: Vec<ConditionCheck>,
    tol: &Tolerances,
) -> Result<FusionConstruction, Error> {
    let norms = slots.norms();
    let verdict = str_preconditions(&norms, &spectrum, tol);
    let guaranteed = verdict.holds();
    let mode = if guaranteed {
        ReorderMode::Guaranteed
    } else {
        ReorderMode::BestEffort
    };
    let outcome = str_construct(&norms, &spectrum, mode, tol)?;
    let final_slots = slots.permuted(&outcome.order);
    let windows = check_window_conditions(&final_slots, &spectrum, tol)?;
    if let Some((label, first, second)) = windows.first_conflict() {
        return Err(if guaranteed {
            Error::Defect(format!(
                "columns {first} and {second} of subspace {label} overlap although the sufficient conditions hold"
            ))
        } else {
            Error::WindowConflict {
                label,
                first,
                second,
            }
        });
    }
    let weights: Vec<f64> = problem.subspaces().iter().map(|s| s.weight).collect();
    let fusion = assemble_fusion(&outcome.frame, &final_slots, &weights, tol).map_err(|e| {
        Error::Defect(format!("window check passed but assembly failed: {e}"))
    })?;
    let report = ConstructionReport {
        spectrum: spectrum.values().to_vec(),
        initial_ordering: slots.labels().iter().map(|l| l + 1).collect(),
        final_ordering: final_slots.labels().iter().map(|l| l + 1).collect(),
        swaps: outcome.swaps.iter().map(|&(a, b)| (a + 1, b + 1)).collect(),
        conditions,
        reorder_verdict: verdict,
        guaranteed,
        windows,
    };
    Ok(FusionConstruction { fusion, report })
}

fn validate_equidim(weights: &[f64], dim: usize) -> Result<Vec<f64>, Error> {
    if weights.is_empty() {
        return Err(Error::InvalidInput("weight list must not be empty".into()));
    }
    if dim == 0 {
        return Err(Error::InvalidInput("subspace dimension must be at least 1".into()));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(Error::InvalidInput(format!("weight {w} must be positive")));
    }
    let mut sorted = weights.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted)
}

/// Subspaces in the caller's order; the slots run through them by
/// ascending weight, `dim` times over.
fn equidim_problem(weights: &[f64], dim: usize, spectrum: Spectrum) -> Result<FusionProblem, Error> {
    let subspaces: Vec<SubspaceSpec> = weights.iter().map(|&weight| SubspaceSpec { weight, dim }).collect();
    let (by_weight, _) = sorted_problem_parts(&subspaces);
    let ordering = periodic_ordering(weights.len(), dim).into_iter().map(|k| by_weight[k]).collect();
    FusionProblem::new(subspaces, spectrum, Some(ordering))
}

fn largest_pair_check(sorted: &[f64], bound: f64, tol: &Tolerances) -> ConditionCheck {
    let k = sorted.len();
    if k < 2 {
        return ConditionCheck::vacuous("largest_weights", "only one subspace");
    }
    let pair = sorted[k - 2].powi(2) + sorted[k - 1].powi(2);
    ConditionCheck::inequality(
        "largest_weights",
        bound - pair,
        tol,
        bound.max(1.0),
        format!("two largest squared weights sum to {pair}, smallest eigenvalue is {bound}"),
    )
}

/// Tight fusion frame in `R^M`: all subspaces of dimension `dim`, operator
/// `lambda I` with `lambda = dim * sum(nu_k^2) / M`.
pub fn tight_equidim_fusion(
    weights: &[f64],
    dim: usize,
    ambient: usize,
    tol: &Tolerances,
) -> Result<FusionConstruction, Error> {
    let sorted = validate_equidim(weights, dim)?;
    if ambient == 0 {
        return Err(Error::InvalidInput("ambient dimension must be at least 1".into()));
    }
    let total: f64 = sorted.iter().map(|w| w * w).sum();
    let lambda = dim as f64 * total / ambient as f64;
    let ratio = dim as f64 / ambient as f64;
    let checks = vec![
        largest_pair_check(&sorted, lambda, tol),
        ConditionCheck::inequality(
            "dimension_ratio",
            0.5 - ratio,
            tol,
            1.0,
            format!("d / M = {ratio}, must not exceed 1/2"),
        ),
    ];
    if !all_satisfied(&checks) {
        return Err(Error::ConditionsViolated(checks));
    }
    let problem = equidim_problem(weights, dim, Spectrum::new(vec![lambda; ambient])?)?;
    construct_weighted_fusion_with(&problem, OrderingStrategy::Explicit, tol)
}

/// Fusion frame with subspaces of equal dimension `dim` and a prescribed
/// (not necessarily flat) spectrum.
pub fn nontight_equidim_fusion(
    weights: &[f64],
    dim: usize,
    spectrum: &Spectrum,
    tol: &Tolerances,
) -> Result<FusionConstruction, Error> {
    let sorted = validate_equidim(weights, dim)?;
    let spectrum = spectrum.sorted_ascending();
    let total: f64 = sorted.iter().map(|w| w * w).sum();
    let scale = spectrum.total().max(1.0);
    let period = ConditionCheck::inequality(
        "period_mass",
        total - 2.0 * spectrum.max(),
        tol,
        scale,
        String::new(),
    );
    let period_detail = {
        let base = format!(
            "one period of squared weights carries {total}, need at least 2 max lambda = {}",
            2.0 * spectrum.max()
        );
        if period.satisfied {
            base
        } else {
            format!("{base}; {}", flatness_note(&spectrum, dim))
        }
    };
    let checks = vec![
        ConditionCheck::equality(
            "trace",
            dim as f64 * total,
            spectrum.total(),
            tol,
            format!(
                "d times the sum of squared weights is {}, sum of eigenvalues is {}",
                dim as f64 * total,
                spectrum.total()
            ),
        ),
        largest_pair_check(&sorted, spectrum.values()[0], tol),
        ConditionCheck {
            detail: period_detail,
            ..period
        },
    ];
    if !all_satisfied(&checks) {
        return Err(Error::ConditionsViolated(checks));
    }
    let problem = equidim_problem(weights, dim, spectrum)?;
    construct_weighted_fusion_with(&problem, OrderingStrategy::Explicit, tol)
}
