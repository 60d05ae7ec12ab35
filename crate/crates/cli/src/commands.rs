use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde_json::{json, Value};
use spectral_tetris::fusion::FusionConstruction;
use spectral_tetris::{
    audit, canonicalize as canonicalize_bundle, construct_weighted_fusion_with, exists_ready_permutation,
    nontight_equidim_fusion, readiness_partition, stc_construct, str_construct, str_preconditions,
    tight_equidim_fusion, AuditExpectations, AuditTarget, FusionFrame, FusionProblem, OrderingStrategy,
    ReorderMode, SearchConfig, Spectrum, Tolerances, VerificationReport,
};

use crate::formats::{
    load_matrix_or_bundle, one_based_parts, pretty, write_bundle, write_dense_csv, write_sparse_json,
    ExpectationsFile, FrameProblemFile, FusionProblemFile, Loaded,
};
use crate::{CliError, MatrixFormat, OrderingChoice, EXIT_INFEASIBLE, EXIT_OK, EXIT_VERIFY, TOLERANCE_ENV};

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

/// Writes `content` to `out`, printing `summary`; without `out` the content
/// itself goes to stdout.
fn emit(out: Option<&Path>, content: &str, summary: Value) -> Result<(), CliError> {
    match out {
        Some(path) => {
            fs::write(path, content).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
            print!("{}", pretty(&summary));
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn audit_summary(report: &VerificationReport) -> Value {
    json!({
        "pass": report.pass,
        "spectrum_max_deviation": report.spectrum_max_deviation,
        "max_norm_deviation": report.max_norm_deviation,
        "fusion_operator_deviation": report.fusion_operator_deviation,
        "nonzeros": report.sparsity.nonzeros,
        "lower_bound": report.lower_bound,
        "upper_bound": report.upper_bound,
        "failures": report.failures,
    })
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

pub fn check_ready(problem: &Path, search: bool, budget: Option<usize>) -> Result<u8, CliError> {
    let (norms, spectrum) = FrameProblemFile::parse(&read(problem)?)?;
    let tol = Tolerances::default();
    let given = readiness_partition(&norms, &spectrum, &tol);
    if !search {
        return match given {
            Ok(p) => {
                let blocks: Vec<usize> = p.strict().iter().enumerate().filter(|(_, s)| **s).map(|(k, _)| k + 1).collect();
                print!(
                    "{}",
                    pretty(&json!({ "ready": true, "partition": p.indices(), "block_rows": blocks }))
                );
                Ok(EXIT_OK)
            }
            Err(failure) => Err(CliError {
                code: EXIT_INFEASIBLE,
                message: format!("ordering is not ready: {failure}"),
                details: Some(json!({ "readiness": failure })),
            }),
        };
    }
    let mut config = SearchConfig::default();
    if let Some(b) = budget {
        config.budget = b;
    }
    let cert = exists_ready_permutation(&norms, &spectrum, &config, &tol)?;
    print!(
        "{}",
        pretty(&json!({
            "ready": given.is_ok(),
            "certificate": {
                "norm_order": one_based(&cert.norm_order),
                "spectrum_order": one_based(&cert.spectrum_order),
                "norms_sq": cert.norms.values(),
                "spectrum": cert.spectrum.values(),
                "partition": cert.partition.indices(),
                "examined": cert.examined,
            }
        }))
    );
    Ok(EXIT_OK)
}

pub fn frame(problem: &Path, reorder: bool, out: Option<&Path>, format: MatrixFormat) -> Result<u8, CliError> {
    let (norms, spectrum) = FrameProblemFile::parse(&read(problem)?)?;
    let tol = Tolerances::default();
    let mut meta = BTreeMap::new();
    let (frame, final_norms) = if reorder {
        let verdict = str_preconditions(&norms, &spectrum, &tol);
        let mode = if verdict.holds() {
            ReorderMode::Guaranteed
        } else {
            ReorderMode::BestEffort
        };
        let outcome = str_construct(&norms, &spectrum, mode, &tol)?;
        let swaps: Vec<(usize, usize)> = outcome.swaps.iter().map(|&(a, b)| (a + 1, b + 1)).collect();
        meta.insert("order".to_string(), json!(one_based(&outcome.order)));
        meta.insert("swaps".to_string(), json!(swaps));
        meta.insert("norms_sq".to_string(), json!(outcome.ordering.values()));
        meta.insert("guaranteed".to_string(), json!(verdict.holds()));
        (outcome.frame, outcome.ordering)
    } else {
        (stc_construct(&norms, &spectrum, &tol)?, norms)
    };
    let expected = AuditExpectations {
        spectrum: Some(spectrum),
        norms_sq: Some(final_norms.values().to_vec()),
        ..Default::default()
    };
    let report = audit(AuditTarget::Frame(&frame), &expected, &tol)?;
    meta.insert("audit".to_string(), audit_summary(&report));
    let content = match format {
        MatrixFormat::DenseCsv => write_dense_csv(&frame, &meta),
        MatrixFormat::SparseJson => write_sparse_json(&frame, &meta),
    };
    let mut summary = json!({ "status": "ok", "rows": frame.rows(), "cols": frame.cols() });
    if let Some(path) = out {
        summary["out"] = json!(path.display().to_string());
    }
    for key in ["swaps", "audit"] {
        if let Some(v) = meta.get(key) {
            summary[key] = v.clone();
        }
    }
    emit(out, &content, summary)?;
    Ok(if report.pass { EXIT_OK } else { EXIT_VERIFY })
}

/// Equal dimensions without an explicit ordering go to the equal-dimension
/// constructions: the tight one when the spectrum is flat and consistent
/// with the trace, the general one otherwise.
fn route(problem: &FusionProblem, choice: Option<OrderingChoice>, tol: &Tolerances) -> Result<(&'static str, FusionConstruction), CliError> {
    let general = |strategy, name| Ok((name, construct_weighted_fusion_with(problem, strategy, tol)?));
    match choice {
        Some(OrderingChoice::Explicit) => return general(OrderingStrategy::Explicit, "explicit"),
        Some(OrderingChoice::Spread) => return general(OrderingStrategy::Spread, "spread"),
        Some(OrderingChoice::Periodic) => return general(OrderingStrategy::Periodic, "periodic"),
        None if problem.ordering().is_some() => return general(OrderingStrategy::Explicit, "explicit"),
        None => {}
    }
    let subs = problem.subspaces();
    let d = subs[0].dim;
    if subs.iter().any(|s| s.dim != d) {
        return general(OrderingStrategy::Spread, "spread");
    }
    let weights: Vec<f64> = subs.iter().map(|s| s.weight).collect();
    let spectrum = problem.spectrum();
    let slots: f64 = weights.iter().map(|w| w * w).sum::<f64>() * d as f64;
    let flat = tol.eq(spectrum.min(), spectrum.max());
    if flat && tol.eq(slots, spectrum.total()) {
        Ok(("tight", tight_equidim_fusion(&weights, d, spectrum.len(), tol)?))
    } else {
        Ok(("equal_dimension", nontight_equidim_fusion(&weights, d, spectrum, tol)?))
    }
}

pub fn fusion(problem: &Path, ordering: Option<OrderingChoice>, out: Option<&Path>) -> Result<u8, CliError> {
    let problem = FusionProblemFile::parse(&read(problem)?)?;
    let tol = Tolerances::default();
    let (route_name, built) = route(&problem, ordering, &tol)?;
    let expected = AuditExpectations {
        spectrum: Some(problem.spectrum().clone()),
        weights: Some(problem.subspaces().iter().map(|s| s.weight).collect()),
        dims: Some(problem.subspaces().iter().map(|s| s.dim).collect()),
        ..Default::default()
    };
    let report = audit(AuditTarget::Fusion(&built.fusion), &expected, &tol)?;
    let mut meta = BTreeMap::new();
    meta.insert("route".to_string(), json!(route_name));
    meta.insert("report".to_string(), serde_json::to_value(&built.report).expect("serializable"));
    meta.insert("audit".to_string(), audit_summary(&report));
    let content = write_bundle(&built.fusion, &meta);
    let mut summary = json!({
        "status": "ok",
        "route": route_name,
        "rows": built.fusion.frame().rows(),
        "cols": built.fusion.frame().cols(),
        "final_ordering": built.report.final_ordering,
        "swaps": built.report.swaps,
        "audit": audit_summary(&report),
    });
    if let Some(path) = out {
        summary["out"] = json!(path.display().to_string());
    }
    emit(out, &content, summary)?;
    Ok(if report.pass { EXIT_OK } else { EXIT_VERIFY })
}

fn verify_tolerance(flag: Option<f64>) -> Result<Tolerances, CliError> {
    let value = match flag {
        Some(v) => Some(v),
        None => match std::env::var(TOLERANCE_ENV) {
            Ok(s) => Some(
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| CliError::input(format!("{TOLERANCE_ENV}={s:?}: {e}")))?,
            ),
            Err(_) => None,
        },
    };
    match value {
        None => Ok(Tolerances::default()),
        Some(v) => {
            let branch = Tolerances::default().branch_eps.min(v);
            Tolerances::new(branch, v).map_err(CliError::from)
        }
    }
}

pub fn verify(matrix: &Path, expectations: Option<&Path>, tolerance: Option<f64>) -> Result<u8, CliError> {
    let tol = verify_tolerance(tolerance)?;
    let loaded = load_matrix_or_bundle(&read(matrix)?)?;
    let exp = match expectations {
        Some(p) => ExpectationsFile::parse(&read(p)?)?,
        None => ExpectationsFile::default(),
    };
    let meta = match &loaded {
        Loaded::Matrix(m) => &m.meta,
        Loaded::Bundle(b) => &b.meta,
    };
    // a reordered frame records which input norm went to each column
    let order: Option<Vec<usize>> = meta.get("order").and_then(|v| serde_json::from_value(v.clone()).ok());
    let norms_sq = exp.norms_sq.clone().map(|n| match &order {
        Some(o) if o.len() == n.len() && o.iter().all(|&i| i >= 1 && i <= n.len()) => {
            o.iter().map(|&i| n[i - 1]).collect()
        }
        _ => n,
    });
    let weights = exp
        .weights
        .clone()
        .or_else(|| exp.subspaces.as_ref().map(|s| s.iter().map(|e| e.weight).collect()));
    let dims = exp
        .dims
        .clone()
        .or_else(|| exp.subspaces.as_ref().map(|s| s.iter().map(|e| e.dim).collect()));
    let expected = AuditExpectations {
        spectrum: exp.spectrum.clone().map(Spectrum::new).transpose()?,
        norms_sq,
        weights: weights.clone(),
        dims,
    };

    let assembled;
    let target = match &loaded {
        Loaded::Bundle(b) => AuditTarget::Fusion(&b.fusion),
        Loaded::Matrix(m) => match &exp.parts {
            None => AuditTarget::Frame(&m.frame),
            Some(parts) => {
                let parts = one_based_parts(parts)?;
                let w = match weights {
                    Some(w) => w,
                    None => parts
                        .iter()
                        .map(|p| {
                            let mean = p.iter().filter(|&&c| c < m.frame.cols()).map(|&c| m.frame.column(c).norm_sq()).sum::<f64>()
                                / p.len().max(1) as f64;
                            mean.sqrt()
                        })
                        .collect(),
                };
                assembled = FusionFrame::new(m.frame.clone(), parts, w)?;
                AuditTarget::Fusion(&assembled)
            }
        },
    };
    let report = audit(target, &expected, &tol)?;
    print!("{}", pretty(&serde_json::to_value(&report).expect("serializable")));
    if !report.pass {
        eprintln!("verification failed: {}", report.failures.join("; "));
    }
    Ok(if report.pass { EXIT_OK } else { EXIT_VERIFY })
}

pub fn canonicalize(bundle: &Path, out: Option<&Path>) -> Result<u8, CliError> {
    let Loaded::Bundle(bundle) = load_matrix_or_bundle(&read(bundle)?)? else {
        return Err(CliError::input("canonicalize needs a bundle with parts and weights".into()));
    };
    let tol = Tolerances::default();
    let result = canonicalize_bundle(bundle.fusion.frame(), bundle.fusion.parts(), &tol)?;
    let mut meta = BTreeMap::new();
    meta.insert("norms_sq".to_string(), json!(result.norms.values()));
    meta.insert("steps".to_string(), serde_json::to_value(&result.steps).expect("serializable"));
    let content = write_bundle(&result.fusion, &meta);
    let mut summary = json!({
        "status": "ok",
        "cols": result.fusion.frame().cols(),
        "steps": result.steps,
    });
    if let Some(path) = out {
        summary["out"] = json!(path.display().to_string());
    }
    emit(out, &content, summary)?;
    Ok(EXIT_OK)
}
