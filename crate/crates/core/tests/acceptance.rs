//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectral_tetris::verify::{frame_operator, fusion_operator, symmetric_eigenvalues, DenseMatrix};
use spectral_tetris::{
    assemble_fusion, audit, canonicalize, construct_weighted_fusion_with, exists_ready_permutation,
    greedy_construct, nontight_equidim_fusion, readiness_partition, spread_ordering, stc_construct,
    str_construct, tight_equidim_fusion, AuditExpectations, AuditTarget, CanonicalStep, Error, FusionFrame,
    FusionProblem, LabeledNormSequence, NormSequence, OrderingStrategy, ReorderMode, SearchConfig,
    Spectrum, SubspaceSpec, Tolerances,
};

type Outcome = Result<String, String>;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn norms(v: &[f64]) -> NormSequence {
    NormSequence::new(v.to_vec()).unwrap()
}

fn spec(v: &[f64]) -> Spectrum {
    Spectrum::new(v.to_vec()).unwrap()
}

fn max_entry_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x.len() != y.len()) {
        return f64::INFINITY;
    }
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Largest entry of `|sum nu_k^2 P_k - F F^T|`.
fn equivalence_gap(fusion: &FusionFrame) -> Result<f64, String> {
    let projections = fusion_operator(fusion, &tol()).map_err(|e| e.to_string())?;
    Ok(projections.max_abs_diff(&frame_operator(fusion.frame())))
}

fn example_2_3() -> Outcome {
    let start = Instant::now();
    let f = stc_construct(&norms(&[1.0, 3.0, 2.0, 2.0]), &spec(&[2.0, 6.0]), &tol()).map_err(|e| e.to_string())?;
    let s = f64::sqrt;
    let expected = vec![
        vec![1.0, s(1.0 / 3.0), s(2.0 / 3.0), 0.0],
        vec![0.0, s(8.0 / 3.0), -s(4.0 / 3.0), s(2.0)],
    ];
    let dev = max_entry_diff(&f.to_dense(), &expected);
    let elapsed = start.elapsed().as_secs_f64();
    ensure(dev <= 1e-12, || format!("max entry deviation {dev:e}"))?;
    ensure(elapsed < 1.0, || format!("took {elapsed} s"))?;
    Ok(format!("max entry deviation {dev:e}, {:.3} ms", elapsed * 1e3))
}

fn example_3_1(corpus: &mut Vec<FusionFrame>) -> Outcome {
    let s = f64::sqrt;
    let cases: [(&[f64], Vec<Vec<f64>>, Vec<usize>); 3] = [
        (&[2.0, 2.0, 1.0], vec![vec![s(2.0), 0.0, 0.0], vec![0.0, s(2.0), 1.0]], vec![0, 0, 1]),
        (
            &[1.0, 1.0, 2.0, 1.0],
            vec![vec![1.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, s(2.0), 1.0]],
            vec![0, 0, 0, 1],
        ),
        (
            &[1.0, 1.5, 1.5, 1.0],
            vec![vec![1.0, s(0.5), s(0.5), 0.0], vec![0.0, 1.0, -1.0, 1.0]],
            vec![0, 0, 0, 1],
        ),
    ];
    let weights = [s(2.0), 1.0];
    let target = DenseMatrix::diagonal(&[2.0, 3.0]);
    let mut frames = Vec::new();
    let mut worst_entry: f64 = 0.0;
    let mut worst_op: f64 = 0.0;
    for (name, (n, expected, labels)) in ["a", "b", "c"].iter().zip(cases) {
        let f = stc_construct(&norms(n), &spec(&[2.0, 3.0]), &tol()).map_err(|e| format!("({name}): {e}"))?;
        let dev = max_entry_diff(&f.to_dense(), &expected);
        ensure(dev <= 1e-12, || format!("({name}) entry deviation {dev:e}"))?;
        worst_entry = worst_entry.max(dev);
        let labeled = LabeledNormSequence::from_pairs(n, &labels).unwrap();
        let fusion = assemble_fusion(&f, &labeled, &weights, &tol()).map_err(|e| format!("({name}) assemble: {e}"))?;
        let op = fusion_operator(&fusion, &tol()).map_err(|e| e.to_string())?;
        let dev = op.max_abs_diff(&target);
        ensure(dev <= 1e-9, || format!("({name}) fusion operator deviation {dev:e}"))?;
        worst_op = worst_op.max(dev);
        corpus.push(fusion.clone());
        frames.push((f, fusion));
    }

    let (c, c_fusion) = &frames[2];
    let out = canonicalize(c, c_fusion.parts(), &tol()).map_err(|e| format!("canonicalize (c): {e}"))?;
    ensure(out.steps.len() == 2, || format!("expected 2 steps, got {:?}", out.steps))?;
    ensure(matches!(out.steps[0], CanonicalStep::Split { columns: (2, 3), .. }), || {
        format!("first step should split columns 2-3, got {:?}", out.steps[0])
    })?;
    ensure(matches!(out.steps[1], CanonicalStep::Merge { kept: 1, removed: 2, .. }), || {
        format!("second step should merge columns 1-2, got {:?}", out.steps[1])
    })?;
    // replay the split alone to confirm the intermediate layout is (b)
    let CanonicalStep::Split { x, y, .. } = out.steps[0] else { unreachable!() };
    let mut mid = c.to_dense();
    mid[0][1] = x.sqrt();
    mid[1][1] = 0.0;
    mid[0][2] = 0.0;
    mid[1][2] = y.sqrt();
    let dev_b = max_entry_diff(&mid, &frames[1].0.to_dense());
    ensure(dev_b <= 1e-12, || format!("intermediate differs from (b) by {dev_b:e}"))?;
    let dev_a = max_entry_diff(&out.fusion.frame().to_dense(), &frames[0].0.to_dense());
    ensure(dev_a <= 1e-12, || format!("canonical form differs from (a) by {dev_a:e}"))?;
    ensure(out.fusion.parts() == frames[0].1.parts(), || "canonical parts differ from (a)".into())?;

    let b = &frames[1];
    let out_b = canonicalize(&b.0, b.1.parts(), &tol()).map_err(|e| format!("canonicalize (b): {e}"))?;
    ensure(out_b.steps.len() == 1, || format!("(b) took {} steps", out_b.steps.len()))?;
    let dev = max_entry_diff(&out_b.fusion.frame().to_dense(), &frames[0].0.to_dense());
    ensure(dev <= 1e-12, || format!("(b) canonical form differs from (a) by {dev:e}"))?;
    corpus.push(out.fusion);
    corpus.push(out_b.fusion);
    Ok(format!(
        "frames within {worst_entry:e}, fusion operators within {worst_op:e}, (c) -> (b) -> (a)"
    ))
}

fn quarter(rng: &mut ChaCha8Rng, lo: u32, hi: u32) -> f64 {
    rng.gen_range(lo..=hi) as f64 / 4.0
}

/// Splits `total` (a multiple of 1/4) into random quarter-multiple parts of
/// at most `cap` quarters each.
fn compose(rng: &mut ChaCha8Rng, total: f64, cap: u32) -> Vec<f64> {
    let mut left = (total * 4.0).round() as u32;
    let mut parts = Vec::new();
    while left > 0 {
        let p = rng.gen_range(1..=cap.min(left));
        parts.push(p as f64 / 4.0);
        left -= p;
    }
    parts
}

fn readiness_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let t = tol();
    let (mut ready, mut refused, mut trace_off) = (0, 0, 0);
    for i in 0..2000 {
        let m = rng.gen_range(1..=5);
        let lam: Vec<f64> = (0..m).map(|_| quarter(&mut rng, 2, 24)).collect();
        let total: f64 = lam.iter().sum();
        let cap = rng.gen_range(2..=24);
        let mut a = compose(&mut rng, total, cap);
        if a.len() > 10 {
            continue;
        }
        if i % 10 == 0 {
            let k = rng.gen_range(0..a.len());
            a[k] += 0.25;
            trace_off += 1;
        }
        let (n, s) = (norms(&a), spec(&lam));
        let readiness = readiness_partition(&n, &s, &t);
        let built = greedy_construct(&n, &s, &t);
        let audited = match &built {
            Ok(f) => {
                let expect = AuditExpectations {
                    spectrum: Some(s.clone()),
                    norms_sq: Some(a.clone()),
                    ..Default::default()
                };
                audit(AuditTarget::Frame(f), &expect, &t).map_err(|e| e.to_string())?.pass
            }
            Err(_) => false,
        };
        if readiness.is_ok() != audited {
            return Err(format!(
                "disagreement on norms {a:?}, spectrum {lam:?}: readiness {readiness:?}, construction {:?}",
                built.map(|f| f.to_dense())
            ));
        }
        if readiness.is_ok() {
            ready += 1;
            let gated = stc_construct(&n, &s, &t).map_err(|e| e.to_string())?;
            ensure(gated == built.unwrap(), || "gated and ungated constructions differ".into())?;
        } else {
            refused += 1;
        }
    }
    ensure(ready + refused >= 1000 && ready >= 100 && refused >= 100, || {
        format!("suite too unbalanced: {ready} ready, {refused} refused")
    })?;
    Ok(format!(
        "{} instances ({ready} ready, {refused} refused, {trace_off} with trace perturbed), 0 disagreements",
        ready + refused
    ))
}

fn reorder_guarantee() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let t = tol();
    let mut total_swaps = 0;
    let count = 1500;
    for i in 0..count {
        let m = rng.gen_range(1..=5);
        let (lam, mut a) = if i % 2 == 0 {
            let lam: Vec<f64> = (0..m).map(|_| quarter(&mut rng, 8, 24)).collect();
            let min = lam.iter().cloned().fold(f64::INFINITY, f64::min);
            let cap = (min * 2.0).floor() as u32;
            let a = compose(&mut rng, lam.iter().sum(), cap);
            (lam, a)
        } else {
            let lam: Vec<f64> = (0..m).map(|_| rng.gen_range(1.0..6.0)).collect();
            let min = lam.iter().cloned().fold(f64::INFINITY, f64::min);
            let total: f64 = lam.iter().sum();
            let mut a = Vec::new();
            let mut sum = 0.0;
            while sum < total * 0.999 {
                let v = rng.gen_range(0.05..0.45) * min;
                a.push(v);
                sum += v;
            }
            let scale = total / sum;
            (lam, a.into_iter().map(|v| v * scale).collect())
        };
        a.shuffle(&mut rng);
        let (n, s) = (norms(&a), spec(&lam));
        let out = str_construct(&n, &s, ReorderMode::Guaranteed, &t)
            .map_err(|e| format!("norms {a:?}, spectrum {lam:?}: {e}"))?;
        let expect = AuditExpectations {
            spectrum: Some(s.clone()),
            norms_sq: Some(out.ordering.values().to_vec()),
            ..Default::default()
        };
        let report = audit(AuditTarget::Frame(&out.frame), &expect, &t).map_err(|e| e.to_string())?;
        ensure(report.pass, || format!("audit failed on {a:?} / {lam:?}: {:?}", report.failures))?;
        ensure(out.swaps.iter().all(|&(p, q)| q == p + 1), || format!("non-adjacent swap in {:?}", out.swaps))?;
        let mut replay: Vec<usize> = (0..a.len()).collect();
        for &(p, q) in &out.swaps {
            replay.swap(p, q);
        }
        ensure(replay == out.order, || "swap log does not reproduce the final order".into())?;
        total_swaps += out.swaps.len();
    }
    Ok(format!("{count} instances, all audited, {total_swaps} adjacent swaps logged"))
}

struct FusionCase {
    problem: FusionProblem,
    strategy: OrderingStrategy,
}

/// Independent check of the sufficient conditions for a labeled ordering.
fn conditions_hold(subs: &[SubspaceSpec], ordering: &[usize], lam: &[f64]) -> bool {
    let sq: Vec<f64> = ordering.iter().map(|&k| subs[k].weight.powi(2)).collect();
    let total: f64 = sq.iter().sum();
    let lam_total: f64 = lam.iter().sum();
    if (total - lam_total).abs() > 1e-9 * lam_total {
        return false;
    }
    let lam_min = lam.iter().cloned().fold(f64::INFINITY, f64::min);
    let lam_max = lam.iter().cloned().fold(0.0, f64::max);
    let mut w: Vec<f64> = subs.iter().map(|s| s.weight.powi(2)).collect();
    w.sort_by(f64::total_cmp);
    if w.len() >= 2 && w[w.len() - 1] + w[w.len() - 2] > lam_min + 1e-12 {
        return false;
    }
    for (i, &k) in ordering.iter().enumerate() {
        if let Some(j) = ordering[i + 1..].iter().position(|&l| l == k) {
            let between: f64 = sq[i..i + 1 + j].iter().sum();
            if between < 2.0 * lam_max - 1e-12 {
                return false;
            }
        }
    }
    true
}

fn spectrum_around(rng: &mut ChaCha8Rng, total: f64, m: usize, spread: f64) -> Vec<f64> {
    let jitter: Vec<f64> = (0..m).map(|_| rng.gen_range(-spread..=spread)).collect();
    let mean = jitter.iter().sum::<f64>() / m as f64;
    jitter.iter().map(|j| total / m as f64 + j - mean).collect()
}

fn check_fusion(
    fusion: &FusionFrame,
    subs: &[SubspaceSpec],
    lam: &[f64],
    corpus: &mut Vec<FusionFrame>,
) -> Result<(), String> {
    let t = tol();
    let frame = fusion.frame();
    for (k, part) in fusion.parts().iter().enumerate() {
        ensure(part.len() == subs[k].dim, || format!("part {} has {} columns", k + 1, part.len()))?;
        let w2 = subs[k].weight.powi(2);
        for (i, &a) in part.iter().enumerate() {
            let dev = (frame.column(a).norm_sq() - w2).abs();
            ensure(dev <= 1e-9 * w2.max(1.0), || format!("column {} norm off by {dev:e}", a + 1))?;
            for &b in &part[i + 1..] {
                let inner = frame.column(a).dot(frame.column(b));
                ensure(inner.abs() <= 1e-9, || format!("columns {} and {} meet at {inner:e}", a + 1, b + 1))?;
            }
        }
    }
    let expect = AuditExpectations {
        spectrum: Some(spec(lam)),
        weights: Some(subs.iter().map(|s| s.weight).collect()),
        dims: Some(subs.iter().map(|s| s.dim).collect()),
        ..Default::default()
    };
    let report = audit(AuditTarget::Fusion(fusion), &expect, &t).map_err(|e| e.to_string())?;
    ensure(report.pass, || format!("audit: {:?}", report.failures))?;
    let op = fusion_operator(fusion, &t).map_err(|e| e.to_string())?;
    let eig = symmetric_eigenvalues(&op, 1e-14).map_err(|e| e.to_string())?;
    let mut want = lam.to_vec();
    want.sort_by(f64::total_cmp);
    let dev = eig.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure(dev <= 1e-9, || format!("fusion spectrum off by {dev:e}"))?;
    corpus.push(fusion.clone());
    Ok(())
}

fn fusion_suite(corpus: &mut Vec<FusionFrame>) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let t = tol();
    let (mut general, mut tight, mut nontight, mut attempts) = (0, 0, 0, 0);
    while general.min(tight).min(nontight) < 200 {
        attempts += 1;
        ensure(attempts < 200_000, || "could not generate enough instances".into())?;
        let pick = [general, tight, nontight].iter().enumerate().min_by_key(|&(_, c)| *c).unwrap().0;
        match pick {
            0 => {
                let k = rng.gen_range(2..=8);
                let subs: Vec<SubspaceSpec> = (0..k)
                    .map(|_| SubspaceSpec {
                        weight: quarter(&mut rng, 1, 8).sqrt(),
                        dim: rng.gen_range(1..=3),
                    })
                    .collect();
                let total: f64 = subs.iter().map(|s| s.weight.powi(2) * s.dim as f64).sum();
                let mut w2: Vec<f64> = subs.iter().map(|s| s.weight.powi(2)).collect();
                w2.sort_by(f64::total_cmp);
                let max_dim = subs.iter().map(|s| s.dim).max().unwrap();
                let upper = (total / (w2[k - 1] + w2[k - 2])).floor() as usize;
                if upper < 2 * max_dim {
                    continue;
                }
                let m = rng.gen_range(2 * max_dim..=upper);
                let lam = spectrum_around(&mut rng, total, m, 0.3);
                if lam.iter().any(|&l| l <= 0.0) {
                    continue;
                }
                let mut by_weight: Vec<usize> = (0..k).collect();
                by_weight.sort_by(|&i, &j| subs[i].weight.total_cmp(&subs[j].weight).then(i.cmp(&j)));
                let sorted: Vec<SubspaceSpec> = by_weight.iter().map(|&i| subs[i]).collect();
                let ordering: Vec<usize> = spread_ordering(&sorted).into_iter().map(|i| by_weight[i]).collect();
                if !conditions_hold(&subs, &ordering, &lam) {
                    continue;
                }
                let case = FusionCase {
                    problem: FusionProblem::new(subs.clone(), spec(&lam), None).unwrap(),
                    strategy: OrderingStrategy::Spread,
                };
                let out = construct_weighted_fusion_with(&case.problem, case.strategy, &t)
                    .map_err(|e| format!("subspaces {subs:?}, spectrum {lam:?}: {e}"))?;
                let mut sorted_lam = lam.clone();
                sorted_lam.sort_by(f64::total_cmp);
                check_fusion(&out.fusion, &subs, &sorted_lam, corpus).map_err(|e| format!("{subs:?} / {lam:?}: {e}"))?;
                general += 1;
            }
            1 => {
                let k = rng.gen_range(2..=8);
                let mut w: Vec<f64> = (0..k).map(|_| quarter(&mut rng, 1, 8).sqrt()).collect();
                w.sort_by(f64::total_cmp);
                let d = rng.gen_range(1..=3);
                let m = rng.gen_range(2 * d..=2 * d + 6);
                let total: f64 = w.iter().map(|x| x * x).sum();
                let lambda = d as f64 * total / m as f64;
                if w[k - 1].powi(2) + w[k - 2].powi(2) > lambda {
                    continue;
                }
                let out = tight_equidim_fusion(&w, d, m, &t).map_err(|e| format!("weights {w:?}, d {d}, M {m}: {e}"))?;
                let subs: Vec<SubspaceSpec> = w.iter().map(|&weight| SubspaceSpec { weight, dim: d }).collect();
                check_fusion(&out.fusion, &subs, &vec![lambda; m], corpus)
                    .map_err(|e| format!("weights {w:?}, d {d}, M {m}: {e}"))?;
                tight += 1;
            }
            _ => {
                let k = rng.gen_range(2..=8);
                let mut w: Vec<f64> = (0..k).map(|_| quarter(&mut rng, 1, 8).sqrt()).collect();
                w.sort_by(f64::total_cmp);
                let d = rng.gen_range(1..=3);
                let total: f64 = w.iter().map(|x| x * x).sum();
                let m = rng.gen_range(2 * d..=2 * d + 6);
                let lam = spectrum_around(&mut rng, d as f64 * total, m, 0.4);
                let lam_min = lam.iter().cloned().fold(f64::INFINITY, f64::min);
                let lam_max = lam.iter().cloned().fold(0.0, f64::max);
                if lam_min <= 0.0 || w[k - 1].powi(2) + w[k - 2].powi(2) > lam_min || total < 2.0 * lam_max {
                    continue;
                }
                let out = nontight_equidim_fusion(&w, d, &spec(&lam), &t)
                    .map_err(|e| format!("weights {w:?}, d {d}, spectrum {lam:?}: {e}"))?;
                let subs: Vec<SubspaceSpec> = w.iter().map(|&weight| SubspaceSpec { weight, dim: d }).collect();
                let mut sorted_lam = lam.clone();
                sorted_lam.sort_by(f64::total_cmp);
                check_fusion(&out.fusion, &subs, &sorted_lam, corpus)
                    .map_err(|e| format!("weights {w:?}, d {d}, spectrum {lam:?}: {e}"))?;
                nontight += 1;
            }
        }
    }
    Ok(format!(
        "{} instances ({general} general, {tight} tight, {nontight} non-tight), 0 failures",
        general + tight + nontight
    ))
}

fn equivalence(corpus: &[FusionFrame]) -> Outcome {
    let mut worst: f64 = 0.0;
    for (i, fusion) in corpus.iter().enumerate() {
        let gap = equivalence_gap(fusion)?;
        ensure(gap <= 1e-9, || format!("fusion frame {i}: operators differ by {gap:e}"))?;
        worst = worst.max(gap);
    }
    ensure(corpus.len() >= 500, || format!("corpus only has {} fusion frames", corpus.len()))?;
    Ok(format!("{} fusion frames, max deviation {worst:e}", corpus.len()))
}

fn negative_certificates() -> Outcome {
    let err = exists_ready_permutation(&norms(&[1.0, 1.0, 6.0]), &spec(&[4.0, 4.0]), &SearchConfig::default(), &tol())
        .expect_err("no ordering of (1,1,6) should be ready");
    let Error::ProvenNotReady { orderings } = err else {
        return Err(format!("expected a proof of impossibility, got {err}"));
    };
    let problem = FusionProblem::new(
        vec![
            SubspaceSpec {
                weight: 2f64.sqrt(),
                dim: 2,
            },
            SubspaceSpec { weight: 1.0, dim: 1 },
        ],
        spec(&[2.0, 3.0]),
        None,
    )
    .unwrap();
    let err = construct_weighted_fusion_with(&problem, OrderingStrategy::Spread, &tol())
        .expect_err("conditions should not hold");
    let Error::ConditionsViolated(checks) = err else {
        return Err(format!("expected a condition refusal, got {err}"));
    };
    let pair = checks
        .iter()
        .find(|c| c.name == "largest_weights")
        .ok_or("largest_weights check missing")?;
    let margin = pair.margin.ok_or("largest_weights margin missing")?;
    ensure(!pair.satisfied && (margin + 1.0).abs() <= 1e-12, || format!("margin {margin}"))?;
    let a = stc_construct(&norms(&[2.0, 2.0, 1.0]), &spec(&[2.0, 3.0]), &tol()).map_err(|e| e.to_string())?;
    let labels = LabeledNormSequence::from_pairs(&[2.0, 2.0, 1.0], &[0, 0, 1]).unwrap();
    assemble_fusion(&a, &labels, &[2f64.sqrt(), 1.0], &tol()).map_err(|e| format!("assembly failed: {e}"))?;
    Ok(format!(
        "(1,1,6)/(4,4) proven not ready over {orderings} orderings; largest_weights margin {margin}; direct assembly succeeds"
    ))
}

fn closed_form_2(a: f64, b: f64, d: f64) -> Vec<f64> {
    let mean = (a + d) / 2.0;
    let r = (((a - d) / 2.0).powi(2) + b * b).sqrt();
    vec![mean - r, mean + r]
}

/// Trigonometric solution of the characteristic cubic.
fn closed_form_3(m: &[[f64; 3]; 3]) -> Vec<f64> {
    let p1 = m[0][1].powi(2) + m[0][2].powi(2) + m[1][2].powi(2);
    let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    if p1 == 0.0 {
        let mut v = vec![m[0][0], m[1][1], m[2][2]];
        v.sort_by(f64::total_cmp);
        return v;
    }
    let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = (m[i][j] - if i == j { q } else { 0.0 }) / p;
        }
    }
    let det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (det / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let hi = q + 2.0 * p * phi.cos();
    let lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let mid = 3.0 * q - hi - lo;
    let mut v = vec![lo, mid, hi];
    v.sort_by(f64::total_cmp);
    v
}

fn eigen_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let (matrix, expected) = if i % 2 == 0 {
            let (a, b, d) = (rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
            (vec![vec![a, b], vec![b, d]], closed_form_2(a, b, d))
        } else {
            let mut m = [[0.0; 3]; 3];
            for r in 0..3 {
                for c in r..3 {
                    m[r][c] = rng.gen_range(-10.0..10.0);
                    m[c][r] = m[r][c];
                }
            }
            (m.iter().map(|r| r.to_vec()).collect(), closed_form_3(&m))
        };
        let got = symmetric_eigenvalues(&DenseMatrix::from_rows(&matrix).unwrap(), 1e-12).map_err(|e| e.to_string())?;
        let dev = got.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        ensure(dev <= 1e-9, || format!("{matrix:?}: got {got:?}, expected {expected:?}"))?;
        worst = worst.max(dev);
    }
    Ok(format!("1000 matrices, max deviation {worst:e}"))
}

fn report(index: usize, name: &str, outcome: Outcome) -> bool {
    match outcome {
        Ok(detail) => {
            println!("criterion {index} PASS  {name}: {detail}");
            true
        }
        Err(detail) => {
            println!("criterion {index} FAIL  {name}: {detail}");
            false
        }
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut corpus = Vec::new();
    let c1 = example_2_3();
    let c2 = example_3_1(&mut corpus);
    let c4 = readiness_agreement();
    let c5 = reorder_guarantee();
    let c6 = fusion_suite(&mut corpus);
    let c3 = equivalence(&corpus);
    let c7 = negative_certificates();
    let c8 = eigen_oracle();

    let results = [
        report(1, "two-row worked example", c1),
        report(2, "three frames for one fusion frame", c2),
        report(3, "projection sum equals frame operator", c3),
        report(4, "readiness agrees with construction", c4),
        report(5, "reordering under the pair bound", c5),
        report(6, "weighted fusion constructions", c6),
        report(7, "negative certificates", c7),
        report(8, "eigensolver against closed forms", c8),
    ];
    let elapsed = start.elapsed().as_secs_f64();
    let passed = results.iter().filter(|&&r| r).count();
    println!("{passed}/{} criteria passed in {elapsed:.2} s", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

