//! Search for a ready ordering of a norm sequence and a spectrum.
//!
//! Small instances are enumerated exhaustively over multiset-distinct
//! orderings, so a refusal is a proof. Larger ones are probed with the
//! reordering cursor from a fixed list of starting orders followed by seeded
//! random shuffles; a refusal there only means nothing was found.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Error;
use crate::stc::{readiness_partition, run_cursor};
use crate::types::{trace_gap, NormSequence, ReadyPartition, Spectrum, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Largest sequence length enumerated exhaustively.
    pub exhaustive_max_len: usize,
    /// Maximum number of orderings examined.
    pub budget: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            exhaustive_max_len: 8,
            budget: 100_000,
            seed: 0x5eed,
        }
    }
}

/// A ready ordering. `norm_order[i]` / `spectrum_order[i]` give the input
/// index placed at position `i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReadyCertificate {
    pub norm_order: Vec<usize>,
    pub spectrum_order: Vec<usize>,
    pub norms: NormSequence,
    pub spectrum: Spectrum,
    pub partition: ReadyPartition,
    /// Orderings examined before this one was found (inclusive).
    pub examined: usize,
}

/// Advances `order` (indices into `values`) to the next ordering whose value
/// sequence is lexicographically larger; equal values are indistinguishable.
fn next_distinct(order: &mut [usize], values: &[f64]) -> bool {
    let key = |i: usize| values[order[i]];
    let len = order.len();
    if len < 2 {
        return false;
    }
    let mut i = len - 1;
    while i > 0 && key(i - 1) >= key(i) {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = len - 1;
    while key(j) <= key(i - 1) {
        j -= 1;
    }
    order.swap(i - 1, j);
    order[i..].reverse();
    true
}

fn sorted_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    order
}

/// Number of multiset-distinct orderings, saturating at `cap + 1`.
fn distinct_orderings(values: &[f64], cap: usize) -> usize {
    let order = sorted_order(values);
    let mut count: u128 = 1;
    let mut run = 0u128;
    for (pos, w) in order.iter().enumerate() {
        run = if pos > 0 && values[order[pos - 1]] == values[*w] {
            run + 1
        } else {
            1
        };
        count = count * (pos as u128 + 1) / run;
        if count > cap as u128 * 64 {
            return cap + 1;
        }
    }
    count.min(cap as u128 + 1) as usize
}

struct Probe<'a> {
    norms: &'a NormSequence,
    spectrum: &'a Spectrum,
    tol: &'a Tolerances,
    examined: usize,
}

impl Probe<'_> {
    fn check(&mut self, norm_order: &[usize], spectrum_order: &[usize]) -> Option<ReadyCertificate> {
        self.examined += 1;
        let norms = self.norms.permuted(norm_order);
        let spectrum = self.spectrum.permuted(spectrum_order);
        let partition = readiness_partition(&norms, &spectrum, self.tol).ok()?;
        Some(ReadyCertificate {
            norm_order: norm_order.to_vec(),
            spectrum_order: spectrum_order.to_vec(),
            norms,
            spectrum,
            partition,
            examined: self.examined,
        })
    }

    /// Runs the reordering cursor from the given start and certifies the
    /// ordering it ends with.
    fn check_reordered(
        &mut self,
        norm_order: &[usize],
        spectrum_order: &[usize],
    ) -> Option<ReadyCertificate> {
        if let Some(cert) = self.check(norm_order, spectrum_order) {
            return Some(cert);
        }
        let start = self.norms.permuted(norm_order);
        let spectrum = self.spectrum.permuted(spectrum_order);
        let run = run_cursor(start.values(), spectrum.values(), true, self.tol).ok()?;
        let final_order: Vec<usize> = run.order.iter().map(|&i| norm_order[i]).collect();
        self.examined -= 1;
        self.check(&final_order, spectrum_order)
    }
}

/// Looks for orderings of `norms` and `spectrum` that are ready.
///
/// The given orders are tried first, then (for small inputs) all
/// multiset-distinct orderings with the spectrum in the outer loop, both in
/// lexicographic order of their values. The first success in that order is
/// returned, so results are deterministic.
pub fn exists_ready_permutation(
    norms: &NormSequence,
    spectrum: &Spectrum,
    config: &SearchConfig,
    tol: &Tolerances,
) -> Result<ReadyCertificate, Error> {
    if !tol.eq(norms.total(), spectrum.total()) {
        return Err(Error::TraceMismatch {
            gap: trace_gap(norms, spectrum),
        });
    }
    let mut probe = Probe {
        norms,
        spectrum,
        tol,
        examined: 0,
    };
    let identity_n: Vec<usize> = (0..norms.len()).collect();
    let identity_s: Vec<usize> = (0..spectrum.len()).collect();
    if let Some(cert) = probe.check(&identity_n, &identity_s) {
        return Ok(cert);
    }

    let n_count = distinct_orderings(norms.values(), config.budget);
    let s_count = distinct_orderings(spectrum.values(), config.budget);
    let total = n_count.saturating_mul(s_count);
    let exhaustive = norms.len() <= config.exhaustive_max_len
        && spectrum.len() <= config.exhaustive_max_len
        && total <= config.budget;

    if exhaustive {
        let mut s_order = sorted_order(spectrum.values());
        loop {
            let mut n_order = sorted_order(norms.values());
            loop {
                if let Some(cert) = probe.check(&n_order, &s_order) {
                    return Ok(cert);
                }
                if !next_distinct(&mut n_order, norms.values()) {
                    break;
                }
            }
            if !next_distinct(&mut s_order, spectrum.values()) {
                break;
            }
        }
        return Err(Error::ProvenNotReady { orderings: total });
    }

    let asc_n = sorted_order(norms.values());
    let desc_n: Vec<usize> = asc_n.iter().rev().copied().collect();
    let asc_s = sorted_order(spectrum.values());
    let desc_s: Vec<usize> = asc_s.iter().rev().copied().collect();
    for s_order in [&identity_s, &asc_s, &desc_s] {
        for n_order in [&identity_n, &asc_n, &desc_n] {
            if probe.examined >= config.budget {
                return Err(Error::SearchBudgetExhausted {
                    tried: probe.examined,
                });
            }
            if let Some(cert) = probe.check_reordered(n_order, s_order) {
                return Ok(cert);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut n_order = identity_n;
    let mut s_order = identity_s;
    while probe.examined < config.budget {
        n_order.shuffle(&mut rng);
        s_order.shuffle(&mut rng);
        if let Some(cert) = probe.check_reordered(&n_order, &s_order) {
            return Ok(cert);
        }
    }
    Err(Error::SearchBudgetExhausted {
        tried: probe.examined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(n: &[f64], s: &[f64]) -> Result<ReadyCertificate, Error> {
        exists_ready_permutation(
            &NormSequence::new(n.to_vec()).unwrap(),
            &Spectrum::new(s.to_vec()).unwrap(),
            &SearchConfig::default(),
            &Tolerances::default(),
        )
    }

    #[test]
    fn distinct_ordering_counts() {
        assert_eq!(distinct_orderings(&[1.0, 1.0, 6.0], 100), 3);
        assert_eq!(distinct_orderings(&[1.0, 2.0, 3.0, 4.0], 100), 24);
        assert_eq!(distinct_orderings(&[2.0; 5], 100), 1);
        assert_eq!(distinct_orderings(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 100), 101);
    }

    #[test]
    fn enumerates_each_distinct_ordering_once() {
        let values = [2.0, 1.0, 2.0, 3.0];
        let mut order = sorted_order(&values);
        let mut seen = vec![order.iter().map(|&i| values[i]).collect::<Vec<_>>()];
        while next_distinct(&mut order, &values) {
            seen.push(order.iter().map(|&i| values[i]).collect());
        }
        assert_eq!(seen.len(), 12);
        let mut dedup = seen.clone();
        dedup.sort_by(|a, b| a.partial_cmp(b).unwrap());
        dedup.dedup();
        assert_eq!(dedup.len(), 12);
        assert!(seen.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn proven_refusal() {
        match run(&[1.0, 1.0, 6.0], &[4.0, 4.0]) {
            Err(Error::ProvenNotReady { orderings }) => assert_eq!(orderings, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn given_order_certified_first() {
        let cert = run(&[1.0, 3.0, 2.0, 2.0], &[2.0, 6.0]).unwrap();
        assert_eq!(cert.norm_order, vec![0, 1, 2, 3]);
        assert_eq!(cert.spectrum_order, vec![0, 1]);
        assert_eq!(cert.partition.indices(), &[1, 4]);
        let cert = run(&[1.0; 4], &[2.0, 2.0]).unwrap();
        assert_eq!(cert.norm_order, vec![0, 1, 2, 3]);
    }

    #[test]
    fn finds_a_permutation() {
        // (3, 1, 2, 2) is not ready against (2, 6) but a reordering is
        let cert = run(&[3.0, 1.0, 2.0, 2.0], &[2.0, 6.0]).unwrap();
        assert!(cert.examined > 1);
        assert!(readiness_partition(&cert.norms, &cert.spectrum, &Tolerances::default()).is_ok());
    }

    #[test]
    fn large_instances_use_the_guided_search() {
        let n: Vec<f64> = (0..12).map(|i| 1.0 + (i % 3) as f64 * 0.25).collect();
        let total: f64 = n.iter().sum();
        let cert = run(&n, &[total / 3.0; 3]).unwrap();
        assert!(readiness_partition(&cert.norms, &cert.spectrum, &Tolerances::default()).is_ok());
        let tight = exists_ready_permutation(
            &NormSequence::new(vec![1.0; 10]).unwrap(),
            &Spectrum::new(vec![0.5; 20]).unwrap(),
            &SearchConfig {
                budget: 50,
                ..SearchConfig::default()
            },
            &Tolerances::default(),
        );
        assert!(matches!(tight, Err(Error::SearchBudgetExhausted { .. })));
    }

    #[test]
    fn trace_mismatch_is_reported() {
        assert!(matches!(
            run(&[1.0, 1.0, 1.0], &[2.0, 2.0]),
            Err(Error::TraceMismatch { .. })
        ));
    }
}
