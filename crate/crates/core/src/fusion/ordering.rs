use crate::types::SubspaceSpec;

/// Labels `0, 1, ..., K-1` repeated `dim` times.
pub fn periodic_ordering(subspaces: usize, dim: usize) -> Vec<usize> {
    (0..dim).flat_map(|_| 0..subspaces).collect()
}

/// Spreads the copies of each subspace as far apart as their weights allow.
///
/// Slots are filled one at a time. Each subspace with copies left is keyed
/// by the squared mass accumulated since its previous copy (including that
/// copy; infinite before its first copy), and the largest key wins. Ties go
/// to the subspace with more copies left, then the larger weight, then the
/// lower label.
pub fn spread_ordering(subspaces: &[SubspaceSpec]) -> Vec<usize> {
    let total: usize = subspaces.iter().map(|s| s.dim).sum();
    let mut remaining: Vec<usize> = subspaces.iter().map(|s| s.dim).collect();
    let mut since: Vec<f64> = vec![f64::INFINITY; subspaces.len()];
    let mut out = Vec::with_capacity(total);
    for _ in 0..total {
        let chosen = (0..subspaces.len())
            .filter(|&k| remaining[k] > 0)
            .max_by(|&i, &j| {
                since[i]
                    .total_cmp(&since[j])
                    .then(remaining[i].cmp(&remaining[j]))
                    .then(subspaces[i].weight.total_cmp(&subspaces[j].weight))
                    .then(j.cmp(&i))
            })
            .expect("slots remain");
        let mass = subspaces[chosen].weight * subspaces[chosen].weight;
        for s in since.iter_mut().filter(|s| s.is_finite()) {
            *s += mass;
        }
        since[chosen] = mass;
        remaining[chosen] -= 1;
        out.push(chosen);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn subs(v: &[(f64, usize)]) -> Vec<SubspaceSpec> {
        v.iter().map(|&(weight, dim)| SubspaceSpec { weight, dim }).collect()
    }

    #[test]
    fn periodic() {
        assert_eq!(periodic_ordering(3, 2), vec![0, 1, 2, 0, 1, 2]);
    }

    #[test]
    fn spread_equal_dims_is_a_reversed_period() {
        let order = spread_ordering(&subs(&[(1.0, 2), (1.5, 2), (2.0, 2)]));
        assert_eq!(order, vec![2, 1, 0, 2, 1, 0]);
    }

    #[test]
    fn spread_separates_heavy_repeats() {
        let order = spread_ordering(&subs(&[(1.0, 1), (1.0, 1), (1.0, 2)]));
        assert_eq!(order.len(), 4);
        assert_eq!(order, vec![2, 0, 1, 2]);
        let twos: Vec<usize> = order.iter().enumerate().filter(|(_, &l)| l == 2).map(|(i, _)| i).collect();
        assert_eq!(twos.len(), 2);
        assert!(twos[1] - twos[0] >= 2);
    }
}
