//! Uniform and weight-proportional edge picking.
//!
//! Weighted picks use probability proportional to `max(ε, w)`; picks of
//! several edges without replacement are sequential draws, each renormalized
//! over the edges not yet taken.

use rand::Rng;

/// Clamps an integer edge weight to a strictly positive sampling mass.
pub fn clamp_weight(w: i64, epsilon: f64) -> f64 {
    (w as f64).max(epsilon)
}

/// Index into `weights` drawn proportionally to the weights, which must all
/// be positive and finite.
pub fn weighted_index<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> usize {
    debug_assert!(!weights.is_empty());
    let total: f64 = weights.iter().sum();
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return i;
        }
    }
    weights.len() - 1
}

/// A candidate pool consumed one edge at a time, as in the forward search
/// where every touched edge leaves the pool for good.
#[derive(Debug, Clone)]
pub enum Pool {
    Uniform(Vec<usize>),
    Weighted { items: Vec<usize>, weights: Vec<f64> },
}

impl Pool {
    pub fn len(&self) -> usize {
        match self {
            Pool::Uniform(items) | Pool::Weighted { items, .. } => items.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Removes and returns one edge, or `None` when empty.
    pub fn take<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<usize> {
        if self.is_empty() {
            return None;
        }
        match self {
            Pool::Uniform(items) => {
                let i = rng.random_range(0..items.len());
                Some(items.swap_remove(i))
            }
            Pool::Weighted { items, weights } => {
                let i = weighted_index(rng, weights);
                weights.swap_remove(i);
                Some(items.swap_remove(i))
            }
        }
    }
}

/// Picks `k` distinct positions of `pool` uniformly at random.
pub fn pick_uniform<R: Rng + ?Sized>(rng: &mut R, pool_len: usize, k: usize) -> Vec<usize> {
    rand::seq::index::sample(rng, pool_len, k.min(pool_len)).into_vec()
}

/// Picks `k` distinct positions by sequential weighted draws without
/// replacement.
pub fn pick_weighted<R: Rng + ?Sized>(rng: &mut R, weights: &[f64], k: usize) -> Vec<usize> {
    let mut positions: Vec<usize> = (0..weights.len()).collect();
    let mut remaining: Vec<f64> = weights.to_vec();
    let mut out = Vec::with_capacity(k.min(weights.len()));
    while out.len() < k && !positions.is_empty() {
        let i = weighted_index(rng, &remaining);
        remaining.swap_remove(i);
        out.push(positions.swap_remove(i));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn clamp() {
        assert_eq!(clamp_weight(5, 1e-4), 5.0);
        assert_eq!(clamp_weight(0, 1e-4), 1e-4);
        assert_eq!(clamp_weight(-7, 1e-4), 1e-4);
    }

    #[test]
    fn pool_drains_each_item_once() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for mut pool in [
            Pool::Uniform((0..20).collect()),
            Pool::Weighted {
                items: (0..20).collect(),
                weights: (1..=20).map(f64::from).collect(),
            },
        ] {
            let mut seen: Vec<usize> = std::iter::from_fn(|| pool.take(&mut rng)).collect();
            seen.sort_unstable();
            assert_eq!(seen, (0..20).collect::<Vec<_>>());
            assert!(pool.take(&mut rng).is_none());
        }
    }

    #[test]
    fn picks_are_distinct_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut p = pick_uniform(&mut rng, 10, 4);
        p.sort_unstable();
        p.dedup();
        assert_eq!(p.len(), 4);
        let mut w = pick_weighted(&mut rng, &[1.0, 2.0, 3.0], 5);
        w.sort_unstable();
        assert_eq!(w, vec![0, 1, 2]);
        assert_eq!(pick_weighted(&mut rng, &[4.0], 1), vec![0]);
    }
}
