//! Seeded deterministic generators for experiments and tests.
//!
//! Everything here is a pure function of its seed, so experiment outputs that
//! embed the seed are reproducible byte for byte.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::additive::GridSet;
use crate::dyadic::TreeMeasure;

/// Random probability tree: every node splits its mass by random proportions,
/// with a 20% chance of a degenerate split sending all mass to one child.
pub fn random_tree(dim: u8, depth: u32, seed: u64) -> TreeMeasure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level: BTreeMap<[i64; 2], f64> = BTreeMap::new();
    level.insert([0, 0], 1.0);
    for _ in 0..depth {
        let mut next = BTreeMap::new();
        for (&c, &m) in &level {
            let children: Vec<[i64; 2]> = if dim == 1 {
                vec![[c[0] << 1, 0], [(c[0] << 1) + 1, 0]]
            } else {
                let (x, y) = (c[0] << 1, c[1] << 1);
                vec![[x, y], [x + 1, y], [x, y + 1], [x + 1, y + 1]]
            };
            let mut weights: Vec<f64> = (0..children.len()).map(|_| rng.gen::<f64>()).collect();
            if rng.gen::<f64>() < 0.2 {
                let j = rng.gen_range(0..children.len());
                weights.iter_mut().for_each(|w| *w = 0.0);
                weights[j] = 1.0;
            }
            let sum: f64 = weights.iter().sum();
            for (ch, w) in children.into_iter().zip(weights) {
                if w > 0.0 {
                    *next.entry(ch).or_insert(0.0) += m * w / sum;
                }
            }
        }
        level = next;
    }
    TreeMeasure::from_leaf_masses(dim, depth, level).expect("random splits are valid")
}

/// Random grid set at the given resolution with an expected `density`
/// fraction of the `2^n + 1` grid points present. Never empty.
pub fn random_grid_set(resolution: u32, density: f64, seed: u64) -> GridSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = GridSet::empty(resolution);
    for i in 0..=(1u64 << resolution) {
        if rng.gen::<f64>() < density {
            set.insert(i);
        }
    }
    if set.is_empty() {
        set.insert(rng.gen_range(0..=(1u64 << resolution)));
    }
    set
}
