//! Magnification dynamics on (measure, point) pairs, scenery orbits and
//! their Cesàro entropy statistics, the uniform-entropy statistic, and the
//! dyadic-spreading checker.
//!
//! Magnification zooms a measure into the depth-1 cell of its point and
//! rescales both. Generic trees lose one level of resolution per step;
//! registered fixed-point measures (homogeneous product constructions whose
//! components reproduce the measure) replenish and can be iterated forever.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dyadic::{cell_of_point, DyadicCell, TreeMeasure};
use crate::error::{Error, Result};

/// How a scenery state regains resolution after magnification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Replenish {
    /// No replenishment: each step consumes one level of the tree.
    None,
    /// The measure is an exact magnification fixed point (every positive
    /// cell's component reproduces the measure), so the state replenishes by
    /// reusing the original tree. Verified at construction.
    FixedPoint,
}

/// A (measure, point) pair evolved by the magnification operator.
#[derive(Debug, Clone)]
pub struct SceneryState {
    pub measure: TreeMeasure,
    pub point: [f64; 2],
    pub replenish: Replenish,
    steps_taken: u32,
    original: Option<TreeMeasure>,
}

impl SceneryState {
    /// A non-replenishable state; the budget is the tree depth.
    pub fn new(measure: TreeMeasure, point: &[f64]) -> Result<SceneryState> {
        let mut p = [0.0; 2];
        p[..point.len()].copy_from_slice(point);
        let cell = cell_of_point(point, measure.max_depth().min(1));
        if measure.max_depth() >= 1 && measure.mass(&cell) <= 0.0 {
            return Err(Error::EmptyComponent);
        }
        Ok(SceneryState {
            measure,
            point: p,
            replenish: Replenish::None,
            steps_taken: 0,
            original: None,
        })
    }

    /// A replenishable state for an exact magnification fixed point.
    /// Errors if some positive depth-1 component fails to reproduce the
    /// measure within `1e-9`.
    pub fn new_fixed_point(measure: TreeMeasure, point: &[f64]) -> Result<SceneryState> {
        let depth = measure.max_depth();
        if depth < 1 {
            return Err(Error::Invalid(
                "fixed-point scenery needs depth >= 1".into(),
            ));
        }
        let top: Vec<DyadicCell> = measure.cells_at(1).map(|(c, _)| c).collect();
        for cell in top {
            let comp = measure.component(&cell)?;
            for k in 0..depth {
                for (c, m) in comp.cells_at(k) {
                    if (measure.mass(&c) - m).abs() > 1e-9 {
                        return Err(Error::Invalid(format!(
                            "not a magnification fixed point: cell {:?} differs",
                            c
                        )));
                    }
                }
            }
        }
        let mut state = SceneryState::new(measure, point)?;
        state.replenish = Replenish::FixedPoint;
        state.original = Some(state.measure.clone());
        Ok(state)
    }

    pub fn steps_taken(&self) -> u32 {
        self.steps_taken
    }

    /// Remaining magnification steps before resolution runs out (`None` for
    /// replenishable states).
    pub fn remaining_depth(&self) -> Option<u32> {
        match self.replenish {
            Replenish::None => Some(self.measure.max_depth()),
            Replenish::FixedPoint => None,
        }
    }
}

/// One magnification step:
/// `(μ, x) ↦ (μ^{D_1(x)}, S_{D_1(x)}(x))`.
pub fn magnify(state: &SceneryState) -> Result<SceneryState> {
    let dim = state.measure.dim() as usize;
    if state.measure.max_depth() < 1 {
        return Err(Error::DepthExhausted {
            step: state.steps_taken,
        });
    }
    let cell = cell_of_point(&state.point[..dim], 1);
    if state.measure.mass(&cell) <= 0.0 {
        return Err(Error::EmptyComponent);
    }
    let mut new_point = [0.0; 2];
    for i in 0..dim {
        new_point[i] = state.point[i] * 2.0 - cell.coords[i] as f64;
    }
    let measure = match state.replenish {
        Replenish::None => state.measure.component(&cell)?,
        Replenish::FixedPoint => state
            .original
            .as_ref()
            .expect("fixed-point states carry their original tree")
            .clone(),
    };
    Ok(SceneryState {
        measure,
        point: new_point,
        replenish: state.replenish,
        steps_taken: state.steps_taken + 1,
        original: state.original.clone(),
    })
}

/// Per-step component entropies along a scenery orbit and their running mean.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CesaroStats {
    pub steps: u32,
    pub l: u32,
    /// depth-1 cell coordinates magnified into at each step
    pub cells: Vec<[i64; 2]>,
    /// `(1/l)·H(μ^{D_k(x)}, D_l)` for k = 1..steps
    pub values: Vec<f64>,
    pub running_mean: Vec<f64>,
}

impl CesaroStats {
    pub fn mean(&self) -> f64 {
        *self.running_mean.last().unwrap_or(&0.0)
    }
}

/// Iterate magnification `steps` times, recording the normalized depth-`l`
/// entropy of each component along the way.
pub fn scenery_orbit(state: &SceneryState, steps: u32, l: u32) -> Result<CesaroStats> {
    let mut current = state.clone();
    let mut values = Vec::with_capacity(steps as usize);
    let mut running_mean = Vec::with_capacity(steps as usize);
    let mut cells = Vec::with_capacity(steps as usize);
    let mut sum = 0.0;
    for k in 0..steps {
        let dim = current.measure.dim() as usize;
        let cell = cell_of_point(&current.point[..dim], 1);
        current = magnify(&current).map_err(|e| match e {
            Error::DepthExhausted { .. } => Error::DepthExhausted { step: k },
            other => other,
        })?;
        if current.measure.max_depth() < l {
            return Err(Error::InsufficientResolution {
                needed: l,
                have: current.measure.max_depth(),
            });
        }
        let h = current.measure.shannon_entropy(l)?.entropy_bits / l as f64;
        sum += h;
        cells.push(cell.coords);
        values.push(h);
        running_mean.push(sum / (k + 1) as f64);
    }
    Ok(CesaroStats {
        steps,
        l,
        cells,
        values,
        running_mean,
    })
}

/// Sample a point from the tree measure by walking the tree with the seeded
/// generator (inverse-CDF over leaves). Returns the center of the sampled
/// leaf cell.
pub fn sample_point(mu: &TreeMeasure, seed: u64) -> [f64; 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = mu.dim();
    let mut cell = {
        let roots: Vec<(DyadicCell, f64)> = mu.cells_at(0).collect();
        let total: f64 = roots.iter().map(|r| r.1).sum();
        let mut pick = rng.gen::<f64>() * total;
        let mut chosen = roots[0].0;
        for (c, m) in roots {
            if pick < m {
                chosen = c;
                break;
            }
            pick -= m;
        }
        chosen
    };
    for _ in 0..mu.max_depth() {
        let kids: Vec<(DyadicCell, f64)> = cell
            .children()
            .into_iter()
            .map(|c| {
                let m = mu.mass(&c);
                (c, m)
            })
            .filter(|&(_, m)| m > 0.0)
            .collect();
        let total: f64 = kids.iter().map(|k| k.1).sum();
        let mut pick = rng.gen::<f64>() * total;
        cell = kids[0].0;
        for (c, m) in kids {
            if pick < m {
                cell = c;
                break;
            }
            pick -= m;
        }
    }
    let side = cell.side();
    let lower = cell.lower();
    let mut p = [0.0; 2];
    for i in 0..dim as usize {
        p[i] = lower[i] + side / 2.0;
    }
    p
}

/// Fraction of μ-mass whose scales `k = 1..n` keep the component entropy
/// `H(μ^{D_k(x)}, D_l)` within `l·eps` of `l·alpha` at a `(1−eps)` rate.
///
/// Exhaustive over positive depth-`n` cells when there are at most
/// `2^20`; otherwise Monte-Carlo over `4096` seeded samples.
pub fn uniform_entropy_statistic(
    mu: &TreeMeasure,
    n: u32,
    l: u32,
    eps: f64,
    alpha: f64,
) -> Result<f64> {
    uniform_entropy_statistic_seeded(mu, n, l, eps, alpha, 0)
}

pub fn uniform_entropy_statistic_seeded(
    mu: &TreeMeasure,
    n: u32,
    l: u32,
    eps: f64,
    alpha: f64,
    seed: u64,
) -> Result<f64> {
    if n + l > mu.max_depth() {
        return Err(Error::InsufficientResolution {
            needed: n + l,
            have: mu.max_depth(),
        });
    }
    // conditional l-step entropies for every cell at depths 1..=n, from one
    // pass per depth over the level k+l
    let mut cond: Vec<std::collections::BTreeMap<[i64; 2], f64>> =
        vec![std::collections::BTreeMap::new(); n as usize + 1];
    for k in 1..=n {
        let level = &mut cond[k as usize];
        // H(μ^Q, D_l) = log2 m(Q) - (1/m(Q)) Σ m' log2 m'
        let mut sums: std::collections::BTreeMap<[i64; 2], f64> = std::collections::BTreeMap::new();
        for (c, m) in mu.cells_at(k + l) {
            if m > 0.0 {
                let anc = [c.coords[0] >> l, c.coords[1] >> l];
                *sums.entry(anc).or_insert(0.0) += m * m.log2();
            }
        }
        for (c, m) in mu.cells_at(k) {
            if m > 0.0 {
                let s = sums.get(&c.coords).copied().unwrap_or(0.0);
                level.insert(c.coords, m.log2() - s / m);
            }
        }
    }
    let good_mass_exhaustive = |cells: Vec<(DyadicCell, f64)>| -> f64 {
        let mut good = 0.0;
        for (c, m) in cells {
            let mut good_scales = 0u32;
            for k in 1..=n {
                let anc = c.ancestor(k);
                let h = cond[k as usize][&anc.coords];
                if (h - l as f64 * alpha).abs() <= l as f64 * eps {
                    good_scales += 1;
                }
            }
            if good_scales as f64 >= (1.0 - eps) * n as f64 {
                good += m;
            }
        }
        good
    };
    let total = mu.total();
    if mu.support_size(n) <= 1 << 20 {
        let cells: Vec<(DyadicCell, f64)> = mu.cells_at(n).collect();
        Ok(good_mass_exhaustive(cells) / total)
    } else {
        let samples = 4096u32;
        let mut good = 0u32;
        for i in 0..samples {
            let p = sample_point(mu, seed.wrapping_add(i as u64));
            let c = cell_of_point(&p[..mu.dim() as usize], n);
            let mut good_scales = 0u32;
            for k in 1..=n {
                let anc = c.ancestor(k);
                let h = cond[k as usize][&anc.coords];
                if (h - l as f64 * alpha).abs() <= l as f64 * eps {
                    good_scales += 1;
                }
            }
            if good_scales as f64 >= (1.0 - eps) * n as f64 {
                good += 1;
            }
        }
        Ok(good as f64 / samples as f64)
    }
}

/// Verdict of the dyadic-spreading check for one candidate translation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpreadingCandidate {
    pub t: f64,
    /// mass of points whose bad-scale fraction is at least `eps`
    pub bad_mass: f64,
    pub spreading: bool,
    /// bad-scale fractions weighted by mass, for reporting
    pub mean_bad_fraction: f64,
}

/// Result of a spreading check: a measure is `(n,l,ε)`-dyadic spreading when
/// some translation keeps the mass of ε-bad points below ε. A bad scale at
/// `x` is one with `η(D_k(x)) ≤ 2·η(D_{k+l}(x))`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpreadingReport {
    pub n: u32,
    pub l: u32,
    pub eps: f64,
    pub candidates: Vec<SpreadingCandidate>,
    pub spreading: bool,
    /// first passing translation, when any
    pub witness: Option<f64>,
}

/// Default candidate translations: zero plus sixteen golden-rotation offsets,
/// which avoid dyadic alignment.
pub fn default_translations() -> Vec<f64> {
    let phi_inv = (5f64.sqrt() - 1.0) / 2.0;
    let mut out = vec![0.0];
    let mut x = 0.0f64;
    for _ in 0..16 {
        x = (x + phi_inv).fract();
        out.push(x);
    }
    out
}

/// Exhaustive spreading check over the support at depth `n + l`.
pub fn spreading_check(
    eta: &TreeMeasure,
    n: u32,
    l: u32,
    eps: f64,
    translations: &[f64],
) -> Result<SpreadingReport> {
    assert_eq!(eta.dim(), 1, "spreading is a line-measure statistic");
    if n + l > eta.max_depth() {
        return Err(Error::InsufficientResolution {
            needed: n + l,
            have: eta.max_depth(),
        });
    }
    let mut candidates = Vec::new();
    let mut witness = None;
    for &t in translations {
        let shifted = if t == 0.0 {
            eta.clone()
        } else {
            eta.translate(&[t])
        };
        let total = shifted.total();
        let mut bad_mass = 0.0;
        let mut mean_bad = 0.0;
        for (c, m) in shifted.cells_at(n + l) {
            if m <= 0.0 {
                continue;
            }
            let mut bad = 0u32;
            for k in 1..=n {
                let coarse = shifted.mass(&c.ancestor(k));
                let fine = shifted.mass(&c.ancestor(k + l));
                if coarse <= 2.0 * fine {
                    bad += 1;
                }
            }
            let frac = bad as f64 / n as f64;
            mean_bad += m / total * frac;
            if frac >= eps {
                bad_mass += m / total;
            }
        }
        let ok = bad_mass < eps;
        if ok && witness.is_none() {
            witness = Some(t);
        }
        candidates.push(SpreadingCandidate {
            t,
            bad_mass,
            spreading: ok,
            mean_bad_fraction: mean_bad,
        });
    }
    Ok(SpreadingReport {
        n,
        l,
        eps,
        spreading: witness.is_some(),
        candidates,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn magnify_bernoulli_is_fixed_point() {
        let mu = TreeMeasure::bernoulli(0.3, 10);
        let state = SceneryState::new_fixed_point(mu.clone(), &[0.3]).unwrap();
        let next = magnify(&state).unwrap();
        for k in 0..=10 {
            for (c, m) in mu.cells_at(k) {
                assert!((next.measure.mass(&c) - m).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn magnify_lebesgue_2d_point_doubling() {
        let mu = TreeMeasure::uniform(2, 6);
        let state = SceneryState::new_fixed_point(mu, &[0.3, 0.8]).unwrap();
        let next = magnify(&state).unwrap();
        assert!((next.point[0] - 0.6).abs() < 1e-15);
        assert!((next.point[1] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn magnify_small_tree_arithmetic() {
        // depth-2 masses (1/2, 1/4, 1/8, 1/8), x = 0.3 → component (2/3, 1/3), point 0.6
        let mut leaves = std::collections::BTreeMap::new();
        leaves.insert([0i64, 0], 0.5);
        leaves.insert([1, 0], 0.25);
        leaves.insert([2, 0], 0.125);
        leaves.insert([3, 0], 0.125);
        let mu = TreeMeasure::from_leaf_masses(1, 2, leaves).unwrap();
        let state = SceneryState::new(mu, &[0.3]).unwrap();
        let next = magnify(&state).unwrap();
        assert!((next.point[0] - 0.6).abs() < 1e-15);
        assert!((next.measure.mass(&DyadicCell::new(1, 1, [0, 0])) - 2.0 / 3.0).abs() < 1e-12);
        assert!((next.measure.mass(&DyadicCell::new(1, 1, [1, 0])) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn magnify_errors() {
        let mu = TreeMeasure::dirac(&[0.1], 3);
        // zero-mass cell
        assert!(SceneryState::new(mu.clone(), &[0.9]).is_err());
        // budget exhaustion on a non-replenishable state
        let mut state = SceneryState::new(mu, &[0.1]).unwrap();
        for _ in 0..3 {
            state = magnify(&state).unwrap();
        }
        assert!(matches!(magnify(&state), Err(Error::DepthExhausted { .. })));
    }

    #[test]
    fn orbit_point_tracks_binary_shift() {
        // Lebesgue orbit point reproduces the binary shift for 52 steps
        let mu = TreeMeasure::uniform(1, 8);
        let x: f64 = 0.432_109_876_543_21;
        let mut state = SceneryState::new_fixed_point(mu, &[x]).unwrap();
        let mut shifted = x;
        for _ in 0..52 {
            state = magnify(&state).unwrap();
            shifted = (shifted * 2.0).fract();
            // doubling is exact in binary; fract of the tracked point matches
            assert!((state.point[0] - shifted).abs() < 1e-9);
        }
    }

    #[test]
    fn orbit_bernoulli_half_is_constant_one() {
        let mu = TreeMeasure::bernoulli(0.5, 10);
        let state = SceneryState::new_fixed_point(mu, &[0.37]).unwrap();
        let stats = scenery_orbit(&state, 50, 6).unwrap();
        assert!(stats.values.iter().all(|&v| (v - 1.0).abs() < 1e-12));
        assert!((stats.mean() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orbit_bernoulli_quarter_mean() {
        let p = 0.25f64;
        let mu = TreeMeasure::bernoulli(p, 12);
        let state = SceneryState::new_fixed_point(mu, &[0.6]).unwrap();
        let stats = scenery_orbit(&state, 200, 8).unwrap();
        let h = -(p * p.log2() + (1.0 - p) * (1.0 - p).log2());
        assert!(
            (stats.mean() - h).abs() < 0.03,
            "mean {} vs H(p) {}",
            stats.mean(),
            h
        );
    }

    #[test]
    fn orbit_point_mass_is_zero() {
        let mu = TreeMeasure::dirac(&[0.2], 20);
        let state = SceneryState::new(mu, &[0.2]).unwrap();
        let stats = scenery_orbit(&state, 10, 4).unwrap();
        assert!(stats.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cesaro_mean_stable_under_l_refinement() {
        // homogeneous Bernoulli: mean is H(p) up to O(1/l) bias for each l
        let p = 0.3f64;
        let h = -(p * p.log2() + (1.0 - p) * (1.0 - p).log2());
        let mu = TreeMeasure::bernoulli(p, 14);
        let state = SceneryState::new_fixed_point(mu, &[0.55]).unwrap();
        for l in [4u32, 8, 12] {
            let stats = scenery_orbit(&state, 60, l).unwrap();
            assert!(
                (stats.mean() - h).abs() < 1.0 / l as f64 + 0.02,
                "l={l}: mean {} vs {}",
                stats.mean(),
                h
            );
        }
    }

    #[test]
    fn uniform_entropy_statistic_examples() {
        // Bernoulli(1/2): all component entropies are exactly l
        let mu = TreeMeasure::bernoulli(0.5, 14);
        let s = uniform_entropy_statistic(&mu, 8, 6, 0.05, 1.0).unwrap();
        assert_eq!(s, 1.0);
        // Lebesgue against α = 0.5 fails at every scale
        let mu = TreeMeasure::uniform(1, 14);
        let s = uniform_entropy_statistic(&mu, 8, 6, 0.1, 0.5).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn uniform_entropy_statistic_split_measure() {
        // half Lebesgue on [0,1/2), half an atom at 3/4: the statistic sees
        // exactly the Lebesgue half as good at α = 1
        let n = 12u32;
        let l = 6u32;
        let depth = n + l;
        let mut leaves = std::collections::BTreeMap::new();
        let count = 1i64 << (depth - 1);
        for i in 0..count {
            leaves.insert([i, 0], 0.5 / count as f64);
        }
        let atom = cell_of_point(&[0.75], depth);
        *leaves.entry(atom.coords).or_insert(0.0) += 0.5;
        let mu = TreeMeasure::from_leaf_masses(1, depth, leaves).unwrap();
        let s = uniform_entropy_statistic(&mu, n, l, 0.1, 1.0).unwrap();
        assert!((s - 0.5).abs() < 1e-12, "got {s}");
    }

    #[test]
    fn spreading_examples() {
        // Lebesgue with l = 2: ratio 4 at every scale, zero bad scales
        let mu = TreeMeasure::uniform(1, 12);
        let rep = spreading_check(&mu, 10, 2, 0.05, &[0.0]).unwrap();
        assert!(rep.spreading);
        assert_eq!(rep.candidates[0].bad_mass, 0.0);

        // Dirac: every scale is bad for every translation
        let mu = TreeMeasure::dirac(&[0.3], 12);
        let rep = spreading_check(&mu, 8, 2, 0.2, &default_translations()).unwrap();
        assert!(!rep.spreading);

        // base-4 digit-{0,3}: bad fraction exactly 1/2 at l = 3, t = 0
        let mu = TreeMeasure::base4_digits03(19);
        let rep = spreading_check(&mu, 16, 3, 0.05, &[0.0]).unwrap();
        assert!(!rep.candidates[0].spreading);
        assert!(
            (rep.candidates[0].mean_bad_fraction - 0.5).abs() < 1e-12,
            "bad fraction {}",
            rep.candidates[0].mean_bad_fraction
        );
        // and the per-point fraction is 1/2 everywhere: bad mass at eps
        // slightly below 1/2 is everything, slightly above is nothing
        let below = spreading_check(&mu, 16, 3, 0.49, &[0.0]).unwrap();
        assert!((below.candidates[0].bad_mass - 1.0).abs() < 1e-12);
        let above = spreading_check(&mu, 16, 3, 0.51, &[0.0]).unwrap();
        assert_eq!(above.candidates[0].bad_mass, 0.0);
    }

    #[test]
    fn spreading_monotone_in_eps() {
        // larger ε never turns spreading into not-spreading
        let fixtures: Vec<TreeMeasure> = vec![
            TreeMeasure::uniform(1, 10),
            TreeMeasure::bernoulli(0.3, 10),
            TreeMeasure::base4_digits03(10),
            crate::fixtures::random_tree(1, 10, 5),
        ];
        let ts = default_translations();
        for mu in fixtures {
            let mut prev = false;
            for eps in [0.05, 0.1, 0.2, 0.4, 0.6] {
                let rep = spreading_check(&mu, 7, 2, eps, &ts).unwrap();
                assert!(!prev || rep.spreading, "spreading lost at eps={eps}");
                prev = rep.spreading;
            }
        }
    }
}
