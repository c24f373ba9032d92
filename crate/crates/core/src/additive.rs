//! Exact grid-set combinatorics: sumsets by bitset shifts, additive energy,
//! tree regularization, porosity witness measures, and the desk-scale
//! entropy-increase experiment.
//!
//! Grid sets live on `[0,1] ∩ 2^-n ℤ`; sums land in `[0,2]`, so the union
//! accumulator uses the widened grid `[0,2] ∩ 2^-n ℤ`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dyadic::{DyadicCell, TreeMeasure};
use crate::error::{Error, Result};

/// Dense bit representation of a subset of `[0,1] ∩ 2^-n ℤ`
/// (indices `0..=2^n`), or of the widened sum grid when `wide`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSet {
    resolution: u32,
    universe: u64,
    blocks: Vec<u64>,
}

impl GridSet {
    pub fn empty(resolution: u32) -> GridSet {
        let universe = (1u64 << resolution) + 1;
        GridSet {
            resolution,
            universe,
            blocks: vec![0; (universe as usize).div_ceil(64)],
        }
    }

    /// Empty set on the widened grid `[0,2] ∩ 2^-n ℤ`.
    pub fn empty_wide(resolution: u32) -> GridSet {
        let universe = (1u64 << (resolution + 1)) + 1;
        GridSet {
            resolution,
            universe,
            blocks: vec![0; (universe as usize).div_ceil(64)],
        }
    }

    pub fn from_indices(resolution: u32, indices: &[u64]) -> GridSet {
        let mut s = GridSet::empty(resolution);
        for &i in indices {
            s.insert(i);
        }
        s
    }

    /// All `2^n + 1` grid points.
    pub fn full(resolution: u32) -> GridSet {
        let mut s = GridSet::empty(resolution);
        for i in 0..=(1u64 << resolution) {
            s.insert(i);
        }
        s
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn insert(&mut self, index: u64) {
        assert!(index < self.universe, "index outside the grid");
        self.blocks[(index / 64) as usize] |= 1 << (index % 64);
    }

    pub fn contains(&self, index: u64) -> bool {
        index < self.universe && self.blocks[(index / 64) as usize] & (1 << (index % 64)) != 0
    }

    pub fn len(&self) -> u64 {
        self.blocks.iter().map(|b| b.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    pub fn indices(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.len() as usize);
        for (bi, &b) in self.blocks.iter().enumerate() {
            let mut bits = b;
            while bits != 0 {
                let tz = bits.trailing_zeros() as u64;
                out.push(bi as u64 * 64 + tz);
                bits &= bits - 1;
            }
        }
        out
    }

    /// Value of the grid point: `index / 2^n`.
    pub fn value(&self, index: u64) -> f64 {
        index as f64 * (-(self.resolution as f64)).exp2()
    }

    /// OR `other` shifted by `shift` grid steps into `self` (which must be
    /// wide enough).
    fn or_shifted(&mut self, other: &GridSet, shift: u64) {
        let block_off = (shift / 64) as usize;
        let bit_off = (shift % 64) as u32;
        for (i, &b) in other.blocks.iter().enumerate() {
            if b == 0 {
                continue;
            }
            let lo = b << bit_off;
            self.blocks[i + block_off] |= lo;
            if bit_off > 0 {
                let hi = b >> (64 - bit_off);
                if hi != 0 {
                    debug_assert!(i + block_off + 1 < self.blocks.len());
                    self.blocks[i + block_off + 1] |= hi;
                }
            }
        }
    }
}

/// Per-point set assignment `a ↦ B_a`.
pub enum BAssignment<'a> {
    /// The same `B_a = B` for every `a`.
    Uniform(&'a GridSet),
    /// Explicit per-point sets; points of `A` missing here default to the
    /// empty set, which the hypothesis checks then reject.
    PerPoint(&'a BTreeMap<u64, GridSet>),
}

impl<'a> BAssignment<'a> {
    fn get(&self, a: u64) -> Option<&'a GridSet> {
        match self {
            BAssignment::Uniform(b) => Some(b),
            BAssignment::PerPoint(map) => map.get(&a),
        }
    }
}

/// Cardinalities of the translated union `∪_{a∈A}(a + B_a)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthReport {
    pub a_card: u64,
    pub b_card: u64,
    pub per_a_cards: Vec<u64>,
    pub union_card: u64,
    /// `log |∪| / log |B|`
    pub exponent: f64,
}

/// Exact union cardinality by bitset OR of shifted sets, on the widened
/// `[0,2]` grid.
pub fn translate_union(a: &GridSet, b: &GridSet, map: &BAssignment) -> Result<GrowthReport> {
    let n = a.resolution;
    let mut per_a_cards = Vec::new();
    let mut acc = GridSet::empty_wide(n);
    for ai in a.indices() {
        match map.get(ai) {
            Some(ba) => {
                if ba.resolution != n {
                    return Err(Error::Invalid(format!(
                        "resolution mismatch: A at {n}, B_a at {}",
                        ba.resolution
                    )));
                }
                per_a_cards.push(ba.len());
                acc.or_shifted(ba, ai);
            }
            None => per_a_cards.push(0),
        }
    }
    let union_card = acc.len();
    let b_card = b.len();
    let exponent = if b_card > 1 {
        (union_card as f64).ln() / (b_card as f64).ln()
    } else {
        f64::NAN
    };
    Ok(GrowthReport {
        a_card: a.len(),
        b_card,
        per_a_cards,
        union_card,
        exponent,
    })
}

/// Additive energy `|{(a₁,a₂,b₁,b₂) : a₁+b₁ = a₂+b₂}|`, via representation
/// counts: `Σ_s r(s)²` with `r` the convolution of the indicators.
pub fn additive_energy(a: &GridSet, b: &GridSet) -> Result<u64> {
    if a.resolution != b.resolution {
        return Err(Error::Invalid("resolution mismatch".into()));
    }
    let size = (1usize << (a.resolution + 1)) + 1;
    let mut r = vec![0u32; size];
    let bi = b.indices();
    for ai in a.indices() {
        for &x in &bi {
            r[(ai + x) as usize] += 1;
        }
    }
    Ok(r.iter().map(|&c| c as u64 * c as u64).sum())
}

/// Selected subtree and branching exponents from tree regularization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularizationResult {
    pub t: u32,
    pub l: u32,
    /// surviving cells at depth `l·T`
    pub selected: Vec<[i64; 2]>,
    /// per-level branching exponents; level `i` keeps all conditional ratios
    /// inside `[2^{-σ_i T - 1}, 2^{-σ_i T}]`
    pub sigmas: Vec<f64>,
    pub retained_mass: f64,
}

/// Regularize a tree measure between the levels `T, 2T, …, lT`: select cells
/// `X ⊆ D_{lT}` so the restricted measure branches uniformly (all ratios to
/// the level above inside one global factor-2 window per level) and retains
/// at least `(2Td+2)^{-l}` of the mass.
///
/// Both conclusions are verified on the output before it is returned; the
/// window search is a per-level max-weight sweep and can in principle fall
/// short of the mass bound on adversarial inputs, in which case this errors
/// rather than returning an unverified selection.
pub fn regularize(mu: &TreeMeasure, t: u32, l: u32) -> Result<RegularizationResult> {
    assert!(t >= 1 && l >= 1);
    let d = mu.dim() as u32;
    if l * t > mu.max_depth() {
        return Err(Error::InsufficientResolution {
            needed: l * t,
            have: mu.max_depth(),
        });
    }
    let total = mu.total();
    if total <= 0.0 {
        return Err(Error::EmptyComponent);
    }
    // alive leaves at depth lT with their masses
    let mut alive: BTreeMap<[i64; 2], f64> =
        mu.cells_at(l * t).map(|(c, m)| (c.coords, m)).collect();
    let mut sigmas = vec![0.0f64; l as usize + 1];

    for level in (1..=l).rev() {
        // kept mass per cell at depth level·T and (level-1)·T
        let shift_leaf = (l - level) * t;
        let mut w_level: BTreeMap<[i64; 2], f64> = BTreeMap::new();
        for (&c, &m) in &alive {
            *w_level
                .entry([c[0] >> shift_leaf, c[1] >> shift_leaf])
                .or_insert(0.0) += m;
        }
        // group by parent at depth (level-1)·T
        let mut by_parent: BTreeMap<[i64; 2], Vec<([i64; 2], f64)>> = BTreeMap::new();
        for (&c, &w) in &w_level {
            by_parent
                .entry([c[0] >> t, c[1] >> t])
                .or_default()
                .push((c, w));
        }
        // per-parent candidate kept-sets: factor-2 bands anchored at each
        // child; candidate valid for u in [max/T_S, 2·min/T_S]
        struct Cand {
            parent: [i64; 2],
            members: Vec<[i64; 2]>,
            mass: f64,
            u_lo: f64,
            u_hi: f64,
        }
        let mut cands: Vec<Cand> = Vec::new();
        for (parent, mut kids) in by_parent {
            kids.sort_by(|a, b| b.1.total_cmp(&a.1));
            for anchor in 0..kids.len() {
                let hi = kids[anchor].1;
                let members: Vec<([i64; 2], f64)> = kids[anchor..]
                    .iter()
                    .take_while(|&&(_, w)| w * 2.0 > hi)
                    .cloned()
                    .collect();
                let mass: f64 = members.iter().map(|m| m.1).sum();
                let min = members.last().expect("anchor is a member").1;
                cands.push(Cand {
                    parent,
                    members: members.iter().map(|m| m.0).collect(),
                    mass,
                    u_lo: hi / mass,
                    u_hi: 2.0 * min / mass,
                });
            }
        }
        // sweep u over candidate interval endpoints; pick the u maximizing
        // Σ over parents of the best in-range candidate mass
        let mut endpoints: Vec<f64> = cands.iter().flat_map(|c| [c.u_lo, c.u_hi]).collect();
        endpoints.sort_by(f64::total_cmp);
        endpoints.dedup();
        let mut best_u = f64::NAN;
        let mut best_mass = -1.0;
        for &u in &endpoints {
            let mut per_parent: BTreeMap<[i64; 2], f64> = BTreeMap::new();
            for c in &cands {
                if c.u_lo <= u && u <= c.u_hi {
                    let e = per_parent.entry(c.parent).or_insert(0.0);
                    if c.mass > *e {
                        *e = c.mass;
                    }
                }
            }
            let m: f64 = per_parent.values().sum();
            if m > best_mass {
                best_mass = m;
                best_u = u;
            }
        }
        if !best_u.is_finite() {
            return Err(Error::HypothesisFailed(
                "regularization found no admissible window".into(),
            ));
        }
        // keep, per parent, the best candidate admissible at best_u
        let mut keep: std::collections::BTreeSet<[i64; 2]> = std::collections::BTreeSet::new();
        let mut per_parent: BTreeMap<[i64; 2], (f64, usize)> = BTreeMap::new();
        for (idx, c) in cands.iter().enumerate() {
            if c.u_lo <= best_u && best_u <= c.u_hi {
                let e = per_parent.entry(c.parent).or_insert((-1.0, usize::MAX));
                if c.mass > e.0 {
                    *e = (c.mass, idx);
                }
            }
        }
        for (_, (_, idx)) in per_parent {
            keep.extend(cands[idx].members.iter().copied());
        }
        alive.retain(|&c, _| keep.contains(&[c[0] >> shift_leaf, c[1] >> shift_leaf]));
        sigmas[level as usize] = -(best_u.min(1.0)).log2() / t as f64;
    }

    let retained_mass: f64 = alive.values().sum::<f64>() / total;
    let result = RegularizationResult {
        t,
        l,
        selected: alive.keys().copied().collect(),
        sigmas: sigmas[1..].to_vec(),
        retained_mass,
    };
    verify_regularization(mu, &result, d)?;
    Ok(result)
}

/// Check both regularization clauses on a selection, exactly (up to a
/// `1e-12` relative float slack in the comparisons).
pub fn verify_regularization(
    mu: &TreeMeasure,
    result: &RegularizationResult,
    dim: u32,
) -> Result<()> {
    let (t, l) = (result.t, result.l);
    let bound = ((2 * t * dim + 2) as f64).powi(-(l as i32));
    if result.retained_mass < bound {
        return Err(Error::HypothesisFailed(format!(
            "regularized mass {} below (2Td+2)^-l = {}",
            result.retained_mass, bound
        )));
    }
    // restricted masses per level from the selected leaves
    let leaf_mass: BTreeMap<[i64; 2], f64> = result
        .selected
        .iter()
        .map(|&c| {
            let cell = DyadicCell::new(mu.dim(), l * t, c);
            (c, mu.mass(&cell))
        })
        .collect();
    for level in 1..=l {
        let shift = (l - level) * t;
        let mut w: BTreeMap<[i64; 2], f64> = BTreeMap::new();
        for (&c, &m) in &leaf_mass {
            *w.entry([c[0] >> shift, c[1] >> shift]).or_insert(0.0) += m;
        }
        let mut wp: BTreeMap<[i64; 2], f64> = BTreeMap::new();
        for (&c, &m) in &w {
            *wp.entry([c[0] >> t, c[1] >> t]).or_insert(0.0) += m;
        }
        let u = (-(result.sigmas[level as usize - 1] * t as f64)).exp2();
        for (&c, &m) in &w {
            let parent = wp[&[c[0] >> t, c[1] >> t]];
            let mid = u * parent;
            let slack = 1e-12 * parent.max(m);
            if !(m <= mid + slack && mid <= 2.0 * m + slack) {
                return Err(Error::HypothesisFailed(format!(
                    "regularization window broken at level {level}, cell {c:?}: \
                     m={m}, 2^-sT*parent={mid}"
                )));
            }
        }
    }
    Ok(())
}

/// A porosity witness: the renormalized path measure `ν` and the verified
/// mass bound it implies for the porous set.
#[derive(Debug, Clone)]
pub struct PorosityWitness {
    pub nu: TreeMeasure,
    /// realized disjoint good-block count, minimized over points of `D`
    pub blocks: u32,
    /// `ρ` with `ν(D_n(x)) ≥ μ(D_n(x))·τ^{-nρ}`
    pub rho: f64,
    /// the implied bound `τ^{nρ}` on `μ(D)`
    pub bound: f64,
    /// direct summation of `μ` over the cells of `D`, for cross-checking
    pub mu_d: f64,
}

/// Build the porosity witness measure for a set `D` on the depth-`n` grid.
///
/// Hypotheses, checked per point of `D` (errors name the first failure):
/// at least `n(1−γ/2)` decay scales (`μ(D_{k+l}(x)) ≤ τ·μ(D_k(x))`) and at
/// least `nγ` single-child scales (exactly one depth-`(k+l)` subcell of
/// `D_k(x)` meets `D`), over `k = 1..n−l`.
pub fn porosity_witness(
    mu: &TreeMeasure,
    d_set: &GridSet,
    n: u32,
    l: u32,
    tau: f64,
    gamma: f64,
) -> Result<PorosityWitness> {
    assert!(mu.dim() == 1, "porosity runs on line measures");
    assert!(l >= 1 && tau > 0.0 && tau < 1.0 && gamma > 0.0);
    if n > mu.max_depth() {
        return Err(Error::InsufficientResolution {
            needed: n,
            have: mu.max_depth(),
        });
    }
    if d_set.resolution() != n {
        return Err(Error::Invalid("D must live on the depth-n grid".into()));
    }
    let points = d_set.indices();
    if points.is_empty() {
        return Err(Error::Invalid("empty set D".into()));
    }
    if points.iter().any(|&p| p >= 1u64 << n) {
        return Err(Error::Invalid("grid point 1.0 is outside [0,1)".into()));
    }
    // D-meeting cells per depth
    let mut meets: Vec<std::collections::BTreeSet<i64>> = vec![Default::default(); n as usize + 1];
    for &p in &points {
        for k in 0..=n {
            meets[k as usize].insert((p as i64) >> (n - k));
        }
    }
    let cell = |k: u32, c: i64| DyadicCell::new(1, k, [c, 0]);
    // hypothesis counts per point
    let mut min_blocks = u32::MAX;
    for &p in &points {
        let mut decay = 0u32;
        let mut single = 0u32;
        let mut good_scales: Vec<u32> = Vec::new();
        for k in 1..=n.saturating_sub(l) {
            let coarse = mu.mass(&cell(k, (p as i64) >> (n - k)));
            let fine = mu.mass(&cell(k + l, (p as i64) >> (n - k - l)));
            let is_decay = fine <= tau * coarse && coarse > 0.0;
            // children of D_k(x) at depth k+l meeting D
            let lo = ((p as i64) >> (n - k)) << l;
            let members = meets[(k + l) as usize].range(lo..lo + (1 << l)).count();
            let is_single = members == 1;
            if is_decay {
                decay += 1;
            }
            if is_single {
                single += 1;
            }
            if is_decay && is_single {
                good_scales.push(k);
            }
        }
        if (decay as f64) < (1.0 - gamma / 2.0) * n as f64 {
            return Err(Error::HypothesisFailed(format!(
                "decay scales at grid point {p}: {decay} < n(1-γ/2) = {}",
                (1.0 - gamma / 2.0) * n as f64
            )));
        }
        if (single as f64) < gamma * n as f64 {
            return Err(Error::HypothesisFailed(format!(
                "single-child scales at grid point {p}: {single} < nγ = {}",
                gamma * n as f64
            )));
        }
        // greedy disjoint good blocks of length l
        let mut blocks = 0u32;
        let mut next_free = 0u32;
        for &k in &good_scales {
            if k >= next_free {
                blocks += 1;
                next_free = k + l;
            }
        }
        min_blocks = min_blocks.min(blocks);
    }

    // construct ν level by level along D-meeting cells
    let mut nu_level: BTreeMap<i64, f64> = BTreeMap::new();
    nu_level.insert(0, 1.0);
    let mut nu_levels: Vec<BTreeMap<i64, f64>> = vec![nu_level.clone()];
    for k in 0..n {
        let mut next: BTreeMap<i64, f64> = BTreeMap::new();
        for (&c, &nv) in &nu_level {
            let parent_mass = mu.mass(&cell(k, c));
            let kids: Vec<i64> = meets[k as usize + 1]
                .range(c << 1..(c << 1) + 2)
                .copied()
                .collect();
            let a: f64 = kids.iter().map(|&q| mu.mass(&cell(k + 1, q))).sum::<f64>() / parent_mass;
            for q in kids {
                let frac = mu.mass(&cell(k + 1, q)) / parent_mass / a;
                next.insert(q, nv * frac);
            }
        }
        nu_level = next;
        nu_levels.push(nu_level.clone());
    }
    let leaves: BTreeMap<[i64; 2], f64> = nu_level.iter().map(|(&c, &v)| ([c, 0], v)).collect();
    let nu = TreeMeasure::from_leaf_masses(1, n, leaves)?;

    // verified pointwise bound and implied mass bound
    let factor = tau.powi(-(min_blocks as i32));
    for &p in &points {
        let nu_mass = nu.mass(&cell(n, p as i64));
        let mu_mass = mu.mass(&cell(n, p as i64));
        if nu_mass + 1e-12 < mu_mass * factor {
            return Err(Error::HypothesisFailed(format!(
                "pointwise bound failed at {p}: ν={nu_mass} < μ·τ^-blocks={}",
                mu_mass * factor
            )));
        }
    }
    let bound = tau.powi(min_blocks as i32);
    let mu_d: f64 = points.iter().map(|&p| mu.mass(&cell(n, p as i64))).sum();
    if mu_d > bound + 1e-12 {
        return Err(Error::HypothesisFailed(format!(
            "implied bound violated: μ(D) = {mu_d} > τ^(nρ) = {bound}"
        )));
    }
    Ok(PorosityWitness {
        nu,
        blocks: min_blocks,
        rho: min_blocks as f64 / n as f64,
        bound,
        mu_d,
    })
}

/// Hypothesis flags of the entropy-increase experiment; failures are data,
/// not errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthHypotheses {
    /// `η(A) ≥ 1/2`
    pub eta_mass: f64,
    pub eta_mass_ok: bool,
    /// every `a ∈ A` has at least `(1−γ/2)n` halving scales
    pub spreading_failures: u64,
    pub spreading_ok: bool,
    /// `|B| ≤ 2^{n(1−γ)}`
    pub b_small_ok: bool,
    /// `|B_a| ≥ |B|^{1−δ}` for all `a`
    pub ba_large_ok: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub n: u32,
    pub gamma: f64,
    pub l: u32,
    pub delta: f64,
    pub hypotheses: GrowthHypotheses,
    pub growth: GrowthReport,
    /// `|∪(a+B_a)| ≥ |B|^{1+δ}`
    pub verdict: bool,
}

/// Mass of `D_k(x)` under a grid measure, reading atom masses below the grid
/// depth (every grid point is a point mass at its cell's left endpoint).
fn eta_cell_mass(eta: &TreeMeasure, n: u32, point: u64, k: u32) -> f64 {
    if k <= n {
        eta.mass(&DyadicCell::new(1, k, [(point as i64) >> (n - k), 0]))
    } else {
        // deeper cells along the left-endpoint chain keep the atom
        eta.mass(&DyadicCell::new(1, n, [point as i64, 0]))
    }
}

/// Run the entropy-increase experiment: check every hypothesis, compute the
/// exact union, and record whether the union grew to `|B|^{1+δ}`.
pub fn entropy_increase_experiment(
    eta: &TreeMeasure,
    a: &GridSet,
    b: &GridSet,
    map: &BAssignment,
    gamma: f64,
    l: u32,
    delta: f64,
) -> Result<ExperimentReport> {
    assert_eq!(eta.dim(), 1);
    let n = a.resolution();
    if eta.max_depth() != n {
        return Err(Error::Invalid("η must live on the depth-n grid".into()));
    }
    let eta_total = eta.total();
    let mut eta_mass = 0.0;
    let mut spreading_failures = 0u64;
    for ai in a.indices() {
        eta_mass += eta_cell_mass(eta, n, ai, n);
        let mut halving = 0u32;
        for k in 1..=n {
            let coarse = eta_cell_mass(eta, n, ai, k);
            let fine = eta_cell_mass(eta, n, ai, k + l);
            if coarse >= 2.0 * fine && coarse > 0.0 {
                halving += 1;
            }
        }
        if (halving as f64) < (1.0 - gamma / 2.0) * n as f64 {
            spreading_failures += 1;
        }
    }
    eta_mass /= eta_total;
    let growth = translate_union(a, b, map)?;
    let b_card = growth.b_card as f64;
    let hypotheses = GrowthHypotheses {
        eta_mass,
        eta_mass_ok: eta_mass >= 0.5,
        spreading_failures,
        spreading_ok: spreading_failures == 0,
        b_small_ok: b_card <= (n as f64 * (1.0 - gamma)).exp2(),
        ba_large_ok: growth
            .per_a_cards
            .iter()
            .all(|&c| c as f64 >= b_card.powf(1.0 - delta)),
    };
    let verdict = growth.union_card as f64 >= b_card.powf(1.0 + delta);
    Ok(ExperimentReport {
        n,
        gamma,
        l,
        delta,
        hypotheses,
        growth,
        verdict,
    })
}

/// Result of the adversarial union-minimization search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdversarialResult {
    /// window width `|B_a|`
    pub window: u64,
    /// greedy window offset chosen for each `a ∈ A`, in ascending `a` order
    pub offsets: Vec<u64>,
    pub report: ExperimentReport,
}

/// Deterministic adversarial search: `B` is the initial arithmetic
/// progression of the admissible length, and each `B_a` is the contiguous
/// window of `B` whose shift adds the fewest new points to the running
/// union (ties to the smallest offset). `A` is the full grid short of the
/// right endpoint, `η` uniform on the grid, so every hypothesis holds; the
/// search records how little growth an adversary can reach.
pub fn adversarial_min_union(n: u32, gamma: f64, l: u32, delta: f64) -> Result<AdversarialResult> {
    let b_len = (n as f64 * (1.0 - gamma)).exp2().floor() as u64;
    let window = (b_len as f64).powf(1.0 - delta).ceil() as u64;
    if window > b_len {
        return Err(Error::Invalid("window exceeds |B|".into()));
    }
    let b = GridSet::from_indices(n, &(0..b_len).collect::<Vec<_>>());
    let a_indices: Vec<u64> = (0..(1u64 << n)).collect();
    let a = GridSet::from_indices(n, &a_indices);
    let mut acc = GridSet::empty_wide(n);
    let mut offsets = Vec::with_capacity(a_indices.len());
    let mut map: BTreeMap<u64, GridSet> = BTreeMap::new();
    for &ai in &a_indices {
        let mut best_o = 0u64;
        let mut best_new = u64::MAX;
        for o in 0..=(b_len - window) {
            let mut new_points = 0u64;
            for idx in o..o + window {
                if !acc.contains(ai + idx) {
                    new_points += 1;
                }
            }
            if new_points < best_new {
                best_new = new_points;
                best_o = o;
            }
        }
        let ba = GridSet::from_indices(n, &(best_o..best_o + window).collect::<Vec<_>>());
        acc.or_shifted(&ba, ai);
        offsets.push(best_o);
        map.insert(ai, ba);
    }
    let eta = grid_uniform(n);
    let report =
        entropy_increase_experiment(&eta, &a, &b, &BAssignment::PerPoint(&map), gamma, l, delta)?;
    Ok(AdversarialResult {
        window,
        offsets,
        report,
    })
}

/// Uniform probability on every point of the depth-`n` grid, as a tree
/// measure (the standard η for experiment presets).
pub fn grid_uniform(n: u32) -> TreeMeasure {
    let count = (1u64 << n) + 1;
    let mut leaves = std::collections::BTreeMap::new();
    for i in 0..count {
        leaves.insert([i as i64, 0], 1.0 / count as f64);
    }
    TreeMeasure::from_leaf_masses(1, n, leaves).expect("uniform grid masses are valid")
}
