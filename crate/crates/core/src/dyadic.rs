//! Dyadic cells, tree measures and entropy computations.
//!
//! A [`DyadicCell`] addresses the half-open box `∏_i [l_i/2^k, (l_i+1)/2^k)`.
//! A [`TreeMeasure`] stores nonnegative masses for every cell it touches at
//! depths `0..=max_depth`, with children summing to their parent. It is the
//! single measure representation of the crate; continuous measures enter only
//! through tree approximations.
//!
//! Mass conservation is kept to `1e-12` relative; entropy identities are
//! checked to `1e-10` absolute (double-precision accumulation over at most
//! `2^24` cells).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for mass conservation checks.
pub const MASS_TOL: f64 = 1e-12;

/// Absolute tolerance for entropy identities.
pub const ENTROPY_TOL: f64 = 1e-10;

/// Address of a half-open dyadic box: dimension, depth and integer coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DyadicCell {
    pub dim: u8,
    pub depth: u32,
    /// Coordinate vector; `coords[1]` is zero when `dim == 1`.
    pub coords: [i64; 2],
}

impl DyadicCell {
    pub fn new(dim: u8, depth: u32, coords: [i64; 2]) -> Self {
        assert!(dim == 1 || dim == 2, "dim must be 1 or 2");
        debug_assert!(dim == 2 || coords[1] == 0);
        DyadicCell { dim, depth, coords }
    }

    /// The unique parent one level up. Identity at depth 0.
    pub fn parent(&self) -> DyadicCell {
        if self.depth == 0 {
            return *self;
        }
        DyadicCell {
            dim: self.dim,
            depth: self.depth - 1,
            coords: [self.coords[0] >> 1, self.coords[1] >> 1],
        }
    }

    /// Ancestor at the given coarser depth.
    pub fn ancestor(&self, depth: u32) -> DyadicCell {
        assert!(depth <= self.depth);
        let shift = self.depth - depth;
        DyadicCell {
            dim: self.dim,
            depth,
            coords: [self.coords[0] >> shift, self.coords[1] >> shift],
        }
    }

    /// The `2^dim` children at the next depth.
    pub fn children(&self) -> Vec<DyadicCell> {
        let d = self.depth + 1;
        let (x, y) = (self.coords[0] << 1, self.coords[1] << 1);
        match self.dim {
            1 => vec![
                DyadicCell::new(1, d, [x, 0]),
                DyadicCell::new(1, d, [x + 1, 0]),
            ],
            _ => vec![
                DyadicCell::new(2, d, [x, y]),
                DyadicCell::new(2, d, [x + 1, y]),
                DyadicCell::new(2, d, [x, y + 1]),
                DyadicCell::new(2, d, [x + 1, y + 1]),
            ],
        }
    }

    /// Left endpoint (lower-left corner) of the box.
    pub fn lower(&self) -> [f64; 2] {
        let w = self.side();
        [self.coords[0] as f64 * w, self.coords[1] as f64 * w]
    }

    /// Side length `2^-depth`.
    pub fn side(&self) -> f64 {
        (-(self.depth as f64)).exp2()
    }

    /// Whether the half-open box contains `x` (only the first `dim` axes count).
    pub fn contains(&self, x: &[f64]) -> bool {
        let w = self.side();
        (0..self.dim as usize).all(|i| {
            let lo = self.coords[i] as f64 * w;
            x[i] >= lo && x[i] < lo + w
        })
    }
}

/// The unique depth-`k` dyadic cell containing `x`. Total on ℝ^dim; the
/// half-open convention sends boundary points rightward.
pub fn cell_of_point(x: &[f64], k: u32) -> DyadicCell {
    let dim = x.len() as u8;
    assert!(dim == 1 || dim == 2);
    let scale = (k as f64).exp2();
    let mut coords = [0i64; 2];
    for i in 0..x.len() {
        coords[i] = (x[i] * scale).floor() as i64;
    }
    DyadicCell::new(dim, k, coords)
}

fn exp2i(k: u32) -> f64 {
    (k as f64).exp2()
}

/// Entropy of one partition level, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub depth: u32,
    pub entropy_bits: f64,
    /// `entropy_bits / depth`; zero at depth 0.
    pub normalized: f64,
}

/// A finite-depth mass assignment on dyadic cells.
///
/// Invariants, checked by [`TreeMeasure::validate`]:
/// - masses are nonnegative and finite;
/// - the depth-0 masses sum to the total mass;
/// - for every cell of depth `< max_depth`, children masses sum to the cell's
///   mass within `1e-12` relative.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeMeasure {
    dim: u8,
    max_depth: u32,
    /// `levels[k]` maps depth-`k` coordinates to mass. Zero-mass cells are not stored.
    levels: Vec<BTreeMap<[i64; 2], f64>>,
}

impl TreeMeasure {
    /// Build from leaf masses at `depth`; coarser levels are obtained by
    /// summing children, so child-sum consistency holds by construction.
    pub fn from_leaf_masses(
        dim: u8,
        depth: u32,
        leaves: BTreeMap<[i64; 2], f64>,
    ) -> Result<TreeMeasure> {
        assert!(dim == 1 || dim == 2);
        for (&c, &m) in &leaves {
            if !(m >= 0.0) || !m.is_finite() {
                return Err(Error::Invalid(format!(
                    "negative or non-finite mass at {c:?}"
                )));
            }
            if dim == 1 && c[1] != 0 {
                return Err(Error::Invalid(
                    "1-D cell with nonzero second coordinate".into(),
                ));
            }
        }
        let mut levels = vec![BTreeMap::new(); depth as usize + 1];
        levels[depth as usize] = leaves;
        levels[depth as usize].retain(|_, m| *m > 0.0);
        for k in (0..depth).rev() {
            let mut up: BTreeMap<[i64; 2], f64> = BTreeMap::new();
            for (&c, &m) in &levels[k as usize + 1] {
                *up.entry([c[0] >> 1, c[1] >> 1]).or_insert(0.0) += m;
            }
            levels[k as usize] = up;
        }
        Ok(TreeMeasure {
            dim,
            max_depth: depth,
            levels,
        })
    }

    /// Lebesgue measure on `[0,1)^dim`, resolved to `depth`.
    pub fn uniform(dim: u8, depth: u32) -> TreeMeasure {
        let side = 1i64 << depth;
        let leaf_mass = 1.0 / exp2i(depth * dim as u32);
        let mut leaves = BTreeMap::new();
        match dim {
            1 => {
                for x in 0..side {
                    leaves.insert([x, 0], leaf_mass);
                }
            }
            _ => {
                for x in 0..side {
                    for y in 0..side {
                        leaves.insert([x, y], leaf_mass);
                    }
                }
            }
        }
        TreeMeasure::from_leaf_masses(dim, depth, leaves).expect("uniform masses are valid")
    }

    /// Point mass at `x`, resolved to `depth`.
    pub fn dirac(x: &[f64], depth: u32) -> TreeMeasure {
        let cell = cell_of_point(x, depth);
        let mut leaves = BTreeMap::new();
        leaves.insert(cell.coords, 1.0);
        TreeMeasure::from_leaf_masses(x.len() as u8, depth, leaves).expect("a point mass is valid")
    }

    /// Base-2 Bernoulli(p) product measure on `[0,1)`: the digit `1` carries
    /// probability `p` independently at every binary place.
    pub fn bernoulli(p: f64, depth: u32) -> TreeMeasure {
        assert!((0.0..=1.0).contains(&p));
        let mut leaves = BTreeMap::new();
        for x in 0i64..(1 << depth) {
            let ones = (x as u64).count_ones();
            let mass = p.powi(ones as i32) * (1.0 - p).powi((depth - ones) as i32);
            if mass > 0.0 {
                leaves.insert([x, 0], mass);
            }
        }
        TreeMeasure::from_leaf_masses(1, depth, leaves).expect("bernoulli masses are valid")
    }

    /// Uniform measure on the base-4 digit-{0,3} Cantor set, resolved to `depth`.
    /// In binary: digit pairs are restricted to 00 and 11; an odd final digit
    /// splits a pair evenly.
    pub fn base4_digits03(depth: u32) -> TreeMeasure {
        let pairs = depth / 2;
        let odd = depth % 2 == 1;
        let mut leaves = BTreeMap::new();
        let n = 1u64 << pairs;
        for idx in 0..n {
            // idx bits choose pair 00 (bit 0) or 11 (bit 1), most significant first
            let mut x: i64 = 0;
            for b in (0..pairs).rev() {
                let pair = if (idx >> b) & 1 == 1 { 0b11 } else { 0b00 };
                x = (x << 2) | pair;
            }
            let mass = 1.0 / n as f64;
            if odd {
                // refine one more binary digit: mass splits across both halves
                // of the next pair only via its first digit (0 or 1 with the
                // pair constraint still undetermined: both digits stay possible)
                leaves.insert([x << 1, 0], mass / 2.0);
                leaves.insert([(x << 1) | 1, 0], mass / 2.0);
            } else {
                leaves.insert([x, 0], mass);
            }
        }
        TreeMeasure::from_leaf_masses(1, depth, leaves).expect("digit masses are valid")
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    /// Total mass (sum over depth-0 cells).
    pub fn total(&self) -> f64 {
        self.levels[0].values().sum()
    }

    /// Mass of a cell; zero if untouched.
    pub fn mass(&self, cell: &DyadicCell) -> f64 {
        assert_eq!(cell.dim, self.dim);
        assert!(cell.depth <= self.max_depth);
        *self.levels[cell.depth as usize]
            .get(&cell.coords)
            .unwrap_or(&0.0)
    }

    /// Positive-mass cells at `depth`, in coordinate order.
    pub fn cells_at(&self, depth: u32) -> impl Iterator<Item = (DyadicCell, f64)> + '_ {
        let dim = self.dim;
        self.levels[depth as usize]
            .iter()
            .map(move |(&c, &m)| (DyadicCell::new(dim, depth, c), m))
    }

    pub fn support_size(&self, depth: u32) -> usize {
        self.levels[depth as usize].len()
    }

    /// Verify the representation invariants.
    pub fn validate(&self) -> Result<()> {
        let total = self.total();
        for k in 0..self.max_depth as usize {
            let mut sums: BTreeMap<[i64; 2], f64> = BTreeMap::new();
            for (&c, &m) in &self.levels[k + 1] {
                *sums.entry([c[0] >> 1, c[1] >> 1]).or_insert(0.0) += m;
            }
            for (&c, &m) in &self.levels[k] {
                let s = sums.get(&c).copied().unwrap_or(0.0);
                if (s - m).abs() > MASS_TOL * m.max(total).max(1.0) {
                    return Err(Error::Invalid(format!(
                        "child-sum mismatch at depth {k}, cell {c:?}: parent {m}, children {s}"
                    )));
                }
            }
            for &c in sums.keys() {
                if !self.levels[k].contains_key(&c) {
                    return Err(Error::Invalid(format!(
                        "orphan children under missing parent {c:?} at depth {k}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Whether the total mass is 1 within `1e-12`.
    pub fn is_probability(&self) -> bool {
        (self.total() - 1.0).abs() <= MASS_TOL
    }

    /// Rescale masses so the total is exactly 1.
    pub fn normalized(&self) -> Result<TreeMeasure> {
        let total = self.total();
        if total <= 0.0 {
            return Err(Error::EmptyComponent);
        }
        let mut out = self.clone();
        for level in &mut out.levels {
            for m in level.values_mut() {
                *m /= total;
            }
        }
        Ok(out)
    }

    /// The component measure `μ^D`: restrict to `D`, normalize, and push
    /// through the homothety sending `D` to the unit cube.
    ///
    /// Returns a probability tree of depth `max_depth - D.depth`; when `D`
    /// is a leaf the result is the degenerate depth-0 measure.
    pub fn component(&self, cell: &DyadicCell) -> Result<TreeMeasure> {
        assert_eq!(cell.dim, self.dim);
        if cell.depth > self.max_depth {
            return Err(Error::InsufficientResolution {
                needed: cell.depth,
                have: self.max_depth,
            });
        }
        let cell_mass = self.mass(cell);
        if cell_mass <= 0.0 {
            return Err(Error::EmptyComponent);
        }
        let new_depth = self.max_depth - cell.depth;
        let mut leaves = BTreeMap::new();
        if new_depth == 0 {
            leaves.insert([0, 0], 1.0);
            return TreeMeasure::from_leaf_masses(self.dim, 0, leaves);
        }
        let shift = new_depth;
        let base = [cell.coords[0] << shift, cell.coords[1] << shift];
        for (&c, &m) in &self.levels[self.max_depth as usize] {
            if c[0] >> shift == cell.coords[0] && c[1] >> shift == cell.coords[1] {
                leaves.insert([c[0] - base[0], c[1] - base[1]], m / cell_mass);
            }
        }
        TreeMeasure::from_leaf_masses(self.dim, new_depth, leaves)
    }

    /// Shannon entropy of the depth-`k` cell partition, in bits.
    pub fn shannon_entropy(&self, k: u32) -> Result<EntropyReport> {
        if k > self.max_depth {
            return Err(Error::InsufficientResolution {
                needed: k,
                have: self.max_depth,
            });
        }
        let total = self.total();
        if total <= 0.0 {
            return Err(Error::EmptyComponent);
        }
        let mut h = 0.0;
        for &m in self.levels[k as usize].values() {
            let p = m / total;
            if p > 0.0 {
                h -= p * p.log2();
            }
        }
        Ok(EntropyReport {
            depth: k,
            entropy_bits: h,
            normalized: if k == 0 { 0.0 } else { h / k as f64 },
        })
    }

    /// Conditional-entropy split between two depths: returns
    /// `(H(μ, D_k1), H(μ, D_k2 | D_k1))`, whose sum is `H(μ, D_k2)` exactly.
    pub fn refine_entropy_decomposition(&self, k1: u32, k2: u32) -> Result<(f64, f64)> {
        assert!(k1 < k2, "need k1 < k2");
        if k2 > self.max_depth {
            return Err(Error::InsufficientResolution {
                needed: k2,
                have: self.max_depth,
            });
        }
        let total = self.total();
        if total <= 0.0 {
            return Err(Error::EmptyComponent);
        }
        let coarse = self.shannon_entropy(k1)?.entropy_bits;
        let shift = k2 - k1;
        let mut conditional = 0.0;
        for (&c, &m2) in &self.levels[k2 as usize] {
            if m2 <= 0.0 {
                continue;
            }
            let parent = [c[0] >> shift, c[1] >> shift];
            let m1 = self.levels[k1 as usize][&parent];
            conditional += (m2 / total) * (m1 / m2).log2();
        }
        Ok((coarse, conditional))
    }

    /// Multiscale entropy average:
    /// `Σ_{k<n} Σ_{Q∈D_k} μ(Q)·H(μ^Q, D_T)/T`.
    ///
    /// Deviates from `H(μ, D_n)` by at most `O(T)` bits, the constant
    /// depending on dimension and support width.
    pub fn multiscale_entropy(&self, n: u32, t: u32) -> Result<f64> {
        assert!(t >= 1);
        if n + t > self.max_depth {
            return Err(Error::InsufficientResolution {
                needed: n + t,
                have: self.max_depth,
            });
        }
        let total = self.total();
        if total <= 0.0 {
            return Err(Error::EmptyComponent);
        }
        let mut acc = 0.0;
        for k in 0..n {
            // Σ_Q μ(Q) H(μ^Q, D_T) accumulated from the fine level k+T:
            // each fine cell Q' contributes μ(Q')·log2(μ(anc)/μ(Q')).
            let shift = t;
            for (&c, &m) in &self.levels[(k + t) as usize] {
                if m <= 0.0 {
                    continue;
                }
                let anc = [c[0] >> shift, c[1] >> shift];
                let ma = self.levels[k as usize][&anc];
                acc += (m / total) * (ma / m).log2();
            }
        }
        Ok(acc / t as f64)
    }

    /// Translate the measure by `s` and re-bin on the dyadic grid at
    /// `max_depth`, splitting each leaf's mass between the two cells its
    /// translated box overlaps, proportionally to overlap length per axis.
    pub fn translate(&self, s: &[f64]) -> TreeMeasure {
        assert_eq!(s.len(), self.dim as usize);
        let scale = exp2i(self.max_depth);
        let mut off = [0i64; 2];
        let mut frac = [0.0f64; 2];
        for i in 0..s.len() {
            let y = s[i] * scale;
            off[i] = y.floor() as i64;
            frac[i] = y - y.floor();
        }
        let mut leaves: BTreeMap<[i64; 2], f64> = BTreeMap::new();
        for (&c, &m) in &self.levels[self.max_depth as usize] {
            // per-axis weights for the lower/upper target cell
            let splits_x = [(c[0] + off[0], 1.0 - frac[0]), (c[0] + off[0] + 1, frac[0])];
            let splits_y: &[(i64, f64)] = if self.dim == 2 {
                &[(c[1] + off[1], 1.0 - frac[1]), (c[1] + off[1] + 1, frac[1])]
            } else {
                &[(0, 1.0)]
            };
            for &(cx, wx) in &splits_x {
                if wx == 0.0 {
                    continue;
                }
                for &(cy, wy) in splits_y {
                    if wy == 0.0 {
                        continue;
                    }
                    *leaves.entry([cx, cy]).or_insert(0.0) += m * wx * wy;
                }
            }
        }
        TreeMeasure::from_leaf_masses(self.dim, self.max_depth, leaves)
            .expect("translated masses stay nonnegative")
    }

    /// Serialize to the flat record stream. Masses round-trip bit-exactly
    /// (shortest-representation float printing).
    pub fn to_records(&self) -> TreeMeasureRecords {
        let mut cells = Vec::new();
        for k in 0..=self.max_depth {
            for (&c, &m) in &self.levels[k as usize] {
                cells.push(CellRecord {
                    depth: k,
                    coords: c,
                    mass: m,
                });
            }
        }
        TreeMeasureRecords {
            dim: self.dim,
            max_depth: self.max_depth,
            cells,
        }
    }

    /// Rebuild from records; child-sum consistency is re-derived from the
    /// leaf level, and the stored coarse levels are checked against it.
    pub fn from_records(records: &TreeMeasureRecords) -> Result<TreeMeasure> {
        let mut leaves = BTreeMap::new();
        for r in &records.cells {
            if r.depth == records.max_depth {
                leaves.insert(r.coords, r.mass);
            }
        }
        let tree = TreeMeasure::from_leaf_masses(records.dim, records.max_depth, leaves)?;
        for r in &records.cells {
            if r.depth < records.max_depth {
                let have = tree.mass(&DyadicCell::new(records.dim, r.depth, r.coords));
                if (have - r.mass).abs() > MASS_TOL * have.abs().max(1.0) {
                    return Err(Error::Invalid(format!(
                        "stored coarse mass disagrees with leaf sums at depth {} cell {:?}",
                        r.depth, r.coords
                    )));
                }
            }
        }
        Ok(tree)
    }
}

/// Flat serialized form of a [`TreeMeasure`]: one record per touched cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeMeasureRecords {
    pub dim: u8,
    pub max_depth: u32,
    pub cells: Vec<CellRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub depth: u32,
    pub coords: [i64; 2],
    pub mass: f64,
}

/// Number of depth-`m` dyadic cells hit by a family of deeper cells.
///
/// This is the crate's stand-in for the covering number `N_δ` at `δ = 2^-m`;
/// it brackets the ball-covering number within a factor `2·dim`.
pub fn covering_number(cells: &[DyadicCell], m: u32) -> usize {
    let mut seen = std::collections::BTreeSet::new();
    for c in cells {
        assert!(
            m <= c.depth,
            "covering scale must be at least as coarse as the cells"
        );
        let a = c.ancestor(m);
        seen.insert((a.coords, a.dim));
    }
    seen.len()
}
