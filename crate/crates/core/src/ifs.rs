//! Weighted affine IFSs on the line: self-similar tree measures, stopping
//! words, the parametric Δ-calculus, transversality audits and exact overlap
//! search.
//!
//! Tree construction follows the atom-placement rule: the cylinder mass `p_I`
//! of each stopping word `I` is assigned to the dyadic cell containing
//! `f_I(x₀)`, where `x₀` is the fixed point of the first map. Guard digits
//! shrink cylinder diameters below the target cell width so misplacement can
//! only move mass to an adjacent cell, an `O(1)`-bits-per-level error
//! independent of depth.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dyadic::TreeMeasure;
use crate::error::{Error, Result};
use crate::exact::{Jet2, Poly, QuadExt};

/// Default cap on enumeration work (nodes visited) for tree builds and
/// stopping-word expansion.
pub const DEFAULT_WORD_BUDGET: u64 = 1 << 26;

/// One contracting affine map `x ↦ r·x + s` with `0 < |r| < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineContraction {
    pub r: f64,
    pub s: f64,
}

impl AffineContraction {
    pub fn new(r: f64, s: f64) -> Result<AffineContraction> {
        if !(r.abs() < 1.0) || r == 0.0 || !r.is_finite() || !s.is_finite() {
            return Err(Error::Invalid(format!(
                "affine contraction needs 0 < |r| < 1, got r={r}, s={s}"
            )));
        }
        Ok(AffineContraction { r, s })
    }

    pub fn apply(&self, x: f64) -> f64 {
        self.r * x + self.s
    }

    pub fn fixed_point(&self) -> f64 {
        self.s / (1.0 - self.r)
    }
}

/// An IFS with strictly positive probability weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedIfs {
    pub maps: Vec<AffineContraction>,
    pub weights: Vec<f64>,
}

impl WeightedIfs {
    pub fn new(maps: Vec<AffineContraction>, weights: Vec<f64>) -> Result<WeightedIfs> {
        if maps.is_empty() || maps.len() != weights.len() {
            return Err(Error::Invalid("need one weight per map".into()));
        }
        if weights.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::Invalid("weights must be strictly positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("weights sum to {total}, not 1")));
        }
        Ok(WeightedIfs { maps, weights })
    }

    pub fn uniform(maps: Vec<AffineContraction>) -> Result<WeightedIfs> {
        let n = maps.len();
        WeightedIfs::new(maps, vec![1.0 / n as f64; n])
    }

    pub fn alphabet_size(&self) -> usize {
        self.maps.len()
    }

    /// Similarity dimension `(Σ p log p) / (Σ p log |r|)`.
    pub fn similarity_dimension(&self) -> f64 {
        let num: f64 = self.weights.iter().map(|&p| p * p.log2()).sum();
        let den: f64 = self
            .weights
            .iter()
            .zip(&self.maps)
            .map(|(&p, m)| p * m.r.abs().log2())
            .sum();
        num / den
    }

    /// Hull `[lo, hi]` of the attractor, by iterating the interval map to its
    /// floating-point fixpoint (exact for dyadic systems).
    pub fn attractor_interval(&self) -> (f64, f64) {
        let fps: Vec<f64> = self.maps.iter().map(|m| m.fixed_point()).collect();
        let mut lo = fps.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0;
        let mut hi = fps.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 1.0;
        for _ in 0..4000 {
            let mut nlo = f64::INFINITY;
            let mut nhi = f64::NEG_INFINITY;
            for m in &self.maps {
                let (a, b) = (m.apply(lo), m.apply(hi));
                nlo = nlo.min(a.min(b));
                nhi = nhi.max(a.max(b));
            }
            if nlo == lo && nhi == hi {
                break;
            }
            lo = nlo;
            hi = nhi;
        }
        (lo, hi)
    }
}

/// A finite word over the alphabet, with its derived cylinder data.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Product of ratios along the word.
    pub fn ratio(&self, ifs: &WeightedIfs) -> f64 {
        self.0.iter().map(|&i| ifs.maps[i as usize].r).product()
    }

    /// Cylinder probability `p_I`.
    pub fn prob(&self, ifs: &WeightedIfs) -> f64 {
        self.0.iter().map(|&i| ifs.weights[i as usize]).product()
    }

    /// `f_I(x) = f_{i_1} ∘ … ∘ f_{i_k}(x)`.
    pub fn apply(&self, ifs: &WeightedIfs, x: f64) -> f64 {
        self.0
            .iter()
            .rev()
            .fold(x, |acc, &i| ifs.maps[i as usize].apply(acc))
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }
}

impl std::fmt::Display for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &i in &self.0 {
            if i < 10 {
                write!(f, "{i}")?;
            } else {
                write!(f, "[{i}]")?;
            }
        }
        Ok(())
    }
}

/// Stopping words `Λ_k = { I : |r_I| ≤ 2^-k < |r_{I⁻}| }`.
///
/// Their cylinders tile the symbol space: probabilities sum to one and no word
/// prefixes another.
pub fn stopping_words(ifs: &WeightedIfs, k: u32) -> Result<Vec<Word>> {
    stopping_words_with_budget(ifs, k, DEFAULT_WORD_BUDGET)
}

pub fn stopping_words_with_budget(ifs: &WeightedIfs, k: u32, budget: u64) -> Result<Vec<Word>> {
    assert!(k >= 1);
    let threshold = (-(k as f64)).exp2();
    let mut out = Vec::new();
    let mut visited: u64 = 0;
    let mut stack: Vec<(Vec<u8>, f64)> = vec![(Vec::new(), 1.0)];
    while let Some((word, r)) = stack.pop() {
        visited += 1;
        if visited > budget {
            return Err(Error::BudgetExceeded { visited, budget });
        }
        if !word.is_empty() && r.abs() <= threshold {
            out.push(Word(word));
            continue;
        }
        for (i, m) in ifs.maps.iter().enumerate().rev() {
            let mut w = word.clone();
            w.push(i as u8);
            stack.push((w, r * m.r));
        }
    }
    Ok(out)
}

/// Affine conjugation `φ(x) = (x - offset)/scale` recorded on built trees,
/// mapping the attractor hull onto `[0,1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conjugation {
    pub offset: f64,
    pub scale: f64,
}

impl Conjugation {
    pub fn apply(&self, x: f64) -> f64 {
        (x - self.offset) / self.scale
    }

    pub fn unapply(&self, y: f64) -> f64 {
        y * self.scale + self.offset
    }
}

/// A depth-`n` tree measure built from an IFS, with its recorded conjugation.
#[derive(Debug, Clone)]
pub struct BuiltTree {
    pub tree: TreeMeasure,
    pub conjugation: Conjugation,
    /// Enumeration nodes actually visited (pruned cylinders count once).
    pub nodes_visited: u64,
}

/// Build the depth-`n` atom-placement tree of the self-similar measure.
///
/// Mass of a cell is `Σ { p_I : I ∈ Λ_{n+guard}, φ(f_I(x₀)) ∈ cell }` with
/// `φ` the recorded conjugation. Cylinders whose whole image hull fits inside
/// one depth-`n` cell are assigned without further expansion; this does not
/// change the result, only the work.
pub fn build_tree_measure(ifs: &WeightedIfs, n: u32, guard: u32) -> Result<BuiltTree> {
    build_tree_measure_with_budget(ifs, n, guard, DEFAULT_WORD_BUDGET)
}

pub fn build_tree_measure_with_budget(
    ifs: &WeightedIfs,
    n: u32,
    guard: u32,
    budget: u64,
) -> Result<BuiltTree> {
    let (lo, hi) = ifs.attractor_interval();
    let width = hi - lo;
    let conj = if width > 0.0 {
        Conjugation {
            offset: lo,
            scale: width,
        }
    } else {
        Conjugation {
            offset: lo,
            scale: 1.0,
        }
    };
    let x0 = ifs.maps[0].fixed_point();
    let scale_n = (n as f64).exp2();
    let max_index = (1i64 << n) - 1;
    let bin = |y: f64| -> i64 { ((y * scale_n).floor() as i64).clamp(0, max_index) };
    let threshold = (-((n + guard) as f64)).exp2();

    let mut leaves: BTreeMap<[i64; 2], f64> = BTreeMap::new();
    let mut visited: u64 = 0;
    // stack entries: (r_prefix, s_prefix, p_prefix) describing f_I(x) = r x + s
    let mut stack: Vec<(f64, f64, f64)> = vec![(1.0, 0.0, 1.0)];
    while let Some((r, s, p)) = stack.pop() {
        visited += 1;
        if visited > budget {
            return Err(Error::BudgetExceeded { visited, budget });
        }
        // image hull of the whole cylinder
        let (a, b) = {
            let e1 = conj.apply(s + r * lo);
            let e2 = conj.apply(s + r * hi);
            (e1.min(e2), e1.max(e2))
        };
        let (ia, ib) = (bin(a), bin(b));
        if ia == ib {
            *leaves.entry([ia, 0]).or_insert(0.0) += p;
            continue;
        }
        if r.abs() <= threshold {
            let y = conj.apply(s + r * x0);
            *leaves.entry([bin(y), 0]).or_insert(0.0) += p;
            continue;
        }
        for (m, &w) in ifs.maps.iter().zip(&ifs.weights).rev() {
            stack.push((r * m.r, s + r * m.s, p * w));
        }
    }
    Ok(BuiltTree {
        tree: TreeMeasure::from_leaf_masses(1, n, leaves)?,
        conjugation: conj,
        nodes_visited: visited,
    })
}

/// Eventually periodic coding `pre · per^∞`. The period must be nonempty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coding {
    pub pre: Vec<u8>,
    pub per: Vec<u8>,
}

impl Coding {
    pub fn new(pre: Vec<u8>, per: Vec<u8>) -> Result<Coding> {
        if per.is_empty() {
            return Err(Error::Invalid("coding period must be nonempty".into()));
        }
        Ok(Coding { pre, per })
    }

    /// Symbol at position `i` (0-based).
    pub fn symbol(&self, i: usize) -> u8 {
        if i < self.pre.len() {
            self.pre[i]
        } else {
            self.per[(i - self.pre.len()) % self.per.len()]
        }
    }

    /// Length of the longest common initial segment with `other`, capped.
    pub fn common_prefix_len(&self, other: &Coding, cap: usize) -> usize {
        (0..cap)
            .take_while(|&i| self.symbol(i) == other.symbol(i))
            .count()
    }
}

/// Metric `d(x,y) = 2^{-|x∧y|}` on codings, with the comparison capped at
/// 64 symbols (beyond which the distance is below any tolerance used here).
pub fn coding_distance(x: &Coding, y: &Coding) -> f64 {
    let m = x.common_prefix_len(y, 64);
    (-(m as f64)).exp2()
}

/// One coefficient of a parametric map: a closed-form polynomial in `t`, or
/// an opaque function differentiated by Richardson central differences.
pub enum CoefFn {
    Poly(Poly),
    Func {
        f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
        /// central-difference step; truncation error is `O(h⁴)` for the first
        /// derivative and `O(h²)` for the second
        h: f64,
    },
}

impl CoefFn {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            CoefFn::Poly(p) => p.eval(t),
            CoefFn::Func { f, .. } => f(t),
        }
    }

    pub fn jet(&self, t: f64) -> Jet2<f64> {
        match self {
            CoefFn::Poly(p) => p.eval_jet(t),
            CoefFn::Func { f, h } => {
                let h = *h;
                let d = |h: f64| (f(t + h) - f(t - h)) / (2.0 * h);
                let d1 = (4.0 * d(h / 2.0) - d(h)) / 3.0;
                let dd = |h: f64| (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
                let d2 = (4.0 * dd(h / 2.0) - dd(h)) / 3.0;
                Jet2 { v: f(t), d1, d2 }
            }
        }
    }
}

impl std::fmt::Debug for CoefFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CoefFn::Poly(p) => write!(f, "Poly({:?})", p.0),
            CoefFn::Func { h, .. } => write!(f, "Func(h={h})"),
        }
    }
}

/// A one-parameter family of IFSs `t ↦ { x ↦ r_i(t)·x + s_i(t) }` with
/// probability weights independent of `t`.
#[derive(Debug)]
pub struct ParametricFamily {
    /// per-symbol (ratio, translation) coefficient functions
    pub maps: Vec<(CoefFn, CoefFn)>,
    pub weights: Vec<f64>,
}

impl ParametricFamily {
    pub fn new(maps: Vec<(CoefFn, CoefFn)>, weights: Vec<f64>) -> Result<ParametricFamily> {
        if maps.is_empty() || maps.len() != weights.len() {
            return Err(Error::Invalid("need one weight per map".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 || weights.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::Invalid(
                "weights must be positive and sum to 1".into(),
            ));
        }
        Ok(ParametricFamily { maps, weights })
    }

    /// The family `f_{i,λ}(x) = λ·x + t_i` with the given translations.
    pub fn homogeneous(translations: &[f64], weights: Vec<f64>) -> Result<ParametricFamily> {
        let maps = translations
            .iter()
            .map(|&s| {
                (
                    CoefFn::Poly(Poly::identity()),
                    CoefFn::Poly(Poly::constant(s)),
                )
            })
            .collect();
        ParametricFamily::new(maps, weights)
    }

    /// Classical Bernoulli convolution: translations {0, 1}, even weights.
    pub fn bernoulli_convolution() -> ParametricFamily {
        ParametricFamily::homogeneous(&[0.0, 1.0], vec![0.5, 0.5]).expect("valid by construction")
    }

    pub fn alphabet_size(&self) -> usize {
        self.maps.len()
    }

    /// Instantiate at parameter `t`.
    pub fn ifs_at(&self, t: f64) -> Result<WeightedIfs> {
        let maps: Result<Vec<AffineContraction>> = self
            .maps
            .iter()
            .map(|(r, s)| AffineContraction::new(r.eval(t), s.eval(t)))
            .collect();
        WeightedIfs::new(maps?, self.weights.clone())
    }

    fn map_jets(&self, t: f64) -> Vec<(Jet2<f64>, Jet2<f64>)> {
        self.maps
            .iter()
            .map(|(r, s)| (r.jet(t), s.jet(t)))
            .collect()
    }

    /// `Δ_{x,y}(t) = f_{x,t}(0) − f_{y,t}(0)` together with its first two
    /// `t`-derivatives, by closed-form geometric summation on jets.
    pub fn delta_jet(&self, x: &Coding, y: &Coding, t: f64) -> Result<(f64, f64, f64)> {
        let jets = self.map_jets(t);
        let fx = coding_value_jet(&jets, x)?;
        let fy = coding_value_jet(&jets, y)?;
        let d = fx.sub(&fy);
        Ok((d.v, d.d1, d.d2))
    }

    /// Empirical bound on |d/dt f_x(0)| and |d²/dt² f_x(0)| over an interval,
    /// sampled on a grid of parameters and random eventually-periodic codings.
    /// An estimate, not a certificate.
    pub fn regularity_estimate(&self, interval: (f64, f64), samples: u32, seed: u64) -> f64 {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let k = self.alphabet_size() as u8;
        let mut worst: f64 = 0.0;
        for i in 0..samples {
            let t = if samples == 1 {
                interval.0
            } else {
                interval.0 + (interval.1 - interval.0) * i as f64 / (samples - 1) as f64
            };
            let jets = self.map_jets(t);
            for _ in 0..16 {
                let pre: Vec<u8> = (0..rng.gen_range(0..6))
                    .map(|_| rng.gen_range(0..k))
                    .collect();
                let per: Vec<u8> = (0..rng.gen_range(1..5))
                    .map(|_| rng.gen_range(0..k))
                    .collect();
                let coding = Coding::new(pre, per).expect("nonempty period");
                if let Ok(j) = coding_value_jet(&jets, &coding) {
                    worst = worst.max(j.d1.abs()).max(j.d2.abs());
                }
            }
        }
        worst
    }
}

/// Value jet of `f_{x,t}(0)` for an eventually periodic coding: the finite
/// head by Horner, the periodic tail by summing the geometric series
/// `P = f_per(0) / (1 − r_per)`.
fn coding_value_jet(jets: &[(Jet2<f64>, Jet2<f64>)], coding: &Coding) -> Result<Jet2<f64>> {
    if coding.per.is_empty() {
        return Err(Error::Invalid("coding period must be nonempty".into()));
    }
    let word_value = |word: &[u8]| -> Result<(Jet2<f64>, Jet2<f64>)> {
        // returns (r_word, f_word(0)) as jets
        let mut r = Jet2::constant(1.0);
        let mut v = Jet2::constant(0.0);
        for &i in word.iter().rev() {
            let (rj, sj) = jets
                .get(i as usize)
                .ok_or_else(|| Error::Invalid(format!("symbol {i} outside alphabet")))?;
            v = sj.add(&rj.mul(&v));
            r = rj.mul(&r);
        }
        Ok((r, v))
    };
    let (r_per, f_per) = word_value(&coding.per)?;
    if r_per.v.abs() >= 1.0 {
        return Err(Error::Invalid("period fails to contract".into()));
    }
    let denom = Jet2::constant(1.0).sub(&r_per);
    let tail = f_per.div(&denom);
    let (r_pre, f_pre) = word_value(&coding.pre)?;
    Ok(f_pre.add(&r_pre.mul(&tail)))
}

/// Exact value of `f_{x}(0)` in ℚ(√d) for a fixed exact IFS.
fn coding_value_exact(maps: &[(QuadExt, QuadExt)], coding: &Coding, d: i64) -> Result<QuadExt> {
    let word_value = |word: &[u8]| -> Result<(QuadExt, QuadExt)> {
        let mut r = QuadExt::one(d);
        let mut v = QuadExt::zero(d);
        for &i in word.iter().rev() {
            let (rm, sm) = maps
                .get(i as usize)
                .ok_or_else(|| Error::Invalid(format!("symbol {i} outside alphabet")))?;
            v = sm.clone() + rm.clone() * v;
            r = rm.clone() * r;
        }
        Ok((r, v))
    };
    let (r_per, f_per) = word_value(&coding.per)?;
    if r_per.abs_to_f64() >= 1.0 {
        return Err(Error::Invalid("period fails to contract".into()));
    }
    let denom = QuadExt::one(d) - r_per;
    let tail = f_per / denom;
    let (r_pre, f_pre) = word_value(&coding.pre)?;
    Ok(f_pre + r_pre * tail)
}

/// An IFS with coefficients in a fixed quadratic field, for exact overlap
/// detection.
#[derive(Debug, Clone)]
pub struct ExactIfs {
    pub maps: Vec<(QuadExt, QuadExt)>,
    pub d: i64,
}

impl ExactIfs {
    pub fn new(maps: Vec<(QuadExt, QuadExt)>) -> Result<ExactIfs> {
        if maps.is_empty() {
            return Err(Error::ExactArithmeticRequired("empty map list".into()));
        }
        let d = maps[0].0.d;
        for (r, s) in &maps {
            if r.d != d || s.d != d {
                return Err(Error::ExactArithmeticRequired(
                    "mixed quadratic fields".into(),
                ));
            }
            let rf = r.to_f64();
            if !(rf.abs() < 1.0) || r.is_zero() {
                return Err(Error::Invalid(format!(
                    "ratio {rf} outside (0,1) in modulus"
                )));
            }
        }
        Ok(ExactIfs { maps, d })
    }

    /// Homogeneous family `x ↦ λ·x + t_i` at an exact parameter λ.
    pub fn homogeneous(lambda: QuadExt, translations: &[QuadExt]) -> Result<ExactIfs> {
        let maps = translations
            .iter()
            .map(|s| (lambda.clone(), s.clone()))
            .collect();
        ExactIfs::new(maps)
    }

    pub fn to_float(&self, weights: Vec<f64>) -> Result<WeightedIfs> {
        let maps: Result<Vec<AffineContraction>> = self
            .maps
            .iter()
            .map(|(r, s)| AffineContraction::new(r.to_f64(), s.to_f64()))
            .collect();
        WeightedIfs::new(maps?, weights)
    }

    /// Exact `Δ` between two codings, with the derivative taken along the
    /// homogeneous direction (all ratios move together) when `parametric`.
    pub fn delta_exact(&self, x: &Coding, y: &Coding) -> Result<QuadExt> {
        let vx = coding_value_exact(&self.maps, x, self.d)?;
        let vy = coding_value_exact(&self.maps, y, self.d)?;
        Ok(vx - vy)
    }
}

/// All pairs `I ≠ J` of equal length `≤ n` with `r_I = r_J` and
/// `f_I(0) = f_J(0)`, decided exactly in ℚ(√d).
pub fn exact_overlap_search(ifs: &ExactIfs, n: u32) -> Result<Vec<(Word, Word)>> {
    exact_overlap_search_with_budget(ifs, n, DEFAULT_WORD_BUDGET)
}

pub fn exact_overlap_search_with_budget(
    ifs: &ExactIfs,
    n: u32,
    budget: u64,
) -> Result<Vec<(Word, Word)>> {
    let k = ifs.maps.len() as u64;
    let mut total: u64 = 0;
    let mut pow = 1u64;
    for _ in 0..n {
        pow = pow.saturating_mul(k);
        total = total.saturating_add(pow);
        if total > budget {
            return Err(Error::BudgetExceeded {
                visited: total,
                budget,
            });
        }
    }
    let mut out = Vec::new();
    // DFS over words tracking (r_I, s_I) with f_I(0) = s_I
    let mut groups: Vec<BTreeMap<(QuadExt, QuadExt), Vec<Word>>> =
        (0..=n).map(|_| BTreeMap::new()).collect();
    let mut stack: Vec<(Vec<u8>, QuadExt, QuadExt)> =
        vec![(Vec::new(), QuadExt::one(ifs.d), QuadExt::zero(ifs.d))];
    while let Some((word, r, s)) = stack.pop() {
        let len = word.len() as u32;
        if len > 0 {
            groups[len as usize]
                .entry((r.clone(), s.clone()))
                .or_default()
                .push(Word(word.clone()));
        }
        if len < n {
            for (i, (rm, sm)) in ifs.maps.iter().enumerate() {
                let mut w = word.clone();
                w.push(i as u8);
                // f_{I·i}(x) = f_I(f_i(x)): ratio r·r_i, translation r·s_i + s
                stack.push((
                    w,
                    r.clone() * rm.clone(),
                    r.clone() * sm.clone() + s.clone(),
                ));
            }
        }
    }
    for level in groups {
        for (_, mut words) in level {
            if words.len() > 1 {
                words.sort();
                for i in 0..words.len() {
                    for j in i + 1..words.len() {
                        out.push((words[i].clone(), words[j].clone()));
                    }
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

/// A recorded transversality violation: at parameter `t` the pair came closer
/// than `C_β·d^β` while its derivative stayed below the same bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Violation {
    pub x: Coding,
    pub y: Coding,
    pub t: f64,
    pub distance: f64,
    pub delta_abs: f64,
    pub delta_prime_abs: f64,
}

/// Outcome of a finite transversality audit. An empty violation list means
/// "no violation found at this resolution", never a proof of transversality.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransversalityReport {
    pub beta: f64,
    pub c_beta: f64,
    pub depth: u32,
    pub grid_points: usize,
    pub interval: (f64, f64),
    pub pairs_audited: u64,
    pub violations: Vec<Violation>,
    /// empirical bound on first/second derivatives of f_x(0), see
    /// [`ParametricFamily::regularity_estimate`]
    pub regularity_estimate: f64,
    /// pair-sampling strategy description, with seed when randomized
    pub sampling: String,
}

/// How the audit picks coding pairs.
#[derive(Debug, Clone, Copy)]
pub enum PairSampling {
    /// All pairs of depth-`n` words with distinct first symbols, each
    /// extended by the all-zeros tail.
    ExhaustiveFirstSplit,
    /// Stratified: for every shared prefix length `m < n`, sample pairs with
    /// a random common prefix, forced distinct continuation and random tails.
    Stratified { per_stratum: usize, seed: u64 },
}

/// Audit the β-transversality implication over a parameter grid.
///
/// For each audited pair and every grid point, checks that
/// `|Δ| ≤ C_β·d(x,y)^β` implies `|Δ'| ≥ C_β·d(x,y)^β`, and records failures.
pub fn transversality_audit(
    family: &ParametricFamily,
    interval: (f64, f64),
    beta: f64,
    c_beta: f64,
    depth: u32,
    grid_points: usize,
    sampling: PairSampling,
) -> Result<TransversalityReport> {
    use rand::{Rng, SeedableRng};
    if grid_points == 0 || (grid_points == 1 && interval.0 != interval.1) {
        return Err(Error::Invalid(
            "grid step larger than interval: need at least two grid points".into(),
        ));
    }
    let ts: Vec<f64> = (0..grid_points)
        .map(|i| {
            if grid_points == 1 {
                interval.0
            } else {
                interval.0 + (interval.1 - interval.0) * i as f64 / (grid_points - 1) as f64
            }
        })
        .collect();
    let k = family.alphabet_size() as u8;
    let mut pairs: Vec<(Coding, Coding)> = Vec::new();
    let sampling_desc;
    match sampling {
        PairSampling::ExhaustiveFirstSplit => {
            sampling_desc = "exhaustive-first-split".to_string();
            let n = depth as usize;
            let words = enumerate_words(k, n);
            for (ai, a) in words.iter().enumerate() {
                for b in words.iter().skip(ai + 1) {
                    if a[0] == b[0] {
                        continue;
                    }
                    pairs.push((
                        Coding::new(a.clone(), vec![0]).expect("period nonempty"),
                        Coding::new(b.clone(), vec![0]).expect("period nonempty"),
                    ));
                }
            }
        }
        PairSampling::Stratified { per_stratum, seed } => {
            sampling_desc = format!("stratified(per_stratum={per_stratum}, seed={seed})");
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = depth as usize;
            for m in 0..n {
                for _ in 0..per_stratum {
                    let prefix: Vec<u8> = (0..m).map(|_| rng.gen_range(0..k)).collect();
                    let a_next = rng.gen_range(0..k);
                    let b_next = (a_next + rng.gen_range(1..k.max(2))) % k;
                    let mut a = prefix.clone();
                    let mut b = prefix;
                    a.push(a_next);
                    b.push(b_next);
                    for _ in m + 1..n {
                        a.push(rng.gen_range(0..k));
                        b.push(rng.gen_range(0..k));
                    }
                    pairs.push((
                        Coding::new(a, vec![0]).expect("period nonempty"),
                        Coding::new(b, vec![0]).expect("period nonempty"),
                    ));
                }
            }
        }
    }

    let mut violations = Vec::new();
    let mut audited: u64 = 0;
    for (x, y) in &pairs {
        if x == y {
            continue;
        }
        let d = coding_distance(x, y);
        let bound = c_beta * d.powf(beta);
        for &t in &ts {
            audited += 1;
            let (delta, dprime, _) = family.delta_jet(x, y, t)?;
            if delta.abs() <= bound && dprime.abs() < bound {
                violations.push(Violation {
                    x: x.clone(),
                    y: y.clone(),
                    t,
                    distance: d,
                    delta_abs: delta.abs(),
                    delta_prime_abs: dprime.abs(),
                });
            }
        }
    }
    let regularity = family.regularity_estimate(interval, 16, 17);
    Ok(TransversalityReport {
        beta,
        c_beta,
        depth,
        grid_points,
        interval,
        pairs_audited: audited,
        violations,
        regularity_estimate: regularity,
        sampling: sampling_desc,
    })
}

fn enumerate_words(alphabet: u8, len: usize) -> Vec<Vec<u8>> {
    let mut out: Vec<Vec<u8>> = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * alphabet as usize);
        for w in &out {
            for i in 0..alphabet {
                let mut v = w.clone();
                v.push(i);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Structured-text description of an IFS or parametric family.
///
/// TOML schema: optional `weights` (uniform when absent), optional
/// `interval = [a, b]`, and one `[[map]]` per symbol carrying either fixed
/// `r`/`s` or polynomial `r_poly`/`s_poly` coefficient lists in `t`.
/// Fixed ratios with `|r| ≥ 1` are rejected.
#[derive(Debug, Deserialize)]
pub struct IfsFile {
    pub weights: Option<Vec<f64>>,
    pub interval: Option<(f64, f64)>,
    #[serde(rename = "map")]
    pub maps: Vec<IfsFileMap>,
}

#[derive(Debug, Deserialize)]
pub struct IfsFileMap {
    pub r: Option<f64>,
    pub s: Option<f64>,
    pub r_poly: Option<Vec<f64>>,
    pub s_poly: Option<Vec<f64>>,
}

/// Parsed form: either a fixed IFS or a parametric family.
#[derive(Debug)]
pub enum IfsSpec {
    Fixed(WeightedIfs),
    Parametric {
        family: ParametricFamily,
        interval: Option<(f64, f64)>,
    },
}

pub fn parse_ifs_file(text: &str) -> Result<IfsSpec> {
    let file: IfsFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if file.maps.is_empty() {
        return Err(Error::Parse("no [[map]] entries".into()));
    }
    let n = file.maps.len();
    let weights = file
        .weights
        .clone()
        .unwrap_or_else(|| vec![1.0 / n as f64; n]);
    let parametric = file
        .maps
        .iter()
        .any(|m| m.r_poly.is_some() || m.s_poly.is_some());
    if parametric {
        let maps: Result<Vec<(CoefFn, CoefFn)>> = file
            .maps
            .iter()
            .map(|m| {
                let r = match (&m.r_poly, m.r) {
                    (Some(c), _) => CoefFn::Poly(Poly(c.clone())),
                    (None, Some(v)) => CoefFn::Poly(Poly::constant(v)),
                    _ => return Err(Error::Parse("map needs r or r_poly".into())),
                };
                let s = match (&m.s_poly, m.s) {
                    (Some(c), _) => CoefFn::Poly(Poly(c.clone())),
                    (None, Some(v)) => CoefFn::Poly(Poly::constant(v)),
                    _ => return Err(Error::Parse("map needs s or s_poly".into())),
                };
                Ok((r, s))
            })
            .collect();
        Ok(IfsSpec::Parametric {
            family: ParametricFamily::new(maps?, weights)?,
            interval: file.interval,
        })
    } else {
        let maps: Result<Vec<AffineContraction>> = file
            .maps
            .iter()
            .map(|m| {
                let (r, s) = (
                    m.r.ok_or_else(|| Error::Parse("map needs r".into()))?,
                    m.s.ok_or_else(|| Error::Parse("map needs s".into()))?,
                );
                AffineContraction::new(r, s)
            })
            .collect();
        Ok(IfsSpec::Fixed(WeightedIfs::new(maps?, weights)?))
    }
}
