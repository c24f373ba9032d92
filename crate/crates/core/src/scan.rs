//! Parameter-sweep entropy profiles, the branch decomposition over stopping
//! words, atom-measure entropies and dimension-drop detection.
//!
//! The sweep reports normalized entropy `H(μ_t, D_n)/n`, not certified
//! dimension: the bound `dim ≥ H/k − C/k` has an existence-only constant, so
//! profiles are lower bounds up to `C/k` and are labelled as such.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::{cell_of_point, DyadicCell};
use crate::error::{Error, Result};
use crate::exact::QuadExt;
use crate::ifs::{
    build_tree_measure_with_budget, exact_overlap_search, stopping_words_with_budget, ExactIfs,
    ParametricFamily, Word, DEFAULT_WORD_BUDGET,
};

/// Normalized entropy and similarity dimension along a parameter grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropyProfile {
    pub depth: u32,
    pub guard: u32,
    pub ts: Vec<f64>,
    pub entropy_bits: Vec<f64>,
    /// `H(μ_t, D_n)/n`, in `[0, 1 + binning error]`
    pub normalized: Vec<f64>,
    pub sd: Vec<f64>,
}

impl EntropyProfile {
    /// CSV rows `(t, n, entropy_bits, normalized, sd, deficit, flagged)`.
    pub fn to_csv(&self, dips: &DipReport) -> String {
        let mut out = String::from("t,n,entropy_bits,normalized,sd,deficit,flagged\n");
        for (i, &t) in self.ts.iter().enumerate() {
            let deficit = self.sd[i].min(1.0) - self.normalized[i];
            let flagged = dips.flags.iter().any(|f| f.index == i);
            out.push_str(&format!(
                "{t},{},{},{},{},{deficit},{flagged}\n",
                self.depth, self.entropy_bits[i], self.normalized[i], self.sd[i]
            ));
        }
        out
    }
}

/// Sweep the family over `ts`, building a depth-`n` tree per parameter.
/// Per-parameter work is independent; the map is parallel with output order
/// fixed by the grid.
pub fn entropy_profile(
    family: &ParametricFamily,
    ts: &[f64],
    n: u32,
    guard: u32,
) -> Result<EntropyProfile> {
    entropy_profile_with_budget(family, ts, n, guard, DEFAULT_WORD_BUDGET)
}

pub fn entropy_profile_with_budget(
    family: &ParametricFamily,
    ts: &[f64],
    n: u32,
    guard: u32,
    budget: u64,
) -> Result<EntropyProfile> {
    let rows: Result<Vec<(f64, f64, f64)>> = ts
        .par_iter()
        .map(|&t| {
            let ifs = family.ifs_at(t)?;
            let built = build_tree_measure_with_budget(&ifs, n, guard, budget)?;
            let h = built.tree.shannon_entropy(n)?;
            Ok((h.entropy_bits, h.normalized, ifs.similarity_dimension()))
        })
        .collect();
    let rows = rows?;
    Ok(EntropyProfile {
        depth: n,
        guard,
        ts: ts.to_vec(),
        entropy_bits: rows.iter().map(|r| r.0).collect(),
        normalized: rows.iter().map(|r| r.1).collect(),
        sd: rows.iter().map(|r| r.2).collect(),
    })
}

/// One atom of a branch cell: a stopping word, its cylinder probability and
/// the point `f_{I,t}(0)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchAtom {
    pub word: Word,
    pub prob: f64,
    pub position: f64,
}

/// A depth-`n` cell `Q` together with `A_Q`, `a_Q` and the atom measure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchCell {
    pub cell: DyadicCell,
    /// `a_Q = Σ_{I ∈ A_Q} p_I`
    pub mass: f64,
    pub atoms: Vec<BranchAtom>,
}

/// Partition of the stopping words `Λ_n` by the depth-`n` cell containing
/// `f_{I,t}(x₀)`, in the attractor's own coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchDecomposition {
    pub depth: u32,
    pub x0: f64,
    pub cells: Vec<BranchCell>,
}

impl BranchDecomposition {
    pub fn total_mass(&self) -> f64 {
        self.cells.iter().map(|c| c.mass).sum()
    }

    /// `Σ_Q a_Q log(1/a_Q)`: the entropy of the atom-placement measure at
    /// depth `n`, exactly (same grouping on both sides).
    pub fn cell_entropy(&self) -> f64 {
        self.cells
            .iter()
            .filter(|c| c.mass > 0.0)
            .map(|c| -c.mass * c.mass.log2())
            .sum()
    }
}

/// Build the branch decomposition of `Λ_n` at parameter `t0`.
///
/// `x0` defaults to the fixed point of the first map when `None`; the choice
/// only moves atoms by an `O(1)`-cells offset.
pub fn branch_decomposition(
    family: &ParametricFamily,
    t0: f64,
    n: u32,
    x0: Option<f64>,
) -> Result<BranchDecomposition> {
    let ifs = family.ifs_at(t0)?;
    let x0 = x0.unwrap_or_else(|| ifs.maps[0].fixed_point());
    let words = stopping_words_with_budget(&ifs, n, DEFAULT_WORD_BUDGET)?;
    let mut cells: std::collections::BTreeMap<i64, BranchCell> = std::collections::BTreeMap::new();
    for word in words {
        let p = word.prob(&ifs);
        let place = word.apply(&ifs, x0);
        let position = word.apply(&ifs, 0.0);
        let cell = cell_of_point(&[place], n);
        let entry = cells.entry(cell.coords[0]).or_insert_with(|| BranchCell {
            cell,
            mass: 0.0,
            atoms: Vec::new(),
        });
        entry.mass += p;
        entry.atoms.push(BranchAtom {
            word,
            prob: p,
            position,
        });
    }
    Ok(BranchDecomposition {
        depth: n,
        x0,
        cells: cells.into_values().collect(),
    })
}

/// Reposition a cell's atoms at a different parameter, keeping the word set
/// fixed. This is the two-parameter comparison the atom-entropy dichotomy
/// needs: same `A_Q`, positions `f_{I,t}(0)`.
pub fn reposition_atoms(
    family: &ParametricFamily,
    cell: &BranchCell,
    t: f64,
) -> Result<Vec<(f64, f64)>> {
    let ifs = family.ifs_at(t)?;
    Ok(cell
        .atoms
        .iter()
        .map(|a| (a.word.apply(&ifs, 0.0), a.prob / cell.mass))
        .collect())
}

/// `(1/n)·Σ_Q a_Q Σ_{I∈A_Q} (p_I/a_Q)·log(a_Q/p_I)`: the entropy the branch
/// grouping hides below cell resolution. Zero iff every `A_Q` is a singleton.
pub fn branch_entropy_excess(dec: &BranchDecomposition) -> f64 {
    let mut acc = 0.0;
    for c in &dec.cells {
        if c.mass <= 0.0 {
            continue;
        }
        for a in &c.atoms {
            acc += a.prob * (c.mass / a.prob).log2();
        }
    }
    acc / dec.depth as f64
}

/// Entropy in bits of a weighted atom list at dyadic scale `2^-scale_depth`.
///
/// Atoms are grouped by the cell containing them; scale depths beyond f64
/// resolution group exactly equal positions only.
pub fn atom_entropy(atoms: &[(f64, f64)], scale_depth: u32) -> Result<f64> {
    if atoms.is_empty() {
        return Err(Error::EmptyComponent);
    }
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    if total <= 0.0 {
        return Err(Error::EmptyComponent);
    }
    let scale = (scale_depth as f64).exp2();
    let mut groups: std::collections::BTreeMap<i128, f64> = std::collections::BTreeMap::new();
    for &(x, w) in atoms {
        let idx = (x * scale).floor() as i128;
        *groups.entry(idx).or_insert(0.0) += w / total;
    }
    Ok(groups
        .values()
        .filter(|&&w| w > 0.0)
        .map(|&w| -w * w.log2())
        .sum())
}

/// Entropy of one branch cell's stored atom measure at the given scale.
pub fn branch_atom_entropy(cell: &BranchCell, scale_depth: u32) -> Result<f64> {
    let atoms: Vec<(f64, f64)> = cell
        .atoms
        .iter()
        .map(|a| (a.position, a.prob / cell.mass))
        .collect();
    atom_entropy(&atoms, scale_depth)
}

/// A flagged parameter: normalized entropy below `min(1, sd)` by more than
/// the threshold, with an exact-overlap witness when one was matched.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DipFlag {
    pub index: usize,
    pub t: f64,
    pub deficit: f64,
    /// word pair from `exact_overlap_search`, rendered as digit strings
    pub witness: Option<(String, String)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DipReport {
    pub threshold: f64,
    /// all flags above threshold, sorted by deficit, adjacent grid points
    /// not deduplicated
    pub flags: Vec<DipFlag>,
}

/// An exact parameter candidate for witness matching: a quadratic-field
/// value of `t` and the translations of the homogeneous family at it.
#[derive(Debug, Clone)]
pub struct ExactCandidate {
    pub label: String,
    pub lambda: QuadExt,
    pub translations: Vec<QuadExt>,
}

impl ExactCandidate {
    /// The golden-ratio Bernoulli-convolution parameter λ = (√5−1)/2.
    pub fn golden_bernoulli() -> ExactCandidate {
        use crate::exact::rat;
        ExactCandidate {
            label: "golden".into(),
            lambda: QuadExt::new(rat(-1, 2), rat(1, 2), 5).expect("5 is a non-square"),
            translations: vec![QuadExt::zero(5), QuadExt::one(5)],
        }
    }
}

/// Flag parameters whose entropy deficit `min(1, sd) − H/n` exceeds the
/// threshold. When exact candidates are supplied, a flagged grid point within
/// half a grid step of a candidate gets its overlap witness attached.
pub fn dip_detector(
    profile: &EntropyProfile,
    threshold: f64,
    candidates: &[ExactCandidate],
    witness_depth: u32,
) -> Result<DipReport> {
    if profile.ts.is_empty() {
        return Err(Error::Invalid("empty profile".into()));
    }
    let step = if profile.ts.len() > 1 {
        (profile.ts[1] - profile.ts[0]).abs()
    } else {
        f64::INFINITY
    };
    let mut flags = Vec::new();
    for i in 0..profile.ts.len() {
        let deficit = profile.sd[i].min(1.0) - profile.normalized[i];
        if deficit > threshold {
            let mut witness = None;
            for cand in candidates {
                if (cand.lambda.to_f64() - profile.ts[i]).abs() <= step / 2.0 {
                    let ifs = ExactIfs::homogeneous(cand.lambda.clone(), &cand.translations)?;
                    if let Some((a, b)) = exact_overlap_search(&ifs, witness_depth)?
                        .into_iter()
                        .next()
                    {
                        witness = Some((a.to_string(), b.to_string()));
                    }
                }
            }
            flags.push(DipFlag {
                index: i,
                t: profile.ts[i],
                deficit,
                witness,
            });
        }
    }
    flags.sort_by(|a, b| b.deficit.total_cmp(&a.deficit));
    Ok(DipReport { threshold, flags })
}

/// Localize a flagged dip by golden-section search on the normalized entropy
/// between the flag's grid neighbors. Stops at `resolution` (or 48 shrink
/// steps); no root polishing beyond the bisection.
pub fn refine_dip(
    family: &ParametricFamily,
    flag_t: f64,
    grid_step: f64,
    n: u32,
    guard: u32,
    resolution: f64,
) -> Result<(f64, f64)> {
    let eval = |t: f64| -> Result<f64> {
        let ifs = family.ifs_at(t)?;
        let built = build_tree_measure_with_budget(&ifs, n, guard, DEFAULT_WORD_BUDGET)?;
        Ok(built.tree.shannon_entropy(n)?.normalized)
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (flag_t - grid_step, flag_t + grid_step);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (eval(x1)?, eval(x2)?);
    for _ in 0..48 {
        if hi - lo <= resolution {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = eval(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = eval(x2)?;
        }
    }
    let t = (lo + hi) / 2.0;
    Ok((t, eval(t)?))
}
