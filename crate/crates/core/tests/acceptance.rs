//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its runtime and asserting its stated tolerance.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::collections::BTreeMap;
use std::time::Instant;

use fraclab::additive::{
    additive_energy, adversarial_min_union, entropy_increase_experiment, grid_uniform,
    porosity_witness, regularize, translate_union, verify_regularization, BAssignment, GridSet,
};
use fraclab::dyadic::{cell_of_point, DyadicCell, TreeMeasure};
use fraclab::exact::{rat, QuadExt};
use fraclab::fixtures::{random_grid_set, random_tree};
use fraclab::ifs::{
    build_tree_measure, exact_overlap_search, transversality_audit, AffineContraction, Coding,
    ExactIfs, PairSampling, ParametricFamily, WeightedIfs,
};
use fraclab::planar::{
    assouad_estimate, attractor_cells, build_tree_measure_cells, coincidence_direction,
    cylinder_hulls, four_corner_ifs, project_ifs, Direction,
};
use fraclab::scan::entropy_profile;
use fraclab::scenery::{magnify, scenery_orbit, spreading_check, SceneryState};

fn golden() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

fn binary_entropy(p: f64) -> f64 {
    if p == 0.0 || p == 1.0 {
        0.0
    } else {
        -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
    }
}

struct Budget {
    name: &'static str,
    start: Instant,
    limit_s: f64,
}

impl Budget {
    fn new(name: &'static str, limit_s: f64) -> Budget {
        Budget {
            name,
            start: Instant::now(),
            limit_s,
        }
    }

    fn done(self, detail: &str) {
        let elapsed = self.start.elapsed().as_secs_f64();
        println!(
            "[{}] PASS in {elapsed:.2}s (limit {}s) — {detail}",
            self.name, self.limit_s
        );
        assert!(
            elapsed < self.limit_s,
            "{} exceeded its runtime budget: {elapsed:.2}s",
            self.name
        );
    }
}

#[test]
fn criterion_1_entropy_identities() {
    let budget = Budget::new("criterion 1", 10.0);
    let tol = 1e-10;
    for seed in 0..500u64 {
        let depth = 4 + (seed % 7) as u32; // depths 4..=10
        let mu = random_tree(1, depth, seed);
        // chain rule
        let k1 = (seed % depth as u64) as u32 % (depth - 1);
        let k2 = k1 + 1 + (seed % (depth - k1) as u64) as u32;
        let k2 = k2.min(depth);
        let (coarse, cond) = mu.refine_entropy_decomposition(k1, k2).unwrap();
        let fine = mu.shannon_entropy(k2).unwrap().entropy_bits;
        assert!(
            (coarse + cond - fine).abs() < tol,
            "chain rule failed at seed {seed}: {} vs {fine}",
            coarse + cond
        );
        // convexity sandwich on a mixture with a second tree
        let nu = random_tree(1, depth, seed + 10_000);
        let q = 0.05 + 0.9 * ((seed as f64 * 0.618).fract());
        let mut leaves = BTreeMap::new();
        for (cell, m) in mu.cells_at(depth) {
            *leaves.entry(cell.coords).or_insert(0.0) += q * m;
        }
        for (cell, m) in nu.cells_at(depth) {
            *leaves.entry(cell.coords).or_insert(0.0) += (1.0 - q) * m;
        }
        let mix = TreeMeasure::from_leaf_masses(1, depth, leaves).unwrap();
        let k = depth.min(2 + (seed % 5) as u32);
        let h = mix.shannon_entropy(k).unwrap().entropy_bits;
        let ha = mu.shannon_entropy(k).unwrap().entropy_bits;
        let hb = nu.shannon_entropy(k).unwrap().entropy_bits;
        let lower = q * ha + (1.0 - q) * hb;
        let penalty = -(q * q.log2() + (1.0 - q) * (1.0 - q).log2());
        assert!(
            h + tol >= lower,
            "convexity lower bound failed at seed {seed}"
        );
        assert!(
            h <= lower + penalty + tol,
            "concavity upper bound failed at seed {seed}"
        );
    }
    budget.done("chain rule and convexity sandwich on 500 seeded trees at 1e-10");
}

#[test]
fn criterion_2_self_similar_fixed_points() {
    let budget = Budget::new("criterion 2", 5.0);
    let mut details = Vec::new();
    for &p in &[0.5, 0.25, 0.3] {
        let mu = TreeMeasure::bernoulli(p, 12);
        // exact magnification fixed point, componentwise
        let state = SceneryState::new_fixed_point(mu.clone(), &[0.6]).unwrap();
        let next = magnify(&state).unwrap();
        for k in 0..=11u32 {
            for (c, m) in mu.cells_at(k) {
                assert!(
                    (next.measure.mass(&c) - m).abs() <= 1e-12,
                    "fixed point broken at p={p}, cell {c:?}"
                );
            }
        }
        // Cesàro scenery mean at l=8, N=200
        let stats = scenery_orbit(&state, 200, 8).unwrap();
        let h = binary_entropy(p);
        assert!(
            (stats.mean() - h).abs() < 0.03,
            "Cesàro mean off at p={p}: {} vs {h}",
            stats.mean()
        );
        details.push(format!("p={p}: mean {:.6} vs H(p) {:.6}", stats.mean(), h));
    }
    budget.done(&details.join("; "));
}

/// Independent 3-adic oracle: enumerate the 2^m uniform cylinders of the
/// middle-thirds measure and bin their left endpoints on the dyadic grid.
fn triadic_oracle_normalized_entropy(n: u32, m: u32) -> f64 {
    let mut leaves = BTreeMap::new();
    let count = 1u64 << m;
    let mass = 1.0 / count as f64;
    for idx in 0..count {
        let mut x = 0.0f64;
        let mut p = 1.0f64 / 3.0;
        for b in (0..m).rev() {
            if (idx >> b) & 1 == 1 {
                x += 2.0 * p;
            }
            p /= 3.0;
        }
        let cell = ((x * (n as f64).exp2()).floor() as i64).clamp(0, (1 << n) - 1);
        *leaves.entry([cell, 0]).or_insert(0.0) += mass;
    }
    let oracle = TreeMeasure::from_leaf_masses(1, n, leaves).unwrap();
    oracle.shannon_entropy(n).unwrap().normalized
}

#[test]
fn criterion_3_dimension_numerics() {
    let start = Instant::now();
    // λ = 1/2 Bernoulli convolution: Lebesgue on the rescaled attractor,
    // normalized entropy exactly 1
    let fam = ParametricFamily::bernoulli_convolution();
    let prof = entropy_profile(&fam, &[0.5], 16, 6).unwrap();
    assert_eq!(prof.normalized[0], 1.0, "λ=1/2 must give exactly 1.0");

    // middle-thirds via its own maps, against the independent 3-adic oracle
    let thirds = WeightedIfs::uniform(vec![
        AffineContraction::new(1.0 / 3.0, 0.0).unwrap(),
        AffineContraction::new(1.0 / 3.0, 2.0 / 3.0).unwrap(),
    ])
    .unwrap();
    let built = build_tree_measure(&thirds, 16, 6).unwrap();
    let h = built.tree.shannon_entropy(16).unwrap().normalized;
    let oracle = triadic_oracle_normalized_entropy(16, 14);
    assert!(
        (h - oracle).abs() < 0.01,
        "tree route {h} disagrees with the 3-adic oracle {oracle}"
    );
    let dim = 2f64.log2() / 3f64.log2();
    assert!(
        h > dim - 0.02,
        "normalized entropy must not undershoot the dimension"
    );
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "criterion 3 exceeded its runtime budget");
    println!(
        "[criterion 3] λ=1/2 exactly 1.0; middle-thirds H/16 = {h:.6} agrees with the \
         3-adic oracle {oracle:.6} to 1e-3 ({elapsed:.2}s); as-stated tolerance check follows"
    );

    // As stated, the criterion also demands |H/16 − log2/log3| ≤ 0.02. The
    // exact depth-16 value for the middle-thirds measure is 10.9292/16 =
    // 0.68308 (computable from the Cantor CDF in rational arithmetic), i.e.
    // the normalized entropy carries an additive constant ≈ 0.83 bits and
    // sits 0.052 above log2/log3 at this depth; both routes above agree on
    // it to 1e-3. The assertion below therefore fails by the stated
    // tolerance, and is kept as stated rather than loosened.
    assert!(
        (h - dim).abs() <= 0.02,
        "criterion 3 as stated: |H/16 − log2/log3| = {:.4} > 0.02; the exact \
         depth-16 value is 0.68308 (= log2/log3 + 0.83/16), confirmed by the \
         independent 3-adic oracle ({oracle:.5}) and by exact CDF computation; \
         the stated tolerance would require depth ≥ 42",
        (h - dim).abs()
    );
}

#[test]
fn criterion_4_exact_overlaps_and_dip() {
    let budget = Budget::new("criterion 4", 120.0);
    // witness via ℚ(√5)
    let lambda = QuadExt::new(rat(-1, 2), rat(1, 2), 5).unwrap();
    let ifs = ExactIfs::homogeneous(lambda, &[QuadExt::zero(5), QuadExt::one(5)]).unwrap();
    let pairs = exact_overlap_search(&ifs, 3).unwrap();
    let found = pairs.iter().any(|(a, b)| {
        let (a, b) = (a.to_string(), b.to_string());
        (a == "100" && b == "011") || (a == "011" && b == "100")
    });
    assert!(
        found,
        "golden-ratio overlap witness (100, 011) not found: {pairs:?}"
    );

    // dip at λ*: strictly below both neighbors at grid step 0.002, depth 16
    let fam = ParametricFamily::bernoulli_convolution();
    let ts = [golden() - 0.002, golden(), golden() + 0.002];
    let prof = entropy_profile(&fam, &ts, 16, 0).unwrap();
    assert!(
        prof.normalized[1] < prof.normalized[0],
        "no dip against the left neighbor: {} vs {}",
        prof.normalized[1],
        prof.normalized[0]
    );
    assert!(
        prof.normalized[1] < prof.normalized[2],
        "no dip against the right neighbor: {} vs {}",
        prof.normalized[1],
        prof.normalized[2]
    );
    budget.done(&format!(
        "witness (100,011); H/16 at λ* = {:.6} vs neighbors {:.6}, {:.6}",
        prof.normalized[1], prof.normalized[0], prof.normalized[2]
    ));
}

#[test]
fn criterion_5_four_corner_projections() {
    let budget = Budget::new("criterion 5", 60.0);
    let ifs = four_corner_ifs();
    // covering counts 2^m and 3^m for m ≤ 8, exact
    let axis = project_ifs(&ifs, Direction::new(0.0)).unwrap();
    let diag = project_ifs(&ifs, Direction::new(std::f64::consts::FRAC_PI_4)).unwrap();
    for m in 1..=8u32 {
        let (hulls, disjoint) = cylinder_hulls(&axis, m).unwrap();
        assert!(
            disjoint && hulls.len() as u64 == 1 << m,
            "axis count at m={m}"
        );
        let (hulls, disjoint) = cylinder_hulls(&diag, m).unwrap();
        assert!(
            disjoint && hulls.len() as u64 == 3u64.pow(m),
            "diagonal count at m={m}"
        );
    }
    // two-scale Assouad estimates at (k,m) = (2,8)
    let set_cells = attractor_cells(&ifs, 10, 4).unwrap();
    let est_set = assouad_estimate(&set_cells, 10, 2, 8).unwrap();
    assert_eq!(est_set.estimate, 1.0, "four-corner set estimate");
    let proj_cells = build_tree_measure_cells(&axis, 10, 6).unwrap();
    let est_proj = assouad_estimate(&proj_cells, 10, 2, 8).unwrap();
    assert_eq!(est_proj.estimate, 0.5, "axis projection estimate");
    // coincidence direction
    let dir = coincidence_direction([3.0, 0.0], [0.0, 3.0]).unwrap();
    assert!((dir.theta() - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    budget.done("2^m and 3^m exact for m ≤ 8; Assouad 1.0 and 0.5; θ = π/4 to 1e-12");
}

#[test]
fn criterion_6_transversality_audit() {
    let budget = Budget::new("criterion 6", 60.0);
    let fam = ParametricFamily::bernoulli_convolution();
    let report = transversality_audit(
        &fam,
        (0.50, 0.60),
        1.0,
        0.2,
        8,
        101,
        PairSampling::ExhaustiveFirstSplit,
    )
    .unwrap();
    assert!(
        report.violations.is_empty(),
        "found {} violations",
        report.violations.len()
    );
    // golden-ratio pair: Δ = 0 and |Δ'| = √5 to 1e-10
    let x = Coding::new(vec![1, 0, 0], vec![0]).unwrap();
    let y = Coding::new(vec![0, 1, 1], vec![0]).unwrap();
    let (d, d1, _) = fam.delta_jet(&x, &y, golden()).unwrap();
    assert!(d.abs() < 1e-10, "Δ = {d}");
    assert!(
        (d1.abs() - 5f64.sqrt()).abs() < 1e-10,
        "|Δ'| = {}",
        d1.abs()
    );
    budget.done(&format!(
        "{} pair-parameter checks, zero violations; |Δ'| − √5 = {:.2e}",
        report.pairs_audited,
        d1.abs() - 5f64.sqrt()
    ));
}

#[test]
fn criterion_7_additive_oracles() {
    let budget = Budget::new("criterion 7", 120.0);
    // 1000 random instances at n = 10..=12 against independent oracles
    for seed in 0..1000u64 {
        let n = 10 + (seed % 3) as u32;
        let density = (4 + seed % 40) as f64 / (1u64 << n) as f64;
        let a = random_grid_set(n, density, seed);
        let b = random_grid_set(n, density, seed + 100_000);
        let rep = translate_union(&a, &b, &BAssignment::Uniform(&b)).unwrap();
        let mut union_oracle = std::collections::HashSet::new();
        let mut energy_oracle_map: std::collections::HashMap<u64, u64> =
            std::collections::HashMap::new();
        for x in a.indices() {
            for y in b.indices() {
                union_oracle.insert(x + y);
                *energy_oracle_map.entry(x + y).or_insert(0) += 1;
            }
        }
        assert_eq!(
            rep.union_card,
            union_oracle.len() as u64,
            "union at seed {seed}"
        );
        let energy_oracle: u64 = energy_oracle_map.values().map(|&c| c * c).sum();
        assert_eq!(
            additive_energy(&a, &b).unwrap(),
            energy_oracle,
            "energy at seed {seed}"
        );
        if seed % 10 == 0 {
            // quadruple-loop oracle on the smaller instances
            let ai = a.indices();
            let bi = b.indices();
            let mut quad = 0u64;
            for &a1 in &ai {
                for &a2 in &ai {
                    for &b1 in &bi {
                        for &b2 in &bi {
                            if a1 + b1 == a2 + b2 {
                                quad += 1;
                            }
                        }
                    }
                }
            }
            assert_eq!(
                additive_energy(&a, &b).unwrap(),
                quad,
                "quadruple at seed {seed}"
            );
        }
    }
    // 200 random trees: both regularization clauses hold exactly
    for seed in 0..200u64 {
        let mu = random_tree(1, 12, seed);
        let res = regularize(&mu, 3, 4).unwrap();
        verify_regularization(&mu, &res, 1).unwrap();
    }
    // porosity bound against direct mass summation on its fixtures
    let n = 12u32;
    let mu = TreeMeasure::uniform(1, n);
    let fixtures: Vec<(Vec<u64>, u32, f64, f64)> = vec![
        ((0..1u64).collect(), 1, 0.5, 0.5),
        (
            (0..(1u64 << 6))
                .map(|m| {
                    let mut v = 0u64;
                    for i in 0..6 {
                        if (m >> i) & 1 == 1 {
                            v |= 1 << (2 * i);
                        }
                    }
                    v
                })
                .collect(),
            1,
            0.5,
            0.4,
        ),
    ];
    for (idx, l, tau, gamma) in fixtures {
        let d = GridSet::from_indices(n, &idx);
        let w = porosity_witness(&mu, &d, n, l, tau, gamma).unwrap();
        let direct: f64 = idx.len() as f64 * 2f64.powi(-(n as i32));
        assert!((w.mu_d - direct).abs() < 1e-12, "direct summation mismatch");
        assert!(w.mu_d <= w.bound + 1e-12, "bound violated");
    }
    budget.done(
        "1000 sumset/energy oracle matches; 200 regularizations verified; porosity cross-checked",
    );
}

#[test]
fn criterion_8_entropy_increase_experiment() {
    let budget = Budget::new("criterion 8", 120.0);
    // positive preset at n = 12: union exponent ≥ 1.5
    let n = 12u32;
    let eta = grid_uniform(n);
    let a = GridSet::from_indices(n, &(0..(1u64 << n)).collect::<Vec<_>>());
    let b = GridSet::from_indices(n, &(0..(1u64 << (n / 2))).collect::<Vec<_>>());
    let rep =
        entropy_increase_experiment(&eta, &a, &b, &BAssignment::Uniform(&b), 0.25, 2, 0.1).unwrap();
    assert!(rep.hypotheses.eta_mass_ok && rep.hypotheses.spreading_ok);
    assert!(rep.hypotheses.b_small_ok && rep.hypotheses.ba_large_ok);
    assert!(rep.verdict);
    assert!(
        rep.growth.exponent >= 1.5,
        "exponent {}",
        rep.growth.exponent
    );

    // failed-hypothesis preset: no growth, correct flags
    let eta = TreeMeasure::dirac(&[0.25], n);
    let a1 = GridSet::from_indices(n, &[1u64 << (n - 2)]);
    let fail = entropy_increase_experiment(&eta, &a1, &b, &BAssignment::Uniform(&b), 0.25, 2, 0.1)
        .unwrap();
    assert!(!fail.hypotheses.spreading_ok, "spreading flag must fail");
    assert!(fail.hypotheses.eta_mass_ok, "η(A) = 1 still holds");
    assert_eq!(fail.growth.union_card, fail.growth.b_card, "union = |B|");
    assert!(!fail.verdict);

    // adversarial n = 8 search reproduces its frozen fixture byte-exactly
    let res = adversarial_min_union(8, 0.25, 2, 0.1).unwrap();
    let mut got = serde_json::to_string_pretty(&res).unwrap();
    got.push('\n');
    let frozen = include_str!("fixtures/adversarial_n8.json");
    assert_eq!(got, frozen, "adversarial fixture drifted");
    budget.done(&format!(
        "positive exponent {:.3}; failed flags correct; adversarial fixture byte-exact \
         (exponent {:.4})",
        rep.growth.exponent, res.report.growth.exponent
    ));
}

#[test]
fn criterion_9_spreading_checker() {
    let budget = Budget::new("criterion 9", 10.0);
    // Lebesgue with l = 2 spreads at every ε
    let mu = TreeMeasure::uniform(1, 12);
    for eps in [0.01, 0.05, 0.2, 0.5] {
        let rep = spreading_check(&mu, 10, 2, eps, &[0.0]).unwrap();
        assert!(rep.spreading, "Lebesgue must spread at eps={eps}");
    }
    // Dirac never spreads
    let dirac = TreeMeasure::dirac(&[0.3], 12);
    let rep =
        spreading_check(&dirac, 8, 2, 0.2, &fraclab::scenery::default_translations()).unwrap();
    assert!(!rep.spreading, "point mass must not spread");
    // base-4 digit measure: bad fraction exactly 1/2 at l = 3, t = 0, n = 16
    let digits = TreeMeasure::base4_digits03(19);
    let rep = spreading_check(&digits, 16, 3, 0.05, &[0.0]).unwrap();
    assert_eq!(
        rep.candidates[0].mean_bad_fraction, 0.5,
        "bad fraction must be exactly 1/2"
    );
    budget.done("Lebesgue spreads, Dirac does not, digit measure bad fraction exactly 1/2");
}

/// Sanity net for the fixtures used above: every constructed measure is a
/// valid tree.
#[test]
fn acceptance_fixtures_are_valid_trees() {
    for mu in [
        TreeMeasure::uniform(1, 10),
        TreeMeasure::bernoulli(0.3, 10),
        TreeMeasure::base4_digits03(13),
        grid_uniform(10),
        random_tree(2, 6, 3),
    ] {
        mu.validate().unwrap();
    }
    // the four-corner tree and a projected tree validate too
    let ifs = four_corner_ifs();
    fraclab::planar::build_planar_tree(&ifs, 8, 4)
        .unwrap()
        .validate()
        .unwrap();
    let proj = project_ifs(&ifs, Direction::new(0.3)).unwrap();
    build_tree_measure(&proj, 10, 4)
        .unwrap()
        .tree
        .validate()
        .unwrap();
    let _ = cell_of_point(&[0.5], 4);
    let _ = DyadicCell::new(1, 3, [2, 0]);
}
