//! Named measure and set presets shared by the subcommands.

use fraclab::dyadic::TreeMeasure;
use fraclab::ifs::{build_tree_measure, AffineContraction, WeightedIfs};

/// Parse a measure preset. Formats:
/// `lebesgue`, `bernoulli:<p>`, `cantor3`, `four-corner-fiber`,
/// `half-lebesgue-atom`, `random:<seed>`.
pub fn measure(spec: &str, depth: u32) -> Result<(TreeMeasure, bool), String> {
    // second component: whether the measure is a 1-step magnification fixed
    // point (replenishable scenery)
    if let Some(p) = spec.strip_prefix("bernoulli:") {
        let p: f64 = p.parse().map_err(|e| format!("bad p in {spec}: {e}"))?;
        if !(0.0..=1.0).contains(&p) {
            return Err(format!("p out of range in {spec}"));
        }
        return Ok((TreeMeasure::bernoulli(p, depth), true));
    }
    if let Some(seed) = spec.strip_prefix("random:") {
        let seed: u64 = seed
            .parse()
            .map_err(|e| format!("bad seed in {spec}: {e}"))?;
        return Ok((fraclab::fixtures::random_tree(1, depth, seed), false));
    }
    match spec {
        "lebesgue" => Ok((TreeMeasure::uniform(1, depth), true)),
        "cantor3" => {
            let ifs = WeightedIfs::uniform(vec![
                AffineContraction::new(1.0 / 3.0, 0.0).expect("valid contraction"),
                AffineContraction::new(1.0 / 3.0, 2.0 / 3.0).expect("valid contraction"),
            ])
            .expect("valid system");
            let built = build_tree_measure(&ifs, depth, 6).map_err(|e| e.to_string())?;
            Ok((built.tree, false))
        }
        "four-corner-fiber" => Ok((TreeMeasure::base4_digits03(depth), false)),
        "half-lebesgue-atom" => {
            let mut leaves = std::collections::BTreeMap::new();
            let count = 1i64 << (depth - 1);
            for i in 0..count {
                leaves.insert([i, 0], 0.5 / count as f64);
            }
            let atom = fraclab::dyadic::cell_of_point(&[0.75], depth);
            *leaves.entry(atom.coords).or_insert(0.0) += 0.5;
            let mu = TreeMeasure::from_leaf_masses(1, depth, leaves).map_err(|e| e.to_string())?;
            Ok((mu, false))
        }
        other => Err(format!(
            "unknown measure preset {other}; known: lebesgue, bernoulli:<p>, cantor3, \
             four-corner-fiber, half-lebesgue-atom, random:<seed>"
        )),
    }
}

/// Measure preset names for `describe`.
pub const MEASURE_PRESETS: &str =
    "lebesgue | bernoulli:<p> | cantor3 | four-corner-fiber | half-lebesgue-atom | random:<seed>";

/// Parse `a:b:step` into a grid, inclusive of both endpoints when the step
/// divides the range. Errors when the step exceeds the interval.
pub fn parse_range(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("range must be a:b:step, got {spec}"));
    }
    let a: f64 = parts[0]
        .parse()
        .map_err(|e| format!("bad range start: {e}"))?;
    let b: f64 = parts[1]
        .parse()
        .map_err(|e| format!("bad range end: {e}"))?;
    let step: f64 = parts[2]
        .parse()
        .map_err(|e| format!("bad range step: {e}"))?;
    if !(step > 0.0) {
        return Err("range step must be positive".into());
    }
    if step > (b - a).abs() && a != b {
        return Err(format!("grid step {step} larger than interval [{a}, {b}]"));
    }
    let count = ((b - a) / step).round() as usize;
    Ok((0..=count).map(|i| a + step * i as f64).collect())
}
