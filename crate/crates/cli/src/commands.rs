//! Subcommand implementations: flag structs double as JSON config schemas.

use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;

use fraclab::additive::{
    adversarial_min_union, entropy_increase_experiment, grid_uniform, porosity_witness,
    regularize as regularize_tree, BAssignment, GridSet,
};
use fraclab::dyadic::TreeMeasure;
use fraclab::exact::{rat, QuadExt};
use fraclab::ifs::{
    exact_overlap_search, parse_ifs_file, transversality_audit, ExactIfs, IfsSpec, PairSampling,
    ParametricFamily,
};
use fraclab::planar::{
    assouad_estimate, attractor_cells, build_tree_measure_cells, coincidence_direction,
    direction_scan, direction_scan_csv, four_corner_ifs, project_ifs, Direction,
};
use fraclab::scan::{dip_detector, entropy_profile_with_budget, refine_dip, ExactCandidate};
use fraclab::scenery::{
    sample_point, scenery_orbit, spreading_check, uniform_entropy_statistic_seeded, SceneryState,
};

use crate::output::{csv_header, json_document, RunContext};
use crate::presets;

type CmdResult = Result<(), Box<dyn std::error::Error>>;

// ---------------------------------------------------------------- profiles

#[derive(Args, Serialize, Deserialize)]
pub struct ScanBernoulliArgs {
    /// λ grid as a:b:step
    #[arg(long, default_value = "0.50:0.65:0.005")]
    pub lambda: String,
    #[arg(long, default_value_t = 14)]
    pub depth: u32,
    #[arg(long, default_value_t = 2)]
    pub guard: u32,
    /// dip threshold on min(1, sd) − H/n
    #[arg(long, default_value_t = 0.02)]
    pub threshold: f64,
    /// depth of the exact-overlap witness search at matched candidates
    #[arg(long, default_value_t = 3)]
    pub witness_depth: u32,
    /// bisect each flagged dip down to the grid's floating resolution
    #[arg(long, default_value_t = false)]
    pub refine: bool,
    #[arg(long, default_value_t = 1 << 26)]
    pub budget: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Serialize)]
struct RefinedDip {
    t: f64,
    normalized_entropy: f64,
}

#[derive(Serialize)]
struct ScanDipsDocument<'a> {
    dips: &'a fraclab::scan::DipReport,
    refined: Vec<RefinedDip>,
}

pub fn scan_bernoulli(ctx: &RunContext, args: ScanBernoulliArgs) -> CmdResult {
    let cfg: ScanBernoulliArgs = ctx.effective(args)?;
    let hash = ctx.config_hash("scan-bernoulli", &cfg);
    let ts = presets::parse_range(&cfg.lambda)?;
    let family = ParametricFamily::bernoulli_convolution();
    let profile = entropy_profile_with_budget(&family, &ts, cfg.depth, cfg.guard, cfg.budget)?;
    let dips = dip_detector(
        &profile,
        cfg.threshold,
        &[ExactCandidate::golden_bernoulli()],
        cfg.witness_depth,
    )?;
    let step = if ts.len() > 1 {
        (ts[1] - ts[0]).abs()
    } else {
        0.001
    };
    let mut refined = Vec::new();
    if cfg.refine {
        for flag in &dips.flags {
            let (t, h) = refine_dip(&family, flag.t, step, cfg.depth, cfg.guard, step * 1e-9)?;
            refined.push(RefinedDip {
                t,
                normalized_entropy: h,
            });
        }
    }
    let csv = ctx.emit(&hash, "scan_bernoulli.csv", || {
        let mut s = csv_header(&hash, cfg.seed);
        s.push_str(&profile.to_csv(&dips));
        s.into_bytes()
    })?;
    let doc = ScanDipsDocument {
        dips: &dips,
        refined,
    };
    let json = ctx.emit(&hash, "scan_bernoulli_dips.json", || {
        json_document(&hash, cfg.seed, &doc)
    })?;
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(())
}

#[derive(Args, Serialize, Deserialize)]
pub struct EntropyProfileArgs {
    /// IFS description file (TOML, parametric)
    #[arg(long)]
    pub ifs: PathBuf,
    /// parameter grid a:b:step; defaults to the file's interval in 64 steps
    #[arg(long)]
    pub t: Option<String>,
    #[arg(long, default_value_t = 12)]
    pub depth: u32,
    #[arg(long, default_value_t = 4)]
    pub guard: u32,
    #[arg(long, default_value_t = 1 << 26)]
    pub budget: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn entropy_profile(ctx: &RunContext, args: EntropyProfileArgs) -> CmdResult {
    let cfg: EntropyProfileArgs = ctx.effective(args)?;
    let hash = ctx.config_hash("entropy-profile", &cfg);
    let spec = parse_ifs_file(&std::fs::read_to_string(&cfg.ifs)?)?;
    let (family, interval) = match spec {
        IfsSpec::Parametric { family, interval } => (family, interval),
        IfsSpec::Fixed(_) => {
            return Err("entropy-profile needs a parametric family (r_poly/s_poly)".into())
        }
    };
    let ts = match (&cfg.t, interval) {
        (Some(r), _) => presets::parse_range(r)?,
        (None, Some((a, b))) => presets::parse_range(&format!("{a}:{b}:{}", (b - a) / 64.0))?,
        (None, None) => return Err("no parameter grid: pass --t or set interval".into()),
    };
    let profile = entropy_profile_with_budget(&family, &ts, cfg.depth, cfg.guard, cfg.budget)?;
    let dips = dip_detector(&profile, 0.02, &[], 3)?;
    let csv = ctx.emit(&hash, "entropy_profile.csv", || {
        let mut s = csv_header(&hash, cfg.seed);
        s.push_str(&profile.to_csv(&dips));
        s.into_bytes()
    })?;
    println!("wrote {}", csv.display());
    Ok(())
}

// ---------------------------------------------------------- transversality

#[derive(Args, Serialize, Deserialize)]
pub struct TransversalityArgs {
    /// parametric family: "bernoulli" or a TOML description file
    #[arg(long, default_value = "bernoulli")]
    pub family: String,
    /// parameter interval a:b
    #[arg(long, default_value = "0.50:0.60")]
    pub interval: String,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.2)]
    pub c_beta: f64,
    #[arg(long, default_value_t = 8)]
    pub depth: u32,
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
    /// pair sampling: exhaustive | stratified
    #[arg(long, default_value = "exhaustive")]
    pub pairs: String,
    #[arg(long, default_value_t = 64)]
    pub per_stratum: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn transversality(ctx: &RunContext, args: TransversalityArgs) -> CmdResult {
    let cfg: TransversalityArgs = ctx.effective(args)?;
    let hash = ctx.config_hash("transversality", &cfg);
    let family = load_family(&cfg.family)?;
    let interval = parse_interval(&cfg.interval)?;
    let sampling = match cfg.pairs.as_str() {
        "exhaustive" => PairSampling::ExhaustiveFirstSplit,
        "stratified" => PairSampling::Stratified {
            per_stratum: cfg.per_stratum,
            seed: cfg.seed,
        },
        other => return Err(format!("unknown pair sampling {other}").into()),
    };
    let report = transversality_audit(
        &family, interval, cfg.beta, cfg.c_beta, cfg.depth, cfg.grid, sampling,
    )?;
    let path = ctx.emit(&hash, "transversality.json", || {
        json_document(&hash, cfg.seed, &report)
    })?;
    println!(
        "audited {} pair-parameter checks, {} violations; wrote {}",
        report.pairs_audited,
        report.violations.len(),
        path.display()
    );
    Ok(())
}

fn load_family(spec: &str) -> Result<ParametricFamily, Box<dyn std::error::Error>> {
    if spec == "bernoulli" {
        return Ok(ParametricFamily::bernoulli_convolution());
    }
    match parse_ifs_file(&std::fs::read_to_string(spec)?)? {
        IfsSpec::Parametric { family, .. } => Ok(family),
        IfsSpec::Fixed(_) => Err("family file must be parametric".into()),
    }
}

fn parse_interval(spec: &str) -> Result<(f64, f64), Box<dyn std::error::Error>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 2 {
        return Err(format!("interval must be a:b, got {spec}").into());
    }
    Ok((parts[0].parse()?, parts[1].parse()?))
}

// ---------------------------------------------------------------- overlaps

#[derive(Args, Serialize, Deserialize)]
pub struct OverlapsArgs {
    /// exact contraction: "golden" ((√5−1)/2) or a rational p/q
    #[arg(long, default_value = "golden")]
    pub lambda: String,
    /// comma-separated rational translations
    #[arg(long, default_value = "0,1")]
    pub translations: String,
    #[arg(long, default_value_t = 6)]
    pub depth: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Serialize)]
struct OverlapsReport {
    lambda: String,
    depth: u32,
    pairs: Vec<(String, String)>,
}

pub fn overlaps(ctx: &RunContext, args: OverlapsArgs) -> CmdResult {
    let cfg: OverlapsArgs = ctx.effective(args)?;
    let hash = ctx.config_hash("overlaps", &cfg);
    let (lambda, d) = parse_exact_lambda(&cfg.lambda)?;
    let translations: Result<Vec<QuadExt>, _> = cfg
        .translations
        .split(',')
        .map(|s| parse_exact_rational(s.trim(), d))
        .collect();
    let ifs = ExactIfs::homogeneous(lambda, &translations?)?;
    let pairs = exact_overlap_search(&ifs, cfg.depth)?;
    let report = OverlapsReport {
        lambda: cfg.lambda.clone(),
        depth: cfg.depth,
        pairs: pairs
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect(),
    };
    let path = ctx.emit(&hash, "overlaps.json", || {
        json_document(&hash, cfg.seed, &report)
    })?;
    println!(
        "{} overlap pair(s); wrote {}",
        report.pairs.len(),
        path.display()
    );
    Ok(())
}

fn parse_exact_lambda(spec: &str) -> Result<(QuadExt, i64), Box<dyn std::error::Error>> {
    if spec == "golden" {
        return Ok((QuadExt::new(rat(-1, 2), rat(1, 2), 5)?, 5));
    }
    let q = parse_exact_rational(spec, 5)?;
    Ok((q, 5))
}

fn parse_exact_rational(spec: &str, d: i64) -> Result<QuadExt, Box<dyn std::error::Error>> {
    let (num, den) = match spec.split_once('/') {
        Some((n, m)) => (n.trim().parse::<i64>()?, m.trim().parse::<i64>()?),
        None => (spec.trim().parse::<i64>()?, 1),
    };
    Ok(QuadExt::rational(rat(num, den), d))
}

// ------------------------------------------------------------- projections

#[derive(Args, Serialize, Deserialize)]
pub struct ProjectCantorArgs {
    /// number of directions in [0, π)
    #[arg(long, default_value_t = 256)]
    pub theta_grid: usize,
    #[arg(long, default_value_t = 12)]
    pub depth: u32,
    /// cylinder length for coincidence-direction witnesses
    #[arg(long, default_value_t = 1)]
    pub witness_depth: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Serialize)]
struct CoincidenceWitness {
    word_i: String,
    word_j: String,
    theta: f64,
    theta_exact: Option<String>,
}

pub fn project_cantor(ctx: &RunContext, args: ProjectCantorArgs) -> CmdResult {
    let cfg: ProjectCantorArgs = ctx.effective(args)?;
    let hash = ctx.config_hash("project-cantor", &cfg);
    let ifs = four_corner_ifs();
    let thetas: Vec<f64> = (0..cfg.theta_grid)
        .map(|i| std::f64::consts::PI * i as f64 / cfg.theta_grid as f64)
        .collect();
    let rows = direction_scan(&ifs, &thetas, cfg.depth)?;
    let csv = ctx.emit(&hash, "project_cantor.csv", || {
        let mut s = csv_header(&hash, cfg.seed);
        s.push_str(&direction_scan_csv(&rows));
        s.into_bytes()
    })?;

    // coincidence directions between distinct cylinder translations
    let mut cylinders: Vec<(String, [f64; 2])> = vec![(String::new(), [0.0, 0.0])];
    let mut scale = 1.0f64;
    for _ in 0..cfg.witness_depth {
        let mut next = Vec::new();
        for (word, base) in &cylinders {
            for (i, m) in ifs.maps.iter().enumerate() {
                next.push((
                    format!("{word}{i}"),
                    [base[0] + scale * m.a[0], base[1] + scale * m.a[1]],
                ));
            }
        }
        scale *= ifs.maps[0].r;
        cylinders = next;
    }
    let mut witnesses = Vec::new();
    for i in 0..cylinders.len() {
        for j in i + 1..cylinders.len() {
            let (wi, ti) = &cylinders[i];
            let (wj, tj) = &cylinders[j];
            if let Ok(dir) = coincidence_direction(*ti, *tj) {
                witnesses.push(CoincidenceWitness {
                    word_i: wi.clone(),
                    word_j: wj.clone(),
                    theta: dir.theta(),
                    theta_exact: exact_angle_label(dir.theta()),
                });
            }
        }
    }
    let json = ctx.emit(&hash, "project_cantor_witnesses.json", || {
        json_document(&hash, cfg.seed, &witnesses)
    })?;
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(())
}

fn exact_angle_label(theta: f64) -> Option<String> {
    use std::f64::consts::PI;
    let table = [
        (0.0, "0"),
        (PI / 4.0, "pi/4"),
        (PI / 2.0, "pi/2"),
        (3.0 * PI / 4.0, "3pi/4"),
    ];
    table
        .iter()
        .find(|(v, _)| (theta - v).abs() < 1e-12)
        .map(|(_, s)| s.to_string())
}

#[derive(Args, Serialize, Deserialize)]
pub struct AssouadArgs {
    /// set preset: four-corner | axis-projection | diagonal-projection
    #[arg(long, default_value = "four-corner")]
    pub set: String,
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    #[arg(long, default_value_t = 8)]
    pub m: u32,
    #[arg(long, default_value_t = 4)]
    pub guard: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn assouad(ctx: &RunContext, args: AssouadArgs) -> CmdResult {
    let cfg: AssouadArgs = ctx.effective(args)?;
    let hash = ctx.config_hash("assouad", &cfg);
    let depth = cfg.k + cfg.m;
    let ifs = four_corner_ifs();
    let cells: Vec<[i64; 2]> = match cfg.set.as_str() {
        "four-corner" => attractor_cells(&ifs, depth, cfg.guard)?,
        "axis-projection" => {
            let proj = project_ifs(&ifs, Direction::new(0.0))?;
            build_tree_measure_cells(&proj, depth, cfg.guard)?
        }
        "diagonal-projection" => {
            let proj = project_ifs(&ifs, Direction::new(std::f64::consts::FRAC_PI_4))?;
            build_tree_measure_cells(&proj, depth, cfg.guard)?
        }
        other => return Err(format!("unknown set preset {other}").into()),
    };
    let estimate = assouad_estimate(&cells, depth, cfg.k, cfg.m)?;
    let path = ctx.emit(&hash, "assouad.json", || {
        json_document(&hash, cfg.seed, &estimate)
    })?;
    println!("estimate {}; wrote {}", estimate.estimate, path.display());
    Ok(())
}

// ------------------------------------------------------------------ scenery

#[derive(Args, Serialize, Deserialize)]
pub struct SceneryArgs {
    /// measure preset, see `describe scenery`
    #[arg(long, default_value = "bernoulli:0.25")]
    pub measure: String,
    #[arg(long, default_value_t = 16)]
    pub depth: u32,
    #[arg(long, default_value_t = 200)]
    pub steps: u32,
    #[arg(long, default_value_t = 8)]
    pub l: u32,
    /// starting point; sampled from the measure when absent
    #[arg(long)]
    pub x: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn scenery(ctx: &RunContext, args: SceneryArgs) -> CmdResult {
    let cfg: SceneryArgs = ctx.effective(args)?;
    let hash = ctx.config_hash("scenery", &cfg);
    let (mu, replenishable) = presets::measure(&cfg.measure, cfg.depth)?;
    let x = match cfg.x {
        Some(x) => x,
        None => sample_point(&mu, cfg.seed)[0],
    };
    let state = if replenishable {
        SceneryState::new_fixed_point(mu, &[x])?
    } else {
        SceneryState::new(mu, &[x])?
    };
    let stats = scenery_orbit(&state, cfg.steps, cfg.l)?;
    let csv = ctx.emit(&hash, "scenery.csv", || {
        let mut s = csv_header(&hash, cfg.seed);
        s.push_str("step,cell_coords,component_entropy_over_l,running_mean\n");
        for i in 0..stats.values.len() {
            s.push_str(&format!(
                "{},{},{},{}\n",
                i + 1,
                stats.cells[i][0],
                stats.values[i],
                stats.running_mean[i]
            ));
        }
        s.into_bytes()
    })?;
    println!("mean {}; wrote {}", stats.mean(), csv.display());
    Ok(())
}

#[derive(Args, Serialize, Deserialize)]
pub struct UniformEntropyArgs {
    #[arg(long, default_value = "bernoulli:0.5")]
    pub measure: String,
    #[arg(long, default_value_t = 12)]
    pub n: u32,
    #[arg(long, default_value_t = 6)]
    pub l: u32,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Serialize)]
struct UniformEntropyReport {
    n: u32,
    l: u32,
    eps: f64,
    alpha: f64,
    statistic: f64,
}

pub fn uniform_entropy(ctx: &RunContext, args: UniformEntropyArgs) -> CmdResult {
    let cfg: UniformEntropyArgs = ctx.effective(args)?;
    let hash = ctx.config_hash("uniform-entropy", &cfg);
    let (mu, _) = presets::measure(&cfg.measure, cfg.n + cfg.l)?;
    let statistic =
        uniform_entropy_statistic_seeded(&mu, cfg.n, cfg.l, cfg.eps, cfg.alpha, cfg.seed)?;
    let report = UniformEntropyReport {
        n: cfg.n,
        l: cfg.l,
        eps: cfg.eps,
        alpha: cfg.alpha,
        statistic,
    };
    let path = ctx.emit(&hash, "uniform_entropy.json", || {
        json_document(&hash, cfg.seed, &report)
    })?;
    println!("statistic {statistic}; wrote {}", path.display());
    Ok(())
}

#[derive(Args, Serialize, Deserialize)]
pub struct SpreadingArgs {
    #[arg(long, default_value = "four-corner-fiber")]
    pub measure: String,
    #[arg(long, default_value_t = 16)]
    pub n: u32,
    #[arg(long, default_value_t = 3)]
    pub l: u32,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    /// "default" for {0} ∪ 16 golden offsets, or a comma-separated list
    #[arg(long, default_value = "default")]
    pub translations: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn spreading(ctx: &RunContext, args: SpreadingArgs) -> CmdResult {
    let cfg: SpreadingArgs = ctx.effective(args)?;
    let hash = ctx.config_hash("spreading", &cfg);
    let (mu, _) = presets::measure(&cfg.measure, cfg.n + cfg.l)?;
    let translations: Vec<f64> = if cfg.translations == "default" {
        fraclab::scenery::default_translations()
    } else {
        cfg.translations
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()?
    };
    let report = spreading_check(&mu, cfg.n, cfg.l, cfg.eps, &translations)?;
    let path = ctx.emit(&hash, "spreading.json", || {
        json_document(&hash, cfg.seed, &report)
    })?;
    println!("spreading = {}; wrote {}", report.spreading, path.display());
    Ok(())
}

// ----------------------------------------------------------------- additive

#[derive(Args, Serialize, Deserialize)]
pub struct SumsetGrowthArgs {
    #[arg(long, default_value_t = 12)]
    pub n: u32,
    #[arg(long, default_value_t = 0.25)]
    pub gamma: f64,
    #[arg(long, default_value_t = 2)]
    pub l: u32,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// positive | failed | adversarial | random
    #[arg(long, default_value = "positive")]
    pub preset: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn sumset_growth(ctx: &RunContext, args: SumsetGrowthArgs) -> CmdResult {
    let cfg: SumsetGrowthArgs = ctx.effective(args)?;
    let hash = ctx.config_hash("sumset-growth", &cfg);
    let n = cfg.n;
    let path = match cfg.preset.as_str() {
        "positive" => {
            let eta = grid_uniform(n);
            let a = GridSet::from_indices(n, &(0..(1u64 << n)).collect::<Vec<_>>());
            let b = GridSet::from_indices(n, &(0..(1u64 << (n / 2))).collect::<Vec<_>>());
            let rep = entropy_increase_experiment(
                &eta,
                &a,
                &b,
                &BAssignment::Uniform(&b),
                cfg.gamma,
                cfg.l,
                cfg.delta,
            )?;
            ctx.emit(&hash, "sumset_growth.json", || {
                json_document(&hash, cfg.seed, &rep)
            })?
        }
        "failed" => {
            let eta = TreeMeasure::dirac(&[0.25], n);
            let a = GridSet::from_indices(n, &[1u64 << (n - 2)]);
            let b = GridSet::from_indices(n, &(0..(1u64 << (n / 2))).collect::<Vec<_>>());
            let rep = entropy_increase_experiment(
                &eta,
                &a,
                &b,
                &BAssignment::Uniform(&b),
                cfg.gamma,
                cfg.l,
                cfg.delta,
            )?;
            ctx.emit(&hash, "sumset_growth.json", || {
                json_document(&hash, cfg.seed, &rep)
            })?
        }
        "adversarial" => {
            let res = adversarial_min_union(n, cfg.gamma, cfg.l, cfg.delta)?;
            ctx.emit(&hash, "sumset_growth.json", || {
                json_document(&hash, cfg.seed, &res)
            })?
        }
        "random" => {
            let eta = grid_uniform(n);
            let density = (-(cfg.gamma) * n as f64).exp2();
            let a = GridSet::from_indices(n, &(0..(1u64 << n)).collect::<Vec<_>>());
            let b = fraclab::fixtures::random_grid_set(n, density, cfg.seed);
            let rep = entropy_increase_experiment(
                &eta,
                &a,
                &b,
                &BAssignment::Uniform(&b),
                cfg.gamma,
                cfg.l,
                cfg.delta,
            )?;
            ctx.emit(&hash, "sumset_growth.json", || {
                json_document(&hash, cfg.seed, &rep)
            })?
        }
        other => return Err(format!("unknown preset {other}").into()),
    };
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Args, Serialize, Deserialize)]
pub struct RegularizeArgs {
    /// measure preset (see `describe regularize`)
    #[arg(long, default_value = "random:1")]
    pub measure: String,
    #[arg(long, default_value_t = 12)]
    pub depth: u32,
    #[arg(long, default_value_t = 3)]
    pub t: u32,
    #[arg(long, default_value_t = 4)]
    pub l: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn regularize(ctx: &RunContext, args: RegularizeArgs) -> CmdResult {
    let cfg: RegularizeArgs = ctx.effective(args)?;
    let hash = ctx.config_hash("regularize", &cfg);
    let (mu, _) = presets::measure(&cfg.measure, cfg.depth)?;
    let result = regularize_tree(&mu, cfg.t, cfg.l)?;
    let path = ctx.emit(&hash, "regularize.json", || {
        json_document(&hash, cfg.seed, &result)
    })?;
    println!(
        "retained mass {} over {} cells; wrote {}",
        result.retained_mass,
        result.selected.len(),
        path.display()
    );
    Ok(())
}

#[derive(Args, Serialize, Deserialize)]
pub struct PorosityArgs {
    #[arg(long, default_value_t = 12)]
    pub n: u32,
    #[arg(long, default_value_t = 1)]
    pub l: u32,
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,
    #[arg(long, default_value_t = 0.4)]
    pub gamma: f64,
    /// set preset: even-digits | point:<index> | left-tail:<k>
    #[arg(long, default_value = "even-digits")]
    pub set: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Serialize)]
struct PorosityReport {
    n: u32,
    l: u32,
    tau: f64,
    gamma: f64,
    blocks: u32,
    rho: f64,
    bound: f64,
    mu_d: f64,
}

pub fn porosity(ctx: &RunContext, args: PorosityArgs) -> CmdResult {
    let cfg: PorosityArgs = ctx.effective(args)?;
    let hash = ctx.config_hash("porosity", &cfg);
    let n = cfg.n;
    let d = parse_set_preset(&cfg.set, n)?;
    let mu = TreeMeasure::uniform(1, n);
    let witness = porosity_witness(&mu, &d, n, cfg.l, cfg.tau, cfg.gamma)?;
    let report = PorosityReport {
        n,
        l: cfg.l,
        tau: cfg.tau,
        gamma: cfg.gamma,
        blocks: witness.blocks,
        rho: witness.rho,
        bound: witness.bound,
        mu_d: witness.mu_d,
    };
    let path = ctx.emit(&hash, "porosity.json", || {
        json_document(&hash, cfg.seed, &report)
    })?;
    println!(
        "mu(D) = {} <= bound {}; wrote {}",
        report.mu_d,
        report.bound,
        path.display()
    );
    Ok(())
}

fn parse_set_preset(spec: &str, n: u32) -> Result<GridSet, Box<dyn std::error::Error>> {
    if let Some(i) = spec.strip_prefix("point:") {
        return Ok(GridSet::from_indices(n, &[i.parse()?]));
    }
    if let Some(k) = spec.strip_prefix("left-tail:") {
        let k: u32 = k.parse()?;
        return Ok(GridSet::from_indices(
            n,
            &(0..(1u64 << (n - k))).collect::<Vec<_>>(),
        ));
    }
    if spec == "even-digits" {
        let free = n / 2;
        let idx: Vec<u64> = (0..(1u64 << free))
            .map(|m| {
                let mut v = 0u64;
                for i in 0..free {
                    if (m >> i) & 1 == 1 {
                        v |= 1 << (2 * i);
                    }
                }
                v
            })
            .collect();
        return Ok(GridSet::from_indices(n, &idx));
    }
    Err(format!("unknown set preset {spec}; known: even-digits, point:<i>, left-tail:<k>").into())
}

// ----------------------------------------------------------------- describe

pub fn describe(name: &str) -> CmdResult {
    let known = [
        "scan-bernoulli",
        "entropy-profile",
        "transversality",
        "overlaps",
        "project-cantor",
        "assouad",
        "scenery",
        "uniform-entropy",
        "spreading",
        "sumset-growth",
        "regularize",
        "porosity",
    ];
    let schema = match name {
        "scan-bernoulli" => json!({
            "fields": {
                "lambda": {"type": "range a:b:step", "default": "0.50:0.65:0.005"},
                "depth": {"type": "u32", "default": 14},
                "guard": {"type": "u32", "default": 2},
                "threshold": {"type": "f64", "default": 0.02},
                "witness_depth": {"type": "u32", "default": 3},
                "refine": {"type": "bool", "default": false},
                "budget": {"type": "u64", "default": 67108864u64},
                "seed": {"type": "u64", "default": 0}
            },
            "outputs": ["scan_bernoulli.csv", "scan_bernoulli_dips.json"],
            "example": "fraclab scan-bernoulli --lambda 0.50:0.65:0.005 --depth 14"
        }),
        "entropy-profile" => json!({
            "fields": {
                "ifs": {"type": "path to TOML description"},
                "t": {"type": "range a:b:step", "default": "file interval / 64"},
                "depth": {"type": "u32", "default": 12},
                "guard": {"type": "u32", "default": 4},
                "budget": {"type": "u64", "default": 67108864u64},
                "seed": {"type": "u64", "default": 0}
            },
            "outputs": ["entropy_profile.csv"],
            "example": "fraclab entropy-profile --ifs family.toml --t 0.4:0.6:0.01 --depth 12"
        }),
        "transversality" => json!({
            "fields": {
                "family": {"type": "bernoulli | path", "default": "bernoulli"},
                "interval": {"type": "a:b", "default": "0.50:0.60"},
                "beta": {"type": "f64", "default": 1.0},
                "c_beta": {"type": "f64", "default": 0.2},
                "depth": {"type": "u32", "default": 8},
                "grid": {"type": "usize", "default": 101},
                "pairs": {"type": "exhaustive | stratified", "default": "exhaustive"},
                "per_stratum": {"type": "usize", "default": 64},
                "seed": {"type": "u64", "default": 0}
            },
            "outputs": ["transversality.json"],
            "example": "fraclab transversality --interval 0.50:0.60 --depth 8 --grid 101"
        }),
        "overlaps" => json!({
            "fields": {
                "lambda": {"type": "golden | p/q", "default": "golden"},
                "translations": {"type": "comma rationals", "default": "0,1"},
                "depth": {"type": "u32", "default": 6}
            },
            "outputs": ["overlaps.json"],
            "example": "fraclab overlaps --lambda golden --depth 3"
        }),
        "project-cantor" => json!({
            "fields": {
                "theta_grid": {"type": "usize", "default": 256},
                "depth": {"type": "u32", "default": 12},
                "witness_depth": {"type": "u32", "default": 1}
            },
            "outputs": ["project_cantor.csv", "project_cantor_witnesses.json"],
            "example": "fraclab project-cantor --theta-grid 256 --depth 12"
        }),
        "assouad" => json!({
            "fields": {
                "set": {"type": "four-corner | axis-projection | diagonal-projection",
                         "default": "four-corner"},
                "k": {"type": "u32", "default": 2},
                "m": {"type": "u32", "default": 8},
                "guard": {"type": "u32", "default": 4}
            },
            "outputs": ["assouad.json"],
            "example": "fraclab assouad --set axis-projection --k 2 --m 8"
        }),
        "scenery" => json!({
            "fields": {
                "measure": {"type": crate::presets::MEASURE_PRESETS, "default": "bernoulli:0.25"},
                "depth": {"type": "u32", "default": 16},
                "steps": {"type": "u32", "default": 200},
                "l": {"type": "u32", "default": 8},
                "x": {"type": "f64 (optional; sampled when absent)"},
                "seed": {"type": "u64", "default": 0}
            },
            "outputs": ["scenery.csv"],
            "example": "fraclab scenery --measure bernoulli:0.25 --steps 200 --l 8"
        }),
        "uniform-entropy" => json!({
            "fields": {
                "measure": {"type": crate::presets::MEASURE_PRESETS, "default": "bernoulli:0.5"},
                "n": {"type": "u32", "default": 12},
                "l": {"type": "u32", "default": 6},
                "eps": {"type": "f64", "default": 0.1},
                "alpha": {"type": "f64", "default": 1.0},
                "seed": {"type": "u64", "default": 0}
            },
            "outputs": ["uniform_entropy.json"],
            "example": "fraclab uniform-entropy --measure half-lebesgue-atom --n 12 --l 6"
        }),
        "spreading" => json!({
            "fields": {
                "measure": {"type": crate::presets::MEASURE_PRESETS, "default": "four-corner-fiber"},
                "n": {"type": "u32", "default": 16},
                "l": {"type": "u32", "default": 3},
                "eps": {"type": "f64", "default": 0.05},
                "translations": {"type": "default | comma floats", "default": "default"},
                "seed": {"type": "u64", "default": 0}
            },
            "outputs": ["spreading.json"],
            "example": "fraclab spreading --measure lebesgue --n 10 --l 2"
        }),
        "sumset-growth" => json!({
            "fields": {
                "n": {"type": "u32", "default": 12},
                "gamma": {"type": "f64", "default": 0.25},
                "l": {"type": "u32", "default": 2},
                "delta": {"type": "f64", "default": 0.1},
                "preset": {"type": "positive | failed | adversarial | random",
                            "default": "positive"},
                "seed": {"type": "u64", "default": 0}
            },
            "outputs": ["sumset_growth.json"],
            "example": "fraclab sumset-growth --n 12 --gamma 0.25 --preset positive"
        }),
        "regularize" => json!({
            "fields": {
                "measure": {"type": crate::presets::MEASURE_PRESETS, "default": "random:1"},
                "depth": {"type": "u32", "default": 12},
                "t": {"type": "u32", "default": 3},
                "l": {"type": "u32", "default": 4},
                "seed": {"type": "u64", "default": 0}
            },
            "outputs": ["regularize.json"],
            "example": "fraclab regularize --measure random:7 --depth 12 --t 3 --l 4"
        }),
        "porosity" => json!({
            "fields": {
                "n": {"type": "u32", "default": 12},
                "l": {"type": "u32", "default": 1},
                "tau": {"type": "f64", "default": 0.5},
                "gamma": {"type": "f64", "default": 0.4},
                "set": {"type": "even-digits | point:<i> | left-tail:<k>",
                         "default": "even-digits"},
                "seed": {"type": "u64", "default": 0}
            },
            "outputs": ["porosity.json"],
            "example": "fraclab porosity --n 12 --l 1 --tau 0.5 --gamma 0.4"
        }),
        other => {
            let mut msg = format!("unknown subcommand {other}; did you mean one of:");
            for k in known {
                msg.push_str(&format!("\n  {k}"));
            }
            return Err(msg.into());
        }
    };
    println!("{}", serde_json::to_string_pretty(&schema)?);
    Ok(())
}
