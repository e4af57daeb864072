//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p ro-ac0-cli --test acceptance`.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use ro_ac0::circuit::{gen_random_read_once, gen_recursive_tribes, gen_tribes, parse};
use ro_ac0::fourier::{
    biased_gap_routes, check_mainbound, damped_mass, level_profile_recursive, wht_bruteforce,
};
use ro_ac0::prg::{
    check_sandwich_fooling, measure_bias, OutputDistribution, RestrictionConfig, RoundLayout,
    EXHAUSTIVE_SEED_CAP,
};
use ro_ac0::shrinkage::{build_sandwich, collapse_probability, shrink_experiment, ShrinkConfig};
use ro_ac0::{Circuit, FoolingReport, OrderedBp, Rational, RestrictionPrg, SmallBias};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

type Run = fn() -> Result<Outcome, String>;

/// `(circuit count, n range, depth range)` corpus used by several criteria.
fn corpus(count: usize, n_lo: usize, n_hi: usize, d_hi: usize, seed: u64) -> Vec<Circuit> {
    (0..count)
        .map(|i| {
            let n = n_lo + i % (n_hi - n_lo + 1);
            let d = 1 + i % d_hi;
            gen_random_read_once(n, d, seed + i as u64).expect("generator")
        })
        .collect()
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn c1_spectral_oracle() -> Result<Outcome, String> {
    let circuits = corpus(500, 1, 14, 4, 0);
    let results: Vec<(bool, f64)> = circuits
        .par_iter()
        .map(|c| {
            let table = wht_bruteforce(c).map_err(err)?;
            let exact = level_profile_recursive::<Rational>(c).map_err(err)?;
            let float = level_profile_recursive::<f64>(c).map_err(err)?;
            let reference = table.level_profile();
            let reference_f = table.level_profile_f64();
            let dev = float
                .abs_mass
                .iter()
                .zip(&reference_f.abs_mass)
                .chain(float.signed_sum.iter().zip(&reference_f.signed_sum))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            Ok((exact == reference && table.parseval_holds(), dev))
        })
        .collect::<Result<_, String>>()?;
    let exact_ok = results.iter().filter(|r| r.0).count();
    let worst = results.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(Outcome::new(
        exact_ok == circuits.len() && worst <= 1e-10,
        format!(
            "{exact_ok}/{} exact matches, worst float deviation {worst:.2e} (tol 1e-10)",
            circuits.len()
        ),
    ))
}

fn c2_mainbound() -> Result<Outcome, String> {
    let circuits = corpus(500, 1, 14, 4, 0);
    let reports = circuits
        .par_iter()
        .map(|c| check_mainbound(c, 1.0 / c.n() as f64).map_err(err))
        .collect::<Result<Vec<_>, String>>()?;
    let failures = reports
        .iter()
        .filter(|r| !(r.pass && r.slack >= 0.0))
        .count();
    let min_slack = reports
        .iter()
        .map(|r| r.slack)
        .fold(f64::INFINITY, f64::min);
    Ok(Outcome::new(
        failures == 0,
        format!(
            "{} circuits, {failures} failures, minimum slack {min_slack:.3e}",
            reports.len()
        ),
    ))
}

fn c3_and_closed_form() -> Result<Outcome, String> {
    let mut worst: f64 = 0.0;
    for k in 1..=30usize {
        let vars: Vec<String> = (0..k).map(|i| format!("x{i}")).collect();
        let c = parse(&format!("(and {})", vars.join(" "))).map_err(err)?;
        let lp = level_profile_recursive::<f64>(&c).map_err(err)?;
        for p in [0.1, 0.5, 1.0] {
            let got = damped_mass(&lp, &p).map_err(err)?;
            let want = (p / 2.0 + 0.5).powi(k as i32) - 0.5f64.powi(k as i32);
            worst = worst.max((got - want).abs());
        }
    }
    Ok(Outcome::new(
        worst <= 1e-12,
        format!("k = 1..30, p in {{0.1, 0.5, 1}}: worst deviation {worst:.2e} (tol 1e-12)"),
    ))
}

fn c4_triple_agreement() -> Result<Outcome, String> {
    let circuits = corpus(200, 1, 14, 4, 4000);
    let worst = circuits
        .par_iter()
        .map(|c| {
            let mut worst: f64 = 0.0;
            for p in [0.05, -0.05, 0.25, -0.25] {
                let routes = biased_gap_routes::<f64>(c, &p).map_err(err)?;
                if routes.spectral.is_none() {
                    return Err("missing spectral route".to_string());
                }
                worst = worst.max(routes.max_disagreement());
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>, String>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(Outcome::new(
        worst <= 1e-12,
        format!("200 circuits x 4 biases: worst disagreement {worst:.2e} (tol 1e-12)"),
    ))
}

fn c5_bp_conversion() -> Result<Outcome, String> {
    let circuits = corpus(300, 1, 16, 4, 5000);
    let results = circuits
        .par_iter()
        .enumerate()
        .map(|(idx, c)| {
            let bp = OrderedBp::from_circuit(c);
            let equivalent = bp.equivalent_to(c).map_err(err)?;
            let width_ok = bp.width() <= c.depth().max(1) + 1;
            let mut rng = ChaCha8Rng::seed_from_u64(idx as u64);
            let mut witnesses_ok = 0;
            for _ in 0..50 {
                let i = rng.gen_range(1..=bp.len());
                let j = rng.gen_range(i..=bp.len());
                let d1 = rng.gen_range(0..bp.width());
                let d2 = rng.gen_range(0..bp.width());
                if bp.verify_slice_witness(i, j, d1, d2).map_err(err)?.pass() {
                    witnesses_ok += 1;
                }
            }
            Ok((equivalent, width_ok, witnesses_ok))
        })
        .collect::<Result<Vec<_>, String>>()?;
    let eq = results.iter().filter(|r| r.0).count();
    let width = results.iter().filter(|r| r.1).count();
    let witnesses: usize = results.iter().map(|r| r.2).sum();
    let total = circuits.len();
    Ok(Outcome::new(
        eq == total && width == total && witnesses == 50 * total,
        format!(
            "{eq}/{total} equivalent, {width}/{total} within width D+1, \
             {witnesses}/{} slice witnesses",
            50 * total
        ),
    ))
}

fn c6_small_bias() -> Result<Outcome, String> {
    let gen = SmallBias::new(8, 16).map_err(err)?;
    let bias = measure_bias(&gen).map_err(err)?;
    let bound = Rational::new(16.into(), 256.into());
    Ok(Outcome::new(
        bias <= bound,
        format!("ell = 8, n = 16: measured bias {bias} (bound 1/16)"),
    ))
}

/// Worst exhaustive fooling error and largest seed length over `circuits`.
fn fooling_sweep(
    circuits: &[Circuit],
    cfg: impl Fn(usize) -> RestrictionConfig + Sync,
) -> Result<(f64, usize), String> {
    let results = circuits
        .par_iter()
        .map(|c| {
            let gen = RestrictionPrg::new(cfg(c.n())).map_err(err)?;
            let dist = OutputDistribution::exhaustive(&gen, EXHAUSTIVE_SEED_CAP).map_err(err)?;
            let report = FoolingReport::from_distribution(c, &gen, &dist).map_err(err)?;
            Ok((report.abs_error, report.seed_bits))
        })
        .collect::<Result<Vec<_>, String>>()?;
    let worst = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let bits = results.iter().map(|r| r.1).max().unwrap_or(0);
    Ok((worst, bits))
}

fn c7_fooling() -> Result<Outcome, String> {
    let circuits: Vec<Circuit> = (0..50)
        .map(|i| gen_random_read_once(4 + i % 9, 1 + i % 3, i as u64).expect("generator"))
        .collect();
    let (worst, bits) = fooling_sweep(&circuits, |n| RestrictionConfig {
        n,
        a: 1,
        rounds: 1,
        layout: RoundLayout::Joint { ell_round: 5 },
        ell_final: 6,
    })?;
    Ok(Outcome::new(
        worst <= 0.05 && bits <= 22,
        format!("joint-round layout, {bits} seed bits: worst error {worst:.4} (target 0.05)"),
    ))
}

fn c8_sandwich_fooling() -> Result<Outcome, String> {
    let circuits = corpus(50, 2, 12, 4, 8000);
    let results = circuits
        .par_iter()
        .map(|c| {
            let eps = (1.0 / c.n() as f64).min(0.25);
            let pair = build_sandwich(c, eps).map_err(err)?;
            let gen = SmallBias::new(8, c.n()).map_err(err)?;
            let dist = OutputDistribution::exhaustive(&gen, EXHAUSTIVE_SEED_CAP).map_err(err)?;
            let rep = check_sandwich_fooling(c, &pair.upper, &pair.lower, &dist).map_err(err)?;
            Ok(rep.bound)
        })
        .collect::<Result<Vec<_>, String>>()?;
    let ok = results.iter().filter(|b| b.pass).count();
    let min_slack = results
        .iter()
        .map(|b| b.slack)
        .fold(f64::INFINITY, f64::min);
    Ok(Outcome::new(
        ok == results.len(),
        format!(
            "{ok}/{} exact checks hold, minimum slack {min_slack:.3e}",
            results.len()
        ),
    ))
}

fn c9_collapse() -> Result<Outcome, String> {
    let circuits = corpus(50, 4, 16, 3, 9000);
    let reports = circuits
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let eps = 0.5 / c.n() as f64;
            let p = ro_ac0::fourier::mainbound_p(c.n(), eps, c.depth().max(1));
            collapse_probability(c, p, eps, 100_000, i as u64).map_err(err)
        })
        .collect::<Result<Vec<_>, String>>()?;
    let bound = reports.iter().filter(|r| r.within_bound).count();
    let exact = reports
        .iter()
        .filter(|r| r.exact_in_ci && r.identity_crosscheck != Some(false))
        .count();
    let max_est = reports.iter().map(|r| r.mc.estimate).fold(0.0, f64::max);
    Ok(Outcome::new(
        bound == reports.len() && exact == reports.len(),
        format!(
            "{bound}/{0} within bound + 3 SE, {exact}/{0} agree with the exact identity, \
             largest estimate {max_est:.2e}",
            reports.len()
        ),
    ))
}

fn c10_sandwich() -> Result<Outcome, String> {
    let circuits = corpus(150, 2, 16, 4, 10_000);
    let results = circuits
        .par_iter()
        .enumerate()
        .flat_map(|(i, c)| {
            let n = c.n() as f64;
            [1.0 / n, 1.0 / (n * n), 0.25]
                .into_par_iter()
                .map(move |eps| (i, c, eps.min(0.25)))
        })
        .map(|(_, c, eps)| {
            let pair = build_sandwich(c, eps).map_err(err)?;
            let ordering = pair.check_pointwise(c).is_ok();
            let nodes = pair.node_conditions().pass();
            Ok((ordering, nodes, pair.within_gap_bound(), pair.c_gap()))
        })
        .collect::<Result<Vec<_>, String>>()?;
    let total = results.len();
    let ord = results.iter().filter(|r| r.0).count();
    let nodes = results.iter().filter(|r| r.1).count();
    let gap = results.iter().filter(|r| r.2).count();
    let c_gap = results.iter().map(|r| r.3).fold(0.0, f64::max);
    Ok(Outcome::new(
        ord == total && nodes == total && gap == total,
        format!(
            "{total} (circuit, eps) pairs: ordering {ord}, node conditions {nodes}, \
             gap bound {gap}; largest gap/(n sqrt eps) {c_gap:.3}"
        ),
    ))
}

fn c11_shrinkage() -> Result<Outcome, String> {
    let n = 1024usize;
    let mut circuits = vec![
        (
            "random-d2-a".to_string(),
            gen_random_read_once(n, 2, 1).map_err(err)?,
        ),
        (
            "random-d2-b".to_string(),
            gen_random_read_once(n, 2, 2).map_err(err)?,
        ),
        ("tribes-128x8".to_string(), gen_tribes(128, 8).map_err(err)?),
        (
            "random-d3-a".to_string(),
            gen_random_read_once(n, 3, 1).map_err(err)?,
        ),
        (
            "random-d3-b".to_string(),
            gen_random_read_once(n, 3, 2).map_err(err)?,
        ),
        (
            "rtribes-8x16x8".to_string(),
            gen_recursive_tribes(3, &[8, 16, 8]).map_err(err)?,
        ),
    ];
    circuits.retain(|(_, c)| c.depth() == 2 || c.depth() == 3);
    let log = (n as f64).log2();
    let reports = circuits
        .par_iter()
        .enumerate()
        .map(|(i, (name, c))| {
            let p = 1.0 / (4.0 * log.powi(c.depth() as i32 - 1));
            let config = ShrinkConfig::new(p, 1.0 / n as f64, 10_000, 11 + i as u64);
            let r = shrink_experiment(c, &config).map_err(err)?;
            Ok((name.clone(), r))
        })
        .collect::<Result<Vec<_>, String>>()?;
    let ok = reports.iter().filter(|(_, r)| r.within_threshold).count();
    let detail: Vec<String> = reports
        .iter()
        .map(|(name, r)| {
            format!(
                "{name}: q={}/{} vs {:.0}",
                r.lower.quantile_leaves, r.upper.quantile_leaves, r.threshold
            )
        })
        .collect();
    Ok(Outcome::new(
        ok == reports.len() && reports.len() == 6,
        format!(
            "{ok}/{} within threshold ({})",
            reports.len(),
            detail.join("; ")
        ),
    ))
}

fn run_cli(out: &Path, jobs: &str, args: &[&str]) -> Result<Vec<String>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_ro-ac0"))
        .arg("--out")
        .arg(out)
        .args(["--jobs", jobs, "--seed", "2024"])
        .args(args)
        .env_remove("RO_AC0_JOBS")
        .stdout(std::process::Stdio::null())
        .stderr(std::process::Stdio::null())
        .status()
        .map_err(err)?;
    if status.code() != Some(0) {
        return Err(format!("{args:?} exited with {status}"));
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("run.json")).map_err(err)?)
            .map_err(err)?;
    Ok(manifest["files"]
        .as_array()
        .ok_or("manifest lists no files")?
        .iter()
        .filter_map(|v| v.as_str().map(String::from))
        .collect())
}

fn c12_reproducibility() -> Result<Outcome, String> {
    let runs: [&[&str]; 5] = [
        &[
            "bounds",
            "--corpus",
            "random:n=4..14,d=1..4,count=100,seed=3",
        ],
        &[
            "prg",
            "--corpus",
            "random:n=6..12,d=1..3,count=8,seed=4",
            "--mode",
            "restriction",
            "--trials",
            "20000",
        ],
        &[
            "shrink",
            "--corpus",
            "random:n=200,d=2..3,count=3,seed=5",
            "--trials",
            "3000",
        ],
        &[
            "shrink",
            "--collapse",
            "--corpus",
            "random:n=6..16,d=1..3,count=6,seed=6",
            "--trials",
            "20000",
        ],
        &[
            "bp",
            "check-equivalence",
            "--corpus",
            "random:n=40,d=3,count=4,seed=7",
            "--samples",
            "2000",
        ],
    ];
    let dir = tempfile::tempdir().map_err(err)?;
    let mut compared = 0;
    for (k, args) in runs.iter().enumerate() {
        let a = dir.path().join(format!("{k}-j1"));
        let b = dir.path().join(format!("{k}-j4"));
        let files = run_cli(&a, "1", args)?;
        let files_b = run_cli(&b, "4", args)?;
        if files != files_b {
            return Ok(Outcome::new(false, format!("{args:?}: file lists differ")));
        }
        for f in &files {
            if fs::read(a.join(f)).map_err(err)? != fs::read(b.join(f)).map_err(err)? {
                return Ok(Outcome::new(false, format!("{args:?}: {f} differs")));
            }
            compared += 1;
        }
    }
    Ok(Outcome::new(
        compared > 0,
        format!("{compared} data files byte-identical between --jobs 1 and --jobs 4"),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, f64, Run); 12] = [
        (
            "C1",
            "spectral oracle equivalence",
            120.0,
            c1_spectral_oracle,
        ),
        ("C2", "main bound", 60.0, c2_mainbound),
        ("C3", "AND_k closed form", 10.0, c3_and_closed_form),
        (
            "C4",
            "biased-gap triple agreement",
            60.0,
            c4_triple_agreement,
        ),
        ("C5", "BP conversion", 180.0, c5_bp_conversion),
        ("C6", "small-bias certification", 60.0, c6_small_bias),
        ("C7", "fooling at desk scale", 600.0, c7_fooling),
        (
            "C8",
            "sandwich fooling inequality",
            300.0,
            c8_sandwich_fooling,
        ),
        ("C9", "collapse probability", 300.0, c9_collapse),
        ("C10", "sandwich construction", 120.0, c10_sandwich),
        ("C11", "shrinkage trend", 600.0, c11_shrinkage),
        ("C12", "reproducibility", 120.0, c12_reproducibility),
    ];
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        let started = Instant::now();
        let outcome = run();
        let secs = started.elapsed().as_secs_f64();
        let (pass, detail) = match outcome {
            Ok(o) => (o.pass && secs <= budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {id} {name}: {detail} ({secs:.1}s, budget {budget:.0}s)");
        if !pass {
            failed += 1;
        }
    }
    println!("acceptance: {}/12 criteria pass", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
