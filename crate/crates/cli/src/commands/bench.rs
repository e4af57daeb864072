use std::time::Instant;

use rayon::prelude::*;
use ro_ac0::circuit::gen_random_read_once;
use ro_ac0::fourier::{level_profile_truncated, wht_bruteforce_capped};
use ro_ac0::prg::MC_BLOCK;
use ro_ac0::shrinkage::count_nonconstant;
use ro_ac0::PRegularSampler;
use serde::Serialize;

use crate::args::BenchArgs;
use crate::report::{Check, Sink};
use crate::CliError;

/// Soft targets: WHT at n = 20 and the recursion on 10^5 leaves.
const WHT_TARGET_S: f64 = 5.0;
const RECURSION_TARGET_S: f64 = 1.0;
/// Levels kept by the timed recursion.
const RECURSION_LEVELS: usize = 32;
const BENCH_DEPTH: usize = 3;
const MC_N: usize = 1024;

#[derive(Serialize)]
struct Row {
    task: String,
    n: usize,
    /// Deterministic output of the task, so runs can be compared.
    result: f64,
    seconds: f64,
    throughput: f64,
    unit: String,
    target_s: Option<f64>,
    within_target: Option<bool>,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed().as_secs_f64())
}

pub(super) fn run(args: &BenchArgs, seed: u64, sink: &mut Sink) -> Result<Vec<Check>, CliError> {
    if !(1..=ro_ac0::fourier::DEFAULT_WHT_CAP).contains(&args.max_n) {
        return Err(CliError::Usage(format!(
            "--max-n must lie in 1..={}",
            ro_ac0::fourier::DEFAULT_WHT_CAP
        )));
    }
    if args.leaves < 2 || args.trials == 0 {
        return Err(CliError::Usage(
            "--leaves must be at least 2 and --trials positive".into(),
        ));
    }
    let mut rows = Vec::new();

    let mut sizes: Vec<usize> = (4..args.max_n).step_by(4).collect();
    sizes.push(args.max_n);
    for n in sizes {
        let depth = if n == 1 { 0 } else { BENCH_DEPTH.min(n - 1) };
        let c = gen_random_read_once(n, depth, seed)?;
        let (table, s) = timed(|| wht_bruteforce_capped(&c, ro_ac0::fourier::DEFAULT_WHT_CAP));
        let table = table?;
        let target = (n == 20).then_some(WHT_TARGET_S);
        rows.push(Row {
            task: "wht".into(),
            n,
            result: table.coefficient_f64(0),
            seconds: s,
            throughput: (n as f64).exp2() / s.max(1e-12),
            unit: "coefficients/s".into(),
            target_s: target,
            within_target: target.map(|t| s <= t),
        });
    }

    let c = gen_random_read_once(args.leaves, BENCH_DEPTH, seed)?;
    let (lp, s) = timed(|| level_profile_truncated::<f64>(&c, RECURSION_LEVELS));
    let lp = lp?;
    let target = (args.leaves >= 100_000).then_some(RECURSION_TARGET_S);
    rows.push(Row {
        task: format!("recursion_levels_{RECURSION_LEVELS}"),
        n: args.leaves,
        result: lp.abs_mass.iter().take(RECURSION_LEVELS + 1).sum(),
        seconds: s,
        throughput: args.leaves as f64 / s.max(1e-12),
        unit: "leaves/s".into(),
        target_s: target,
        within_target: target.map(|t| s <= t),
    });

    let c = gen_random_read_once(MC_N, BENCH_DEPTH, seed)?;
    let p = 1.0 / (MC_N as f64).log2().powi(BENCH_DEPTH as i32 - 1);
    let sampler = PRegularSampler::new(MC_N, p, seed)?;
    let blocks = args.trials.div_ceil(MC_BLOCK);
    let (hits, s) = timed(|| {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let lo = b * MC_BLOCK;
                count_nonconstant(&c, &sampler, lo..(lo + MC_BLOCK).min(args.trials))
            })
            .collect::<Result<Vec<u64>, _>>()
    });
    let hits: u64 = hits?.into_iter().sum();
    rows.push(Row {
        task: "restriction_trials".into(),
        n: MC_N,
        result: hits as f64 / args.trials as f64,
        seconds: s,
        throughput: args.trials as f64 / s.max(1e-12),
        unit: "trials/s".into(),
        target_s: None,
        within_target: None,
    });

    sink.json("bench.json", &rows)?;
    sink.csv("bench.csv", &rows)?;
    Ok(Vec::new())
}
