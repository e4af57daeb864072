use rayon::prelude::*;
use ro_ac0::prg::{
    mc_block_accepts, mc_blocks, min_ell, OutputDistribution, RestrictionConfig, RoundLayout,
    UniformExpander, EXHAUSTIVE_SEED_CAP,
};
use ro_ac0::{Circuit, Expander, FoolingReport, RestrictionPrg, SmallBias};
use serde::Serialize;

use super::{check_positive, default_eps, par_map};
use crate::args::{LayoutArg, PrgArgs, PrgMode};
use crate::corpus::load;
use crate::report::{Check, Sink};
use crate::CliError;

#[derive(Serialize)]
struct Record {
    circuit: String,
    #[serde(rename = "D")]
    depth: usize,
    restriction: Option<RestrictionConfig>,
    #[serde(flatten)]
    report: FoolingReport,
}

#[derive(Serialize)]
struct Row<'a> {
    circuit: &'a str,
    n: usize,
    #[serde(rename = "D")]
    depth: usize,
    seed_bits: usize,
    error: f64,
    ci_lo: Option<f64>,
    ci_hi: Option<f64>,
}

/// `⌈log₂(n/eps)⌉`, at least enough for `outputs` positions.
fn default_ell(n: usize, eps: f64, outputs: usize) -> u32 {
    let want = (n as f64 / eps).log2().ceil();
    (want.max(0.0) as u32).clamp(min_ell(outputs), 64)
}

fn restriction_config(args: &PrgArgs, n: usize, eps: f64) -> Result<RestrictionConfig, CliError> {
    let mut cfg = RestrictionConfig::with_defaults(n, args.a, eps)?;
    let width = (args.a as usize + 1) * n;
    let ell = args.ell.unwrap_or_else(|| default_ell(n, eps, n));
    cfg.layout = match args.layout {
        LayoutArg::Independent => RoundLayout::Independent {
            ell_select: ell,
            ell_assign: ell,
        },
        LayoutArg::Joint => RoundLayout::Joint {
            ell_round: args.ell.unwrap_or_else(|| default_ell(n, eps, width)),
        },
    };
    cfg.ell_final = args.ell_final.unwrap_or(ell);
    if let Some(r) = args.rounds {
        cfg.rounds = r;
    }
    Ok(cfg)
}

fn measure(
    c: &Circuit,
    gen: &dyn Expander,
    args: &PrgArgs,
    master: u64,
) -> Result<FoolingReport, CliError> {
    if args.exhaustive {
        let dist = OutputDistribution::exhaustive(gen, EXHAUSTIVE_SEED_CAP)?;
        Ok(FoolingReport::from_distribution(c, gen, &dist)?)
    } else {
        let accepted = (0..mc_blocks(args.trials))
            .into_par_iter()
            .map(|b| mc_block_accepts(c, gen, master, b, args.trials))
            .sum();
        Ok(FoolingReport::from_counts(c, gen, accepted, args.trials))
    }
}

pub(super) fn run(args: &PrgArgs, seed: u64, sink: &mut Sink) -> Result<Vec<Check>, CliError> {
    if let Some(eps) = args.eps {
        check_positive("eps", eps)?;
        if eps >= 1.0 {
            return Err(CliError::Usage(format!("--eps must be below 1, got {eps}")));
        }
    }
    if let Some(m) = args.max_error {
        check_positive("max-error", m)?;
    }
    if !args.exhaustive && args.trials == 0 {
        return Err(CliError::Usage("--trials must be positive".into()));
    }
    let entries = load(&args.input)?;
    if let Some(e) = entries.iter().find(|e| e.circuit.n() == 0) {
        return Err(CliError::Usage(format!(
            "{}: circuit has no inputs",
            e.name
        )));
    }
    let records = par_map(&entries, |i, e| {
        let c = &e.circuit;
        let n = c.n();
        let eps = args.eps.unwrap_or_else(|| default_eps(n).min(0.5));
        let master = seed.wrapping_add(i as u64);
        let (report, restriction) = match args.mode {
            PrgMode::Smallbias => {
                let ell = args.ell.unwrap_or_else(|| default_ell(n, eps, n));
                (measure(c, &SmallBias::new(ell, n)?, args, master)?, None)
            }
            PrgMode::Uniform => (measure(c, &UniformExpander::new(n), args, master)?, None),
            PrgMode::Restriction => {
                let cfg = restriction_config(args, n, eps)?;
                let gen = RestrictionPrg::new(cfg)?;
                (measure(c, &gen, args, master)?, Some(cfg))
            }
        };
        Ok(Record {
            circuit: e.name.clone(),
            depth: c.depth(),
            restriction,
            report,
        })
    })?;

    let mut checks = Vec::new();
    if let Some(max) = args.max_error {
        let mut check = Check::new("max_error");
        for r in &records {
            check.record(&r.circuit, r.report.abs_error <= max);
        }
        checks.push(check);
    }
    if args.mode == PrgMode::Uniform && args.exhaustive {
        let mut check = Check::new("uniform_exact");
        for r in &records {
            check.record(&r.circuit, r.report.abs_error_exact.as_deref() == Some("0"));
        }
        checks.push(check);
    }
    let rows: Vec<Row> = records
        .iter()
        .map(|r| Row {
            circuit: &r.circuit,
            n: r.report.n,
            depth: r.depth,
            seed_bits: r.report.seed_bits,
            error: r.report.abs_error,
            ci_lo: r.report.ci95.map(|c| c[0]),
            ci_hi: r.report.ci95.map(|c| c[1]),
        })
        .collect();
    sink.json("prg.json", &records)?;
    sink.csv("prg.csv", &rows)?;
    Ok(checks)
}
