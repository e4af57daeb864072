use rayon::prelude::*;
use ro_ac0::fourier::mainbound_p;
use ro_ac0::prg::MC_BLOCK;
use ro_ac0::shrinkage::{
    build_sandwich, count_nonconstant, shrink_trial, CollapseEstimate, CollapseReport,
    NodeConditionReport, PruneStats, ShrinkConfig, TrialSizes,
};
use ro_ac0::{Circuit, PRegularSampler, ShrinkReport};
use serde::Serialize;

use super::check_positive;
use crate::args::ShrinkArgs;
use crate::corpus::{load, Entry};
use crate::report::{Check, Sink};
use crate::CliError;

#[derive(Serialize)]
struct SandwichSummary {
    lower: String,
    upper: String,
    gap: f64,
    gap_exact: String,
    gap_bound: f64,
    c_gap: f64,
    stats: PruneStats,
    node_conditions: NodeConditionReport,
    /// The first input breaking `F_l <= F <= F_u`, if any.
    ordering_violation: Option<String>,
    size_within_source: bool,
}

#[derive(Serialize)]
struct Record {
    circuit: String,
    sandwich: SandwichSummary,
    report: ShrinkReport,
}

#[derive(Serialize)]
struct TrialRow<'a> {
    circuit: &'a str,
    trial: u64,
    lower_leaves: usize,
    lower_fanin: usize,
    lower_constant: bool,
    upper_leaves: usize,
    upper_fanin: usize,
    upper_constant: bool,
}

#[derive(Serialize)]
struct CollapseRecord {
    circuit: String,
    #[serde(flatten)]
    report: CollapseReport,
}

#[derive(Serialize)]
struct CollapseRow<'a> {
    circuit: &'a str,
    n: usize,
    depth: usize,
    p: f64,
    eps: f64,
    trials: u64,
    estimate: f64,
    se: f64,
    lemma_rhs: f64,
    exact: f64,
    within_bound: bool,
    exact_in_ci: bool,
}

/// `1/(4 (log₂ n)^{D-1})`, capped at 1.
fn default_p(c: &Circuit) -> f64 {
    let log = (c.n() as f64).log2().max(1.0);
    (0.25 / log.powi(c.depth().max(1) as i32 - 1)).min(1.0)
}

pub(super) fn run(args: &ShrinkArgs, seed: u64, sink: &mut Sink) -> Result<Vec<Check>, CliError> {
    if let Some(p) = args.p {
        if !(0.0..=1.0).contains(&p) {
            return Err(CliError::Usage(format!("--p must lie in [0, 1], got {p}")));
        }
    }
    if let Some(eps) = args.eps {
        check_positive("eps", eps)?;
    }
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be positive".into()));
    }
    let entries = load(&args.input)?;
    if let Some(e) = entries.iter().find(|e| e.circuit.n() == 0) {
        return Err(CliError::Usage(format!(
            "{}: circuit has no inputs",
            e.name
        )));
    }
    if args.collapse {
        collapse(args, seed, &entries, sink)
    } else {
        sandwich(args, seed, &entries, sink)
    }
}

fn sandwich(
    args: &ShrinkArgs,
    seed: u64,
    entries: &[Entry],
    sink: &mut Sink,
) -> Result<Vec<Check>, CliError> {
    if !args.threshold_scale.is_finite() || args.threshold_scale < 0.0 {
        return Err(CliError::Usage(format!(
            "--threshold-scale must be nonnegative, got {}",
            args.threshold_scale
        )));
    }
    let mut records = Vec::with_capacity(entries.len());
    let mut trials = Vec::with_capacity(entries.len());
    // Circuits run one after another; the trials of each run in parallel.
    for (i, e) in entries.iter().enumerate() {
        let c = &e.circuit;
        let n = c.n();
        let eps = args.eps.unwrap_or((1.0 / n as f64).min(0.25));
        let master = seed.wrapping_add(i as u64);
        let pair = build_sandwich(c, eps)?;
        let ordering_violation = pair
            .check_ordering(c, args.ordering_samples, master)
            .err()
            .map(|e| e.to_string());
        let mut config = ShrinkConfig::new(
            args.p.unwrap_or_else(|| default_p(c)),
            eps,
            args.trials,
            master,
        );
        config.threshold_scale = args.threshold_scale;
        let sampler = PRegularSampler::new(n, config.p, master)?;
        let sizes = (0..args.trials)
            .into_par_iter()
            .map(|t| shrink_trial(&pair, &sampler, t))
            .collect::<Result<Vec<TrialSizes>, _>>()?;
        let mut report = ShrinkReport::from_trials(c, &pair, config, sizes);
        trials.push(std::mem::take(&mut report.sizes));
        records.push(Record {
            circuit: e.name.clone(),
            sandwich: SandwichSummary {
                lower: pair.lower.render(),
                upper: pair.upper.render(),
                gap: pair.gap_f64(),
                gap_exact: pair.gap.to_string(),
                gap_bound: pair.gap_bound(),
                c_gap: pair.c_gap(),
                stats: pair.stats,
                node_conditions: pair.node_conditions(),
                ordering_violation,
                size_within_source: pair.size_within_source(),
            },
            report,
        });
    }

    let mut ordering = Check::new("sandwich_ordering");
    let mut nodes = Check::new("node_conditions");
    let mut gap = Check::new("gap_bound");
    let mut size = Check::new("sandwich_size");
    let mut threshold = Check::new("shrink_threshold");
    for r in &records {
        let s = &r.sandwich;
        ordering.record(&r.circuit, s.ordering_violation.is_none());
        nodes.record(&r.circuit, s.node_conditions.pass());
        gap.record(&r.circuit, s.gap <= s.gap_bound);
        size.record(&r.circuit, s.size_within_source);
        threshold.record(&r.circuit, r.report.within_threshold);
    }
    let rows: Vec<TrialRow> = records
        .iter()
        .zip(&trials)
        .flat_map(|(r, sizes)| {
            sizes.iter().map(|t| TrialRow {
                circuit: &r.circuit,
                trial: t.trial,
                lower_leaves: t.lower_leaves,
                lower_fanin: t.lower_fanin,
                lower_constant: t.lower_constant,
                upper_leaves: t.upper_leaves,
                upper_fanin: t.upper_fanin,
                upper_constant: t.upper_constant,
            })
        })
        .collect();
    sink.json("shrink.json", &records)?;
    sink.csv("shrink_trials.csv", &rows)?;
    Ok(vec![ordering, nodes, gap, size, threshold])
}

fn collapse(
    args: &ShrinkArgs,
    seed: u64,
    entries: &[Entry],
    sink: &mut Sink,
) -> Result<Vec<Check>, CliError> {
    let mut records = Vec::with_capacity(entries.len());
    for (i, e) in entries.iter().enumerate() {
        let c = &e.circuit;
        let n = c.n();
        let eps = args.eps.unwrap_or(0.5 / n as f64);
        let p = args
            .p
            .unwrap_or_else(|| mainbound_p(n, eps, c.depth().max(1)));
        let master = seed.wrapping_add(i as u64);
        // Reject bad (p, eps) before running the trials.
        CollapseReport::new(c, eps, CollapseEstimate::from_count(p, master, 0, 0))?;
        let sampler = PRegularSampler::new(n, p, master)?;
        let blocks = args.trials.div_ceil(MC_BLOCK);
        let hits = (0..blocks)
            .into_par_iter()
            .map(|b| {
                let lo = b * MC_BLOCK;
                count_nonconstant(c, &sampler, lo..(lo + MC_BLOCK).min(args.trials))
            })
            .collect::<Result<Vec<u64>, _>>()?
            .into_iter()
            .sum();
        let mc = CollapseEstimate::from_count(p, master, args.trials, hits);
        records.push(CollapseRecord {
            circuit: e.name.clone(),
            report: CollapseReport::new(c, eps, mc)?,
        });
    }
    let mut bound = Check::new("collapse_bound");
    let mut exact = Check::new("collapse_exact");
    for r in &records {
        bound.record(&r.circuit, r.report.within_bound);
        exact.record(
            &r.circuit,
            r.report.exact_in_ci && r.report.identity_crosscheck != Some(false),
        );
    }
    let rows: Vec<CollapseRow> = records
        .iter()
        .map(|r| CollapseRow {
            circuit: &r.circuit,
            n: r.report.n,
            depth: r.report.depth,
            p: r.report.mc.p,
            eps: r.report.eps,
            trials: r.report.mc.trials,
            estimate: r.report.mc.estimate,
            se: r.report.mc.se,
            lemma_rhs: r.report.lemma_rhs,
            exact: r.report.exact,
            within_bound: r.report.within_bound,
            exact_in_ci: r.report.exact_in_ci,
        })
        .collect();
    sink.json("collapse.json", &records)?;
    sink.csv("collapse.csv", &rows)?;
    Ok(vec![bound, exact])
}
