use ro_ac0::fourier::{
    biased_gap_routes, check_growth_corollary, check_lp_sandwich, check_mainbound,
    level_profile_recursive, mainbound_p, LpSandwichReport, FLOAT_TOLERANCE,
};
use ro_ac0::BoundReport;
use serde::Serialize;

use super::{check_positive, default_eps, par_map};
use crate::args::BoundsArgs;
use crate::corpus::load;
use crate::report::{Check, Sink};
use crate::CliError;

#[derive(Serialize)]
struct GapReport {
    p: f64,
    signed: f64,
    measure: f64,
    spectral: Option<f64>,
    disagreement: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct Record {
    circuit: String,
    n: usize,
    #[serde(rename = "D")]
    depth: usize,
    eps: f64,
    mainbound: BoundReport,
    sandwich: Vec<LpSandwichReport>,
    gaps: Vec<GapReport>,
    corollary_g: Option<f64>,
}

#[derive(Serialize)]
struct Row<'a> {
    circuit: &'a str,
    n: usize,
    depth: usize,
    check: &'a str,
    p: Option<f64>,
    lhs: f64,
    rhs: f64,
    slack: f64,
    pass: bool,
}

impl<'a> Row<'a> {
    fn bound(r: &'a Record, b: &'a BoundReport) -> Self {
        Row {
            circuit: &r.circuit,
            n: r.n,
            depth: r.depth,
            check: &b.check,
            p: b.params.p,
            lhs: b.lhs,
            rhs: b.rhs,
            slack: b.slack,
            pass: b.pass,
        }
    }

    fn gap(r: &'a Record, g: &GapReport) -> Self {
        Row {
            circuit: &r.circuit,
            n: r.n,
            depth: r.depth,
            check: "gap_routes",
            p: Some(g.p),
            lhs: g.disagreement,
            rhs: g.tolerance,
            slack: g.tolerance - g.disagreement,
            pass: g.pass,
        }
    }
}

pub(super) fn run(args: &BoundsArgs, sink: &mut Sink) -> Result<Vec<Check>, CliError> {
    if let Some(eps) = args.eps {
        check_positive("eps", eps)?;
    }
    for &p in &args.p {
        if !(p.is_finite() && p != 0.0 && p.abs() <= 1.0) {
            return Err(CliError::Usage(format!(
                "--p must lie in [-1, 1] and be nonzero, got {p}"
            )));
        }
    }
    let entries = load(&args.input)?;
    if let Some(e) = entries.iter().find(|e| e.circuit.n() == 0) {
        return Err(CliError::Usage(format!(
            "{}: circuit has no inputs",
            e.name
        )));
    }
    let records = par_map(&entries, |_, e| {
        let c = &e.circuit;
        let n = c.n();
        let eps = args.eps.unwrap_or_else(|| default_eps(n));
        let mainbound = check_mainbound(c, eps)?;
        let ps = if args.p.is_empty() {
            vec![mainbound_p(n, eps, c.depth().max(1))]
        } else {
            args.p.clone()
        };
        let lp = level_profile_recursive::<f64>(c)?;
        let mut sandwich = Vec::new();
        let mut gaps = Vec::new();
        for &p in &ps {
            // The damped mass only sees |p|.
            sandwich.push(check_lp_sandwich(&lp, &p.abs())?);
            let routes = biased_gap_routes::<f64>(c, &p)?;
            let disagreement = routes.max_disagreement();
            gaps.push(GapReport {
                p,
                signed: routes.signed,
                measure: routes.measure,
                spectral: routes.spectral,
                disagreement,
                tolerance: FLOAT_TOLERANCE,
                pass: disagreement <= FLOAT_TOLERANCE,
            });
        }
        let corollary_g = if n >= 2 {
            Some(check_growth_corollary(c)?.g)
        } else {
            None
        };
        Ok(Record {
            circuit: e.name.clone(),
            n,
            depth: c.depth(),
            eps,
            mainbound,
            sandwich,
            gaps,
            corollary_g,
        })
    })?;

    let mut main = Check::new("mainbound");
    let mut sand = Check::new("lp_sandwich");
    let mut gap = Check::new("gap_routes");
    let mut rows = Vec::new();
    for r in &records {
        main.record(&r.circuit, r.mainbound.pass);
        rows.push(Row::bound(r, &r.mainbound));
        for s in &r.sandwich {
            sand.record(&r.circuit, s.pass());
            rows.push(Row::bound(r, &s.lower));
            rows.push(Row::bound(r, &s.upper));
        }
        for g in &r.gaps {
            gap.record(&r.circuit, g.pass);
            rows.push(Row::gap(r, g));
        }
    }
    sink.json("bounds.json", &records)?;
    sink.csv("bounds.csv", &rows)?;
    Ok(vec![main, sand, gap])
}
