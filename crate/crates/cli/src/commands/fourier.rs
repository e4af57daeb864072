use ro_ac0::fourier::{
    check_growth_corollary, check_lp_sandwich, check_mainbound, level_profile_recursive,
    mainbound_p, wht_bruteforce, LpSandwichReport, CROSSCHECK_MAX_N,
};
use ro_ac0::{BoundReport, Rational};
use serde::Serialize;

use super::{check_positive, default_eps, par_map};
use crate::args::FourierArgs;
use crate::corpus::load;
use crate::report::{Check, Sink};
use crate::CliError;

#[derive(Serialize)]
struct Bounds {
    mainbound: Option<BoundReport>,
    sandwich: Option<LpSandwichReport>,
    corollary_g: Option<f64>,
}

#[derive(Serialize)]
struct Record {
    circuit: String,
    n: usize,
    #[serde(rename = "D")]
    depth: usize,
    levels: Vec<f64>,
    signed: Vec<f64>,
    bounds: Bounds,
    /// Exact agreement of the recursion with the transform, small `n` only.
    oracle: Option<bool>,
}

#[derive(Serialize)]
struct Row<'a> {
    circuit: &'a str,
    n: usize,
    depth: usize,
    mean: f64,
    l1: f64,
    mainbound_lhs: Option<f64>,
    mainbound_rhs: Option<f64>,
    mainbound_pass: Option<bool>,
    sandwich_pass: Option<bool>,
    corollary_g: Option<f64>,
    oracle: Option<bool>,
}

pub(super) fn run(args: &FourierArgs, sink: &mut Sink) -> Result<Vec<Check>, CliError> {
    if let Some(eps) = args.eps {
        check_positive("eps", eps)?;
    }
    let entries = load(&args.input)?;
    let records = par_map(&entries, |_, e| {
        let c = &e.circuit;
        let n = c.n();
        let lp = level_profile_recursive::<f64>(c)?;
        let (mainbound, sandwich) = if n == 0 {
            (None, None)
        } else {
            let eps = args.eps.unwrap_or_else(|| default_eps(n));
            let p = mainbound_p(n, eps, c.depth().max(1));
            (
                Some(check_mainbound(c, eps)?),
                Some(check_lp_sandwich(&lp, &p)?),
            )
        };
        let corollary_g = if n >= 2 {
            Some(check_growth_corollary(c)?.g)
        } else {
            None
        };
        let oracle = if n <= CROSSCHECK_MAX_N {
            let exact = level_profile_recursive::<Rational>(c)?;
            let table = wht_bruteforce(c)?;
            Some(table.parseval_holds() && table.level_profile() == exact)
        } else {
            None
        };
        Ok(Record {
            circuit: e.name.clone(),
            n,
            depth: c.depth(),
            levels: lp.abs_mass,
            signed: lp.signed_sum,
            bounds: Bounds {
                mainbound,
                sandwich,
                corollary_g,
            },
            oracle,
        })
    })?;
    let mut main = Check::new("mainbound");
    let mut sand = Check::new("lp_sandwich");
    let mut oracle = Check::new("oracle");
    for r in &records {
        if let Some(b) = &r.bounds.mainbound {
            main.record(&r.circuit, b.pass);
        }
        if let Some(s) = &r.bounds.sandwich {
            sand.record(&r.circuit, s.pass());
        }
        if let Some(o) = r.oracle {
            oracle.record(&r.circuit, o);
        }
    }
    let rows: Vec<Row> = records
        .iter()
        .map(|r| Row {
            circuit: &r.circuit,
            n: r.n,
            depth: r.depth,
            mean: r.signed[0],
            l1: r.levels.iter().skip(1).sum(),
            mainbound_lhs: r.bounds.mainbound.as_ref().map(|b| b.lhs),
            mainbound_rhs: r.bounds.mainbound.as_ref().map(|b| b.rhs),
            mainbound_pass: r.bounds.mainbound.as_ref().map(|b| b.pass),
            sandwich_pass: r.bounds.sandwich.as_ref().map(LpSandwichReport::pass),
            corollary_g: r.bounds.corollary_g,
            oracle: r.oracle,
        })
        .collect();
    sink.json("fourier.json", &records)?;
    sink.csv("fourier.csv", &rows)?;
    Ok(vec![main, sand, oracle])
}
