use ro_ac0::Scalar;
use serde::Serialize;

use super::par_map;
use crate::args::InputArgs;
use crate::corpus::load;
use crate::report::{Check, Sink};
use crate::CliError;

#[derive(Serialize)]
struct Record {
    circuit: String,
    formula: String,
    n: usize,
    depth: usize,
    size: usize,
    max_fanin: usize,
    mean: String,
    mean_f64: f64,
    read_once: bool,
}

pub(super) fn run(input: &InputArgs, sink: &mut Sink) -> Result<Vec<Check>, CliError> {
    let entries = load(input)?;
    let records = par_map(&entries, |_, e| {
        let c = &e.circuit;
        let mean = c.mean();
        Ok(Record {
            circuit: e.name.clone(),
            formula: c.render(),
            n: c.n(),
            depth: c.depth(),
            size: c.leaf_count(),
            max_fanin: c.max_fanin(),
            mean_f64: mean.to_f64(),
            mean: mean.to_string(),
            read_once: c.is_read_once(),
        })
    })?;
    let mut check = Check::new("read_once");
    for r in &records {
        check.record(&r.circuit, r.read_once);
    }
    sink.json("describe.json", &records)?;
    sink.csv("describe.csv", &records)?;
    Ok(vec![check])
}
