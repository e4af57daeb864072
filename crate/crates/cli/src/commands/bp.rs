use std::fs;

use ro_ac0::bp::{BpJson, WitnessCheck, START};
use ro_ac0::shrinkage::PRegularSampler;
use ro_ac0::OrderedBp;
use serde::Serialize;

use super::par_map;
use crate::args::{BpAction, EquivalenceArgs, EvaluateArgs, InputArgs, WitnessArgs};
use crate::corpus::load;
use crate::report::{Check, Sink};
use crate::CliError;

/// Inputs up to this many variables are compared exhaustively.
const EXHAUSTIVE_MAX_N: usize = 16;

pub(super) fn run(action: &BpAction, seed: u64, sink: &mut Sink) -> Result<Vec<Check>, CliError> {
    match action {
        BpAction::Convert(a) => convert(a, sink),
        BpAction::Evaluate(a) => evaluate(a, sink),
        BpAction::CheckEquivalence(a) => equivalence(a, seed, sink),
        BpAction::SliceWitness(a) => slice_witness(a, sink),
    }
}

#[derive(Serialize)]
struct Converted {
    circuit: String,
    n: usize,
    #[serde(rename = "D")]
    depth: usize,
    program: BpJson,
}

#[derive(Serialize)]
struct ConvertRow<'a> {
    circuit: &'a str,
    n: usize,
    depth: usize,
    width: usize,
    length: usize,
    width_ok: bool,
}

fn convert(input: &InputArgs, sink: &mut Sink) -> Result<Vec<Check>, CliError> {
    let entries = load(input)?;
    let records = par_map(&entries, |_, e| {
        let bp = OrderedBp::from_circuit(&e.circuit);
        Ok(Converted {
            circuit: e.name.clone(),
            n: e.circuit.n(),
            depth: e.circuit.depth(),
            program: bp.to_json(),
        })
    })?;
    let mut width = Check::new("width");
    let rows: Vec<ConvertRow> = records
        .iter()
        .map(|r| {
            let width_ok = r.program.width <= r.depth + 1;
            width.record(&r.circuit, width_ok);
            ConvertRow {
                circuit: &r.circuit,
                n: r.n,
                depth: r.depth,
                width: r.program.width,
                length: r.program.length,
                width_ok,
            }
        })
        .collect();
    if let [single] = records.as_slice() {
        sink.json("bp.json", &single.program)?;
    } else {
        sink.json("bp.json", &records)?;
    }
    sink.csv("bp.csv", &rows)?;
    Ok(vec![width])
}

fn parse_bits(s: &str) -> Result<Vec<bool>, CliError> {
    s.chars()
        .filter(|c| !c.is_whitespace() && *c != ',')
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(CliError::Usage(format!(
                "--x: unexpected character {other:?}"
            ))),
        })
        .collect()
}

#[derive(Serialize)]
struct Evaluation {
    circuit: Option<String>,
    x: String,
    start: usize,
    end: usize,
    accepts: bool,
    circuit_value: Option<bool>,
}

fn evaluate(args: &EvaluateArgs, sink: &mut Sink) -> Result<Vec<Check>, CliError> {
    let x = parse_bits(&args.x)?;
    let start = args
        .start
        .checked_sub(1)
        .ok_or_else(|| CliError::Usage("--start: states are numbered from 1".into()))?;
    let mut out = Vec::new();
    let mut agrees = Check::new("agrees_with_circuit");
    if let Some(path) = &args.program {
        let text = fs::read_to_string(path)?;
        let json: BpJson = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let bp = OrderedBp::from_json(&json)?;
        let end = bp.evaluate(&x, start)?;
        out.push(Evaluation {
            circuit: None,
            x: args.x.clone(),
            start: args.start,
            end: end + 1,
            accepts: start == START && end == START,
            circuit_value: None,
        });
    } else {
        for e in load(&args.input)? {
            let bp = OrderedBp::from_circuit(&e.circuit);
            let end = bp.evaluate(&x, start)?;
            let value = e.circuit.evaluate(&x)?;
            let accepts = start == START && end == START;
            if start == START {
                agrees.record(&e.name, accepts == value);
            }
            out.push(Evaluation {
                circuit: Some(e.name),
                x: args.x.clone(),
                start: args.start,
                end: end + 1,
                accepts,
                circuit_value: Some(value),
            });
        }
    }
    sink.json("evaluate.json", &out)?;
    Ok(if agrees.total > 0 {
        vec![agrees]
    } else {
        Vec::new()
    })
}

#[derive(Serialize)]
struct Equivalence {
    circuit: String,
    n: usize,
    #[serde(rename = "D")]
    depth: usize,
    width: usize,
    exhaustive: bool,
    inputs: u64,
    mismatches: u64,
    equivalent: bool,
}

fn equivalence(args: &EquivalenceArgs, seed: u64, sink: &mut Sink) -> Result<Vec<Check>, CliError> {
    let entries = load(&args.input)?;
    let records = par_map(&entries, |i, e| {
        let c = &e.circuit;
        let bp = OrderedBp::from_circuit(c);
        let n = c.n();
        let (exhaustive, inputs, mismatches) = if n <= EXHAUSTIVE_MAX_N {
            let ok = bp.equivalent_to(c)?;
            (true, 1u64 << n, u64::from(!ok))
        } else {
            // p = 0 fixes every coordinate to a uniform bit.
            let sampler = PRegularSampler::new(n, 0.0, seed.wrapping_add(i as u64))?;
            let mut bad = 0;
            for t in 0..args.samples {
                let x = sampler.sample(t);
                if bp.accepts(x.values())? != c.evaluate(x.values())? {
                    bad += 1;
                }
            }
            (false, args.samples, bad)
        };
        Ok(Equivalence {
            circuit: e.name.clone(),
            n,
            depth: c.depth(),
            width: bp.width(),
            exhaustive,
            inputs,
            mismatches,
            equivalent: mismatches == 0,
        })
    })?;
    let mut eq = Check::new("equivalence");
    let mut width = Check::new("width");
    for r in &records {
        eq.record(&r.circuit, r.equivalent);
        width.record(&r.circuit, r.width <= r.depth + 1);
    }
    sink.json("equivalence.json", &records)?;
    sink.csv("equivalence.csv", &records)?;
    Ok(vec![eq, width])
}

#[derive(Serialize)]
struct Witness {
    circuit: String,
    i: usize,
    j: usize,
    d1: usize,
    d2: usize,
    #[serde(flatten)]
    check: WitnessCheck,
}

fn slice_witness(args: &WitnessArgs, sink: &mut Sink) -> Result<Vec<Check>, CliError> {
    let state = |name: &str, s: usize| {
        s.checked_sub(1)
            .ok_or_else(|| CliError::Usage(format!("--{name}: states are numbered from 1")))
    };
    let d1 = state("d1", args.d1)?;
    let d2 = state("d2", args.d2)?;
    let entries = load(&args.input)?;
    let records = par_map(&entries, |_, e| {
        let bp = OrderedBp::from_circuit(&e.circuit);
        let check = bp.verify_slice_witness(args.i, args.j, d1, d2)?;
        Ok(Witness {
            circuit: e.name.clone(),
            i: args.i,
            j: args.j,
            d1: args.d1,
            d2: args.d2,
            check,
        })
    })?;
    let mut matches = Check::new("slice_witness");
    let mut depth = Check::new("witness_depth");
    for r in &records {
        matches.record(&r.circuit, r.check.matches && r.check.read_once);
        depth.record(&r.circuit, r.check.depth_ok);
    }
    sink.json("slice_witness.json", &records)?;
    sink.csv("slice_witness.csv", &records)?;
    Ok(vec![matches, depth])
}
