//! Circuit sources: DSL files and declarative generator specs.

use std::fs;
use std::ops::RangeInclusive;
use std::path::Path;

use ro_ac0::circuit::{gen_random_read_once, gen_recursive_tribes, gen_tribes, parse};
use ro_ac0::{Circuit, Node};

use crate::args::InputArgs;
use crate::CliError;

/// A circuit with the name used in reports.
#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub name: String,
    pub circuit: Circuit,
}

/// Loads the circuits named by `input`; exactly one source must be given.
pub fn load(input: &InputArgs) -> Result<Vec<Entry>, CliError> {
    match (&input.circuit, &input.corpus) {
        (Some(path), None) => load_file(path),
        (None, Some(spec)) => generate(spec),
        _ => Err(CliError::Usage(
            "give exactly one of --circuit or --corpus".into(),
        )),
    }
}

/// A file holds either a single formula (possibly over several lines) or
/// one formula per line. Lines starting with `#` are ignored.
pub fn load_file(path: &Path) -> Result<Vec<Entry>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let stem = path
        .file_stem()
        .map_or_else(|| "circuit".into(), |s| s.to_string_lossy().into_owned());
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .collect();
    let joined: String = lines.iter().map(|(_, l)| *l).collect::<Vec<_>>().join("\n");
    let whole = parse(&joined);
    match whole {
        Ok(circuit) => Ok(vec![Entry {
            name: stem,
            circuit,
        }]),
        Err(first) if lines.len() > 1 => lines
            .iter()
            .map(|(k, l)| {
                parse(l)
                    .map(|circuit| Entry {
                        name: format!("{stem}#{}", k + 1),
                        circuit,
                    })
                    .map_err(|_| first.clone())
            })
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display()))),
        Err(e) => Err(CliError::Usage(format!("{}: {e}", path.display()))),
    }
}

fn bad(spec: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("corpus spec `{spec}`: {msg}"))
}

struct Params<'a> {
    spec: &'a str,
    pairs: Vec<(&'a str, &'a str)>,
}

impl<'a> Params<'a> {
    fn parse(spec: &'a str, body: &'a str) -> Result<Self, CliError> {
        let mut pairs = Vec::new();
        for item in body.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| bad(spec, format!("`{item}` is not key=value")))?;
            pairs.push((k.trim(), v.trim()));
        }
        Ok(Params { spec, pairs })
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<(), CliError> {
        for (k, _) in &self.pairs {
            if !allowed.contains(k) {
                return Err(bad(self.spec, format!("unknown key `{k}`")));
            }
        }
        Ok(())
    }

    fn raw(&self, key: &str) -> Option<&'a str> {
        self.pairs
            .iter()
            .rev()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
    }

    fn number(&self, key: &str, default: Option<u64>) -> Result<u64, CliError> {
        match self.raw(key) {
            Some(v) => v
                .parse()
                .map_err(|_| bad(self.spec, format!("`{key}={v}` is not a number"))),
            None => default.ok_or_else(|| bad(self.spec, format!("missing `{key}`"))),
        }
    }

    fn range(&self, key: &str, default: Option<u64>) -> Result<RangeInclusive<u64>, CliError> {
        match self.raw(key).and_then(|v| v.split_once("..")) {
            Some((lo, hi)) => {
                let parse = |s: &str| {
                    s.parse::<u64>()
                        .map_err(|_| bad(self.spec, format!("bad range for `{key}`")))
                };
                let (lo, hi) = (parse(lo)?, parse(hi.trim_start_matches('='))?);
                if lo > hi {
                    return Err(bad(self.spec, format!("empty range for `{key}`")));
                }
                Ok(lo..=hi)
            }
            None => {
                let v = self.number(key, default)?;
                Ok(v..=v)
            }
        }
    }
}

/// Value number `i` of a cycling range.
fn cycle(r: &RangeInclusive<u64>, i: u64) -> usize {
    (r.start() + i % (r.end() - r.start() + 1)) as usize
}

/// Expands a generator spec such as `random:n=4..14,d=1..4,count=500,seed=9`.
///
/// Circuit `i` of a random corpus has `n` and `d` taken cyclically from
/// their ranges and generator seed `seed + i`; a single variable always
/// gets depth 0.
pub fn generate(spec: &str) -> Result<Vec<Entry>, CliError> {
    let (kind, body) = spec.split_once(':').unwrap_or((spec, ""));
    let params = Params::parse(spec, body)?;
    let core = |e: ro_ac0::Error| bad(spec, e);
    match kind {
        "random" => {
            params.check_keys(&["n", "d", "count", "seed"])?;
            let n = params.range("n", None)?;
            let d = params.range("d", None)?;
            let count = params.number("count", Some(1))?;
            let seed = params.number("seed", Some(0))?;
            (0..count)
                .map(|i| {
                    let n_i = cycle(&n, i);
                    let d_i = if n_i == 1 { 0 } else { cycle(&d, i) };
                    let circuit =
                        gen_random_read_once(n_i, d_i, seed.wrapping_add(i)).map_err(core)?;
                    Ok(Entry {
                        name: format!("random#{i}"),
                        circuit,
                    })
                })
                .collect()
        }
        "tribes" => {
            params.check_keys(&["m", "w"])?;
            let (m, w) = (params.number("m", None)?, params.number("w", None)?);
            let circuit = gen_tribes(m as usize, w as usize).map_err(core)?;
            Ok(vec![Entry {
                name: format!("tribes-m{m}-w{w}"),
                circuit,
            }])
        }
        "rtribes" => {
            params.check_keys(&["fanins"])?;
            let raw = params
                .raw("fanins")
                .ok_or_else(|| bad(spec, "missing `fanins`"))?;
            let fanins = raw
                .split('x')
                .map(|f| f.parse::<usize>().map_err(|_| bad(spec, "bad fan-in list")))
                .collect::<Result<Vec<_>, _>>()?;
            let circuit = gen_recursive_tribes(fanins.len(), &fanins).map_err(core)?;
            Ok(vec![Entry {
                name: format!("rtribes-{raw}"),
                circuit,
            }])
        }
        "and" | "or" => {
            params.check_keys(&["k"])?;
            let k = params.number("k", None)? as usize;
            if k == 0 {
                return Err(bad(spec, "k must be positive"));
            }
            let leaves = (0..k).map(Node::var).collect();
            let root = if kind == "and" {
                Node::And(leaves)
            } else {
                Node::Or(leaves)
            };
            let circuit = Circuit::new(root, k).map_err(core)?;
            Ok(vec![Entry {
                name: format!("{kind}{k}"),
                circuit,
            }])
        }
        _ => Err(bad(spec, format!("unknown generator `{kind}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_spec_cycles_ranges() {
        let c = generate("random:n=4..6,d=1..2,count=5,seed=3").unwrap();
        let ns: Vec<usize> = c.iter().map(|e| e.circuit.n()).collect();
        assert_eq!(ns, [4, 5, 6, 4, 5]);
        let ds: Vec<usize> = c.iter().map(|e| e.circuit.depth()).collect();
        assert_eq!(ds, [1, 2, 1, 2, 1]);
        assert_eq!(c[2].name, "random#2");
        assert_eq!(c, generate("random:n=4..6,d=1..2,count=5,seed=3").unwrap());
    }

    #[test]
    fn structured_specs() {
        let t = generate("tribes:m=2,w=2").unwrap();
        assert_eq!(t[0].circuit.render(), "(or (and x0 x1) (and x2 x3))");
        let r = generate("rtribes:fanins=2x3x2").unwrap();
        assert_eq!(r[0].circuit.n(), 12);
        assert_eq!(r[0].circuit.depth(), 3);
        assert_eq!(
            generate("and:k=3").unwrap()[0].circuit.render(),
            "(and x0 x1 x2)"
        );
    }

    #[test]
    fn malformed_specs_are_usage_errors() {
        for spec in [
            "random:n=4",
            "random:n=4,d=x",
            "random:n=6..4,d=1",
            "random:n=4,d=1,colour=red",
            "tribes:m=2",
            "nope:k=1",
            "and:k=0",
            "random:n=4;d=1",
        ] {
            assert!(matches!(generate(spec), Err(CliError::Usage(_))), "{spec}");
        }
    }
}
