//! Instance loading: JSON files and `--gen name:args` specs.

use std::path::Path;

use anyhow::{bail, Context, Result};
use pmvc_core::instances::pos_instance;
use pmvc_core::*;

/// A built-in instance family with its parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GenSpec {
    Counterexample,
    Harmonic { k: usize, m: usize },
    Pos { k: usize, m: usize, eps: Option<Rational> },
    Random { n: usize, k: usize, generator: Generator },
    Cdsp { n: usize, k: usize, r: usize },
}

fn numbers(name: &str, args: &[&str], want: usize) -> Result<Vec<usize>> {
    if args.len() != want {
        bail!("generator {name} takes {want} numeric arguments, got {}", args.len());
    }
    args.iter()
        .map(|a| a.trim().parse::<usize>().with_context(|| format!("generator {name}: bad number {a:?}")))
        .collect()
}

impl std::str::FromStr for GenSpec {
    type Err = anyhow::Error;

    /// `counterexample`, `harmonic:K,M`, `pos:K,M[,EPS]`,
    /// `random:N,K[,coverage|concave]`, `cdsp:N,K,R`.
    fn from_str(text: &str) -> Result<Self> {
        let (name, rest) = text.split_once(':').unwrap_or((text, ""));
        let args: Vec<&str> = rest.split(',').map(str::trim).filter(|a| !a.is_empty()).collect();
        Ok(match name.trim() {
            "counterexample" => {
                numbers(name, &args, 0)?;
                GenSpec::Counterexample
            }
            "harmonic" => {
                let v = numbers(name, &args, 2)?;
                GenSpec::Harmonic { k: v[0], m: v[1] }
            }
            "pos" => {
                let eps = match args.get(2) {
                    Some(e) => Some(e.parse::<Rational>().with_context(|| format!("generator pos: bad epsilon {e:?}"))?),
                    None => None,
                };
                let v = numbers(name, &args[..args.len().min(2)], 2)?;
                if args.len() > 3 {
                    bail!("generator pos takes K,M[,EPS]");
                }
                GenSpec::Pos { k: v[0], m: v[1], eps }
            }
            "random" => {
                let generator = match args.get(2).copied() {
                    None | Some("coverage") => Generator::Coverage,
                    Some("concave") | Some("additive-concave") => Generator::AdditiveConcave,
                    Some(other) => bail!("generator random: unknown family {other:?} (coverage or concave)"),
                };
                if args.len() > 3 {
                    bail!("generator random takes N,K[,FAMILY]");
                }
                let v = numbers(name, &args[..args.len().min(2)], 2)?;
                GenSpec::Random { n: v[0], k: v[1], generator }
            }
            "cdsp" => {
                let v = numbers(name, &args, 3)?;
                GenSpec::Cdsp { n: v[0], k: v[1], r: v[2] }
            }
            other => bail!("unknown generator {other:?} (counterexample, harmonic, pos, random, cdsp)"),
        })
    }
}

pub const DEFAULT_POS_EPS: (i64, i64) = (1, 100);

impl GenSpec {
    /// `seed` feeds the random families; `eps` is the fallback epsilon for
    /// `pos`.
    pub fn build(&self, seed: u64, eps: Option<&Rational>) -> Result<GameInstance> {
        Ok(match self {
            GenSpec::Counterexample => counterexample_instance(),
            GenSpec::Harmonic { k, m } => harmonic_instance(*k, *m)?,
            GenSpec::Pos { k, m, eps: own } => {
                let default = Rational::new(DEFAULT_POS_EPS.0, DEFAULT_POS_EPS.1);
                let eps = own.as_ref().or(eps).unwrap_or(&default);
                pos_instance(*k, *m, eps)?
            }
            GenSpec::Random { n, k, generator } => random_instance(seed, *n, *k, *generator)?,
            GenSpec::Cdsp { n, k, r } => random_cdsp(seed, *n, *k, *r)?,
        })
    }
}

pub fn read_instance_file(path: &Path) -> Result<InstanceFile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    InstanceFile::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Loads a game; with `diagnostic` the valuation need not be submodular.
pub fn load_file(path: &Path, diagnostic: bool) -> Result<GameInstance> {
    let file = read_instance_file(path)?;
    let (v, vendors) = file.build().with_context(|| format!("building {}", path.display()))?;
    let g = if diagnostic {
        GameInstance::diagnostic(v, vendors)
    } else {
        GameInstance::new(v, vendors)
    };
    g.with_context(|| format!("instance {}", path.display()))
}
