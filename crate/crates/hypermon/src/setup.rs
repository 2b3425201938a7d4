//! Resolving formulas, domains and generators from command-line names.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use hypermon_core::formula::{library, parse_formula, parse_formula_in};
use hypermon_core::generators::{
    builtin, GenError, Generator, GeneratorRegistry, Options, BUILTINS,
};
use hypermon_core::oracle::GeneratorInterp;
use hypermon_core::scenarios::domains;
use hypermon_core::{DataDomain, Formula, Trace};

use crate::error::{Error, Result};

/// Generators bound to the names a formula uses.
pub type Bound = Vec<(String, Arc<dyn Generator>)>;

/// A parsed formula and the domain it is evaluated in.
pub struct Spec {
    pub source: String,
    pub formula: Formula,
    pub domain: Arc<DataDomain>,
}

/// Loads `arg` as a formula file or, failing that, a library formula.
///
/// The domain is `domain` if given, else the library formula's domain,
/// else a domain whose projections are the event fields the formula
/// names.
pub fn load_formula(arg: &str, domain: Option<&str>) -> Result<Spec> {
    let (source, name) = if Path::new(arg).is_file() {
        let text = fs::read_to_string(arg).map_err(|error| Error::Io {
            path: arg.into(),
            error,
        })?;
        (text, None)
    } else if let Some(src) = library::get(arg) {
        (src.to_string(), Some(arg))
    } else {
        let names: Vec<&str> = library::ALL.iter().map(|(n, _)| *n).collect();
        return Err(Error::Usage(format!(
            "`{arg}` is neither a file nor a library formula ({})",
            names.join(", ")
        )));
    };
    let what = || arg.to_string();
    let domain = match domain {
        Some(d) => domains::by_name(d).ok_or_else(|| {
            Error::Usage(format!(
                "unknown domain `{d}` (robot, queue, history, security)"
            ))
        })?,
        None => match name.and_then(library::domain_of) {
            Some(d) => d,
            None => {
                let f = parse_formula(&source).map_err(|error| Error::Parse {
                    what: what(),
                    error,
                })?;
                generic_domain(&f)
            }
        },
    };
    let formula = parse_formula_in(&source, &domain).map_err(|error| Error::Parse {
        what: what(),
        error,
    })?;
    Ok(Spec {
        source,
        formula,
        domain: Arc::new(domain),
    })
}

/// A domain with one field projection per projection name in `f`.
pub fn generic_domain(f: &Formula) -> DataDomain {
    let names: BTreeSet<Arc<str>> = f
        .atoms()
        .into_iter()
        .flat_map(|(l, r)| l.projections().into_iter().chain(r.projections()))
        .collect();
    let names: Vec<&str> = names.iter().map(|s| &**s).collect();
    DataDomain::new("generic", &names)
}

/// A generator binding `name=kind[:options]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenBinding {
    pub name: String,
    pub kind: String,
    pub options: Options,
}

impl std::str::FromStr for GenBinding {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (name, rest) = s
            .split_once('=')
            .ok_or_else(|| format!("`{s}` is not `name=kind[:options]`"))?;
        let (kind, opts) = rest.split_once(':').unwrap_or((rest, ""));
        if name.is_empty() || kind.is_empty() {
            return Err(format!("`{s}` is not `name=kind[:options]`"));
        }
        Ok(GenBinding {
            name: name.trim().to_string(),
            kind: kind.trim().to_string(),
            options: Options::parse(opts).map_err(|e| e.to_string())?,
        })
    }
}

/// The generators `formula` uses: the explicit bindings, then built-ins
/// whose name the formula uses, with default options.
pub fn bind_generators(formula: &Formula, bindings: &[GenBinding]) -> Result<Bound> {
    let mut out: Bound = Vec::new();
    for b in bindings {
        out.push((b.name.clone(), builtin(&b.kind, &b.options)?));
    }
    for (name, _) in formula.generators() {
        if out.iter().any(|(n, _)| **n == *name) {
            continue;
        }
        if BUILTINS.contains(&&*name) {
            log::info!("binding generator `{name}` to the built-in with default options");
            out.push((name.to_string(), builtin(&name, &Options::default())?));
        }
    }
    Ok(out)
}

pub fn registry(generators: &[(String, Arc<dyn Generator>)]) -> GeneratorRegistry {
    let mut reg = GeneratorRegistry::new();
    for (name, g) in generators {
        reg.register(name, g.clone());
    }
    reg
}

/// Runs a generator to completion on complete argument traces.
pub fn run_generator(
    g: &dyn Generator,
    args: &[&Trace],
) -> std::result::Result<Vec<Trace>, GenError> {
    let mut inst = g.instance();
    let mut out = Vec::new();
    for _ in 0..4 {
        if inst.advance(args, &mut out)? {
            return Ok(out);
        }
    }
    Err(GenError::Malformed(
        "generator did not finish on complete arguments".into(),
    ))
}

/// The generators as functions for the reference evaluator. A generator
/// that fails on some arguments produces no traces for them.
pub fn interpretation(generators: &[(String, Arc<dyn Generator>)]) -> GeneratorInterp {
    let mut sigma = GeneratorInterp::new();
    for (name, g) in generators {
        let g = g.clone();
        let label = name.clone();
        sigma.insert(
            name,
            Arc::new(move |args: &[&Trace]| {
                run_generator(&*g, args).unwrap_or_else(|e| {
                    log::warn!("generator `{label}`: {e}");
                    Vec::new()
                })
            }),
        );
    }
    sigma
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_generator_bindings() {
        let b: GenBinding = "s=samples:n=3,seed=2".parse().unwrap();
        assert_eq!(b.name, "s");
        assert_eq!(b.kind, "samples");
        assert_eq!(
            b.options,
            Options::default().with("n", "3").with("seed", "2")
        );
        let b: GenBinding = "lin=lin".parse().unwrap();
        assert_eq!(b.options, Options::default());
        assert!("lin".parse::<GenBinding>().is_err());
        assert!("=lin".parse::<GenBinding>().is_err());
        assert!("x=samples:n".parse::<GenBinding>().is_err());
    }

    #[test]
    fn library_formulas_get_their_domain() {
        let spec = load_formula("lin", None).unwrap();
        assert_eq!(spec.domain.name(), "queue");
        let gens = bind_generators(&spec.formula, &[]).unwrap();
        assert_eq!(gens.len(), 1);
        assert!(matches!(
            load_formula("no-such-formula", None),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn unknown_formulas_get_a_generic_domain() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.hl");
        fs::write(&path, "forall p . forall q . a(p) <= b(q)").unwrap();
        let spec = load_formula(path.to_str().unwrap(), None).unwrap();
        let names: Vec<&str> = spec.domain.projection_names().collect();
        assert!(names.contains(&"a") && names.contains(&"b"));
    }
}
