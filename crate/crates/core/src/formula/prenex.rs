use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use super::{Formula, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    Exists,
    Forall,
}

impl Polarity {
    pub fn flip(self) -> Self {
        match self {
            Polarity::Exists => Polarity::Forall,
            Polarity::Forall => Polarity::Exists,
        }
    }
}

/// Where a quantifier draws its traces from.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Source {
    /// The observed traces (a passive quantifier).
    Observation,
    /// The output of a generator function (an active quantifier).
    Generator { name: Arc<str>, args: Vec<Var> },
}

impl Source {
    pub fn is_passive(&self) -> bool {
        matches!(self, Source::Observation)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Quantifier {
    pub polarity: Polarity,
    pub var: Var,
    pub source: Source,
}

/// A maximal run of quantifiers with the same polarity and the same source.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuantifierBlock {
    pub polarity: Polarity,
    pub source: Source,
    pub vars: Vec<Var>,
}

/// A formula split into its quantifier prefix and quantifier-free body.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prenex {
    pub quantifiers: Vec<Quantifier>,
    pub body: Formula,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FragmentError {
    /// A quantifier occurs below a conjunction.
    NotPrenex,
    NotClosed(Vec<String>),
    Requantified(String),
    /// A generator argument is bound only later in the formula.
    LateGeneratorArgument {
        generator: String,
        arg: String,
    },
    /// Passive quantifiers alternate, or follow an active one.
    NotMonitorable(String),
    UnknownGenerator(String),
    GeneratorArity {
        generator: String,
        expected: usize,
        found: usize,
    },
    NotSimple(String),
}

impl fmt::Display for FragmentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FragmentError::NotPrenex => f.write_str("quantifiers must form a prefix (no quantifier below `&`)"),
            FragmentError::NotClosed(vars) => write!(f, "free trace variables: {}", vars.join(", ")),
            FragmentError::Requantified(v) => write!(f, "trace variable `{v}` is quantified twice"),
            FragmentError::LateGeneratorArgument { generator, arg } => write!(
                f,
                "argument `{arg}` of generator `{generator}` is quantified after the generator is used"
            ),
            FragmentError::NotMonitorable(why) => write!(f, "unsupported fragment: {why}"),
            FragmentError::UnknownGenerator(g) => write!(f, "no generator registered under `{g}`"),
            FragmentError::GeneratorArity {
                generator,
                expected,
                found,
            } => write!(f, "generator `{generator}` takes {expected} argument(s), {found} given"),
            FragmentError::NotSimple(atom) => write!(
                f,
                "`{atom}`: each side of a prefix atom may mention at most one trace variable, and none under `*`"
            ),
        }
    }
}

impl core::error::Error for FragmentError {}

impl Formula {
    pub fn prenex(&self) -> Result<Prenex, FragmentError> {
        let mut quantifiers = Vec::new();
        let mut f = self;
        let mut negated = false;
        loop {
            match f {
                Formula::Not(inner) => {
                    negated = !negated;
                    f = inner;
                }
                Formula::Exists { var, body } => {
                    quantifiers.push(Quantifier {
                        polarity: if negated {
                            Polarity::Forall
                        } else {
                            Polarity::Exists
                        },
                        var: var.clone(),
                        source: Source::Observation,
                    });
                    f = body;
                }
                Formula::ExistsIn {
                    var,
                    generator,
                    args,
                    body,
                } => {
                    quantifiers.push(Quantifier {
                        polarity: if negated {
                            Polarity::Forall
                        } else {
                            Polarity::Exists
                        },
                        var: var.clone(),
                        source: Source::Generator {
                            name: generator.clone(),
                            args: args.clone(),
                        },
                    });
                    f = body;
                }
                _ => break,
            }
        }
        if !f.is_quantifier_free() {
            return Err(FragmentError::NotPrenex);
        }
        let body = if negated {
            Formula::not(f.clone())
        } else {
            f.clone()
        };
        Ok(Prenex { quantifiers, body })
    }
}

impl Prenex {
    pub fn to_formula(&self) -> Formula {
        let mut f = self.body.clone();
        for q in self.quantifiers.iter().rev() {
            let inner = match q.polarity {
                Polarity::Exists => f,
                Polarity::Forall => Formula::not(f),
            };
            let quantified = match &q.source {
                Source::Observation => Formula::Exists {
                    var: q.var.clone(),
                    body: Box::new(inner),
                },
                Source::Generator { name, args } => Formula::ExistsIn {
                    var: q.var.clone(),
                    generator: name.clone(),
                    args: args.clone(),
                    body: Box::new(inner),
                },
            };
            f = match q.polarity {
                Polarity::Exists => quantified,
                Polarity::Forall => Formula::not(quantified),
            };
        }
        f
    }

    /// Flips every quantifier and negates the body.
    pub fn negate(&self) -> Prenex {
        Prenex {
            quantifiers: self
                .quantifiers
                .iter()
                .map(|q| Quantifier {
                    polarity: q.polarity.flip(),
                    ..q.clone()
                })
                .collect(),
            body: Formula::not(self.body.clone()),
        }
    }

    pub fn blocks(&self) -> Vec<QuantifierBlock> {
        let mut blocks: Vec<QuantifierBlock> = Vec::new();
        for q in &self.quantifiers {
            match blocks.last_mut() {
                Some(b) if b.polarity == q.polarity && b.source == q.source => {
                    b.vars.push(q.var.clone())
                }
                _ => blocks.push(QuantifierBlock {
                    polarity: q.polarity,
                    source: q.source.clone(),
                    vars: alloc::vec![q.var.clone()],
                }),
            }
        }
        blocks
    }

    /// Closedness, single quantification, and generator arguments bound
    /// before use.
    pub fn check_well_formed(&self) -> Result<(), FragmentError> {
        let mut bound: Vec<Var> = Vec::new();
        let mut late_args: Vec<(Arc<str>, Var)> = Vec::new();
        for q in &self.quantifiers {
            if bound.contains(&q.var) {
                return Err(FragmentError::Requantified(q.var.to_string()));
            }
            if let Source::Generator { name, args } = &q.source {
                for a in args {
                    if !bound.contains(a) {
                        late_args.push((name.clone(), a.clone()));
                    }
                }
            }
            bound.push(q.var.clone());
        }
        let free: Vec<String> = self
            .body
            .free_vars()
            .into_iter()
            .filter(|v| !bound.contains(v))
            .map(|v| v.to_string())
            .collect();
        if let Some((g, a)) = late_args.into_iter().next() {
            if bound.contains(&a) {
                return Err(FragmentError::LateGeneratorArgument {
                    generator: g.to_string(),
                    arg: a.to_string(),
                });
            }
            let mut free = free;
            if !free.contains(&a.to_string()) {
                free.push(a.to_string());
            }
            return Err(FragmentError::NotClosed(free));
        }
        if !free.is_empty() {
            return Err(FragmentError::NotClosed(free));
        }
        for (lhs, rhs) in self.body.atoms() {
            if !lhs.is_simple() || !rhs.is_simple() {
                return Err(FragmentError::NotSimple(
                    Formula::Leq(lhs.clone(), rhs.clone()).to_string(),
                ));
            }
        }
        Ok(())
    }

    /// Passive quantifiers must come first and share one polarity.
    pub fn check_monitorable(&self) -> Result<(), FragmentError> {
        let mut passive_polarity = None;
        let mut seen_active = false;
        for q in &self.quantifiers {
            match &q.source {
                Source::Observation => {
                    if seen_active {
                        return Err(FragmentError::NotMonitorable(alloc::format!(
                            "quantifier over observed traces `{}` follows a generator quantifier",
                            q.var
                        )));
                    }
                    match passive_polarity {
                        None => passive_polarity = Some(q.polarity),
                        Some(p) if p != q.polarity => {
                            return Err(FragmentError::NotMonitorable(alloc::format!(
                                "quantifiers over observed traces alternate at `{}`; bind it to a generator",
                                q.var
                            )))
                        }
                        Some(_) => {}
                    }
                }
                Source::Generator { .. } => seen_active = true,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::TraceFormula;

    fn atom(a: &str, b: &str) -> Formula {
        Formula::leq(TraceFormula::proj("x", a), TraceFormula::proj("x", b))
    }

    #[test]
    fn prenex_round_trip() {
        let f = Formula::forall(
            "p",
            Formula::exists_in("q", "g", &["p"], Formula::not(atom("p", "q"))),
        );
        let p = f.prenex().unwrap();
        assert_eq!(p.quantifiers[0].polarity, Polarity::Forall);
        assert_eq!(p.quantifiers[1].polarity, Polarity::Exists);
        assert_eq!(p.body, Formula::not(atom("p", "q")));
        assert_eq!(p.to_formula(), f);
        assert_eq!(p.negate().negate(), p);
        assert_eq!(p.negate().to_formula(), f.negate());
    }

    #[test]
    fn blocks_group_by_polarity_and_source() {
        let f = Formula::forall(
            "a",
            Formula::forall(
                "b",
                Formula::exists_in(
                    "c",
                    "g",
                    &["a"],
                    Formula::exists_in("d", "g", &["a"], atom("c", "d")),
                ),
            ),
        );
        let blocks = f.prenex().unwrap().blocks();
        assert_eq!(blocks.len(), 2);
        assert_eq!(blocks[0].vars.len(), 2);
        assert_eq!(blocks[1].vars.len(), 2);
    }

    #[test]
    fn non_prenex_rejected() {
        let f = Formula::and(Formula::exists("p", atom("p", "p")), Formula::tt());
        assert_eq!(f.prenex(), Err(FragmentError::NotPrenex));
    }

    #[test]
    fn monitorability() {
        let alt = Formula::forall("p", Formula::exists("q", atom("p", "q")));
        assert!(alt.prenex().unwrap().check_monitorable().is_err());
        let ok = Formula::forall("p", Formula::exists_in("q", "g", &["p"], atom("p", "q")));
        assert!(ok.prenex().unwrap().check_monitorable().is_ok());
        let late = Formula::exists_in("q", "g", &["p"], Formula::forall("p", atom("p", "q")));
        assert!(matches!(
            late.prenex().unwrap().check_well_formed(),
            Err(FragmentError::LateGeneratorArgument { .. })
        ));
    }
}
