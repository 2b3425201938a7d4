//! Human-readable listings of transducers and prefix automata.

use alloc::string::{String, ToString};
use core::fmt::{self, Write};

use super::product::{PaKind, PrefixAutomaton};
use super::{Atom, Base, Constraint, Tape, Term, Transducer};
use crate::trace::DataDomain;

/// Prints terms with projection names resolved through a domain.
pub struct Named<'a, T> {
    pub domain: &'a DataDomain,
    pub item: &'a T,
}

fn term(d: &DataDomain, t: &Term, f: &mut impl Write) -> fmt::Result {
    let mut s = match &t.base {
        Base::Letter(Tape::Left) => "x".to_string(),
        Base::Letter(Tape::Right) => "y".to_string(),
        Base::Reg(r) => alloc::format!("r{r}"),
        Base::Const(c) => alloc::format!("{c}"),
    };
    for p in &t.projs {
        s = alloc::format!("{}({s})", d.projection_name(*p));
    }
    f.write_str(&s)
}

fn constraint(d: &DataDomain, c: &Constraint, f: &mut impl Write) -> fmt::Result {
    if c.is_true() {
        return f.write_str("true");
    }
    for (k, a) in c.0.iter().enumerate() {
        if k > 0 {
            f.write_str(" & ")?;
        }
        match a {
            Atom::Eq(x, y) | Atom::Neq(x, y) => {
                term(d, x, f)?;
                f.write_str(if matches!(a, Atom::Eq(..)) {
                    " = "
                } else {
                    " != "
                })?;
                term(d, y, f)?;
            }
            Atom::IsEps(x) => {
                term(d, x, f)?;
                f.write_str(" = eps")?;
            }
            Atom::NotEps(x) => {
                term(d, x, f)?;
                f.write_str(" != eps")?;
            }
        }
    }
    Ok(())
}

impl fmt::Display for Named<'_, Transducer> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (d, t) = (self.domain, self.item);
        writeln!(
            f,
            "transducer: {} states, {} registers, initial {}",
            t.states, t.registers, t.initial
        )?;
        for q in 0..t.states {
            for g in &t.finals[q] {
                write!(f, "  final {q} if ")?;
                constraint(d, g, f)?;
                writeln!(f)?;
            }
        }
        for tr in &t.transitions {
            write!(
                f,
                "  {} -> {} [{}] ",
                tr.from,
                tr.to,
                if tr.input { "x" } else { "eps" }
            )?;
            constraint(d, &tr.guard, f)?;
            f.write_str(" / ")?;
            match &tr.output {
                Some(o) => term(d, o, f)?,
                None => f.write_str("eps")?,
            }
            for u in &tr.updates {
                write!(f, "; r{} := ", u.reg)?;
                term(d, &u.value, f)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl fmt::Display for Named<'_, PrefixAutomaton> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (d, a) = (self.domain, self.item);
        writeln!(
            f,
            "prefix automaton: {} states, {} registers, initial {}",
            a.states.len(),
            a.registers,
            a.initial
        )?;
        for (q, s) in a.states.iter().enumerate() {
            let kind: String = match s.kind {
                PaKind::Pair(x, y) => alloc::format!("({x},{y})"),
                PaKind::Tail(y) => alloc::format!("tail {y}"),
                PaKind::Accept => "accept".to_string(),
            };
            writeln!(f, "  state {q} {kind}")?;
            for t in &s.transitions {
                let reads = match t.reads {
                    [true, true] => "x,y",
                    [true, false] => "x,eps",
                    [false, true] => "eps,y",
                    [false, false] => "eps,eps",
                };
                write!(f, "    -> {} [{reads}] ", t.to)?;
                constraint(d, &t.guard, f)?;
                for u in &t.updates {
                    write!(f, "; r{} := ", u.reg)?;
                    term(d, &u.value, f)?;
                }
                writeln!(f)?;
            }
            for ld in &s.left_done {
                write!(
                    f,
                    "    -> {} [left done{}] ",
                    ld.to,
                    if ld.eager { ", eager" } else { "" }
                )?;
                constraint(d, &ld.guard, f)?;
                writeln!(f)?;
            }
            for g in &s.accepting {
                f.write_str("    accept at right end if ")?;
                constraint(d, g, f)?;
                writeln!(f)?;
            }
        }
        Ok(())
    }
}
