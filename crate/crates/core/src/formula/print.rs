use core::fmt::{self, Write};

use super::{Formula, TraceFormula};
use crate::trace::Value;

const UNION: u8 = 1;
const CONCAT: u8 = 2;
const POSTFIX: u8 = 3;

pub(super) fn write_value(f: &mut fmt::Formatter<'_>, v: &Value) -> fmt::Result {
    match v {
        Value::Int(n) => write!(f, "{n}"),
        Value::Sym(s) => {
            f.write_char('"')?;
            for c in s.chars() {
                match c {
                    '"' => f.write_str("\\\"")?,
                    '\\' => f.write_str("\\\\")?,
                    '\n' => f.write_str("\\n")?,
                    '\t' => f.write_str("\\t")?,
                    c => f.write_char(c)?,
                }
            }
            f.write_char('"')
        }
        Value::Tuple(items) => {
            f.write_char('[')?;
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write_value(f, item)?;
            }
            f.write_char(']')
        }
        Value::Event(e) => write!(f, "<event {e}>"),
    }
}

pub(super) fn write_trace_formula(
    f: &mut fmt::Formatter<'_>,
    tf: &TraceFormula,
    min: u8,
) -> fmt::Result {
    let prec = match tf {
        TraceFormula::Union(..) => UNION,
        TraceFormula::Concat(..) => CONCAT,
        _ => POSTFIX,
    };
    if prec < min {
        f.write_char('(')?;
    }
    match tf {
        TraceFormula::Epsilon => f.write_str("eps")?,
        TraceFormula::Const(v) => write_value(f, v)?,
        TraceFormula::Proj { proj, var } => write!(f, "{proj}({var})")?,
        TraceFormula::Slice(a, i, j) => {
            write_trace_formula(f, a, POSTFIX)?;
            write!(f, "[{i}:{j}]")?;
        }
        TraceFormula::Star(a) => {
            write_trace_formula(f, a, POSTFIX)?;
            f.write_char('*')?;
        }
        TraceFormula::StutterReduce(a) => {
            f.write_str("stutter(")?;
            write_trace_formula(f, a, 0)?;
            f.write_char(')')?;
        }
        TraceFormula::Concat(a, b) => {
            write_trace_formula(f, a, CONCAT)?;
            f.write_str(" ; ")?;
            write_trace_formula(f, b, POSTFIX)?;
        }
        TraceFormula::Union(a, b) => {
            write_trace_formula(f, a, UNION)?;
            f.write_str(" + ")?;
            write_trace_formula(f, b, CONCAT)?;
        }
    }
    if prec < min {
        f.write_char(')')?;
    }
    Ok(())
}

/// Recognised surface forms, used to print formulas the way the parser
/// desugars them.
enum Shape<'a> {
    Forall(&'a Formula, &'a Formula),
    Exists(&'a Formula),
    Or(&'a Formula, &'a Formula),
    Implies(&'a Formula, &'a Formula),
    Eq(&'a TraceFormula, &'a TraceFormula),
    Neq(&'a TraceFormula, &'a TraceFormula),
    True,
    False,
    Leq(&'a TraceFormula, &'a TraceFormula),
    And(&'a Formula, &'a Formula),
    Not(&'a Formula),
}

fn as_eq(f: &Formula) -> Option<(&TraceFormula, &TraceFormula)> {
    match f {
        Formula::And(a, b) => match (&**a, &**b) {
            (Formula::Leq(x, y), Formula::Leq(y2, x2)) if x == x2 && y == y2 => Some((x, y)),
            _ => None,
        },
        _ => None,
    }
}

fn is_true(f: &Formula) -> bool {
    matches!(
        f,
        Formula::Leq(TraceFormula::Epsilon, TraceFormula::Epsilon)
    )
}

fn shape(f: &Formula) -> Shape<'_> {
    match f {
        Formula::Not(inner) => match &**inner {
            q @ (Formula::Exists { body, .. } | Formula::ExistsIn { body, .. }) => match &**body {
                Formula::Not(b) => Shape::Forall(q, b),
                _ => Shape::Not(inner),
            },
            Formula::And(a, b) => match (&**a, &**b) {
                (Formula::Not(x), Formula::Not(y)) => Shape::Or(x, y),
                (x, Formula::Not(y)) => Shape::Implies(x, y),
                _ => match as_eq(inner) {
                    Some((x, y)) => Shape::Neq(x, y),
                    None => Shape::Not(inner),
                },
            },
            g if is_true(g) => Shape::False,
            _ => Shape::Not(inner),
        },
        Formula::Exists { .. } | Formula::ExistsIn { .. } => Shape::Exists(f),
        Formula::And(a, b) => match as_eq(f) {
            Some((x, y)) => Shape::Eq(x, y),
            None => Shape::And(a, b),
        },
        Formula::Leq(a, b) => {
            if is_true(f) {
                Shape::True
            } else {
                Shape::Leq(a, b)
            }
        }
    }
}

fn write_binder(f: &mut fmt::Formatter<'_>, kw: &str, q: &Formula) -> fmt::Result {
    match q {
        Formula::Exists { var, .. } => write!(f, "{kw} {var} . "),
        Formula::ExistsIn {
            var,
            generator,
            args,
            ..
        } => {
            write!(f, "{kw} {var} in {generator}(")?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                f.write_str(a)?;
            }
            f.write_str(") . ")
        }
        _ => unreachable!("binder of a non-quantifier"),
    }
}

fn quant_body(q: &Formula) -> &Formula {
    match q {
        Formula::Exists { body, .. } | Formula::ExistsIn { body, .. } => body,
        _ => unreachable!("body of a non-quantifier"),
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, g: &Formula) -> fmt::Result {
    let atomic = matches!(
        shape(g),
        Shape::Eq(..) | Shape::Neq(..) | Shape::True | Shape::False | Shape::Leq(..)
    );
    if atomic {
        write_formula(f, g)
    } else {
        f.write_char('(')?;
        write_formula(f, g)?;
        f.write_char(')')
    }
}

fn write_relation(
    f: &mut fmt::Formatter<'_>,
    a: &TraceFormula,
    op: &str,
    b: &TraceFormula,
) -> fmt::Result {
    write_trace_formula(f, a, 0)?;
    write!(f, " {op} ")?;
    write_trace_formula(f, b, 0)
}

pub(super) fn write_formula(f: &mut fmt::Formatter<'_>, phi: &Formula) -> fmt::Result {
    match shape(phi) {
        Shape::Forall(q, body) => {
            write_binder(f, "forall", q)?;
            write_formula(f, body)
        }
        Shape::Exists(q) => {
            write_binder(f, "exists", q)?;
            write_formula(f, quant_body(q))
        }
        Shape::Or(a, b) => {
            write_operand(f, a)?;
            f.write_str(" | ")?;
            write_operand(f, b)
        }
        Shape::Implies(a, b) => {
            write_operand(f, a)?;
            f.write_str(" -> ")?;
            write_operand(f, b)
        }
        Shape::Eq(a, b) => write_relation(f, a, "=", b),
        Shape::Neq(a, b) => write_relation(f, a, "!=", b),
        Shape::True => f.write_str("true"),
        Shape::False => f.write_str("false"),
        Shape::Leq(a, b) => write_relation(f, a, "<=", b),
        Shape::And(a, b) => {
            write_operand(f, a)?;
            f.write_str(" & ")?;
            write_operand(f, b)
        }
        Shape::Not(a) => {
            f.write_char('!')?;
            write_operand(f, a)
        }
    }
}
