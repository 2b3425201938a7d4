use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{Atom, Base, Constraint, Term, Update};
use crate::trace::{DataDomain, Value};

/// Values visible to a transition: the letters under the heads of the tapes
/// it reads, and the registers.
pub struct Env<'a> {
    pub domain: &'a DataDomain,
    pub letters: [Option<&'a Value>; 2],
    pub regs: &'a [Option<Value>],
}

impl Env<'_> {
    /// `None` is the empty word (or an unset register).
    pub fn eval(&self, t: &Term) -> Option<Value> {
        let base = match &t.base {
            Base::Letter(tape) => self.letters[tape.index()],
            Base::Reg(r) => self.regs.get(*r as usize).and_then(Option::as_ref),
            Base::Const(c) => Some(c),
        };
        let mut projs = t.projs.iter();
        let mut cur = match projs.next() {
            None => return base.cloned(),
            Some(p) => self.domain.apply(*p, base?)?,
        };
        for p in projs {
            cur = self.domain.apply(*p, &cur)?;
        }
        Some(cur)
    }

    pub fn holds(&self, atom: &Atom) -> bool {
        match atom {
            Atom::Eq(a, b) => self.eval(a) == self.eval(b),
            Atom::Neq(a, b) => self.eval(a) != self.eval(b),
            Atom::IsEps(a) => self.eval(a).is_none(),
            Atom::NotEps(a) => self.eval(a).is_some(),
        }
    }

    pub fn satisfies(&self, c: &Constraint) -> bool {
        c.0.iter().all(|a| self.holds(a))
    }

    /// Register contents after the (parallel) updates.
    pub fn apply(&self, updates: &[Update]) -> Vec<Option<Value>> {
        let mut regs = self.regs.to_vec();
        for u in updates {
            regs[u.reg as usize] = self.eval(&u.value);
        }
        regs
    }
}

struct Classes {
    terms: Vec<Term>,
    index: BTreeMap<Term, usize>,
    parent: Vec<usize>,
}

impl Classes {
    fn node(&mut self, t: &Term) -> usize {
        if let Some(&i) = self.index.get(t) {
            return i;
        }
        if let Some(p) = t.parent() {
            self.node(&p);
        }
        let i = self.terms.len();
        self.terms.push(t.clone());
        self.index.insert(t.clone(), i);
        self.parent.push(i);
        i
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        self.parent[a] = b;
        true
    }
}

/// Sound satisfiability check: `false` only if no letters and register
/// contents make the constraint true. Values are assumed to range over an
/// infinite domain, so disequalities between unconstrained terms can
/// always be met.
pub fn satisfiable(c: &Constraint, domain: &DataDomain) -> bool {
    if c.0.is_empty() {
        return true;
    }
    let mut cl = Classes {
        terms: Vec::new(),
        index: BTreeMap::new(),
        parent: Vec::new(),
    };
    for a in &c.0 {
        for t in a.terms() {
            cl.node(t);
        }
    }
    for a in &c.0 {
        if let Atom::Eq(x, y) = a {
            let (i, j) = (cl.node(x), cl.node(y));
            cl.union(i, j);
        }
    }
    let n = cl.terms.len();
    let eps_forced: Vec<usize> =
        c.0.iter()
            .filter_map(|a| match a {
                Atom::IsEps(t) => Some(cl.index[t]),
                _ => None,
            })
            .collect();
    let parents: Vec<Option<usize>> = (0..n)
        .map(|i| cl.terms[i].parent().map(|p| cl.index[&p]))
        .collect();
    // Known values per class, as `Some(None)` for the empty word.
    let mut facts: BTreeMap<usize, Option<Value>>;
    loop {
        let mut changed = false;
        // Congruence: equal arguments under the same projection.
        for i in 0..n {
            for j in (i + 1)..n {
                if let (Some(pi), Some(pj)) = (parents[i], parents[j]) {
                    let same_proj = cl.terms[i].projs.last() == cl.terms[j].projs.last();
                    if same_proj && cl.find(pi) == cl.find(pj) {
                        changed |= cl.union(i, j);
                    }
                }
            }
        }
        facts = BTreeMap::new();
        let mut by_value: BTreeMap<Option<Value>, usize> = BTreeMap::new();
        let mut pending: Vec<(usize, Option<Value>)> = Vec::new();
        for i in 0..n {
            if let Base::Const(v) = &cl.terms[i].base {
                if cl.terms[i].projs.is_empty() {
                    pending.push((i, Some(v.clone())));
                }
            }
        }
        for &i in &eps_forced {
            pending.push((i, None));
        }
        // Propagate known values through projections until stable.
        let mut known: BTreeMap<usize, Option<Value>> = BTreeMap::new();
        while let Some((i, v)) = pending.pop() {
            let root = cl.find(i);
            match known.get(&root) {
                Some(w) if *w == v => continue,
                Some(_) => return false,
                None => {}
            }
            known.insert(root, v.clone());
            for (j, parent) in parents.iter().enumerate().take(n) {
                if let Some(p) = *parent {
                    if cl.find(p) == root {
                        let proj = *cl.terms[j].projs.last().unwrap();
                        let w = v.as_ref().and_then(|v| domain.apply(proj, v));
                        pending.push((j, w));
                    }
                }
            }
        }
        for (root, v) in known {
            if let Some(&other) = by_value.get(&v) {
                changed |= cl.union(root, other);
            } else {
                by_value.insert(v.clone(), root);
            }
            facts.insert(root, v);
        }
        if !changed {
            break;
        }
    }
    let fact_of = |cl: &mut Classes, i: usize| facts.get(&cl.find(i)).cloned();
    for a in &c.0 {
        match a {
            Atom::Neq(x, y) => {
                let (i, j) = (cl.index[x], cl.index[y]);
                if cl.find(i) == cl.find(j) {
                    return false;
                }
            }
            Atom::NotEps(x) => {
                let i = cl.index[x];
                if fact_of(&mut cl, i) == Some(None) {
                    return false;
                }
            }
            Atom::Eq(..) | Atom::IsEps(..) => {}
        }
    }
    // Letters themselves are never empty.
    for i in 0..n {
        if matches!(cl.terms[i].base, Base::Letter(_))
            && cl.terms[i].projs.is_empty()
            && fact_of(&mut cl, i) == Some(None)
        {
            return false;
        }
    }
    true
}

/// Sound validity check for a disjunction of constraints: `true` only if
/// every valuation satisfies at least one of them. Splits on atoms that
/// occur together with their complement.
pub fn disjunction_valid(guards: &[Constraint]) -> bool {
    if guards.iter().any(Constraint::is_true) {
        return true;
    }
    for g in guards {
        for a in &g.0 {
            let comp = a.complement();
            if !guards.iter().any(|h| h.0.contains(&comp)) {
                continue;
            }
            let assume = |atom: &Atom, neg: &Atom| -> Vec<Constraint> {
                guards
                    .iter()
                    .filter(|h| !h.0.contains(neg))
                    .map(|h| Constraint(h.0.iter().filter(|x| *x != atom).cloned().collect()))
                    .collect()
            };
            return disjunction_valid(&assume(a, &comp)) && disjunction_valid(&assume(&comp, a));
        }
    }
    false
}
