//! Reduced ordered binary decision diagrams over numbered atoms.
//!
//! The monitor keeps the boolean structure of a formula body as a diagram
//! whose variables are the body's atoms, so that the truth of the body can
//! be read off from the atoms decided so far and only atoms that still
//! matter are evaluated.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

pub type NodeId = u32;

pub const FALSE: NodeId = 0;
pub const TRUE: NodeId = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Node {
    var: u32,
    lo: NodeId,
    hi: NodeId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Op {
    And,
    Or,
}

/// A shared node store. Node ids are canonical: two ids are equal iff they
/// denote the same boolean function.
#[derive(Clone, Debug)]
pub struct Bdd {
    nodes: Vec<Node>,
    unique: BTreeMap<Node, NodeId>,
    memo: BTreeMap<(Op, NodeId, NodeId), NodeId>,
}

impl Default for Bdd {
    fn default() -> Self {
        Self::new()
    }
}

impl Bdd {
    pub fn new() -> Self {
        let terminal = Node {
            var: u32::MAX,
            lo: 0,
            hi: 0,
        };
        Bdd {
            nodes: alloc::vec![
                terminal,
                Node {
                    hi: 1,
                    lo: 1,
                    ..terminal
                }
            ],
            unique: BTreeMap::new(),
            memo: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn mk(&mut self, var: u32, lo: NodeId, hi: NodeId) -> NodeId {
        if lo == hi {
            return lo;
        }
        let node = Node { var, lo, hi };
        if let Some(&id) = self.unique.get(&node) {
            return id;
        }
        let id = self.nodes.len() as NodeId;
        self.nodes.push(node);
        self.unique.insert(node, id);
        id
    }

    pub fn var(&mut self, v: u32) -> NodeId {
        self.mk(v, FALSE, TRUE)
    }

    fn top(&self, n: NodeId) -> u32 {
        self.nodes[n as usize].var
    }

    pub fn not(&mut self, n: NodeId) -> NodeId {
        match n {
            FALSE => TRUE,
            TRUE => FALSE,
            _ => {
                let Node { var, lo, hi } = self.nodes[n as usize];
                let (lo, hi) = (self.not(lo), self.not(hi));
                self.mk(var, lo, hi)
            }
        }
    }

    pub fn and(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.apply(Op::And, a, b)
    }

    pub fn or(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.apply(Op::Or, a, b)
    }

    fn apply(&mut self, op: Op, a: NodeId, b: NodeId) -> NodeId {
        match (op, a, b) {
            (Op::And, FALSE, _) | (Op::And, _, FALSE) => return FALSE,
            (Op::And, TRUE, x) | (Op::And, x, TRUE) => return x,
            (Op::Or, TRUE, _) | (Op::Or, _, TRUE) => return TRUE,
            (Op::Or, FALSE, x) | (Op::Or, x, FALSE) => return x,
            _ if a == b => return a,
            _ => {}
        }
        let key = (op, a.min(b), a.max(b));
        if let Some(&r) = self.memo.get(&key) {
            return r;
        }
        let v = self.top(a).min(self.top(b));
        let split = |bdd: &Self, n: NodeId| {
            let node = bdd.nodes[n as usize];
            if node.var == v {
                (node.lo, node.hi)
            } else {
                (n, n)
            }
        };
        let (alo, ahi) = split(self, a);
        let (blo, bhi) = split(self, b);
        let lo = self.apply(op, alo, blo);
        let hi = self.apply(op, ahi, bhi);
        let r = self.mk(v, lo, hi);
        self.memo.insert(key, r);
        r
    }

    /// Truth under a total assignment.
    pub fn eval(&self, mut n: NodeId, assign: &dyn Fn(u32) -> bool) -> bool {
        while n > TRUE {
            let node = self.nodes[n as usize];
            n = if assign(node.var) { node.hi } else { node.lo };
        }
        n == TRUE
    }

    /// Truth under a partial assignment, if it is already determined.
    pub fn eval_partial(&self, n: NodeId, assign: &dyn Fn(u32) -> Option<bool>) -> Option<bool> {
        let mut memo = BTreeMap::new();
        self.partial(n, assign, &mut memo)
    }

    fn partial(
        &self,
        n: NodeId,
        assign: &dyn Fn(u32) -> Option<bool>,
        memo: &mut BTreeMap<NodeId, Option<bool>>,
    ) -> Option<bool> {
        match n {
            FALSE => return Some(false),
            TRUE => return Some(true),
            _ => {}
        }
        if let Some(&r) = memo.get(&n) {
            return r;
        }
        let node = self.nodes[n as usize];
        let r = match assign(node.var) {
            Some(true) => self.partial(node.hi, assign, memo),
            Some(false) => self.partial(node.lo, assign, memo),
            None => {
                let lo = self.partial(node.lo, assign, memo);
                let hi = self.partial(node.hi, assign, memo);
                if lo.is_some() && lo == hi {
                    lo
                } else {
                    None
                }
            }
        };
        memo.insert(n, r);
        r
    }

    /// Undecided variables that can still influence the result: those on
    /// some path from `n` consistent with the decided ones, in the order
    /// they are first met.
    pub fn relevant(&self, n: NodeId, assign: &dyn Fn(u32) -> Option<bool>) -> Vec<u32> {
        let mut out = Vec::new();
        let mut seen = BTreeMap::new();
        let mut stack = alloc::vec![n];
        while let Some(m) = stack.pop() {
            if m <= TRUE || seen.insert(m, ()).is_some() {
                continue;
            }
            let node = self.nodes[m as usize];
            match assign(node.var) {
                Some(true) => stack.push(node.hi),
                Some(false) => stack.push(node.lo),
                None => {
                    if !out.contains(&node.var) {
                        out.push(node.var);
                    }
                    stack.push(node.lo);
                    stack.push(node.hi);
                }
            }
        }
        out
    }

    /// Variables of the first undecided node on every path consistent
    /// with the partial assignment: the atoms to evaluate next when atoms
    /// are evaluated in diagram order.
    pub fn frontier(&self, n: NodeId, assign: &dyn Fn(u32) -> Option<bool>) -> Vec<u32> {
        let mut out = Vec::new();
        let mut seen = BTreeMap::new();
        let mut stack = alloc::vec![n];
        while let Some(m) = stack.pop() {
            if m <= TRUE || seen.insert(m, ()).is_some() {
                continue;
            }
            let node = self.nodes[m as usize];
            match assign(node.var) {
                Some(true) => stack.push(node.hi),
                Some(false) => stack.push(node.lo),
                None => {
                    if !out.contains(&node.var) {
                        out.push(node.var);
                    }
                }
            }
        }
        out
    }

    /// Nodes reachable from `n`, terminals included.
    pub fn size(&self, n: NodeId) -> usize {
        let mut seen = BTreeMap::new();
        let mut stack = alloc::vec![n];
        while let Some(m) = stack.pop() {
            if seen.insert(m, ()).is_none() && m > TRUE {
                let node = self.nodes[m as usize];
                stack.push(node.lo);
                stack.push(node.hi);
            }
        }
        seen.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_forms() {
        let mut b = Bdd::new();
        let x = b.var(0);
        let y = b.var(1);
        let nx = b.not(x);
        assert_eq!(b.or(x, nx), TRUE);
        assert_eq!(b.and(x, nx), FALSE);
        let xy = b.and(x, y);
        let yx = b.and(y, x);
        assert_eq!(xy, yx);
        let ny = b.not(y);
        let a = b.and(nx, y);
        let c = b.or(xy, a);
        assert_eq!(c, y);
        let nxy = b.not(xy);
        assert_eq!(b.not(nxy), xy);
        assert_eq!(b.and(y, ny), FALSE);
    }

    #[test]
    fn partial_evaluation_and_relevance() {
        let mut b = Bdd::new();
        let (x, y, z) = (b.var(0), b.var(1), b.var(2));
        // (x & y) | (!x & z)
        let nx = b.not(x);
        let l = b.and(x, y);
        let r = b.and(nx, z);
        let f = b.or(l, r);
        let none = |_| None;
        assert_eq!(b.eval_partial(f, &none), None);
        assert_eq!(b.relevant(f, &none), [0, 1, 2]);
        let yz = |v| if v == 0 { None } else { Some(true) };
        assert_eq!(b.eval_partial(f, &yz), Some(true));
        let xt = |v| (v == 0).then_some(true);
        assert_eq!(b.relevant(f, &xt), [1]);
        assert_eq!(b.frontier(f, &none), [0]);
        assert_eq!(b.frontier(f, &xt), [1]);
        let xf = |v| (v == 0).then_some(false);
        assert_eq!(b.frontier(f, &xf), [2]);
        assert!(b.eval(f, &|v| v != 2));
        assert!(!b.eval(f, &|v| v == 2 || v == 0));
        assert_eq!(b.size(f), 5);
    }
}
