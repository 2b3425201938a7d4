//! Inner nodes of the monitor tree.

use alloc::vec::Vec;

use super::basic::{AtomTable, BasicMonitor};
use super::{bind, Asg, Ctx, MonitorError, TraceRef, Verdict};
use crate::formula::{Polarity, QuantifierBlock};

enum Kind {
    /// Instantiates block `depth` and delegates the rest to children.
    Inner {
        known: Vec<TraceRef>,
        children: Vec<Node>,
    },
    /// The last block (or none), with `flip` set when the block is
    /// existential and the basic monitor decides its negation.
    Basic { monitor: BasicMonitor, flip: bool },
}

pub(crate) struct Node {
    depth: usize,
    /// Whether this node monitors the negation of its sub-formula.
    negated: bool,
    asg: Asg,
    kind: Kind,
    verdict: Verdict,
    witness: Option<Asg>,
}

fn polarity(blocks: &[QuantifierBlock], depth: usize, negated: bool) -> Polarity {
    let p = blocks[depth].polarity;
    if negated {
        p.flip()
    } else {
        p
    }
}

impl Node {
    pub(crate) fn new(
        blocks: &[QuantifierBlock],
        table: &AtomTable,
        depth: usize,
        negated: bool,
        asg: Asg,
    ) -> Self {
        let kind = if depth + 1 >= blocks.len() {
            let (vars, source, flip) = match blocks.get(depth) {
                None => (Vec::new(), crate::formula::Source::Observation, false),
                Some(b) => (
                    b.vars.clone(),
                    b.source.clone(),
                    polarity(blocks, depth, negated) == Polarity::Exists,
                ),
            };
            // The basic monitor decides a universal block: the body itself,
            // or for an existential block the negated body.
            let root = table.root(negated != flip);
            Kind::Basic {
                monitor: BasicMonitor::new(table, vars, source, root, asg.clone()),
                flip,
            }
        } else {
            Kind::Inner {
                known: Vec::new(),
                children: Vec::new(),
            }
        };
        Node {
            depth,
            negated,
            asg,
            kind,
            verdict: Verdict::Unknown,
            witness: None,
        }
    }

    pub(crate) fn verdict(&self) -> Verdict {
        self.verdict
    }

    pub(crate) fn witness(&self) -> Option<&Asg> {
        self.witness.as_ref()
    }

    fn conclude(&mut self, v: Verdict, witness: Option<Asg>, ctx: &mut Ctx<'_>) -> Verdict {
        self.verdict = v;
        self.witness = witness;
        ctx.progress += 1;
        if let Kind::Inner { children, .. } = &mut self.kind {
            ctx.stats.nodes_alive -= children.len() as u64;
            children.clear();
        }
        v
    }

    pub(crate) fn step(&mut self, ctx: &mut Ctx<'_>) -> Result<Verdict, MonitorError> {
        if self.verdict != Verdict::Unknown {
            return Ok(self.verdict);
        }
        match &mut self.kind {
            Kind::Basic { monitor, flip } => {
                let v = monitor.step(ctx)?;
                let v = if *flip { v.negate() } else { v };
                if v != Verdict::Unknown {
                    let w = monitor.witness().cloned();
                    return Ok(self.conclude(v, w, ctx));
                }
                Ok(v)
            }
            Kind::Inner { known, children } => {
                let blocks = ctx.blocks;
                let block = &blocks[self.depth];
                let exists = polarity(blocks, self.depth, self.negated) == Polarity::Exists;
                let (new, closed) = ctx.fetch(&block.source, &self.asg, known.len())?;
                for t in new {
                    if known.len() >= ctx.config.give_up {
                        return Ok(self.conclude(Verdict::GaveUp, None, ctx));
                    }
                    ctx.stats.traces += 1;
                    known.push(t);
                    spawn(
                        children,
                        known,
                        &self.asg,
                        block,
                        self.depth,
                        self.negated != exists,
                        ctx,
                    );
                }
                let mut i = 0;
                while i < children.len() {
                    match children[i].step(ctx)? {
                        Verdict::False => {
                            let w = children[i]
                                .witness
                                .clone()
                                .or_else(|| Some(children[i].asg.clone()));
                            let v = if exists {
                                Verdict::True
                            } else {
                                Verdict::False
                            };
                            return Ok(self.conclude(v, w, ctx));
                        }
                        Verdict::GaveUp => return Ok(self.conclude(Verdict::GaveUp, None, ctx)),
                        Verdict::True => {
                            children.swap_remove(i);
                            ctx.stats.nodes_alive -= 1;
                            ctx.progress += 1;
                        }
                        Verdict::Unknown => i += 1,
                    }
                }
                if closed && children.is_empty() {
                    let v = if exists {
                        Verdict::False
                    } else {
                        Verdict::True
                    };
                    return Ok(self.conclude(v, None, ctx));
                }
                Ok(Verdict::Unknown)
            }
        }
    }
}

/// Children for every tuple over `known` that contains its last trace.
fn spawn(
    children: &mut Vec<Node>,
    known: &[TraceRef],
    asg: &Asg,
    block: &QuantifierBlock,
    depth: usize,
    negated: bool,
    ctx: &mut Ctx<'_>,
) {
    let k = block.vars.len();
    let newest = known.len() - 1;
    let mut tuple = alloc::vec![0usize; k];
    // Odometer over 0..=newest, skipping tuples without `newest`.
    loop {
        if tuple.contains(&newest) {
            let mut child_asg = asg.clone();
            for (v, &t) in block.vars.iter().zip(&tuple) {
                child_asg = bind(&child_asg, v.clone(), known[t].clone());
            }
            children.push(Node::new(
                ctx.blocks,
                ctx.table,
                depth + 1,
                negated,
                child_asg,
            ));
            ctx.stats.nodes += 1;
            ctx.stats.nodes_alive += 1;
            ctx.progress += 1;
        }
        let mut i = k;
        let carry = loop {
            if i == 0 {
                break true;
            }
            i -= 1;
            tuple[i] += 1;
            if tuple[i] <= newest {
                break false;
            }
            tuple[i] = 0;
        };
        if carry {
            break;
        }
    }
}
