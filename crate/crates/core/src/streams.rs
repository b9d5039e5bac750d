//! Stream constraints `S=[c|S']` and their reduction to current-value
//! atoms `S~=c`.
//!
//! A stream variable names the rest of a list; `S=[c|S']` says the next
//! element is `c` and the remainder is `S'`. [`simplify`] rewrites every such
//! atom to a statement about the first name of the stream, so the tableau can
//! treat streams as mutable cells whose current value is overwritten by the
//! stream-aware next operator.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use thiserror::Error;

use crate::constraint::{Constraint, Fact, Variable};
use crate::formula::Formula;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StreamError {
    #[error("stream `{tail}` is the tail of both `{first}` and `{second}`")]
    DuplicateTail {
        tail: String,
        first: String,
        second: String,
    },
    #[error("stream dependencies form a cycle through `{0}`")]
    Cycle(String),
}

/// Pairs `(S, S')` meaning `S'` is the tail of `S`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StreamDeps {
    /// Keyed by tail; each tail has exactly one source.
    source_of: BTreeMap<Variable, Variable>,
}

impl StreamDeps {
    pub fn pairs(&self) -> BTreeSet<(Variable, Variable)> {
        self.source_of.iter().map(|(t, s)| (s.clone(), t.clone())).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.source_of.is_empty()
    }

    fn add(&mut self, source: &Variable, tail: &Variable) -> Result<(), StreamError> {
        match self.source_of.get(tail) {
            Some(prev) if prev != source => Err(StreamError::DuplicateTail {
                tail: tail.to_string(),
                first: prev.to_string(),
                second: source.to_string(),
            }),
            Some(_) => Ok(()),
            None => {
                self.source_of.insert(tail.clone(), source.clone());
                Ok(())
            }
        }
    }
}

/// Collect the tail links of every stream atom in `f`, under any connective.
pub fn dep(f: &Formula) -> Result<StreamDeps, StreamError> {
    let mut deps = StreamDeps::default();
    let mut result = Ok(());
    f.visit(&mut |g| {
        if let (Formula::Atom(c), Ok(())) = (g, &result) {
            for fact in c.facts() {
                if let Fact::StreamCons { stream, tail, .. } = fact {
                    if let Err(e) = deps.add(stream, tail) {
                        result = Err(e);
                    }
                }
            }
        }
    });
    result.map(|()| deps)
}

/// The first name of the stream `s` refers to.
pub fn head(s: &Variable, deps: &StreamDeps) -> Result<Variable, StreamError> {
    let mut cur = s;
    let mut steps = 0;
    while let Some(src) = deps.source_of.get(cur) {
        steps += 1;
        if steps > deps.source_of.len() {
            return Err(StreamError::Cycle(s.to_string()));
        }
        cur = src;
    }
    Ok(cur.clone())
}

/// `σ`: replace each `S'=[c|S'']` by `head(S')~=c`, using the dependencies
/// of the whole formula.
pub fn simplify(f: &Formula) -> Result<Formula, StreamError> {
    simplify_with(f, &dep(f)?)
}

/// `σ` under dependencies collected elsewhere, e.g. from several formulas
/// checked together.
pub fn simplify_with(f: &Formula, deps: &StreamDeps) -> Result<Formula, StreamError> {
    rewrite(f, deps)
}

fn rewrite(f: &Formula, deps: &StreamDeps) -> Result<Formula, StreamError> {
    Ok(match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom(c) => Formula::Atom(rewrite_constraint(c, deps)?),
        Formula::Not(g) => Formula::Not(Arc::new(rewrite(g, deps)?)),
        Formula::And(a, b) => Formula::And(Arc::new(rewrite(a, deps)?), Arc::new(rewrite(b, deps)?)),
        Formula::Exists(x, g) => Formula::Exists(x.clone(), Arc::new(rewrite(g, deps)?)),
        Formula::Next(g) => Formula::Next(Arc::new(rewrite(g, deps)?)),
        Formula::Until(a, b) => Formula::Until(Arc::new(rewrite(a, deps)?), Arc::new(rewrite(b, deps)?)),
    })
}

fn rewrite_constraint(c: &Constraint, deps: &StreamDeps) -> Result<Constraint, StreamError> {
    let Constraint::Facts(facts) = c else {
        return Ok(c.clone());
    };
    if !facts.iter().any(|f| matches!(f, Fact::StreamCons { .. })) {
        return Ok(c.clone());
    }
    let mut out = BTreeSet::new();
    for fact in facts.iter() {
        out.insert(match fact {
            Fact::StreamCons {
                stream, head: value, ..
            } => Fact::StreamCur {
                stream: head(stream, deps)?,
                value: value.clone(),
            },
            other => other.clone(),
        });
    }
    Ok(Constraint::Facts(Arc::new(out)))
}
