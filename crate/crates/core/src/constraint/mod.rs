//! Constraint systems: the entailment lattices that csLTL atoms live in.
//!
//! A [`ConstraintSystem`] interprets [`Constraint`] tokens. Two instances are
//! provided: [`FlatSystem`], which understands variable/value equalities and
//! stream constraints, and [`FiniteTableSystem`], a user-declared finite
//! lattice loaded from a small text format.

mod flat;
mod table;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};
use thiserror::Error;

pub use flat::FlatSystem;
pub use table::FiniteTableSystem;

/// A constraint-system variable. Names compare by exact string equality.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable(Arc<str>);

impl Variable {
    pub fn new(name: &str) -> Result<Self, ConstraintError> {
        if name.is_empty() {
            return Err(ConstraintError::EmptyVariable);
        }
        Ok(Variable(Arc::from(name)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// `x'`, `x''`, ... : the first primed variant of `self` not rejected by `taken`.
    pub fn primed_avoiding(&self, taken: impl Fn(&Variable) -> bool) -> Variable {
        let mut name = format!("{}'", self.0);
        loop {
            let candidate = Variable(Arc::from(name.as_str()));
            if !taken(&candidate) {
                return candidate;
            }
            name.push('\'');
        }
    }
}

impl fmt::Debug for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Variable {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

/// A primitive fact of the flat system.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Fact {
    /// `x=v`
    Eq { var: Variable, value: Arc<str> },
    /// `S=[v|T]`: `T` is the tail of stream `S`, whose head is `v`.
    StreamCons {
        stream: Variable,
        head: Arc<str>,
        tail: Variable,
    },
    /// `S~=v`: the current (last instantiated) value of stream `S` is `v`.
    StreamCur { stream: Variable, value: Arc<str> },
}

impl Fact {
    fn vars(&self, out: &mut BTreeSet<Variable>) {
        match self {
            Fact::Eq { var, .. } => {
                out.insert(var.clone());
            }
            Fact::StreamCons { stream, tail, .. } => {
                out.insert(stream.clone());
                out.insert(tail.clone());
            }
            Fact::StreamCur { stream, .. } => {
                out.insert(stream.clone());
            }
        }
    }

    fn rename(&self, from: &Variable, to: &Variable) -> Fact {
        let sub = |v: &Variable| if v == from { to.clone() } else { v.clone() };
        match self {
            Fact::Eq { var, value } => Fact::Eq {
                var: sub(var),
                value: value.clone(),
            },
            Fact::StreamCons { stream, head, tail } => Fact::StreamCons {
                stream: sub(stream),
                head: head.clone(),
                tail: sub(tail),
            },
            Fact::StreamCur { stream, value } => Fact::StreamCur {
                stream: sub(stream),
                value: value.clone(),
            },
        }
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fact::Eq { var, value } => write!(f, "{var}={value}"),
            Fact::StreamCons { stream, head, tail } => write!(f, "{stream}=[{head}|{tail}]"),
            Fact::StreamCur { stream, value } => write!(f, "{stream}~={value}"),
        }
    }
}

/// A constraint token. Which variants are meaningful depends on the owning
/// system: finite tables use `Named`, the flat system uses `Facts`; both use
/// `True` and `False`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constraint {
    True,
    False,
    Named(Arc<str>),
    /// Non-empty, consistent conjunction of primitive facts.
    Facts(Arc<BTreeSet<Fact>>),
}

impl Constraint {
    pub fn fact(fact: Fact) -> Constraint {
        Constraint::Facts(Arc::new(BTreeSet::from([fact])))
    }

    pub fn eq(var: &str, value: &str) -> Result<Constraint, ConstraintError> {
        Ok(Constraint::fact(Fact::Eq {
            var: Variable::new(var)?,
            value: Arc::from(value),
        }))
    }

    pub fn named(name: &str) -> Constraint {
        match name {
            "true" => Constraint::True,
            "false" => Constraint::False,
            _ => Constraint::Named(Arc::from(name)),
        }
    }

    pub fn vars(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        if let Constraint::Facts(facts) = self {
            for fact in facts.iter() {
                fact.vars(&mut out);
            }
        }
        out
    }

    pub fn rename(&self, from: &Variable, to: &Variable) -> Constraint {
        match self {
            Constraint::Facts(facts) => Constraint::Facts(Arc::new(facts.iter().map(|f| f.rename(from, to)).collect())),
            other => other.clone(),
        }
    }

    pub fn facts(&self) -> impl Iterator<Item = &Fact> {
        match self {
            Constraint::Facts(facts) => Some(facts.iter()),
            _ => None,
        }
        .into_iter()
        .flatten()
    }

    /// `(stream, value)` pairs of every `S~=v` fact.
    pub fn stream_currents(&self) -> impl Iterator<Item = (&Variable, &Arc<str>)> {
        self.facts().filter_map(|f| match f {
            Fact::StreamCur { stream, value } => Some((stream, value)),
            _ => None,
        })
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::True => f.write_str("true"),
            Constraint::False => f.write_str("false"),
            Constraint::Named(name) => f.write_str(name),
            Constraint::Facts(facts) => {
                for (i, fact) in facts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{fact}")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Debug for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{self}`")
    }
}

impl Serialize for Constraint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstraintError {
    #[error("constraint `{constraint}` does not belong to the {system} system")]
    Foreign { constraint: String, system: String },
    #[error("variable names must be non-empty")]
    EmptyVariable,
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("malformed atom `{0}`")]
    MalformedAtom(String),
    #[error("lattice law violated by ({c}, {d}, {e}): {reason}")]
    ClosureViolation {
        c: String,
        d: String,
        e: String,
        reason: String,
    },
    #[error("line {line}: {message}")]
    TableSyntax { line: usize, message: String },
}

/// The operations contract of a cylindric constraint system, minus
/// cylindrification. Instances are immutable and shareable across threads.
pub trait ConstraintSystem: Send + Sync + fmt::Debug {
    /// Human-readable name used in error messages.
    fn name(&self) -> &str;

    fn owns(&self, c: &Constraint) -> bool;

    /// `c ⊢ d` for constraints already known to belong to this system.
    fn entails_owned(&self, c: &Constraint, d: &Constraint) -> bool;

    /// `c ⊗ d` for constraints already known to belong to this system.
    fn join_owned(&self, c: &Constraint, d: &Constraint) -> Constraint;

    /// Resolve the text of a backtick-quoted formula atom.
    fn parse_atom(&self, text: &str) -> Result<Constraint, ConstraintError>;

    fn check(&self, c: &Constraint) -> Result<(), ConstraintError> {
        if self.owns(c) {
            Ok(())
        } else {
            Err(ConstraintError::Foreign {
                constraint: c.to_string(),
                system: self.name().to_string(),
            })
        }
    }

    fn entails(&self, c: &Constraint, d: &Constraint) -> Result<bool, ConstraintError> {
        self.check(c)?;
        self.check(d)?;
        Ok(self.entails_owned(c, d))
    }

    fn join(&self, c: &Constraint, d: &Constraint) -> Result<Constraint, ConstraintError> {
        self.check(c)?;
        self.check(d)?;
        Ok(self.join_owned(c, d))
    }

    fn true_c(&self) -> Constraint {
        Constraint::True
    }

    fn false_c(&self) -> Constraint {
        Constraint::False
    }

    fn vars(&self, c: &Constraint) -> BTreeSet<Variable> {
        c.vars()
    }

    fn rename(&self, c: &Constraint, from: &Variable, to: &Variable) -> Constraint {
        c.rename(from, to)
    }

    fn is_false(&self, c: &Constraint) -> bool {
        self.entails_owned(c, &Constraint::False)
    }
}

/// `⨂ cs` over a trait object; the empty join is `true`.
pub fn join_all<'a, S: ConstraintSystem + ?Sized>(
    cs: &S,
    constraints: impl IntoIterator<Item = &'a Constraint>,
) -> Result<Constraint, ConstraintError> {
    let mut acc = cs.true_c();
    for c in constraints {
        acc = cs.join(&acc, c)?;
    }
    Ok(acc)
}
