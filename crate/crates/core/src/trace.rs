//! Conditional traces: the models csLTL formulas are evaluated on.

use std::fmt;

use serde::Serialize;

use crate::constraint::{Constraint, ConstraintError, ConstraintSystem};

/// One instant of a conditional trace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CondState {
    /// `⟨(η⁺, η⁻), c⟩`: the store must entail `positive` and none of
    /// `negative`; `store` is the information produced so far.
    CondStore {
        positive: Constraint,
        negative: Vec<Constraint>,
        store: Constraint,
    },
    Stutt(Vec<Constraint>),
    End,
}

impl CondState {
    /// `⟨c, ∅, c⟩`.
    pub fn store(c: Constraint) -> CondState {
        CondState::CondStore {
            positive: c.clone(),
            negative: Vec::new(),
            store: c,
        }
    }

    pub fn store_constraint(&self) -> Option<&Constraint> {
        match self {
            CondState::CondStore { store, .. } => Some(store),
            _ => None,
        }
    }
}

impl fmt::Display for CondState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let set = |cs: &[Constraint]| {
            if cs.is_empty() {
                "∅".to_string()
            } else {
                let inner: Vec<String> = cs.iter().map(|c| c.to_string()).collect();
                format!("{{{}}}", inner.join(", "))
            }
        };
        match self {
            CondState::CondStore {
                positive,
                negative,
                store,
            } => write!(f, "⟨{positive},{},{store}⟩", set(negative)),
            CondState::Stutt(cs) => write!(f, "stutt({})", set(cs)),
            CondState::End => f.write_str("⊠"),
        }
    }
}

/// A finite trace (`cycle` empty) or a lasso `prefix · cycle^ω`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize)]
pub struct ConditionalTrace {
    pub prefix: Vec<CondState>,
    pub cycle: Vec<CondState>,
}

impl ConditionalTrace {
    pub fn lasso(prefix: Vec<CondState>, cycle: Vec<CondState>) -> Self {
        ConditionalTrace { prefix, cycle }
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty() && self.cycle.is_empty()
    }

    pub fn states(&self) -> impl Iterator<Item = &CondState> {
        self.prefix.iter().chain(&self.cycle)
    }

    /// Later stores entail earlier ones, also across the cycle seam.
    pub fn is_monotone(&self, cs: &dyn ConstraintSystem) -> Result<bool, ConstraintError> {
        let stores: Vec<&Constraint> = self
            .states()
            .chain(self.cycle.first())
            .filter_map(CondState::store_constraint)
            .collect();
        for w in stores.windows(2) {
            if !cs.entails(w[1], w[0])? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// No store is false and no store entails one of its negative conditions.
    pub fn is_consistent(&self, cs: &dyn ConstraintSystem) -> Result<bool, ConstraintError> {
        for s in self.states() {
            if let CondState::CondStore { negative, store, .. } = s {
                cs.check(store)?;
                if cs.is_false(store) {
                    return Ok(false);
                }
                for n in negative {
                    if cs.entails(store, n)? {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

impl fmt::Display for ConditionalTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("ε");
        }
        let mut first = true;
        for s in &self.prefix {
            if !first {
                f.write_str("·")?;
            }
            first = false;
            write!(f, "{s}")?;
        }
        if !self.cycle.is_empty() {
            if !first {
                f.write_str("·")?;
            }
            if self.cycle.len() == 1 {
                write!(f, "{}^ω", self.cycle[0])?;
            } else {
                f.write_str("(")?;
                for (i, s) in self.cycle.iter().enumerate() {
                    if i > 0 {
                        f.write_str("·")?;
                    }
                    write!(f, "{s}")?;
                }
                f.write_str(")^ω")?;
            }
        }
        Ok(())
    }
}
