use std::collections::BTreeSet;
use std::sync::Arc;

use super::{Constraint, ConstraintError, ConstraintSystem, Fact, Variable};

/// Conjunctions of `x=v`, `S=[v|T]` and `S~=v` facts.
///
/// Entailment is fact inclusion. Two equalities binding the same variable to
/// different values are jointly inconsistent, so their join is `false`.
/// Stream facts never conflict with each other.
#[derive(Debug, Default, Clone, Copy)]
pub struct FlatSystem;

impl FlatSystem {
    pub fn new() -> Self {
        FlatSystem
    }

    fn normalize(facts: BTreeSet<Fact>) -> Constraint {
        if facts.is_empty() {
            return Constraint::True;
        }
        let mut prev: Option<(&Variable, &Arc<str>)> = None;
        // Eq facts sort first and by variable, so clashes are adjacent.
        for fact in &facts {
            if let Fact::Eq { var, value } = fact {
                if let Some((pv, pval)) = prev {
                    if pv == var && pval != value {
                        return Constraint::False;
                    }
                }
                prev = Some((var, value));
            }
        }
        Constraint::Facts(Arc::new(facts))
    }

    fn parse_fact(text: &str) -> Result<Fact, ConstraintError> {
        let malformed = || ConstraintError::MalformedAtom(text.to_string());
        let text = text.trim();
        if let Some((lhs, rhs)) = text.split_once("~=") {
            let stream = parse_var(lhs).ok_or_else(malformed)?;
            let value = parse_value(rhs).ok_or_else(malformed)?;
            return Ok(Fact::StreamCur { stream, value });
        }
        let (lhs, rhs) = text.split_once('=').ok_or_else(malformed)?;
        let var = parse_var(lhs).ok_or_else(malformed)?;
        let rhs = rhs.trim();
        if let Some(inner) = rhs.strip_prefix('[') {
            let inner = inner.strip_suffix(']').ok_or_else(malformed)?;
            let (head, tail) = inner.split_once('|').ok_or_else(malformed)?;
            return Ok(Fact::StreamCons {
                stream: var,
                head: parse_value(head).ok_or_else(malformed)?,
                tail: parse_var(tail).ok_or_else(malformed)?,
            });
        }
        Ok(Fact::Eq {
            var,
            value: parse_value(rhs).ok_or_else(malformed)?,
        })
    }
}

fn parse_var(text: &str) -> Option<Variable> {
    let text = text.trim();
    let mut chars = text.chars();
    let first = chars.next()?;
    if !(first.is_alphabetic() || first == '_') {
        return None;
    }
    if !chars.all(|c| c.is_alphanumeric() || c == '_' || c == '\'') {
        return None;
    }
    Variable::new(text).ok()
}

fn parse_value(text: &str) -> Option<Arc<str>> {
    let text = text.trim();
    if text.is_empty()
        || text
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '|' | '[' | ']' | ',' | '=' | '`'))
    {
        return None;
    }
    Some(Arc::from(text))
}

impl ConstraintSystem for FlatSystem {
    fn name(&self) -> &str {
        "flat"
    }

    fn owns(&self, c: &Constraint) -> bool {
        !matches!(c, Constraint::Named(_))
    }

    fn entails_owned(&self, c: &Constraint, d: &Constraint) -> bool {
        match (c, d) {
            (_, Constraint::True) | (Constraint::False, _) => true,
            (_, Constraint::False) | (Constraint::True, _) => false,
            (Constraint::Facts(cf), Constraint::Facts(df)) => df.is_subset(cf),
            _ => false,
        }
    }

    fn join_owned(&self, c: &Constraint, d: &Constraint) -> Constraint {
        match (c, d) {
            (Constraint::False, _) | (_, Constraint::False) => Constraint::False,
            (Constraint::True, x) | (x, Constraint::True) => x.clone(),
            (Constraint::Facts(cf), Constraint::Facts(df)) => {
                if df.is_subset(cf) {
                    return c.clone();
                }
                Self::normalize(cf.union(df).cloned().collect())
            }
            _ => Constraint::False,
        }
    }

    fn parse_atom(&self, text: &str) -> Result<Constraint, ConstraintError> {
        match text.trim() {
            "true" => return Ok(Constraint::True),
            "false" => return Ok(Constraint::False),
            _ => {}
        }
        let facts = text
            .split(',')
            .map(Self::parse_fact)
            .collect::<Result<BTreeSet<_>, _>>()?;
        Ok(Self::normalize(facts))
    }
}
