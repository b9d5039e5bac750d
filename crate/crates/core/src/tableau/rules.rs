//! Single-step tableau operations on labels.

use crate::constraint::{join_all, ConstraintSystem};
use crate::formula::{Class, Formula};
use crate::tableau::{Label, Rule, TableauError};

/// A label is inconsistent when it holds `φ` and `¬φ`, holds `false`, or the
/// join of its positive constraints is `false` or entails a negated one.
pub fn is_inconsistent(label: &Label, cs: &dyn ConstraintSystem) -> Result<bool, TableauError> {
    let formulas = label.formulas();
    let mut positives = Vec::new();
    let mut negatives = Vec::new();
    for f in formulas {
        if let Formula::Not(inner) = f {
            if formulas.contains(inner) {
                return Ok(true);
            }
        }
        if *f == Formula::False {
            return Ok(true);
        }
        if let Some(c) = f.positive_constraint() {
            positives.push(c);
        }
        if let Some(c) = f.negated_constraint() {
            negatives.push(c);
        }
    }
    let store = join_all(cs, &positives)?;
    if cs.is_false(&store) {
        return Ok(true);
    }
    for neg in &negatives {
        if cs.entails(&store, neg)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// R1 (`¬¬φ ⇒ φ`) or R2 (`φ1 ∧ φ2 ⇒ φ1, φ2`).
pub fn apply_alpha(label: &Label, f: &Formula) -> Result<(Label, Rule), TableauError> {
    label.require(f)?;
    let (parts, rule) = match f {
        Formula::Not(inner) => match inner.as_ref() {
            Formula::Not(g) => (vec![g.as_ref().clone()], Rule::R1),
            _ => return Err(TableauError::NotAlpha(f.to_string())),
        },
        Formula::And(a, b) => (vec![a.as_ref().clone(), b.as_ref().clone()], Rule::R2),
        _ => return Err(TableauError::NotAlpha(f.to_string())),
    };
    Ok((label.replace(f, parts, label.distinguished().cloned()), rule))
}

/// Outcome of a β-rule: the two children and which rule produced them.
#[derive(Debug, Clone)]
pub struct BetaSplit {
    pub left: Label,
    pub right: Label,
    pub rule: Rule,
}

/// R3–R6. `use_context` selects R6 and requires `f` to be the label's
/// distinguished eventuality.
pub fn apply_beta(label: &Label, f: &Formula, use_context: bool) -> Result<BetaSplit, TableauError> {
    label.require(f)?;
    let dist = label.distinguished().cloned();
    let not = |g: &Formula| Formula::not(g.clone());
    match f {
        Formula::Not(inner) if !use_context => match inner.as_ref() {
            Formula::And(a, b) => Ok(BetaSplit {
                left: label.replace(f, vec![not(a)], dist.clone()),
                right: label.replace(f, vec![not(b)], dist),
                rule: Rule::R3,
            }),
            Formula::Until(a, b) => Ok(BetaSplit {
                left: label.replace(f, vec![not(a), not(b)], dist.clone()),
                right: label.replace(
                    f,
                    vec![
                        a.as_ref().clone(),
                        not(b),
                        Formula::not(Formula::next(inner.as_ref().clone())),
                    ],
                    dist,
                ),
                rule: Rule::R4,
            }),
            _ => Err(TableauError::NotBeta(f.to_string())),
        },
        Formula::Until(a, b) if !use_context => Ok(BetaSplit {
            left: label.replace(f, vec![b.as_ref().clone()], dist.clone()),
            right: label.replace(f, vec![a.as_ref().clone(), not(b), Formula::next(f.clone())], dist),
            rule: Rule::R5,
        }),
        Formula::Until(a, b) => {
            if dist.as_ref() != Some(f) {
                return Err(TableauError::ContextOnNonDistinguished(f.to_string()));
            }
            let ctx = context(label.formulas().iter().filter(|g| *g != f));
            let guarded = if **a == Formula::True {
                ctx
            } else {
                Formula::and(ctx, a.as_ref().clone())
            };
            let unfolded = Formula::until(guarded, b.as_ref().clone());
            Ok(BetaSplit {
                left: label.replace(f, vec![b.as_ref().clone()], None),
                right: label.replace(
                    f,
                    vec![a.as_ref().clone(), not(b), Formula::next(unfolded.clone())],
                    Some(unfolded),
                ),
                rule: Rule::R6,
            })
        }
        _ => Err(TableauError::NotBeta(f.to_string())),
    }
}

/// `cntx(Γ) = ⋁_{γ∈Γ} ¬γ` with `¬¬γ` collapsed to `γ`. `true` members
/// contribute nothing.
pub fn context<'a>(gamma: impl IntoIterator<Item = &'a Formula>) -> Formula {
    Formula::disjunction(gamma.into_iter().filter(|g| **g != Formula::True).map(|g| match g {
        Formula::Not(inner) => inner.as_ref().clone(),
        other => Formula::not(other.clone()),
    }))
}

/// `∃x φ ⇒ φ`, renaming `x` to `fresh` only when `x` is free elsewhere in
/// the label.
pub fn apply_exists(label: &Label, f: &Formula, fresh: &crate::constraint::Variable) -> Result<Label, TableauError> {
    label.require(f)?;
    let Formula::Exists(x, body) = f else {
        return Err(TableauError::NotExists(f.to_string()));
    };
    if label.formulas().vars().contains(fresh) {
        return Err(TableauError::NonFreshVariable(fresh.to_string()));
    }
    let clash = label
        .formulas()
        .iter()
        .filter(|g| *g != f)
        .any(|g| g.free_vars().contains(x));
    let replacement = if clash {
        body.rename_free(x, fresh)?
    } else {
        body.as_ref().clone()
    };
    Ok(label.replace(f, vec![replacement], label.distinguished().cloned()))
}

/// Move an elementary label to the next instant: unwrap `Xφ`, turn `¬Xφ` into
/// `¬φ`, carry positive constraints forward, drop negated ones.
///
/// In stream mode an atom carrying `S~=c1` is only carried forward when the
/// label has no `X(S~=c2)` with `c2 ≠ c1`.
pub fn next_label(label: &Label, stream_mode: bool) -> Result<Label, TableauError> {
    let formulas = label.formulas();
    for f in formulas {
        if !f.is_elementary() {
            return Err(TableauError::NonElementary(f.to_string()));
        }
    }
    let overwritten = |atom: &crate::constraint::Constraint| {
        atom.stream_currents().any(|(stream, value)| {
            formulas.iter().any(|g| match g {
                Formula::Next(inner) => match inner.as_ref() {
                    Formula::Atom(c) => c.stream_currents().any(|(s2, v2)| s2 == stream && v2 != value),
                    _ => false,
                },
                _ => false,
            })
        })
    };
    let mut out = Vec::new();
    for f in formulas {
        match f {
            Formula::Next(inner) => out.push(inner.as_ref().clone()),
            Formula::Not(inner) => match inner.as_ref() {
                Formula::Next(g) => out.push(Formula::not(g.as_ref().clone())),
                Formula::True => out.push(f.clone()),
                _ => {}
            },
            Formula::Atom(c) => {
                if !(stream_mode && overwritten(c)) {
                    out.push(f.clone());
                }
            }
            Formula::False => out.push(Formula::False),
            _ => {}
        }
    }
    let dist = label
        .distinguished()
        .filter(|d| formulas.contains(&Formula::next((*d).clone())))
        .cloned();
    Ok(Label::with_distinguished(out, dist))
}

/// Deterministic choice of the next formula to expand: α first, then `∃`,
/// then the distinguished eventuality, then other β-formulas with
/// non-eventualities ahead of eventualities. `None` for elementary labels.
pub fn select_formula(label: &Label) -> Result<Option<Formula>, TableauError> {
    let mut first_exists = None;
    let mut first_beta = None;
    let mut first_eventuality = None;
    for f in label.formulas() {
        match f.classify()? {
            Class::AlphaFormula => return Ok(Some(f.clone())),
            Class::ExistsFormula => {
                first_exists.get_or_insert(f);
            }
            Class::BetaFormula if f.is_eventuality() => {
                first_eventuality.get_or_insert(f);
            }
            Class::BetaFormula => {
                first_beta.get_or_insert(f);
            }
            _ => {}
        }
    }
    if let Some(f) = first_exists {
        return Ok(Some(f.clone()));
    }
    if first_beta.is_some() || first_eventuality.is_some() {
        if let Some(d) = label.distinguished() {
            if label.formulas().contains(d) {
                return Ok(Some(d.clone()));
            }
        }
    }
    Ok(first_beta.or(first_eventuality).cloned())
}
