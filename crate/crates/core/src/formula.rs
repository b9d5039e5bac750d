//! csLTL abstract syntax.
//!
//! Only the core connectives are represented; `∨`, `→`, `◇`, `□` and `W`
//! are constructors that expand on the spot. The one normalization applied
//! at construction is `¬¬(φ U ψ) ⇒ φ U ψ`, which keeps every eventuality
//! (including `¬□φ`) syntactically an `Until`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::constraint::{Constraint, Variable};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Constraint),
    Not(Arc<Formula>),
    And(Arc<Formula>, Arc<Formula>),
    Exists(Variable, Arc<Formula>),
    Next(Arc<Formula>),
    Until(Arc<Formula>, Arc<Formula>),
}

/// Rule-dispatch class of a core formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    TrueFalse,
    ConstraintFormula,
    NextFormula,
    AlphaFormula,
    BetaFormula,
    ExistsFormula,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("negated existential `{0}` is not supported")]
    UnsupportedNegatedExists(String),
    #[error("renaming {from} to {to} in `{formula}` would capture a variable")]
    Capture { from: String, to: String, formula: String },
}

impl Formula {
    pub fn atom(c: Constraint) -> Formula {
        Formula::Atom(c)
    }

    /// `¬f`, collapsing `¬¬(φ U ψ)` to `φ U ψ`.
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        if let Formula::Not(inner) = &f {
            if let Formula::Until(..) = inner.as_ref() {
                return inner.as_ref().clone();
            }
        }
        Formula::Not(Arc::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Arc::new(a), Arc::new(b))
    }

    pub fn exists(x: Variable, f: Formula) -> Formula {
        Formula::Exists(x, Arc::new(f))
    }

    pub fn next(f: Formula) -> Formula {
        Formula::Next(Arc::new(f))
    }

    pub fn until(a: Formula, b: Formula) -> Formula {
        Formula::Until(Arc::new(a), Arc::new(b))
    }

    /// `a ∨ b ≡ ¬(¬a ∧ ¬b)`
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::and(Formula::not(a), Formula::not(b)))
    }

    /// `a → b ≡ ¬a ∨ b`
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::or(Formula::not(a), b)
    }

    /// `◇f ≡ true U f`
    pub fn eventually(f: Formula) -> Formula {
        Formula::until(Formula::True, f)
    }

    /// `□f ≡ ¬◇¬f`
    pub fn always(f: Formula) -> Formula {
        Formula::not(Formula::eventually(Formula::not(f)))
    }

    /// `a W b ≡ (a U b) ∨ □a`
    pub fn weak_until(a: Formula, b: Formula) -> Formula {
        Formula::or(Formula::until(a.clone(), b), Formula::always(a))
    }

    /// Right-nested disjunction of `fs`; `false` when empty.
    pub fn disjunction(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let mut items: Vec<Formula> = fs.into_iter().collect();
        let Some(mut acc) = items.pop() else {
            return Formula::False;
        };
        while let Some(f) = items.pop() {
            acc = Formula::or(f, acc);
        }
        acc
    }

    /// Right-nested conjunction of `fs`; `true` when empty.
    pub fn conjunction(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let mut items: Vec<Formula> = fs.into_iter().collect();
        let Some(mut acc) = items.pop() else {
            return Formula::True;
        };
        while let Some(f) = items.pop() {
            acc = Formula::and(f, acc);
        }
        acc
    }

    pub fn classify(&self) -> Result<Class, FormulaError> {
        use Formula::*;
        Ok(match self {
            True | False => Class::TrueFalse,
            Atom(_) => Class::ConstraintFormula,
            Next(_) => Class::NextFormula,
            And(..) => Class::AlphaFormula,
            Exists(..) => Class::ExistsFormula,
            Until(..) => Class::BetaFormula,
            Not(inner) => match inner.as_ref() {
                True | False => Class::TrueFalse,
                Atom(_) => Class::ConstraintFormula,
                Next(_) => Class::NextFormula,
                Not(_) => Class::AlphaFormula,
                And(..) | Until(..) => Class::BetaFormula,
                Exists(..) => return Err(FormulaError::UnsupportedNegatedExists(self.to_string())),
            },
        })
    }

    /// Constraint, next, or truth-constant formula.
    pub fn is_elementary(&self) -> bool {
        matches!(
            self.classify(),
            Ok(Class::TrueFalse | Class::ConstraintFormula | Class::NextFormula)
        )
    }

    /// Truth constants and constraint formulas.
    pub fn is_constraint_like(&self) -> bool {
        matches!(self.classify(), Ok(Class::TrueFalse | Class::ConstraintFormula))
    }

    pub fn is_eventuality(&self) -> bool {
        let mut f = self;
        loop {
            match f {
                Formula::Until(..) => return true,
                Formula::Not(inner) => match inner.as_ref() {
                    Formula::Not(inner2) => f = inner2,
                    _ => return false,
                },
                _ => return false,
            }
        }
    }

    /// The right operand of an `Until`.
    pub fn until_goal(&self) -> Option<&Formula> {
        match self {
            Formula::Until(_, goal) => Some(goal),
            _ => None,
        }
    }

    /// Positive constraint of an atom, or `true` for `true`.
    pub fn positive_constraint(&self) -> Option<Constraint> {
        match self {
            Formula::Atom(c) => Some(c.clone()),
            Formula::True => Some(Constraint::True),
            Formula::Not(inner) if matches!(inner.as_ref(), Formula::False) => Some(Constraint::True),
            _ => None,
        }
    }

    /// Constraint `c` of a negated atom `¬c` (`¬true` counts as `¬true`).
    pub fn negated_constraint(&self) -> Option<Constraint> {
        match self {
            Formula::Not(inner) => match inner.as_ref() {
                Formula::Atom(c) => Some(c.clone()),
                Formula::True => Some(Constraint::True),
                _ => None,
            },
            Formula::False => Some(Constraint::True),
            _ => None,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Variable>, out: &mut BTreeSet<Variable>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(c) => out.extend(c.vars().into_iter().filter(|v| !bound.contains(v))),
            Formula::Not(f) | Formula::Next(f) => f.collect_free(bound, out),
            Formula::And(a, b) | Formula::Until(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(x, f) => {
                bound.push(x.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn bound_vars(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Exists(x, _) = f {
                out.insert(x.clone());
            }
        });
        out
    }

    /// Every variable mentioned, free or bound.
    pub fn all_vars(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Atom(c) => out.extend(c.vars()),
            Formula::Exists(x, _) => {
                out.insert(x.clone());
            }
            _ => {}
        });
        out
    }

    pub fn atoms(&self) -> BTreeSet<Constraint> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Atom(c) = f {
                out.insert(c.clone());
            }
        });
        out
    }

    pub fn contains_exists(&self) -> bool {
        let mut found = false;
        self.visit(&mut |f| found |= matches!(f, Formula::Exists(..)));
        found
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => {}
            Formula::Not(g) | Formula::Next(g) | Formula::Exists(_, g) => g.visit(f),
            Formula::And(a, b) | Formula::Until(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    /// Capture-avoiding substitution of `from` by `to` in free positions.
    pub fn rename_free(&self, from: &Variable, to: &Variable) -> Result<Formula, FormulaError> {
        if from == to {
            return Ok(self.clone());
        }
        if self.free_vars().contains(to) || self.bound_vars().contains(to) {
            return Err(FormulaError::Capture {
                from: from.to_string(),
                to: to.to_string(),
                formula: self.to_string(),
            });
        }
        let map = BTreeMap::from([(from.clone(), to.clone())]);
        self.substitute(&map)
    }

    /// Simultaneous substitution of free variables. Fails if a target variable
    /// would land under a binder of the same name.
    pub fn substitute(&self, map: &BTreeMap<Variable, Variable>) -> Result<Formula, FormulaError> {
        if map.iter().all(|(k, v)| k == v) {
            return Ok(self.clone());
        }
        self.subst_inner(map, &mut Vec::new())
    }

    fn subst_inner(
        &self,
        map: &BTreeMap<Variable, Variable>,
        bound: &mut Vec<Variable>,
    ) -> Result<Formula, FormulaError> {
        Ok(match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(c) => {
                let mut out = c.clone();
                let vars = c.vars();
                // Two passes through fresh placeholders keep swaps like {x↦y, y↦x} simultaneous.
                let active: Vec<(&Variable, &Variable)> = map
                    .iter()
                    .filter(|(k, v)| k != v && vars.contains(*k) && !bound.contains(*k))
                    .collect();
                for (k, v) in &active {
                    if bound.contains(*v) {
                        return Err(FormulaError::Capture {
                            from: k.to_string(),
                            to: v.to_string(),
                            formula: self.to_string(),
                        });
                    }
                }
                let temps: Vec<Variable> = active
                    .iter()
                    .enumerate()
                    .map(|(i, _)| Variable::new(&format!("\u{0}{i}")).expect("non-empty"))
                    .collect();
                for ((k, _), t) in active.iter().zip(&temps) {
                    out = out.rename(k, t);
                }
                for ((_, v), t) in active.iter().zip(&temps) {
                    out = out.rename(t, v);
                }
                Formula::Atom(out)
            }
            Formula::Not(f) => Formula::not(f.subst_inner(map, bound)?),
            Formula::Next(f) => Formula::next(f.subst_inner(map, bound)?),
            Formula::And(a, b) => Formula::and(a.subst_inner(map, bound)?, b.subst_inner(map, bound)?),
            Formula::Until(a, b) => Formula::until(a.subst_inner(map, bound)?, b.subst_inner(map, bound)?),
            Formula::Exists(x, f) => {
                bound.push(x.clone());
                let body = f.subst_inner(map, bound);
                bound.pop();
                Formula::exists(x.clone(), body?)
            }
        })
    }

    /// Rebuild through the smart constructors. Idempotent.
    pub fn normalize(&self) -> Formula {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => self.clone(),
            Formula::Not(f) => Formula::not(f.normalize()),
            Formula::Next(f) => Formula::next(f.normalize()),
            Formula::And(a, b) => Formula::and(a.normalize(), b.normalize()),
            Formula::Until(a, b) => Formula::until(a.normalize(), b.normalize()),
            Formula::Exists(x, f) => Formula::exists(x.clone(), f.normalize()),
        }
    }

    /// Maximum nesting of `X` and `U`.
    pub fn temporal_depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 0,
            Formula::Not(f) | Formula::Exists(_, f) => f.temporal_depth(),
            Formula::Next(f) => 1 + f.temporal_depth(),
            Formula::And(a, b) => a.temporal_depth().max(b.temporal_depth()),
            Formula::Until(a, b) => 1 + a.temporal_depth().max(b.temporal_depth()),
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// Unicode rendering in the usual logic notation, for diagrams.
    pub fn pretty(&self) -> Pretty<'_> {
        Pretty(self)
    }

    /// Structure with every atom erased, for comparing temporal skeletons.
    pub fn skeleton(&self) -> Formula {
        match self {
            Formula::Atom(_) => Formula::Atom(Constraint::True),
            Formula::True | Formula::False => self.clone(),
            Formula::Not(f) => Formula::Not(Arc::new(f.skeleton())),
            Formula::Next(f) => Formula::Next(Arc::new(f.skeleton())),
            Formula::And(a, b) => Formula::And(Arc::new(a.skeleton()), Arc::new(b.skeleton())),
            Formula::Until(a, b) => Formula::Until(Arc::new(a.skeleton()), Arc::new(b.skeleton())),
            Formula::Exists(x, f) => Formula::Exists(x.clone(), Arc::new(f.skeleton())),
        }
    }
}

enum Sugar<'a> {
    Always(&'a Formula),
    Eventually(&'a Formula),
    Or(&'a Formula, &'a Formula),
}

fn sugar(f: &Formula) -> Option<Sugar<'_>> {
    match f {
        Formula::Until(a, b) if **a == Formula::True => Some(Sugar::Eventually(b)),
        Formula::Not(inner) => match inner.as_ref() {
            Formula::Until(a, b) if **a == Formula::True => match b.as_ref() {
                Formula::Not(g) => Some(Sugar::Always(g)),
                _ => None,
            },
            Formula::And(a, b) => match (a.as_ref(), b.as_ref()) {
                (Formula::Not(l), Formula::Not(r)) => Some(Sugar::Or(l, r)),
                _ => None,
            },
            _ => None,
        },
        _ => None,
    }
}

/// Concrete syntax, accepted back by the formula parser.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match sugar(self) {
            Some(Sugar::Always(g)) => return write!(f, "G {g}"),
            Some(Sugar::Eventually(g)) => return write!(f, "F {g}"),
            Some(Sugar::Or(a, b)) => return write!(f, "({a} | {b})"),
            None => {}
        }
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Atom(c) => write!(f, "`{c}`"),
            Formula::Not(g) => write!(f, "~{g}"),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Exists(x, g) => write!(f, "E {x}. {g}"),
            Formula::Next(g) => write!(f, "X {g}"),
            Formula::Until(a, b) => write!(f, "({a} U {b})"),
        }
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub struct Pretty<'a>(&'a Formula);

impl fmt::Display for Pretty<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = |g: &Formula| Pretty(g).to_string();
        let atomic = |g: &Formula| {
            matches!(g, Formula::True | Formula::False | Formula::Atom(_))
                || matches!(g, Formula::Not(i) if matches!(i.as_ref(), Formula::Atom(_)))
        };
        // Binary operands and unary operands get parentheses unless atomic.
        let wrap = |g: &Formula| {
            let s = p(g);
            let prefix = matches!(g, Formula::Next(_) | Formula::Exists(..))
                || matches!(sugar(g), Some(Sugar::Always(_) | Sugar::Eventually(_)));
            if atomic(g) || prefix {
                s
            } else {
                format!("({s})")
            }
        };
        match sugar(self.0) {
            Some(Sugar::Always(g)) => return write!(f, "□{}", wrap(g)),
            Some(Sugar::Eventually(g)) => return write!(f, "◇{}", wrap(g)),
            Some(Sugar::Or(a, b)) => return write!(f, "{} ∨ {}", wrap(a), wrap(b)),
            None => {}
        }
        match self.0 {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Atom(c) => write!(f, "{c}"),
            Formula::Not(g) => write!(f, "¬{}", wrap(g)),
            Formula::And(a, b) => write!(f, "{} ∧ {}", wrap(a), wrap(b)),
            Formula::Exists(x, g) => write!(f, "∃{x} {}", wrap(g)),
            Formula::Next(g) => write!(f, "X{}", wrap(g)),
            Formula::Until(a, b) => write!(f, "{} U {}", wrap(a), wrap(b)),
        }
    }
}

/// Canonically ordered, duplicate-free collection of formulas.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FormulaSet(BTreeSet<Formula>);

impl FormulaSet {
    pub fn new() -> Self {
        FormulaSet(BTreeSet::new())
    }

    /// Returns false if a structurally equal formula was already present.
    pub fn insert(&mut self, f: Formula) -> bool {
        self.0.insert(f)
    }

    pub fn remove(&mut self, f: &Formula) -> bool {
        self.0.remove(f)
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.0.contains(f)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Formula> {
        self.0.iter()
    }

    pub fn vars(&self) -> BTreeSet<Variable> {
        self.0.iter().flat_map(Formula::all_vars).collect()
    }

    pub fn free_vars(&self) -> BTreeSet<Variable> {
        self.0.iter().flat_map(Formula::free_vars).collect()
    }

    pub fn atoms(&self) -> BTreeSet<Constraint> {
        self.0.iter().flat_map(Formula::atoms).collect()
    }
}

impl FromIterator<Formula> for FormulaSet {
    fn from_iter<I: IntoIterator<Item = Formula>>(iter: I) -> Self {
        FormulaSet(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a FormulaSet {
    type Item = &'a Formula;
    type IntoIter = std::collections::btree_set::Iter<'a, Formula>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Debug for FormulaSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

impl fmt::Display for FormulaSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, g) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", g.pretty())?;
        }
        f.write_str("}")
    }
}
