//! Brute-force ground truth for testing the tableau.
//!
//! [`eval`] decides the satisfaction relation directly on ultimately
//! periodic traces, and [`enumerate_traces`] lists every small monotone
//! lasso over a fixed set of candidate stores, so that [`oracle_sat`] can
//! search for witnesses without any tableau machinery.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::constraint::{join_all, Constraint, ConstraintError, ConstraintSystem};
use crate::exec::{self, Execution};
use crate::formula::{Formula, FormulaError, FormulaSet};
use crate::trace::{CondState, ConditionalTrace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("the oracle does not evaluate existential formulas: `{0}`")]
    ExistsUnsupported(String),
    #[error("a lasso cycle must be non-empty")]
    EmptyCycle,
    #[error("end marker inside an infinite trace")]
    EndInLasso,
    #[error("enumeration would produce {count} traces, above the limit of {limit}")]
    Explosion { count: u128, limit: u128 },
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// `prefix · cycle^ω` with a non-empty cycle.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LassoTrace {
    prefix: Vec<CondState>,
    cycle: Vec<CondState>,
}

impl LassoTrace {
    pub fn new(prefix: Vec<CondState>, cycle: Vec<CondState>) -> Result<Self, OracleError> {
        if cycle.is_empty() {
            return Err(OracleError::EmptyCycle);
        }
        if prefix.iter().chain(&cycle).any(|s| *s == CondState::End) {
            return Err(OracleError::EndInLasso);
        }
        Ok(LassoTrace { prefix, cycle })
    }

    /// Finite traces are made infinite by replicating the last store
    /// `⟨c,∅,c⟩` forever (`⟨true,∅,true⟩` when there is none); anything after
    /// an end marker is ignored.
    pub fn from_trace(t: &ConditionalTrace) -> Result<Self, OracleError> {
        if !t.cycle.is_empty() {
            return LassoTrace::new(t.prefix.clone(), t.cycle.clone());
        }
        let prefix: Vec<CondState> = t.prefix.iter().take_while(|s| **s != CondState::End).cloned().collect();
        let last = prefix
            .iter()
            .rev()
            .find_map(CondState::store_constraint)
            .cloned()
            .unwrap_or(Constraint::True);
        LassoTrace::new(prefix, vec![CondState::store(last)])
    }

    pub fn prefix(&self) -> &[CondState] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[CondState] {
        &self.cycle
    }

    fn len(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    fn state(&self, i: usize) -> &CondState {
        if i < self.prefix.len() {
            &self.prefix[i]
        } else {
            &self.cycle[i - self.prefix.len()]
        }
    }

    fn succ(&self, i: usize) -> usize {
        if i + 1 < self.len() {
            i + 1
        } else {
            self.prefix.len()
        }
    }

    pub fn to_trace(&self) -> ConditionalTrace {
        ConditionalTrace::lasso(self.prefix.clone(), self.cycle.clone())
    }
}

impl std::fmt::Display for LassoTrace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.to_trace().fmt(f)
    }
}

/// Least fixpoint of `v[i] = now[i] || (keep[i] && v[succ i])`.
fn least_fixpoint(t: &LassoTrace, now: &[bool], keep: &[bool]) -> Vec<bool> {
    let n = t.len();
    let mut v = now.to_vec();
    loop {
        let mut changed = false;
        for i in (0..n).rev() {
            if !v[i] && keep[i] && v[t.succ(i)] {
                v[i] = true;
                changed = true;
            }
        }
        if !changed {
            return v;
        }
    }
}

/// Truth of `f` at every position of the lasso.
fn eval_all(t: &LassoTrace, f: &Formula, cs: &dyn ConstraintSystem) -> Result<Vec<bool>, OracleError> {
    let n = t.len();
    Ok(match f {
        Formula::True => vec![true; n],
        Formula::False => vec![false; n],
        Formula::Atom(c) => {
            let mut now = vec![false; n];
            let mut keep = vec![false; n];
            for i in 0..n {
                match t.state(i) {
                    CondState::CondStore { positive, .. } => now[i] = cs.entails(positive, c)?,
                    CondState::Stutt(negative) => {
                        let mut ok = true;
                        for d in negative {
                            ok &= !cs.entails(c, d)?;
                        }
                        keep[i] = ok;
                    }
                    CondState::End => return Err(OracleError::EndInLasso),
                }
            }
            least_fixpoint(t, &now, &keep)
        }
        Formula::Not(g) => eval_all(t, g, cs)?.into_iter().map(|b| !b).collect(),
        Formula::And(a, b) => {
            let (a, b) = (eval_all(t, a, cs)?, eval_all(t, b, cs)?);
            a.iter().zip(&b).map(|(x, y)| *x && *y).collect()
        }
        Formula::Next(g) => {
            let g = eval_all(t, g, cs)?;
            (0..n).map(|i| g[t.succ(i)]).collect()
        }
        Formula::Until(a, b) => {
            let (a, b) = (eval_all(t, a, cs)?, eval_all(t, b, cs)?);
            least_fixpoint(t, &b, &a)
        }
        Formula::Exists(..) => return Err(OracleError::ExistsUnsupported(f.to_string())),
    })
}

/// `t ⊨ f`.
pub fn eval(t: &LassoTrace, f: &Formula, cs: &dyn ConstraintSystem) -> Result<bool, OracleError> {
    Ok(eval_all(t, f, cs)?[0])
}

pub fn eval_set(t: &LassoTrace, phi: &FormulaSet, cs: &dyn ConstraintSystem) -> Result<bool, OracleError> {
    for f in phi {
        if !eval(t, f, cs)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub max_prefix: usize,
    pub max_cycle: usize,
    /// Refuse enumerations larger than this many traces.
    pub limit: u128,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_prefix: 4,
            max_cycle: 3,
            limit: 5_000_000,
        }
    }
}

/// Distinct consistent joins of subsets of `atoms`, `true` first.
pub fn candidate_stores(cs: &dyn ConstraintSystem, atoms: &[Constraint]) -> Result<Vec<Constraint>, OracleError> {
    let mut seen: BTreeSet<Constraint> = BTreeSet::from([Constraint::True]);
    let mut out = vec![Constraint::True];
    let mut frontier = vec![Constraint::True];
    // Closing under pairwise join with the atoms reaches every subset join.
    while let Some(c) = frontier.pop() {
        for a in atoms {
            let j = join_all(cs, [&c, a])?;
            if !cs.is_false(&j) && seen.insert(j.clone()) {
                out.push(j.clone());
                frontier.push(j);
            }
        }
    }
    Ok(out)
}

/// Every monotone lasso over the candidate stores with prefix length
/// `0..=max_prefix` and a constant-store cycle of length `1..=max_cycle`.
pub fn enumerate_traces(
    cs: &dyn ConstraintSystem,
    atoms: &[Constraint],
    bounds: &Bounds,
) -> Result<Vec<LassoTrace>, OracleError> {
    let stores = candidate_stores(cs, atoms)?;
    let k = stores.len();
    let mut up = vec![vec![false; k]; k];
    for (i, c) in stores.iter().enumerate() {
        for (j, d) in stores.iter().enumerate() {
            up[i][j] = cs.entails(d, c)?;
        }
    }
    // ends[i] = number of monotone prefixes of the current length ending in i.
    let mut ends: Vec<u128> = vec![1; k];
    let mut count: u128 = k as u128 * bounds.max_cycle as u128;
    for _ in 1..=bounds.max_prefix {
        let cycles: u128 = (0..k)
            .map(|i| ends[i] * (0..k).filter(|&j| up[i][j]).count() as u128)
            .sum();
        count += cycles * bounds.max_cycle as u128;
        ends = (0..k)
            .map(|j| (0..k).filter(|&i| up[i][j]).map(|i| ends[i]).sum())
            .collect();
    }
    if count > bounds.limit {
        return Err(OracleError::Explosion {
            count,
            limit: bounds.limit,
        });
    }

    let mut out = Vec::with_capacity(count as usize);
    let mut prefixes: Vec<Vec<usize>> = vec![Vec::new()];
    for len in 0..=bounds.max_prefix {
        for p in &prefixes {
            for s in 0..k {
                if p.last().is_some_and(|&l| !up[l][s]) {
                    continue;
                }
                for c in 1..=bounds.max_cycle {
                    out.push(LassoTrace {
                        prefix: p.iter().map(|&i| CondState::store(stores[i].clone())).collect(),
                        cycle: vec![CondState::store(stores[s].clone()); c],
                    });
                }
            }
        }
        if len < bounds.max_prefix {
            prefixes = prefixes
                .iter()
                .flat_map(|p| {
                    (0..k)
                        .filter(|&s| p.last().is_none_or(|&l| up[l][s]))
                        .map(|s| {
                            let mut q = p.clone();
                            q.push(s);
                            q
                        })
                        .collect::<Vec<_>>()
                })
                .collect();
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleVerdict {
    SatWitness(LassoTrace),
    NoWitnessWithinBound,
}

impl OracleVerdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, OracleVerdict::SatWitness(_))
    }
}

/// Split top-level conjunctions, drop double negations and replace `∃x φ`
/// by `φ` (renaming `x` apart from the other members when needed), as the
/// tableau's α and ∃ rules do. The result is satisfiable iff `phi` is, and
/// any trace satisfying it satisfies `phi`.
pub fn strip_top_exists(phi: &FormulaSet) -> Result<FormulaSet, OracleError> {
    let mut out: Vec<Formula> = phi.iter().cloned().collect();
    let mut i = 0;
    while i < out.len() {
        match out[i].clone() {
            Formula::Exists(x, body) => {
                let taken: BTreeSet<_> = out.iter().flat_map(|f| f.all_vars()).collect();
                let clash = out
                    .iter()
                    .enumerate()
                    .any(|(j, f)| j != i && f.free_vars().contains(&x));
                out[i] = if clash {
                    body.rename_free(&x, &x.primed_avoiding(|v| taken.contains(v)))?
                } else {
                    body.as_ref().clone()
                };
            }
            Formula::And(a, b) => {
                out[i] = a.as_ref().clone();
                out.push(b.as_ref().clone());
            }
            Formula::Not(g) if matches!(g.as_ref(), Formula::Not(_)) => {
                let Formula::Not(h) = g.as_ref() else { unreachable!() };
                out[i] = h.as_ref().clone();
            }
            _ => i += 1,
        }
    }
    Ok(out.into_iter().collect())
}

/// First enumerated trace satisfying all of `phi`.
pub fn oracle_sat(
    phi: &FormulaSet,
    cs: &dyn ConstraintSystem,
    atoms: &[Constraint],
    bounds: &Bounds,
    exec: Execution,
) -> Result<OracleVerdict, OracleError> {
    let phi = strip_top_exists(phi)?;
    if phi.iter().any(Formula::contains_exists) {
        let f = phi.iter().find(|f| f.contains_exists()).unwrap();
        return Err(OracleError::ExistsUnsupported(f.to_string()));
    }
    let traces = enumerate_traces(cs, atoms, bounds)?;
    let hit = exec::find_first(exec, &traces, |t| match eval_set(t, &phi, cs) {
        Ok(true) => Some(Ok(())),
        Ok(false) => None,
        Err(e) => Some(Err(e)),
    });
    match hit {
        Some((i, Ok(()))) => Ok(OracleVerdict::SatWitness(traces[i].clone())),
        Some((_, Err(e))) => Err(e),
        None => Ok(OracleVerdict::NoWitnessWithinBound),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::{FiniteTableSystem, FlatSystem};

    fn y1() -> Constraint {
        FlatSystem.parse_atom("y=1").unwrap()
    }

    fn lasso(prefix: Vec<Constraint>, cycle: Constraint) -> LassoTrace {
        LassoTrace::new(
            prefix.into_iter().map(CondState::store).collect(),
            vec![CondState::store(cycle)],
        )
        .unwrap()
    }

    #[test]
    fn eventually_on_constant_trace() {
        let t = lasso(vec![], y1());
        assert!(eval(&t, &Formula::eventually(Formula::atom(y1())), &FlatSystem).unwrap());
    }

    #[test]
    fn always_fails_on_initial_true() {
        let t = lasso(vec![Constraint::True], y1());
        assert!(!eval(&t, &Formula::always(Formula::atom(y1())), &FlatSystem).unwrap());
        assert!(eval(&t, &Formula::next(Formula::always(Formula::atom(y1()))), &FlatSystem).unwrap());
    }

    #[test]
    fn atom_reads_positive_condition_not_store() {
        let s = CondState::CondStore {
            positive: Constraint::True,
            negative: vec![],
            store: y1(),
        };
        let t = LassoTrace::new(vec![], vec![s]).unwrap();
        assert!(!eval(&t, &Formula::atom(y1()), &FlatSystem).unwrap());
    }

    #[test]
    fn stutter_clause() {
        // stutt({y=1}) · ⟨y=1⟩^ω: y=1 ⊢ y=1, so the atom fails at the stutter.
        let t = LassoTrace::new(vec![CondState::Stutt(vec![y1()])], vec![CondState::store(y1())]).unwrap();
        assert!(!eval(&t, &Formula::atom(y1()), &FlatSystem).unwrap());
        let x5 = FlatSystem.parse_atom("x=5").unwrap();
        let t = LassoTrace::new(vec![CondState::Stutt(vec![x5])], vec![CondState::store(y1())]).unwrap();
        assert!(eval(&t, &Formula::atom(y1()), &FlatSystem).unwrap());
        // a cycle of stutters never reaches a store
        let t = LassoTrace::new(vec![], vec![CondState::Stutt(vec![])]).unwrap();
        assert!(!eval(&t, &Formula::atom(y1()), &FlatSystem).unwrap());
    }

    #[test]
    fn finite_traces_replicate_the_last_store() {
        let fin = ConditionalTrace::lasso(
            vec![
                CondState::store(Constraint::True),
                CondState::store(y1()),
                CondState::End,
            ],
            vec![],
        );
        let t = LassoTrace::from_trace(&fin).unwrap();
        assert_eq!(t, lasso(vec![Constraint::True, y1()], y1()));
        let empty = LassoTrace::from_trace(&ConditionalTrace::lasso(vec![CondState::End], vec![])).unwrap();
        assert_eq!(empty, lasso(vec![], Constraint::True));
    }

    #[test]
    fn exists_is_rejected() {
        let x = crate::constraint::Variable::new("x").unwrap();
        let f = Formula::exists(x, Formula::True);
        assert!(matches!(
            eval(&lasso(vec![], Constraint::True), &f, &FlatSystem),
            Err(OracleError::ExistsUnsupported(_))
        ));
    }

    #[test]
    fn single_atom_enumeration() {
        let cs = FiniteTableSystem::build(&["a"], &[], &[]).unwrap();
        let bounds = Bounds {
            max_prefix: 1,
            max_cycle: 1,
            ..Bounds::default()
        };
        let traces = enumerate_traces(&cs, &[Constraint::named("a")], &bounds).unwrap();
        assert_eq!(traces.len(), 5);
        let none = enumerate_traces(&cs, &[], &bounds).unwrap();
        assert!(none.iter().all(|t| t
            .prefix()
            .iter()
            .chain(t.cycle())
            .all(|s| *s == CondState::store(Constraint::True))));
    }

    #[test]
    fn explosion_guard() {
        let cs = FiniteTableSystem::build(&["a", "b"], &[], &[]).unwrap();
        let bounds = Bounds {
            max_prefix: 4,
            max_cycle: 3,
            limit: 10,
        };
        assert!(matches!(
            enumerate_traces(&cs, &[Constraint::named("a"), Constraint::named("b")], &bounds),
            Err(OracleError::Explosion { .. })
        ));
    }

    #[test]
    fn oracle_finds_next_witness() {
        let phi: FormulaSet = [Formula::and(
            Formula::not(Formula::atom(y1())),
            Formula::next(Formula::atom(y1())),
        )]
        .into_iter()
        .collect();
        let bounds = Bounds {
            max_prefix: 2,
            max_cycle: 1,
            ..Bounds::default()
        };
        let v = oracle_sat(&phi, &FlatSystem, &[y1()], &bounds, Execution::Sequential).unwrap();
        assert!(v.is_sat());
        let f: FormulaSet = [Formula::False].into_iter().collect();
        assert_eq!(
            oracle_sat(&f, &FlatSystem, &[y1()], &bounds, Execution::Parallel).unwrap(),
            OracleVerdict::NoWitnessWithinBound
        );
    }
}
