//! tccp agents, their csLTL abstract semantics, and abstract diagnosis.
//!
//! [`faa`] maps an agent to a formula describing its behaviour given an
//! interpretation of process calls; [`fdd`] collects the bodies of each
//! process. [`diagnose`] checks `fdd(P)(S)(p) → S(p)` for every process: a
//! valid implication means the declaration is abstractly correct, otherwise
//! the countermodel is reported as a warning about possible incorrectness.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::constraint::{Constraint, ConstraintSystem, Variable};
use crate::exec::{self, Execution};
use crate::formula::{Formula, FormulaError};
use crate::tableau::{check_valid, Tableau, TableauError, TableauOptions, ValidOutcome};
use crate::trace::ConditionalTrace;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TccpError {
    #[error("call to undeclared process `{0}`")]
    UnresolvedCall(String),
    #[error("`{name}` is declared with {expected} parameters but used with {found}")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("no interpretation for process `{0}`")]
    UnboundProcess(String),
    #[error("the specification of `{0}` uses an existential quantifier")]
    SpecUsesExists(String),
    #[error("a choice needs at least one alternative")]
    EmptyChoice,
    #[error("parameters of `{0}` must be distinct")]
    RepeatedParameter(String),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Tableau(#[from] TableauError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Agent {
    Skip,
    Tell(Constraint),
    /// `Σ ask(cᵢ) → Aᵢ`
    Choice(Vec<(Constraint, Agent)>),
    /// `now c then A else B`
    Now(Constraint, Box<Agent>, Box<Agent>),
    Par(Box<Agent>, Box<Agent>),
    Hide(Variable, Box<Agent>),
    Call(String, Vec<Variable>),
}

impl Agent {
    pub fn par(a: Agent, b: Agent) -> Agent {
        Agent::Par(Box::new(a), Box::new(b))
    }

    pub fn now(c: Constraint, then: Agent, otherwise: Agent) -> Agent {
        Agent::Now(c, Box::new(then), Box::new(otherwise))
    }

    pub fn hide(x: Variable, a: Agent) -> Agent {
        Agent::Hide(x, Box::new(a))
    }

    fn visit(&self, f: &mut impl FnMut(&Agent)) {
        f(self);
        match self {
            Agent::Skip | Agent::Tell(_) | Agent::Call(..) => {}
            Agent::Choice(alts) => alts.iter().for_each(|(_, a)| a.visit(f)),
            Agent::Now(_, a, b) | Agent::Par(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Agent::Hide(_, a) => a.visit(f),
        }
    }

    pub fn constraints(&self) -> BTreeSet<Constraint> {
        let mut out = BTreeSet::new();
        self.visit(&mut |a| match a {
            Agent::Tell(c) | Agent::Now(c, ..) => {
                out.insert(c.clone());
            }
            Agent::Choice(alts) => out.extend(alts.iter().map(|(c, _)| c.clone())),
            _ => {}
        });
        out
    }
}

/// A process name with its arity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProcessId {
    pub name: String,
    pub arity: usize,
}

impl fmt::Display for ProcessId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

/// `p(x̄) :- A`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Declaration {
    pub name: String,
    pub params: Vec<Variable>,
    pub body: Agent,
}

impl Declaration {
    pub fn id(&self) -> ProcessId {
        ProcessId {
            name: self.name.clone(),
            arity: self.params.len(),
        }
    }
}

/// A set of declarations closed under calls.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Program {
    processes: BTreeMap<ProcessId, Vec<Declaration>>,
}

impl Program {
    pub fn new(decls: Vec<Declaration>) -> Result<Self, TccpError> {
        let mut processes: BTreeMap<ProcessId, Vec<Declaration>> = BTreeMap::new();
        for d in decls {
            let distinct: BTreeSet<_> = d.params.iter().collect();
            if distinct.len() != d.params.len() {
                return Err(TccpError::RepeatedParameter(d.name));
            }
            processes.entry(d.id()).or_default().push(d);
        }
        let program = Program { processes };
        for d in program.declarations() {
            let mut err = None;
            d.body.visit(&mut |a| match a {
                Agent::Call(name, args) if err.is_none() => err = program.resolve(name, args.len()).err(),
                Agent::Choice(alts) if alts.is_empty() => err = Some(TccpError::EmptyChoice),
                _ => {}
            });
            if let Some(e) = err {
                return Err(e);
            }
        }
        Ok(program)
    }

    fn resolve(&self, name: &str, arity: usize) -> Result<ProcessId, TccpError> {
        let id = ProcessId {
            name: name.to_string(),
            arity,
        };
        if self.processes.contains_key(&id) {
            return Ok(id);
        }
        match self.processes.keys().find(|k| k.name == name) {
            Some(k) => Err(TccpError::ArityMismatch {
                name: name.to_string(),
                expected: k.arity,
                found: arity,
            }),
            None => Err(TccpError::UnresolvedCall(name.to_string())),
        }
    }

    pub fn processes(&self) -> impl Iterator<Item = &ProcessId> {
        self.processes.keys()
    }

    pub fn declarations(&self) -> impl Iterator<Item = &Declaration> {
        self.processes.values().flatten()
    }

    pub fn bodies(&self, p: &ProcessId) -> &[Declaration] {
        self.processes.get(p).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_empty(&self) -> bool {
        self.processes.is_empty()
    }
}

/// Formals and formula for a process, e.g. `p(y) ↦ ◇(y=1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessFormula {
    pub params: Vec<Variable>,
    pub formula: Formula,
}

impl ProcessFormula {
    /// The formula with the formals replaced by `args`.
    pub fn instantiate(&self, args: &[Variable]) -> Result<Formula, FormulaError> {
        let map: BTreeMap<Variable, Variable> = self.params.iter().cloned().zip(args.iter().cloned()).collect();
        self.formula.substitute(&map)
    }
}

pub type Interpretation = BTreeMap<ProcessId, ProcessFormula>;

/// The abstract semantics of one agent under `interp`.
pub fn faa(agent: &Agent, interp: &Interpretation) -> Result<Formula, TccpError> {
    Ok(match agent {
        Agent::Skip => Formula::True,
        Agent::Tell(c) => Formula::next(Formula::atom(c.clone())),
        Agent::Choice(alts) => {
            let mut taken = Vec::new();
            let mut suspended = Vec::new();
            for (c, body) in alts {
                let guard = Formula::atom(c.clone());
                taken.push(Formula::and(guard.clone(), Formula::next(faa(body, interp)?)));
                suspended.push(Formula::not(guard));
            }
            Formula::or(Formula::disjunction(taken), Formula::conjunction(suspended))
        }
        Agent::Now(c, then, otherwise) => {
            let guard = Formula::atom(c.clone());
            Formula::or(
                Formula::and(guard.clone(), faa(then, interp)?),
                Formula::and(Formula::not(guard), faa(otherwise, interp)?),
            )
        }
        Agent::Par(a, b) => Formula::and(faa(a, interp)?, faa(b, interp)?),
        Agent::Hide(x, a) => Formula::exists(x.clone(), faa(a, interp)?),
        Agent::Call(name, args) => {
            let id = ProcessId {
                name: name.clone(),
                arity: args.len(),
            };
            let entry = interp
                .get(&id)
                .ok_or_else(|| TccpError::UnboundProcess(id.to_string()))?;
            Formula::next(entry.instantiate(args)?)
        }
    })
}

/// Per process, the disjunction of the semantics of its bodies, expressed
/// over the formals of its first declaration.
pub fn fdd(program: &Program, interp: &Interpretation) -> Result<Interpretation, TccpError> {
    let mut out = Interpretation::new();
    for p in program.processes() {
        let decls = program.bodies(p);
        let params = decls[0].params.clone();
        let mut disjuncts = Vec::new();
        for d in decls {
            let map: BTreeMap<Variable, Variable> = d.params.iter().cloned().zip(params.iter().cloned()).collect();
            disjuncts.push(faa(&d.body, interp)?.substitute(&map)?);
        }
        out.insert(
            p.clone(),
            ProcessFormula {
                params,
                formula: Formula::disjunction(disjuncts),
            },
        );
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub enum Diagnosis {
    Correct {
        tableau: Tableau,
    },
    /// The implication has a countermodel; the declaration may be incorrect.
    Warning {
        countermodel: ConditionalTrace,
        tableau: Tableau,
    },
}

impl Diagnosis {
    pub fn is_correct(&self) -> bool {
        matches!(self, Diagnosis::Correct { .. })
    }

    pub fn tableau(&self) -> &Tableau {
        match self {
            Diagnosis::Correct { tableau } | Diagnosis::Warning { tableau, .. } => tableau,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProcessDiagnosis {
    pub process: ProcessId,
    /// `fdd(P)(S)(p) → S(p)`
    pub implication: Formula,
    pub diagnosis: Diagnosis,
}

/// The specification must cover every process and be quantifier-free.
fn check_spec(program: &Program, spec: &Interpretation) -> Result<(), TccpError> {
    for p in program.processes() {
        let s = spec.get(p).ok_or_else(|| TccpError::UnboundProcess(p.to_string()))?;
        if s.formula.contains_exists() {
            return Err(TccpError::SpecUsesExists(p.to_string()));
        }
    }
    Ok(())
}

/// Express `spec`'s formula for `p` over the formals used by `fdd`.
fn spec_formula(program: &Program, spec: &Interpretation, p: &ProcessId) -> Result<Formula, TccpError> {
    Ok(spec[p].instantiate(&program.bodies(p)[0].params)?)
}

pub fn diagnose(
    program: &Program,
    spec: &Interpretation,
    cs: &dyn ConstraintSystem,
    opts: &TableauOptions,
    exec: Execution,
) -> Result<Vec<ProcessDiagnosis>, TccpError> {
    check_spec(program, spec)?;
    let semantics = fdd(program, spec)?;
    let ids: Vec<ProcessId> = program.processes().cloned().collect();
    exec::map(exec, &ids, |p| {
        let implication = Formula::implies(semantics[p].formula.clone(), spec_formula(program, spec, p)?);
        let diagnosis = match check_valid(&implication, cs, opts)? {
            ValidOutcome::Valid { tableau } => Diagnosis::Correct { tableau },
            ValidOutcome::NotValid { countermodel, tableau } => Diagnosis::Warning { countermodel, tableau },
        };
        Ok(ProcessDiagnosis {
            process: p.clone(),
            implication,
            diagnosis,
        })
    })
    .into_iter()
    .collect()
}

/// Replace every `∃x ψ` by `ψ` with `x` renamed to a name used nowhere in
/// `f`. The result entails `f`.
fn strip_exists(f: &Formula) -> Result<Formula, FormulaError> {
    let mut taken = f.all_vars();
    fn go(f: &Formula, taken: &mut BTreeSet<Variable>) -> Result<Formula, FormulaError> {
        Ok(match f {
            Formula::Exists(x, body) => {
                let fresh = x.primed_avoiding(|v| taken.contains(v));
                taken.insert(fresh.clone());
                go(&body.rename_free(x, &fresh)?, taken)?
            }
            Formula::Not(g) => Formula::not(go(g, taken)?),
            Formula::And(a, b) => Formula::and(go(a, taken)?, go(b, taken)?),
            Formula::Next(g) => Formula::next(go(g, taken)?),
            Formula::Until(a, b) => Formula::until(go(a, taken)?, go(b, taken)?),
            _ => f.clone(),
        })
    }
    go(f, &mut taken)
}

/// Heuristic check for behaviour the specification allows but the program
/// cannot produce: `S(p) → fdd(P)(S)(p)` with quantifiers instantiated to
/// fresh names. `true` means nothing uncovered was detected; `false` only
/// means the heuristic could not rule it out.
pub fn uncovered_hint(
    program: &Program,
    spec: &Interpretation,
    cs: &dyn ConstraintSystem,
    opts: &TableauOptions,
    exec: Execution,
) -> Result<Vec<(ProcessId, bool)>, TccpError> {
    check_spec(program, spec)?;
    let semantics = fdd(program, spec)?;
    let ids: Vec<ProcessId> = program.processes().cloned().collect();
    exec::map(exec, &ids, |p| {
        let reverse = Formula::implies(spec_formula(program, spec, p)?, strip_exists(&semantics[p].formula)?);
        Ok((p.clone(), check_valid(&reverse, cs, opts)?.is_valid()))
    })
    .into_iter()
    .collect()
}
