//! Parsing and session orchestration shared by the command-line tool.

mod report;
mod syntax;

use std::time::Instant;

use thiserror::Error;

use crate::constraint::{Constraint, ConstraintError, ConstraintSystem};
use crate::exec::{self, Execution};
use crate::formula::{Formula, FormulaSet};
use crate::oracle::{self, Bounds, LassoTrace, OracleError};
use crate::streams::{self, StreamError};
use crate::tableau::{check_sat, check_valid, SatOutcome, Tableau, TableauError, TableauOptions, ValidOutcome};
use crate::tccp::{self, Diagnosis, TccpError};
use crate::trace::ConditionalTrace;

pub use report::{OracleReport, Report, ResultReport, TableauStats};
pub use syntax::{parse_formula, parse_formulas, parse_program, parse_spec, ParseError};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error(transparent)]
    Tableau(#[from] TableauError),
    #[error(transparent)]
    Tccp(#[from] TccpError),
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{0}")]
    Usage(String),
}

impl SessionError {
    fn budget(&self) -> bool {
        matches!(
            self,
            SessionError::Tableau(TableauError::BudgetExceeded(_))
                | SessionError::Tccp(TccpError::Tableau(TableauError::BudgetExceeded(_)))
        )
    }

    /// 3 for an exhausted node budget, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        if self.budget() {
            3
        } else {
            2
        }
    }
}

/// What the property being checked came out as.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Holds,
    Fails,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Holds => 0,
            Status::Fails => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionConfig {
    pub stream_mode: bool,
    pub node_budget: usize,
    pub oracle_check: bool,
    pub oracle_bounds: Bounds,
    pub uncovered_hint: bool,
    pub exec: Execution,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            stream_mode: false,
            node_budget: TableauOptions::default().node_budget,
            oracle_check: false,
            oracle_bounds: Bounds::default(),
            uncovered_hint: false,
            exec: Execution::Parallel,
        }
    }
}

impl SessionConfig {
    pub fn tableau_options(&self) -> TableauOptions {
        TableauOptions {
            stream_mode: self.stream_mode,
            node_budget: self.node_budget,
            exhaustive: true,
        }
    }
}

pub struct Outcome {
    pub status: Status,
    pub report: Report,
    /// One tableau per checked formula or process, named as in the report.
    pub tableaux: Vec<(String, Tableau)>,
}

pub struct Session<'a> {
    cs: &'a dyn ConstraintSystem,
    config: SessionConfig,
}

impl<'a> Session<'a> {
    pub fn new(cs: &'a dyn ConstraintSystem, config: SessionConfig) -> Result<Self, SessionError> {
        if config.node_budget == 0 {
            return Err(SessionError::Usage("the node budget must be at least 1".into()));
        }
        Ok(Session { cs, config })
    }

    /// In stream mode, apply `σ` with the dependencies of all inputs together.
    fn prepare(&self, fs: Vec<Formula>) -> Result<Vec<Formula>, SessionError> {
        if !self.config.stream_mode {
            return Ok(fs);
        }
        let deps = streams::dep(&Formula::conjunction(fs.iter().cloned()))?;
        Ok(fs
            .iter()
            .map(|f| streams::simplify_with(f, &deps))
            .collect::<Result<_, _>>()?)
    }

    /// Is the set of formulas in `text` jointly satisfiable?
    pub fn sat(&self, text: &str) -> Result<Outcome, SessionError> {
        let start = Instant::now();
        let fs = self.prepare(parse_formulas(text, self.cs)?)?;
        let phi: FormulaSet = fs.iter().cloned().collect();
        let out = check_sat(&phi, self.cs, &self.config.tableau_options())?;
        let (status, verdict, witness) = match &out {
            SatOutcome::Sat { model, .. } => (Status::Holds, "sat", Some(model.clone())),
            SatOutcome::Unsat { .. } => (Status::Fails, "unsat", None),
        };
        let oracle = self
            .config
            .oracle_check
            .then(|| self.cross_check("input", &phi, witness.as_ref()));
        let name = "input".to_string();
        let result = ResultReport::new(
            &name,
            &Formula::conjunction(fs),
            verdict,
            witness.as_ref(),
            out.tableau(),
        );
        let report = Report::new("sat", verdict, vec![result], oracle.into_iter().collect(), None, start);
        Ok(Outcome {
            status,
            report,
            tableaux: vec![(name, out.tableau().clone())],
        })
    }

    /// Is every formula in `text` valid?
    pub fn valid(&self, text: &str) -> Result<Outcome, SessionError> {
        let start = Instant::now();
        let fs = self.prepare(parse_formulas(text, self.cs)?)?;
        if fs.is_empty() {
            return Err(SessionError::Usage("no formula to check".into()));
        }
        let opts = self.config.tableau_options();
        let outcomes = exec::map(self.config.exec, &fs, |f| check_valid(f, self.cs, &opts));
        let mut results = Vec::new();
        let mut oracles = Vec::new();
        let mut tableaux = Vec::new();
        let mut all = true;
        for (i, (f, out)) in fs.iter().zip(outcomes).enumerate() {
            let out = out?;
            let name = if fs.len() == 1 {
                "input".to_string()
            } else {
                format!("formula {}", i + 1)
            };
            let (verdict, witness) = match &out {
                ValidOutcome::Valid { .. } => ("valid", None),
                ValidOutcome::NotValid { countermodel, .. } => ("not_valid", Some(countermodel.clone())),
            };
            all &= out.is_valid();
            if self.config.oracle_check {
                let negated: FormulaSet = [Formula::not(f.clone())].into_iter().collect();
                oracles.push(self.cross_check(&name, &negated, witness.as_ref()));
            }
            results.push(ResultReport::new(&name, f, verdict, witness.as_ref(), out.tableau()));
            tableaux.push((name, out.tableau().clone()));
        }
        let (status, verdict) = if all {
            (Status::Holds, "valid")
        } else {
            (Status::Fails, "not_valid")
        };
        Ok(Outcome {
            status,
            report: Report::new("valid", verdict, results, oracles, None, start),
            tableaux,
        })
    }

    /// Check each declaration of `program` against `spec`.
    pub fn diagnose(&self, program: &str, spec: &str) -> Result<Outcome, SessionError> {
        let start = Instant::now();
        let program = parse_program(program, self.cs)?;
        let spec = parse_spec(spec, self.cs)?;
        let opts = self.config.tableau_options();
        let diags = tccp::diagnose(&program, &spec, self.cs, &opts, self.config.exec)?;
        let mut results = Vec::new();
        let mut oracles = Vec::new();
        let mut tableaux = Vec::new();
        let mut all = true;
        for d in &diags {
            let name = d.process.to_string();
            let (verdict, witness) = match &d.diagnosis {
                Diagnosis::Correct { .. } => ("correct", None),
                Diagnosis::Warning { countermodel, .. } => ("warning", Some(countermodel.clone())),
            };
            all &= d.diagnosis.is_correct();
            if self.config.oracle_check {
                let negated: FormulaSet = [Formula::not(d.implication.clone())].into_iter().collect();
                oracles.push(self.cross_check(&name, &negated, witness.as_ref()));
            }
            results.push(ResultReport::new(
                &name,
                &d.implication,
                verdict,
                witness.as_ref(),
                d.diagnosis.tableau(),
            ));
            tableaux.push((name, d.diagnosis.tableau().clone()));
        }
        let hint = if self.config.uncovered_hint {
            let hints = tccp::uncovered_hint(&program, &spec, self.cs, &opts, self.config.exec)?;
            Some(hints.into_iter().map(|(p, ok)| (p.to_string(), ok)).collect())
        } else {
            None
        };
        let (status, verdict) = if all {
            (Status::Holds, "correct")
        } else {
            (Status::Fails, "warning")
        };
        Ok(Outcome {
            status,
            report: Report::new("diagnose", verdict, results, oracles, hint, start),
            tableaux,
        })
    }

    /// Confirm a tableau verdict for `phi` by brute force: a witness must
    /// satisfy `phi`; without one, no bounded trace may satisfy it.
    fn cross_check(&self, name: &str, phi: &FormulaSet, witness: Option<&ConditionalTrace>) -> OracleReport {
        match self.cross_check_inner(phi, witness) {
            Ok(agrees) => OracleReport {
                name: name.to_string(),
                agreement: if agrees { "agree" } else { "disagree" }.to_string(),
                detail: None,
            },
            Err(e) => OracleReport {
                name: name.to_string(),
                agreement: "skipped".to_string(),
                detail: Some(e.to_string()),
            },
        }
    }

    fn cross_check_inner(&self, phi: &FormulaSet, witness: Option<&ConditionalTrace>) -> Result<bool, OracleError> {
        let stripped = oracle::strip_top_exists(phi)?;
        if let Some(f) = stripped.iter().find(|f| f.contains_exists()) {
            return Err(OracleError::ExistsUnsupported(f.to_string()));
        }
        match witness {
            Some(trace) => oracle::eval_set(&LassoTrace::from_trace(trace)?, &stripped, self.cs),
            None => {
                let atoms: Vec<Constraint> = stripped.atoms().into_iter().collect();
                let v = oracle::oracle_sat(&stripped, self.cs, &atoms, &self.config.oracle_bounds, self.config.exec)?;
                Ok(!v.is_sat())
            }
        }
    }
}
