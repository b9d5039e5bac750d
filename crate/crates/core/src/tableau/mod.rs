//! Systematic csLTL tableaux.
//!
//! [`build_tableau`] grows a tree of [`Label`]s by the α/β/∃ rules and the
//! constraint-propagating next operator until every leaf is marked closed
//! (`×`) or open (`⊙`). Eventualities are unfolded with the context rule R6
//! when distinguished; the distinguished one is chosen round-robin per branch.

mod model;
mod render;
mod rules;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::constraint::{ConstraintError, ConstraintSystem};
use crate::formula::{Formula, FormulaError, FormulaSet};
use crate::trace::ConditionalTrace;

pub use model::{extract_model, stores};
pub use render::{to_dot, to_json, TableauJson};
pub use rules::{
    apply_alpha, apply_beta, apply_exists, context, is_inconsistent, next_label, select_formula, BetaSplit,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableauError {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error("`{0}` is not in the label")]
    NotInLabel(String),
    #[error("`{0}` is not an α-formula")]
    NotAlpha(String),
    #[error("`{0}` is not a β-formula")]
    NotBeta(String),
    #[error("`{0}` is not an existential formula")]
    NotExists(String),
    #[error("the context rule applies only to the distinguished eventuality, not `{0}`")]
    ContextOnNonDistinguished(String),
    #[error("variable `{0}` is not fresh for the label")]
    NonFreshVariable(String),
    #[error("next operator applied to non-elementary formula `{0}`")]
    NonElementary(String),
    #[error("node budget of {0} exceeded")]
    BudgetExceeded(usize),
    #[error("node {0} does not end an open branch")]
    BranchNotOpen(usize),
    #[error("cycle between nodes {ancestor} and {leaf} spans no next step")]
    DegenerateCycle { ancestor: usize, leaf: usize },
}

/// A node label: a formula set with at most one distinguished eventuality.
///
/// The distinguished formula is an `Until` that occurs either directly in the
/// set or wrapped as `X(·)` right after an R6 step.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    formulas: FormulaSet,
    distinguished: Option<Formula>,
}

impl Label {
    pub fn new(formulas: impl IntoIterator<Item = Formula>) -> Self {
        Label {
            formulas: formulas.into_iter().collect(),
            distinguished: None,
        }
    }

    /// The mark is dropped if it is not an `Until` present (possibly under `X`).
    pub fn with_distinguished(formulas: impl IntoIterator<Item = Formula>, distinguished: Option<Formula>) -> Self {
        let formulas: FormulaSet = formulas.into_iter().collect();
        let distinguished = distinguished.filter(|d| {
            matches!(d, Formula::Until(..)) && (formulas.contains(d) || formulas.contains(&Formula::next(d.clone())))
        });
        Label {
            formulas,
            distinguished,
        }
    }

    pub fn formulas(&self) -> &FormulaSet {
        &self.formulas
    }

    pub fn distinguished(&self) -> Option<&Formula> {
        self.distinguished.as_ref()
    }

    fn require(&self, f: &Formula) -> Result<(), TableauError> {
        if self.formulas.contains(f) {
            Ok(())
        } else {
            Err(TableauError::NotInLabel(f.to_string()))
        }
    }

    fn replace(&self, f: &Formula, with: Vec<Formula>, distinguished: Option<Formula>) -> Label {
        let mut formulas = self.formulas.clone();
        formulas.remove(f);
        for g in with {
            formulas.insert(g);
        }
        Label::with_distinguished(formulas.iter().cloned(), distinguished)
    }

    fn distinguish(&self, f: &Formula) -> Label {
        Label::with_distinguished(self.formulas.iter().cloned(), Some(f.clone()))
    }

    /// Only truth constants and constraint formulas.
    pub fn is_all_constraints(&self) -> bool {
        self.formulas.iter().all(Formula::is_constraint_like)
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.formulas)?;
        if let Some(d) = &self.distinguished {
            write!(f, " [{}]", d.pretty())?;
        }
        Ok(())
    }
}

/// The step that produced a node from its parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Rule {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    Exists,
    NextStep,
}

impl Rule {
    /// Edge label in the figure convention: α, β, ∃ or X.
    pub fn edge_label(self) -> &'static str {
        match self {
            Rule::R1 | Rule::R2 => "α",
            Rule::R3 | Rule::R4 | Rule::R5 | Rule::R6 => "β",
            Rule::Exists => "∃",
            Rule::NextStep => "X",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mark {
    Unmarked,
    Closed,
    /// Open because the label holds only constraint formulas.
    Open,
    /// Open because the label repeats `ancestor`'s and every eventuality on
    /// the loop is fulfilled.
    OpenCycle {
        ancestor: usize,
    },
}

impl Mark {
    pub fn is_open(self) -> bool {
        matches!(self, Mark::Open | Mark::OpenCycle { .. })
    }
}

#[derive(Debug, Clone)]
pub struct TableauNode {
    pub id: usize,
    pub label: Label,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub mark: Mark,
    /// Rule that produced this node from its parent.
    pub rule: Option<Rule>,
    /// Formula expanded at this node, if a rule was applied to it.
    pub selected: Option<Formula>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Closed,
    /// Carries the leaf of the first open branch found.
    Open {
        witness: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableauOptions {
    /// Use the stream-aware next operator.
    pub stream_mode: bool,
    pub node_budget: usize,
    /// Keep expanding after the first open branch instead of stopping.
    pub exhaustive: bool,
}

impl Default for TableauOptions {
    fn default() -> Self {
        TableauOptions {
            stream_mode: false,
            node_budget: 1_000_000,
            exhaustive: true,
        }
    }
}

/// A contiguous run of nodes on a branch between two next steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage {
    pub nodes: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Tableau {
    nodes: Vec<TableauNode>,
    verdict: Verdict,
}

impl Tableau {
    pub fn root(&self) -> &TableauNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: usize) -> &TableauNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[TableauNode] {
        &self.nodes
    }

    pub fn verdict(&self) -> Verdict {
        self.verdict
    }

    pub fn is_closed(&self) -> bool {
        self.verdict == Verdict::Closed
    }

    pub fn leaves(&self) -> impl Iterator<Item = &TableauNode> {
        self.nodes.iter().filter(|n| n.children.is_empty())
    }

    /// Root-to-node path.
    pub fn branch(&self, leaf: usize) -> Vec<usize> {
        let mut path = vec![leaf];
        let mut cur = leaf;
        while let Some(p) = self.nodes[cur].parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Maximal root-to-leaf paths, in node order of their leaves.
    pub fn branches(&self) -> Vec<Vec<usize>> {
        self.leaves().map(|l| self.branch(l.id)).collect()
    }

    /// Split a path into stages at next-step edges.
    pub fn stages(&self, path: &[usize]) -> Vec<Stage> {
        let mut out: Vec<Stage> = Vec::new();
        for &id in path {
            let starts = out.is_empty() || self.nodes[id].rule == Some(Rule::NextStep);
            if starts {
                out.push(Stage { nodes: vec![id] });
            } else if let Some(last) = out.last_mut() {
                last.nodes.push(id);
            }
        }
        out
    }

    /// `L(s) = ⋃ L(n)` over the nodes of `stage`.
    pub fn stage_label(&self, stage: &Stage) -> FormulaSet {
        stage
            .nodes
            .iter()
            .flat_map(|&n| self.nodes[n].label.formulas().iter().cloned())
            .collect()
    }
}

/// Per-branch round-robin over eventualities, keyed by their goal (right
/// operand) in first-appearance order.
#[derive(Debug, Clone, Default)]
struct Fairness {
    order: Arc<Vec<Formula>>,
    cursor: usize,
}

impl Fairness {
    fn observe(&self, label: &Label) -> Fairness {
        let mut order: Option<Vec<Formula>> = None;
        for f in label.formulas() {
            if let Some(goal) = f.until_goal() {
                let known = order.as_ref().unwrap_or(&self.order);
                if !known.contains(goal) {
                    order
                        .get_or_insert_with(|| self.order.as_ref().clone())
                        .push(goal.clone());
                }
            }
        }
        match order {
            Some(order) => Fairness {
                order: Arc::new(order),
                cursor: self.cursor,
            },
            None => self.clone(),
        }
    }

    /// Pick the eventuality whose key comes next after the cursor.
    fn choose<'a>(&self, label: &'a Label) -> Option<(&'a Formula, Fairness)> {
        let candidates: Vec<(&Formula, usize)> = label
            .formulas()
            .iter()
            .filter_map(|f| {
                let goal = f.until_goal()?;
                let key = self.order.iter().position(|g| g == goal)?;
                Some((f, key))
            })
            .collect();
        let n = self.order.len().max(1);
        let (f, key) = candidates
            .into_iter()
            .min_by_key(|&(_, key)| (key + n - self.cursor % n) % n)?;
        Some((
            f,
            Fairness {
                order: self.order.clone(),
                cursor: key + 1,
            },
        ))
    }
}

struct Builder<'a> {
    cs: &'a dyn ConstraintSystem,
    opts: TableauOptions,
    nodes: Vec<TableauNode>,
    fairness: Vec<Fairness>,
    /// Hash of each node's label, for cheap ancestor comparison.
    hashes: Vec<u64>,
}

fn label_hash(label: &Label) -> u64 {
    use std::hash::{Hash, Hasher};
    let mut h = std::collections::hash_map::DefaultHasher::new();
    label.hash(&mut h);
    h.finish()
}

impl<'a> Builder<'a> {
    fn push(
        &mut self,
        parent: Option<usize>,
        label: Label,
        rule: Option<Rule>,
        fair: Fairness,
    ) -> Result<usize, TableauError> {
        if self.nodes.len() >= self.opts.node_budget {
            return Err(TableauError::BudgetExceeded(self.opts.node_budget));
        }
        let id = self.nodes.len();
        let fair = fair.observe(&label);
        self.hashes.push(label_hash(&label));
        self.nodes.push(TableauNode {
            id,
            label,
            parent,
            children: Vec::new(),
            mark: Mark::Unmarked,
            rule,
            selected: None,
        });
        self.fairness.push(fair);
        if let Some(p) = parent {
            self.nodes[p].children.push(id);
        }
        Ok(id)
    }

    fn path(&self, leaf: usize) -> Vec<usize> {
        let mut path = vec![leaf];
        let mut cur = leaf;
        while let Some(p) = self.nodes[cur].parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Oldest ancestor with the same label, if the loop back to it fulfils
    /// every eventuality it contains.
    fn fulfilled_cycle(&self, leaf: usize) -> Option<usize> {
        let path = self.path(leaf);
        let label = &self.nodes[leaf].label;
        let hash = self.hashes[leaf];
        let start = path[..path.len() - 1]
            .iter()
            .position(|&n| self.hashes[n] == hash && self.nodes[n].label == *label)?;
        let segment = &path[start..];
        let crosses_instant = segment[1..].iter().any(|&n| self.nodes[n].rule == Some(Rule::NextStep));
        if !crosses_instant {
            return None;
        }
        let mut present: BTreeSet<&Formula> = BTreeSet::new();
        let mut goals: BTreeSet<&Formula> = BTreeSet::new();
        for &n in segment {
            for f in self.nodes[n].label.formulas() {
                present.insert(f);
                if let Some(goal) = f.until_goal() {
                    goals.insert(goal);
                }
            }
        }
        goals.iter().all(|g| present.contains(*g)).then_some(path[start])
    }

    fn expand(&mut self, id: usize, stack: &mut Vec<usize>) -> Result<(), TableauError> {
        let label = self.nodes[id].label.clone();
        if is_inconsistent(&label, self.cs)? {
            self.nodes[id].mark = Mark::Closed;
            return Ok(());
        }
        if label.is_all_constraints() {
            self.nodes[id].mark = Mark::Open;
            return Ok(());
        }
        if let Some(ancestor) = self.fulfilled_cycle(id) {
            self.nodes[id].mark = Mark::OpenCycle { ancestor };
            return Ok(());
        }
        let fair = self.fairness[id].clone();
        let Some(selected) = select_formula(&label)? else {
            let next = next_label(&label, self.opts.stream_mode)?;
            let child = self.push(Some(id), next, Some(Rule::NextStep), fair)?;
            stack.push(child);
            return Ok(());
        };
        let class = selected.classify()?;
        use crate::formula::Class;
        let children: Vec<(Label, Rule, Fairness)> = match class {
            Class::AlphaFormula => {
                let (child, rule) = apply_alpha(&label, &selected)?;
                vec![(child, rule, fair)]
            }
            Class::ExistsFormula => {
                let Formula::Exists(x, _) = &selected else {
                    unreachable!()
                };
                let taken = label.formulas().vars();
                let fresh = x.primed_avoiding(|v| taken.contains(v));
                vec![(apply_exists(&label, &selected, &fresh)?, Rule::Exists, fair)]
            }
            Class::BetaFormula if selected.is_eventuality() => {
                let (target, parent_label, fair) = match label.distinguished() {
                    Some(d) if *d == selected => (selected.clone(), label.clone(), fair),
                    Some(_) => {
                        let split = apply_beta(&label, &selected, false)?;
                        self.nodes[id].selected = Some(selected);
                        return self.push_split(id, split, fair, stack);
                    }
                    None => {
                        let (chosen, fair) = fair
                            .choose(&label)
                            .map(|(f, fair)| (f.clone(), fair))
                            .unwrap_or((selected.clone(), fair));
                        (chosen.clone(), label.distinguish(&chosen), fair)
                    }
                };
                self.nodes[id].label = parent_label.clone();
                self.hashes[id] = label_hash(&parent_label);
                let split = apply_beta(&parent_label, &target, true)?;
                self.nodes[id].selected = Some(target);
                return self.push_split(id, split, fair, stack);
            }
            Class::BetaFormula => {
                let split = apply_beta(&label, &selected, false)?;
                self.nodes[id].selected = Some(selected);
                return self.push_split(id, split, fair, stack);
            }
            Class::TrueFalse | Class::ConstraintFormula | Class::NextFormula => {
                unreachable!("select_formula only returns α, β and ∃ formulas")
            }
        };
        self.nodes[id].selected = Some(selected);
        for (child, rule, fair) in children {
            let c = self.push(Some(id), child, Some(rule), fair)?;
            stack.push(c);
        }
        Ok(())
    }

    fn push_split(
        &mut self,
        id: usize,
        split: BetaSplit,
        fair: Fairness,
        stack: &mut Vec<usize>,
    ) -> Result<(), TableauError> {
        let left = self.push(Some(id), split.left, Some(split.rule), fair.clone())?;
        let right = self.push(Some(id), split.right, Some(split.rule), fair)?;
        stack.push(right);
        stack.push(left);
        Ok(())
    }
}

/// Build the systematic tableau for `phi`.
pub fn build_tableau(
    phi: &FormulaSet,
    cs: &dyn ConstraintSystem,
    opts: &TableauOptions,
) -> Result<Tableau, TableauError> {
    for c in phi.atoms() {
        cs.check(&c)?;
    }
    let mut b = Builder {
        cs,
        opts: *opts,
        nodes: Vec::new(),
        fairness: Vec::new(),
        hashes: Vec::new(),
    };
    let root = b.push(None, Label::new(phi.iter().cloned()), None, Fairness::default())?;
    let mut stack = vec![root];
    let mut witness = None;
    while let Some(id) = stack.pop() {
        b.expand(id, &mut stack)?;
        if b.nodes[id].mark.is_open() && witness.is_none() {
            witness = Some(id);
            if !opts.exhaustive {
                break;
            }
        }
    }
    let verdict = match witness {
        Some(witness) => Verdict::Open { witness },
        None => Verdict::Closed,
    };
    Ok(Tableau {
        nodes: b.nodes,
        verdict,
    })
}

#[derive(Debug, Clone)]
pub enum SatOutcome {
    Sat { model: ConditionalTrace, tableau: Tableau },
    Unsat { tableau: Tableau },
}

impl SatOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatOutcome::Sat { .. })
    }

    pub fn tableau(&self) -> &Tableau {
        match self {
            SatOutcome::Sat { tableau, .. } | SatOutcome::Unsat { tableau } => tableau,
        }
    }
}

pub fn check_sat(
    phi: &FormulaSet,
    cs: &dyn ConstraintSystem,
    opts: &TableauOptions,
) -> Result<SatOutcome, TableauError> {
    let tableau = build_tableau(phi, cs, opts)?;
    match tableau.verdict() {
        Verdict::Closed => Ok(SatOutcome::Unsat { tableau }),
        Verdict::Open { witness } => {
            let model = extract_model(&tableau, witness, cs)?;
            Ok(SatOutcome::Sat { model, tableau })
        }
    }
}

#[derive(Debug, Clone)]
pub enum ValidOutcome {
    Valid {
        tableau: Tableau,
    },
    NotValid {
        countermodel: ConditionalTrace,
        tableau: Tableau,
    },
}

impl ValidOutcome {
    pub fn is_valid(&self) -> bool {
        matches!(self, ValidOutcome::Valid { .. })
    }

    pub fn tableau(&self) -> &Tableau {
        match self {
            ValidOutcome::Valid { tableau } | ValidOutcome::NotValid { tableau, .. } => tableau,
        }
    }
}

/// `f` is valid iff the tableau for `¬f` closes.
pub fn check_valid(
    f: &Formula,
    cs: &dyn ConstraintSystem,
    opts: &TableauOptions,
) -> Result<ValidOutcome, TableauError> {
    let negated: FormulaSet = [Formula::not(f.clone())].into_iter().collect();
    Ok(match check_sat(&negated, cs, opts)? {
        SatOutcome::Unsat { tableau } => ValidOutcome::Valid { tableau },
        SatOutcome::Sat { model, tableau } => ValidOutcome::NotValid {
            countermodel: model,
            tableau,
        },
    })
}

/// Check many formula sets, in parallel when the `parallel` feature is on.
pub fn check_sat_batch(
    sets: &[FormulaSet],
    cs: &dyn ConstraintSystem,
    opts: &TableauOptions,
    exec: crate::exec::Execution,
) -> Vec<Result<SatOutcome, TableauError>> {
    crate::exec::map(exec, sets, |phi| check_sat(phi, cs, opts))
}
