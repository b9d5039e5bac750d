//! Property suites parameterised by size so the acceptance target can run
//! them at full scale and the per-crate tests at a smaller one.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use csltl_core::constraint::{Constraint, ConstraintSystem, FiniteTableSystem, FlatSystem, Variable};
use csltl_core::exec::{self, Execution};
use csltl_core::formula::{Class, Formula, FormulaSet};
use csltl_core::frontend::{parse_formula, parse_formulas};
use csltl_core::oracle::{self, Bounds, LassoTrace, OracleVerdict};
use csltl_core::streams;
use csltl_core::tableau::{
    apply_alpha, apply_beta, check_sat, check_valid, is_inconsistent, next_label, Label, Mark, Rule, SatOutcome,
    Tableau, TableauError, TableauOptions, ValidOutcome,
};
use csltl_core::trace::{CondState, ConditionalTrace};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{formula, formula_set, four_atoms, named, paper};

fn set(fs: impl IntoIterator<Item = Formula>) -> FormulaSet {
    fs.into_iter().collect()
}

fn contains_all(s: &FormulaSet, fs: &[Formula]) -> bool {
    fs.iter().all(|f| s.contains(f))
}

/// Nodes in the subtree rooted at `id`, `id` included.
fn subtree(t: &Tableau, id: usize) -> Vec<usize> {
    let mut out = vec![id];
    let mut i = 0;
    while i < out.len() {
        out.extend(t.node(out[i]).children.iter().copied());
        i += 1;
    }
    out
}

/// First node where the tableau branches.
fn first_split(t: &Tableau) -> usize {
    let mut cur = 0;
    while t.node(cur).children.len() == 1 {
        cur = t.node(cur).children[0];
    }
    cur
}

/// `∃xφ → ◇y=1` is valid; the left β-subtree closes on `{y=1, ¬y=1}`
/// without a next step and the right one closes after exactly one.
pub fn paper_tableau_1() -> Result<Duration, String> {
    let start = Instant::now();
    let f = parse_formula(paper::VALID_EVENTUALLY, &FlatSystem).map_err(|e| e.to_string())?;
    let out = check_valid(&f, &FlatSystem, &TableauOptions::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let ValidOutcome::Valid { tableau: t } = out else {
        return Err("expected Valid".into());
    };
    let y1 = paper::y1();
    let clash = [y1.clone(), Formula::not(y1.clone())];

    // α, ∃ and α steps down to the disjunction, as in the figure.
    let split = first_split(&t);
    let spine: Vec<Rule> = t.branch(split).iter().skip(1).filter_map(|&n| t.node(n).rule).collect();
    if spine != [Rule::R1, Rule::R2, Rule::R1, Rule::Exists] {
        return Err(format!("unexpected spine {spine:?}"));
    }
    let children = &t.node(split).children;
    if children.len() != 2 || t.node(children[0]).rule != Some(Rule::R3) {
        return Err("the disjunction is not split by a β-step".into());
    }
    let (left, right) = (children[0], children[1]);

    for &n in &subtree(&t, left) {
        let node = t.node(n);
        if node.rule == Some(Rule::NextStep) {
            return Err(format!("left subtree takes a next step at node {n}"));
        }
        if node.children.is_empty() && (node.mark != Mark::Closed || !contains_all(node.label.formulas(), &clash)) {
            return Err(format!("left leaf {n} does not close on y=1, ¬y=1"));
        }
    }
    let left_leaves = subtree(&t, left)
        .into_iter()
        .filter(|&n| t.node(n).children.is_empty())
        .count();
    if left_leaves == 0 {
        return Err("left subtree has no leaves".into());
    }

    let right_nodes = subtree(&t, right);
    let steps: Vec<usize> = right_nodes
        .iter()
        .copied()
        .filter(|&n| t.node(n).rule == Some(Rule::NextStep))
        .collect();
    let [step] = steps[..] else {
        return Err(format!("right subtree has {} next steps", steps.len()));
    };
    let before = t.node(t.node(step).parent.unwrap()).label.formulas();
    if !contains_all(before, &[Formula::not(y1.clone()), Formula::next(y1.clone())]) {
        return Err("next step is not taken from {¬y=1, Xy=1, …}".into());
    }
    let after: BTreeSet<Formula> = t.node(step).label.formulas().iter().cloned().collect();
    let expected = BTreeSet::from([y1.clone(), Formula::not(Formula::eventually(y1.clone()))]);
    if after != expected {
        return Err(format!("after the next step: {}", t.node(step).label.formulas()));
    }
    let below: BTreeSet<usize> = subtree(&t, step).into_iter().collect();
    for &n in &right_nodes {
        let node = t.node(n);
        if !node.children.is_empty() {
            continue;
        }
        if node.mark != Mark::Closed {
            return Err(format!("right leaf {n} is not closed"));
        }
        let ok = if below.contains(&n) {
            contains_all(node.label.formulas(), &clash)
        } else {
            // the unfolding of ¬◇ that refuses `true U …` right away
            node.label.formulas().contains(&Formula::not(Formula::True))
        };
        if !ok {
            return Err(format!("right leaf {n} closes for an unexpected reason"));
        }
    }
    Ok(elapsed)
}

/// `∃xφ' → □y=1` is not valid; the open branch passes through
/// `{¬y=1, Xy=1}` and then `{y=1}`, and the countermodel is
/// `⟨true,∅,true⟩·⟨y=1,∅,y=1⟩^ω`.
pub fn paper_tableau_2() -> Result<Duration, String> {
    let start = Instant::now();
    let f = parse_formula(paper::VALID_ALWAYS, &FlatSystem).map_err(|e| e.to_string())?;
    let out = check_valid(&f, &FlatSystem, &TableauOptions::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let ValidOutcome::NotValid {
        countermodel,
        tableau: t,
    } = out
    else {
        return Err("expected NotValid".into());
    };
    let y1 = paper::y1();
    let y1c = FlatSystem.parse_atom("y=1").unwrap();
    let first = [Formula::not(y1.clone()), Formula::next(y1.clone())];

    let found = t.leaves().filter(|l| l.mark.is_open()).any(|l| {
        let stages = t.stages(&t.branch(l.id));
        stages
            .windows(2)
            .any(|w| contains_all(&t.stage_label(&w[0]), &first) && t.stage_label(&w[1]) == set([y1.clone()]))
            && l.label.formulas() == &set([y1.clone()])
    });
    if !found {
        return Err("no open branch through {¬y=1, Xy=1} then {y=1}".into());
    }

    let expected = ConditionalTrace::lasso(vec![CondState::store(Constraint::True)], vec![CondState::store(y1c)]);
    if countermodel != expected {
        return Err(format!("countermodel {countermodel}"));
    }
    let negated = oracle::strip_top_exists(&set([Formula::not(f)])).map_err(|e| e.to_string())?;
    let lasso = LassoTrace::from_trace(&countermodel).map_err(|e| e.to_string())?;
    if !oracle::eval_set(&lasso, &negated, &FlatSystem).map_err(|e| e.to_string())? {
        return Err("the oracle rejects the countermodel".into());
    }
    Ok(elapsed)
}

/// The stream example and the dependency example for `dep`/`head`.
pub fn stream_example() -> Result<(), String> {
    let cs = FlatSystem;
    let p = |s: &str| parse_formula(s, &cs).map_err(|e| e.to_string());
    let phi = p("(`C=[near|C1]` & X `C1=[out|C2]`) & `G=[down|G1]`")?;
    let expected = p("(`C~=near` & X `C~=out`) & `G~=down`")?;
    let got = streams::simplify(&phi).map_err(|e| e.to_string())?;
    if got != expected {
        return Err(format!("σ gave {got}"));
    }
    let psi = p("(`S=[c|S1]` & `S1=[c2|S2]`) U `T=[d|T1]`")?;
    let deps = streams::dep(&psi).map_err(|e| e.to_string())?;
    let v = |s: &str| Variable::new(s).unwrap();
    let want = BTreeSet::from([(v("S"), v("S1")), (v("S1"), v("S2")), (v("T"), v("T1"))]);
    if deps.pairs() != want {
        return Err(format!("dep gave {:?}", deps.pairs()));
    }
    let h = streams::head(&v("S2"), &deps).map_err(|e| e.to_string())?;
    if h != v("S") {
        return Err(format!("head(S2) = {h}"));
    }
    Ok(())
}

/// Oracle satisfiability at the given bounds.
fn osat(phi: &FormulaSet, cs: &dyn ConstraintSystem, atoms: &[Constraint], bounds: &Bounds) -> Result<bool, String> {
    oracle::oracle_sat(phi, cs, atoms, bounds, Execution::Sequential)
        .map(|v| v.is_sat())
        .map_err(|e| e.to_string())
}

#[derive(Debug, Default)]
pub struct LemmaReport {
    pub labels: usize,
    pub applications: BTreeMap<&'static str, usize>,
    pub violations: Vec<String>,
}

impl LemmaReport {
    fn count(&mut self, what: &'static str) {
        *self.applications.entry(what).or_default() += 1;
    }

    pub fn total(&self) -> usize {
        self.applications.values().sum()
    }
}

fn elementary<R: Rng>(rng: &mut R, atoms: &[Constraint], depth: usize) -> Formula {
    let inner = formula(rng, atoms, depth.saturating_sub(1), 2);
    let a = Formula::atom(atoms.choose(rng).unwrap().clone());
    match rng.gen_range(0..5) {
        0 => a,
        1 => Formula::not(a),
        2 | 3 => Formula::next(inner),
        _ => Formula::not(Formula::next(inner)),
    }
}

/// Random label: up to 5 formulas over at most 2 atoms, temporal depth ≤ 2.
/// Every third label is made of elementary formulas only.
fn random_label<R: Rng>(rng: &mut R, pool: &[Constraint]) -> Vec<Formula> {
    let k = rng.gen_range(1..=2);
    let atoms: Vec<Constraint> = pool.choose_multiple(rng, k).cloned().collect();
    let n = rng.gen_range(1..=5);
    let only_elementary = rng.gen_ratio(1, 3);
    (0..n)
        .map(|_| {
            if only_elementary {
                elementary(rng, &atoms, 2)
            } else {
                formula(rng, &atoms, 2, 3)
            }
        })
        .collect()
}

/// For each random label, apply every α- and β-rule to every formula it
/// applies to (R6 as well for eventualities) and `next` to consistent
/// elementary labels, comparing oracle satisfiability of parent and children.
pub fn rule_lemma(labels: usize, seed: u64) -> LemmaReport {
    let cs = four_atoms();
    let pool = named(&["a", "b", "c", "d"]);
    let bounds = Bounds::default();
    let shorter = Bounds {
        max_prefix: bounds.max_prefix - 1,
        ..bounds
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = LemmaReport::default();
    for _ in 0..labels {
        let fs = random_label(&mut rng, &pool);
        report.labels += 1;
        if let Err(e) = check_label(&fs, &cs, &bounds, &shorter, &mut report) {
            report.violations.push(format!("{}: {e}", set(fs)));
        }
    }
    report
}

fn check_label(
    fs: &[Formula],
    cs: &FiniteTableSystem,
    bounds: &Bounds,
    shorter: &Bounds,
    report: &mut LemmaReport,
) -> Result<(), String> {
    let label = Label::new(fs.iter().cloned());
    let parent = label.formulas().clone();
    let atoms: Vec<Constraint> = parent.atoms().into_iter().collect();
    let parent_sat = osat(&parent, cs, &atoms, bounds)?;
    let e = |e: TableauError| e.to_string();

    let mut elementary = true;
    for f in label.formulas().iter() {
        match f.classify().map_err(|e| e.to_string())? {
            Class::AlphaFormula => {
                elementary = false;
                let (child, _) = apply_alpha(&label, f).map_err(e)?;
                let child_sat = osat(child.formulas(), cs, &atoms, bounds)?;
                report.count("alpha");
                if child_sat != parent_sat {
                    return Err(format!("α on {f}: parent {parent_sat}, child {child_sat}"));
                }
            }
            Class::BetaFormula => {
                elementary = false;
                let mut variants = vec![(label.clone(), false)];
                if f.is_eventuality() {
                    variants.push((Label::with_distinguished(parent.iter().cloned(), Some(f.clone())), true));
                }
                for (l, ctx) in variants {
                    let split = apply_beta(&l, f, ctx).map_err(e)?;
                    let left = osat(split.left.formulas(), cs, &atoms, bounds)?;
                    let right = osat(split.right.formulas(), cs, &atoms, bounds)?;
                    report.count(match split.rule {
                        Rule::R3 => "beta R3",
                        Rule::R4 => "beta R4",
                        Rule::R5 => "beta R5",
                        _ => "beta R6",
                    });
                    if parent_sat != (left || right) {
                        return Err(format!(
                            "{:?} on {f}: parent {parent_sat}, children {left}/{right}",
                            split.rule
                        ));
                    }
                }
            }
            Class::ExistsFormula => elementary = false,
            _ => {}
        }
    }
    if elementary {
        if is_inconsistent(&label, cs).map_err(e)? {
            report.count("closed");
            if parent_sat {
                return Err("inconsistent label has an oracle model".into());
            }
        } else {
            let child = next_label(&label, false).map_err(e)?;
            // A model of the child extends by one state to a model of the
            // parent and conversely, so compare prefix 4 against prefix 3.
            let child_sat = osat(child.formulas(), cs, &atoms, shorter)?;
            report.count("next");
            if child_sat != parent_sat {
                return Err(format!("next: parent {parent_sat}, child {child_sat}"));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Default)]
pub struct DiffReport {
    pub sets: usize,
    pub sat: usize,
    pub unsat: usize,
    pub disagreements: Vec<String>,
    pub elapsed: Duration,
}

/// Tableau against oracle on random quantifier-free sets over 2-3 atoms.
pub fn differential(sets: usize, seed: u64, exec: Execution) -> DiffReport {
    let cs = four_atoms();
    let pool = named(&["a", "b", "c", "d"]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs: Vec<FormulaSet> = (0..sets)
        .map(|_| {
            let k = rng.gen_range(2..=3);
            formula_set(&mut rng, &pool, k, 3, 3)
        })
        .collect();
    let start = Instant::now();
    let results = exec::map(exec, &inputs, |phi| differential_one(phi, &cs));
    let mut report = DiffReport {
        sets,
        elapsed: start.elapsed(),
        ..DiffReport::default()
    };
    for (phi, r) in inputs.iter().zip(results) {
        match r {
            Ok(true) => report.sat += 1,
            Ok(false) => report.unsat += 1,
            Err(e) => report.disagreements.push(format!("{phi}: {e}")),
        }
    }
    report
}

fn differential_one(phi: &FormulaSet, cs: &FiniteTableSystem) -> Result<bool, String> {
    let opts = TableauOptions::default();
    let atoms: Vec<Constraint> = phi.atoms().into_iter().collect();
    match check_sat(phi, cs, &opts).map_err(|e| e.to_string())? {
        SatOutcome::Sat { model, .. } => {
            let lasso = LassoTrace::from_trace(&model).map_err(|e| e.to_string())?;
            if !oracle::eval_set(&lasso, phi, cs).map_err(|e| e.to_string())? {
                return Err(format!("model {model} does not satisfy the set"));
            }
            if !model.is_monotone(cs).map_err(|e| e.to_string())? {
                return Err(format!("model {model} is not monotone"));
            }
            if !model.is_consistent(cs).map_err(|e| e.to_string())? {
                return Err(format!("model {model} is not consistent"));
            }
            Ok(true)
        }
        SatOutcome::Unsat { .. } => {
            match oracle::oracle_sat(phi, cs, &atoms, &Bounds::default(), Execution::Sequential)
                .map_err(|e| e.to_string())?
            {
                OracleVerdict::SatWitness(t) => Err(format!("tableau closed but {t} satisfies the set")),
                OracleVerdict::NoWitnessWithinBound => Ok(false),
            }
        }
    }
}

/// Stream formulas of the shape `FDd` produces: current values written
/// through successive tails, with conditions on them.
pub const STREAM_CORPUS: &str = "
`C=[near|C1]` & X `C1=[out|C2]` & `G=[down|G1]`;
`S=[a|S1]` & X `S1=[b|S2]` & X X `S2=[c|S3]`;
`S=[a|S1]` & X (`S1=[b|S2]` & F `S2=[c|S3]`);
`S=[a|S1]` & ~`S=[a|S1]`;
`S=[a|S1]` & G ~`S=[a|S1]`;
`S=[a|S1]` & X `S1=[b|S2]` & `x=1` & X ~`x=1`;
`S=[a|S1]` & F `x=1` & G ~`x=1`;
(`S=[a|S1]` | `T=[b|T1]`) & X `S1=[c|S2]`;
`S=[a|S1]` & (`y=0` U `y=1`);
`S=[a|S1]` & X `S1=[b|S2]` & G F `z=1`;
F `S=[a|S1]` & G ~`S=[a|S1]`;
`S=[a|S1]` & X (`S1=[b|S2]` & X `S2=[b|S3]`) & X X `w=2`;
`S=[a|S1]` & (`x=1` -> X `S1=[b|S2]`) & `x=1`;
`S=[a|S1]` & `T=[b|T1]` & X (`S1=[c|S2]` & `T1=[d|T2]`);
G (`x=1` -> X `x=1`) & `x=1` & F ~`x=1` & `S=[a|S1]`;
`S=[a|S1]` & X `S1=[b|S2]` & false;
E x. (`S=[a|S1]` & `x=1` & X `S1=[b|S2]`);
`S=[a|S1]` & (X `S1=[b|S2]` | X `S1=[c|S2]`) & X ~`y=1`;
`S=[a|S1]` & X (`S1=[b|S2]` & `y=1`) & X X ~`y=1`;
`C=[near|C1]` & X `C1=[out|C2]` & X X (`C2=[in|C3]` & `g=1`) & G ~`g=1`
";

#[derive(Debug, Default)]
pub struct SigmaReport {
    pub formulas: usize,
    pub sat: usize,
    pub mismatches: Vec<String>,
}

/// `check_sat(f)` against `check_sat(σ f)` with the stream-aware next.
pub fn sigma_corpus() -> SigmaReport {
    let cs = FlatSystem;
    let corpus = parse_formulas(STREAM_CORPUS, &cs).expect("corpus parses");
    let plain = TableauOptions::default();
    let stream = TableauOptions {
        stream_mode: true,
        ..plain
    };
    let mut report = SigmaReport::default();
    for f in corpus {
        report.formulas += 1;
        let run = || -> Result<(bool, bool), String> {
            let g = streams::simplify(&f).map_err(|e| e.to_string())?;
            let a = check_sat(&set([f.clone()]), &cs, &plain).map_err(|e| e.to_string())?;
            let b = check_sat(&set([g]), &cs, &stream).map_err(|e| e.to_string())?;
            Ok((a.is_sat(), b.is_sat()))
        };
        match run() {
            Ok((a, b)) if a == b => report.sat += usize::from(a),
            Ok((a, b)) => report.mismatches.push(format!("{f}: original {a}, simplified {b}")),
            Err(e) => report.mismatches.push(format!("{f}: {e}")),
        }
    }
    report
}

#[derive(Debug, Default)]
pub struct FuzzReport {
    pub inputs: usize,
    pub budget_exceeded: usize,
    pub errors: Vec<String>,
    pub max_nodes: usize,
    pub elapsed: Duration,
}

/// Paper fixtures plus `n` random sets (3 atoms, depth ≤ 3) at the default
/// node budget.
pub fn fuzz(n: usize, seed: u64, exec: Execution) -> FuzzReport {
    let table = four_atoms();
    let pool = named(&["a", "b", "c", "d"]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inputs: Vec<(bool, FormulaSet)> = [paper::VALID_EVENTUALLY, paper::VALID_ALWAYS]
        .iter()
        .map(|s| {
            let f = parse_formula(s, &FlatSystem).unwrap();
            (true, set([Formula::not(f)]))
        })
        .collect();
    inputs.extend((0..n).map(|_| (false, formula_set(&mut rng, &pool, 3, 3, 3))));
    let opts = TableauOptions::default();
    let start = Instant::now();
    let results = exec::map(exec, &inputs, |(flat, phi)| {
        let cs: &dyn ConstraintSystem = if *flat { &FlatSystem } else { &table };
        check_sat(phi, cs, &opts).map(|o| o.tableau().nodes().len())
    });
    let mut report = FuzzReport {
        inputs: inputs.len(),
        elapsed: start.elapsed(),
        ..FuzzReport::default()
    };
    for ((_, phi), r) in inputs.iter().zip(results) {
        match r {
            Ok(nodes) => report.max_nodes = report.max_nodes.max(nodes),
            Err(TableauError::BudgetExceeded(_)) => report.budget_exceeded += 1,
            Err(e) => report.errors.push(format!("{phi}: {e}")),
        }
    }
    report
}
