//! One PASS/FAIL line per acceptance criterion; exits non-zero if any fails.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use csltl_core::exec::Execution;
use support::suites;

type Check = Box<dyn Fn() -> Result<String, String>>;

const TABLEAU_LIMIT: Duration = Duration::from_secs(1);
const DIFFERENTIAL_LIMIT: Duration = Duration::from_secs(60);
const LEMMA_LABELS: usize = 500;
const DIFFERENTIAL_SETS: usize = 300;
const FUZZ_INPUTS: usize = 1000;

fn within(name: &str, r: Result<Duration, String>) -> Result<String, String> {
    let t = r?;
    if t > TABLEAU_LIMIT {
        return Err(format!("{name} took {t:?}"));
    }
    Ok(format!("{t:.2?}"))
}

fn diagnosis() -> Result<String, String> {
    let fixture = |n: &str| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("tests/fixtures")
            .join(n)
            .display()
            .to_string()
    };
    let run = |spec: &str| {
        let args = [
            "csltl".to_string(),
            "diagnose".into(),
            fixture("simple.tccp"),
            fixture(spec),
        ];
        let mut out = Vec::new();
        let code = csltl_cli::run_with(args, &mut out, &mut Vec::new());
        (code, String::from_utf8_lossy(&out).into_owned())
    };
    let (c1, o1) = run("spec_eventually.spec");
    let (c2, o2) = run("spec_always.spec");
    if c1 != 0 || !o1.contains("p/1: correct") {
        return Err(format!("S = F y=1 gave exit {c1}"));
    }
    if c2 != 1 || !o2.contains("p/1: warning") {
        return Err(format!("S' = G y=1 gave exit {c2}"));
    }
    Ok("exit 0 (correct) and exit 1 (warning)".into())
}

fn rule_lemma() -> Result<String, String> {
    let r = suites::rule_lemma(LEMMA_LABELS, 2024);
    if r.labels < LEMMA_LABELS || !r.violations.is_empty() {
        return Err(format!("{} violations: {:?}", r.violations.len(), r.violations.first()));
    }
    Ok(format!(
        "{} labels, {} applications {:?}",
        r.labels,
        r.total(),
        r.applications
    ))
}

fn differential() -> Result<String, String> {
    let r = suites::differential(DIFFERENTIAL_SETS, 2024, Execution::default());
    if !r.disagreements.is_empty() {
        return Err(format!(
            "{} disagreements: {:?}",
            r.disagreements.len(),
            r.disagreements.first()
        ));
    }
    if r.elapsed > DIFFERENTIAL_LIMIT {
        return Err(format!("took {:?}", r.elapsed));
    }
    Ok(format!(
        "{} sets ({} sat, {} unsat) in {:.2?}",
        r.sets, r.sat, r.unsat, r.elapsed
    ))
}

fn sigma() -> Result<String, String> {
    let r = suites::sigma_corpus();
    if r.formulas < 20 || !r.mismatches.is_empty() {
        return Err(format!("{} formulas, mismatches {:?}", r.formulas, r.mismatches));
    }
    Ok(format!("{} formulas ({} sat) agree", r.formulas, r.sat))
}

fn fuzz() -> Result<String, String> {
    let r = suites::fuzz(FUZZ_INPUTS, 2024, Execution::default());
    if r.budget_exceeded > 0 || !r.errors.is_empty() {
        return Err(format!(
            "{} over budget, errors {:?}",
            r.budget_exceeded,
            r.errors.first()
        ));
    }
    Ok(format!(
        "{} inputs, largest tableau {} nodes, {:.2?}",
        r.inputs, r.max_nodes, r.elapsed
    ))
}

fn main() {
    let criteria: Vec<(&str, Check)> = vec![
        (
            "paper tableau for ∃xφ → ◇y=1",
            Box::new(|| within("tableau 1", suites::paper_tableau_1())),
        ),
        (
            "paper tableau for ∃xφ' → □y=1",
            Box::new(|| within("tableau 2", suites::paper_tableau_2())),
        ),
        ("diagnosis end to end", Box::new(diagnosis)),
        (
            "stream simplification example",
            Box::new(|| suites::stream_example().map(|()| "σ, dep, head".into())),
        ),
        ("rule-lemma property suite", Box::new(rule_lemma)),
        ("differential suite", Box::new(differential)),
        ("σ equi-satisfiability corpus", Box::new(sigma)),
        ("termination on the regression corpus", Box::new(fuzz)),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed in {:.2?}",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
