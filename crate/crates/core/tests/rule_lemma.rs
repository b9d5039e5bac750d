mod support;

use support::suites;

#[test]
fn single_steps_preserve_satisfiability() {
    let r = suites::rule_lemma(150, 11);
    assert!(r.violations.is_empty(), "{:#?}", r.violations);
    for rule in ["alpha", "beta R3", "beta R4", "beta R5", "beta R6", "next"] {
        assert!(
            r.applications.get(rule).copied().unwrap_or(0) > 0,
            "{rule} never applied: {:?}",
            r.applications
        );
    }
}
