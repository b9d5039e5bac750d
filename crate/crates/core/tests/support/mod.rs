//! Fixtures and random generators shared by the integration suites.
#![allow(dead_code)]

pub mod paper;
pub mod suites;

use csltl_core::constraint::{Constraint, FiniteTableSystem};
use csltl_core::formula::{Formula, FormulaSet};
use rand::seq::SliceRandom;
use rand::Rng;

/// `c ⊢ a`, `d ⊢ a`, `d ⊢ b`; `a ⊗ b = d`; `b ⊗ c = c ⊗ d = false`.
pub fn four_atoms() -> FiniteTableSystem {
    FiniteTableSystem::build(
        &["a", "b", "c", "d"],
        &[("c", "a"), ("d", "a"), ("d", "b")],
        &[(("a", "b"), "d"), (("b", "c"), "false"), (("c", "d"), "false")],
    )
    .expect("four-atom table is well formed")
}

pub fn named(names: &[&str]) -> Vec<Constraint> {
    names.iter().map(|n| Constraint::named(n)).collect()
}

/// Random formula over `atoms` with at most `depth` nested temporal
/// operators.
pub fn formula<R: Rng>(rng: &mut R, atoms: &[Constraint], depth: usize, size: usize) -> Formula {
    let leaf = |rng: &mut R| match rng.gen_range(0..10) {
        0 => Formula::True,
        1 => Formula::False,
        _ => Formula::atom(atoms.choose(rng).unwrap().clone()),
    };
    if size == 0 {
        return leaf(rng);
    }
    let temporal = depth > 0;
    let choice = rng.gen_range(0..if temporal { 11 } else { 5 });
    let sub = |rng: &mut R, d: usize| formula(rng, atoms, d, size - 1);
    match choice {
        0 => leaf(rng),
        1 => Formula::not(sub(rng, depth)),
        2 => Formula::and(sub(rng, depth), sub(rng, depth)),
        3 => Formula::or(sub(rng, depth), sub(rng, depth)),
        4 => Formula::implies(sub(rng, depth), sub(rng, depth)),
        5 | 6 => Formula::next(sub(rng, depth - 1)),
        7 => Formula::until(sub(rng, depth - 1), sub(rng, depth - 1)),
        8 => Formula::eventually(sub(rng, depth - 1)),
        9 => Formula::always(sub(rng, depth - 1)),
        _ => Formula::weak_until(sub(rng, depth - 1), sub(rng, depth - 1)),
    }
}

/// `1..=max_len` random formulas over `k` atoms drawn from `pool`.
pub fn formula_set<R: Rng>(rng: &mut R, pool: &[Constraint], k: usize, max_len: usize, depth: usize) -> FormulaSet {
    let atoms: Vec<Constraint> = pool.choose_multiple(rng, k).cloned().collect();
    let n = rng.gen_range(1..=max_len);
    (0..n).map(|_| formula(rng, &atoms, depth, 3)).collect()
}
