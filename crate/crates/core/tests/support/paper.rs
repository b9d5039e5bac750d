//! The running example: a process that either tells `x=5` and recurses, or
//! waits one instant and tells `y=1`.

use csltl_core::constraint::{ConstraintSystem, FlatSystem};
use csltl_core::formula::Formula;

pub const PROGRAM: &str = "p(y) :- exists x (now `y=1` then (tell `x=5` || p(y)) else tell `y=1`).\n";
pub const SPEC_EVENTUALLY: &str = "p(y) |= F `y=1`.\n";
pub const SPEC_ALWAYS: &str = "p(y) |= G `y=1`.\n";

/// `∃x φ → ◇y=1`.
pub const VALID_EVENTUALLY: &str = "(E x. ((`y=1` & X `x=5` & X F `y=1`) | (~`y=1` & X `y=1`))) -> F `y=1`";
/// `∃x φ' → □y=1`.
pub const VALID_ALWAYS: &str = "(E x. ((`y=1` & X `x=5` & X G `y=1`) | (~`y=1` & X `y=1`))) -> G `y=1`";

pub fn atom(text: &str) -> Formula {
    Formula::atom(FlatSystem.parse_atom(text).unwrap())
}

pub fn y1() -> Formula {
    atom("y=1")
}
