//! Satisfiability and validity checking for csLTL, the linear temporal logic
//! over constraint systems, by a context-driven tableau; plus the
//! abstract-diagnosis front end for tccp programs.
//!
//! ```
//! use csltl_core::constraint::{ConstraintSystem, FlatSystem};
//! use csltl_core::formula::Formula;
//! use csltl_core::tableau::{check_valid, TableauOptions};
//!
//! let c = Formula::atom(FlatSystem.parse_atom("y=1").unwrap());
//! let f = Formula::implies(Formula::always(c.clone()), Formula::eventually(c));
//! assert!(check_valid(&f, &FlatSystem, &TableauOptions::default()).unwrap().is_valid());
//! ```

pub mod constraint;
pub mod exec;
pub mod formula;
pub mod frontend;
pub mod oracle;
pub mod streams;
pub mod tableau;
pub mod tccp;
pub mod trace;

pub use constraint::{Constraint, ConstraintSystem, FiniteTableSystem, FlatSystem, Variable};
pub use formula::{Formula, FormulaSet};
pub use tableau::{check_sat, check_valid, SatOutcome, Tableau, TableauOptions, ValidOutcome};
pub use trace::{CondState, ConditionalTrace};
