//! Model extraction from open branches.

use crate::constraint::{join_all, Constraint, ConstraintSystem};
use crate::formula::FormulaSet;
use crate::trace::{CondState, ConditionalTrace};

use super::{Mark, Stage, Tableau, TableauError};

/// `stores(s·S) = ⟨C,∅,C⟩·stores(S)` with `C` the join of the stage's
/// positive constraint atoms (`⨂∅ = true`).
pub fn stores<'a>(
    stage_labels: impl IntoIterator<Item = &'a FormulaSet>,
    cs: &dyn ConstraintSystem,
) -> Result<Vec<CondState>, TableauError> {
    stage_labels
        .into_iter()
        .map(|label| {
            let positives: Vec<Constraint> = label.iter().filter_map(|f| f.positive_constraint()).collect();
            Ok(CondState::store(join_all(cs, &positives)?))
        })
        .collect()
}

/// Build the trace described by the open branch ending at `leaf`.
///
/// A leaf holding only constraints yields a finite stage sequence whose last
/// store is replicated forever. A leaf closed by the cycle rule yields a
/// lasso whose loop is the path segment after the matching ancestor.
pub fn extract_model(
    tableau: &Tableau,
    leaf: usize,
    cs: &dyn ConstraintSystem,
) -> Result<ConditionalTrace, TableauError> {
    let path = tableau.branch(leaf);
    match tableau.node(leaf).mark {
        Mark::Open => {
            let stages = tableau.stages(&path);
            let labels: Vec<FormulaSet> = stages.iter().map(|s| tableau.stage_label(s)).collect();
            let mut states = stores(&labels, cs)?;
            let cycle = states.split_off(states.len().saturating_sub(1));
            Ok(ConditionalTrace::lasso(states, cycle))
        }
        Mark::OpenCycle { ancestor } => {
            let j = path
                .iter()
                .position(|&n| n == ancestor)
                .ok_or(TableauError::BranchNotOpen(leaf))?;
            let (head, lp) = path.split_at(j + 1);
            // Three copies of the loop: stages starting in the first copy may
            // run into the second, and the boundary must look the same again.
            let unrolled: Vec<usize> = head.iter().chain(lp).chain(lp).chain(lp).copied().collect();
            let mut starts = Vec::new();
            for (pos, &n) in unrolled.iter().enumerate() {
                if pos == 0 || tableau.node(n).rule == Some(super::Rule::NextStep) {
                    starts.push(pos);
                }
            }
            let span = |k: usize| -> Stage {
                let end = starts.get(k + 1).copied().unwrap_or(unrolled.len());
                Stage {
                    nodes: unrolled[starts[k]..end].to_vec(),
                }
            };
            let mut prefix = Vec::new();
            let mut cycle = Vec::new();
            for (k, &pos) in starts.iter().enumerate() {
                if pos < head.len() {
                    prefix.push(tableau.stage_label(&span(k)));
                } else if pos < head.len() + lp.len() {
                    cycle.push(tableau.stage_label(&span(k)));
                }
            }
            if cycle.is_empty() {
                return Err(TableauError::DegenerateCycle { ancestor, leaf });
            }
            Ok(ConditionalTrace::lasso(stores(&prefix, cs)?, stores(&cycle, cs)?))
        }
        Mark::Closed | Mark::Unmarked => Err(TableauError::BranchNotOpen(leaf)),
    }
}
