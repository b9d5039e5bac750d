//! Machine-readable summaries of a session.

use std::time::Instant;

use serde::Serialize;

use crate::formula::Formula;
use crate::tableau::{Mark, Tableau};
use crate::trace::ConditionalTrace;

#[derive(Debug, Clone, Serialize)]
pub struct TableauStats {
    pub nodes: usize,
    pub branches: usize,
    pub open_branches: usize,
}

impl TableauStats {
    pub fn of(t: &Tableau) -> Self {
        TableauStats {
            nodes: t.nodes().len(),
            branches: t.leaves().count(),
            open_branches: t
                .leaves()
                .filter(|n| n.mark.is_open() || n.mark == Mark::Unmarked)
                .count(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultReport {
    pub name: String,
    pub formula: String,
    pub verdict: String,
    pub witness: Option<String>,
    pub tableau: TableauStats,
}

impl ResultReport {
    pub fn new(name: &str, f: &Formula, verdict: &str, witness: Option<&ConditionalTrace>, t: &Tableau) -> Self {
        ResultReport {
            name: name.to_string(),
            formula: f.to_string(),
            verdict: verdict.to_string(),
            witness: witness.map(|w| w.to_string()),
            tableau: TableauStats::of(t),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub name: String,
    /// `agree`, `disagree` or `skipped`.
    pub agreement: String,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct UncoveredReport {
    pub heuristic: bool,
    /// Per process: `true` when no uncovered behaviour was detected.
    pub processes: Vec<(String, bool)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub verdict: String,
    pub results: Vec<ResultReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub oracle: Vec<OracleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uncovered_hint: Option<UncoveredReport>,
    pub timing_ms: f64,
}

impl Report {
    pub fn new(
        command: &str,
        verdict: &str,
        results: Vec<ResultReport>,
        oracle: Vec<OracleReport>,
        hint: Option<Vec<(String, bool)>>,
        start: Instant,
    ) -> Self {
        Report {
            command: command.to_string(),
            verdict: verdict.to_string(),
            results,
            oracle,
            uncovered_hint: hint.map(|processes| UncoveredReport {
                heuristic: true,
                processes,
            }),
            timing_ms: start.elapsed().as_secs_f64() * 1000.0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Plain-text rendering.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}: {}\n", self.command, self.verdict);
        for r in &self.results {
            out.push_str(&format!(
                "  {}: {} ({} nodes, {} branches)\n",
                r.name, r.verdict, r.tableau.nodes, r.tableau.branches
            ));
            if let Some(w) = &r.witness {
                let what = if r.verdict == "sat" { "model" } else { "countermodel" };
                out.push_str(&format!("    {what}: {w}\n"));
            }
            if r.verdict == "warning" {
                out.push_str("    (a possible source of incorrectness, not a proof of error)\n");
            }
        }
        for o in &self.oracle {
            out.push_str(&format!("  oracle {}: {}", o.name, o.agreement));
            if let Some(d) = &o.detail {
                out.push_str(&format!(" ({d})"));
            }
            out.push('\n');
        }
        if let Some(h) = &self.uncovered_hint {
            out.push_str("  uncovered-behaviour hint (heuristic):\n");
            for (p, ok) in &h.processes {
                let msg = if *ok {
                    "nothing uncovered detected"
                } else {
                    "possibly uncovered behaviour"
                };
                out.push_str(&format!("    {p}: {msg}\n"));
            }
        }
        out.push_str(&format!("  time: {:.3} ms\n", self.timing_ms));
        out
    }
}
