use std::collections::HashMap;
use std::sync::Arc;

use super::{Constraint, ConstraintError, ConstraintSystem};

const TRUE: usize = 0;
const FALSE: usize = 1;

/// A finite, user-declared constraint system.
///
/// Atoms are opaque names. Entailment is the reflexive-transitive closure of
/// the declared pairs together with `c ⊢ true` and `false ⊢ c`; it is a
/// preorder, so mutually entailing atoms stay distinct tokens. Joins that are
/// not declared are filled in with a least upper bound from the closure.
#[derive(Debug, Clone)]
pub struct FiniteTableSystem {
    atoms: Vec<Arc<str>>,
    index: HashMap<Arc<str>, usize>,
    /// Row-major `n × n` closure: `entails[c * n + d]` iff `c ⊢ d`.
    entails: Vec<bool>,
    join: Vec<usize>,
}

impl FiniteTableSystem {
    /// Build a system from atom names, entailment pairs `(c, d)` meaning
    /// `c ⊢ d`, and join entries `((c, d), e)` meaning `c ⊗ d = e`.
    ///
    /// `true` and `false` are always present whether or not they are listed.
    pub fn build<S: AsRef<str>>(
        atoms: &[S],
        entail_pairs: &[(S, S)],
        join_table: &[((S, S), S)],
    ) -> Result<Self, ConstraintError> {
        let mut names: Vec<Arc<str>> = vec![Arc::from("true"), Arc::from("false")];
        let mut index: HashMap<Arc<str>, usize> = names.iter().cloned().enumerate().map(|(i, n)| (n, i)).collect();
        for atom in atoms {
            let atom = atom.as_ref();
            if !index.contains_key(atom) {
                let name: Arc<str> = Arc::from(atom);
                index.insert(name.clone(), names.len());
                names.push(name);
            }
        }
        let n = names.len();
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| ConstraintError::UnknownAtom(name.to_string()))
        };

        let mut ent = vec![false; n * n];
        for c in 0..n {
            ent[c * n + c] = true;
            ent[c * n + TRUE] = true;
            ent[FALSE * n + c] = true;
        }
        for (c, d) in entail_pairs {
            ent[lookup(c.as_ref())? * n + lookup(d.as_ref())?] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if ent[i * n + k] {
                    for j in 0..n {
                        if ent[k * n + j] {
                            ent[i * n + j] = true;
                        }
                    }
                }
            }
        }

        let mut join = vec![usize::MAX; n * n];
        for ((c, d), e) in join_table {
            let (ci, di, ei) = (lookup(c.as_ref())?, lookup(d.as_ref())?, lookup(e.as_ref())?);
            let violation = |reason: &str| ConstraintError::ClosureViolation {
                c: names[ci].to_string(),
                d: names[di].to_string(),
                e: names[ei].to_string(),
                reason: reason.to_string(),
            };
            if !ent[ei * n + ci] || !ent[ei * n + di] {
                return Err(violation("declared join does not entail both arguments"));
            }
            for (a, b) in [(ci, di), (di, ci)] {
                let slot = &mut join[a * n + b];
                if *slot != usize::MAX && *slot != ei {
                    return Err(violation("conflicting join declarations"));
                }
                *slot = ei;
            }
        }
        for c in 0..n {
            for d in 0..n {
                if join[c * n + d] == usize::MAX {
                    let lub = least_upper_bound(&ent, n, c, d).ok_or_else(|| ConstraintError::ClosureViolation {
                        c: names[c].to_string(),
                        d: names[d].to_string(),
                        e: "?".to_string(),
                        reason: "no least upper bound".to_string(),
                    })?;
                    join[c * n + d] = lub;
                    join[d * n + c] = lub;
                }
            }
        }

        Ok(FiniteTableSystem {
            atoms: names,
            index,
            entails: ent,
            join,
        })
    }

    /// Parse the line-oriented table format:
    ///
    /// ```text
    /// # comment
    /// atom x>0
    /// entails x>1 x>0
    /// join a b = c
    /// ```
    pub fn parse(text: &str) -> Result<Self, ConstraintError> {
        let mut atoms = Vec::new();
        let mut pairs = Vec::new();
        let mut joins = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: &str| ConstraintError::TableSyntax {
                line: lineno + 1,
                message: message.to_string(),
            };
            let words: Vec<&str> = line.split_whitespace().collect();
            match words.as_slice() {
                ["atom", name] => atoms.push(name.to_string()),
                ["entails", c, d] => pairs.push((c.to_string(), d.to_string())),
                ["join", c, d, "=", e] => joins.push(((c.to_string(), d.to_string()), e.to_string())),
                ["atom", ..] => return Err(err("expected `atom <name>`")),
                ["entails", ..] => return Err(err("expected `entails <c> <d>`")),
                ["join", ..] => return Err(err("expected `join <c> <d> = <e>`")),
                _ => return Err(err("unknown directive")),
            }
        }
        for (c, d) in &pairs {
            for name in [c, d] {
                if !atoms.contains(name) && name != "true" && name != "false" {
                    return Err(ConstraintError::UnknownAtom(name.clone()));
                }
            }
        }
        Self::build(&atoms, &pairs, &joins)
    }

    /// All atoms including `true` and `false`, in declaration order.
    pub fn atoms(&self) -> impl Iterator<Item = Constraint> + '_ {
        (0..self.atoms.len()).map(|i| self.constraint(i))
    }

    fn constraint(&self, i: usize) -> Constraint {
        match i {
            TRUE => Constraint::True,
            FALSE => Constraint::False,
            _ => Constraint::Named(self.atoms[i].clone()),
        }
    }

    fn idx(&self, c: &Constraint) -> Option<usize> {
        match c {
            Constraint::True => Some(TRUE),
            Constraint::False => Some(FALSE),
            Constraint::Named(name) => self.index.get(name).copied(),
            Constraint::Facts(_) => None,
        }
    }
}

/// Least element (w.r.t. `⊢`-reversed order) among the atoms entailing both
/// `c` and `d`. Prefers `c` or `d` themselves, then the lowest index.
fn least_upper_bound(ent: &[bool], n: usize, c: usize, d: usize) -> Option<usize> {
    let uppers: Vec<usize> = (0..n).filter(|&e| ent[e * n + c] && ent[e * n + d]).collect();
    let is_least = |e: usize| uppers.iter().all(|&u| ent[u * n + e]);
    [c, d]
        .into_iter()
        .filter(|e| uppers.contains(e))
        .chain(uppers.iter().copied())
        .find(|&e| is_least(e))
}

impl ConstraintSystem for FiniteTableSystem {
    fn name(&self) -> &str {
        "finite-table"
    }

    fn owns(&self, c: &Constraint) -> bool {
        self.idx(c).is_some()
    }

    fn entails_owned(&self, c: &Constraint, d: &Constraint) -> bool {
        match (self.idx(c), self.idx(d)) {
            (Some(i), Some(j)) => self.entails[i * self.atoms.len() + j],
            _ => false,
        }
    }

    fn join_owned(&self, c: &Constraint, d: &Constraint) -> Constraint {
        match (self.idx(c), self.idx(d)) {
            (Some(i), Some(j)) => self.constraint(self.join[i * self.atoms.len() + j]),
            _ => Constraint::False,
        }
    }

    fn parse_atom(&self, text: &str) -> Result<Constraint, ConstraintError> {
        let text = text.trim();
        let c = Constraint::named(text);
        if self.owns(&c) {
            Ok(c)
        } else {
            Err(ConstraintError::UnknownAtom(text.to_string()))
        }
    }
}
