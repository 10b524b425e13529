//! Brute-force reference languages, independent of the array engine.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use thiserror::Error;

use crate::grid::Symbol;
use crate::lang::Word;
use crate::translate::{Cfg, RegGrammar};

/// Productions as sentential-form rewrites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StringGrammar {
    pub nonterminals: BTreeSet<Symbol>,
    pub terminals: BTreeSet<Symbol>,
    pub productions: Vec<(Symbol, Vec<Symbol>)>,
    pub start: Symbol,
}

impl From<&RegGrammar> for StringGrammar {
    fn from(g: &RegGrammar) -> Self {
        StringGrammar {
            nonterminals: g.nonterminals.clone(),
            terminals: g.terminals.clone(),
            productions: g
                .productions
                .iter()
                .map(|p| {
                    (
                        p.lhs.clone(),
                        std::iter::once(p.terminal.clone())
                            .chain(p.next.clone())
                            .collect(),
                    )
                })
                .collect(),
            start: g.start.clone(),
        }
    }
}

impl From<&Cfg> for StringGrammar {
    fn from(g: &Cfg) -> Self {
        StringGrammar {
            nonterminals: g.nonterminals.clone(),
            terminals: g.terminals.clone(),
            productions: g
                .productions
                .iter()
                .map(|p| (p.lhs.clone(), p.rhs.clone()))
                .collect(),
            start: g.start.clone(),
        }
    }
}

/// Shortest terminal yield of each nonterminal; unproductive ones are absent.
fn min_yields(g: &StringGrammar) -> BTreeMap<Symbol, usize> {
    let mut best: BTreeMap<Symbol, usize> = BTreeMap::new();
    loop {
        let mut changed = false;
        for (lhs, rhs) in &g.productions {
            let cost: Option<usize> = rhs
                .iter()
                .map(|s| {
                    if g.nonterminals.contains(s) {
                        best.get(s).copied()
                    } else {
                        Some(1)
                    }
                })
                .sum();
            if let Some(c) = cost {
                if best.get(lhs).is_none_or(|&b| c < b) {
                    best.insert(lhs.clone(), c);
                    changed = true;
                }
            }
        }
        if !changed {
            return best;
        }
    }
}

/// `L(g)` restricted to words of length at most `max_len`, by leftmost
/// derivations over sentential forms.
pub fn grammar_language(g: &StringGrammar, max_len: usize) -> BTreeSet<Word> {
    let yields = min_yields(g);
    let mut by_lhs: BTreeMap<&Symbol, Vec<&Vec<Symbol>>> = BTreeMap::new();
    for (l, r) in &g.productions {
        by_lhs.entry(l).or_default().push(r);
    }
    let cost = |form: &[Symbol]| -> Option<usize> {
        form.iter()
            .map(|s| {
                if g.nonterminals.contains(s) {
                    yields.get(s).copied()
                } else {
                    Some(1)
                }
            })
            .sum()
    };
    let mut out = BTreeSet::new();
    let start = vec![g.start.clone()];
    if cost(&start).is_none_or(|c| c > max_len) {
        return out;
    }
    let mut seen: HashSet<Vec<Symbol>> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(form) = queue.pop_front() {
        let Some(i) = form.iter().position(|s| g.nonterminals.contains(s)) else {
            out.insert(Word(form));
            continue;
        };
        for rhs in by_lhs.get(&form[i]).into_iter().flatten() {
            let mut next = form[..i].to_vec();
            next.extend(rhs.iter().cloned());
            next.extend(form[i + 1..].iter().cloned());
            if cost(&next).is_some_and(|c| c <= max_len) && !seen.contains(&next) {
                seen.insert(next.clone());
                queue.push_back(next);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("unknown example {0:?}; expected pi1, pi2 or pi5")]
    UnknownName(String),
}

/// Closed-form languages of the bundled example systems, up to `max_len`.
pub fn example_language(name: &str, max_len: usize) -> Result<BTreeSet<Word>, OracleError> {
    let mut out = BTreeSet::new();
    match name {
        "pi1" => {
            for n in 1.. {
                if 16 * n > max_len {
                    break;
                }
                out.insert(Word::powers(&[("a", 16 * n)]));
            }
        }
        "pi2" => {
            for n in 0.. {
                let (a, b) = (8 * n + 4, 8 * n + 20);
                if a + b > max_len {
                    break;
                }
                out.insert(Word::powers(&[("a", a), ("b", b)]));
            }
        }
        "pi5" => {
            for n in 1..=max_len / 2 {
                out.insert(Word::powers(&[("a", n), ("b", n)]));
            }
        }
        other => return Err(OracleError::UnknownName(other.to_string())),
    }
    Ok(out)
}
