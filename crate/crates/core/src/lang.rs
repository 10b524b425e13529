//! Bounded label languages of halting computations.
//!
//! The search is breadth-first over `(configuration, emitted prefix)` pairs.
//! Pruning a branch because its prefix outgrew `max_label_len` is not a
//! truncation: words of that length can only come from shorter prefixes. Any
//! other bound that cuts a live branch clears the `exhaustive` flag.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::grid::{ArrayObject, Symbol};
use crate::membrane::{is_halting, successors, ChoiceSet, Configuration, Outcome, PSystem, Trace};
use crate::rewrite::Label;
use crate::shapes::match_final;

/// A label string. Ordered shortlex: by length, then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(pub Vec<Symbol>);

impl Word {
    pub fn from_labels<'a>(labels: impl IntoIterator<Item = &'a Label>) -> Word {
        Word(
            labels
                .into_iter()
                .filter_map(Label::symbol)
                .cloned()
                .collect(),
        )
    }

    /// `λ` or an empty string is the empty word; text with whitespace is
    /// split on it; otherwise every character is one symbol.
    pub fn parse(text: &str) -> Result<Word, crate::grid::GridError> {
        let t = text.trim();
        if t.is_empty() || t == "λ" {
            return Ok(Word::default());
        }
        if t.contains(char::is_whitespace) {
            return t
                .split_whitespace()
                .map(Symbol::new)
                .collect::<Result<_, _>>()
                .map(Word);
        }
        t.chars()
            .map(|c| Symbol::new(c.encode_utf8(&mut [0u8; 4])))
            .collect::<Result<_, _>>()
            .map(Word)
    }

    /// `count` copies of each `(symbol, count)` in order, e.g. `a^k b^k`.
    pub fn powers(parts: &[(&str, usize)]) -> Word {
        Word(
            parts
                .iter()
                .flat_map(|(s, n)| std::iter::repeat_n(crate::grid::sym(s), *n))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn starts_with(&self, prefix: &Word) -> bool {
        self.0.starts_with(&prefix.0)
    }

    fn pushed(&self, l: &Label) -> Word {
        let mut w = self.clone();
        if let Label::Named(s) = l {
            w.0.push(s.clone());
        }
        w
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("λ");
        }
        let sep = if self.0.iter().all(|s| s.as_str().chars().count() == 1) {
            ""
        } else {
            " "
        };
        let parts: Vec<&str> = self.0.iter().map(Symbol::as_str).collect();
        f.write_str(&parts.join(sep))
    }
}

/// Search limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub max_label_len: usize,
    pub max_steps: usize,
    pub max_cells_per_array: usize,
    pub max_total_arrays: usize,
    pub max_states: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_label_len: 10,
            max_steps: 10_000,
            max_cells_per_array: 10_000,
            max_total_arrays: 1_000,
            max_states: 2_000_000,
        }
    }
}

impl Bounds {
    pub fn with_label_len(max_label_len: usize) -> Bounds {
        Bounds {
            max_label_len,
            ..Bounds::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerationResult {
    pub words: BTreeSet<Word>,
    pub exhaustive: bool,
    pub states_visited: usize,
    pub dead_ends: usize,
    /// First computation found for each word.
    pub witnesses: BTreeMap<Word, Trace>,
}

impl EnumerationResult {
    /// Words one per line in shortlex order, then a summary footer.
    pub fn report(&self) -> String {
        let mut out = String::new();
        for w in &self.words {
            out.push_str(&format!("{w}\n"));
        }
        out.push_str(&format!(
            "# exhaustive={} states={} dead_ends={}\n",
            self.exhaustive, self.states_visited, self.dead_ends
        ));
        out
    }
}

struct Node {
    config: Arc<Configuration>,
    prefix: Word,
    depth: usize,
    parent: Option<(usize, ChoiceSet)>,
}

enum Expansion {
    Halting { accepted: bool },
    Moves(Vec<(ChoiceSet, Configuration)>),
}

struct Exploration {
    nodes: Vec<Node>,
    accepted: Vec<usize>,
    exhaustive: bool,
    dead_ends: usize,
}

impl Exploration {
    fn witness(&self, mut i: usize) -> Trace {
        let final_config = (*self.nodes[i].config).clone();
        let mut steps = Vec::new();
        while let Some((p, ch)) = &self.nodes[i].parent {
            steps.push(ch.clone());
            i = *p;
        }
        steps.reverse();
        Trace {
            initial: (*self.nodes[i].config).clone(),
            steps,
            final_config,
            outcome: Outcome::Halted,
        }
    }
}

/// Breadth-first exploration. With `target`, only prefixes of it are kept.
fn explore(s: &PSystem, b: &Bounds, target: Option<&Word>) -> Exploration {
    let root = Arc::new(s.initial_configuration());
    let mut seen: HashSet<(Arc<Configuration>, Word)> = HashSet::new();
    seen.insert((root.clone(), Word::default()));
    let mut ex = Exploration {
        nodes: vec![Node {
            config: root,
            prefix: Word::default(),
            depth: 0,
            parent: None,
        }],
        accepted: Vec::new(),
        exhaustive: true,
        dead_ends: 0,
    };
    let mut frontier = vec![0usize];
    while !frontier.is_empty() {
        let expansions: Vec<Expansion> = frontier
            .par_iter()
            .map(|&i| {
                let c = &ex.nodes[i].config;
                if is_halting(s, c) {
                    Expansion::Halting {
                        accepted: match_final(c, s),
                    }
                } else {
                    Expansion::Moves(successors(s, c))
                }
            })
            .collect();
        let mut next = Vec::new();
        for (&i, e) in frontier.iter().zip(expansions) {
            let moves = match e {
                Expansion::Halting { accepted } => {
                    let done = target.is_none_or(|w| *w == ex.nodes[i].prefix);
                    if accepted && done {
                        ex.accepted.push(i);
                    }
                    continue;
                }
                Expansion::Moves(m) => m,
            };
            if moves.is_empty() {
                ex.dead_ends += 1;
                continue;
            }
            let depth = ex.nodes[i].depth + 1;
            for (ch, c) in moves {
                let prefix = ex.nodes[i].prefix.pushed(&ch.label);
                if prefix.len() > b.max_label_len || target.is_some_and(|w| !w.starts_with(&prefix))
                {
                    continue;
                }
                if depth > b.max_steps
                    || c.max_cells() > b.max_cells_per_array
                    || c.total_arrays() > b.max_total_arrays
                {
                    ex.exhaustive = false;
                    continue;
                }
                let c = Arc::new(c);
                let key = (c.clone(), prefix.clone());
                if seen.contains(&key) {
                    continue;
                }
                if seen.len() >= b.max_states {
                    ex.exhaustive = false;
                    continue;
                }
                seen.insert(key);
                ex.nodes.push(Node {
                    config: c,
                    prefix,
                    depth,
                    parent: Some((i, ch)),
                });
                next.push(ex.nodes.len() - 1);
            }
        }
        frontier = next;
    }
    ex
}

/// Label strings of accepted halting computations, up to `b.max_label_len`.
pub fn enumerate_label_language(s: &PSystem, b: &Bounds) -> EnumerationResult {
    let ex = explore(s, b, None);
    let mut witnesses = BTreeMap::new();
    for &i in &ex.accepted {
        let w = ex.nodes[i].prefix.clone();
        witnesses.entry(w).or_insert_with(|| ex.witness(i));
    }
    EnumerationResult {
        words: witnesses.keys().cloned().collect(),
        exhaustive: ex.exhaustive,
        states_visited: ex.nodes.len(),
        dead_ends: ex.dead_ends,
        witnesses,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Acceptance {
    Yes,
    No,
    Unknown,
}

impl fmt::Display for Acceptance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Acceptance::Yes => f.write_str("yes"),
            Acceptance::No => f.write_str("no"),
            Acceptance::Unknown => f.write_str("unknown"),
        }
    }
}

/// Decides whether `w` is the label string of an accepted computation.
/// `b.max_label_len` is ignored in favour of `|w|`.
pub fn accepts(s: &PSystem, w: &Word, b: &Bounds) -> Acceptance {
    let b = Bounds {
        max_label_len: w.len(),
        ..*b
    };
    let ex = explore(s, &b, Some(w));
    if !ex.accepted.is_empty() {
        Acceptance::Yes
    } else if ex.exhaustive {
        Acceptance::No
    } else {
        Acceptance::Unknown
    }
}

/// Canonical arrays left in the output membrane by accepted computations.
pub fn collect_outputs(s: &PSystem, b: &Bounds) -> BTreeSet<ArrayObject> {
    let ex = explore(s, b, None);
    let out = s.tree.output();
    ex.accepted
        .iter()
        .flat_map(|&i| ex.nodes[i].config.region(out).to_vec())
        .collect()
}
