//! Theta-rotation rules: matching and ray-shift application, plus the
//! sequential 8-directional array grammar.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::grid::{canonicalize, ArrayObject, Direction, Pixel, Symbol};
use crate::lang::Bounds;
use crate::membrane::MembraneId;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RuleId(pub String);

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for RuleId {
    fn from(s: &str) -> Self {
        RuleId(s.to_string())
    }
}

/// A rule label; `Lambda` is the empty label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Lambda,
    Named(Symbol),
}

impl Label {
    pub fn symbol(&self) -> Option<&Symbol> {
        match self {
            Label::Lambda => None,
            Label::Named(s) => Some(s),
        }
    }

    pub fn is_lambda(&self) -> bool {
        matches!(self, Label::Lambda)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Lambda => f.write_str("_"),
            Label::Named(s) => write!(f, "{s}"),
        }
    }
}

/// Where a rewritten array goes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target {
    Here,
    Out,
    /// Any direct child, chosen nondeterministically.
    InAny,
    InChild(MembraneId),
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Here => f.write_str("here"),
            Target::Out => f.write_str("out"),
            Target::InAny => f.write_str("in"),
            Target::InChild(m) => write!(f, "in.{m}"),
        }
    }
}

/// Which occurrences of a left-hand side may be rewritten.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum OccurrencePolicy {
    #[default]
    Any,
    /// Only the occurrence first in reading order (x ascending, then y
    /// descending).
    Leftmost,
}

impl fmt::Display for OccurrencePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OccurrencePolicy::Any => f.write_str("any"),
            OccurrencePolicy::Leftmost => f.write_str("leftmost"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ThetaRule {
    pub id: RuleId,
    pub label: Label,
    pub lhs: Vec<Symbol>,
    pub rhs: Vec<Symbol>,
    pub direction: Direction,
    pub target: Target,
}

impl ThetaRule {
    /// A `here` rule; adjust `label` and `target` with the builder methods.
    pub fn new(
        id: impl Into<String>,
        lhs: Vec<Symbol>,
        rhs: Vec<Symbol>,
        direction: Direction,
    ) -> Self {
        ThetaRule {
            id: RuleId(id.into()),
            label: Label::Lambda,
            lhs,
            rhs,
            direction,
            target: Target::Here,
        }
    }

    pub fn labelled(mut self, label: Symbol) -> Self {
        self.label = Label::Named(label);
        self
    }

    pub fn with_target(mut self, target: Target) -> Self {
        self.target = target;
        self
    }

    /// Length difference by which the forward ray is shifted.
    pub fn shift(&self) -> i64 {
        self.rhs.len() as i64 - self.lhs.len() as i64
    }

    /// Index within `lhs` of the single symbol outside `terminals`, if the
    /// rule has exactly one.
    pub fn nonterminal_index(&self, terminals: &BTreeSet<Symbol>) -> Option<usize> {
        let mut idx = self
            .lhs
            .iter()
            .enumerate()
            .filter(|(_, s)| !terminals.contains(*s));
        match (idx.next(), idx.next()) {
            (Some((i, _)), None) => Some(i),
            _ => None,
        }
    }
}

impl fmt::Display for ThetaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[Symbol]| v.iter().map(Symbol::as_str).collect::<Vec<_>>().join(" ");
        write!(
            f,
            "rule {} {} : {} -> {} @ {} tar {}",
            self.id,
            self.label,
            join(&self.lhs),
            join(&self.rhs),
            self.direction,
            self.target
        )
    }
}

/// An occurrence of a rule's left-hand side; `anchor` holds `lhs[0]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Match {
    pub anchor: Pixel,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("rule {rule} does not match at {anchor}")]
    NoMatch { rule: RuleId, anchor: Pixel },
    #[error("rule {rule} at {anchor} would write onto occupied cell {at}")]
    Collision {
        rule: RuleId,
        anchor: Pixel,
        at: Pixel,
    },
}

fn matches_at(a: &ArrayObject, r: &ThetaRule, anchor: Pixel) -> bool {
    let u = r.direction.offset();
    r.lhs
        .iter()
        .enumerate()
        .all(|(k, s)| a.get(anchor.step(u, k as i64)) == Some(s))
}

/// All occurrences of `r.lhs` along `r.direction`.
///
/// Under [`OccurrencePolicy::Any`] matches are ordered by y descending, then
/// x ascending. Under [`OccurrencePolicy::Leftmost`] at most the first match
/// in reading order is returned.
pub fn find_matches(a: &ArrayObject, r: &ThetaRule, policy: OccurrencePolicy) -> Vec<Match> {
    let Some(head) = r.lhs.first() else {
        return Vec::new();
    };
    let mut found: Vec<Match> = a
        .cells()
        .iter()
        .filter(|(p, s)| *s == head && matches_at(a, r, **p))
        .map(|(p, _)| Match { anchor: *p })
        .collect();
    match policy {
        OccurrencePolicy::Any => {
            found.sort_by_key(|m| (-m.anchor.y, m.anchor.x));
            found
        }
        OccurrencePolicy::Leftmost => found
            .into_iter()
            .min_by_key(|m| m.anchor.reading_key())
            .into_iter()
            .collect(),
    }
}

/// Rewrites the occurrence at `m`.
///
/// Occupied cells on the forward ray beyond the occurrence move outward by
/// `|rhs| - |lhs|` steps, then `rhs` is written from the anchor. Cells off
/// the ray never move; writing onto one is a [`RewriteError::Collision`].
/// The result keeps the input's coordinates (it is not re-canonicalized).
pub fn apply_rule(a: &ArrayObject, r: &ThetaRule, m: Match) -> Result<ArrayObject, RewriteError> {
    let p = m.anchor;
    if !matches_at(a, r, p) {
        return Err(RewriteError::NoMatch {
            rule: r.id.clone(),
            anchor: p,
        });
    }
    let u = r.direction.offset();
    let lhs_len = r.lhs.len() as i64;
    let s = r.shift();

    let mut cells: BTreeMap<Pixel, Symbol> = a.cells().clone();
    let mut moved = Vec::new();
    for k in 0..lhs_len {
        cells.remove(&p.step(u, k));
    }
    // Every occupied cell further along the ray. The ray leaves the bounding
    // box after at most `span` steps.
    let (lo, hi) = a.bounds();
    let span = (hi.x - lo.x).max(hi.y - lo.y) + 1;
    for k in lhs_len..=lhs_len + span {
        let q = p.step(u, k);
        if let Some(sym) = cells.remove(&q) {
            moved.push((k, sym));
        }
    }
    let collide = |at: Pixel| RewriteError::Collision {
        rule: r.id.clone(),
        anchor: p,
        at,
    };
    for (k, sym) in moved {
        let dst = p.step(u, k + s);
        if cells.insert(dst, sym).is_some() {
            return Err(collide(dst));
        }
    }
    for (k, sym) in r.rhs.iter().enumerate() {
        let dst = p.step(u, k as i64);
        if cells.insert(dst, sym.clone()).is_some() {
            return Err(collide(dst));
        }
    }
    Ok(ArrayObject::from_map_unchecked(cells))
}

/// Matches of `r` in `a` whose application succeeds, with the results.
pub fn applications(
    a: &ArrayObject,
    r: &ThetaRule,
    policy: OccurrencePolicy,
) -> Vec<(Match, ArrayObject)> {
    find_matches(a, r, policy)
        .into_iter()
        .filter_map(|m| apply_rule(a, r, m).ok().map(|b| (m, b)))
        .collect()
}

/// `true` if some occurrence of `r` in `a` can be rewritten without collision.
pub fn is_applicable(a: &ArrayObject, r: &ThetaRule) -> bool {
    find_matches(a, r, OccurrencePolicy::Any)
        .into_iter()
        .any(|m| apply_rule(a, r, m).is_ok())
}

/// A sequential 8-directional array grammar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrayGrammar {
    pub nonterminals: BTreeSet<Symbol>,
    pub terminals: BTreeSet<Symbol>,
    pub rules: Vec<ThetaRule>,
    pub start: Symbol,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("symbol {0} is both terminal and nonterminal")]
    Overlap(Symbol),
    #[error("start symbol {0} is not a nonterminal")]
    BadStart(Symbol),
}

impl ArrayGrammar {
    pub fn new(
        nonterminals: BTreeSet<Symbol>,
        terminals: BTreeSet<Symbol>,
        rules: Vec<ThetaRule>,
        start: Symbol,
    ) -> Result<ArrayGrammar, GrammarError> {
        if let Some(s) = nonterminals.intersection(&terminals).next() {
            return Err(GrammarError::Overlap(s.clone()));
        }
        if !nonterminals.contains(&start) {
            return Err(GrammarError::BadStart(start));
        }
        Ok(ArrayGrammar {
            nonterminals,
            terminals,
            rules,
            start,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GrammarDerivation {
    pub arrays: BTreeSet<ArrayObject>,
    pub truncated: bool,
}

/// Breadth-first closure of all rule applications from the start symbol,
/// collecting the canonical all-terminal arrays.
///
/// Uses `max_steps`, `max_cells_per_array` and `max_states` from `limits`.
pub fn derive_grammar(g: &ArrayGrammar, limits: &Bounds) -> GrammarDerivation {
    let mut out = GrammarDerivation::default();
    let start = ArrayObject::singleton(g.start.clone());
    let mut seen: HashSet<ArrayObject> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some((a, depth)) = queue.pop_front() {
        if a.symbols().all(|s| g.terminals.contains(s)) {
            out.arrays.insert(a);
            continue;
        }
        for r in &g.rules {
            for (_, b) in applications(&a, r, OccurrencePolicy::Any) {
                let b = canonicalize(&b);
                if depth + 1 > limits.max_steps || b.len() > limits.max_cells_per_array {
                    out.truncated = true;
                    continue;
                }
                if seen.contains(&b) {
                    continue;
                }
                if seen.len() >= limits.max_states {
                    out.truncated = true;
                    continue;
                }
                seen.insert(b.clone());
                queue.push_back((b, depth + 1));
            }
        }
    }
    out
}
