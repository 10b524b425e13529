//! Membrane structure, configurations and the labelled maximally parallel
//! transition relation.
//!
//! One step rewrites every array that some enabled rule can rewrite, each by
//! exactly one rule at one occurrence. Priorities are membrane-global: an
//! applicable higher rule disables lower rules for every array in the region.
//! All rules used in a step carry the step's label or the empty label.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grid::{canonicalize, ArrayObject, Pixel, Symbol};
use crate::lang::Word;
use crate::rewrite::{
    applications, is_applicable, Label, Match, OccurrencePolicy, RuleId, Target, ThetaRule,
};
use crate::shapes::FinalSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MembraneId(pub u32);

impl fmt::Display for MembraneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("membrane {0} appears twice")]
    Duplicate(MembraneId),
    #[error("membrane {0} has unknown parent {1}")]
    UnknownParent(MembraneId, MembraneId),
    #[error("membrane structure must have exactly one skin, found {0}")]
    Roots(usize),
    #[error("membrane structure contains a cycle")]
    Cycle,
    #[error("output membrane {0} is not in the structure")]
    BadOutput(MembraneId),
}

/// Rooted tree of membranes. The root is the skin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MembraneTree {
    parent: BTreeMap<MembraneId, Option<MembraneId>>,
    output: MembraneId,
}

impl MembraneTree {
    /// Builds a tree from `(membrane, parent)` pairs, the skin having no parent.
    pub fn new(
        edges: impl IntoIterator<Item = (MembraneId, Option<MembraneId>)>,
        output: MembraneId,
    ) -> Result<MembraneTree, TreeError> {
        let mut parent = BTreeMap::new();
        for (m, p) in edges {
            if parent.insert(m, p).is_some() {
                return Err(TreeError::Duplicate(m));
            }
        }
        for (m, p) in &parent {
            if let Some(p) = p {
                if !parent.contains_key(p) {
                    return Err(TreeError::UnknownParent(*m, *p));
                }
            }
        }
        let roots = parent.values().filter(|p| p.is_none()).count();
        if roots != 1 {
            return Err(TreeError::Roots(roots));
        }
        // Every node must reach the root within |nodes| steps.
        for &m in parent.keys() {
            let mut cur = m;
            let mut hops = 0;
            while let Some(Some(p)) = parent.get(&cur) {
                cur = *p;
                hops += 1;
                if hops > parent.len() {
                    return Err(TreeError::Cycle);
                }
            }
        }
        if !parent.contains_key(&output) {
            return Err(TreeError::BadOutput(output));
        }
        Ok(MembraneTree { parent, output })
    }

    /// A single membrane that is also the output.
    pub fn single(m: MembraneId) -> MembraneTree {
        MembraneTree {
            parent: BTreeMap::from([(m, None)]),
            output: m,
        }
    }

    pub fn skin(&self) -> MembraneId {
        *self
            .parent
            .iter()
            .find(|(_, p)| p.is_none())
            .map(|(m, _)| m)
            .expect("tree has a skin")
    }

    pub fn output(&self) -> MembraneId {
        self.output
    }

    pub fn nodes(&self) -> impl Iterator<Item = MembraneId> + '_ {
        self.parent.keys().copied()
    }

    pub fn contains(&self, m: MembraneId) -> bool {
        self.parent.contains_key(&m)
    }

    pub fn parent(&self, m: MembraneId) -> Option<MembraneId> {
        self.parent.get(&m).copied().flatten()
    }

    pub fn children(&self, m: MembraneId) -> Vec<MembraneId> {
        self.parent
            .iter()
            .filter(|(_, p)| **p == Some(m))
            .map(|(c, _)| *c)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }
}

impl fmt::Display for MembraneTree {
    /// Bracket form, e.g. `(1 (2) (3 (4) (5)))`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn walk(t: &MembraneTree, m: MembraneId, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write!(f, "({m}")?;
            for c in t.children(m) {
                f.write_str(" ")?;
                walk(t, c, f)?;
            }
            f.write_str(")")
        }
        walk(self, self.skin(), f)
    }
}

/// Rules of one membrane with their priority relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub id: MembraneId,
    pub rules: Vec<ThetaRule>,
    /// Pairs `(higher, lower)`, transitively closed.
    priority: BTreeSet<(RuleId, RuleId)>,
}

impl Region {
    pub fn new(id: MembraneId, rules: Vec<ThetaRule>) -> Region {
        Region {
            id,
            rules,
            priority: BTreeSet::new(),
        }
    }

    /// Adds `(higher, lower)` pairs and re-closes the relation transitively.
    pub fn with_priority(mut self, pairs: impl IntoIterator<Item = (RuleId, RuleId)>) -> Region {
        self.priority.extend(pairs);
        self.close_priority();
        self
    }

    fn close_priority(&mut self) {
        loop {
            let mut added = Vec::new();
            for (a, b) in &self.priority {
                for (c, d) in self.priority.range((b.clone(), RuleId(String::new()))..) {
                    if c != b {
                        break;
                    }
                    if !self.priority.contains(&(a.clone(), d.clone())) {
                        added.push((a.clone(), d.clone()));
                    }
                }
            }
            if added.is_empty() {
                break;
            }
            self.priority.extend(added);
        }
    }

    pub fn priority(&self) -> &BTreeSet<(RuleId, RuleId)> {
        &self.priority
    }

    pub fn dominates(&self, higher: &RuleId, lower: &RuleId) -> bool {
        self.priority.contains(&(higher.clone(), lower.clone()))
    }

    pub fn rule(&self, id: &RuleId) -> Option<&ThetaRule> {
        self.rules.iter().find(|r| &r.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    /// Every step uses at least one rule with a non-empty label.
    #[default]
    Restricted,
    /// Steps using only empty-labelled rules are allowed.
    Unrestricted,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Restricted => f.write_str("restricted"),
            Mode::Unrestricted => f.write_str("unrestricted"),
        }
    }
}

/// A complete labelled array P system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PSystem {
    pub name: String,
    pub alphabet: BTreeSet<Symbol>,
    pub terminals: BTreeSet<Symbol>,
    pub tree: MembraneTree,
    pub init: BTreeMap<MembraneId, Vec<ArrayObject>>,
    pub regions: BTreeMap<MembraneId, Region>,
    pub labels: BTreeSet<Symbol>,
    pub mode: Mode,
    pub policy: OccurrencePolicy,
    pub final_spec: FinalSpec,
}

impl PSystem {
    pub fn region(&self, m: MembraneId) -> Option<&Region> {
        self.regions.get(&m)
    }

    pub fn rules_of(&self, m: MembraneId) -> &[ThetaRule] {
        self.regions.get(&m).map_or(&[], |r| r.rules.as_slice())
    }

    pub fn rule_count(&self) -> usize {
        self.regions.values().map(|r| r.rules.len()).sum()
    }

    pub fn initial_configuration(&self) -> Configuration {
        let mut c = Configuration::empty(&self.tree);
        for (m, arrays) in &self.init {
            if let Some(slot) = c.contents.get_mut(m) {
                slot.extend(arrays.iter().map(canonicalize));
                slot.sort();
            }
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("membrane {0} is not in the membrane structure")]
    UnknownMembrane(MembraneId),
    #[error("region {region}, rule {rule}: {msg}")]
    Rule {
        region: MembraneId,
        rule: RuleId,
        msg: String,
    },
    #[error("region {region}: duplicate rule id {rule}")]
    DuplicateRule { region: MembraneId, rule: RuleId },
    #[error("label conflict: rule {rule} is labelled {first} in region {first_region} and {second} in region {second_region}")]
    LabelConflict {
        rule: RuleId,
        first: Label,
        first_region: MembraneId,
        second: Label,
        second_region: MembraneId,
    },
    #[error("region {region}: priority {msg}")]
    Priority { region: MembraneId, msg: String },
    #[error("initial array in region {region} uses symbol {symbol} outside the alphabet")]
    InitSymbol { region: MembraneId, symbol: Symbol },
    #[error("terminal {0} is not in the alphabet")]
    Terminal(Symbol),
    #[error("final specification: {0}")]
    Final(String),
}

/// Checks well-formedness, returning every violation found.
pub fn validate_system(s: &PSystem) -> Result<(), Vec<ValidationError>> {
    let mut errs = Vec::new();
    for t in &s.terminals {
        if !s.alphabet.contains(t) {
            errs.push(ValidationError::Terminal(t.clone()));
        }
    }
    for (m, arrays) in &s.init {
        if !s.tree.contains(*m) {
            errs.push(ValidationError::UnknownMembrane(*m));
        }
        let bad: BTreeSet<&Symbol> = arrays
            .iter()
            .flat_map(|a| a.symbols())
            .filter(|x| !s.alphabet.contains(*x))
            .collect();
        for b in bad {
            errs.push(ValidationError::InitSymbol {
                region: *m,
                symbol: b.clone(),
            });
        }
    }
    let mut seen_labels: BTreeMap<&RuleId, (&Label, MembraneId)> = BTreeMap::new();
    for (m, region) in &s.regions {
        if !s.tree.contains(*m) || region.id != *m {
            errs.push(ValidationError::UnknownMembrane(*m));
            continue;
        }
        let children = s.tree.children(*m);
        let mut ids = BTreeSet::new();
        for r in &region.rules {
            let rerr = |msg: String| ValidationError::Rule {
                region: *m,
                rule: r.id.clone(),
                msg,
            };
            if !ids.insert(&r.id) {
                errs.push(ValidationError::DuplicateRule {
                    region: *m,
                    rule: r.id.clone(),
                });
            }
            if r.lhs.is_empty() || r.rhs.is_empty() {
                errs.push(rerr("both sides must be non-empty".into()));
                continue;
            }
            for x in r.lhs.iter().chain(&r.rhs) {
                if !s.alphabet.contains(x) {
                    errs.push(rerr(format!("symbol {x} is not in the alphabet")));
                }
            }
            let nonterminals = r.lhs.iter().filter(|x| !s.terminals.contains(*x)).count();
            if nonterminals != 1 {
                errs.push(rerr(format!(
                    "left-hand side must contain exactly one nonterminal, found {nonterminals}"
                )));
            }
            if r.rhs.len() < r.lhs.len() {
                errs.push(rerr(
                    "right-hand side is shorter than the left-hand side".into(),
                ));
            }
            if let Label::Named(l) = &r.label {
                if !s.labels.contains(l) {
                    errs.push(rerr(format!("label {l} is not declared")));
                }
            }
            match &r.target {
                Target::InChild(c) if !children.contains(c) => {
                    errs.push(rerr(format!(
                        "target in.{c} is not a child of membrane {m}"
                    )));
                }
                Target::InAny if children.is_empty() => {
                    errs.push(rerr(format!("target in but membrane {m} has no children")));
                }
                _ => {}
            }
            match seen_labels.get(&r.id) {
                Some((l, other)) if *l != &r.label => errs.push(ValidationError::LabelConflict {
                    rule: r.id.clone(),
                    first: (*l).clone(),
                    first_region: *other,
                    second: r.label.clone(),
                    second_region: *m,
                }),
                Some(_) => {}
                None => {
                    seen_labels.insert(&r.id, (&r.label, *m));
                }
            }
        }
        for (hi, lo) in &region.priority {
            if hi == lo {
                errs.push(ValidationError::Priority {
                    region: *m,
                    msg: format!("is cyclic through rule {hi}"),
                });
            }
            for id in [hi, lo] {
                if !ids.contains(id) {
                    errs.push(ValidationError::Priority {
                        region: *m,
                        msg: format!("names unknown rule {id}"),
                    });
                }
            }
        }
    }
    for (m, _) in s.final_spec.entries() {
        if !s.tree.contains(*m) {
            errs.push(ValidationError::Final(format!(
                "membrane {m} is not in the structure"
            )));
        }
    }
    for x in s.final_spec.symbols() {
        if !s.alphabet.contains(x) {
            errs.push(ValidationError::Final(format!(
                "symbol {x} is not in the alphabet"
            )));
        }
    }
    if errs.is_empty() {
        Ok(())
    } else {
        Err(errs)
    }
}

/// Per-region multisets of canonical arrays, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    contents: BTreeMap<MembraneId, Vec<ArrayObject>>,
}

impl Configuration {
    pub fn empty(tree: &MembraneTree) -> Configuration {
        Configuration {
            contents: tree.nodes().map(|m| (m, Vec::new())).collect(),
        }
    }

    /// Builds a configuration, canonicalizing and sorting each region.
    pub fn from_contents(contents: BTreeMap<MembraneId, Vec<ArrayObject>>) -> Configuration {
        Configuration {
            contents: contents
                .into_iter()
                .map(|(m, v)| {
                    let mut v: Vec<_> = v.iter().map(canonicalize).collect();
                    v.sort();
                    (m, v)
                })
                .collect(),
        }
    }

    pub fn region(&self, m: MembraneId) -> &[ArrayObject] {
        self.contents.get(&m).map_or(&[], Vec::as_slice)
    }

    pub fn regions(&self) -> impl Iterator<Item = (MembraneId, &[ArrayObject])> {
        self.contents.iter().map(|(m, v)| (*m, v.as_slice()))
    }

    pub fn total_arrays(&self) -> usize {
        self.contents.values().map(Vec::len).sum()
    }

    pub fn max_cells(&self) -> usize {
        self.contents
            .values()
            .flatten()
            .map(ArrayObject::len)
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (m, arrays) in &self.contents {
            writeln!(f, "== region {m} ({} arrays)", arrays.len())?;
            for a in arrays {
                writeln!(f, "{a}")?;
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

/// One array rewritten in a step. `index` refers to the sorted region
/// contents before the step; `dest` is `None` when the array leaves the skin.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment {
    pub membrane: MembraneId,
    pub index: usize,
    pub rule: RuleId,
    pub anchor: Pixel,
    pub dest: Option<MembraneId>,
}

/// All rewrites of one transition plus the label it emits.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChoiceSet {
    pub assignments: Vec<Assignment>,
    pub label: Label,
}

/// Rules of region `m` that may be used in the next step.
pub fn enabled_rules(s: &PSystem, c: &Configuration, m: MembraneId) -> BTreeSet<RuleId> {
    let Some(region) = s.region(m) else {
        return BTreeSet::new();
    };
    let arrays = c.region(m);
    let applicable: Vec<&ThetaRule> = region
        .rules
        .iter()
        .filter(|r| arrays.iter().any(|a| is_applicable(a, r)))
        .collect();
    applicable
        .iter()
        .filter(|r| !applicable.iter().any(|hi| region.dominates(&hi.id, &r.id)))
        .map(|r| r.id.clone())
        .collect()
}

/// True iff no rule of any region applies to any array of that region.
pub fn is_halting(s: &PSystem, c: &Configuration) -> bool {
    c.regions().all(|(m, arrays)| {
        s.rules_of(m)
            .iter()
            .all(|r| arrays.iter().all(|a| !is_applicable(a, r)))
    })
}

struct Rewrite<'a> {
    rule: &'a ThetaRule,
    at: Match,
    result: ArrayObject,
    dest: Option<MembraneId>,
}

fn destinations(s: &PSystem, m: MembraneId, t: &Target) -> Vec<Option<MembraneId>> {
    match t {
        Target::Here => vec![Some(m)],
        Target::Out => vec![s.tree.parent(m)],
        Target::InAny => s.tree.children(m).into_iter().map(Some).collect(),
        Target::InChild(c) => vec![Some(*c)],
    }
}

fn rewrites<'a>(
    s: &'a PSystem,
    m: MembraneId,
    enabled: &[&'a ThetaRule],
    a: &ArrayObject,
) -> Vec<Rewrite<'a>> {
    let mut out = Vec::new();
    for &r in enabled {
        for (at, result) in applications(a, r, s.policy) {
            let result = canonicalize(&result);
            for dest in destinations(s, m, &r.target) {
                out.push(Rewrite {
                    rule: r,
                    at,
                    result: result.clone(),
                    dest,
                });
            }
        }
    }
    if s.policy == OccurrencePolicy::Leftmost {
        // Only the leftmost rewritable nonterminal of the array.
        let key = |w: &Rewrite| {
            let k = w.rule.nonterminal_index(&s.terminals).unwrap_or(0) as i64;
            w.at.anchor.step(w.rule.direction.offset(), k).reading_key()
        };
        if let Some(best) = out.iter().map(key).min() {
            out.retain(|w| key(w) == best);
        }
    }
    out
}

/// Every legal transition from `c` with its resulting configuration.
pub fn successors(s: &PSystem, c: &Configuration) -> Vec<(ChoiceSet, Configuration)> {
    // (membrane, index, options) for every rewritable array.
    let mut slots: Vec<(MembraneId, usize, Vec<Rewrite>)> = Vec::new();
    for (m, arrays) in c.regions() {
        let enabled_ids = enabled_rules(s, c, m);
        if enabled_ids.is_empty() {
            continue;
        }
        let enabled: Vec<&ThetaRule> = s
            .rules_of(m)
            .iter()
            .filter(|r| enabled_ids.contains(&r.id))
            .collect();
        for (i, a) in arrays.iter().enumerate() {
            let opts = rewrites(s, m, &enabled, a);
            if !opts.is_empty() {
                slots.push((m, i, opts));
            }
        }
    }
    if slots.is_empty() {
        return Vec::new();
    }

    let mut step_labels: BTreeSet<Label> = slots
        .iter()
        .flat_map(|(_, _, o)| o.iter().map(|w| w.rule.label.clone()))
        .filter(|l| !l.is_lambda())
        .collect();
    if s.mode == Mode::Unrestricted {
        step_labels.insert(Label::Lambda);
    }

    let mut out = Vec::new();
    for b in step_labels {
        let filtered: Vec<Vec<&Rewrite>> = slots
            .iter()
            .map(|(_, _, o)| {
                o.iter()
                    .filter(|w| w.rule.label.is_lambda() || w.rule.label == b)
                    .collect()
            })
            .collect();
        if filtered.iter().any(Vec::is_empty) {
            continue;
        }
        let mut pick = vec![0usize; filtered.len()];
        loop {
            let chosen: Vec<&Rewrite> = pick.iter().zip(&filtered).map(|(&k, o)| o[k]).collect();
            if b.is_lambda() || chosen.iter().any(|w| w.rule.label == b) {
                out.push(build_step(c, &slots, &chosen, &b));
            }
            // Odometer increment over the cartesian product.
            let mut pos = 0;
            loop {
                if pos == pick.len() {
                    break;
                }
                pick[pos] += 1;
                if pick[pos] < filtered[pos].len() {
                    break;
                }
                pick[pos] = 0;
                pos += 1;
            }
            if pos == pick.len() {
                break;
            }
        }
    }
    out
}

fn build_step(
    c: &Configuration,
    slots: &[(MembraneId, usize, Vec<Rewrite>)],
    chosen: &[&Rewrite],
    label: &Label,
) -> (ChoiceSet, Configuration) {
    let rewritten: BTreeSet<(MembraneId, usize)> = slots.iter().map(|(m, i, _)| (*m, *i)).collect();
    let mut contents: BTreeMap<MembraneId, Vec<ArrayObject>> = BTreeMap::new();
    for (m, arrays) in c.regions() {
        let kept = arrays
            .iter()
            .enumerate()
            .filter(|(i, _)| !rewritten.contains(&(m, *i)))
            .map(|(_, a)| a.clone());
        contents.insert(m, kept.collect());
    }
    let mut assignments = Vec::with_capacity(chosen.len());
    for ((m, i, _), w) in slots.iter().zip(chosen) {
        if let Some(d) = w.dest {
            contents.entry(d).or_default().push(w.result.clone());
        }
        assignments.push(Assignment {
            membrane: *m,
            index: *i,
            rule: w.rule.id.clone(),
            anchor: w.at.anchor,
            dest: w.dest,
        });
    }
    for v in contents.values_mut() {
        v.sort();
    }
    (
        ChoiceSet {
            assignments,
            label: label.clone(),
        },
        Configuration { contents },
    )
}

/// Every legal transition from `c`. Empty when `c` is halting or a dead end.
pub fn legal_steps(s: &PSystem, c: &Configuration) -> Vec<ChoiceSet> {
    successors(s, c).into_iter().map(|(ch, _)| ch).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("no array {index} in region {membrane}")]
    NoArray { membrane: MembraneId, index: usize },
    #[error("no rule {rule} in region {membrane}")]
    NoRule { membrane: MembraneId, rule: RuleId },
    #[error(transparent)]
    Rewrite(#[from] crate::rewrite::RewriteError),
}

/// Applies all assignments of `ch` simultaneously.
///
/// Only checks that the referenced arrays, rules and occurrences exist; use
/// [`legal_steps`] to decide whether the choice is legal.
pub fn apply_step(
    s: &PSystem,
    c: &Configuration,
    ch: &ChoiceSet,
) -> Result<Configuration, StepError> {
    let mut contents: BTreeMap<MembraneId, Vec<Option<ArrayObject>>> = c
        .contents
        .iter()
        .map(|(m, v)| (*m, v.iter().cloned().map(Some).collect()))
        .collect();
    let mut arriving: Vec<(MembraneId, ArrayObject)> = Vec::new();
    for a in &ch.assignments {
        let no_array = || StepError::NoArray {
            membrane: a.membrane,
            index: a.index,
        };
        let slot = contents
            .get_mut(&a.membrane)
            .and_then(|v| v.get_mut(a.index))
            .ok_or_else(no_array)?;
        let arr = slot.take().ok_or_else(no_array)?;
        let rule = s
            .region(a.membrane)
            .and_then(|r| r.rule(&a.rule))
            .ok_or_else(|| StepError::NoRule {
                membrane: a.membrane,
                rule: a.rule.clone(),
            })?;
        let out = crate::rewrite::apply_rule(&arr, rule, Match { anchor: a.anchor })?;
        if let Some(d) = a.dest {
            arriving.push((d, canonicalize(&out)));
        }
    }
    let mut next: BTreeMap<MembraneId, Vec<ArrayObject>> = contents
        .into_iter()
        .map(|(m, v)| (m, v.into_iter().flatten().collect()))
        .collect();
    for (d, a) in arriving {
        next.entry(d).or_default().push(a);
    }
    for v in next.values_mut() {
        v.sort();
    }
    Ok(Configuration { contents: next })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Halted,
    /// Rules apply but no label-consistent step exists.
    DeadEnd,
    BudgetExhausted,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Halted => f.write_str("halted"),
            Outcome::DeadEnd => f.write_str("dead-end"),
            Outcome::BudgetExhausted => f.write_str("budget-exhausted"),
        }
    }
}

/// A recorded computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub initial: Configuration,
    pub steps: Vec<ChoiceSet>,
    pub final_config: Configuration,
    pub outcome: Outcome,
}

impl Trace {
    /// Concatenated step labels, empty labels omitted.
    pub fn word(&self) -> Word {
        Word::from_labels(self.steps.iter().map(|c| &c.label))
    }
}

/// Follows uniformly chosen legal steps until halting, a dead end, or
/// `max_steps` steps.
pub fn run_random(s: &PSystem, seed: u64, max_steps: usize) -> Trace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial = s.initial_configuration();
    let mut cur = initial.clone();
    let mut steps = Vec::new();
    let outcome = loop {
        if is_halting(s, &cur) {
            break Outcome::Halted;
        }
        if steps.len() >= max_steps {
            break Outcome::BudgetExhausted;
        }
        let mut next = successors(s, &cur);
        if next.is_empty() {
            break Outcome::DeadEnd;
        }
        let k = rng.random_range(0..next.len());
        let (ch, c) = next.swap_remove(k);
        steps.push(ch);
        cur = c;
    };
    Trace {
        initial,
        steps,
        final_config: cur,
        outcome,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("step {step}: choice is not a legal transition")]
    IllegalChoice { step: usize },
}

/// Re-executes a trace, checking each choice against [`legal_steps`].
pub fn replay(s: &PSystem, t: &Trace) -> Result<Configuration, ReplayError> {
    let mut cur = t.initial.clone();
    for (i, ch) in t.steps.iter().enumerate() {
        let next = successors(s, &cur)
            .into_iter()
            .find(|(c, _)| c == ch)
            .ok_or(ReplayError::IllegalChoice { step: i })?;
        cur = next.1;
    }
    Ok(cur)
}

/// Line-oriented trace text: one step per line,
/// `<label> <membrane>[<index>]:<rule>@(x,y)-><dest> ...`, with `env` as the
/// destination of arrays leaving the skin. `#` starts a comment line.
pub fn format_steps(steps: &[ChoiceSet]) -> String {
    let mut out = String::new();
    for ch in steps {
        out.push_str(&ch.label.to_string());
        for a in &ch.assignments {
            let dest = a.dest.map_or_else(|| "env".to_string(), |d| d.to_string());
            out.push_str(&format!(
                " {}[{}]:{}@{}->{}",
                a.membrane, a.index, a.rule, a.anchor, dest
            ));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("trace line {line}: {msg}")]
pub struct TraceParseError {
    pub line: usize,
    pub msg: String,
}

/// Parses the text produced by [`format_steps`].
pub fn parse_steps(text: &str) -> Result<Vec<ChoiceSet>, TraceParseError> {
    let mut steps = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: &str| TraceParseError {
            line: n + 1,
            msg: msg.to_string(),
        };
        let mut toks = line.split_whitespace();
        let label = match toks.next() {
            Some("_") => Label::Lambda,
            Some(t) => Label::Named(Symbol::new(t).map_err(|_| err("bad label"))?),
            None => unreachable!("line is non-empty"),
        };
        let mut assignments = Vec::new();
        for tok in toks {
            assignments.push(
                parse_assignment(tok).ok_or_else(|| err(&format!("bad assignment {tok:?}")))?,
            );
        }
        steps.push(ChoiceSet { assignments, label });
    }
    Ok(steps)
}

fn parse_assignment(tok: &str) -> Option<Assignment> {
    let (mem, rest) = tok.split_once('[')?;
    let (index, rest) = rest.split_once("]:")?;
    let (rule, rest) = rest.split_once("@(")?;
    let (coords, dest) = rest.split_once(")->")?;
    let (x, y) = coords.split_once(',')?;
    if rule.is_empty() {
        return None;
    }
    let dest = match dest {
        "env" => None,
        d => Some(MembraneId(d.parse().ok()?)),
    };
    Some(Assignment {
        membrane: MembraneId(mem.parse().ok()?),
        index: index.parse().ok()?,
        rule: RuleId(rule.to_string()),
        anchor: Pixel::new(x.parse().ok()?, y.parse().ok()?),
        dest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{parse_grid, sym, Direction};
    use crate::shapes::RegionPredicate;

    fn syms(s: &str) -> Vec<Symbol> {
        s.split_whitespace().map(sym).collect()
    }

    fn rule(id: &str, label: Option<&str>, lhs: &str, rhs: &str, deg: u32, t: Target) -> ThetaRule {
        let r = ThetaRule::new(
            id,
            syms(lhs),
            syms(rhs),
            Direction::from_degrees(deg).unwrap(),
        )
        .with_target(t);
        match label {
            Some(l) => r.labelled(sym(l)),
            None => r,
        }
    }

    fn one_region(rules: Vec<ThetaRule>, init: Vec<ArrayObject>, mode: Mode) -> PSystem {
        let m = MembraneId(1);
        let alphabet: BTreeSet<Symbol> = syms("A B C x y").into_iter().collect();
        PSystem {
            name: "t".into(),
            alphabet,
            terminals: syms("x y").into_iter().collect(),
            tree: MembraneTree::single(m),
            init: BTreeMap::from([(m, init)]),
            regions: BTreeMap::from([(m, Region::new(m, rules))]),
            labels: syms("a b c").into_iter().collect(),
            mode,
            policy: OccurrencePolicy::Any,
            final_spec: FinalSpec::from_entries([(m, RegionPredicate::AllTerminal)]),
        }
    }

    #[test]
    fn tree_shape() {
        let t = MembraneTree::new(
            [
                (MembraneId(1), None),
                (MembraneId(2), Some(MembraneId(1))),
                (MembraneId(3), Some(MembraneId(1))),
                (MembraneId(4), Some(MembraneId(3))),
            ],
            MembraneId(4),
        )
        .unwrap();
        assert_eq!(t.to_string(), "(1 (2) (3 (4)))");
        assert_eq!(t.skin(), MembraneId(1));
        assert_eq!(t.parent(MembraneId(4)), Some(MembraneId(3)));
        assert_eq!(
            t.children(MembraneId(1)),
            vec![MembraneId(2), MembraneId(3)]
        );
        assert!(matches!(
            MembraneTree::new(
                [(MembraneId(1), None), (MembraneId(2), None)],
                MembraneId(1)
            ),
            Err(TreeError::Roots(2))
        ));
        assert!(matches!(
            MembraneTree::new([(MembraneId(1), None)], MembraneId(9)),
            Err(TreeError::BadOutput(_))
        ));
    }

    #[test]
    fn priority_closure() {
        let r = Region::new(MembraneId(1), vec![]).with_priority([
            (RuleId::from("1"), RuleId::from("2")),
            (RuleId::from("2"), RuleId::from("3")),
            (RuleId::from("3"), RuleId::from("4")),
        ]);
        assert!(r.dominates(&"1".into(), &"4".into()));
        assert!(r.dominates(&"2".into(), &"4".into()));
        assert!(!r.dominates(&"4".into(), &"1".into()));
        assert_eq!(r.priority().len(), 6);
    }

    #[test]
    fn single_array_single_rule_one_step() {
        let s = one_region(
            vec![rule("1", Some("a"), "A", "x", 0, Target::Here)],
            vec![ArrayObject::singleton(sym("A"))],
            Mode::Restricted,
        );
        let c = s.initial_configuration();
        let steps = legal_steps(&s, &c);
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].label, Label::Named(sym("a")));
        let next = apply_step(&s, &c, &steps[0]).unwrap();
        assert!(is_halting(&s, &next));
    }

    #[test]
    fn label_inconsistent_arrays_dead_end() {
        let s = one_region(
            vec![
                rule("1", Some("a"), "A", "x", 0, Target::Here),
                rule("2", Some("c"), "B", "y", 0, Target::Here),
            ],
            vec![
                ArrayObject::singleton(sym("A")),
                ArrayObject::singleton(sym("B")),
            ],
            Mode::Restricted,
        );
        let c = s.initial_configuration();
        assert!(legal_steps(&s, &c).is_empty());
        assert!(!is_halting(&s, &c));
    }

    #[test]
    fn lambda_rules_join_any_step() {
        let s = one_region(
            vec![
                rule("1", Some("a"), "A", "x", 0, Target::Here),
                rule("2", None, "B", "y", 0, Target::Here),
            ],
            vec![
                ArrayObject::singleton(sym("A")),
                ArrayObject::singleton(sym("B")),
            ],
            Mode::Restricted,
        );
        let c = s.initial_configuration();
        let steps = legal_steps(&s, &c);
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].assignments.len(), 2);

        // A lone λ-rule is forbidden when restricted, allowed otherwise.
        let lone = |mode| {
            one_region(
                vec![rule("2", None, "B", "y", 0, Target::Here)],
                vec![ArrayObject::singleton(sym("B"))],
                mode,
            )
        };
        let r = lone(Mode::Restricted);
        assert!(legal_steps(&r, &r.initial_configuration()).is_empty());
        let u = lone(Mode::Unrestricted);
        let steps = legal_steps(&u, &u.initial_configuration());
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].label, Label::Lambda);
    }

    #[test]
    fn global_priority_blocks_other_arrays() {
        let s = one_region(
            vec![
                rule("1", Some("a"), "A", "x", 0, Target::Here),
                rule("2", Some("a"), "B", "y", 0, Target::Here),
            ],
            vec![
                ArrayObject::singleton(sym("A")),
                ArrayObject::singleton(sym("B")),
            ],
            Mode::Restricted,
        );
        let mut s = s;
        let m = MembraneId(1);
        let region = s
            .regions
            .remove(&m)
            .unwrap()
            .with_priority([("1".into(), "2".into())]);
        s.regions.insert(m, region);
        let c = s.initial_configuration();
        assert_eq!(
            enabled_rules(&s, &c, m),
            BTreeSet::from([RuleId::from("1")])
        );
        let steps = legal_steps(&s, &c);
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].assignments.len(), 1);
        let next = apply_step(&s, &c, &steps[0]).unwrap();
        assert_eq!(
            enabled_rules(&s, &next, m),
            BTreeSet::from([RuleId::from("2")])
        );
    }

    #[test]
    fn empty_region_has_nothing_enabled() {
        let s = one_region(
            vec![rule("1", Some("a"), "A", "x", 0, Target::Here)],
            vec![],
            Mode::Restricted,
        );
        let c = s.initial_configuration();
        assert!(enabled_rules(&s, &c, MembraneId(1)).is_empty());
        assert!(is_halting(&s, &c));
    }

    #[test]
    fn out_of_skin_discards() {
        let s = one_region(
            vec![rule("1", Some("a"), "A", "x", 0, Target::Out)],
            vec![ArrayObject::singleton(sym("A"))],
            Mode::Restricted,
        );
        let c = s.initial_configuration();
        let steps = legal_steps(&s, &c);
        assert_eq!(steps[0].assignments[0].dest, None);
        let next = apply_step(&s, &c, &steps[0]).unwrap();
        assert_eq!(next.total_arrays(), 0);
    }

    #[test]
    fn in_any_branches_per_child() {
        let tree = MembraneTree::new(
            [
                (MembraneId(1), None),
                (MembraneId(2), Some(MembraneId(1))),
                (MembraneId(3), Some(MembraneId(1))),
            ],
            MembraneId(2),
        )
        .unwrap();
        let mut s = one_region(
            vec![rule("1", Some("a"), "A", "x", 0, Target::InAny)],
            vec![ArrayObject::singleton(sym("A"))],
            Mode::Restricted,
        );
        s.tree = tree;
        let c = s.initial_configuration();
        let dests: BTreeSet<_> = legal_steps(&s, &c)
            .iter()
            .map(|ch| ch.assignments[0].dest)
            .collect();
        assert_eq!(
            dests,
            BTreeSet::from([Some(MembraneId(2)), Some(MembraneId(3))])
        );
    }

    #[test]
    fn validation_reports_every_problem() {
        let mut s = one_region(
            vec![
                rule("1", Some("a"), "A", "x", 0, Target::InChild(MembraneId(7))),
                rule("2", Some("z"), "x", "x", 0, Target::Here),
            ],
            vec![ArrayObject::singleton(sym("A"))],
            Mode::Restricted,
        );
        let errs = validate_system(&s).unwrap_err();
        assert!(errs.iter().any(|e| e.to_string().contains("in.7")));
        assert!(errs.iter().any(|e| e.to_string().contains("label z")));
        assert!(errs
            .iter()
            .any(|e| e.to_string().contains("exactly one nonterminal")));

        // Same rule id, different labels across regions.
        let m2 = MembraneId(2);
        s.tree = MembraneTree::new([(MembraneId(1), None), (m2, Some(MembraneId(1)))], m2).unwrap();
        s.regions = BTreeMap::from([
            (
                MembraneId(1),
                Region::new(
                    MembraneId(1),
                    vec![rule("r", Some("a"), "A", "x", 0, Target::Here)],
                ),
            ),
            (
                m2,
                Region::new(m2, vec![rule("r", Some("b"), "A", "x", 0, Target::Here)]),
            ),
        ]);
        let errs = validate_system(&s).unwrap_err();
        assert!(errs
            .iter()
            .any(|e| matches!(e, ValidationError::LabelConflict { .. })));
    }

    #[test]
    fn random_run_is_reproducible() {
        let s = one_region(
            vec![
                rule("1", Some("a"), "A", "x A", 0, Target::Here),
                rule("2", Some("b"), "A", "y", 0, Target::Here),
            ],
            vec![ArrayObject::singleton(sym("A"))],
            Mode::Restricted,
        );
        let t1 = run_random(&s, 42, 50);
        let t2 = run_random(&s, 42, 50);
        assert_eq!(t1, t2);
        assert_eq!(replay(&s, &t1).unwrap(), t1.final_config);
        let zero = run_random(&s, 1, 0);
        assert_eq!(zero.outcome, Outcome::BudgetExhausted);
        assert!(zero.steps.is_empty());
        let empty = Trace {
            steps: vec![],
            ..zero.clone()
        };
        assert_eq!(replay(&s, &empty).unwrap(), s.initial_configuration());
    }

    #[test]
    fn tampered_trace_is_rejected() {
        let s = one_region(
            vec![
                rule("1", Some("a"), "A", "x A", 0, Target::Here),
                rule("2", Some("b"), "A", "y", 0, Target::Here),
            ],
            vec![ArrayObject::singleton(sym("A"))],
            Mode::Restricted,
        );
        let mut t = run_random(&s, 3, 10);
        t.steps[0].assignments[0].anchor = Pixel::new(9, 9);
        assert_eq!(replay(&s, &t), Err(ReplayError::IllegalChoice { step: 0 }));
    }

    #[test]
    fn trace_text_round_trip() {
        let steps = vec![
            ChoiceSet {
                assignments: vec![Assignment {
                    membrane: MembraneId(1),
                    index: 0,
                    rule: "r1".into(),
                    anchor: Pixel::new(-1, 2),
                    dest: None,
                }],
                label: Label::Named(sym("a")),
            },
            ChoiceSet {
                assignments: vec![],
                label: Label::Lambda,
            },
        ];
        let text = format_steps(&steps);
        assert_eq!(text, "a 1[0]:r1@(-1,2)->env\n_\n");
        assert_eq!(parse_steps(&text).unwrap(), steps);
        assert!(parse_steps("a 1[0]:@(0,0)->1").is_err());
        assert!(parse_steps("a 1[x]:r@(0,0)->1").is_err());
    }

    #[test]
    fn apply_step_rejects_missing_array() {
        let s = one_region(vec![], vec![parse_grid("A").unwrap()], Mode::Restricted);
        let ch = ChoiceSet {
            assignments: vec![Assignment {
                membrane: MembraneId(1),
                index: 3,
                rule: "1".into(),
                anchor: Pixel::ORIGIN,
                dest: Some(MembraneId(1)),
            }],
            label: Label::Lambda,
        };
        assert!(matches!(
            apply_step(&s, &s.initial_configuration(), &ch),
            Err(StepError::NoArray { .. })
        ));
    }
}
