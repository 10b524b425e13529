//! Property definitions shared by the core test suite and the acceptance
//! suite. Each property runs a fresh `TestRunner` for a given case count.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use apsys::dsl::{parse_system, print_system};
use apsys::grid::{
    canonicalize, congruent, parse_grid, render_ascii, sym, ArrayObject, Direction, Offset, Pixel,
    Symbol,
};
use apsys::membrane::{
    apply_step, format_steps, parse_steps, replay, run_random, successors, validate_system,
    Configuration, MembraneId, MembraneTree, Mode, PSystem, Region,
};
use apsys::rewrite::{
    apply_rule, find_matches, is_applicable, Label, OccurrencePolicy, Target, ThetaRule,
};
use apsys::shapes::{FinalSpec, RegionPredicate};

pub const NONTERMINALS: [&str; 3] = ["A", "B", "C"];
pub const TERMINALS: [&str; 2] = ["x", "y"];

pub type Property = fn(u32) -> Result<(), String>;

/// Every property, by name.
pub const ALL: &[(&str, Property)] = &[
    ("cell-count law", cell_count_law),
    ("off-ray preservation", off_ray_preservation),
    ("translation equivariance", translation_equivariance),
    ("priority soundness", priority_soundness),
    ("one rule per array", one_rule_per_array),
    ("label coherence", label_coherence),
    ("replay determinism", replay_determinism),
    ("canonicalization idempotence", canonicalization_idempotence),
    ("parse/render round trip", parse_render_round_trip),
    ("system print/parse round trip", system_round_trip),
    ("trace text round trip", trace_text_round_trip),
];

fn check<S>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String>
where
    S: Strategy,
    S::Value: std::fmt::Debug,
{
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn symbol() -> impl Strategy<Value = Symbol> {
    prop::sample::select(vec!["A", "B", "C", "x", "y"]).prop_map(sym)
}

fn direction() -> impl Strategy<Value = Direction> {
    prop::sample::select(Direction::ALL.to_vec())
}

pub fn array() -> impl Strategy<Value = ArrayObject> {
    prop::collection::btree_map((-3i64..=3, -3i64..=3), symbol(), 1..14).prop_map(|m| {
        ArrayObject::from_cells(m.into_iter().map(|((x, y), s)| (Pixel::new(x, y), s)))
            .expect("non-empty")
    })
}

pub fn rule() -> impl Strategy<Value = ThetaRule> {
    (
        prop::collection::vec(symbol(), 1..=3),
        prop::collection::vec(symbol(), 1..=4),
        direction(),
    )
        .prop_map(|(lhs, rhs, d)| ThetaRule::new("r", lhs, rhs, d))
}

/// An array together with a rule guaranteed to match it somewhere: the
/// rule's left side is read off the array along a ray.
fn array_with_match() -> impl Strategy<Value = (ArrayObject, ThetaRule)> {
    (
        array(),
        direction(),
        1usize..=3,
        prop::collection::vec(symbol(), 1..=4),
        any::<prop::sample::Index>(),
    )
        .prop_map(|(a, d, n, rhs, pick)| {
            let cells: Vec<_> = a.cells().keys().copied().collect();
            let start = cells[pick.index(cells.len())];
            let lhs: Vec<Symbol> = (0..n as i64)
                .map_while(|k| a.get(start.step(d.offset(), k)).cloned())
                .collect();
            (a.clone(), ThetaRule::new("r", lhs, rhs, d))
        })
}

pub fn cell_count_law(cases: u32) -> Result<(), String> {
    check(cases, array_with_match(), |(a, r)| {
        let ms = find_matches(&a, &r, OccurrencePolicy::Any);
        prop_assert!(!ms.is_empty());
        for m in ms {
            let b = apply_rule(&a, &r, m).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(b.len() as i64, a.len() as i64 + r.shift());
        }
        Ok(())
    })
}

pub fn off_ray_preservation(cases: u32) -> Result<(), String> {
    check(cases, array_with_match(), |(a, r)| {
        let u = r.direction.offset();
        for m in find_matches(&a, &r, OccurrencePolicy::Any) {
            let b = apply_rule(&a, &r, m).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let on_ray = |p: Pixel| (0..64).any(|k| m.anchor.step(u, k) == p);
            let off = |x: &ArrayObject| -> BTreeMap<Pixel, Symbol> {
                x.cells()
                    .iter()
                    .filter(|(p, _)| !on_ray(**p))
                    .map(|(p, s)| (*p, s.clone()))
                    .collect()
            };
            prop_assert_eq!(off(&a), off(&b));
            for (k, s) in r.rhs.iter().enumerate() {
                prop_assert_eq!(b.get(m.anchor.step(u, k as i64)), Some(s));
            }
        }
        Ok(())
    })
}

pub fn translation_equivariance(cases: u32) -> Result<(), String> {
    check(
        cases,
        (array(), rule(), -20i64..20, -20i64..20),
        |(a, r, dx, dy)| {
            let t = Offset { dx, dy };
            let moved = a.translate(t);
            for policy in [OccurrencePolicy::Any, OccurrencePolicy::Leftmost] {
                let ms = find_matches(&a, &r, policy);
                let shifted: BTreeSet<Pixel> = ms.iter().map(|m| m.anchor + t).collect();
                let direct: BTreeSet<Pixel> = find_matches(&moved, &r, policy)
                    .iter()
                    .map(|m| m.anchor)
                    .collect();
                prop_assert_eq!(&shifted, &direct);
                for m in ms {
                    let b =
                        apply_rule(&a, &r, m).map_err(|e| TestCaseError::fail(e.to_string()))?;
                    let mut m2 = m;
                    m2.anchor = m.anchor + t;
                    let b2 = apply_rule(&moved, &r, m2)
                        .map_err(|e| TestCaseError::fail(e.to_string()))?;
                    prop_assert_eq!(b.translate(t), b2);
                }
            }
            Ok(())
        },
    )
}

pub fn canonicalization_idempotence(cases: u32) -> Result<(), String> {
    check(cases, (array(), -50i64..50, -50i64..50), |(a, dx, dy)| {
        let c = canonicalize(&a);
        prop_assert!(c.is_canonical());
        prop_assert_eq!(canonicalize(&c), c.clone());
        let moved = a.translate(Offset { dx, dy });
        prop_assert_eq!(canonicalize(&moved), c);
        prop_assert!(congruent(&a, &moved));
        Ok(())
    })
}

pub fn parse_render_round_trip(cases: u32) -> Result<(), String> {
    check(cases, array(), |a| {
        let text = render_ascii(&a);
        let back = parse_grid(&text).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(back, canonicalize(&a));
        Ok(())
    })
}

/// Random well-formed systems over `A B C / x y` with labels `a b`.
pub fn system() -> impl Strategy<Value = PSystem> {
    let shape = (1usize..=3).prop_flat_map(|n| {
        let parents: Vec<BoxedStrategy<usize>> = (1..n).map(|i| (0..i).boxed()).collect();
        (Just(n), parents, 0..n)
    });
    (
        shape,
        prop::collection::vec(prop::collection::vec(rule_spec(), 0..=4), 3),
        prop::collection::vec((0usize..3, array()), 1..=2),
        prop::collection::vec((0usize..3, 0usize..4, 0usize..4), 0..8),
        any::<bool>(),
        any::<bool>(),
    )
        .prop_map(
            |((n, parents, out), rule_specs, inits, prio, restricted, leftmost)| {
                let id = |i: usize| MembraneId(i as u32 + 1);
                let mut edges = vec![(id(0), None)];
                edges.extend(
                    parents
                        .iter()
                        .enumerate()
                        .map(|(i, p)| (id(i + 1), Some(id(*p)))),
                );
                let tree = MembraneTree::new(edges, id(out)).expect("valid tree");
                let mut regions = BTreeMap::new();
                for (m, specs) in rule_specs.iter().enumerate().take(n) {
                    let children = tree.children(id(m));
                    let rules: Vec<ThetaRule> = specs
                        .iter()
                        .enumerate()
                        .map(|(k, spec)| spec.build(format!("r{}_{k}", m + 1), &children))
                        .collect();
                    let count = rules.len();
                    let pairs = prio
                        .iter()
                        .filter(|(pm, i, j)| *pm == m && i < j && *j < count)
                        .map(|(_, i, j)| (rules[*i].id.clone(), rules[*j].id.clone()))
                        .collect::<Vec<_>>();
                    regions.insert(id(m), Region::new(id(m), rules).with_priority(pairs));
                }
                let mut init: BTreeMap<MembraneId, Vec<ArrayObject>> = BTreeMap::new();
                for (m, a) in inits {
                    init.entry(id(m % n)).or_default().push(canonicalize(&a));
                }
                let alphabet: BTreeSet<Symbol> = NONTERMINALS
                    .iter()
                    .chain(&TERMINALS)
                    .map(|s| sym(s))
                    .collect();
                PSystem {
                    name: "random".into(),
                    alphabet,
                    terminals: TERMINALS.iter().map(|s| sym(s)).collect(),
                    tree,
                    init,
                    regions,
                    labels: [sym("a"), sym("b")].into(),
                    mode: if restricted {
                        Mode::Restricted
                    } else {
                        Mode::Unrestricted
                    },
                    policy: if leftmost {
                        OccurrencePolicy::Leftmost
                    } else {
                        OccurrencePolicy::Any
                    },
                    final_spec: FinalSpec::from_entries([(id(out), RegionPredicate::AllTerminal)]),
                }
            },
        )
}

#[derive(Debug, Clone)]
pub struct RuleSpec {
    lhs_terminals: Vec<Symbol>,
    nonterminal: Symbol,
    at: usize,
    extra: Vec<Symbol>,
    direction: Direction,
    label: u8,
    target: u8,
}

impl RuleSpec {
    fn build(&self, id: String, children: &[MembraneId]) -> ThetaRule {
        let mut lhs = self.lhs_terminals.clone();
        lhs.insert(self.at.min(lhs.len()), self.nonterminal.clone());
        let mut rhs = lhs.clone();
        rhs.reverse();
        rhs.extend(self.extra.iter().cloned());
        let label = match self.label {
            0 => Label::Lambda,
            1 => Label::Named(sym("a")),
            _ => Label::Named(sym("b")),
        };
        let target = match (self.target, children.first()) {
            (0 | 1, _) => Target::Here,
            (2, _) => Target::Out,
            (3, Some(_)) => Target::InAny,
            (_, Some(_)) => Target::InChild(children[self.target as usize % children.len()]),
            (_, None) => Target::Here,
        };
        ThetaRule {
            id: id.as_str().into(),
            label,
            lhs,
            rhs,
            direction: self.direction,
            target,
        }
    }
}

fn rule_spec() -> impl Strategy<Value = RuleSpec> {
    let t = prop::sample::select(TERMINALS.to_vec()).prop_map(sym);
    let nt = prop::sample::select(NONTERMINALS.to_vec()).prop_map(sym);
    (
        prop::collection::vec(t, 0..=1),
        nt,
        0usize..2,
        prop::collection::vec(symbol(), 0..=2),
        direction(),
        0u8..3,
        0u8..5,
    )
        .prop_map(
            |(lhs_terminals, nonterminal, at, extra, direction, label, target)| RuleSpec {
                lhs_terminals,
                nonterminal,
                at,
                extra,
                direction,
                label,
                target,
            },
        )
}

/// Configurations visited by a short random run, initial one included.
fn visited(s: &PSystem, seed: u64) -> Vec<Configuration> {
    let t = run_random(s, seed, 4);
    let mut out = vec![t.initial.clone()];
    let mut cur = t.initial.clone();
    for ch in &t.steps {
        cur = apply_step(s, &cur, ch).expect("recorded step applies");
        out.push(cur.clone());
    }
    out
}

/// Keeps the case count meaningful by capping successor blow-up.
fn bounded(c: &Configuration) -> bool {
    c.total_arrays() <= 4
}

pub fn priority_soundness(cases: u32) -> Result<(), String> {
    check(cases, (system(), any::<u64>()), |(s, seed)| {
        prop_assert!(
            validate_system(&s).is_ok(),
            "generated system must validate"
        );
        for c in visited(&s, seed).into_iter().filter(bounded) {
            for (ch, _) in successors(&s, &c) {
                for a in &ch.assignments {
                    let region = &s.regions[&a.membrane];
                    for hi in &region.rules {
                        let blocked = region.dominates(&hi.id, &a.rule)
                            && c.region(a.membrane).iter().any(|x| is_applicable(x, hi));
                        prop_assert!(!blocked, "rule {} used while {} applies", a.rule, hi.id);
                    }
                }
            }
        }
        Ok(())
    })
}

pub fn one_rule_per_array(cases: u32) -> Result<(), String> {
    check(cases, (system(), any::<u64>()), |(s, seed)| {
        for c in visited(&s, seed).into_iter().filter(bounded) {
            // Arrays with some applicable rule that no applicable rule outranks.
            let mut rewritable = BTreeSet::new();
            for (m, arrays) in c.regions() {
                let rules = s.rules_of(m);
                let region = &s.regions[&m];
                let applicable: Vec<_> = rules
                    .iter()
                    .filter(|r| arrays.iter().any(|a| is_applicable(a, r)))
                    .collect();
                for (i, a) in arrays.iter().enumerate() {
                    let usable = applicable.iter().any(|r| {
                        is_applicable(a, r)
                            && !applicable.iter().any(|h| region.dominates(&h.id, &r.id))
                    });
                    if usable {
                        rewritable.insert((m, i));
                    }
                }
            }
            for (ch, next) in successors(&s, &c) {
                let used: Vec<_> = ch
                    .assignments
                    .iter()
                    .map(|a| (a.membrane, a.index))
                    .collect();
                let set: BTreeSet<_> = used.iter().copied().collect();
                prop_assert_eq!(used.len(), set.len(), "array rewritten twice");
                prop_assert_eq!(&set, &rewritable);
                let direct =
                    apply_step(&s, &c, &ch).map_err(|e| TestCaseError::fail(e.to_string()))?;
                prop_assert_eq!(direct, next);
            }
        }
        Ok(())
    })
}

pub fn label_coherence(cases: u32) -> Result<(), String> {
    check(cases, (system(), any::<u64>()), |(s, seed)| {
        for c in visited(&s, seed).into_iter().filter(bounded) {
            for (ch, _) in successors(&s, &c) {
                let labels: Vec<&Label> = ch
                    .assignments
                    .iter()
                    .map(|a| {
                        &s.regions[&a.membrane]
                            .rule(&a.rule)
                            .expect("rule exists")
                            .label
                    })
                    .collect();
                for l in &labels {
                    prop_assert!(l.is_lambda() || **l == ch.label, "mixed labels in one step");
                }
                if !ch.label.is_lambda() {
                    prop_assert!(labels.iter().any(|l| **l == ch.label));
                }
                if s.mode == Mode::Restricted {
                    prop_assert!(!ch.label.is_lambda(), "λ step in restricted mode");
                }
            }
        }
        Ok(())
    })
}

pub fn replay_determinism(cases: u32) -> Result<(), String> {
    check(cases, (system(), any::<u64>()), |(s, seed)| {
        let t1 = run_random(&s, seed, 12);
        let t2 = run_random(&s, seed, 12);
        prop_assert_eq!(&t1, &t2);
        let end = replay(&s, &t1).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(end, t1.final_config);
        Ok(())
    })
}

pub fn system_round_trip(cases: u32) -> Result<(), String> {
    check(cases, system(), |s| {
        let text = print_system(&s);
        let back = parse_system(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(print_system(&back), text);
        Ok(())
    })
}

pub fn trace_text_round_trip(cases: u32) -> Result<(), String> {
    check(cases, (system(), any::<u64>()), |(s, seed)| {
        let t = run_random(&s, seed, 12);
        let text = format_steps(&t.steps);
        let back = parse_steps(&text).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(back, t.steps);
        Ok(())
    })
}
