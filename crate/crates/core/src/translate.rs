//! String grammars and Turing machines compiled to array P systems.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::grid::{sym, ArrayObject, Direction, Symbol};
use crate::lang::Word;
use crate::membrane::{MembraneId, MembraneTree, Mode, PSystem, Region};
use crate::rewrite::{OccurrencePolicy, ThetaRule};
use crate::shapes::{FinalSpec, RegionPredicate, Shape};

/// The single output terminal of the grammar translations.
pub const STAR: &str = "*";
/// Write-head nonterminal of the Turing machine translation.
pub const WRITE_HEAD: &str = "W";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("production {0} is self-recursive; eliminate self-recursion first")]
    SelfRecursionPresent(String),
    #[error("production {0} is not in Greibach normal form")]
    NotGnf(String),
    #[error("symbol {0} is not in the alphabet")]
    SymbolNotInAlphabet(Symbol),
    #[error("symbol {0} is reserved by the translation")]
    ReservedSymbol(Symbol),
    #[error("the input alphabet is empty")]
    EmptyAlphabet,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct GrammarParseError {
    pub line: usize,
    pub msg: String,
}

/// `A -> a B` or `A -> a`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RegProduction {
    pub lhs: Symbol,
    pub terminal: Symbol,
    pub next: Option<Symbol>,
}

impl fmt::Display for RegProduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.terminal)?;
        if let Some(n) = &self.next {
            write!(f, " {n}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegGrammar {
    pub nonterminals: BTreeSet<Symbol>,
    pub terminals: BTreeSet<Symbol>,
    pub productions: BTreeSet<RegProduction>,
    pub start: Symbol,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CfgProduction {
    pub lhs: Symbol,
    pub rhs: Vec<Symbol>,
}

impl fmt::Display for CfgProduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ->", self.lhs)?;
        for s in &self.rhs {
            write!(f, " {s}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cfg {
    pub nonterminals: BTreeSet<Symbol>,
    pub terminals: BTreeSet<Symbol>,
    pub productions: Vec<CfgProduction>,
    pub start: Symbol,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Move {
    L,
    R,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TuringMachine {
    pub states: BTreeSet<Symbol>,
    pub tape: BTreeSet<Symbol>,
    pub transitions: BTreeMap<(Symbol, Symbol), (Symbol, Symbol, Move)>,
    pub start: Symbol,
    pub accepting: BTreeSet<Symbol>,
}

/// Lines of `text` with comments and blanks removed, numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn symbol_at(tok: &str, line: usize) -> Result<Symbol, GrammarParseError> {
    Symbol::new(tok).map_err(|_| GrammarParseError {
        line,
        msg: format!("invalid symbol {tok:?}"),
    })
}

/// Productions `A -> x y z` plus an optional `start: S` header. Symbols that
/// appear on a left side are nonterminals. The start defaults to the first
/// left side.
/// Line number, left side, right side.
type RawProduction = (usize, Symbol, Vec<Symbol>);

fn parse_productions(text: &str) -> Result<(Vec<RawProduction>, Symbol), GrammarParseError> {
    let mut prods = Vec::new();
    let mut start = None;
    for (n, line) in content_lines(text) {
        if let Some(rest) = line.strip_prefix("start:") {
            start = Some(symbol_at(rest.trim(), n)?);
            continue;
        }
        let (lhs, rhs) = line.split_once("->").ok_or(GrammarParseError {
            line: n,
            msg: "expected `A -> ...`".into(),
        })?;
        let lhs: Vec<&str> = lhs.split_whitespace().collect();
        if lhs.len() != 1 {
            return Err(GrammarParseError {
                line: n,
                msg: "left side must be a single symbol".into(),
            });
        }
        let rhs = rhs
            .split_whitespace()
            .map(|t| symbol_at(t, n))
            .collect::<Result<Vec<_>, _>>()?;
        if rhs.is_empty() {
            return Err(GrammarParseError {
                line: n,
                msg: "empty right side".into(),
            });
        }
        prods.push((n, symbol_at(lhs[0], n)?, rhs));
    }
    let start = match (start, prods.first()) {
        (Some(s), _) => s,
        (None, Some((_, s, _))) => s.clone(),
        (None, None) => {
            return Err(GrammarParseError {
                line: 1,
                msg: "no productions".into(),
            })
        }
    };
    Ok((prods, start))
}

/// Parses a regular grammar; see [`parse_cfg`] for the line format.
pub fn parse_reg_grammar(text: &str) -> Result<RegGrammar, GrammarParseError> {
    let (prods, start) = parse_productions(text)?;
    let mut nonterminals: BTreeSet<Symbol> = prods.iter().map(|(_, l, _)| l.clone()).collect();
    nonterminals.insert(start.clone());
    let mut terminals = BTreeSet::new();
    let mut productions = BTreeSet::new();
    for (n, lhs, rhs) in &prods {
        let err = |msg: &str| GrammarParseError {
            line: *n,
            msg: msg.into(),
        };
        if rhs.len() > 2 {
            return Err(err("right side must be `a` or `a B`"));
        }
        if nonterminals.contains(&rhs[0]) {
            return Err(err("right side must start with a terminal"));
        }
        terminals.insert(rhs[0].clone());
        productions.insert(RegProduction {
            lhs: lhs.clone(),
            terminal: rhs[0].clone(),
            next: rhs.get(1).cloned(),
        });
    }
    for p in &productions {
        if let Some(b) = &p.next {
            if terminals.contains(b) {
                return Err(GrammarParseError {
                    line: 1,
                    msg: format!("{b} is used both as terminal and nonterminal"),
                });
            }
            nonterminals.insert(b.clone());
        }
    }
    Ok(RegGrammar {
        nonterminals,
        terminals,
        productions,
        start,
    })
}

/// Parses a context-free grammar, one production per line:
///
/// ```text
/// start: S
/// S -> a S B
/// S -> a B
/// B -> b
/// ```
pub fn parse_cfg(text: &str) -> Result<Cfg, GrammarParseError> {
    let (prods, start) = parse_productions(text)?;
    let mut nonterminals: BTreeSet<Symbol> = prods.iter().map(|(_, l, _)| l.clone()).collect();
    nonterminals.insert(start.clone());
    let terminals = prods
        .iter()
        .flat_map(|(_, _, r)| r)
        .filter(|s| !nonterminals.contains(*s))
        .cloned()
        .collect();
    Ok(Cfg {
        nonterminals,
        terminals,
        productions: prods
            .into_iter()
            .map(|(_, lhs, rhs)| CfgProduction { lhs, rhs })
            .collect(),
        start,
    })
}

/// Parses a Turing machine:
///
/// ```text
/// start: q0
/// accept: f
/// q0,0 -> s,0,R
/// ```
///
/// The tape alphabet is `{0, 1, x}` plus every symbol read or written.
pub fn parse_tm(text: &str) -> Result<TuringMachine, GrammarParseError> {
    let mut start = None;
    let mut accepting = BTreeSet::new();
    let mut transitions = BTreeMap::new();
    let mut states = BTreeSet::new();
    let mut tape: BTreeSet<Symbol> = ["0", "1", "x"].into_iter().map(sym).collect();
    for (n, line) in content_lines(text) {
        let err = |msg: String| GrammarParseError { line: n, msg };
        if let Some(rest) = line.strip_prefix("start:") {
            start = Some(symbol_at(rest.trim(), n)?);
            continue;
        }
        if let Some(rest) = line.strip_prefix("accept:") {
            for t in rest.split_whitespace() {
                accepting.insert(symbol_at(t, n)?);
            }
            continue;
        }
        let (lhs, rhs) = line
            .split_once("->")
            .ok_or_else(|| err("expected `q,a -> p,b,R`".into()))?;
        let lhs: Vec<&str> = lhs.split(',').map(str::trim).collect();
        let rhs: Vec<&str> = rhs.split(',').map(str::trim).collect();
        if lhs.len() != 2 || rhs.len() != 3 {
            return Err(err("expected `q,a -> p,b,R`".into()));
        }
        let q = symbol_at(lhs[0], n)?;
        let a = symbol_at(lhs[1], n)?;
        let p = symbol_at(rhs[0], n)?;
        let b = symbol_at(rhs[1], n)?;
        let mv = match rhs[2] {
            "L" => Move::L,
            "R" => Move::R,
            other => return Err(err(format!("move must be L or R, found {other:?}"))),
        };
        if transitions
            .insert((q.clone(), a.clone()), (p.clone(), b.clone(), mv))
            .is_some()
        {
            return Err(err(format!("second transition for ({q},{a})")));
        }
        states.extend([q, p]);
        tape.extend([a, b]);
    }
    let start = start.ok_or(GrammarParseError {
        line: 1,
        msg: "missing `start:`".into(),
    })?;
    states.insert(start.clone());
    states.extend(accepting.iter().cloned());
    if let Some(s) = states.intersection(&tape).next() {
        return Err(GrammarParseError {
            line: 1,
            msg: format!("{s} is both a state and a tape symbol"),
        });
    }
    Ok(TuringMachine {
        states,
        tape,
        transitions,
        start,
        accepting,
    })
}

fn fresh(base: &Symbol, taken: &BTreeSet<Symbol>) -> Symbol {
    let mut name = base.as_str().to_string();
    loop {
        name.push('′');
        let s = sym(&name);
        if !taken.contains(&s) {
            return s;
        }
    }
}

/// Replaces every `A -> a A` by `A -> a A′` and `A′ -> a A`, and gives `A′`
/// a copy of each other `A` production, terminal ones included.
pub fn eliminate_self_recursion(g: &RegGrammar) -> RegGrammar {
    let recursive: BTreeSet<Symbol> = g
        .productions
        .iter()
        .filter(|p| p.next.as_ref() == Some(&p.lhs))
        .map(|p| p.lhs.clone())
        .collect();
    let mut out = g.clone();
    let mut taken: BTreeSet<Symbol> = g.nonterminals.union(&g.terminals).cloned().collect();
    for a in recursive {
        let a2 = fresh(&a, &taken);
        taken.insert(a2.clone());
        out.nonterminals.insert(a2.clone());
        let own: Vec<RegProduction> = out
            .productions
            .iter()
            .filter(|p| p.lhs == a)
            .cloned()
            .collect();
        for p in own {
            if p.next.as_ref() == Some(&a) {
                out.productions.remove(&p);
                out.productions.insert(RegProduction {
                    next: Some(a2.clone()),
                    ..p.clone()
                });
                out.productions.insert(RegProduction {
                    lhs: a2.clone(),
                    ..p
                });
            } else {
                out.productions.insert(RegProduction {
                    lhs: a2.clone(),
                    ..p
                });
            }
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn one_membrane_system(
    name: &str,
    alphabet: BTreeSet<Symbol>,
    terminals: BTreeSet<Symbol>,
    labels: BTreeSet<Symbol>,
    init: ArrayObject,
    rules: Vec<ThetaRule>,
    mode: Mode,
    policy: OccurrencePolicy,
    fin: RegionPredicate,
) -> PSystem {
    let m = MembraneId(1);
    PSystem {
        name: name.into(),
        alphabet,
        terminals,
        tree: MembraneTree::single(m),
        init: BTreeMap::from([(m, vec![init])]),
        regions: BTreeMap::from([(m, Region::new(m, rules))]),
        labels,
        mode,
        policy,
        final_spec: FinalSpec::from_entries([(m, fin)]),
    }
}

fn reserve(star: &Symbol, nonterminals: &BTreeSet<Symbol>) -> Result<(), TranslateError> {
    if nonterminals.contains(star) {
        Err(TranslateError::ReservedSymbol(star.clone()))
    } else {
        Ok(())
    }
}

/// One membrane growing a 45° run of `*`, one cell per emitted terminal.
pub fn reg_to_aps(g: &RegGrammar) -> Result<PSystem, TranslateError> {
    if let Some(p) = g
        .productions
        .iter()
        .find(|p| p.next.as_ref() == Some(&p.lhs))
    {
        return Err(TranslateError::SelfRecursionPresent(p.to_string()));
    }
    let star = sym(STAR);
    reserve(&star, &g.nonterminals)?;
    let rules = g
        .productions
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let rhs = std::iter::once(star.clone())
                .chain(p.next.clone())
                .collect();
            ThetaRule::new((i + 1).to_string(), vec![p.lhs.clone()], rhs, Direction::NE)
                .labelled(p.terminal.clone())
        })
        .collect();
    let mut alphabet = g.nonterminals.clone();
    alphabet.insert(star.clone());
    Ok(one_membrane_system(
        "reg",
        alphabet,
        [star.clone()].into(),
        g.terminals.clone(),
        ArrayObject::singleton(g.start.clone()),
        rules,
        Mode::Restricted,
        OccurrencePolicy::Any,
        RegionPredicate::Shape(Shape::Run(star, Direction::NE)),
    ))
}

fn gnf_violation(g: &Cfg) -> Option<&CfgProduction> {
    g.productions.iter().find(|p| {
        p.rhs.is_empty()
            || !g.terminals.contains(&p.rhs[0])
            || p.rhs[1..].iter().any(|s| !g.nonterminals.contains(s))
    })
}

pub fn is_gnf(g: &Cfg) -> bool {
    gnf_violation(g).is_none()
}

/// One membrane growing a horizontal run of `*`, always rewriting the
/// leftmost nonterminal.
pub fn cf_to_aps(g: &Cfg) -> Result<PSystem, TranslateError> {
    if let Some(p) = gnf_violation(g) {
        return Err(TranslateError::NotGnf(p.to_string()));
    }
    let star = sym(STAR);
    reserve(&star, &g.nonterminals)?;
    let rules = g
        .productions
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let rhs = std::iter::once(star.clone())
                .chain(p.rhs[1..].iter().cloned())
                .collect();
            ThetaRule::new((i + 1).to_string(), vec![p.lhs.clone()], rhs, Direction::E)
                .labelled(p.rhs[0].clone())
        })
        .collect();
    let mut alphabet = g.nonterminals.clone();
    alphabet.insert(star.clone());
    Ok(one_membrane_system(
        "cf",
        alphabet,
        [star.clone()].into(),
        g.terminals.clone(),
        ArrayObject::singleton(g.start.clone()),
        rules,
        Mode::Restricted,
        OccurrencePolicy::Leftmost,
        RegionPredicate::Shape(Shape::Run(star, Direction::E)),
    ))
}

/// `0 e(a) 0 e(b) 0 ...` with `e(h[i]) = 1^(i+1)`.
pub fn encode_word(w: &Word, h: &[Symbol]) -> Result<Vec<Symbol>, TranslateError> {
    let (zero, one) = (sym("0"), sym("1"));
    let mut out = vec![zero.clone()];
    for s in &w.0 {
        let i = h
            .iter()
            .position(|x| x == s)
            .ok_or_else(|| TranslateError::SymbolNotInAlphabet(s.clone()))?;
        out.extend(std::iter::repeat_n(one.clone(), i + 1));
        out.push(zero.clone());
    }
    Ok(out)
}

/// λ-labelled horizontal context rules simulating each transition, one per
/// context symbol `c` of the tape alphabet.
pub fn tm_rules(t: &TuringMachine) -> Vec<ThetaRule> {
    let mut out = Vec::new();
    for ((q, a), (p, b, mv)) in &t.transitions {
        for c in &t.tape {
            let (lhs, rhs) = match mv {
                Move::R => (
                    vec![q.clone(), a.clone(), c.clone()],
                    vec![b.clone(), p.clone(), c.clone()],
                ),
                Move::L => (
                    vec![c.clone(), q.clone(), a.clone()],
                    vec![p.clone(), c.clone(), b.clone()],
                ),
            };
            out.push(ThetaRule::new(
                format!("t{}", out.len() + 1),
                lhs,
                rhs,
                Direction::E,
            ));
        }
    }
    out
}

/// Guesses `e(w)` behind a write head `W`, emitting one label per symbol,
/// then lets the machine run on `q0 0 e(w) x`. An accepting state turns
/// into `x`, leaving an all-terminal tape.
pub fn tm_to_aps(t: &TuringMachine, h: &[Symbol]) -> Result<PSystem, TranslateError> {
    if h.is_empty() {
        return Err(TranslateError::EmptyAlphabet);
    }
    let w = sym(WRITE_HEAD);
    if t.states.contains(&w) || t.tape.contains(&w) {
        return Err(TranslateError::ReservedSymbol(w));
    }
    let (zero, one, x) = (sym("0"), sym("1"), sym("x"));
    let mut rules = Vec::new();
    for (i, a) in h.iter().enumerate() {
        let mut rhs = vec![one.clone(); i + 1];
        rhs.extend([zero.clone(), w.clone()]);
        rules.push(
            ThetaRule::new(format!("g{}", i + 1), vec![w.clone()], rhs, Direction::E)
                .labelled(a.clone()),
        );
    }
    rules.push(ThetaRule::new(
        "end",
        vec![w.clone()],
        vec![x.clone()],
        Direction::E,
    ));
    rules.extend(tm_rules(t));
    for (i, f) in t.accepting.iter().enumerate() {
        rules.push(ThetaRule::new(
            format!("acc{}", i + 1),
            vec![f.clone()],
            vec![x.clone()],
            Direction::E,
        ));
    }
    let mut alphabet: BTreeSet<Symbol> = t.states.union(&t.tape).cloned().collect();
    alphabet.insert(w.clone());
    let init = ArrayObject::line(&[t.start.clone(), zero, w], Direction::E).expect("non-empty");
    Ok(one_membrane_system(
        "tm",
        alphabet,
        t.tape.clone(),
        h.iter().cloned().collect(),
        init,
        rules,
        Mode::Unrestricted,
        OccurrencePolicy::Any,
        RegionPredicate::AllTerminal,
    ))
}
