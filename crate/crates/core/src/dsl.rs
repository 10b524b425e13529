//! Text format for P systems (`.aps` files).
//!
//! ```text
//! system pi5
//! membranes (1 (2))
//! output 2
//! terminals 0 *
//! labels a b
//! mode restricted
//! policy any
//! init 1 {
//!   A
//! }
//! rules 1 {
//!   rule 1 a : A -> B A @ 0 tar here
//!   rule 2 a : A -> B @ 0 tar in.2
//! }
//! rules 2 {
//!   rule 3 b : B -> * @ 0 tar here
//! }
//! priority 1 : 1 > 2
//! final 2 : run(*,0)
//! ```
//!
//! `#` after whitespace starts a comment. `_` is the empty label.
//! `priority m : a b > c d` makes each of `a b` dominate each of `c d`;
//! lines compose and the relation is closed transitively.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use thiserror::Error;

use crate::grid::{parse_grid, render_ascii, ArrayObject, Direction, Symbol};
use crate::membrane::{
    validate_system, MembraneId, MembraneTree, Mode, PSystem, Region, ValidationError,
};
use crate::rewrite::{Label, OccurrencePolicy, RuleId, Target, ThetaRule};
use crate::shapes::{FinalSpec, RegionPredicate, Shape};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid system:\n{}", .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<ValidationError>),
}

/// A token with its 1-based column.
#[derive(Debug, Clone, Copy)]
struct Tok<'a> {
    text: &'a str,
    col: usize,
}

fn strip_comment(line: &str) -> &str {
    let bytes = line.as_bytes();
    for (i, ch) in line.char_indices() {
        if ch == '#' && (i == 0 || bytes[i - 1].is_ascii_whitespace()) {
            return &line[..i];
        }
    }
    line
}

fn tokens(line: &str) -> Vec<Tok<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push(Tok {
                    text: &line[s..i],
                    col: line[..s].chars().count() + 1,
                });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Tok {
            text: &line[s..],
            col: line[..s].chars().count() + 1,
        });
    }
    out
}

struct Parser<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

type Tree = Vec<(MembraneId, Option<MembraneId>)>;

#[derive(Default)]
struct Draft {
    name: Option<String>,
    tree: Option<(Tree, usize)>,
    output: Option<(MembraneId, usize)>,
    alphabet: Option<BTreeSet<Symbol>>,
    terminals: BTreeSet<Symbol>,
    labels: BTreeSet<Symbol>,
    mode: Mode,
    policy: OccurrencePolicy,
    init: BTreeMap<MembraneId, Vec<ArrayObject>>,
    rules: BTreeMap<MembraneId, Vec<ThetaRule>>,
    priority: BTreeMap<MembraneId, Vec<(RuleId, RuleId)>>,
    final_spec: FinalSpec,
}

impl<'a> Parser<'a> {
    fn err(&self, line: usize, col: usize, msg: impl Into<String>) -> ParseError {
        ParseError {
            line,
            col,
            msg: msg.into(),
        }
    }

    /// Lines of a `{ ... }` block opened on line `open`. Returns
    /// `(line number, text)` pairs and advances past the closing brace.
    fn block(&mut self, open: usize, inline: &'a str) -> Result<Vec<(usize, &'a str)>, ParseError> {
        if let Some(rest) = inline.strip_suffix('}') {
            // Single-line block: `{ A B }`.
            return Ok(vec![(open, rest)]);
        }
        let mut body = Vec::new();
        if !inline.trim().is_empty() {
            body.push((open, inline));
        }
        while self.pos < self.lines.len() {
            let n = self.pos + 1;
            let line = strip_comment(self.lines[self.pos]);
            self.pos += 1;
            let trimmed = line.trim();
            if trimmed == "}" {
                return Ok(body);
            }
            if let Some(rest) = trimmed.strip_suffix('}') {
                body.push((n, rest));
                return Ok(body);
            }
            body.push((n, line));
        }
        Err(self.err(open, 1, "unterminated block"))
    }
}

fn parse_membrane(t: Tok<'_>, line: usize) -> Result<MembraneId, ParseError> {
    t.text.parse().map(MembraneId).map_err(|_| ParseError {
        line,
        col: t.col,
        msg: format!("expected membrane id, found {:?}", t.text),
    })
}

fn parse_symbol(t: Tok<'_>, line: usize) -> Result<Symbol, ParseError> {
    Symbol::new(t.text).map_err(|_| ParseError {
        line,
        col: t.col,
        msg: format!("invalid symbol {:?}", t.text),
    })
}

/// Parses bracket notation such as `(1 (2) (3 (4)))`.
pub fn parse_tree(text: &str) -> Result<Vec<(MembraneId, Option<MembraneId>)>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut edges = Vec::new();
    fn skip_ws(chars: &[char], i: &mut usize) {
        while *i < chars.len() && chars[*i].is_whitespace() {
            *i += 1;
        }
    }
    fn node(
        chars: &[char],
        i: &mut usize,
        parent: Option<MembraneId>,
        edges: &mut Vec<(MembraneId, Option<MembraneId>)>,
        depth: usize,
    ) -> Result<(), String> {
        if depth > 256 {
            return Err("membrane structure nested too deeply".into());
        }
        skip_ws(chars, i);
        if chars.get(*i) != Some(&'(') {
            return Err(format!("expected '(' at offset {i}"));
        }
        *i += 1;
        skip_ws(chars, i);
        let start = *i;
        while *i < chars.len() && chars[*i].is_ascii_digit() {
            *i += 1;
        }
        let id: u32 = chars[start..*i]
            .iter()
            .collect::<String>()
            .parse()
            .map_err(|_| format!("expected membrane id at offset {start}"))?;
        let id = MembraneId(id);
        edges.push((id, parent));
        loop {
            skip_ws(chars, i);
            match chars.get(*i) {
                Some('(') => node(chars, i, Some(id), edges, depth + 1)?,
                Some(')') => {
                    *i += 1;
                    return Ok(());
                }
                _ => return Err(format!("expected '(' or ')' at offset {i}")),
            }
        }
    }
    node(&chars, &mut i, None, &mut edges, 0)?;
    skip_ws(&chars, &mut i);
    if i != chars.len() {
        return Err(format!("trailing input at offset {i}"));
    }
    Ok(edges)
}

fn parse_target(t: Tok<'_>, line: usize) -> Result<Target, ParseError> {
    match t.text {
        "here" => Ok(Target::Here),
        "out" => Ok(Target::Out),
        "in" => Ok(Target::InAny),
        other => match other.strip_prefix("in.") {
            Some(id) => id
                .parse()
                .map(|n| Target::InChild(MembraneId(n)))
                .map_err(|_| ParseError {
                    line,
                    col: t.col,
                    msg: format!("bad target {other:?}"),
                }),
            None => Err(ParseError {
                line,
                col: t.col,
                msg: format!("bad target {other:?}"),
            }),
        },
    }
}

fn parse_rule(toks: &[Tok<'_>], line: usize) -> Result<ThetaRule, ParseError> {
    let err = |col: usize, msg: String| ParseError { line, col, msg };
    let end_col = toks.last().map_or(1, |t| t.col);
    // rule <id> <label> : <lhs...> -> <rhs...> @ <deg> tar <target>
    if toks.len() < 11 || toks[0].text != "rule" || toks[3].text != ":" {
        return Err(err(
            toks.first().map_or(1, |t| t.col),
            "expected `rule <id> <label> : <lhs> -> <rhs> @ <deg> tar <target>`".into(),
        ));
    }
    let id = toks[1].text.to_string();
    let label = match toks[2].text {
        "_" | "λ" => Label::Lambda,
        _ => Label::Named(parse_symbol(toks[2], line)?),
    };
    let rest = &toks[4..];
    let arrow = rest
        .iter()
        .position(|t| t.text == "->")
        .ok_or_else(|| err(end_col, "missing `->`".into()))?;
    let at = rest
        .iter()
        .position(|t| t.text == "@")
        .ok_or_else(|| err(end_col, "missing `@`".into()))?;
    if at < arrow || rest.len() != at + 4 || rest[at + 2].text != "tar" {
        return Err(err(
            end_col,
            "expected `@ <deg> tar <target>` at the end".into(),
        ));
    }
    let lhs = rest[..arrow]
        .iter()
        .map(|t| parse_symbol(*t, line))
        .collect::<Result<Vec<_>, _>>()?;
    let rhs = rest[arrow + 1..at]
        .iter()
        .map(|t| parse_symbol(*t, line))
        .collect::<Result<Vec<_>, _>>()?;
    if lhs.is_empty() || rhs.is_empty() {
        return Err(err(
            rest[arrow].col,
            "both sides of a rule must be non-empty".into(),
        ));
    }
    let deg_tok = rest[at + 1];
    let direction = deg_tok
        .text
        .parse()
        .ok()
        .and_then(Direction::from_degrees)
        .ok_or_else(|| {
            err(
                deg_tok.col,
                format!(
                    "direction must be a multiple of 45 below 360, found {:?}",
                    deg_tok.text
                ),
            )
        })?;
    let target = parse_target(rest[at + 3], line)?;
    Ok(ThetaRule {
        id: RuleId(id),
        label,
        lhs,
        rhs,
        direction,
        target,
    })
}

/// Parses a final-region predicate such as `star(x)` or `run(*,45)`.
pub fn parse_predicate(text: &str) -> Result<RegionPredicate, String> {
    match text {
        "empty" => return Ok(RegionPredicate::Empty),
        "all-terminal" => return Ok(RegionPredicate::AllTerminal),
        _ => {}
    }
    let (name, args) = text
        .strip_suffix(')')
        .and_then(|t| t.split_once('('))
        .ok_or_else(|| format!("unknown final predicate {text:?}"))?;
    let args: Vec<&str> = args.split(',').map(str::trim).collect();
    let symbol = |s: &str| Symbol::new(s).map_err(|_| format!("invalid symbol {s:?}"));
    let shape = match (name, args.as_slice()) {
        ("star", [s]) => Shape::Star(symbol(s)?),
        ("swastika", [s]) => Shape::Swastika(symbol(s)?),
        ("run", [s, d]) => Shape::Run(
            symbol(s)?,
            d.parse()
                .ok()
                .and_then(Direction::from_degrees)
                .ok_or_else(|| format!("bad direction {d:?}"))?,
        ),
        ("tape", [w]) => Shape::Tape(
            w.chars()
                .map(|c| symbol(c.encode_utf8(&mut [0u8; 4])))
                .collect::<Result<_, _>>()?,
        ),
        ("tape", many) if many.len() > 1 => {
            Shape::Tape(many.iter().map(|s| symbol(s)).collect::<Result<_, _>>()?)
        }
        ("star" | "swastika" | "run" | "tape", _) => {
            return Err(format!("wrong arguments for {name}"))
        }
        _ => return Err(format!("unknown shape {name:?}")),
    };
    if let Shape::Tape(w) = &shape {
        if w.is_empty() {
            return Err("tape needs a non-empty word".into());
        }
    }
    Ok(RegionPredicate::Shape(shape))
}

/// Parses a system without validating it.
pub fn parse_system(text: &str) -> Result<PSystem, ParseError> {
    let mut p = Parser {
        lines: text.lines().collect(),
        pos: 0,
    };
    let mut d = Draft::default();
    while p.pos < p.lines.len() {
        let n = p.pos + 1;
        let raw = strip_comment(p.lines[p.pos]);
        p.pos += 1;
        let toks = tokens(raw);
        let Some(head) = toks.first() else { continue };
        let args = &toks[1..];
        let need = |k: usize| -> Result<(), ParseError> {
            if args.len() < k {
                Err(p.err(
                    n,
                    head.col,
                    format!("`{}` needs {k} argument(s)", head.text),
                ))
            } else {
                Ok(())
            }
        };
        match head.text {
            "system" => {
                need(1)?;
                d.name = Some(args.iter().map(|t| t.text).collect::<Vec<_>>().join(" "));
            }
            "membranes" => {
                need(1)?;
                let start = raw.find("membranes").unwrap_or(0) + "membranes".len();
                let edges = parse_tree(&raw[start..]).map_err(|m| p.err(n, args[0].col, m))?;
                d.tree = Some((edges, n));
            }
            "output" => {
                need(1)?;
                d.output = Some((parse_membrane(args[0], n)?, n));
            }
            "alphabet" => {
                d.alphabet = Some(
                    args.iter()
                        .map(|t| parse_symbol(*t, n))
                        .collect::<Result<_, _>>()?,
                );
            }
            "terminals" => {
                d.terminals.extend(
                    args.iter()
                        .map(|t| parse_symbol(*t, n))
                        .collect::<Result<Vec<_>, _>>()?,
                );
            }
            "labels" => {
                d.labels.extend(
                    args.iter()
                        .map(|t| parse_symbol(*t, n))
                        .collect::<Result<Vec<_>, _>>()?,
                );
            }
            "mode" => {
                need(1)?;
                d.mode = match args[0].text {
                    "restricted" => Mode::Restricted,
                    "unrestricted" => Mode::Unrestricted,
                    other => return Err(p.err(n, args[0].col, format!("unknown mode {other:?}"))),
                };
            }
            "policy" => {
                need(1)?;
                d.policy = match args[0].text {
                    "any" => OccurrencePolicy::Any,
                    "leftmost" => OccurrencePolicy::Leftmost,
                    other => {
                        return Err(p.err(n, args[0].col, format!("unknown policy {other:?}")))
                    }
                };
            }
            "init" | "rules" => {
                need(2)?;
                let m = parse_membrane(args[0], n)?;
                if args[1].text != "{" && !args[1].text.starts_with('{') {
                    return Err(p.err(n, args[1].col, "expected `{`"));
                }
                let brace = raw.find('{').expect("checked above");
                let body = p.block(n, raw[brace + 1..].trim())?;
                if head.text == "init" {
                    let grid: Vec<&str> = body.iter().map(|(_, l)| *l).collect();
                    let a = parse_grid(&grid.join("\n"))
                        .map_err(|e| p.err(n, head.col, format!("init {m}: {e}")))?;
                    d.init.entry(m).or_default().push(a);
                } else {
                    let rules = d.rules.entry(m).or_default();
                    for (ln, text) in body {
                        let rt = tokens(text);
                        if rt.is_empty() {
                            continue;
                        }
                        let r = parse_rule(&rt, ln)?;
                        if rules.iter().any(|q| q.id == r.id) {
                            return Err(p.err(
                                ln,
                                rt[1].col,
                                format!("duplicate rule id {} in region {m}", r.id),
                            ));
                        }
                        rules.push(r);
                    }
                }
            }
            "priority" => {
                need(3)?;
                let m = parse_membrane(args[0], n)?;
                if args[1].text != ":" {
                    return Err(p.err(n, args[1].col, "expected `:`"));
                }
                let rest = &args[2..];
                let gt = rest
                    .iter()
                    .position(|t| t.text == ">")
                    .ok_or_else(|| p.err(n, head.col, "missing `>`"))?;
                let (hi, lo) = (&rest[..gt], &rest[gt + 1..]);
                if hi.is_empty() || lo.is_empty() || lo.iter().any(|t| t.text == ">") {
                    return Err(p.err(n, rest[gt].col, "expected `<rules> > <rules>`"));
                }
                let pairs = d.priority.entry(m).or_default();
                for h in hi {
                    for l in lo {
                        pairs.push((RuleId(h.text.to_string()), RuleId(l.text.to_string())));
                    }
                }
            }
            "final" => {
                need(3)?;
                let m = parse_membrane(args[0], n)?;
                if args[1].text != ":" {
                    return Err(p.err(n, args[1].col, "expected `:`"));
                }
                let text: String = args[2..].iter().map(|t| t.text).collect();
                let pred = parse_predicate(&text).map_err(|msg| p.err(n, args[2].col, msg))?;
                d.final_spec.set(m, pred);
            }
            other => return Err(p.err(n, head.col, format!("unknown directive {other:?}"))),
        }
    }
    finish(d)
}

fn finish(d: Draft) -> Result<PSystem, ParseError> {
    let (edges, tree_line) = d.tree.ok_or(ParseError {
        line: 1,
        col: 1,
        msg: "missing `membranes`".into(),
    })?;
    let (output, out_line) = d.output.ok_or(ParseError {
        line: 1,
        col: 1,
        msg: "missing `output`".into(),
    })?;
    let tree = MembraneTree::new(edges, output).map_err(|e| ParseError {
        line: if matches!(e, crate::membrane::TreeError::BadOutput(_)) {
            out_line
        } else {
            tree_line
        },
        col: 1,
        msg: e.to_string(),
    })?;
    for m in d.rules.keys().chain(d.init.keys()).chain(d.priority.keys()) {
        if !tree.contains(*m) {
            return Err(ParseError {
                line: tree_line,
                col: 1,
                msg: format!("membrane {m} is used but not declared"),
            });
        }
    }
    let mut rules = d.rules;
    let mut priority = d.priority;
    let regions: BTreeMap<MembraneId, Region> = tree
        .nodes()
        .map(|m| {
            let r = Region::new(m, rules.remove(&m).unwrap_or_default())
                .with_priority(priority.remove(&m).unwrap_or_default());
            (m, r)
        })
        .collect();
    let alphabet = match d.alphabet {
        Some(a) => a,
        None => {
            let mut a = d.terminals.clone();
            a.extend(d.init.values().flatten().flat_map(|x| x.symbols().cloned()));
            for r in regions.values().flat_map(|r| &r.rules) {
                a.extend(r.lhs.iter().chain(&r.rhs).cloned());
            }
            a.extend(d.final_spec.symbols().into_iter().cloned());
            a
        }
    };
    Ok(PSystem {
        name: d.name.unwrap_or_else(|| "unnamed".into()),
        alphabet,
        terminals: d.terminals,
        tree,
        init: d.init,
        regions,
        labels: d.labels,
        mode: d.mode,
        policy: d.policy,
        final_spec: d.final_spec,
    })
}

/// Parses and validates a system.
pub fn load_system(text: &str) -> Result<PSystem, LoadError> {
    let s = parse_system(text)?;
    validate_system(&s).map_err(LoadError::Invalid)?;
    Ok(s)
}

pub fn load_system_file(path: impl AsRef<Path>) -> Result<PSystem, LoadError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_system(&text)
}

fn join_symbols<'a>(it: impl IntoIterator<Item = &'a Symbol>) -> String {
    it.into_iter()
        .map(Symbol::as_str)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Prints a system in the `.aps` format. `parse_system` inverts it.
pub fn print_system(s: &PSystem) -> String {
    let mut out = String::new();
    out.push_str(&format!("system {}\n", s.name));
    out.push_str(&format!("membranes {}\n", s.tree));
    out.push_str(&format!("output {}\n", s.tree.output()));
    out.push_str(&format!("alphabet {}\n", join_symbols(&s.alphabet)));
    out.push_str(&format!("terminals {}\n", join_symbols(&s.terminals)));
    out.push_str(&format!("labels {}\n", join_symbols(&s.labels)));
    out.push_str(&format!("mode {}\n", s.mode));
    out.push_str(&format!("policy {}\n", s.policy));
    for (m, arrays) in &s.init {
        for a in arrays {
            out.push_str(&format!("\ninit {m} {{\n"));
            for line in render_ascii(a).lines() {
                out.push_str(&format!("  {line}\n"));
            }
            out.push_str("}\n");
        }
    }
    for (m, region) in &s.regions {
        if region.rules.is_empty() {
            continue;
        }
        out.push_str(&format!("\nrules {m} {{\n"));
        for r in &region.rules {
            out.push_str(&format!("  {r}\n"));
        }
        out.push_str("}\n");
        // Group dominators by the set of rules they dominate.
        let mut lower: BTreeMap<&RuleId, BTreeSet<&RuleId>> = BTreeMap::new();
        for (hi, lo) in region.priority() {
            lower.entry(hi).or_default().insert(lo);
        }
        let mut groups: BTreeMap<BTreeSet<&RuleId>, Vec<&RuleId>> = BTreeMap::new();
        for (hi, los) in lower {
            groups.entry(los).or_default().push(hi);
        }
        let order = |id: &RuleId| {
            region
                .rules
                .iter()
                .position(|r| &r.id == id)
                .unwrap_or(usize::MAX)
        };
        let mut lines: Vec<(usize, String)> = groups
            .into_iter()
            .map(|(los, mut his)| {
                his.sort_by_key(|id| order(id));
                let mut los: Vec<_> = los.into_iter().collect();
                los.sort_by_key(|id| order(id));
                let his_s: Vec<String> = his.iter().map(ToString::to_string).collect();
                let los_s: Vec<String> = los.iter().map(ToString::to_string).collect();
                (
                    order(his[0]),
                    format!("priority {m} : {} > {}\n", his_s.join(" "), los_s.join(" ")),
                )
            })
            .collect();
        lines.sort();
        for (_, l) in lines {
            out.push_str(&l);
        }
    }
    let finals: Vec<_> = s.final_spec.entries().collect();
    if !finals.is_empty() {
        out.push('\n');
    }
    for (m, p) in finals {
        out.push_str(&format!("final {m} : {p}\n"));
    }
    out
}
