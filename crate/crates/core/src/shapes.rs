//! Picture families and the per-region final-configuration predicates.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::grid::{canonicalize, congruent, ArrayObject, Direction, Pixel, Symbol};
use crate::membrane::{Configuration, MembraneId, PSystem};

/// Eight arms of `arm` cells around a center, all `sym`.
pub fn gen_star(arm: usize, sym: &Symbol) -> ArrayObject {
    assert!(arm >= 1, "star arm must be at least 1");
    let mut cells = vec![(Pixel::ORIGIN, sym.clone())];
    for d in Direction::ALL {
        for k in 1..=arm as i64 {
            cells.push((Pixel::ORIGIN.step(d.offset(), k), sym.clone()));
        }
    }
    canonicalize(&ArrayObject::from_cells(cells).expect("non-empty"))
}

/// Four hooked arms. `arm` counts the center: each axis arm has `arm - 1`
/// cells and ends in a hook of `arm - 1` cells turned 90° clockwise.
pub fn gen_swastika(arm: usize, sym: &Symbol) -> ArrayObject {
    assert!(arm >= 3, "swastika arm must be at least 3");
    let len = arm as i64 - 1;
    let mut cells = vec![(Pixel::ORIGIN, sym.clone())];
    for d in [Direction::E, Direction::N, Direction::W, Direction::S] {
        for k in 1..=len {
            cells.push((Pixel::ORIGIN.step(d.offset(), k), sym.clone()));
        }
        let corner = Pixel::ORIGIN.step(d.offset(), len);
        for j in 1..=len {
            cells.push((corner.step(d.clockwise90().offset(), j), sym.clone()));
        }
    }
    canonicalize(&ArrayObject::from_cells(cells).expect("non-empty"))
}

/// `n` copies of `sym` in a straight line along `d`.
pub fn gen_run(sym: &Symbol, n: usize, d: Direction) -> ArrayObject {
    assert!(n >= 1, "run length must be at least 1");
    canonicalize(&ArrayObject::line(&vec![sym.clone(); n], d).expect("non-empty"))
}

/// A named picture family; parameters other than the size are fixed here.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Shape {
    Star(Symbol),
    Swastika(Symbol),
    Run(Symbol, Direction),
    /// A horizontal word, left to right.
    Tape(Vec<Symbol>),
}

impl Shape {
    /// True if `a` is congruent to some member of the family.
    pub fn matches(&self, a: &ArrayObject) -> bool {
        let n = a.len();
        match self {
            Shape::Star(s) => {
                n >= 9 && (n - 1).is_multiple_of(8) && congruent(a, &gen_star((n - 1) / 8, s))
            }
            Shape::Swastika(s) => {
                n >= 17
                    && (n - 1).is_multiple_of(8)
                    && congruent(a, &gen_swastika((n - 1) / 8 + 1, s))
            }
            Shape::Run(s, d) => congruent(a, &gen_run(s, n, *d)),
            Shape::Tape(w) => {
                !w.is_empty()
                    && n == w.len()
                    && congruent(a, &ArrayObject::line(w, Direction::E).expect("non-empty"))
            }
        }
    }

    pub fn symbols(&self) -> Vec<&Symbol> {
        match self {
            Shape::Star(s) | Shape::Swastika(s) | Shape::Run(s, _) => vec![s],
            Shape::Tape(w) => w.iter().collect(),
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Star(s) => write!(f, "star({s})"),
            Shape::Swastika(s) => write!(f, "swastika({s})"),
            Shape::Run(s, d) => write!(f, "run({s},{d})"),
            Shape::Tape(w) => {
                let parts: Vec<&str> = w.iter().map(Symbol::as_str).collect();
                write!(f, "tape({})", parts.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegionPredicate {
    Empty,
    AllTerminal,
    /// Exactly one array, belonging to the family.
    Shape(Shape),
    /// Multiset equality up to translation of each array.
    ExactSet(Vec<ArrayObject>),
}

impl RegionPredicate {
    pub fn holds(&self, arrays: &[ArrayObject], terminals: &BTreeSet<Symbol>) -> bool {
        match self {
            RegionPredicate::Empty => arrays.is_empty(),
            RegionPredicate::AllTerminal => arrays
                .iter()
                .flat_map(ArrayObject::symbols)
                .all(|s| terminals.contains(s)),
            RegionPredicate::Shape(shape) => arrays.len() == 1 && shape.matches(&arrays[0]),
            RegionPredicate::ExactSet(expected) => {
                let mut want: Vec<ArrayObject> = expected.iter().map(canonicalize).collect();
                let mut got: Vec<ArrayObject> = arrays.iter().map(canonicalize).collect();
                want.sort();
                got.sort();
                want == got
            }
        }
    }
}

impl fmt::Display for RegionPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionPredicate::Empty => f.write_str("empty"),
            RegionPredicate::AllTerminal => f.write_str("all-terminal"),
            RegionPredicate::Shape(s) => write!(f, "{s}"),
            RegionPredicate::ExactSet(v) => write!(f, "exact({} arrays)", v.len()),
        }
    }
}

/// Final configuration specification. Regions not listed must be empty.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FinalSpec {
    regions: BTreeMap<MembraneId, RegionPredicate>,
}

impl FinalSpec {
    pub fn from_entries(
        entries: impl IntoIterator<Item = (MembraneId, RegionPredicate)>,
    ) -> FinalSpec {
        FinalSpec {
            regions: entries
                .into_iter()
                .filter(|(_, p)| *p != RegionPredicate::Empty)
                .collect(),
        }
    }

    /// `Empty` is the default and is not stored.
    pub fn set(&mut self, m: MembraneId, p: RegionPredicate) {
        if p == RegionPredicate::Empty {
            self.regions.remove(&m);
        } else {
            self.regions.insert(m, p);
        }
    }

    pub fn predicate(&self, m: MembraneId) -> &RegionPredicate {
        self.regions.get(&m).unwrap_or(&RegionPredicate::Empty)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&MembraneId, &RegionPredicate)> {
        self.regions.iter()
    }

    pub fn symbols(&self) -> Vec<&Symbol> {
        self.regions
            .values()
            .flat_map(|p| match p {
                RegionPredicate::Shape(s) => s.symbols(),
                RegionPredicate::ExactSet(v) => v.iter().flat_map(ArrayObject::symbols).collect(),
                _ => Vec::new(),
            })
            .collect()
    }
}

/// True if every region of `c` satisfies its final predicate.
pub fn match_final(c: &Configuration, s: &PSystem) -> bool {
    c.regions()
        .all(|(m, arrays)| s.final_spec.predicate(m).holds(arrays, &s.terminals))
}
