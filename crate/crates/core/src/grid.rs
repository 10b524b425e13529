//! Integer-plane geometry and sparse 2-D arrays.
//!
//! Coordinates are `x` rightward and `y` upward. Text grids are read top row
//! first, so [`parse_grid`] flips rows while mapping them onto the plane.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Token used for an empty cell in text grids.
pub const EMPTY_CELL: &str = ".";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("grid contains no symbol")]
    EmptyGrid,
    #[error("bad token {token:?} at row {row}, column {col}")]
    BadToken {
        token: String,
        row: usize,
        col: usize,
    },
    #[error("invalid symbol {0:?}")]
    InvalidSymbol(String),
}

/// One of the eight growth directions, multiples of 45 degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    E,
    NE,
    N,
    NW,
    W,
    SW,
    S,
    SE,
}

impl Direction {
    pub const ALL: [Direction; 8] = [
        Direction::E,
        Direction::NE,
        Direction::N,
        Direction::NW,
        Direction::W,
        Direction::SW,
        Direction::S,
        Direction::SE,
    ];

    pub fn from_degrees(deg: u32) -> Option<Direction> {
        if !deg.is_multiple_of(45) || deg >= 360 {
            return None;
        }
        Some(Self::ALL[(deg / 45) as usize])
    }

    pub fn degrees(self) -> u32 {
        self.index() as u32 * 45
    }

    fn index(self) -> usize {
        self as usize
    }

    /// Unit step along this direction.
    pub fn offset(self) -> Offset {
        let (dx, dy) = match self {
            Direction::E => (1, 0),
            Direction::NE => (1, 1),
            Direction::N => (0, 1),
            Direction::NW => (-1, 1),
            Direction::W => (-1, 0),
            Direction::SW => (-1, -1),
            Direction::S => (0, -1),
            Direction::SE => (1, -1),
        };
        Offset { dx, dy }
    }

    /// Rotation by 90 degrees clockwise.
    pub fn clockwise90(self) -> Direction {
        Self::ALL[(self.index() + 6) % 8]
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.degrees())
    }
}

/// Shorthand for [`Direction::offset`].
pub fn dir_offset(d: Direction) -> Offset {
    d.offset()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Offset {
    pub dx: i64,
    pub dy: i64,
}

impl Offset {
    pub fn scaled(self, k: i64) -> Offset {
        Offset {
            dx: self.dx * k,
            dy: self.dy * k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pixel {
    pub x: i64,
    pub y: i64,
}

impl Pixel {
    pub const ORIGIN: Pixel = Pixel { x: 0, y: 0 };

    pub fn new(x: i64, y: i64) -> Pixel {
        Pixel { x, y }
    }

    pub fn step(self, off: Offset, k: i64) -> Pixel {
        Pixel {
            x: self.x + off.dx * k,
            y: self.y + off.dy * k,
        }
    }

    /// Sort key for reading order: left to right, then top to bottom.
    pub fn reading_key(self) -> (i64, i64) {
        (self.x, -self.y)
    }
}

impl std::ops::Add<Offset> for Pixel {
    type Output = Pixel;

    fn add(self, rhs: Offset) -> Pixel {
        self.step(rhs, 1)
    }
}

impl fmt::Display for Pixel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// An alphabet symbol. Cheap to clone; compares by exact string equality.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    /// Tokens must be non-empty, whitespace-free and must not contain `.`,
    /// which is reserved for empty grid cells.
    pub fn new(token: &str) -> Result<Symbol, GridError> {
        if token.is_empty() || token.contains('.') || token.chars().any(char::is_whitespace) {
            return Err(GridError::InvalidSymbol(token.to_string()));
        }
        Ok(Symbol(Arc::from(token)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::str::FromStr for Symbol {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Symbol::new(s)
    }
}

/// Builds a symbol from a literal known to be valid. Panics otherwise.
pub fn sym(token: &str) -> Symbol {
    Symbol::new(token).unwrap_or_else(|e| panic!("{e}"))
}

/// A finite, non-empty picture: at most one symbol per pixel.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArrayObject {
    cells: BTreeMap<Pixel, Symbol>,
}

impl ArrayObject {
    pub fn from_cells<I>(cells: I) -> Result<ArrayObject, GridError>
    where
        I: IntoIterator<Item = (Pixel, Symbol)>,
    {
        let cells: BTreeMap<_, _> = cells.into_iter().collect();
        if cells.is_empty() {
            return Err(GridError::EmptyGrid);
        }
        Ok(ArrayObject { cells })
    }

    pub fn singleton(s: Symbol) -> ArrayObject {
        ArrayObject {
            cells: BTreeMap::from([(Pixel::ORIGIN, s)]),
        }
    }

    /// Consecutive symbols laid out from the origin along `d`.
    pub fn line(symbols: &[Symbol], d: Direction) -> Result<ArrayObject, GridError> {
        let off = d.offset();
        ArrayObject::from_cells(
            symbols
                .iter()
                .enumerate()
                .map(|(k, s)| (Pixel::ORIGIN.step(off, k as i64), s.clone())),
        )
    }

    pub(crate) fn from_map_unchecked(cells: BTreeMap<Pixel, Symbol>) -> ArrayObject {
        debug_assert!(!cells.is_empty());
        ArrayObject { cells }
    }

    pub fn get(&self, p: Pixel) -> Option<&Symbol> {
        self.cells.get(&p)
    }

    pub fn cells(&self) -> &BTreeMap<Pixel, Symbol> {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.cells.values()
    }

    /// Inclusive bounding box `(min, max)`.
    pub fn bounds(&self) -> (Pixel, Pixel) {
        let mut it = self.cells.keys();
        let first = *it.next().expect("arrays are non-empty");
        it.fold((first, first), |(lo, hi), p| {
            (
                Pixel::new(lo.x.min(p.x), lo.y.min(p.y)),
                Pixel::new(hi.x.max(p.x), hi.y.max(p.y)),
            )
        })
    }

    pub fn translate(&self, t: Offset) -> ArrayObject {
        ArrayObject {
            cells: self
                .cells
                .iter()
                .map(|(p, s)| (*p + t, s.clone()))
                .collect(),
        }
    }

    pub fn is_canonical(&self) -> bool {
        let (lo, _) = self.bounds();
        lo == Pixel::ORIGIN
    }
}

impl fmt::Debug for ArrayObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.cells.iter()).finish()
    }
}

impl fmt::Display for ArrayObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_ascii(self))
    }
}

/// Translates `a` so that its minimal x and minimal y are both zero.
pub fn canonicalize(a: &ArrayObject) -> ArrayObject {
    let (lo, _) = a.bounds();
    if lo == Pixel::ORIGIN {
        return a.clone();
    }
    a.translate(Offset {
        dx: -lo.x,
        dy: -lo.y,
    })
}

/// Equal up to translation.
pub fn congruent(a: &ArrayObject, b: &ArrayObject) -> bool {
    a.len() == b.len() && canonicalize(a) == canonicalize(b)
}

/// Parses a whitespace-separated text grid, top row first.
///
/// Leading and trailing blank lines are ignored; a blank line in the middle
/// is an empty row.
pub fn parse_grid(text: &str) -> Result<ArrayObject, GridError> {
    let lines: Vec<&str> = text.lines().collect();
    let first = lines.iter().position(|l| !l.trim().is_empty());
    let last = lines.iter().rposition(|l| !l.trim().is_empty());
    let (first, last) = match (first, last) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(GridError::EmptyGrid),
    };
    let rows = &lines[first..=last];
    let height = rows.len() as i64;
    let mut cells = BTreeMap::new();
    for (r, line) in rows.iter().enumerate() {
        for (c, tok) in line.split_whitespace().enumerate() {
            if tok == EMPTY_CELL {
                continue;
            }
            let s = Symbol::new(tok).map_err(|_| GridError::BadToken {
                token: tok.to_string(),
                row: r,
                col: c,
            })?;
            cells.insert(Pixel::new(c as i64, height - 1 - r as i64), s);
        }
    }
    let a = ArrayObject::from_cells(cells)?;
    Ok(canonicalize(&a))
}

/// Renders an array as a text grid, top row first.
///
/// Columns are padded to their widest token; trailing blanks are trimmed.
pub fn render_ascii(a: &ArrayObject) -> String {
    let (lo, hi) = a.bounds();
    let width = (hi.x - lo.x + 1) as usize;
    let mut col_width = vec![1usize; width];
    for (p, s) in a.cells() {
        let c = (p.x - lo.x) as usize;
        col_width[c] = col_width[c].max(s.as_str().chars().count());
    }
    let mut out = Vec::new();
    for y in (lo.y..=hi.y).rev() {
        let mut line = String::new();
        for x in lo.x..=hi.x {
            let c = (x - lo.x) as usize;
            if c > 0 {
                line.push(' ');
            }
            let tok = a.get(Pixel::new(x, y)).map_or(EMPTY_CELL, Symbol::as_str);
            line.push_str(tok);
            let pad = col_width[c] - tok.chars().count();
            line.extend(std::iter::repeat_n(' ', pad));
        }
        out.push(line.trim_end().to_string());
    }
    out.join("\n")
}
