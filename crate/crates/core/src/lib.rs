//! Labelled 8-directional array P systems: θ-rotation rewriting, membrane
//! computations, bounded label-language enumeration and translations from
//! string grammars and Turing machines.

pub mod dsl;
pub mod grid;
pub mod lang;
pub mod membrane;
pub mod oracle;
pub mod rewrite;
pub mod shapes;
pub mod translate;

pub use dsl::{load_system, load_system_file, parse_system, print_system, LoadError, ParseError};
pub use grid::{
    canonicalize, congruent, parse_grid, render_ascii, ArrayObject, Direction, Pixel, Symbol,
};
pub use lang::{
    accepts, collect_outputs, enumerate_label_language, Acceptance, Bounds, EnumerationResult, Word,
};
pub use membrane::{
    apply_step, is_halting, legal_steps, replay, run_random, validate_system, Configuration,
    MembraneId, PSystem, Trace,
};
pub use rewrite::{apply_rule, find_matches, Label, OccurrencePolicy, Target, ThetaRule};
pub use shapes::{gen_star, gen_swastika, match_final, Shape};
