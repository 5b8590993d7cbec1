//! Finite Kripke frames and a model checker for modal-propositional formulas.
//!
//! `□φ` holds at a world when `φ` holds at every successor (vacuously true
//! without successors); `◇φ` when `φ` holds at some successor. No frame
//! conditions are imposed on the accessibility relation, so only system-K
//! validities are guaranteed.

mod check;
mod formula;
mod frame;
mod parser;

use thiserror::Error;

pub use check::{
    classify_universe, detect_ccb, eval_at, eval_formula, extension, probable_case, relaxed_form,
    CcbVerdict, CcbWitnesses, Universe,
};
pub use formula::Formula;
pub use frame::{FrameDocument, KripkeFrame};
pub use parser::{parse_formula, ParseError, ParseErrorKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KripkeError {
    #[error("unknown world {0:?}")]
    UnknownWorld(String),
    #[error("duplicate world {0:?}")]
    DuplicateWorld(String),
    #[error("world names must be non-empty")]
    EmptyWorldName,
    #[error("atom names must be non-empty")]
    EmptyAtom,
    #[error("valuation has {entries} entries for {worlds} worlds")]
    ValuationCoverage { worlds: usize, entries: usize },
    #[error("world {world:?} satisfies both {first:?} and {second:?}")]
    ConflictingAtoms { world: String, first: String, second: String },
}
