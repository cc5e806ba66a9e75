//! Team-semantics model checking for modal logic and its extensions.
//!
//! The crate evaluates formulas of basic modal logic (`ML`), modal inclusion
//! logic (`MINC`), and modal logic with the nonemptiness operator (`ML(nab)`)
//! or nonempty disjunction (`ML(|!)`) over finite Kripke models with teams.
//! On top of the evaluator it provides bounded bisimulation checking,
//! characteristic-formula synthesis, closure-property verification, semantic
//! game strategy search, and the exponential lower-bound witness
//! construction for translating inclusion atoms into nonemptiness operators.

pub mod bisimulation;
pub mod characteristic;
pub mod closure;
pub mod formulas;
pub mod game;
pub mod generate;
pub mod kripke;
pub mod semantics;

pub use formulas::{Dialect, Formula, Position, PropSymbol};
pub use kripke::{KripkeModel, Team};
pub use semantics::{eval, eval_point, EvalConfig, EvalMode};
