//! Constraint LTL: parsing, normalization, translation into constraint
//! automata, evaluation on lassos, and the satisfiability and model-checking
//! drivers.

mod eval;
mod formula;
mod normalize;
mod solve;
mod translate;

use thiserror::Error;

use crate::automata::AutomatonError;
use crate::engine::EngineError;
use crate::tree::TreeError;

pub use eval::{eval_formula, lasso_accepted, LassoWord};
pub use formula::{parse_formula, parse_formula_file, Formula, FormulaDisplay, LTerm};
pub use normalize::{eliminate_exponents, eliminate_exponents_from, is_nnf, to_nnf};
pub use solve::{
    kary_reduce, maximal_constants, mc, mc_with, normalize, problem_automaton, sat, sat_with, Branching, Outcome,
};
pub use translate::translate;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("undeclared constant `{name}` at offset {offset}")]
    UndeclaredConstant { name: String, offset: usize },
    #[error("variable x{} is outside tuples of arity {arity}", index + 1)]
    ArityMismatch { index: usize, arity: usize },
    #[error("term looks further ahead than the lasso determines")]
    ShiftBeyondWrap,
    #[error("lasso has an empty cycle")]
    EmptyCycle,
    #[error("formula must be in negation normal form with exponents at most one")]
    NotNormalized,
    #[error("constant {name} = {value} is not a node of the {k}-ary tree")]
    ConstantOutOfRange { name: String, value: String, k: u32 },
    #[error("branching degree must be at least 2, got {0}")]
    InvalidBranching(u32),
    #[error("automaton and formula use different constants")]
    ConstantMismatch,
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("internal error: {0}")]
    Internal(String),
}
