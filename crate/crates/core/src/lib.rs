//! Satisfiability and model checking for LTL with prefix and lexicographic
//! order constraints over the rational order tree.

pub mod automata;
pub mod engine;
pub mod logic;
pub mod oracle;
pub mod order_types;
pub mod tree;
