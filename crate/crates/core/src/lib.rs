//! Cloitre's self-generating sequence, the regular paperfolding sequence,
//! and an automata-based decision procedure for first-order statements
//! about them.

pub mod automata;
pub mod guesser;
pub mod logic;
pub mod sequences;
pub mod verify;
