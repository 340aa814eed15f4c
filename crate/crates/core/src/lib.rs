//! Automata-theoretic model checking for hierarchical instances of strategy
//! logic with imperfect information, via quantified CTL* with imperfect
//! information and alternating parity tree automata.
#![no_std]

extern crate alloc;

pub mod applications;
pub mod checker;
pub mod logic;
pub mod oracle;
pub mod parity;
pub mod reduction;
pub mod structures;
pub mod tree_automata;
pub mod word_automata;
