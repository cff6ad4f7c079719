//! Built-in example models and strategies, embedded from the text
//! fixtures shipped with the crate.

use crate::format::{parse_pomdp, parse_strategy};
use crate::model::{FiniteStrategy, Pomdp};

pub const EXAMPLE1_TEXT: &str = include_str!("../fixtures/example1.pomdp");
pub const ALWAYS_A_TEXT: &str = include_str!("../fixtures/always_a.strat");
pub const ALWAYS_B_TEXT: &str = include_str!("../fixtures/always_b.strat");
pub const UNIFORM_TEXT: &str = include_str!("../fixtures/uniform.strat");
pub const ALTERNATE_TEXT: &str = include_str!("../fixtures/alternate.strat");

/// Seven-state model with an observable start and a six-state
/// single-observation ring; two states pay 0, the rest pay 1. No
/// memoryless strategy wins almost surely, but alternating the two
/// actions does.
pub fn example1() -> Pomdp<f64> {
    parse_pomdp(EXAMPLE1_TEXT).expect("embedded example1 fixture parses")
}

/// Memoryless strategy playing `a` forever (not winning on `example1`).
pub fn always_a(model: &Pomdp<f64>) -> FiniteStrategy<f64> {
    parse_strategy(ALWAYS_A_TEXT, model).expect("embedded always_a fixture parses")
}

/// Memoryless strategy playing `b` forever (not winning on `example1`).
pub fn always_b(model: &Pomdp<f64>) -> FiniteStrategy<f64> {
    parse_strategy(ALWAYS_B_TEXT, model).expect("embedded always_b fixture parses")
}

/// Memoryless strategy mixing `a`/`b` uniformly (not winning on
/// `example1`).
pub fn uniform_ab(model: &Pomdp<f64>) -> FiniteStrategy<f64> {
    parse_strategy(UNIFORM_TEXT, model).expect("embedded uniform fixture parses")
}

/// Two-memory strategy alternating `a` and `b` (winning on `example1`).
pub fn alternate_ab(model: &Pomdp<f64>) -> FiniteStrategy<f64> {
    parse_strategy(ALTERNATE_TEXT, model).expect("embedded alternate fixture parses")
}
