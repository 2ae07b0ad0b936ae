//! Randomized algebraic identities, driven by proptest seeds.

mod common;

use common::algebra::{self, Check};
use proptest::prelude::*;

fn holds(check: Check, seed: u64) -> Result<(), TestCaseError> {
    check(seed).map_err(TestCaseError::fail)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn grassmann_axioms(seed in any::<u64>()) {
        holds(algebra::grassmann_axioms, seed)?;
    }

    #[test]
    fn osp_closure(seed in any::<u64>()) {
        holds(algebra::osp_closure, seed)?;
    }

    #[test]
    fn berezinian_is_multiplicative(seed in any::<u64>()) {
        holds(algebra::ber_multiplicative, seed)?;
    }

    #[test]
    fn osp_inverse_formula(seed in any::<u64>()) {
        holds(algebra::osp_inverse_formula, seed)?;
    }

    #[test]
    fn pairings(seed in any::<u64>()) {
        holds(algebra::pairings, seed)?;
    }

    #[test]
    fn odd_equations_are_dependent(seed in any::<u64>()) {
        holds(algebra::odd_dependency, seed)?;
    }

    #[test]
    fn scaling_action(seed in any::<u64>()) {
        holds(algebra::scaling_action, seed)?;
    }

    #[test]
    fn decorations_solve_the_tetrahedron(seed in any::<u64>()) {
        holds(algebra::decoration, seed)?;
    }
}

#[test]
fn suite_table_is_complete() {
    assert_eq!(algebra::SUITES.len(), 7);
    for (name, check) in algebra::SUITES {
        assert!(check(0).is_ok(), "{name} fails at seed 0");
    }
}
