mod support {
    pub mod matcher_oracle;
}

use proptest::prelude::*;
use support::matcher_oracle::{check_flat, check_nested};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn flat_patterns_agree_with_brute_force(seed in any::<u64>()) {
        if let Err(msg) = check_flat(seed) {
            prop_assert!(false, "{}", msg);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn nested_blocks_agree_with_brute_force(seed in any::<u64>()) {
        if let Err(msg) = check_nested(seed) {
            prop_assert!(false, "{}", msg);
        }
    }
}

#[test]
fn oracle_cases_are_not_trivial() {
    let hits: usize = (0..200u64).map(|s| check_flat(s).unwrap()).sum();
    assert!(hits > 200, "only {hits} matches over 200 cases");
}
