//! Small datasets used throughout the documentation and tests.

use crate::Dataset;

/// Three goods, three observations: every pair is consistent but the
/// revealed preferences cycle, `x¹ ≻ x² ≻ x³ ≻ x¹`. WGARP holds, GARP fails.
pub fn example1() -> Dataset {
    Dataset::new(
        vec![
            vec![4.0, 1.0, 5.0],
            vec![5.0, 4.0, 1.0],
            vec![1.0, 5.0, 4.0],
        ],
        vec![
            vec![4.0, 1.0, 1.0],
            vec![1.0, 4.0, 1.0],
            vec![1.0, 1.0, 4.0],
        ],
    )
    .expect("valid fixture")
}

/// Two goods, two observations with `(p¹ - p²)·(x¹ - x²) = -2`: satisfies the
/// law of demand, SARP and every weaker axiom.
pub fn law_of_demand_pair() -> Dataset {
    Dataset::new(
        vec![vec![1.0, 2.0], vec![2.0, 1.0]],
        vec![vec![2.0, 1.0], vec![1.0, 2.0]],
    )
    .expect("valid fixture")
}

/// Two observations at equal prices choosing distinct bundles on the same
/// budget line: WGARP holds, WARP fails.
pub fn warp_violation_pair() -> Dataset {
    Dataset::new(
        vec![vec![1.0, 1.0], vec![1.0, 1.0]],
        vec![vec![2.0, 0.0], vec![0.0, 2.0]],
    )
    .expect("valid fixture")
}
