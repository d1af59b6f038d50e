//! Deterministic inputs shared by the benchmarks.

use frameforge::scalar::ratio;
use frameforge::{AmbientSpace, CoefVector, FiniteRankOperator, RankOne};

/// Dense vector on `[1, len]` with small alternating rational entries.
pub fn dense_vector(len: usize) -> CoefVector {
    CoefVector::from_pairs((1..=len).map(|i| {
        let sign = if i % 2 == 0 { -1 } else { 1 };
        (i, ratio(sign * (i as i64 % 7 + 1), (i as i64 % 3) + 1))
    }))
}

/// Rank-`rank` operator on `[1, dim]` with entries `(r + c) mod 5 - 2`.
pub fn banded_operator(dim: usize, rank: usize) -> FiniteRankOperator {
    let terms = (1..=rank)
        .map(|r| RankOne {
            functional: CoefVector::from_pairs((1..=dim).map(|c| (c, ratio(((r + c) % 5) as i64 - 2, 1)))),
            vector: CoefVector::unit(r),
        })
        .collect();
    FiniteRankOperator::new(AmbientSpace::L2, terms)
}
