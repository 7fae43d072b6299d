//! Classical competitors of the depth rank-sum test.

mod hotelling;
mod oja;

pub use hotelling::{hotelling_t2, hotelling_t2_test};
pub use oja::{
    binomial, oja_rank_enumerated, oja_rank_vector, oja_statistic, oja_test, rank_weights, subset_hyperplane,
    OjaConfig, OjaMode, DEFAULT_ENUMERATION_BUDGET, DEFAULT_SUBSETS,
};
