//! Shared fixtures for the criterion benchmarks.

use randms_core::datagen::{BetaSpec, CovarianceSpec, Dataset};

/// Standard benchmark problem: block-Toeplitz covariates at rho = 0.5 with
/// fixed-pool coefficients and unit noise.
pub fn bench_dataset(n: usize, p: usize, p1: usize, seed: u64) -> Dataset {
    Dataset::simulate(
        n,
        p,
        &CovarianceSpec::toeplitz_block(0.5, 100),
        &BetaSpec::fixed_pool(BetaSpec::standard_pool(), p1),
        1.0,
        seed,
    )
    .expect("benchmark dataset is valid")
}
