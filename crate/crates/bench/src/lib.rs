//! Shared fixtures for the benchmarks.

use papir_core::{DemandModel, PopularityProfile, ProfileDistribution};

/// A Zipf(100, 1) model with K messages and side information of size M.
pub fn zipf_model(k: usize, m: usize, seed: u64) -> DemandModel {
    let profile = ProfileDistribution::zipf_default()
        .sample(k, seed)
        .expect("valid Zipf draw");
    DemandModel::new(profile, m).expect("valid shape")
}

/// The skewed six-message profile (2, 1, 1, 1, 1, 1).
pub fn skewed_six() -> DemandModel {
    let profile = PopularityProfile::from_integers(&[2, 1, 1, 1, 1, 1]).expect("positive weights");
    DemandModel::new(profile, 1).expect("valid shape")
}
