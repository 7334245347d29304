//! Popularity-aware private information retrieval with side information.
//!
//! A user holding M of the K messages stored on a single server wants one
//! more message without revealing which one. Demand is not uniform: each
//! message has a popularity, and the side-information set is uniform over
//! M-subsets. This crate provides
//!
//! * [`field`]: GF(q) arithmetic and linear solving for the coded answers,
//! * [`pmf`]: exact popularity profiles and the demand distribution,
//! * [`schemes`]: the partition-and-code and MDS schemes and the randomized
//!   code selection (RCS) that mixes them so that queries leak nothing,
//! * [`analysis`]: rate bounds and an exhaustive privacy oracle,
//! * [`simulation`]: Monte-Carlo sweeps of the achievable rate,
//! * [`net`]: a length-prefixed TCP protocol with a server and client.

pub mod analysis;
pub mod combin;
pub mod error;
pub mod field;
pub mod net;
pub mod pmf;
pub mod rational;
pub mod schemes;
pub mod simulation;

pub use error::{Error, Result};
pub use field::{FieldElement, MessageVector, PrimeField};
pub use pmf::{
    DemandModel, DemandRealization, PopularityProfile, ProblemParams, ProfileDistribution,
};
pub use rational::Rational;
pub use schemes::{
    Answer, Dataset, MdsQuery, PartitionQuery, Query, RcsPolicy, RcsSelector, SchemeKind, SideInfo,
};
