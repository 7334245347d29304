//! Randomized code selection.
//!
//! Given (W, S) the client runs partition-and-code with probability
//! Gamma(W, S) and MDS otherwise, where
//!
//! ```text
//! Gamma(W, S) = Gamma_0 * [p(1, [2:M+1]) p(W)] / [p(W, S) p(1)]
//! ```
//!
//! (1-based ranks). Scaling every Gamma off one reference pair makes
//! Gamma(W, S) p(W, S) / p(W) the same for every part of every partition,
//! which is exactly what a partition query must satisfy to leave the
//! posterior of W equal to its prior. The base value Gamma_0 is the largest
//! one that keeps every Gamma in [0, 1]; it only has to be checked against
//! the M+1 least popular messages.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Signed};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::mds::{mds_build_query, mds_decode};
use super::partition::{check_realization, pc_build_query, pc_decode};
use super::{Answer, Dataset, Query, SchemeKind, SideInfo};
use crate::error::{Error, Result};
use crate::field::MessageVector;
use crate::pmf::{check_rcs_shape, DemandModel, DemandRealization, ProblemParams};
use crate::rational::{self, Rational};

/// Base selection probability Gamma_0 for the reference pair
/// (rank 0, ranks 1..=M).
pub fn rcs_gamma_base(model: &DemandModel) -> Result<Rational> {
    RcsSelector::new(model).map(|s| s.base)
}

/// Gamma(W, S) on popularity ranks.
pub fn rcs_gamma(model: &DemandModel, w: usize, s: &[usize]) -> Result<Rational> {
    RcsSelector::new(model)?.gamma(model, w, s)
}

/// Precomputed constants of the selection rule for one demand model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RcsSelector {
    base: Rational,
    // p(1, [2:M+1]) / p(1)
    reference: Rational,
}

impl RcsSelector {
    pub fn new(model: &DemandModel) -> Result<Self> {
        let (k, m) = (model.k(), model.m());
        check_rcs_shape(k, m)?;
        let ref_side: Vec<usize> = (1..=m).collect();
        let reference = model.joint_pmf(0, &ref_side)? / model.pmf_demand(0)?;

        // the M+1 least popular ranks, each paired with the other M of them
        let tail: Vec<usize> = (k - m - 1..k).collect();
        let mut base = Rational::one();
        for &i in &tail {
            let side: Vec<usize> = tail.iter().copied().filter(|&t| t != i).collect();
            let ratio = model.joint_pmf(i, &side)? / model.pmf_demand(i)? / &reference;
            if ratio < base {
                base = ratio;
            }
        }
        Ok(Self { base, reference })
    }

    pub fn base_gamma(&self) -> &Rational {
        &self.base
    }

    /// p(1, [2:M+1]) / p(1), the reference ratio every Gamma scales from.
    pub fn reference_ratio(&self) -> &Rational {
        &self.reference
    }

    /// True when partition-and-code is always chosen.
    pub fn is_trivial(&self, model: &DemandModel) -> bool {
        model.profile().is_uniform() && self.base.is_one()
    }

    /// Gamma(W, S) with W and S given as popularity ranks.
    pub fn gamma(&self, model: &DemandModel, w: usize, s: &[usize]) -> Result<Rational> {
        DemandRealization::new(model.k(), model.m(), w, s)?;
        let g = &self.base * &self.reference * model.pmf_demand(w)? / model.joint_pmf(w, s)?;
        if !rational::is_probability(&g) {
            return Err(Error::Internal(format!(
                "selection probability {} for W={w}, S={s:?} is outside [0, 1]",
                rational::exact(&g)
            )));
        }
        Ok(g)
    }

    /// Gamma(W, S) with W and S given as caller message ids.
    pub fn gamma_for_messages(
        &self,
        model: &DemandModel,
        w: usize,
        s: &[usize],
    ) -> Result<Rational> {
        let rank = |id: usize| {
            model
                .profile()
                .rank_of(id)
                .ok_or_else(|| Error::usage(format!("message {id} not in profile")))
        };
        let side = s.iter().map(|&i| rank(i)).collect::<Result<Vec<_>>>()?;
        self.gamma(model, rank(w)?, &side)
    }
}

/// The full table of selection probabilities, keyed by (W, S) ranks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RcsPolicy {
    pub base_gamma: Rational,
    pub gamma: BTreeMap<(usize, Vec<usize>), Rational>,
}

impl RcsPolicy {
    pub fn tabulate(model: &DemandModel) -> Result<Self> {
        model.ensure_within_limit(model.realization_count())?;
        let selector = RcsSelector::new(model)?;
        let mut gamma = BTreeMap::new();
        let mut failure = None;
        model.for_each_realization(|w, s| {
            if failure.is_some() {
                return;
            }
            match selector.gamma(model, w, s) {
                Ok(g) => {
                    gamma.insert((w, s.to_vec()), g);
                }
                Err(e) => failure = Some(e),
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(Self {
            base_gamma: selector.base,
            gamma,
        })
    }

    pub fn get(&self, w: usize, s: &[usize]) -> Option<&Rational> {
        self.gamma.get(&(w, s.to_vec()))
    }
}

/// Exact Bernoulli(p) for rational p: draws a uniform integer below the
/// denominator by rejection.
pub fn bernoulli(rng: &mut impl RngCore, p: &Rational) -> bool {
    if !p.is_positive() {
        return false;
    }
    if *p >= Rational::one() {
        return true;
    }
    let den = p.denom().magnitude();
    let num = p.numer().magnitude();
    let bits = den.bits();
    let bytes = bits.div_ceil(8) as usize;
    let excess = (bytes as u64 * 8 - bits) as u32;
    let mut buf = vec![0u8; bytes];
    loop {
        rng.fill_bytes(&mut buf);
        if let Some(top) = buf.last_mut() {
            *top &= 0xFFu8 >> excess;
        }
        let draw = BigUint::from_bytes_le(&buf);
        if &draw < den {
            return &draw < num;
        }
    }
}

/// Everything one RCS retrieval produced.
#[derive(Clone, Debug)]
pub struct RoundOutcome {
    pub query: Query,
    pub answer: Answer,
    pub decoded: MessageVector,
    pub scheme: SchemeKind,
    /// Combinations downloaded; each is one message worth of symbols.
    pub download_units: usize,
}

/// The client's private state for one round: the query to send and how to
/// decode the answer to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RcsPlan {
    pub query: Query,
    demand_part: Option<usize>,
}

impl RcsPlan {
    pub fn scheme(&self) -> SchemeKind {
        self.query.kind()
    }

    /// Recovers X_W from the server's answer. `realization` uses caller
    /// message ids.
    pub fn decode(
        &self,
        answer: &Answer,
        realization: &DemandRealization,
        side_info: &SideInfo,
    ) -> Result<MessageVector> {
        if answer.len() != self.query.answer_len() {
            return Err(Error::usage(format!(
                "answer carries {} combinations, query needs {}",
                answer.len(),
                self.query.answer_len()
            )));
        }
        match (&self.query, self.demand_part) {
            (Query::Partition(_), Some(part)) => {
                pc_decode(answer, part, realization.side(), side_info)
            }
            (Query::Mds(q), _) => mds_decode(answer, q, realization, side_info),
            (Query::Partition(_), None) => {
                Err(Error::Internal("partition plan without a part".into()))
            }
        }
    }
}

/// Selects a scheme with probability Gamma(W, S) and builds its query.
/// The Bernoulli draw comes first, then any partition randomness.
pub fn rcs_plan(
    selector: &RcsSelector,
    model: &DemandModel,
    params: &ProblemParams,
    realization: &DemandRealization,
    rng: &mut ChaCha8Rng,
) -> Result<RcsPlan> {
    check_realization(params, realization)?;
    if model.k() != params.k() || model.m() != params.m() {
        return Err(Error::usage(
            "demand model does not match the problem parameters",
        ));
    }
    let gamma = selector.gamma_for_messages(model, realization.demand(), realization.side())?;
    if bernoulli(rng, &gamma) {
        let plan = pc_build_query(params, realization, rng)?;
        Ok(RcsPlan {
            query: Query::Partition(plan.query),
            demand_part: Some(plan.demand_part),
        })
    } else {
        Ok(RcsPlan {
            query: Query::Mds(mds_build_query(params)?),
            demand_part: None,
        })
    }
}

/// Runs one complete local retrieval: select a scheme, build the query,
/// let the dataset answer it, and decode X_W. `realization` uses caller
/// message ids.
pub fn rcs_round(
    selector: &RcsSelector,
    model: &DemandModel,
    params: &ProblemParams,
    realization: &DemandRealization,
    data: &Dataset,
    seed: u64,
) -> Result<RoundOutcome> {
    if data.k() != params.k() || data.field() != params.field() {
        return Err(Error::usage(
            "dataset does not match the problem parameters",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plan = rcs_plan(selector, model, params, realization, &mut rng)?;
    let side_info = data.side_info(realization.side())?;
    let answer = plan.query.answer(data)?;
    let decoded = plan.decode(&answer, realization, &side_info)?;
    Ok(RoundOutcome {
        download_units: answer.len(),
        scheme: plan.scheme(),
        query: plan.query,
        answer,
        decoded,
    })
}
