//! Rate bounds, exact expected download, and the exhaustive privacy oracle.
//!
//! Every quantity here is an exact rational. Popularity ranks are 0-based:
//! rank 0 is the most popular message.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use crate::combin::{binomial, equal_block_partitions, for_each_equal_block_partition};
use crate::error::{Error, Result};
use crate::pmf::{check_rcs_shape, DemandModel};
use crate::rational::{self, Rational};
use crate::schemes::{PartitionQuery, RcsSelector};

fn check_km(k: usize, m: usize) -> Result<()> {
    if m < 1 || m >= k {
        return Err(Error::config(format!(
            "need 1 <= M <= K-1, got K={k}, M={m}"
        )));
    }
    Ok(())
}

/// (M+1)/K.
pub fn rate_upper_bound(k: usize, m: usize) -> Result<Rational> {
    check_km(k, m)?;
    Ok(rational::ratio((m + 1) as i64, k as i64))
}

/// 1/(K-M).
pub fn rate_mds(k: usize, m: usize) -> Result<Rational> {
    check_km(k, m)?;
    Ok(rational::ratio(1, (k - m) as i64))
}

/// Closed-form rate of the randomized code selection:
///
/// ```text
/// [ (K-M) - (K-M-N) * Gamma_0 * p(1, [2:M+1]) / p(1) * C(K-1, M) ]^-1
/// ```
pub fn rate_lower_bound(model: &DemandModel) -> Result<Rational> {
    let selector = RcsSelector::new(model)?;
    rate_lower_bound_with(model, &selector)
}

pub fn rate_lower_bound_with(model: &DemandModel, selector: &RcsSelector) -> Result<Rational> {
    let (k, m) = (model.k(), model.m());
    let n = k / (m + 1);
    let subsets = rational::integer(binomial(k - 1, m));
    let saved = rational::integer((k - m - n) as u64)
        * selector.base_gamma()
        * selector.reference_ratio()
        * subsets;
    let denom = rational::integer((k - m) as u64) - saved;
    if denom <= Rational::zero() {
        return Err(Error::Internal(format!(
            "non-positive expected download {}",
            rational::exact(&denom)
        )));
    }
    Ok(denom.recip())
}

/// The closed-form rate in compensated floating point. Matches the exact
/// value to roughly 1e-13 relative error at a tiny fraction of the cost
/// for profiles whose subset sums are all distinct.
pub fn rate_lower_bound_f64(model: &DemandModel) -> Result<f64> {
    let (k, m) = (model.k(), model.m());
    check_rcs_shape(k, m)?;
    let reference_side: Vec<usize> = (1..=m).collect();
    // Gamma_0 * reference = min(reference, smallest tail ratio)
    let mut scaled = model.conditional_ratio_f64(0, &reference_side)?;
    let tail: Vec<usize> = (k - m - 1..k).collect();
    for &i in &tail {
        let side: Vec<usize> = tail.iter().copied().filter(|&t| t != i).collect();
        scaled = scaled.min(model.conditional_ratio_f64(i, &side)?);
    }
    let n = k / (m + 1);
    let denom = (k - m) as f64 - (k - m - n) as f64 * binomial(k - 1, m) as f64 * scaled;
    if denom <= 0.0 || !denom.is_finite() {
        return Err(Error::Internal(format!(
            "non-positive expected download {denom}"
        )));
    }
    Ok(1.0 / denom)
}

/// Expected number of downloaded combinations, summed directly over every
/// (W, S). Returns (mean, worst case over realizations).
fn download_sum(model: &DemandModel, selector: &RcsSelector) -> Result<(Rational, Rational)> {
    model.ensure_within_limit(model.realization_count())?;
    let (k, m) = (model.k(), model.m());
    let pc = rational::integer((k / (m + 1)) as u64);
    let mds = rational::integer((k - m) as u64);
    let mut mean = Rational::zero();
    let mut worst = Rational::zero();
    let mut failure = None;
    model.for_each_realization(|w, s| {
        if failure.is_some() {
            return;
        }
        let step = || -> Result<(Rational, Rational)> {
            let g = selector.gamma(model, w, s)?;
            let units = &g * &pc + (Rational::one() - &g) * &mds;
            Ok((model.joint_pmf(w, s)?, units))
        };
        match step() {
            Ok((p, units)) => {
                mean += p * &units;
                if units > worst {
                    worst = units;
                }
            }
            Err(e) => failure = Some(e),
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok((mean, worst)),
    }
}

/// Expected download in combination units, by explicit enumeration.
pub fn expected_download(model: &DemandModel) -> Result<Rational> {
    let selector = RcsSelector::new(model)?;
    download_sum(model, &selector).map(|(mean, _)| mean)
}

/// All rates of one instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RateReport {
    pub k: usize,
    pub m: usize,
    pub r_ub: Rational,
    pub r_lb: Rational,
    pub r_mds: Rational,
    pub expected_download_units: Rational,
    /// Largest expected download of any single (W, S); supplementary.
    pub worst_case_download_units: Rational,
    pub base_gamma: Rational,
}

impl RateReport {
    pub fn compute(model: &DemandModel) -> Result<Self> {
        let (k, m) = (model.k(), model.m());
        check_rcs_shape(k, m)?;
        let selector = RcsSelector::new(model)?;
        let (expected, worst) = download_sum(model, &selector)?;
        Ok(Self {
            k,
            m,
            r_ub: rate_upper_bound(k, m)?,
            r_lb: rate_lower_bound_with(model, &selector)?,
            r_mds: rate_mds(k, m)?,
            expected_download_units: expected,
            worst_case_download_units: worst,
            base_gamma: selector.base_gamma().clone(),
        })
    }

    /// `(key, value)` pairs with exact rationals.
    pub fn fields(&self) -> Vec<(&'static str, String)> {
        vec![
            ("k", self.k.to_string()),
            ("m", self.m.to_string()),
            ("r_ub", rational::exact(&self.r_ub)),
            ("r_lb", rational::exact(&self.r_lb)),
            ("r_mds", rational::exact(&self.r_mds)),
            (
                "expected_download_units",
                rational::exact(&self.expected_download_units),
            ),
            (
                "worst_case_download_units",
                rational::exact(&self.worst_case_download_units),
            ),
            ("base_gamma", rational::exact(&self.base_gamma)),
        ]
    }

    pub fn to_kv(&self) -> String {
        self.fields()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }
}

/// Which query policy the oracle audits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Policy {
    PureMds,
    PurePc,
    Rcs,
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::PureMds => "mds",
            Policy::PurePc => "pc",
            Policy::Rcs => "rcs",
        })
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mds" | "pure-mds" => Ok(Policy::PureMds),
            "pc" | "pure-pc" | "partition" => Ok(Policy::PurePc),
            "rcs" => Ok(Policy::Rcs),
            other => Err(Error::Parse(format!(
                "unknown policy {other:?} (mds, pc, rcs)"
            ))),
        }
    }
}

/// A query value as the server sees it, over caller message ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum QueryEvent {
    Partition(PartitionQuery),
    Mds,
}

impl fmt::Display for QueryEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryEvent::Partition(q) => q.fmt(f),
            QueryEvent::Mds => f.write_str("mds"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub query: QueryEvent,
    /// Caller message id.
    pub demand: usize,
    pub posterior: Rational,
    pub prior: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrivacyVerdict {
    pub policy: Policy,
    pub passed: bool,
    pub violations: Vec<Violation>,
    /// Number of query values with positive probability.
    pub query_values: usize,
    /// Sum of P(Q = q) over all query values; one for a sound model.
    pub total_probability: Rational,
}

impl PrivacyVerdict {
    pub fn to_kv(&self) -> String {
        let mut out = format!(
            "policy={}\npassed={}\nquery_values={}\ntotal_probability={}\nviolations={}\n",
            self.policy,
            self.passed,
            self.query_values,
            rational::exact(&self.total_probability),
            self.violations.len()
        );
        for v in &self.violations {
            out.push_str(&format!(
                "violation={};W={};posterior={};prior={}\n",
                v.query,
                v.demand,
                rational::exact(&v.posterior),
                rational::exact(&v.prior)
            ));
        }
        out
    }
}

/// Exact joint probabilities P(W = w, Q = q) under one policy.
pub struct QueryModel<'a> {
    model: &'a DemandModel,
    policy: Policy,
    selector: Option<RcsSelector>,
    // 1 / number of ways to partition the leftovers
    leftover_share: Rational,
    part_cache: HashMap<Vec<usize>, Vec<Rational>>,
}

impl<'a> QueryModel<'a> {
    pub fn new(model: &'a DemandModel, policy: Policy) -> Result<Self> {
        let (k, m) = (model.k(), model.m());
        check_km(k, m)?;
        let selector = match policy {
            Policy::Rcs => Some(RcsSelector::new(model)?),
            Policy::PurePc if k % (m + 1) != 0 => {
                return Err(Error::config(format!(
                    "M+1={} does not divide K={k}",
                    m + 1
                )))
            }
            _ => None,
        };
        let leftover_share = if k % (m + 1) == 0 {
            rational::from_biguint(
                num_bigint::BigUint::one(),
                equal_block_partitions(k - m - 1, m + 1),
            )
        } else {
            Rational::zero()
        };
        Ok(Self {
            model,
            policy,
            selector,
            leftover_share,
            part_cache: HashMap::new(),
        })
    }

    fn rank(&self, id: usize) -> Result<usize> {
        self.model
            .profile()
            .rank_of(id)
            .ok_or_else(|| Error::usage(format!("message {id} not in profile")))
    }

    /// Probability of choosing partition-and-code given (W, S) ranks.
    fn gamma(&self, w: usize, s: &[usize]) -> Result<Rational> {
        match (self.policy, &self.selector) {
            (Policy::PureMds, _) => Ok(Rational::zero()),
            (Policy::PurePc, _) => Ok(Rational::one()),
            (Policy::Rcs, Some(sel)) => sel.gamma(self.model, w, s),
            (Policy::Rcs, None) => Err(Error::Internal("selector missing".into())),
        }
    }

    /// P(W = w, S = part \ w, Q = q) for each member w of `part`, for any
    /// partition q containing `part`. These do not depend on the other parts.
    fn part_terms(&mut self, part: &[usize]) -> Result<&[Rational]> {
        if !self.part_cache.contains_key(part) {
            let ranks = part
                .iter()
                .map(|&i| self.rank(i))
                .collect::<Result<Vec<_>>>()?;
            let mut terms = Vec::with_capacity(part.len());
            for (j, &w) in ranks.iter().enumerate() {
                let side: Vec<usize> = ranks
                    .iter()
                    .enumerate()
                    .filter(|&(t, _)| t != j)
                    .map(|(_, &r)| r)
                    .collect();
                let g = self.gamma(w, &side)?;
                terms.push(self.model.joint_pmf(w, &side)? * g * &self.leftover_share);
            }
            self.part_cache.insert(part.to_vec(), terms);
        }
        Ok(&self.part_cache[part])
    }

    /// P(W = w, Q = q) for every caller id w.
    pub fn joint_with_query(&mut self, query: &QueryEvent) -> Result<Vec<Rational>> {
        let k = self.model.k();
        let mut out = vec![Rational::zero(); k];
        match query {
            QueryEvent::Partition(q) => {
                if q.k() != k || q.m() != self.model.m() {
                    return Err(Error::usage("partition does not match the demand model"));
                }
                for part in q.parts() {
                    let terms = self.part_terms(part)?.to_vec();
                    for (&id, t) in part.iter().zip(terms) {
                        out[id] = t;
                    }
                }
            }
            QueryEvent::Mds => {
                if self.policy == Policy::PurePc {
                    return Ok(out);
                }
                if self.policy == Policy::PureMds {
                    for (id, slot) in out.iter_mut().enumerate() {
                        *slot = self.model.pmf_demand(self.rank(id)?)?;
                    }
                    return Ok(out);
                }
                self.model
                    .ensure_within_limit(self.model.realization_count())?;
                let mut by_rank = vec![Rational::zero(); k];
                let mut failure = None;
                self.model.for_each_realization(|w, s| {
                    if failure.is_some() {
                        return;
                    }
                    let step = || -> Result<Rational> {
                        let g = self.gamma(w, s)?;
                        Ok(self.model.joint_pmf(w, s)? * (Rational::one() - g))
                    };
                    match step() {
                        Ok(v) => by_rank[w] += v,
                        Err(e) => failure = Some(e),
                    }
                });
                if let Some(e) = failure {
                    return Err(e);
                }
                for (id, slot) in out.iter_mut().enumerate() {
                    *slot = by_rank[self.rank(id)?].clone();
                }
            }
        }
        Ok(out)
    }
}

/// P(Q = q) under `policy`.
pub fn query_probability(
    model: &DemandModel,
    policy: Policy,
    query: &QueryEvent,
) -> Result<Rational> {
    let joint = QueryModel::new(model, policy)?.joint_with_query(query)?;
    Ok(joint.into_iter().sum())
}

/// P(W = w | Q = q) under `policy` for caller id `w`; None when P(Q = q) = 0.
pub fn posterior(
    model: &DemandModel,
    policy: Policy,
    query: &QueryEvent,
    w: usize,
) -> Result<Option<Rational>> {
    let joint = QueryModel::new(model, policy)?.joint_with_query(query)?;
    let total: Rational = joint.iter().sum();
    if total.is_zero() {
        return Ok(None);
    }
    let num = joint
        .get(w)
        .ok_or_else(|| Error::usage(format!("message {w} out of range")))?;
    Ok(Some(num / total))
}

/// Number of elementary terms the oracle evaluates.
fn oracle_terms(model: &DemandModel, policy: Policy) -> u128 {
    let (k, m) = (model.k(), model.m());
    let partitions = if policy == Policy::PureMds {
        0
    } else {
        u128::try_from(equal_block_partitions(k, m + 1)).unwrap_or(u128::MAX)
    };
    let mds = if policy == Policy::Rcs {
        model.realization_count()
    } else {
        0
    };
    partitions.saturating_mul(k as u128).saturating_add(mds)
}

/// Checks P(W = w | Q = q) = P(W = w) exactly for every query value q of
/// positive probability and every message w.
pub fn privacy_oracle(model: &DemandModel, policy: Policy) -> Result<PrivacyVerdict> {
    model.ensure_within_limit(oracle_terms(model, policy))?;
    let k = model.k();
    let mut qm = QueryModel::new(model, policy)?;
    let priors = (0..k)
        .map(|id| model.pmf_demand(qm.rank(id)?))
        .collect::<Result<Vec<_>>>()?;

    let mut violations = Vec::new();
    let mut total = Rational::zero();
    let mut values = 0usize;
    let mut audit = |event: QueryEvent, joint: Vec<Rational>| {
        let pq: Rational = joint.iter().sum();
        if pq.is_zero() {
            return;
        }
        values += 1;
        for (id, j) in joint.iter().enumerate() {
            let post = j / &pq;
            if post != priors[id] {
                violations.push(Violation {
                    query: event.clone(),
                    demand: id,
                    posterior: post,
                    prior: priors[id].clone(),
                });
            }
        }
        total += pq;
    };

    if policy != Policy::PureMds {
        let ids: Vec<usize> = (0..k).collect();
        let mut failure = None;
        let mut joints = Vec::new();
        for_each_equal_block_partition(&ids, model.m() + 1, |parts| {
            if failure.is_some() {
                return;
            }
            let q = PartitionQuery::from_canonical(k, model.m(), parts.to_vec());
            let event = QueryEvent::Partition(q);
            match qm.joint_with_query(&event) {
                Ok(j) => joints.push((event, j)),
                Err(e) => failure = Some(e),
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        for (event, j) in joints {
            audit(event, j);
        }
    }
    let mds = qm.joint_with_query(&QueryEvent::Mds)?;
    audit(QueryEvent::Mds, mds);

    Ok(PrivacyVerdict {
        policy,
        passed: violations.is_empty(),
        violations,
        query_values: values,
        total_probability: total,
    })
}

/// Brute-force argmin over ranks i in [0, K-M) of
/// p(i, [K-M, K)) / p(i), ties going to the largest rank.
pub fn tail_ratio_minimizer(model: &DemandModel) -> Result<usize> {
    let (k, m) = (model.k(), model.m());
    check_km(k, m)?;
    let tail: Vec<usize> = (k - m..k).collect();
    let mut best: Option<(usize, Rational)> = None;
    for i in 0..k - m {
        let v = model.joint_pmf(i, &tail)? / model.pmf_demand(i)?;
        if best.as_ref().is_none_or(|(_, b)| v <= *b) {
            best = Some((i, v));
        }
    }
    Ok(best.expect("K-M >= 1").0)
}

/// The base selection probability found by minimizing over every (W, S),
/// without the reduction to the least popular messages.
pub fn exhaustive_gamma_base(model: &DemandModel) -> Result<Rational> {
    let (k, m) = (model.k(), model.m());
    check_km(k, m)?;
    model.ensure_within_limit(model.realization_count())?;
    let reference_side: Vec<usize> = (1..=m).collect();
    let reference = model.joint_pmf(0, &reference_side)? / model.pmf_demand(0)?;
    let mut best = Rational::one();
    let mut failure = None;
    model.for_each_realization(|w, s| {
        if failure.is_some() {
            return;
        }
        let step = || -> Result<Rational> {
            Ok(model.joint_pmf(w, s)? / model.pmf_demand(w)? / &reference)
        };
        match step() {
            Ok(v) if v < best => best = v,
            Ok(_) => {}
            Err(e) => failure = Some(e),
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(best),
    }
}

/// True iff the exhaustive minimization equals the restricted one.
pub fn gamma_search_equivalence(model: &DemandModel) -> Result<bool> {
    let restricted = RcsSelector::new(model)?;
    Ok(exhaustive_gamma_base(model)? == *restricted.base_gamma())
}

/// Checks that for every two members W_i, W_j of the partition (possibly in
/// the same part)
///
/// ```text
/// Gamma(W_j, S_j) = Gamma(W_i, S_i) p(W_i, S_i) p(W_j) / [p(W_j, S_j) p(W_i)]
/// ```
///
/// where S_x is the rest of W_x's part. `query` uses caller message ids.
pub fn selection_consistent(
    model: &DemandModel,
    selector: &RcsSelector,
    query: &PartitionQuery,
) -> Result<bool> {
    let profile = model.profile();
    let mut entries = Vec::with_capacity(model.k());
    for part in query.parts() {
        let ranks: Vec<usize> = part
            .iter()
            .map(|&i| {
                profile
                    .rank_of(i)
                    .ok_or_else(|| Error::usage("id out of range"))
            })
            .collect::<Result<_>>()?;
        for &w in &ranks {
            let side: Vec<usize> = ranks.iter().copied().filter(|&r| r != w).collect();
            let g = selector.gamma(model, w, &side)?;
            let ratio = model.joint_pmf(w, &side)? / model.pmf_demand(w)?;
            entries.push((g, ratio));
        }
    }
    for (gi, ri) in &entries {
        for (gj, rj) in &entries {
            if *gj != gi * ri / rj {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
