//! Popularity profiles and the demand / side-information probability model.
//!
//! All probabilities are exact rationals. Message positions used by the
//! model are *ranks*: position 0 is the most popular message. A profile
//! remembers which caller-facing message id sits at each rank.
//!
//! The side-information set S is uniform over the M-subsets of [K], and the
//! demand W given S is drawn from the remaining messages in proportion to
//! their popularity:
//!
//! ```text
//! p(S)       = 1 / C(K, M)
//! p(W | S)   = lambda_W / sum_{i not in S} lambda_i      (W not in S)
//! p(W, S)    = p(S) p(W | S)
//! p(W)       = sum over M-subsets S of [K] \ W of p(W, S)
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Weibull, Zipf};

use crate::combin::{binomial, binomial_big, for_each_combination};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::rational::{self, KahanSum, Rational};

/// Default cap on the number of subset terms a single enumeration may touch.
pub const DEFAULT_ENUMERATION_LIMIT: u64 = 10_000_000;

/// Continuous samples are rounded to multiples of 2^-32.
pub const QUANTIZATION_BITS: u32 = 32;

/// Message popularities sorted non-increasing, with exact rational values.
#[derive(Clone, Debug)]
pub struct PopularityProfile {
    lambdas: Vec<Rational>,
    original_index: Vec<usize>,
    rank: Vec<usize>,
    // lambda_i = weights[i] / scale, with all weights integral
    weights: Vec<BigUint>,
    total_weight: BigUint,
    small_weights: Option<Vec<u128>>,
}

impl PartialEq for PopularityProfile {
    fn eq(&self, other: &Self) -> bool {
        self.lambdas == other.lambdas && self.original_index == other.original_index
    }
}

impl PopularityProfile {
    /// Builds a profile from caller-ordered popularities. Values are sorted
    /// descending with a stable sort, so ties keep caller order.
    pub fn new(values: Vec<Rational>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::usage("popularity profile is empty"));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_positive()) {
            return Err(Error::usage(format!(
                "popularity of message {i} must be positive, got {}",
                rational::exact(v)
            )));
        }
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[b].cmp(&values[a]));
        let lambdas: Vec<Rational> = order.iter().map(|&i| values[i].clone()).collect();
        let mut rank = vec![0; values.len()];
        for (r, &id) in order.iter().enumerate() {
            rank[id] = r;
        }

        let scale = lambdas
            .iter()
            .fold(BigInt::one(), |acc, l| acc.lcm(l.denom()));
        let weights: Vec<BigUint> = lambdas
            .iter()
            .map(|l| {
                (l.numer() * (&scale / l.denom()))
                    .to_biguint()
                    .expect("positive popularity")
            })
            .collect();
        let total_weight: BigUint = weights.iter().sum();
        let small_weights = if total_weight.bits() <= 120 {
            Some(weights.iter().map(|w| w.to_u128().unwrap()).collect())
        } else {
            None
        };
        Ok(Self {
            lambdas,
            original_index: order,
            rank,
            weights,
            total_weight,
            small_weights,
        })
    }

    pub fn from_integers(values: &[u64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| rational::integer(v)).collect())
    }

    pub fn uniform(k: usize) -> Self {
        Self::new(vec![Rational::one(); k]).expect("k >= 1")
    }

    /// Parses one rational (`p/q`, integer, or decimal) per line. Blank lines
    /// and `#` comments are skipped; message ids number the remaining entries
    /// from 0.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let v = rational::parse_rational(line)
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            values.push(v);
        }
        Self::new(values)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Popularity at a rank (0 = most popular).
    pub fn lambda(&self, rank: usize) -> &Rational {
        &self.lambdas[rank]
    }

    pub fn lambdas(&self) -> &[Rational] {
        &self.lambdas
    }

    /// Caller message id stored at `rank`.
    pub fn original_index(&self, rank: usize) -> usize {
        self.original_index[rank]
    }

    /// Rank of caller message id `id`.
    pub fn rank_of(&self, id: usize) -> Option<usize> {
        self.rank.get(id).copied()
    }

    /// Bit length of the integer-scaled total popularity; a rough measure
    /// of how costly exact arithmetic on this profile is.
    pub fn weight_bits(&self) -> u64 {
        self.total_weight.bits()
    }

    pub fn is_uniform(&self) -> bool {
        self.lambdas.windows(2).all(|w| w[0] == w[1])
    }

    /// Draws a profile of `k` messages from `dist`; deterministic in `seed`.
    pub fn sample(dist: &ProfileDistribution, k: usize, seed: u64) -> Result<Self> {
        dist.sample(k, seed)
    }
}

/// Structural parameters of one retrieval instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProblemParams {
    k: usize,
    m: usize,
    field: PrimeField,
    n: usize,
}

impl ProblemParams {
    pub fn new(k: usize, m: usize, field: PrimeField, n: usize) -> Result<Self> {
        if m < 1 || m >= k {
            return Err(Error::config(format!(
                "need 1 <= M <= K-1, got K={k}, M={m}"
            )));
        }
        if field.order() < k as u64 {
            return Err(Error::config(format!(
                "field order {} is smaller than K={k}",
                field.order()
            )));
        }
        if n == 0 {
            return Err(Error::config("message length n must be at least 1"));
        }
        Ok(Self { k, m, field, n })
    }

    /// Uses the smallest prime field with at least K elements.
    pub fn with_default_field(k: usize, m: usize, n: usize) -> Result<Self> {
        Self::new(k, m, PrimeField::smallest_at_least(k as u64)?, n)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of parts in a partition query, K/(M+1).
    pub fn parts(&self) -> usize {
        self.k / (self.m + 1)
    }

    /// Checks the constraints under which the randomized code selection is
    /// defined: (M+1) | K and (M+1)^2 < K.
    pub fn require_rcs(&self) -> Result<()> {
        check_rcs_shape(self.k, self.m)
    }
}

pub fn check_rcs_shape(k: usize, m: usize) -> Result<()> {
    if m < 1 || m >= k {
        return Err(Error::config(format!(
            "need 1 <= M <= K-1, got K={k}, M={m}"
        )));
    }
    let b = m + 1;
    if !k.is_multiple_of(b) {
        return Err(Error::config(format!("M+1={b} does not divide K={k}")));
    }
    if b * b >= k {
        return Err(Error::config(format!(
            "need (M+1)^2 < K, got (M+1)^2={} and K={k}",
            b * b
        )));
    }
    Ok(())
}

/// A realized demand index and side-information set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DemandRealization {
    demand: usize,
    side: Vec<usize>,
}

impl DemandRealization {
    pub fn new(k: usize, m: usize, demand: usize, side: &[usize]) -> Result<Self> {
        let mut side = side.to_vec();
        side.sort_unstable();
        if side.len() != m {
            return Err(Error::usage(format!(
                "side information must hold {m} indices, got {}",
                side.len()
            )));
        }
        if side.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::usage("side information indices repeat"));
        }
        if let Some(&bad) = side.iter().chain([&demand]).find(|&&i| i >= k) {
            return Err(Error::usage(format!("index {bad} out of range for K={k}")));
        }
        if side.contains(&demand) {
            return Err(Error::usage(format!(
                "demand {demand} is in the side information"
            )));
        }
        Ok(Self { demand, side })
    }

    /// A uniformly random demand and side-information set.
    pub fn random(rng: &mut impl Rng, k: usize, m: usize) -> Result<Self> {
        if m >= k {
            return Err(Error::usage(format!("need M < K, got K={k}, M={m}")));
        }
        let mut ids: Vec<usize> = (0..k).collect();
        for i in 0..=m {
            let j = rng.random_range(i..k);
            ids.swap(i, j);
        }
        Self::new(k, m, ids[0], &ids[1..=m])
    }

    pub fn demand(&self) -> usize {
        self.demand
    }

    pub fn side(&self) -> &[usize] {
        &self.side
    }

    /// W ∪ S, ascending.
    pub fn support(&self) -> Vec<usize> {
        let mut all = self.side.clone();
        all.push(self.demand);
        all.sort_unstable();
        all
    }
}

/// Exact demand / side-information distribution for one profile and M.
///
/// Demand marginals are computed lazily and cached, since each one
/// enumerates C(K-1, M) side-information sets.
#[derive(Debug)]
pub struct DemandModel {
    profile: PopularityProfile,
    m: usize,
    limit: u64,
    subset_count: BigUint,
    demand_cache: Vec<OnceLock<Rational>>,
}

impl DemandModel {
    pub fn new(profile: PopularityProfile, m: usize) -> Result<Self> {
        let k = profile.len();
        if m < 1 || m >= k {
            return Err(Error::config(format!(
                "need 1 <= M <= K-1, got K={k}, M={m}"
            )));
        }
        Ok(Self {
            subset_count: binomial_big(k, m),
            demand_cache: (0..k).map(|_| OnceLock::new()).collect(),
            profile,
            m,
            limit: DEFAULT_ENUMERATION_LIMIT,
        })
    }

    pub fn with_limit(mut self, limit: u64) -> Self {
        self.limit = limit;
        self
    }

    pub fn profile(&self) -> &PopularityProfile {
        &self.profile
    }

    pub fn k(&self) -> usize {
        self.profile.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.k() {
            return Err(Error::usage(format!(
                "index {i} out of range for K={}",
                self.k()
            )));
        }
        Ok(())
    }

    fn check_side(&self, s: &[usize]) -> Result<()> {
        if s.len() != self.m {
            return Err(Error::usage(format!(
                "side information must hold {} indices, got {}",
                self.m,
                s.len()
            )));
        }
        s.iter().try_for_each(|&i| self.check_index(i))
    }

    /// Enumeration guard for work proportional to `terms`.
    pub fn ensure_within_limit(&self, terms: u128) -> Result<()> {
        if terms > self.limit as u128 {
            return Err(Error::EnumerationLimit {
                needed: terms,
                limit: self.limit,
            });
        }
        Ok(())
    }

    /// Sum of popularities outside `t`.
    pub fn lambda_bar(&self, t: &[usize]) -> Result<Rational> {
        t.iter().try_for_each(|&i| self.check_index(i))?;
        let mut inside = vec![false; self.k()];
        for &i in t {
            inside[i] = true;
        }
        Ok(self
            .profile
            .lambdas
            .iter()
            .zip(&inside)
            .filter(|(_, &hit)| !hit)
            .map(|(l, _)| l)
            .sum())
    }

    // scaled lambda_bar(S) as an integer (times the profile's scale)
    fn complement_weight(&self, s: &[usize]) -> BigUint {
        let inside: BigUint = s.iter().map(|&i| &self.profile.weights[i]).sum();
        &self.profile.total_weight - inside
    }

    /// Probability of any particular side-information set, 1/C(K,M).
    pub fn pmf_side_info(&self) -> Rational {
        rational::from_biguint(BigUint::one(), self.subset_count.clone())
    }

    pub fn pmf_demand_given_side(&self, w: usize, s: &[usize]) -> Result<Rational> {
        self.check_index(w)?;
        self.check_side(s)?;
        if s.contains(&w) {
            return Ok(Rational::zero());
        }
        Ok(rational::from_biguint(
            self.profile.weights[w].clone(),
            self.complement_weight(s),
        ))
    }

    pub fn joint_pmf(&self, w: usize, s: &[usize]) -> Result<Rational> {
        self.check_index(w)?;
        self.check_side(s)?;
        if s.contains(&w) {
            return Ok(Rational::zero());
        }
        Ok(rational::from_biguint(
            self.profile.weights[w].clone(),
            self.complement_weight(s) * &self.subset_count,
        ))
    }

    /// Marginal demand probability p(W = w).
    pub fn pmf_demand(&self, w: usize) -> Result<Rational> {
        self.check_index(w)?;
        if let Some(v) = self.demand_cache[w].get() {
            return Ok(v.clone());
        }
        self.ensure_within_limit(binomial(self.k() - 1, self.m))?;
        let inverse_sum = self.inverse_complement_sum(w);
        let v = inverse_sum
            * rational::from_biguint(self.profile.weights[w].clone(), self.subset_count.clone());
        Ok(self.demand_cache[w].get_or_init(|| v).clone())
    }

    /// sum over M-subsets T of [K] \ {w} of 1 / (scaled lambda_bar(T)).
    ///
    /// Sets are grouped by their weight so that repeated values (common for
    /// integer popularities) cost one term each, then summed exactly with a
    /// balanced tree of fraction additions.
    fn inverse_complement_sum(&self, w: usize) -> Rational {
        let pool: Vec<usize> = (0..self.k()).filter(|&i| i != w).collect();
        let total = &self.profile.total_weight;
        let terms: Vec<(BigUint, BigUint)> = match &self.profile.small_weights {
            Some(small) => {
                let largest: u128 = {
                    let mut v: Vec<u128> = pool.iter().map(|&i| small[i]).collect();
                    v.sort_unstable_by(|a, b| b.cmp(a));
                    v.iter().take(self.m).sum()
                };
                if largest <= 1 << 22 {
                    let mut counts = vec![0u64; largest as usize + 1];
                    subset_sums(small, &pool, self.m, 0u128, &mut |s| {
                        counts[s as usize] += 1
                    });
                    counts
                        .iter()
                        .enumerate()
                        .filter(|(_, &c)| c > 0)
                        .map(|(s, &c)| (BigUint::from(c), total - BigUint::from(s)))
                        .collect()
                } else {
                    let mut counts: BTreeMap<u128, u64> = BTreeMap::new();
                    subset_sums(small, &pool, self.m, 0u128, &mut |s| {
                        *counts.entry(s).or_default() += 1
                    });
                    counts
                        .into_iter()
                        .map(|(s, c)| (BigUint::from(c), total - BigUint::from(s)))
                        .collect()
                }
            }
            None => {
                let mut counts: BTreeMap<BigUint, u64> = BTreeMap::new();
                subset_sums(
                    &self.profile.weights,
                    &pool,
                    self.m,
                    BigUint::ZERO,
                    &mut |s: BigUint| *counts.entry(s).or_default() += 1,
                );
                counts
                    .into_iter()
                    .map(|(s, c)| (BigUint::from(c), total - s))
                    .collect()
            }
        };
        let (num, den) = tree_sum(&terms);
        // lambda_bar = scaled / scale, so 1/lambda_bar = scale/scaled; the
        // scale cancels against lambda_w = weight_w / scale in the caller
        rational::from_biguint(num, den)
    }

    /// Calls `f(w, s)` for every realization with positive probability.
    pub fn for_each_realization(&self, mut f: impl FnMut(usize, &[usize])) {
        for w in 0..self.k() {
            let pool: Vec<usize> = (0..self.k()).filter(|&i| i != w).collect();
            for_each_combination(&pool, self.m, |s| f(w, s));
        }
    }

    /// Floating-point p(w, s) / p(w), which equals
    /// 1 / (lambda_bar(s) * sum_T 1 / lambda_bar(T)) over the M-subsets T
    /// of [K] \ {w}. The sum is compensated.
    pub fn conditional_ratio_f64(&self, w: usize, s: &[usize]) -> Result<f64> {
        self.check_index(w)?;
        self.check_side(s)?;
        if s.contains(&w) {
            return Ok(0.0);
        }
        self.ensure_within_limit(binomial(self.k() - 1, self.m))?;
        let pool: Vec<usize> = (0..self.k()).filter(|&i| i != w).collect();
        let mut acc = KahanSum::default();
        let outside = match &self.profile.small_weights {
            Some(small) => {
                let total: u128 = small.iter().sum();
                subset_sums(small, &pool, self.m, 0u128, &mut |x| {
                    acc.add(1.0 / (total - x) as f64)
                });
                (total - s.iter().map(|&i| small[i]).sum::<u128>()) as f64
            }
            None => {
                let lambdas: Vec<f64> = self.profile.lambdas.iter().map(rational::to_f64).collect();
                let outside = |t: &[usize]| {
                    let mut sum = KahanSum::default();
                    for (i, &l) in lambdas.iter().enumerate() {
                        if !t.contains(&i) {
                            sum.add(l);
                        }
                    }
                    sum.value()
                };
                for_each_combination(&pool, self.m, |t| acc.add(1.0 / outside(t)));
                outside(s)
            }
        };
        Ok(1.0 / (outside * acc.value()))
    }

    /// Number of (W, S) realizations, K * C(K-1, M).
    pub fn realization_count(&self) -> u128 {
        binomial(self.k() - 1, self.m).saturating_mul(self.k() as u128)
    }
}

fn subset_sums<T>(weights: &[T], pool: &[usize], m: usize, acc: T, visit: &mut impl FnMut(T))
where
    T: Clone + for<'a> std::ops::Add<&'a T, Output = T>,
{
    if m == 0 {
        visit(acc);
        return;
    }
    for i in 0..=pool.len() - m {
        let next = acc.clone() + &weights[pool[i]];
        subset_sums(weights, &pool[i + 1..], m - 1, next, visit);
    }
}

/// Sums `num_i / den_i` without intermediate reduction.
fn tree_sum(terms: &[(BigUint, BigUint)]) -> (BigUint, BigUint) {
    match terms {
        [] => (BigUint::ZERO, BigUint::one()),
        [(n, d)] => (n.clone(), d.clone()),
        _ => {
            let (l, r) = terms.split_at(terms.len() / 2);
            let (n1, d1) = tree_sum(l);
            let (n2, d2) = tree_sum(r);
            (n1 * &d2 + n2 * &d1, d1 * d2)
        }
    }
}

/// Families of popularity profiles.
#[derive(Clone, Debug, PartialEq)]
pub enum ProfileDistribution {
    /// Integer popularity v in {1..n} with P(v) proportional to v^-s.
    Zipf {
        n: u64,
        s: f64,
    },
    Gamma {
        shape: f64,
        scale: f64,
    },
    Weibull {
        shape: f64,
        scale: f64,
    },
    Uniform,
    Explicit(Vec<Rational>),
}

impl ProfileDistribution {
    pub const fn zipf_default() -> Self {
        Self::Zipf { n: 100, s: 1.0 }
    }

    pub const fn gamma_default() -> Self {
        Self::Gamma {
            shape: 0.62,
            scale: 31.22,
        }
    }

    pub const fn weibull_default() -> Self {
        Self::Weibull {
            shape: 0.79,
            scale: 16.80,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Zipf { .. } => "zipf",
            Self::Gamma { .. } => "gamma",
            Self::Weibull { .. } => "weibull",
            Self::Uniform => "uniform",
            Self::Explicit(_) => "explicit",
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::usage(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        match *self {
            Self::Zipf { n, s } => {
                if n == 0 {
                    return Err(Error::usage("zipf support size must be at least 1"));
                }
                positive("zipf exponent", s)
            }
            Self::Gamma { shape, scale } | Self::Weibull { shape, scale } => {
                positive("shape", shape)?;
                positive("scale", scale)
            }
            Self::Uniform | Self::Explicit(_) => Ok(()),
        }
    }

    pub fn sample(&self, k: usize, seed: u64) -> Result<PopularityProfile> {
        self.validate()?;
        if k < 2 {
            return Err(Error::usage(format!("need at least 2 messages, got {k}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<Rational> = match self {
            Self::Uniform => vec![Rational::one(); k],
            Self::Explicit(values) => {
                if values.len() != k {
                    return Err(Error::usage(format!(
                        "explicit profile has {} entries, expected {k}",
                        values.len()
                    )));
                }
                values.clone()
            }
            Self::Zipf { n, s } => {
                let dist = Zipf::new(*n as f64, *s)
                    .map_err(|e| Error::usage(format!("zipf parameters: {e}")))?;
                (0..k)
                    .map(|_| rational::integer(dist.sample(&mut rng) as u64))
                    .collect()
            }
            Self::Gamma { shape, scale } => {
                let dist = Gamma::new(*shape, *scale)
                    .map_err(|e| Error::usage(format!("gamma parameters: {e}")))?;
                (0..k)
                    .map(|_| quantized_draw(&mut rng, |r| dist.sample(r)))
                    .collect::<Result<_>>()?
            }
            Self::Weibull { shape, scale } => {
                let dist = Weibull::new(*scale, *shape)
                    .map_err(|e| Error::usage(format!("weibull parameters: {e}")))?;
                (0..k)
                    .map(|_| quantized_draw(&mut rng, |r| dist.sample(r)))
                    .collect::<Result<_>>()?
            }
        };
        PopularityProfile::new(values)
    }
}

/// Rounds a continuous draw to a multiple of 2^-32, redrawing zeros.
fn quantized_draw(
    rng: &mut ChaCha8Rng,
    mut draw: impl FnMut(&mut ChaCha8Rng) -> f64,
) -> Result<Rational> {
    let scale = (1u64 << QUANTIZATION_BITS) as f64;
    for _ in 0..10_000 {
        let x = draw(rng);
        if !x.is_finite() || x < 0.0 {
            return Err(Error::Internal(format!("sampler produced {x}")));
        }
        let scaled = (x * scale).round();
        if scaled >= 1.0 && scaled < 2f64.powi(100) {
            let num = BigUint::from(scaled as u128);
            return Ok(rational::from_biguint(
                num,
                BigUint::one() << QUANTIZATION_BITS,
            ));
        }
    }
    Err(Error::Internal(
        "sampler keeps producing values that round to zero".into(),
    ))
}

impl fmt::Display for ProfileDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zipf { n, s } => write!(f, "zipf:{n}:{s}"),
            Self::Gamma { shape, scale } => write!(f, "gamma:{shape}:{scale}"),
            Self::Weibull { shape, scale } => write!(f, "weibull:{shape}:{scale}"),
            Self::Uniform => f.write_str("uniform"),
            Self::Explicit(v) => write!(f, "explicit[{}]", v.len()),
        }
    }
}

impl FromStr for ProfileDistribution {
    type Err = Error;

    /// `uniform`, `zipf[:N:s]`, `gamma[:shape:scale]`, `weibull[:shape:scale]`.
    fn from_str(s: &str) -> Result<Self> {
        let mut it = s.trim().split(':');
        let name = it.next().unwrap_or("").to_ascii_lowercase();
        let args: Vec<&str> = it.collect();
        let float = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad distribution parameter {t:?}")))
        };
        let two = |dflt: Self| -> Result<Self> {
            match args.len() {
                0 => Ok(dflt),
                2 => {
                    let (a, b) = (float(args[0])?, float(args[1])?);
                    Ok(match dflt {
                        Self::Gamma { .. } => Self::Gamma { shape: a, scale: b },
                        _ => Self::Weibull { shape: a, scale: b },
                    })
                }
                _ => Err(Error::Parse(format!("{name} takes shape:scale, got {s:?}"))),
            }
        };
        let dist = match name.as_str() {
            "uniform" if args.is_empty() => Self::Uniform,
            "zipf" => match args.len() {
                0 => Self::zipf_default(),
                2 => Self::Zipf {
                    n: args[0]
                        .trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad zipf support {:?}", args[0])))?,
                    s: float(args[1])?,
                },
                _ => return Err(Error::Parse(format!("zipf takes N:s, got {s:?}"))),
            },
            "gamma" => two(Self::gamma_default())?,
            "weibull" => two(Self::weibull_default())?,
            _ => return Err(Error::Parse(format!("unknown distribution {s:?}"))),
        };
        dist.validate()?;
        Ok(dist)
    }
}
