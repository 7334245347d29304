//! Monte-Carlo sweeps of the RCS rate over random popularity profiles.
//!
//! Each profile's rate comes from the closed form, evaluated exactly or in
//! compensated floating point; the average over profiles is a float.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::analysis::{rate_lower_bound, rate_lower_bound_f64, rate_upper_bound};
use crate::error::{Error, Result};
use crate::pmf::{check_rcs_shape, DemandModel, ProfileDistribution};
use crate::rational::{self, KahanSum, Rational};

pub const CSV_HEADER: &str = "K,M,distribution,mean_rcs_ratio,std_err,mds_ratio";

/// Slack allowed when checking reported ratios against their bounds.
pub const REPORT_TOLERANCE: f64 = 1e-12;

/// Above this many bits of integer-scaled total weight, `Auto` switches a
/// profile to floating-point evaluation.
pub const EXACT_WEIGHT_BITS: u64 = 24;

/// How each profile's rate is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Arithmetic {
    Exact,
    Float,
    /// Exact for profiles with small integer weights (Zipf, uniform),
    /// floating point otherwise.
    #[default]
    Auto,
}

impl std::str::FromStr for Arithmetic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(Self::Exact),
            "float" => Ok(Self::Float),
            "auto" => Ok(Self::Auto),
            other => Err(Error::Parse(format!(
                "unknown arithmetic {other:?} (exact, float, auto)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub distributions: Vec<ProfileDistribution>,
    /// K values to sweep, per M.
    pub sweeps: BTreeMap<usize, Vec<usize>>,
    pub profiles_per_point: usize,
    pub seed: u64,
    pub arithmetic: Arithmetic,
}

/// The default K grid for one M: multiples of M+1 from the smallest valid
/// K up to 60.
pub fn default_k_values(m: usize) -> Vec<usize> {
    let b = m + 1;
    (b..=60)
        .step_by(b)
        .filter(|&k| check_rcs_shape(k, m).is_ok())
        .collect()
}

impl ExperimentConfig {
    /// Zipf(100, 1), Gamma, and Weibull, M in {1, 2, 3}, 1000 profiles.
    pub fn standard() -> Self {
        Self {
            distributions: vec![
                ProfileDistribution::zipf_default(),
                ProfileDistribution::gamma_default(),
                ProfileDistribution::weibull_default(),
            ],
            sweeps: (1..=3).map(|m| (m, default_k_values(m))).collect(),
            profiles_per_point: 1000,
            seed: 1,
            arithmetic: Arithmetic::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.profiles_per_point == 0 {
            return Err(Error::config("profiles_per_point must be at least 1"));
        }
        if self.distributions.is_empty() {
            return Err(Error::config("no distribution configured"));
        }
        for (&m, ks) in &self.sweeps {
            for &k in ks {
                check_rcs_shape(k, m)?;
            }
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    ///
    /// Keys: `distribution` (comma-separated, e.g. `zipf:100:1, gamma`),
    /// `m` (list), `k` (list applied to every M), `k.<M>` (list for one M),
    /// `profiles_per_point`, `seed`, `arithmetic` (`exact`, `float`,
    /// `auto`). Lists accept single values and
    /// `start..=end[:step]` ranges. M values without a K list get the
    /// default grid.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::standard();
        let mut ms: Option<Vec<usize>> = None;
        let mut shared_k: Option<Vec<usize>> = None;
        let mut per_m: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::Parse(format!("line {}: {msg}", lineno + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad("expected key = value"))?;
            let (key, value) = (key.trim().to_ascii_lowercase(), value.trim());
            match key.as_str() {
                "distribution" | "distributions" => {
                    cfg.distributions =
                        value.split(',').map(|d| d.parse()).collect::<Result<_>>()?;
                }
                "m" => ms = Some(parse_list(value).map_err(|e| bad(&e))?),
                "k" => shared_k = Some(parse_list(value).map_err(|e| bad(&e))?),
                "profiles_per_point" | "profiles" => {
                    cfg.profiles_per_point = value.parse().map_err(|_| bad("bad integer"))?;
                }
                "seed" => cfg.seed = value.parse().map_err(|_| bad("bad seed"))?,
                "arithmetic" => cfg.arithmetic = value.parse()?,
                other => match other.strip_prefix("k.") {
                    Some(m) => {
                        let m: usize = m.parse().map_err(|_| bad("bad M in k.<M>"))?;
                        per_m.insert(m, parse_list(value).map_err(|e| bad(&e))?);
                    }
                    None => return Err(bad(&format!("unknown key {other:?}"))),
                },
            }
        }
        let ms = ms.unwrap_or_else(|| {
            if per_m.is_empty() {
                vec![1, 2, 3]
            } else {
                per_m.keys().copied().collect()
            }
        });
        cfg.sweeps = ms
            .into_iter()
            .map(|m| {
                let ks = per_m
                    .get(&m)
                    .or(shared_k.as_ref())
                    .cloned()
                    .unwrap_or_else(|| default_k_values(m));
                (m, ks)
            })
            .collect();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

fn parse_list(text: &str) -> std::result::Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let num = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("bad number {t:?}"))
        };
        match item.split_once("..=") {
            Some((start, rest)) => {
                let (end, step) = match rest.split_once(':') {
                    Some((e, s)) => (num(e)?, num(s)?),
                    None => (num(rest)?, 1),
                };
                if step == 0 {
                    return Err("range step must be positive".into());
                }
                out.extend((num(start)?..=end).step_by(step));
            }
            None => out.push(num(item)?),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRow {
    pub k: usize,
    pub m: usize,
    pub distribution: String,
    pub mean_rcs_ratio: f64,
    pub std_err: f64,
    pub mds_ratio: f64,
}

/// K / ((K-M)(M+1)).
pub fn mds_ratio_exact(k: usize, m: usize) -> Rational {
    rational::ratio(k as i64, ((k - m) * (m + 1)) as i64)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of profile `index` at (distribution, K, M); independent of the
/// order in which points are evaluated.
pub fn profile_seed(master: u64, distribution: &str, k: usize, m: usize, index: usize) -> u64 {
    let label = distribution.bytes().fold(0xCBF2_9CE4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01B3)
    });
    [label, k as u64, m as u64, index as u64]
        .into_iter()
        .fold(splitmix64(master), |acc, x| splitmix64(acc ^ x))
}

/// Exact R_LB / R_UB for one sampled profile.
pub fn profile_ratio(
    dist: &ProfileDistribution,
    k: usize,
    m: usize,
    seed: u64,
) -> Result<Rational> {
    let profile = dist.sample(k, seed)?;
    let model = DemandModel::new(profile, m)?;
    Ok(rate_lower_bound(&model)? / rate_upper_bound(k, m)?)
}

/// R_LB / R_UB for one sampled profile under the chosen arithmetic.
pub fn profile_ratio_f64(
    dist: &ProfileDistribution,
    k: usize,
    m: usize,
    seed: u64,
    arithmetic: Arithmetic,
) -> Result<f64> {
    let profile = dist.sample(k, seed)?;
    let exact = match arithmetic {
        Arithmetic::Exact => true,
        Arithmetic::Float => false,
        Arithmetic::Auto => profile.weight_bits() <= EXACT_WEIGHT_BITS,
    };
    let model = DemandModel::new(profile, m)?;
    if exact {
        Ok(rational::to_f64(
            &(rate_lower_bound(&model)? / rate_upper_bound(k, m)?),
        ))
    } else {
        Ok(rate_lower_bound_f64(&model)? * k as f64 / (m + 1) as f64)
    }
}

fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = KahanSum::default();
    values.into_iter().for_each(|v| acc.add(v));
    acc.value()
}

/// Mean and standard error of the mean.
fn summarize(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = kahan_sum(values.iter().copied()) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = kahan_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn run_point(
    dist: &ProfileDistribution,
    k: usize,
    m: usize,
    profiles: usize,
    seed: u64,
    arithmetic: Arithmetic,
) -> Result<ExperimentRow> {
    check_rcs_shape(k, m)?;
    let label = dist.label();
    let ratios = (0..profiles)
        .into_par_iter()
        .map(|i| profile_ratio_f64(dist, k, m, profile_seed(seed, label, k, m, i), arithmetic))
        .collect::<Result<Vec<f64>>>()?;
    let (mean, std_err) = summarize(&ratios);
    let mds_ratio = rational::to_f64(&mds_ratio_exact(k, m));
    if !(mean > mds_ratio - REPORT_TOLERANCE && mean <= 1.0 + REPORT_TOLERANCE) {
        return Err(Error::Internal(format!(
            "mean ratio {mean} outside ({mds_ratio}, 1] at K={k}, M={m}"
        )));
    }
    Ok(ExperimentRow {
        k,
        m,
        distribution: label.to_string(),
        mean_rcs_ratio: mean,
        std_err,
        mds_ratio,
    })
}

/// One row per (distribution, M, K), ordered by those keys.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    config.validate()?;
    let mut rows = Vec::new();
    for dist in &config.distributions {
        for (&m, ks) in &config.sweeps {
            for &k in ks {
                rows.push(run_point(
                    dist,
                    k,
                    m,
                    config.profiles_per_point,
                    config.seed,
                    config.arithmetic,
                )?);
            }
        }
    }
    sort_rows(&mut rows);
    Ok(rows)
}

pub fn sort_rows(rows: &mut [ExperimentRow]) {
    rows.sort_by(|a, b| (&a.distribution, a.m, a.k).cmp(&(&b.distribution, b.m, b.k)));
}

pub fn emit_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.k,
            r.m,
            r.distribution,
            rational::format_sig12(r.mean_rcs_ratio),
            rational::format_sig12(r.std_err),
            rational::format_sig12(r.mds_ratio)
        );
    }
    out
}

pub fn write_csv(rows: &[ExperimentRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, emit_csv(rows)).map_err(|e| Error::io(path, e))
}

pub fn parse_csv(text: &str) -> Result<Vec<ExperimentRow>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(CSV_HEADER) {
        return Err(Error::Parse("missing or wrong CSV header".into()));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(Error::Parse(format!("expected 6 fields in {line:?}")));
            }
            let int = |t: &str| {
                t.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad integer {t:?}")))
            };
            let float = |t: &str| {
                t.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad number {t:?}")))
            };
            Ok(ExperimentRow {
                k: int(f[0])?,
                m: int(f[1])?,
                distribution: f[2].to_string(),
                mean_rcs_ratio: float(f[3])?,
                std_err: float(f[4])?,
                mds_ratio: float(f[5])?,
            })
        })
        .collect()
}
