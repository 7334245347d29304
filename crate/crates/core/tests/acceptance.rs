//! Acceptance checks. Runs every criterion, prints one PASS/FAIL line for
//! each, and exits non-zero if any failed.
//!
//! Expected values come either from the worked example for K=6, M=1 or
//! from oracles in this file that recompute probabilities straight from
//! their definitions, without the grouped-sum machinery of the library.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::thread;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use papir_core::analysis::{
    expected_download, gamma_search_equivalence, posterior, privacy_oracle, query_probability,
    rate_lower_bound, selection_consistent, tail_ratio_minimizer, Policy, QueryEvent,
};
use papir_core::net::{self, Client, Server};
use papir_core::rational::{ratio, to_f64};
use papir_core::schemes::{
    mds_answer, mds_build_query, mds_decode, pc_answer, pc_build_query, pc_decode, rcs_gamma,
    rcs_gamma_base, rcs_round,
};
use papir_core::simulation::{mds_ratio_exact, run_point, Arithmetic, ExperimentRow};
use papir_core::{
    Answer, Dataset, DemandModel, DemandRealization, MdsQuery, MessageVector, PartitionQuery,
    PopularityProfile, PrimeField, ProblemParams, ProfileDistribution, Query, Rational,
    RcsSelector, SchemeKind,
};

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: papir_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

// ---------------------------------------------------------------------------
// Independent oracle: probabilities straight from the definitions
// ---------------------------------------------------------------------------

struct Naive {
    /// Sorted non-increasing.
    lambdas: Vec<Rational>,
    m: usize,
    subsets: Vec<Vec<usize>>,
}

fn subsets_of(n: usize, m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![vec![]];
    }
    if n < m {
        return vec![];
    }
    let mut out = subsets_of(n - 1, m);
    for mut s in subsets_of(n - 1, m - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

impl Naive {
    fn new(mut lambdas: Vec<Rational>, m: usize) -> Self {
        lambdas.sort_by(|a, b| b.cmp(a));
        let subsets = subsets_of(lambdas.len(), m);
        Self {
            lambdas,
            m,
            subsets,
        }
    }

    fn k(&self) -> usize {
        self.lambdas.len()
    }

    fn joint(&self, w: usize, s: &[usize]) -> Rational {
        if s.contains(&w) {
            return Rational::zero();
        }
        let outside: Rational = (0..self.k())
            .filter(|j| !s.contains(j))
            .map(|j| self.lambdas[j].clone())
            .sum();
        let p_side = Rational::new(BigInt::one(), BigInt::from(self.subsets.len()));
        p_side * &self.lambdas[w] / outside
    }

    fn marginal(&self, w: usize) -> Rational {
        self.subsets.iter().map(|s| self.joint(w, s)).sum()
    }

    fn reference(&self) -> Rational {
        let side: Vec<usize> = (1..=self.m).collect();
        self.joint(0, &side) / self.marginal(0)
    }

    /// Base selection probability from the minimization over every (W, S).
    fn exhaustive_base(&self) -> Rational {
        let reference = self.reference();
        let marginals: Vec<Rational> = (0..self.k()).map(|w| self.marginal(w)).collect();
        let mut best = Rational::one();
        for s in &self.subsets {
            for w in (0..self.k()).filter(|w| !s.contains(w)) {
                let v = self.joint(w, s) / &marginals[w] / &reference;
                if v < best {
                    best = v;
                }
            }
        }
        best
    }
}

fn random_lambdas(rng: &mut ChaCha8Rng, k: usize) -> Vec<Rational> {
    loop {
        let v: Vec<Rational> = (0..k)
            .map(|_| ratio(rng.random_range(1..=30), rng.random_range(1..=8)))
            .collect();
        if v.iter().any(|x| *x != v[0]) {
            return v;
        }
    }
}

fn model_of(lambdas: &[Rational], m: usize) -> DemandModel {
    DemandModel::new(PopularityProfile::new(lambdas.to_vec()).unwrap(), m).unwrap()
}

fn case_two() -> Vec<Rational> {
    [2, 1, 1, 1, 1, 1].iter().map(|&v| ratio(v, 1)).collect()
}

fn canonical_partitions(k: usize, block: usize) -> Vec<Vec<Vec<usize>>> {
    fn go(rest: &[usize], block: usize, acc: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        let Some((&head, tail)) = rest.split_first() else {
            out.push(acc.clone());
            return;
        };
        for mates in subsets_of(tail.len(), block - 1) {
            let mut part = vec![head];
            part.extend(mates.iter().map(|&i| tail[i]));
            let left: Vec<usize> = tail.iter().copied().filter(|x| !part.contains(x)).collect();
            acc.push(part);
            go(&left, block, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    go(
        &(0..k).collect::<Vec<_>>(),
        block,
        &mut Vec::new(),
        &mut out,
    );
    out
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

fn criterion_1() -> Outcome {
    let naive = Naive::new(case_two(), 1);
    let model = model_of(&case_two(), 1);
    let joint_cases = [
        (0, 1, ratio(1, 18)),
        (1, 0, ratio(1, 30)),
        (1, 2, ratio(1, 36)),
    ];
    for (w, s, want) in joint_cases {
        let got = lib(model.joint_pmf(w, &[s]))?;
        ensure(got == want && naive.joint(w, &[s]) == want, || {
            format!("p({w}, {{{s}}}) = {got}, expected {want}")
        })?;
    }
    for (w, want) in [(0, ratio(5, 18)), (1, ratio(13, 90))] {
        let got = lib(model.pmf_demand(w))?;
        ensure(got == want && naive.marginal(w) == want, || {
            format!("p({w}) = {got}, expected {want}")
        })?;
    }
    let gammas = [
        (0, 1, ratio(25, 26)),
        (1, 0, ratio(5, 6)),
        (2, 3, ratio(1, 1)),
    ];
    for (w, s, want) in gammas {
        let got = lib(rcs_gamma(&model, w, &[s]))?;
        ensure(got == want, || {
            format!("Gamma({w}, {{{s}}}) = {got}, expected {want}")
        })?;
    }
    let rate = lib(rate_lower_bound(&model))?;
    ensure(rate == ratio(13, 40), || {
        format!("rate {rate}, expected 13/40")
    })?;
    let download = lib(expected_download(&model))?;
    ensure(download == ratio(40, 13), || {
        format!("download {download}, expected 40/13")
    })
}

fn criterion_2() -> Outcome {
    let model = DemandModel::new(PopularityProfile::uniform(6), 1).unwrap();
    let verdict = lib(privacy_oracle(&model, Policy::PurePc))?;
    ensure(verdict.passed, || {
        format!("violations: {:?}", verdict.violations)
    })?;
    ensure(verdict.total_probability == Rational::one(), || {
        "total probability is not 1".into()
    })?;
    let q = QueryEvent::Partition(
        PartitionQuery::new(6, 1, vec![vec![0, 1], vec![2, 4], vec![3, 5]]).unwrap(),
    );
    let pq = lib(query_probability(&model, Policy::PurePc, &q))?;
    ensure(pq == ratio(1, 15), || {
        format!("P(Q=q) = {pq}, expected 1/15")
    })?;
    let post = lib(posterior(&model, Policy::PurePc, &q, 0))?;
    ensure(post == Some(ratio(1, 6)), || {
        format!("posterior {post:?}, expected 1/6")
    })
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (k, m, count) in [(6, 1, 50), (12, 2, 5)] {
        for i in 0..count {
            let lambdas = random_lambdas(&mut rng, k);
            let model = model_of(&lambdas, m);
            let verdict = lib(privacy_oracle(&model, Policy::Rcs))?;
            ensure(verdict.passed, || {
                format!(
                    "K={k} M={m} profile {i}: {} violations",
                    verdict.violations.len()
                )
            })?;
            ensure(verdict.total_probability == Rational::one(), || {
                format!("K={k} M={m} profile {i}: query probabilities do not sum to 1")
            })?;
            // posterior equals the independently computed prior for one query value
            let naive = Naive::new(lambdas.clone(), m);
            let parts = canonical_partitions(k, m + 1).swap_remove(0);
            let q = QueryEvent::Partition(PartitionQuery::new(k, m, parts).unwrap());
            let id = rng.random_range(0..k);
            let rank = model.profile().rank_of(id).unwrap();
            let post = lib(posterior(&model, Policy::Rcs, &q, id))?;
            ensure(post == Some(naive.marginal(rank)), || {
                format!("K={k} M={m} profile {i}: posterior of {id} differs from prior")
            })?;
        }
    }
    let model = model_of(&case_two(), 1);
    let pc = lib(privacy_oracle(&model, Policy::PurePc))?;
    ensure(!pc.passed, || {
        "pure partition-and-code passed on a skewed profile".into()
    })?;
    ensure(
        pc.violations
            .iter()
            .any(|v| v.demand == 1 && v.posterior == ratio(1, 6) && v.prior == ratio(13, 90)),
        || "missing the 1/6 vs 13/90 violation".into(),
    )?;
    let q = QueryEvent::Partition(
        PartitionQuery::new(6, 1, vec![vec![0, 1], vec![2, 4], vec![3, 5]]).unwrap(),
    );
    let pq = lib(query_probability(&model, Policy::Rcs, &q))?;
    ensure(pq == ratio(5, 78), || {
        format!("P(Q=q) = {pq}, expected 5/78")
    })?;
    for (id, want) in [(0, ratio(5, 18)), (1, ratio(13, 90))] {
        let post = lib(posterior(&model, Policy::Rcs, &q, id))?;
        ensure(post == Some(want.clone()), || {
            format!("posterior of {id}: {post:?}, expected {want}")
        })?;
    }
    Ok(())
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (k, m) in [(6, 1), (12, 2), (20, 3)] {
        let params = lib(ProblemParams::with_default_field(k, m, 3))?;
        let model = model_of(&random_lambdas(&mut rng, k), m);
        let selector = lib(RcsSelector::new(&model))?;
        let mds_query = lib(mds_build_query(&params))?;
        let mut schemes_seen = [false; 2];
        for round in 0..1000 {
            let data = Dataset::random(&params, &mut rng);
            let r = lib(DemandRealization::random(&mut rng, k, m))?;
            let side = lib(data.side_info(r.side()))?;
            let want = data.message(r.demand()).unwrap();

            let plan = lib(pc_build_query(&params, &r, &mut rng))?;
            let answer = lib(pc_answer(&plan.query, &data))?;
            let got = lib(pc_decode(&answer, plan.demand_part, r.side(), &side))?;
            ensure(&got == want, || {
                format!("K={k} M={m} round {round}: partition decode")
            })?;

            let answer = lib(mds_answer(&mds_query, &data))?;
            let got = lib(mds_decode(&answer, &mds_query, &r, &side))?;
            ensure(&got == want, || {
                format!("K={k} M={m} round {round}: MDS decode")
            })?;

            let out = lib(rcs_round(
                &selector,
                &model,
                &params,
                &r,
                &data,
                rng.random(),
            ))?;
            ensure(&out.decoded == want, || {
                format!("K={k} M={m} round {round}: RCS decode")
            })?;
            schemes_seen[(out.scheme == SchemeKind::Mds) as usize] = true;
        }
        ensure(schemes_seen[0], || {
            format!("K={k} M={m}: RCS never chose partition-and-code")
        })?;
    }
    Ok(())
}

fn criterion_5() -> Outcome {
    let params = lib(ProblemParams::with_default_field(6, 1, 1))?;
    let model = model_of(&case_two(), 1);
    let selector = lib(RcsSelector::new(&model))?;
    let data = Dataset::random(&params, &mut ChaCha8Rng::seed_from_u64(5));
    let r = lib(DemandRealization::new(6, 1, 0, &[1]))?;
    let rounds = 26_000;
    let (mut units, mut mds) = (0usize, 0usize);
    for seed in 0..rounds {
        let out = lib(rcs_round(
            &selector,
            &model,
            &params,
            &r,
            &data,
            seed as u64,
        ))?;
        ensure(&out.decoded == data.message(0).unwrap(), || {
            format!("round {seed}: decode")
        })?;
        units += out.download_units;
        mds += (out.scheme == SchemeKind::Mds) as usize;
    }
    let n = rounds as f64;
    let p = 1.0 / 26.0;
    let freq = mds as f64 / n;
    let freq_sigma = (p * (1.0 - p) / n).sqrt();
    ensure((freq - p).abs() <= 3.0 * freq_sigma, || {
        format!(
            "MDS frequency {freq:.5}, expected {p:.5} +- {:.5}",
            3.0 * freq_sigma
        )
    })?;
    // units are 3 or 5, so the variance is 4 p (1 - p)
    let mean = units as f64 / n;
    let target = to_f64(&ratio(40, 13));
    let mean_sigma = (4.0 * p * (1.0 - p) / n).sqrt();
    ensure((mean - target).abs() <= 3.0 * mean_sigma, || {
        format!(
            "mean download {mean:.5}, expected {target:.5} +- {:.5}",
            3.0 * mean_sigma
        )
    })
}

fn check_sweep(rows: &[ExperimentRow]) -> Outcome {
    for r in rows {
        let exact = Rational::new(
            BigInt::from(r.k),
            BigInt::from(r.k - r.m) * BigInt::from(r.m + 1),
        );
        ensure(
            mds_ratio_exact(r.k, r.m) == exact && r.mds_ratio == to_f64(&exact),
            || {
                format!(
                    "K={} M={}: MDS ratio {} is not K/((K-M)(M+1))",
                    r.k, r.m, r.mds_ratio
                )
            },
        )?;
        ensure(
            r.mds_ratio < r.mean_rcs_ratio && r.mean_rcs_ratio <= 1.0,
            || {
                format!(
                    "K={} M={}: mean ratio {} outside ({}, 1]",
                    r.k, r.m, r.mean_rcs_ratio, r.mds_ratio
                )
            },
        )?;
    }
    for pair in rows.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let sigma = (a.std_err.powi(2) + b.std_err.powi(2)).sqrt();
        ensure(b.mean_rcs_ratio >= a.mean_rcs_ratio - 3.0 * sigma, || {
            format!(
                "M={}: ratio drops from {} at K={} to {} at K={}",
                a.m, a.mean_rcs_ratio, a.k, b.mean_rcs_ratio, b.k
            )
        })?;
    }
    let (first, last) = (rows.first().unwrap(), rows.last().unwrap());
    let sigma = (first.std_err.powi(2) + last.std_err.powi(2)).sqrt();
    ensure(
        last.mean_rcs_ratio - first.mean_rcs_ratio > 3.0 * sigma,
        || {
            format!(
                "M={}: K={} mean {} not above K={} mean {} by 3 sigma",
                first.m, last.k, last.mean_rcs_ratio, first.k, first.mean_rcs_ratio
            )
        },
    )
}

fn criterion_6() -> Outcome {
    let zipf = ProfileDistribution::zipf_default();
    let sweeps: [(usize, Vec<usize>); 3] = [
        (1, (6..=60).step_by(2).collect()),
        (2, (12..=60).step_by(3).collect()),
        (3, (20..=60).step_by(4).collect()),
    ];
    for (m, ks) in sweeps {
        let rows = ks
            .iter()
            .map(|&k| lib(run_point(&zipf, k, m, 1000, 2024, Arithmetic::Exact)))
            .collect::<Result<Vec<_>, _>>()?;
        check_sweep(&rows)?;
        let (first, last) = (&rows[0], rows.last().unwrap());
        println!(
            "    M={m}: K={} ratio {:.4} (se {:.1e}), K={} ratio {:.4} (se {:.1e}), MDS {:.4}",
            first.k,
            first.mean_rcs_ratio,
            first.std_err,
            last.k,
            last.mean_rcs_ratio,
            last.std_err,
            last.mds_ratio
        );
    }
    Ok(())
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let partitions = canonical_partitions(6, 2);
    ensure(partitions.len() == 15, || {
        format!("{} partitions, expected 15", partitions.len())
    })?;
    for i in 0..20 {
        let lambdas = random_lambdas(&mut rng, 6);
        let naive = Naive::new(lambdas.clone(), 1);
        let model = model_of(&lambdas, 1);
        let selector = lib(RcsSelector::new(&model))?;
        let rank = |id: usize| model.profile().rank_of(id).unwrap();
        for parts in &partitions {
            let q = PartitionQuery::new(6, 1, parts.clone()).unwrap();
            ensure(lib(selection_consistent(&model, &selector, &q))?, || {
                format!("profile {i}: library reports inconsistency on {q}")
            })?;
            // (Gamma, p(W,S)/p(W)) for every member, recomputed independently
            let mut members = Vec::new();
            for part in parts {
                for &w in part {
                    let s: Vec<usize> =
                        part.iter().copied().filter(|&x| x != w).map(rank).collect();
                    let w = rank(w);
                    let g = lib(selector.gamma(&model, w, &s))?;
                    members.push((g, naive.joint(w, &s) / naive.marginal(w)));
                }
            }
            for (gi, ri) in &members {
                for (gj, rj) in &members {
                    ensure(*gj == gi * ri / rj, || {
                        format!("profile {i}: identity fails on {q}")
                    })?;
                }
            }
        }
    }
    Ok(())
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for (k, m) in [(5, 1), (6, 1), (6, 2), (8, 3)] {
        for i in 0..25 {
            let lambdas = random_lambdas(&mut rng, k);
            let model = model_of(&lambdas, m);
            let got = lib(tail_ratio_minimizer(&model))?;
            ensure(got == k - m - 1, || {
                format!(
                    "K={k} M={m} profile {i}: minimizer rank {got}, expected {}",
                    k - m - 1
                )
            })?;
            // brute force in the oracle, ties to the largest rank
            let naive = Naive::new(lambdas, m);
            let tail: Vec<usize> = (k - m..k).collect();
            let values: Vec<Rational> = (0..k - m)
                .map(|i| naive.joint(i, &tail) / naive.marginal(i))
                .collect();
            let min = values.iter().min().unwrap();
            let argmin = values.iter().rposition(|v| v == min).unwrap();
            ensure(argmin == k - m - 1, || {
                format!("K={k} M={m} profile {i}: oracle argmin {argmin}")
            })?;
        }
    }
    Ok(())
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (k, m, count) in [(6, 1, 50), (12, 2, 10)] {
        for i in 0..count {
            let lambdas = random_lambdas(&mut rng, k);
            let model = model_of(&lambdas, m);
            ensure(lib(gamma_search_equivalence(&model))?, || {
                format!("K={k} M={m} profile {i}: library reports a mismatch")
            })?;
            let oracle = Naive::new(lambdas, m).exhaustive_base();
            let restricted = lib(rcs_gamma_base(&model))?;
            ensure(oracle == restricted, || {
                format!("K={k} M={m} profile {i}: exhaustive {oracle} vs restricted {restricted}")
            })?;
        }
    }
    let model = model_of(&case_two(), 1);
    let base = lib(rcs_gamma_base(&model))?;
    ensure(base == ratio(25, 26), || {
        format!("base {base}, expected 25/26")
    })
}

fn random_query(rng: &mut ChaCha8Rng) -> Query {
    let (k, m) = [(6, 1), (12, 2), (20, 3)][rng.random_range(0..3)];
    let params = ProblemParams::with_default_field(k, m, 1).unwrap();
    if rng.random() {
        let r = DemandRealization::random(rng, k, m).unwrap();
        Query::Partition(pc_build_query(&params, &r, rng).unwrap().query)
    } else {
        let f = PrimeField::new([23u64, 101, 65_521][rng.random_range(0..3)]).unwrap();
        let mut pts: Vec<u64> = (0..f.order()).collect();
        for i in 0..k {
            let j = rng.random_range(i..pts.len());
            pts.swap(i, j);
        }
        Query::Mds(MdsQuery::new(f, m, pts[..k].iter().map(|&v| f.element(v)).collect()).unwrap())
    }
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for i in 0..1000 {
        let q = random_query(&mut rng);
        let back = lib(net::encode_query(&q).and_then(|f| net::decode_query(&f)))?;
        ensure(back == q, || format!("query {i} changed in transit"))?;

        let f = PrimeField::new([2u64, 7, 61, 4_294_967_291][rng.random_range(0..4)]).unwrap();
        let n = rng.random_range(1..6);
        let combos = (0..rng.random_range(1..8))
            .map(|_| {
                let v: Vec<u64> = (0..n).map(|_| rng.random_range(0..f.order())).collect();
                MessageVector::from_values(f, &v)
            })
            .collect();
        let a = lib(Answer::new(combos))?;
        let back = lib(net::encode_answer(&a).and_then(|f| net::decode_answer(&f)))?;
        ensure(back == a, || format!("answer {i} changed in transit"))?;
    }

    let params = lib(ProblemParams::with_default_field(6, 1, 8))?;
    let data = Dataset::random(&params, &mut rng);
    let server = lib(Server::spawn(data.clone(), "127.0.0.1:0"))?;
    let addr = server.local_addr();
    let profile = PopularityProfile::new(case_two()).unwrap();
    let client = lib(Client::new(addr, params, profile.clone()))?;
    let r = lib(DemandRealization::new(6, 1, 0, &[1]))?;
    let side = lib(data.side_info(&[1]))?;
    let mut seen = [false; 2];
    for seed in 0..400 {
        let out = lib(client.fetch(&r, &side, seed))?;
        ensure(&out.value == data.message(0).unwrap(), || {
            format!("seed {seed}: wrong message")
        })?;
        seen[(out.scheme == SchemeKind::Mds) as usize] = true;
        if seen == [true, true] {
            break;
        }
    }
    ensure(seen == [true, true], || {
        "loopback did not exercise both schemes".into()
    })?;

    let workers: Vec<_> = (0..2u64)
        .map(|t| {
            let (data, profile) = (data.clone(), profile.clone());
            thread::spawn(move || -> Outcome {
                let client = lib(Client::new(addr, params, profile))?;
                let mut rng = ChaCha8Rng::seed_from_u64(100 + t);
                for _ in 0..50 {
                    let r = lib(DemandRealization::random(&mut rng, 6, 1))?;
                    let out = lib(client.fetch(&r, &lib(data.side_info(r.side()))?, rng.random()))?;
                    ensure(&out.value == data.message(r.demand()).unwrap(), || {
                        format!("client {t}: wrong message")
                    })?;
                }
                Ok(())
            })
        })
        .collect();
    for w in workers {
        w.join()
            .map_err(|_| "client thread panicked".to_string())??;
    }
    server.shutdown();
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (
            "exact regression for K=6, M=1, lambda=(2,1,1,1,1,1)",
            criterion_1,
        ),
        (
            "privacy oracle, uniform profile, partition-and-code",
            criterion_2,
        ),
        (
            "privacy oracle, RCS on random profiles; partition-and-code fails",
            criterion_3,
        ),
        ("decodability over (6,1), (12,2), (20,3)", criterion_4),
        (
            "Monte-Carlo download and MDS frequency vs exact values",
            criterion_5,
        ),
        ("Zipf sweep trends for M = 1, 2, 3", criterion_6),
        (
            "cross-part selection identity on every partition",
            criterion_7,
        ),
        ("minimizer of the tail ratio is rank K-M", criterion_8),
        ("exhaustive vs restricted base minimization", criterion_9),
        (
            "wire round trips, loopback fetch, concurrent clients",
            criterion_10,
        ),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        match result {
            Ok(()) => println!("criterion {:>2}: PASS  {name} ({})", i + 1, secs(elapsed)),
            Err(e) => {
                failed += 1;
                println!(
                    "criterion {:>2}: FAIL  {name} ({}): {e}",
                    i + 1,
                    secs(elapsed)
                );
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}
