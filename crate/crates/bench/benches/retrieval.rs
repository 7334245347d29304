use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use papir_bench::{skewed_six, zipf_model};
use papir_core::analysis::{privacy_oracle, rate_lower_bound, rate_lower_bound_f64, Policy};
use papir_core::schemes::{
    mds_answer, mds_build_query, mds_decode, pc_answer, pc_build_query, pc_decode,
};
use papir_core::{Dataset, DemandRealization, ProblemParams};

fn demand_marginals(c: &mut Criterion) {
    let mut group = c.benchmark_group("pmf_demand");
    for (k, m) in [(12, 2), (30, 2), (60, 3)] {
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("K{k}_M{m}")),
            &(k, m),
            |b, &(k, m)| {
                // a fresh model each iteration so the marginal cache starts cold
                b.iter_batched(
                    || zipf_model(k, m, 7),
                    |model| black_box(model.pmf_demand(k - m - 1).unwrap()),
                    criterion::BatchSize::SmallInput,
                )
            },
        );
    }
    group.finish();
}

fn rates(c: &mut Criterion) {
    let model = zipf_model(42, 2, 3);
    c.bench_function("rate_lower_bound/exact_K42_M2", |b| {
        b.iter_batched(
            || zipf_model(42, 2, 3),
            |m| black_box(rate_lower_bound(&m).unwrap()),
            criterion::BatchSize::SmallInput,
        )
    });
    c.bench_function("rate_lower_bound/float_K42_M2", |b| {
        b.iter(|| black_box(rate_lower_bound_f64(&model).unwrap()))
    });
}

fn oracle(c: &mut Criterion) {
    let model = skewed_six();
    let mut group = c.benchmark_group("privacy_oracle_K6_M1");
    group.sample_size(20);
    for policy in [Policy::PurePc, Policy::Rcs] {
        group.bench_function(policy.to_string(), |b| {
            b.iter(|| black_box(privacy_oracle(&model, policy).unwrap()))
        });
    }
    group.finish();
}

fn schemes(c: &mut Criterion) {
    let params = ProblemParams::with_default_field(60, 3, 256).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let data = Dataset::random(&params, &mut rng);
    let r = DemandRealization::new(60, 3, 17, &[2, 30, 59]).unwrap();
    let side = data.side_info(r.side()).unwrap();

    let plan = pc_build_query(&params, &r, &mut rng).unwrap();
    c.bench_function("partition/answer_K60_n256", |b| {
        b.iter(|| black_box(pc_answer(&plan.query, &data).unwrap()))
    });
    let answer = pc_answer(&plan.query, &data).unwrap();
    c.bench_function("partition/decode_K60_n256", |b| {
        b.iter(|| black_box(pc_decode(&answer, plan.demand_part, r.side(), &side).unwrap()))
    });

    let query = mds_build_query(&params).unwrap();
    c.bench_function("mds/answer_K60_n256", |b| {
        b.iter(|| black_box(mds_answer(&query, &data).unwrap()))
    });
    let answer = mds_answer(&query, &data).unwrap();
    c.bench_function("mds/decode_K60_n256", |b| {
        b.iter(|| black_box(mds_decode(&answer, &query, &r, &side).unwrap()))
    });
}

criterion_group!(benches, demand_marginals, rates, oracle, schemes);
criterion_main!(benches);
