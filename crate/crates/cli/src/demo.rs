//! The K=6, M=1 worked example run end to end, including a loopback round
//! trip through a real server.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use papir_core::analysis::{posterior, privacy_oracle, Policy, QueryEvent, RateReport};
use papir_core::net::{Client, Server};
use papir_core::rational::{exact, pretty, ratio};
use papir_core::{
    Dataset, DemandModel, DemandRealization, PartitionQuery, PopularityProfile, ProblemParams,
    Rational, Result, SchemeKind,
};

use crate::render::Format;

const ROUNDS: u64 = 52;

struct Line {
    key: String,
    label: String,
    value: String,
    ok: bool,
}

impl Line {
    fn exact(key: &str, label: &str, got: Rational, want: Rational) -> Self {
        Self {
            key: key.into(),
            label: label.into(),
            value: match pretty(&got) {
                v if got == want => v,
                v => format!("{v}  MISMATCH, expected {}", exact(&want)),
            },
            ok: got == want,
        }
    }

    fn info(key: &str, label: &str, value: String, ok: bool) -> Self {
        Self {
            key: key.into(),
            label: label.into(),
            value,
            ok,
        }
    }
}

pub fn run(format: Format) -> Result<(String, bool)> {
    let profile = PopularityProfile::from_integers(&[2, 1, 1, 1, 1, 1])?;
    let model = DemandModel::new(profile.clone(), 1)?;
    let mut lines = Vec::new();

    for (w, s, want) in [
        (0, 1, ratio(1, 18)),
        (1, 0, ratio(1, 30)),
        (1, 2, ratio(1, 36)),
    ] {
        lines.push(Line::exact(
            &format!("joint.{w}.{s}"),
            &format!("p(W={w}, S={{{s}}})"),
            model.joint_pmf(w, &[s])?,
            want,
        ));
    }
    for (w, want) in [(0, ratio(5, 18)), (1, ratio(13, 90))] {
        lines.push(Line::exact(
            &format!("prior.{w}"),
            &format!("p(W={w})"),
            model.pmf_demand(w)?,
            want,
        ));
    }
    for (w, s, want) in [
        (0, 1, ratio(25, 26)),
        (1, 0, ratio(5, 6)),
        (2, 3, ratio(1, 1)),
    ] {
        lines.push(Line::exact(
            &format!("gamma.{w}.{s}"),
            &format!("Gamma(W={w}, S={{{s}}})"),
            papir_core::schemes::rcs_gamma(&model, w, &[s])?,
            want,
        ));
    }
    let report = RateReport::compute(&model)?;
    lines.push(Line::exact("rate", "RCS rate", report.r_lb, ratio(13, 40)));
    lines.push(Line::exact(
        "expected_download",
        "expected download",
        report.expected_download_units,
        ratio(40, 13),
    ));

    let q = QueryEvent::Partition(PartitionQuery::new(
        6,
        1,
        vec![vec![0, 1], vec![2, 4], vec![3, 5]],
    )?);
    for (w, want) in [(0, ratio(5, 18)), (1, ratio(13, 90))] {
        let post = posterior(&model, Policy::Rcs, &q, w)?.unwrap_or_default();
        lines.push(Line::exact(
            &format!("posterior.rcs.{w}"),
            &format!("RCS: P(W={w} | Q={q})"),
            post,
            want,
        ));
    }
    let post = posterior(&model, Policy::PurePc, &q, 1)?.unwrap_or_default();
    lines.push(Line::exact(
        "posterior.pc.1",
        &format!("partition-and-code alone: P(W=1 | Q={q})"),
        post,
        ratio(1, 6),
    ));

    for policy in [Policy::Rcs, Policy::PurePc] {
        let v = privacy_oracle(&model, policy)?;
        let want = policy == Policy::Rcs;
        let verdict = if v.passed { "private" } else { "NOT private" };
        lines.push(Line::info(
            &format!("verdict.{policy}"),
            &format!("privacy audit, {policy}"),
            format!(
                "{verdict} ({} violations over {} query values)",
                v.violations.len(),
                v.query_values
            ),
            v.passed == want,
        ));
    }

    lines.push(loopback(&profile)?);

    let ok = lines.iter().all(|l| l.ok);
    let text = match format {
        Format::Kv => lines
            .iter()
            .map(|l| format!("{}={}\n", l.key, l.value))
            .collect(),
        Format::Csv => {
            let mut out = String::from("key,value,ok\n");
            for l in &lines {
                out.push_str(&format!("{},\"{}\",{}\n", l.key, l.value, l.ok));
            }
            out
        }
        Format::Human => {
            let width = lines.iter().map(|l| l.label.len()).max().unwrap_or(0);
            let mut out = String::from("K=6, M=1, popularity (2,1,1,1,1,1)\n\n");
            for l in &lines {
                out.push_str(&format!("{:<width$}  {}\n", l.label, l.value));
            }
            out.push_str(if ok {
                "\nall values as expected\n"
            } else {
                "\nsome values differ\n"
            });
            out
        }
    };
    Ok((text, ok))
}

/// Retrieves message 0 with side information {1} over loopback, once per seed.
fn loopback(profile: &PopularityProfile) -> Result<Line> {
    let params = ProblemParams::with_default_field(6, 1, 4)?;
    let data = Dataset::random(&params, &mut ChaCha8Rng::seed_from_u64(6));
    let server = Server::spawn(data.clone(), "127.0.0.1:0")?;
    let client = Client::new(server.local_addr(), params, profile.clone())?;
    let realization = DemandRealization::new(6, 1, 0, &[1])?;
    let side = data.side_info(&[1])?;
    let (mut correct, mut mds, mut bytes) = (0, 0, 0);
    for seed in 0..ROUNDS {
        let out = client.fetch(&realization, &side, seed)?;
        correct += (Some(&out.value) == data.message(0)) as u64;
        mds += (out.scheme == SchemeKind::Mds) as u64;
        bytes += out.download_bytes;
    }
    server.shutdown();
    Ok(Line::info(
        "loopback",
        "loopback retrieval of W=0, S={1}",
        format!(
            "{correct}/{ROUNDS} decoded, {mds} via MDS, {:.1} bytes downloaded per round",
            bytes as f64 / ROUNDS as f64
        ),
        correct == ROUNDS,
    ))
}
