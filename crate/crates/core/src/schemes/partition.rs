//! Partition-and-code (Scheme I).

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{side_vector, Answer, Dataset, SideInfo};
use crate::error::{Error, Result};
use crate::field::MessageVector;
use crate::pmf::{DemandRealization, ProblemParams};

/// A partition of the message ids into equal parts of size M+1, kept in
/// canonical form: ids ascending within a part, parts ordered by their
/// smallest id. Equal set-partitions therefore compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartitionQuery {
    k: usize,
    m: usize,
    parts: Vec<Vec<usize>>,
}

impl PartitionQuery {
    /// Validates and canonicalizes `parts`.
    pub fn new(k: usize, m: usize, mut parts: Vec<Vec<usize>>) -> Result<Self> {
        let block = m + 1;
        if m == 0 || !k.is_multiple_of(block) {
            return Err(Error::config(format!(
                "cannot split K={k} into parts of size {block}"
            )));
        }
        if parts.len() != k / block {
            return Err(Error::usage(format!(
                "expected {} parts, got {}",
                k / block,
                parts.len()
            )));
        }
        let mut seen = vec![false; k];
        for part in &mut parts {
            if part.len() != block {
                return Err(Error::usage(format!(
                    "part of size {} (need {block})",
                    part.len()
                )));
            }
            part.sort_unstable();
            for &i in part.iter() {
                if i >= k || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::usage(format!(
                        "index {i} is out of range or repeated"
                    )));
                }
            }
        }
        parts.sort_unstable_by_key(|p| p[0]);
        Ok(Self { k, m, parts })
    }

    pub(crate) fn from_canonical(k: usize, m: usize, parts: Vec<Vec<usize>>) -> Self {
        debug_assert!(Self::new(k, m, parts.clone())
            .map(|q| q.parts == parts)
            .unwrap_or(false));
        Self { k, m, parts }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    /// Position of the part holding message `id`.
    pub fn part_of(&self, id: usize) -> Option<usize> {
        self.parts.iter().position(|p| p.contains(&id))
    }
}

impl fmt::Display for PartitionQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (j, part) in self.parts.iter().enumerate() {
            if j > 0 {
                f.write_str(",")?;
            }
            f.write_str("{")?;
            for (t, i) in part.iter().enumerate() {
                if t > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{i}")?;
            }
            f.write_str("}")?;
        }
        f.write_str("}")
    }
}

/// Output of query construction: the canonical query plus what the client
/// keeps private.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionPlan {
    pub query: PartitionQuery,
    /// The uniformly drawn slot j* that W ∪ S was placed in before
    /// canonicalization.
    pub drawn_slot: usize,
    /// Position of W ∪ S among the canonical parts; selects the combination
    /// to decode from.
    pub demand_part: usize,
}

/// Places W ∪ S in a uniformly random slot and splits the other K-(M+1)
/// ids uniformly at random into the remaining parts.
pub fn pc_build_query(
    params: &ProblemParams,
    realization: &DemandRealization,
    rng: &mut impl Rng,
) -> Result<PartitionPlan> {
    params.require_rcs()?;
    check_realization(params, realization)?;
    let block = params.m() + 1;
    let n_parts = params.parts();

    let support = realization.support();
    let mut rest: Vec<usize> = (0..params.k()).filter(|i| !support.contains(i)).collect();
    rest.shuffle(rng);
    let drawn_slot = rng.random_range(0..n_parts);

    let mut parts: Vec<Vec<usize>> = rest.chunks(block).map(<[usize]>::to_vec).collect();
    parts.insert(drawn_slot, support);
    let query = PartitionQuery::new(params.k(), params.m(), parts)?;
    let demand_part = query
        .part_of(realization.demand())
        .expect("demand id is in the partition");
    Ok(PartitionPlan {
        query,
        drawn_slot,
        demand_part,
    })
}

pub(super) fn check_realization(params: &ProblemParams, r: &DemandRealization) -> Result<()> {
    DemandRealization::new(params.k(), params.m(), r.demand(), r.side()).map(|_| ())
}

/// Server side: one GF(q) sum per part.
pub fn pc_answer(query: &PartitionQuery, data: &Dataset) -> Result<Answer> {
    if query.k() != data.k() {
        return Err(Error::usage(format!(
            "query covers K={} messages, dataset holds {}",
            query.k(),
            data.k()
        )));
    }
    let combos = query
        .parts()
        .iter()
        .map(|part| {
            let mut acc = MessageVector::zeros(data.field(), data.n());
            for &i in part {
                acc.add_assign(&data.messages()[i])?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    Answer::new(combos)
}

/// Recovers X_W = A_{j*} - sum of the side-information messages.
pub fn pc_decode(
    answer: &Answer,
    demand_part: usize,
    side: &[usize],
    side_info: &SideInfo,
) -> Result<MessageVector> {
    let mut out = answer.combos().get(demand_part).cloned().ok_or_else(|| {
        Error::usage(format!(
            "answer has {} combinations, no part {demand_part}",
            answer.len()
        ))
    })?;
    for &i in side {
        out.sub_assign(side_vector(side_info, i)?)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::collections::{BTreeMap, BTreeSet};

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::field::PrimeField;

    fn params(k: usize, m: usize) -> ProblemParams {
        ProblemParams::with_default_field(k, m, 1).unwrap()
    }

    #[test]
    fn canonical_form_is_order_independent() {
        let a = PartitionQuery::new(6, 1, vec![vec![5, 3], vec![1, 0], vec![4, 2]]).unwrap();
        let b = PartitionQuery::new(6, 1, vec![vec![0, 1], vec![2, 4], vec![3, 5]]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "{{0,1},{2,4},{3,5}}");
        assert_eq!(a.part_of(4), Some(1));
    }

    #[test]
    fn malformed_partitions_rejected() {
        assert!(PartitionQuery::new(6, 1, vec![vec![0, 1], vec![2, 3]]).is_err());
        assert!(PartitionQuery::new(6, 1, vec![vec![0, 1], vec![1, 3], vec![4, 5]]).is_err());
        assert!(PartitionQuery::new(6, 1, vec![vec![0, 1, 2], vec![3], vec![4, 5]]).is_err());
        assert!(PartitionQuery::new(6, 1, vec![vec![0, 1], vec![2, 3], vec![4, 6]]).is_err());
        assert!(PartitionQuery::new(7, 1, vec![]).is_err());
    }

    #[test]
    fn motivating_case_reaches_exactly_three_partitions() {
        let p = params(6, 1);
        let r = DemandRealization::new(6, 1, 0, &[1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut seen = BTreeSet::new();
        for _ in 0..300 {
            let plan = pc_build_query(&p, &r, &mut rng).unwrap();
            assert_eq!(plan.query.parts()[plan.demand_part], vec![0, 1]);
            seen.insert(plan.query);
        }
        assert_eq!(seen.len(), 3);
    }

    #[test]
    fn twelve_messages_two_side() {
        let p = params(12, 2);
        let r = DemandRealization::new(12, 2, 7, &[3, 10]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let plan = pc_build_query(&p, &r, &mut rng).unwrap();
            assert_eq!(plan.query.parts().len(), 4);
            assert!(plan.query.parts().iter().all(|part| part.len() == 3));
            assert!(plan.query.parts().contains(&vec![3, 7, 10]));
        }
    }

    #[test]
    fn degenerate_shapes_rejected() {
        // N = 1 (K = M + 1) and (M+1)^2 >= K
        let r = DemandRealization::new(2, 1, 0, &[1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(pc_build_query(&params(2, 1), &r, &mut rng).is_err());
        let r = DemandRealization::new(4, 1, 0, &[1]).unwrap();
        assert!(pc_build_query(&params(4, 1), &r, &mut rng).is_err());
        let r = DemandRealization::new(7, 1, 0, &[1]).unwrap();
        assert!(pc_build_query(&params(7, 1), &r, &mut rng).is_err());
    }

    #[test]
    fn answer_and_decode_small_example() {
        let f = PrimeField::new(7).unwrap();
        let values = [5u64, 4, 1, 2, 3, 6];
        let data = Dataset::new(
            f,
            values
                .iter()
                .map(|&v| MessageVector::from_values(f, &[v]))
                .collect(),
        )
        .unwrap();
        let q = PartitionQuery::new(6, 1, vec![vec![0, 1], vec![2, 4], vec![3, 5]]).unwrap();
        let a = pc_answer(&q, &data).unwrap();
        assert_eq!(a.combos()[0].values(), vec![2]);
        let side = data.side_info(&[1]).unwrap();
        assert_eq!(pc_decode(&a, 0, &[1], &side).unwrap().values(), vec![5]);
        // missing side information
        assert!(pc_decode(&a, 0, &[2], &side).is_err());
    }

    #[test]
    fn zero_dataset_gives_zero_answer() {
        let p = ProblemParams::with_default_field(6, 1, 3).unwrap();
        let data = Dataset::new(p.field(), vec![MessageVector::zeros(p.field(), 3); 6]).unwrap();
        let q = PartitionQuery::new(6, 1, vec![vec![0, 1], vec![2, 4], vec![3, 5]]).unwrap();
        let a = pc_answer(&q, &data).unwrap();
        assert!(a.combos().iter().all(|c| c.values() == vec![0, 0, 0]));
        // with nothing to subtract the combination passes through
        assert_eq!(
            pc_decode(&a, 1, &[], &BTreeMap::new()).unwrap(),
            a.combos()[1]
        );
    }

    #[test]
    fn random_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (k, m) in [(6, 1), (12, 2), (20, 3), (30, 2)] {
            let p = ProblemParams::with_default_field(k, m, 4).unwrap();
            for _ in 0..25 {
                let data = Dataset::random(&p, &mut rng);
                let mut ids: Vec<usize> = (0..k).collect();
                ids.shuffle(&mut rng);
                let r = DemandRealization::new(k, m, ids[0], &ids[1..=m]).unwrap();
                let plan = pc_build_query(&p, &r, &mut rng).unwrap();
                let a = pc_answer(&plan.query, &data).unwrap();
                let side = data.side_info(r.side()).unwrap();
                let x = pc_decode(&a, plan.demand_part, r.side(), &side).unwrap();
                assert_eq!(&x, data.message(r.demand()).unwrap());
            }
        }
    }

    #[test]
    fn leftover_arrangement_and_slot_are_uniform() {
        // 30 000 draws for K=6, M=1: each of the 3 partitions and each of
        // the 3 slots should appear with frequency 1/3 (3 sigma band)
        let p = params(6, 1);
        let r = DemandRealization::new(6, 1, 0, &[1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let draws = 30_000;
        let mut by_query: BTreeMap<PartitionQuery, usize> = BTreeMap::new();
        let mut by_slot = [0usize; 3];
        for _ in 0..draws {
            let plan = pc_build_query(&p, &r, &mut rng).unwrap();
            *by_query.entry(plan.query).or_default() += 1;
            by_slot[plan.drawn_slot] += 1;
        }
        let sigma = (draws as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        let expect = draws as f64 / 3.0;
        assert_eq!(by_query.len(), 3);
        for c in by_query.values().chain(by_slot.iter()) {
            assert!((*c as f64 - expect).abs() < 3.0 * sigma, "{c} vs {expect}");
        }
    }
}
