//! Query construction, server answering, and client decoding.
//!
//! Two retrieval schemes are combined by the randomized code selection
//! (RCS) layer:
//!
//! * **Partition-and-code** splits the K message ids into N = K/(M+1) parts
//!   of size M+1, one of which is W ∪ S. The server returns the sum of each
//!   part and the client subtracts its side information.
//! * **MDS** asks for K-M Vandermonde combinations that do not depend on
//!   the demand at all; the client removes its side information and solves
//!   for every unknown message.
//!
//! RCS picks partition-and-code with a demand-dependent probability chosen
//! so that the distribution of the query reveals nothing about W.
//!
//! Scheme-level indices are caller message ids (dataset positions). Only
//! the RCS probabilities are computed on popularity ranks.

mod mds;
mod partition;
mod rcs;

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{MessageVector, PrimeField};
use crate::pmf::ProblemParams;

pub use mds::{mds_answer, mds_build_query, mds_decode, MdsQuery};
pub use partition::{pc_answer, pc_build_query, pc_decode, PartitionPlan, PartitionQuery};
pub use rcs::{
    bernoulli, rcs_gamma, rcs_gamma_base, rcs_plan, rcs_round, RcsPlan, RcsPolicy, RcsSelector,
    RoundOutcome,
};

/// Side information held by the client, keyed by message id.
pub type SideInfo = BTreeMap<usize, MessageVector>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    PartitionAndCode,
    Mds,
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeKind::PartitionAndCode => "partition-and-code",
            SchemeKind::Mds => "mds",
        })
    }
}

/// What the client sends to the server.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Query {
    Partition(PartitionQuery),
    Mds(MdsQuery),
}

impl Query {
    pub fn kind(&self) -> SchemeKind {
        match self {
            Query::Partition(_) => SchemeKind::PartitionAndCode,
            Query::Mds(_) => SchemeKind::Mds,
        }
    }

    pub fn k(&self) -> usize {
        match self {
            Query::Partition(q) => q.k(),
            Query::Mds(q) => q.k(),
        }
    }

    pub fn m(&self) -> usize {
        match self {
            Query::Partition(q) => q.m(),
            Query::Mds(q) => q.m(),
        }
    }

    /// Number of coded combinations the answer must carry.
    pub fn answer_len(&self) -> usize {
        match self {
            Query::Partition(q) => q.parts().len(),
            Query::Mds(q) => q.rows(),
        }
    }

    /// Server side: the answer is a deterministic function of the query and
    /// the dataset.
    pub fn answer(&self, data: &Dataset) -> Result<Answer> {
        match self {
            Query::Partition(q) => pc_answer(q, data),
            Query::Mds(q) => mds_answer(q, data),
        }
    }
}

/// Coded combinations returned by the server.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Answer {
    combos: Vec<MessageVector>,
}

impl Answer {
    pub fn new(combos: Vec<MessageVector>) -> Result<Self> {
        if let Some(first) = combos.first() {
            if combos
                .iter()
                .any(|c| c.field() != first.field() || c.len() != first.len())
            {
                return Err(Error::usage(
                    "answer combinations differ in field or length",
                ));
            }
        }
        Ok(Self { combos })
    }

    pub fn combos(&self) -> &[MessageVector] {
        &self.combos
    }

    pub fn len(&self) -> usize {
        self.combos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.combos.is_empty()
    }

    fn expect_len(&self, want: usize) -> Result<()> {
        if self.combos.len() != want {
            return Err(Error::usage(format!(
                "answer carries {} combinations, query needs {want}",
                self.combos.len()
            )));
        }
        Ok(())
    }
}

/// The K messages held by the server.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    field: PrimeField,
    n: usize,
    messages: Vec<MessageVector>,
}

impl Dataset {
    pub fn new(field: PrimeField, messages: Vec<MessageVector>) -> Result<Self> {
        let n = messages.first().map_or(0, MessageVector::len);
        if messages.is_empty() || n == 0 {
            return Err(Error::usage("dataset needs at least one non-empty message"));
        }
        if messages.iter().any(|v| v.len() != n || v.field() != field) {
            return Err(Error::usage("dataset messages differ in length or field"));
        }
        Ok(Self { field, n, messages })
    }

    /// Uniformly random messages matching `params`.
    pub fn random(params: &ProblemParams, rng: &mut impl Rng) -> Self {
        let f = params.field();
        let messages = (0..params.k())
            .map(|_| {
                let vals: Vec<u64> = (0..params.n())
                    .map(|_| rng.random_range(0..f.order()))
                    .collect();
                MessageVector::from_values(f, &vals)
            })
            .collect();
        Self {
            field: f,
            n: params.n(),
            messages,
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn k(&self) -> usize {
        self.messages.len()
    }

    /// Message length in field symbols.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn messages(&self) -> &[MessageVector] {
        &self.messages
    }

    pub fn message(&self, id: usize) -> Option<&MessageVector> {
        self.messages.get(id)
    }

    /// Copies out the messages at `ids`, as a client's side information.
    pub fn side_info(&self, ids: &[usize]) -> Result<SideInfo> {
        ids.iter()
            .map(|&i| {
                self.message(i)
                    .cloned()
                    .map(|v| (i, v))
                    .ok_or_else(|| Error::usage(format!("message {i} not in dataset")))
            })
            .collect()
    }
}

fn side_vector(side_info: &SideInfo, id: usize) -> Result<&MessageVector> {
    side_info
        .get(&id)
        .ok_or_else(|| Error::usage(format!("side information for message {id} is missing")))
}
