//! MDS code (Scheme II): K-M Vandermonde combinations, independent of the
//! demand.

use super::{side_vector, Answer, Dataset, SideInfo};
use crate::error::{Error, Result};
use crate::field::{solve_square_system, FieldElement, MessageVector, PrimeField};
use crate::pmf::{DemandRealization, ProblemParams};

/// Evaluation points omega_1..omega_K; row j of the query (j = 0..K-M) is
/// [omega_1^j, ..., omega_K^j].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MdsQuery {
    field: PrimeField,
    m: usize,
    omegas: Vec<FieldElement>,
}

impl MdsQuery {
    pub fn new(field: PrimeField, m: usize, omegas: Vec<FieldElement>) -> Result<Self> {
        let k = omegas.len();
        if m == 0 || m >= k {
            return Err(Error::config(format!("need 1 <= M < K, got K={k}, M={m}")));
        }
        let mut sorted = Vec::with_capacity(k);
        for w in &omegas {
            if w.modulus() != field.order() {
                return Err(Error::ModulusMismatch(field.order(), w.modulus()));
            }
            sorted.push(w.value());
        }
        sorted.sort_unstable();
        if sorted.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::usage("evaluation points must be distinct"));
        }
        Ok(Self { field, m, omegas })
    }

    /// The default points omega_i = i for i = 0..K-1.
    pub fn standard(field: PrimeField, k: usize, m: usize) -> Result<Self> {
        if field.order() < k as u64 {
            return Err(Error::config(format!(
                "GF({}) has fewer than K={k} distinct elements",
                field.order()
            )));
        }
        Self::new(field, m, (0..k as u64).map(|i| field.element(i)).collect())
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn k(&self) -> usize {
        self.omegas.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn rows(&self) -> usize {
        self.k() - self.m
    }

    pub fn omegas(&self) -> &[FieldElement] {
        &self.omegas
    }

    fn coefficient(&self, row: usize, id: usize) -> FieldElement {
        self.field.pow(self.omegas[id], row as u64)
    }
}

/// The query is fixed by (K, M, q) alone; W and S play no part.
pub fn mds_build_query(params: &ProblemParams) -> Result<MdsQuery> {
    MdsQuery::standard(params.field(), params.k(), params.m())
}

pub fn mds_answer(query: &MdsQuery, data: &Dataset) -> Result<Answer> {
    if query.k() != data.k() {
        return Err(Error::usage(format!(
            "query covers K={} messages, dataset holds {}",
            query.k(),
            data.k()
        )));
    }
    if query.field() != data.field() {
        return Err(Error::ModulusMismatch(
            query.field().order(),
            data.field().order(),
        ));
    }
    let combos = (0..query.rows())
        .map(|j| {
            let mut acc = MessageVector::zeros(data.field(), data.n());
            for (i, x) in data.messages().iter().enumerate() {
                acc.add_scaled(query.coefficient(j, i), x)?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    Answer::new(combos)
}

/// Strips the side information from every combination and solves the
/// (K-M)x(K-M) system for all unknown messages, returning X_W.
pub fn mds_decode(
    answer: &Answer,
    query: &MdsQuery,
    realization: &DemandRealization,
    side_info: &SideInfo,
) -> Result<MessageVector> {
    answer.expect_len(query.rows())?;
    let k = query.k();
    DemandRealization::new(k, query.m(), realization.demand(), realization.side())?;
    let field = query.field();

    let mut rhs: Vec<MessageVector> = answer.combos().to_vec();
    for &s in realization.side() {
        let xs = side_vector(side_info, s)?;
        for (j, row) in rhs.iter_mut().enumerate() {
            let c = field.neg(query.coefficient(j, s))?;
            row.add_scaled(c, xs)?;
        }
    }

    let unknowns: Vec<usize> = (0..k).filter(|i| !realization.side().contains(i)).collect();
    let matrix: Vec<Vec<FieldElement>> = (0..query.rows())
        .map(|j| unknowns.iter().map(|&u| query.coefficient(j, u)).collect())
        .collect();
    let solved = solve_square_system(field, &matrix, &rhs).map_err(|e| match e {
        Error::RankDeficient { .. } => Error::Internal(format!(
            "MDS system is singular ({e}); evaluation points are corrupt"
        )),
        other => other,
    })?;
    let pos = unknowns
        .iter()
        .position(|&u| u == realization.demand())
        .expect("demand is not side information");
    Ok(solved
        .into_iter()
        .nth(pos)
        .expect("one solution per unknown"))
}
