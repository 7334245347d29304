//! Prime-field arithmetic over GF(q) and Gaussian elimination on coded
//! message vectors.
//!
//! Elements carry their modulus so that mixing values from two different
//! fields is caught at the call site instead of silently producing garbage.

use std::fmt;

use crate::error::{Error, Result};

/// A prime field GF(q) with q < 2^64.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    q: u64,
}

/// A canonical element of some GF(q): `value < modulus` always.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    value: u64,
    modulus: u64,
}

impl FieldElement {
    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Deterministic Miller-Rabin; the witness set below is exact for all u64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    'witness: for a in SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

impl PrimeField {
    pub fn new(q: u64) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::config(format!("field order {q} is not prime")));
        }
        Ok(Self { q })
    }

    /// Smallest prime field with at least `k` elements (and at least 2).
    pub fn smallest_at_least(k: u64) -> Result<Self> {
        let mut q = k.max(2);
        while !is_prime(q) {
            q = q
                .checked_add(1)
                .ok_or_else(|| Error::config(format!("no 64-bit prime at or above {k}")))?;
        }
        Ok(Self { q })
    }

    pub fn order(&self) -> u64 {
        self.q
    }

    /// Reduces `v` mod q.
    pub fn element(&self, v: u64) -> FieldElement {
        FieldElement {
            value: v % self.q,
            modulus: self.q,
        }
    }

    /// Wraps `v` only if it is already canonical.
    pub fn canonical(&self, v: u64) -> Result<FieldElement> {
        if v >= self.q {
            return Err(Error::usage(format!(
                "{v} is not a canonical element of GF({})",
                self.q
            )));
        }
        Ok(FieldElement {
            value: v,
            modulus: self.q,
        })
    }

    pub fn zero(&self) -> FieldElement {
        self.element(0)
    }

    pub fn one(&self) -> FieldElement {
        self.element(1)
    }

    fn check(&self, a: FieldElement) -> Result<()> {
        if a.modulus != self.q {
            return Err(Error::ModulusMismatch(self.q, a.modulus));
        }
        Ok(())
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.add_unchecked(a, b))
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.sub_unchecked(a, b))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul_unchecked(a, b))
    }

    pub fn neg(&self, a: FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        Ok(self.sub_unchecked(self.zero(), a))
    }

    /// Multiplicative inverse via Fermat: a^(q-2).
    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        if a.value == 0 {
            return Err(Error::DivisionByZero(self.q));
        }
        Ok(self.pow(a, self.q - 2))
    }

    pub fn pow(&self, a: FieldElement, exp: u64) -> FieldElement {
        FieldElement {
            value: pow_mod(a.value, exp, self.q),
            modulus: self.q,
        }
    }

    // The unchecked forms are for hot loops where every operand provably
    // came from this field.
    pub(crate) fn add_unchecked(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let s = a.value as u128 + b.value as u128;
        FieldElement {
            value: (s % self.q as u128) as u64,
            modulus: self.q,
        }
    }

    pub(crate) fn sub_unchecked(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let v = if a.value >= b.value {
            a.value - b.value
        } else {
            self.q - (b.value - a.value)
        };
        FieldElement {
            value: v,
            modulus: self.q,
        }
    }

    pub(crate) fn mul_unchecked(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement {
            value: mul_mod(a.value, b.value, self.q),
            modulus: self.q,
        }
    }
}

impl fmt::Display for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.q)
    }
}

/// One message (or one coded combination): n coordinates over GF(q).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MessageVector {
    field: PrimeField,
    coords: Vec<FieldElement>,
}

impl MessageVector {
    pub fn zeros(field: PrimeField, n: usize) -> Self {
        Self {
            field,
            coords: vec![field.zero(); n],
        }
    }

    /// Builds a vector from raw values, reducing each mod q.
    pub fn from_values(field: PrimeField, values: &[u64]) -> Self {
        Self {
            field,
            coords: values.iter().map(|&v| field.element(v)).collect(),
        }
    }

    pub fn from_elements(field: PrimeField, coords: Vec<FieldElement>) -> Result<Self> {
        for c in &coords {
            field.check(*c)?;
        }
        Ok(Self { field, coords })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[FieldElement] {
        &self.coords
    }

    pub fn values(&self) -> Vec<u64> {
        self.coords.iter().map(|c| c.value).collect()
    }

    fn check_compatible(&self, other: &MessageVector) -> Result<()> {
        if self.field != other.field {
            return Err(Error::ModulusMismatch(self.field.q, other.field.q));
        }
        if self.len() != other.len() {
            return Err(Error::usage(format!(
                "message length mismatch: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        Ok(())
    }

    /// `self += coeff * other`, coordinate-wise.
    pub fn add_scaled(&mut self, coeff: FieldElement, other: &MessageVector) -> Result<()> {
        self.check_compatible(other)?;
        self.field.check(coeff)?;
        let f = self.field;
        for (a, b) in self.coords.iter_mut().zip(&other.coords) {
            *a = f.add_unchecked(*a, f.mul_unchecked(coeff, *b));
        }
        Ok(())
    }

    pub fn add_assign(&mut self, other: &MessageVector) -> Result<()> {
        self.add_scaled(self.field.one(), other)
    }

    pub fn sub_assign(&mut self, other: &MessageVector) -> Result<()> {
        let minus_one = self.field.element(self.field.q - 1);
        self.add_scaled(minus_one, other)
    }

    pub fn scale(&mut self, coeff: FieldElement) -> Result<()> {
        self.field.check(coeff)?;
        let f = self.field;
        for a in &mut self.coords {
            *a = f.mul_unchecked(*a, coeff);
        }
        Ok(())
    }
}

/// Solves `A x = b` where each entry of `b` (and of `x`) is a message vector;
/// the n coordinates are independent right-hand sides sharing one coefficient
/// matrix.
///
/// Pivoting takes the first nonzero entry at or below the diagonal, so the
/// elimination order is fully deterministic.
pub fn solve_square_system(
    field: PrimeField,
    matrix: &[Vec<FieldElement>],
    rhs: &[MessageVector],
) -> Result<Vec<MessageVector>> {
    let m = matrix.len();
    if rhs.len() != m {
        return Err(Error::usage(format!(
            "system has {m} rows but {} right-hand sides",
            rhs.len()
        )));
    }
    let mut a: Vec<Vec<FieldElement>> = Vec::with_capacity(m);
    for row in matrix {
        if row.len() != m {
            return Err(Error::usage(format!(
                "matrix is not square: row of length {} in a {m}-row system",
                row.len()
            )));
        }
        for c in row {
            field.check(*c)?;
        }
        a.push(row.clone());
    }
    let n = rhs.first().map_or(0, MessageVector::len);
    let mut b = Vec::with_capacity(m);
    for v in rhs {
        if v.field != field {
            return Err(Error::ModulusMismatch(field.q, v.field.q));
        }
        if v.len() != n {
            return Err(Error::usage("right-hand sides differ in length"));
        }
        b.push(v.clone());
    }

    for col in 0..m {
        let pivot = (col..m)
            .find(|&r| !a[r][col].is_zero())
            .ok_or(Error::RankDeficient { column: col })?;
        a.swap(col, pivot);
        b.swap(col, pivot);

        let inv = field.inv(a[col][col])?;
        for x in &mut a[col][col..] {
            *x = field.mul_unchecked(*x, inv);
        }
        b[col].scale(inv)?;

        let (pivot_rows, rest) = a.split_at_mut(col + 1);
        let pivot_row = &pivot_rows[col];
        let (b_head, b_rest) = b.split_at_mut(col + 1);
        let pivot_rhs = &b_head[col];
        for (row, rhs_row) in rest.iter_mut().zip(b_rest.iter_mut()) {
            let factor = row[col];
            if factor.is_zero() {
                continue;
            }
            let neg = field.sub_unchecked(field.zero(), factor);
            for c in col..m {
                row[c] = field.add_unchecked(row[c], field.mul_unchecked(neg, pivot_row[c]));
            }
            rhs_row.add_scaled(neg, pivot_rhs)?;
        }
    }

    // back substitution on the unit upper-triangular system
    for col in (0..m).rev() {
        let (head, tail) = b.split_at_mut(col);
        let solved = &tail[0];
        for (r, rhs_row) in head.iter_mut().enumerate() {
            let factor = a[r][col];
            if !factor.is_zero() {
                rhs_row.add_scaled(field.sub_unchecked(field.zero(), factor), solved)?;
            }
        }
    }
    Ok(b)
}

/// Multiplies `matrix` by a column of message vectors.
pub fn apply_matrix(
    field: PrimeField,
    matrix: &[Vec<FieldElement>],
    x: &[MessageVector],
) -> Result<Vec<MessageVector>> {
    let n = x.first().map_or(0, MessageVector::len);
    matrix
        .iter()
        .map(|row| {
            if row.len() != x.len() {
                return Err(Error::usage("matrix width does not match vector count"));
            }
            let mut acc = MessageVector::zeros(field, n);
            for (c, v) in row.iter().zip(x) {
                acc.add_scaled(*c, v)?;
            }
            Ok(acc)
        })
        .collect()
}

/// Square Vandermonde matrix with row j = [p_1^j, ..., p_m^j].
pub fn vandermonde(field: PrimeField, points: &[FieldElement]) -> Vec<Vec<FieldElement>> {
    (0..points.len() as u64)
        .map(|j| points.iter().map(|&p| field.pow(p, j)).collect())
        .collect()
}
