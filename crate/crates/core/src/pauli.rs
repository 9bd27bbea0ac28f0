//! Exact algebra of the four sigma indices.
//!
//! Every product of two sigma matrices is a single sigma matrix times a
//! fourth root of unity, so products are tracked as `(Unit, SigmaIndex)`
//! pairs with no floating point involved.

use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index `j` of the sigma matrix `σ_j`, `j ∈ {0,1,2,3}` with `σ_0 = I₂`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct SigmaIndex(u8);

impl SigmaIndex {
    pub const S0: SigmaIndex = SigmaIndex(0);
    pub const S1: SigmaIndex = SigmaIndex(1);
    pub const S2: SigmaIndex = SigmaIndex(2);
    pub const S3: SigmaIndex = SigmaIndex(3);

    pub const ALL: [SigmaIndex; 4] = [Self::S0, Self::S1, Self::S2, Self::S3];
    pub const SPATIAL: [SigmaIndex; 3] = [Self::S1, Self::S2, Self::S3];

    pub fn new(j: u8) -> Result<Self> {
        if j < 4 {
            Ok(SigmaIndex(j))
        } else {
            Err(Error::Domain(format!("sigma index {j} is not in 0..=3")))
        }
    }

    #[inline]
    pub fn get(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn is_identity(self) -> bool {
        self.0 == 0
    }
}

impl TryFrom<u8> for SigmaIndex {
    type Error = Error;
    fn try_from(j: u8) -> Result<Self> {
        SigmaIndex::new(j)
    }
}

impl From<SigmaIndex> for u8 {
    fn from(j: SigmaIndex) -> u8 {
        j.0
    }
}

impl fmt::Display for SigmaIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A fourth root of unity `i^k`, stored as `k mod 4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Unit(u8);

impl Unit {
    pub const ONE: Unit = Unit(0);
    pub const I: Unit = Unit(1);
    pub const MINUS_ONE: Unit = Unit(2);
    pub const MINUS_I: Unit = Unit(3);

    pub fn from_exponent(k: i64) -> Unit {
        Unit(k.rem_euclid(4) as u8)
    }

    /// Exponent `k` in `i^k`, in `0..4`.
    #[inline]
    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn inverse(self) -> Unit {
        Unit((4 - self.0) % 4)
    }

    /// Phase index of this unit in units of `2π/q`; exact because `4 | q`.
    pub fn phase_index(self, q: u32) -> u32 {
        debug_assert!(q.is_multiple_of(4));
        (q / 4) * self.0 as u32
    }
}

impl Mul for Unit {
    type Output = Unit;
    fn mul(self, rhs: Unit) -> Unit {
        Unit((self.0 + rhs.0) % 4)
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            0 => "1",
            1 => "i",
            2 => "-1",
            _ => "-i",
        })
    }
}

/// Levi-Civita symbol `ε_klm` for spatial indices; zero whenever an index is
/// repeated or equal to 0.
pub fn levi_civita(k: SigmaIndex, l: SigmaIndex, m: SigmaIndex) -> i8 {
    match (k.0, l.0, m.0) {
        (1, 2, 3) | (2, 3, 1) | (3, 1, 2) => 1,
        (3, 2, 1) | (1, 3, 2) | (2, 1, 3) => -1,
        _ => 0,
    }
}

/// The spatial index completing `{k, l}` to `{1, 2, 3}`; `k ≠ l`, both spatial.
pub fn third_index(k: SigmaIndex, l: SigmaIndex) -> SigmaIndex {
    debug_assert!(k != l && !k.is_identity() && !l.is_identity());
    SigmaIndex(6 - k.0 - l.0)
}

/// `σ_a σ_b = u σ_c`, returned as `(u, c)`.
pub fn sigma_mul(a: SigmaIndex, b: SigmaIndex) -> (Unit, SigmaIndex) {
    if a.is_identity() {
        return (Unit::ONE, b);
    }
    if b.is_identity() {
        return (Unit::ONE, a);
    }
    if a == b {
        return (Unit::ONE, SigmaIndex::S0);
    }
    let c = third_index(a, b);
    // σ_k σ_l = i ε_klm σ_m
    let unit = if levi_civita(a, b, c) > 0 { Unit::I } else { Unit::MINUS_I };
    (unit, c)
}

/// Reduces `σ_{j1} σ_{j2} … σ_{jL}` to a single `u σ_c`.
pub fn sigma_product<I>(factors: I) -> (Unit, SigmaIndex)
where
    I: IntoIterator<Item = SigmaIndex>,
{
    factors
        .into_iter()
        .fold((Unit::ONE, SigmaIndex::S0), |(u, acc), j| {
            let (v, c) = sigma_mul(acc, j);
            (u * v, c)
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_range() {
        assert!(SigmaIndex::new(3).is_ok());
        assert!(matches!(SigmaIndex::new(4), Err(Error::Domain(_))));
    }

    #[test]
    fn levi_civita_values() {
        let [_, s1, pauli_triple, s3] = SigmaIndex::ALL;
        assert_eq!(levi_civita(s1, pauli_triple, s3), 1);
        assert_eq!(levi_civita(pauli_triple, s1, s3), -1);
        assert_eq!(levi_civita(s1, s1, pauli_triple), 0);
        assert_eq!(levi_civita(SigmaIndex::S0, s1, pauli_triple), 0);
    }

    #[test]
    fn squares_are_identity() {
        for j in SigmaIndex::ALL {
            assert_eq!(sigma_mul(j, j), (Unit::ONE, SigmaIndex::S0));
        }
    }

    #[test]
    fn cyclic_products() {
        assert_eq!(sigma_mul(SigmaIndex::S1, SigmaIndex::S2), (Unit::I, SigmaIndex::S3));
        assert_eq!(sigma_mul(SigmaIndex::S2, SigmaIndex::S1), (Unit::MINUS_I, SigmaIndex::S3));
        assert_eq!(sigma_mul(SigmaIndex::S3, SigmaIndex::S1), (Unit::I, SigmaIndex::S2));
    }

    #[test]
    fn triple_product_of_distinct_spatial_is_scalar() {
        let (u, c) = sigma_product([SigmaIndex::S1, SigmaIndex::S2, SigmaIndex::S3]);
        assert_eq!((u, c), (Unit::I, SigmaIndex::S0));
    }

    #[test]
    fn unit_arithmetic() {
        assert_eq!(Unit::I * Unit::I, Unit::MINUS_ONE);
        assert_eq!(Unit::MINUS_I.inverse(), Unit::I);
        assert_eq!(Unit::from_exponent(-1), Unit::MINUS_I);
        assert_eq!(Unit::MINUS_ONE.phase_index(12), 6);
    }
}
