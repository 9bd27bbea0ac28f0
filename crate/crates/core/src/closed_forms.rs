//! Closed-form δ/ε rules for ternary Σ-matrix products.
//!
//! These evaluate the Kronecker-delta and Levi-Civita formulas term by term,
//! independently of the block-product code in [`crate::sigma`] and
//! [`crate::phase`], and are used to cross-check it.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg};

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, C64};
use crate::pauli::{levi_civita, third_index, SigmaIndex};
use crate::phase::{ElementaryLabel, PhaseModulus, PhasedElementary, PhasedFull, PhasedHet, PhasedSigma};
use crate::sigma::{ElementarySigma, FullSigma};

/// Gaussian integer `re + i·im`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct GaussInt {
    pub re: i64,
    pub im: i64,
}

impl GaussInt {
    pub const ZERO: GaussInt = GaussInt { re: 0, im: 0 };
    pub const ONE: GaussInt = GaussInt { re: 1, im: 0 };
    pub const I: GaussInt = GaussInt { re: 0, im: 1 };

    pub fn new(re: i64, im: i64) -> Self {
        GaussInt { re, im }
    }
    pub fn is_zero(self) -> bool {
        self == GaussInt::ZERO
    }
    pub fn to_c64(self) -> C64 {
        C64::new(self.re as f64, self.im as f64)
    }
}

impl Add for GaussInt {
    type Output = GaussInt;
    fn add(self, o: GaussInt) -> GaussInt {
        GaussInt::new(self.re + o.re, self.im + o.im)
    }
}

impl Mul for GaussInt {
    type Output = GaussInt;
    fn mul(self, o: GaussInt) -> GaussInt {
        GaussInt::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

impl Mul<i64> for GaussInt {
    type Output = GaussInt;
    fn mul(self, s: i64) -> GaussInt {
        GaussInt::new(self.re * s, self.im * s)
    }
}

impl Neg for GaussInt {
    type Output = GaussInt;
    fn neg(self) -> GaussInt {
        GaussInt::new(-self.re, -self.im)
    }
}

/// Formal sum `Σ cᵢ Lᵢ` with Gaussian-integer coefficients; zero
/// coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinComb<L: Ord> {
    terms: BTreeMap<L, GaussInt>,
}

impl<L: Ord> Default for LinComb<L> {
    fn default() -> Self {
        LinComb { terms: BTreeMap::new() }
    }
}

impl<L: Ord + Clone> LinComb<L> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(label: L, c: GaussInt) -> Self {
        let mut out = Self::zero();
        out.add_term(label, c);
        out
    }

    pub fn add_term(&mut self, label: L, c: GaussInt) {
        let e = self.terms.entry(label.clone()).or_default();
        *e = *e + c;
        if e.is_zero() {
            self.terms.remove(&label);
        }
    }

    pub fn plus(mut self, other: &LinComb<L>) -> Self {
        for (l, c) in &other.terms {
            self.add_term(l.clone(), *c);
        }
        self
    }

    pub fn scale(&self, c: GaussInt) -> Self {
        let mut out = Self::zero();
        for (l, v) in &self.terms {
            out.add_term(l.clone(), *v * c);
        }
        out
    }

    pub fn map<M: Ord + Clone>(&self, f: impl Fn(&L) -> M) -> LinComb<M> {
        let mut out = LinComb::zero();
        for (l, c) in &self.terms {
            out.add_term(f(l), *c);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, label: &L) -> GaussInt {
        self.terms.get(label).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&L, GaussInt)> {
        self.terms.iter().map(|(l, c)| (l, *c))
    }

    pub fn to_dense(&self, dim: usize, lower: impl Fn(&L) -> DenseMatrix) -> DenseMatrix {
        self.terms.iter().fold(DenseMatrix::zeros(dim), |acc, (l, c)| {
            acc.add(&lower(l).scale(c.to_c64())).expect("terms of one dimension")
        })
    }
}

fn delta(a: SigmaIndex, b: SigmaIndex) -> i64 {
    (a == b) as i64
}

fn spatial(js: &[SigmaIndex]) -> Result<()> {
    match js.iter().find(|j| j.is_identity()) {
        Some(_) => Err(Error::Domain("closed form needs spatial indices 1..=3".into())),
        None => Ok(()),
    }
}

/// `σ_k σ_l σ_m = δ_kl σ_m − δ_km σ_l + δ_lm σ_k + iε_klm σ₀`.
pub fn pauli_triple(k: SigmaIndex, l: SigmaIndex, m: SigmaIndex) -> Result<LinComb<SigmaIndex>> {
    spatial(&[k, l, m])?;
    let mut out = LinComb::zero();
    out.add_term(m, GaussInt::ONE * delta(k, l));
    out.add_term(l, -GaussInt::ONE * delta(k, m));
    out.add_term(k, GaussInt::ONE * delta(l, m));
    out.add_term(SigmaIndex::S0, GaussInt::I * levi_civita(k, l, m) as i64);
    Ok(out)
}

/// Ternary elementary triple on the chain `(1,2,1)` (`position = 1`) or
/// `(2,1,2)` (`position = 2`).
pub fn elementary_chain_triple(position: usize, k: SigmaIndex, l: SigmaIndex, m: SigmaIndex) -> Result<LinComb<ElementarySigma>> {
    let mut out = LinComb::zero();
    for (j, c) in pauli_triple(k, l, m)?.terms() {
        out.add_term(ElementarySigma::new(3, *j, position)?, c);
    }
    Ok(out)
}

fn full3(j: SigmaIndex) -> FullSigma {
    FullSigma::new(3, j).expect("arity 3")
}

/// `Σ_k Σ_l Σ_m` for spatial indices.
pub fn full_triple_spatial(k: SigmaIndex, l: SigmaIndex, m: SigmaIndex) -> Result<LinComb<FullSigma>> {
    Ok(pauli_triple(k, l, m)?.map(|j| full3(*j)))
}

/// `Σ_k Σ_l Σ₀ = Σ_k Σ₀ Σ_l = Σ₀ Σ_k Σ_l = δ_kl Σ₀ + iε_klm Σ_m`.
pub fn full_triple_one_identity(k: SigmaIndex, l: SigmaIndex) -> Result<LinComb<FullSigma>> {
    spatial(&[k, l])?;
    let mut out = LinComb::term(full3(SigmaIndex::S0), GaussInt::ONE * delta(k, l));
    if k != l {
        let m = third_index(k, l);
        out.add_term(full3(m), GaussInt::I * levi_civita(k, l, m) as i64);
    }
    Ok(out)
}

/// `Σ_k Σ₀ Σ₀ = Σ₀ Σ_k Σ₀ = Σ₀ Σ₀ Σ_k = Σ_k`.
pub fn full_triple_two_identities(k: SigmaIndex) -> Result<LinComb<FullSigma>> {
    spatial(&[k])?;
    Ok(LinComb::term(full3(k), GaussInt::ONE))
}

/// Majority position and the slot (0..3) of the odd one out of a ternary
/// position pattern, or `None` for `(1,1,1)` and `(2,2,2)`.
fn pattern(positions: [usize; 3]) -> Result<Option<(usize, usize)>> {
    if positions.iter().any(|p| !(1..=2).contains(p)) {
        return Err(Error::Domain(format!("ternary block positions must be 1 or 2, got {positions:?}")));
    }
    let ones = positions.iter().filter(|&&p| p == 1).count();
    let majority = match ones {
        2 => 1,
        1 => 2,
        _ => return Ok(None),
    };
    let odd = positions.iter().position(|&p| p != majority).expect("mixed pattern");
    Ok(Some((majority, odd)))
}

/// Ternary commutator of three elementary Σ-matrices: `2iε_klm Σ₀^{(p)}`
/// where `p` is the majority position, zero for uniform patterns.
pub fn elementary_commutator(
    positions: [usize; 3],
    k: SigmaIndex,
    l: SigmaIndex,
    m: SigmaIndex,
) -> Result<LinComb<ElementarySigma>> {
    spatial(&[k, l, m])?;
    Ok(match pattern(positions)? {
        None => LinComb::zero(),
        Some((p, _)) => LinComb::term(
            ElementarySigma::new(3, SigmaIndex::S0, p)?,
            GaussInt::I * (2 * levi_civita(k, l, m) as i64),
        ),
    })
}

/// Ternary anticommutator of three elementary Σ-matrices:
/// `±2δ_kl Σ_m ± 2δ_km Σ_l ± 2δ_lm Σ_k` at the majority position, where the
/// delta pairing the two majority slots carries the minus sign.
pub fn elementary_anticommutator(
    positions: [usize; 3],
    k: SigmaIndex,
    l: SigmaIndex,
    m: SigmaIndex,
) -> Result<LinComb<ElementarySigma>> {
    spatial(&[k, l, m])?;
    let Some((p, odd)) = pattern(positions)? else {
        return Ok(LinComb::zero());
    };
    let sign = |slot_excluded: usize| if odd == slot_excluded { -2 } else { 2 };
    let mut out = LinComb::zero();
    out.add_term(ElementarySigma::new(3, m, p)?, GaussInt::ONE * (sign(2) * delta(k, l)));
    out.add_term(ElementarySigma::new(3, l, p)?, GaussInt::ONE * (sign(1) * delta(k, m)));
    out.add_term(ElementarySigma::new(3, k, p)?, GaussInt::ONE * (sign(0) * delta(l, m)));
    Ok(out)
}

/// `[Σ_k Σ_l Σ_m] = 6iε_klm Σ₀`.
pub fn full_commutator(k: SigmaIndex, l: SigmaIndex, m: SigmaIndex) -> Result<LinComb<FullSigma>> {
    spatial(&[k, l, m])?;
    Ok(LinComb::term(full3(SigmaIndex::S0), GaussInt::I * (6 * levi_civita(k, l, m) as i64)))
}

/// `{Σ_k Σ_l Σ_m} = 2δ_kl Σ_m + 2δ_km Σ_l + 2δ_lm Σ_k`.
pub fn full_anticommutator(k: SigmaIndex, l: SigmaIndex, m: SigmaIndex) -> Result<LinComb<FullSigma>> {
    spatial(&[k, l, m])?;
    let mut out = LinComb::zero();
    out.add_term(full3(m), GaussInt::ONE * (2 * delta(k, l)));
    out.add_term(full3(l), GaussInt::ONE * (2 * delta(k, m)));
    out.add_term(full3(k), GaussInt::ONE * (2 * delta(l, m)));
    Ok(out)
}

/// Reduces a formal sum of phased sigma terms, each with coefficient +1, to
/// the single phased sigma it equals. Uses `e^{2πi(r+q/2)/q} = −e^{2πir/q}`
/// to cancel pairs; fails when the sum is not a single term.
pub fn collapse(q: PhaseModulus, terms: &[(SigmaIndex, u32)]) -> Result<(SigmaIndex, u32)> {
    let half = q.get() / 2;
    let mut acc: BTreeMap<(SigmaIndex, u32), i64> = BTreeMap::new();
    for &(j, r) in terms {
        let r = r % q.get();
        let (key, sign) = if r >= half { ((j, r - half), -1) } else { ((j, r), 1) };
        *acc.entry(key).or_default() += sign;
    }
    let nonzero: Vec<_> = acc.into_iter().filter(|(_, c)| *c != 0).collect();
    match nonzero.as_slice() {
        [((j, r), 1)] => Ok((*j, *r)),
        [((j, r), -1)] => Ok((*j, r + half)),
        _ => Err(Error::Validation(format!("term sum {nonzero:?} is not a single phased sigma"))),
    }
}

/// Term list of the phased triple rule. For spatial `k, l, m`:
/// `δ_kl X_m(ρ) + δ_lm X_k(ρ) + δ_km X_l(ρ+q/2) + |ε| X₀(ρ+q/4+(q/4)(1−ε))`
/// with `ρ = r_k + r_l + r_m`. With σ₀ factors the spatial pair `(k, l)`
/// gives `δ_kl X₀(ρ) + |ε| X_m(ρ+q/4+(q/4)(1−ε))`, a single spatial `k`
/// gives `X_k(ρ)` and three σ₀ give `X₀(ρ)`.
fn triple_terms(q: PhaseModulus, a: (SigmaIndex, u32), b: (SigmaIndex, u32), c: (SigmaIndex, u32)) -> Vec<(SigmaIndex, u32)> {
    let rho = q.add(q.add(a.1, b.1), c.1);
    let quarter = q.quarter();
    let eps_phase = |e: i8| q.add(rho, quarter + quarter * (1 - e as i32) as u32);
    let sp: Vec<SigmaIndex> = [a.0, b.0, c.0].into_iter().filter(|j| !j.is_identity()).collect();
    let mut terms = Vec::new();
    match sp.as_slice() {
        [] => terms.push((SigmaIndex::S0, rho)),
        [k] => terms.push((*k, rho)),
        [k, l] => {
            if k == l {
                terms.push((SigmaIndex::S0, rho));
            } else {
                let m = third_index(*k, *l);
                terms.push((m, eps_phase(levi_civita(*k, *l, m))));
            }
        }
        _ => {
            let (k, l, m) = (a.0, b.0, c.0);
            if k == l {
                terms.push((m, rho));
            }
            if l == m {
                terms.push((k, rho));
            }
            if k == m {
                terms.push((l, q.add(rho, 2 * quarter)));
            }
            let e = levi_civita(k, l, m);
            if e != 0 {
                terms.push((SigmaIndex::S0, eps_phase(e)));
            }
        }
    }
    terms
}

/// Phased ternary product of full Σ-matrices.
pub fn phased_full_triple(a: &PhasedFull, b: &PhasedFull, c: &PhasedFull) -> Result<PhasedFull> {
    if [a, b, c].iter().any(|x| x.arity() != 3) {
        return Err(Error::Domain("closed form is ternary".into()));
    }
    if b.q() != a.q() || c.q() != a.q() {
        return Err(Error::Domain("mixed phase moduli".into()));
    }
    let q = a.q();
    let (j, r) = collapse(q, &triple_terms(q, (a.j(), a.r()), (b.j(), b.r()), (c.j(), c.r())))?;
    PhasedFull::new(q, 3, j, r as i64)
}

/// Phased ternary product of elementary Σ-matrices: nonzero only on the chains `(1,2,1)` and `(2,1,2)`.
pub fn phased_elementary_triple(a: &PhasedElementary, b: &PhasedElementary, c: &PhasedElementary) -> Result<ElementaryLabel> {
    if [a, b, c].iter().any(|x| x.arity() != 3) {
        return Err(Error::Domain("closed form is ternary".into()));
    }
    if b.q() != a.q() || c.q() != a.q() {
        return Err(Error::Domain("mixed phase moduli".into()));
    }
    let chained = matches!((a.k(), b.k(), c.k()), (1, 2, 1) | (2, 1, 2));
    if !chained {
        return Ok(ElementaryLabel::Zero { n: 3 });
    }
    let q = a.q();
    let (j, r) = collapse(q, &triple_terms(q, (a.j(), a.r()), (b.j(), b.r()), (c.j(), c.r())))?;
    Ok(ElementaryLabel::Elem(PhasedElementary::new(q, 3, j, a.k(), r as i64)?))
}

/// Phase attached to the `ε` terms of the heterogeneous case formulas.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpsPhase {
    /// `e^{iπ/2 (2−ε)}`, which equals `iε` for `ε = ±1`.
    TwoMinusEps,
    /// `e^{iπ/2 (1−ε)}`, which equals `ε` alone and drops the factor `i`.
    OneMinusEps,
}

/// One block of the heterogeneous ternary product `σ̂_a σ̂_b σ̂_c`, by case:
/// no `σ₀` among the three (triple rule), one `σ₀` (pair rule on the other
/// two), two (the remaining sigma) or three (`σ₀`).
pub fn het_block(a: PhasedSigma, b: PhasedSigma, c: PhasedSigma, eps: EpsPhase) -> Result<PhasedSigma> {
    let q = a.q();
    if b.q() != q || c.q() != q {
        return Err(Error::Domain("mixed phase moduli".into()));
    }
    let rho = q.add(q.add(a.r(), b.r()), c.r());
    let eps_shift = |e: i8| -> u32 {
        let base = match eps {
            EpsPhase::TwoMinusEps => 2,
            EpsPhase::OneMinusEps => 1,
        };
        q.quarter() * (base - e as i32) as u32
    };
    let spatial: Vec<SigmaIndex> = [a.j(), b.j(), c.j()].into_iter().filter(|j| !j.is_identity()).collect();
    let (j, r) = match spatial.as_slice() {
        [] => (SigmaIndex::S0, rho),
        [x] => (*x, rho),
        [x, y] => {
            if x == y {
                (SigmaIndex::S0, rho)
            } else {
                let m = third_index(*x, *y);
                (m, q.add(rho, eps_shift(levi_civita(*x, *y, m))))
            }
        }
        [k, l, m] => {
            let mut terms = Vec::new();
            if k == l {
                terms.push((*m, rho));
            }
            if l == m {
                terms.push((*k, rho));
            }
            if k == m {
                terms.push((*l, q.add(rho, 2 * q.quarter())));
            }
            let e = levi_civita(*k, *l, *m);
            if e != 0 {
                terms.push((SigmaIndex::S0, q.add(rho, eps_shift(e))));
            }
            collapse(q, &terms)?
        }
        _ => unreachable!(),
    };
    Ok(PhasedSigma::new(q, j, r as i64))
}

/// Ternary heterogeneous product from the case formulas: block 1 is
/// `σ̂_{j₁'} σ̂_{j₂''} σ̂_{j₁'''}`, block 2 is `σ̂_{j₂'} σ̂_{j₁''} σ̂_{j₂'''}`.
pub fn phased_het_triple(a: &PhasedHet, b: &PhasedHet, c: &PhasedHet, eps: EpsPhase) -> Result<PhasedHet> {
    if [a, b, c].iter().any(|x| x.arity() != 3) {
        return Err(Error::Domain("closed form is ternary".into()));
    }
    let (x, y, z) = (a.blocks(), b.blocks(), c.blocks());
    let b1 = het_block(x[0], y[1], z[0], eps)?;
    let b2 = het_block(x[1], y[0], z[1], eps)?;
    PhasedHet::new(a.q(), &[(b1.j(), b1.r() as i64), (b2.j(), b2.r() as i64)])
}
