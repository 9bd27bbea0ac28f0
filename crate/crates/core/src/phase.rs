//! Finite phase-shifted families: the q-generalized Pauli groups, the n-ary
//! semigroup of elementary Σ-matrices with an adjoined zero, and the n-ary
//! groups of full and heterogeneous Σ-matrices.
//!
//! Elements are exact labels. A phase index `r` stands for `e^{2πir/q}` and
//! is always kept reduced modulo `q`. Dense matrices only appear through
//! [`crate::oracle`].

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::{self, Lower, SweepMode, SweepSummary};
use crate::pauli::{levi_civita, third_index, SigmaIndex};
use crate::su2::is_allowed_count;

/// Admissible phase moduli: the divisors of 360 that are multiples of 4.
pub const Q12: [u32; 12] = [4, 8, 12, 20, 24, 36, 40, 60, 72, 120, 180, 360];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct PhaseModulus(u32);

impl PhaseModulus {
    pub fn new(q: u32) -> Result<Self> {
        if Q12.contains(&q) {
            Ok(PhaseModulus(q))
        } else {
            Err(Error::Domain(format!("phase modulus {q} is not one of {Q12:?}")))
        }
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    /// `q/4`, the phase index of `i`.
    #[inline]
    pub fn quarter(self) -> u32 {
        self.0 / 4
    }

    #[inline]
    pub fn reduce(self, r: i64) -> u32 {
        r.rem_euclid(self.0 as i64) as u32
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        (a + b) % self.0
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        (self.0 - a % self.0) % self.0
    }
}

impl fmt::Display for PhaseModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `ε_klm = |ε_klm| e^{iπ/2 (1-ε_klm)}` in phase-index units:
/// returns `(|ε|, Some((q/4)(1-ε)))`, or `(0, None)` when `ε = 0`.
pub fn levi_civita_phase(k: SigmaIndex, l: SigmaIndex, m: SigmaIndex, q: PhaseModulus) -> (u8, Option<u32>) {
    match levi_civita(k, l, m) {
        0 => (0, None),
        e => (1, Some(q.quarter() * (1 - e as i32) as u32)),
    }
}

type Raw = (SigmaIndex, u32);

fn mul_raw(q: PhaseModulus, a: Raw, b: Raw) -> Raw {
    let r = q.add(a.1, b.1);
    if a.0.is_identity() {
        return (b.0, r);
    }
    if b.0.is_identity() {
        return (a.0, r);
    }
    if a.0 == b.0 {
        return (SigmaIndex::S0, r);
    }
    let m = third_index(a.0, b.0);
    let (_, eps) = levi_civita_phase(a.0, b.0, m, q);
    (m, q.add(r, q.add(q.quarter(), eps.expect("distinct spatial indices"))))
}

fn fold_raw<I: IntoIterator<Item = Raw>>(q: PhaseModulus, factors: I) -> Raw {
    factors.into_iter().fold((SigmaIndex::S0, 0), |acc, x| mul_raw(q, acc, x))
}

fn check_count(arity: usize, count: usize) -> Result<()> {
    if is_allowed_count(arity, count) {
        Ok(())
    } else {
        Err(Error::Arity { arity, count })
    }
}

fn common_q<I: IntoIterator<Item = PhaseModulus>>(qs: I) -> Result<Option<PhaseModulus>> {
    let mut out: Option<PhaseModulus> = None;
    for q in qs {
        match out {
            Some(p) if p != q => return Err(Error::Domain(format!("mixed phase moduli {p} and {q}"))),
            _ => out = Some(q),
        }
    }
    Ok(out)
}

/// `σ̂_j(r) = e^{2πir/q} σ_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhasedSigma {
    q: PhaseModulus,
    j: SigmaIndex,
    r: u32,
}

impl PhasedSigma {
    pub fn new(q: PhaseModulus, j: SigmaIndex, r: i64) -> Self {
        PhasedSigma { q, j, r: q.reduce(r) }
    }
    pub fn q(&self) -> PhaseModulus {
        self.q
    }
    pub fn j(&self) -> SigmaIndex {
        self.j
    }
    pub fn r(&self) -> u32 {
        self.r
    }
    pub fn identity(q: PhaseModulus) -> Self {
        PhasedSigma { q, j: SigmaIndex::S0, r: 0 }
    }
    /// `σ̂_j(r)⁻¹ = σ̂_j(-r)`.
    pub fn inverse(&self) -> Self {
        PhasedSigma { q: self.q, j: self.j, r: self.q.neg(self.r) }
    }
    fn raw(&self) -> Raw {
        (self.j, self.r)
    }
    fn from_raw(q: PhaseModulus, (j, r): Raw) -> Self {
        PhasedSigma { q, j, r }
    }
}

impl fmt::Display for PhasedSigma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.j, self.r)
    }
}

/// Product of two phased sigma matrices: `δ_kl σ̂₀(r_k+r_l) + |ε_klm| σ̂_m(r_k+r_l+q/4+(q/4)(1-ε_klm))`,
/// with `σ₀` factors contributing their phase only.
pub fn pauli_mul(a: PhasedSigma, b: PhasedSigma) -> Result<PhasedSigma> {
    if a.q != b.q {
        return Err(Error::Domain(format!("mixed phase moduli {} and {}", a.q, b.q)));
    }
    Ok(PhasedSigma::from_raw(a.q, mul_raw(a.q, a.raw(), b.raw())))
}

/// Phased elementary `Σ̂_j^{(k)}(r)`, block position `k ∈ 1..=n-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhasedElementary {
    q: PhaseModulus,
    n: usize,
    j: SigmaIndex,
    k: usize,
    r: u32,
}

impl PhasedElementary {
    pub fn new(q: PhaseModulus, n: usize, j: SigmaIndex, k: usize, r: i64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("arity {n} is below 2")));
        }
        if k == 0 || k > n - 1 {
            return Err(Error::Domain(format!("block position {k} outside 1..={}", n - 1)));
        }
        Ok(PhasedElementary { q, n, j, k, r: q.reduce(r) })
    }
    pub fn q(&self) -> PhaseModulus {
        self.q
    }
    pub fn arity(&self) -> usize {
        self.n
    }
    pub fn j(&self) -> SigmaIndex {
        self.j
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn r(&self) -> u32 {
        self.r
    }
}

/// Element of the elementary semigroup: a phased elementary Σ-matrix or the
/// adjoined absorbing zero of the given arity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementaryLabel {
    Zero { n: usize },
    Elem(PhasedElementary),
}

impl ElementaryLabel {
    pub fn arity(&self) -> usize {
        match self {
            ElementaryLabel::Zero { n } => *n,
            ElementaryLabel::Elem(e) => e.n,
        }
    }
    pub fn is_zero(&self) -> bool {
        matches!(self, ElementaryLabel::Zero { .. })
    }
}

impl fmt::Display for ElementaryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementaryLabel::Zero { .. } => f.write_str("Z"),
            ElementaryLabel::Elem(e) => write!(f, "{}@{}:{}", e.j, e.k, e.r),
        }
    }
}

/// n-ary product in the elementary semigroup. Zero unless the block
/// positions advance cyclically by one; Zero absorbs.
pub fn elementary_nary_mul(labels: &[ElementaryLabel], n: usize) -> Result<ElementaryLabel> {
    check_count(n, labels.len())?;
    if let Some(l) = labels.iter().find(|l| l.arity() != n) {
        return Err(Error::Domain(format!("label of arity {} in a product of arity {n}", l.arity())));
    }
    let elems: Vec<&PhasedElementary> = labels
        .iter()
        .filter_map(|l| match l {
            ElementaryLabel::Elem(e) => Some(e),
            ElementaryLabel::Zero { .. } => None,
        })
        .collect();
    let q = common_q(elems.iter().map(|e| e.q))?;
    if elems.len() != labels.len() {
        return Ok(ElementaryLabel::Zero { n });
    }
    let q = q.expect("at least one factor");
    let nb = n - 1;
    if !elems.windows(2).all(|w| w[1].k == w[0].k % nb + 1) {
        return Ok(ElementaryLabel::Zero { n });
    }
    let (j, r) = fold_raw(q, elems.iter().map(|e| (e.j, e.r)));
    Ok(ElementaryLabel::Elem(PhasedElementary { q, n, j, k: elems[0].k, r }))
}

/// Phased full `Σ̂_j(r) = e^{2πir/q} Σ_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhasedFull {
    q: PhaseModulus,
    n: usize,
    j: SigmaIndex,
    r: u32,
}

impl PhasedFull {
    pub fn new(q: PhaseModulus, n: usize, j: SigmaIndex, r: i64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("arity {n} is below 2")));
        }
        Ok(PhasedFull { q, n, j, r: q.reduce(r) })
    }
    pub fn q(&self) -> PhaseModulus {
        self.q
    }
    pub fn arity(&self) -> usize {
        self.n
    }
    pub fn j(&self) -> SigmaIndex {
        self.j
    }
    pub fn r(&self) -> u32 {
        self.r
    }
}

impl fmt::Display for PhasedFull {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.j, self.r)
    }
}

pub fn full_nary_mul(labels: &[PhasedFull], n: usize) -> Result<PhasedFull> {
    check_count(n, labels.len())?;
    if let Some(l) = labels.iter().find(|l| l.n != n) {
        return Err(Error::Domain(format!("label of arity {} in a product of arity {n}", l.n)));
    }
    let q = common_q(labels.iter().map(|l| l.q))?.expect("at least one factor");
    let (j, r) = fold_raw(q, labels.iter().map(|l| (l.j, l.r)));
    Ok(PhasedFull { q, n, j, r })
}

/// Querelement of a phased full Σ-matrix: phase index `(2-n)r mod q`, sigma
/// part `Σ₀` for even `n` and `Σ_j` for odd `n`.
pub fn full_querelement(s: &PhasedFull) -> PhasedFull {
    let n = s.n as i64;
    let j = if s.n.is_multiple_of(2) { SigmaIndex::S0 } else { s.j };
    PhasedFull { q: s.q, n: s.n, j, r: s.q.reduce((2 - n) * s.r as i64) }
}

/// Heterogeneous `Σ^het_{j₁…j_{n-1}}(r₁,…,r_{n-1})`: block `k` carries `σ̂_{j_k}(r_k)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhasedHet {
    q: PhaseModulus,
    blocks: Vec<PhasedSigma>,
}

impl PhasedHet {
    pub fn new(q: PhaseModulus, blocks: &[(SigmaIndex, i64)]) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Domain("a heterogeneous label needs at least one block".into()));
        }
        Ok(PhasedHet { q, blocks: blocks.iter().map(|(j, r)| PhasedSigma::new(q, *j, *r)).collect() })
    }
    pub fn identity(q: PhaseModulus, n: usize) -> Self {
        PhasedHet { q, blocks: vec![PhasedSigma::identity(q); n - 1] }
    }
    pub fn q(&self) -> PhaseModulus {
        self.q
    }
    pub fn arity(&self) -> usize {
        self.blocks.len() + 1
    }
    pub fn blocks(&self) -> &[PhasedSigma] {
        &self.blocks
    }
}

impl fmt::Display for PhasedHet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Block-wise n-ary product: output block `k` is the phased product
/// `σ̂_{j₁,k} σ̂_{j₂,k+1} …` along the cyclic chain.
pub fn het_nary_mul(labels: &[PhasedHet], n: usize) -> Result<PhasedHet> {
    check_count(n, labels.len())?;
    if let Some(l) = labels.iter().find(|l| l.arity() != n) {
        return Err(Error::Domain(format!("label of arity {} in a product of arity {n}", l.arity())));
    }
    let q = common_q(labels.iter().map(|l| l.q))?.expect("at least one factor");
    let nb = n - 1;
    let blocks = (0..nb)
        .map(|k| {
            let raw = fold_raw(q, labels.iter().enumerate().map(|(i, l)| l.blocks[(k + i) % nb].raw()));
            PhasedSigma::from_raw(q, raw)
        })
        .collect();
    Ok(PhasedHet { q, blocks })
}

/// Ternary querelement: swaps the two slots and negates both phases.
pub fn het_querelement(s: &PhasedHet) -> Result<PhasedHet> {
    if s.arity() != 3 {
        return Err(Error::Unsupported(format!(
            "closed-form heterogeneous querelement exists for arity 3 only, got {}; use het_querelement_general",
            s.arity()
        )));
    }
    Ok(PhasedHet { q: s.q, blocks: vec![s.blocks[1].inverse(), s.blocks[0].inverse()] })
}

/// Querelement for any arity: block `k` is `(M_{k+1} ⋯ M_{k+n-2})⁻¹`,
/// evaluated exactly on labels.
pub fn het_querelement_general(s: &PhasedHet) -> PhasedHet {
    let nb = s.blocks.len();
    let q = s.q;
    let blocks = (0..nb)
        .map(|k| {
            let raw = fold_raw(q, (1..nb).rev().map(|i| s.blocks[(k + i) % nb].inverse().raw()));
            PhasedSigma::from_raw(q, raw)
        })
        .collect();
    PhasedHet { q, blocks }
}

/// Which finite family a structure belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Pauli,
    Elementary,
    Full,
    Het,
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyKind::Pauli => "pauli",
            FamilyKind::Elementary => "elementary",
            FamilyKind::Full => "full",
            FamilyKind::Het => "het",
        })
    }
}

/// A finite label family with a fixed enumeration `0..order`.
pub trait Family: Sync {
    type Label: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + Lower;

    fn kind(&self) -> FamilyKind;
    /// Number of operands of the family's operation (2 for the Pauli groups).
    fn arity(&self) -> usize;
    fn modulus(&self) -> PhaseModulus;
    fn order(&self) -> usize;
    fn label(&self, idx: usize) -> Self::Label;
    fn index(&self, label: &Self::Label) -> usize;
    /// Product of exactly `arity()` labels of this family.
    fn mul(&self, factors: &[Self::Label]) -> Self::Label;
    /// `result_j, result_k, result_r` columns of the Cayley table.
    fn result_columns(&self, label: &Self::Label) -> [String; 3];
    /// Dimension of the lowered matrices.
    fn dense_dim(&self) -> usize {
        2 * (self.arity().max(2) - 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PauliGroup {
    q: PhaseModulus,
}

impl PauliGroup {
    pub fn new(q: u32) -> Result<Self> {
        Ok(PauliGroup { q: PhaseModulus::new(q)? })
    }
}

impl Family for PauliGroup {
    type Label = PhasedSigma;
    fn kind(&self) -> FamilyKind {
        FamilyKind::Pauli
    }
    fn arity(&self) -> usize {
        2
    }
    fn modulus(&self) -> PhaseModulus {
        self.q
    }
    fn order(&self) -> usize {
        4 * self.q.get() as usize
    }
    fn label(&self, idx: usize) -> PhasedSigma {
        let q = self.q.get() as usize;
        PhasedSigma { q: self.q, j: SigmaIndex::ALL[idx / q], r: (idx % q) as u32 }
    }
    fn index(&self, l: &PhasedSigma) -> usize {
        l.j.get() as usize * self.q.get() as usize + l.r as usize
    }
    fn mul(&self, f: &[PhasedSigma]) -> PhasedSigma {
        pauli_mul(f[0], f[1]).expect("labels of one family")
    }
    fn result_columns(&self, l: &PhasedSigma) -> [String; 3] {
        [l.j.to_string(), String::new(), l.r.to_string()]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ElementarySemigroup {
    n: usize,
    q: PhaseModulus,
}

impl ElementarySemigroup {
    pub fn new(n: usize, q: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("arity {n} is below 2")));
        }
        Ok(ElementarySemigroup { n, q: PhaseModulus::new(q)? })
    }
}

impl Family for ElementarySemigroup {
    type Label = ElementaryLabel;
    fn kind(&self) -> FamilyKind {
        FamilyKind::Elementary
    }
    fn arity(&self) -> usize {
        self.n
    }
    fn modulus(&self) -> PhaseModulus {
        self.q
    }
    fn order(&self) -> usize {
        4 * self.q.get() as usize * (self.n - 1) + 1
    }
    /// Index 0 is Zero; the rest run over `(k, j, r)` lexicographically.
    fn label(&self, idx: usize) -> ElementaryLabel {
        if idx == 0 {
            return ElementaryLabel::Zero { n: self.n };
        }
        let q = self.q.get() as usize;
        let i = idx - 1;
        ElementaryLabel::Elem(PhasedElementary {
            q: self.q,
            n: self.n,
            k: i / (4 * q) + 1,
            j: SigmaIndex::ALL[(i / q) % 4],
            r: (i % q) as u32,
        })
    }
    fn index(&self, l: &ElementaryLabel) -> usize {
        match l {
            ElementaryLabel::Zero { .. } => 0,
            ElementaryLabel::Elem(e) => {
                let q = self.q.get() as usize;
                1 + ((e.k - 1) * 4 + e.j.get() as usize) * q + e.r as usize
            }
        }
    }
    fn mul(&self, f: &[ElementaryLabel]) -> ElementaryLabel {
        elementary_nary_mul(f, self.n).expect("labels of one family")
    }
    fn result_columns(&self, l: &ElementaryLabel) -> [String; 3] {
        match l {
            ElementaryLabel::Zero { .. } => ["Z".into(), "Z".into(), "Z".into()],
            ElementaryLabel::Elem(e) => [e.j.to_string(), e.k.to_string(), e.r.to_string()],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FullGroup {
    n: usize,
    q: PhaseModulus,
}

impl FullGroup {
    pub fn new(n: usize, q: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("arity {n} is below 2")));
        }
        Ok(FullGroup { n, q: PhaseModulus::new(q)? })
    }
}

impl Family for FullGroup {
    type Label = PhasedFull;
    fn kind(&self) -> FamilyKind {
        FamilyKind::Full
    }
    fn arity(&self) -> usize {
        self.n
    }
    fn modulus(&self) -> PhaseModulus {
        self.q
    }
    fn order(&self) -> usize {
        4 * self.q.get() as usize
    }
    fn label(&self, idx: usize) -> PhasedFull {
        let q = self.q.get() as usize;
        PhasedFull { q: self.q, n: self.n, j: SigmaIndex::ALL[idx / q], r: (idx % q) as u32 }
    }
    fn index(&self, l: &PhasedFull) -> usize {
        l.j.get() as usize * self.q.get() as usize + l.r as usize
    }
    fn mul(&self, f: &[PhasedFull]) -> PhasedFull {
        full_nary_mul(f, self.n).expect("labels of one family")
    }
    fn result_columns(&self, l: &PhasedFull) -> [String; 3] {
        [l.j.to_string(), String::new(), l.r.to_string()]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HetGroup {
    n: usize,
    q: PhaseModulus,
    order: usize,
}

impl HetGroup {
    pub fn new(n: usize, q: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("arity {n} is below 2")));
        }
        let q = PhaseModulus::new(q)?;
        let order = (4 * q.get() as usize)
            .checked_pow((n - 1) as u32)
            .ok_or_else(|| Error::Domain(format!("heterogeneous label space for n={n}, q={q} overflows")))?;
        Ok(HetGroup { n, q, order })
    }
}

impl Family for HetGroup {
    type Label = PhasedHet;
    fn kind(&self) -> FamilyKind {
        FamilyKind::Het
    }
    fn arity(&self) -> usize {
        self.n
    }
    fn modulus(&self) -> PhaseModulus {
        self.q
    }
    fn order(&self) -> usize {
        self.order
    }
    /// Mixed radix `4q`, block 1 most significant; each digit is `j·q + r`.
    fn label(&self, mut idx: usize) -> PhasedHet {
        let q = self.q.get() as usize;
        let nb = self.n - 1;
        let mut blocks = vec![PhasedSigma::identity(self.q); nb];
        for b in blocks.iter_mut().rev() {
            let d = idx % (4 * q);
            idx /= 4 * q;
            *b = PhasedSigma { q: self.q, j: SigmaIndex::ALL[d / q], r: (d % q) as u32 };
        }
        PhasedHet { q: self.q, blocks }
    }
    fn index(&self, l: &PhasedHet) -> usize {
        let q = self.q.get() as usize;
        l.blocks.iter().fold(0, |acc, b| acc * 4 * q + b.j.get() as usize * q + b.r as usize)
    }
    fn mul(&self, f: &[PhasedHet]) -> PhasedHet {
        het_nary_mul(f, self.n).expect("labels of one family")
    }
    fn result_columns(&self, l: &PhasedHet) -> [String; 3] {
        let join = |f: &dyn Fn(&PhasedSigma) -> String| l.blocks.iter().map(f).collect::<Vec<_>>().join(" ");
        let ks = (1..=l.blocks.len()).map(|k| k.to_string()).collect::<Vec<_>>().join(" ");
        [join(&|b| b.j.to_string()), ks, join(&|b| b.r.to_string())]
    }
}

/// Writes the complete Cayley table of a family as CSV. Rows run over
/// operand tuples in lexicographic index order.
pub fn write_cayley_csv<F: Family, W: Write>(family: &F, budget: u64, out: &mut W) -> Result<u64> {
    let n = family.arity();
    let order = family.order();
    let rows = (order as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if rows > budget as u128 {
        return Err(Error::BudgetExceeded { required: rows, budget: budget as u128 });
    }
    let header: Vec<String> = (1..=n).map(|i| format!("a{i}")).collect();
    writeln!(out, "{},result_j,result_k,result_r", header.join(","))?;
    let labels: Vec<F::Label> = (0..order).map(|i| family.label(i)).collect();
    let mut digits = vec![0usize; n];
    let mut factors: Vec<F::Label> = digits.iter().map(|&d| labels[d].clone()).collect();
    let mut line = String::new();
    for _ in 0..rows as u64 {
        for (slot, &d) in factors.iter_mut().zip(&digits) {
            *slot = labels[d].clone();
        }
        let res = family.mul(&factors);
        let [rj, rk, rr] = family.result_columns(&res);
        line.clear();
        for f in &factors {
            line.push_str(&f.to_string());
            line.push(',');
        }
        line.push_str(&format!("{rj},{rk},{rr}"));
        writeln!(out, "{line}")?;
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < order {
                break;
            }
            *d = 0;
        }
    }
    Ok(rows as u64)
}

/// Knobs shared by the structure builders.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BuildOptions {
    /// Maximum number of tuples an exhaustive check may visit.
    pub budget: u64,
    pub seed: u64,
    /// Tuples drawn when a check has to fall back to sampling.
    pub samples: u64,
    pub tol: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { budget: 30_000_000, seed: 42, samples: 100_000, tol: crate::matrix::DEFAULT_TOL }
    }
}

/// Summary of a finite structure, written as JSON by the CLI.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructureReport {
    pub family: FamilyKind,
    pub n: usize,
    pub q: u32,
    /// Enumerated element count.
    pub order: u64,
    #[serde(rename = "paper_claimed_order")]
    pub claimed_order: u64,
    pub closure: bool,
    pub assoc_samples: u64,
    /// `null` where the structure has no querelement (the semigroup).
    pub querelement: Option<bool>,
    /// Element order `l`: least `l ≥ 1` with `g` reproduced by the product of
    /// `l(n-1)+1` copies of `g`; key 0 counts elements never reproduced.
    pub order_histogram: BTreeMap<u64, u64>,
    pub order_discrepancy: bool,
    pub closure_checked: u64,
    pub closure_exhaustive: bool,
    pub associativity: bool,
    pub assoc_exhaustive: bool,
    pub identity: Option<String>,
    pub identity_verified: Option<bool>,
    pub zero_absorption: Option<bool>,
    pub oracle_max_deviation: f64,
    pub sampled: bool,
    pub passed: bool,
    pub note: Option<String>,
    pub witness: Option<String>,
}

const HISTOGRAM_LIMIT: usize = 1 << 16;
const ELEMENT_CHECK_LIMIT: usize = 1 << 16;
const ELEMENT_SAMPLES: usize = 4096;

/// Labels visited by per-element checks: all of them, or a deterministic
/// sample when the family is large.
fn element_indices(order: usize, seed: u64) -> (Vec<usize>, bool) {
    if order <= ELEMENT_CHECK_LIMIT {
        return ((0..order).collect(), true);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_e1e7);
    let mut v: Vec<usize> = (0..ELEMENT_SAMPLES).map(|_| rng.random_range(0..order)).collect();
    v.sort_unstable();
    v.dedup();
    (v, false)
}

fn sweep<F: Family>(family: &F, mode: SweepMode, opts: &BuildOptions) -> Result<SweepSummary> {
    let len = match mode {
        SweepMode::Product => family.arity(),
        SweepMode::Associativity => 2 * family.arity() - 1,
    };
    match oracle::exhaustive_sweep(family, len, opts.budget, opts.tol) {
        Err(Error::BudgetExceeded { .. }) => oracle::sampled_sweep(family, len, opts.samples, opts.seed, opts.tol),
        other => other,
    }
}

/// Element order as described on [`StructureReport::order_histogram`].
pub fn element_order<F: Family>(family: &F, g: &F::Label) -> u64 {
    let n = family.arity();
    let mut factors = vec![g.clone(); n];
    let mut p = g.clone();
    for l in 1..=family.order() as u64 + 1 {
        factors[0] = p;
        p = family.mul(&factors);
        if p == *g {
            return l;
        }
    }
    0
}

fn histogram<F: Family>(family: &F) -> BTreeMap<u64, u64> {
    let mut h = BTreeMap::new();
    if family.order() <= HISTOGRAM_LIMIT {
        for i in 0..family.order() {
            *h.entry(element_order(family, &family.label(i))).or_insert(0) += 1;
        }
    }
    h
}

fn base_report<F: Family>(family: &F, claimed: u64, opts: &BuildOptions) -> Result<StructureReport> {
    let closure = sweep(family, SweepMode::Product, opts)?;
    let assoc = sweep(family, SweepMode::Associativity, opts)?;
    let order = family.order() as u64;
    let mut note = None;
    if family.order() > HISTOGRAM_LIMIT {
        note = Some(format!("order histogram skipped above {HISTOGRAM_LIMIT} elements"));
    }
    let witness = closure.witness_string().or_else(|| assoc.witness_string());
    let closure_ok = closure.failures == 0;
    let assoc_ok = assoc.failures == 0;
    Ok(StructureReport {
        family: family.kind(),
        n: family.arity(),
        q: family.modulus().get(),
        order,
        claimed_order: claimed,
        closure: closure_ok,
        assoc_samples: assoc.checked,
        querelement: None,
        order_histogram: histogram(family),
        order_discrepancy: order != claimed,
        closure_checked: closure.checked,
        closure_exhaustive: closure.exhaustive,
        associativity: assoc_ok,
        assoc_exhaustive: assoc.exhaustive,
        identity: None,
        identity_verified: None,
        zero_absorption: None,
        oracle_max_deviation: closure.max_abs_deviation,
        sampled: !closure.exhaustive,
        passed: closure_ok && assoc_ok,
        note,
        witness,
    })
}

/// Checks that `e` is neutral with `a` at each of `positions` (0-based) and
/// `e` in the remaining slots.
fn check_identity_at<F: Family>(family: &F, e: &F::Label, indices: &[usize], positions: &[usize]) -> Option<String> {
    let n = family.arity();
    for &i in indices {
        let a = family.label(i);
        for &pos in positions {
            let mut f = vec![e.clone(); n];
            f[pos] = a.clone();
            if family.mul(&f) != a {
                return Some(format!("identity fails for {a} at position {}", pos + 1));
            }
        }
    }
    None
}

/// Checks that `e` is a neutral element in every argument position.
fn check_identity<F: Family>(family: &F, e: &F::Label, indices: &[usize]) -> Option<String> {
    let all: Vec<usize> = (0..family.arity()).collect();
    check_identity_at(family, e, indices, &all)
}

/// Checks `μ[a, …, ã, …, a] = a` with `ã` at every position, in label space
/// and through the oracle. Returns the largest oracle deviation.
fn check_querelement<F, Q>(family: &F, quer: Q, indices: &[usize], tol: f64) -> (Option<String>, f64)
where
    F: Family,
    Q: Fn(&F::Label) -> F::Label,
{
    let n = family.arity();
    let mut max_dev = 0.0f64;
    for &i in indices {
        let a = family.label(i);
        let qa = quer(&a);
        for pos in 0..n {
            let mut f = vec![a.clone(); n];
            f[pos] = qa.clone();
            if family.mul(&f) != a {
                return (Some(format!("querelement {qa} of {a} fails at position {}", pos + 1)), max_dev);
            }
            let dev = oracle::product_deviation(&f, &a);
            max_dev = max_dev.max(dev);
            if dev > tol {
                return (Some(format!("oracle deviation {dev:e} for querelement of {a} at position {}", pos + 1)), max_dev);
            }
        }
    }
    (None, max_dev)
}

fn finish(mut report: StructureReport, failure: Option<String>) -> StructureReport {
    if let Some(w) = failure {
        report.passed = false;
        if report.witness.is_none() {
            report.witness = Some(w);
        }
    }
    report
}

/// The group `{σ̂_j(r)}` of order `4q` under matrix multiplication.
pub fn build_pauli_group(q: u32, opts: &BuildOptions) -> Result<StructureReport> {
    let g = PauliGroup::new(q)?;
    let mut report = base_report(&g, 4 * q as u64, opts)?;
    let e = PhasedSigma::identity(g.q);
    let (indices, _) = element_indices(g.order(), opts.seed);
    let id_fail = check_identity(&g, &e, &indices);
    let mut dev = 0.0f64;
    let mut inv_fail = None;
    for &i in &indices {
        let a = g.label(i);
        let b = a.inverse();
        if g.mul(&[a, b]) != e || g.mul(&[b, a]) != e {
            inv_fail = Some(format!("{b} is not a two-sided inverse of {a}"));
            break;
        }
        let d = oracle::inverse_deviation(&a, &b);
        dev = dev.max(d);
        if d > opts.tol {
            inv_fail = Some(format!("oracle deviation {d:e} for the inverse of {a}"));
            break;
        }
    }
    report.identity = Some(e.to_string());
    report.identity_verified = Some(id_fail.is_none());
    report.querelement = Some(inv_fail.is_none());
    report.oracle_max_deviation = report.oracle_max_deviation.max(dev);
    report.passed &= id_fail.is_none() && inv_fail.is_none();
    Ok(finish(report, id_fail.or(inv_fail)))
}

/// The n-ary semigroup of phased elementary Σ-matrices with zero.
pub fn build_elementary_semigroup(n: usize, q: u32, opts: &BuildOptions) -> Result<StructureReport> {
    let s = ElementarySemigroup::new(n, q)?;
    let claimed = 4 * q as u64 * (n as u64 - 1) + 1;
    let mut report = base_report(&s, claimed, opts)?;
    let zero = ElementaryLabel::Zero { n };
    let order = s.order();
    let others = (order as u128).pow(n as u32 - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let tuples: Vec<Vec<usize>> = if others * n as u128 <= opts.budget as u128 {
        (0..others as usize)
            .map(|mut t| {
                let mut d = vec![0; n - 1];
                for x in d.iter_mut().rev() {
                    *x = t % order;
                    t /= order;
                }
                d
            })
            .collect()
    } else {
        (0..opts.samples).map(|_| (0..n - 1).map(|_| rng.random_range(0..order)).collect()).collect()
    };
    let mut failure = None;
    'outer: for t in &tuples {
        for pos in 0..n {
            let mut f: Vec<ElementaryLabel> = t.iter().map(|&i| s.label(i)).collect();
            f.insert(pos, zero);
            if !s.mul(&f).is_zero() {
                failure = Some(format!("zero does not absorb at position {}", pos + 1));
                break 'outer;
            }
        }
    }
    report.zero_absorption = Some(failure.is_none());
    report.passed &= failure.is_none();
    Ok(finish(report, failure))
}

/// The n-ary group of phased full Σ-matrices, order `4q`.
pub fn build_full_group(n: usize, q: u32, opts: &BuildOptions) -> Result<StructureReport> {
    let g = FullGroup::new(n, q)?;
    let mut report = base_report(&g, 4 * q as u64, opts)?;
    let e = PhasedFull { q: g.q, n, j: SigmaIndex::S0, r: 0 };
    let (indices, _) = element_indices(g.order(), opts.seed);
    let id_fail = check_identity(&g, &e, &indices);
    let (q_fail, dev) = check_querelement(&g, full_querelement, &indices, opts.tol);
    report.identity = Some(e.to_string());
    report.identity_verified = Some(id_fail.is_none());
    report.querelement = Some(q_fail.is_none());
    report.oracle_max_deviation = report.oracle_max_deviation.max(dev);
    report.passed &= id_fail.is_none() && q_fail.is_none();
    Ok(finish(report, id_fail.or(q_fail)))
}

/// The n-ary group of element-wise phased heterogeneous Σ-matrices. The
/// enumerated order `(4q)^{n-1}` is reported next to the quoted count
/// `(4q(n-1))⁴`.
pub fn build_het_group(n: usize, q: u32, opts: &BuildOptions) -> Result<StructureReport> {
    let g = HetGroup::new(n, q)?;
    let claimed = (4 * q as u64 * (n as u64 - 1)).saturating_pow(4);
    let mut report = base_report(&g, claimed, opts)?;
    let e = PhasedHet::identity(g.q, n);
    let (indices, _) = element_indices(g.order(), opts.seed);
    // blocks differ, so E is neutral only with the element at either end
    let id_fail = check_identity_at(&g, &e, &indices, &[0, n - 1]);
    let middle: Vec<usize> = (1..n - 1).collect();
    let middle_fail = check_identity_at(&g, &e, &indices, &middle);
    let quer = |a: &PhasedHet| if n == 3 { het_querelement(a).expect("arity 3") } else { het_querelement_general(a) };
    let (mut q_fail, mut dev) = check_querelement(&g, quer, &indices, opts.tol);
    if n == 3 && q_fail.is_none() {
        // ternary querelement is the matrix inverse
        for &i in &indices {
            let a = g.label(i);
            let d = oracle::inverse_deviation(&a, &quer(&a));
            dev = dev.max(d);
            if d > opts.tol {
                q_fail = Some(format!("querelement of {a} is not the matrix inverse (deviation {d:e})"));
                break;
            }
        }
    }
    if let Some(w) = middle_fail {
        report.note = Some(format!("E is a left and right identity only: {w}"));
    }
    if report.order_discrepancy {
        let msg = format!(
            "enumerated order (4q)^(n-1) = {} differs from the quoted count (4q(n-1))^4 = {}",
            report.order, claimed
        );
        report.note = Some(match report.note.take() {
            Some(prev) => format!("{msg}; {prev}"),
            None => msg,
        });
    }
    report.identity = Some(e.to_string());
    report.identity_verified = Some(id_fail.is_none());
    report.querelement = Some(q_fail.is_none());
    report.oracle_max_deviation = report.oracle_max_deviation.max(dev);
    report.passed &= id_fail.is_none() && q_fail.is_none();
    Ok(finish(report, id_fail.or(q_fail)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: u32) -> PhaseModulus {
        PhaseModulus::new(v).unwrap()
    }
    fn s(j: u8) -> SigmaIndex {
        SigmaIndex::new(j).unwrap()
    }

    #[test]
    fn q12_members() {
        assert_eq!(Q12.len(), 12);
        for v in Q12 {
            assert_eq!(360 % v, 0);
            assert_eq!(v % 4, 0);
        }
        let all: Vec<u32> = (1..=360).filter(|d| 360 % d == 0 && d % 4 == 0).collect();
        assert_eq!(all, Q12.to_vec());
        assert!(matches!(PhaseModulus::new(6), Err(Error::Domain(_))));
        assert!(PhaseModulus::new(16).is_err());
    }

    #[test]
    fn levi_civita_phases() {
        assert_eq!(levi_civita_phase(s(1), s(2), s(3), q(4)), (1, Some(0)));
        assert_eq!(levi_civita_phase(s(2), s(1), s(3), q(4)), (1, Some(2)));
        assert_eq!(levi_civita_phase(s(2), s(1), s(3), q(12)), (1, Some(6)));
        assert_eq!(levi_civita_phase(s(1), s(1), s(2), q(4)), (0, None));
    }

    #[test]
    fn pauli_examples() {
        let p = |j, r, m| PhasedSigma::new(q(m), s(j), r);
        assert_eq!(pauli_mul(p(1, 0, 4), p(2, 0, 4)).unwrap(), p(3, 1, 4));
        assert_eq!(pauli_mul(p(2, 0, 4), p(1, 0, 4)).unwrap(), p(3, 3, 4));
        assert_eq!(pauli_mul(p(0, 0, 8), p(2, 5, 8)).unwrap(), p(2, 5, 8));
        assert_eq!(pauli_mul(p(1, 3, 8), p(1, 3, 8)).unwrap(), p(0, 6, 8));
        assert!(matches!(pauli_mul(p(1, 0, 4), p(1, 0, 8)), Err(Error::Domain(_))));
    }

    #[test]
    fn elementary_examples() {
        let e = |j, k, r| ElementaryLabel::Elem(PhasedElementary::new(q(4), 3, s(j), k, r).unwrap());
        assert_eq!(elementary_nary_mul(&[e(1, 1, 0), e(2, 2, 0), e(3, 1, 0)], 3).unwrap(), e(0, 1, 1));
        assert_eq!(elementary_nary_mul(&[e(1, 1, 0), e(1, 2, 0), e(1, 1, 0)], 3).unwrap(), e(1, 1, 0));
        assert_eq!(elementary_nary_mul(&[e(1, 2, 0), e(1, 1, 0), e(2, 2, 1)], 3).unwrap(), e(2, 2, 1));
        let z = ElementaryLabel::Zero { n: 3 };
        for pos in 0..3 {
            let mut f = vec![e(1, 1, 0), e(1, 2, 0), e(1, 1, 0)];
            f[pos] = z;
            assert_eq!(elementary_nary_mul(&f, 3).unwrap(), z);
        }
        assert!(PhasedElementary::new(q(4), 3, s(1), 3, 0).is_err());
        let other_q = ElementaryLabel::Elem(PhasedElementary::new(q(8), 3, s(1), 1, 0).unwrap());
        assert!(matches!(elementary_nary_mul(&[e(1, 1, 0), e(1, 2, 0), other_q], 3), Err(Error::Domain(_))));
        assert!(matches!(elementary_nary_mul(&[e(1, 1, 0), e(1, 2, 0)], 3), Err(Error::Arity { .. })));
    }

    #[test]
    fn full_examples() {
        let f = |j, r| PhasedFull::new(q(4), 3, s(j), r).unwrap();
        assert_eq!(full_nary_mul(&[f(1, 0), f(2, 0), f(3, 0)], 3).unwrap(), f(0, 1));
        assert_eq!(full_nary_mul(&[f(0, 0), f(0, 0), f(2, 3)], 3).unwrap(), f(2, 3));
        assert_eq!(full_nary_mul(&[f(1, 1), f(1, 1), f(1, 1)], 3).unwrap(), f(1, 3));
        assert!(matches!(full_nary_mul(&[f(1, 1), f(1, 1)], 3), Err(Error::Arity { .. })));
        assert_eq!(full_nary_mul(&[f(1, 1); 5], 3).unwrap(), f(1, 1));
    }

    #[test]
    fn full_querelement_examples() {
        let f = |j, r| PhasedFull::new(q(4), 3, s(j), r).unwrap();
        assert_eq!(full_querelement(&f(2, 1)), f(2, 3));
        assert_eq!(full_querelement(&f(2, 0)), f(2, 0));
        let g4 = PhasedFull::new(q(4), 4, s(3), 0).unwrap();
        assert_eq!(full_querelement(&g4).j(), SigmaIndex::S0);
    }

    #[test]
    fn het_examples() {
        let h = |a: (u8, i64), b: (u8, i64)| PhasedHet::new(q(4), &[(s(a.0), a.1), (s(b.0), b.1)]).unwrap();
        let out = het_nary_mul(&[h((1, 0), (2, 0)), h((1, 0), (2, 0)), h((3, 0), (3, 0))], 3).unwrap();
        assert_eq!(out, h((0, 1), (0, 3)));
        let e = h((0, 0), (0, 0));
        assert_eq!(het_nary_mul(&[e.clone(), e.clone(), e.clone()], 3).unwrap(), e);
        assert_eq!(het_querelement(&h((1, 1), (2, 2))).unwrap(), h((2, 2), (1, 3)));
        let x = h((1, 1), (3, 2));
        assert_eq!(het_querelement(&het_querelement(&x).unwrap()).unwrap(), x);
        assert_eq!(het_querelement_general(&x), het_querelement(&x).unwrap());
        let h4 = PhasedHet::identity(q(4), 4);
        assert!(matches!(het_querelement(&h4), Err(Error::Unsupported(_))));
    }

    #[test]
    fn het_general_querelement_relation() {
        let g = HetGroup::new(4, 4).unwrap();
        for i in (0..g.order()).step_by(37) {
            let a = g.label(i);
            let qa = het_querelement_general(&a);
            for pos in 0..4 {
                let mut f = vec![a.clone(); 4];
                f[pos] = qa.clone();
                assert_eq!(g.mul(&f), a);
            }
        }
    }

    fn roundtrip<F: Family>(f: &F) {
        for i in 0..f.order() {
            assert_eq!(f.index(&f.label(i)), i);
        }
    }

    #[test]
    fn enumerations_are_bijective() {
        roundtrip(&PauliGroup::new(12).unwrap());
        roundtrip(&ElementarySemigroup::new(4, 8).unwrap());
        roundtrip(&FullGroup::new(5, 20).unwrap());
        roundtrip(&HetGroup::new(4, 4).unwrap());
    }

    #[test]
    fn orders() {
        assert_eq!(PauliGroup::new(360).unwrap().order(), 1440);
        assert_eq!(ElementarySemigroup::new(3, 4).unwrap().order(), 33);
        assert_eq!(ElementarySemigroup::new(3, 8).unwrap().order(), 65);
        assert_eq!(ElementarySemigroup::new(4, 4).unwrap().order(), 49);
        assert_eq!(FullGroup::new(3, 12).unwrap().order(), 48);
        assert_eq!(HetGroup::new(3, 4).unwrap().order(), 256);
    }

    #[test]
    fn pauli_q4_report() {
        let r = build_pauli_group(4, &BuildOptions::default()).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.order, 16);
        assert!(r.closure_exhaustive && r.assoc_exhaustive);
        assert_eq!(r.closure_checked, 256);
        assert_eq!(r.identity.as_deref(), Some("0:0"));
        // element orders of the Pauli group: 1 (I), 2 (-I, ±σ_k), 4 (±iI, ±iσ_k)
        let expect: BTreeMap<u64, u64> = [(1, 1), (2, 7), (4, 8)].into_iter().collect();
        assert_eq!(r.order_histogram, expect);
    }

    #[test]
    fn elementary_report_small() {
        let r = build_elementary_semigroup(3, 4, &BuildOptions::default()).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.order, 33);
        assert_eq!(r.closure_checked, 35_937);
        assert_eq!(r.zero_absorption, Some(true));
        assert_eq!(r.querelement, None);
        assert!(!r.order_discrepancy);
    }

    #[test]
    fn cayley_csv_shape() {
        let mut buf = Vec::new();
        let rows = write_cayley_csv(&PauliGroup::new(4).unwrap(), 1_000_000, &mut buf).unwrap();
        assert_eq!(rows, 256);
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("a1,a2,result_j,result_k,result_r"));
        assert_eq!(lines.next(), Some("0:0,0:0,0,,0"));
        assert!(text.contains("\n1:0,2:0,3,,1\n"));
        assert_eq!(text.lines().count(), 257);

        let mut buf = Vec::new();
        write_cayley_csv(&ElementarySemigroup::new(3, 4).unwrap(), 1_000_000, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("a1,a2,a3,result_j,result_k,result_r\nZ,Z,Z,Z,Z,Z\n"));
        assert!(text.contains("\n1@1:0,2@2:0,3@1:0,0,1,1\n"));

        let err = write_cayley_csv(&HetGroup::new(3, 4).unwrap(), 1000, &mut Vec::new());
        assert!(matches!(err, Err(Error::BudgetExceeded { .. })));
    }
}
