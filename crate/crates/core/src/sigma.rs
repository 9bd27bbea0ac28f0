//! Elementary, full and heterogeneous Σ-matrices.
//!
//! Block positions `k` are 1-based throughout the public API, running over
//! `1..=n-1`. Products are computed block-wise with the exact sigma algebra
//! of [`crate::pauli`]; every coefficient that appears is a fourth root of
//! unity and is carried as a [`Unit`].

use std::fmt;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::matrix::{self, sigma, BlockCyclicMatrix, DenseMatrix, Matrix2, C64, I, ONE};
use crate::pauli::{sigma_product, SigmaIndex, Unit};
use crate::su2::{is_allowed_count, PolyadicSU2Element};

fn check_arity(arity: usize) -> Result<()> {
    if arity < 2 {
        return Err(Error::Domain(format!("arity {arity} is below 2")));
    }
    Ok(())
}

fn unit_value(u: Unit) -> C64 {
    match u.exponent() {
        0 => ONE,
        1 => I,
        2 => -ONE,
        _ => -I,
    }
}

/// `Σ_j⁽ᵏ⁾`: the cyclic shift matrix whose only nonzero block is `σ_j` at
/// block position `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementarySigma {
    arity: usize,
    j: SigmaIndex,
    k: usize,
}

impl ElementarySigma {
    pub fn new(arity: usize, j: SigmaIndex, k: usize) -> Result<Self> {
        check_arity(arity)?;
        if k == 0 || k > arity - 1 {
            return Err(Error::Domain(format!(
                "block position {k} outside 1..={} for arity {arity}",
                arity - 1
            )));
        }
        Ok(ElementarySigma { arity, j, k })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }
    pub fn j(&self) -> SigmaIndex {
        self.j
    }
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn to_matrix(&self) -> BlockCyclicMatrix {
        let mut blocks = vec![Matrix2::ZERO; self.arity - 1];
        blocks[self.k - 1] = sigma(self.j);
        BlockCyclicMatrix::new(self.arity, blocks).expect("arity checked")
    }

    /// All `4(n-1)` elementary matrices of the given arity.
    pub fn all(arity: usize) -> Result<Vec<Self>> {
        check_arity(arity)?;
        Ok((1..arity)
            .flat_map(|k| SigmaIndex::ALL.into_iter().map(move |j| ElementarySigma { arity, j, k }))
            .collect())
    }
}

impl fmt::Display for ElementarySigma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.j, self.k)
    }
}

pub fn elementary(arity: usize, j: SigmaIndex, k: usize) -> Result<BlockCyclicMatrix> {
    Ok(ElementarySigma::new(arity, j, k)?.to_matrix())
}

/// Builds `Σ_j⁽ᵏ⁾` as the outer product of a block column holding `I₂` at
/// position `k` and a block row holding `σ_j` at the next cyclic position.
/// The row is the block column laid out horizontally; blocks themselves are
/// not transposed.
pub fn elementary_outer(arity: usize, j: SigmaIndex, k: usize) -> Result<DenseMatrix> {
    let e = ElementarySigma::new(arity, j, k)?;
    let nb = arity - 1;
    let column = |pos: usize, b: Matrix2| -> Vec<Matrix2> {
        let mut v = vec![Matrix2::ZERO; nb];
        v[pos] = b;
        v
    };
    let v = column(e.k - 1, Matrix2::IDENTITY);
    let s = column(e.k % nb, sigma(j));
    let mut out = DenseMatrix::zeros(2 * nb);
    for (bi, vb) in v.iter().enumerate() {
        for (bj, sb) in s.iter().enumerate() {
            out.set_block(bi, bj, &(*vb * *sb));
        }
    }
    Ok(out)
}

/// `Σ_j = Σ_j⁽¹⁾ + … + Σ_j⁽ⁿ⁻¹⁾`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FullSigma {
    arity: usize,
    j: SigmaIndex,
}

impl FullSigma {
    pub fn new(arity: usize, j: SigmaIndex) -> Result<Self> {
        check_arity(arity)?;
        Ok(FullSigma { arity, j })
    }
    pub fn arity(&self) -> usize {
        self.arity
    }
    pub fn j(&self) -> SigmaIndex {
        self.j
    }
    pub fn to_matrix(&self) -> BlockCyclicMatrix {
        BlockCyclicMatrix::new(self.arity, vec![sigma(self.j); self.arity - 1]).expect("arity checked")
    }
}

pub fn full(arity: usize, j: SigmaIndex) -> Result<BlockCyclicMatrix> {
    Ok(FullSigma::new(arity, j)?.to_matrix())
}

/// `Σ^het_{j₁…j_{n-1}}`: block `k` carries `σ_{j_k}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HetSigma {
    js: Vec<SigmaIndex>,
}

impl HetSigma {
    pub fn new(arity: usize, js: Vec<SigmaIndex>) -> Result<Self> {
        check_arity(arity)?;
        if js.len() != arity - 1 {
            return Err(Error::Domain(format!(
                "arity {arity} needs {} indices, got {}",
                arity - 1,
                js.len()
            )));
        }
        Ok(HetSigma { js })
    }
    pub fn arity(&self) -> usize {
        self.js.len() + 1
    }
    pub fn js(&self) -> &[SigmaIndex] {
        &self.js
    }
    pub fn is_homogeneous(&self) -> bool {
        self.js.windows(2).all(|w| w[0] == w[1])
    }
    pub fn to_matrix(&self) -> BlockCyclicMatrix {
        BlockCyclicMatrix::from_blocks(self.js.iter().map(|j| sigma(*j)).collect()).expect("arity checked")
    }
    /// Every index tuple `(j₁, …, j_{n-1})`, lexicographic.
    pub fn all(arity: usize) -> Result<Vec<Self>> {
        check_arity(arity)?;
        let nb = arity - 1;
        Ok((0..4usize.pow(nb as u32))
            .map(|mut code| {
                let mut js = vec![SigmaIndex::S0; nb];
                for slot in js.iter_mut().rev() {
                    *slot = SigmaIndex::ALL[code % 4];
                    code /= 4;
                }
                HetSigma { js }
            })
            .collect())
    }
}

impl fmt::Display for HetSigma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in &self.js {
            write!(f, "{j}")?;
        }
        Ok(())
    }
}

pub fn het(arity: usize, js: Vec<SigmaIndex>) -> Result<BlockCyclicMatrix> {
    Ok(HetSigma::new(arity, js)?.to_matrix())
}

/// Count of heterogeneous index tuples, next to the closed-form count
/// `(n-1)⁴` that is sometimes quoted for it. The two agree only at `n = 3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HetCount {
    pub enumerated: u64,
    pub quoted_formula: u64,
}

impl HetCount {
    pub fn agrees(&self) -> bool {
        self.enumerated == self.quoted_formula
    }
}

pub fn het_count(arity: usize) -> Result<HetCount> {
    check_arity(arity)?;
    let nb = (arity - 1) as u64;
    Ok(HetCount { enumerated: HetSigma::all(arity)?.len() as u64, quoted_formula: nb.pow(4) })
}

/// Block-cyclic matrix of scalar blocks `x_j⁽ᵏ⁾ I₂` for one parameter index `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamBlockMatrix {
    pub j: SigmaIndex,
    pub xs: Vec<f64>,
}

impl ParamBlockMatrix {
    pub fn arity(&self) -> usize {
        self.xs.len() + 1
    }
    pub fn to_matrix(&self) -> BlockCyclicMatrix {
        BlockCyclicMatrix::from_blocks(self.xs.iter().map(|x| Matrix2::scalar(C64::new(*x, 0.0))).collect())
            .expect("at least one block")
    }
    /// Block-cyclic matrix of filled blocks `x_j⁽ᵏ⁾ J₂`, `J₂` the all-ones
    /// 2x2 matrix. This is the factor that makes the Hadamard expansion
    /// exact; with `x I₂` blocks the off-diagonal entries of σ₁, σ₂ vanish.
    pub fn filled_matrix(&self) -> BlockCyclicMatrix {
        BlockCyclicMatrix::from_blocks(
            self.xs.iter().map(|x| {
                let v = C64::new(*x, 0.0);
                Matrix2::new(v, v, v, v)
            }).collect(),
        )
        .expect("at least one block")
    }
}

/// One term `coeff · Σ_j⁽ᵏ⁾` of the elementary expansion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpansionTerm {
    pub sigma: ElementarySigma,
    pub coeff: C64,
}

/// Expands an `SU^[n](2)` element as `Σ_k x₀⁽ᵏ⁾Σ₀⁽ᵏ⁾ + i x⃗⁽ᵏ⁾·Σ⃗⁽ᵏ⁾`.
/// Terms are ordered by block position, then by sigma index.
pub fn expand(e: &PolyadicSU2Element) -> Vec<ExpansionTerm> {
    let n = e.arity();
    e.blocks()
        .iter()
        .enumerate()
        .flat_map(|(k, p)| {
            let coeffs = [C64::new(p.x0, 0.0), C64::new(0.0, p.x[0]), C64::new(0.0, p.x[1]), C64::new(0.0, p.x[2])];
            SigmaIndex::ALL.into_iter().zip(coeffs).map(move |(j, coeff)| ExpansionTerm {
                sigma: ElementarySigma { arity: n, j, k: k + 1 },
                coeff,
            })
        })
        .collect()
}

/// Sums an expansion back into a dense matrix.
pub fn resum(arity: usize, terms: &[ExpansionTerm]) -> Result<DenseMatrix> {
    check_arity(arity)?;
    terms.iter().try_fold(DenseMatrix::zeros(2 * (arity - 1)), |acc, t| {
        if t.sigma.arity != arity {
            return Err(Error::Domain("expansion term of a different arity".into()));
        }
        acc.add(&t.sigma.to_matrix().dense().scale(t.coeff))
    })
}

/// `M = X₀⊙Σ₀ + iX₁⊙Σ₁ + iX₂⊙Σ₂ + iX₃⊙Σ₃`.
#[derive(Clone, Debug, PartialEq)]
pub struct HadamardDecomposition {
    pub params: [ParamBlockMatrix; 4],
    pub sigmas: [FullSigma; 4],
}

impl HadamardDecomposition {
    fn weight(j: usize) -> C64 {
        if j == 0 {
            ONE
        } else {
            I
        }
    }

    /// Dense reconstruction through element-wise products with the filled
    /// parameter matrices.
    pub fn reconstruct(&self) -> Result<DenseMatrix> {
        self.reconstruct_with(ParamBlockMatrix::filled_matrix)
    }

    /// The same sum with scalar `x I₂` parameter blocks. Drops the
    /// off-diagonal σ₁, σ₂ entries, so it matches `M` only when `x₁ = x₂ = 0`.
    pub fn reconstruct_literal(&self) -> Result<DenseMatrix> {
        self.reconstruct_with(ParamBlockMatrix::to_matrix)
    }

    fn reconstruct_with(&self, lift: fn(&ParamBlockMatrix) -> BlockCyclicMatrix) -> Result<DenseMatrix> {
        let dim = 2 * (self.params[0].arity() - 1);
        self.params.iter().zip(&self.sigmas).enumerate().try_fold(
            DenseMatrix::zeros(dim),
            |acc, (j, (x, s))| {
                let term = matrix::hadamard(&lift(x).dense(), &s.to_matrix().dense())?;
                acc.add(&term.scale(Self::weight(j)))
            },
        )
    }

    /// Block-level reconstruction: every block is `Σ_j c_j x_j⁽ᵏ⁾ σ_j`.
    pub fn reconstruct_blocks(&self) -> BlockCyclicMatrix {
        let nb = self.params[0].xs.len();
        let blocks = (0..nb)
            .map(|k| {
                self.params.iter().zip(&self.sigmas).enumerate().fold(Matrix2::ZERO, |acc, (j, (x, s))| {
                    acc + sigma(s.j()).scale(Self::weight(j) * x.xs[k])
                })
            })
            .collect();
        BlockCyclicMatrix::from_blocks(blocks).expect("at least one block")
    }
}

pub fn hadamard_decompose(e: &PolyadicSU2Element) -> HadamardDecomposition {
    let n = e.arity();
    let params = std::array::from_fn(|j| ParamBlockMatrix {
        j: SigmaIndex::ALL[j],
        xs: e.blocks().iter().map(|p| if j == 0 { p.x0 } else { p.x[j - 1] }).collect(),
    });
    let sigmas = std::array::from_fn(|j| FullSigma { arity: n, j: SigmaIndex::ALL[j] });
    HadamardDecomposition { params, sigmas }
}

/// A full Σ-matrix times a fourth root of unity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SignedFull {
    pub unit: Unit,
    pub sigma: FullSigma,
}

impl SignedFull {
    pub fn dense(&self) -> DenseMatrix {
        self.sigma.to_matrix().dense().scale(unit_value(self.unit))
    }
}

/// Result of a product of elementary Σ-matrices: zero, or a single signed
/// elementary matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ElementaryTerm {
    Zero,
    Term { unit: Unit, sigma: ElementarySigma },
}

impl ElementaryTerm {
    pub fn dense(&self, arity: usize) -> DenseMatrix {
        match self {
            ElementaryTerm::Zero => DenseMatrix::zeros(2 * (arity - 1)),
            ElementaryTerm::Term { unit, sigma } => sigma.to_matrix().dense().scale(unit_value(*unit)),
        }
    }
}

/// Heterogeneous Σ-matrix with an independent fourth root of unity per block.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignedHet {
    pub units: Vec<Unit>,
    pub sigma: HetSigma,
}

impl SignedHet {
    pub fn to_matrix(&self) -> BlockCyclicMatrix {
        let blocks = self
            .units
            .iter()
            .zip(self.sigma.js())
            .map(|(u, j)| sigma(*j).scale(unit_value(*u)))
            .collect();
        BlockCyclicMatrix::from_blocks(blocks).expect("at least one block")
    }
}

fn check_factors(arity: usize, count: usize) -> Result<()> {
    if !is_allowed_count(arity, count) {
        return Err(Error::Arity { arity, count });
    }
    Ok(())
}

/// Power of a full Σ-matrix with `l(n-1)+1` factors.
pub fn nary_power(s: FullSigma, count: usize) -> Result<SignedFull> {
    full_product(&vec![s; count])
}

/// Product of `l(n-1)+1` full Σ-matrices of a common arity.
pub fn full_product(factors: &[FullSigma]) -> Result<SignedFull> {
    let arity = factors.first().map(|f| f.arity).ok_or(Error::Arity { arity: 0, count: 0 })?;
    check_factors(arity, factors.len())?;
    if factors.iter().any(|f| f.arity != arity) {
        return Err(Error::Domain("mixed arities in a full Σ product".into()));
    }
    let (unit, j) = sigma_product(factors.iter().map(|f| f.j));
    Ok(SignedFull { unit, sigma: FullSigma { arity, j } })
}

pub fn ternary_full_product(a: FullSigma, b: FullSigma, c: FullSigma) -> Result<SignedFull> {
    if a.arity != 3 {
        return Err(Error::Domain(format!("ternary product needs arity 3, got {}", a.arity)));
    }
    full_product(&[a, b, c])
}

/// Product of `l(n-1)+1` elementary Σ-matrices. Nonzero exactly when the
/// block positions advance by one cyclically from factor to factor; the
/// result then sits at the first factor's position.
pub fn elementary_product(factors: &[ElementarySigma]) -> Result<ElementaryTerm> {
    let arity = factors.first().map(|f| f.arity).ok_or(Error::Arity { arity: 0, count: 0 })?;
    check_factors(arity, factors.len())?;
    if factors.iter().any(|f| f.arity != arity) {
        return Err(Error::Domain("mixed arities in an elementary Σ product".into()));
    }
    let nb = arity - 1;
    let chained = factors.windows(2).all(|w| w[1].k == w[0].k % nb + 1);
    if !chained {
        return Ok(ElementaryTerm::Zero);
    }
    let (unit, j) = sigma_product(factors.iter().map(|f| f.j));
    Ok(ElementaryTerm::Term { unit, sigma: ElementarySigma { arity, j, k: factors[0].k } })
}

pub fn ternary_triple_elementary(
    a: ElementarySigma,
    b: ElementarySigma,
    c: ElementarySigma,
) -> Result<ElementaryTerm> {
    if a.arity != 3 {
        return Err(Error::Domain(format!("ternary product needs arity 3, got {}", a.arity)));
    }
    elementary_product(&[a, b, c])
}

/// Product of `l(n-1)+1` heterogeneous Σ-matrices; output block `k` is the
/// reduced product `σ_{j₁,k} σ_{j₂,k+1} …` along the cyclic chain.
pub fn het_product(factors: &[HetSigma]) -> Result<SignedHet> {
    let arity = factors.first().map(HetSigma::arity).ok_or(Error::Arity { arity: 0, count: 0 })?;
    check_factors(arity, factors.len())?;
    if factors.iter().any(|f| f.arity() != arity) {
        return Err(Error::Domain("mixed arities in a heterogeneous Σ product".into()));
    }
    let nb = arity - 1;
    let (units, js) = (0..nb)
        .map(|k| sigma_product(factors.iter().enumerate().map(|(i, f)| f.js[(k + i) % nb])))
        .unzip();
    Ok(SignedHet { units, sigma: HetSigma { js } })
}

/// `[a,b,c] = abc + bca + cab − acb − bac − cba`.
pub fn ternary_commutator(a: &DenseMatrix, b: &DenseMatrix, c: &DenseMatrix) -> Result<DenseMatrix> {
    ternary_bracket(a, b, c, -ONE)
}

/// `{a,b,c} = abc + bca + cab + acb + bac + cba`.
pub fn ternary_anticommutator(a: &DenseMatrix, b: &DenseMatrix, c: &DenseMatrix) -> Result<DenseMatrix> {
    ternary_bracket(a, b, c, ONE)
}

fn ternary_bracket(a: &DenseMatrix, b: &DenseMatrix, c: &DenseMatrix, odd_sign: C64) -> Result<DenseMatrix> {
    let even = [[a, b, c], [b, c, a], [c, a, b]];
    let odd = [[a, c, b], [b, a, c], [c, b, a]];
    let mut acc = DenseMatrix::zeros(a.dim());
    for t in even {
        acc = acc.add(&DenseMatrix::product(t)?)?;
    }
    for t in odd {
        acc = acc.add(&DenseMatrix::product(t)?.scale(odd_sign))?;
    }
    Ok(acc)
}

/// Which ternary rule table to dump.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleFamily {
    Elementary,
    Full,
}

/// CSV dump of every ternary product in a family, one row per operand
/// triple: `lhs_indices,rhs_label,phase_exponent`. Operands are written as
/// `j@k` (elementary) or `j` (full); the phase exponent `e` stands for `iᵉ`.
/// A zero product is written as `Z` with an empty exponent.
pub fn rule_dump_csv(family: RuleFamily) -> String {
    let mut out = String::from("lhs_indices,rhs_label,phase_exponent\n");
    match family {
        RuleFamily::Elementary => {
            let all = ElementarySigma::all(3).expect("arity 3");
            for a in &all {
                for b in &all {
                    for c in &all {
                        let lhs = format!("{a} {b} {c}");
                        match elementary_product(&[*a, *b, *c]).expect("valid triple") {
                            ElementaryTerm::Zero => writeln!(out, "{lhs},Z,").unwrap(),
                            ElementaryTerm::Term { unit, sigma } => {
                                writeln!(out, "{lhs},{sigma},{}", unit.exponent()).unwrap()
                            }
                        }
                    }
                }
            }
        }
        RuleFamily::Full => {
            for a in SigmaIndex::ALL {
                for b in SigmaIndex::ALL {
                    for c in SigmaIndex::ALL {
                        let f = |j| FullSigma { arity: 3, j };
                        let r = full_product(&[f(a), f(b), f(c)]).expect("valid triple");
                        writeln!(out, "{a} {b} {c},{},{}", r.sigma.j, r.unit.exponent()).unwrap();
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su2::{unit_element, SU2Params};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn s(j: u8) -> SigmaIndex {
        SigmaIndex::new(j).unwrap()
    }

    #[test]
    fn elementary_position_range() {
        assert!(matches!(elementary(3, s(1), 0), Err(Error::Domain(_))));
        assert!(matches!(elementary(3, s(1), 3), Err(Error::Domain(_))));
        assert!(elementary(3, s(1), 2).is_ok());
    }

    #[test]
    fn ternary_elementary_layouts() {
        for j in SigmaIndex::ALL {
            let d1 = elementary(3, j, 1).unwrap().dense();
            let d2 = elementary(3, j, 2).unwrap().dense();
            assert_eq!(d1.block(0, 1), sigma(j));
            assert!(d1.block(1, 0).is_zero());
            assert_eq!(d2.block(1, 0), sigma(j));
            assert!(d2.block(0, 1).is_zero());
        }
    }

    #[test]
    fn outer_product_construction_agrees() {
        for n in 2..=6 {
            for k in 1..n {
                for j in SigmaIndex::ALL {
                    assert_eq!(elementary_outer(n, j, k).unwrap(), elementary(n, j, k).unwrap().dense());
                }
            }
        }
    }

    #[test]
    fn identity_elementaries_sum_to_e() {
        for n in 2..=6 {
            let sum = (1..n).fold(DenseMatrix::zeros(2 * (n - 1)), |acc, k| {
                acc.add(&elementary(n, SigmaIndex::S0, k).unwrap().dense()).unwrap()
            });
            assert_eq!(sum, unit_element(n).unwrap().dense());
        }
    }

    #[test]
    fn full_layouts() {
        for j in SigmaIndex::ALL {
            let d = full(3, j).unwrap().dense();
            assert_eq!(d.block(0, 1), sigma(j));
            assert_eq!(d.block(1, 0), sigma(j));
            let d4 = full(4, j).unwrap().dense();
            assert_eq!(d4.block(0, 1), sigma(j));
            assert_eq!(d4.block(1, 2), sigma(j));
            assert_eq!(d4.block(2, 0), sigma(j));
            assert!(d4.block(0, 2).is_zero());
        }
        assert_eq!(full(5, SigmaIndex::S0).unwrap(), unit_element(5).unwrap());
    }

    #[test]
    fn het_homogeneous_is_full() {
        for j in SigmaIndex::ALL {
            assert_eq!(het(4, vec![j; 3]).unwrap(), full(4, j).unwrap());
        }
        assert!(het(4, vec![s(1); 2]).is_err());
    }

    #[test]
    fn het_counts() {
        let c3 = het_count(3).unwrap();
        assert_eq!(c3.enumerated, 16);
        assert!(c3.agrees());
        let c4 = het_count(4).unwrap();
        assert_eq!(c4.enumerated, 64);
        assert_eq!(c4.quoted_formula, 81);
        assert!(!c4.agrees());
    }

    #[test]
    fn expansion_of_e() {
        let e = PolyadicSU2Element::identity(4).unwrap();
        for t in expand(&e) {
            let expect = if t.sigma.j.is_identity() { ONE } else { C64::new(0.0, 0.0) };
            assert_eq!(t.coeff, expect);
        }
    }

    #[test]
    fn expansion_single_block_perturbation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = PolyadicSU2Element::random(4, &mut rng).unwrap();
        let mut blocks = a.blocks().to_vec();
        blocks[1] = SU2Params::random(&mut rng);
        let b = PolyadicSU2Element::new(4, blocks).unwrap();
        let (ta, tb) = (expand(&a), expand(&b));
        for (x, y) in ta.iter().zip(&tb) {
            assert_eq!(x.sigma, y.sigma);
            if x.sigma.k != 2 {
                assert_eq!(x.coeff, y.coeff);
            }
        }
    }

    #[test]
    fn hadamard_all_real() {
        let e = PolyadicSU2Element::identity(3).unwrap();
        let h = hadamard_decompose(&e);
        for x in &h.params[1..] {
            assert!(x.xs.iter().all(|v| *v == 0.0));
        }
        assert_eq!(h.reconstruct().unwrap(), unit_element(3).unwrap().dense());
    }

    #[test]
    fn hadamard_reconstruction_needs_filled_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let e = PolyadicSU2Element::random(4, &mut rng).unwrap();
        let h = hadamard_decompose(&e);
        let dense = e.to_matrix().dense();
        assert!(h.reconstruct().unwrap().max_deviation(&dense) <= 1e-15);
        assert!(h.reconstruct_literal().unwrap().max_deviation(&dense) > 1e-3);
        let real = PolyadicSU2Element::new(3, vec![SU2Params::new(0.6, [0.0, 0.0, 0.8]).unwrap(); 2]).unwrap();
        let hr = hadamard_decompose(&real);
        assert_eq!(hr.reconstruct_literal().unwrap(), hr.reconstruct().unwrap());
    }

    #[test]
    fn hadamard_param_layout_n3() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let e = PolyadicSU2Element::random(3, &mut rng).unwrap();
        let h = hadamard_decompose(&e);
        for (j, x) in h.params.iter().enumerate() {
            let d = x.to_matrix().dense();
            let (p1, p2) = (e.blocks()[0], e.blocks()[1]);
            let get = |p: SU2Params| if j == 0 { p.x0 } else { p.x[j - 1] };
            assert_eq!(d.block(0, 1), Matrix2::scalar(C64::new(get(p1), 0.0)));
            assert_eq!(d.block(1, 0), Matrix2::scalar(C64::new(get(p2), 0.0)));
        }
    }

    #[test]
    fn full_powers() {
        for j in SigmaIndex::ALL {
            let f3 = FullSigma::new(3, j).unwrap();
            assert_eq!(nary_power(f3, 3).unwrap(), SignedFull { unit: Unit::ONE, sigma: f3 });
            let f4 = FullSigma::new(4, j).unwrap();
            let p = nary_power(f4, 4).unwrap();
            assert_eq!(p.sigma.j(), SigmaIndex::S0);
            assert_eq!(p.unit, Unit::ONE);
        }
        assert!(matches!(nary_power(FullSigma::new(3, s(1)).unwrap(), 4), Err(Error::Arity { .. })));
        // (Σ₀)^{n-1} Σ_j = Σ_j
        for n in 3..=6 {
            for j in SigmaIndex::SPATIAL {
                let mut fs = vec![FullSigma::new(n, SigmaIndex::S0).unwrap(); n - 1];
                fs.push(FullSigma::new(n, j).unwrap());
                assert_eq!(full_product(&fs).unwrap().sigma.j(), j);
            }
        }
    }

    #[test]
    fn elementary_triples_examples() {
        let e = |j, k| ElementarySigma::new(3, s(j), k).unwrap();
        assert_eq!(
            ternary_triple_elementary(e(1, 1), e(2, 2), e(3, 1)).unwrap(),
            ElementaryTerm::Term { unit: Unit::I, sigma: e(0, 1) }
        );
        assert_eq!(
            ternary_triple_elementary(e(1, 1), e(1, 2), e(2, 1)).unwrap(),
            ElementaryTerm::Term { unit: Unit::ONE, sigma: e(2, 1) }
        );
        assert_eq!(ternary_triple_elementary(e(1, 1), e(2, 1), e(3, 1)).unwrap(), ElementaryTerm::Zero);
        let e4 = ElementarySigma::new(4, s(1), 1).unwrap();
        assert!(ternary_triple_elementary(e4, e4, e4).is_err());
    }

    #[test]
    fn full_triples_examples() {
        let f = |j| FullSigma::new(3, s(j)).unwrap();
        assert_eq!(ternary_full_product(f(1), f(2), f(0)).unwrap(), SignedFull { unit: Unit::I, sigma: f(3) });
        assert_eq!(ternary_full_product(f(0), f(0), f(2)).unwrap(), SignedFull { unit: Unit::ONE, sigma: f(2) });
        assert_eq!(ternary_full_product(f(1), f(2), f(3)).unwrap(), SignedFull { unit: Unit::I, sigma: f(0) });
    }

    #[test]
    fn commutator_of_full_sigmas() {
        let f = |j| full(3, s(j)).unwrap().dense();
        let c = ternary_commutator(&f(1), &f(2), &f(3)).unwrap();
        assert_eq!(c, f(0).scale(C64::new(0.0, 6.0)));
        let swapped = ternary_commutator(&f(2), &f(1), &f(3)).unwrap();
        assert_eq!(swapped, c.scale(-ONE));
        let a = ternary_anticommutator(&f(1), &f(1), &f(2)).unwrap();
        assert_eq!(a, f(2).scale(C64::new(2.0, 0.0)));
    }

    #[test]
    fn rule_dump_sizes() {
        let el = rule_dump_csv(RuleFamily::Elementary);
        assert_eq!(el.lines().count(), 1 + 512);
        assert!(el.contains("1@1 2@2 3@1,0@1,1\n"));
        let fl = rule_dump_csv(RuleFamily::Full);
        assert_eq!(fl.lines().count(), 1 + 64);
        assert!(fl.contains("1 2 3,0,1\n"));
    }
}
