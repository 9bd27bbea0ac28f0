//! The polyadic group `SU^[n](2)`.
//!
//! An element is a `2(n-1) x 2(n-1)` cyclic shift block matrix whose blocks
//! are ordinary `SU(2)` matrices. Only products of `l(n-1)+1` elements are
//! closed, so multiplication is an n-ary operation.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{self, BlockCyclicMatrix, Matrix2, C64, DET_TOL, ONE};

/// Tolerance for the unit-sphere condition on inputs. Looser than the
/// arithmetic tolerance so that values read back from files are accepted.
pub const NORM_TOL: f64 = 1e-9;

/// Parameters `(x₀, x⃗)` of one `SU(2)` block with `x₀² + x⃗² = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct SU2Params {
    pub x0: f64,
    pub x: [f64; 3],
}

#[derive(Deserialize)]
struct RawParams {
    x0: f64,
    x: [f64; 3],
}

impl TryFrom<RawParams> for SU2Params {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        SU2Params::new(raw.x0, raw.x)
    }
}

impl SU2Params {
    pub const IDENTITY: SU2Params = SU2Params { x0: 1.0, x: [0.0; 3] };

    pub fn new(x0: f64, x: [f64; 3]) -> Result<Self> {
        let p = SU2Params { x0, x };
        p.validate()?;
        Ok(p)
    }

    /// Builds parameters without checking the unit-sphere condition.
    pub fn new_unchecked(x0: f64, x: [f64; 3]) -> Self {
        SU2Params { x0, x }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.x0.is_finite() || self.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite SU(2) parameter".into()));
        }
        let n = self.norm_sq();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::Validation(format!(
                "x0^2 + |x|^2 = {n} is not 1 within {NORM_TOL}"
            )));
        }
        Ok(())
    }

    pub fn norm_sq(&self) -> f64 {
        self.x0 * self.x0 + dot(&self.x, &self.x)
    }

    /// Uniform sample on the 3-sphere: a normalized 4d standard Gaussian.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let v: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm > 1e-6 {
                return SU2Params { x0: v[0] / norm, x: [v[1] / norm, v[2] / norm, v[3] / norm] };
            }
        }
    }

    /// The polyadic block `x₀σ₀ + i x⃗·σ⃗`.
    pub fn block(&self) -> Matrix2 {
        let [x1, x2, x3] = self.x;
        Matrix2::new(
            C64::new(self.x0, x3),
            C64::new(x2, x1),
            C64::new(-x2, x1),
            C64::new(self.x0, -x3),
        )
    }

    /// The binary `SU(2)` matrix
    /// `((x₀+ix₁, x₂+ix₃), (-x₂+ix₃, x₀-ix₁))` whose product law is
    /// [`binary_param_mul`]. It equals [`SU2Params::block`] after exchanging
    /// `x₁` and `x₃`.
    pub fn standard_matrix(&self) -> Matrix2 {
        let [x1, x2, x3] = self.x;
        Matrix2::new(
            C64::new(self.x0, x1),
            C64::new(x2, x3),
            C64::new(-x2, x3),
            C64::new(self.x0, -x1),
        )
    }

    /// Largest absolute component difference.
    pub fn max_deviation(&self, other: &SU2Params) -> f64 {
        let mut d = (self.x0 - other.x0).abs();
        for (a, b) in self.x.iter().zip(&other.x) {
            d = d.max((a - b).abs());
        }
        d
    }
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// An element of `SU^[n](2)`: one [`SU2Params`] per block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawElement")]
pub struct PolyadicSU2Element {
    arity: usize,
    blocks: Vec<SU2Params>,
}

#[derive(Deserialize)]
struct RawElement {
    arity: usize,
    blocks: Vec<SU2Params>,
}

impl TryFrom<RawElement> for PolyadicSU2Element {
    type Error = Error;
    fn try_from(raw: RawElement) -> Result<Self> {
        PolyadicSU2Element::new(raw.arity, raw.blocks)
    }
}

impl PolyadicSU2Element {
    pub fn new(arity: usize, blocks: Vec<SU2Params>) -> Result<Self> {
        if arity < 2 {
            return Err(Error::Domain(format!("arity {arity} is below 2")));
        }
        if blocks.len() != arity - 1 {
            return Err(Error::Validation(format!(
                "arity {arity} needs {} blocks, got {}",
                arity - 1,
                blocks.len()
            )));
        }
        for b in &blocks {
            b.validate()?;
        }
        Ok(PolyadicSU2Element { arity, blocks })
    }

    /// The element with all blocks equal to the identity; its matrix is `E`.
    pub fn identity(arity: usize) -> Result<Self> {
        Self::new(arity, vec![SU2Params::IDENTITY; arity.saturating_sub(1)])
    }

    /// An element of the restricted subgroup: every block carries `p`.
    pub fn restricted(arity: usize, p: SU2Params) -> Result<Self> {
        Self::new(arity, vec![p; arity.saturating_sub(1)])
    }

    pub fn random<R: Rng + ?Sized>(arity: usize, rng: &mut R) -> Result<Self> {
        let blocks = (1..arity).map(|_| SU2Params::random(rng)).collect();
        Self::new(arity, blocks)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn blocks(&self) -> &[SU2Params] {
        &self.blocks
    }

    pub fn to_matrix(&self) -> BlockCyclicMatrix {
        BlockCyclicMatrix::new(self.arity, self.blocks.iter().map(SU2Params::block).collect())
            .expect("block count checked at construction")
    }
}

/// `true` when `count = l(n-1)+1` for some `l ≥ 1`.
pub fn is_allowed_count(arity: usize, count: usize) -> bool {
    arity >= 2 && count >= arity && (count - 1).is_multiple_of(arity - 1)
}

/// The n-ary product of `l(n-1)+1` block-cyclic matrices of arity `n`.
///
/// Block `k` of the result is `A₁⁽ᵏ⁾ A₂⁽ᵏ⁺¹⁾ … A_L⁽ᵏ⁺ᴸ⁻¹⁾` with block
/// positions taken cyclically.
pub fn nary_product(elems: &[BlockCyclicMatrix], arity: usize) -> Result<BlockCyclicMatrix> {
    if !is_allowed_count(arity, elems.len()) {
        return Err(Error::Arity { arity, count: elems.len() });
    }
    if let Some(bad) = elems.iter().find(|e| e.arity() != arity) {
        return Err(Error::Domain(format!(
            "factor of arity {} in a product of arity {arity}",
            bad.arity()
        )));
    }
    let nb = arity - 1;
    let blocks = (0..nb)
        .map(|k| {
            elems
                .iter()
                .enumerate()
                .fold(Matrix2::IDENTITY, |acc, (i, e)| acc * *e.block((k + i) % nb))
        })
        .collect();
    BlockCyclicMatrix::new(arity, blocks)
}

/// The querelement `M̃`, the unique solution of `μ[M, …, M, M̃] = M`.
///
/// Block `k` is `(M⁽ᵏ⁺¹⁾ … M⁽ᵏ⁺ⁿ⁻²⁾)⁻¹`; the same matrix solves the
/// equation with `M̃` at any position.
pub fn querelement(m: &BlockCyclicMatrix) -> Result<BlockCyclicMatrix> {
    let nb = m.arity() - 1;
    let blocks = (0..nb)
        .map(|k| {
            (1..nb).try_fold(Matrix2::IDENTITY, |acc, i| {
                Ok::<_, Error>(m.block((k + i) % nb).inverse()? * acc)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    BlockCyclicMatrix::new(m.arity(), blocks)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// A left or right polyadic identity `diag-shift(a⁽¹⁾I₂, …, a⁽ⁿ⁻¹⁾I₂)` with
/// nonzero real coefficients whose product is 1.
///
/// A left identity `E_l` fixes every element placed after `n-1` copies of
/// it, `μ[E_l, …, E_l, M] = M`; a right identity fixes every element placed
/// before `n-1` copies of it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyadicIdentity {
    pub arity: usize,
    pub side: Side,
    pub coeffs: Vec<f64>,
}

impl PolyadicIdentity {
    pub fn new(arity: usize, side: Side, coeffs: Vec<f64>) -> Result<Self> {
        if arity < 2 || coeffs.len() != arity - 1 {
            return Err(Error::Validation(format!(
                "arity {arity} needs {} coefficients, got {}",
                arity.saturating_sub(1),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|a| *a == 0.0 || !a.is_finite()) {
            return Err(Error::Validation("identity coefficients must be finite and nonzero".into()));
        }
        let prod: f64 = coeffs.iter().product();
        if (prod - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!("coefficient product {prod} is not 1")));
        }
        Ok(PolyadicIdentity { arity, side, coeffs })
    }

    pub fn matrix(&self) -> BlockCyclicMatrix {
        let blocks = self.coeffs.iter().map(|a| Matrix2::scalar(C64::new(*a, 0.0))).collect();
        BlockCyclicMatrix::new(self.arity, blocks).expect("coefficient count checked")
    }
}

pub fn polyadic_identity(arity: usize, side: Side, coeffs: Vec<f64>) -> Result<BlockCyclicMatrix> {
    Ok(PolyadicIdentity::new(arity, side, coeffs)?.matrix())
}

/// The `E` matrix: identity blocks on every cyclic position.
pub fn unit_element(arity: usize) -> Result<BlockCyclicMatrix> {
    BlockCyclicMatrix::new(arity, vec![Matrix2::IDENTITY; arity.saturating_sub(1)])
}

/// Sum of the ordinary traces of the blocks.
pub fn polyadic_trace(m: &BlockCyclicMatrix) -> C64 {
    m.blocks().iter().map(Matrix2::trace).sum()
}

/// Parameters of the product `M(p)·M(q)` of two binary `SU(2)` matrices in
/// the [`SU2Params::standard_matrix`] layout.
pub fn binary_param_mul(p: &SU2Params, q: &SU2Params) -> Result<SU2Params> {
    p.validate()?;
    q.validate()?;
    let (a, b) = (&p.x, &q.x);
    let x0 = p.x0 * q.x0 - a[0] * b[0] - a[1] * b[1] - a[2] * b[2];
    let x1 = a[0] * q.x0 + p.x0 * b[0] + a[1] * b[2] - a[2] * b[1];
    let x2 = a[1] * q.x0 + p.x0 * b[1] + a[2] * b[0] - a[0] * b[2];
    let x3 = a[2] * q.x0 + p.x0 * b[2] + a[0] * b[1] - a[1] * b[0];
    Ok(SU2Params::new_unchecked(x0, [x1, x2, x3]))
}

/// Parameters of the triple block product `M(a)·M(b)·M(c)` in the polyadic
/// block layout `x₀σ₀ + i x⃗·σ⃗`.
pub fn block_triple_product(a: &SU2Params, b: &SU2Params, c: &SU2Params) -> SU2Params {
    let (va, vb, vc) = (&a.x, &b.x, &c.x);
    let ab = dot(va, vb);
    let ac = dot(va, vc);
    let bc = dot(vb, vc);
    let b_x_c = cross(vb, vc);
    let a_x_c = cross(va, vc);
    let a_x_b = cross(va, vb);
    let x0 = a.x0 * b.x0 * c.x0 - a.x0 * bc - b.x0 * ac - c.x0 * ab + dot(va, &b_x_c);
    let x = std::array::from_fn(|i| {
        a.x0 * b.x0 * vc[i] + a.x0 * c.x0 * vb[i] + b.x0 * c.x0 * va[i] - ab * vc[i] + ac * vb[i]
            - bc * va[i]
            - a.x0 * b_x_c[i]
            - b.x0 * a_x_c[i]
            - c.x0 * a_x_b[i]
    });
    SU2Params::new_unchecked(x0, x)
}

/// Ternary product in `SU^[3](2)` in terms of block parameters.
///
/// The first output block is `M⁽¹⁾′ M⁽²⁾″ M⁽¹⁾‴`, the second
/// `M⁽²⁾′ M⁽¹⁾″ M⁽²⁾‴`.
pub fn ternary_param_mul(
    first: &[SU2Params; 2],
    second: &[SU2Params; 2],
    third: &[SU2Params; 2],
) -> Result<[SU2Params; 2]> {
    for p in first.iter().chain(second).chain(third) {
        p.validate()?;
    }
    Ok([
        block_triple_product(&first[0], &second[1], &third[0]),
        block_triple_product(&first[1], &second[0], &third[1]),
    ])
}

/// The binary invariant `x₀′x₀″ + x⃗′·x⃗″`.
pub fn invariant_i2(p: &SU2Params, q: &SU2Params) -> f64 {
    p.x0 * q.x0 + dot(&p.x, &q.x)
}

/// The sign `(-1)^{n-1}` in the quoted determinant law.
pub fn claimed_det_sign(arity: usize) -> C64 {
    if (arity - 1).is_multiple_of(2) {
        ONE
    } else {
        -ONE
    }
}

/// `det M⁽¹⁾ … det M⁽ⁿ⁻¹⁾`. This is the exact determinant of the dense form:
/// the block shift permutes indices by `i -> i + 2`, an even permutation.
pub fn block_det_product(m: &BlockCyclicMatrix) -> C64 {
    m.blocks().iter().fold(ONE, |acc, b| acc * b.det())
}

/// The quoted law `(-1)^{n-1} det M⁽¹⁾ … det M⁽ⁿ⁻¹⁾`.
pub fn block_det_formula(m: &BlockCyclicMatrix) -> C64 {
    claimed_det_sign(m.arity()) * block_det_product(m)
}

/// Determinant of the dense form of `e`, checked against the block formula
/// and against `(-1)^{n-1}` to [`DET_TOL`]. Fails for even `n`, where the
/// dense determinant is `+1`.
pub fn det_law_check(e: &PolyadicSU2Element) -> Result<C64> {
    let m = e.to_matrix();
    let dense = matrix::det(&m.dense());
    let formula = block_det_formula(&m);
    let sign = claimed_det_sign(e.arity());
    let dev = matrix::deviation(dense, formula).max(matrix::deviation(dense, sign));
    if dev > DET_TOL {
        return Err(Error::Validation(format!(
            "det = {dense}, block formula = {formula}, expected {sign}"
        )));
    }
    Ok(dense)
}
