//! Dense complex matrices: 2x2 blocks, block-cyclic shift matrices and
//! general square matrices used by the verification oracle.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::SigmaIndex;

pub type C64 = Complex64;

/// Default entrywise tolerance for products of a handful of unit-magnitude factors.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Tolerance for determinants of the larger dense matrices.
pub const DET_TOL: f64 = 1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Entrywise deviation `max(|Δre|, |Δim|)`.
#[inline]
pub fn deviation(a: C64, b: C64) -> f64 {
    (a.re - b.re).abs().max((a.im - b.im).abs())
}

#[inline]
pub fn approx_eq(a: C64, b: C64, tol: f64) -> bool {
    deviation(a, b) <= tol
}

/// `e^{2πi r/q}`, exact at multiples of a quarter turn.
pub fn root_of_unity(r: i64, q: u32) -> C64 {
    let q = q as i64;
    let r = r.rem_euclid(q);
    if (4 * r) % q == 0 {
        return match 4 * r / q {
            0 => ONE,
            1 => I,
            2 => -ONE,
            _ => -I,
        };
    }
    let theta = std::f64::consts::TAU * r as f64 / q as f64;
    C64::new(theta.cos(), theta.sin())
}

/// A 2x2 complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Matrix2(pub [[C64; 2]; 2]);

impl Matrix2 {
    pub const ZERO: Matrix2 = Matrix2([[ZERO, ZERO], [ZERO, ZERO]]);
    pub const IDENTITY: Matrix2 = Matrix2([[ONE, ZERO], [ZERO, ONE]]);

    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Matrix2([[a, b], [c, d]])
    }

    pub fn scalar(s: C64) -> Self {
        Matrix2([[s, ZERO], [ZERO, s]])
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Matrix2([[s * m[0][0], s * m[0][1]], [s * m[1][0], s * m[1][1]]])
    }

    pub fn det(&self) -> C64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn hermitian(&self) -> Self {
        let m = &self.0;
        Matrix2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn inverse(&self) -> Result<Self> {
        let d = self.det();
        if d.norm() < 1e-14 {
            return Err(Error::Domain("singular 2x2 block".into()));
        }
        let m = &self.0;
        let inv = 1.0 / d;
        Ok(Matrix2([
            [m[1][1] * inv, -m[0][1] * inv],
            [-m[1][0] * inv, m[0][0] * inv],
        ]))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().all(|z| *z == ZERO)
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_deviation(&self, other: &Matrix2) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| deviation(*a, *b))
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Matrix2, tol: f64) -> bool {
        self.max_deviation(other) <= tol
    }
}

impl Mul for Matrix2 {
    type Output = Matrix2;
    fn mul(self, rhs: Matrix2) -> Matrix2 {
        let (a, b) = (&self.0, &rhs.0);
        Matrix2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

impl Add for Matrix2 {
    type Output = Matrix2;
    fn add(self, rhs: Matrix2) -> Matrix2 {
        let (a, b) = (&self.0, &rhs.0);
        Matrix2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Matrix2 {
    type Output = Matrix2;
    fn sub(self, rhs: Matrix2) -> Matrix2 {
        self + rhs.scale(-ONE)
    }
}

/// The literal sigma matrix `σ_j`.
pub fn sigma(j: SigmaIndex) -> Matrix2 {
    match j.get() {
        0 => Matrix2::IDENTITY,
        1 => Matrix2::new(ZERO, ONE, ONE, ZERO),
        2 => Matrix2::new(ZERO, -I, I, ZERO),
        _ => Matrix2::new(ONE, ZERO, ZERO, -ONE),
    }
}

/// Square complex matrix in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        DenseMatrix { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn filled(dim: usize, value: C64) -> Self {
        DenseMatrix { dim, data: vec![value; dim * dim] }
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Domain("rows do not form a square matrix".into()));
        }
        Ok(DenseMatrix { dim, data: rows.into_iter().flatten().collect() })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    /// Copies the 2x2 block whose top-left corner is `(2*bi, 2*bj)`.
    pub fn block(&self, bi: usize, bj: usize) -> Matrix2 {
        let (r, c) = (2 * bi, 2 * bj);
        Matrix2([
            [self[(r, c)], self[(r, c + 1)]],
            [self[(r + 1, c)], self[(r + 1, c + 1)]],
        ])
    }

    pub fn set_block(&mut self, bi: usize, bj: usize, b: &Matrix2) {
        let (r, c) = (2 * bi, 2 * bj);
        self[(r, c)] = b.0[0][0];
        self[(r, c + 1)] = b.0[0][1];
        self[(r + 1, c)] = b.0[1][0];
        self[(r + 1, c + 1)] = b.0[1][1];
    }

    pub fn scale(&self, s: C64) -> Self {
        DenseMatrix { dim: self.dim, data: self.data.iter().map(|z| s * z).collect() }
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(DenseMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(DenseMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| *z == ZERO)
    }

    /// Largest entrywise deviation; `f64::INFINITY` when dimensions differ.
    pub fn max_deviation(&self, other: &DenseMatrix) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| deviation(*a, *b))
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &DenseMatrix, tol: f64) -> bool {
        self.max_deviation(other) <= tol
    }

    /// Matrix product of all `factors` from left to right.
    pub fn product<'a, I>(factors: I) -> Result<DenseMatrix>
    where
        I: IntoIterator<Item = &'a DenseMatrix>,
    {
        let mut it = factors.into_iter();
        let first = it
            .next()
            .ok_or_else(|| Error::Domain("empty matrix product".into()))?
            .clone();
        it.try_fold(first, |acc, m| mat_mul(&acc, m))
    }

    fn check_same_dim(&self, other: &DenseMatrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Domain(format!(
                "dimension mismatch: {} vs {}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.dim + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.dim + c]
    }
}

impl From<Matrix2> for DenseMatrix {
    fn from(m: Matrix2) -> Self {
        DenseMatrix { dim: 2, data: m.0.iter().flatten().copied().collect() }
    }
}

impl fmt::Display for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.data.chunks(self.dim) {
            let cells: Vec<String> = row.iter().map(|z| format!("{:+.3}{:+.3}i", z.re, z.im)).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

pub fn mat_mul(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    a.check_same_dim(b)?;
    let n = a.dim;
    let mut out = DenseMatrix::zeros(n);
    mat_mul_into(a, b, &mut out);
    Ok(out)
}

/// `out = a * b` for equal dimensions; `out` must not alias the inputs.
pub fn mat_mul_into(a: &DenseMatrix, b: &DenseMatrix, out: &mut DenseMatrix) {
    let n = a.dim;
    debug_assert!(b.dim == n && out.dim == n);
    for i in 0..n {
        let row = &a.data[i * n..(i + 1) * n];
        let dst = &mut out.data[i * n..(i + 1) * n];
        dst.fill(ZERO);
        for (k, aik) in row.iter().enumerate() {
            if *aik == ZERO {
                continue;
            }
            let brow = &b.data[k * n..(k + 1) * n];
            for (d, bkj) in dst.iter_mut().zip(brow) {
                *d += aik * bkj;
            }
        }
    }
}

pub fn hermitian(a: &DenseMatrix) -> DenseMatrix {
    let n = a.dim;
    let mut out = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            out[(j, i)] = a[(i, j)].conj();
        }
    }
    out
}

/// Element-wise (Hadamard) product.
pub fn hadamard(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    a.check_same_dim(b)?;
    Ok(DenseMatrix {
        dim: a.dim,
        data: a.data.iter().zip(&b.data).map(|(x, y)| x * y).collect(),
    })
}

pub fn trace(a: &DenseMatrix) -> C64 {
    (0..a.dim).map(|i| a[(i, i)]).sum()
}

/// Determinant by LU decomposition with partial pivoting.
pub fn det(a: &DenseMatrix) -> C64 {
    let n = a.dim;
    let mut m = a.data.clone();
    let mut acc = ONE;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[x * n + col].norm().total_cmp(&m[y * n + col].norm()))
            .unwrap_or(col);
        if m[pivot * n + col] == ZERO {
            return ZERO;
        }
        if pivot != col {
            for c in 0..n {
                m.swap(pivot * n + c, col * n + c);
            }
            acc = -acc;
        }
        let p = m[col * n + col];
        acc *= p;
        for r in col + 1..n {
            let f = m[r * n + col] / p;
            if f == ZERO {
                continue;
            }
            for c in col..n {
                let v = m[col * n + c];
                m[r * n + c] -= f * v;
            }
        }
    }
    acc
}

/// A `2(n-1) x 2(n-1)` cyclic shift block matrix: block `k` (0-based) sits
/// at block position `(k, k+1 mod n-1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockCyclicMatrix {
    blocks: Vec<Matrix2>,
}

impl BlockCyclicMatrix {
    pub fn new(arity: usize, blocks: Vec<Matrix2>) -> Result<Self> {
        if arity < 2 {
            return Err(Error::Domain(format!("arity {arity} is below 2")));
        }
        if blocks.len() != arity - 1 {
            return Err(Error::Domain(format!(
                "arity {arity} needs {} blocks, got {}",
                arity - 1,
                blocks.len()
            )));
        }
        Ok(BlockCyclicMatrix { blocks })
    }

    pub fn from_blocks(blocks: Vec<Matrix2>) -> Result<Self> {
        let arity = blocks.len() + 1;
        Self::new(arity, blocks)
    }

    #[inline]
    pub fn arity(&self) -> usize {
        self.blocks.len() + 1
    }

    pub fn blocks(&self) -> &[Matrix2] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &Matrix2 {
        &self.blocks[k]
    }

    pub fn dim(&self) -> usize {
        2 * self.blocks.len()
    }

    /// Lowers to the dense `2(n-1)`-dimensional matrix.
    pub fn dense(&self) -> DenseMatrix {
        let nb = self.blocks.len();
        let mut out = DenseMatrix::zeros(2 * nb);
        for (k, b) in self.blocks.iter().enumerate() {
            out.set_block(k, (k + 1) % nb, b);
        }
        out
    }

    /// Recovers the block list from a dense matrix, rejecting anything that
    /// is not block-cyclic.
    pub fn from_dense(m: &DenseMatrix) -> Result<Self> {
        if m.dim() < 2 || !m.dim().is_multiple_of(2) {
            return Err(Error::Domain(format!("dimension {} is not 2(n-1)", m.dim())));
        }
        let nb = m.dim() / 2;
        for bi in 0..nb {
            for bj in 0..nb {
                if bj != (bi + 1) % nb && !m.block(bi, bj).is_zero() {
                    return Err(Error::Domain(format!(
                        "nonzero block at ({bi}, {bj}) outside the cyclic superdiagonal"
                    )));
                }
            }
        }
        Self::from_blocks((0..nb).map(|k| m.block(k, (k + 1) % nb)).collect())
    }

    pub fn max_deviation(&self, other: &BlockCyclicMatrix) -> f64 {
        if self.arity() != other.arity() {
            return f64::INFINITY;
        }
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.max_deviation(b))
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &BlockCyclicMatrix, tol: f64) -> bool {
        self.max_deviation(other) <= tol
    }
}
