//! Dense-matrix oracle.
//!
//! Every symbolic object lowers to a [`DenseMatrix`]; symbolic products are
//! compared entrywise against literal matrix products. Sweeps over label
//! tuples run on rayon over disjoint contiguous slices and aggregate with
//! order-independent reductions, so summaries do not depend on the number
//! of worker threads.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{mat_mul_into, root_of_unity, sigma, BlockCyclicMatrix, DenseMatrix, Matrix2};
use crate::phase::{ElementaryLabel, Family, FamilyKind, PhasedElementary, PhasedFull, PhasedHet, PhasedSigma};
use crate::su2::{PolyadicSU2Element, SU2Params};

/// Dense realization of a symbolic element.
pub trait Lower {
    fn lower(&self) -> DenseMatrix;
}

fn phased_block(j: crate::SigmaIndex, r: u32, q: u32) -> Matrix2 {
    sigma(j).scale(root_of_unity(r as i64, q))
}

impl Lower for PhasedSigma {
    fn lower(&self) -> DenseMatrix {
        phased_block(self.j(), self.r(), self.q().get()).into()
    }
}

impl Lower for PhasedElementary {
    fn lower(&self) -> DenseMatrix {
        let mut blocks = vec![Matrix2::ZERO; self.arity() - 1];
        blocks[self.k() - 1] = phased_block(self.j(), self.r(), self.q().get());
        BlockCyclicMatrix::from_blocks(blocks).expect("non-empty").dense()
    }
}

impl Lower for ElementaryLabel {
    fn lower(&self) -> DenseMatrix {
        match self {
            ElementaryLabel::Zero { n } => DenseMatrix::zeros(2 * (n - 1)),
            ElementaryLabel::Elem(e) => e.lower(),
        }
    }
}

impl Lower for PhasedFull {
    fn lower(&self) -> DenseMatrix {
        let b = phased_block(self.j(), self.r(), self.q().get());
        BlockCyclicMatrix::from_blocks(vec![b; self.arity() - 1]).expect("non-empty").dense()
    }
}

impl Lower for PhasedHet {
    fn lower(&self) -> DenseMatrix {
        let q = self.q().get();
        let blocks = self.blocks().iter().map(|b| phased_block(b.j(), b.r(), q)).collect();
        BlockCyclicMatrix::from_blocks(blocks).expect("non-empty").dense()
    }
}

impl Lower for BlockCyclicMatrix {
    fn lower(&self) -> DenseMatrix {
        self.dense()
    }
}

impl Lower for PolyadicSU2Element {
    fn lower(&self) -> DenseMatrix {
        self.to_matrix().dense()
    }
}

/// Literal dense product of the lowered factors.
pub fn lowered_product<L: Lower>(factors: &[L]) -> DenseMatrix {
    let lowered: Vec<DenseMatrix> = factors.iter().map(Lower::lower).collect();
    DenseMatrix::product(&lowered).expect("factors of one dimension")
}

/// Deviation between `lower(expected)` and the literal product of the factors.
pub fn product_deviation<L: Lower>(factors: &[L], expected: &L) -> f64 {
    lowered_product(factors).max_deviation(&expected.lower())
}

/// Largest deviation of `ab` and `ba` from the identity.
pub fn inverse_deviation<L: Lower>(a: &L, b: &L) -> f64 {
    let (da, db) = (a.lower(), b.lower());
    let id = DenseMatrix::identity(da.dim());
    let ab = DenseMatrix::product([&da, &db]).expect("same dimension");
    let ba = DenseMatrix::product([&db, &da]).expect("same dimension");
    ab.max_deviation(&id).max(ba.max_deviation(&id))
}

/// Family tag of a [`VerificationCase`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseFamily {
    Pauli,
    Elementary,
    Full,
    Het,
    Su2Params,
}

/// Any symbolic object the oracle can lower.
#[derive(Clone, Debug, PartialEq)]
pub enum Symbol {
    Pauli(PhasedSigma),
    Elementary(ElementaryLabel),
    Full(PhasedFull),
    Het(PhasedHet),
    /// A single SU(2) parameter set in the standard layout `x₀I + i(x₁, x₂, x₃)`
    /// of the binary parameter rule.
    Su2Binary(SU2Params),
    Su2(PolyadicSU2Element),
}

impl Symbol {
    pub fn family(&self) -> CaseFamily {
        match self {
            Symbol::Pauli(_) => CaseFamily::Pauli,
            Symbol::Elementary(_) => CaseFamily::Elementary,
            Symbol::Full(_) => CaseFamily::Full,
            Symbol::Het(_) => CaseFamily::Het,
            Symbol::Su2Binary(_) | Symbol::Su2(_) => CaseFamily::Su2Params,
        }
    }

    fn describe(&self) -> String {
        match self {
            Symbol::Pauli(l) => l.to_string(),
            Symbol::Elementary(l) => l.to_string(),
            Symbol::Full(l) => l.to_string(),
            Symbol::Het(l) => l.to_string(),
            Symbol::Su2Binary(p) => format!("{p:?}"),
            Symbol::Su2(e) => format!("{e:?}"),
        }
    }
}

impl Lower for Symbol {
    fn lower(&self) -> DenseMatrix {
        match self {
            Symbol::Pauli(l) => l.lower(),
            Symbol::Elementary(l) => l.lower(),
            Symbol::Full(l) => l.lower(),
            Symbol::Het(l) => l.lower(),
            Symbol::Su2Binary(p) => p.standard_matrix().into(),
            Symbol::Su2(e) => e.lower(),
        }
    }
}

/// A symbolic claim `operands[0] ⋯ operands[m-1] = expected`.
#[derive(Clone, Debug, PartialEq)]
pub struct VerificationCase {
    pub family: CaseFamily,
    pub operands: Vec<Symbol>,
    pub expected: Symbol,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationOutcome {
    pub passed: bool,
    pub max_abs_deviation: f64,
    pub witness: Option<Vec<String>>,
}

pub fn verify(case: &VerificationCase) -> Result<VerificationOutcome> {
    if case.tolerance.is_nan() || case.tolerance <= 0.0 {
        return Err(Error::Domain(format!("tolerance {} is not positive", case.tolerance)));
    }
    if case.operands.is_empty() {
        return Err(Error::Domain("verification case has no operands".into()));
    }
    let all = case.operands.iter().chain(std::iter::once(&case.expected));
    if let Some(s) = all.clone().find(|s| s.family() != case.family) {
        return Err(Error::Domain(format!("operand {} does not belong to family {:?}", s.describe(), case.family)));
    }
    let lowered: Vec<DenseMatrix> = case.operands.iter().map(Lower::lower).collect();
    let expected = case.expected.lower();
    if lowered.iter().any(|m| m.dim() != expected.dim()) {
        return Err(Error::Domain("operands of different dimensions".into()));
    }
    let product = DenseMatrix::product(&lowered)?;
    let dev = product.max_deviation(&expected);
    let passed = dev <= case.tolerance;
    Ok(VerificationOutcome {
        passed,
        max_abs_deviation: dev,
        witness: (!passed).then(|| case.operands.iter().map(Symbol::describe).collect()),
    })
}

/// What a sweep checks on each tuple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    /// `n`-tuples: the label product lowers to the literal matrix product.
    Product,
    /// `(2n-1)`-tuples: all `n` bracketings agree in label space.
    Associativity,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSummary {
    pub family: FamilyKind,
    pub n: usize,
    pub q: u32,
    pub tuple_len: usize,
    pub mode: SweepMode,
    pub exhaustive: bool,
    pub checked: u64,
    pub failures: u64,
    pub max_abs_deviation: f64,
    /// Operands of the first failing tuple in iteration order.
    pub witness: Option<Vec<String>>,
}

impl SweepSummary {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.checked > 0
    }

    pub fn witness_string(&self) -> Option<String> {
        self.witness.as_ref().map(|w| format!("[{}]", w.join(", ")))
    }
}

#[derive(Clone, Copy, Debug)]
struct Partial {
    checked: u64,
    failures: u64,
    max_dev: f64,
    first_fail: Option<u64>,
}

impl Partial {
    const EMPTY: Partial = Partial { checked: 0, failures: 0, max_dev: 0.0, first_fail: None };

    fn merge(self, o: Partial) -> Partial {
        Partial {
            checked: self.checked + o.checked,
            failures: self.failures + o.failures,
            max_dev: self.max_dev.max(o.max_dev),
            first_fail: match (self.first_fail, o.first_fail) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            },
        }
    }

    fn record(&mut self, id: u64, ok: bool, dev: f64) {
        self.checked += 1;
        self.max_dev = self.max_dev.max(dev);
        if !ok {
            self.failures += 1;
            self.first_fail = Some(self.first_fail.map_or(id, |f| f.min(id)));
        }
    }
}

/// Units of work processed between halting checks. Fixed, so where a sweep
/// stops after a failure does not depend on the thread count.
const BATCH_UNITS: u64 = 1 << 12;
/// Cached lowered matrices are kept below this many complex entries.
const CACHE_ENTRIES: usize = 1 << 22;

fn run_batched<G>(units: u64, eval: G) -> Partial
where
    G: Fn(u64) -> Partial + Sync,
{
    let mut acc = Partial::EMPTY;
    let mut start = 0;
    while start < units {
        let end = (start + BATCH_UNITS).min(units);
        let part = (start..end).into_par_iter().map(&eval).reduce(|| Partial::EMPTY, Partial::merge);
        acc = acc.merge(part);
        if acc.failures > 0 {
            break;
        }
        start = end;
    }
    acc
}

struct Lowered<'a, F: Family> {
    family: &'a F,
    labels: Option<Vec<F::Label>>,
    dense: Option<Vec<DenseMatrix>>,
}

impl<'a, F: Family> Lowered<'a, F> {
    fn new(family: &'a F, need_dense: bool) -> Self {
        let order = family.order();
        let dim = family.dense_dim();
        let cache = order.saturating_mul(dim * dim) <= CACHE_ENTRIES;
        let labels = cache.then(|| (0..order).map(|i| family.label(i)).collect::<Vec<_>>());
        let dense = (cache && need_dense).then(|| labels.as_ref().unwrap().iter().map(Lower::lower).collect());
        Lowered { family, labels, dense }
    }

    fn label(&self, i: usize) -> F::Label {
        match &self.labels {
            Some(v) => v[i].clone(),
            None => self.family.label(i),
        }
    }

    fn with_dense<T>(&self, i: usize, f: impl FnOnce(&DenseMatrix) -> T) -> T {
        match &self.dense {
            Some(v) => f(&v[i]),
            None => f(&self.family.label(i).lower()),
        }
    }
}

fn decode(mut t: u64, order: usize, len: usize) -> Vec<usize> {
    let mut d = vec![0; len];
    for x in d.iter_mut().rev() {
        *x = (t % order as u64) as usize;
        t /= order as u64;
    }
    d
}

fn mode_for<F: Family>(family: &F, tuple_len: usize) -> Result<SweepMode> {
    let n = family.arity();
    if tuple_len == n {
        Ok(SweepMode::Product)
    } else if tuple_len == 2 * n - 1 {
        Ok(SweepMode::Associativity)
    } else {
        Err(Error::Domain(format!(
            "tuple length {tuple_len} is neither the arity {n} nor the associativity length {}",
            2 * n - 1
        )))
    }
}

fn associativity_ok<F: Family>(family: &F, t: &[F::Label]) -> bool {
    let n = family.arity();
    let mut reference: Option<F::Label> = None;
    for i in 0..n {
        let inner = family.mul(&t[i..i + n]);
        let mut outer = Vec::with_capacity(n);
        outer.extend_from_slice(&t[..i]);
        outer.push(inner);
        outer.extend_from_slice(&t[i + n..]);
        let r = family.mul(&outer);
        match &reference {
            None => reference = Some(r),
            Some(x) if *x != r => return false,
            _ => {}
        }
    }
    true
}

fn summary<F: Family>(
    family: &F,
    tuple_len: usize,
    mode: SweepMode,
    exhaustive: bool,
    p: Partial,
    witness: impl Fn(u64) -> Vec<usize>,
) -> SweepSummary {
    SweepSummary {
        family: family.kind(),
        n: family.arity(),
        q: family.modulus().get(),
        tuple_len,
        mode,
        exhaustive,
        checked: p.checked,
        failures: p.failures,
        max_abs_deviation: p.max_dev,
        witness: p.first_fail.map(|id| witness(id).into_iter().map(|i| family.label(i).to_string()).collect()),
    }
}

/// Visits every tuple of `tuple_len` labels in lexicographic index order.
/// `tuple_len = n` checks products against the oracle; `tuple_len = 2n-1`
/// checks total associativity. Refuses with [`Error::BudgetExceeded`] when
/// `order^tuple_len` exceeds the budget. Stops after the first batch that
/// contains a failure; the witness is the first failing tuple.
pub fn exhaustive_sweep<F: Family>(family: &F, tuple_len: usize, budget: u64, tol: f64) -> Result<SweepSummary> {
    let mode = mode_for(family, tuple_len)?;
    let order = family.order();
    let total = (order as u128).checked_pow(tuple_len as u32).unwrap_or(u128::MAX);
    if total > budget as u128 {
        return Err(Error::BudgetExceeded { required: total, budget: budget as u128 });
    }
    let prefixes = (total / order as u128) as u64;
    let cache = Lowered::new(family, mode == SweepMode::Product);
    let dim = family.dense_dim();

    let eval = |p: u64| -> Partial {
        let digits = decode(p, order, tuple_len - 1);
        let mut factors: Vec<F::Label> = digits.iter().map(|&d| cache.label(d)).collect();
        factors.push(cache.label(0));
        let mut part = Partial::EMPTY;
        match mode {
            SweepMode::Product => {
                let mut prefix = DenseMatrix::identity(dim);
                let mut tmp = DenseMatrix::zeros(dim);
                for &d in &digits {
                    cache.with_dense(d, |m| mat_mul_into(&prefix, m, &mut tmp));
                    std::mem::swap(&mut prefix, &mut tmp);
                }
                let mut full = DenseMatrix::zeros(dim);
                for last in 0..order {
                    factors[tuple_len - 1] = cache.label(last);
                    cache.with_dense(last, |m| mat_mul_into(&prefix, m, &mut full));
                    let res = family.mul(&factors);
                    let idx = family.index(&res);
                    let ok_label = idx < order && family.label(idx) == res;
                    let dev = if ok_label { cache.with_dense(idx, |m| full.max_deviation(m)) } else { f64::INFINITY };
                    part.record(p * order as u64 + last as u64, ok_label && dev <= tol, dev);
                }
            }
            SweepMode::Associativity => {
                for last in 0..order {
                    factors[tuple_len - 1] = cache.label(last);
                    part.record(p * order as u64 + last as u64, associativity_ok(family, &factors), 0.0);
                }
            }
        }
        part
    };
    let p = run_batched(prefixes, eval);
    Ok(summary(family, tuple_len, mode, true, p, |id| decode(id, order, tuple_len)))
}

/// Deterministic sampled counterpart of [`exhaustive_sweep`]. The first
/// operand of sample `s` is label `s mod order`, so every label appears once
/// the sample count reaches the order; remaining operands are drawn from a
/// ChaCha8 stream seeded with `seed`.
pub fn sampled_sweep<F: Family>(family: &F, tuple_len: usize, samples: u64, seed: u64, tol: f64) -> Result<SweepSummary> {
    let mode = mode_for(family, tuple_len)?;
    let order = family.order();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tuples: Vec<Vec<usize>> = (0..samples)
        .map(|s| {
            let mut t = Vec::with_capacity(tuple_len);
            t.push((s % order as u64) as usize);
            t.extend((1..tuple_len).map(|_| rng.random_range(0..order)));
            t
        })
        .collect();
    let cache = Lowered::new(family, mode == SweepMode::Product);
    let eval = |s: u64| -> Partial {
        let t = &tuples[s as usize];
        let factors: Vec<F::Label> = t.iter().map(|&d| cache.label(d)).collect();
        let mut part = Partial::EMPTY;
        match mode {
            SweepMode::Product => {
                let res = family.mul(&factors);
                let dev = lowered_product(&factors).max_deviation(&res.lower());
                part.record(s, dev <= tol, dev);
            }
            SweepMode::Associativity => part.record(s, associativity_ok(family, &factors), 0.0),
        }
        part
    };
    let p = run_batched(samples, eval);
    Ok(summary(family, tuple_len, mode, false, p, |id| tuples[id as usize].clone()))
}

/// One entry of a JUnit report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestRecord {
    pub name: String,
    pub passed: bool,
    pub message: Option<String>,
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// JUnit-style XML with one `testcase` per record.
pub fn junit_xml(suite: &str, records: &[TestRecord]) -> String {
    let failures = records.iter().filter(|r| !r.passed).count();
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    writeln!(
        out,
        "<testsuite name=\"{}\" tests=\"{}\" failures=\"{}\">",
        xml_escape(suite),
        records.len(),
        failures
    )
    .unwrap();
    for r in records {
        write!(out, "  <testcase classname=\"{}\" name=\"{}\"", xml_escape(suite), xml_escape(&r.name)).unwrap();
        if r.passed {
            out.push_str("/>\n");
        } else {
            let msg = xml_escape(r.message.as_deref().unwrap_or("failed"));
            writeln!(out, ">\n    <failure message=\"{msg}\"/>\n  </testcase>").unwrap();
        }
    }
    out.push_str("</testsuite>\n");
    out
}

/// Pretty JSON for a list of sweep summaries.
pub fn json_summary(sweeps: &[SweepSummary]) -> String {
    serde_json::to_string_pretty(sweeps).expect("summaries serialize")
}
