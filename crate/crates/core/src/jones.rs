//! Jones polynomial of a braid closure through the tensor representation
//!
//! ```text
//! ξ(β) = t^{(ε(β) - n + 1)/2} · tr(Φ_n(β) μ^{⊗n}) / (1 + t)
//! ```
//!
//! where `Φ_n(σ_i^{±1}) = I_2^{⊗(i-1)} ⊗ R^{±1} ⊗ I_2^{⊗(n-i-1)}` and
//! `μ = diag(1, t)`.
//!
//! Two routes compute the trace. [`rep_apply`] materializes `Φ_n(β)` as a
//! dense `2^n × 2^n` [`PolyMatrix`] and is meant for small braids and tests.
//! [`weighted_trace`] never builds the matrix: `R` preserves the number of
//! set bits in a basis index, so each column is pushed through the letters
//! inside its weight subspace only, with dense `i128` coefficient vectors
//! (falling back to big integers on overflow).

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{CheckedAdd, CheckedSub, One, Pow, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::braid::{BraidWord, Letter, Sign};
use crate::laurent::{LaurentError, LaurentPoly};

pub const DEFAULT_STRAND_CAP: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JonesError {
    #[error("{strands} strands exceeds the cap of {cap}")]
    TooManyStrands { strands: usize, cap: usize },
    #[error("closure has {0} components, not a knot")]
    NotAKnot(usize),
    #[error(transparent)]
    NotDivisible(#[from] LaurentError),
    #[error("polynomial has half-integer powers of t")]
    HalfIntegerExponents,
    #[error("computation cancelled")]
    Cancelled,
    #[error("matrix dimensions do not agree: {0}")]
    Dimension(String),
}

/// Dense matrix of Laurent polynomials, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<LaurentPoly>,
}

impl PolyMatrix {
    pub fn zeros(rows: usize, cols: usize) -> PolyMatrix {
        PolyMatrix { rows, cols, entries: vec![LaurentPoly::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> PolyMatrix {
        let mut m = PolyMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, LaurentPoly::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<LaurentPoly>>) -> Result<PolyMatrix, JonesError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(JonesError::Dimension("ragged rows".into()));
        }
        Ok(PolyMatrix { rows: r, cols: c, entries: rows.into_iter().flatten().collect() })
    }

    pub fn from_ints(rows: &[&[i64]]) -> Result<PolyMatrix, JonesError> {
        PolyMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| LaurentPoly::monomial(v, 0)).collect()).collect())
    }

    pub fn diagonal(diag: Vec<LaurentPoly>) -> PolyMatrix {
        let n = diag.len();
        let mut m = PolyMatrix::zeros(n, n);
        for (i, d) in diag.into_iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, r: usize, c: usize) -> &LaurentPoly {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: LaurentPoly) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn mul(&self, rhs: &PolyMatrix) -> Result<PolyMatrix, JonesError> {
        if self.cols != rhs.rows {
            return Err(JonesError::Dimension(format!("{}x{} times {}x{}", self.rows, self.cols, rhs.rows, rhs.cols)));
        }
        let mut out = PolyMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * out.cols + j;
                    out.entries[idx] = &out.entries[idx] + &(a * b);
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product: the `(i, j)` block of the result is `a_ij · B`.
    pub fn tensor(&self, rhs: &PolyMatrix) -> PolyMatrix {
        let (p, q) = (self.rows, self.cols);
        let (r, s) = (rhs.rows, rhs.cols);
        let mut out = PolyMatrix::zeros(p * r, q * s);
        for i in 0..p {
            for j in 0..q {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..r {
                    for l in 0..s {
                        out.set(i * r + k, j * s + l, a * rhs.get(k, l));
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> LaurentPoly {
        (0..self.rows.min(self.cols)).fold(LaurentPoly::zero(), |acc, i| &acc + self.get(i, i))
    }
}

fn q(c: i64, e: i64) -> LaurentPoly {
    LaurentPoly::monomial(c, e)
}

/// The 4×4 matrix `R` with `−√t` off-diagonal entries and `1 − t` in the middle.
pub fn r_matrix() -> PolyMatrix {
    let z = LaurentPoly::zero;
    let one_minus_t = LaurentPoly::from_q_terms([(0, 1), (2, -1)]);
    PolyMatrix::from_rows(vec![
        vec![q(1, 0), z(), z(), z()],
        vec![z(), z(), q(-1, 1), z()],
        vec![z(), q(-1, 1), one_minus_t, z()],
        vec![z(), z(), z(), q(1, 0)],
    ])
    .expect("square")
}

/// `R^{-1}`, inverting the middle block `[[0, −q], [−q, 1 − q²]]`.
pub fn r_inverse() -> PolyMatrix {
    let z = LaurentPoly::zero;
    let one_minus_inv_t = LaurentPoly::from_q_terms([(0, 1), (-2, -1)]);
    PolyMatrix::from_rows(vec![
        vec![q(1, 0), z(), z(), z()],
        vec![z(), one_minus_inv_t, q(-1, -1), z()],
        vec![z(), q(-1, -1), z(), z()],
        vec![z(), z(), z(), q(1, 0)],
    ])
    .expect("square")
}

/// `μ = diag(1, t)`.
pub fn mu() -> PolyMatrix {
    PolyMatrix::diagonal(vec![LaurentPoly::one(), LaurentPoly::t_monomial(1, 1)])
}

/// `μ^{⊗n}`: diagonal entry at basis index `j` is `t^{popcount(j)}`.
pub fn mu_power(n: usize) -> PolyMatrix {
    (0..n).fold(PolyMatrix::identity(1), |acc, _| acc.tensor(&mu()))
}

/// `Φ_n` of a single letter.
pub fn letter_matrix(strands: usize, letter: Letter) -> PolyMatrix {
    let r = match letter.sign {
        Sign::Pos => r_matrix(),
        Sign::Neg => r_inverse(),
    };
    let left = PolyMatrix::identity(1 << (letter.generator - 1));
    let right = PolyMatrix::identity(1 << (strands - letter.generator - 1));
    left.tensor(&r).tensor(&right)
}

/// `Φ_n(β)` as a dense matrix, the product of letter matrices in word order.
pub fn rep_apply(b: &BraidWord, strand_cap: usize) -> Result<PolyMatrix, JonesError> {
    let n = b.strands();
    if n > strand_cap {
        return Err(JonesError::TooManyStrands { strands: n, cap: strand_cap });
    }
    b.letters().iter().try_fold(PolyMatrix::identity(1 << n), |acc, &l| acc.mul(&letter_matrix(n, l)))
}

#[derive(Debug, Clone)]
pub struct JonesOptions {
    pub strand_cap: usize,
    /// Reduce the braid by conjugation and destabilization before computing.
    pub simplify: bool,
    pub cancel: Option<Arc<AtomicBool>>,
}

impl Default for JonesOptions {
    fn default() -> Self {
        JonesOptions { strand_cap: DEFAULT_STRAND_CAP, simplify: false, cancel: None }
    }
}

impl JonesOptions {
    pub fn simplifying() -> JonesOptions {
        JonesOptions { simplify: true, ..JonesOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JonesResult {
    pub polynomial: LaurentPoly,
    pub trace_part: LaurentPoly,
    pub exponent_sum: i64,
    pub strands_used: usize,
}

impl JonesResult {
    /// `t^{(ε - n + 1)/2}` as a `q`-monomial.
    pub fn prefactor(&self) -> LaurentPoly {
        LaurentPoly::monomial(1, self.exponent_sum - self.strands_used as i64 + 1)
    }

    /// `polynomial · (1 + t) == prefactor · trace_part`.
    pub fn is_consistent(&self) -> bool {
        let one_plus_t = LaurentPoly::from_t_terms([(0, 1), (1, 1)]);
        &self.polynomial * &one_plus_t == &self.prefactor() * &self.trace_part
    }
}

pub fn jones_polynomial(b: &BraidWord) -> Result<JonesResult, JonesError> {
    jones_with(b, &JonesOptions::default())
}

pub fn jones_with(b: &BraidWord, opts: &JonesOptions) -> Result<JonesResult, JonesError> {
    let components = b.closure_components();
    if components != 1 {
        return Err(JonesError::NotAKnot(components));
    }
    let reduced;
    let b = if opts.simplify {
        reduced = simplify(b);
        &reduced
    } else {
        b
    };
    let trace_part = weighted_trace(b, opts)?;
    let exponent_sum = b.exponent_sum();
    let strands_used = b.strands();
    let scaled = trace_part.shift(exponent_sum - strands_used as i64 + 1);
    let polynomial = scaled.exact_div(&LaurentPoly::from_t_terms([(0, 1), (1, 1)]))?;
    Ok(JonesResult { polynomial, trace_part, exponent_sum, strands_used })
}

/// `Σ_i a_i α_i^power` over the terms `a_i t^{α_i}`.
pub fn derive_key(p: &LaurentPoly, power: u32) -> Result<BigInt, JonesError> {
    let terms = p.t_terms().ok_or(JonesError::HalfIntegerExponents)?;
    Ok(terms.into_iter().map(|(e, c)| c * Pow::pow(BigInt::from(e), power)).sum())
}

/// Knot-preserving reduction: cyclic free reduction, then removal of any
/// generator that occurs exactly once. With `σ_g` rotated to the end, the
/// rest of the word splits into letters below `g` and letters above it,
/// which commute; the closure is the connected sum of the two halves, so
/// the crossing is dropped and the upper half slides down one strand.
pub fn simplify(b: &BraidWord) -> BraidWord {
    let mut cur = b.cyclic_reduce();
    'outer: loop {
        let n = cur.strands();
        for g in (1..n).rev() {
            let Some(k) = unique_position(&cur, g) else {
                continue;
            };
            let rotated = cur.rotate(k + 1);
            let body = &rotated.letters()[..rotated.len() - 1];
            let low = body.iter().filter(|l| l.generator < g).copied();
            let high =
                body.iter().filter(|l| l.generator > g).map(|l| Letter { generator: l.generator - 1, sign: l.sign });
            cur = BraidWord::new(n - 1, low.chain(high).collect()).expect("indices stay below n - 1").cyclic_reduce();
            continue 'outer;
        }
        return cur;
    }
}

fn unique_position(b: &BraidWord, generator: usize) -> Option<usize> {
    let mut hits = b.letters().iter().enumerate().filter(|(_, l)| l.generator == generator);
    match (hits.next(), hits.next()) {
        (Some((k, _)), None) => Some(k),
        _ => None,
    }
}

/// `tr(Φ_n(β) μ^{⊗n})` without building the matrix.
pub fn weighted_trace(b: &BraidWord, opts: &JonesOptions) -> Result<LaurentPoly, JonesError> {
    let n = b.strands();
    if n > opts.strand_cap {
        return Err(JonesError::TooManyStrands { strands: n, cap: opts.strand_cap });
    }
    match trace_kernel::<i128>(b, opts.cancel.as_deref()) {
        Ok(p) => Ok(p),
        Err(KernelError::Overflow) => trace_kernel::<BigInt>(b, opts.cancel.as_deref()).map_err(|e| match e {
            KernelError::Cancelled => JonesError::Cancelled,
            KernelError::Overflow => unreachable!("big integers do not overflow"),
        }),
        Err(KernelError::Cancelled) => Err(JonesError::Cancelled),
    }
}

enum KernelError {
    Overflow,
    Cancelled,
}

trait Coeff: Clone + Zero + One + CheckedAdd + CheckedSub + Into<BigInt> {}
impl Coeff for i128 {}
impl Coeff for BigInt {}

/// Dense `Σ c_k q^{lo + k}`.
#[derive(Clone)]
struct Dense<C> {
    lo: i64,
    coeffs: Vec<C>,
}

impl<C: Coeff> Dense<C> {
    fn zero() -> Self {
        Dense { lo: 0, coeffs: Vec::new() }
    }

    fn one() -> Self {
        Dense { lo: 0, coeffs: vec![C::one()] }
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `Σ ±q^{shift} · p` over the parts; `true` marks subtraction.
    fn combine(parts: &[(&Dense<C>, i64, bool)]) -> Result<Dense<C>, KernelError> {
        let live: Vec<_> = parts.iter().filter(|(p, _, _)| !p.is_zero()).collect();
        let Some(lo) = live.iter().map(|(p, s, _)| p.lo + s).min() else {
            return Ok(Dense::zero());
        };
        let hi = live.iter().map(|(p, s, _)| p.lo + s + p.coeffs.len() as i64).max().expect("nonempty");
        let mut coeffs = vec![C::zero(); (hi - lo) as usize];
        for (p, s, neg) in live {
            let base = (p.lo + s - lo) as usize;
            for (k, c) in p.coeffs.iter().enumerate() {
                let slot = &mut coeffs[base + k];
                *slot = if *neg { slot.checked_sub(c) } else { slot.checked_add(c) }.ok_or(KernelError::Overflow)?;
            }
        }
        let Some(first) = coeffs.iter().position(|c| !c.is_zero()) else {
            return Ok(Dense::zero());
        };
        let last = coeffs.iter().rposition(|c| !c.is_zero()).expect("has nonzero");
        coeffs.truncate(last + 1);
        coeffs.drain(..first);
        Ok(Dense { lo: lo + first as i64, coeffs })
    }

    fn into_laurent(self) -> LaurentPoly {
        LaurentPoly::from_q_terms(self.coeffs.into_iter().enumerate().map(|(k, c)| (self.lo + k as i64, c.into())))
    }
}

fn trace_kernel<C: Coeff>(b: &BraidWord, cancel: Option<&AtomicBool>) -> Result<LaurentPoly, KernelError> {
    let n = b.strands();
    let dim = 1usize << n;
    let mut slot = vec![usize::MAX; dim];
    let mut total = LaurentPoly::zero();
    for weight in 0..=n as u32 {
        let states: Vec<usize> = (0..dim).filter(|s| s.count_ones() == weight).collect();
        for (k, &s) in states.iter().enumerate() {
            slot[s] = k;
        }
        for (col, &start) in states.iter().enumerate() {
            let mut v: Vec<Dense<C>> = vec![Dense::zero(); states.len()];
            v[col] = Dense::one();
            for letter in b.letters().iter().rev() {
                if cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
                    return Err(KernelError::Cancelled);
                }
                apply_letter(&mut v, &states, &slot, n, *letter)?;
            }
            let diag = std::mem::replace(&mut v[col], Dense::zero());
            debug_assert_eq!(slot[start], col);
            total = &total + &diag.into_laurent().shift(2 * weight as i64);
        }
    }
    Ok(total)
}

/// Strand `k` is bit `n - k`, so strand 1 is the most significant factor.
fn apply_letter<C: Coeff>(
    v: &mut [Dense<C>],
    states: &[usize],
    slot: &[usize],
    n: usize,
    letter: Letter,
) -> Result<(), KernelError> {
    let left_bit = 1usize << (n - letter.generator);
    let right_bit = left_bit >> 1;
    for &s in states {
        // local |01>: left strand 0, right strand 1
        if s & left_bit != 0 || s & right_bit == 0 {
            continue;
        }
        let a = slot[s];
        let b = slot[s ^ left_bit ^ right_bit];
        let (x01, x10) = (&v[a], &v[b]);
        if x01.is_zero() && x10.is_zero() {
            continue;
        }
        let (n01, n10) = match letter.sign {
            Sign::Pos => (
                Dense::combine(&[(x10, 1, true)])?,
                Dense::combine(&[(x01, 1, true), (x10, 0, false), (x10, 2, true)])?,
            ),
            Sign::Neg => (
                Dense::combine(&[(x01, 0, false), (x01, -2, true), (x10, -1, true)])?,
                Dense::combine(&[(x01, -1, true)])?,
            ),
        };
        v[a] = n01;
        v[b] = n10;
    }
    Ok(())
}
