//! Laurent polynomials in `q = t^{1/2}` with arbitrary-precision integer
//! coefficients.
//!
//! Exponents are stored in `q`, so `√t` is the monomial `q^1` and `t^k` is
//! `q^{2k}`. The term map never holds a zero coefficient.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LaurentError {
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("not exactly divisible, remainder {remainder}")]
    NotDivisible { remainder: LaurentPoly },
}

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    terms: BTreeMap<i64, BigInt>,
}

impl LaurentPoly {
    pub fn zero() -> LaurentPoly {
        LaurentPoly::default()
    }

    pub fn one() -> LaurentPoly {
        LaurentPoly::monomial(1, 0)
    }

    /// `c · q^exp`.
    pub fn monomial(c: impl Into<BigInt>, q_exp: i64) -> LaurentPoly {
        let mut p = LaurentPoly::zero();
        p.add_term(q_exp, c.into());
        p
    }

    /// `c · t^exp`.
    pub fn t_monomial(c: impl Into<BigInt>, t_exp: i64) -> LaurentPoly {
        LaurentPoly::monomial(c, 2 * t_exp)
    }

    /// Builds from `(t_exponent, coefficient)` pairs; repeated exponents add up.
    pub fn from_t_terms<C: Into<BigInt>>(terms: impl IntoIterator<Item = (i64, C)>) -> LaurentPoly {
        LaurentPoly::from_q_terms(terms.into_iter().map(|(e, c)| (2 * e, c)))
    }

    pub fn from_q_terms<C: Into<BigInt>>(terms: impl IntoIterator<Item = (i64, C)>) -> LaurentPoly {
        let mut p = LaurentPoly::zero();
        for (e, c) in terms {
            p.add_term(e, c.into());
        }
        p
    }

    fn add_term(&mut self, q_exp: i64, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(q_exp).or_insert_with(BigInt::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&q_exp);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigInt)> {
        self.terms.iter().map(|(&e, c)| (e, c))
    }

    pub fn coefficient(&self, q_exp: i64) -> BigInt {
        self.terms.get(&q_exp).cloned().unwrap_or_default()
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// Terms as `(t_exponent, coefficient)`, or `None` if some power of `t` is
    /// a half-integer.
    pub fn t_terms(&self) -> Option<Vec<(i64, BigInt)>> {
        self.terms.iter().map(|(&e, c)| (e % 2 == 0).then(|| (e / 2, c.clone()))).collect()
    }

    /// Multiplication by `q^k`.
    pub fn shift(&self, k: i64) -> LaurentPoly {
        LaurentPoly { terms: self.terms.iter().map(|(&e, c)| (e + k, c.clone())).collect() }
    }

    /// Substitutes `t ↦ t^{-1}`.
    pub fn mirror(&self) -> LaurentPoly {
        LaurentPoly { terms: self.terms.iter().map(|(&e, c)| (-e, c.clone())).collect() }
    }

    pub fn scale(&self, c: &BigInt) -> LaurentPoly {
        if c.is_zero() {
            return LaurentPoly::zero();
        }
        LaurentPoly { terms: self.terms.iter().map(|(&e, v)| (e, v * c)).collect() }
    }

    pub fn pow(&self, k: u32) -> LaurentPoly {
        (0..k).fold(LaurentPoly::one(), |acc, _| &acc * self)
    }

    /// Exact quotient `self / divisor`.
    ///
    /// Both operands are shifted to ordinary polynomials, divided from the top
    /// and shifted back; a nonzero remainder means no Laurent quotient exists.
    pub fn exact_div(&self, divisor: &LaurentPoly) -> Result<LaurentPoly, LaurentError> {
        let (d_lo, d_hi) = match (divisor.min_exp(), divisor.max_exp()) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => return Err(LaurentError::DivisionByZero),
        };
        if self.is_zero() {
            return Ok(LaurentPoly::zero());
        }
        let lead = &divisor.terms[&d_hi];
        let mut rem = self.clone();
        let mut quotient = LaurentPoly::zero();
        let p_lo = self.min_exp().expect("nonzero");
        loop {
            let r_hi = match rem.max_exp() {
                Some(e) if e - d_hi >= p_lo - d_lo => e,
                _ => break,
            };
            let (q, r) = rem.terms[&r_hi].div_rem(lead);
            if !r.is_zero() {
                break;
            }
            let step = LaurentPoly::monomial(q, r_hi - d_hi);
            rem = &rem - &(&step * divisor);
            quotient = &quotient + &step;
        }
        if rem.is_zero() {
            Ok(quotient)
        } else {
            Err(LaurentError::NotDivisible { remainder: rem })
        }
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;

    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (&e, c) in &rhs.terms {
            out.add_term(e, c.clone());
        }
        out
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;

    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (&e, c) in &rhs.terms {
            out.add_term(e, -c);
        }
        out
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;

    fn neg(self) -> LaurentPoly {
        LaurentPoly { terms: self.terms.iter().map(|(&e, c)| (e, -c)).collect() }
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;

    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (&a, x) in &self.terms {
            for (&b, y) in &rhs.terms {
                out.add_term(a + b, x * y);
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for LaurentPoly {
            type Output = LaurentPoly;
            fn $m(self, rhs: LaurentPoly) -> LaurentPoly {
                (&self).$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}

fn fmt_t_power(f: &mut fmt::Formatter<'_>, q_exp: i64) -> fmt::Result {
    match q_exp {
        0 => Ok(()),
        2 => write!(f, "t"),
        e if e % 2 == 0 => write!(f, "t^{}", e / 2),
        e => write!(f, "t^{{{}/2}}", e),
    }
}

impl fmt::Display for LaurentPoly {
    /// Renders in `t`, lowest power first, e.g. `-t^-2 + t + t^{3/2}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (&e, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if e == 0 || !mag.is_one() {
                write!(f, "{mag}")?;
            }
            fmt_t_power(f, e)?;
        }
        Ok(())
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPoly({self})")
    }
}

impl Serialize for LaurentPoly {
    /// Sorted `[q_exponent, "coefficient"]` pairs.
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<(i64, String)> = self.terms.iter().map(|(&e, c)| (e, c.to_string())).collect();
        pairs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LaurentPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let pairs = Vec::<(i64, String)>::deserialize(deserializer)?;
        let mut terms = Vec::with_capacity(pairs.len());
        for (e, c) in pairs {
            let c: BigInt = c.parse().map_err(serde::de::Error::custom)?;
            terms.push((e, c));
        }
        Ok(LaurentPoly::from_q_terms(terms))
    }
}
