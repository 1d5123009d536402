//! Rules of succession for an urn of `G` balls: after `k` white draws in a
//! row, the probability that the next draw is white too.
//!
//! Exact answers are [`BigRational`]. The urn's composition is drawn from a
//! uniform prior (every white count `0..=G` equally likely) or a binomial one
//! (each ball white with probability 1/2).

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SuccessionError {
    #[error("every prior-likelihood product is zero")]
    DegenerateEvidence,
    #[error("{priors} priors but {likelihoods} likelihoods")]
    LengthMismatch { priors: usize, likelihoods: usize },
    #[error("k = {k} must be below the population G = {g}")]
    KExceedsPopulation { k: u64, g: u64 },
    #[error("no trial drew {0} successes in a row")]
    NoConditioningEvents(u64),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prior {
    Uniform,
    Binomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Replacement {
    With,
    Without,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UrnModel {
    pub g: u64,
    pub prior: Prior,
    pub replacement: Replacement,
}

impl UrnModel {
    pub fn new(g: u64, prior: Prior, replacement: Replacement) -> Result<UrnModel, SuccessionError> {
        if g == 0 {
            return Err(SuccessionError::Invalid("G must be at least 1".into()));
        }
        Ok(UrnModel { g, prior, replacement })
    }

    /// The exact conditional probability for this model.
    pub fn succession(&self, k: u64) -> Result<BigRational, SuccessionError> {
        match self.replacement {
            Replacement::With => match self.prior {
                Prior::Uniform => succ_uniform_rep(self.g, k),
                Prior::Binomial => succ_binom_rep(self.g, k),
            },
            Replacement::Without => succ_norep(self.g, k, self.prior),
        }
    }
}

fn ratio(n: impl Into<BigInt>, d: impl Into<BigInt>) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn int(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

pub fn posterior(priors: &[BigRational], likelihoods: &[BigRational]) -> Result<Vec<BigRational>, SuccessionError> {
    if priors.len() != likelihoods.len() {
        return Err(SuccessionError::LengthMismatch { priors: priors.len(), likelihoods: likelihoods.len() });
    }
    if priors.iter().chain(likelihoods).any(|p| p < &BigRational::zero()) {
        return Err(SuccessionError::Invalid("probabilities must be nonnegative".into()));
    }
    let joint: Vec<BigRational> = priors.iter().zip(likelihoods).map(|(p, l)| p * l).collect();
    let total: BigRational = joint.iter().sum();
    if total.is_zero() {
        return Err(SuccessionError::DegenerateEvidence);
    }
    Ok(joint.into_iter().map(|j| j / &total).collect())
}

/// `Σ_{i=0}^{G} i^k`, with `0^0 = 1`.
pub fn power_sum(k: u32, g: u64) -> BigInt {
    (0..=g).map(|i| Pow::pow(BigInt::from(i), k)).sum()
}

fn weighted_power_sum(k: u32, g: u64, weight: impl Fn(u64) -> BigInt) -> BigInt {
    (0..=g).map(|i| weight(i) * Pow::pow(BigInt::from(i), k)).sum()
}

fn check_g(g: u64) -> Result<(), SuccessionError> {
    if g == 0 {
        return Err(SuccessionError::Invalid("G must be at least 1".into()));
    }
    Ok(())
}

/// Uniform prior, with replacement: `Σ i^{k+1} / (G · Σ i^k)`.
pub fn succ_uniform_rep(g: u64, k: u64) -> Result<BigRational, SuccessionError> {
    check_g(g)?;
    let k = exponent(k)?;
    Ok(ratio(power_sum(k + 1, g), BigInt::from(g) * power_sum(k, g)))
}

/// Binomial prior, with replacement: `Σ C(G,i) i^{k+1} / (G · Σ C(G,i) i^k)`.
pub fn succ_binom_rep(g: u64, k: u64) -> Result<BigRational, SuccessionError> {
    check_g(g)?;
    let k = exponent(k)?;
    let w = |i| binomial(BigInt::from(g), BigInt::from(i));
    Ok(ratio(weighted_power_sum(k + 1, g, w), BigInt::from(g) * weighted_power_sum(k, g, w)))
}

fn exponent(k: u64) -> Result<u32, SuccessionError> {
    u32::try_from(k).map_err(|_| SuccessionError::Invalid(format!("k = {k} is too large to sum directly")))
}

fn check_norep(g: u64, k: u64) -> Result<(), SuccessionError> {
    check_g(g)?;
    if k >= g {
        return Err(SuccessionError::KExceedsPopulation { k, g });
    }
    Ok(())
}

/// Without replacement: `(k+1)/(k+2)` under the uniform prior, `1/2` under
/// the binomial one, for every `G > k`.
pub fn succ_norep(g: u64, k: u64, prior: Prior) -> Result<BigRational, SuccessionError> {
    check_norep(g, k)?;
    Ok(match prior {
        Prior::Uniform => ratio(k + 1, k + 2),
        Prior::Binomial => ratio(1, 2),
    })
}

/// Probability of `k` straight successes without replacement, weighting the
/// uniform prior by `1/(G-k+1)`: `(G+1) / ((G-k+1)(k+1))`. That weight is not
/// a normalized prior; the conditional above does not depend on it. Under
/// the binomial prior the draws are fair coins and the joint is `1/2^k`.
pub fn joint_norep(g: u64, k: u64, prior: Prior) -> Result<BigRational, SuccessionError> {
    check_norep(g, k)?;
    Ok(match prior {
        Prior::Uniform => ratio(g + 1, BigInt::from(g - k + 1) * BigInt::from(k + 1)),
        Prior::Binomial => ratio(1, Pow::pow(BigInt::from(2), exponent(k)?)),
    })
}

/// The `G → ∞` limit of the with-replacement rules.
pub fn limit_succession(k: u64, prior: Prior) -> BigRational {
    match prior {
        Prior::Uniform => ratio(k + 1, k + 2),
        Prior::Binomial => ratio(1, 2),
    }
}

/// `B_0..=B_p` with `B_1 = -1/2`.
pub fn bernoulli_numbers(p: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = Vec::with_capacity(p + 1);
    b.push(BigRational::one());
    for m in 1..=p {
        let s: BigRational = (0..m).map(|j| int(binomial(BigInt::from(m + 1), BigInt::from(j))) * &b[j]).sum();
        b.push(-s / int(m as u64 + 1));
    }
    b
}

/// `B_p(x) = Σ_j C(p, j) B_j x^{p-j}`.
pub fn bernoulli_poly(p: usize, x: &BigRational) -> BigRational {
    bernoulli_numbers(p)
        .iter()
        .enumerate()
        .map(|(j, bj)| int(binomial(BigInt::from(p), BigInt::from(j))) * bj * Pow::pow(x, (p - j) as u32))
        .sum()
}

/// `(B_{k+1}(G+1) - B_{k+1}) / (k+1)`, equal to `power_sum(k, G)`.
pub fn bernoulli_form(k: u32, g: u64) -> BigRational {
    let p = k as usize + 1;
    let b = bernoulli_numbers(p);
    (bernoulli_poly(p, &int(g + 1)) - &b[p]) / int(p as u64)
}

/// [`succ_uniform_rep`] with both power sums taken from Bernoulli polynomials.
pub fn succ_uniform_rep_bernoulli(g: u64, k: u64) -> Result<BigRational, SuccessionError> {
    check_g(g)?;
    let k = exponent(k)?;
    Ok(bernoulli_form(k + 1, g) / (int(g) * bernoulli_form(k, g)))
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub estimate: f64,
    pub stderr: f64,
    /// Trials whose first `k` draws all succeeded.
    pub conditioned: u64,
}

/// Monte-Carlo run of the urn: draw a composition from the prior, then `k + 1`
/// balls; among trials whose first `k` are white, the fraction whose next
/// ball is white.
pub fn simulate_urn(model: &UrnModel, k: u64, trials: u64, seed: u64) -> Result<Estimate, SuccessionError> {
    if trials == 0 {
        return Err(SuccessionError::Invalid("need at least one trial".into()));
    }
    if model.replacement == Replacement::Without {
        check_norep(model.g, k)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut hits, mut conditioned) = (0u64, 0u64);
    for _ in 0..trials {
        let white = match model.prior {
            Prior::Uniform => rng.gen_range(0..=model.g),
            Prior::Binomial => (0..model.g).filter(|_| rng.gen_bool(0.5)).count() as u64,
        };
        let mut left_white = white;
        let mut left = model.g;
        let mut draw = |rng: &mut ChaCha8Rng| {
            let is_white = rng.gen_range(0..left) < left_white;
            if model.replacement == Replacement::Without {
                left -= 1;
                if is_white {
                    left_white -= 1;
                }
            }
            is_white
        };
        if (0..k).all(|_| draw(&mut rng)) {
            conditioned += 1;
            if draw(&mut rng) {
                hits += 1;
            }
        }
    }
    if conditioned == 0 {
        return Err(SuccessionError::NoConditioningEvents(k));
    }
    let p = hits as f64 / conditioned as f64;
    Ok(Estimate { estimate: p, stderr: (p * (1.0 - p) / conditioned as f64).sqrt(), conditioned })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> BigRational {
        ratio(n, d)
    }

    #[test]
    fn posterior_examples() {
        let half = r(1, 2);
        assert_eq!(posterior(&[half.clone(), half], &[r(1, 4), r(1, 1)]).unwrap(), vec![r(1, 5), r(4, 5)]);
        let third = r(1, 3);
        assert_eq!(
            posterior(&[third.clone(), third.clone(), third.clone()], &[r(0, 1), r(1, 5), r(1, 1)]).unwrap(),
            vec![r(0, 1), r(1, 6), r(5, 6)]
        );
        assert_eq!(posterior(&[third.clone(), third.clone()], &[r(1, 7), r(1, 7)]).unwrap(), vec![r(1, 2), r(1, 2)]);
        assert_eq!(posterior(std::slice::from_ref(&third), &[r(0, 1)]), Err(SuccessionError::DegenerateEvidence));
        assert!(matches!(posterior(&[third], &[]), Err(SuccessionError::LengthMismatch { .. })));
    }

    #[test]
    fn with_replacement_table() {
        assert_eq!(succ_uniform_rep(2, 2).unwrap(), r(9, 10));
        assert_eq!(succ_uniform_rep(3, 3).unwrap(), r(49, 54));
        assert_eq!(succ_uniform_rep(5, 3).unwrap(), r(979, 1125));
        assert_eq!(succ_binom_rep(3, 3).unwrap(), r(22, 27));
        assert_eq!(succ_binom_rep(5, 3).unwrap(), r(18, 25));
        assert_eq!(succ_binom_rep(1, 9).unwrap(), r(1, 1));
    }

    #[test]
    fn without_replacement_table() {
        assert_eq!(succ_norep(5, 3, Prior::Uniform).unwrap(), r(4, 5));
        assert_eq!(joint_norep(5, 3, Prior::Uniform).unwrap(), r(1, 2));
        assert_eq!(succ_norep(5, 3, Prior::Binomial).unwrap(), r(1, 2));
        assert_eq!(joint_norep(5, 3, Prior::Binomial).unwrap(), r(1, 8));
        assert_eq!(succ_norep(2, 1, Prior::Uniform).unwrap(), r(2, 3));
        assert_eq!(succ_norep(3, 3, Prior::Uniform), Err(SuccessionError::KExceedsPopulation { k: 3, g: 3 }));
    }

    /// Hypergeometric enumeration over every composition.
    fn norep_oracle(g: u64, k: u64, prior: Prior) -> BigRational {
        let c = |a: u64, b: u64| int(binomial(BigInt::from(a), BigInt::from(b)));
        let weight = |i: u64| match prior {
            Prior::Uniform => int(1),
            Prior::Binomial => c(g, i),
        };
        let p_run = |len: u64| -> BigRational { (0..=g).map(|i| weight(i) * c(i, len) / c(g, len)).sum() };
        p_run(k + 1) / p_run(k)
    }

    #[test]
    fn norep_matches_enumeration() {
        for g in 1..12 {
            for k in 0..g {
                for prior in [Prior::Uniform, Prior::Binomial] {
                    assert_eq!(succ_norep(g, k, prior).unwrap(), norep_oracle(g, k, prior), "G={g} k={k}");
                }
            }
        }
    }

    #[test]
    fn limits() {
        assert_eq!(limit_succession(3, Prior::Uniform), r(4, 5));
        assert_eq!(limit_succession(0, Prior::Uniform), r(1, 2));
        assert_eq!(limit_succession(1_000_000, Prior::Binomial), r(1, 2));
    }

    #[test]
    fn bernoulli_values() {
        let b = bernoulli_numbers(8);
        assert_eq!(b[1], r(-1, 2));
        assert_eq!(b[2], r(1, 6));
        assert_eq!(b[4], r(-1, 30));
        assert_eq!(b[8], r(-1, 30));
        assert!(b[3].is_zero() && b[5].is_zero());
        assert_eq!(power_sum(1, 100), BigInt::from(5050));
        assert_eq!(power_sum(3, 5), BigInt::from(225));
        assert_eq!(bernoulli_form(3, 5), int(225));
        assert_eq!(power_sum(0, 4), BigInt::from(5));
        assert_eq!(succ_uniform_rep_bernoulli(2, 2).unwrap(), r(9, 10));
    }

    #[test]
    fn simulation_tracks_exact_values() {
        let m = UrnModel::new(2, Prior::Uniform, Replacement::With).unwrap();
        let e = simulate_urn(&m, 2, 100_000, 1).unwrap();
        assert!((e.estimate - 0.9).abs() < 3.0 * e.stderr, "{e:?}");
        let m = UrnModel::new(5, Prior::Binomial, Replacement::Without).unwrap();
        let e = simulate_urn(&m, 3, 100_000, 2).unwrap();
        assert!((e.estimate - 0.5).abs() < 3.0 * e.stderr, "{e:?}");
        assert_eq!(simulate_urn(&m, 3, 100_000, 2).unwrap(), e);
    }

    #[test]
    fn simulation_without_conditioning_events() {
        let m = UrnModel::new(30, Prior::Binomial, Replacement::With).unwrap();
        // trial count 1 with a long run: one trial, and seed 0 misses the run
        let out = simulate_urn(&m, 25, 1, 0);
        assert_eq!(out, Err(SuccessionError::NoConditioningEvents(25)));
    }

    proptest! {
        #[test]
        fn faulhaber(k in 0u32..=12, g in 0u64..=50) {
            prop_assert_eq!(bernoulli_form(k, g), int(power_sum(k, g)));
        }

        #[test]
        fn rules_are_probabilities(g in 1u64..40, k in 0u64..30) {
            for p in [succ_uniform_rep(g, k).unwrap(), succ_binom_rep(g, k).unwrap()] {
                prop_assert!(p > BigRational::zero() && p <= BigRational::one());
            }
        }

        #[test]
        fn posterior_sums_to_one(v in prop::collection::vec((0i64..20, 1i64..20, 0i64..20, 1i64..20), 1..6)) {
            let priors: Vec<_> = v.iter().map(|&(a, b, _, _)| r(a, b)).collect();
            let lik: Vec<_> = v.iter().map(|&(_, _, c, d)| r(c, d)).collect();
            match posterior(&priors, &lik) {
                Ok(post) => prop_assert_eq!(post.iter().sum::<BigRational>(), BigRational::one()),
                Err(e) => prop_assert_eq!(e, SuccessionError::DegenerateEvidence),
            }
        }
    }
}
