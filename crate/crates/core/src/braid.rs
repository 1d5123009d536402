//! Braid words under the Artin presentation.
//!
//! A braid on `n` strands is stored as a sequence of letters `σ_i^{±1}` with
//! `1 <= i <= n - 1`. No normal form is computed; two words are compared only
//! through invariants (permutation, closure components, Jones polynomial).

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BraidError {
    #[error("strand counts differ: {left} vs {right}")]
    StrandMismatch { left: usize, right: usize },
    #[error("generator {generator} is out of range for {strands} strands")]
    GeneratorOutOfRange { generator: i64, strands: usize },
    #[error("a braid needs at least one strand")]
    NoStrands,
    #[error("need at least two strands to draw letters, got {0}")]
    TooFewStrands(usize),
    #[error("relation does not match at position {0}")]
    NoMatch(usize),
    #[error("destabilization requires a final σ_(n-1) letter that occurs nowhere else")]
    IllegalDestabilize,
    #[error("malformed braid text: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }

    pub fn value(self) -> i64 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }
}

/// One Artin letter `σ_generator^{sign}`; generators are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter {
    pub generator: usize,
    pub sign: Sign,
}

impl Letter {
    pub fn pos(generator: usize) -> Letter {
        Letter { generator, sign: Sign::Pos }
    }

    pub fn neg(generator: usize) -> Letter {
        Letter { generator, sign: Sign::Neg }
    }

    pub fn inverse(self) -> Letter {
        Letter { generator: self.generator, sign: self.sign.flip() }
    }

    /// Signed integer form: `3` is `σ_3`, `-3` is `σ_3^{-1}`.
    pub fn signed(self) -> i64 {
        self.generator as i64 * self.sign.value()
    }

    fn cancels(self, other: Letter) -> bool {
        self.generator == other.generator && self.sign != other.sign
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationKind {
    /// `σ_i σ_j = σ_j σ_i` for `|i - j| > 1`.
    FarCommute,
    /// `σ_i σ_{i+1} σ_i = σ_{i+1} σ_i σ_{i+1}`.
    BraidRelation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MarkovMove {
    Conjugate(BraidWord),
    Stabilize(Sign),
    Destabilize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "BraidJson", into = "BraidJson")]
pub struct BraidWord {
    strands: usize,
    letters: Vec<Letter>,
}

#[derive(Serialize, Deserialize)]
struct BraidJson {
    strands: usize,
    word: Vec<i64>,
}

impl TryFrom<BraidJson> for BraidWord {
    type Error = BraidError;

    fn try_from(value: BraidJson) -> Result<Self, Self::Error> {
        BraidWord::from_signed(value.strands, &value.word)
    }
}

impl From<BraidWord> for BraidJson {
    fn from(value: BraidWord) -> Self {
        BraidJson { strands: value.strands, word: value.signed_word() }
    }
}

impl BraidWord {
    pub fn new(strands: usize, letters: Vec<Letter>) -> Result<BraidWord, BraidError> {
        if strands == 0 {
            return Err(BraidError::NoStrands);
        }
        for l in &letters {
            if l.generator == 0 || l.generator >= strands {
                return Err(BraidError::GeneratorOutOfRange { generator: l.signed(), strands });
            }
        }
        Ok(BraidWord { strands, letters })
    }

    pub fn identity(strands: usize) -> Result<BraidWord, BraidError> {
        BraidWord::new(strands, Vec::new())
    }

    pub fn from_signed(strands: usize, word: &[i64]) -> Result<BraidWord, BraidError> {
        let mut letters = Vec::with_capacity(word.len());
        for &w in word {
            if w == 0 {
                return Err(BraidError::GeneratorOutOfRange { generator: 0, strands });
            }
            let sign = if w > 0 { Sign::Pos } else { Sign::Neg };
            letters.push(Letter { generator: w.unsigned_abs() as usize, sign });
        }
        BraidWord::new(strands, letters)
    }

    pub fn strands(&self) -> usize {
        self.strands
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn signed_word(&self) -> Vec<i64> {
        self.letters.iter().map(|l| l.signed()).collect()
    }

    pub fn concat(&self, other: &BraidWord) -> Result<BraidWord, BraidError> {
        if self.strands != other.strands {
            return Err(BraidError::StrandMismatch { left: self.strands, right: other.strands });
        }
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Ok(BraidWord { strands: self.strands, letters })
    }

    /// Mirror image from the bottom up: reverse the word and negate every sign.
    pub fn invert(&self) -> BraidWord {
        BraidWord { strands: self.strands, letters: self.letters.iter().rev().map(|l| l.inverse()).collect() }
    }

    /// Cancels adjacent `σ_i σ_i^{-1}` pairs until none remain.
    pub fn free_reduce(&self) -> BraidWord {
        let mut out: Vec<Letter> = Vec::with_capacity(self.letters.len());
        for &l in &self.letters {
            match out.last() {
                Some(&top) if top.cancels(l) => {
                    out.pop();
                }
                _ => out.push(l),
            }
        }
        BraidWord { strands: self.strands, letters: out }
    }

    /// Free reduction that also cancels across the ends of the word. The
    /// result is a conjugate of `self`, so its closure is the same link.
    pub fn cyclic_reduce(&self) -> BraidWord {
        let mut letters = self.free_reduce().letters;
        while letters.len() >= 2 && letters[0].cancels(letters[letters.len() - 1]) {
            letters.pop();
            letters.remove(0);
        }
        BraidWord { strands: self.strands, letters }
    }

    /// Cyclic rotation moving the first `k` letters to the end (a conjugation).
    pub fn rotate(&self, k: usize) -> BraidWord {
        let mut letters = self.letters.clone();
        if !letters.is_empty() {
            let k = k % letters.len();
            letters.rotate_left(k);
        }
        BraidWord { strands: self.strands, letters }
    }

    /// Every generator index raised by `offset`, on `strands + offset` strands.
    pub fn shifted(&self, offset: usize, strands: usize) -> Result<BraidWord, BraidError> {
        let letters = self.letters.iter().map(|l| Letter { generator: l.generator + offset, sign: l.sign }).collect();
        BraidWord::new(strands, letters)
    }

    /// Same word viewed on more strands.
    pub fn widened(&self, strands: usize) -> Result<BraidWord, BraidError> {
        if strands < self.strands {
            return Err(BraidError::StrandMismatch { left: self.strands, right: strands });
        }
        BraidWord::new(strands, self.letters.clone())
    }

    pub fn apply_relation(
        &self,
        position: usize,
        kind: RelationKind,
        direction: Direction,
    ) -> Result<BraidWord, BraidError> {
        let w = &self.letters;
        let mut letters = w.clone();
        match kind {
            RelationKind::FarCommute => {
                let (a, b) = match (w.get(position), w.get(position + 1)) {
                    (Some(&a), Some(&b)) => (a, b),
                    _ => return Err(BraidError::NoMatch(position)),
                };
                if a.generator.abs_diff(b.generator) <= 1 {
                    return Err(BraidError::NoMatch(position));
                }
                letters.swap(position, position + 1);
            }
            RelationKind::BraidRelation => {
                if position + 3 > w.len() {
                    return Err(BraidError::NoMatch(position));
                }
                let (a, b, c) = (w[position], w[position + 1], w[position + 2]);
                let same_sign = a.sign == b.sign && b.sign == c.sign;
                let outer = a.generator == c.generator;
                let step_ok = match direction {
                    Direction::Forward => b.generator == a.generator + 1,
                    Direction::Backward => a.generator == b.generator + 1,
                };
                if !(same_sign && outer && step_ok) {
                    return Err(BraidError::NoMatch(position));
                }
                let s = a.sign;
                letters[position] = Letter { generator: b.generator, sign: s };
                letters[position + 1] = Letter { generator: a.generator, sign: s };
                letters[position + 2] = Letter { generator: b.generator, sign: s };
            }
        }
        Ok(BraidWord { strands: self.strands, letters })
    }

    /// Positions where `apply_relation` would succeed, for the given kind.
    pub fn relation_sites(&self, kind: RelationKind) -> Vec<(usize, Direction)> {
        let mut out = Vec::new();
        for p in 0..self.letters.len() {
            for d in [Direction::Forward, Direction::Backward] {
                if kind == RelationKind::FarCommute && d == Direction::Backward {
                    continue;
                }
                if self.apply_relation(p, kind, d).is_ok() {
                    out.push((p, d));
                }
            }
        }
        out
    }

    pub fn markov_move(&self, mv: &MarkovMove) -> Result<BraidWord, BraidError> {
        match mv {
            MarkovMove::Conjugate(gamma) => gamma.concat(self)?.concat(&gamma.invert()),
            MarkovMove::Stabilize(sign) => {
                let mut letters = self.letters.clone();
                letters.push(Letter { generator: self.strands, sign: *sign });
                Ok(BraidWord { strands: self.strands + 1, letters })
            }
            MarkovMove::Destabilize => {
                if !self.can_destabilize() {
                    return Err(BraidError::IllegalDestabilize);
                }
                let mut letters = self.letters.clone();
                letters.pop();
                Ok(BraidWord { strands: self.strands - 1, letters })
            }
        }
    }

    pub fn can_destabilize(&self) -> bool {
        let top = match self.strands.checked_sub(1) {
            Some(t) if t >= 1 => t,
            _ => return false,
        };
        match self.letters.last() {
            Some(last) if last.generator == top => self.letters.iter().filter(|l| l.generator == top).count() == 1,
            _ => false,
        }
    }

    pub fn permutation(&self) -> Permutation {
        // images[p] = bottom position of the strand entering at top position p
        let mut at: Vec<usize> = (0..self.strands).collect();
        for l in &self.letters {
            at.swap(l.generator - 1, l.generator);
        }
        let mut images = vec![0; self.strands];
        for (pos, &strand) in at.iter().enumerate() {
            images[strand] = pos;
        }
        Permutation { images }
    }

    pub fn closure_components(&self) -> usize {
        self.permutation().cycle_count()
    }

    pub fn is_knot(&self) -> bool {
        self.closure_components() == 1
    }

    pub fn exponent_sum(&self) -> i64 {
        self.letters.iter().map(|l| l.sign.value()).sum()
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B{}:", self.strands)?;
        for l in &self.letters {
            write!(f, " {}", l.signed())?;
        }
        Ok(())
    }
}

impl FromStr for BraidWord {
    type Err = BraidError;

    /// Parses `B5: 1 3 -4` (strand count, then signed generators).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let rest = s.strip_prefix('B').ok_or_else(|| BraidError::Parse(format!("expected leading 'B' in {s:?}")))?;
        let (count, word) = rest.split_once(':').ok_or_else(|| BraidError::Parse(format!("expected ':' in {s:?}")))?;
        let strands: usize =
            count.trim().parse().map_err(|_| BraidError::Parse(format!("bad strand count {count:?}")))?;
        let word = word
            .split_whitespace()
            .map(|t| t.parse::<i64>().map_err(|_| BraidError::Parse(format!("bad letter {t:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        BraidWord::from_signed(strands, &word)
    }
}

/// A bijection on strand positions `0..n`, `images[p]` being where position `p` goes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Option<Permutation> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || std::mem::replace(&mut seen[i], true) {
                return None;
            }
        }
        Some(Permutation { images })
    }

    pub fn identity(n: usize) -> Permutation {
        Permutation { images: (0..n).collect() }
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `self` applied first, then `other`.
    pub fn then(&self, other: &Permutation) -> Permutation {
        Permutation { images: self.images.iter().map(|&i| other.images[i]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.images.len()];
        for (p, &i) in self.images.iter().enumerate() {
            images[i] = p;
        }
        Permutation { images }
    }

    pub fn cycle_count(&self) -> usize {
        let mut seen = vec![false; self.images.len()];
        let mut cycles = 0;
        for start in 0..self.images.len() {
            if seen[start] {
                continue;
            }
            cycles += 1;
            let mut p = start;
            while !seen[p] {
                seen[p] = true;
                p = self.images[p];
            }
        }
        cycles
    }
}

/// Uniform letters over generator index and sign, reproducible per seed.
pub fn random_braid(strands: usize, length: usize, seed: u64) -> Result<BraidWord, BraidError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_braid_with(&mut rng, strands, length)
}

pub fn random_braid_with<R: Rng + ?Sized>(rng: &mut R, strands: usize, length: usize) -> Result<BraidWord, BraidError> {
    if strands == 0 {
        return Err(BraidError::NoStrands);
    }
    if length == 0 {
        return BraidWord::identity(strands);
    }
    if strands < 2 {
        return Err(BraidError::TooFewStrands(strands));
    }
    let letters = (0..length)
        .map(|_| Letter {
            generator: rng.gen_range(1..strands),
            sign: if rng.gen_bool(0.5) { Sign::Pos } else { Sign::Neg },
        })
        .collect();
    BraidWord::new(strands, letters)
}

/// Rejection-samples a braid whose closure is a knot, with `2..=max_strands`
/// strands and at most `max_len` letters (free-reduced).
pub fn random_knot_with<R: Rng + ?Sized>(rng: &mut R, max_strands: usize, max_len: usize) -> BraidWord {
    assert!(max_strands >= 2 && max_len >= 1, "need room for at least σ_1");
    loop {
        let strands = rng.gen_range(2..=max_strands);
        let len = rng.gen_range(strands - 1..=max_len.max(strands - 1));
        let b = random_braid_with(rng, strands, len).expect("strand count checked above").free_reduce();
        if b.is_knot() {
            return b;
        }
    }
}
