//! Connected sum of knots at the braid level, and knot-preserving
//! obfuscation of braid words.
//!
//! For `b1` on `m` strands and `b2` on `n` strands the result lives on
//! `m + n - 1` strands: strand `m` is shared, so the closures are spliced
//! along one arc.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::braid::{random_braid_with, BraidWord, Letter, MarkovMove, RelationKind, Sign};
use crate::jones::DEFAULT_STRAND_CAP;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComposeError {
    #[error("operand {operand} closes to {components} components, not a knot")]
    NotAKnot { operand: usize, components: usize },
    #[error("split point {at} is past the end of a {len}-letter word")]
    SplitOutOfRange { at: usize, len: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComposeVariant {
    /// `b1 · C⁻¹ · b2 · C` with `C` the connecting word.
    #[default]
    Conjugate,
    /// `b1` followed by `b2` with every index raised by `m - 1`.
    Shift,
    /// `A1 · C⁻¹ · b2 · C · A2` where `b1 = A1 A2`; `None` splits at the
    /// middle of `b1`.
    Split(Option<usize>),
}

pub fn compose(b1: &BraidWord, b2: &BraidWord, variant: ComposeVariant) -> Result<BraidWord, ComposeError> {
    for (operand, b) in [(1, b1), (2, b2)] {
        let components = b.closure_components();
        if components != 1 {
            return Err(ComposeError::NotAKnot { operand, components });
        }
    }
    let (m, n) = (b1.strands(), b2.strands());
    let total = m + n - 1;
    let wide = |b: &BraidWord| b.widened(total).expect("total covers both operands");
    match variant {
        ComposeVariant::Shift => {
            let moved = b2.shifted(m - 1, total).expect("shift stays in range");
            Ok(wide(b1).concat(&moved).expect("same strands"))
        }
        ComposeVariant::Conjugate => {
            Ok(join(&wide(b1), &conjugated(b2, m), &BraidWord::identity(total).expect("nonzero")))
        }
        ComposeVariant::Split(at) => {
            let at = at.unwrap_or(b1.len() / 2);
            if at > b1.len() {
                return Err(ComposeError::SplitOutOfRange { at, len: b1.len() });
            }
            let (a1, a2) = b1.letters().split_at(at);
            let a1 = BraidWord::new(total, a1.to_vec()).expect("indices below m");
            let a2 = BraidWord::new(total, a2.to_vec()).expect("indices below m");
            Ok(join(&a1, &conjugated(b2, m), &a2))
        }
    }
}

fn join(a: &BraidWord, b: &BraidWord, c: &BraidWord) -> BraidWord {
    a.concat(b).and_then(|ab| ab.concat(c)).expect("same strands")
}

/// `C⁻¹ · b2 · C` on `m + n - 1` strands, which equals `b2` moved up to
/// strands `m..m+n-1`.
///
/// The printed connecting word runs its blocks through `σ_{m+n-1}`, one
/// generator beyond `B_{m+n-1}`, and writes `C⁻¹` as `C` with signs flipped
/// but letters in the same order. Neither reading passes the
/// multiplicativity check. The word used here keeps the block shape with
/// indices one lower, `C = Π_{k=0}^{m-2} σ_{n+k} σ_{n+k-1} … σ_{1+k}`, and
/// takes the group inverse for `C⁻¹`.
fn conjugated(b2: &BraidWord, m: usize) -> BraidWord {
    let n = b2.strands();
    let total = m + n - 1;
    let c = connecting_word(m, n);
    let inner = b2.widened(total).expect("n <= total");
    join(&c.invert(), &inner, &c)
}

/// Each block carries one strand from position `n + k` down to `1 + k`; the
/// `m - 1` blocks together slide strands `1..n` up to `m..m+n-1`.
pub fn connecting_word(m: usize, n: usize) -> BraidWord {
    let total = m + n - 1;
    let letters = (0..m.saturating_sub(1)).flat_map(|k| (1 + k..=n + k).rev().map(Letter::pos)).collect();
    BraidWord::new(total, letters).expect("indices below m + n - 1")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum MoveKind {
    FarCommute,
    BraidRelation,
    Conjugate,
    Stabilize,
    Destabilize,
    InsertPair,
}

/// `move_count` random knot-preserving moves, reproducible per seed.
pub fn obfuscate(b: &BraidWord, move_count: usize, seed: u64) -> BraidWord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    obfuscate_with(&mut rng, b, move_count, DEFAULT_STRAND_CAP)
}

/// As [`obfuscate`], never stabilizing past `strand_cap` strands.
pub fn obfuscate_with<R: Rng + ?Sized>(rng: &mut R, b: &BraidWord, move_count: usize, strand_cap: usize) -> BraidWord {
    let mut cur = b.clone();
    for _ in 0..move_count {
        let far = cur.relation_sites(RelationKind::FarCommute);
        let rel = cur.relation_sites(RelationKind::BraidRelation);
        let n = cur.strands();
        let mut kinds = Vec::with_capacity(6);
        if !far.is_empty() {
            kinds.push(MoveKind::FarCommute);
        }
        if !rel.is_empty() {
            kinds.push(MoveKind::BraidRelation);
        }
        if n >= 2 {
            kinds.push(MoveKind::Conjugate);
            kinds.push(MoveKind::InsertPair);
        }
        if n < strand_cap {
            kinds.push(MoveKind::Stabilize);
        }
        if cur.can_destabilize() {
            kinds.push(MoveKind::Destabilize);
        }
        let Some(&kind) = kinds.choose(rng) else {
            break;
        };
        cur = match kind {
            MoveKind::FarCommute | MoveKind::BraidRelation => {
                let (sites, rk) = if kind == MoveKind::FarCommute {
                    (far, RelationKind::FarCommute)
                } else {
                    (rel, RelationKind::BraidRelation)
                };
                let &(pos, dir) = sites.choose(rng).expect("nonempty");
                cur.apply_relation(pos, rk, dir).expect("site was listed")
            }
            MoveKind::Conjugate => {
                let len = rng.gen_range(1..=2);
                let g = random_braid_with(rng, n, len).expect("n >= 2");
                cur.markov_move(&MarkovMove::Conjugate(g)).expect("same strands")
            }
            MoveKind::Stabilize => {
                let sign = if rng.gen_bool(0.5) { Sign::Pos } else { Sign::Neg };
                cur.markov_move(&MarkovMove::Stabilize(sign)).expect("always legal")
            }
            MoveKind::Destabilize => cur.markov_move(&MarkovMove::Destabilize).expect("checked"),
            MoveKind::InsertPair => {
                let l = Letter {
                    generator: rng.gen_range(1..n),
                    sign: if rng.gen_bool(0.5) { Sign::Pos } else { Sign::Neg },
                };
                let at = rng.gen_range(0..=cur.len());
                let mut letters = cur.letters().to_vec();
                letters.splice(at..at, [l, l.inverse()]);
                BraidWord::new(n, letters).expect("generator in range")
            }
        };
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::braid::random_knot_with;
    use crate::fixtures;
    use crate::jones::{jones_polynomial, rep_apply};
    use proptest::prelude::*;

    fn jones(b: &BraidWord) -> crate::laurent::LaurentPoly {
        jones_polynomial(b).unwrap().polynomial
    }

    const VARIANTS: [ComposeVariant; 3] =
        [ComposeVariant::Conjugate, ComposeVariant::Shift, ComposeVariant::Split(None)];

    #[test]
    fn unknot_is_identity() {
        let b = fixtures::figure_eight();
        for v in VARIANTS {
            assert_eq!(jones(&compose(&fixtures::unknot(), &b, v).unwrap()), jones(&b));
            assert_eq!(jones(&compose(&b, &fixtures::unknot(), v).unwrap()), jones(&b));
        }
    }

    #[test]
    fn granny_knot() {
        let t = fixtures::trefoil();
        let j = jones(&t);
        for v in VARIANTS {
            let g = compose(&t, &t, v).unwrap();
            assert_eq!(g.strands(), 3);
            assert_eq!(jones(&g), &j * &j);
        }
    }

    #[test]
    fn commutes() {
        let (a, b) = (fixtures::trefoil(), fixtures::example_knot_four_strands());
        let ab = compose(&a, &b, ComposeVariant::Conjugate).unwrap();
        let ba = compose(&b, &a, ComposeVariant::Conjugate).unwrap();
        assert_eq!(jones(&ab), jones(&ba));
    }

    #[test]
    fn connecting_word_slides_the_block() {
        // conjugating by the connecting word is the index shift, as matrices
        for (m, n) in [(2, 2), (2, 3), (3, 2), (3, 3)] {
            let mut rng = ChaCha8Rng::seed_from_u64((m * 10 + n) as u64);
            let b2 = random_braid_with(&mut rng, n, 5).unwrap();
            let total = m + n - 1;
            let lhs = conjugated(&b2, m);
            let rhs = b2.shifted(m - 1, total).unwrap();
            assert_eq!(rep_apply(&lhs, 6).unwrap(), rep_apply(&rhs, 6).unwrap(), "m={m} n={n}");
        }
    }

    #[test]
    fn literal_connecting_word_fails() {
        // the printed form: blocks up to σ_{m+n-1} need one more strand, and
        // C⁻¹ is C with signs flipped in place
        let t = fixtures::trefoil();
        let (m, n) = (2, 2);
        let total = m + n;
        let c: Vec<Letter> = (0..m).flat_map(|k| (2 + k..=n + k).rev().map(Letter::pos)).collect();
        let c_flip: Vec<Letter> = c.iter().map(|l| l.inverse()).collect();
        let mut w = t.letters().to_vec();
        w.extend(c_flip);
        w.extend(t.letters());
        w.extend(c);
        let literal = BraidWord::new(total, w).unwrap();
        let expected = &jones(&t) * &jones(&t);
        let ok = jones_polynomial(&literal).map(|r| r.polynomial == expected).unwrap_or(false);
        assert!(!ok);
    }

    #[test]
    fn rejects_links_and_bad_splits() {
        let link = BraidWord::from_signed(2, &[1, 1]).unwrap();
        assert_eq!(
            compose(&link, &fixtures::unknot(), ComposeVariant::Conjugate),
            Err(ComposeError::NotAKnot { operand: 1, components: 2 })
        );
        assert_eq!(
            compose(&fixtures::trefoil(), &fixtures::unknot(), ComposeVariant::Split(Some(4))),
            Err(ComposeError::SplitOutOfRange { at: 4, len: 3 })
        );
    }

    #[test]
    fn obfuscation_examples() {
        let t = fixtures::trefoil();
        assert_eq!(obfuscate(&t, 0, 9), t);
        assert_eq!(obfuscate(&t, 25, 1), obfuscate(&t, 25, 1));
        let o = obfuscate(&fixtures::example_knot_four_strands(), 50, 3);
        assert_eq!(jones(&o), jones(&fixtures::example_knot_four_strands()));
    }

    fn knot(max_strands: usize, max_len: usize) -> impl Strategy<Value = BraidWord> {
        any::<u64>().prop_map(move |s| random_knot_with(&mut ChaCha8Rng::seed_from_u64(s), max_strands, max_len))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn multiplicative(a in knot(3, 8), b in knot(3, 8), v in 0usize..3) {
            let c = compose(&a, &b, VARIANTS[v]).unwrap();
            prop_assert_eq!(c.strands(), a.strands() + b.strands() - 1);
            prop_assert_eq!(jones(&c), &jones(&a) * &jones(&b));
        }

        #[test]
        fn shift_adds_exponent_sums(a in knot(4, 8), b in knot(4, 8)) {
            let c = compose(&a, &b, ComposeVariant::Shift).unwrap();
            prop_assert_eq!(c.exponent_sum(), a.exponent_sum() + b.exponent_sum());
        }

        #[test]
        fn obfuscation_keeps_jones(b in knot(4, 8), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let o = obfuscate_with(&mut rng, &b, 20, 6);
            prop_assert!(o.strands() <= 6);
            prop_assert_eq!(jones(&o), jones(&b));
        }
    }
}
