//! Worked examples shared by tests, the CLI and the acceptance suite.

use crate::braid::BraidWord;

/// A 12-letter word on 5 strands whose closure is a prime knot.
pub const EXAMPLE_KNOT_FIVE_STRANDS: [i64; 12] = [1, 3, -4, -3, 1, -3, -2, -4, -1, -3, -4, -2];

/// The same knot after relation rewriting and one destabilization, on 4 strands.
pub const EXAMPLE_KNOT_FOUR_STRANDS: [i64; 11] = [-2, -3, -3, -2, -2, -3, -1, -2, 1, 1, 3];

/// Jones polynomial of the example knot as `(t_exponent, coefficient)` pairs.
pub const EXAMPLE_KNOT_JONES: [(i64, i64); 6] = [(-6, -1), (-5, 1), (-4, -1), (-3, 2), (-2, -1), (-1, 1)];

/// `tr(Φ_4(β) μ^{⊗4})` for the 4-strand word.
pub const EXAMPLE_KNOT_TRACE: [(i64, i64); 4] = [(-2, -1), (1, 1), (2, 1), (4, 1)];

pub fn example_knot_five_strands() -> BraidWord {
    BraidWord::from_signed(5, &EXAMPLE_KNOT_FIVE_STRANDS).expect("valid fixture")
}

pub fn example_knot_four_strands() -> BraidWord {
    BraidWord::from_signed(4, &EXAMPLE_KNOT_FOUR_STRANDS).expect("valid fixture")
}

pub fn unknot() -> BraidWord {
    BraidWord::from_signed(2, &[1]).expect("valid fixture")
}

pub fn trefoil() -> BraidWord {
    BraidWord::from_signed(2, &[1, 1, 1]).expect("valid fixture")
}

pub fn figure_eight() -> BraidWord {
    BraidWord::from_signed(3, &[1, -2, 1, -2]).expect("valid fixture")
}
