use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::coloring::{invariant_vector, is_proper, proper_coloring, region_connected, Coloring};
use super::snf::{smith, to_u64, Smith};
use super::{PushError, SimplexBoard};

/// Push count per region, each in `[0, m)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PushPlan(pub Vec<u64>);

impl PushPlan {
    pub fn total_pushes(&self) -> u64 {
        self.0.iter().sum()
    }
}

fn decompose(board: &SimplexBoard) -> Smith {
    let a = board.incidence().into_iter().map(|row| row.into_iter().map(BigInt::from).collect()).collect();
    smith(&a, board.region_count())
}

fn residual(board: &SimplexBoard, target: &[u64]) -> Result<Vec<BigInt>, PushError> {
    board.check_labels(target)?;
    let m = board.m();
    Ok(board.labels().iter().zip(target).map(|(&l, &t)| BigInt::from((t + m - l) % m)).collect())
}

/// A plan taking the board's labeling to `target`, if any exists.
pub fn solve(board: &SimplexBoard, target: &[u64]) -> Result<Option<PushPlan>, PushError> {
    let b = residual(board, target)?;
    let s = decompose(board);
    Ok(s.solve(&b, &BigInt::from(board.m())).map(|x| PushPlan(x.iter().map(to_u64).collect())))
}

/// Equal invariant vectors. Only a sufficient test for solvability when the
/// board is region-connected and the coloring proper, so other inputs are
/// refused.
pub fn solvable_by_invariant(board: &SimplexBoard, coloring: &Coloring, target: &[u64]) -> Result<bool, PushError> {
    if !region_connected(board) {
        return Err(PushError::HypothesesNotMet("board is not region-connected".into()));
    }
    if !is_proper(board, coloring) {
        return Err(PushError::HypothesesNotMet("coloring is not proper".into()));
    }
    let other = board.with_labels(target.to_vec())?;
    Ok(invariant_vector(board, coloring)? == invariant_vector(&other, coloring)?)
}

/// Plans between any two labelings of a solvable pair:
/// `m^{r-s} · Π gcd(d_i, m)` over the Smith diagonal.
pub fn exact_count(board: &SimplexBoard) -> BigInt {
    decompose(board).kernel_size(&BigInt::from(board.m()))
}

/// Number of plans reaching `target`; zero when none does.
pub fn count_solutions(board: &SimplexBoard, target: &[u64]) -> Result<BigInt, PushError> {
    Ok(match solve(board, target)? {
        Some(_) => exact_count(board),
        None => BigInt::zero(),
    })
}

/// `m^{r-v+n}`, valid for region-connected boards with a proper coloring.
pub fn closed_form_count(board: &SimplexBoard) -> Result<BigInt, PushError> {
    if !region_connected(board) {
        return Err(PushError::HypothesesNotMet("board is not region-connected".into()));
    }
    if proper_coloring(board).is_none() {
        return Err(PushError::HypothesesNotMet(format!("board is not {}-colorable", board.n() + 1)));
    }
    let e = board.region_count() as i64 - board.vertex_count() as i64 + board.n() as i64;
    let e = usize::try_from(e).map_err(|_| PushError::HypothesesNotMet(format!("exponent {e} is negative")))?;
    Ok(num_traits::pow(BigInt::from(board.m()), e))
}

/// Labeling classes under pushes: `|Z_m^v / image(A)| = m^{v-s} · Π gcd(d_i, m)`.
pub fn class_count(board: &SimplexBoard) -> BigInt {
    class_count_mod(board, board.m())
}

pub fn class_count_mod(board: &SimplexBoard, m: u64) -> BigInt {
    decompose(board).cokernel_size(&BigInt::from(m))
}

/// Every plan reaching `target`, in lexicographic order of kernel
/// coefficients.
pub fn enumerate_solutions(board: &SimplexBoard, target: &[u64], cap: usize) -> Result<Vec<PushPlan>, PushError> {
    let b = residual(board, target)?;
    let s = decompose(board);
    let m = BigInt::from(board.m());
    let Some(base) = s.solve(&b, &m) else {
        return Ok(Vec::new());
    };
    let count = s.kernel_size(&m);
    if count > BigInt::from(cap) {
        return Err(PushError::TooMany { count: count.to_string(), cap });
    }
    let basis = s.kernel_basis(&m);
    let orders: Vec<u64> = basis.iter().map(|(_, o)| o.to_u64().expect("order below m")).collect();
    let total = count.to_usize().expect("count below cap");
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0u64; basis.len()];
    for _ in 0..total {
        let mut x = base.clone();
        for ((g, _), &c) in basis.iter().zip(&digits) {
            for (xi, gi) in x.iter_mut().zip(g) {
                *xi = (&*xi + gi * c) % &m;
            }
        }
        out.push(PushPlan(x.iter().map(to_u64).collect()));
        for k in (0..digits.len()).rev() {
            digits[k] += 1;
            if digits[k] < orders[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    Ok(out)
}
