//! Smith normal form of integer matrices, and what it gives over `Z_m`:
//! solving `A x ≡ b`, counting solutions, and a kernel basis.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Matrix = Vec<Vec<BigInt>>;

/// `U · A · V = D` with `U`, `V` unimodular and `D` diagonal, every diagonal
/// entry dividing the next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Smith {
    pub u: Matrix,
    pub v: Matrix,
    /// Nonzero diagonal entries `d_1 | d_2 | …`, all positive.
    pub diagonal: Vec<BigInt>,
    pub rows: usize,
    pub cols: usize,
}

fn identity(n: usize) -> Matrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect()
}

fn row_axpy(m: &mut Matrix, target: usize, source: usize, k: &BigInt) {
    if k.is_zero() {
        return;
    }
    let src = m[source].clone();
    for (t, s) in m[target].iter_mut().zip(src) {
        *t += k * s;
    }
}

fn col_axpy(m: &mut Matrix, target: usize, source: usize, k: &BigInt) {
    if k.is_zero() {
        return;
    }
    for row in m.iter_mut() {
        let s = row[source].clone();
        row[target] += k * s;
    }
}

fn swap_cols(m: &mut Matrix, a: usize, b: usize) {
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

pub fn smith(a: &Matrix, cols: usize) -> Smith {
    let rows = a.len();
    let mut d = a.clone();
    let mut u = identity(rows);
    let mut v = identity(cols);
    let mut diagonal = Vec::new();
    for t in 0..rows.min(cols) {
        // smallest nonzero entry of the remaining block as pivot
        let pivot = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| !d[i][j].is_zero())
            .min_by(|&(a, b), &(c, e)| d[a][b].abs().cmp(&d[c][e].abs()));
        let Some((pi, pj)) = pivot else {
            break;
        };
        d.swap(t, pi);
        u.swap(t, pi);
        swap_cols(&mut d, t, pj);
        swap_cols(&mut v, t, pj);
        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if d[i][t].is_zero() {
                    continue;
                }
                let q = -d[i][t].div_floor(&d[t][t]);
                row_axpy(&mut d, i, t, &q);
                row_axpy(&mut u, i, t, &q);
                if !d[i][t].is_zero() {
                    d.swap(t, i);
                    u.swap(t, i);
                    dirty = true;
                }
            }
            for j in t + 1..cols {
                if d[t][j].is_zero() {
                    continue;
                }
                let q = -d[t][j].div_floor(&d[t][t]);
                col_axpy(&mut d, j, t, &q);
                col_axpy(&mut v, j, t, &q);
                if !d[t][j].is_zero() {
                    swap_cols(&mut d, t, j);
                    swap_cols(&mut v, t, j);
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !d[i][j].is_multiple_of(&d[t][t])));
            match bad {
                Some(i) => {
                    row_axpy(&mut d, t, i, &BigInt::one());
                    row_axpy(&mut u, t, i, &BigInt::one());
                }
                None => break,
            }
        }
        if d[t][t].is_negative() {
            for x in d[t].iter_mut() {
                *x = -x.clone();
            }
            for x in u[t].iter_mut() {
                *x = -x.clone();
            }
        }
        diagonal.push(d[t][t].clone());
    }
    Smith { u, v, diagonal, rows, cols }
}

impl Smith {
    pub fn rank(&self) -> usize {
        self.diagonal.len()
    }

    fn gcds(&self, m: &BigInt) -> Vec<BigInt> {
        self.diagonal.iter().map(|d| d.gcd(m)).collect()
    }

    /// `|{x ∈ Z_m^cols : A x ≡ 0}| = m^{cols - s} · Π gcd(d_i, m)`.
    pub fn kernel_size(&self, m: &BigInt) -> BigInt {
        self.gcds(m).iter().product::<BigInt>() * num_traits::pow(m.clone(), self.cols - self.rank())
    }

    /// `|Z_m^rows / A Z_m^cols| = m^{rows - s} · Π gcd(d_i, m)`.
    pub fn cokernel_size(&self, m: &BigInt) -> BigInt {
        self.gcds(m).iter().product::<BigInt>() * num_traits::pow(m.clone(), self.rows - self.rank())
    }

    /// One solution of `A x ≡ b (mod m)`, entries in `[0, m)`.
    pub fn solve(&self, b: &[BigInt], m: &BigInt) -> Option<Vec<BigInt>> {
        let c: Vec<BigInt> =
            self.u.iter().map(|row| row.iter().zip(b).map(|(x, y)| x * y).sum::<BigInt>().mod_floor(m)).collect();
        let mut y = vec![BigInt::zero(); self.cols];
        for (i, ci) in c.iter().enumerate() {
            match self.diagonal.get(i) {
                Some(d) => {
                    let g = d.gcd(m);
                    if !ci.is_multiple_of(&g) {
                        return None;
                    }
                    let modulus = m / &g;
                    let inv = mod_inverse(&(d / &g), &modulus).expect("coprime after dividing the gcd");
                    y[i] = ((ci / &g) * inv).mod_floor(&modulus);
                }
                None if !ci.is_zero() => return None,
                None => {}
            }
        }
        Some(self.apply_v(&y, m))
    }

    /// Generators of the solution group of `A x ≡ 0`, each with its order:
    /// every solution is `Σ c_i g_i` with `0 ≤ c_i < order_i`, uniquely.
    pub fn kernel_basis(&self, m: &BigInt) -> Vec<(Vec<BigInt>, BigInt)> {
        let mut out = Vec::new();
        for j in 0..self.cols {
            let (step, order) = match self.diagonal.get(j) {
                Some(d) => {
                    let g = d.gcd(m);
                    if g.is_one() {
                        continue;
                    }
                    (m / &g, g)
                }
                None => (BigInt::one(), m.clone()),
            };
            let mut y = vec![BigInt::zero(); self.cols];
            y[j] = step;
            out.push((self.apply_v(&y, m), order));
        }
        out
    }

    fn apply_v(&self, y: &[BigInt], m: &BigInt) -> Vec<BigInt> {
        self.v.iter().map(|row| row.iter().zip(y).map(|(a, b)| a * b).sum::<BigInt>().mod_floor(m)).collect()
    }
}

pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    if m.is_one() {
        return Some(BigInt::zero());
    }
    let e = a.mod_floor(m).extended_gcd(m);
    e.gcd.is_one().then(|| e.x.mod_floor(m))
}

pub fn to_u64(x: &BigInt) -> u64 {
    x.to_u64().expect("value reduced mod a u64 modulus")
}
