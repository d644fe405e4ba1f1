//! Dense integer matrices and the two normal forms the lattice code needs:
//! elementary divisors (Smith diagonal) and row-style Hermite normal form.
//!
//! Everything here runs on `BigInt`, so no intermediate can overflow.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type IntMatrix = Vec<Vec<BigInt>>;

pub fn from_i64(rows: &[Vec<i64>]) -> IntMatrix {
    rows.iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect()
}

fn ncols(m: &IntMatrix) -> usize {
    m.first().map_or(0, Vec::len)
}

/// Nonzero elementary divisors d_1 | d_2 | ... of `m`, all positive.
pub fn elementary_divisors(m: &IntMatrix) -> Vec<BigInt> {
    let mut a = m.clone();
    let rows = a.len();
    let cols = ncols(&a);
    let mut divisors = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // smallest nonzero entry of the trailing block becomes the pivot
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !a[i][j].is_zero()
                    && best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }

        let mut dirty = false;
        for i in t + 1..rows {
            if a[i][t].is_zero() {
                continue;
            }
            let q = a[i][t].div_floor(&a[t][t]);
            for j in t..cols {
                let s = &q * &a[t][j];
                a[i][j] -= s;
            }
            dirty |= !a[i][t].is_zero();
        }
        for j in t + 1..cols {
            if a[t][j].is_zero() {
                continue;
            }
            let q = a[t][j].div_floor(&a[t][t]);
            for i in t..rows {
                let s = &q * &a[i][t];
                a[i][j] -= s;
            }
            dirty |= !a[t][j].is_zero();
        }
        if dirty {
            // a remainder survived: it is smaller than the pivot, repeat
            continue;
        }
        // the pivot must divide the whole trailing block
        let mut offender = None;
        'scan: for i in t + 1..rows {
            for j in t + 1..cols {
                if !a[i][j].mod_floor(&a[t][t]).is_zero() {
                    offender = Some(i);
                    break 'scan;
                }
            }
        }
        if let Some(i) = offender {
            for j in t..cols {
                let v = a[i][j].clone();
                a[t][j] += v;
            }
            continue;
        }
        divisors.push(a[t][t].abs());
        t += 1;
    }
    divisors
}

pub fn rank(m: &IntMatrix) -> usize {
    elementary_divisors(m).len()
}

/// Row-style Hermite normal form: echelon, positive pivots, entries above a
/// pivot reduced into `[0, pivot)`. Zero rows are dropped.
pub fn hermite_rows(m: &IntMatrix) -> IntMatrix {
    let mut a = m.clone();
    let rows = a.len();
    let cols = ncols(&a);
    let mut r = 0;
    let mut pivots = Vec::new();
    for c in 0..cols {
        if r == rows {
            break;
        }
        // gcd-combine rows r.. into a single nonzero entry in column c
        loop {
            let mut best: Option<usize> = None;
            for i in r..rows {
                if !a[i][c].is_zero() && best.map_or(true, |b| a[i][c].abs() < a[b][c].abs()) {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            a.swap(r, b);
            let mut done = true;
            for i in r + 1..rows {
                if a[i][c].is_zero() {
                    continue;
                }
                let q = a[i][c].div_floor(&a[r][c]);
                for j in c..cols {
                    let s = &q * &a[r][j];
                    a[i][j] -= s;
                }
                done &= a[i][c].is_zero();
            }
            if done {
                break;
            }
        }
        if a[r][c].is_zero() {
            continue;
        }
        if a[r][c].is_negative() {
            for x in a[r].iter_mut() {
                *x = -x.clone();
            }
        }
        for i in 0..r {
            let q = a[i][c].div_floor(&a[r][c]);
            if q.is_zero() {
                continue;
            }
            for j in c..cols {
                let s = &q * &a[r][j];
                a[i][j] -= s;
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    a
}

/// Integer kernel of `m` (as row vectors), computed from a unimodular column
/// transform, hence saturated. Rows are in Hermite normal form.
pub fn kernel_basis(m: &IntMatrix) -> IntMatrix {
    let rows = m.len();
    let cols = ncols(m);
    let mut a = m.clone();
    // u accumulates the column operations: a = m * u
    let mut u: IntMatrix = (0..cols)
        .map(|i| (0..cols).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let mut piv = 0;
    for r in 0..rows {
        if piv == cols {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for j in piv..cols {
                if !a[r][j].is_zero() && best.map_or(true, |b| a[r][j].abs() < a[r][b].abs()) {
                    best = Some(j);
                }
            }
            let Some(b) = best else { break };
            swap_cols(&mut a, piv, b);
            swap_cols(&mut u, piv, b);
            let mut done = true;
            for j in piv + 1..cols {
                if a[r][j].is_zero() {
                    continue;
                }
                let q = a[r][j].div_floor(&a[r][piv]);
                col_axpy(&mut a, j, piv, &q);
                col_axpy(&mut u, j, piv, &q);
                done &= a[r][j].is_zero();
            }
            if done {
                break;
            }
        }
        if !a[r][piv].is_zero() {
            piv += 1;
        }
    }
    let kernel: IntMatrix = (piv..cols).map(|j| u.iter().map(|row| row[j].clone()).collect()).collect();
    hermite_rows(&kernel)
}

fn swap_cols(a: &mut IntMatrix, i: usize, j: usize) {
    if i != j {
        for row in a.iter_mut() {
            row.swap(i, j);
        }
    }
}

// column j -= q * column i
fn col_axpy(a: &mut IntMatrix, j: usize, i: usize, q: &BigInt) {
    for row in a.iter_mut() {
        let s = q * &row[i];
        row[j] -= s;
    }
}

pub fn mat_mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let inner = b.len();
    let cols = ncols(b);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(BigInt::zero(), |acc, t| acc + &row[t] * &b[t][j]))
                .collect()
        })
        .collect()
}

pub fn transpose(a: &IntMatrix) -> IntMatrix {
    (0..ncols(a)).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}
