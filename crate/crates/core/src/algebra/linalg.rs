//! Exact integer and rational linear algebra on small dense matrices.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

pub type Q = Ratio<i128>;

pub fn q(n: i128) -> Q {
    Q::from_integer(n)
}

/// Inverse of a square rational matrix, `None` when singular.
pub fn inverse(a: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let n = a.len();
    let mut m: Vec<Vec<Q>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        let p = m[col][col];
        for v in m[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col];
                for c in 0..2 * n {
                    let t = m[col][c] * f;
                    m[r][c] -= t;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Determinant by fraction-free Gaussian elimination over the rationals.
pub fn determinant(a: &[Vec<Q>]) -> Q {
    let n = a.len();
    let mut m = a.to_vec();
    let mut det = Q::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Q::zero();
        };
        if piv != col {
            m.swap(col, piv);
            det = -det;
        }
        let p = m[col][col];
        det *= p;
        for r in col + 1..n {
            if !m[r][col].is_zero() {
                let f = m[r][col] / p;
                for c in col..n {
                    let t = m[col][c] * f;
                    m[r][c] -= t;
                }
            }
        }
    }
    det
}

/// Solves `x * a = b` for a row vector x, where `a` is k x n with k <= n
/// possibly overdetermined. Returns `None` when inconsistent or not unique.
pub fn solve_left(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    // Transpose to column form: a^T x^T = b^T, an n x k system.
    let k = a.len();
    let n = b.len();
    let mut m: Vec<Vec<Q>> = (0..n)
        .map(|j| {
            let mut row: Vec<Q> = (0..k).map(|i| a[i][j]).collect();
            row.push(b[j]);
            row
        })
        .collect();
    let mut r = 0;
    for col in 0..k {
        let piv = (r..n).find(|&i| !m[i][col].is_zero())?;
        m.swap(r, piv);
        let p = m[r][col];
        for v in m[r].iter_mut() {
            *v /= p;
        }
        for i in 0..n {
            if i != r && !m[i][col].is_zero() {
                let f = m[i][col];
                for c in col..=k {
                    let t = m[r][c] * f;
                    m[i][c] -= t;
                }
            }
        }
        r += 1;
    }
    if m[r..].iter().any(|row| !row[k].is_zero()) {
        return None;
    }
    Some((0..k).map(|i| m[i][k]).collect())
}

/// Row vector times matrix.
pub fn vec_mat(v: &[Q], a: &[Vec<Q>]) -> Vec<Q> {
    let cols = a.first().map_or(0, |r| r.len());
    (0..cols)
        .map(|j| v.iter().zip(a).fold(Q::zero(), |acc, (x, row)| acc + *x * row[j]))
        .collect()
}

/// Row echelon form over the integers restricted to the first `ncols`
/// columns. Returns the rank; rows at index >= rank have zeros in those
/// columns. Pivots are made positive and entries above each pivot are
/// reduced into `[0, pivot)`.
pub fn echelon(rows: &mut [Vec<i128>], ncols: usize) -> usize {
    let mut r = 0;
    let mut pivots = Vec::new();
    for col in 0..ncols {
        loop {
            let piv = (r..rows.len())
                .filter(|&i| rows[i][col] != 0)
                .min_by_key(|&i| rows[i][col].abs());
            let Some(p) = piv else { break };
            rows.swap(r, p);
            let mut clean = true;
            for i in r + 1..rows.len() {
                if rows[i][col] != 0 {
                    let f = rows[i][col] / rows[r][col];
                    if f != 0 {
                        let (head, tail) = rows.split_at_mut(i);
                        for (x, y) in tail[0].iter_mut().zip(&head[r]) {
                            *x -= f * y;
                        }
                    }
                    if rows[i][col] != 0 {
                        clean = false;
                    }
                }
            }
            if clean {
                break;
            }
        }
        if r < rows.len() && rows[r][col] != 0 {
            if rows[r][col] < 0 {
                for x in rows[r].iter_mut() {
                    *x = -*x;
                }
            }
            pivots.push((r, col));
            r += 1;
        }
        if r == rows.len() {
            break;
        }
    }
    for &(pr, pc) in pivots.iter() {
        let p = rows[pr][pc];
        for i in 0..pr {
            let f = Integer::div_floor(&rows[i][pc], &p);
            if f != 0 {
                let (head, tail) = rows.split_at_mut(pr);
                for (x, y) in head[i].iter_mut().zip(&tail[0]) {
                    *x -= f * y;
                }
            }
        }
    }
    r
}

/// Hermite normal form (upper triangular, positive diagonal, reduced above
/// the diagonal) of the lattice spanned by `rows` in Z^m. Returns `None`
/// unless the lattice has full rank m.
pub fn hnf(mut rows: Vec<Vec<i128>>, m: usize) -> Option<Vec<Vec<i128>>> {
    let rank = echelon(&mut rows, m);
    if rank != m {
        return None;
    }
    rows.truncate(m);
    for (i, row) in rows.iter().enumerate() {
        if row[i] <= 0 || row[..i].iter().any(|&x| x != 0) {
            return None;
        }
    }
    Some(rows)
}

/// The lattice { k in Z^m : k * b == 0 (mod d) } as a full-rank HNF.
pub fn kernel_mod(b: &[Vec<i128>], d: i128) -> Vec<Vec<i128>> {
    let m = b.len();
    let mut rows: Vec<Vec<i128>> = Vec::with_capacity(2 * m);
    for (i, brow) in b.iter().enumerate() {
        let mut r: Vec<i128> = brow.iter().map(|x| x.rem_euclid(d)).collect();
        r.extend((0..m).map(|j| i128::from(i == j)));
        rows.push(r);
    }
    for j in 0..m {
        let mut r = vec![0i128; 2 * m];
        r[j] = d;
        rows.push(r);
    }
    let rank = echelon(&mut rows, m);
    let kernel: Vec<Vec<i128>> = rows[rank..].iter().map(|r| r[m..].to_vec()).collect();
    hnf(kernel, m).expect("kernel contains d Z^m and so has full rank")
}

/// Least common multiple of the denominators.
pub fn common_denominator(v: &[Q]) -> i128 {
    v.iter().fold(1i128, |acc, x| acc.lcm(x.denom()))
}

pub fn abs_max(v: &[Q]) -> Q {
    v.iter()
        .map(|x| x.abs())
        .fold(Q::zero(), |a, b| if b > a { b } else { a })
}
