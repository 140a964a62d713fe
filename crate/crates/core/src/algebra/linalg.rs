//! Dense linear algebra over a field.

use super::coeff::Coefficient;

/// Row-reduced echelon form of a matrix, kept for membership queries.
#[derive(Clone, Debug)]
pub struct RowEchelon<C> {
    rows: Vec<Vec<C>>,
    pivots: Vec<usize>,
    ncols: usize,
}

impl<C: Coefficient> RowEchelon<C> {
    /// Gauss-Jordan elimination. `ncols` is needed when `rows` is empty.
    pub fn new(rows: &[Vec<C>], ncols: usize) -> Self {
        let mut m: Vec<Vec<C>> = rows.to_vec();
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..ncols {
            let Some(p) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
                continue;
            };
            m.swap(r, p);
            let inv = m[r][col].inv().expect("nonzero pivot");
            for v in m[r].iter_mut() {
                *v = v.mul(&inv);
            }
            let pivot_row = m[r].clone();
            for (i, row) in m.iter_mut().enumerate() {
                if i != r && !row[col].is_zero() {
                    let k = row[col].clone();
                    for (x, y) in row.iter_mut().zip(&pivot_row) {
                        *x = x.sub(&k.mul(y));
                    }
                }
            }
            pivots.push(col);
            r += 1;
        }
        m.truncate(r);
        RowEchelon {
            rows: m,
            pivots,
            ncols,
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Whether `v` lies in the row space.
    pub fn contains(&self, v: &[C]) -> bool {
        let mut w = v.to_vec();
        for (row, &col) in self.rows.iter().zip(&self.pivots) {
            if !w[col].is_zero() {
                let k = w[col].clone();
                for (x, y) in w.iter_mut().zip(row) {
                    *x = x.sub(&k.mul(y));
                }
            }
        }
        w.iter().all(|x| x.is_zero())
    }

    /// Whether the unit vector `e_k` lies in the row space.
    pub fn contains_unit(&self, k: usize) -> bool {
        let mut v = Vec::with_capacity(self.ncols);
        let Some(one) = self.rows.first().map(|r| r[0].one_like()) else {
            return false;
        };
        for i in 0..self.ncols {
            v.push(if i == k { one.clone() } else { one.zero_like() });
        }
        self.contains(&v)
    }
}

/// Rank by Gaussian elimination.
pub fn matrix_rank<C: Coefficient>(rows: &[Vec<C>]) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    RowEchelon::new(rows, ncols).rank()
}

/// Fraction-free determinant (Bareiss). Exact over any field.
pub fn bareiss_determinant<C: Coefficient>(m: &[Vec<C>]) -> Option<C> {
    let n = m.len();
    let first = m.first()?.first()?;
    let mut a = m.to_vec();
    let mut sign = first.one_like();
    let mut prev = first.one_like();
    for k in 0..n.saturating_sub(1) {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return Some(first.zero_like());
            };
            a.swap(k, p);
            sign = sign.neg();
        }
        let prev_inv = prev.inv()?;
        for i in k + 1..n {
            for j in k + 1..n {
                let t = a[i][j].mul(&a[k][k]).sub(&a[i][k].mul(&a[k][j]));
                a[i][j] = t.mul(&prev_inv);
            }
        }
        prev = a[k][k].clone();
    }
    Some(sign.mul(&a[n - 1][n - 1]))
}
