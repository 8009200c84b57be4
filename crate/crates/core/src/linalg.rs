//! Small dense least-squares kernels.

use nalgebra::{DMatrix, DVector};

/// Relative pivot threshold below which a column counts as linearly dependent.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// Householder QR with column pivoting on the largest remaining column norm.
///
/// Columns whose remaining norm falls below `PIVOT_TOLERANCE` times the
/// first pivot are treated as dependent and excluded from the solve.
pub(crate) struct PivotedQr {
    r: DMatrix<f64>,
    reflectors: Vec<DVector<f64>>,
    perm: Vec<usize>,
    rank: usize,
}

impl PivotedQr {
    pub fn new(mut a: DMatrix<f64>) -> Self {
        let (rows, cols) = a.shape();
        let mut perm: Vec<usize> = (0..cols).collect();
        let mut reflectors = Vec::new();
        let mut rank = 0;
        let mut first_pivot = 0.0;
        for k in 0..cols.min(rows) {
            let (best, best_norm2) = (k..cols)
                .map(|j| (j, a.view((k, j), (rows - k, 1)).norm_squared()))
                .fold((k, -1.0), |acc, c| if c.1 > acc.1 { c } else { acc });
            if best != k {
                a.swap_columns(k, best);
                perm.swap(k, best);
            }
            let norm = best_norm2.sqrt();
            if k == 0 {
                first_pivot = norm;
            }
            if norm == 0.0 || norm <= PIVOT_TOLERANCE * first_pivot {
                break;
            }
            let mut v: DVector<f64> = a.view((k, k), (rows - k, 1)).column(0).into_owned();
            let alpha = if v[0] >= 0.0 { -norm } else { norm };
            v[0] -= alpha;
            let vnorm2 = v.norm_squared();
            if vnorm2 > 0.0 {
                for j in k..cols {
                    let mut col = a.view_mut((k, j), (rows - k, 1));
                    let mut col = col.column_mut(0);
                    let dot = v.dot(&col);
                    col.axpy(-2.0 * dot / vnorm2, &v, 1.0);
                }
            }
            a[(k, k)] = alpha;
            for i in k + 1..rows {
                a[(i, k)] = 0.0;
            }
            reflectors.push(v);
            rank += 1;
        }
        PivotedQr {
            r: a,
            reflectors,
            perm,
            rank,
        }
    }

    /// Original indices of the columns dropped as dependent.
    pub fn dependent_columns(&self) -> Vec<usize> {
        let mut cols = self.perm[self.rank..].to_vec();
        cols.sort_unstable();
        cols
    }

    /// Least-squares coefficients; dependent columns get zero.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let rows = self.r.nrows();
        let mut qtb = DVector::from_column_slice(b);
        for (k, v) in self.reflectors.iter().enumerate() {
            let vnorm2 = v.norm_squared();
            if vnorm2 == 0.0 {
                continue;
            }
            let mut seg = qtb.rows_mut(k, rows - k);
            let dot = v.dot(&seg);
            seg.axpy(-2.0 * dot / vnorm2, v, 1.0);
        }
        let mut coef = vec![0.0; self.r.ncols()];
        let mut z = vec![0.0; self.rank];
        for i in (0..self.rank).rev() {
            let mut s = qtb[i];
            for j in i + 1..self.rank {
                s -= self.r[(i, j)] * z[j];
            }
            z[i] = s / self.r[(i, i)];
        }
        for (k, &c) in self.perm[..self.rank].iter().enumerate() {
            coef[c] = z[k];
        }
        coef
    }
}

/// Solves a small square system by LU; `None` when numerically singular.
pub(crate) fn solve_square(a: DMatrix<f64>, b: DVector<f64>) -> Option<DVector<f64>> {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let lu = a.lu();
    let u = lu.u();
    let min_pivot = u.diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if !(min_pivot > PIVOT_TOLERANCE * scale) {
        return None;
    }
    lu.solve(&b).filter(|x| x.iter().all(|v| v.is_finite()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_full_rank_least_squares() {
        // y = 1 + 2 a - b exactly
        let a = DMatrix::from_row_slice(5, 3, &[
            1.0, 0.0, 1.0, //
            1.0, 1.0, 0.0, //
            1.0, 2.0, 3.0, //
            1.0, 3.0, 1.0, //
            1.0, 4.0, 2.0,
        ]);
        let y: Vec<f64> = (0..5).map(|i| 1.0 + 2.0 * a[(i, 1)] - a[(i, 2)]).collect();
        let qr = PivotedQr::new(a);
        assert_eq!(qr.rank, 3);
        let b = qr.solve(&y);
        for (got, want) in b.iter().zip([1.0, 2.0, -1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn flags_dependent_column() {
        let a = DMatrix::from_row_slice(4, 3, &[
            1.0, 2.0, 3.0, //
            0.0, 1.0, 1.0, //
            2.0, 0.0, 2.0, //
            1.0, 1.0, 2.0,
        ]);
        let qr = PivotedQr::new(a);
        assert_eq!(qr.rank, 2);
        assert_eq!(qr.dependent_columns().len(), 1);
    }

    #[test]
    fn zero_column_is_dependent() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 2.0, 0.0, 3.0, 0.0]);
        let qr = PivotedQr::new(a);
        assert_eq!(qr.dependent_columns(), vec![1]);
    }

    #[test]
    fn singular_square_system() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(solve_square(a, DVector::from_vec(vec![1.0, 2.0])).is_none());
    }
}
