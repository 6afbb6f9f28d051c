//! Small dense kernels for the (p+1)×(p+1) basis systems.

use alloc::vec;
use alloc::vec::Vec;

/// LU factorization with partial pivoting of a square row-major matrix.
#[derive(Debug, Clone)]
pub(crate) struct Lu {
    dim: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    det: f64,
}

impl Lu {
    /// Returns `None` if a pivot is exactly zero.
    pub(crate) fn factor(a: &[f64], dim: usize) -> Option<Lu> {
        debug_assert_eq!(a.len(), dim * dim);
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..dim).collect();
        let mut det = 1.0;
        for col in 0..dim {
            let mut piv = col;
            let mut best = libm::fabs(lu[col * dim + col]);
            for r in col + 1..dim {
                let v = libm::fabs(lu[r * dim + col]);
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 {
                return None;
            }
            if piv != col {
                for c in 0..dim {
                    lu.swap(piv * dim + c, col * dim + c);
                }
                perm.swap(piv, col);
                det = -det;
            }
            let d = lu[col * dim + col];
            det *= d;
            for r in col + 1..dim {
                let f = lu[r * dim + col] / d;
                lu[r * dim + col] = f;
                if f != 0.0 {
                    for c in col + 1..dim {
                        lu[r * dim + c] -= f * lu[col * dim + c];
                    }
                }
            }
        }
        Some(Lu { dim, lu, perm, det })
    }

    pub(crate) fn det(&self) -> f64 {
        self.det
    }

    /// Solves `A x = b` in place.
    pub(crate) fn solve(&self, b: &mut [f64]) {
        let n = self.dim;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let mut s = x[r];
            for c in 0..r {
                s -= self.lu[r * n + c] * x[c];
            }
            x[r] = s;
        }
        for r in (0..n).rev() {
            let mut s = x[r];
            for c in r + 1..n {
                s -= self.lu[r * n + c] * x[c];
            }
            x[r] = s / self.lu[r * n + r];
        }
        b.copy_from_slice(&x);
    }

    /// Solves `Aᵀ x = b` in place.
    pub(crate) fn solve_transpose(&self, b: &mut [f64]) {
        // PA = LU, so Aᵀ = Uᵀ Lᵀ P and Aᵀx = b  <=>  Uᵀ Lᵀ (P x) = b.
        let n = self.dim;
        let mut z = b.to_vec();
        for r in 0..n {
            let mut s = z[r];
            for c in 0..r {
                s -= self.lu[c * n + r] * z[c];
            }
            z[r] = s / self.lu[r * n + r];
        }
        for r in (0..n).rev() {
            let mut s = z[r];
            for c in r + 1..n {
                s -= self.lu[c * n + r] * z[c];
            }
            z[r] = s;
        }
        for (i, &p) in self.perm.iter().enumerate() {
            b[p] = z[i];
        }
    }
}

/// Numerical rank of a row-major `rows × cols` matrix by Gaussian elimination
/// with complete pivoting. A pivot counts when it exceeds `rel_tol` times the
/// largest pivot seen.
pub(crate) fn rank(a: &[f64], rows: usize, cols: usize, rel_tol: f64) -> usize {
    let mut m = a.to_vec();
    let mut rank = 0;
    let mut first = 0.0;
    let mut row_used = vec![false; rows];
    let mut col_used = vec![false; cols];
    for _ in 0..rows.min(cols) {
        let mut best = 0.0;
        let mut at = (0, 0);
        for r in (0..rows).filter(|&r| !row_used[r]) {
            for c in (0..cols).filter(|&c| !col_used[c]) {
                let v = libm::fabs(m[r * cols + c]);
                if v > best {
                    best = v;
                    at = (r, c);
                }
            }
        }
        if rank == 0 {
            first = best;
        }
        if best == 0.0 || best <= rel_tol * first {
            break;
        }
        let (pr, pc) = at;
        row_used[pr] = true;
        col_used[pc] = true;
        rank += 1;
        let d = m[pr * cols + pc];
        for r in (0..rows).filter(|&r| !row_used[r]) {
            let f = m[r * cols + pc] / d;
            if f != 0.0 {
                for c in 0..cols {
                    m[r * cols + c] -= f * m[pr * cols + c];
                }
            }
        }
    }
    rank
}

/// Picks `cols` rows of a tall matrix by partial-pivoted elimination; the
/// chosen rows form a well-conditioned square submatrix when the matrix has
/// full column rank.
pub(crate) fn pivot_rows(a: &[f64], rows: usize, cols: usize) -> Vec<usize> {
    let mut m = a.to_vec();
    let mut used = vec![false; rows];
    let mut chosen = Vec::with_capacity(cols);
    for c in 0..cols {
        let mut best = -1.0;
        let mut pr = 0;
        for r in (0..rows).filter(|&r| !used[r]) {
            let v = libm::fabs(m[r * cols + c]);
            if v > best {
                best = v;
                pr = r;
            }
        }
        used[pr] = true;
        chosen.push(pr);
        let d = m[pr * cols + c];
        if d == 0.0 {
            continue;
        }
        for r in (0..rows).filter(|&r| !used[r]) {
            let f = m[r * cols + c] / d;
            if f != 0.0 {
                for k in c..cols {
                    m[r * cols + k] -= f * m[pr * cols + k];
                }
            }
        }
    }
    chosen
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_both_orientations() {
        let a = [2.0, 1.0, 0.5, -1.0, 3.0, 2.0, 4.0, 0.0, 1.0];
        let lu = Lu::factor(&a, 3).unwrap();
        let mut x = [1.0, 2.0, 3.0];
        lu.solve(&mut x);
        for r in 0..3 {
            let v: f64 = (0..3).map(|c| a[r * 3 + c] * x[c]).sum();
            assert!((v - [1.0, 2.0, 3.0][r]).abs() < 1e-12);
        }
        let mut y = [1.0, -1.0, 0.25];
        lu.solve_transpose(&mut y);
        for c in 0..3 {
            let v: f64 = (0..3).map(|r| a[r * 3 + c] * y[r]).sum();
            assert!((v - [1.0, -1.0, 0.25][c]).abs() < 1e-12);
        }
        // det by cofactor expansion
        let det = 2.0 * (3.0 - 0.0) - 1.0 * (-1.0 - 8.0) + 0.5 * (0.0 - 12.0);
        assert!((lu.det() - det).abs() < 1e-12);
    }

    #[test]
    fn rank_detects_duplicate_columns() {
        let a = [1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 1.0, 3.0, 3.0];
        assert_eq!(rank(&a, 4, 3, 1e-10), 2);
        let b = [1.0, 0.0, 1.0, 1.0, 1.0, 2.0];
        assert_eq!(rank(&b, 3, 2, 1e-10), 2);
    }
}
