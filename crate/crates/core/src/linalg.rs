//! Dense complex helpers shared by every module.
//!
//! Vectors on a tensor product use row-major multi-indices: the first factor
//! is the most significant digit. A vector `v` on `C^n ⊗ C^m` reshapes to the
//! `n × m` matrix `V[(i, j)] = v[i * m + j]`, so `(a ⊗ b) v = vec(a V bᵀ)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Bytes per dense complex entry.
const ENTRY_BYTES: u128 = 16;

/// Upper bound on dense storage for any single constructed matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_dense_bytes: u128,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_dense_bytes: 2 << 30,
        }
    }
}

impl Limits {
    pub fn check_dense(&self, what: &str, rows: u128, cols: u128) -> Result<()> {
        let needed = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(ENTRY_BYTES))
            .unwrap_or(u128::MAX);
        if needed > self.max_dense_bytes {
            return Err(Error::Resource {
                what: what.to_string(),
                needed_bytes: needed,
                cap_bytes: self.max_dense_bytes,
            });
        }
        Ok(())
    }
}

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn kron_dense(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_vec(v: &CVector) -> f64 {
    v.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn idempotence_defect(m: &CMatrix) -> f64 {
    max_abs(&(m * m - m))
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// `tr(a · b)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> C64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = ZERO;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = (m + m.adjoint()).scale(0.5);
    let eig = h.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()).scale(0.5);
    let mut values: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Swap operator τ on `C^n ⊗ C^n`.
pub fn swap_matrix(n: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            m[(j * n + i, i * n + j)] = ONE;
        }
    }
    m
}

/// Reshape a vector on `C^rows ⊗ C^cols` to its coefficient matrix.
pub fn unvec(v: &CVector, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |i, j| v[i * cols + j])
}

/// Inverse of [`unvec`].
pub fn vec_of(m: &CMatrix) -> CVector {
    let (rows, cols) = m.shape();
    CVector::from_fn(rows * cols, |k, _| m[(k / cols, k % cols)])
}

/// Rank-one projector `|v⟩⟨v|`.
pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Binomial coefficient in floating point, usable beyond `u128` range.
pub fn binomial_f64(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(8, 4), 70);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(60, 30), 118264581564861424);
        assert_eq!(binomial_f64(8, 4), 70.0);
    }

    #[test]
    fn swap_squares_to_identity() {
        let s = swap_matrix(3);
        assert!(max_abs(&(&s * &s - identity(9))) == 0.0);
        assert_eq!(trace(&s).re, 3.0);
    }

    #[test]
    fn kron_against_unvec() {
        let a = CMatrix::from_fn(2, 2, |i, j| C64::new(i as f64 + 1.0, j as f64));
        let b = CMatrix::from_fn(3, 3, |i, j| C64::new((i * j) as f64, 1.0));
        let v = CVector::from_fn(6, |k, _| C64::new(k as f64, -(k as f64) / 2.0));
        let direct = kron_dense(&a, &b) * &v;
        let via = vec_of(&(&a * unvec(&v, 2, 3) * b.transpose()));
        assert!(max_abs_vec(&(direct - via)) < 1e-12);
    }

    #[test]
    fn eigen_is_sorted_and_reconstructs() {
        let m = CMatrix::from_fn(4, 4, |i, j| C64::new((i + j) as f64, i as f64 - j as f64));
        let (vals, vecs) = hermitian_eigen(&m);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let diag = CMatrix::from_diagonal(&CVector::from_iterator(4, vals.iter().map(|&x| c(x))));
        let rebuilt = &vecs * diag * vecs.adjoint();
        assert!(max_abs(&(rebuilt - m)) < 1e-12);
    }

    #[test]
    fn cap_rejects_oversized() {
        let lim = Limits {
            max_dense_bytes: 1024,
        };
        assert!(lim.check_dense("x", 8, 8).is_ok());
        assert!(matches!(
            lim.check_dense("x", 9, 9),
            Err(Error::Resource { .. })
        ));
    }
}
