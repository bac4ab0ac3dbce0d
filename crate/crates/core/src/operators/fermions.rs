use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, identity, CMatrix, Limits, I, ONE, ZERO};
use crate::spaces::fock_even_isometry;

use super::LinearOperator;

/// Eigenvalues below this fraction of the largest magnitude count as zero.
pub const KERNEL_REL_TOL: f64 = 1e-9;

fn jordan_wigner_annihilator(d: usize, mode: usize) -> CMatrix {
    let z = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![ONE, -ONE]));
    let a = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
    let mut acc = CMatrix::identity(1, 1);
    for k in 0..d {
        let factor = if k < mode {
            z.clone()
        } else if k == mode {
            a.clone()
        } else {
            identity(2)
        };
        acc = acc.kronecker(&factor);
    }
    acc
}

/// Majorana operators `c_{2k−1} = a_k + a_k†`, `c_{2k} = i(a_k − a_k†)` on the
/// full `2^d`-dimensional Fock space, in the order `c_1, …, c_{2d}`.
pub fn majorana_matrices(d: usize) -> Result<Vec<CMatrix>> {
    if d == 0 {
        return Err(Error::param("need at least one fermionic mode"));
    }
    if d >= 31 {
        return Err(Error::param("too many fermionic modes"));
    }
    let dim = 1u128 << d;
    Limits::default().check_dense("Majorana operators", dim, dim)?;
    let mut out = Vec::with_capacity(2 * d);
    for mode in 0..d {
        let a = jordan_wigner_annihilator(d, mode);
        let ad = a.adjoint();
        out.push(&a + &ad);
        out.push((&a - &ad) * I);
    }
    Ok(out)
}

pub fn majorana_ops(d: usize) -> Result<Vec<LinearOperator>> {
    Ok(majorana_matrices(d)?
        .into_iter()
        .map(|m| LinearOperator::dense(m, true))
        .collect())
}

/// Fermion parity `(−1)^{n_1+…+n_d}` on the full Fock space.
pub fn parity_matrix(d: usize) -> CMatrix {
    let dim = 1usize << d;
    CMatrix::from_fn(dim, dim, |i, j| {
        if i != j {
            ZERO
        } else if i.count_ones() % 2 == 0 {
            ONE
        } else {
            -ONE
        }
    })
}

/// `Λ = Σ_i c_i ⊗ c_i` on `Fock ⊗ Fock`.
pub fn lambda_operator(d: usize) -> Result<LinearOperator> {
    let cs = majorana_matrices(d)?;
    let dim = 1u128 << (2 * d);
    Limits::default().check_dense("Λ on Fock ⊗ Fock", dim, dim)?;
    let mut acc = CMatrix::zeros(dim as usize, dim as usize);
    for m in &cs {
        acc += m.kronecker(m);
    }
    Ok(LinearOperator::dense(acc, true))
}

/// `Λ (E ⊗ E)` with `E` the even-sector embedding: a `4^d × 4^{d−1}` matrix
/// whose image lies in `odd ⊗ odd`.
pub fn lambda_even_sector(d: usize) -> Result<CMatrix> {
    let cs = majorana_matrices(d)?;
    let e = fock_even_isometry(d)?;
    let rows = 1u128 << (2 * d);
    let cols = 1u128 << (2 * d - 2);
    Limits::default().check_dense("Λ restricted to even ⊗ even", rows, cols)?;
    let mut acc = CMatrix::zeros(rows as usize, cols as usize);
    for m in &cs {
        let ce = m * e.matrix();
        acc += ce.kronecker(&ce);
    }
    Ok(acc)
}

/// Orthogonal projector onto the eigenvectors of Hermitian `op` whose
/// eigenvalue magnitude is below `rel_tol` times the largest magnitude.
pub fn kernel_projector(op: &LinearOperator, rel_tol: f64) -> Result<LinearOperator> {
    let m = op.to_dense()?;
    let defect = crate::linalg::hermiticity_defect(&m);
    let scale = crate::linalg::max_abs(&m).max(1.0);
    if defect > 1e-10 * scale {
        return Err(Error::Numeric {
            what: "kernel_projector on a non-Hermitian operator".into(),
            residual: defect,
        });
    }
    let (values, vectors) = hermitian_eigen(&m);
    let largest = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let threshold = rel_tol * largest;
    let n = m.nrows();
    let mut p = CMatrix::zeros(n, n);
    for (k, &v) in values.iter().enumerate() {
        if largest == 0.0 || v.abs() < threshold {
            let col = vectors.column(k);
            p += col * col.adjoint();
        }
    }
    let residual = crate::linalg::idempotence_defect(&p);
    if residual > 1e-10 {
        return Err(Error::Numeric {
            what: "kernel projector idempotence".into(),
            residual,
        });
    }
    Ok(LinearOperator::dense(p, true))
}
