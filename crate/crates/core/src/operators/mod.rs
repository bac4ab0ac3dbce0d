//! Operators on one or two copies of the physical space: symmetric and
//! antisymmetric projectors, pair and block symmetrizers, Majorana operators,
//! and the class projector `A` with its witness `V = A − P^asym`.

mod fermions;
mod permutation;
mod projector;

use std::sync::Arc;

pub use fermions::{
    kernel_projector, lambda_even_sector, lambda_operator, majorana_matrices, majorana_ops,
    parity_matrix, KERNEL_REL_TOL,
};
pub use permutation::{
    block_symmetrizer_sum, compose_perms, copy_swap, identity_perm, pair_product_sum,
    pair_symmetrizer_sum, perm_sign, permutations_of, Character, PermutationSum, PermutationTerm,
};
pub use projector::{
    bosonic_printed_composition, build_a, build_a_with, build_v, dense_reference_a, matrix_free_a,
    AxiomDefects, ProjectorA, DENSE_REFERENCE_MAX_DIM,
};

use crate::error::{Error, Result};
use crate::linalg::{hermiticity_defect, CMatrix, CVector, Limits};
use crate::spaces::Isometry;

/// One summand of a matrix-free operator: a permutation sum, optionally
/// sandwiched as `(J⊗J)† Σ (J⊗J)` by a per-copy embedding `J`.
#[derive(Clone, Debug)]
pub struct EmbeddedSum {
    pub sum: PermutationSum,
    pub embedding: Option<Arc<Isometry>>,
}

impl EmbeddedSum {
    pub fn dim(&self) -> usize {
        match &self.embedding {
            Some(j) => j.source_dim() * j.source_dim(),
            None => self.sum.dim(),
        }
    }

    fn apply(&self, v: &CVector) -> Result<CVector> {
        match &self.embedding {
            None => self.sum.apply(v),
            Some(j) => {
                let lifted = j.embed_pair(v)?;
                j.restrict_pair(&self.sum.apply(&lifted)?)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub enum Representation {
    Dense(CMatrix),
    PermutationSum(Vec<EmbeddedSum>),
}

/// Complex operator on a finite space, dense or as a matrix-free sum of
/// (embedded) factor permutations.
#[derive(Clone, Debug)]
pub struct LinearOperator {
    dim: usize,
    hermitian: bool,
    repr: Representation,
}

impl LinearOperator {
    pub fn dense(matrix: CMatrix, hermitian: bool) -> Self {
        assert!(matrix.is_square(), "operators are square");
        LinearOperator {
            dim: matrix.nrows(),
            hermitian,
            repr: Representation::Dense(matrix),
        }
    }

    pub fn from_sum(sum: PermutationSum, hermitian: bool) -> Self {
        Self::from_parts(
            vec![EmbeddedSum {
                sum,
                embedding: None,
            }],
            hermitian,
        )
        .expect("a single summand is always consistent")
    }

    pub fn from_parts(parts: Vec<EmbeddedSum>, hermitian: bool) -> Result<Self> {
        let dim = parts
            .first()
            .map(EmbeddedSum::dim)
            .ok_or_else(|| Error::param("matrix-free operator needs at least one summand"))?;
        for p in &parts {
            Error::check_dim(dim, p.dim())?;
        }
        Ok(LinearOperator {
            dim,
            hermitian,
            repr: Representation::PermutationSum(parts),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn is_matrix_free(&self) -> bool {
        matches!(self.repr, Representation::PermutationSum(_))
    }

    pub fn apply(&self, v: &CVector) -> Result<CVector> {
        Error::check_dim(self.dim, v.len())?;
        match &self.repr {
            Representation::Dense(m) => Ok(m * v),
            Representation::PermutationSum(parts) => {
                let mut out = parts[0].apply(v)?;
                for p in &parts[1..] {
                    out += p.apply(v)?;
                }
                Ok(out)
            }
        }
    }

    pub fn to_dense(&self) -> Result<CMatrix> {
        self.to_dense_with(&Limits::default())
    }

    pub fn to_dense_with(&self, limits: &Limits) -> Result<CMatrix> {
        match &self.repr {
            Representation::Dense(m) => Ok(m.clone()),
            Representation::PermutationSum(parts) => {
                limits.check_dense("dense operator", self.dim as u128, self.dim as u128)?;
                if let [EmbeddedSum {
                    sum,
                    embedding: None,
                }] = parts.as_slice()
                {
                    return sum.to_dense();
                }
                let mut m = CMatrix::zeros(self.dim, self.dim);
                let mut e = CVector::zeros(self.dim);
                for col in 0..self.dim {
                    e[col] = crate::linalg::ONE;
                    m.set_column(col, &self.apply(&e)?);
                    e[col] = crate::linalg::ZERO;
                }
                Ok(m)
            }
        }
    }

    /// `self + other`; stays matrix-free when both are.
    pub fn add(&self, other: &LinearOperator) -> Result<LinearOperator> {
        Error::check_dim(self.dim, other.dim)?;
        let hermitian = self.hermitian && other.hermitian;
        match (&self.repr, &other.repr) {
            (Representation::PermutationSum(a), Representation::PermutationSum(b)) => {
                Self::from_parts(a.iter().chain(b).cloned().collect(), hermitian)
            }
            _ => Ok(Self::dense(self.to_dense()? + other.to_dense()?, hermitian)),
        }
    }

    pub fn scale(&self, factor: f64) -> LinearOperator {
        let repr = match &self.repr {
            Representation::Dense(m) => Representation::Dense(m * crate::linalg::c(factor)),
            Representation::PermutationSum(parts) => Representation::PermutationSum(
                parts
                    .iter()
                    .map(|p| EmbeddedSum {
                        sum: p.sum.scaled(factor),
                        embedding: p.embedding.clone(),
                    })
                    .collect(),
            ),
        };
        LinearOperator { repr, ..*self }
    }

    /// Operator product `self · other`.
    pub fn compose(&self, other: &LinearOperator) -> Result<LinearOperator> {
        Error::check_dim(self.dim, other.dim)?;
        let hermitian = false;
        if let (Representation::PermutationSum(a), Representation::PermutationSum(b)) =
            (&self.repr, &other.repr)
        {
            if let (
                [EmbeddedSum {
                    sum: x,
                    embedding: None,
                }],
                [EmbeddedSum {
                    sum: y,
                    embedding: None,
                }],
            ) = (a.as_slice(), b.as_slice())
            {
                return Ok(Self::from_sum(x.compose(y)?, hermitian));
            }
        }
        Ok(Self::dense(self.to_dense()? * other.to_dense()?, hermitian))
    }

    /// `‖O − O†‖_max` of the dense form.
    pub fn hermiticity_defect(&self) -> Result<f64> {
        Ok(hermiticity_defect(&self.to_dense()?))
    }
}

/// `(I + τ)/2` on `C^n ⊗ C^n`, rank `n(n+1)/2`.
pub fn projector_sym2(n: usize) -> Result<LinearOperator> {
    if n == 0 {
        return Err(Error::param("projector_sym2 needs N >= 1"));
    }
    Ok(LinearOperator::from_sum(permutation::sym2_sum(n), true))
}

/// `(I − τ)/2` on `C^n ⊗ C^n`, rank `n(n−1)/2`.
pub fn projector_asym2(n: usize) -> Result<LinearOperator> {
    if n == 0 {
        return Err(Error::param("projector_asym2 needs N >= 1"));
    }
    Ok(LinearOperator::from_sum(permutation::asym2_sum(n), true))
}

/// `P⁺_{ii'}` on the `2L` factors of two copies of `(C^d)^{⊗L}`; `i` is 1-based.
pub fn pair_symmetrizer(d: usize, l: usize, i: usize) -> Result<LinearOperator> {
    if i == 0 || i > l {
        return Err(Error::param(format!("pair index {i} out of range 1..={l}")));
    }
    Ok(LinearOperator::from_sum(
        permutation::pair_symmetrizer_sum(d, l, i - 1)?,
        true,
    ))
}

/// (Anti)symmetrizer over the 1-based factor positions `indices` among the
/// `2L` factors (`1..L` unprimed, `L+1..2L` primed).
pub fn block_symmetrizer(
    d: usize,
    l: usize,
    indices: &[usize],
    character: Character,
) -> Result<LinearOperator> {
    if indices.contains(&0) {
        return Err(Error::param("factor indices are 1-based"));
    }
    let block: Vec<usize> = indices.iter().map(|&k| k - 1).collect();
    Ok(LinearOperator::from_sum(
        permutation::block_symmetrizer_sum(d, 2 * l, &block, character)?,
        true,
    ))
}

/// Apply `op` to `v`, matrix-free when the representation allows.
pub fn apply(op: &LinearOperator, v: &CVector) -> Result<CVector> {
    op.apply(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{idempotence_defect, identity, max_abs, max_abs_vec, trace, C64};

    #[test]
    fn sym_asym_projectors() {
        let s2 = projector_sym2(2).unwrap().to_dense().unwrap();
        let a2 = projector_asym2(2).unwrap().to_dense().unwrap();
        assert!((trace(&s2).re - 3.0).abs() < 1e-15);
        assert!((trace(&a2).re - 1.0).abs() < 1e-15);
        let s6 = projector_sym2(6).unwrap().to_dense().unwrap();
        assert!((trace(&s6).re - 21.0).abs() < 1e-12);
        let s4 = projector_sym2(4).unwrap().to_dense().unwrap();
        let a4 = projector_asym2(4).unwrap().to_dense().unwrap();
        assert_eq!(max_abs(&(s4 + a4 - identity(16))), 0.0);
    }

    #[test]
    fn pair_symmetrizers() {
        let p = pair_symmetrizer(2, 1, 1).unwrap().to_dense().unwrap();
        assert_eq!(
            max_abs(&(p - projector_sym2(2).unwrap().to_dense().unwrap())),
            0.0
        );

        let p1 = pair_symmetrizer(2, 2, 1).unwrap().to_dense().unwrap();
        let p2 = pair_symmetrizer(2, 2, 2).unwrap().to_dense().unwrap();
        assert!(max_abs(&(&p1 * &p2 - &p2 * &p1)) <= 1e-12);

        let q = pair_symmetrizer(3, 2, 2).unwrap().to_dense().unwrap();
        assert!(idempotence_defect(&q) <= 1e-12);
        assert!(pair_symmetrizer(2, 2, 3).is_err());
        assert!(pair_symmetrizer(2, 2, 0).is_err());
    }

    #[test]
    fn block_symmetrizer_ranks() {
        // per-block rank times the untouched factors (d^L = 4)
        let s = block_symmetrizer(2, 2, &[1, 2], Character::Sym)
            .unwrap()
            .to_dense()
            .unwrap();
        assert!((trace(&s).re - 3.0 * 4.0).abs() < 1e-12);
        let a = block_symmetrizer(2, 2, &[1, 2], Character::Asym)
            .unwrap()
            .to_dense()
            .unwrap();
        assert!((trace(&a).re - 1.0 * 4.0).abs() < 1e-12);
        let a3 = block_symmetrizer(3, 3, &[4, 5, 6], Character::Asym)
            .unwrap()
            .to_dense()
            .unwrap();
        assert!((trace(&a3).re - 1.0 * 27.0).abs() < 1e-9);
        assert!(idempotence_defect(&a3) < 1e-12);
    }

    #[test]
    fn apply_identity_and_orthogonality() {
        let id = LinearOperator::from_sum(PermutationSum::identity(3, 2), true);
        let v = CVector::from_fn(9, |k, _| C64::new(k as f64, 1.0 - k as f64));
        assert_eq!(max_abs_vec(&(apply(&id, &v).unwrap() - &v)), 0.0);

        let mut sym = CVector::zeros(4);
        sym[1] = C64::new(1.0, 0.0);
        sym[2] = C64::new(1.0, 0.0);
        let out = apply(&projector_asym2(2).unwrap(), &sym).unwrap();
        assert_eq!(max_abs_vec(&out), 0.0);

        assert!(matches!(
            apply(&id, &CVector::zeros(4)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn add_scale_compose() {
        let s = projector_sym2(3).unwrap();
        let a = projector_asym2(3).unwrap();
        let total = s.add(&a).unwrap();
        assert!(total.is_matrix_free());
        assert!(max_abs(&(total.to_dense().unwrap() - identity(9))) < 1e-15);
        let sq = s.compose(&s).unwrap().to_dense().unwrap();
        assert!(max_abs(&(sq - s.to_dense().unwrap())) < 1e-15);
        let zero = s.compose(&a).unwrap().to_dense().unwrap();
        assert!(max_abs(&zero) < 1e-15);
        let half = s.scale(0.5).to_dense().unwrap();
        assert!((trace(&half).re - 3.0).abs() < 1e-15);
    }
}
