//! The class projector `A` on two copies of the physical space.
//!
//! | class     | construction                                                   |
//! |-----------|----------------------------------------------------------------|
//! | separable | `P^sym − P⁺_{11'}⋯P⁺_{LL'}` on `H_d ⊗ H_d`                      |
//! | bosonic   | `P^sym_b − (J⊗J)† S_{2L} (J⊗J)`, `S_{2L}` the full symmetrizer  |
//! | slater    | `P^sym_f − 2^L/(L+1) (J⊗J)† (P⁺_{11'}⋯P⁺_{LL'})(P^asym_{1..L} P^asym_{1'..L'}) (J⊗J)` |
//! | gaussian  | `P^sym − P₀`, `P₀` the kernel of `Λ†Λ` on `even ⊗ even`         |
//!
//! The bosonic subtrahend is the spectral projector of the composition
//! `(P⁺_{11'}⋯P⁺_{LL'})(P^sym_{1..L} P^sym_{1'..L'})` onto its eigenvalue 1;
//! the composition itself is not idempotent on `Sym^L ⊗ Sym^L` (see
//! [`bosonic_printed_composition`]), while both share the same kernel.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{
    c, hermitian_eigen, hermiticity_defect, idempotence_defect, identity, max_abs, swap_matrix,
    trace, CMatrix, Limits, ONE, ZERO,
};
use crate::spaces::{class_isometry, sym_isometry, ClassKind, Isometry, StateClass};

use super::fermions::{kernel_projector, lambda_even_sector, lambda_operator, KERNEL_REL_TOL};
use super::permutation::{
    block_symmetrizer_sum, copy_swap, identity_perm, pair_product_sum, sym2_sum, Character,
    PermutationSum, PermutationTerm,
};
use super::{projector_asym2, EmbeddedSum, LinearOperator};

/// Largest full `2L`-factor space for which [`dense_reference_a`] builds
/// dense factor matrices.
pub const DENSE_REFERENCE_MAX_DIM: usize = 4096;

/// Projector axioms are enforced at this level after construction.
const AXIOM_TOL: f64 = 1e-10;

/// Defects of the projector axioms, each a max-entry norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxiomDefects {
    /// `‖A² − A‖`
    pub idempotence: f64,
    /// `‖A − A†‖`
    pub hermiticity: f64,
    /// `‖A · P^asym‖`
    pub antisym_overlap: f64,
    /// `‖τAτ − A‖`
    pub swap_invariance: f64,
}

impl AxiomDefects {
    pub fn max(&self) -> f64 {
        self.idempotence
            .max(self.hermiticity)
            .max(self.antisym_overlap)
            .max(self.swap_invariance)
    }
}

#[derive(Clone, Debug)]
pub struct ProjectorA {
    class: StateClass,
    operator: LinearOperator,
    matrix: CMatrix,
    matrix_free: Option<LinearOperator>,
    trace: f64,
    /// Orthonormal basis of `Im A`, one column per vector.
    range: CMatrix,
}

impl ProjectorA {
    /// Wraps an arbitrary matrix without checking the projector axioms.
    /// Intended for negative controls.
    pub fn from_dense_unchecked(class: StateClass, matrix: CMatrix) -> Result<Self> {
        let n = class.dim()?;
        Error::check_dim(n * n, matrix.nrows())?;
        Error::check_dim(n * n, matrix.ncols())?;
        let (values, vectors) = hermitian_eigen(&matrix);
        let keep: Vec<usize> = (0..values.len()).filter(|&k| values[k] > 0.5).collect();
        let range = CMatrix::from_fn(matrix.nrows(), keep.len(), |i, j| vectors[(i, keep[j])]);
        Ok(ProjectorA {
            class,
            operator: LinearOperator::dense(matrix.clone(), true),
            trace: trace(&matrix).re,
            matrix,
            matrix_free: None,
            range,
        })
    }

    pub fn class(&self) -> &StateClass {
        &self.class
    }

    /// Dimension `N` of one copy of the physical space.
    pub fn space_dim(&self) -> usize {
        (self.matrix.nrows() as f64).sqrt().round() as usize
    }

    pub fn operator(&self) -> &LinearOperator {
        &self.operator
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn matrix_free(&self) -> Option<&LinearOperator> {
        self.matrix_free.as_ref()
    }

    /// `tr A = dim Im A`.
    pub fn trace(&self) -> f64 {
        self.trace
    }

    /// Rank by eigenvalue counting at threshold 1/2.
    pub fn rank(&self) -> usize {
        self.range.ncols()
    }

    pub fn range(&self) -> &CMatrix {
        &self.range
    }

    pub fn sym2_dim(&self) -> usize {
        let n = self.space_dim();
        n * (n + 1) / 2
    }

    pub fn axioms(&self) -> AxiomDefects {
        let n = self.space_dim();
        let a = &self.matrix;
        let tau = swap_matrix(n);
        let asym = (identity(n * n) - &tau) * c(0.5);
        AxiomDefects {
            idempotence: idempotence_defect(a),
            hermiticity: hermiticity_defect(a),
            antisym_overlap: max_abs(&(a * asym)),
            swap_invariance: max_abs(&(&tau * a * &tau - a)),
        }
    }

    /// `V = A − P^asym`, dense.
    pub fn witness_operator(&self) -> Result<LinearOperator> {
        let asym = projector_asym2(self.space_dim())?.to_dense()?;
        Ok(LinearOperator::dense(&self.matrix - asym, true))
    }

    /// `V = A − P^asym` as a matrix-free sum, when `A` has one.
    pub fn witness_operator_matrix_free(&self) -> Result<Option<LinearOperator>> {
        match &self.matrix_free {
            None => Ok(None),
            Some(a) => Ok(Some(
                a.add(&projector_asym2(self.space_dim())?.scale(-1.0))?,
            )),
        }
    }
}

fn embedded(sum: PermutationSum, j: &Arc<Isometry>) -> EmbeddedSum {
    EmbeddedSum {
        sum,
        embedding: Some(Arc::clone(j)),
    }
}

fn plain(sum: PermutationSum) -> EmbeddedSum {
    EmbeddedSum {
        sum,
        embedding: None,
    }
}

/// Block (anti)symmetrizers of both copies, `P_{1..L} ∘ P_{1'..L'}`.
fn both_blocks(d: usize, l: usize, character: Character) -> Result<PermutationSum> {
    let n = 2 * l;
    let unprimed: Vec<usize> = (0..l).collect();
    let primed: Vec<usize> = (l..n).collect();
    block_symmetrizer_sum(d, n, &unprimed, character)?
        .compose(&block_symmetrizer_sum(d, n, &primed, character)?)
}

fn required_isometry(class: &StateClass) -> Result<Arc<Isometry>> {
    class_isometry(class)?
        .map(Arc::new)
        .ok_or_else(|| Error::param(format!("{class} has no subspace embedding")))
}

/// Matrix-free `A` for the permutation-built classes; `None` for Gaussian.
pub fn matrix_free_a(class: &StateClass) -> Result<Option<LinearOperator>> {
    let d = class.d();
    let l = class.l();
    let parts = match class.kind() {
        ClassKind::Separable => {
            let n = 2 * l;
            let sym = PermutationSum::new(
                d,
                n,
                vec![
                    PermutationTerm {
                        coeff: 0.5,
                        perm: identity_perm(n),
                    },
                    PermutationTerm {
                        coeff: 0.5,
                        perm: copy_swap(l),
                    },
                ],
            )?;
            vec![plain(sym.plus(&pair_product_sum(d, l)?.scaled(-1.0))?)]
        }
        ClassKind::Bosonic => {
            let j = required_isometry(class)?;
            let all: Vec<usize> = (0..2 * l).collect();
            let full = block_symmetrizer_sum(d, 2 * l, &all, Character::Sym)?;
            vec![
                plain(sym2_sum(j.source_dim())),
                embedded(full.scaled(-1.0), &j),
            ]
        }
        ClassKind::Slater => {
            let j = required_isometry(class)?;
            let prefactor = 2f64.powi(l as i32) / (l as f64 + 1.0);
            let term = pair_product_sum(d, l)?.compose(&both_blocks(d, l, Character::Asym)?)?;
            vec![
                plain(sym2_sum(j.source_dim())),
                embedded(term.scaled(-prefactor), &j),
            ]
        }
        ClassKind::Gaussian => return Ok(None),
    };
    LinearOperator::from_parts(parts, true).map(Some)
}

/// `P^sym_b − (J⊗J)† (P⁺_{11'}⋯P⁺_{LL'})(P^sym_{1..L} P^sym_{1'..L'}) (J⊗J)`,
/// the literal composition for bosons. Not a projector for `L ≥ 2`.
pub fn bosonic_printed_composition(d: usize, l: usize) -> Result<LinearOperator> {
    let class = StateClass::bosonic(d, l)?;
    let j = required_isometry(&class)?;
    let term = pair_product_sum(d, l)?.compose(&both_blocks(d, l, Character::Sym)?)?;
    LinearOperator::from_parts(
        vec![
            plain(sym2_sum(j.source_dim())),
            embedded(term.scaled(-1.0), &j),
        ],
        false,
    )
}

fn gaussian_a(d: usize) -> Result<CMatrix> {
    let lam = lambda_even_sector(d)?;
    let gram = LinearOperator::dense(lam.adjoint() * &lam, true);
    let p0 = kernel_projector(&gram, KERNEL_REL_TOL)?.to_dense()?;
    let n = 1usize << (d - 1);
    let sym = (identity(n * n) + swap_matrix(n)) * c(0.5);
    Ok(sym - p0)
}

pub fn build_a(class: &StateClass) -> Result<ProjectorA> {
    build_a_with(class, &Limits::default())
}

/// Builds `A` for `class` and enforces idempotence and hermiticity at 1e-10.
pub fn build_a_with(class: &StateClass, limits: &Limits) -> Result<ProjectorA> {
    class.check_cap(limits)?;
    let n = class.dim()?;
    limits.check_dense("A on H ⊗ H", (n * n) as u128, (n * n) as u128)?;
    let matrix_free = matrix_free_a(class)?;
    let matrix = match &matrix_free {
        Some(op) => op.to_dense_with(limits)?,
        None => gaussian_a(class.d())?,
    };
    let idem = idempotence_defect(&matrix);
    let herm = hermiticity_defect(&matrix);
    if idem > AXIOM_TOL || herm > AXIOM_TOL {
        return Err(Error::Numeric {
            what: format!("projector A for {class}"),
            residual: idem.max(herm),
        });
    }
    let mut a = ProjectorA::from_dense_unchecked(*class, matrix)?;
    if (a.rank() as f64 - a.trace).abs() > 1e-6 {
        return Err(Error::Numeric {
            what: format!("rank/trace agreement of A for {class}"),
            residual: (a.rank() as f64 - a.trace).abs(),
        });
    }
    a.matrix_free = matrix_free;
    Ok(a)
}

/// `V = A − P^asym` for `class`.
pub fn build_v(class: &StateClass) -> Result<LinearOperator> {
    build_a(class)?.witness_operator()
}

// Dense reference route: factor matrices assembled from Kronecker products
// of elementary matrices, independent of the permutation-index arithmetic.

/// Dense transposition of factors `a`, `b` among `n` factors of dimension `d`.
fn transposition_dense(d: usize, n: usize, a: usize, b: usize) -> CMatrix {
    let mut acc = CMatrix::zeros(d.pow(n as u32), d.pow(n as u32));
    for x in 0..d {
        for y in 0..d {
            let mut term = CMatrix::identity(1, 1);
            for k in 0..n {
                let factor = if k == a {
                    CMatrix::from_fn(d, d, |i, j| if i == x && j == y { ONE } else { ZERO })
                } else if k == b {
                    CMatrix::from_fn(d, d, |i, j| if i == y && j == x { ONE } else { ZERO })
                } else {
                    identity(d)
                };
                term = term.kronecker(&factor);
            }
            acc += term;
        }
    }
    acc
}

/// Applies dense `P_σ`, written as a product of transpositions, to `x`.
fn apply_permutation_dense(d: usize, perm: &[usize], x: &CMatrix) -> CMatrix {
    let n = perm.len();
    let mut rest = perm.to_vec();
    let mut factors = Vec::new();
    for i in 0..n {
        let j = rest[i];
        if j != i {
            factors.push((i, j));
            // rest ← t_{ij} ∘ rest
            for r in rest.iter_mut() {
                if *r == i {
                    *r = j;
                } else if *r == j {
                    *r = i;
                }
            }
        }
    }
    // P_σ = T_1 T_2 ⋯ T_m; the last factor acts first
    let mut acc = x.clone();
    for &(i, j) in factors.iter().rev() {
        acc = transposition_dense(d, n, i, j) * acc;
    }
    acc
}

fn apply_block_dense(
    d: usize,
    n: usize,
    block: &[usize],
    character: Character,
    x: &CMatrix,
) -> CMatrix {
    let arrangements = super::permutation::permutations_of(block);
    let mut acc = CMatrix::zeros(x.nrows(), x.ncols());
    for image in &arrangements {
        let mut perm = identity_perm(n);
        for (&from, &to) in block.iter().zip(image) {
            perm[from] = to;
        }
        let sign = match character {
            Character::Sym => 1.0,
            Character::Asym => super::permutation::perm_sign(&perm),
        };
        acc += apply_permutation_dense(d, &perm, x) * c(sign);
    }
    acc / c(arrangements.len() as f64)
}

/// `A` assembled from dense factor matrices in the full `2L`-factor space
/// (or, for Gaussian, from the full `Λ` on `Fock ⊗ Fock`), for cross-checks.
pub fn dense_reference_a(class: &StateClass) -> Result<CMatrix> {
    let d = class.d();
    let l = class.l();
    let n_phys = class.dim()?;
    if class.kind() == ClassKind::Gaussian {
        let lam = lambda_operator(d)?.to_dense()?;
        let e = crate::spaces::fock_even_isometry(d)?;
        let ee = e.matrix().kronecker(e.matrix());
        let gram = ee.adjoint() * lam.adjoint() * &lam * &ee;
        let p0 =
            kernel_projector(&LinearOperator::dense(gram, true), KERNEL_REL_TOL)?.to_dense()?;
        let sym = (identity(n_phys * n_phys) + swap_matrix(n_phys)) * c(0.5);
        return Ok(sym - p0);
    }
    let full = d.pow(2 * l as u32);
    if full > DENSE_REFERENCE_MAX_DIM {
        return Err(Error::Resource {
            what: format!("dense reference for {class}"),
            needed_bytes: (full as u128).pow(2) * 16,
            cap_bytes: (DENSE_REFERENCE_MAX_DIM as u128).pow(2) * 16,
        });
    }
    let n2 = 2 * l;
    let sym_phys = (identity(n_phys * n_phys) + swap_matrix(n_phys)) * c(0.5);
    let pair = |i: usize| (identity(full) + transposition_dense(d, n2, i, l + i)) * c(0.5);
    // P⁺_{11'} ⋯ P⁺_{LL'} applied to `x` (rightmost factor first)
    let apply_pairs = |mut x: CMatrix| {
        for i in (0..l).rev() {
            x = pair(i) * x;
        }
        x
    };
    let unprimed: Vec<usize> = (0..l).collect();
    let primed: Vec<usize> = (l..n2).collect();
    match class.kind() {
        ClassKind::Separable => {
            let mut x = identity(full);
            for i in 0..l {
                x *= pair(i);
            }
            Ok(sym_phys - x)
        }
        ClassKind::Bosonic => {
            let j = sym_isometry(d, l)?;
            let jj = j.matrix().kronecker(j.matrix());
            let j2l = sym_isometry(d, 2 * l)?;
            let s2l = j2l.matrix() * j2l.matrix().adjoint();
            Ok(sym_phys - jj.adjoint() * s2l * &jj)
        }
        ClassKind::Slater => {
            let j = crate::spaces::wedge_isometry(d, l)?;
            let jj = j.matrix().kronecker(j.matrix());
            let mut x = apply_block_dense(d, n2, &primed, Character::Asym, &jj);
            x = apply_block_dense(d, n2, &unprimed, Character::Asym, &x);
            x = apply_pairs(x);
            let prefactor = 2f64.powi(l as i32) / (l as f64 + 1.0);
            Ok(sym_phys - jj.adjoint() * x * c(prefactor))
        }
        ClassKind::Gaussian => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{binomial, hermitian_eigenvalues, max_abs_vec, CVector, C64};

    fn check_trace(class: StateClass, expected: f64) {
        let a = build_a(&class).unwrap();
        assert!(
            (a.trace() - expected).abs() < 1e-9,
            "{class}: tr A = {}",
            a.trace()
        );
        assert_eq!(a.rank(), expected.round() as usize);
        assert!(a.axioms().max() <= 1e-10, "{class}: {:?}", a.axioms());
    }

    #[test]
    fn traces_at_smallest_dims() {
        check_trace(StateClass::separable(2, 2).unwrap(), 1.0);
        check_trace(StateClass::slater(4, 2).unwrap(), 1.0);
        check_trace(StateClass::gaussian(3).unwrap(), 0.0);
        // span{φ⊗φ⊗φ⊗φ} = Sym⁴(C²) (dim 5) sits in the 6-dim Sym²(H_b)
        check_trace(StateClass::bosonic(2, 2).unwrap(), 1.0);
        check_trace(StateClass::gaussian(4).unwrap(), 1.0);
    }

    #[test]
    fn traces_match_kernel_dimension_counts() {
        // tr A = dim Sym²(H) − dim span{ψ⊗ψ : ψ ∈ M}
        for (d, l) in [(2, 3), (3, 2), (3, 3)] {
            let n = binomial((d + l - 1) as u64, l as u64) as f64;
            let span = binomial((d + 2 * l - 1) as u64, (2 * l) as u64) as f64;
            check_trace(
                StateClass::bosonic(d, l).unwrap(),
                n * (n + 1.0) / 2.0 - span,
            );
        }
        for (d, l) in [(5, 2), (4, 3), (5, 3)] {
            let n = binomial(d as u64, l as u64) as f64;
            let span = n * binomial((d + 1) as u64, l as u64) as f64 / (l as f64 + 1.0);
            check_trace(
                StateClass::slater(d, l).unwrap(),
                n * (n + 1.0) / 2.0 - span,
            );
        }
    }

    #[test]
    fn v_traces() {
        let v = build_v(&StateClass::separable(2, 2).unwrap())
            .unwrap()
            .to_dense()
            .unwrap();
        assert!((trace(&v).re + 5.0).abs() < 1e-12);
        let v = build_v(&StateClass::gaussian(3).unwrap())
            .unwrap()
            .to_dense()
            .unwrap();
        let asym = projector_asym2(4).unwrap().to_dense().unwrap();
        assert!(max_abs(&(v + asym)) < 1e-10);
    }

    #[test]
    fn dense_reference_agrees() {
        for class in [
            StateClass::separable(2, 2).unwrap(),
            StateClass::separable(2, 3).unwrap(),
            StateClass::bosonic(2, 2).unwrap(),
            StateClass::bosonic(3, 2).unwrap(),
            StateClass::slater(4, 2).unwrap(),
            StateClass::slater(5, 2).unwrap(),
            StateClass::gaussian(3).unwrap(),
        ] {
            let a = build_a(&class).unwrap();
            let reference = dense_reference_a(&class).unwrap();
            assert!(max_abs(&(a.matrix() - reference)) < 1e-10, "{class}");
        }
    }

    #[test]
    fn dense_transposition_products() {
        let p = apply_permutation_dense(2, &[1, 2, 0], &identity(8));
        let sum = PermutationSum::new(
            2,
            3,
            vec![PermutationTerm {
                coeff: 1.0,
                perm: vec![1, 2, 0],
            }],
        )
        .unwrap()
        .to_dense()
        .unwrap();
        assert_eq!(max_abs(&(p - sum)), 0.0);
    }

    #[test]
    fn printed_bosonic_composition_is_not_idempotent_but_shares_kernel() {
        let printed = bosonic_printed_composition(2, 2)
            .unwrap()
            .to_dense()
            .unwrap();
        assert!(idempotence_defect(&printed) > 1e-2);
        let ev = hermitian_eigenvalues(&printed);
        let nonzero: Vec<f64> = ev.into_iter().filter(|x| x.abs() > 1e-9).collect();
        assert_eq!(nonzero.len(), 1);
        assert!((nonzero[0] - 0.75).abs() < 1e-12);
        let a = build_a(&StateClass::bosonic(2, 2).unwrap()).unwrap();
        // Im(printed) = Im(A)
        let overlap = printed * a.range();
        assert!((overlap.norm() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn matrix_free_matches_dense_on_random_vectors() {
        let class = StateClass::separable(3, 2).unwrap();
        let a = build_a(&class).unwrap();
        let mf = a.matrix_free().unwrap();
        let reference = dense_reference_a(&class).unwrap();
        for k in 0..5 {
            let v = CVector::from_fn(81, |i, _| {
                C64::new(((i * 7 + k) as f64).sin(), ((i + 3 * k) as f64).cos())
            });
            let diff = mf.apply(&v).unwrap() - &reference * &v;
            assert!(max_abs_vec(&diff) <= 1e-10);
        }
    }

    #[test]
    fn witness_operator_forms_agree() {
        let a = build_a(&StateClass::slater(4, 2).unwrap()).unwrap();
        let dense = a.witness_operator().unwrap().to_dense().unwrap();
        let mf = a
            .witness_operator_matrix_free()
            .unwrap()
            .unwrap()
            .to_dense()
            .unwrap();
        assert!(max_abs(&(dense - mf)) < 1e-12);
    }

    #[test]
    fn tight_cap_is_a_resource_error() {
        let lim = Limits {
            max_dense_bytes: 1 << 10,
        };
        assert!(matches!(
            build_a_with(
                &StateClass::unbounded(ClassKind::Slater, 4, Some(2)).unwrap(),
                &lim
            ),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn corrupted_projector_reports_defects() {
        let class = StateClass::separable(2, 2).unwrap();
        let a = build_a(&class).unwrap();
        let bad = a.matrix() * c(1.5);
        let bad = ProjectorA::from_dense_unchecked(class, bad).unwrap();
        assert!(bad.axioms().idempotence > 0.1);
    }
}
