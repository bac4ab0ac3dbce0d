//! Correlation criteria evaluated on density matrices and pure states.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigenvalues, hermiticity_defect, kron_vec, trace, CMatrix, CVector, C64, ZERO,
};
use crate::operators::{majorana_matrices, LinearOperator, ProjectorA};
use crate::spaces::{fock_even_isometry, increasing_tuples, StateClass};

/// `f` must exceed this for the verdict "correlated".
pub const DECISION_TOL: f64 = 1e-9;

/// Tolerance on Hermiticity, positivity and normalization of inputs.
pub const STATE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    class: Option<StateClass>,
}

fn check_psd(m: &CMatrix, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::validation(format!("{what} is not square")));
    }
    let herm = hermiticity_defect(m);
    if herm > STATE_TOL {
        return Err(Error::validation(format!(
            "{what} not Hermitian (defect {herm:e})"
        )));
    }
    let smallest = hermitian_eigenvalues(m).first().copied().unwrap_or(0.0);
    if smallest < -STATE_TOL {
        return Err(Error::validation(format!(
            "{what} has negative eigenvalue {smallest:e}"
        )));
    }
    Ok(())
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_psd(&matrix, "density matrix")?;
        let tr = trace(&matrix);
        if (tr - C64::new(1.0, 0.0)).norm() > STATE_TOL {
            return Err(Error::validation(format!("density matrix has trace {tr}")));
        }
        Ok(DensityMatrix {
            matrix,
            class: None,
        })
    }

    /// `|ψ⟩⟨ψ|` for a unit vector.
    pub fn pure(psi: &CVector) -> Result<Self> {
        check_unit(psi)?;
        Self::new(psi * psi.adjoint())
    }

    pub fn maximally_mixed(n: usize) -> Self {
        DensityMatrix {
            matrix: CMatrix::identity(n, n) / C64::new(n as f64, 0.0),
            class: None,
        }
    }

    /// Attaches the physical space; the dimension must match.
    pub fn with_class(mut self, class: StateClass) -> Result<Self> {
        Error::check_dim(class.dim()?, self.dim())?;
        self.class = Some(class);
        Ok(self)
    }

    pub fn class(&self) -> Option<&StateClass> {
        self.class.as_ref()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }
}

fn check_unit(psi: &CVector) -> Result<()> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > STATE_TOL {
        return Err(Error::validation(format!("state vector has norm {norm}")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Correlated,
    Undetected,
}

impl Verdict {
    pub fn from_value(f: f64, tol: f64) -> Self {
        if f > tol {
            Verdict::Correlated
        } else {
            Verdict::Undetected
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Correlated => "correlated",
            Verdict::Undetected => "undetected",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessReport {
    pub f_value: f64,
    pub purity: f64,
    pub verdict: Verdict,
    pub class: StateClass,
    pub tolerance: f64,
}

/// `tr((X ⊗ Y) M)` for `M` on `C^n ⊗ C^n`, without forming `X ⊗ Y`.
pub fn two_copy_trace(m: &CMatrix, x: &CMatrix, y: &CMatrix) -> Result<C64> {
    let n = x.nrows();
    Error::check_dim(n, y.nrows())?;
    Error::check_dim(n * n, m.nrows())?;
    // Σ x_ik y_jl M[(k,l),(i,j)]
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            let col = m.column(i * n + j);
            for k in 0..n {
                let xik = x[(i, k)];
                let mut inner = ZERO;
                for l in 0..n {
                    inner += y[(j, l)] * col[k * n + l];
                }
                acc += xik * inner;
            }
        }
    }
    Ok(acc)
}

fn check_on_space(a: &ProjectorA, rho: &DensityMatrix) -> Result<()> {
    Error::check_dim(a.space_dim(), rho.dim())?;
    if let Some(class) = rho.class() {
        if class != a.class() {
            return Err(Error::validation(format!(
                "state lives on {class}, projector on {}",
                a.class()
            )));
        }
    }
    Ok(())
}

/// `f(ρ) = tr((ρ⊗ρ)A) − (1 − tr ρ²)/2`.
pub fn f_value(a: &ProjectorA, rho: &DensityMatrix) -> Result<f64> {
    bilinear_witness(a, rho, rho)
}

pub fn witness_value(a: &ProjectorA, rho: &DensityMatrix) -> Result<WitnessReport> {
    witness_value_with_tol(a, rho, DECISION_TOL)
}

pub fn witness_value_with_tol(
    a: &ProjectorA,
    rho: &DensityMatrix,
    tolerance: f64,
) -> Result<WitnessReport> {
    let f = f_value(a, rho)?;
    Ok(WitnessReport {
        f_value: f,
        purity: rho.purity(),
        verdict: Verdict::from_value(f, tolerance),
        class: *a.class(),
        tolerance,
    })
}

/// `tr((ρ₁⊗ρ₂)V)`.
pub fn bilinear_witness(a: &ProjectorA, rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    check_on_space(a, rho1)?;
    check_on_space(a, rho2)?;
    let with_a = two_copy_trace(a.matrix(), rho1.matrix(), rho2.matrix())?.re;
    // tr((ρ₁⊗ρ₂)τ) = tr(ρ₁ρ₂)
    let overlap = crate::linalg::trace_of_product(rho1.matrix(), rho2.matrix()).re;
    Ok(with_a - (1.0 - overlap) / 2.0)
}

/// `tr((ρ⊗B)V)` for positive semidefinite `B`.
pub fn linear_witness(v: &LinearOperator, rho: &DensityMatrix, b: &CMatrix) -> Result<f64> {
    check_psd(b, "operator B")?;
    Error::check_dim(rho.dim(), b.nrows())?;
    Error::check_dim(rho.dim() * rho.dim(), v.dim())?;
    let m = v.to_dense()?;
    Ok(two_copy_trace(&m, rho.matrix(), b)?.re)
}

/// `⟨ψψ|A|ψψ⟩`.
pub fn pure_membership(a: &ProjectorA, psi: &CVector) -> Result<f64> {
    check_unit(psi)?;
    Error::check_dim(a.space_dim(), psi.len())?;
    let pp = kron_vec(psi, psi);
    Ok((pp.adjoint() * a.matrix() * &pp)[(0, 0)].re)
}

/// `M_ij = (i/2) tr(ρ [c_i, c_j])` for `ρ` on the full or even Fock space of `d` modes.
pub fn correlation_matrix(rho: &DensityMatrix, d: usize) -> Result<DMatrix<f64>> {
    let full_dim = 1usize << d;
    let full = if rho.dim() == full_dim {
        rho.matrix().clone()
    } else {
        Error::check_dim(full_dim / 2, rho.dim())?;
        let e = fock_even_isometry(d)?;
        e.matrix() * rho.matrix() * e.matrix().adjoint()
    };
    let cs = majorana_matrices(d)?;
    let n = 2 * d;
    let mut out = DMatrix::zeros(n, n);
    let mut worst_imag = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let comm = &cs[i] * &cs[j] - &cs[j] * &cs[i];
            let value = C64::new(0.0, 0.5) * crate::linalg::trace_of_product(&full, &comm);
            worst_imag = worst_imag.max(value.im.abs());
            out[(i, j)] = value.re;
        }
    }
    if worst_imag > STATE_TOL {
        return Err(Error::Numeric {
            what: "correlation matrix reality".into(),
            residual: worst_imag,
        });
    }
    Ok(out)
}

/// Schmidt coefficients of a two-fermion state `Σ λ_i e_{2i−1} ∧ e_{2i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoFermionSchmidt {
    d: usize,
    lambdas: Vec<f64>,
}

impl TwoFermionSchmidt {
    pub fn new(d: usize, lambdas: Vec<f64>) -> Result<Self> {
        if d < 2 {
            return Err(Error::param("two fermions need d >= 2"));
        }
        if lambdas.is_empty() || lambdas.len() > d / 2 {
            return Err(Error::validation(format!(
                "need between 1 and {} Schmidt coefficients for d={d}",
                d / 2
            )));
        }
        if lambdas.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::validation(
                "Schmidt coefficients must be nonnegative",
            ));
        }
        if lambdas.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::validation(
                "Schmidt coefficients must be nonincreasing",
            ));
        }
        let norm: f64 = lambdas.iter().map(|x| x * x).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::validation(format!("Σ λ² = {norm}, expected 1")));
        }
        Ok(TwoFermionSchmidt { d, lambdas })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn class(&self) -> Result<StateClass> {
        StateClass::slater(self.d, 2)
    }

    /// `ψ` in the wedge basis of `∧²(C^d)`.
    pub fn state_vector(&self) -> CVector {
        let tuples = increasing_tuples(self.d, 2);
        let mut psi = CVector::zeros(tuples.len());
        for (i, &lam) in self.lambdas.iter().enumerate() {
            let pair = [2 * i, 2 * i + 1];
            let idx = tuples
                .iter()
                .position(|t| t[..] == pair)
                .expect("pair within d");
            psi[idx] = C64::new(lam, 0.0);
        }
        psi
    }

    fn quartic(&self) -> f64 {
        self.lambdas.iter().map(|x| x.powi(4)).sum()
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(format!("depolarization p={p} outside [0, 1]")));
    }
    Ok(())
}

/// `(1−p)|ψ⟩⟨ψ| + p · 2I/(d(d−1))`.
pub fn depolarized_slater_state(schmidt: &TwoFermionSchmidt, p: f64) -> Result<DensityMatrix> {
    check_p(p)?;
    let psi = schmidt.state_vector();
    let n = psi.len();
    let m = (&psi * psi.adjoint()) * C64::new(1.0 - p, 0.0)
        + CMatrix::identity(n, n) * C64::new(p / n as f64, 0.0);
    DensityMatrix::new(m)?.with_class(schmidt.class()?)
}

pub fn chi1(d: usize) -> f64 {
    let d = d as f64;
    3.0 + 2.0 * (d - 2.0) * (d - 3.0) / (d * (d - 1.0))
}

pub fn chi2(d: usize) -> f64 {
    let d = d as f64;
    2.0 * (d + 1.0) / (d - 1.0) + 6.0 / (d * (d - 1.0))
}

/// `(1−p)²(5 − 2Σλ⁴) + 2p(1−p)χ₁(d) + p²χ₂(d)`; correlated when `> 3`.
pub fn slater_criterion_lhs(schmidt: &TwoFermionSchmidt, p: f64) -> f64 {
    let q = 1.0 - p;
    let d = schmidt.d();
    q * q * (5.0 - 2.0 * schmidt.quartic()) + 2.0 * p * q * chi1(d) + p * p * chi2(d)
}

/// `3 + 6 f(ρ_ψ(p))` at `ρ = I/N` on `∧²(C^d)`: `((d−2)(d−3) + 6)/(d(d−1))`.
pub fn chi_mixed(d: usize) -> f64 {
    let d = d as f64;
    ((d - 2.0) * (d - 3.0) + 6.0) / (d * (d - 1.0))
}

/// `3 + 6 f(ρ_ψ(p))` in closed form:
/// `(1−p)²(5 − 2Σλ⁴) + (1 − (1−p)²) χ_mixed(d)`.
///
/// The cross term carries the same coefficient as the `p²` term because the
/// partial trace of `A` over one copy is proportional to the identity.
pub fn slater_criterion_exact(schmidt: &TwoFermionSchmidt, p: f64) -> f64 {
    let q2 = (1.0 - p) * (1.0 - p);
    q2 * (5.0 - 2.0 * schmidt.quartic()) + (1.0 - q2) * chi_mixed(schmidt.d())
}

pub fn max_abs_antisymmetry(m: &DMatrix<f64>) -> f64 {
    (m + m.transpose()).abs().max()
}

/// `‖M Mᵀ − I‖_max`.
pub fn orthogonality_defect(m: &DMatrix<f64>) -> f64 {
    (m * m.transpose() - DMatrix::identity(m.nrows(), m.ncols()))
        .abs()
        .max()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, identity, outer};
    use crate::operators::build_a;
    use proptest::prelude::*;

    fn dense_two_copy(a: &CMatrix, x: &CMatrix, y: &CMatrix) -> C64 {
        crate::linalg::trace_of_product(&x.kronecker(y), a)
    }

    fn slater42() -> ProjectorA {
        build_a(&StateClass::slater(4, 2).unwrap()).unwrap()
    }

    fn random_density(n: usize, seed: &[f64]) -> DensityMatrix {
        let g = CMatrix::from_fn(n, n, |i, j| {
            let k = (i * n + j) % seed.len();
            C64::new(
                seed[k] + 0.1 * i as f64,
                seed[(k + 1) % seed.len()] - 0.07 * j as f64,
            )
        });
        let m = &g * g.adjoint();
        let tr = trace(&m);
        DensityMatrix::new(m / tr).unwrap()
    }

    #[test]
    fn maximally_mixed_slater() {
        let a = slater42();
        let r = witness_value(&a, &DensityMatrix::maximally_mixed(6)).unwrap();
        assert!((r.f_value + 7.0 / 18.0).abs() < 1e-12);
        assert_eq!(r.verdict, Verdict::Undetected);
    }

    #[test]
    fn equal_schmidt_pair_is_correlated() {
        let a = slater42();
        let s = TwoFermionSchmidt::new(4, vec![0.5f64.sqrt(), 0.5f64.sqrt()]).unwrap();
        let rho = depolarized_slater_state(&s, 0.0).unwrap();
        let r = witness_value(&a, &rho).unwrap();
        assert!((r.f_value - 1.0 / 6.0).abs() < 1e-12);
        assert_eq!(r.verdict, Verdict::Correlated);
    }

    #[test]
    fn membership_examples() {
        let sep = build_a(&StateClass::separable(2, 2).unwrap()).unwrap();
        let product = CVector::from_vec(vec![c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert!(pure_membership(&sep, &product).unwrap().abs() < 1e-12);
        let s = 0.5f64.sqrt();
        let bell = CVector::from_vec(vec![c(s), c(0.0), c(0.0), c(s)]);
        let value = pure_membership(&sep, &bell).unwrap();
        assert!((value - 0.25).abs() < 1e-12, "{value}");
        let slater = CVector::from_vec(vec![c(1.0), c(0.0), c(0.0), c(0.0), c(0.0), c(0.0)]);
        assert!(pure_membership(&slater42(), &slater).unwrap().abs() < 1e-12);
        let not_unit = CVector::from_element(4, c(1.0));
        assert!(matches!(
            pure_membership(&sep, &not_unit),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn two_copy_trace_matches_kron() {
        let a = slater42();
        let x = random_density(6, &[0.3, -1.2, 0.8, 0.1]);
        let y = random_density(6, &[1.1, 0.4, -0.5]);
        let fast = two_copy_trace(a.matrix(), x.matrix(), y.matrix()).unwrap();
        let slow = dense_two_copy(a.matrix(), x.matrix(), y.matrix());
        assert!((fast - slow).norm() < 1e-13);
    }

    #[test]
    fn bilinear_symmetry_and_diagonal() {
        let a = build_a(&StateClass::separable(2, 2).unwrap()).unwrap();
        let x = random_density(4, &[0.3, -1.2, 0.8, 0.1]);
        let y = random_density(4, &[1.1, 0.4, -0.5]);
        let xy = bilinear_witness(&a, &x, &y).unwrap();
        let yx = bilinear_witness(&a, &y, &x).unwrap();
        assert!((xy - yx).abs() < 1e-12);
        let xx = bilinear_witness(&a, &x, &x).unwrap();
        assert_eq!(xx, witness_value(&a, &x).unwrap().f_value);
    }

    #[test]
    fn linear_witness_cases() {
        let a = build_a(&StateClass::separable(2, 2).unwrap()).unwrap();
        let v = a.witness_operator().unwrap();
        let x = random_density(4, &[0.3, -1.2, 0.8, 0.1]);
        assert_eq!(linear_witness(&v, &x, &CMatrix::zeros(4, 4)).unwrap(), 0.0);
        let with_rho = linear_witness(&v, &x, x.matrix()).unwrap();
        assert!((with_rho - f_value(&a, &x).unwrap()).abs() < 1e-12);
        let mut bad = identity(4);
        bad[(0, 0)] = c(-1.0);
        assert!(matches!(
            linear_witness(&v, &x, &bad),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(identity(3)).is_err());
        let mut m = identity(2) * c(0.5);
        m[(0, 1)] = C64::new(0.0, 0.1);
        assert!(DensityMatrix::new(m).is_err());
        let neg = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.5), c(-0.5)]));
        assert!(DensityMatrix::new(neg).is_err());
        assert!(DensityMatrix::maximally_mixed(3)
            .with_class(StateClass::separable(2, 2).unwrap())
            .is_err());
    }

    #[test]
    fn vacuum_and_mixed_correlation_matrices() {
        let mut vac = CVector::zeros(4);
        vac[0] = c(1.0);
        let m = correlation_matrix(&DensityMatrix::pure(&vac).unwrap(), 2).unwrap();
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 1.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, -1.0, 0.0,
            ],
        );
        assert!((m - expected).abs().max() < 1e-14);
        let mixed = correlation_matrix(&DensityMatrix::maximally_mixed(8), 3).unwrap();
        assert!(mixed.abs().max() < 1e-14);
        // the even sector is addressed through its embedding
        let mut vac_even = CVector::zeros(2);
        vac_even[0] = c(1.0);
        let m = correlation_matrix(&DensityMatrix::pure(&vac_even).unwrap(), 2).unwrap();
        assert!(orthogonality_defect(&m) < 1e-14);
    }

    #[test]
    fn schmidt_validation() {
        assert!(TwoFermionSchmidt::new(4, vec![0.6, 0.8]).is_err());
        assert!(TwoFermionSchmidt::new(4, vec![1.0, 0.0, 0.0]).is_err());
        assert!(TwoFermionSchmidt::new(4, vec![0.9, 0.1]).is_err());
        assert!(
            depolarized_slater_state(&TwoFermionSchmidt::new(4, vec![1.0]).unwrap(), 1.5).is_err()
        );
    }

    #[test]
    fn depolarized_spectrum_and_endpoints() {
        let h = 0.5f64.sqrt();
        let s = TwoFermionSchmidt::new(4, vec![h, h]).unwrap();
        let rho = depolarized_slater_state(&s, 0.1).unwrap();
        let ev = hermitian_eigenvalues(rho.matrix());
        for v in &ev[..5] {
            assert!((v - 0.1 / 6.0).abs() < 1e-12);
        }
        assert!((ev[5] - (0.9 + 0.1 / 6.0)).abs() < 1e-12);
        let full = depolarized_slater_state(&s, 1.0).unwrap();
        assert!((full.purity() - 1.0 / 6.0).abs() < 1e-15);
        let single = TwoFermionSchmidt::new(4, vec![1.0]).unwrap();
        let pure = depolarized_slater_state(&single, 0.0).unwrap();
        assert!(crate::linalg::max_abs(&(pure.matrix() - outer(&single.state_vector()))) < 1e-15);
    }

    #[test]
    fn printed_coefficients() {
        assert!((chi1(4) - 10.0 / 3.0).abs() < 1e-15);
        assert!((chi2(4) - 23.0 / 6.0).abs() < 1e-15);
        let h = 0.5f64.sqrt();
        let s = TwoFermionSchmidt::new(4, vec![h, h]).unwrap();
        assert!((slater_criterion_lhs(&s, 0.0) - 4.0).abs() < 1e-12);
        let one = TwoFermionSchmidt::new(4, vec![1.0]).unwrap();
        assert!((slater_criterion_lhs(&one, 0.0) - 3.0).abs() < 1e-15);
        assert!((slater_criterion_lhs(&s, 1.0) - 23.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn exact_form_tracks_numeric_witness() {
        for d in [4, 5, 6] {
            let a = build_a(&StateClass::slater(d, 2).unwrap()).unwrap();
            let lam = [
                vec![1.0],
                vec![0.9, 0.19f64.sqrt()],
                vec![0.5f64.sqrt(), 0.5f64.sqrt()],
            ];
            for lambdas in lam {
                let s = TwoFermionSchmidt::new(d, lambdas).unwrap();
                for k in 0..=10 {
                    let p = k as f64 / 10.0;
                    let f = f_value(&a, &depolarized_slater_state(&s, p).unwrap()).unwrap();
                    assert!((3.0 + 6.0 * f - slater_criterion_exact(&s, p)).abs() < 1e-12);
                }
            }
        }
        assert!((chi_mixed(4) - 2.0 / 3.0).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn purity_identity(entries in proptest::collection::vec(-1.0f64..1.0, 2 * 25)) {
            let g = CMatrix::from_fn(5, 5, |i, j| C64::new(entries[5 * i + j], entries[25 + 5 * i + j]));
            let m = &g * g.adjoint();
            prop_assume!(trace(&m).re > 1e-3);
            let rho = DensityMatrix::new(&m / trace(&m)).unwrap();
            let asym = crate::operators::projector_asym2(5).unwrap().to_dense().unwrap();
            let direct = two_copy_trace(&asym, rho.matrix(), rho.matrix()).unwrap().re;
            prop_assert!((direct - (1.0 - rho.purity()) / 2.0).abs() < 1e-12);
        }
    }
}
