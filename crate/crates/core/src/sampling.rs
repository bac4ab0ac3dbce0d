//! Reproducible random states: Haar unitaries, isospectral orbits, class
//! members and their mixtures.
//!
//! Every sample is drawn from its own `ChaCha8` stream selected by
//! `(seed, index)`, so results never depend on evaluation order.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMatrix, CVector, C64, ZERO};
use crate::operators::majorana_matrices;
use crate::spaces::{class_isometry, fock_even_isometry, ClassKind, StateClass};
use crate::witness::DensityMatrix;

/// An ordered spectrum `p₁ ≤ … ≤ p_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    probs: Vec<f64>,
}

impl Spectrum {
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::validation("spectrum is empty"));
        }
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::validation(
                "spectrum entries must be finite and nonnegative",
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::validation(format!(
                "spectrum sums to {total}, expected 1"
            )));
        }
        probs.sort_by(f64::total_cmp);
        Ok(Spectrum { probs })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n])
    }

    /// `(1, 0, …, 0)`.
    pub fn pure(n: usize) -> Result<Self> {
        Self::depolarized(n, 0.0)
    }

    /// `((1−p) + p/N, p/N, …, p/N)`.
    pub fn depolarized(n: usize, p: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("spectrum needs N >= 1"));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param(format!("depolarization p={p} outside [0, 1]")));
        }
        let mut probs = vec![p / n as f64; n];
        probs[0] += 1.0 - p;
        Self::new(probs)
    }

    /// Member of the [`Spectrum::depolarized`] family with the given purity,
    /// which must lie in `[1/N, 1]`.
    pub fn depolarized_with_purity(n: usize, purity: f64) -> Result<Self> {
        let floor = 1.0 / n as f64;
        if !(floor - 1e-15..=1.0 + 1e-15).contains(&purity) {
            return Err(Error::param(format!(
                "purity {purity} outside [1/N, 1] for N={n}"
            )));
        }
        let q2 = if n == 1 {
            1.0
        } else {
            ((purity - floor) / (1.0 - floor)).max(0.0)
        };
        Self::depolarized(n, (1.0 - q2.sqrt()).clamp(0.0, 1.0))
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn purity(&self) -> f64 {
        self.probs.iter().map(|p| p * p).sum()
    }
}

/// Selects one independent generator stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomStream {
    pub seed: u64,
    pub index: u64,
}

impl RandomStream {
    pub fn new(seed: u64, index: u64) -> Self {
        RandomStream { seed, index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.index);
        rng
    }
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-distributed `n × n` unitary.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| complex_normal(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            rjj / rjj.norm()
        };
        q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    q
}

/// Uniformly distributed unit vector in `C^n`.
pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(n, |_, _| complex_normal(rng));
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

/// `U diag(spec) U†` with `U` Haar.
pub fn isospectral_sample<R: Rng + ?Sized>(spec: &Spectrum, rng: &mut R) -> Result<DensityMatrix> {
    let n = spec.len();
    let u = haar_unitary(n, rng);
    let mut scaled = u.clone();
    for (j, &p) in spec.probabilities().iter().enumerate() {
        scaled.column_mut(j).iter_mut().for_each(|z| *z *= p);
    }
    let mut rho = scaled * u.adjoint();
    // exact Hermiticity; roundoff otherwise leaves ~1e-17 asymmetry
    rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    DensityMatrix::new(rho)
}

/// Real antisymmetric `2d × 2d` matrix with standard normal entries above the diagonal.
pub fn random_quadratic_coefficients<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<f64> {
    let n = 2 * d;
    let mut h = DMatrix::zeros(n, n);
    for k in 0..n {
        for l in k + 1..n {
            let x: f64 = rng.sample(StandardNormal);
            h[(k, l)] = x;
            h[(l, k)] = -x;
        }
    }
    h
}

/// `exp(−iH)` on the full Fock space with `H = (i/4) Σ_{kl} h_kl c_k c_l`.
pub fn gaussian_unitary(d: usize, h: &DMatrix<f64>) -> Result<CMatrix> {
    Error::check_dim(2 * d, h.nrows())?;
    Error::check_dim(2 * d, h.ncols())?;
    let cs = majorana_matrices(d)?;
    let dim = 1usize << d;
    let mut ham = CMatrix::zeros(dim, dim);
    for k in 0..2 * d {
        for l in 0..2 * d {
            if h[(k, l)] != 0.0 {
                ham += (&cs[k] * &cs[l]) * C64::new(0.0, 0.25 * h[(k, l)]);
            }
        }
    }
    let (values, vectors) = hermitian_eigen(&ham);
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        let phase = C64::new(0.0, -v).exp();
        scaled.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    Ok(scaled * vectors.adjoint())
}

fn tensor_power(v: &CVector, l: usize) -> CVector {
    let mut acc = CVector::from_element(1, C64::new(1.0, 0.0));
    for _ in 0..l {
        acc = acc.kronecker(v);
    }
    acc
}

/// Random pure member of `class`, as a unit vector on its physical space.
pub fn random_class_member<R: Rng + ?Sized>(class: &StateClass, rng: &mut R) -> Result<CVector> {
    let d = class.d();
    let l = class.particles().unwrap_or(0);
    let psi = match class.kind() {
        ClassKind::Separable => {
            let mut acc = CVector::from_element(1, C64::new(1.0, 0.0));
            for _ in 0..l {
                acc = acc.kronecker(&random_unit_vector(d, rng));
            }
            acc
        }
        ClassKind::Bosonic => {
            let phi = random_unit_vector(d, rng);
            let j = class_isometry(class)?.expect("bosonic embedding");
            j.restrict(&tensor_power(&phi, l))?
        }
        ClassKind::Slater => {
            let u = haar_unitary(d, rng);
            let mut product = CVector::from_element(1, C64::new(1.0, 0.0));
            for k in 0..l {
                product = product.kronecker(&u.column(k).into_owned());
            }
            let j = class_isometry(class)?.expect("wedge embedding");
            j.restrict(&product)?
        }
        ClassKind::Gaussian => {
            let h = random_quadratic_coefficients(d, rng);
            let u = gaussian_unitary(d, &h)?;
            let e = fock_even_isometry(d)?;
            // vacuum is the first even basis vector
            e.restrict(&u.column(0).into_owned())?
        }
    };
    let norm = psi.norm();
    Ok(psi / C64::new(norm, 0.0))
}

/// Uniform weights on the `k`-simplex.
pub fn simplex_weights<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| rng.sample(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / total).collect()
}

/// `Σ w_i |ψ_i⟩⟨ψ_i|` over `k` random members with uniform simplex weights.
pub fn random_mixture<R: Rng + ?Sized>(
    class: &StateClass,
    k: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    if k == 0 {
        return Err(Error::param("a mixture needs at least one member"));
    }
    let n = class.dim()?;
    let weights = simplex_weights(k, rng);
    let mut rho = CMatrix::from_element(n, n, ZERO);
    for w in weights {
        let psi = random_class_member(class, rng)?;
        rho += (&psi * psi.adjoint()) * C64::new(w, 0.0);
    }
    rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    DensityMatrix::new(rho)?.with_class(*class)
}

/// Random unitary on the physical space that maps `class` onto itself:
/// local unitaries, induced single-particle unitaries, or Gaussian rotations.
pub fn random_symmetry<R: Rng + ?Sized>(class: &StateClass, rng: &mut R) -> Result<CMatrix> {
    let d = class.d();
    let l = class.particles().unwrap_or(0);
    match class.kind() {
        ClassKind::Separable => {
            let mut acc = CMatrix::identity(1, 1);
            for _ in 0..l {
                acc = acc.kronecker(&haar_unitary(d, rng));
            }
            Ok(acc)
        }
        ClassKind::Bosonic | ClassKind::Slater => {
            let u = haar_unitary(d, rng);
            let mut full = CMatrix::identity(1, 1);
            for _ in 0..l {
                full = full.kronecker(&u);
            }
            let j = class_isometry(class)?.expect("particle embedding");
            j.compress(&full)
        }
        ClassKind::Gaussian => {
            let h = random_quadratic_coefficients(d, rng);
            fock_even_isometry(d)?.compress(&gaussian_unitary(d, &h)?)
        }
    }
}
