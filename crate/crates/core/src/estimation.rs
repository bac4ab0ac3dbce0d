//! Orbit parameters, the concentration bound and Monte Carlo estimates of
//! the witness-detected fraction of an isospectral orbit.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::binomial_f64;
use crate::operators::{build_a, ProjectorA};
use crate::sampling::{isospectral_sample, RandomStream, Spectrum};
use crate::spaces::{ClassKind, StateClass};
use crate::witness::{f_value, DECISION_TOL};

/// Closed-form table row: physical dimension and `1 − X`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Table1Row {
    pub n: f64,
    pub one_minus_x: f64,
}

impl Table1Row {
    pub fn x(&self) -> f64 {
        1.0 - self.one_minus_x
    }

    pub fn p_cr(&self) -> f64 {
        critical_purity(self.x())
    }
}

/// Tabulated closed forms for `N` and `1 − X`.
pub fn table1_parameters(class: &StateClass) -> Result<Table1Row> {
    let d = class.d() as f64;
    let du = class.d() as u64;
    match class.kind() {
        ClassKind::Separable => {
            let l = class.particles().unwrap_or(1) as i32;
            let n = d.powi(l);
            // 2^{1−L} (d+1)^L / (d^L + 1)
            let one_minus_x = 2f64.powi(1 - l) * ((d + 1.0) / d).powi(l) / (1.0 + d.powi(-l));
            Ok(Table1Row { n, one_minus_x })
        }
        ClassKind::Bosonic => {
            let l = class.particles().unwrap_or(1) as u64;
            let n = binomial_f64(du + l - 1, l);
            let span = binomial_f64(du + 2 * l - 1, 2 * l);
            Ok(Table1Row {
                n,
                one_minus_x: 1.0 - 2.0 * span / (n * (n + 1.0)),
            })
        }
        ClassKind::Slater => {
            let l = class.particles().unwrap_or(1) as u64;
            let n = binomial_f64(du, l);
            let lf = l as f64;
            let one_minus_x = (2.0 * n / (n + 1.0)) * (d + 1.0) / ((lf + 1.0) * (d + 1.0 - lf));
            Ok(Table1Row { n, one_minus_x })
        }
        ClassKind::Gaussian => {
            let n = 2f64.powi(class.d() as i32 - 1);
            let one_minus_x = binomial_f64(2 * du, du) / ((n + 1.0) * n);
            Ok(Table1Row { n, one_minus_x })
        }
    }
}

/// Dimension of `span{ψ ⊗ ψ : ψ ∈ M}`, i.e. of `ker A` inside `Sym²(H)`.
pub fn kernel_dimension(class: &StateClass) -> f64 {
    let d = class.d() as u64;
    let l = class.particles().unwrap_or(0) as u64;
    match class.kind() {
        ClassKind::Separable => binomial_f64(d + 1, 2).powi(l as i32),
        ClassKind::Bosonic => binomial_f64(d + 2 * l - 1, 2 * l),
        ClassKind::Slater => binomial_f64(d, l) * binomial_f64(d + 1, l) / (l as f64 + 1.0),
        ClassKind::Gaussian => binomial_f64(2 * d, d) / 2.0,
    }
}

/// `dim ker A / dim Sym²(H)`, from [`kernel_dimension`].
pub fn kernel_fraction(class: &StateClass) -> Result<f64> {
    let n = class.dim_u128()? as f64;
    Ok(kernel_dimension(class) / (n * (n + 1.0) / 2.0))
}

/// `X = tr A / dim Sym²(H)`, clamped to `[0, 1]` against roundoff.
pub fn numeric_x(a: &ProjectorA) -> f64 {
    (a.trace() / a.sym2_dim() as f64).clamp(0.0, 1.0)
}

/// `P_cr = (1 − X)/(1 + X)`.
pub fn critical_purity(x: f64) -> f64 {
    (1.0 - x) / (1.0 + x)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bound {
    pub value: f64,
    /// False when `δ ≤ 0`; `value` is then 0.
    pub applicable: bool,
}

/// `1 − exp(−N δ² (X+1)² / 64)` for `δ > 0`.
pub fn concentration_bound(n: f64, x: f64, delta: f64) -> Bound {
    if delta > 0.0 {
        let exponent = -n * delta * delta * (x + 1.0).powi(2) / 64.0;
        Bound {
            value: -exponent.exp_m1(),
            applicable: true,
        }
    } else {
        Bound {
            value: 0.0,
            applicable: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitParameters {
    pub n: f64,
    pub x: f64,
    pub p_cr: f64,
    pub purity: f64,
    pub delta: f64,
    pub bound: Bound,
}

impl OrbitParameters {
    pub fn new(n: f64, x: f64, purity: f64) -> Result<Self> {
        if !(-1e-9..=1.0 + 1e-9).contains(&x) {
            return Err(Error::param(format!("X={x} outside [0, 1]")));
        }
        let x = x.clamp(0.0, 1.0);
        let p_cr = critical_purity(x);
        let delta = purity - p_cr;
        Ok(OrbitParameters {
            n,
            x,
            p_cr,
            purity,
            delta,
            bound: concentration_bound(n, x, delta),
        })
    }
}

/// Haar average of `f` over the orbit: `(X+1)(P − P_cr)/2`.
pub fn orbit_mean_f(params: &OrbitParameters) -> f64 {
    (params.x + 1.0) * (params.purity - params.p_cr) / 2.0
}

#[derive(Clone, Debug, PartialEq)]
pub struct FractionEstimate {
    pub class: StateClass,
    pub spectrum: Spectrum,
    pub seed: u64,
    pub tolerance: f64,
    pub n_samples: usize,
    pub n_correlated: usize,
    pub fraction: f64,
    pub std_err: f64,
    pub mean_f: f64,
    pub mean_f_std_err: f64,
    pub analytic_mean_f: f64,
    pub params: OrbitParameters,
}

/// Samples of `f` on `n_samples` Haar-random points of the orbit, in index order.
pub fn sample_f_values(
    a: &ProjectorA,
    spectrum: &Spectrum,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    Error::check_dim(a.space_dim(), spectrum.len())?;
    (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = RandomStream::new(seed, i).rng();
            let rho = isospectral_sample(spectrum, &mut rng)?;
            f_value(a, &rho)
        })
        .collect()
}

pub fn estimate_fraction(
    class: &StateClass,
    spectrum: &Spectrum,
    n_samples: usize,
    seed: u64,
) -> Result<FractionEstimate> {
    estimate_fraction_with(&build_a(class)?, spectrum, n_samples, seed)
}

/// Fraction of samples with `f > 1e-9`, with binomial standard error.
pub fn estimate_fraction_with(
    a: &ProjectorA,
    spectrum: &Spectrum,
    n_samples: usize,
    seed: u64,
) -> Result<FractionEstimate> {
    estimate_fraction_tol(a, spectrum, n_samples, seed, DECISION_TOL)
}

/// As [`estimate_fraction_with`], counting samples with `f > tolerance`.
pub fn estimate_fraction_tol(
    a: &ProjectorA,
    spectrum: &Spectrum,
    n_samples: usize,
    seed: u64,
    tolerance: f64,
) -> Result<FractionEstimate> {
    if n_samples == 0 {
        return Err(Error::param("n_samples must be at least 1"));
    }
    let values = sample_f_values(a, spectrum, n_samples, seed)?;
    let n = n_samples as f64;
    let n_correlated = values.iter().filter(|&&f| f > tolerance).count();
    let fraction = n_correlated as f64 / n;
    let mean_f = values.iter().sum::<f64>() / n;
    let var = if n_samples > 1 {
        values.iter().map(|f| (f - mean_f).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let params = OrbitParameters::new(a.space_dim() as f64, numeric_x(a), spectrum.purity())?;
    Ok(FractionEstimate {
        class: *a.class(),
        spectrum: spectrum.clone(),
        seed,
        tolerance,
        n_samples,
        n_correlated,
        fraction,
        std_err: (fraction * (1.0 - fraction) / n).sqrt(),
        mean_f,
        mean_f_std_err: (var / n).sqrt(),
        analytic_mean_f: orbit_mean_f(&params),
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn tabulated_rows() {
        let r = table1_parameters(&StateClass::separable(2, 2).unwrap()).unwrap();
        assert_eq!(r.n, 4.0);
        assert!(rel(r.one_minus_x, 0.9) < 1e-15);
        let r = table1_parameters(&StateClass::slater(4, 2).unwrap()).unwrap();
        assert_eq!(r.n, 6.0);
        assert!(rel(r.one_minus_x, 20.0 / 21.0) < 1e-15);
        assert!(rel(r.p_cr(), 10.0 / 11.0) < 1e-14);
        let r = table1_parameters(&StateClass::gaussian(4).unwrap()).unwrap();
        assert_eq!(r.n, 8.0);
        assert!(rel(r.one_minus_x, 35.0 / 36.0) < 1e-15);
        let r = table1_parameters(&StateClass::gaussian(3).unwrap()).unwrap();
        assert_eq!(r.one_minus_x, 1.0);
        let r = table1_parameters(&StateClass::separable(2, 3).unwrap()).unwrap();
        assert!(rel(r.one_minus_x, 0.75) < 1e-15);
        assert!(rel(r.p_cr(), 0.6) < 1e-14);
        let r = table1_parameters(&StateClass::bosonic(2, 2).unwrap()).unwrap();
        assert!(rel(r.one_minus_x, 1.0 / 6.0) < 1e-15);
    }

    #[test]
    fn closed_forms_need_no_cap() {
        let big = StateClass::unbounded(ClassKind::Slater, 40, Some(20)).unwrap();
        let r = table1_parameters(&big).unwrap();
        assert!(r.one_minus_x.is_finite() && r.one_minus_x > 0.0);
    }

    #[test]
    fn numeric_x_against_kernel_counts() {
        for class in [
            StateClass::separable(2, 2).unwrap(),
            StateClass::separable(2, 3).unwrap(),
            StateClass::separable(3, 2).unwrap(),
            StateClass::bosonic(2, 2).unwrap(),
            StateClass::bosonic(2, 3).unwrap(),
            StateClass::bosonic(3, 2).unwrap(),
            StateClass::slater(4, 2).unwrap(),
            StateClass::slater(5, 2).unwrap(),
            StateClass::slater(6, 2).unwrap(),
            StateClass::gaussian(3).unwrap(),
            StateClass::gaussian(4).unwrap(),
        ] {
            let a = build_a(&class).unwrap();
            let x = numeric_x(&a);
            assert!(
                (1.0 - x - kernel_fraction(&class).unwrap()).abs() < 1e-12,
                "{class}"
            );
        }
    }

    #[test]
    fn kernel_fraction_matches_tabulated_rows_except_bosonic() {
        for class in [
            StateClass::separable(3, 2).unwrap(),
            StateClass::slater(6, 2).unwrap(),
            StateClass::gaussian(4).unwrap(),
        ] {
            let r = table1_parameters(&class).unwrap();
            assert!(
                rel(kernel_fraction(&class).unwrap(), r.one_minus_x) < 1e-12,
                "{class}"
            );
        }
        // the bosonic row tabulates X in place of 1 − X
        let class = StateClass::bosonic(3, 2).unwrap();
        let r = table1_parameters(&class).unwrap();
        assert!(rel(1.0 - kernel_fraction(&class).unwrap(), r.one_minus_x) < 1e-12);
    }

    #[test]
    fn bound_values() {
        let b = concentration_bound(6.0, 1.0 / 21.0, 1.0 / 11.0);
        let expected = 1.0 - (-6.0 / 121.0 * (22.0f64 / 21.0).powi(2) / 64.0).exp();
        assert!(rel(b.value, expected) < 1e-12);
        assert!((b.value - 8.5e-4).abs() < 1e-5);
        assert!(concentration_bound(6.0, 0.1, 1e-12).value < 1e-20);
        let off = concentration_bound(6.0, 0.1, -0.2);
        assert_eq!((off.value, off.applicable), (0.0, false));
        assert!(concentration_bound(1e9, 0.1, 0.1).value > 0.999_999);
    }

    #[test]
    fn orbit_mean_examples() {
        let p = OrbitParameters::new(6.0, 1.0 / 21.0, 1.0).unwrap();
        assert!((p.delta - 1.0 / 11.0).abs() < 1e-15);
        assert!((orbit_mean_f(&p) - 1.0 / 21.0).abs() < 1e-15);
        let at = OrbitParameters::new(6.0, 0.3, critical_purity(0.3)).unwrap();
        assert!(orbit_mean_f(&at).abs() < 1e-15);
        let trivial = OrbitParameters::new(4.0, 0.0, 1.0).unwrap();
        assert_eq!(orbit_mean_f(&trivial), 0.0);
    }

    #[test]
    fn uniform_spectrum_never_detected() {
        let class = StateClass::separable(2, 2).unwrap();
        let est = estimate_fraction(&class, &Spectrum::uniform(4).unwrap(), 50, 1).unwrap();
        assert_eq!(est.n_correlated, 0);
        assert_eq!(est.std_err, 0.0);
        assert!(!est.params.bound.applicable);
    }

    #[test]
    fn estimates_are_deterministic() {
        let class = StateClass::slater(4, 2).unwrap();
        let spec = Spectrum::pure(6).unwrap();
        let a = estimate_fraction(&class, &spec, 200, 7).unwrap();
        let b = estimate_fraction(&class, &spec, 200, 7).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let c = pool.install(|| estimate_fraction(&class, &spec, 200, 7).unwrap());
        assert_eq!(a, c);
        assert!(a.fraction > 0.0);
    }

    #[test]
    fn spectrum_length_must_match() {
        let class = StateClass::slater(4, 2).unwrap();
        assert!(matches!(
            estimate_fraction(&class, &Spectrum::pure(5).unwrap(), 10, 1),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
