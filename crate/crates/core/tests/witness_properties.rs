use isocorr::linalg::{CMatrix, CVector, C64};
use isocorr::operators::{build_a, ProjectorA};
use isocorr::sampling::{
    haar_unitary, isospectral_sample, random_mixture, random_symmetry, random_unit_vector,
    simplex_weights, RandomStream, Spectrum,
};
use isocorr::spaces::StateClass;
use isocorr::witness::{
    bilinear_witness, depolarized_slater_state, f_value, linear_witness, slater_criterion_exact,
    DensityMatrix, TwoFermionSchmidt,
};
use proptest::prelude::*;
use std::sync::OnceLock;

fn projectors() -> &'static [ProjectorA] {
    static CELL: OnceLock<Vec<ProjectorA>> = OnceLock::new();
    CELL.get_or_init(|| {
        [
            StateClass::separable(2, 2),
            StateClass::separable(3, 2),
            StateClass::bosonic(2, 3),
            StateClass::slater(4, 2),
            StateClass::slater(5, 2),
            StateClass::gaussian(4),
        ]
        .into_iter()
        .map(|c| build_a(&c.unwrap()).unwrap())
        .collect()
    })
}

fn random_state(n: usize, seed: u64) -> DensityMatrix {
    let mut rng = RandomStream::new(seed, 0).rng();
    let spectrum = Spectrum::new(simplex_weights(n, &mut rng)).unwrap();
    isospectral_sample(&spectrum, &mut rng).unwrap()
}

fn conjugated(u: &CMatrix, rho: &DensityMatrix) -> DensityMatrix {
    let m = u * rho.matrix() * u.adjoint();
    DensityMatrix::new((&m + m.adjoint()) * C64::new(0.5, 0.0)).unwrap()
}

/// `tr ρ_A²` of a bipartite pure state on `C^d ⊗ C^d`, by explicit partial trace.
fn reduced_purity(psi: &CVector, d: usize) -> f64 {
    let mut reduced = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                reduced[(i, j)] += psi[i * d + k] * psi[j * d + k].conj();
            }
        }
    }
    (&reduced * &reduced).trace().re
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn witness_is_invariant_under_class_symmetries(k in 0usize..6, seed in any::<u64>()) {
        let a = &projectors()[k];
        let rho = random_state(a.space_dim(), seed);
        let u = random_symmetry(a.class(), &mut RandomStream::new(seed, 1).rng()).unwrap();
        let before = f_value(a, &rho).unwrap();
        let after = f_value(a, &conjugated(&u, &rho)).unwrap();
        prop_assert!((before - after).abs() < 1e-10, "{} vs {}", before, after);
    }

    #[test]
    fn bilinear_form_is_symmetric_and_restricts_to_f(k in 0usize..6, seed in any::<u64>()) {
        let a = &projectors()[k];
        let r1 = random_state(a.space_dim(), seed);
        let r2 = random_state(a.space_dim(), seed ^ 0x5555);
        let b12 = bilinear_witness(a, &r1, &r2).unwrap();
        let b21 = bilinear_witness(a, &r2, &r1).unwrap();
        prop_assert!((b12 - b21).abs() < 1e-12);
        prop_assert!((bilinear_witness(a, &r1, &r1).unwrap() - f_value(a, &r1).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn linear_witness_is_nonpositive_on_mixtures(k in 0usize..6, seed in any::<u64>(), members in 1usize..12) {
        let a = &projectors()[k];
        let mut rng = RandomStream::new(seed, 2).rng();
        let rho = random_mixture(a.class(), members, &mut rng).unwrap();
        let g = haar_unitary(a.space_dim(), &mut rng);
        let b = &g * CMatrix::from_diagonal(&CVector::from_fn(a.space_dim(), |i, _| C64::new(i as f64, 0.0))) * g.adjoint();
        let b = (&b + b.adjoint()) * C64::new(0.5, 0.0);
        let v = a.witness_operator().unwrap();
        prop_assert!(linear_witness(&v, &rho, &b).unwrap() <= 1e-10);
    }

    #[test]
    fn bipartite_pure_states_match_reduced_purity(d in 2usize..4, seed in any::<u64>()) {
        let a = if d == 2 { &projectors()[0] } else { &projectors()[1] };
        let psi: CVector = random_unit_vector(d * d, &mut RandomStream::new(seed, 3).rng());
        let f = f_value(a, &DensityMatrix::pure(&psi).unwrap()).unwrap();
        prop_assert!((f - (1.0 - reduced_purity(&psi, d)) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn two_fermion_closed_form_matches_f(t in 0.5f64..1.0, p in 0.0f64..=1.0) {
        let lambdas = vec![t.sqrt(), (1.0 - t).sqrt()];
        let schmidt = TwoFermionSchmidt::new(4, lambdas).unwrap();
        let f = f_value(&projectors()[3], &depolarized_slater_state(&schmidt, p).unwrap()).unwrap();
        prop_assert!((3.0 + 6.0 * f - slater_criterion_exact(&schmidt, p)).abs() < 1e-12);
    }
}

#[test]
fn product_states_are_undetected() {
    let a = &projectors()[0];
    let mut rng = RandomStream::new(11, 0).rng();
    for _ in 0..20 {
        let x: CVector = random_unit_vector(2, &mut rng);
        let y: CVector = random_unit_vector(2, &mut rng);
        let psi = x.kronecker(&y);
        assert!(
            f_value(a, &DensityMatrix::pure(&psi).unwrap())
                .unwrap()
                .abs()
                < 1e-14
        );
    }
}
