mod common;

use cgsp_core::linalg::{
    c, eig_hermitian, fractional_unitary_power, hermitian_defect, pseudo_inverse, solve_hpd, unitary_defect,
    UnitarySpectrum,
};
use cgsp_core::{CMatrix, CVector};
use common::{random_cvector, random_hpd, random_psd, rng};
use proptest::prelude::*;

fn random_unitary(n: usize, seed: u64) -> CMatrix {
    let mut r = rng(seed);
    let phases = CVector::from_fn(n, |i, _| {
        let t = 0.7 * i as f64 - 1.3;
        c(t.cos(), t.sin())
    });
    eig_hermitian(&random_psd(n, n, &mut r)).unwrap().eigenvectors * CMatrix::from_diagonal(&phases)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigendecomposition_invariants(n in 1usize..9, seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_psd(n, n, &mut r) - CMatrix::identity(n, n) * c(0.3, 0.0);
        let eig = eig_hermitian(&a).unwrap();
        let u = &eig.eigenvectors;
        prop_assert!((u.adjoint() * u - CMatrix::identity(n, n)).norm() <= 1e-8);
        prop_assert!(eig.eigenvalues.as_slice().windows(2).all(|w| w[0] >= w[1]));
        prop_assert!((eig.reconstruct() - &a).norm() <= 1e-8 * a.norm().max(1e-300));
    }

    #[test]
    fn psd_spectrum_is_nonnegative(n in 1usize..9, rank in 1usize..9, seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_psd(n, rank, &mut r);
        let eig = eig_hermitian(&a).unwrap();
        prop_assert!(eig.lambda_min() >= -1e-10 * eig.lambda_max().abs());
    }

    #[test]
    fn unitary_power_group(seed in any::<u64>()) {
        let u = random_unitary(5, seed);
        let spec = UnitarySpectrum::new(&u).unwrap();
        let grid = [0.3, 0.7, 1.0];
        for &a in &grid {
            let ua = spec.power(a);
            prop_assert!(unitary_defect(&ua) <= 1e-8);
            for &b in &grid {
                let lhs = &ua * spec.power(b);
                prop_assert!((lhs - spec.power(a + b)).norm() <= 1e-7);
            }
        }
        let half = fractional_unitary_power(&u, 0.5).unwrap();
        prop_assert!((&half * &half - &u).norm() <= 1e-8);
    }

    #[test]
    fn penrose_identities(rank in 1usize..9, seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = random_psd(8, rank, &mut r);
        let p = pseudo_inverse(&k, 1e-10 * 8.0).unwrap();
        let tol = 1e-7 * (1.0 + k.norm() * p.norm());
        prop_assert!((&k * &p * &k - &k).norm() <= tol * k.norm());
        prop_assert!((&p * &k * &p - &p).norm() <= tol * p.norm());
        prop_assert!(hermitian_defect(&(&k * &p)) <= 1e-7);
        prop_assert!(hermitian_defect(&(&p * &k)) <= 1e-7);
    }

    #[test]
    fn hpd_solve_residual(n in 1usize..12, seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_hpd(n, &mut r);
        let b = random_cvector(n, &mut r);
        let x = solve_hpd(&a, &b).unwrap();
        prop_assert!((&a * x - &b).norm() <= 1e-8 * b.norm());
    }
}
