mod common;

use cgsp_core::kernels::{kernel_matrix, KernelMatrix, KernelSpec};
use cgsp_core::linalg::c;
use cgsp_core::mkl::{combine, mkl_fit, project_l1_ball_nonneg, weight_shares, KernelDictionary, MklConfig};
use cgsp_core::reconstruct::{krr, sample, Observation, SamplingPlan};
use cgsp_core::datagen::gen_signal_seeded;
use cgsp_core::CMatrix;
use common::{random_cvector, random_features, random_psd, rng};
use proptest::prelude::*;

/// Projection onto `{x ≥ 0, ‖x − c‖₁ ≤ R}` by bisection on the soft-threshold level.
fn bisection_projection(v: &[f64], center: &[f64], radius: f64) -> Vec<f64> {
    let at = |tau: f64| -> Vec<f64> {
        v.iter()
            .zip(center)
            .map(|(&vi, &ci)| {
                let d = vi - ci;
                (ci + d.signum() * (d.abs() - tau).max(0.0)).max(0.0)
            })
            .collect()
    };
    let dist = |x: &[f64]| x.iter().zip(center).map(|(a, b)| (a - b).abs()).sum::<f64>();
    let x0 = at(0.0);
    if dist(&x0) <= radius {
        return x0;
    }
    let (mut lo, mut hi) = (0.0, v.iter().zip(center).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dist(&at(mid)) > radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(hi)
}

fn random_dict(n: usize, l: usize, seed: u64) -> KernelDictionary {
    let mut r = rng(seed);
    let z = random_features(n, 2, 1.0, &mut r);
    let kernels = (0..l)
        .map(|i| kernel_matrix(&KernelSpec::Egk { sigma: 0.3 + 0.4 * i as f64 }, &z).unwrap())
        .collect();
    KernelDictionary::new(kernels).unwrap()
}

fn rel_err(a: &cgsp_core::CVector, b: &cgsp_core::CVector) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_matches_bisection(
        v in prop::collection::vec(-3.0f64..3.0, 1..8),
        seed in any::<u64>(),
        radius in 0.05f64..3.0,
    ) {
        let mut r = rng(seed);
        let center: Vec<f64> = v.iter().map(|_| rand::Rng::random::<f64>(&mut r)).collect();
        let got = project_l1_ball_nonneg(&v, &center, radius).unwrap();
        let want = bisection_projection(&v, &center, radius);
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() <= 1e-7, "{got:?} vs {want:?}");
        }
        prop_assert!(got.iter().all(|&x| x >= 0.0));
        let dist: f64 = got.iter().zip(&center).map(|(a, b)| (a - b).abs()).sum();
        prop_assert!(dist <= radius + 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn fit_is_feasible_and_monotone(seed in any::<u64>(), l in 1usize..4, nu in 0.0f64..0.05, eta in 0.0f64..0.9) {
        let n = 24;
        let dict = random_dict(n, l, seed);
        let plan = SamplingPlan::random(n, 12, 0.05, seed).unwrap();
        let f = gen_signal_seeded(&dict.kernels()[0], seed);
        let y = sample(&plan, &f).unwrap();
        let cfg = MklConfig { nu, eta, max_iters: 40, ..MklConfig::default() };
        let res = mkl_fit(&dict, &plan, &y, &cfg).unwrap();
        let w0 = cfg.omega0(l);
        prop_assert!(res.omega.iter().all(|&w| w >= -1e-12));
        let dist: f64 = res.omega.iter().zip(&w0).map(|(a, b)| (a - b).abs()).sum();
        prop_assert!(dist <= cfg.radius + 1e-8);
        for pair in res.objective_trace.windows(2) {
            prop_assert!(pair[1] <= pair[0] + 1e-10 * pair[0].abs().max(1.0), "{pair:?}");
        }
        let again = mkl_fit(&dict, &plan, &y, &cfg).unwrap();
        prop_assert_eq!(format!("{again:?}"), format!("{res:?}"));
    }
}

#[test]
fn single_kernel_reduces_to_krr() {
    for seed in 0..10u64 {
        let n = 20;
        let dict = random_dict(n, 1, seed);
        let plan = SamplingPlan::random(n, 10, 0.02, seed).unwrap();
        let y = sample(&plan, &gen_signal_seeded(&dict.kernels()[0], seed)).unwrap();
        let s = plan.len() as f64;

        let cfg = MklConfig { nu: 0.0, eta: 0.0, radius: 5.0, omega0: Some(vec![1.0]), ..MklConfig::default() };
        let res = mkl_fit(&dict, &plan, &y, &cfg).unwrap();
        let scaled = combine(&dict, &res.omega).unwrap();
        let reference = krr(&scaled, &plan, &y, cfg.gamma * s).unwrap();
        assert!(rel_err(&res.f_opt, &reference.f) <= 1e-6, "seed {seed}");

        let pinned = MklConfig { radius: 1e-12, ..cfg.clone() };
        let res = mkl_fit(&dict, &plan, &y, &pinned).unwrap();
        let reference = krr(&dict.kernels()[0], &plan, &y, cfg.gamma * s).unwrap();
        assert!(rel_err(&res.f_opt, &reference.f) <= 1e-6, "seed {seed}");
    }
}

#[test]
fn zero_observations_give_zero_fit() {
    let dict = random_dict(10, 2, 3);
    let plan = SamplingPlan::random(10, 5, 0.0, 3).unwrap();
    let y = Observation { y: cgsp_core::CVector::zeros(5) };
    let res = mkl_fit(&dict, &plan, &y, &MklConfig::default()).unwrap();
    assert_eq!(res.beta.norm(), 0.0);
    assert_eq!(res.f_opt.norm(), 0.0);
}

#[test]
fn weight_concentrates_on_generating_kernel() {
    let n = 60;
    let trials = 20;
    let mut shares = Vec::new();
    for seed in 0..trials as u64 {
        let mut r = rng(1000 + seed);
        let z = random_features(n, 2, 1.0, &mut r);
        let k_true = kernel_matrix(&KernelSpec::Egk { sigma: 0.4 }, &z).unwrap();
        let noise = random_psd(n, n, &mut r);
        let noise = &noise * c(k_true.trace() / noise.trace().re, 0.0);
        let k_noise = KernelMatrix::new(noise, "noise").unwrap();
        let f = k_true.matrix() * random_cvector(n, &mut r);
        let plan = SamplingPlan::random(n, 40, 0.01, seed).unwrap();
        let y = sample(&plan, &f).unwrap();
        let dict = KernelDictionary::new(vec![k_true, k_noise]).unwrap();
        let res = mkl_fit(&dict, &plan, &y, &MklConfig::default()).unwrap();
        shares.push(weight_shares(&res.omega)[0]);
    }
    let mean = shares.iter().sum::<f64>() / trials as f64;
    let winners = shares.iter().filter(|&&s| s >= 0.6).count();
    assert!(mean >= 0.6, "mean share {mean}, shares {shares:?}");
    assert!(winners * 10 >= trials * 6, "only {winners} of {trials} trials favour the generating kernel");
}

#[test]
fn combine_is_weighted_sum() {
    let dict = random_dict(6, 3, 9);
    let w = [0.2, 0.0, 1.5];
    let k = combine(&dict, &w).unwrap();
    let mut want = CMatrix::zeros(6, 6);
    for (m, &wi) in dict.kernels().iter().zip(&w) {
        want += m.matrix() * c(wi, 0.0);
    }
    assert!((k.matrix() - want).norm() <= 1e-14);
    assert!(combine(&dict, &[1.0, -0.1, 0.0]).is_err());
}
