mod common;

use cgsp_core::datagen::gen_bandlimited_signal;
use cgsp_core::graph::{localization_ops, perfect_localization_check, GraphSpectrum};
use cgsp_core::kernels::{rkhs_norm, KernelMatrix};
use cgsp_core::linalg::{c, select_columns};
use cgsp_core::reconstruct::{bandlimited_ridge, krr, krr_objective, nmse, sample, Observation, SamplingPlan};
use cgsp_core::CVector;
use common::{random_cvector, random_graph, random_hpd, random_psd, rng};
use proptest::prelude::*;
use rand::Rng;

fn random_plan(n: usize, size: usize, noise: f64, seed: u64) -> SamplingPlan {
    SamplingPlan::random(n, size, noise, seed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn representer_and_minimizer(seed in any::<u64>(), n in 2usize..11, rank_frac in 0.3f64..1.0, gamma in 1e-3f64..1.0) {
        let mut r = rng(seed);
        let rank = ((n as f64 * rank_frac).ceil() as usize).max(1);
        let k = KernelMatrix::new(random_psd(n, rank, &mut r), "psd").unwrap();
        let size = r.random_range(1..=n);
        let plan = random_plan(n, size, 0.0, seed);
        let y = Observation { y: random_cvector(size, &mut r) };
        let sol = krr(&k, &plan, &y, gamma * size as f64).unwrap();
        let rebuilt = select_columns(k.matrix(), plan.indices()) * &sol.beta;
        prop_assert!((&rebuilt - &sol.f).norm() <= 1e-12 * sol.f.norm().max(1.0));

        let best = krr_objective(&k, &plan, &y, gamma, &sol.f).unwrap();
        for _ in 0..100 {
            let scale = 10f64.powf(r.random_range(-4.0..0.0));
            let delta = k.matrix() * random_cvector(n, &mut r) * c(scale, 0.0);
            let other = krr_objective(&k, &plan, &y, gamma, &(&sol.f + delta)).unwrap();
            prop_assert!(best <= other + 1e-9 * best.abs().max(1.0), "{best} > {other}");
        }
    }

    #[test]
    fn noiseless_interpolation(seed in any::<u64>(), n in 1usize..15) {
        let mut r = rng(seed);
        let k = KernelMatrix::new(random_hpd(n, &mut r), "hpd").unwrap();
        let size = r.random_range(1..=n);
        let plan = random_plan(n, size, 0.0, seed);
        let f = random_cvector(n, &mut r);
        let y = sample(&plan, &f).unwrap();
        let sol = krr(&k, &plan, &y, 1e-12).unwrap();
        prop_assert!((sol.fitted(&plan).unwrap() - &y.y).norm() <= 1e-6 * y.y.norm().max(1.0));
    }

    #[test]
    fn ridge_shrinks_rkhs_norm(seed in any::<u64>(), n in 2usize..12) {
        let mut r = rng(seed);
        let k = KernelMatrix::new(random_hpd(n, &mut r), "hpd").unwrap();
        let plan = random_plan(n, n.div_ceil(2), 0.0, seed);
        let y = Observation { y: random_cvector(plan.len(), &mut r) };
        let mut last = f64::INFINITY;
        for gamma in [1e-6, 1e-3, 1e-1, 1.0, 10.0] {
            let sol = krr(&k, &plan, &y, gamma).unwrap();
            let norm = rkhs_norm(&k, &plan.scatter(&sol.beta).unwrap()).unwrap();
            prop_assert!(norm <= last * (1.0 + 1e-9) + 1e-12, "gamma={gamma}: {norm} > {last}");
            last = norm;
        }
    }

    #[test]
    fn bandlimited_ridge_stays_in_band(seed in any::<u64>(), n in 3usize..20, a in 0.2f64..1.5) {
        let mut r = rng(seed);
        let g = random_graph(n, 0.4, &mut r);
        let s = GraphSpectrum::new(&g, a, false).unwrap();
        let band: Vec<usize> = (0..n.div_ceil(2)).collect();
        let plan = random_plan(n, n, 0.05, seed);
        let y = sample(&plan, &random_cvector(n, &mut r)).unwrap();
        let f = bandlimited_ridge(&s, &band, 1e-4, 1e-3, &plan, &y).unwrap();
        let ops = localization_ops(&s, &[], &band).unwrap();
        prop_assert!((ops.ba() * &f - &f).norm() <= 1e-8 * f.norm().max(1.0));
    }

    #[test]
    fn sampling_is_deterministic(seed in any::<u64>(), n in 1usize..30, noise in 0.0f64..1.0) {
        let mut r = rng(seed);
        let f = random_cvector(n, &mut r);
        let plan = random_plan(n, n / 2, noise, seed);
        prop_assert_eq!(sample(&plan, &f).unwrap(), sample(&plan, &f).unwrap());
        prop_assert_eq!(&random_plan(n, n / 2, noise, seed), &plan);
    }
}

#[test]
fn exact_bandlimited_recovery() {
    let mut r = rng(41);
    for n in [8, 15, 30] {
        let g = random_graph(n, 0.4, &mut r);
        let s = GraphSpectrum::new(&g, 0.8, false).unwrap();
        let band: Vec<usize> = (0..5).collect();
        let f = gen_bandlimited_signal(&s, &band).unwrap();
        let plan = SamplingPlan::full(n, 0.0, 0).unwrap();
        let y = sample(&plan, &f).unwrap();
        let rec = bandlimited_ridge(&s, &band, 1e-4, 1e-8, &plan, &y).unwrap();
        assert!(nmse(&rec, &f).unwrap() <= 1e-10);
        let all: Vec<usize> = (0..n).collect();
        let check = perfect_localization_check(&localization_ops(&s, &all, &band).unwrap()).unwrap();
        assert!((check.lambda_max - 1.0).abs() <= 1e-6);
    }
}

#[test]
fn zero_data_gives_zero_estimates() {
    let mut r = rng(42);
    let n = 6;
    let k = KernelMatrix::new(random_hpd(n, &mut r), "hpd").unwrap();
    let plan = SamplingPlan::random(n, 4, 0.0, 1).unwrap();
    let y = Observation { y: CVector::zeros(4) };
    assert_eq!(krr(&k, &plan, &y, 0.5).unwrap().f, CVector::zeros(n));
    let s = GraphSpectrum::new(&random_graph(n, 0.5, &mut r), 0.5, false).unwrap();
    assert_eq!(bandlimited_ridge(&s, &[0, 1], 1e-4, 0.1, &plan, &y).unwrap().norm(), 0.0);
}
