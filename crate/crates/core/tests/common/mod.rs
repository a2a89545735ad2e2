#![allow(dead_code)]

use cgsp_core::graph::Graph;
use cgsp_core::linalg::c;
use cgsp_core::metrics::FeatureVector;
use cgsp_core::{CMatrix, CVector};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_cvector(n: usize, rng: &mut ChaCha8Rng) -> CVector {
    CVector::from_fn(n, |_, _| c(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0))
}

pub fn random_rvector(n: usize, rng: &mut ChaCha8Rng) -> CVector {
    CVector::from_fn(n, |_, _| c(rng.random::<f64>() * 2.0 - 1.0, 0.0))
}

/// Points with every coordinate inside the disc of radius `radius / sqrt(dim)`,
/// so `|z|² < radius²`.
pub fn random_features(n: usize, dim: usize, radius: f64, rng: &mut ChaCha8Rng) -> Vec<FeatureVector> {
    let r = radius / (dim as f64).sqrt();
    (0..n)
        .map(|_| {
            let z = (0..dim)
                .map(|_| {
                    let rho = r * rng.random::<f64>().sqrt();
                    let t = std::f64::consts::TAU * rng.random::<f64>();
                    c(rho * t.cos(), rho * t.sin())
                })
                .collect();
            FeatureVector::new(z).unwrap()
        })
        .collect()
}

/// Erdős–Rényi style graph with uniform weights in (0, 1] on kept edges.
pub fn random_graph(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Graph {
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                let v = 1.0 - rng.random::<f64>();
                w[(i, j)] = v;
                w[(j, i)] = v;
            }
        }
    }
    Graph::from_weights(w).unwrap()
}

pub fn random_psd(n: usize, rank: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let b = CMatrix::from_fn(n, rank, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    &b * b.adjoint()
}

pub fn random_hpd(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    random_psd(n, n, rng) + CMatrix::identity(n, n) * c(0.1, 0.0)
}
