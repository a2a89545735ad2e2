//! Synthetic graphs, features and signals, CSV ingestion and distribution fitting.

pub mod distfit;
pub mod io;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::graph::{graph_from_kernel, index_set, Graph, GraphSpectrum, Sparsify};
use crate::kernels::{KernelMatrix, KernelSpec};
use crate::linalg::{c, select_columns, CVector};
use crate::metrics::FeatureVector;
use crate::Complex64;

pub use distfit::{fit_distributions, DistributionFits, EmpiricalDistribution, Histogram, RayleighFit, WeibullFit};
pub use io::{ingest_complex_csv, read_signal_csv, write_signal_csv, IngestMetadata};

/// Point-cloud and feature generators.
#[derive(Clone, Debug, PartialEq)]
pub enum SyntheticGraphSpec {
    /// Two interleaved unit semicircles; the second is shifted right by 1 and down by `offset`.
    TwoMoons { n: usize, noise: f64, offset: f64, seed: u64 },
    /// `(t cos t, h, t sin t) / 4.5π` with `t ∈ [1.5π, 4.5π]` and `h ∈ [0, height]`.
    SwissRoll { n: usize, height: f64, noise: f64, seed: u64 },
    /// Planted partition with edge probabilities `p_in` / `p_out`.
    Community { n: usize, communities: usize, p_in: f64, p_out: f64, seed: u64 },
    /// Three phase-shifted chirps `exp(2πi(0.1/N)t² + iφ)`, `φ ∈ {0, π/3, 2π/3}`.
    Chirp3D { n: usize },
    /// `z_n^i = scale · (x_n + i cos(2π (i/D) x_n))` with `x_n` evenly spaced on `[-1, 1]`.
    Line1D { n: usize, d: usize, scale: f64 },
}

impl SyntheticGraphSpec {
    pub const DEFAULT_MOON_NOISE: f64 = 0.05;
    pub const DEFAULT_MOON_OFFSET: f64 = 0.5;
    pub const DEFAULT_ROLL_HEIGHT: f64 = 10.0;
    pub const DEFAULT_P_IN: f64 = 0.3;
    pub const DEFAULT_P_OUT: f64 = 0.01;

    pub fn n(&self) -> usize {
        match *self {
            SyntheticGraphSpec::TwoMoons { n, .. }
            | SyntheticGraphSpec::SwissRoll { n, .. }
            | SyntheticGraphSpec::Community { n, .. }
            | SyntheticGraphSpec::Chirp3D { n }
            | SyntheticGraphSpec::Line1D { n, .. } => n,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SyntheticGraphSpec::TwoMoons { .. } => "two-moons",
            SyntheticGraphSpec::SwissRoll { .. } => "swiss-roll",
            SyntheticGraphSpec::Community { .. } => "community",
            SyntheticGraphSpec::Chirp3D { .. } => "chirp3d",
            SyntheticGraphSpec::Line1D { .. } => "line1d",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n() < 2 {
            return Err(Error::InvalidParameter(format!("generator needs at least 2 vertices, got {}", self.n())));
        }
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match *self {
            SyntheticGraphSpec::TwoMoons { noise, .. } | SyntheticGraphSpec::SwissRoll { noise, .. } if noise < 0.0 => {
                bad(format!("noise must be non-negative, got {noise}"))
            }
            SyntheticGraphSpec::Community { n, communities, p_in, p_out, .. } => {
                if communities == 0 || communities > n {
                    return bad(format!("community count {communities} must lie in 1..={n}"));
                }
                if !(0.0..=1.0).contains(&p_in) || !(0.0..=1.0).contains(&p_out) {
                    return bad("edge probabilities must lie in [0, 1]".into());
                }
                Ok(())
            }
            SyntheticGraphSpec::Line1D { d, scale, .. } => {
                if d == 0 {
                    return bad("feature dimension must be at least 1".into());
                }
                if !(scale > 0.0 && scale.is_finite()) {
                    return bad(format!("scale must be positive, got {scale}"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Feature vectors for every vertex of the generator.
pub fn gen_features(spec: &SyntheticGraphSpec) -> Result<Vec<FeatureVector>> {
    spec.validate()?;
    match *spec {
        SyntheticGraphSpec::Line1D { n, d, scale } => (0..n)
            .map(|k| {
                let x = -1.0 + 2.0 * k as f64 / (n - 1) as f64;
                let z = (1..=d).map(|i| c(x, (2.0 * PI * i as f64 / d as f64 * x).cos()) * scale).collect();
                FeatureVector::new(z)
            })
            .collect(),
        SyntheticGraphSpec::Chirp3D { n } => (0..n)
            .map(|t| {
                let phase = 2.0 * PI * (0.1 / n as f64) * (t as f64).powi(2);
                let z = [0.0, PI / 3.0, 2.0 * PI / 3.0].iter().map(|s| Complex64::from_polar(1.0, phase + s)).collect();
                FeatureVector::new(z)
            })
            .collect(),
        SyntheticGraphSpec::TwoMoons { n, noise, offset, seed } => {
            let mut rng = rng_for(seed);
            let upper = n / 2 + n % 2;
            (0..n)
                .map(|k| {
                    let (x, y) = if k < upper {
                        let t = PI * k as f64 / (upper.max(2) - 1) as f64;
                        (t.cos(), t.sin())
                    } else {
                        let lower = n - upper;
                        let t = PI * (k - upper) as f64 / (lower.max(2) - 1) as f64;
                        (1.0 - t.cos(), offset - t.sin())
                    };
                    FeatureVector::from_real(&[x + noise * gauss(&mut rng), y + noise * gauss(&mut rng)])
                })
                .collect()
        }
        SyntheticGraphSpec::SwissRoll { n, height, noise, seed } => {
            let mut rng = rng_for(seed);
            let norm = 4.5 * PI;
            (0..n)
                .map(|_| {
                    let t = 1.5 * PI + 3.0 * PI * rng.random::<f64>();
                    let h = height * rng.random::<f64>();
                    let p = [t * t.cos(), h, t * t.sin()];
                    let p: Vec<f64> = p.iter().map(|v| (v + noise * gauss(&mut rng)) / norm).collect();
                    FeatureVector::from_real(&p)
                })
                .collect()
        }
        SyntheticGraphSpec::Community { n, communities, seed, .. } => {
            let mut rng = rng_for(seed);
            let labels = community_labels(n, communities);
            labels
                .iter()
                .map(|&l| {
                    let angle = 2.0 * PI * l as f64 / communities as f64;
                    let r = 0.1;
                    FeatureVector::from_real(&[angle.cos() + r * gauss(&mut rng), angle.sin() + r * gauss(&mut rng)])
                })
                .collect()
        }
    }
}

/// Community index of each vertex, in contiguous blocks of near-equal size.
pub fn community_labels(n: usize, communities: usize) -> Vec<usize> {
    (0..n).map(|k| k * communities / n).collect()
}

/// The generator's graph. Community graphs are sampled from the planted-partition
/// model; every other generator connects its features with `weighting`.
pub fn gen_graph(spec: &SyntheticGraphSpec, weighting: &KernelSpec, sparsify: Sparsify) -> Result<Graph> {
    spec.validate()?;
    if let SyntheticGraphSpec::Community { n, communities, p_in, p_out, seed } = *spec {
        let labels = community_labels(n, communities);
        let mut rng = rng_for(seed);
        rng.set_stream(1);
        let mut w = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let p = if labels[i] == labels[j] { p_in } else { p_out };
                if rng.random::<f64>() < p {
                    w[(i, j)] = 1.0;
                    w[(j, i)] = 1.0;
                }
            }
        }
        return Graph::from_weights(w);
    }
    graph_from_kernel(weighting, &gen_features(spec)?, sparsify)
}

/// Target signal attached to a generator: the first chirp component for `Chirp3D`.
pub fn chirp_target(features: &[FeatureVector]) -> CVector {
    CVector::from_iterator(features.len(), features.iter().map(|z| z.as_slice()[0]))
}

/// `α` with i.i.d. standard circular complex normal entries (`E|α_i|² = 1`).
pub fn random_coefficients(n: usize, seed: u64) -> CVector {
    let mut rng = rng_for(seed);
    let s = 0.5f64.sqrt();
    CVector::from_fn(n, |_, _| c(s * gauss(&mut rng), s * gauss(&mut rng)))
}

/// `f = K α`.
pub fn gen_signal_from_kernel(k: &KernelMatrix, alpha: &CVector) -> Result<CVector> {
    if alpha.len() != k.n() {
        return Err(Error::DimensionMismatch { expected: k.n(), actual: alpha.len() });
    }
    Ok(k.matrix() * alpha)
}

/// `f = K α` with seeded random `α`.
pub fn gen_signal_seeded(k: &KernelMatrix, seed: u64) -> CVector {
    k.matrix() * random_coefficients(k.n(), seed)
}

/// `B^a (10 U_1 + 5 U_2 + 20 U_3)` where `U_i` are the leading columns of `U^a`.
///
/// Fails with [`Error::BandTooSmall`] when the band misses all three leading
/// components, since the projection would vanish.
pub fn gen_bandlimited_signal(s: &GraphSpectrum, band: &[usize]) -> Result<CVector> {
    if s.n() < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 vertices, got {}", s.n())));
    }
    if band.is_empty() {
        return Err(Error::EmptyBandSet);
    }
    let band = index_set(band, s.n())?;
    let weights = [(0usize, 10.0), (1, 5.0), (2, 20.0)];
    let kept: Vec<(usize, f64)> = weights.iter().copied().filter(|(i, _)| band.binary_search(i).is_ok()).collect();
    if kept.is_empty() {
        return Err(Error::BandTooSmall);
    }
    let cols: Vec<usize> = kept.iter().map(|&(i, _)| i).collect();
    let u = select_columns(s.ua(), &cols);
    let coeffs = CVector::from_iterator(kept.len(), kept.iter().map(|&(_, w)| c(w, 0.0)));
    Ok(u * coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::localization_ops;

    #[test]
    fn line1d_features() {
        let f = gen_features(&SyntheticGraphSpec::Line1D { n: 3, d: 2, scale: 1.0 }).unwrap();
        let xs: Vec<f64> = f.iter().map(|z| z.as_slice()[0].re).collect();
        assert_eq!(xs, vec![-1.0, 0.0, 1.0]);
        // i = D gives cos(2π x) = 1 at x = -1.
        assert!((f[0].as_slice()[1].im - 1.0).abs() < 1e-15);
        assert!((f[0].as_slice()[0].im - (-PI).cos()).abs() < 1e-15);
    }

    #[test]
    fn chirp_starts_at_one() {
        let f = gen_features(&SyntheticGraphSpec::Chirp3D { n: 8 }).unwrap();
        assert_eq!(f[0].as_slice()[0], c(1.0, 0.0));
        assert_eq!(chirp_target(&f)[0], c(1.0, 0.0));
        assert!(f.iter().all(|z| z.dim() == 3));
    }

    #[test]
    fn generators_are_seeded() {
        let specs = [
            SyntheticGraphSpec::TwoMoons { n: 20, noise: 0.05, offset: 0.5, seed: 3 },
            SyntheticGraphSpec::SwissRoll { n: 20, height: 10.0, noise: 0.0, seed: 3 },
            SyntheticGraphSpec::Community { n: 20, communities: 3, p_in: 0.3, p_out: 0.01, seed: 3 },
        ];
        for s in &specs {
            assert_eq!(gen_features(s).unwrap(), gen_features(s).unwrap());
            let w = KernelSpec::Egk { sigma: 0.3 };
            assert_eq!(gen_graph(s, &w, Sparsify::Knn(5)).unwrap(), gen_graph(s, &w, Sparsify::Knn(5)).unwrap());
        }
        assert!(gen_features(&SyntheticGraphSpec::Chirp3D { n: 1 }).is_err());
    }

    #[test]
    fn signal_from_kernel_examples() {
        let k = KernelMatrix::new(crate::linalg::identity(3) * c(2.0, 0.0), "k").unwrap();
        let e1 = CVector::from_fn(3, |i, _| if i == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) });
        assert_eq!(gen_signal_from_kernel(&k, &e1).unwrap(), k.matrix().column(0).into_owned());
        assert_eq!(gen_signal_from_kernel(&k, &CVector::zeros(3)).unwrap(), CVector::zeros(3));
        assert_eq!(gen_signal_seeded(&k, 9), gen_signal_seeded(&k, 9));
        assert!(gen_signal_from_kernel(&k, &CVector::zeros(2)).is_err());
    }

    #[test]
    fn bandlimited_signal_examples() {
        let w = DMatrix::from_fn(6, 6, |i, j| if (i + 1) % 6 == j || (j + 1) % 6 == i { 1.0 } else { 0.0 });
        let s = GraphSpectrum::new(&Graph::from_weights(w).unwrap(), 0.9, false).unwrap();
        let f = gen_bandlimited_signal(&s, &[0, 1, 2, 3]).unwrap();
        let expect = s.ua().column(0) * c(10.0, 0.0) + s.ua().column(1) * c(5.0, 0.0) + s.ua().column(2) * c(20.0, 0.0);
        assert!((&f - expect).norm() < 1e-12);
        let ops = localization_ops(&s, &[], &[0, 1, 2, 3]).unwrap();
        assert!((ops.ba() * &f - &f).norm() < 1e-8);
        let one = gen_bandlimited_signal(&s, &[0]).unwrap();
        assert!((one - s.ua().column(0) * c(10.0, 0.0)).norm() < 1e-12);
        assert!(matches!(gen_bandlimited_signal(&s, &[4, 5]), Err(Error::BandTooSmall)));
    }
}
