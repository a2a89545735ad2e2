//! Hermitian metric tensors on `ℂ^D` and the distances they induce.
//!
//! Point-dependent metrics are evaluated at both endpoints and averaged,
//! `H̄ = ½(H(z_n) + H(z_m))`, so every distance is symmetric in its arguments.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};

/// Coordinates of one vertex in `ℂ^D`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector(Vec<Complex64>);

impl FeatureVector {
    pub fn new(components: Vec<Complex64>) -> Result<Self> {
        if components.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("feature vector"));
        }
        Ok(Self(components))
    }

    /// Embeds a real point with zero imaginary parts.
    pub fn from_real(coords: &[f64]) -> Result<Self> {
        Self::new(coords.iter().map(|&x| c(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    /// `Σ |z^k|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|z| z * factor).collect())
    }
}

impl From<FeatureVector> for Vec<Complex64> {
    fn from(v: FeatureVector) -> Self {
        v.0
    }
}

/// Hermitian metric tensors `h_{ij̄}(z)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum MetricTensor {
    /// `δ_{ij̄}`
    #[default]
    Euclidean,
    /// `δ_{ij̄} r^{2(i-1)}`
    HermitianTorus { r: f64 },
    /// `δ_{ij̄} / (1 + |z|²)²`
    Kahler,
    /// `δ_{ij̄} / (1 + |z|²) - z^i z̄^j / (1 + |z|²)²`
    FubiniStudy,
    /// `4 δ_{ij̄} / (1 - |z|²)²`, defined on the open unit ball.
    Poincare,
}

impl MetricTensor {
    pub const DEFAULT_TORUS_RADIUS: f64 = 1.0;

    pub fn validate(&self) -> Result<()> {
        match *self {
            MetricTensor::HermitianTorus { r } if !(r > 0.0 && r.is_finite()) => {
                Err(Error::InvalidParameter(format!("torus radius must be positive, got {r}")))
            }
            _ => Ok(()),
        }
    }

    pub fn check_domain(&self, z: &FeatureVector) -> Result<()> {
        if let MetricTensor::Poincare = self {
            let norm_sq = z.norm_sqr();
            if norm_sq >= 1.0 {
                return Err(Error::OutOfDomain { norm_sq });
            }
        }
        Ok(())
    }

    /// `H(z)` as a `D × D` Hermitian positive-definite matrix.
    pub fn metric_at(&self, z: &FeatureVector) -> Result<CMatrix> {
        self.validate()?;
        self.check_domain(z)?;
        let d = z.dim();
        let s = z.norm_sqr();
        let zs = z.as_slice();
        let h = match *self {
            MetricTensor::Euclidean => CMatrix::identity(d, d),
            MetricTensor::HermitianTorus { r } => {
                CMatrix::from_fn(d, d, |i, j| if i == j { c(r.powi(2 * i as i32), 0.0) } else { c(0.0, 0.0) })
            }
            MetricTensor::Kahler => CMatrix::identity(d, d) * c(1.0 / (1.0 + s).powi(2), 0.0),
            MetricTensor::FubiniStudy => CMatrix::from_fn(d, d, |i, j| {
                let delta = if i == j { 1.0 / (1.0 + s) } else { 0.0 };
                c(delta, 0.0) - zs[i] * zs[j].conj() / (1.0 + s).powi(2)
            }),
            MetricTensor::Poincare => CMatrix::identity(d, d) * c(4.0 / (1.0 - s).powi(2), 0.0),
        };
        Ok(h)
    }

    /// Builds the metric at every point once, for repeated pairwise use.
    pub fn field(&self, points: &[FeatureVector]) -> Result<Vec<CMatrix>> {
        points.iter().map(|z| self.metric_at(z)).collect()
    }
}

impl fmt::Display for MetricTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricTensor::Euclidean => write!(f, "euclidean"),
            MetricTensor::HermitianTorus { r } => write!(f, "torus:{r}"),
            MetricTensor::Kahler => write!(f, "kahler"),
            MetricTensor::FubiniStudy => write!(f, "fubini-study"),
            MetricTensor::Poincare => write!(f, "poincare"),
        }
    }
}

impl FromStr for MetricTensor {
    type Err = Error;

    /// `euclidean | torus[:r] | kahler | fubini-study | poincare`
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let parse_err = |detail: String| Error::Parse { what: "metric", detail };
        let metric = match s.as_str() {
            "euclidean" => MetricTensor::Euclidean,
            "kahler" | "kähler" => MetricTensor::Kahler,
            "fubini-study" | "fubini_study" | "fs" => MetricTensor::FubiniStudy,
            "poincare" | "poincaré" => MetricTensor::Poincare,
            "torus" => MetricTensor::HermitianTorus { r: Self::DEFAULT_TORUS_RADIUS },
            other => match other.strip_prefix("torus:").or_else(|| other.strip_prefix("torus=")) {
                Some(r) => {
                    let r: f64 = r.parse().map_err(|e| parse_err(format!("torus radius {r:?}: {e}")))?;
                    MetricTensor::HermitianTorus { r }
                }
                None => return Err(parse_err(format!("unknown metric {other:?}"))),
            },
        };
        metric.validate()?;
        Ok(metric)
    }
}

fn ensure_same_dim(a: &FeatureVector, b: &FeatureVector) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), actual: b.dim() });
    }
    Ok(())
}

/// `sqrt(Σ_i |z_n^i - z_m^i|²)`.
pub fn dist_euclidean(zn: &FeatureVector, zm: &FeatureVector) -> Result<f64> {
    ensure_same_dim(zn, zm)?;
    Ok(squared_euclidean(zn.as_slice(), zm.as_slice()).sqrt())
}

pub(crate) fn squared_euclidean(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum()
}

/// `u^H H v`.
pub(crate) fn sesquilinear(h: &CMatrix, u: &[Complex64], v: &[Complex64]) -> Complex64 {
    let d = u.len();
    let mut acc = c(0.0, 0.0);
    for i in 0..d {
        let mut row = c(0.0, 0.0);
        for j in 0..d {
            row += h[(i, j)] * v[j];
        }
        acc += u[i].conj() * row;
    }
    acc
}

/// `Δ^H H̄ Δ` with `H̄ = ½(h_n + h_m)` and `Δ = z_n - z_m`, clamped at zero.
pub(crate) fn squared_hermitian_with(h_n: &CMatrix, h_m: &CMatrix, zn: &[Complex64], zm: &[Complex64]) -> f64 {
    let delta: Vec<Complex64> = zn.iter().zip(zm).map(|(a, b)| a - b).collect();
    let q = 0.5 * (sesquilinear(h_n, &delta, &delta).re + sesquilinear(h_m, &delta, &delta).re);
    q.max(0.0)
}

/// Distance induced by the symmetrized metric `H̄ = ½(H(z_n) + H(z_m))`.
pub fn dist_hermitian(metric: &MetricTensor, zn: &FeatureVector, zm: &FeatureVector) -> Result<f64> {
    ensure_same_dim(zn, zm)?;
    let h_n = metric.metric_at(zn)?;
    let h_m = metric.metric_at(zm)?;
    Ok(squared_hermitian_with(&h_n, &h_m, zn.as_slice(), zm.as_slice()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eig_hermitian, hermitian_defect};
    use proptest::prelude::*;

    fn fv(parts: &[(f64, f64)]) -> FeatureVector {
        FeatureVector::new(parts.iter().map(|&(re, im)| c(re, im)).collect()).unwrap()
    }

    const ALL: [MetricTensor; 5] = [
        MetricTensor::Euclidean,
        MetricTensor::HermitianTorus { r: 1.7 },
        MetricTensor::Kahler,
        MetricTensor::FubiniStudy,
        MetricTensor::Poincare,
    ];

    #[test]
    fn metrics_at_origin() {
        let origin = fv(&[(0.0, 0.0), (0.0, 0.0)]);
        let id = CMatrix::identity(2, 2);
        assert_eq!(MetricTensor::Euclidean.metric_at(&origin).unwrap(), id);
        assert_eq!(MetricTensor::Kahler.metric_at(&origin).unwrap(), id);
        assert_eq!(MetricTensor::FubiniStudy.metric_at(&origin).unwrap(), id);
        assert_eq!(MetricTensor::Poincare.metric_at(&origin).unwrap(), id * c(4.0, 0.0));
    }

    #[test]
    fn euclidean_metric_is_identity_anywhere() {
        let z = fv(&[(3.0, -2.0), (0.1, 7.0), (1.0, 1.0)]);
        assert_eq!(MetricTensor::Euclidean.metric_at(&z).unwrap(), CMatrix::identity(3, 3));
    }

    #[test]
    fn torus_scales_coordinates() {
        let z = fv(&[(0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        let h = MetricTensor::HermitianTorus { r: 2.0 }.metric_at(&z).unwrap();
        assert_eq!(h[(0, 0)].re, 1.0);
        assert_eq!(h[(1, 1)].re, 4.0);
        assert_eq!(h[(2, 2)].re, 16.0);
    }

    #[test]
    fn poincare_outside_ball_is_error() {
        let z = fv(&[(0.8, 0.0), (0.0, 0.6)]);
        assert!(matches!(MetricTensor::Poincare.metric_at(&z), Err(Error::OutOfDomain { .. })));
        let zero = fv(&[(0.0, 0.0), (0.0, 0.0)]);
        assert!(dist_hermitian(&MetricTensor::Poincare, &z, &zero).is_err());
    }

    #[test]
    fn euclidean_distance_examples() {
        assert_eq!(dist_euclidean(&fv(&[(3.0, 4.0)]), &fv(&[(0.0, 0.0)])).unwrap(), 5.0);
        let z = fv(&[(1.0, -1.0), (2.0, 0.5)]);
        assert_eq!(dist_euclidean(&z, &z).unwrap(), 0.0);
        let d = dist_euclidean(&fv(&[(1.0, 0.0), (0.0, 1.0)]), &fv(&[(0.0, 0.0), (0.0, 0.0)])).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        assert!(matches!(
            dist_euclidean(&fv(&[(1.0, 0.0)]), &fv(&[(1.0, 0.0), (0.0, 0.0)])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn poincare_small_displacement_doubles() {
        let eps = 1e-6;
        let d = dist_hermitian(&MetricTensor::Poincare, &fv(&[(eps, 0.0), (0.0, 0.0)]), &fv(&[(0.0, 0.0), (0.0, 0.0)]))
            .unwrap();
        assert!((d - 2.0 * eps).abs() < 1e-9);
    }

    #[test]
    fn kahler_hand_value() {
        // H(1) = 1/4, H(0) = 1, H̄ = 5/8.
        let d = dist_hermitian(&MetricTensor::Kahler, &fv(&[(1.0, 0.0)]), &fv(&[(0.0, 0.0)])).unwrap();
        assert!((d - (5.0f64 / 8.0).sqrt()).abs() < 1e-15);
        assert!((d - 0.7906).abs() < 1e-4);
    }

    #[test]
    fn parse_round_trip() {
        for m in ALL {
            let parsed: MetricTensor = m.to_string().parse().unwrap();
            assert_eq!(parsed, m);
        }
        assert_eq!("torus".parse::<MetricTensor>().unwrap(), MetricTensor::HermitianTorus { r: 1.0 });
        assert!("torus:-1".parse::<MetricTensor>().is_err());
        assert!("hyperbolic".parse::<MetricTensor>().is_err());
    }

    fn point(dim: usize, scale: f64) -> impl Strategy<Value = FeatureVector> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim)
            .prop_map(move |v| FeatureVector::new(v.into_iter().map(|(a, b)| c(a * scale, b * scale)).collect()).unwrap())
    }

    proptest! {
        #[test]
        fn metric_tensors_are_hpd(z in point(3, 0.3)) {
            for m in ALL {
                let h = m.metric_at(&z).unwrap();
                prop_assert!(hermitian_defect(&h) <= 1e-12);
                prop_assert!(eig_hermitian(&h).unwrap().lambda_min() > 0.0);
            }
        }

        #[test]
        fn distance_axioms(a in point(2, 0.45), b in point(2, 0.45)) {
            for m in ALL {
                let ab = dist_hermitian(&m, &a, &b).unwrap();
                let ba = dist_hermitian(&m, &b, &a).unwrap();
                prop_assert_eq!(ab, ba);
                prop_assert_eq!(dist_hermitian(&m, &a, &a).unwrap(), 0.0);
                if a != b {
                    prop_assert!(ab > 0.0);
                }
            }
            let e = dist_hermitian(&MetricTensor::Euclidean, &a, &b).unwrap();
            prop_assert!((e - dist_euclidean(&a, &b).unwrap()).abs() <= 1e-12);
        }
    }
}
