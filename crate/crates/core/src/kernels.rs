//! Pointwise kernels over complex feature vectors and the kernel matrices they induce.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{c, eig_hermitian, hermitian_defect, CMatrix, CVector};
use crate::metrics::{sesquilinear, squared_euclidean, squared_hermitian_with, FeatureVector, MetricTensor};

/// A kernel family together with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum KernelSpec {
    /// Euclidean Gaussian, `exp(-d_E² / 2σ²)`.
    Egk { sigma: f64 },
    /// Hermitian Gaussian, `exp(-d_H² / 2σ²)`.
    Hgk { sigma: f64, metric: MetricTensor },
    /// Euclidean Laplacian, `exp(-d_E / σ)`.
    Elk { sigma: f64 },
    /// Hermitian Laplacian, `exp(-d_H / σ)`.
    Hlk { sigma: f64, metric: MetricTensor },
    /// Polynomial, `(z_n^H H̄ z_m + c)^d`.
    Pk { c: f64, d: u32, metric: MetricTensor },
    /// A kernel matrix supplied directly.
    Precomputed(Arc<CMatrix>),
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            KernelSpec::Egk { sigma } | KernelSpec::Elk { sigma } if !(*sigma > 0.0 && sigma.is_finite()) => {
                bad(format!("kernel width must be positive, got {sigma}"))
            }
            KernelSpec::Hgk { sigma, metric } | KernelSpec::Hlk { sigma, metric } => {
                if !(*sigma > 0.0 && sigma.is_finite()) {
                    return bad(format!("kernel width must be positive, got {sigma}"));
                }
                metric.validate()
            }
            KernelSpec::Pk { c, d, metric } => {
                if !(*c >= 0.0 && c.is_finite()) {
                    return bad(format!("polynomial offset must be non-negative, got {c}"));
                }
                if *d < 1 {
                    return bad("polynomial degree must be at least 1".into());
                }
                metric.validate()
            }
            KernelSpec::Precomputed(k) => {
                if k.nrows() != k.ncols() {
                    return Err(Error::NotSquare { rows: k.nrows(), cols: k.ncols() });
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn metric(&self) -> MetricTensor {
        match self {
            KernelSpec::Hgk { metric, .. } | KernelSpec::Hlk { metric, .. } | KernelSpec::Pk { metric, .. } => *metric,
            _ => MetricTensor::Euclidean,
        }
    }

    /// True for the Gaussian and Laplacian families, whose values lie in `(0, 1]`.
    pub fn is_real_valued(&self) -> bool {
        matches!(self, KernelSpec::Egk { .. } | KernelSpec::Hgk { .. } | KernelSpec::Elk { .. } | KernelSpec::Hlk { .. })
    }

    fn uses_metric_field(&self) -> bool {
        matches!(self, KernelSpec::Hgk { .. } | KernelSpec::Hlk { .. } | KernelSpec::Pk { .. })
    }

    /// Short family name, e.g. `"hgk"`.
    pub fn family(&self) -> &'static str {
        match self {
            KernelSpec::Egk { .. } => "egk",
            KernelSpec::Hgk { .. } => "hgk",
            KernelSpec::Elk { .. } => "elk",
            KernelSpec::Hlk { .. } => "hlk",
            KernelSpec::Pk { .. } => "pk",
            KernelSpec::Precomputed(_) => "precomputed",
        }
    }

    /// `κ(z_n, z_m)`. Metrics are evaluated per call; use [`kernel_matrix`] for bulk work.
    pub fn eval(&self, zn: &FeatureVector, zm: &FeatureVector) -> Result<Complex64> {
        self.validate()?;
        if zn.dim() != zm.dim() {
            return Err(Error::DimensionMismatch { expected: zn.dim(), actual: zm.dim() });
        }
        if let KernelSpec::Precomputed(_) = self {
            return Err(Error::UnsupportedKernel("precomputed kernels have no pointwise form".into()));
        }
        let (hn, hm) = if self.uses_metric_field() {
            let m = self.metric();
            (Some(m.metric_at(zn)?), Some(m.metric_at(zm)?))
        } else {
            (None, None)
        };
        Ok(self.eval_pair(zn.as_slice(), zm.as_slice(), hn.as_ref(), hm.as_ref()))
    }

    /// Pairwise evaluation with precomputed metrics. Swapping the arguments
    /// conjugates the result bit-for-bit.
    fn eval_pair(&self, zn: &[Complex64], zm: &[Complex64], hn: Option<&CMatrix>, hm: Option<&CMatrix>) -> Complex64 {
        if canonical_order(zn, zm) == Ordering::Greater {
            return self.eval_pair(zm, zn, hm, hn).conj();
        }
        match self {
            KernelSpec::Egk { sigma } => c((-squared_euclidean(zn, zm) / (2.0 * sigma * sigma)).exp(), 0.0),
            KernelSpec::Elk { sigma } => c((-squared_euclidean(zn, zm).sqrt() / sigma).exp(), 0.0),
            KernelSpec::Hgk { sigma, .. } => {
                let d2 = squared_hermitian_with(hn.unwrap(), hm.unwrap(), zn, zm);
                c((-d2 / (2.0 * sigma * sigma)).exp(), 0.0)
            }
            KernelSpec::Hlk { sigma, .. } => {
                let d2 = squared_hermitian_with(hn.unwrap(), hm.unwrap(), zn, zm);
                c((-d2.sqrt() / sigma).exp(), 0.0)
            }
            KernelSpec::Pk { c: offset, d, .. } => {
                let inner = (sesquilinear(hn.unwrap(), zn, zm) + sesquilinear(hm.unwrap(), zn, zm)) * 0.5;
                (inner + offset).powu(*d)
            }
            KernelSpec::Precomputed(_) => unreachable!("rejected before pairwise evaluation"),
        }
    }
}

fn canonical_order(a: &[Complex64], b: &[Complex64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Egk { sigma } => write!(f, "egk:sigma={sigma}"),
            KernelSpec::Elk { sigma } => write!(f, "elk:sigma={sigma}"),
            KernelSpec::Hgk { sigma, metric } => write!(f, "hgk:sigma={sigma}:metric={metric}"),
            KernelSpec::Hlk { sigma, metric } => write!(f, "hlk:sigma={sigma}:metric={metric}"),
            KernelSpec::Pk { c, d, metric } => write!(f, "pk:c={c}:d={d}:metric={metric}"),
            KernelSpec::Precomputed(k) => write!(f, "precomputed:{}x{}", k.nrows(), k.ncols()),
        }
    }
}

/// Splits `family:key=value:key=value` into the family and its key/value pairs.
/// A bare token after `metric=torus` is read as the torus radius.
pub(crate) fn split_params(s: &str) -> (String, Vec<(String, String)>) {
    let mut parts = s.trim().split(':');
    let family = parts.next().unwrap_or_default().trim().to_ascii_lowercase();
    let mut params: Vec<(String, String)> = Vec::new();
    for tok in parts {
        let tok = tok.trim();
        match tok.split_once('=') {
            Some((k, v)) => params.push((k.trim().to_ascii_lowercase(), v.trim().to_string())),
            None => match params.last_mut() {
                Some((_, v)) => {
                    v.push(':');
                    v.push_str(tok);
                }
                None => params.push((tok.to_ascii_lowercase(), String::new())),
            },
        }
    }
    (family, params)
}

impl FromStr for KernelSpec {
    type Err = Error;

    /// Parses strings such as `"hgk:sigma=0.5:metric=kahler"` or `"pk:c=10:d=8:metric=poincare"`.
    fn from_str(s: &str) -> Result<Self> {
        let (family, params) = split_params(s);
        let err = |detail: String| Error::Parse { what: "kernel", detail };
        let mut sigma = None;
        let mut offset = None;
        let mut degree = None;
        let mut metric = MetricTensor::Euclidean;
        for (k, v) in &params {
            let num = || v.parse::<f64>().map_err(|e| err(format!("{k}={v}: {e}")));
            match k.as_str() {
                "sigma" | "s" => sigma = Some(num()?),
                "c" => offset = Some(num()?),
                "d" => degree = Some(v.parse::<u32>().map_err(|e| err(format!("d={v}: {e}")))?),
                "metric" | "m" => metric = v.parse()?,
                other => return Err(err(format!("unknown parameter {other:?} in {s:?}"))),
            }
        }
        let need_sigma = || sigma.ok_or_else(|| err(format!("{family} requires sigma")));
        let spec = match family.as_str() {
            "egk" => KernelSpec::Egk { sigma: need_sigma()? },
            "elk" => KernelSpec::Elk { sigma: need_sigma()? },
            "hgk" => KernelSpec::Hgk { sigma: need_sigma()?, metric },
            "hlk" => KernelSpec::Hlk { sigma: need_sigma()?, metric },
            "pk" => KernelSpec::Pk {
                c: offset.ok_or_else(|| err("pk requires c".into()))?,
                d: degree.ok_or_else(|| err("pk requires d".into()))?,
                metric,
            },
            other => return Err(Error::UnsupportedKernel(other.to_string())),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// A Hermitian kernel matrix with a label recording how it was built.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelMatrix {
    matrix: CMatrix,
    label: String,
}

/// Outcome of [`KernelMatrix::psd_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsdReport {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub is_psd: bool,
}

impl KernelMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-10;
    pub const PSD_RTOL: f64 = 1e-8;

    /// Wraps a matrix after checking it is square, finite and Hermitian.
    pub fn new(matrix: CMatrix, label: impl Into<String>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotSquare { rows: matrix.nrows(), cols: matrix.ncols() });
        }
        if !crate::linalg::is_finite(&matrix) {
            return Err(Error::NonFinite("kernel matrix"));
        }
        let scale = crate::linalg::max_abs(&matrix);
        let defect = hermitian_defect(&matrix);
        if defect > Self::HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NonHermitianInput { defect });
        }
        Ok(Self { matrix, label: label.into() })
    }

    pub(crate) fn new_unchecked(matrix: CMatrix, label: impl Into<String>) -> Self {
        Self { matrix, label: label.into() }
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// Eigenvalue check: `λ_min ≥ -1e-8 · λ_max`.
    pub fn psd_check(&self) -> Result<PsdReport> {
        let eig = eig_hermitian(&self.matrix)?;
        let lambda_max = eig.lambda_max();
        let lambda_min = eig.lambda_min();
        Ok(PsdReport { lambda_min, lambda_max, is_psd: lambda_min >= -Self::PSD_RTOL * lambda_max.abs() })
    }
}

/// Assembles `K_{nm} = κ(z_n, z_m)` from the upper triangle, mirroring conjugates below it.
pub fn kernel_matrix(spec: &KernelSpec, features: &[FeatureVector]) -> Result<KernelMatrix> {
    spec.validate()?;
    let n = features.len();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if let KernelSpec::Precomputed(k) = spec {
        if k.nrows() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: k.nrows() });
        }
        return KernelMatrix::new(k.as_ref().clone(), spec.to_string());
    }
    let dim = features[0].dim();
    if let Some(bad) = features.iter().find(|z| z.dim() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, actual: bad.dim() });
    }
    let field = if spec.uses_metric_field() { Some(spec.metric().field(features)?) } else { None };
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| {
                    let (hi, hj) = match &field {
                        Some(f) => (Some(&f[i]), Some(&f[j])),
                        None => (None, None),
                    };
                    spec.eval_pair(features[i].as_slice(), features[j].as_slice(), hi, hj)
                })
                .collect()
        })
        .collect();
    let mut k = CMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            let j = i + off;
            if i == j {
                k[(i, i)] = c(v.re, 0.0);
            } else {
                k[(i, j)] = v;
                k[(j, i)] = v.conj();
            }
        }
    }
    if !crate::linalg::is_finite(&k) {
        return Err(Error::NonFinite("kernel matrix"));
    }
    Ok(KernelMatrix::new_unchecked(k, spec.to_string()))
}

fn ensure_len(v: &CVector, n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: v.len() });
    }
    Ok(())
}

/// `α^H K α′`.
pub fn rkhs_inner(k: &KernelMatrix, alpha: &CVector, alpha2: &CVector) -> Result<Complex64> {
    ensure_len(alpha, k.n())?;
    ensure_len(alpha2, k.n())?;
    Ok(alpha.dotc(&(k.matrix() * alpha2)))
}

/// `sqrt(Re(α^H K α))`, clamped at zero.
pub fn rkhs_norm(k: &KernelMatrix, alpha: &CVector) -> Result<f64> {
    Ok(rkhs_inner(k, alpha, alpha)?.re.max(0.0).sqrt())
}

/// `1e-10 · tr(K) / N`.
pub fn default_regularization(k: &KernelMatrix) -> f64 {
    1e-10 * k.trace().abs() / k.n().max(1) as f64
}

/// `K + εI`.
pub fn regularize_kernel(k: &KernelMatrix, eps: f64) -> Result<KernelMatrix> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("regularization must be non-negative, got {eps}")));
    }
    let mut m = k.matrix.clone();
    for i in 0..m.nrows() {
        m[(i, i)] += c(eps, 0.0);
    }
    Ok(KernelMatrix::new_unchecked(m, k.label.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::solve_hpd;

    fn fv(parts: &[(f64, f64)]) -> FeatureVector {
        FeatureVector::new(parts.iter().map(|&(re, im)| c(re, im)).collect()).unwrap()
    }

    #[test]
    fn egk_examples() {
        let spec = KernelSpec::Egk { sigma: 0.5 };
        let z = fv(&[(0.3, -0.2)]);
        assert_eq!(spec.eval(&z, &z).unwrap(), c(1.0, 0.0));
        let v = spec.eval(&fv(&[(1.0, 0.0)]), &fv(&[(0.0, 0.0)])).unwrap();
        assert!((v.re - (-2.0f64).exp()).abs() < 1e-15);
        assert!((v.re - 0.135335).abs() < 1e-6);
    }

    #[test]
    fn linear_kernel_case() {
        let spec = KernelSpec::Pk { c: 0.0, d: 1, metric: MetricTensor::Euclidean };
        assert_eq!(spec.eval(&fv(&[(1.0, 0.0)]), &fv(&[(0.0, 1.0)])).unwrap(), c(0.0, 1.0));
        assert_eq!(spec.eval(&fv(&[(0.0, 1.0)]), &fv(&[(1.0, 0.0)])).unwrap(), c(0.0, -1.0));
    }

    #[test]
    fn laplacian_families() {
        let a = fv(&[(3.0, 4.0)]);
        let b = fv(&[(0.0, 0.0)]);
        let v = KernelSpec::Elk { sigma: 5.0 }.eval(&a, &b).unwrap();
        assert!((v.re - (-1.0f64).exp()).abs() < 1e-15);
        let h = KernelSpec::Hlk { sigma: 5.0, metric: MetricTensor::Euclidean }.eval(&a, &b).unwrap();
        assert!((h.re - v.re).abs() < 1e-15);
    }

    #[test]
    fn matrix_examples() {
        let spec = KernelSpec::Egk { sigma: 1.0 };
        let one = kernel_matrix(&spec, &[fv(&[(0.2, 0.1)])]).unwrap();
        assert_eq!(one.matrix()[(0, 0)], c(1.0, 0.0));
        let same = vec![fv(&[(0.5, 0.5)]); 4];
        let k = kernel_matrix(&spec, &same).unwrap();
        assert!(k.matrix().iter().all(|&v| v == c(1.0, 0.0)));
        assert!(kernel_matrix(&spec, &[]).is_err());
    }

    #[test]
    fn regularize_examples() {
        let zero = KernelMatrix::new(CMatrix::zeros(3, 3), "zero").unwrap();
        assert_eq!(regularize_kernel(&zero, 1.0).unwrap().matrix(), &CMatrix::identity(3, 3));
        let k = kernel_matrix(&KernelSpec::Egk { sigma: 1.0 }, &vec![fv(&[(0.1, 0.0)]); 5]).unwrap();
        assert_eq!(regularize_kernel(&k, 0.0).unwrap(), k);
        assert!(solve_hpd(k.matrix(), &CVector::from_element(5, c(1.0, 0.0))).is_err());
        let reg = regularize_kernel(&k, 1e-8).unwrap();
        assert!(solve_hpd(reg.matrix(), &CVector::from_element(5, c(1.0, 0.0))).is_ok());
        assert!((default_regularization(&k) - 1e-10).abs() < 1e-22);
    }

    #[test]
    fn rkhs_with_identity_is_dot_product() {
        let k = KernelMatrix::new(CMatrix::identity(2, 2), "id").unwrap();
        let a = CVector::from_vec(vec![c(1.0, 2.0), c(0.0, -1.0)]);
        let b = CVector::from_vec(vec![c(3.0, 0.0), c(1.0, 1.0)]);
        assert_eq!(rkhs_inner(&k, &a, &b).unwrap(), a.dotc(&b));
        assert!((rkhs_norm(&k, &a).unwrap() - a.norm()).abs() < 1e-15);
        assert_eq!(rkhs_inner(&k, &CVector::zeros(2), &b).unwrap(), c(0.0, 0.0));
        assert!(rkhs_inner(&k, &CVector::zeros(3), &b).is_err());
    }

    #[test]
    fn parse_round_trip() {
        let cases = [
            "egk:sigma=0.5",
            "hgk:sigma=0.5:metric=kahler",
            "hlk:sigma=2:metric=torus:1.5",
            "pk:c=10:d=8:metric=poincare",
            "elk:sigma=1",
        ];
        for s in cases {
            let spec: KernelSpec = s.parse().unwrap();
            let again: KernelSpec = spec.to_string().parse().unwrap();
            assert_eq!(spec, again);
        }
        assert_eq!(
            "hlk:sigma=2:metric=torus:1.5".parse::<KernelSpec>().unwrap(),
            KernelSpec::Hlk { sigma: 2.0, metric: MetricTensor::HermitianTorus { r: 1.5 } }
        );
        assert!("egk".parse::<KernelSpec>().is_err());
        assert!("egk:sigma=-1".parse::<KernelSpec>().is_err());
        assert!("pk:c=1:d=0".parse::<KernelSpec>().is_err());
        assert!(matches!("rbf:sigma=1".parse::<KernelSpec>(), Err(Error::UnsupportedKernel(_))));
    }

    #[test]
    fn precomputed_passthrough() {
        let m = Arc::new(CMatrix::identity(2, 2));
        let spec = KernelSpec::Precomputed(m.clone());
        let feats = vec![fv(&[(0.0, 0.0)]), fv(&[(1.0, 0.0)])];
        assert_eq!(kernel_matrix(&spec, &feats).unwrap().matrix(), m.as_ref());
        assert!(spec.eval(&feats[0], &feats[1]).is_err());
        assert!(kernel_matrix(&spec, &feats[..1]).is_err());
    }
}
