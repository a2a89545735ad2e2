//! Maximum-likelihood Rayleigh and Weibull fits, the empirical CDF and
//! Freedman–Diaconis histograms for magnitude samples.

use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 10;
const WEIBULL_TOL: f64 = 1e-8;
const WEIBULL_MAX_ITERS: usize = 200;
const MAX_BINS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayleighFit {
    pub sigma: f64,
}

impl RayleighFit {
    /// `σ̂ = sqrt(Σ x² / 2n)`.
    pub fn fit(x: &[f64]) -> Result<Self> {
        check_samples(x)?;
        let s2: f64 = x.iter().map(|v| v * v).sum::<f64>() / (2.0 * x.len() as f64);
        Ok(Self { sigma: s2.sqrt() })
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let s2 = self.sigma * self.sigma;
        x / s2 * (-x * x / (2.0 * s2)).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        1.0 - (-x * x / (2.0 * self.sigma * self.sigma)).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeibullFit {
    /// Shape.
    pub k: f64,
    /// Scale.
    pub lambda: f64,
    pub iterations: usize,
}

impl WeibullFit {
    /// Newton's method on the profile likelihood equation for the shape
    /// `Σ xᵏ ln x / Σ xᵏ − 1/k − mean(ln x) = 0`, then `λ = (mean(xᵏ))^{1/k}`.
    pub fn fit(x: &[f64]) -> Result<Self> {
        check_samples(x)?;
        let n = x.len() as f64;
        let m = x.iter().cloned().fold(0.0, f64::max);
        // Scale-free in k; working with x/max keeps xᵏ in (0, 1].
        let logs: Vec<f64> = x.iter().map(|v| (v / m).ln()).collect();
        let mean_log = logs.iter().sum::<f64>() / n;
        let var_log = logs.iter().map(|l| (l - mean_log).powi(2)).sum::<f64>() / n;
        if !(var_log > 0.0) {
            return Err(Error::FitDiverged("samples have zero spread".into()));
        }
        let mut k = std::f64::consts::PI / (6.0f64.sqrt() * var_log.sqrt());
        for iter in 1..=WEIBULL_MAX_ITERS {
            let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
            for &l in &logs {
                let w = (k * l).exp();
                s0 += w;
                s1 += w * l;
                s2 += w * l * l;
            }
            let g = s1 / s0 - 1.0 / k - mean_log;
            let dg = (s2 * s0 - s1 * s1) / (s0 * s0) + 1.0 / (k * k);
            let mut next = k - g / dg;
            if !next.is_finite() {
                return Err(Error::FitDiverged(format!("non-finite shape at iteration {iter}")));
            }
            if next <= 0.0 {
                next = k / 2.0;
            }
            let done = (next - k).abs() <= WEIBULL_TOL * k;
            k = next;
            if done {
                let mean_pow = logs.iter().map(|l| (k * l).exp()).sum::<f64>() / n;
                let lambda = m * mean_pow.powf(1.0 / k);
                if !(lambda.is_finite() && lambda > 0.0) {
                    return Err(Error::FitDiverged(format!("scale estimate {lambda}")));
                }
                return Ok(Self { k, lambda, iterations: iter });
            }
        }
        Err(Error::FitDiverged(format!("no convergence in {WEIBULL_MAX_ITERS} iterations")))
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let z = x / self.lambda;
        self.k / self.lambda * z.powf(self.k - 1.0) * (-z.powf(self.k)).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        1.0 - (-(x / self.lambda).powf(self.k)).exp()
    }
}

fn check_samples(x: &[f64]) -> Result<()> {
    if let Some(bad) = x.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::InvalidParameter(format!("magnitudes must be positive and finite, found {bad}")));
    }
    if x.len() < MIN_SAMPLES {
        return Err(Error::InsufficientData { needed: MIN_SAMPLES, got: x.len() });
    }
    Ok(())
}

/// Sorted samples with ECDF and quantile lookups.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalDistribution {
    sorted: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySignal);
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("samples"));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }

    /// Fraction of samples `≤ x`.
    pub fn ecdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    /// Linear-interpolation quantile, `p ∈ [0, 1]`.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let pos = p * (self.sorted.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        self.sorted[lo] + (pos - lo as f64) * (self.sorted[hi] - self.sorted[lo])
    }

    /// Freedman–Diaconis width `2·IQR·n^{-1/3}`; one bin when the IQR vanishes.
    pub fn histogram(&self) -> Histogram {
        let (lo, hi) = (self.min(), self.max());
        let iqr = self.quantile(0.75) - self.quantile(0.25);
        let width = 2.0 * iqr / (self.len() as f64).cbrt();
        let bins = if width > 0.0 && hi > lo { (((hi - lo) / width).ceil() as usize).clamp(1, MAX_BINS) } else { 1 };
        Histogram::build(&self.sorted, lo, hi, bins)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    /// `bins + 1` edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// `count / (n · width)`, integrating to one.
    pub density: Vec<f64>,
}

impl Histogram {
    fn build(sorted: &[f64], lo: f64, hi: f64, bins: usize) -> Self {
        let span = if hi > lo { hi - lo } else { 1.0 };
        let width = span / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|i| lo + i as f64 * width).collect();
        let mut counts = vec![0usize; bins];
        for &v in sorted {
            let b = (((v - lo) / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
        let n = sorted.len() as f64;
        let density = counts.iter().map(|&c| c as f64 / (n * width)).collect();
        Self { edges, counts, density }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }
}

/// All fits for one magnitude sample.
#[derive(Clone, Debug)]
pub struct DistributionFits {
    pub rayleigh: RayleighFit,
    pub weibull: WeibullFit,
    pub ecdf: EmpiricalDistribution,
    pub histogram: Histogram,
}

pub fn fit_distributions(mags: &[f64]) -> Result<DistributionFits> {
    let rayleigh = RayleighFit::fit(mags)?;
    let weibull = WeibullFit::fit(mags)?;
    let ecdf = EmpiricalDistribution::new(mags)?;
    let histogram = ecdf.histogram();
    Ok(DistributionFits { rayleigh, weibull, ecdf, histogram })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_samples_diverge() {
        assert!(matches!(WeibullFit::fit(&[2.0; 20]), Err(Error::FitDiverged(_))));
        assert!(matches!(fit_distributions(&[2.0; 20]), Err(Error::FitDiverged(_))));
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(fit_distributions(&[1.5]), Err(Error::InsufficientData { needed: 10, got: 1 })));
        assert!(matches!(RayleighFit::fit(&[1.0; 9]), Err(Error::InsufficientData { .. })));
        assert!(RayleighFit::fit(&[1.0, -1.0]).is_err());
    }

    #[test]
    fn rayleigh_closed_form() {
        let x = [1.0, 2.0, 3.0, 1.0, 2.0, 3.0, 1.0, 2.0, 3.0, 1.0];
        let s = RayleighFit::fit(&x).unwrap().sigma;
        let expect = (x.iter().map(|v| v * v).sum::<f64>() / 20.0).sqrt();
        assert_eq!(s, expect);
    }

    #[test]
    fn ecdf_shape() {
        let e = EmpiricalDistribution::new(&[3.0, 1.0, 2.0, 2.0]).unwrap();
        assert_eq!(e.ecdf(0.5), 0.0);
        assert_eq!(e.ecdf(1.0), 0.25);
        assert_eq!(e.ecdf(2.0), 0.75);
        assert_eq!(e.ecdf(e.max()), 1.0);
        assert_eq!(e.quantile(0.5), 2.0);
    }

    #[test]
    fn histogram_integrates_to_one() {
        let x: Vec<f64> = (1..=200).map(|i| (i as f64).sqrt()).collect();
        let h = EmpiricalDistribution::new(&x).unwrap().histogram();
        assert_eq!(h.counts.iter().sum::<usize>(), 200);
        let area: f64 = h.density.iter().zip(h.edges.windows(2)).map(|(d, e)| d * (e[1] - e[0])).sum();
        assert!((area - 1.0).abs() < 1e-12);
        let flat = EmpiricalDistribution::new(&[1.0; 5]).unwrap().histogram();
        assert_eq!(flat.bins(), 1);
    }

    #[test]
    fn pdf_cdf_consistency() {
        let r = RayleighFit { sigma: 2.0 };
        let w = WeibullFit { k: 1.5, lambda: 1.0, iterations: 0 };
        assert_eq!(r.cdf(0.0), 0.0);
        assert_eq!(w.pdf(-1.0), 0.0);
        let h = 1e-6;
        for x in [0.3, 1.0, 2.5] {
            assert!(((r.cdf(x + h) - r.cdf(x - h)) / (2.0 * h) - r.pdf(x)).abs() < 1e-6);
            assert!(((w.cdf(x + h) - w.cdf(x - h)) / (2.0 * h) - w.pdf(x)).abs() < 1e-6);
        }
    }
}
