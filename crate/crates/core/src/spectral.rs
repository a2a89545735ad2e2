//! Graph kernels defined by a map over the fractional Laplacian spectrum.
//!
//! A map assigns a penalty `r(λ_k^a)` to each spectral component and the kernel is
//! `K = U^a diag(1/r(λ_k^a)) (U^a)^H`, so that `f^H K^† f = Σ_k r(λ_k^a) |f̂_k|²`.
//! Components with `r = 0` get kernel eigenvalue `0`.
//!
//! The bandlimited map penalizes out-of-band components with `1/μ` and in-band
//! components with `μ`; for small `μ` the kernel concentrates on the band.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{index_set, GraphSpectrum};
use crate::kernels::{split_params, KernelMatrix};
use crate::linalg::{select_columns, CVector};

#[derive(Clone, Debug, PartialEq)]
pub enum SpectralMap {
    /// `r(λ) = exp(-σ² λ / 2)`.
    Diffusion { sigma2: f64 },
    /// `r(λ) = (b - λ)^{-p}`, requires `b > λ_max^a`.
    RandomWalk { b: f64, p: u32 },
    /// `r(λ) = 1 + σ² λ`.
    LaplacianReg { sigma2: f64 },
    /// `r = μ` on `band`, `1/μ` elsewhere.
    Bandlimited { band: Vec<usize>, mu: f64 },
}

impl SpectralMap {
    pub const DEFAULT_SIGMA2: f64 = 1.0;
    pub const DEFAULT_WALK_B: f64 = 2.0;
    pub const DEFAULT_WALK_P: u32 = 1;

    /// `r(λ^a)` for spectral component `index`.
    pub fn penalty(&self, index: usize, lambda_a: f64) -> f64 {
        match self {
            SpectralMap::Diffusion { sigma2 } => (-sigma2 * lambda_a / 2.0).exp(),
            SpectralMap::RandomWalk { b, p } => (b - lambda_a).powi(-(*p as i32)),
            SpectralMap::LaplacianReg { sigma2 } => 1.0 + sigma2 * lambda_a,
            SpectralMap::Bandlimited { band, mu } => {
                if band.binary_search(&index).is_ok() {
                    *mu
                } else {
                    1.0 / mu
                }
            }
        }
    }

    /// Checks parameters and the map's domain on `s`.
    pub fn validate(&self, s: &GraphSpectrum) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidMapDomain(m));
        match self {
            SpectralMap::Diffusion { sigma2 } | SpectralMap::LaplacianReg { sigma2 } if !(*sigma2 > 0.0) => {
                bad(format!("sigma2 must be positive, got {sigma2}"))
            }
            SpectralMap::RandomWalk { b, p } => {
                if *b < 2.0 || *p < 1 {
                    return bad(format!("random walk needs b >= 2 and p >= 1, got b={b}, p={p}"));
                }
                let top = s.lambda_a().iter().cloned().fold(0.0, f64::max);
                if *b <= top {
                    return bad(format!("random walk needs b > max λ^a = {top}, got b={b}"));
                }
                Ok(())
            }
            SpectralMap::Bandlimited { band, mu } => {
                if band.is_empty() {
                    return Err(Error::EmptyBandSet);
                }
                if !(*mu > 0.0 && mu.is_finite()) {
                    return bad(format!("mu must be positive, got {mu}"));
                }
                index_set(band, s.n()).map(|_| ())
            }
            _ => Ok(()),
        }
    }

    /// `r(λ_k^a)` for every component of `s`.
    pub fn penalties(&self, s: &GraphSpectrum) -> Result<Vec<f64>> {
        self.validate(s)?;
        let r: Vec<f64> = s.lambda_a().iter().enumerate().map(|(k, &l)| self.penalty(k, l)).collect();
        if let Some((k, v)) = r.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidMapDomain(format!("r(λ^a) = {v} at component {k}")));
        }
        Ok(r)
    }
}

/// Two-level map with `band` as the passband.
pub fn bandlimited_map(band: &[usize], mu: f64, n: usize) -> Result<SpectralMap> {
    if band.is_empty() {
        return Err(Error::EmptyBandSet);
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidParameter(format!("mu must be positive, got {mu}")));
    }
    Ok(SpectralMap::Bandlimited { band: index_set(band, n)?, mu })
}

/// A spectral kernel and the map that produced it.
#[derive(Clone, Debug)]
pub struct GraphKernel {
    pub kernel: KernelMatrix,
    pub map: SpectralMap,
}

/// `K = U^a diag(1/r(λ^a)) (U^a)^H`.
pub fn glk(s: &GraphSpectrum, map: &SpectralMap) -> Result<GraphKernel> {
    let r = map.penalties(s)?;
    let g: Vec<f64> = r.iter().map(|&v| if v > 0.0 { 1.0 / v } else { 0.0 }).collect();
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidMapDomain("kernel eigenvalue overflow".into()));
    }
    let k = s.synthesize(&g);
    let label = format!("{}:a={}", MapLabel(map), s.order());
    Ok(GraphKernel { kernel: KernelMatrix::new(k, label)?, map: map.clone() })
}

/// `U^a_F (U^a_F)^H f`.
pub fn bandlimit_project(s: &GraphSpectrum, band: &[usize], f: &CVector) -> Result<CVector> {
    if f.len() != s.n() {
        return Err(Error::DimensionMismatch { expected: s.n(), actual: f.len() });
    }
    let band = index_set(band, s.n())?;
    let uf = select_columns(s.ua(), &band);
    Ok(&uf * (uf.adjoint() * f))
}

struct MapLabel<'a>(&'a SpectralMap);

impl fmt::Display for MapLabel<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            SpectralMap::Diffusion { sigma2 } => write!(f, "glk:diffusion:sigma2={sigma2}"),
            SpectralMap::RandomWalk { b, p } => write!(f, "glk:random-walk:b={b}:p={p}"),
            SpectralMap::LaplacianReg { sigma2 } => write!(f, "glk:laplacian-reg:sigma2={sigma2}"),
            SpectralMap::Bandlimited { band, mu } => write!(f, "gbk:F={}:mu={mu}", band.len()),
        }
    }
}

/// Size of a bandlimited passband: the first `k` components, or all of them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bandwidth {
    Count(usize),
    All,
}

impl Bandwidth {
    pub fn resolve(&self, n: usize) -> usize {
        match *self {
            Bandwidth::Count(k) => k.min(n),
            Bandwidth::All => n,
        }
    }
}

impl fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bandwidth::Count(k) => write!(f, "{k}"),
            Bandwidth::All => write!(f, "N"),
        }
    }
}

impl FromStr for Bandwidth {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "N" | "n" | "all" => Ok(Bandwidth::All),
            other => other
                .parse::<usize>()
                .map(Bandwidth::Count)
                .map_err(|e| Error::Parse { what: "bandwidth", detail: format!("{other:?}: {e}") }),
        }
    }
}

/// A spectral kernel described independently of any particular graph,
/// as written in configuration strings such as `"glk:diffusion:sigma2=1:a=0.9"`
/// or `"gbk:F=40:mu=1e-4:a=0.7"`.
#[derive(Clone, Debug, PartialEq)]
pub enum SpectralKernelSpec {
    Diffusion { sigma2: f64, order: Option<f64> },
    RandomWalk { b: f64, p: u32, order: Option<f64> },
    LaplacianReg { sigma2: f64, order: Option<f64> },
    Bandlimited { bandwidth: Bandwidth, mu: f64, order: Option<f64> },
}

impl SpectralKernelSpec {
    pub const DEFAULT_MU: f64 = 1e-4;

    /// Fractional order override, if any.
    pub fn order(&self) -> Option<f64> {
        match *self {
            SpectralKernelSpec::Diffusion { order, .. }
            | SpectralKernelSpec::RandomWalk { order, .. }
            | SpectralKernelSpec::LaplacianReg { order, .. }
            | SpectralKernelSpec::Bandlimited { order, .. } => order,
        }
    }

    /// Concrete map for an `n`-vertex graph; the band is the first `|F|` components.
    pub fn map(&self, n: usize) -> Result<SpectralMap> {
        Ok(match *self {
            SpectralKernelSpec::Diffusion { sigma2, .. } => SpectralMap::Diffusion { sigma2 },
            SpectralKernelSpec::RandomWalk { b, p, .. } => SpectralMap::RandomWalk { b, p },
            SpectralKernelSpec::LaplacianReg { sigma2, .. } => SpectralMap::LaplacianReg { sigma2 },
            SpectralKernelSpec::Bandlimited { bandwidth, mu, .. } => {
                let band: Vec<usize> = (0..bandwidth.resolve(n)).collect();
                bandlimited_map(&band, mu, n)?
            }
        })
    }

    /// Builds the kernel on `s`, switching to this spec's order if it sets one.
    pub fn build(&self, s: &GraphSpectrum) -> Result<GraphKernel> {
        let map = self.map(s.n())?;
        match self.order() {
            Some(a) if a != s.order() => glk(&s.with_order(a)?, &map),
            _ => glk(s, &map),
        }
    }
}

impl fmt::Display for SpectralKernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectralKernelSpec::Diffusion { sigma2, .. } => write!(f, "glk:diffusion:sigma2={sigma2}")?,
            SpectralKernelSpec::RandomWalk { b, p, .. } => write!(f, "glk:random-walk:b={b}:p={p}")?,
            SpectralKernelSpec::LaplacianReg { sigma2, .. } => write!(f, "glk:laplacian-reg:sigma2={sigma2}")?,
            SpectralKernelSpec::Bandlimited { bandwidth, mu, .. } => write!(f, "gbk:F={bandwidth}:mu={mu}")?,
        }
        if let Some(a) = self.order() {
            write!(f, ":a={a}")?;
        }
        Ok(())
    }
}

impl FromStr for SpectralKernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (family, mut params) = split_params(s);
        let err = |detail: String| Error::Parse { what: "spectral kernel", detail };
        let map_name = match family.as_str() {
            "glk" => {
                if params.is_empty() || !params[0].1.is_empty() {
                    return Err(err(format!("glk needs a map name in {s:?}")));
                }
                params.remove(0).0
            }
            "gbk" => "bandlimited".to_string(),
            other => return Err(Error::UnsupportedKernel(other.to_string())),
        };
        let mut order = None;
        let mut sigma2 = SpectralMap::DEFAULT_SIGMA2;
        let mut b = SpectralMap::DEFAULT_WALK_B;
        let mut p = SpectralMap::DEFAULT_WALK_P;
        let mut mu = Self::DEFAULT_MU;
        let mut bandwidth = None;
        for (k, v) in &params {
            let num = || v.parse::<f64>().map_err(|e| err(format!("{k}={v}: {e}")));
            match k.as_str() {
                "a" => order = Some(num()?),
                "sigma2" => sigma2 = num()?,
                "b" => b = num()?,
                "p" => p = v.parse().map_err(|e| err(format!("p={v}: {e}")))?,
                "mu" => mu = num()?,
                "f" => bandwidth = Some(v.parse::<Bandwidth>()?),
                other => return Err(err(format!("unknown parameter {other:?} in {s:?}"))),
            }
        }
        let spec = match map_name.as_str() {
            "diffusion" => SpectralKernelSpec::Diffusion { sigma2, order },
            "random-walk" | "random_walk" | "randomwalk" => SpectralKernelSpec::RandomWalk { b, p, order },
            "laplacian-reg" | "laplacian_reg" | "regularized" => SpectralKernelSpec::LaplacianReg { sigma2, order },
            "bandlimited" => SpectralKernelSpec::Bandlimited {
                bandwidth: bandwidth.ok_or_else(|| err("gbk requires F".into()))?,
                mu,
                order,
            },
            other => return Err(err(format!("unknown spectral map {other:?}"))),
        };
        if sigma2 <= 0.0 || mu <= 0.0 || b < 2.0 || p < 1 {
            return Err(Error::InvalidParameter(format!("out-of-range parameter in {s:?}")));
        }
        Ok(spec)
    }
}
