//! Experiment configuration files (TOML) and their validation.
//!
//! ```toml
//! name = "swiss-roll-bandwidth"
//! seed = 7
//! trials = 20
//! noise_std = 0.01
//! gamma = 0.01
//!
//! [generator]
//! kind = "swiss-roll"
//! n = 200
//!
//! [graph]
//! weighting = "egk:sigma=0.2"
//! sparsify = "knn:10"
//! order = 0.9
//!
//! [signal]
//! kind = "bandlimited"
//! bandwidth = 40
//!
//! [sweep]
//! axis = "sample_sizes"
//! values = [40, 80, 120, 160]
//!
//! [[methods]]
//! label = "GBK F=40"
//! estimator = "krr"
//! kernel = "gbk:F=40:mu=1e-4"
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cgsp_core::datagen::SyntheticGraphSpec;
use cgsp_core::graph::Sparsify;
use cgsp_core::kernels::KernelSpec;
use cgsp_core::mkl::MklConfig;
use cgsp_core::spectral::{Bandwidth, SpectralKernelSpec};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub noise_std: f64,
    /// Ridge weight shared by every method that does not set its own.
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Number of sampled vertices when the sweep is not over sample sizes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_size: Option<usize>,
    /// Output directory. Not echoed into result files so that outputs do not
    /// depend on where they were written.
    #[serde(default = "default_output", skip_serializing)]
    pub output: PathBuf,
    pub generator: GeneratorConfig,
    #[serde(default)]
    pub graph: GraphConfig,
    pub signal: SignalConfig,
    pub sweep: SweepConfig,
    pub methods: Vec<MethodConfig>,
}

fn default_name() -> String {
    "experiment".into()
}

fn default_trials() -> usize {
    20
}

fn default_gamma() -> f64 {
    0.01
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

/// A synthetic generator. Unused fields must be left out.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    /// `two-moons`, `swiss-roll`, `community`, `chirp3d` or `line1d`.
    pub kind: String,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub communities: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_in: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_out: Option<f64>,
    /// Feature dimension of `line1d`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    /// Generator seed; the experiment seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl GeneratorConfig {
    pub fn to_spec(&self, default_seed: u64) -> Result<SyntheticGraphSpec> {
        let seed = self.seed.unwrap_or(default_seed);
        let n = self.n;
        let allowed: &[&str] = match self.kind.as_str() {
            "two-moons" => &["noise", "offset", "seed"],
            "swiss-roll" => &["noise", "height", "seed"],
            "community" => &["communities", "p_in", "p_out", "seed"],
            "chirp3d" => &[],
            "line1d" => &["d", "scale"],
            other => return Err(HarnessError::config(format!("unknown generator {other:?}"))),
        };
        let set = [
            ("noise", self.noise.is_some()),
            ("offset", self.offset.is_some()),
            ("height", self.height.is_some()),
            ("communities", self.communities.is_some()),
            ("p_in", self.p_in.is_some()),
            ("p_out", self.p_out.is_some()),
            ("d", self.d.is_some()),
            ("scale", self.scale.is_some()),
            ("seed", self.seed.is_some()),
        ];
        if let Some((field, _)) = set.iter().find(|(f, on)| *on && !allowed.contains(f)) {
            return Err(HarnessError::config(format!("generator {} does not take {field}", self.kind)));
        }
        let spec = match self.kind.as_str() {
            "two-moons" => SyntheticGraphSpec::TwoMoons {
                n,
                noise: self.noise.unwrap_or(SyntheticGraphSpec::DEFAULT_MOON_NOISE),
                offset: self.offset.unwrap_or(SyntheticGraphSpec::DEFAULT_MOON_OFFSET),
                seed,
            },
            "swiss-roll" => SyntheticGraphSpec::SwissRoll {
                n,
                height: self.height.unwrap_or(SyntheticGraphSpec::DEFAULT_ROLL_HEIGHT),
                noise: self.noise.unwrap_or(0.0),
                seed,
            },
            "community" => SyntheticGraphSpec::Community {
                n,
                communities: self.communities.unwrap_or(2),
                p_in: self.p_in.unwrap_or(SyntheticGraphSpec::DEFAULT_P_IN),
                p_out: self.p_out.unwrap_or(SyntheticGraphSpec::DEFAULT_P_OUT),
                seed,
            },
            "chirp3d" => SyntheticGraphSpec::Chirp3D { n },
            _ => SyntheticGraphSpec::Line1D { n, d: self.d.unwrap_or(2), scale: self.scale.unwrap_or(1.0) },
        };
        spec.validate().map_err(|e| HarnessError::config(format!("generator: {e}")))?;
        Ok(spec)
    }
}

/// `"swiss-roll:n=200:height=10"`.
impl FromStr for GeneratorConfig {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let kind = parts.next().unwrap_or_default().trim().to_ascii_lowercase();
        let mut g = GeneratorConfig { kind, ..Default::default() };
        let mut have_n = false;
        for tok in parts {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| HarnessError::config(format!("expected key=value in generator, found {tok:?}")))?;
            let v = v.trim();
            let bad = || HarnessError::config(format!("generator parameter {k}={v} is not a number"));
            let f = || v.parse::<f64>().map_err(|_| bad());
            let u = || v.parse::<usize>().map_err(|_| bad());
            match k.trim() {
                "n" => {
                    g.n = u()?;
                    have_n = true;
                }
                "noise" => g.noise = Some(f()?),
                "offset" => g.offset = Some(f()?),
                "height" => g.height = Some(f()?),
                "communities" => g.communities = Some(u()?),
                "p_in" => g.p_in = Some(f()?),
                "p_out" => g.p_out = Some(f()?),
                "d" => g.d = Some(u()?),
                "scale" => g.scale = Some(f()?),
                "seed" => g.seed = Some(v.parse().map_err(|_| bad())?),
                other => return Err(HarnessError::config(format!("unknown generator parameter {other:?}"))),
            }
        }
        if !have_n {
            return Err(HarnessError::config(format!("generator {s:?} needs n=<vertices>")));
        }
        Ok(g)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    /// Real-valued kernel used as edge weight between features.
    #[serde(default = "default_weighting")]
    pub weighting: String,
    /// `dense` or `knn:<k>`.
    #[serde(default = "default_sparsify")]
    pub sparsify: String,
    /// Fractional order `a` of the Laplacian spectrum.
    #[serde(default = "default_order")]
    pub order: f64,
    #[serde(default)]
    pub normalized: bool,
}

fn default_weighting() -> String {
    "egk:sigma=0.5".into()
}

fn default_sparsify() -> String {
    "knn:10".into()
}

fn default_order() -> f64 {
    1.0
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self { weighting: default_weighting(), sparsify: default_sparsify(), order: default_order(), normalized: false }
    }
}

pub fn parse_sparsify(s: &str) -> Result<Sparsify> {
    let s = s.trim().to_ascii_lowercase();
    if s == "dense" {
        return Ok(Sparsify::Dense);
    }
    match s.strip_prefix("knn:").map(str::parse::<usize>) {
        Some(Ok(k)) if k > 0 => Ok(Sparsify::Knn(k)),
        _ => Err(HarnessError::config(format!("sparsify must be \"dense\" or \"knn:<k>\", got {s:?}"))),
    }
}

/// Ground-truth signal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalConfig {
    /// `kernel` (f = Kα with fresh α per trial), `bandlimited`, `chirp` or `csv`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub preprocess: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    SampleSizes,
    FractionalOrders,
    Sigmas,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::SampleSizes => "sample_sizes",
            SweepAxis::FractionalOrders => "fractional_orders",
            SweepAxis::Sigmas => "sigmas",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    /// Kernel ridge regression with one kernel.
    Krr,
    /// Bandlimited ridge regression in the leading spectral components.
    Gbk,
    /// Multi-kernel learning over a kernel list.
    Mkl,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MklParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_steps: Option<usize>,
    /// Rescale the kernels to a common trace before fitting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equalize_traces: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub estimator: Estimator,
    /// Kernel string for `krr`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<String>,
    /// Kernel strings for `mkl`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub kernels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// `gbk` passband size, a count or `N`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mkl: Option<MklParams>,
}

/// A feature-space kernel or a spectral graph kernel.
#[derive(Clone, Debug, PartialEq)]
pub enum KernelChoice {
    Feature(KernelSpec),
    Spectral(SpectralKernelSpec),
}

impl KernelChoice {
    pub fn is_spectral(&self) -> bool {
        matches!(self, KernelChoice::Spectral(_))
    }

    /// Replaces the width of Gaussian and Laplacian feature kernels.
    pub fn with_sigma(&self, sigma: f64) -> KernelChoice {
        match self {
            KernelChoice::Feature(spec) => KernelChoice::Feature(match *spec {
                KernelSpec::Egk { .. } => KernelSpec::Egk { sigma },
                KernelSpec::Elk { .. } => KernelSpec::Elk { sigma },
                KernelSpec::Hgk { metric, .. } => KernelSpec::Hgk { sigma, metric },
                KernelSpec::Hlk { metric, .. } => KernelSpec::Hlk { sigma, metric },
                ref other => other.clone(),
            }),
            other => other.clone(),
        }
    }

    pub fn has_sigma(&self) -> bool {
        matches!(
            self,
            KernelChoice::Feature(
                KernelSpec::Egk { .. } | KernelSpec::Elk { .. } | KernelSpec::Hgk { .. } | KernelSpec::Hlk { .. }
            )
        )
    }
}

impl FromStr for KernelChoice {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        let family = s.trim().split(':').next().unwrap_or_default().to_ascii_lowercase();
        let parsed = if family == "glk" || family == "gbk" {
            s.parse().map(KernelChoice::Spectral)
        } else {
            s.parse().map(KernelChoice::Feature)
        };
        parsed.map_err(|e| HarnessError::config(format!("kernel {s:?}: {e}")))
    }
}

impl fmt::Display for KernelChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelChoice::Feature(k) => write!(f, "{k}"),
            KernelChoice::Spectral(k) => write!(f, "{k}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SignalSource {
    Kernel(KernelChoice),
    Bandlimited(usize),
    Chirp,
    Csv { path: PathBuf, preprocess: bool },
}

#[derive(Clone, Debug, PartialEq)]
pub enum MethodKind {
    Krr { kernel: KernelChoice, gamma: f64 },
    Gbk { bandwidth: Bandwidth, mu: f64, gamma: f64 },
    Mkl { kernels: Vec<KernelChoice>, cfg: MklConfig, equalize_traces: bool },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedMethod {
    pub label: String,
    pub kind: MethodKind,
}

impl ResolvedMethod {
    pub fn uses_graph(&self) -> bool {
        match &self.kind {
            MethodKind::Krr { kernel, .. } => kernel.is_spectral(),
            MethodKind::Gbk { .. } => true,
            MethodKind::Mkl { kernels, .. } => kernels.iter().any(KernelChoice::is_spectral),
        }
    }
}

/// A configuration with every string parsed and every cross-field rule checked.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedConfig {
    pub generator: SyntheticGraphSpec,
    pub weighting: KernelSpec,
    pub sparsify: Sparsify,
    pub order: f64,
    pub normalized: bool,
    pub signal: SignalSource,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub sample_size: Option<usize>,
    pub methods: Vec<ResolvedMethod>,
    pub needs_graph: bool,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HarnessError::config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| HarnessError::io(path.as_ref(), e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }

    pub fn apply_overrides(&mut self, seed: Option<u64>, trials: Option<usize>, out_dir: Option<PathBuf>) {
        if let Some(s) = seed {
            self.seed = s;
        }
        if let Some(t) = trials {
            self.trials = t;
        }
        if let Some(o) = out_dir {
            self.output = o;
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.resolve().map(|_| ())
    }

    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return bad(format!("noise_std must be non-negative, got {}", self.noise_std));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be non-negative, got {}", self.gamma));
        }
        if self.methods.is_empty() {
            return bad("at least one method is required".into());
        }
        let generator = self.generator.to_spec(self.seed)?;
        let n = generator.n();

        let values = self.sweep.values.clone();
        if values.is_empty() {
            return bad("sweep values must not be empty".into());
        }
        if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| w[0] >= w[1]) {
            return bad("sweep values must be finite and strictly increasing".into());
        }
        match self.sweep.axis {
            SweepAxis::SampleSizes => {
                if let Some(v) = values.iter().find(|v| v.fract() != 0.0 || **v < 1.0 || **v > n as f64) {
                    return bad(format!("sample size {v} must be an integer in 1..={n}"));
                }
            }
            SweepAxis::Sigmas => {
                if values.iter().any(|v| *v <= 0.0) {
                    return bad("sigma values must be positive".into());
                }
            }
            SweepAxis::FractionalOrders => {}
        }
        if self.sweep.axis != SweepAxis::SampleSizes {
            match self.sample_size {
                Some(m) if (1..=n).contains(&m) => {}
                Some(m) => return bad(format!("sample_size {m} must lie in 1..={n}")),
                None => return bad(format!("sample_size is required when sweeping {}", self.sweep.axis)),
            }
        }

        let weighting: KernelSpec =
            self.graph.weighting.parse().map_err(|e| HarnessError::config(format!("graph weighting: {e}")))?;
        let sparsify = parse_sparsify(&self.graph.sparsify)?;
        if !self.graph.order.is_finite() {
            return bad("graph order must be finite".into());
        }

        let signal = match self.signal.kind.as_str() {
            "kernel" => {
                let k = self.signal.kernel.as_deref().ok_or_else(|| HarnessError::config("signal kind kernel needs kernel"))?;
                SignalSource::Kernel(k.parse()?)
            }
            "bandlimited" => match self.signal.bandwidth {
                Some(b) if (1..=n).contains(&b) => SignalSource::Bandlimited(b),
                other => return bad(format!("bandlimited signal needs bandwidth in 1..={n}, got {other:?}")),
            },
            "chirp" => {
                if !matches!(generator, SyntheticGraphSpec::Chirp3D { .. }) {
                    return bad("chirp signal requires the chirp3d generator".into());
                }
                SignalSource::Chirp
            }
            "csv" => {
                let path = self.signal.path.clone().ok_or_else(|| HarnessError::config("csv signal needs path"))?;
                SignalSource::Csv { path, preprocess: self.signal.preprocess }
            }
            other => return bad(format!("unknown signal kind {other:?}")),
        };

        let mut methods: Vec<ResolvedMethod> = Vec::with_capacity(self.methods.len());
        for (i, m) in self.methods.iter().enumerate() {
            let gamma = m.gamma.unwrap_or(self.gamma);
            if !(gamma >= 0.0 && gamma.is_finite()) {
                return bad(format!("method {i}: gamma must be non-negative"));
            }
            let (kind, default_label) = match m.estimator {
                Estimator::Krr => {
                    let k = m.kernel.as_deref().ok_or_else(|| HarnessError::config(format!("method {i}: krr needs kernel")))?;
                    (MethodKind::Krr { kernel: k.parse()?, gamma }, format!("krr {k}"))
                }
                Estimator::Gbk => {
                    let b = m
                        .bandwidth
                        .as_deref()
                        .ok_or_else(|| HarnessError::config(format!("method {i}: gbk needs bandwidth")))?;
                    let bandwidth: Bandwidth = b.parse().map_err(|e| HarnessError::config(format!("method {i}: {e}")))?;
                    if bandwidth == Bandwidth::Count(0) {
                        return bad(format!("method {i}: bandwidth must be positive"));
                    }
                    let mu = m.mu.unwrap_or(SpectralKernelSpec::DEFAULT_MU);
                    if !(mu > 0.0 && mu.is_finite()) {
                        return bad(format!("method {i}: mu must be positive"));
                    }
                    (MethodKind::Gbk { bandwidth, mu, gamma }, format!("gbk F={bandwidth}"))
                }
                Estimator::Mkl => {
                    if m.kernels.is_empty() {
                        return bad(format!("method {i}: mkl needs a non-empty kernels list"));
                    }
                    let kernels = m.kernels.iter().map(|k| k.parse()).collect::<Result<Vec<KernelChoice>>>()?;
                    let p = m.mkl.clone().unwrap_or_default();
                    let d = MklConfig::default();
                    let cfg = MklConfig {
                        gamma,
                        nu: p.nu.unwrap_or(d.nu),
                        eta: p.eta.unwrap_or(d.eta),
                        eps: p.eps.unwrap_or(d.eps),
                        radius: p.radius.unwrap_or(d.radius),
                        omega0: p.omega0.clone(),
                        max_iters: p.max_iters.unwrap_or(d.max_iters),
                        omega_steps: p.omega_steps.unwrap_or(d.omega_steps),
                    };
                    cfg.validate(kernels.len()).map_err(|e| HarnessError::config(format!("method {i}: {e}")))?;
                    (MethodKind::Mkl { kernels, cfg, equalize_traces: p.equalize_traces.unwrap_or(false) }, format!("mkl[{}]", m.kernels.join(",")))
                }
            };
            if m.estimator != Estimator::Krr && m.kernel.is_some() {
                return bad(format!("method {i}: kernel applies to krr only; use kernels for mkl"));
            }
            if m.estimator != Estimator::Mkl && (!m.kernels.is_empty() || m.mkl.is_some()) {
                return bad(format!("method {i}: kernels and mkl apply to mkl only"));
            }
            let label = m.label.clone().unwrap_or(default_label);
            if methods.iter().any(|r| r.label == label) {
                return bad(format!("duplicate method label {label:?}"));
            }
            methods.push(ResolvedMethod { label, kind });
        }

        if self.sweep.axis == SweepAxis::Sigmas {
            let any = methods.iter().any(|m| match &m.kind {
                MethodKind::Krr { kernel, .. } => kernel.has_sigma(),
                MethodKind::Mkl { kernels, .. } => kernels.iter().any(KernelChoice::has_sigma),
                MethodKind::Gbk { .. } => false,
            });
            if !any {
                return bad("sweeping sigmas needs at least one Gaussian or Laplacian feature kernel".into());
            }
        }

        let needs_graph = methods.iter().any(ResolvedMethod::uses_graph)
            || matches!(signal, SignalSource::Bandlimited(_))
            || matches!(&signal, SignalSource::Kernel(k) if k.is_spectral());
        let community = matches!(generator, SyntheticGraphSpec::Community { .. });
        if needs_graph && !community && !weighting.is_real_valued() {
            return bad(format!("graph weighting {weighting} is complex-valued; use egk or elk"));
        }

        Ok(ResolvedConfig {
            generator,
            weighting,
            sparsify,
            order: self.graph.order,
            normalized: self.graph.normalized,
            signal,
            axis: self.sweep.axis,
            values,
            sample_size: self.sample_size,
            methods,
            needs_graph,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 1
trials = 2
[generator]
kind = "swiss-roll"
n = 30
[signal]
kind = "bandlimited"
bandwidth = 5
[sweep]
axis = "sample_sizes"
values = [10, 20]
[[methods]]
estimator = "krr"
kernel = "gbk:F=5"
"#;

    #[test]
    fn minimal_config_resolves() {
        let cfg = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        let r = cfg.resolve().unwrap();
        assert!(r.needs_graph);
        assert_eq!(r.methods[0].label, "krr gbk:F=5");
        assert_eq!(cfg.gamma, 0.01);
    }

    #[test]
    fn rejects_bad_configs() {
        let edit = |from: &str, to: &str| ExperimentConfig::from_toml_str(&MINIMAL.replace(from, to));
        assert!(edit("trials = 2", "trials = 0").unwrap().validate().is_err());
        assert!(edit("values = [10, 20]", "values = [20, 10]").unwrap().validate().is_err());
        assert!(edit("values = [10, 20]", "values = []").unwrap().validate().is_err());
        assert!(edit("values = [10, 20]", "values = [10, 31]").unwrap().validate().is_err());
        assert!(edit("kernel = \"gbk:F=5\"", "kernel = \"zzz:F=5\"").unwrap().validate().is_err());
        assert!(edit("kind = \"swiss-roll\"", "kind = \"swiss-roll\"\nheight2 = 3").is_err());
        assert!(edit("n = 30", "n = 30\np_in = 0.3").unwrap().validate().is_err());
        let no_methods = "methods = []\n".to_string() + MINIMAL.split("[[methods]]").next().unwrap();
        let err = ExperimentConfig::from_toml_str(&no_methods).unwrap().validate().unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn generator_strings() {
        let g: GeneratorConfig = "two-moons:n=50:noise=0.1:seed=4".parse().unwrap();
        assert_eq!(
            g.to_spec(0).unwrap(),
            SyntheticGraphSpec::TwoMoons { n: 50, noise: 0.1, offset: 0.5, seed: 4 }
        );
        assert!("two-moons:noise=0.1".parse::<GeneratorConfig>().is_err());
        assert!("line1d:n=5:height=2".parse::<GeneratorConfig>().unwrap().to_spec(0).is_err());
    }

    #[test]
    fn kernel_choice_dispatch() {
        assert!("gbk:F=40:mu=1e-4".parse::<KernelChoice>().unwrap().is_spectral());
        let k: KernelChoice = "hgk:sigma=0.5:metric=kahler".parse().unwrap();
        assert!(!k.is_spectral() && k.has_sigma());
        assert_eq!(k.with_sigma(2.0).to_string(), "hgk:sigma=2:metric=kahler");
        assert_eq!(parse_sparsify("knn:4").unwrap(), Sparsify::Knn(4));
        assert!(parse_sparsify("knn:0").is_err());
    }

    #[test]
    fn toml_round_trip_drops_output_only() {
        let mut cfg = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        cfg.output = PathBuf::from("elsewhere");
        let back = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back.output, default_output());
        assert_eq!(ExperimentConfig { output: default_output(), ..cfg }, back);
    }
}
