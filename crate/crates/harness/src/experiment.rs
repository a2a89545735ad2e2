//! Monte Carlo sweeps: for every sweep value and trial, draw a sampling set and
//! noise, reconstruct with each method and record the NMSE.

use std::collections::HashMap;
use std::sync::Arc;

use cgsp_core::datagen::io::load_signal_csv;
use cgsp_core::datagen::{chirp_target, gen_bandlimited_signal, gen_features, gen_graph, io::preprocess, random_coefficients};
use cgsp_core::graph::{Graph, GraphSpectrum};
use cgsp_core::kernels::{kernel_matrix, KernelMatrix};
use cgsp_core::metrics::FeatureVector;
use cgsp_core::mkl::{mkl_fit, KernelDictionary, MklConfig};
use cgsp_core::reconstruct::{bandlimited_ridge, krr, nmse, sample, SamplingPlan};
use cgsp_core::CVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, KernelChoice, MethodKind, ResolvedConfig, SignalSource, SweepAxis};
use crate::error::{HarnessError, Result};

/// Aggregated NMSE of one method at one sweep value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub sweep_value: f64,
    pub method: String,
    /// Mean over successful trials; NaN when every trial failed.
    pub mean_nmse: f64,
    /// Sample standard deviation over successful trials.
    pub std_nmse: f64,
    pub trials: usize,
    pub failures: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub axis: SweepAxis,
    /// Method labels in configuration order.
    pub methods: Vec<String>,
    /// Sweep-major, then method order.
    pub rows: Vec<ResultRow>,
    /// One line per failed trial, in deterministic order.
    pub failure_log: Vec<String>,
}

impl ResultTable {
    pub fn row(&self, sweep_value: f64, method: &str) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.sweep_value == sweep_value && r.method == method)
    }

    /// Mean NMSE of `method` at every sweep value, in sweep order.
    pub fn curve(&self, method: &str) -> Vec<f64> {
        self.rows.iter().filter(|r| r.method == method).map(|r| r.mean_nmse).collect()
    }

    pub fn total_failures(&self) -> usize {
        self.rows.iter().map(|r| r.failures).sum()
    }
}

/// 64-bit seed from SHA-256 of the master seed and a path of indices.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    for p in path {
        h.update(p.to_le_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

const TRIAL_TAG: u64 = 0;
const SIGNAL_TAG: u64 = 1;

/// Seed of the sampling set and noise of one trial. Every method in the trial
/// sees the same draw.
pub fn trial_seed(master: u64, sweep_index: usize, trial: usize) -> u64 {
    derive_seed(master, &[TRIAL_TAG, sweep_index as u64, trial as u64])
}

/// Seed of the random signal coefficients of one trial, shared across the sweep.
pub fn signal_seed(master: u64, trial: usize) -> u64 {
    derive_seed(master, &[SIGNAL_TAG, trial as u64])
}

/// Features, graph and spectral decompositions shared by every kernel.
struct Workspace {
    features: Vec<FeatureVector>,
    base: Option<Arc<GraphSpectrum>>,
    default_order: f64,
    spectra: HashMap<u64, Arc<GraphSpectrum>>,
    kernels: HashMap<String, Arc<KernelMatrix>>,
}

impl Workspace {
    fn new(r: &ResolvedConfig) -> Result<Self> {
        let features = gen_features(&r.generator)?;
        let base = if r.needs_graph {
            let graph: Graph = gen_graph(&r.generator, &r.weighting, r.sparsify)?;
            Some(Arc::new(GraphSpectrum::new(&graph, r.order, r.normalized)?))
        } else {
            None
        };
        Ok(Self { features, base, default_order: r.order, spectra: HashMap::new(), kernels: HashMap::new() })
    }

    fn n(&self) -> usize {
        self.features.len()
    }

    fn spectrum(&mut self, order: f64) -> Result<Arc<GraphSpectrum>> {
        let base = self.base.as_ref().expect("graph is built whenever a spectral object is requested");
        if order == self.default_order {
            return Ok(base.clone());
        }
        if let Some(s) = self.spectra.get(&order.to_bits()) {
            return Ok(s.clone());
        }
        let s = Arc::new(base.with_order(order)?);
        self.spectra.insert(order.to_bits(), s.clone());
        Ok(s)
    }

    /// Kernel matrix for `choice`; `order` replaces the default spectral order.
    fn kernel(&mut self, choice: &KernelChoice, order: Option<f64>) -> Result<Arc<KernelMatrix>> {
        let key = format!("{choice}|{order:?}");
        if let Some(k) = self.kernels.get(&key) {
            return Ok(k.clone());
        }
        let k = match choice {
            KernelChoice::Feature(spec) => kernel_matrix(spec, &self.features)?,
            KernelChoice::Spectral(spec) => {
                let a = order.or(spec.order()).unwrap_or(self.default_order);
                let s = self.spectrum(a)?;
                spec.build(&s)?.kernel
            }
        };
        let k = Arc::new(k.with_label(choice.to_string()));
        self.kernels.insert(key, k.clone());
        Ok(k)
    }
}

enum Prepared {
    Krr { kernel: Arc<KernelMatrix>, gamma: f64 },
    Gbk { spectrum: Arc<GraphSpectrum>, band: Vec<usize>, mu: f64, gamma: f64 },
    Mkl { dict: Arc<KernelDictionary>, cfg: MklConfig },
}

impl Prepared {
    fn reconstruct(&self, plan: &SamplingPlan, y: &cgsp_core::reconstruct::Observation) -> cgsp_core::Result<CVector> {
        match self {
            Prepared::Krr { kernel, gamma } => Ok(krr(kernel, plan, y, *gamma)?.f),
            Prepared::Gbk { spectrum, band, mu, gamma } => bandlimited_ridge(spectrum, band, *mu, *gamma, plan, y),
            Prepared::Mkl { dict, cfg } => Ok(mkl_fit(dict, plan, y, cfg)?.f_opt),
        }
    }
}

fn prepare(ws: &mut Workspace, kind: &MethodKind, axis: SweepAxis, value: f64) -> Result<Prepared> {
    let order = (axis == SweepAxis::FractionalOrders).then_some(value);
    let adjust = |k: &KernelChoice| if axis == SweepAxis::Sigmas { k.with_sigma(value) } else { k.clone() };
    Ok(match kind {
        MethodKind::Krr { kernel, gamma } => Prepared::Krr { kernel: ws.kernel(&adjust(kernel), order)?, gamma: *gamma },
        MethodKind::Gbk { bandwidth, mu, gamma } => {
            let spectrum = ws.spectrum(order.unwrap_or(ws.default_order))?;
            let band: Vec<usize> = (0..bandwidth.resolve(ws.n())).collect();
            Prepared::Gbk { spectrum, band, mu: *mu, gamma: *gamma }
        }
        MethodKind::Mkl { kernels, cfg, equalize_traces } => {
            let mats = kernels
                .iter()
                .map(|k| ws.kernel(&adjust(k), order).map(|m| (*m).clone()))
                .collect::<Result<Vec<_>>>()?;
            let dict = KernelDictionary::new(mats)?;
            let dict = if *equalize_traces { dict.equalize_traces()? } else { dict };
            Prepared::Mkl { dict: Arc::new(dict), cfg: cfg.clone() }
        }
    })
}

/// Ground truth of every trial.
enum Truth {
    Fixed(CVector),
    Random(Arc<KernelMatrix>),
}

impl Truth {
    fn signal(&self, master: u64, trial: usize) -> CVector {
        match self {
            Truth::Fixed(f) => f.clone(),
            Truth::Random(k) => k.matrix() * random_coefficients(k.n(), signal_seed(master, trial)),
        }
    }
}

fn build_truth(ws: &mut Workspace, src: &SignalSource) -> Result<Truth> {
    Ok(match src {
        SignalSource::Kernel(choice) => Truth::Random(ws.kernel(choice, None)?),
        SignalSource::Bandlimited(b) => {
            let s = ws.spectrum(ws.default_order)?;
            let band: Vec<usize> = (0..*b).collect();
            Truth::Fixed(gen_bandlimited_signal(&s, &band)?)
        }
        SignalSource::Chirp => Truth::Fixed(chirp_target(&ws.features)),
        SignalSource::Csv { path, preprocess: pre } => {
            let raw = load_signal_csv(path)?;
            let f = if *pre { preprocess(&raw, None)?.0 } else { raw };
            if f.len() != ws.n() {
                return Err(HarnessError::config(format!(
                    "signal file {} has {} entries but the generator has {} vertices",
                    path.display(),
                    f.len(),
                    ws.n()
                )));
            }
            Truth::Fixed(f)
        }
    })
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs every sweep value × method × trial. Per-trial failures are counted in
/// the table rather than aborting the run.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let r = cfg.resolve()?;
    let mut ws = Workspace::new(&r)?;
    let truth = build_truth(&mut ws, &r.signal)?;
    let n = ws.n();
    let labels: Vec<String> = r.methods.iter().map(|m| m.label.clone()).collect();
    let mut rows = Vec::with_capacity(r.values.len() * labels.len());
    let mut failure_log = Vec::new();

    for (si, &value) in r.values.iter().enumerate() {
        let size = match r.axis {
            SweepAxis::SampleSizes => value as usize,
            _ => r.sample_size.expect("validated"),
        };
        let prepared: Vec<std::result::Result<Prepared, String>> = r
            .methods
            .iter()
            .map(|m| prepare(&mut ws, &m.kind, r.axis, value).map_err(|e| e.to_string()))
            .collect();

        let outcomes: Vec<Vec<std::result::Result<f64, String>>> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let seed = trial_seed(cfg.seed, si, t);
                let f = truth.signal(cfg.seed, t);
                let draw = SamplingPlan::random(n, size, cfg.noise_std, seed)
                    .and_then(|plan| sample(&plan, &f).map(|y| (plan, y)));
                prepared
                    .iter()
                    .map(|p| {
                        let p = p.as_ref().map_err(|e| format!("setup: {e}"))?;
                        let (plan, y) = draw.as_ref().map_err(|e| format!("sampling: {e}"))?;
                        let f_hat = p.reconstruct(plan, y).map_err(|e| e.to_string())?;
                        let e = nmse(&f_hat, &f).map_err(|e| e.to_string())?;
                        if e.is_finite() {
                            Ok(e)
                        } else {
                            Err(format!("non-finite NMSE {e}"))
                        }
                    })
                    .collect()
            })
            .collect();

        for (mi, label) in labels.iter().enumerate() {
            let mut ok = Vec::with_capacity(cfg.trials);
            let mut failures = 0;
            for (t, per_trial) in outcomes.iter().enumerate() {
                match &per_trial[mi] {
                    Ok(e) => ok.push(*e),
                    Err(msg) => {
                        failures += 1;
                        failure_log.push(format!("{}={value} method={label} trial={t}: {msg}", r.axis));
                    }
                }
            }
            let (mean_nmse, std_nmse) = mean_std(&ok);
            rows.push(ResultRow { sweep_value: value, method: label.clone(), mean_nmse, std_nmse, trials: cfg.trials, failures });
        }
    }
    Ok(ResultTable { axis: r.axis, methods: labels, rows, failure_log })
}
