//! Sparse multi-kernel learning with an ℓ1-ball constraint on the kernel weights.
//!
//! For a dictionary `K_1..K_L` the combined kernel is `K(ω) = Σ ω_ℓ K_ℓ`. The fit
//! alternates between
//!
//! * an ω-step minimizing
//!   `J(ω, β) = (1/|S|)‖y_S − K_S(ω)β‖² + γ β^H K_S(ω) β + ν‖ω‖₁`
//!   over `{ω ≥ 0, ‖ω − ω₀‖₁ ≤ R}` for fixed `β` by proximal projected gradient, and
//! * a β-step `β ← η β + (1−η)(K_S(ω) + γ|S| I)^{-1} y_S`.
//!
//! For PSD kernels the β-step target is the exact minimizer of `J` in `β`, so both
//! steps are non-increasing in `J`.

use crate::error::{Error, Result};
use crate::kernels::KernelMatrix;
use crate::linalg::{c, principal_submatrix, select_columns, CMatrix, CVector};
use crate::reconstruct::{solve_shifted, Observation, SamplingPlan};

/// Kernels over the same vertex set.
#[derive(Clone, Debug)]
pub struct KernelDictionary {
    kernels: Vec<KernelMatrix>,
}

impl KernelDictionary {
    pub fn new(kernels: Vec<KernelMatrix>) -> Result<Self> {
        let first = kernels.first().ok_or_else(|| Error::InvalidParameter("kernel dictionary is empty".into()))?;
        let n = first.n();
        if let Some(bad) = kernels.iter().find(|k| k.n() != n) {
            return Err(Error::DimensionMismatch { expected: n, actual: bad.n() });
        }
        Ok(Self { kernels })
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }

    pub fn n(&self) -> usize {
        self.kernels[0].n()
    }

    pub fn kernels(&self) -> &[KernelMatrix] {
        &self.kernels
    }

    pub fn labels(&self) -> Vec<&str> {
        self.kernels.iter().map(|k| k.label()).collect()
    }

    /// Rescales every kernel so that all traces equal the mean trace.
    pub fn equalize_traces(self) -> Result<Self> {
        let traces: Vec<f64> = self.kernels.iter().map(|k| k.trace()).collect();
        if let Some(bad) = traces.iter().position(|t| !t.is_finite() || *t <= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "kernel {bad} has trace {}; cannot equalize",
                traces[bad]
            )));
        }
        let mean = traces.iter().sum::<f64>() / traces.len() as f64;
        let kernels = self
            .kernels
            .into_iter()
            .zip(&traces)
            .map(|(k, t)| {
                let label = k.label().to_string();
                KernelMatrix::new(k.into_matrix() * c(mean / t, 0.0), label)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { kernels })
    }
}

fn check_weights(omega: &[f64], len: usize) -> Result<()> {
    if omega.len() != len {
        return Err(Error::DimensionMismatch { expected: len, actual: omega.len() });
    }
    if let Some((index, &value)) = omega.iter().enumerate().find(|(_, w)| !(**w >= 0.0)) {
        return Err(Error::NegativeWeight { index, value });
    }
    Ok(())
}

fn weighted_sum(mats: &[CMatrix], omega: &[f64]) -> CMatrix {
    let (r, cols) = mats[0].shape();
    let mut out = CMatrix::zeros(r, cols);
    for (m, &w) in mats.iter().zip(omega) {
        if w != 0.0 {
            out += m * c(w, 0.0);
        }
    }
    out
}

/// `K(ω) = Σ ω_ℓ K_ℓ`.
pub fn combine(dict: &KernelDictionary, omega: &[f64]) -> Result<KernelMatrix> {
    check_weights(omega, dict.len())?;
    let mut out = CMatrix::zeros(dict.n(), dict.n());
    for (k, &w) in dict.kernels.iter().zip(omega) {
        if w != 0.0 {
            out += k.matrix() * c(w, 0.0);
        }
    }
    let label = format!("mkl[{}]", dict.labels().join(","));
    Ok(KernelMatrix::new_unchecked(out, label))
}

/// Euclidean projection onto `{ω ≥ 0, ‖ω − ω₀‖₁ ≤ R}`. Requires `ω₀ ≥ 0`.
///
/// The solution is `ω_i = max(0, ω₀_i + soft(v_i − ω₀_i, τ))` where `τ ≥ 0` is the
/// smallest level that puts the point inside the ball. Each coordinate's distance
/// `min(cap_i, (|d_i| − τ)₊)` is piecewise linear in `τ`, so `τ` is found exactly
/// between consecutive breakpoints.
pub fn project_l1_ball_nonneg(omega: &[f64], omega0: &[f64], radius: f64) -> Result<Vec<f64>> {
    if omega.len() != omega0.len() {
        return Err(Error::DimensionMismatch { expected: omega0.len(), actual: omega.len() });
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    check_weights(omega0, omega0.len())?;
    if omega.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("weights to project"));
    }
    let d: Vec<f64> = omega.iter().zip(omega0).map(|(v, c0)| v - c0).collect();
    // Negative moves stop at zero, so they can cover at most the distance to the origin.
    let cap: Vec<f64> = d.iter().zip(omega0).map(|(&di, &c0)| if di < 0.0 { c0 } else { f64::INFINITY }).collect();
    let dist_at = |tau: f64| -> f64 { d.iter().zip(&cap).map(|(di, ci)| (di.abs() - tau).max(0.0).min(*ci)).sum() };
    let point_at = |tau: f64| -> Vec<f64> {
        d.iter().zip(omega0).map(|(&di, &c0)| (c0 + di.signum() * (di.abs() - tau).max(0.0)).max(0.0)).collect()
    };
    if dist_at(0.0) <= radius {
        return Ok(point_at(0.0));
    }
    let mut knots: Vec<f64> = vec![0.0];
    for (di, ci) in d.iter().zip(&cap) {
        knots.push(di.abs());
        if ci.is_finite() && di.abs() > *ci {
            knots.push(di.abs() - ci);
        }
    }
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut lo = (0.0, dist_at(0.0));
    for &t in &knots[1..] {
        let g = dist_at(t);
        if g <= radius {
            let tau = lo.0 + (lo.1 - radius) * (t - lo.0) / (lo.1 - g);
            return Ok(point_at(tau));
        }
        lo = (t, g);
    }
    // The distance is zero at the last knot, so the loop always returns.
    unreachable!("l1-ball projection: distance never fell below the radius")
}

/// Hyperparameters of [`mkl_fit`].
#[derive(Clone, Debug, PartialEq)]
pub struct MklConfig {
    /// Ridge weight; the β-step uses `γ|S|`.
    pub gamma: f64,
    /// ℓ1 weight on ω.
    pub nu: f64,
    /// β mixing parameter in `[0, 1)`.
    pub eta: f64,
    /// Stop once `‖β_{k+1} − β_k‖ < eps`.
    pub eps: f64,
    pub radius: f64,
    /// Ball center and initial weights; `None` means `1/L` each.
    pub omega0: Option<Vec<f64>>,
    pub max_iters: usize,
    /// Proximal-gradient iterations per ω-step.
    pub omega_steps: usize,
}

impl Default for MklConfig {
    fn default() -> Self {
        Self {
            gamma: 0.01,
            nu: 1e-3,
            eta: 0.5,
            eps: 1e-6,
            radius: 1.0,
            omega0: None,
            max_iters: 200,
            omega_steps: 50,
        }
    }
}

impl MklConfig {
    pub fn validate(&self, l: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be positive, got {}", self.gamma));
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return bad(format!("nu must be non-negative, got {}", self.nu));
        }
        if !(0.0..1.0).contains(&self.eta) {
            return bad(format!("eta must lie in [0, 1), got {}", self.eta));
        }
        if !(self.eps > 0.0) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad(format!("radius must be positive, got {}", self.radius));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        if let Some(w0) = &self.omega0 {
            check_weights(w0, l)?;
        }
        Ok(())
    }

    pub fn omega0(&self, l: usize) -> Vec<f64> {
        self.omega0.clone().unwrap_or_else(|| vec![1.0 / l as f64; l])
    }
}

/// Output of [`mkl_fit`].
#[derive(Clone, Debug)]
pub struct MklResult {
    pub omega: Vec<f64>,
    /// Coefficients on the sampled vertices.
    pub beta: CVector,
    /// `K(ω)[:, S] β` over all vertices.
    pub f_opt: CVector,
    /// `K_S(ω) β` on the sampled vertices.
    pub fitted: CVector,
    pub iterations: usize,
    pub converged: bool,
    /// `J(ω, β)` after initialization and after every ω- and β-step.
    pub objective_trace: Vec<f64>,
}

/// The fit restricted to sampled vertices.
struct Sampled<'a> {
    ks: Vec<CMatrix>,
    y: &'a CVector,
    gamma: f64,
    nu: f64,
}

impl Sampled<'_> {
    fn m(&self) -> f64 {
        self.y.len() as f64
    }

    fn kernel(&self, omega: &[f64]) -> CMatrix {
        weighted_sum(&self.ks, omega)
    }

    fn objective(&self, omega: &[f64], beta: &CVector) -> f64 {
        let kb = self.kernel(omega) * beta;
        let fit = (self.y - &kb).norm_squared() / self.m();
        fit + self.gamma * beta.dotc(&kb).re + self.nu * omega.iter().map(|w| w.abs()).sum::<f64>()
    }

    fn beta_target(&self, omega: &[f64]) -> Result<CVector> {
        solve_shifted(&self.kernel(omega), self.gamma * self.m(), self.y)
    }
}

/// Smooth part of `J` in ω for fixed β: `(1/m)‖y − Aω‖² + γ cᵀω` with `A = [K_ℓS β]`.
struct OmegaQuadratic {
    a: CMatrix,
    lin: Vec<f64>,
    m: f64,
}

impl OmegaQuadratic {
    fn new(p: &Sampled<'_>, beta: &CVector) -> Self {
        let cols: Vec<CVector> = p.ks.iter().map(|k| k * beta).collect();
        let lin = cols.iter().map(|a| p.gamma * beta.dotc(a).re).collect();
        Self { a: CMatrix::from_columns(&cols), lin, m: p.m() }
    }

    fn value(&self, omega: &[f64], y: &CVector) -> f64 {
        let w = CVector::from_iterator(omega.len(), omega.iter().map(|&x| c(x, 0.0)));
        (y - &self.a * w).norm_squared() / self.m + self.lin.iter().zip(omega).map(|(a, b)| a * b).sum::<f64>()
    }

    fn gradient(&self, omega: &[f64], y: &CVector) -> Vec<f64> {
        let w = CVector::from_iterator(omega.len(), omega.iter().map(|&x| c(x, 0.0)));
        let r = &self.a * w - y;
        let g = self.a.adjoint() * r;
        g.iter().zip(&self.lin).map(|(gi, l)| 2.0 * gi.re / self.m + l).collect()
    }
}

/// Proximal projected gradient with backtracking on `J(·, β)`.
fn omega_step(p: &Sampled<'_>, q: &OmegaQuadratic, omega: &[f64], cfg: &MklConfig, w0: &[f64]) -> Result<Vec<f64>> {
    let total = |w: &[f64]| q.value(w, p.y) + p.nu * w.iter().sum::<f64>();
    let mut w = omega.to_vec();
    let mut step = 1.0;
    for _ in 0..cfg.omega_steps {
        let f0 = q.value(&w, p.y);
        let g = q.gradient(&w, p.y);
        let mut accepted = None;
        for _ in 0..80 {
            let trial: Vec<f64> = w.iter().zip(&g).map(|(wi, gi)| wi - step * gi).collect();
            let trial: Vec<f64> = trial.iter().map(|x| (x - step * p.nu).max(0.0)).collect();
            let cand = project_l1_ball_nonneg(&trial, w0, cfg.radius)?;
            let diff: Vec<f64> = cand.iter().zip(&w).map(|(a, b)| a - b).collect();
            let model = f0
                + g.iter().zip(&diff).map(|(a, b)| a * b).sum::<f64>()
                + diff.iter().map(|d| d * d).sum::<f64>() / (2.0 * step);
            let fc = q.value(&cand, p.y);
            if !fc.is_finite() {
                return Err(Error::NonFinite("omega line search"));
            }
            if fc <= model + 1e-14 * f0.abs().max(1.0) && total(&cand) <= total(&w) {
                accepted = Some(cand);
                break;
            }
            step *= 0.5;
        }
        let Some(cand) = accepted else { break };
        let moved = cand.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        w = cand;
        step *= 2.0;
        if moved <= 1e-12 * (1.0 + w.iter().cloned().fold(0.0, f64::max)) {
            break;
        }
    }
    Ok(w)
}

/// Alternating ω/β optimization on the sampled vertices.
pub fn mkl_fit(dict: &KernelDictionary, plan: &SamplingPlan, y: &Observation, cfg: &MklConfig) -> Result<MklResult> {
    let l = dict.len();
    cfg.validate(l)?;
    if dict.n() != plan.n() {
        return Err(Error::DimensionMismatch { expected: plan.n(), actual: dict.n() });
    }
    if y.y.len() != plan.len() {
        return Err(Error::DimensionMismatch { expected: plan.len(), actual: y.y.len() });
    }
    if plan.is_empty() {
        return Err(Error::InvalidParameter("no sampled vertices".into()));
    }
    let idx = plan.indices();
    let problem = Sampled {
        ks: dict.kernels.iter().map(|k| principal_submatrix(k.matrix(), idx)).collect(),
        y: &y.y,
        gamma: cfg.gamma,
        nu: cfg.nu,
    };
    let w0 = cfg.omega0(l);
    let mut omega = w0.clone();
    let mut beta = problem.beta_target(&omega)?;
    let mut trace = vec![problem.objective(&omega, &beta)];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        iterations += 1;
        let q = OmegaQuadratic::new(&problem, &beta);
        omega = omega_step(&problem, &q, &omega, cfg, &w0)?;
        trace.push(problem.objective(&omega, &beta));

        let target = problem.beta_target(&omega)?;
        let next = &beta * c(cfg.eta, 0.0) + target * c(1.0 - cfg.eta, 0.0);
        let change = (&next - &beta).norm();
        beta = next;
        let j = problem.objective(&omega, &beta);
        if !j.is_finite() {
            return Err(Error::NonFinite("MKL objective"));
        }
        trace.push(j);
        if change < cfg.eps {
            converged = true;
            break;
        }
    }
    let fitted = problem.kernel(&omega) * &beta;
    let cols: Vec<CMatrix> = dict.kernels.iter().map(|k| select_columns(k.matrix(), idx)).collect();
    let f_opt = weighted_sum(&cols, &omega) * &beta;
    Ok(MklResult { omega, beta, f_opt, fitted, iterations, converged, objective_trace: trace })
}

/// `J(ω, β)` evaluated on the sampled vertices.
pub fn mkl_objective(
    dict: &KernelDictionary,
    plan: &SamplingPlan,
    y: &Observation,
    cfg: &MklConfig,
    omega: &[f64],
    beta: &CVector,
) -> Result<f64> {
    check_weights(omega, dict.len())?;
    if beta.len() != plan.len() || y.y.len() != plan.len() {
        return Err(Error::DimensionMismatch { expected: plan.len(), actual: beta.len() });
    }
    let problem = Sampled {
        ks: dict.kernels.iter().map(|k| principal_submatrix(k.matrix(), plan.indices())).collect(),
        y: &y.y,
        gamma: cfg.gamma,
        nu: cfg.nu,
    };
    Ok(problem.objective(omega, beta))
}

/// Share of the ℓ1 mass of `omega` carried by each weight.
pub fn weight_shares(omega: &[f64]) -> Vec<f64> {
    let total: f64 = omega.iter().map(|w| w.abs()).sum();
    if total == 0.0 {
        return vec![0.0; omega.len()];
    }
    omega.iter().map(|w| w.abs() / total).collect()
}
