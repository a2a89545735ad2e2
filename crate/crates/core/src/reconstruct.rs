//! Sampling model and closed-form reconstruction estimators.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::graph::{index_set, GraphSpectrum};
use crate::kernels::KernelMatrix;
use crate::linalg::{c, default_pinv_rtol, principal_submatrix, pseudo_inverse, select_columns, solve_general, solve_hpd};
use crate::linalg::{CMatrix, CVector};
use crate::spectral::SpectralMap;

/// Which vertices are observed and how noisy the observations are.
///
/// Row `i` of the implied sampling matrix `D` selects vertex `indices[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingPlan {
    n: usize,
    indices: Vec<usize>,
    noise_std: f64,
    seed: u64,
}

const SELECTION_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;

impl SamplingPlan {
    pub fn new(n: usize, indices: Vec<usize>, noise_std: f64, seed: u64) -> Result<Self> {
        if indices.len() > n {
            return Err(Error::InvalidParameter(format!("{} samples exceed {n} vertices", indices.len())));
        }
        let mut seen = vec![false; n];
        for &i in &indices {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, len: n });
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidParameter(format!("vertex {i} sampled twice")));
            }
        }
        if !(noise_std >= 0.0 && noise_std.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise std must be non-negative, got {noise_std}")));
        }
        Ok(Self { n, indices, noise_std, seed })
    }

    /// `size` vertices drawn uniformly without replacement.
    pub fn random(n: usize, size: usize, noise_std: f64, seed: u64) -> Result<Self> {
        if size > n {
            return Err(Error::InvalidParameter(format!("{size} samples exceed {n} vertices")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(SELECTION_STREAM);
        let indices = rand::seq::index::sample(&mut rng, n, size).into_vec();
        Self::new(n, indices, noise_std, seed)
    }

    /// Every vertex in order.
    pub fn full(n: usize, noise_std: f64, seed: u64) -> Result<Self> {
        Self::new(n, (0..n).collect(), noise_std, seed)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_std
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `D f`.
    pub fn restrict(&self, f: &CVector) -> Result<CVector> {
        self.check_signal(f)?;
        Ok(CVector::from_fn(self.len(), |i, _| f[self.indices[i]]))
    }

    /// `D^T y`.
    pub fn scatter(&self, y: &CVector) -> Result<CVector> {
        if y.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), actual: y.len() });
        }
        let mut out = CVector::zeros(self.n);
        for (i, &v) in self.indices.iter().enumerate() {
            out[v] = y[i];
        }
        Ok(out)
    }

    /// `D` as a dense `|S| × N` matrix.
    pub fn matrix(&self) -> CMatrix {
        let mut d = CMatrix::zeros(self.len(), self.n);
        for (i, &v) in self.indices.iter().enumerate() {
            d[(i, v)] = c(1.0, 0.0);
        }
        d
    }

    fn check_signal(&self, f: &CVector) -> Result<()> {
        if f.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: f.len() });
        }
        Ok(())
    }
}

/// Noisy samples `y_S`.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub y: CVector,
}

/// `y_S = D f + n` with circular complex Gaussian noise of total variance `noise_std²`.
pub fn sample(plan: &SamplingPlan, f: &CVector) -> Result<Observation> {
    let mut y = plan.restrict(f)?;
    if plan.noise_std > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
        rng.set_stream(NOISE_STREAM);
        let s = plan.noise_std / 2f64.sqrt();
        for v in y.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *v += c(s * re, s * im);
        }
    }
    Ok(Observation { y })
}

/// KRR output: the reconstruction and the coefficients on the sampled vertices.
#[derive(Clone, Debug)]
pub struct KrrSolution {
    /// `K D^T β`, length `N`.
    pub f: CVector,
    /// `(K_S + γI)^{-1} y_S`, length `|S|`.
    pub beta: CVector,
}

impl KrrSolution {
    /// The fit on the sampled vertices, `K_S β`.
    pub fn fitted(&self, plan: &SamplingPlan) -> Result<CVector> {
        plan.restrict(&self.f)
    }
}

fn check_obs(plan: &SamplingPlan, y: &Observation) -> Result<()> {
    if y.y.len() != plan.len() {
        return Err(Error::DimensionMismatch { expected: plan.len(), actual: y.y.len() });
    }
    if y.y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("observation"));
    }
    Ok(())
}

/// Solves `(A + γI) x = b` for Hermitian `A`. With `γ = 0` the system must be
/// positive definite; with `γ > 0` an indefinite system falls back to LU.
pub(crate) fn solve_shifted(a: &CMatrix, gamma: f64, b: &CVector) -> Result<CVector> {
    let mut m = a.clone();
    for i in 0..m.nrows() {
        m[(i, i)] += c(gamma, 0.0);
    }
    match solve_hpd(&m, b) {
        Ok(x) => Ok(x),
        Err(Error::NotPositiveDefinite) if gamma == 0.0 => Err(Error::SingularSystem),
        Err(Error::NotPositiveDefinite) => solve_general(&m, b),
        Err(e) => Err(e),
    }
}

/// `f = K D^T (K_S + γI)^{-1} y_S`.
pub fn krr(k: &KernelMatrix, plan: &SamplingPlan, y: &Observation, gamma: f64) -> Result<KrrSolution> {
    if k.n() != plan.n() {
        return Err(Error::DimensionMismatch { expected: plan.n(), actual: k.n() });
    }
    check_obs(plan, y)?;
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!("gamma must be non-negative, got {gamma}")));
    }
    if plan.is_empty() {
        return Ok(KrrSolution { f: CVector::zeros(k.n()), beta: CVector::zeros(0) });
    }
    let ks = principal_submatrix(k.matrix(), plan.indices());
    let beta = solve_shifted(&ks, gamma, &y.y)?;
    let f = select_columns(k.matrix(), plan.indices()) * &beta;
    Ok(KrrSolution { f, beta })
}

/// `(1/|S|) ‖y_S − D f‖² + γ f^H K^† f`, with `K^†` computed once.
///
/// Its minimizer over the range of `K` is [`krr`] run with ridge `γ·|S|`.
pub struct KrrObjective<'a> {
    plan: &'a SamplingPlan,
    y: &'a Observation,
    gamma: f64,
    k_pinv: CMatrix,
}

impl<'a> KrrObjective<'a> {
    pub fn new(k: &KernelMatrix, plan: &'a SamplingPlan, y: &'a Observation, gamma: f64) -> Result<Self> {
        check_obs(plan, y)?;
        if k.n() != plan.n() {
            return Err(Error::DimensionMismatch { expected: plan.n(), actual: k.n() });
        }
        let k_pinv = pseudo_inverse(k.matrix(), default_pinv_rtol(k.n()))?;
        Ok(Self { plan, y, gamma, k_pinv })
    }

    pub fn eval(&self, f: &CVector) -> Result<f64> {
        let residual = &self.y.y - self.plan.restrict(f)?;
        let fit = if self.plan.is_empty() { 0.0 } else { residual.norm_squared() / self.plan.len() as f64 };
        let penalty = if self.gamma == 0.0 { 0.0 } else { self.gamma * f.dotc(&(&self.k_pinv * f)).re };
        Ok(fit + penalty)
    }
}

pub fn krr_objective(k: &KernelMatrix, plan: &SamplingPlan, y: &Observation, gamma: f64, f: &CVector) -> Result<f64> {
    KrrObjective::new(k, plan, y, gamma)?.eval(f)
}

/// `U_F ((U_F)^H P U_F + γ r_μ)^{-1} (U_F)^H D^T y_S` with `U_F` the band columns of `U^a`.
pub fn bandlimited_ridge(
    s: &GraphSpectrum,
    band: &[usize],
    mu: f64,
    gamma: f64,
    plan: &SamplingPlan,
    y: &Observation,
) -> Result<CVector> {
    if s.n() != plan.n() {
        return Err(Error::DimensionMismatch { expected: plan.n(), actual: s.n() });
    }
    check_obs(plan, y)?;
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!("gamma must be non-negative, got {gamma}")));
    }
    let band = index_set(band, s.n())?;
    let map = crate::spectral::bandlimited_map(&band, mu, s.n())?;
    let uf = select_columns(s.ua(), &band);
    let ufs = CMatrix::from_fn(plan.len(), band.len(), |i, j| uf[(plan.indices()[i], j)]);
    let mut a = ufs.adjoint() * &ufs;
    for (j, &k) in band.iter().enumerate() {
        a[(j, j)] += c(gamma * penalty_of(&map, k, s), 0.0);
    }
    let rhs = ufs.adjoint() * &y.y;
    let coeffs = match solve_hpd(&a, &rhs) {
        Ok(x) => x,
        Err(Error::NotPositiveDefinite) => return Err(Error::SingularSystem),
        Err(e) => return Err(e),
    };
    Ok(uf * coeffs)
}

fn penalty_of(map: &SpectralMap, k: usize, s: &GraphSpectrum) -> f64 {
    map.penalty(k, s.lambda_a()[k])
}

/// `‖f̂ − f‖² / ‖f‖²`.
pub fn nmse(f_hat: &CVector, f_true: &CVector) -> Result<f64> {
    if f_hat.len() != f_true.len() {
        return Err(Error::DimensionMismatch { expected: f_true.len(), actual: f_hat.len() });
    }
    let denom = f_true.norm_squared();
    if denom == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok((f_hat - f_true).norm_squared() / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::identity;

    fn kid(n: usize) -> KernelMatrix {
        KernelMatrix::new(identity(n), "id").unwrap()
    }

    #[test]
    fn sample_examples() {
        let f = CVector::from_fn(5, |i, _| c(i as f64, 1.0));
        let full = SamplingPlan::full(5, 0.0, 0).unwrap();
        assert_eq!(sample(&full, &f).unwrap().y, f);
        let one = SamplingPlan::new(5, vec![2], 0.0, 0).unwrap();
        assert_eq!(sample(&one, &f).unwrap().y, CVector::from_element(1, f[2]));
        let noisy = SamplingPlan::random(5, 3, 0.1, 42).unwrap();
        assert_eq!(sample(&noisy, &f).unwrap(), sample(&noisy, &f).unwrap());
        assert_eq!(SamplingPlan::random(5, 3, 0.1, 42).unwrap(), noisy);
    }

    #[test]
    fn plan_validation() {
        assert!(SamplingPlan::new(3, vec![0, 0], 0.0, 0).is_err());
        assert!(matches!(SamplingPlan::new(3, vec![3], 0.0, 0), Err(Error::IndexOutOfRange { .. })));
        assert!(SamplingPlan::new(3, vec![0], -1.0, 0).is_err());
        assert!(SamplingPlan::random(3, 4, 0.0, 0).is_err());
    }

    #[test]
    fn krr_identity_kernel() {
        let plan = SamplingPlan::new(3, vec![0, 1], 0.0, 0).unwrap();
        let y = Observation { y: CVector::from_vec(vec![c(2.0, 0.0), c(0.0, 4.0)]) };
        let sol = krr(&kid(3), &plan, &y, 1.0).unwrap();
        assert!((sol.f - CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 2.0), c(0.0, 0.0)])).norm() < 1e-15);
    }

    #[test]
    fn krr_zero_data() {
        let plan = SamplingPlan::new(3, vec![0, 2], 0.0, 0).unwrap();
        let y = Observation { y: CVector::zeros(2) };
        assert_eq!(krr(&kid(3), &plan, &y, 0.5).unwrap().f, CVector::zeros(3));
    }

    #[test]
    fn krr_rank_deficient_without_ridge_is_singular() {
        let k = KernelMatrix::new(CMatrix::from_element(2, 2, c(1.0, 0.0)), "ones").unwrap();
        let plan = SamplingPlan::full(2, 0.0, 0).unwrap();
        let y = Observation { y: CVector::from_element(2, c(1.0, 0.0)) };
        assert!(matches!(krr(&k, &plan, &y, 0.0), Err(Error::SingularSystem)));
        assert!(krr(&k, &plan, &y, 0.1).is_ok());
    }

    #[test]
    fn objective_examples() {
        let plan = SamplingPlan::full(2, 0.0, 0).unwrap();
        let y = Observation { y: CVector::zeros(2) };
        assert_eq!(krr_objective(&kid(2), &plan, &y, 1.0, &CVector::zeros(2)).unwrap(), 0.0);
        let f = CVector::from_vec(vec![c(1.0, 1.0), c(-2.0, 0.0)]);
        let y = Observation { y: f.clone() };
        assert_eq!(krr_objective(&kid(2), &plan, &y, 0.0, &f).unwrap(), 0.0);
    }

    #[test]
    fn nmse_examples() {
        let f = CVector::from_vec(vec![c(1.0, 2.0), c(-3.0, 0.5)]);
        assert_eq!(nmse(&f, &f).unwrap(), 0.0);
        assert_eq!(nmse(&CVector::zeros(2), &f).unwrap(), 1.0);
        assert!((nmse(&(&f * c(2.0, 0.0)), &f).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(nmse(&f, &CVector::zeros(2)), Err(Error::ZeroReference)));
    }
}
