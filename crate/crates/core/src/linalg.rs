//! Dense complex linear algebra.
//!
//! Everything here works on [`CMatrix`] / [`CVector`] (nalgebra dense storage
//! of `Complex64`). Hermitian eigendecompositions are returned with
//! eigenvalues in descending order and a deterministic eigenvector phase: the
//! largest-magnitude component of every column is real and positive.

use nalgebra::{Cholesky, DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative tolerance used when checking that a matrix is Hermitian.
pub const HERMITIAN_RTOL: f64 = 1e-10;
/// Absolute tolerance on `max |U^H U - I|` for unitary inputs.
pub const UNITARY_TOL: f64 = 1e-8;

const EIGEN_MAX_ITERS: usize = 100_000;
// Angles within this distance of -π are treated as +π (eigenvalue -1).
const BRANCH_SNAP: f64 = 1e-9;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// `max |a_ij - conj(a_ji)|`.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut defect: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            defect = defect.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    defect
}

pub fn is_hermitian(a: &CMatrix, rtol: f64) -> bool {
    a.is_square() && hermitian_defect(a) <= rtol * max_abs(a)
}

/// `(A + A^H) / 2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * c(0.5, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn to_complex(a: &DMatrix<f64>) -> CMatrix {
    a.map(|x| c(x, 0.0))
}

pub fn is_finite(a: &CMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn ensure_square(a: &CMatrix) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() })
    }
}

fn ensure_hermitian(a: &CMatrix) -> Result<()> {
    ensure_square(a)?;
    if !is_finite(a) {
        return Err(Error::NonFinite("matrix"));
    }
    let defect = hermitian_defect(a);
    if defect > HERMITIAN_RTOL * max_abs(a) {
        return Err(Error::NonHermitianInput { defect });
    }
    Ok(())
}

/// Eigendecomposition `A = U diag(λ) U^H` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Real eigenvalues, descending.
    pub eigenvalues: DVector<f64>,
    /// Orthonormal eigenvectors as columns, aligned with `eigenvalues`.
    pub eigenvectors: CMatrix,
}

impl EigenDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `U diag(g(λ_k)) U^H`.
    pub fn spectral_map(&self, g: impl Fn(f64) -> f64) -> CMatrix {
        let weights: Vec<f64> = self.eigenvalues.iter().map(|&l| g(l)).collect();
        weighted_outer(&self.eigenvectors, &weights)
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.spectral_map(|l| l)
    }
}

/// `V diag(w) V^H` for real weights.
pub fn weighted_outer(v: &CMatrix, weights: &[f64]) -> CMatrix {
    let mut scaled = v.clone();
    for (j, &w) in weights.iter().enumerate() {
        scaled.column_mut(j).scale_mut(w);
    }
    hermitian_part(&(scaled * v.adjoint()))
}

/// Multiplies each column by a unit phase so its largest-magnitude entry is
/// real and positive.
fn fix_phases(v: &mut CMatrix) {
    for j in 0..v.ncols() {
        let mut best = 0;
        let mut best_mag = -1.0;
        for i in 0..v.nrows() {
            let m = v[(i, j)].norm();
            if m > best_mag {
                best_mag = m;
                best = i;
            }
        }
        if best_mag > 0.0 {
            let phase = v[(best, j)].conj() / best_mag;
            v.column_mut(j).iter_mut().for_each(|x| *x *= phase);
            v[(best, j)] = c(v[(best, j)].re, 0.0);
        }
    }
}

/// Hermitian eigendecomposition with eigenvalues sorted in descending order.
///
/// Purely real inputs are routed through the real symmetric solver, which
/// keeps the eigenvectors real.
pub fn eig_hermitian(a: &CMatrix) -> Result<EigenDecomposition> {
    ensure_hermitian(a)?;
    let n = a.nrows();
    if n == 0 {
        return Ok(EigenDecomposition { eigenvalues: DVector::zeros(0), eigenvectors: CMatrix::zeros(0, 0) });
    }
    let herm = hermitian_part(a);

    let (values, vectors) = if herm.iter().all(|z| z.im == 0.0) {
        let real = herm.map(|z| z.re);
        let eig = SymmetricEigen::try_new(real, f64::EPSILON, EIGEN_MAX_ITERS)
            .ok_or(Error::ConvergenceFailure("symmetric eigensolver"))?;
        (eig.eigenvalues, to_complex(&eig.eigenvectors))
    } else {
        let eig = SymmetricEigen::try_new(herm, f64::EPSILON, EIGEN_MAX_ITERS)
            .ok_or(Error::ConvergenceFailure("Hermitian eigensolver"))?;
        (eig.eigenvalues, eig.eigenvectors)
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));

    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| values[i]));
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &vectors.column(src));
    }
    fix_phases(&mut eigenvectors);

    if eigenvalues.iter().any(|l| !l.is_finite()) || !is_finite(&eigenvectors) {
        return Err(Error::NonFinite("eigendecomposition"));
    }
    Ok(EigenDecomposition { eigenvalues, eigenvectors })
}

/// `max |U^H U - I|`.
pub fn unitary_defect(u: &CMatrix) -> f64 {
    let gram = u.adjoint() * u;
    let n = gram.nrows();
    let mut defect: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) };
            defect = defect.max((gram[(i, j)] - target).norm());
        }
    }
    defect
}

/// Spectral decomposition `U = V diag(e^{iθ_k}) V^H` of a unitary matrix with
/// principal angles `θ_k ∈ (-π, π]`.
///
/// Built once, it produces `U^a` for any real `a` with a consistent branch, so
/// `U^a U^b = U^{a+b}` holds up to rounding.
#[derive(Clone, Debug)]
pub struct UnitarySpectrum {
    original: CMatrix,
    vectors: CMatrix,
    angles: DVector<f64>,
}

impl UnitarySpectrum {
    pub fn new(u: &CMatrix) -> Result<Self> {
        ensure_square(u)?;
        if !is_finite(u) {
            return Err(Error::NonFinite("unitary matrix"));
        }
        let defect = unitary_defect(u);
        if defect > UNITARY_TOL {
            return Err(Error::NonUnitaryInput { defect });
        }
        let n = u.nrows();
        if n == 0 {
            return Ok(Self { original: u.clone(), vectors: u.clone(), angles: DVector::zeros(0) });
        }
        let schur = Schur::try_new(u.clone(), f64::EPSILON, EIGEN_MAX_ITERS)
            .ok_or(Error::ConvergenceFailure("complex Schur decomposition"))?;
        let (q, t) = schur.unpack();

        // A normal matrix has a diagonal Schur form.
        let mut off_diag: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off_diag = off_diag.max(t[(i, j)].norm());
            }
        }
        if off_diag > 1e-6 {
            return Err(Error::ConvergenceFailure("Schur form of a unitary matrix is not diagonal"));
        }

        let angles = DVector::from_iterator(
            n,
            (0..n).map(|k| {
                let theta = t[(k, k)].arg();
                if theta <= -std::f64::consts::PI + BRANCH_SNAP {
                    std::f64::consts::PI
                } else {
                    theta
                }
            }),
        );
        Ok(Self { original: u.clone(), vectors: q, angles })
    }

    pub fn angles(&self) -> &DVector<f64> {
        &self.angles
    }

    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    /// `U^a = V diag(e^{i a θ_k}) V^H`; exact at `a = 0` and `a = 1`.
    pub fn power(&self, a: f64) -> CMatrix {
        let n = self.original.nrows();
        if a == 0.0 {
            return identity(n);
        }
        if a == 1.0 {
            return self.original.clone();
        }
        let mut scaled = self.vectors.clone();
        for (j, &theta) in self.angles.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, a * theta);
            scaled.column_mut(j).iter_mut().for_each(|x| *x *= phase);
        }
        scaled * self.vectors.adjoint()
    }
}

/// Principal-branch fractional power of a unitary matrix.
pub fn fractional_unitary_power(u: &CMatrix, a: f64) -> Result<CMatrix> {
    if !a.is_finite() {
        return Err(Error::InvalidParameter(format!("fractional order must be finite, got {a}")));
    }
    Ok(UnitarySpectrum::new(u)?.power(a))
}

/// Default relative cut-off for [`pseudo_inverse`]: `1e-10 · N`.
pub fn default_pinv_rtol(n: usize) -> f64 {
    1e-10 * n.max(1) as f64
}

/// Moore–Penrose inverse of a Hermitian PSD matrix. Eigenvalues at or below
/// `rtol · λ_max` are treated as zero.
pub fn pseudo_inverse(a: &CMatrix, rtol: f64) -> Result<CMatrix> {
    let eig = eig_hermitian(a)?;
    if eig.is_empty() {
        return Ok(CMatrix::zeros(0, 0));
    }
    let cutoff = rtol * eig.lambda_max().max(0.0);
    Ok(eig.spectral_map(|l| if l > cutoff && l > 0.0 { 1.0 / l } else { 0.0 }))
}

/// Solves `A x = b` for Hermitian positive-definite `A` via Cholesky, with one
/// step of iterative refinement.
pub fn solve_hpd(a: &CMatrix, b: &CVector) -> Result<CVector> {
    ensure_square(a)?;
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), actual: b.len() });
    }
    let chol = Cholesky::new(hermitian_part(a)).ok_or(Error::NotPositiveDefinite)?;
    // Complex Cholesky accepts negative pivots via the complex square root.
    let l = chol.l_dirty();
    if (0..l.nrows()).any(|i| !(l[(i, i)].re > 0.0) || l[(i, i)].im.abs() > 1e-12 * l[(i, i)].re) {
        return Err(Error::NotPositiveDefinite);
    }
    let mut x = chol.solve(b);
    let residual = b - a * &x;
    x += chol.solve(&residual);
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("HPD solve"));
    }
    Ok(x)
}

/// Solves `A x = b` for a general square matrix with partial-pivot LU.
pub fn solve_general(a: &CMatrix, b: &CVector) -> Result<CVector> {
    ensure_square(a)?;
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), actual: b.len() });
    }
    let x = a.clone().lu().solve(b).ok_or(Error::SingularSystem)?;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::SingularSystem);
    }
    Ok(x)
}

/// Rows and columns of `a` restricted to `idx`.
pub fn principal_submatrix(a: &CMatrix, idx: &[usize]) -> CMatrix {
    CMatrix::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])])
}

/// Columns of `a` listed in `idx`.
pub fn select_columns(a: &CMatrix, idx: &[usize]) -> CMatrix {
    CMatrix::from_fn(a.nrows(), idx.len(), |i, j| a[(i, idx[j])])
}
