//! Weighted undirected graphs, their Laplacians and fractional spectra.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernels::{kernel_matrix, KernelMatrix, KernelSpec};
use crate::linalg::{
    c, eig_hermitian, fractional_unitary_power, hermitian_part, select_columns, to_complex, CMatrix, CVector,
    EigenDecomposition,
};
use crate::metrics::FeatureVector;

/// Relative tolerance for weight symmetry and for treating an imaginary kernel part as zero.
const WEIGHT_TOL: f64 = 1e-12;

/// Undirected graph with a real symmetric non-negative adjacency and zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    weights: DMatrix<f64>,
    degrees: DVector<f64>,
}

impl Graph {
    /// Validates `w` and symmetrizes away rounding-level asymmetry.
    pub fn from_weights(w: DMatrix<f64>) -> Result<Self> {
        let n = w.nrows();
        if n != w.ncols() {
            return Err(Error::NotSquare { rows: n, cols: w.ncols() });
        }
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("adjacency"));
        }
        let scale = w.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in 0..n {
                if w[(i, j)] < 0.0 {
                    return Err(Error::InvalidParameter(format!("negative edge weight {} at ({i}, {j})", w[(i, j)])));
                }
                if (w[(i, j)] - w[(j, i)]).abs() > WEIGHT_TOL * scale {
                    return Err(Error::InvalidParameter(format!("adjacency not symmetric at ({i}, {j})")));
                }
            }
        }
        let mut w = (&w + w.transpose()) * 0.5;
        w.fill_diagonal(0.0);
        let degrees = DVector::from_fn(n, |i, _| w.row(i).sum());
        Ok(Self { weights: w, degrees })
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn degrees(&self) -> &DVector<f64> {
        &self.degrees
    }

    pub fn edge_count(&self) -> usize {
        let n = self.n();
        (0..n).map(|i| (i + 1..n).filter(|&j| self.weights[(i, j)] != 0.0).count()).sum()
    }

    /// `L = D - W`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.degrees) - &self.weights
    }

    /// `I - D^{-1/2} W D^{-1/2}`; isolated vertices get a zero row and column.
    pub fn normalized_laplacian(&self) -> DMatrix<f64> {
        let n = self.n();
        let inv_sqrt: Vec<f64> = self.degrees.iter().map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 }).collect();
        DMatrix::from_fn(n, n, |i, j| {
            let diag = if i == j && self.degrees[i] > 0.0 { 1.0 } else { 0.0 };
            diag - inv_sqrt[i] * self.weights[(i, j)] * inv_sqrt[j]
        })
    }

    /// `(n, m, w)` for every edge with `n < m`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let w = self.weights[(i, j)];
                if w != 0.0 {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    /// Writes the edge list as CSV with header `n,m,w`, one row per undirected edge.
    pub fn write_edge_list<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["n", "m", "w"])?;
        for (i, j, w) in self.edges() {
            wtr.write_record([i.to_string(), j.to_string(), format!("{w:e}")])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads an `n,m,w` edge list. The vertex count is `n_vertices` or, if absent,
    /// one more than the largest index seen. Repeated edges keep the last weight.
    pub fn read_edge_list<R: Read>(input: R, n_vertices: Option<usize>) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let headers = rdr.headers()?.clone();
        if headers.len() != 3 {
            return Err(Error::MalformedCsv(format!("edge list needs 3 columns n,m,w, found {}", headers.len())));
        }
        let mut edges = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let field = |k: usize| rec.get(k).unwrap_or("").trim();
            let bad = |what: &str| Error::MalformedCsv(format!("row {}: bad {what}", line + 2));
            let i: usize = field(0).parse().map_err(|_| bad("source index"))?;
            let j: usize = field(1).parse().map_err(|_| bad("target index"))?;
            let w: f64 = field(2).parse().map_err(|_| bad("weight"))?;
            edges.push((i, j, w));
        }
        let n = n_vertices.unwrap_or_else(|| edges.iter().map(|&(i, j, _)| i.max(j) + 1).max().unwrap_or(0));
        let mut w = DMatrix::zeros(n, n);
        for (i, j, x) in edges {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange { index: i.max(j), len: n });
            }
            if i != j {
                w[(i, j)] = x;
                w[(j, i)] = x;
            }
        }
        Self::from_weights(w)
    }

    /// Writes the dense adjacency with a header row `0,1,...,N-1`.
    pub fn write_dense<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record((0..self.n()).map(|i| i.to_string()))?;
        for i in 0..self.n() {
            wtr.write_record(self.weights.row(i).iter().map(|w| format!("{w:e}")))?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_dense<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let n = rdr.headers()?.len();
        let mut w = DMatrix::zeros(n, n);
        let mut rows = 0;
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if i >= n || rec.len() != n {
                return Err(Error::MalformedCsv(format!("dense adjacency must be {n} x {n}")));
            }
            for (j, v) in rec.iter().enumerate() {
                w[(i, j)] = v.trim().parse().map_err(|_| Error::MalformedCsv(format!("bad weight at ({i}, {j})")))?;
            }
            rows += 1;
        }
        if rows != n {
            return Err(Error::MalformedCsv(format!("dense adjacency has {rows} rows, expected {n}")));
        }
        Self::from_weights(w)
    }

    pub fn save_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_edge_list(File::create(path)?)
    }

    pub fn load_edge_list(path: impl AsRef<Path>, n_vertices: Option<usize>) -> Result<Self> {
        Self::read_edge_list(File::open(path)?, n_vertices)
    }
}

/// Edge pruning applied to a kernel-built adjacency.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sparsify {
    /// Keep every pair.
    Dense,
    /// Keep `w_nm` when `m` is among the `k` largest weights of row `n` or vice versa.
    Knn(usize),
}

impl Default for Sparsify {
    fn default() -> Self {
        Sparsify::Knn(10)
    }
}

impl Sparsify {
    pub fn apply(&self, w: &DMatrix<f64>) -> DMatrix<f64> {
        let k = match *self {
            Sparsify::Dense => return w.clone(),
            Sparsify::Knn(k) => k,
        };
        let n = w.nrows();
        let mut keep = DMatrix::from_element(n, n, false);
        for i in 0..n {
            let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            order.sort_by(|&a, &b| w[(i, b)].total_cmp(&w[(i, a)]).then(a.cmp(&b)));
            for &j in order.iter().take(k) {
                keep[(i, j)] = true;
                keep[(j, i)] = true;
            }
        }
        DMatrix::from_fn(n, n, |i, j| if keep[(i, j)] { w[(i, j)] } else { 0.0 })
    }
}

/// Adjacency from a real non-negative kernel matrix: off-diagonal entries become weights.
pub fn graph_from_kernel_matrix(k: &KernelMatrix, sparsify: Sparsify) -> Result<Graph> {
    let n = k.n();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let m = k.matrix();
    let scale = crate::linalg::max_abs(m).max(f64::MIN_POSITIVE);
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let v = m[(i, j)];
            if v.im.abs() > WEIGHT_TOL * scale || v.re < 0.0 {
                return Err(Error::ComplexWeight { row: i, col: j });
            }
            w[(i, j)] = v.re;
        }
    }
    Graph::from_weights(sparsify.apply(&w))
}

/// Builds the graph `w_nm = κ(z_n, z_m)` for a Gaussian or Laplacian kernel.
pub fn graph_from_kernel(spec: &KernelSpec, features: &[FeatureVector], sparsify: Sparsify) -> Result<Graph> {
    if !spec.is_real_valued() {
        return Err(Error::UnsupportedKernel(format!("{} cannot define edge weights", spec.family())));
    }
    if features.is_empty() {
        return Err(Error::EmptyGraph);
    }
    graph_from_kernel_matrix(&kernel_matrix(spec, features)?, sparsify)
}

/// Eigendecomposition of a Laplacian plus the fractional objects of order `a`.
#[derive(Clone, Debug)]
pub struct GraphSpectrum {
    eig: EigenDecomposition,
    a: f64,
    ua: CMatrix,
    uah: CMatrix,
    lambda_a: DVector<f64>,
}

impl GraphSpectrum {
    /// Spectrum of `L` (or the normalized Laplacian) at fractional order `a`.
    pub fn new(graph: &Graph, a: f64, normalized: bool) -> Result<Self> {
        let l = if normalized { graph.normalized_laplacian() } else { graph.laplacian() };
        Self::from_laplacian(&to_complex(&l), a)
    }

    /// From any Hermitian PSD operator playing the role of the Laplacian.
    pub fn from_laplacian(l: &CMatrix, a: f64) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::InvalidParameter(format!("fractional order must be finite, got {a}")));
        }
        let eig = eig_hermitian(l)?;
        Self::from_eigen(eig, a)
    }

    fn from_eigen(eig: EigenDecomposition, a: f64) -> Result<Self> {
        let ua = fractional_unitary_power(&eig.eigenvectors, a)?;
        let uah = ua.adjoint();
        let cutoff = 1e-10 * eig.lambda_max().abs().max(1.0);
        let lambda_a = eig.eigenvalues.map(|l| if l <= cutoff { 0.0 } else { l.powf(a) });
        Ok(Self { eig, a, ua, uah, lambda_a })
    }

    /// Same eigendecomposition at a different fractional order.
    pub fn with_order(&self, a: f64) -> Result<Self> {
        Self::from_eigen(self.eig.clone(), a)
    }

    pub fn n(&self) -> usize {
        self.eig.len()
    }

    pub fn order(&self) -> f64 {
        self.a
    }

    pub fn eigen(&self) -> &EigenDecomposition {
        &self.eig
    }

    /// Laplacian eigenvalues, descending.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eig.eigenvalues
    }

    pub fn u(&self) -> &CMatrix {
        &self.eig.eigenvectors
    }

    /// `U^a`.
    pub fn ua(&self) -> &CMatrix {
        &self.ua
    }

    /// `(U^a)^H`, the forward GFRFT matrix.
    pub fn uah(&self) -> &CMatrix {
        &self.uah
    }

    /// `λ_k^a` with `0^a = 0` for every order.
    pub fn lambda_a(&self) -> &DVector<f64> {
        &self.lambda_a
    }

    /// Columns of `U^a` listed in `band`.
    pub fn ua_columns(&self, band: &[usize]) -> Result<CMatrix> {
        let band = index_set(band, self.n())?;
        Ok(select_columns(&self.ua, &band))
    }

    /// `U^a diag(g_k) (U^a)^H`.
    pub fn synthesize(&self, g: &[f64]) -> CMatrix {
        let scaled = CMatrix::from_fn(self.n(), self.n(), |i, j| self.ua[(i, j)] * g[j]);
        hermitian_part(&(scaled * &self.uah))
    }

    /// `M^a = U^a Λ^a (U^a)^H`.
    pub fn fractional_laplacian(&self) -> CMatrix {
        self.synthesize(self.lambda_a.as_slice())
    }
}

/// Sorted, de-duplicated copy of `idx`, checked against `n`.
pub fn index_set(idx: &[usize], n: usize) -> Result<Vec<usize>> {
    if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
        return Err(Error::IndexOutOfRange { index: bad, len: n });
    }
    let mut v = idx.to_vec();
    v.sort_unstable();
    v.dedup();
    Ok(v)
}

fn ensure_signal(s: &GraphSpectrum, f: &CVector) -> Result<()> {
    if f.len() != s.n() {
        return Err(Error::DimensionMismatch { expected: s.n(), actual: f.len() });
    }
    Ok(())
}

/// `f̂ = (U^a)^H f`.
pub fn gfrft(s: &GraphSpectrum, f: &CVector) -> Result<CVector> {
    ensure_signal(s, f)?;
    Ok(s.uah() * f)
}

/// `f = U^a f̂`.
pub fn inverse_gfrft(s: &GraphSpectrum, f_hat: &CVector) -> Result<CVector> {
    ensure_signal(s, f_hat)?;
    Ok(s.ua() * f_hat)
}

/// `Re(f^H M^a f)` with `M^a = U^a Λ^a (U^a)^H`.
pub fn smoothness(s: &GraphSpectrum, f: &CVector) -> Result<f64> {
    let f_hat = gfrft(s, f)?;
    Ok(f_hat.iter().zip(s.lambda_a().iter()).map(|(z, &l)| l * z.norm_sqr()).sum())
}

/// Vertex projector `P` and fractional spectral projector `B^a`.
#[derive(Clone, Debug)]
pub struct LocalizationOps {
    vertices: Vec<usize>,
    band: Vec<usize>,
    p: Vec<bool>,
    ba: CMatrix,
}

impl LocalizationOps {
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn band(&self) -> &[usize] {
        &self.band
    }

    /// `diag(p_i)`.
    pub fn p(&self) -> CMatrix {
        CMatrix::from_fn(self.p.len(), self.p.len(), |i, j| if i == j && self.p[i] { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    pub fn apply_p(&self, f: &CVector) -> CVector {
        CVector::from_fn(f.len(), |i, _| if self.p[i] { f[i] } else { c(0.0, 0.0) })
    }

    /// `B^a = U^a Σ (U^a)^H`.
    pub fn ba(&self) -> &CMatrix {
        &self.ba
    }
}

pub fn localization_ops(s: &GraphSpectrum, vertices: &[usize], band: &[usize]) -> Result<LocalizationOps> {
    let n = s.n();
    let vertices = index_set(vertices, n)?;
    let band = index_set(band, n)?;
    let mut p = vec![false; n];
    for &i in &vertices {
        p[i] = true;
    }
    let ua_f = select_columns(s.ua(), &band);
    let ba = hermitian_part(&(&ua_f * ua_f.adjoint()));
    Ok(LocalizationOps { vertices, band, p, ba })
}

/// Result of the perfect-localization test.
#[derive(Clone, Debug)]
pub struct LocalizationCheck {
    /// `λ_max(B^a P B^a)`.
    pub lambda_max: f64,
    pub localized: bool,
    /// Unit eigenvector for `lambda_max`.
    pub f: CVector,
}

pub const LOCALIZATION_TOL: f64 = 1e-6;

/// Largest eigenpair of `B^a P B^a`; the signal is perfectly localized when `λ_max ≈ 1`.
pub fn perfect_localization_check(ops: &LocalizationOps) -> Result<LocalizationCheck> {
    let n = ops.p.len();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let pb = CMatrix::from_fn(n, n, |i, j| if ops.p[i] { ops.ba[(i, j)] } else { c(0.0, 0.0) });
    let bpb = hermitian_part(&(&ops.ba * pb));
    let eig = eig_hermitian(&bpb)?;
    let lambda_max = eig.lambda_max();
    let f = eig.eigenvectors.column(0).into_owned();
    Ok(LocalizationCheck { lambda_max, localized: (lambda_max - 1.0).abs() <= LOCALIZATION_TOL, f })
}
