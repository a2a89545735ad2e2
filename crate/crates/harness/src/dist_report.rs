//! Magnitude distributions of an original and a reconstructed signal against
//! fitted Rayleigh and Weibull laws, sampled on a common grid for plotting.

use std::path::{Path, PathBuf};

use cgsp_core::datagen::{fit_distributions, DistributionFits, EmpiricalDistribution, IngestMetadata};
use cgsp_core::CVector;
use serde_json::json;

use crate::error::{HarnessError, Result};
use crate::report::write_file;

pub const DEFAULT_GRID_POINTS: usize = 2001;
/// The grid ends this factor beyond the largest magnitude.
pub const GRID_MARGIN: f64 = 1.05;

pub fn magnitudes(f: &CVector) -> Vec<f64> {
    f.iter().map(|z| z.norm()).collect()
}

/// Columns of the distribution CSV, one entry per grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct DistGrid {
    pub x: Vec<f64>,
    pub ecdf_original: Vec<f64>,
    pub ecdf_reconstructed: Vec<f64>,
    pub rayleigh_pdf: Vec<f64>,
    pub rayleigh_cdf: Vec<f64>,
    pub weibull_pdf: Vec<f64>,
    pub weibull_cdf: Vec<f64>,
}

/// Evaluates every curve on `points` evenly spaced values over
/// `[0, 1.05 · max magnitude]` (maximum over both signals).
pub fn dist_grid(original: &[f64], reconstructed: &[f64], fits: &DistributionFits, points: usize) -> Result<DistGrid> {
    if points < 2 {
        return Err(HarnessError::config("distribution grid needs at least 2 points"));
    }
    let orig = EmpiricalDistribution::new(original)?;
    let rec = EmpiricalDistribution::new(reconstructed)?;
    let top = GRID_MARGIN * orig.max().max(rec.max()).max(0.0);
    let top = if top > 0.0 { top } else { 1.0 };
    let x: Vec<f64> = (0..points).map(|i| top * i as f64 / (points - 1) as f64).collect();
    let map = |g: &dyn Fn(f64) -> f64| x.iter().map(|&v| g(v)).collect::<Vec<f64>>();
    Ok(DistGrid {
        ecdf_original: map(&|v| orig.ecdf(v)),
        ecdf_reconstructed: map(&|v| rec.ecdf(v)),
        rayleigh_pdf: map(&|v| fits.rayleigh.pdf(v)),
        rayleigh_cdf: map(&|v| fits.rayleigh.cdf(v)),
        weibull_pdf: map(&|v| fits.weibull.pdf(v)),
        weibull_cdf: map(&|v| fits.weibull.cdf(v)),
        x,
    })
}

/// Trapezoid rule over the grid.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1])).sum()
}

pub fn dist_csv(grid: &DistGrid) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "x",
        "ecdf_original",
        "ecdf_reconstructed",
        "rayleigh_pdf",
        "rayleigh_cdf",
        "weibull_pdf",
        "weibull_cdf",
    ])?;
    for i in 0..grid.x.len() {
        let row = [
            grid.x[i],
            grid.ecdf_original[i],
            grid.ecdf_reconstructed[i],
            grid.rayleigh_pdf[i],
            grid.rayleigh_cdf[i],
            grid.weibull_pdf[i],
            grid.weibull_cdf[i],
        ];
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.into_inner().map_err(|e| HarnessError::Csv(e.into_error().into()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistReportFiles {
    pub grid: PathBuf,
    pub fits: PathBuf,
}

/// Fits the original magnitudes and writes `distribution.csv` and `fits.json`.
/// Without a reconstruction the original is used in its place.
pub fn dist_report(
    original: &CVector,
    reconstructed: Option<&CVector>,
    ingest: Option<&IngestMetadata>,
    points: usize,
    dir: impl AsRef<Path>,
) -> Result<(DistributionFits, DistReportFiles)> {
    let orig = magnitudes(original);
    let rec = reconstructed.map(magnitudes).unwrap_or_else(|| orig.clone());
    let fits = fit_distributions(&orig)?;
    let grid = dist_grid(&orig, &rec, &fits, points)?;
    let dir = dir.as_ref();
    let files = DistReportFiles { grid: dir.join("distribution.csv"), fits: dir.join("fits.json") };
    write_file(&files.grid, &dist_csv(&grid)?)?;
    let doc = json!({
        "samples": orig.len(),
        "rayleigh": { "sigma": fits.rayleigh.sigma },
        "weibull": { "k": fits.weibull.k, "lambda": fits.weibull.lambda, "iterations": fits.weibull.iterations },
        "histogram": { "edges": fits.histogram.edges, "density": fits.histogram.density },
        "ingest": ingest.map(|m| json!({
            "rows": m.rows,
            "preprocessed": m.preprocessed,
            "shifted_components": m.shifted_components,
            "bin_len": m.bin_len,
            "bin_maxima": m.bin_maxima,
        })),
    });
    let mut bytes = serde_json::to_vec_pretty(&doc)?;
    bytes.push(b'\n');
    write_file(&files.fits, &bytes)?;
    Ok((fits, files))
}
