//! Complex signals as CSV with the columns `index,re,im`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{c, CVector};

const HEADER: [&str; 3] = ["index", "re", "im"];

/// Writes one row per entry, in index order.
pub fn write_signal_csv<W: Write>(out: W, f: &CVector) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(HEADER)?;
    for (i, z) in f.iter().enumerate() {
        wtr.write_record([i.to_string(), format!("{:e}", z.re), format!("{:e}", z.im)])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn save_signal_csv(path: impl AsRef<Path>, f: &CVector) -> Result<()> {
    write_signal_csv(File::create(path)?, f)
}

/// Reads an `index,re,im` table. Rows may come in any order but the indices must
/// cover `0..n` exactly once.
pub fn read_signal_csv<R: Read>(input: R) -> Result<CVector> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    let names: Vec<String> = headers.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
    if names != HEADER {
        return Err(Error::MalformedCsv(format!("expected header index,re,im, found {}", names.join(","))));
    }
    let mut rows: Vec<(usize, f64, f64)> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::MalformedCsv(e.to_string()))?;
        let bad = |what: &str| Error::MalformedCsv(format!("row {}: bad {what}", line + 2));
        if rec.len() != 3 {
            return Err(bad("column count"));
        }
        let i: usize = rec[0].trim().parse().map_err(|_| bad("index"))?;
        let re: f64 = rec[1].trim().parse().map_err(|_| bad("re"))?;
        let im: f64 = rec[2].trim().parse().map_err(|_| bad("im"))?;
        if !re.is_finite() || !im.is_finite() {
            return Err(bad("value (non-finite)"));
        }
        rows.push((i, re, im));
    }
    if rows.is_empty() {
        return Err(Error::EmptySignal);
    }
    let n = rows.len();
    let mut out = CVector::zeros(n);
    let mut seen = vec![false; n];
    for (i, re, im) in rows {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(Error::MalformedCsv(format!("index {i} is duplicated or outside 0..{n}")));
        }
        out[i] = c(re, im);
    }
    Ok(out)
}

pub fn load_signal_csv(path: impl AsRef<Path>) -> Result<CVector> {
    read_signal_csv(File::open(path)?)
}

/// What ingestion did to the raw samples.
#[derive(Clone, Debug, PartialEq)]
pub struct IngestMetadata {
    pub rows: usize,
    pub preprocessed: bool,
    /// Real or imaginary components that were negative and shifted by 256.
    pub shifted_components: usize,
    /// Samples per normalization bin; the whole signal is one bin when `None`.
    pub bin_len: Option<usize>,
    /// Maximum magnitude of each bin before normalization.
    pub bin_maxima: Vec<f64>,
}

/// Shifts negative components by 256, then divides every bin by its largest magnitude.
/// Bins of zero magnitude are left as they are.
pub fn preprocess(f: &CVector, bin_len: Option<usize>) -> Result<(CVector, IngestMetadata)> {
    if f.is_empty() {
        return Err(Error::EmptySignal);
    }
    if bin_len == Some(0) {
        return Err(Error::InvalidParameter("bin length must be positive".into()));
    }
    let mut shifted = 0;
    let mut out = f.map(|z| {
        let fix = |v: f64, count: &mut usize| {
            if v < 0.0 {
                *count += 1;
                v + 256.0
            } else {
                v
            }
        };
        let mut local = 0;
        let re = fix(z.re, &mut local);
        let im = fix(z.im, &mut local);
        shifted += local;
        c(re, im)
    });
    let len = bin_len.unwrap_or(out.len());
    let mut maxima = Vec::new();
    for start in (0..out.len()).step_by(len) {
        let end = (start + len).min(out.len());
        let m = (start..end).map(|i| out[i].norm()).fold(0.0, f64::max);
        if m > 0.0 {
            for i in start..end {
                out[i] /= m;
            }
        }
        maxima.push(m);
    }
    let meta = IngestMetadata { rows: f.len(), preprocessed: true, shifted_components: shifted, bin_len, bin_maxima: maxima };
    Ok((out, meta))
}

/// Reads an `index,re,im` file, optionally applying [`preprocess`] with a single bin.
pub fn ingest_complex_csv(path: impl AsRef<Path>, preprocessing: bool) -> Result<(CVector, IngestMetadata)> {
    let raw = load_signal_csv(path)?;
    if preprocessing {
        preprocess(&raw, None)
    } else {
        let meta =
            IngestMetadata { rows: raw.len(), preprocessed: false, shifted_components: 0, bin_len: None, bin_maxima: vec![] };
        Ok((raw, meta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_component_shift() {
        let f = CVector::from_vec(vec![c(-1.0, 0.0)]);
        let (out, meta) = preprocess(&f, None).unwrap();
        assert_eq!(meta.shifted_components, 1);
        assert_eq!(meta.bin_maxima, vec![255.0]);
        assert_eq!(out[0], c(1.0, 0.0));
    }

    #[test]
    fn positive_input_only_normalized() {
        let f = CVector::from_vec(vec![c(3.0, 4.0), c(1.0, 0.0)]);
        let (out, meta) = preprocess(&f, None).unwrap();
        assert_eq!(meta.shifted_components, 0);
        assert_eq!(out, CVector::from_vec(vec![c(0.6, 0.8), c(0.2, 0.0)]));
    }

    #[test]
    fn per_bin_normalization() {
        let f = CVector::from_vec(vec![c(2.0, 0.0), c(1.0, 0.0), c(4.0, 0.0), c(8.0, 0.0)]);
        let (out, meta) = preprocess(&f, Some(2)).unwrap();
        assert_eq!(meta.bin_maxima, vec![2.0, 8.0]);
        assert_eq!(out, CVector::from_vec(vec![c(1.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(1.0, 0.0)]));
    }

    #[test]
    fn round_trip() {
        let f = CVector::from_vec(vec![c(0.1, -2.5), c(1e-300, 3.0), c(-7.25, 0.0)]);
        let mut buf = Vec::new();
        write_signal_csv(&mut buf, &f).unwrap();
        assert_eq!(read_signal_csv(buf.as_slice()).unwrap(), f);
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(read_signal_csv("a,b,c\n0,1,2\n".as_bytes()), Err(Error::MalformedCsv(_))));
        assert!(matches!(read_signal_csv("index,re,im\n".as_bytes()), Err(Error::EmptySignal)));
        assert!(matches!(read_signal_csv("index,re,im\n0,1,x\n".as_bytes()), Err(Error::MalformedCsv(_))));
        assert!(matches!(read_signal_csv("index,re,im\n0,1,1\n0,2,2\n".as_bytes()), Err(Error::MalformedCsv(_))));
        assert!(read_signal_csv("index,re,im\n1,1,1\n0,2,2\n".as_bytes()).is_ok());
        assert!(matches!(preprocess(&CVector::zeros(0), None), Err(Error::EmptySignal)));
    }
}
