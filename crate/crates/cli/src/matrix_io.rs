//! Dense matrix files.
//!
//! `.bin`: rows and columns as `u64` little-endian, then `rows · cols` `f64`
//! little-endian values in column-major order. Anything else is read as CSV
//! with one matrix row per line and no header.

use std::path::Path;

use anyhow::{bail, Context, Result};
use padmm::nalgebra::{DMatrix, DVector};

const HEADER_BYTES: usize = 16;

pub fn load_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let is_bin = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("bin"));
    let m = if is_bin {
        let bytes = std::fs::read(path).with_context(|| format!("reading matrix {}", path.display()))?;
        decode_bin(&bytes)
    } else {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading matrix {}", path.display()))?;
        parse_csv(&text)
    };
    m.with_context(|| format!("in {}", path.display()))
}

/// A matrix file with a single row or a single column.
pub fn load_vector(path: &Path) -> Result<DVector<f64>> {
    let m = load_matrix(path)?;
    if m.ncols() != 1 && m.nrows() != 1 {
        bail!("{} holds a {}x{} matrix, expected a vector", path.display(), m.nrows(), m.ncols());
    }
    Ok(DVector::from_iterator(m.len(), m.iter().copied()))
}

pub fn decode_bin(bytes: &[u8]) -> Result<DMatrix<f64>> {
    if bytes.len() < HEADER_BYTES {
        bail!("binary matrix shorter than its 16-byte header");
    }
    let rows = u64::from_le_bytes(bytes[0..8].try_into()?);
    let cols = u64::from_le_bytes(bytes[8..16].try_into()?);
    let count = rows.checked_mul(cols).and_then(|c| usize::try_from(c).ok()).context("matrix size overflows")?;
    let body = &bytes[HEADER_BYTES..];
    if Some(body.len()) != count.checked_mul(8) {
        bail!("binary matrix {rows}x{cols} needs {} data bytes, found {}", count.saturating_mul(8), body.len());
    }
    let values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
    Ok(DMatrix::from_iterator(rows as usize, cols as usize, values))
}

pub fn encode_bin(m: &DMatrix<f64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_BYTES + 8 * m.len());
    out.extend_from_slice(&(m.nrows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.ncols() as u64).to_le_bytes());
    for v in m.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn parse_csv(text: &str) -> Result<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, f)| f.parse::<f64>().with_context(|| format!("row {} column {}: bad number {f:?}", i + 1, j + 1)))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                bail!("row {} has {} entries, expected {}", i + 1, row.len(), first.len());
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("matrix file is empty");
    }
    let cols = rows[0].len();
    Ok(DMatrix::from_row_iterator(rows.len(), cols, rows.into_iter().flatten()))
}
