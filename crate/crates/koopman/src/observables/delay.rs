//! Strictly causal time-delay embeddings of input-output series.

use crate::{Error, Result};
use nalgebra::DMatrix;

/// Delay vectors [y_k, (y,u)_{k-1}, ..., (y,u)_{k-m}] for every k >= m,
/// one column per k. `u`, when present, must have one fewer sample than `y`
/// (inputs act between samples, zero-order hold).
pub fn delay_embed(y: &[f64], u: Option<&[f64]>, m: usize) -> Result<DMatrix<f64>> {
    let len = y.len();
    if m >= len {
        return Err(Error::InvalidInput(format!(
            "m = {m} delays need a series longer than {m}"
        )));
    }
    if let Some(u) = u {
        if u.len() + 1 != len {
            return Err(Error::InvalidInput(format!(
                "input series must have {} samples, got {}",
                len - 1,
                u.len()
            )));
        }
    }
    let q = usize::from(u.is_some());
    let rows = 1 + m * (1 + q);
    let cols = len - m;
    let mut out = DMatrix::zeros(rows, cols);
    for (col, k) in (m..len).enumerate() {
        out[(0, col)] = y[k];
        let mut r = 1;
        for j in 1..=m {
            out[(r, col)] = y[k - j];
            r += 1;
            if let Some(u) = u {
                out[(r, col)] = u[k - j];
                r += 1;
            }
        }
    }
    Ok(out)
}

/// Aligned regression triple (V, V', U): delay vectors at k, their one-step
/// shifts at k+1, and the input u_k applied between them (empty row when
/// autonomous).
pub fn delay_embed_pairs(
    y: &[f64],
    u: Option<&[f64]>,
    m: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
    let all = delay_embed(y, u, m)?;
    let cols = all.ncols();
    if cols < 2 {
        return Err(Error::InvalidInput(
            "series too short to form shifted delay pairs".into(),
        ));
    }
    let v = all.columns(0, cols - 1).into_owned();
    let vp = all.columns(1, cols - 1).into_owned();
    let ups = match u {
        Some(u) => DMatrix::from_fn(1, cols - 1, |_, c| u[m + c]),
        None => DMatrix::zeros(0, cols - 1),
    };
    Ok((v, vp, ups))
}
