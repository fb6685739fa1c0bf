//! Long-term harmonic (Fourier) averages: projections of an observable
//! series onto the unit-circle eigenspace at frequency omega.

use crate::{Error, Result};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy)]
pub struct HarmonicAverage {
    pub value: Complex64,
    /// Difference between the full-series and half-series averages; a crude
    /// convergence estimate for the infinite-time limit.
    pub tail_delta: f64,
}

/// (1/K) sum_k g_k e^{-i omega k dt} over a uniformly sampled series.
pub fn harmonic_average(series: &[Complex64], omega: f64, dt: f64) -> Result<HarmonicAverage> {
    if series.is_empty() {
        return Err(Error::InvalidInput("empty series".into()));
    }
    let avg_upto = |n: usize| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, g) in series.iter().take(n).enumerate() {
            let phase = Complex64::from_polar(1.0, -omega * k as f64 * dt);
            acc += g * phase;
        }
        acc / n as f64
    };
    let full = avg_upto(series.len());
    let half = avg_upto((series.len() / 2).max(1));
    Ok(HarmonicAverage {
        value: full,
        tail_delta: (full - half).norm(),
    })
}
