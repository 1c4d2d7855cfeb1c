//! Bit-rate signals, spectra, distances and coverage.
//!
//! A bit-rate signal `x_r(n)` holds the average instantaneous bit rate of
//! consecutive blocks of a trace. Spectra are taken of the mean-removed
//! signal `x(n) = x_r(n) − m`. The squared distance between two signals
//! is computed as `‖x − y‖² + N(m_x − m_y)²`, which equals `‖x_r − y_r‖²`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::SignalError;

/// Blocks per trace used when none is given.
pub const DEFAULT_BLOCKS: usize = 1000;
/// Width of the magnitude smoothing window used when none is given.
pub const DEFAULT_WINDOW: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BitRateSignal {
    values: Vec<f64>,
    mean: f64,
    block_size: usize,
}

impl BitRateSignal {
    /// Wraps per-block rates. Values must be finite and non-negative.
    pub fn new(values: Vec<f64>, block_size: usize) -> Result<Self, SignalError> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(SignalError::InvalidValue);
        }
        let mean = if values.is_empty() { 0.0 } else { values.iter().sum::<f64>() / values.len() as f64 };
        Ok(BitRateSignal { values, mean, block_size })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Instructions per block (the last block may hold more).
    pub fn block_size(&self) -> usize {
        self.block_size
    }

    /// `x_r(n) − m`.
    pub fn mean_removed(&self) -> Vec<f64> {
        self.values.iter().map(|v| v - self.mean).collect()
    }
}

/// Averages `rates` over `blocks` consecutive blocks of `⌊L/B⌋`
/// instructions; the last block also takes the remainder.
pub fn block_signal(rates: &[f64], blocks: usize) -> Result<BitRateSignal, SignalError> {
    if blocks == 0 {
        return Err(SignalError::ZeroBlocks);
    }
    if rates.len() < blocks {
        return Err(SignalError::FewerInstructionsThanBlocks { len: rates.len(), blocks });
    }
    let size = rates.len() / blocks;
    let values = (0..blocks)
        .map(|b| {
            let start = b * size;
            let end = if b + 1 == blocks { rates.len() } else { start + size };
            let block = &rates[start..end];
            block.iter().sum::<f64>() / block.len() as f64
        })
        .collect();
    BitRateSignal::new(values, size)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    /// DFT of the mean-removed signal.
    #[serde(skip)]
    pub coefficients: Vec<Complex64>,
    /// `|X(k)|`.
    pub magnitudes: Vec<f64>,
    /// `|X(k)|` after the circular moving average of width `window`.
    pub smoothed: Vec<f64>,
    /// `k / N`.
    pub normalized_frequencies: Vec<f64>,
    pub window: usize,
}

impl Spectrum {
    /// Bin of the largest smoothed magnitude among `0..=N/2` (first on ties).
    pub fn peak_bin(&self) -> usize {
        let half = self.smoothed.len() / 2;
        let mut best = 0;
        for k in 1..=half {
            if self.smoothed[k] > self.smoothed[best] {
                best = k;
            }
        }
        best
    }
}

pub fn spectrum(signal: &BitRateSignal, window: usize) -> Result<Spectrum, SignalError> {
    let n = signal.len();
    if n < 2 {
        return Err(SignalError::TooShort { len: n, needed: 2 });
    }
    if window == 0 || window.is_multiple_of(2) || window > n {
        return Err(SignalError::InvalidWindow { window, len: n });
    }
    let mut coefficients = dft(&signal.mean_removed());
    // the mean-removed signal sums to zero
    coefficients[0] = Complex64::new(0.0, 0.0);
    let magnitudes: Vec<f64> = coefficients.iter().map(|c| c.norm()).collect();
    let smoothed = smooth_circular(&magnitudes, window);
    let normalized_frequencies = (0..n).map(|k| k as f64 / n as f64).collect();
    Ok(Spectrum { coefficients, magnitudes, smoothed, normalized_frequencies, window })
}

/// Forward DFT, `X(k) = Σ x(n) e^{−2πikn/N}`, by FFT.
pub fn dft(x: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    if buf.is_empty() {
        return buf;
    }
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_forward(buf.len());
    fft.process(&mut buf);
    buf
}

/// Forward DFT by the O(N²) definition.
pub fn dft_reference(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(t, &v)| {
                    let angle = -2.0 * std::f64::consts::PI * ((k * t) % n) as f64 / n as f64;
                    Complex64::from_polar(v, angle)
                })
                .sum()
        })
        .collect()
}

/// Centered moving average of odd width `w` with circular wrap.
pub fn smooth_circular(values: &[f64], w: usize) -> Vec<f64> {
    let n = values.len();
    let half = (w / 2) as isize;
    (0..n as isize)
        .map(|i| {
            (-half..=half)
                .map(|d| values[(i + d).rem_euclid(n as isize) as usize])
                .sum::<f64>()
                / w as f64
        })
        .collect()
}

fn check_lengths(x: &BitRateSignal, y: &BitRateSignal) -> Result<(), SignalError> {
    if x.len() != y.len() {
        return Err(SignalError::LengthMismatch(x.len(), y.len()));
    }
    Ok(())
}

/// `‖x − y‖² + N(m_x − m_y)²` over the mean-removed signals.
pub fn distance(x: &BitRateSignal, y: &BitRateSignal) -> Result<f64, SignalError> {
    check_lengths(x, y)?;
    let shape: f64 = x
        .mean_removed()
        .iter()
        .zip(y.mean_removed())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let dm = x.mean() - y.mean();
    Ok(shape + x.len() as f64 * dm * dm)
}

/// `‖x_r − y_r‖²` computed directly.
pub fn distance_direct(x: &BitRateSignal, y: &BitRateSignal) -> Result<f64, SignalError> {
    check_lengths(x, y)?;
    Ok(x.values().iter().zip(y.values()).map(|(a, b)| (a - b) * (a - b)).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub ids: Vec<String>,
    /// Symmetric matrix of squared distances, zero diagonal.
    pub pairwise: Vec<Vec<f64>>,
    pub cover: f64,
    /// `Cover(t | T∖{t})` for every test, when requested.
    pub relative: Option<Vec<f64>>,
}

/// `Cover(T) = ½ Σ_{t1,t2} ‖x_t1 − x_t2‖²` with the full distance matrix.
pub fn cover(tests: &[(String, BitRateSignal)]) -> Result<CoverageReport, SignalError> {
    let Some((_, first)) = tests.first() else {
        return Err(SignalError::EmptySet);
    };
    for (_, s) in tests {
        check_lengths(first, s)?;
    }
    let n = tests.len();
    let mut pairwise = vec![vec![0.0; n]; n];
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d = distance(&tests[i].1, &tests[j].1)?;
            pairwise[i][j] = d;
            pairwise[j][i] = d;
            total += d;
        }
    }
    Ok(CoverageReport {
        ids: tests.iter().map(|(id, _)| id.clone()).collect(),
        pairwise,
        cover: total,
        relative: None,
    })
}

impl CoverageReport {
    /// Fills in `Cover(t | T∖{t})` from the distance matrix.
    pub fn with_relative(mut self) -> Self {
        self.relative = Some(self.pairwise.iter().map(|row| row.iter().sum()).collect());
        self
    }
}

/// `Cover(t | T) = Σ_{t'∈T} ‖x_t' − x_t‖²`.
pub fn cover_rel(test: &BitRateSignal, set: &[BitRateSignal]) -> Result<f64, SignalError> {
    if set.is_empty() {
        return Err(SignalError::EmptySet);
    }
    set.iter().map(|s| distance(s, test)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignalStats {
    pub mean: f64,
    /// Population variance.
    pub variance: f64,
}

pub fn stats(signal: &BitRateSignal) -> SignalStats {
    let m = signal.mean();
    let variance = if signal.is_empty() {
        0.0
    } else {
        signal.values().iter().map(|v| (v - m) * (v - m)).sum::<f64>() / signal.len() as f64
    };
    SignalStats { mean: m, variance }
}
