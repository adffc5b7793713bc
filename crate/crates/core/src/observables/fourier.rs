// Copyright 2026 The stokes-g2 Authors
// SPDX-License-Identifier: Apache-2.0

//! Discrete Fourier analysis of oscillations in a correlation curve.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// One-sided magnitude spectrum on angular frequencies `k · bin`.
#[derive(Clone, Debug)]
pub struct Dft {
    pub omega: Vec<f64>,
    pub magnitude: Vec<f64>,
    /// Angular-frequency spacing `2π/(N h)`.
    pub bin: f64,
}

/// Hann-tapered, mean-removed DFT of the samples with `t ∈ [t0, t1]`.
/// The samples inside the window must be evenly spaced.
pub fn dft_magnitude(times: &[f64], values: &[f64], t0: f64, t1: f64) -> Result<Dft> {
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            found: values.len(),
        });
    }
    let idx: Vec<usize> = (0..times.len()).filter(|&i| times[i] >= t0 && times[i] <= t1).collect();
    if idx.len() < 8 {
        return Err(Error::InvalidInput("fewer than 8 samples inside the window".into()));
    }
    let n = idx.len();
    let h = (times[idx[n - 1]] - times[idx[0]]) / (n - 1) as f64;
    for (k, &i) in idx.iter().enumerate() {
        if (times[i] - times[idx[0]] - k as f64 * h).abs() > 1e-6 * h {
            return Err(Error::NonUniformGrid);
        }
    }
    let mean = idx.iter().map(|&i| values[i]).sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = idx
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            let w = 0.5 - 0.5 * (2.0 * PI * k as f64 / (n - 1) as f64).cos();
            Complex::new((values[i] - mean) * w, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let bin = 2.0 * PI / (n as f64 * h);
    let half = n / 2 + 1;
    Ok(Dft {
        omega: (0..half).map(|k| k as f64 * bin).collect(),
        magnitude: buf[..half].iter().map(|z| z.norm()).collect(),
        bin,
    })
}

/// Peak height next to an expected frequency against the local background.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeakReport {
    pub peak_omega: f64,
    pub peak: f64,
    /// Median magnitude in the surrounding band, excluding the peak zone.
    pub floor: f64,
    pub ratio: f64,
    /// `|peak_omega − target| / bin`.
    pub offset_bins: f64,
}

impl Dft {
    pub fn nearest_bin(&self, omega: f64) -> usize {
        ((omega / self.bin).round().max(0.0) as usize).min(self.omega.len() - 1)
    }

    /// Indices of strict interior local maxima.
    pub fn local_maxima(&self) -> Vec<usize> {
        let m = &self.magnitude;
        (1..m.len().saturating_sub(1)).filter(|&k| m[k] > m[k - 1] && m[k] >= m[k + 1]).collect()
    }

    /// Largest local maximum; low-frequency leakage from a slowly varying
    /// envelope is monotone and never qualifies.
    pub fn dominant_peak(&self) -> Option<usize> {
        self.local_maxima()
            .into_iter()
            .max_by(|&a, &b| self.magnitude[a].total_cmp(&self.magnitude[b]))
    }

    /// Largest magnitude within `±peak_bins` of `target`, compared with the
    /// median over `±floor_bins` outside that zone.
    pub fn peak_over_floor(&self, target: f64, peak_bins: usize, floor_bins: usize) -> PeakReport {
        let c = self.nearest_bin(target);
        let last = self.omega.len() - 1;
        let lo = c.saturating_sub(peak_bins);
        let hi = (c + peak_bins).min(last);
        let k = (lo..=hi)
            .max_by(|&a, &b| self.magnitude[a].total_cmp(&self.magnitude[b]))
            .unwrap();
        let mut band: Vec<f64> = (c.saturating_sub(floor_bins)..=(c + floor_bins).min(last))
            .filter(|&i| i < lo || i > hi)
            .map(|i| self.magnitude[i])
            .collect();
        band.sort_by(f64::total_cmp);
        let floor = if band.is_empty() { 0.0 } else { band[band.len() / 2] };
        PeakReport {
            peak_omega: self.omega[k],
            peak: self.magnitude[k],
            floor,
            ratio: self.magnitude[k] / floor,
            offset_bins: (self.omega[k] - target).abs() / self.bin,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_single_tone() {
        let h = 0.01;
        let t: Vec<f64> = (0..4000).map(|k| k as f64 * h).collect();
        let w0 = 7.3;
        let v: Vec<f64> = t.iter().map(|x| 1.0 + 0.3 * (w0 * x).cos() * (-x / 30.0).exp() + 0.5 * (-x).exp()).collect();
        let d = dft_magnitude(&t, &v, 1.0, 39.0).unwrap();
        let k = d.dominant_peak().unwrap();
        assert!((d.omega[k] - w0).abs() <= d.bin);
        let rep = d.peak_over_floor(w0, 2, 40);
        assert!(rep.ratio > 3.0 && rep.offset_bins <= 2.0);
    }

    #[test]
    fn rejects_uneven_window() {
        let t = vec![0.0, 1.0, 2.0, 3.5, 4.0, 5.0, 6.0, 7.0, 8.0];
        assert!(matches!(dft_magnitude(&t, &[0.0; 9], 0.0, 8.0), Err(Error::NonUniformGrid)));
    }
}
