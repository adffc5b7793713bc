// Copyright 2026 The stokes-g2 Authors
// SPDX-License-Identifier: Apache-2.0

use super::CorrelationResult;
use crate::error::{Error, Result};

const UNIFORM_TOL: f64 = 1e-6;

fn grid_step(tau_ns: &[f64]) -> Result<f64> {
    if tau_ns.len() < 2 || tau_ns[0] != 0.0 {
        return Err(Error::NonUniformGrid);
    }
    let h = tau_ns[1] - tau_ns[0];
    let uniform = tau_ns
        .iter()
        .enumerate()
        .all(|(k, t)| (t - k as f64 * h).abs() <= UNIFORM_TOL * h);
    if !(h > 0.0) || !uniform {
        return Err(Error::NonUniformGrid);
    }
    Ok(h)
}

/// Discrete unit-sum Gaussian of the given FWHM on spacing `h`.
fn kernel(fwhm: f64, h: f64) -> Vec<f64> {
    if fwhm == 0.0 {
        return vec![1.0];
    }
    let sigma = fwhm / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt());
    let half = (6.0 * sigma / h).ceil() as i64;
    let w: Vec<f64> = (-half..=half)
        .map(|m| (-(m as f64 * h).powi(2) / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

fn smooth(values: &[f64], kern: &[f64]) -> Vec<f64> {
    let n = values.len() as i64;
    let half = (kern.len() / 2) as i64;
    // g² is even in τ: mirror below zero, hold the last value past the end
    let at = |i: i64| values[i.unsigned_abs().min(n as u64 - 1) as usize];
    (0..n)
        .map(|i| kern.iter().enumerate().map(|(k, w)| w * at(i + k as i64 - half)).sum())
        .collect()
}

/// Box average over `[c − b/2, c + b/2)` at centres `c = k·b`.
fn rebin(values: &[f64], h: f64, bin: f64) -> (Vec<f64>, Vec<f64>) {
    let n = values.len() as i64;
    let ratio = bin / h;
    let n_bins = ((n - 1) as f64 / ratio + 1e-9).floor() as i64 + 1;
    let mut centres = Vec::new();
    let mut out = Vec::new();
    for k in 0..n_bins {
        let lo = ((k as f64 - 0.5) * ratio - 1e-9).ceil() as i64;
        let hi = ((k as f64 + 0.5) * ratio - 1e-9).ceil() as i64;
        if hi > n {
            break;
        }
        let idx: Vec<i64> = (lo..hi).collect();
        if idx.is_empty() {
            continue;
        }
        let sum: f64 = idx.iter().map(|i| values[i.unsigned_abs() as usize]).sum();
        centres.push(k as f64 * bin);
        out.push(sum / idx.len() as f64);
    }
    (centres, out)
}

/// Gaussian jitter of the given FWHM followed by binning, applied to every
/// curve of `result`. Times in ns; the grid must start at zero and be uniform.
pub fn detector_convolve(result: &CorrelationResult, fwhm_ns: f64, bin_ns: f64) -> Result<CorrelationResult> {
    if !(fwhm_ns >= 0.0) || !(bin_ns > 0.0) {
        return Err(Error::InvalidInput("need fwhm >= 0 and bin > 0".into()));
    }
    let h = grid_step(&result.tau_ns)?;
    if bin_ns < h * (1.0 - 1e-9) {
        return Err(Error::InvalidInput("bin narrower than the grid spacing".into()));
    }
    let kern = kernel(fwhm_ns, h);
    let apply = |v: &[f64]| rebin(&smooth(v, &kern), h, bin_ns);
    let (tau, g2) = apply(&result.g2);
    let opt = |v: &Option<Vec<f64>>| v.as_deref().map(|x| apply(x).1);
    Ok(CorrelationResult {
        filter: result.filter,
        tau_ns: tau,
        g2,
        g2_d: opt(&result.g2_d),
        g2_coh_i: opt(&result.g2_coh_i),
        g2_coh_rho: opt(&result.g2_coh_rho),
        g2_approx: opt(&result.g2_approx),
        mean_intensity: result.mean_intensity,
        coherent_intensity: result.coherent_intensity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::FilterKind;

    fn curve(tau: Vec<f64>, g2: Vec<f64>) -> CorrelationResult {
        CorrelationResult {
            filter: FilterKind::StokesAll,
            tau_ns: tau,
            g2,
            g2_d: None,
            g2_coh_i: None,
            g2_coh_rho: None,
            g2_approx: None,
            mean_intensity: 1.0,
            coherent_intensity: 0.0,
        }
    }

    #[test]
    fn identity_without_jitter() {
        let tau: Vec<f64> = (0..50).map(|k| k as f64 * 0.01).collect();
        let g: Vec<f64> = tau.iter().map(|t| (3.0 * t).sin() + 2.0).collect();
        let r = detector_convolve(&curve(tau.clone(), g.clone()), 0.0, 0.01).unwrap();
        assert_eq!(r.g2, g);
        for (a, b) in r.tau_ns.iter().zip(&tau) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_preserved() {
        let tau: Vec<f64> = (0..2000).map(|k| k as f64 * 0.004).collect();
        let r = detector_convolve(&curve(tau, vec![1.0; 2000]), 0.4, 0.308).unwrap();
        assert!(r.g2.iter().all(|g| (g - 1.0).abs() < 1e-9));
    }

    #[test]
    fn spike_suppressed_and_far_region_kept() {
        let h = 0.001;
        let tau: Vec<f64> = (0..20000).map(|k| k as f64 * h).collect();
        let g: Vec<f64> = tau.iter().map(|t| 0.5 + 0.5 * (-t / 0.01).exp()).collect();
        let r = detector_convolve(&curve(tau, g), 0.4, 0.004).unwrap();
        assert!(r.g2[0] - 0.5 < 0.2 * 0.5);
        let far = r.tau_ns.iter().position(|t| *t > 5.0).unwrap();
        assert!((r.g2[far] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn non_uniform_rejected() {
        let r = curve(vec![0.0, 0.1, 0.3], vec![1.0; 3]);
        assert!(matches!(detector_convolve(&r, 0.1, 0.1), Err(Error::NonUniformGrid)));
    }
}
