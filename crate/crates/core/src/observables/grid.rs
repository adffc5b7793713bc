// Copyright 2026 The stokes-g2 Authors
// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::units::PS;

/// `n` delays from `0` to `tau_max` inclusive, evenly spaced.
pub fn uniform_tau_grid(tau_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(tau_max > 0.0) || n < 2 {
        return Err(Error::InvalidInput("need tau_max > 0 and at least two points".into()));
    }
    Ok((0..n).map(|k| tau_max * k as f64 / (n - 1) as f64).collect())
}

/// Zero, then logarithmic from 1 ps up to `1/γ₀`, then linear to `tau_max`.
///
/// The logarithmic part gets a quarter of the points (at least 60), which
/// keeps the spacing near the 10 ps vibrational scale well below 2 ps.
pub fn default_tau_grid(tau_max: f64, n: usize, gamma0: f64) -> Result<Vec<f64>> {
    if !(tau_max > PS) || n < 4 || !(gamma0 > 0.0) {
        return Err(Error::InvalidInput("need tau_max > 1 ps, n >= 4 and gamma0 > 0".into()));
    }
    let knee = (1.0 / gamma0).min(tau_max);
    let n_log = (n / 4).clamp(60, 400).min(n - 2);
    let n_lin = n - 1 - n_log;
    let mut out = Vec::with_capacity(n);
    out.push(0.0);
    let (a, b) = (PS.ln(), knee.ln());
    for k in 0..n_log {
        out.push((a + (b - a) * k as f64 / (n_log - 1).max(1) as f64).exp());
    }
    if knee < tau_max && n_lin > 0 {
        for k in 1..=n_lin {
            out.push(knee + (tau_max - knee) * k as f64 / n_lin as f64);
        }
    }
    out.dedup_by(|a, b| *a <= *b);
    Ok(out)
}
