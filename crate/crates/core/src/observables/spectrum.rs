// Copyright 2026 The stokes-g2 Authors
// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;
use rayon::prelude::*;

use super::{field_operator, mean_intensity, phase_factor, FilterKind};
use crate::dynamics::steady_state;
use crate::error::{Error, Result};
use crate::model::ModelSpec;

/// Stokes excitation spectrum at one drive strength.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumResult {
    /// `Δ₀/γ₀`.
    pub detuning: Vec<f64>,
    /// `⟨I_St⟩/|ξ|²`.
    pub intensity: Vec<f64>,
    /// `|Ω|/γ₀`.
    pub rabi: f64,
}

/// Mean Stokes intensity over a `Δ₀` grid (rad/s) for each Rabi frequency
/// (rad/s), with `δ` held fixed.
pub fn excitation_spectrum(model: &ModelSpec, delta0_grid: &[f64], rabi_list: &[f64]) -> Result<Vec<SpectrumResult>> {
    if delta0_grid.is_empty() || rabi_list.is_empty() {
        return Err(Error::InvalidInput("spectrum grids must be non-empty".into()));
    }
    let g0 = model.gamma0();
    let space = model.space()?;
    let omegas: Vec<f64> = model.emitters[0].vib_modes.iter().map(|m| m.omega).collect();
    let phi = phase_factor(&model.geometry, model.r12(), FilterKind::StokesAll, &omegas);
    let field = field_operator(&space, FilterKind::StokesAll, phi)?;
    rabi_list
        .iter()
        .map(|&rabi| {
            let driven = model.with_rabi(rabi);
            let intensity = delta0_grid
                .par_iter()
                .map(|&d0| {
                    let m = driven.with_delta0(d0);
                    let rho = steady_state(&m.liouvillian()?)?;
                    // clip rounding residue of an undriven ground state
                    Ok(mean_intensity(&rho, &field).max(0.0))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(SpectrumResult {
                detuning: delta0_grid.iter().map(|d| d / g0).collect(),
                intensity,
                rabi: Complex64::new(rabi, 0.0).norm() / g0,
            })
        })
        .collect()
}

/// Strength of the two-photon feature near `Δ₀ = 0` relative to the
/// single-excitation peaks at `±Λ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CentralFeature {
    /// Position (`Δ₀/γ₀`) of the central local maximum, if any.
    pub position: Option<f64>,
    /// Topographic prominence of that maximum inside `[−Λ, Λ]`.
    pub prominence: f64,
    /// Largest intensity within `Λ/4` of `±Λ`.
    pub side_height: f64,
    pub ratio: f64,
}

/// Finds the most prominent local maximum with `|Δ₀| ≤ Λ/2`. Its prominence
/// is the drop to the higher of the two valley floors between it and the
/// nearest higher point (or the window edge `±Λ`) on either side.
pub fn central_feature(spectrum: &SpectrumResult, lambda_over_gamma0: f64) -> CentralFeature {
    let x = &spectrum.detuning;
    let y = &spectrum.intensity;
    let lam = lambda_over_gamma0.abs();
    let window: Vec<usize> = (0..x.len()).filter(|&i| x[i].abs() <= lam).collect();
    let side_height = (0..x.len())
        .filter(|&i| (x[i].abs() - lam).abs() <= lam / 4.0)
        .map(|i| y[i])
        .fold(0.0f64, f64::max);
    let mut best: Option<(usize, f64)> = None;
    if window.len() >= 3 {
        let (first, last) = (window[0], *window.last().unwrap());
        for &i in &window {
            if i == first || i == last || x[i].abs() > lam / 2.0 {
                continue;
            }
            if !(y[i] > y[i - 1] && y[i] >= y[i + 1]) {
                continue;
            }
            let mut left_min = y[i];
            let mut j = i;
            while j > first {
                j -= 1;
                if y[j] > y[i] {
                    break;
                }
                left_min = left_min.min(y[j]);
            }
            let mut right_min = y[i];
            let mut j = i;
            while j < last {
                j += 1;
                if y[j] > y[i] {
                    break;
                }
                right_min = right_min.min(y[j]);
            }
            let prom = y[i] - left_min.max(right_min);
            if best.is_none_or(|(_, p)| prom > p) {
                best = Some((i, prom));
            }
        }
    }
    let prominence = best.map_or(0.0, |(_, p)| p);
    CentralFeature {
        position: best.map(|(i, _)| x[i]),
        prominence,
        side_height,
        ratio: if side_height > 0.0 { prominence / side_height } else { 0.0 },
    }
}
