// Copyright 2026 The stokes-g2 Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Single-excitation eigenstates of the coupled pair.
///
/// `upper`/`lower` are the amplitudes over `{|g₁e₂⟩, |e₁g₂⟩}` of the states
/// at `ω₀ + Λ` and `ω₀ − Λ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DressedStates {
    /// Mixing angle with `tan 2θ = 2V/δ`, reduced to `[0, π/2)`.
    pub theta: f64,
    /// `Λ = √(V² + (δ/2)²)`.
    pub lambda_big: f64,
    /// `Δ₀` that puts the laser on the upper state (`ω_L = ω₀ + Λ`).
    pub omega_plus: f64,
    /// `Δ₀` that puts the laser on the lower state (`ω_L = ω₀ − Λ`).
    pub omega_minus: f64,
    pub upper: [f64; 2],
    pub lower: [f64; 2],
}

impl DressedStates {
    /// Laser preset on the bright state of a J-aggregate, `ω_L = ω₀ − Λ`.
    pub fn superradiant_delta0(&self) -> f64 {
        self.omega_minus
    }

    /// `ω_L = ω₀ + Λ`.
    pub fn subradiant_delta0(&self) -> f64 {
        self.omega_plus
    }

    /// Two-photon resonance, `ω_L = ω₀`.
    pub fn two_photon_delta0(&self) -> f64 {
        0.0
    }
}

/// Diagonalizes the `{|g₁e₂⟩, |e₁g₂⟩}` block `[[−δ/2, V], [V, δ/2]]`.
pub fn dressed_states(v: f64, delta: f64) -> Result<DressedStates> {
    if v == 0.0 && delta == 0.0 {
        return Err(Error::DegenerateDressing);
    }
    if !v.is_finite() || !delta.is_finite() {
        return Err(Error::NonFinite);
    }
    let lambda_big = v.hypot(delta / 2.0);
    let half = 0.5 * (2.0 * v).atan2(delta);
    let (s, c) = half.sin_cos();
    let theta = if half < 0.0 { half + PI / 2.0 } else { half };
    let theta = if theta >= PI / 2.0 { theta - PI / 2.0 } else { theta };
    Ok(DressedStates {
        theta,
        lambda_big,
        omega_plus: -lambda_big,
        omega_minus: lambda_big,
        upper: [s, c],
        lower: [c, -s],
    })
}
