// Copyright 2026 The stokes-g2 Authors
// SPDX-License-Identifier: Apache-2.0

//! Unit conversions between the boundary units (MHz/2π, meV, ps, ns, nm) and
//! the SI units used internally (rad/s, s, m).

use std::f64::consts::PI;

/// Reduced Planck constant in eV·s (CODATA 2018).
pub const HBAR_EV_S: f64 = 6.582_119_569e-16;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Linear frequency in MHz (i.e. a rate quoted as `gamma/2π`) to rad/s.
pub fn mhz_to_rad_per_s(f_mhz: f64) -> f64 {
    2.0 * PI * f_mhz * 1e6
}

/// Vibrational quantum `ħω` in meV to angular frequency in rad/s.
pub fn mev_to_rad_per_s(e_mev: f64) -> f64 {
    e_mev * 1e-3 / HBAR_EV_S
}

pub fn rad_per_s_to_mev(omega: f64) -> f64 {
    omega * HBAR_EV_S * 1e3
}

/// Lifetime in ps to a decay rate in 1/s.
pub fn lifetime_ps_to_rate(t_ps: f64) -> f64 {
    1.0 / (t_ps * 1e-12)
}

pub const NS: f64 = 1e-9;
pub const PS: f64 = 1e-12;
pub const NM: f64 = 1e-9;
