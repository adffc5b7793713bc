// Copyright 2026 The stokes-g2 Authors
// SPDX-License-Identifier: Apache-2.0

//! Parameter sets of the DBATT molecular pairs studied in the figures, and
//! the boundary-unit [`Scenario`] they are expressed in.

use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{
    CouplingSource, CouplingSpec, DriveSpec, EmitterSpec, GeometrySpec, LevelScheme, ModelSpec, Variant, VibMode,
};
use crate::observables::dressed_states;
use crate::units::{lifetime_ps_to_rate, mev_to_rad_per_s, mhz_to_rad_per_s, NM};

pub const GAMMA0_MHZ: f64 = 21.5;
pub const ALPHA: f64 = 0.3;
pub const REFRACTIVE_INDEX: f64 = 1.5;
pub const LAMBDA0_NM: f64 = 618.0;
/// 257 cm⁻¹ mode.
pub const VIB_MEV: f64 = 31.86;
/// 1331 cm⁻¹ mode, used only by the two-mode scheme.
pub const VIB2_MEV: f64 = 165.02;
pub const VIB_LIFETIME_PS: f64 = 10.0;

/// A model in the units of the parameter tables: rates and detunings over
/// `γ₀`, `γ₀/2π` in MHz, lengths in nm, vibrational quanta in meV.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    /// 1 or 2; a single emitter ignores the second slot and the couplings.
    pub n_emitters: usize,
    pub gamma0_mhz: f64,
    pub alpha: f64,
    pub refractive_index: f64,
    pub lambda0_nm: f64,
    pub k_laser: Vector3<f64>,
    pub k_detect: Vector3<f64>,
    pub dipoles: [Vector3<f64>; 2],
    pub positions_nm: [Vector3<f64>; 2],
    pub coupling_source: CouplingSource,
    /// Ignored when the couplings come from the geometry.
    pub v: f64,
    pub gamma12: f64,
    pub delta: f64,
    pub delta0: f64,
    /// Real `Ω_j`, equal for both emitters.
    pub rabi: f64,
    /// `ħω_v` per mode; the scheme decides how many are used.
    pub vib_mev: Vec<f64>,
    pub vib_lifetime_ps: f64,
    pub scheme: LevelScheme,
    pub variant: Variant,
}

impl Scenario {
    pub fn model(&self) -> Result<ModelSpec> {
        if !(1..=2).contains(&self.n_emitters) {
            return Err(Error::UnsupportedScheme(format!("{} emitters", self.n_emitters)));
        }
        let n_modes = self.scheme.vib_modes();
        if self.vib_mev.len() < n_modes {
            return Err(Error::SchemeMismatch(format!(
                "scheme {} needs {n_modes} vibrational energies",
                self.scheme.name()
            )));
        }
        let g0 = mhz_to_rad_per_s(self.gamma0_mhz);
        let delta0 = self.delta0 * g0;
        let delta = if self.n_emitters == 2 { self.delta * g0 } else { 0.0 };
        let modes: Vec<VibMode> = self.vib_mev[..n_modes]
            .iter()
            .map(|&e| VibMode {
                omega: mev_to_rad_per_s(e),
                gamma: lifetime_ps_to_rate(self.vib_lifetime_ps),
            })
            .collect();
        let detunings = [delta0 + delta / 2.0, delta0 - delta / 2.0];
        let emitters = (0..self.n_emitters)
            .map(|j| EmitterSpec {
                detuning: detunings[j],
                gamma: g0,
                dipole_dir: self.dipoles[j],
                position: self.positions_nm[j] * NM,
                vib_modes: modes.clone(),
            })
            .collect();
        let coupling = if self.n_emitters == 2 {
            CouplingSpec {
                v: self.v * g0,
                gamma12: self.gamma12 * g0,
                source: CouplingSource::Override,
            }
        } else {
            CouplingSpec::none()
        };
        let m = ModelSpec {
            emitters,
            geometry: GeometrySpec {
                refractive_index: self.refractive_index,
                lambda0: self.lambda0_nm * NM,
                k_laser_dir: self.k_laser,
                k_detect_dir: self.k_detect,
            },
            drive: DriveSpec {
                rabi: vec![Complex64::new(self.rabi * g0, 0.0); self.n_emitters],
                delta0,
            },
            coupling,
            alpha: self.alpha,
            scheme: self.scheme,
            variant: self.variant,
        };
        let m = if self.n_emitters == 2 && self.coupling_source == CouplingSource::FromGeometry {
            m.with_geometry_couplings()?
        } else {
            m
        };
        m.validate()?;
        Ok(m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    Fig2a,
    Fig2b,
    Fig2c,
    Fig3a,
    Fig3b,
    Fig3c,
    Fig3d,
    SmA,
    SmB,
}

/// Where the laser sits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LaserTuning {
    /// `ω_L = ω₀ − Λ`.
    Superradiant,
    /// `ω_L = ω₀ + Λ`.
    Subradiant,
    /// `Δ₀` in units of `γ₀`.
    Detuned(f64),
}

impl Preset {
    pub const ALL: [Preset; 9] = [
        Preset::Fig2a,
        Preset::Fig2b,
        Preset::Fig2c,
        Preset::Fig3a,
        Preset::Fig3b,
        Preset::Fig3c,
        Preset::Fig3d,
        Preset::SmA,
        Preset::SmB,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2a => "fig2a",
            Preset::Fig2b => "fig2b",
            Preset::Fig2c => "fig2c",
            Preset::Fig3a => "fig3a",
            Preset::Fig3b => "fig3b",
            Preset::Fig3c => "fig3c",
            Preset::Fig3d => "fig3d",
            Preset::SmA => "smA",
            Preset::SmB => "smB",
        }
    }

    pub fn tuning(self) -> LaserTuning {
        match self {
            Preset::Fig2a => LaserTuning::Superradiant,
            Preset::Fig2b => LaserTuning::Subradiant,
            Preset::Fig3b => LaserTuning::Detuned(-0.93),
            Preset::SmA => LaserTuning::Detuned(-21.95),
            Preset::SmB => LaserTuning::Detuned(6.98),
            _ => LaserTuning::Detuned(0.0),
        }
    }

    pub fn scenario(self) -> Scenario {
        // (dipole, r₂ in nm, V, γ₁₂, δ, |Ω|)
        let (dipole, r2, v, gamma12, delta, rabi) = match self {
            Preset::Fig2a | Preset::Fig2b | Preset::Fig2c => (Vector3::x(), Vector3::new(19.0, 0.0, 5.7), -17.0, 0.3, 14.0, 3.15),
            Preset::Fig3a | Preset::Fig3b => (Vector3::z(), Vector3::new(27.0, 0.0, 0.0), 2.98, 0.29, 5.0, 1.5),
            Preset::Fig3c | Preset::Fig3d => (Vector3::z(), Vector3::new(400.0, 0.0, 0.0), -0.04, -1e-3, 5.0, 1.5),
            // The tabulated V of these two pairs contradicts their own Λ; the
            // caption's 9.19 reproduces Λ = 22.67 and 20.49.
            Preset::SmA => (Vector3::x(), Vector3::new(19.0, 0.0, 5.7), 9.19, 0.3, 41.44, 3.15),
            Preset::SmB => (Vector3::x(), Vector3::new(27.0, 0.0, 0.0), 9.19, 0.29, 36.63, 1.5),
        };
        let delta0 = match self.tuning() {
            LaserTuning::Detuned(d) => d,
            LaserTuning::Superradiant => dressed_states(v, delta).expect("coupled preset").superradiant_delta0(),
            LaserTuning::Subradiant => dressed_states(v, delta).expect("coupled preset").subradiant_delta0(),
        };
        Scenario {
            n_emitters: 2,
            gamma0_mhz: GAMMA0_MHZ,
            alpha: ALPHA,
            refractive_index: REFRACTIVE_INDEX,
            lambda0_nm: LAMBDA0_NM,
            k_laser: Vector3::y(),
            k_detect: Vector3::y(),
            dipoles: [dipole; 2],
            positions_nm: [Vector3::zeros(), r2],
            coupling_source: CouplingSource::Override,
            v,
            gamma12,
            delta,
            delta0,
            rabi,
            vib_mev: vec![VIB_MEV, VIB2_MEV],
            vib_lifetime_ps: VIB_LIFETIME_PS,
            scheme: LevelScheme::OneVib,
            variant: Variant::Main,
        }
    }

    /// Main-variant model with one vibrational mode.
    pub fn model(self) -> ModelSpec {
        self.scenario().model().expect("presets are valid")
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidInput(format!("unknown preset '{s}'")))
    }
}

/// Adds the 165.02 meV mode (same lifetime) to every emitter and switches to
/// the two-mode scheme.
pub fn with_second_mode(model: &ModelSpec) -> Result<ModelSpec> {
    let mut m = model.clone();
    for e in &mut m.emitters {
        let first = *e
            .vib_modes
            .first()
            .ok_or_else(|| Error::SchemeMismatch("two-mode scheme needs a first mode".into()))?;
        e.vib_modes = vec![
            first,
            VibMode {
                omega: mev_to_rad_per_s(VIB2_MEV),
                gamma: first.gamma,
            },
        ];
    }
    m.scheme = LevelScheme::TwoVib;
    m.validate()?;
    Ok(m)
}
