// Copyright 2026 The stokes-g2 Authors
// SPDX-License-Identifier: Apache-2.0

//! Physical description of one or two emitters with vibrational levels and
//! the construction of their Hamiltonian and Liouvillian.
//!
//! All frequencies and rates are angular (rad/s), lengths are in metres and
//! the Hamiltonian is `H/ħ` in the frame rotating at the laser frequency.

mod coupling;
mod liouvillian;
mod space;

use nalgebra::Vector3;
use num_complex::Complex64;

pub use coupling::dipole_couplings;
pub(crate) use liouvillian::check_zpl_rates;
pub use liouvillian::{build_hamiltonian, build_liouvillian, zpl_rate_matrix, Superoperator};
pub use space::{build_space, local_operator, HilbertSpace, Level, LevelScheme};

use crate::error::{Error, Result};

const UNIT_TOL: f64 = 1e-12;

/// A 1-phonon state of the electronic ground state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VibMode {
    /// Vibrational angular frequency `ω_v`.
    pub omega: f64,
    /// Non-radiative relaxation rate `γ_v` back to `|g⟩`.
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmitterSpec {
    /// Laser detuning `Δ_j = ω_j − ω_L`.
    pub detuning: f64,
    /// Total decay rate of `|e_j⟩`.
    pub gamma: f64,
    pub dipole_dir: Vector3<f64>,
    pub position: Vector3<f64>,
    pub vib_modes: Vec<VibMode>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeometrySpec {
    pub refractive_index: f64,
    /// Vacuum wavelength of the mean transition frequency.
    pub lambda0: f64,
    pub k_laser_dir: Vector3<f64>,
    pub k_detect_dir: Vector3<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriveSpec {
    /// Rabi frequency `Ω_j` per emitter.
    pub rabi: Vec<Complex64>,
    /// Mean laser detuning `Δ₀ = ω₀ − ω_L`.
    pub delta0: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingSource {
    FromGeometry,
    Override,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingSpec {
    /// Coherent dipole-dipole coupling `V`.
    pub v: f64,
    /// Crossed decay rate `γ₁₂`.
    pub gamma12: f64,
    pub source: CouplingSource,
}

impl CouplingSpec {
    pub fn none() -> Self {
        CouplingSpec {
            v: 0.0,
            gamma12: 0.0,
            source: CouplingSource::Override,
        }
    }
}

/// Which master equation to assemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// ZPL at `αγ`, Stokes at `(1−α)γ`, crossed ZPL decay, vibrational relaxation.
    Main,
    /// Emitters as bare two-level systems, ZPL at the full `γ`.
    TlsFramework,
    /// Full `γ` on the ZPL dissipator, vibrational relaxation kept, no Stokes decay.
    AltZplRate,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Main => "main",
            Variant::TlsFramework => "tls",
            Variant::AltZplRate => "alt",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub emitters: Vec<EmitterSpec>,
    pub geometry: GeometrySpec,
    pub drive: DriveSpec,
    pub coupling: CouplingSpec,
    /// Debye-Waller/Franck-Condon factor: fraction of emission into the ZPL.
    pub alpha: f64,
    pub scheme: LevelScheme,
    pub variant: Variant,
}

fn is_unit(v: &Vector3<f64>) -> bool {
    (v.norm() - 1.0).abs() <= UNIT_TOL
}

impl ModelSpec {
    pub fn n_emitters(&self) -> usize {
        self.emitters.len()
    }

    /// Reference decay rate: `√(γ₁γ₂)` for a pair, `γ₁` for a single emitter.
    pub fn gamma0(&self) -> f64 {
        match self.emitters.as_slice() {
            [a, b] => (a.gamma * b.gamma).sqrt(),
            [a] => a.gamma,
            _ => f64::NAN,
        }
    }

    /// Emitter detuning `δ = Δ₁ − Δ₂` (zero for one emitter).
    pub fn delta(&self) -> f64 {
        match self.emitters.as_slice() {
            [a, b] => a.detuning - b.detuning,
            _ => 0.0,
        }
    }

    /// `r₂ − r₁`.
    pub fn r12(&self) -> Vector3<f64> {
        match self.emitters.as_slice() {
            [a, b] => b.position - a.position,
            _ => Vector3::zeros(),
        }
    }

    /// Copy with `Δ₀` replaced and each `Δ_j` shifted so that `δ` is kept.
    pub fn with_delta0(&self, delta0: f64) -> ModelSpec {
        let mut m = self.clone();
        let shift = delta0 - self.drive.delta0;
        for e in &mut m.emitters {
            e.detuning += shift;
        }
        m.drive.delta0 = delta0;
        m
    }

    /// Copy with every `Ω_j` set to the same real amplitude.
    pub fn with_rabi(&self, rabi: f64) -> ModelSpec {
        let mut m = self.clone();
        for r in &mut m.drive.rabi {
            *r = Complex64::new(rabi, 0.0);
        }
        m
    }

    /// Copy switched to another level scheme and variant. Surplus vibrational
    /// modes are dropped; missing modes are an error.
    pub fn with_scheme(&self, scheme: LevelScheme, variant: Variant) -> Result<ModelSpec> {
        let mut m = self.clone();
        for e in &mut m.emitters {
            if e.vib_modes.len() < scheme.vib_modes() {
                return Err(Error::SchemeMismatch(format!(
                    "scheme {} needs {} vibrational modes, emitter provides {}",
                    scheme.name(),
                    scheme.vib_modes(),
                    e.vib_modes.len()
                )));
            }
            e.vib_modes.truncate(scheme.vib_modes());
        }
        m.scheme = scheme;
        m.variant = variant;
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.emitters.len();
        if !(1..=2).contains(&n) {
            return Err(Error::UnsupportedScheme(format!("{n} emitters")));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidInput(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        match (self.variant, self.scheme) {
            (Variant::TlsFramework, LevelScheme::Tls) => {}
            (Variant::TlsFramework, s) => {
                return Err(Error::SchemeMismatch(format!(
                    "TLS framework requires the tls scheme, got {}",
                    s.name()
                )))
            }
            (_, LevelScheme::Tls) => {
                return Err(Error::SchemeMismatch(
                    "main/alt variants require vibrational levels".into(),
                ))
            }
            _ => {}
        }
        for (j, e) in self.emitters.iter().enumerate() {
            if !(e.gamma > 0.0 && e.gamma.is_finite()) {
                return Err(Error::NonPositiveRates(format!("gamma of emitter {}", j + 1)));
            }
            if !e.detuning.is_finite() {
                return Err(Error::InvalidInput(format!("detuning of emitter {}", j + 1)));
            }
            if !is_unit(&e.dipole_dir) {
                return Err(Error::InvalidInput(format!("dipole of emitter {} is not a unit vector", j + 1)));
            }
            if e.vib_modes.len() != self.scheme.vib_modes() {
                return Err(Error::SchemeMismatch(format!(
                    "emitter {} has {} vibrational modes, scheme {} needs {}",
                    j + 1,
                    e.vib_modes.len(),
                    self.scheme.name(),
                    self.scheme.vib_modes()
                )));
            }
            for m in &e.vib_modes {
                if !(m.gamma > 0.0) {
                    return Err(Error::NonPositiveRates("vibrational relaxation".into()));
                }
                if !(m.omega > 0.0) {
                    return Err(Error::InvalidInput("vibrational frequency must be positive".into()));
                }
            }
        }
        let g = &self.geometry;
        if !(g.refractive_index >= 1.0) || !(g.lambda0 > 0.0) {
            return Err(Error::InvalidInput("refractive index >= 1 and lambda0 > 0 required".into()));
        }
        if !is_unit(&g.k_laser_dir) || !is_unit(&g.k_detect_dir) {
            return Err(Error::InvalidInput("laser and detection directions must be unit vectors".into()));
        }
        if self.drive.rabi.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.drive.rabi.len(),
            });
        }
        if self.drive.rabi.iter().any(|r| !r.re.is_finite() || !r.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mean_detuning = self.emitters.iter().map(|e| e.detuning).sum::<f64>() / n as f64;
        let scale = self.gamma0().max(mean_detuning.abs());
        if (mean_detuning - self.drive.delta0).abs() > 1e-9 * scale {
            return Err(Error::InvalidInput(
                "mean emitter detuning must equal drive.delta0".into(),
            ));
        }
        if !self.coupling.v.is_finite() || !self.coupling.gamma12.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(())
    }
}
