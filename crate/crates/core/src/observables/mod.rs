// Copyright 2026 The stokes-g2 Authors
// SPDX-License-Identifier: Apache-2.0

//! Filtered field operators, intensities and intensity correlations.

mod detector;
mod dressed;
pub mod fourier;
mod grid;
mod spectrum;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use num_complex::Complex64;

pub use detector::detector_convolve;
pub use dressed::{dressed_states, DressedStates};
pub use grid::{default_tau_grid, uniform_tau_grid};
pub use spectrum::{central_feature, excitation_spectrum, CentralFeature, SpectrumResult};

use crate::dynamics::{real_part, steady_state, DensityMatrix, Regression};
use crate::error::{Error, Result};
use crate::linops::{c64, dagger, ComplexMatrix};
use crate::model::{GeometrySpec, HilbertSpace, Level, LevelScheme, ModelSpec, Superoperator};
use crate::units::SPEED_OF_LIGHT;

/// Mean intensities below this (in units of `|ξ|²`) count as zero.
const ZERO_INTENSITY: f64 = 1e-13;

/// Spectral window selecting the detected photons.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FilterKind {
    Zpl,
    /// All Stokes lines.
    StokesAll,
    /// Stokes line of one vibrational mode (1-based).
    StokesMode(u8),
}

impl FilterKind {
    pub fn is_stokes(self) -> bool {
        !matches!(self, FilterKind::Zpl)
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterKind::Zpl => write!(f, "zpl"),
            FilterKind::StokesAll => write!(f, "stokes"),
            FilterKind::StokesMode(n) => write!(f, "stokes-mode{n}"),
        }
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zpl" => Ok(FilterKind::Zpl),
            "stokes" | "stokes-all" => Ok(FilterKind::StokesAll),
            other => other
                .strip_prefix("stokes-mode")
                .and_then(|n| n.parse::<u8>().ok())
                .filter(|n| *n >= 1)
                .map(FilterKind::StokesMode)
                .ok_or_else(|| Error::InvalidInput(format!("unknown filter '{s}'"))),
        }
    }
}

/// Relative phase `[k_L − k̂_d n ω/c]·r₁₂` between the two emitters'
/// contributions to the detected field.
///
/// `ω` is `ω₀` for the ZPL and `ω₀ − ω_v` for a Stokes line (mode 1 for
/// `StokesAll`). The laser wavenumber is taken at `ω₀`.
pub fn phase_factor(geometry: &GeometrySpec, r12: Vector3<f64>, filter: FilterKind, vib_omegas: &[f64]) -> f64 {
    let omega0 = 2.0 * PI * SPEED_OF_LIGHT / geometry.lambda0;
    let n_over_c = geometry.refractive_index / SPEED_OF_LIGHT;
    let omega = match filter {
        FilterKind::Zpl => omega0,
        FilterKind::StokesAll => omega0 - vib_omegas.first().copied().unwrap_or(0.0),
        FilterKind::StokesMode(n) => omega0 - vib_omegas.get(n as usize - 1).copied().unwrap_or(0.0),
    };
    let k = geometry.k_laser_dir * (n_over_c * omega0) - geometry.k_detect_dir * (n_over_c * omega);
    k.dot(&r12)
}

/// Positive-frequency part of the filtered field, with `ξ = 1`.
#[derive(Clone, Debug)]
pub struct FieldOperator {
    pub matrix: ComplexMatrix,
    pub phase: f64,
    pub xi: f64,
}

impl FieldOperator {
    /// `I = E⁻E⁺`.
    pub fn intensity(&self) -> ComplexMatrix {
        dagger(&self.matrix) * &self.matrix
    }
}

/// `E⁺ = Σ_j e^{iφ(j−1)} T_j` where `T_j` is the filtered lowering operator of emitter `j`.
pub fn field_operator(space: &HilbertSpace, filter: FilterKind, phi: f64) -> Result<FieldOperator> {
    let modes: Vec<Level> = match filter {
        FilterKind::Zpl => vec![],
        FilterKind::StokesAll => space.vib_levels().collect(),
        FilterKind::StokesMode(n) => vec![Level::V(n)],
    };
    if filter.is_stokes() && space.scheme() == LevelScheme::Tls {
        return Err(Error::SchemeMismatch("Stokes filters need vibrational levels".into()));
    }
    let d = space.dim();
    let mut m = ComplexMatrix::zeros(d, d);
    for j in 0..space.n_emitters() {
        let phase = Complex64::from_polar(1.0, phi * j as f64);
        let local = if filter == FilterKind::Zpl {
            space.sigma(j)?
        } else {
            let mut acc = ComplexMatrix::zeros(d, d);
            for &v in &modes {
                acc += space
                    .local_operator(j, v, Level::E)
                    .map_err(|_| Error::SchemeMismatch(format!("filter {filter} not available in scheme {}", space.scheme().name())))?;
            }
            acc
        };
        m += local * phase;
    }
    let ground = space.ket(&vec![Level::G; space.n_emitters()])?;
    debug_assert!((&m * ground).norm() == 0.0);
    Ok(FieldOperator {
        matrix: m,
        phase: phi,
        xi: 1.0,
    })
}

/// `⟨E⁻E⁺⟩` in the state `rho`.
pub fn mean_intensity(rho: &DensityMatrix, field: &FieldOperator) -> f64 {
    rho.expect(&field.intensity()).re
}

/// Populations weighted by the diagonal of `E⁻E⁺`: the intensity with all
/// steady-state coherences removed.
pub fn incoherent_intensity(rho: &DensityMatrix, field: &FieldOperator) -> f64 {
    let i = field.intensity();
    (0..rho.matrix.nrows()).map(|x| rho.matrix[(x, x)].re * i[(x, x)].re).sum()
}

/// Normalized intensity correlation with its decomposition (Stokes filters).
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationResult {
    pub filter: FilterKind,
    pub tau_ns: Vec<f64>,
    pub g2: Vec<f64>,
    pub g2_d: Option<Vec<f64>>,
    pub g2_coh_i: Option<Vec<f64>>,
    pub g2_coh_rho: Option<Vec<f64>>,
    /// `G_d` over the squared coherence-free intensity.
    pub g2_approx: Option<Vec<f64>>,
    pub mean_intensity: f64,
    /// Part of the mean intensity carried by steady-state coherences.
    pub coherent_intensity: f64,
}

impl CorrelationResult {
    /// Mirror onto negative delays using `g²(−τ) = g²(τ)`; `τ = 0` appears once.
    pub fn symmetric(&self) -> CorrelationResult {
        let mirror = |v: &[f64]| -> Vec<f64> {
            let skip = usize::from(self.tau_ns.first() == Some(&0.0));
            v.iter().skip(skip).rev().chain(v.iter()).cloned().collect()
        };
        let skip = usize::from(self.tau_ns.first() == Some(&0.0));
        let tau = self
            .tau_ns
            .iter()
            .skip(skip)
            .rev()
            .map(|t| -t)
            .chain(self.tau_ns.iter().cloned())
            .collect();
        CorrelationResult {
            filter: self.filter,
            tau_ns: tau,
            g2: mirror(&self.g2),
            g2_d: self.g2_d.as_deref().map(mirror),
            g2_coh_i: self.g2_coh_i.as_deref().map(mirror),
            g2_coh_rho: self.g2_coh_rho.as_deref().map(mirror),
            g2_approx: self.g2_approx.as_deref().map(mirror),
            mean_intensity: self.mean_intensity,
            coherent_intensity: self.coherent_intensity,
        }
    }
}

/// Steady state and diagonalized generator of one model, shared by every
/// filter evaluated on it.
#[derive(Clone, Debug)]
pub struct Correlator {
    pub model: ModelSpec,
    pub liouvillian: Superoperator,
    pub steady_state: DensityMatrix,
    regression: Regression,
}

impl Correlator {
    pub fn new(model: &ModelSpec) -> Result<Self> {
        let liouvillian = model.liouvillian()?;
        let steady_state = steady_state(&liouvillian)?;
        let regression = Regression::new(&liouvillian)?;
        Ok(Correlator {
            model: model.clone(),
            liouvillian,
            steady_state,
            regression,
        })
    }

    pub fn phase(&self, filter: FilterKind) -> f64 {
        let omegas: Vec<f64> = self.model.emitters[0].vib_modes.iter().map(|m| m.omega).collect();
        phase_factor(&self.model.geometry, self.model.r12(), filter, &omegas)
    }

    pub fn field(&self, filter: FilterKind) -> Result<FieldOperator> {
        if let FilterKind::StokesMode(n) = filter {
            if n == 0 || n as usize > self.model.scheme.vib_modes() {
                return Err(Error::SchemeMismatch(format!("no vibrational mode {n}")));
            }
        }
        field_operator(&self.liouvillian.space, filter, self.phase(filter))
    }

    pub fn mean_intensity(&self, filter: FilterKind) -> Result<f64> {
        Ok(mean_intensity(&self.steady_state, &self.field(filter)?))
    }

    /// `g²(τ)` on a grid of delays in seconds. Stokes filters also carry the
    /// decomposition into diagonal and coherent parts.
    pub fn g2(&self, filter: FilterKind, tau: &[f64]) -> Result<CorrelationResult> {
        let field = self.field(filter)?;
        let rho = &self.steady_state;
        let intensity = mean_intensity(rho, &field);
        if !(intensity > ZERO_INTENSITY) {
            return Err(Error::ZeroIntensity);
        }
        let norm = intensity * intensity;
        let e_plus = &field.matrix;
        let e_minus = dagger(e_plus);
        let obs = field.intensity();
        let total = self.regression.g2_numerator(rho, e_plus, tau)?;
        let g2: Vec<f64> = total.iter().map(|g| g / norm).collect();
        let incoherent = incoherent_intensity(rho, &field);

        let mut out = CorrelationResult {
            filter,
            tau_ns: tau.iter().map(|t| t * 1e9).collect(),
            g2,
            g2_d: None,
            g2_coh_i: None,
            g2_coh_rho: None,
            g2_approx: None,
            mean_intensity: intensity,
            coherent_intensity: intensity - incoherent,
        };
        if filter.is_stokes() {
            let parts = self.decomposition(e_plus, &e_minus, &obs, tau)?;
            let scale = |v: &[f64], n: f64| v.iter().map(|x| x / n).collect::<Vec<_>>();
            out.g2_approx = Some(scale(&parts[0], incoherent * incoherent));
            out.g2_d = Some(scale(&parts[0], norm));
            out.g2_coh_i = Some(scale(&parts[1], norm));
            out.g2_coh_rho = Some(scale(&parts[2], norm));
        }
        Ok(out)
    }

    /// `[G_d, G_coh,I, G_coh,ρ]`, split by which part of `E⁺ρE⁻` seeds the
    /// propagation:
    /// populations of `ρ` into diagonal (`G_d`) and off-diagonal (`G_coh,I`)
    /// entries, and coherences of `ρ` (`G_coh,ρ`).
    fn decomposition(&self, e_plus: &ComplexMatrix, e_minus: &ComplexMatrix, obs: &ComplexMatrix, tau: &[f64]) -> Result<[Vec<f64>; 3]> {
        let rho = &self.steady_state.matrix;
        let d = rho.nrows();
        let pops = ComplexMatrix::from_fn(d, d, |i, j| if i == j { rho[(i, i)] } else { c64(0.0, 0.0) });
        let from_pops = e_plus * &pops * e_minus;
        let diag = ComplexMatrix::from_fn(d, d, |i, j| if i == j { from_pops[(i, i)] } else { c64(0.0, 0.0) });
        let seeds = [diag.clone(), &from_pops - &diag, e_plus * (rho - &pops) * e_minus];
        let series = seeds
            .iter()
            .map(|s| self.regression.trace_series(obs, s, tau))
            .collect::<Result<Vec<_>>>()?;
        // imaginary residue measured against the full correlator's scale
        let i = self.steady_state.expect(obs).norm();
        let scale = series
            .iter()
            .flat_map(|s| s.iter())
            .fold(i * i, |m, z| m.max(z.norm()));
        let mut out: [Vec<f64>; 3] = Default::default();
        for (k, s) in series.into_iter().enumerate() {
            out[k] = real_part(s, scale)?;
        }
        Ok(out)
    }
}

/// `g²(τ)` of one model and filter; delays in seconds.
pub fn g2(model: &ModelSpec, filter: FilterKind, tau: &[f64]) -> Result<CorrelationResult> {
    Correlator::new(model)?.g2(filter, tau)
}

/// Analytic `τ = 0` values of the Stokes decomposition for one emitter pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tau0Checks {
    /// `G_d(0)/|ξ|⁴`.
    pub gd0: f64,
    pub gcoh_i0: f64,
    pub gcoh_rho0: f64,
    /// `4p_ee/(2p_ee + p_eg + p_ge + p_ev + p_ve + 2Re ρ_ev,ve)²`.
    pub closed_form_g2_0: f64,
    pub regression_g2_0: f64,
    pub p_ee: f64,
}

/// Decomposition at `τ = 0` and the population closed form, for a OneVib pair
/// detected through `StokesAll`.
pub fn g2_decomposition_tau0_checks(model: &ModelSpec) -> Result<Tau0Checks> {
    if model.scheme != LevelScheme::OneVib || model.n_emitters() != 2 {
        return Err(Error::SchemeMismatch("closed form needs a OneVib emitter pair".into()));
    }
    let c = Correlator::new(model)?;
    let r = c.g2(FilterKind::StokesAll, &[0.0])?;
    let norm = r.mean_intensity * r.mean_intensity;
    let rho = &c.steady_state;
    let p = |a: Level, b: Level| rho.population(&[a, b]);
    let (e, g, v) = (Level::E, Level::G, Level::V(1));
    let p_ee = p(e, e)?;
    let phi = c.phase(FilterKind::StokesAll);
    let coherence = rho.element(&[v, e], &[e, v])? * Complex64::from_polar(1.0, phi);
    let denom = 2.0 * p_ee + p(e, g)? + p(g, e)? + p(e, v)? + p(v, e)? + 2.0 * coherence.re;
    Ok(Tau0Checks {
        gd0: r.g2_d.as_ref().unwrap()[0] * norm,
        gcoh_i0: r.g2_coh_i.as_ref().unwrap()[0] * norm,
        gcoh_rho0: r.g2_coh_rho.as_ref().unwrap()[0] * norm,
        closed_form_g2_0: 4.0 * p_ee / (denom * denom),
        regression_g2_0: r.g2[0],
        p_ee,
    })
}
