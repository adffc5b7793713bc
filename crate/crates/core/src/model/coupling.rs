// Copyright 2026 The stokes-g2 Authors
// SPDX-License-Identifier: Apache-2.0

//! Retarded dipole-dipole couplings between two point emitters.

use std::f64::consts::PI;

use nalgebra::Vector3;

use super::{CouplingSource, CouplingSpec, GeometrySpec, ModelSpec};
use crate::error::{Error, Result};

/// Coherent coupling `V` and crossed decay `γ₁₂` for two dipoles, both in the
/// units of `gamma0` and scaled by the ZPL fraction `alpha`.
///
/// The wavenumber is taken at the mean transition frequency, `k = 2πn/λ₀`.
pub fn dipole_couplings(
    geometry: &GeometrySpec,
    positions: [Vector3<f64>; 2],
    dipole_dirs: [Vector3<f64>; 2],
    alpha: f64,
    gamma0: f64,
) -> Result<CouplingSpec> {
    let r12 = positions[1] - positions[0];
    let dist = r12.norm();
    if dist == 0.0 || !dist.is_finite() {
        return Err(Error::CoincidentPositions);
    }
    let k = 2.0 * PI * geometry.refractive_index / geometry.lambda0;
    let kr = k * dist;
    let r_hat = r12 / dist;
    let (mu1, mu2) = (dipole_dirs[0], dipole_dirs[1]);
    let dot12 = mu1.dot(&mu2);
    let proj = mu1.dot(&r_hat) * mu2.dot(&r_hat);
    let transverse = dot12 - proj;
    let longitudinal = dot12 - 3.0 * proj;
    let (s, c) = kr.sin_cos();
    let kr2 = kr * kr;
    let kr3 = kr2 * kr;

    let v = 0.75 * alpha * gamma0 * (-transverse * c / kr + longitudinal * (s / kr2 + c / kr3));
    let gamma12 = 1.5 * alpha * gamma0 * (transverse * s / kr + longitudinal * (c / kr2 - s / kr3));
    Ok(CouplingSpec {
        v,
        gamma12,
        source: CouplingSource::FromGeometry,
    })
}

impl ModelSpec {
    /// Copy whose `V` and `γ₁₂` are recomputed from the emitter positions and dipoles.
    pub fn with_geometry_couplings(&self) -> Result<ModelSpec> {
        let [a, b] = self.emitters.as_slice() else {
            return Err(Error::InvalidInput("geometric couplings need two emitters".into()));
        };
        let mut m = self.clone();
        m.coupling = dipole_couplings(
            &self.geometry,
            [a.position, b.position],
            [a.dipole_dir, b.dipole_dir],
            self.alpha,
            self.gamma0(),
        )?;
        Ok(m)
    }
}
