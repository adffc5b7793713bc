// Copyright 2026 The stokes-g2 Authors
// SPDX-License-Identifier: Apache-2.0

use nalgebra::{DMatrix, SymmetricEigen};

use super::space::{build_space, HilbertSpace, Level};
use super::{ModelSpec, Variant};
use crate::error::{Error, Result};
use crate::linops::{c64, dagger, kron, ComplexMatrix};

/// Generator of the master equation on column-stacked density matrices:
/// `d vec(ρ)/dt = matrix · vec(ρ)`.
#[derive(Clone, Debug)]
pub struct Superoperator {
    pub matrix: ComplexMatrix,
    pub space: HilbertSpace,
}

impl Superoperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Rates of the ZPL dissipators `Γ_jk D[σ_j, σ_k]/2` for the model's variant.
pub fn zpl_rate_matrix(model: &ModelSpec) -> DMatrix<f64> {
    let n = model.n_emitters();
    let diag_scale = match model.variant {
        Variant::Main => model.alpha,
        Variant::AltZplRate | Variant::TlsFramework => 1.0,
    };
    DMatrix::from_fn(n, n, |j, k| {
        if j == k {
            diag_scale * model.emitters[j].gamma
        } else {
            model.coupling.gamma12
        }
    })
}

/// Error unless the collective ZPL decay matrix is positive semidefinite.
/// Zero eigenvalues (a perfectly dark collective state) are allowed.
pub(crate) fn check_zpl_rates(rates: &DMatrix<f64>) -> Result<()> {
    let scale = rates.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let min = SymmetricEigen::new(rates.clone())
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min < -1e-12 * scale {
        return Err(Error::UnphysicalRates { min_eigenvalue: min });
    }
    Ok(())
}

fn check_space(model: &ModelSpec, space: &HilbertSpace) -> Result<()> {
    if space.scheme() != model.scheme || space.n_emitters() != model.n_emitters() {
        return Err(Error::SchemeMismatch(format!(
            "space is {}x{}, model is {}x{}",
            space.scheme().name(),
            space.n_emitters(),
            model.scheme.name(),
            model.n_emitters()
        )));
    }
    Ok(())
}

/// `H/ħ` in the frame rotating at the laser frequency.
pub fn build_hamiltonian(model: &ModelSpec, space: &HilbertSpace) -> Result<ComplexMatrix> {
    check_space(model, space)?;
    let d = space.dim();
    let mut h = ComplexMatrix::zeros(d, d);
    for (i, label) in space.labels().iter().enumerate() {
        let mut diag = 0.0;
        for (j, level) in label.iter().enumerate() {
            let e = &model.emitters[j];
            diag += match level {
                Level::G => -e.detuning / 2.0,
                Level::E => e.detuning / 2.0,
                Level::V(n) => (2.0 * e.vib_modes[*n as usize - 1].omega - e.detuning) / 2.0,
            };
        }
        h[(i, i)] = c64(diag, 0.0);
    }
    let sigmas = (0..model.n_emitters())
        .map(|j| space.sigma(j))
        .collect::<Result<Vec<_>>>()?;
    if let [s1, s2] = sigmas.as_slice() {
        let hop = dagger(s1) * s2;
        h += (&hop + dagger(&hop)) * c64(model.coupling.v, 0.0);
    }
    for (s, rabi) in sigmas.iter().zip(&model.drive.rabi) {
        h -= (dagger(s) * *rabi + s * rabi.conj()) * c64(0.5, 0.0);
    }
    Ok(h)
}

/// One Lindblad term `rate/2 · D[a, b]`.
pub(crate) struct Dissipator {
    pub rate: f64,
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
}

/// All dissipators of the model's variant, in a fixed order.
pub(crate) fn dissipators(model: &ModelSpec, space: &HilbertSpace) -> Result<Vec<Dissipator>> {
    let n = model.n_emitters();
    let zpl = zpl_rate_matrix(model);
    check_zpl_rates(&zpl)?;
    let sigmas = (0..n).map(|j| space.sigma(j)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for j in 0..n {
        for k in 0..n {
            let rate = zpl[(j, k)];
            if rate != 0.0 {
                out.push(Dissipator {
                    rate,
                    a: sigmas[j].clone(),
                    b: sigmas[k].clone(),
                });
            }
        }
    }
    if model.variant == Variant::TlsFramework {
        return Ok(out);
    }
    for (j, e) in model.emitters.iter().enumerate() {
        let modes = e.vib_modes.len();
        for (m, mode) in e.vib_modes.iter().enumerate() {
            let v = Level::V(m as u8 + 1);
            if model.variant == Variant::Main {
                let stokes = (1.0 - model.alpha) * e.gamma / modes as f64;
                if stokes > 0.0 {
                    let op = space.local_operator(j, v, Level::E)?;
                    out.push(Dissipator {
                        rate: stokes,
                        a: op.clone(),
                        b: op,
                    });
                }
            }
            let relax = space.local_operator(j, Level::G, v)?;
            out.push(Dissipator {
                rate: mode.gamma,
                a: relax.clone(),
                b: relax,
            });
        }
    }
    Ok(out)
}

/// Column-stacked Liouvillian:
/// `L = −i(I⊗H − Hᵀ⊗I) + Σ rate/2 · (2 B̄⊗A − I⊗B†A − (B†A)ᵀ⊗I)`.
pub fn build_liouvillian(model: &ModelSpec, space: &HilbertSpace) -> Result<Superoperator> {
    model.validate()?;
    let h = build_hamiltonian(model, space)?;
    let d = space.dim();
    let id = ComplexMatrix::identity(d, d);
    let minus_i = c64(0.0, -1.0);
    let mut l = (kron(&id, &h) - kron(&h.transpose(), &id)) * minus_i;
    for diss in dissipators(model, space)? {
        let bda = dagger(&diss.b) * &diss.a;
        let term = kron(&diss.b.conjugate(), &diss.a) * c64(2.0, 0.0)
            - kron(&id, &bda)
            - kron(&bda.transpose(), &id);
        l += term * c64(diss.rate / 2.0, 0.0);
    }
    Ok(Superoperator {
        matrix: l,
        space: space.clone(),
    })
}

impl ModelSpec {
    /// Hilbert space matching the model's scheme and emitter count.
    pub fn space(&self) -> Result<HilbertSpace> {
        build_space(self.scheme, self.n_emitters())
    }

    pub fn liouvillian(&self) -> Result<Superoperator> {
        build_liouvillian(self, &self.space()?)
    }
}
