// Copyright 2026 The stokes-g2 Authors
// SPDX-License-Identifier: Apache-2.0

//! Steady states, propagation, and two-time correlators via the quantum
//! regression theorem, plus a quantum-jump Monte Carlo oracle.

pub mod mcwf;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linops::{c64, dagger, null_vector, unvectorize, vectorize, ComplexMatrix, ExpPropagator, DEFAULT_NULL_TOL};
use crate::model::{HilbertSpace, Level, Superoperator};

pub use mcwf::{mcwf_g2, mcwf_records, JumpChannel, JumpRecord, McwfConfig, McwfResult};

/// Residual allowed on `L·vec(ρ_ss)`, relative to `‖L‖`.
pub const STEADY_STATE_RESIDUAL: f64 = 1e-9;
const TRACE_PRESERVATION_TOL: f64 = 1e-10;
const IMAG_RESIDUE_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    pub matrix: ComplexMatrix,
    pub space: HilbertSpace,
}

impl DensityMatrix {
    /// `|label⟩⟨label|`.
    pub fn pure(space: &HilbertSpace, label: &[Level]) -> Result<Self> {
        let k = space.ket(label)?;
        Ok(DensityMatrix {
            matrix: &k * k.adjoint(),
            space: space.clone(),
        })
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `⟨a|ρ|b⟩`.
    pub fn element(&self, a: &[Level], b: &[Level]) -> Result<Complex64> {
        Ok(self.matrix[(self.space.index_of(a)?, self.space.index_of(b)?)])
    }

    pub fn population(&self, label: &[Level]) -> Result<f64> {
        Ok(self.element(label, label)?.re)
    }

    /// Frobenius norm of `ρ − ρ†`.
    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - dagger(&self.matrix)).norm()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + dagger(&self.matrix)) * c64(0.5, 0.0);
        h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// `Tr[A ρ]`.
    pub fn expect(&self, a: &ComplexMatrix) -> Complex64 {
        (a * &self.matrix).trace()
    }
}

fn check_trace_preserving(l: &Superoperator) -> Result<()> {
    let d = l.space.dim();
    let id = vectorize(&ComplexMatrix::identity(d, d));
    let left = id.adjoint() * &l.matrix;
    if left.norm() > TRACE_PRESERVATION_TOL * l.matrix.norm() {
        return Err(Error::InvalidInput("generator is not trace preserving".into()));
    }
    Ok(())
}

/// Unique stationary state of a trace-preserving generator.
pub fn steady_state(l: &Superoperator) -> Result<DensityMatrix> {
    check_trace_preserving(l)?;
    let v = null_vector(&l.matrix, DEFAULT_NULL_TOL)?;
    let residual = (&l.matrix * &v).norm();
    if residual > STEADY_STATE_RESIDUAL * l.matrix.norm() {
        return Err(Error::NoConvergence("steady-state residual"));
    }
    let d = l.space.dim();
    let m = unvectorize(&v, d)?;
    let mut rho = (&m + dagger(&m)) * c64(0.5, 0.0);
    let tr = rho.trace();
    if tr.norm() == 0.0 {
        return Err(Error::NoNullVector);
    }
    rho /= tr;
    Ok(DensityMatrix {
        matrix: rho,
        space: l.space.clone(),
    })
}

/// `exp(L τ) ρ₀` on an ascending grid of delays (seconds).
pub fn evolve(l: &Superoperator, rho0: &DensityMatrix, tau_grid: &[f64]) -> Result<Vec<DensityMatrix>> {
    let d = l.space.dim();
    if rho0.matrix.nrows() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: rho0.matrix.nrows(),
        });
    }
    let prop = ExpPropagator::new(&l.matrix)?;
    prop.apply_series(&vectorize(&rho0.matrix), tau_grid)?
        .iter()
        .map(|v| {
            Ok(DensityMatrix {
                matrix: unvectorize(v, d)?,
                space: l.space.clone(),
            })
        })
        .collect()
}

/// A diagonalized generator reused for many two-time correlators.
#[derive(Clone, Debug)]
pub struct Regression {
    propagator: ExpPropagator,
    dim: usize,
}

impl Regression {
    pub fn new(l: &Superoperator) -> Result<Self> {
        Ok(Regression {
            propagator: ExpPropagator::new(&l.matrix)?,
            dim: l.space.dim(),
        })
    }

    pub fn is_spectral(&self) -> bool {
        self.propagator.is_spectral()
    }

    /// `Tr[A · exp(Lτ)(X)]` for every `τ`.
    pub fn trace_series(&self, observable: &ComplexMatrix, initial: &ComplexMatrix, times: &[f64]) -> Result<Vec<Complex64>> {
        for m in [observable, initial] {
            if m.nrows() != self.dim || m.ncols() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: m.nrows(),
                });
            }
        }
        // Tr[A X] = Σ_ij A_ji X_ij = vec(Aᵀ) · vec(X)
        let row = vectorize(&observable.transpose());
        self.propagator.functional_series(&row, &vectorize(initial), times)
    }

    /// `G²(τ) = Tr[E⁻E⁺ exp(Lτ)(E⁺ ρ E⁻)]`.
    pub fn g2_numerator(&self, rho: &DensityMatrix, e_plus: &ComplexMatrix, times: &[f64]) -> Result<Vec<f64>> {
        let e_minus = dagger(e_plus);
        let intensity = &e_minus * e_plus;
        let initial = e_plus * &rho.matrix * &e_minus;
        let mean = rho.expect(&intensity).norm();
        real_part(self.trace_series(&intensity, &initial, times)?, mean * mean)
    }
}

/// Real parts after checking the imaginary residue against the larger of
/// the series magnitude and `scale_hint`.
pub(crate) fn real_part(values: Vec<Complex64>, scale_hint: f64) -> Result<Vec<f64>> {
    let scale = values.iter().fold(scale_hint, |m, z| m.max(z.norm()));
    let worst = values.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    if worst > IMAG_RESIDUE_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::ImaginaryResidue(worst / scale));
    }
    Ok(values.iter().map(|z| z.re).collect())
}

/// One-shot form of [`Regression::g2_numerator`].
pub fn regression_g2_numerator(
    l: &Superoperator,
    rho_ss: &DensityMatrix,
    e_plus: &ComplexMatrix,
    tau_grid: &[f64],
) -> Result<Vec<f64>> {
    if e_plus.nrows() != l.space.dim() {
        return Err(Error::DimensionMismatch {
            expected: l.space.dim(),
            found: e_plus.nrows(),
        });
    }
    Regression::new(l)?.g2_numerator(rho_ss, e_plus, tau_grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        CouplingSource, CouplingSpec, DriveSpec, EmitterSpec, GeometrySpec, LevelScheme, ModelSpec, Variant, VibMode,
    };
    use nalgebra::Vector3;

    fn tls(rabi: f64, detuning: f64) -> ModelSpec {
        ModelSpec {
            emitters: vec![EmitterSpec {
                detuning,
                gamma: 1.0,
                dipole_dir: Vector3::z(),
                position: Vector3::zeros(),
                vib_modes: vec![],
            }],
            geometry: GeometrySpec {
                refractive_index: 1.0,
                lambda0: 1.0,
                k_laser_dir: Vector3::y(),
                k_detect_dir: Vector3::y(),
            },
            drive: DriveSpec {
                rabi: vec![c64(rabi, 0.0)],
                delta0: detuning,
            },
            coupling: CouplingSpec {
                v: 0.0,
                gamma12: 0.0,
                source: CouplingSource::Override,
            },
            alpha: 1.0,
            scheme: LevelScheme::Tls,
            variant: Variant::TlsFramework,
        }
    }

    fn onevib_pair(rabi: f64) -> ModelSpec {
        let e = |det: f64| EmitterSpec {
            detuning: det,
            gamma: 1.0,
            dipole_dir: Vector3::z(),
            position: Vector3::zeros(),
            vib_modes: vec![VibMode { omega: 30.0, gamma: 50.0 }],
        };
        ModelSpec {
            emitters: vec![e(1.0), e(-1.0)],
            geometry: tls(0.0, 0.0).geometry,
            drive: DriveSpec {
                rabi: vec![c64(rabi, 0.0); 2],
                delta0: 0.0,
            },
            coupling: CouplingSpec::none(),
            alpha: 0.3,
            scheme: LevelScheme::OneVib,
            variant: Variant::Main,
        }
    }

    // Optical Bloch equations for (ρ_gg, ρ_ee, ρ_eg, ρ_ge) with the trace
    // row replacing ρ_gg's equation; H = Δ/2 σz − Ω/2 (σ† + σ).
    fn bloch_excited(rabi: f64, det: f64, gamma: f64) -> f64 {
        let i = c64(0.0, 1.0);
        let o = c64(rabi / 2.0, 0.0);
        let d = c64(det, 0.0);
        let g = c64(gamma, 0.0);
        // dρ_ee = −γρ_ee + iΩ/2 (ρ_ge − ρ_eg)
        // dρ_eg = −(γ/2 + iΔ)ρ_eg + iΩ/2 (ρ_gg − ρ_ee)
        // dρ_ge = −(γ/2 − iΔ)ρ_ge − iΩ/2 (ρ_gg − ρ_ee)
        let a = ComplexMatrix::from_row_slice(
            4,
            4,
            &[
                c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0),
                c64(0.0, 0.0), -g, -i * o, i * o,
                i * o, -i * o, -(g / 2.0 + i * d), c64(0.0, 0.0),
                -i * o, i * o, c64(0.0, 0.0), -(g / 2.0 - i * d),
            ],
        );
        let b = nalgebra::DVector::from_vec(vec![c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)]);
        let x = a.lu().solve(&b).unwrap();
        x[1].re
    }

    #[test]
    fn bloch_steady_state() {
        for (rabi, det) in [(1.0, 0.0), (3.0, 0.7), (0.2, -2.0)] {
            let m = tls(rabi, det);
            let rho = steady_state(&m.liouvillian().unwrap()).unwrap();
            let pe = rho.population(&[Level::E]).unwrap();
            let oracle = bloch_excited(rabi, det, 1.0);
            assert!((pe - oracle).abs() < 1e-10, "{pe} vs {oracle}");
            // textbook closed form as a second check
            let closed = (rabi * rabi / 4.0) / (det * det + 0.25 + rabi * rabi / 2.0);
            assert!((pe - closed).abs() < 1e-10);
        }
    }

    #[test]
    fn undriven_ground_state() {
        let m = onevib_pair(0.0);
        let rho = steady_state(&m.liouvillian().unwrap()).unwrap();
        assert!((rho.population(&[Level::G, Level::G]).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn steady_state_invariants() {
        let m = onevib_pair(1.5);
        let l = m.liouvillian().unwrap();
        let rho = steady_state(&l).unwrap();
        assert!(rho.hermiticity_error() < 1e-10);
        assert!((rho.trace() - c64(1.0, 0.0)).norm() < 1e-10);
        assert!(rho.min_eigenvalue() > -1e-8);
        let r = (&l.matrix * vectorize(&rho.matrix)).norm();
        assert!(r <= STEADY_STATE_RESIDUAL * l.matrix.norm());
        let drift = evolve(&l, &rho, &[0.0, 0.5, 3.0, 20.0]).unwrap();
        for s in drift {
            assert!((&s.matrix - &rho.matrix).norm() < 1e-8);
        }
    }

    #[test]
    fn uncoupled_populations_factorize() {
        let m = onevib_pair(1.5);
        let rho = steady_state(&m.liouvillian().unwrap()).unwrap();
        let mut single = m.clone();
        single.emitters.truncate(1);
        single.drive.rabi.truncate(1);
        single.drive.delta0 = 1.0;
        let rho1 = steady_state(&single.liouvillian().unwrap()).unwrap();
        let mut single2 = single.clone();
        single2.emitters[0].detuning = -1.0;
        single2.drive.delta0 = -1.0;
        let rho2 = steady_state(&single2.liouvillian().unwrap()).unwrap();
        let pe1 = rho1.population(&[Level::E]).unwrap();
        let pe2 = rho2.population(&[Level::E]).unwrap();
        let pee = rho.population(&[Level::E, Level::E]).unwrap();
        assert!((pee - pe1 * pe2).abs() < 1e-10);
    }

    #[test]
    fn excited_population_decays() {
        let m = onevib_pair(0.0);
        let l = m.liouvillian().unwrap();
        let rho0 = DensityMatrix::pure(&l.space, &[Level::E, Level::G]).unwrap();
        let taus = [0.0, 0.1, 0.5, 1.0, 2.5];
        let out = evolve(&l, &rho0, &taus).unwrap();
        for (t, s) in taus.iter().zip(&out) {
            let p = s.population(&[Level::E, Level::G]).unwrap();
            assert!((p - (-t).exp()).abs() < 1e-6);
            assert!((s.trace() - c64(1.0, 0.0)).norm() < 1e-8);
            assert!(s.hermiticity_error() < 1e-10);
        }
    }

    #[test]
    fn tls_antibunching_and_factorization() {
        let m = tls(2.0, 0.3);
        let l = m.liouvillian().unwrap();
        let rho = steady_state(&l).unwrap();
        let sigma = l.space.sigma(0).unwrap();
        let g = regression_g2_numerator(&l, &rho, &sigma, &[0.0, 60.0]).unwrap();
        let pe = rho.population(&[Level::E]).unwrap();
        assert!(g[0].abs() < 1e-14);
        assert!((g[1] - pe * pe).abs() < 1e-6 * pe * pe);
    }

    #[test]
    fn degenerate_steady_state_reported() {
        // no dissipation at all: every diagonal state is stationary
        let mut m = tls(0.0, 0.0);
        m.emitters[0].gamma = 1.0;
        let space = m.space().unwrap();
        let l = Superoperator {
            matrix: ComplexMatrix::zeros(4, 4),
            space,
        };
        assert!(matches!(steady_state(&l), Err(Error::NullSpaceDegenerate { .. })));
    }
}
