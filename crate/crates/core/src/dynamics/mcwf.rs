// Copyright 2026 The stokes-g2 Authors
// SPDX-License-Identifier: Apache-2.0

//! Quantum-jump unraveling of the master equation, used as an independent
//! statistical check of the regression correlators.
//!
//! Between jumps the unnormalized state follows `exp(−i H_eff t)`; a jump
//! happens when `‖ψ(t)‖²` falls to a uniform random threshold.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linops::{c64, condition_number, dagger, eigen_decompose, ComplexMatrix, ComplexVector, ExpPropagator, MAX_EIGVEC_CONDITION};
use crate::model::{build_hamiltonian, zpl_rate_matrix, Level, ModelSpec, Variant};
use crate::observables::{phase_factor, FilterKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum JumpChannel {
    /// Collective ZPL channel with in-phase emitter amplitudes.
    ZplSym,
    /// Collective ZPL channel with opposite-sign amplitudes.
    ZplAntisym,
    /// Stokes decay `|v⟩⟨e|` of emitter 1 into the given mode (1-based).
    StokesEmitter1(u8),
    StokesEmitter2(u8),
    /// Non-radiative `|g⟩⟨v|` relaxation.
    Vibrational { emitter: u8, mode: u8 },
}

impl JumpChannel {
    fn is_detected(self, filter: FilterKind) -> bool {
        match (self, filter) {
            (JumpChannel::ZplSym, FilterKind::Zpl) => true,
            (JumpChannel::StokesEmitter1(_) | JumpChannel::StokesEmitter2(_), FilterKind::StokesAll) => true,
            (JumpChannel::StokesEmitter1(m) | JumpChannel::StokesEmitter2(m), FilterKind::StokesMode(n)) => m == n,
            _ => false,
        }
    }
}

/// Emission times of one channel along one trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpRecord {
    pub channel: JumpChannel,
    pub times: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct McwfConfig {
    pub n_traj: usize,
    /// Largest delay in the histogram (s).
    pub t_max: f64,
    pub bin_width: f64,
    pub seed: u64,
    /// Recorded window per trajectory after burn-in (s).
    pub record: f64,
    /// Discarded initial segment; `None` means `10/γ₀`.
    pub burn_in: Option<f64>,
}

impl McwfConfig {
    /// Record window defaults to five times the largest delay.
    pub fn new(n_traj: usize, t_max: f64, bin_width: f64, seed: u64) -> Self {
        McwfConfig {
            n_traj,
            t_max,
            bin_width,
            seed,
            record: 5.0 * t_max,
            burn_in: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct McwfResult {
    /// Bin centres (ns).
    pub tau_ns: Vec<f64>,
    pub g2: Vec<f64>,
    pub stderr: Vec<f64>,
    pub counts: Vec<u64>,
    /// Detected clicks in all recorded windows.
    pub clicks: u64,
    /// Detected click rate (1/s).
    pub rate: f64,
    /// Total recorded time over all trajectories (s).
    pub recorded_time: f64,
    /// Jumps per channel inside the recorded windows.
    pub channel_counts: Vec<(JumpChannel, u64)>,
}

enum Evolver {
    Spectral {
        values: ComplexVector,
        vectors: ComplexMatrix,
        inverse: ComplexMatrix,
    },
    Dense(ExpPropagator),
}

/// Channels and the no-jump generator for one model.
pub struct Unraveling {
    channels: Vec<(JumpChannel, ComplexMatrix)>,
    evolver: Evolver,
    dim: usize,
    ground: usize,
}

/// State between jumps, kept in whatever form makes `ψ(s)` cheap.
enum Segment {
    Modes(ComplexVector),
    Raw(ComplexVector),
}

fn zpl_channels(model: &ModelSpec, sigmas: &[ComplexMatrix]) -> Result<Vec<(JumpChannel, ComplexMatrix)>> {
    let rates = zpl_rate_matrix(model);
    crate::model::check_zpl_rates(&rates)?;
    let scale = rates.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut out = Vec::new();
    if sigmas.len() == 1 {
        out.push((JumpChannel::ZplSym, &sigmas[0] * c64(rates[(0, 0)].sqrt(), 0.0)));
        return Ok(out);
    }
    let (vals, vecs): (Vec<f64>, Vec<[f64; 2]>) = if rates[(0, 0)] == rates[(1, 1)] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        (
            vec![rates[(0, 0)] + rates[(0, 1)], rates[(0, 0)] - rates[(0, 1)]],
            vec![[h, h], [h, -h]],
        )
    } else {
        let eig = SymmetricEigen::new(DMatrix::from_fn(2, 2, |i, j| rates[(i, j)]));
        (
            eig.eigenvalues.iter().cloned().collect(),
            (0..2).map(|k| [eig.eigenvectors[(0, k)], eig.eigenvectors[(1, k)]]).collect(),
        )
    };
    for (rate, u) in vals.into_iter().zip(vecs) {
        if rate <= 1e-12 * scale {
            continue;
        }
        let label = if u[0] * u[1] >= 0.0 {
            JumpChannel::ZplSym
        } else {
            JumpChannel::ZplAntisym
        };
        let op = (&sigmas[0] * c64(u[0], 0.0) + &sigmas[1] * c64(u[1], 0.0)) * c64(rate.sqrt(), 0.0);
        out.push((label, op));
    }
    Ok(out)
}

impl Unraveling {
    pub fn new(model: &ModelSpec) -> Result<Self> {
        model.validate()?;
        let space = model.space()?;
        let n = model.n_emitters();
        let sigmas = (0..n).map(|j| space.sigma(j)).collect::<Result<Vec<_>>>()?;
        let mut channels = zpl_channels(model, &sigmas)?;
        if model.variant != Variant::TlsFramework {
            for (j, e) in model.emitters.iter().enumerate() {
                let modes = e.vib_modes.len();
                for (m, mode) in e.vib_modes.iter().enumerate() {
                    let v = Level::V(m as u8 + 1);
                    let tag = m as u8 + 1;
                    if model.variant == Variant::Main && model.alpha < 1.0 {
                        let rate = (1.0 - model.alpha) * e.gamma / modes as f64;
                        let ch = if j == 0 {
                            JumpChannel::StokesEmitter1(tag)
                        } else {
                            JumpChannel::StokesEmitter2(tag)
                        };
                        channels.push((ch, space.local_operator(j, v, Level::E)? * c64(rate.sqrt(), 0.0)));
                    }
                    if !(mode.gamma > 0.0) {
                        return Err(Error::NonPositiveRates("vibrational relaxation".into()));
                    }
                    channels.push((
                        JumpChannel::Vibrational {
                            emitter: j as u8 + 1,
                            mode: tag,
                        },
                        space.local_operator(j, Level::G, v)? * c64(mode.gamma.sqrt(), 0.0),
                    ));
                }
            }
        }
        let h = build_hamiltonian(model, &space)?;
        let mut decay = ComplexMatrix::zeros(space.dim(), space.dim());
        for (_, c) in &channels {
            decay += dagger(c) * c;
        }
        // d ψ/dt = −i H_eff ψ with H_eff = H − (i/2) Σ C†C
        let generator = h * c64(0.0, -1.0) - decay * c64(0.5, 0.0);
        let evolver = match eigen_decompose(&generator) {
            Ok(eig) if condition_number(&eig.vectors) <= MAX_EIGVEC_CONDITION => match eig.vectors.clone().try_inverse() {
                Some(inverse) => Evolver::Spectral {
                    values: eig.values,
                    vectors: eig.vectors,
                    inverse,
                },
                None => Evolver::Dense(ExpPropagator::dense(&generator)?),
            },
            _ => Evolver::Dense(ExpPropagator::dense(&generator)?),
        };
        let ground = space.index_of(&vec![Level::G; n])?;
        Ok(Unraveling {
            channels,
            evolver,
            dim: space.dim(),
            ground,
        })
    }

    pub fn channels(&self) -> Vec<JumpChannel> {
        self.channels.iter().map(|(c, _)| *c).collect()
    }

    fn segment(&self, psi: ComplexVector) -> Segment {
        match &self.evolver {
            Evolver::Spectral { inverse, .. } => Segment::Modes(inverse * psi),
            Evolver::Dense(_) => Segment::Raw(psi),
        }
    }

    fn state_at(&self, seg: &Segment, s: f64) -> ComplexVector {
        match (&self.evolver, seg) {
            (Evolver::Spectral { values, vectors, .. }, Segment::Modes(c)) => {
                let scaled = ComplexVector::from_iterator(c.len(), c.iter().zip(values.iter()).map(|(ci, l)| ci * (l * s).exp()));
                vectors * scaled
            }
            (Evolver::Dense(p), Segment::Raw(psi)) => p.apply(psi, s).expect("dimensions fixed at construction"),
            _ => unreachable!("segment kind follows the evolver"),
        }
    }

    fn norm_sq_at(&self, seg: &Segment, s: f64) -> f64 {
        self.state_at(seg, s).norm_squared()
    }

    /// Smallest `s ∈ (0, horizon]` with `‖ψ(s)‖² = threshold`, if any.
    fn jump_delay(&self, seg: &Segment, threshold: f64, horizon: f64, tol: f64) -> Option<f64> {
        if self.norm_sq_at(seg, horizon) > threshold {
            return None;
        }
        let target = threshold.ln();
        let f = |s: f64| {
            let n = self.norm_sq_at(seg, s);
            if n > 0.0 {
                n.ln() - target
            } else {
                -1e300
            }
        };
        // Illinois variant of regula falsi on ln‖ψ‖², with bisection guard.
        let (mut a, mut b) = (0.0, horizon);
        let (mut fa, mut fb) = (f(a), f(b).max(-1e3));
        let mut side = 0i8;
        for _ in 0..200 {
            if b - a <= tol {
                break;
            }
            let mut c = (a * fb - b * fa) / (fb - fa);
            if !(c > a && c < b) || (c - a).min(b - c) < 1e-3 * (b - a) && side != 0 {
                c = 0.5 * (a + b);
            }
            let fc = f(c).max(-1e3);
            if fc > 0.0 {
                a = c;
                fa = fc;
                if side == 1 {
                    fb *= 0.5;
                }
                side = 1;
            } else {
                b = c;
                fb = fc;
                if side == -1 {
                    fa *= 0.5;
                }
                side = -1;
            }
        }
        Some(b)
    }

    /// Jumps `(time, channel index)` on `[0, duration]` starting from the
    /// global ground state.
    pub fn trajectory<R: Rng>(&self, rng: &mut R, duration: f64, tol: f64) -> Vec<(f64, usize)> {
        let mut psi = ComplexVector::zeros(self.dim);
        psi[self.ground] = c64(1.0, 0.0);
        let mut t = 0.0;
        let mut jumps = Vec::new();
        loop {
            let seg = self.segment(psi);
            let threshold: f64 = 1.0 - rng.random::<f64>();
            let Some(s) = self.jump_delay(&seg, threshold, duration - t, tol) else {
                break;
            };
            let before = self.state_at(&seg, s);
            let weights: Vec<f64> = self.channels.iter().map(|(_, c)| (c * &before).norm_squared()).collect();
            let total: f64 = weights.iter().sum();
            if !(total > 0.0) {
                break;
            }
            let mut pick = rng.random::<f64>() * total;
            let mut k = weights.len() - 1;
            for (i, w) in weights.iter().enumerate() {
                if pick < *w {
                    k = i;
                    break;
                }
                pick -= w;
            }
            t += s;
            let after = &self.channels[k].1 * before;
            let n = after.norm();
            psi = after / c64(n, 0.0);
            jumps.push((t, k));
        }
        jumps
    }
}

fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Per-channel jump records of trajectory `index`, over `[0, duration]`.
pub fn mcwf_records(model: &ModelSpec, seed: u64, index: u64, duration: f64) -> Result<Vec<JumpRecord>> {
    let u = Unraveling::new(model)?;
    let jumps = u.trajectory(&mut trajectory_rng(seed, index), duration, 1e-6 / model.gamma0());
    Ok(u
        .channels()
        .into_iter()
        .enumerate()
        .map(|(k, channel)| JumpRecord {
            channel,
            times: jumps.iter().filter(|(_, c)| *c == k).map(|(t, _)| *t).collect(),
        })
        .collect())
}

fn check_filter(model: &ModelSpec, filter: FilterKind) -> Result<()> {
    if let FilterKind::StokesMode(n) = filter {
        if n == 0 || n as usize > model.scheme.vib_modes() {
            return Err(Error::SchemeMismatch(format!("no vibrational mode {n}")));
        }
    }
    if filter == FilterKind::Zpl && model.n_emitters() == 2 {
        let equal = model.emitters[0].gamma == model.emitters[1].gamma;
        let phi = phase_factor(&model.geometry, model.r12(), FilterKind::Zpl, &[]);
        let wrapped = phi.sin().abs() + (1.0 - phi.cos()).abs();
        if !equal || wrapped > 1e-12 {
            return Err(Error::InvalidInput(
                "ZPL detection maps onto a single jump channel only for equal decay rates and zero relative phase".into(),
            ));
        }
    }
    Ok(())
}

/// Coincidence-histogram estimate of `g²(τ)` from independent trajectories.
///
/// Pairs of detected clicks (all ordered pairs, not only neighbours) are
/// binned by delay and normalized by `R² · n_traj · Δ · (T − τ)` with the
/// detected rate `R` estimated from the same data.
pub fn mcwf_g2(model: &ModelSpec, filter: FilterKind, config: &McwfConfig) -> Result<McwfResult> {
    if config.n_traj == 0 {
        return Err(Error::InvalidInput("n_traj must be at least 1".into()));
    }
    if !(config.bin_width > 0.0) || !(config.t_max >= config.bin_width) || !(config.record > config.t_max) {
        return Err(Error::InvalidInput(
            "need 0 < bin_width <= t_max < record".into(),
        ));
    }
    check_filter(model, filter)?;
    let u = Unraveling::new(model)?;
    let channels = u.channels();
    let detected: Vec<bool> = channels.iter().map(|c| c.is_detected(filter)).collect();
    let burn_in = config.burn_in.unwrap_or(10.0 / model.gamma0());
    let duration = burn_in + config.record;
    let n_bins = (config.t_max / config.bin_width).floor() as usize;
    let tol = 1e-4 * config.bin_width.min(1.0 / model.gamma0());

    let (hist, clicks, per_channel) = (0..config.n_traj as u64)
        .into_par_iter()
        .map(|k| {
            let jumps = u.trajectory(&mut trajectory_rng(config.seed, k), duration, tol);
            let mut per_channel = vec![0u64; channels.len()];
            let mut times = Vec::new();
            for &(t, c) in &jumps {
                if t < burn_in {
                    continue;
                }
                per_channel[c] += 1;
                if detected[c] {
                    times.push(t - burn_in);
                }
            }
            let mut hist = vec![0u64; n_bins];
            for i in 0..times.len() {
                for &tj in &times[i + 1..] {
                    let b = ((tj - times[i]) / config.bin_width) as usize;
                    if b >= n_bins {
                        break;
                    }
                    hist[b] += 1;
                }
            }
            (hist, times.len() as u64, per_channel)
        })
        .reduce(
            || (vec![0u64; n_bins], 0u64, vec![0u64; channels.len()]),
            |mut a, b| {
                a.0.iter_mut().zip(&b.0).for_each(|(x, y)| *x += y);
                a.1 += b.1;
                a.2.iter_mut().zip(&b.2).for_each(|(x, y)| *x += y);
                a
            },
        );
    if clicks == 0 {
        return Err(Error::ZeroClicks);
    }
    let n = config.n_traj as f64;
    let recorded_time = n * config.record;
    let rate = clicks as f64 / recorded_time;
    let mut tau_ns = Vec::with_capacity(n_bins);
    let mut g2 = Vec::with_capacity(n_bins);
    let mut stderr = Vec::with_capacity(n_bins);
    for (k, &c) in hist.iter().enumerate() {
        let centre = (k as f64 + 0.5) * config.bin_width;
        let norm = rate * rate * n * config.bin_width * (config.record - centre);
        let g = c as f64 / norm;
        tau_ns.push(centre * 1e9);
        g2.push(g);
        stderr.push(if c > 0 { g / (c as f64).sqrt() } else { 1.0 / norm });
    }
    Ok(McwfResult {
        tau_ns,
        g2,
        stderr,
        counts: hist,
        clicks,
        rate,
        recorded_time,
        channel_counts: channels.into_iter().zip(per_channel).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CouplingSource, CouplingSpec, DriveSpec, EmitterSpec, GeometrySpec, LevelScheme, VibMode};
    use nalgebra::Vector3;

    fn geometry() -> GeometrySpec {
        GeometrySpec {
            refractive_index: 1.5,
            lambda0: 618e-9,
            k_laser_dir: Vector3::y(),
            k_detect_dir: Vector3::y(),
        }
    }

    fn pair(rabi: f64, gamma12: f64) -> ModelSpec {
        let e = |det: f64| EmitterSpec {
            detuning: det,
            gamma: 1.0,
            dipole_dir: Vector3::z(),
            position: Vector3::zeros(),
            vib_modes: vec![VibMode { omega: 40.0, gamma: 20.0 }],
        };
        ModelSpec {
            emitters: vec![e(0.5), e(-0.5)],
            geometry: geometry(),
            drive: DriveSpec {
                rabi: vec![c64(rabi, 0.0); 2],
                delta0: 0.0,
            },
            coupling: CouplingSpec {
                v: 0.5,
                gamma12,
                source: CouplingSource::Override,
            },
            alpha: 0.3,
            scheme: LevelScheme::OneVib,
            variant: Variant::Main,
        }
    }

    #[test]
    fn collective_channels_reproduce_rate_matrix() {
        let m = pair(1.0, 0.2);
        let s = m.space().unwrap();
        let sig = [s.sigma(0).unwrap(), s.sigma(1).unwrap()];
        let ch = zpl_channels(&m, &sig).unwrap();
        let mut sum = ComplexMatrix::zeros(s.dim(), s.dim());
        for (_, c) in &ch {
            sum += dagger(c) * c;
        }
        let mut expect = ComplexMatrix::zeros(s.dim(), s.dim());
        let r = zpl_rate_matrix(&m);
        for j in 0..2 {
            for k in 0..2 {
                expect += dagger(&sig[j]) * &sig[k] * c64(r[(j, k)], 0.0);
            }
        }
        assert!((sum - expect).norm() < 1e-12);
        assert_eq!(ch[0].0, JumpChannel::ZplSym);
        assert_eq!(ch[1].0, JumpChannel::ZplAntisym);
    }

    #[test]
    fn dark_channel_dropped() {
        let m = pair(1.0, 0.3);
        let s = m.space().unwrap();
        let ch = zpl_channels(&m, &[s.sigma(0).unwrap(), s.sigma(1).unwrap()]).unwrap();
        assert_eq!(ch.len(), 1);
    }

    #[test]
    fn undriven_gives_zero_clicks() {
        let m = pair(0.0, 0.1);
        let cfg = McwfConfig::new(20, 2.0, 0.1, 1);
        assert!(matches!(mcwf_g2(&m, FilterKind::StokesAll, &cfg), Err(Error::ZeroClicks)));
    }

    #[test]
    fn records_are_ordered_and_reproducible() {
        let m = pair(2.0, 0.1);
        let a = mcwf_records(&m, 7, 3, 30.0).unwrap();
        let b = mcwf_records(&m, 7, 3, 30.0).unwrap();
        assert_eq!(a, b);
        let total: usize = a.iter().map(|r| r.times.len()).sum();
        assert!(total > 0);
        for r in &a {
            assert!(r.times.windows(2).all(|w| w[0] < w[1]));
        }
        let c = mcwf_records(&m, 7, 4, 30.0).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn histogram_deterministic_across_runs() {
        let m = pair(2.0, 0.1);
        let cfg = McwfConfig::new(200, 3.0, 0.25, 42);
        let a = mcwf_g2(&m, FilterKind::StokesAll, &cfg).unwrap();
        let b = mcwf_g2(&m, FilterKind::StokesAll, &cfg).unwrap();
        assert_eq!(a.counts, b.counts);
        assert_eq!(a.g2, b.g2);
    }

    #[test]
    fn zpl_filter_needs_symmetric_channels() {
        let mut m = pair(1.0, 0.1);
        m.emitters[1].gamma = 1.2;
        let cfg = McwfConfig::new(10, 2.0, 0.1, 1);
        assert!(matches!(mcwf_g2(&m, FilterKind::Zpl, &cfg), Err(Error::InvalidInput(_))));
    }
}
