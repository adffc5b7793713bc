// Copyright 2026 The stokes-g2 Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::Vector3;
use rayon::prelude::*;
use stokes_g2::dynamics::{mcwf_g2, McwfConfig};
use stokes_g2::model::CouplingSource;
use stokes_g2::observables::{
    central_feature, default_tau_grid, detector_convolve, dressed_states, excitation_spectrum, CorrelationResult,
    Correlator,
};
use stokes_g2::presets::Scenario;
use stokes_g2::units::{NS, PS};
use toml::Value;

use crate::compare::{compare_files, Residuals};
use crate::config::{render_entries, Entries, ScenarioConfig};
use crate::error::{CliError, Result};
use crate::table::Table;

/// Finest spacing of the auxiliary grid used before detector convolution.
const CONVOLUTION_STEP_PS: f64 = 1.0;

/// Paths written by one run, plus the in-memory correlation.
#[derive(Clone, Debug)]
pub struct RunArtifact {
    pub table: PathBuf,
    pub convolved: Option<PathBuf>,
    pub mcwf: Option<PathBuf>,
    pub spectrum: Option<PathBuf>,
    pub metadata: PathBuf,
    pub residuals: Option<Residuals>,
    pub correlation: CorrelationResult,
    pub metadata_entries: Entries,
}

/// `<out><suffix>.<ext>`.
pub fn output_path(out: &Path, suffix: &str, ext: &str) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(suffix);
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn correlation_table(r: &CorrelationResult, decompose: bool) -> Table {
    let mut t = Table::new();
    t.push("tau_ns", r.tau_ns.clone());
    t.push("g2", r.g2.clone());
    if decompose {
        let parts = [
            ("g2_d", &r.g2_d),
            ("g2_coh_i", &r.g2_coh_i),
            ("g2_coh_rho", &r.g2_coh_rho),
            ("g2_approx", &r.g2_approx),
        ];
        for (name, col) in parts {
            if let Some(v) = col {
                t.push(name, v.clone());
            }
        }
    }
    t
}

fn write_entries(path: &Path, entries: &Entries) -> Result<()> {
    std::fs::write(path, render_entries(entries)).map_err(|e| CliError::io(path, e))
}

pub fn run(cfg: &ScenarioConfig) -> Result<RunArtifact> {
    run_with(cfg, Entries::new())
}

/// [`run`] with extra informational metadata entries.
pub fn run_with(cfg: &ScenarioConfig, extra: Entries) -> Result<RunArtifact> {
    let model = cfg.scenario.model()?;
    let g0 = model.gamma0();
    let correlator = Correlator::new(&model)?;
    let tau = default_tau_grid(cfg.tau_max_ns * NS, cfg.n_tau, g0)?;
    let mut result = correlator.g2(cfg.filter, &tau)?;
    if !cfg.decompose {
        result.g2_d = None;
        result.g2_coh_i = None;
        result.g2_coh_rho = None;
        result.g2_approx = None;
    }
    let g2_0 = result.g2[0];
    if cfg.symmetric {
        result = result.symmetric();
    }
    if let Some(parent) = cfg.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    let table_path = output_path(&cfg.out, "", "csv");
    correlation_table(&result, cfg.decompose).write(&table_path)?;

    let mut meta = cfg.entries();
    meta.extend(extra);
    let mut derived = |k: &str, v: f64| {
        meta.insert(format!("derived.{k}"), Value::Float(v));
    };
    derived("gamma0_rad_per_s", g0);
    derived("v_over_gamma0", model.coupling.v / g0);
    derived("gamma12_over_gamma0", model.coupling.gamma12 / g0);
    if let Ok(d) = dressed_states(model.coupling.v / g0, model.delta() / g0) {
        derived("lambda_over_gamma0", d.lambda_big);
        derived("theta", d.theta);
    }
    derived("phase", correlator.phase(cfg.filter));
    derived("mean_intensity", result.mean_intensity);
    derived("coherent_intensity", result.coherent_intensity);
    derived("g2_0", g2_0);

    let convolved = match &cfg.detector {
        None => None,
        Some(d) => {
            let bin_ns = d.bin_ps * PS / NS;
            let h_ns = bin_ns / (d.bin_ps / CONVOLUTION_STEP_PS).ceil();
            let n = (cfg.tau_max_ns / h_ns + 1e-9).floor() as usize + 1;
            let fine: Vec<f64> = (0..n).map(|k| k as f64 * h_ns * NS).collect();
            let raw = correlator.g2(cfg.filter, &fine)?;
            let c = detector_convolve(&raw, d.fwhm_ps * PS / NS, bin_ns)?;
            let c = if cfg.symmetric { c.symmetric() } else { c };
            let mut t = Table::new();
            t.push("tau_ns", c.tau_ns);
            t.push("g2_convolved", c.g2);
            let p = output_path(&cfg.out, "_convolved", "csv");
            t.write(&p)?;
            Some(p)
        }
    };

    let mcwf = match &cfg.mcwf {
        None => None,
        Some(m) => {
            let mut mc_cfg = McwfConfig::new(m.n_traj, cfg.tau_max_ns * NS, m.bin_ns * NS, cfg.seed);
            mc_cfg.record = m.record_ns * NS;
            let mc = mcwf_g2(&model, cfg.filter, &mc_cfg)?;
            meta.insert("derived.mcwf_burn_in_ns".into(), Value::Float(10.0 / g0 / NS));
            meta.insert("derived.mcwf_clicks".into(), Value::Integer(mc.clicks as i64));
            let mut t = Table::new();
            t.push("tau_ns", mc.tau_ns);
            t.push("mcwf_g2", mc.g2);
            t.push("mcwf_stderr", mc.stderr);
            let p = output_path(&cfg.out, "_mcwf", "csv");
            t.write(&p)?;
            Some(p)
        }
    };

    let spectrum = match &cfg.spectrum {
        None => None,
        Some(s) => {
            let step = (s.delta0_max - s.delta0_min) / (s.points - 1) as f64;
            let grid: Vec<f64> = (0..s.points).map(|k| (s.delta0_min + k as f64 * step) * g0).collect();
            let spec = excitation_spectrum(&model, &grid, &[cfg.scenario.rabi * g0])?.remove(0);
            if let Ok(d) = dressed_states(model.coupling.v / g0, model.delta() / g0) {
                let f = central_feature(&spec, d.lambda_big);
                meta.insert("derived.central_feature_ratio".into(), Value::Float(f.ratio));
            }
            let mut t = Table::new();
            t.push("delta0_over_gamma0", spec.detuning);
            t.push("intensity", spec.intensity);
            let p = output_path(&cfg.out, "_spectrum", "csv");
            t.write(&p)?;
            Some(p)
        }
    };

    let residuals = match &cfg.reference {
        None => None,
        Some(r) => {
            let res = compare_files(&table_path, r)?;
            let mut e = Entries::new();
            e.insert("points".into(), Value::Integer(res.points as i64));
            e.insert("max_abs".into(), Value::Float(res.max_abs));
            e.insert("rms".into(), Value::Float(res.rms));
            write_entries(&output_path(&cfg.out, "_residuals", "toml"), &e)?;
            Some(res)
        }
    };

    meta.insert("tool.name".into(), Value::String(env!("CARGO_PKG_NAME").into()));
    meta.insert("tool.version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
    let metadata = output_path(&cfg.out, "", "toml");
    write_entries(&metadata, &meta)?;
    Ok(RunArtifact {
        table: table_path,
        convolved,
        mcwf,
        spectrum,
        metadata,
        residuals,
        correlation: result,
        metadata_entries: meta,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    /// `|Ω|/γ₀`.
    Rabi,
    /// `Δ₀/γ₀`.
    Delta0,
    /// `δ/γ₀`.
    Delta,
    /// `|r₁₂|` in nm along the current separation; couplings follow the geometry.
    R12,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Rabi => "rabi",
            Axis::Delta0 => "delta0",
            Axis::Delta => "delta",
            Axis::R12 => "r12",
        }
    }

    pub fn apply(self, s: &Scenario, value: f64) -> Scenario {
        let mut s = s.clone();
        match self {
            Axis::Rabi => s.rabi = value,
            Axis::Delta0 => s.delta0 = value,
            Axis::Delta => s.delta = value,
            Axis::R12 => {
                let r = s.positions_nm[1] - s.positions_nm[0];
                let dir = if r.norm() > 0.0 { r / r.norm() } else { Vector3::x() };
                s.positions_nm[1] = s.positions_nm[0] + dir * value;
                s.coupling_source = CouplingSource::FromGeometry;
            }
        }
        s
    }
}

impl FromStr for Axis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        [Axis::Rabi, Axis::Delta0, Axis::Delta, Axis::R12]
            .into_iter()
            .find(|a| a.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| CliError::UnknownAxis(s.to_string()))
    }
}

/// One run per value, computed concurrently and returned in input order.
/// Outputs go to `<out>_<axis><index>`.
pub fn sweep(cfg: &ScenarioConfig, axis: Axis, values: &[f64]) -> Result<Vec<RunArtifact>> {
    values
        .par_iter()
        .enumerate()
        .map(|(k, &v)| {
            let mut c = cfg.clone();
            c.scenario = axis.apply(&cfg.scenario, v);
            let mut name = cfg.out.as_os_str().to_os_string();
            name.push(format!("_{}{k}", axis.name()));
            c.out = PathBuf::from(name);
            let mut extra = Entries::new();
            extra.insert("source.sweep_axis".into(), Value::String(axis.name().into()));
            extra.insert("source.sweep_value".into(), Value::Float(v));
            run_with(&c, extra)
        })
        .collect()
}
