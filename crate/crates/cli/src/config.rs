// Copyright 2026 The stokes-g2 Authors
// SPDX-License-Identifier: Apache-2.0

//! Flat dotted-key run configuration: `drive.rabi_over_gamma0 = 1.5`.
//!
//! A preset supplies every physics key; any key given alongside it overrides
//! that one field. Without a preset every physics key must be present.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use stokes_g2::model::{CouplingSource, LevelScheme, Variant};
use stokes_g2::observables::FilterKind;
use stokes_g2::presets::{Preset, Scenario};
use toml::Value;

use crate::error::{CliError, Result};

pub type Entries = BTreeMap<String, Value>;

/// Namespaces written to metadata for information only; skipped on load.
const INFORMATIONAL: [&str; 3] = ["tool.", "derived.", "source."];

const PHYSICS_KEYS: [&str; 21] = [
    "emitter.count",
    "emitter.gamma0_mhz",
    "emitter.alpha",
    "emitter1.dipole",
    "emitter1.position_nm",
    "emitter2.dipole",
    "emitter2.position_nm",
    "geometry.refractive_index",
    "geometry.lambda0_nm",
    "geometry.k_laser",
    "geometry.k_detect",
    "coupling.source",
    "coupling.v_over_gamma0",
    "coupling.gamma12_over_gamma0",
    "drive.rabi_over_gamma0",
    "drive.delta0_over_gamma0",
    "drive.delta_over_gamma0",
    "vib.energy_mev",
    "vib.lifetime_ps",
    "model.scheme",
    "model.variant",
];

pub const DEFAULT_TAU_MAX_NS: f64 = 60.0;
pub const DEFAULT_N_TAU: usize = 2000;
pub const DEFAULT_OUT: &str = "stokes_g2";

#[derive(Clone, Debug, PartialEq)]
pub struct DetectorSettings {
    pub fwhm_ps: f64,
    pub bin_ps: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct McwfSettings {
    pub n_traj: usize,
    pub bin_ns: f64,
    pub record_ns: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumSettings {
    pub delta0_min: f64,
    pub delta0_max: f64,
    pub points: usize,
}

/// A fully resolved run description.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub preset: Option<Preset>,
    /// Physics keys given on top of the preset.
    pub overrides: Vec<String>,
    pub scenario: Scenario,
    pub filter: FilterKind,
    pub tau_max_ns: f64,
    pub n_tau: usize,
    pub decompose: bool,
    /// Mirror the table onto negative delays.
    pub symmetric: bool,
    pub detector: Option<DetectorSettings>,
    pub mcwf: Option<McwfSettings>,
    pub seed: u64,
    pub spectrum: Option<SpectrumSettings>,
    pub reference: Option<PathBuf>,
    pub out: PathBuf,
}

/// Flattens nested tables into dotted keys.
pub fn flatten(table: &toml::Table) -> Entries {
    fn walk(prefix: &str, t: &toml::Table, out: &mut Entries) {
        for (k, v) in t {
            let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            match v {
                Value::Table(inner) => walk(&key, inner, out),
                other => {
                    out.insert(key, other.clone());
                }
            }
        }
    }
    let mut out = Entries::new();
    walk("", table, &mut out);
    out
}

pub fn parse_entries(text: &str, origin: &Path) -> Result<Entries> {
    let table: toml::Table = text.parse().map_err(|e| CliError::io(origin, e))?;
    Ok(flatten(&table))
}

pub fn read_entries(path: &Path) -> Result<Entries> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_entries(&text, path)
}

/// `key=value` with a TOML value; bare words are taken as strings.
pub fn parse_assignment(s: &str) -> Result<(String, Value)> {
    let (key, raw) = s
        .split_once('=')
        .ok_or_else(|| CliError::invalid(s, "expected key=value"))?;
    let key = key.trim().to_string();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    Ok((key, value))
}

/// Metadata text: one `key = value` line per entry, sorted by key.
pub fn render_entries(entries: &Entries) -> String {
    entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

struct Reader<'a> {
    map: &'a Entries,
    seen: RefCell<BTreeSet<String>>,
}

impl<'a> Reader<'a> {
    fn get(&self, key: &str) -> Option<&'a Value> {
        self.seen.borrow_mut().insert(key.to_string());
        self.map.get(key)
    }

    fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|v| number(key, v)).transpose()
    }

    fn int(&self, key: &str) -> Result<Option<i64>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) => Ok(Some(*i)),
            Some(_) => Err(CliError::invalid(key, "expected an integer")),
        }
    }

    fn bool(&self, key: &str) -> Result<Option<bool>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(*b)),
            Some(_) => Err(CliError::invalid(key, "expected true or false")),
        }
    }

    fn string(&self, key: &str) -> Result<Option<&'a str>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(_) => Err(CliError::invalid(key, "expected a string")),
        }
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Array(a)) => a.iter().map(|v| number(key, v)).collect::<Result<Vec<_>>>().map(Some),
            Some(v) => Ok(Some(vec![number(key, v)?])),
        }
    }

    fn vec3(&self, key: &str) -> Result<Option<Vector3<f64>>> {
        match self.list(key)? {
            None => Ok(None),
            Some(v) if v.len() == 3 => Ok(Some(Vector3::new(v[0], v[1], v[2]))),
            Some(_) => Err(CliError::invalid(key, "expected [x, y, z]")),
        }
    }

    fn unit(&self, key: &str) -> Result<Option<Vector3<f64>>> {
        let v = self.vec3(key)?;
        if let Some(u) = v {
            if (u.norm() - 1.0).abs() > 1e-12 {
                return Err(CliError::invalid(key, format!("not a unit vector (norm {})", u.norm())));
            }
        }
        Ok(v)
    }
}

fn number(key: &str, v: &Value) -> Result<f64> {
    let x = match v {
        Value::Float(x) => *x,
        Value::Integer(i) => *i as f64,
        _ => return Err(CliError::invalid(key, "expected a number")),
    };
    if !x.is_finite() {
        return Err(CliError::invalid(key, "must be finite"));
    }
    Ok(x)
}

fn required<T>(key: &str, given: Option<T>, fallback: Option<T>) -> Result<T> {
    given
        .or(fallback)
        .ok_or_else(|| CliError::invalid(key, "missing (required without a preset)"))
}

pub fn parse_scheme(s: &str) -> Option<LevelScheme> {
    [LevelScheme::Tls, LevelScheme::OneVib, LevelScheme::TwoVib]
        .into_iter()
        .find(|x| x.name().eq_ignore_ascii_case(s))
}

pub fn parse_variant(s: &str) -> Option<Variant> {
    [Variant::Main, Variant::TlsFramework, Variant::AltZplRate]
        .into_iter()
        .find(|x| x.name().eq_ignore_ascii_case(s))
}

fn source_name(s: CouplingSource) -> &'static str {
    match s {
        CouplingSource::Override => "override",
        CouplingSource::FromGeometry => "geometry",
    }
}

fn resolve_scenario(r: &Reader, base: Option<&Scenario>) -> Result<Scenario> {
    let n_emitters = required("emitter.count", r.int("emitter.count")?, base.map(|s| s.n_emitters as i64))?;
    if !(1..=2).contains(&n_emitters) {
        return Err(CliError::invalid("emitter.count", "must be 1 or 2"));
    }
    let pair = n_emitters == 2;
    let scheme = match r.string("model.scheme")? {
        Some(s) => Some(parse_scheme(s).ok_or_else(|| CliError::invalid("model.scheme", "expected tls, onevib or twovib"))?),
        None => None,
    };
    let scheme = required("model.scheme", scheme, base.map(|s| s.scheme))?;
    let variant = match r.string("model.variant")? {
        Some(s) => Some(parse_variant(s).ok_or_else(|| CliError::invalid("model.variant", "expected main, tls or alt"))?),
        None => None,
    };
    let variant = required("model.variant", variant, base.map(|s| s.variant))?;
    let source = match r.string("coupling.source")? {
        Some("override") => Some(CouplingSource::Override),
        Some("geometry") => Some(CouplingSource::FromGeometry),
        Some(_) => return Err(CliError::invalid("coupling.source", "expected override or geometry")),
        None => None,
    };
    let source = if pair {
        required("coupling.source", source, base.map(|s| s.coupling_source))?
    } else {
        source.unwrap_or(CouplingSource::Override)
    };
    let explicit_couplings = pair && source == CouplingSource::Override;
    let vib = scheme.vib_modes() > 0;

    // fields that the chosen model does not use fall back to neutral values
    let optional = |key: &str, given: Option<f64>, from_base: Option<f64>, needed: bool, neutral: f64| -> Result<f64> {
        if needed {
            required(key, given, from_base)
        } else {
            Ok(given.or(from_base).unwrap_or(neutral))
        }
    };

    let dipole1 = required("emitter1.dipole", r.unit("emitter1.dipole")?, base.map(|s| s.dipoles[0]))?;
    let position1 = required("emitter1.position_nm", r.vec3("emitter1.position_nm")?, base.map(|s| s.positions_nm[0]))?;
    let dipole2 = match r.unit("emitter2.dipole")? {
        Some(v) => v,
        None if pair => required("emitter2.dipole", None, base.map(|s| s.dipoles[1]))?,
        None => base.map_or(dipole1, |s| s.dipoles[1]),
    };
    let position2 = match r.vec3("emitter2.position_nm")? {
        Some(v) => v,
        None if pair => required("emitter2.position_nm", None, base.map(|s| s.positions_nm[1]))?,
        None => base.map_or(position1, |s| s.positions_nm[1]),
    };
    let vib_mev = match r.list("vib.energy_mev")? {
        Some(v) => v,
        None if vib => required("vib.energy_mev", None, base.map(|s| s.vib_mev.clone()))?,
        None => base.map_or_else(Vec::new, |s| s.vib_mev.clone()),
    };

    let s = Scenario {
        n_emitters: n_emitters as usize,
        gamma0_mhz: required("emitter.gamma0_mhz", r.f64("emitter.gamma0_mhz")?, base.map(|s| s.gamma0_mhz))?,
        alpha: required("emitter.alpha", r.f64("emitter.alpha")?, base.map(|s| s.alpha))?,
        refractive_index: required(
            "geometry.refractive_index",
            r.f64("geometry.refractive_index")?,
            base.map(|s| s.refractive_index),
        )?,
        lambda0_nm: required("geometry.lambda0_nm", r.f64("geometry.lambda0_nm")?, base.map(|s| s.lambda0_nm))?,
        k_laser: required("geometry.k_laser", r.unit("geometry.k_laser")?, base.map(|s| s.k_laser))?,
        k_detect: required("geometry.k_detect", r.unit("geometry.k_detect")?, base.map(|s| s.k_detect))?,
        dipoles: [dipole1, dipole2],
        positions_nm: [position1, position2],
        coupling_source: source,
        v: optional(
            "coupling.v_over_gamma0",
            r.f64("coupling.v_over_gamma0")?,
            base.map(|s| s.v),
            explicit_couplings,
            0.0,
        )?,
        gamma12: optional(
            "coupling.gamma12_over_gamma0",
            r.f64("coupling.gamma12_over_gamma0")?,
            base.map(|s| s.gamma12),
            explicit_couplings,
            0.0,
        )?,
        delta: optional("drive.delta_over_gamma0", r.f64("drive.delta_over_gamma0")?, base.map(|s| s.delta), pair, 0.0)?,
        delta0: required("drive.delta0_over_gamma0", r.f64("drive.delta0_over_gamma0")?, base.map(|s| s.delta0))?,
        rabi: required("drive.rabi_over_gamma0", r.f64("drive.rabi_over_gamma0")?, base.map(|s| s.rabi))?,
        vib_mev,
        vib_lifetime_ps: optional(
            "vib.lifetime_ps",
            r.f64("vib.lifetime_ps")?,
            base.map(|s| s.vib_lifetime_ps),
            vib,
            0.0,
        )?,
        scheme,
        variant,
    };
    if !(s.gamma0_mhz > 0.0) {
        return Err(CliError::invalid("emitter.gamma0_mhz", "must be positive"));
    }
    if !(s.alpha > 0.0 && s.alpha <= 1.0) {
        return Err(CliError::invalid("emitter.alpha", "must lie in (0, 1]"));
    }
    if !(s.refractive_index >= 1.0) {
        return Err(CliError::invalid("geometry.refractive_index", "must be at least 1"));
    }
    if !(s.lambda0_nm > 0.0) {
        return Err(CliError::invalid("geometry.lambda0_nm", "must be positive"));
    }
    if s.vib_mev.len() < scheme.vib_modes() {
        return Err(CliError::invalid(
            "vib.energy_mev",
            format!("scheme {} needs {} energies", scheme.name(), scheme.vib_modes()),
        ));
    }
    if vib && (s.vib_mev.iter().any(|e| !(*e > 0.0)) || !(s.vib_lifetime_ps > 0.0)) {
        return Err(CliError::invalid("vib", "energies and lifetime must be positive"));
    }
    if pair && (s.positions_nm[0] - s.positions_nm[1]).norm() == 0.0 && source == CouplingSource::FromGeometry {
        return Err(CliError::invalid("emitter2.position_nm", "coincides with emitter 1"));
    }
    Ok(s)
}

impl ScenarioConfig {
    /// Reads an optional config file, then applies `overrides` in order.
    pub fn load(path: Option<&Path>, overrides: &[(String, Value)]) -> Result<Self> {
        let mut entries = match path {
            Some(p) => read_entries(p)?,
            None => Entries::new(),
        };
        for (k, v) in overrides {
            entries.insert(k.clone(), v.clone());
        }
        Self::from_entries(&entries)
    }

    pub fn from_entries(entries: &Entries) -> Result<Self> {
        let r = Reader {
            map: entries,
            seen: RefCell::new(BTreeSet::new()),
        };
        let preset = match r.string("preset")? {
            Some(p) => Some(p.parse::<Preset>().map_err(|e| CliError::invalid("preset", e.to_string()))?),
            None => None,
        };
        let base = preset.map(|p| p.scenario());
        let scenario = resolve_scenario(&r, base.as_ref())?;
        let overrides = if preset.is_some() {
            PHYSICS_KEYS
                .iter()
                .filter(|k| entries.contains_key(**k))
                .map(|k| k.to_string())
                .collect()
        } else {
            Vec::new()
        };

        let filter = match r.string("filter")? {
            Some(f) => f.parse::<FilterKind>().map_err(|e| CliError::invalid("filter", e.to_string()))?,
            None => FilterKind::Zpl,
        };
        let tau_max_ns = r.f64("tau_max_ns")?.unwrap_or(DEFAULT_TAU_MAX_NS);
        if !(tau_max_ns > 0.0) {
            return Err(CliError::invalid("tau_max_ns", "must be positive"));
        }
        let n_tau = r.int("n_tau")?.unwrap_or(DEFAULT_N_TAU as i64);
        if n_tau < 4 {
            return Err(CliError::invalid("n_tau", "need at least 4 delays"));
        }
        let detector = match (r.f64("detector.fwhm_ps")?, r.f64("detector.bin_ps")?) {
            (None, None) => None,
            (Some(fwhm_ps), Some(bin_ps)) => {
                if !(fwhm_ps >= 0.0) {
                    return Err(CliError::invalid("detector.fwhm_ps", "must be non-negative"));
                }
                if !(bin_ps > 0.0) {
                    return Err(CliError::invalid("detector.bin_ps", "must be positive"));
                }
                Some(DetectorSettings { fwhm_ps, bin_ps })
            }
            (Some(_), None) => return Err(CliError::invalid("detector.bin_ps", "required with detector.fwhm_ps")),
            (None, Some(_)) => return Err(CliError::invalid("detector.fwhm_ps", "required with detector.bin_ps")),
        };
        if let Some(k) = r.string("detector.kernel")? {
            if k != "gaussian" {
                return Err(CliError::invalid("detector.kernel", "only gaussian is supported"));
            }
        }
        let seed = r.int("mcwf.seed")?.unwrap_or(0);
        if seed < 0 {
            return Err(CliError::invalid("mcwf.seed", "must be non-negative"));
        }
        let bin_ns = r.f64("mcwf.bin_ns")?.unwrap_or(tau_max_ns / 100.0);
        let record_ns = r.f64("mcwf.record_ns")?.unwrap_or(5.0 * tau_max_ns);
        let mcwf = match r.int("mcwf.n_traj")? {
            None => None,
            Some(n) if n < 1 => return Err(CliError::invalid("mcwf.n_traj", "must be at least 1")),
            Some(n) => {
                if !(bin_ns > 0.0 && bin_ns <= tau_max_ns) {
                    return Err(CliError::invalid("mcwf.bin_ns", "must lie in (0, tau_max_ns]"));
                }
                if !(record_ns > tau_max_ns) {
                    return Err(CliError::invalid("mcwf.record_ns", "must exceed tau_max_ns"));
                }
                Some(McwfSettings {
                    n_traj: n as usize,
                    bin_ns,
                    record_ns,
                })
            }
        };
        let spectrum = match (
            r.f64("spectrum.delta0_min_over_gamma0")?,
            r.f64("spectrum.delta0_max_over_gamma0")?,
            r.int("spectrum.points")?,
        ) {
            (None, None, None) => None,
            (Some(lo), Some(hi), Some(n)) => {
                if !(hi > lo) {
                    return Err(CliError::invalid("spectrum.delta0_max_over_gamma0", "must exceed the minimum"));
                }
                if n < 2 {
                    return Err(CliError::invalid("spectrum.points", "need at least 2"));
                }
                Some(SpectrumSettings {
                    delta0_min: lo,
                    delta0_max: hi,
                    points: n as usize,
                })
            }
            _ => {
                return Err(CliError::invalid(
                    "spectrum",
                    "delta0_min_over_gamma0, delta0_max_over_gamma0 and points go together",
                ))
            }
        };
        let cfg = ScenarioConfig {
            preset,
            overrides,
            scenario,
            filter,
            tau_max_ns,
            n_tau: n_tau as usize,
            decompose: r.bool("decompose")?.unwrap_or(false),
            symmetric: r.bool("symmetric")?.unwrap_or(false),
            detector,
            mcwf,
            seed: seed as u64,
            spectrum,
            reference: r.string("reference")?.map(PathBuf::from),
            out: PathBuf::from(r.string("out")?.unwrap_or(DEFAULT_OUT)),
        };
        let seen = r.seen.into_inner();
        if let Some(k) = entries
            .keys()
            .find(|k| !seen.contains(*k) && !INFORMATIONAL.iter().any(|p| k.starts_with(p)))
        {
            return Err(CliError::invalid(k.clone(), "unknown key"));
        }
        Ok(cfg)
    }

    /// Every resolved setting as loadable entries (no preset key: the
    /// physics is spelled out).
    pub fn entries(&self) -> Entries {
        let s = &self.scenario;
        let f = Value::Float;
        let v3 = |v: &Vector3<f64>| Value::Array(v.iter().map(|x| Value::Float(*x)).collect());
        let mut e = Entries::new();
        let mut put = |k: &str, v: Value| {
            e.insert(k.to_string(), v);
        };
        put("emitter.count", Value::Integer(s.n_emitters as i64));
        put("emitter.gamma0_mhz", f(s.gamma0_mhz));
        put("emitter.alpha", f(s.alpha));
        put("emitter1.dipole", v3(&s.dipoles[0]));
        put("emitter1.position_nm", v3(&s.positions_nm[0]));
        put("emitter2.dipole", v3(&s.dipoles[1]));
        put("emitter2.position_nm", v3(&s.positions_nm[1]));
        put("geometry.refractive_index", f(s.refractive_index));
        put("geometry.lambda0_nm", f(s.lambda0_nm));
        put("geometry.k_laser", v3(&s.k_laser));
        put("geometry.k_detect", v3(&s.k_detect));
        put("coupling.source", Value::String(source_name(s.coupling_source).into()));
        put("coupling.v_over_gamma0", f(s.v));
        put("coupling.gamma12_over_gamma0", f(s.gamma12));
        put("drive.rabi_over_gamma0", f(s.rabi));
        put("drive.delta0_over_gamma0", f(s.delta0));
        put("drive.delta_over_gamma0", f(s.delta));
        put("vib.energy_mev", Value::Array(s.vib_mev.iter().map(|x| Value::Float(*x)).collect()));
        put("vib.lifetime_ps", f(s.vib_lifetime_ps));
        put("model.scheme", Value::String(s.scheme.name().into()));
        put("model.variant", Value::String(s.variant.name().into()));

        put("filter", Value::String(self.filter.to_string()));
        put("tau_max_ns", f(self.tau_max_ns));
        put("n_tau", Value::Integer(self.n_tau as i64));
        put("decompose", Value::Boolean(self.decompose));
        put("symmetric", Value::Boolean(self.symmetric));
        if let Some(d) = &self.detector {
            put("detector.fwhm_ps", f(d.fwhm_ps));
            put("detector.bin_ps", f(d.bin_ps));
            put("detector.kernel", Value::String("gaussian".into()));
        }
        put("mcwf.seed", Value::Integer(self.seed as i64));
        if let Some(m) = &self.mcwf {
            put("mcwf.n_traj", Value::Integer(m.n_traj as i64));
            put("mcwf.bin_ns", f(m.bin_ns));
            put("mcwf.record_ns", f(m.record_ns));
        }
        if let Some(sp) = &self.spectrum {
            put("spectrum.delta0_min_over_gamma0", f(sp.delta0_min));
            put("spectrum.delta0_max_over_gamma0", f(sp.delta0_max));
            put("spectrum.points", Value::Integer(sp.points as i64));
        }
        if let Some(r) = &self.reference {
            put("reference", Value::String(r.display().to_string()));
        }
        put("out", Value::String(self.out.display().to_string()));
        if let Some(p) = self.preset {
            put("source.preset", Value::String(p.name().into()));
            put(
                "source.overrides",
                Value::Array(self.overrides.iter().map(|o| Value::String(o.clone())).collect()),
            );
        }
        e
    }
}
