// Copyright 2026 The stokes-g2 Authors
// SPDX-License-Identifier: Apache-2.0

//! Residuals of a simulated curve against a user-supplied reference table.

use std::path::Path;

use crate::error::{CliError, Result};
use crate::table::Table;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residuals {
    /// Reference points inside the simulated delay range.
    pub points: usize,
    pub max_abs: f64,
    pub rms: f64,
}

/// Linear interpolation of `(xs, ys)` at `x`; `xs` strictly increasing and
/// `x` inside its range.
fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let k = xs.partition_point(|t| *t <= x);
    if k == 0 {
        return ys[0];
    }
    if k == xs.len() {
        return ys[xs.len() - 1];
    }
    let (x0, x1) = (xs[k - 1], xs[k]);
    let w = (x - x0) / (x1 - x0);
    ys[k - 1] + w * (ys[k] - ys[k - 1])
}

/// Simulation interpolated onto the reference delays; neither curve is rescaled.
pub fn compare(sim_tau: &[f64], sim_g2: &[f64], ref_tau: &[f64], ref_g2: &[f64]) -> Result<Residuals> {
    if sim_tau.len() != sim_g2.len() || ref_tau.len() != ref_g2.len() {
        return Err(CliError::invalid("table", "column lengths differ"));
    }
    if sim_tau.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CliError::invalid("tau_ns", "simulation delays must be strictly increasing"));
    }
    let (Some(&lo), Some(&hi)) = (sim_tau.first(), sim_tau.last()) else {
        return Err(CliError::NoOverlap);
    };
    let diffs: Vec<f64> = ref_tau
        .iter()
        .zip(ref_g2)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(t, g)| interpolate(sim_tau, sim_g2, *t) - g)
        .collect();
    if diffs.is_empty() {
        return Err(CliError::NoOverlap);
    }
    Ok(Residuals {
        points: diffs.len(),
        max_abs: diffs.iter().fold(0.0, |m, d| m.max(d.abs())),
        rms: (diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64).sqrt(),
    })
}

fn curve<'a>(t: &'a Table, path: &Path) -> Result<(&'a [f64], &'a [f64])> {
    let tau = t.column("tau_ns").ok_or_else(|| CliError::invalid(path.display().to_string(), "no tau_ns column"))?;
    let g2 = t.column("g2").ok_or_else(|| CliError::invalid(path.display().to_string(), "no g2 column"))?;
    Ok((tau, g2))
}

pub fn compare_files(simulation: &Path, reference: &Path) -> Result<Residuals> {
    let sim = Table::read(simulation)?;
    let rf = Table::read(reference)?;
    let (st, sg) = curve(&sim, simulation)?;
    let (rt, rg) = curve(&rf, reference)?;
    compare(st, sg, rt, rg)
}
