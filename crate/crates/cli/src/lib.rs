// Copyright 2026 The stokes-g2 Authors
// SPDX-License-Identifier: Apache-2.0

//! Batch front end: config files and presets in, CSV tables and flat
//! metadata out.

pub mod compare;
pub mod config;
pub mod error;
pub mod run;
pub mod table;

pub use compare::{compare, compare_files, Residuals};
pub use config::ScenarioConfig;
pub use error::{CliError, Result};
pub use run::{run, sweep, Axis, RunArtifact};
