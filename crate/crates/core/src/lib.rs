// Copyright 2026 The stokes-g2 Authors
// SPDX-License-Identifier: Apache-2.0

//! Photon correlations of ZPL and Stokes-shifted light from one or two
//! coupled quantum emitters with vibrational levels.

pub mod dynamics;
pub mod error;
pub mod linops;
pub mod model;
pub mod observables;
pub mod presets;
pub mod units;

pub use error::{Error, Result};
