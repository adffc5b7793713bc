// Copyright 2026 The stokes-g2 Authors
// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use crate::error::{Error, Result};
use crate::linops::{c64, ComplexMatrix};

/// Electronic/vibrational level scheme of a single emitter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LevelScheme {
    /// Two-level system {g, e}.
    Tls,
    /// {g, e, v}: one 1-phonon state in the electronic ground state.
    OneVib,
    /// {g, e, v1, v2}: two vibrational modes.
    TwoVib,
}

impl LevelScheme {
    pub fn levels_per_emitter(self) -> usize {
        2 + self.vib_modes()
    }

    pub fn vib_modes(self) -> usize {
        match self {
            LevelScheme::Tls => 0,
            LevelScheme::OneVib => 1,
            LevelScheme::TwoVib => 2,
        }
    }

    pub fn from_vib_modes(n: usize) -> Result<Self> {
        match n {
            0 => Ok(LevelScheme::Tls),
            1 => Ok(LevelScheme::OneVib),
            2 => Ok(LevelScheme::TwoVib),
            _ => Err(Error::UnsupportedScheme(format!("{n} vibrational modes"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LevelScheme::Tls => "tls",
            LevelScheme::OneVib => "onevib",
            LevelScheme::TwoVib => "twovib",
        }
    }
}

/// Single-emitter level. Vibrational modes are numbered from 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    G,
    E,
    V(u8),
}

impl Level {
    /// Position in the per-emitter ordering g < e < v1 < v2.
    pub fn index(self) -> usize {
        match self {
            Level::G => 0,
            Level::E => 1,
            Level::V(n) => 1 + n as usize,
        }
    }

    fn from_index(i: usize) -> Level {
        match i {
            0 => Level::G,
            1 => Level::E,
            n => Level::V((n - 1) as u8),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::G => write!(f, "g"),
            Level::E => write!(f, "e"),
            Level::V(n) => write!(f, "v{n}"),
        }
    }
}

/// Tensor-product space of one or two emitters, emitter 1 most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct HilbertSpace {
    scheme: LevelScheme,
    n_emitters: usize,
    levels_per_emitter: usize,
    dim: usize,
    labels: Vec<Vec<Level>>,
}

/// Enumerates the basis in lexicographic order over (emitter-1, emitter-2).
pub fn build_space(scheme: LevelScheme, n_emitters: usize) -> Result<HilbertSpace> {
    if !(1..=2).contains(&n_emitters) {
        return Err(Error::UnsupportedScheme(format!("{n_emitters} emitters")));
    }
    let levels = scheme.levels_per_emitter();
    let dim = levels.pow(n_emitters as u32);
    let labels = (0..dim)
        .map(|idx| {
            let mut rem = idx;
            let mut label = vec![Level::G; n_emitters];
            for slot in label.iter_mut().rev() {
                *slot = Level::from_index(rem % levels);
                rem /= levels;
            }
            label
        })
        .collect();
    Ok(HilbertSpace {
        scheme,
        n_emitters,
        levels_per_emitter: levels,
        dim,
        labels,
    })
}

impl HilbertSpace {
    pub fn scheme(&self) -> LevelScheme {
        self.scheme
    }

    pub fn n_emitters(&self) -> usize {
        self.n_emitters
    }

    pub fn levels_per_emitter(&self) -> usize {
        self.levels_per_emitter
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[Vec<Level>] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &[Level] {
        &self.labels[index]
    }

    fn check_level(&self, level: Level) -> Result<()> {
        if level.index() < self.levels_per_emitter && !matches!(level, Level::V(0)) {
            Ok(())
        } else {
            Err(Error::InvalidLabel(format!(
                "{level} not in scheme {}",
                self.scheme.name()
            )))
        }
    }

    /// Basis index of a composite label such as `[E, V(1)]`.
    pub fn index_of(&self, label: &[Level]) -> Result<usize> {
        if label.len() != self.n_emitters {
            return Err(Error::InvalidLabel(format!(
                "label has {} entries for {} emitters",
                label.len(),
                self.n_emitters
            )));
        }
        let mut idx = 0;
        for &l in label {
            self.check_level(l)?;
            idx = idx * self.levels_per_emitter + l.index();
        }
        Ok(idx)
    }

    /// `|label⟩` as a column vector.
    pub fn ket(&self, label: &[Level]) -> Result<crate::linops::ComplexVector> {
        let i = self.index_of(label)?;
        let mut v = crate::linops::ComplexVector::zeros(self.dim);
        v[i] = c64(1.0, 0.0);
        Ok(v)
    }

    /// `|row⟩⟨col|` on `emitter` (0-based) tensored with identity elsewhere.
    pub fn local_operator(&self, emitter: usize, row: Level, col: Level) -> Result<ComplexMatrix> {
        if emitter >= self.n_emitters {
            return Err(Error::InvalidLabel(format!(
                "emitter index {emitter} out of range for {} emitters",
                self.n_emitters
            )));
        }
        self.check_level(row)?;
        self.check_level(col)?;
        let mut m = ComplexMatrix::zeros(self.dim, self.dim);
        for (i, label) in self.labels.iter().enumerate() {
            if label[emitter] != col {
                continue;
            }
            let mut target = label.clone();
            target[emitter] = row;
            let j = self.index_of(&target)?;
            m[(j, i)] = c64(1.0, 0.0);
        }
        Ok(m)
    }

    /// ZPL lowering operator `σ_j = |g_j⟩⟨e_j|`.
    pub fn sigma(&self, emitter: usize) -> Result<ComplexMatrix> {
        self.local_operator(emitter, Level::G, Level::E)
    }

    /// Vibrational levels available per emitter.
    pub fn vib_levels(&self) -> impl Iterator<Item = Level> {
        (1..=self.scheme.vib_modes() as u8).map(Level::V)
    }

    /// Compact label like `ev1` or `ge`.
    pub fn label_string(&self, index: usize) -> String {
        self.labels[index].iter().map(|l| l.to_string()).collect()
    }
}

/// Free-function form of [`HilbertSpace::local_operator`].
pub fn local_operator(space: &HilbertSpace, emitter: usize, row: Level, col: Level) -> Result<ComplexMatrix> {
    space.local_operator(emitter, row, col)
}
