// Copyright 2026 The stokes-g2 Authors
// SPDX-License-Identifier: Apache-2.0

//! Reporting for the acceptance suite: each criterion collects sub-checks and
//! prints one PASS/FAIL line. The suite lives in its own package so that it
//! runs after every other test target of the workspace.

use std::panic::{catch_unwind, AssertUnwindSafe};

/// A named criterion.
pub type Criterion = (&'static str, fn() -> Outcome);

pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

/// Sub-checks of one criterion; failing ones are marked `[x]`.
pub struct Checks {
    pass: bool,
    notes: Vec<String>,
}

impl Default for Checks {
    fn default() -> Self {
        Checks {
            pass: true,
            notes: Vec::new(),
        }
    }
}

impl Checks {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn check(&mut self, ok: bool, note: String) {
        self.pass &= ok;
        self.notes.push(if ok { note } else { format!("{note} [x]") });
    }

    pub fn done(self) -> Outcome {
        Outcome {
            pass: self.pass,
            detail: self.notes.join("; "),
        }
    }
}

fn panic_message(e: &(dyn std::any::Any + Send)) -> String {
    e.downcast_ref::<String>()
        .cloned()
        .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_default()
}

/// Runs every criterion, printing one line each; a panic counts as a failure
/// and does not stop the remaining criteria. Returns the number that failed.
pub fn run_criteria(criteria: &[Criterion]) -> usize {
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| Outcome {
            pass: false,
            detail: format!("panicked: {}", panic_message(e.as_ref())),
        });
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {} ({name}): {}", k + 1, outcome.detail);
        failed += usize::from(!outcome.pass);
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    failed
}
