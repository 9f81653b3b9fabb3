//! Shared fixtures for the benchmarks.

use std::f64::consts::PI;

use thinplate::{sample, GridField};

/// `cos(πx1) + cos(πx2)` on an `n × n` grid.
pub fn two_mode_field(n: usize) -> GridField {
    sample(|x1, x2| (PI * x1).cos() + (PI * x2).cos(), n, n).unwrap()
}

/// A smooth field with a slowly decaying cosine spectrum.
pub fn bump_field(n: usize) -> GridField {
    sample(|x1, x2| (-20.0 * ((x1 - 0.3).powi(2) + (x2 - 0.6).powi(2))).exp(), n, n).unwrap()
}
