//! Closed-form eigenpairs of the Neumann operator `-∂²ₓ₁ - ε⁻²∂²ₓ₂` on the
//! unit square and lazy enumeration of its spectrum in nondecreasing order.
//!
//! The eigenvalues are `π²(m² + n²/ε²)` for `m, n ≥ 0`. On the unit square the
//! normalized eigenfunctions `a_{m,n} cos(mπx₁) cos(nπx₂)` do not depend on ε;
//! on the physical plate `(0,1) × (0,ε)` they pick up a factor `ε^{-1/2}`.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashSet};
use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::Epsilon;
use crate::error::{Error, Result};

/// `π²` rounded once. Every eigenvalue in the crate is `PI_SQ * s` for an
/// exactly representable or correctly rounded `s`, so eigenvalues that agree
/// mathematically on integer `s` agree bitwise.
pub const PI_SQ: f64 = PI * PI;

/// Lattice index `(m, n)`: `m` is the frequency along `x1`, `n` along `x2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeIndex {
    pub m: u32,
    pub n: u32,
}

impl ModeIndex {
    pub const fn new(m: u32, n: u32) -> Self {
        ModeIndex { m, n }
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.m, self.n)
    }
}

/// An eigenvalue together with its mode and its 1-based position in the
/// sorted spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    pub mode: ModeIndex,
    pub lambda: f64,
    pub rank: usize,
}

/// Normalization constant `a_{m,n}`: 1 for the constant mode, `√2` when
/// exactly one index vanishes, 2 otherwise.
pub fn norm_const(mode: ModeIndex) -> f64 {
    match (mode.m, mode.n) {
        (0, 0) => 1.0,
        (0, _) | (_, 0) => SQRT_2,
        _ => 2.0,
    }
}

/// `π²(m² + (n/ε)²)`. The quotient is formed before squaring so extreme
/// `n/ε` overflows to `+∞` instead of losing precision early.
#[inline]
pub fn eigenvalue(mode: ModeIndex, eps: Epsilon) -> f64 {
    let m = mode.m as f64;
    let q = mode.n as f64 / eps.value();
    PI_SQ * (m * m + q * q)
}

/// `cos(kπx)` as used by every eigenfunction evaluation in the crate.
#[inline]
pub(crate) fn cos_mode(k: u32, x: f64) -> f64 {
    (k as f64 * PI * x).cos()
}

/// Normalized eigenfunction on the unit square, `a_{m,n} cos(mπx₁) cos(nπx₂)`.
pub fn eigenfunction_rescaled(mode: ModeIndex, x1: f64, x2: f64) -> f64 {
    norm_const(mode) * cos_mode(mode.m, x1) * cos_mode(mode.n, x2)
}

/// Normalized eigenfunction on the plate `(0,1) × (0,ε)`,
/// `(a_{m,n}/√ε) cos(mπx) cos(nπy/ε)`.
pub fn eigenfunction_physical(mode: ModeIndex, eps: Epsilon, x: f64, y: f64) -> f64 {
    let e = eps.value();
    norm_const(mode) / e.sqrt() * cos_mode(mode.m, x) * cos_mode(mode.n, y / e)
}

#[derive(Debug, Clone, Copy)]
struct Key {
    lambda: f64,
    mode: ModeIndex,
}

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.lambda
            .total_cmp(&other.lambda)
            .then_with(|| self.mode.cmp(&other.mode))
    }
}

/// Lazy iterator over the spectrum in nondecreasing eigenvalue order, ties
/// broken lexicographically by `(m, n)`.
///
/// The eigenvalue is strictly increasing along both lattice directions, so a
/// min-heap seeded with `(0, 0)` that pushes the two successors of every
/// popped node emits modes in exact key order. Each node has two
/// predecessors; the visited set keeps it from entering the heap twice.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eps: Epsilon,
    heap: BinaryHeap<Reverse<Key>>,
    visited: HashSet<ModeIndex>,
    emitted: usize,
}

impl Spectrum {
    pub fn new(eps: Epsilon) -> Self {
        let origin = ModeIndex::new(0, 0);
        let mut spectrum = Spectrum {
            eps,
            heap: BinaryHeap::new(),
            visited: HashSet::new(),
            emitted: 0,
        };
        spectrum.push(origin);
        spectrum
    }

    pub fn epsilon(&self) -> Epsilon {
        self.eps
    }

    /// Eigenvalue of the next pair to be emitted, without consuming it.
    pub fn peek_lambda(&self) -> Option<f64> {
        self.heap.peek().map(|Reverse(k)| k.lambda)
    }

    fn push(&mut self, mode: ModeIndex) {
        if self.visited.insert(mode) {
            self.heap.push(Reverse(Key {
                lambda: eigenvalue(mode, self.eps),
                mode,
            }));
        }
    }
}

impl Iterator for Spectrum {
    type Item = EigenPair;

    fn next(&mut self) -> Option<EigenPair> {
        let Reverse(Key { lambda, mode }) = self.heap.pop()?;
        if let Some(m) = mode.m.checked_add(1) {
            self.push(ModeIndex::new(m, mode.n));
        }
        if let Some(n) = mode.n.checked_add(1) {
            self.push(ModeIndex::new(mode.m, n));
        }
        self.emitted += 1;
        Some(EigenPair {
            mode,
            lambda,
            rank: self.emitted,
        })
    }
}

/// The first `count` eigenpairs in nondecreasing order.
pub fn ordered_spectrum(eps: Epsilon, count: usize) -> Result<Vec<EigenPair>> {
    if count == 0 {
        return Err(Error::invalid("count", "must be at least 1"));
    }
    Ok(Spectrum::new(eps).take(count).collect())
}
