//! L² inner products by tensor Simpson quadrature and truncated expansions
//! in the ordered eigenbasis of the unit square.

use std::path::Path;

use ndarray::{Array2, Axis, Zip};
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{DomainTag, Epsilon};
use crate::eigenbasis::{cos_mode, norm_const, ordered_spectrum, EigenPair};
use crate::error::{Error, Result};
use crate::grid::{check_count, node, GridField};
use crate::io::write_json;
use crate::quadrature::simpson_weights;

/// Grid used for projections when the caller does not choose one.
pub const DEFAULT_GRID: usize = 129;

/// `∫∫ f g` over the unit square by composite Simpson in each direction.
///
/// Both fields must share grid and domain tag. Physical fields are
/// integrated in reference coordinates.
pub fn inner_product(f: &GridField, g: &GridField) -> Result<f64> {
    f.check_compatible(g)?;
    Ok(weighted(f)
        .iter()
        .zip(g.values().iter())
        .map(|(wf, g)| wf * g)
        .sum())
}

/// `‖f‖²` in L² of the unit square.
pub fn norm_sq(f: &GridField) -> f64 {
    inner_product(f, f).expect("a field is compatible with itself")
}

/// `w1_i · w2_j · f_ij`, the integrand weights folded into the samples.
fn weighted(f: &GridField) -> Array2<f64> {
    let w1 = simpson_weights(f.nx1());
    let w2 = simpson_weights(f.nx2());
    let mut out = f.values().clone();
    Zip::indexed(&mut out).for_each(|(i, j), v| *v *= w1[i] * w2[j]);
    out
}

/// `cos(kπ x_i)` for `k = 0..=max_k` over the `n` uniform nodes.
fn cos_table(max_k: u32, n: usize) -> Array2<f64> {
    Array2::from_shape_fn((max_k as usize + 1, n), |(k, i)| cos_mode(k as u32, node(i, n)))
}

/// Truncated expansion of a field in the ordered eigenbasis, together with
/// the time it has been evolved for.
///
/// Coefficients are kept at their projection time; the current coefficient
/// of mode `k` is `c_k · exp(-time · λ_k)`. Evolving a state only advances
/// `time`, so composed evolutions agree with a single one up to the rounding
/// of the time sum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    eps: Epsilon,
    modes: Vec<EigenPair>,
    initial: Vec<f64>,
    time: f64,
    source_norm_sq: f64,
}

impl SpectralState {
    /// Builds a state at time 0. `modes` must be in spectrum order.
    pub fn new(
        eps: Epsilon,
        modes: Vec<EigenPair>,
        coefficients: Vec<f64>,
        source_norm_sq: f64,
    ) -> Result<Self> {
        if modes.len() != coefficients.len() {
            return Err(Error::invalid(
                "coefficients",
                format!("{} coefficients for {} modes", coefficients.len(), modes.len()),
            ));
        }
        if !modes
            .windows(2)
            .all(|w| w[0].lambda.total_cmp(&w[1].lambda).then(w[0].mode.cmp(&w[1].mode)).is_lt())
        {
            return Err(Error::invalid("modes", "not in spectrum order"));
        }
        if let Some((k, c)) = coefficients.iter().enumerate().find(|(_, c)| !c.is_finite()) {
            return Err(Error::NonFinite {
                location: format!("coefficient {k}"),
                value: *c,
            });
        }
        if !(source_norm_sq >= 0.0 && source_norm_sq.is_finite()) {
            return Err(Error::invalid("source_norm_sq", "must be finite and nonnegative"));
        }
        Ok(SpectralState {
            eps,
            modes,
            initial: coefficients,
            time: 0.0,
            source_norm_sq,
        })
    }

    pub fn eps(&self) -> Epsilon {
        self.eps
    }

    pub fn modes(&self) -> &[EigenPair] {
        &self.modes
    }

    pub fn truncation_count(&self) -> usize {
        self.modes.len()
    }

    /// Total evolution time since projection.
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn source_norm_sq(&self) -> f64 {
        self.source_norm_sq
    }

    /// Current coefficient of the `k`-th retained mode.
    pub fn coefficient(&self, k: usize) -> f64 {
        self.initial[k] * heat_factor(self.modes[k].lambda, self.time)
    }

    pub fn coefficients(&self) -> Vec<f64> {
        (0..self.modes.len()).map(|k| self.coefficient(k)).collect()
    }

    /// `(pair, current coefficient)` in spectrum order.
    pub fn pairs(&self) -> impl Iterator<Item = (EigenPair, f64)> + '_ {
        self.modes
            .iter()
            .enumerate()
            .map(move |(k, p)| (*p, self.coefficient(k)))
    }

    /// `Σ c_k²` of the current coefficients.
    pub fn energy(&self) -> f64 {
        (0..self.modes.len()).map(|k| self.coefficient(k).powi(2)).sum()
    }

    /// Keeps the first `count` modes.
    pub fn truncated(&self, count: usize) -> SpectralState {
        let count = count.min(self.modes.len());
        SpectralState {
            modes: self.modes[..count].to_vec(),
            initial: self.initial[..count].to_vec(),
            ..self.clone()
        }
    }

    pub(crate) fn advanced(&self, dt: f64) -> SpectralState {
        SpectralState {
            time: self.time + dt,
            ..self.clone()
        }
    }

    pub fn to_record(&self) -> StateRecord {
        StateRecord {
            eps: self.eps.value(),
            time: self.time,
            truncation_count: self.truncation_count(),
            source_norm_sq: self.source_norm_sq,
            pairs: self
                .pairs()
                .map(|(p, c)| PairRecord {
                    rank: p.rank,
                    m: p.mode.m,
                    n: p.mode.n,
                    lambda: p.lambda,
                    coefficient: c,
                })
                .collect(),
        }
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        write_json(&self.to_record(), path)
    }
}

/// `exp(-t λ)`, with `t = 0` mapped to 1 even when `λ = ∞`.
#[inline]
pub(crate) fn heat_factor(lambda: f64, t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        (-t * lambda).exp()
    }
}

/// JSON form of a [`SpectralState`]; coefficients are the current ones.
#[derive(Debug, Clone, Serialize)]
pub struct StateRecord {
    pub eps: f64,
    pub time: f64,
    pub truncation_count: usize,
    pub source_norm_sq: f64,
    pub pairs: Vec<PairRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairRecord {
    pub rank: usize,
    pub m: u32,
    pub n: u32,
    pub lambda: f64,
    pub coefficient: f64,
}

/// Coefficients `⟨f, v_k⟩` for the first `count` ordered modes.
pub fn project(f: &GridField, eps: Epsilon, count: usize) -> Result<SpectralState> {
    if f.tag() != DomainTag::Reference {
        return Err(Error::GridMismatch(format!(
            "projection needs a reference-square field, got {}",
            f.tag()
        )));
    }
    let modes = ordered_spectrum(eps, count)?;
    project_onto(f, eps, modes)
}

pub(crate) fn project_onto(f: &GridField, eps: Epsilon, modes: Vec<EigenPair>) -> Result<SpectralState> {
    let wf = weighted(f);
    let max_m = modes.iter().map(|p| p.mode.m).max().unwrap_or(0);
    let max_n = modes.iter().map(|p| p.mode.n).max().unwrap_or(0);
    let cx = cos_table(max_m, f.nx1());
    let cy = cos_table(max_n, f.nx2());

    // partial[n, i] = Σ_j cos(nπ x2_j) wf[i, j]
    let partial = cy.dot(&wf.t());

    let coefficients: Vec<f64> = modes
        .par_iter()
        .map(|p| {
            let (m, n) = (p.mode.m as usize, p.mode.n as usize);
            norm_const(p.mode) * cx.row(m).dot(&partial.row(n))
        })
        .collect();
    let source_norm_sq = wf.iter().zip(f.values().iter()).map(|(a, b)| a * b).sum();
    SpectralState::new(eps, modes, coefficients, source_norm_sq)
}

/// Pointwise sum `Σ c_k v_k` on an `nx1 × nx2` grid over the unit square.
pub fn reconstruct(state: &SpectralState, nx1: usize, nx2: usize) -> Result<GridField> {
    check_count("nx1", nx1)?;
    check_count("nx2", nx2)?;
    let max_m = state.modes.iter().map(|p| p.mode.m).max().unwrap_or(0);
    let max_n = state.modes.iter().map(|p| p.mode.n).max().unwrap_or(0);
    let cx = cos_table(max_m, nx1);
    let cy = cos_table(max_n, nx2);

    // Group by the x2 frequency: rows[n, i] = Σ_{k: n_k = n} c_k a_k cos(m_k π x1_i)
    let mut rows = Array2::<f64>::zeros((max_n as usize + 1, nx1));
    for (p, c) in state.pairs() {
        let scale = c * norm_const(p.mode);
        if scale == 0.0 {
            continue;
        }
        rows.row_mut(p.mode.n as usize)
            .scaled_add(scale, &cx.row(p.mode.m as usize));
    }
    let values = rows.t().dot(&cy);
    debug_assert_eq!(values.len_of(Axis(0)), nx1);
    GridField::new(values, DomainTag::Reference)
}

/// `max(0, ‖f‖² − Σ c_k²)`: the squared L² mass of `f` not captured by the
/// retained modes, up to quadrature error.
pub fn parseval_defect(f: &GridField, state: &SpectralState) -> f64 {
    (norm_sq(f) - state.energy()).max(0.0)
}
