//! Heat semigroup on the unit square via the eigenfunction series, with a
//! certified choice of truncation, and its conjugate on the thin plate.

use std::f64::consts::PI;

use crate::domain::{DomainTag, Epsilon};
use crate::eigenbasis::{Spectrum, PI_SQ};
use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::projection::{norm_sq, project, project_onto, reconstruct, SpectralState};

/// How many modes a spectral solve may keep and how small the discarded
/// L² tail must be.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    /// Bound on the L² norm of the discarded tail.
    pub tol: f64,
    /// Hard cap on retained modes.
    pub max_modes: usize,
    /// Smallest time at which the decay-based bound is used.
    pub t_floor: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            tol: 1e-10,
            max_modes: 4096,
            t_floor: 1e-6,
        }
    }
}

impl TruncationPolicy {
    pub fn new(tol: f64, max_modes: usize, t_floor: f64) -> Result<Self> {
        let policy = TruncationPolicy {
            tol,
            max_modes,
            t_floor,
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::invalid("tol", format!("must be positive, got {}", self.tol)));
        }
        if self.max_modes == 0 {
            return Err(Error::invalid("max_modes", "must be at least 1"));
        }
        if !(self.t_floor >= 0.0 && self.t_floor.is_finite()) {
            return Err(Error::invalid(
                "t_floor",
                format!("must be nonnegative, got {}", self.t_floor),
            ));
        }
        Ok(())
    }
}

/// Outcome of a truncation choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    /// Number of retained modes.
    pub count: usize,
    /// False when `max_modes` was reached before the tolerance was met.
    pub certified: bool,
    /// Upper bound on the L² norm of the discarded part at the requested time.
    pub tail_bound: f64,
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", format!("must be finite and nonnegative, got {t}")));
    }
    Ok(())
}

/// Applies the semigroup for time `t`: every coefficient is multiplied by
/// `exp(-t λ)`. Modes with `λ = ∞` vanish for `t > 0`.
pub fn evolve(state: &SpectralState, t: f64) -> Result<SpectralState> {
    check_time(t)?;
    Ok(state.advanced(t))
}

/// `Σ_{k≥0} exp(-a k²) ≤ 1 + ½√(π/a)`.
pub(crate) fn heat_trace_bound_1d(a: f64) -> f64 {
    if a.is_infinite() {
        1.0
    } else {
        1.0 + 0.5 * (PI / a).sqrt()
    }
}

/// Upper bound on `Σ_{m,n ≥ 0} exp(-t λ_{m,n})`, one factor per direction.
fn lattice_heat_trace_bound(eps: Epsilon, t: f64) -> f64 {
    let e = eps.value();
    heat_trace_bound_1d(t * PI_SQ) * heat_trace_bound_1d(t * PI_SQ / e / e)
}

pub(crate) fn check_decay_inputs(t: f64, norm_bound: f64, policy: &TruncationPolicy) -> Result<()> {
    policy.validate()?;
    check_time(t)?;
    if t == 0.0 || t < policy.t_floor {
        return Err(Error::invalid(
            "t",
            format!(
                "decay bound needs t >= t_floor = {} and t > 0, got {t}; use the Parseval criterion",
                policy.t_floor
            ),
        ));
    }
    if !(norm_bound >= 0.0 && norm_bound.is_finite()) {
        return Err(Error::invalid(
            "norm_bound",
            format!("must be finite and nonnegative, got {norm_bound}"),
        ));
    }
    Ok(())
}

/// Smallest `K ≤ max_modes` with
/// `norm_bound · sqrt(Σ_{k>K} exp(-2 t λ_k)) ≤ tol`.
///
/// The tail is summed exactly over modes enumerated in spectrum order until
/// what remains beyond the last enumerated mode `M` is negligible. That
/// remainder is bounded with
/// `Σ_{λ_k ≥ λ_{M+1}} e^{-2tλ_k} ≤ e^{-tλ_{M+1}} Σ_k e^{-tλ_k}`
/// and the closed-form lattice bound on the heat trace.
pub fn choose_truncation(
    eps: Epsilon,
    t: f64,
    norm_bound: f64,
    policy: &TruncationPolicy,
) -> Result<Truncation> {
    check_decay_inputs(t, norm_bound, policy)?;
    Ok(decay_truncation(
        Spectrum::new(eps).map(|p| p.lambda),
        t,
        norm_bound,
        lattice_heat_trace_bound(eps, t),
        policy,
    ))
}

/// Shared core of the decay-based truncation. `lambdas` must be the
/// eigenvalues in nondecreasing order and `trace` an upper bound on
/// `Σ_k exp(-t λ_k)` over the whole (infinite) sequence.
pub(crate) fn decay_truncation(
    lambdas: impl Iterator<Item = f64>,
    t: f64,
    norm_bound: f64,
    trace: f64,
    policy: &TruncationPolicy,
) -> Truncation {
    if norm_bound == 0.0 {
        return Truncation {
            count: 1,
            certified: true,
            tail_bound: 0.0,
        };
    }
    let target = (policy.tol / norm_bound).powi(2);
    let cap = policy.max_modes.saturating_mul(8).saturating_add(64);

    let mut lambdas = lambdas.peekable();
    let mut terms = Vec::new();
    let remainder = loop {
        let lambda = lambdas.next().expect("the spectrum is infinite");
        terms.push((-2.0 * t * lambda).exp());
        let next = *lambdas.peek().expect("the spectrum is infinite");
        let remainder = (-t * next).exp() * trace;
        if remainder <= 1e-3 * target || terms.len() >= cap {
            break remainder;
        }
    };

    // tail[k] bounds the squared tail after keeping k modes.
    let mut tail = vec![0.0; terms.len() + 1];
    tail[terms.len()] = remainder;
    for k in (0..terms.len()).rev() {
        tail[k] = tail[k + 1] + terms[k];
    }

    let limit = terms.len().min(policy.max_modes);
    match (1..=limit).find(|&k| tail[k] <= target) {
        Some(count) => Truncation {
            count,
            certified: true,
            tail_bound: norm_bound * tail[count].sqrt(),
        },
        None => Truncation {
            count: limit,
            certified: false,
            tail_bound: norm_bound * tail[limit].sqrt(),
        },
    }
}

/// Relative size of the rounding noise in `‖f‖² − Σc²`. The defect is a
/// difference of two sums over the whole grid, so it cannot resolve
/// anything below this fraction of `‖f‖²`.
pub(crate) const PARSEVAL_NOISE: f64 = 256.0 * f64::EPSILON;

/// Smallest prefix of the spectrum whose Parseval defect `‖f‖² − Σc²` is at
/// most `tol²` (or the rounding floor of the defect, whichever is larger),
/// found by doubling the projection size.
fn parseval_truncation(
    v0: &GridField,
    eps: Epsilon,
    policy: &TruncationPolicy,
) -> Result<(SpectralState, Truncation)> {
    let total = norm_sq(v0);
    let target = (policy.tol * policy.tol).max(PARSEVAL_NOISE * total);
    let mut count = 1usize;
    loop {
        let state = project(v0, eps, count)?;
        let mut captured = 0.0;
        for (k, c) in state.coefficients().into_iter().enumerate() {
            captured += c * c;
            let defect = (total - captured).max(0.0);
            if defect <= target {
                let kept = k + 1;
                return Ok((
                    state.truncated(kept),
                    Truncation {
                        count: kept,
                        certified: true,
                        tail_bound: defect.sqrt(),
                    },
                ));
            }
        }
        if count >= policy.max_modes {
            let defect = (total - captured).max(0.0);
            return Ok((
                state,
                Truncation {
                    count,
                    certified: false,
                    tail_bound: defect.sqrt(),
                },
            ));
        }
        count = (count * 2).min(policy.max_modes);
    }
}

/// Projects `v0` with a truncation suited to evolving it for time `t`.
///
/// Below `t_floor` (including `t = 0`) the decay bound is unusable and the
/// Parseval criterion picks the truncation instead; since `e^{-tλ} ≤ 1`,
/// the discarded tail stays below `tol` after evolution.
pub fn project_for(
    v0: &GridField,
    eps: Epsilon,
    t: f64,
    policy: &TruncationPolicy,
) -> Result<(SpectralState, Truncation)> {
    policy.validate()?;
    check_time(t)?;
    if v0.tag() != DomainTag::Reference {
        return Err(Error::GridMismatch(format!(
            "solve needs a reference-square field, got {}",
            v0.tag()
        )));
    }
    if t == 0.0 || t < policy.t_floor {
        return parseval_truncation(v0, eps, policy);
    }
    let truncation = choose_truncation(eps, t, norm_sq(v0).sqrt(), policy)?;
    let modes = Spectrum::new(eps).take(truncation.count).collect();
    Ok((project_onto(v0, eps, modes)?, truncation))
}

/// A spectral solution together with the truncation that produced it.
#[derive(Debug, Clone)]
pub struct Solution {
    pub field: GridField,
    pub truncation: Truncation,
}

/// Solves the rescaled heat problem on the unit square from `v0` up to time
/// `t`, sampled on the grid of `v0`.
pub fn solve_with_report(
    v0: &GridField,
    eps: Epsilon,
    t: f64,
    policy: &TruncationPolicy,
) -> Result<Solution> {
    let (state, truncation) = project_for(v0, eps, t, policy)?;
    let field = reconstruct(&evolve(&state, t)?, v0.nx1(), v0.nx2())?;
    Ok(Solution { field, truncation })
}

pub fn solve(v0: &GridField, eps: Epsilon, t: f64, policy: &TruncationPolicy) -> Result<GridField> {
    solve_with_report(v0, eps, t, policy).map(|s| s.field)
}

/// Like [`solve`], with a fixed number of modes.
pub fn solve_with_modes(v0: &GridField, eps: Epsilon, t: f64, count: usize) -> Result<GridField> {
    check_time(t)?;
    let state = project(v0, eps, count)?;
    reconstruct(&evolve(&state, t)?, v0.nx1(), v0.nx2())
}

/// Solves the heat problem on the physical plate. The data is pulled back to
/// the unit square node-for-node, solved there, and pushed forward again.
pub fn solve_physical_with_report(
    u0: &GridField,
    t: f64,
    policy: &TruncationPolicy,
) -> Result<Solution> {
    let DomainTag::Physical(eps) = u0.tag() else {
        return Err(Error::GridMismatch(format!(
            "solve_physical needs a physical field, got {}",
            u0.tag()
        )));
    };
    let v0 = u0.clone().retagged(DomainTag::Reference);
    let Solution { field, truncation } = solve_with_report(&v0, eps, t, policy)?;
    Ok(Solution {
        field: field.retagged(DomainTag::Physical(eps)),
        truncation,
    })
}

pub fn solve_physical(u0: &GridField, t: f64, policy: &TruncationPolicy) -> Result<GridField> {
    solve_physical_with_report(u0, t, policy).map(|s| s.field)
}
