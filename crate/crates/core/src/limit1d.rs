//! The one-dimensional limit problem on `(0, 1)`: `-v'' = λv` with
//! `v'(0) = v'(1) = 0`, its heat flow, and the maps between 1D fields and
//! `x2`-independent fields on the unit square.
//!
//! Modes are indexed from 1: `λ⁰_n = π²(n−1)²` with eigenfunction `1` for
//! `n = 1` and `√2 cos((n−1)πx)` for `n ≥ 2`.

use std::f64::consts::SQRT_2;

use ndarray::{Array1, Array2};

use crate::domain::DomainTag;
use crate::eigenbasis::{cos_mode, PI_SQ};
use crate::error::{Error, Result};
use crate::evolution::{
    check_decay_inputs, check_time, decay_truncation, heat_trace_bound_1d, Truncation,
    TruncationPolicy, PARSEVAL_NOISE,
};
use crate::grid::{check_count, node, GridField, GridField1D};
use crate::projection::heat_factor;
use crate::quadrature::{simpson, simpson_weights};

fn check_index(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("n", "limit-problem modes are indexed from 1"));
    }
    Ok(())
}

#[inline]
fn lambda_unchecked(n: usize) -> f64 {
    let k = (n - 1) as f64;
    PI_SQ * (k * k)
}

#[inline]
fn mode_unchecked(n: usize, x: f64) -> f64 {
    if n == 1 {
        1.0
    } else {
        SQRT_2 * cos_mode((n - 1) as u32, x)
    }
}

/// `π²(n−1)²`. Evaluated the same way as the two-dimensional eigenvalue of
/// mode `(n−1, 0)`, so the two agree bitwise.
pub fn eigenvalue1d(n: usize) -> Result<f64> {
    check_index(n)?;
    Ok(lambda_unchecked(n))
}

/// Normalized eigenfunction of the limit problem for `λ⁰_n`.
pub fn eigenfunction1d(n: usize, x: f64) -> Result<f64> {
    check_index(n)?;
    Ok(mode_unchecked(n, x))
}

/// One retained mode of a [`SpectralState1D`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode1D {
    pub n: usize,
    pub lambda: f64,
    pub coefficient: f64,
}

/// Truncated expansion of a 1D field over the first modes of the limit
/// problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState1D {
    pub modes: Vec<Mode1D>,
    pub source_norm_sq: f64,
}

impl SpectralState1D {
    pub fn energy(&self) -> f64 {
        self.modes.iter().map(|m| m.coefficient * m.coefficient).sum()
    }
}

/// `∫₀¹ f g` by composite Simpson.
pub fn inner_product1d(f: &GridField1D, g: &GridField1D) -> Result<f64> {
    if f.nx() != g.nx() {
        return Err(Error::GridMismatch(format!("{} vs {}", f.nx(), g.nx())));
    }
    let w = simpson_weights(f.nx());
    Ok(w.iter()
        .zip(f.values())
        .zip(g.values())
        .map(|((w, f), g)| w * f * g)
        .sum())
}

/// Coefficients `(f, v⁰_n)` for `n = 1..=count`.
pub fn project1d(f: &GridField1D, count: usize) -> Result<SpectralState1D> {
    if count == 0 {
        return Err(Error::invalid("count", "must be at least 1"));
    }
    let nx = f.nx();
    let w = simpson_weights(nx);
    let wf: Vec<f64> = w.iter().zip(f.values()).map(|(w, f)| w * f).collect();
    let modes = (1..=count)
        .map(|n| {
            let coefficient = wf
                .iter()
                .enumerate()
                .map(|(i, wf)| wf * mode_unchecked(n, node(i, nx)))
                .sum();
            Mode1D {
                n,
                lambda: lambda_unchecked(n),
                coefficient,
            }
        })
        .collect();
    let source_norm_sq = wf.iter().zip(f.values()).map(|(a, b)| a * b).sum();
    Ok(SpectralState1D {
        modes,
        source_norm_sq,
    })
}

/// `Σ c_n v⁰_n` sampled on `nx` uniform nodes.
pub fn reconstruct1d(state: &SpectralState1D, nx: usize) -> Result<GridField1D> {
    check_count("nx", nx)?;
    let values = Array1::from_shape_fn(nx, |i| {
        let x = node(i, nx);
        state
            .modes
            .iter()
            .map(|m| m.coefficient * mode_unchecked(m.n, x))
            .sum()
    });
    GridField1D::new(values)
}

/// Multiplies each coefficient by `exp(-t λ⁰_n)`.
pub fn evolve1d_state(state: &SpectralState1D, t: f64) -> Result<SpectralState1D> {
    check_time(t)?;
    Ok(SpectralState1D {
        modes: state
            .modes
            .iter()
            .map(|m| Mode1D {
                coefficient: m.coefficient * heat_factor(m.lambda, t),
                ..*m
            })
            .collect(),
        source_norm_sq: state.source_norm_sq,
    })
}

/// Decay-based truncation for the limit problem; see
/// [`crate::evolution::choose_truncation`].
pub fn choose_truncation1d(t: f64, norm_bound: f64, policy: &TruncationPolicy) -> Result<Truncation> {
    check_decay_inputs(t, norm_bound, policy)?;
    Ok(decay_truncation(
        (1..).map(lambda_unchecked),
        t,
        norm_bound,
        heat_trace_bound_1d(t * PI_SQ),
        policy,
    ))
}

/// Projection of `v0` sized for evolving it to time `t`, mirroring
/// [`crate::evolution::project_for`].
pub fn project_for1d(
    v0: &GridField1D,
    t: f64,
    policy: &TruncationPolicy,
) -> Result<(SpectralState1D, Truncation)> {
    policy.validate()?;
    check_time(t)?;
    let total = inner_product1d(v0, v0)?;
    if t == 0.0 || t < policy.t_floor {
        let target = (policy.tol * policy.tol).max(PARSEVAL_NOISE * total);
        let full = project1d(v0, policy.max_modes)?;
        let mut captured = 0.0;
        for (k, m) in full.modes.iter().enumerate() {
            captured += m.coefficient * m.coefficient;
            let defect = (total - captured).max(0.0);
            if defect <= target {
                let count = k + 1;
                let state = SpectralState1D {
                    modes: full.modes[..count].to_vec(),
                    source_norm_sq: full.source_norm_sq,
                };
                return Ok((
                    state,
                    Truncation {
                        count,
                        certified: true,
                        tail_bound: defect.sqrt(),
                    },
                ));
            }
        }
        let defect = (total - captured).max(0.0);
        let count = full.modes.len();
        return Ok((
            full,
            Truncation {
                count,
                certified: false,
                tail_bound: defect.sqrt(),
            },
        ));
    }
    let truncation = choose_truncation1d(t, total.sqrt(), policy)?;
    Ok((project1d(v0, truncation.count)?, truncation))
}

/// Heat flow of the limit problem from `v0` up to time `t`, sampled on the
/// grid of `v0`.
pub fn evolve1d(v0: &GridField1D, t: f64, policy: &TruncationPolicy) -> Result<GridField1D> {
    let (state, _) = project_for1d(v0, t, policy)?;
    reconstruct1d(&evolve1d_state(&state, t)?, v0.nx())
}

/// The `x2`-independent field `(x1, x2) ↦ u(x1)` on the unit square.
pub fn embed(u: &GridField1D, nx2: usize) -> Result<GridField> {
    check_count("nx2", nx2)?;
    let values = Array2::from_shape_fn((u.nx(), nx2), |(i, _)| u.values()[i]);
    GridField::new(values, DomainTag::Reference)
}

/// `x1 ↦ ∫₀¹ f(x1, x2) dx2`, using the same Simpson rule as the 2D inner
/// product. Composed with [`embed`], this is the L² projection onto
/// `x2`-independent fields.
pub fn vertical_average(f: &GridField) -> Result<GridField1D> {
    if f.tag() != DomainTag::Reference {
        return Err(Error::GridMismatch(format!(
            "vertical average needs a reference-square field, got {}",
            f.tag()
        )));
    }
    let values = f
        .values()
        .rows()
        .into_iter()
        .map(|row| simpson(row.as_slice().expect("rows of a standard-layout array are contiguous")))
        .collect::<Vec<_>>();
    GridField1D::new(Array1::from(values))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::domain::Epsilon;
    use crate::eigenbasis::{eigenvalue, ModeIndex};
    use crate::grid::{sample, sample1d};
    use crate::projection::{inner_product, project};

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(eigenvalue1d(1).unwrap(), 0.0);
        assert!((eigenvalue1d(2).unwrap() - 9.8696044).abs() < 1e-7);
        assert!((eigenvalue1d(3).unwrap() - 39.4784176).abs() < 1e-7);
        assert!(eigenvalue1d(0).is_err());
    }

    #[test]
    fn eigenvalue_matches_longitudinal_2d_mode_bitwise() {
        let eps = Epsilon::new(0.37).unwrap();
        for n in 1..200usize {
            let two_d = eigenvalue(ModeIndex::new((n - 1) as u32, 0), eps);
            assert_eq!(eigenvalue1d(n).unwrap().to_bits(), two_d.to_bits());
        }
    }

    #[test]
    fn eigenfunction_examples() {
        assert_eq!(eigenfunction1d(1, 0.37).unwrap(), 1.0);
        assert_eq!(eigenfunction1d(2, 0.0).unwrap(), SQRT_2);
        assert!((eigenfunction1d(3, 0.5).unwrap() + SQRT_2).abs() < 1e-15);
        assert!(eigenfunction1d(0, 0.5).is_err());
    }

    #[test]
    fn eigenfunctions_are_orthonormal() {
        let nx = 129;
        let modes: Vec<GridField1D> = (1..=20)
            .map(|n| sample1d(|x| eigenfunction1d(n, x).unwrap(), nx).unwrap())
            .collect();
        for (a, fa) in modes.iter().enumerate() {
            for (b, fb) in modes.iter().enumerate() {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((inner_product1d(fa, fb).unwrap() - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn evolve1d_examples() {
        let policy = TruncationPolicy::default();
        let one = sample1d(|_| 1.0, 33).unwrap();
        assert!(evolve1d(&one, 3.0, &policy).unwrap().max_abs_diff(&one).unwrap() < 1e-12);

        let v0 = sample1d(|x| (PI * x).cos(), 65).unwrap();
        let want = sample1d(|x| (-0.1 * PI * PI).exp() * (PI * x).cos(), 65).unwrap();
        assert!(evolve1d(&v0, 0.1, &policy).unwrap().max_abs_diff(&want).unwrap() < 1e-8);

        let v0 = sample1d(|x| (3.0 * PI * x).cos(), 65).unwrap();
        let decay = (-1.8 * PI * PI).exp();
        let want = sample1d(|x| decay * (3.0 * PI * x).cos(), 65).unwrap();
        assert!(evolve1d(&v0, 0.2, &policy).unwrap().max_abs_diff(&want).unwrap() < 1e-12);
        assert!((decay - 1.92e-8).abs() < 1e-10);
    }

    #[test]
    fn evolve1d_at_time_zero_reproduces_band_limited_data() {
        let policy = TruncationPolicy::default();
        let v0 = sample1d(|x| 0.3 + (2.0 * PI * x).cos(), 33).unwrap();
        let (_, tr) = project_for1d(&v0, 0.0, &policy).unwrap();
        assert!(tr.certified);
        assert_eq!(tr.count, 3);
        assert!(evolve1d(&v0, 0.0, &policy).unwrap().max_abs_diff(&v0).unwrap() < 1e-12);
    }

    #[test]
    fn truncation1d_matches_brute_force() {
        let policy = TruncationPolicy::new(1e-9, 4096, 1e-6).unwrap();
        let t = 0.003;
        let tr = choose_truncation1d(t, 1.0, &policy).unwrap();
        let terms: Vec<f64> = (1..5000).map(|n| (-2.0 * t * lambda_unchecked(n)).exp()).collect();
        let tail = |k: usize| terms[k..].iter().sum::<f64>().sqrt();
        let oracle = (1..terms.len()).find(|&k| tail(k) <= 1e-9).unwrap();
        assert_eq!(tr.count, oracle);
    }

    #[test]
    fn embed_examples() {
        let one = sample1d(|_| 1.0, 9).unwrap();
        let e = embed(&one, 5).unwrap();
        assert!(e.values().iter().all(|&v| v == 1.0));

        let zero = sample1d(|_| 0.0, 9).unwrap();
        assert!(embed(&zero, 5).unwrap().values().iter().all(|&v| v == 0.0));

        let u = sample1d(|x| (PI * x).cos(), 65).unwrap();
        let f = embed(&u, 65).unwrap();
        let s = project(&f, Epsilon::new(0.3).unwrap(), 30).unwrap();
        for (p, c) in s.pairs() {
            if p.mode == ModeIndex::new(1, 0) {
                assert!((c - 1.0 / SQRT_2).abs() < 1e-10);
            } else if p.mode.n != 0 {
                assert!(c.abs() < 1e-12, "{}: {c}", p.mode);
            }
        }
    }

    #[test]
    fn vertical_average_examples() {
        let c = sample(|_, _| 2.5, 9, 9).unwrap();
        assert!(vertical_average(&c).unwrap().values().iter().all(|v| (v - 2.5).abs() < 1e-14));

        let f = sample(|_, x2| (PI * x2).cos(), 9, 33).unwrap();
        assert!(vertical_average(&f).unwrap().values().iter().all(|v| v.abs() < 1e-10));

        let f = sample(|x1, x2| (PI * x1).cos() * (1.0 + (PI * x2).cos()), 17, 33).unwrap();
        let want = sample1d(|x| (PI * x).cos(), 17).unwrap();
        assert!(vertical_average(&f).unwrap().max_abs_diff(&want).unwrap() < 1e-10);
    }

    #[test]
    fn average_then_embed_is_an_orthogonal_projection() {
        let f = sample(|x1, x2| (2.0 * x1 + x2).sin() * (x1 * x2 * 3.0).exp(), 33, 33).unwrap();
        let g = sample(|x1, x2| (x1 - x2).powi(3) + (5.0 * x2).cos(), 33, 33).unwrap();
        let proj = |h: &GridField| embed(&vertical_average(h).unwrap(), 33).unwrap();
        let pf = proj(&f);
        assert!(proj(&pf).max_abs_diff(&pf).unwrap() < 1e-12);
        let a = inner_product(&pf, &g).unwrap();
        let b = inner_product(&f, &proj(&g)).unwrap();
        assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn one_and_two_dimensional_flows_agree_on_x2_independent_data() {
        let policy = TruncationPolicy::default();
        let u = sample1d(|x| (x * 4.0).sin() + x * x, 33).unwrap();
        for e in [1.0, 0.3, 0.05] {
            let eps = Epsilon::new(e).unwrap();
            for t in [0.01, 0.05, 0.2] {
                let one = embed(&evolve1d(&u, t, &policy).unwrap(), 17).unwrap();
                let two = crate::evolution::solve(&embed(&u, 17).unwrap(), eps, t, &policy).unwrap();
                assert!(one.max_abs_diff(&two).unwrap() < 1e-8, "eps={e} t={t}");
            }
        }
    }
}
