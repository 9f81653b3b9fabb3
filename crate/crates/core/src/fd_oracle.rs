//! Finite-difference reference solver for the rescaled heat problem
//! `v_t = v_{x1x1} + ε⁻² v_{x2x2}` on the unit square with insulated edges.
//!
//! Peaceman–Rachford alternating-direction implicit stepping on the 3-point
//! Laplacian in each direction. Neumann edges use mirrored ghost nodes
//! (`u_{-1} = u_1`), so a boundary row reads `(2u_1 − 2u_0)/h²`. That operator
//! is self-adjoint and annihilates constants under the trapezoid weights,
//! which makes the scheme conserve the trapezoid integral exactly and
//! contract the trapezoid-weighted L² norm.
//!
//! This module shares no code with the spectral solver beyond the grid type.

use ndarray::{Array2, ArrayViewMut1, Axis};
use rayon::prelude::*;

use crate::domain::{DomainTag, Epsilon};
use crate::error::{Error, Result};
use crate::grid::GridField;

/// Time-step configuration. Node counts come from the field being advanced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdConfig {
    pub dt: f64,
}

impl FdConfig {
    pub fn new(dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
        }
        Ok(FdConfig { dt })
    }
}

/// Solves `(I − c L) x = d` in place, where `L` is the ghost-node Neumann
/// Laplacian (without the `1/h²` factor, folded into `c`). Thomas algorithm.
fn solve_neumann_line(c: f64, mut d: ArrayViewMut1<f64>, scratch: &mut Vec<f64>) {
    let n = d.len();
    let diag = 1.0 + 2.0 * c;
    // super-diagonal: −2c on row 0, −c elsewhere; sub-diagonal: −c, −2c on the last row
    scratch.clear();
    scratch.resize(n, 0.0);
    let cp = scratch;
    let mut beta = diag;
    assert!(beta != 0.0, "singular tridiagonal system");
    cp[0] = -2.0 * c / beta;
    d[0] /= beta;
    for i in 1..n {
        let sub = if i == n - 1 { -2.0 * c } else { -c };
        let sup = -c;
        beta = diag - sub * cp[i - 1];
        assert!(beta != 0.0, "singular tridiagonal system");
        if i < n - 1 {
            cp[i] = sup / beta;
        }
        d[i] = (d[i] - sub * d[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        let next = d[i + 1];
        d[i] -= cp[i] * next;
    }
}

/// `out = (I + c L) u` along one line.
fn apply_neumann_line(c: f64, u: &[f64], out: &mut [f64]) {
    let n = u.len();
    out[0] = u[0] + c * (2.0 * u[1] - 2.0 * u[0]);
    for i in 1..n - 1 {
        out[i] = u[i] + c * (u[i - 1] - 2.0 * u[i] + u[i + 1]);
    }
    out[n - 1] = u[n - 1] + c * (2.0 * u[n - 2] - 2.0 * u[n - 1]);
}

/// Explicit half of a half-step: `(I + c L)` applied along `axis`.
fn explicit_along(values: &Array2<f64>, axis: Axis, c: f64) -> Array2<f64> {
    let mut out = Array2::zeros(values.raw_dim());
    let lanes_in: Vec<Vec<f64>> = values.lanes(axis).into_iter().map(|l| l.to_vec()).collect();
    let results: Vec<Vec<f64>> = lanes_in
        .par_iter()
        .map(|u| {
            let mut o = vec![0.0; u.len()];
            apply_neumann_line(c, u, &mut o);
            o
        })
        .collect();
    for (mut lane, r) in out.lanes_mut(axis).into_iter().zip(results) {
        lane.iter_mut().zip(r).for_each(|(a, b)| *a = b);
    }
    out
}

/// Implicit half of a half-step: `(I − c L)⁻¹` along `axis`, in place.
fn implicit_along(values: &mut Array2<f64>, axis: Axis, c: f64) {
    let mut lanes: Vec<Vec<f64>> = values.lanes(axis).into_iter().map(|l| l.to_vec()).collect();
    lanes.par_iter_mut().for_each_init(Vec::new, |scratch, lane| {
        solve_neumann_line(c, ArrayViewMut1::from(lane.as_mut_slice()), scratch);
    });
    for (mut lane, r) in values.lanes_mut(axis).into_iter().zip(lanes) {
        lane.iter_mut().zip(r).for_each(|(a, b)| *a = b);
    }
}

/// Peaceman–Rachford stepper over a raw `nx1 × nx2` array (any sizes ≥ 3).
#[derive(Debug, Clone)]
pub struct AdiStepper {
    values: Array2<f64>,
    inv_h1_sq: f64,
    inv_h2_sq_eps: f64,
    time: f64,
}

impl AdiStepper {
    pub fn new(values: Array2<f64>, eps: Epsilon) -> Result<Self> {
        let (nx1, nx2) = values.dim();
        if nx1 < 3 || nx2 < 3 {
            return Err(Error::invalid(
                "grid",
                format!("finite differences need at least 3 nodes per direction, got {nx1}x{nx2}"),
            ));
        }
        let h1 = 1.0 / (nx1 - 1) as f64;
        let h2 = 1.0 / (nx2 - 1) as f64;
        let e = eps.value();
        Ok(AdiStepper {
            values,
            inv_h1_sq: 1.0 / (h1 * h1),
            inv_h2_sq_eps: 1.0 / (h2 * h2 * e * e),
            time: 0.0,
        })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// One full step of length `dt`: implicit in `x1` then implicit in `x2`.
    pub fn step(&mut self, dt: f64) {
        let c1 = 0.5 * dt * self.inv_h1_sq;
        let c2 = 0.5 * dt * self.inv_h2_sq_eps;
        // (I − dt/2 A) u* = (I + dt/2 B) uⁿ, lanes along x1 are Axis(0)
        let mut half = explicit_along(&self.values, Axis(1), c2);
        implicit_along(&mut half, Axis(0), c1);
        // (I − dt/2 B) uⁿ⁺¹ = (I + dt/2 A) u*
        let mut full = explicit_along(&half, Axis(0), c1);
        implicit_along(&mut full, Axis(1), c2);
        self.values = full;
        self.time += dt;
    }

    /// Advances to time `t` from the current time with steps of `dt`; the last
    /// step is shortened when `t` is not a multiple of `dt`.
    pub fn advance_to(&mut self, t: f64, dt: f64) {
        let span = t - self.time;
        if span <= 0.0 {
            return;
        }
        let ratio = span / dt;
        let rounded = ratio.round();
        let (whole, rest) = if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
            (rounded as u64, 0.0)
        } else {
            let whole = ratio.floor();
            (whole as u64, span - whole * dt)
        };
        for _ in 0..whole {
            self.step(dt);
        }
        if rest > 0.0 {
            self.step(rest);
        }
    }
}

/// Finite-difference solution of the rescaled heat problem at time `t`.
pub fn fd_solve(v0: &GridField, eps: Epsilon, t: f64, cfg: &FdConfig) -> Result<GridField> {
    if v0.tag() != DomainTag::Reference {
        return Err(Error::GridMismatch(format!(
            "fd_solve needs a reference-square field, got {}",
            v0.tag()
        )));
    }
    FdConfig::new(cfg.dt)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", format!("must be positive, got {t}")));
    }
    let mut stepper = AdiStepper::new(v0.values().clone(), eps)?;
    stepper.advance_to(t, cfg.dt);
    GridField::new(stepper.into_values(), DomainTag::Reference)
}

fn trapezoid_weights(n: usize) -> Vec<f64> {
    let h = 1.0 / (n - 1) as f64;
    (0..n)
        .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
        .collect()
}

fn trapezoid_sum(values: &Array2<f64>, f: impl Fn(f64) -> f64) -> f64 {
    let w1 = trapezoid_weights(values.nrows());
    let w2 = trapezoid_weights(values.ncols());
    values
        .indexed_iter()
        .map(|((i, j), v)| w1[i] * w2[j] * f(*v))
        .sum()
}

/// Trapezoidal mean over the unit square (the square has unit area).
pub fn fd_mean(f: &GridField) -> f64 {
    trapezoid_sum(f.values(), |v| v)
}

/// Trapezoid-weighted discrete L² norm of a raw grid array.
pub fn discrete_l2_norm(values: &Array2<f64>) -> f64 {
    trapezoid_sum(values, |v| v * v).sqrt()
}

/// Trapezoid-weighted discrete L² distance between two fields.
pub fn discrete_l2_distance(a: &GridField, b: &GridField) -> Result<f64> {
    a.check_compatible(b)?;
    Ok(discrete_l2_norm(&(a.values() - b.values())))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::grid::sample;

    fn eps(v: f64) -> Epsilon {
        Epsilon::new(v).unwrap()
    }

    #[test]
    fn thomas_solves_the_neumann_system() {
        let n = 7;
        let c = 0.8;
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64 * 1.3).sin()).collect();
        let mut x = ndarray::Array1::from(rhs.clone());
        solve_neumann_line(c, x.view_mut(), &mut Vec::new());
        let mut back = vec![0.0; n];
        apply_neumann_line(-c, x.as_slice().unwrap(), &mut back);
        for (a, b) in back.iter().zip(&rhs) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn constant_is_a_discrete_equilibrium() {
        let one = sample(|_, _| 1.0, 17, 9).unwrap();
        let out = fd_solve(&one, eps(0.3), 1.0, &FdConfig::new(1e-2).unwrap()).unwrap();
        assert!(out.values().iter().all(|v| (v - 1.0).abs() < 1e-13));
    }

    #[test]
    fn longitudinal_mode_matches_closed_form() {
        let v0 = sample(|x1, _| (PI * x1).cos(), 65, 65).unwrap();
        let out = fd_solve(&v0, eps(0.5), 0.1, &FdConfig::new(1e-3).unwrap()).unwrap();
        let want = sample(|x1, _| (-0.1 * PI * PI).exp() * (PI * x1).cos(), 65, 65).unwrap();
        assert!(discrete_l2_distance(&out, &want).unwrap() <= 2e-4);
    }

    #[test]
    fn transverse_mode_matches_closed_form() {
        let v0 = sample(|_, x2| (PI * x2).cos(), 65, 65).unwrap();
        let out = fd_solve(&v0, eps(0.5), 0.1, &FdConfig::new(1e-4).unwrap()).unwrap();
        let want = sample(|_, x2| (-0.4 * PI * PI).exp() * (PI * x2).cos(), 65, 65).unwrap();
        assert!(discrete_l2_distance(&out, &want).unwrap() <= 5e-4);
    }

    #[test]
    fn mean_examples() {
        let c = sample(|_, _| -3.5, 9, 9).unwrap();
        assert!((fd_mean(&c) + 3.5).abs() < 1e-14);
        let f = sample(|x1, _| (PI * x1).cos(), 33, 9).unwrap();
        assert!(fd_mean(&f).abs() < 1e-12);
        let f = sample(|x1, x2| (2.0 * PI * x1).cos() * (2.0 * PI * x2).cos(), 33, 17).unwrap();
        assert!(fd_mean(&f).abs() < 1e-12);
    }

    #[test]
    fn conserves_mean_and_contracts() {
        let v0 = sample(|x1, x2| (3.0 * x1 * x2).exp() + (7.0 * x2).sin(), 33, 17).unwrap();
        let m0 = fd_mean(&v0);
        for dt in [1e-4, 1e-3, 1e-2, 1.0] {
            let mut s = AdiStepper::new(v0.values().clone(), eps(0.2)).unwrap();
            let mut norm = discrete_l2_norm(s.values());
            let mut drift = 0.0_f64;
            for _ in 0..20 {
                s.step(dt);
                let m = trapezoid_sum(s.values(), |v| v);
                drift = drift.max(((m - m0) / m0).abs());
                let next = discrete_l2_norm(s.values());
                assert!(next <= norm * (1.0 + 1e-14), "dt={dt}: {next} > {norm}");
                norm = next;
            }
            // Rounding in the explicit half-steps scales with dt/h²; at dt = 1
            // that is c ≈ 3e3 and the drift is a few c·ulp.
            let allowed = if dt <= 1e-2 { 1e-12 } else { 1e-11 };
            assert!(drift < allowed, "dt={dt}: drift {drift:e}");
        }
    }

    #[test]
    fn partial_last_step() {
        let v0 = sample(|x1, _| (PI * x1).cos(), 33, 5).unwrap();
        let mut s = AdiStepper::new(v0.values().clone(), eps(1.0)).unwrap();
        s.advance_to(0.105, 0.01);
        assert!((s.time() - 0.105).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        let v0 = sample(|_, _| 1.0, 5, 5).unwrap();
        assert!(FdConfig::new(0.0).is_err());
        assert!(fd_solve(&v0, eps(0.5), -1.0, &FdConfig::new(0.1).unwrap()).is_err());
        assert!(AdiStepper::new(Array2::zeros((2, 5)), eps(0.5)).is_err());
    }
}
