//! Measurements of the thin-plate limit: eigenvalue gaps `|λ^ε_n − λ⁰_n|`
//! and the L² distance between the 2D flow and the embedded 1D flow.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::domain::Epsilon;
use crate::eigenbasis::Spectrum;
use crate::error::{Error, Result};
use crate::evolution::{evolve, project_for, TruncationPolicy};
use crate::grid::GridField;
use crate::io::{self, fmt_f64};
use crate::limit1d::{
    eigenvalue1d, embed, evolve1d_state, project_for1d, reconstruct1d, vertical_average,
};
use crate::projection::{norm_sq, reconstruct};

/// Number of points in the default time grid.
pub const DEFAULT_TIME_POINTS: usize = 64;

/// `1/k`: the largest ε for which `π²k² ≤ π²/ε²`, i.e. below which the first
/// `k+1` eigenvalues are the longitudinal ones.
pub fn epsilon_threshold(k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("k", "must be at least 1"));
    }
    Ok(1.0 / k as f64)
}

/// One row of the eigenvalue table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenGap {
    pub eps: f64,
    pub n: usize,
    pub lambda: f64,
    pub lambda_limit: f64,
    pub gap: f64,
}

/// For each ε, the first `n_max` sorted eigenvalues against the limit
/// eigenvalues `π²(n−1)²`.
pub fn eigen_convergence(n_max: usize, eps_list: &[Epsilon]) -> Vec<EigenGap> {
    eps_list
        .iter()
        .flat_map(|&eps| {
            Spectrum::new(eps).take(n_max).map(move |p| {
                let lambda_limit = eigenvalue1d(p.rank).expect("ranks start at 1");
                EigenGap {
                    eps: eps.value(),
                    n: p.rank,
                    lambda: p.lambda,
                    lambda_limit,
                    gap: (p.lambda - lambda_limit).abs(),
                }
            })
        })
        .collect()
}

/// `n` geometrically spaced times from `t0` to `t1` inclusive.
pub fn geometric_times(t0: f64, t1: f64, n: usize) -> Result<Vec<f64>> {
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::invalid("t0", format!("must be positive for a geometric grid, got {t0}")));
    }
    if !(t1 >= t0 && t1.is_finite()) {
        return Err(Error::invalid("t1", format!("must be at least t0 = {t0}, got {t1}")));
    }
    if n == 0 {
        return Err(Error::invalid("nt", "must be at least 1"));
    }
    if n == 1 || t1 == t0 {
        return Ok(vec![t0; n.min(1)]);
    }
    let ratio = (t1 / t0).ln();
    let mut ts: Vec<f64> = (0..n)
        .map(|k| t0 * (ratio * k as f64 / (n - 1) as f64).exp())
        .collect();
    ts[0] = t0;
    ts[n - 1] = t1;
    Ok(ts)
}

/// `t ↦ ‖v^ε(t) − v̂⁰(t)‖` on a time grid, with its maximum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorCurve {
    pub eps: f64,
    pub t: Vec<f64>,
    pub error: Vec<f64>,
    pub sup_error: f64,
}

/// Distance in L²(unit square) between the 2D flow from `v0` and the
/// embedded 1D flow from its vertical average, at each time in `t_grid`.
///
/// Each side is projected once, with the truncation required by the
/// smallest time; the tail bound only improves at later times.
pub fn solution_error(
    v0: &GridField,
    eps: Epsilon,
    t_grid: &[f64],
    policy: &TruncationPolicy,
) -> Result<ErrorCurve> {
    let Some(&t_min) = t_grid.first() else {
        return Err(Error::invalid("t_grid", "must not be empty"));
    };
    if !t_grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::invalid("t_grid", "must be strictly increasing"));
    }
    let (state2d, _) = project_for(v0, eps, t_min, policy)?;
    let limit_data = vertical_average(v0)?;
    let (state1d, _) = project_for1d(&limit_data, t_min, policy)?;
    let (nx1, nx2) = (v0.nx1(), v0.nx2());

    let error = t_grid
        .par_iter()
        .map(|&t| {
            let two = reconstruct(&evolve(&state2d, t)?, nx1, nx2)?;
            let one = embed(&reconstruct1d(&evolve1d_state(&state1d, t)?, nx1)?, nx2)?;
            Ok(norm_sq(&two.sub(&one)?).sqrt())
        })
        .collect::<Result<Vec<f64>>>()?;
    let sup_error = error.iter().copied().fold(0.0, f64::max);
    Ok(ErrorCurve {
        eps: eps.value(),
        t: t_grid.to_vec(),
        error,
        sup_error,
    })
}

/// Inputs for a full ε sweep.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub eps_list: Vec<Epsilon>,
    pub n_max: usize,
    pub v0: GridField,
    pub t_grid: Vec<f64>,
    pub policy: TruncationPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub eps_list: Vec<f64>,
    pub eigen_table: Vec<EigenGap>,
    pub error_curves: Vec<ErrorCurve>,
    pub sup_errors: Vec<f64>,
}

/// Runs the eigenvalue table and one error curve per ε.
pub fn convergence_report(exp: &Experiment) -> Result<ConvergenceReport> {
    exp.policy.validate()?;
    let eigen_table = eigen_convergence(exp.n_max, &exp.eps_list);
    let error_curves = exp
        .eps_list
        .par_iter()
        .map(|&eps| solution_error(&exp.v0, eps, &exp.t_grid, &exp.policy))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport {
        eps_list: exp.eps_list.iter().map(|e| e.value()).collect(),
        eigen_table,
        sup_errors: error_curves.iter().map(|c| c.sup_error).collect(),
        error_curves,
    })
}

impl ConvergenceReport {
    pub fn save_json(&self, path: &Path) -> Result<()> {
        io::write_json(self, path)
    }

    /// Curves as `eps,t,error` rows.
    pub fn write_curves_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["eps", "t", "error"])?;
        for curve in &self.error_curves {
            for (t, e) in curve.t.iter().zip(&curve.error) {
                wr.write_record([fmt_f64(curve.eps), fmt_f64(*t), fmt_f64(*e)])?;
            }
        }
        wr.flush()?;
        Ok(())
    }

    pub fn save_curves_csv(&self, path: &Path) -> Result<()> {
        let mut w = io::create(path)?;
        self.write_curves_csv(&mut w)
            .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
        io::finish(w, path)
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    use super::*;
    use crate::eigenbasis::PI_SQ;
    use crate::grid::sample;

    fn eps(v: f64) -> Epsilon {
        Epsilon::new(v).unwrap()
    }

    #[test]
    fn thresholds() {
        assert_eq!(epsilon_threshold(1).unwrap(), 1.0);
        assert_eq!(epsilon_threshold(5).unwrap(), 0.2);
        assert_eq!(epsilon_threshold(10).unwrap(), 0.1);
        assert!(epsilon_threshold(0).is_err());
    }

    #[test]
    fn eigen_table_examples() {
        let rows = eigen_convergence(6, &[eps(0.2)]);
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().all(|r| r.gap == 0.0));

        let rows = eigen_convergence(3, &[eps(2.0)]);
        let scaled: Vec<f64> = rows.iter().map(|r| r.lambda / PI_SQ).collect();
        let gaps: Vec<f64> = rows.iter().map(|r| r.gap / PI_SQ).collect();
        for (got, want) in scaled.iter().zip([0.0, 0.25, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        for (got, want) in gaps.iter().zip([0.0, 0.75, 3.0]) {
            assert!((got - want).abs() < 1e-14);
        }

        for e in [1.0, 0.7, 0.01] {
            let rows = eigen_convergence(2, &[eps(e)]);
            assert_eq!(rows.iter().map(|r| r.gap).collect::<Vec<_>>(), vec![0.0, 0.0]);
        }
        assert!(eigen_convergence(4, &[]).is_empty());
    }

    #[test]
    fn gaps_vanish_below_threshold() {
        for k in 1..=12u32 {
            let e = epsilon_threshold(k).unwrap();
            for scale in [1.0, 0.5, 0.01] {
                let rows = eigen_convergence(k as usize + 1, &[eps(e * scale)]);
                assert!(rows.iter().all(|r| r.gap.to_bits() == 0), "k={k} scale={scale}");
            }
        }
    }

    #[test]
    fn geometric_grid() {
        let ts = geometric_times(0.05, 0.5, 64).unwrap();
        assert_eq!(ts.len(), 64);
        assert_eq!(ts[0], 0.05);
        assert_eq!(ts[63], 0.5);
        assert!(ts.windows(2).all(|w| w[0] < w[1]));
        let r = ts[1] / ts[0];
        assert!(ts.windows(2).all(|w| (w[1] / w[0] - r).abs() < 1e-12));
        assert!(geometric_times(0.0, 1.0, 8).is_err());
        assert!(geometric_times(1.0, 0.5, 8).is_err());
        assert_eq!(geometric_times(0.3, 0.3, 5).unwrap(), vec![0.3]);
    }

    #[test]
    fn x2_independent_data_has_no_error() {
        let v0 = sample(|x1, _| (PI * x1).cos(), 33, 33).unwrap();
        let policy = TruncationPolicy::default();
        for e in [1.0, 0.25, 0.03] {
            let curve = solution_error(&v0, eps(e), &[0.01, 0.1, 1.0], &policy).unwrap();
            assert!(curve.sup_error < 1e-8, "eps={e}: {}", curve.sup_error);
        }
    }

    #[test]
    fn transverse_mode_error_is_closed_form() {
        let v0 = sample(|x1, x2| (PI * x1).cos() + (PI * x2).cos(), 65, 65).unwrap();
        let policy = TruncationPolicy::default();
        let curve = solution_error(&v0, eps(0.25), &[0.1], &policy).unwrap();
        let want = (-0.1 * 16.0 * PI * PI).exp() * FRAC_1_SQRT_2;
        assert!((curve.error[0] - want).abs() < 1e-9);
        assert!((want - 9.80e-8).abs() < 1e-10);

        let ts = geometric_times(0.01, 1.0, 16).unwrap();
        let a = solution_error(&v0, eps(0.25), &ts, &policy).unwrap();
        let b = solution_error(&v0, eps(0.125), &ts, &policy).unwrap();
        assert!(b.sup_error < a.sup_error);
    }

    #[test]
    fn empty_grid_rejected() {
        let v0 = sample(|_, _| 1.0, 5, 5).unwrap();
        let policy = TruncationPolicy::default();
        assert!(solution_error(&v0, eps(0.5), &[], &policy).is_err());
        assert!(solution_error(&v0, eps(0.5), &[0.2, 0.1], &policy).is_err());
    }

    #[test]
    fn report_sweep_and_serialization() {
        let v0 = sample(|x1, x2| (PI * x1).cos() + (PI * x2).cos(), 33, 33).unwrap();
        let exp = Experiment {
            eps_list: vec![eps(0.5), eps(0.25), eps(0.125)],
            n_max: 4,
            v0,
            t_grid: geometric_times(0.05, 0.5, 8).unwrap(),
            policy: TruncationPolicy::default(),
        };
        let report = convergence_report(&exp).unwrap();
        for (sup, e) in report.sup_errors.iter().zip([0.5f64, 0.25, 0.125]) {
            let want = (-0.05 * PI * PI / (e * e)).exp() * FRAC_1_SQRT_2;
            assert!((sup - want).abs() < 1e-9, "eps={e}: {sup} vs {want}");
        }
        assert_eq!(report.eigen_table.len(), 12);

        let mut buf = Vec::new();
        report.write_curves_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 3 * 8);
        assert!(text.starts_with("eps,t,error\n"));

        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["sup_errors"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn empty_sweep_and_equilibrium() {
        let v0 = sample(|_, _| 1.0, 17, 17).unwrap();
        let mut exp = Experiment {
            eps_list: vec![],
            n_max: 3,
            v0,
            t_grid: vec![0.1, 0.2],
            policy: TruncationPolicy::default(),
        };
        let report = convergence_report(&exp).unwrap();
        assert!(report.error_curves.is_empty() && report.eigen_table.is_empty());

        exp.eps_list = vec![eps(0.5), eps(0.1)];
        let report = convergence_report(&exp).unwrap();
        assert!(report.error_curves.iter().all(|c| c.error.iter().all(|e| *e < 1e-14)));
    }
}
