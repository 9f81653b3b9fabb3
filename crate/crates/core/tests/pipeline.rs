use std::f64::consts::{FRAC_1_SQRT_2, PI};

use thinplate::evolution::solve_physical_with_report;
use thinplate::{
    convergence_report, discrete_l2_distance, eigen_convergence, embed, fd_solve, geometric_times,
    project, reconstruct, sample, sample1d, sample_physical, solve, vertical_average, DomainTag,
    Epsilon, Experiment, FdConfig, GridField, GridField1D, TruncationPolicy, PI_SQ,
};

fn eps(v: f64) -> Epsilon {
    Epsilon::new(v).unwrap()
}

#[test]
fn spectral_and_finite_difference_agree_on_rough_data() {
    // corner bump: many modes, no closed form
    let v0 = sample(|x1, x2| (-20.0 * (x1 * x1 + x2 * x2)).exp(), 65, 65).unwrap();
    let e = eps(0.5);
    let sp = solve(&v0, e, 0.05, &TruncationPolicy::default()).unwrap();
    let fd = fd_solve(&v0, e, 0.05, &FdConfig::new(1e-4).unwrap()).unwrap();
    assert!(discrete_l2_distance(&sp, &fd).unwrap() < 1e-3);
}

#[test]
fn physical_plate_matches_fd_on_pulled_back_data() {
    let e = eps(0.25);
    let u0 = sample_physical(|x, y| (PI * x).cos() * (PI * y / 0.25).cos() + x, e, 33, 17).unwrap();
    let sol = solve_physical_with_report(&u0, 0.01, &TruncationPolicy::default()).unwrap();
    assert!(sol.truncation.certified);
    let fd = fd_solve(
        &u0.clone().retagged(DomainTag::Reference),
        e,
        0.01,
        &FdConfig::new(1e-5).unwrap(),
    )
    .unwrap();
    let sp = sol.field.retagged(DomainTag::Reference);
    assert!(discrete_l2_distance(&sp, &fd).unwrap() < 5e-3);
}

#[test]
fn thin_limit_of_a_mixed_field() {
    // x2-dependent part dies at rate π²/ε², x1 part survives in the 1D flow
    let v0 = sample(
        |x1, x2| 1.0 + (PI * x1).cos() + (2.0 * PI * x1).cos() * (PI * x2).cos(),
        65,
        65,
    )
    .unwrap();
    let t = 0.02;
    let u1 = vertical_average(&v0).unwrap();
    let want1 = sample1d(|x| 1.0 + (-t * PI_SQ).exp() * (PI * x).cos(), 65).unwrap();
    assert!(u1.max_abs_diff(&sample1d(|x| 1.0 + (PI * x).cos(), 65).unwrap()).unwrap() < 1e-12);
    let limit = thinplate::evolve1d(&u1, t, &TruncationPolicy::default()).unwrap();
    assert!(limit.max_abs_diff(&want1).unwrap() < 1e-10);

    for e in [0.5, 0.1] {
        let u = solve(&v0, eps(e), t, &TruncationPolicy::default()).unwrap();
        let d = u.max_abs_diff(&embed(&limit, 65).unwrap()).unwrap();
        let want = (-t * PI_SQ * (4.0 + 1.0 / (e * e))).exp();
        assert!((d - want).abs() < 1e-10 + 1e-6 * want, "ε={e}: {d} vs {want}");
    }
}

#[test]
fn state_json_schema() {
    let v0 = sample(|x1, _| (PI * x1).cos(), 17, 17).unwrap();
    let state = project(&v0, eps(0.5), 3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/state.json");
    state.save_json(&path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    for key in ["eps", "time", "truncation_count", "source_norm_sq", "pairs"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let pair = &v["pairs"][1];
    for key in ["rank", "m", "n", "lambda", "coefficient"] {
        assert!(pair.get(key).is_some(), "missing pairs[].{key}");
    }
    assert_eq!(pair["rank"], 2);
    assert_eq!(pair["lambda"].as_f64().unwrap(), PI_SQ);
    assert!((pair["coefficient"].as_f64().unwrap() - FRAC_1_SQRT_2).abs() < 1e-12);
}

#[test]
fn report_files_round_trip() {
    let v0 = sample(|x1, x2| (PI * x1).cos() + (PI * x2).cos(), 33, 33).unwrap();
    let exp = Experiment {
        eps_list: vec![eps(0.5), eps(0.25)],
        n_max: 4,
        v0,
        t_grid: geometric_times(0.05, 0.5, 8).unwrap(),
        policy: TruncationPolicy::default(),
    };
    let report = convergence_report(&exp).unwrap();
    let dir = tempfile::tempdir().unwrap();
    report.save_json(&dir.path().join("r.json")).unwrap();
    report.save_curves_csv(&dir.path().join("c.csv")).unwrap();

    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(v["eigen_table"].as_array().unwrap().len(), 8);
    let sups: Vec<f64> = v["sup_errors"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(sups, report.sup_errors);

    let csv = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("eps,t,error"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 16);
    assert_eq!(rows[8][0], 0.25);
    assert_eq!(rows[15][1], 0.5);
    // parsed values reproduce the in-memory curve bit for bit
    assert_eq!(rows[3][2].to_bits(), report.error_curves[0].error[3].to_bits());
}

#[test]
fn grid_files_round_trip_bitwise() {
    let f = sample(|x1, x2| (x1 * 7.3).sin() / (1.0 + x2 * x2 * 1e-3), 9, 5).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("f.csv");
    f.save_csv(&p).unwrap();
    assert_eq!(GridField::load_csv(&p).unwrap(), f);

    let g = sample1d(|x| 1.0 / (3.0 + x), 7).unwrap();
    let q = dir.path().join("g.csv");
    g.save_csv(&q).unwrap();
    assert_eq!(GridField1D::load_csv(&q).unwrap(), g);
}

#[test]
fn eigen_table_gaps_close_below_threshold() {
    for row in eigen_convergence(6, &[eps(0.2)]) {
        assert_eq!(row.gap, 0.0);
    }
    let table = eigen_convergence(3, &[eps(2.0)]);
    let gaps: Vec<f64> = table.iter().map(|r| r.gap / PI_SQ).collect();
    assert_eq!(gaps, vec![0.0, 0.75, 3.0]);
}

#[test]
fn reconstruction_of_projection_is_stable_under_refinement() {
    // the same smooth field projected on three grids gives the same leading coefficients
    let f = |x1: f64, x2: f64| (x1 - 0.5).powi(2) * (1.0 + x2);
    let c: Vec<Vec<f64>> = [33, 65, 129]
        .iter()
        .map(|&n| project(&sample(f, n, n).unwrap(), eps(0.3), 6).unwrap().coefficients())
        .collect();
    for (k, best) in c[2].iter().enumerate() {
        let (coarse, fine) = ((c[0][k] - best).abs(), (c[1][k] - best).abs());
        assert!(coarse < 1e-5 && fine <= coarse / 8.0 + 1e-15, "mode {k}: {coarse:e} {fine:e}");
    }
    let state = project(&sample(f, 33, 33).unwrap(), eps(0.3), 6).unwrap();
    assert_eq!(reconstruct(&state, 17, 9).unwrap().values().dim(), (17, 9));
}
