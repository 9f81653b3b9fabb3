use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde_json::json;
use thinplate::evolution::{project_for, solve_physical_with_report, solve_with_report};
use thinplate::io::fmt_f64;
use thinplate::limit1d::{evolve1d_state, project_for1d};
use thinplate::projection::DEFAULT_GRID;
use thinplate::{
    convergence_report, discrete_l2_distance, fd_mean, fd_solve, geometric_times, ordered_spectrum,
    project, reconstruct1d, sample, sample1d, solve_with_modes, DomainTag, Epsilon, Experiment,
    FdConfig, GridField, GridField1D, Truncation, TruncationPolicy,
};

use crate::config::{Command, RunConfig};
use crate::error::CliError;
use crate::init::Selector;

type Result<T> = std::result::Result<T, CliError>;

const DEFAULT_EIGEN_COUNT: usize = 10;
const DEFAULT_DT: f64 = 1e-4;
const DEFAULT_N_MAX: usize = 10;

fn required<T: Copy>(value: Option<T>, field: &str, command: &str) -> Result<T> {
    value.ok_or_else(|| CliError::config(field, format!("required by {command}")))
}

fn epsilon(value: Option<f64>, command: &str) -> Result<Epsilon> {
    Ok(Epsilon::new(required(value, "eps", command)?)?)
}

fn policy(c: &RunConfig) -> Result<TruncationPolicy> {
    let d = TruncationPolicy::default();
    Ok(TruncationPolicy::new(
        c.tol.unwrap_or(d.tol),
        c.max_modes.unwrap_or(d.max_modes),
        c.t_floor.unwrap_or(d.t_floor),
    )?)
}

fn time(value: Option<f64>, field: &str, command: &str) -> Result<f64> {
    let t = required(value, field, command)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(CliError::config(field, format!("must be finite and nonnegative, got {t}")));
    }
    Ok(t)
}

fn selector(c: &RunConfig) -> Result<Option<Selector>> {
    match (&c.init, &c.input) {
        (Some(_), Some(_)) => Err(CliError::config("init", "give either init or input, not both")),
        (None, None) => Err(CliError::config("init", "initial data required (init or input)")),
        (Some(s), None) => Selector::parse(s).map(Some).map_err(|e| CliError::config("init", e)),
        (None, Some(_)) => Ok(None),
    }
}

/// Initial data on the unit square or, with `physical`, on the plate.
fn field2d(c: &RunConfig, eps: Option<Epsilon>) -> Result<GridField> {
    match selector(c)? {
        Some(sel) => {
            let nx1 = c.nx1.unwrap_or(DEFAULT_GRID);
            let nx2 = c.nx2.unwrap_or(DEFAULT_GRID);
            let f = sample(|x1, x2| sel.eval(x1, x2), nx1, nx2)?;
            match (c.physical, eps) {
                (false, _) => Ok(f),
                (true, Some(e)) => Ok(f.retagged(DomainTag::Physical(e))),
                (true, None) => Err(CliError::config("eps", "required for physical initial data")),
            }
        }
        None => {
            let path = c.input.as_deref().expect("selector checked");
            let f = GridField::load_csv(path)?;
            match (c.physical, f.tag()) {
                (false, DomainTag::Reference) | (true, DomainTag::Physical(_)) => Ok(f),
                (false, tag) => Err(CliError::config(
                    "input",
                    format!("{} holds {tag} data; pass --physical", path.display()),
                )),
                (true, tag) => Err(CliError::config(
                    "input",
                    format!("{} holds {tag} data but --physical was given", path.display()),
                )),
            }
        }
    }
}

fn field1d(c: &RunConfig) -> Result<GridField1D> {
    match selector(c)? {
        Some(sel) => {
            let f = sel.as_1d().map_err(|e| CliError::config("init", e))?;
            Ok(sample1d(f, c.nx.unwrap_or(DEFAULT_GRID))?)
        }
        None => Ok(GridField1D::load_csv(c.input.as_deref().expect("selector checked"))?),
    }
}

/// Opens the output file, or standard output when none is configured.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            }
            let f = File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(std::io::stdout().lock()))),
    }
}

fn write_with<F>(path: Option<&Path>, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> std::result::Result<(), Box<dyn std::error::Error>>,
{
    let mut w = sink(path)?;
    let label = path.map_or_else(|| "stdout".to_string(), |p| p.display().to_string());
    body(&mut w).map_err(|e| CliError::Io(format!("{label}: {e}")))?;
    w.flush().map_err(|e| CliError::Io(format!("{label}: {e}")))
}

fn write_json(path: Option<&Path>, value: &impl serde::Serialize) -> Result<()> {
    write_with(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n")?;
        Ok(())
    })
}

fn write_field(path: Option<&Path>, f: &GridField) -> Result<()> {
    write_with(path, |w| Ok(f.write_csv(w)?))
}

fn check_certificate(t: &Truncation, strict: bool) -> Result<()> {
    if t.certified {
        return Ok(());
    }
    let msg = format!(
        "truncation tolerance not certified with {} modes (tail bound {:e}); raise max_modes",
        t.count, t.tail_bound
    );
    if strict {
        return Err(CliError::Numerical(msg));
    }
    eprintln!("warning: {msg}");
    Ok(())
}

fn eigen(c: &RunConfig) -> Result<()> {
    let eps = epsilon(c.eps, "eigen")?;
    let count = c.count.unwrap_or(DEFAULT_EIGEN_COUNT);
    let pairs = ordered_spectrum(eps, count)?;
    write_with(c.output.as_deref(), |w| {
        writeln!(w, "rank,m,n,lambda")?;
        for p in &pairs {
            writeln!(w, "{},{},{},{}", p.rank, p.mode.m, p.mode.n, fmt_f64(p.lambda))?;
        }
        Ok(())
    })
}

fn project_cmd(c: &RunConfig) -> Result<()> {
    let eps = epsilon(c.eps, "project")?;
    let v0 = field2d(c, Some(eps))?.retagged(DomainTag::Reference);
    let state = match c.count {
        Some(n) => project(&v0, eps, n)?,
        None => {
            let t = time(c.t.or(Some(0.0)), "t", "project")?;
            let (state, truncation) = project_for(&v0, eps, t, &policy(c)?)?;
            check_certificate(&truncation, c.strict)?;
            state
        }
    };
    write_json(c.output.as_deref(), &state.to_record())
}

fn solve_cmd(c: &RunConfig) -> Result<()> {
    let t = time(c.t, "t", "solve")?;
    let policy = policy(c)?;
    let given = c.eps.map(Epsilon::new).transpose()?;
    let v0 = field2d(c, given)?;
    let eps = match (v0.tag(), given) {
        (DomainTag::Physical(e), Some(g)) if e != g => {
            return Err(CliError::config(
                "eps",
                format!("{} disagrees with the input file ({})", g.value(), e.value()),
            ))
        }
        (DomainTag::Physical(e), _) => e,
        (DomainTag::Reference, _) => epsilon(c.eps, "solve")?,
    };
    let field = match c.count {
        Some(n) => {
            let tag = v0.tag();
            solve_with_modes(&v0.retagged(DomainTag::Reference), eps, t, n)?.retagged(tag)
        }
        None => {
            let sol = if c.physical {
                solve_physical_with_report(&v0, t, &policy)?
            } else {
                solve_with_report(&v0, eps, t, &policy)?
            };
            check_certificate(&sol.truncation, c.strict)?;
            sol.field
        }
    };
    write_field(c.output.as_deref(), &field)
}

fn solve1d_cmd(c: &RunConfig) -> Result<()> {
    let t = time(c.t, "t", "solve1d")?;
    let u0 = field1d(c)?;
    let (state, truncation) = project_for1d(&u0, t, &policy(c)?)?;
    check_certificate(&truncation, c.strict)?;
    let u = reconstruct1d(&evolve1d_state(&state, t)?, u0.nx())?;
    write_with(c.output.as_deref(), |w| Ok(u.write_csv(w)?))
}

fn oracle_cmd(c: &RunConfig) -> Result<()> {
    let eps = epsilon(c.eps, "oracle")?;
    let t = time(c.t, "t", "oracle")?;
    if t == 0.0 {
        return Err(CliError::config("t", "must be positive for oracle"));
    }
    let cfg = FdConfig::new(c.dt.unwrap_or(DEFAULT_DT))?;
    let v0 = field2d(c, Some(eps))?.retagged(DomainTag::Reference);
    let fd = fd_solve(&v0, eps, t, &cfg)?;
    let sol = solve_with_report(&v0, eps, t, &policy(c)?)?;
    check_certificate(&sol.truncation, c.strict)?;
    let distance = discrete_l2_distance(&fd, &sol.field)?;
    if !distance.is_finite() {
        return Err(CliError::Numerical(format!("distance to spectral solution is {distance}")));
    }
    write_field(c.output.as_deref(), &fd)?;
    let summary = json!({
        "eps": eps.value(),
        "t": t,
        "dt": cfg.dt,
        "nx1": v0.nx1(),
        "nx2": v0.nx2(),
        "spectral_modes": sol.truncation.count,
        "fd_mean": fd_mean(&fd),
        "l2_distance": distance,
    });
    // With the field on stdout the summary goes to stderr to keep the CSV clean.
    let summary = serde_json::to_string_pretty(&summary).expect("plain JSON value");
    if c.output.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn converge_cmd(c: &RunConfig) -> Result<()> {
    let list = c
        .eps_list
        .clone()
        .ok_or_else(|| CliError::config("eps_list", "required by converge"))?;
    let eps_list = list
        .iter()
        .map(|&e| Epsilon::new(e).map_err(|err| CliError::config("eps_list", err.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let t0 = time(c.t0, "t0", "converge")?;
    let t1 = time(c.t1, "t1", "converge")?;
    let points = c.t_points.unwrap_or(thinplate::convergence::DEFAULT_TIME_POINTS);
    let t_grid = geometric_times(t0, t1, points)?;
    let experiment = Experiment {
        eps_list,
        n_max: c.n_max.unwrap_or(DEFAULT_N_MAX),
        v0: field2d(c, None)?,
        t_grid,
        policy: policy(c)?,
    };
    let report = convergence_report(&experiment)?;
    if let Some(bad) = report.sup_errors.iter().find(|e| !e.is_finite()) {
        return Err(CliError::Numerical(format!("sup error {bad}")));
    }
    write_json(c.output.as_deref(), &report)?;
    if let Some(path) = c.curves.as_deref() {
        write_with(Some(path), |w| Ok(report.write_curves_csv(w)?))?;
    }
    Ok(())
}

pub fn run(c: &RunConfig) -> Result<()> {
    let command = c
        .command
        .ok_or_else(|| CliError::config("command", "no command given on the command line or in the config file"))?;
    match command {
        Command::Eigen => eigen(c),
        Command::Project => project_cmd(c),
        Command::Solve => solve_cmd(c),
        Command::Solve1d => solve1d_cmd(c),
        Command::Oracle => oracle_cmd(c),
        Command::Converge => converge_cmd(c),
    }
}
