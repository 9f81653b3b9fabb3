//! Run configuration: command-line flags layered over an optional JSON file.

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Print the first eigenpairs as CSV
    Eigen,
    /// Write the spectral coefficients of the initial data as JSON
    Project,
    /// Solve on the plate and write the field as CSV
    Solve,
    /// Solve the limit problem on the segment
    Solve1d,
    /// Run the finite-difference solver and compare with the spectral one
    Oracle,
    /// Run an ε sweep of the dimension-reduction experiment
    Converge,
}

/// Every option, all optional so that a file can supply them.
#[derive(Debug, Clone, Default, Parser)]
#[command(name = "thinplate", version, about = "Spectral heat solver for thin plates")]
#[command(allow_negative_numbers = true)]
pub struct RunConfig {
    /// Subcommand; may come from the config file instead
    #[arg(value_enum)]
    pub command: Option<Command>,

    /// JSON file with default values for any option below
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Plate thickness ε
    #[arg(long)]
    pub eps: Option<f64>,
    /// Comma-separated thicknesses for `converge`
    #[arg(long, value_delimiter = ',')]
    pub eps_list: Option<Vec<f64>>,
    /// Number of modes; fixes the truncation when given to project/solve
    #[arg(long)]
    pub count: Option<usize>,
    /// Grid nodes along x1 for built-in initial data
    #[arg(long)]
    pub nx1: Option<usize>,
    /// Grid nodes along x2 for built-in initial data
    #[arg(long)]
    pub nx2: Option<usize>,
    /// Grid nodes for `solve1d` built-in initial data
    #[arg(long)]
    pub nx: Option<usize>,
    /// Final time
    #[arg(long)]
    pub t: Option<f64>,
    /// First time of the `converge` grid
    #[arg(long)]
    pub t0: Option<f64>,
    /// Last time of the `converge` grid
    #[arg(long)]
    pub t1: Option<f64>,
    /// Number of geometric time points for `converge`
    #[arg(long)]
    pub t_points: Option<usize>,
    /// Truncation tolerance in L²
    #[arg(long)]
    pub tol: Option<f64>,
    /// Hard cap on retained modes
    #[arg(long)]
    pub max_modes: Option<usize>,
    /// Times below this use the Parseval truncation criterion
    #[arg(long)]
    pub t_floor: Option<f64>,
    /// Time step for `oracle`
    #[arg(long)]
    pub dt: Option<f64>,
    /// Rows per ε in the eigenvalue table of `converge`
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Built-in initial data, e.g. `cos_x1(1)` or `sum:cos_x1(1),cos_x2(1)`
    #[arg(long)]
    pub init: Option<String>,
    /// CSV file with initial data
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Main output file; standard output when absent
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Error curves CSV for `converge`
    #[arg(long)]
    pub curves: Option<PathBuf>,
    /// Treat data as living on the physical plate (0,1)×(0,ε)
    #[arg(long)]
    pub physical: bool,
    /// Fail when the truncation tolerance cannot be certified
    #[arg(long)]
    pub strict: bool,
}

fn take<T: DeserializeOwned>(key: &str, value: Value) -> Result<Option<T>, CliError> {
    serde_json::from_value(value)
        .map(Some)
        .map_err(|e| CliError::config(key, e.to_string()))
}

impl RunConfig {
    /// Reads a config file. Keys are the long flag names with `_` for `-`.
    pub fn from_file(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let map: Map<String, Value> = serde_json::from_str(&text)
            .map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))?;
        let mut c = RunConfig::default();
        for (key, value) in map {
            let k = key.as_str();
            match k {
                "command" => c.command = take(k, value)?,
                "eps" => c.eps = take(k, value)?,
                "eps_list" => c.eps_list = take(k, value)?,
                "count" => c.count = take(k, value)?,
                "nx1" => c.nx1 = take(k, value)?,
                "nx2" => c.nx2 = take(k, value)?,
                "nx" => c.nx = take(k, value)?,
                "t" => c.t = take(k, value)?,
                "t0" => c.t0 = take(k, value)?,
                "t1" => c.t1 = take(k, value)?,
                "t_points" => c.t_points = take(k, value)?,
                "tol" => c.tol = take(k, value)?,
                "max_modes" => c.max_modes = take(k, value)?,
                "t_floor" => c.t_floor = take(k, value)?,
                "dt" => c.dt = take(k, value)?,
                "n_max" => c.n_max = take(k, value)?,
                "init" => c.init = take(k, value)?,
                "input" => c.input = take(k, value)?,
                "output" => c.output = take(k, value)?,
                "curves" => c.curves = take(k, value)?,
                "physical" => c.physical = take(k, value)?.unwrap_or(false),
                "strict" => c.strict = take(k, value)?.unwrap_or(false),
                _ => return Err(CliError::config(k, "unknown key in config file")),
            }
        }
        Ok(c)
    }

    /// Fills every option left unset on the command line from `file`.
    pub fn over(self, file: RunConfig) -> RunConfig {
        RunConfig {
            command: self.command.or(file.command),
            config: self.config,
            eps: self.eps.or(file.eps),
            eps_list: self.eps_list.or(file.eps_list),
            count: self.count.or(file.count),
            nx1: self.nx1.or(file.nx1),
            nx2: self.nx2.or(file.nx2),
            nx: self.nx.or(file.nx),
            t: self.t.or(file.t),
            t0: self.t0.or(file.t0),
            t1: self.t1.or(file.t1),
            t_points: self.t_points.or(file.t_points),
            tol: self.tol.or(file.tol),
            max_modes: self.max_modes.or(file.max_modes),
            t_floor: self.t_floor.or(file.t_floor),
            dt: self.dt.or(file.dt),
            n_max: self.n_max.or(file.n_max),
            init: self.init.or(file.init),
            input: self.input.or(file.input),
            output: self.output.or(file.output),
            curves: self.curves.or(file.curves),
            physical: self.physical || file.physical,
            strict: self.strict || file.strict,
        }
    }

    /// Parses flags and merges in the config file, if one is named.
    pub fn load<I, S>(args: I) -> Result<RunConfig, CliError>
    where
        I: IntoIterator<Item = S>,
        S: Into<std::ffi::OsString> + Clone,
    {
        let flags = RunConfig::try_parse_from(args).map_err(CliError::Clap)?;
        match &flags.config {
            Some(path) => {
                let file = RunConfig::from_file(path)?;
                Ok(flags.over(file))
            }
            None => Ok(flags),
        }
    }
}
