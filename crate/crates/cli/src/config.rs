use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use ptspec::eigen::{DEFAULT_DIMS, DEFAULT_TOL};
use ptspec::hamiltonian::OscillatorSpec;
use ptspec::perturbation::{MAX_LEVEL, MAX_ORDER};
use ptspec::verify::DEFAULT_SEED;

pub const DIMS_ENV: &str = "PTSPEC_DIMS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Spectrum,
    Verify,
    Sweep,
    Norms,
    Algebra,
    Perturb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "ptspec", version, about = "Spectra and indefinite-metric checks for PT-invariant oscillators")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    omega: f64,
    #[arg(long, allow_negative_numbers = true)]
    g: Option<f64>,
    #[arg(long, default_value_t = 3)]
    k: u32,
    #[arg(long, default_value_t = 6)]
    levels: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Dimension ladder, e.g. 32,64,128 (overrides PTSPEC_DIMS)
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Couplings for `sweep`
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    g_grid: Option<Vec<f64>>,
    /// Powers for `sweep`; defaults to --k
    #[arg(long, value_delimiter = ',')]
    k_grid: Option<Vec<u32>>,
    /// Perturbative order for `perturb`
    #[arg(long, default_value_t = 4)]
    order: usize,
    /// Switching rate for the adiabatic amplitude in `perturb`
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    /// Seed for the random specs in `verify`
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for `sweep`
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub omega: f64,
    pub g: f64,
    pub k: u32,
    pub levels: usize,
    pub tol: f64,
    pub dims: Vec<usize>,
    pub g_grid: Vec<f64>,
    pub k_grid: Vec<u32>,
    pub order: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub jobs: usize,
}

impl RunConfig {
    pub fn spec(&self) -> OscillatorSpec {
        self.spec_at(self.g, self.k)
    }

    pub fn spec_at(&self, g: f64, k: u32) -> OscillatorSpec {
        OscillatorSpec {
            omega: self.omega,
            g,
            k,
            sector: Default::default(),
        }
    }
}

#[derive(Debug)]
pub enum ConfigError {
    /// `--help` or `--version`: print and exit 0.
    Info(String),
    Usage(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Info(s) | ConfigError::Usage(s) => f.write_str(s),
        }
    }
}

fn usage(msg: impl Into<String>) -> ConfigError {
    ConfigError::Usage(msg.into())
}

fn parse_dims(raw: &str) -> Result<Vec<usize>, ConfigError> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| usage(format!("{DIMS_ENV}: cannot parse {s:?} as a dimension")))
        })
        .collect()
}

/// Parses `argv` (without the program name), reading the dimension ladder
/// from `env_dims` when `--dims` is absent.
pub fn parse_config_with_env<I, S>(argv: I, env_dims: Option<&str>) -> Result<RunConfig, ConfigError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args = Args::try_parse_from(std::iter::once("ptspec".into()).chain(argv.into_iter().map(Into::into)))
        .map_err(|e| match e.kind() {
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                ConfigError::Info(e.to_string())
            }
            _ => ConfigError::Usage(e.to_string()),
        })?;

    let sweep = args.command == Command::Sweep;
    if args.format == Format::Csv && !sweep {
        return Err(usage("--format csv is only available for sweep"));
    }
    if !sweep && (args.g_grid.is_some() || args.k_grid.is_some()) {
        return Err(usage("--g-grid and --k-grid only apply to sweep"));
    }
    if sweep && args.g.is_some() && args.g_grid.is_some() {
        return Err(usage("--g conflicts with --g-grid"));
    }
    if sweep && args.g.is_none() && args.g_grid.is_none() {
        return Err(usage("sweep needs --g-grid"));
    }

    let dims = match (args.dims, env_dims) {
        (Some(d), _) => d,
        (None, Some(raw)) if !raw.trim().is_empty() => parse_dims(raw)?,
        _ => DEFAULT_DIMS.to_vec(),
    };
    let g = args.g.unwrap_or(0.0);
    let g_grid = args.g_grid.unwrap_or_else(|| if sweep { vec![g] } else { Vec::new() });
    let k_grid = args.k_grid.unwrap_or_else(|| if sweep { vec![args.k] } else { Vec::new() });

    let config = RunConfig {
        command: args.command,
        omega: args.omega,
        g,
        k: args.k,
        levels: args.levels,
        tol: args.tol,
        dims,
        g_grid,
        k_grid,
        order: args.order,
        epsilon: args.epsilon,
        seed: args.seed,
        format: args.format,
        out: args.out,
        jobs: args.jobs,
    };
    validate(&config)?;
    Ok(config)
}

/// [`parse_config_with_env`] with `PTSPEC_DIMS` from the process environment.
pub fn parse_config<I, S>(argv: I) -> Result<RunConfig, ConfigError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let env = std::env::var(DIMS_ENV).ok();
    parse_config_with_env(argv, env.as_deref())
}

fn validate(c: &RunConfig) -> Result<(), ConfigError> {
    if !(c.omega.is_finite() && c.omega > 0.0) {
        return Err(usage(format!("--omega must be positive, got {}", c.omega)));
    }
    if !c.g.is_finite() || c.g_grid.iter().any(|g| !g.is_finite()) {
        return Err(usage("couplings must be finite"));
    }
    if c.k == 0 || c.k_grid.contains(&0) {
        return Err(usage("--k must be at least 1"));
    }
    if !(c.tol.is_finite() && c.tol > 0.0) {
        return Err(usage(format!("--tol must be positive, got {}", c.tol)));
    }
    if c.levels == 0 {
        return Err(usage("--levels must be at least 1"));
    }
    if c.dims.is_empty() || c.dims.contains(&0) {
        return Err(usage("dimension ladder must be non-empty with positive entries"));
    }
    if c.dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(usage("dimension ladder must be strictly increasing"));
    }
    if c.jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    if !(c.epsilon.is_finite() && c.epsilon > 0.0) {
        return Err(usage(format!("--epsilon must be positive, got {}", c.epsilon)));
    }
    if c.command == Command::Perturb {
        if c.order > MAX_ORDER {
            return Err(usage(format!("--order must be at most {MAX_ORDER}")));
        }
        if c.levels > MAX_LEVEL + 1 {
            return Err(usage(format!("perturb handles at most {} levels", MAX_LEVEL + 1)));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig, ConfigError> {
        parse_config_with_env(args.iter().copied(), None)
    }

    #[test]
    fn spectrum_defaults() {
        let c = parse(&["spectrum", "--k", "3", "--g", "0.5", "--levels", "6"]).unwrap();
        assert_eq!(c.command, Command::Spectrum);
        assert_eq!((c.k, c.g, c.levels), (3, 0.5, 6));
        assert_eq!(c.omega, 1.0);
        assert_eq!(c.tol, DEFAULT_TOL);
        assert_eq!(c.dims, DEFAULT_DIMS.to_vec());
        assert_eq!(c.format, Format::Json);
        assert!(c.g_grid.is_empty());
    }

    #[test]
    fn verify_defaults() {
        let c = parse(&["verify"]).unwrap();
        assert_eq!(c.command, Command::Verify);
        assert_eq!(c.seed, DEFAULT_SEED);
    }

    #[test]
    fn validation_errors() {
        for bad in [
            &["spectrum", "--k", "0"][..],
            &["spectrum", "--omega", "0"],
            &["spectrum", "--omega", "-1"],
            &["spectrum", "--tol", "0"],
            &["spectrum", "--levels", "0"],
            &["spectrum", "--dims", "64,32"],
            &["spectrum", "--jobs", "0"],
            &["spectrum", "--g", "abc"],
            &["spectrum", "--bogus"],
            &["spectrum", "--format", "csv"],
            &["spectrum", "--g-grid", "0.1,0.2"],
            &["sweep"],
            &["sweep", "--g", "0.1", "--g-grid", "0.1"],
            &["perturb", "--order", "7"],
            &["perturb", "--levels", "12"],
            &["explode"],
        ] {
            assert!(matches!(parse(bad), Err(ConfigError::Usage(_))), "{bad:?}");
        }
    }

    #[test]
    fn help_is_not_an_error() {
        assert!(matches!(parse(&["--help"]), Err(ConfigError::Info(_))));
    }

    #[test]
    fn sweep_grids() {
        let c = parse(&["sweep", "--k", "1", "--g-grid", "0.5,1.0", "--levels", "3", "--format", "csv"]).unwrap();
        assert_eq!(c.g_grid, vec![0.5, 1.0]);
        assert_eq!(c.k_grid, vec![1]);
        let c = parse(&["sweep", "--g", "-0.3"]).unwrap();
        assert_eq!(c.g_grid, vec![-0.3]);
    }

    #[test]
    fn dims_from_environment() {
        let c = parse_config_with_env(["spectrum"], Some("16,32")).unwrap();
        assert_eq!(c.dims, vec![16, 32]);
        let c = parse_config_with_env(["spectrum", "--dims", "8"], Some("16,32")).unwrap();
        assert_eq!(c.dims, vec![8]);
        assert!(parse_config_with_env(["spectrum"], Some("16,x")).is_err());
    }
}
