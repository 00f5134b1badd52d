//! Sweep configuration: command-line flags layered over an optional TOML file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, ValueEnum};
use mqnmr::RelaxationTime;
use serde::{Deserialize, Serialize};

/// `D = 4π·1307 s⁻¹`.
pub const DEFAULT_COUPLING: f64 = 4.0 * std::f64::consts::PI * 1307.0;
/// `Dτ = 9π/2`.
pub const DEFAULT_D_TAU: f64 = 4.5 * std::f64::consts::PI;
pub const DEFAULT_BETA: f64 = 6.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Pair,
    Chain,
    Entanglement,
    Figure1,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Quantity a grid sweeps over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GridVar {
    #[serde(rename = "x")]
    RelaxRatio,
    #[serde(rename = "dtau")]
    DTau,
    #[serde(rename = "tau")]
    Tau,
    #[serde(rename = "t-mq")]
    TMq,
    #[serde(rename = "beta")]
    Beta,
}

impl GridVar {
    pub fn name(self) -> &'static str {
        match self {
            Self::RelaxRatio => "x",
            Self::DTau => "dtau",
            Self::Tau => "tau",
            Self::TMq => "t-mq",
            Self::Beta => "beta",
        }
    }

    /// Grids in the same group would overwrite each other.
    fn group(self) -> u8 {
        match self {
            Self::Beta => 0,
            Self::DTau | Self::Tau => 1,
            Self::TMq | Self::RelaxRatio => 2,
        }
    }
}

impl FromStr for GridVar {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "x" => Self::RelaxRatio,
            "dtau" | "d-tau" | "d_tau" => Self::DTau,
            "tau" => Self::Tau,
            "t-mq" | "t_mq" | "tmq" => Self::TMq,
            "beta" => Self::Beta,
            _ => bail!("unknown grid variable {s:?} (expected x, dtau, tau, t-mq or beta)"),
        })
    }
}

/// Linear grid `VAR:START:STOP:POINTS`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub var: GridVar,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let last = self.points - 1;
        (0..self.points)
            .map(|k| {
                if k == last {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * k as f64 / last as f64
                }
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [var, start, stop, points] = parts[..] else {
            bail!("grid {s:?} must look like VAR:START:STOP:POINTS");
        };
        let num = |what: &str, v: &str| -> Result<f64> {
            let x: f64 = v.trim().parse().with_context(|| format!("grid {what} {v:?} is not a number"))?;
            if !x.is_finite() {
                bail!("grid {what} must be finite, got {v}");
            }
            Ok(x)
        };
        let grid = Grid {
            var: var.trim().parse()?,
            start: num("start", start)?,
            stop: num("stop", stop)?,
            points: points
                .trim()
                .parse()
                .with_context(|| format!("grid points {points:?} is not a positive integer"))?,
        };
        if grid.points < 1 {
            bail!("grid {s:?} needs at least one point");
        }
        if grid.start > grid.stop {
            bail!("grid {s:?} has start > stop");
        }
        Ok(grid)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}:{}", self.var.name(), self.start, self.stop, self.points)
    }
}

/// Flags shared by every subcommand.
#[derive(Args, Clone, Debug, Default)]
pub struct SweepArgs {
    /// TOML file with the same keys as the flags; flags take precedence
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output file (stdout when omitted)
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Sweep VAR over START..=STOP in POINTS linear steps; VAR is one of x, dtau, tau, t-mq, beta
    #[arg(long, value_name = "VAR:START:STOP:POINTS")]
    pub grid: Vec<String>,

    /// Inverse temperature ħω0/kT
    #[arg(long)]
    pub beta: Option<f64>,

    /// Dipolar coupling D, rad/s
    #[arg(long = "coupling-d", value_name = "RAD_PER_S")]
    pub coupling_d: Option<f64>,

    /// Preparation time τ, s
    #[arg(long)]
    pub tau: Option<f64>,

    /// Preparation time given as the product Dτ (alternative to --tau)
    #[arg(long = "d-tau")]
    pub d_tau: Option<f64>,

    /// Relaxation time T_MQ, s, or "inf"
    #[arg(long = "t-mq", value_name = "SECONDS|inf")]
    pub t_mq: Option<String>,

    /// Larmor frequency ω0, rad/s (enables the onset-temperature column)
    #[arg(long)]
    pub omega0: Option<f64>,

    /// Number of spins in the chain
    #[arg(long = "n-spins")]
    pub n_spins: Option<usize>,

    /// Add full-propagation columns to chain sweeps (N ≤ 6)
    #[arg(long)]
    pub oracle: bool,
}

/// Keys accepted in a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    out: Option<PathBuf>,
    format: Option<Format>,
    grid: Option<Vec<String>>,
    beta: Option<f64>,
    coupling_d: Option<f64>,
    tau: Option<f64>,
    d_tau: Option<f64>,
    t_mq: Option<TMqValue>,
    omega0: Option<f64>,
    n_spins: Option<usize>,
    oracle: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum TMqValue {
    Seconds(f64),
    Text(String),
}

/// Fully resolved sweep description.
#[derive(Clone, Debug, Serialize)]
pub struct SweepConfig {
    pub mode: Mode,
    pub coupling_d: f64,
    pub tau: f64,
    pub d_tau: f64,
    #[serde(serialize_with = "serialize_t_mq")]
    pub t_mq: RelaxationTime,
    pub beta: f64,
    pub omega0: Option<f64>,
    pub n_spins: Option<usize>,
    pub oracle: bool,
    #[serde(serialize_with = "serialize_grids")]
    pub grids: Vec<Grid>,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

fn serialize_t_mq<S: serde::Serializer>(t: &RelaxationTime, s: S) -> Result<S::Ok, S::Error> {
    match t {
        RelaxationTime::Infinite => s.serialize_str("inf"),
        RelaxationTime::Finite(v) => s.serialize_f64(*v),
    }
}

fn serialize_grids<S: serde::Serializer>(g: &[Grid], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(g.iter().map(|g| g.to_string()))
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(anyhow!("{name} must be positive, got {v}"))
    }
}

impl SweepConfig {
    pub fn resolve(mode: Mode, args: &SweepArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => read_file(path)?,
            None => FileConfig::default(),
        };

        let coupling_d = positive("--coupling-d", args.coupling_d.or(file.coupling_d).unwrap_or(DEFAULT_COUPLING))?;
        let beta = positive("--beta", args.beta.or(file.beta).unwrap_or(DEFAULT_BETA))?;

        // A flag beats the file; between tau and d-tau at the same level, tau wins.
        let tau = match (args.tau, args.d_tau, file.tau, file.d_tau) {
            (Some(t), _, _, _) => t,
            (None, Some(dt), _, _) => dt / coupling_d,
            (None, None, Some(t), _) => t,
            (None, None, None, Some(dt)) => dt / coupling_d,
            (None, None, None, None) => DEFAULT_D_TAU / coupling_d,
        };
        if !(tau.is_finite() && tau >= 0.0) {
            bail!("tau must be non-negative, got {tau}");
        }

        let t_mq = match (&args.t_mq, file.t_mq) {
            (Some(s), _) => s.parse::<RelaxationTime>()?,
            (None, Some(TMqValue::Text(s))) => s.parse::<RelaxationTime>()?,
            (None, Some(TMqValue::Seconds(v))) => v.to_string().parse::<RelaxationTime>()?,
            (None, None) => RelaxationTime::Infinite,
        };

        let omega0 = args.omega0.or(file.omega0).map(|w| positive("--omega0", w)).transpose()?;
        let n_spins = args.n_spins.or(file.n_spins);
        let oracle = args.oracle || file.oracle.unwrap_or(false);
        let format = args.format.or(file.format).unwrap_or_default();
        let out = args.out.clone().or(file.out);

        let grid_specs = if args.grid.is_empty() {
            file.grid.unwrap_or_default()
        } else {
            args.grid.clone()
        };
        let mut grids = grid_specs.iter().map(|s| s.parse::<Grid>()).collect::<Result<Vec<_>>>()?;
        if grids.is_empty() && mode == Mode::Figure1 {
            grids.push(Grid {
                var: GridVar::RelaxRatio,
                start: 0.0,
                stop: 3.0,
                points: 301,
            });
        }
        for (i, a) in grids.iter().enumerate() {
            if let Some(b) = grids[..i].iter().find(|b| b.var.group() == a.var.group()) {
                bail!("grids over {} and {} set the same quantity", b.var.name(), a.var.name());
            }
        }

        match mode {
            Mode::Chain => {
                let n = n_spins.ok_or_else(|| anyhow!("chain-sweep needs --n-spins"))?;
                if n < 2 {
                    bail!("a chain needs at least two spins, got --n-spins {n}");
                }
                if n > mqnmr::spin::MAX_SPINS {
                    bail!("--n-spins {n} exceeds the supported maximum {}", mqnmr::spin::MAX_SPINS);
                }
                if oracle && n > 6 {
                    bail!("--oracle runs full propagation and is limited to N <= 6, got {n}");
                }
            }
            _ if oracle => bail!("--oracle only applies to chain-sweep"),
            _ => {}
        }

        Ok(Self {
            mode,
            coupling_d,
            tau,
            d_tau: coupling_d * tau,
            t_mq,
            beta,
            omega0,
            n_spins,
            oracle,
            grids,
            format,
            out,
        })
    }

    /// Every grid point in row order (first grid varies slowest), with the
    /// swept quantities applied to the base parameters.
    pub fn points(&self) -> Result<Vec<Point>> {
        let base = Point {
            beta: self.beta,
            coupling_d: self.coupling_d,
            tau: self.tau,
            t_mq: self.t_mq,
        };
        let mut combos: Vec<Vec<(GridVar, f64)>> = vec![Vec::new()];
        for g in &self.grids {
            let values = g.values();
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    values.iter().map(move |&v| {
                        let mut c = c.clone();
                        c.push((g.var, v));
                        c
                    })
                })
                .collect();
        }
        combos
            .into_iter()
            .map(|mut assignment| {
                assignment.sort_by_key(|(var, _)| var.group());
                let mut p = base;
                for (var, v) in assignment {
                    p.apply(var, v)?;
                }
                Ok(p)
            })
            .collect()
    }
}

fn read_file(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

/// One grid point's physical parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub beta: f64,
    pub coupling_d: f64,
    pub tau: f64,
    pub t_mq: RelaxationTime,
}

impl Point {
    fn apply(&mut self, var: GridVar, v: f64) -> Result<()> {
        match var {
            GridVar::Beta => self.beta = positive("beta", v)?,
            GridVar::Tau => {
                if v < 0.0 {
                    bail!("tau must be non-negative, got {v}");
                }
                self.tau = v;
            }
            GridVar::DTau => {
                if v < 0.0 {
                    bail!("dtau must be non-negative, got {v}");
                }
                self.tau = v / self.coupling_d;
            }
            GridVar::TMq => self.t_mq = RelaxationTime::Finite(positive("t-mq", v)?),
            GridVar::RelaxRatio => self.t_mq = RelaxationTime::from_ratio(self.tau, v)?,
        }
        Ok(())
    }

    pub fn d_tau(&self) -> f64 {
        self.coupling_d * self.tau
    }

    pub fn relax_ratio(&self) -> f64 {
        self.t_mq.ratio(self.tau)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g: Grid = "x:0:3:4".parse().unwrap();
        assert_eq!(g.var, GridVar::RelaxRatio);
        assert_eq!(g.values(), vec![0.0, 1.0, 2.0, 3.0]);
        let g: Grid = "beta:2:2:1".parse().unwrap();
        assert_eq!(g.values(), vec![2.0]);
        assert!("x:3:0:4".parse::<Grid>().is_err());
        assert!("x:0:3:0".parse::<Grid>().is_err());
        assert!("x:0:3".parse::<Grid>().is_err());
        assert!("q:0:3:2".parse::<Grid>().is_err());
        assert!("x:0:nan:2".parse::<Grid>().is_err());
    }

    #[test]
    fn grid_endpoints_are_exact() {
        let g: Grid = "x:0:3:301".parse().unwrap();
        let v = g.values();
        assert_eq!(v.len(), 301);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[300], 3.0);
    }

    #[test]
    fn defaults_follow_figure_parameters() {
        let cfg = SweepConfig::resolve(Mode::Figure1, &SweepArgs::default()).unwrap();
        assert_eq!(cfg.beta, 6.0);
        assert!((cfg.d_tau - DEFAULT_D_TAU).abs() < 1e-12);
        assert_eq!(cfg.t_mq, RelaxationTime::Infinite);
        assert_eq!(cfg.grids.len(), 1);
        assert_eq!(cfg.points().unwrap().len(), 301);
    }

    #[test]
    fn flags_beat_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.toml");
        std::fs::write(&path, "beta = 2.0\nt_mq = \"inf\"\ngrid = [\"x:0:1:3\"]\ntau = 0.5\n").unwrap();
        let args = SweepArgs {
            config: Some(path.clone()),
            beta: Some(4.0),
            ..Default::default()
        };
        let cfg = SweepConfig::resolve(Mode::Pair, &args).unwrap();
        assert_eq!(cfg.beta, 4.0);
        assert_eq!(cfg.tau, 0.5);
        assert_eq!(cfg.grids.len(), 1);

        std::fs::write(&path, "t_mq = 0.25\n").unwrap();
        let cfg = SweepConfig::resolve(Mode::Pair, &args).unwrap();
        assert_eq!(cfg.t_mq, RelaxationTime::Finite(0.25));

        std::fs::write(&path, "bogus = 1\n").unwrap();
        assert!(SweepConfig::resolve(Mode::Pair, &args).is_err());
    }

    #[test]
    fn conflicting_grids_rejected() {
        let args = SweepArgs {
            grid: vec!["x:0:1:2".into(), "t-mq:1:2:2".into()],
            ..Default::default()
        };
        assert!(SweepConfig::resolve(Mode::Pair, &args).is_err());
    }

    #[test]
    fn chain_needs_spins() {
        assert!(SweepConfig::resolve(Mode::Chain, &SweepArgs::default()).is_err());
        let args = SweepArgs {
            n_spins: Some(1),
            ..Default::default()
        };
        assert!(SweepConfig::resolve(Mode::Chain, &args).is_err());
        let args = SweepArgs {
            n_spins: Some(8),
            oracle: true,
            ..Default::default()
        };
        assert!(SweepConfig::resolve(Mode::Chain, &args).is_err());
    }

    #[test]
    fn points_apply_tau_before_ratio() {
        let args = SweepArgs {
            grid: vec!["x:1:1:1".into(), "dtau:2:2:1".into()],
            coupling_d: Some(4.0),
            ..Default::default()
        };
        let cfg = SweepConfig::resolve(Mode::Pair, &args).unwrap();
        let p = cfg.points().unwrap()[0];
        assert_eq!(p.tau, 0.5);
        assert_eq!(p.t_mq, RelaxationTime::Finite(0.5));
    }
}
