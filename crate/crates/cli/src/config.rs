//! Run configuration: presets, JSON configuration documents and per-flag
//! overrides, resolved in that order.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use optobath::bath::{lin_grid, log_grid};
use optobath::msi::HardwareBlock;
use optobath::presets::{preset, PresetMember};
use optobath::quad::QuadConfig;
use optobath::SystemParams;
use serde::{Deserialize, Serialize};

/// Error class that decides the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, documents or parameter values (exit 2).
    Config(String),
    /// Failures while computing or writing results (exit 1).
    Runtime(anyhow::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<optobath::Error> for CliError {
    fn from(e: optobath::Error) -> Self {
        match e {
            optobath::Error::InvalidParam { .. } | optobath::Error::Grid(_) => CliError::Config(e.to_string()),
            other => CliError::Runtime(other.into()),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Lin,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// One sweep axis. Counts are at least 2 and `min < max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub variable: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub scale: Scale,
}

impl SweepSpec {
    pub fn grid(&self) -> CliResult<Vec<f64>> {
        if self.count < 2 {
            return Err(config_err(format!("sweep count must be >= 2, got {}", self.count)));
        }
        if !(self.min < self.max) {
            return Err(config_err(format!("sweep needs min < max, got [{}, {}]", self.min, self.max)));
        }
        Ok(match self.scale {
            Scale::Lin => lin_grid(self.min, self.max, self.count)?,
            Scale::Log => log_grid(self.min, self.max, self.count)?,
        })
    }
}

/// Quadrature tolerance overrides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

/// JSON configuration document.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub params: Option<SystemParams>,
    #[serde(default)]
    pub hardware: Option<HardwareBlock>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("reading {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| config_err(format!("parsing {}: {e}", path.display())))
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON configuration document.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Named parameter set: fig1-cooled, fig1-bare, fig3.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long = "gc")]
    pub g_c: Option<f64>,
    #[arg(long = "ga")]
    pub g_a: Option<f64>,
    #[arg(long = "kappa-c", allow_hyphen_values = true)]
    pub kappa_c: Option<f64>,
    #[arg(long = "delta-c", allow_hyphen_values = true)]
    pub delta_c: Option<f64>,
    #[arg(long = "gamma-m")]
    pub gamma_m: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long = "kappa-a")]
    pub kappa_a: Option<f64>,
    #[arg(long = "delta-a", allow_hyphen_values = true)]
    pub delta_a: Option<f64>,
    /// Output path; standard output when absent.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Fully resolved inputs of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub members: Vec<PresetMember>,
    pub sweep: Option<SweepSpec>,
    pub quad: QuadConfig,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> CliResult<Self> {
        let file = match &args.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let mut members = match (&args.preset, &file.params) {
            (Some(_), Some(_)) => return Err(config_err("--preset and a params block are mutually exclusive")),
            (Some(name), None) => preset(name)?,
            (None, params) => vec![PresetMember {
                label: String::new(),
                params: params.unwrap_or_default(),
            }],
        };
        let hardware_g_a = file.hardware.map(|h| h.g_a()).transpose()?;
        for m in &mut members {
            apply_overrides(&mut m.params, args, hardware_g_a);
            m.params.validate()?;
        }
        let quad = match file.tolerances {
            Some(t) if t.abs_tol > 0.0 && t.rel_tol > 0.0 => QuadConfig {
                abs_tol: t.abs_tol,
                rel_tol: t.rel_tol,
                ..QuadConfig::default()
            },
            Some(_) => return Err(config_err("tolerances must be > 0")),
            None => QuadConfig::default(),
        };
        if args.threads == Some(0) {
            return Err(config_err("--threads must be >= 1"));
        }
        Ok(Self {
            members,
            sweep: file.sweep,
            quad,
            seed: args.seed.or(file.seed).unwrap_or(0),
            out: args.out.clone(),
            format: args.format,
        })
    }

    /// The single parameter set of a one-member run.
    pub fn single(&self) -> CliResult<SystemParams> {
        match self.members.as_slice() {
            [m] => Ok(m.params),
            _ => Err(config_err("this command takes a single parameter set, not a preset family")),
        }
    }

    /// Output path for one member: `<stem>_<label>.<ext>` for families.
    pub fn member_path(&self, label: &str) -> CliResult<Option<PathBuf>> {
        match (&self.out, label.is_empty()) {
            (out, true) => Ok(out.clone()),
            (None, false) => Err(config_err("preset families write one file per member; pass --out")),
            (Some(out), false) => {
                let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
                let ext = out.extension().and_then(|s| s.to_str()).unwrap_or(self.format.extension());
                Ok(Some(out.with_file_name(format!("{stem}_{label}.{ext}"))))
            }
        }
    }
}

fn apply_overrides(p: &mut SystemParams, args: &CommonArgs, hardware_g_a: Option<f64>) {
    if let Some(g) = hardware_g_a {
        p.g_a = g;
    }
    let pairs: [(&mut f64, Option<f64>); 8] = [
        (&mut p.g_c, args.g_c),
        (&mut p.g_a, args.g_a),
        (&mut p.kappa_c, args.kappa_c),
        (&mut p.delta_c, args.delta_c),
        (&mut p.gamma_m, args.gamma_m),
        (&mut p.beta, args.beta),
        (&mut p.kappa_a, args.kappa_a),
        (&mut p.delta_a, args.delta_a),
    ];
    for (field, value) in pairs {
        if let Some(v) = value {
            *field = v;
        }
    }
}
