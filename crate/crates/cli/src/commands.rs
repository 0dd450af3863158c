use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, ValueEnum};
use optobath::bath::{default_grid, BathSpectrum};
use optobath::rates::RateTable;
use optobath::stability::{MapAxis, StabilityMap};
use optobath::SystemParams;

use crate::config::{config_err, CliResult, CommonArgs, Format, RunConfig, Scale, SweepSpec};

/// Frequency axis of `spectrum` and `rates`.
#[derive(Debug, Clone, Default, Args)]
pub struct OmegaAxis {
    #[arg(long = "omega-min")]
    pub min: Option<f64>,
    #[arg(long = "omega-max")]
    pub max: Option<f64>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, value_enum)]
    pub scale: Option<Scale>,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub axis: OmegaAxis,
}

#[derive(Debug, Clone, Args)]
pub struct RatesArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub axis: OmegaAxis,
    /// Emit raw negative occupations in the gain regime instead of NaN.
    #[arg(long)]
    pub allow_gain: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    GA,
    DeltaA,
}

#[derive(Debug, Clone, Args)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long = "gc-min", default_value_t = 0.0)]
    pub gc_min: f64,
    #[arg(long = "gc-max", default_value_t = 0.7)]
    pub gc_max: f64,
    #[arg(long = "gc-count", default_value_t = 50)]
    pub gc_count: usize,
    /// Second map axis.
    #[arg(long, value_enum, default_value_t = AxisArg::GA)]
    pub axis: AxisArg,
    /// Explicit values of the second axis (comma separated).
    #[arg(long = "y-values", value_delimiter = ',', allow_hyphen_values = true)]
    pub y_values: Vec<f64>,
    #[arg(long = "y-min", allow_hyphen_values = true)]
    pub y_min: Option<f64>,
    #[arg(long = "y-max", allow_hyphen_values = true)]
    pub y_max: Option<f64>,
    #[arg(long = "y-count", default_value_t = 50)]
    pub y_count: usize,
}

/// Opens `path` or standard output.
pub fn open_output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            Box::new(BufWriter::new(f))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(
    path: Option<PathBuf>,
    format: Format,
    csv: impl FnOnce(&mut dyn Write) -> io::Result<()>,
    json: impl FnOnce() -> serde_json::Value,
) -> CliResult<()> {
    let shown = path.as_ref().map_or("<stdout>".to_string(), |p| p.display().to_string());
    let mut out = open_output(path.as_deref())?;
    match format {
        Format::Csv => csv(&mut *out),
        Format::Json => serde_json::to_writer_pretty(&mut out, &json())
            .map_err(io::Error::other)
            .and_then(|_| writeln!(out)),
    }
    .and_then(|_| out.flush())
    .with_context(|| format!("writing {shown}"))?;
    Ok(())
}

fn omega_grid(cfg: &RunConfig, axis: &OmegaAxis, p: &SystemParams) -> CliResult<Vec<f64>> {
    let from_file = match &cfg.sweep {
        Some(s) if s.variable != "omega" => {
            return Err(config_err(format!("sweep variable {:?} does not apply; expected \"omega\"", s.variable)))
        }
        other => other.clone(),
    };
    let flags = axis.min.is_some() || axis.max.is_some() || axis.count.is_some() || axis.scale.is_some();
    if !flags && from_file.is_none() {
        return Ok(default_grid(p));
    }
    let base = from_file.unwrap_or(SweepSpec {
        variable: "omega".into(),
        min: 1e-4 * p.omega_m,
        max: 4.0 * p.omega_m,
        count: 400,
        scale: Scale::Log,
    });
    SweepSpec {
        min: axis.min.unwrap_or(base.min),
        max: axis.max.unwrap_or(base.max),
        count: axis.count.unwrap_or(base.count),
        scale: axis.scale.unwrap_or(base.scale),
        ..base
    }
    .grid()
}

pub fn spectrum(args: &SpectrumArgs) -> CliResult<()> {
    let cfg = RunConfig::resolve(&args.common)?;
    for m in &cfg.members {
        let grid = omega_grid(&cfg, &args.axis, &m.params)?;
        let s = BathSpectrum::compute(&m.params, &grid)?;
        emit(cfg.member_path(&m.label)?, cfg.format, |w| s.write_csv(w), || s.to_json())?;
    }
    Ok(())
}

pub fn rates(args: &RatesArgs) -> CliResult<()> {
    let cfg = RunConfig::resolve(&args.common)?;
    for m in &cfg.members {
        let grid = omega_grid(&cfg, &args.axis, &m.params)?;
        let t = RateTable::compute(&m.params, &grid, args.allow_gain)?;
        emit(cfg.member_path(&m.label)?, cfg.format, |w| t.write_csv(w), || t.to_json())?;
    }
    Ok(())
}

pub fn stability(args: &StabilityArgs) -> CliResult<()> {
    let cfg = RunConfig::resolve(&args.common)?;
    let gc_sweep = match &cfg.sweep {
        Some(s) if s.variable != "g_c" => {
            return Err(config_err(format!("sweep variable {:?} does not apply; expected \"g_c\"", s.variable)))
        }
        Some(s) => s.clone(),
        None => SweepSpec {
            variable: "g_c".into(),
            min: args.gc_min,
            max: args.gc_max,
            count: args.gc_count,
            scale: Scale::Lin,
        },
    };
    let g_c = gc_sweep.grid()?;
    let axis = match args.axis {
        AxisArg::GA => MapAxis::GA,
        AxisArg::DeltaA => MapAxis::DeltaA,
    };
    for m in &cfg.members {
        let ys = if !args.y_values.is_empty() {
            args.y_values.clone()
        } else {
            let (lo, hi) = match axis {
                MapAxis::GA => (0.0, 0.6),
                MapAxis::DeltaA => (-5.0, -0.1),
            };
            SweepSpec {
                variable: axis.name().into(),
                min: args.y_min.unwrap_or(lo),
                max: args.y_max.unwrap_or(hi),
                count: args.y_count,
                scale: Scale::Lin,
            }
            .grid()?
        };
        let map = StabilityMap::compute(&m.params, &g_c, axis, &ys)?;
        emit(cfg.member_path(&m.label)?, cfg.format, |w| map.write_csv(w), || map.to_json())?;
    }
    Ok(())
}
