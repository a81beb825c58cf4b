//! `wptsim`: uncoupling distance, coupling curves, receiver sweeps,
//! baseline comparison and Touchstone ingestion from a JSON config.

// negated comparisons are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;
use wptsim::geometry::find_uncoupling_distance;
use wptsim::measurement::{best_near, ingest, max_efficiency_load, parse_touchstone};
use wptsim::sweep::{build_array_system, conventional_baseline, coupling_curve, sweep_receiver, Trace};

use config::{ConfigError, RunConfig};
use output::{line_chart, num, Series};

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "wptsim", version, about = "Multi-transmitter WPT array simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lateral offset at which two identical coils stop coupling.
    D0(Common),
    /// Coupling coefficient against lateral offset for several heights.
    CouplingCurve(Common),
    /// Currents, efficiency and loss ratios along the array.
    Sweep(Common),
    /// Proposed system against the same array without repeaters.
    Compare(Common),
    /// Loaded efficiency of a measured two-port (.s2p).
    Ingest(IngestArgs),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; tables go to stdout when neither this nor the
    /// config names one.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write SVG plots (needs an output directory).
    #[arg(long)]
    svg: bool,
}

#[derive(Args)]
struct IngestArgs {
    #[command(flatten)]
    common: Common,
    /// Touchstone file; overrides `ingest.path` in the config.
    path: Option<PathBuf>,
    /// Load resistance in ohm; overrides `load_resistance_ohm`.
    #[arg(long)]
    load_ohm: Option<f64>,
}

/// Files produced by a command, written only after everything succeeded.
struct Outputs {
    dir: Option<PathBuf>,
    svg: bool,
    files: Vec<(String, String)>,
    /// Printed when there is no output directory.
    stdout: Option<String>,
}

impl Outputs {
    fn new(common: &Common, cfg: &RunConfig) -> Result<Self, ConfigError> {
        let dir = common.out.clone().or_else(|| cfg.output.dir.clone());
        let svg = common.svg || cfg.output.svg;
        if svg && dir.is_none() {
            return Err(ConfigError::Invalid("--svg needs an output directory".into()));
        }
        Ok(Outputs { dir, svg, files: Vec::new(), stdout: None })
    }

    fn table(&mut self, name: &str, body: String) {
        if self.dir.is_none() && self.stdout.is_none() {
            self.stdout = Some(body.clone());
        }
        self.files.push((name.into(), body));
    }

    fn plot(&mut self, name: &str, body: impl FnOnce() -> String) {
        if self.svg {
            self.files.push((name.into(), body()));
        }
    }

    fn flush(self) -> Result<()> {
        match self.dir {
            Some(dir) => {
                fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
                for (name, body) in self.files {
                    let path = dir.join(&name);
                    fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
                    info!("wrote {}", path.display());
                }
            }
            None => {
                if let Some(s) = self.stdout {
                    print!("{s}");
                }
            }
        }
        Ok(())
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, ConfigError> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn cmd_d0(c: &Common) -> Result<()> {
    let cfg = load_config(c.config.as_deref())?;
    let coil = cfg.coil()?;
    let gap = cfg.axial_gap()?;
    let mut out = Outputs::new(c, &cfg)?;
    let start = Instant::now();
    let d = find_uncoupling_distance(&coil, gap)?;
    let elapsed = start.elapsed().as_secs_f64();
    let report = format!(
        "d0_mm,axial_gap_mm,bracket_lo_mm,bracket_hi_mm,m_lo_h,m_hi_h,iterations,evaluations\n{},{},{},{},{},{},{},{}\n",
        num(d.distance * 1e3),
        num(d.axial_gap * 1e3),
        num(d.bracket.0 * 1e3),
        num(d.bracket.1 * 1e3),
        num(d.mutual_at_bracket.0),
        num(d.mutual_at_bracket.1),
        d.iterations,
        d.evaluations
    );
    eprintln!(
        "uncoupling distance {:.4} mm at axial gap {:.3} mm ({} iterations, {} evaluations, {:.2} s)",
        d.distance * 1e3,
        gap * 1e3,
        d.iterations,
        d.evaluations,
        elapsed
    );
    out.table("d0.csv", report);
    out.flush()
}

fn cmd_coupling_curve(c: &Common) -> Result<()> {
    let cfg = load_config(c.config.as_deref())?;
    let coil = cfg.coil()?;
    let (offsets, zs) = cfg.curve()?;
    let mut out = Outputs::new(c, &cfg)?;
    let k = zs.iter().map(|&z| coupling_curve(&coil, z, &offsets)).collect::<wptsim::Result<Vec<_>>>()?;
    out.table("coupling_curve.csv", output::curve_csv(&zs, &offsets, &k));
    out.plot("coupling_curve.svg", || {
        let x: Vec<f64> = offsets.iter().map(|y| y * 1e3).collect();
        let series: Vec<Series> = zs.iter().zip(&k).map(|(z, kz)| Series::new(format!("z = {} mm", z * 1e3), &x, kz)).collect();
        line_chart("Coupling coefficient vs lateral offset", "offset (mm)", "k", &series)
    });
    out.flush()
}

fn cmd_sweep(c: &Common) -> Result<()> {
    let cfg = load_config(c.config.as_deref())?;
    let layout = cfg.layout()?;
    let electrical = cfg.electrical()?;
    let spec = cfg.sweep_spec()?;
    let mut out = Outputs::new(c, &cfg)?;
    let r = sweep_receiver(&build_array_system(&layout, &electrical)?, &spec)?;
    eprintln!(
        "efficiency {:.4} .. {:.4} (spread {:.2} pp); input current variation {:.3}; Rx current variation {:.3}",
        r.efficiencies().iter().cloned().fold(f64::INFINITY, f64::min),
        r.efficiencies().iter().cloned().fold(0.0, f64::max),
        100.0 * r.efficiency_spread(),
        r.relative_variation(Trace::Input),
        r.relative_variation(Trace::Rx)
    );
    out.table("sweep.csv", output::sweep_csv(&r));
    out.plot("sweep_currents.svg", || {
        line_chart("Coil currents", "y / d0", "current (normalized)", &output::sweep_series(&r, "", false))
    });
    out.plot("sweep_efficiency.svg", || {
        let x: Vec<f64> = r.rows.iter().map(|row| row.y_over_d0).collect();
        let col = |f: fn(&wptsim::sweep::SweepRow) -> f64| r.rows.iter().map(f).collect::<Vec<_>>();
        let series = [
            Series::new("eta", &x, &col(|row| row.efficiency)),
            Series::new("xi_tx", &x, &col(|row| row.xi_tx)),
            Series::new("xi_rp", &x, &col(|row| row.xi_rp)),
            Series::new("xi_rx", &x, &col(|row| row.xi_rx)),
        ];
        line_chart("Efficiency and loss ratios", "y / d0", "", &series)
    });
    out.flush()
}

fn cmd_compare(c: &Common) -> Result<()> {
    let cfg = load_config(c.config.as_deref())?;
    let layout = cfg.layout()?;
    let electrical = cfg.electrical()?;
    let spec = cfg.sweep_spec()?;
    let mut out = Outputs::new(c, &cfg)?;
    let proposed = sweep_receiver(&build_array_system(&layout, &electrical)?, &spec)?;
    let conventional = conventional_baseline(&layout, &electrical, &spec)?;
    let (vp, vc) = (proposed.relative_variation(Trace::Rx), conventional.relative_variation(Trace::Rx));
    eprintln!(
        "Rx current variation: proposed {vp:.3}, conventional {vc:.3}; max efficiency: proposed {:.4}, conventional {:.4}",
        proposed.efficiencies().iter().cloned().fold(0.0, f64::max),
        conventional.efficiencies().iter().cloned().fold(0.0, f64::max)
    );
    out.table("compare.csv", output::compare_csv(&proposed, &conventional));
    out.plot("compare.svg", || {
        let x: Vec<f64> = proposed.rows.iter().map(|row| row.y_over_d0).collect();
        let series = [
            Series::new("eta", &x, &proposed.efficiencies()),
            Series::new("eta conv.", &x, &conventional.efficiencies()).dashed(),
            Series::new("I_rx", &x, &proposed.normalized(Trace::Rx)),
            Series::new("I_rx conv.", &x, &conventional.normalized(Trace::Rx)).dashed(),
        ];
        line_chart("Proposed vs conventional", "y / d0", "", &series)
    });
    out.flush()
}

fn cmd_ingest(a: &IngestArgs) -> Result<()> {
    let cfg = load_config(a.common.config.as_deref())?;
    let path = a
        .path
        .clone()
        .or_else(|| cfg.ingest.path.clone())
        .ok_or_else(|| ConfigError::Invalid("no Touchstone file given".into()))?;
    let r_l = a.load_ohm.unwrap_or(cfg.load_resistance_ohm);
    if !(r_l > 0.0 && r_l.is_finite()) {
        return Err(ConfigError::Invalid(format!("load resistance must be positive, got {r_l}")).into());
    }
    let f0 = cfg.frequency_hz()?;
    let window = cfg.ingest_window()?;
    let mut out = Outputs::new(&a.common, &cfg)?;
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let records = parse_touchstone(&text)?;
    let rows = ingest(&records, r_l)?;
    match best_near(&rows, f0, window) {
        Some(b) => {
            let rec = records.iter().find(|r| r.frequency == b.frequency).expect("row comes from a record");
            let opt = max_efficiency_load(rec, 1e-3, 1e4)?;
            eprintln!(
                "best efficiency within +-{:.1}% of {:.4} MHz: {:.4} at {:.6} MHz (R_L = {} ohm); optimum load there {:.4} ohm gives {:.4}",
                window * 100.0,
                f0 * 1e-6,
                b.eta,
                b.frequency * 1e-6,
                r_l,
                opt.load_resistance,
                opt.eta
            );
        }
        None => eprintln!("no data within +-{:.1}% of {:.4} MHz", window * 100.0, f0 * 1e-6),
    }
    out.table("ingest.csv", output::ingest_csv(&rows));
    out.plot("ingest.svg", || {
        let x: Vec<f64> = rows.iter().map(|r| r.frequency * 1e-6).collect();
        let eta: Vec<f64> = rows.iter().map(|r| r.eta).collect();
        line_chart("Loaded efficiency", "frequency (MHz)", "eta", &[Series::new("eta", &x, &eta)])
    });
    out.flush()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return EXIT_VALIDATION;
    }
    if let Some(e) = err.downcast_ref::<wptsim::Error>() {
        return if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_VALIDATION };
    }
    1
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::D0(c) => cmd_d0(c),
        Command::CouplingCurve(c) => cmd_coupling_curve(c),
        Command::Sweep(c) => cmd_sweep(c),
        Command::Compare(c) => cmd_compare(c),
        Command::Ingest(a) => cmd_ingest(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
