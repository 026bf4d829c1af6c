use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use celldim::dimensioning::UnicastProblem;
use celldim::sweep::{preset_points, run_sweep, to_csv, SweepRow};
use celldim::{build_layout, load_scenario, Bundle, Mode, Morphology};

mod manifest;
mod validate;

#[derive(Parser)]
#[command(name = "celldim", version, about = "Spectrum dimensioning for TV over cellular networks")]
struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dimension a single scenario.
    Dimension(DimensionArgs),
    /// Run a named sweep (fig5..fig9) and write CSV.
    Sweep(SweepArgs),
    /// Check the numerical kernels against the reference oracles.
    Validate {
        /// Larger Monte Carlo runs.
        #[arg(long)]
        thorough: bool,
    },
    /// Write layout, SINR or class tables for a scenario.
    Dump(DumpArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Broadcast,
    Hybrid,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Broadcast => Mode::BroadcastOnly,
            ModeArg::Hybrid => Mode::Hybrid,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Rural,
    Urban,
}

#[derive(Args)]
struct ScenarioArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in scenario, used when no config is given.
    #[arg(long, value_enum, default_value = "rural")]
    preset: PresetArg,
    #[arg(long, env = "CELLDIM_SEED", default_value_t = 1)]
    seed: u64,
    /// Monte Carlo samples per SINR distribution.
    #[arg(long)]
    samples: Option<usize>,
}

impl ScenarioArgs {
    fn bundle(&self) -> Result<Bundle> {
        let mut b = match &self.config {
            Some(p) => load_scenario(p).with_context(|| format!("loading {}", p.display()))?,
            None => Bundle::preset(match self.preset {
                PresetArg::Rural => Morphology::Rural,
                PresetArg::Urban => Morphology::Urban,
            }),
        };
        if let Some(n) = self.samples {
            b.numerics.samples = n;
        }
        b.validate()?;
        Ok(b)
    }
}

#[derive(Args)]
struct DimensionArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, value_enum, default_value = "hybrid")]
    mode: ModeArg,
    /// CSV output (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit 1 when the requirement exceeds the 320 MHz band.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    dump_layout: Option<PathBuf>,
    #[arg(long)]
    dump_sinr: Option<PathBuf>,
    #[arg(long)]
    dump_classes: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// fig5, fig6, fig7, fig8 or fig9.
    #[arg(long)]
    preset: String,
    /// Configuration whose `numerics` and `service` sections replace the
    /// defaults at every point.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, env = "CELLDIM_SEED", default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    strict: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum DumpWhat {
    Layout,
    Sinr,
    Classes,
}

#[derive(Args)]
struct DumpArgs {
    #[arg(value_enum)]
    what: DumpWhat,
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// For `sinr`: the regional SFN instead of the national one.
    #[arg(long)]
    regional: bool,
    /// For `classes`: unicast bandwidth per reuse colour, MHz (default:
    /// the dimensioned value).
    #[arg(long)]
    bw_uni: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            use std::io::Write;
            match std::io::stdout().lock().write_all(text.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

fn exceeds_band(rows: &[SweepRow]) -> bool {
    rows.iter().any(|r| match &r.result {
        Ok(d) => d.infeasible || d.bw_saving < 0.0,
        Err(_) => true,
    })
}

fn dimension_cmd(args: DimensionArgs) -> Result<ExitCode> {
    let bundle = args.scenario.bundle()?;
    let seed = args.scenario.seed;
    let mode: Mode = args.mode.into();
    let s = &bundle.scenario;

    if let Some(p) = &args.dump_layout {
        std::fs::write(p, build_layout(s.isd, s.interferer_rings, true).to_csv())?;
    }
    if let Some(p) = &args.dump_sinr {
        let regional = mode == Mode::Hybrid;
        let (nat, reg) = celldim::dimensioning::sfn_distributions(&bundle, seed, !regional);
        std::fs::write(p, nat.unwrap_or(reg).to_cdf_csv())?;
    }

    let start = Instant::now();
    let result = celldim::dimension(&bundle, mode, seed)?;
    let runtime = start.elapsed().as_secs_f64();

    if let Some(p) = &args.dump_classes {
        std::fs::write(p, classes_csv(&bundle, seed, result.bw_unicast / f64::from(s.reuse_k))?)?;
    }

    let axis = celldim::sweep::Axis::Isd;
    let row = SweepRow {
        series: format!("{}x{}", s.bs_antenna_count, s.rx_antenna_count),
        axis,
        axis_value: s.isd,
        mode,
        result: Ok(result),
        runtime_s: runtime,
    };
    let rows = [row];
    write_output(args.out.as_deref(), &to_csv(&rows))?;
    if let Some(out) = &args.out {
        manifest::write(out, &bundle.to_config_string(), seed, &rows)?;
    }
    Ok(if args.strict && exceeds_band(&rows) { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn classes_csv(bundle: &Bundle, seed: u64, bw_uni: f64) -> Result<String> {
    let problem = UnicastProblem::new(bundle, seed)?;
    if problem.rho_uni == 0.0 || bw_uni <= 0.0 {
        return Ok("k,family,sinr_edge_db,b_k_mhz,rho_k\n".into());
    }
    let units = (bw_uni / bundle.numerics.erlang_unit_mhz).round() as u32;
    let probe = problem.probe(units)?;
    Ok(probe.classes.map(|c| c.to_csv()).unwrap_or_else(|| "k,family,sinr_edge_db,b_k_mhz,rho_k\n".into()))
}

fn sweep_cmd(args: SweepArgs) -> Result<ExitCode> {
    let overrides = args.config.as_ref().map(load_scenario).transpose()?;
    let samples = args.samples;
    let points = preset_points(&args.preset, |b| {
        if let Some(o) = &overrides {
            b.numerics = o.numerics.clone();
            b.service = o.service.clone();
        }
        if let Some(n) = samples {
            b.numerics.samples = n;
        }
    })?;
    for p in &points {
        p.bundle.validate()?;
    }
    let rows = run_sweep(&points, args.seed);
    for r in &rows {
        if let Err(e) = &r.result {
            eprintln!("warning: {} {} {}: {e}", r.series, r.axis_value, r.mode.as_str());
        }
    }
    write_output(args.out.as_deref(), &to_csv(&rows))?;
    if let Some(out) = &args.out {
        let cfg = overrides.map(|o| o.to_config_string()).unwrap_or_default();
        manifest::write(out, &cfg, args.seed, &rows)?;
    }
    Ok(if args.strict && exceeds_band(&rows) { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn dump_cmd(args: DumpArgs) -> Result<ExitCode> {
    let bundle = args.scenario.bundle()?;
    let seed = args.scenario.seed;
    let s = &bundle.scenario;
    let text = match args.what {
        DumpWhat::Layout => build_layout(s.isd, s.interferer_rings, true).to_csv(),
        DumpWhat::Sinr => {
            let (nat, reg) = celldim::dimensioning::sfn_distributions(&bundle, seed, !args.regional);
            nat.unwrap_or(reg).to_cdf_csv()
        }
        DumpWhat::Classes => {
            let bw = match args.bw_uni {
                Some(v) if v > 0.0 => v,
                Some(v) => bail!("--bw-uni must be > 0 (got {v})"),
                None => celldim::dimension(&bundle, Mode::Hybrid, seed)?.bw_unicast / f64::from(s.reuse_k),
            };
            classes_csv(&bundle, seed, bw)?
        }
    };
    write_output(args.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global()?;
    }
    match cli.command {
        Command::Dimension(a) => dimension_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::Validate { thorough } => {
            Ok(if validate::run(thorough) { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Dump(a) => dump_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            // bad input is a usage error, anything else a run failure
            match e.downcast_ref::<celldim::Error>() {
                Some(celldim::Error::Parse { .. } | celldim::Error::Invalid(_) | celldim::Error::Io { .. }) => {
                    ExitCode::from(2)
                }
                _ => ExitCode::from(1),
            }
        }
    }
}
