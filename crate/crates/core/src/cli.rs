//! The `wfslab` command line.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or config error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{export_analysis, ExportOptions, KnnAttribution};
use crate::config::{ConfigError, SimulationConfig};
use crate::geometry::{at_height, P3};
use crate::logging::read_cohort;
use crate::osc::{
    encode, hex_dump, parse_endpoint, AddressSchema, OscError, OscMessage, OscSender,
    PositionCommand, TrajectoryCommand,
};
use crate::session::{participant_id, run_cohort, save_plan, System};
use crate::wavefield::{
    classify_source, driving_functions, error_map, write_error_map_csv, write_speaker_listing_csv,
    RenderMode,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "wfslab",
    version,
    about = "Simulated WFS vs. stereo localization lab"
)]
pub struct Cli {
    /// Config file (`[section]` + `key = value`).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base seed; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CohortArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub participants: Option<usize>,
    /// Give every participant this starting system instead of the config split.
    #[arg(long, value_enum)]
    pub first_system: Option<SystemArg>,
    /// Add the four warm-up trials.
    #[arg(long)]
    pub tutorial: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SystemArg {
    Wfs,
    Stereo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Static,
    UserDependent,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write one session plan per participant.
    Generate(CohortArgs),
    /// Simulate the cohort and write its logs.
    Simulate(CohortArgs),
    /// Reconstruction-error grid and active speakers for one source.
    Field {
        #[arg(long, default_value = "field")]
        out: PathBuf,
        #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_negative_numbers = true, required = true)]
        source: Vec<f64>,
        #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_negative_numbers = true, default_values_t = [0.0, -0.5])]
        listener: Vec<f64>,
        #[arg(long, default_value_t = 600.0)]
        frequency: f64,
        #[arg(long, default_value_t = 40)]
        bins: usize,
        #[arg(long, value_enum, default_value = "both")]
        mode: ModeArg,
    },
    /// Send one OSC positioning message over UDP.
    OscSend {
        #[arg(long, default_value = "127.0.0.1:9000")]
        endpoint: String,
        /// Address mapping file (`position = ...`, `trajectory = ...`).
        #[arg(long)]
        schema: Option<PathBuf>,
        /// Literal address, overriding the schema.
        #[arg(long)]
        address: Option<String>,
        /// Print the packet as hex instead of sending it.
        #[arg(long)]
        dry_run: bool,
        #[command(subcommand)]
        message: OscCommand,
    },
    /// Export the analysis bundle for a log directory.
    Analyze {
        #[arg(long, default_value = "logs")]
        logs: PathBuf,
        #[arg(long, default_value = "analysis")]
        out: PathBuf,
        #[arg(long, default_value_t = 15)]
        k: usize,
        #[arg(long, default_value_t = 40)]
        bins: usize,
        #[arg(long, value_enum, default_value = "source")]
        attribution: AttributionArg,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AttributionArg {
    Source,
    Guess,
}

#[derive(Debug, Subcommand)]
pub enum OscCommand {
    Position {
        #[arg(long, default_value_t = 1)]
        id: u32,
        #[arg(allow_negative_numbers = true)]
        x: f64,
        #[arg(allow_negative_numbers = true)]
        y: f64,
    },
    Trajectory {
        #[arg(long, default_value_t = 1)]
        id: u32,
        #[arg(allow_negative_numbers = true)]
        x0: f64,
        #[arg(allow_negative_numbers = true)]
        y0: f64,
        #[arg(allow_negative_numbers = true)]
        x1: f64,
        #[arg(allow_negative_numbers = true)]
        y1: f64,
        duration: f64,
    },
}

/// A failed command and the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(m: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_USAGE,
            message: m.to_string(),
        }
    }

    fn runtime(m: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_FAILURE,
            message: m.to_string(),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::usage(e)
    }
}

fn load_config(cli: &Cli, args: Option<&CohortArgs>) -> Result<SimulationConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => SimulationConfig::load(p)?,
        None => SimulationConfig::default(),
    };
    let c = &mut cfg.cohort;
    if let Some(seed) = cli.seed {
        c.base_seed = seed;
    }
    if let Some(a) = args {
        if let Some(n) = a.participants {
            c.participants = n;
            c.wfs_first = c.wfs_first.min(n);
        }
        match a.first_system {
            Some(SystemArg::Wfs) => c.wfs_first = c.participants,
            Some(SystemArg::Stereo) => c.wfs_first = 0,
            None => {}
        }
        if a.tutorial {
            c.session.tutorial = true;
        }
        if let Some(out) = &a.out {
            cfg.out_dir = Some(out.clone());
        }
    }
    cfg.validate().map_err(CliError::usage)?;
    Ok(cfg)
}

fn out_dir(cfg: &SimulationConfig, fallback: &str) -> PathBuf {
    cfg.out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(fallback))
}

fn cmd_generate(cfg: &SimulationConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let dir = out_dir(cfg, "sessions");
    fs::create_dir_all(&dir).map_err(CliError::runtime)?;
    let c = &cfg.cohort;
    for i in 0..c.participants {
        let plan = c.plan(i).map_err(CliError::runtime)?;
        let path = dir.join(format!("{}_{}.csv", participant_id(i), plan.seed));
        save_plan(&plan, &path).map_err(CliError::runtime)?;
        let _ = writeln!(
            out,
            "{} seed={} first={} trials={} -> {}",
            plan.participant_id,
            plan.seed,
            plan.first_system,
            plan.trials.len(),
            path.display()
        );
    }
    Ok(())
}

fn fmt_score(s: Option<f64>) -> String {
    s.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into())
}

fn cmd_simulate(cfg: &SimulationConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let dir = out_dir(cfg, "logs");
    let summaries = run_cohort(&cfg.cohort, &dir).map_err(CliError::runtime)?;
    for s in summaries {
        let _ = writeln!(
            out,
            "{} seed={} first={} trials={} wfs={} stereo={} -> {}",
            s.participant,
            s.seed,
            s.first_system,
            s.trials,
            fmt_score(s.mean_score_wfs),
            fmt_score(s.mean_score_stereo),
            s.dir.display()
        );
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_field(
    cfg: &SimulationConfig,
    dir: &Path,
    source: &[f64],
    listener: &[f64],
    frequency: f64,
    bins: usize,
    mode: ModeArg,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let s = &cfg.cohort.session;
    let array = s.array().map_err(CliError::usage)?;
    let h = s.geometry.height;
    let src = classify_source(P3::new(source[0], source[1], h), &array);
    let listener = at_height(&crate::geometry::P2::new(listener[0], listener[1]), h);
    if !(frequency > 0.0) || bins == 0 {
        return Err(CliError::usage("frequency and bins must be positive"));
    }
    let modes: &[(RenderMode, &str)] = match mode {
        ModeArg::Static => &[(RenderMode::Static, "static")],
        ModeArg::UserDependent => &[(RenderMode::UserDependent, "user_dependent")],
        ModeArg::Both => &[
            (RenderMode::Static, "static"),
            (RenderMode::UserDependent, "user_dependent"),
        ],
    };
    fs::create_dir_all(dir).map_err(CliError::runtime)?;
    // keep the grid a little off the speaker line
    let bounds = s.geometry.area.shrink(s.geometry.source_margin);
    for &(m, label) in modes {
        let driving = driving_functions(&src, &array, Some(&listener), m, &s.render)
            .map_err(CliError::usage)?;
        let map = error_map(
            &src,
            &array,
            &driving,
            bounds,
            bins,
            bins,
            frequency,
            s.render.speed_of_sound,
        )
        .map_err(CliError::usage)?;
        let mut buf = Vec::new();
        write_error_map_csv(&map, label, &mut buf).map_err(CliError::runtime)?;
        let err_path = dir.join(format!("error_{label}.csv"));
        fs::write(&err_path, buf).map_err(CliError::runtime)?;
        let mut buf = Vec::new();
        write_speaker_listing_csv(&driving, &array, &mut buf).map_err(CliError::runtime)?;
        fs::write(dir.join(format!("speakers_{label}.csv")), buf).map_err(CliError::runtime)?;
        let _ = writeln!(
            out,
            "{label}: {:?} source, {} active speakers, error={:.4} -> {}",
            src.kind,
            driving.active_count(),
            map.error,
            err_path.display()
        );
    }
    Ok(())
}

fn osc_message(
    schema: &Option<PathBuf>,
    address: &Option<String>,
    cmd: &OscCommand,
) -> Result<OscMessage, CliError> {
    let mut schema = match schema {
        Some(p) => AddressSchema::load(p).map_err(CliError::usage)?,
        None => AddressSchema::default(),
    };
    if let Some(a) = address {
        schema.position = a.clone();
        schema.trajectory = a.clone();
    }
    match *cmd {
        OscCommand::Position { id, x, y } => schema.position_message(&PositionCommand {
            source_id: id,
            x,
            y,
        }),
        OscCommand::Trajectory {
            id,
            x0,
            y0,
            x1,
            y1,
            duration,
        } => schema.trajectory_message(&TrajectoryCommand {
            source_id: id,
            start: (x0, y0),
            end: (x1, y1),
            duration,
        }),
    }
    .map_err(CliError::usage)
}

fn cmd_osc_send(
    endpoint: &str,
    msg: &OscMessage,
    dry_run: bool,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let bytes = encode(msg).map_err(CliError::usage)?;
    if dry_run {
        let _ = writeln!(out, "{} ({} bytes)", msg.address, bytes.len());
        let _ = writeln!(out, "{}", hex_dump(&bytes));
        return Ok(());
    }
    let target = parse_endpoint(endpoint).map_err(CliError::usage)?;
    let sent = OscSender::connect(target)
        .and_then(|s| s.send(msg))
        .map_err(|e: OscError| CliError::runtime(e))?;
    let _ = writeln!(out, "sent {sent} bytes to {target} ({})", msg.address);
    Ok(())
}

fn cmd_analyze(
    logs: &Path,
    dir: &Path,
    opts: &ExportOptions,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let sessions = read_cohort(logs).map_err(CliError::runtime)?;
    if sessions.is_empty() {
        return Err(CliError::runtime(format!(
            "no session logs under {}",
            logs.display()
        )));
    }
    let manifest = export_analysis(&sessions, dir, opts).map_err(CliError::runtime)?;
    let trials: usize = sessions.iter().map(|s| s.trials.len()).sum();
    let wfs_first = sessions
        .iter()
        .filter(|s| s.first_system() == Some(System::Wfs))
        .count();
    let _ = writeln!(
        out,
        "{} sessions ({wfs_first} WFS-first), {trials} trials -> {}",
        sessions.len(),
        manifest.display()
    );
    Ok(())
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Generate(a) => cmd_generate(&load_config(cli, Some(a))?, out),
        Command::Simulate(a) => cmd_simulate(&load_config(cli, Some(a))?, out),
        Command::Field {
            out: dir,
            source,
            listener,
            frequency,
            bins,
            mode,
        } => {
            let cfg = load_config(cli, None)?;
            cmd_field(&cfg, dir, source, listener, *frequency, *bins, *mode, out)
        }
        Command::OscSend {
            endpoint,
            schema,
            address,
            dry_run,
            message,
        } => {
            let msg = osc_message(schema, address, message)?;
            cmd_osc_send(endpoint, &msg, *dry_run, out)
        }
        Command::Analyze {
            logs,
            out: dir,
            k,
            bins,
            attribution,
        } => {
            if *k == 0 || *bins == 0 {
                return Err(CliError::usage("--k and --bins must be ≥ 1"));
            }
            let opts = ExportOptions {
                k: *k,
                bins: *bins,
                attribution: match attribution {
                    AttributionArg::Source => KnnAttribution::Source,
                    AttributionArg::Guess => KnnAttribution::Guess,
                },
                ..ExportOptions::default()
            };
            cmd_analyze(logs, dir, &opts, out)
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Errors go to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}
