//! The `slipstroke` command line: `speeds`, `schedule`, `simulate`, `plan`, `run`, `analyze`.
//!
//! Values come from flags first, then the config file, then built-in defaults.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{ConfigError, DeviceConfig};
use crate::kinematics::{
    cm_per_s_1dp, speed_summary, speed_table, study_angular_velocities, write_speed_csv,
    ActuationParams, AngularVelocity, KinematicsError, SpeedCell, TactorGeometry,
    STUDY_DELAY_FRACTIONS,
};
use crate::motorsim::{simulate_motor, validate_speed_cap, SimError, TrackingResult};
use crate::scheduler::{
    build_schedule_with, contact_profile, hold_schedule, ContactProfile, ScheduleError,
    TrajectorySet,
};
use crate::stream::{export_command_stream, StreamError};
use crate::study::stats::{groups_by_factor, summarize_values, Level};
use crate::study::{
    generate_plan, one_sample_t, pairwise_bonferroni, read_log, run_session, summarize,
    write_log_line, Factor, Measure, RatingRecord, StudyError, StudyId, TrialPlan,
};

/// Tracking error above which `simulate` reports failure, rad.
pub const DEFAULT_MAX_TRACKING_ERROR: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(i32)]
pub enum Exit {
    Success = 0,
    Io = 1,
    Parse = 2,
    Domain = 3,
    Instability = 4,
    TrackingFailure = 5,
}

#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub exit: Exit,
    pub message: String,
}

impl CliError {
    fn new(exit: Exit, message: impl Into<String>) -> Self {
        Self {
            exit,
            message: message.into(),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::new(Exit::Io, e.to_string())
    }
}

impl From<KinematicsError> for CliError {
    fn from(e: KinematicsError) -> Self {
        CliError::new(Exit::Domain, e.to_string())
    }
}

impl From<ScheduleError> for CliError {
    fn from(e: ScheduleError) -> Self {
        CliError::new(Exit::Domain, e.to_string())
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        let exit = match e {
            ConfigError::Io { .. } => Exit::Io,
            ConfigError::Kinematics(_) => Exit::Domain,
            _ => Exit::Parse,
        };
        CliError::new(exit, e.to_string())
    }
}

impl From<StreamError> for CliError {
    fn from(e: StreamError) -> Self {
        let exit = match e {
            StreamError::Io { .. } => Exit::Io,
            _ => Exit::Parse,
        };
        CliError::new(exit, e.to_string())
    }
}

impl From<StudyError> for CliError {
    fn from(e: StudyError) -> Self {
        let exit = match e {
            StudyError::Io(_) | StudyError::InputClosed => Exit::Io,
            _ => Exit::Parse,
        };
        CliError::new(exit, e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        let exit = match e {
            SimError::Instability { .. } => Exit::Instability,
            _ => Exit::Domain,
        };
        CliError::new(exit, e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "slipstroke",
    version,
    about = "Sequential skin-slip stroke renderer and study tools"
)]
pub struct Cli {
    /// Device config (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate apparent speeds over angular velocities × delays.
    Speeds(SpeedsArgs),
    /// Build a stroke schedule, print its contact summary, optionally export the command stream.
    Schedule(ScheduleArgs),
    /// Track every motor's reference with the simulated PID loop.
    Simulate(SimulateArgs),
    /// Write a randomized trial plan.
    Plan(PlanArgs),
    /// Replay a plan and collect ratings from standard input.
    Run(RunArgs),
    /// Summaries, t-tests and Bonferroni comparisons for rating logs.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
pub struct SpeedsArgs {
    /// Comma-separated angular velocities, e.g. `2pi,4pi/3,pi` (default: the five study values).
    #[arg(long)]
    pub omegas: Option<String>,
    /// Comma-separated delay fractions (default: 0,0.05,…,0.25).
    #[arg(long)]
    pub delays: Option<String>,
    #[arg(long)]
    pub tactors: Option<usize>,
    /// Comma-separated spacings in mm.
    #[arg(long)]
    pub spacing: Option<String>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct StrokeArgs {
    #[arg(long)]
    pub omega: Option<AngularVelocity>,
    #[arg(long)]
    pub delay: Option<f64>,
    #[arg(long)]
    pub tactors: Option<usize>,
    #[arg(long)]
    pub spacing: Option<f64>,
    #[arg(long)]
    pub tick_rate: Option<f64>,
    /// Keep every motor at rest instead of running the stroke.
    #[arg(long)]
    pub hold_only: bool,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    #[command(flatten)]
    pub stroke: StrokeArgs,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub stroke: StrokeArgs,
    #[arg(long)]
    pub kp: Option<f64>,
    #[arg(long)]
    pub ki: Option<f64>,
    #[arg(long)]
    pub kd: Option<f64>,
    /// Max |error| in rad before the run counts as a tracking failure.
    #[arg(long, default_value_t = DEFAULT_MAX_TRACKING_ERROR)]
    pub max_error: f64,
    /// Write the command stream with tracking columns.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub study: u8,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub participant: u32,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub plan: PathBuf,
    /// Rating log to append to.
    #[arg(long)]
    pub log: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// One or more rating logs.
    #[arg(required = true)]
    pub logs: Vec<PathBuf>,
}

/// Parses `args` and runs the command. Returns the process exit status.
pub fn run<I, T, R, W, E>(args: I, stdin: &mut R, stdout: &mut W, stderr: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
    R: BufRead,
    W: Write,
    E: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let exit = if e.use_stderr() {
                Exit::Parse
            } else {
                Exit::Success
            };
            let _ = write!(
                if e.use_stderr() {
                    stderr as &mut dyn Write
                } else {
                    stdout
                },
                "{e}"
            );
            return exit as i32;
        }
    };
    match dispatch(&cli, stdin, stdout) {
        Ok(exit) => exit as i32,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.exit as i32
        }
    }
}

fn dispatch<R: BufRead, W: Write>(cli: &Cli, stdin: &mut R, out: &mut W) -> Result<Exit, CliError> {
    let config = match &cli.config {
        Some(path) => DeviceConfig::load(path)?,
        None => DeviceConfig::default(),
    };
    match &cli.command {
        Command::Speeds(a) => cmd_speeds(&config, a, out),
        Command::Schedule(a) => cmd_schedule(&config, a, out),
        Command::Simulate(a) => cmd_simulate(&config, a, out),
        Command::Plan(a) => cmd_plan(&config, a, out),
        Command::Run(a) => cmd_run(&config, a, stdin, out),
        Command::Analyze(a) => cmd_analyze(a, out),
    }
}

fn provenance(config: &DeviceConfig, seed: Option<u64>) -> String {
    format!(
        "slipstroke {} config_hash={} seed={}",
        env!("CARGO_PKG_VERSION"),
        config.hash(),
        seed.map_or_else(|| "none".to_string(), |s| s.to_string())
    )
}

fn parse_list<T>(
    text: &str,
    what: &str,
    parse: impl Fn(&str) -> Option<T>,
) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(str::trim)
        .map(|tok| {
            parse(tok)
                .ok_or_else(|| CliError::new(Exit::Parse, format!("invalid {what} token {tok:?}")))
        })
        .collect()
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::new(Exit::Io, format!("{}: {e}", path.display())))
}

pub fn cmd_speeds<W: Write>(
    config: &DeviceConfig,
    args: &SpeedsArgs,
    out: &mut W,
) -> Result<Exit, CliError> {
    let geometry = config.geometry()?;
    let omegas = match &args.omegas {
        Some(s) => parse_list(s, "angular velocity", |t| t.parse().ok())?,
        None => study_angular_velocities().to_vec(),
    };
    let delays = match &args.delays {
        Some(s) => parse_list(s, "delay fraction", |t| {
            t.parse::<f64>().ok().filter(|d| (0.0..=1.0).contains(d))
        })?,
        None => STUDY_DELAY_FRACTIONS.to_vec(),
    };
    let spacings = match &args.spacing {
        Some(s) => parse_list(s, "spacing", |t| {
            t.parse::<f64>().ok().filter(|v| *v >= 0.0)
        })?,
        None => vec![config.actuation.spacing_mm],
    };
    let tactors = args.tactors.unwrap_or(config.actuation.tactor_count);

    let mut all: Vec<SpeedCell> = Vec::new();
    let mut csv = Vec::new();
    writeln!(csv, "# {}", provenance(config, None))?;
    for &spacing in &spacings {
        let cells = speed_table(&geometry, &omegas, &delays, tactors, spacing)?;
        writeln!(csv, "# tactor_count={tactors} spacing_mm={spacing}")?;
        write_speed_csv(&mut csv, &cells)?;
        all.extend(cells);
    }
    match &args.output {
        Some(path) => {
            let mut f = create(path)?;
            f.write_all(&csv)?;
            f.flush()?;
        }
        None => out.write_all(&csv)?,
    }
    let by_speed = |a: &&SpeedCell, b: &&SpeedCell| {
        a.summary
            .apparent_speed
            .total_cmp(&b.summary.apparent_speed)
    };
    let min = all
        .iter()
        .min_by(by_speed)
        .expect("speed table is never empty");
    let max = all
        .iter()
        .max_by(by_speed)
        .expect("speed table is never empty");
    for (name, c) in [("min", min), ("max", max)] {
        writeln!(
            out,
            "{name} apparent speed {:.1} cm/s (omega={} delay={} spacing={} mm)",
            cm_per_s_1dp(c.summary.apparent_speed),
            c.angular_velocity,
            c.delay_fraction,
            c.spacing
        )?;
    }
    Ok(Exit::Success)
}

fn stroke_from(config: &DeviceConfig, args: &StrokeArgs) -> Result<TrajectorySet, CliError> {
    let geometry = config.geometry()?;
    let a = &config.actuation;
    let params = ActuationParams::with_speed_cap(
        args.omega.unwrap_or(a.angular_velocity).value(),
        args.delay.unwrap_or(a.delay_fraction),
        args.tactors.unwrap_or(a.tactor_count),
        args.spacing.unwrap_or(a.spacing_mm),
        config.motor.speed_cap,
    )?;
    let mut options = config.schedule_options();
    if let Some(rate) = args.tick_rate {
        options.tick_rate = rate;
    }
    let schedule = if args.hold_only {
        hold_schedule(&geometry, &params, options)?
    } else {
        build_schedule_with(&geometry, &params, options)?
    };
    Ok(schedule)
}

/// Human-readable summary of a stroke: onsets, contact windows, overlap and speeds.
pub fn describe_stroke(schedule: &TrajectorySet, profile: &ContactProfile) -> String {
    use std::fmt::Write as _;
    let g = schedule.geometry();
    let p = schedule.params();
    let s = speed_summary(g, p);
    let mut text = String::new();
    let onsets: Vec<String> = schedule
        .onsets()
        .iter()
        .map(|o| format!("{o:.4}"))
        .collect();
    let _ = writeln!(text, "onsets_s: {}", onsets.join(", "));
    for e in &profile.events {
        let _ = writeln!(
            text,
            "contact motor {}: {:.4} .. {:.4} s",
            e.motor, e.contact_start, e.contact_end
        );
    }
    let _ = writeln!(text, "overlap: {}", profile.overlapping);
    let _ = writeln!(text, "v_local: {:.1} cm/s", cm_per_s_1dp(s.local_speed));
    let _ = write!(
        text,
        "v_apparent: {:.1} cm/s",
        cm_per_s_1dp(s.apparent_speed)
    );
    text
}

pub fn cmd_schedule<W: Write>(
    config: &DeviceConfig,
    args: &ScheduleArgs,
    out: &mut W,
) -> Result<Exit, CliError> {
    let schedule = stroke_from(config, &args.stroke)?;
    let profile = contact_profile(&schedule, schedule.geometry());
    writeln!(out, "{}", describe_stroke(&schedule, &profile))?;
    if let Some(path) = &args.output {
        export_command_stream(path, &schedule, &profile, None, &[provenance(config, None)])?;
        writeln!(
            out,
            "wrote {} rows to {}",
            schedule.sample_count(),
            path.display()
        )?;
    }
    Ok(Exit::Success)
}

pub fn cmd_simulate<W: Write>(
    config: &DeviceConfig,
    args: &SimulateArgs,
    out: &mut W,
) -> Result<Exit, CliError> {
    let schedule = stroke_from(config, &args.stroke)?;
    let check = validate_speed_cap(schedule.params(), &config.motor);
    writeln!(
        out,
        "speed cap: {} (margin {:.4} rad/s)",
        if check.pass { "pass" } else { "FAIL" },
        check.margin
    )?;
    let mut gains = config.pid;
    gains.kp = args.kp.unwrap_or(gains.kp);
    gains.ki = args.ki.unwrap_or(gains.ki);
    gains.kd = args.kd.unwrap_or(gains.kd);

    let mut results: Vec<TrackingResult> = Vec::with_capacity(schedule.motor_count());
    for motor in 0..schedule.motor_count() {
        let r = simulate_motor(&config.motor, &gains, &schedule, motor).map_err(|e| {
            let mut err = CliError::from(e);
            err.message = format!("motor {motor}: {}", err.message);
            err
        })?;
        writeln!(
            out,
            "motor {motor}: max_abs_error {:.6} rad, rms_error {:.6} rad, saturation {:.4}",
            r.summary.max_abs_error, r.summary.rms_error, r.summary.saturation_fraction
        )?;
        results.push(r);
    }
    if let Some(path) = &args.output {
        let profile = contact_profile(&schedule, schedule.geometry());
        export_command_stream(
            path,
            &schedule,
            &profile,
            Some(&results),
            &[provenance(config, None)],
        )?;
    }
    let worst = results
        .iter()
        .map(|r| r.summary.max_abs_error)
        .fold(0.0, f64::max);
    if worst > args.max_error {
        writeln!(
            out,
            "tracking failure: max error {worst:.6} rad exceeds {} rad",
            args.max_error
        )?;
        return Ok(Exit::TrackingFailure);
    }
    Ok(Exit::Success)
}

pub fn cmd_plan<W: Write>(
    config: &DeviceConfig,
    args: &PlanArgs,
    out: &mut W,
) -> Result<Exit, CliError> {
    let study = StudyId::try_from(args.study).map_err(|e| CliError::new(Exit::Parse, e))?;
    let plan = generate_plan(study, args.seed, args.participant);
    let mut text = format!("# {}\n", provenance(config, Some(args.seed)));
    text.push_str(&plan.to_jsonl());
    match &args.output {
        Some(path) => {
            let mut f = create(path)?;
            f.write_all(text.as_bytes())?;
            f.flush()?;
            writeln!(
                out,
                "wrote {} trials to {}",
                plan.trials.len(),
                path.display()
            )?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(Exit::Success)
}

fn describe_trial(
    geometry: &TactorGeometry,
    config: &DeviceConfig,
    trial: &crate::study::Trial,
) -> String {
    let c = &trial.condition;
    let mut head = format!(
        "omega={} delay={} N={} D={} mm",
        c.angular_velocity, c.delay_fraction, c.tactor_count, c.spacing_mm
    );
    if let Some(loc) = c.location {
        head.push_str(&format!(" location={}", loc.as_str()));
    }
    let body = c
        .params()
        .map_err(ScheduleError::from)
        .and_then(|p| build_schedule_with(geometry, &p, config.schedule_options()))
        .map(|s| describe_stroke(&s, &contact_profile(&s, geometry)))
        .unwrap_or_else(|e| format!("cannot schedule: {e}"));
    format!("{head}\n{body}")
}

pub fn cmd_run<R: BufRead, W: Write>(
    config: &DeviceConfig,
    args: &RunArgs,
    stdin: &mut R,
    out: &mut W,
) -> Result<Exit, CliError> {
    let geometry = config.geometry()?;
    let file = File::open(&args.plan)
        .map_err(|e| CliError::new(Exit::Io, format!("{}: {e}", args.plan.display())))?;
    let plan = TrialPlan::read_jsonl(BufReader::new(file)).map_err(|e| {
        let mut err = CliError::from(e);
        err.message = format!("{}: {}", args.plan.display(), err.message);
        err
    })?;
    let log_path = &args.log;
    let new_file = !log_path.exists();
    let mut log = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(log_path)
        .map_err(|e| CliError::new(Exit::Io, format!("{}: {e}", log_path.display())))?;
    if new_file {
        writeln!(log, "# {}", provenance(config, Some(plan.seed)))?;
    }
    let clock = || {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    };
    let records = run_session(
        &plan,
        stdin,
        out,
        |t| describe_trial(&geometry, config, t),
        clock,
        |r| {
            write_log_line(&mut log, r)?;
            log.flush()
        },
    )?;
    writeln!(
        out,
        "recorded {} ratings to {}",
        records.len(),
        log_path.display()
    )?;
    Ok(Exit::Success)
}

fn levels(records: &[RatingRecord], factor: Factor) -> usize {
    records
        .iter()
        .map(|r| Level::of(factor, r))
        .collect::<BTreeSet<_>>()
        .len()
}

fn measure_name(measure: Measure) -> &'static str {
    match measure {
        Measure::Continuity => "continuity",
        Measure::Pleasantness => "pleasantness",
    }
}

/// Writes the full analysis report for `records`.
pub fn write_analysis<W: Write>(records: &[RatingRecord], out: &mut W) -> Result<(), CliError> {
    let participants: BTreeSet<u32> = records.iter().map(|r| r.participant).collect();
    writeln!(
        out,
        "records: {}  participants: {}",
        records.len(),
        participants.len()
    )?;
    let factors: Vec<Factor> = [
        Factor::Delay,
        Factor::AngularVelocity,
        Factor::Location,
        Factor::Spacing,
    ]
    .into_iter()
    .filter(|&f| levels(records, f) > 1)
    .collect();

    let fmt_se = |se: Option<f64>| se.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"));
    for measure in [Measure::Continuity, Measure::Pleasantness] {
        let name = measure_name(measure);
        let overall: Vec<f64> = records.iter().map(|r| measure.of(r)).collect();
        if let Ok(s) = summarize_values(&overall) {
            writeln!(
                out,
                "\n== {name}: overall mean {:.4} se {} n {}",
                s.mean,
                fmt_se(s.std_error),
                s.n
            )?;
        }
        let mut groupings: Vec<Vec<Factor>> = factors.iter().map(|&f| vec![f]).collect();
        if factors.contains(&Factor::AngularVelocity) && factors.contains(&Factor::Delay) {
            groupings.push(vec![Factor::AngularVelocity, Factor::Delay]);
        }
        if factors.contains(&Factor::AngularVelocity) && factors.contains(&Factor::Spacing) {
            groupings.push(vec![Factor::Spacing, Factor::AngularVelocity]);
        }
        for group_by in &groupings {
            let names: Vec<&str> = group_by.iter().map(|f| f.name()).collect();
            writeln!(out, "-- {name} by {}", names.join(" x "))?;
            match summarize(records, group_by, measure) {
                Ok(groups) => {
                    for g in groups {
                        writeln!(
                            out,
                            "  {}: mean {:.4} se {} n {}",
                            g.label(),
                            g.summary.mean,
                            fmt_se(g.summary.std_error),
                            g.summary.n
                        )?;
                    }
                }
                Err(e) => writeln!(out, "  {e}")?,
            }
        }
    }

    writeln!(out, "\n== one-sample t-tests: pleasantness vs 0")?;
    for &factor in &factors {
        for group in groups_by_factor(records, factor, Measure::Pleasantness) {
            let values: Vec<f64> = records
                .iter()
                .filter(|r| Level::of(factor, r).label == group.label)
                .map(|r| Measure::Pleasantness.of(r))
                .collect();
            match one_sample_t(&values, 0.0) {
                Ok(t) => writeln!(
                    out,
                    "  {}={}: t {:.4} df {} p {:.6}",
                    factor.name(),
                    group.label,
                    t.t,
                    t.df,
                    t.p
                )?,
                Err(e) => writeln!(out, "  {}={}: {e}", factor.name(), group.label)?,
            }
        }
    }

    for measure in [Measure::Continuity, Measure::Pleasantness] {
        for &factor in &factors {
            let groups = groups_by_factor(records, factor, measure);
            writeln!(
                out,
                "\n== pairwise {} by {} (Bonferroni)",
                measure_name(measure),
                factor.name()
            )?;
            match pairwise_bonferroni(&groups) {
                Ok(matrix) => {
                    for pair in &matrix.pairs {
                        let (a, b) = (&matrix.labels[pair.a], &matrix.labels[pair.b]);
                        match &pair.outcome {
                            Ok(c) => writeln!(
                                out,
                                "  {a} vs {b} [{}]: t {:.4} df {:.2} p {:.6} adj {:.6}{}",
                                pair.method,
                                c.test.t,
                                c.test.df,
                                c.raw_p,
                                c.adjusted_p,
                                if c.significant { " *" } else { "" }
                            )?,
                            Err(e) => writeln!(out, "  {a} vs {b} [{}]: {e}", pair.method)?,
                        }
                    }
                }
                Err(e) => writeln!(out, "  {e}")?,
            }
        }
    }
    Ok(())
}

pub fn cmd_analyze<W: Write>(args: &AnalyzeArgs, out: &mut W) -> Result<Exit, CliError> {
    let mut records = Vec::new();
    for path in &args.logs {
        let file = File::open(path)
            .map_err(|e| CliError::new(Exit::Io, format!("{}: {e}", path.display())))?;
        let mut batch = read_log(BufReader::new(file)).map_err(|e| {
            let mut err = CliError::from(e);
            err.message = format!("{}: {}", path.display(), err.message);
            err
        })?;
        records.append(&mut batch);
    }
    if records.is_empty() {
        return Err(CliError::new(Exit::Parse, "rating logs contain no records"));
    }
    write_analysis(&records, out)?;
    Ok(Exit::Success)
}
