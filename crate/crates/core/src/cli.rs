//! Command-line front end for the `odo` binary.
//!
//! Commands write to caller-supplied sinks and return the process exit code,
//! so they can be driven from tests without spawning a process.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::OdoConfig;
use crate::encoder::{phase, PhaseCode};
use crate::fixture::{self, parse_fixture, replay_init, write_fixture};
use crate::harness::{gen_valid_sequence, inject_faults, trace_from_profile, FaultKind, FaultSpec};
use crate::kinematics::{check_no_loss, default_grid, is_normally_behaved, MotionProfile};
use crate::odometer::{mk_init, odo_step, OdoInput, OdoOutput};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const CONFIG_HELP: &str = "\
CONFIG FILE (--config PATH, JSON; keys not given keep the command's default):
  key                    replay default   simulate/check-sampling default
  tpw                    100              100
  wheel_diameter_m       0.9              0.9
  n_avg                  10               10
  sampling_interval_s    0.01             0.01
  speed_max_mps          0.4              0.4
  accel_max_mps2         1.0              1.0
  delta_s_res_approx_mm  [26, 5]          [4712389, 1000000]
  speed_scale            [15, 4]          \"derived\"
  fitted                 true             false
Rationals are written [numerator, denominator]. Unknown keys are rejected.

PROFILE SPEC (--profile PATH or inline JSON), one of:
  {\"kind\":\"polynomial\",\"coeffs\":[a1,a2,a3]}
  {\"kind\":\"trapezoid\",\"accel_mps2\":a,\"cruise_speed_mps\":v,\"cruise_duration_s\":h,\"decel_mps2\":d}
  {\"kind\":\"sinusoidal\",\"mean_speed_mps\":v,\"amplitude_mps\":u,\"period_s\":p}
  {\"kind\":\"piecewise\",\"segments\":[{\"duration_s\":d,\"profile\":{...}}, ...]}

EXIT CODES: 0 success, 1 check failed / invalid final state, 2 usage error.";

#[derive(Debug, Parser)]
#[command(name = "odo", version, about = "Shaft-encoder odometer replay, simulation and checks", after_help = CONFIG_HELP)]
pub struct Cli {
    /// JSON config file overriding the built-in defaults.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Feed phase indices (1..6) through the odometer and print one line per step.
    Replay(ReplayArgs),
    /// Sample a motion profile, run the odometer on it and write a CSV trace.
    Simulate(SimulateArgs),
    /// Check that sampling at finer intervals loses no code against the configured one.
    CheckSampling(CheckSamplingArgs),
    /// Generate a valid encoder fixture, optionally with injected faults.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Phase indices 1..6.
    #[arg(value_name = "CODE")]
    pub codes: Vec<String>,
    /// Read codes from a fixture file instead (`-` for stdin).
    #[arg(long, value_name = "PATH", conflicts_with = "codes")]
    pub fixture: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Profile JSON file, or an inline JSON object.
    #[arg(long)]
    pub profile: String,
    /// Number of samples.
    #[arg(long)]
    pub horizon: usize,
    /// Output CSV path; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// One-based initial encoder position.
    #[arg(long, default_value_t = 1)]
    pub init: u64,
    /// Assert the marker input at the first sample at or after this time (s).
    #[arg(long = "marker-at", value_name = "SECONDS")]
    pub marker_at: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct CheckSamplingArgs {
    /// Profile JSON file, or an inline JSON object.
    #[arg(long)]
    pub profile: String,
    /// Number of finer intervals δt/2, δt/3, … to check.
    #[arg(long, default_value_t = 4)]
    pub refine: u32,
    /// Horizon in seconds.
    #[arg(long = "horizon-s", default_value_t = 5.0)]
    pub horizon_s: f64,
    /// One-based initial encoder position.
    #[arg(long, default_value_t = 1)]
    pub init: u64,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub len: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fault to inject, as KIND@POS (e.g. skip_transition@12). Repeatable.
    #[arg(long = "fault", value_name = "KIND@POS")]
    pub faults: Vec<String>,
    /// Output path; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

/// Formats one replay step: `shaft: 1 stat: true valid: true count:0 pos:0 speed:0`.
pub fn replay_line(shaft: &str, out: &OdoOutput) -> String {
    format!(
        "shaft: {shaft} stat: {} valid: {} count:{} pos:{} speed:{}",
        out.odometer_status,
        out.odometric_position_valid,
        out.odometric_position_count,
        out.relative_position,
        out.speed
    )
}

/// Replays `codes` from the row of the first code; returns the printed lines
/// and whether the final state has both status and validity.
pub fn replay(codes: &[PhaseCode], config: &OdoConfig) -> (Vec<String>, bool) {
    let mut state = mk_init(replay_init(codes), config);
    let mut lines = Vec::with_capacity(codes.len());
    for &code in codes {
        let (out, next) = odo_step(OdoInput::encoder(code), &state, config).expect("odo_step is total");
        lines.push(replay_line(&fixture::token(code), &out));
        state = next;
    }
    (lines, state.odometer_status && state.odometric_position_valid)
}

pub const CSV_HEADER: &str =
    "n,t_s,c1,c2,c3,status,valid,count,timestamp,rel_pos_mm,speed_u,accel_u,jerk_u,true_pos_m,true_speed_mps";

struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

fn fail(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_FAIL, message: message.into() }
}

/// Runs a parsed command line. Diagnostics go to `err`.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Replay(a) => {
            load_config(cli.config.as_deref(), OdoConfig::transcript_default()).and_then(|c| cmd_replay(a, &c, out))
        }
        Command::Simulate(a) => {
            load_config(cli.config.as_deref(), OdoConfig::physical_default()).and_then(|c| cmd_simulate(a, &c, out))
        }
        Command::CheckSampling(a) => load_config(cli.config.as_deref(), OdoConfig::physical_default())
            .and_then(|c| cmd_check_sampling(a, &c, out)),
        Command::Gen(a) => cmd_gen(a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "odo: {}", f.message);
            f.code
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli, out, err),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            code
        }
    }
}

fn load_config(path: Option<&Path>, base: OdoConfig) -> Result<OdoConfig, Failure> {
    match path {
        None => Ok(base),
        Some(p) => {
            let text = read_input(p)?;
            OdoConfig::from_json_over(&text, &base).map_err(|e| usage(format!("{}: {e}", p.display())))
        }
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| usage(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
    }
}

fn write_output(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| fail(format!("{}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(|e| fail(format!("stdout: {e}"))),
    }
}

fn load_profile(spec: &str) -> Result<MotionProfile, Failure> {
    let text = if spec.trim_start().starts_with('{') { spec.to_string() } else { read_input(Path::new(spec))? };
    serde_json::from_str(&text).map_err(|e| usage(format!("profile: {e}")))
}

fn cmd_replay(args: &ReplayArgs, config: &OdoConfig, out: &mut dyn Write) -> Result<i32, Failure> {
    let codes = match &args.fixture {
        Some(path) => parse_fixture(&read_input(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?,
        None => args
            .codes
            .iter()
            .map(|s| match s.parse::<u64>() {
                Ok(i) if (1..=6).contains(&i) => Ok(phase(i)),
                _ => Err(usage(format!("invalid code `{s}`: expected a phase index 1..6"))),
            })
            .collect::<Result<Vec<_>, _>>()?,
    };
    if codes.is_empty() {
        return Err(usage("no codes given"));
    }
    let (lines, ok) = replay(&codes, config);
    let mut text = String::new();
    for l in lines {
        let _ = writeln!(text, "{l}");
    }
    write_output(None, &text, out)?;
    Ok(if ok { EXIT_OK } else { EXIT_FAIL })
}

fn bit(b: bool) -> u8 {
    b as u8
}

fn cmd_simulate(args: &SimulateArgs, config: &OdoConfig, out: &mut dyn Write) -> Result<i32, Failure> {
    let profile = load_profile(&args.profile)?;
    if args.horizon == 0 {
        return Err(usage("--horizon must be at least 1"));
    }
    let trace = trace_from_profile(&profile, config, args.init, args.horizon).map_err(|e| fail(e.to_string()))?;
    let dt = config.sampling_interval_f64();
    let marker_steps: Vec<usize> = args.marker_at.iter().map(|&t| (t / dt - 1e-9).ceil().max(0.0) as usize).collect();

    let mut state = mk_init(trace.init_index, config);
    let mut text = String::from(CSV_HEADER);
    text.push('\n');
    for (n, &code) in trace.codes.iter().enumerate() {
        let input = OdoInput { encoder: code, marker: marker_steps.contains(&n) };
        let (o, next) = odo_step(input, &state, config).expect("odo_step is total");
        state = next;
        let t = n as f64 * dt;
        let _ = writeln!(
            text,
            "{n},{t:.2},{},{},{},{},{},{},{},{},{},{},{},{:.6},{:.6}",
            bit(code.c1),
            bit(code.c2),
            bit(code.c3),
            o.odometer_status,
            o.odometric_position_valid,
            o.odometric_position_count,
            o.odometric_position_timestamp,
            o.relative_position,
            o.speed,
            o.acceleration,
            o.jerk,
            profile.distance(t),
            profile.speed(t),
        );
    }
    write_output(args.out.as_deref(), &text, out)?;
    Ok(EXIT_OK)
}

fn cmd_check_sampling(args: &CheckSamplingArgs, config: &OdoConfig, out: &mut dyn Write) -> Result<i32, Failure> {
    let profile = load_profile(&args.profile)?;
    if args.init == 0 {
        return Err(usage("--init must be at least 1"));
    }
    if !(args.horizon_s.is_finite() && args.horizon_s > 0.0) {
        return Err(usage("--horizon-s must be positive"));
    }
    let mut text = String::new();
    let grid = default_grid(config, args.horizon_s, 10);
    let admissible = is_normally_behaved(&profile, config, &grid);
    if let Some(v) = admissible.violations.first() {
        let _ = writeln!(text, "warning: profile not normally behaved at t={:.4} s ({:?})", v.t, v.kind);
    }
    let report = check_no_loss(&profile, config, args.init, args.horizon_s, args.refine);
    let _ = writeln!(
        text,
        "hypothesis dt*speed_max < ds_res: {} ({:.6} m vs {:.6} m)",
        report.hypothesis_holds,
        config.sampling_interval_f64() * config.speed_max_mps,
        config.delta_s_res_m()
    );
    for r in &report.refinements {
        match &r.outcome {
            Ok(f) => {
                let _ = writeln!(text, "dt={:.6} s (1/{}): pass, {} samples retract", r.dt_s, r.divisor, f.len());
            }
            Err(loss) => {
                let _ = writeln!(
                    text,
                    "dt={:.6} s (1/{}): FAIL, code {} lost at fine index {} (t={:.6} s)",
                    r.dt_s,
                    r.divisor,
                    loss.code,
                    loss.fine_index,
                    r.lost_at_s().unwrap_or_default()
                );
            }
        }
    }
    write_output(None, &text, out)?;
    Ok(if report.all_passed() { EXIT_OK } else { EXIT_FAIL })
}

fn parse_fault(s: &str) -> Result<(FaultKind, usize), Failure> {
    let (kind, pos) = s.split_once('@').ok_or_else(|| usage(format!("fault `{s}` is not KIND@POS")))?;
    let kind = kind.parse::<FaultKind>().map_err(usage)?;
    let pos = pos.parse::<usize>().map_err(|_| usage(format!("fault position `{pos}` is not a number")))?;
    Ok((kind, pos))
}

fn cmd_gen(args: &GenArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    if args.len == 0 {
        return Err(usage("--len must be at least 1"));
    }
    let mut trace = gen_valid_sequence(args.len, args.seed);
    let mut comments = vec![format!("gen len={} seed={} init={}", args.len, args.seed, trace.init_index)];
    for f in &args.faults {
        let (kind, pos) = parse_fault(f)?;
        trace = inject_faults(&trace, &FaultSpec::new(kind, [pos])).map_err(|e| usage(e.to_string()))?;
        comments.push(format!("fault {kind}@{pos}"));
    }
    write_output(args.out.as_deref(), &write_fixture(&trace.codes, &comments), out)?;
    Ok(EXIT_OK)
}
