//! Test-vector generation, fault injection and the empirical accuracy checks.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::config::{resolution, OdoConfig, SpeedScale};
use crate::encoder::{fold_positions, phase0, PhaseCode};
use crate::kinematics::{default_grid, is_normally_behaved, sample_trace, MotionProfile, Violation};
use crate::odometer::{mk_init, run, OdoInput, OdoOutput, OdoState};

#[derive(Debug, Error, PartialEq)]
pub enum HarnessError {
    #[error("profile is not normally behaved: {count} violation(s), first at t = {} s ({:?})", .first.t, .first.kind)]
    NotNormallyBehaved { count: usize, first: Violation },
    #[error("sampling hypothesis violated: Δt · Speed_Max = {lhs} m is not below δs_res = {delta_s_res} m")]
    SamplingUnsound { lhs: f64, delta_s_res: f64 },
    #[error("initial encoder position must be at least 1 (got {0})")]
    InitOutOfRange(u64),
    #[error("horizon of {horizon} steps is too short (need more than {min})")]
    HorizonTooShort { horizon: usize, min: usize },
    #[error("fault position {position} is outside a trace of length {len}")]
    FaultOutOfRange { position: usize, len: usize },
    #[error("speed accuracy needs a derived speed scale; the config uses a fitted one")]
    FittedScale,
}

/// Per-sample ground truth of a trace generated from a motion profile.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub profile: MotionProfile,
    pub sampling_interval_s: f64,
    pub positions_m: Vec<f64>,
    pub speeds_mps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderTrace {
    /// Table row the encoder rests on before the first sample.
    pub init_index: u64,
    pub codes: Vec<PhaseCode>,
    pub ground_truth: Option<GroundTruth>,
}

impl EncoderTrace {
    pub fn inputs(&self) -> impl Iterator<Item = OdoInput> + '_ {
        self.codes.iter().copied().map(OdoInput::encoder)
    }

    pub fn replay(&self, config: &OdoConfig) -> (Vec<OdoOutput>, OdoState) {
        run(mk_init(self.init_index, config), self.inputs(), config)
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }
}

/// 64-bit linear congruential generator (Knuth's MMIX constants):
/// `state ← state · 6364136223846793005 + 1442695040888963407 (mod 2⁶⁴)`,
/// output is the high 32 bits of the new state. The initial state is the seed.
#[derive(Debug, Clone)]
pub struct Lcg(u64);

impl Lcg {
    pub const MULTIPLIER: u64 = 6_364_136_223_846_793_005;
    pub const INCREMENT: u64 = 1_442_695_040_888_963_407;

    pub fn new(seed: u64) -> Self {
        Lcg(seed)
    }

    pub fn next_u32(&mut self) -> u32 {
        self.0 = self.0.wrapping_mul(Self::MULTIPLIER).wrapping_add(Self::INCREMENT);
        (self.0 >> 32) as u32
    }
}

/// A random walk of `length` samples on table positions, reflected at the
/// start so it never goes below it.
///
/// The first draw (mod 6) picks the initial row; sample 0 is the initial row
/// itself; every later draw (mod 3) picks a step of -1, 0 or +1, and a -1 at
/// the start becomes +1.
pub fn gen_valid_sequence(length: usize, seed: u64) -> EncoderTrace {
    let mut rng = Lcg::new(seed);
    let init = (rng.next_u32() % 6) as u64;
    let mut rel = 0u64;
    let mut codes = Vec::with_capacity(length);
    for i in 0..length {
        if i > 0 {
            rel = match rng.next_u32() % 3 {
                0 if rel == 0 => 1,
                0 => rel - 1,
                1 => rel,
                _ => rel + 1,
            };
        }
        codes.push(phase0(init + rel));
    }
    EncoderTrace { init_index: init, codes, ground_truth: None }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FaultKind {
    /// Replace the sample with `(T,T,T)`.
    ErrorCodeTtt,
    /// Replace the sample with `(F,F,F)`.
    ErrorCodeFff,
    /// Jump two rows ahead of the previous sample.
    SkipTransition,
    /// Step one row back from the previous sample.
    ReverseGlitch,
    /// Show the row just behind the initial one.
    UnderflowProbe,
}

impl FaultKind {
    pub const ALL: [FaultKind; 5] = [
        FaultKind::ErrorCodeTtt,
        FaultKind::ErrorCodeFff,
        FaultKind::SkipTransition,
        FaultKind::ReverseGlitch,
        FaultKind::UnderflowProbe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FaultKind::ErrorCodeTtt => "error_code_TTT",
            FaultKind::ErrorCodeFff => "error_code_FFF",
            FaultKind::SkipTransition => "skip_transition",
            FaultKind::ReverseGlitch => "reverse_glitch",
            FaultKind::UnderflowProbe => "underflow_probe",
        }
    }
}

impl fmt::Display for FaultKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FaultKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        FaultKind::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(s)).ok_or_else(|| {
            let names: Vec<_> = FaultKind::ALL.iter().map(|k| k.name()).collect();
            format!("unknown fault kind `{s}` (expected one of {})", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaultSpec {
    pub kind: FaultKind,
    pub positions: BTreeSet<usize>,
}

impl FaultSpec {
    pub fn new(kind: FaultKind, positions: impl IntoIterator<Item = usize>) -> Self {
        FaultSpec { kind, positions: positions.into_iter().collect() }
    }
}

/// Applies `spec` in increasing position order. Relative faults use the
/// sample before the position (already mutated, if it was itself a fault
/// position), or the initial row at position 0. Ground truth is dropped.
pub fn inject_faults(trace: &EncoderTrace, spec: &FaultSpec) -> Result<EncoderTrace, HarnessError> {
    let len = trace.codes.len();
    if let Some(&position) = spec.positions.iter().find(|&&p| p >= len) {
        return Err(HarnessError::FaultOutOfRange { position, len });
    }
    let mut codes = trace.codes.clone();
    for &i in &spec.positions {
        let prev = if i == 0 { phase0(trace.init_index) } else { codes[i - 1] };
        let prev_row = prev.table_index().unwrap_or(0) as u64;
        codes[i] = match spec.kind {
            FaultKind::ErrorCodeTtt => PhaseCode::ALL_HIGH,
            FaultKind::ErrorCodeFff => PhaseCode::ALL_LOW,
            FaultKind::SkipTransition => phase0(prev_row + 2),
            FaultKind::ReverseGlitch => phase0(prev_row + 5),
            FaultKind::UnderflowProbe => phase0(trace.init_index + 5),
        };
    }
    Ok(EncoderTrace { init_index: trace.init_index, codes, ground_truth: None })
}

/// Samples `df` at the configured interval after checking that the profile is
/// normally behaved and that the sampling rate cannot skip a code.
/// `init_enc_pos` is one-based, like the encoder's `Phase` table.
pub fn trace_from_profile(
    df: &MotionProfile,
    config: &OdoConfig,
    init_enc_pos: u64,
    horizon: usize,
) -> Result<EncoderTrace, HarnessError> {
    if init_enc_pos == 0 {
        return Err(HarnessError::InitOutOfRange(0));
    }
    let dt = config.sampling_interval_f64();
    let grid = default_grid(config, horizon as f64 * dt, 10);
    let report = is_normally_behaved(df, config, &grid);
    if let Some(&first) = report.violations.first() {
        return Err(HarnessError::NotNormallyBehaved { count: report.violations.len(), first });
    }
    if !config.sampling_sound() {
        return Err(HarnessError::SamplingUnsound {
            lhs: dt * config.speed_max_mps,
            delta_s_res: config.delta_s_res_m(),
        });
    }
    let codes = sample_trace(df, config.delta_s_res_m(), init_enc_pos, dt, horizon);
    let times = (0..horizon).map(|n| n as f64 * dt);
    let ground_truth = GroundTruth {
        profile: df.clone(),
        sampling_interval_s: dt,
        positions_m: times.clone().map(|t| df.distance(t)).collect(),
        speeds_mps: times.map(|t| df.speed(t)).collect(),
    };
    Ok(EncoderTrace { init_index: init_enc_pos - 1, codes, ground_truth: Some(ground_truth) })
}

/// True when the odometer's count after every prefix equals the natural-number
/// fold of the encoder decoder over that prefix, for as long as the output
/// stays valid.
pub fn fold_oracle_agrees(trace: &EncoderTrace, config: &OdoConfig) -> bool {
    let (outs, _) = trace.replay(config);
    let mut pos = trace.init_index;
    for (code, out) in trace.codes.iter().zip(&outs) {
        if !out.odometric_position_valid {
            break;
        }
        pos = fold_positions(pos, [*code]);
        if out.odometric_position_count.0 as u64 != pos - trace.init_index {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyReport {
    pub steps_checked: usize,
    pub max_error: f64,
    pub worst_step: usize,
    pub tolerance: f64,
    pub first_violation: Option<(usize, f64)>,
}

impl AccuracyReport {
    pub fn passed(&self) -> bool {
        self.first_violation.is_none()
    }

    fn collect(tolerance: f64, errors: impl Iterator<Item = (usize, f64)>) -> Self {
        let mut report =
            AccuracyReport { steps_checked: 0, max_error: 0.0, worst_step: 0, tolerance, first_violation: None };
        for (k, err) in errors {
            report.steps_checked += 1;
            if err > report.max_error {
                report.max_error = err;
                report.worst_step = k;
            }
            if err > tolerance && report.first_violation.is_none() {
                report.first_violation = Some((k, err));
            }
        }
        report
    }
}

/// Quantization over the window, plus the lag of a window average under
/// maximal acceleration, plus one unit of output rounding.
pub fn default_speed_tolerance(config: &OdoConfig) -> f64 {
    let window = config.n_avg as f64 * config.sampling_interval_f64();
    config.delta_s_res_m() / window + 0.5 * config.accel_max_mps2 * window + resolution::SPEED_MPS
}

/// Compares the odometer's speed output (in m/s) after sample `k` with the
/// profile's speed at `k · Δt`, for every `k >= n_avg`.
pub fn check_speed_accuracy(
    df: &MotionProfile,
    config: &OdoConfig,
    init_enc_pos: u64,
    horizon: usize,
    tolerance: Option<f64>,
) -> Result<AccuracyReport, HarnessError> {
    if config.speed_scale != SpeedScale::Derived {
        return Err(HarnessError::FittedScale);
    }
    if horizon <= config.n_avg {
        return Err(HarnessError::HorizonTooShort { horizon, min: config.n_avg });
    }
    let trace = trace_from_profile(df, config, init_enc_pos, horizon)?;
    let (outs, _) = trace.replay(config);
    let dt = config.sampling_interval_f64();
    let errors = outs.iter().enumerate().skip(config.n_avg).map(|(k, out)| {
        let estimate = out.speed.0 as f64 * resolution::SPEED_MPS;
        (k, (estimate - df.speed(k as f64 * dt)).abs())
    });
    Ok(AccuracyReport::collect(tolerance.unwrap_or_else(|| default_speed_tolerance(config)), errors))
}

/// `|count_k · δs_res − df(k · Δt)| <= 2 · δs_res` at every step.
pub fn check_position_accuracy(
    df: &MotionProfile,
    config: &OdoConfig,
    init_enc_pos: u64,
    horizon: usize,
) -> Result<AccuracyReport, HarnessError> {
    let trace = trace_from_profile(df, config, init_enc_pos, horizon)?;
    let (outs, _) = trace.replay(config);
    let ds = config.delta_s_res_m();
    let dt = config.sampling_interval_f64();
    let errors = outs.iter().enumerate().map(|(k, out)| {
        let estimate = out.odometric_position_count.0 as f64 * ds;
        (k, (estimate - df.distance(k as f64 * dt)).abs())
    });
    Ok(AccuracyReport::collect(2.0 * ds, errors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::is_valid_sequence;
    use crate::kinematics::ProfileShape;

    #[test]
    fn lcg_reference_values() {
        let mut rng = Lcg::new(0);
        // 1442695040888963407 >> 32
        assert_eq!(rng.next_u32(), 335_903_614);
        let a: Vec<u32> = (0..4).map(|_| Lcg::new(7).next_u32()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn generated_traces_are_valid_and_deterministic() {
        for seed in 0..200 {
            let t = gen_valid_sequence(64, seed);
            assert_eq!(t.len(), 64);
            assert_eq!(t.codes[0], phase0(t.init_index));
            assert!(is_valid_sequence(t.init_index, &t.codes), "seed {seed}");
            assert_eq!(t, gen_valid_sequence(64, seed));
            assert!(fold_oracle_agrees(&t, &OdoConfig::transcript_default()));
        }
        assert_ne!(gen_valid_sequence(64, 1).codes, gen_valid_sequence(64, 2).codes);
    }

    #[test]
    fn fault_kinds_parse() {
        for k in FaultKind::ALL {
            assert_eq!(k.name().parse::<FaultKind>(), Ok(k));
        }
        assert!("nope".parse::<FaultKind>().is_err());
    }

    #[test]
    fn injection_effects() {
        let cfg = OdoConfig::transcript_default();
        let t = gen_valid_sequence(40, 3);
        let ttt = inject_faults(&t, &FaultSpec::new(FaultKind::ErrorCodeTtt, [10])).unwrap();
        let (outs, _) = ttt.replay(&cfg);
        assert!(outs[..10].iter().all(|o| o.odometer_status));
        assert!(outs[10..].iter().all(|o| !o.odometer_status));

        let skip = inject_faults(&t, &FaultSpec::new(FaultKind::SkipTransition, [20])).unwrap();
        let (outs, _) = skip.replay(&cfg);
        assert!(outs[20..].iter().all(|o| !o.odometric_position_valid));
        assert!(outs[20..].iter().all(|o| o.odometric_position_count == outs[19].odometric_position_count));

        assert_eq!(inject_faults(&t, &FaultSpec::new(FaultKind::ReverseGlitch, [])).unwrap().codes, t.codes);
        assert_eq!(
            inject_faults(&t, &FaultSpec::new(FaultKind::ErrorCodeFff, [40])),
            Err(HarnessError::FaultOutOfRange { position: 40, len: 40 })
        );
    }

    #[test]
    fn underflow_probe_at_start() {
        let cfg = OdoConfig::transcript_default();
        let t = gen_valid_sequence(10, 5);
        let probed = inject_faults(&t, &FaultSpec::new(FaultKind::UnderflowProbe, [0])).unwrap();
        let (outs, _) = probed.replay(&cfg);
        assert!(!outs[0].odometric_position_valid);
        assert!(outs[0].odometer_status);
    }

    #[test]
    fn profile_traces() {
        let cfg = OdoConfig::physical_default();
        let z = trace_from_profile(&MotionProfile::zero(), &cfg, 1, 50).unwrap();
        assert!(z.codes.iter().all(|&c| c == phase0(0)));

        let ramp = trace_from_profile(&MotionProfile::constant_speed(0.3).unwrap(), &cfg, 2, 300).unwrap();
        assert!(is_valid_sequence(ramp.init_index, &ramp.codes));
        let (_, end) = ramp.replay(&cfg);
        assert!(end.odometric_position_valid && end.odometric_position_count.0 > 0);
        assert!(fold_oracle_agrees(&ramp, &cfg));

        let mut bad = cfg.clone();
        bad.speed_max_mps = 1.0;
        assert!(matches!(
            trace_from_profile(&MotionProfile::zero(), &bad, 1, 10),
            Err(HarnessError::SamplingUnsound { .. })
        ));
        let too_fast = MotionProfile::constant_speed(0.5).unwrap();
        assert!(matches!(trace_from_profile(&too_fast, &cfg, 1, 10), Err(HarnessError::NotNormallyBehaved { .. })));
        assert_eq!(trace_from_profile(&MotionProfile::zero(), &cfg, 0, 10), Err(HarnessError::InitOutOfRange(0)));
    }

    #[test]
    fn speed_accuracy_smoke() {
        let cfg = OdoConfig::physical_default();
        let zero = check_speed_accuracy(&MotionProfile::zero(), &cfg, 1, 100, None).unwrap();
        assert!(zero.passed());
        assert_eq!(zero.max_error, 0.0);

        let trap = MotionProfile::new(ProfileShape::Trapezoid {
            accel_mps2: 0.5,
            cruise_speed_mps: 0.2,
            cruise_duration_s: 5.0,
            decel_mps2: 0.5,
        })
        .unwrap();
        let r = check_speed_accuracy(&trap, &cfg, 1, 1000, None).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.steps_checked, 990);
        assert!(matches!(
            check_speed_accuracy(&trap, &OdoConfig::transcript_default(), 1, 100, None),
            Err(HarnessError::FittedScale)
        ));
        assert!(matches!(check_speed_accuracy(&trap, &cfg, 1, 10, None), Err(HarnessError::HorizonTooShort { .. })));
    }

    #[test]
    fn position_accuracy_smoke() {
        let cfg = OdoConfig::physical_default();
        let r = check_position_accuracy(&MotionProfile::constant_speed(0.25).unwrap(), &cfg, 4, 500).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.max_error <= cfg.delta_s_res_m() + 1e-12);
    }
}
