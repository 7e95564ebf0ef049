//! Continuous physics: distance functions, admissibility, sampling into
//! encoder codes, and the no-code-loss check between sampling rates.

mod profile;
mod quantize;
mod retraction;
mod sampling;

pub use profile::{MotionProfile, ProfileError, ProfileShape, Segment};
pub use quantize::{dequantize, dequantize_distance, quantize, quantize_distance, DomainError, Quantity};
pub use retraction::{find_retraction, search_retraction, CodeLoss, Retraction};
pub use sampling::{encoding, sample_trace, sampling};

use crate::config::OdoConfig;
use crate::encoder::PhaseCode;

/// `π · w_d / (6 · tpw)` in meters.
pub fn delta_s_res(config: &OdoConfig) -> f64 {
    config.delta_s_res_m()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ViolationKind {
    NegativeDistance(f64),
    MovedBeforeStart(f64),
    SpeedExceeded(f64),
    AccelExceeded(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub t: f64,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdmissibilityReport {
    pub violations: Vec<Violation>,
}

impl AdmissibilityReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Grid with `per_interval` points per sampling interval, from one interval
/// before the start up to `horizon_s`.
pub fn default_grid(config: &OdoConfig, horizon_s: f64, per_interval: usize) -> Vec<f64> {
    let step = config.sampling_interval_f64() / per_interval.max(1) as f64;
    let last = (horizon_s / step).ceil() as i64;
    (-(per_interval as i64)..=last).map(|i| i as f64 * step).collect()
}

/// Checks the normal-behaviour conditions on a finite grid: zero before the
/// start, never negative, `|speed| <= Speed_Max`, `|accel| <= Acceleration_Max`.
/// Differentiability holds by construction for the built-in families.
pub fn is_normally_behaved(df: &MotionProfile, config: &OdoConfig, grid: &[f64]) -> AdmissibilityReport {
    let mut violations = Vec::new();
    for &t in grid {
        let d = df.distance(t);
        if d < 0.0 {
            violations.push(Violation { t, kind: ViolationKind::NegativeDistance(d) });
        }
        if t <= 0.0 && d != 0.0 {
            violations.push(Violation { t, kind: ViolationKind::MovedBeforeStart(d) });
        }
        let v = df.speed(t);
        if v.abs() > config.speed_max_mps {
            violations.push(Violation { t, kind: ViolationKind::SpeedExceeded(v) });
        }
        let a = df.accel(t);
        if a.abs() > config.accel_max_mps2 {
            violations.push(Violation { t, kind: ViolationKind::AccelExceeded(a) });
        }
    }
    AdmissibilityReport { violations }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementResult {
    /// `δt = δ_odo / divisor`.
    pub divisor: u32,
    pub dt_s: f64,
    pub outcome: Result<Retraction, CodeLoss>,
}

impl RefinementResult {
    pub fn passed(&self) -> bool {
        self.outcome.is_ok()
    }

    /// Time at which the coarse trace lost a code, if it did.
    pub fn lost_at_s(&self) -> Option<f64> {
        self.outcome.as_ref().err().map(|l| l.fine_index as f64 * self.dt_s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoLossReport {
    /// Whether `δ_odo · Speed_Max < δs_res` held for the config.
    pub hypothesis_holds: bool,
    pub coarse_len: usize,
    pub refinements: Vec<RefinementResult>,
}

impl NoLossReport {
    pub fn all_passed(&self) -> bool {
        self.refinements.iter().all(RefinementResult::passed)
    }

    pub fn first_failure(&self) -> Option<&RefinementResult> {
        self.refinements.iter().find(|r| !r.passed())
    }
}

/// Samples `df` at the configured interval and at `refinements` finer
/// intervals `δ_odo/2, δ_odo/3, …`, and searches a retraction from each fine
/// trace onto the coarse one. All traces end at the same instant.
pub fn check_no_loss(
    df: &MotionProfile,
    config: &OdoConfig,
    init_enc_pos: u64,
    horizon_s: f64,
    refinements: u32,
) -> NoLossReport {
    let ds = config.delta_s_res_m();
    let dt_odo = config.sampling_interval_f64();
    let coarse_steps = (horizon_s / dt_odo).floor() as usize;
    let coarse = sample_trace(df, ds, init_enc_pos, dt_odo, coarse_steps + 1);
    let results = (2..refinements + 2)
        .map(|divisor| {
            let dt = dt_odo / divisor as f64;
            let fine: Vec<PhaseCode> = sample_trace(df, ds, init_enc_pos, dt, coarse_steps * divisor as usize + 1);
            RefinementResult { divisor, dt_s: dt, outcome: search_retraction(&fine, &coarse) }
        })
        .collect();
    NoLossReport { hypothesis_holds: config.sampling_sound(), coarse_len: coarse.len(), refinements: results }
}
