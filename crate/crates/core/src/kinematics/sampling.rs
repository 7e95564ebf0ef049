//! Discretization of a distance function into encoder codes.

use crate::encoder::{phase, PhaseCode};

use super::MotionProfile;

/// Code the encoder shows at time `x`: `Phase(⌊df(x)/δs_res⌋ + init)`.
///
/// Note this uses the one-based [`phase`], so `init = 1` starts on table row 0.
pub fn encoding(df: &MotionProfile, delta_s_res_m: f64, init_enc_pos: u64, x: f64) -> PhaseCode {
    let steps = (df.distance(x) / delta_s_res_m).floor();
    let steps = if steps > 0.0 { steps as u64 } else { 0 };
    phase(steps + init_enc_pos)
}

pub fn sampling(df: &MotionProfile, delta_s_res_m: f64, init_enc_pos: u64, sample_itvl_s: f64, n: u64) -> PhaseCode {
    encoding(df, delta_s_res_m, init_enc_pos, n as f64 * sample_itvl_s)
}

/// `sampling` for `n` in `0..horizon_n`.
pub fn sample_trace(
    df: &MotionProfile,
    delta_s_res_m: f64,
    init_enc_pos: u64,
    sample_itvl_s: f64,
    horizon_n: usize,
) -> Vec<PhaseCode> {
    (0..horizon_n as u64).map(|n| sampling(df, delta_s_res_m, init_enc_pos, sample_itvl_s, n)).collect()
}
