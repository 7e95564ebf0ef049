//! Continuous distance functions with analytic derivatives.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ProfileError {
    #[error("profile parameter `{0}` must be finite")]
    NotFinite(&'static str),
    #[error("profile parameter `{param}`: {reason}")]
    Invalid { param: &'static str, reason: String },
    #[error("distance goes negative at t = {0} s")]
    NegativeDistance(f64),
}

fn invalid(param: &'static str, reason: impl Into<String>) -> ProfileError {
    ProfileError::Invalid { param, reason: reason.into() }
}

/// Declarative description of a motion profile, as read from JSON.
///
/// All families are zero for `t <= 0` and non-negative afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileShape {
    /// `df(t) = a1·t + a2·t² + a3·t³` for `t > 0`.
    Polynomial { coeffs: Vec<f64> },
    /// Constant acceleration to a cruise speed, a cruise phase, then an
    /// optional braking phase to standstill. `decel_mps2 = 0` cruises forever.
    Trapezoid {
        accel_mps2: f64,
        cruise_speed_mps: f64,
        cruise_duration_s: f64,
        #[serde(default)]
        decel_mps2: f64,
    },
    /// Speed `v − u·cos(2πt/P)`, so the train starts at `v − u`.
    Sinusoidal { mean_speed_mps: f64, amplitude_mps: f64, period_s: f64 },
    /// Segments played back to back; distance accumulates across segments and
    /// the last segment continues past its duration.
    Piecewise { segments: Vec<Segment> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub duration_s: f64,
    pub profile: ProfileShape,
}

/// A validated distance function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileShape", into = "ProfileShape")]
pub struct MotionProfile {
    shape: ProfileShape,
    // piecewise only
    pieces: Vec<Piece>,
}

#[derive(Debug, Clone, PartialEq)]
struct Piece {
    start_s: f64,
    base_m: f64,
    profile: MotionProfile,
}

impl TryFrom<ProfileShape> for MotionProfile {
    type Error = ProfileError;
    fn try_from(shape: ProfileShape) -> Result<Self, ProfileError> {
        MotionProfile::new(shape)
    }
}

impl From<MotionProfile> for ProfileShape {
    fn from(p: MotionProfile) -> Self {
        p.shape
    }
}

fn finite(name: &'static str, v: f64) -> Result<f64, ProfileError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ProfileError::NotFinite(name))
    }
}

impl MotionProfile {
    pub fn new(shape: ProfileShape) -> Result<Self, ProfileError> {
        let mut pieces = Vec::new();
        match &shape {
            ProfileShape::Polynomial { coeffs } => {
                if coeffs.len() > 3 {
                    return Err(invalid("coeffs", "at most three coefficients (up to cubic)"));
                }
                for &c in coeffs {
                    finite("coeffs", c)?;
                }
                check_cubic_nonnegative(&padded(coeffs))?;
            }
            &ProfileShape::Trapezoid { accel_mps2, cruise_speed_mps, cruise_duration_s, decel_mps2 } => {
                if finite("accel_mps2", accel_mps2)? <= 0.0 {
                    return Err(invalid("accel_mps2", "must be positive"));
                }
                if finite("cruise_speed_mps", cruise_speed_mps)? <= 0.0 {
                    return Err(invalid("cruise_speed_mps", "must be positive"));
                }
                if finite("cruise_duration_s", cruise_duration_s)? < 0.0 {
                    return Err(invalid("cruise_duration_s", "must not be negative"));
                }
                if finite("decel_mps2", decel_mps2)? < 0.0 {
                    return Err(invalid("decel_mps2", "must not be negative"));
                }
            }
            &ProfileShape::Sinusoidal { mean_speed_mps, amplitude_mps, period_s } => {
                finite("mean_speed_mps", mean_speed_mps)?;
                if finite("amplitude_mps", amplitude_mps)? < 0.0 {
                    return Err(invalid("amplitude_mps", "must not be negative"));
                }
                if amplitude_mps > mean_speed_mps {
                    return Err(invalid("amplitude_mps", "must not exceed mean_speed_mps"));
                }
                if finite("period_s", period_s)? <= 0.0 {
                    return Err(invalid("period_s", "must be positive"));
                }
            }
            ProfileShape::Piecewise { segments } => {
                if segments.is_empty() {
                    return Err(invalid("segments", "at least one segment required"));
                }
                let (mut t, mut d) = (0.0, 0.0);
                for seg in segments {
                    if finite("duration_s", seg.duration_s)? <= 0.0 {
                        return Err(invalid("duration_s", "must be positive"));
                    }
                    let profile = MotionProfile::new(seg.profile.clone())?;
                    let end = profile.distance(seg.duration_s);
                    pieces.push(Piece { start_s: t, base_m: d, profile });
                    t += seg.duration_s;
                    d += end;
                }
            }
        }
        Ok(MotionProfile { shape, pieces })
    }

    /// The profile standing still at zero.
    pub fn zero() -> Self {
        MotionProfile { shape: ProfileShape::Polynomial { coeffs: Vec::new() }, pieces: Vec::new() }
    }

    pub fn constant_speed(v: f64) -> Result<Self, ProfileError> {
        Self::new(ProfileShape::Polynomial { coeffs: vec![v] })
    }

    pub fn shape(&self) -> &ProfileShape {
        &self.shape
    }

    /// Distance travelled in meters.
    pub fn distance(&self, t: f64) -> f64 {
        self.eval(t, 0)
    }

    pub fn speed(&self, t: f64) -> f64 {
        self.eval(t, 1)
    }

    pub fn accel(&self, t: f64) -> f64 {
        self.eval(t, 2)
    }

    pub fn jerk(&self, t: f64) -> f64 {
        self.eval(t, 3)
    }

    /// Derivative of the given order; 0 for `t < 0`. At `t = 0` and at corner
    /// times the right-hand limit is returned.
    pub fn eval(&self, t: f64, order: u8) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match &self.shape {
            ProfileShape::Polynomial { coeffs } => poly_eval(&padded(coeffs), t, order),
            &ProfileShape::Trapezoid { accel_mps2, cruise_speed_mps, cruise_duration_s, decel_mps2 } => {
                trapezoid_eval(accel_mps2, cruise_speed_mps, cruise_duration_s, decel_mps2, t, order)
            }
            &ProfileShape::Sinusoidal { mean_speed_mps: v, amplitude_mps: u, period_s } => {
                let w = TAU / period_s;
                let (s, c) = (w * t).sin_cos();
                match order {
                    0 => v * t - u / w * s,
                    1 => v - u * c,
                    2 => u * w * s,
                    3 => u * w * w * c,
                    _ => 0.0,
                }
            }
            ProfileShape::Piecewise { .. } => {
                let i = self.pieces.partition_point(|p| p.start_s <= t).saturating_sub(1);
                let piece = &self.pieces[i];
                let local = piece.profile.eval(t - piece.start_s, order);
                if order == 0 {
                    piece.base_m + local
                } else {
                    local
                }
            }
        }
    }

    /// Times where some derivative up to jerk is discontinuous.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = vec![0.0];
        match &self.shape {
            ProfileShape::Polynomial { .. } | ProfileShape::Sinusoidal { .. } => {}
            &ProfileShape::Trapezoid { accel_mps2, cruise_speed_mps, cruise_duration_s, decel_mps2 } => {
                let t1 = cruise_speed_mps / accel_mps2;
                let t2 = t1 + cruise_duration_s;
                out.extend([t1, t2]);
                if decel_mps2 > 0.0 {
                    out.push(t2 + cruise_speed_mps / decel_mps2);
                }
            }
            ProfileShape::Piecewise { .. } => {
                for piece in &self.pieces {
                    out.extend(piece.profile.breakpoints().into_iter().map(|b| b + piece.start_s));
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

fn padded(coeffs: &[f64]) -> [f64; 3] {
    let mut c = [0.0; 3];
    c[..coeffs.len()].copy_from_slice(coeffs);
    c
}

fn poly_eval(c: &[f64; 3], t: f64, order: u8) -> f64 {
    let [a1, a2, a3] = *c;
    match order {
        0 => t * (a1 + t * (a2 + t * a3)),
        1 => a1 + t * (2.0 * a2 + t * 3.0 * a3),
        2 => 2.0 * a2 + 6.0 * a3 * t,
        3 => 6.0 * a3,
        _ => 0.0,
    }
}

/// `p(t) >= 0` on `t >= 0` iff the leading coefficient is non-negative and
/// `p` is non-negative at every positive critical point.
fn check_cubic_nonnegative(c: &[f64; 3]) -> Result<(), ProfileError> {
    let lead = c.iter().rev().copied().find(|&x| x != 0.0).unwrap_or(0.0);
    if lead < 0.0 {
        return Err(invalid("coeffs", "distance diverges to -inf"));
    }
    // p'(t) = a1 + 2 a2 t + 3 a3 t²
    let (qa, qb, qc) = (3.0 * c[2], 2.0 * c[1], c[0]);
    let mut crit = Vec::new();
    if qa != 0.0 {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let r = disc.sqrt();
            crit.extend([(-qb - r) / (2.0 * qa), (-qb + r) / (2.0 * qa)]);
        }
    } else if qb != 0.0 {
        crit.push(-qc / qb);
    }
    for t in crit.into_iter().filter(|&t| t > 0.0) {
        let v = poly_eval(c, t, 0);
        if v < -1e-12 * (1.0 + t.powi(3)) {
            return Err(ProfileError::NegativeDistance(t));
        }
    }
    Ok(())
}

fn trapezoid_eval(a: f64, v: f64, hold: f64, d: f64, t: f64, order: u8) -> f64 {
    let t1 = v / a;
    let t2 = t1 + hold;
    let x1 = 0.5 * a * t1 * t1;
    let x2 = x1 + v * hold;
    let (x, s, acc) = if t < t1 {
        (0.5 * a * t * t, a * t, a)
    } else if t < t2 || d == 0.0 {
        (x1 + v * (t - t1), v, 0.0)
    } else {
        let t3 = t2 + v / d;
        if t < t3 {
            let tau = t - t2;
            (x2 + v * tau - 0.5 * d * tau * tau, v - d * tau, -d)
        } else {
            (x2 + v * v / (2.0 * d), 0.0, 0.0)
        }
    };
    match order {
        0 => x,
        1 => s,
        2 => acc,
        _ => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trapezoid(a: f64, v: f64, hold: f64, d: f64) -> MotionProfile {
        MotionProfile::new(ProfileShape::Trapezoid {
            accel_mps2: a,
            cruise_speed_mps: v,
            cruise_duration_s: hold,
            decel_mps2: d,
        })
        .unwrap()
    }

    #[test]
    fn half_t_squared() {
        let p = MotionProfile::new(ProfileShape::Polynomial { coeffs: vec![0.0, 0.5] }).unwrap();
        assert_eq!(p.speed(3.0), 3.0);
        assert_eq!(p.accel(3.0), 1.0);
        assert_eq!(p.distance(-1.0), 0.0);
        let c = MotionProfile::constant_speed(2.0).unwrap();
        assert_eq!(c.accel(5.0), 0.0);
        assert_eq!(c.distance(5.0), 10.0);
    }

    #[test]
    fn rejects_negative_distance() {
        let err = MotionProfile::new(ProfileShape::Polynomial { coeffs: vec![1.0, -1.0] }).unwrap_err();
        assert!(matches!(err, ProfileError::Invalid { .. }));
        // dips below zero before rising again
        let err = MotionProfile::new(ProfileShape::Polynomial { coeffs: vec![1.0, -3.0, 2.0] }).unwrap_err();
        assert!(matches!(err, ProfileError::NegativeDistance(_)), "{err:?}");
        // touches zero but never goes below: t(t-1)² = t - 2t² + t³
        MotionProfile::new(ProfileShape::Polynomial { coeffs: vec![1.0, -2.0, 1.0] }).unwrap();
        assert!(MotionProfile::new(ProfileShape::Polynomial { coeffs: vec![1.0, 0.0, 0.0, 1.0] }).is_err());
    }

    #[test]
    fn trapezoid_phases() {
        let p = trapezoid(0.5, 0.2, 2.0, 0.25);
        // accel until 0.4 s, cruise until 2.4 s, brake until 3.2 s
        let bp = p.breakpoints();
        assert_eq!(bp.len(), 4);
        for (got, want) in bp.iter().zip([0.0, 0.4, 2.4, 3.2]) {
            assert!((got - want).abs() < 1e-12, "{bp:?}");
        }
        assert!((p.speed(0.2) - 0.1).abs() < 1e-12);
        assert_eq!(p.speed(1.0), 0.2);
        assert_eq!(p.accel(3.0), -0.25);
        assert_eq!(p.speed(10.0), 0.0);
        let total = 0.04 + 0.4 + 0.08;
        assert!((p.distance(10.0) - total).abs() < 1e-12);
        assert_eq!(p.jerk(1.0), 0.0);
    }

    #[test]
    fn sinusoid_starts_at_rest_when_amplitude_equals_mean() {
        let p = MotionProfile::new(ProfileShape::Sinusoidal { mean_speed_mps: 0.2, amplitude_mps: 0.2, period_s: 4.0 })
            .unwrap();
        assert_eq!(p.speed(0.0), 0.0);
        assert!((p.speed(2.0) - 0.4).abs() < 1e-12);
        assert!(MotionProfile::new(ProfileShape::Sinusoidal {
            mean_speed_mps: 0.1,
            amplitude_mps: 0.2,
            period_s: 4.0
        })
        .is_err());
    }

    #[test]
    fn piecewise_accumulates_distance() {
        let p = MotionProfile::new(ProfileShape::Piecewise {
            segments: vec![
                Segment { duration_s: 2.0, profile: ProfileShape::Polynomial { coeffs: vec![0.1] } },
                Segment { duration_s: 1.0, profile: ProfileShape::Polynomial { coeffs: vec![0.3] } },
            ],
        })
        .unwrap();
        assert!((p.distance(2.0) - 0.2).abs() < 1e-12);
        assert!((p.distance(4.0) - 0.8).abs() < 1e-12);
        assert_eq!(p.speed(1.0), 0.1);
        assert_eq!(p.speed(2.5), 0.3);
        assert_eq!(p.breakpoints(), vec![0.0, 2.0]);
    }

    #[test]
    fn parses_from_json() {
        let p: MotionProfile = serde_json::from_str(
            r#"{"kind":"trapezoid","accel_mps2":0.5,"cruise_speed_mps":0.3,"cruise_duration_s":1}"#,
        )
        .unwrap();
        assert_eq!(p.speed(100.0), 0.3);
        let err = serde_json::from_str::<MotionProfile>(r#"{"kind":"trapezoid","accel_mps2":0.5}"#).unwrap_err();
        assert!(err.to_string().contains("cruise_speed_mps"), "{err}");
        let err = serde_json::from_str::<MotionProfile>(r#"{"kind":"polynomial","coeffs":[-1]}"#).unwrap_err();
        assert!(err.to_string().contains("coeffs"), "{err}");
        let back: MotionProfile = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
    }
}
