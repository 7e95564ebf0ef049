//! Physical and numeric parameters of the odometer, and their on-disk form.

use std::f64::consts::PI;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact rational used for the discrete estimator's scale factors.
pub type Rational = Ratio<i128>;

/// Output resolutions in SI units.
pub mod resolution {
    pub const TIME_S: f64 = 1e-2;
    pub const DISTANCE_M: f64 = 1e-3;
    pub const SPEED_MPS: f64 = 1.3e-3;
    pub const ACCEL_MPS2: f64 = 0.005;
    pub const JERK_MPS3: f64 = 0.005;
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("config key `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
}

fn invalid(key: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key, reason: reason.into() }
}

/// Output-speed units per position-count difference over the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpeedScale {
    /// `δs_res_approx / (N_avg · Δt)` expressed in speed-resolution units.
    Derived,
    Fixed(Rational),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdoConfig {
    /// Teeth per wheel turn.
    pub tpw: u32,
    pub wheel_diameter_m: f64,
    /// Length of the averaging window.
    pub n_avg: usize,
    /// Sampling interval in seconds; a positive multiple of the 10 ms time resolution.
    pub sampling_interval_s: Rational,
    pub speed_max_mps: f64,
    pub accel_max_mps2: f64,
    /// Rational stand-in for `1000 · π · w_d / (6 · tpw)`.
    pub delta_s_res_approx_mm: Rational,
    pub speed_scale: SpeedScale,
    /// Constants were fitted to recorded output rather than derived from the
    /// physical parameters; skips the consistency check on `delta_s_res_approx_mm`.
    pub fitted: bool,
}

impl OdoConfig {
    /// Fitted constants that reproduce the reference replay transcript.
    pub fn transcript_default() -> Self {
        OdoConfig {
            tpw: 100,
            wheel_diameter_m: 0.9,
            n_avg: 10,
            sampling_interval_s: Rational::new(1, 100),
            speed_max_mps: 0.4,
            accel_max_mps2: 1.0,
            delta_s_res_approx_mm: Rational::new(26, 5),
            speed_scale: SpeedScale::Fixed(Rational::new(15, 4)),
            fitted: true,
        }
    }

    /// A physically consistent configuration: 0.9 m wheel, 100 teeth, 10 ms
    /// sampling, Speed_Max 0.4 m/s (below δs_res/Δt ≈ 0.47 m/s), 1 m/s².
    pub fn physical_default() -> Self {
        Self::physical(100, 0.9, 10, Rational::new(1, 100), 0.4, 1.0)
    }

    pub fn physical(
        tpw: u32,
        wheel_diameter_m: f64,
        n_avg: usize,
        sampling_interval_s: Rational,
        speed_max_mps: f64,
        accel_max_mps2: f64,
    ) -> Self {
        OdoConfig {
            tpw,
            wheel_diameter_m,
            n_avg,
            sampling_interval_s,
            speed_max_mps,
            accel_max_mps2,
            delta_s_res_approx_mm: approx_delta_s_res_mm(tpw, wheel_diameter_m),
            speed_scale: SpeedScale::Derived,
            fitted: false,
        }
    }

    /// Exact resolution distance `π · w_d / (6 · tpw)` in meters.
    pub fn delta_s_res_m(&self) -> f64 {
        PI * self.wheel_diameter_m / (6.0 * self.tpw as f64)
    }

    pub fn delta_s_res_approx_m(&self) -> f64 {
        ratio_to_f64(self.delta_s_res_approx_mm) / 1000.0
    }

    pub fn sampling_interval_f64(&self) -> f64 {
        ratio_to_f64(self.sampling_interval_s)
    }

    /// `Δt · Speed_Max < δs_res`: the sampling rate is fast enough that no
    /// code can be skipped.
    pub fn sampling_sound(&self) -> bool {
        self.sampling_interval_f64() * self.speed_max_mps < self.delta_s_res_m()
    }

    pub fn window_s(&self) -> Rational {
        self.sampling_interval_s * Rational::from_integer(self.n_avg as i128)
    }

    pub fn effective_speed_scale(&self) -> Rational {
        match self.speed_scale {
            SpeedScale::Fixed(r) => r,
            // mm → m, then divide by the 1.3e-3 m/s speed resolution
            SpeedScale::Derived => self.delta_s_res_approx_mm * Rational::new(10, 13) / self.window_s(),
        }
    }

    /// Acceleration units per speed-unit difference over the window.
    pub fn accel_factor(&self) -> Rational {
        // (1.3e-3 / 0.005) / window
        Rational::new(13, 50) / self.window_s()
    }

    /// Jerk units per acceleration-unit difference over the window.
    pub fn jerk_factor(&self) -> Rational {
        Rational::from_integer(1) / self.window_s()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.tpw == 0 {
            return Err(invalid("tpw", "must be positive"));
        }
        if !(self.wheel_diameter_m.is_finite() && self.wheel_diameter_m > 0.0) {
            return Err(invalid("wheel_diameter_m", "must be a positive number"));
        }
        if self.n_avg < 2 {
            return Err(invalid("n_avg", "must be at least 2"));
        }
        let centis = self.sampling_interval_s * Rational::from_integer(100);
        if self.sampling_interval_s <= Rational::from_integer(0) || !centis.is_integer() {
            return Err(invalid("sampling_interval_s", "must be a positive multiple of 0.01 s"));
        }
        if !(self.speed_max_mps.is_finite() && self.speed_max_mps > 0.0) {
            return Err(invalid("speed_max_mps", "must be a positive number"));
        }
        if !(self.accel_max_mps2.is_finite() && self.accel_max_mps2 > 0.0) {
            return Err(invalid("accel_max_mps2", "must be a positive number"));
        }
        if self.delta_s_res_approx_mm <= Rational::from_integer(0) {
            return Err(invalid("delta_s_res_approx_mm", "must be positive"));
        }
        if !self.fitted {
            let exact = 1000.0 * self.delta_s_res_m();
            let approx = ratio_to_f64(self.delta_s_res_approx_mm);
            if ((approx - exact) / exact).abs() > 0.01 {
                return Err(invalid(
                    "delta_s_res_approx_mm",
                    format!("{approx} mm is more than 1% away from {exact} mm (set fitted: true to override)"),
                ));
            }
        }
        Ok(())
    }

    /// Parses a JSON config; keys absent from `text` keep their value from `base`.
    pub fn from_json_over(text: &str, base: &OdoConfig) -> Result<Self, ConfigError> {
        let file: ConfigFile = serde_json::from_str(text)?;
        let mut cfg = base.clone();
        if let Some(v) = file.tpw {
            cfg.tpw = v;
        }
        if let Some(v) = file.wheel_diameter_m {
            cfg.wheel_diameter_m = v;
        }
        if let Some(v) = file.n_avg {
            cfg.n_avg = v;
        }
        if let Some(v) = file.sampling_interval_s {
            cfg.sampling_interval_s = centiseconds(v)?;
        }
        if let Some(v) = file.speed_max_mps {
            cfg.speed_max_mps = v;
        }
        if let Some(v) = file.accel_max_mps2 {
            cfg.accel_max_mps2 = v;
        }
        if let Some(v) = file.fitted {
            cfg.fitted = v;
        }
        match file.delta_s_res_approx_mm {
            Some(r) => cfg.delta_s_res_approx_mm = r.to_ratio("delta_s_res_approx_mm")?,
            // keep δs_res_approx tied to the geometry when only the geometry changed
            None if !cfg.fitted && (file.tpw.is_some() || file.wheel_diameter_m.is_some()) => {
                cfg.delta_s_res_approx_mm = approx_delta_s_res_mm(cfg.tpw, cfg.wheel_diameter_m);
            }
            None => {}
        }
        if let Some(s) = file.speed_scale {
            cfg.speed_scale = match s {
                ScaleField::Keyword(k) if k == "derived" => SpeedScale::Derived,
                ScaleField::Keyword(k) => {
                    return Err(invalid("speed_scale", format!("expected \"derived\" or [num, den], got \"{k}\"")))
                }
                ScaleField::Ratio(r) => SpeedScale::Fixed(r.to_ratio("speed_scale")?),
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        let file = ConfigFile {
            tpw: Some(self.tpw),
            wheel_diameter_m: Some(self.wheel_diameter_m),
            n_avg: Some(self.n_avg),
            sampling_interval_s: Some(self.sampling_interval_f64()),
            speed_max_mps: Some(self.speed_max_mps),
            accel_max_mps2: Some(self.accel_max_mps2),
            delta_s_res_approx_mm: Some(RatioField::from(self.delta_s_res_approx_mm)),
            speed_scale: Some(match self.speed_scale {
                SpeedScale::Derived => ScaleField::Keyword("derived".into()),
                SpeedScale::Fixed(r) => ScaleField::Ratio(RatioField::from(r)),
            }),
            fitted: Some(self.fitted),
        };
        serde_json::to_string_pretty(&file).expect("config serializes")
    }
}

/// Six-decimal rational approximation of `1000 · π · w_d / (6 · tpw)`.
pub fn approx_delta_s_res_mm(tpw: u32, wheel_diameter_m: f64) -> Rational {
    let mm = 1000.0 * PI * wheel_diameter_m / (6.0 * tpw.max(1) as f64);
    Rational::new((mm * 1e6).round() as i128, 1_000_000)
}

pub fn ratio_to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn centiseconds(v: f64) -> Result<Rational, ConfigError> {
    let c = (v * 100.0).round();
    if !v.is_finite() || c <= 0.0 || (v * 100.0 - c).abs() > 1e-9 {
        return Err(invalid("sampling_interval_s", format!("{v} is not a positive multiple of 0.01 s")));
    }
    Ok(Rational::new(c as i128, 100))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tpw: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    wheel_diameter_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n_avg: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sampling_interval_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    speed_max_mps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    accel_max_mps2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta_s_res_approx_mm: Option<RatioField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    speed_scale: Option<ScaleField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fitted: Option<bool>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RatioField(i64, i64);

impl RatioField {
    fn to_ratio(&self, key: &'static str) -> Result<Rational, ConfigError> {
        if self.1 == 0 {
            return Err(invalid(key, "zero denominator"));
        }
        Ok(Rational::new(self.0 as i128, self.1 as i128))
    }
}

impl From<Rational> for RatioField {
    fn from(r: Rational) -> Self {
        RatioField(*r.numer() as i64, *r.denom() as i64)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum ScaleField {
    Keyword(String),
    Ratio(RatioField),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        OdoConfig::transcript_default().validate().unwrap();
        OdoConfig::physical_default().validate().unwrap();
        assert!(OdoConfig::physical_default().sampling_sound());
    }

    #[test]
    fn delta_s_res_value() {
        let cfg = OdoConfig::physical_default();
        assert!((cfg.delta_s_res_m() - 0.004_712_388_980_384_69).abs() < 1e-15);
        let mut twice = cfg.clone();
        twice.wheel_diameter_m *= 2.0;
        assert!((twice.delta_s_res_m() - 2.0 * cfg.delta_s_res_m()).abs() < 1e-15);
    }

    #[test]
    fn derived_scale_in_speed_units() {
        let cfg = OdoConfig::physical_default();
        // one count over a 0.1 s window: 4.712389 mm / 0.1 s / 1.3 mm/s
        let s = ratio_to_f64(cfg.effective_speed_scale());
        assert!((s - 4.712389 / 0.1 / 1.3).abs() < 1e-9);
        assert_eq!(OdoConfig::transcript_default().effective_speed_scale(), Rational::new(15, 4));
    }

    #[test]
    fn json_overrides_and_defaults() {
        let base = OdoConfig::transcript_default();
        let cfg = OdoConfig::from_json_over(r#"{"n_avg": 12, "speed_scale": [7, 2]}"#, &base).unwrap();
        assert_eq!(cfg.n_avg, 12);
        assert_eq!(cfg.speed_scale, SpeedScale::Fixed(Rational::new(7, 2)));
        assert_eq!(cfg.delta_s_res_approx_mm, base.delta_s_res_approx_mm);

        let cfg = OdoConfig::from_json_over(r#"{"speed_scale": "derived"}"#, &base).unwrap();
        assert_eq!(cfg.speed_scale, SpeedScale::Derived);
    }

    #[test]
    fn geometry_change_rederives_approx() {
        let base = OdoConfig::physical_default();
        let cfg = OdoConfig::from_json_over(r#"{"tpw": 50}"#, &base).unwrap();
        assert_eq!(cfg.delta_s_res_approx_mm, approx_delta_s_res_mm(50, 0.9));
    }

    #[test]
    fn roundtrip_through_json() {
        for cfg in [OdoConfig::transcript_default(), OdoConfig::physical_default()] {
            let back = OdoConfig::from_json_over(&cfg.to_json(), &OdoConfig::physical_default()).unwrap();
            assert_eq!(back, cfg);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let base = OdoConfig::physical_default();
        let err = OdoConfig::from_json_over(r#"{"bogus": 1}"#, &base).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        let err = OdoConfig::from_json_over("{\n  \"tpw\": \"x\"\n}", &base).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = OdoConfig::from_json_over(r#"{"sampling_interval_s": 0.015}"#, &base).unwrap_err();
        assert!(err.to_string().contains("sampling_interval_s"), "{err}");
        let err = OdoConfig::from_json_over(r#"{"n_avg": 1}"#, &base).unwrap_err();
        assert!(err.to_string().contains("n_avg"), "{err}");
        let err = OdoConfig::from_json_over(r#"{"delta_s_res_approx_mm": [6, 1]}"#, &base).unwrap_err();
        assert!(err.to_string().contains("1%"), "{err}");
        let err = OdoConfig::from_json_over(r#"{"speed_scale": "fast"}"#, &base).unwrap_err();
        assert!(err.to_string().contains("speed_scale"), "{err}");
    }
}
