//! Simulated Peltier plate with first-order thermal dynamics.
//!
//! The plate relaxes exponentially toward the active mode's target:
//! `T' = target + (T - target) * exp(-dt / tau)`. The update is exact, so
//! one step of `dt` equals two steps of `dt / 2`.

mod device;

pub use device::ThermalDevice;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThermalError {
    #[error("time step must be positive and finite, got {0}")]
    Step(f64),
    #[error("invalid thermal configuration: {0}")]
    Config(String),
    #[error("unknown thermal mode {0:?}")]
    UnknownMode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThermalMode {
    Hot,
    Cold,
    Idle,
}

impl fmt::Display for ThermalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThermalMode::Hot => "hot",
            ThermalMode::Cold => "cold",
            ThermalMode::Idle => "idle",
        })
    }
}

impl FromStr for ThermalMode {
    type Err = ThermalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hot" | "h" => Ok(ThermalMode::Hot),
            "cold" | "c" => Ok(ThermalMode::Cold),
            "idle" => Ok(ThermalMode::Idle),
            _ => Err(ThermalError::UnknownMode(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeltierConfig {
    pub model_name: String,
    pub plate_size_mm: (f64, f64),
    pub tau_drive_s: f64,
    pub tau_idle_s: f64,
    pub ambient_c: f64,
    pub hot_target_c: f64,
    pub cold_target_c: f64,
    pub clamp_range_c: (f64, f64),
}

impl Default for PeltierConfig {
    fn default() -> Self {
        Self {
            model_name: "TEC1-03108".into(),
            plate_size_mm: (20.0, 20.0),
            tau_drive_s: 2.0,
            tau_idle_s: 10.0,
            ambient_c: 25.0,
            hot_target_c: 40.0,
            cold_target_c: 15.0,
            clamp_range_c: (0.0, 60.0),
        }
    }
}

impl PeltierConfig {
    pub fn validate(&self) -> Result<(), ThermalError> {
        let bad = |m: &str| Err(ThermalError::Config(m.to_string()));
        if !(self.tau_drive_s > 0.0 && self.tau_idle_s > 0.0) {
            return bad("time constants must be positive");
        }
        if !(self.cold_target_c < self.ambient_c && self.ambient_c < self.hot_target_c) {
            return bad("expected cold_target_c < ambient_c < hot_target_c");
        }
        let (lo, hi) = self.clamp_range_c;
        if !(lo <= self.cold_target_c && self.hot_target_c <= hi) {
            return bad("clamp range must contain all target temperatures");
        }
        Ok(())
    }

    /// `(target, tau)` for a mode.
    pub fn target(&self, mode: ThermalMode) -> (f64, f64) {
        match mode {
            ThermalMode::Hot => (self.hot_target_c, self.tau_drive_s),
            ThermalMode::Cold => (self.cold_target_c, self.tau_drive_s),
            ThermalMode::Idle => (self.ambient_c, self.tau_idle_s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalState {
    pub plate_temp_c: f64,
    pub mode: ThermalMode,
    pub sim_time_s: f64,
}

impl ThermalState {
    /// Idle plate at ambient temperature.
    pub fn at_ambient(config: &PeltierConfig) -> Self {
        Self {
            plate_temp_c: config.ambient_c,
            mode: ThermalMode::Idle,
            sim_time_s: 0.0,
        }
    }

    /// Switches mode; the plate temperature is continuous across the switch.
    pub fn set_mode(self, mode: ThermalMode) -> Self {
        Self { mode, ..self }
    }

    pub fn step(self, config: &PeltierConfig, dt_s: f64) -> Result<Self, ThermalError> {
        if !(dt_s > 0.0 && dt_s.is_finite()) {
            return Err(ThermalError::Step(dt_s));
        }
        let (target, tau) = config.target(self.mode);
        let relaxed = target + (self.plate_temp_c - target) * (-dt_s / tau).exp();
        let (lo, hi) = config.clamp_range_c;
        Ok(Self {
            plate_temp_c: relaxed.clamp(lo, hi),
            mode: self.mode,
            sim_time_s: self.sim_time_s + dt_s,
        })
    }
}

/// Estimate thresholds for choosing a thermal mode from an inferred ambient temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeThresholds {
    pub cold_below_c: f64,
    pub hot_above_c: f64,
}

impl Default for ModeThresholds {
    fn default() -> Self {
        Self {
            cold_below_c: 18.0,
            hot_above_c: 27.0,
        }
    }
}

pub fn map_estimate_to_mode(estimate_c: f64, thresholds: ModeThresholds) -> Result<ThermalMode, ThermalError> {
    if thresholds.cold_below_c.partial_cmp(&thresholds.hot_above_c) != Some(std::cmp::Ordering::Less) {
        return Err(ThermalError::Config(format!(
            "cold_below_c {} must be below hot_above_c {}",
            thresholds.cold_below_c, thresholds.hot_above_c
        )));
    }
    Ok(if estimate_c < thresholds.cold_below_c {
        ThermalMode::Cold
    } else if estimate_c > thresholds.hot_above_c {
        ThermalMode::Hot
    } else {
        ThermalMode::Idle
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_relaxation() {
        let cfg = PeltierConfig::default();
        let s = ThermalState {
            plate_temp_c: 25.0,
            mode: ThermalMode::Hot,
            sim_time_s: 0.0,
        };
        let next = s.step(&cfg, 2.0).unwrap();
        assert!((next.plate_temp_c - (40.0 - 15.0 * (-1.0f64).exp())).abs() < 1e-12);
        assert!((next.plate_temp_c - 34.482).abs() < 1e-3);
        assert_eq!(next.sim_time_s, 2.0);
    }

    #[test]
    fn fixed_points() {
        let cfg = PeltierConfig::default();
        let hot = ThermalState {
            plate_temp_c: 40.0,
            mode: ThermalMode::Hot,
            sim_time_s: 0.0,
        };
        let idle = ThermalState::at_ambient(&cfg);
        for dt in [0.01, 1.0, 100.0] {
            assert_eq!(hot.step(&cfg, dt).unwrap().plate_temp_c, 40.0);
            assert_eq!(idle.step(&cfg, dt).unwrap().plate_temp_c, 25.0);
        }
    }

    #[test]
    fn mode_switch_is_continuous_and_idempotent() {
        let s = ThermalState {
            plate_temp_c: 31.5,
            mode: ThermalMode::Idle,
            sim_time_s: 4.0,
        };
        let hot = s.set_mode(ThermalMode::Hot);
        assert_eq!(hot.plate_temp_c, 31.5);
        assert_eq!(hot.mode, ThermalMode::Hot);
        assert_eq!(hot.set_mode(ThermalMode::Hot), hot);
        assert_eq!(hot.set_mode(ThermalMode::Cold).plate_temp_c, 31.5);
    }

    #[test]
    fn rejects_bad_steps_and_configs() {
        let cfg = PeltierConfig::default();
        let s = ThermalState::at_ambient(&cfg);
        for dt in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(s.step(&cfg, dt).is_err());
        }
        let inverted = PeltierConfig {
            hot_target_c: 10.0,
            ..cfg.clone()
        };
        assert!(inverted.validate().is_err());
        let narrow = PeltierConfig {
            clamp_range_c: (20.0, 30.0),
            ..cfg
        };
        assert!(narrow.validate().is_err());
    }

    #[test]
    fn estimate_mapping() {
        let t = ModeThresholds::default();
        assert_eq!(map_estimate_to_mode(10.0, t).unwrap(), ThermalMode::Cold);
        assert_eq!(map_estimate_to_mode(30.0, t).unwrap(), ThermalMode::Hot);
        assert_eq!(map_estimate_to_mode(22.0, t).unwrap(), ThermalMode::Idle);
        assert_eq!(map_estimate_to_mode(18.0, t).unwrap(), ThermalMode::Idle);
        let inverted = ModeThresholds {
            cold_below_c: 27.0,
            hot_above_c: 18.0,
        };
        assert!(matches!(
            map_estimate_to_mode(20.0, inverted),
            Err(ThermalError::Config(_))
        ));
    }
}
