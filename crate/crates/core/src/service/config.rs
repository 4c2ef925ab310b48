//! Line-based `key = value` configuration.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::recognition::{DEFAULT_MIN_AGREEMENT, DEFAULT_WINDOW};
use crate::thermal::{ModeThresholds, PeltierConfig};
use crate::vlm::VLM_URL_ENV;

/// Environment variable that overrides the default config path.
pub const CONFIG_ENV: &str = "HAPTICVLM_CONFIG";
pub const DEFAULT_CONFIG_PATH: &str = "hapticvlm.conf";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("config line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("missing required key {0:?}")]
    MissingKey(&'static str),
    #[error("{key}: path {} does not exist", path.display())]
    MissingPath { key: &'static str, path: PathBuf },
    #[error("{key}: invalid value {value:?}: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum BackendSource {
    None,
    Fixture(PathBuf),
    Http(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AppConfig {
    pub db_path: PathBuf,
    pub registry_path: Option<PathBuf>,
    pub sample_rate_hz: u32,
    pub log_dir: PathBuf,
    pub vlm: BackendSource,
    pub vlm_timeout_ms: u64,
    pub encoder: BackendSource,
    pub encoder_timeout_ms: u64,
    pub thermal: PeltierConfig,
    pub thresholds: ModeThresholds,
    /// Simulation tick of the thermal device, in seconds.
    pub thermal_tick_s: f64,
    pub recognition_threshold: f64,
    pub recognition_window: usize,
    pub recognition_min_agreement: usize,
    pub bind: String,
    pub port: u16,
}

const KEYS: &[&str] = &[
    "db.path",
    "patterns.registry",
    "patterns.sample_rate",
    "log.dir",
    "vlm.backend",
    "vlm.fixture_file",
    "vlm.url",
    "vlm.timeout_ms",
    "encoder.backend",
    "encoder.fixture_file",
    "encoder.url",
    "encoder.timeout_ms",
    "thermal.tau_drive_s",
    "thermal.tau_idle_s",
    "thermal.ambient_c",
    "thermal.hot_c",
    "thermal.cold_c",
    "thermal.clamp_min_c",
    "thermal.clamp_max_c",
    "thermal.cold_below_c",
    "thermal.hot_above_c",
    "thermal.tick_s",
    "recognition.threshold",
    "recognition.window",
    "recognition.min_agreement",
    "server.bind",
    "server.port",
];

/// Chooses the config file: explicit path, then `$HAPTICVLM_CONFIG`, then `./hapticvlm.conf`.
pub fn config_path(explicit: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    match std::env::var_os(CONFIG_ENV) {
        Some(p) if !p.is_empty() => PathBuf::from(p),
        _ => PathBuf::from(DEFAULT_CONFIG_PATH),
    }
}

fn unquote(v: &str) -> &str {
    let v = v.trim();
    for q in ['"', '\''] {
        if v.len() >= 2 && v.starts_with(q) && v.ends_with(q) {
            return &v[1..v.len() - 1];
        }
    }
    v
}

/// Raw `(line, key, value)` triples, last assignment wins.
fn parse_pairs(text: &str) -> Result<Vec<(usize, String, String)>, ConfigError> {
    let mut out: Vec<(usize, String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: i + 1,
            message: "expected key = value".into(),
        })?;
        let key = k.trim().to_string();
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey { line: i + 1, key });
        }
        out.retain(|(_, existing, _)| *existing != key);
        out.push((i + 1, key, unquote(v).to_string()));
    }
    Ok(out)
}

struct Values {
    pairs: Vec<(usize, String, String)>,
    base: PathBuf,
}

impl Values {
    fn raw(&self, key: &str) -> Option<&str> {
        self.pairs.iter().find(|(_, k, _)| k == key).map(|(_, _, v)| v.as_str())
    }

    fn parsed<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e: T::Err| ConfigError::InvalidValue {
                key: key.into(),
                value: v.into(),
                reason: e.to_string(),
            }),
        }
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.raw(key).map(|v| {
            let p = PathBuf::from(v);
            if p.is_absolute() {
                p
            } else {
                self.base.join(p)
            }
        })
    }

    fn existing(&self, key: &'static str) -> Result<Option<PathBuf>, ConfigError> {
        match self.path(key) {
            Some(p) if !p.exists() => Err(ConfigError::MissingPath { key, path: p }),
            other => Ok(other),
        }
    }

    fn backend(
        &self,
        kind_key: &str,
        file_key: &'static str,
        url_key: &'static str,
    ) -> Result<BackendSource, ConfigError> {
        match self.raw(kind_key).unwrap_or("none") {
            "none" => Ok(BackendSource::None),
            "fixture" => {
                let p = self.existing(file_key)?.ok_or(ConfigError::MissingKey(file_key))?;
                Ok(BackendSource::Fixture(p))
            }
            "http" => {
                let url = match self.raw(url_key) {
                    Some(u) => u.to_string(),
                    None if kind_key == "vlm.backend" => {
                        std::env::var(VLM_URL_ENV).map_err(|_| ConfigError::MissingKey(url_key))?
                    }
                    None => return Err(ConfigError::MissingKey(url_key)),
                };
                Ok(BackendSource::Http(url))
            }
            other => Err(ConfigError::InvalidValue {
                key: kind_key.into(),
                value: other.into(),
                reason: "expected none, fixture or http".into(),
            }),
        }
    }
}

impl AppConfig {
    /// Parses config text. Relative paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let v = Values {
            pairs: parse_pairs(text)?,
            base: base_dir.to_path_buf(),
        };
        let defaults = PeltierConfig::default();
        let thermal = PeltierConfig {
            tau_drive_s: v.parsed("thermal.tau_drive_s", defaults.tau_drive_s)?,
            tau_idle_s: v.parsed("thermal.tau_idle_s", defaults.tau_idle_s)?,
            ambient_c: v.parsed("thermal.ambient_c", defaults.ambient_c)?,
            hot_target_c: v.parsed("thermal.hot_c", defaults.hot_target_c)?,
            cold_target_c: v.parsed("thermal.cold_c", defaults.cold_target_c)?,
            clamp_range_c: (
                v.parsed("thermal.clamp_min_c", defaults.clamp_range_c.0)?,
                v.parsed("thermal.clamp_max_c", defaults.clamp_range_c.1)?,
            ),
            ..defaults
        };
        thermal.validate().map_err(|e| ConfigError::InvalidValue {
            key: "thermal".into(),
            value: String::new(),
            reason: e.to_string(),
        })?;
        let t = ModeThresholds::default();
        let thresholds = ModeThresholds {
            cold_below_c: v.parsed("thermal.cold_below_c", t.cold_below_c)?,
            hot_above_c: v.parsed("thermal.hot_above_c", t.hot_above_c)?,
        };
        let cfg = AppConfig {
            db_path: v.existing("db.path")?.ok_or(ConfigError::MissingKey("db.path"))?,
            registry_path: v.existing("patterns.registry")?,
            sample_rate_hz: v.parsed("patterns.sample_rate", crate::haptics::DEFAULT_SAMPLE_RATE_HZ)?,
            log_dir: v.path("log.dir").ok_or(ConfigError::MissingKey("log.dir"))?,
            vlm: v.backend("vlm.backend", "vlm.fixture_file", "vlm.url")?,
            vlm_timeout_ms: v.parsed("vlm.timeout_ms", 10_000)?,
            encoder: v.backend("encoder.backend", "encoder.fixture_file", "encoder.url")?,
            encoder_timeout_ms: v.parsed("encoder.timeout_ms", 5_000)?,
            thermal,
            thresholds,
            thermal_tick_s: v.parsed("thermal.tick_s", 0.1)?,
            recognition_threshold: v.parsed("recognition.threshold", 0.0)?,
            recognition_window: v.parsed("recognition.window", DEFAULT_WINDOW)?,
            recognition_min_agreement: v.parsed("recognition.min_agreement", DEFAULT_MIN_AGREEMENT)?,
            bind: v.raw("server.bind").unwrap_or("127.0.0.1").to_string(),
            port: v.parsed("server.port", 8080)?,
        };
        let invalid = |key: &str, value: String, reason: &str| ConfigError::InvalidValue {
            key: key.into(),
            value,
            reason: reason.into(),
        };
        if !(-1.0..=1.0).contains(&cfg.recognition_threshold) {
            return Err(invalid(
                "recognition.threshold",
                cfg.recognition_threshold.to_string(),
                "outside [-1, 1]",
            ));
        }
        if cfg.recognition_min_agreement == 0 || cfg.recognition_min_agreement > cfg.recognition_window {
            return Err(invalid(
                "recognition.min_agreement",
                cfg.recognition_min_agreement.to_string(),
                "must be in 1..=recognition.window",
            ));
        }
        if cfg.thermal_tick_s.is_nan() || cfg.thermal_tick_s <= 0.0 {
            return Err(invalid(
                "thermal.tick_s",
                cfg.thermal_tick_s.to_string(),
                "must be positive",
            ));
        }
        if cfg.thresholds.cold_below_c >= cfg.thresholds.hot_above_c {
            return Err(invalid(
                "thermal.cold_below_c",
                cfg.thresholds.cold_below_c.to_string(),
                "must be below thermal.hot_above_c",
            ));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base)
    }
}
