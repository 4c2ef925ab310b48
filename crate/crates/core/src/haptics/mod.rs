//! Vibrotactile pattern synthesis, WAV export and playback.
//!
//! Every pattern is rendered parametrically and then restricted to the
//! 1-1000 Hz band that palms placed on a speaker can feel.

mod filter;
mod playback;
mod registry;
mod synth;
mod wav;

pub use filter::{band_limit, BandPass, Biquad};
pub use playback::{AudioSink, NullSink, PlaybackCommand, PlaybackEngine, PlaybackHandle, RecordingSink, SinkEvent};
pub use registry::{parse_registry, PatternRegistry};
pub use synth::{synthesize, HapticPattern, Recipe, NORMALIZED_PEAK};
pub use wav::{export_wav, import_wav};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Lower edge of the perceivable vibration band.
pub const VIBRATION_BAND_LOW_HZ: f64 = 1.0;
/// Upper edge of the perceivable vibration band.
pub const VIBRATION_BAND_HIGH_HZ: f64 = 1000.0;
pub const DEFAULT_SAMPLE_RATE_HZ: u32 = 48_000;
pub const DEFAULT_DURATION_S: f64 = 2.0;
pub const MIN_SAMPLE_RATE_HZ: u32 = 8000;

#[derive(Debug, Error)]
pub enum HapticError {
    #[error("{what} = {value} Hz lies outside the vibration band (1, 1000) Hz")]
    BandViolation { what: &'static str, value: f64 },
    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: String, value: f64 },
    #[error("invalid band [{low_hz}, {high_hz}] Hz at {sample_rate_hz} Hz sample rate")]
    BandSpec {
        low_hz: f64,
        high_hz: f64,
        sample_rate_hz: f64,
    },
    #[error("sample rate {0} Hz is below the 8000 Hz minimum")]
    SampleRate(u32),
    #[error("unknown pattern {0:?}")]
    UnknownPattern(String),
    #[error("registry line {line}: {message}")]
    Registry { line: usize, message: String },
    #[error("gain {0} outside [0, 1]")]
    Gain(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("wav: {0}")]
    Wav(#[from] hound::Error),
}

/// The five vibration patterns used in the recognition study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PatternId {
    WC,
    GT,
    WS,
    FR,
    MW,
}

impl PatternId {
    /// Study order: WC, GT, WS, FR, MW.
    pub const ALL: [PatternId; 5] = [
        PatternId::WC,
        PatternId::GT,
        PatternId::WS,
        PatternId::FR,
        PatternId::MW,
    ];

    pub fn code(self) -> &'static str {
        match self {
            PatternId::WC => "WC",
            PatternId::GT => "GT",
            PatternId::WS => "WS",
            PatternId::FR => "FR",
            PatternId::MW => "MW",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            PatternId::WC => "Wood carving",
            PatternId::GT => "Glass tapping",
            PatternId::WS => "Wood striking",
            PatternId::FR => "Fabric rubbing",
            PatternId::MW => "Metal whooshing",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Fixed noise seed so renders are reproducible.
    pub fn noise_seed(self) -> u64 {
        0x4856_4d00 + self as u64
    }
}

impl fmt::Display for PatternId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for PatternId {
    type Err = HapticError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PatternId::ALL
            .into_iter()
            .find(|p| p.code().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| HapticError::UnknownPattern(s.to_string()))
    }
}

/// Mono audio at a fixed rate, samples in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBuffer {
    pub sample_rate_hz: u32,
    pub samples: Vec<f64>,
}

impl SampleBuffer {
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, s| m.max(s.abs()))
    }
}
