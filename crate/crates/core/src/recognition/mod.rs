//! Frame-by-frame material recognition and audio dispatch.

mod encoder;
mod stream;

pub use encoder::{EncodeRequest, EncodeResponse, EncoderBackend, FixtureEncoder, HttpEncoder};
pub use stream::{PipelineConfig, PipelineOutput, PipelineStats, RecognitionPipeline};

use std::collections::{HashSet, VecDeque};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{EmbeddingDatabase, MatchResult};
use crate::haptics::PlaybackCommand;
use crate::image::ImageRef;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecognitionError {
    #[error("encoder error: {0}")]
    Encoder(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("frame id {got} does not follow {previous}")]
    FrameOrder { previous: u64, got: u64 },
    #[error("unknown pattern {0:?}")]
    UnknownPattern(String),
    #[error("pipeline is closed")]
    Closed,
}

pub const DEFAULT_MASK_FRACTION: f64 = 0.5;
pub const DEFAULT_WINDOW: usize = 5;
pub const DEFAULT_MIN_AGREEMENT: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MaskSpec {
    /// Centered rectangle covering `fraction` of the frame width and height.
    CenteredRect {
        fraction: f64,
    },
    ExplicitBitmap {
        width: u32,
        height: u32,
        bits: Vec<bool>,
    },
}

impl Default for MaskSpec {
    fn default() -> Self {
        MaskSpec::CenteredRect {
            fraction: DEFAULT_MASK_FRACTION,
        }
    }
}

impl MaskSpec {
    /// Checks the mask, and its size against `frame_size` when known.
    pub fn validate(&self, frame_size: Option<(u32, u32)>) -> Result<(), RecognitionError> {
        match self {
            MaskSpec::CenteredRect { fraction } => {
                if *fraction > 0.0 && *fraction <= 1.0 {
                    Ok(())
                } else {
                    Err(RecognitionError::Config(format!(
                        "mask fraction {fraction} outside (0, 1]"
                    )))
                }
            }
            MaskSpec::ExplicitBitmap { width, height, bits } => {
                if bits.len() != (*width as usize) * (*height as usize) {
                    return Err(RecognitionError::Config("bitmap length does not match its size".into()));
                }
                match frame_size {
                    Some(size) if size != (*width, *height) => Err(RecognitionError::Config(format!(
                        "bitmap {width}x{height} does not match frame {}x{}",
                        size.0, size.1
                    ))),
                    _ => Ok(()),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameDescriptor {
    pub frame_id: u64,
    pub timestamp_ms: u64,
    pub image: ImageRef,
    #[serde(default)]
    pub mask: MaskSpec,
    /// Width and height, when the source knows them.
    #[serde(default)]
    pub size: Option<(u32, u32)>,
}

impl FrameDescriptor {
    pub fn new(frame_id: u64, timestamp_ms: u64, image: ImageRef) -> Self {
        Self {
            frame_id,
            timestamp_ms,
            image,
            mask: MaskSpec::default(),
            size: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecognitionEvent {
    pub frame_id: u64,
    pub timestamp_ms: u64,
    /// Raw per-frame match; `None` for no match or an encoder failure.
    pub result: Option<MatchResult>,
    pub error: Option<String>,
    pub smoothed_material: Option<String>,
    pub audio_key: Option<String>,
    pub latency_ms: u64,
}

impl RecognitionEvent {
    pub fn raw_material(&self) -> Option<&str> {
        self.result.as_ref().map(|r| r.material.as_str())
    }

    /// The event with timing removed, for run-to-run comparison.
    pub fn canonical(&self) -> Self {
        Self {
            latency_ms: 0,
            ..self.clone()
        }
    }
}

/// Fails when the encoder and database disagree on embedding width.
pub fn check_compatibility(backend: &dyn EncoderBackend, db: &EmbeddingDatabase) -> Result<(), RecognitionError> {
    if db.is_empty() {
        return Err(RecognitionError::Config("embedding database is empty".into()));
    }
    if backend.dimension() != db.dimension() {
        return Err(RecognitionError::Config(format!(
            "encoder dimension {} does not match database dimension {}",
            backend.dimension(),
            db.dimension()
        )));
    }
    Ok(())
}

/// Encodes and matches one frame. Failures are recorded on the event.
pub fn classify_frame(
    backend: &dyn EncoderBackend,
    db: &EmbeddingDatabase,
    frame: &FrameDescriptor,
    threshold: f64,
) -> RecognitionEvent {
    let started = Instant::now();
    let outcome = frame
        .mask
        .validate(frame.size)
        .and_then(|()| backend.encode(&frame.image, &frame.mask))
        .and_then(|v| {
            db.match_material(&v, threshold)
                .map_err(|e| RecognitionError::Encoder(e.to_string()))
        });
    let (result, error) = match outcome {
        Ok(m) => (m, None),
        Err(e) => (None, Some(e.to_string())),
    };
    RecognitionEvent {
        frame_id: frame.frame_id,
        timestamp_ms: frame.timestamp_ms,
        result,
        error,
        smoothed_material: None,
        audio_key: None,
        latency_ms: started.elapsed().as_millis() as u64,
    }
}

/// Majority vote over a trailing window of raw materials.
#[derive(Debug, Clone)]
pub struct Smoother {
    window: usize,
    min_agreement: usize,
    recent: VecDeque<Option<(String, String)>>,
    current: Option<(String, String)>,
}

impl Smoother {
    pub fn new(window: usize, min_agreement: usize) -> Result<Self, RecognitionError> {
        if window == 0 || min_agreement == 0 || min_agreement > window {
            return Err(RecognitionError::Config(format!(
                "need 1 <= min_agreement <= window, got window {window}, min_agreement {min_agreement}"
            )));
        }
        Ok(Self {
            window,
            min_agreement,
            recent: VecDeque::with_capacity(window),
            current: None,
        })
    }

    /// Fills in `smoothed_material` and `audio_key` on `event`.
    pub fn apply(&mut self, mut event: RecognitionEvent) -> RecognitionEvent {
        if self.recent.len() == self.window {
            self.recent.pop_front();
        }
        self.recent
            .push_back(event.result.as_ref().map(|r| (r.material.clone(), r.audio_key.clone())));

        // (entry, count) in first-appearance order
        let mut tally: Vec<(&(String, String), usize)> = Vec::new();
        for entry in self.recent.iter().flatten() {
            match tally.iter_mut().find(|(e, _)| e.0 == entry.0) {
                Some((_, n)) => *n += 1,
                None => tally.push((entry, 1)),
            }
        }
        let top = tally.iter().map(|(_, n)| *n).max().unwrap_or(0);
        if top >= self.min_agreement {
            let tied: Vec<&(String, String)> = tally.iter().filter(|(_, n)| *n == top).map(|(e, _)| *e).collect();
            let keep = self
                .current
                .as_ref()
                .and_then(|cur| tied.iter().find(|e| e.0 == cur.0).copied());
            let winner = keep.unwrap_or(tied[0]).clone();
            self.current = Some(winner);
        }
        event.smoothed_material = self.current.as_ref().map(|c| c.0.clone());
        event.audio_key = self.current.as_ref().map(|c| c.1.clone());
        event
    }
}

pub fn smooth_stream(
    events: impl IntoIterator<Item = RecognitionEvent>,
    window: usize,
    min_agreement: usize,
) -> Result<Vec<RecognitionEvent>, RecognitionError> {
    let mut smoother = Smoother::new(window, min_agreement)?;
    Ok(events.into_iter().map(|e| smoother.apply(e)).collect())
}

/// Edge-triggered audio dispatch: one command per change of smoothed material.
#[derive(Debug, Clone)]
pub struct AudioDispatcher {
    known_keys: HashSet<String>,
    last: Option<String>,
}

impl AudioDispatcher {
    pub fn new<I, S>(known_keys: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            known_keys: known_keys.into_iter().map(Into::into).collect(),
            last: None,
        }
    }

    pub fn dispatch(&mut self, event: &RecognitionEvent) -> Result<Option<PlaybackCommand>, RecognitionError> {
        let Some(material) = &event.smoothed_material else {
            return Ok(None);
        };
        if self.last.as_ref() == Some(material) {
            return Ok(None);
        }
        self.last = Some(material.clone());
        let key = event
            .audio_key
            .clone()
            .ok_or_else(|| RecognitionError::UnknownPattern(format!("no audio key for {material}")))?;
        if !self.known_keys.contains(&key) {
            return Err(RecognitionError::UnknownPattern(key));
        }
        PlaybackCommand::new(key, 1.0, true, event.timestamp_ms)
            .map(Some)
            .map_err(|e| RecognitionError::Config(e.to_string()))
    }
}
