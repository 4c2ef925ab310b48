//! Playback engine: one owner thread drives the audio sink, commands arrive
//! over a channel from any thread.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, Sender, SyncSender};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{HapticError, PatternRegistry, SampleBuffer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaybackCommand {
    pub audio_key: String,
    pub gain: f64,
    #[serde(rename = "loop")]
    pub looping: bool,
    pub issued_at_ms: u64,
}

impl PlaybackCommand {
    pub fn new(audio_key: impl Into<String>, gain: f64, looping: bool, issued_at_ms: u64) -> Result<Self, HapticError> {
        if !(0.0..=1.0).contains(&gain) {
            return Err(HapticError::Gain(gain));
        }
        Ok(Self {
            audio_key: audio_key.into(),
            gain,
            looping,
            issued_at_ms,
        })
    }
}

/// Output device abstraction. Implementations run on the engine thread.
pub trait AudioSink: Send {
    fn open(&mut self) -> Result<(), String> {
        Ok(())
    }
    fn play(&mut self, key: &str, buffer: Arc<SampleBuffer>, gain: f64, looping: bool);
    fn stop(&mut self, key: &str);
}

/// Discards audio.
#[derive(Debug, Default)]
pub struct NullSink;

impl AudioSink for NullSink {
    fn play(&mut self, _key: &str, _buffer: Arc<SampleBuffer>, _gain: f64, _looping: bool) {}
    fn stop(&mut self, _key: &str) {}
}

#[derive(Debug, Clone, PartialEq)]
pub enum SinkEvent {
    Play {
        key: String,
        samples: usize,
        gain: f64,
        looping: bool,
    },
    Stop {
        key: String,
    },
}

/// Sink that records every call; clones share the same log.
#[derive(Debug, Clone, Default)]
pub struct RecordingSink {
    events: Arc<Mutex<Vec<SinkEvent>>>,
    fail_open: bool,
}

impl RecordingSink {
    pub fn new() -> Self {
        Self::default()
    }

    /// A sink whose `open` fails, to exercise the null-sink fallback.
    pub fn unavailable() -> Self {
        Self {
            fail_open: true,
            ..Self::default()
        }
    }

    pub fn events(&self) -> Vec<SinkEvent> {
        self.events.lock().unwrap().clone()
    }
}

impl AudioSink for RecordingSink {
    fn open(&mut self) -> Result<(), String> {
        if self.fail_open {
            Err("device unavailable".into())
        } else {
            Ok(())
        }
    }

    fn play(&mut self, key: &str, buffer: Arc<SampleBuffer>, gain: f64, looping: bool) {
        self.events.lock().unwrap().push(SinkEvent::Play {
            key: key.to_string(),
            samples: buffer.samples.len(),
            gain,
            looping,
        });
    }

    fn stop(&mut self, key: &str) {
        self.events
            .lock()
            .unwrap()
            .push(SinkEvent::Stop { key: key.to_string() });
    }
}

#[derive(Debug, Clone)]
struct Active {
    id: u64,
    key: String,
    started: Instant,
    duration: Duration,
    looping: bool,
}

enum Msg {
    Play {
        id: u64,
        cmd: PlaybackCommand,
        buffer: Arc<SampleBuffer>,
        ack: SyncSender<()>,
    },
    Stop {
        ack: SyncSender<()>,
    },
}

type Slot = Arc<Mutex<Option<Active>>>;

/// Observes one scheduled playback.
#[derive(Debug, Clone)]
pub struct PlaybackHandle {
    id: u64,
    key: String,
    slot: Slot,
}

impl PlaybackHandle {
    pub fn audio_key(&self) -> &str {
        &self.key
    }

    /// True while this playback is current and either looping or within its duration.
    pub fn is_active(&self) -> bool {
        match &*self.slot.lock().unwrap() {
            Some(a) if a.id == self.id => a.looping || a.started.elapsed() < a.duration,
            _ => false,
        }
    }
}

pub struct PlaybackEngine {
    registry: Arc<PatternRegistry>,
    tx: Option<Sender<Msg>>,
    slot: Slot,
    next_id: AtomicU64,
    worker: Option<JoinHandle<()>>,
}

impl PlaybackEngine {
    /// Starts the engine on `sink`, falling back to [`NullSink`] if the sink cannot open.
    pub fn new(registry: Arc<PatternRegistry>, mut sink: Box<dyn AudioSink>) -> Self {
        if let Err(e) = sink.open() {
            log::warn!("audio sink unavailable ({e}); using null sink");
            sink = Box::new(NullSink);
        }
        let (tx, rx) = mpsc::channel();
        let slot: Slot = Arc::new(Mutex::new(None));
        let worker_slot = Arc::clone(&slot);
        let worker = std::thread::Builder::new()
            .name("haptic-playback".into())
            .spawn(move || run(sink, rx, worker_slot))
            .expect("spawn playback thread");
        Self {
            registry,
            tx: Some(tx),
            slot,
            next_id: AtomicU64::new(1),
            worker: Some(worker),
        }
    }

    pub fn null(registry: Arc<PatternRegistry>) -> Self {
        Self::new(registry, Box::new(NullSink))
    }

    pub fn registry(&self) -> &Arc<PatternRegistry> {
        &self.registry
    }

    /// Starts `cmd`, preempting whatever is playing. Returns once the sink has switched.
    pub fn schedule(&self, cmd: PlaybackCommand) -> Result<PlaybackHandle, HapticError> {
        let buffer = self.registry.render(&cmd.audio_key)?;
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        let key = cmd.audio_key.clone();
        let (ack, done) = mpsc::sync_channel(1);
        self.send(Msg::Play { id, cmd, buffer, ack });
        let _ = done.recv();
        Ok(PlaybackHandle {
            id,
            key,
            slot: Arc::clone(&self.slot),
        })
    }

    pub fn stop(&self) {
        let (ack, done) = mpsc::sync_channel(1);
        self.send(Msg::Stop { ack });
        let _ = done.recv();
    }

    pub fn active_key(&self) -> Option<String> {
        self.slot.lock().unwrap().as_ref().map(|a| a.key.clone())
    }

    fn send(&self, msg: Msg) {
        if let Some(tx) = &self.tx {
            let _ = tx.send(msg);
        }
    }
}

impl Drop for PlaybackEngine {
    fn drop(&mut self) {
        self.tx.take();
        if let Some(worker) = self.worker.take() {
            let _ = worker.join();
        }
    }
}

fn run(mut sink: Box<dyn AudioSink>, rx: Receiver<Msg>, slot: Slot) {
    for msg in rx {
        match msg {
            Msg::Play { id, cmd, buffer, ack } => {
                let previous = slot.lock().unwrap().take();
                if let Some(prev) = previous {
                    sink.stop(&prev.key);
                }
                let duration = Duration::from_secs_f64(buffer.duration_s());
                sink.play(&cmd.audio_key, buffer, cmd.gain, cmd.looping);
                *slot.lock().unwrap() = Some(Active {
                    id,
                    key: cmd.audio_key,
                    started: Instant::now(),
                    duration,
                    looping: cmd.looping,
                });
                let _ = ack.send(());
            }
            Msg::Stop { ack } => {
                if let Some(prev) = slot.lock().unwrap().take() {
                    sink.stop(&prev.key);
                }
                let _ = ack.send(());
            }
        }
    }
}
