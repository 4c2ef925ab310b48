use std::collections::VecDeque;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{channel, Receiver, Sender};
use std::sync::{Arc, Condvar, Mutex};
use std::thread::JoinHandle;

use log::warn;

use super::{
    check_compatibility, classify_frame, AudioDispatcher, EncoderBackend, FrameDescriptor, RecognitionError,
    RecognitionEvent, Smoother, DEFAULT_MIN_AGREEMENT, DEFAULT_WINDOW,
};
use crate::embedding::EmbeddingDatabase;
use crate::haptics::{PlaybackCommand, PlaybackEngine};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub threshold: f64,
    pub window: usize,
    pub min_agreement: usize,
    pub queue_capacity: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            threshold: 0.0,
            window: DEFAULT_WINDOW,
            min_agreement: DEFAULT_MIN_AGREEMENT,
            queue_capacity: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub event: RecognitionEvent,
    pub command: Option<PlaybackCommand>,
    pub dispatch_error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineStats {
    pub submitted: u64,
    pub processed: u64,
    pub dropped: u64,
}

struct Queue {
    frames: VecDeque<FrameDescriptor>,
    closed: bool,
    last_id: Option<u64>,
}

struct Shared {
    queue: Mutex<Queue>,
    ready: Condvar,
    capacity: usize,
    submitted: AtomicU64,
    processed: AtomicU64,
    dropped: AtomicU64,
    subscribers: Mutex<Vec<Sender<PipelineOutput>>>,
}

/// Frames in, smoothed events and playback commands out, on one classifier thread.
///
/// When the queue is full the oldest pending frame is dropped.
pub struct RecognitionPipeline {
    shared: Arc<Shared>,
    worker: Option<JoinHandle<()>>,
}

impl RecognitionPipeline {
    pub fn start(
        backend: Arc<dyn EncoderBackend>,
        db: Arc<EmbeddingDatabase>,
        known_keys: Vec<String>,
        config: PipelineConfig,
        playback: Option<Arc<PlaybackEngine>>,
    ) -> Result<Self, RecognitionError> {
        check_compatibility(backend.as_ref(), &db)?;
        if config.queue_capacity == 0 {
            return Err(RecognitionError::Config("queue capacity must be positive".into()));
        }
        if !(-1.0..=1.0).contains(&config.threshold) {
            return Err(RecognitionError::Config(format!(
                "threshold {} outside [-1, 1]",
                config.threshold
            )));
        }
        let mut smoother = Smoother::new(config.window, config.min_agreement)?;
        let mut dispatcher = AudioDispatcher::new(known_keys);
        let shared = Arc::new(Shared {
            queue: Mutex::new(Queue {
                frames: VecDeque::with_capacity(config.queue_capacity),
                closed: false,
                last_id: None,
            }),
            ready: Condvar::new(),
            capacity: config.queue_capacity,
            submitted: AtomicU64::new(0),
            processed: AtomicU64::new(0),
            dropped: AtomicU64::new(0),
            subscribers: Mutex::new(Vec::new()),
        });
        let worker_shared = Arc::clone(&shared);
        let threshold = config.threshold;
        let worker = std::thread::Builder::new()
            .name("recognition".into())
            .spawn(move || {
                let shared = worker_shared;
                loop {
                    let frame = {
                        let mut q = shared.queue.lock().unwrap();
                        loop {
                            if let Some(f) = q.frames.pop_front() {
                                break Some(f);
                            }
                            if q.closed {
                                break None;
                            }
                            q = shared.ready.wait(q).unwrap();
                        }
                    };
                    let Some(frame) = frame else { break };
                    let event = smoother.apply(classify_frame(backend.as_ref(), &db, &frame, threshold));
                    let (command, dispatch_error) = match dispatcher.dispatch(&event) {
                        Ok(cmd) => (cmd, None),
                        Err(e) => (None, Some(e.to_string())),
                    };
                    if let (Some(engine), Some(cmd)) = (&playback, &command) {
                        if let Err(e) = engine.schedule(cmd.clone()) {
                            warn!("playback of {} failed: {e}", cmd.audio_key);
                        }
                    }
                    shared.processed.fetch_add(1, Ordering::SeqCst);
                    let out = PipelineOutput {
                        event,
                        command,
                        dispatch_error,
                    };
                    shared
                        .subscribers
                        .lock()
                        .unwrap()
                        .retain(|tx| tx.send(out.clone()).is_ok());
                }
            })
            .map_err(|e| RecognitionError::Config(format!("spawning classifier: {e}")))?;
        Ok(Self {
            shared,
            worker: Some(worker),
        })
    }

    /// Receives every output produced after this call.
    pub fn subscribe(&self) -> Receiver<PipelineOutput> {
        let (tx, rx) = channel();
        self.shared.subscribers.lock().unwrap().push(tx);
        rx
    }

    /// Enqueues a frame without blocking. Frame ids must strictly increase.
    pub fn submit(&self, frame: FrameDescriptor) -> Result<(), RecognitionError> {
        let mut q = self.shared.queue.lock().unwrap();
        if q.closed {
            return Err(RecognitionError::Closed);
        }
        if let Some(previous) = q.last_id {
            if frame.frame_id <= previous {
                return Err(RecognitionError::FrameOrder {
                    previous,
                    got: frame.frame_id,
                });
            }
        }
        q.last_id = Some(frame.frame_id);
        if q.frames.len() == self.shared.capacity {
            q.frames.pop_front();
            self.shared.dropped.fetch_add(1, Ordering::SeqCst);
        }
        q.frames.push_back(frame);
        self.shared.submitted.fetch_add(1, Ordering::SeqCst);
        drop(q);
        self.shared.ready.notify_one();
        Ok(())
    }

    pub fn stats(&self) -> PipelineStats {
        PipelineStats {
            submitted: self.shared.submitted.load(Ordering::SeqCst),
            processed: self.shared.processed.load(Ordering::SeqCst),
            dropped: self.shared.dropped.load(Ordering::SeqCst),
        }
    }

    /// Processes whatever is still queued, then stops the worker.
    pub fn finish(mut self) -> PipelineStats {
        self.close();
        self.stats()
    }

    fn close(&mut self) {
        self.shared.queue.lock().unwrap().closed = true;
        self.shared.ready.notify_all();
        if let Some(worker) = self.worker.take() {
            let _ = worker.join();
        }
    }
}

impl Drop for RecognitionPipeline {
    fn drop(&mut self) {
        self.close();
    }
}
