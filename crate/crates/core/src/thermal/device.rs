use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::{Arc, Mutex, RwLock};

use super::{PeltierConfig, ThermalError, ThermalMode, ThermalState};

/// Simulated device. Mode requests queue in a mailbox and take effect at the
/// next step boundary; snapshots can be read from any thread.
pub struct ThermalDevice {
    config: PeltierConfig,
    state: RwLock<ThermalState>,
    mailbox_tx: Mutex<Sender<ThermalMode>>,
    mailbox_rx: Mutex<Receiver<ThermalMode>>,
}

impl ThermalDevice {
    pub fn new(config: PeltierConfig) -> Result<Arc<Self>, ThermalError> {
        config.validate()?;
        let (tx, rx) = mpsc::channel();
        Ok(Arc::new(Self {
            state: RwLock::new(ThermalState::at_ambient(&config)),
            config,
            mailbox_tx: Mutex::new(tx),
            mailbox_rx: Mutex::new(rx),
        }))
    }

    pub fn config(&self) -> &PeltierConfig {
        &self.config
    }

    pub fn snapshot(&self) -> ThermalState {
        *self.state.read().unwrap()
    }

    pub fn request_mode(&self, mode: ThermalMode) {
        let _ = self.mailbox_tx.lock().unwrap().send(mode);
    }

    /// Applies pending mode requests (last one wins), then advances by `dt_s`.
    pub fn advance(&self, dt_s: f64) -> Result<ThermalState, ThermalError> {
        let pending = self.mailbox_rx.lock().unwrap().try_iter().last();
        let mut state = self.state.write().unwrap();
        let mut next = *state;
        if let Some(mode) = pending {
            next = next.set_mode(mode);
        }
        *state = next.step(&self.config, dt_s)?;
        Ok(*state)
    }
}
