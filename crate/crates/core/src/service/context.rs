use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use thiserror::Error;

use super::config::{AppConfig, BackendSource, ConfigError};
use super::sessions::{SessionError, SessionManager};
use crate::embedding::{parse_text_import, read_database, EmbeddingDatabase, FormatError, MAGIC};
use crate::haptics::{parse_registry, PatternRegistry, PlaybackEngine};
use crate::recognition::{check_compatibility, EncoderBackend, FixtureEncoder, HttpEncoder};
use crate::thermal::ThermalDevice;
use crate::vlm::{FixtureVlm, HttpVlm, VlmBackend};

#[derive(Debug, Error)]
pub enum StartupError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("loading {what}: {message}")]
    Load { what: &'static str, message: String },
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: String, source: std::io::Error },
}

fn load_err(what: &'static str) -> impl Fn(String) -> StartupError {
    move |message| StartupError::Load { what, message }
}

/// Reads a binary `HVDB` database or, failing the magic check, the text import format.
pub fn load_database(path: &Path) -> Result<EmbeddingDatabase, FormatError> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(&MAGIC) {
        read_database(bytes.as_slice())
    } else {
        let text = String::from_utf8(bytes).map_err(FormatError::Utf8)?;
        parse_text_import(&text)
    }
}

/// Everything the service needs, loaded and validated.
pub struct AppContext {
    pub config: AppConfig,
    pub db: Arc<EmbeddingDatabase>,
    pub registry: Arc<PatternRegistry>,
    pub playback: Arc<PlaybackEngine>,
    pub thermal: Arc<ThermalDevice>,
    pub vlm: Option<Arc<dyn VlmBackend>>,
    pub encoder: Option<Arc<dyn EncoderBackend>>,
    pub sessions: SessionManager,
}

impl AppContext {
    pub fn load(config: AppConfig) -> Result<Self, StartupError> {
        let db = Arc::new(load_database(&config.db_path).map_err(|e| load_err("database")(e.to_string()))?);
        let registry = Arc::new(match &config.registry_path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| load_err("pattern registry")(e.to_string()))?;
                parse_registry(&text, config.sample_rate_hz).map_err(|e| load_err("pattern registry")(e.to_string()))?
            }
            None => PatternRegistry::builtin(),
        });
        let thermal = ThermalDevice::new(config.thermal.clone()).map_err(|e| load_err("thermal")(e.to_string()))?;
        let vlm: Option<Arc<dyn VlmBackend>> = match &config.vlm {
            BackendSource::None => None,
            BackendSource::Fixture(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| load_err("vlm fixture")(e.to_string()))?;
                Some(Arc::new(
                    FixtureVlm::parse(&text).map_err(|e| load_err("vlm fixture")(e.to_string()))?,
                ))
            }
            BackendSource::Http(url) => Some(Arc::new(HttpVlm::new(url.clone()))),
        };
        let encoder: Option<Arc<dyn EncoderBackend>> = match &config.encoder {
            BackendSource::None => None,
            BackendSource::Fixture(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| load_err("encoder fixture")(e.to_string()))?;
                Some(Arc::new(
                    FixtureEncoder::from_table(&text, &db).map_err(|e| load_err("encoder fixture")(e.to_string()))?,
                ))
            }
            BackendSource::Http(url) => Some(Arc::new(
                HttpEncoder::new(url.clone(), db.dimension())
                    .with_timeout(Duration::from_millis(config.encoder_timeout_ms)),
            )),
        };
        if let Some(enc) = &encoder {
            check_compatibility(enc.as_ref(), &db).map_err(|e| load_err("encoder")(e.to_string()))?;
        }
        let sessions =
            SessionManager::open(&config.log_dir).map_err(|e: SessionError| load_err("session logs")(e.to_string()))?;
        Ok(Self {
            playback: Arc::new(PlaybackEngine::null(Arc::clone(&registry))),
            config,
            db,
            registry,
            thermal,
            vlm,
            encoder,
            sessions,
        })
    }
}
