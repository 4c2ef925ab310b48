//! HTTP service, configuration and session persistence.

mod config;
mod context;
mod http;
mod sessions;

pub use config::{config_path, AppConfig, BackendSource, ConfigError, CONFIG_ENV, DEFAULT_CONFIG_PATH};
pub use context::{load_database, AppContext, StartupError};
pub use http::{
    router, run, serve, ApiError, CreateSession, EstimateResponse, ImageRequest, PlayRequest, PlayResponse,
    RecognizeResponse, ThermalRequest, TrialResponse,
};
pub use sessions::{PresentedTrial, ResponseAck, SessionError, SessionInfo, SessionManager, SessionResults};
