use std::collections::HashMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::VlmError;
use crate::image::{parse_tab_table, ImageRef};

/// Environment variable naming the remote inference endpoint.
pub const VLM_URL_ENV: &str = "HAPTICVLM_VLM_URL";

pub trait VlmBackend: Send + Sync {
    /// Returns the model's raw reply text.
    fn infer(&self, prompt: &str, image: &ImageRef, timeout: Duration) -> Result<String, VlmError>;
}

/// Scripted replies keyed by image reference.
#[derive(Debug, Clone, Default)]
pub struct FixtureVlm {
    replies: HashMap<String, String>,
    delay: Duration,
}

impl FixtureVlm {
    pub fn from_pairs<I, K, V>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        Self {
            replies: pairs.into_iter().map(|(k, v)| (k.into(), v.into())).collect(),
            delay: Duration::ZERO,
        }
    }

    /// Reads `image_ref<TAB>reply text` lines.
    pub fn parse(text: &str) -> Result<Self, VlmError> {
        let rows = parse_tab_table(text).map_err(|m| VlmError::Input { line: 0, message: m })?;
        Ok(Self::from_pairs(rows))
    }

    /// Simulated model latency.
    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = delay;
        self
    }
}

impl VlmBackend for FixtureVlm {
    fn infer(&self, _prompt: &str, image: &ImageRef, timeout: Duration) -> Result<String, VlmError> {
        if self.delay > timeout {
            std::thread::sleep(timeout);
            return Err(VlmError::BackendTimeout {
                timeout_ms: timeout.as_millis() as u64,
            });
        }
        std::thread::sleep(self.delay);
        self.replies
            .get(&image.key())
            .cloned()
            .ok_or_else(|| VlmError::Backend(format!("no scripted reply for {}", image.key())))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InferRequest {
    pub prompt: String,
    /// Base64-encoded image bytes.
    pub image: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InferResponse {
    pub text: String,
}

/// Client for a remote `POST /infer` endpoint.
#[derive(Debug, Clone)]
pub struct HttpVlm {
    base_url: String,
}

impl HttpVlm {
    pub fn new(base_url: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into().trim_end_matches('/').to_string(),
        }
    }

    pub fn from_env() -> Option<Self> {
        std::env::var(VLM_URL_ENV).ok().filter(|s| !s.is_empty()).map(Self::new)
    }

    pub fn endpoint(&self) -> String {
        format!("{}/infer", self.base_url)
    }
}

impl VlmBackend for HttpVlm {
    fn infer(&self, prompt: &str, image: &ImageRef, timeout: Duration) -> Result<String, VlmError> {
        let image = image
            .load_base64()
            .map_err(|e| VlmError::Backend(format!("reading image {image}: {e}")))?;
        let body = InferRequest {
            prompt: prompt.to_string(),
            image,
        };
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let timeout_ms = timeout.as_millis() as u64;
        let mut resp = agent.post(&self.endpoint()).send_json(&body).map_err(|e| match e {
            ureq::Error::Timeout(_) => VlmError::BackendTimeout { timeout_ms },
            other => VlmError::Backend(other.to_string()),
        })?;
        if resp.status() != 200 {
            return Err(VlmError::Backend(format!("status {}", resp.status())));
        }
        let reply: InferResponse = resp.body_mut().read_json().map_err(|e| match e {
            ureq::Error::Timeout(_) => VlmError::BackendTimeout { timeout_ms },
            other => VlmError::Backend(other.to_string()),
        })?;
        Ok(reply.text)
    }
}
