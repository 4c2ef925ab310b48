use std::collections::HashMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{MaskSpec, RecognitionError};
use crate::embedding::{EmbeddingDatabase, EmbeddingVector};
use crate::image::{parse_tab_table, ImageRef};

/// Produces an embedding for the masked region of an image.
pub trait EncoderBackend: Send + Sync {
    fn dimension(&self) -> usize;
    fn encode(&self, image: &ImageRef, mask: &MaskSpec) -> Result<EmbeddingVector, RecognitionError>;
}

/// Lookup-table encoder for tests and offline runs.
#[derive(Debug, Clone)]
pub struct FixtureEncoder {
    dimension: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl FixtureEncoder {
    pub fn new(dimension: usize) -> Self {
        Self {
            dimension,
            vectors: HashMap::new(),
        }
    }

    /// Resolves `image_ref<TAB>material_name` lines against the database's stored vectors.
    pub fn from_table(text: &str, db: &EmbeddingDatabase) -> Result<Self, RecognitionError> {
        let mut enc = Self::new(db.dimension());
        for (image, material) in parse_tab_table(text).map_err(RecognitionError::Config)? {
            let record = db
                .get(&material)
                .ok_or_else(|| RecognitionError::Config(format!("unknown material {material:?} for {image}")))?;
            enc.vectors.insert(image, record.embedding.components().to_vec());
        }
        Ok(enc)
    }

    /// Maps `image` to a raw vector (may be degenerate).
    pub fn with_vector(mut self, image: impl Into<String>, vector: Vec<f64>) -> Self {
        self.vectors.insert(image.into(), vector);
        self
    }
}

impl EncoderBackend for FixtureEncoder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn encode(&self, image: &ImageRef, _mask: &MaskSpec) -> Result<EmbeddingVector, RecognitionError> {
        let v = self
            .vectors
            .get(&image.key())
            .ok_or_else(|| RecognitionError::Encoder(format!("no fixture vector for {image}")))?;
        EmbeddingVector::new(v.clone()).map_err(|e| RecognitionError::Encoder(e.to_string()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EncodeRequest {
    /// Base64-encoded image bytes.
    pub image: String,
    pub mask: MaskSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EncodeResponse {
    pub embedding: Vec<f64>,
}

/// Client for a remote `POST /encode` embedding service.
#[derive(Debug, Clone)]
pub struct HttpEncoder {
    base_url: String,
    dimension: usize,
    timeout: Duration,
}

impl HttpEncoder {
    pub fn new(base_url: impl Into<String>, dimension: usize) -> Self {
        Self {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            dimension,
            timeout: Duration::from_secs(5),
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }
}

impl EncoderBackend for HttpEncoder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn encode(&self, image: &ImageRef, mask: &MaskSpec) -> Result<EmbeddingVector, RecognitionError> {
        let err = |m: String| RecognitionError::Encoder(m);
        let body = EncodeRequest {
            image: image.load_base64().map_err(|e| err(format!("reading {image}: {e}")))?,
            mask: mask.clone(),
        };
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let mut resp = agent
            .post(&format!("{}/encode", self.base_url))
            .send_json(&body)
            .map_err(|e| err(e.to_string()))?;
        if resp.status() != 200 {
            return Err(err(format!("status {}", resp.status())));
        }
        let reply: EncodeResponse = resp.body_mut().read_json().map_err(|e| err(e.to_string()))?;
        if reply.embedding.len() != self.dimension {
            return Err(err(format!(
                "expected {} components, got {}",
                self.dimension,
                reply.embedding.len()
            )));
        }
        EmbeddingVector::new(reply.embedding).map_err(|e| err(e.to_string()))
    }
}
