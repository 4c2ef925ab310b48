use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use super::synth::{synthesize, HapticPattern};
use super::{HapticError, PatternId, SampleBuffer, DEFAULT_SAMPLE_RATE_HZ};

/// Maps audio keys to patterns and caches their rendered buffers.
#[derive(Debug)]
pub struct PatternRegistry {
    sample_rate_hz: u32,
    patterns: BTreeMap<String, HapticPattern>,
    rendered: Mutex<HashMap<String, Arc<SampleBuffer>>>,
}

impl PatternRegistry {
    pub fn new(sample_rate_hz: u32, patterns: BTreeMap<String, HapticPattern>) -> Self {
        Self {
            sample_rate_hz,
            patterns,
            rendered: Mutex::new(HashMap::new()),
        }
    }

    /// Each pattern code ("WC", "GT", ...) mapped to its builtin recipe.
    pub fn builtin() -> Self {
        let patterns = PatternId::ALL
            .into_iter()
            .map(|id| (id.code().to_string(), HapticPattern::builtin(id)))
            .collect();
        Self::new(DEFAULT_SAMPLE_RATE_HZ, patterns)
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn contains(&self, key: &str) -> bool {
        self.patterns.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.patterns.keys().map(String::as_str)
    }

    pub fn pattern(&self, key: &str) -> Result<&HapticPattern, HapticError> {
        self.patterns
            .get(key)
            .ok_or_else(|| HapticError::UnknownPattern(key.to_string()))
    }

    pub fn render(&self, key: &str) -> Result<Arc<SampleBuffer>, HapticError> {
        let pattern = self.pattern(key)?;
        if let Some(buf) = self.rendered.lock().unwrap().get(key) {
            return Ok(Arc::clone(buf));
        }
        let buf = Arc::new(synthesize(pattern, self.sample_rate_hz)?);
        self.rendered.lock().unwrap().insert(key.to_string(), Arc::clone(&buf));
        Ok(buf)
    }
}

/// Parses registry text: `audio_key = PATTERN [param=value ...]` per line.
///
/// ```text
/// # wood keys
/// wood  = WS
/// glass = GT carrier_hz=850 duration_s=1.0
/// ```
pub fn parse_registry(text: &str, sample_rate_hz: u32) -> Result<PatternRegistry, HapticError> {
    let mut patterns = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| HapticError::Registry { line: i + 1, message };
        let (key, rest) = line
            .split_once('=')
            .ok_or_else(|| err("expected `key = PATTERN`".into()))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(err("empty audio key".into()));
        }
        let mut tokens = rest.split_whitespace();
        let id: PatternId = tokens
            .next()
            .ok_or_else(|| err("missing pattern id".into()))?
            .parse()
            .map_err(|e: HapticError| err(e.to_string()))?;
        let mut pattern = HapticPattern::builtin(id);
        for token in tokens {
            let (name, value) = token
                .split_once('=')
                .ok_or_else(|| err(format!("expected param=value, got {token:?}")))?;
            let value: f64 = value.parse().map_err(|_| err(format!("bad number in {token:?}")))?;
            pattern = pattern.with_param(name, value).map_err(|e| err(e.to_string()))?;
        }
        if patterns.insert(key.to_string(), pattern).is_some() {
            return Err(err(format!("duplicate audio key {key:?}")));
        }
    }
    Ok(PatternRegistry::new(sample_rate_hz, patterns))
}
