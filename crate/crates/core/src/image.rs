use std::fmt;
use std::io;

use base64::Engine;
use serde::{Deserialize, Serialize};

/// Opaque reference to a camera frame or photo.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ImageRef {
    Path(String),
    Inline { inline: Vec<u8> },
}

impl ImageRef {
    pub fn path(p: impl Into<String>) -> Self {
        ImageRef::Path(p.into())
    }

    /// Lookup key used by fixture backends: the path, or `inline:<len>` for raw bytes.
    pub fn key(&self) -> String {
        match self {
            ImageRef::Path(p) => p.clone(),
            ImageRef::Inline { inline } => format!("inline:{}", inline.len()),
        }
    }

    pub fn load(&self) -> io::Result<Vec<u8>> {
        match self {
            ImageRef::Path(p) => std::fs::read(p),
            ImageRef::Inline { inline } => Ok(inline.clone()),
        }
    }

    pub fn load_base64(&self) -> io::Result<String> {
        Ok(base64::engine::general_purpose::STANDARD.encode(self.load()?))
    }
}

impl fmt::Display for ImageRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

impl From<&str> for ImageRef {
    fn from(value: &str) -> Self {
        ImageRef::Path(value.to_string())
    }
}

/// Parses `key<TAB>value` fixture tables, skipping blank and `#` lines.
pub(crate) fn parse_tab_table(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('\t')
            .ok_or_else(|| format!("line {}: expected key<TAB>value", i + 1))?;
        rows.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(rows)
}
