//! `HVDB` binary database files and the plain-text import format.
//!
//! Binary layout, all integers little-endian:
//!
//! ```text
//! "HVDB" | version u32 = 1 | dimension u32 | record_count u32
//! per record: name_len u16 | name | audio_key_len u16 | audio_key | dimension x f32
//! ```

use std::io::{self, Read, Write};

use thiserror::Error;

use super::{EmbeddingDatabase, EmbeddingError, EmbeddingVector};

pub const MAGIC: [u8; 4] = *b"HVDB";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("bad magic bytes {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported version {0}")]
    UnsupportedVersion(u32),
    #[error("string field longer than 65535 bytes")]
    FieldTooLong,
    #[error("record name is not valid UTF-8")]
    Utf8(#[from] std::string::FromUtf8Error),
    #[error("line {line}: {message}")]
    Import { line: usize, message: String },
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

fn write_str<W: Write>(w: &mut W, s: &str) -> Result<(), FormatError> {
    let len = u16::try_from(s.len()).map_err(|_| FormatError::FieldTooLong)?;
    w.write_all(&len.to_le_bytes())?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

fn read_u16<R: Read>(r: &mut R) -> io::Result<u16> {
    let mut b = [0u8; 2];
    r.read_exact(&mut b)?;
    Ok(u16::from_le_bytes(b))
}

fn read_u32<R: Read>(r: &mut R) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_str<R: Read>(r: &mut R) -> Result<String, FormatError> {
    let len = read_u16(r)? as usize;
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    Ok(String::from_utf8(buf)?)
}

/// Components are narrowed to `f32` on disk.
pub fn write_database<W: Write>(db: &EmbeddingDatabase, mut w: W) -> Result<(), FormatError> {
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(db.dimension() as u32).to_le_bytes())?;
    w.write_all(&(db.len() as u32).to_le_bytes())?;
    for record in db.records() {
        write_str(&mut w, &record.name)?;
        write_str(&mut w, &record.audio_key)?;
        for &c in record.embedding.components() {
            w.write_all(&(c as f32).to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_database<R: Read>(mut r: R) -> Result<EmbeddingDatabase, FormatError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(FormatError::BadMagic(magic));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let dimension = read_u32(&mut r)? as usize;
    let count = read_u32(&mut r)? as usize;
    let mut entries = Vec::with_capacity(count.min(1 << 16));
    for _ in 0..count {
        let name = read_str(&mut r)?;
        let audio_key = read_str(&mut r)?;
        let mut components = Vec::with_capacity(dimension);
        let mut b = [0u8; 4];
        for _ in 0..dimension {
            r.read_exact(&mut b)?;
            components.push(f32::from_le_bytes(b) as f64);
        }
        entries.push((name, EmbeddingVector::new(components)?, audio_key));
    }
    Ok(EmbeddingDatabase::build(entries)?)
}

/// Parses `name, audio_key, c0, c1, ...` lines. Blank lines and `#` comments are skipped.
pub fn parse_text_import(text: &str) -> Result<EmbeddingDatabase, FormatError> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| FormatError::Import { line: i + 1, message };
        let mut fields = line.split(',').map(str::trim);
        let name = fields
            .next()
            .filter(|s| !s.is_empty())
            .ok_or_else(|| err("missing name".into()))?;
        let audio_key = fields
            .next()
            .filter(|s| !s.is_empty())
            .ok_or_else(|| err("missing audio key".into()))?;
        let components = fields
            .map(|f| f.parse::<f64>().map_err(|e| err(format!("bad component {f:?}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let embedding = EmbeddingVector::new(components).map_err(|e| err(e.to_string()))?;
        entries.push((name.to_string(), embedding, audio_key.to_string()));
    }
    Ok(EmbeddingDatabase::build(entries)?)
}
