//! Ambient-temperature inference through a vision-language model.

mod backend;
mod eval;
mod parse;

pub use backend::{FixtureVlm, HttpVlm, InferRequest, InferResponse, VlmBackend, VLM_URL_ENV};
pub use eval::{evaluate_tolerance, parse_eval_cases, EvalCase, ToleranceEvaluation, DEFAULT_TOLERANCE_C};
pub use parse::{parse_temperature, PLAUSIBLE_MAX_C, PLAUSIBLE_MIN_C};

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image::ImageRef;

#[derive(Debug, Error)]
pub enum VlmError {
    #[error("backend did not answer within {timeout_ms} ms")]
    BackendTimeout { timeout_ms: u64 },
    #[error("backend error: {0}")]
    Backend(String),
    #[error("no temperature found in reply {raw_text:?}")]
    Parse { raw_text: String },
    #[error("evaluation needs at least one case")]
    EmptyEvaluation,
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("unknown prompt style {0:?}")]
    UnknownStyle(String),
    #[error("line {line}: {message}")]
    Input { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptStyle {
    #[default]
    Default,
}

impl FromStr for PromptStyle {
    type Err = VlmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "default" => Ok(PromptStyle::Default),
            other => Err(VlmError::UnknownStyle(other.to_string())),
        }
    }
}

pub const DEFAULT_PROMPT: &str = "Look at this photo of the surrounding space. Estimate the ambient temperature in the room in degrees Celsius. Reply with a single number or a narrow range.";

pub fn build_prompt(style: PromptStyle) -> &'static str {
    match style {
        PromptStyle::Default => DEFAULT_PROMPT,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseRule {
    SingleValue,
    RangeMidpoint,
    FahrenheitConverted,
}

impl fmt::Display for ParseRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseRule::SingleValue => "single_value",
            ParseRule::RangeMidpoint => "range_midpoint",
            ParseRule::FahrenheitConverted => "fahrenheit_converted",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureEstimate {
    pub celsius: f64,
    pub raw_text: String,
    pub parse_rule: ParseRule,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureQuery {
    pub image: ImageRef,
    pub prompt: String,
    pub timeout_ms: u64,
}

impl TemperatureQuery {
    pub fn new(image: ImageRef, prompt: impl Into<String>, timeout_ms: u64) -> Result<Self, VlmError> {
        let prompt = prompt.into();
        if prompt.trim().is_empty() {
            return Err(VlmError::InvalidQuery("prompt must not be empty".into()));
        }
        if timeout_ms == 0 {
            return Err(VlmError::InvalidQuery("timeout must be positive".into()));
        }
        Ok(Self {
            image,
            prompt,
            timeout_ms,
        })
    }

    /// Query with the canonical prompt.
    pub fn standard(image: ImageRef, timeout_ms: u64) -> Result<Self, VlmError> {
        Self::new(image, build_prompt(PromptStyle::Default), timeout_ms)
    }
}

/// Sends the prompt and image to `backend` and parses the reply.
pub fn estimate_temperature(
    backend: &dyn VlmBackend,
    query: &TemperatureQuery,
) -> Result<TemperatureEstimate, VlmError> {
    let reply = backend.infer(&query.prompt, &query.image, Duration::from_millis(query.timeout_ms))?;
    parse_temperature(&reply)
}
