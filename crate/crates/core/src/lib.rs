//! Material recognition, haptic pattern synthesis, thermal feedback simulation
//! and user-study tooling for a vision-driven haptic rendering system.

pub mod embedding;
pub mod haptics;
pub mod image;
pub mod recognition;
pub mod service;
pub mod study;
pub mod thermal;
pub mod vlm;
