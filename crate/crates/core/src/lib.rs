//! Synthetic RF scene tooling: wideband scene generation with exact metadata,
//! channel impairments, STFT spectrograms, deterministic captioning,
//! instruction-dataset synthesis, benchmark construction/scoring, and a
//! forward-only reference implementation of the spectrogram-conditioned
//! transformer math.
//!
//! Everything is deterministic: a scene, caption, instruction set, or
//! benchmark is a pure function of `(seed, config)`.

pub mod bench;
pub mod caption;
pub mod error;
pub mod impair;
pub mod instruct;
pub mod iq;
pub mod model;
pub mod pipeline;
pub mod rng;
pub mod scene;
pub mod spectro;

pub use error::{Error, Result};
pub use iq::IqBuffer;
pub use scene::{BurstConfig, LinkDir, ModClass, SceneRecord, SceneSpec, SignalRecord, Technology};
