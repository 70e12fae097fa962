//! Wideband scene generation: modulation registry, rejection-sampled scene
//! configs, per-class burst synthesis, SNR-calibrated composition, and
//! structural technology emulation.

pub mod burst;
pub mod compose;
pub mod records;
pub mod registry;
pub mod sampler;
pub mod tech;

pub use burst::synthesize_burst;
pub use compose::{compose_scene, measure_inband_snr_db};
pub use records::{
    BurstConfig, LinkDir, RuTile, SceneRecord, SceneSpec, SignalRecord, SsbPattern, TechAttrs,
    TechChoice, Technology, WlanStandard, SCENE_SCHEMA,
};
pub use registry::{family_of_name, ModClass, ModFamily, ModParams, Registry};
pub use sampler::sample_scene_config;
pub use tech::emulate_technology;
