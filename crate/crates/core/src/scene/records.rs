//! Scene and signal metadata records — the ground truth every downstream
//! stage (captions, instructions, benchmarks) is derived from.

use crate::error::{Error, Result};
use crate::impair::ImpairmentSpec;
use crate::scene::registry::ModClass;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const SCENE_SCHEMA: &str = "rf-scene/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Technology {
    Nr,
    Lte,
    Umts,
    Wlan,
    Dvbs2,
    Bt,
    Generic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LinkDir {
    Dl,
    Ul,
    Na,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SsbPattern {
    A,
    B,
    C,
    D,
    #[serde(rename = "NA")]
    Na,
}

impl SsbPattern {
    pub fn label(&self) -> &'static str {
        match self {
            SsbPattern::A => "A",
            SsbPattern::B => "B",
            SsbPattern::C => "C",
            SsbPattern::D => "D",
            SsbPattern::Na => "N/A",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WlanStandard {
    /// 802.11ax
    Ax,
    /// 802.11be
    Be,
}

impl WlanStandard {
    pub fn label(&self) -> &'static str {
        match self {
            WlanStandard::Ax => "11ax",
            WlanStandard::Be => "11be",
        }
    }
}

/// One OFDMA resource-unit tile and the users assigned to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuTile {
    pub index: u32,
    pub f_low: f64,
    pub f_high: f64,
    pub user_ids: Vec<u32>,
}

/// Technology-specific latent attributes, recorded verbatim as ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tech", rename_all = "snake_case")]
pub enum TechAttrs {
    Nr {
        scs_khz: u32,
        ssb_pattern: SsbPattern,
        csirs_count: u32,
        srs_count: u32,
        ue_count: u32,
    },
    Wlan {
        standard: WlanStandard,
        user_count: u32,
        ru_layout: Vec<RuTile>,
    },
    Other {
        attrs: BTreeMap<String, serde_json::Value>,
    },
}

impl TechAttrs {
    pub fn none() -> Self {
        TechAttrs::Other {
            attrs: BTreeMap::new(),
        }
    }
}

/// One burst: technology, modulation, support intervals, SNR, attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalRecord {
    pub id: u32,
    pub technology: Technology,
    pub link: LinkDir,
    pub mod_class: ModClass,
    /// `[t_start, t_end]` in seconds.
    pub t_interval: [f64; 2],
    /// `[f_low, f_high]` in Hz (baseband, may be negative).
    pub f_interval: [f64; 2],
    pub snr_db: f64,
    pub tech_attrs: TechAttrs,
}

impl SignalRecord {
    pub fn t_start(&self) -> f64 {
        self.t_interval[0]
    }
    pub fn t_end(&self) -> f64 {
        self.t_interval[1]
    }
    pub fn f_low(&self) -> f64 {
        self.f_interval[0]
    }
    pub fn f_high(&self) -> f64 {
        self.f_interval[1]
    }
    pub fn duration(&self) -> f64 {
        self.t_interval[1] - self.t_interval[0]
    }
    pub fn bandwidth(&self) -> f64 {
        self.f_interval[1] - self.f_interval[0]
    }
    pub fn f_center(&self) -> f64 {
        0.5 * (self.f_interval[0] + self.f_interval[1])
    }

    /// Interval invariants plus containment in the scene extent.
    pub fn validate(&self, fs: f64, scene_duration: f64) -> Result<()> {
        if !(self.t_interval[0] < self.t_interval[1]) {
            return Err(Error::Input(format!(
                "signal {}: empty time interval",
                self.id
            )));
        }
        if !(self.f_interval[0] < self.f_interval[1]) {
            return Err(Error::Input(format!(
                "signal {}: empty frequency interval",
                self.id
            )));
        }
        if self.t_interval[0] < 0.0 || self.t_interval[1] > scene_duration + 1e-12 {
            return Err(Error::Input(format!(
                "signal {}: time interval outside scene extent",
                self.id
            )));
        }
        if self.f_interval[0] < -fs / 2.0 - 1e-9 || self.f_interval[1] > fs / 2.0 + 1e-9 {
            return Err(Error::Input(format!(
                "signal {}: frequency interval outside [-fs/2, fs/2]",
                self.id
            )));
        }
        Ok(())
    }
}

/// A wideband RF scene: ordered signal list plus global parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRecord {
    pub schema: String,
    pub scene_id: String,
    pub fs: f64,
    pub duration: f64,
    /// Insertion order (not sorted).
    pub signals: Vec<SignalRecord>,
    pub overlap_prob: f64,
    pub seed: u64,
    /// Candidates rejected while sampling this scene.
    pub rejections: u32,
    #[serde(default)]
    pub impairments: Vec<ImpairmentSpec>,
    #[serde(default)]
    pub iq_path: Option<String>,
}

impl SceneRecord {
    pub fn num_samples(&self) -> usize {
        (self.duration * self.fs).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.signals.is_empty() {
            return Err(Error::Input("scene has no signals".into()));
        }
        for sig in &self.signals {
            sig.validate(self.fs, self.duration)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?)
            .map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn read_json(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Configuration for one planned burst of a generic scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurstConfig {
    pub mod_class: ModClass,
    pub t_start: f64,
    pub duration: f64,
    pub f_center: f64,
    pub bandwidth: f64,
    pub snr_db: f64,
    pub symbol_rate: f64,
}

impl BurstConfig {
    pub fn t_interval(&self) -> [f64; 2] {
        [self.t_start, self.t_start + self.duration]
    }

    pub fn f_interval(&self) -> [f64; 2] {
        [
            self.f_center - self.bandwidth / 2.0,
            self.f_center + self.bandwidth / 2.0,
        ]
    }

    pub fn validate(&self, fs: f64, scene_duration: f64) -> Result<()> {
        if self.duration <= 0.0 || self.t_start < 0.0 {
            return Err(Error::Input("burst: non-positive duration or negative start".into()));
        }
        if self.t_start + self.duration > scene_duration + 1e-12 {
            return Err(Error::Input("burst: extends past scene end".into()));
        }
        if self.bandwidth <= 0.0 {
            return Err(Error::Input("burst: non-positive bandwidth".into()));
        }
        if self.f_center.abs() + self.bandwidth / 2.0 > fs / 2.0 + 1e-9 {
            return Err(Error::Input("burst: band outside [-fs/2, fs/2]".into()));
        }
        Ok(())
    }
}

/// Which kind of scene a sampler draw produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TechChoice {
    Generic,
    NrDl,
    NrUl,
    LteDl,
    LteUl,
    Umts,
    WlanAx,
    WlanBe,
    Dvbs2,
    Bt,
}

/// Sampler configuration: what a scene may contain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub fs: f64,
    pub duration: f64,
    /// Inclusive signal-count range for generic scenes.
    pub signal_count: (u32, u32),
    /// Weighted technology mix; weights need not sum to 1.
    pub technology_mix: Vec<(TechChoice, f64)>,
    /// Probability that a generic burst is allowed to co-channel-overlap
    /// (both axes) an earlier burst.
    pub overlap_prob: f64,
    pub snr_db_range: (f64, f64),
    /// Rejection budget for one scene.
    pub max_rejections: u32,
    /// Candidate class names for generic bursts; empty means the whole
    /// registry.
    pub classes: Vec<String>,
}

impl Default for SceneSpec {
    fn default() -> Self {
        SceneSpec {
            fs: 7_680_000.0,
            duration: 0.02,
            signal_count: (2, 5),
            technology_mix: vec![(TechChoice::Generic, 1.0)],
            overlap_prob: 0.0,
            snr_db_range: (10.0, 50.0),
            max_rejections: 1000,
            classes: Vec::new(),
        }
    }
}
