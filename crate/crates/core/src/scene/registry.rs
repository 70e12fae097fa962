//! Modulation-class registry.
//!
//! Sixteen built-in classes across the six families used for family-level
//! scoring. The registry is extensible: callers may register additional
//! classes as long as the name maps to a family.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModFamily {
    Psk,
    Qam,
    Fsk,
    Ofdm,
    Am,
    Fm,
}

impl ModFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ModFamily::Psk => "psk",
            ModFamily::Qam => "qam",
            ModFamily::Fsk => "fsk",
            ModFamily::Ofdm => "ofdm",
            ModFamily::Am => "am",
            ModFamily::Fm => "fm",
        }
    }

    pub const ALL: [ModFamily; 6] = [
        ModFamily::Psk,
        ModFamily::Qam,
        ModFamily::Fsk,
        ModFamily::Ofdm,
        ModFamily::Am,
        ModFamily::Fm,
    ];
}

/// Class-specific synthesis parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModParams {
    Psk { order: u32 },
    Qam { order: u32 },
    /// Continuous-phase FSK; `gaussian` selects a Gaussian frequency pulse.
    Fsk { tones: u32, gaussian: bool },
    /// Minimum-shift keying (h = 0.5 binary CPFSK).
    Msk,
    Ofdm { subcarriers: u32 },
    Am { ssb: bool },
    Fm { wide: bool },
}

/// One entry of the modulation registry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModClass {
    pub name: String,
    pub family: ModFamily,
    pub params: ModParams,
}

/// Total family map over class names. `msk`/`gfsk` are FSK-family; the
/// `psk`/`qam`/`ofdm`/`am`/`fm` substrings decide the rest.
pub fn family_of_name(name: &str) -> Result<ModFamily> {
    let n = name.to_ascii_lowercase();
    if n.contains("msk") || n.contains("fsk") {
        Ok(ModFamily::Fsk)
    } else if n.contains("psk") {
        Ok(ModFamily::Psk)
    } else if n.contains("qam") {
        Ok(ModFamily::Qam)
    } else if n.contains("ofdm") {
        Ok(ModFamily::Ofdm)
    } else if n.starts_with("am") {
        Ok(ModFamily::Am)
    } else if n.starts_with("fm") {
        Ok(ModFamily::Fm)
    } else {
        Err(Error::UnknownModClass(name.to_string()))
    }
}

/// Registry of modulation classes keyed by canonical lowercase name.
#[derive(Debug, Clone)]
pub struct Registry {
    classes: Vec<ModClass>,
}

impl Default for Registry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl Registry {
    /// The 16 built-in classes.
    pub fn builtin() -> Self {
        let mk = |name: &str, params: ModParams| ModClass {
            name: name.to_string(),
            family: family_of_name(name).expect("builtin class"),
            params,
        };
        Registry {
            classes: vec![
                mk("bpsk", ModParams::Psk { order: 2 }),
                mk("qpsk", ModParams::Psk { order: 4 }),
                mk("8psk", ModParams::Psk { order: 8 }),
                mk("16qam", ModParams::Qam { order: 16 }),
                mk("64qam", ModParams::Qam { order: 64 }),
                mk("256qam", ModParams::Qam { order: 256 }),
                mk(
                    "2fsk",
                    ModParams::Fsk {
                        tones: 2,
                        gaussian: false,
                    },
                ),
                mk(
                    "4fsk",
                    ModParams::Fsk {
                        tones: 4,
                        gaussian: false,
                    },
                ),
                mk(
                    "gfsk",
                    ModParams::Fsk {
                        tones: 2,
                        gaussian: true,
                    },
                ),
                mk("msk", ModParams::Msk),
                mk("ofdm-64", ModParams::Ofdm { subcarriers: 64 }),
                mk("ofdm-256", ModParams::Ofdm { subcarriers: 256 }),
                mk("am-dsb", ModParams::Am { ssb: false }),
                mk("am-ssb", ModParams::Am { ssb: true }),
                mk("fm-nb", ModParams::Fm { wide: false }),
                mk("fm-wb", ModParams::Fm { wide: true }),
            ],
        }
    }

    pub fn get(&self, name: &str) -> Result<&ModClass> {
        self.classes
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::UnknownModClass(name.to_string()))
    }

    pub fn names(&self) -> Vec<&str> {
        self.classes.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn classes(&self) -> &[ModClass] {
        &self.classes
    }

    /// Add a class; the name must have a derivable family and be unique.
    pub fn register(&mut self, class: ModClass) -> Result<()> {
        if self.classes.iter().any(|c| c.name == class.name) {
            return Err(Error::Config(format!(
                "class {} already registered",
                class.name
            )));
        }
        let derived = family_of_name(&class.name)?;
        if derived != class.family {
            return Err(Error::Config(format!(
                "class {} declares family {} but name derives {}",
                class.name,
                class.family.name(),
                derived.name()
            )));
        }
        self.classes.push(class);
        Ok(())
    }
}

/// Ratio of occupied bandwidth to symbol rate for a class. The declared
/// burst bandwidth is `symbol_rate * bandwidth_factor`.
///
/// Single-carrier linear classes use RRC roll-off 0.35; FSK classes use a
/// Carson-rule estimate; AM/FM interpret `symbol_rate` as the message
/// bandwidth; OFDM interprets it as the subcarrier spacing.
pub fn bandwidth_factor(params: &ModParams) -> f64 {
    match params {
        ModParams::Psk { .. } | ModParams::Qam { .. } => 1.0 + RRC_ROLL_OFF,
        // Tone offsets (2k - M + 1) * Rs/2, so dev_max = (M-1) * Rs/2:
        // Carson 2*(dev_max + Rs/2).
        ModParams::Fsk { tones, .. } => {
            let dev_max = (*tones as f64 - 1.0) * 0.5;
            2.0 * (dev_max + 0.5)
        }
        ModParams::Msk => 1.2,
        ModParams::Ofdm { subcarriers } => *subcarriers as f64,
        ModParams::Am { ssb } => {
            if *ssb {
                1.0
            } else {
                2.0
            }
        }
        // Carson 2*(dev + W): narrowband dev = 0.5 W, wideband dev = 4 W.
        ModParams::Fm { wide } => {
            if *wide {
                10.0
            } else {
                3.0
            }
        }
    }
}

/// Root-raised-cosine roll-off used by all single-carrier linear classes.
pub const RRC_ROLL_OFF: f64 = 0.35;

/// Symbol rate implied by a declared bandwidth for a class.
pub fn symbol_rate_for_bandwidth(params: &ModParams, bandwidth: f64) -> f64 {
    bandwidth / bandwidth_factor(params)
}
