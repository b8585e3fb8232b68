//! The closed catalog of degradation factors and the spec that selects one.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cause category of a factor, as grouped in the noise-factor taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Cause {
    UnfavourableLight = 1,
    AdverseWeather = 2,
    OpticObstruction = 3,
    IspFailure = 4,
    SensorNoise = 5,
    VehicleMotion = 6,
}

impl Cause {
    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn label(self) -> &'static str {
        match self {
            Cause::UnfavourableLight => "unfavourable light",
            Cause::AdverseWeather => "adverse weather",
            Cause::OpticObstruction => "optic obstruction",
            Cause::IspFailure => "ISP failure",
            Cause::SensorNoise => "internal sensor noise",
            Cause::VehicleMotion => "vehicle motion",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    LowLight,
    NightLight,
    ExtremeLight,
    StrongLight,
    Rain,
    Fog,
    Snow,
    Mud,
    Droplets,
    Jpeg,
    Oversharpen,
    NoDemosaic,
    NoBayer,
    Gaussian,
    Uniform,
    Impulse,
    Poisson,
    Defocus,
    Motion,
}

impl Factor {
    pub const ALL: [Factor; 19] = [
        Factor::LowLight,
        Factor::NightLight,
        Factor::ExtremeLight,
        Factor::StrongLight,
        Factor::Rain,
        Factor::Fog,
        Factor::Snow,
        Factor::Mud,
        Factor::Droplets,
        Factor::Jpeg,
        Factor::Oversharpen,
        Factor::NoDemosaic,
        Factor::NoBayer,
        Factor::Gaussian,
        Factor::Uniform,
        Factor::Impulse,
        Factor::Poisson,
        Factor::Defocus,
        Factor::Motion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Factor::LowLight => "low_light",
            Factor::NightLight => "night_light",
            Factor::ExtremeLight => "extreme_light",
            Factor::StrongLight => "strong_light",
            Factor::Rain => "rain",
            Factor::Fog => "fog",
            Factor::Snow => "snow",
            Factor::Mud => "mud",
            Factor::Droplets => "droplets",
            Factor::Jpeg => "jpeg",
            Factor::Oversharpen => "oversharpen",
            Factor::NoDemosaic => "no_demosaic",
            Factor::NoBayer => "no_bayer",
            Factor::Gaussian => "gaussian",
            Factor::Uniform => "uniform",
            Factor::Impulse => "impulse",
            Factor::Poisson => "poisson",
            Factor::Defocus => "defocus",
            Factor::Motion => "motion",
        }
    }

    pub fn cause(self) -> Cause {
        use Factor::*;
        match self {
            LowLight | NightLight | ExtremeLight | StrongLight => Cause::UnfavourableLight,
            Rain | Fog | Snow => Cause::AdverseWeather,
            Mud | Droplets => Cause::OpticObstruction,
            Jpeg | Oversharpen | NoDemosaic | NoBayer => Cause::IspFailure,
            Gaussian | Uniform | Impulse | Poisson => Cause::SensorNoise,
            Defocus | Motion => Cause::VehicleMotion,
        }
    }

    pub fn needs_depth(self) -> bool {
        matches!(self, Factor::Rain | Factor::Fog | Factor::Snow)
    }

    /// True when the operator is a procedural stand-in for a learned model,
    /// an external renderer or hand-made mask assets.
    pub fn is_surrogate(self) -> bool {
        matches!(
            self,
            Factor::LowLight
                | Factor::NightLight
                | Factor::ExtremeLight
                | Factor::Rain
                | Factor::Snow
                | Factor::Droplets
        )
    }

    /// Level on the scale of the library or asset set the factor is modelled
    /// on (e.g. corruption levels {1, 3, 5}).
    pub fn native_severity(self, severity: Severity) -> u8 {
        let i = severity.index();
        match self {
            Factor::StrongLight
            | Factor::Gaussian
            | Factor::Impulse
            | Factor::Defocus
            | Factor::Motion => [1, 3, 5][i],
            Factor::Droplets => [2, 3, 4][i],
            _ => severity.get(),
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Factor::LowLight => "iterated quadratic darkening curve with highlight preservation",
            Factor::NightLight => "reduced darkening plus light-source halos and 4-ray glare streaks",
            Factor::ExtremeLight => "low-light darkening applied on top of night light",
            Factor::StrongLight => "HSV value shift",
            Factor::Rain => "seeded rain streaks plus depth-dependent rain veil",
            Factor::Fog => "Koschmieder scattering over metric depth",
            Factor::Snow => "procedural snow mask blended toward a tinted field, then depth veiling",
            Factor::Mud => "dilated noisy blobs blended with a mud colour at intensity 0.7",
            Factor::Droplets => "refracting elliptical droplets with blurred, flipped content",
            Factor::Jpeg => "JPEG encode/decode round trip",
            Factor::Oversharpen => "3x3 sharpening kernel blended with the identity",
            Factor::NoDemosaic => "RGGB Bayer mosaic left in three planes",
            Factor::NoBayer => "grayscale luma replicated to three channels",
            Factor::Gaussian => "additive Gaussian noise",
            Factor::Uniform => "additive zero-mean uniform noise",
            Factor::Impulse => "salt-and-pepper pixel replacement",
            Factor::Poisson => "additive Poisson noise",
            Factor::Defocus => "anti-aliased disk blur",
            Factor::Motion => "Gaussian-weighted linear motion blur",
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Factor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Factor::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownFactor(s.to_string()))
    }
}

/// Severity level in `{1, 2, 3}` (3 is the strongest).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Severity(u8);

impl Severity {
    pub const ALL: [Severity; 3] = [Severity(1), Severity(2), Severity(3)];

    pub fn new(level: u8) -> Result<Self> {
        if (1..=3).contains(&level) {
            Ok(Self(level))
        } else {
            Err(Error::InvalidArgument(format!("severity {level} outside 1..=3")))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    /// Selects the entry for this level from a three-level table.
    pub fn pick<T: Copy>(self, table: [T; 3]) -> T {
        table[self.index()]
    }
}

impl TryFrom<u8> for Severity {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        Severity::new(v)
    }
}

impl From<Severity> for u8 {
    fn from(s: Severity) -> u8 {
        s.0
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One fully determined corruption: factor, level, seed and optional
/// parameter overrides keyed by parameter name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradationSpec {
    pub factor: Factor,
    pub severity: Severity,
    pub seed: u64,
    #[serde(default)]
    pub overrides: BTreeMap<String, f64>,
}

impl DegradationSpec {
    pub fn new(factor: Factor, severity: Severity, seed: u64) -> Self {
        Self {
            factor,
            severity,
            seed,
            overrides: BTreeMap::new(),
        }
    }

    pub fn with_override(mut self, key: &str, value: f64) -> Self {
        self.overrides.insert(key.to_string(), value);
        self
    }
}
