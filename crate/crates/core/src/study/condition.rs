use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::StudyError;
use crate::haptics::PatternId;
use crate::thermal::ThermalMode;

/// Thermal half of a stimulus: hot or cold plate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Thermal {
    Hot,
    Cold,
}

impl Thermal {
    pub const ALL: [Thermal; 2] = [Thermal::Hot, Thermal::Cold];

    pub fn code(self) -> &'static str {
        match self {
            Thermal::Hot => "h",
            Thermal::Cold => "c",
        }
    }

    pub fn mode(self) -> ThermalMode {
        match self {
            Thermal::Hot => ThermalMode::Hot,
            Thermal::Cold => ThermalMode::Cold,
        }
    }
}

/// One of the ten vibration x thermal stimuli.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatternCondition {
    pub vibration: PatternId,
    pub thermal: Thermal,
}

/// Number of distinct stimuli.
pub const CONDITION_COUNT: usize = 10;

impl PatternCondition {
    pub const fn new(vibration: PatternId, thermal: Thermal) -> Self {
        Self { vibration, thermal }
    }

    /// Hot conditions first, each in WC, GT, WS, FR, MW order.
    pub fn all() -> [PatternCondition; CONDITION_COUNT] {
        let mut out = [PatternCondition::new(PatternId::WC, Thermal::Hot); CONDITION_COUNT];
        for (t, thermal) in Thermal::ALL.into_iter().enumerate() {
            for (v, vibration) in PatternId::ALL.into_iter().enumerate() {
                out[t * 5 + v] = PatternCondition::new(vibration, thermal);
            }
        }
        out
    }

    /// Position in [`PatternCondition::all`].
    pub fn index(self) -> usize {
        let t = match self.thermal {
            Thermal::Hot => 0,
            Thermal::Cold => 1,
        };
        t * 5 + self.vibration.index()
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::all().get(index).copied()
    }
}

impl fmt::Display for PatternCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.vibration.code(), self.thermal.code())
    }
}

impl FromStr for PatternCondition {
    type Err = StudyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::all()
            .into_iter()
            .find(|c| c.to_string() == s.trim())
            .ok_or_else(|| StudyError::UnknownCondition(s.to_string()))
    }
}

impl Serialize for PatternCondition {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PatternCondition {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
