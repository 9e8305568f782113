//! Unit-tagged rates.
//!
//! Internally time is in μs and every frequency is an angular rate in rad/μs.
//! Decay rates (photon loss, dephasing) are plain rates in 1/μs. Textual input
//! must always carry a suffix; a bare number is rejected.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An angular frequency in rad/μs.
///
/// Parses `"12.5mhz"` as 2π × 12.5 rad/μs and `"78.54rad/us"` verbatim.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct AngularRate(pub f64);

/// A plain decay rate in 1/μs, written `"0.05/us"`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct DecayRate(pub f64);

impl AngularRate {
    pub fn from_mhz(f: f64) -> Self {
        AngularRate(TAU * f)
    }

    pub fn rad_per_us(self) -> f64 {
        self.0
    }

    pub fn mhz(self) -> f64 {
        self.0 / TAU
    }
}

impl DecayRate {
    pub fn per_us(self) -> f64 {
        self.0
    }
}

fn split_number(s: &str) -> Result<(f64, String)> {
    let t = s.trim();
    let idx = t
        .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')))
        .unwrap_or(t.len());
    // an exponent marker directly followed by a unit letter is part of the unit
    let (mut num, mut unit) = t.split_at(idx);
    if num.ends_with(['e', 'E']) && !unit.is_empty() {
        num = &t[..idx - 1];
        unit = &t[idx - 1..];
    }
    let value: f64 = num
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse number in {s:?}")))?;
    if !value.is_finite() {
        return Err(Error::Config(format!("non-finite value in {s:?}")));
    }
    Ok((value, unit.trim().to_ascii_lowercase().replace('μ', "u")))
}

impl FromStr for AngularRate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (v, unit) = split_number(s)?;
        match unit.as_str() {
            "mhz" | "2pi*mhz" | "2pimhz" => Ok(AngularRate::from_mhz(v)),
            "rad/us" | "rad/μs" => Ok(AngularRate(v)),
            "" => Err(Error::Config(format!(
                "{s:?} has no unit; write e.g. \"12.5mhz\" (2π×MHz) or \"78.54rad/us\""
            ))),
            other => Err(Error::Config(format!(
                "unknown angular-rate unit {other:?} in {s:?}"
            ))),
        }
    }
}

impl FromStr for DecayRate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (v, unit) = split_number(s)?;
        if v < 0.0 {
            return Err(Error::Config(format!("negative decay rate {s:?}")));
        }
        match unit.as_str() {
            "/us" | "1/us" | "per-us" => Ok(DecayRate(v)),
            "" => Err(Error::Config(format!(
                "{s:?} has no unit; decay rates are written e.g. \"0.05/us\""
            ))),
            other => Err(Error::Config(format!(
                "unsupported decay-rate unit {other:?} in {s:?}; use \"/us\""
            ))),
        }
    }
}

impl fmt::Display for AngularRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}rad/us", self.0)
    }
}

impl fmt::Display for DecayRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/us", self.0)
    }
}

macro_rules! serde_via_str {
    ($t:ty) => {
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

serde_via_str!(AngularRate);
serde_via_str!(DecayRate);
