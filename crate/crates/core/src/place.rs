use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A place of the rationals: the archimedean place or a prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Infinite,
    Prime(u64),
}

impl Place {
    pub fn prime(self) -> Option<u64> {
        match self {
            Place::Prime(p) => Some(p),
            Place::Infinite => None,
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinite => write!(f, "inf"),
            Place::Prime(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for Place {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if matches!(s.to_ascii_lowercase().as_str(), "inf" | "infinity" | "oo" | "∞") {
            return Ok(Place::Infinite);
        }
        let p: u64 = s
            .parse()
            .map_err(|_| Error::Config(format!("cannot parse place {s:?}")))?;
        if !is_prime(p) {
            return Err(Error::Config(format!("place {p} is not prime")));
        }
        Ok(Place::Prime(p))
    }
}

impl Serialize for Place {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Place::Infinite => serializer.serialize_str("inf"),
            Place::Prime(p) => serializer.serialize_u64(*p),
        }
    }
}

impl<'de> Deserialize<'de> for Place {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(deserializer)?;
        let s = match v {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            other => return Err(serde::de::Error::custom(format!("bad place {other}"))),
        };
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Validated place set: must contain the archimedean place; sorted, deduplicated.
pub fn normalize_places(places: &[Place]) -> Result<Vec<Place>> {
    let mut v = places.to_vec();
    v.sort();
    v.dedup();
    if !v.contains(&Place::Infinite) {
        return Err(Error::Config("the place set S must contain inf".into()));
    }
    for p in &v {
        if let Place::Prime(p) = p {
            if !is_prime(*p) {
                return Err(Error::Config(format!("place {p} is not prime")));
            }
        }
    }
    Ok(v)
}
