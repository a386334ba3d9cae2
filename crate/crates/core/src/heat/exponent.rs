use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A half-integer power of `t`, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Exponent(pub i32);

impl Exponent {
    pub fn half(twice: i32) -> Self {
        Exponent(twice)
    }

    pub fn int(e: i32) -> Self {
        Exponent(2 * e)
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    /// All exponents from `lo` to `hi` inclusive in half steps.
    pub fn range(lo: Exponent, hi: Exponent) -> Vec<Exponent> {
        (lo.0..=hi.0).map(Exponent).collect()
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidInput(format!("not a half-integer exponent: {s:?}"));
        if let Some(num) = s.strip_suffix("/2") {
            let n: i32 = num.trim().parse().map_err(|_| bad())?;
            if n % 2 == 0 {
                return Err(bad());
            }
            return Ok(Exponent(n));
        }
        if let Ok(n) = s.parse::<i32>() {
            return Ok(Exponent(2 * n));
        }
        let v: f64 = s.parse().map_err(|_| bad())?;
        let twice = (2.0 * v).round();
        if (2.0 * v - twice).abs() > 1e-12 {
            return Err(bad());
        }
        Ok(Exponent(twice as i32))
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            S(String),
            F(f64),
        }
        match Raw::deserialize(d)? {
            Raw::S(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::F(v) => v.to_string().parse().map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_parse() {
        for twice in -3..=4 {
            let e = Exponent(twice);
            assert_eq!(e.to_string().parse::<Exponent>().unwrap(), e);
        }
        assert_eq!(Exponent(-1).to_string(), "-1/2");
        assert_eq!("-0.5".parse::<Exponent>().unwrap(), Exponent(-1));
        assert!("0.3".parse::<Exponent>().is_err());
        assert!("2/2".parse::<Exponent>().is_err());
        let json = serde_json::to_string(&Exponent(3)).unwrap();
        assert_eq!(json, "\"3/2\"");
        assert_eq!(
            serde_json::from_str::<Exponent>("1.5").unwrap(),
            Exponent(3)
        );
    }
}
