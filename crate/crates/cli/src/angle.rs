//! Tilt angles written as multiples of π (`"pi/6"`, `"5pi/12"`) or radians.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::f64::consts::PI;
use std::fmt;

/// An angle that remembers how it was written, so outputs echo the input.
#[derive(Debug, Clone, PartialEq)]
pub struct Angle {
    text: String,
    radians: f64,
}

impl Angle {
    pub fn parse(text: &str) -> Result<Self, String> {
        let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let radians = parse_radians(&t).ok_or_else(|| format!("cannot read angle {text:?}"))?;
        if !radians.is_finite() {
            return Err(format!("angle {text:?} is not finite"));
        }
        Ok(Self { text: t, radians })
    }

    /// `p·π/q` written in the canonical short form.
    pub fn pi_fraction(p: i64, q: i64) -> Self {
        let text = match (p, q) {
            (0, _) => "0".to_string(),
            (1, 1) => "pi".to_string(),
            (-1, 1) => "-pi".to_string(),
            (p, 1) => format!("{p}pi"),
            (1, q) => format!("pi/{q}"),
            (-1, q) => format!("-pi/{q}"),
            (p, q) => format!("{p}pi/{q}"),
        };
        Self {
            radians: p as f64 * PI / q as f64,
            text,
        }
    }

    pub fn radians(&self) -> f64 {
        self.radians
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Filesystem-safe rendering, e.g. `5pi_12`.
    pub fn slug(&self) -> String {
        self.text
            .chars()
            .map(|c| match c {
                '/' => '_',
                '-' => 'm',
                '*' => 'x',
                c => c,
            })
            .collect()
    }
}

fn parse_radians(t: &str) -> Option<f64> {
    if t.is_empty() {
        return None;
    }
    let Some(at) = t.find("pi") else {
        return t.parse::<f64>().ok();
    };
    let (coef, rest) = t.split_at(at);
    let rest = &rest[2..];
    let coef = coef.strip_suffix('*').unwrap_or(coef);
    let c = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => s.parse::<f64>().ok()?,
    };
    let d = match rest {
        "" => 1.0,
        s => s.strip_prefix('/')?.parse::<f64>().ok()?,
    };
    if d == 0.0 {
        return None;
    }
    Some(c * PI / d)
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.text)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) => Angle::parse(&s).map_err(serde::de::Error::custom),
            Raw::Number(x) => Angle::parse(&format!("{x}")).map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_multiples_of_pi() {
        for (s, v) in [
            ("pi/6", PI / 6.0),
            ("5pi/12", 5.0 * PI / 12.0),
            ("-pi/3", -PI / 3.0),
            ("2*pi", 2.0 * PI),
            ("0", 0.0),
            ("0.25", 0.25),
            ("pi", PI),
        ] {
            assert_eq!(Angle::parse(s).unwrap().radians(), v, "{s}");
        }
        assert!(Angle::parse("pi/0").is_err());
        assert!(Angle::parse("tau").is_err());
    }

    #[test]
    fn canonical_fractions_round_trip() {
        for (p, q) in [(1, 6), (5, 12), (0, 3), (-1, 2), (2, 1)] {
            let a = Angle::pi_fraction(p, q);
            assert_eq!(Angle::parse(a.text()).unwrap(), a);
        }
        assert_eq!(Angle::pi_fraction(5, 12).slug(), "5pi_12");
    }
}
