//! Complex numbers as "a+bi" strings, on the command line and in config files.

use chiral_susy::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Accepts "a", "bi", "a+bi", "a-bi", "i", "-i", with exponents
/// ("1e-3+2e-2i") and optional spaces.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err("empty complex number".into());
    }
    let z: Complex64 = compact
        .replace('j', "i")
        .parse()
        .map_err(|_| format!("cannot parse {s:?} as a complex number a+bi"))?;
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(format!("{s:?} is not finite"));
    }
    Ok(z)
}

pub fn format_complex(z: Complex64) -> String {
    if z.im.is_sign_negative() {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// Serde adapter storing a complex number as its "a+bi" string.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cx(pub Complex64);

impl Serialize for Cx {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_complex(self.0))
    }
}

impl<'de> Deserialize<'de> for Cx {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Real(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) => parse_complex(&s).map(Cx).map_err(serde::de::Error::custom),
            Raw::Real(x) => Ok(Cx(Complex64::new(x, 0.0))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_sign_patterns() {
        let cases = [
            ("0+2i", (0.0, 2.0)),
            ("2i", (0.0, 2.0)),
            ("-i", (0.0, -1.0)),
            ("1", (1.0, 0.0)),
            ("-0.5+2i", (-0.5, 2.0)),
            ("1 - 3i", (1.0, -3.0)),
            ("1e-3+2e-2i", (1e-3, 2e-2)),
            ("-1e+2-1e-2i", (-100.0, -0.01)),
        ];
        for (s, (re, im)) in cases {
            assert_eq!(parse_complex(s).unwrap(), Complex64::new(re, im), "{s}");
        }
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "a+bi", "1+2", "1+2i+3", "inf", "NaN"] {
            assert!(parse_complex(s).is_err(), "{s}");
        }
    }

    #[test]
    fn formatting_round_trips() {
        for z in [Complex64::new(1.5, -2.0), Complex64::new(-0.0, 0.25), Complex64::new(3.0, -0.0)] {
            assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
        }
    }
}
