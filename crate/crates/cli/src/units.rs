//! Unit-suffixed values in config documents, e.g. `"1.3e-14 kg"`.

use std::f64::consts::PI;

use serde::Deserialize;

use crate::error::CliError;

/// Accepted unit strings.
pub const UNITS: [&str; 8] = ["kg", "m", "s", "Hz", "rad/s", "K", "A", "dimensionless"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Mass,
    Length,
    Time,
    AngularFrequency,
    Temperature,
    Current,
    Dimensionless,
}

impl Dimension {
    fn expected(&self) -> &'static str {
        match self {
            Dimension::Mass => "kg",
            Dimension::Length => "m",
            Dimension::Time => "s",
            Dimension::AngularFrequency => "Hz or rad/s",
            Dimension::Temperature => "K",
            Dimension::Current => "A",
            Dimension::Dimensionless => "dimensionless",
        }
    }
}

/// A physical value as written in a config: always a string with a unit.
#[derive(Debug, Clone, Deserialize)]
#[serde(transparent)]
pub struct Quantity(pub String);

/// A dimensionless value: a bare number or `"<x> dimensionless"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Text(String),
}

/// Parsed value in SI units, plus a note when a conversion was applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub value: f64,
    pub note: Option<String>,
}

fn split(field: &str, text: &str) -> Result<(f64, String), CliError> {
    let mut parts = text.split_whitespace();
    let (Some(number), Some(unit), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(CliError::Parse(format!("{field}: expected \"<number> <unit>\", got {text:?}")));
    };
    let value: f64 = number
        .parse()
        .map_err(|_| CliError::Parse(format!("{field}: {number:?} is not a number")))?;
    if !value.is_finite() {
        return Err(CliError::Parse(format!("{field}: value must be finite")));
    }
    if !UNITS.contains(&unit) {
        return Err(CliError::Parse(format!("{field}: unit {unit:?} is not one of {}", UNITS.join(", "))));
    }
    Ok((value, unit.to_string()))
}

impl Quantity {
    pub fn parse(&self, field: &str, dim: Dimension) -> Result<Parsed, CliError> {
        let (value, unit) = split(field, &self.0)?;
        let plain = |v: f64| Ok(Parsed { value: v, note: None });
        match (dim, unit.as_str()) {
            (Dimension::AngularFrequency, "Hz") => Ok(Parsed {
                value: 2.0 * PI * value,
                note: Some(format!("{field}: {value} Hz converted to {:.6e} rad/s (x 2 pi)", 2.0 * PI * value)),
            }),
            (Dimension::AngularFrequency, "rad/s")
            | (Dimension::Mass, "kg")
            | (Dimension::Length, "m")
            | (Dimension::Time, "s")
            | (Dimension::Temperature, "K")
            | (Dimension::Current, "A")
            | (Dimension::Dimensionless, "dimensionless") => plain(value),
            _ => Err(CliError::Parse(format!("{field}: unit {unit:?} given, expected {}", dim.expected()))),
        }
    }

    pub fn si(&self, field: &str, dim: Dimension, notes: &mut Vec<String>) -> Result<f64, CliError> {
        let p = self.parse(field, dim)?;
        notes.extend(p.note);
        Ok(p.value)
    }
}

impl Scalar {
    pub fn value(&self, field: &str) -> Result<f64, CliError> {
        match self {
            Scalar::Number(v) if v.is_finite() => Ok(*v),
            Scalar::Number(_) => Err(CliError::Parse(format!("{field}: value must be finite"))),
            Scalar::Text(t) => Ok(Quantity(t.clone()).parse(field, Dimension::Dimensionless)?.value),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Quantity {
        Quantity(s.to_string())
    }

    #[test]
    fn hertz_is_converted_with_a_note() {
        let p = q("1.1e7 Hz").parse("frequency", Dimension::AngularFrequency).unwrap();
        assert!((p.value - 2.0 * PI * 1.1e7).abs() < 1e-3);
        assert!(p.note.unwrap().contains("2 pi"));
        let r = q("5 rad/s").parse("frequency", Dimension::AngularFrequency).unwrap();
        assert_eq!((r.value, r.note), (5.0, None));
    }

    #[test]
    fn wrong_or_unknown_units_are_rejected() {
        assert!(q("1 m").parse("mass", Dimension::Mass).is_err());
        assert!(q("1 g").parse("mass", Dimension::Mass).is_err());
        assert!(q("1kg").parse("mass", Dimension::Mass).is_err());
        assert!(q("NaN kg").parse("mass", Dimension::Mass).is_err());
        assert!(q("1 kg extra").parse("mass", Dimension::Mass).is_err());
    }

    #[test]
    fn scalars_accept_bare_numbers_or_dimensionless() {
        assert_eq!(Scalar::Number(0.3).value("v").unwrap(), 0.3);
        assert_eq!(Scalar::Text("0.3 dimensionless".into()).value("v").unwrap(), 0.3);
        assert!(Scalar::Text("0.3 kg".into()).value("v").is_err());
    }
}
