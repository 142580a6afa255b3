//! Unit-suffixed quantity parsing ("2 us", "500 kHz", "8 uT") and the
//! canonical base-SI formatting used when configs are re-emitted.

/// Physical dimension a config value must carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// Ordinary frequency in Hz.
    Frequency,
    /// Time in seconds.
    Time,
    /// Magnetic field in tesla.
    Field,
    /// Angle in radians (bare numbers accepted).
    Angle,
    /// Gyromagnetic ratio in Hz per tesla.
    Gyromagnetic,
}

impl Quantity {
    fn base_unit(self) -> &'static str {
        match self {
            Quantity::Frequency => "Hz",
            Quantity::Time => "s",
            Quantity::Field => "T",
            Quantity::Angle => "rad",
            Quantity::Gyromagnetic => "Hz/T",
        }
    }

    fn bare_numbers_allowed(self) -> bool {
        matches!(self, Quantity::Angle)
    }
}

const PREFIXES: &[(&str, f64)] = &[
    ("p", 1e-12),
    ("n", 1e-9),
    ("u", 1e-6),
    ("m", 1e-3),
    ("k", 1e3),
    ("M", 1e6),
    ("G", 1e9),
    ("", 1.0),
];

/// Parse a quantity string into its base-SI value.
pub fn parse_quantity(text: &str, q: Quantity) -> Result<f64, String> {
    let trimmed = text.trim();
    let split = trimmed
        .find(|c: char| c.is_alphabetic())
        .ok_or_else(|| format!("missing unit in {trimmed:?}; expected e.g. \"2 {}\"", example_unit(q)))?;
    let (num_part, unit_part) = trimmed.split_at(split);
    let value: f64 = num_part
        .trim()
        .parse()
        .map_err(|_| format!("invalid number {:?} in {trimmed:?}", num_part.trim()))?;
    let unit = unit_part.trim();
    let base = q.base_unit();
    let scale = match unit.strip_suffix(base) {
        Some(prefix) => PREFIXES
            .iter()
            .find(|(p, _)| *p == prefix)
            .map(|(_, s)| *s)
            .ok_or_else(|| format!("unknown SI prefix {prefix:?} in unit {unit:?}"))?,
        None => {
            return Err(format!(
                "unit {unit:?} does not match the expected dimension ({base})"
            ))
        }
    };
    let v = value * scale;
    if !v.is_finite() {
        return Err(format!("non-finite value {trimmed:?}"));
    }
    Ok(v)
}

fn example_unit(q: Quantity) -> &'static str {
    match q {
        Quantity::Frequency => "kHz",
        Quantity::Time => "us",
        Quantity::Field => "uT",
        Quantity::Angle => "rad",
        Quantity::Gyromagnetic => "GHz/T",
    }
}

/// Parse a TOML value expected to be a quantity: a unit-suffixed string,
/// or a bare number for dimensions that allow it.
pub fn quantity_from_toml(value: &toml::Value, q: Quantity) -> Result<f64, String> {
    match value {
        toml::Value::String(s) => parse_quantity(s, q),
        toml::Value::Float(f) if q.bare_numbers_allowed() => Ok(*f),
        toml::Value::Integer(i) if q.bare_numbers_allowed() => Ok(*i as f64),
        toml::Value::Float(_) | toml::Value::Integer(_) => Err(format!(
            "bare number given; this key needs an explicit unit, e.g. \"2 {}\"",
            example_unit(q)
        )),
        other => Err(format!("expected a quantity string, got {other}")),
    }
}

/// Canonical rendering in the base SI unit; parses back to the same f64.
pub fn format_quantity(value: f64, q: Quantity) -> String {
    format!("{} {}", value, q.base_unit())
}
