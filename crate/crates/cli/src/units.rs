//! Physical quantities on the command line: a number with an optional
//! unit suffix, converted to SI. A bare number is already SI.

fn parse_with(text: &str, units: &[(&str, i32)], what: &str) -> Result<f64, String> {
    let text = text.trim();
    let number = |s: &str| s.trim().parse::<f64>().ok().filter(|v| v.is_finite());
    if let Some(v) = number(text) {
        return Ok(v);
    }
    let mut by_length: Vec<&(&str, i32)> = units.iter().collect();
    by_length.sort_by_key(|(name, _)| std::cmp::Reverse(name.len()));
    for (name, exponent) in by_length {
        if let Some(v) = text.strip_suffix(name).and_then(number) {
            return Ok(scale_by_decade(v, *exponent));
        }
    }
    let known: Vec<&str> = units.iter().map(|(n, _)| *n).collect();
    Err(format!("`{text}` is not a {what} (units: {})", known.join(", ")))
}

/// Dividing by an exact power of ten keeps `5um` equal to the literal `5e-6`.
fn scale_by_decade(v: f64, exponent: i32) -> f64 {
    if exponent < 0 {
        v / 10f64.powi(-exponent)
    } else {
        v * 10f64.powi(exponent)
    }
}

/// Suffix and its power-of-ten factor to SI.
const LENGTH: &[(&str, i32)] = &[
    ("m", 0),
    ("cm", -2),
    ("mm", -3),
    ("um", -6),
    ("μm", -6),
    ("µm", -6),
    ("nm", -9),
];

const TIME: &[(&str, i32)] = &[
    ("s", 0),
    ("ms", -3),
    ("us", -6),
    ("μs", -6),
    ("µs", -6),
];

const VELOCITY: &[(&str, i32)] = &[
    ("m/s", 0),
    ("cm/s", -2),
    ("mm/s", -3),
    ("um/s", -6),
    ("μm/s", -6),
    ("µm/s", -6),
];

/// 1 mM = 1 mol/m³.
const CONCENTRATION: &[(&str, i32)] = &[
    ("mol/m3", 0),
    ("mol/m³", 0),
    ("mM", 0),
    ("uM", -3),
    ("μM", -3),
    ("µM", -3),
    ("M", 3),
];

pub fn length(text: &str) -> Result<f64, String> {
    parse_with(text, LENGTH, "length")
}

pub fn time(text: &str) -> Result<f64, String> {
    parse_with(text, TIME, "time")
}

pub fn velocity(text: &str) -> Result<f64, String> {
    parse_with(text, VELOCITY, "velocity")
}

pub fn concentration(text: &str) -> Result<f64, String> {
    parse_with(text, CONCENTRATION, "concentration")
}

/// A length or a concentration, whichever the suffix names.
pub fn length_or_concentration(text: &str) -> Result<f64, String> {
    length(text).or_else(|_| concentration(text))
}
