//! Quantities with explicit units, converted to SI (angular frequencies in rad/s).

use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dim {
    Rate,
    Time,
    Phase,
    Length,
}

impl Dim {
    pub fn si_unit(self) -> &'static str {
        match self {
            Dim::Rate => "/s",
            Dim::Time => "s",
            Dim::Phase => "rad",
            Dim::Length => "m",
        }
    }

    fn units(self) -> &'static [&'static str] {
        match self {
            Dim::Rate => &["/s", "rad/s", "/ms", "/us", "/ns", "kappa", "2pi*Hz", "2pi*kHz", "2pi*MHz", "2pi*GHz"],
            Dim::Time => &["s", "ms", "us", "ns", "ps", "/kappa"],
            Dim::Phase => &["rad", "pi", "deg"],
            Dim::Length => &["m", "cm", "mm"],
        }
    }
}

fn split(text: &str) -> Option<(f64, &str)> {
    let text = text.trim();
    let mut end = 0;
    for (i, c) in text.char_indices() {
        let numeric = c.is_ascii_digit()
            || c == '.'
            || ((c == '+' || c == '-') && (i == 0 || matches!(text.as_bytes()[i - 1], b'e' | b'E')))
            || ((c == 'e' || c == 'E') && i > 0 && text[i + 1..].starts_with(|n: char| n.is_ascii_digit() || n == '-' || n == '+'));
        if !numeric {
            break;
        }
        end = i + c.len_utf8();
    }
    let value = text[..end].parse::<f64>().ok()?;
    Some((value, text[end..].trim()))
}

/// Parses `"<number> <unit>"`. `kappa` is needed only for the `kappa` and `/kappa` units.
pub fn parse(text: &str, dim: Dim, kappa: Option<f64>) -> Result<f64, String> {
    let (value, unit) = split(text).ok_or_else(|| format!("'{text}' does not start with a number"))?;
    if !value.is_finite() {
        return Err(format!("'{text}' is not finite"));
    }
    if unit.is_empty() {
        return Err(format!("'{text}' has no unit (expected one of {})", dim.units().join(", ")));
    }
    let need_kappa = || kappa.ok_or_else(|| format!("'{text}' uses kappa units where kappa itself is being defined"));
    let two_pi = 2.0 * PI;
    let scale = match (dim, unit) {
        (Dim::Rate, "/s" | "rad/s") => 1.0,
        (Dim::Rate, "/ms") => 1e3,
        (Dim::Rate, "/us") => 1e6,
        (Dim::Rate, "/ns") => 1e9,
        (Dim::Rate, "kappa") => need_kappa()?,
        (Dim::Rate, "2pi*Hz") => two_pi,
        (Dim::Rate, "2pi*kHz") => two_pi * 1e3,
        (Dim::Rate, "2pi*MHz") => two_pi * 1e6,
        (Dim::Rate, "2pi*GHz") => two_pi * 1e9,
        (Dim::Time, "s") => 1.0,
        (Dim::Time, "ms") => 1e-3,
        (Dim::Time, "us") => 1e-6,
        (Dim::Time, "ns") => 1e-9,
        (Dim::Time, "ps") => 1e-12,
        (Dim::Time, "/kappa") => return Ok(value / need_kappa()?),
        (Dim::Phase, "rad") => 1.0,
        (Dim::Phase, "pi") => PI,
        (Dim::Phase, "deg") => PI / 180.0,
        (Dim::Length, "m") => 1.0,
        (Dim::Length, "cm") => 1e-2,
        (Dim::Length, "mm") => 1e-3,
        _ => {
            return Err(format!(
                "unknown unit '{unit}' in '{text}' (expected one of {})",
                dim.units().join(", ")
            ))
        }
    };
    Ok(value * scale)
}

/// Canonical SI text that parses back to exactly `value`.
pub fn format_si(value: f64, dim: Dim) -> String {
    format!("{value:?} {}", dim.si_unit())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_units() {
        assert_eq!(parse("1 /us", Dim::Rate, None).unwrap(), 1e6);
        assert_eq!(parse("4 kappa", Dim::Rate, Some(2.0)).unwrap(), 8.0);
        assert_eq!(parse("20/kappa", Dim::Time, Some(1e6)).unwrap(), 2e-5);
        assert_eq!(parse("-0.5 pi", Dim::Phase, None).unwrap(), -0.5 * PI);
        assert_eq!(parse("1e-3 s", Dim::Time, None).unwrap(), 1e-3);
        assert_eq!(parse("30 cm", Dim::Length, None).unwrap(), 0.3);
        assert_eq!(parse("90 deg", Dim::Phase, None).unwrap(), PI / 2.0);
        assert!((parse("2 2pi*MHz", Dim::Rate, None).unwrap() - 4e6 * PI).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse("4", Dim::Rate, None).unwrap_err().contains("no unit"));
        assert!(parse("4 kappa", Dim::Rate, None).unwrap_err().contains("kappa"));
        assert!(parse("4 furlongs", Dim::Length, None).unwrap_err().contains("unknown unit"));
        assert!(parse("fast", Dim::Rate, None).is_err());
        assert!(parse("3 s", Dim::Rate, None).is_err());
    }

    #[test]
    fn si_text_round_trips() {
        for v in [1.0 / 3.0, 2e-5, -7.25e12, 0.1 + 0.2] {
            assert_eq!(parse(&format_si(v, Dim::Time), Dim::Time, None).unwrap(), v);
        }
    }
}
