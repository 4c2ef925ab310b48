//! Turns free-form model replies into a Celsius value.
//!
//! Rules, first hit wins:
//! 1. a range ("18-24 °C", "between 18 and 24 degrees") collapses to its midpoint;
//! 2. the first number carrying a Celsius/degree unit;
//! 3. the first number carrying a Fahrenheit unit, converted.
//!
//! The result is clamped to the plausibility window `[-50, 60]` °C.

use std::sync::LazyLock;

use regex::Regex;

use super::{ParseRule, TemperatureEstimate, VlmError};

pub const PLAUSIBLE_MIN_C: f64 = -50.0;
pub const PLAUSIBLE_MAX_C: f64 = 60.0;

const NUM: &str = r"[-−]?[0-9]+(?:\.[0-9]+)?";

static NUMBER: LazyLock<Regex> = LazyLock::new(|| Regex::new(NUM).unwrap());

static RANGE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r"(?i)(?P<between>between\s+)?(?P<a>{NUM})\s*(?:°\s*[cf]?|º\s*[cf]?|degrees?)?\s*(?P<sep>-|\x{{2013}}|\x{{2014}}|to|and)\s*(?P<b>{NUM})"
    ))
    .unwrap()
});

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Unit {
    Celsius,
    Fahrenheit,
}

fn parse_number(s: &str) -> f64 {
    s.replace('−', "-").parse().expect("regex guarantees a number")
}

fn starts_word(s: &str, word: &str) -> bool {
    s.starts_with(word) && !s[word.len()..].starts_with(|c: char| c.is_ascii_alphabetic())
}

/// Unit named immediately after a number, if any.
fn unit_after(tail: &str) -> Option<Unit> {
    let t = tail.trim_start().to_lowercase();
    let after_symbol = t.strip_prefix('°').or_else(|| t.strip_prefix('º'));
    if let Some(rest) = after_symbol {
        let rest = rest.trim_start();
        return Some(if starts_word(rest, "f") || rest.starts_with("fahrenheit") {
            Unit::Fahrenheit
        } else {
            Unit::Celsius
        });
    }
    if t.starts_with("fahrenheit") || starts_word(&t, "f") {
        return Some(Unit::Fahrenheit);
    }
    if t.starts_with("celsius") || t.starts_with("centigrade") || starts_word(&t, "c") {
        return Some(Unit::Celsius);
    }
    for word in ["degrees", "degree", "deg"] {
        if let Some(rest) = t.strip_prefix(word) {
            let rest = rest.trim_start();
            return Some(if rest.starts_with("fahrenheit") || starts_word(rest, "f") {
                Unit::Fahrenheit
            } else {
                Unit::Celsius
            });
        }
    }
    None
}

fn to_celsius(value: f64, unit: Unit) -> f64 {
    match unit {
        Unit::Celsius => value,
        Unit::Fahrenheit => (value - 32.0) * 5.0 / 9.0,
    }
}

/// A leading minus glued to a preceding word or digit is a hyphen, not a sign.
fn signed_value(text: &str, start: usize, matched: &str) -> f64 {
    let glued = text[..start].chars().next_back().is_some_and(|c| c.is_alphanumeric());
    if glued && (matched.starts_with('-') || matched.starts_with('−')) {
        parse_number(matched.trim_start_matches(['-', '−']))
    } else {
        parse_number(matched)
    }
}

fn finish(value: f64, raw_text: &str, parse_rule: ParseRule) -> TemperatureEstimate {
    TemperatureEstimate {
        celsius: value.clamp(PLAUSIBLE_MIN_C, PLAUSIBLE_MAX_C),
        raw_text: raw_text.to_string(),
        parse_rule,
    }
}

fn range_rule(text: &str) -> Option<TemperatureEstimate> {
    for caps in RANGE.captures_iter(text) {
        let sep = caps["sep"].to_lowercase();
        if sep == "and" && caps.name("between").is_none() {
            continue;
        }
        let a = caps.name("a").unwrap();
        let b = caps.name("b").unwrap();
        let unit = unit_after(&text[b.end()..]).or_else(|| unit_after(&text[a.end()..]));
        let Some(unit) = unit else { continue };
        let lo = signed_value(text, a.start(), a.as_str());
        // the separator already consumed a hyphen, so b's own sign is explicit
        let hi = parse_number(b.as_str());
        let mid = to_celsius((lo + hi) / 2.0, unit);
        let rule = match unit {
            Unit::Celsius => ParseRule::RangeMidpoint,
            Unit::Fahrenheit => ParseRule::FahrenheitConverted,
        };
        return Some(finish(mid, text, rule));
    }
    None
}

pub fn parse_temperature(raw_text: &str) -> Result<TemperatureEstimate, VlmError> {
    if let Some(estimate) = range_rule(raw_text) {
        return Ok(estimate);
    }
    let mut first_fahrenheit = None;
    for m in NUMBER.find_iter(raw_text) {
        let value = signed_value(raw_text, m.start(), m.as_str());
        match unit_after(&raw_text[m.end()..]) {
            Some(Unit::Celsius) => return Ok(finish(value, raw_text, ParseRule::SingleValue)),
            Some(Unit::Fahrenheit) if first_fahrenheit.is_none() => first_fahrenheit = Some(value),
            _ => {}
        }
    }
    match first_fahrenheit {
        Some(f) => Ok(finish(
            to_celsius(f, Unit::Fahrenheit),
            raw_text,
            ParseRule::FahrenheitConverted,
        )),
        None => Err(VlmError::Parse {
            raw_text: raw_text.to_string(),
        }),
    }
}
