//! Line-oriented text formats: the `grad/1` graph document plus companion
//! formats for patterns, templates, constraint sets, join predicates and
//! the tabular ETL loader. All formats share one lexical layer — space
//! separated fields, percent-escaping inside fields, explicitly tagged
//! values — so every file is diffable and every save is canonical and
//! byte-reproducible.

pub mod constraints_file;
pub mod document;
pub mod etl;
pub mod join_file;
pub mod pattern_file;
pub mod template_file;

pub use constraints_file::{load_constraints, parse_constraints, ConstraintSet};
pub use document::{load, load_file, save, save_file, save_to_string};
pub use etl::{etl, load_mapping, parse_mapping, ColumnType, EtlMapping, SourceTable};
pub use join_file::{format_join, load_join_file, parse_join};
pub use pattern_file::{format_pattern, load_pattern_file, parse_pattern};
pub use template_file::{format_template, load_template_file, parse_template};

use std::collections::BTreeMap;

use crate::error::{GradError, Result};
use crate::value::Value;

/// Characters that would collide with the field/map/list syntax; they are
/// written as uppercase `%XX` escapes inside any label, name or text value.
fn needs_escape(c: char) -> bool {
    matches!(c, '%' | ' ' | '\t' | '\n' | '\r' | '=' | ',' | '[' | ']')
}

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        if needs_escape(c) {
            out.push('%');
            out.push_str(&format!("{:02X}", c as u32));
        } else {
            out.push(c);
        }
    }
    out
}

pub fn unescape(s: &str) -> std::result::Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '%' {
            out.push(c);
            continue;
        }
        let (Some(h), Some(l)) = (chars.next(), chars.next()) else {
            return Err(format!("truncated escape in {s:?}"));
        };
        let code = u8::from_str_radix(&format!("{h}{l}"), 16)
            .map_err(|_| format!("bad escape %{h}{l} in {s:?}"))?;
        out.push(code as char);
    }
    Ok(out)
}

/// Renders a value with its type tag: `i:3884`, `f:8.5`, `s:Star_Trek`,
/// `b:true`, `c:[i:1,s:two]`.
pub fn format_value(v: &Value) -> String {
    match v {
        Value::Int(i) => format!("i:{i}"),
        Value::Decimal(d) => format!("f:{d}"),
        Value::Text(s) => format!("s:{}", escape(s)),
        Value::Bool(b) => format!("b:{b}"),
        Value::Composite(vs) => {
            let inner: Vec<String> = vs.iter().map(format_value).collect();
            format!("c:[{}]", inner.join(","))
        }
    }
}

pub fn parse_value(tok: &str) -> std::result::Result<Value, String> {
    let Some((tag, payload)) = tok.split_once(':') else {
        return Err(format!("value {tok:?} lacks a type tag"));
    };
    match tag {
        "i" => payload
            .parse::<i64>()
            .map(Value::Int)
            .map_err(|_| format!("bad integer {payload:?}")),
        "f" => payload
            .parse::<f64>()
            .map(Value::Decimal)
            .map_err(|_| format!("bad decimal {payload:?}")),
        "s" => unescape(payload).map(Value::Text),
        "b" => match payload {
            "true" => Ok(Value::Bool(true)),
            "false" => Ok(Value::Bool(false)),
            other => Err(format!("bad boolean {other:?}")),
        },
        "c" => {
            let inner = payload
                .strip_prefix('[')
                .and_then(|p| p.strip_suffix(']'))
                .ok_or_else(|| format!("composite {payload:?} is not bracketed"))?;
            if inner.is_empty() {
                return Ok(Value::Composite(Vec::new()));
            }
            split_top_level(inner)
                .into_iter()
                .map(parse_value)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(Value::Composite)
        }
        other => Err(format!("unknown type tag {other:?}")),
    }
}

/// Splits on commas that sit outside any `[...]` nesting. Escaped commas
/// and brackets were percent-encoded, so raw ones always mean structure.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

/// Renders a map as `[k=v,k=v]` with escaped keys and tagged values; the
/// BTreeMap ordering makes the rendering canonical.
pub fn format_map(m: &BTreeMap<String, Value>) -> String {
    let inner: Vec<String> = m
        .iter()
        .map(|(k, v)| format!("{}={}", escape(k), format_value(v)))
        .collect();
    format!("[{}]", inner.join(","))
}

pub fn parse_map(tok: &str) -> std::result::Result<BTreeMap<String, Value>, String> {
    let inner = tok
        .strip_prefix('[')
        .and_then(|p| p.strip_suffix(']'))
        .ok_or_else(|| format!("map {tok:?} is not bracketed"))?;
    let mut out = BTreeMap::new();
    if inner.is_empty() {
        return Ok(out);
    }
    for piece in split_top_level(inner) {
        let (k, v) = piece
            .split_once('=')
            .ok_or_else(|| format!("map entry {piece:?} lacks '='"))?;
        out.insert(unescape(k)?, parse_value(v)?);
    }
    Ok(out)
}

/// Shorthand for position-addressed parse failures.
pub(crate) fn parse_err(line: usize, reason: impl Into<String>) -> GradError {
    GradError::ParseError {
        line,
        reason: reason.into(),
    }
}

/// Non-blank, non-comment lines with their original 1-based numbers.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Checks the first content line against the expected `name/version` header
/// and returns the header's trailing fields plus the remaining lines. A
/// recognizable name with the wrong version is reported as
/// UnsupportedVersion, anything else as a parse error.
pub(crate) fn expect_header<'a>(
    text: &'a str,
    format_name: &str,
    version: &str,
) -> Result<(&'a str, Vec<(usize, &'a str)>)> {
    let mut lines = content_lines(text);
    let Some((n, first)) = lines.next() else {
        return Err(parse_err(
            1,
            format!("missing {format_name}/{version} header"),
        ));
    };
    let (head, tail) = match first.split_once(' ') {
        Some((h, t)) => (h, t),
        None => (first, ""),
    };
    if head != format!("{format_name}/{version}") {
        if head.starts_with(&format!("{format_name}/")) {
            return Err(GradError::UnsupportedVersion(head.to_string()));
        }
        return Err(parse_err(
            n,
            format!("expected {format_name}/{version} header, found {first:?}"),
        ));
    }
    Ok((tail, lines.collect()))
}
