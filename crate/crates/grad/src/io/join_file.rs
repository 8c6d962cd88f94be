//! The `join/1` format: one merge rule per line.
//!
//! ```text
//! join/1
//! MOVIE on IMDB_ID
//! CITY on CityName CityState
//! ```
//!
//! Entities of the named class merge when they agree on every listed
//! identifier.

use std::path::Path;

use crate::algebra::{JoinPredicate, MergeRule};
use crate::error::Result;

use super::{escape, expect_header, parse_err, unescape};

pub fn load_join_file(path: impl AsRef<Path>) -> Result<JoinPredicate> {
    let text = std::fs::read_to_string(path)?;
    parse_join(&text)
}

pub fn parse_join(text: &str) -> Result<JoinPredicate> {
    let (_, lines) = expect_header(text, "join", "1")?;
    let mut rules = Vec::new();
    for (n, line) in lines {
        let fields: Vec<&str> = line.split(' ').collect();
        if fields.len() < 3 || fields[1] != "on" {
            return Err(parse_err(n, "join rule is `CLASS on IDENTIFIER...`"));
        }
        let class_label = unescape(fields[0]).map_err(|e| parse_err(n, e))?;
        let match_on = fields[2..]
            .iter()
            .map(|f| unescape(f))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| parse_err(n, e))?;
        rules.push(MergeRule {
            class_label,
            match_on,
        });
    }
    JoinPredicate::new(rules)
}

pub fn format_join(pr: &JoinPredicate) -> String {
    let mut out = String::from("join/1\n");
    for rule in &pr.rules {
        out.push_str(&escape(&rule.class_label));
        out.push_str(" on");
        for ident in &rule.match_on {
            out.push(' ');
            out.push_str(&escape(ident));
        }
        out.push('\n');
    }
    out
}
