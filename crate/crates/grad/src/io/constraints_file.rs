//! The `constraints/1` format. One rule per line; assertions point at
//! pattern files (paths resolve relative to the constraints file), and
//! multiplicities carry the classic bracket notation:
//!
//! ```text
//! constraints/1
//! assertion movie-context movie_context.pattern anchor m
//! multiplicity MOVIE ACTS ACTOR [1..*] [*]
//! multiplicity CITY LOCATED%20IN COUNTRY [1] [*] kind=composition
//! ```
//!
//! Ranges: `[*]` unbounded, `[n]` exactly n, `[n..*]` at least n,
//! `[n..m]` inclusive. The optional `kind=` suffix restricts which entity
//! edges the multiplicity counts.

use std::path::{Path, PathBuf};

use crate::constraints::{Assertion, Multiplicity, Range};
use crate::error::Result;
use crate::graph::EntityEdgeKind;

use super::{escape, expect_header, parse_err, pattern_file, unescape};

/// Everything a validation run needs beyond the graph itself.
#[derive(Debug, Clone, Default)]
pub struct ConstraintSet {
    pub assertions: Vec<Assertion>,
    pub multiplicities: Vec<Multiplicity>,
}

pub fn load_constraints(path: impl AsRef<Path>) -> Result<ConstraintSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_constraints(&text, base)
}

/// Parses the rule list; `base_dir` anchors relative pattern-file paths.
pub fn parse_constraints(text: &str, base_dir: &Path) -> Result<ConstraintSet> {
    let (_, lines) = expect_header(text, "constraints", "1")?;
    let mut set = ConstraintSet::default();
    for (n, line) in lines {
        let fields: Vec<&str> = line.split(' ').collect();
        match fields[0] {
            "assertion" => {
                // assertion <name> <pattern-path> anchor <var>...
                if fields.len() < 5 || fields[3] != "anchor" {
                    return Err(parse_err(
                        n,
                        "assertion line is `assertion name pattern-file anchor var...`",
                    ));
                }
                let name = unescape(fields[1]).map_err(|e| parse_err(n, e))?;
                let rel = unescape(fields[2]).map_err(|e| parse_err(n, e))?;
                let mut path = PathBuf::from(&rel);
                if path.is_relative() {
                    path = base_dir.join(path);
                }
                let pattern = pattern_file::load_pattern_file(&path)
                    .map_err(|e| parse_err(n, format!("pattern file {}: {e}", path.display())))?;
                let anchors = fields[4..]
                    .iter()
                    .map(|v| unescape(v))
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| parse_err(n, e))?;
                set.assertions
                    .push(Assertion::new(&name, pattern, anchors)?);
            }
            "multiplicity" => {
                // multiplicity <SRC> <LABEL> <DST> <range> <range> [kind=k]
                if !(6..=7).contains(&fields.len()) {
                    return Err(parse_err(
                        n,
                        "multiplicity line is `multiplicity SRC LABEL DST [f] [b] [kind=k]`",
                    ));
                }
                let kind = match fields.get(6) {
                    None => None,
                    Some(tok) => {
                        let k = tok.strip_prefix("kind=").ok_or_else(|| {
                            parse_err(n, format!("trailing field {tok:?} is not kind=..."))
                        })?;
                        Some(
                            k.parse::<EntityEdgeKind>()
                                .map_err(|_| parse_err(n, format!("unknown edge kind {k:?}")))?,
                        )
                    }
                };
                let forward = parse_range(fields[4]).map_err(|e| parse_err(n, e))?;
                let backward = parse_range(fields[5]).map_err(|e| parse_err(n, e))?;
                set.multiplicities.push(Multiplicity::new(
                    &unescape(fields[1]).map_err(|e| parse_err(n, e))?,
                    &unescape(fields[2]).map_err(|e| parse_err(n, e))?,
                    &unescape(fields[3]).map_err(|e| parse_err(n, e))?,
                    forward,
                    backward,
                    kind,
                )?);
            }
            other => return Err(parse_err(n, format!("unknown rule type {other:?}"))),
        }
    }
    Ok(set)
}

/// Renders a constraint set; assertion pattern files are written next to
/// the returned text by the caller (the rendering references them by the
/// names produced by `assertion_pattern_name`).
pub fn format_constraints(set: &ConstraintSet) -> String {
    let mut out = String::from("constraints/1\n");
    for a in &set.assertions {
        out.push_str(&format!(
            "assertion {} {} anchor {}\n",
            escape(&a.name),
            escape(&assertion_pattern_name(&a.name)),
            a.anchor_vars
                .iter()
                .map(|v| escape(v))
                .collect::<Vec<_>>()
                .join(" ")
        ));
    }
    for m in &set.multiplicities {
        out.push_str(&format!(
            "multiplicity {} {} {} {} {}{}\n",
            escape(&m.source_class),
            escape(&m.edge_label),
            escape(&m.target_class),
            format_range(&m.forward),
            format_range(&m.backward),
            match m.kind {
                None => String::new(),
                Some(k) => format!(" kind={}", k.name()),
            }
        ));
    }
    out
}

/// File name under which an assertion's pattern is stored alongside the
/// constraints file.
pub fn assertion_pattern_name(assertion_name: &str) -> String {
    format!("{assertion_name}.pattern")
}

fn format_range(r: &Range) -> String {
    match (r.min, r.max) {
        (0, None) => "[*]".to_string(),
        (min, None) => format!("[{min}..*]"),
        (min, Some(max)) if min == max => format!("[{min}]"),
        (min, Some(max)) => format!("[{min}..{max}]"),
    }
}

fn parse_range(tok: &str) -> std::result::Result<Range, String> {
    let inner = tok
        .strip_prefix('[')
        .and_then(|p| p.strip_suffix(']'))
        .ok_or_else(|| format!("range {tok:?} is not bracketed"))?;
    let range = |min: u64, max: Option<u64>| Range::new(min, max).map_err(|e| e.to_string());
    if inner == "*" {
        return Ok(Range::unbounded());
    }
    match inner.split_once("..") {
        None => {
            let n = inner
                .parse::<u64>()
                .map_err(|_| format!("bad range bound {inner:?}"))?;
            range(n, Some(n))
        }
        Some((lo, "*")) => {
            let min = lo
                .parse::<u64>()
                .map_err(|_| format!("bad range bound {lo:?}"))?;
            range(min, None)
        }
        Some((lo, hi)) => {
            let min = lo
                .parse::<u64>()
                .map_err(|_| format!("bad range bound {lo:?}"))?;
            let max = hi
                .parse::<u64>()
                .map_err(|_| format!("bad range bound {hi:?}"))?;
            range(min, Some(max))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::validate;
    use crate::error::GradError;
    use crate::fixtures::{example8, figure5_assertion};
    use crate::io::pattern_file::format_pattern;

    #[test]
    fn ranges_round_trip() {
        for (text, min, max) in [
            ("[*]", 0, None),
            ("[1..*]", 1, None),
            ("[2]", 2, Some(2)),
            ("[0..3]", 0, Some(3)),
        ] {
            let r = parse_range(text).unwrap();
            assert_eq!((r.min, r.max), (min, max), "{text}");
            assert_eq!(format_range(&r), text);
        }
        assert!(parse_range("[a..b]").is_err());
        assert!(parse_range("1..2").is_err());
        assert!(parse_range("[3..2]")
            .unwrap_err()
            .contains("invalid multiplicity"));
    }

    #[test]
    fn full_constraint_set_loads_and_validates() {
        let dir = tempfile::tempdir().unwrap();
        let assertion = figure5_assertion();
        std::fs::write(
            dir.path().join("movie-context.pattern"),
            format_pattern(&assertion.pattern),
        )
        .unwrap();
        let text = "constraints/1\n\
                    assertion movie-context movie-context.pattern anchor m\n\
                    multiplicity MOVIE ACTS ACTOR [1..*] [*]\n\
                    multiplicity CITY LOCATED%20IN COUNTRY [1] [*] kind=composition\n";
        let path = dir.path().join("rules.constraints");
        std::fs::write(&path, text).unwrap();

        let set = load_constraints(&path).unwrap();
        assert_eq!(set.assertions.len(), 1);
        assert_eq!(set.assertions[0].name, "movie-context");
        assert_eq!(set.assertions[0].anchor_vars, vec!["m".to_string()]);
        assert_eq!(set.multiplicities.len(), 2);
        assert_eq!(set.multiplicities[0].edge_label, "ACTS");
        assert_eq!(set.multiplicities[1].edge_label, "LOCATED IN");
        assert_eq!(
            set.multiplicities[1].kind,
            Some(EntityEdgeKind::Composition)
        );

        let fx = example8();
        let report = validate(&fx.graph, &set.assertions, &set.multiplicities).unwrap();
        assert!(report.is_clean(), "{:?}", report.violations);
    }

    #[test]
    fn formatting_is_reparseable() {
        let set = ConstraintSet {
            assertions: vec![],
            multiplicities: vec![
                Multiplicity::new(
                    "MOVIE",
                    "ACTS",
                    "ACTOR",
                    Range::new(1, None).unwrap(),
                    Range::unbounded(),
                    None,
                )
                .unwrap(),
                Multiplicity::new(
                    "CITY",
                    "LOCATED IN",
                    "COUNTRY",
                    Range::new(1, Some(1)).unwrap(),
                    Range::unbounded(),
                    Some(EntityEdgeKind::Composition),
                )
                .unwrap(),
            ],
        };
        let text = format_constraints(&set);
        let back = parse_constraints(&text, Path::new(".")).unwrap();
        assert_eq!(back.multiplicities.len(), 2);
        assert_eq!(format_constraints(&back), text);
    }

    #[test]
    fn malformed_rules_are_rejected() {
        let base = Path::new(".");
        let cases: &[(&str, &str)] = &[
            ("constraints/1\nassertion a\n", "assertion line is"),
            (
                "constraints/1\nassertion a p.pattern anchored m\n",
                "assertion line is",
            ),
            (
                "constraints/1\nmultiplicity A L B [*]\n",
                "multiplicity line is",
            ),
            (
                "constraints/1\nmultiplicity A L B [*] [*] sideways\n",
                "not kind=",
            ),
            (
                "constraints/1\nmultiplicity A L B (*) [*]\n",
                "not bracketed",
            ),
            (
                "constraints/1\nsomething else entirely x\n",
                "unknown rule type",
            ),
        ];
        for (text, needle) in cases {
            let err = parse_constraints(text, base).unwrap_err().to_string();
            assert!(err.contains(needle), "{text:?} -> {err}");
        }
        // Missing pattern file is reported with its path.
        let err = parse_constraints(
            "constraints/1\nassertion a nowhere.pattern anchor m\n",
            base,
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("nowhere.pattern"), "{err}");
        // Unsatisfiable hierarchical bound propagates from the constructor.
        let err = parse_constraints(
            "constraints/1\nmultiplicity CITY L COUNTRY [2..*] [*] kind=composition\n",
            base,
        )
        .unwrap_err();
        assert!(matches!(err, GradError::InvalidMultiplicity(_)), "{err}");
    }
}
