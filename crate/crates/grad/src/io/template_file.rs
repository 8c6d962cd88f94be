//! The `template/1` format — the pattern format's shape with `${var.field}`
//! substitution slots wherever a label or value may be computed from the
//! matched bindings:
//!
//! ```text
//! template/1
//! nodes
//! x entity ACTOR [name=${a1.ActorName}]
//! r attribute x Rating
//! l literal r ${l0.value} [Type=s:Audience]
//! edges
//! x y association Co-Acts [] symmetric
//! ```
//!
//! Entity lines are `name entity class id-map`; attribute lines
//! `name attribute owner label`; literal lines
//! `name literal owner value context-map`. Edge lines are
//! `start end kind label attribute-map` with an optional trailing
//! `symmetric` keyword. Classes and labels take either an escaped string
//! or a slot; values take a tagged value or a slot.

use std::path::Path;

use crate::error::Result;
use crate::graph::EntityEdgeKind;
use crate::template::{GraphTemplate, TemplateStr, TemplateValue};

use super::{
    escape, expect_header, format_value, parse_err, parse_value, split_top_level, unescape,
};

pub fn load_template_file(path: impl AsRef<Path>) -> Result<GraphTemplate> {
    let text = std::fs::read_to_string(path)?;
    parse_template(&text)
}

pub fn parse_template(text: &str) -> Result<GraphTemplate> {
    let (_, lines) = expect_header(text, "template", "1")?;
    let mut t = GraphTemplate::new();
    #[derive(PartialEq)]
    enum Section {
        None,
        Nodes,
        Edges,
    }
    let mut section = Section::None;
    for (n, line) in lines {
        match line {
            "nodes" => {
                section = Section::Nodes;
                continue;
            }
            "edges" => {
                section = Section::Edges;
                continue;
            }
            _ => {}
        }
        let fields: Vec<&str> = line.split(' ').collect();
        match section {
            Section::None => return Err(parse_err(n, "record before the nodes/edges sections")),
            Section::Nodes => {
                if fields.len() < 2 {
                    return Err(parse_err(n, "node line needs `name kind`"));
                }
                let name = unescape(fields[0]).map_err(|e| parse_err(n, e))?;
                match fields[1] {
                    "entity" => {
                        if fields.len() != 4 {
                            return Err(parse_err(n, "entity line is `name entity class id-map`"));
                        }
                        let class = parse_tstr(fields[2]).map_err(|e| parse_err(n, e))?;
                        let ids = parse_tmap(fields[3]).map_err(|e| parse_err(n, e))?;
                        t = t.entity(&name, class, ids);
                    }
                    "attribute" => {
                        if fields.len() != 4 {
                            return Err(parse_err(
                                n,
                                "attribute line is `name attribute owner label`",
                            ));
                        }
                        let owner = unescape(fields[2]).map_err(|e| parse_err(n, e))?;
                        let label = parse_tstr(fields[3]).map_err(|e| parse_err(n, e))?;
                        t = t.attribute(&name, &owner, label);
                    }
                    "literal" => {
                        if fields.len() != 5 {
                            return Err(parse_err(
                                n,
                                "literal line is `name literal owner value context-map`",
                            ));
                        }
                        let owner = unescape(fields[2]).map_err(|e| parse_err(n, e))?;
                        let value = parse_tvalue(fields[3]).map_err(|e| parse_err(n, e))?;
                        let ctx = parse_tmap(fields[4]).map_err(|e| parse_err(n, e))?;
                        t = t.literal(&name, &owner, value, ctx);
                    }
                    other => return Err(parse_err(n, format!("unknown node kind {other:?}"))),
                }
            }
            Section::Edges => {
                let symmetric = fields.last() == Some(&"symmetric");
                let body = if symmetric {
                    &fields[..fields.len() - 1]
                } else {
                    &fields[..]
                };
                if body.len() != 5 {
                    return Err(parse_err(
                        n,
                        "edge line is `start end kind label attribute-map [symmetric]`",
                    ));
                }
                let kind: EntityEdgeKind = body[2]
                    .parse()
                    .map_err(|_| parse_err(n, format!("unknown edge kind {:?}", body[2])))?;
                let label = parse_tstr(body[3]).map_err(|e| parse_err(n, e))?;
                let attrs = parse_tmap(body[4]).map_err(|e| parse_err(n, e))?;
                let start = unescape(body[0]).map_err(|e| parse_err(n, e))?;
                let end = unescape(body[1]).map_err(|e| parse_err(n, e))?;
                t = t.edge(&start, &end, kind, label, attrs, symmetric);
            }
        }
    }
    Ok(t)
}

pub fn format_template(t: &GraphTemplate) -> String {
    let mut out = String::from("template/1\nnodes\n");
    for e in &t.entities {
        out.push_str(&format!(
            "{} entity {} {}\n",
            escape(&e.name),
            format_tstr(&e.class),
            format_tmap(&e.identifiers)
        ));
    }
    for a in &t.attributes {
        out.push_str(&format!(
            "{} attribute {} {}\n",
            escape(&a.name),
            escape(&a.owner),
            format_tstr(&a.label)
        ));
    }
    for l in &t.literals {
        out.push_str(&format!(
            "{} literal {} {} {}\n",
            escape(&l.name),
            escape(&l.owner),
            format_tvalue(&l.value),
            format_tmap(&l.context)
        ));
    }
    out.push_str("edges\n");
    for e in &t.edges {
        out.push_str(&format!(
            "{} {} {} {} {}{}\n",
            escape(&e.start),
            escape(&e.end),
            e.kind.name(),
            format_tstr(&e.label),
            format_tmap(&e.attributes),
            if e.symmetric { " symmetric" } else { "" }
        ));
    }
    out
}

fn format_slot(var: &str, field: &str) -> String {
    format!("${{{}.{}}}", escape(var), escape(field))
}

/// `${var.field}` if the token is a slot; the variable may not contain a
/// dot, the field may.
fn parse_slot(tok: &str) -> Option<std::result::Result<(String, String), String>> {
    let inner = tok.strip_prefix("${")?.strip_suffix('}')?;
    Some((|| {
        let (var, field) = inner
            .split_once('.')
            .ok_or_else(|| format!("slot {tok:?} needs the form ${{var.field}}"))?;
        Ok((unescape(var)?, unescape(field)?))
    })())
}

fn format_tstr(s: &TemplateStr) -> String {
    match s {
        TemplateStr::Const(c) => escape(c),
        TemplateStr::Slot { var, field } => format_slot(var, field),
    }
}

fn parse_tstr(tok: &str) -> std::result::Result<TemplateStr, String> {
    match parse_slot(tok) {
        Some(slot) => {
            let (var, field) = slot?;
            Ok(TemplateStr::slot(&var, &field))
        }
        None => Ok(TemplateStr::constant(&unescape(tok)?)),
    }
}

fn format_tvalue(v: &TemplateValue) -> String {
    match v {
        TemplateValue::Const(c) => format_value(c),
        TemplateValue::Slot { var, field } => format_slot(var, field),
    }
}

fn parse_tvalue(tok: &str) -> std::result::Result<TemplateValue, String> {
    match parse_slot(tok) {
        Some(slot) => {
            let (var, field) = slot?;
            Ok(TemplateValue::slot(&var, &field))
        }
        None => Ok(TemplateValue::constant(parse_value(tok)?)),
    }
}

/// Maps whose values may be slots keep their declaration order (they feed
/// Vec-backed template fields, not BTreeMaps).
fn format_tmap(entries: &[(String, TemplateValue)]) -> String {
    let inner: Vec<String> = entries
        .iter()
        .map(|(k, v)| format!("{}={}", escape(k), format_tvalue(v)))
        .collect();
    format!("[{}]", inner.join(","))
}

fn parse_tmap(tok: &str) -> std::result::Result<Vec<(String, TemplateValue)>, String> {
    let inner = tok
        .strip_prefix('[')
        .and_then(|p| p.strip_suffix(']'))
        .ok_or_else(|| format!("map {tok:?} is not bracketed"))?;
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for piece in split_top_level(inner) {
        let (k, v) = piece
            .split_once('=')
            .ok_or_else(|| format!("map entry {piece:?} lacks '='"))?;
        out.push((unescape(k)?, parse_tvalue(v)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::GradError;
    use crate::value::Value;

    fn co_actor() -> GraphTemplate {
        GraphTemplate::new()
            .entity(
                "x",
                TemplateStr::constant("ACTOR"),
                vec![("name".into(), TemplateValue::slot("a1", "ActorName"))],
            )
            .entity(
                "y",
                TemplateStr::constant("ACTOR"),
                vec![("name".into(), TemplateValue::slot("a2", "ActorName"))],
            )
            .edge(
                "x",
                "y",
                EntityEdgeKind::Association,
                TemplateStr::constant("Co-Acts"),
                vec![],
                true,
            )
    }

    #[test]
    fn co_actor_template_round_trips() {
        let t = co_actor();
        let text = format_template(&t);
        assert!(text.contains("${a1.ActorName}"));
        assert!(text.ends_with("symmetric\n"));
        let back = parse_template(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(format_template(&back), text);
    }

    #[test]
    fn every_shape_round_trips() {
        let t = GraphTemplate::new()
            .entity(
                "e",
                TemplateStr::slot("m", "label"),
                vec![
                    ("id".into(), TemplateValue::constant(Value::Int(1))),
                    ("from slot".into(), TemplateValue::slot("m", "RT ID")),
                ],
            )
            .attribute("a", "e", TemplateStr::constant("Rating of [things]"))
            .literal(
                "l",
                "a",
                TemplateValue::slot("l0", "value"),
                vec![(
                    "Type".into(),
                    TemplateValue::constant(Value::text("Audience")),
                )],
            )
            .edge(
                "e",
                "e",
                EntityEdgeKind::Aggregation,
                TemplateStr::slot("r", "label"),
                vec![("w".into(), TemplateValue::constant(Value::Decimal(0.5)))],
                false,
            );
        let text = format_template(&t);
        let back = parse_template(&text).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn hand_written_template_parses() {
        let text = "template/1\nnodes\n\
                    x entity ACTOR [name=${a1.ActorName}]\n\
                    r attribute x Rating\n\
                    l literal r f:1 []\n\
                    edges\n\
                    x x aggregation SELF []\n";
        let t = parse_template(text).unwrap();
        assert_eq!(t.entities.len(), 1);
        assert_eq!(t.attributes.len(), 1);
        assert_eq!(t.literals.len(), 1);
        assert_eq!(t.edges.len(), 1);
        assert!(!t.edges[0].symmetric);
    }

    #[test]
    fn malformed_templates_are_rejected() {
        let cases: &[(&str, &str)] = &[
            ("template/1\nnodes\nx entity ACTOR\n", "entity line is"),
            ("template/1\nnodes\nx widget A []\n", "unknown node kind"),
            (
                "template/1\nnodes\nx entity ACTOR [n=${a1}]\n",
                "needs the form",
            ),
            (
                "template/1\nedges\nx y sideways L []\n",
                "unknown edge kind",
            ),
            ("template/1\nx entity A []\n", "before the nodes"),
            ("template/1\nnodes\nl literal r f:1\n", "literal line is"),
        ];
        for (text, needle) in cases {
            let err = parse_template(text).unwrap_err().to_string();
            assert!(err.contains(needle), "{text:?} -> {err}");
        }
        assert!(matches!(
            parse_template("template/3\n"),
            Err(GradError::UnsupportedVersion(_))
        ));
    }
}
