//! The `pattern/1` format. Two sections, `nodes` and `edges`:
//!
//! ```text
//! pattern/1
//! nodes
//! m entity label = s:MOVIE
//! r attribute label = s:Rating
//! l literal value > f:7
//! edges
//! m a entity.association label = s:ACTS attr.ranking = i:1
//! m r attribute
//! r l literal attr.Type = s:Audience
//! ```
//!
//! Node lines are `var kind predicate*`, edge lines are
//! `start end kind predicate*`; every predicate is the triple
//! `target op value`. Targets: `label`, `value`, `key`, `idmap`,
//! `attrmap`, `id.NAME`, `attr.NAME`. In the nodes section `label` means
//! the node's own label; in the edges section it means the edge label.

use std::path::Path;

use crate::error::Result;
use crate::graph::EntityEdgeKind;
use crate::pattern::{
    AtomicPredicate, GraphPattern, PatternEdge, PatternEdgeKind, PatternNode, PatternNodeKind,
    PredicateTarget,
};
use crate::value::CompOp;

use super::{escape, expect_header, format_value, parse_err, parse_value, unescape};

pub fn load_pattern_file(path: impl AsRef<Path>) -> Result<GraphPattern> {
    let text = std::fs::read_to_string(path)?;
    parse_pattern(&text)
}

pub fn parse_pattern(text: &str) -> Result<GraphPattern> {
    let (_, lines) = expect_header(text, "pattern", "1")?;
    let mut p = GraphPattern::new();
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
                    return Err(parse_err(n, "node line needs `var kind`"));
                }
                let var = unescape(fields[0]).map_err(|e| parse_err(n, e))?;
                let kind = parse_node_kind(fields[1])
                    .ok_or_else(|| parse_err(n, format!("unknown node kind {:?}", fields[1])))?;
                let predicates = parse_predicates(&fields[2..], false, n)?;
                p.nodes.push(PatternNode {
                    var,
                    kind,
                    predicates,
                });
            }
            Section::Edges => {
                if fields.len() < 3 {
                    return Err(parse_err(n, "edge line needs `start end kind`"));
                }
                let kind = parse_edge_kind(fields[2])
                    .ok_or_else(|| parse_err(n, format!("unknown edge kind {:?}", fields[2])))?;
                let predicates = parse_predicates(&fields[3..], true, n)?;
                p.edges.push(PatternEdge {
                    start_var: unescape(fields[0]).map_err(|e| parse_err(n, e))?,
                    end_var: unescape(fields[1]).map_err(|e| parse_err(n, e))?,
                    kind,
                    predicates,
                });
            }
        }
    }
    Ok(p)
}

/// Renders a pattern canonically; `parse_pattern` inverts it exactly for
/// patterns whose predicates sit on legal targets.
pub fn format_pattern(p: &GraphPattern) -> String {
    let mut out = String::from("pattern/1\nnodes\n");
    for node in &p.nodes {
        out.push_str(&escape(&node.var));
        out.push(' ');
        out.push_str(node.kind.name());
        for pred in &node.predicates {
            out.push(' ');
            out.push_str(&format_predicate(pred));
        }
        out.push('\n');
    }
    out.push_str("edges\n");
    for edge in &p.edges {
        out.push_str(&format!(
            "{} {} {}",
            escape(&edge.start_var),
            escape(&edge.end_var),
            format_edge_kind(edge.kind)
        ));
        for pred in &edge.predicates {
            out.push(' ');
            out.push_str(&format_predicate(pred));
        }
        out.push('\n');
    }
    out
}

fn parse_node_kind(tok: &str) -> Option<PatternNodeKind> {
    Some(match tok {
        "entity" => PatternNodeKind::Entity,
        "attribute" => PatternNodeKind::Attribute,
        "literal" => PatternNodeKind::Literal,
        _ => return None,
    })
}

fn format_edge_kind(kind: PatternEdgeKind) -> String {
    match kind {
        PatternEdgeKind::Entity(None) => "entity".to_string(),
        PatternEdgeKind::Entity(Some(k)) => format!("entity.{}", k.name()),
        PatternEdgeKind::Attribute => "attribute".to_string(),
        PatternEdgeKind::Literal => "literal".to_string(),
    }
}

fn parse_edge_kind(tok: &str) -> Option<PatternEdgeKind> {
    Some(match tok {
        "entity" => PatternEdgeKind::Entity(None),
        "attribute" => PatternEdgeKind::Attribute,
        "literal" => PatternEdgeKind::Literal,
        other => {
            let sub = other.strip_prefix("entity.")?;
            PatternEdgeKind::Entity(Some(sub.parse::<EntityEdgeKind>().ok()?))
        }
    })
}

fn format_predicate(pred: &AtomicPredicate) -> String {
    let target = match &pred.target {
        PredicateTarget::NodeLabel | PredicateTarget::EdgeLabel => "label".to_string(),
        PredicateTarget::LiteralValue => "value".to_string(),
        PredicateTarget::EntityKey => "key".to_string(),
        PredicateTarget::IdentifierMap => "idmap".to_string(),
        PredicateTarget::AttributeMap => "attrmap".to_string(),
        PredicateTarget::EntityIdentifier(name) => format!("id.{}", escape(name)),
        PredicateTarget::EdgeAttribute(name) => format!("attr.{}", escape(name)),
    };
    format!("{} {} {}", target, pred.op, format_value(&pred.constant))
}

/// Predicates are triples; `on_edge` resolves the `label` shorthand.
fn parse_predicates(fields: &[&str], on_edge: bool, line: usize) -> Result<Vec<AtomicPredicate>> {
    if !fields.len().is_multiple_of(3) {
        return Err(parse_err(
            line,
            "predicates come as `target op value` triples",
        ));
    }
    let mut out = Vec::with_capacity(fields.len() / 3);
    for chunk in fields.chunks(3) {
        let target = match chunk[0] {
            "label" if on_edge => PredicateTarget::EdgeLabel,
            "label" => PredicateTarget::NodeLabel,
            "value" => PredicateTarget::LiteralValue,
            "key" => PredicateTarget::EntityKey,
            "idmap" => PredicateTarget::IdentifierMap,
            "attrmap" => PredicateTarget::AttributeMap,
            other => {
                if let Some(name) = other.strip_prefix("id.") {
                    PredicateTarget::EntityIdentifier(
                        unescape(name).map_err(|e| parse_err(line, e))?,
                    )
                } else if let Some(name) = other.strip_prefix("attr.") {
                    PredicateTarget::EdgeAttribute(unescape(name).map_err(|e| parse_err(line, e))?)
                } else {
                    return Err(parse_err(
                        line,
                        format!("unknown predicate target {other:?}"),
                    ));
                }
            }
        };
        let op: CompOp = chunk[1]
            .parse()
            .map_err(|_| parse_err(line, format!("unknown operator {:?}", chunk[1])))?;
        let constant = parse_value(chunk[2]).map_err(|e| parse_err(line, e))?;
        out.push(AtomicPredicate::new(target, op, constant));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::GradError;
    use crate::fixtures::{example11_pattern, example8};
    use crate::matcher::match_graph;
    use crate::pattern::validate_pattern;

    #[test]
    fn example_pattern_round_trips() {
        let p = example11_pattern();
        let text = format_pattern(&p);
        let back = parse_pattern(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(format_pattern(&back), text);
        assert!(validate_pattern(&back).is_empty());
        // The reparsed pattern drives the matcher identically.
        let fx = example8();
        assert_eq!(match_graph(&fx.graph, &back).unwrap().len(), 1);
    }

    #[test]
    fn hand_written_pattern_parses() {
        let text = "pattern/1\n\
                    # top movies and their actors\n\
                    nodes\n\
                    m entity label = s:MOVIE\n\
                    a entity label = s:ACTOR id.ActorName != s:Nobody\n\
                    edges\n\
                    m a entity.association label = s:ACTS\n";
        let p = parse_pattern(text).unwrap();
        assert_eq!(p.nodes.len(), 2);
        assert_eq!(p.edges.len(), 1);
        assert_eq!(
            p.edges[0].kind,
            PatternEdgeKind::Entity(Some(EntityEdgeKind::Association))
        );
        assert_eq!(p.nodes[1].predicates.len(), 2);
        let fx = example8();
        assert_eq!(match_graph(&fx.graph, &p).unwrap().len(), 2);
    }

    #[test]
    fn all_targets_and_kinds_round_trip() {
        use crate::value::Value;
        let p = GraphPattern::new()
            .entity(
                "x",
                vec![
                    AtomicPredicate::new(
                        PredicateTarget::EntityKey,
                        CompOp::Eq,
                        Value::Composite(vec![Value::text("MOVIE"), Value::Int(1)]),
                    ),
                    AtomicPredicate::new(
                        PredicateTarget::IdentifierMap,
                        CompOp::Ne,
                        Value::Composite(vec![]),
                    ),
                    AtomicPredicate::identifier("weird name", CompOp::Ge, Value::Int(0)),
                ],
            )
            .entity("y", vec![])
            .attribute("r", vec![AtomicPredicate::label_eq("Rating")])
            .literal(
                "l",
                vec![AtomicPredicate::literal_value(
                    CompOp::Le,
                    Value::Decimal(9.5),
                )],
            )
            .edge(
                "x",
                "y",
                PatternEdgeKind::Entity(Some(EntityEdgeKind::Composition)),
                vec![AtomicPredicate::new(
                    PredicateTarget::AttributeMap,
                    CompOp::Eq,
                    Value::Composite(vec![]),
                )],
            )
            .attribute_edge("x", "r")
            .literal_edge(
                "r",
                "l",
                vec![AtomicPredicate::edge_attribute(
                    "Type",
                    CompOp::Eq,
                    Value::text("Audience"),
                )],
            );
        let text = format_pattern(&p);
        assert_eq!(parse_pattern(&text).unwrap(), p);
    }

    #[test]
    fn malformed_patterns_are_rejected() {
        let cases: &[(&str, &str)] = &[
            ("pattern/1\nm entity\n", "before the nodes"),
            ("pattern/1\nnodes\nm\n", "node line needs"),
            ("pattern/1\nnodes\nm widget\n", "unknown node kind"),
            ("pattern/1\nnodes\nm entity label =\n", "triples"),
            (
                "pattern/1\nnodes\nm entity size = i:1\n",
                "unknown predicate target",
            ),
            (
                "pattern/1\nnodes\nm entity label ~ s:A\n",
                "unknown operator",
            ),
            ("pattern/1\nnodes\nm entity label = MOVIE\n", "type tag"),
            ("pattern/1\nedges\na b entity.weird\n", "unknown edge kind"),
        ];
        for (text, needle) in cases {
            let err = parse_pattern(text).unwrap_err().to_string();
            assert!(err.contains(needle), "{text:?} -> {err}");
        }
        assert!(matches!(
            parse_pattern("pattern/2\n"),
            Err(GradError::UnsupportedVersion(_))
        ));
    }
}
