//! Build a small movie graph, query it with a pattern, round-trip the
//! canonical document. Run with `cargo run -p grad --example quickstart`.

use std::collections::BTreeMap;

use grad::graph::{EntityEdgeKind, GradGraph, NodeRef};
use grad::matcher::match_graph;
use grad::pattern::{AtomicPredicate, GraphPattern};
use grad::value::{CompOp, Value};

fn main() -> grad::Result<()> {
    // MOVIE --ACTS--> ACTOR, with an audience rating on the movie.
    let mut g = GradGraph::new();
    let movie = g.add_entity_node(
        "MOVIE",
        BTreeMap::from([("IMDB_ID".into(), Value::Int(3884))]),
    )?;
    let actor = g.add_entity_node(
        "ACTOR",
        BTreeMap::from([("ActorName".into(), Value::text("Eric_Bana"))]),
    )?;
    g.add_entity_edge(
        movie,
        actor,
        EntityEdgeKind::Association,
        "ACTS",
        BTreeMap::new(),
    )?;
    let rating = g.add_attribute(movie, "Rating")?;
    g.add_literal(
        rating,
        Value::Decimal(8.5),
        BTreeMap::from([("Type".into(), Value::text("Audience"))]),
    )?;

    // Every actor in a movie rated above 7.
    let p = GraphPattern::new()
        .entity("m", vec![AtomicPredicate::label_eq("MOVIE")])
        .entity("a", vec![AtomicPredicate::label_eq("ACTOR")])
        .attribute("r", vec![AtomicPredicate::label_eq("Rating")])
        .literal(
            "v",
            vec![AtomicPredicate::literal_value(CompOp::Gt, Value::Int(7))],
        )
        .entity_edge("m", "a", vec![AtomicPredicate::edge_label_eq("ACTS")])
        .attribute_edge("m", "r")
        .literal_edge("r", "v", vec![]);
    let matches = match_graph(&g, &p)?;
    assert_eq!(matches.len(), 1);
    for m in matches.iter() {
        if let Some(NodeRef::Entity(id)) = m.node("a") {
            println!(
                "matched actor: {}",
                g.entity(id)?.identifiers()["ActorName"]
            );
        }
    }

    // The serialization is canonical: load ∘ save is the identity on bytes.
    let text = grad::io::save_to_string(&g);
    assert_eq!(grad::io::save_to_string(&grad::io::load(&text)?), text);
    print!("{text}");
    Ok(())
}
