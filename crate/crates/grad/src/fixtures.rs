//! Shared fixtures for the crate's unit tests: a small movie network that
//! exercises every element kind, plus the canonical selection pattern over
//! it.

use std::collections::BTreeMap;

use crate::constraints::{Assertion, Multiplicity, Range};
use crate::graph::{AttrId, EntityEdgeId, EntityEdgeKind, EntityId, GradGraph, LitId};
use crate::pattern::{AtomicPredicate, GraphPattern};
use crate::value::{CompOp, Value};

pub struct MovieFixture {
    pub graph: GradGraph,
    pub movie: EntityId,
    pub city: EntityId,
    pub country: EntityId,
    pub director: EntityId,
    pub eric_bana: EntityId,
    pub chris_pine: EntityId,
    pub rating: AttrId,
    pub rating_literal: LitId,
    pub e12: EntityEdgeId,
    pub e23: EntityEdgeId,
    pub e14: Option<EntityEdgeId>,
    pub e15: Option<EntityEdgeId>,
    pub e16: Option<EntityEdgeId>,
}

pub fn ids(pairs: &[(&str, Value)]) -> BTreeMap<String, Value> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

/// A movie with its city/country location chain, director and two actors;
/// one Rating attribute holding an audience score; the top actor's ACTS edge
/// carries a ranking.
pub fn example8() -> MovieFixture {
    build_example8(8.5, true, true)
}

/// The fixture graph with the DIRECTS edge left out.
pub fn example8_without_directs() -> GradGraph {
    build_example8(8.5, false, true).graph
}

/// The fixture graph with both ACTS edges left out.
pub fn example8_without_acts() -> GradGraph {
    build_example8(8.5, true, false).graph
}

/// The fixture graph with a different audience rating.
pub fn example8_with_rating(rating: f64) -> GradGraph {
    build_example8(rating, true, true).graph
}

fn build_example8(rating_value: f64, with_directs: bool, with_acts: bool) -> MovieFixture {
    let mut g = GradGraph::new();
    let movie = g
        .add_entity_node(
            "MOVIE",
            ids(&[
                ("IMDB_ID", Value::Int(3884)),
                ("RT_ID", Value::Text("Star_Trek".into())),
            ]),
        )
        .unwrap();
    let city = g
        .add_entity_node("CITY", ids(&[("CityName", Value::Text("UTAH".into()))]))
        .unwrap();
    let country = g
        .add_entity_node(
            "COUNTRY",
            ids(&[("CountryName", Value::Text("USA".into()))]),
        )
        .unwrap();
    let director = g
        .add_entity_node(
            "DIRECTOR",
            ids(&[("DirectorName", Value::Text("J.J._Abrams".into()))]),
        )
        .unwrap();
    let eric_bana = g
        .add_entity_node(
            "ACTOR",
            ids(&[("ActorName", Value::Text("Eric_Bana".into()))]),
        )
        .unwrap();
    let chris_pine = g
        .add_entity_node(
            "ACTOR",
            ids(&[("ActorName", Value::Text("Chris_Pine".into()))]),
        )
        .unwrap();

    let e12 = g
        .add_entity_edge(
            movie,
            city,
            EntityEdgeKind::Association,
            "FILMED IN",
            BTreeMap::new(),
        )
        .unwrap();
    let e23 = g
        .add_entity_edge(
            city,
            country,
            EntityEdgeKind::Composition,
            "LOCATED IN",
            BTreeMap::new(),
        )
        .unwrap();
    let e14 = with_directs.then(|| {
        g.add_entity_edge(
            movie,
            director,
            EntityEdgeKind::Association,
            "DIRECTS",
            BTreeMap::new(),
        )
        .unwrap()
    });
    let e15 = with_acts.then(|| {
        g.add_entity_edge(
            movie,
            eric_bana,
            EntityEdgeKind::Association,
            "ACTS",
            ids(&[("ranking", Value::Int(1))]),
        )
        .unwrap()
    });
    let e16 = with_acts.then(|| {
        g.add_entity_edge(
            movie,
            chris_pine,
            EntityEdgeKind::Association,
            "ACTS",
            BTreeMap::new(),
        )
        .unwrap()
    });

    let rating = g.add_attribute(movie, "Rating").unwrap();
    let rating_literal = g
        .add_literal(
            rating,
            Value::Decimal(rating_value),
            ids(&[("Type", Value::Text("Audience".into()))]),
        )
        .unwrap();

    MovieFixture {
        graph: g,
        movie,
        city,
        country,
        director,
        eric_bana,
        chris_pine,
        rating,
        rating_literal,
        e12,
        e23,
        e14,
        e15,
        e16,
    }
}

/// Every movie must have an audience rating above 7, an actor and a
/// director.
pub fn figure5_assertion() -> Assertion {
    let pattern = GraphPattern::new()
        .entity("m", vec![AtomicPredicate::label_eq("MOVIE")])
        .entity("a", vec![AtomicPredicate::label_eq("ACTOR")])
        .entity("d", vec![AtomicPredicate::label_eq("DIRECTOR")])
        .attribute("r", vec![AtomicPredicate::label_eq("Rating")])
        .literal(
            "l",
            vec![AtomicPredicate::literal_value(CompOp::Gt, Value::Int(7))],
        )
        .entity_edge("m", "a", vec![AtomicPredicate::edge_label_eq("ACTS")])
        .entity_edge("m", "d", vec![AtomicPredicate::edge_label_eq("DIRECTS")])
        .attribute_edge("m", "r")
        .literal_edge(
            "r",
            "l",
            vec![AtomicPredicate::edge_attribute(
                "Type",
                CompOp::Eq,
                Value::Text("Audience".into()),
            )],
        );
    Assertion::new("movie-context", pattern, vec!["m".into()]).unwrap()
}

/// A movie should have at least one actor; actors may play in any number of
/// movies.
pub fn example10_multiplicity() -> Multiplicity {
    Multiplicity::new(
        "MOVIE",
        "ACTS",
        "ACTOR",
        Range::new(1, None).unwrap(),
        Range::unbounded(),
        None,
    )
    .unwrap()
}

/// Top-rated movies with their top actors: MOVIE --ACTS[ranking=1]--> ACTOR,
/// where the movie's Rating attribute holds an audience value above 7.
pub fn example11_pattern() -> GraphPattern {
    GraphPattern::new()
        .entity("m", vec![AtomicPredicate::label_eq("MOVIE")])
        .entity("a", vec![AtomicPredicate::label_eq("ACTOR")])
        .attribute("r", vec![AtomicPredicate::label_eq("Rating")])
        .literal(
            "l",
            vec![AtomicPredicate::literal_value(CompOp::Gt, Value::Int(7))],
        )
        .entity_edge(
            "m",
            "a",
            vec![
                AtomicPredicate::edge_label_eq("ACTS"),
                AtomicPredicate::edge_attribute("ranking", CompOp::Eq, Value::Int(1)),
            ],
        )
        .attribute_edge("m", "r")
        .literal_edge(
            "r",
            "l",
            vec![AtomicPredicate::edge_attribute(
                "Type",
                CompOp::Eq,
                Value::Text("Audience".into()),
            )],
        )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_handles_point_where_they_should() {
        let fx = example8();
        let g = &fx.graph;
        for (id, class) in [
            (fx.movie, "MOVIE"),
            (fx.city, "CITY"),
            (fx.country, "COUNTRY"),
            (fx.director, "DIRECTOR"),
            (fx.eric_bana, "ACTOR"),
            (fx.chris_pine, "ACTOR"),
        ] {
            assert_eq!(g.entity(id).unwrap().class_label(), class);
        }
        assert_eq!(g.entity_edge(fx.e12).unwrap().label(), "FILMED IN");
        assert_eq!(
            g.entity_edge(fx.e23).unwrap().kind(),
            EntityEdgeKind::Composition
        );
        assert_eq!(g.entity_edge(fx.e14.unwrap()).unwrap().end(), fx.director);
        assert_eq!(g.entity_edge(fx.e15.unwrap()).unwrap().end(), fx.eric_bana);
        assert_eq!(g.entity_edge(fx.e16.unwrap()).unwrap().end(), fx.chris_pine);
        assert_eq!(g.attribute(fx.rating).unwrap().owner(), fx.movie);
        assert_eq!(
            g.literal(fx.rating_literal).unwrap().value().clone(),
            Value::Decimal(8.5)
        );
    }

    #[test]
    fn rating_variant_changes_only_the_literal() {
        let g = example8_with_rating(6.9);
        let lit = g.literals().next().unwrap().1;
        assert_eq!(lit.value(), &Value::Decimal(6.9));
        assert_eq!(g.entity_count(), 6);
        assert_eq!(g.entity_edge_count(), 5);
    }
}
