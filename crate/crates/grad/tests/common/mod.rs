//! Shared fixtures and seeded generators for the integration suites.
//!
//! The movie network is the crate's running example: one movie filmed in a
//! city that sits inside a country, a director, two actors and an audience
//! rating. The generators build small random graphs — and patterns over
//! their vocabulary — for the property loops; everything is driven by a
//! caller-supplied ChaCha8 seed so failures replay exactly.

#![allow(dead_code)]

use std::collections::BTreeMap;

use grad::constraints::{Assertion, Multiplicity, Range};
use grad::graph::{AttrId, EntityEdgeKind, EntityId, GradGraph};
use grad::pattern::{
    validate_pattern, AtomicPredicate, GraphPattern, PatternEdgeKind, PredicateTarget,
};
use grad::template::{GraphTemplate, TemplateStr, TemplateValue};
use grad::value::{CompOp, Value};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn ids(pairs: &[(&str, Value)]) -> BTreeMap<String, Value> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

pub struct MovieNetwork {
    pub graph: GradGraph,
    pub movie: EntityId,
    pub city: EntityId,
    pub country: EntityId,
    pub director: EntityId,
    pub eric_bana: EntityId,
    pub chris_pine: EntityId,
    pub rating: AttrId,
}

/// The full reference network: 6 entities, 1 attribute, 1 literal, 5 entity
/// edges (one of them a composition), 1 attribute edge, 1 literal edge.
pub fn movie_network() -> MovieNetwork {
    build_movie_network(8.5, true, true)
}

pub fn movie_network_without_directs() -> GradGraph {
    build_movie_network(8.5, false, true).graph
}

pub fn movie_network_without_acts() -> GradGraph {
    build_movie_network(8.5, true, false).graph
}

pub fn movie_network_rated(rating: f64) -> GradGraph {
    build_movie_network(rating, true, true).graph
}

fn build_movie_network(rating: f64, with_directs: bool, with_acts: bool) -> MovieNetwork {
    let mut g = GradGraph::new();
    let movie = g
        .add_entity_node(
            "MOVIE",
            ids(&[
                ("IMDB_ID", Value::Int(3884)),
                ("RT_ID", Value::text("Star_Trek")),
            ]),
        )
        .unwrap();
    let city = g
        .add_entity_node("CITY", ids(&[("CityName", Value::text("UTAH"))]))
        .unwrap();
    let country = g
        .add_entity_node("COUNTRY", ids(&[("CountryName", Value::text("USA"))]))
        .unwrap();
    let director = g
        .add_entity_node(
            "DIRECTOR",
            ids(&[("DirectorName", Value::text("J.J._Abrams"))]),
        )
        .unwrap();
    let eric_bana = g
        .add_entity_node("ACTOR", ids(&[("ActorName", Value::text("Eric_Bana"))]))
        .unwrap();
    let chris_pine = g
        .add_entity_node("ACTOR", ids(&[("ActorName", Value::text("Chris_Pine"))]))
        .unwrap();

    g.add_entity_edge(
        movie,
        city,
        EntityEdgeKind::Association,
        "FILMED IN",
        BTreeMap::new(),
    )
    .unwrap();
    g.add_entity_edge(
        city,
        country,
        EntityEdgeKind::Composition,
        "LOCATED IN",
        BTreeMap::new(),
    )
    .unwrap();
    if with_directs {
        g.add_entity_edge(
            movie,
            director,
            EntityEdgeKind::Association,
            "DIRECTS",
            BTreeMap::new(),
        )
        .unwrap();
    }
    if with_acts {
        g.add_entity_edge(
            movie,
            eric_bana,
            EntityEdgeKind::Association,
            "ACTS",
            ids(&[("ranking", Value::Int(1))]),
        )
        .unwrap();
        g.add_entity_edge(
            movie,
            chris_pine,
            EntityEdgeKind::Association,
            "ACTS",
            BTreeMap::new(),
        )
        .unwrap();
    }

    let rating_attr = g.add_attribute(movie, "Rating").unwrap();
    g.add_literal(
        rating_attr,
        Value::Decimal(rating),
        ids(&[("Type", Value::text("Audience"))]),
    )
    .unwrap();

    MovieNetwork {
        graph: g,
        movie,
        city,
        country,
        director,
        eric_bana,
        chris_pine,
        rating: rating_attr,
    }
}

/// Every movie needs an audience rating above 7, an actor and a director.
pub fn movie_context_assertion() -> Assertion {
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
                Value::text("Audience"),
            )],
        );
    Assertion::new("movie-context", pattern, vec!["m".into()]).unwrap()
}

/// A movie plays at least one actor; actors appear in any number of movies.
pub fn actor_multiplicity() -> Multiplicity {
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

/// Top-rated movies with their rank-1 actors.
pub fn top_rated_pattern() -> GraphPattern {
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
                Value::text("Audience"),
            )],
        )
}

/// Two actors sharing a movie.
pub fn co_actor_pattern() -> GraphPattern {
    GraphPattern::new()
        .entity("m", vec![AtomicPredicate::label_eq("MOVIE")])
        .entity("a1", vec![AtomicPredicate::label_eq("ACTOR")])
        .entity("a2", vec![AtomicPredicate::label_eq("ACTOR")])
        .entity_edge("m", "a1", vec![AtomicPredicate::edge_label_eq("ACTS")])
        .entity_edge("m", "a2", vec![AtomicPredicate::edge_label_eq("ACTS")])
}

/// One symmetric Co-Acts edge per matched actor pair.
pub fn co_actor_template() -> GraphTemplate {
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

/// The movie network plus a second movie that shares both actors.
pub fn two_movie_network() -> GradGraph {
    let fx = movie_network();
    let mut g = fx.graph;
    let movie2 = g
        .add_entity_node("MOVIE", ids(&[("IMDB_ID", Value::Int(9999))]))
        .unwrap();
    g.add_entity_edge(
        movie2,
        fx.eric_bana,
        EntityEdgeKind::Association,
        "ACTS",
        BTreeMap::new(),
    )
    .unwrap();
    g.add_entity_edge(
        movie2,
        fx.chris_pine,
        EntityEdgeKind::Association,
        "ACTS",
        BTreeMap::new(),
    )
    .unwrap();
    g
}

/// A single movie hypernode carrying one attribute with one literal.
pub fn movie_with_attr(attr: &str, value: Value, ctx: &[(&str, Value)]) -> GradGraph {
    let mut g = GradGraph::new();
    let m = g
        .add_entity_node("MOVIE", ids(&[("IMDB_ID", Value::Int(3884))]))
        .unwrap();
    let a = g.add_attribute(m, attr).unwrap();
    g.add_literal(a, value, ids(ctx)).unwrap();
    g
}

// ---- seeded generators ----

const CLASSES: &[&str] = &["MOVIE", "ACTOR", "CITY", "GENRE"];
const ATTR_LABELS: &[&str] = &["Rating", "Name", "Year"];
const EDGE_LABELS: &[&str] = &["ACTS", "FILMED IN", "PART OF", "TAGGED"];
const CONTEXTS: &[&str] = &["Audience", "Critics"];

fn random_scalar(rng: &mut ChaCha8Rng) -> Value {
    match rng.gen_range(0..4) {
        0 => Value::Int(rng.gen_range(-5..50)),
        1 => Value::Decimal(f64::from(rng.gen_range(0..100)) / 10.0),
        2 => Value::Bool(rng.gen_bool(0.5)),
        _ => Value::text(["red", "green", "blue", "gold"][rng.gen_range(0..4)]),
    }
}

pub fn random_graph(rng: &mut ChaCha8Rng) -> GradGraph {
    random_graph_prefixed(rng, "")
}

/// A small random graph over a fixed vocabulary: up to 10 entities with up
/// to 3 attributes each, literal values under varying contexts, and edges of
/// all four kinds. Identifier values stay unique within one graph, and a
/// class prefix makes two generated graphs identity-disjoint, so content
/// equality can be checked through the canonical document bytes.
pub fn random_graph_prefixed(rng: &mut ChaCha8Rng, prefix: &str) -> GradGraph {
    let mut g = GradGraph::new();
    let n = rng.gen_range(1..=10);
    let mut entities = Vec::with_capacity(n);
    for serial in 0..n {
        let class = format!("{prefix}{}", CLASSES[rng.gen_range(0..CLASSES.len())]);
        let mut idm = ids(&[("id", Value::Int(serial as i64))]);
        if rng.gen_bool(0.3) {
            idm.insert("tag".into(), random_scalar(rng));
        }
        let e = g.add_entity_node(&class, idm).unwrap();
        entities.push(e);
        for _ in 0..rng.gen_range(0..=3usize) {
            // add_attribute is idempotent per label, so this tops out at the
            // number of distinct labels drawn.
            let label = ATTR_LABELS[rng.gen_range(0..ATTR_LABELS.len())];
            let a = g.add_attribute(e, label).unwrap();
            if rng.gen_bool(0.8) {
                let ctx = if rng.gen_bool(0.4) {
                    ids(&[(
                        "Type",
                        Value::text(CONTEXTS[rng.gen_range(0..CONTEXTS.len())]),
                    )])
                } else {
                    BTreeMap::new()
                };
                g.add_literal(a, random_scalar(rng), ctx).unwrap();
            }
        }
    }
    // Draws that would break an integrity rule are skipped rather than
    // retried, so edge density varies: per-kind hierarchical cycles, one
    // start node pointing same-labeled edges at two classes, and the
    // builder's own rejections (parallel same-label pairs, second parents).
    let mut parent: BTreeMap<EntityEdgeKind, BTreeMap<EntityId, EntityId>> = BTreeMap::new();
    let mut end_class: BTreeMap<(EntityId, &str), String> = BTreeMap::new();
    for _ in 0..rng.gen_range(0..=12) {
        let start = entities[rng.gen_range(0..entities.len())];
        let end = entities[rng.gen_range(0..entities.len())];
        if start == end {
            continue;
        }
        let kind = match rng.gen_range(0..6) {
            0 => EntityEdgeKind::Generalization,
            1 => EntityEdgeKind::Aggregation,
            2 => EntityEdgeKind::Composition,
            _ => EntityEdgeKind::Association,
        };
        if kind.is_hierarchical() {
            let chain = parent.entry(kind).or_default();
            let mut cursor = Some(end);
            let mut cyclic = false;
            while let Some(node) = cursor {
                if node == start {
                    cyclic = true;
                    break;
                }
                cursor = chain.get(&node).copied();
            }
            if cyclic {
                continue;
            }
        }
        let label = EDGE_LABELS[rng.gen_range(0..EDGE_LABELS.len())];
        let class = g.entity(end).unwrap().class_label().to_string();
        match end_class.get(&(start, label)) {
            Some(existing) if *existing != class => continue,
            _ => {}
        }
        let attrs = if rng.gen_bool(0.3) {
            ids(&[("w", random_scalar(rng))])
        } else {
            BTreeMap::new()
        };
        if g.add_entity_edge(start, end, kind, label, attrs).is_ok() {
            end_class.insert((start, label), class);
            if kind.is_hierarchical() {
                parent.entry(kind).or_default().insert(start, end);
            }
        }
    }
    g
}

/// The labels and values present in a graph, as a pool to draw predicate
/// constants from.
struct Vocab {
    classes: Vec<String>,
    attr_labels: Vec<String>,
    edge_labels: Vec<String>,
    literal_values: Vec<Value>,
    identifier_pairs: Vec<(String, Value)>,
    entity_keys: Vec<Value>,
    edge_attr_pairs: Vec<(String, Value)>,
    context_pairs: Vec<(String, Value)>,
}

fn vocab(g: &GradGraph) -> Vocab {
    let mut v = Vocab {
        classes: Vec::new(),
        attr_labels: Vec::new(),
        edge_labels: Vec::new(),
        literal_values: Vec::new(),
        identifier_pairs: Vec::new(),
        entity_keys: Vec::new(),
        edge_attr_pairs: Vec::new(),
        context_pairs: Vec::new(),
    };
    for (id, n) in g.entities() {
        v.classes.push(n.class_label().to_string());
        for (name, value) in n.identifiers() {
            v.identifier_pairs.push((name.clone(), value.clone()));
        }
        if let Ok(k) = g.entity_key(id) {
            v.entity_keys.push(k.to_value());
        }
    }
    for (_, a) in g.attributes() {
        v.attr_labels.push(a.label().to_string());
    }
    for (_, l) in g.literals() {
        v.literal_values.push(l.value().clone());
        for (name, value) in l.context() {
            v.context_pairs.push((name.clone(), value.clone()));
        }
    }
    for (_, e) in g.entity_edges() {
        v.edge_labels.push(e.label().to_string());
        for (name, value) in e.attributes() {
            v.edge_attr_pairs.push((name.clone(), value.clone()));
        }
    }
    v
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, pool: &'a [T]) -> Option<&'a T> {
    if pool.is_empty() {
        None
    } else {
        Some(&pool[rng.gen_range(0..pool.len())])
    }
}

fn comp_op(rng: &mut ChaCha8Rng) -> CompOp {
    match rng.gen_range(0..6) {
        0 => CompOp::Lt,
        1 => CompOp::Le,
        2 => CompOp::Ge,
        3 => CompOp::Gt,
        4 => CompOp::Ne,
        _ => CompOp::Eq,
    }
}

/// A random valid pattern with at most five nodes. Constants are drawn from
/// the graph's own vocabulary most of the time (so matches actually happen)
/// with occasional off-vocabulary misses.
pub fn random_pattern(rng: &mut ChaCha8Rng, g: &GradGraph) -> GraphPattern {
    let v = vocab(g);
    let miss = |rng: &mut ChaCha8Rng| rng.gen_bool(0.15);

    let n_nodes = rng.gen_range(1..=5);
    let mut p = GraphPattern::new();
    // Indexes of entity / attribute variables created so far.
    let mut entity_vars: Vec<String> = Vec::new();
    let mut attr_vars: Vec<String> = Vec::new();

    for i in 0..n_nodes {
        let var = format!("v{i}");
        let choice = if i == 0 { 0 } else { rng.gen_range(0..10) };
        if choice < 5 || (choice >= 8 && attr_vars.is_empty() && entity_vars.is_empty()) {
            // Entity node, linked to an earlier entity when one exists.
            let mut preds = Vec::new();
            if rng.gen_bool(0.6) {
                let class = if miss(rng) {
                    "NOWHERE".to_string()
                } else {
                    pick(rng, &v.classes).cloned().unwrap_or_default()
                };
                if !class.is_empty() {
                    preds.push(AtomicPredicate::label_eq(&class));
                }
            }
            if rng.gen_bool(0.25) {
                if let Some((name, value)) = pick(rng, &v.identifier_pairs) {
                    let value = if miss(rng) {
                        Value::Int(777)
                    } else {
                        value.clone()
                    };
                    preds.push(AtomicPredicate::identifier(name, comp_op(rng), value));
                }
            }
            if rng.gen_bool(0.08) {
                if let Some(key) = pick(rng, &v.entity_keys) {
                    preds.push(AtomicPredicate::new(
                        PredicateTarget::EntityKey,
                        CompOp::Eq,
                        key.clone(),
                    ));
                }
            }
            p = p.entity(&var, preds);
            if let Some(peer) = pick(rng, &entity_vars).cloned() {
                if rng.gen_bool(0.85) {
                    let (start, end) = if rng.gen_bool(0.5) {
                        (peer.clone(), var.clone())
                    } else {
                        (var.clone(), peer.clone())
                    };
                    let wide = miss(rng);
                    let kind = random_entity_edge_kind(rng);
                    p = p.edge(&start, &end, kind, random_edge_preds(rng, &v, wide));
                }
            }
            entity_vars.push(var);
        } else if choice < 8 || attr_vars.is_empty() {
            // Attribute node under a random entity.
            let owner = pick(rng, &entity_vars).cloned().unwrap();
            let mut preds = Vec::new();
            if rng.gen_bool(0.8) {
                let label = if miss(rng) {
                    "Ghost".to_string()
                } else {
                    pick(rng, &v.attr_labels)
                        .cloned()
                        .unwrap_or_else(|| "Rating".into())
                };
                preds.push(AtomicPredicate::label_eq(&label));
            }
            p = p.attribute(&var, preds).attribute_edge(&owner, &var);
            attr_vars.push(var);
        } else {
            // Literal node under a random attribute.
            let owner = pick(rng, &attr_vars).cloned().unwrap();
            let mut preds = Vec::new();
            if rng.gen_bool(0.7) {
                let value = if miss(rng) {
                    Value::Int(12345)
                } else {
                    pick(rng, &v.literal_values)
                        .cloned()
                        .unwrap_or(Value::Int(0))
                };
                preds.push(AtomicPredicate::literal_value(comp_op(rng), value));
            }
            let edge_preds = if rng.gen_bool(0.3) {
                match pick(rng, &v.context_pairs) {
                    Some((name, value)) => vec![AtomicPredicate::edge_attribute(
                        name,
                        CompOp::Eq,
                        value.clone(),
                    )],
                    None => Vec::new(),
                }
            } else {
                Vec::new()
            };
            p = p
                .literal(&var, preds)
                .literal_edge(&owner, &var, edge_preds);
        }
    }

    assert!(
        validate_pattern(&p).is_empty(),
        "generator produced an invalid pattern: {p:?}"
    );
    p
}

fn random_entity_edge_kind(rng: &mut ChaCha8Rng) -> PatternEdgeKind {
    PatternEdgeKind::Entity(match rng.gen_range(0..10) {
        0 => Some(EntityEdgeKind::Generalization),
        1 => Some(EntityEdgeKind::Aggregation),
        2 => Some(EntityEdgeKind::Composition),
        3 | 4 => Some(EntityEdgeKind::Association),
        _ => None,
    })
}

fn random_edge_preds(rng: &mut ChaCha8Rng, v: &Vocab, miss: bool) -> Vec<AtomicPredicate> {
    let mut preds = Vec::new();
    if rng.gen_bool(0.5) {
        let label = if miss {
            "NO SUCH".to_string()
        } else {
            pick(rng, &v.edge_labels)
                .cloned()
                .unwrap_or_else(|| "ACTS".into())
        };
        preds.push(AtomicPredicate::edge_label_eq(&label));
    }
    if rng.gen_bool(0.2) {
        if let Some((name, value)) = pick(rng, &v.edge_attr_pairs) {
            preds.push(AtomicPredicate::edge_attribute(
                name,
                comp_op(rng),
                value.clone(),
            ));
        }
    }
    preds
}
