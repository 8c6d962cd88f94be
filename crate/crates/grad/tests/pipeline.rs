//! Cross-module pipelines driven entirely through the text formats: tables
//! in, documents out, with constraints, patterns, templates and join rules
//! all loaded from files. No test here touches a builder predicate directly
//! — if a format or a wiring seam drifts, this is the suite that notices.

mod common;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use grad::algebra::{composition, join, selection, union, GraphCollection};
use grad::constraints::validate;
use grad::io::{
    etl, load_constraints, load_file, load_join_file, load_mapping, load_pattern_file,
    load_template_file, save_file, save_to_string, SourceTable,
};
use grad::value::Value;

fn data(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(file)
}

fn catalog_tables() -> Vec<SourceTable> {
    ["movies", "directors", "actors", "locations"]
        .iter()
        .map(|name| SourceTable::load_file(data(&format!("{name}.dat")), '\t').unwrap())
        .collect()
}

#[test]
fn etl_output_matches_the_golden_document() {
    let g = etl(
        &catalog_tables(),
        &load_mapping(data("movie_catalog.etl")).unwrap(),
    )
    .unwrap();
    let golden = std::fs::read_to_string(data("movie_network.grad")).unwrap();
    assert_eq!(save_to_string(&g), golden);
}

#[test]
fn golden_document_loads_back_to_the_fixture() {
    let g = load_file(data("movie_network.grad")).unwrap();
    assert_eq!(
        save_to_string(&g),
        save_to_string(&common::movie_network().graph)
    );
}

#[test]
fn constraint_files_validate_the_network() {
    let set = load_constraints(data("movie.constraints")).unwrap();
    assert_eq!(set.assertions.len(), 1);
    assert_eq!(set.multiplicities.len(), 1);

    let report = validate(
        &common::movie_network().graph,
        &set.assertions,
        &set.multiplicities,
    )
    .unwrap();
    assert!(report.is_clean(), "unexpected: {:?}", report.violations);

    let report = validate(
        &common::movie_network_without_acts(),
        &set.assertions,
        &set.multiplicities,
    )
    .unwrap();
    // Both rules trip: the assertion wants an ACTS edge and the
    // multiplicity wants at least one actor.
    assert_eq!(report.error_count(), 2);
}

#[test]
fn pattern_files_agree_with_the_builder_fixtures() {
    let p = load_pattern_file(data("movie-context.pattern")).unwrap();
    assert_eq!(p, common::movie_context_assertion().pattern);
    let p = load_pattern_file(data("co_actor.pattern")).unwrap();
    assert_eq!(p, common::co_actor_pattern());
    let t = load_template_file(data("co_actor.template")).unwrap();
    assert_eq!(t, common::co_actor_template());
}

#[test]
fn composition_runs_from_files_alone() {
    let g = load_file(data("movie_network.grad")).unwrap();
    let p = load_pattern_file(data("co_actor.pattern")).unwrap();
    let t = load_template_file(data("co_actor.template")).unwrap();
    let out = composition(&g, &p, &t).unwrap();
    assert_eq!(out.entity_count(), 2);
    assert_eq!(out.entity_edge_count(), 1);
    assert_eq!(out.entity_edges().next().unwrap().1.label(), "Co-Acts");
}

#[test]
fn join_rules_from_a_file_merge_the_catalog() {
    let pr = load_join_file(data("movie.join")).unwrap();

    let audience = common::movie_with_attr("Rating", Value::Decimal(8.5), &[]);
    let score = common::movie_with_attr("Score", Value::Int(92), &[]);
    let out = join(
        &GraphCollection::from_graphs(vec![audience]),
        &GraphCollection::from_graphs(vec![score]),
        &pr,
    )
    .unwrap();
    assert_eq!(out.len(), 1);
    let g = out.iter().next().unwrap();
    assert_eq!(g.entity_count(), 1);
    let labels: BTreeSet<&str> = g.attributes().map(|(_, a)| a.label()).collect();
    assert_eq!(labels, BTreeSet::from(["Rating", "Score"]));
}

#[test]
fn select_then_union_round_trips_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let g = load_file(data("movie_network.grad")).unwrap();
    let p = load_pattern_file(data("co_actor.pattern")).unwrap();

    let picked = selection(&g, &p).unwrap();
    assert_eq!(picked.len(), 2, "actor pairs in both orders");

    let mut merged = grad::graph::GradGraph::new();
    for part in picked.iter() {
        merged = union(&merged, part);
    }
    let path = dir.path().join("pairs.grad");
    save_file(&merged, &path).unwrap();
    let back = load_file(&path).unwrap();
    assert_eq!(save_to_string(&back), save_to_string(&merged));
    // Two overlapping matched subgraphs stay separate under plain union:
    // six entities, not three.
    assert_eq!(back.entity_count(), 6);
}
