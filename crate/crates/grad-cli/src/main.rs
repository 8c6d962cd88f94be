//! Batch front end for the grad engine: builds graph documents from tabular
//! sources, validates them, runs pattern queries and applies the graph
//! operators. Every command reads files, calls the library and emits
//! canonical documents or tab-separated tables; no graph logic lives here.
//!
//! Exit codes: 0 success, 1 constraint errors (validation failures, load
//! diagnostics, strict-mode identity collisions), 2 usage or input errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use grad::algebra::{cartesian_product, composition, difference, join, union, GraphCollection};
use grad::constraints::validate;
use grad::graph::{EdgeRef, GradGraph, GraphMode, NodeRef};
use grad::io::{
    escape, etl, format_map, format_value, load as load_document, parse_constraints, parse_join,
    parse_mapping, parse_pattern, parse_template, save_to_string, ConstraintSet, SourceTable,
};
use grad::matcher::{match_graph_limited, MatchSet};
use grad::pattern::GraphPattern;
use grad::template::GraphTemplate;

#[derive(Parser)]
#[command(
    name = "grad",
    version,
    about = "Batch pipelines over grad graph documents"
)]
struct Cli {
    /// Re-emit result documents in strict mode; duplicate identities fail.
    #[arg(long, global = true)]
    strict: bool,

    /// Fold the selected subgraphs into one document (select only).
    #[arg(long, global = true)]
    merge: bool,

    /// Abort query verbs when a pattern has more than this many matches.
    #[arg(long, global = true, value_name = "N", default_value_t = 10_000)]
    max_matches: usize,

    /// Write output here instead of standard output; collections with
    /// several graphs become numbered files (out.grad -> out.1.grad, ...).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a graph document from delimited tables and a mapping file.
    Load {
        /// Mapping file: merge rules, attribute and edge derivations.
        #[arg(long, value_name = "FILE")]
        mapping: PathBuf,
        /// Table files; each table is named after its file stem.
        #[arg(required = true, value_name = "TABLE")]
        tables: Vec<PathBuf>,
        /// Cell delimiter inside table files.
        #[arg(long, value_name = "CHAR", default_value_t = '\t')]
        delimiter: char,
    },
    /// Check a graph against the structural rules and a constraint file.
    Validate {
        graph: PathBuf,
        constraints: Option<PathBuf>,
    },
    /// Print the binding table of a pattern over a graph.
    Match { graph: PathBuf, pattern: PathBuf },
    /// Materialize every pattern match as its own graph document.
    Select { graph: PathBuf, pattern: PathBuf },
    /// Instantiate a template per pattern match and merge the instances.
    Compose {
        graph: PathBuf,
        pattern: PathBuf,
        template: PathBuf,
    },
    /// Place two graphs side by side without merging shared identities.
    Union { left: PathBuf, right: PathBuf },
    /// Remove every occurrence of the second graph from the first.
    Diff { left: PathBuf, right: PathBuf },
    /// Merge two graphs where entities agree on the join rules.
    Join {
        left: PathBuf,
        right: PathBuf,
        /// Join rule file (`CLASS on IDENTIFIER, ...` lines).
        #[arg(long = "on", value_name = "FILE")]
        predicate: PathBuf,
    },
    /// Pair two graphs into one disjoint document.
    Product { left: PathBuf, right: PathBuf },
    /// Print element counts for a graph document.
    Stats { graph: PathBuf },
    /// Re-emit a graph document in canonical form.
    Export { graph: PathBuf },
}

struct Options {
    strict: bool,
    merge: bool,
    max_matches: usize,
    out: Option<PathBuf>,
}

/// A terminal failure: the exit code plus a message for standard error
/// (empty when the diagnostics were already printed, e.g. by validate).
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

fn file_err(path: &Path, err: impl std::fmt::Display, code: u8) -> Failure {
    Failure::new(code, format!("{}: {err}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = Options {
        strict: cli.strict,
        merge: cli.merge,
        max_matches: cli.max_matches,
        out: cli.out,
    };
    match run(cli.command, &opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command, opts: &Options) -> Result<(), Failure> {
    match command {
        Command::Load {
            mapping,
            tables,
            delimiter,
        } => cmd_load(&mapping, &tables, delimiter, opts),
        Command::Validate { graph, constraints } => {
            cmd_validate(&graph, constraints.as_deref(), opts)
        }
        Command::Match { graph, pattern } => cmd_match(&graph, &pattern, opts),
        Command::Select { graph, pattern } => cmd_select(&graph, &pattern, opts),
        Command::Compose {
            graph,
            pattern,
            template,
        } => cmd_compose(&graph, &pattern, &template, opts),
        Command::Union { left, right } => {
            let g = union(&load_graph(&left)?, &load_graph(&right)?);
            emit_graph(&g, opts)
        }
        Command::Diff { left, right } => {
            let g = difference(&load_graph(&left)?, &load_graph(&right)?)
                .map_err(|e| Failure::new(2, e.to_string()))?;
            emit_graph(&g, opts)
        }
        Command::Join {
            left,
            right,
            predicate,
        } => cmd_join(&left, &right, &predicate, opts),
        Command::Product { left, right } => {
            let s1 = GraphCollection::from_graphs(vec![load_graph(&left)?]);
            let s2 = GraphCollection::from_graphs(vec![load_graph(&right)?]);
            let result = cartesian_product(&s1, &s2);
            write_collection(&result, opts)?;
            eprintln!("graphs={}", result.len());
            Ok(())
        }
        Command::Stats { graph } => cmd_stats(&graph, opts),
        Command::Export { graph } => {
            let g = load_graph(&graph)?;
            emit_graph(&g, opts)
        }
    }
}

// ---------------------------------------------------------------- commands

fn cmd_load(
    mapping: &Path,
    tables: &[PathBuf],
    delimiter: char,
    opts: &Options,
) -> Result<(), Failure> {
    // Per the exit-code contract, every load-input failure is a constraint
    // error (1), not a usage error: diagnosing dirty source data is this
    // verb's job.
    let mapping_text = read_text(mapping, 1)?;
    let rules = parse_mapping(&mapping_text).map_err(|e| file_err(mapping, e, 1))?;
    let mut sources = Vec::new();
    for table in tables {
        let name = table
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let text = read_text(table, 1)?;
        sources
            .push(SourceTable::parse(&name, &text, delimiter).map_err(|e| file_err(table, e, 1))?);
    }
    let g = etl(&sources, &rules).map_err(|e| Failure::new(1, e.to_string()))?;
    let text = render_graph(&g, opts.strict)?;
    write_output(&opts.out, &text)?;
    eprintln!("{}", counts_line(&g));
    Ok(())
}

fn cmd_validate(graph: &Path, constraints: Option<&Path>, opts: &Options) -> Result<(), Failure> {
    let g = load_graph(graph)?;
    let set = match constraints {
        Some(path) => {
            let text = read_text(path, 2)?;
            let base = path.parent().unwrap_or_else(|| Path::new("."));
            parse_constraints(&text, base).map_err(|e| file_err(path, e, 2))?
        }
        None => ConstraintSet::default(),
    };
    let report = validate(&g, &set.assertions, &set.multiplicities)
        .map_err(|e| Failure::new(2, e.to_string()))?;
    let mut lines = String::new();
    for v in &report.violations {
        writeln!(lines, "{v}").unwrap();
    }
    write_output(&opts.out, &lines)?;
    eprintln!(
        "errors={} warnings={}",
        report.error_count(),
        report.warning_count()
    );
    if report.error_count() > 0 {
        Err(Failure::new(1, String::new()))
    } else {
        Ok(())
    }
}

fn cmd_match(graph: &Path, pattern: &Path, opts: &Options) -> Result<(), Failure> {
    let g = load_graph(graph)?;
    let p = load_pattern(pattern)?;
    let ms = match_graph_limited(&g, &p, Some(opts.max_matches))
        .map_err(|e| Failure::new(2, e.to_string()))?;
    write_output(&opts.out, &render_table(&g, &p, &ms))?;
    eprintln!("matches={}", ms.len());
    Ok(())
}

fn cmd_select(graph: &Path, pattern: &Path, opts: &Options) -> Result<(), Failure> {
    let g = load_graph(graph)?;
    let p = load_pattern(pattern)?;
    let ms = match_graph_limited(&g, &p, Some(opts.max_matches))
        .map_err(|e| Failure::new(2, e.to_string()))?;
    let mut graphs = Vec::new();
    for m in ms.iter() {
        graphs.push(m.subgraph(&g).map_err(|e| Failure::new(2, e.to_string()))?);
    }
    let result = GraphCollection::from_graphs(graphs);
    if opts.merge {
        let mut acc = GradGraph::new();
        for sub in result.iter() {
            acc = union(&acc, sub);
        }
        let text = render_graph(&acc, opts.strict)?;
        write_output(&opts.out, &text)?;
        eprintln!("graphs=1");
    } else {
        write_collection(&result, opts)?;
        eprintln!("graphs={}", result.len());
    }
    Ok(())
}

fn cmd_compose(
    graph: &Path,
    pattern: &Path,
    template: &Path,
    opts: &Options,
) -> Result<(), Failure> {
    let g = load_graph(graph)?;
    let p = load_pattern(pattern)?;
    let t = load_template(template)?;
    // The match-count guard runs first; composition re-matches internally,
    // which is cheap at the batch sizes this tool is for.
    match_graph_limited(&g, &p, Some(opts.max_matches))
        .map_err(|e| Failure::new(2, e.to_string()))?;
    let out = composition(&g, &p, &t).map_err(|e| Failure::new(2, e.to_string()))?;
    emit_graph(&out, opts)
}

fn cmd_join(left: &Path, right: &Path, predicate: &Path, opts: &Options) -> Result<(), Failure> {
    let s1 = GraphCollection::from_graphs(vec![load_graph(left)?]);
    let s2 = GraphCollection::from_graphs(vec![load_graph(right)?]);
    let pr = parse_join(&read_text(predicate, 2)?).map_err(|e| file_err(predicate, e, 2))?;
    // ConflictingIdentifiers surfaces here; its message names the colliding
    // identity key.
    let result = join(&s1, &s2, &pr).map_err(|e| Failure::new(2, e.to_string()))?;
    write_collection(&result, opts)?;
    eprintln!("graphs={}", result.len());
    Ok(())
}

fn cmd_stats(graph: &Path, opts: &Options) -> Result<(), Failure> {
    let g = load_graph(graph)?;
    let mut s = String::new();
    let mode = match g.mode() {
        GraphMode::Strict => "strict",
        GraphMode::Lax => "lax",
    };
    writeln!(s, "mode={mode}").unwrap();
    writeln!(s, "entities={}", g.entity_count()).unwrap();
    writeln!(s, "attributes={}", g.attribute_count()).unwrap();
    writeln!(s, "literals={}", g.literal_count()).unwrap();
    writeln!(s, "edges={}", g.edge_count()).unwrap();
    writeln!(s, "entity_edges={}", g.entity_edge_count()).unwrap();
    writeln!(s, "attribute_edges={}", g.attribute_count()).unwrap();
    writeln!(s, "literal_edges={}", g.literal_count()).unwrap();
    let mut classes: BTreeMap<&str, usize> = BTreeMap::new();
    for (_, n) in g.entities() {
        *classes.entry(n.class_label()).or_default() += 1;
    }
    for (class, count) in classes {
        writeln!(s, "class {} {count}", escape(class)).unwrap();
    }
    write_output(&opts.out, &s)
}

// ------------------------------------------------------------------ inputs

fn read_text(path: &Path, code: u8) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| file_err(path, e, code))
}

fn load_graph(path: &Path) -> Result<GradGraph, Failure> {
    load_document(&read_text(path, 2)?).map_err(|e| file_err(path, e, 2))
}

fn load_pattern(path: &Path) -> Result<GraphPattern, Failure> {
    parse_pattern(&read_text(path, 2)?).map_err(|e| file_err(path, e, 2))
}

fn load_template(path: &Path) -> Result<GraphTemplate, Failure> {
    parse_template(&read_text(path, 2)?).map_err(|e| file_err(path, e, 2))
}

// ----------------------------------------------------------------- outputs

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| file_err(path, e, 2)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Serializes one graph, rebuilding it in strict mode first when requested.
fn render_graph(g: &GradGraph, strict: bool) -> Result<String, Failure> {
    if strict {
        let rebuilt =
            rebuild_with_mode(g, GraphMode::Strict).map_err(|e| Failure::new(1, e.to_string()))?;
        Ok(save_to_string(&rebuilt))
    } else {
        Ok(save_to_string(g))
    }
}

/// Single-document verbs: write the graph and print its element counts.
fn emit_graph(g: &GradGraph, opts: &Options) -> Result<(), Failure> {
    let text = render_graph(g, opts.strict)?;
    write_output(&opts.out, &text)?;
    eprintln!("{}", counts_line(g));
    Ok(())
}

/// A collection goes to one plain document when it has a single graph, to
/// numbered files under --out otherwise, and to standard output with
/// `# graph i/N` separator comments (skipped by every parser) otherwise.
fn write_collection(coll: &GraphCollection, opts: &Options) -> Result<(), Failure> {
    match (&opts.out, coll.len()) {
        (_, 0) => Ok(()),
        (_, 1) => {
            let text = render_graph(coll.iter().next().expect("one graph"), opts.strict)?;
            write_output(&opts.out, &text)
        }
        (Some(path), _) => {
            for (i, g) in coll.iter().enumerate() {
                let text = render_graph(g, opts.strict)?;
                let numbered = numbered_path(path, i + 1);
                std::fs::write(&numbered, text).map_err(|e| file_err(&numbered, e, 2))?;
            }
            Ok(())
        }
        (None, n) => {
            let mut s = String::new();
            for (i, g) in coll.iter().enumerate() {
                writeln!(s, "# graph {}/{n}", i + 1).unwrap();
                s.push_str(&render_graph(g, opts.strict)?);
            }
            print!("{s}");
            Ok(())
        }
    }
}

/// `out.grad` -> `out.3.grad`; extensionless paths get `.3` appended.
fn numbered_path(path: &Path, i: usize) -> PathBuf {
    match (path.file_stem(), path.extension()) {
        (Some(stem), Some(ext)) => path.with_file_name(format!(
            "{}.{i}.{}",
            stem.to_string_lossy(),
            ext.to_string_lossy()
        )),
        _ => {
            let mut name = path.as_os_str().to_os_string();
            name.push(format!(".{i}"));
            PathBuf::from(name)
        }
    }
}

fn counts_line(g: &GradGraph) -> String {
    format!(
        "entities={} attributes={} literals={} edges={}",
        g.entity_count(),
        g.attribute_count(),
        g.literal_count(),
        g.edge_count()
    )
}

// ------------------------------------------------------------------ tables

/// Binding table: one column per pattern variable in declaration order,
/// then one `#e<i>` column per pattern edge; one row per match, cells
/// rendered as identity keys or tagged values.
fn render_table(g: &GradGraph, p: &GraphPattern, ms: &MatchSet) -> String {
    let mut head: Vec<String> = p.nodes.iter().map(|n| n.var.clone()).collect();
    for i in 0..p.edges.len() {
        head.push(format!("#e{i}"));
    }
    let mut out = head.join("\t");
    out.push('\n');
    for m in ms.iter() {
        let mut cells = Vec::with_capacity(head.len());
        for n in &p.nodes {
            let r = m.node(&n.var).expect("complete match binds every var");
            cells.push(node_cell(g, r));
        }
        for e in &m.edge_bindings {
            cells.push(edge_cell(g, e));
        }
        out.push_str(&cells.join("\t"));
        out.push('\n');
    }
    out
}

fn node_cell(g: &GradGraph, r: NodeRef) -> String {
    match r {
        NodeRef::Entity(id) => g.entity_order_key(id).to_string(),
        NodeRef::Attribute(id) => g.attribute_order_key(id).to_string(),
        NodeRef::Literal(id) => {
            let l = g.literal(id).expect("bound literal");
            let mut cell = format_value(l.value());
            if !l.context().is_empty() {
                cell.push(' ');
                cell.push_str(&format_map(l.context()));
            }
            cell
        }
    }
}

fn edge_cell(g: &GradGraph, e: &EdgeRef) -> String {
    match e {
        EdgeRef::Entity(id) => g.edge_order_key(*id).to_string(),
        EdgeRef::Attribute(id) => g.attribute_order_key(*id).to_string(),
        EdgeRef::Literal(id) => {
            let l = g.literal(*id).expect("bound literal");
            let mut cell = format!(
                "{}->{}",
                g.attribute_order_key(l.owner()),
                format_value(l.value())
            );
            if !l.context().is_empty() {
                cell.push(' ');
                cell.push_str(&format_map(l.context()));
            }
            cell
        }
    }
}

// ------------------------------------------------------------- strict mode

/// Copies a graph element-by-element into the requested mode; strict mode
/// makes duplicate identities fail at add time.
fn rebuild_with_mode(g: &GradGraph, mode: GraphMode) -> grad::Result<GradGraph> {
    let mut out = GradGraph::with_mode(mode);
    let mut entities = BTreeMap::new();
    for (id, n) in g.entities() {
        entities.insert(
            id,
            out.add_entity_node(n.class_label(), n.identifiers().clone())?,
        );
    }
    let mut attrs = BTreeMap::new();
    for (id, a) in g.attributes() {
        attrs.insert(id, out.add_attribute(entities[&a.owner()], a.label())?);
    }
    for (_, l) in g.literals() {
        out.add_literal(attrs[&l.owner()], l.value().clone(), l.context().clone())?;
    }
    for (_, e) in g.entity_edges() {
        out.add_entity_edge(
            entities[&e.start()],
            entities[&e.end()],
            e.kind(),
            e.label(),
            e.attributes().clone(),
        )?;
    }
    Ok(out)
}
