//! Tabular ETL: delimiter-separated source tables plus an `etl/1` mapping
//! produce a graph in which every real-world entity is one hypernode,
//! however many rows mentioned it.
//!
//! ```text
//! etl/1
//! merge MOVIE on IMDB_ID
//! table movies
//! node m MOVIE
//! id IMDB_ID = id : int
//! attr Rating = rating : dec context Type = s:Audience
//! table actors
//! node m MOVIE
//! id IMDB_ID = movie_id : int
//! node a ACTOR
//! id ActorName = name : str
//! edge m a ACTS association attr ranking = ranking : int
//! ```
//!
//! Every row instantiates its table's node and edge specs; the declared
//! `merge` rules then fold equal-identity entities together (weak entities
//! only under merged parents, exactly as the join operator does). An empty
//! cell skips just the piece it feeds: an identifier column skips its node,
//! an attribute column its literal, an edge-attribute column its entry.
//! Declared column types are coerced explicitly and never inferred.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::algebra::{merge_roots, unify_groups, JoinPredicate, MergeRule};
use crate::error::{GradError, Result};
use crate::graph::{EntityEdgeKind, EntityId, GradGraph};
use crate::value::Value;

use super::{expect_header, parse_err, parse_value, unescape};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnType {
    Int,
    Decimal,
    Text,
    Bool,
}

impl ColumnType {
    pub fn name(self) -> &'static str {
        match self {
            ColumnType::Int => "int",
            ColumnType::Decimal => "dec",
            ColumnType::Text => "str",
            ColumnType::Bool => "bool",
        }
    }
}

impl std::str::FromStr for ColumnType {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        Ok(match s {
            "int" => ColumnType::Int,
            "dec" => ColumnType::Decimal,
            "str" => ColumnType::Text,
            "bool" => ColumnType::Bool,
            _ => return Err(()),
        })
    }
}

/// One delimited text table: a header line naming the columns, then rows
/// of matching arity.
#[derive(Debug, Clone)]
pub struct SourceTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl SourceTable {
    pub fn parse(name: &str, text: &str, delimiter: char) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| !l.trim().is_empty());
        let Some((_, header)) = lines.next() else {
            return Err(parse_err(1, format!("table {name:?} has no header line")));
        };
        let columns: Vec<String> = header.split(delimiter).map(str::to_string).collect();
        let mut seen = BTreeSet::new();
        for c in &columns {
            if !seen.insert(c) {
                return Err(parse_err(1, format!("duplicate column name {c:?}")));
            }
        }
        let mut rows = Vec::new();
        for (n, line) in lines {
            let cells: Vec<String> = line.split(delimiter).map(str::to_string).collect();
            if cells.len() != columns.len() {
                return Err(parse_err(
                    n,
                    format!(
                        "row has {} cells, header declares {} columns",
                        cells.len(),
                        columns.len()
                    ),
                ));
            }
            rows.push(cells);
        }
        Ok(SourceTable {
            name: name.to_string(),
            columns,
            rows,
        })
    }

    /// Loads a table file; the table is named after the file stem
    /// (`actors.dat` → `actors`).
    pub fn load_file(path: impl AsRef<Path>, delimiter: char) -> Result<Self> {
        let path = path.as_ref();
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let text = std::fs::read_to_string(path)?;
        SourceTable::parse(&name, &text, delimiter)
    }

    fn column_index(&self, column: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == column)
            .ok_or_else(|| {
                GradError::MappingError(format!("table {:?} has no column {column:?}", self.name))
            })
    }
}

/// `name = column : type` — an identifier or edge attribute fed by a cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnBinding {
    pub name: String,
    pub column: String,
    pub ty: ColumnType,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ContextSource {
    Constant(Value),
    Column { column: String, ty: ColumnType },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContextBinding {
    pub key: String,
    pub source: ContextSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttrSpec {
    pub label: String,
    pub column: String,
    pub ty: ColumnType,
    pub context: Vec<ContextBinding>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub var: String,
    pub class: String,
    pub ids: Vec<ColumnBinding>,
    pub attrs: Vec<AttrSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSpec {
    pub start: String,
    pub end: String,
    pub label: String,
    pub kind: EntityEdgeKind,
    pub attrs: Vec<ColumnBinding>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TableMapping {
    pub table: String,
    pub nodes: Vec<NodeSpec>,
    pub edges: Vec<EdgeSpec>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EtlMapping {
    pub merges: Vec<MergeRule>,
    pub tables: Vec<TableMapping>,
}

pub fn load_mapping(path: impl AsRef<Path>) -> Result<EtlMapping> {
    let text = std::fs::read_to_string(path)?;
    parse_mapping(&text)
}

pub fn parse_mapping(text: &str) -> Result<EtlMapping> {
    let (_, lines) = expect_header(text, "etl", "1")?;
    let mut mapping = EtlMapping::default();
    let mut current: Option<TableMapping> = None;

    let finish = |tm: TableMapping, mapping: &mut EtlMapping| -> Result<()> {
        let mut vars = BTreeSet::new();
        for node in &tm.nodes {
            if !vars.insert(node.var.as_str()) {
                return Err(GradError::MappingError(format!(
                    "table {:?} declares node {:?} twice",
                    tm.table, node.var
                )));
            }
            if node.ids.is_empty() {
                return Err(GradError::MappingError(format!(
                    "node {:?} in table {:?} declares no identifiers",
                    node.var, tm.table
                )));
            }
        }
        for edge in &tm.edges {
            for var in [&edge.start, &edge.end] {
                if !vars.contains(var.as_str()) {
                    return Err(GradError::MappingError(format!(
                        "edge {:?} in table {:?} references undeclared node {:?}",
                        edge.label, tm.table, var
                    )));
                }
            }
        }
        mapping.tables.push(tm);
        Ok(())
    };

    for (n, line) in lines {
        let fields: Vec<&str> = line.split(' ').filter(|f| !f.is_empty()).collect();
        match fields[0] {
            "merge" => {
                if fields.len() < 4 || fields[2] != "on" {
                    return Err(parse_err(n, "merge line is `merge CLASS on IDENTIFIER...`"));
                }
                mapping.merges.push(MergeRule {
                    class_label: unescape(fields[1]).map_err(|e| parse_err(n, e))?,
                    match_on: fields[3..]
                        .iter()
                        .map(|f| unescape(f))
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|e| parse_err(n, e))?,
                });
            }
            "table" => {
                if fields.len() != 2 {
                    return Err(parse_err(n, "table line is `table NAME`"));
                }
                if let Some(tm) = current.take() {
                    finish(tm, &mut mapping)?;
                }
                current = Some(TableMapping {
                    table: unescape(fields[1]).map_err(|e| parse_err(n, e))?,
                    ..TableMapping::default()
                });
            }
            "node" => {
                let tm = current
                    .as_mut()
                    .ok_or_else(|| parse_err(n, "node line outside any table section"))?;
                if fields.len() != 3 {
                    return Err(parse_err(n, "node line is `node VAR CLASS`"));
                }
                tm.nodes.push(NodeSpec {
                    var: unescape(fields[1]).map_err(|e| parse_err(n, e))?,
                    class: unescape(fields[2]).map_err(|e| parse_err(n, e))?,
                    ids: Vec::new(),
                    attrs: Vec::new(),
                });
            }
            "id" => {
                let tm = current
                    .as_mut()
                    .ok_or_else(|| parse_err(n, "id line outside any table section"))?;
                let node = tm
                    .nodes
                    .last_mut()
                    .ok_or_else(|| parse_err(n, "id line before any node line"))?;
                node.ids.push(parse_binding(&fields[1..], n, "id")?);
            }
            "attr" => {
                let tm = current
                    .as_mut()
                    .ok_or_else(|| parse_err(n, "attr line outside any table section"))?;
                let node = tm
                    .nodes
                    .last_mut()
                    .ok_or_else(|| parse_err(n, "attr line before any node line"))?;
                let base = parse_binding(&fields[1..6.min(fields.len())], n, "attr")?;
                let context = parse_context(&fields[6..], n)?;
                node.attrs.push(AttrSpec {
                    label: base.name,
                    column: base.column,
                    ty: base.ty,
                    context,
                });
            }
            "edge" => {
                let tm = current
                    .as_mut()
                    .ok_or_else(|| parse_err(n, "edge line outside any table section"))?;
                if fields.len() < 5 {
                    return Err(parse_err(
                        n,
                        "edge line is `edge FROM TO LABEL KIND [attr NAME = COLUMN : TYPE]...`",
                    ));
                }
                let kind: EntityEdgeKind = fields[4]
                    .parse()
                    .map_err(|_| parse_err(n, format!("unknown edge kind {:?}", fields[4])))?;
                let mut attrs = Vec::new();
                let mut rest = &fields[5..];
                while !rest.is_empty() {
                    if rest[0] != "attr" || rest.len() < 6 {
                        return Err(parse_err(
                            n,
                            "edge attributes are `attr NAME = COLUMN : TYPE` groups",
                        ));
                    }
                    attrs.push(parse_binding(&rest[1..6], n, "attr")?);
                    rest = &rest[6..];
                }
                tm.edges.push(EdgeSpec {
                    start: unescape(fields[1]).map_err(|e| parse_err(n, e))?,
                    end: unescape(fields[2]).map_err(|e| parse_err(n, e))?,
                    label: unescape(fields[3]).map_err(|e| parse_err(n, e))?,
                    kind,
                    attrs,
                });
            }
            other => return Err(parse_err(n, format!("unknown mapping directive {other:?}"))),
        }
    }
    if let Some(tm) = current.take() {
        finish(tm, &mut mapping)?;
    }
    Ok(mapping)
}

/// Parses `NAME = COLUMN : TYPE` (five tokens after the directive).
fn parse_binding(fields: &[&str], line: usize, what: &str) -> Result<ColumnBinding> {
    if fields.len() != 5 || fields[1] != "=" || fields[3] != ":" {
        return Err(parse_err(
            line,
            format!("{what} line is `{what} NAME = COLUMN : TYPE`"),
        ));
    }
    let ty: ColumnType = fields[4]
        .parse()
        .map_err(|_| parse_err(line, format!("unknown column type {:?}", fields[4])))?;
    Ok(ColumnBinding {
        name: unescape(fields[0]).map_err(|e| parse_err(line, e))?,
        column: unescape(fields[2]).map_err(|e| parse_err(line, e))?,
        ty,
    })
}

/// Parses the optional `context K = V ...` tail of an attr line, where V is
/// either a tagged value or `col COLUMN : TYPE`.
fn parse_context(fields: &[&str], line: usize) -> Result<Vec<ContextBinding>> {
    if fields.is_empty() {
        return Ok(Vec::new());
    }
    if fields[0] != "context" {
        return Err(parse_err(
            line,
            format!("expected `context`, found {:?}", fields[0]),
        ));
    }
    let mut out = Vec::new();
    let mut rest = &fields[1..];
    while !rest.is_empty() {
        if rest.len() < 3 || rest[1] != "=" {
            return Err(parse_err(line, "context entries are `KEY = VALUE` groups"));
        }
        let key = unescape(rest[0]).map_err(|e| parse_err(line, e))?;
        if rest[2] == "col" {
            if rest.len() < 6 || rest[4] != ":" {
                return Err(parse_err(
                    line,
                    "column-sourced context is `KEY = col COLUMN : TYPE`",
                ));
            }
            let ty: ColumnType = rest[5]
                .parse()
                .map_err(|_| parse_err(line, format!("unknown column type {:?}", rest[5])))?;
            out.push(ContextBinding {
                key,
                source: ContextSource::Column {
                    column: unescape(rest[3]).map_err(|e| parse_err(line, e))?,
                    ty,
                },
            });
            rest = &rest[6..];
        } else {
            out.push(ContextBinding {
                key,
                source: ContextSource::Constant(
                    parse_value(rest[2]).map_err(|e| parse_err(line, e))?,
                ),
            });
            rest = &rest[3..];
        }
    }
    Ok(out)
}

fn coerce(cell: &str, ty: ColumnType, line: usize, column: &str) -> Result<Value> {
    let err = || GradError::TypeCoercionError {
        line,
        column: column.to_string(),
        text: cell.to_string(),
        ty: ty.name(),
    };
    Ok(match ty {
        ColumnType::Int => Value::Int(cell.parse().map_err(|_| err())?),
        ColumnType::Decimal => Value::Decimal(cell.parse().map_err(|_| err())?),
        ColumnType::Text => Value::text(cell),
        ColumnType::Bool => match cell {
            "true" => Value::Bool(true),
            "false" => Value::Bool(false),
            _ => return Err(err()),
        },
    })
}

/// Runs the mapping over the tables. Row order never changes the result's
/// identity structure: rows are instantiated verbatim and the merge rules
/// fold equal identities afterwards.
pub fn etl(tables: &[SourceTable], mapping: &EtlMapping) -> Result<GradGraph> {
    let mut acc = GradGraph::new();
    for tm in &mapping.tables {
        let table = tables
            .iter()
            .find(|t| t.name == tm.table)
            .ok_or_else(|| GradError::MappingError(format!("unknown table {:?}", tm.table)))?;

        // Resolve every referenced column up front so a typo fails before
        // any row is read.
        let mut col: BTreeMap<&str, usize> = BTreeMap::new();
        let mut referenced: Vec<&str> = Vec::new();
        for node in &tm.nodes {
            referenced.extend(node.ids.iter().map(|b| b.column.as_str()));
            for attr in &node.attrs {
                referenced.push(attr.column.as_str());
                for c in &attr.context {
                    if let ContextSource::Column { column, .. } = &c.source {
                        referenced.push(column.as_str());
                    }
                }
            }
        }
        for edge in &tm.edges {
            referenced.extend(edge.attrs.iter().map(|b| b.column.as_str()));
        }
        for c in referenced {
            let idx = table.column_index(c)?;
            col.insert(c, idx);
        }

        for (ri, row) in table.rows.iter().enumerate() {
            let line = ri + 2; // 1-based, after the header line
            let mut vars: BTreeMap<&str, EntityId> = BTreeMap::new();
            for node in &tm.nodes {
                let mut ids = BTreeMap::new();
                let mut skip = false;
                for b in &node.ids {
                    let cell = row[col[b.column.as_str()]].trim();
                    if cell.is_empty() {
                        skip = true;
                        break;
                    }
                    ids.insert(b.name.clone(), coerce(cell, b.ty, line, &b.column)?);
                }
                if skip {
                    continue;
                }
                let id = acc.add_entity_node(&node.class, ids)?;
                vars.insert(node.var.as_str(), id);
                for attr in &node.attrs {
                    let cell = row[col[attr.column.as_str()]].trim();
                    if cell.is_empty() {
                        continue;
                    }
                    let value = coerce(cell, attr.ty, line, &attr.column)?;
                    let mut ctx = BTreeMap::new();
                    for c in &attr.context {
                        match &c.source {
                            ContextSource::Constant(v) => {
                                ctx.insert(c.key.clone(), v.clone());
                            }
                            ContextSource::Column { column, ty } => {
                                let cell = row[col[column.as_str()]].trim();
                                if cell.is_empty() {
                                    continue;
                                }
                                ctx.insert(c.key.clone(), coerce(cell, *ty, line, column)?);
                            }
                        }
                    }
                    let a = acc.add_attribute(id, &attr.label)?;
                    acc.add_literal(a, value, ctx)?;
                }
            }
            for edge in &tm.edges {
                let (Some(&s), Some(&e)) =
                    (vars.get(edge.start.as_str()), vars.get(edge.end.as_str()))
                else {
                    continue; // an endpoint was skipped by an empty id cell
                };
                let mut attrs = BTreeMap::new();
                for b in &edge.attrs {
                    let cell = row[col[b.column.as_str()]].trim();
                    if cell.is_empty() {
                        continue;
                    }
                    attrs.insert(b.name.clone(), coerce(cell, b.ty, line, &b.column)?);
                }
                acc.add_entity_edge(s, e, edge.kind, &edge.label, attrs)?;
            }
        }
    }

    let predicate = JoinPredicate::new(mapping.merges.clone())?;
    let (roots, _) = merge_roots(&acc, &predicate, &BTreeSet::new());
    unify_groups(&acc, &roots)
}
