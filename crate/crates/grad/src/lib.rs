//! grad: an embeddable typed graph engine.
//!
//! The data model partitions nodes into entities, attributes and literals.
//! An entity node and its attribute/literal subtree form a hypernode; entity
//! edges come in four kinds (association, generalization, aggregation,
//! composition) and carry labels plus attribute maps. Elements have
//! content-based identity keys; a validator checks integrity rules,
//! assertions and multiplicities; a closed algebra of six operators
//! (selection, cartesian product, composition, union, difference, join)
//! manipulates whole graphs; and a canonical line-oriented document format
//! round-trips graphs byte-exactly.

pub mod algebra;
pub mod constraints;
pub mod error;
pub mod graph;
pub mod io;
pub mod key;
pub mod matcher;
pub mod pattern;
pub mod template;
pub mod value;

#[cfg(test)]
pub(crate) mod fixtures;

pub use error::{GradError, Result};
pub use graph::{
    AttrId, AttributeNode, EdgeRef, ElementRef, EntityEdge, EntityEdgeId, EntityEdgeKind, EntityId,
    EntityNode, GradGraph, GraphMode, Hypernode, LitId, LiteralNode, NodeRef,
};
pub use key::IdentityKey;
pub use value::{compare_values, CompOp, Value};
