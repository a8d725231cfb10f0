//! Triple store holding the learner and course ontologies.
//!
//! Graphs are persisted in a line-oriented Turtle subset (see [`parse`]),
//! queried with conjunctive class expressions (see [`query`]) and checked
//! by a fixed rule set (see [`validate`]).

mod persist;
mod query;
mod schema;
mod turtle;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use persist::KnowledgeStore;
pub use query::{query, Atom, QueryExpr};
pub use schema::{
    ensure_learner, learner_name, list_module_resources, list_modules, read_profile, write_profile, ModuleEntry, ResourceEntry,
    ResourceKind, Vocab,
};
pub use turtle::{parse, serialize};
pub use validate::{validate, Finding, Schema, ValidationReport};

pub const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS_NS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const XSD_NS: &str = "http://www.w3.org/2001/XMLSchema#";
/// Namespace of the learner and course vocabularies.
pub const ONTO_NS: &str = "http://adaptalearn.example/ontology#";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{column}: unexpected {token:?}, expected {expected}")]
    Syntax { line: usize, column: usize, token: String, expected: String },
    #[error("{line}:{column}: undeclared prefix {prefix:?}")]
    UndeclaredPrefix { line: usize, column: usize, prefix: String },
    #[error("{line}:{column}: invalid literal {lexical:?}: {reason}")]
    InvalidLiteral { line: usize, column: usize, lexical: String, reason: String },
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid name {0:?}")]
    InvalidName(String),
    #[error("invalid literal {lexical:?} for {datatype}: {reason}")]
    InvalidLiteral { lexical: String, datatype: Datatype, reason: String },
    #[error("prefix {0:?} is not declared")]
    UndeclaredPrefix(String),
    #[error("namespace {0} is not declared in the graph")]
    UndeclaredNamespace(String),
    #[error("unknown names in query: {}", join_names(.0))]
    UnknownNames(Vec<Name>),
    #[error("query syntax error at token {position}: {message}")]
    QuerySyntax { position: usize, message: String },
    #[error("{kind} {id:?} not found")]
    NotFound { kind: &'static str, id: String },
    #[error("malformed data for {subject}: {message}")]
    Malformed { subject: String, message: String },
    #[error("store I/O failed: {0}")]
    Io(#[from] std::io::Error),
}

fn join_names(names: &[Name]) -> String {
    names.iter().map(Name::to_string).collect::<Vec<_>>().join(", ")
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

pub(crate) fn is_valid_local(s: &str) -> bool {
    !s.is_empty() && s.chars().all(is_name_char)
}

pub(crate) fn is_valid_prefix(s: &str) -> bool {
    s.is_empty() || (s.starts_with(|c: char| c.is_ascii_alphabetic()) && s.chars().all(is_name_char))
}

/// A prefixed name such as `rdf:type` or `:monika123`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Name {
    pub prefix: String,
    pub local: String,
}

impl Name {
    pub fn new(prefix: impl Into<String>, local: impl Into<String>) -> Result<Self, StoreError> {
        let (prefix, local) = (prefix.into(), local.into());
        if !is_valid_prefix(&prefix) || !is_valid_local(&local) {
            return Err(StoreError::InvalidName(format!("{prefix}:{local}")));
        }
        Ok(Name { prefix, local })
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.prefix, self.local)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Datatype {
    Integer,
    String,
    Boolean,
    AnyUri,
}

impl Datatype {
    pub const fn xsd_local(self) -> &'static str {
        match self {
            Datatype::Integer => "integer",
            Datatype::String => "string",
            Datatype::Boolean => "boolean",
            Datatype::AnyUri => "anyURI",
        }
    }

    pub fn from_xsd_local(local: &str) -> Option<Self> {
        [Datatype::Integer, Datatype::String, Datatype::Boolean, Datatype::AnyUri].into_iter().find(|d| d.xsd_local() == local)
    }
}

impl fmt::Display for Datatype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "xsd:{}", self.xsd_local())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    lexical: String,
    datatype: Datatype,
}

impl Literal {
    pub fn new(lexical: impl Into<String>, datatype: Datatype) -> Result<Self, StoreError> {
        let lexical = lexical.into();
        let reason = match datatype {
            Datatype::Integer if lexical.parse::<i64>().is_err() => Some("not an integer"),
            Datatype::Boolean if lexical != "true" && lexical != "false" => Some("not a boolean"),
            Datatype::AnyUri if lexical.is_empty() => Some("empty URI"),
            _ => None,
        };
        match reason {
            Some(reason) => Err(StoreError::InvalidLiteral { lexical, datatype, reason: reason.into() }),
            None => Ok(Literal { lexical, datatype }),
        }
    }

    pub fn integer(value: i64) -> Self {
        Literal { lexical: value.to_string(), datatype: Datatype::Integer }
    }

    pub fn string(value: impl Into<String>) -> Self {
        Literal { lexical: value.into(), datatype: Datatype::String }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> Datatype {
        self.datatype
    }

    pub fn as_integer(&self) -> Option<i64> {
        match self.datatype {
            Datatype::Integer => self.lexical.parse().ok(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeValue {
    Name(Name),
    Literal(Literal),
}

impl NodeValue {
    pub fn as_name(&self) -> Option<&Name> {
        match self {
            NodeValue::Name(n) => Some(n),
            NodeValue::Literal(_) => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            NodeValue::Literal(l) => Some(l),
            NodeValue::Name(_) => None,
        }
    }
}

impl From<Name> for NodeValue {
    fn from(n: Name) -> Self {
        NodeValue::Name(n)
    }
}

impl From<Literal> for NodeValue {
    fn from(l: Literal) -> Self {
        NodeValue::Literal(l)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub subject: Name,
    pub predicate: Name,
    pub object: NodeValue,
}

impl Triple {
    pub fn new(subject: Name, predicate: Name, object: impl Into<NodeValue>) -> Self {
        Triple { subject, predicate, object: object.into() }
    }
}

/// Prefix table plus a duplicate-free, canonically ordered triple set.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TripleGraph {
    prefixes: BTreeMap<String, String>,
    triples: BTreeSet<Triple>,
}

impl TripleGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Graph with the standard prefixes and the vocabulary namespace as `:`.
    pub fn with_standard_prefixes() -> Self {
        let mut g = TripleGraph::new();
        for (label, iri) in [("", ONTO_NS), ("rdf", RDF_NS), ("rdfs", RDFS_NS), ("xsd", XSD_NS)] {
            g.declare_prefix(label, iri).expect("standard prefixes are valid");
        }
        g
    }

    pub fn declare_prefix(&mut self, label: impl Into<String>, iri: impl Into<String>) -> Result<(), StoreError> {
        let (label, iri) = (label.into(), iri.into());
        if !is_valid_prefix(&label) || iri.is_empty() || iri.contains(['<', '>', ' ']) {
            return Err(StoreError::InvalidName(format!("@prefix {label}: <{iri}>")));
        }
        self.prefixes.insert(label, iri);
        Ok(())
    }

    pub fn prefixes(&self) -> &BTreeMap<String, String> {
        &self.prefixes
    }

    /// The prefix label bound to `namespace`, smallest label first.
    pub fn prefix_for(&self, namespace: &str) -> Option<&str> {
        self.prefixes.iter().find(|(_, iri)| iri.as_str() == namespace).map(|(l, _)| l.as_str())
    }

    /// Builds a [`Name`] for `local` in `namespace`, if the namespace is declared.
    pub fn name_in(&self, namespace: &str, local: &str) -> Result<Name, StoreError> {
        let prefix = self.prefix_for(namespace).ok_or_else(|| StoreError::UndeclaredNamespace(namespace.to_owned()))?;
        Name::new(prefix, local)
    }

    pub fn expand(&self, name: &Name) -> Option<String> {
        self.prefixes.get(&name.prefix).map(|iri| format!("{iri}{}", name.local))
    }

    fn check_name(&self, name: &Name) -> Result<(), StoreError> {
        if self.prefixes.contains_key(&name.prefix) {
            Ok(())
        } else {
            Err(StoreError::UndeclaredPrefix(name.prefix.clone()))
        }
    }

    /// Inserts a triple; returns false when it was already present.
    pub fn insert(&mut self, triple: Triple) -> Result<bool, StoreError> {
        self.check_name(&triple.subject)?;
        self.check_name(&triple.predicate)?;
        match &triple.object {
            NodeValue::Name(n) => self.check_name(n)?,
            NodeValue::Literal(l) if l.datatype != Datatype::String && self.prefix_for(XSD_NS).is_none() => {
                return Err(StoreError::UndeclaredNamespace(XSD_NS.to_owned()));
            }
            NodeValue::Literal(_) => {}
        }
        Ok(self.triples.insert(triple))
    }

    pub fn remove(&mut self, triple: &Triple) -> bool {
        self.triples.remove(triple)
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Triples in canonical (subject, predicate, object) order.
    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn triples(&self) -> &BTreeSet<Triple> {
        &self.triples
    }

    pub fn objects<'a>(&'a self, subject: &'a Name, predicate: &'a Name) -> impl Iterator<Item = &'a NodeValue> + 'a {
        self.triples.iter().filter(move |t| &t.subject == subject && &t.predicate == predicate).map(|t| &t.object)
    }

    pub fn subjects<'a>(&'a self, predicate: &'a Name, object: &'a NodeValue) -> impl Iterator<Item = &'a Name> + 'a {
        self.triples.iter().filter(move |t| &t.predicate == predicate && &t.object == object).map(|t| &t.subject)
    }

    /// Individuals asserted with `rdf:type` exactly `class` (no subclass closure).
    pub fn instances_of(&self, class: &Name) -> BTreeSet<Name> {
        match self.name_in(RDF_NS, "type") {
            Ok(rdf_type) => {
                let class = NodeValue::Name(class.clone());
                self.subjects(&rdf_type, &class).cloned().collect()
            }
            Err(_) => BTreeSet::new(),
        }
    }
}
