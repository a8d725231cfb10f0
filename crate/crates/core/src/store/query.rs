//! Conjunctive class-expression queries: `C and p value x and p some D`.
//!
//! Bare names resolve to the default (`:`) prefix. Class membership
//! follows `rdfs:subClassOf` transitively.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use super::{Name, NodeValue, StoreError, TripleGraph, RDFS_NS, RDF_NS};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Atom {
    Class(Name),
    Value { property: Name, individual: Name },
    Some { property: Name, class: Name },
}

/// A non-empty conjunction of atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryExpr {
    atoms: Vec<Atom>,
}

impl QueryExpr {
    pub fn new(atoms: Vec<Atom>) -> Result<Self, StoreError> {
        if atoms.is_empty() {
            return Err(StoreError::QuerySyntax { position: 0, message: "a query needs at least one atom".into() });
        }
        Ok(QueryExpr { atoms })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }
}

fn query_name(word: &str, position: usize) -> Result<Name, StoreError> {
    let (prefix, local) = word.split_once(':').unwrap_or(("", word));
    Name::new(prefix, local).map_err(|_| StoreError::QuerySyntax { position, message: format!("{word:?} is not a valid name") })
}

impl FromStr for QueryExpr {
    type Err = StoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let words: Vec<&str> = s.split_whitespace().collect();
        let syntax = |position: usize, message: String| StoreError::QuerySyntax { position, message };
        let mut atoms = Vec::new();
        let mut i = 0;
        loop {
            let Some(&head) = words.get(i) else {
                return Err(syntax(i, "expected a name".into()));
            };
            if matches!(head, "and" | "value" | "some") {
                return Err(syntax(i, format!("expected a name, found keyword {head:?}")));
            }
            let first = query_name(head, i)?;
            let atom = match words.get(i + 1) {
                Some(&kw @ ("value" | "some")) => {
                    let target = words
                        .get(i + 2)
                        .filter(|w| !matches!(**w, "and" | "value" | "some"))
                        .ok_or_else(|| syntax(i + 2, format!("expected a name after {kw:?}")))?;
                    let target = query_name(target, i + 2)?;
                    i += 3;
                    if kw == "value" {
                        Atom::Value { property: first, individual: target }
                    } else {
                        Atom::Some { property: first, class: target }
                    }
                }
                _ => {
                    i += 1;
                    Atom::Class(first)
                }
            };
            atoms.push(atom);
            match words.get(i) {
                None => break,
                Some(&"and") => i += 1,
                Some(other) => return Err(syntax(i, format!("expected 'and', found {other:?}"))),
            }
        }
        QueryExpr::new(atoms)
    }
}

impl fmt::Display for QueryExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, atom) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(" and ")?;
            }
            match atom {
                Atom::Class(c) => write!(f, "{c}")?,
                Atom::Value { property, individual } => write!(f, "{property} value {individual}")?,
                Atom::Some { property, class } => write!(f, "{property} some {class}")?,
            }
        }
        Ok(())
    }
}

struct Vocabulary {
    classes: BTreeSet<Name>,
    properties: BTreeSet<Name>,
    nodes: BTreeSet<Name>,
}

impl Vocabulary {
    fn of(graph: &TripleGraph, rdf_type: Option<&Name>, sub_class: Option<&Name>) -> Self {
        let mut v = Vocabulary { classes: BTreeSet::new(), properties: BTreeSet::new(), nodes: BTreeSet::new() };
        for t in graph.iter() {
            v.properties.insert(t.predicate.clone());
            v.nodes.insert(t.subject.clone());
            if let NodeValue::Name(o) = &t.object {
                v.nodes.insert(o.clone());
                if Some(&t.predicate) == rdf_type || Some(&t.predicate) == sub_class {
                    v.classes.insert(o.clone());
                }
            }
            if Some(&t.predicate) == sub_class {
                v.classes.insert(t.subject.clone());
            }
        }
        v
    }
}

struct Evaluator<'g> {
    graph: &'g TripleGraph,
    rdf_type: Option<Name>,
    sub_class: Option<Name>,
}

impl Evaluator<'_> {
    /// `class` and every class below it.
    fn subclass_closure(&self, class: &Name) -> BTreeSet<Name> {
        let mut seen = BTreeSet::from([class.clone()]);
        let Some(sub_class) = &self.sub_class else {
            return seen;
        };
        let mut queue = VecDeque::from([class.clone()]);
        while let Some(c) = queue.pop_front() {
            let target = NodeValue::Name(c);
            for sub in self.graph.subjects(sub_class, &target) {
                if seen.insert(sub.clone()) {
                    queue.push_back(sub.clone());
                }
            }
        }
        seen
    }

    fn instances(&self, class: &Name) -> BTreeSet<Name> {
        let Some(rdf_type) = &self.rdf_type else {
            return BTreeSet::new();
        };
        let closure = self.subclass_closure(class);
        self.graph
            .iter()
            .filter(|t| &t.predicate == rdf_type && t.object.as_name().is_some_and(|c| closure.contains(c)))
            .map(|t| t.subject.clone())
            .collect()
    }

    fn atom(&self, atom: &Atom) -> BTreeSet<Name> {
        match atom {
            Atom::Class(c) => self.instances(c),
            Atom::Value { property, individual } => {
                let target = NodeValue::Name(individual.clone());
                self.graph.subjects(property, &target).cloned().collect()
            }
            Atom::Some { property, class } => {
                let members = self.instances(class);
                self.graph
                    .iter()
                    .filter(|t| &t.predicate == property && t.object.as_name().is_some_and(|o| members.contains(o)))
                    .map(|t| t.subject.clone())
                    .collect()
            }
        }
    }
}

/// Individuals satisfying every atom of `expr`.
///
/// Every name in the expression must occur in the graph in a matching role;
/// otherwise the unknown names are reported. An empty graph answers every
/// query with the empty set.
pub fn query(graph: &TripleGraph, expr: &QueryExpr) -> Result<BTreeSet<Name>, StoreError> {
    if graph.is_empty() {
        return Ok(BTreeSet::new());
    }
    let eval = Evaluator { graph, rdf_type: graph.name_in(RDF_NS, "type").ok(), sub_class: graph.name_in(RDFS_NS, "subClassOf").ok() };
    let vocab = Vocabulary::of(graph, eval.rdf_type.as_ref(), eval.sub_class.as_ref());
    let mut unknown = Vec::new();
    for atom in expr.atoms() {
        let (names, sets): (Vec<&Name>, Vec<&BTreeSet<Name>>) = match atom {
            Atom::Class(c) => (vec![c], vec![&vocab.classes]),
            Atom::Value { property, individual } => (vec![property, individual], vec![&vocab.properties, &vocab.nodes]),
            Atom::Some { property, class } => (vec![property, class], vec![&vocab.properties, &vocab.classes]),
        };
        for (name, set) in names.into_iter().zip(sets) {
            if !set.contains(name) && !unknown.contains(name) {
                unknown.push(name.clone());
            }
        }
    }
    if !unknown.is_empty() {
        return Err(StoreError::UnknownNames(unknown));
    }

    let mut atoms = expr.atoms().iter();
    let first = atoms.next().map(|a| eval.atom(a)).unwrap_or_default();
    Ok(atoms.fold(first, |acc, atom| {
        let next = eval.atom(atom);
        acc.intersection(&next).cloned().collect()
    }))
}
