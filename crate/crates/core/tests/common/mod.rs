//! Shared generators and brute-force oracles for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use adaptalearn::store::{self, Atom, Name, NodeValue, QueryExpr, TripleGraph, RDFS_NS, RDF_NS};
use adaptalearn::style::{BehaviorEventKind, Dimension, LearnerStyleProfile};
use rand::seq::SliceRandom;
use rand::Rng;

pub const HEAD: &str = "@prefix : <http://adaptalearn.example/ontology#> .
@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
";

/// Random ontology text: up to `max_individuals` individuals, six classes
/// with random (possibly cyclic) subclass edges, three object properties
/// and some literal-valued triples.
pub fn random_graph_text(rng: &mut impl Rng, max_individuals: usize) -> String {
    let n = rng.gen_range(1..=max_individuals);
    let mut out = String::from(HEAD);
    for _ in 0..rng.gen_range(0..8) {
        out.push_str(&format!(":C{} rdfs:subClassOf :C{} .\n", rng.gen_range(0..6), rng.gen_range(0..6)));
    }
    for i in 0..n {
        for _ in 0..rng.gen_range(0..3) {
            out.push_str(&format!(":i{i} rdf:type :C{} .\n", rng.gen_range(0..6)));
        }
        for _ in 0..rng.gen_range(0..4) {
            out.push_str(&format!(":i{i} :p{} :i{} .\n", rng.gen_range(0..3), rng.gen_range(0..n)));
        }
        if rng.gen_bool(0.3) {
            out.push_str(&format!(":i{i} :label \"node {i}\" .\n:i{i} :rank \"{}\"^^xsd:integer .\n", rng.gen_range(-9..9)));
        }
    }
    out
}

/// `(sub, sup)` pairs of the reflexive-transitive subclass relation over
/// `classes`, computed by naive fixpoint iteration.
fn subclass_pairs(graph: &TripleGraph, classes: &BTreeSet<Name>) -> BTreeSet<(Name, Name)> {
    let sub = Name::new("rdfs", "subClassOf").unwrap();
    let mut pairs: BTreeSet<(Name, Name)> = classes.iter().map(|c| (c.clone(), c.clone())).collect();
    for t in graph.iter().filter(|t| t.predicate == sub) {
        if let NodeValue::Name(o) = &t.object {
            pairs.insert((t.subject.clone(), o.clone()));
        }
    }
    loop {
        let mut grown = pairs.clone();
        for (a, b) in &pairs {
            for (c, d) in &pairs {
                if b == c {
                    grown.insert((a.clone(), d.clone()));
                }
            }
        }
        if grown.len() == pairs.len() {
            return pairs;
        }
        pairs = grown;
    }
}

/// Evaluates a conjunctive query by checking every atom against every node.
pub fn brute_force_query(graph: &TripleGraph, expr: &QueryExpr) -> BTreeSet<Name> {
    let ty = Name::new("rdf", "type").unwrap();
    let mut nodes = BTreeSet::new();
    for t in graph.iter() {
        nodes.insert(t.subject.clone());
        if let NodeValue::Name(o) = &t.object {
            nodes.insert(o.clone());
        }
    }
    let pairs = subclass_pairs(graph, &nodes);
    let is_a = |x: &Name, class: &Name| {
        graph.iter().any(|t| {
            t.subject == *x && t.predicate == ty && matches!(&t.object, NodeValue::Name(d) if pairs.contains(&(d.clone(), class.clone())))
        })
    };
    let holds = |x: &Name, atom: &Atom| match atom {
        Atom::Class(c) => is_a(x, c),
        Atom::Value { property, individual } => {
            graph.iter().any(|t| t.subject == *x && t.predicate == *property && t.object == NodeValue::Name(individual.clone()))
        }
        Atom::Some { property, class } => {
            graph.iter().any(|t| t.subject == *x && t.predicate == *property && matches!(&t.object, NodeValue::Name(y) if is_a(y, class)))
        }
    };
    nodes.into_iter().filter(|x| expr.atoms().iter().all(|a| holds(x, a))).collect()
}

/// A random query using only names that occur in the graph in the right role.
pub fn random_query(rng: &mut impl Rng, graph: &TripleGraph) -> Option<QueryExpr> {
    let ty = graph.name_in(RDF_NS, "type").ok()?;
    let sub = graph.name_in(RDFS_NS, "subClassOf").ok();
    let mut classes = Vec::new();
    let mut props = Vec::new();
    let mut nodes = Vec::new();
    for t in graph.iter() {
        if !props.contains(&t.predicate) && t.predicate != ty && Some(&t.predicate) != sub.as_ref() {
            props.push(t.predicate.clone());
        }
        if let NodeValue::Name(o) = &t.object {
            if (t.predicate == ty || Some(&t.predicate) == sub.as_ref()) && !classes.contains(o) {
                classes.push(o.clone());
            }
            if !nodes.contains(o) {
                nodes.push(o.clone());
            }
        }
    }
    let mut atoms = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let atom = match rng.gen_range(0..3) {
            0 => Atom::Class(classes.choose(rng)?.clone()),
            1 => Atom::Value { property: props.choose(rng)?.clone(), individual: nodes.choose(rng)?.clone() },
            _ => Atom::Some { property: props.choose(rng)?.clone(), class: classes.choose(rng)?.clone() },
        };
        atoms.push(atom);
    }
    QueryExpr::new(atoms).ok()
}

/// Reference fold: apply each event's delta to its accumulator.
pub fn fold_events(accs: [i32; 4], events: &[BehaviorEventKind]) -> [i32; 4] {
    let mut out = accs;
    for e in events {
        let (i, d) = match e {
            BehaviorEventKind::HideChallenges => (0, -2),
            BehaviorEventKind::ShowAllChallenges => (0, 2),
            BehaviorEventKind::HideQuizzes => (1, -2),
            BehaviorEventKind::ShowAllQuizzes => (1, 2),
            BehaviorEventKind::TextExplanation => (2, -2),
            BehaviorEventKind::WatchVideo => (2, 2),
            BehaviorEventKind::GalleryView => (3, -2),
            BehaviorEventKind::ContentView => (3, 2),
        };
        out[i] += d;
    }
    out
}

/// Reference settle, one threshold crossing at a time.
pub fn settle_oracle(score: i32, acc: i32) -> (i32, i32) {
    let (mut s, mut a) = (score, acc);
    loop {
        if a >= 5 {
            s = (s + 2).min(11);
            a -= 5;
        } else if a <= -5 {
            s = (s - 2).max(-11);
            a += 5;
        } else {
            return (s, a);
        }
    }
}

pub fn settle_profile_oracle(scores: [i32; 4], accs: [i32; 4]) -> ([i32; 4], [i32; 4]) {
    let mut s = scores;
    let mut a = accs;
    for i in 0..4 {
        (s[i], a[i]) = settle_oracle(scores[i], accs[i]);
    }
    (s, a)
}

pub fn profile(scores: [i32; 4], accs: [i32; 4]) -> LearnerStyleProfile {
    LearnerStyleProfile::from_raw("p", scores, accs).unwrap()
}

pub fn parse(text: &str) -> TripleGraph {
    store::parse(text).unwrap_or_else(|e| panic!("{e}\n{text}"))
}

pub fn dim_index(d: Dimension) -> usize {
    Dimension::ALL.iter().position(|x| *x == d).unwrap()
}
