//! Rule-based consistency checks.
//!
//! | rule | constraint |
//! |------|------------|
//! | R1 | every `dim*` value is an odd integer in `[-11, 11]` |
//! | R2 | every `change*` value is an integer |
//! | R3 | each `Learner` has exactly one value per `dim*` / `change*` property |
//! | R4 | every `Resource` has a non-empty `resourceURL` and a legal `resourceKind` |
//! | R5 | the `rdfs:subClassOf` graph is acyclic |
//! | R6 | `orderIndex` values are distinct within a `Module` |

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::schema::{ResourceKind, Vocab};
use super::{Literal, Name, NodeValue, TripleGraph, ONTO_NS, RDFS_NS};
use crate::style::{Dimension, DimensionScore};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schema {
    /// R1, R2, R3, R5
    User,
    /// R4, R5, R6
    Course,
    /// all rules
    Combined,
}

impl Schema {
    fn checks_user(self) -> bool {
        matches!(self, Schema::User | Schema::Combined)
    }

    fn checks_course(self) -> bool {
        matches!(self, Schema::Course | Schema::Combined)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Finding {
    pub subject: Name,
    pub rule_id: String,
    pub message: String,
}

/// Findings ordered by subject, then rule id. Empty means consistent.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_consistent(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn count(&self, rule_id: &str) -> usize {
        self.findings.iter().filter(|f| f.rule_id == rule_id).count()
    }
}

struct Collector(Vec<Finding>);

impl Collector {
    fn push(&mut self, subject: &Name, rule: &str, message: String) {
        self.0.push(Finding { subject: subject.clone(), rule_id: rule.to_owned(), message });
    }
}

pub fn validate(graph: &TripleGraph, schema: Schema) -> ValidationReport {
    let mut out = Collector(Vec::new());
    let onto = |local: &str| graph.name_in(ONTO_NS, local).ok();

    if schema.checks_user() {
        check_learners(graph, &onto, &mut out);
    }
    check_subclass_cycles(graph, &mut out);
    if schema.checks_course() {
        check_resources(graph, &onto, &mut out);
        check_order_indices(graph, &onto, &mut out);
    }

    let mut findings = out.0;
    findings.sort();
    ValidationReport { findings }
}

fn check_learners(graph: &TripleGraph, onto: &dyn Fn(&str) -> Option<Name>, out: &mut Collector) {
    let dim_props: Vec<Name> = Dimension::ALL.iter().filter_map(|d| onto(Vocab::dim_property(*d))).collect();
    let change_props: Vec<Name> = Dimension::ALL.iter().filter_map(|d| onto(Vocab::change_property(*d))).collect();

    for t in graph.iter() {
        let literal = t.object.as_literal();
        if dim_props.contains(&t.predicate) {
            let ok =
                literal.and_then(Literal::as_integer).and_then(|v| i32::try_from(v).ok()).is_some_and(|v| DimensionScore::new(v).is_ok());
            if !ok {
                out.push(&t.subject, "R1", format!("{} must be an odd integer in [-11, 11], got {}", t.predicate, describe(&t.object)));
            }
        } else if change_props.contains(&t.predicate) && literal.and_then(Literal::as_integer).is_none() {
            out.push(&t.subject, "R2", format!("{} must be an integer, got {}", t.predicate, describe(&t.object)));
        }
    }

    let Some(learner) = onto(Vocab::LEARNER) else {
        return;
    };
    for individual in graph.instances_of(&learner) {
        for prop in dim_props.iter().chain(&change_props) {
            let n = graph.objects(&individual, prop).count();
            if n != 1 {
                out.push(&individual, "R3", format!("{prop} is functional: expected exactly 1 value, found {n}"));
            }
        }
    }
}

fn describe(value: &NodeValue) -> String {
    match value {
        NodeValue::Name(n) => n.to_string(),
        NodeValue::Literal(l) => format!("\"{}\"^^{}", l.lexical(), l.datatype()),
    }
}

fn check_resources(graph: &TripleGraph, onto: &dyn Fn(&str) -> Option<Name>, out: &mut Collector) {
    let (Some(resource), Some(url), Some(kind)) = (onto(Vocab::RESOURCE), onto(Vocab::RESOURCE_URL), onto(Vocab::RESOURCE_KIND)) else {
        return;
    };
    for r in graph.instances_of(&resource) {
        let has_url = graph.objects(&r, &url).filter_map(NodeValue::as_literal).any(|l| !l.lexical().is_empty());
        if !has_url {
            out.push(&r, "R4", "resource has no non-empty resourceURL".into());
        }
        let kinds: Vec<&NodeValue> = graph.objects(&r, &kind).collect();
        let legal = !kinds.is_empty() && kinds.iter().all(|k| k.as_literal().is_some_and(|l| l.lexical().parse::<ResourceKind>().is_ok()));
        if !legal {
            out.push(&r, "R4", "resourceKind must be one of video, text, quiz, challenge".into());
        }
    }
}

fn check_subclass_cycles(graph: &TripleGraph, out: &mut Collector) {
    let Ok(sub_class) = graph.name_in(RDFS_NS, "subClassOf") else {
        return;
    };
    let mut edges: BTreeMap<&Name, BTreeSet<&Name>> = BTreeMap::new();
    for t in graph.iter().filter(|t| t.predicate == sub_class) {
        if let NodeValue::Name(sup) = &t.object {
            edges.entry(&t.subject).or_default().insert(sup);
        }
    }
    let reach = |from: &Name| -> BTreeSet<&Name> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<&Name> = edges.get(from).into_iter().flatten().copied().collect();
        while let Some(n) = stack.pop() {
            if seen.insert(n) {
                stack.extend(edges.get(n).into_iter().flatten().copied());
            }
        }
        seen
    };
    let reachable: BTreeMap<&Name, BTreeSet<&Name>> = edges.keys().map(|n| (*n, reach(n))).collect();
    let mut reported: BTreeSet<&Name> = BTreeSet::new();
    for (&node, reached) in &reachable {
        if !reached.contains(node) || reported.contains(node) {
            continue;
        }
        // the cycle's members are the nodes that reach back to `node`
        let cycle: BTreeSet<&Name> = reached.iter().copied().filter(|m| reachable.get(m).is_some_and(|r| r.contains(node))).collect();
        let members = cycle.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(", ");
        let leader = *cycle.first().unwrap_or(&node);
        out.push(leader, "R5", format!("subclass cycle through {members}"));
        reported.extend(cycle);
    }
}

fn check_order_indices(graph: &TripleGraph, onto: &dyn Fn(&str) -> Option<Name>, out: &mut Collector) {
    let (Some(module), Some(has_resource), Some(order)) = (onto(Vocab::MODULE), onto(Vocab::HAS_RESOURCE), onto(Vocab::ORDER_INDEX)) else {
        return;
    };
    for m in graph.instances_of(&module) {
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        for r in graph.objects(&m, &has_resource).filter_map(NodeValue::as_name) {
            for idx in graph.objects(r, &order).filter_map(NodeValue::as_literal) {
                *seen.entry(idx.lexical().to_owned()).or_default() += 1;
            }
        }
        for (idx, n) in seen.into_iter().filter(|(_, n)| *n > 1) {
            out.push(&m, "R6", format!("orderIndex {idx} used by {n} resources"));
        }
    }
}
