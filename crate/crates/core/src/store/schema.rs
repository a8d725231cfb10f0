//! Learner and course vocabularies, and the mappings between graph triples
//! and domain values.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Literal, Name, NodeValue, StoreError, Triple, TripleGraph, ONTO_NS, RDFS_NS, RDF_NS};
use crate::style::{ChangeAccumulator, Dimension, DimensionScore, LearnerStyleProfile, PerDimension};

/// Local names of the fixed vocabularies, all in [`ONTO_NS`].
pub struct Vocab;

impl Vocab {
    pub const LEARNER: &'static str = "Learner";
    pub const HAS_ID: &'static str = "hasId";
    pub const HAS_NAME: &'static str = "hasName";
    pub const TAKES_COURSE: &'static str = "takesCourse";

    pub const FIELD: &'static str = "Field";
    pub const COURSE: &'static str = "Course";
    pub const MODULE: &'static str = "Module";
    pub const RESOURCE: &'static str = "Resource";
    pub const HAS_COURSE: &'static str = "hasCourse";
    pub const HAS_MODULE: &'static str = "hasModule";
    pub const HAS_RESOURCE: &'static str = "hasResource";
    pub const RESOURCE_URL: &'static str = "resourceURL";
    pub const RESOURCE_KIND: &'static str = "resourceKind";
    pub const ORDER_INDEX: &'static str = "orderIndex";

    pub const fn dim_property(dim: Dimension) -> &'static str {
        match dim {
            Dimension::AR => "dimAR",
            Dimension::SI => "dimSI",
            Dimension::VV => "dimVV",
            Dimension::SG => "dimSG",
        }
    }

    pub const fn change_property(dim: Dimension) -> &'static str {
        match dim {
            Dimension::AR => "changeAR",
            Dimension::SI => "changeSI",
            Dimension::VV => "changeVV",
            Dimension::SG => "changeSG",
        }
    }
}

fn onto(graph: &TripleGraph, local: &str) -> Result<Name, StoreError> {
    graph.name_in(ONTO_NS, local)
}

fn rdf_type(graph: &TripleGraph) -> Result<Name, StoreError> {
    graph.name_in(RDF_NS, "type")
}

fn single_integer(graph: &TripleGraph, subject: &Name, property: &Name) -> Result<i64, StoreError> {
    let values: Vec<&NodeValue> = graph.objects(subject, property).collect();
    let malformed = |message: String| StoreError::Malformed { subject: subject.to_string(), message };
    match values.as_slice() {
        [value] => value.as_literal().and_then(Literal::as_integer).ok_or_else(|| malformed(format!("{property} is not an integer"))),
        [] => Err(malformed(format!("missing {property}"))),
        _ => Err(malformed(format!("{} values for functional property {property}", values.len()))),
    }
}

/// The individual carrying `hasId "<learner_id>"` and typed `Learner`.
pub fn learner_name(graph: &TripleGraph, learner_id: &str) -> Result<Name, StoreError> {
    let not_found = || StoreError::NotFound { kind: "learner", id: learner_id.to_owned() };
    let has_id = onto(graph, Vocab::HAS_ID).map_err(|_| not_found())?;
    let learner_class = onto(graph, Vocab::LEARNER).map_err(|_| not_found())?;
    let learners = graph.instances_of(&learner_class);
    let id = NodeValue::Literal(Literal::string(learner_id));
    let found = graph.subjects(&has_id, &id).find(|s| learners.contains(*s)).cloned();
    found.ok_or_else(not_found)
}

/// Creates the learner individual (type, id and display name) if absent.
pub fn ensure_learner(graph: &mut TripleGraph, learner_id: &str, display_name: &str) -> Result<Name, StoreError> {
    if let Ok(existing) = learner_name(graph, learner_id) {
        return Ok(existing);
    }
    let subject = onto(graph, learner_id)?;
    let typ = rdf_type(graph)?;
    let class = onto(graph, Vocab::LEARNER)?;
    let has_id = onto(graph, Vocab::HAS_ID)?;
    let has_name = onto(graph, Vocab::HAS_NAME)?;
    graph.insert(Triple::new(subject.clone(), typ, class))?;
    graph.insert(Triple::new(subject.clone(), has_id, Literal::string(learner_id)))?;
    graph.insert(Triple::new(subject.clone(), has_name, Literal::string(display_name)))?;
    Ok(subject)
}

/// Reads the four scores and four accumulators of a learner.
pub fn read_profile(graph: &TripleGraph, learner_id: &str) -> Result<LearnerStyleProfile, StoreError> {
    let subject = learner_name(graph, learner_id)?;
    let mut scores = [DimensionScore::new(1).expect("1 is a valid score"); 4];
    let mut accumulators = [ChangeAccumulator::default(); 4];
    for dim in Dimension::ALL {
        let raw = single_integer(graph, &subject, &onto(graph, Vocab::dim_property(dim))?)?;
        scores[dim.index()] = i32::try_from(raw).ok().and_then(|v| DimensionScore::new(v).ok()).ok_or_else(|| StoreError::Malformed {
            subject: subject.to_string(),
            message: format!("{} = {raw} is not an odd score in [-11, 11]", Vocab::dim_property(dim)),
        })?;
        let raw = single_integer(graph, &subject, &onto(graph, Vocab::change_property(dim))?)?;
        accumulators[dim.index()] = ChangeAccumulator(i32::try_from(raw).map_err(|_| StoreError::Malformed {
            subject: subject.to_string(),
            message: format!("{} = {raw} overflows", Vocab::change_property(dim)),
        })?);
    }
    Ok(LearnerStyleProfile { learner_id: learner_id.to_owned(), scores: PerDimension(scores), accumulators: PerDimension(accumulators) })
}

/// Replaces the learner's eight score/accumulator triples. Nothing else changes.
pub fn write_profile(graph: &mut TripleGraph, profile: &LearnerStyleProfile) -> Result<(), StoreError> {
    let subject = learner_name(graph, &profile.learner_id)?;
    for dim in Dimension::ALL {
        let values = [
            (Vocab::dim_property(dim), i64::from(profile.scores[dim].value())),
            (Vocab::change_property(dim), i64::from(profile.accumulators[dim].0)),
        ];
        for (property, value) in values {
            let property = onto(graph, property)?;
            let stale: Vec<Triple> =
                graph.objects(&subject, &property).map(|o| Triple::new(subject.clone(), property.clone(), o.clone())).collect();
            for t in &stale {
                graph.remove(t);
            }
            graph.insert(Triple::new(subject.clone(), property, Literal::integer(value)))?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResourceKind {
    Video,
    Text,
    Quiz,
    Challenge,
}

impl ResourceKind {
    pub const fn as_str(self) -> &'static str {
        match self {
            ResourceKind::Video => "video",
            ResourceKind::Text => "text",
            ResourceKind::Quiz => "quiz",
            ResourceKind::Challenge => "challenge",
        }
    }
}

impl fmt::Display for ResourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ResourceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "video" => Ok(ResourceKind::Video),
            "text" => Ok(ResourceKind::Text),
            "quiz" => Ok(ResourceKind::Quiz),
            "challenge" => Ok(ResourceKind::Challenge),
            other => Err(format!("unknown resource kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceEntry {
    /// Local name of the resource individual.
    pub id: String,
    pub title: Option<String>,
    pub url: String,
    pub kind: ResourceKind,
    pub order_index: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleEntry {
    pub id: String,
    pub title: Option<String>,
    pub course: Option<String>,
}

fn label(graph: &TripleGraph, subject: &Name) -> Option<String> {
    let rdfs_label = graph.name_in(RDFS_NS, "label").ok()?;
    let value = graph.objects(subject, &rdfs_label).find_map(NodeValue::as_literal)?;
    Some(value.lexical().to_owned())
}

/// All individuals typed `Module`, in name order.
pub fn list_modules(graph: &TripleGraph) -> Result<Vec<ModuleEntry>, StoreError> {
    let Ok(module_class) = onto(graph, Vocab::MODULE) else {
        return Ok(Vec::new());
    };
    let has_module = onto(graph, Vocab::HAS_MODULE)?;
    Ok(graph
        .instances_of(&module_class)
        .into_iter()
        .map(|m| {
            let target = NodeValue::Name(m.clone());
            let course = graph.subjects(&has_module, &target).next().map(|c| c.local.clone());
            ModuleEntry { id: m.local.clone(), title: label(graph, &m), course }
        })
        .collect())
}

fn first_literal<'g>(graph: &'g TripleGraph, subject: &'g Name, property: &'g Name) -> Option<&'g str> {
    graph.objects(subject, property).find_map(NodeValue::as_literal).map(Literal::lexical)
}

/// Resources of a module sorted by ascending `orderIndex`.
pub fn list_module_resources(graph: &TripleGraph, module: &Name) -> Result<Vec<ResourceEntry>, StoreError> {
    let not_found = || StoreError::NotFound { kind: "module", id: module.to_string() };
    let module_class = onto(graph, Vocab::MODULE).map_err(|_| not_found())?;
    if !graph.instances_of(&module_class).contains(module) {
        return Err(not_found());
    }
    let has_resource = onto(graph, Vocab::HAS_RESOURCE)?;
    let url_prop = onto(graph, Vocab::RESOURCE_URL)?;
    let kind_prop = onto(graph, Vocab::RESOURCE_KIND)?;
    let order_prop = onto(graph, Vocab::ORDER_INDEX)?;

    let mut out = Vec::new();
    for resource in graph.objects(module, &has_resource).filter_map(NodeValue::as_name) {
        let malformed = |message: String| StoreError::Malformed { subject: resource.to_string(), message };
        let url =
            first_literal(graph, resource, &url_prop).filter(|u| !u.is_empty()).ok_or_else(|| malformed("missing resourceURL".into()))?;
        let kind = first_literal(graph, resource, &kind_prop)
            .ok_or_else(|| malformed("missing resourceKind".into()))?
            .parse::<ResourceKind>()
            .map_err(malformed)?;
        let order_index = single_integer(graph, resource, &order_prop)?;
        out.push(ResourceEntry { id: resource.local.clone(), title: label(graph, resource), url: url.to_owned(), kind, order_index });
    }
    out.sort_by(|a, b| a.order_index.cmp(&b.order_index).then_with(|| a.id.cmp(&b.id)));
    Ok(out)
}
