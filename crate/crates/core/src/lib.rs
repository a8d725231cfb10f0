//! Adaptive e-learning engine driven by Felder-Silverman learning styles.
//!
//! * [`style`]: questionnaire scoring, behavior-event deltas, the threshold
//!   settlement rule and page composition.
//! * [`store`]: the ontology triple store with its text format, query
//!   evaluator and consistency rules.
//! * [`agents`]: an in-process FIPA-style agent platform.
//! * [`adaptation`]: the Monitor and Update agents.
//! * [`service`]: the HTTP service.
//! * [`sim`]: deterministic replay of behavior traces.

pub mod adaptation;
pub mod agents;
pub mod service;
pub mod sim;
pub mod store;
pub mod style;
