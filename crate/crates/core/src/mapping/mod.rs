//! Translation between the graphical and textual halves of the language.
//!
//! A transition firing reads as a Given-When-Then triple: the labels of its
//! input places, its own label, and the labels of its output places. A
//! complete firing sequence of a workflow net therefore reads as a scenario,
//! and a set of scenarios can be folded back into a net.

mod scenarios;
mod to_feature;
mod to_net;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::petri::{Diagnostic, Marking, NetError, PetriNet};

pub use scenarios::{pn_to_scenarios, EnumerationOptions, ScenarioTrace};
pub use to_feature::{scenario_name, scenarios_to_feature, FeatureMeta};
pub use to_net::feature_to_pn;

/// Prefix marking a Then (or Given) line as a separate, concurrent state.
pub const PARALLEL_MARKER: &str = "in parallel:";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MappingError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("not a workflow net: {}", .0.iter().map(|d| d.message.as_str()).collect::<Vec<_>>().join("; "))]
    InvalidWorkflowNet(Vec<Diagnostic>),
    #[error("more than {limit} scenarios ({partial} enumerated before stopping)")]
    MaxScenariosExceeded { limit: usize, partial: usize },
    #[error("feature has no scenarios")]
    NoScenarios,
    #[error("scenario `{scenario}` must start with Given to anchor its initial state")]
    MissingInitialGiven { scenario: String },
    #[error("scenario `{scenario}`: expected {expected}, found `{found}`")]
    UnexpectedClause {
        scenario: String,
        expected: &'static str,
        found: String,
    },
    #[error("scenario `{scenario}` ends before its last When has a Then")]
    IncompleteScenario { scenario: String },
    #[error("scenario `{scenario}`: Given `{label}` does not name a current state")]
    UnknownState { scenario: String, label: String },
}

/// The Given-When-Then reading of one transition firing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GwtTriple {
    pub given: Vec<String>,
    pub when: String,
    pub then: Vec<String>,
    /// Set when the firing forks into several concurrent states.
    pub parallel: bool,
}

impl GwtTriple {
    /// Multi-line message form; extra states on either side are marked as
    /// parallel.
    pub fn to_text(&self) -> String {
        let mut lines = clause_lines("Given", &self.given);
        lines.push(format!("When {}", self.when));
        lines.extend(clause_lines("Then", &self.then));
        lines.join("\n")
    }
}

pub(crate) fn clause_lines(keyword: &str, labels: &[String]) -> Vec<String> {
    labels
        .iter()
        .enumerate()
        .map(|(i, label)| {
            if i == 0 {
                format!("{keyword} {label}")
            } else {
                format!("And {PARALLEL_MARKER} {label}")
            }
        })
        .collect()
}

pub(crate) fn triple_unchecked(net: &PetriNet, transition: &str) -> GwtTriple {
    let labels =
        |places: &[(String, u32)]| -> Vec<String> { places.iter().map(|(p, _)| net.label(p).to_string()).collect() };
    let then = labels(net.outputs(transition));
    GwtTriple {
        given: labels(net.inputs(transition)),
        when: net.label(transition).to_string(),
        parallel: then.len() > 1,
        then,
    }
}

/// GWT triple for firing `transition` under `marking`. Labels are ordered by
/// place id.
pub fn gwt_for_firing(net: &PetriNet, marking: &Marking, transition: &str) -> Result<GwtTriple, MappingError> {
    if !net.is_enabled(marking, transition)? {
        // Let the firing rule produce the detailed error.
        net.fire(marking, transition)?;
    }
    Ok(triple_unchecked(net, transition))
}
