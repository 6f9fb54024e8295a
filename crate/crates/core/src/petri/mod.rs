//! Workflow Petri nets: structure, the firing rule, PNML input/output and
//! structural analysis.
//!
//! A [`PetriNet`] is immutable once built. All token-game operations take a
//! [`Marking`] by reference and return a new one, so nets and markings can be
//! shared freely between sessions and threads.

mod analysis;
mod marking;
mod pnml;

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use analysis::{
    classify_constructs, reachable_markings, validate_workflow_net, ConstructKind, Diagnostic, DiagnosticKind,
    Reachability,
};
pub use marking::Marking;
pub use pnml::{parse_pnml, parse_pnml_with_warnings, write_pnml, PnmlWarning};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetError {
    #[error("malformed XML at line {line}, column {column}: {message}")]
    Xml { line: u32, column: u32, message: String },
    #[error("<{element}> at line {line} is missing the `{attribute}` attribute")]
    MissingAttribute {
        element: String,
        attribute: String,
        line: u32,
    },
    #[error("document contains no <net> element")]
    NoNet,
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("arc `{arc}` references unknown node `{node}`")]
    DanglingArc { arc: String, node: String },
    #[error("arc `{arc}` connects `{source_node}` to `{target}`; arcs must join a place and a transition")]
    NotBipartite {
        arc: String,
        source_node: String,
        target: String,
    },
    #[error("arc `{arc}` has invalid weight `{value}`")]
    InvalidWeight { arc: String, value: String },
    #[error("place `{place}` has invalid initial marking `{value}`")]
    InvalidMarking { place: String, value: String },
    #[error("unknown place `{0}`")]
    UnknownPlace(String),
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error("transition `{transition}` is not enabled: not enough tokens in {}", .deficient.join(", "))]
    NotEnabled { transition: String, deficient: Vec<String> },
}

/// Whether a node id names a place or a transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Place,
    Transition,
}

/// A state of the process. The label doubles as Given/Then text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Place {
    pub id: String,
    pub label: String,
}

/// An event or action. The label doubles as When text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub id: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arc {
    pub id: String,
    pub source: String,
    pub target: String,
    pub weight: u32,
}

impl Place {
    pub fn new(id: impl Into<String>, label: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            label: label.into(),
        }
    }
}

impl Transition {
    pub fn new(id: impl Into<String>, label: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            label: label.into(),
        }
    }
}

impl Arc {
    pub fn new(id: impl Into<String>, source: impl Into<String>, target: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            source: source.into(),
            target: target.into(),
            weight: 1,
        }
    }

    pub fn with_weight(mut self, weight: u32) -> Self {
        self.weight = weight;
        self
    }
}

/// Collapses internal whitespace runs and trims; falls back to `id` when the
/// result is empty.
pub(crate) fn clean_label(label: &str, id: &str) -> String {
    let cleaned = label.split_whitespace().collect::<Vec<_>>().join(" ");
    if cleaned.is_empty() {
        id.to_string()
    } else {
        cleaned
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct NetIndex {
    kinds: HashMap<String, NodeKind>,
    place_pos: HashMap<String, usize>,
    transition_pos: HashMap<String, usize>,
    /// Per transition: (place id, weight), sorted by place id.
    inputs: HashMap<String, Vec<(String, u32)>>,
    outputs: HashMap<String, Vec<(String, u32)>>,
    /// Per place: transition ids, sorted.
    consumers: HashMap<String, Vec<String>>,
    producers: HashMap<String, Vec<String>>,
}

/// A place/transition net with an initial marking.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawNet", into = "RawNet")]
pub struct PetriNet {
    id: String,
    places: Vec<Place>,
    transitions: Vec<Transition>,
    arcs: Vec<Arc>,
    initial_marking: Marking,
    index: NetIndex,
}

#[derive(Serialize, Deserialize)]
struct RawNet {
    id: String,
    places: Vec<Place>,
    transitions: Vec<Transition>,
    arcs: Vec<Arc>,
    #[serde(default)]
    initial_marking: Marking,
}

impl TryFrom<RawNet> for PetriNet {
    type Error = NetError;

    fn try_from(raw: RawNet) -> Result<Self, NetError> {
        PetriNet::new(raw.id, raw.places, raw.transitions, raw.arcs, raw.initial_marking)
    }
}

impl From<PetriNet> for RawNet {
    fn from(net: PetriNet) -> Self {
        RawNet {
            id: net.id,
            places: net.places,
            transitions: net.transitions,
            arcs: net.arcs,
            initial_marking: net.initial_marking,
        }
    }
}

impl PetriNet {
    /// Builds a net, checking id uniqueness, arc endpoints, the bipartite
    /// rule, arc weights and that the initial marking only names places.
    /// Empty labels fall back to the node id.
    pub fn new(
        id: impl Into<String>,
        mut places: Vec<Place>,
        mut transitions: Vec<Transition>,
        arcs: Vec<Arc>,
        initial_marking: Marking,
    ) -> Result<Self, NetError> {
        let mut index = NetIndex::default();
        let mut seen = HashSet::new();

        for (pos, place) in places.iter_mut().enumerate() {
            if !seen.insert(place.id.clone()) {
                return Err(NetError::DuplicateId(place.id.clone()));
            }
            place.label = clean_label(&place.label, &place.id);
            index.kinds.insert(place.id.clone(), NodeKind::Place);
            index.place_pos.insert(place.id.clone(), pos);
            index.consumers.insert(place.id.clone(), Vec::new());
            index.producers.insert(place.id.clone(), Vec::new());
        }
        for (pos, transition) in transitions.iter_mut().enumerate() {
            if !seen.insert(transition.id.clone()) {
                return Err(NetError::DuplicateId(transition.id.clone()));
            }
            transition.label = clean_label(&transition.label, &transition.id);
            index.kinds.insert(transition.id.clone(), NodeKind::Transition);
            index.transition_pos.insert(transition.id.clone(), pos);
            index.inputs.insert(transition.id.clone(), Vec::new());
            index.outputs.insert(transition.id.clone(), Vec::new());
        }

        let mut arc_ids = HashSet::new();
        let mut inputs: HashMap<String, BTreeMap<String, u32>> = HashMap::new();
        let mut outputs: HashMap<String, BTreeMap<String, u32>> = HashMap::new();
        for arc in &arcs {
            if seen.contains(&arc.id) || !arc_ids.insert(arc.id.clone()) {
                return Err(NetError::DuplicateId(arc.id.clone()));
            }
            let source = index
                .kinds
                .get(&arc.source)
                .copied()
                .ok_or_else(|| NetError::DanglingArc {
                    arc: arc.id.clone(),
                    node: arc.source.clone(),
                })?;
            let target = index
                .kinds
                .get(&arc.target)
                .copied()
                .ok_or_else(|| NetError::DanglingArc {
                    arc: arc.id.clone(),
                    node: arc.target.clone(),
                })?;
            if source == target {
                return Err(NetError::NotBipartite {
                    arc: arc.id.clone(),
                    source_node: arc.source.clone(),
                    target: arc.target.clone(),
                });
            }
            if arc.weight == 0 {
                return Err(NetError::InvalidWeight {
                    arc: arc.id.clone(),
                    value: "0".into(),
                });
            }
            match source {
                NodeKind::Place => {
                    *inputs
                        .entry(arc.target.clone())
                        .or_default()
                        .entry(arc.source.clone())
                        .or_default() += arc.weight;
                }
                NodeKind::Transition => {
                    *outputs
                        .entry(arc.source.clone())
                        .or_default()
                        .entry(arc.target.clone())
                        .or_default() += arc.weight;
                }
            }
        }

        for (transition, places) in inputs {
            for place in places.keys() {
                index
                    .consumers
                    .get_mut(place)
                    .expect("indexed")
                    .push(transition.clone());
            }
            index.inputs.insert(transition, places.into_iter().collect());
        }
        for (transition, places) in outputs {
            for place in places.keys() {
                index
                    .producers
                    .get_mut(place)
                    .expect("indexed")
                    .push(transition.clone());
            }
            index.outputs.insert(transition, places.into_iter().collect());
        }
        for list in index.consumers.values_mut().chain(index.producers.values_mut()) {
            list.sort();
        }

        for (place, _) in initial_marking.marked_places() {
            if index.kinds.get(place) != Some(&NodeKind::Place) {
                return Err(NetError::UnknownPlace(place.to_string()));
            }
        }

        Ok(Self {
            id: id.into(),
            places,
            transitions,
            arcs,
            initial_marking,
            index,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn initial_marking(&self) -> &Marking {
        &self.initial_marking
    }

    pub fn with_initial_marking(&self, marking: Marking) -> Result<Self, NetError> {
        for (place, _) in marking.marked_places() {
            if self.node_kind(place) != Some(NodeKind::Place) {
                return Err(NetError::UnknownPlace(place.to_string()));
            }
        }
        let mut net = self.clone();
        net.initial_marking = marking;
        Ok(net)
    }

    pub fn node_kind(&self, id: &str) -> Option<NodeKind> {
        self.index.kinds.get(id).copied()
    }

    pub fn place(&self, id: &str) -> Option<&Place> {
        self.index.place_pos.get(id).map(|&i| &self.places[i])
    }

    pub fn transition(&self, id: &str) -> Option<&Transition> {
        self.index.transition_pos.get(id).map(|&i| &self.transitions[i])
    }

    /// Label of any node, falling back to the id for unknown ids.
    pub fn label<'a>(&'a self, id: &'a str) -> &'a str {
        self.place(id)
            .map(|p| p.label.as_str())
            .or_else(|| self.transition(id).map(|t| t.label.as_str()))
            .unwrap_or(id)
    }

    /// Input places of a transition with their arc weights, sorted by place id.
    pub fn inputs(&self, transition: &str) -> &[(String, u32)] {
        self.index.inputs.get(transition).map_or(&[], Vec::as_slice)
    }

    pub fn outputs(&self, transition: &str) -> &[(String, u32)] {
        self.index.outputs.get(transition).map_or(&[], Vec::as_slice)
    }

    /// Transitions consuming from a place, sorted by id.
    pub fn consumers(&self, place: &str) -> &[String] {
        self.index.consumers.get(place).map_or(&[], Vec::as_slice)
    }

    pub fn producers(&self, place: &str) -> &[String] {
        self.index.producers.get(place).map_or(&[], Vec::as_slice)
    }

    /// Transition ids in lexicographic order.
    pub fn sorted_transition_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.transitions.iter().map(|t| t.id.as_str()).collect();
        ids.sort_unstable();
        ids
    }

    fn check_marking(&self, marking: &Marking) -> Result<(), NetError> {
        for (place, _) in marking.marked_places() {
            if self.node_kind(place) != Some(NodeKind::Place) {
                return Err(NetError::UnknownPlace(place.to_string()));
            }
        }
        Ok(())
    }

    fn deficient_places(&self, marking: &Marking, transition: &str) -> Vec<String> {
        self.inputs(transition)
            .iter()
            .filter(|(place, weight)| marking.get(place) < *weight)
            .map(|(place, _)| place.clone())
            .collect()
    }

    pub fn is_enabled(&self, marking: &Marking, transition: &str) -> Result<bool, NetError> {
        if self.transition(transition).is_none() {
            return Err(NetError::UnknownTransition(transition.to_string()));
        }
        self.check_marking(marking)?;
        Ok(self.deficient_places(marking, transition).is_empty())
    }

    /// Transitions whose every input place holds at least the arc weight,
    /// ordered by id.
    pub fn enabled_transitions(&self, marking: &Marking) -> Result<Vec<String>, NetError> {
        self.check_marking(marking)?;
        Ok(self
            .sorted_transition_ids()
            .into_iter()
            .filter(|t| self.deficient_places(marking, t).is_empty())
            .map(str::to_string)
            .collect())
    }

    /// Fires `transition`, returning the successor marking. The input marking
    /// is left untouched.
    pub fn fire(&self, marking: &Marking, transition: &str) -> Result<Marking, NetError> {
        if self.transition(transition).is_none() {
            return Err(NetError::UnknownTransition(transition.to_string()));
        }
        self.check_marking(marking)?;
        let deficient = self.deficient_places(marking, transition);
        if !deficient.is_empty() {
            return Err(NetError::NotEnabled {
                transition: transition.to_string(),
                deficient,
            });
        }
        let mut next = marking.clone();
        for (place, weight) in self.inputs(transition) {
            next.remove(place, *weight);
        }
        for (place, weight) in self.outputs(transition) {
            next.add(place, *weight);
        }
        Ok(next)
    }

    /// Places without incoming arcs, sorted by id.
    pub fn source_places(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self
            .places
            .iter()
            .filter(|p| self.producers(&p.id).is_empty())
            .map(|p| p.id.as_str())
            .collect();
        ids.sort_unstable();
        ids
    }

    /// Places without outgoing arcs, sorted by id.
    pub fn sink_places(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self
            .places
            .iter()
            .filter(|p| self.consumers(&p.id).is_empty())
            .map(|p| p.id.as_str())
            .collect();
        ids.sort_unstable();
        ids
    }
}

#[cfg(test)]
pub(crate) mod test_nets {
    use super::*;

    /// p1 -> t1 -> p2 -> t2 -> ... -> p{n}
    pub fn linear(n_transitions: usize) -> PetriNet {
        let places = (1..=n_transitions + 1)
            .map(|i| Place::new(format!("p{i}"), format!("state {i}")))
            .collect();
        let transitions = (1..=n_transitions)
            .map(|i| Transition::new(format!("t{i}"), format!("event {i}")))
            .collect();
        let mut arcs = Vec::new();
        for i in 1..=n_transitions {
            arcs.push(Arc::new(format!("a{i}i"), format!("p{i}"), format!("t{i}")));
            arcs.push(Arc::new(format!("a{i}o"), format!("t{i}"), format!("p{}", i + 1)));
        }
        PetriNet::new("linear", places, transitions, arcs, Marking::single("p1")).unwrap()
    }

    /// i -> t_split -> {a, b}; a -> t_a -> a2; b -> t_b -> b2; {a2, b2} -> t_join -> o
    pub fn fork_join() -> PetriNet {
        let places = ["i", "a", "b", "a2", "b2", "o"]
            .iter()
            .map(|p| Place::new(*p, format!("place {p}")))
            .collect();
        let transitions = ["t_split", "t_a", "t_b", "t_join"]
            .iter()
            .map(|t| Transition::new(*t, format!("do {t}")))
            .collect();
        let arcs = [
            ("i", "t_split"),
            ("t_split", "a"),
            ("t_split", "b"),
            ("a", "t_a"),
            ("t_a", "a2"),
            ("b", "t_b"),
            ("t_b", "b2"),
            ("a2", "t_join"),
            ("b2", "t_join"),
            ("t_join", "o"),
        ]
        .iter()
        .enumerate()
        .map(|(i, (s, t))| Arc::new(format!("arc{i}"), *s, *t))
        .collect();
        PetriNet::new("fork_join", places, transitions, arcs, Marking::single("i")).unwrap()
    }
}
