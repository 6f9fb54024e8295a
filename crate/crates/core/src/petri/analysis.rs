use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Marking, NetError, NodeKind, PetriNet};

/// Structural role of a node in a workflow net.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConstructKind {
    Sequence,
    AndSplit,
    OrSplit,
    AndJoin,
    OrJoin,
}

impl fmt::Display for ConstructKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ConstructKind::Sequence => "sequence",
            ConstructKind::AndSplit => "AND-split",
            ConstructKind::OrSplit => "OR-split",
            ConstructKind::AndJoin => "AND-join",
            ConstructKind::OrJoin => "OR-join",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    NoSource,
    MultipleSources,
    NoSink,
    MultipleSinks,
    NotOnPath,
}

/// One workflow-net violation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub nodes: Vec<String>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn in_degree(net: &PetriNet, id: &str) -> usize {
    match net.node_kind(id) {
        Some(NodeKind::Place) => net.producers(id).len(),
        Some(NodeKind::Transition) => net.inputs(id).len(),
        None => 0,
    }
}

fn out_degree(net: &PetriNet, id: &str) -> usize {
    match net.node_kind(id) {
        Some(NodeKind::Place) => net.consumers(id).len(),
        Some(NodeKind::Transition) => net.outputs(id).len(),
        None => 0,
    }
}

fn successors<'a>(net: &'a PetriNet, id: &str) -> Vec<&'a str> {
    match net.node_kind(id) {
        Some(NodeKind::Place) => net.consumers(id).iter().map(String::as_str).collect(),
        Some(NodeKind::Transition) => net.outputs(id).iter().map(|(p, _)| p.as_str()).collect(),
        None => Vec::new(),
    }
}

fn predecessors<'a>(net: &'a PetriNet, id: &str) -> Vec<&'a str> {
    match net.node_kind(id) {
        Some(NodeKind::Place) => net.producers(id).iter().map(String::as_str).collect(),
        Some(NodeKind::Transition) => net.inputs(id).iter().map(|(p, _)| p.as_str()).collect(),
        None => Vec::new(),
    }
}

fn reach<'a>(net: &'a PetriNet, from: &'a str, step: fn(&'a PetriNet, &str) -> Vec<&'a str>) -> HashSet<&'a str> {
    let mut seen = HashSet::from([from]);
    let mut queue = VecDeque::from([from]);
    while let Some(node) = queue.pop_front() {
        for next in step(net, node) {
            if seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    seen
}

fn all_node_ids(net: &PetriNet) -> Vec<&str> {
    let mut ids: Vec<&str> = net
        .places()
        .iter()
        .map(|p| p.id.as_str())
        .chain(net.transitions().iter().map(|t| t.id.as_str()))
        .collect();
    ids.sort_unstable();
    ids
}

/// Checks the workflow-net shape: one source place, one sink place, and every
/// node on a directed path between them. Nodes without any arcs are reported
/// as off-path rather than counted as extra sources or sinks.
pub fn validate_workflow_net(net: &PetriNet) -> Vec<Diagnostic> {
    let mut diagnostics = Vec::new();
    let ids = all_node_ids(net);
    let isolated: HashSet<&str> = ids
        .iter()
        .copied()
        .filter(|id| in_degree(net, id) == 0 && out_degree(net, id) == 0)
        .collect();

    let sources: Vec<&str> = net
        .source_places()
        .into_iter()
        .filter(|p| !isolated.contains(p))
        .collect();
    let sinks: Vec<&str> = net
        .sink_places()
        .into_iter()
        .filter(|p| !isolated.contains(p))
        .collect();

    match sources.len() {
        0 => diagnostics.push(Diagnostic {
            kind: DiagnosticKind::NoSource,
            nodes: Vec::new(),
            message: "no source place (every place has an incoming arc)".into(),
        }),
        1 => {}
        _ => diagnostics.push(Diagnostic {
            kind: DiagnosticKind::MultipleSources,
            nodes: sources.iter().map(|s| s.to_string()).collect(),
            message: format!("expected one source place, found {}", sources.join(", ")),
        }),
    }
    match sinks.len() {
        0 => diagnostics.push(Diagnostic {
            kind: DiagnosticKind::NoSink,
            nodes: Vec::new(),
            message: "no sink place (every place has an outgoing arc)".into(),
        }),
        1 => {}
        _ => diagnostics.push(Diagnostic {
            kind: DiagnosticKind::MultipleSinks,
            nodes: sinks.iter().map(|s| s.to_string()).collect(),
            message: format!("expected one sink place, found {}", sinks.join(", ")),
        }),
    }

    let on_path: Option<HashSet<&str>> = match (sources.as_slice(), sinks.as_slice()) {
        ([source], [sink]) => {
            let forward = reach(net, source, successors);
            let backward = reach(net, sink, predecessors);
            Some(forward.intersection(&backward).copied().collect())
        }
        _ => None,
    };
    for id in ids {
        let off_path = match &on_path {
            Some(set) => !set.contains(id),
            None => isolated.contains(id),
        };
        if off_path {
            let what = if isolated.contains(id) {
                "is isolated"
            } else {
                "is not on a path from source to sink"
            };
            diagnostics.push(Diagnostic {
                kind: DiagnosticKind::NotOnPath,
                nodes: vec![id.to_string()],
                message: format!("node `{id}` {what}"),
            });
        }
    }
    diagnostics
}

/// Structural split/join classification from arc degrees. A node may carry
/// more than one kind; source and sink nodes without branching get no entry.
/// Entries are sorted by node id, then kind.
pub fn classify_constructs(net: &PetriNet) -> Vec<(String, ConstructKind)> {
    let mut out = Vec::new();
    for place in net.places() {
        let (ins, outs) = (net.producers(&place.id).len(), net.consumers(&place.id).len());
        let mut kinds = Vec::new();
        if outs > 1 {
            kinds.push(ConstructKind::OrSplit);
        }
        if ins > 1 {
            kinds.push(ConstructKind::OrJoin);
        }
        if kinds.is_empty() && ins > 0 && outs > 0 {
            kinds.push(ConstructKind::Sequence);
        }
        out.extend(kinds.into_iter().map(|k| (place.id.clone(), k)));
    }
    for transition in net.transitions() {
        let (ins, outs) = (net.inputs(&transition.id).len(), net.outputs(&transition.id).len());
        let mut kinds = Vec::new();
        if outs > 1 {
            kinds.push(ConstructKind::AndSplit);
        }
        if ins > 1 {
            kinds.push(ConstructKind::AndJoin);
        }
        if kinds.is_empty() && ins > 0 && outs > 0 {
            kinds.push(ConstructKind::Sequence);
        }
        out.extend(kinds.into_iter().map(|k| (transition.id.clone(), k)));
    }
    out.sort();
    out
}

/// Result of a bounded reachability exploration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Reachability {
    /// Distinct markings in breadth-first discovery order, starting marking first.
    pub markings: Vec<Marking>,
    /// Set when more than `bound` markings exist; `markings` is then partial.
    pub bound_exceeded: bool,
}

/// Breadth-first closure of `start` under the firing rule, stopping once more
/// than `bound` distinct markings have been discovered.
pub fn reachable_markings(net: &PetriNet, start: &Marking, bound: usize) -> Result<Reachability, NetError> {
    let enabled = net.enabled_transitions(start)?;
    let mut seen = HashSet::from([start.clone()]);
    let mut markings = vec![start.clone()];
    if bound == 0 {
        return Ok(Reachability {
            markings,
            bound_exceeded: true,
        });
    }
    let mut queue = VecDeque::from([(start.clone(), enabled)]);
    while let Some((marking, enabled)) = queue.pop_front() {
        for transition in enabled {
            let next = net.fire(&marking, &transition)?;
            if seen.contains(&next) {
                continue;
            }
            if markings.len() == bound {
                return Ok(Reachability {
                    markings,
                    bound_exceeded: true,
                });
            }
            seen.insert(next.clone());
            markings.push(next.clone());
            let next_enabled = net.enabled_transitions(&next)?;
            queue.push_back((next, next_enabled));
        }
    }
    Ok(Reachability {
        markings,
        bound_exceeded: false,
    })
}
