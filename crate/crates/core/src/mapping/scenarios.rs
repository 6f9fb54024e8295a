use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::MappingError;
use crate::petri::{validate_workflow_net, Marking, PetriNet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationOptions {
    /// A trace is cut (and flagged truncated) rather than fire any single
    /// transition more than this many times.
    pub loop_bound: usize,
    pub max_scenarios: usize,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        Self {
            loop_bound: 2,
            max_scenarios: 256,
        }
    }
}

/// One source-to-sink firing sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioTrace {
    pub transitions_fired: Vec<String>,
    /// Index sets (into `transitions_fired`) of firings that happened while
    /// several concurrent threads were live, one set per parallel region.
    pub parallel_groups: Vec<Vec<usize>>,
    /// Markings visited; one more entry than `transitions_fired`.
    pub markings: Vec<Marking>,
    /// Set when the loop bound cut the trace or it dead-ended before the sink.
    pub truncated: bool,
}

struct Explorer<'a> {
    net: &'a PetriNet,
    opts: EnumerationOptions,
    goal: Marking,
    traces: Vec<ScenarioTrace>,
    truncated_seen: HashSet<Vec<String>>,
    fired: Vec<String>,
    markings: Vec<Marking>,
    counts: HashMap<String, usize>,
}

/// Enumerates the scenarios of a workflow net from `{source: 1}`.
///
/// At a choice (enabled transitions competing for a place) every alternative
/// starts its own scenario, in transition id order. Concurrently enabled
/// transitions are not interleaved: they fire one after another, smallest id
/// first, and are recorded as a parallel group of a single scenario.
pub fn pn_to_scenarios(net: &PetriNet, opts: EnumerationOptions) -> Result<Vec<ScenarioTrace>, MappingError> {
    let diagnostics = validate_workflow_net(net);
    if !diagnostics.is_empty() {
        return Err(MappingError::InvalidWorkflowNet(diagnostics));
    }
    let source = net.source_places()[0].to_string();
    let sink = net.sink_places()[0].to_string();
    let start = Marking::single(source);
    let mut explorer = Explorer {
        net,
        opts,
        goal: Marking::single(sink),
        traces: Vec::new(),
        truncated_seen: HashSet::new(),
        fired: Vec::new(),
        markings: vec![start.clone()],
        counts: HashMap::new(),
    };
    explorer.explore(&start)?;
    Ok(explorer.traces)
}

impl Explorer<'_> {
    fn emit(&mut self, truncated: bool) -> Result<(), MappingError> {
        if truncated && !self.truncated_seen.insert(self.fired.clone()) {
            return Ok(());
        }
        if self.traces.len() == self.opts.max_scenarios {
            return Err(MappingError::MaxScenariosExceeded {
                limit: self.opts.max_scenarios,
                partial: self.traces.len(),
            });
        }
        self.traces.push(ScenarioTrace {
            transitions_fired: self.fired.clone(),
            parallel_groups: parallel_groups(&self.markings),
            markings: self.markings.clone(),
            truncated,
        });
        Ok(())
    }

    /// Groups enabled transitions that compete, directly or transitively,
    /// for input places. Each group is sorted; groups are ordered by their
    /// smallest member.
    fn conflict_clusters(&self, enabled: &[String]) -> Vec<Vec<String>> {
        let inputs = |t: &str| -> BTreeSet<&str> { self.net.inputs(t).iter().map(|(p, _)| p.as_str()).collect() };
        let mut clusters: Vec<(BTreeSet<&str>, Vec<String>)> = Vec::new();
        for t in enabled {
            let own = inputs(t);
            let (touching, mut rest): (Vec<_>, Vec<_>) =
                clusters.into_iter().partition(|(places, _)| !places.is_disjoint(&own));
            let mut merged = (own, vec![t.clone()]);
            for (places, members) in touching {
                merged.0.extend(places);
                merged.1.extend(members);
            }
            merged.1.sort();
            rest.push(merged);
            clusters = rest;
        }
        let mut clusters: Vec<Vec<String>> = clusters.into_iter().map(|(_, m)| m).collect();
        clusters.sort();
        clusters
    }

    fn under_bound(&self, transition: &str) -> bool {
        self.counts.get(transition).copied().unwrap_or(0) < self.opts.loop_bound
    }

    /// Transitions to branch over next, or `None` when every enabled
    /// transition has reached the loop bound.
    ///
    /// A transition that competes with no other transition of the net fires
    /// first and alone. Otherwise the first cluster offering a real choice
    /// between enabled transitions is taken; a lone enabled transition whose
    /// competitors still wait for tokens is postponed so the choice can form.
    fn next_moves(&self, enabled: &[String]) -> Option<Vec<String>> {
        let free = enabled
            .iter()
            .find(|t| self.under_bound(t) && self.net.inputs(t).iter().all(|(p, _)| self.net.consumers(p).len() == 1));
        if let Some(t) = free {
            return Some(vec![t.clone()]);
        }
        let clusters = self.conflict_clusters(enabled);
        let live = |c: &&Vec<String>| c.iter().any(|t| self.under_bound(t));
        clusters
            .iter()
            .filter(live)
            .find(|c| c.len() > 1)
            .or_else(|| clusters.iter().find(live))
            .cloned()
    }

    fn explore(&mut self, marking: &Marking) -> Result<(), MappingError> {
        if *marking == self.goal {
            return self.emit(false);
        }
        let enabled = self.net.enabled_transitions(marking)?;
        let Some(moves) = self.next_moves(&enabled) else {
            return self.emit(true);
        };
        for transition in moves {
            let count = self.counts.get(&transition).copied().unwrap_or(0);
            if count >= self.opts.loop_bound {
                self.emit(true)?;
                continue;
            }
            let next = self.net.fire(marking, &transition)?;
            self.counts.insert(transition.clone(), count + 1);
            self.fired.push(transition.clone());
            self.markings.push(next.clone());
            let result = self.explore(&next);
            self.markings.pop();
            self.fired.pop();
            self.counts.insert(transition, count);
            result?;
        }
        Ok(())
    }
}

/// Maximal runs of firings whose pre- and post-marking both hold more than
/// one token.
fn parallel_groups(markings: &[Marking]) -> Vec<Vec<usize>> {
    let mut groups = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    for (i, pair) in markings.windows(2).enumerate() {
        if pair[0].total_tokens() > 1 && pair[1].total_tokens() > 1 {
            current.push(i);
        } else if !current.is_empty() {
            groups.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        groups.push(current);
    }
    groups
}
