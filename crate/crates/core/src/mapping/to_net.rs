use std::collections::{BTreeMap, HashMap};

use super::{MappingError, PARALLEL_MARKER};
use crate::gwt::{FeatureAst, Keyword, Scenario};
use crate::petri::{Arc, Marking, PetriNet, Place, Transition};

struct Move {
    given: Option<Vec<String>>,
    when: String,
    then: Vec<String>,
}

struct Chain {
    initial: Vec<String>,
    moves: Vec<Move>,
}

/// Splits a Given or Then clause into state labels. Lines introduced with
/// the parallel marker open a new state; other lines extend the current one.
fn state_labels(texts: &[&str]) -> Vec<String> {
    let mut labels: Vec<String> = Vec::new();
    for text in texts {
        match text.strip_prefix(PARALLEL_MARKER) {
            Some(rest) => labels.push(rest.trim().to_string()),
            None => match labels.last_mut() {
                Some(last) => {
                    last.push_str("; ");
                    last.push_str(text);
                }
                None => labels.push(text.to_string()),
            },
        }
    }
    labels
}

fn chain_of(scenario: &Scenario) -> Result<Chain, MappingError> {
    let mut runs: Vec<(Keyword, Vec<&str>)> = Vec::new();
    for step in &scenario.steps {
        match runs.last_mut() {
            Some((k, texts)) if *k == step.resolved_keyword => texts.push(&step.text),
            _ => runs.push((step.resolved_keyword, vec![&step.text])),
        }
    }
    let name = || scenario.name.clone();
    let mut runs = runs.into_iter();
    let initial = match runs.next() {
        Some((Keyword::Given, texts)) => state_labels(&texts),
        _ => return Err(MappingError::MissingInitialGiven { scenario: name() }),
    };

    enum Expect {
        When,
        Then,
        GivenOrWhen,
    }
    let mut expect = Expect::When;
    let mut moves = Vec::new();
    let mut given = None;
    let mut when = String::new();
    for (keyword, texts) in runs {
        expect = match (expect, keyword) {
            (Expect::When | Expect::GivenOrWhen, Keyword::When) => {
                when = texts.join("; ");
                Expect::Then
            }
            (Expect::Then, Keyword::Then) => {
                moves.push(Move {
                    given: given.take(),
                    when: std::mem::take(&mut when),
                    then: state_labels(&texts),
                });
                Expect::GivenOrWhen
            }
            (Expect::GivenOrWhen, Keyword::Given) => {
                given = Some(state_labels(&texts));
                Expect::When
            }
            (state, found) => {
                let expected = match state {
                    Expect::When => "When",
                    Expect::Then => "Then",
                    Expect::GivenOrWhen => "Given or When",
                };
                return Err(MappingError::UnexpectedClause {
                    scenario: name(),
                    expected,
                    found: format!("{found} {}", texts[0]),
                });
            }
        };
    }
    match expect {
        Expect::GivenOrWhen => Ok(Chain { initial, moves }),
        _ => Err(MappingError::IncompleteScenario { scenario: name() }),
    }
}

#[derive(Default)]
struct Builder {
    places: Vec<Place>,
    transitions: Vec<Transition>,
    arcs: Vec<Arc>,
    by_label: HashMap<String, Vec<String>>,
    edges: HashMap<(Vec<String>, String, Vec<String>), Vec<String>>,
}

impl Builder {
    fn new_place(&mut self, label: &str) -> String {
        let id = format!("p{:03}", self.places.len() + 1);
        self.places.push(Place::new(id.clone(), label));
        self.by_label.entry(label.to_string()).or_default().push(id.clone());
        id
    }

    /// The place for state `label`, unless every place with that label is
    /// already held (`busy`), in which case a fresh one.
    fn state(&mut self, label: &str, busy: &[String]) -> String {
        let free = self
            .by_label
            .get(label)
            .and_then(|ids| ids.iter().find(|id| !busy.contains(id)))
            .cloned();
        free.unwrap_or_else(|| self.new_place(label))
    }

    fn states(&mut self, labels: &[String], open: &[(String, String)]) -> Vec<String> {
        let mut busy: Vec<String> = open.iter().map(|(_, id)| id.clone()).collect();
        let mut ids = Vec::new();
        for label in labels {
            let id = self.state(label, &busy);
            busy.push(id.clone());
            ids.push(id);
        }
        ids
    }

    fn transition(&mut self, label: &str) -> String {
        let id = format!("t{:03}", self.transitions.len() + 1);
        self.transitions.push(Transition::new(id.clone(), label));
        id
    }

    fn arc(&mut self, source: &str, target: &str) {
        let id = format!("a{:03}", self.arcs.len() + 1);
        self.arcs.push(Arc::new(id, source, target));
    }

    fn add_chain(&mut self, scenario: &str, chain: Chain) -> Result<(), MappingError> {
        let initial_ids = self.states(&chain.initial, &[]);
        let mut open: Vec<(String, String)> = chain.initial.iter().cloned().zip(initial_ids.iter().cloned()).collect();
        let mut last_outputs = initial_ids;
        for mv in chain.moves {
            let inputs: Vec<String> = match &mv.given {
                None => last_outputs.clone(),
                Some(labels) => {
                    let mut ids = Vec::new();
                    for label in labels {
                        let pos = open
                            .iter()
                            .position(|(l, id)| l == label && !ids.contains(id))
                            .ok_or_else(|| MappingError::UnknownState {
                                scenario: scenario.to_string(),
                                label: label.clone(),
                            })?;
                        ids.push(open[pos].1.clone());
                    }
                    ids
                }
            };
            open.retain(|(_, id)| !inputs.contains(id));

            let mut key_inputs = inputs.clone();
            key_inputs.sort();
            let key = (key_inputs, mv.when.clone(), mv.then.clone());
            let outputs = match self.edges.get(&key) {
                Some(outputs) => outputs.clone(),
                None => {
                    let t = self.transition(&mv.when);
                    for p in &inputs {
                        self.arc(p, &t);
                    }
                    let outputs = self.states(&mv.then, &open);
                    for p in &outputs {
                        self.arc(&t, p);
                    }
                    self.edges.insert(key, outputs.clone());
                    outputs
                }
            };
            open.extend(mv.then.iter().cloned().zip(outputs.iter().cloned()));
            last_outputs = outputs;
        }
        Ok(())
    }

    /// Gives the net a single source and a single sink, adding a start or end
    /// place joined to the existing ones when there are several.
    fn close(&mut self) -> Option<String> {
        let mut produced: BTreeMap<&str, usize> = BTreeMap::new();
        let mut consumed: BTreeMap<&str, usize> = BTreeMap::new();
        for arc in &self.arcs {
            *consumed.entry(arc.source.as_str()).or_default() += 1;
            *produced.entry(arc.target.as_str()).or_default() += 1;
        }
        let sources: Vec<(String, String)> = self
            .places
            .iter()
            .filter(|p| !produced.contains_key(p.id.as_str()))
            .map(|p| (p.id.clone(), p.label.clone()))
            .collect();
        let sinks: Vec<(String, String)> = self
            .places
            .iter()
            .filter(|p| !consumed.contains_key(p.id.as_str()))
            .map(|p| (p.id.clone(), p.label.clone()))
            .collect();

        let mut source = sources.first().map(|(id, _)| id.clone());
        if sources.len() > 1 {
            let start = self.new_place("start");
            for (id, label) in &sources {
                let t = self.transition(&format!("begin {label}"));
                self.arc(&start, &t);
                self.arc(&t, id);
            }
            source = Some(start);
        }
        if sinks.len() > 1 {
            let end = self.new_place("end");
            for (id, label) in &sinks {
                let t = self.transition(&format!("finish {label}"));
                self.arc(id, &t);
                self.arc(&t, &end);
            }
        }
        source
    }
}

fn slug(name: &str) -> String {
    let mut out = String::new();
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.is_empty() && !out.ends_with('_') {
            out.push('_');
        }
    }
    let out = out.trim_end_matches('_').to_string();
    if out.is_empty() {
        "feature".to_string()
    } else {
        out
    }
}

/// Folds the scenarios of a feature into one net.
///
/// Each scenario is read as an initial Given followed by When/Then moves,
/// optionally re-anchored by a Given naming states currently held. A state
/// label names one place, so scenarios that pass through the same state
/// share it; a second place is only made when the label is already held
/// concurrently. Moves with the same inputs, event and outcome are shared,
/// so common prefixes merge and divergence points become choices. Lines
/// marked `in parallel:` denote separate concurrent states.
pub fn feature_to_pn(ast: &FeatureAst) -> Result<PetriNet, MappingError> {
    if ast.scenarios.is_empty() {
        return Err(MappingError::NoScenarios);
    }
    let mut builder = Builder::default();
    for scenario in &ast.scenarios {
        let chain = chain_of(scenario)?;
        builder.add_chain(&scenario.name, chain)?;
    }
    let source = builder.close();
    let marking = source.map(Marking::single).unwrap_or_default();
    Ok(PetriNet::new(
        slug(&ast.name),
        builder.places,
        builder.transitions,
        builder.arcs,
        marking,
    )?)
}
