use serde::{Deserialize, Serialize};

use super::{clause_lines, triple_unchecked, ScenarioTrace};
use crate::gwt::{FeatureAst, Keyword, Scenario, Step};
use crate::petri::PetriNet;

/// Feature-level text that a net does not carry.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMeta {
    pub name: String,
    pub role: String,
    pub request: String,
    pub benefit: String,
}

/// `Path N: <choice>` where the choice is the label of the first fired
/// transition that leaves a place with several consumers, or `main`.
pub fn scenario_name(net: &PetriNet, trace: &ScenarioTrace, index: usize) -> String {
    let choice = trace
        .transitions_fired
        .iter()
        .find(|t| net.inputs(t).iter().any(|(p, _)| net.consumers(p).len() > 1))
        .map(|t| net.label(t))
        .unwrap_or("main");
    let suffix = if trace.truncated { " (truncated)" } else { "" };
    format!("Path {}: {choice}{suffix}", index + 1)
}

fn push_lines(steps: &mut Vec<Step>, lines: Vec<String>, resolved: Keyword) {
    for line in lines {
        let (keyword, text) = match line.split_once(' ') {
            Some(("And", rest)) => (Keyword::And, rest),
            Some((_, rest)) => (resolved, rest),
            None => (resolved, line.as_str()),
        };
        steps.push(Step::new(keyword, resolved, text));
    }
}

fn scenario_steps(net: &PetriNet, trace: &ScenarioTrace) -> Vec<Step> {
    let mut steps = Vec::new();
    let mut previous_outputs: Option<Vec<&str>> = None;
    for transition in &trace.transitions_fired {
        let triple = triple_unchecked(net, transition);
        let inputs: Vec<&str> = net.inputs(transition).iter().map(|(p, _)| p.as_str()).collect();
        // Restate the precondition whenever it is not simply what the last
        // step produced, e.g. inside a parallel region or at a join.
        if previous_outputs.as_ref() != Some(&inputs) {
            push_lines(&mut steps, clause_lines("Given", &triple.given), Keyword::Given);
        }
        steps.push(Step::new(Keyword::When, Keyword::When, triple.when.clone()));
        push_lines(&mut steps, clause_lines("Then", &triple.then), Keyword::Then);
        previous_outputs = Some(net.outputs(transition).iter().map(|(p, _)| p.as_str()).collect());
    }
    if steps.is_empty() {
        let start = trace
            .markings
            .first()
            .and_then(|m| m.marked_places().next())
            .map(|(p, _)| p);
        let label = start.map(|p| net.label(p)).unwrap_or(net.id());
        steps.push(Step::new(Keyword::Given, Keyword::Given, label));
    }
    steps
}

/// Renders enumerated traces as a feature, one scenario per trace.
pub fn scenarios_to_feature(traces: &[ScenarioTrace], net: &PetriNet, meta: &FeatureMeta) -> FeatureAst {
    let name = if meta.name.trim().is_empty() {
        net.id().to_string()
    } else {
        meta.name.trim().to_string()
    };
    let mut ast = FeatureAst::new(name);
    let header = [&meta.role, &meta.request, &meta.benefit];
    if header.iter().all(|v| !v.trim().is_empty()) {
        ast.role = meta.role.trim().to_string();
        ast.request = meta.request.trim().to_string();
        ast.benefit = meta.benefit.trim().to_string();
        ast.header_present = true;
    }
    ast.scenarios = traces
        .iter()
        .enumerate()
        .map(|(i, trace)| Scenario {
            name: scenario_name(net, trace, i),
            steps: scenario_steps(net, trace),
        })
        .collect();
    ast
}

#[cfg(test)]
mod tests {
    use super::super::{pn_to_scenarios, EnumerationOptions};
    use super::*;
    use crate::gwt::{parse_feature, render_feature};
    use crate::petri::test_nets::{fork_join, linear};

    #[test]
    fn linear_feature() {
        let net = linear(2);
        let traces = pn_to_scenarios(&net, EnumerationOptions::default()).unwrap();
        let ast = scenarios_to_feature(&traces, &net, &FeatureMeta::default());
        assert_eq!(ast.scenarios.len(), 1);
        assert_eq!(ast.scenarios[0].name, "Path 1: main");
        let keywords: Vec<_> = ast.scenarios[0].steps.iter().map(|s| s.keyword).collect();
        assert_eq!(
            keywords,
            vec![
                Keyword::Given,
                Keyword::When,
                Keyword::Then,
                Keyword::When,
                Keyword::Then
            ]
        );
        assert!(!ast.header_present);
        let text = render_feature(&ast);
        assert_eq!(parse_feature(&text).unwrap(), ast);
    }

    #[test]
    fn parallel_region_restates_givens() {
        let net = fork_join();
        let traces = pn_to_scenarios(&net, EnumerationOptions::default()).unwrap();
        let meta = FeatureMeta {
            name: "Fork".into(),
            role: "tester".into(),
            request: "fork".into(),
            benefit: "coverage".into(),
        };
        let ast = scenarios_to_feature(&traces, &net, &meta);
        assert!(ast.header_present);
        let text = render_feature(&ast);
        assert!(text.contains("And in parallel:"), "{text}");
        assert_eq!(parse_feature(&text).unwrap(), ast);
        let givens = ast.scenarios[0]
            .steps
            .iter()
            .filter(|s| s.resolved_keyword == Keyword::Given)
            .count();
        // start; branch b after branch a; both branches at the join.
        assert_eq!(givens, 1 + 1 + 1 + 2);
    }
}
