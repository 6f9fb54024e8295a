use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{split_quoted, FeatureAst, GwtError, Keyword, Segment, Step};
use crate::petri::{NodeKind, PetriNet};

/// A step definition stub generated from a scenario step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepSkeleton {
    pub keyword: Keyword,
    /// Step text as a regular expression, quoted parameters turned into
    /// capture groups. The runtime anchors it at both ends.
    pub pattern: String,
    pub identifier: String,
    pub body: String,
}

pub const PENDING_BODY: &str = "# code goes here";

/// Snake-case identifier for a step: ASCII-lowercased, every run of
/// non-alphanumerics collapsed to `_`, prefixed with the resolved keyword.
pub fn normalize_step_name(step: &Step) -> Result<String, GwtError> {
    let mut name = String::with_capacity(step.text.len());
    let mut pending_underscore = false;
    for c in step.text.chars() {
        if c.is_ascii_alphanumeric() {
            if pending_underscore && !name.is_empty() {
                name.push('_');
            }
            pending_underscore = false;
            name.push(c.to_ascii_lowercase());
        } else {
            pending_underscore = true;
        }
    }
    if name.is_empty() {
        return Err(GwtError::EmptyIdentifier(step.text.clone()));
    }
    let prefix = step.resolved_keyword.as_str().to_ascii_lowercase();
    if name == prefix || name.starts_with(&format!("{prefix}_")) {
        Ok(name)
    } else {
        Ok(format!("{prefix}_{name}"))
    }
}

fn step_pattern(text: &str) -> String {
    split_quoted(text)
        .into_iter()
        .map(|segment| match segment {
            Segment::Literal(l) => regex::escape(l),
            Segment::Quoted(_) => "\"([^\"]*)\"".to_string(),
        })
        .collect()
}

/// One skeleton per distinct (resolved keyword, text) pair, in first
/// occurrence order. Steps whose text yields no identifier are skipped.
pub fn generate_step_skeletons(ast: &FeatureAst) -> Vec<StepSkeleton> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for step in ast.scenarios.iter().flat_map(|s| &s.steps) {
        if !seen.insert((step.resolved_keyword, step.text.as_str())) {
            continue;
        }
        let Ok(identifier) = normalize_step_name(step) else {
            continue;
        };
        out.push(StepSkeleton {
            keyword: step.resolved_keyword,
            pattern: step_pattern(&step.text),
            identifier,
            body: PENDING_BODY.to_string(),
        });
    }
    out
}

/// Decorator-style listing of skeletons, one block per step.
pub fn render_step_skeletons(skeletons: &[StepSkeleton]) -> String {
    let mut out = String::new();
    for (i, skeleton) in skeletons.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "@step(r'{}')", skeleton.pattern.replace('\'', "\\'"));
        let _ = writeln!(out, "def {}(step):", skeleton.identifier);
        let _ = writeln!(out, "    {}", skeleton.body);
    }
    out
}

fn quote_list(labels: &[&str]) -> String {
    labels
        .iter()
        .map(|l| format!("'{}'", l.replace('\\', "\\\\").replace('\'', "\\'")))
        .collect::<Vec<_>>()
        .join(", ")
}

/// State-based tag block for one transition: source state(s), event,
/// outcome and destination state(s), each followed by a placeholder line.
pub fn generate_state_tag_skeletons(net: &PetriNet, transition: &str) -> Result<String, GwtError> {
    if net.node_kind(transition) != Some(NodeKind::Transition) {
        return Err(GwtError::UnknownTransition(transition.to_string()));
    }
    let sources: Vec<&str> = net.inputs(transition).iter().map(|(p, _)| net.label(p)).collect();
    let destinations: Vec<&str> = net.outputs(transition).iter().map(|(p, _)| net.label(p)).collect();
    let event = net.label(transition);
    let outcome = format!("produces {}", destinations.join(" and "));

    let mut out = String::new();
    let _ = writeln!(out, "@SourceState({})", quote_list(&sources));
    out.push_str("# excite the code that treats the exit of the current state\n");
    let _ = writeln!(out, "@Event({})", quote_list(&[event]));
    out.push_str("# excite the code that treats the event\n");
    let _ = writeln!(out, "@Transition({})", quote_list(&[outcome.as_str()]));
    out.push_str("# excite the code that produces the expected outcome\n");
    let _ = writeln!(out, "@DestinationState({})", quote_list(&destinations));
    out.push_str("# excite the code that treats the entrance into a new state\n");
    Ok(out)
}
