//! The textual half of the ubiquitous language: feature files made of a
//! role/request/benefit header and Given-When-Then scenarios.

mod parser;
mod render;
mod skeleton;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use parser::parse_feature;
pub use render::render_feature;
pub use skeleton::{
    generate_state_tag_skeletons, generate_step_skeletons, normalize_step_name, render_step_skeletons, StepSkeleton,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GwtError {
    #[error("no Feature header")]
    NoFeatureHeader,
    #[error("line {line}: content before the Feature header")]
    ContentBeforeFeature { line: usize },
    #[error("line {line}: Feature name is empty")]
    EmptyFeatureName { line: usize },
    #[error("line {line}: a second Feature header is not allowed")]
    DuplicateFeature { line: usize },
    #[error("line {line}: `{phrase}` appears twice in the feature header")]
    DuplicateHeaderLine { line: usize, phrase: String },
    #[error("feature header is incomplete: missing {missing}")]
    IncompleteHeader { missing: String },
    #[error("line {line}: step appears before any Scenario")]
    StepOutsideScenario { line: usize },
    #[error("line {line}: a scenario cannot open with `{keyword}`; use Given or When")]
    BadOpeningStep { line: usize, keyword: Keyword },
    #[error("line {line}: `{keyword}` step has no text")]
    EmptyStep { line: usize, keyword: Keyword },
    #[error("line {line}: scenario `{name}` has no steps")]
    EmptyScenario { line: usize, name: String },
    #[error("line {line}: unrecognised line `{text}`")]
    UnknownLine { line: usize, text: String },
    #[error("step text `{0}` has no letters or digits to build an identifier from")]
    EmptyIdentifier(String),
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Keyword {
    Given,
    When,
    Then,
    And,
}

impl Keyword {
    pub fn as_str(self) -> &'static str {
        match self {
            Keyword::Given => "Given",
            Keyword::When => "When",
            Keyword::Then => "Then",
            Keyword::And => "And",
        }
    }
}

impl fmt::Display for Keyword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One Given/When/Then/And line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub keyword: Keyword,
    /// For `And`, the nearest preceding non-`And` keyword.
    pub resolved_keyword: Keyword,
    pub text: String,
    /// Double-quoted parameters in text order, without the quotes.
    pub params: Vec<String>,
}

impl Step {
    pub fn new(keyword: Keyword, resolved_keyword: Keyword, text: impl Into<String>) -> Self {
        let text = text.into();
        let params = quoted_params(&text);
        Self {
            keyword,
            resolved_keyword,
            text,
            params,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub steps: Vec<Step>,
}

/// A parsed feature file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureAst {
    pub name: String,
    /// "As a ..."
    pub role: String,
    /// "I want to ..." / "I request ..."
    pub request: String,
    /// "In order to ..." / "To gain ..."
    pub benefit: String,
    pub header_present: bool,
    pub scenarios: Vec<Scenario>,
}

impl FeatureAst {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            role: String::new(),
            request: String::new(),
            benefit: String::new(),
            header_present: false,
            scenarios: Vec::new(),
        }
    }
}

/// A piece of step text: literal, or the inside of a `"..."` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Segment<'a> {
    Literal(&'a str),
    Quoted(&'a str),
}

/// Splits text into literal and quoted segments. An unmatched trailing quote
/// stays literal.
pub(crate) fn split_quoted(text: &str) -> Vec<Segment<'_>> {
    let mut segments = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('"') {
        let Some(len) = rest[open + 1..].find('"') else {
            break;
        };
        if open > 0 {
            segments.push(Segment::Literal(&rest[..open]));
        }
        segments.push(Segment::Quoted(&rest[open + 1..open + 1 + len]));
        rest = &rest[open + len + 2..];
    }
    if !rest.is_empty() {
        segments.push(Segment::Literal(rest));
    }
    segments
}

fn quoted_params(text: &str) -> Vec<String> {
    split_quoted(text)
        .into_iter()
        .filter_map(|s| match s {
            Segment::Quoted(q) => Some(q.to_string()),
            Segment::Literal(_) => None,
        })
        .collect()
}
