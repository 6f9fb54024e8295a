//! Step bindings and their execution against a system under test.

mod command;
mod execute;
mod manifest;
mod mock;

use std::fmt;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use execute::{execute_step, execute_steps, overall_status, ExecOptions};
pub use manifest::{load_bindings_manifest, ManifestError, TransitionMap};
pub use mock::{FixtureError, MockApp, MockFixture};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActionKind {
    Visit,
    Fill,
    Press,
    AssertOnPage,
    AssertSee,
    Command,
}

impl ActionKind {
    pub const ALL: [ActionKind; 6] = [
        ActionKind::Visit,
        ActionKind::Fill,
        ActionKind::Press,
        ActionKind::AssertOnPage,
        ActionKind::AssertSee,
        ActionKind::Command,
    ];

    /// Number of argument slots; `None` for Command, which forwards any
    /// number of positional arguments.
    pub fn arity(self) -> Option<usize> {
        match self {
            ActionKind::Fill => Some(2),
            ActionKind::Command => None,
            _ => Some(1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ActionKind::Visit => "Visit",
            ActionKind::Fill => "Fill",
            ActionKind::Press => "Press",
            ActionKind::AssertOnPage => "AssertOnPage",
            ActionKind::AssertSee => "AssertSee",
            ActionKind::Command => "Command",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// An action argument: a fixed string or a capture group of the pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArgSlot {
    Capture(usize),
    Literal(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommandSpec {
    /// Run through `sh -c`; captures arrive as `$1`, `$2`, ...
    pub line: String,
    pub exit_code: i32,
    pub expect_output: Option<String>,
    pub timeout_ms: u64,
}

pub const DEFAULT_COMMAND_TIMEOUT_MS: u64 = 30_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSpec {
    pub kind: ActionKind,
    pub args: Vec<ArgSlot>,
    pub command: Option<CommandSpec>,
}

impl ActionSpec {
    /// Action whose arguments are the pattern's capture groups in order.
    pub fn from_captures(kind: ActionKind, captures: usize) -> Self {
        Self {
            kind,
            args: (1..=captures).map(ArgSlot::Capture).collect(),
            command: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BindingSource {
    Builtin,
    Manifest {
        file: String,
        index: usize,
        line: Option<usize>,
    },
}

impl fmt::Display for BindingSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BindingSource::Builtin => write!(f, "built-in"),
            BindingSource::Manifest { file, index, line } => {
                write!(f, "{file} binding #{index}")?;
                if let Some(line) = line {
                    write!(f, " (line {line})")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BindingError {
    #[error("pattern `{pattern}` does not compile: {message}")]
    BadPattern { pattern: String, message: String },
    #[error("{kind:?} takes {expected} argument(s), got {found}")]
    Arity {
        kind: ActionKind,
        expected: usize,
        found: usize,
    },
    #[error("argument refers to capture ${index} but the pattern has {captures} group(s)")]
    MissingCapture { index: usize, captures: usize },
    #[error("Command action needs a command line")]
    MissingCommand,
}

#[derive(Debug, Clone, Serialize)]
pub struct StepBinding {
    pub pattern: String,
    pub action: ActionSpec,
    pub source: BindingSource,
    #[serde(skip)]
    regex: Regex,
}

impl PartialEq for StepBinding {
    fn eq(&self, other: &Self) -> bool {
        self.pattern == other.pattern && self.action == other.action && self.source == other.source
    }
}

impl StepBinding {
    pub fn new(pattern: impl Into<String>, action: ActionSpec, source: BindingSource) -> Result<Self, BindingError> {
        let pattern = pattern.into();
        let regex = Regex::new(&format!("^(?:{pattern})$")).map_err(|e| BindingError::BadPattern {
            pattern: pattern.clone(),
            message: e.to_string(),
        })?;
        let captures = regex.captures_len() - 1;
        if let Some(expected) = action.kind.arity() {
            if action.args.len() != expected {
                return Err(BindingError::Arity {
                    kind: action.kind,
                    expected,
                    found: action.args.len(),
                });
            }
        }
        for arg in &action.args {
            if let ArgSlot::Capture(index) = arg {
                if *index == 0 || *index > captures {
                    return Err(BindingError::MissingCapture {
                        index: *index,
                        captures,
                    });
                }
            }
        }
        if action.kind == ActionKind::Command && action.command.is_none() {
            return Err(BindingError::MissingCommand);
        }
        Ok(Self {
            pattern,
            action,
            source,
            regex,
        })
    }

    pub fn capture_count(&self) -> usize {
        self.regex.captures_len() - 1
    }

    /// Capture groups when the whole text matches; unmatched optional
    /// groups come back empty.
    pub fn captures(&self, text: &str) -> Option<Vec<String>> {
        let caps = self.regex.captures(text)?;
        Some(
            (1..caps.len())
                .map(|i| caps.get(i).map_or(String::new(), |m| m.as_str().to_string()))
                .collect(),
        )
    }

    pub(crate) fn resolve_args(&self, captures: &[String]) -> Vec<String> {
        self.action
            .args
            .iter()
            .map(|arg| match arg {
                ArgSlot::Capture(i) => captures.get(i - 1).cloned().unwrap_or_default(),
                ArgSlot::Literal(s) => s.clone(),
            })
            .collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("pattern `{pattern}` from {second} duplicates the one from {first}")]
pub struct DuplicatePattern {
    pub pattern: String,
    pub first: BindingSource,
    pub second: BindingSource,
}

/// Ordered step bindings; patterns are unique as written.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StepRegistry {
    bindings: Vec<StepBinding>,
}

/// Outcome of looking a step text up in a registry.
#[derive(Debug, Clone, PartialEq)]
pub enum Resolution<'a> {
    Matched {
        binding: &'a StepBinding,
        captures: Vec<String>,
    },
    Pending,
    Ambiguous {
        matches: Vec<&'a StepBinding>,
    },
}

const STEP_KEYWORDS: [&str; 4] = ["Given", "When", "Then", "And"];

/// Drops a leading Given/When/Then/And so texts copied from a feature file
/// resolve the same as bare step texts.
pub fn strip_step_keyword(text: &str) -> &str {
    let text = text.trim();
    for keyword in STEP_KEYWORDS {
        if let Some(rest) = text.strip_prefix(keyword) {
            if rest.starts_with(char::is_whitespace) {
                return rest.trim_start();
            }
        }
    }
    text
}

impl StepRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// The five UI step shapes of the scenario vocabulary.
    pub fn builtins() -> Self {
        let shapes = [
            (r"I go to the (.+) page", ActionKind::Visit),
            (r#"I fill in "(.+)" with "(.+)""#, ActionKind::Fill),
            (r#"I press "(.+)""#, ActionKind::Press),
            (r"I should be on the (.+) page", ActionKind::AssertOnPage),
            (r#"I should see "(.+)""#, ActionKind::AssertSee),
        ];
        let mut registry = Self::new();
        for (pattern, kind) in shapes {
            let arity = kind.arity().unwrap_or(0);
            let binding = StepBinding::new(pattern, ActionSpec::from_captures(kind, arity), BindingSource::Builtin)
                .expect("built-in patterns are valid");
            registry.bindings.push(binding);
        }
        registry
    }

    pub fn bindings(&self) -> &[StepBinding] {
        &self.bindings
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn find(&self, pattern: &str) -> Option<&StepBinding> {
        self.bindings.iter().find(|b| b.pattern == pattern)
    }

    pub fn register(&mut self, binding: StepBinding) -> Result<(), DuplicatePattern> {
        if let Some(existing) = self.find(&binding.pattern) {
            return Err(DuplicatePattern {
                pattern: binding.pattern,
                first: existing.source.clone(),
                second: binding.source,
            });
        }
        self.bindings.push(binding);
        Ok(())
    }

    pub fn resolve(&self, step_text: &str) -> Resolution<'_> {
        let text = strip_step_keyword(step_text);
        let mut matches: Vec<(&StepBinding, Vec<String>)> = self
            .bindings
            .iter()
            .filter_map(|b| b.captures(text).map(|c| (b, c)))
            .collect();
        match matches.len() {
            0 => Resolution::Pending,
            1 => {
                let (binding, captures) = matches.remove(0);
                Resolution::Matched { binding, captures }
            }
            _ => Resolution::Ambiguous {
                matches: matches.into_iter().map(|(b, _)| b).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StepStatus {
    Passed,
    Pending,
    Ambiguous,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepResult {
    pub step_text: String,
    pub status: StepStatus,
    pub message: String,
    pub duration_ms: u64,
    /// Not executed because an earlier step did not pass.
    #[serde(default)]
    pub skipped: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{0}")]
pub struct SutError(pub String);

/// Operations a system under test has to offer the UI step kinds.
pub trait SutAdapter: Send {
    fn visit(&mut self, page: &str) -> Result<(), SutError>;
    fn fill(&mut self, field: &str, value: &str) -> Result<(), SutError>;
    fn press(&mut self, button: &str) -> Result<String, SutError>;
    fn current_page(&self) -> String;
    fn visible_texts(&self) -> Vec<String>;
}
