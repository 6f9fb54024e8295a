use std::collections::BTreeMap;

use serde_json::{Map, Value};
use thiserror::Error;

use super::{
    ActionKind, ActionSpec, ArgSlot, BindingSource, CommandSpec, DuplicatePattern, StepBinding, StepRegistry,
    DEFAULT_COMMAND_TIMEOUT_MS,
};

/// Transition id to the step texts run when it fires.
pub type TransitionMap = BTreeMap<String, Vec<String>>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ManifestError {
    #[error("invalid JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: unknown action kind `{kind}`")]
    UnknownActionKind { path: String, kind: String },
    #[error(transparent)]
    Duplicate(#[from] DuplicatePattern),
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> ManifestError {
    ManifestError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn check_keys(obj: &Map<String, Value>, path: &str, allowed: &[&str]) -> Result<(), ManifestError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(key) => Err(schema(format!("{path}.{key}"), "unexpected key")),
        None => Ok(()),
    }
}

fn as_object<'a>(value: &'a Value, path: &str) -> Result<&'a Map<String, Value>, ManifestError> {
    value.as_object().ok_or_else(|| schema(path, "expected an object"))
}

fn as_str<'a>(value: &'a Value, path: &str) -> Result<&'a str, ManifestError> {
    value.as_str().ok_or_else(|| schema(path, "expected a string"))
}

/// Line of the `index`-th `"pattern"` key, found by scanning the raw text.
fn pattern_line(document: &str, index: usize) -> Option<usize> {
    let offset = document.match_indices("\"pattern\"").nth(index)?.0;
    Some(document[..offset].matches('\n').count() + 1)
}

fn parse_arg(value: &Value, path: &str) -> Result<ArgSlot, ManifestError> {
    let text = as_str(value, path)?;
    match text.strip_prefix('$').map(str::parse::<usize>) {
        Some(Ok(index)) if index > 0 => Ok(ArgSlot::Capture(index)),
        _ => Ok(ArgSlot::Literal(text.to_string())),
    }
}

fn parse_action(value: &Value, path: &str, captures: usize) -> Result<ActionSpec, ManifestError> {
    let obj = as_object(value, path)?;
    check_keys(
        obj,
        path,
        &["kind", "args", "command", "exit_code", "expect_output", "timeout_ms"],
    )?;
    let kind_path = format!("{path}.kind");
    let kind_name = as_str(
        obj.get("kind").ok_or_else(|| schema(&kind_path, "missing"))?,
        &kind_path,
    )?;
    let kind = ActionKind::from_name(kind_name).ok_or_else(|| ManifestError::UnknownActionKind {
        path: kind_path,
        kind: kind_name.to_string(),
    })?;

    let args = match obj.get("args") {
        Some(value) => {
            let args_path = format!("{path}.args");
            let items = value
                .as_array()
                .ok_or_else(|| schema(&args_path, "expected an array"))?;
            items
                .iter()
                .enumerate()
                .map(|(i, v)| parse_arg(v, &format!("{args_path}[{i}]")))
                .collect::<Result<_, _>>()?
        }
        None => {
            let n = kind.arity().unwrap_or(captures);
            (1..=n).map(ArgSlot::Capture).collect()
        }
    };

    let command = if kind == ActionKind::Command {
        let line_path = format!("{path}.command");
        let line = as_str(
            obj.get("command").ok_or_else(|| schema(&line_path, "missing"))?,
            &line_path,
        )?;
        let exit_code = match obj.get("exit_code") {
            Some(v) => v
                .as_i64()
                .and_then(|c| i32::try_from(c).ok())
                .ok_or_else(|| schema(format!("{path}.exit_code"), "expected an integer"))?,
            None => 0,
        };
        let expect_output = match obj.get("expect_output") {
            Some(v) => Some(as_str(v, &format!("{path}.expect_output"))?.to_string()),
            None => None,
        };
        let timeout_ms = match obj.get("timeout_ms") {
            Some(v) => v
                .as_u64()
                .filter(|t| *t > 0)
                .ok_or_else(|| schema(format!("{path}.timeout_ms"), "expected a positive integer"))?,
            None => DEFAULT_COMMAND_TIMEOUT_MS,
        };
        Some(CommandSpec {
            line: line.to_string(),
            exit_code,
            expect_output,
            timeout_ms,
        })
    } else {
        for key in ["command", "exit_code", "expect_output", "timeout_ms"] {
            if obj.contains_key(key) {
                return Err(schema(format!("{path}.{key}"), "only valid for Command actions"));
            }
        }
        None
    };
    Ok(ActionSpec { kind, args, command })
}

/// Loads a bindings manifest on top of the built-in bindings.
///
/// A manifest pattern identical to a built-in one is accepted when it also
/// names the same action, and is then ignored; any other repeated pattern is
/// an error. `file` names the manifest in binding sources.
pub fn load_bindings_manifest(document: &str, file: &str) -> Result<(StepRegistry, TransitionMap), ManifestError> {
    let root: Value = serde_json::from_str(document).map_err(|e| ManifestError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let obj = as_object(&root, "$")?;
    check_keys(obj, "$", &["bindings", "transitions"])?;

    let mut registry = StepRegistry::builtins();
    let builtin_count = registry.len();
    if let Some(bindings) = obj.get("bindings") {
        let items = bindings
            .as_array()
            .ok_or_else(|| schema("$.bindings", "expected an array"))?;
        for (index, item) in items.iter().enumerate() {
            let path = format!("$.bindings[{index}]");
            let entry = as_object(item, &path)?;
            check_keys(entry, &path, &["pattern", "action"])?;
            let pattern_path = format!("{path}.pattern");
            let pattern = as_str(
                entry.get("pattern").ok_or_else(|| schema(&pattern_path, "missing"))?,
                &pattern_path,
            )?;
            let captures = regex::Regex::new(&format!("^(?:{pattern})$"))
                .map(|r| r.captures_len() - 1)
                .map_err(|e| schema(&pattern_path, format!("pattern does not compile: {e}")))?;
            let action_path = format!("{path}.action");
            let action = parse_action(
                entry.get("action").ok_or_else(|| schema(&action_path, "missing"))?,
                &action_path,
                captures,
            )?;
            let source = BindingSource::Manifest {
                file: file.to_string(),
                index,
                line: pattern_line(document, index),
            };
            let binding = StepBinding::new(pattern, action, source).map_err(|e| schema(&path, e.to_string()))?;
            let builtin_twin = registry.bindings()[..builtin_count]
                .iter()
                .any(|b| b.pattern == binding.pattern && b.action == binding.action);
            if builtin_twin {
                continue;
            }
            registry.register(binding)?;
        }
    }

    let mut transitions = TransitionMap::new();
    if let Some(map) = obj.get("transitions") {
        let map = as_object(map, "$.transitions")?;
        for (id, steps) in map {
            let path = format!("$.transitions.{id}");
            let items = steps.as_array().ok_or_else(|| schema(&path, "expected an array"))?;
            let texts = items
                .iter()
                .enumerate()
                .map(|(i, v)| as_str(v, &format!("{path}[{i}]")).map(str::to_string))
                .collect::<Result<Vec<_>, _>>()?;
            transitions.insert(id.clone(), texts);
        }
    }
    Ok((registry, transitions))
}
