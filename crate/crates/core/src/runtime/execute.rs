use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::command::run_command;
use super::{
    strip_step_keyword, ActionKind, Resolution, StepBinding, StepRegistry, StepResult, StepStatus, SutAdapter,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecOptions {
    /// Report the steps after the first non-passing one as skipped.
    pub stop_on_failure: bool,
}

impl Default for ExecOptions {
    fn default() -> Self {
        Self { stop_on_failure: true }
    }
}

pub(crate) fn pending_message(step_text: &str) -> String {
    format!("no step definition matches \"{step_text}\": this test needs to be implemented, along with its acceptance criterion")
}

pub(crate) const SKIPPED_MESSAGE: &str = "not run: an earlier step did not pass";

fn perform(binding: &StepBinding, captures: &[String], sut: &mut dyn SutAdapter) -> Result<(), String> {
    let args = binding.resolve_args(captures);
    let arg = |i: usize| args.get(i).map(String::as_str).unwrap_or_default();
    match binding.action.kind {
        ActionKind::Visit => sut.visit(arg(0)).map_err(|e| e.0),
        ActionKind::Fill => sut.fill(arg(0), arg(1)).map_err(|e| e.0),
        ActionKind::Press => sut.press(arg(0)).map(|_| ()).map_err(|e| e.0),
        ActionKind::AssertOnPage => {
            let page = sut.current_page();
            if page == arg(0) {
                Ok(())
            } else {
                Err(format!(
                    "expected to be on the \"{}\" page, but the current page is \"{page}\"",
                    arg(0)
                ))
            }
        }
        ActionKind::AssertSee => {
            let texts = sut.visible_texts();
            if texts.iter().any(|t| t.contains(arg(0))) {
                Ok(())
            } else {
                let shown: Vec<String> = texts.iter().map(|t| format!("\"{t}\"")).collect();
                Err(format!(
                    "expected to see \"{}\", but the page shows [{}]",
                    arg(0),
                    shown.join(", ")
                ))
            }
        }
        ActionKind::Command => match &binding.action.command {
            Some(spec) => run_command(spec, &args),
            None => Err("Command action has no command line".to_string()),
        },
    }
}

/// Runs one bound step against `sut`. Failures come back as a Failed
/// result, never as an error.
pub fn execute_step(binding: &StepBinding, sut: &mut dyn SutAdapter, step_text: &str) -> StepResult {
    let started = Instant::now();
    let outcome = match binding.captures(strip_step_keyword(step_text)) {
        Some(captures) => perform(binding, &captures, sut),
        None => Err(format!("step does not match pattern `{}`", binding.pattern)),
    };
    let (status, message) = match outcome {
        Ok(()) => (StepStatus::Passed, String::new()),
        Err(message) => (StepStatus::Failed, message),
    };
    StepResult {
        step_text: step_text.to_string(),
        status,
        message,
        duration_ms: started.elapsed().as_millis() as u64,
        skipped: false,
    }
}

/// Resolves and runs `steps` in order.
pub fn execute_steps(
    registry: &StepRegistry,
    sut: &mut dyn SutAdapter,
    steps: &[String],
    opts: ExecOptions,
) -> Vec<StepResult> {
    let mut results = Vec::with_capacity(steps.len());
    let mut halted = false;
    for text in steps {
        if halted {
            results.push(StepResult {
                step_text: text.clone(),
                status: StepStatus::Pending,
                message: SKIPPED_MESSAGE.to_string(),
                duration_ms: 0,
                skipped: true,
            });
            continue;
        }
        let result = match registry.resolve(text) {
            Resolution::Matched { binding, .. } => execute_step(binding, sut, text),
            Resolution::Pending => StepResult {
                step_text: text.clone(),
                status: StepStatus::Pending,
                message: pending_message(text),
                duration_ms: 0,
                skipped: false,
            },
            Resolution::Ambiguous { matches } => {
                let listed: Vec<String> = matches
                    .iter()
                    .map(|b| format!("`{}` ({})", b.pattern, b.source))
                    .collect();
                StepResult {
                    step_text: text.clone(),
                    status: StepStatus::Ambiguous,
                    message: format!("ambiguous step, matched by {}", listed.join(" and ")),
                    duration_ms: 0,
                    skipped: false,
                }
            }
        };
        halted = opts.stop_on_failure && result.status != StepStatus::Passed;
        results.push(result);
    }
    results
}

/// Worst status among `results`; Passed when there are none.
pub fn overall_status(results: &[StepResult]) -> StepStatus {
    results.iter().map(|r| r.status).max().unwrap_or(StepStatus::Passed)
}
