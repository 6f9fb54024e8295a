use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{FiringReport, Session, SessionError, SessionPolicy, SutFactory};
use crate::mapping::{pn_to_scenarios, scenario_name, EnumerationOptions};
use crate::petri::{Marking, PetriNet};
use crate::runtime::{StepRegistry, StepStatus, TransitionMap};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: String,
    pub transitions: Vec<String>,
    pub truncated: bool,
    /// Worst status among the firings.
    pub status: StepStatus,
    pub firings: Vec<FiringReport>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub passed: usize,
    pub failed: usize,
    pub pending: usize,
    pub ambiguous: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchReport {
    pub scenarios: Vec<ScenarioReport>,
    pub summary: BatchSummary,
}

/// Replays every enumerated scenario in a fresh session that advances past
/// failures, so every bound step of every scenario runs.
pub fn run_all_scenarios(
    net: Arc<PetriNet>,
    registry: Arc<StepRegistry>,
    transition_map: Arc<TransitionMap>,
    sut_factory: SutFactory,
    opts: EnumerationOptions,
) -> Result<BatchReport, SessionError> {
    let traces = pn_to_scenarios(&net, opts)?;
    let policy = SessionPolicy {
        advance_on_failure: true,
    };
    let mut scenarios = Vec::with_capacity(traces.len());
    let mut summary = BatchSummary::default();
    for (i, trace) in traces.iter().enumerate() {
        let mut session = Session::new(
            net.clone(),
            registry.clone(),
            transition_map.clone(),
            sut_factory.clone(),
            policy,
        )?;
        let mut firings = Vec::with_capacity(trace.transitions_fired.len());
        for transition in &trace.transitions_fired {
            firings.push(session.fire(transition)?);
        }
        let status = firings.iter().map(|f| f.status).max().unwrap_or(StepStatus::Passed);
        match status {
            StepStatus::Passed => summary.passed += 1,
            StepStatus::Failed => summary.failed += 1,
            StepStatus::Pending => summary.pending += 1,
            StepStatus::Ambiguous => summary.ambiguous += 1,
        }
        summary.total += 1;
        scenarios.push(ScenarioReport {
            name: scenario_name(&net, trace, i),
            transitions: trace.transitions_fired.clone(),
            truncated: trace.truncated,
            status,
            firings,
        });
    }
    Ok(BatchReport { scenarios, summary })
}

/// Outcome of firing a set of concurrent branch transitions in one order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchOrderRun {
    pub order: Vec<String>,
    pub final_marking: Marking,
    /// Step statuses of the branch firings, sorted.
    pub statuses: Vec<StepStatus>,
    pub all_advanced: bool,
}

fn permutations(items: &[String]) -> Vec<Vec<String>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}

/// Fires `prefix` and then `branches` in every order, each in a fresh
/// interactive session. Concurrent branches are order-independent when all
/// runs agree on final marking and statuses.
pub fn compare_branch_orders(
    net: Arc<PetriNet>,
    registry: Arc<StepRegistry>,
    transition_map: Arc<TransitionMap>,
    sut_factory: SutFactory,
    prefix: &[String],
    branches: &[String],
) -> Result<Vec<BranchOrderRun>, SessionError> {
    let mut runs = Vec::new();
    for order in permutations(branches) {
        let mut session = Session::new(
            net.clone(),
            registry.clone(),
            transition_map.clone(),
            sut_factory.clone(),
            SessionPolicy::default(),
        )?;
        for transition in prefix {
            session.fire(transition)?;
        }
        let mut statuses = Vec::new();
        let mut all_advanced = true;
        for transition in &order {
            let report = session.fire(transition)?;
            all_advanced &= report.advanced;
            statuses.extend(report.step_results.iter().map(|r| r.status));
        }
        statuses.sort();
        runs.push(BranchOrderRun {
            order,
            final_marking: session.marking().clone(),
            statuses,
            all_advanced,
        });
    }
    Ok(runs)
}
