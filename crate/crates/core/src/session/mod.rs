//! Interactive token game: firing a transition runs its bound steps and
//! moves the tokens only when they pass.

mod batch;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mapping::{gwt_for_firing, GwtTriple, MappingError};
use crate::petri::{validate_workflow_net, ConstructKind, Diagnostic, Marking, NetError, PetriNet};
use crate::runtime::{
    execute_steps, load_bindings_manifest, overall_status, ExecOptions, FixtureError, ManifestError, MockApp,
    MockFixture, StepRegistry, StepResult, StepStatus, SutAdapter, TransitionMap,
};

pub use batch::{compare_branch_orders, run_all_scenarios, BatchReport, BatchSummary, BranchOrderRun, ScenarioReport};

/// Builds a fresh system-under-test instance.
pub type SutFactory = Arc<dyn Fn() -> Box<dyn SutAdapter> + Send + Sync>;

pub fn mock_factory(fixture: MockFixture) -> SutFactory {
    let fixture = Arc::new(fixture);
    Arc::new(move || Box::new(MockApp::new(fixture.clone())) as Box<dyn SutAdapter>)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SessionError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("not a workflow net: {}", .0.iter().map(|d| d.message.as_str()).collect::<Vec<_>>().join("; "))]
    InvalidWorkflowNet(Vec<Diagnostic>),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Fixture(#[from] FixtureError),
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error("bindings map steps to `{0}`, which is not a transition of the net")]
    UnmappedTransition(String),
    #[error("transition `{0}` is not enabled")]
    NotEnabled(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionPolicy {
    /// Move the tokens even when steps do not pass. Steps then all run, so
    /// every problem is reported; otherwise execution stops at the first.
    pub advance_on_failure: bool,
}

impl SessionPolicy {
    fn exec_options(self) -> ExecOptions {
        ExecOptions {
            stop_on_failure: !self.advance_on_failure,
        }
    }
}

/// Transitions fed by one output place of an AND-split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchReport {
    pub place: String,
    pub label: String,
    pub transitions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiringReport {
    pub transition: String,
    pub gwt: GwtTriple,
    /// The GWT triple as text, emitted whether or not the steps passed.
    pub message: String,
    pub step_results: Vec<StepResult>,
    pub status: StepStatus,
    pub advanced: bool,
    pub marking_after: Marking,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallel_branch_reports: Option<Vec<BranchReport>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnabledTransition {
    pub id: String,
    pub label: String,
    pub construct: ConstructKind,
    /// Another enabled transition competes for one of its input places.
    pub or_alternative: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionState {
    pub marking: Marking,
    pub enabled: Vec<EnabledTransition>,
    pub log_length: usize,
    /// Only the sink place is marked.
    pub completed: bool,
}

/// Construct shown for a transition: splits take precedence over joins.
fn transition_construct(net: &PetriNet, transition: &str) -> ConstructKind {
    if net.outputs(transition).len() > 1 {
        ConstructKind::AndSplit
    } else if net.inputs(transition).len() > 1 {
        ConstructKind::AndJoin
    } else {
        ConstructKind::Sequence
    }
}

pub struct Session {
    net: Arc<PetriNet>,
    registry: Arc<StepRegistry>,
    transition_map: Arc<TransitionMap>,
    sut_factory: SutFactory,
    sut: Box<dyn SutAdapter>,
    policy: SessionPolicy,
    initial: Marking,
    marking: Marking,
    goal: Marking,
    log: Vec<FiringReport>,
}

impl std::fmt::Debug for Session {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Session")
            .field("net", &self.net.id())
            .field("marking", &self.marking)
            .field("policy", &self.policy)
            .field("log_length", &self.log.len())
            .finish()
    }
}

impl Session {
    /// Starts at the net's initial marking, or with one token on the source
    /// place when the net declares none.
    pub fn new(
        net: Arc<PetriNet>,
        registry: Arc<StepRegistry>,
        transition_map: Arc<TransitionMap>,
        sut_factory: SutFactory,
        policy: SessionPolicy,
    ) -> Result<Self, SessionError> {
        let diagnostics = validate_workflow_net(&net);
        if !diagnostics.is_empty() {
            return Err(SessionError::InvalidWorkflowNet(diagnostics));
        }
        if let Some(id) = transition_map.keys().find(|id| net.transition(id).is_none()) {
            return Err(SessionError::UnmappedTransition(id.clone()));
        }
        let initial = if net.initial_marking().is_empty() {
            Marking::single(net.source_places()[0])
        } else {
            net.initial_marking().clone()
        };
        let goal = Marking::single(net.sink_places()[0]);
        let sut = sut_factory();
        Ok(Self {
            net,
            registry,
            transition_map,
            sut_factory,
            sut,
            policy,
            marking: initial.clone(),
            initial,
            goal,
            log: Vec::new(),
        })
    }

    pub fn net(&self) -> &Arc<PetriNet> {
        &self.net
    }

    pub fn registry(&self) -> &Arc<StepRegistry> {
        &self.registry
    }

    pub fn transition_map(&self) -> &Arc<TransitionMap> {
        &self.transition_map
    }

    pub fn policy(&self) -> SessionPolicy {
        self.policy
    }

    pub fn marking(&self) -> &Marking {
        &self.marking
    }

    pub fn initial_marking(&self) -> &Marking {
        &self.initial
    }

    pub fn log(&self) -> &[FiringReport] {
        &self.log
    }

    pub fn sut(&self) -> &dyn SutAdapter {
        self.sut.as_ref()
    }

    pub fn state(&self) -> SessionState {
        let enabled_ids = self.net.enabled_transitions(&self.marking).unwrap_or_default();
        let enabled = enabled_ids
            .iter()
            .map(|id| {
                let or_alternative = self.net.inputs(id).iter().any(|(place, _)| {
                    self.net
                        .consumers(place)
                        .iter()
                        .any(|other| other != id && enabled_ids.contains(other))
                });
                EnabledTransition {
                    id: id.clone(),
                    label: self.net.label(id).to_string(),
                    construct: transition_construct(&self.net, id),
                    or_alternative,
                }
            })
            .collect();
        SessionState {
            marking: self.marking.clone(),
            enabled,
            log_length: self.log.len(),
            completed: self.marking == self.goal,
        }
    }

    /// Runs the steps bound to `transition` and fires it when they pass (or
    /// when the policy says to advance regardless). The report is logged.
    pub fn fire(&mut self, transition: &str) -> Result<FiringReport, SessionError> {
        if !self.net.is_enabled(&self.marking, transition)? {
            return Err(SessionError::NotEnabled(transition.to_string()));
        }
        let gwt = gwt_for_firing(&self.net, &self.marking, transition)?;
        let steps = self
            .transition_map
            .get(transition)
            .map(Vec::as_slice)
            .unwrap_or_default();
        let step_results = execute_steps(&self.registry, self.sut.as_mut(), steps, self.policy.exec_options());
        let status = overall_status(&step_results);
        let advanced = status == StepStatus::Passed || self.policy.advance_on_failure;
        if advanced {
            self.marking = self.net.fire(&self.marking, transition)?;
        }
        let parallel_branch_reports = (self.net.outputs(transition).len() > 1).then(|| {
            self.net
                .outputs(transition)
                .iter()
                .map(|(place, _)| BranchReport {
                    place: place.clone(),
                    label: self.net.label(place).to_string(),
                    transitions: self.net.consumers(place).to_vec(),
                })
                .collect()
        });
        let report = FiringReport {
            transition: transition.to_string(),
            message: gwt.to_text(),
            gwt,
            step_results,
            status,
            advanced,
            marking_after: self.marking.clone(),
            parallel_branch_reports,
        };
        self.log.push(report.clone());
        Ok(report)
    }

    /// Back to the initial marking with a fresh system under test. Returns
    /// the log of the finished run.
    pub fn reset(&mut self) -> Vec<FiringReport> {
        self.marking = self.initial.clone();
        self.sut = (self.sut_factory)();
        std::mem::take(&mut self.log)
    }

    /// Replaces the system under test used from the next reset on.
    pub fn set_sut_factory(&mut self, factory: SutFactory) {
        self.sut_factory = factory;
    }

    /// The log as JSON lines, one firing report per line.
    pub fn log_jsonl(&self) -> String {
        self.log
            .iter()
            .map(|r| serde_json::to_string(r).expect("reports serialize") + "\n")
            .collect()
    }
}

/// Session over a bindings manifest and a mock-application fixture.
pub fn create_session(
    net: PetriNet,
    manifest: &str,
    manifest_name: &str,
    sut_fixture: &str,
    policy: SessionPolicy,
) -> Result<Session, SessionError> {
    let (registry, map) = load_bindings_manifest(manifest, manifest_name)?;
    let fixture = MockFixture::from_json(sut_fixture)?;
    Session::new(
        Arc::new(net),
        Arc::new(registry),
        Arc::new(map),
        mock_factory(fixture),
        policy,
    )
}

/// Construct annotation per transition, for clients drawing the net.
pub fn transition_constructs(net: &PetriNet) -> BTreeMap<String, ConstructKind> {
    net.transitions()
        .iter()
        .map(|t| (t.id.clone(), transition_construct(net, &t.id)))
        .collect()
}
