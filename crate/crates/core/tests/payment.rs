mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use bldd_core::gwt::{parse_feature, render_feature};
use bldd_core::mapping::{feature_to_pn, pn_to_scenarios, scenarios_to_feature, EnumerationOptions, FeatureMeta};
use bldd_core::petri::{classify_constructs, validate_workflow_net, ConstructKind, Marking};
use bldd_core::runtime::{load_bindings_manifest, MockFixture, StepStatus};
use bldd_core::session::{
    compare_branch_orders, create_session, mock_factory, run_all_scenarios, BatchReport, SessionPolicy,
};
use bldd_oracle::{label_isomorphic, RefMarking};
use common::*;

fn batch(sut: &str, manifest: &str) -> BatchReport {
    let (registry, map) = load_bindings_manifest(manifest, "payment.bindings.json").unwrap();
    run_all_scenarios(
        Arc::new(payment()),
        Arc::new(registry),
        Arc::new(map),
        mock_factory(MockFixture::from_json(sut).unwrap()),
        EnumerationOptions::default(),
    )
    .unwrap()
}

#[test]
fn payment_is_a_workflow_net_with_all_constructs() {
    let net = payment();
    assert!(validate_workflow_net(&net).is_empty());
    let kinds = classify_constructs(&net);
    for expected in [
        ("p_start", ConstructKind::OrSplit),
        ("p_paid", ConstructKind::OrJoin),
        ("t_confirm", ConstructKind::AndSplit),
        ("t_release", ConstructKind::AndJoin),
        ("t_fill_card", ConstructKind::Sequence),
    ] {
        assert!(kinds.contains(&(expected.0.to_string(), expected.1)), "{expected:?}");
    }
}

#[test]
fn two_scenarios_matching_the_reference_runs() {
    let net = payment();
    let traces = pn_to_scenarios(&net, EnumerationOptions::default()).unwrap();
    assert_eq!(traces.len(), 2);
    let card = traces
        .iter()
        .find(|t| t.transitions_fired.contains(&"t_card".to_string()))
        .unwrap();
    let slip = traces
        .iter()
        .find(|t| t.transitions_fired.contains(&"t_slip".to_string()))
        .unwrap();
    assert_eq!(card.parallel_groups.len(), 1);
    assert_eq!(card.parallel_groups[0].len(), 2);
    assert!(slip.parallel_groups.is_empty());

    // All complete runs from the reference, collapsed by commuting
    // independent neighbours, give one class per scenario.
    let reference = ref_net(&net);
    let start = RefMarking::from([("p_start".to_string(), 1)]);
    let end = RefMarking::from([("p_end".to_string(), 1)]);
    let runs = reference.complete_runs(&start, &end, 20);
    assert_eq!(runs.len(), 3);
    let classes: BTreeSet<Vec<String>> = runs.iter().map(|r| reference.lex_normal_form(r)).collect();
    let ours: BTreeSet<Vec<String>> = traces
        .iter()
        .map(|t| reference.lex_normal_form(&t.transitions_fired))
        .collect();
    assert_eq!(ours, classes);
}

#[test]
fn generated_feature_reparses_and_folds_back() {
    let net = payment();
    let traces = pn_to_scenarios(&net, EnumerationOptions::default()).unwrap();
    let meta = FeatureMeta {
        name: "Payment".into(),
        role: "customer".into(),
        request: "pay for my order".into(),
        benefit: "receive the goods".into(),
    };
    let ast = scenarios_to_feature(&traces, &net, &meta);
    let text = render_feature(&ast);
    assert_eq!(parse_feature(&text).unwrap(), ast);
    assert!(
        text.contains("Scenario: Path 1: customer pays by credit card"),
        "{text}"
    );
    assert!(text.contains("And in parallel: inventory check pending"), "{text}");
    let folded = feature_to_pn(&ast).unwrap();
    assert!(label_isomorphic(&labeled(&folded), &labeled(&net)));
}

#[test]
fn consistent_fixtures_pass_every_scenario() {
    let report = batch(&fixture("payment.sut.json"), &fixture("payment.bindings.json"));
    assert_eq!(report.summary.total, 2);
    assert_eq!(report.summary.passed, 2, "{report:#?}");
}

#[test]
fn broken_fixture_fails_exactly_at_the_sales_assertion() {
    let report = batch(&fixture("payment_broken.sut.json"), &fixture("payment.bindings.json"));
    assert_eq!(report.summary.failed, 1);
    assert_eq!(report.summary.passed, 1);
    let failed = report
        .scenarios
        .iter()
        .find(|s| s.status == StepStatus::Failed)
        .unwrap();
    let failing: Vec<_> = failed
        .firings
        .iter()
        .flat_map(|f| f.step_results.iter().map(move |r| (f.transition.as_str(), r)))
        .filter(|(_, r)| r.status == StepStatus::Failed)
        .collect();
    assert_eq!(failing.len(), 1);
    assert_eq!(failing[0].0, "t_release");
    assert!(failing[0].1.message.contains("9 sales awaiting to be sent"));
}

#[test]
fn removed_binding_is_pending_only_where_used() {
    let mut manifest: serde_json::Value = serde_json::from_str(&fixture("payment.bindings.json")).unwrap();
    let bindings = manifest["bindings"].as_array_mut().unwrap();
    bindings.retain(|b| b["pattern"] != "the inventory should report \"(.+)\"");
    let report = batch(&fixture("payment.sut.json"), &manifest.to_string());
    assert_eq!(report.summary.failed, 0);
    assert_eq!(report.summary.pending, 1);
    let pending: Vec<&str> = report
        .scenarios
        .iter()
        .flat_map(|s| &s.firings)
        .filter(|f| f.step_results.iter().any(|r| r.status == StepStatus::Pending))
        .map(|f| f.transition.as_str())
        .collect();
    assert_eq!(pending, vec!["t_check_inventory"]);
}

#[test]
fn interactive_walkthrough_of_the_card_path() {
    let mut session = create_session(
        payment(),
        &fixture("payment.bindings.json"),
        "payment.bindings.json",
        &fixture("payment.sut.json"),
        SessionPolicy::default(),
    )
    .unwrap();
    let state = session.state();
    assert_eq!(state.enabled.len(), 2);
    assert!(state.enabled.iter().all(|e| e.or_alternative));

    let report = session.fire("t_card").unwrap();
    assert!(report.advanced, "{report:#?}");
    assert!(report
        .message
        .starts_with("Given order awaiting payment method\nWhen customer pays by credit card"));
    assert!(session.sut().visible_texts().contains(&"Credit card data".to_string()));

    session.fire("t_fill_card").unwrap();
    let split = session.fire("t_confirm").unwrap();
    assert_eq!(split.parallel_branch_reports.as_ref().map(Vec::len), Some(2));
    for t in ["t_send_email", "t_check_inventory", "t_release", "t_close"] {
        let report = session.fire(t).unwrap();
        assert!(report.advanced, "{t}: {report:#?}");
    }
    let state = session.state();
    assert!(state.completed);
    assert_eq!(state.marking, Marking::single("p_end"));
}

#[test]
fn branch_order_does_not_matter() {
    let (registry, map) = load_bindings_manifest(&fixture("payment.bindings.json"), "payment.bindings.json").unwrap();
    let prefix: Vec<String> = ["t_card", "t_fill_card", "t_confirm"].map(String::from).to_vec();
    let branches: Vec<String> = ["t_check_inventory", "t_send_email"].map(String::from).to_vec();
    let runs = compare_branch_orders(
        Arc::new(payment()),
        Arc::new(registry),
        Arc::new(map),
        mock_factory(MockFixture::from_json(&fixture("payment.sut.json")).unwrap()),
        &prefix,
        &branches,
    )
    .unwrap();
    assert_eq!(runs.len(), 2);
    assert!(runs.iter().all(|r| r.all_advanced));
    assert_eq!(runs[0].final_marking, runs[1].final_marking);
    assert_eq!(runs[0].statuses, runs[1].statuses);
}
