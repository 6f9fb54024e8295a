mod common;

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::process::{Command, Stdio};

use bldd_core::gwt::parse_feature;
use bldd_core::petri::{parse_pnml, validate_workflow_net};
use bldd_core::session::BatchReport;
use common::*;
use serde_json::Value;

fn without_binding(pattern: &str) -> tempfile::NamedTempFile {
    let mut manifest: Value = serde_json::from_str(&fixture("payment.bindings.json")).unwrap();
    manifest["bindings"]
        .as_array_mut()
        .unwrap()
        .retain(|b| b["pattern"] != pattern);
    let mut file = tempfile::NamedTempFile::new().unwrap();
    file.write_all(manifest.to_string().as_bytes()).unwrap();
    file
}

#[test]
fn parse_prints_the_ast() {
    let out = bldd(&[fixture_path("budget.feature")]);
    assert_eq!(code(&out), 3, "bare file is not a subcommand");
    let out = bldd(&["parse".as_ref(), fixture_path("budget.feature").as_os_str()]);
    assert_eq!(code(&out), 0);
    let ast: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(ast["name"], "Manage Budget");
    assert_eq!(ast["role"], "Vendor");
    assert_eq!(ast["scenarios"][0]["steps"].as_array().unwrap().len(), 7);
}

#[test]
fn io_and_parse_errors_exit_3() {
    let out = bldd(&["parse", "nosuch.feature"]);
    assert_eq!(code(&out), 3);
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nosuch.feature"));
    let out = bldd(&["gwt2pn".as_ref(), fixture_path("payment.pnml").as_os_str()]);
    assert_eq!(code(&out), 3);
    let out = bldd(&["pn2gwt".as_ref(), fixture_path("budget.feature").as_os_str()]);
    assert_eq!(code(&out), 3);
}

#[test]
fn gen_steps_prints_seven_skeletons() {
    let out = bldd(&["gen-steps".as_ref(), fixture_path("budget.feature").as_os_str()]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.matches("@step(").count(), 7);
    assert!(text.contains("def given_i_go_to_the_new_bid_page(step):"));
}

#[test]
fn pn2gwt_and_gwt2pn() {
    let out = bldd(&[
        "pn2gwt".as_ref(),
        fixture_path("payment.pnml").as_os_str(),
        "--name".as_ref(),
        "Payment".as_ref(),
        "--role".as_ref(),
        "customer".as_ref(),
        "--request".as_ref(),
        "pay for my order".as_ref(),
        "--benefit".as_ref(),
        "receive the goods".as_ref(),
    ]);
    assert_eq!(code(&out), 0);
    let feature = stdout(&out);
    let ast = parse_feature(&feature).unwrap();
    assert_eq!(ast.name, "Payment");
    assert_eq!(ast.role, "customer");
    assert_eq!(ast.scenarios.len(), 2);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("payment.feature");
    std::fs::write(&path, &feature).unwrap();
    let out = bldd(&["gwt2pn".as_ref(), path.as_os_str()]);
    assert_eq!(code(&out), 0);
    let net = parse_pnml(&stdout(&out)).unwrap();
    assert!(validate_workflow_net(&net).is_empty());
    assert_eq!(net.transitions().len(), payment().transitions().len());
}

#[test]
fn pn2gwt_scenario_limit() {
    let out = bldd(&[
        "pn2gwt".as_ref(),
        fixture_path("payment.pnml").as_os_str(),
        "--max-scenarios".as_ref(),
        "1".as_ref(),
    ]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("more than 1 scenarios"));
    let out = bldd(&[
        "pn2gwt".as_ref(),
        fixture_path("review.pnml").as_os_str(),
        "--loop-bound".as_ref(),
        "1".as_ref(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("(truncated)"));
}

fn run_payment(sut: &str, bindings: &std::path::Path, json: bool) -> std::process::Output {
    let mut args = vec![
        "run".into(),
        fixture_path("payment.pnml").into_os_string(),
        "--bindings".into(),
        bindings.as_os_str().to_owned(),
        "--sut".into(),
        fixture_path(sut).into_os_string(),
    ];
    if json {
        args.push("--json".into());
    }
    bldd(&args)
}

#[test]
fn run_exit_codes_follow_the_summary() {
    let bindings = fixture_path("payment.bindings.json");
    let out = run_payment("payment.sut.json", &bindings, true);
    assert_eq!(code(&out), 0);
    let report: BatchReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report.summary.passed, 2);

    let out = run_payment("payment_broken.sut.json", &bindings, false);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("FAILED"), "{text}");
    assert!(text.contains("at t_release"), "{text}");
    assert!(
        text.contains("2 scenarios: 1 passed, 1 failed, 0 pending, 0 ambiguous"),
        "{text}"
    );

    let manifest = without_binding("the inventory should report \"(.+)\"");
    let out = run_payment("payment.sut.json", manifest.path(), true);
    assert_eq!(code(&out), 2);
    let report: BatchReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!((report.summary.failed, report.summary.pending), (0, 1));
}

#[test]
fn run_rejects_bad_manifests() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    file.write_all(b"{\"bindings\": [").unwrap();
    let out = run_payment("payment.sut.json", file.path(), false);
    assert_eq!(code(&out), 3);
    assert!(out.stdout.is_empty());
}

#[test]
fn state_tags() {
    let out = bldd(&[
        "state-tags".as_ref(),
        fixture_path("payment.pnml").as_os_str(),
        "t_confirm".as_ref(),
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("@SourceState('credit card data filled')"), "{text}");
    assert!(
        text.contains("@DestinationState('email pending', 'inventory check pending')"),
        "{text}"
    );
    let out = bldd(&[
        "state-tags".as_ref(),
        fixture_path("payment.pnml").as_os_str(),
        "p_start".as_ref(),
    ]);
    assert_eq!(code(&out), 3);
}

fn write_config(dir: &std::path::Path, listen: &str) -> std::path::PathBuf {
    let path = dir.join("server.toml");
    let fixtures = fixtures_dir().canonicalize().unwrap();
    std::fs::write(
        &path,
        format!(
            "listen = \"{listen}\"\nfixtures_dir = \"{}\"\nmax_sessions = 4\n",
            fixtures.display()
        ),
    )
    .unwrap();
    path
}

#[test]
fn serve_answers_http() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "127.0.0.1:0");
    let mut child = Command::new(env!("CARGO_BIN_EXE_bldd"))
        .args(["serve".as_ref(), "--config".as_ref(), config.as_os_str()])
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stderr.take().unwrap())
        .read_line(&mut line)
        .unwrap();
    let addr = line
        .trim()
        .strip_prefix("listening on http://")
        .expect(&line)
        .to_string();

    let mut stream = TcpStream::connect(&addr).unwrap();
    write!(
        stream,
        "GET /models HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n"
    )
    .unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).unwrap();
    child.kill().unwrap();
    child.wait().unwrap();

    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    let body = &response[response.find("\r\n\r\n").unwrap() + 4..];
    let catalog: Value = serde_json::from_str(body).unwrap();
    assert!(catalog["models"].as_array().unwrap().iter().any(|m| m == "payment"));
}

#[test]
fn serve_startup_errors_exit_3() {
    let out = bldd(&["serve", "--config", "no/such/config.toml"]);
    assert_eq!(code(&out), 3);

    let busy = TcpListener::bind("127.0.0.1:0").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &busy.local_addr().unwrap().to_string());
    let out = bldd(&["serve".as_ref(), "--config".as_ref(), config.as_os_str()]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("server"));
}
