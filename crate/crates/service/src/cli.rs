//! The `bldd` command. Machine output goes to stdout, diagnostics to
//! stderr. Exit codes: 0 success, 1 a step failed, 2 steps pending or
//! ambiguous, 3 usage, IO or parse error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use bldd_core::gwt::{
    generate_state_tag_skeletons, generate_step_skeletons, parse_feature, render_feature, render_step_skeletons,
};
use bldd_core::mapping::{feature_to_pn, pn_to_scenarios, scenarios_to_feature, EnumerationOptions, FeatureMeta};
use bldd_core::petri::{parse_pnml, write_pnml, PetriNet};
use bldd_core::runtime::{load_bindings_manifest, MockFixture, StepStatus};
use bldd_core::session::{mock_factory, run_all_scenarios, BatchReport, BatchSummary};
use clap::{Args, Parser, Subcommand};

use crate::config::ServerConfig;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_PENDING: u8 = 2;
pub const EXIT_ERROR: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "bldd",
    version,
    about = "Drive acceptance tests from workflow Petri nets and Given-When-Then features"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Enumeration {
    /// Times any one transition may fire in a scenario before it is cut.
    #[arg(long, default_value_t = EnumerationOptions::default().loop_bound)]
    loop_bound: usize,
    /// Fail instead of enumerating more scenarios than this.
    #[arg(long, default_value_t = EnumerationOptions::default().max_scenarios)]
    max_scenarios: usize,
}

impl Enumeration {
    fn options(&self) -> EnumerationOptions {
        EnumerationOptions {
            loop_bound: self.loop_bound,
            max_scenarios: self.max_scenarios,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the parsed feature as JSON.
    Parse { feature: PathBuf },
    /// Print step definition skeletons for every distinct step.
    GenSteps { feature: PathBuf },
    /// Print one scenario per path through a workflow net as a feature.
    Pn2gwt {
        net: PathBuf,
        #[command(flatten)]
        enumeration: Enumeration,
        /// Feature name (defaults to the net id).
        #[arg(long)]
        name: Option<String>,
        #[arg(long, default_value = "")]
        role: String,
        #[arg(long, default_value = "")]
        request: String,
        #[arg(long, default_value = "")]
        benefit: String,
    },
    /// Print the workflow net a feature describes, as PNML.
    Gwt2pn { feature: PathBuf },
    /// Run every scenario of a net against a mock application.
    Run {
        net: PathBuf,
        /// Bindings manifest (JSON).
        #[arg(long)]
        bindings: PathBuf,
        /// Mock application fixture (JSON).
        #[arg(long)]
        sut: PathBuf,
        /// Print the full report as JSON.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        enumeration: Enumeration,
    },
    /// Serve the HTTP API.
    Serve {
        /// Server config (TOML).
        #[arg(long)]
        config: PathBuf,
    },
    /// Print state-based tag skeletons for one transition.
    StateTags { net: PathBuf, transition: String },
}

/// A failed command: message for stderr.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

/// Exit code of a batch run, from its summary alone.
pub fn exit_code(summary: &BatchSummary) -> u8 {
    if summary.failed > 0 {
        EXIT_FAILED
    } else if summary.pending > 0 || summary.ambiguous > 0 {
        EXIT_PENDING
    } else {
        EXIT_OK
    }
}

pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(Failure(message)) => {
            eprintln!("error: {message}");
            EXIT_ERROR
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure(format!("cannot read {}: {e}", path.display())))
}

fn read_net(path: &Path) -> Result<PetriNet, Failure> {
    parse_pnml(&read(path)?).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn read_feature(path: &Path) -> Result<bldd_core::gwt::FeatureAst, Failure> {
    parse_feature(&read(path)?).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn execute(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Parse { feature } => {
            let ast = read_feature(&feature)?;
            println!("{}", serde_json::to_string_pretty(&ast)?);
        }
        Command::GenSteps { feature } => {
            let ast = read_feature(&feature)?;
            print!("{}", render_step_skeletons(&generate_step_skeletons(&ast)));
        }
        Command::Pn2gwt {
            net,
            enumeration,
            name,
            role,
            request,
            benefit,
        } => {
            let net = read_net(&net)?;
            let traces = pn_to_scenarios(&net, enumeration.options())?;
            let meta = FeatureMeta {
                name: name.unwrap_or_else(|| net.id().to_string()),
                role,
                request,
                benefit,
            };
            print!("{}", render_feature(&scenarios_to_feature(&traces, &net, &meta)));
        }
        Command::Gwt2pn { feature } => {
            let ast = read_feature(&feature)?;
            print!("{}", write_pnml(&feature_to_pn(&ast)?));
        }
        Command::Run {
            net,
            bindings,
            sut,
            json,
            enumeration,
        } => {
            let net = read_net(&net)?;
            let manifest_name = bindings
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            let (registry, map) = load_bindings_manifest(&read(&bindings)?, &manifest_name)?;
            let fixture =
                MockFixture::from_json(&read(&sut)?).map_err(|e| Failure(format!("{}: {e}", sut.display())))?;
            let report = run_all_scenarios(
                Arc::new(net),
                Arc::new(registry),
                Arc::new(map),
                mock_factory(fixture),
                enumeration.options(),
            )?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", human_report(&report));
            }
            return Ok(exit_code(&report.summary));
        }
        Command::Serve { config } => {
            let config = ServerConfig::load(&config)?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime
                .block_on(crate::server::serve(config))
                .map_err(|e| Failure(format!("server: {e}")))?;
        }
        Command::StateTags { net, transition } => {
            let net = read_net(&net)?;
            print!("{}", generate_state_tag_skeletons(&net, &transition)?);
        }
    }
    Ok(EXIT_OK)
}

fn status_word(status: StepStatus) -> &'static str {
    match status {
        StepStatus::Passed => "PASSED",
        StepStatus::Pending => "PENDING",
        StepStatus::Ambiguous => "AMBIGUOUS",
        StepStatus::Failed => "FAILED",
    }
}

/// One line per scenario, then the steps that did not pass, then totals.
pub fn human_report(report: &BatchReport) -> String {
    let mut out = String::new();
    for scenario in &report.scenarios {
        let _ = writeln!(out, "{:<9} {}", status_word(scenario.status), scenario.name);
        for firing in &scenario.firings {
            for step in firing
                .step_results
                .iter()
                .filter(|s| s.status != StepStatus::Passed && !s.skipped)
            {
                let _ = writeln!(
                    out,
                    "          at {}: {} `{}`: {}",
                    firing.transition,
                    status_word(step.status),
                    step.step_text,
                    step.message
                );
            }
        }
    }
    let s = &report.summary;
    let _ = writeln!(
        out,
        "{} scenarios: {} passed, {} failed, {} pending, {} ambiguous",
        s.total, s.passed, s.failed, s.pending, s.ambiguous
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(passed: usize, failed: usize, pending: usize, ambiguous: usize) -> BatchSummary {
        BatchSummary {
            passed,
            failed,
            pending,
            ambiguous,
            total: passed + failed + pending + ambiguous,
        }
    }

    #[test]
    fn exit_code_table() {
        assert_eq!(exit_code(&summary(3, 0, 0, 0)), 0);
        assert_eq!(exit_code(&summary(0, 0, 0, 0)), 0);
        assert_eq!(exit_code(&summary(1, 1, 1, 1)), 1);
        assert_eq!(exit_code(&summary(1, 0, 1, 0)), 2);
        assert_eq!(exit_code(&summary(1, 0, 0, 1)), 2);
    }

    #[test]
    fn usage_errors_exit_3() {
        assert_eq!(run(["bldd"]), EXIT_ERROR);
        assert_eq!(run(["bldd", "frobnicate"]), EXIT_ERROR);
        assert_eq!(run(["bldd", "run", "x.pnml"]), EXIT_ERROR);
        assert_eq!(run(["bldd", "--help"]), EXIT_OK);
    }
}
