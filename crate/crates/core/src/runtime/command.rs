use std::io::Read;
use std::process::{Command, Stdio};
use std::thread;
use std::time::Duration;

use wait_timeout::ChildExt;

use super::CommandSpec;

/// Runs a command step. Returns `Err` with the failure explanation.
pub(crate) fn run_command(spec: &CommandSpec, args: &[String]) -> Result<(), String> {
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(&spec.line)
        .arg("bldd-step")
        .args(args)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| format!("could not start `{}`: {e}", spec.line))?;

    // Drain both pipes while waiting so a chatty child cannot block.
    let drain = |pipe: Option<Box<dyn Read + Send>>| {
        thread::spawn(move || {
            let mut buf = Vec::new();
            if let Some(mut pipe) = pipe {
                let _ = pipe.read_to_end(&mut buf);
            }
            String::from_utf8_lossy(&buf).into_owned()
        })
    };
    let stdout = drain(child.stdout.take().map(|p| Box::new(p) as Box<dyn Read + Send>));
    let stderr = drain(child.stderr.take().map(|p| Box::new(p) as Box<dyn Read + Send>));

    let status = match child
        .wait_timeout(Duration::from_millis(spec.timeout_ms))
        .map_err(|e| e.to_string())?
    {
        Some(status) => status,
        None => {
            let _ = child.kill();
            let _ = child.wait();
            return Err(format!("`{}` timed out after {} ms", spec.line, spec.timeout_ms));
        }
    };
    let out = stdout.join().unwrap_or_default();
    let err = stderr.join().unwrap_or_default();

    let code = status.code();
    if code != Some(spec.exit_code) {
        let shown = code.map_or("a signal".to_string(), |c| format!("exit code {c}"));
        return Err(format!(
            "`{}` ended with {shown}, expected exit code {}{}",
            spec.line,
            spec.exit_code,
            tail(&err, &out)
        ));
    }
    if let Some(expected) = &spec.expect_output {
        if !out.contains(expected.as_str()) && !err.contains(expected.as_str()) {
            return Err(format!(
                "`{}` output does not contain \"{expected}\"{}",
                spec.line,
                tail(&err, &out)
            ));
        }
    }
    Ok(())
}

fn tail(err: &str, out: &str) -> String {
    let text = if err.trim().is_empty() { out } else { err };
    let text = text.trim();
    if text.is_empty() {
        return String::new();
    }
    let start = text.char_indices().rev().nth(199).map_or(0, |(i, _)| i);
    format!(": {}", &text[start..])
}
