use std::fmt::Write as _;

use super::FeatureAst;

/// Canonical feature text: header lines and scenarios indented two spaces,
/// steps four. Parsing the output yields the same AST.
pub fn render_feature(ast: &FeatureAst) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Feature: {}", ast.name);
    if ast.header_present {
        let _ = writeln!(out, "  In order to {}", ast.benefit);
        let _ = writeln!(out, "  As a {}", ast.role);
        let _ = writeln!(out, "  I want to {}", ast.request);
    }
    for scenario in &ast.scenarios {
        out.push('\n');
        let _ = writeln!(out, "  Scenario: {}", scenario.name);
        for step in &scenario.steps {
            let _ = writeln!(out, "    {} {}", step.keyword, step.text);
        }
    }
    out
}
