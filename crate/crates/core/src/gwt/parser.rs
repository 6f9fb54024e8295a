use super::{FeatureAst, GwtError, Keyword, Scenario, Step};

const STEP_KEYWORDS: [Keyword; 4] = [Keyword::Given, Keyword::When, Keyword::Then, Keyword::And];

#[derive(Clone, Copy)]
enum HeaderField {
    Role,
    Request,
    Benefit,
}

// Longer phrases first so "As an" wins over "As a".
const HEADER_PHRASES: [(&str, HeaderField); 6] = [
    ("In order to", HeaderField::Benefit),
    ("To gain", HeaderField::Benefit),
    ("As an", HeaderField::Role),
    ("As a", HeaderField::Role),
    ("I want to", HeaderField::Request),
    ("I request", HeaderField::Request),
];

/// Returns the remainder when `line` starts with `word` followed by
/// whitespace or end of line.
fn strip_word<'a>(line: &'a str, word: &str) -> Option<&'a str> {
    let rest = line.strip_prefix(word)?;
    if rest.is_empty() || rest.starts_with(char::is_whitespace) {
        Some(rest.trim())
    } else {
        None
    }
}

struct OpenScenario {
    line: usize,
    scenario: Scenario,
    last_keyword: Option<Keyword>,
}

/// Parses a feature file. Keywords are case-sensitive and must start the
/// line (after indentation); blank lines and `#` comments are skipped.
pub fn parse_feature(text: &str) -> Result<FeatureAst, GwtError> {
    let mut feature: Option<FeatureAst> = None;
    let mut header_fields: [Option<String>; 3] = [None, None, None];
    let mut scenarios: Vec<Scenario> = Vec::new();
    let mut current: Option<OpenScenario> = None;

    let close = |open: OpenScenario, scenarios: &mut Vec<Scenario>| -> Result<(), GwtError> {
        if open.scenario.steps.is_empty() {
            return Err(GwtError::EmptyScenario {
                line: open.line,
                name: open.scenario.name,
            });
        }
        scenarios.push(open.scenario);
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }

        if let Some(rest) = line.strip_prefix("Feature:") {
            if feature.is_some() {
                return Err(GwtError::DuplicateFeature { line: line_no });
            }
            let name = rest.trim();
            if name.is_empty() {
                return Err(GwtError::EmptyFeatureName { line: line_no });
            }
            feature = Some(FeatureAst::new(name));
            continue;
        }

        if let Some(keyword) = STEP_KEYWORDS
            .iter()
            .copied()
            .find(|k| strip_word(line, k.as_str()).is_some())
        {
            let step_text = strip_word(line, keyword.as_str()).unwrap_or_default();
            let Some(open) = current.as_mut() else {
                return Err(GwtError::StepOutsideScenario { line: line_no });
            };
            if step_text.is_empty() {
                return Err(GwtError::EmptyStep { line: line_no, keyword });
            }
            let resolved = match (keyword, open.last_keyword) {
                (Keyword::And, Some(previous)) => previous,
                (Keyword::And | Keyword::Then, None) => {
                    return Err(GwtError::BadOpeningStep { line: line_no, keyword });
                }
                (k, _) => k,
            };
            open.last_keyword = Some(resolved);
            open.scenario.steps.push(Step::new(keyword, resolved, step_text));
            continue;
        }

        if feature.is_none() {
            return Err(GwtError::ContentBeforeFeature { line: line_no });
        }

        if let Some(rest) = line.strip_prefix("Scenario:") {
            if let Some(open) = current.take() {
                close(open, &mut scenarios)?;
            }
            current = Some(OpenScenario {
                line: line_no,
                scenario: Scenario {
                    name: rest.trim().to_string(),
                    steps: Vec::new(),
                },
                last_keyword: None,
            });
            continue;
        }

        if current.is_none() && scenarios.is_empty() {
            if let Some((phrase, field, value)) = HEADER_PHRASES
                .iter()
                .find_map(|(p, f)| strip_word(line, p).map(|v| (*p, *f, v)))
            {
                let slot = &mut header_fields[field as usize];
                if slot.is_some() {
                    return Err(GwtError::DuplicateHeaderLine {
                        line: line_no,
                        phrase: phrase.to_string(),
                    });
                }
                *slot = Some(value.to_string());
                continue;
            }
        }

        return Err(GwtError::UnknownLine {
            line: line_no,
            text: line.to_string(),
        });
    }

    let mut feature = feature.ok_or(GwtError::NoFeatureHeader)?;
    if let Some(open) = current.take() {
        close(open, &mut scenarios)?;
    }

    if header_fields.iter().any(Option::is_some) {
        let names = ["role (As a)", "request (I want to)", "benefit (In order to)"];
        let missing: Vec<&str> = header_fields
            .iter()
            .zip(names)
            .filter(|(v, _)| v.as_deref().is_none_or(str::is_empty))
            .map(|(_, n)| n)
            .collect();
        if !missing.is_empty() {
            return Err(GwtError::IncompleteHeader {
                missing: missing.join(", "),
            });
        }
        let [role, request, benefit] = header_fields.map(Option::unwrap_or_default);
        feature.role = role;
        feature.request = request;
        feature.benefit = benefit;
        feature.header_present = true;
    }
    feature.scenarios = scenarios;
    Ok(feature)
}
