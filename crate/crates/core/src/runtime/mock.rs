use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{SutAdapter, SutError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ButtonSpec {
    /// Page shown after pressing; the current page when absent.
    #[serde(default)]
    pub goto: Option<String>,
    /// Texts shown in addition to the destination page's own texts.
    #[serde(default)]
    pub show: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PageSpec {
    #[serde(default)]
    pub fields: Vec<String>,
    #[serde(default)]
    pub buttons: BTreeMap<String, ButtonSpec>,
    #[serde(default)]
    pub texts: Vec<String>,
}

/// Scripted pages of a mock application.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockFixture {
    pub start_page: String,
    pub pages: BTreeMap<String, PageSpec>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FixtureError {
    #[error("invalid fixture JSON: {0}")]
    Json(String),
    #[error("start page `{0}` is not defined")]
    UnknownStartPage(String),
    #[error("button `{button}` on page `{page}` goes to undefined page `{target}`")]
    UnknownTarget {
        page: String,
        button: String,
        target: String,
    },
}

impl MockFixture {
    pub fn from_json(text: &str) -> Result<Self, FixtureError> {
        let fixture: MockFixture = serde_json::from_str(text).map_err(|e| FixtureError::Json(e.to_string()))?;
        if !fixture.pages.contains_key(&fixture.start_page) {
            return Err(FixtureError::UnknownStartPage(fixture.start_page));
        }
        for (page, spec) in &fixture.pages {
            for (button, b) in &spec.buttons {
                if let Some(target) = &b.goto {
                    if !fixture.pages.contains_key(target) {
                        return Err(FixtureError::UnknownTarget {
                            page: page.clone(),
                            button: button.clone(),
                            target: target.clone(),
                        });
                    }
                }
            }
        }
        Ok(fixture)
    }
}

/// In-memory application driven by a [`MockFixture`].
#[derive(Debug, Clone)]
pub struct MockApp {
    fixture: Arc<MockFixture>,
    page: String,
    texts: Vec<String>,
    values: BTreeMap<(String, String), String>,
}

impl MockApp {
    pub fn new(fixture: Arc<MockFixture>) -> Self {
        let page = fixture.start_page.clone();
        let texts = fixture.pages[&page].texts.clone();
        Self {
            fixture,
            page,
            texts,
            values: BTreeMap::new(),
        }
    }

    /// Value last filled into `field` on `page`.
    pub fn field_value(&self, page: &str, field: &str) -> Option<&str> {
        self.values
            .get(&(page.to_string(), field.to_string()))
            .map(String::as_str)
    }

    fn current(&self) -> &PageSpec {
        &self.fixture.pages[&self.page]
    }
}

impl SutAdapter for MockApp {
    fn visit(&mut self, page: &str) -> Result<(), SutError> {
        let spec = self
            .fixture
            .pages
            .get(page)
            .ok_or_else(|| SutError(format!("no page named `{page}`")))?;
        self.texts = spec.texts.clone();
        self.page = page.to_string();
        Ok(())
    }

    fn fill(&mut self, field: &str, value: &str) -> Result<(), SutError> {
        if !self.current().fields.iter().any(|f| f == field) {
            return Err(SutError(format!("page `{}` has no field `{field}`", self.page)));
        }
        self.values
            .insert((self.page.clone(), field.to_string()), value.to_string());
        Ok(())
    }

    fn press(&mut self, button: &str) -> Result<String, SutError> {
        let spec = self
            .current()
            .buttons
            .get(button)
            .cloned()
            .ok_or_else(|| SutError(format!("page `{}` has no button `{button}`", self.page)))?;
        let target = spec.goto.unwrap_or_else(|| self.page.clone());
        let mut texts = self.fixture.pages[&target].texts.clone();
        texts.extend(spec.show);
        self.page = target;
        self.texts = texts;
        Ok(self.page.clone())
    }

    fn current_page(&self) -> String {
        self.page.clone()
    }

    fn visible_texts(&self) -> Vec<String> {
        self.texts.clone()
    }
}
