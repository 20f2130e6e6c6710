use serde::{Deserialize, Serialize};

use crate::corpus::Document;

/// Selects documents by kind label and publication-month range
/// (`from_month` inclusive, `to_month` exclusive). Empty filter matches all.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohortFilter {
    pub kind: Option<String>,
    pub from_month: Option<i32>,
    pub to_month: Option<i32>,
}

impl CohortFilter {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn kind(kind: impl Into<String>) -> Self {
        CohortFilter {
            kind: Some(kind.into()),
            ..Self::default()
        }
    }

    pub fn months(from_month: Option<i32>, to_month: Option<i32>) -> Self {
        CohortFilter {
            kind: None,
            from_month,
            to_month,
        }
    }

    pub fn matches(&self, doc: &Document) -> bool {
        if let Some(kind) = &self.kind {
            if doc.kind.as_deref() != Some(kind.as_str()) {
                return false;
            }
        }
        self.from_month.is_none_or(|m| doc.pub_month >= m) && self.to_month.is_none_or(|m| doc.pub_month < m)
    }
}
