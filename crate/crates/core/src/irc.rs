//! Indicator Request Code: HTML snippets that embed indicators in other pages.
//!
//! A snippet is a container element naming the indicator plus a script tag
//! loading `embed.js` from the engine. The script fetches
//! `/api/v1/render/{id}` when the page loads, so embedded charts always show
//! current data.

use alloc::string::String;
use core::fmt::Write;

use serde::Serialize;

use crate::catalog::Catalog;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
#[serde(tag = "error", content = "detail", rename_all = "snake_case")]
pub enum IrcError {
    #[error("unknown embed target {0:?}")]
    UnknownTarget(String),
}

/// What to embed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IrcTarget<'a> {
    Indicator(&'a str),
    Question(&'a str),
}

/// Escapes text for use inside a double-quoted attribute.
pub fn escape_attr(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '"' => out.push_str("&quot;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

fn script_tag(out: &mut String, base_url: &str) {
    let base = base_url.trim_end_matches('/');
    let _ = write!(out, "<script src=\"{}/embed.js\" defer></script>", escape_attr(base));
}

fn container(out: &mut String, indicator_id: &str) {
    let _ = write!(out, "<div data-indicator-id=\"{}\"></div>", escape_attr(indicator_id));
}

/// Snippet for one indicator id, without checking that it exists.
pub fn indicator_snippet(indicator_id: &str, base_url: &str) -> String {
    let mut out = String::new();
    container(&mut out, indicator_id);
    script_tag(&mut out, base_url);
    out
}

/// Dashboard snippet for a question: a wrapper holding one container per
/// indicator, followed by a single shared script tag.
pub fn question_snippet<'a>(
    question_id: &str,
    indicator_ids: impl IntoIterator<Item = &'a str>,
    base_url: &str,
) -> String {
    let mut out = String::new();
    let _ = write!(out, "<div data-question-id=\"{}\">", escape_attr(question_id));
    for id in indicator_ids {
        container(&mut out, id);
    }
    out.push_str("</div>");
    script_tag(&mut out, base_url);
    out
}

/// Snippet for a target that must exist in `catalog`.
pub fn generate_irc(catalog: &Catalog, target: IrcTarget<'_>, base_url: &str) -> Result<String, IrcError> {
    match target {
        IrcTarget::Indicator(id) => catalog
            .indicator(id)
            .map(|r| indicator_snippet(&r.indicator_id, base_url))
            .ok_or_else(|| IrcError::UnknownTarget(id.into())),
        IrcTarget::Question(id) => catalog
            .question(id)
            .map(|q| question_snippet(&q.question_id, q.indicators.iter().map(String::as_str), base_url))
            .ok_or_else(|| IrcError::UnknownTarget(id.into())),
    }
}
