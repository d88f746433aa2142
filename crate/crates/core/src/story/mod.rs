//! Branching collaborative stories.
//!
//! A story is a DAG of narration nodes. Decision nodes offer exactly two
//! options, each annotated with the impression direction it implies and the
//! emotion it is meant to elicit. Linear nodes may carry a forced outcome that
//! is applied without user input. Story files are TOML; see
//! `stories/README.md` for the schema.

mod graph;
mod paths;

use std::path::Path;

use thiserror::Error;

pub use graph::{
    ChoiceOption, ForcedOutcome, Node, NodeDocument, NodeId, NodeKind, StoryDocument, StoryGraph,
    StoryViolation, ViolationKind, DECISIONS_PER_PATH, OPTIONS_PER_DECISION,
};
pub use paths::{
    analyze_coverage, enumerate_paths, CoverageIssue, CoverageReport, PathStep, StoryPath,
};

use crate::impression::ExpectedSigns;

pub const STORY_SCHEMA_VERSION: u32 = 1;

const DETECTIVE: &str = include_str!("../../stories/detective.toml");
const WIZARD: &str = include_str!("../../stories/wizard.toml");

#[derive(Debug, Error)]
pub enum StoryError {
    #[error("story not found: {0}")]
    NotFound(String),
    #[error("cannot read story file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("story document does not parse: {0}")]
    Parse(String),
    #[error("story has {} violation(s):\n{}", .0.len(), render_violations(.0))]
    Invalid(Vec<StoryViolation>),
    #[error("unknown node `{0}`")]
    UnknownNode(NodeId),
    #[error("node `{node}` has no option `{option}`")]
    UnknownOption { node: NodeId, option: String },
    #[error("node `{0}` is a decision point and needs a choice")]
    ChoiceRequired(NodeId),
    #[error("node `{0}` is not a decision point")]
    NotADecision(NodeId),
}

fn render_violations(v: &[StoryViolation]) -> String {
    v.iter()
        .map(|v| format!("  {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl StoryError {
    pub fn violations(&self) -> &[StoryViolation] {
        match self {
            StoryError::Invalid(v) => v,
            _ => &[],
        }
    }
}

/// Parse and validate a story document.
pub fn load_story(document: &str) -> Result<StoryGraph, StoryError> {
    let doc: StoryDocument =
        toml::from_str(document).map_err(|e| StoryError::Parse(e.to_string()))?;
    StoryGraph::try_from(doc)
}

pub fn load_story_file(path: impl AsRef<Path>) -> Result<StoryGraph, StoryError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| match source.kind() {
        std::io::ErrorKind::NotFound => StoryError::NotFound(path.display().to_string()),
        _ => StoryError::Io {
            path: path.display().to_string(),
            source,
        },
    })?;
    load_story(&text)
}

/// Ids of the stories compiled into the crate.
pub const BUILTIN_STORIES: [&str; 2] = ["detective", "wizard"];

pub fn builtin_source(id: &str) -> Option<&'static str> {
    match id {
        "detective" => Some(DETECTIVE),
        "wizard" => Some(WIZARD),
        _ => None,
    }
}

pub fn builtin(id: &str) -> Result<StoryGraph, StoryError> {
    let src = builtin_source(id).ok_or_else(|| StoryError::NotFound(id.to_string()))?;
    load_story(src)
}

/// Outcome of one [`advance`] step.
#[derive(Debug, Clone, PartialEq)]
pub struct Advance {
    /// Narration of the node being left.
    pub narration: Vec<String>,
    pub next: Option<NodeId>,
    /// Signs of the chosen option; `None` for non-decision nodes.
    pub expected: Option<ExpectedSigns>,
    /// Forced outcome of the successor, applied on entering it.
    pub forced_on_entry: Option<ForcedOutcome>,
    pub finished: bool,
}

/// Move past `cursor`. A choice must be given exactly when the cursor is a
/// decision node. Errors leave nothing changed (the graph is immutable).
pub fn advance(
    graph: &StoryGraph,
    cursor: &NodeId,
    choice: Option<&str>,
) -> Result<Advance, StoryError> {
    let node = graph.expect_node(cursor)?;
    let (next, expected) = match (&node.kind, choice) {
        (NodeKind::Decision { options, .. }, Some(choice)) => {
            let option = options.iter().find(|o| o.id == choice).ok_or_else(|| {
                StoryError::UnknownOption {
                    node: cursor.clone(),
                    option: choice.to_string(),
                }
            })?;
            (Some(option.next.clone()), Some(option.expected))
        }
        (NodeKind::Decision { .. }, None) => {
            return Err(StoryError::ChoiceRequired(cursor.clone()))
        }
        (_, Some(_)) => return Err(StoryError::NotADecision(cursor.clone())),
        (NodeKind::Linear { next, .. }, None) => (Some(next.clone()), None),
        (NodeKind::Terminal, None) => (None, None),
    };
    let forced_on_entry = match &next {
        Some(id) => graph.expect_node(id)?.forced().cloned(),
        None => None,
    };
    Ok(Advance {
        narration: node.narration.clone(),
        finished: next.is_none(),
        next,
        expected,
        forced_on_entry,
    })
}
