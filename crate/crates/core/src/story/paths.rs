use std::collections::BTreeSet;
use std::fmt;

use crate::epa::EmotionLabel;
use crate::impression::ExpectedSigns;
use crate::pipeline::AffectPipeline;

use super::graph::{NodeId, NodeKind, StoryGraph};

/// One emotionally annotated step on a path: a chosen option or a forced node.
#[derive(Debug, Clone, PartialEq)]
pub struct PathStep {
    pub node: NodeId,
    /// Option id, or `None` for a forced outcome.
    pub option: Option<String>,
    pub expected: ExpectedSigns,
    pub expected_emotion: EmotionLabel,
}

impl PathStep {
    pub fn is_forced(&self) -> bool {
        self.option.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoryPath {
    pub steps: Vec<PathStep>,
    pub terminal: NodeId,
}

impl StoryPath {
    /// Option ids in order, e.g. `[go_on_adventure, ...]`.
    pub fn choices(&self) -> Vec<&str> {
        self.steps
            .iter()
            .filter_map(|s| s.option.as_deref())
            .collect()
    }

    pub fn labels(&self) -> Vec<EmotionLabel> {
        self.steps.iter().map(|s| s.expected_emotion).collect()
    }

    pub fn contains(&self, label: EmotionLabel) -> bool {
        self.steps.iter().any(|s| s.expected_emotion == label)
    }
}

impl fmt::Display for StoryPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .steps
            .iter()
            .map(|s| match &s.option {
                Some(o) => o.clone(),
                None => format!("[{}]", s.node),
            })
            .collect();
        f.write_str(&parts.join(" > "))
    }
}

/// All complete start-to-terminal paths, in option order (first option first).
pub fn enumerate_paths(graph: &StoryGraph) -> Vec<StoryPath> {
    let mut out = Vec::new();
    let mut steps = Vec::new();
    walk(graph, &graph.start, &mut steps, &mut out);
    out
}

fn walk(graph: &StoryGraph, id: &NodeId, steps: &mut Vec<PathStep>, out: &mut Vec<StoryPath>) {
    // validated graphs are acyclic with no dangling edges
    let node = graph.node(id).expect("validated graph");
    match &node.kind {
        NodeKind::Terminal => out.push(StoryPath {
            steps: steps.clone(),
            terminal: id.clone(),
        }),
        NodeKind::Linear { next, forced } => {
            if let Some(f) = forced {
                steps.push(PathStep {
                    node: id.clone(),
                    option: None,
                    expected: f.expected,
                    expected_emotion: f.expected_emotion,
                });
            }
            walk(graph, next, steps, out);
            if forced.is_some() {
                steps.pop();
            }
        }
        NodeKind::Decision { options, .. } => {
            for o in options {
                steps.push(PathStep {
                    node: id.clone(),
                    option: Some(o.id.clone()),
                    expected: o.expected,
                    expected_emotion: o.expected_emotion,
                });
                walk(graph, &o.next, steps, out);
                steps.pop();
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoverageIssue {
    /// A path on which a required emotion never appears.
    MissingOnPath { label: EmotionLabel, path: String },
    /// A basic emotion that no option or forced node elicits.
    MissingInStory(EmotionLabel),
    /// The pipeline labels a step differently from its annotation.
    PipelineMismatch {
        node: NodeId,
        step: String,
        expected: EmotionLabel,
        produced: EmotionLabel,
    },
}

impl fmt::Display for CoverageIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoverageIssue::MissingOnPath { label, path } => {
                write!(f, "{} unreachable on path {path}", label.as_str().to_lowercase())
            }
            CoverageIssue::MissingInStory(label) => {
                write!(f, "{} is never elicited by any option", label.as_str().to_lowercase())
            }
            CoverageIssue::PipelineMismatch {
                node,
                step,
                expected,
                produced,
            } => write!(
                f,
                "pipeline mismatch at `{node}` ({step}): annotated {expected}, pipeline gives {produced}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub paths: Vec<StoryPath>,
    pub labels_seen: BTreeSet<EmotionLabel>,
    pub issues: Vec<CoverageIssue>,
}

impl CoverageReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Emotions every path must show.
pub const REQUIRED_ON_EVERY_PATH: [EmotionLabel; 2] = [EmotionLabel::Anger, EmotionLabel::Fear];

/// Check the emotional guarantees of a story:
/// Anger and Fear on every complete path, all four basic emotions somewhere
/// in the story, and each option / forced node producing its annotated label
/// when applied to the identity-initialized impression.
pub fn analyze_coverage(graph: &StoryGraph, pipeline: &AffectPipeline) -> CoverageReport {
    let paths = enumerate_paths(graph);
    let mut issues = Vec::new();

    for path in &paths {
        for label in REQUIRED_ON_EVERY_PATH {
            if !path.contains(label) {
                issues.push(CoverageIssue::MissingOnPath {
                    label,
                    path: path.to_string(),
                });
            }
        }
    }

    let mut labels_seen = BTreeSet::new();
    for node in graph.nodes() {
        let mut annotated: Vec<(String, ExpectedSigns, EmotionLabel)> = Vec::new();
        if let Some(options) = node.options() {
            annotated.extend(
                options
                    .iter()
                    .map(|o| (format!("option {}", o.id), o.expected, o.expected_emotion)),
            );
        }
        if let Some(f) = node.forced() {
            annotated.push(("forced".to_string(), f.expected, f.expected_emotion));
        }
        for (step, signs, expected) in annotated {
            labels_seen.insert(expected);
            let produced = pipeline
                .label_for_signs(&signs)
                .map(|a| a.labeling.label)
                .unwrap_or(EmotionLabel::Neutral);
            if produced != expected {
                issues.push(CoverageIssue::PipelineMismatch {
                    node: node.id.clone(),
                    step,
                    expected,
                    produced,
                });
            }
        }
    }
    for label in EmotionLabel::BASIC {
        if !labels_seen.contains(&label) {
            issues.push(CoverageIssue::MissingInStory(label));
        }
    }

    CoverageReport {
        paths,
        labels_seen,
        issues,
    }
}
