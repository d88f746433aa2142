use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::epa::EmotionLabel;
use crate::impression::ExpectedSigns;

use super::{StoryError, STORY_SCHEMA_VERSION};

/// Every root-to-terminal path crosses exactly this many decisions.
pub const DECISIONS_PER_PATH: usize = 4;
pub const OPTIONS_PER_DECISION: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiceOption {
    pub id: String,
    pub text: String,
    pub expected: ExpectedSigns,
    pub expected_emotion: EmotionLabel,
    pub next: NodeId,
}

/// Signs applied automatically when the story enters a node, without a
/// user choice. Used for scripted failures and detours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForcedOutcome {
    pub expected: ExpectedSigns,
    pub expected_emotion: EmotionLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Decision {
        prompt: String,
        options: [ChoiceOption; OPTIONS_PER_DECISION],
    },
    Linear {
        next: NodeId,
        forced: Option<ForcedOutcome>,
    },
    Terminal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub narration: Vec<String>,
    pub kind: NodeKind,
}

impl Node {
    pub fn forced(&self) -> Option<&ForcedOutcome> {
        match &self.kind {
            NodeKind::Linear { forced, .. } => forced.as_ref(),
            _ => None,
        }
    }

    pub fn options(&self) -> Option<&[ChoiceOption; OPTIONS_PER_DECISION]> {
        match &self.kind {
            NodeKind::Decision { options, .. } => Some(options),
            _ => None,
        }
    }

    fn successors(&self) -> Vec<&NodeId> {
        match &self.kind {
            NodeKind::Decision { options, .. } => options.iter().map(|o| &o.next).collect(),
            NodeKind::Linear { next, .. } => vec![next],
            NodeKind::Terminal => vec![],
        }
    }
}

/// Validated, immutable branching story.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StoryDocument", into = "StoryDocument")]
pub struct StoryGraph {
    pub id: String,
    pub title: String,
    pub start: NodeId,
    nodes: BTreeMap<NodeId, Node>,
}

impl StoryGraph {
    pub fn node(&self, id: &NodeId) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    pub(crate) fn expect_node(&self, id: &NodeId) -> Result<&Node, StoryError> {
        self.node(id)
            .ok_or_else(|| StoryError::UnknownNode(id.clone()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ViolationKind {
    Schema,
    DuplicateNode,
    DanglingNode,
    OptionArity,
    EmptyNarration,
    InvalidAnnotation,
    Unreachable,
    Cycle,
    DecisionCount,
}

impl ViolationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ViolationKind::Schema => "schema",
            ViolationKind::DuplicateNode => "duplicate-node",
            ViolationKind::DanglingNode => "dangling-node",
            ViolationKind::OptionArity => "option-arity",
            ViolationKind::EmptyNarration => "empty-narration",
            ViolationKind::InvalidAnnotation => "invalid-annotation",
            ViolationKind::Unreachable => "unreachable",
            ViolationKind::Cycle => "cycle",
            ViolationKind::DecisionCount => "decision-count",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct StoryViolation {
    pub kind: ViolationKind,
    pub node: Option<NodeId>,
    pub message: String,
}

impl fmt::Display for StoryViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            Some(node) => write!(
                f,
                "{}: node `{}`: {}",
                self.kind.as_str(),
                node,
                self.message
            ),
            None => write!(f, "{}: {}", self.kind.as_str(), self.message),
        }
    }
}

// ---- on-disk document -------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoryDocument {
    pub schema: u32,
    pub id: String,
    pub title: String,
    pub start: NodeId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub nodes: Vec<NodeDocument>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDocument {
    pub id: NodeId,
    #[serde(default)]
    pub narration: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<Vec<ChoiceOption>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub next: Option<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forced: Option<ForcedOutcome>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub terminal: bool,
}

impl From<StoryGraph> for StoryDocument {
    fn from(g: StoryGraph) -> Self {
        let nodes = g
            .nodes
            .into_values()
            .map(|n| {
                let mut doc = NodeDocument {
                    id: n.id,
                    narration: n.narration,
                    prompt: None,
                    options: None,
                    next: None,
                    forced: None,
                    terminal: false,
                };
                match n.kind {
                    NodeKind::Decision { prompt, options } => {
                        doc.prompt = Some(prompt);
                        doc.options = Some(options.into());
                    }
                    NodeKind::Linear { next, forced } => {
                        doc.next = Some(next);
                        doc.forced = forced;
                    }
                    NodeKind::Terminal => doc.terminal = true,
                }
                doc
            })
            .collect();
        StoryDocument {
            schema: STORY_SCHEMA_VERSION,
            id: g.id,
            title: g.title,
            start: g.start,
            note: None,
            nodes,
        }
    }
}

impl TryFrom<StoryDocument> for StoryGraph {
    type Error = StoryError;

    fn try_from(doc: StoryDocument) -> Result<Self, Self::Error> {
        build(doc).map_err(StoryError::Invalid)
    }
}

fn violation(
    kind: ViolationKind,
    node: Option<&NodeId>,
    message: impl Into<String>,
) -> StoryViolation {
    StoryViolation {
        kind,
        node: node.cloned(),
        message: message.into(),
    }
}

fn build_node(doc: NodeDocument, out: &mut Vec<StoryViolation>) -> Option<Node> {
    let id = doc.id;
    let shapes = [doc.options.is_some(), doc.next.is_some(), doc.terminal]
        .iter()
        .filter(|b| **b)
        .count();
    if shapes != 1 {
        out.push(violation(
            ViolationKind::Schema,
            Some(&id),
            "node must have exactly one of `options`, `next` or `terminal = true`",
        ));
        return None;
    }
    if doc.prompt.is_some() && doc.options.is_none() {
        out.push(violation(
            ViolationKind::Schema,
            Some(&id),
            "`prompt` is only valid on decision nodes",
        ));
    }
    if doc.forced.is_some() && doc.next.is_none() {
        out.push(violation(
            ViolationKind::Schema,
            Some(&id),
            "`forced` is only valid on linear nodes",
        ));
    }
    let kind = if let Some(options) = doc.options {
        let count = options.len();
        let options: [ChoiceOption; OPTIONS_PER_DECISION] = match options.try_into() {
            Ok(o) => o,
            Err(_) => {
                out.push(violation(
                    ViolationKind::OptionArity,
                    Some(&id),
                    format!("decision has {count} options, expected {OPTIONS_PER_DECISION}"),
                ));
                return None;
            }
        };
        if options[0].id == options[1].id {
            out.push(violation(
                ViolationKind::Schema,
                Some(&id),
                format!("duplicate option id `{}`", options[0].id),
            ));
        }
        for o in &options {
            if o.expected_emotion == EmotionLabel::Neutral {
                out.push(violation(
                    ViolationKind::InvalidAnnotation,
                    Some(&id),
                    format!("option `{}` is annotated Neutral", o.id),
                ));
            }
        }
        NodeKind::Decision {
            prompt: doc.prompt.unwrap_or_default(),
            options,
        }
    } else if let Some(next) = doc.next {
        if let Some(f) = &doc.forced {
            if f.expected_emotion == EmotionLabel::Neutral {
                out.push(violation(
                    ViolationKind::InvalidAnnotation,
                    Some(&id),
                    "forced outcome is annotated Neutral",
                ));
            }
        }
        NodeKind::Linear {
            next,
            forced: doc.forced,
        }
    } else {
        NodeKind::Terminal
    };
    if doc.narration.is_empty() && !matches!(kind, NodeKind::Terminal) {
        out.push(violation(
            ViolationKind::EmptyNarration,
            Some(&id),
            "narration must not be empty",
        ));
    }
    Some(Node {
        id,
        narration: doc.narration,
        kind,
    })
}

fn build(doc: StoryDocument) -> Result<StoryGraph, Vec<StoryViolation>> {
    let mut violations = Vec::new();
    if doc.schema != STORY_SCHEMA_VERSION {
        violations.push(violation(
            ViolationKind::Schema,
            None,
            format!(
                "unsupported schema version {} (expected {STORY_SCHEMA_VERSION})",
                doc.schema
            ),
        ));
        return Err(violations);
    }

    let mut nodes = BTreeMap::new();
    for raw in doc.nodes {
        let id = raw.id.clone();
        if nodes.contains_key(&id) {
            violations.push(violation(
                ViolationKind::DuplicateNode,
                Some(&id),
                "node id defined twice",
            ));
            continue;
        }
        if let Some(node) = build_node(raw, &mut violations) {
            nodes.insert(id, node);
        }
    }

    if !nodes.contains_key(&doc.start) {
        violations.push(violation(
            ViolationKind::DanglingNode,
            Some(&doc.start),
            "start node does not exist",
        ));
    }
    for node in nodes.values() {
        for succ in node.successors() {
            if !nodes.contains_key(succ) {
                violations.push(violation(
                    ViolationKind::DanglingNode,
                    Some(&node.id),
                    format!("points at missing node `{succ}`"),
                ));
            }
        }
    }

    let graph = StoryGraph {
        id: doc.id,
        title: doc.title,
        start: doc.start,
        nodes,
    };
    if violations.is_empty() {
        check_structure(&graph, &mut violations);
    }
    if violations.is_empty() {
        Ok(graph)
    } else {
        violations.sort();
        violations.dedup();
        Err(violations)
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Visit {
    InProgress,
    Done,
}

/// Reachability, acyclicity and the per-path decision count. Assumes every
/// referenced node exists.
fn check_structure(graph: &StoryGraph, out: &mut Vec<StoryViolation>) {
    // iterative DFS with an explicit stack: (node, successor index)
    let mut state: BTreeMap<&NodeId, Visit> = BTreeMap::new();
    // possible decision counts from each node to a terminal
    let mut counts: BTreeMap<&NodeId, BTreeSet<usize>> = BTreeMap::new();
    let mut stack: Vec<(&NodeId, usize)> = vec![(&graph.start, 0)];
    state.insert(&graph.start, Visit::InProgress);
    let mut cyclic = false;

    while let Some((id, idx)) = stack.pop() {
        let node = &graph.nodes[id];
        let succ = node.successors();
        if idx < succ.len() {
            stack.push((id, idx + 1));
            let next = succ[idx];
            match state.get(next) {
                None => {
                    state.insert(next, Visit::InProgress);
                    stack.push((next, 0));
                }
                Some(Visit::InProgress) => {
                    cyclic = true;
                    out.push(violation(
                        ViolationKind::Cycle,
                        Some(id),
                        format!("edge to `{next}` closes a cycle"),
                    ));
                }
                Some(Visit::Done) => {}
            }
            continue;
        }
        state.insert(id, Visit::Done);
        let own = usize::from(matches!(node.kind, NodeKind::Decision { .. }));
        let set = if succ.is_empty() {
            BTreeSet::from([0])
        } else {
            succ.iter()
                .filter_map(|s| counts.get(s))
                .flatten()
                .map(|c| c + own)
                .collect()
        };
        counts.insert(id, set);
    }

    for node in graph.nodes.values() {
        if !state.contains_key(&node.id) {
            out.push(violation(
                ViolationKind::Unreachable,
                Some(&node.id),
                "not reachable from start",
            ));
        }
    }
    if cyclic {
        return;
    }
    if let Some(set) = counts.get(&graph.start) {
        for &c in set.iter().filter(|&&c| c != DECISIONS_PER_PATH) {
            out.push(violation(
                ViolationKind::DecisionCount,
                None,
                format!(
                    "a complete path crosses {c} decision points, expected {DECISIONS_PER_PATH}"
                ),
            ));
        }
    }
}
