//! Hierarchical logical trees: span-aligned refinement of an instruction into
//! subformulas, with composition back to a single flat formula.
//!
//! A tree node carries a formula label and one or more byte spans into the
//! instruction text. Refinement edges form a rooted tree; lateral relations
//! link siblings ("same abstraction level") and record how they combine.
//! Composition follows the strict discipline where every internal node's
//! label is an operator shell over its children's labels; trees that only
//! satisfy the weaker subformula relation validate with a warning but do not
//! compose.

mod expand;
mod io;

pub use expand::{
    expand_frontier, frontier, AlignmentChecker, AlwaysAccept, ChildProposal, EmptyProposer,
    ExpandError, ExpandOutcome, GatewayChecker, ProposalGroup, Proposer, ReplayProposer,
};
pub use io::{hlt_from_json, hlt_to_json, HltIoError};

use std::collections::{BTreeMap, BTreeSet};

use crate::formula::{subformulas, validate_formula, Formula, ValidationIssue};

pub type NodeId = u32;

/// Byte range `(start, end)`, half-open, into the instruction text.
pub type Span = (usize, usize);

/// One tree node: a subformula label with its text evidence.
#[derive(Debug, Clone, PartialEq)]
pub struct HltNode {
    pub id: NodeId,
    pub label: Formula,
    pub spans: Vec<Span>,
    /// Depth from the root (root is level 0).
    pub level: usize,
}

/// How two sibling nodes relate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LateralKind {
    BoolAnd,
    BoolOr,
    TemporalBefore,
    TemporalAfter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LateralRelation {
    pub a: NodeId,
    pub b: NodeId,
    pub kind: LateralKind,
}

/// A rooted refinement tree over an instruction.
#[derive(Debug, Clone, PartialEq)]
pub struct Hlt {
    pub instruction: String,
    pub nodes: Vec<HltNode>,
    /// Parent -> child pairs; insertion order fixes each node's child order.
    pub edges: Vec<(NodeId, NodeId)>,
    pub laterals: Vec<LateralRelation>,
    pub root: NodeId,
}

impl Hlt {
    /// A tree containing only a root node covering the whole instruction.
    pub fn root_only(instruction: impl Into<String>, label: Formula) -> Self {
        let instruction = instruction.into();
        let span = (0, instruction.len());
        Hlt {
            instruction,
            nodes: vec![HltNode {
                id: 0,
                label,
                spans: vec![span],
                level: 0,
            }],
            edges: Vec::new(),
            laterals: Vec::new(),
            root: 0,
        }
    }

    pub fn node(&self, id: NodeId) -> Option<&HltNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn children(&self, id: NodeId) -> Vec<NodeId> {
        self.edges
            .iter()
            .filter(|(p, _)| *p == id)
            .map(|(_, c)| *c)
            .collect()
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.edges.iter().find(|(_, c)| *c == id).map(|(p, _)| *p)
    }

    /// The instruction text a node is responsible for; multiple spans join
    /// with a single space.
    pub fn span_text(&self, node: &HltNode) -> String {
        node.spans
            .iter()
            .filter_map(|(s, e)| self.instruction.get(*s..*e))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn next_id(&self) -> NodeId {
        self.nodes.iter().map(|n| n.id + 1).max().unwrap_or(0)
    }

    /// Child-index path from the root to `id`.
    pub fn path_of(&self, id: NodeId) -> Option<Vec<usize>> {
        let mut path = Vec::new();
        let mut cursor = id;
        while cursor != self.root {
            let parent = self.parent(cursor)?;
            let idx = self.children(parent).iter().position(|c| *c == cursor)?;
            path.push(idx);
            cursor = parent;
        }
        path.reverse();
        Some(path)
    }

    /// Resolves a child-index path from the root.
    pub fn node_at_path(&self, path: &[usize]) -> Option<NodeId> {
        let mut cursor = self.root;
        for &idx in path {
            cursor = *self.children(cursor).get(idx)?;
        }
        Some(cursor)
    }
}

/// Verdict of a semantic alignment check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckVerdict {
    pub accept: bool,
    /// Non-empty whenever `accept` is false.
    pub reason: String,
}

impl CheckVerdict {
    pub fn accepted(reason: impl Into<String>) -> Self {
        CheckVerdict {
            accept: true,
            reason: reason.into(),
        }
    }

    pub fn rejected(reason: impl Into<String>) -> Self {
        let reason = reason.into();
        debug_assert!(!reason.is_empty(), "rejections must carry a reason");
        CheckVerdict { accept: false, reason }
    }
}

/// A defect found by [`validate_hlt`].
#[derive(Debug, Clone, PartialEq)]
pub enum HltIssue {
    DuplicateNodeId(NodeId),
    UnknownNodeRef(NodeId),
    NotATree(String),
    InvalidLabel { node: NodeId, issue: ValidationIssue },
    EmptySpans { node: NodeId },
    SpanOutOfBounds { node: NodeId, span: Span },
    LevelMismatch { node: NodeId, expected: usize, found: usize },
    NonSiblingLateral { a: NodeId, b: NodeId },
    MixedLateralTypes { parent: NodeId },
    /// Child label is not even a subformula of its parent's label.
    LabelNotSubformula { parent: NodeId, child: NodeId },
    /// Children are subformulas of the parent label but do not assemble it
    /// exactly; accepted with this warning, rejected by composition.
    LooseRefinement { parent: NodeId },
}

impl std::fmt::Display for HltIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HltIssue::DuplicateNodeId(id) => write!(f, "duplicate node id {id}"),
            HltIssue::UnknownNodeRef(id) => write!(f, "reference to unknown node {id}"),
            HltIssue::NotATree(why) => write!(f, "refinement edges are not a rooted tree: {why}"),
            HltIssue::InvalidLabel { node, issue } => write!(f, "node {node} label: {issue}"),
            HltIssue::EmptySpans { node } => write!(f, "node {node} has no text spans"),
            HltIssue::SpanOutOfBounds { node, span } => {
                write!(f, "node {node} span {span:?} outside the instruction")
            }
            HltIssue::LevelMismatch { node, expected, found } => {
                write!(f, "node {node} level {found}, parent implies {expected}")
            }
            HltIssue::NonSiblingLateral { a, b } => {
                write!(f, "lateral relation {a}-{b} links nodes with different parents")
            }
            HltIssue::MixedLateralTypes { parent } => {
                write!(f, "children of {parent} mix bool_and and bool_or laterals")
            }
            HltIssue::LabelNotSubformula { parent, child } => {
                write!(f, "label of {child} is not a subformula of its parent {parent}")
            }
            HltIssue::LooseRefinement { parent } => {
                write!(f, "children of {parent} do not assemble its label exactly")
            }
        }
    }
}

/// Validation outcome: hard errors plus advisory warnings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HltReport {
    pub errors: Vec<HltIssue>,
    pub warnings: Vec<HltIssue>,
}

impl HltReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Checks the rooted-tree property, label validity, span bounds, sibling-only
/// laterals, and label consistency along refinement edges.
pub fn validate_hlt(h: &Hlt) -> HltReport {
    let mut report = HltReport::default();

    let mut ids = BTreeSet::new();
    for node in &h.nodes {
        if !ids.insert(node.id) {
            report.errors.push(HltIssue::DuplicateNodeId(node.id));
        }
    }
    if !ids.contains(&h.root) {
        report.errors.push(HltIssue::UnknownNodeRef(h.root));
    }
    for (p, c) in &h.edges {
        for id in [p, c] {
            if !ids.contains(id) {
                report.errors.push(HltIssue::UnknownNodeRef(*id));
            }
        }
    }
    for lat in &h.laterals {
        for id in [lat.a, lat.b] {
            if !ids.contains(&id) {
                report.errors.push(HltIssue::UnknownNodeRef(id));
            }
        }
    }
    if !report.errors.is_empty() {
        return report;
    }

    // rooted tree: unique parents, no cycles, everything reachable from root
    let mut parent_count: BTreeMap<NodeId, usize> = BTreeMap::new();
    for (_, c) in &h.edges {
        *parent_count.entry(*c).or_insert(0) += 1;
    }
    if let Some((id, n)) = parent_count.iter().find(|(_, n)| **n > 1) {
        report
            .errors
            .push(HltIssue::NotATree(format!("node {id} has {n} parents")));
    }
    if parent_count.contains_key(&h.root) {
        report
            .errors
            .push(HltIssue::NotATree(format!("root {} has a parent", h.root)));
    }
    let mut reachable = BTreeSet::new();
    let mut stack = vec![h.root];
    while let Some(v) = stack.pop() {
        if reachable.insert(v) {
            stack.extend(h.children(v));
        }
    }
    if reachable.len() != h.nodes.len() {
        let orphans: Vec<NodeId> = ids.difference(&reachable).copied().collect();
        report.errors.push(HltIssue::NotATree(format!(
            "nodes {orphans:?} are not reachable from the root"
        )));
    }
    if !report.errors.is_empty() {
        return report;
    }

    for node in &h.nodes {
        for issue in validate_formula(&node.label) {
            report.errors.push(HltIssue::InvalidLabel { node: node.id, issue });
        }
        if node.spans.is_empty() {
            report.errors.push(HltIssue::EmptySpans { node: node.id });
        }
        for &(s, e) in &node.spans {
            let in_bounds = s < e
                && e <= h.instruction.len()
                && h.instruction.is_char_boundary(s)
                && h.instruction.is_char_boundary(e);
            if !in_bounds {
                report.errors.push(HltIssue::SpanOutOfBounds {
                    node: node.id,
                    span: (s, e),
                });
            }
        }
        let expected = match h.parent(node.id) {
            Some(p) => h.node(p).map(|n| n.level + 1).unwrap_or(0),
            None => 0,
        };
        if node.level != expected {
            report.errors.push(HltIssue::LevelMismatch {
                node: node.id,
                expected,
                found: node.level,
            });
        }
    }

    for lat in &h.laterals {
        if h.parent(lat.a) != h.parent(lat.b) || h.parent(lat.a).is_none() {
            report.errors.push(HltIssue::NonSiblingLateral { a: lat.a, b: lat.b });
        }
    }
    for node in &h.nodes {
        let children = h.children(node.id);
        if sibling_lateral_kinds(h, &children)
            .iter()
            .filter(|k| matches!(k, LateralKind::BoolAnd | LateralKind::BoolOr))
            .collect::<BTreeSet<_>>()
            .len()
            > 1
        {
            report.errors.push(HltIssue::MixedLateralTypes { parent: node.id });
        }
    }

    // label consistency along refinement edges
    for node in &h.nodes {
        let children = h.children(node.id);
        if children.is_empty() {
            continue;
        }
        let child_labels: Vec<&Formula> = children
            .iter()
            .map(|c| &h.node(*c).expect("checked above").label)
            .collect();
        for (child_id, label) in children.iter().zip(&child_labels) {
            let is_sub = subformulas(&node.label).iter().any(|(_, sub)| sub == label);
            if !is_sub {
                report.errors.push(HltIssue::LabelNotSubformula {
                    parent: node.id,
                    child: *child_id,
                });
            }
        }
        if rebuild_from_shell(&node.label, &child_labels, None).is_none() {
            report.warnings.push(HltIssue::LooseRefinement { parent: node.id });
        }
    }

    report
}

fn sibling_lateral_kinds(h: &Hlt, children: &[NodeId]) -> Vec<LateralKind> {
    h.laterals
        .iter()
        .filter(|lat| children.contains(&lat.a) && children.contains(&lat.b))
        .map(|lat| lat.kind)
        .collect()
}

#[derive(Debug, thiserror::Error)]
pub enum HltError {
    #[error("tree is invalid: {0:?}")]
    Invalid(Vec<HltIssue>),
    #[error("labels of node {node} and its children are inconsistent: the children do not assemble the parent label")]
    InconsistentLabels { node: NodeId },
    #[error("children of {parent} mix bool_and and bool_or laterals")]
    MixedLateralTypes { parent: NodeId },
    #[error("lateral relation {kind:?} among children of {parent} has no matching operator in the parent label")]
    LateralShellMismatch { parent: NodeId, kind: LateralKind },
    #[error("leaf {node} is not an atom under local unary operators")]
    NonAtomicLeaf { node: NodeId },
}

/// Composes the tree bottom-up into a single flat formula.
///
/// Each internal node must be the operator shell of its children: walking its
/// label left to right, the children's labels must appear in order and cover
/// every atom. Sibling lateral relations are cross-checked against the shell
/// (`bool_and` needs a conjunction, `bool_or` a disjunction, temporal ordering
/// an until). On a label-consistent tree the result equals the root label.
pub fn compose_hlt(h: &Hlt) -> Result<Formula, HltError> {
    let report = validate_hlt(h);
    if !report.is_ok() {
        return Err(HltError::Invalid(report.errors));
    }
    compose_node(h, h.root)
}

fn compose_node(h: &Hlt, id: NodeId) -> Result<Formula, HltError> {
    let node = h.node(id).expect("validated");
    let children = h.children(id);
    if children.is_empty() {
        if !is_atom_under_unary(&node.label) {
            return Err(HltError::NonAtomicLeaf { node: id });
        }
        return Ok(node.label.clone());
    }

    let kinds = sibling_lateral_kinds(h, &children);
    let has = |k: LateralKind| kinds.contains(&k);
    if has(LateralKind::BoolAnd) && has(LateralKind::BoolOr) {
        return Err(HltError::MixedLateralTypes { parent: id });
    }

    let child_labels: Vec<&Formula> = children
        .iter()
        .map(|c| &h.node(*c).expect("validated").label)
        .collect();
    let mut composed = Vec::with_capacity(children.len());
    for c in &children {
        composed.push(compose_node(h, *c)?);
    }

    let mut shell_ops = Vec::new();
    let result = rebuild_from_shell(&node.label, &child_labels, Some((&composed, &mut shell_ops)))
        .ok_or(HltError::InconsistentLabels { node: id })?;

    for kind in kinds {
        let satisfied = match kind {
            LateralKind::BoolAnd => shell_ops.contains(&ShellOp::And),
            LateralKind::BoolOr => shell_ops.contains(&ShellOp::Or),
            LateralKind::TemporalBefore | LateralKind::TemporalAfter => {
                shell_ops.contains(&ShellOp::Until)
            }
        };
        if !satisfied {
            return Err(HltError::LateralShellMismatch { parent: id, kind });
        }
    }

    Ok(result)
}

fn is_atom_under_unary(f: &Formula) -> bool {
    match f {
        Formula::Atom(_) => true,
        Formula::Not(g) | Formula::Always(_, g) | Formula::Eventually(_, g) => {
            is_atom_under_unary(g)
        }
        _ => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ShellOp {
    Not,
    And,
    Or,
    Implies,
    Always,
    Eventually,
    Until,
}

/// Matches `label` against the ordered child labels: children must occur left
/// to right at matching subtrees and no atom may remain in the shell. When
/// `fill` is given, the matched slots are replaced by the composed children
/// and the shell's operators are recorded; otherwise this is a pure
/// consistency probe.
fn rebuild_from_shell(
    label: &Formula,
    children: &[&Formula],
    fill: Option<(&[Formula], &mut Vec<ShellOp>)>,
) -> Option<Formula> {
    struct State<'a> {
        children: &'a [&'a Formula],
        composed: Option<&'a [Formula]>,
        next: usize,
    }

    fn go(node: &Formula, st: &mut State, ops: &mut Vec<ShellOp>) -> Option<Formula> {
        if st.next < st.children.len() && node == st.children[st.next] {
            let idx = st.next;
            st.next += 1;
            return Some(match st.composed {
                Some(composed) => composed[idx].clone(),
                None => node.clone(),
            });
        }
        match node {
            Formula::Atom(_) => None,
            Formula::Not(g) => {
                ops.push(ShellOp::Not);
                Some(Formula::not(go(g, st, ops)?))
            }
            Formula::And(gs) => {
                ops.push(ShellOp::And);
                let rebuilt: Option<Vec<Formula>> = gs.iter().map(|g| go(g, st, ops)).collect();
                Some(Formula::And(rebuilt?))
            }
            Formula::Or(gs) => {
                ops.push(ShellOp::Or);
                let rebuilt: Option<Vec<Formula>> = gs.iter().map(|g| go(g, st, ops)).collect();
                Some(Formula::Or(rebuilt?))
            }
            Formula::Implies(l, r) => {
                ops.push(ShellOp::Implies);
                Some(Formula::implies(go(l, st, ops)?, go(r, st, ops)?))
            }
            Formula::Always(iv, g) => {
                ops.push(ShellOp::Always);
                Some(Formula::always(*iv, go(g, st, ops)?))
            }
            Formula::Eventually(iv, g) => {
                ops.push(ShellOp::Eventually);
                Some(Formula::eventually(*iv, go(g, st, ops)?))
            }
            Formula::Until(iv, l, r) => {
                ops.push(ShellOp::Until);
                Some(Formula::until(*iv, go(l, st, ops)?, go(r, st, ops)?))
            }
        }
    }

    let (composed, ops) = match fill {
        Some((composed, ops)) => (Some(composed), Some(ops)),
        None => (None, None),
    };
    let mut scratch_ops = Vec::new();
    let ops = match ops {
        Some(ops) => ops,
        None => &mut scratch_ops,
    };
    let mut st = State {
        children,
        composed,
        next: 0,
    };
    let rebuilt = go(label, &mut st, ops)?;
    (st.next == children.len()).then_some(rebuilt)
}

/// The canonical full-refinement tree of a formula: one node per subformula,
/// children in structural order, spans all covering the whole instruction.
pub fn canonical_hlt(instruction: impl Into<String>, f: &Formula) -> Hlt {
    let instruction = instruction.into();
    let span = (0, instruction.len());
    let mut h = Hlt {
        instruction,
        nodes: Vec::new(),
        edges: Vec::new(),
        laterals: Vec::new(),
        root: 0,
    };
    fn add(h: &mut Hlt, f: &Formula, parent: Option<NodeId>, level: usize, span: Span) {
        let id = h.next_id();
        h.nodes.push(HltNode {
            id,
            label: f.clone(),
            spans: vec![span],
            level,
        });
        if let Some(p) = parent {
            h.edges.push((p, id));
        }
        for child in f.children() {
            add(h, child, Some(id), level + 1, span);
        }
    }
    add(&mut h, f, None, 0, span);
    h
}
