//! Top-down tree construction: a proposer suggests child nodes for frontier
//! nodes, a checker filters them, and only accepted nodes enter the tree.

use super::{CheckVerdict, Hlt, HltNode, LateralKind, LateralRelation, NodeId};
use crate::formula::Formula;
use crate::gateway::{AlignmentRequest, LanguageBackend};

enum ChildCandidateGate {
    Passed,
    Rejected(String),
}

/// A candidate child node for one frontier node.
#[derive(Debug, Clone, PartialEq)]
pub struct ChildProposal {
    pub label: Formula,
    pub spans: Vec<(usize, usize)>,
}

/// All candidates proposed for one frontier node in one round, with lateral
/// relations between them given as indices into `children`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProposalGroup {
    pub children: Vec<ChildProposal>,
    pub laterals: Vec<(usize, usize, LateralKind)>,
}

/// Source of child candidates. `None` means the proposer has nothing to offer
/// for that node.
pub trait Proposer {
    fn propose(&mut self, hlt: &Hlt, frontier: NodeId) -> Result<Option<ProposalGroup>, String>;
}

/// Judges whether a candidate's formula is supported by its text span.
pub trait AlignmentChecker {
    fn check_alignment(&self, span_text: &str, label: &Formula) -> Result<CheckVerdict, String>;
}

/// Accepts every candidate; used when replaying trusted trees.
#[derive(Debug, Clone, Copy, Default)]
pub struct AlwaysAccept;

impl AlignmentChecker for AlwaysAccept {
    fn check_alignment(&self, _span_text: &str, _label: &Formula) -> Result<CheckVerdict, String> {
        Ok(CheckVerdict::accepted("unconditional accept"))
    }
}

/// Routes alignment checks through a gateway backend (mock or remote).
pub struct GatewayChecker<'a> {
    pub backend: &'a dyn LanguageBackend,
}

impl AlignmentChecker for GatewayChecker<'_> {
    fn check_alignment(&self, span_text: &str, label: &Formula) -> Result<CheckVerdict, String> {
        let req = AlignmentRequest {
            span_text: span_text.to_string(),
            formula: crate::formula::serialize_formula(label),
        };
        self.backend.check(&req).map_err(|e| e.to_string())
    }
}

/// Replays the children of a reference tree: a frontier node at some path
/// receives exactly the reference node's children at the same path.
#[derive(Debug, Clone)]
pub struct ReplayProposer {
    gold: Hlt,
}

impl ReplayProposer {
    pub fn new(gold: Hlt) -> Self {
        ReplayProposer { gold }
    }
}

impl Proposer for ReplayProposer {
    fn propose(&mut self, hlt: &Hlt, frontier: NodeId) -> Result<Option<ProposalGroup>, String> {
        let path = hlt
            .path_of(frontier)
            .ok_or_else(|| format!("frontier node {frontier} is not in the tree"))?;
        let Some(gold_id) = self.gold.node_at_path(&path) else {
            return Ok(None);
        };
        let kids = self.gold.children(gold_id);
        if kids.is_empty() {
            return Ok(None);
        }
        let children: Vec<ChildProposal> = kids
            .iter()
            .map(|c| {
                let node = self.gold.node(*c).expect("gold tree is consistent");
                ChildProposal {
                    label: node.label.clone(),
                    spans: node.spans.clone(),
                }
            })
            .collect();
        let laterals = self
            .gold
            .laterals
            .iter()
            .filter_map(|lat| {
                let i = kids.iter().position(|k| *k == lat.a)?;
                let j = kids.iter().position(|k| *k == lat.b)?;
                Some((i, j, lat.kind))
            })
            .collect();
        Ok(Some(ProposalGroup { children, laterals }))
    }
}

/// A proposer with nothing to say; expansion under it exhausts its budget.
#[derive(Debug, Clone, Copy, Default)]
pub struct EmptyProposer;

impl Proposer for EmptyProposer {
    fn propose(&mut self, _hlt: &Hlt, _frontier: NodeId) -> Result<Option<ProposalGroup>, String> {
        Ok(None)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExpandError {
    #[error("proposal budget exhausted with {} unexpanded frontier nodes", partial_frontier_len(partial))]
    BudgetExhausted { partial: Box<Hlt> },
    #[error("proposer failure: {0}")]
    Proposer(String),
    #[error("checker failure: {0}")]
    Checker(String),
}

fn partial_frontier_len(h: &Hlt) -> usize {
    frontier(h).len()
}

/// Result of a completed expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandOutcome {
    pub hlt: Hlt,
    /// Breadth-first rounds that added at least one request.
    pub rounds: usize,
    /// Total proposal requests charged against the budget.
    pub proposals_used: usize,
    /// Rejected candidates as (parent, reason) pairs.
    pub rejections: Vec<(NodeId, String)>,
}

/// Leaf nodes whose labels still contain structure to refine.
pub fn frontier(h: &Hlt) -> Vec<NodeId> {
    let mut ids: Vec<NodeId> = h
        .nodes
        .iter()
        .filter(|n| h.children(n.id).is_empty() && !n.label.is_atom())
        .map(|n| n.id)
        .collect();
    ids.sort_unstable();
    ids
}

/// Expands the tree breadth-first, one frontier layer per round, until every
/// leaf is atomic or the proposal budget runs out.
///
/// Each frontier node costs one budget unit per round. Every candidate passes
/// three gates before joining the tree: its label must be a valid formula and
/// a subformula of the parent label, its spans must fall inside the
/// instruction, and the checker must accept the span/label pairing. Rejected
/// candidates are recorded; accepted ones are never removed, so the returned
/// tree always validates.
pub fn expand_frontier(
    h: &Hlt,
    proposer: &mut dyn Proposer,
    checker: &dyn AlignmentChecker,
    budget: usize,
) -> Result<ExpandOutcome, ExpandError> {
    let mut h = h.clone();
    let mut budget = budget;
    let mut rounds = 0;
    let mut proposals_used = 0;
    let mut rejections = Vec::new();

    loop {
        let frontier_ids = frontier(&h);
        if frontier_ids.is_empty() {
            return Ok(ExpandOutcome {
                hlt: h,
                rounds,
                proposals_used,
                rejections,
            });
        }
        rounds += 1;
        let mut progressed = false;

        for parent_id in frontier_ids {
            if budget == 0 {
                return Err(ExpandError::BudgetExhausted { partial: Box::new(h) });
            }
            budget -= 1;
            proposals_used += 1;

            let group = proposer
                .propose(&h, parent_id)
                .map_err(ExpandError::Proposer)?;
            let Some(group) = group else { continue };

            let parent_level = h.node(parent_id).expect("frontier is in the tree").level;
            let mut accepted: Vec<Option<NodeId>> = vec![None; group.children.len()];
            for (idx, candidate) in group.children.iter().enumerate() {
                match gate_candidate(&h, parent_id, candidate) {
                    ChildCandidateGate::Rejected(reason) => {
                        rejections.push((parent_id, reason));
                        continue;
                    }
                    ChildCandidateGate::Passed => {}
                }
                let span_text = join_spans(&h.instruction, &candidate.spans);
                let verdict = checker
                    .check_alignment(&span_text, &candidate.label)
                    .map_err(ExpandError::Checker)?;
                if !verdict.accept {
                    rejections.push((parent_id, verdict.reason));
                    continue;
                }
                let id = h.next_id();
                h.nodes.push(HltNode {
                    id,
                    label: candidate.label.clone(),
                    spans: candidate.spans.clone(),
                    level: parent_level + 1,
                });
                h.edges.push((parent_id, id));
                accepted[idx] = Some(id);
                progressed = true;
            }
            for (i, j, kind) in &group.laterals {
                if let (Some(Some(a)), Some(Some(b))) = (accepted.get(*i), accepted.get(*j)) {
                    h.laterals.push(LateralRelation {
                        a: *a,
                        b: *b,
                        kind: *kind,
                    });
                }
            }
        }

        debug_assert!(super::validate_hlt(&h).is_ok());
        if !progressed {
            // a full round without additions cannot converge; report the
            // partial tree rather than burning the remaining budget
            return Err(ExpandError::BudgetExhausted { partial: Box::new(h) });
        }
    }
}

fn join_spans(instruction: &str, spans: &[(usize, usize)]) -> String {
    spans
        .iter()
        .filter_map(|(s, e)| instruction.get(*s..*e))
        .collect::<Vec<_>>()
        .join(" ")
}

fn gate_candidate(h: &Hlt, parent: NodeId, candidate: &ChildProposal) -> ChildCandidateGate {
    let issues = crate::formula::validate_formula(&candidate.label);
    if !issues.is_empty() {
        return ChildCandidateGate::Rejected(format!("invalid candidate label: {}", issues[0]));
    }
    if candidate.spans.is_empty() {
        return ChildCandidateGate::Rejected("candidate has no spans".into());
    }
    for &(s, e) in &candidate.spans {
        let ok = s < e
            && e <= h.instruction.len()
            && h.instruction.is_char_boundary(s)
            && h.instruction.is_char_boundary(e);
        if !ok {
            return ChildCandidateGate::Rejected(format!("span ({s}, {e}) out of bounds"));
        }
    }
    let parent_label = &h.node(parent).expect("frontier is in the tree").label;
    let is_sub = crate::formula::subformulas(parent_label)
        .iter()
        .any(|(_, sub)| *sub == &candidate.label);
    if !is_sub {
        return ChildCandidateGate::Rejected(format!(
            "candidate label `{}` is not a subformula of its parent",
            candidate.label
        ));
    }
    ChildCandidateGate::Passed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::gateway::MockBackend;
    use crate::hlt::validate_hlt;
    use crate::render::render_canonical;

    #[test]
    fn replay_reconstructs_the_gold_tree_in_three_rounds() {
        let gold = fixtures::block_sorting_hlt();
        let root = Hlt::root_only(gold.instruction.clone(), gold.node(gold.root).unwrap().label.clone());
        let mut proposer = ReplayProposer::new(gold.clone());
        let outcome = expand_frontier(&root, &mut proposer, &AlwaysAccept, 100).unwrap();
        assert_eq!(outcome.rounds, 3);
        assert!(outcome.rejections.is_empty());
        assert_eq!(outcome.hlt.nodes.len(), gold.nodes.len());
        assert_eq!(crate::hlt::compose_hlt(&outcome.hlt).unwrap(), fixtures::three_clause_tree());
        // replay preserves labels, spans, and laterals node-for-node
        for node in &gold.nodes {
            let path = gold.path_of(node.id).unwrap();
            let rebuilt = outcome.hlt.node_at_path(&path).unwrap();
            let rebuilt = outcome.hlt.node(rebuilt).unwrap();
            assert_eq!(rebuilt.label, node.label);
            assert_eq!(rebuilt.spans, node.spans);
        }
        assert_eq!(outcome.hlt.laterals.len(), gold.laterals.len());
    }

    #[test]
    fn empty_proposer_exhausts_with_root_only_tree() {
        let gold = fixtures::block_sorting_hlt();
        let root = Hlt::root_only(gold.instruction.clone(), gold.node(gold.root).unwrap().label.clone());
        let err = expand_frontier(&root, &mut EmptyProposer, &AlwaysAccept, 10).unwrap_err();
        match err {
            ExpandError::BudgetExhausted { partial } => {
                assert_eq!(partial.nodes.len(), 1);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn zero_budget_exhausts_immediately() {
        let gold = fixtures::block_sorting_hlt();
        let root = Hlt::root_only(gold.instruction.clone(), gold.node(gold.root).unwrap().label.clone());
        let mut proposer = ReplayProposer::new(gold);
        let err = expand_frontier(&root, &mut proposer, &AlwaysAccept, 0).unwrap_err();
        assert!(matches!(err, ExpandError::BudgetExhausted { .. }));
    }

    #[test]
    fn mock_checker_rejects_the_mismatched_candidate_and_keeps_siblings() {
        // Instruction made of canonical node renders, with one span deliberately
        // pointing at the rendering of a different formula (object ids swapped).
        let (gold, tampered_node) = fixtures::canonical_span_hlt_with_mismatch();
        let root = Hlt::root_only(gold.instruction.clone(), gold.node(gold.root).unwrap().label.clone());
        let mut proposer = ReplayProposer::new(gold.clone());
        let backend = MockBackend;
        let checker = GatewayChecker { backend: &backend };
        let outcome = expand_frontier(&root, &mut proposer, &checker, 100).unwrap();

        assert_eq!(outcome.hlt.nodes.len(), gold.nodes.len() - 1);
        assert_eq!(outcome.rejections.len(), 1);
        let report = validate_hlt(&outcome.hlt);
        assert!(report.is_ok(), "{:?}", report.errors);
        // the tampered node is absent, its sibling survived
        let tampered_label = &gold.node(tampered_node).unwrap().label;
        assert!(!outcome.hlt.nodes.iter().any(|n| &n.label == tampered_label
            && render_canonical(&n.label).text != outcome.hlt.span_text(n)));
    }

    #[test]
    fn candidates_outside_the_parent_label_never_enter() {
        let gold = fixtures::block_sorting_hlt();
        let root = Hlt::root_only(gold.instruction.clone(), gold.node(gold.root).unwrap().label.clone());

        struct Wild;
        impl Proposer for Wild {
            fn propose(&mut self, h: &Hlt, frontier: NodeId) -> Result<Option<ProposalGroup>, String> {
                let _ = (h, frontier);
                Ok(Some(ProposalGroup {
                    children: vec![ChildProposal {
                        label: crate::formula::parse_formula("touch(obj_9,obj_8;0.1)").unwrap(),
                        spans: vec![(0, 5)],
                    }],
                    laterals: vec![],
                }))
            }
        }
        let err = expand_frontier(&root, &mut Wild, &AlwaysAccept, 50).unwrap_err();
        match err {
            ExpandError::BudgetExhausted { partial } => assert_eq!(partial.nodes.len(), 1),
            other => panic!("unexpected {other:?}"),
        }
    }
}
