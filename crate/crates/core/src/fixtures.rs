//! Shipped reference objects: the three-clause block-sorting task as a flat
//! formula, as a fully refined tree with span alignments, and small
//! trajectories for monitoring and rollout-selection demos.
//!
//! The same objects live as files under `fixtures/` for use from the CLI;
//! `tests/pipeline.rs` keeps the files and these builders in sync.

use crate::formula::{Formula, Ident, Interval, SpatialAtom};
use crate::hlt::{Hlt, HltNode, LateralKind, LateralRelation, NodeId};
use crate::render::{render_all_nodes, RenderOptions, SymbolicDefaults};
use crate::scene::{DiskObject, SceneState, Trajectory};

fn ident(name: &str) -> Ident {
    Ident::new(name).expect("fixture identifiers are valid")
}

/// Instruction text of the block-sorting task.
pub const BLOCK_SORTING_INSTRUCTION: &str = "Within 20 seconds, put the red block inside the \
sorting zone and keep it above the blue block. Keep the red block far from the blue block until \
the red block touches the green block. After 10 seconds, make sure the red block is not close to \
the blue block.";

/// The root sentence of [`three_clause_tree`] in symbolic-constants mode.
pub const THREE_CLAUSE_ROOT_SYMBOLIC: &str = "Sometime within [0,20], ( obj_r lies strictly \
inside reg_s and obj_r is strictly above obj_b (margin κ) ) holds, and throughout [0,20], \
( within [0,20], obj_r is in contact with obj_g; until then, the distance between obj_r and \
obj_b is at least ε_f ) holds, and sometime within [10,20], ( it is not the case that the \
distance between obj_r and obj_b is at most ε_c ) holds.";

fn consts() -> SymbolicDefaults {
    SymbolicDefaults::default()
}

fn encl_in_atom() -> Formula {
    Formula::Atom(SpatialAtom::EnclIn {
        i: ident("obj_r"),
        j: ident("reg_s"),
        rho: consts().rho,
    })
}

fn above_atom() -> Formula {
    Formula::Atom(SpatialAtom::Above {
        i: ident("obj_r"),
        j: ident("obj_b"),
        kappa: consts().kappa,
    })
}

fn far_from_atom() -> Formula {
    Formula::Atom(SpatialAtom::FarFrom {
        i: ident("obj_r"),
        j: ident("obj_b"),
        eps_f: consts().eps_f,
    })
}

fn touch_atom() -> Formula {
    Formula::Atom(SpatialAtom::Touch {
        i: ident("obj_r"),
        j: ident("obj_g"),
        eps: consts().eps,
    })
}

fn close_to_atom() -> Formula {
    Formula::Atom(SpatialAtom::CloseTo {
        i: ident("obj_r"),
        j: ident("obj_b"),
        eps_c: consts().eps_c,
    })
}

/// Goal clause: eventually within 20 steps, the red block sits inside the
/// sorting zone and above the blue block.
pub fn goal_clause() -> Formula {
    Formula::eventually(
        Interval::new(0, 20).unwrap(),
        Formula::And(vec![encl_in_atom(), above_atom()]),
    )
}

/// Maintenance clause: keep far from blue until touching green, maintained
/// over the whole horizon.
pub fn maintenance_clause() -> Formula {
    Formula::always(
        Interval::new(0, 20).unwrap(),
        Formula::until(Interval::new(0, 20).unwrap(), far_from_atom(), touch_atom()),
    )
}

/// Delayed clause: sometime after step 10, not close to the blue block.
pub fn delayed_clause() -> Formula {
    Formula::eventually(Interval::new(10, 20).unwrap(), Formula::not(close_to_atom()))
}

/// The flat three-clause specification of the block-sorting task: depth 4,
/// breadth 3, five atom leaves.
pub fn three_clause_tree() -> Formula {
    Formula::And(vec![goal_clause(), maintenance_clause(), delayed_clause()])
}

fn span_of(text: &str, needle: &str) -> (usize, usize) {
    let start = text
        .find(needle)
        .unwrap_or_else(|| panic!("fixture instruction must contain `{needle}`"));
    (start, start + needle.len())
}

/// The reference tree for the block-sorting instruction: root, three clause
/// nodes, three operator refinements, five atom leaves, with lateral
/// conjunction among the clauses and temporal ordering inside the until.
pub fn block_sorting_hlt() -> Hlt {
    let text = BLOCK_SORTING_INSTRUCTION;
    let node = |id: NodeId, label: Formula, span: (usize, usize), level: usize| HltNode {
        id,
        label,
        spans: vec![span],
        level,
    };

    let sentence_1 = span_of(
        text,
        "Within 20 seconds, put the red block inside the sorting zone and keep it above the blue block.",
    );
    let sentence_2 = span_of(
        text,
        "Keep the red block far from the blue block until the red block touches the green block.",
    );
    let sentence_3 = span_of(
        text,
        "After 10 seconds, make sure the red block is not close to the blue block.",
    );

    let nodes = vec![
        node(0, three_clause_tree(), (0, text.len()), 0),
        node(1, goal_clause(), sentence_1, 1),
        node(2, maintenance_clause(), sentence_2, 1),
        node(3, delayed_clause(), sentence_3, 1),
        node(
            4,
            Formula::And(vec![encl_in_atom(), above_atom()]),
            span_of(text, "put the red block inside the sorting zone and keep it above the blue block"),
            2,
        ),
        node(
            5,
            Formula::until(Interval::new(0, 20).unwrap(), far_from_atom(), touch_atom()),
            span_of(text, "far from the blue block until the red block touches the green block"),
            2,
        ),
        node(
            6,
            Formula::not(close_to_atom()),
            span_of(text, "not close to the blue block"),
            2,
        ),
        node(7, encl_in_atom(), span_of(text, "inside the sorting zone"), 3),
        node(8, above_atom(), span_of(text, "above the blue block"), 3),
        node(9, far_from_atom(), span_of(text, "far from the blue block"), 3),
        node(10, touch_atom(), span_of(text, "touches the green block"), 3),
        node(11, close_to_atom(), span_of(text, "close to the blue block"), 3),
    ];

    Hlt {
        instruction: text.to_string(),
        nodes,
        edges: vec![
            (0, 1),
            (0, 2),
            (0, 3),
            (1, 4),
            (2, 5),
            (3, 6),
            (4, 7),
            (4, 8),
            (5, 9),
            (5, 10),
            (6, 11),
        ],
        laterals: vec![
            LateralRelation { a: 1, b: 2, kind: LateralKind::BoolAnd },
            LateralRelation { a: 2, b: 3, kind: LateralKind::BoolAnd },
            LateralRelation { a: 7, b: 8, kind: LateralKind::BoolAnd },
            LateralRelation { a: 9, b: 10, kind: LateralKind::TemporalBefore },
        ],
        root: 0,
    }
}

/// A tree shaped like [`block_sorting_hlt`] whose instruction is the
/// concatenation of every node's canonical rendering, so the offline
/// alignment checker accepts each node from its span alone. One leaf's span
/// is redirected to the rendering of the same relation with its arguments
/// swapped; that node (returned as the second value) must be rejected.
pub fn canonical_span_hlt_with_mismatch() -> (Hlt, NodeId) {
    let formula = three_clause_tree();
    let rendered = render_all_nodes(&formula, &RenderOptions::default());

    let mut instruction = String::new();
    let mut spans = Vec::new();
    for (_, _, canonical) in &rendered {
        if !instruction.is_empty() {
            instruction.push(' ');
        }
        let start = instruction.len();
        instruction.push_str(&canonical.text);
        spans.push((start, instruction.len()));
    }
    let swapped = Formula::Atom(SpatialAtom::Above {
        i: ident("obj_b"),
        j: ident("obj_r"),
        kappa: consts().kappa,
    });
    instruction.push(' ');
    let swapped_start = instruction.len();
    instruction.push_str(&crate::render::render_canonical(&swapped).text);
    let swapped_span = (swapped_start, instruction.len());

    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    // rendered[] is in pre-order; rebuild the tree shape from the paths
    let mut path_to_id = std::collections::HashMap::new();
    for (idx, (path, node_formula, _)) in rendered.iter().enumerate() {
        let id = idx as NodeId;
        path_to_id.insert(path.clone(), id);
        nodes.push(HltNode {
            id,
            label: node_formula.clone(),
            spans: vec![spans[idx]],
            level: path.len(),
        });
        if !path.is_empty() {
            let parent = path_to_id[&path[..path.len() - 1].to_vec()];
            edges.push((parent, id));
        }
    }

    // tamper the `above` leaf (path [0, 0, 1])
    let tampered = path_to_id[&vec![0usize, 0, 1]];
    nodes
        .iter_mut()
        .find(|n| n.id == tampered)
        .expect("tampered node exists")
        .spans = vec![swapped_span];

    (
        Hlt {
            instruction,
            nodes,
            edges,
            laterals: Vec::new(),
            root: 0,
        },
        tampered,
    )
}

/// Two unit disks in exact contact (signed clearance zero), three frames.
pub fn touching_pair_trajectory() -> Trajectory {
    let mut state = SceneState::new();
    state.insert(DiskObject::new(ident("obj_1"), 0.0, 0.0, 1.0));
    state.insert(DiskObject::new(ident("obj_2"), 2.0, 0.0, 1.0));
    Trajectory::new(vec![state.clone(), state.clone(), state], 1.0).unwrap()
}

/// A constant-distance candidate for the rollout fixtures.
fn constant_distance_candidate(distance: f64, frames: usize) -> Trajectory {
    let mut state = SceneState::new();
    state.insert(DiskObject::new(ident("obj_1"), 0.0, 0.0, 0.5));
    state.insert(DiskObject::new(ident("obj_2"), distance, 0.0, 0.5));
    Trajectory::new(vec![state; frames], 1.0).unwrap()
}

/// The specification scored by the rollout fixtures.
pub fn approach_spec() -> Formula {
    Formula::Atom(SpatialAtom::CloseTo {
        i: ident("obj_1"),
        j: ident("obj_2"),
        eps_c: 2.0,
    })
}

/// Three candidates at distances 2.5, 1.8, and 0.7, giving overall
/// robustness -0.5, 0.2, and 1.3 against [`approach_spec`].
pub fn approach_candidates() -> Vec<Trajectory> {
    [2.5, 1.8, 0.7]
        .into_iter()
        .map(|d| constant_distance_candidate(d, 3))
        .collect()
}

/// Two byte-identical candidates; selection must break the tie downward.
pub fn tie_candidates() -> Vec<Trajectory> {
    vec![
        constant_distance_candidate(1.0, 3),
        constant_distance_candidate(1.0, 3),
    ]
}
