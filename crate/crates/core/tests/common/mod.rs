//! Shared test support: an independent temporal-expansion oracle, a Boolean
//! evaluator built directly from the defining inequalities of the spatial
//! predicates, and seeded random scenes and trajectories.
//!
//! Nothing here goes through the recursive monitor's temporal path; the
//! oracle reduces a formula to explicit min/max combinations over
//! time-shifted atoms first and only then evaluates.

use nl2spatial::formula::{Formula, Ident, SpatialAtom};
use nl2spatial::monitor::rho_atom;
use nl2spatial::scene::{DiskObject, SceneState, Trajectory};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A formula expanded at a fixed evaluation time: every temporal operator is
/// unrolled into finite conjunctions/disjunctions over (atom, time) leaves.
pub enum Expanded {
    Leaf(SpatialAtom, usize),
    Neg(Box<Expanded>),
    Min(Vec<Expanded>),
    Max(Vec<Expanded>),
}

pub fn expand_at(f: &Formula, t: usize) -> Expanded {
    match f {
        Formula::Atom(atom) => Expanded::Leaf(atom.clone(), t),
        Formula::Not(g) => Expanded::Neg(Box::new(expand_at(g, t))),
        Formula::And(gs) => Expanded::Min(gs.iter().map(|g| expand_at(g, t)).collect()),
        Formula::Or(gs) => Expanded::Max(gs.iter().map(|g| expand_at(g, t)).collect()),
        Formula::Implies(l, r) => Expanded::Max(vec![
            Expanded::Neg(Box::new(expand_at(l, t))),
            expand_at(r, t),
        ]),
        Formula::Always(iv, g) => {
            Expanded::Min((t + iv.a..=t + iv.b).map(|tp| expand_at(g, tp)).collect())
        }
        Formula::Eventually(iv, g) => {
            Expanded::Max((t + iv.a..=t + iv.b).map(|tp| expand_at(g, tp)).collect())
        }
        Formula::Until(iv, l, r) => Expanded::Max(
            (t + iv.a..=t + iv.b)
                .map(|tp| {
                    let mut parts = vec![expand_at(r, tp)];
                    parts.push(Expanded::Min((t..=tp).map(|u| expand_at(l, u)).collect()));
                    Expanded::Min(parts)
                })
                .collect(),
        ),
    }
}

/// Evaluates only the min/max layer of an expanded formula.
pub fn eval_expanded(e: &Expanded, traj: &Trajectory) -> f64 {
    match e {
        Expanded::Leaf(atom, t) => {
            rho_atom(traj.state(*t).expect("expansion stays in range"), atom)
                .expect("oracle scenes resolve every identifier")
        }
        Expanded::Neg(inner) => -eval_expanded(inner, traj),
        Expanded::Min(parts) => parts
            .iter()
            .map(|p| eval_expanded(p, traj))
            .fold(f64::INFINITY, f64::min),
        Expanded::Max(parts) => parts
            .iter()
            .map(|p| eval_expanded(p, traj))
            .fold(f64::NEG_INFINITY, f64::max),
    }
}

/// The temporal-expansion oracle: robustness of `f` at `t` computed without
/// the recursive monitor's temporal evaluation path.
pub fn oracle_robustness(traj: &Trajectory, f: &Formula, t: usize) -> f64 {
    eval_expanded(&expand_at(f, t), traj)
}

fn object(state: &SceneState, id: &Ident) -> DiskObject {
    state.get(id).expect("oracle scenes resolve every identifier").clone()
}

fn distance(state: &SceneState, i: &Ident, j: &Ident) -> f64 {
    let a = object(state, i);
    let b = object(state, j);
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

/// Boolean satisfaction straight from the defining inequalities, independent
/// of the quantitative semantics.
pub fn boolean_atom(state: &SceneState, atom: &SpatialAtom) -> bool {
    match atom {
        SpatialAtom::CloseTo { i, j, eps_c } => distance(state, i, j) <= *eps_c,
        SpatialAtom::FarFrom { i, j, eps_f } => distance(state, i, j) >= *eps_f,
        SpatialAtom::Touch { i, j, eps } => {
            let (a, b) = (object(state, i), object(state, j));
            (distance(state, i, j) - (a.radius + b.radius)).abs() <= *eps
        }
        SpatialAtom::Ovlp { i, j, tau } => {
            let (a, b) = (object(state, i), object(state, j));
            let d = distance(state, i, j);
            (a.radius - b.radius).abs() + tau < d && d < a.radius + b.radius - tau
        }
        SpatialAtom::PartOvlp { i, j, tau, rho } => {
            let ovlp = SpatialAtom::Ovlp { i: i.clone(), j: j.clone(), tau: *tau };
            let encl_ij = SpatialAtom::EnclIn { i: i.clone(), j: j.clone(), rho: *rho };
            let encl_ji = SpatialAtom::EnclIn { i: j.clone(), j: i.clone(), rho: *rho };
            boolean_atom(state, &ovlp)
                && !boolean_atom(state, &encl_ij)
                && !boolean_atom(state, &encl_ji)
        }
        SpatialAtom::EnclIn { i, j, rho } => {
            let (a, b) = (object(state, i), object(state, j));
            distance(state, i, j) + a.radius <= b.radius - rho
        }
        SpatialAtom::LeftOf { i, j, kappa } => {
            let (a, b) = (object(state, i), object(state, j));
            a.x + a.radius + kappa <= b.x - b.radius
        }
        SpatialAtom::RightOf { i, j, kappa } => {
            let (a, b) = (object(state, i), object(state, j));
            b.x + b.radius + kappa <= a.x - a.radius
        }
        SpatialAtom::Above { i, j, kappa } => {
            let (a, b) = (object(state, i), object(state, j));
            b.y + b.radius + kappa <= a.y - a.radius
        }
        SpatialAtom::Below { i, j, kappa } => {
            let (a, b) = (object(state, i), object(state, j));
            a.y + a.radius + kappa <= b.y - b.radius
        }
        SpatialAtom::BetweenPx { a, b, c, kappa } => {
            let (oa, ob, oc) = (object(state, a), object(state, b), object(state, c));
            oa.x + oa.radius + kappa <= ob.x - ob.radius
                && ob.x + ob.radius + kappa <= oc.x - oc.radius
        }
        SpatialAtom::BetweenPy { a, b, c, kappa } => {
            let (oa, ob, oc) = (object(state, a), object(state, b), object(state, c));
            oa.y + oa.radius + kappa <= ob.y - ob.radius
                && ob.y + ob.radius + kappa <= oc.y - oc.radius
        }
        SpatialAtom::Oriented { i, j, kappa } => {
            let (a, b) = (object(state, i), object(state, j));
            let (uix, uiy) = a.heading.expect("oriented test scenes carry headings");
            let (ujx, ujy) = b.heading.expect("oriented test scenes carry headings");
            0.5 * ((uix - ujx).powi(2) + (uiy - ujy).powi(2)) <= *kappa
        }
    }
}

/// A random scene over `obj_1..obj_<objects>` plus `reg_1..reg_<regions>`,
/// with unit headings on every object.
pub fn random_scene(rng: &mut ChaCha8Rng, objects: usize, regions: usize) -> SceneState {
    let mut state = SceneState::new();
    for k in 0..objects {
        let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let disk = DiskObject::new(
            Ident::object(k),
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
            rng.random_range(0.2..1.5),
        )
        .with_heading(angle.cos(), angle.sin());
        state.insert(disk);
    }
    for k in 0..regions {
        state.insert(DiskObject::new(
            Ident::region(k),
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
            rng.random_range(1.5..4.0),
        ));
    }
    state
}

/// A random trajectory of independent frames over a fixed universe.
pub fn random_trajectory(
    rng: &mut ChaCha8Rng,
    len: usize,
    objects: usize,
    regions: usize,
) -> Trajectory {
    let states = (0..len).map(|_| random_scene(rng, objects, regions)).collect();
    Trajectory::new(states, 1.0).expect("random frames share one universe")
}

fn pick_distinct_objects(rng: &mut ChaCha8Rng, objects: usize, count: usize) -> Vec<Ident> {
    let mut pool: Vec<usize> = (0..objects).collect();
    (0..count)
        .map(|_| Ident::object(pool.swap_remove(rng.random_range(0..pool.len()))))
        .collect()
}

/// A random atom over the scene universe, covering every predicate family.
pub fn random_atom(rng: &mut ChaCha8Rng, objects: usize, regions: usize) -> SpatialAtom {
    let family = rng.random_range(0..13);
    let small = rng.random_range(0.01..0.8);
    match family {
        0 => {
            let ids = pick_distinct_objects(rng, objects, 2);
            SpatialAtom::Touch { i: ids[0].clone(), j: ids[1].clone(), eps: small }
        }
        1 => {
            let ids = pick_distinct_objects(rng, objects, 2);
            SpatialAtom::CloseTo {
                i: ids[0].clone(),
                j: ids[1].clone(),
                eps_c: rng.random_range(0.1..6.0),
            }
        }
        2 => {
            let ids = pick_distinct_objects(rng, objects, 2);
            SpatialAtom::FarFrom {
                i: ids[0].clone(),
                j: ids[1].clone(),
                eps_f: rng.random_range(0.1..6.0),
            }
        }
        3 => {
            let ids = pick_distinct_objects(rng, objects, 2);
            SpatialAtom::Ovlp { i: ids[0].clone(), j: ids[1].clone(), tau: small }
        }
        4 => {
            let ids = pick_distinct_objects(rng, objects, 2);
            SpatialAtom::PartOvlp {
                i: ids[0].clone(),
                j: ids[1].clone(),
                tau: small,
                rho: rng.random_range(0.01..0.8),
            }
        }
        5 => {
            let i = pick_distinct_objects(rng, objects, 1).pop().unwrap();
            let j = if regions > 0 {
                Ident::region(rng.random_range(0..regions))
            } else {
                Ident::object({
                    let name = i.name().to_string();
                    (0..objects)
                        .find(|k| Ident::object(*k).name() != name)
                        .expect("at least two objects")
                })
            };
            SpatialAtom::EnclIn { i, j, rho: small }
        }
        6 => {
            let ids = pick_distinct_objects(rng, objects, 2);
            SpatialAtom::LeftOf { i: ids[0].clone(), j: ids[1].clone(), kappa: small }
        }
        7 => {
            let ids = pick_distinct_objects(rng, objects, 2);
            SpatialAtom::RightOf { i: ids[0].clone(), j: ids[1].clone(), kappa: small }
        }
        8 => {
            let ids = pick_distinct_objects(rng, objects, 2);
            SpatialAtom::Above { i: ids[0].clone(), j: ids[1].clone(), kappa: small }
        }
        9 => {
            let ids = pick_distinct_objects(rng, objects, 2);
            SpatialAtom::Below { i: ids[0].clone(), j: ids[1].clone(), kappa: small }
        }
        10 => {
            let ids = pick_distinct_objects(rng, objects, 3);
            SpatialAtom::BetweenPx {
                a: ids[0].clone(),
                b: ids[1].clone(),
                c: ids[2].clone(),
                kappa: small,
            }
        }
        11 => {
            let ids = pick_distinct_objects(rng, objects, 3);
            SpatialAtom::BetweenPy {
                a: ids[0].clone(),
                b: ids[1].clone(),
                c: ids[2].clone(),
                kappa: small,
            }
        }
        _ => {
            let ids = pick_distinct_objects(rng, objects, 2);
            SpatialAtom::Oriented {
                i: ids[0].clone(),
                j: ids[1].clone(),
                kappa: rng.random_range(0.01..2.0),
            }
        }
    }
}
