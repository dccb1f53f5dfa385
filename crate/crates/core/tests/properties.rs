//! Property tests over arbitrary formulas, including the operators the
//! default sampler leaves out (implication, orientation).

use nl2spatial::formula::{
    parse_formula, serialize_formula, structure_metrics, subformulas, validate_formula, Formula,
    Ident, Interval, SpatialAtom,
};
use nl2spatial::render::{parse_controlled_english, render_canonical};
use proptest::prelude::*;

const OBJECTS: usize = 5;

fn obj(index: usize) -> Ident {
    Ident::object(index % OBJECTS)
}

fn distinct_pair() -> impl Strategy<Value = (Ident, Ident)> {
    (0..OBJECTS, 1..OBJECTS).prop_map(|(i, off)| (obj(i), obj(i + off)))
}

fn distinct_triple() -> impl Strategy<Value = (Ident, Ident, Ident)> {
    (0..OBJECTS, 1..3usize).prop_map(move |(i, off)| {
        (obj(i), obj(i + off), obj(i + off + 1 + (off == 1) as usize))
    })
}

fn tolerance() -> impl Strategy<Value = f64> {
    0.001f64..1000.0
}

fn arb_atom() -> impl Strategy<Value = SpatialAtom> {
    prop_oneof![
        (distinct_pair(), tolerance()).prop_map(|((i, j), eps)| SpatialAtom::Touch { i, j, eps }),
        (distinct_pair(), tolerance())
            .prop_map(|((i, j), eps_c)| SpatialAtom::CloseTo { i, j, eps_c }),
        (distinct_pair(), tolerance())
            .prop_map(|((i, j), eps_f)| SpatialAtom::FarFrom { i, j, eps_f }),
        (distinct_pair(), tolerance()).prop_map(|((i, j), tau)| SpatialAtom::Ovlp { i, j, tau }),
        (distinct_pair(), tolerance(), tolerance())
            .prop_map(|((i, j), tau, rho)| SpatialAtom::PartOvlp { i, j, tau, rho }),
        (0..OBJECTS, tolerance()).prop_map(|(i, rho)| SpatialAtom::EnclIn {
            i: obj(i),
            j: Ident::region(0),
            rho,
        }),
        (distinct_pair(), tolerance()).prop_map(|((i, j), kappa)| SpatialAtom::LeftOf { i, j, kappa }),
        (distinct_pair(), tolerance())
            .prop_map(|((i, j), kappa)| SpatialAtom::RightOf { i, j, kappa }),
        (distinct_pair(), tolerance()).prop_map(|((i, j), kappa)| SpatialAtom::Above { i, j, kappa }),
        (distinct_pair(), tolerance()).prop_map(|((i, j), kappa)| SpatialAtom::Below { i, j, kappa }),
        (distinct_triple(), tolerance())
            .prop_map(|((a, b, c), kappa)| SpatialAtom::BetweenPx { a, b, c, kappa }),
        (distinct_triple(), tolerance())
            .prop_map(|((a, b, c), kappa)| SpatialAtom::BetweenPy { a, b, c, kappa }),
        (distinct_pair(), 0.001f64..2.0)
            .prop_map(|((i, j), kappa)| SpatialAtom::Oriented { i, j, kappa }),
    ]
}

fn arb_interval() -> impl Strategy<Value = Interval> {
    (0usize..30, 0usize..30).prop_map(|(a, len)| Interval::new(a, a + len).unwrap())
}

fn arb_formula() -> impl Strategy<Value = Formula> {
    let leaf = arb_atom().prop_map(Formula::Atom);
    leaf.prop_recursive(4, 48, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::And),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::Or),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (arb_interval(), inner.clone()).prop_map(|(iv, f)| Formula::always(iv, f)),
            (arb_interval(), inner.clone()).prop_map(|(iv, f)| Formula::eventually(iv, f)),
            (arb_interval(), inner.clone(), inner)
                .prop_map(|(iv, a, b)| Formula::until(iv, a, b)),
        ]
    })
}

proptest! {
    #[test]
    fn machine_syntax_round_trips(f in arb_formula()) {
        let text = serialize_formula(&f);
        let back = parse_formula(&text).expect("canonical serialization parses");
        prop_assert_eq!(back, f);
    }

    #[test]
    fn controlled_english_round_trips(f in arb_formula()) {
        let rendered = render_canonical(&f);
        let back = parse_controlled_english(&rendered.text)
            .map_err(|e| TestCaseError::fail(format!("{e}: {}", rendered.text)))?;
        prop_assert_eq!(back, f);
    }

    #[test]
    fn generated_formulas_are_valid(f in arb_formula()) {
        prop_assert!(validate_formula(&f).is_empty());
    }

    #[test]
    fn metrics_are_sane(f in arb_formula()) {
        let (depth, breadth, leaves) = structure_metrics(&f);
        prop_assert!(depth >= 1);
        prop_assert!(leaves >= 1);
        prop_assert_eq!(breadth == 0, f.is_atom());
    }

    #[test]
    fn subformula_paths_resolve(f in arb_formula()) {
        let subs = subformulas(&f);
        let mut seen = std::collections::HashSet::new();
        for (path, node) in &subs {
            prop_assert!(seen.insert(path.clone()), "duplicate path {:?}", path);
            prop_assert_eq!(f.node_at(path), Some(*node));
        }
        prop_assert_eq!(subs.len(), count_nodes(&f));
    }
}

fn count_nodes(f: &Formula) -> usize {
    1 + f.children().iter().map(|c| count_nodes(c)).sum::<usize>()
}
