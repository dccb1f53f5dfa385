//! Formula syntax tree, canonical machine serialization, and structural queries.
//!
//! A [`Formula`] is a finite tree whose leaves are geometric atoms
//! ([`SpatialAtom`]) over symbolic identifiers and whose internal nodes are
//! Boolean connectives or bounded temporal operators. The canonical machine
//! syntax is an ASCII, fully parenthesized form (see `docs/machine-syntax.md`
//! for the EBNF); [`parse_formula`] and [`serialize_formula`] are exact
//! inverses on valid formulas.

mod parse;

pub use parse::{parse_formula, ParseError};

use std::fmt;

/// Identifier kind, derived from the name prefix (`obj_` or `reg_`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IdentKind {
    Object,
    Region,
}

/// A symbolic object or region identifier, e.g. `obj_3` or `reg_s`.
///
/// Names must match `[A-Za-z_][A-Za-z0-9_]*` and carry their kind through the
/// prefix convention: `obj_` for objects, `reg_` for regions. The prefix rule
/// keeps identifiers disjoint from every keyword of the controlled-English
/// grammar, which is what makes the inverse renderer unambiguous.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ident {
    name: String,
}

/// Error raised when constructing an [`Ident`] from an invalid name.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IdentError {
    #[error("identifier is empty")]
    Empty,
    #[error("identifier `{0}` contains invalid characters")]
    BadCharacters(String),
    #[error("identifier `{0}` must start with `obj_` or `reg_`")]
    UnknownKind(String),
}

impl Ident {
    pub fn new(name: impl Into<String>) -> Result<Self, IdentError> {
        let name = name.into();
        if name.is_empty() {
            return Err(IdentError::Empty);
        }
        let mut chars = name.chars();
        let first = chars.next().unwrap();
        if !(first.is_ascii_alphabetic() || first == '_') {
            return Err(IdentError::BadCharacters(name));
        }
        if !chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(IdentError::BadCharacters(name));
        }
        if !(name.starts_with("obj_") || name.starts_with("reg_")) {
            return Err(IdentError::UnknownKind(name));
        }
        Ok(Ident { name })
    }

    /// `obj_<n>` for a zero-based object index (`obj_1`, `obj_2`, …).
    pub fn object(index: usize) -> Self {
        Ident {
            name: format!("obj_{}", index + 1),
        }
    }

    /// `reg_<n>` for a zero-based region index.
    pub fn region(index: usize) -> Self {
        Ident {
            name: format!("reg_{}", index + 1),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> IdentKind {
        if self.name.starts_with("reg_") {
            IdentKind::Region
        } else {
            IdentKind::Object
        }
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Closed time window `[a, b]` in trajectory step indices, `0 <= a <= b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    pub a: usize,
    pub b: usize,
}

impl Interval {
    pub fn new(a: usize, b: usize) -> Option<Self> {
        (a <= b).then_some(Interval { a, b })
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.a, self.b)
    }
}

/// Geometric atomic predicate over disk objects.
///
/// Every variant carries its own tolerance constants, so a formula is fully
/// self-contained. All tolerances must be strictly positive and the identifier
/// arguments of a single atom must be pairwise distinct; [`validate_formula`]
/// reports breaches of either rule.
#[derive(Debug, Clone, PartialEq)]
pub enum SpatialAtom {
    /// Disk boundaries within `eps` of contact.
    Touch { i: Ident, j: Ident, eps: f64 },
    /// Center distance at most `eps_c`.
    CloseTo { i: Ident, j: Ident, eps_c: f64 },
    /// Center distance at least `eps_f`.
    FarFrom { i: Ident, j: Ident, eps_f: f64 },
    /// Disks overlap with margin `tau`, neither containing the other by construction of the bound.
    Ovlp { i: Ident, j: Ident, tau: f64 },
    /// Overlap without containment in either direction.
    PartOvlp { i: Ident, j: Ident, tau: f64, rho: f64 },
    /// Disk `i` strictly inside disk `j` with margin `rho`.
    EnclIn { i: Ident, j: Ident, rho: f64 },
    LeftOf { i: Ident, j: Ident, kappa: f64 },
    RightOf { i: Ident, j: Ident, kappa: f64 },
    Above { i: Ident, j: Ident, kappa: f64 },
    Below { i: Ident, j: Ident, kappa: f64 },
    /// `b` strictly between `a` and `c` along the x axis.
    BetweenPx { a: Ident, b: Ident, c: Ident, kappa: f64 },
    /// `b` strictly between `a` and `c` along the y axis.
    BetweenPy { a: Ident, b: Ident, c: Ident, kappa: f64 },
    /// Headings aligned within cosine-distance `kappa` (range `(0, 2]`).
    Oriented { i: Ident, j: Ident, kappa: f64 },
}

impl SpatialAtom {
    /// Canonical lowerCamelCase predicate name used by the machine syntax.
    pub fn name(&self) -> &'static str {
        match self {
            SpatialAtom::Touch { .. } => "touch",
            SpatialAtom::CloseTo { .. } => "closeTo",
            SpatialAtom::FarFrom { .. } => "farFrom",
            SpatialAtom::Ovlp { .. } => "ovlp",
            SpatialAtom::PartOvlp { .. } => "partOvlp",
            SpatialAtom::EnclIn { .. } => "enclIn",
            SpatialAtom::LeftOf { .. } => "leftOf",
            SpatialAtom::RightOf { .. } => "rightOf",
            SpatialAtom::Above { .. } => "above",
            SpatialAtom::Below { .. } => "below",
            SpatialAtom::BetweenPx { .. } => "betweenPx",
            SpatialAtom::BetweenPy { .. } => "betweenPy",
            SpatialAtom::Oriented { .. } => "oriented",
        }
    }

    /// Identifier arguments in declaration order.
    pub fn args(&self) -> Vec<&Ident> {
        match self {
            SpatialAtom::Touch { i, j, .. }
            | SpatialAtom::CloseTo { i, j, .. }
            | SpatialAtom::FarFrom { i, j, .. }
            | SpatialAtom::Ovlp { i, j, .. }
            | SpatialAtom::PartOvlp { i, j, .. }
            | SpatialAtom::EnclIn { i, j, .. }
            | SpatialAtom::LeftOf { i, j, .. }
            | SpatialAtom::RightOf { i, j, .. }
            | SpatialAtom::Above { i, j, .. }
            | SpatialAtom::Below { i, j, .. }
            | SpatialAtom::Oriented { i, j, .. } => vec![i, j],
            SpatialAtom::BetweenPx { a, b, c, .. } | SpatialAtom::BetweenPy { a, b, c, .. } => {
                vec![a, b, c]
            }
        }
    }

    /// Tolerance constants in declaration order.
    pub fn constants(&self) -> Vec<f64> {
        match self {
            SpatialAtom::Touch { eps, .. } => vec![*eps],
            SpatialAtom::CloseTo { eps_c, .. } => vec![*eps_c],
            SpatialAtom::FarFrom { eps_f, .. } => vec![*eps_f],
            SpatialAtom::Ovlp { tau, .. } => vec![*tau],
            SpatialAtom::PartOvlp { tau, rho, .. } => vec![*tau, *rho],
            SpatialAtom::EnclIn { rho, .. } => vec![*rho],
            SpatialAtom::LeftOf { kappa, .. }
            | SpatialAtom::RightOf { kappa, .. }
            | SpatialAtom::Above { kappa, .. }
            | SpatialAtom::Below { kappa, .. }
            | SpatialAtom::BetweenPx { kappa, .. }
            | SpatialAtom::BetweenPy { kappa, .. }
            | SpatialAtom::Oriented { kappa, .. } => vec![*kappa],
        }
    }
}

/// Recursive spatio-temporal formula.
///
/// `And`/`Or` are n-ary with at least two children; `Implies` is kept in the
/// syntax (the monitor evaluates it as `max(-r(lhs), r(rhs))`). Temporal
/// operators carry closed integer step intervals.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Atom(SpatialAtom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Always(Interval, Box<Formula>),
    Eventually(Interval, Box<Formula>),
    Until(Interval, Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(atom: SpatialAtom) -> Self {
        Formula::Atom(atom)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Self {
        Formula::Implies(Box::new(lhs), Box::new(rhs))
    }

    pub fn always(iv: Interval, f: Formula) -> Self {
        Formula::Always(iv, Box::new(f))
    }

    pub fn eventually(iv: Interval, f: Formula) -> Self {
        Formula::Eventually(iv, Box::new(f))
    }

    pub fn until(iv: Interval, lhs: Formula, rhs: Formula) -> Self {
        Formula::Until(iv, Box::new(lhs), Box::new(rhs))
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Formula::Atom(_))
    }

    /// Direct children in structural order.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Atom(_) => vec![],
            Formula::Not(f) | Formula::Always(_, f) | Formula::Eventually(_, f) => vec![f],
            Formula::And(fs) | Formula::Or(fs) => fs.iter().collect(),
            Formula::Implies(l, r) | Formula::Until(_, l, r) => vec![l, r],
        }
    }

    /// Resolves a path of child indices to a node, if it exists.
    pub fn node_at(&self, path: &[usize]) -> Option<&Formula> {
        let mut node = self;
        for &idx in path {
            node = *node.children().get(idx)?;
        }
        Some(node)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_formula(self))
    }
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

/// Prints an f64 with the shortest decimal form that round-trips exactly.
pub(crate) fn format_number(x: f64) -> String {
    format!("{x}")
}

/// Serializes into the canonical machine syntax.
///
/// The output is fully parenthesized, uses ASCII operator spellings, and
/// prints constants with their shortest round-trip decimal; parsing the result
/// yields a structurally equal formula.
pub fn serialize_formula(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(f, &mut out);
    out
}

fn write_formula(f: &Formula, out: &mut String) {
    match f {
        Formula::Atom(atom) => write_atom(atom, out),
        Formula::Not(inner) => {
            out.push_str("!(");
            write_formula(inner, out);
            out.push(')');
        }
        Formula::And(children) | Formula::Or(children) => {
            let sep = if matches!(f, Formula::And(_)) { " & " } else { " | " };
            out.push('(');
            for (k, child) in children.iter().enumerate() {
                if k > 0 {
                    out.push_str(sep);
                }
                write_formula(child, out);
            }
            out.push(')');
        }
        Formula::Implies(l, r) => {
            out.push('(');
            write_formula(l, out);
            out.push_str(" -> ");
            write_formula(r, out);
            out.push(')');
        }
        Formula::Always(iv, inner) => {
            out.push('G');
            out.push_str(&iv.to_string());
            out.push('(');
            write_formula(inner, out);
            out.push(')');
        }
        Formula::Eventually(iv, inner) => {
            out.push('F');
            out.push_str(&iv.to_string());
            out.push('(');
            write_formula(inner, out);
            out.push(')');
        }
        Formula::Until(iv, l, r) => {
            out.push('(');
            write_formula(l, out);
            out.push_str(" U");
            out.push_str(&iv.to_string());
            out.push(' ');
            write_formula(r, out);
            out.push(')');
        }
    }
}

fn write_atom(atom: &SpatialAtom, out: &mut String) {
    out.push_str(atom.name());
    out.push('(');
    for (k, id) in atom.args().iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        out.push_str(id.name());
    }
    out.push(';');
    for (k, c) in atom.constants().iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        out.push_str(&format_number(*c));
    }
    out.push(')');
}

/// Pre-order traversal of all subformulas, paired with their path of child
/// indices from the root. The first entry is `([], f)`.
pub fn subformulas(f: &Formula) -> Vec<(Vec<usize>, &Formula)> {
    let mut out = Vec::new();
    let mut stack = vec![(Vec::new(), f)];
    while let Some((path, node)) = stack.pop() {
        out.push((path.clone(), node));
        let children = node.children();
        for (idx, child) in children.into_iter().enumerate().rev() {
            let mut child_path = path.clone();
            child_path.push(idx);
            stack.push((child_path, child));
        }
    }
    out
}

/// Depth (layers including root and leaves), maximum child count over all
/// nodes, and number of atom leaves.
pub fn structure_metrics(f: &Formula) -> (usize, usize, usize) {
    let mut depth = 0;
    let mut max_breadth = 0;
    let mut leaves = 0;
    fn walk(node: &Formula, level: usize, depth: &mut usize, breadth: &mut usize, leaves: &mut usize) {
        *depth = (*depth).max(level);
        let children = node.children();
        *breadth = (*breadth).max(children.len());
        if children.is_empty() {
            *leaves += 1;
        }
        for child in children {
            walk(child, level + 1, depth, breadth, leaves);
        }
    }
    walk(f, 1, &mut depth, &mut max_breadth, &mut leaves);
    (depth, max_breadth, leaves)
}

/// A single invariant breach found by [`validate_formula`].
#[derive(Debug, Clone, PartialEq)]
pub enum ValidationIssue {
    /// A tolerance constant is zero, negative, or non-finite.
    NonPositiveConstant { path: Vec<usize>, atom: &'static str, value: f64 },
    /// Two identifier arguments of one atom coincide.
    DuplicateArg { path: Vec<usize>, atom: &'static str, name: String },
    /// `And`/`Or` with fewer than two children.
    TooFewChildren { path: Vec<usize>, found: usize },
    /// Temporal interval with `a > b`.
    BadInterval { path: Vec<usize>, a: usize, b: usize },
    /// `oriented` tolerance outside `(0, 2]`.
    KappaOutOfRange { path: Vec<usize>, value: f64 },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::NonPositiveConstant { path, atom, value } => {
                write!(f, "non-positive constant {value} in `{atom}` at {path:?}")
            }
            ValidationIssue::DuplicateArg { path, atom, name } => {
                write!(f, "duplicate argument `{name}` in `{atom}` at {path:?}")
            }
            ValidationIssue::TooFewChildren { path, found } => {
                write!(f, "connective with {found} children (needs >= 2) at {path:?}")
            }
            ValidationIssue::BadInterval { path, a, b } => {
                write!(f, "interval [{a},{b}] with a > b at {path:?}")
            }
            ValidationIssue::KappaOutOfRange { path, value } => {
                write!(f, "oriented tolerance {value} outside (0, 2] at {path:?}")
            }
        }
    }
}

/// Checks every structural invariant; an empty list means the formula is valid.
pub fn validate_formula(f: &Formula) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();
    for (path, node) in subformulas(f) {
        match node {
            Formula::Atom(atom) => {
                for value in atom.constants() {
                    if !value.is_finite() || value <= 0.0 {
                        issues.push(ValidationIssue::NonPositiveConstant {
                            path: path.clone(),
                            atom: atom.name(),
                            value,
                        });
                    }
                }
                if let SpatialAtom::Oriented { kappa, .. } = atom {
                    if *kappa > 2.0 {
                        issues.push(ValidationIssue::KappaOutOfRange {
                            path: path.clone(),
                            value: *kappa,
                        });
                    }
                }
                let args = atom.args();
                for (k, a) in args.iter().enumerate() {
                    if args[k + 1..].iter().any(|b| a == b) {
                        issues.push(ValidationIssue::DuplicateArg {
                            path: path.clone(),
                            atom: atom.name(),
                            name: a.name().to_string(),
                        });
                    }
                }
            }
            Formula::And(children) | Formula::Or(children) => {
                if children.len() < 2 {
                    issues.push(ValidationIssue::TooFewChildren {
                        path: path.clone(),
                        found: children.len(),
                    });
                }
            }
            Formula::Always(iv, _) | Formula::Eventually(iv, _) | Formula::Until(iv, _, _)
                if iv.a > iv.b =>
            {
                issues.push(ValidationIssue::BadInterval {
                    path: path.clone(),
                    a: iv.a,
                    b: iv.b,
                });
            }
            _ => {}
        }
    }
    issues
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obj(n: &str) -> Ident {
        Ident::new(n).unwrap()
    }

    fn close_to(i: &str, j: &str, eps_c: f64) -> Formula {
        Formula::Atom(SpatialAtom::CloseTo {
            i: obj(i),
            j: obj(j),
            eps_c,
        })
    }

    #[test]
    fn ident_prefix_rules() {
        assert_eq!(obj("obj_3").kind(), IdentKind::Object);
        assert_eq!(obj("reg_s").kind(), IdentKind::Region);
        assert!(matches!(Ident::new("box_1"), Err(IdentError::UnknownKind(_))));
        assert!(matches!(Ident::new(""), Err(IdentError::Empty)));
        assert!(matches!(Ident::new("obj r"), Err(IdentError::BadCharacters(_))));
        assert!(matches!(Ident::new("1obj_"), Err(IdentError::BadCharacters(_))));
    }

    #[test]
    fn serialize_atom_forms() {
        let far = Formula::Atom(SpatialAtom::FarFrom {
            i: obj("obj_1"),
            j: obj("obj_2"),
            eps_f: 1.5,
        });
        assert_eq!(serialize_formula(&far), "farFrom(obj_1,obj_2;1.5)");

        let not = Formula::not(close_to("obj_r", "obj_b", 0.3));
        assert_eq!(serialize_formula(&not), "!(closeTo(obj_r,obj_b;0.3))");

        let part = Formula::Atom(SpatialAtom::PartOvlp {
            i: obj("obj_1"),
            j: obj("obj_2"),
            tau: 0.1,
            rho: 0.05,
        });
        assert_eq!(serialize_formula(&part), "partOvlp(obj_1,obj_2;0.1,0.05)");
    }

    #[test]
    fn serialize_connectives() {
        let a = close_to("obj_1", "obj_2", 2.0);
        let b = close_to("obj_1", "obj_3", 1.0);
        let and = Formula::And(vec![a.clone(), b.clone()]);
        assert_eq!(
            serialize_formula(&and),
            "(closeTo(obj_1,obj_2;2) & closeTo(obj_1,obj_3;1))"
        );
        let until = Formula::until(Interval::new(0, 5).unwrap(), a.clone(), b.clone());
        assert_eq!(
            serialize_formula(&until),
            "(closeTo(obj_1,obj_2;2) U[0,5] closeTo(obj_1,obj_3;1))"
        );
        let imp = Formula::implies(a, b);
        assert_eq!(
            serialize_formula(&imp),
            "(closeTo(obj_1,obj_2;2) -> closeTo(obj_1,obj_3;1))"
        );
    }

    #[test]
    fn subformula_paths() {
        let atom = close_to("obj_1", "obj_2", 2.0);
        let subs = subformulas(&atom);
        assert_eq!(subs.len(), 1);
        assert_eq!(subs[0].0, Vec::<usize>::new());

        let a = close_to("obj_1", "obj_2", 2.0);
        let b = close_to("obj_1", "obj_3", 1.0);
        let and = Formula::And(vec![a.clone(), b.clone()]);
        let subs = subformulas(&and);
        assert_eq!(subs.len(), 3);
        assert_eq!(subs[1], (vec![0], &a));
        assert_eq!(subs[2], (vec![1], &b));
    }

    #[test]
    fn paths_resolve_back_to_nodes() {
        let f = crate::fixtures::three_clause_tree();
        let subs = subformulas(&f);
        assert_eq!(subs.len(), 12);
        for (path, node) in &subs {
            assert_eq!(f.node_at(path), Some(*node));
        }
        // 1 root + 3 temporal scopes + 3 refinements + 5 atom leaves
        let atoms = subs.iter().filter(|(_, n)| n.is_atom()).count();
        assert_eq!(atoms, 5);
    }

    #[test]
    fn metrics_examples() {
        let atom = close_to("obj_1", "obj_2", 2.0);
        assert_eq!(structure_metrics(&atom), (1, 0, 1));
        let g = Formula::always(Interval::new(0, 5).unwrap(), atom);
        assert_eq!(structure_metrics(&g), (2, 1, 1));
        let tree = crate::fixtures::three_clause_tree();
        assert_eq!(structure_metrics(&tree), (4, 3, 5));
    }

    #[test]
    fn validation_flags_breaches() {
        let ok = crate::fixtures::three_clause_tree();
        assert!(validate_formula(&ok).is_empty());

        let dup = Formula::Atom(SpatialAtom::Touch {
            i: obj("obj_1"),
            j: obj("obj_1"),
            eps: 0.1,
        });
        let issues = validate_formula(&dup);
        assert!(matches!(issues.as_slice(), [ValidationIssue::DuplicateArg { .. }]));

        let neg = close_to("obj_1", "obj_2", -1.0);
        let issues = validate_formula(&neg);
        assert!(matches!(
            issues.as_slice(),
            [ValidationIssue::NonPositiveConstant { .. }]
        ));

        let unary_and = Formula::And(vec![close_to("obj_1", "obj_2", 1.0)]);
        assert!(matches!(
            validate_formula(&unary_and).as_slice(),
            [ValidationIssue::TooFewChildren { found: 1, .. }]
        ));

        let wide_kappa = Formula::Atom(SpatialAtom::Oriented {
            i: obj("obj_1"),
            j: obj("obj_2"),
            kappa: 2.5,
        });
        assert!(matches!(
            validate_formula(&wide_kappa).as_slice(),
            [ValidationIssue::KappaOutOfRange { .. }]
        ));
    }
}
