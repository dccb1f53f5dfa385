//! Deterministic back-translation between formulas and controlled English.
//!
//! [`render_canonical`] maps a formula to a unique English sentence by
//! applying one fixed template per operator, leaf to root. Equal formulas
//! yield byte-identical text, numeric constants are printed with the same
//! shortest round-trip decimals as the machine syntax, and
//! [`parse_controlled_english`] recovers the formula exactly.
//!
//! ## Template grammar
//!
//! Clauses compose mid-sentence in lowercase; only the finished sentence
//! capitalizes its first word (identifiers are copied verbatim and never
//! capitalized) and ends with a period. Operands of `not`, `throughout`,
//! `sometime within`, `within … until then`, `either … or`, and `if … then`
//! are wrapped in `( … )` unless they are atoms; conjunction is the one
//! coordination level whose members stay bare (a nested conjunction is
//! parenthesized). Two conjuncts join with `" and "`, three or more with
//! `", and "`.
//!
//! ## Constant modes
//!
//! The default (numeric) mode surfaces every tolerance constant in the text,
//! so the mapping is invertible bit-for-bit. The symbolic mode prints the
//! conventional symbol (`ε_c`, `ε_f`, `κ`) where the template calls for one
//! and omits the tolerances that the template treats as implicit (contact,
//! overlap, containment, betweenness); parsing symbolic text substitutes the
//! [`SymbolicDefaults`] table.

mod parse;

pub use parse::{parse_controlled_english, parse_controlled_english_with, NlParseError};

use std::ops::Range;

use crate::formula::{format_number, subformulas, Formula, Interval, SpatialAtom};

/// Rendering controls shared by the renderer and its inverse parser.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    /// Print constant symbols instead of numeric values.
    pub symbolic_constants: bool,
    /// Trajectory steps per rendered second; interval bounds are divided by
    /// this factor when printed. The default of 1 renders step indices as-is.
    pub steps_per_second: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            symbolic_constants: false,
            steps_per_second: 1.0,
        }
    }
}

impl RenderOptions {
    pub fn symbolic() -> Self {
        RenderOptions {
            symbolic_constants: true,
            ..Default::default()
        }
    }
}

/// Numeric values substituted for constant symbols when parsing
/// symbolic-constants text. The shipped fixtures use exactly these values.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicDefaults {
    pub eps: f64,
    pub eps_c: f64,
    pub eps_f: f64,
    pub tau: f64,
    pub rho: f64,
    pub kappa: f64,
}

impl Default for SymbolicDefaults {
    fn default() -> Self {
        SymbolicDefaults {
            eps: 0.05,
            eps_c: 0.3,
            eps_f: 0.5,
            tau: 0.1,
            rho: 0.05,
            kappa: 0.1,
        }
    }
}

/// A rendered sentence plus the byte range of every subformula's clause.
///
/// Spans are indexed by the subformula's path from the root; a parent's span
/// always contains its children's spans, and sibling spans never overlap.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalText {
    pub text: String,
    pub node_map: Vec<(Vec<usize>, Range<usize>)>,
}

/// Renders with default options (numeric constants, step indices as seconds).
pub fn render_canonical(f: &Formula) -> CanonicalText {
    render_canonical_with(f, &RenderOptions::default())
}

/// Renders a formula as one controlled-English sentence.
pub fn render_canonical_with(f: &Formula, opts: &RenderOptions) -> CanonicalText {
    let mut r = Renderer {
        opts,
        out: String::new(),
        node_map: Vec::new(),
        path: Vec::new(),
    };
    r.clause(f);
    let mut text = r.out;
    if !starts_with_entity(f) {
        if let Some(first) = text.get(..1) {
            let upper = first.to_ascii_uppercase();
            text.replace_range(..1, &upper);
        }
    }
    text.push('.');
    CanonicalText {
        text,
        node_map: r.node_map,
    }
}

/// Renders every subformula standalone, in pre-order.
pub fn render_all_nodes(f: &Formula, opts: &RenderOptions) -> Vec<(Vec<usize>, Formula, CanonicalText)> {
    subformulas(f)
        .into_iter()
        .map(|(path, node)| (path, node.clone(), render_canonical_with(node, opts)))
        .collect()
}

/// True when the clause for `f` begins with an identifier rather than a
/// template word; such clauses are never capitalized.
fn starts_with_entity(f: &Formula) -> bool {
    match f {
        Formula::Atom(atom) => matches!(
            atom,
            SpatialAtom::Touch { .. }
                | SpatialAtom::Ovlp { .. }
                | SpatialAtom::PartOvlp { .. }
                | SpatialAtom::EnclIn { .. }
                | SpatialAtom::LeftOf { .. }
                | SpatialAtom::RightOf { .. }
                | SpatialAtom::Above { .. }
                | SpatialAtom::Below { .. }
        ),
        Formula::And(children) => match children.first() {
            Some(first) if !matches!(first, Formula::And(_)) => starts_with_entity(first),
            _ => false,
        },
        _ => false,
    }
}

struct Renderer<'a> {
    opts: &'a RenderOptions,
    out: String,
    node_map: Vec<(Vec<usize>, Range<usize>)>,
    path: Vec<usize>,
}

impl Renderer<'_> {
    fn clause(&mut self, f: &Formula) {
        let start = self.out.len();
        match f {
            Formula::Atom(atom) => self.atom(atom),
            Formula::Not(inner) => {
                self.out.push_str("it is not the case that ");
                self.operand(inner, 0);
            }
            Formula::And(children) => {
                let sep = if children.len() == 2 { " and " } else { ", and " };
                for (idx, child) in children.iter().enumerate() {
                    if idx > 0 {
                        self.out.push_str(sep);
                    }
                    if matches!(child, Formula::And(_)) {
                        self.parenthesized(child, idx);
                    } else {
                        self.child_clause(child, idx);
                    }
                }
            }
            Formula::Or(children) => {
                self.out.push_str("either ");
                let sep = if children.len() == 2 { " or " } else { ", or " };
                for (idx, child) in children.iter().enumerate() {
                    if idx > 0 {
                        self.out.push_str(sep);
                    }
                    self.operand(child, idx);
                }
                self.out.push_str(" holds");
            }
            Formula::Implies(lhs, rhs) => {
                self.out.push_str("if ");
                self.operand(lhs, 0);
                self.out.push_str(" holds, then ");
                self.operand(rhs, 1);
                self.out.push_str(" must hold");
            }
            Formula::Always(iv, inner) => {
                self.out.push_str("throughout ");
                self.interval(iv);
                self.out.push_str(", ");
                self.operand(inner, 0);
                self.out.push_str(" holds");
            }
            Formula::Eventually(iv, inner) => {
                self.out.push_str("sometime within ");
                self.interval(iv);
                self.out.push_str(", ");
                self.operand(inner, 0);
                self.out.push_str(" holds");
            }
            Formula::Until(iv, lhs, rhs) => {
                self.out.push_str("within ");
                self.interval(iv);
                self.out.push_str(", ");
                self.operand(rhs, 1);
                self.out.push_str("; until then, ");
                self.operand(lhs, 0);
            }
        }
        let range = start..self.out.len();
        self.node_map.push((self.path.clone(), range));
    }

    /// Unit position: atoms stay bare, everything else is parenthesized.
    fn operand(&mut self, child: &Formula, idx: usize) {
        if child.is_atom() {
            self.child_clause(child, idx);
        } else {
            self.parenthesized(child, idx);
        }
    }

    fn parenthesized(&mut self, child: &Formula, idx: usize) {
        self.out.push_str("( ");
        self.child_clause(child, idx);
        self.out.push_str(" )");
    }

    fn child_clause(&mut self, child: &Formula, idx: usize) {
        self.path.push(idx);
        self.clause(child);
        self.path.pop();
    }

    fn interval(&mut self, iv: &Interval) {
        let sps = self.opts.steps_per_second;
        let a = iv.a as f64 / sps;
        let b = iv.b as f64 / sps;
        self.out.push('[');
        self.out.push_str(&format_number(a));
        self.out.push(',');
        self.out.push_str(&format_number(b));
        self.out.push(']');
    }

    fn constant(&mut self, symbol: &str, value: f64) {
        if self.opts.symbolic_constants {
            self.out.push_str(symbol);
        } else {
            self.out.push_str(&format_number(value));
        }
    }

    /// Parenthetical tolerance, omitted entirely in symbolic mode. In the
    /// numeric mode every constant must surface for the parse to invert.
    fn implicit_suffix(&mut self, label: &str, value: f64) {
        if !self.opts.symbolic_constants {
            self.out.push_str(" (");
            self.out.push_str(label);
            self.out.push(' ');
            self.out.push_str(&format_number(value));
            self.out.push(')');
        }
    }

    fn atom(&mut self, atom: &SpatialAtom) {
        match atom {
            SpatialAtom::Touch { i, j, eps } => {
                self.out.push_str(i.name());
                self.out.push_str(" is in contact with ");
                self.out.push_str(j.name());
                self.implicit_suffix("tolerance", *eps);
            }
            SpatialAtom::CloseTo { i, j, eps_c } => {
                self.out.push_str("the distance between ");
                self.out.push_str(i.name());
                self.out.push_str(" and ");
                self.out.push_str(j.name());
                self.out.push_str(" is at most ");
                self.constant("ε_c", *eps_c);
            }
            SpatialAtom::FarFrom { i, j, eps_f } => {
                self.out.push_str("the distance between ");
                self.out.push_str(i.name());
                self.out.push_str(" and ");
                self.out.push_str(j.name());
                self.out.push_str(" is at least ");
                self.constant("ε_f", *eps_f);
            }
            SpatialAtom::Ovlp { i, j, tau } => {
                self.out.push_str(i.name());
                self.out.push_str(" partially overlaps ");
                self.out.push_str(j.name());
                self.implicit_suffix("margin", *tau);
            }
            SpatialAtom::PartOvlp { i, j, tau, rho } => {
                self.out.push_str(i.name());
                self.out.push_str(" overlaps ");
                self.out.push_str(j.name());
                self.out.push_str(" without containment");
                if !self.opts.symbolic_constants {
                    self.out.push_str(" (margin ");
                    self.out.push_str(&format_number(*tau));
                    self.out.push_str(", containment margin ");
                    self.out.push_str(&format_number(*rho));
                    self.out.push(')');
                }
            }
            SpatialAtom::EnclIn { i, j, rho } => {
                self.out.push_str(i.name());
                self.out.push_str(" lies strictly inside ");
                self.out.push_str(j.name());
                self.implicit_suffix("margin", *rho);
            }
            SpatialAtom::LeftOf { i, j, kappa } => {
                self.directional(i.name(), " is strictly to the left of ", j.name(), *kappa);
            }
            SpatialAtom::RightOf { i, j, kappa } => {
                self.directional(i.name(), " is strictly to the right of ", j.name(), *kappa);
            }
            SpatialAtom::Above { i, j, kappa } => {
                self.directional(i.name(), " is strictly above ", j.name(), *kappa);
            }
            SpatialAtom::Below { i, j, kappa } => {
                self.directional(i.name(), " is strictly below ", j.name(), *kappa);
            }
            SpatialAtom::BetweenPx { a, b, c, kappa } => {
                self.between("x", a.name(), b.name(), c.name(), *kappa);
            }
            SpatialAtom::BetweenPy { a, b, c, kappa } => {
                self.between("y", a.name(), b.name(), c.name(), *kappa);
            }
            SpatialAtom::Oriented { i, j, kappa } => {
                self.out.push_str("the heading of ");
                self.out.push_str(i.name());
                self.out.push_str(" is aligned with that of ");
                self.out.push_str(j.name());
                self.out.push_str(" (within ");
                self.constant("κ", *kappa);
                self.out.push(')');
            }
        }
    }

    fn directional(&mut self, i: &str, relation: &str, j: &str, kappa: f64) {
        self.out.push_str(i);
        self.out.push_str(relation);
        self.out.push_str(j);
        self.out.push_str(" (margin ");
        self.constant("κ", kappa);
        self.out.push(')');
    }

    fn between(&mut self, axis: &str, a: &str, b: &str, c: &str, kappa: f64) {
        self.out.push_str("along the ");
        self.out.push_str(axis);
        self.out.push_str("-axis, ");
        self.out.push_str(b);
        self.out.push_str(" lies strictly between ");
        self.out.push_str(a);
        self.out.push_str(" and ");
        self.out.push_str(c);
        self.implicit_suffix("margin", kappa);
    }
}
