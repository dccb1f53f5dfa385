//! Inverse renderer: recovers a formula from its canonical English sentence.

use super::{RenderOptions, SymbolicDefaults};
use crate::formula::{Formula, Ident, Interval, SpatialAtom};

/// Error for text outside the canonical template grammar. The position is a
/// byte offset into the whitespace-normalized input.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("not canonical at {pos}: expected {expected}")]
pub struct NlParseError {
    pub pos: usize,
    pub expected: String,
}

/// Parses default-mode (numeric constants) canonical English.
pub fn parse_controlled_english(text: &str) -> Result<Formula, NlParseError> {
    parse_controlled_english_with(text, &RenderOptions::default(), &SymbolicDefaults::default())
}

/// Parses canonical English under the given constant mode.
///
/// Tokenization is case-sensitive except for the sentence-initial capital;
/// runs of whitespace collapse to one space and a single trailing period is
/// ignored. In symbolic mode, constants take their values from `defaults`.
pub fn parse_controlled_english_with(
    text: &str,
    opts: &RenderOptions,
    defaults: &SymbolicDefaults,
) -> Result<Formula, NlParseError> {
    let mut normalized = normalize_whitespace(text);
    if normalized.ends_with('.') {
        normalized.pop();
    }
    // Only a template word can carry the sentence-initial capital; identifiers
    // always start with a lowercase prefix.
    if normalized.starts_with(|c: char| c.is_ascii_uppercase()) {
        let lower = normalized[..1].to_ascii_lowercase();
        normalized.replace_range(..1, &lower);
    }
    let mut p = NlParser {
        input: &normalized,
        pos: 0,
        opts,
        defaults,
    };
    let formula = p.clause()?;
    if p.pos < p.input.len() {
        return Err(p.fail("end of sentence"));
    }
    Ok(formula)
}

fn normalize_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_space = true;
    for c in text.chars() {
        if c.is_whitespace() {
            if !in_space {
                out.push(' ');
                in_space = true;
            }
        } else {
            out.push(c);
            in_space = false;
        }
    }
    while out.ends_with(' ') {
        out.pop();
    }
    out
}

struct NlParser<'a> {
    input: &'a str,
    pos: usize,
    opts: &'a RenderOptions,
    defaults: &'a SymbolicDefaults,
}

impl NlParser<'_> {
    fn fail(&self, expected: &str) -> NlParseError {
        NlParseError {
            pos: self.pos,
            expected: expected.to_string(),
        }
    }

    fn rest(&self) -> &str {
        &self.input[self.pos..]
    }

    fn eat(&mut self, literal: &str) -> bool {
        if self.rest().starts_with(literal) {
            self.pos += literal.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, literal: &str) -> Result<(), NlParseError> {
        if self.eat(literal) {
            Ok(())
        } else {
            Err(self.fail(&format!("`{literal}`")))
        }
    }

    /// Coordination level: one unit, or a conjunction of units.
    fn clause(&mut self) -> Result<Formula, NlParseError> {
        let first = self.unit()?;
        if self.eat(", and ") {
            let mut children = vec![first, self.unit()?];
            while self.eat(", and ") {
                children.push(self.unit()?);
            }
            if children.len() < 3 {
                return Err(self.fail("a third conjunct (two conjuncts join with ` and `)"));
            }
            if self.rest().starts_with(" and ") {
                return Err(self.fail("`, and ` between all conjuncts"));
            }
            return Ok(Formula::And(children));
        }
        if self.eat(" and ") {
            let second = self.unit()?;
            if self.rest().starts_with(" and ") || self.rest().starts_with(", and ") {
                return Err(self.fail("exactly two conjuncts with ` and `"));
            }
            return Ok(Formula::And(vec![first, second]));
        }
        Ok(first)
    }

    /// Unit position: parenthesized clause, operator template, or atom.
    fn unit(&mut self) -> Result<Formula, NlParseError> {
        if self.eat("( ") {
            let inner = self.clause()?;
            self.expect(" )")?;
            return Ok(inner);
        }
        if self.eat("it is not the case that ") {
            return Ok(Formula::not(self.unit()?));
        }
        if self.eat("throughout ") {
            let iv = self.interval()?;
            self.expect(", ")?;
            let inner = self.unit()?;
            self.expect(" holds")?;
            return Ok(Formula::always(iv, inner));
        }
        if self.eat("sometime within ") {
            let iv = self.interval()?;
            self.expect(", ")?;
            let inner = self.unit()?;
            self.expect(" holds")?;
            return Ok(Formula::eventually(iv, inner));
        }
        if self.eat("within ") {
            let iv = self.interval()?;
            self.expect(", ")?;
            let rhs = self.unit()?;
            self.expect("; until then, ")?;
            let lhs = self.unit()?;
            return Ok(Formula::until(iv, lhs, rhs));
        }
        if self.eat("either ") {
            let first = self.unit()?;
            if self.eat(", or ") {
                let mut children = vec![first, self.unit()?];
                while self.eat(", or ") {
                    children.push(self.unit()?);
                }
                if children.len() < 3 {
                    return Err(self.fail("a third disjunct (two disjuncts join with ` or `)"));
                }
                self.expect(" holds")?;
                return Ok(Formula::Or(children));
            }
            self.expect(" or ")?;
            let second = self.unit()?;
            self.expect(" holds")?;
            return Ok(Formula::Or(vec![first, second]));
        }
        if self.eat("if ") {
            let lhs = self.unit()?;
            self.expect(" holds, then ")?;
            let rhs = self.unit()?;
            self.expect(" must hold")?;
            return Ok(Formula::implies(lhs, rhs));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula, NlParseError> {
        if self.eat("the distance between ") {
            let i = self.ident()?;
            self.expect(" and ")?;
            let j = self.ident()?;
            self.expect(" is at ")?;
            if self.eat("most ") {
                let eps_c = self.constant("ε_c", |d| d.eps_c)?;
                return Ok(Formula::Atom(SpatialAtom::CloseTo { i, j, eps_c }));
            }
            self.expect("least ")?;
            let eps_f = self.constant("ε_f", |d| d.eps_f)?;
            return Ok(Formula::Atom(SpatialAtom::FarFrom { i, j, eps_f }));
        }
        if self.eat("the heading of ") {
            let i = self.ident()?;
            self.expect(" is aligned with that of ")?;
            let j = self.ident()?;
            self.expect(" (within ")?;
            let kappa = self.constant("κ", |d| d.kappa)?;
            self.expect(")")?;
            return Ok(Formula::Atom(SpatialAtom::Oriented { i, j, kappa }));
        }
        if self.eat("along the x-axis, ") {
            return self.between(true);
        }
        if self.eat("along the y-axis, ") {
            return self.between(false);
        }

        let i = self.ident()?;
        if self.eat(" is in contact with ") {
            let j = self.ident()?;
            let eps = self.implicit_suffix("tolerance", |d| d.eps)?;
            return Ok(Formula::Atom(SpatialAtom::Touch { i, j, eps }));
        }
        if self.eat(" lies strictly inside ") {
            let j = self.ident()?;
            let rho = self.implicit_suffix("margin", |d| d.rho)?;
            return Ok(Formula::Atom(SpatialAtom::EnclIn { i, j, rho }));
        }
        if self.eat(" partially overlaps ") {
            let j = self.ident()?;
            let tau = self.implicit_suffix("margin", |d| d.tau)?;
            return Ok(Formula::Atom(SpatialAtom::Ovlp { i, j, tau }));
        }
        if self.eat(" overlaps ") {
            let j = self.ident()?;
            self.expect(" without containment")?;
            let (tau, rho) = if self.opts.symbolic_constants {
                (self.defaults.tau, self.defaults.rho)
            } else {
                self.expect(" (margin ")?;
                let tau = self.number()?;
                self.expect(", containment margin ")?;
                let rho = self.number()?;
                self.expect(")")?;
                (tau, rho)
            };
            return Ok(Formula::Atom(SpatialAtom::PartOvlp { i, j, tau, rho }));
        }
        if self.eat(" is strictly to the left of ") {
            let (j, kappa) = self.directional_tail()?;
            return Ok(Formula::Atom(SpatialAtom::LeftOf { i, j, kappa }));
        }
        if self.eat(" is strictly to the right of ") {
            let (j, kappa) = self.directional_tail()?;
            return Ok(Formula::Atom(SpatialAtom::RightOf { i, j, kappa }));
        }
        if self.eat(" is strictly above ") {
            let (j, kappa) = self.directional_tail()?;
            return Ok(Formula::Atom(SpatialAtom::Above { i, j, kappa }));
        }
        if self.eat(" is strictly below ") {
            let (j, kappa) = self.directional_tail()?;
            return Ok(Formula::Atom(SpatialAtom::Below { i, j, kappa }));
        }
        Err(self.fail("a spatial relation after the identifier"))
    }

    fn between(&mut self, x_axis: bool) -> Result<Formula, NlParseError> {
        let b = self.ident()?;
        self.expect(" lies strictly between ")?;
        let a = self.ident()?;
        self.expect(" and ")?;
        let c = self.ident()?;
        let kappa = self.implicit_suffix("margin", |d| d.kappa)?;
        Ok(Formula::Atom(if x_axis {
            SpatialAtom::BetweenPx { a, b, c, kappa }
        } else {
            SpatialAtom::BetweenPy { a, b, c, kappa }
        }))
    }

    fn directional_tail(&mut self) -> Result<(Ident, f64), NlParseError> {
        let j = self.ident()?;
        self.expect(" (margin ")?;
        let kappa = self.constant("κ", |d| d.kappa)?;
        self.expect(")")?;
        Ok((j, kappa))
    }

    /// A `" (label value)"` tail that symbolic mode omits entirely.
    fn implicit_suffix(
        &mut self,
        label: &str,
        pick: impl Fn(&SymbolicDefaults) -> f64,
    ) -> Result<f64, NlParseError> {
        if self.opts.symbolic_constants {
            Ok(pick(self.defaults))
        } else {
            self.expect(&format!(" ({label} "))?;
            let value = self.number()?;
            self.expect(")")?;
            Ok(value)
        }
    }

    fn constant(
        &mut self,
        symbol: &str,
        pick: impl Fn(&SymbolicDefaults) -> f64,
    ) -> Result<f64, NlParseError> {
        if self.opts.symbolic_constants {
            self.expect(symbol)?;
            Ok(pick(self.defaults))
        } else {
            self.number()
        }
    }

    fn ident(&mut self) -> Result<Ident, NlParseError> {
        let token: String = self
            .rest()
            .chars()
            .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
            .collect();
        if token.is_empty() {
            return Err(self.fail("identifier"));
        }
        match Ident::new(token.clone()) {
            Ok(id) => {
                self.pos += token.len();
                Ok(id)
            }
            Err(_) => Err(self.fail("identifier with `obj_` or `reg_` prefix")),
        }
    }

    fn number(&mut self) -> Result<f64, NlParseError> {
        let bytes = self.rest().as_bytes();
        let mut len = 0;
        while len < bytes.len() && bytes[len].is_ascii_digit() {
            len += 1;
        }
        if len < bytes.len() && bytes[len] == b'.' && bytes.get(len + 1).is_some_and(u8::is_ascii_digit)
        {
            len += 1;
            while len < bytes.len() && bytes[len].is_ascii_digit() {
                len += 1;
            }
        }
        if len == 0 {
            return Err(self.fail("number"));
        }
        let value = self.rest()[..len]
            .parse()
            .map_err(|_| self.fail("number"))?;
        self.pos += len;
        Ok(value)
    }

    fn interval(&mut self) -> Result<Interval, NlParseError> {
        let start = self.pos;
        self.expect("[")?;
        let a = self.seconds_to_step()?;
        self.expect(",")?;
        let b = self.seconds_to_step()?;
        self.expect("]")?;
        Interval::new(a, b).ok_or(NlParseError {
            pos: start,
            expected: format!("interval with a <= b, got [{a},{b}]"),
        })
    }

    fn seconds_to_step(&mut self) -> Result<usize, NlParseError> {
        let pos = self.pos;
        let seconds = self.number()?;
        let steps = seconds * self.opts.steps_per_second;
        let rounded = steps.round();
        if (steps - rounded).abs() > 1e-6 || rounded < 0.0 {
            return Err(NlParseError {
                pos,
                expected: format!(
                    "whole step count ({} seconds at {} steps/second)",
                    seconds, self.opts.steps_per_second
                ),
            });
        }
        Ok(rounded as usize)
    }
}
