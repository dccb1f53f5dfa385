//! Recursive-descent parser for the canonical machine syntax.

use super::{Formula, Ident, IdentError, Interval, SpatialAtom};

/// Error produced by [`parse_formula`], carrying the byte offset of the fault.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: expected {expected}, found {found}")]
    Syntax {
        pos: usize,
        expected: String,
        found: String,
    },
    #[error("unknown predicate `{name}` at {pos}")]
    UnknownPredicate { pos: usize, name: String },
    #[error("arity error at {pos}: `{name}` takes {expected_args} arguments and {expected_consts} constants, found {found_args}/{found_consts}")]
    Arity {
        pos: usize,
        name: String,
        expected_args: usize,
        expected_consts: usize,
        found_args: usize,
        found_consts: usize,
    },
    #[error("interval error at {pos}: [{a},{b}] has a > b")]
    Interval { pos: usize, a: usize, b: usize },
    #[error("duplicate argument `{name}` at {pos}")]
    DuplicateArg { pos: usize, name: String },
    #[error("bad identifier at {pos}: {source}")]
    Ident { pos: usize, source: IdentError },
}

/// Parses the canonical machine syntax into a [`Formula`].
///
/// The grammar is LL with explicit parentheses: `!`, `&`, `|`, `->`, `G[a,b]`,
/// `F[a,b]`, `U[a,b]`, and atoms spelled `name(args;constants)`. Interval
/// bounds with `a > b` and repeated identifier arguments inside one atom are
/// rejected during parsing; other semantic invariants (e.g. positive
/// constants) are left to [`super::validate_formula`].
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser { input: text, pos: 0 };
    let formula = p.formula()?;
    if p.pos < p.input.len() {
        return Err(p.err("end of input"));
    }
    Ok(formula)
}

struct Parser<'a> {
    input: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, expected: &str) -> ParseError {
        let found = match self.rest().chars().next() {
            Some(c) => format!("`{c}`"),
            None => "end of input".to_string(),
        };
        ParseError::Syntax {
            pos: self.pos,
            expected: expected.to_string(),
            found,
        }
    }

    fn rest(&self) -> &'a str {
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

    fn expect(&mut self, literal: &str) -> Result<(), ParseError> {
        if self.eat(literal) {
            Ok(())
        } else {
            Err(self.err(&format!("`{literal}`")))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        if self.eat("!") {
            self.expect("(")?;
            let inner = self.formula()?;
            self.expect(")")?;
            return Ok(Formula::not(inner));
        }
        if self.rest().starts_with("G[") {
            self.pos += 1;
            let iv = self.interval()?;
            self.expect("(")?;
            let inner = self.formula()?;
            self.expect(")")?;
            return Ok(Formula::always(iv, inner));
        }
        if self.rest().starts_with("F[") {
            self.pos += 1;
            let iv = self.interval()?;
            self.expect("(")?;
            let inner = self.formula()?;
            self.expect(")")?;
            return Ok(Formula::eventually(iv, inner));
        }
        if self.eat("(") {
            let first = self.formula()?;
            return self.group_tail(first);
        }
        self.atom()
    }

    /// Parses the connective part of `(f ...)` after the first operand.
    fn group_tail(&mut self, first: Formula) -> Result<Formula, ParseError> {
        if self.eat(" & ") {
            let mut children = vec![first, self.formula()?];
            while self.eat(" & ") {
                children.push(self.formula()?);
            }
            self.expect(")")?;
            return Ok(Formula::And(children));
        }
        if self.eat(" | ") {
            let mut children = vec![first, self.formula()?];
            while self.eat(" | ") {
                children.push(self.formula()?);
            }
            self.expect(")")?;
            return Ok(Formula::Or(children));
        }
        if self.eat(" -> ") {
            let rhs = self.formula()?;
            self.expect(")")?;
            return Ok(Formula::implies(first, rhs));
        }
        if self.eat(" U") {
            let iv = self.interval()?;
            self.expect(" ")?;
            let rhs = self.formula()?;
            self.expect(")")?;
            return Ok(Formula::until(iv, first, rhs));
        }
        Err(self.err("` & `, ` | `, ` -> `, or ` U[a,b] `"))
    }

    fn interval(&mut self) -> Result<Interval, ParseError> {
        let start = self.pos;
        self.expect("[")?;
        let a = self.integer()?;
        self.expect(",")?;
        let b = self.integer()?;
        self.expect("]")?;
        Interval::new(a, b).ok_or(ParseError::Interval { pos: start, a, b })
    }

    fn integer(&mut self) -> Result<usize, ParseError> {
        let digits: String = self.rest().chars().take_while(|c| c.is_ascii_digit()).collect();
        if digits.is_empty() {
            return Err(self.err("integer"));
        }
        self.pos += digits.len();
        digits.parse().map_err(|_| self.err("integer"))
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let start = self.pos;
        let bytes = self.rest().as_bytes();
        let mut len = 0;
        while len < bytes.len() && bytes[len].is_ascii_digit() {
            len += 1;
        }
        if len < bytes.len() && bytes[len] == b'.' {
            len += 1;
            while len < bytes.len() && bytes[len].is_ascii_digit() {
                len += 1;
            }
        }
        if len == 0 {
            return Err(self.err("number"));
        }
        self.pos += len;
        self.input[start..start + len]
            .parse()
            .map_err(|_| self.err("number"))
    }

    fn ident(&mut self) -> Result<Ident, ParseError> {
        let start = self.pos;
        let token: String = self
            .rest()
            .chars()
            .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
            .collect();
        if token.is_empty() {
            return Err(self.err("identifier"));
        }
        self.pos += token.len();
        Ident::new(token).map_err(|source| ParseError::Ident { pos: start, source })
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let start = self.pos;
        let name: String = self
            .rest()
            .chars()
            .take_while(|c| c.is_ascii_alphanumeric())
            .collect();
        if name.is_empty() {
            return Err(self.err("atom, `!`, `G`, `F`, or `(`"));
        }
        self.pos += name.len();
        let (n_args, n_consts) = match name.as_str() {
            "touch" | "closeTo" | "farFrom" | "ovlp" | "enclIn" | "leftOf" | "rightOf"
            | "above" | "below" | "oriented" => (2, 1),
            "partOvlp" => (2, 2),
            "betweenPx" | "betweenPy" => (3, 1),
            _ => {
                return Err(ParseError::UnknownPredicate { pos: start, name });
            }
        };

        self.expect("(")?;
        let mut args = vec![self.ident()?];
        while self.eat(",") {
            args.push(self.ident()?);
        }
        self.expect(";")?;
        let mut consts = vec![self.number()?];
        while self.eat(",") {
            consts.push(self.number()?);
        }
        self.expect(")")?;

        if args.len() != n_args || consts.len() != n_consts {
            return Err(ParseError::Arity {
                pos: start,
                name,
                expected_args: n_args,
                expected_consts: n_consts,
                found_args: args.len(),
                found_consts: consts.len(),
            });
        }
        for (k, a) in args.iter().enumerate() {
            if args[k + 1..].contains(a) {
                return Err(ParseError::DuplicateArg {
                    pos: start,
                    name: a.name().to_string(),
                });
            }
        }

        let atom = build_atom(&name, args, consts);
        Ok(Formula::Atom(atom))
    }
}

fn build_atom(name: &str, args: Vec<Ident>, consts: Vec<f64>) -> SpatialAtom {
    let mut args = args.into_iter();
    match name {
        "touch" => SpatialAtom::Touch {
            i: args.next().unwrap(),
            j: args.next().unwrap(),
            eps: consts[0],
        },
        "closeTo" => SpatialAtom::CloseTo {
            i: args.next().unwrap(),
            j: args.next().unwrap(),
            eps_c: consts[0],
        },
        "farFrom" => SpatialAtom::FarFrom {
            i: args.next().unwrap(),
            j: args.next().unwrap(),
            eps_f: consts[0],
        },
        "ovlp" => SpatialAtom::Ovlp {
            i: args.next().unwrap(),
            j: args.next().unwrap(),
            tau: consts[0],
        },
        "partOvlp" => SpatialAtom::PartOvlp {
            i: args.next().unwrap(),
            j: args.next().unwrap(),
            tau: consts[0],
            rho: consts[1],
        },
        "enclIn" => SpatialAtom::EnclIn {
            i: args.next().unwrap(),
            j: args.next().unwrap(),
            rho: consts[0],
        },
        "leftOf" => SpatialAtom::LeftOf {
            i: args.next().unwrap(),
            j: args.next().unwrap(),
            kappa: consts[0],
        },
        "rightOf" => SpatialAtom::RightOf {
            i: args.next().unwrap(),
            j: args.next().unwrap(),
            kappa: consts[0],
        },
        "above" => SpatialAtom::Above {
            i: args.next().unwrap(),
            j: args.next().unwrap(),
            kappa: consts[0],
        },
        "below" => SpatialAtom::Below {
            i: args.next().unwrap(),
            j: args.next().unwrap(),
            kappa: consts[0],
        },
        "betweenPx" => SpatialAtom::BetweenPx {
            a: args.next().unwrap(),
            b: args.next().unwrap(),
            c: args.next().unwrap(),
            kappa: consts[0],
        },
        "betweenPy" => SpatialAtom::BetweenPy {
            a: args.next().unwrap(),
            b: args.next().unwrap(),
            c: args.next().unwrap(),
            kappa: consts[0],
        },
        "oriented" => SpatialAtom::Oriented {
            i: args.next().unwrap(),
            j: args.next().unwrap(),
            kappa: consts[0],
        },
        _ => unreachable!("arity table covers all predicate names"),
    }
}
