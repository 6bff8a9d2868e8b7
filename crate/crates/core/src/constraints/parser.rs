//! Text syntax for constraint expressions.
//!
//! ```text
//! expr    := conj ('|' conj)*
//! conj    := unary ('&' unary)*
//! unary   := '!' unary | '(' expr ')' | atom
//! atom    := k1..k6 | y1 | y2 | o1 | o2
//! ```
//!
//! `!` binds tightest, then `&`, then `|`. Whitespace is ignored.

use super::{Atom, ConstraintExpr};
use crate::error::{Error, Result};

pub fn parse_constraint_string(text: &str) -> Result<ConstraintExpr> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let e = p.disjunction()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error(format!("unexpected `{}`", p.src[p.pos] as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn disjunction(&mut self) -> Result<ConstraintExpr> {
        let mut items = vec![self.conjunction()?];
        while self.peek() == Some(b'|') {
            self.pos += 1;
            items.push(self.conjunction()?);
        }
        Ok(join(items, ConstraintExpr::Or))
    }

    fn conjunction(&mut self) -> Result<ConstraintExpr> {
        let mut items = vec![self.unary()?];
        while self.peek() == Some(b'&') {
            self.pos += 1;
            items.push(self.unary()?);
        }
        Ok(join(items, ConstraintExpr::And))
    }

    fn unary(&mut self) -> Result<ConstraintExpr> {
        match self.peek() {
            Some(b'!') => {
                self.pos += 1;
                Ok(ConstraintExpr::not(self.unary()?))
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.disjunction()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_alphanumeric() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                Atom::from_name(name)
                    .map(ConstraintExpr::Atom)
                    .ok_or_else(|| Error::UnknownAtom {
                        offset: start,
                        name: name.to_string(),
                    })
            }
            Some(c) => Err(self.error(format!("expected an atom, `!` or `(`, found `{}`", c as char))),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

/// Builds an n-ary node, splicing in same-kind children from parentheses.
fn join(items: Vec<ConstraintExpr>, make: fn(Vec<ConstraintExpr>) -> ConstraintExpr) -> ConstraintExpr {
    if items.len() == 1 {
        return items.into_iter().next().expect("one item");
    }
    make(items).normalize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn atom(a: Atom) -> ConstraintExpr {
        ConstraintExpr::Atom(a)
    }

    #[test]
    fn precedence_of_mixed_connectives() {
        let e = parse_constraint_string("k1&k2&!k5|k3").unwrap();
        let expected = ConstraintExpr::Or(vec![
            ConstraintExpr::And(vec![atom(Atom::K1), atom(Atom::K2), ConstraintExpr::not(atom(Atom::K5))]),
            atom(Atom::K3),
        ]);
        assert_eq!(e, expected);
        assert_eq!(e.to_string(), "k1&k2&!k5|k3");
    }

    #[test]
    fn single_atom() {
        assert_eq!(parse_constraint_string("k1").unwrap(), atom(Atom::K1));
        assert_eq!(parse_constraint_string("  Y2 ").unwrap(), atom(Atom::Y2));
    }

    #[test]
    fn doubled_operator_reports_offset() {
        match parse_constraint_string("k1&&k2") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn other_errors() {
        assert!(matches!(
            parse_constraint_string("k1&k9"),
            Err(Error::UnknownAtom { offset: 3, .. })
        ));
        assert!(matches!(parse_constraint_string("(k1|k2"), Err(Error::Syntax { offset: 6, .. })));
        assert!(matches!(parse_constraint_string(""), Err(Error::Syntax { offset: 0, .. })));
        assert!(matches!(parse_constraint_string("k1 k2"), Err(Error::Syntax { offset: 3, .. })));
    }

    #[test]
    fn parentheses_flatten_and_group() {
        let e = parse_constraint_string("(k1&k2)&k3").unwrap();
        assert_eq!(e, ConstraintExpr::And(vec![atom(Atom::K1), atom(Atom::K2), atom(Atom::K3)]));
        let g = parse_constraint_string("k1&(k2|k3)").unwrap();
        assert_eq!(g.to_string(), "k1&(k2|k3)");
        let n = parse_constraint_string("!(k1&k2)|!!k3").unwrap();
        assert_eq!(n.to_string(), "!(k1&k2)|!!k3");
    }

    fn arb_expr() -> impl Strategy<Value = ConstraintExpr> {
        let leaf = (0..Atom::ALL.len()).prop_map(|i| ConstraintExpr::Atom(Atom::ALL[i]));
        leaf.prop_recursive(4, 32, 4, |inner| {
            prop_oneof![
                inner.clone().prop_map(ConstraintExpr::not),
                proptest::collection::vec(inner.clone(), 2..4).prop_map(ConstraintExpr::And),
                proptest::collection::vec(inner, 2..4).prop_map(ConstraintExpr::Or),
            ]
        })
        .prop_map(ConstraintExpr::normalize)
    }

    proptest! {
        #[test]
        fn print_then_parse_is_identity(e in arb_expr()) {
            let printed = e.to_string();
            prop_assert_eq!(parse_constraint_string(&printed).unwrap(), e);
        }
    }
}
