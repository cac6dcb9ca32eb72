//! Recursive-descent parser.
//!
//! Grammar, lowest precedence first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := signed (('*' | '/') signed)*
//! signed  := '-' signed | power
//! power   := atom ('^' signed)?          // right-associative
//! atom    := number | identifier | function '(' sum ')' | '(' sum ')'
//! ```
//!
//! A unary minus applied directly to a numeric literal folds into a negative
//! constant.

use super::{BinaryOp, ExprError, Expression, Scope, UnaryOp};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let literal = &text[start..i];
            let value: f64 = literal.parse().map_err(|_| ExprError::Syntax {
                position: start,
                message: format!("malformed number `{literal}`"),
            })?;
            out.push((Token::Number(value), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Token::Ident(text[start..i].to_string()), start));
        } else {
            let tok = match c {
                '+' | '-' | '*' | '/' | '^' => Token::Op(c),
                '(' => Token::LParen,
                ')' => Token::RParen,
                // U+2212 minus sign
                _ if text[i..].starts_with('\u{2212}') => {
                    out.push((Token::Op('-'), start));
                    i += '\u{2212}'.len_utf8();
                    continue;
                }
                _ => {
                    let ch = text[i..].chars().next().unwrap_or(c);
                    return Err(ExprError::Syntax {
                        position: start,
                        message: format!("unexpected character `{ch}`"),
                    });
                }
            };
            out.push((tok, start));
            i += 1;
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end: usize,
    scope: &'a Scope,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn position(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(_, p)| *p)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax {
            position: self.position(),
            message: message.into(),
        })
    }

    fn sum(&mut self) -> Result<Expression, ExprError> {
        let mut lhs = self.product()?;
        while let Some(Token::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinaryOp::Add } else { BinaryOp::Sub };
            self.pos += 1;
            let rhs = self.product()?;
            lhs = Expression::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expression, ExprError> {
        let mut lhs = self.signed()?;
        while let Some(Token::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { BinaryOp::Mul } else { BinaryOp::Div };
            self.pos += 1;
            let rhs = self.signed()?;
            lhs = Expression::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn signed(&mut self) -> Result<Expression, ExprError> {
        if let Some(Token::Op('-')) = self.peek() {
            self.pos += 1;
            let inner = self.signed()?;
            return Ok(match inner {
                Expression::Constant(c) => Expression::Constant(-c),
                other => Expression::Unary(UnaryOp::Neg, Box::new(other)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expression, ExprError> {
        let base = self.atom()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.pos += 1;
            let exponent = self.signed()?;
            return Ok(Expression::Binary(
                BinaryOp::Pow,
                Box::new(base),
                Box::new(exponent),
            ));
        }
        Ok(base)
    }

    fn expect_rparen(&mut self, opened_at: usize) -> Result<(), ExprError> {
        match self.peek() {
            Some(Token::RParen) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(ExprError::Syntax {
                position: self.position(),
                message: format!("unbalanced parenthesis opened at position {opened_at}"),
            }),
        }
    }

    fn atom(&mut self) -> Result<Expression, ExprError> {
        let at = self.position();
        let Some(tok) = self.peek().cloned() else {
            return self.error("unexpected end of input");
        };
        self.pos += 1;
        match tok {
            Token::Number(x) => Ok(Expression::Constant(x)),
            Token::LParen => {
                let inner = self.sum()?;
                self.expect_rparen(at)?;
                Ok(inner)
            }
            Token::Ident(name) => {
                if let Some(Token::LParen) = self.peek() {
                    let Some(op) = UnaryOp::from_function_name(&name) else {
                        return Err(ExprError::Syntax {
                            position: at,
                            message: format!("unknown function `{name}`"),
                        });
                    };
                    let open = self.position();
                    self.pos += 1;
                    let arg = self.sum()?;
                    self.expect_rparen(open)?;
                    return Ok(Expression::Unary(op, Box::new(arg)));
                }
                match self.scope.resolve(&name) {
                    Some(var) => Ok(Expression::Variable(var)),
                    None => Err(ExprError::UnknownIdentifier { name, position: at }),
                }
            }
            Token::RParen => Err(ExprError::Syntax {
                position: at,
                message: "unbalanced closing parenthesis".into(),
            }),
            Token::Op(c) => Err(ExprError::Syntax {
                position: at,
                message: format!("dangling operator `{c}`"),
            }),
        }
    }
}

/// Parses `text` against the coordinate and parameter tables of `scope`.
pub fn parse(text: &str, scope: &Scope) -> Result<Expression, ExprError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(ExprError::Syntax {
            position: 0,
            message: "empty expression".into(),
        });
    }
    let mut p = Parser {
        tokens,
        pos: 0,
        end: text.len(),
        scope,
    };
    let e = p.sum()?;
    match p.peek() {
        None => Ok(e),
        Some(Token::RParen) => p.error("unbalanced closing parenthesis"),
        Some(_) => p.error("unexpected token after expression"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::VarKind;

    fn scope() -> Scope {
        Scope::new(&["x", "y", "theta", "phi"], &["M", "R"]).unwrap()
    }

    fn kinds(e: &Expression) -> Vec<(String, VarKind)> {
        fn walk(e: &Expression, out: &mut Vec<(String, VarKind)>) {
            match e {
                Expression::Constant(_) => {}
                Expression::Variable(v) => out.push((v.name.clone(), v.kind)),
                Expression::Unary(_, a) => walk(a, out),
                Expression::Binary(_, a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(e, &mut out);
        out
    }

    #[test]
    fn kinetic_energy_tree() {
        let e = scope().parse("0.5*M*(dx^2+dy^2)").unwrap();
        assert!(matches!(e, Expression::Binary(BinaryOp::Mul, _, _)));
        let vars = kinds(&e);
        assert_eq!(
            vars,
            vec![
                ("M".to_string(), VarKind::Parameter),
                ("dx".to_string(), VarKind::Velocity),
                ("dy".to_string(), VarKind::Velocity),
            ]
        );
    }

    #[test]
    fn rolling_constraint_variables() {
        let e = scope().parse("dx - R*cos(theta)*dphi").unwrap();
        let names = e.free_variables();
        let expected: Vec<&str> = vec!["R", "dphi", "dx", "theta"];
        assert_eq!(names.iter().map(String::as_str).collect::<Vec<_>>(), expected);
    }

    #[test]
    fn precedence_and_associativity() {
        let s = scope();
        let b = crate::expr::Bindings::from_pairs(&[("x", 2.0), ("y", 3.0)]);
        let cases = [
            ("x + y * 2", 8.0),
            ("x * y ^ 2", 18.0),
            ("2 ^ 3 ^ 2", 512.0),
            ("-x ^ 2", -4.0),
            ("x - y - 1", -2.0),
            ("x / y / 2", 2.0 / 3.0 / 2.0),
            ("  ( x+y ) *x ", 10.0),
            ("2^-1", 0.5),
            ("1.5e1 + .5", 15.5),
        ];
        for (text, want) in cases {
            assert_eq!(s.parse(text).unwrap().eval(&b).unwrap(), want, "{text}");
        }
    }

    #[test]
    fn dangling_operator_reports_end_of_input() {
        let err = scope().parse("dx +").unwrap_err();
        assert_eq!(
            err,
            ExprError::Syntax {
                position: 4,
                message: "unexpected end of input".into()
            }
        );
    }

    #[test]
    fn malformed_inputs() {
        let s = scope();
        assert!(matches!(s.parse("(dx + 1"), Err(ExprError::Syntax { .. })));
        assert!(matches!(s.parse("dx + 1)"), Err(ExprError::Syntax { .. })));
        assert!(matches!(s.parse("foo(x)"), Err(ExprError::Syntax { position: 0, .. })));
        assert!(matches!(s.parse("* x"), Err(ExprError::Syntax { .. })));
        assert!(matches!(s.parse(""), Err(ExprError::Syntax { .. })));
        assert!(matches!(s.parse("x $ y"), Err(ExprError::Syntax { position: 2, .. })));
        assert!(matches!(
            s.parse("z + 1"),
            Err(ExprError::UnknownIdentifier { position: 0, .. })
        ));
    }
}
