//! Text syntax shared by formulas and templates.
//!
//! ```text
//! expr  := unary [ ("and" | "or" | "S" window) unary ]
//! unary := "not" unary | ("P" | "A") window unary | atom
//! atom  := "true" | "false" | "(" expr ")" | IDENT ("<" | ">") value
//! window:= "[" bound "," bound "]"      bound := INT | ?name
//! value := NUMBER | ?name
//! ```
//!
//! Binary operators never chain; `a and b or c` is rejected, the operands
//! must be parenthesized.

use thiserror::Error;

use crate::formula::{Cmp, Expr, Formula, Interval};
use crate::template::{Slot, SlotTree, Window};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{name}` at byte {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("interval [{a},{b}] at byte {pos} has a > b")]
    IntervalOrder { a: u32, b: u32, pos: usize },
    #[error("parameter `?{name}` at byte {pos} is not allowed in a concrete formula")]
    UnexpectedParameter { name: String, pos: usize },
    #[error("parameter `?{name}` occurs more than once")]
    DuplicateParameter { name: String },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Param(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Lt,
    Gt,
    Eof,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (tok, at) = lx.next()?;
            let done = tok == Tok::Eof;
            out.push((tok, at));
            if done {
                return Ok(out);
            }
        }
    }

    fn peek_char(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek_char() {
            if !pred(c) {
                break;
            }
            self.pos += c.len_utf8();
        }
        &self.src[start..self.pos]
    }

    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        self.take_while(char::is_whitespace);
        let at = self.pos;
        let Some(c) = self.peek_char() else {
            return Ok((Tok::Eof, at));
        };
        let simple = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBrack),
            ']' => Some(Tok::RBrack),
            ',' => Some(Tok::Comma),
            '<' => Some(Tok::Lt),
            '>' => Some(Tok::Gt),
            _ => None,
        };
        if let Some(tok) = simple {
            self.pos += 1;
            return Ok((tok, at));
        }
        if c == '?' {
            self.pos += 1;
            let name = self.take_while(is_ident_char);
            if name.is_empty() {
                return Err(ParseError::Syntax { pos: at, msg: "expected parameter name after `?`".into() });
            }
            return Ok((Tok::Param(name.to_string()), at));
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let name = self.take_while(is_ident_char);
            return Ok((Tok::Ident(name.to_string()), at));
        }
        if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' {
            self.pos += 1;
            let mut prev = c;
            while let Some(d) = self.peek_char() {
                let ok = d.is_ascii_digit()
                    || d == '.'
                    || d == 'e'
                    || d == 'E'
                    || ((d == '-' || d == '+') && (prev == 'e' || prev == 'E'));
                if !ok {
                    break;
                }
                prev = d;
                self.pos += 1;
            }
            return Ok((Tok::Num(self.src[at..self.pos].to_string()), at));
        }
        Err(ParseError::Syntax { pos: at, msg: format!("unexpected character `{c}`") })
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

const KEYWORDS: [&str; 5] = ["true", "false", "not", "and", "or"];

struct Parser<'s> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    schema: Option<&'s [String]>,
    params: Vec<String>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax { pos: self.pos(), msg: msg.into() })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.fail(format!("expected {what}"))
        }
    }

    fn is_temporal(&self, name: &str) -> bool {
        matches!(self.peek(), Tok::Ident(n) if n == name) && *self.peek2() == Tok::LBrack
    }

    fn expr(&mut self) -> Result<SlotTree, ParseError> {
        let lhs = self.unary()?;
        let out = match self.peek() {
            Tok::Ident(k) if k == "and" => {
                self.bump();
                Expr::and(lhs, self.unary()?)
            }
            Tok::Ident(k) if k == "or" => {
                self.bump();
                Expr::or(lhs, self.unary()?)
            }
            _ if self.is_temporal("S") => {
                self.bump();
                let w = self.window()?;
                Expr::since(w, lhs, self.unary()?)
            }
            _ => return Ok(lhs),
        };
        let chained = matches!(self.peek(), Tok::Ident(k) if k == "and" || k == "or") || self.is_temporal("S");
        if chained {
            return self.fail("binary operators must be parenthesized explicitly");
        }
        Ok(out)
    }

    fn unary(&mut self) -> Result<SlotTree, ParseError> {
        if matches!(self.peek(), Tok::Ident(k) if k == "not") {
            self.bump();
            return Ok(Expr::not(self.unary()?));
        }
        if self.is_temporal("P") || self.is_temporal("A") {
            let prev = self.is_temporal("P");
            self.bump();
            let w = self.window()?;
            let arg = self.unary()?;
            return Ok(if prev { Expr::prev(w, arg) } else { Expr::always(w, arg) });
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<SlotTree, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(k) if k == "true" => Ok(Expr::True),
            Tok::Ident(k) if k == "false" => Ok(Expr::falsity()),
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                if let Some(schema) = self.schema {
                    if !schema.contains(&name) {
                        return Err(ParseError::UnknownVariable { name, pos });
                    }
                }
                let cmp = match self.bump() {
                    Tok::Lt => Cmp::Lt,
                    Tok::Gt => Cmp::Gt,
                    _ => return Err(ParseError::Syntax { pos, msg: format!("expected `<` or `>` after `{name}`") }),
                };
                let value = self.value()?;
                Ok(Expr::Pred { var: name, cmp, value })
            }
            _ => Err(ParseError::Syntax { pos, msg: "expected a formula".into() }),
        }
    }

    fn param(&mut self, name: String) -> Result<String, ParseError> {
        if self.params.contains(&name) {
            return Err(ParseError::DuplicateParameter { name });
        }
        self.params.push(name.clone());
        Ok(name)
    }

    fn value(&mut self) -> Result<Slot<f64>, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(text) => match text.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(Slot::Fixed(v)),
                _ => Err(ParseError::Syntax { pos, msg: format!("invalid number `{text}`") }),
            },
            Tok::Param(name) => Ok(Slot::Param(self.param(name)?)),
            _ => Err(ParseError::Syntax { pos, msg: "expected a number or parameter".into() }),
        }
    }

    fn bound(&mut self) -> Result<Slot<u32>, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(text) => text.parse::<u32>().map(Slot::Fixed).map_err(|_| ParseError::Syntax {
                pos,
                msg: format!("interval bound `{text}` is not a non-negative integer"),
            }),
            Tok::Param(name) => Ok(Slot::Param(self.param(name)?)),
            _ => Err(ParseError::Syntax { pos, msg: "expected an interval bound".into() }),
        }
    }

    fn window(&mut self) -> Result<Window, ParseError> {
        let pos = self.pos();
        self.expect(Tok::LBrack, "`[`")?;
        let lo = self.bound()?;
        self.expect(Tok::Comma, "`,`")?;
        let hi = self.bound()?;
        self.expect(Tok::RBrack, "`]`")?;
        if let (Slot::Fixed(a), Slot::Fixed(b)) = (&lo, &hi) {
            if a > b {
                return Err(ParseError::IntervalOrder { a: *a, b: *b, pos });
            }
        }
        Ok(Window { lo, hi })
    }
}

/// Parses text that may contain `?name` parameter slots. Returns the tree
/// and the parameter names in order of appearance.
pub(crate) fn parse_slots(text: &str, schema: Option<&[String]>) -> Result<(SlotTree, Vec<String>), ParseError> {
    let toks = Lexer::tokens(text)?;
    let mut p = Parser { toks, at: 0, schema, params: Vec::new() };
    let tree = p.expr()?;
    if *p.peek() != Tok::Eof {
        return p.fail("unexpected trailing input");
    }
    Ok((tree, p.params))
}

/// Parses a concrete formula whose variables must all appear in `schema`.
pub fn parse_formula(text: &str, schema: &[String]) -> Result<Formula, ParseError> {
    parse_formula_inner(text, Some(schema))
}

/// Parses a concrete formula without checking variable names.
pub fn parse_formula_unchecked(text: &str) -> Result<Formula, ParseError> {
    parse_formula_inner(text, None)
}

fn parse_formula_inner(text: &str, schema: Option<&[String]>) -> Result<Formula, ParseError> {
    let (tree, params) = parse_slots(text, schema)?;
    if let Some(name) = params.into_iter().next() {
        let pos = text.find(&format!("?{name}")).unwrap_or(0);
        return Err(ParseError::UnexpectedParameter { name, pos });
    }
    let unreachable = || ParseError::Syntax { pos: 0, msg: "parameter slot".into() };
    tree.try_map(&mut |c: &Slot<f64>| c.fixed().copied().ok_or_else(unreachable), &mut |w: &Window| match (
        w.lo.fixed(),
        w.hi.fixed(),
    ) {
        (Some(&a), Some(&b)) => Interval::new(a, b).ok_or(ParseError::IntervalOrder { a, b, pos: 0 }),
        _ => Err(unreachable()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn iv(a: u32, b: u32) -> Interval {
        Interval::new(a, b).unwrap()
    }

    #[test]
    fn parses_examples() {
        let s = schema(&["x", "y"]);
        assert_eq!(
            parse_formula("P[0,3] (x > 5)", &s).unwrap(),
            Formula::prev(iv(0, 3), Formula::pred("x", Cmp::Gt, 5.0))
        );
        assert_eq!(parse_formula("true", &s).unwrap(), Formula::True);
        assert_eq!(
            parse_formula("(P[0,5] (y < 0)) S[0,20] (x > 12)", &s).unwrap(),
            Formula::since(
                iv(0, 20),
                Formula::prev(iv(0, 5), Formula::pred("y", Cmp::Lt, 0.0)),
                Formula::pred("x", Cmp::Gt, 12.0)
            )
        );
    }

    #[test]
    fn unary_chains_and_sugar() {
        let s = schema(&["x"]);
        assert_eq!(
            parse_formula("not not (x < 2)", &s).unwrap(),
            Formula::not(Formula::not(Formula::pred("x", Cmp::Lt, 2.0)))
        );
        assert_eq!(parse_formula("false", &s).unwrap(), Formula::falsity());
        assert_eq!(
            parse_formula("A[1,2] x > -1.5e1", &s).unwrap(),
            Formula::always(iv(1, 2), Formula::pred("x", Cmp::Gt, -15.0))
        );
    }

    #[test]
    fn errors_carry_positions() {
        let s = schema(&["x"]);
        assert_eq!(parse_formula("P[4,3] (x > 1)", &s), Err(ParseError::IntervalOrder { a: 4, b: 3, pos: 1 }));
        assert_eq!(
            parse_formula("x > 1 and z < 2", &s),
            Err(ParseError::UnknownVariable { name: "z".into(), pos: 10 })
        );
        assert!(matches!(parse_formula("(x > 1) and (x < 2) or true", &s), Err(ParseError::Syntax { pos: 20, .. })));
        assert!(matches!(parse_formula("x > ", &s), Err(ParseError::Syntax { pos: 4, .. })));
        assert!(matches!(parse_formula("x > ?c", &s), Err(ParseError::UnexpectedParameter { .. })));
        assert!(matches!(parse_formula("P[1.5,2] x > 1", &s), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_formula("(x > 1", &s), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn variables_named_like_operators() {
        let s = schema(&["P", "S"]);
        let f = parse_formula("(P > 1) S[0,2] (S < 3)", &s).unwrap();
        assert_eq!(f.to_string(), "(P > 1) S[0,2] (S < 3)");
        assert_eq!(parse_formula(&f.to_string(), &s).unwrap(), f);
    }

    #[test]
    fn slots_record_parameter_order() {
        let (_, params) = parse_slots("(P[?a,?b] (qGust < ?c)) and (wGust < ?d)", None).unwrap();
        assert_eq!(params, vec!["a", "b", "c", "d"]);
        assert_eq!(
            parse_slots("(x < ?a) and (y < ?a)", None).unwrap_err(),
            ParseError::DuplicateParameter { name: "a".into() }
        );
    }
}
