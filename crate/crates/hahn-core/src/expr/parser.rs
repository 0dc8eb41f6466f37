//! Lexer and recursive-descent parser. Every error carries the byte offset
//! of the offending token (end of input for truncated sources).

use crate::error::{HahnError, Result};

use super::{BinOp, Builtin, Expr, Func, Var, VarSet};

/// Hard cap on grammar recursion. Deeply nested input (mostly fuzzer-made
/// parenthesis towers) fails with a parse error instead of exhausting the
/// stack.
const MAX_DEPTH: u32 = 256;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(x) => format!("number {x}"),
            Tok::Ident(name) => format!("identifier `{name}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
        }
    }
}

fn syntax_error(offset: usize, message: impl Into<String>) -> HahnError {
    HahnError::Parse {
        offset,
        message: message.into(),
    }
}

fn lex(source: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = source.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let start = i;
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
            }
            b'+' => {
                out.push((Tok::Plus, start));
                i += 1;
            }
            b'-' => {
                out.push((Tok::Minus, start));
                i += 1;
            }
            b'*' => {
                out.push((Tok::Star, start));
                i += 1;
            }
            b'/' => {
                out.push((Tok::Slash, start));
                i += 1;
            }
            b'^' => {
                out.push((Tok::Caret, start));
                i += 1;
            }
            b'(' => {
                out.push((Tok::LParen, start));
                i += 1;
            }
            b')' => {
                out.push((Tok::RParen, start));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                i = scan_number(bytes, start)?;
                let text = &source[start..i];
                let value: f64 = text
                    .parse()
                    .map_err(|_| syntax_error(start, format!("invalid number `{text}`")))?;
                if !value.is_finite() {
                    return Err(syntax_error(
                        start,
                        format!("numeric literal `{text}` is out of range"),
                    ));
                }
                out.push((Tok::Num(value), start));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(source[start..i].to_string()), start));
            }
            _ => {
                // Report the full UTF-8 character, not a lone byte.
                let ch = source[start..].chars().next().unwrap_or('\u{fffd}');
                return Err(syntax_error(start, format!("unexpected character `{ch}`")));
            }
        }
    }
    Ok(out)
}

/// Scan digits [. digits] [e|E [+|-] digits], returning the end offset.
fn scan_number(bytes: &[u8], start: usize) -> Result<usize> {
    let mut i = start;
    let mut saw_digit = false;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        saw_digit = true;
        i += 1;
    }
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            saw_digit = true;
            i += 1;
        }
    }
    if !saw_digit {
        return Err(syntax_error(start, "expected digits in number"));
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        let exp_start = j;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        if j > exp_start {
            i = j;
        }
        // No digits after the marker: leave `e`/`E` for the identifier
        // lexer? It is glued to the number, so reject it outright.
        if j == exp_start {
            return Err(syntax_error(
                i,
                "exponent marker must be followed by digits",
            ));
        }
    }
    Ok(i)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_offset: usize,
    allowed: VarSet,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|(_, o)| *o)
            .unwrap_or(self.end_offset)
    }

    fn bump(&mut self) -> Option<Tok> {
        let tok = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(syntax_error(
                self.offset(),
                format!("expected {what}, found {}", t.describe()),
            )),
            None => Err(syntax_error(
                self.end_offset,
                format!("expected {what}, found end of input"),
            )),
        }
    }

    fn guard(&self, depth: u32) -> Result<()> {
        if depth > MAX_DEPTH {
            Err(syntax_error(self.offset(), "expression nesting too deep"))
        } else {
            Ok(())
        }
    }

    fn parse_expr(&mut self, depth: u32) -> Result<Expr> {
        self.guard(depth)?;
        let mut lhs = self.parse_term(depth + 1)?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.parse_term(depth + 1)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_term(&mut self, depth: u32) -> Result<Expr> {
        self.guard(depth)?;
        let mut lhs = self.parse_unary(depth + 1)?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.parse_unary(depth + 1)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self, depth: u32) -> Result<Expr> {
        self.guard(depth)?;
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.pos += 1;
            let inner = self.parse_unary(depth + 1)?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.parse_power(depth + 1)
    }

    fn parse_power(&mut self, depth: u32) -> Result<Expr> {
        self.guard(depth)?;
        let base = self.parse_atom(depth + 1)?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.pos += 1;
            let exponent = self.parse_exponent(depth + 1)?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    /// An exponent is a numeric literal or a parenthesized expression,
    /// optionally followed by another `^` exponent (right-associative).
    fn parse_exponent(&mut self, depth: u32) -> Result<Expr> {
        self.guard(depth)?;
        let unit = match self.peek() {
            Some(Tok::Num(x)) => {
                let x = *x;
                self.pos += 1;
                Expr::Literal(x)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.parse_expr(depth + 1)?;
                self.expect(Tok::RParen, "`)`")?;
                inner
            }
            Some(t) => {
                return Err(syntax_error(
                    self.offset(),
                    format!(
                        "exponent must be a numeric literal or a parenthesized \
                         expression, found {}",
                        t.describe()
                    ),
                ));
            }
            None => {
                return Err(syntax_error(
                    self.end_offset,
                    "exponent must be a numeric literal or a parenthesized \
                     expression, found end of input",
                ));
            }
        };
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.pos += 1;
            let rest = self.parse_exponent(depth + 1)?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(unit), Box::new(rest)));
        }
        Ok(unit)
    }

    fn parse_atom(&mut self, depth: u32) -> Result<Expr> {
        self.guard(depth)?;
        let offset = self.offset();
        match self.bump() {
            Some(Tok::Num(x)) => Ok(Expr::Literal(x)),
            Some(Tok::LParen) => {
                let inner = self.parse_expr(depth + 1)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => self.resolve_ident(&name, offset, depth),
            Some(t) => Err(syntax_error(
                offset,
                format!("expected a value, found {}", t.describe()),
            )),
            None => Err(syntax_error(
                self.end_offset,
                "expected a value, found end of input",
            )),
        }
    }

    fn resolve_ident(&mut self, name: &str, offset: usize, depth: u32) -> Result<Expr> {
        if let Some(func) = Func::from_name(name) {
            if !matches!(self.peek(), Some(Tok::LParen)) {
                return Err(syntax_error(
                    self.offset(),
                    format!("expected `(` after function name `{name}`"),
                ));
            }
            self.pos += 1;
            let arg = self.parse_expr(depth + 1)?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        let builtin = match name {
            "q" => Some(Builtin::Q),
            "omega" => Some(Builtin::Omega),
            "omega0" => Some(Builtin::Omega0),
            "pi" => Some(Builtin::Pi),
            "e" => Some(Builtin::E),
            _ => None,
        };
        if let Some(b) = builtin {
            return Ok(Expr::Const(b));
        }
        let var = match name {
            "t" => Some(Var::T),
            "u" => Some(Var::U),
            "v" => Some(Var::V),
            _ => None,
        };
        match var {
            Some(v) if self.allowed.contains(v) => Ok(Expr::Var(v)),
            _ => Err(HahnError::UnknownIdentifier {
                name: name.to_string(),
                offset,
            }),
        }
    }
}

pub(super) fn parse(source: &str, allowed_vars: VarSet) -> Result<Expr> {
    let toks = lex(source)?;
    if toks.is_empty() {
        return Err(syntax_error(0, "empty expression"));
    }
    let mut parser = Parser {
        toks,
        pos: 0,
        end_offset: source.len(),
        allowed: allowed_vars,
    };
    let expr = parser.parse_expr(0)?;
    if let Some(t) = parser.peek() {
        return Err(syntax_error(
            parser.offset(),
            format!("unexpected {} after expression", t.describe()),
        ));
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_numbers_in_all_forms() {
        for (src, want) in [
            ("42", 42.0),
            ("0.5", 0.5),
            (".5", 0.5),
            ("2.", 2.0),
            ("1e3", 1000.0),
            ("1E3", 1000.0),
            ("2.5e-10", 2.5e-10),
            ("1.5e+2", 150.0),
        ] {
            let toks = lex(src).unwrap_or_else(|e| panic!("lex `{src}`: {e}"));
            assert_eq!(toks.len(), 1, "`{src}` should be one token");
            match &toks[0].0 {
                Tok::Num(x) => assert_eq!(*x, want, "`{src}`"),
                other => panic!("`{src}` lexed as {other:?}"),
            }
        }
    }

    #[test]
    fn rejects_bad_numbers() {
        assert!(lex(".").is_err());
        assert!(lex("1e").is_err());
        assert!(lex("1e+").is_err());
        assert!(lex("1e999").is_err());
    }

    #[test]
    fn rejects_stray_characters_with_offset() {
        match lex("1 + #") {
            Err(HahnError::Parse { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
        // Multi-byte characters are reported whole.
        assert!(lex("1 + λ").is_err());
    }

    #[test]
    fn whitespace_is_insignificant() {
        let a = parse("1+2*3", VarSet::only_t()).unwrap();
        let b = parse(" 1\t+ 2 \n* 3 ", VarSet::only_t()).unwrap();
        assert_eq!(a, b);
    }
}
