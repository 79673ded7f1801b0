//! Recursive-descent parser for the concrete syntax.
//!
//! ```text
//! formula ::= forall X. formula | disj (-> formula)?
//! disj    ::= conj (| disj')?          conj ::= atom (& conj')?
//! atom    ::= X | bot | ( formula )    (a primed operand may also be a forall)
//!
//! term    ::= fun x:A => term | tfun X => term
//!           | case term of { x:A => term ; y:B => term } : C
//!           | app
//! app     ::= unit (unit | [A])*
//! unit    ::= in1[A|B] unit | in2[A|B] unit | abort[C] unit | postfix
//! postfix ::= atom (.1 | .2)*
//! atom    ::= x | ( term ) | < term , term >
//! ```

use thiserror::Error;

use super::{Branch, Formula, Side, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(u8),
    Fun,
    TFun,
    Case,
    Of,
    Abort,
    In(Side),
    Bot,
    Forall,
    LParen,
    RParen,
    LAngle,
    RAngle,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Comma,
    Dot,
    Colon,
    Semi,
    Arrow,
    FatArrow,
    Amp,
    Bar,
    Eof,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Num(n) => format!("`{n}`"),
        Tok::Eof => "end of input".to_string(),
        other => format!("{other:?}"),
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut out = Vec::new();
    let bytes: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    let err = |offset: usize, message: String| ParseError { offset, message };
    while i < bytes.len() {
        let (off, c) = bytes[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let two = |s: &str| src[off..].starts_with(s);
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].1.is_ascii_alphanumeric() || bytes[i].1 == '_' || bytes[i].1 == '\'') {
                i += 1;
            }
            let end = bytes.get(i).map_or(src.len(), |b| b.0);
            let word = &src[bytes[start].0..end];
            out.push((
                match word {
                    "fun" => Tok::Fun,
                    "tfun" => Tok::TFun,
                    "case" => Tok::Case,
                    "of" => Tok::Of,
                    "abort" => Tok::Abort,
                    "in1" => Tok::In(Side::Left),
                    "in2" => Tok::In(Side::Right),
                    "bot" => Tok::Bot,
                    "forall" => Tok::Forall,
                    _ => Tok::Ident(word.to_string()),
                },
                off,
            ));
            continue;
        } else if c.is_ascii_digit() {
            match c {
                '1' => Tok::Num(1),
                '2' => Tok::Num(2),
                _ => return Err(err(off, format!("unexpected digit `{c}`"))),
            }
        } else if two("->") {
            i += 1;
            Tok::Arrow
        } else if two("=>") {
            i += 1;
            Tok::FatArrow
        } else {
            match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '<' => Tok::LAngle,
                '>' => Tok::RAngle,
                '[' => Tok::LBrack,
                ']' => Tok::RBrack,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                ':' => Tok::Colon,
                ';' => Tok::Semi,
                '&' => Tok::Amp,
                '|' => Tok::Bar,
                _ => return Err(err(off, format!("unexpected character `{c}`"))),
            }
        };
        out.push((tok, off));
        i += 1;
    }
    out.push((Tok::Eof, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Parser, ParseError> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError {
            offset: self.offset(),
            message: format!("expected {expected}, found {}", describe(self.peek())),
        })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.error(what)
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.error("an identifier"),
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Eof => Ok(()),
            _ => self.error("end of input"),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        if *self.peek() == Tok::Forall {
            self.bump();
            let x = self.ident()?;
            self.expect(Tok::Dot, "`.`")?;
            return Ok(Formula::forall(x, self.formula()?));
        }
        let lhs = self.disj()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            Ok(Formula::imp(lhs, self.formula()?))
        } else {
            Ok(lhs)
        }
    }

    fn disj(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.conj()?;
        if *self.peek() == Tok::Bar {
            self.bump();
            let rhs = if *self.peek() == Tok::Forall {
                self.formula()?
            } else {
                self.disj()?
            };
            Ok(Formula::or(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn conj(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.formula_atom()?;
        if *self.peek() == Tok::Amp {
            self.bump();
            let rhs = if *self.peek() == Tok::Forall {
                self.formula()?
            } else {
                self.conj()?
            };
            Ok(Formula::and(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn formula_atom(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                self.bump();
                Ok(Formula::Var(x))
            }
            Tok::Bot => {
                self.bump();
                Ok(Formula::Bottom)
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            _ => self.error("a formula"),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            Tok::Fun => {
                self.bump();
                let x = self.ident()?;
                self.expect(Tok::Colon, "`:`")?;
                let a = self.formula()?;
                self.expect(Tok::FatArrow, "`=>`")?;
                Ok(Term::lam(x, a, self.term()?))
            }
            Tok::TFun => {
                self.bump();
                let x = self.ident()?;
                self.expect(Tok::FatArrow, "`=>`")?;
                Ok(Term::ty_lam(x, self.term()?))
            }
            Tok::Case => {
                self.bump();
                let m = self.term()?;
                self.expect(Tok::Of, "`of`")?;
                self.expect(Tok::LBrace, "`{`")?;
                let left = self.branch()?;
                self.expect(Tok::Semi, "`;`")?;
                let right = self.branch()?;
                self.expect(Tok::RBrace, "`}`")?;
                self.expect(Tok::Colon, "`:`")?;
                let c = self.formula()?;
                Ok(Term::case(m, left, right, c))
            }
            _ => self.app(),
        }
    }

    fn branch(&mut self) -> Result<Branch, ParseError> {
        let x = self.ident()?;
        self.expect(Tok::Colon, "`:`")?;
        let a = self.formula()?;
        self.expect(Tok::FatArrow, "`=>`")?;
        Ok(Branch::new(x, a, self.term()?))
    }

    fn starts_unit(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Ident(_) | Tok::LParen | Tok::LAngle | Tok::In(_) | Tok::Abort
        )
    }

    fn app(&mut self) -> Result<Term, ParseError> {
        let mut head = self.unit()?;
        loop {
            if *self.peek() == Tok::LBrack {
                self.bump();
                let a = self.formula()?;
                self.expect(Tok::RBrack, "`]`")?;
                head = Term::ty_app(head, a);
            } else if self.starts_unit() {
                head = Term::app(head, self.unit()?);
            } else {
                return Ok(head);
            }
        }
    }

    fn unit(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::In(side) => {
                self.bump();
                self.expect(Tok::LBrack, "`[`")?;
                let a = self.conj()?;
                self.expect(Tok::Bar, "`|`")?;
                let b = self.formula()?;
                self.expect(Tok::RBrack, "`]`")?;
                Ok(Term::inj(side, self.unit()?, a, b))
            }
            Tok::Abort => {
                self.bump();
                self.expect(Tok::LBrack, "`[`")?;
                let c = self.formula()?;
                self.expect(Tok::RBrack, "`]`")?;
                Ok(Term::abort(self.unit()?, c))
            }
            _ => self.postfix(),
        }
    }

    fn postfix(&mut self) -> Result<Term, ParseError> {
        let mut m = self.term_atom()?;
        while *self.peek() == Tok::Dot {
            self.bump();
            match self.bump() {
                Tok::Num(1) => m = Term::proj(Side::Left, m),
                Tok::Num(2) => m = Term::proj(Side::Right, m),
                _ => {
                    self.pos -= 1;
                    return self.error("`1` or `2`");
                }
            }
        }
        Ok(m)
    }

    fn term_atom(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                self.bump();
                Ok(Term::Var(x))
            }
            Tok::LParen => {
                self.bump();
                let m = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(m)
            }
            Tok::LAngle => {
                self.bump();
                let m = self.term()?;
                self.expect(Tok::Comma, "`,`")?;
                let n = self.term()?;
                self.expect(Tok::RAngle, "`>`")?;
                Ok(Term::pair(m, n))
            }
            _ => self.error("a term"),
        }
    }
}

pub fn parse_formula(src: &str) -> Result<Formula, ParseError> {
    let mut p = Parser::new(src)?;
    let f = p.formula()?;
    p.finish()?;
    Ok(f)
}

pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(src)?;
    let m = p.term()?;
    p.finish()?;
    Ok(m)
}

/// Parses a context entry `x : A`.
pub fn parse_binding(src: &str) -> Result<(String, Formula), ParseError> {
    let mut p = Parser::new(src)?;
    let x = p.ident()?;
    p.expect(Tok::Colon, "`:`")?;
    let a = p.formula()?;
    p.finish()?;
    Ok((x, a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn connective_precedence() {
        let x = || Formula::var("X");
        let y = || Formula::var("Y");
        let z = || Formula::var("Z");
        assert_eq!(f("X & Y | Z"), Formula::or(Formula::and(x(), y()), z()));
        assert_eq!(f("X | Y -> Z"), Formula::imp(Formula::or(x(), y()), z()));
        assert_eq!(f("X -> Y -> Z"), Formula::imp(x(), Formula::imp(y(), z())));
        assert_eq!(f("X & Y & Z"), Formula::and(x(), Formula::and(y(), z())));
        assert_eq!(f("forall X. X -> Y"), Formula::forall("X", Formula::imp(x(), y())));
        assert_eq!(f("Y -> forall X. X"), Formula::imp(y(), Formula::forall("X", x())));
        assert_eq!(f("bot -> X"), Formula::imp(Formula::Bottom, x()));
    }

    #[test]
    fn term_forms() {
        let m = parse_term("fun x:X & Y => <x.2, x.1>").unwrap();
        assert_eq!(
            m,
            Term::lam(
                "x",
                f("X & Y"),
                Term::pair(
                    Term::proj(Side::Right, Term::var("x")),
                    Term::proj(Side::Left, Term::var("x"))
                )
            )
        );
        let m = parse_term("f x y [A] z").unwrap();
        assert_eq!(
            m,
            Term::app(
                Term::ty_app(
                    Term::app(Term::app(Term::var("f"), Term::var("x")), Term::var("y")),
                    f("A")
                ),
                Term::var("z")
            )
        );
        let m = parse_term("in1[X | Y -> Z] abort[X] b").unwrap();
        assert_eq!(
            m,
            Term::inj(Side::Left, Term::abort(Term::var("b"), f("X")), f("X"), f("Y -> Z"))
        );
        let m = parse_term("case z of { x:X => in2[Y|X] x ; y:Y => in1[Y|X] y } : Y | X").unwrap();
        assert!(matches!(m, Term::Case { .. }));
        let m = parse_term("tfun X => fun x:X => x").unwrap();
        assert!(matches!(m, Term::TyLam(..)));
    }

    #[test]
    fn errors_carry_offsets() {
        let e = parse_term("fun x X => x").unwrap_err();
        assert_eq!(e.offset, 6);
        assert!(parse_term("x.3").is_err());
        assert!(parse_term("(x").is_err());
        assert!(parse_formula("X ->").is_err());
        assert!(parse_term("x $").is_err());
        assert_eq!(parse_binding("x : A -> B").unwrap(), ("x".into(), f("A -> B")));
    }

    #[test]
    fn primed_identifiers() {
        assert_eq!(parse_term("x''").unwrap(), Term::var("x''"));
    }
}
