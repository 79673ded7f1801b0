//! Pretty-printer producing the concrete syntax accepted by the parser.

use std::fmt;

use super::{Formula, Term};

fn formula_level(f: &Formula) -> u8 {
    match f {
        Formula::Forall(..) => 0,
        Formula::Imp(..) => 1,
        Formula::Or(..) => 2,
        Formula::And(..) => 3,
        Formula::Var(_) | Formula::Bottom => 4,
    }
}

fn write_formula(f: &Formula, min: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    let paren = formula_level(f) < min;
    if paren {
        write!(out, "(")?;
    }
    match f {
        Formula::Var(x) => write!(out, "{x}")?,
        Formula::Bottom => write!(out, "bot")?,
        Formula::Imp(a, b) => {
            write_formula(a, 2, out)?;
            write!(out, " -> ")?;
            write_formula(b, 0, out)?;
        }
        Formula::Or(a, b) => {
            write_formula(a, 3, out)?;
            write!(out, " | ")?;
            write_formula(b, 2, out)?;
        }
        Formula::And(a, b) => {
            write_formula(a, 4, out)?;
            write!(out, " & ")?;
            write_formula(b, 3, out)?;
        }
        Formula::Forall(x, a) => {
            write!(out, "forall {x}. ")?;
            write_formula(a, 0, out)?;
        }
    }
    if paren {
        write!(out, ")")?;
    }
    Ok(())
}

fn term_level(t: &Term) -> u8 {
    match t {
        Term::Lam(..) | Term::TyLam(..) | Term::Case { .. } => 0,
        Term::App(..) | Term::TyApp(..) => 1,
        Term::Inj(..) | Term::Abort(..) => 2,
        Term::Proj(..) => 3,
        Term::Var(_) | Term::Pair(..) => 4,
    }
}

struct F<'a>(&'a Formula, u8);

impl fmt::Display for F<'_> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(self.0, self.1, out)
    }
}

fn write_term(t: &Term, min: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    let paren = term_level(t) < min;
    if paren {
        write!(out, "(")?;
    }
    match t {
        Term::Var(x) => write!(out, "{x}")?,
        Term::Lam(x, a, b) => {
            write!(out, "fun {x}:{} => ", F(a, 0))?;
            write_term(b, 0, out)?;
        }
        Term::TyLam(x, b) => {
            write!(out, "tfun {x} => ")?;
            write_term(b, 0, out)?;
        }
        Term::Case {
            scrutinee,
            left,
            right,
            result,
        } => {
            write!(out, "case ")?;
            write_term(scrutinee, 0, out)?;
            write!(out, " of {{ {}:{} => ", left.var, F(&left.ty, 0))?;
            write_term(&left.body, 0, out)?;
            write!(out, " ; {}:{} => ", right.var, F(&right.ty, 0))?;
            write_term(&right.body, 0, out)?;
            write!(out, " }} : {}", F(result, 0))?;
        }
        Term::App(m, n) => {
            write_term(m, 1, out)?;
            write!(out, " ")?;
            write_term(n, 2, out)?;
        }
        Term::TyApp(m, a) => {
            write_term(m, 1, out)?;
            write!(out, " [{}]", F(a, 0))?;
        }
        Term::Inj(i, m, a, b) => {
            write!(out, "in{}[{}|{}] ", i.index(), F(a, 3), F(b, 0))?;
            write_term(m, 2, out)?;
        }
        Term::Abort(m, a) => {
            write!(out, "abort[{}] ", F(a, 0))?;
            write_term(m, 2, out)?;
        }
        Term::Proj(i, m) => {
            write_term(m, 3, out)?;
            write!(out, ".{}", i.index())?;
        }
        Term::Pair(m, n) => {
            write!(out, "<")?;
            write_term(m, 0, out)?;
            write!(out, ", ")?;
            write_term(n, 0, out)?;
            write!(out, ">")?;
        }
    }
    if paren {
        write!(out, ")")?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(self, 0, f)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(self, 0, f)
    }
}

#[cfg(test)]
mod tests {
    use crate::syntax::{parse_formula, parse_term};

    fn roundtrip_term(s: &str) {
        let m = parse_term(s).unwrap();
        let printed = m.to_string();
        assert_eq!(parse_term(&printed).unwrap(), m, "{s} printed as {printed}");
    }

    #[test]
    fn prints_minimal_parentheses() {
        assert_eq!(parse_formula("(X -> Y) -> Z").unwrap().to_string(), "(X -> Y) -> Z");
        assert_eq!(parse_formula("X -> (Y -> Z)").unwrap().to_string(), "X -> Y -> Z");
        assert_eq!(parse_formula("(X & Y) | Z").unwrap().to_string(), "X & Y | Z");
        assert_eq!(
            parse_formula("(forall X. X) -> Y").unwrap().to_string(),
            "(forall X. X) -> Y"
        );
        assert_eq!(parse_term("(f x) y").unwrap().to_string(), "f x y");
        assert_eq!(parse_term("f (x y)").unwrap().to_string(), "f (x y)");
        assert_eq!(parse_term("(abort[X] m).1").unwrap().to_string(), "(abort[X] m).1");
        assert_eq!(parse_term("in1[X|Y] x").unwrap().to_string(), "in1[X|Y] x");
        assert_eq!(
            parse_term("in1[(X -> Y)|Y] x").unwrap().to_string(),
            "in1[(X -> Y)|Y] x"
        );
    }

    #[test]
    fn roundtrips() {
        for s in [
            "fun x:X => x",
            "(fun x:X => x) y",
            "f (fun x:X => x) (tfun Y => y [Y])",
            "case m of { x:X => fun z:Z => x ; y:Y => abort[Z -> X] y } : Z -> X",
            "(case m of { x:X => x ; y:Y => y } : X) n",
            "<x.1, (f x).2>",
            "in2[X & Y|forall Z. Z] (tfun Z => z [Z])",
            "abort[X] (abort[bot] b)",
            "m [X -> X] <fun x:X => x, fun y:Y => y>",
        ] {
            roundtrip_term(s);
        }
    }
}
