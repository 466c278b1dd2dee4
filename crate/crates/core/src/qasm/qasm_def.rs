//! Parser for gate definitions written over the `U` and `CX` primitives.
//!
//! ```text
//! def   := "gate" IDENT ( "(" idents? ")" )? idents "{" stmt* "}"
//! stmt  := "U" "(" expr "," expr "," expr ")" IDENT ";"
//!        | "CX" IDENT "," IDENT ";"
//! expr  := term (("+" | "-") term)*
//! term  := unary (("*" | "/") unary)*
//! unary := "-" unary | atom
//! atom  := NUMBER | "pi" | IDENT | "(" expr ")"
//! ```

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{message} at offset {pos}")]
pub struct DefError {
    pub pos: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Param(usize),
    Neg(Box<Expr>),
    Bin(Box<Expr>, char, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, params: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Param(i) => params[*i],
            Expr::Neg(e) => -e.eval(params),
            Expr::Bin(a, op, b) => {
                let (a, b) = (a.eval(params), b.eval(params));
                match op {
                    '+' => a + b,
                    '-' => a - b,
                    '*' => a * b,
                    _ => a / b,
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    /// `U(theta, phi, lambda)` on a formal argument index.
    U([Expr; 3], usize),
    /// `CX control, target` on formal argument indices.
    CX(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateDef {
    pub name: String,
    pub params: Vec<String>,
    pub args: Vec<String>,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Sym(char),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, DefError> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let s = i;
            while i < b.len() && ((b[i] as char).is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((s, Tok::Ident(src[s..i].to_string())));
        } else if c.is_ascii_digit() || c == '.' {
            let s = i;
            while i < b.len() && ((b[i] as char).is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                i += 1;
                if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
                    i += 1;
                }
                while i < b.len() && (b[i] as char).is_ascii_digit() {
                    i += 1;
                }
            }
            let v = src[s..i].parse().map_err(|_| DefError {
                pos: s,
                message: format!("bad number {:?}", &src[s..i]),
            })?;
            out.push((s, Tok::Num(v)));
        } else if "(){},;+-*/".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(DefError {
                pos: i,
                message: format!("unexpected character {c:?}"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    params: &'a [String],
}

impl Parser<'_> {
    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.0)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, DefError> {
        Err(DefError {
            pos: self.pos(),
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.1)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|t| t.1.clone());
        self.at += 1;
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), DefError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected {c:?}"))
        }
    }

    fn ident(&mut self) -> Result<String, DefError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.at += 1;
                Ok(s)
            }
            _ => self.err("expected identifier"),
        }
    }

    fn ident_list(&mut self) -> Result<Vec<String>, DefError> {
        let mut v = vec![self.ident()?];
        while self.eat(',') {
            v.push(self.ident()?);
        }
        Ok(v)
    }

    fn expr(&mut self) -> Result<Expr, DefError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym(c @ ('+' | '-'))) => *c,
                _ => return Ok(lhs),
            };
            self.at += 1;
            lhs = Expr::Bin(Box::new(lhs), op, Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr, DefError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym(c @ ('*' | '/'))) => *c,
                _ => return Ok(lhs),
            };
            self.at += 1;
            lhs = Expr::Bin(Box::new(lhs), op, Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr, DefError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::Num(v)),
            Some(Tok::Ident(s)) if s == "pi" => Ok(Expr::Num(std::f64::consts::PI)),
            Some(Tok::Ident(s)) => match self.params.iter().position(|p| *p == s) {
                Some(i) => Ok(Expr::Param(i)),
                None => Err(DefError {
                    pos,
                    message: format!("unknown parameter {s:?}"),
                }),
            },
            Some(Tok::Sym('(')) => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            _ => Err(DefError {
                pos,
                message: "expected expression".into(),
            }),
        }
    }
}

fn arg_index(args: &[String], name: &str, pos: usize) -> Result<usize, DefError> {
    args.iter().position(|a| a == name).ok_or(DefError {
        pos,
        message: format!("unknown qubit argument {name:?}"),
    })
}

pub fn parse_qasm_def(src: &str) -> Result<GateDef, DefError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: src.len(),
        params: &[],
    };
    if p.ident()? != "gate" {
        return Err(DefError {
            pos: 0,
            message: "definition must start with `gate`".into(),
        });
    }
    let name = p.ident()?;
    let mut params = Vec::new();
    if p.eat('(') && !p.eat(')') {
        params = p.ident_list()?;
        p.expect(')')?;
    }
    let args = p.ident_list()?;
    p.expect('{')?;

    let mut body = Vec::new();
    let mut sub = Parser {
        toks: std::mem::take(&mut p.toks),
        at: p.at,
        end: p.end,
        params: &params,
    };
    loop {
        if sub.eat('}') {
            break;
        }
        let pos = sub.pos();
        match sub.ident() {
            Ok(kw) if kw == "U" => {
                sub.expect('(')?;
                let a = sub.expr()?;
                sub.expect(',')?;
                let b = sub.expr()?;
                sub.expect(',')?;
                let c = sub.expr()?;
                sub.expect(')')?;
                let qpos = sub.pos();
                let q = sub.ident()?;
                sub.expect(';')?;
                body.push(Stmt::U([a, b, c], arg_index(&args, &q, qpos)?));
            }
            Ok(kw) if kw == "CX" => {
                let p1 = sub.pos();
                let a = sub.ident()?;
                sub.expect(',')?;
                let p2 = sub.pos();
                let b = sub.ident()?;
                sub.expect(';')?;
                let (a, b) = (arg_index(&args, &a, p1)?, arg_index(&args, &b, p2)?);
                if a == b {
                    return Err(DefError {
                        pos: p2,
                        message: "CX needs distinct qubits".into(),
                    });
                }
                body.push(Stmt::CX(a, b));
            }
            Ok(kw) => {
                return Err(DefError {
                    pos,
                    message: format!("only U and CX may appear in a definition, found {kw:?}"),
                })
            }
            Err(_) if sub.peek().is_none() => return sub.err("unterminated gate body"),
            Err(e) => return Err(e),
        }
    }
    if sub.peek().is_some() {
        return sub.err("trailing input after gate body");
    }
    Ok(GateDef {
        name,
        params,
        args,
        body,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swap_is_three_cx() {
        let d = parse_qasm_def("gate swap a,b { CX a,b; CX b,a; CX a,b; }").unwrap();
        assert_eq!(d.args, ["a", "b"]);
        assert_eq!(d.body, vec![Stmt::CX(0, 1), Stmt::CX(1, 0), Stmt::CX(0, 1)]);
    }

    #[test]
    fn u3_single_statement() {
        let d = parse_qasm_def("gate u3(theta,phi,lambda) q\n { U(theta,phi,lambda) q; }").unwrap();
        assert_eq!(d.params.len(), 3);
        assert_eq!(d.body.len(), 1);
        let Stmt::U(e, 0) = &d.body[0] else { panic!() };
        assert_eq!(e[2].eval(&[1.0, 2.0, 3.0]), 3.0);
    }

    #[test]
    fn empty_body() {
        let d = parse_qasm_def("gate id q { }").unwrap();
        assert!(d.body.is_empty());
    }

    #[test]
    fn expressions() {
        let d = parse_qasm_def("gate u2(phi,lambda) q { U(pi/2,phi,-lambda+2*(1-0.5e0)) q; }").unwrap();
        let Stmt::U(e, _) = &d.body[0] else { panic!() };
        assert!((e[0].eval(&[0.0, 0.0]) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(e[2].eval(&[0.0, 3.0]), -2.0);
    }

    #[test]
    fn errors_carry_position() {
        let e = parse_qasm_def("gate g a { H a; }").unwrap_err();
        assert_eq!(e.pos, 11);
        assert!(parse_qasm_def("gate g a { CX a,b; }").is_err());
        assert!(parse_qasm_def("gate g(t) a { U(s,0,0) a; }").is_err());
        assert!(parse_qasm_def("gate g a { CX a,a; }").is_err());
        assert!(parse_qasm_def("gate g a { U(0,0,0) a;").is_err());
    }
}
