//! Recursive-descent parser producing the term tree.
//!
//! ```text
//! term    := sign? product (("+" | "-") product)*
//! product := unary (("*" | "/" | "||")? unary)*
//! unary   := "-" unary | atom
//! atom    := NUMBER | "pi" | "(" term ")" | FUNC "(" term ")"
//!          | "SUM" "[" IDENT "," bound "," bound "," term "]"
//!          | IDENT index?
//! index   := "{" (INT | IDENT (("+" | "-") INT)?) "}"
//! bound   := "-"? INT | IDENT (("+" | "-") INT)?
//! ```
//!
//! A missing operator between two factors means multiplication.

use serde::Serialize;

use super::lexer::{lex, Tok};
use super::DslError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum OpKind {
    X,
    Y,
    Z,
    Sp,
    Sm,
    O,
    #[serde(rename = "a")]
    Lower,
    #[serde(rename = "A")]
    Raise,
    N,
    I,
}

impl OpKind {
    pub fn from_name(s: &str) -> Option<OpKind> {
        Some(match s {
            "X" => OpKind::X,
            "Y" => OpKind::Y,
            "Z" => OpKind::Z,
            "Sp" => OpKind::Sp,
            "Sm" => OpKind::Sm,
            "O" => OpKind::O,
            "a" => OpKind::Lower,
            "A" => OpKind::Raise,
            "N" => OpKind::N,
            "I" => OpKind::I,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Func {
    Cos,
    Sin,
    Sqrt,
    Abs,
    Exp,
    /// Reciprocal, produced by `/`.
    Recip,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "cos" => Func::Cos,
            "sin" => Func::Sin,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "exp" => Func::Exp,
            _ => return None,
        })
    }

    pub fn apply(self, x: f64) -> f64 {
        match self {
            Func::Cos => x.cos(),
            Func::Sin => x.sin(),
            Func::Sqrt => x.sqrt(),
            Func::Abs => x.abs(),
            Func::Exp => x.exp(),
            Func::Recip => 1.0 / x,
        }
    }
}

/// Subsystem index, or a SUM variable plus offset.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Index {
    Lit(usize),
    Sym { var: String, offset: i64 },
}

/// SUM bound. `N` resolves to `n_qubits - 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Bound {
    Lit(i64),
    Sym { var: String, offset: i64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Const {
        value: f64,
    },
    Var {
        name: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        index: Option<Index>,
    },
    ChannelRef {
        kind: char,
        index: Index,
    },
    Operator {
        op: OpKind,
        #[serde(skip_serializing_if = "Option::is_none")]
        index: Option<Index>,
    },
    Product {
        factors: Vec<Node>,
    },
    Sum {
        terms: Vec<Node>,
    },
    SumMacro {
        var: String,
        lo: Bound,
        hi: Bound,
        body: Box<Node>,
    },
    Nonlinear {
        func: Func,
        arg: Box<Node>,
    },
}

impl Node {
    fn product(mut factors: Vec<Node>) -> Node {
        if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Node::Product { factors }
        }
    }

    fn sum(mut terms: Vec<Node>) -> Node {
        if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Node::Sum { terms }
        }
    }
}

struct Parser {
    term: usize,
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn col(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.0)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.1)
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T, DslError> {
        let found = self.peek().map_or("end of term".to_string(), Tok::describe);
        Err(DslError::syntax(self.term, self.col(), format!("unexpected {found}"), expected))
    }

    fn eat(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(x)) if *x == s) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &'static str) -> Result<(), DslError> {
        if self.eat(s) {
            Ok(())
        } else {
            self.fail(&[s])
        }
    }

    fn ident(&mut self) -> Result<String, DslError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.at += 1;
                Ok(s)
            }
            _ => self.fail(&["identifier"]),
        }
    }

    fn int(&mut self) -> Result<i64, DslError> {
        match self.peek() {
            Some(Tok::Num(v)) if v.fract() == 0.0 => {
                let v = *v as i64;
                self.at += 1;
                Ok(v)
            }
            _ => self.fail(&["integer"]),
        }
    }

    fn offset(&mut self) -> Result<i64, DslError> {
        if self.eat("+") {
            self.int()
        } else if self.eat("-") {
            Ok(-self.int()?)
        } else {
            Ok(0)
        }
    }

    fn term(&mut self) -> Result<Node, DslError> {
        let mut terms = Vec::new();
        let mut negate = if self.eat("+") { false } else { self.eat("-") };
        loop {
            let p = self.product()?;
            terms.push(if negate {
                Node::Product {
                    factors: vec![Node::Const { value: -1.0 }, p],
                }
            } else {
                p
            });
            if self.eat("+") {
                negate = false;
            } else if self.eat("-") {
                negate = true;
            } else {
                return Ok(Node::sum(terms));
            }
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Some(Tok::Num(_) | Tok::Ident(_) | Tok::Sym("(")))
    }

    fn product(&mut self) -> Result<Node, DslError> {
        let mut factors = vec![self.unary()?];
        loop {
            if self.eat("*") || self.eat("||") {
                factors.push(self.unary()?);
            } else if self.eat("/") {
                factors.push(Node::Nonlinear {
                    func: Func::Recip,
                    arg: Box::new(self.unary()?),
                });
            } else if self.starts_atom() {
                factors.push(self.unary()?);
            } else {
                return Ok(Node::product(factors));
            }
        }
    }

    fn unary(&mut self) -> Result<Node, DslError> {
        if self.eat("-") {
            let inner = self.unary()?;
            return Ok(Node::Product {
                factors: vec![Node::Const { value: -1.0 }, inner],
            });
        }
        self.atom()
    }

    fn index(&mut self) -> Result<Option<Index>, DslError> {
        if !self.eat("{") {
            return Ok(None);
        }
        let idx = match self.peek() {
            Some(Tok::Num(_)) => {
                let col = self.col();
                let v = self.int()?;
                if v < 0 {
                    return Err(DslError::syntax(self.term, col, "negative index", &[]));
                }
                Index::Lit(v as usize)
            }
            Some(Tok::Ident(_)) => {
                let var = self.ident()?;
                Index::Sym {
                    var,
                    offset: self.offset()?,
                }
            }
            _ => return self.fail(&["integer", "identifier"]),
        };
        self.expect("}")?;
        Ok(Some(idx))
    }

    fn bound(&mut self) -> Result<Bound, DslError> {
        match self.peek() {
            Some(Tok::Ident(_)) => {
                let var = self.ident()?;
                Ok(Bound::Sym {
                    var,
                    offset: self.offset()?,
                })
            }
            Some(Tok::Sym("-")) => {
                self.at += 1;
                Ok(Bound::Lit(-self.int()?))
            }
            _ => Ok(Bound::Lit(self.int()?)),
        }
    }

    fn atom(&mut self) -> Result<Node, DslError> {
        match self.peek().cloned() {
            Some(Tok::Num(value)) => {
                self.at += 1;
                Ok(Node::Const { value })
            }
            Some(Tok::Sym("(")) => {
                self.at += 1;
                let e = self.term()?;
                self.expect(")")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.at += 1;
                if name == "pi" {
                    return Ok(Node::Const {
                        value: std::f64::consts::PI,
                    });
                }
                if name == "SUM" {
                    self.expect("[")?;
                    let var = self.ident()?;
                    self.expect(",")?;
                    let lo = self.bound()?;
                    self.expect(",")?;
                    let hi = self.bound()?;
                    self.expect(",")?;
                    let body = self.term()?;
                    self.expect("]")?;
                    return Ok(Node::SumMacro {
                        var,
                        lo,
                        hi,
                        body: Box::new(body),
                    });
                }
                if let Some(func) = Func::from_name(&name) {
                    self.expect("(")?;
                    let arg = self.term()?;
                    self.expect(")")?;
                    return Ok(Node::Nonlinear {
                        func,
                        arg: Box::new(arg),
                    });
                }
                let index = self.index()?;
                if let Some(op) = OpKind::from_name(&name) {
                    return Ok(Node::Operator { op, index });
                }
                if matches!(name.as_str(), "D" | "U" | "M") {
                    let Some(index) = index else {
                        return Err(DslError::syntax(self.term, self.col(), format!("channel {name} needs an index"), &["{"]));
                    };
                    return Ok(Node::ChannelRef {
                        kind: name.chars().next().unwrap(),
                        index,
                    });
                }
                Ok(Node::Var { name, index })
            }
            _ => self.fail(&["number", "identifier", "(", "-"]),
        }
    }
}

/// Parses one `h_str` entry. `term` is its position in the list, used in errors.
pub fn parse_term(term: usize, src: &str) -> Result<Node, DslError> {
    let mut p = Parser {
        term,
        toks: lex(term, src)?,
        at: 0,
        end: src.len(),
    };
    let node = p.term()?;
    if p.peek().is_some() {
        return p.fail(&["+", "-", "*", "/", "||", "end of term"]);
    }
    Ok(node)
}

pub fn parse_hstr<S: AsRef<str>>(terms: &[S]) -> Result<Vec<Node>, DslError> {
    terms
        .iter()
        .enumerate()
        .map(|(i, t)| parse_term(i, t.as_ref()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(op: OpKind, var: &str) -> Node {
        Node::Operator {
            op,
            index: Some(Index::Sym {
                var: var.into(),
                offset: 0,
            }),
        }
    }

    #[test]
    fn sum_with_channel() {
        let n = parse_term(0, "__SUM[i,0,1,_X{i}_||_D{i}_]").unwrap();
        let Node::SumMacro { var, lo, hi, body } = n else { panic!() };
        assert_eq!(var, "i");
        assert_eq!((lo, hi), (Bound::Lit(0), Bound::Lit(1)));
        assert_eq!(
            *body,
            Node::Product {
                factors: vec![
                    op(OpKind::X, "i"),
                    Node::ChannelRef {
                        kind: 'D',
                        index: Index::Sym {
                            var: "i".into(),
                            offset: 0
                        }
                    }
                ]
            }
        );
    }

    #[test]
    fn scalar_product() {
        let n = parse_term(0, "2*pi*_v0_*_O{0}_").unwrap();
        let Node::Product { factors } = n else { panic!() };
        assert_eq!(factors.len(), 4);
        assert_eq!(factors[0], Node::Const { value: 2.0 });
        assert_eq!(factors[2], Node::Var { name: "v0".into(), index: None });
        assert_eq!(factors[3], Node::Operator { op: OpKind::O, index: Some(Index::Lit(0)) });
    }

    #[test]
    fn juxtaposition_and_groups() {
        let n = parse_term(0, "_g{i}_*_X{i}_(_a_+_A_)").unwrap();
        let Node::Product { factors } = n else { panic!() };
        assert_eq!(factors.len(), 3);
        assert!(matches!(&factors[2], Node::Sum { terms } if terms.len() == 2));
    }

    #[test]
    fn leading_plus_and_functions() {
        assert!(parse_term(0, "_+2*pi*_wb_*_O{2}_").is_ok());
        let n = parse_term(0, "sqrt(abs(cos(pi*(dc0+U{0}))))*O{0}").unwrap();
        let Node::Product { factors } = n else { panic!() };
        assert!(matches!(factors[0], Node::Nonlinear { func: Func::Sqrt, .. }));
    }

    #[test]
    fn index_offsets() {
        let n = parse_term(0, "Z{i}Z{i+1}").unwrap();
        let Node::Product { factors } = n else { panic!() };
        assert_eq!(factors[1], Node::Operator { op: OpKind::Z, index: Some(Index::Sym { var: "i".into(), offset: 1 }) });
    }

    #[test]
    fn syntax_errors_report_column_and_expected() {
        let e = parse_term(2, "X{0}*").unwrap_err();
        assert_eq!(e.column(), Some(5));
        let DslError::Syntax { term, expected, .. } = &e else { panic!() };
        assert_eq!(*term, 2);
        assert!(expected.contains(&"identifier".to_string()));
        let e = parse_term(0, "SUM[i,0,1,X{i}").unwrap_err();
        assert!(e.to_string().ends_with("expected one of ]"));
        assert!(parse_term(0, "D*X{0}").is_err());
        assert!(parse_term(0, "X{0})").is_err());
    }

    #[test]
    fn dump_is_json() {
        let n = parse_term(0, "SUM[i,0,N,X{i}||D{i}]").unwrap();
        let v = serde_json::to_value(&n).unwrap();
        assert_eq!(v["node"], "sum_macro");
        assert_eq!(v["hi"]["var"], "N");
    }
}
