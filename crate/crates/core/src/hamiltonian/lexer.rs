//! Tokenizer for `h_str` terms. Underscores and whitespace separate tokens
//! and are otherwise ignored.

use super::DslError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Num(f64),
    Ident(String),
    Sym(&'static str),
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Sym(s) => format!("{s:?}"),
        }
    }
}

const SYMBOLS: [&str; 12] = ["||", "+", "-", "*", "/", "(", ")", "[", "]", "{", "}", ","];

/// Splits one term into `(column, token)` pairs.
pub fn lex(term: usize, src: &str) -> Result<Vec<(usize, Tok)>, DslError> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < b.len() {
        let c = b[i];
        if c == b'_' || c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() {
            let s = i;
            while i < b.len() && b[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push((s, Tok::Ident(src[s..i].to_string())));
            continue;
        }
        if c.is_ascii_digit() || c == b'.' {
            let s = i;
            while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            if i + 1 < b.len()
                && (b[i] == b'e' || b[i] == b'E')
                && (b[i + 1].is_ascii_digit() || (b[i + 1] == b'-' || b[i + 1] == b'+'))
            {
                i += 2;
                while i < b.len() && b[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let v = src[s..i].parse().map_err(|_| DslError::syntax(term, s, format!("bad number {:?}", &src[s..i]), &[]))?;
            out.push((s, Tok::Num(v)));
            continue;
        }
        for sym in SYMBOLS {
            if src[i..].starts_with(sym) {
                out.push((i, Tok::Sym(sym)));
                i += sym.len();
                continue 'outer;
            }
        }
        let ch = src[i..].chars().next().unwrap_or('?');
        return Err(DslError::syntax(term, i, format!("unexpected character {ch:?}"), &[]));
    }
    Ok(out)
}
