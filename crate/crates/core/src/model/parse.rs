//! JSON parsing with pointer-addressed errors and unknown-field tracking.

use std::fmt;
use std::ops::{Deref, DerefMut};

use serde::de::DeserializeOwned;
use serde::{Serialize, Serializer};
use serde_json::Value;

/// Marker used by hand-written `Deserialize` impls to carry a nested pointer
/// through serde's string-only custom errors.
pub(crate) const NESTED_MARK: char = '\u{1}';

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// JSON pointer to the offending node ("" is the document root).
    pub pointer: String,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pointer.is_empty() {
            write!(f, "at document root: {}", self.message)
        } else {
            write!(f, "at {}: {}", self.pointer, self.message)
        }
    }
}

impl std::error::Error for ParseError {}

/// How to treat object keys the typed model does not know about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Lenient,
    Strict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnknownField {
    pub pointer: String,
    pub value: Value,
}

/// A parsed document together with any keys that were not part of the model.
///
/// Unknown keys are re-emitted on serialization so that lenient parsing is
/// lossless.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub value: T,
    pub unknown: Vec<UnknownField>,
}

impl<T> Parsed<T> {
    pub fn new(value: T) -> Self {
        Parsed {
            value,
            unknown: Vec::new(),
        }
    }

    pub fn into_inner(self) -> T {
        self.value
    }
}

impl<T> Deref for Parsed<T> {
    type Target = T;
    fn deref(&self) -> &T {
        &self.value
    }
}

impl<T> DerefMut for Parsed<T> {
    fn deref_mut(&mut self) -> &mut T {
        &mut self.value
    }
}

impl<T: Serialize> Parsed<T> {
    pub fn to_value(&self) -> Value {
        let mut v = serde_json::to_value(&self.value).expect("model types serialize");
        for u in &self.unknown {
            insert_at(&mut v, &u.pointer, u.value.clone());
        }
        v
    }
}

impl<T: Serialize> Serialize for Parsed<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_value().serialize(s)
    }
}

pub fn escape_token(t: &str) -> String {
    t.replace('~', "~0").replace('/', "~1")
}

pub fn unescape_token(t: &str) -> String {
    t.replace("~1", "/").replace("~0", "~")
}

fn insert_at(root: &mut Value, pointer: &str, value: Value) {
    let Some(split) = pointer.rfind('/') else {
        return;
    };
    let key = unescape_token(&pointer[split + 1..]);
    if let Some(Value::Object(m)) = root.pointer_mut(&pointer[..split]) {
        m.insert(key, value);
    }
}

fn path_to_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => {
                out.push('/');
                out.push_str(&index.to_string());
            }
            Segment::Map { key } => {
                out.push('/');
                out.push_str(&escape_token(key));
            }
            Segment::Enum { .. } | Segment::Unknown => {}
        }
    }
    out
}

/// Splits a serde error message produced by a nested deserializer into
/// (inner pointer, message).
fn split_nested(msg: &str) -> (String, String) {
    let mut ptr = String::new();
    let mut rest = msg;
    while let Some(body) = rest.strip_prefix(NESTED_MARK) {
        match body.find(NESTED_MARK) {
            Some(end) => {
                ptr.push_str(&body[..end]);
                rest = &body[end + 1..];
            }
            None => break,
        }
    }
    (ptr, rest.to_string())
}

pub(crate) fn nested_error<E: serde::de::Error>(
    prefix: &str,
    err: serde_path_to_error::Error<serde_json::Error>,
) -> E {
    let (inner, msg) = split_nested(&err.inner().to_string());
    E::custom(format!(
        "{NESTED_MARK}{prefix}{}{inner}{NESTED_MARK}{msg}",
        path_to_pointer(err.path())
    ))
}

/// Deserializes a value and reports failures as a [`ParseError`].
pub fn from_value<T: DeserializeOwned>(v: Value) -> Result<T, ParseError> {
    serde_path_to_error::deserialize::<_, T>(v).map_err(|e| {
        let outer = path_to_pointer(e.path());
        let (inner, message) = split_nested(&e.inner().to_string());
        ParseError {
            pointer: outer + &inner,
            message: strip_serde_position(&message),
        }
    })
}

fn strip_serde_position(msg: &str) -> String {
    match msg.find(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

pub fn parse_json(bytes: &[u8]) -> Result<Value, ParseError> {
    serde_json::from_slice(bytes).map_err(|e| ParseError {
        pointer: String::new(),
        message: format!("invalid JSON: {e}"),
    })
}

/// Parses a document, collecting unknown keys according to `mode`.
pub fn parse_doc<T>(input: Value, mode: Mode) -> Result<Parsed<T>, ParseError>
where
    T: DeserializeOwned + Serialize,
{
    let value: T = from_value(input.clone())?;
    let typed = serde_json::to_value(&value).expect("model types serialize");
    let mut unknown = Vec::new();
    diff_keys(&input, &typed, &mut String::new(), &mut unknown);
    if mode == Mode::Strict {
        if let Some(u) = unknown.first() {
            return Err(ParseError {
                pointer: u.pointer.clone(),
                message: "unknown field".into(),
            });
        }
    }
    Ok(Parsed { value, unknown })
}

pub fn parse_bytes<T>(bytes: &[u8], mode: Mode) -> Result<Parsed<T>, ParseError>
where
    T: DeserializeOwned + Serialize,
{
    parse_doc(parse_json(bytes)?, mode)
}

fn diff_keys(input: &Value, typed: &Value, path: &mut String, out: &mut Vec<UnknownField>) {
    match (input, typed) {
        (Value::Object(a), Value::Object(b)) => {
            for (k, v) in a {
                let len = path.len();
                path.push('/');
                path.push_str(&escape_token(k));
                match b.get(k) {
                    Some(tv) => diff_keys(v, tv, path, out),
                    // an explicit null for an absent optional is not new information
                    None if v.is_null() => {}
                    None => out.push(UnknownField {
                        pointer: path.clone(),
                        value: v.clone(),
                    }),
                }
                path.truncate(len);
            }
        }
        (Value::Array(a), Value::Array(b)) => {
            for (i, (x, y)) in a.iter().zip(b).enumerate() {
                let len = path.len();
                path.push('/');
                path.push_str(&i.to_string());
                diff_keys(x, y, path, out);
                path.truncate(len);
            }
        }
        _ => {}
    }
}

/// Structural equality that compares numbers by value, so `5` equals `5.0`.
pub fn json_eq(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => match (x.as_f64(), y.as_f64()) {
            (Some(p), Some(q)) => p == q,
            _ => x == y,
        },
        (Value::Array(x), Value::Array(y)) => {
            x.len() == y.len() && x.iter().zip(y).all(|(p, q)| json_eq(p, q))
        }
        (Value::Object(x), Value::Object(y)) => {
            x.len() == y.len()
                && x.iter()
                    .all(|(k, v)| y.get(k).is_some_and(|w| json_eq(v, w)))
        }
        _ => a == b,
    }
}
