//! Hex encoding of classical memory.
//!
//! Memory slot 0 is the least significant bit, so the bit string
//! `b_{n-1} ... b_1 b_0` is read with slot `n-1` leftmost.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HexError {
    #[error("hex string must start with 0x: {0:?}")]
    MissingPrefix(String),
    #[error("invalid hex digit {digit:?} in {input:?}")]
    BadDigit { input: String, digit: char },
}

/// Encodes memory bits (indexed by slot) as `0x` followed by uppercase hex
/// with no zero padding.
pub fn encode_hex(bits: &[bool]) -> String {
    let mut nibbles: Vec<u8> = bits
        .chunks(4)
        .map(|c| {
            c.iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | ((b as u8) << i))
        })
        .collect();
    while nibbles.len() > 1 && *nibbles.last().unwrap() == 0 {
        nibbles.pop();
    }
    let mut s = String::with_capacity(nibbles.len() + 2);
    s.push_str("0x");
    if nibbles.is_empty() {
        s.push('0');
    }
    for n in nibbles.iter().rev() {
        s.push(char::from_digit(*n as u32, 16).unwrap().to_ascii_uppercase());
    }
    s
}

/// Decodes a hex string of any width into bits, least significant first.
///
/// The result has exactly `4 * digits` entries; callers compare numerically
/// or truncate to their slot count.
pub fn decode_hex(s: &str) -> Result<Vec<bool>, HexError> {
    let digits = s
        .strip_prefix("0x")
        .or_else(|| s.strip_prefix("0X"))
        .ok_or_else(|| HexError::MissingPrefix(s.to_string()))?;
    let mut bits = Vec::with_capacity(digits.len() * 4);
    for c in digits.chars().rev() {
        let v = c.to_digit(16).ok_or_else(|| HexError::BadDigit {
            input: s.to_string(),
            digit: c,
        })?;
        for i in 0..4 {
            bits.push(v >> i & 1 == 1);
        }
    }
    Ok(bits)
}

/// Decodes into exactly `width` bits; set bits beyond `width` are an error.
pub fn decode_hex_width(s: &str, width: usize) -> Result<Vec<bool>, HexError> {
    let mut bits = decode_hex(s)?;
    if bits.iter().skip(width).any(|&b| b) {
        return Err(HexError::BadDigit {
            input: s.to_string(),
            digit: s.chars().nth(2).unwrap_or('?'),
        });
    }
    bits.resize(width, false);
    Ok(bits)
}

/// Numeric equality of two hex strings regardless of padding or case.
pub fn hex_eq(a: &str, b: &str) -> bool {
    match (decode_hex(a), decode_hex(b)) {
        (Ok(x), Ok(y)) => {
            let n = x.len().max(y.len());
            (0..n).all(|i| x.get(i).copied().unwrap_or(false) == y.get(i).copied().unwrap_or(false))
        }
        _ => false,
    }
}

/// Parses a hex string into a `u64`, rejecting values that do not fit.
pub fn hex_to_u64(s: &str) -> Option<u64> {
    let bits = decode_hex(s).ok()?;
    if bits.iter().skip(64).any(|&b| b) {
        return None;
    }
    Some(
        bits.iter()
            .take(64)
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits_of(v: u32, width: usize) -> Vec<bool> {
        (0..width).map(|i| v >> i & 1 == 1).collect()
    }

    #[test]
    fn documented_examples() {
        // bit string "1010" is slots [0,1,0,1]
        assert_eq!(encode_hex(&[false, true, false, true]), "0xA");
        assert_eq!(encode_hex(&[false; 4]), "0x0");
        // "11101" -> slots [1,0,1,1,1]
        assert_eq!(encode_hex(&[true, false, true, true, true]), "0x1D");
    }

    #[test]
    fn empty_and_wide() {
        assert_eq!(encode_hex(&[]), "0x0");
        let mut b = vec![false; 70];
        b[68] = true;
        assert_eq!(encode_hex(&b), "0x100000000000000000");
    }

    #[test]
    fn round_trip_exhaustive_16() {
        for width in 1..=16usize {
            for v in 0..(1u32 << width) {
                let bits = bits_of(v, width);
                let s = encode_hex(&bits);
                let back = decode_hex_width(&s, width).unwrap();
                assert_eq!(back, bits, "width {width} value {v}");
                assert_eq!(hex_to_u64(&s), Some(v as u64));
            }
        }
    }

    #[test]
    fn padding_is_numeric() {
        assert!(hex_eq("0x00", "0x0"));
        assert!(hex_eq("0x1c", "0x1C"));
        assert!(!hex_eq("0x02", "0x20"));
        assert_eq!(hex_to_u64("0x001F"), Some(31));
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(decode_hex("1F"), Err(HexError::MissingPrefix(_))));
        assert!(matches!(decode_hex("0xG"), Err(HexError::BadDigit { .. })));
        assert!(decode_hex_width("0x10", 4).is_err());
    }
}
