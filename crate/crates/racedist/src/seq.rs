//! Nucleotide sequences packed two bits per base (A=00, C=01, G=10, T=11).
//!
//! Anything outside the four-letter alphabet (N, -, R, Y, K, M, S, W, ...)
//! is rejected at parse time; callers that need to tolerate such input strip
//! it before encoding.

use std::fmt;

/// Numeric code for each base, in packed order.
pub const CODE_A: u8 = 0b00;
pub const CODE_C: u8 = 0b01;
pub const CODE_G: u8 = 0b10;
pub const CODE_T: u8 = 0b11;

const BASES_PER_WORD: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeqError {
    /// The input held no usable bases.
    Empty,
    /// A character outside {A,C,G,T} at this 0-based position.
    AmbiguousBase { position: usize, symbol: char },
}

impl fmt::Display for SeqError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqError::Empty => write!(f, "sequence is empty"),
            SeqError::AmbiguousBase { position, symbol } => {
                write!(f, "ambiguous base {symbol:?} at position {position}")
            }
        }
    }
}

impl std::error::Error for SeqError {}

/// Map one ASCII base to its 2-bit code. Lowercase is accepted.
#[inline]
pub fn base_to_code(base: u8) -> Option<u8> {
    match base {
        b'A' | b'a' => Some(CODE_A),
        b'C' | b'c' => Some(CODE_C),
        b'G' | b'g' => Some(CODE_G),
        b'T' | b't' => Some(CODE_T),
        _ => None,
    }
}

#[inline]
pub fn code_to_base(code: u8) -> char {
    match code & 0b11 {
        CODE_A => 'A',
        CODE_C => 'C',
        CODE_G => 'G',
        _ => 'T',
    }
}

/// A nucleotide string stored two bits per base, little-end-first within
/// 64-bit words: base `i` occupies bits `[2i, 2i+2)` of `words[i / 32]`.
#[derive(Clone, PartialEq, Eq)]
pub struct PackedSequence {
    words: Vec<u64>,
    len: usize,
}

impl PackedSequence {
    /// Encode ASCII text. Rejects empty input and any symbol outside the
    /// four-base alphabet (case-insensitive).
    pub fn from_text(text: &str) -> Result<Self, SeqError> {
        if text.is_empty() {
            return Err(SeqError::Empty);
        }
        let mut words = vec![0u64; text.len().div_ceil(BASES_PER_WORD)];
        for (i, ch) in text.bytes().enumerate() {
            let code = base_to_code(ch).ok_or(SeqError::AmbiguousBase {
                position: i,
                symbol: ch as char,
            })?;
            words[i / BASES_PER_WORD] |= (code as u64) << (2 * (i % BASES_PER_WORD));
        }
        Ok(PackedSequence {
            words,
            len: text.len(),
        })
    }

    /// Build from raw 2-bit codes. Codes must already be valid.
    pub fn from_codes(codes: &[u8]) -> Result<Self, SeqError> {
        if codes.is_empty() {
            return Err(SeqError::Empty);
        }
        let mut words = vec![0u64; codes.len().div_ceil(BASES_PER_WORD)];
        for (i, &code) in codes.iter().enumerate() {
            assert!(code < 4, "base code out of range: {code}");
            words[i / BASES_PER_WORD] |= (code as u64) << (2 * (i % BASES_PER_WORD));
        }
        Ok(PackedSequence {
            words,
            len: codes.len(),
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn code_at(&self, i: usize) -> u8 {
        assert!(i < self.len, "base index {i} out of range (len {})", self.len);
        ((self.words[i / BASES_PER_WORD] >> (2 * (i % BASES_PER_WORD))) & 0b11) as u8
    }

    /// Unpack to one code per byte.
    pub fn codes(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.code_at(i)).collect()
    }

    /// Copy of the bases in `range`, repacked.
    pub fn subseq(&self, start: usize, len: usize) -> PackedSequence {
        assert!(start + len <= self.len && len > 0, "invalid subsequence range");
        let codes: Vec<u8> = (start..start + len).map(|i| self.code_at(i)).collect();
        PackedSequence::from_codes(&codes).expect("non-empty by construction")
    }

    pub fn to_text(&self) -> String {
        (0..self.len).map(|i| code_to_base(self.code_at(i))).collect()
    }
}

// Debug prints the bases, not the raw words; test failures read much better.
impl fmt::Debug for PackedSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PackedSequence({})", self.to_text())
    }
}

impl fmt::Display for PackedSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
