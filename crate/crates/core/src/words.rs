//! Integer encoding of words over a `d`-letter alphabet.
//!
//! A word `(i_1, ..., i_n)` with 0-based letters is stored as its length and
//! the base-`d` value `sum_j i_j d^(n-j)`. Within a fixed length this code
//! order is lexicographic order, and concatenation, prefix and suffix
//! extraction reduce to multiplication, division and remainder by powers of
//! `d`. Letters can also be packed into a single `u64` with a fixed number of
//! bits per letter so that kernels can read them with shifts and masks.
//!
//! Letters are 0-based everywhere in this module except the string syntax
//! (`parse_word` / `format_word`), which is 1-based: `"1.2.2"`, and `"e"` for
//! the empty word.

use std::fmt;

use crate::error::{Result, SigError};

/// Number of letters (channels) in an alphabet. Always at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Alphabet(u32);

impl Alphabet {
    pub fn new(d: u32) -> Result<Self> {
        if d == 0 {
            return Err(SigError::Domain("alphabet size must be at least 1".into()));
        }
        Ok(Self(d))
    }

    #[inline]
    pub fn size(self) -> u32 {
        self.0
    }

    /// Bits per packed letter: `max(ceil(log2 d), 1)`.
    pub fn bits_per_letter(self) -> u32 {
        let d = self.0;
        if d <= 2 {
            1
        } else {
            32 - (d - 1).leading_zeros()
        }
    }

    /// Longest word whose code fits a `u64` (`d^n <= 2^64`).
    pub fn max_code_len(self) -> u32 {
        if self.0 == 1 {
            return u32::MAX;
        }
        let d = self.0 as u128;
        let limit = 1u128 << 64;
        let mut n = 0u32;
        let mut p = 1u128;
        while p * d <= limit {
            p *= d;
            n += 1;
        }
        n
    }

    /// Longest word supported by both the code width and letter packing.
    pub fn max_word_len(self) -> u32 {
        self.max_code_len().min(64 / self.bits_per_letter())
    }
}

/// `d^n` as a `u128`, or `None` when it exceeds `2^64`.
pub(crate) fn checked_pow(d: u32, n: u32) -> Option<u128> {
    let mut p: u128 = 1;
    for _ in 0..n {
        p = p.checked_mul(d as u128)?;
        if p > 1u128 << 64 {
            return None;
        }
    }
    Some(p)
}

fn pow_u64(d: u32, n: u32) -> Result<u64> {
    match checked_pow(d, n) {
        Some(p) if p <= u64::MAX as u128 => Ok(p as u64),
        _ => Err(SigError::Capacity(format!(
            "{d}^{n} does not fit a 64-bit word code"
        ))),
    }
}

/// A word as `(length, base-d code)`. The alphabet size is carried alongside
/// by the caller (usually the owning [`WordSet`](crate::wordsets::WordSet)).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    len: u32,
    code: u64,
}

impl Word {
    pub const EMPTY: Word = Word { len: 0, code: 0 };

    /// Builds a word from raw parts, checking `code < d^len`.
    pub fn from_parts(len: u32, code: u64, d: u32) -> Result<Self> {
        if len > 0 {
            if let Some(p) = checked_pow(d, len) {
                if (code as u128) >= p {
                    return Err(SigError::CorruptWord { code, d, len });
                }
            } else if len > Alphabet::new(d)?.max_code_len() {
                return Err(SigError::Capacity(format!(
                    "word length {len} exceeds capacity for d={d}"
                )));
            }
        } else if code != 0 {
            return Err(SigError::CorruptWord { code, d, len });
        }
        Ok(Self { len, code })
    }

    #[inline]
    pub fn len(&self) -> u32 {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn code(&self) -> u64 {
        self.code
    }
}

/// Encodes 0-based letters as a [`Word`].
pub fn encode_word(letters: &[u32], d: u32) -> Result<Word> {
    let alphabet = Alphabet::new(d)?;
    if letters.len() as u64 > alphabet.max_code_len() as u64 {
        return Err(SigError::Capacity(format!(
            "word of length {} exceeds the 64-bit code capacity for d={d}",
            letters.len()
        )));
    }
    let mut code: u64 = 0;
    for &letter in letters {
        if letter >= d {
            return Err(SigError::InvalidLetter {
                letter: letter as u64 + 1,
                d,
            });
        }
        // Cannot overflow: the length check bounds code by d^n - 1.
        code = code.wrapping_mul(d as u64).wrapping_add(letter as u64);
    }
    Ok(Word {
        len: letters.len() as u32,
        code,
    })
}

/// Decodes a [`Word`] back into its 0-based letters.
pub fn decode_word(w: Word, d: u32) -> Result<Vec<u32>> {
    let w = Word::from_parts(w.len, w.code, d)?;
    let mut out = vec![0u32; w.len as usize];
    decode_into(w, d, &mut out);
    Ok(out)
}

/// Unchecked decode into a caller-provided buffer of length `w.len()`.
pub(crate) fn decode_into(w: Word, d: u32, out: &mut [u32]) {
    let mut code = w.code;
    for slot in out.iter_mut().rev() {
        *slot = (code % d as u64) as u32;
        code /= d as u64;
    }
}

/// Code of `u ∘ v`: `code(u) * d^|v| + code(v)`.
pub fn concat_code(u: Word, v: Word, d: u32) -> Result<Word> {
    let len = u
        .len
        .checked_add(v.len)
        .ok_or_else(|| SigError::Capacity("combined word length overflows".into()))?;
    if len > Alphabet::new(d)?.max_code_len() {
        return Err(SigError::Capacity(format!(
            "concatenated length {len} exceeds the 64-bit code capacity for d={d}"
        )));
    }
    let shift = pow_u64(d, v.len)?;
    let code = u
        .code
        .checked_mul(shift)
        .and_then(|c| c.checked_add(v.code))
        .ok_or_else(|| SigError::Capacity("concatenated code overflows u64".into()))?;
    Ok(Word { len, code })
}

/// First `k` letters of `w`: `floor(code / d^(|w|-k))`.
pub fn prefix_code(w: Word, k: u32, d: u32) -> Result<Word> {
    if k > w.len {
        return Err(SigError::Range {
            requested: k,
            len: w.len,
        });
    }
    let div = pow_u64(d, w.len - k)?;
    Ok(Word {
        len: k,
        code: w.code / div,
    })
}

/// Last `m` letters of `w`: `code mod d^m`.
pub fn suffix_code(w: Word, m: u32, d: u32) -> Result<Word> {
    if m > w.len {
        return Err(SigError::Range {
            requested: m,
            len: w.len,
        });
    }
    let code = match checked_pow(d, m) {
        Some(p) if p <= u64::MAX as u128 => w.code % p as u64,
        // d^m = 2^64 exactly: every code is already below it.
        _ => w.code,
    };
    Ok(Word { len: m, code })
}

/// Letters packed little-end first: letter `j` (0-based) occupies bits
/// `[b*j, b*(j+1))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PackedWord {
    bits: u64,
    bits_per_letter: u32,
    len: u32,
}

impl PackedWord {
    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn bits_per_letter(&self) -> u32 {
        self.bits_per_letter
    }

    #[inline]
    pub fn len(&self) -> u32 {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Letter at 0-based position `j`.
    #[inline]
    pub fn letter(&self, j: u32) -> u32 {
        debug_assert!(j < self.len);
        let mask = if self.bits_per_letter == 64 {
            u64::MAX
        } else {
            (1u64 << self.bits_per_letter) - 1
        };
        ((self.bits >> (self.bits_per_letter * j)) & mask) as u32
    }

    pub fn letters(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.len).map(move |j| self.letter(j))
    }

    pub(crate) fn unpack_into(&self, out: &mut [u32]) {
        for (j, slot) in out.iter_mut().enumerate().take(self.len as usize) {
            *slot = self.letter(j as u32);
        }
    }
}

/// Packs the letters of `w` with `b` bits per letter.
pub fn pack_letters(w: Word, d: u32, b: u32) -> Result<PackedWord> {
    let alphabet = Alphabet::new(d)?;
    if b < alphabet.bits_per_letter() || b == 0 {
        return Err(SigError::Capacity(format!(
            "{b} bits per letter cannot hold {d} letters"
        )));
    }
    if (b as u64) * (w.len as u64) > 64 {
        return Err(SigError::Capacity(format!(
            "{} letters at {b} bits each exceed 64 bits",
            w.len
        )));
    }
    let letters = decode_word(w, d)?;
    let bits = letters
        .iter()
        .enumerate()
        .fold(0u64, |acc, (j, &l)| acc | ((l as u64) << (b * j as u32)));
    Ok(PackedWord {
        bits,
        bits_per_letter: b,
        len: w.len,
    })
}

/// Parses the 1-based word syntax (`"1.2.2"`, `"e"` for the empty word) into 0-based letters.
pub fn parse_word(s: &str, d: u32) -> Result<Vec<u32>> {
    let s = s.trim();
    if s == "e" || s.is_empty() {
        return Ok(Vec::new());
    }
    s.split('.')
        .map(|tok| {
            let v: u64 = tok
                .trim()
                .parse()
                .map_err(|_| SigError::Parse(format!("bad letter {tok:?} in word {s:?}")))?;
            if v == 0 || v > d as u64 {
                return Err(SigError::InvalidLetter { letter: v, d });
            }
            Ok((v - 1) as u32)
        })
        .collect()
}

/// Formats 0-based letters in the 1-based word syntax.
pub fn format_word(letters: &[u32]) -> String {
    if letters.is_empty() {
        return "e".to_string();
    }
    let mut s = String::with_capacity(letters.len() * 2);
    for (i, l) in letters.iter().enumerate() {
        if i > 0 {
            s.push('.');
        }
        s.push_str(&(l + 1).to_string());
    }
    s
}

/// Display adapter pairing a word with its alphabet size.
pub struct WordDisplay(pub Word, pub u32);

impl fmt::Display for WordDisplay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut letters = vec![0u32; self.0.len() as usize];
        decode_into(self.0, self.1, &mut letters);
        f.write_str(&format_word(&letters))
    }
}
