//! Word sets: the finite index sets onto which signatures are projected.
//!
//! Every builder produces a [`WordSet`] in canonical order (length ascending,
//! then code ascending), without duplicates and without the empty word. Each
//! word carries a prefix table mapping its prefix of length `k` to a position
//! in the set, to the empty word, or to [`PrefixRef::Absent`] when the set is
//! not prefix-closed at that word.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SigError};
use crate::words::{
    checked_pow, decode_into, encode_word, parse_word, Alphabet, PackedWord, Word, WordDisplay,
};

/// Upper bound on the number of words a builder may emit.
pub const MAX_WORDS: usize = 1 << 24;

/// Slack on the anisotropic weighted-degree cutoff.
pub const ANISOTROPIC_TOL: f64 = 1e-12;

/// Where a prefix of a word lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrefixRef {
    Empty,
    At(usize),
    /// Not a member of the set; kernels compute it as scratch.
    Absent,
}

/// How a word set was built. Informational except for `Truncated`, which
/// callers may use as a fast path.
#[derive(Debug, Clone, PartialEq)]
pub enum WordSetKind {
    Truncated { depth: u32 },
    Anisotropic { gamma: Vec<f64>, r: f64 },
    Graph { depth: u32 },
    Lyndon { depth: u32 },
    LeadLagSparse { dim: u32, depth: u32 },
    Custom,
}

/// Per-channel weights and cutoff for anisotropic truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct AnisotropyWeights {
    gamma: Vec<f64>,
    r: f64,
}

impl AnisotropyWeights {
    pub fn new(gamma: Vec<f64>, r: f64) -> Result<Self> {
        if gamma.is_empty() {
            return Err(SigError::Domain(
                "anisotropy weights need at least one channel".into(),
            ));
        }
        if let Some((i, g)) = gamma
            .iter()
            .enumerate()
            .find(|(_, g)| !(g.is_finite() && **g > 0.0))
        {
            return Err(SigError::Domain(format!(
                "weight for channel {} must be positive, got {g}",
                i + 1
            )));
        }
        if !(r.is_finite() && r > 0.0) {
            return Err(SigError::Domain(format!(
                "cutoff must be positive, got {r}"
            )));
        }
        Ok(Self { gamma, r })
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn cutoff(&self) -> f64 {
        self.r
    }
}

/// Directed graph on the channels; edge `(i, j)` lets letter `i` be followed by `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSpec {
    d: u32,
    successors: Vec<Vec<u32>>,
}

impl GraphSpec {
    /// `edges` use 0-based letters. Self-loops are allowed.
    pub fn new(d: u32, edges: &[(u32, u32)]) -> Result<Self> {
        Alphabet::new(d)?;
        let mut successors = vec![BTreeSet::new(); d as usize];
        for &(i, j) in edges {
            for v in [i, j] {
                if v >= d {
                    return Err(SigError::InvalidLetter {
                        letter: v as u64 + 1,
                        d,
                    });
                }
            }
            successors[i as usize].insert(j);
        }
        Ok(Self {
            d,
            successors: successors
                .into_iter()
                .map(|s| s.into_iter().collect())
                .collect(),
        })
    }

    pub fn complete(d: u32) -> Result<Self> {
        let edges: Vec<_> = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).collect();
        Self::new(d, &edges)
    }

    pub fn d(&self) -> u32 {
        self.d
    }
}

#[derive(Debug, Clone)]
pub struct WordSet {
    d: u32,
    kind: WordSetKind,
    words: Vec<Word>,
    packed: Vec<PackedWord>,
    index: HashMap<Word, usize>,
    prefix_offsets: Vec<usize>,
    prefix_refs: Vec<PrefixRef>,
    max_len: u32,
    include_empty: bool,
}

impl PartialEq for WordSet {
    /// Set equality: same alphabet, same words, same ε flag.
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.words == other.words && self.include_empty == other.include_empty
    }
}

fn check_count(n: usize) -> Result<()> {
    if n > MAX_WORDS {
        return Err(SigError::Capacity(format!(
            "word set would exceed {MAX_WORDS} words"
        )));
    }
    Ok(())
}

fn check_depth(alphabet: Alphabet, depth: u32) -> Result<()> {
    if depth == 0 {
        return Err(SigError::Domain("depth must be at least 1".into()));
    }
    let cap = alphabet.max_word_len();
    if depth > cap {
        return Err(SigError::Capacity(format!(
            "depth {depth} exceeds the maximum word length {cap} for d={}",
            alphabet.size()
        )));
    }
    Ok(())
}

impl WordSet {
    fn from_words(d: u32, kind: WordSetKind, mut words: Vec<Word>) -> Result<Self> {
        let alphabet = Alphabet::new(d)?;
        words.retain(|w| !w.is_empty());
        if words.is_empty() {
            return Err(SigError::Domain(
                "word set must contain a nonempty word".into(),
            ));
        }
        check_count(words.len())?;
        words.sort_unstable();
        words.dedup();

        let max_len = words.last().map(|w| w.len()).unwrap_or(0);
        let cap = alphabet.max_word_len();
        if max_len > cap {
            return Err(SigError::Capacity(format!(
                "word length {max_len} exceeds the maximum {cap} for d={d}"
            )));
        }
        let b = alphabet.bits_per_letter();
        let packed = words
            .iter()
            .map(|&w| crate::words::pack_letters(w, d, b))
            .collect::<Result<Vec<_>>>()?;
        let index: HashMap<Word, usize> = words.iter().enumerate().map(|(i, w)| (*w, i)).collect();

        let mut prefix_offsets = Vec::with_capacity(words.len() + 1);
        let mut prefix_refs = Vec::new();
        for &w in &words {
            prefix_offsets.push(prefix_refs.len());
            prefix_refs.push(PrefixRef::Empty);
            let mut code = w.code();
            let mut tail: Vec<PrefixRef> = Vec::with_capacity(w.len() as usize);
            for k in (1..=w.len()).rev() {
                // prefix of length k; strip one letter per iteration
                let p = Word::from_parts(k, code, d)?;
                tail.push(
                    index
                        .get(&p)
                        .map_or(PrefixRef::Absent, |&i| PrefixRef::At(i)),
                );
                code /= d as u64;
            }
            prefix_refs.extend(tail.into_iter().rev());
        }
        prefix_offsets.push(prefix_refs.len());

        Ok(Self {
            d,
            kind,
            words,
            packed,
            index,
            prefix_offsets,
            prefix_refs,
            max_len,
            include_empty: false,
        })
    }

    /// All words of length `1..=depth`.
    pub fn truncated(d: u32, depth: u32) -> Result<Self> {
        let alphabet = Alphabet::new(d)?;
        check_depth(alphabet, depth)?;
        let mut total: u128 = 0;
        for n in 1..=depth {
            total += checked_pow(d, n).unwrap_or(u128::MAX / 2);
            if total > MAX_WORDS as u128 {
                return Err(SigError::Capacity(format!(
                    "truncation at depth {depth} over {d} letters exceeds {MAX_WORDS} words"
                )));
            }
        }
        let mut words = Vec::with_capacity(total as usize);
        for n in 1..=depth {
            let count = checked_pow(d, n).unwrap() as u64;
            words.extend((0..count).map(|code| Word::from_parts(n, code, d).unwrap()));
        }
        Self::from_words(d, WordSetKind::Truncated { depth }, words)
    }

    /// Words whose weighted degree `sum gamma[i_j]` is at most `r` (plus [`ANISOTROPIC_TOL`]).
    pub fn anisotropic(weights: &AnisotropyWeights) -> Result<Self> {
        let d = weights.gamma.len() as u32;
        let alphabet = Alphabet::new(d)?;
        let limit = weights.r + ANISOTROPIC_TOL;
        let mut words = Vec::new();
        let mut stack: Vec<(Vec<u32>, f64)> = vec![(Vec::new(), 0.0)];
        while let Some((letters, weight)) = stack.pop() {
            for (i, g) in weights.gamma.iter().enumerate() {
                let w = weight + g;
                if w <= limit {
                    let mut next = letters.clone();
                    next.push(i as u32);
                    if next.len() as u32 > alphabet.max_word_len() {
                        return Err(SigError::Capacity(format!(
                            "anisotropic cutoff admits words longer than {}",
                            alphabet.max_word_len()
                        )));
                    }
                    words.push(encode_word(&next, d)?);
                    check_count(words.len())?;
                    stack.push((next, w));
                }
            }
        }
        if words.is_empty() {
            return Err(SigError::Domain(format!(
                "cutoff {} admits no words (smallest weight is larger)",
                weights.r
            )));
        }
        Self::from_words(
            d,
            WordSetKind::Anisotropic {
                gamma: weights.gamma.clone(),
                r: weights.r,
            },
            words,
        )
    }

    /// Words of length at most `depth` whose consecutive letters are graph edges.
    pub fn graph(g: &GraphSpec, depth: u32) -> Result<Self> {
        let d = g.d;
        check_depth(Alphabet::new(d)?, depth)?;
        let mut words = Vec::new();
        let mut stack: Vec<Vec<u32>> = (0..d).map(|i| vec![i]).collect();
        while let Some(letters) = stack.pop() {
            words.push(encode_word(&letters, d)?);
            check_count(words.len())?;
            if (letters.len() as u32) < depth {
                let last = *letters.last().unwrap() as usize;
                for &j in &g.successors[last] {
                    let mut next = letters.clone();
                    next.push(j);
                    stack.push(next);
                }
            }
        }
        Self::from_words(d, WordSetKind::Graph { depth }, words)
    }

    /// Lyndon words of length at most `depth`, generated with Duval's algorithm.
    pub fn lyndon(d: u32, depth: u32) -> Result<Self> {
        check_depth(Alphabet::new(d)?, depth)?;
        let mut words = Vec::new();
        let n = depth as usize;
        let mut w: Vec<u32> = vec![0];
        loop {
            words.push(encode_word(&w, d)?);
            check_count(words.len())?;
            // Repeat w periodically up to length n, then strip trailing maximal
            // letters and increment the last one.
            let m = w.len();
            while w.len() < n {
                let c = w[w.len() - m];
                w.push(c);
            }
            while w.last() == Some(&(d - 1)) {
                w.pop();
            }
            match w.last_mut() {
                Some(last) => *last += 1,
                None => break,
            }
        }
        Self::from_words(d, WordSetKind::Lyndon { depth }, words)
    }

    /// Sparse lead-lag word set over `2 * dim` letters (lag channels first,
    /// then lead channels): all concatenations of the generators
    /// `(L_i)`, `(l_i, L_i)`, `(L_i, l_i)` with total length at most `depth`.
    pub fn leadlag_sparse(dim: u32, depth: u32) -> Result<Self> {
        let d = dim
            .checked_mul(2)
            .ok_or_else(|| SigError::Capacity("lead-lag alphabet overflows".into()))?;
        check_depth(Alphabet::new(d)?, depth)?;
        let mut generators: Vec<Vec<u32>> = (0..dim).map(|i| vec![dim + i]).collect();
        for i in 0..dim {
            generators.push(vec![i, dim + i]);
            generators.push(vec![dim + i, i]);
        }
        let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
        let mut stack: Vec<Vec<u32>> = vec![Vec::new()];
        while let Some(prefix) = stack.pop() {
            for g in &generators {
                if prefix.len() + g.len() > depth as usize {
                    continue;
                }
                let mut next = prefix.clone();
                next.extend_from_slice(g);
                if seen.insert(next.clone()) {
                    check_count(seen.len())?;
                    stack.push(next);
                }
            }
        }
        let words = seen
            .iter()
            .map(|l| encode_word(l, d))
            .collect::<Result<Vec<_>>>()?;
        Self::from_words(d, WordSetKind::LeadLagSparse { dim, depth }, words)
    }

    /// Arbitrary user-supplied words (0-based letters). Duplicates and the
    /// empty word are dropped.
    pub fn custom(words: &[Vec<u32>], d: u32) -> Result<Self> {
        if words.is_empty() {
            return Err(SigError::Domain("custom word set is empty".into()));
        }
        let alphabet = Alphabet::new(d)?;
        let encoded = words
            .iter()
            .map(|l| {
                if l.len() as u32 > alphabet.max_word_len() {
                    return Err(SigError::Capacity(format!(
                        "word of length {} exceeds the maximum {} for d={d}",
                        l.len(),
                        alphabet.max_word_len()
                    )));
                }
                encode_word(l, d)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_words(d, WordSetKind::Custom, encoded)
    }

    /// Same words, with the constant ε column exposed (or hidden) in outputs.
    pub fn with_include_empty(mut self, include_empty: bool) -> Self {
        self.include_empty = include_empty;
        self
    }

    #[inline]
    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn kind(&self) -> &WordSetKind {
        &self.kind
    }

    /// Number of (nonempty) words.
    #[inline]
    pub fn len(&self) -> usize {
        self.words.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    #[inline]
    pub fn include_empty(&self) -> bool {
        self.include_empty
    }

    /// Column offset of the first word in coefficient outputs.
    #[inline]
    pub fn column_offset(&self) -> usize {
        self.include_empty as usize
    }

    /// Number of output columns (words, plus ε when exposed).
    #[inline]
    pub fn output_width(&self) -> usize {
        self.words.len() + self.column_offset()
    }

    #[inline]
    pub fn max_len(&self) -> u32 {
        self.max_len
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    #[inline]
    pub fn word(&self, i: usize) -> Word {
        self.words[i]
    }

    #[inline]
    pub fn packed(&self, i: usize) -> PackedWord {
        self.packed[i]
    }

    pub fn letters(&self, i: usize) -> Vec<u32> {
        let mut out = vec![0; self.words[i].len() as usize];
        decode_into(self.words[i], self.d, &mut out);
        out
    }

    pub fn index_of(&self, w: &Word) -> Option<usize> {
        self.index.get(w).copied()
    }

    pub fn index_of_letters(&self, letters: &[u32]) -> Option<usize> {
        encode_word(letters, self.d)
            .ok()
            .and_then(|w| self.index_of(&w))
    }

    /// Prefix table for word `i`: entry `k` locates the prefix of length `k`.
    pub fn prefix_refs(&self, i: usize) -> &[PrefixRef] {
        &self.prefix_refs[self.prefix_offsets[i]..self.prefix_offsets[i + 1]]
    }

    pub fn is_prefix_closed(&self) -> bool {
        !self.prefix_refs.contains(&PrefixRef::Absent)
    }

    /// `Some(depth)` when the set holds every word of length `1..=depth`.
    pub fn full_truncation_depth(&self) -> Option<u32> {
        let mut total: u128 = 0;
        for n in 1..=self.max_len {
            total += checked_pow(self.d, n)?;
        }
        (total == self.words.len() as u128).then_some(self.max_len)
    }

    /// Column labels in 1-based word syntax, including `"e"` when ε is exposed.
    pub fn labels(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.output_width());
        if self.include_empty {
            out.push("e".to_string());
        }
        out.extend(
            self.words
                .iter()
                .map(|&w| WordDisplay(w, self.d).to_string()),
        );
        out
    }

    /// Builds the word set described by a JSON descriptor. `data_dim` is the
    /// channel count of the data the set will be applied to; it fills in a
    /// missing `"d"` (for `leadlag_sparse`, the underlying dimension is
    /// `data_dim / 2`).
    pub fn from_descriptor(desc: &WordSetDescriptor, data_dim: Option<u32>) -> Result<Self> {
        let kind = desc.kind.as_str();
        let d = match (desc.d, data_dim) {
            (Some(d), _) => d,
            (None, Some(dd)) if kind == "leadlag_sparse" => {
                if dd % 2 != 0 {
                    return Err(SigError::Shape(format!(
                        "leadlag_sparse needs an even channel count, data has {dd}"
                    )));
                }
                dd / 2
            }
            (None, Some(dd)) => dd,
            (None, None) => {
                return Err(SigError::Parse(
                    "word set descriptor is missing \"d\"".into(),
                ))
            }
        };
        let depth = || {
            desc.depth
                .ok_or_else(|| SigError::Parse(format!("{kind} word set needs \"depth\"")))
        };
        let ws = match kind {
            "truncated" => Self::truncated(d, depth()?),
            "lyndon" => Self::lyndon(d, depth()?),
            "leadlag_sparse" => Self::leadlag_sparse(d, depth()?),
            "anisotropic" => {
                let gamma = desc.gamma.clone().ok_or_else(|| {
                    SigError::Parse("anisotropic word set needs \"gamma\"".into())
                })?;
                if gamma.len() != d as usize {
                    return Err(SigError::Shape(format!(
                        "gamma has {} weights for d={d}",
                        gamma.len()
                    )));
                }
                let r = desc
                    .r
                    .ok_or_else(|| SigError::Parse("anisotropic word set needs \"r\"".into()))?;
                Self::anisotropic(&AnisotropyWeights::new(gamma, r)?)
            }
            "graph" => {
                let edges = desc
                    .edges
                    .as_ref()
                    .ok_or_else(|| SigError::Parse("graph word set needs \"edges\"".into()))?
                    .iter()
                    .map(|&[i, j]| {
                        if i == 0 || j == 0 || i > d || j > d {
                            Err(SigError::InvalidLetter {
                                letter: if i == 0 || i > d { i as u64 } else { j as u64 },
                                d,
                            })
                        } else {
                            Ok((i - 1, j - 1))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::graph(&GraphSpec::new(d, &edges)?, depth()?)
            }
            "custom" => {
                let words = desc
                    .words
                    .as_ref()
                    .ok_or_else(|| SigError::Parse("custom word set needs \"words\"".into()))?
                    .iter()
                    .map(|s| parse_word(s, d))
                    .collect::<Result<Vec<_>>>()?;
                Self::custom(&words, d)
            }
            other => Err(SigError::Parse(format!("unknown word set type {other:?}"))),
        }?;
        Ok(ws.with_include_empty(desc.include_empty.unwrap_or(false)))
    }
}

/// JSON word-set descriptor. Letters and edges are 1-based.
///
/// ```json
/// {"type": "anisotropic", "d": 2, "gamma": [1, 2], "r": 3}
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WordSetDescriptor {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[u32; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub words: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub include_empty: Option<bool>,
}

impl WordSetDescriptor {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| SigError::Parse(format!("word set descriptor: {e}")))
    }

    pub fn truncated(d: u32, depth: u32) -> Self {
        Self {
            kind: "truncated".into(),
            d: Some(d),
            depth: Some(depth),
            ..Default::default()
        }
    }
}

/// Number of Lyndon words of length `n` over `d` letters (Witt's formula).
pub fn witt(d: u64, n: u64) -> u64 {
    fn mobius(mut m: u64) -> i64 {
        let mut result = 1i64;
        let mut p = 2;
        while p * p <= m {
            if m.is_multiple_of(p) {
                m /= p;
                if m.is_multiple_of(p) {
                    return 0;
                }
                result = -result;
            }
            p += 1;
        }
        if m > 1 {
            result = -result;
        }
        result
    }
    let total: i128 = (1..=n)
        .filter(|m| n.is_multiple_of(*m))
        .map(|m| mobius(m) as i128 * (d as i128).pow((n / m) as u32))
        .sum();
    (total / n as i128) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::parse_word;

    fn labels(ws: &WordSet) -> Vec<String> {
        ws.labels()
    }

    fn set_of(d: u32, words: &[&str]) -> WordSet {
        let w: Vec<Vec<u32>> = words.iter().map(|s| parse_word(s, d).unwrap()).collect();
        WordSet::custom(&w, d).unwrap()
    }

    #[test]
    fn truncated_sizes() {
        assert_eq!(WordSet::truncated(6, 3).unwrap().len(), 258);
        assert_eq!(WordSet::truncated(8, 6).unwrap().len(), 299_592);
        assert_eq!(labels(&WordSet::truncated(2, 1).unwrap()), ["1", "2"]);
        assert!(matches!(WordSet::truncated(2, 0), Err(SigError::Domain(_))));
        assert!(matches!(
            WordSet::truncated(2, 65),
            Err(SigError::Capacity(_))
        ));
        assert!(matches!(
            WordSet::truncated(10, 9),
            Err(SigError::Capacity(_))
        ));
    }

    #[test]
    fn canonical_order_and_prefix_table() {
        let ws = WordSet::truncated(2, 2).unwrap();
        assert_eq!(labels(&ws), ["1", "2", "1.1", "1.2", "2.1", "2.2"]);
        assert_eq!(
            ws.prefix_refs(3),
            [PrefixRef::Empty, PrefixRef::At(0), PrefixRef::At(3)]
        );
        assert!(ws.is_prefix_closed());
        assert_eq!(ws.full_truncation_depth(), Some(2));
    }

    #[test]
    fn anisotropic_examples() {
        let ws =
            WordSet::anisotropic(&AnisotropyWeights::new(vec![1.0, 2.0], 3.0).unwrap()).unwrap();
        assert_eq!(labels(&ws), ["1", "2", "1.1", "1.2", "2.1", "1.1.1"]);
        let uniform =
            WordSet::anisotropic(&AnisotropyWeights::new(vec![1.0; 3], 3.0).unwrap()).unwrap();
        assert_eq!(uniform, WordSet::truncated(3, 3).unwrap());
        let ws =
            WordSet::anisotropic(&AnisotropyWeights::new(vec![1.0, 5.0], 1.0).unwrap()).unwrap();
        assert_eq!(labels(&ws), ["1"]);
        assert!(AnisotropyWeights::new(vec![1.0, 0.0], 1.0).is_err());
        assert!(AnisotropyWeights::new(vec![1.0, -1.0], 1.0).is_err());
        assert!(AnisotropyWeights::new(vec![1.0], 0.0).is_err());
        // Accumulated 0.1 + 0.1 + 0.1 exceeds 0.3 in floating point; the tolerance admits it.
        let ws = WordSet::anisotropic(&AnisotropyWeights::new(vec![0.1], 0.3).unwrap()).unwrap();
        assert_eq!(ws.len(), 3);
    }

    #[test]
    fn graph_examples() {
        let g = GraphSpec::new(2, &[(0, 1)]).unwrap();
        assert_eq!(labels(&WordSet::graph(&g, 2).unwrap()), ["1", "2", "1.2"]);
        let g = GraphSpec::new(2, &[(0, 0), (0, 1), (1, 1)]).unwrap();
        assert_eq!(
            labels(&WordSet::graph(&g, 2).unwrap()),
            ["1", "2", "1.1", "1.2", "2.2"]
        );
        let g = GraphSpec::complete(3).unwrap();
        assert_eq!(
            WordSet::graph(&g, 3).unwrap(),
            WordSet::truncated(3, 3).unwrap()
        );
        assert!(GraphSpec::new(2, &[(0, 2)]).is_err());
    }

    #[test]
    fn lyndon_examples() {
        assert_eq!(WordSet::lyndon(6, 3).unwrap().len(), 91);
        assert_eq!(WordSet::lyndon(4, 6).unwrap().len(), 964);
        assert_eq!(
            labels(&WordSet::lyndon(2, 3).unwrap()),
            ["1", "2", "1.2", "1.1.2", "1.2.2"]
        );
        assert_eq!(labels(&WordSet::lyndon(1, 1).unwrap()), ["1"]);
    }

    #[test]
    fn lyndon_count_matches_witt() {
        for d in 1..=10u32 {
            for n in 1..=8u32 {
                let expected: u64 = (1..=n as u64).map(|k| witt(d as u64, k)).sum();
                if expected > 2_000_000 {
                    continue;
                }
                assert_eq!(
                    WordSet::lyndon(d, n).unwrap().len() as u64,
                    expected,
                    "d={d} n={n}"
                );
            }
        }
    }

    #[test]
    fn leadlag_sparse_examples() {
        // d=1: letters 1 = lag, 2 = lead.
        assert_eq!(
            labels(&WordSet::leadlag_sparse(1, 2).unwrap()),
            ["2", "1.2", "2.1", "2.2"]
        );
        assert_eq!(labels(&WordSet::leadlag_sparse(1, 1).unwrap()), ["2"]);
        // 2 single leads + 4 lead pairs + 4 matched lag/lead pairs.
        assert_eq!(WordSet::leadlag_sparse(2, 2).unwrap().len(), 10);
    }

    #[test]
    fn custom_examples() {
        let ws = WordSet::custom(&[vec![0], vec![0, 1], vec![0, 1], vec![2]], 3).unwrap();
        assert_eq!(labels(&ws), ["1", "3", "1.2"]);
        let ws = set_of(2, &["2.1"]);
        assert_eq!(
            ws.prefix_refs(0),
            [PrefixRef::Empty, PrefixRef::Absent, PrefixRef::At(0)]
        );
        assert!(!ws.is_prefix_closed());
        let all = set_of(2, &["2.2", "1", "2", "1.1", "1.2", "2.1"]);
        assert_eq!(all, WordSet::truncated(2, 2).unwrap());
        assert!(matches!(WordSet::custom(&[], 2), Err(SigError::Domain(_))));
        assert!(matches!(
            WordSet::custom(&[vec![0, 3]], 2),
            Err(SigError::InvalidLetter { letter: 4, d: 2 })
        ));
        assert!(matches!(
            WordSet::custom(&[vec![]], 2),
            Err(SigError::Domain(_))
        ));
    }

    #[test]
    fn descriptors() {
        let d = WordSetDescriptor::from_json(r#"{"type":"anisotropic","d":2,"gamma":[1,2],"r":3}"#)
            .unwrap();
        assert_eq!(WordSet::from_descriptor(&d, None).unwrap().len(), 6);
        let d =
            WordSetDescriptor::from_json(r#"{"type":"graph","edges":[[1,2]],"depth":2}"#).unwrap();
        assert_eq!(
            labels(&WordSet::from_descriptor(&d, Some(2)).unwrap()),
            ["1", "2", "1.2"]
        );
        let d = WordSetDescriptor::from_json(
            r#"{"type":"custom","d":3,"words":["1","1.2"],"include_empty":true}"#,
        )
        .unwrap();
        let ws = WordSet::from_descriptor(&d, None).unwrap();
        assert_eq!(labels(&ws), ["e", "1", "1.2"]);
        assert_eq!(ws.output_width(), 3);
        let d = WordSetDescriptor::from_json(r#"{"type":"leadlag_sparse","depth":2}"#).unwrap();
        assert_eq!(WordSet::from_descriptor(&d, Some(4)).unwrap().len(), 10);
        assert!(WordSetDescriptor::from_json(r#"{"type":"truncated","bogus":1}"#).is_err());
        let d = WordSetDescriptor::from_json(r#"{"type":"truncated","d":2}"#).unwrap();
        assert!(matches!(
            WordSet::from_descriptor(&d, None),
            Err(SigError::Parse(_))
        ));
        let d = WordSetDescriptor::from_json(r#"{"type":"hall","d":2,"depth":2}"#).unwrap();
        assert!(matches!(
            WordSet::from_descriptor(&d, None),
            Err(SigError::Parse(_))
        ));
    }

    #[test]
    fn witt_values() {
        assert_eq!(witt(2, 1), 2);
        assert_eq!(witt(2, 2), 1);
        assert_eq!(witt(2, 3), 2);
        assert_eq!(witt(2, 6), 9);
        assert_eq!(witt(4, 6), 670);
    }
}
