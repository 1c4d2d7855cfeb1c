//! Execution traces and their LZ78 instantaneous bit rates.
//!
//! A trace is a sequence of instruction tokens. It is parsed into LZ78
//! phrases over the token alphabet; phrase `i` (1-based) costs
//! `⌈log₂ i⌉` bits for its dictionary reference plus `w = ⌈log₂ |Σ|⌉` bits
//! for its extension token. A final phrase that ends exactly on a
//! dictionary entry has no extension and pays for the reference only.
//! Each token carries its phrase's cost divided by the phrase length, so
//! the per-token bits sum to the total.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::TraceError;

/// How a trace line becomes a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TokenMode {
    /// The whole line, verbatim.
    #[default]
    Line,
    /// The first whitespace-separated word (the opcode).
    Opcode,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trace {
    symbols: Vec<u32>,
    alphabet: Vec<String>,
}

impl Trace {
    pub fn from_tokens<S: AsRef<str>>(tokens: impl IntoIterator<Item = S>) -> Self {
        let mut ids: HashMap<String, u32> = HashMap::new();
        let mut alphabet = Vec::new();
        let symbols = tokens
            .into_iter()
            .map(|t| {
                let t = t.as_ref();
                if let Some(&id) = ids.get(t) {
                    return id;
                }
                let id = alphabet.len() as u32;
                ids.insert(t.to_string(), id);
                alphabet.push(t.to_string());
                id
            })
            .collect();
        Trace { symbols, alphabet }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Distinct tokens in order of first occurrence.
    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    /// Token ids, indexing [`alphabet`](Self::alphabet).
    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> + '_ {
        self.symbols.iter().map(|&s| self.alphabet[s as usize].as_str())
    }
}

/// One token per line; blank lines and lines starting with `#` are skipped.
pub fn read_trace(bytes: &[u8]) -> Result<Trace, TraceError> {
    read_trace_with(bytes, TokenMode::Line)
}

pub fn read_trace_with(bytes: &[u8], mode: TokenMode) -> Result<Trace, TraceError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| TraceError::InvalidUtf8 { offset: e.valid_up_to() })?;
    let tokens = text
        .lines()
        .filter(|line| !line.trim().is_empty() && !line.starts_with('#'))
        .map(|line| match mode {
            TokenMode::Line => line,
            TokenMode::Opcode => line.split_whitespace().next().unwrap_or(line),
        });
    Ok(Trace::from_tokens(tokens))
}

/// An LZ78 phrase: dictionary entry `index` (0 is the empty phrase)
/// extended by one token, or by nothing for a final partial phrase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Phrase {
    pub index: usize,
    pub extension: Option<u32>,
    pub length: usize,
    pub bits: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lz78Encoding {
    pub alphabet: Vec<String>,
    pub phrases: Vec<Phrase>,
    /// Instantaneous bit rate of each token.
    pub per_symbol_bits: Vec<f64>,
    pub total_bits: u64,
    /// Bits per extension token.
    pub symbol_width: u32,
}

impl Lz78Encoding {
    pub fn len(&self) -> usize {
        self.per_symbol_bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_symbol_bits.is_empty()
    }
}

/// `⌈log₂ n⌉`, with `⌈log₂ 1⌉ = 0`. `n` must be positive.
pub fn ceil_log2(n: usize) -> u32 {
    debug_assert!(n > 0);
    usize::BITS - (n - 1).leading_zeros()
}

pub fn lz78_encode(trace: &Trace) -> Lz78Encoding {
    let width = if trace.alphabet.len() <= 1 { 0 } else { ceil_log2(trace.alphabet.len()) };
    // (dictionary entry, token) -> child entry
    let mut trie: HashMap<(usize, u32), usize> = HashMap::new();
    let mut phrases: Vec<Phrase> = Vec::new();
    let mut node = 0usize;
    let mut length = 0usize;
    for &sym in &trace.symbols {
        length += 1;
        if let Some(&child) = trie.get(&(node, sym)) {
            node = child;
            continue;
        }
        let number = phrases.len() + 1;
        trie.insert((node, sym), number);
        phrases.push(Phrase {
            index: node,
            extension: Some(sym),
            length,
            bits: ceil_log2(number) + width,
        });
        node = 0;
        length = 0;
    }
    if length > 0 {
        let number = phrases.len() + 1;
        phrases.push(Phrase { index: node, extension: None, length, bits: ceil_log2(number) });
    }

    let mut per_symbol_bits = Vec::with_capacity(trace.len());
    let mut total_bits = 0u64;
    for p in &phrases {
        let share = f64::from(p.bits) / p.length as f64;
        per_symbol_bits.extend(std::iter::repeat_n(share, p.length));
        total_bits += u64::from(p.bits);
    }
    Lz78Encoding {
        alphabet: trace.alphabet.clone(),
        phrases,
        per_symbol_bits,
        total_bits,
        symbol_width: width,
    }
}

pub fn lz78_decode(encoding: &Lz78Encoding) -> Result<Trace, TraceError> {
    let alphabet = encoding.alphabet.len();
    // entry i = (parent entry, token); entry 0 is the empty phrase
    let mut entries: Vec<(usize, u32)> = vec![(0, 0)];
    let mut symbols = Vec::new();
    let mut scratch = Vec::new();
    for (i, p) in encoding.phrases.iter().enumerate() {
        let number = i + 1;
        if p.index >= number {
            return Err(TraceError::DanglingIndex { phrase: number, index: p.index });
        }
        scratch.clear();
        let mut cur = p.index;
        while cur != 0 {
            let (parent, sym) = entries[cur];
            scratch.push(sym);
            cur = parent;
        }
        scratch.reverse();
        match p.extension {
            Some(sym) if (sym as usize) >= alphabet => {
                return Err(TraceError::UnknownSymbol { phrase: number, symbol: sym, alphabet });
            }
            Some(sym) => scratch.push(sym),
            None if p.index == 0 => return Err(TraceError::EmptyPhrase { phrase: number }),
            None => {}
        }
        symbols.extend_from_slice(&scratch);
        entries.push((p.index, p.extension.unwrap_or(0)));
    }
    Ok(Trace { symbols, alphabet: encoding.alphabet.clone() })
}

/// Average bits per token, the compression estimate of the execution rate.
pub fn exe_rate_estimate(encoding: &Lz78Encoding) -> Result<f64, TraceError> {
    if encoding.is_empty() {
        return Err(TraceError::EmptyTrace);
    }
    Ok(encoding.total_bits as f64 / encoding.len() as f64)
}

/// Neumaier-compensated sum.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(s: &str) -> Trace {
        Trace::from_tokens(s.chars().map(|c| c.to_string()))
    }

    #[test]
    fn reads_one_token_per_line() {
        let t = read_trace(b"mov\nadd\nmov\n").unwrap();
        assert_eq!(t.tokens().collect::<Vec<_>>(), ["mov", "add", "mov"]);
        assert_eq!(t.alphabet().len(), 2);
    }

    #[test]
    fn empty_document() {
        assert!(read_trace(b"").unwrap().is_empty());
    }

    #[test]
    fn skips_blank_and_comment_lines() {
        let t = read_trace(b"a\n\n# c\nb\n").unwrap();
        assert_eq!(t.tokens().collect::<Vec<_>>(), ["a", "b"]);
    }

    #[test]
    fn keeps_lines_verbatim_unless_asked() {
        let doc = b"mov eax, 1\r\nmov ebx, 2\n  \n";
        let t = read_trace(doc).unwrap();
        assert_eq!(t.tokens().collect::<Vec<_>>(), ["mov eax, 1", "mov ebx, 2"]);
        let t = read_trace_with(doc, TokenMode::Opcode).unwrap();
        assert_eq!(t.tokens().collect::<Vec<_>>(), ["mov", "mov"]);
    }

    #[test]
    fn reports_utf8_offset() {
        assert_eq!(read_trace(b"ok\n\xffbad").unwrap_err(), TraceError::InvalidUtf8 { offset: 3 });
    }

    #[test]
    fn ceil_log2_values() {
        let got: Vec<u32> = (1..=9).map(ceil_log2).collect();
        assert_eq!(got, [0, 1, 2, 2, 3, 3, 3, 3, 4]);
    }

    #[test]
    fn unary_trace_encoding() {
        // a | aa | a(partial): bits 0, 1, 2
        let e = lz78_encode(&trace("aaaa"));
        assert_eq!(e.symbol_width, 0);
        let bits: Vec<u32> = e.phrases.iter().map(|p| p.bits).collect();
        assert_eq!(bits, [0, 1, 2]);
        assert_eq!(e.phrases[2], Phrase { index: 1, extension: None, length: 1, bits: 2 });
        assert_eq!(e.per_symbol_bits, [0.0, 0.5, 0.5, 2.0]);
        assert_eq!(e.total_bits, 3);
        assert_eq!(exe_rate_estimate(&e).unwrap(), 0.75);
    }

    #[test]
    fn binary_trace_encoding() {
        // a | b | ab | ab(partial): bits 1, 2, 3, 2
        let e = lz78_encode(&trace("ababab"));
        assert_eq!(e.symbol_width, 1);
        let bits: Vec<u32> = e.phrases.iter().map(|p| p.bits).collect();
        assert_eq!(bits, [1, 2, 3, 2]);
        assert_eq!(e.phrases[2].index, 1);
        assert_eq!(e.phrases[3], Phrase { index: 3, extension: None, length: 2, bits: 2 });
        assert_eq!(e.total_bits, 8);
        assert!((exe_rate_estimate(&e).unwrap() - 8.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn empty_trace_encoding() {
        let e = lz78_encode(&Trace::default());
        assert_eq!(e.total_bits, 0);
        assert!(e.phrases.is_empty());
        assert_eq!(lz78_decode(&e).unwrap(), Trace::default());
        assert_eq!(exe_rate_estimate(&e).unwrap_err(), TraceError::EmptyTrace);
    }

    #[test]
    fn single_token_costs_symbol_width() {
        assert_eq!(exe_rate_estimate(&lz78_encode(&trace("a"))).unwrap(), 0.0);
        let t = Trace { symbols: vec![2], alphabet: vec!["x".into(), "y".into(), "z".into()] };
        assert_eq!(exe_rate_estimate(&lz78_encode(&t)).unwrap(), 2.0);
    }

    #[test]
    fn decodes_hand_examples() {
        for s in ["aaaa", "ababab"] {
            let t = trace(s);
            assert_eq!(lz78_decode(&lz78_encode(&t)).unwrap(), t);
        }
    }

    #[test]
    fn rejects_forward_references() {
        let mut e = lz78_encode(&trace("ababab"));
        e.phrases[1].index = 2;
        assert_eq!(lz78_decode(&e).unwrap_err(), TraceError::DanglingIndex { phrase: 2, index: 2 });
        let mut e = lz78_encode(&trace("ababab"));
        e.phrases[0].extension = Some(7);
        assert!(matches!(lz78_decode(&e), Err(TraceError::UnknownSymbol { .. })));
        let mut e = lz78_encode(&trace("ab"));
        e.phrases[1].extension = None;
        assert_eq!(lz78_decode(&e).unwrap_err(), TraceError::EmptyPhrase { phrase: 2 });
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(&v), 2.0);
    }
}
