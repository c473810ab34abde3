//! Finite-length write-once-memory component codes.
//!
//! Codebooks here are plain tables. Write 1 maps a message to a codeword;
//! later writes map a message (and, for informed encoders, the prior state)
//! to a codeword that dominates the prior state componentwise. Uninformed
//! encoders emit a fixed codeword and the memory keeps the componentwise
//! maximum of prior state and codeword.

mod combinadic;
mod cover;
mod lemma2;
mod search;
mod verify;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde_json::{json, Map, Value};

pub use combinadic::{composition, cw_rank, cw_unrank, words_with_composition, ConstantWeightIndex};
pub use cover::{max_independent_set, Budget, Exhausted, Polychromatic};
pub use lemma2::{build_lemma2_two_write, build_lemma2_two_write_with_budget, lemma2_linear_decoder};
pub use search::{search_two_write_wom, CompositionConstraints, SearchOptions};
pub use verify::{verify_wom_codebook, AmbiguousDecode, WomReport};

/// A word over `[q]`, one digit per cell, cell 0 first.
pub type Word = Vec<u8>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WomError {
    #[error("index {index} out of range for a domain of size {size}")]
    IndexOutOfRange { index: u128, size: u128 },
    #[error("word {0} is outside the domain")]
    NotInDomain(String),
    #[error("integer overflow")]
    Overflow,
    #[error("search budget of {0} nodes exhausted")]
    BudgetExceeded(u64),
    #[error("infeasible composition constraints: {0}")]
    InfeasibleConstraints(String),
    #[error("search failed: {0}")]
    SearchFailed(String),
    #[error("parameters out of range: {0}")]
    OutOfRange(String),
    #[error("malformed codebook: {0}")]
    Malformed(String),
}

/// Which side information the second-write encoder has. Decoders never see
/// anything but the current word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WomModel {
    EiDu,
    EuDu,
}

impl fmt::Display for WomModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WomModel::EiDu => "EI:DU",
            WomModel::EuDu => "EU:DU",
        })
    }
}

impl FromStr for WomModel {
    type Err = WomError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().replace(['_', '-'], ":").as_str() {
            "EI:DU" => Ok(WomModel::EiDu),
            "EU:DU" => Ok(WomModel::EuDu),
            other => Err(WomError::Malformed(format!("unknown WOM model {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WomEncoder {
    /// Codeword per message, independent of the prior state.
    Fixed(Vec<Word>),
    /// Codeword per (message, prior state).
    Informed(BTreeMap<(usize, Word), Word>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WomWrite {
    pub messages: usize,
    pub encoder: WomEncoder,
    /// Word read after this write → message.
    pub decoder: BTreeMap<Word, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WomCodebook {
    pub n: usize,
    pub q: usize,
    pub model: WomModel,
    pub writes: Vec<WomWrite>,
    pub metadata: BTreeMap<String, String>,
}

impl WomCodebook {
    pub fn message_counts(&self) -> Vec<usize> {
        self.writes.iter().map(|w| w.messages).collect()
    }

    pub fn rates(&self) -> Vec<f64> {
        self.writes.iter().map(|w| (w.messages as f64).log2() / self.n as f64).collect()
    }

    /// Word stored after writing `message` on write `write` (0-based) over
    /// `prior`. `None` if the table has no entry.
    pub fn encode(&self, write: usize, message: usize, prior: &[u8]) -> Option<Word> {
        let w = self.writes.get(write)?;
        if message >= w.messages {
            return None;
        }
        match &w.encoder {
            WomEncoder::Fixed(words) => {
                let cw = words.get(message)?;
                Some(cw.iter().zip(prior).map(|(a, b)| *a.max(b)).collect())
            }
            WomEncoder::Informed(table) => table.get(&(message, prior.to_vec())).cloned(),
        }
    }

    pub fn decode(&self, write: usize, word: &[u8]) -> Option<usize> {
        self.writes.get(write)?.decoder.get(word).copied()
    }

    /// A one-write code using every binary word of length `n`.
    pub fn free_single_write(n: usize) -> Result<Self, WomError> {
        if n > 20 {
            return Err(WomError::OutOfRange(format!("n = {n} is too large for a full table")));
        }
        let words: Vec<Word> = (0..1usize << n).map(|x| index_word(x, n, 2)).collect();
        let decoder = words.iter().enumerate().map(|(m, w)| (w.clone(), m)).collect();
        Ok(Self {
            n,
            q: 2,
            model: WomModel::EiDu,
            writes: vec![WomWrite { messages: words.len(), encoder: WomEncoder::Fixed(words), decoder }],
            metadata: BTreeMap::new(),
        })
    }

    pub fn to_json(&self) -> Value {
        let writes: Vec<Value> = self
            .writes
            .iter()
            .map(|w| {
                let mut enc = Map::new();
                match &w.encoder {
                    WomEncoder::Fixed(words) => {
                        for (m, cw) in words.iter().enumerate() {
                            enc.insert(m.to_string(), Value::String(word_to_string(cw)));
                        }
                    }
                    WomEncoder::Informed(table) => {
                        for ((m, prior), cw) in table {
                            enc.insert(
                                format!("{m}|{}", word_to_string(prior)),
                                Value::String(word_to_string(cw)),
                            );
                        }
                    }
                }
                let dec: Map<String, Value> = w
                    .decoder
                    .iter()
                    .map(|(view, m)| (word_to_string(view), json!(m)))
                    .collect();
                json!({"M": w.messages, "encoder": enc, "decoder": dec})
            })
            .collect();
        let mut out = json!({"n": self.n, "q": self.q, "model": self.model.to_string(), "writes": writes});
        if !self.metadata.is_empty() {
            out["metadata"] = json!(self.metadata);
        }
        out
    }

    pub fn from_json(value: &Value) -> Result<Self, WomError> {
        let bad = |what: &str| WomError::Malformed(what.to_string());
        let n = value["n"].as_u64().ok_or_else(|| bad("missing n"))? as usize;
        let q = value["q"].as_u64().ok_or_else(|| bad("missing q"))? as usize;
        if !(2..=36).contains(&q) {
            return Err(bad("q must lie in 2..=36"));
        }
        let model: WomModel = value["model"].as_str().ok_or_else(|| bad("missing model"))?.parse()?;
        let parse_word = |s: &str| -> Result<Word, WomError> {
            let w = word_from_str(s, q)?;
            if w.len() != n {
                return Err(WomError::Malformed(format!("word {s:?} does not have length {n}")));
            }
            Ok(w)
        };
        let mut writes = Vec::new();
        for w in value["writes"].as_array().ok_or_else(|| bad("missing writes"))? {
            let messages = w["M"].as_u64().ok_or_else(|| bad("missing M"))? as usize;
            let enc = w["encoder"].as_object().ok_or_else(|| bad("missing encoder"))?;
            let informed = enc.keys().any(|k| k.contains('|'));
            let encoder = if informed {
                let mut table = BTreeMap::new();
                for (k, v) in enc {
                    let (m, prior) = k.split_once('|').ok_or_else(|| bad("mixed encoder keys"))?;
                    let m: usize = m.parse().map_err(|_| bad("bad message index"))?;
                    let cw = parse_word(v.as_str().ok_or_else(|| bad("codeword must be a string"))?)?;
                    table.insert((m, parse_word(prior)?), cw);
                }
                WomEncoder::Informed(table)
            } else {
                let mut words = vec![None; messages];
                for (k, v) in enc {
                    let m: usize = k.parse().map_err(|_| bad("bad message index"))?;
                    let slot = words.get_mut(m).ok_or_else(|| bad("message index exceeds M"))?;
                    *slot = Some(parse_word(v.as_str().ok_or_else(|| bad("codeword must be a string"))?)?);
                }
                WomEncoder::Fixed(
                    words.into_iter().collect::<Option<Vec<_>>>().ok_or_else(|| bad("encoder is not total"))?,
                )
            };
            let mut decoder = BTreeMap::new();
            for (k, v) in w["decoder"].as_object().ok_or_else(|| bad("missing decoder"))? {
                let m = v.as_u64().ok_or_else(|| bad("decoded message must be an integer"))? as usize;
                decoder.insert(parse_word(k)?, m);
            }
            writes.push(WomWrite { messages, encoder, decoder });
        }
        let mut metadata = BTreeMap::new();
        if let Some(meta) = value.get("metadata").and_then(Value::as_object) {
            for (k, v) in meta {
                let s = v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string());
                metadata.insert(k.clone(), s);
            }
        }
        Ok(Self { n, q, model, writes, metadata })
    }
}

pub(crate) fn digit_char(d: u8) -> char {
    char::from_digit(u32::from(d), 36).expect("digit below 36")
}

pub fn word_to_string(word: &[u8]) -> String {
    word.iter().map(|&d| digit_char(d)).collect()
}

pub fn word_from_str(s: &str, q: usize) -> Result<Word, WomError> {
    s.chars()
        .map(|ch| match ch.to_digit(36) {
            Some(d) if (d as usize) < q => Ok(d as u8),
            _ => Err(WomError::Malformed(format!("{s:?} is not a word over {q} symbols"))),
        })
        .collect()
}

/// The `x`-th word of `[q]^n` in lexicographic order.
pub(crate) fn index_word(mut x: usize, n: usize, q: usize) -> Word {
    let mut w = vec![0u8; n];
    for k in (0..n).rev() {
        w[k] = (x % q) as u8;
        x /= q;
    }
    w
}

pub(crate) fn word_index(w: &[u8], q: usize) -> usize {
    w.iter().fold(0, |acc, &d| acc * q + d as usize)
}

pub(crate) fn dominates(hi: &[u8], lo: &[u8]) -> bool {
    hi.iter().zip(lo).all(|(a, b)| a >= b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn words_and_indices() {
        assert_eq!(index_word(5, 3, 2), vec![1, 0, 1]);
        assert_eq!(word_index(&[2, 1], 3), 7);
        assert_eq!(word_to_string(&[0, 2, 1]), "021");
        assert_eq!(word_from_str("021", 3).unwrap(), vec![0, 2, 1]);
        assert!(word_from_str("031", 3).is_err());
        assert!(dominates(&[1, 2], &[1, 0]));
        assert!(!dominates(&[0, 2], &[1, 0]));
    }

    #[test]
    fn free_code_round_trips_through_json() {
        let code = WomCodebook::free_single_write(3).unwrap();
        assert_eq!(code.message_counts(), vec![8]);
        let back = WomCodebook::from_json(&code.to_json()).unwrap();
        assert_eq!(back, code);
        assert_eq!(code.encode(0, 5, &[0, 0, 0]), Some(vec![1, 0, 1]));
        assert_eq!(code.decode(0, &[1, 0, 1]), Some(5));
    }

    #[test]
    fn model_names() {
        assert_eq!("eu_du".parse::<WomModel>().unwrap(), WomModel::EuDu);
        assert_eq!(WomModel::EiDu.to_string(), "EI:DU");
    }
}
