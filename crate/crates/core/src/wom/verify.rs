use std::collections::{BTreeMap, BTreeSet};

use super::{dominates, word_to_string, WomCodebook, WomEncoder, WomModel, Word};

/// Several messages that end in the same word on the same write.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmbiguousDecode {
    pub write: usize,
    pub word: String,
    pub messages: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WomReport {
    pub zero_error: bool,
    /// `"write j: message m over <prior> gives <codeword>"` lines.
    pub monotonicity_violations: Vec<String>,
    pub ambiguous: Vec<AmbiguousDecode>,
    /// Encoder or decoder entries that a reachable pair needs but the tables
    /// lack.
    pub missing_entries: Vec<String>,
    /// Failed `(message sequence)` count per write, out of
    /// `M₁·…·M_j` equally likely sequences.
    pub failures: Vec<u128>,
    pub failure_fraction: Vec<f64>,
}

/// Replays every message sequence through the code and checks that each
/// write decodes.
pub fn verify_wom_codebook(code: &WomCodebook) -> WomReport {
    let mut report = WomReport {
        zero_error: true,
        monotonicity_violations: Vec::new(),
        ambiguous: Vec::new(),
        missing_entries: Vec::new(),
        failures: Vec::new(),
        failure_fraction: Vec::new(),
    };
    // Reachable words with the number of message sequences leading there.
    let mut states: BTreeMap<Word, u128> = BTreeMap::new();
    states.insert(vec![0; code.n], 1);
    let mut sequences: u128 = 1;
    for (j, write) in code.writes.iter().enumerate() {
        let mut next: BTreeMap<Word, u128> = BTreeMap::new();
        let mut produced: BTreeMap<Word, BTreeSet<usize>> = BTreeMap::new();
        let mut failed: u128 = 0;
        for (prior, &mult) in &states {
            for m in 0..write.messages {
                let raw = match &write.encoder {
                    WomEncoder::Fixed(words) => words.get(m).cloned(),
                    WomEncoder::Informed(table) => table.get(&(m, prior.clone())).cloned(),
                };
                let Some(raw) = raw else {
                    report.missing_entries.push(format!(
                        "write {}: no codeword for message {m} over {}",
                        j + 1,
                        word_to_string(prior)
                    ));
                    failed += mult;
                    continue;
                };
                if code.model == WomModel::EiDu && !dominates(&raw, prior) {
                    report.monotonicity_violations.push(format!(
                        "write {}: message {m} over {} gives {}",
                        j + 1,
                        word_to_string(prior),
                        word_to_string(&raw)
                    ));
                }
                let stored: Word = raw.iter().zip(prior).map(|(a, b)| *a.max(b)).collect();
                match write.decoder.get(&stored) {
                    Some(&d) if d == m => {}
                    Some(_) => failed += mult,
                    None => {
                        report.missing_entries.push(format!(
                            "write {}: no decoder entry for {}",
                            j + 1,
                            word_to_string(&stored)
                        ));
                        failed += mult;
                    }
                }
                produced.entry(stored.clone()).or_default().insert(m);
                *next.entry(stored).or_default() += mult;
            }
        }
        for (word, messages) in produced {
            if messages.len() > 1 {
                report.ambiguous.push(AmbiguousDecode {
                    write: j + 1,
                    word: word_to_string(&word),
                    messages: messages.into_iter().collect(),
                });
            }
        }
        sequences = sequences.saturating_mul(write.messages as u128);
        report.failures.push(failed);
        report.failure_fraction.push(if sequences == 0 { 0.0 } else { failed as f64 / sequences as f64 });
        states = next;
    }
    report.zero_error = report.monotonicity_violations.is_empty()
        && report.ambiguous.is_empty()
        && report.missing_entries.is_empty()
        && report.failures.iter().all(|&f| f == 0);
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wom::{WomEncoder, WomWrite};

    #[test]
    fn shared_codeword_is_flagged() {
        // two messages of write 2 both written as 11 from the state 00
        let mut table = BTreeMap::new();
        table.insert((0, vec![0, 0]), vec![1, 1]);
        table.insert((1, vec![0, 0]), vec![1, 1]);
        let mut decoder2 = BTreeMap::new();
        decoder2.insert(vec![1, 1], 0);
        let code = WomCodebook {
            n: 2,
            q: 2,
            model: WomModel::EiDu,
            writes: vec![
                WomWrite {
                    messages: 1,
                    encoder: WomEncoder::Fixed(vec![vec![0, 0]]),
                    decoder: [(vec![0, 0], 0)].into_iter().collect(),
                },
                WomWrite { messages: 2, encoder: WomEncoder::Informed(table), decoder: decoder2 },
            ],
            metadata: BTreeMap::new(),
        };
        let r = verify_wom_codebook(&code);
        assert!(!r.zero_error);
        assert_eq!(
            r.ambiguous,
            vec![AmbiguousDecode { write: 2, word: "11".into(), messages: vec![0, 1] }]
        );
        assert_eq!(r.failures, vec![0, 1]);
        assert!((r.failure_fraction[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn decreasing_codeword_is_a_violation() {
        let mut table = BTreeMap::new();
        table.insert((0, vec![1]), vec![0]);
        let code = WomCodebook {
            n: 1,
            q: 2,
            model: WomModel::EiDu,
            writes: vec![
                WomWrite {
                    messages: 1,
                    encoder: WomEncoder::Fixed(vec![vec![1]]),
                    decoder: [(vec![1], 0)].into_iter().collect(),
                },
                WomWrite {
                    messages: 1,
                    encoder: WomEncoder::Informed(table),
                    decoder: [(vec![1], 0)].into_iter().collect(),
                },
            ],
            metadata: BTreeMap::new(),
        };
        let r = verify_wom_codebook(&code);
        assert_eq!(r.monotonicity_violations.len(), 1);
        assert!(!r.zero_error);
    }
}
