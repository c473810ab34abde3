use std::collections::{BTreeMap, BTreeSet};

use super::{view_of, ElmCodebook};
use crate::memory::{replay_trace, step_counts, CellStateVector, Knowledge, MemoryTrace};

/// A message sequence and the memory trace it produces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailureWitness {
    pub messages: Vec<usize>,
    pub trace: MemoryTrace,
}

/// Whether a decoder could have made do with the next smaller view.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ViewCheck {
    pub declared: Knowledge,
    /// `Some(true)` when the reachable (state, smaller view) pairs already
    /// determine the message; `None` for uninformed decoders.
    pub smaller_view_sufficient: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElmReport {
    /// No decoding failure, no missing table entry, and (for EIA encoders)
    /// no saturation event.
    pub zero_error: bool,
    /// `M₁·…·M_t` (saturating).
    pub sequences: u128,
    /// Failed message sequences per write, out of `M₁·…·M_j`.
    pub failures: Vec<u128>,
    pub failure_fraction: Vec<f64>,
    pub missing_entries: u128,
    /// Message sequences whose write `j` tried to toggle a cell already at ℓ.
    pub saturations: Vec<u128>,
    /// Largest number of toggles any cell was asked to make, counting the
    /// absorbed ones; above ℓ exactly when some trace breaks the budget.
    pub max_changes: u8,
    pub first_failure: Option<FailureWitness>,
    pub first_saturation: Option<FailureWitness>,
    pub views: Vec<ViewCheck>,
}

impl ElmReport {
    pub fn budget_respected(&self, ell: u8) -> bool {
        self.max_changes <= ell
    }

    pub fn total_failures(&self) -> u128 {
        self.failures.iter().sum()
    }
}

struct Node {
    mult: u128,
    prefix: Vec<usize>,
}

/// Replays every message sequence (merging sequences that lead to the same
/// counts) and checks each decoder on exactly its declared view.
pub fn verify_elm_codebook(code: &ElmCodebook) -> ElmReport {
    let n = code.n;
    let ell = code.ell;
    let model = code.model;
    // Key: (capped counts, attempted toggles per cell).
    let mut level: BTreeMap<(Vec<u8>, Vec<u8>), Node> = BTreeMap::new();
    level.insert((vec![0; n], vec![0; n]), Node { mult: 1, prefix: Vec::new() });
    let mut report = ElmReport {
        zero_error: true,
        sequences: 1,
        failures: Vec::new(),
        failure_fraction: Vec::new(),
        missing_entries: 0,
        saturations: Vec::new(),
        max_changes: 0,
        first_failure: None,
        first_saturation: None,
        views: Vec::new(),
    };
    let mut first_failure: Option<Vec<usize>> = None;
    let mut first_saturation: Option<Vec<usize>> = None;
    let better = |cand: &Vec<usize>, cur: &Option<Vec<usize>>| match cur {
        None => true,
        Some(c) => (cand.len(), cand) < (c.len(), c),
    };

    for write in &code.writes {
        let mut next: BTreeMap<(Vec<u8>, Vec<u8>), Node> = BTreeMap::new();
        let mut failed = 0u128;
        let mut saturated = 0u128;
        // Messages seen per (state, next smaller decoder view).
        let mut coarse: BTreeMap<(Vec<u8>, Vec<u8>), BTreeSet<usize>> = BTreeMap::new();
        let smaller = match model.decoder {
            Knowledge::Ia => Some(Knowledge::Ip),
            Knowledge::Ip => Some(Knowledge::U),
            Knowledge::U => None,
        };
        for ((v, attempted), node) in &level {
            let view = view_of(model.encoder, v);
            let side = view_of(model.decoder, v);
            for m in 0..write.messages {
                let mut seq = node.prefix.clone();
                seq.push(m);
                let Some(intended) = write.encoder.get(&(m, view.clone())) else {
                    report.missing_entries += node.mult;
                    failed += node.mult;
                    if better(&seq, &first_failure) {
                        first_failure = Some(seq);
                    }
                    continue;
                };
                let (counts, sat) = step_counts(v, intended, ell);
                let toggled: Vec<u8> = attempted
                    .iter()
                    .zip(v.iter().zip(intended))
                    .map(|(&a, (&vk, &ck))| a + u8::from(ck != vk % 2))
                    .collect();
                if !sat.is_empty() {
                    saturated += node.mult;
                    if better(&seq, &first_saturation) {
                        first_saturation = Some(seq.clone());
                    }
                }
                let state: Vec<u8> = counts.iter().map(|x| x % 2).collect();
                if let Some(k) = smaller {
                    coarse.entry((state.clone(), view_of(k, v))).or_default().insert(m);
                }
                match write.decoder.get(&(state, side.clone())) {
                    Some(&d) if d == m => {}
                    found => {
                        if found.is_none() {
                            report.missing_entries += node.mult;
                        }
                        failed += node.mult;
                        if better(&seq, &first_failure) {
                            first_failure = Some(seq.clone());
                        }
                    }
                }
                let entry = next
                    .entry((counts, toggled))
                    .or_insert_with(|| Node { mult: 0, prefix: seq.clone() });
                entry.mult += node.mult;
                if seq < entry.prefix {
                    entry.prefix = seq;
                }
            }
        }
        report.sequences = report.sequences.saturating_mul(write.messages as u128);
        report.failures.push(failed);
        report.failure_fraction.push(if report.sequences == 0 {
            0.0
        } else {
            failed as f64 / report.sequences as f64
        });
        report.saturations.push(saturated);
        report.views.push(ViewCheck {
            declared: model.decoder,
            smaller_view_sufficient: smaller.map(|_| coarse.values().all(|s| s.len() == 1)),
        });
        for (_, attempted) in next.keys() {
            report.max_changes = report.max_changes.max(attempted.iter().copied().max().unwrap_or(0));
        }
        level = next;
    }
    report.zero_error = report.failures.iter().all(|&f| f == 0)
        && report.missing_entries == 0
        && (model.encoder != Knowledge::Ia || report.saturations.iter().all(|&s| s == 0));
    report.first_failure = first_failure.and_then(|s| witness(code, &s));
    report.first_saturation = first_saturation.and_then(|s| witness(code, &s));
    report
}

fn witness(code: &ElmCodebook, messages: &[usize]) -> Option<FailureWitness> {
    Some(FailureWitness { messages: messages.to_vec(), trace: trace_for(code, messages)? })
}

/// The memory trace of a message sequence, following the encoder tables as
/// far as they reach.
pub fn trace_for(code: &ElmCodebook, messages: &[usize]) -> Option<MemoryTrace> {
    let mut counts = vec![0u8; code.n];
    let mut intended = Vec::with_capacity(messages.len());
    for (j, &m) in messages.iter().enumerate() {
        let Some(c) = code.encode(j, m, &counts) else { break };
        intended.push(CellStateVector::from_bits(c.clone()).ok()?);
        counts = step_counts(&counts, c, code.ell).0;
    }
    if intended.is_empty() {
        return Some(MemoryTrace { n: code.n, ell: code.ell, writes: Vec::new() });
    }
    replay_trace(code.ell, &intended).ok()
}
