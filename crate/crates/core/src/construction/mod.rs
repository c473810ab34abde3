//! Executable ELM codes: explicit per-write tables, the constructions that
//! fill them from component WOM codes, and an exhaustive verifier.

mod builders;
mod plan;
mod verify;

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Map, Value};

use crate::memory::{step_counts, Knowledge, ModelSpec};
use crate::wom::{word_from_str, word_to_string, WomError};

pub use builders::{
    build_construction1, build_construction2, build_construction3, build_construction4,
    construction1_components, construction4_components, Construction1Components, COMPONENT_SEARCH_BUDGET,
    Construction4Components, ComponentProvider, ComponentRequest, SearchProvider,
};
pub use plan::{optimal_partition, PhasePlan};
pub use verify::{trace_for, verify_elm_codebook, ElmReport, FailureWitness, ViewCheck};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConstructionError {
    #[error("invalid parameters: {0}")]
    Invalid(String),
    #[error("component shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("component code: {0}")]
    Component(#[from] WomError),
    #[error("no component for write {write} (q = {q}, composition {composition:?}): {source}")]
    Provider { write: usize, q: usize, composition: Vec<usize>, source: WomError },
    #[error("verification failed: {summary}")]
    VerificationFailed { summary: String, report: Box<ElmReport> },
    #[error("malformed codebook: {0}")]
    Malformed(String),
}

/// Tables of one write.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ElmWrite {
    pub messages: usize,
    /// `(message, encoder view)` → intended cell states.
    pub encoder: BTreeMap<(usize, Vec<u8>), Vec<u8>>,
    /// `(stored state, decoder side information)` → message.
    pub decoder: BTreeMap<(Vec<u8>, Vec<u8>), usize>,
}

/// Result of a passing verification, stamped onto emitted codebooks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifiedStamp {
    pub max_changes: u8,
    pub failures: u128,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElmCodebook {
    pub n: usize,
    pub t: usize,
    pub ell: u8,
    pub model: ModelSpec,
    pub writes: Vec<ElmWrite>,
    pub phases: Option<PhasePlan>,
    pub metadata: BTreeMap<String, String>,
    pub verified: Option<VerifiedStamp>,
}

/// What a party with knowledge `k` sees of the counts `v`.
pub fn view_of(k: Knowledge, v: &[u8]) -> Vec<u8> {
    match k {
        Knowledge::Ia => v.to_vec(),
        Knowledge::Ip => v.iter().map(|x| x % 2).collect(),
        Knowledge::U => Vec::new(),
    }
}

impl ElmCodebook {
    pub fn message_counts(&self) -> Vec<usize> {
        self.writes.iter().map(|w| w.messages).collect()
    }

    /// `Π M_j`, or `None` on overflow.
    pub fn product(&self) -> Option<u128> {
        self.writes.iter().try_fold(1u128, |acc, w| acc.checked_mul(w.messages as u128))
    }

    pub fn rates(&self) -> Vec<f64> {
        self.writes.iter().map(|w| (w.messages as f64).log2() / self.n as f64).collect()
    }

    pub fn sum_rate(&self) -> f64 {
        crate::compensated_sum(self.rates())
    }

    /// Intended states for `message` on write `write` (0-based) given the
    /// prior counts.
    pub fn encode(&self, write: usize, message: usize, counts: &[u8]) -> Option<&Vec<u8>> {
        self.writes
            .get(write)?
            .encoder
            .get(&(message, view_of(self.model.encoder, counts)))
    }

    pub fn decode(&self, write: usize, state: &[u8], prior_counts: &[u8]) -> Option<usize> {
        self.writes
            .get(write)?
            .decoder
            .get(&(state.to_vec(), view_of(self.model.decoder, prior_counts)))
            .copied()
    }

    /// Builds the tables by running `encode` and `decode` on every view
    /// reachable from the all-zero memory.
    ///
    /// `encode(j, m, view)` returns the intended states for message `m` on
    /// write `j` (0-based), or `None` to leave the entry out; `decode(j,
    /// state, side)` likewise.
    pub fn tabulate<E, D>(
        n: usize,
        ell: u8,
        model: ModelSpec,
        messages: Vec<usize>,
        mut encode: E,
        mut decode: D,
    ) -> Result<Self, ConstructionError>
    where
        E: FnMut(usize, usize, &[u8]) -> Result<Option<Vec<u8>>, ConstructionError>,
        D: FnMut(usize, &[u8], &[u8]) -> Option<usize>,
    {
        if ell == 0 {
            return Err(ConstructionError::Invalid("ell must be at least 1".into()));
        }
        let t = messages.len();
        let mut writes = Vec::with_capacity(t);
        let mut reach: BTreeSet<Vec<u8>> = BTreeSet::new();
        reach.insert(vec![0; n]);
        for (j, &m_count) in messages.iter().enumerate() {
            let mut write = ElmWrite { messages: m_count, ..Default::default() };
            let mut next = BTreeSet::new();
            for v in &reach {
                let view = view_of(model.encoder, v);
                let side = view_of(model.decoder, v);
                for m in 0..m_count {
                    let intended = match write.encoder.get(&(m, view.clone())) {
                        Some(c) => c.clone(),
                        None => match encode(j, m, &view)? {
                            Some(c) => {
                                if c.len() != n || c.iter().any(|&b| b > 1) {
                                    return Err(ConstructionError::Invalid(format!(
                                        "write {}: encoder produced a non-binary or mis-sized word",
                                        j + 1
                                    )));
                                }
                                write.encoder.insert((m, view.clone()), c.clone());
                                c
                            }
                            None => continue,
                        },
                    };
                    let (counts, _) = step_counts(v, &intended, ell);
                    let state: Vec<u8> = counts.iter().map(|x| x % 2).collect();
                    let key = (state, side.clone());
                    if !write.decoder.contains_key(&key) {
                        if let Some(d) = decode(j, &key.0, &key.1) {
                            write.decoder.insert(key, d);
                        }
                    }
                    next.insert(counts);
                }
            }
            writes.push(write);
            reach = next;
        }
        Ok(Self {
            n,
            t,
            ell,
            model,
            writes,
            phases: None,
            metadata: BTreeMap::new(),
            verified: None,
        })
    }

    pub fn to_json(&self) -> Value {
        let key = |a: &[u8], b: &[u8]| {
            if b.is_empty() && a.is_empty() {
                String::new()
            } else if b.is_empty() {
                word_to_string(a)
            } else {
                format!("{}|{}", word_to_string(a), word_to_string(b))
            }
        };
        let writes: Vec<Value> = self
            .writes
            .iter()
            .map(|w| {
                let enc: Map<String, Value> = w
                    .encoder
                    .iter()
                    .map(|((m, view), c)| {
                        let k = if view.is_empty() {
                            m.to_string()
                        } else {
                            format!("{m}|{}", word_to_string(view))
                        };
                        (k, Value::String(word_to_string(c)))
                    })
                    .collect();
                let dec: Map<String, Value> = w
                    .decoder
                    .iter()
                    .map(|((state, side), m)| (key(state, side), json!(m)))
                    .collect();
                json!({"M": w.messages, "encoder": enc, "decoder": dec})
            })
            .collect();
        let mut out = json!({
            "n": self.n,
            "t": self.t,
            "ell": self.ell,
            "model": self.model.to_string(),
            "writes": writes,
        });
        if let Some(plan) = &self.phases {
            out["phases"] = plan.to_json();
        }
        if !self.metadata.is_empty() {
            out["metadata"] = json!(self.metadata);
        }
        if let Some(v) = self.verified {
            out["verified"] = json!({"max_changes": v.max_changes, "failures": v.failures as u64});
        }
        out
    }

    pub fn from_json(value: &Value) -> Result<Self, ConstructionError> {
        let bad = |what: &str| ConstructionError::Malformed(what.to_string());
        let n = value["n"].as_u64().ok_or_else(|| bad("missing n"))? as usize;
        let t = value["t"].as_u64().ok_or_else(|| bad("missing t"))? as usize;
        let ell = value["ell"].as_u64().filter(|&l| (1..=35).contains(&l)).ok_or_else(|| bad("ell must lie in 1..=35"))? as u8;
        let model: ModelSpec = value["model"]
            .as_str()
            .ok_or_else(|| bad("missing model"))?
            .parse()
            .map_err(ConstructionError::Malformed)?;
        let word = |s: &str, q: usize, len: usize| -> Result<Vec<u8>, ConstructionError> {
            let w = word_from_str(s, q).map_err(|e| ConstructionError::Malformed(e.to_string()))?;
            if w.len() != len {
                return Err(ConstructionError::Malformed(format!("{s:?} does not have length {len}")));
            }
            Ok(w)
        };
        let view_len = |k: Knowledge| if k == Knowledge::U { 0 } else { n };
        let view_q = |k: Knowledge| if k == Knowledge::Ia { ell as usize + 1 } else { 2 };
        let mut writes = Vec::new();
        for w in value["writes"].as_array().ok_or_else(|| bad("missing writes"))? {
            let messages = w["M"].as_u64().ok_or_else(|| bad("missing M"))? as usize;
            let mut write = ElmWrite { messages, ..Default::default() };
            for (k, v) in w["encoder"].as_object().ok_or_else(|| bad("missing encoder"))? {
                let (m, view) = k.split_once('|').unwrap_or((k.as_str(), ""));
                let m: usize = m.parse().map_err(|_| bad("bad message index"))?;
                let view = word(view, view_q(model.encoder), view_len(model.encoder))?;
                let c = word(v.as_str().ok_or_else(|| bad("states must be strings"))?, 2, n)?;
                write.encoder.insert((m, view), c);
            }
            for (k, v) in w["decoder"].as_object().ok_or_else(|| bad("missing decoder"))? {
                let (state, side) = k.split_once('|').unwrap_or((k.as_str(), ""));
                let state = word(state, 2, n)?;
                let side = word(side, view_q(model.decoder), view_len(model.decoder))?;
                let m = v.as_u64().ok_or_else(|| bad("decoded message must be an integer"))? as usize;
                write.decoder.insert((state, side), m);
            }
            writes.push(write);
        }
        if writes.len() != t {
            return Err(bad("number of writes differs from t"));
        }
        let phases = match value.get("phases") {
            Some(p) => Some(PhasePlan::from_json(p)?),
            None => None,
        };
        let mut metadata = BTreeMap::new();
        if let Some(meta) = value.get("metadata").and_then(Value::as_object) {
            for (k, v) in meta {
                metadata.insert(k.clone(), v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string()));
            }
        }
        let verified = value.get("verified").map(|v| VerifiedStamp {
            max_changes: v["max_changes"].as_u64().unwrap_or(0) as u8,
            failures: v["failures"].as_u64().unwrap_or(0) as u128,
        });
        Ok(Self { n, t, ell, model, writes, phases, metadata, verified })
    }
}

/// A `t`-write code that stores an arbitrary `n`-bit word every time. Valid
/// in every model when `ℓ ≥ t`.
pub fn free_code(n: usize, t: usize, ell: u8, model: ModelSpec) -> Result<ElmCodebook, ConstructionError> {
    if n > 16 {
        return Err(ConstructionError::Invalid(format!("n = {n} is too large for full tables")));
    }
    let word = |m: usize| crate::wom::word_from_str(&format!("{m:0n$b}"), 2).expect("binary");
    let mut code = ElmCodebook::tabulate(
        n,
        ell,
        model,
        vec![1 << n; t],
        |_, m, _| Ok(Some(word(m))),
        |_, state, _| Some(state.iter().fold(0usize, |acc, &b| acc * 2 + b as usize)),
    )?;
    code.metadata.insert("construction".into(), "free".into());
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_code_passes_in_every_model() {
        for model in ModelSpec::all(crate::memory::Regime::ZeroError) {
            let code = free_code(2, 2, 2, model).unwrap();
            let report = verify_elm_codebook(&code);
            assert!(report.zero_error, "{model}");
            assert_eq!(report.max_changes, 2);
            let back = ElmCodebook::from_json(&code.to_json()).unwrap();
            assert_eq!(back, code);
        }
    }

    #[test]
    fn free_code_over_budget_saturates() {
        let code = free_code(1, 3, 2, ModelSpec::zero_error(Knowledge::U, Knowledge::U)).unwrap();
        let report = verify_elm_codebook(&code);
        assert!(!report.zero_error);
        assert!(report.max_changes > 2);
        assert!(report.first_saturation.is_some());
    }
}
