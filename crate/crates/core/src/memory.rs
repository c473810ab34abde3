//! The physical cell model.
//!
//! A memory is `n` binary cells. Every cell carries a change counter that
//! saturates at the endurance budget `ℓ`; once a cell has changed `ℓ` times
//! any further attempt to toggle it is silently absorbed. Writing an intended
//! state `c` on top of counts `v` follows
//!
//! ```text
//! N(v,c)_k = v_k                 if c_k ≡ v_k (mod 2)
//!          = min(ℓ, v_k + 1)     otherwise
//! f(v,c)_k = c_k                 if v_k < ℓ
//!          = v_k mod 2           otherwise
//! ```
//!
//! and the stored state is always the parity of the counts.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MemoryError {
    #[error("length mismatch: expected {expected} cells, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid cell symbol {0:?} (expected '0' or '1')")]
    InvalidBit(char),
    #[error("count {count} at cell {cell} exceeds the budget {ell}")]
    CountOutOfRange { cell: usize, count: u8, ell: u8 },
    #[error("endurance budget must be at least 1")]
    ZeroBudget,
    #[error("trace record {write} does not match a replay of its intended states")]
    InconsistentTrace { write: usize },
    #[error("malformed trace: {0}")]
    Malformed(String),
}

/// Binary cell states, cell 0 first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellStateVector {
    bits: Vec<u8>,
}

impl CellStateVector {
    pub fn zeros(n: usize) -> Self {
        Self { bits: vec![0; n] }
    }

    pub fn from_bits(bits: Vec<u8>) -> Result<Self, MemoryError> {
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(MemoryError::InvalidBit(char::from(b'0' + b.min(9))));
        }
        Ok(Self { bits })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn complement(&self) -> Self {
        Self { bits: self.bits.iter().map(|b| 1 - b).collect() }
    }
}

impl fmt::Display for CellStateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl FromStr for CellStateVector {
    type Err = MemoryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .trim()
            .chars()
            .map(|ch| match ch {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(MemoryError::InvalidBit(other)),
            })
            .collect::<Result<Vec<u8>, _>>()?;
        Ok(Self { bits })
    }
}

/// Per-cell change counts together with the budget they live under.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProgramCountVector {
    counts: Vec<u8>,
    ell: u8,
}

impl ProgramCountVector {
    pub fn zeros(n: usize, ell: u8) -> Result<Self, MemoryError> {
        if ell == 0 {
            return Err(MemoryError::ZeroBudget);
        }
        Ok(Self { counts: vec![0; n], ell })
    }

    pub fn new(counts: Vec<u8>, ell: u8) -> Result<Self, MemoryError> {
        if ell == 0 {
            return Err(MemoryError::ZeroBudget);
        }
        if let Some((cell, &count)) = counts.iter().enumerate().find(|(_, &c)| c > ell) {
            return Err(MemoryError::CountOutOfRange { cell, count, ell });
        }
        Ok(Self { counts, ell })
    }

    pub fn counts(&self) -> &[u8] {
        &self.counts
    }

    pub fn ell(&self) -> u8 {
        self.ell
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn max_count(&self) -> u8 {
        self.counts.iter().copied().max().unwrap_or(0)
    }
}

/// Outcome of one write: the new counts, the new state, and the cells whose
/// toggle was absorbed because they were already at the budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WriteOutcome {
    pub counts: ProgramCountVector,
    pub state: CellStateVector,
    pub saturated: Vec<usize>,
}

/// `(N(v,c), f(v,c))`.
pub fn apply_write(
    v: &ProgramCountVector,
    c: &CellStateVector,
) -> Result<(ProgramCountVector, CellStateVector), MemoryError> {
    let out = apply_write_logged(v, c)?;
    Ok((out.counts, out.state))
}

/// Like [`apply_write`] but also reports saturation events.
pub fn apply_write_logged(
    v: &ProgramCountVector,
    c: &CellStateVector,
) -> Result<WriteOutcome, MemoryError> {
    if v.len() != c.len() {
        return Err(MemoryError::LengthMismatch { expected: v.len(), found: c.len() });
    }
    let (counts, saturated) = step_counts(&v.counts, &c.bits, v.ell);
    let state = CellStateVector { bits: counts.iter().map(|x| x % 2).collect() };
    Ok(WriteOutcome { counts: ProgramCountVector { counts, ell: v.ell }, state, saturated })
}

/// Slice form of [`apply_write_logged`]: the new counts and the saturated
/// cells. Lengths must already agree.
pub(crate) fn step_counts(counts: &[u8], intended: &[u8], ell: u8) -> (Vec<u8>, Vec<usize>) {
    let mut out = Vec::with_capacity(counts.len());
    let mut saturated = Vec::new();
    for (k, (&vk, &ck)) in counts.iter().zip(intended).enumerate() {
        if ck == vk % 2 {
            out.push(vk);
        } else if vk < ell {
            out.push(vk + 1);
        } else {
            saturated.push(k);
            out.push(vk);
        }
    }
    (out, saturated)
}

/// `⟨v⟩₂`.
pub fn parity_project(v: &ProgramCountVector) -> CellStateVector {
    CellStateVector { bits: v.counts.iter().map(|x| x % 2).collect() }
}

/// What an encoder or decoder is allowed to see about the prior memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Knowledge {
    /// The full change-count vector.
    Ia,
    /// The current cell states only.
    Ip,
    /// Nothing about the prior memory.
    U,
}

impl Knowledge {
    pub const ALL: [Knowledge; 3] = [Knowledge::Ia, Knowledge::Ip, Knowledge::U];

    fn tag(self) -> &'static str {
        match self {
            Knowledge::Ia => "IA",
            Knowledge::Ip => "IP",
            Knowledge::U => "U",
        }
    }

    /// `true` when `self` sees at least as much as `other`.
    pub fn covers(self, other: Knowledge) -> bool {
        self.rank() >= other.rank()
    }

    fn rank(self) -> u8 {
        match self {
            Knowledge::Ia => 2,
            Knowledge::Ip => 1,
            Knowledge::U => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Regime {
    ZeroError,
    EpsError,
}

/// One of the nine encoder/decoder knowledge pairs, plus the error regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModelSpec {
    pub encoder: Knowledge,
    pub decoder: Knowledge,
    pub regime: Regime,
}

impl ModelSpec {
    pub fn zero_error(encoder: Knowledge, decoder: Knowledge) -> Self {
        Self { encoder, decoder, regime: Regime::ZeroError }
    }

    /// All nine knowledge pairs in the order EIA, EIP, EU × DIA, DIP, DU.
    pub fn all(regime: Regime) -> Vec<ModelSpec> {
        let mut out = Vec::with_capacity(9);
        for e in Knowledge::ALL {
            for d in Knowledge::ALL {
                out.push(ModelSpec { encoder: e, decoder: d, regime });
            }
        }
        out
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E{}:D{}", self.encoder.tag(), self.decoder.tag())
    }
}

impl FromStr for ModelSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.trim().to_ascii_uppercase();
        let (e, d) = upper
            .split_once(':')
            .ok_or_else(|| format!("model {s:?} is not of the form EX:DY"))?;
        let parse = |part: &str, lead: char| -> Result<Knowledge, String> {
            let rest = part
                .strip_prefix(lead)
                .ok_or_else(|| format!("model part {part:?} must start with {lead}"))?;
            match rest {
                "IA" => Ok(Knowledge::Ia),
                "IP" => Ok(Knowledge::Ip),
                "U" => Ok(Knowledge::U),
                _ => Err(format!("unknown knowledge level {rest:?}")),
            }
        };
        Ok(ModelSpec::zero_error(parse(e, 'E')?, parse(d, 'D')?))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WriteRecord {
    pub intended: CellStateVector,
    pub state: CellStateVector,
    pub counts: ProgramCountVector,
    /// Cells whose toggle was absorbed on this write.
    pub saturated: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryTrace {
    pub n: usize,
    pub ell: u8,
    pub writes: Vec<WriteRecord>,
}

impl MemoryTrace {
    pub fn t(&self) -> usize {
        self.writes.len()
    }

    pub fn final_counts(&self) -> Option<&ProgramCountVector> {
        self.writes.last().map(|w| &w.counts)
    }

    pub fn saturation_events(&self) -> usize {
        self.writes.iter().map(|w| w.saturated.len()).sum()
    }

    pub fn to_json(&self) -> String {
        let doc = TraceDoc {
            n: self.n,
            ell: self.ell,
            writes: self
                .writes
                .iter()
                .map(|w| TraceWriteDoc {
                    intended: w.intended.to_string(),
                    state: w.state.to_string(),
                    counts: w.counts.counts.clone(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("trace serialization")
    }

    /// Parses a trace and checks it against a fresh replay of its intended
    /// states; saturation events are recovered from the replay.
    pub fn from_json(text: &str) -> Result<Self, MemoryError> {
        let doc: TraceDoc =
            serde_json::from_str(text).map_err(|e| MemoryError::Malformed(e.to_string()))?;
        let intended = doc
            .writes
            .iter()
            .map(|w| w.intended.parse::<CellStateVector>())
            .collect::<Result<Vec<_>, _>>()?;
        let trace = replay_trace_n(doc.n, doc.ell, &intended)?;
        for (j, (got, want)) in trace.writes.iter().zip(&doc.writes).enumerate() {
            if got.state.to_string() != want.state || got.counts.counts != want.counts {
                return Err(MemoryError::InconsistentTrace { write: j + 1 });
            }
        }
        Ok(trace)
    }
}

#[derive(Serialize, Deserialize)]
struct TraceDoc {
    n: usize,
    ell: u8,
    writes: Vec<TraceWriteDoc>,
}

#[derive(Serialize, Deserialize)]
struct TraceWriteDoc {
    intended: String,
    state: String,
    counts: Vec<u8>,
}

/// Folds [`apply_write`] over `intended`, starting from all-zero counts.
pub fn replay_trace(ell: u8, intended: &[CellStateVector]) -> Result<MemoryTrace, MemoryError> {
    let n = intended.first().map_or(0, CellStateVector::len);
    replay_trace_n(n, ell, intended)
}

fn replay_trace_n(
    n: usize,
    ell: u8,
    intended: &[CellStateVector],
) -> Result<MemoryTrace, MemoryError> {
    let mut v = ProgramCountVector::zeros(n, ell)?;
    let mut writes = Vec::with_capacity(intended.len());
    for c in intended {
        let out = apply_write_logged(&v, c)?;
        v = out.counts.clone();
        writes.push(WriteRecord {
            intended: c.clone(),
            state: out.state,
            counts: out.counts,
            saturated: out.saturated,
        });
    }
    Ok(MemoryTrace { n, ell, writes })
}
