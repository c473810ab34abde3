use serde_json::{json, Value};

use super::ConstructionError;

/// How `t` writes are split into `ℓ` consecutive WOM phases, and which
/// phases run through the bitwise complement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhasePlan {
    pub parts: Vec<usize>,
    pub complemented: Vec<bool>,
}

impl PhasePlan {
    /// Phases alternate, starting uncomplemented.
    pub fn new(parts: Vec<usize>) -> Result<Self, ConstructionError> {
        Self::check(&parts)?;
        let complemented = (0..parts.len()).map(|i| i % 2 == 1).collect();
        Ok(Self { parts, complemented })
    }

    /// The same split with no complementation at all.
    pub fn literal(parts: Vec<usize>) -> Result<Self, ConstructionError> {
        Self::check(&parts)?;
        let complemented = vec![false; parts.len()];
        Ok(Self { parts, complemented })
    }

    fn check(parts: &[usize]) -> Result<(), ConstructionError> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(ConstructionError::Invalid(format!(
                "phase sizes must be positive, got {parts:?}"
            )));
        }
        Ok(())
    }

    pub fn t(&self) -> usize {
        self.parts.iter().sum()
    }

    /// `Σ log₂(k_i + 1)`, the sum-rate the plan reaches with
    /// capacity-achieving phases.
    pub fn value(&self) -> f64 {
        self.parts.iter().map(|&k| ((k + 1) as f64).log2()).sum()
    }

    /// `(phase, write within phase)` for write `j` (0-based).
    pub fn locate(&self, j: usize) -> Option<(usize, usize)> {
        let mut start = 0;
        for (i, &k) in self.parts.iter().enumerate() {
            if j < start + k {
                return Some((i, j - start));
            }
            start += k;
        }
        None
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.parts
                .iter()
                .zip(&self.complemented)
                .map(|(k, c)| json!({"k": k, "complemented": c}))
                .collect(),
        )
    }

    pub fn from_json(value: &Value) -> Result<Self, ConstructionError> {
        let bad = || ConstructionError::Malformed("phases must be a list of {k, complemented}".into());
        let items = value.as_array().ok_or_else(bad)?;
        let mut parts = Vec::new();
        let mut complemented = Vec::new();
        for item in items {
            parts.push(item["k"].as_u64().ok_or_else(bad)? as usize);
            complemented.push(item["complemented"].as_bool().ok_or_else(bad)?);
        }
        Self::check(&parts)?;
        Ok(Self { parts, complemented })
    }
}

/// The split of `t` into `ℓ` parts maximizing `Σ log(k_i + 1)`: with
/// `t = kℓ + r`, `r` parts of `k+1` followed by `ℓ−r` parts of `k`.
pub fn optimal_partition(t: usize, ell: usize) -> Result<PhasePlan, ConstructionError> {
    if ell == 0 || t < ell {
        return Err(ConstructionError::Invalid(format!("need t >= ell >= 1, got t={t}, ell={ell}")));
    }
    let (k, r) = (t / ell, t % ell);
    let parts = (0..ell).map(|i| if i < r { k + 1 } else { k }).collect();
    PhasePlan::new(parts)
}
