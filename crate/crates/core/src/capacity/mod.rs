//! Capacity regions of the informed-decoder models.
//!
//! Each region is parameterized by per-write programming probabilities. An
//! occupancy table tracks `Q_{j,i}`, the probability that a cell has changed
//! exactly `i` times after `j` writes, and each write's rate is an
//! occupancy-weighted binary entropy:
//!
//! * EIA: `R_j = Σ_{i<min(ℓ,j)} Q_{j−1,i}·h(p_{j,i})`
//! * EIP:DIA: `R_j = Σ_{i<ℓ} Q_{j−1,i}·h(p_{j, i mod 2})`
//! * EU:DIA: `R_j = (1 − Q_{j−1,ℓ})·h(p_j)`
//!
//! Cells at count `ℓ` are absorbing in all three recursions.

mod closed_form;
mod compare;
mod optimize;
mod policy;

pub use closed_form::{
    closed_form_max_sum_rate, construction4_region_rates, counting_bound, eip_du_bounds,
    log2_pattern_count, optimal_eia_profile, ClosedForm,
};
pub use compare::{compare_models, ComparisonReport, COMPARISON_TOLERANCE};
pub use optimize::{optimize_sum_rate, Optimum};
pub use policy::{policy_tree_rates, PolicyTree};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::compensated_sum;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CapacityError {
    #[error("probability {0} outside [0, 1]")]
    Domain(f64),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("malformed policy tree: {0}")]
    MalformedTree(String),
    #[error("integer overflow")]
    Overflow,
    #[error("invalid JSON: {0}")]
    Json(String),
}

/// Binary entropy in bits, with `0·log 0 = 0`.
pub fn entropy(x: f64) -> Result<f64, CapacityError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(CapacityError::Domain(x));
    }
    Ok(h(x))
}

/// Unchecked binary entropy. The argument is folded onto its lower half in a
/// way that makes `h(x)` and `h(1 − x)` bitwise identical.
pub(crate) fn h(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 || x.is_nan() {
        return 0.0;
    }
    let lo = if x < 0.5 { 1.0 - (1.0 - x) } else { 1.0 - x };
    if lo <= 0.0 {
        return 0.0;
    }
    let hi = 1.0 - lo;
    -(lo * lo.log2()) - hi * hi.log2()
}

/// Which region an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegionModel {
    Eia,
    EipDia,
    EuDia,
}

impl RegionModel {
    pub fn name(self) -> &'static str {
        match self {
            RegionModel::Eia => "EIA",
            RegionModel::EipDia => "EIP_DIA",
            RegionModel::EuDia => "EU_DIA",
        }
    }
}

impl fmt::Display for RegionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RegionModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().replace(['-', ':'], "_").as_str() {
            "EIA" | "EIA_DIA" => Ok(RegionModel::Eia),
            "EIP_DIA" | "EIP" => Ok(RegionModel::EipDia),
            "EU_DIA" | "EU" => Ok(RegionModel::EuDia),
            other => Err(format!("unknown region model {other:?} (expected EIA, EIP_DIA or EU_DIA)")),
        }
    }
}

fn check_probability(x: f64, what: &str) -> Result<(), CapacityError> {
    if !(0.0..=0.5).contains(&x) {
        return Err(CapacityError::InvalidProfile(format!("{what} = {x} is outside [0, 0.5]")));
    }
    Ok(())
}

fn check_shape(t: usize, ell: usize) -> Result<(), CapacityError> {
    if t == 0 || ell == 0 {
        return Err(CapacityError::InvalidProfile("t and ell must both be at least 1".into()));
    }
    Ok(())
}

/// `p_{j,i}` for the EIA region. Row `j−1` stores `p_{j,0..min(ℓ,j)−1}`;
/// every other entry is structurally zero.
#[derive(Debug, Clone, PartialEq)]
pub struct EiaProfile {
    t: usize,
    ell: usize,
    rows: Vec<Vec<f64>>,
}

impl EiaProfile {
    pub fn new(t: usize, ell: usize, rows: Vec<Vec<f64>>) -> Result<Self, CapacityError> {
        check_shape(t, ell)?;
        if rows.len() != t {
            return Err(CapacityError::InvalidProfile(format!(
                "expected {t} rows, found {}",
                rows.len()
            )));
        }
        for (j0, row) in rows.iter().enumerate() {
            let want = ell.min(j0 + 1);
            if row.len() != want {
                return Err(CapacityError::InvalidProfile(format!(
                    "row {} must list {want} probabilities, found {}",
                    j0 + 1,
                    row.len()
                )));
            }
            for (i, &p) in row.iter().enumerate() {
                check_probability(p, &format!("p[{}][{i}]", j0 + 1))?;
            }
        }
        Ok(Self { t, ell, rows })
    }

    pub fn zeros(t: usize, ell: usize) -> Result<Self, CapacityError> {
        let rows = (1..=t).map(|j| vec![0.0; ell.min(j)]).collect();
        Self::new(t, ell, rows)
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// `p_{j,i}` with 1-based `j`; zero outside the stored triangle.
    pub fn p(&self, j: usize, i: usize) -> f64 {
        self.rows
            .get(j.wrapping_sub(1))
            .and_then(|row| row.get(i))
            .copied()
            .unwrap_or(0.0)
    }
}

/// `p_{j,0}` and `p_{j,1}` for the EIP:DIA region.
#[derive(Debug, Clone, PartialEq)]
pub struct EipDiaProfile {
    t: usize,
    ell: usize,
    p0: Vec<f64>,
    p1: Vec<f64>,
}

impl EipDiaProfile {
    pub fn new(t: usize, ell: usize, p0: Vec<f64>, p1: Vec<f64>) -> Result<Self, CapacityError> {
        check_shape(t, ell)?;
        if p0.len() != t || p1.len() != t {
            return Err(CapacityError::InvalidProfile(format!(
                "expected {t} entries in each of p0 and p1"
            )));
        }
        for (j, (&a, &b)) in p0.iter().zip(&p1).enumerate() {
            check_probability(a, &format!("p0[{}]", j + 1))?;
            check_probability(b, &format!("p1[{}]", j + 1))?;
        }
        Ok(Self { t, ell, p0, p1 })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn p0(&self) -> &[f64] {
        &self.p0
    }

    pub fn p1(&self) -> &[f64] {
        &self.p1
    }
}

/// `p_j` for the EU:DIA region.
#[derive(Debug, Clone, PartialEq)]
pub struct EuDiaProfile {
    t: usize,
    ell: usize,
    p: Vec<f64>,
}

impl EuDiaProfile {
    pub fn new(t: usize, ell: usize, p: Vec<f64>) -> Result<Self, CapacityError> {
        check_shape(t, ell)?;
        if p.len() != t {
            return Err(CapacityError::InvalidProfile(format!("expected {t} probabilities")));
        }
        for (j, &x) in p.iter().enumerate() {
            check_probability(x, &format!("p[{}]", j + 1))?;
        }
        Ok(Self { t, ell, p })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProbabilityProfile {
    Eia(EiaProfile),
    EipDia(EipDiaProfile),
    EuDia(EuDiaProfile),
}

impl ProbabilityProfile {
    pub fn model(&self) -> RegionModel {
        match self {
            ProbabilityProfile::Eia(_) => RegionModel::Eia,
            ProbabilityProfile::EipDia(_) => RegionModel::EipDia,
            ProbabilityProfile::EuDia(_) => RegionModel::EuDia,
        }
    }

    pub fn t(&self) -> usize {
        match self {
            ProbabilityProfile::Eia(p) => p.t,
            ProbabilityProfile::EipDia(p) => p.t,
            ProbabilityProfile::EuDia(p) => p.t,
        }
    }

    pub fn ell(&self) -> usize {
        match self {
            ProbabilityProfile::Eia(p) => p.ell,
            ProbabilityProfile::EipDia(p) => p.ell,
            ProbabilityProfile::EuDia(p) => p.ell,
        }
    }

    /// The first-write programming probability.
    pub fn first_write_p(&self) -> f64 {
        match self {
            ProbabilityProfile::Eia(p) => p.p(1, 0),
            ProbabilityProfile::EipDia(p) => p.p0[0],
            ProbabilityProfile::EuDia(p) => p.p[0],
        }
    }

    /// Row-wise listing used by the JSON form.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        match self {
            ProbabilityProfile::Eia(p) => p.rows.clone(),
            ProbabilityProfile::EipDia(p) => {
                p.p0.iter().zip(&p.p1).map(|(&a, &b)| vec![a, b]).collect()
            }
            ProbabilityProfile::EuDia(p) => p.p.iter().map(|&x| vec![x]).collect(),
        }
    }

    pub fn evaluate(&self) -> (OccupancyTable, RateTuple) {
        match self {
            ProbabilityProfile::Eia(p) => eia_rates(p),
            ProbabilityProfile::EipDia(p) => eip_dia_rates(p),
            ProbabilityProfile::EuDia(p) => eu_dia_rates(p),
        }
    }

    pub fn to_json(&self) -> String {
        let doc = ProfileDoc {
            model: self.model().name().to_string(),
            t: self.t(),
            ell: self.ell(),
            p: self.rows(),
        };
        serde_json::to_string(&doc).expect("profile serialization")
    }

    /// Reads `{"model":…,"t":…,"ell":…,"p":[[…],…]}`. EIP_DIA rows are
    /// `[p_{j,0}, p_{j,1}]` (a single entry means `p_{j,1} = 0`); EU_DIA rows
    /// hold one entry.
    pub fn from_json(text: &str) -> Result<Self, CapacityError> {
        let doc: ProfileDoc =
            serde_json::from_str(text).map_err(|e| CapacityError::Json(e.to_string()))?;
        let model: RegionModel = doc.model.parse().map_err(CapacityError::InvalidProfile)?;
        if doc.p.len() != doc.t {
            return Err(CapacityError::InvalidProfile(format!(
                "expected {} rows, found {}",
                doc.t,
                doc.p.len()
            )));
        }
        match model {
            RegionModel::Eia => Ok(Self::Eia(EiaProfile::new(doc.t, doc.ell, doc.p)?)),
            RegionModel::EipDia => {
                let mut p0 = Vec::with_capacity(doc.t);
                let mut p1 = Vec::with_capacity(doc.t);
                for row in &doc.p {
                    match row.as_slice() {
                        [a] => {
                            p0.push(*a);
                            p1.push(0.0);
                        }
                        [a, b] => {
                            p0.push(*a);
                            p1.push(*b);
                        }
                        _ => {
                            return Err(CapacityError::InvalidProfile(
                                "EIP_DIA rows hold one or two probabilities".into(),
                            ))
                        }
                    }
                }
                Ok(Self::EipDia(EipDiaProfile::new(doc.t, doc.ell, p0, p1)?))
            }
            RegionModel::EuDia => {
                let p = doc
                    .p
                    .iter()
                    .map(|row| match row.as_slice() {
                        [x] => Ok(*x),
                        _ => Err(CapacityError::InvalidProfile(
                            "EU_DIA rows hold exactly one probability".into(),
                        )),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Self::EuDia(EuDiaProfile::new(doc.t, doc.ell, p)?))
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ProfileDoc {
    model: String,
    t: usize,
    ell: usize,
    p: Vec<Vec<f64>>,
}

/// `Q_{j,i}` for `0 ≤ j ≤ t`, `0 ≤ i ≤ ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyTable {
    q: Vec<Vec<f64>>,
}

impl OccupancyTable {
    fn start(t: usize, ell: usize) -> Self {
        let mut first = vec![0.0; ell + 1];
        first[0] = 1.0;
        let mut q = Vec::with_capacity(t + 1);
        q.push(first);
        Self { q }
    }

    pub fn q(&self, j: usize, i: usize) -> f64 {
        self.q[j][i]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.q[j]
    }

    pub fn t(&self) -> usize {
        self.q.len() - 1
    }

    pub fn ell(&self) -> usize {
        self.q[0].len() - 1
    }

    /// `Q_{j,e}`: mass on even counts, including `ℓ` when it is even.
    pub fn even(&self, j: usize) -> f64 {
        compensated_sum(self.q[j].iter().step_by(2).copied())
    }

    /// `Q_{j,o}`: mass on odd counts.
    pub fn odd(&self, j: usize) -> f64 {
        compensated_sum(self.q[j].iter().skip(1).step_by(2).copied())
    }

    pub fn row_sum(&self, j: usize) -> f64 {
        compensated_sum(self.q[j].iter().copied())
    }
}

/// Per-write rates in bits per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTuple {
    rates: Vec<f64>,
}

impl RateTuple {
    pub fn new(rates: Vec<f64>) -> Self {
        Self { rates }
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn sum_rate(&self) -> f64 {
        compensated_sum(self.rates.iter().copied())
    }

    pub fn weighted(&self, weights: &[f64]) -> f64 {
        compensated_sum(self.rates.iter().zip(weights).map(|(r, w)| r * w))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&RatesDoc { r: self.rates.clone(), sum: self.sum_rate() })
            .expect("rate serialization")
    }

    pub fn from_json(text: &str) -> Result<Self, CapacityError> {
        let doc: RatesDoc =
            serde_json::from_str(text).map_err(|e| CapacityError::Json(e.to_string()))?;
        Ok(Self { rates: doc.r })
    }
}

#[derive(Serialize, Deserialize)]
struct RatesDoc {
    #[serde(rename = "R")]
    r: Vec<f64>,
    sum: f64,
}

pub fn eia_rates(profile: &EiaProfile) -> (OccupancyTable, RateTuple) {
    let (t, ell) = (profile.t, profile.ell);
    let mut table = OccupancyTable::start(t, ell);
    let mut rates = Vec::with_capacity(t);
    for j in 1..=t {
        let prev = &table.q[j - 1];
        let active = ell.min(j);
        rates.push(compensated_sum((0..active).map(|i| prev[i] * h(profile.p(j, i)))));
        let next = (0..=ell)
            .map(|i| {
                let stay = prev[i] * (1.0 - profile.p(j, i));
                let enter = if i > 0 { prev[i - 1] * profile.p(j, i - 1) } else { 0.0 };
                stay + enter
            })
            .collect();
        table.q.push(next);
    }
    (table, RateTuple::new(rates))
}

pub fn eip_dia_rates(profile: &EipDiaProfile) -> (OccupancyTable, RateTuple) {
    let (t, ell) = (profile.t, profile.ell);
    let mut table = OccupancyTable::start(t, ell);
    let mut rates = Vec::with_capacity(t);
    for j in 1..=t {
        let prev = &table.q[j - 1];
        let by_parity = |i: usize| if i % 2 == 0 { profile.p0[j - 1] } else { profile.p1[j - 1] };
        rates.push(compensated_sum((0..ell).map(|i| prev[i] * h(by_parity(i)))));
        let next = (0..=ell)
            .map(|i| {
                let stay = if i == ell { prev[i] } else { prev[i] * (1.0 - by_parity(i)) };
                let enter = if i > 0 { prev[i - 1] * by_parity(i - 1) } else { 0.0 };
                stay + enter
            })
            .collect();
        table.q.push(next);
    }
    (table, RateTuple::new(rates))
}

pub fn eu_dia_rates(profile: &EuDiaProfile) -> (OccupancyTable, RateTuple) {
    let (t, ell) = (profile.t, profile.ell);
    let mut table = OccupancyTable::start(t, ell);
    let mut rates = Vec::with_capacity(t);
    for j in 1..=t {
        let p = profile.p[j - 1];
        let prev = &table.q[j - 1];
        let live = compensated_sum(prev[..ell].iter().copied());
        rates.push(live * h(p));
        let next = (0..=ell)
            .map(|i| {
                let stay = if i == ell { prev[i] } else { prev[i] * (1.0 - p) };
                let enter = if i > 0 { prev[i - 1] * p } else { 0.0 };
                stay + enter
            })
            .collect();
        table.q.push(next);
    }
    (table, RateTuple::new(rates))
}
