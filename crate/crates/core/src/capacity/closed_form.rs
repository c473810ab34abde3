use super::{h, CapacityError, EiaProfile, RateTuple};
use crate::numeric::binomial_prefix_sum;

/// Maximum sum-rate of the EIA model and the first-write probability that
/// achieves it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    pub value: f64,
    pub achiever_p: f64,
}

/// `log₂ X_{t,ℓ}` where `X_{t,ℓ} = Σ_{i≤ℓ} C(t,i)`.
///
/// Uses exact integers while they fit and a floating-point binomial sum
/// beyond that.
pub fn log2_pattern_count(t: u64, ell: u64) -> f64 {
    if ell >= t {
        return t as f64;
    }
    if let Some(x) = binomial_prefix_sum(t, ell) {
        return (x as f64).log2();
    }
    // Sum the binomials relative to the largest term to stay in range.
    let mut logs = Vec::with_capacity(ell as usize + 1);
    let mut log_c = 0.0f64;
    logs.push(0.0);
    for i in 1..=ell {
        log_c += ((t - i + 1) as f64).log2() - (i as f64).log2();
        logs.push(log_c);
    }
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    top + logs.iter().map(|l| (l - top).exp2()).sum::<f64>().log2()
}

/// `log₂ X_{t,ℓ}`, achieved with first-write probability
/// `X_{t−1,ℓ−1} / X_{t,ℓ}`. When `ℓ ≥ t` every write is free and the
/// achiever is reported as 0.5.
pub fn closed_form_max_sum_rate(t: u64, ell: u64) -> ClosedForm {
    if ell >= t {
        return ClosedForm { value: t as f64, achiever_p: 0.5 };
    }
    ClosedForm { value: log2_pattern_count(t, ell), achiever_p: pattern_ratio(t, ell) }
}

/// `X_{t−1,ℓ−1} / X_{t,ℓ}`, or 0.5 when `ℓ ≥ t`, or 0 when `ℓ = 0`.
fn pattern_ratio(t: u64, ell: u64) -> f64 {
    if ell == 0 || t == 0 {
        return 0.0;
    }
    if ell >= t {
        return 0.5;
    }
    match (binomial_prefix_sum(t - 1, ell - 1), binomial_prefix_sum(t, ell)) {
        (Some(a), Some(b)) => a as f64 / b as f64,
        _ => (log2_pattern_count(t - 1, ell - 1) - log2_pattern_count(t, ell)).exp2(),
    }
}

/// The EIA profile that attains the closed form:
/// `p_{j,i} = X_{t−j, ℓ−i−1} / X_{t−j+1, ℓ−i}`.
pub fn optimal_eia_profile(t: usize, ell: usize) -> Result<EiaProfile, CapacityError> {
    let rows = (1..=t)
        .map(|j| {
            (0..ell.min(j))
                .map(|i| pattern_ratio((t - j + 1) as u64, (ell - i) as u64))
                .collect()
        })
        .collect();
    EiaProfile::new(t, ell, rows)
}

/// `X_{t,ℓ}ⁿ`, the number of distinct change patterns of `n` cells.
pub fn counting_bound(n: u32, t: u64, ell: u64) -> Result<u128, CapacityError> {
    binomial_prefix_sum(t, ell)
        .and_then(|x| x.checked_pow(n))
        .ok_or(CapacityError::Overflow)
}

/// Lower and upper bounds on the EIP:DU maximum sum-rate.
///
/// With `t = kℓ + r` the lower bound is `r·log(k+2) + (ℓ−r)·log(k+1)`, from
/// running `ℓ` binary WOM phases; the upper bound is `log X_{t,ℓ}`.
pub fn eip_du_bounds(t: u64, ell: u64) -> (f64, f64) {
    if t <= ell {
        return (t as f64, t as f64);
    }
    let k = (t / ell) as f64;
    let r = (t % ell) as f64;
    let lower = ell as f64 * (k + 1.0).log2() + r * (1.0 + 1.0 / (k + 1.0)).log2();
    (lower, log2_pattern_count(t, ell))
}

/// Rates of the three-write EIP:DU scheme that reuses two informed writes
/// and finishes with an uninformed one:
///
/// ```text
/// R₁ = h(p10)
/// R₂ = (1−p10)·h(p20) + p10·h(p21)
/// R₃ = h(p10·p21·p3) − p3·h(p10·p21)
/// ```
///
/// All arguments range over `[0, 1]`.
pub fn construction4_region_rates(
    p10: f64,
    p20: f64,
    p21: f64,
    p3: f64,
) -> Result<RateTuple, CapacityError> {
    for x in [p10, p20, p21, p3] {
        if !(0.0..=1.0).contains(&x) {
            return Err(CapacityError::Domain(x));
        }
    }
    let rho = p10 * p21;
    let r3 = (h(rho * p3) - p3 * h(rho)).max(0.0);
    Ok(RateTuple::new(vec![h(p10), (1.0 - p10) * h(p20) + p10 * h(p21), r3]))
}
