//! Two-write binary codes with `M₁ = Σ_{i≤τ} C(n,i)` and `M₂ = 2^{n−τ−1}`.
//!
//! The first write stores any word of weight at most `τ`. The second write
//! needs a map `D: {0,1}ⁿ → [2^{n−τ−1}]` under which every message is
//! reachable upwards from every such word. A linear map `D(c) = Hc` with
//! `H = [I | A]` works exactly when the row space of `H` has minimum distance
//! at least `τ+1`, so that is tried first. Otherwise a tabular map is
//! searched for with a node budget.

use std::collections::BTreeMap;

use super::cover::{Budget, Polychromatic};
use super::{cw_unrank, index_word, word_index, WomCodebook, WomEncoder, WomError, WomModel, WomWrite, Word};
use crate::numeric::binomial;

const DEFAULT_TABULAR_BUDGET: u64 = 2_000_000;

pub fn build_lemma2_two_write(n: usize, tau: usize) -> Result<WomCodebook, WomError> {
    build_lemma2_two_write_with_budget(n, tau, DEFAULT_TABULAR_BUDGET)
}

pub fn build_lemma2_two_write_with_budget(
    n: usize,
    tau: usize,
    budget: u64,
) -> Result<WomCodebook, WomError> {
    if n == 0 || n > 14 || tau >= n {
        return Err(WomError::OutOfRange(format!("need 0 <= tau < n <= 14, got n={n}, tau={tau}")));
    }
    let first = low_weight_words(n, tau)?;
    let r = n - tau - 1;
    let m2 = 1usize << r;
    let total = 1usize << n;

    let (colour, kind): (Vec<Option<usize>>, String) = match lemma2_linear_decoder(n, tau) {
        Some(h) => {
            let colour = (0..total).map(|x| Some(syndrome(&h, x))).collect();
            let rows: Vec<String> =
                h.iter().map(|row| super::word_to_string(&index_word(*row, n, 2))).collect();
            (colour, format!("linear H=[{}]", rows.join(",")))
        }
        None => {
            // Weight-τ words have the smallest up-sets; every lighter word
            // reaches everything they reach.
            let sources: Vec<Vec<usize>> = first
                .iter()
                .filter(|w| w.iter().filter(|&&b| b == 1).count() == tau)
                .map(|w| {
                    let mask = word_index(w, 2);
                    (0..total).filter(|&x| x & mask == mask).collect()
                })
                .collect();
            let mut b = Budget::new(budget);
            match Polychromatic::new(total, sources).solve(m2, &mut b) {
                Ok(Some(c)) => (c, "tabular".to_string()),
                Ok(None) => {
                    return Err(WomError::SearchFailed(format!(
                        "no decoder with {m2} messages exists for n={n}, tau={tau}"
                    )))
                }
                Err(_) => {
                    return Err(WomError::SearchFailed(format!(
                        "no linear decoder for n={n}, tau={tau} and the tabular search \
                         gave up after {budget} nodes"
                    )))
                }
            }
        }
    };

    let mut table = BTreeMap::new();
    let mut decoder2 = BTreeMap::new();
    for a in &first {
        let mask = word_index(a, 2);
        let mut missing = m2;
        for x in (0..total).filter(|&x| x & mask == mask) {
            let Some(m) = colour[x] else { continue };
            let key = (m, a.clone());
            if table.contains_key(&key) {
                continue;
            }
            let w = index_word(x, n, 2);
            decoder2.insert(w.clone(), m);
            table.insert(key, w);
            missing -= 1;
            if missing == 0 {
                break;
            }
        }
        if missing > 0 {
            return Err(WomError::SearchFailed(format!(
                "decoder misses {missing} messages above {}",
                super::word_to_string(a)
            )));
        }
    }
    let decoder1 = first.iter().enumerate().map(|(m, w)| (w.clone(), m)).collect();
    let mut metadata = BTreeMap::new();
    metadata.insert("tau".into(), tau.to_string());
    metadata.insert("decoder".into(), kind);
    Ok(WomCodebook {
        n,
        q: 2,
        model: WomModel::EiDu,
        writes: vec![
            WomWrite { messages: first.len(), encoder: WomEncoder::Fixed(first), decoder: decoder1 },
            WomWrite { messages: m2, encoder: WomEncoder::Informed(table), decoder: decoder2 },
        ],
        metadata,
    })
}

/// Words of weight at most `tau`, lighter first, each weight class in
/// lexicographic order.
fn low_weight_words(n: usize, tau: usize) -> Result<Vec<Word>, WomError> {
    let mut out = Vec::new();
    for w in 0..=tau {
        let size = binomial(n as u64, w as u64).ok_or(WomError::Overflow)?;
        for i in 0..size {
            out.push(cw_unrank(n, w, i)?.bits().to_vec());
        }
    }
    Ok(out)
}

/// Rows of a parity-check matrix `H = [I_r | A]` (each row a bit mask over
/// `n` cells, cell 0 most significant) whose row space has minimum distance
/// at least `τ+1`, or `None` if no such systematic matrix exists.
pub fn lemma2_linear_decoder(n: usize, tau: usize) -> Option<Vec<usize>> {
    let r = n - tau - 1;
    let width = tau + 1;
    // Rows of A: lightest first, then leading bits first.
    let mut candidates: Vec<usize> = (0..1usize << width).collect();
    candidates.sort_by_key(|&x| (x.count_ones(), std::cmp::Reverse(x)));
    // (weight of u, u·A) for every subset u of the rows chosen so far.
    let mut combos: Vec<(usize, usize)> = vec![(0, 0)];
    let mut rows = Vec::with_capacity(r);
    if !within_sphere_packing(n, r, tau) || !extend(r, tau, &candidates, 0, &mut combos, &mut rows) {
        return None;
    }
    Some(
        rows.iter()
            .enumerate()
            .map(|(i, &a)| (1usize << (n - 1 - i)) | a)
            .collect(),
    )
}

/// A binary code of dimension `r` and distance `τ+1` must fit its
/// radius-`⌊τ/2⌋` balls into `2ⁿ` words.
fn within_sphere_packing(n: usize, r: usize, tau: usize) -> bool {
    let ball: u128 = (0..=tau / 2).map(|i| binomial(n as u64, i as u64).unwrap_or(u128::MAX)).sum();
    (1u128 << r).saturating_mul(ball) <= 1u128 << n
}

/// Rows are picked in candidate order, so each multiset is tried once.
fn extend(
    r: usize,
    tau: usize,
    candidates: &[usize],
    start: usize,
    combos: &mut Vec<(usize, usize)>,
    rows: &mut Vec<usize>,
) -> bool {
    if rows.len() == r {
        return true;
    }
    for (idx, &x) in candidates.iter().enumerate().skip(start) {
        if combos
            .iter()
            .all(|&(w, v)| w + 1 + (v ^ x).count_ones() as usize > tau)
        {
            let before = combos.len();
            for i in 0..before {
                let (w, v) = combos[i];
                combos.push((w + 1, v ^ x));
            }
            rows.push(x);
            if extend(r, tau, candidates, idx, combos, rows) {
                return true;
            }
            rows.pop();
            combos.truncate(before);
        }
    }
    false
}

fn syndrome(h: &[usize], x: usize) -> usize {
    h.iter().fold(0, |acc, &row| (acc << 1) | ((row & x).count_ones() as usize & 1))
}
