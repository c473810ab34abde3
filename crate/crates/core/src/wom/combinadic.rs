//! Lexicographic indexing of constant-weight and constant-composition words.

use super::{Word, WomError};
use crate::memory::CellStateVector;
use crate::numeric::binomial;

/// Bijection between `0..C(n,w)` and the weight-`w` binary words of length
/// `n`, in lexicographic order of the bit strings (cell 0 most significant).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstantWeightIndex {
    pub n: usize,
    pub w: usize,
}

impl ConstantWeightIndex {
    pub fn new(n: usize, w: usize) -> Self {
        Self { n, w }
    }

    pub fn len(&self) -> u128 {
        binomial(self.n as u64, self.w as u64).unwrap_or(u128::MAX)
    }

    pub fn is_empty(&self) -> bool {
        self.w > self.n
    }

    pub fn unrank(&self, index: u128) -> Result<CellStateVector, WomError> {
        cw_unrank(self.n, self.w, index)
    }

    pub fn rank(&self, word: &CellStateVector) -> Result<u128, WomError> {
        if word.len() != self.n || word.weight() != self.w {
            return Err(WomError::NotInDomain(word.to_string()));
        }
        cw_rank(word)
    }
}

fn choose(n: usize, k: usize) -> Result<u128, WomError> {
    binomial(n as u64, k as u64).ok_or(WomError::Overflow)
}

pub fn cw_unrank(n: usize, w: usize, index: u128) -> Result<CellStateVector, WomError> {
    let total = choose(n, w)?;
    if index >= total {
        return Err(WomError::IndexOutOfRange { index, size: total });
    }
    let mut bits = Vec::with_capacity(n);
    let mut rest = index;
    let mut ones = w;
    for k in 0..n {
        let after = n - k - 1;
        // Words with a 0 here come first: C(after, ones) of them.
        let zeros_first = choose(after, ones)?;
        if ones > 0 && rest >= zeros_first {
            bits.push(1);
            rest -= zeros_first;
            ones -= 1;
        } else {
            bits.push(0);
        }
    }
    Ok(CellStateVector::from_bits(bits).expect("binary by construction"))
}

pub fn cw_rank(word: &CellStateVector) -> Result<u128, WomError> {
    let n = word.len();
    let mut ones = word.weight();
    let mut index = 0u128;
    for (k, &b) in word.bits().iter().enumerate() {
        if b == 1 {
            index += choose(n - k - 1, ones)?;
            ones -= 1;
        }
    }
    Ok(index)
}

/// All words over `0..counts.len()` whose symbol `a` occurs exactly
/// `counts[a]` times, in lexicographic order.
pub fn words_with_composition(counts: &[usize]) -> Vec<Word> {
    fn go(left: &mut [usize], prefix: &mut Word, out: &mut Vec<Word>) {
        if left.iter().all(|&c| c == 0) {
            out.push(prefix.clone());
            return;
        }
        for a in 0..left.len() {
            if left[a] > 0 {
                left[a] -= 1;
                prefix.push(a as u8);
                go(left, prefix, out);
                prefix.pop();
                left[a] += 1;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut counts.to_vec(), &mut Vec::new(), &mut out);
    out
}

/// Symbol counts of `word` over an alphabet of size `q`.
pub fn composition(word: &[u8], q: usize) -> Vec<usize> {
    let mut counts = vec![0; q];
    for &a in word {
        counts[a as usize] += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_examples() {
        assert_eq!(cw_unrank(3, 1, 0).unwrap().to_string(), "001");
        assert_eq!(cw_unrank(3, 1, 2).unwrap().to_string(), "100");
        assert_eq!(ConstantWeightIndex::new(7, 3).len(), 35);
        assert!(matches!(cw_unrank(3, 1, 3), Err(WomError::IndexOutOfRange { .. })));
    }

    #[test]
    fn order_is_lexicographic() {
        let idx = ConstantWeightIndex::new(6, 3);
        let words: Vec<String> =
            (0..idx.len()).map(|i| idx.unrank(i).unwrap().to_string()).collect();
        let mut sorted = words.clone();
        sorted.sort();
        assert_eq!(words, sorted);
        assert_eq!(words.len(), 20);
    }

    #[test]
    fn composition_words() {
        let words = words_with_composition(&[1, 2]);
        assert_eq!(words, vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]);
        assert_eq!(words_with_composition(&[2, 1, 1]).len(), 12);
        assert_eq!(composition(&[2, 0, 2], 3), vec![1, 0, 2]);
    }
}
