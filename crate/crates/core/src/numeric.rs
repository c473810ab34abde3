/// `C(n, k)` as an exact integer, `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after the multiplication
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    Some(acc)
}

/// `X_{t,ℓ} = Σ_{i≤ℓ} C(t,i)`, the number of change patterns of one cell.
pub fn binomial_prefix_sum(t: u64, ell: u64) -> Option<u128> {
    let mut total: u128 = 0;
    for i in 0..=ell.min(t) {
        total = total.checked_add(binomial(t, i)?)?;
    }
    Some(total)
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            carry += (sum - t) + x;
        } else {
            carry += (x - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_binomials() {
        assert_eq!(binomial(7, 3), Some(35));
        assert_eq!(binomial(3, 5), Some(0));
        assert_eq!(binomial(60, 30), Some(118_264_581_564_861_424));
        assert_eq!(binomial_prefix_sum(3, 2), Some(7));
        assert_eq!(binomial_prefix_sum(4, 2), Some(11));
        assert_eq!(binomial_prefix_sum(5, 9), Some(32));
    }

    #[test]
    fn compensation_recovers_small_terms() {
        let terms = std::iter::once(1.0).chain(std::iter::repeat(1e-16).take(10_000));
        assert!((compensated_sum(terms) - (1.0 + 1e-12)).abs() < 1e-15);
    }
}
