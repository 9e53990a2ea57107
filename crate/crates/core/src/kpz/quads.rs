use num_bigint::BigUint;

use crate::error::{Error, Result};

/// Number of rooted planar quadrangulations with `n` faces,
/// `2 * 3^n * C(2n, n) / ((n + 1)(n + 2))`, in exact arithmetic.
pub fn count_quadrangulations(n: u32) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::InvalidParameter("face count must be >= 1".into()));
    }
    // C(2n, n) by the multiplicative recurrence; each partial product is an
    // integer binomial coefficient.
    let mut binom = BigUint::from(1u32);
    for i in 1..=n {
        binom = binom * BigUint::from(n + i) / BigUint::from(i);
    }
    let num = BigUint::from(2u32) * BigUint::from(3u32).pow(n) * binom;
    let den = BigUint::from(n + 1) * BigUint::from(n + 2);
    debug_assert!((&num % &den) == BigUint::from(0u32));
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        let v: Vec<BigUint> = (1..=4).map(|n| count_quadrangulations(n).unwrap()).collect();
        assert_eq!(v, [2u32, 9, 54, 378].map(BigUint::from).to_vec());
        assert!(count_quadrangulations(0).is_err());
    }
}
