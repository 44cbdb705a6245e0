//! Terminating generalized hypergeometric series in exact arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// `pFq(num; den; z) = sum_k prod (num_i)_k / prod (den_j)_k * z^k / k!`
/// for series that terminate, i.e. with some `num_i` a non-positive
/// integer `-K`; exactly `K + 1` terms are summed.
pub fn terminating_hypergeometric(num: &[BigRational], den: &[BigRational], z: &BigRational) -> Result<BigRational> {
    let terms = num
        .iter()
        .filter(|a| a.is_integer() && !a.is_positive())
        .map(|a| -a.to_integer())
        .min()
        .ok_or_else(|| Error::InvalidArgument("series does not terminate".into()))?;
    let mut sum = BigRational::zero();
    let mut term = BigRational::one();
    let mut k = BigInt::zero();
    while k <= terms {
        sum += &term;
        let kk = BigRational::from_integer(k.clone());
        let mut ratio = z.clone() / (&kk + BigRational::one());
        for a in num {
            ratio *= a + &kk;
        }
        for b in den {
            let shifted = b + &kk;
            if shifted.is_zero() {
                return Err(Error::InvalidArgument("denominator parameter hits zero".into()));
            }
            ratio /= shifted;
        }
        term *= ratio;
        k += 1;
    }
    Ok(sum)
}
