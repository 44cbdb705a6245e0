//! Derivative-free one-dimensional minimization.

use crate::error::Result;
use crate::scalar::Real;

/// Golden-section search for a minimum of a unimodal `f` on `[lo, hi]`,
/// stopping once the bracket is narrower than `tol`. Returns the best
/// evaluated point and its value.
pub fn golden_section<T: Real>(mut f: impl FnMut(T) -> Result<T>, mut lo: T, mut hi: T, tol: T) -> Result<(T, T)> {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    // the bracket shrinks geometrically; the cap only guards against tol = 0
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

/// Indices of sampled local minima, endpoints included when lower than
/// their single neighbour.
pub fn local_minima<T: Real>(values: &[T]) -> Vec<usize> {
    let len = values.len();
    if len == 1 {
        return vec![0];
    }
    (0..len)
        .filter(|&i| {
            let left = i == 0 || values[i] < values[i - 1];
            let right = i + 1 == len || values[i] <= values[i + 1];
            left && right
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, fx) = golden_section(|x: f64| Ok((x - 0.3).powi(2) + 1.0), 0.0, 1.0, 1e-10).unwrap();
        // the vertex is flat below ~sqrt(eps)
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-15);
    }

    #[test]
    fn golden_handles_v_shape() {
        let (x, _) = golden_section(|x: f64| Ok((x - 0.7123).abs()), 0.5, 0.9, 1e-12).unwrap();
        assert!((x - 0.7123).abs() < 1e-11);
    }

    #[test]
    fn minima_detection() {
        assert_eq!(local_minima(&[3.0, 2.0, 1.0, 2.0]), vec![2]);
        assert_eq!(local_minima(&[1.0, 2.0, 0.5, 3.0]), vec![0, 2]);
        assert_eq!(local_minima(&[3.0, 2.0, 1.0]), vec![2]);
    }
}
