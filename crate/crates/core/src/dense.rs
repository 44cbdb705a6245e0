//! Dense symmetric eigenvalues: Householder reduction to tridiagonal form
//! followed by implicit QL with Wilkinson shifts.
//!
//! Matrices are held as a packed lower triangle, row `i` occupying
//! `i(i+1)/2 .. i(i+1)/2 + i + 1`. The reduction is blocked: each column
//! needs one read-only symmetric matrix-vector product, and the trailing
//! triangle is rewritten once per panel of reflectors.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[inline]
pub fn packed_index(i: usize, j: usize) -> usize {
    debug_assert!(j <= i);
    i * (i + 1) / 2 + j
}

/// Packs the lower triangle of a row-major `n x n` matrix.
pub fn pack_lower<T: Real>(full: &[T], n: usize) -> Vec<T> {
    assert_eq!(full.len(), n * n, "matrix is not n x n");
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        out.extend_from_slice(&full[i * n..i * n + i + 1]);
    }
    out
}

/// All eigenvalues of a symmetric row-major matrix, ascending.
pub fn symmetric_eigenvalues<T: Real>(full: Vec<T>, n: usize) -> Result<Vec<T>> {
    symmetric_eigenvalues_packed(pack_lower(&full, n), n)
}

/// All eigenvalues of a packed lower-triangular symmetric matrix, ascending.
pub fn symmetric_eigenvalues_packed<T: Real>(mut packed: Vec<T>, n: usize) -> Result<Vec<T>> {
    assert_eq!(packed.len(), n * (n + 1) / 2, "packed length mismatch");
    if n == 0 {
        return Ok(Vec::new());
    }
    let (mut d, mut e) = tridiagonalize(&mut packed, n);
    drop(packed);
    tridiagonal_ql(&mut d, &mut e)?;
    d.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    Ok(d)
}

/// Householder vector for `x`: `(I - beta v v^T) x = alpha e_0`.
fn householder<T: Real>(x: &[T]) -> (Vec<T>, T, T) {
    if x.iter().skip(1).all(|v| *v == T::zero()) {
        // nothing to annihilate below the first entry
        return (vec![T::zero(); x.len()], T::zero(), x[0]);
    }
    let scale = x.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    let norm = scale * x.iter().map(|&v| (v / scale) * (v / scale)).sum::<T>().sqrt();
    let alpha = if x[0] > T::zero() { -norm } else { norm };
    let mut v = x.to_vec();
    v[0] = x[0] - alpha;
    let beta = T::one() / (norm * (norm + x[0].abs()));
    (v, beta, alpha)
}

/// Columns reflected per panel before the trailing block is rewritten.
const PANEL: usize = 32;

/// Column-tile width for the streaming kernels; keeps the vector slices
/// touched by one tile resident in L1.
const TILE: usize = 256;

/// `p = A[start.., start..] v` for the packed symmetric `A`, read-only.
/// Rows are taken in pairs so each load of `v` and `p` serves two entries.
fn symv<T: Real>(packed: &[T], n: usize, start: usize, v: &[T]) -> Vec<T> {
    let mut p = vec![T::zero(); n - start];
    let mut c0 = start;
    while c0 < n {
        let c1 = (c0 + TILE).min(n);
        let mut i = c0;
        while i + 1 < n {
            let (ra, rb) = (packed_index(i, 0), packed_index(i + 1, 0));
            let (va, vb) = (v[i - start], v[i + 1 - start]);
            // columns strictly left of i are shared by both rows
            let hi = c1.min(i);
            let (xa, xb) = (&packed[ra + c0..ra + hi], &packed[rb + c0..rb + hi]);
            let (vs, ps) = (&v[c0 - start..hi - start], &mut p[c0 - start..hi - start]);
            let (mut da, mut db) = ([T::zero(); 2], [T::zero(); 2]);
            let mut ac = xa.chunks_exact(2);
            let mut bc = xb.chunks_exact(2);
            let mut vc = vs.chunks_exact(2);
            let mut pc = ps.chunks_exact_mut(2);
            for (((a2, b2), v2), p2) in (&mut ac).zip(&mut bc).zip(&mut vc).zip(&mut pc) {
                for l in 0..2 {
                    da[l] += a2[l] * v2[l];
                    db[l] += b2[l] * v2[l];
                    p2[l] += a2[l] * va + b2[l] * vb;
                }
            }
            for (((a, b), v1), p1) in
                ac.remainder().iter().zip(bc.remainder()).zip(vc.remainder()).zip(pc.into_remainder())
            {
                da[0] += *a * *v1;
                db[0] += *b * *v1;
                *p1 += *a * va + *b * vb;
            }
            let (mut dot_a, mut dot_b) = (da[0] + da[1], db[0] + db[1]);
            if i < c1 {
                let (diag_a, off_b) = (packed[ra + i], packed[rb + i]);
                dot_a += diag_a * va + off_b * vb;
                dot_b += off_b * va;
                if i + 1 < c1 {
                    dot_b += packed[rb + i + 1] * vb;
                }
            }
            p[i - start] += dot_a;
            p[i + 1 - start] += dot_b;
            i += 2;
        }
        if i < n {
            let row_start = packed_index(i, 0);
            let vr = v[i - start];
            let hi = c1.min(i);
            let mut dot = T::zero();
            for c in c0..hi {
                let x = packed[row_start + c];
                dot += x * v[c - start];
                p[c - start] += x * vr;
            }
            if i < c1 {
                dot += packed[row_start + i] * vr;
            }
            p[i - start] += dot;
        }
        c0 = c1;
    }
    p
}

/// `A[start.., start..] -= sum_l (v_l w_l^T + w_l v_l^T)`, with each `v_l`,
/// `w_l` indexed from row 0. Pairs are applied four at a time so each row
/// element is loaded and stored once per group.
fn rank2k_update<T: Real>(packed: &mut [T], n: usize, start: usize, vs: &[Vec<T>], ws: &[Vec<T>]) {
    let mut c0 = start;
    while c0 < n {
        let c1 = (c0 + TILE).min(n);
        for i in c0..n {
            let hi = c1.min(i + 1);
            let row_start = packed_index(i, 0);
            let row = &mut packed[row_start + c0..row_start + hi];
            let mut groups = vs.chunks_exact(4).zip(ws.chunks_exact(4));
            for (v4, w4) in &mut groups {
                let (vi, wi) = ([v4[0][i], v4[1][i], v4[2][i], v4[3][i]], [w4[0][i], w4[1][i], w4[2][i], w4[3][i]]);
                let v: [&[T]; 4] = std::array::from_fn(|l| &v4[l][c0..hi]);
                let w: [&[T]; 4] = std::array::from_fn(|l| &w4[l][c0..hi]);
                for (c, x) in row.iter_mut().enumerate() {
                    let mut s = T::zero();
                    for l in 0..4 {
                        s += vi[l] * w[l][c] + wi[l] * v[l][c];
                    }
                    *x -= s;
                }
            }
            let done = vs.len() / 4 * 4;
            for (v, w) in vs[done..].iter().zip(&ws[done..]) {
                let (vi, wi) = (v[i], w[i]);
                for ((x, &vc), &wc) in row.iter_mut().zip(&v[c0..hi]).zip(&w[c0..hi]) {
                    *x -= vi * wc + wi * vc;
                }
            }
        }
        c0 = c1;
    }
}

/// Reduces the packed matrix in place, returning the diagonal and the
/// sub-diagonal (`e[i]` couples `i` and `i + 1`; the last entry is 0).
///
/// Reflectors are applied in panels: within a panel the trailing block is
/// left stale and the pending two-sided updates are carried as pairs
/// `(v_l, w_l)` with `A_current = A - sum_l (v_l w_l^T + w_l v_l^T)`.
fn tridiagonalize<T: Real>(packed: &mut [T], n: usize) -> (Vec<T>, Vec<T>) {
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    let last = n.saturating_sub(2);
    let mut k0 = 0;
    while k0 < last {
        let k1 = (k0 + PANEL).min(last);
        let mut vs: Vec<Vec<T>> = Vec::with_capacity(k1 - k0);
        let mut ws: Vec<Vec<T>> = Vec::with_capacity(k1 - k0);
        for k in k0..k1 {
            // bring column k up to date
            for i in k..n {
                let mut x = packed[packed_index(i, k)];
                for (v, w) in vs.iter().zip(&ws) {
                    x -= v[i] * w[k] + w[i] * v[k];
                }
                packed[packed_index(i, k)] = x;
            }
            d[k] = packed[packed_index(k, k)];
            let x: Vec<T> = (k + 1..n).map(|i| packed[packed_index(i, k)]).collect();
            let (v, beta, alpha) = householder(&x);
            e[k] = alpha;
            let mut p = symv(packed, n, k + 1, &v);
            for (vl, wl) in vs.iter().zip(&ws) {
                let (vt, wt) = (&vl[k + 1..], &wl[k + 1..]);
                let wv: T = wt.iter().zip(&v).map(|(a, b)| *a * *b).sum();
                let vv: T = vt.iter().zip(&v).map(|(a, b)| *a * *b).sum();
                for ((pi, a), b) in p.iter_mut().zip(vt).zip(wt) {
                    *pi -= *a * wv + *b * vv;
                }
            }
            p.iter_mut().for_each(|x| *x *= beta);
            let half_kappa = beta * v.iter().zip(&p).map(|(a, b)| *a * *b).sum::<T>() / T::lit(2.0);
            let mut vfull = vec![T::zero(); n];
            let mut wfull = vec![T::zero(); n];
            for (r, (vi, pi)) in v.iter().zip(&p).enumerate() {
                vfull[k + 1 + r] = *vi;
                wfull[k + 1 + r] = *pi - half_kappa * *vi;
            }
            vs.push(vfull);
            ws.push(wfull);
        }
        rank2k_update(packed, n, k1, &vs, &ws);
        k0 = k1;
    }
    for k in last..n {
        d[k] = packed[packed_index(k, k)];
    }
    if n >= 2 {
        e[n - 2] = packed[packed_index(n - 1, n - 2)];
    }
    (d, e)
}

/// Implicit QL iteration on a symmetric tridiagonal matrix; eigenvalues are
/// left in `d` (unsorted).
pub fn tridiagonal_ql<T: Real>(d: &mut [T], e: &mut [T]) -> Result<()> {
    let n = d.len();
    let eps = T::epsilon();
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 60 {
                return Err(Error::NonConvergence("tridiagonal QL"));
            }
            let mut g = (d[l + 1] - d[l]) / (T::lit(2.0) * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + if g >= T::zero() { r } else { -r });
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + T::lit(2.0) * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Cyclic Jacobi rotations, slow but independent of the routine above.
    fn jacobi(mut a: Vec<f64>, n: usize) -> Vec<f64> {
        for _ in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i * n + j].powi(2))
                .sum();
            if off < 1e-26 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[p * n + q];
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut d: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
        d.sort_by(|x, y| x.partial_cmp(y).unwrap());
        d
    }

    fn random_symmetric(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let x: f64 = rng.gen_range(-1.0..1.0);
                a[i * n + j] = x;
                a[j * n + i] = x;
            }
        }
        a
    }

    #[test]
    fn agrees_with_jacobi() {
        for (n, seed) in [(1, 0), (2, 1), (3, 2), (7, 3), (16, 4), (33, 5), (64, 6), (101, 7)] {
            let a = random_symmetric(n, seed);
            let ours = symmetric_eigenvalues(a.clone(), n).unwrap();
            let reference = jacobi(a, n);
            for (x, y) in ours.iter().zip(&reference) {
                assert!((x - y).abs() < 1e-12, "n={n}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn diagonal_and_degenerate() {
        let n = 5;
        let mut a = vec![0.0; n * n];
        for (i, v) in [3.0, -1.0, 3.0, 0.0, 3.0].into_iter().enumerate() {
            a[i * n + i] = v;
        }
        assert_eq!(symmetric_eigenvalues(a, n).unwrap(), vec![-1.0, 0.0, 3.0, 3.0, 3.0]);
    }

    #[test]
    fn projector_spectrum() {
        // b (I - 11^T/N): eigenvalues 0 once and b with multiplicity N - 1
        let n = 64;
        let b = 2.5;
        let a: Vec<f64> = (0..n * n).map(|k| if k / n == k % n { b - b / n as f64 } else { -b / n as f64 }).collect();
        let ev = symmetric_eigenvalues(a, n).unwrap();
        assert!(ev[0].abs() < 1e-13);
        assert!(ev[1..].iter().all(|x| (x - b).abs() < 1e-13));
    }
}
