//! Restarted, right-preconditioned GMRES.

use crate::scalar::{of, Real};

#[derive(Debug, Clone, Copy)]
pub struct GmresReport<T> {
    pub iterations: usize,
    pub residual: T,
    pub converged: bool,
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}

fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Solves `A x = b` to relative residual `rtol`. `apply` computes `A v`,
/// `precond` applies `M⁻¹` in place.
pub fn gmres<T, A, P>(apply: A, precond: P, b: &[T], x: &mut [T], rtol: T, restart: usize, max_iter: usize) -> GmresReport<T>
where
    T: Real,
    A: Fn(&[T]) -> Vec<T>,
    P: Fn(&mut [T]),
{
    let n = b.len();
    let bnorm = norm(b).max(T::min_positive_value());
    let mut total = 0;
    loop {
        let ax = apply(x);
        let r: Vec<T> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
        let beta = norm(&r);
        if beta / bnorm <= rtol || total >= max_iter {
            return GmresReport { iterations: total, residual: beta / bnorm, converged: beta / bnorm <= rtol };
        }
        let m = restart.min(max_iter - total).max(1);
        let mut v: Vec<Vec<T>> = vec![r.iter().map(|&ri| ri / beta).collect()];
        let mut z: Vec<Vec<T>> = Vec::with_capacity(m);
        let mut h = vec![vec![T::zero(); m]; m + 1];
        let (mut cs, mut sn) = (vec![T::zero(); m], vec![T::zero(); m]);
        let mut g = vec![T::zero(); m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            let mut zk = v[k].clone();
            precond(&mut zk);
            let mut w = apply(&zk);
            z.push(zk);
            for (j, vj) in v.iter().enumerate() {
                let hj = dot(&w, vj);
                h[j][k] = hj;
                for i in 0..n {
                    w[i] -= hj * vj[i];
                }
            }
            let hn = norm(&w);
            h[k + 1][k] = hn;
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let den = (h[k][k] * h[k][k] + h[k + 1][k] * h[k + 1][k]).sqrt();
            cs[k] = if den > T::zero() { h[k][k] / den } else { T::one() };
            sn[k] = if den > T::zero() { h[k + 1][k] / den } else { T::zero() };
            h[k][k] = den;
            h[k + 1][k] = T::zero();
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            k_used = k + 1;
            total += 1;
            if g[k + 1].abs() / bnorm <= rtol * of(0.5) || hn == T::zero() {
                break;
            }
            v.push(w.iter().map(|&wi| wi / hn).collect());
        }
        let mut y = vec![T::zero(); k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for i in 0..n {
                x[i] += *yj * z[j][i];
            }
        }
    }
}
