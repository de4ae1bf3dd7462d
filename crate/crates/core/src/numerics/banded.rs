//! Banded LU with partial pivoting.

use crate::error::{Error, Result};
use crate::scalar::{to64, Real};

/// Square band matrix with `kl` sub- and `ku` super-diagonals. Each row keeps
/// `kl` extra columns on the right for pivoting fill-in.
#[derive(Debug, Clone)]
pub struct Banded<T> {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Real> Banded<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![T::zero(); n * width] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> Option<usize> {
        let lo = i as isize - self.kl as isize;
        let off = j as isize - lo;
        if off < 0 || off >= self.width as isize || j >= self.n {
            None
        } else {
            Some(i * self.width + off as usize)
        }
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.idx(i, j).map_or(T::zero(), |k| self.data[k])
    }

    /// Adds `v` at `(i, j)`; panics outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        assert!(j + self.kl >= i && j <= i + self.ku, "entry ({i}, {j}) outside band");
        let k = self.idx(i, j).unwrap();
        self.data[k] += v;
    }

    pub fn clear(&mut self) {
        self.data.iter_mut().for_each(|x| *x = T::zero());
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku + self.kl + 1).min(self.n);
                (lo..hi).fold(T::zero(), |s, j| s + self.get(i, j) * x[j])
            })
            .collect()
    }

    /// In-place factorisation; returns the pivot sequence.
    pub fn factor(mut self) -> Result<BandedLu<T>> {
        let n = self.n;
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last = (k + self.kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for r in k + 1..=last {
                let v = self.get(r, k).abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == T::zero() || !best.is_finite() {
                return Err(Error::NoConvergence { what: format!("banded LU: singular pivot in column {k}"), estimate: to64(best) });
            }
            piv[k] = p;
            let jmax = (k + self.ku + self.kl).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = self.get(k, j);
                    let b = self.get(p, j);
                    let ia = self.idx(k, j).unwrap();
                    self.data[ia] = b;
                    if let Some(ib) = self.idx(p, j) {
                        self.data[ib] = a;
                    }
                }
            }
            let pivot = self.get(k, k);
            for r in k + 1..=last {
                let ir = self.idx(r, k).unwrap();
                let l = self.data[ir] / pivot;
                self.data[ir] = l;
                if l == T::zero() {
                    continue;
                }
                for j in k + 1..=jmax {
                    let u = self.get(k, j);
                    if u != T::zero() {
                        let ij = self.idx(r, j).unwrap();
                        self.data[ij] -= l * u;
                    }
                }
            }
        }
        Ok(BandedLu { m: self, piv })
    }
}

#[derive(Debug, Clone)]
pub struct BandedLu<T> {
    m: Banded<T>,
    piv: Vec<usize>,
}

impl<T: Real> BandedLu<T> {
    pub fn solve(&self, b: &mut [T]) {
        let n = self.m.n;
        let (kl, ku) = (self.m.kl, self.m.ku);
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != T::zero() {
                for r in k + 1..=(k + kl).min(n - 1) {
                    b[r] -= self.m.get(r, k) * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + ku + kl).min(n - 1) {
                s -= self.m.get(k, j) * b[j];
            }
            b[k] = s / self.m.get(k, k);
        }
    }
}
