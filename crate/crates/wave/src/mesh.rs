//! Nonuniform meshes graded towards the interface, and linear transfer of
//! profiles between meshes.

use unpin_core::scalar::{of, Real};
use unpin_core::{Error, Result};

/// Mesh density parameters: the spacing near `center` is `h_min`, grows
/// linearly with slope `grading` and saturates at `h_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshSpec<T> {
    pub center: T,
    pub half_length: T,
    pub h_min: T,
    pub h_max: T,
    pub grading: T,
}

impl<T: Real> MeshSpec<T> {
    fn spacing(&self, r: T) -> T {
        T::one() / (T::one() / self.h_max + T::one() / (self.h_min + self.grading * r))
    }

    /// Nodes on [center − L, center + L] with `center` itself a node.
    pub fn build(&self) -> Result<Vec<T>> {
        let bad = |s: &str| Err(Error::Parameter(s.into()));
        if !(self.h_min > T::zero() && self.h_max >= self.h_min && self.grading > T::zero()) {
            return bad("mesh needs 0 < h_min ≤ h_max and positive grading");
        }
        if !(self.half_length > self.h_max * of(4.0)) {
            return bad("mesh half-length must span several h_max");
        }
        let mut r = vec![T::zero()];
        let mut x = T::zero();
        while x < self.half_length {
            x += self.spacing(x);
            r.push(x);
        }
        // Stretch so the last node lands on L exactly; the rescale keeps the spacing smooth.
        let s = self.half_length / x;
        let mut nodes: Vec<T> = r.iter().rev().map(|&ri| self.center - ri * s).collect();
        nodes.extend(r.iter().skip(1).map(|&ri| self.center + ri * s));
        Ok(nodes)
    }
}

/// Piecewise-linear interpolation of (xs, ys) at `x`, constant beyond the ends.
pub fn interpolate<T: Real>(xs: &[T], ys: &[T], x: T) -> T {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let j = xs.partition_point(|&v| v <= x).min(n - 1);
    let (x0, x1) = (xs[j - 1], xs[j]);
    let t = (x - x0) / (x1 - x0);
    ys[j - 1] + (ys[j] - ys[j - 1]) * t
}

pub fn resample<T: Real>(xs: &[T], ys: &[T], targets: &[T]) -> Vec<T> {
    targets.iter().map(|&x| interpolate(xs, ys, x)).collect()
}

/// Position where a decreasing profile crosses `level`, by linear interpolation.
pub fn crossing<T: Real>(xs: &[T], ys: &[T], level: T) -> Option<T> {
    (1..xs.len()).find_map(|i| {
        let (a, b) = (ys[i - 1], ys[i]);
        if (a - level) * (b - level) <= T::zero() && a != b {
            Some(xs[i - 1] + (xs[i] - xs[i - 1]) * (a - level) / (a - b))
        } else {
            None
        }
    })
}
