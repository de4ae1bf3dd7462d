//! Damped Newton for the front equation with the phase condition u(x₀) = 1/2.
//!
//! Rational kernels are solved in ODE form on a mesh graded towards the
//! interface: w = K∗u obeys w − w″ = u (exp2) or w′ = u − w (one-sided). The
//! speed is carried as a nodal unknown tied together by continuity rows, so
//! the Jacobian stays banded. Other kernels use a uniform periodic grid with
//! spectral convolution and GMRES, preconditioned by the banded Jacobian of
//! the closest rational kernel.

use unpin_core::kernels::{FrontConvolver, Grid, KernelSpec, RationalOrder};
use unpin_core::numerics::banded::Banded;
use unpin_core::numerics::gmres::gmres;
use unpin_core::scalar::{of, to64, Real};
use unpin_core::{Error, Nonlinearity, Result};

use crate::mesh::MeshSpec;
use crate::{is_monotone, Guess, Method, Profile, WaveSolution};

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions<T> {
    pub tol: T,
    pub max_iter: usize,
    pub half_length: T,
    pub h_max: T,
    /// Growth rate of the mesh spacing away from the interface.
    pub grading: T,
    /// Mesh points per fast-layer width c/d at the interface.
    pub layer_resolution: T,
    /// Speeds below this are meshed as if c were `c_floor`.
    pub c_floor: T,
    pub phase_x: T,
    pub spectral_n: usize,
    /// Use the spectral solver for rational kernels too.
    pub force_spectral: bool,
    /// First pseudo-time step from a cold (tanh) start.
    pub initial_dt: T,
}

impl<T: Real> Default for NewtonOptions<T> {
    fn default() -> Self {
        Self {
            tol: of(1e-10),
            max_iter: 120,
            half_length: of(30.0),
            h_max: of(0.01),
            grading: of(0.01),
            layer_resolution: of(40.0),
            c_floor: of(1e-10),
            phase_x: T::zero(),
            spectral_n: 8192,
            force_spectral: false,
            initial_dt: of(1.0),
        }
    }
}

/// Solves for (u, c) starting from `guess`; `nl` carries the detuning a.
pub fn newton_wave<T: Real>(
    kernel: &KernelSpec,
    nl: &Nonlinearity<T>,
    d: T,
    guess: &Guess<T>,
    opts: &NewtonOptions<T>,
) -> Result<WaveSolution<T>> {
    if !(d > T::zero()) {
        return Err(Error::Parameter(format!("d must be positive, got {}", to64(d))));
    }
    match kernel.rational_order() {
        Some(order) if !opts.force_spectral => solve_graded(kernel, closure_for(order), nl, d, guess, opts),
        _ => {
            let ws = SpectralWorkspace::new(kernel, opts)?;
            ws.solve(nl, d, guess, opts)
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Closure<T> {
    /// σ² w″ = w − u with w = 1, 0 at the ends, as the box scheme for
    /// w′ = p, σ² p′ = w − u.
    Second { sigma2: T },
    /// w′ = u − w with w = 1 at the left end (trapezoid rule).
    First,
}

fn closure_for<T: Real>(order: RationalOrder) -> Closure<T> {
    match order {
        RationalOrder::SecondSymmetric => Closure::Second { sigma2: T::one() },
        RationalOrder::FirstOneSided => Closure::First,
    }
}

const NV: usize = 4;
const KL: usize = 6;
const KU: usize = 5;

/// Interleaved unknowns (u_i, w_i, p_i, c_i) on a mesh. Rows per node: the
/// front equation, two box-scheme rows for the kernel ODE (each already
/// multiplied by the step, so their roundoff is independent of h), and
/// either the phase condition or a speed-continuity row.
struct BandedSystem<'a, T: Real> {
    x: &'a [T],
    nl: &'a Nonlinearity<T>,
    d: T,
    closure: Closure<T>,
    i0: usize,
}

#[inline]
fn at(i: usize, k: usize) -> usize {
    NV * i + k
}

const U: usize = 0;
const W: usize = 1;
const P: usize = 2;
const C: usize = 3;

impl<'a, T: Real> BandedSystem<'a, T> {
    fn n(&self) -> usize {
        self.x.len()
    }

    /// Three-point first derivative, second order on any mesh.
    fn d1(&self, i: usize) -> [T; 3] {
        let (hm, hp) = (self.x[i] - self.x[i - 1], self.x[i + 1] - self.x[i]);
        [-hp / (hm * (hm + hp)), (hp - hm) / (hm * hp), hm / (hp * (hm + hp))]
    }

    fn du(&self, z: &[T], i: usize) -> T {
        let k = self.d1(i);
        k[0] * z[at(i - 1, U)] + k[1] * z[at(i, U)] + k[2] * z[at(i + 1, U)]
    }

    fn front_row(&self, z: &[T], i: usize) -> T {
        let (u, w, c) = (z[at(i, U)], z[at(i, W)], z[at(i, C)]);
        c * self.du(z, i) + self.d * (w - u) + self.nl.f0(u)
    }

    fn residual(&self, z: &[T]) -> Vec<T> {
        let n = self.n();
        let mut r = vec![T::zero(); NV * n];
        let half = of::<T>(0.5);
        let v = |i: usize, k: usize| z[at(i, k)];
        for i in 0..n {
            r[at(i, U)] = if i == 0 {
                v(0, U) - T::one()
            } else if i == n - 1 {
                v(i, U)
            } else {
                self.front_row(z, i)
            };
            match self.closure {
                Closure::Second { sigma2 } => {
                    // w-slot: trapezoid for w′ = p on [x_i, x_{i+1}]; the last node holds w = 0.
                    r[at(i, W)] = if i == n - 1 {
                        v(i, W)
                    } else {
                        let h = self.x[i + 1] - self.x[i];
                        v(i + 1, W) - v(i, W) - h * half * (v(i + 1, P) + v(i, P))
                    };
                    // p-slot: trapezoid for σ²p′ = w − u on [x_{i−1}, x_i]; the first node holds w = 1.
                    r[at(i, P)] = if i == 0 {
                        v(0, W) - T::one()
                    } else {
                        let h = self.x[i] - self.x[i - 1];
                        sigma2 * (v(i, P) - v(i - 1, P)) - h * half * (v(i, W) - v(i, U) + v(i - 1, W) - v(i - 1, U))
                    };
                }
                Closure::First => {
                    r[at(i, W)] = if i == 0 {
                        v(0, W) - T::one()
                    } else {
                        let h = self.x[i] - self.x[i - 1];
                        v(i, W) - v(i - 1, W) - h * half * (v(i, U) + v(i - 1, U) - v(i, W) - v(i - 1, W))
                    };
                    r[at(i, P)] = v(i, P);
                }
            }
            r[at(i, C)] = if i == self.i0 {
                v(i, U) - half
            } else if i < self.i0 {
                v(i, C) - v(i + 1, C)
            } else {
                v(i, C) - v(i - 1, C)
            };
        }
        r
    }

    /// Max-norm of the front equation over interior nodes.
    fn front_residual(&self, z: &[T]) -> T {
        (1..self.n() - 1).fold(T::zero(), |m, i| m.max(self.front_row(z, i).abs()))
    }

    /// Jacobian minus `sigma` on the interior front rows.
    fn jacobian(&self, z: &[T], sigma: T) -> Banded<T> {
        let n = self.n();
        let mut j = Banded::zeros(NV * n, KL, KU);
        let half = of::<T>(0.5);
        let one = T::one();
        for i in 0..n {
            let ru = at(i, U);
            if i == 0 || i == n - 1 {
                j.add(ru, ru, one);
            } else {
                let c = z[at(i, C)];
                let k = self.d1(i);
                j.add(ru, at(i - 1, U), c * k[0]);
                j.add(ru, ru, c * k[1] - self.d + self.nl.f1(z[ru]) - sigma);
                j.add(ru, at(i + 1, U), c * k[2]);
                j.add(ru, at(i, W), self.d);
                j.add(ru, at(i, C), self.du(z, i));
            }
            let (rw, rp) = (at(i, W), at(i, P));
            match self.closure {
                Closure::Second { sigma2 } => {
                    if i == n - 1 {
                        j.add(rw, at(i, W), one);
                    } else {
                        let h = self.x[i + 1] - self.x[i];
                        j.add(rw, at(i + 1, W), one);
                        j.add(rw, at(i, W), -one);
                        j.add(rw, at(i + 1, P), -h * half);
                        j.add(rw, at(i, P), -h * half);
                    }
                    if i == 0 {
                        j.add(rp, at(0, W), one);
                    } else {
                        let h = self.x[i] - self.x[i - 1];
                        j.add(rp, at(i, P), sigma2);
                        j.add(rp, at(i - 1, P), -sigma2);
                        j.add(rp, at(i, W), -h * half);
                        j.add(rp, at(i - 1, W), -h * half);
                        j.add(rp, at(i, U), h * half);
                        j.add(rp, at(i - 1, U), h * half);
                    }
                }
                Closure::First => {
                    if i == 0 {
                        j.add(rw, at(0, W), one);
                    } else {
                        let h = self.x[i] - self.x[i - 1];
                        j.add(rw, at(i, W), one + h * half);
                        j.add(rw, at(i - 1, W), -one + h * half);
                        j.add(rw, at(i, U), -h * half);
                        j.add(rw, at(i - 1, U), -h * half);
                    }
                    j.add(rp, rp, one);
                }
            }
            let rc = at(i, C);
            if i == self.i0 {
                j.add(rc, ru, one);
            } else {
                j.add(rc, rc, one);
                j.add(rc, if i < self.i0 { at(i + 1, C) } else { at(i - 1, C) }, -one);
            }
        }
        j
    }

    /// Packs nodal (u, w, c) into the unknown vector; p starts from the
    /// centred slope of w.
    fn pack(&self, u: &[T], w: &[T], c: T) -> Vec<T> {
        let n = self.n();
        let mut z = vec![T::zero(); NV * n];
        for i in 0..n {
            z[at(i, U)] = u[i];
            z[at(i, W)] = w[i];
            let (l, r) = (i.saturating_sub(1), (i + 1).min(n - 1));
            z[at(i, P)] = if matches!(self.closure, Closure::First) { T::zero() } else { (w[r] - w[l]) / (self.x[r] - self.x[l]) };
            z[at(i, C)] = c;
        }
        z
    }

    fn unpack(&self, z: &[T], k: usize) -> Vec<T> {
        z.iter().skip(k).step_by(NV).copied().collect()
    }
}

fn max_norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| if x.is_nan() { T::nan() } else { m.max(x.abs()) })
}

/// Pseudo-transient Newton: each step solves (J − σM)δ = −F, with M the
/// identity on the front rows and σ = 1/Δt, i.e. an implicit Euler step of
/// the co-moving evolution. Δt grows with the residual ratio until the
/// iteration is plain Newton. Once below `tol`, full Newton steps continue
/// while they still halve the residual, so weakly coupled unknowns such as c
/// reach roundoff level. Fails after 12 consecutive steps without decrease.
fn ptc_newton<T: Real>(
    z: &mut Vec<T>,
    residual: impl Fn(&[T]) -> Vec<T>,
    mut direction: impl FnMut(&[T], &[T], T) -> Result<Vec<T>>,
    dt0: T,
    tol: T,
    max_iter: usize,
    what: &str,
) -> Result<usize> {
    let mut f = residual(z);
    let mut r = max_norm(&f);
    let mut stalled = 0;
    let mut dt = dt0;
    let dt_max = of::<T>(1e14);
    let step = |z: &[T], dz: &[T]| -> Vec<T> { z.iter().zip(dz).map(|(&a, &b)| a + b).collect() };
    for it in 0..max_iter {
        if !r.is_finite() {
            break;
        }
        let polishing = r < tol;
        let sigma = if polishing || dt >= dt_max { T::zero() } else { T::one() / dt };
        let dz = direction(z, &f, sigma)?;
        let trial = step(z, &dz);
        let ft = residual(&trial);
        let rt = max_norm(&ft);
        if polishing {
            if !(rt < r * of(0.5)) {
                return Ok(it);
            }
        } else if !(rt.is_finite() && rt < r * of(4.0)) {
            dt = dt * of(0.125);
            stalled += 1;
            if stalled >= 12 {
                break;
            }
            continue;
        }
        stalled = if rt < r { 0 } else { stalled + 1 };
        dt = (dt * (r / rt).max(of(0.25)).min(of(8.0))).min(dt_max);
        *z = trial;
        f = ft;
        r = rt;
        if stalled >= 12 {
            break;
        }
    }
    if r < tol {
        return Ok(max_iter);
    }
    Err(Error::NoConvergence { what: format!("{what} Newton"), estimate: to64(r) })
}

/// A cold start evolves first; a warm start begins as plain Newton and only
/// falls back to evolution if that fails.
fn initial_dt<T: Real>(guess: &Guess<T>, opts: &NewtonOptions<T>) -> T {
    match guess.profile {
        Profile::Tanh => opts.initial_dt,
        Profile::Samples { .. } => of(1e6),
    }
}

/// Interface spacing for speed `c`, rounded down to a power of two so nearby
/// speeds share a mesh.
fn layer_spacing<T: Real>(c: T, d: T, opts: &NewtonOptions<T>) -> T {
    let raw = c.abs().max(opts.c_floor) / (d * opts.layer_resolution);
    let q = of::<T>(2.0).powf(raw.log2().floor());
    q.min(opts.h_max)
}

fn solve_graded<T: Real>(
    kernel: &KernelSpec,
    closure: Closure<T>,
    nl: &Nonlinearity<T>,
    d: T,
    guess: &Guess<T>,
    opts: &NewtonOptions<T>,
) -> Result<WaveSolution<T>> {
    let mut h = layer_spacing(guess.c, d, opts);
    let mut sol = solve_on_mesh(kernel, closure, nl, d, guess, h, opts)?;
    // Re-mesh until the interface spacing matches the converged speed.
    for _ in 0..3 {
        let h_new = layer_spacing(sol.c, d, opts);
        if h_new == h {
            break;
        }
        h = h_new;
        sol = solve_on_mesh(kernel, closure, nl, d, &Guess::from_solution(&sol), h, opts)?;
    }
    Ok(sol)
}

fn solve_on_mesh<T: Real>(
    kernel: &KernelSpec,
    closure: Closure<T>,
    nl: &Nonlinearity<T>,
    d: T,
    guess: &Guess<T>,
    h_min: T,
    opts: &NewtonOptions<T>,
) -> Result<WaveSolution<T>> {
    let x = MeshSpec { center: opts.phase_x, half_length: opts.half_length, h_min, h_max: opts.h_max, grading: opts.grading }
        .build()?;
    let n = x.len();
    let (u0, w0) = guess.sample(&x, opts.phase_x);
    let w0 = w0.unwrap_or_else(|| u0.clone());
    let sys = BandedSystem { x: &x, nl, d, closure, i0: n / 2 };
    let mut z = sys.pack(&u0, &w0, guess.c);
    let iterations = ptc_newton(
        &mut z,
        |z| sys.residual(z),
        |z, f, sigma| {
            let lu = sys.jacobian(z, sigma).factor()?;
            let mut b: Vec<T> = f.iter().map(|&v| -v).collect();
            lu.solve(&mut b);
            Ok(b)
        },
        initial_dt(guess, opts),
        opts.tol,
        opts.max_iter,
        "banded",
    )?;
    let u = sys.unpack(&z, U);
    Ok(WaveSolution {
        residual: sys.front_residual(&z),
        c: z[at(n / 2, C)],
        monotone: is_monotone(&u),
        w: Some(sys.unpack(&z, W)),
        x,
        u,
        method: Method::Newton,
        kernel: *kernel,
        a: nl.a,
        d,
        iterations,
    })
}

/// Periodic grid, front-aware convolver and preconditioner closure, reusable
/// across solves with the same kernel and grid.
#[derive(Debug, Clone)]
pub struct SpectralWorkspace<T: Real> {
    kernel: KernelSpec,
    grid: Grid<T>,
    conv: FrontConvolver<T>,
    closure: Closure<T>,
}

impl<T: Real> SpectralWorkspace<T> {
    pub fn new(kernel: &KernelSpec, opts: &NewtonOptions<T>) -> Result<Self> {
        let grid = Grid::new(opts.half_length, opts.spectral_n)?;
        let closure = if kernel.is_symmetric() {
            let e = 1e-3;
            let s2 = (1.0 - kernel.symbol::<f64>(e).re) / (e * e);
            Closure::Second { sigma2: of(s2.clamp(0.05, 4.0)) }
        } else {
            Closure::First
        };
        Ok(Self { kernel: *kernel, grid, conv: FrontConvolver::new(kernel, grid), closure })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn solve(&self, nl: &Nonlinearity<T>, d: T, guess: &Guess<T>, opts: &NewtonOptions<T>) -> Result<WaveSolution<T>> {
        let g = self.grid;
        let n = g.n;
        let x = g.points();
        let shift = (opts.phase_x / g.dx).round();
        let i0 = (n / 2) as isize + shift.to_isize().unwrap_or(0);
        if i0 < 2 || i0 > n as isize - 3 {
            return Err(Error::Parameter("phase point outside the grid".into()));
        }
        let i0 = i0 as usize;
        let x0 = x[i0];
        let (u0, _) = guess.sample(&x, x0);
        let mut z = u0;
        z.push(guess.c);
        let inv2dx = T::one() / (g.dx * of(2.0));
        let half = of::<T>(0.5);
        let residual = |z: &[T]| -> Vec<T> {
            let (u, c) = (&z[..n], z[n]);
            let ku = self.conv.convolve(u);
            let mut r = vec![T::zero(); n + 1];
            r[0] = u[0] - T::one();
            r[n - 1] = u[n - 1];
            for i in 1..n - 1 {
                r[i] = c * (u[i + 1] - u[i - 1]) * inv2dx + d * (ku[i] - u[i]) + nl.f0(u[i]);
            }
            r[n] = u[i0] - half;
            r
        };
        let pre_sys = BandedSystem { x: &x, nl, d, closure: self.closure, i0 };
        let iterations = ptc_newton(
            &mut z,
            residual,
            |z, f, sigma| {
                let (u, c) = (&z[..n], z[n]);
                let lu = pre_sys.jacobian(&pre_sys.pack(u, u, c), sigma).factor()?;
                let fp: Vec<T> = u.iter().map(|&v| nl.f1(v)).collect();
                let du: Vec<T> = (0..n)
                    .map(|i| if i == 0 || i == n - 1 { T::zero() } else { (u[i + 1] - u[i - 1]) * inv2dx })
                    .collect();
                let apply = |v: &[T]| -> Vec<T> {
                    let kv = self.conv.periodic().convolve(&v[..n]);
                    let mut out = vec![T::zero(); n + 1];
                    out[0] = v[0];
                    out[n - 1] = v[n - 1];
                    for i in 1..n - 1 {
                        out[i] = c * (v[i + 1] - v[i - 1]) * inv2dx + d * (kv[i] - v[i]) + (fp[i] - sigma) * v[i] + du[i] * v[n];
                    }
                    out[n] = v[i0];
                    out
                };
                let precond = |r: &mut [T]| {
                    let mut b = vec![T::zero(); NV * n];
                    for i in 0..n {
                        b[at(i, U)] = r[i];
                    }
                    b[at(i0, C)] = r[n];
                    lu.solve(&mut b);
                    for i in 0..n {
                        r[i] = b[at(i, U)];
                    }
                    r[n] = b[at(i0, C)];
                };
                let rhs: Vec<T> = f.iter().map(|&v| -v).collect();
                let mut dz = vec![T::zero(); n + 1];
                gmres(apply, precond, &rhs, &mut dz, of(1e-9), 40, 400);
                Ok(dz)
            },
            initial_dt(guess, opts),
            opts.tol,
            opts.max_iter,
            "spectral",
        )?;
        let c = z[n];
        z.truncate(n);
        let u = z;
        let ku = self.conv.convolve(&u);
        let residual = (1..n - 1).fold(T::zero(), |m, i| {
            m.max((c * (u[i + 1] - u[i - 1]) * inv2dx + d * (ku[i] - u[i]) + nl.f0(u[i])).abs())
        });
        Ok(WaveSolution {
            residual,
            c,
            monotone: is_monotone(&u),
            x,
            u,
            w: Some(ku),
            method: Method::Newton,
            kernel: self.kernel,
            a: nl.a,
            d,
            iterations,
        })
    }
}
