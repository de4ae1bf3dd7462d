//! Dormand–Prince 8(5,3) integrator for small fixed-size systems, with
//! terminal/record events located by re-stepping from the step start.

use crate::error::{Error, Result};
use crate::numerics::roots::brent;
use crate::scalar::{of, to64, Real};

pub type State<T, const N: usize> = [T; N];

/// Sign-change condition `g(t, y) = 0`; `direction` > 0 fires on upward
/// crossings only, < 0 on downward, 0 on both.
pub struct Event<'a, T, const N: usize> {
    pub g: Box<dyn Fn(T, &State<T, N>) -> T + 'a>,
    pub direction: i8,
    pub terminal: bool,
}

impl<'a, T: Real, const N: usize> Event<'a, T, N> {
    pub fn terminal(g: impl Fn(T, &State<T, N>) -> T + 'a, direction: i8) -> Self {
        Self { g: Box::new(g), direction, terminal: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    Reached,
    Event(usize),
}

#[derive(Debug, Clone)]
pub struct Trajectory<T, const N: usize> {
    pub t: Vec<T>,
    pub y: Vec<State<T, N>>,
    pub stop: Stop,
    pub evaluations: usize,
}

impl<T: Real, const N: usize> Trajectory<T, N> {
    pub fn last(&self) -> (T, State<T, N>) {
        (*self.t.last().unwrap(), *self.y.last().unwrap())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Dop853<T> {
    pub rtol: T,
    pub atol: T,
    pub h_max: T,
    pub max_steps: usize,
    /// Keep every accepted step in the returned trajectory.
    pub dense: bool,
}

impl<T: Real> Default for Dop853<T> {
    fn default() -> Self {
        Self { rtol: crate::scalar::tol(1e-12), atol: crate::scalar::tol(1e-14), h_max: T::infinity(), max_steps: 5_000_000, dense: false }
    }
}

struct Tableau;

#[rustfmt::skip]
impl Tableau {
    const C: [f64; 12] = [0.0, 0.526001519587677318785587544488E-01, 0.789002279381515978178381316732E-01,
        0.118350341907227396726757197510E+00, 0.281649658092772603273242802490E+00, 0.333333333333333333333333333333E+00,
        0.25E+00, 0.307692307692307692307692307692E+00, 0.651282051282051282051282051282E+00, 0.6E+00,
        0.857142857142857142857142857142E+00, 1.0];
    const A: [[f64; 11]; 12] = [
        [0.0; 11],
        [5.26001519587677318785587544488E-2, 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.],
        [1.97250569845378994544595329183E-2, 5.91751709536136983633785987549E-2, 0., 0., 0., 0., 0., 0., 0., 0., 0.],
        [2.95875854768068491816892993775E-2, 0., 8.87627564304205475450678981324E-2, 0., 0., 0., 0., 0., 0., 0., 0.],
        [2.41365134159266685502369798665E-1, 0., -8.84549479328286085344864962717E-1, 9.24834003261792003115737966543E-1, 0., 0., 0., 0., 0., 0., 0.],
        [3.7037037037037037037037037037E-2, 0., 0., 1.70828608729473871279604482173E-1, 1.25467687566822425016691814123E-1, 0., 0., 0., 0., 0., 0.],
        [3.7109375E-2, 0., 0., 1.70252211019544039314978060272E-1, 6.02165389804559606850219397283E-2, -1.7578125E-2, 0., 0., 0., 0., 0.],
        [3.70920001185047927108779319836E-2, 0., 0., 1.70383925712239993810214054705E-1, 1.07262030446373284651809199168E-1,
            -1.53194377486244017527936158236E-2, 8.27378916381402288758473766002E-3, 0., 0., 0., 0.],
        [6.24110958716075717114429577812E-1, 0., 0., -3.36089262944694129406857109825E0, -8.68219346841726006818189891453E-1,
            2.75920996994467083049415600797E1, 2.01540675504778934086186788979E1, -4.34898841810699588477366255144E1, 0., 0., 0.],
        [4.77662536438264365890433908527E-1, 0., 0., -2.48811461997166764192642586468E0, -5.90290826836842996371446475743E-1,
            2.12300514481811942347288949897E1, 1.52792336328824235832596922938E1, -3.32882109689848629194453265587E1,
            -2.03312017085086261358222928593E-2, 0., 0.],
        [-9.3714243008598732571704021658E-1, 0., 0., 5.18637242884406370830023853209E0, 1.09143734899672957818500254654E0,
            -8.14978701074692612513997267357E0, -1.85200656599969598641566180701E1, 2.27394870993505042818970056734E1,
            2.49360555267965238987089396762E0, -3.0467644718982195003823669022E0, 0.],
        [2.27331014751653820792359768449E0, 0., 0., -1.05344954667372501984066689879E1, -2.00087205822486249909675718444E0,
            -1.79589318631187989172765950534E1, 2.79488845294199600508499808837E1, -2.85899827713502369474065508674E0,
            -8.87285693353062954433549289258E0, 1.23605671757943030647266201528E1, 6.43392746015763530355970484046E-1],
    ];
    const B: [f64; 12] = [5.42937341165687622380535766363E-2, 0., 0., 0., 0., 4.45031289275240888144113950566E0,
        1.89151789931450038304281599044E0, -5.8012039600105847814672114227E0, 3.1116436695781989440891606237E-1,
        -1.52160949662516078556178806805E-1, 2.01365400804030348374776537501E-1, 4.47106157277725905176885569043E-2];
    const ER: [f64; 12] = [0.1312004499419488073250102996E-01, 0., 0., 0., 0., -0.1225156446376204440720569753E+01,
        -0.4957589496572501915214079952E+00, 0.1664377182454986536961530415E+01, -0.3503288487499736816886487290E+00,
        0.3341791187130174790297318841E+00, 0.8192320648511571246570742613E-01, -0.2235530786388629525884427845E-01];
    const BHH: [f64; 3] = [0.244094488188976377952755905512E+00, 0.733846688281611857341361741547E+00,
        0.220588235294117647058823529412E-01];
}

struct Step<T, const N: usize> {
    y: State<T, N>,
    err: T,
}

fn step<T: Real, const N: usize, F: Fn(T, &State<T, N>) -> State<T, N>>(
    f: &F,
    t: T,
    y: &State<T, N>,
    k1: &State<T, N>,
    h: T,
    rtol: T,
    atol: T,
) -> Step<T, N> {
    let mut k = [[T::zero(); N]; 12];
    k[0] = *k1;
    for s in 1..12 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = Tableau::A[s][j];
            if a != 0.0 {
                let a = of::<T>(a) * h;
                for i in 0..N {
                    ys[i] += a * kj[i];
                }
            }
        }
        k[s] = f(t + of::<T>(Tableau::C[s]) * h, &ys);
    }
    let mut ynew = *y;
    let mut e5 = T::zero();
    let mut e3 = T::zero();
    for i in 0..N {
        let mut inc = T::zero();
        let mut er = T::zero();
        for s in 0..12 {
            inc += of::<T>(Tableau::B[s]) * k[s][i];
            er += of::<T>(Tableau::ER[s]) * k[s][i];
        }
        ynew[i] += h * inc;
        let sk = atol + rtol * y[i].abs().max(ynew[i].abs());
        let r3 = inc - of::<T>(Tableau::BHH[0]) * k[0][i] - of::<T>(Tableau::BHH[1]) * k[8][i] - of::<T>(Tableau::BHH[2]) * k[11][i];
        e3 += (r3 / sk) * (r3 / sk);
        e5 += (er / sk) * (er / sk);
    }
    let mut deno = e5 + of::<T>(0.01) * e3;
    if deno <= T::zero() {
        deno = T::one();
    }
    let err = h.abs() * e5 * (T::one() / (of::<T>(N as f64) * deno)).sqrt();
    Step { y: ynew, err }
}

impl<T: Real> Dop853<T> {
    pub fn tolerances(rtol: f64, atol: f64) -> Self {
        Self { rtol: crate::scalar::tol(rtol), atol: crate::scalar::tol(atol), ..Self::default() }
    }

    /// Integrates from `t0` to `t1` (either direction). Terminal events stop
    /// the integration at the located crossing.
    pub fn solve<const N: usize, F>(
        &self,
        f: F,
        t0: T,
        y0: State<T, N>,
        t1: T,
        events: &[Event<'_, T, N>],
    ) -> Result<Trajectory<T, N>>
    where
        F: Fn(T, &State<T, N>) -> State<T, N>,
    {
        let dir = if t1 >= t0 { T::one() } else { -T::one() };
        let span = (t1 - t0).abs();
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y);
        let mut nfev = 1usize;
        let mut out = Trajectory { t: vec![t0], y: vec![y0], stop: Stop::Reached, evaluations: 0 };
        if span == T::zero() {
            return Ok(out);
        }
        let mut h = self.initial_step(&f, t, &y, &k1, dir, span);
        nfev += 1;
        let mut gprev: Vec<T> = events.iter().map(|e| (e.g)(t, &y)).collect();
        let mut rejected = false;
        for _ in 0..self.max_steps {
            let remaining = (t1 - t).abs();
            if remaining <= T::epsilon() * (t.abs() + T::one()) * of(4.0) {
                out.evaluations = nfev;
                return Ok(out);
            }
            let mut habs = h.abs().min(self.h_max).min(remaining);
            if habs < T::epsilon() * t.abs().max(T::one()) * of(4.0) {
                return Err(Error::Integration { t: to64(t), reason: "step size underflow".into() });
            }
            let last = habs >= remaining;
            if last {
                habs = remaining;
            }
            let hs = habs * dir;
            let st = step(&f, t, &y, &k1, hs, self.rtol, self.atol);
            nfev += 11;
            let err = st.err;
            if !err.is_finite() || st.y.iter().any(|v| !v.is_finite()) {
                h = hs * of(0.25);
                rejected = true;
                continue;
            }
            let fac11 = err.powf(of(0.125));
            let fac = fac11 / of(0.9);
            if err <= T::one() {
                let tn = if last { t1 } else { t + hs };
                let yn = st.y;
                // Event scan on the accepted step.
                let mut hit: Option<(usize, T)> = None;
                for (ie, ev) in events.iter().enumerate() {
                    let gn = (ev.g)(tn, &yn);
                    let gp = gprev[ie];
                    let up = gp < T::zero() && gn >= T::zero();
                    let down = gp > T::zero() && gn <= T::zero();
                    let fires = match ev.direction {
                        d if d > 0 => up,
                        d if d < 0 => down,
                        _ => up || down,
                    };
                    if fires {
                        let theta = self.locate(&f, &ev.g, t, &y, &k1, hs, gp, gn)?;
                        if hit.map_or(true, |(_, th)| theta < th) && ev.terminal {
                            hit = Some((ie, theta));
                        }
                    }
                    gprev[ie] = gn;
                }
                if let Some((ie, theta)) = hit {
                    let he = hs * theta;
                    let ye = step(&f, t, &y, &k1, he, self.rtol, self.atol).y;
                    out.t.push(t + he);
                    out.y.push(ye);
                    out.stop = Stop::Event(ie);
                    out.evaluations = nfev;
                    return Ok(out);
                }
                t = tn;
                y = yn;
                k1 = f(t, &y);
                nfev += 1;
                if self.dense || last {
                    out.t.push(t);
                    out.y.push(y);
                }
                let mut hnew = habs / fac.max(of(1.0 / 6.0)).min(of(3.0));
                if rejected {
                    hnew = hnew.min(habs);
                }
                rejected = false;
                h = hnew * dir;
                if last {
                    out.evaluations = nfev;
                    return Ok(out);
                }
            } else {
                let shrink = (fac11 / of(0.9)).min(of(3.0));
                h = hs / shrink.max(of(1.0));
                rejected = true;
            }
        }
        Err(Error::Integration { t: to64(t), reason: "step limit exceeded".into() })
    }

    #[allow(clippy::too_many_arguments)]
    fn locate<const N: usize, F, G>(&self, f: &F, g: &G, t: T, y: &State<T, N>, k1: &State<T, N>, hs: T, gp: T, gn: T) -> Result<T>
    where
        F: Fn(T, &State<T, N>) -> State<T, N>,
        G: Fn(T, &State<T, N>) -> T + ?Sized,
    {
        if gn == T::zero() {
            return Ok(T::one());
        }
        let phi = |th: T| -> T {
            if th <= T::zero() {
                return gp;
            }
            let ys = step(f, t, y, k1, hs * th, self.rtol, self.atol).y;
            g(t + hs * th, &ys)
        };
        brent(phi, T::zero(), T::one(), T::epsilon() * of(8.0), 200)
    }

    fn initial_step<const N: usize, F>(&self, f: &F, t: T, y: &State<T, N>, f0: &State<T, N>, dir: T, span: T) -> T
    where
        F: Fn(T, &State<T, N>) -> State<T, N>,
    {
        let mut dnf = T::zero();
        let mut dny = T::zero();
        for i in 0..N {
            let sk = self.atol + self.rtol * y[i].abs();
            dnf += (f0[i] / sk) * (f0[i] / sk);
            dny += (y[i] / sk) * (y[i] / sk);
        }
        let mut h = if dnf <= of(1e-10) || dny <= of(1e-10) { of(1e-6) } else { (dny / dnf).sqrt() * of(0.01) };
        h = h.min(self.h_max).min(span);
        let mut y1 = *y;
        for i in 0..N {
            y1[i] += h * dir * f0[i];
        }
        let f1 = f(t + h * dir, &y1);
        let mut der2 = T::zero();
        for i in 0..N {
            let sk = self.atol + self.rtol * y[i].abs();
            der2 += ((f1[i] - f0[i]) / sk) * ((f1[i] - f0[i]) / sk);
        }
        der2 = der2.sqrt() / h;
        let der12 = der2.max(dnf.sqrt());
        let h1 = if der12 <= of(1e-15) { (h * of(1e-3)).max(of(1e-6)) } else { (of::<T>(0.01) / der12).powf(of(0.125)) };
        (h * of(100.0)).min(h1).min(span).min(self.h_max)
    }
}
