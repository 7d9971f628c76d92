//! Classical dynamics of the three coupled oscillators.
//!
//! In mass-scaled coordinates the Hamiltonian is
//! `H = ½|P|² + ½XᵀΓ(t)X`, with Γ built from the profiles by
//!
//! ```text
//! ϖᵢ² = ¼(ṁᵢ²/mᵢ² − 2m̈ᵢ/mᵢ) + cᵢ/mᵢ
//! K_ij = c_ij / (2√(mᵢ mⱼ))
//! ```
//!
//! [`integrate_direct`] solves `ẋ = p, ṗ = −Γ(t)x` with fixed-step RK4.
//! [`integrate_naive_decoupled`] instead evolves each instantaneous normal
//! mode on its own, dropping the term produced by the time dependence of the
//! diagonalizing rotation, and measures how far that drifts from the direct
//! solution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg3::{jacobi_default, Mat3, SymMat3, Vec3};
use crate::spectrum::eigenvalues_robust;

/// Parameter as an analytic function of time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeProfile {
    Constant(f64),
    /// Coefficients in ascending powers of t.
    Polynomial(Vec<f64>),
    /// `a·e^{γt}`, γ in 1/s.
    Exponential {
        a: f64,
        gamma: f64,
    },
    /// `offset + amplitude·sin(ωt + phase)`, ω in rad/s.
    Sinusoid {
        offset: f64,
        amplitude: f64,
        omega: f64,
        phase: f64,
    },
}

impl TimeProfile {
    /// Value and first three derivatives at `t`.
    pub fn jet(&self, t: f64) -> [f64; 4] {
        match self {
            TimeProfile::Constant(a) => [*a, 0.0, 0.0, 0.0],
            TimeProfile::Polynomial(c) => {
                let mut out = [0.0; 4];
                for (order, o) in out.iter_mut().enumerate() {
                    // Horner on the order-th derivative coefficients.
                    let mut acc = 0.0;
                    for (p, &coef) in c.iter().enumerate().skip(order).rev() {
                        let falling: f64 = (0..order).map(|k| (p - k) as f64).product();
                        acc = acc * t + coef * falling;
                    }
                    *o = acc;
                }
                out
            }
            TimeProfile::Exponential { a, gamma } => {
                let v = a * (gamma * t).exp();
                [v, gamma * v, gamma * gamma * v, gamma * gamma * gamma * v]
            }
            TimeProfile::Sinusoid {
                offset,
                amplitude,
                omega,
                phase,
            } => {
                let (s, c) = (omega * t + phase).sin_cos();
                [
                    offset + amplitude * s,
                    amplitude * omega * c,
                    -amplitude * omega * omega * s,
                    -amplitude * omega * omega * omega * c,
                ]
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.jet(t)[0]
    }
}

/// `¼(ṁ²/m² − 2m̈/m) + c/m`.
pub fn effective_frequency_sq(m: &TimeProfile, c: &TimeProfile, t: f64) -> Result<f64> {
    let [mv, md, mdd, _] = m.jet(t);
    if !(mv > 0.0) {
        return Err(Error::NonPositiveMass {
            oscillator: 0,
            t,
            mass: mv,
        });
    }
    Ok(0.25 * (md * md / (mv * mv) - 2.0 * mdd / mv) + c.value(t) / mv)
}

/// `c_ab / (2√(m_a m_b))`.
pub fn coupling_k(m_a: &TimeProfile, m_b: &TimeProfile, c_ab: &TimeProfile, t: f64) -> Result<f64> {
    let (ma, mb) = (m_a.value(t), m_b.value(t));
    for mass in [ma, mb] {
        if !(mass > 0.0) {
            return Err(Error::NonPositiveMass {
                oscillator: 0,
                t,
                mass,
            });
        }
    }
    Ok(c_ab.value(t) / (2.0 * (ma * mb).sqrt()))
}

fn effective_frequency_rate(m: &TimeProfile, c: &TimeProfile, t: f64) -> f64 {
    let [mv, md, mdd, mddd] = m.jet(t);
    let [cv, cd, _, _] = c.jet(t);
    let u = md / mv;
    let du = mdd / mv - u * u;
    let d_ratio = mddd / mv - mdd * u / mv;
    0.25 * (2.0 * u * du - 2.0 * d_ratio) + cd / mv - cv * u / mv
}

fn coupling_rate(m_a: &TimeProfile, m_b: &TimeProfile, c_ab: &TimeProfile, t: f64) -> f64 {
    let [ma, mad, _, _] = m_a.jet(t);
    let [mb, mbd, _, _] = m_b.jet(t);
    let [c, cd, _, _] = c_ab.jet(t);
    let root = (ma * mb).sqrt();
    cd / (2.0 * root) - c / (2.0 * root) * 0.5 * (mad / ma + mbd / mb)
}

/// Pairs (a, b) for K₁₂, K₁₃, K₂₃.
const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillatorSystem {
    /// kg
    pub masses: [TimeProfile; 3],
    /// N/m
    pub stiffnesses: [TimeProfile; 3],
    /// c₁₂, c₁₃, c₂₃ in N/m.
    pub couplings: [TimeProfile; 3],
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    /// Emit every `stride`-th step (the final step is always emitted).
    pub stride: usize,
}

impl OscillatorSystem {
    /// Validates the interval and samples every mass at each step boundary.
    pub fn new(
        masses: [TimeProfile; 3],
        stiffnesses: [TimeProfile; 3],
        couplings: [TimeProfile; 3],
        t0: f64,
        t1: f64,
        dt: f64,
        stride: usize,
    ) -> Result<Self> {
        let sys = OscillatorSystem {
            masses,
            stiffnesses,
            couplings,
            t0,
            t1,
            dt,
            stride,
        };
        sys.validate()?;
        Ok(sys)
    }

    /// Constant masses, stiffnesses and couplings.
    pub fn constant(m: [f64; 3], c: [f64; 3], c_ij: [f64; 3], t1: f64, dt: f64) -> Result<Self> {
        OscillatorSystem::new(
            m.map(TimeProfile::Constant),
            c.map(TimeProfile::Constant),
            c_ij.map(TimeProfile::Constant),
            0.0,
            t1,
            dt,
            1,
        )
    }

    /// Unit masses and profiles chosen so Γ equals `g` at all times.
    pub fn from_gamma(g: &SymMat3, t1: f64, dt: f64) -> Result<Self> {
        let [k12, k13, k23] = g.couplings();
        OscillatorSystem::constant([1.0; 3], g.d, [2.0 * k12, 2.0 * k13, 2.0 * k23], t1, dt)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::invalid("dt must be positive"));
        }
        if !(self.t1 > self.t0) || !self.t0.is_finite() || !self.t1.is_finite() {
            return Err(Error::invalid("t1 must exceed t0"));
        }
        if self.stride == 0 {
            return Err(Error::invalid("stride must be at least 1"));
        }
        let (n, h) = self.grid();
        for k in 0..=n {
            let t = self.t0 + k as f64 * h;
            for (i, m) in self.masses.iter().enumerate() {
                let mass = m.value(t);
                if !(mass > 0.0) || !mass.is_finite() {
                    return Err(Error::NonPositiveMass {
                        oscillator: i + 1,
                        t,
                        mass,
                    });
                }
            }
        }
        Ok(())
    }

    /// Step count `round((t1 − t0)/dt)` and the step that tiles the interval.
    pub fn grid(&self) -> (usize, f64) {
        let span = self.t1 - self.t0;
        let n = ((span / self.dt).round() as usize).max(1);
        (n, span / n as f64)
    }

    fn check_time(&self, t: f64) -> Result<()> {
        let slack = 1e-9 * (self.t1 - self.t0);
        if t < self.t0 - slack || t > self.t1 + slack || t.is_nan() {
            return Err(Error::TimeOutOfRange {
                t,
                t0: self.t0,
                t1: self.t1,
            });
        }
        Ok(())
    }

    fn label_mass(&self, e: Error, oscillator: usize) -> Error {
        match e {
            Error::NonPositiveMass { t, mass, .. } => Error::NonPositiveMass {
                oscillator,
                t,
                mass,
            },
            other => other,
        }
    }
}

/// Γ(t).
pub fn gamma_at(sys: &OscillatorSystem, t: f64) -> Result<SymMat3> {
    sys.check_time(t)?;
    let mut d = [0.0; 3];
    for i in 0..3 {
        d[i] = effective_frequency_sq(&sys.masses[i], &sys.stiffnesses[i], t)
            .map_err(|e| sys.label_mass(e, i + 1))?;
    }
    let mut k = [0.0; 3];
    for (slot, &(a, b)) in PAIRS.iter().enumerate() {
        k[slot] = coupling_k(&sys.masses[a], &sys.masses[b], &sys.couplings[slot], t)
            .map_err(|e| sys.label_mass(e, a + 1))?;
    }
    Ok(SymMat3::new(d[0], d[1], d[2], k[0], k[1], k[2]))
}

/// dΓ/dt from the analytic profile derivatives.
pub fn gamma_rate_at(sys: &OscillatorSystem, t: f64) -> Result<SymMat3> {
    gamma_at(sys, t)?;
    let d = [0, 1, 2].map(|i| effective_frequency_rate(&sys.masses[i], &sys.stiffnesses[i], t));
    let k = [0, 1, 2].map(|slot| {
        let (a, b) = PAIRS[slot];
        coupling_rate(&sys.masses[a], &sys.masses[b], &sys.couplings[slot], t)
    });
    Ok(SymMat3::new(d[0], d[1], d[2], k[0], k[1], k[2]))
}

pub fn energy(g: &SymMat3, x: &Vec3, p: &Vec3) -> f64 {
    0.5 * p.dot(p) + 0.5 * x.dot(&g.mul_vec(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryState {
    pub t: f64,
    pub x: Vec3,
    pub p: Vec3,
    /// H(t) at this state.
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<TrajectoryState>,
    /// `∫ ½xᵀΓ̇x dt` from t0 to each emitted state (trapezoid per step).
    pub work: Vec<f64>,
    pub steps: usize,
    pub h: f64,
}

/// Largest `h·√|Ωᵢ²|` allowed.
pub const RESOLUTION_LIMIT: f64 = 0.1;

fn check_resolution(sys: &OscillatorSystem, n: usize, h: f64) -> Result<()> {
    for k in 0..=n {
        let t = sys.t0 + k as f64 * h;
        let s = eigenvalues_robust(&gamma_at(sys, t)?);
        let max_freq = s
            .omega_sq
            .iter()
            .map(|w| w.abs().sqrt())
            .fold(0.0, f64::max);
        if h * max_freq > RESOLUTION_LIMIT {
            return Err(Error::StepTooLarge {
                t,
                dt: h,
                max_frequency: max_freq,
            });
        }
    }
    Ok(())
}

fn rk4_step(sys: &OscillatorSystem, t: f64, h: f64, x: Vec3, p: Vec3) -> Result<(Vec3, Vec3)> {
    let g0 = gamma_at(sys, t)?;
    let gm = gamma_at(sys, t + 0.5 * h)?;
    let g1 = gamma_at(sys, t + h)?;
    let acc = |g: &SymMat3, x: &Vec3| -g.mul_vec(x);

    let k1x = p;
    let k1p = acc(&g0, &x);
    let k2x = p + k1p.scale(0.5 * h);
    let k2p = acc(&gm, &(x + k1x.scale(0.5 * h)));
    let k3x = p + k2p.scale(0.5 * h);
    let k3p = acc(&gm, &(x + k2x.scale(0.5 * h)));
    let k4x = p + k3p.scale(h);
    let k4p = acc(&g1, &(x + k3x.scale(h)));

    let x1 = x + (k1x + k2x.scale(2.0) + k3x.scale(2.0) + k4x).scale(h / 6.0);
    let p1 = p + (k1p + k2p.scale(2.0) + k3p.scale(2.0) + k4p).scale(h / 6.0);
    Ok((x1, p1))
}

/// Advances `(x, p)` from `t_from` to `t_to` in `n` RK4 steps (either direction).
pub fn propagate(
    sys: &OscillatorSystem,
    x: Vec3,
    p: Vec3,
    t_from: f64,
    t_to: f64,
    n: usize,
) -> Result<(Vec3, Vec3)> {
    let h = (t_to - t_from) / n as f64;
    let (mut x, mut p) = (x, p);
    for k in 0..n {
        (x, p) = rk4_step(sys, t_from + k as f64 * h, h, x, p)?;
    }
    Ok((x, p))
}

fn emitted(k: usize, n: usize, stride: usize) -> bool {
    k.is_multiple_of(stride) || k == n
}

/// Fixed-step RK4 for `ẋ = p, ṗ = −Γ(t)x` over the system interval.
pub fn integrate_direct(sys: &OscillatorSystem, x0: Vec3, p0: Vec3) -> Result<Trajectory> {
    sys.validate()?;
    if !x0.is_finite() || !p0.is_finite() {
        return Err(Error::invalid("initial state must be finite"));
    }
    let (n, h) = sys.grid();
    check_resolution(sys, n, h)?;

    let power = |t: f64, x: &Vec3| -> Result<f64> {
        let rate = gamma_rate_at(sys, t)?;
        Ok(0.5 * x.dot(&rate.mul_vec(x)))
    };

    let mut states = Vec::with_capacity(n / sys.stride + 2);
    let mut work_out = Vec::with_capacity(n / sys.stride + 2);
    let (mut x, mut p) = (x0, p0);
    let mut work = 0.0;
    let mut prev_power = power(sys.t0, &x)?;
    states.push(TrajectoryState {
        t: sys.t0,
        x,
        p,
        energy: energy(&gamma_at(sys, sys.t0)?, &x, &p),
    });
    work_out.push(0.0);

    for k in 0..n {
        let t = sys.t0 + k as f64 * h;
        (x, p) = rk4_step(sys, t, h, x, p)?;
        let t_next = sys.t0 + (k + 1) as f64 * h;
        let next_power = power(t_next, &x)?;
        work += 0.5 * h * (prev_power + next_power);
        prev_power = next_power;
        if emitted(k + 1, n, sys.stride) {
            states.push(TrajectoryState {
                t: t_next,
                x,
                p,
                energy: energy(&gamma_at(sys, t_next)?, &x, &p),
            });
            work_out.push(work);
        }
    }
    Ok(Trajectory {
        states,
        work: work_out,
        steps: n,
        h,
    })
}

/// Instantaneous eigenbasis with rows tracked for continuity.
#[derive(Debug, Clone, Copy, PartialEq)]
struct TrackedBasis {
    /// Row i is mode i.
    u: Mat3,
    omega_sq: [f64; 3],
}

const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Maximal-overlap permutation and sign matching of a fresh eigenbasis
/// against the previous one. Returns the matched basis and its smallest
/// per-mode overlap.
fn track(prev: &TrackedBasis, g: &SymMat3) -> Result<(TrackedBasis, f64)> {
    let j = jacobi_default(g)?;
    let overlap = |i: usize, c: usize| prev.u.row(i).dot(&j.eigenvectors.col(c));
    let mut best = PERMUTATIONS[0];
    let mut best_score = f64::NEG_INFINITY;
    for perm in PERMUTATIONS {
        let score: f64 = (0..3).map(|i| overlap(i, perm[i]).abs()).sum();
        if score > best_score {
            best_score = score;
            best = perm;
        }
    }
    let mut u = Mat3::ZERO;
    let mut omega_sq = [0.0; 3];
    let mut min_overlap = f64::INFINITY;
    for i in 0..3 {
        let c = best[i];
        let o = overlap(i, c);
        let sign = if o < 0.0 { -1.0 } else { 1.0 };
        u[i] = j.eigenvectors.col(c).scale(sign).0;
        omega_sq[i] = j.eigenvalues[c];
        min_overlap = min_overlap.min(o.abs());
    }
    Ok((TrackedBasis { u, omega_sq }, min_overlap))
}

/// Minimum overlap accepted between consecutive eigenbases.
pub const MIN_OVERLAP: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecouplingComparison {
    pub direct: Trajectory,
    /// Naive states at the same emitted times (possibly truncated).
    pub naive: Vec<TrajectoryState>,
    /// `D(t) = ‖x_naive(t) − x_direct(t)‖`, aligned with `naive`.
    pub discrepancy: Vec<f64>,
    pub max_discrepancy: f64,
    /// Smallest eigenbasis overlap met while tracking.
    pub min_overlap: f64,
    /// Set when tracking failed and the run was cut short.
    pub stopped: Option<Error>,
}

/// Evolves `q̇ᵢ = p̃ᵢ, p̃̇ᵢ = −Ωᵢ²(t)qᵢ` in the tracked instantaneous
/// eigenbasis, without the coupling that comes from `dU/dt`, maps back with
/// `x = Uᵀ(t)q`, and compares to [`integrate_direct`].
pub fn integrate_naive_decoupled(
    sys: &OscillatorSystem,
    x0: Vec3,
    p0: Vec3,
) -> Result<DecouplingComparison> {
    let direct = integrate_direct(sys, x0, p0)?;
    let (n, h) = sys.grid();

    let first = jacobi_default(&gamma_at(sys, sys.t0)?)?;
    let mut basis = TrackedBasis {
        u: first.eigenvectors.transpose(),
        omega_sq: first.eigenvalues,
    };
    let mut q = basis.u * x0;
    let mut pq = basis.u * p0;

    // U(t0)ᵀU(t0) = I, so the naive run starts exactly at (x0, p0).
    let mut naive = vec![direct.states[0]];
    let mut min_overlap: f64 = 1.0;
    let mut stopped = None;

    for k in 0..n {
        let t = sys.t0 + k as f64 * h;
        let (mid, o_mid) = track(&basis, &gamma_at(sys, t + 0.5 * h)?)?;
        let (end, o_end) = track(&mid, &gamma_at(sys, t + h)?)?;
        min_overlap = min_overlap.min(o_mid).min(o_end);
        if o_mid < MIN_OVERLAP || o_end < MIN_OVERLAP {
            let (tt, overlap) = if o_mid < MIN_OVERLAP {
                (t + 0.5 * h, o_mid)
            } else {
                (t + h, o_end)
            };
            stopped = Some(Error::EigenbasisDiscontinuity { t: tt, overlap });
            break;
        }

        for i in 0..3 {
            let (w0, wm, w1) = (basis.omega_sq[i], mid.omega_sq[i], end.omega_sq[i]);
            let (x, p) = (q[i], pq[i]);
            let k1x = p;
            let k1p = -w0 * x;
            let k2x = p + 0.5 * h * k1p;
            let k2p = -wm * (x + 0.5 * h * k1x);
            let k3x = p + 0.5 * h * k2p;
            let k3p = -wm * (x + 0.5 * h * k2x);
            let k4x = p + h * k3p;
            let k4p = -w1 * (x + h * k3x);
            q[i] = x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
            pq[i] = p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        }
        basis = end;

        if emitted(k + 1, n, sys.stride) {
            let t_next = sys.t0 + (k + 1) as f64 * h;
            let ut = basis.u.transpose();
            let x = ut * q;
            let p = ut * pq;
            naive.push(TrajectoryState {
                t: t_next,
                x,
                p,
                energy: energy(&gamma_at(sys, t_next)?, &x, &p),
            });
        }
    }

    let discrepancy: Vec<f64> = naive
        .iter()
        .zip(&direct.states)
        .map(|(a, b)| (a.x - b.x).norm())
        .collect();
    let max_discrepancy = discrepancy.iter().copied().fold(0.0, f64::max);
    Ok(DecouplingComparison {
        direct,
        naive,
        discrepancy,
        max_discrepancy,
        min_overlap,
        stopped,
    })
}
