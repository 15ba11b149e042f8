//! The individual pieces of a restarted PDHG iteration.

use crate::kkt::{kkt_omega, Iterate};
use crate::linalg::{clamp_nan, for_each_indexed, Exec};
use crate::lp_model::{stack_k, LpProblem};

/// `out = proj_[l,u](x − step·(c − Kᵀy))` given a precomputed `Kᵀy`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn primal_kernel(
    exec: Exec,
    c: &[f64],
    kty: &[f64],
    l: &[f64],
    u: &[f64],
    x: &[f64],
    step: f64,
    out: &mut [f64],
) {
    for_each_indexed(exec, out, |j, o| {
        *o = clamp_nan(x[j] - step * (c[j] - kty[j]), l[j], u[j]);
    });
}

/// `out = proj_Y(y + step·(q − (2·Kx_new − Kx_old)))`; rows `m1..` are
/// clamped at zero from below.
#[allow(clippy::too_many_arguments)]
pub(crate) fn dual_kernel(
    exec: Exec,
    q: &[f64],
    kx_new: &[f64],
    kx_old: &[f64],
    y: &[f64],
    m1: usize,
    step: f64,
    out: &mut [f64],
) {
    for_each_indexed(exec, out, |i, o| {
        let v = y[i] + step * (q[i] - (2.0 * kx_new[i] - kx_old[i]));
        *o = if i >= m1 && v < 0.0 { 0.0 } else { v };
    });
}

/// Projected primal gradient step with step `η/ω`.
pub fn primal_step(problem: &LpProblem, x: &[f64], y: &[f64], eta: f64, omega: f64) -> Vec<f64> {
    assert!(eta > 0.0 && omega > 0.0);
    let (k, _) = stack_k(problem);
    let kty = k.mul_transpose_vec(Exec::Sequential, y);
    let mut out = vec![0.0; x.len()];
    primal_kernel(
        Exec::Sequential,
        problem.c(),
        &kty,
        problem.lower(),
        problem.upper(),
        x,
        eta / omega,
        &mut out,
    );
    out
}

/// Projected dual ascent step with step `ηω` at the extrapolated point
/// `2·x_new − x_old`.
pub fn dual_step(
    problem: &LpProblem,
    x_new: &[f64],
    x_old: &[f64],
    y: &[f64],
    eta: f64,
    omega: f64,
) -> Vec<f64> {
    assert!(eta > 0.0 && omega > 0.0);
    let (k, q) = stack_k(problem);
    let kx_new = k.mul_vec(Exec::Sequential, x_new);
    let kx_old = k.mul_vec(Exec::Sequential, x_old);
    let mut out = vec![0.0; y.len()];
    dual_kernel(Exec::Sequential, &q, &kx_new, &kx_old, y, problem.m1(), eta * omega, &mut out);
    out
}

/// Uniform running mean of the iterates of the current loop.
#[derive(Clone, Debug)]
pub struct RunningAverage {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub weight: f64,
}

impl RunningAverage {
    pub fn new(n: usize, m: usize) -> Self {
        RunningAverage { x: vec![0.0; n], y: vec![0.0; m], weight: 0.0 }
    }

    pub fn reset(&mut self) {
        self.weight = 0.0;
        self.x.iter_mut().for_each(|v| *v = 0.0);
        self.y.iter_mut().for_each(|v| *v = 0.0);
    }

    /// `avg ← (w·avg + z)/(w + 1)`.
    pub fn push(&mut self, exec: Exec, x: &[f64], y: &[f64]) {
        let w = self.weight;
        let inv = 1.0 / (w + 1.0);
        for_each_indexed(exec, &mut self.x, |j, a| *a = (w * *a + x[j]) * inv);
        for_each_indexed(exec, &mut self.y, |i, a| *a = (w * *a + y[i]) * inv);
        self.weight = w + 1.0;
    }

    pub fn iterate(&self) -> Iterate {
        Iterate::new(self.x.clone(), self.y.clone())
    }
}

/// The current iterate if its KKT error is strictly smaller, else the average.
pub fn choose_restart_candidate(problem: &LpProblem, z_cur: &Iterate, z_avg: &Iterate, omega: f64) -> Iterate {
    if kkt_omega(problem, z_cur, omega) < kkt_omega(problem, z_avg, omega) {
        z_cur.clone()
    } else {
        z_avg.clone()
    }
}

/// Constants of the three restart conditions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RestartRule {
    pub sufficient_decay: f64,
    pub necessary_decay: f64,
    pub long_loop_frac: f64,
}

impl Default for RestartRule {
    fn default() -> Self {
        RestartRule { sufficient_decay: 0.2, necessary_decay: 0.8, long_loop_frac: 0.36 }
    }
}

impl RestartRule {
    /// `t` is the inner iteration count of the current loop, `k` the total
    /// across all loops.
    pub fn should_restart(
        &self,
        t: u64,
        k: u64,
        kkt_candidate: f64,
        kkt_loop_start: f64,
        kkt_prev_candidate: f64,
    ) -> bool {
        let sufficient = kkt_candidate <= self.sufficient_decay * kkt_loop_start;
        let necessary_no_progress =
            kkt_candidate <= self.necessary_decay * kkt_loop_start && kkt_candidate > kkt_prev_candidate;
        let long_loop = t as f64 >= self.long_loop_frac * k as f64;
        sufficient || necessary_no_progress || long_loop
    }
}

/// Log-space smoothing of the primal weight toward `Δy/Δx`.
pub fn update_primal_weight(omega: f64, dx_norm: f64, dy_norm: f64) -> f64 {
    if dx_norm > 1e-10 && dy_norm > 1e-10 {
        (0.5 * (dy_norm / dx_norm).ln() + 0.5 * omega.ln()).exp()
    } else {
        omega
    }
}
