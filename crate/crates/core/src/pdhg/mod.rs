//! Restarted primal-dual hybrid gradient for
//! `min_{x∈X} max_{y∈Y} cᵀx − yᵀKx + qᵀy`.
//!
//! Each inner loop starts at a restart point, runs projected primal and dual
//! steps and tracks the uniform average of its iterates. Every
//! `check_every` iterations the current and average points are unscaled and
//! tested for termination on the original problem; the one with the smaller
//! KKT error on the scaled problem becomes the restart candidate.

mod power;
mod steps;

pub use power::{estimate_op_norm, estimate_op_norm_with};
pub use steps::{
    choose_restart_candidate, dual_step, primal_step, update_primal_weight, RestartRule, RunningAverage,
};

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::kkt::{check_termination, compute_residuals_with, kkt_omega_from, Iterate, KktContext, ResidualReport};
use crate::linalg::{self, Exec};
use crate::lp_model::LpProblem;
use crate::scaling::{apply_scaling, default_scaling, ScalingConfig, ScalingInfo};

use steps::{dual_kernel, primal_kernel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    pub eps: f64,
    /// Seconds.
    pub time_limit: f64,
    pub iter_limit: Option<u64>,
    pub sufficient_decay: f64,
    pub necessary_decay: f64,
    pub long_loop_frac: f64,
    pub check_every: u64,
    pub scaling: ScalingConfig,
    pub seed: u64,
    pub restarts: bool,
    pub adaptive_step: bool,
    pub power_iters: usize,
    pub exec: Exec,
}

impl Default for SolverParams {
    fn default() -> Self {
        let rule = RestartRule::default();
        SolverParams {
            eps: 1e-4,
            time_limit: 3600.0,
            iter_limit: None,
            sufficient_decay: rule.sufficient_decay,
            necessary_decay: rule.necessary_decay,
            long_loop_frac: rule.long_loop_frac,
            check_every: 64,
            scaling: ScalingConfig::default(),
            seed: 0,
            restarts: true,
            adaptive_step: false,
            power_iters: 100,
            exec: Exec::default(),
        }
    }
}

impl SolverParams {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), SolveError> {
        let bad = |msg: &str| Err(SolveError::InvalidParams(msg.to_string()));
        if !(self.eps > 0.0) {
            return bad("eps must be positive");
        }
        if !(0.0 < self.sufficient_decay
            && self.sufficient_decay < self.necessary_decay
            && self.necessary_decay < 1.0)
        {
            return bad("need 0 < sufficient_decay < necessary_decay < 1");
        }
        if !(0.0 < self.long_loop_frac && self.long_loop_frac < 1.0) {
            return bad("long_loop_frac must lie in (0, 1)");
        }
        if self.check_every == 0 {
            return bad("check_every must be at least 1");
        }
        if !(self.time_limit > 0.0) {
            return bad("time_limit must be positive");
        }
        if self.power_iters == 0 {
            return bad("power_iters must be at least 1");
        }
        if !(0.0..=2.0).contains(&self.scaling.pc_alpha) {
            return bad("scaling.pc_alpha must lie in [0, 2]");
        }
        Ok(())
    }

    pub fn restart_rule(&self) -> RestartRule {
        RestartRule {
            sufficient_decay: self.sufficient_decay,
            necessary_decay: self.necessary_decay,
            long_loop_frac: self.long_loop_frac,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SolveError {
    #[error("invalid solver parameters: {0}")]
    InvalidParams(String),
    #[error("numerical failure: non-finite iterate at iteration {iteration}")]
    NumericalFailure { iteration: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    IterLimit,
    TimeLimit,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub status: Status,
    /// Primal point in the original space.
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Residuals of `(x, y)` on the original problem.
    pub report: ResidualReport,
    pub iterations: u64,
    pub restarts: u64,
    /// Seconds spent in the iteration loop.
    pub wall_time: f64,
    /// Seconds spent on scaling and step-size estimation.
    pub setup_time: f64,
}

/// Mutable state of the iteration, all in scaled space.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub current: Iterate,
    pub average: RunningAverage,
    pub loop_start: Iterate,
    pub eta: f64,
    pub omega: f64,
    /// Inner iteration count of the current loop.
    pub t: u64,
    /// Total iterations.
    pub k: u64,
    pub n_restarts: u64,
    pub kkt_loop_start: f64,
    pub last_candidate_kkt: f64,
}

impl SolverState {
    pub fn new(start: Iterate, eta: f64, omega: f64) -> Self {
        let (n, m) = (start.x.len(), start.y.len());
        SolverState {
            loop_start: start.clone(),
            current: start,
            average: RunningAverage::new(n, m),
            eta,
            omega,
            t: 0,
            k: 0,
            n_restarts: 0,
            kkt_loop_start: f64::INFINITY,
            last_candidate_kkt: f64::INFINITY,
        }
    }

    pub fn update_average(&mut self, exec: Exec, z_new: &Iterate) {
        self.average.push(exec, &z_new.x, &z_new.y);
    }

    /// Starts a new loop at `z` and resets the average.
    fn restart_at(&mut self, z: Iterate, kkt: f64) {
        self.loop_start = z.clone();
        self.current = z;
        self.average.reset();
        self.t = 0;
        self.kkt_loop_start = kkt;
        self.last_candidate_kkt = f64::INFINITY;
        self.n_restarts += 1;
    }
}

/// One completed termination/restart evaluation, handed to observers.
#[derive(Clone, Debug)]
pub struct CheckInfo<'a> {
    pub iteration: u64,
    pub elapsed: f64,
    pub current: &'a ResidualReport,
    pub average: &'a ResidualReport,
    pub omega: f64,
    pub restarts: u64,
    pub restarted: bool,
}

struct Best {
    kkt1: f64,
    x: Vec<f64>,
    y: Vec<f64>,
    report: ResidualReport,
}

pub fn solve(problem: &LpProblem, params: &SolverParams) -> Result<SolveResult, SolveError> {
    solve_observed(problem, params, |_| {})
}

/// [`solve`] with a callback invoked after every evaluation.
pub fn solve_observed<F>(problem: &LpProblem, params: &SolverParams, mut observe: F) -> Result<SolveResult, SolveError>
where
    F: FnMut(&CheckInfo<'_>),
{
    params.validate()?;
    let exec = params.exec;
    let setup_clock = Instant::now();

    let scaling = if params.scaling.enabled {
        default_scaling(problem, &params.scaling)
    } else {
        ScalingInfo::identity(problem.m(), problem.n())
    };
    let sp = apply_scaling(problem, &scaling);
    let sctx = KktContext::new(&sp, exec);
    let octx = KktContext::new(problem, exec);
    let (n, m, m1) = (sp.n(), sp.m(), sp.m1());

    let op_norm = estimate_op_norm_with(&sctx.k, params.power_iters, params.seed, exec);
    let eta = if op_norm > 0.0 { 0.9 / op_norm } else { 1.0 };
    let omega = if sctx.c_norm > 1e-10 && sctx.q_norm > 1e-10 { sctx.c_norm / sctx.q_norm } else { 1.0 };
    if !eta.is_finite() || !omega.is_finite() {
        return Err(SolveError::NumericalFailure { iteration: 0 });
    }

    let mut x0 = vec![0.0; n];
    linalg::for_each_indexed(exec, &mut x0, |j, v| *v = linalg::clamp_nan(0.0, sp.lower()[j], sp.upper()[j]));
    let mut state = SolverState::new(Iterate::new(x0, vec![0.0; m]), eta, omega);
    state.kkt_loop_start = kkt_omega_from(&compute_residuals_with(&sp, &sctx, &state.current), omega);
    let setup_time = setup_clock.elapsed().as_secs_f64();

    let rule = params.restart_rule();
    let time_limit = Duration::from_secs_f64(params.time_limit.min(1e12));
    let iter_limit = params.iter_limit.unwrap_or(u64::MAX);
    let clock = Instant::now();

    let k = &sctx.k;
    let c = sp.c();
    let (l, u) = (sp.lower(), sp.upper());
    let q = &sctx.q;

    let mut kx = k.mul_vec(exec, &state.current.x);
    let mut kty = k.mul_transpose_vec(exec, &state.current.y);
    let mut x_new = vec![0.0; n];
    let mut y_new = vec![0.0; m];
    let mut kx_new = vec![0.0; m];
    let mut kty_new = vec![0.0; n];
    let mut best: Option<Best> = None;

    let finish = |status: Status, x: Vec<f64>, y: Vec<f64>, report: ResidualReport, state: &SolverState| {
        let lambda = lambda_for(problem, &octx, &y);
        SolveResult {
            status,
            x,
            y,
            lambda,
            report,
            iterations: state.k,
            restarts: state.n_restarts,
            wall_time: clock.elapsed().as_secs_f64(),
            setup_time,
        }
    };

    loop {
        // one PDHG step, possibly retried under the adaptive rule
        loop {
            let eta = state.eta;
            let w = state.omega;
            primal_kernel(exec, c, &kty, l, u, &state.current.x, eta / w, &mut x_new);
            k.mul_vec_into(exec, &x_new, &mut kx_new);
            dual_kernel(exec, q, &kx_new, &kx, &state.current.y, m1, eta * w, &mut y_new);
            if !params.adaptive_step {
                break;
            }
            let dx2 = linalg::dist2(exec, &x_new, &state.current.x).powi(2);
            let dy2 = linalg::dist2(exec, &y_new, &state.current.y).powi(2);
            let mut interaction = 0.0;
            for i in 0..m {
                interaction += (y_new[i] - state.current.y[i]) * (kx_new[i] - kx[i]);
            }
            let interaction = interaction.abs();
            let movement = 0.5 * w * dx2 + 0.5 * dy2 / w;
            let limit = if interaction > 0.0 { movement / interaction } else { f64::INFINITY };
            let kk = (state.k + 1) as f64;
            let next = ((1.0 - kk.powf(-0.3)) * limit).min((1.0 + kk.powf(-0.6)) * eta);
            if !next.is_finite() || next <= 0.0 {
                return Err(SolveError::NumericalFailure { iteration: state.k });
            }
            state.eta = next;
            if eta <= limit {
                break;
            }
        }
        k.mul_transpose_vec_into(exec, &y_new, &mut kty_new);
        std::mem::swap(&mut state.current.x, &mut x_new);
        std::mem::swap(&mut state.current.y, &mut y_new);
        std::mem::swap(&mut kx, &mut kx_new);
        std::mem::swap(&mut kty, &mut kty_new);
        state.average.push(exec, &state.current.x, &state.current.y);
        state.t += 1;
        state.k += 1;
        debug_assert!(state.current.x.iter().zip(l.iter().zip(u)).all(|(v, (lo, hi))| !(v < lo || v > hi)));
        debug_assert!(state.current.y[m1..].iter().all(|v| v.is_nan() || *v >= 0.0));

        let at_limit = state.k >= iter_limit;
        if !state.k.is_multiple_of(params.check_every) && !at_limit {
            continue;
        }
        if !state.current.is_finite() {
            return Err(SolveError::NumericalFailure { iteration: state.k });
        }

        // termination on the original problem
        let avg = state.average.iterate();
        let cur_x = scaling.unscale_primal(&state.current.x);
        let cur_y = scaling.unscale_dual(&state.current.y);
        let avg_x = scaling.unscale_primal(&avg.x);
        let avg_y = scaling.unscale_dual(&avg.y);
        let cur_rep = compute_residuals_with(problem, &octx, &Iterate::new(cur_x.clone(), cur_y.clone()));
        let avg_rep = compute_residuals_with(problem, &octx, &Iterate::new(avg_x.clone(), avg_y.clone()));
        let elapsed = clock.elapsed();
        log::info!(
            "iter={} time={:.3} rel_primal={:.3e} rel_dual={:.3e} rel_gap={:.3e} omega={:.4e} restarts={}",
            state.k,
            elapsed.as_secs_f64(),
            cur_rep.rel_primal,
            cur_rep.rel_dual,
            cur_rep.rel_gap,
            state.omega,
            state.n_restarts
        );
        if check_termination(&cur_rep, params.eps) {
            return Ok(finish(Status::Optimal, cur_x, cur_y, cur_rep, &state));
        }
        if check_termination(&avg_rep, params.eps) {
            return Ok(finish(Status::Optimal, avg_x, avg_y, avg_rep, &state));
        }
        for (x, y, rep) in [(cur_x, cur_y, cur_rep.clone()), (avg_x, avg_y, avg_rep.clone())] {
            let kkt1 = kkt_omega_from(&rep, 1.0);
            if best.as_ref().is_none_or(|b| kkt1 < b.kkt1) {
                best = Some(Best { kkt1, x, y, report: rep });
            }
        }
        let limit_status = if at_limit {
            Some(Status::IterLimit)
        } else if elapsed >= time_limit {
            Some(Status::TimeLimit)
        } else {
            None
        };
        if let Some(status) = limit_status {
            let b = best.take().expect("an evaluation has happened");
            return Ok(finish(status, b.x, b.y, b.report, &state));
        }

        // restart decision on the scaled problem
        let mut restarted = false;
        if params.restarts {
            let kkt_cur = kkt_omega_from(&compute_residuals_with(&sp, &sctx, &state.current), state.omega);
            let kkt_avg = kkt_omega_from(&compute_residuals_with(&sp, &sctx, &avg), state.omega);
            let (candidate, kkt_cand) =
                if kkt_cur < kkt_avg { (state.current.clone(), kkt_cur) } else { (avg, kkt_avg) };
            if rule.should_restart(state.t, state.k, kkt_cand, state.kkt_loop_start, state.last_candidate_kkt) {
                let dx = linalg::dist2(exec, &candidate.x, &state.loop_start.x);
                let dy = linalg::dist2(exec, &candidate.y, &state.loop_start.y);
                state.omega = update_primal_weight(state.omega, dx, dy);
                state.restart_at(candidate, kkt_cand);
                k.mul_vec_into(exec, &state.current.x, &mut kx);
                k.mul_transpose_vec_into(exec, &state.current.y, &mut kty);
                restarted = true;
            } else {
                state.last_candidate_kkt = kkt_cand;
            }
        }
        observe(&CheckInfo {
            iteration: state.k,
            elapsed: elapsed.as_secs_f64(),
            current: &cur_rep,
            average: &avg_rep,
            omega: state.omega,
            restarts: state.n_restarts,
            restarted,
        });
    }
}

fn lambda_for(problem: &LpProblem, ctx: &KktContext, y: &[f64]) -> Vec<f64> {
    let kty = ctx.k.mul_transpose_vec(ctx.exec, y);
    problem.c().iter().zip(&kty).zip(&ctx.classes).map(|((c, k), cl)| cl.project(c - k)).collect()
}
