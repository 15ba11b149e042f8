//! Residuals, duality gap, the ω-weighted KKT error and the relative
//! termination test.

use serde::{Deserialize, Serialize};

use crate::linalg::{self, Exec};
use crate::lp_model::{classify_bounds, stack_k, BoundClass, LpProblem, SparseMatrix};

/// Primal-dual point `z = (x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Iterate {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Iterate {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        Iterate { x, y }
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Iterate { x: vec![0.0; n], y: vec![0.0; m] }
    }

    pub fn is_finite(&self) -> bool {
        !linalg::has_nan(&self.x) && !linalg::has_nan(&self.y)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub primal_res: f64,
    pub dual_res: f64,
    pub gap_abs: f64,
    /// `dual_obj − primal_obj`, kept for diagnostics.
    pub gap_signed: f64,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub rel_primal: f64,
    pub rel_dual: f64,
    pub rel_gap: f64,
}

/// Problem data needed repeatedly by residual evaluation, built once.
#[derive(Clone, Debug)]
pub struct KktContext {
    pub(crate) k: SparseMatrix,
    pub(crate) q: Vec<f64>,
    pub(crate) classes: Vec<BoundClass>,
    pub(crate) q_norm: f64,
    pub(crate) c_norm: f64,
    pub(crate) exec: Exec,
}

impl KktContext {
    pub fn new(problem: &LpProblem, exec: Exec) -> Self {
        let (k, q) = stack_k(problem);
        KktContext {
            q_norm: linalg::norm2(exec, &q),
            c_norm: linalg::norm2(exec, problem.c()),
            classes: classify_bounds(problem),
            k,
            q,
            exec,
        }
    }

    pub fn k(&self) -> &SparseMatrix {
        &self.k
    }
}

/// `λ = proj_Λ(c − Kᵀy)`.
pub fn derive_lambda(problem: &LpProblem, y: &[f64]) -> Vec<f64> {
    let ctx = KktContext::new(problem, Exec::Sequential);
    let kty = ctx.k.mul_transpose_vec(Exec::Sequential, y);
    lambda_from_kty(problem.c(), &kty, &ctx.classes)
}

fn lambda_from_kty(c: &[f64], kty: &[f64], classes: &[BoundClass]) -> Vec<f64> {
    c.iter().zip(kty).zip(classes).map(|((ci, ki), cl)| cl.project(ci - ki)).collect()
}

/// `lᵀλ⁺ − uᵀλ⁻` with `0·∞ = 0`.
fn bound_term(l: &[f64], u: &[f64], lambda: &[f64]) -> f64 {
    let mut s = 0.0;
    for ((&li, &ui), &lam) in l.iter().zip(u).zip(lambda) {
        if lam > 0.0 {
            assert!(li.is_finite(), "positive bound multiplier on a variable without lower bound");
            s += li * lam;
        } else if lam < 0.0 {
            assert!(ui.is_finite(), "negative bound multiplier on a variable without upper bound");
            s += ui * lam;
        }
    }
    s
}

pub fn compute_residuals(problem: &LpProblem, z: &Iterate) -> ResidualReport {
    compute_residuals_with(problem, &KktContext::new(problem, Exec::Sequential), z)
}

/// Same as [`compute_residuals`] reusing a prebuilt context.
pub fn compute_residuals_with(problem: &LpProblem, ctx: &KktContext, z: &Iterate) -> ResidualReport {
    let exec = ctx.exec;
    let m1 = problem.m1();
    assert_eq!(z.x.len(), problem.n());
    assert_eq!(z.y.len(), problem.m());

    let mut r = ctx.k.mul_vec(exec, &z.x);
    linalg::for_each_indexed(exec, &mut r, |i, v| {
        let d = ctx.q[i] - *v;
        // Ax − b on equality rows, [h − Gx]⁺ on inequality rows
        *v = if i < m1 { -d } else { d.max(0.0) };
    });
    let primal_res = linalg::norm2(exec, &r);

    let kty = ctx.k.mul_transpose_vec(exec, &z.y);
    let lambda = lambda_from_kty(problem.c(), &kty, &ctx.classes);
    let mut d = kty;
    let c = problem.c();
    linalg::for_each_indexed(exec, &mut d, |j, v| *v = c[j] - *v - lambda[j]);
    let dual_res = linalg::norm2(exec, &d);

    let offset = problem.objective_offset();
    let primal_obj = linalg::dot(exec, c, &z.x) + offset;
    let dual_obj =
        linalg::dot(exec, &ctx.q, &z.y) + bound_term(problem.lower(), problem.upper(), &lambda) + offset;
    let gap_signed = dual_obj - primal_obj;
    let gap_abs = gap_signed.abs();
    ResidualReport {
        primal_res,
        dual_res,
        gap_abs,
        gap_signed,
        primal_obj,
        dual_obj,
        rel_primal: primal_res / (1.0 + ctx.q_norm),
        rel_dual: dual_res / (1.0 + ctx.c_norm),
        rel_gap: gap_abs / (1.0 + dual_obj.abs() + primal_obj.abs()),
    }
}

pub fn check_termination(report: &ResidualReport, eps: f64) -> bool {
    report.rel_primal <= eps && report.rel_dual <= eps && report.rel_gap <= eps
}

/// `√(ω²·p² + d²/ω² + g²)` from already computed absolute residuals.
pub fn kkt_omega_from(report: &ResidualReport, omega: f64) -> f64 {
    let p = report.primal_res;
    let d = report.dual_res;
    let g = report.gap_abs;
    (omega * omega * p * p + d * d / (omega * omega) + g * g).sqrt()
}

pub fn kkt_omega(problem: &LpProblem, z: &Iterate, omega: f64) -> f64 {
    assert!(omega > 0.0, "omega must be positive");
    kkt_omega_from(&compute_residuals(problem, z), omega)
}
