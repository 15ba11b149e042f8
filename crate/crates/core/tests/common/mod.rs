//! Independent reference implementations used by the integration tests.
//! Everything here works on dense `Vec<Vec<f64>>` and never calls the
//! solver's own residual or matrix kernels.

#![allow(dead_code)]

use pdhg::LpProblem;

pub fn dense(problem: &LpProblem) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    (problem.a().to_dense(), problem.g().to_dense())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solves `M z = r` by Gaussian elimination with partial pivoting.
/// Returns `None` for (near) singular systems.
pub fn gauss_solve(mut m: Vec<Vec<f64>>, mut r: Vec<f64>) -> Option<Vec<f64>> {
    let k = r.len();
    for col in 0..k {
        let piv = (col..k).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-11 {
            return None;
        }
        m.swap(col, piv);
        r.swap(col, piv);
        for row in col + 1..k {
            let f = m[row][col] / m[col][col];
            if f != 0.0 {
                let pivot_row = m[col].clone();
                for (dst, src) in m[row][col..].iter_mut().zip(&pivot_row[col..]) {
                    *dst -= f * src;
                }
                r[row] -= f * r[col];
            }
        }
    }
    let mut z = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|j| m[i][j] * z[j]).sum();
        z[i] = (r[i] - s) / m[i][i];
    }
    Some(z)
}

fn combinations(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

/// Dense primal feasibility check with an absolute tolerance.
pub fn is_feasible(problem: &LpProblem, x: &[f64], tol: f64) -> bool {
    let (a, g) = dense(problem);
    let eq = a.iter().zip(problem.b()).all(|(row, b)| (dot(row, x) - b).abs() <= tol);
    let ineq = g.iter().zip(problem.h()).all(|(row, h)| dot(row, x) >= h - tol);
    let bounds = x
        .iter()
        .zip(problem.lower().iter().zip(problem.upper()))
        .all(|(v, (l, u))| *v >= l - tol && *v <= u + tol);
    eq && ineq && bounds
}

/// Optimal objective (offset included) of an LP with finite bounds, by
/// enumerating every basic solution: each variable sits at its lower bound,
/// its upper bound, or is basic, and the basic ones are pinned down by the
/// equality rows plus a choice of active inequality rows.
pub fn vertex_enumeration(problem: &LpProblem) -> Option<f64> {
    let n = problem.n();
    let (a, g) = dense(problem);
    let (l, u) = (problem.lower(), problem.upper());
    assert!(l.iter().chain(u).all(|v| v.is_finite()), "vertex enumeration needs finite bounds");
    let m1 = a.len();
    let mut best: Option<f64> = None;
    // 0 = lower, 1 = upper, 2 = basic
    let mut status = vec![0u8; n];
    loop {
        let basic: Vec<usize> = (0..n).filter(|&j| status[j] == 2).collect();
        let k = basic.len();
        if k >= m1 && k - m1 <= g.len() {
            let fixed: Vec<f64> =
                (0..n).map(|j| match status[j] { 0 => l[j], 1 => u[j], _ => 0.0 }).collect();
            combinations(g.len(), k - m1, &mut |active| {
                let rows: Vec<(&Vec<f64>, f64)> = a
                    .iter()
                    .zip(problem.b())
                    .chain(active.iter().map(|&i| (&g[i], &problem.h()[i])))
                    .map(|(row, rhs)| (row, *rhs))
                    .collect();
                let mat: Vec<Vec<f64>> = rows.iter().map(|(row, _)| basic.iter().map(|&j| row[j]).collect()).collect();
                let rhs: Vec<f64> = rows.iter().map(|(row, r)| r - dot(row, &fixed)).collect();
                let z = if k == 0 { Some(vec![]) } else { gauss_solve(mat, rhs) };
                if let Some(z) = z {
                    let mut x = fixed.clone();
                    for (&j, v) in basic.iter().zip(&z) {
                        x[j] = *v;
                    }
                    if is_feasible(problem, &x, 1e-9) {
                        let obj = dot(problem.c(), &x) + problem.objective_offset();
                        if best.is_none_or(|b| obj < b) {
                            best = Some(obj);
                        }
                    }
                }
            });
        }
        // next status vector in base 3
        let mut j = 0;
        while j < n && status[j] == 2 {
            status[j] = 0;
            j += 1;
        }
        if j == n {
            break;
        }
        status[j] += 1;
    }
    best
}

#[derive(Debug, Clone, Copy)]
pub struct DenseResiduals {
    pub primal_res: f64,
    pub dual_res: f64,
    pub gap: f64,
    pub rel_primal: f64,
    pub rel_dual: f64,
    pub rel_gap: f64,
    pub primal_obj: f64,
    pub dual_obj: f64,
}

/// Residuals of `(x, y)` recomputed from the dense data, with `λ` derived
/// coordinate by coordinate from the bound types.
pub fn dense_residuals(problem: &LpProblem, x: &[f64], y: &[f64]) -> DenseResiduals {
    let (a, g) = dense(problem);
    let m1 = a.len();
    let k: Vec<&Vec<f64>> = a.iter().chain(g.iter()).collect();
    let q: Vec<f64> = problem.b().iter().chain(problem.h()).copied().collect();
    let c = problem.c();
    let (l, u) = (problem.lower(), problem.upper());

    let pr: Vec<f64> = (0..k.len())
        .map(|i| {
            let kx = dot(k[i], x);
            if i < m1 { kx - q[i] } else { (q[i] - kx).max(0.0) }
        })
        .collect();
    let mut lam = vec![0.0; c.len()];
    let mut bound_term = 0.0;
    for j in 0..c.len() {
        let r = c[j] - (0..k.len()).map(|i| k[i][j] * y[i]).sum::<f64>();
        lam[j] = match (l[j].is_finite(), u[j].is_finite()) {
            (true, true) => r,
            (true, false) => r.max(0.0),
            (false, true) => r.min(0.0),
            (false, false) => 0.0,
        };
        if lam[j] > 0.0 {
            bound_term += l[j] * lam[j];
        } else if lam[j] < 0.0 {
            bound_term += u[j] * lam[j];
        }
    }
    let dr: Vec<f64> = (0..c.len())
        .map(|j| c[j] - (0..k.len()).map(|i| k[i][j] * y[i]).sum::<f64>() - lam[j])
        .collect();
    let off = problem.objective_offset();
    let primal_obj = dot(c, x) + off;
    let dual_obj = dot(&q, y) + bound_term + off;
    DenseResiduals {
        primal_res: norm(&pr),
        dual_res: norm(&dr),
        gap: (dual_obj - primal_obj).abs(),
        rel_primal: norm(&pr) / (1.0 + norm(&q)),
        rel_dual: norm(&dr) / (1.0 + norm(c)),
        rel_gap: (dual_obj - primal_obj).abs() / (1.0 + primal_obj.abs() + dual_obj.abs()),
        primal_obj,
        dual_obj,
    }
}

/// Damped PageRank by power iteration: `x ← θ S x + (1 − θ)/n`, with `S`
/// column stochastic and dangling nodes looping to themselves.
pub fn pagerank_power(n: usize, edges: &[(usize, usize)], damping: f64, iters: usize) -> Vec<f64> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(s, d) in edges {
        if !out[s].contains(&d) {
            out[s].push(d);
        }
    }
    for (s, o) in out.iter_mut().enumerate() {
        if o.is_empty() {
            o.push(s);
        }
    }
    let mut x = vec![1.0 / n as f64; n];
    for _ in 0..iters {
        let mut nx = vec![(1.0 - damping) / n as f64; n];
        for (s, o) in out.iter().enumerate() {
            let share = damping * x[s] / o.len() as f64;
            for &d in o {
                nx[d] += share;
            }
        }
        x = nx;
    }
    x
}

pub fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
}
