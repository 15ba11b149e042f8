//! Diagonal preconditioning of `K`: Ruiz equilibration followed by a
//! Pock–Chambolle pass.
//!
//! A scaled problem has `K̃ = D_r K D_c`, `q̃ = D_r q`, `c̃ = D_c c` and bounds
//! divided by `D_c`. Iterates map back as `x = D_c x̃`, `y = D_r ỹ`.

use serde::{Deserialize, Serialize};

use crate::lp_model::{stack_k, LpProblem, SparseMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScalingConfig {
    pub enabled: bool,
    pub ruiz_iters: usize,
    pub pc_alpha: f64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig { enabled: true, ruiz_iters: 10, pc_alpha: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingInfo {
    /// One entry per row of `K` (equality rows first).
    pub row_scale: Vec<f64>,
    pub col_scale: Vec<f64>,
}

impl ScalingInfo {
    pub fn identity(m: usize, n: usize) -> Self {
        ScalingInfo { row_scale: vec![1.0; m], col_scale: vec![1.0; n] }
    }

    /// Entrywise product: applying the result equals applying `self` then `other`.
    pub fn compose(&self, other: &ScalingInfo) -> ScalingInfo {
        let mul = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).collect();
        ScalingInfo {
            row_scale: mul(&self.row_scale, &other.row_scale),
            col_scale: mul(&self.col_scale, &other.col_scale),
        }
    }

    /// Scaled-space primal iterate back to the original space.
    pub fn unscale_primal(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.col_scale).map(|(v, s)| v * s).collect()
    }

    pub fn unscale_dual(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.row_scale).map(|(v, s)| v * s).collect()
    }

    pub fn scale_primal(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.col_scale).map(|(v, s)| v / s).collect()
    }

    pub fn scale_dual(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.row_scale).map(|(v, s)| v / s).collect()
    }

    fn inverse(&self) -> ScalingInfo {
        ScalingInfo {
            row_scale: self.row_scale.iter().map(|s| 1.0 / s).collect(),
            col_scale: self.col_scale.iter().map(|s| 1.0 / s).collect(),
        }
    }
}

/// Ruiz infinity-norm equilibration. Each sweep divides every row and column
/// by the square root of its current infinity norm; empty rows and columns
/// keep scale 1.
pub fn ruiz_equilibrate(k: &SparseMatrix, iters: usize) -> ScalingInfo {
    let mut info = ScalingInfo::identity(k.n_rows(), k.n_cols());
    let mut cur = k.clone();
    for _ in 0..iters {
        let inv_sqrt = |v: f64| if v > 0.0 { 1.0 / v.sqrt() } else { 1.0 };
        let step = ScalingInfo {
            row_scale: cur.row_inf_norms().into_iter().map(inv_sqrt).collect(),
            col_scale: cur.col_inf_norms().into_iter().map(inv_sqrt).collect(),
        };
        cur = cur.scaled(&step.row_scale, &step.col_scale);
        info = info.compose(&step);
    }
    info
}

/// `row_i = 1/√(Σ_j |K_ij|^{2−α})`, `col_j = 1/√(Σ_i |K_ij|^α)`.
pub fn pock_chambolle_scale(k: &SparseMatrix, alpha: f64) -> ScalingInfo {
    assert!((0.0..=2.0).contains(&alpha), "alpha must lie in [0, 2]");
    let inv_sqrt = |s: f64| if s > 0.0 { 1.0 / s.sqrt() } else { 1.0 };
    let row_scale = (0..k.n_rows())
        .map(|i| inv_sqrt(k.row(i).1.iter().map(|v| v.abs().powf(2.0 - alpha)).sum()))
        .collect();
    let col_scale = (0..k.n_cols())
        .map(|j| inv_sqrt(k.col(j).1.iter().map(|v| v.abs().powf(alpha)).sum()))
        .collect();
    ScalingInfo { row_scale, col_scale }
}

/// Ruiz sweeps then one Pock–Chambolle pass on the already-equilibrated matrix.
pub fn default_scaling(problem: &LpProblem, cfg: &ScalingConfig) -> ScalingInfo {
    let (k, _) = stack_k(problem);
    if !cfg.enabled {
        return ScalingInfo::identity(k.n_rows(), k.n_cols());
    }
    let ruiz = ruiz_equilibrate(&k, cfg.ruiz_iters);
    let k1 = k.scaled(&ruiz.row_scale, &ruiz.col_scale);
    ruiz.compose(&pock_chambolle_scale(&k1, cfg.pc_alpha))
}

pub fn apply_scaling(problem: &LpProblem, info: &ScalingInfo) -> LpProblem {
    let m1 = problem.m1();
    assert_eq!(info.row_scale.len(), problem.m());
    assert_eq!(info.col_scale.len(), problem.n());
    let (dr_a, dr_g) = info.row_scale.split_at(m1);
    let dc = &info.col_scale;
    let mul = |v: &[f64], s: &[f64]| v.iter().zip(s).map(|(a, b)| a * b).collect::<Vec<_>>();
    let div = |v: &[f64], s: &[f64]| v.iter().zip(s).map(|(a, b)| a / b).collect::<Vec<_>>();
    problem.replace_data(
        problem.a().scaled(dr_a, dc),
        problem.g().scaled(dr_g, dc),
        mul(problem.c(), dc),
        mul(problem.b(), dr_a),
        mul(problem.h(), dr_g),
        div(problem.lower(), dc),
        div(problem.upper(), dc),
    )
}

/// Inverse of [`apply_scaling`].
pub fn unapply_scaling(problem: &LpProblem, info: &ScalingInfo) -> LpProblem {
    apply_scaling(problem, &info.inverse())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const INF: f64 = f64::INFINITY;

    fn random_matrix(m: usize, n: usize, seed: u64) -> SparseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t: Vec<_> = (0..m)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter_map(|(i, j)| {
                if rng.gen::<f64>() < 0.4 {
                    Some((i, j, rng.gen_range(-1.0..1.0) * 10f64.powi(rng.gen_range(-3..4))))
                } else {
                    None
                }
            })
            .collect();
        SparseMatrix::from_triplets(m, n, t).unwrap()
    }

    fn one_by_one(k: f64, q: f64, c: f64, l: f64, u: f64) -> LpProblem {
        LpProblem::new(
            SparseMatrix::zeros(0, 1),
            SparseMatrix::from_dense(&[vec![k]]),
            vec![c],
            vec![],
            vec![q],
            vec![l],
            vec![u],
        )
        .unwrap()
    }

    #[test]
    fn ruiz_unit_matrix_is_fixed() {
        let info = ruiz_equilibrate(&SparseMatrix::from_dense(&[vec![1.0]]), 10);
        assert_eq!(info, ScalingInfo::identity(1, 1));
    }

    #[test]
    fn ruiz_single_sweep_splits_evenly() {
        let k = SparseMatrix::from_dense(&[vec![100.0]]);
        let info = ruiz_equilibrate(&k, 1);
        assert_eq!(info.row_scale, vec![0.1]);
        assert_eq!(info.col_scale, vec![0.1]);
        assert!((k.scaled(&info.row_scale, &info.col_scale).to_dense()[0][0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ruiz_balances_random_matrix() {
        let k = random_matrix(20, 30, 7);
        let info = ruiz_equilibrate(&k, 10);
        let s = k.scaled(&info.row_scale, &info.col_scale);
        let rows: Vec<f64> = s.row_inf_norms().into_iter().filter(|v| *v > 0.0).collect();
        let max = rows.iter().cloned().fold(0.0, f64::max);
        let min = rows.iter().cloned().fold(INF, f64::min);
        assert!(max / min <= 1.01, "row norm ratio {}", max / min);
        for v in s.row_inf_norms().into_iter().chain(s.col_inf_norms()).filter(|v| *v > 0.0) {
            assert!(v <= 1.0 + 1e-12 && v >= 0.5f64.sqrt(), "norm {v}");
        }
    }

    #[test]
    fn pock_chambolle_formula() {
        let info = pock_chambolle_scale(&SparseMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 1.0]]), 1.0);
        let r = 1.0 / 2f64.sqrt();
        assert_eq!(info.row_scale, vec![r, r]);
        assert_eq!(info.col_scale, vec![r, r]);
    }

    #[test]
    fn pock_chambolle_zero_column() {
        let info = pock_chambolle_scale(&SparseMatrix::from_dense(&[vec![2.0, 0.0]]), 1.0);
        assert_eq!(info.col_scale[1], 1.0);
    }

    #[test]
    fn pock_chambolle_alpha_zero_counts_entries() {
        let k = SparseMatrix::from_dense(&[vec![1.0, -1.0], vec![0.0, 1.0]]);
        let info = pock_chambolle_scale(&k, 0.0);
        // column sums of |K|^0 count nonzeros: 1 and 2
        assert_eq!(info.col_scale, vec![1.0, 1.0 / 2f64.sqrt()]);
        // rows use |K|^2
        assert_eq!(info.row_scale, vec![1.0 / 2f64.sqrt(), 1.0]);
    }

    #[test]
    fn apply_identity_is_noop() {
        let p = one_by_one(1.0, 3.0, 1.0, 0.0, 4.0);
        assert_eq!(apply_scaling(&p, &ScalingInfo::identity(1, 1)), p);
    }

    #[test]
    fn apply_by_hand() {
        let p = one_by_one(1.0, 3.0, 1.0, 0.0, 4.0);
        let s = apply_scaling(&p, &ScalingInfo { row_scale: vec![2.0], col_scale: vec![0.5] });
        assert_eq!(s.g().to_dense(), vec![vec![1.0]]);
        assert_eq!(s.h(), &[6.0]);
        assert_eq!(s.c(), &[0.5]);
        assert_eq!(s.lower(), &[0.0]);
        assert_eq!(s.upper(), &[8.0]);
    }

    #[test]
    fn infinite_bounds_survive() {
        let p = one_by_one(1.0, 3.0, 1.0, -INF, INF);
        let s = apply_scaling(&p, &ScalingInfo { row_scale: vec![2.0], col_scale: vec![0.5] });
        assert_eq!(s.lower(), &[-INF]);
        assert_eq!(s.upper(), &[INF]);
    }
}
