use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, Exec};
use crate::lp_model::SparseMatrix;

/// Power iteration on `KᵀK` for the largest singular value of `K`.
///
/// Returns `‖Kv‖` for the final unit vector `v`, which never exceeds the true
/// norm. An all-zero matrix yields 0.
pub fn estimate_op_norm(k: &SparseMatrix, iters: usize, seed: u64) -> f64 {
    estimate_op_norm_with(k, iters, seed, Exec::Sequential)
}

pub fn estimate_op_norm_with(k: &SparseMatrix, iters: usize, seed: u64, exec: Exec) -> f64 {
    assert!(iters >= 1, "power iteration needs at least one step");
    if k.nnz() == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..k.n_cols()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let nv = linalg::norm2(exec, &v);
    v.iter_mut().for_each(|e| *e /= nv);
    let mut w = vec![0.0; k.n_rows()];
    let mut est = 0.0;
    for _ in 0..iters {
        k.mul_vec_into(exec, &v, &mut w);
        est = linalg::norm2(exec, &w);
        k.mul_transpose_vec_into(exec, &w, &mut v);
        let nv = linalg::norm2(exec, &v);
        if nv == 0.0 {
            return est;
        }
        v.iter_mut().for_each(|e| *e /= nv);
    }
    k.mul_vec_into(exec, &v, &mut w);
    est.max(linalg::norm2(exec, &w))
}
