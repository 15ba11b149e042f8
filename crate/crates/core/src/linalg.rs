//! Dense vector kernels shared by the solver.
//!
//! Every reduction is computed as a sum of fixed-size chunk partials, added
//! in chunk order. The sequential and parallel paths therefore produce
//! bit-identical results for any thread count.

use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length used for all reductions.
pub const REDUCE_CHUNK: usize = 2048;

#[cfg(feature = "parallel")]
/// Below this length the parallel path is skipped; rayon overhead dominates.
const PAR_MIN_LEN: usize = 8192;

/// Execution mode for the data-parallel kernels.
///
/// Without the `parallel` feature, `Parallel` silently runs sequentially.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    #[cfg(feature = "parallel")]
    #[inline]
    pub(crate) fn use_parallel(self, len: usize) -> bool {
        self == Exec::Parallel && len >= PAR_MIN_LEN
    }
}

fn chunked_sum<F>(exec: Exec, len: usize, partial: F) -> f64
where
    F: Fn(std::ops::Range<usize>) -> f64 + Sync + Send,
{
    let n_chunks = len.div_ceil(REDUCE_CHUNK);
    let range = |c: usize| c * REDUCE_CHUNK..((c + 1) * REDUCE_CHUNK).min(len);
    #[cfg(feature = "parallel")]
    if exec.use_parallel(len) {
        let partials: Vec<f64> = (0..n_chunks).into_par_iter().map(|c| partial(range(c))).collect();
        return partials.iter().sum();
    }
    let _ = exec;
    (0..n_chunks).map(|c| partial(range(c))).sum()
}

pub fn dot(exec: Exec, a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    chunked_sum(exec, a.len(), |r| a[r.clone()].iter().zip(&b[r]).map(|(x, y)| x * y).sum())
}

pub fn norm2_sq(exec: Exec, a: &[f64]) -> f64 {
    chunked_sum(exec, a.len(), |r| a[r].iter().map(|x| x * x).sum())
}

pub fn norm2(exec: Exec, a: &[f64]) -> f64 {
    norm2_sq(exec, a).sqrt()
}

/// ‖a − b‖₂
pub fn dist2(exec: Exec, a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    chunked_sum(exec, a.len(), |r| {
        a[r.clone()].iter().zip(&b[r]).map(|(x, y)| (x - y) * (x - y)).sum()
    })
    .sqrt()
}

/// Applies `f(i, &mut out[i])` to every element, in parallel when allowed.
pub(crate) fn for_each_indexed<F>(exec: Exec, out: &mut [f64], f: F)
where
    F: Fn(usize, &mut f64) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.use_parallel(out.len()) {
        out.par_chunks_mut(REDUCE_CHUNK).enumerate().for_each(|(c, chunk)| {
            let base = c * REDUCE_CHUNK;
            for (j, v) in chunk.iter_mut().enumerate() {
                f(base + j, v);
            }
        });
        return;
    }
    let _ = exec;
    for (i, v) in out.iter_mut().enumerate() {
        f(i, v);
    }
}

/// Projection onto `[lo, hi]` that propagates NaN instead of hiding it.
#[inline]
pub fn clamp_nan(v: f64, lo: f64, hi: f64) -> f64 {
    if v < lo {
        lo
    } else if v > hi {
        hi
    } else {
        v
    }
}

pub fn has_nan(v: &[f64]) -> bool {
    v.iter().any(|x| !x.is_finite())
}
