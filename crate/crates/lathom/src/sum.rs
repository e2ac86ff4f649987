//! Deterministic reductions.
//!
//! Energy assembly may run in parallel; results must not depend on the worker
//! count. Partial sums are always formed over fixed index chunks and combined
//! pairwise in chunk order, so a sum is a pure function of the addend sequence.

use crate::scalar::Scalar;
use rayon::prelude::*;

/// Chunk length for parallel reductions. Fixed so that the reduction tree does
/// not depend on the number of threads.
pub const CHUNK: usize = 4096;

/// Pairwise (cascade) summation of a slice.
pub fn pairwise<S: Scalar>(xs: &[S]) -> S {
    match xs.len() {
        0 => S::zero(),
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise(&xs[..mid]) + pairwise(&xs[mid..])
        }
    }
}

/// Sums `f(i)` for `i in 0..n` with a deterministic parallel pairwise tree.
pub fn sum_indexed<S: Scalar>(n: usize, f: impl Fn(usize) -> S + Sync) -> S {
    if n == 0 {
        return S::zero();
    }
    if n <= CHUNK {
        let terms: Vec<S> = (0..n).map(&f).collect();
        return pairwise(&terms);
    }
    let nchunks = n.div_ceil(CHUNK);
    let partials: Vec<S> = (0..nchunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            let terms: Vec<S> = (lo..hi).map(&f).collect();
            pairwise(&terms)
        })
        .collect();
    pairwise(&partials)
}
