//! Order-preserving map helpers that use rayon when the `parallel` feature
//! is enabled and plain iterators otherwise. Only pure computations go
//! through here, so parallel and sequential builds produce identical
//! results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this length the rayon overhead outweighs the work.
#[cfg(feature = "parallel")]
const MIN_PAR_LEN: usize = 64;

#[cfg(feature = "parallel")]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if items.len() >= MIN_PAR_LEN {
        items.par_iter().map(f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}
