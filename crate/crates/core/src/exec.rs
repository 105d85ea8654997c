//! Index-ordered parallel maps.
//!
//! Work item `i` always receives the same inputs and its output always lands
//! in slot `i`, so the thread count cannot change any result.

use alloc::vec::Vec;

use crate::error::{Error, Result};

#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Like [`map_indexed`]; on failure reports the lowest failing index.
pub fn try_map_indexed<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let results = map_indexed(n, f);
    let mut out = Vec::with_capacity(n);
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => out.push(v),
            Err(e @ Error::InReplica { .. }) => return Err(e),
            Err(e) => return Err(e.in_replica(i)),
        }
    }
    Ok(out)
}
