use serde_json::{Map, Value};

use crate::{Error, Result};

/// Order-preserving map, parallel when the `parallel` feature is on.
#[cfg(feature = "parallel")]
pub(crate) fn ordered_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn ordered_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Rejects any key of `obj` that is not in `allowed`, naming all of them.
pub(crate) fn check_keys(obj: &Map<String, Value>, allowed: &[&str]) -> Result<()> {
    let unknown: Vec<String> = obj
        .keys()
        .filter(|k| !allowed.contains(&k.as_str()))
        .cloned()
        .collect();
    if unknown.is_empty() {
        Ok(())
    } else {
        Err(Error::UnknownKeys(unknown))
    }
}

/// `(1 - p)^k` evaluated as `exp(k * ln(1 - p))`.
pub(crate) fn pow_complement(p: f64, k: f64) -> f64 {
    if k == 0.0 {
        1.0
    } else {
        (k * (-p).ln_1p()).exp()
    }
}
