//! Order-preserving map over independent work items, data-parallel with the
//! `parallel` feature and sequential otherwise.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    /// Uses the current rayon pool; sequential when built without `parallel`.
    #[default]
    Parallel,
}

/// `items.map(f)` with results in input order.
pub fn map_collect<T, R, F>(exec: Exec, items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    match exec {
        Exec::Sequential => items.into_iter().map(f).collect(),
        Exec::Parallel => parallel_map(items, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
where
    F: Fn(T) -> R,
{
    items.into_iter().map(f).collect()
}

/// Runs `f` inside a pool of `threads` workers, or the global pool for `None`.
#[cfg(feature = "parallel")]
pub fn with_threads<R: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> R + Send,
) -> crate::Result<R> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| crate::Error::Config(format!("cannot start thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_threads<R: Send>(
    _threads: Option<usize>,
    f: impl FnOnce() -> R + Send,
) -> crate::Result<R> {
    Ok(f())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let items: Vec<u64> = (0..200).collect();
        let seq = map_collect(Exec::Sequential, items.clone(), |x| x * x);
        let par = map_collect(Exec::Parallel, items, |x| x * x);
        assert_eq!(seq, par);
        assert_eq!(seq[13], 169);
    }

    #[test]
    fn pool_size_is_honoured() {
        let out = with_threads(Some(2), || {
            map_collect(Exec::Parallel, vec![1, 2, 3], |x| x + 1)
        })
        .unwrap();
        assert_eq!(out, vec![2, 3, 4]);
    }
}
