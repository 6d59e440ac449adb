//! Data-parallel kernels with a sequential fallback. The `parallel` feature
//! (on by default) routes the hot reductions through rayon; without it the
//! same entry points run the sequential code. The explicitly sequential
//! variants stay available so benchmarks can compare both paths in one build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `items` and fold the outputs with `combine`, starting from
/// `identity()`. Outputs must combine associatively.
pub fn map_reduce<T, U, F, C, I>(items: &[T], f: F, identity: I, combine: C) -> U
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync,
    C: Fn(U, U) -> U + Sync + Send,
    I: Fn() -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items
            .par_iter()
            .map(&f)
            .reduce(&identity, &combine)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_reduce_seq(items, f, identity, combine)
    }
}

/// Sequential twin of [`map_reduce`].
pub fn map_reduce_seq<T, U, F, C, I>(items: &[T], f: F, identity: I, combine: C) -> U
where
    F: Fn(&T) -> U,
    C: Fn(U, U) -> U,
    I: Fn() -> U,
{
    items.iter().map(f).fold(identity(), combine)
}

/// Fallible map-reduce: the first error wins.
pub fn try_map_reduce<T, U, E, F, C, I>(
    items: &[T],
    f: F,
    identity: I,
    combine: C,
) -> Result<U, E>
where
    T: Sync,
    U: Send,
    E: Send,
    F: Fn(&T) -> Result<U, E> + Sync,
    C: Fn(U, U) -> U + Sync + Send,
    I: Fn() -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items
            .par_iter()
            .map(&f)
            .try_reduce(&identity, |a, b| Ok(combine(a, b)))
    }
    #[cfg(not(feature = "parallel"))]
    {
        try_map_reduce_seq(items, f, identity, combine)
    }
}

/// Sequential twin of [`try_map_reduce`].
pub fn try_map_reduce_seq<T, U, E, F, C, I>(
    items: &[T],
    f: F,
    identity: I,
    combine: C,
) -> Result<U, E>
where
    F: Fn(&T) -> Result<U, E>,
    C: Fn(U, U) -> U,
    I: Fn() -> U,
{
    let mut acc = identity();
    for item in items {
        acc = combine(acc, f(item)?);
    }
    Ok(acc)
}
