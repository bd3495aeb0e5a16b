//! Data-parallel map helpers with a sequential fallback.
//!
//! Batch verifiers, the SNF suite, quotient-window distance passes and
//! per-radius ends counts all funnel through [`map_indexed`], so the
//! `parallel` feature toggles one code path. Results are returned in input
//! order regardless of scheduling, which keeps every report deterministic.

/// Maps `f(index, item)` over `items`, preserving order. Parallel when the
/// `parallel` feature is enabled; plain iteration otherwise.
#[cfg(feature = "parallel")]
pub fn map_indexed<T: Sync, U: Send>(
    items: &[T],
    f: impl Fn(usize, &T) -> U + Sync + Send,
) -> Vec<U> {
    use rayon::prelude::*;
    items.par_iter().enumerate().map(|(i, x)| f(i, x)).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, U>(items: &[T], f: impl Fn(usize, &T) -> U) -> Vec<U> {
    items.iter().enumerate().map(|(i, x)| f(i, x)).collect()
}

/// Sequential map, always. Benches compare this against [`map_indexed`].
pub fn map_seq<T, U>(items: &[T], f: impl Fn(usize, &T) -> U) -> Vec<U> {
    items.iter().enumerate().map(|(i, x)| f(i, x)).collect()
}

/// Maps over indices 0..n, preserving order.
#[cfg(feature = "parallel")]
pub fn map_range<U: Send>(n: usize, f: impl Fn(usize) -> U + Sync + Send) -> Vec<U> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_range<U>(n: usize, f: impl Fn(usize) -> U) -> Vec<U> {
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let items: Vec<u64> = (0..1000).collect();
        let doubled = map_indexed(&items, |_, x| x * 2);
        let doubled_seq = map_seq(&items, |_, x| x * 2);
        assert_eq!(doubled, doubled_seq);
        assert_eq!(doubled[499], 998);
        let squares = map_range(100, |i| i * i);
        assert_eq!(squares[9], 81);
    }
}
