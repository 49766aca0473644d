//! Index-space search, data-parallel with the `parallel` feature.

/// Smallest index in `0..total` satisfying `pred`.
#[cfg(feature = "parallel")]
pub fn find_first<F>(total: u64, pred: F) -> Option<u64>
where
    F: Fn(u64) -> bool + Sync + Send,
{
    use rayon::prelude::*;
    (0..total).into_par_iter().find_first(|&i| pred(i))
}

#[cfg(not(feature = "parallel"))]
pub fn find_first<F>(total: u64, pred: F) -> Option<u64>
where
    F: Fn(u64) -> bool + Sync + Send,
{
    find_first_sequential(total, pred)
}

/// Sequential reference path, always available.
pub fn find_first_sequential<F>(total: u64, pred: F) -> Option<u64>
where
    F: Fn(u64) -> bool,
{
    (0..total).find(|&i| pred(i))
}

/// Maps `f` over `items`, preserving order.
#[cfg(feature = "parallel")]
pub fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_index_is_deterministic() {
        assert_eq!(find_first(1000, |i| i % 7 == 3 && i > 100), Some(101));
        assert_eq!(find_first_sequential(1000, |i| i % 7 == 3 && i > 100), Some(101));
        assert_eq!(find_first(10, |_| false), None);
    }
}
