//! Ordered data-parallel map over Monte-Carlo work items.
//!
//! Results always come back in input order, so reductions over them are
//! deterministic regardless of the worker count.

/// Which executor a batch runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Rayon's global pool when the `parallel` feature is on, otherwise sequential.
    #[default]
    Auto,
    Sequential,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Auto
    }
}

pub fn map_ordered<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if exec == Execution::Auto {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Same as [`map_ordered`] over the index range `0..n`.
pub fn map_range<R, F>(n: usize, exec: Execution, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    let idx: Vec<usize> = (0..n).collect();
    map_ordered(&idx, exec, |&i| f(i))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let a = map_range(100, Execution::Auto, |i| i * i);
        let b = map_range(100, Execution::Sequential, |i| i * i);
        assert_eq!(a, b);
        assert_eq!(a[7], 49);
    }
}
