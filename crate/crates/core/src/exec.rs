//! Sequential or data-parallel execution of independent jobs.
//!
//! With the `parallel` feature off, [`Execution::Parallel`] quietly runs
//! sequentially; results are identical and in input order either way.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether jobs will actually be spread over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

pub fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Index and result of the first item (in input order) for which `f`
/// returns `Some`.
pub fn find_first<T, R, F>(exec: Execution, items: &[T], f: F) -> Option<(usize, R)>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Option<R> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items
            .par_iter()
            .enumerate()
            .find_map_first(|(i, x)| f(x).map(|r| (i, r)));
    }
    let _ = exec;
    items.iter().enumerate().find_map(|(i, x)| f(x).map(|r| (i, r)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree() {
        let xs: Vec<u32> = (0..1000).collect();
        let seq = map(Execution::Sequential, &xs, |x| x * 3);
        let par = map(Execution::Parallel, &xs, |x| x * 3);
        assert_eq!(seq, par);
        let pick = |x: &u32| (x % 97 == 96).then_some(*x);
        assert_eq!(find_first(Execution::Sequential, &xs, pick), Some((96, 96)));
        assert_eq!(find_first(Execution::Parallel, &xs, pick), Some((96, 96)));
    }
}
