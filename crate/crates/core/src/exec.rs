//! Parallel/sequential execution switch.
//!
//! With the `parallel` feature, [`Execution::Parallel`] runs loops on the
//! rayon pool. Without it, both variants run sequentially. Loop bodies are
//! write-disjoint and reductions are done in index order, so output never
//! depends on the mode or the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Serial,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Serial
        }
    }
}

impl Execution {
    /// `f(i)` for every `i` in `0..n`, collected in index order.
    pub fn map_range<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    /// Like [`map_range`](Self::map_range) with a per-worker scratch value.
    pub fn map_range_init<S, T, I, F>(self, n: usize, init: I, f: F) -> Vec<T>
    where
        T: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..n).into_par_iter().map_init(init, f).collect(),
            _ => {
                let mut scratch = init();
                (0..n).map(|i| f(&mut scratch, i)).collect()
            }
        }
    }

    /// `f(i, &mut items[i])` for every element.
    pub fn for_each_mut<T, F>(self, items: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize, &mut T) + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => items
                .par_iter_mut()
                .enumerate()
                .for_each(|(i, x)| f(i, x)),
            _ => items.iter_mut().enumerate().for_each(|(i, x)| f(i, x)),
        }
    }
}

/// Sizes the global rayon pool. A no-op without the `parallel` feature.
pub fn configure_threads(threads: usize) -> Result<(), String> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| e.to_string())
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        Ok(())
    }
}
