//! Data-parallel fan-out with a sequential fallback.
//!
//! Work is always split into the same independent units (one per community,
//! metric or grid chunk) and every unit reduces sequentially, so both
//! policies return bit-identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        return Execution::Parallel;
        #[cfg(not(feature = "parallel"))]
        return Execution::Sequential;
    }
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        self != Execution::Sequential
    }

    /// `items.iter().map(f).collect()`, order preserved.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Execution::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().map(f).collect(),
        }
    }

    /// Fill `out` by chunks of `chunk` elements; `f` gets the chunk's start offset.
    pub fn fill_chunks<R, F>(self, out: &mut [R], chunk: usize, f: F)
    where
        R: Send,
        F: Fn(usize, &mut [R]) + Sync + Send,
    {
        let chunk = chunk.max(1);
        match self {
            Execution::Sequential => out
                .chunks_mut(chunk)
                .enumerate()
                .for_each(|(i, c)| f(i * chunk, c)),
            #[cfg(feature = "parallel")]
            Execution::Parallel => out
                .par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(i, c)| f(i * chunk, c)),
        }
    }
}
