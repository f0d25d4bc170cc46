//! Serial/parallel dispatch for the data-parallel inner loops.
//!
//! Every parallel path maps independent indices to independent results and
//! collects them in index order, so serial and parallel execution produce
//! bit-identical output. Without the `parallel` feature, [`Exec::Parallel`]
//! silently runs serially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Serial,
    #[default]
    Parallel,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// `(0..len).map(f).collect()`, possibly in parallel.
    pub fn map<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..len).into_par_iter().map(f).collect();
        }
        (0..len).map(f).collect()
    }

    /// Like [`Exec::map`] with a per-worker scratch value built by `init`.
    pub fn map_with_scratch<S, T, I, F>(self, len: usize, init: I, f: F) -> Vec<T>
    where
        T: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..len).into_par_iter().map_init(&init, |s, i| f(s, i)).collect();
        }
        let mut scratch = init();
        (0..len).map(|i| f(&mut scratch, i)).collect()
    }

    /// Writes `f(i)` into `out[i]` for every index.
    pub fn fill<T, F>(self, out: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            out.par_iter_mut().enumerate().for_each(|(i, v)| *v = f(i));
            return;
        }
        for (i, v) in out.iter_mut().enumerate() {
            *v = f(i);
        }
    }
}
