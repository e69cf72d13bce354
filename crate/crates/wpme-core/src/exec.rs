//! Execution strategy for per-node kernels.
//!
//! Every hot loop in the crate is a *map*: node `i` of the output depends
//! only on the input fields, never on other output nodes. Such maps are
//! safe to run in parallel and — because each element is written to its
//! own index — produce bit-identical results regardless of thread count.
//!
//! Reductions (integrals, min/argmin scans) are deliberately **not**
//! parallelised: floating-point addition is order-sensitive, and the crate
//! promises deterministic output. They stay sequential in `ops`.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Grids smaller than this run sequentially even with the `parallel`
/// feature enabled; below it the pool dispatch overhead dominates the
/// stencil work.
pub const PAR_MIN_NODES: usize = 4096;

/// Map `f` over `0..n`, collecting results in index order.
///
/// Dispatches to rayon when the `parallel` feature is enabled and the grid
/// is large enough to amortise the fork/join overhead; otherwise runs the
/// plain sequential loop. Both paths yield identical bits.
#[inline]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if n >= PAR_MIN_NODES {
        return (0..n).into_par_iter().map(f).collect();
    }
    map_indexed_seq(n, f)
}

/// Always-sequential variant of [`map_indexed`]; this is the fallback used
/// when the `parallel` feature is disabled, and the baseline the benchmark
/// suite compares against.
#[inline]
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Force the rayon path regardless of grid size. Only compiled with the
/// `parallel` feature; exists so benchmarks can compare both strategies on
/// the same grid inside one binary.
#[cfg(feature = "parallel")]
#[inline]
pub fn map_indexed_par<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_and_dispatched_agree_bitwise() {
        let n = PAR_MIN_NODES + 17; // force the parallel path when enabled
        let f = |i: usize| (i as f64).sin() * 1.0e3 + (i as f64).sqrt();
        let a = map_indexed_seq(n, f);
        let b = map_indexed(n, f);
        assert_eq!(a.len(), b.len());
        for i in 0..n {
            assert_eq!(a[i].to_bits(), b[i].to_bits(), "node {i}");
        }
    }
}
