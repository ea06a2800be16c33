//! Perron-Frobenius data for nonnegative integer matrices.

use num_traits::Float;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PerronError {
    #[error("matrix is not irreducible")]
    NotIrreducible,
    #[error("power iteration did not converge in {0} steps")]
    NotConverged(usize),
}

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_MAX_ITERATIONS: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub struct PerronData<T> {
    pub lambda: T,
    /// Positive right eigenvector normalized to maximum entry 1.
    pub vector: Vec<T>,
    /// Collatz-Wielandt bracket around `lambda`.
    pub lower: T,
    pub upper: T,
    pub iterations: usize,
}

/// Boolean reachability closure; `reach[i][j]` iff some positive power has a
/// nonzero `(i, j)` entry.
pub fn reachability(m: &[Vec<u64>]) -> Vec<Vec<bool>> {
    let n = m.len();
    let mut r: Vec<Vec<bool>> = m
        .iter()
        .map(|row| row.iter().map(|x| *x > 0).collect())
        .collect();
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r
}

pub fn is_irreducible(m: &[Vec<u64>]) -> bool {
    !m.is_empty() && reachability(m).iter().all(|row| row.iter().all(|x| *x))
}

pub fn is_zero(m: &[Vec<u64>]) -> bool {
    m.iter().all(|row| row.iter().all(|x| *x == 0))
}

/// Every row and every column holds a single 1 and zeros elsewhere.
pub fn is_permutation(m: &[Vec<u64>]) -> bool {
    let n = m.len();
    let rows = m.iter().all(|row| row.iter().sum::<u64>() == 1);
    let cols = (0..n).all(|j| m.iter().map(|row| row[j]).sum::<u64>() == 1);
    rows && cols
}

fn bool_mul(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = a.len();
    let mut c = vec![vec![false; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] {
                for j in 0..n {
                    c[i][j] |= b[k][j];
                }
            }
        }
    }
    c
}

/// Least `p` with `M^p` positive, searched up to the Wielandt bound
/// `(n-1)^2 + 1`. `None` means the matrix is not primitive.
pub fn primitivity_exponent(m: &[Vec<u64>]) -> Option<usize> {
    let n = m.len();
    if n == 0 {
        return None;
    }
    let base: Vec<Vec<bool>> = m
        .iter()
        .map(|row| row.iter().map(|x| *x > 0).collect())
        .collect();
    let mut pow = base.clone();
    let bound = (n - 1) * (n - 1) + 1;
    for p in 1..=bound {
        if pow.iter().all(|row| row.iter().all(|x| *x)) {
            return Some(p);
        }
        pow = bool_mul(&pow, &base);
    }
    None
}

/// Tolerance reachable in the scalar type: `1e-9` unless the type is too coarse.
pub fn default_tolerance<T: Float>(m: &[Vec<u64>]) -> T {
    let scale = m
        .iter()
        .map(|row| row.iter().sum::<u64>())
        .max()
        .unwrap_or(1) as f64
        + 1.0;
    let floor = T::epsilon() * T::from(64.0 * scale).unwrap();
    T::from(DEFAULT_TOLERANCE).unwrap().max(floor)
}

/// Power iteration on `M + I` (the shift makes periodic matrices converge),
/// starting from the all-ones vector and stopping once the Collatz-Wielandt
/// bracket is narrower than `tol`. Permutation matrices are answered exactly.
pub fn perron<T: Float>(
    m: &[Vec<u64>],
    tol: T,
    max_iter: usize,
) -> Result<PerronData<T>, PerronError> {
    if !is_irreducible(m) {
        return Err(PerronError::NotIrreducible);
    }
    let n = m.len();
    if is_permutation(m) {
        return Ok(PerronData {
            lambda: T::one(),
            vector: vec![T::one(); n],
            lower: T::one(),
            upper: T::one(),
            iterations: 0,
        });
    }
    let a: Vec<Vec<T>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| T::from(m[i][j]).unwrap() + if i == j { T::one() } else { T::zero() })
                .collect()
        })
        .collect();
    let mut v = vec![T::one(); n];
    for it in 1..=max_iter {
        let w: Vec<T> = a
            .iter()
            .map(|row| row.iter().zip(&v).fold(T::zero(), |s, (x, y)| s + *x * *y))
            .collect();
        let mut lo = T::infinity();
        let mut hi = T::zero();
        for i in 0..n {
            let r = w[i] / v[i];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        let top = w.iter().fold(T::zero(), |s, x| s.max(*x));
        v = w.iter().map(|x| *x / top).collect();
        if hi - lo <= tol {
            let two = T::one() + T::one();
            return Ok(PerronData {
                lambda: (lo + hi) / two - T::one(),
                vector: v,
                lower: lo - T::one(),
                upper: hi - T::one(),
                iterations: it,
            });
        }
    }
    Err(PerronError::NotConverged(max_iter))
}

pub fn pf_eigenvalue<T: Float>(m: &[Vec<u64>]) -> Result<T, PerronError> {
    perron(m, default_tolerance::<T>(m), DEFAULT_MAX_ITERATIONS).map(|d| d.lambda)
}
