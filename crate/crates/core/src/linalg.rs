//! Small dense tensors and metric inversion.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{GeomError, Result};
use crate::jet::Jet;

/// Inverse of a symmetric positive definite matrix.
///
/// Fails with [`GeomError::DegenerateMetric`] (reporting the smallest
/// eigenvalue) when the input is not positive definite.
pub fn metric_inverse(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = g.nrows();
    if n != g.ncols() {
        return Err(GeomError::Dimension {
            expected: n,
            found: g.ncols(),
        });
    }
    let degenerate = || GeomError::DegenerateMetric {
        min_eigenvalue: smallest_eigenvalue(g),
    };
    let chol = nalgebra::Cholesky::new(g.clone()).ok_or_else(degenerate)?;
    if chol.l_dirty().diagonal().iter().any(|d| !(*d > 0.0)) {
        return Err(degenerate());
    }
    let mut inv = chol.inverse();
    // symmetrize away roundoff
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (inv[(i, j)] + inv[(j, i)]);
            inv[(i, j)] = m;
            inv[(j, i)] = m;
        }
    }
    Ok(inv)
}

pub fn smallest_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = 0.5 * (m + m.transpose());
    SymmetricEigen::new(sym).eigenvalues.min()
}

/// Rank-3 array over `n` values per index, `data[(a*n + b)*n + c]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(n: usize) -> Self {
        Tensor3 {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    t.data[(a * n + b) * n + c] = f(a, b, c);
                }
            }
        }
        t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[(a * self.n + b) * self.n + c]
    }

    pub fn set(&mut self, a: usize, b: usize, c: usize, v: f64) {
        self.data[(a * self.n + b) * self.n + c] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Tensor3) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Nested `[a][b][c]` vectors, for serialization.
    pub fn to_nested(&self) -> Vec<Vec<Vec<f64>>> {
        let n = self.n;
        (0..n)
            .map(|a| (0..n).map(|b| (0..n).map(|c| self.get(a, b, c)).collect()).collect())
            .collect()
    }
}

/// Rank-4 array, `data[((a*n + b)*n + c)*n + d]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor4 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Tensor4 {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        t.data[((a * n + b) * n + c) * n + d] = f(a, b, c, d);
                    }
                }
            }
        }
        t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let n = self.n;
        self.data[((a * n + b) * n + c) * n + d]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Tensor4) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<Vec<f64>>>> {
        let n = self.n;
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| (0..n).map(|c| (0..n).map(|d| self.get(a, b, c, d)).collect()).collect())
                    .collect()
            })
            .collect()
    }
}

/// Row-major `n × n` matrix of jets.
pub(crate) fn jet_matmul(n: usize, a: &[Jet], b: &[Jet]) -> Vec<Jet> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = a[i * n] * b[j];
            for k in 1..n {
                acc += a[i * n + k] * b[k * n + j];
            }
            out.push(acc);
        }
    }
    out
}

/// Jet of the inverse of a symmetric positive definite jet matrix.
///
/// With `g = G₀ + E` (E without constant term, nilpotent under truncation),
/// `g⁻¹ = Σ_m (-G₀⁻¹E)^m G₀⁻¹` terminates after `order` terms.
pub(crate) fn jet_inverse(n: usize, g: &[Jet]) -> Result<Vec<Jet>> {
    let nvars = g[0].nvars();
    let order = g.iter().map(|j| j.order()).min().unwrap_or(0);
    let g0 = DMatrix::from_fn(n, n, |i, j| g[i * n + j].value());
    let inv0 = metric_inverse(&g0)?;
    let inv0_jets: Vec<Jet> = (0..n * n)
        .map(|k| Jet::constant(nvars, order, inv0[(k / n, k % n)]))
        .collect();
    let e: Vec<Jet> = g
        .iter()
        .map(|j| {
            let t = j.truncate(order);
            t - t.lift(t.value())
        })
        .collect();
    let m: Vec<Jet> = jet_matmul(n, &inv0_jets, &e).into_iter().map(|j| -j).collect();
    let mut term = inv0_jets.clone();
    let mut acc = inv0_jets;
    for _ in 0..order {
        term = jet_matmul(n, &m, &term);
        for (a, t) in acc.iter_mut().zip(&term) {
            *a += *t;
        }
    }
    Ok(acc)
}
