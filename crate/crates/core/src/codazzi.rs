//! Codazzi residuals, generalized eigenstructure of T against g, and the
//! Ricci commutation check.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chart::{Grid, Point};
use crate::curvature::cov_deriv_sym2;
use crate::diff::DiffScheme;
use crate::error::{GeomError, Result};
use crate::field::{MetricField, Sym2Field};
use crate::linalg::{smallest_eigenvalue, Tensor3};

/// max / mean / argmax of a nonnegative quantity over a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepStats {
    pub max: f64,
    pub mean: f64,
    pub argmax: Option<Point>,
    pub argmax_index: Option<usize>,
    pub count: usize,
}

impl SweepStats {
    /// Reduce per-point values in grid order; the first maximum wins ties.
    /// NaN counts as the largest possible value.
    pub fn from_values(points: &[Point], values: &[f64]) -> Self {
        let mut max = f64::NEG_INFINITY;
        let mut idx = None;
        let mut sum = 0.0;
        for (i, &v) in values.iter().enumerate() {
            let v = if v.is_nan() { f64::INFINITY } else { v };
            if idx.is_none() || v > max {
                max = v;
                idx = Some(i);
            }
            sum += v;
        }
        let count = values.len();
        SweepStats {
            max: if count == 0 { 0.0 } else { max },
            mean: if count == 0 { 0.0 } else { sum / count as f64 },
            argmax: idx.map(|i| points[i].clone()),
            argmax_index: idx,
            count,
        }
    }

    /// Combine two sweeps as if their grids were concatenated.
    pub fn merge(self, other: SweepStats) -> SweepStats {
        if other.count == 0 {
            return self;
        }
        if self.count == 0 {
            return other;
        }
        let count = self.count + other.count;
        let mean = (self.mean * self.count as f64 + other.mean * other.count as f64) / count as f64;
        let (max, argmax, argmax_index) = if other.max > self.max {
            (other.max, other.argmax, other.argmax_index.map(|i| i + self.count))
        } else {
            (self.max, self.argmax, self.argmax_index)
        };
        SweepStats {
            max,
            mean,
            argmax,
            argmax_index,
            count,
        }
    }
}

/// Evaluate `f` at every grid point in parallel; results keep grid order.
pub fn sweep_map<T: Send>(points: &[Point], f: impl Fn(&Point) -> Result<T> + Sync) -> Result<Vec<T>> {
    points.par_iter().map(&f).collect()
}

pub fn sweep(points: &[Point], f: impl Fn(&Point) -> Result<f64> + Sync) -> Result<SweepStats> {
    let values = sweep_map(points, f)?;
    Ok(SweepStats::from_values(points, &values))
}

/// `C_kij = ∇_k T_ij − ∇_j T_ik` at one point.
#[derive(Clone, Debug)]
pub struct CodazziResidual {
    pub point: Point,
    /// `C_kij` at `get(k, i, j)`.
    pub c: Tensor3,
    pub norm: f64,
}

pub fn codazzi_from_nabla(point: &Point, nabla: &Tensor3) -> CodazziResidual {
    let c = Tensor3::from_fn(nabla.n(), |k, i, j| nabla.get(k, i, j) - nabla.get(j, i, k));
    let norm = c.max_abs();
    CodazziResidual {
        point: point.clone(),
        c,
        norm,
    }
}

pub fn codazzi_deviation(t: &Sym2Field, g: &MetricField, p: &Point, scheme: &DiffScheme) -> Result<CodazziResidual> {
    let nabla = cov_deriv_sym2(t, g, p, scheme)?;
    Ok(codazzi_from_nabla(p, &nabla))
}

pub fn max_codazzi_residual(t: &Sym2Field, g: &MetricField, grid: &Grid, scheme: &DiffScheme) -> Result<SweepStats> {
    if grid.is_empty() {
        return Err(GeomError::Config("empty grid".into()));
    }
    sweep(grid.points(), |p| Ok(codazzi_deviation(t, g, p, scheme)?.norm))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClusterTol {
    pub absolute: f64,
    pub relative: f64,
}

impl Default for ClusterTol {
    fn default() -> Self {
        ClusterTol {
            absolute: 1e-6,
            relative: 1e-8,
        }
    }
}

/// The (1, n−1) pattern: a simple eigenvalue ρ and an (n−1)-fold σ.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoValue {
    pub rho: f64,
    pub sigma: f64,
    /// g-unit eigenvector of ρ.
    pub rho_vector: DVector<f64>,
}

#[derive(Clone, Debug)]
pub struct EigenStructure {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Cluster index of each eigenvalue.
    pub clusters: Vec<usize>,
    /// Mean eigenvalue of each cluster.
    pub cluster_values: Vec<f64>,
    pub multiplicities: Vec<usize>,
    /// g-orthonormal eigenvectors as columns, same order as `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
    pub tolerance: ClusterTol,
    pub two_value: Option<TwoValue>,
}

impl EigenStructure {
    pub fn pattern(&self) -> Vec<usize> {
        self.multiplicities.clone()
    }
}

/// Solve `T v = λ g v` via `g = L Lᵀ` and the symmetric problem for `L⁻¹ T L⁻ᵀ`.
pub fn generalized_eigenstructure(t: &DMatrix<f64>, g: &DMatrix<f64>, tol: ClusterTol) -> Result<EigenStructure> {
    let n = g.nrows();
    if t.nrows() != n || t.ncols() != n || g.ncols() != n {
        return Err(GeomError::Dimension {
            expected: n,
            found: t.nrows(),
        });
    }
    let chol = nalgebra::Cholesky::new(g.clone()).ok_or_else(|| GeomError::DegenerateMetric {
        min_eigenvalue: smallest_eigenvalue(g),
    })?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or(GeomError::DegenerateMetric { min_eigenvalue: 0.0 })?;
    let a = &l_inv * t * l_inv.transpose();
    let a = (&a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let back = l_inv.transpose();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let mut v = &back * eig.eigenvectors.column(i);
        let lead = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        if lead < 0.0 {
            v = -v;
        }
        vectors.set_column(col, &v);
    }

    let mut clusters = Vec::with_capacity(n);
    let mut members: Vec<Vec<f64>> = Vec::new();
    for (i, &lam) in eigenvalues.iter().enumerate() {
        let joins = i > 0 && {
            let prev = eigenvalues[i - 1];
            (lam - prev).abs() <= tol.absolute + tol.relative * lam.abs().max(prev.abs())
        };
        if !joins {
            members.push(Vec::new());
        }
        members.last_mut().unwrap().push(lam);
        clusters.push(members.len() - 1);
    }
    let cluster_values: Vec<f64> = members.iter().map(|m| m.iter().sum::<f64>() / m.len() as f64).collect();
    let multiplicities: Vec<usize> = members.iter().map(|m| m.len()).collect();

    let two_value = if n >= 3 && multiplicities.len() == 2 && multiplicities.contains(&1) {
        let rc = if multiplicities[0] == 1 { 0 } else { 1 };
        let col = clusters.iter().position(|&c| c == rc).unwrap();
        Some(TwoValue {
            rho: cluster_values[rc],
            sigma: cluster_values[1 - rc],
            rho_vector: vectors.column(col).into_owned(),
        })
    } else {
        None
    };

    Ok(EigenStructure {
        eigenvalues,
        clusters,
        cluster_values,
        multiplicities,
        eigenvectors: vectors,
        tolerance: tol,
        two_value,
    })
}

/// max-abs of `g^kl T_ik Ric_lj − g^kl Ric_ik T_lj`.
pub fn ricci_commutator_residual(t: &DMatrix<f64>, ric: &DMatrix<f64>, g_inv: &DMatrix<f64>) -> f64 {
    (t * g_inv * ric - ric * g_inv * t).amax()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{sample_grid, Axis, CoordinateBox};
    use crate::field::Formula;
    use crate::jet::Real;
    use proptest::prelude::*;

    struct Flat3;
    impl Formula for Flat3 {
        fn eval<R: Real>(&self, x: &[R]) -> Vec<R> {
            let o = x[0].lift(1.0);
            let z = x[0].lift(0.0);
            vec![o, z, z, z, o, z, z, z, o]
        }
    }

    /// Hessian of u = sin(x) e^y + x z³ on flat space.
    struct FlatHessian;
    impl Formula for FlatHessian {
        fn eval<R: Real>(&self, v: &[R]) -> Vec<R> {
            let (x, y, z) = (v[0], v[1], v[2]);
            let e = y.exp();
            let s = x.sin();
            let c = x.cos();
            let z2 = z * z;
            vec![-(s * e), c * e, z2 * 3.0, c * e, s * e, z.lift(0.0), z2 * 3.0, z.lift(0.0), x * z * 6.0]
        }
    }

    fn cube() -> CoordinateBox {
        CoordinateBox::new(vec![Axis::interval(-1.0, 1.0); 3]).unwrap()
    }

    #[test]
    fn metric_is_codazzi() {
        let g = MetricField::closed_form("flat", cube(), Flat3);
        let grid = sample_grid(&cube(), &[3, 3, 3], 0.2).unwrap();
        let s = max_codazzi_residual(&g.as_sym2(), &g, &grid, &DiffScheme::default()).unwrap();
        assert_eq!(s.max, 0.0);
        assert_eq!(s.mean, 0.0);
        assert_eq!(s.argmax_index, Some(0));
    }

    #[test]
    fn flat_hessian_is_codazzi_and_antisymmetric() {
        let g = MetricField::closed_form("flat", cube(), Flat3);
        let t = Sym2Field::closed_form("hess", cube(), FlatHessian);
        let p = Point::new(vec![0.3, -0.2, 0.5]).unwrap();
        let r = codazzi_deviation(&t, &g, &p, &DiffScheme::default()).unwrap();
        assert!(r.norm < 1e-14);
        let r = codazzi_deviation(&t, &g, &p, &DiffScheme::finite_differences()).unwrap();
        assert!(r.norm < 1e-8);
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    // exact, not approximate (0.0 and -0.0 compare equal)
                    assert_eq!(r.c.get(k, i, j), -r.c.get(j, i, k));
                }
                assert_eq!(r.c.get(k, i, k), 0.0);
            }
        }
    }

    #[test]
    fn eigen_identity_single_cluster() {
        let g = DMatrix::identity(3, 3);
        let e = generalized_eigenstructure(&g, &g, ClusterTol::default()).unwrap();
        assert_eq!(e.multiplicities, vec![3]);
        assert!((e.cluster_values[0] - 1.0).abs() < 1e-14);
        assert!(e.two_value.is_none());
    }

    #[test]
    fn eigen_two_value_pattern() {
        // T = diag(6/16, 4, 4) against g = diag(1/16, 2, 2): {6, 2, 2}
        let g = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0 / 16.0, 2.0, 2.0]));
        let t = DMatrix::from_diagonal(&DVector::from_vec(vec![6.0 / 16.0, 4.0, 4.0]));
        let e = generalized_eigenstructure(&t, &g, ClusterTol::default()).unwrap();
        assert_eq!(e.multiplicities, vec![2, 1]);
        let tv = e.two_value.unwrap();
        assert!((tv.rho - 6.0).abs() < 1e-12 && (tv.sigma - 2.0).abs() < 1e-12);
        assert!((tv.rho_vector[0] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn commutator_vanishes_for_multiples_of_g() {
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let gi = g.clone().try_inverse().unwrap();
        let ric = DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 3.0, -2.0]);
        assert!(ricci_commutator_residual(&(g.clone() * 3.0), &ric, &gi) < 1e-14);
        assert!(ricci_commutator_residual(&DMatrix::identity(2, 2), &ric, &gi) > 0.1);
    }

    #[test]
    fn stats_tie_break_and_merge() {
        let pts: Vec<Point> = (0..4).map(|i| Point::new(vec![i as f64]).unwrap()).collect();
        let s = SweepStats::from_values(&pts, &[1.0, 3.0, 3.0, 0.0]);
        assert_eq!(s.argmax_index, Some(1));
        assert_eq!(s.mean, 1.75);
        let t = SweepStats::from_values(&pts[..2], &[5.0, 1.0]);
        let m = s.merge(t);
        assert_eq!((m.max, m.argmax_index, m.count), (5.0, Some(4), 6));
    }

    fn spd(vals: &[f64]) -> DMatrix<f64> {
        let a = DMatrix::from_row_slice(3, 3, &vals[..9]);
        &a * a.transpose() + DMatrix::identity(3, 3)
    }

    proptest! {
        #[test]
        fn eigen_scales_with_t(vals in prop::collection::vec(-1.0f64..1.0, 18), c in 0.2f64..5.0) {
            let g = spd(&vals[..9]);
            let b = DMatrix::from_row_slice(3, 3, &vals[9..]);
            let t = &b + b.transpose();
            let e1 = generalized_eigenstructure(&t, &g, ClusterTol::default()).unwrap();
            let e2 = generalized_eigenstructure(&(&t * c), &g, ClusterTol::default()).unwrap();
            for (a, b) in e1.eigenvalues.iter().zip(&e2.eigenvalues) {
                prop_assert!((a * c - b).abs() <= 1e-9 * (1.0 + b.abs()));
            }
            prop_assert_eq!(&e1.multiplicities, &e2.multiplicities);
            // eigenpairs: T v = λ g v, vectors g-orthonormal
            let v = &e1.eigenvectors;
            let gram = v.transpose() * &g * v;
            prop_assert!((gram - DMatrix::identity(3, 3)).amax() < 1e-10);
            for (k, lam) in e1.eigenvalues.iter().enumerate() {
                let col = v.column(k);
                let r = &t * col - (&g * col) * *lam;
                prop_assert!(r.amax() < 1e-8);
            }
            // same vectors up to sign where eigenvalues are simple
            let gap = e1.eigenvalues.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
            if gap > 1e-3 {
                let v2 = &e2.eigenvectors;
                for k in 0..3 {
                    let d = (v.column(k) - v2.column(k)).amax().min((v.column(k) + v2.column(k)).amax());
                    prop_assert!(d < 1e-6);
                }
            }
        }
    }
}
