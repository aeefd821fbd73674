//! Pointwise curvature from metric jets.
//!
//! Convention: R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z,
//! R_ijkl = g(R(∂_i,∂_j)∂_k, ∂_l), Ric_jk = g^il R_ijkl (unit S³: Ric = 2g).

use nalgebra::DMatrix;

use crate::chart::Point;
use crate::diff::{field_jet, DiffScheme};
use crate::error::{GeomError, Result};
use crate::field::{MetricField, ScalarField, Sym2Field};
use crate::jet::Jet;
use crate::linalg::{jet_inverse, metric_inverse, Tensor3, Tensor4};

/// Metric jets with everything derivable from them at one point.
///
/// A metric jet of order K gives Γ to order K−1, Riemann and Ricci to
/// order K−2.
#[derive(Clone, Debug)]
pub struct JetGeometry {
    n: usize,
    order: usize,
    g: Vec<Jet>,
    g_inv: Vec<Jet>,
    gamma: Vec<Jet>,
}

impl JetGeometry {
    pub fn from_metric_jets(n: usize, g: Vec<Jet>) -> Result<Self> {
        if g.len() != n * n {
            return Err(GeomError::Dimension {
                expected: n * n,
                found: g.len(),
            });
        }
        let order = g.iter().map(|j| j.order()).min().unwrap_or(0);
        if order == 0 {
            return Err(GeomError::Config("metric jets of order ≥ 1 required".into()));
        }
        let g_inv = jet_inverse(n, &g)?;
        let dg: Vec<Jet> = (0..n)
            .flat_map(|a| g.iter().map(move |j| j.diff(a)))
            .collect();
        let d = |a: usize, b: usize, c: usize| dg[(a * n + b) * n + c];
        // Γ_{l,ij} = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
        let mut lower = Vec::with_capacity(n * n * n);
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    lower.push((d(i, j, l) + d(j, i, l) - d(l, i, j)) * 0.5);
                }
            }
        }
        let mut gamma = Vec::with_capacity(n * n * n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut acc = g_inv[k * n] * lower[i * n + j];
                    for l in 1..n {
                        acc += g_inv[k * n + l] * lower[(l * n + i) * n + j];
                    }
                    gamma.push(acc);
                }
            }
        }
        Ok(JetGeometry {
            n,
            order,
            g,
            g_inv,
            gamma,
        })
    }

    pub fn at(g: &MetricField, p: &Point, order: usize, scheme: &DiffScheme) -> Result<Self> {
        let jets = field_jet(g.field(), p, order, scheme)?;
        Self::from_metric_jets(g.dim(), jets)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn metric(&self) -> &[Jet] {
        &self.g
    }

    pub fn inverse(&self) -> &[Jet] {
        &self.g_inv
    }

    /// Γ^k_ij at index `(k*n + i)*n + j`.
    pub fn christoffel(&self) -> &[Jet] {
        &self.gamma
    }

    fn gam(&self, k: usize, i: usize, j: usize) -> Jet {
        self.gamma[(k * self.n + i) * self.n + j]
    }

    /// Lowered Riemann tensor R_ijkl, order K−2.
    pub fn riemann(&self) -> Result<Vec<Jet>> {
        if self.order < 2 {
            return Err(GeomError::Config("Riemann needs metric jets of order ≥ 2".into()));
        }
        let n = self.n;
        // R_ijk^l = ∂_iΓ^l_jk − ∂_jΓ^l_ik + Γ^l_im Γ^m_jk − Γ^l_jm Γ^m_ik
        let mut up = Vec::with_capacity(n.pow(4));
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut acc = self.gam(l, j, k).diff(i) - self.gam(l, i, k).diff(j);
                        for m in 0..n {
                            acc += self.gam(l, i, m) * self.gam(m, j, k) - self.gam(l, j, m) * self.gam(m, i, k);
                        }
                        up.push(acc);
                    }
                }
            }
        }
        let mut low = Vec::with_capacity(n.pow(4));
        for ijk in 0..n * n * n {
            for l in 0..n {
                let mut acc = self.g[l * n] * up[ijk * n];
                for m in 1..n {
                    acc += self.g[l * n + m] * up[ijk * n + m];
                }
                low.push(acc);
            }
        }
        Ok(low)
    }

    /// Ric_jk = g^il R_ijkl from lowered Riemann jets.
    pub fn ricci(&self, riem: &[Jet]) -> Vec<Jet> {
        let n = self.n;
        let mut out = Vec::with_capacity(n * n);
        for j in 0..n {
            for k in 0..n {
                let mut acc: Option<Jet> = None;
                for i in 0..n {
                    for l in 0..n {
                        let term = self.g_inv[i * n + l] * riem[((i * n + j) * n + k) * n + l];
                        acc = Some(match acc {
                            Some(a) => a + term,
                            None => term,
                        });
                    }
                }
                out.push(acc.expect("n ≥ 1"));
            }
        }
        out
    }

    /// Full trace `g^ij S_ij` of a symmetric 2-tensor.
    pub fn trace(&self, s: &[Jet]) -> Jet {
        let mut acc = self.g_inv[0] * s[0];
        for ij in 1..self.n * self.n {
            acc += self.g_inv[ij] * s[ij];
        }
        acc
    }

    /// Jets of ∇_k S_ij (index `(k*n + i)*n + j`), one order below `s`.
    pub fn cov_deriv_sym2(&self, s: &[Jet]) -> Vec<Jet> {
        let n = self.n;
        let mut out = Vec::with_capacity(n * n * n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut acc = s[i * n + j].diff(k);
                    for p in 0..n {
                        acc -= self.gam(p, k, i) * s[p * n + j] + self.gam(p, k, j) * s[i * n + p];
                    }
                    out.push(acc);
                }
            }
        }
        out
    }
}

pub(crate) fn jets_to_matrix(n: usize, jets: &[Jet]) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| jets[i * n + j].value())
}

pub(crate) fn jets_to_t3(n: usize, jets: &[Jet]) -> Tensor3 {
    Tensor3::from_fn(n, |a, b, c| jets[(a * n + b) * n + c].value())
}

pub(crate) fn jets_to_t4(n: usize, jets: &[Jet]) -> Tensor4 {
    Tensor4::from_fn(n, |a, b, c, d| jets[((a * n + b) * n + c) * n + d].value())
}

/// Metric, inverse, Γ, Riemann, Ricci and scalar curvature at a point.
#[derive(Clone, Debug)]
pub struct CurvatureBundle {
    pub point: Point,
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    /// Γ^k_ij at `get(k, i, j)`.
    pub christoffel: Tensor3,
    /// R_ijkl at `get(i, j, k, l)`.
    pub riemann: Tensor4,
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
}

impl CurvatureBundle {
    pub fn compute(g: &MetricField, p: &Point, scheme: &DiffScheme) -> Result<Self> {
        let geo = JetGeometry::at(g, p, 2, scheme)?;
        Self::from_geometry(p, &geo)
    }

    pub fn from_geometry(p: &Point, geo: &JetGeometry) -> Result<Self> {
        let n = geo.n();
        let riem = geo.riemann()?;
        let ric = geo.ricci(&riem);
        let scalar = geo.trace(&ric).value();
        let g = jets_to_matrix(n, geo.metric());
        // the Cholesky inverse is more accurate than the jet constant term
        let g_inv = metric_inverse(&g)?;
        Ok(CurvatureBundle {
            point: p.clone(),
            g,
            g_inv,
            christoffel: jets_to_t3(n, geo.christoffel()),
            riemann: jets_to_t4(n, &riem),
            ricci: jets_to_matrix(n, &ric),
            scalar,
        })
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }
}

/// Γ^k_ij at `get(k, i, j)`.
pub fn christoffel(g: &MetricField, p: &Point, scheme: &DiffScheme) -> Result<Tensor3> {
    let geo = JetGeometry::at(g, p, 1, scheme)?;
    Ok(jets_to_t3(g.dim(), geo.christoffel()))
}

pub fn riemann(g: &MetricField, p: &Point, scheme: &DiffScheme) -> Result<Tensor4> {
    Ok(CurvatureBundle::compute(g, p, scheme)?.riemann)
}

pub fn ricci(bundle: &CurvatureBundle) -> DMatrix<f64> {
    bundle.ricci.clone()
}

pub fn scalar_curvature(bundle: &CurvatureBundle) -> f64 {
    bundle.scalar
}

/// ∇²f_ij = ∂_i∂_j f − Γ^k_ij ∂_k f.
pub fn hessian_scalar(f: &ScalarField, g: &MetricField, p: &Point, scheme: &DiffScheme) -> Result<DMatrix<f64>> {
    let geo = JetGeometry::at(g, p, 1, scheme)?;
    let fj = field_jet(f.field(), p, 2, scheme)?[0];
    Ok(hessian_from_jets(&geo, &fj))
}

pub(crate) fn hessian_from_jets(geo: &JetGeometry, f: &Jet) -> DMatrix<f64> {
    let n = geo.n();
    let grad = f.gradient();
    DMatrix::from_fn(n, n, |i, j| {
        let mut alpha = vec![0; n];
        alpha[i] += 1;
        alpha[j] += 1;
        let mut v = f.partial(&alpha).expect("order-2 jet");
        for (k, gk) in grad.iter().enumerate() {
            v -= geo.christoffel()[(k * n + i) * n + j].value() * gk;
        }
        v
    })
}

/// ∇_k T_ij at `get(k, i, j)`.
pub fn cov_deriv_sym2(t: &Sym2Field, g: &MetricField, p: &Point, scheme: &DiffScheme) -> Result<Tensor3> {
    if t.dim() != g.dim() {
        return Err(GeomError::Dimension {
            expected: g.dim(),
            found: t.dim(),
        });
    }
    let geo = JetGeometry::at(g, p, 1, scheme)?;
    let tj = field_jet(t.field(), p, 1, scheme)?;
    Ok(jets_to_t3(g.dim(), &geo.cov_deriv_sym2(&tj)))
}

/// Right side of the three-dimensional decomposition, verbatim:
/// `F_kjip = Ric_ik g_jp − Ric_kp g_ij + Ric_jp g_ik − Ric_ij g_kp − ½R(g_ik g_jp − g_ij g_kp)`
/// stored at `get(k, j, i, p)`.
///
/// In this crate's convention `F_kjip = R_kjpi`; see [`decomposition_in_convention`].
pub fn riemann_3d_from_ricci(ric: &DMatrix<f64>, r: f64, g: &DMatrix<f64>) -> Result<Tensor4> {
    if g.nrows() != 3 || ric.nrows() != 3 {
        return Err(GeomError::Dimension {
            expected: 3,
            found: g.nrows(),
        });
    }
    Ok(Tensor4::from_fn(3, |k, j, i, p| {
        ric[(i, k)] * g[(j, p)] - ric[(k, p)] * g[(i, j)] + ric[(j, p)] * g[(i, k)]
            - ric[(i, j)] * g[(k, p)]
            - 0.5 * r * (g[(i, k)] * g[(j, p)] - g[(i, j)] * g[(k, p)])
    }))
}

/// Reorder the decomposition output into `R_ijkl` of this crate (swap the last pair).
pub fn decomposition_in_convention(f: &Tensor4) -> Tensor4 {
    Tensor4::from_fn(f.n(), |a, b, c, d| f.get(a, b, d, c))
}

/// Max deviation from the decomposition, in this crate's convention.
pub fn decomposition_residual(bundle: &CurvatureBundle) -> Result<f64> {
    let f = riemann_3d_from_ricci(&bundle.ricci, bundle.scalar, &bundle.g)?;
    Ok(decomposition_in_convention(&f).max_abs_diff(&bundle.riemann))
}

/// Largest violation of the pair antisymmetries, pair symmetry and first Bianchi identity.
pub fn riemann_symmetry_residual(r: &Tensor4) -> f64 {
    let n = r.n();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = r.get(i, j, k, l);
                    worst = worst
                        .max((v + r.get(j, i, k, l)).abs())
                        .max((v + r.get(i, j, l, k)).abs())
                        .max((v - r.get(k, l, i, j)).abs())
                        .max((v + r.get(j, k, i, l) + r.get(k, i, j, l)).abs());
                }
            }
        }
    }
    worst
}

/// max |∇_k g_ij|: metric compatibility of the connection.
pub fn metric_compatibility_residual(g: &MetricField, p: &Point, scheme: &DiffScheme) -> Result<f64> {
    Ok(cov_deriv_sym2(&g.as_sym2(), g, p, scheme)?.max_abs())
}

/// max_k |∂_k R − 2 g^ij ∇_i Ric_jk| (contracted second Bianchi identity).
pub fn contracted_bianchi_residual(g: &MetricField, p: &Point, scheme: &DiffScheme) -> Result<f64> {
    let geo = JetGeometry::at(g, p, 3, scheme)?;
    let n = geo.n();
    let riem = geo.riemann()?;
    let ric = geo.ricci(&riem);
    let r = geo.trace(&ric);
    let nab = geo.cov_deriv_sym2(&ric);
    let gi = jets_to_matrix(n, geo.inverse());
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let mut div = 0.0;
        for i in 0..n {
            for j in 0..n {
                div += gi[(i, j)] * nab[(i * n + j) * n + k].value();
            }
        }
        worst = worst.max((r.gradient()[k] - 2.0 * div).abs());
    }
    Ok(worst)
}
