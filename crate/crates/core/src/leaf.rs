//! Geometry of the level sets of axis 0 in an adapted chart: second
//! fundamental form, umbilicity, mean curvature identities, warped-product
//! structure, the Gauss relation and zone classification.
//!
//! Throughout, axis 0 is the normal direction and axes 1.. span the leaf.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::chart::{Grid, Point};
use crate::codazzi::{generalized_eigenstructure, sweep, sweep_map, ClusterTol, SweepStats};
use crate::curvature::{jets_to_matrix, CurvatureBundle, JetGeometry};
use crate::diff::{field_jet, partial_derivative, DiffScheme};
use crate::error::{GeomError, Result};
use crate::field::{Field, FieldShape, JetKind, MetricField, ScalarField, Sym2Field};
use crate::jet::{Jet, Real, MAX_ORDER};
use crate::linalg::jet_inverse;

pub const METRIC_CROSS_TOL: f64 = 1e-12;
pub const TENSOR_CROSS_TOL: f64 = 1e-10;

/// Verify `g_0j = 0` (and `T_0j = 0` if given) for `j ≥ 1` at `p`.
pub fn check_adapted_chart(g: &MetricField, t: Option<&Sym2Field>, p: &Point) -> Result<()> {
    let gv = g.value(p)?;
    for j in 1..g.dim() {
        if gv[(0, j)].abs() > METRIC_CROSS_TOL {
            return Err(GeomError::Assumption(format!(
                "chart not adapted at {p}: g_0{j} = {:e}",
                gv[(0, j)]
            )));
        }
    }
    if let Some(t) = t {
        let tv = t.value(p)?;
        for j in 1..t.dim() {
            if tv[(0, j)].abs() > TENSOR_CROSS_TOL {
                return Err(GeomError::Assumption(format!(
                    "chart not adapted at {p}: T_0{j} = {:e}",
                    tv[(0, j)]
                )));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct LeafData {
    pub point: Point,
    /// h_ij, i,j ≥ 1.
    pub h: DMatrix<f64>,
    pub mean_curvature: f64,
    pub umbilicity: f64,
    /// Induced metric g^σ.
    pub induced: DMatrix<f64>,
}

fn block(n: usize, jets: &[Jet]) -> Vec<Jet> {
    let m = n - 1;
    (0..m * m).map(|ij| jets[(ij / m + 1) * n + ij % m + 1]).collect()
}

/// Jets of h_ij = −Γ⁰_ij √g₀₀ (leaf block, row-major), one order below the metric jets.
fn second_form_jets(geo: &JetGeometry) -> Vec<Jet> {
    let n = geo.n();
    let sq = geo.metric()[0].sqrt();
    let gam0: Vec<Jet> = geo.christoffel()[..n * n].to_vec();
    block(n, &gam0).into_iter().map(|c| -(c * sq)).collect()
}

/// Jet of H = (g^σ)^ij h_ij.
fn mean_curvature_jet(geo: &JetGeometry) -> Result<Jet> {
    let n = geo.n();
    let h = second_form_jets(geo);
    let inv = jet_inverse(n - 1, &block(n, geo.metric()))?;
    let mut acc = inv[0] * h[0];
    for ij in 1..h.len() {
        acc += inv[ij] * h[ij];
    }
    Ok(acc)
}

fn check_leaf_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(GeomError::Dimension { expected: 2, found: n });
    }
    Ok(())
}

pub fn leaf_from_geometry(p: &Point, geo: &JetGeometry) -> Result<LeafData> {
    let n = geo.n();
    check_leaf_dim(n)?;
    if !(geo.metric()[0].value() > 0.0) {
        return Err(GeomError::DegenerateMetric {
            min_eigenvalue: geo.metric()[0].value(),
        });
    }
    let h = jets_to_matrix(n - 1, &second_form_jets(geo));
    let induced = jets_to_matrix(n - 1, &block(n, geo.metric()));
    let inv = crate::linalg::metric_inverse(&induced)?;
    let mean_curvature = (0..n - 1)
        .flat_map(|i| (0..n - 1).map(move |j| (i, j)))
        .map(|(i, j)| inv[(i, j)] * h[(i, j)])
        .sum();
    let mut leaf = LeafData {
        point: p.clone(),
        h,
        mean_curvature,
        umbilicity: 0.0,
        induced,
    };
    leaf.umbilicity = umbilicity_residual(&leaf);
    Ok(leaf)
}

pub fn second_fundamental_form(g: &MetricField, p: &Point, scheme: &DiffScheme) -> Result<LeafData> {
    check_adapted_chart(g, None, p)?;
    let geo = JetGeometry::at(g, p, 1, scheme)?;
    leaf_from_geometry(p, &geo)
}

/// max |h_ij − H/(n−1) g^σ_ij|.
pub fn umbilicity_residual(leaf: &LeafData) -> f64 {
    let m = leaf.h.nrows() as f64;
    (&leaf.h - &leaf.induced * (leaf.mean_curvature / m)).amax()
}

fn jet_order_of(f: &Field) -> usize {
    match f.jet_kind() {
        JetKind::None => MAX_ORDER,
        _ => f.jet_order(),
    }
}

/// H as a scalar field; derivatives come from metric jets one order higher.
pub fn mean_curvature_field(g: &MetricField, scheme: &DiffScheme) -> ScalarField {
    let gf = g.clone();
    let s = scheme.clone();
    let order = jet_order_of(g.field()).min(MAX_ORDER) - 1;
    let f = Field::derived("H", g.domain().clone(), FieldShape::Scalar, order, move |x, k| {
        let p = Point::new(x.to_vec())?;
        let geo = JetGeometry::at(&gf, &p, k + 1, &s)?;
        Ok(vec![mean_curvature_jet(&geo)?])
    });
    ScalarField::new(f).expect("scalar shape")
}

/// σ = tr((g^σ)⁻¹ T^σ)/(n−1): the leaf eigenvalue in an adapted chart.
pub fn sigma_field(g: &MetricField, t: &Sym2Field, scheme: &DiffScheme) -> ScalarField {
    let (gf, tf, s) = (g.clone(), t.clone(), scheme.clone());
    let order = jet_order_of(g.field()).min(jet_order_of(t.field()));
    let f = Field::derived("sigma", g.domain().clone(), FieldShape::Scalar, order, move |x, k| {
        let p = Point::new(x.to_vec())?;
        let n = gf.dim();
        let gj = field_jet(gf.field(), &p, k, &s)?;
        let tj = field_jet(tf.field(), &p, k, &s)?;
        let inv = jet_inverse(n - 1, &block(n, &gj))?;
        let tb = block(n, &tj);
        let mut acc = inv[0] * tb[0];
        for ij in 1..tb.len() {
            acc += inv[ij] * tb[ij];
        }
        Ok(vec![acc / (n - 1) as f64])
    });
    ScalarField::new(f).expect("scalar shape")
}

/// ρ = T_00 / g_00: the normal eigenvalue in an adapted chart.
pub fn rho_field(g: &MetricField, t: &Sym2Field, scheme: &DiffScheme) -> ScalarField {
    let (gf, tf, s) = (g.clone(), t.clone(), scheme.clone());
    let order = jet_order_of(g.field()).min(jet_order_of(t.field()));
    let f = Field::derived("rho", g.domain().clone(), FieldShape::Scalar, order, move |x, k| {
        let p = Point::new(x.to_vec())?;
        let gj = field_jet(gf.field(), &p, k, &s)?;
        let tj = field_jet(tf.field(), &p, k, &s)?;
        Ok(vec![tj[0] / gj[0]])
    });
    ScalarField::new(f).expect("scalar shape")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanCurvatureCheck {
    /// H from the second fundamental form.
    pub mean_curvature: f64,
    /// (n−1) ∂₀σ / ((ρ−σ) √g₀₀).
    pub predicted: f64,
    /// ∂₀σ / (ρ−σ), the uncorrected form.
    pub uncorrected: f64,
    pub rho: f64,
    pub sigma: f64,
    pub dsigma: f64,
    pub residual: f64,
}

/// Compare H with the eigenvalue expression `(n−1) ν(σ)/(ρ−σ)`, ν = ∂₀/√g₀₀.
pub fn mean_curvature_identity_residual(
    g: &MetricField,
    t: &Sym2Field,
    p: &Point,
    scheme: &DiffScheme,
) -> Result<MeanCurvatureCheck> {
    check_adapted_chart(g, Some(t), p)?;
    let n = g.dim();
    let gv = g.value(p)?;
    let eig = generalized_eigenstructure(&t.value(p)?, &gv, ClusterTol::default())?;
    let tv = eig.two_value.ok_or_else(|| {
        GeomError::Assumption(format!(
            "eigenvalue pattern {:?} at {p} is not (1, n-1)",
            eig.multiplicities
        ))
    })?;
    let sigma = sigma_field(g, t, scheme);
    let mut alpha = vec![0; n];
    alpha[0] = 1;
    let dsigma = partial_derivative(sigma.field(), p, &alpha, scheme)?[0];
    let leaf = second_fundamental_form(g, p, scheme)?;
    let gap = tv.rho - tv.sigma;
    let predicted = (n - 1) as f64 * dsigma / (gap * gv[(0, 0)].sqrt());
    Ok(MeanCurvatureCheck {
        mean_curvature: leaf.mean_curvature,
        predicted,
        uncorrected: dsigma / gap,
        rho: tv.rho,
        sigma: tv.sigma,
        dsigma,
        residual: (leaf.mean_curvature - predicted).abs(),
    })
}

/// max_{j≥1} |(n−2)/(n−1) ∂_j H + Ric_0j / √g₀₀|.
pub fn traced_codazzi_mainardi_residual(g: &MetricField, p: &Point, scheme: &DiffScheme) -> Result<f64> {
    check_adapted_chart(g, None, p)?;
    let n = g.dim();
    check_leaf_dim(n)?;
    let geo = JetGeometry::at(g, p, 2, scheme)?;
    let hj = mean_curvature_jet(&geo)?;
    let riem = geo.riemann()?;
    let ric = geo.ricci(&riem);
    let root = geo.metric()[0].value().sqrt();
    let c = (n - 2) as f64 / (n - 1) as f64;
    let grad = hj.gradient();
    Ok((1..n)
        .map(|j| (c * grad[j] + ric[j].value() / root).abs())
        .fold(0.0, f64::max))
}

/// Max |Ric_0j|, j ≥ 1.
pub fn ricci_normal_mixed(bundle: &CurvatureBundle) -> f64 {
    (1..bundle.dim()).map(|j| bundle.ricci[(0, j)].abs()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WarpedCheck {
    /// Mean of ∂₀g_ij / g_ij over nonzero leaf entries.
    pub phi: f64,
    pub spread: f64,
    /// max_{k≥1} |∂_k (∂₀g_ij / g_ij)|.
    pub fiber_dependence: f64,
    /// max_{j≥1} |∂_j g₀₀|, informational.
    pub normal_dependence: f64,
    /// spread + fiber_dependence.
    pub residual: f64,
}

pub fn warped_product_residual(g: &MetricField, p: &Point, scheme: &DiffScheme) -> Result<WarpedCheck> {
    check_adapted_chart(g, None, p)?;
    let n = g.dim();
    check_leaf_dim(n)?;
    let gj = field_jet(g.field(), p, 2, scheme)?;
    let scale = gj.iter().map(|j| j.value().abs()).fold(0.0, f64::max);
    let mut ratios = Vec::new();
    let mut fiber: f64 = 0.0;
    let mut broken = false;
    for i in 1..n {
        for j in i..n {
            let e = gj[i * n + j];
            let d0 = e.diff(0);
            if e.value().abs() <= 1e-14 * scale {
                if d0.value().abs() > 1e-12 {
                    broken = true;
                }
                continue;
            }
            let r = d0 / e.truncate(1);
            ratios.push(r.value());
            for k in 1..n {
                fiber = fiber.max(r.gradient()[k].abs());
            }
        }
    }
    let normal_dependence = (1..n).map(|j| gj[0].gradient()[j].abs()).fold(0.0, f64::max);
    if broken || ratios.is_empty() {
        return Ok(WarpedCheck {
            phi: f64::NAN,
            spread: f64::INFINITY,
            fiber_dependence: f64::INFINITY,
            normal_dependence,
            residual: f64::INFINITY,
        });
    }
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let phi = ratios.iter().sum::<f64>() / ratios.len() as f64;
    Ok(WarpedCheck {
        phi,
        spread: hi - lo,
        fiber_dependence: fiber,
        normal_dependence,
        residual: (hi - lo) + fiber,
    })
}

/// ψ with ψ′ = φ along axis 0 through `fiber`, anchored ψ(ts[0]) = 0.
///
/// Composite trapezoid rule with `substeps` panels per sample interval.
pub fn reconstruct_warping(
    g: &MetricField,
    ts: &[f64],
    fiber: &[f64],
    scheme: &DiffScheme,
    substeps: usize,
) -> Result<Vec<f64>> {
    let phi_at = |t: f64| -> Result<f64> {
        let mut c = vec![t];
        c.extend_from_slice(fiber);
        Ok(warped_product_residual(g, &Point::new(c)?, scheme)?.phi)
    };
    let m = substeps.max(1);
    let mut psi = Vec::with_capacity(ts.len());
    let mut acc = 0.0;
    let mut prev = match ts.first() {
        Some(&t) => phi_at(t)?,
        None => return Ok(psi),
    };
    psi.push(0.0);
    for w in ts.windows(2) {
        let h = (w[1] - w[0]) / m as f64;
        for s in 1..=m {
            let cur = phi_at(w[0] + h * s as f64)?;
            acc += 0.5 * h * (prev + cur);
            prev = cur;
        }
        psi.push(acc);
    }
    Ok(psi)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussCheck {
    /// R − 2 Ric(ν,ν) + H²/2.
    pub formula: f64,
    /// Scalar curvature of the induced 2-metric.
    pub direct: f64,
    pub residual: f64,
}

/// Gauss relation for the leaf through `p` of a 3-manifold (umbilic leaves).
pub fn induced_scalar_curvature_gauss(g: &MetricField, p: &Point, scheme: &DiffScheme) -> Result<GaussCheck> {
    if g.dim() != 3 {
        return Err(GeomError::Dimension {
            expected: 3,
            found: g.dim(),
        });
    }
    check_adapted_chart(g, None, p)?;
    let geo = JetGeometry::at(g, p, 2, scheme)?;
    let bundle = CurvatureBundle::from_geometry(p, &geo)?;
    let leaf = leaf_from_geometry(p, &geo)?;
    let formula =
        bundle.scalar - 2.0 * bundle.ricci[(0, 0)] / bundle.g[(0, 0)] + 0.5 * leaf.mean_curvature.powi(2);
    let fiber_metric = g.restricted(0, p[0])?;
    let q = Point::new(p.coords()[1..].to_vec())?;
    let direct = CurvatureBundle::compute(&fiber_metric, &q, scheme)?.scalar;
    Ok(GaussCheck {
        formula,
        direct,
        residual: (formula - direct).abs(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Zone {
    WarpedZone,
    TotallyGeodesicZone,
    BoundaryBand,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZoneLabel {
    pub point: Point,
    pub zone: Zone,
    pub dsigma: f64,
    pub threshold: f64,
}

pub const FIBER_CONSTANCY_TOL: f64 = 1e-10;

/// Label grid points by |∂₀σ| against `threshold`.
///
/// Totally geodesic requires the point and its axis-0 grid neighbors to be
/// at or below threshold; leftover sub-threshold points form boundary bands.
pub fn classify_zones(sigma: &ScalarField, grid: &Grid, threshold: f64, scheme: &DiffScheme) -> Result<Vec<ZoneLabel>> {
    if !(threshold > 0.0) {
        return Err(GeomError::Config(format!("zone threshold {threshold} must be positive")));
    }
    let n = sigma.dim();
    let grads = sweep_map(grid.points(), |p| {
        let mut g = Vec::with_capacity(n);
        for a in 0..n {
            let mut alpha = vec![0; n];
            alpha[a] = 1;
            g.push(partial_derivative(sigma.field(), p, &alpha, scheme)?[0]);
        }
        Ok(g)
    })?;
    for (p, g) in grid.points().iter().zip(&grads) {
        if let Some(d) = g[1..].iter().find(|d| d.abs() > FIBER_CONSTANCY_TOL) {
            return Err(GeomError::Assumption(format!(
                "sigma varies along the leaf at {p}: derivative {d:e}"
            )));
        }
    }
    let quiet = |i: usize| grads[i][0].abs() <= threshold;
    Ok(grid
        .points()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let zone = if !quiet(i) {
                Zone::WarpedZone
            } else if [-1isize, 1]
                .iter()
                .filter_map(|&s| grid.neighbor(i, 0, s))
                .all(quiet)
            {
                Zone::TotallyGeodesicZone
            } else {
                Zone::BoundaryBand
            };
            ZoneLabel {
                point: p.clone(),
                zone,
                dsigma: grads[i][0],
                threshold,
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZoneValidation {
    /// warped_product_residual over WarpedZone points.
    pub warped: SweepStats,
    /// max |h_ij| over TotallyGeodesicZone points.
    pub geodesic: SweepStats,
}

pub fn validate_zones(g: &MetricField, labels: &[ZoneLabel], scheme: &DiffScheme) -> Result<ZoneValidation> {
    let pick = |z: Zone| -> Vec<Point> {
        labels
            .iter()
            .filter(|l| l.zone == z)
            .map(|l| l.point.clone())
            .collect()
    };
    let warped_pts = pick(Zone::WarpedZone);
    let geo_pts = pick(Zone::TotallyGeodesicZone);
    Ok(ZoneValidation {
        warped: sweep(&warped_pts, |p| Ok(warped_product_residual(g, p, scheme)?.residual))?,
        geodesic: sweep(&geo_pts, |p| Ok(second_fundamental_form(g, p, scheme)?.h.amax()))?,
    })
}

/// Largest spread (max − min) of `values` over any axis-0 slice of `grid`.
pub fn fiber_variation(grid: &Grid, values: &[f64]) -> f64 {
    let slices = grid.shape()[0];
    let per = grid.len() / slices;
    (0..slices)
        .map(|s| {
            let v = &values[s * per..(s + 1) * per];
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            hi - lo
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{Axis, CoordinateBox};
    use crate::field::Formula;

    fn bx() -> CoordinateBox {
        CoordinateBox::new(vec![Axis::interval(-1.0, 1.0), Axis::circle(), Axis::circle()]).unwrap()
    }

    fn pt(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    /// dt² + e^{t}(dx² + dy²)
    struct ExpWarp;
    impl Formula for ExpWarp {
        fn eval<R: Real>(&self, x: &[R]) -> Vec<R> {
            let e = x[0].exp();
            let z = x[0].lift(0.0);
            vec![x[0].lift(1.0), z, z, z, e, z, z, z, e]
        }
    }

    /// e^{2u}δ, u = 0.3 t sin x + 0.1 t²: umbilic leaves with H varying along them.
    struct Conformal;
    impl Formula for Conformal {
        fn eval<R: Real>(&self, v: &[R]) -> Vec<R> {
            let u = v[0] * v[1].sin() * 0.3 + v[0] * v[0] * 0.1;
            let c = (u * 2.0).exp();
            let z = v[0].lift(0.0);
            vec![c, z, z, z, c, z, z, z, c]
        }
    }

    /// dt² + e^{2t}dx² + e^{2t(1 + a sin x)}dy²: leaves not umbilic.
    struct Anisotropic(f64);
    impl Formula for Anisotropic {
        fn eval<R: Real>(&self, v: &[R]) -> Vec<R> {
            let z = v[0].lift(0.0);
            let gx = (v[0] * 2.0).exp();
            let gy = (v[0] * 2.0 * (v[1].sin() * self.0 + 1.0)).exp();
            vec![v[0].lift(1.0), z, z, z, gx, z, z, z, gy]
        }
    }

    #[test]
    fn umbilicity_arithmetic() {
        let leaf = LeafData {
            point: pt(&[0.0, 0.0, 0.0]),
            h: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0])),
            mean_curvature: 3.0,
            umbilicity: 0.0,
            induced: DMatrix::identity(2, 2),
        };
        assert_eq!(umbilicity_residual(&leaf), 0.5);
    }

    #[test]
    fn exponential_warp() {
        let g = MetricField::closed_form("w", bx(), ExpWarp);
        let p = pt(&[0.2, 1.0, 2.0]);
        let s = DiffScheme::default();
        let w = warped_product_residual(&g, &p, &s).unwrap();
        assert_eq!(w.residual, 0.0);
        assert!((w.phi - 1.0).abs() < 1e-14);
        let leaf = second_fundamental_form(&g, &p, &s).unwrap();
        // Γ⁰_xx = −e^t/2 so h = e^t/2 = g^σ/2 and H = 1
        assert!((leaf.mean_curvature - 1.0).abs() < 1e-14);
        assert!(leaf.umbilicity < 1e-15);
        assert!(traced_codazzi_mainardi_residual(&g, &p, &s).unwrap() < 1e-14);
        let ts: Vec<f64> = (0..5).map(|k| -0.4 + 0.2 * k as f64).collect();
        let psi = reconstruct_warping(&g, &ts, &[1.0, 2.0], &s, 4).unwrap();
        assert!((psi[4] - 0.8).abs() < 1e-13);
    }

    #[test]
    fn traced_codazzi_mainardi_sign_on_conformal_metric() {
        let g = MetricField::closed_form("conf", bx(), Conformal);
        for scheme in [DiffScheme::default(), DiffScheme::finite_differences()] {
            for p in [pt(&[0.3, 0.7, 1.0]), pt(&[-0.5, 2.0, 4.0])] {
                let leaf = second_fundamental_form(&g, &p, &scheme).unwrap();
                assert!(leaf.umbilicity < 1e-8);
                let r = traced_codazzi_mainardi_residual(&g, &p, &scheme).unwrap();
                assert!(r < 1e-6, "{r}");
                // both sides are individually nonzero here
                let b = CurvatureBundle::compute(&g, &p, &scheme).unwrap();
                assert!(ricci_normal_mixed(&b) > 1e-2);
            }
        }
    }

    #[test]
    fn traced_codazzi_mainardi_fails_off_umbilic() {
        let g = MetricField::closed_form("aniso", bx(), Anisotropic(0.5));
        let r = traced_codazzi_mainardi_residual(&g, &pt(&[0.1, 0.4, 0.0]), &DiffScheme::default()).unwrap();
        assert!(r > 1e-3, "{r}");
    }

    #[test]
    fn gauss_relation_flat_and_conformal() {
        struct Flat;
        impl Formula for Flat {
            fn eval<R: Real>(&self, x: &[R]) -> Vec<R> {
                let o = x[0].lift(1.0);
                let z = x[0].lift(0.0);
                vec![o, z, z, z, o, z, z, z, o]
            }
        }
        let s = DiffScheme::default();
        let g = MetricField::closed_form("flat", bx(), Flat);
        let c = induced_scalar_curvature_gauss(&g, &pt(&[0.0, 1.0, 1.0]), &s).unwrap();
        assert_eq!((c.formula, c.direct), (0.0, 0.0));
        let g = MetricField::closed_form("conf", bx(), Conformal);
        let c = induced_scalar_curvature_gauss(&g, &pt(&[0.4, 1.0, 2.0]), &s).unwrap();
        assert!(c.residual < 1e-10, "{c:?}");
        assert!(c.direct.abs() > 1e-3);
    }

    #[test]
    fn zones_trivial_cases() {
        let s = DiffScheme::default();
        let ts: Vec<f64> = (0..9).map(|k| -0.8 + 0.2 * k as f64).collect();
        let grid = Grid::product(&[ts, vec![0.0, 1.0]]).unwrap();
        let b2 = CoordinateBox::new(vec![Axis::interval(-1.0, 1.0), Axis::circle()]).unwrap();
        let mono = ScalarField::from_fn("mono", b2.clone(), |x| vec![x[0] * 2.0]);
        let z = classify_zones(&mono, &grid, 1e-4, &s).unwrap();
        assert!(z.iter().all(|l| l.zone == Zone::WarpedZone));
        let flat = ScalarField::from_fn("c", b2.clone(), |_| vec![2.0]);
        let z = classify_zones(&flat, &grid, 1e-4, &s).unwrap();
        assert!(z.iter().all(|l| l.zone == Zone::TotallyGeodesicZone));
        let leafy = ScalarField::from_fn("leafy", b2, |x| vec![x[1].sin()]);
        assert!(matches!(classify_zones(&leafy, &grid, 1e-4, &s), Err(GeomError::Assumption(_))));
    }

    #[test]
    fn fiber_variation_per_slice() {
        let grid = Grid::product(&[vec![0.0, 1.0], vec![0.0, 1.0, 2.0]]).unwrap();
        assert_eq!(fiber_variation(&grid, &[1.0, 1.0, 1.0, 0.0, 2.0, 0.5]), 2.0);
    }
}
