//! Gradient Ricci solitons Ric + ∇²f = λg, the tensor T = (Ric − ½Rg)e^{−f}
//! and a small catalog of exact three-dimensional solitons.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::chart::{sample_grid, Axis, CoordinateBox, Grid, Point};
use crate::codazzi::{codazzi_deviation, generalized_eigenstructure, sweep_map, ClusterTol, SweepStats};
use crate::curvature::{hessian_from_jets, jets_to_matrix, CurvatureBundle, JetGeometry};
use crate::diff::{field_jet, DiffScheme};
use crate::error::{GeomError, Result};
use crate::field::{Field, FieldShape, Formula, MetricField, ScalarField, Sym2Field};
use crate::jet::{Jet, Real};
use crate::linalg::Tensor3;

/// Sign in front of R_kjip ∇^p f in ∇_k Ric_ij − ∇_j Ric_ik = ±R_kjip ∇^p f
/// for this crate's Riemann convention. Fixed by the cigar, where both
/// sides are nonzero.
pub const RICCI_ANTISYMMETRY_SIGN: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolitonKind {
    Shrinking,
    Steady,
    Expanding,
}

impl SolitonKind {
    pub fn of_lambda(lambda: f64) -> Self {
        if lambda > 0.0 {
            SolitonKind::Shrinking
        } else if lambda < 0.0 {
            SolitonKind::Expanding
        } else {
            SolitonKind::Steady
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Geometry {
    Flat,
    Sphere,
    Cylinder,
    CigarLine,
}

struct MetricFormula(Geometry);
impl Formula for MetricFormula {
    fn eval<R: Real>(&self, x: &[R]) -> Vec<R> {
        let z = x[0].lift(0.0);
        let one = x[0].lift(1.0);
        match self.0 {
            Geometry::Flat => vec![one, z, z, z, one, z, z, z, one],
            Geometry::Sphere => {
                let c = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + 1.0).powi(-2) * 4.0;
                vec![c, z, z, z, c, z, z, z, c]
            }
            // (t, θ, φ)
            Geometry::Cylinder => {
                let s = x[1].sin();
                vec![one, z, z, z, one, z, z, z, s * s]
            }
            // (x, y, z)
            Geometry::CigarLine => {
                let w = (x[0] * x[0] + x[1] * x[1] + 1.0).recip();
                vec![w, z, z, z, w, z, z, z, one]
            }
        }
    }
}

struct PotentialFormula {
    geometry: Geometry,
    shift: f64,
}
impl Formula for PotentialFormula {
    fn eval<R: Real>(&self, x: &[R]) -> Vec<R> {
        let f = match self.geometry {
            Geometry::Flat => (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) * 0.25,
            Geometry::Sphere => x[0].lift(0.0),
            Geometry::Cylinder => x[0] * x[0] * 0.5,
            Geometry::CigarLine => -(x[0] * x[0] + x[1] * x[1] + 1.0).ln(),
        };
        vec![f + self.shift]
    }
}

#[derive(Clone, Debug)]
pub struct SolitonInstance {
    pub name: String,
    pub kind: SolitonKind,
    pub lambda: f64,
    pub metric: MetricField,
    pub potential: ScalarField,
    /// Sampling box; the fields' own chart is padded so stencils fit.
    pub chart: CoordinateBox,
    pub default_resolution: Vec<usize>,
    /// Chart permutation that puts the normal direction of the leaves first.
    pub leaf_perm: Vec<usize>,
    /// Axis of the line factor, for the product instances.
    pub split_axis: Option<usize>,
    geometry: Geometry,
    shift: f64,
}

fn boxed(axes: Vec<Axis>) -> CoordinateBox {
    CoordinateBox::new(axes).expect("valid box")
}

impl SolitonInstance {
    fn build(name: &str, geometry: Geometry, lambda: f64, shift: f64) -> Self {
        let pad = |a: f64, b: f64, p: f64| Axis::interval(a - p, b + p);
        let (domain, chart, res, perm, split) = match geometry {
            Geometry::Flat => (
                boxed(vec![pad(-2.0, 2.0, 0.5); 3]),
                boxed(vec![Axis::interval(-2.0, 2.0); 3]),
                vec![8, 8, 8],
                vec![0, 1, 2],
                None,
            ),
            Geometry::Sphere => (
                boxed(vec![pad(-0.8, 0.8, 0.4); 3]),
                boxed(vec![Axis::interval(-0.8, 0.8); 3]),
                vec![8, 8, 8],
                vec![0, 1, 2],
                None,
            ),
            Geometry::Cylinder => (
                boxed(vec![pad(-2.0, 2.0, 0.5), pad(0.4, PI - 0.4, 0.35), Axis::circle()]),
                boxed(vec![Axis::interval(-2.0, 2.0), Axis::interval(0.4, PI - 0.4), Axis::circle()]),
                vec![9, 8, 8],
                vec![0, 1, 2],
                Some(0),
            ),
            Geometry::CigarLine => (
                boxed(vec![pad(-2.0, 2.0, 0.5), pad(-2.0, 2.0, 0.5), pad(-1.5, 1.5, 0.5)]),
                boxed(vec![Axis::interval(-2.0, 2.0), Axis::interval(-2.0, 2.0), Axis::interval(-1.5, 1.5)]),
                vec![9, 9, 7],
                vec![2, 0, 1],
                Some(2),
            ),
        };
        SolitonInstance {
            name: name.into(),
            kind: SolitonKind::of_lambda(lambda),
            lambda,
            metric: MetricField::closed_form(&format!("{name} g"), domain.clone(), MetricFormula(geometry)),
            potential: ScalarField::closed_form(&format!("{name} f"), domain, PotentialFormula { geometry, shift }),
            chart,
            default_resolution: res,
            leaf_perm: perm,
            split_axis: split,
            geometry,
            shift,
        }
    }

    pub fn gaussian_shrinker() -> Self {
        Self::build("gaussian", Geometry::Flat, 0.5, 0.0)
    }

    pub fn round_s3() -> Self {
        Self::build("s3", Geometry::Sphere, 2.0, 0.0)
    }

    pub fn cylinder() -> Self {
        Self::build("cylinder", Geometry::Cylinder, 1.0, 0.0)
    }

    pub fn cigar_line() -> Self {
        Self::build("cigar-line", Geometry::CigarLine, 0.0, 0.0)
    }

    /// Same soliton with f replaced by f + c.
    pub fn with_potential_shift(&self, c: f64) -> Self {
        Self::build(&self.name, self.geometry, self.lambda, self.shift + c)
    }

    pub fn grid(&self, res: &[usize]) -> Result<Grid> {
        sample_grid(&self.chart, res, 0.0)
    }

    pub fn default_grid(&self) -> Grid {
        self.grid(&self.default_resolution).expect("valid resolution")
    }

    /// Metric in the chart reordered by `leaf_perm`.
    pub fn leaf_metric(&self) -> Result<MetricField> {
        self.metric.permuted(&self.leaf_perm)
    }

    pub fn leaf_point(&self, p: &Point) -> Result<Point> {
        Point::new(self.leaf_perm.iter().map(|&a| p[a]).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if SolitonKind::of_lambda(self.lambda) != self.kind {
            return Err(GeomError::Assumption(format!(
                "{}: kind {:?} inconsistent with λ = {}",
                self.name, self.kind, self.lambda
            )));
        }
        Ok(())
    }
}

/// The four catalog instances, in a fixed order.
pub fn catalog() -> Vec<SolitonInstance> {
    vec![
        SolitonInstance::gaussian_shrinker(),
        SolitonInstance::round_s3(),
        SolitonInstance::cylinder(),
        SolitonInstance::cigar_line(),
    ]
}

pub fn instance(name: &str) -> Result<SolitonInstance> {
    catalog()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| GeomError::Config(format!("unknown soliton {name:?}")))
}

/// max-abs of Ric + ∇²f − λg.
pub fn soliton_residual(s: &SolitonInstance, p: &Point, scheme: &DiffScheme) -> Result<f64> {
    let geo = JetGeometry::at(&s.metric, p, 2, scheme)?;
    let bundle = CurvatureBundle::from_geometry(p, &geo)?;
    let f = field_jet(s.potential.field(), p, 2, scheme)?[0];
    let hess = hessian_from_jets(&geo, &f);
    Ok((&bundle.ricci + hess - &bundle.g * s.lambda).amax())
}

/// Ric, R (jets of order `geo.order() − 2`) and ∇f (values) at a point.
struct Pieces {
    geo: JetGeometry,
    riem: Vec<Jet>,
    ric: Vec<Jet>,
    r: Jet,
    f: Jet,
    grad_up: Vec<f64>,
}

fn pieces(s: &SolitonInstance, p: &Point, scheme: &DiffScheme) -> Result<Pieces> {
    let geo = JetGeometry::at(&s.metric, p, 3, scheme)?;
    let riem = geo.riemann()?;
    let ric = geo.ricci(&riem);
    let r = geo.trace(&ric);
    let f = field_jet(s.potential.field(), p, 1, scheme)?[0];
    let n = geo.n();
    let df = f.gradient();
    let g_inv = jets_to_matrix(n, geo.inverse());
    let grad_up = (0..n).map(|a| (0..n).map(|b| g_inv[(a, b)] * df[b]).sum()).collect();
    Ok(Pieces {
        geo,
        riem,
        ric,
        r,
        f,
        grad_up,
    })
}

/// max over k of |∂_k R − 2 Ric_pk ∇^p f|.
pub fn scalar_curvature_gradient_residual(s: &SolitonInstance, p: &Point, scheme: &DiffScheme) -> Result<f64> {
    let pc = pieces(s, p, scheme)?;
    let n = pc.geo.n();
    let dr = pc.r.gradient();
    Ok((0..n)
        .map(|k| {
            let rhs: f64 = (0..n).map(|q| pc.ric[q * n + k].value() * pc.grad_up[q]).sum();
            (dr[k] - 2.0 * rhs).abs()
        })
        .fold(0.0, f64::max))
}

/// max over (k, i, j) of |∇_k Ric_ij − ∇_j Ric_ik − sign · R_kjip ∇^p f|.
pub fn ricci_antisymmetry_signed(s: &SolitonInstance, p: &Point, scheme: &DiffScheme, sign: f64) -> Result<f64> {
    let pc = pieces(s, p, scheme)?;
    let n = pc.geo.n();
    let nab = pc.geo.cov_deriv_sym2(&pc.ric);
    let at = |k: usize, i: usize, j: usize| nab[(k * n + i) * n + j].value();
    let mut worst = 0.0f64;
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let rhs: f64 = (0..n)
                    .map(|q| pc.riem[((k * n + j) * n + i) * n + q].value() * pc.grad_up[q])
                    .sum();
                worst = worst.max((at(k, i, j) - at(j, i, k) - sign * rhs).abs());
            }
        }
    }
    Ok(worst)
}

pub fn ricci_antisymmetry_residual(s: &SolitonInstance, p: &Point, scheme: &DiffScheme) -> Result<f64> {
    ricci_antisymmetry_signed(s, p, scheme, RICCI_ANTISYMMETRY_SIGN)
}

/// Jets of (Ric − ½Rg)e^{−f}, order `order`, from metric jets two orders higher.
fn codazzi_tensor_jets(
    metric: &MetricField,
    potential: &ScalarField,
    p: &Point,
    order: usize,
    scheme: &DiffScheme,
) -> Result<Vec<Jet>> {
    let geo = JetGeometry::at(metric, p, order + 2, scheme)?;
    let ric = geo.ricci(&geo.riemann()?);
    let r = geo.trace(&ric);
    let w = (-field_jet(potential.field(), p, order, scheme)?[0]).exp();
    Ok(ric
        .iter()
        .zip(geo.metric())
        .map(|(&rc, &g)| (rc - r * g * 0.5) * w)
        .collect())
}

/// T = (Ric − ½Rg)e^{−f}; jets to order 1 (metric jets to order 3).
pub fn soliton_codazzi_tensor(s: &SolitonInstance, scheme: &DiffScheme) -> Sym2Field {
    let metric = s.metric.clone();
    let potential = s.potential.clone();
    let scheme = scheme.clone();
    let field = Field::derived(
        &format!("{} T", s.name),
        s.metric.domain().clone(),
        FieldShape::Sym2,
        1,
        move |x, order| codazzi_tensor_jets(&metric, &potential, &Point::new(x.to_vec())?, order, &scheme),
    );
    Sym2Field::new(field).expect("sym2 shape")
}

#[derive(Clone, Debug)]
pub struct LemmaReport {
    /// max-abs of ∇_k T_ij − ∇_j T_ik.
    pub codazzi: SweepStats,
    /// [∇_k Ric_ij − ∇_j Ric_ik − ½(∂_k R g_ij − ∂_j R g_ik)] e^{−f}.
    pub curvature_bracket: SweepStats,
    /// [S_ik ∂_j f − S_ij ∂_k f] e^{−f} with S = Ric − ½Rg.
    pub f_bracket: SweepStats,
    /// |C − (curvature bracket + f bracket)|.
    pub bracket_sum: SweepStats,
}

fn brackets(pc: &Pieces) -> (Tensor3, Tensor3) {
    let n = pc.geo.n();
    let nab = pc.geo.cov_deriv_sym2(&pc.ric);
    let dr = pc.r.gradient();
    let df = pc.f.gradient();
    let w = (-pc.f.value()).exp();
    let g = |i: usize, j: usize| pc.geo.metric()[i * n + j].value();
    let sv = |i: usize, j: usize| pc.ric[i * n + j].value() - 0.5 * pc.r.value() * g(i, j);
    let a = Tensor3::from_fn(n, |k, i, j| {
        let d = nab[(k * n + i) * n + j].value() - nab[(j * n + i) * n + k].value();
        (d - 0.5 * (dr[k] * g(i, j) - dr[j] * g(i, k))) * w
    });
    let b = Tensor3::from_fn(n, |k, i, j| (sv(i, k) * df[j] - sv(i, j) * df[k]) * w);
    (a, b)
}

pub fn verify_lemma(s: &SolitonInstance, grid: &Grid, scheme: &DiffScheme) -> Result<LemmaReport> {
    let t = soliton_codazzi_tensor(s, scheme);
    let vals = sweep_map(grid.points(), |p| {
        let c = codazzi_deviation(&t, &s.metric, p, scheme)?;
        let (a, b) = brackets(&pieces(s, p, scheme)?);
        let n = a.n();
        let sum = Tensor3::from_fn(n, |k, i, j| a.get(k, i, j) + b.get(k, i, j));
        Ok([c.norm, a.max_abs(), b.max_abs(), sum.max_abs_diff(&c.c)])
    })?;
    let pts = grid.points();
    let col = |i: usize| SweepStats::from_values(pts, &vals.iter().map(|v| v[i]).collect::<Vec<_>>());
    Ok(LemmaReport {
        codazzi: col(0),
        curvature_bracket: col(1),
        f_bracket: col(2),
        bracket_sum: col(3),
    })
}

#[derive(Clone, Debug)]
pub struct TwoValueCheck {
    /// (multiplicity pattern, number of points), most frequent first.
    pub ricci_patterns: Vec<(Vec<usize>, usize)>,
    pub tensor_patterns: Vec<(Vec<usize>, usize)>,
    /// Per grid point; NaN where T has no (1, n−1) pattern.
    pub rho: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Every point has the pattern and σ varies by at most 1e−8.
    pub sigma_constant: bool,
    /// 1 − |g(v_ρ, e)| with e the unit vector of the split axis.
    pub alignment: Option<SweepStats>,
}

fn tally(patterns: Vec<Vec<usize>>) -> Vec<(Vec<usize>, usize)> {
    let mut out: Vec<(Vec<usize>, usize)> = Vec::new();
    for p in patterns {
        match out.iter_mut().find(|(q, _)| *q == p) {
            Some(e) => e.1 += 1,
            None => out.push((p, 1)),
        }
    }
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

pub fn eigen_two_value_check(s: &SolitonInstance, grid: &Grid, scheme: &DiffScheme, tol: ClusterTol) -> Result<TwoValueCheck> {
    let t = soliton_codazzi_tensor(s, scheme);
    let per = sweep_map(grid.points(), |p| {
        let bundle = CurvatureBundle::compute(&s.metric, p, scheme)?;
        let ric = generalized_eigenstructure(&bundle.ricci, &bundle.g, tol)?;
        let te = generalized_eigenstructure(&t.value(p)?, &bundle.g, tol)?;
        let (rho, sigma, align) = match (&te.two_value, s.split_axis) {
            (Some(tv), axis) => {
                let align = axis.map(|a| {
                    let gv = &bundle.g * &tv.rho_vector;
                    1.0 - gv[a].abs() / bundle.g[(a, a)].sqrt()
                });
                (tv.rho, tv.sigma, align.map(f64::abs))
            }
            (None, axis) => (f64::NAN, f64::NAN, axis.map(|_| f64::INFINITY)),
        };
        Ok((ric.pattern(), te.pattern(), rho, sigma, align))
    })?;
    let sigma: Vec<f64> = per.iter().map(|v| v.3).collect();
    let (lo, hi) = sigma.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let sigma_constant = !sigma.is_empty() && sigma.iter().all(|v| v.is_finite()) && hi - lo <= 1e-8;
    let alignment = s.split_axis.map(|_| {
        let v: Vec<f64> = per.iter().map(|x| x.4.unwrap_or(f64::INFINITY)).collect();
        SweepStats::from_values(grid.points(), &v)
    });
    Ok(TwoValueCheck {
        ricci_patterns: tally(per.iter().map(|v| v.0.clone()).collect()),
        tensor_patterns: tally(per.iter().map(|v| v.1.clone()).collect()),
        rho: per.iter().map(|v| v.2).collect(),
        sigma,
        sigma_constant,
        alignment,
    })
}

/// (1,1)-form g⁻¹T of a symmetric tensor at a point.
pub fn mixed_form(t: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(crate::linalg::metric_inverse(g)? * t)
}
