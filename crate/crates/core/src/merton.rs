//! The two-eigenvalue Codazzi example on ℝ×S¹×S¹:
//! g = (σ−ρ)⁻² dt² + σ dx² + σ dy², T_tt = ρ(σ−ρ)⁻², T_xx = T_yy = σ².
//!
//! σ(t) rises 1 → 2 on (−∞,−1), is 2 on [−1,1] and rises 2 → 3 on (1,∞);
//! ρ = 3σ + A b(t)(sin x + sin y) with the bump b(t) = exp(−1/(1−t²)) on (−1,1).

use serde::{Deserialize, Serialize};

use crate::chart::{Axis, CoordinateBox, Grid, Point};
use crate::codazzi::{codazzi_deviation, generalized_eigenstructure, sweep, sweep_map, ClusterTol, SweepStats};
use crate::curvature::{christoffel, cov_deriv_sym2};
use crate::diff::DiffScheme;
use crate::error::{GeomError, Result};
use crate::field::{Formula, MetricField, ScalarField, Sym2Field};
use crate::jet::{flat_bump, smooth_step, Jet, Real};
use crate::linalg::Tensor3;

/// Bump amplitude beyond which σ − ρ could approach zero.
pub const MAX_AMPLITUDE: f64 = 4.0;

/// Step-size factor on the t axis for finite differences: the profiles have
/// boundary layers near |t| = 1 that the default step does not resolve.
/// Smaller factors lose third derivatives to roundoff.
pub const T_STEP_SCALE: f64 = 0.15;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MertonParams {
    /// A in ρ = 3σ + A b(t)(sin x + sin y).
    pub amplitude: f64,
}

impl Default for MertonParams {
    fn default() -> Self {
        MertonParams { amplitude: 1.0 }
    }
}

impl MertonParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite() && self.amplitude.abs() <= MAX_AMPLITUDE) {
            return Err(GeomError::Config(format!(
                "bump amplitude {} outside [-{MAX_AMPLITUDE}, {MAX_AMPLITUDE}]",
                self.amplitude
            )));
        }
        Ok(())
    }
}

/// σ(t) with all derivatives.
pub fn sigma_profile<R: Real>(t: R) -> R {
    let v = t.value();
    if v < -1.0 {
        smooth_step((t + 1.0).exp()) + 1.0
    } else if v <= 1.0 {
        t.lift(2.0)
    } else {
        smooth_step(-(-t + 1.0).exp() + 1.0) + 2.0
    }
}

/// b(t) = exp(−1/(1−t²)) on (−1,1), zero outside.
pub fn bump_profile<R: Real>(t: R) -> R {
    flat_bump(-(t * t) + 1.0)
}

fn rho_of<R: Real>(amp: f64, x: &[R]) -> R {
    sigma_profile(x[0]) * 3.0 + bump_profile(x[0]) * (x[1].sin() + x[2].sin()) * amp
}

struct Sigma;
impl Formula for Sigma {
    fn eval<R: Real>(&self, x: &[R]) -> Vec<R> {
        vec![sigma_profile(x[0])]
    }
}

struct Rho(f64);
impl Formula for Rho {
    fn eval<R: Real>(&self, x: &[R]) -> Vec<R> {
        vec![rho_of(self.0, x)]
    }
}

struct Metric(f64);
impl Formula for Metric {
    fn eval<R: Real>(&self, x: &[R]) -> Vec<R> {
        let s = sigma_profile(x[0]);
        let gtt = (s - rho_of(self.0, x)).powi(-2);
        let z = x[0].lift(0.0);
        vec![gtt, z, z, z, s, z, z, z, s]
    }
}

/// T with T_yy scaled by (1 + ε); ε = 0 is the genuine tensor.
struct Tensor {
    amp: f64,
    eps: f64,
}
impl Formula for Tensor {
    fn eval<R: Real>(&self, x: &[R]) -> Vec<R> {
        let s = sigma_profile(x[0]);
        let r = rho_of(self.amp, x);
        let ttt = r * (s - r).powi(-2);
        let s2 = s * s;
        let z = x[0].lift(0.0);
        vec![ttt, z, z, z, s2, z, z, z, s2 * (1.0 + self.eps)]
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

#[derive(Clone, Debug)]
pub struct MertonExample {
    pub params: MertonParams,
    pub metric: MetricField,
    pub tensor: Sym2Field,
    pub sigma: ScalarField,
    pub rho: ScalarField,
}

impl MertonExample {
    pub fn new(params: MertonParams) -> Result<Self> {
        params.validate()?;
        let (sigma, rho) = build_profiles(&params)?;
        let a = params.amplitude;
        Ok(MertonExample {
            params,
            metric: MetricField::closed_form("merton g", Self::domain(), Metric(a)),
            tensor: Sym2Field::closed_form("merton T", Self::domain(), Tensor { amp: a, eps: 0.0 }),
            sigma,
            rho,
        })
    }

    /// t ∈ [−6, 6], x and y periodic with period 2π.
    pub fn domain() -> CoordinateBox {
        CoordinateBox::new(vec![Axis::interval(-6.0, 6.0), Axis::circle(), Axis::circle()]).expect("valid box")
    }

    /// `base` with the t-axis step scaled down, unless it already sets axis scales.
    pub fn scheme(base: &DiffScheme) -> DiffScheme {
        let mut s = base.clone();
        if s.axis_scale.is_empty() {
            s.axis_scale = vec![T_STEP_SCALE, 1.0, 1.0];
        }
        s
    }

    /// t from −3 to 3 (`res[0]` samples), x and y periodic.
    pub fn grid(res: &[usize]) -> Result<Grid> {
        if res.len() != 3 || res.iter().any(|&r| r < 2) {
            return Err(GeomError::Config(format!("merton grid needs 3 resolutions ≥ 2, got {res:?}")));
        }
        let nt = res[0] - 1;
        let ts: Vec<f64> = (0..=nt).map(|k| (6.0 * k as f64 - 3.0 * nt as f64) / nt as f64).collect();
        let per = |m: usize| -> Vec<f64> { (0..m).map(|k| std::f64::consts::TAU * k as f64 / m as f64).collect() };
        Grid::product(&[ts, per(res[1]), per(res[2])])
    }

    pub fn default_grid() -> Grid {
        Self::grid(&[61, 8, 8]).expect("valid resolution")
    }

    /// Negative control: T_yy = (1+ε)σ².
    pub fn broken_tensor(&self, eps: f64) -> Sym2Field {
        Sym2Field::closed_form(
            "merton T (broken)",
            Self::domain(),
            Tensor {
                amp: self.params.amplitude,
                eps,
            },
        )
    }
}

/// Negative control for the traced Codazzi–Mainardi check.
pub fn anisotropic_metric(a: f64) -> MetricField {
    MetricField::closed_form("anisotropic warp", MertonExample::domain(), Anisotropic(a))
}

pub fn build_profiles(params: &MertonParams) -> Result<(ScalarField, ScalarField)> {
    params.validate()?;
    Ok((
        ScalarField::closed_form("sigma", MertonExample::domain(), Sigma),
        ScalarField::closed_form("rho", MertonExample::domain(), Rho(params.amplitude)),
    ))
}

/// The closed-form Christoffel table, Γ^k_ij at `get(k, i, j)` (t = 0, x = 1, y = 2).
pub fn closed_form_christoffel(params: &MertonParams, p: &Point) -> Result<Tensor3> {
    if p.dim() != 3 {
        return Err(GeomError::Dimension {
            expected: 3,
            found: p.dim(),
        });
    }
    let v = Jet::variables(p.coords(), 1);
    let s = sigma_profile(v[0]);
    let r = rho_of(params.amplitude, &v);
    let (sv, ds) = (s.value(), s.gradient()[0]);
    let (rv, dr) = (r.value(), r.gradient());
    let d = sv - rv;
    if d == 0.0 {
        return Err(GeomError::DegenerateMetric { min_eigenvalue: 0.0 });
    }
    let mut g = Tensor3::zeros(3);
    g.set(0, 0, 0, -(ds - dr[0]) / d);
    for i in 1..3 {
        g.set(0, i, 0, dr[i] / d);
        g.set(0, 0, i, dr[i] / d);
        g.set(0, i, i, -d * d * ds / 2.0);
        g.set(i, 0, 0, -dr[i] / (sv * d.powi(3)));
        g.set(i, i, 0, ds / (2.0 * sv));
        g.set(i, 0, i, ds / (2.0 * sv));
    }
    Ok(g)
}

/// max |Γ_numeric − Γ_table| over the grid; `flip` negates the table.
pub fn christoffel_table_residual(ex: &MertonExample, grid: &Grid, scheme: &DiffScheme, flip: bool) -> Result<SweepStats> {
    let sign = if flip { -1.0 } else { 1.0 };
    sweep(grid.points(), |p| {
        let num = christoffel(&ex.metric, p, scheme)?;
        let table = closed_form_christoffel(&ex.params, p)?;
        Ok(Tensor3::from_fn(3, |a, b, c| sign * table.get(a, b, c)).max_abs_diff(&num))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TTxxCheck {
    /// ∇_t T_xx − ∇_x T_tx from the numeric pipeline.
    pub lhs: f64,
    /// (3σ − ρ)σ′/2 from the profiles.
    pub rhs: f64,
    pub diff: f64,
    pub dsigma: f64,
    pub rho_minus_3sigma: f64,
}

pub fn formula_residual_t_txx(ex: &MertonExample, p: &Point, scheme: &DiffScheme) -> Result<TTxxCheck> {
    let nab = cov_deriv_sym2(&ex.tensor, &ex.metric, p, scheme)?;
    let lhs = nab.get(0, 1, 1) - nab.get(1, 0, 1);
    let v = Jet::variables(p.coords(), 1);
    let s = sigma_profile(v[0]);
    let r = rho_of(ex.params.amplitude, &v).value();
    let ds = s.gradient()[0];
    let rhs = (3.0 * s.value() - r) * ds / 2.0;
    Ok(TTxxCheck {
        lhs,
        rhs,
        diff: (lhs - rhs).abs(),
        dsigma: ds,
        rho_minus_3sigma: r - 3.0 * s.value(),
    })
}

/// The five residual families C_kij (a, b leaf indices).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CodazziFamily {
    /// C_{a,i,b}, all leaf indices, a ≠ b.
    YxXx,
    /// C_{t,a,a}.
    TxXx,
    /// C_{a,t,t}.
    XtTt,
    /// C_{t,a,b}, a ≠ b.
    TyXy,
    /// C_{a,t,b}, a ≠ b.
    XyYx,
}

impl CodazziFamily {
    pub const ALL: [CodazziFamily; 5] = [
        CodazziFamily::YxXx,
        CodazziFamily::TxXx,
        CodazziFamily::XtTt,
        CodazziFamily::TyXy,
        CodazziFamily::XyYx,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            CodazziFamily::YxXx => "yx-xx",
            CodazziFamily::TxXx => "tx-xx",
            CodazziFamily::XtTt => "xt-tt",
            CodazziFamily::TyXy => "ty-xy",
            CodazziFamily::XyYx => "xy-yx",
        }
    }

    /// Family of C_kij up to the antisymmetry C_kij = −C_jik; `None` when k = j.
    pub fn of(k: usize, i: usize, j: usize) -> Option<CodazziFamily> {
        if k == j {
            return None;
        }
        // orient so that the first slot is t whenever t is among {k, j}
        let (k, j) = if j == 0 { (j, k) } else { (k, j) };
        Some(match (k, i) {
            (0, 0) => CodazziFamily::XtTt,
            (0, i) if i == j => CodazziFamily::TxXx,
            (0, _) => CodazziFamily::TyXy,
            (_, 0) => CodazziFamily::XyYx,
            _ => CodazziFamily::YxXx,
        })
    }
}

#[derive(Clone, Debug)]
pub struct CodazziFamilies {
    pub families: Vec<(CodazziFamily, SweepStats)>,
    pub global: SweepStats,
}

pub fn verify_all_codazzi_components(
    t: &Sym2Field,
    g: &MetricField,
    grid: &Grid,
    scheme: &DiffScheme,
) -> Result<CodazziFamilies> {
    let per_point = sweep_map(grid.points(), |p| {
        let c = codazzi_deviation(t, g, p, scheme)?;
        let mut worst = [0.0f64; 5];
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    if let Some(f) = CodazziFamily::of(k, i, j) {
                        let slot = CodazziFamily::ALL.iter().position(|x| *x == f).unwrap();
                        worst[slot] = worst[slot].max(c.c.get(k, i, j).abs());
                    }
                }
            }
        }
        Ok((worst, c.norm))
    })?;
    let pts = grid.points();
    let families = CodazziFamily::ALL
        .iter()
        .enumerate()
        .map(|(slot, f)| {
            let v: Vec<f64> = per_point.iter().map(|(w, _)| w[slot]).collect();
            (*f, SweepStats::from_values(pts, &v))
        })
        .collect();
    let norms: Vec<f64> = per_point.iter().map(|(_, n)| *n).collect();
    Ok(CodazziFamilies {
        families,
        global: SweepStats::from_values(pts, &norms),
    })
}

#[derive(Clone, Debug)]
pub struct EigenPatternCheck {
    /// Points without the (1,2) pattern.
    pub pattern_failures: usize,
    /// 1 − |v^t √g_tt| for the ρ eigenvector.
    pub alignment: SweepStats,
    /// |ρ − ρ(t,x,y)| + |σ − σ(t)|.
    pub eigenvalue_error: SweepStats,
    /// min of ρ − σ (must stay positive).
    pub min_gap: f64,
    /// max of σ − ρ from the profiles.
    pub max_sigma_minus_rho: f64,
}

pub fn eigen_pattern_check(ex: &MertonExample, grid: &Grid, tol: ClusterTol) -> Result<EigenPatternCheck> {
    let vals = sweep_map(grid.points(), |p| {
        let g = ex.metric.value(p)?;
        let e = generalized_eigenstructure(&ex.tensor.value(p)?, &g, tol)?;
        let r = ex.rho.value(p)?;
        let s = ex.sigma.value(p)?;
        Ok(match e.two_value {
            Some(tv) => (
                true,
                1.0 - (tv.rho_vector[0] * g[(0, 0)].sqrt()).abs(),
                (tv.rho - r).abs() + (tv.sigma - s).abs(),
                tv.rho - tv.sigma,
                s - r,
            ),
            None => (false, f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, s - r),
        })
    })?;
    let pts = grid.points();
    let col = |f: fn(&(bool, f64, f64, f64, f64)) -> f64| -> Vec<f64> { vals.iter().map(f).collect() };
    Ok(EigenPatternCheck {
        pattern_failures: vals.iter().filter(|v| !v.0).count(),
        alignment: SweepStats::from_values(pts, &col(|v| v.1.abs())),
        eigenvalue_error: SweepStats::from_values(pts, &col(|v| v.2)),
        min_gap: col(|v| v.3).into_iter().fold(f64::INFINITY, f64::min),
        max_sigma_minus_rho: col(|v| v.4).into_iter().fold(f64::NEG_INFINITY, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff::partial_derivative;

    fn pt(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    fn ex() -> MertonExample {
        MertonExample::new(MertonParams::default()).unwrap()
    }

    #[test]
    fn profile_values() {
        assert!((sigma_profile(-5.0) - 1.0).abs() < 1e-6);
        assert_eq!(sigma_profile(0.0), 2.0);
        assert!((sigma_profile(5.0) - 3.0).abs() < 1e-6);
        let e = ex();
        let r = e.rho.value(&pt(&[0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2])).unwrap();
        assert!((r - (6.0 + 2.0 * (-1.0f64).exp())).abs() < 1e-12);
        assert!((r - 6.735759).abs() < 1e-6);
    }

    #[test]
    fn sigma_derivative_vanishes_on_plateau() {
        let e = ex();
        let d = partial_derivative(e.metric.field(), &pt(&[0.0, 0.0, 0.0]), &[1, 0, 0], &DiffScheme::default()).unwrap();
        assert_eq!(d[4], 0.0);
        let d = partial_derivative(e.sigma.field(), &pt(&[0.0, 1.0, 1.0]), &[1, 0, 0], &MertonExample::scheme(&DiffScheme::finite_differences())).unwrap();
        assert!(d[0].abs() < 1e-12);
    }

    #[test]
    fn sigma_is_smooth_across_glue_points() {
        for t0 in [-1.0, 1.0] {
            for k in 0..4 {
                let l = Jet::variable(1, 3, t0 - 1e-9, 0);
                let r = Jet::variable(1, 3, t0 + 1e-9, 0);
                let mut alpha = [0usize];
                alpha[0] = k;
                let a = sigma_profile(l).partial(&alpha).unwrap();
                let b = sigma_profile(r).partial(&alpha).unwrap();
                assert!((a - b).abs() < 1e-6, "t0 {t0} order {k}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn monotone_and_bounded() {
        let mut prev = 0.0;
        for k in 0..=120 {
            let t = -6.0 + 0.1 * k as f64;
            let s = sigma_profile(t);
            assert!((1.0..=3.0).contains(&s));
            assert!(s >= prev);
            prev = s;
        }
        let d = sigma_profile(Jet::variable(1, 1, 2.0, 0)).gradient()[0];
        assert!(d > 0.0);
    }

    #[test]
    fn table_at_origin() {
        let g = closed_form_christoffel(&MertonParams::default(), &pt(&[0.0, 0.0, 0.0])).unwrap();
        assert!((g.get(0, 1, 0) + (-1.0f64).exp() / 4.0).abs() < 1e-15);
        assert!((g.get(0, 1, 0) + 0.0919699).abs() < 1e-7);
        assert_eq!(g.get(1, 1, 0), 0.0);
        let num = christoffel(&ex().metric, &pt(&[0.0, 0.0, 0.0]), &DiffScheme::default()).unwrap();
        assert!(num.max_abs_diff(&g) < 1e-14);
    }

    #[test]
    fn table_at_t2_uses_rho_3sigma() {
        let p = pt(&[2.0, 0.0, 0.0]);
        let g = closed_form_christoffel(&MertonParams::default(), &p).unwrap();
        let s = sigma_profile(Jet::variable(1, 1, 2.0, 0));
        let expect = -2.0 * s.value().powi(2) * s.gradient()[0];
        assert!((g.get(0, 1, 1) - expect).abs() < 1e-12);
    }

    #[test]
    fn t_txx_formula_cases() {
        let e = ex();
        let s = DiffScheme::default();
        let c = formula_residual_t_txx(&e, &pt(&[0.0, 0.3, 0.3]), &s).unwrap();
        assert_eq!(c.rhs, 0.0);
        let c = formula_residual_t_txx(&e, &pt(&[2.0, 0.3, 0.3]), &s).unwrap();
        assert_eq!(c.rhs, 0.0);
        assert!(c.lhs.abs() < 1e-12);
        let c = formula_residual_t_txx(&e, &pt(&[0.5, 0.3, 0.3]), &s).unwrap();
        assert_eq!(c.dsigma, 0.0);
        assert!(c.rho_minus_3sigma.abs() > 0.1);
        assert!(c.diff < 1e-12);
    }

    #[test]
    fn family_partition_covers_every_triple() {
        let mut count = 0;
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    match CodazziFamily::of(k, i, j) {
                        None => assert_eq!(k, j),
                        Some(f) => {
                            count += 1;
                            assert_eq!(Some(f), CodazziFamily::of(j, i, k));
                        }
                    }
                }
            }
        }
        assert_eq!(count, 18);
        assert_eq!(CodazziFamily::of(2, 1, 1), Some(CodazziFamily::YxXx));
        assert_eq!(CodazziFamily::of(0, 1, 1), Some(CodazziFamily::TxXx));
        assert_eq!(CodazziFamily::of(1, 0, 0), Some(CodazziFamily::XtTt));
        assert_eq!(CodazziFamily::of(0, 2, 1), Some(CodazziFamily::TyXy));
        assert_eq!(CodazziFamily::of(1, 0, 2), Some(CodazziFamily::XyYx));
    }

    #[test]
    fn broken_tensor_is_not_codazzi() {
        let e = ex();
        let grid = MertonExample::grid(&[13, 2, 2]).unwrap();
        let s = DiffScheme::default();
        let good = verify_all_codazzi_components(&e.tensor, &e.metric, &grid, &s).unwrap();
        assert!(good.global.max < 1e-10, "{}", good.global.max);
        let bad = verify_all_codazzi_components(&e.broken_tensor(1.0), &e.metric, &grid, &s).unwrap();
        assert!(bad.global.max > 1e-2);
    }

    #[test]
    fn amplitude_validated() {
        assert!(MertonExample::new(MertonParams { amplitude: 10.0 }).is_err());
    }
}
