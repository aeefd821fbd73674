//! Differentiation engine: exact jets when a field declares them, otherwise
//! tensor-product central differences with optional Richardson extrapolation.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::chart::Point;
use crate::error::{GeomError, Result};
use crate::field::{Field, JetKind, MetricField, ScalarField, Sym2Field};
use crate::jet::{multi_indices, Jet, MAX_ORDER};

/// Finite-difference configuration.
///
/// Orders 1–2 use `step`, order 3 uses `step3`; both are multiplied by the
/// per-axis factor in `axis_scale` (missing entries mean 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiffScheme {
    #[serde(rename = "h")]
    pub step: f64,
    #[serde(rename = "h3")]
    pub step3: f64,
    pub stencil_order: u8,
    pub richardson_levels: u8,
    pub max_order: u8,
    pub use_exact_jets: bool,
    pub axis_scale: Vec<f64>,
}

impl Default for DiffScheme {
    fn default() -> Self {
        DiffScheme {
            step: 1e-2,
            step3: 2e-2,
            stencil_order: 4,
            richardson_levels: 1,
            max_order: 3,
            use_exact_jets: true,
            axis_scale: Vec::new(),
        }
    }
}

impl DiffScheme {
    pub fn finite_differences() -> Self {
        DiffScheme {
            use_exact_jets: false,
            ..Self::default()
        }
    }

    pub fn with_axis_scale(mut self, scale: Vec<f64>) -> Self {
        self.axis_scale = scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(GeomError::Config(m));
        if !(self.step > 0.0 && self.step.is_finite()) || !(self.step3 > 0.0 && self.step3.is_finite()) {
            return bad(format!("steps must be positive (h = {}, h3 = {})", self.step, self.step3));
        }
        if self.stencil_order != 2 && self.stencil_order != 4 {
            return bad(format!("stencil order {} not in {{2, 4}}", self.stencil_order));
        }
        if self.richardson_levels > 1 {
            return bad(format!("richardson levels {} not in {{0, 1}}", self.richardson_levels));
        }
        if self.max_order == 0 || self.max_order as usize > MAX_ORDER {
            return bad(format!("max derivative order {} not in 1..=3", self.max_order));
        }
        if self.axis_scale.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return bad("axis scale factors must be positive".into());
        }
        Ok(())
    }

    /// Truncation order of the extrapolated stencil.
    pub fn effective_order(&self) -> u32 {
        self.stencil_order as u32 + 2 * self.richardson_levels as u32
    }

    pub fn step_for(&self, axis: usize, deriv_order: usize) -> f64 {
        let base = if deriv_order >= 3 { self.step3 } else { self.step };
        base * self.axis_scale.get(axis).copied().unwrap_or(1.0)
    }

    /// Largest stencil excursion along `axis`.
    pub fn reach(&self, axis: usize) -> f64 {
        (1..=self.max_order as usize)
            .map(|m| half_width(m, self.stencil_order) as f64 * self.step_for(axis, m))
            .fold(0.0, f64::max)
    }

    /// Sampling inset that keeps every stencil inside a box: twice the reach.
    pub fn margin(&self, dim: usize) -> f64 {
        (0..dim).map(|a| 2.0 * self.reach(a)).fold(0.0, f64::max)
    }
}

/// Central-difference weights `(offset, weight)` for the `order`-th derivative.
fn stencil(order: usize, accuracy: u8) -> &'static [(i32, f64)] {
    const D1_2: [(i32, f64); 2] = [(-1, -0.5), (1, 0.5)];
    const D1_4: [(i32, f64); 4] = [(-2, 1.0 / 12.0), (-1, -2.0 / 3.0), (1, 2.0 / 3.0), (2, -1.0 / 12.0)];
    const D2_2: [(i32, f64); 3] = [(-1, 1.0), (0, -2.0), (1, 1.0)];
    const D2_4: [(i32, f64); 5] = [
        (-2, -1.0 / 12.0),
        (-1, 4.0 / 3.0),
        (0, -2.5),
        (1, 4.0 / 3.0),
        (2, -1.0 / 12.0),
    ];
    const D3_2: [(i32, f64); 4] = [(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)];
    const D3_4: [(i32, f64); 6] = [
        (-3, 0.125),
        (-2, -1.0),
        (-1, 1.625),
        (1, -1.625),
        (2, 1.0),
        (3, -0.125),
    ];
    match (order, accuracy) {
        (1, 2) => &D1_2,
        (1, _) => &D1_4,
        (2, 2) => &D2_2,
        (2, _) => &D2_4,
        (3, 2) => &D3_2,
        (3, _) => &D3_4,
        _ => unreachable!("derivative order {order} unsupported"),
    }
}

fn half_width(order: usize, accuracy: u8) -> i32 {
    stencil(order, accuracy).iter().map(|(o, _)| o.abs()).max().unwrap_or(0)
}

/// Memoized field evaluations for one differentiation site.
struct EvalCache<'a> {
    field: &'a Field,
    memo: HashMap<Vec<u64>, Vec<f64>>,
}

impl<'a> EvalCache<'a> {
    fn new(field: &'a Field) -> Self {
        EvalCache {
            field,
            memo: HashMap::new(),
        }
    }

    fn eval(&mut self, x: &[f64]) -> Result<&[f64]> {
        let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
        if !self.memo.contains_key(&key) {
            let v = self.field.eval(x)?;
            self.memo.insert(key.clone(), v);
        }
        Ok(&self.memo[&key])
    }
}

fn check_stencil_inside(field: &Field, p: &[f64], alpha: &[usize], scheme: &DiffScheme) -> Result<()> {
    let total: usize = alpha.iter().sum();
    for (axis, &a) in alpha.iter().enumerate() {
        if a == 0 {
            continue;
        }
        let ax = field.domain().axis(axis);
        if ax.periodic {
            continue;
        }
        let reach = half_width(a, scheme.stencil_order) as f64 * scheme.step_for(axis, total);
        for c in [p[axis] - reach, p[axis] + reach] {
            if !(c >= ax.lower && c <= ax.upper) {
                return Err(GeomError::Domain {
                    axis,
                    coord: c,
                    lower: ax.lower,
                    upper: ax.upper,
                });
            }
        }
    }
    Ok(())
}

/// One tensor-product stencil application at uniform refinement `scale`.
fn fd_apply(cache: &mut EvalCache, p: &[f64], alpha: &[usize], scheme: &DiffScheme, scale: f64) -> Result<Vec<f64>> {
    let total: usize = alpha.iter().sum();
    let axes: Vec<(usize, usize, f64)> = alpha
        .iter()
        .enumerate()
        .filter(|(_, &a)| a > 0)
        .map(|(axis, &a)| (axis, a, scheme.step_for(axis, total) * scale))
        .collect();
    let stencils: Vec<&[(i32, f64)]> = axes.iter().map(|&(_, a, _)| stencil(a, scheme.stencil_order)).collect();
    let comps = cache.field.components();
    let mut acc = vec![0.0; comps];
    let mut idx = vec![0usize; axes.len()];
    loop {
        let mut x = p.to_vec();
        let mut w = 1.0;
        for (k, &(axis, _, h)) in axes.iter().enumerate() {
            let (o, wt) = stencils[k][idx[k]];
            x[axis] = p[axis] + o as f64 * h;
            w *= wt;
        }
        if w != 0.0 {
            let v = cache.eval(&x)?;
            for (a, b) in acc.iter_mut().zip(v) {
                *a += w * b;
            }
        }
        // odometer over the stencil product
        let mut k = 0;
        loop {
            if k == axes.len() {
                let denom: f64 = axes.iter().map(|&(_, a, h)| h.powi(a as i32)).product();
                return Ok(acc.into_iter().map(|v| v / denom).collect());
            }
            idx[k] += 1;
            if idx[k] < stencils[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn fd_partial_cached(cache: &mut EvalCache, p: &[f64], alpha: &[usize], scheme: &DiffScheme) -> Result<Vec<f64>> {
    let total: usize = alpha.iter().sum();
    if total == 0 {
        return Ok(cache.eval(p)?.to_vec());
    }
    if total > scheme.max_order as usize {
        return Err(GeomError::Config(format!(
            "derivative order {total} exceeds scheme maximum {}",
            scheme.max_order
        )));
    }
    check_stencil_inside(cache.field, p, alpha, scheme)?;
    let coarse = fd_apply(cache, p, alpha, scheme, 1.0)?;
    if scheme.richardson_levels == 0 {
        return Ok(coarse);
    }
    let fine = fd_apply(cache, p, alpha, scheme, 0.5)?;
    let f = 2f64.powi(scheme.stencil_order as i32);
    Ok(fine.iter().zip(&coarse).map(|(a, b)| (f * a - b) / (f - 1.0)).collect())
}

/// Finite-difference partial derivative, all components.
pub fn fd_partial(field: &Field, p: &Point, alpha: &[usize], scheme: &DiffScheme) -> Result<Vec<f64>> {
    scheme.validate()?;
    check_alpha(field, alpha)?;
    let mut cache = EvalCache::new(field);
    fd_partial_cached(&mut cache, p.coords(), alpha, scheme)
}

fn check_alpha(field: &Field, alpha: &[usize]) -> Result<()> {
    if alpha.len() != field.dim() {
        return Err(GeomError::Dimension {
            expected: field.dim(),
            found: alpha.len(),
        });
    }
    Ok(())
}

fn use_jets(field: &Field, order: usize, scheme: &DiffScheme) -> bool {
    order <= field.jet_order()
        && match field.jet_kind() {
            JetKind::ClosedForm => scheme.use_exact_jets,
            JetKind::Derived => true,
            JetKind::None => order == 0,
        }
}

/// `∂^α` of every component of `field` at `p`.
///
/// Exact jets are used when the field declares them to sufficient order and
/// the scheme allows it; otherwise central differences.
pub fn partial_derivative(field: &Field, p: &Point, alpha: &[usize], scheme: &DiffScheme) -> Result<Vec<f64>> {
    check_alpha(field, alpha)?;
    let total: usize = alpha.iter().sum();
    if use_jets(field, total, scheme) {
        let jets = field.exact_jet(p.coords(), total)?;
        return Ok(jets.iter().map(|j| j.partial(alpha).expect("order checked")).collect());
    }
    fd_partial(field, p, alpha, scheme)
}

/// Taylor jets of all components of `field` at `p` up to `order`.
pub fn field_jet(field: &Field, p: &Point, order: usize, scheme: &DiffScheme) -> Result<Vec<Jet>> {
    if p.dim() != field.dim() {
        return Err(GeomError::Dimension {
            expected: field.dim(),
            found: p.dim(),
        });
    }
    if order > MAX_ORDER {
        return Err(GeomError::Config(format!("jet order {order} above {MAX_ORDER}")));
    }
    if use_jets(field, order, scheme) {
        return field.exact_jet(p.coords(), order);
    }
    fd_jet(field, p, order, scheme)
}

/// Jets assembled from finite-difference partials (no exact jets consulted).
pub fn fd_jet(field: &Field, p: &Point, order: usize, scheme: &DiffScheme) -> Result<Vec<Jet>> {
    scheme.validate()?;
    let n = field.dim();
    let mut cache = EvalCache::new(field);
    let alphas = multi_indices(n, order);
    let mut partials = vec![Vec::with_capacity(alphas.len()); field.components()];
    for alpha in &alphas {
        let d = fd_partial_cached(&mut cache, p.coords(), alpha, scheme)?;
        for (c, v) in d.into_iter().enumerate() {
            partials[c].push(v);
        }
    }
    Ok(partials.iter().map(|ps| Jet::from_partials(n, order, ps)).collect())
}

impl ScalarField {
    pub fn partial(&self, p: &Point, alpha: &[usize], scheme: &DiffScheme) -> Result<f64> {
        Ok(partial_derivative(self.field(), p, alpha, scheme)?[0])
    }
}

impl MetricField {
    pub fn partial(&self, p: &Point, alpha: &[usize], scheme: &DiffScheme) -> Result<DMatrix<f64>> {
        let v = partial_derivative(self.field(), p, alpha, scheme)?;
        Ok(crate::field::to_matrix(self.dim(), &v))
    }
}

impl Sym2Field {
    pub fn partial(&self, p: &Point, alpha: &[usize], scheme: &DiffScheme) -> Result<DMatrix<f64>> {
        let v = partial_derivative(self.field(), p, alpha, scheme)?;
        Ok(crate::field::to_matrix(self.dim(), &v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{Axis, CoordinateBox};
    use crate::field::Formula;
    use crate::jet::Real;

    fn line(lo: f64, hi: f64) -> CoordinateBox {
        CoordinateBox::new(vec![Axis::interval(lo, hi)]).unwrap()
    }

    #[test]
    fn quadratic_first_derivative() {
        let f = ScalarField::from_fn("t2", line(0.0, 10.0), |x| vec![x[0] * x[0]]);
        let p = Point::new(vec![3.0]).unwrap();
        let d = f.partial(&p, &[1], &DiffScheme::default()).unwrap();
        assert!((d - 6.0).abs() < 1e-10);
    }

    #[test]
    fn periodic_sine_at_seam() {
        let bx = CoordinateBox::new(vec![Axis::circle()]).unwrap();
        let f = ScalarField::from_fn("sin", bx, |x| vec![x[0].sin()]);
        let p = Point::new(vec![0.0]).unwrap();
        let d = f.partial(&p, &[1], &DiffScheme::default()).unwrap();
        assert!((d - 1.0).abs() < 1e-8);
    }

    #[test]
    fn stencil_leaving_box_is_domain_error() {
        let f = ScalarField::from_fn("t", line(0.0, 1.0), |x| vec![x[0]]);
        let p = Point::new(vec![0.01]).unwrap();
        let err = f.partial(&p, &[1], &DiffScheme::default()).unwrap_err();
        assert!(matches!(err, GeomError::Domain { .. }));
    }

    #[test]
    fn order_beyond_scheme_is_config_error() {
        let f = ScalarField::from_fn("t", line(-1.0, 1.0), |x| vec![x[0]]);
        let p = Point::new(vec![0.0]).unwrap();
        let scheme = DiffScheme {
            max_order: 2,
            ..DiffScheme::default()
        };
        assert!(matches!(f.partial(&p, &[3], &scheme), Err(GeomError::Config(_))));
        let bad = DiffScheme {
            stencil_order: 3,
            ..DiffScheme::default()
        };
        assert!(matches!(f.partial(&p, &[1], &bad), Err(GeomError::Config(_))));
    }

    #[test]
    fn mixed_partials_symmetric() {
        let bx = CoordinateBox::new(vec![Axis::interval(-1.0, 1.0), Axis::interval(-1.0, 1.0)]).unwrap();
        let f = ScalarField::from_fn("e", bx, |x| vec![(x[0] * x[1]).sin() + x[0].exp() * x[1]]);
        let p = Point::new(vec![0.2, -0.3]).unwrap();
        let s = DiffScheme::default();
        let a = f.partial(&p, &[2, 1], &s).unwrap();
        let exact = {
            let (x, y) = (0.2f64, -0.3f64);
            // ∂x²∂y of sin(xy) + e^x y
            -2.0 * y * (x * y).sin() - x * y * y * (x * y).cos() + x.exp()
        };
        assert!((a - exact).abs() < 1e-7, "{a} vs {exact}");
        let b = f.partial(&p, &[1, 1], &s).unwrap();
        let c = crate::diff::fd_partial(f.field(), &p, &[1, 1], &s).unwrap()[0];
        assert_eq!(b, c);
    }

    #[test]
    fn exact_jets_preferred_when_declared() {
        struct Cube;
        impl Formula for Cube {
            fn eval<R: Real>(&self, x: &[R]) -> Vec<R> {
                vec![x[0] * x[0] * x[0]]
            }
        }
        let f = ScalarField::closed_form("cube", line(-1.0, 1.0), Cube);
        let p = Point::new(vec![0.999]).unwrap();
        // stencil would leave the box; exact jets do not need one
        let d = f.partial(&p, &[3], &DiffScheme::default()).unwrap();
        assert_eq!(d, 6.0);
        assert!(f.partial(&p, &[3], &DiffScheme::finite_differences()).is_err());
    }

    #[test]
    fn fd_jet_matches_exact_jet() {
        struct F;
        impl Formula for F {
            fn eval<R: Real>(&self, x: &[R]) -> Vec<R> {
                vec![(x[0] * 0.5).exp() * x[1].sin()]
            }
        }
        let bx = CoordinateBox::new(vec![Axis::interval(-2.0, 2.0), Axis::circle()]).unwrap();
        let f = ScalarField::closed_form("f", bx, F);
        let p = Point::new(vec![0.3, 1.1]).unwrap();
        let s = DiffScheme::default();
        let fd = fd_jet(f.field(), &p, 3, &s).unwrap();
        let ex = f.field().exact_jet(p.coords(), 3).unwrap();
        for (a, b) in fd[0].coeffs().iter().zip(ex[0].coeffs()) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn margin_covers_reach() {
        let s = DiffScheme::default();
        assert!((s.reach(0) - 0.06).abs() < 1e-15);
        assert!((s.margin(3) - 0.12).abs() < 1e-15);
        let s2 = s.clone().with_axis_scale(vec![0.5]);
        assert!((s2.reach(0) - 0.03).abs() < 1e-15);
        assert_eq!(s.effective_order(), 6);
    }
}
