//! Scalar and symmetric 2-tensor fields on a chart.
//!
//! A field is a pure map from chart coordinates to a value. Fields written
//! as closed-form [`Formula`]s also provide exact jets: the same formula is
//! evaluated on [`Jet`] arguments. Derived fields (curvature-built tensors)
//! provide jets computed from the jets of the fields they are built from.

use nalgebra::DMatrix;
use std::sync::Arc;

use crate::chart::{CoordinateBox, Point};
use crate::error::{GeomError, Result};
use crate::jet::{Jet, Real, MAX_ORDER};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldShape {
    Scalar,
    /// Symmetric `n × n` matrix, stored row-major.
    Sym2,
}

impl FieldShape {
    pub fn components(&self, dim: usize) -> usize {
        match self {
            FieldShape::Scalar => 1,
            FieldShape::Sym2 => dim * dim,
        }
    }
}

/// Where a field's jets come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JetKind {
    /// Point evaluation only; derivatives by finite differences.
    None,
    /// Closed form evaluated in jet arithmetic (exact up to roundoff).
    ClosedForm,
    /// Built from other fields' jets (which may themselves be FD estimates).
    Derived,
}

/// A closed-form expression generic over the scalar type.
pub trait Formula: Send + Sync + 'static {
    /// Components at `x` (row-major for matrices).
    fn eval<R: Real>(&self, x: &[R]) -> Vec<R>;
}

pub trait FieldSource: Send + Sync {
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn jet_kind(&self) -> JetKind;
    /// Highest order for which [`FieldSource::jet`] is available.
    fn jet_order(&self) -> usize;
    fn jet(&self, x: &[f64], order: usize) -> Result<Vec<Jet>>;
}

struct ClosedForm<F>(F);

impl<F: Formula> FieldSource for ClosedForm<F> {
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.0.eval(x))
    }
    fn jet_kind(&self) -> JetKind {
        JetKind::ClosedForm
    }
    fn jet_order(&self) -> usize {
        MAX_ORDER
    }
    fn jet(&self, x: &[f64], order: usize) -> Result<Vec<Jet>> {
        Ok(self.0.eval(&Jet::variables(x, order)))
    }
}

type PointFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type JetFn = dyn Fn(&[f64], usize) -> Result<Vec<Jet>> + Send + Sync;

struct Sampled(Arc<PointFn>);

impl FieldSource for Sampled {
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok((self.0)(x))
    }
    fn jet_kind(&self) -> JetKind {
        JetKind::None
    }
    fn jet_order(&self) -> usize {
        0
    }
    fn jet(&self, x: &[f64], order: usize) -> Result<Vec<Jet>> {
        if order > 0 {
            return Err(GeomError::Config("sampled field has no exact jets".into()));
        }
        Ok((self.0)(x).into_iter().map(|v| Jet::constant(x.len(), 0, v)).collect())
    }
}

struct Derived {
    order: usize,
    f: Arc<JetFn>,
}

impl FieldSource for Derived {
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok((self.f)(x, 0)?.iter().map(|j| j.value()).collect())
    }
    fn jet_kind(&self) -> JetKind {
        JetKind::Derived
    }
    fn jet_order(&self) -> usize {
        self.order
    }
    fn jet(&self, x: &[f64], order: usize) -> Result<Vec<Jet>> {
        if order > self.order {
            return Err(GeomError::Config(format!(
                "derived field provides jets up to order {}, requested {order}",
                self.order
            )));
        }
        (self.f)(x, order)
    }
}

/// Coordinates of the new chart are `y[a] = x[perm[a]]`.
struct Permuted {
    inner: Field,
    perm: Vec<usize>,
}

impl Permuted {
    fn to_inner(&self, y: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; y.len()];
        for (a, &p) in self.perm.iter().enumerate() {
            x[p] = y[a];
        }
        x
    }

    fn reorder<T: Copy>(&self, vals: &[T]) -> Vec<T> {
        match self.inner.shape {
            FieldShape::Scalar => vals.to_vec(),
            FieldShape::Sym2 => {
                let n = self.perm.len();
                let mut out = Vec::with_capacity(n * n);
                for a in 0..n {
                    for b in 0..n {
                        out.push(vals[self.perm[a] * n + self.perm[b]]);
                    }
                }
                out
            }
        }
    }
}

impl FieldSource for Permuted {
    fn eval(&self, y: &[f64]) -> Result<Vec<f64>> {
        Ok(self.reorder(&self.inner.eval(&self.to_inner(y))?))
    }
    fn jet_kind(&self) -> JetKind {
        self.inner.jet_kind()
    }
    fn jet_order(&self) -> usize {
        self.inner.jet_order()
    }
    fn jet(&self, y: &[f64], order: usize) -> Result<Vec<Jet>> {
        let jets = self.inner.exact_jet(&self.to_inner(y), order)?;
        let jets: Vec<Jet> = jets.iter().map(|j| j.permute_vars(&self.perm)).collect();
        Ok(self.reorder(&jets))
    }
}

/// Restriction to the coordinate hypersurface `x[axis] = value`.
struct Restricted {
    inner: Field,
    axis: usize,
    value: f64,
}

impl Restricted {
    fn lift(&self, y: &[f64]) -> Vec<f64> {
        let mut x = y.to_vec();
        x.insert(self.axis, self.value);
        x
    }

    fn select<T: Copy>(&self, vals: &[T]) -> Vec<T> {
        match self.inner.shape {
            FieldShape::Scalar => vals.to_vec(),
            FieldShape::Sym2 => {
                let n = self.inner.dim();
                let mut out = Vec::with_capacity((n - 1) * (n - 1));
                for a in (0..n).filter(|&a| a != self.axis) {
                    for b in (0..n).filter(|&b| b != self.axis) {
                        out.push(vals[a * n + b]);
                    }
                }
                out
            }
        }
    }
}

impl FieldSource for Restricted {
    fn eval(&self, y: &[f64]) -> Result<Vec<f64>> {
        Ok(self.select(&self.inner.eval(&self.lift(y))?))
    }
    fn jet_kind(&self) -> JetKind {
        self.inner.jet_kind()
    }
    fn jet_order(&self) -> usize {
        self.inner.jet_order()
    }
    fn jet(&self, y: &[f64], order: usize) -> Result<Vec<Jet>> {
        let jets = self.inner.exact_jet(&self.lift(y), order)?;
        let jets: Vec<Jet> = jets.iter().map(|j| j.drop_var(self.axis)).collect();
        Ok(self.select(&jets))
    }
}

/// A field on a chart: name, domain box, value shape and source.
#[derive(Clone)]
pub struct Field {
    name: Arc<str>,
    domain: CoordinateBox,
    shape: FieldShape,
    source: Arc<dyn FieldSource>,
}

impl std::fmt::Debug for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Field")
            .field("name", &self.name)
            .field("shape", &self.shape)
            .field("dim", &self.dim())
            .field("jet_kind", &self.jet_kind())
            .finish()
    }
}

impl Field {
    pub fn closed_form<F: Formula>(name: &str, domain: CoordinateBox, shape: FieldShape, formula: F) -> Self {
        Field {
            name: name.into(),
            domain,
            shape,
            source: Arc::new(ClosedForm(formula)),
        }
    }

    pub fn from_fn(
        name: &str,
        domain: CoordinateBox,
        shape: FieldShape,
        f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Field {
            name: name.into(),
            domain,
            shape,
            source: Arc::new(Sampled(Arc::new(f))),
        }
    }

    pub fn derived(
        name: &str,
        domain: CoordinateBox,
        shape: FieldShape,
        jet_order: usize,
        f: impl Fn(&[f64], usize) -> Result<Vec<Jet>> + Send + Sync + 'static,
    ) -> Self {
        Field {
            name: name.into(),
            domain,
            shape,
            source: Arc::new(Derived {
                order: jet_order,
                f: Arc::new(f),
            }),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &CoordinateBox {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn shape(&self) -> FieldShape {
        self.shape
    }

    pub fn components(&self) -> usize {
        self.shape.components(self.dim())
    }

    pub fn jet_kind(&self) -> JetKind {
        self.source.jet_kind()
    }

    pub fn jet_order(&self) -> usize {
        self.source.jet_order()
    }

    fn prepare(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.domain.check(x)?;
        Ok(self.domain.wrap(x))
    }

    fn check_output(&self, vals: &[f64]) -> Result<()> {
        if vals.len() != self.components() {
            return Err(GeomError::Dimension {
                expected: self.components(),
                found: vals.len(),
            });
        }
        if let Some(&bad) = vals.iter().find(|v| !v.is_finite()) {
            return Err(GeomError::NonFinite {
                what: format!("field {}", self.name),
                value: bad,
            });
        }
        Ok(())
    }

    /// Components at raw coordinates (periodic axes reduced first).
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let x = self.prepare(x)?;
        let vals = self.source.eval(&x)?;
        self.check_output(&vals)?;
        Ok(vals)
    }

    /// Jets from the field's own source, ignoring any scheme preference.
    pub fn exact_jet(&self, x: &[f64], order: usize) -> Result<Vec<Jet>> {
        if order > self.jet_order() {
            return Err(GeomError::Config(format!(
                "field {} declares jets up to order {}, requested {order}",
                self.name,
                self.jet_order()
            )));
        }
        let x = self.prepare(x)?;
        let jets = self.source.jet(&x, order)?;
        let vals: Vec<f64> = jets.iter().map(|j| j.value()).collect();
        self.check_output(&vals)?;
        Ok(jets)
    }

    fn permuted(&self, perm: &[usize]) -> Result<Field> {
        let n = self.dim();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(GeomError::Config(format!("{perm:?} is not a permutation of {n} axes")));
        }
        Ok(Field {
            name: format!("{}[perm {perm:?}]", self.name).into(),
            domain: self.domain.permuted(perm)?,
            shape: self.shape,
            source: Arc::new(Permuted {
                inner: self.clone(),
                perm: perm.to_vec(),
            }),
        })
    }

    fn restricted(&self, axis: usize, value: f64) -> Result<Field> {
        if axis >= self.dim() || self.dim() < 2 {
            return Err(GeomError::Dimension {
                expected: self.dim(),
                found: axis,
            });
        }
        Ok(Field {
            name: format!("{}|x{axis}={value}", self.name).into(),
            domain: self.domain.without_axis(axis)?,
            shape: self.shape,
            source: Arc::new(Restricted {
                inner: self.clone(),
                axis,
                value,
            }),
        })
    }
}

pub(crate) fn to_matrix(n: usize, vals: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, vals)
}

fn symmetric_matrix(field: &Field, p: &Point) -> Result<DMatrix<f64>> {
    let vals = field.eval(p.coords())?;
    let n = field.dim();
    let m = to_matrix(n, &vals);
    let scale = m.amax().max(1.0);
    for i in 0..n {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                return Err(GeomError::Assumption(format!(
                    "{} not symmetric at {p}: entry ({i},{j})",
                    field.name()
                )));
            }
        }
    }
    Ok(m)
}

macro_rules! field_newtype {
    ($name:ident, $shape:expr, $what:literal) => {
        #[derive(Clone, Debug)]
        pub struct $name(Field);

        impl $name {
            pub fn new(field: Field) -> Result<Self> {
                if field.shape() != $shape {
                    return Err(GeomError::Config(format!(
                        "field {} has shape {:?}, expected a {}",
                        field.name(),
                        field.shape(),
                        $what
                    )));
                }
                Ok($name(field))
            }

            pub fn closed_form<F: Formula>(name: &str, domain: CoordinateBox, formula: F) -> Self {
                $name(Field::closed_form(name, domain, $shape, formula))
            }

            pub fn from_fn(
                name: &str,
                domain: CoordinateBox,
                f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
            ) -> Self {
                $name(Field::from_fn(name, domain, $shape, f))
            }

            pub fn field(&self) -> &Field {
                &self.0
            }

            pub fn dim(&self) -> usize {
                self.0.dim()
            }

            pub fn domain(&self) -> &CoordinateBox {
                self.0.domain()
            }

            pub fn name(&self) -> &str {
                self.0.name()
            }
        }
    };
}

field_newtype!(ScalarField, FieldShape::Scalar, "scalar");
field_newtype!(MetricField, FieldShape::Sym2, "metric");
field_newtype!(Sym2Field, FieldShape::Sym2, "symmetric 2-tensor");

impl ScalarField {
    pub fn value(&self, p: &Point) -> Result<f64> {
        Ok(self.0.eval(p.coords())?[0])
    }
}

impl Sym2Field {
    pub fn value(&self, p: &Point) -> Result<DMatrix<f64>> {
        symmetric_matrix(&self.0, p)
    }

    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        Ok(Sym2Field(self.0.permuted(perm)?))
    }
}

impl MetricField {
    /// Metric matrix at `p`; errors if it is not symmetric positive definite.
    pub fn value(&self, p: &Point) -> Result<DMatrix<f64>> {
        let g = symmetric_matrix(&self.0, p)?;
        crate::linalg::metric_inverse(&g)?;
        Ok(g)
    }

    /// The same metric as a symmetric 2-tensor field (e.g. `T = g`).
    pub fn as_sym2(&self) -> Sym2Field {
        Sym2Field(self.0.clone())
    }

    /// Same metric in reordered coordinates `y[a] = x[perm[a]]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        Ok(MetricField(self.0.permuted(perm)?))
    }

    /// Induced metric on the coordinate hypersurface `x[axis] = value`.
    pub fn restricted(&self, axis: usize, value: f64) -> Result<Self> {
        Ok(MetricField(self.0.restricted(axis, value)?))
    }
}
