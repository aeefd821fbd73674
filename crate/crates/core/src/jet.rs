//! Truncated multivariate Taylor polynomials ("jets").
//!
//! A [`Jet`] in `n` variables of order `k` stores the Taylor coefficients
//! `∂^α f(p) / α!` for every multi-index with `|α| ≤ k`. Evaluating a
//! closed-form expression with jet arguments yields its exact partial
//! derivatives up to order `k` (forward-mode automatic differentiation),
//! which is how fields declare exact jets.
//!
//! Arithmetic between jets of different order truncates to the smaller
//! order, so a pipeline that differentiates (Γ from ∂g, Riemann from ∂Γ)
//! naturally loses one order per derivative.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::OnceLock;

/// Largest supported number of variables.
pub const MAX_VARS: usize = 4;
/// Largest supported truncation order.
pub const MAX_ORDER: usize = 3;
/// Coefficient storage: C(MAX_VARS + MAX_ORDER, MAX_ORDER).
pub const MAX_COEFFS: usize = 35;

struct Layout {
    exps: Vec<[u8; MAX_VARS]>,
    count_upto: [usize; MAX_ORDER + 1],
    shift: Vec<[Option<usize>; MAX_VARS]>,
    triples: Vec<(usize, usize, usize)>,
    triples_upto: [usize; MAX_ORDER + 1],
    factorial: Vec<f64>,
}

fn monomials(nvars: usize, degree: usize) -> Vec<[u8; MAX_VARS]> {
    fn rec(axis: usize, nvars: usize, left: usize, cur: &mut [u8; MAX_VARS], out: &mut Vec<[u8; MAX_VARS]>) {
        if axis + 1 == nvars {
            cur[axis] = left as u8;
            out.push(*cur);
            cur[axis] = 0;
            return;
        }
        for e in (0..=left).rev() {
            cur[axis] = e as u8;
            rec(axis + 1, nvars, left - e, cur, out);
        }
        cur[axis] = 0;
    }
    let mut out = Vec::new();
    let mut cur = [0u8; MAX_VARS];
    if nvars == 0 {
        if degree == 0 {
            out.push(cur);
        }
        return out;
    }
    rec(0, nvars, degree, &mut cur, &mut out);
    out
}

impl Layout {
    fn build(nvars: usize) -> Self {
        let mut exps = Vec::new();
        let mut degree = Vec::new();
        let mut count_upto = [0; MAX_ORDER + 1];
        for d in 0..=MAX_ORDER {
            for e in monomials(nvars, d) {
                exps.push(e);
                degree.push(d);
            }
            count_upto[d] = exps.len();
        }
        let index_of = |e: &[u8; MAX_VARS]| exps.iter().position(|x| x == e);
        let shift = exps
            .iter()
            .map(|e| {
                let mut s = [None; MAX_VARS];
                for (axis, slot) in s.iter_mut().enumerate().take(nvars) {
                    let mut f = *e;
                    f[axis] += 1;
                    *slot = index_of(&f);
                }
                s
            })
            .collect();
        let mut triples = Vec::new();
        let mut triples_upto = [0; MAX_ORDER + 1];
        for d in 0..=MAX_ORDER {
            for (ci, ce) in exps.iter().enumerate().filter(|(i, _)| degree[*i] == d) {
                for (ai, ae) in exps.iter().enumerate() {
                    if (0..MAX_VARS).all(|k| ae[k] <= ce[k]) {
                        let mut be = *ce;
                        for k in 0..MAX_VARS {
                            be[k] -= ae[k];
                        }
                        let bi = index_of(&be).expect("complement monomial present");
                        triples.push((ai, bi, ci));
                    }
                }
            }
            triples_upto[d] = triples.len();
        }
        let factorial = exps
            .iter()
            .map(|e| e.iter().map(|&k| (1..=k as u32).product::<u32>() as f64).product())
            .collect();
        Layout {
            exps,
            count_upto,
            shift,
            triples,
            triples_upto,
            factorial,
        }
    }
}

fn layout(nvars: usize) -> &'static Layout {
    static LAYOUTS: OnceLock<Vec<Layout>> = OnceLock::new();
    &LAYOUTS.get_or_init(|| (0..=MAX_VARS).map(Layout::build).collect())[nvars]
}

/// Number of Taylor coefficients of a jet in `nvars` variables of order `order`.
pub fn coefficient_count(nvars: usize, order: usize) -> usize {
    layout(nvars).count_upto[order]
}

/// Multi-indices with `|α| ≤ order`, in the storage order used by [`Jet`].
pub fn multi_indices(nvars: usize, order: usize) -> Vec<Vec<usize>> {
    let lay = layout(nvars);
    lay.exps[..lay.count_upto[order]]
        .iter()
        .map(|e| e[..nvars].iter().map(|&k| k as usize).collect())
        .collect()
}

/// Truncated Taylor polynomial in up to four variables, order ≤ 3.
#[derive(Clone, Copy)]
pub struct Jet {
    nvars: u8,
    order: u8,
    c: [f64; MAX_COEFFS],
}

impl std::fmt::Debug for Jet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Jet")
            .field("nvars", &self.nvars)
            .field("order", &self.order)
            .field("coeffs", &self.coeffs())
            .finish()
    }
}

impl Jet {
    pub fn constant(nvars: usize, order: usize, value: f64) -> Self {
        assert!(nvars <= MAX_VARS && order <= MAX_ORDER, "jet layout out of range");
        let mut c = [0.0; MAX_COEFFS];
        c[0] = value;
        Jet {
            nvars: nvars as u8,
            order: order as u8,
            c,
        }
    }

    /// The coordinate function `x_axis` expanded about `value`.
    pub fn variable(nvars: usize, order: usize, value: f64, axis: usize) -> Self {
        assert!(axis < nvars);
        let mut j = Self::constant(nvars, order, value);
        if order >= 1 {
            let idx = layout(nvars).shift[0][axis].expect("linear monomial");
            j.c[idx] = 1.0;
        }
        j
    }

    /// Jets of all coordinate functions at `point`.
    pub fn variables(point: &[f64], order: usize) -> Vec<Jet> {
        let n = point.len();
        point
            .iter()
            .enumerate()
            .map(|(axis, &v)| Jet::variable(n, order, v, axis))
            .collect()
    }

    /// Build a jet from partial derivatives `∂^α f`, listed in [`multi_indices`] order.
    pub fn from_partials(nvars: usize, order: usize, partials: &[f64]) -> Self {
        let lay = layout(nvars);
        let count = lay.count_upto[order];
        assert_eq!(partials.len(), count, "partial derivative count mismatch");
        let mut j = Self::constant(nvars, order, 0.0);
        for (i, d) in partials.iter().enumerate() {
            j.c[i] = d / lay.factorial[i];
        }
        j
    }

    pub fn nvars(&self) -> usize {
        self.nvars as usize
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c[..layout(self.nvars()).count_upto[self.order()]]
    }

    /// Constant jet with the same layout.
    pub fn lift(&self, value: f64) -> Self {
        Self::constant(self.nvars(), self.order(), value)
    }

    /// Partial derivative `∂^α f` at the expansion point.
    ///
    /// Returns `None` if `|α|` exceeds the jet order.
    pub fn partial(&self, alpha: &[usize]) -> Option<f64> {
        let lay = layout(self.nvars());
        if alpha.len() != self.nvars() {
            return None;
        }
        let total: usize = alpha.iter().sum();
        if total > self.order() {
            return None;
        }
        let mut e = [0u8; MAX_VARS];
        for (k, &a) in alpha.iter().enumerate() {
            e[k] = a as u8;
        }
        let idx = lay.exps.iter().position(|x| *x == e)?;
        Some(self.c[idx] * lay.factorial[idx])
    }

    /// Gradient (first partials) at the expansion point.
    pub fn gradient(&self) -> Vec<f64> {
        assert!(self.order() >= 1, "gradient of an order-0 jet");
        let lay = layout(self.nvars());
        (0..self.nvars())
            .map(|k| self.c[lay.shift[0][k].unwrap()])
            .collect()
    }

    /// Jet of `∂f/∂x_axis`; the order drops by one.
    pub fn diff(&self, axis: usize) -> Jet {
        assert!(self.order() >= 1, "cannot differentiate an order-0 jet");
        assert!(axis < self.nvars());
        let lay = layout(self.nvars());
        let order = self.order() - 1;
        let mut out = Jet::constant(self.nvars(), order, 0.0);
        for i in 0..lay.count_upto[order] {
            let up = lay.shift[i][axis].expect("shifted monomial within MAX_ORDER");
            out.c[i] = (lay.exps[i][axis] as f64 + 1.0) * self.c[up];
        }
        out
    }

    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order());
        let lay = layout(self.nvars());
        let mut out = Jet::constant(self.nvars(), order, 0.0);
        let n = lay.count_upto[order];
        out.c[..n].copy_from_slice(&self.c[..n]);
        out
    }

    /// Re-express the jet in permuted variables: new variable `a` is old variable `perm[a]`.
    pub fn permute_vars(&self, perm: &[usize]) -> Jet {
        let n = self.nvars();
        assert_eq!(perm.len(), n);
        let lay = layout(n);
        let mut out = Jet::constant(n, self.order(), 0.0);
        for i in 0..lay.count_upto[self.order()] {
            let old = lay.exps[i];
            let mut new = [0u8; MAX_VARS];
            for a in 0..n {
                new[a] = old[perm[a]];
            }
            let j = lay.exps.iter().position(|x| *x == new).unwrap();
            out.c[j] = self.c[i];
        }
        out
    }

    /// Freeze variable `axis` at the expansion point, leaving a jet in the
    /// remaining variables (same order).
    pub fn drop_var(&self, axis: usize) -> Jet {
        let n = self.nvars();
        assert!(axis < n && n >= 1);
        let lay = layout(n);
        let sub = layout(n - 1);
        let mut out = Jet::constant(n - 1, self.order(), 0.0);
        for i in 0..lay.count_upto[self.order()] {
            let e = lay.exps[i];
            if e[axis] != 0 {
                continue;
            }
            let mut r = [0u8; MAX_VARS];
            let mut k = 0;
            for (a, &x) in e.iter().enumerate().take(n) {
                if a != axis {
                    r[k] = x;
                    k += 1;
                }
            }
            let j = sub.exps.iter().position(|x| *x == r).unwrap();
            out.c[j] = self.c[i];
        }
        out
    }

    /// `g(self)` for a univariate `g` with derivatives `d[m] = g^(m)(value)`.
    pub fn compose(&self, derivs: &[f64]) -> Jet {
        let k = self.order();
        assert!(derivs.len() > k, "need derivatives up to the jet order");
        let mut delta = *self;
        delta.c[0] = 0.0;
        let fact = |m: usize| (1..=m).product::<usize>() as f64;
        let mut acc = self.lift(derivs[k] / fact(k));
        for m in (0..k).rev() {
            acc = acc * delta;
            acc.c[0] += derivs[m] / fact(m);
        }
        acc
    }

    fn check_layout(&self, other: &Jet) {
        assert_eq!(self.nvars, other.nvars, "jets over different variable counts");
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        self.check_layout(&rhs);
        let order = self.order().min(rhs.order());
        let mut out = Jet::constant(self.nvars(), order, 0.0);
        for i in 0..layout(self.nvars()).count_upto[order] {
            out.c[i] = self.c[i] + rhs.c[i];
        }
        out
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self.check_layout(&rhs);
        let order = self.order().min(rhs.order());
        let mut out = Jet::constant(self.nvars(), order, 0.0);
        for i in 0..layout(self.nvars()).count_upto[order] {
            out.c[i] = self.c[i] - rhs.c[i];
        }
        out
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        self.check_layout(&rhs);
        let order = self.order().min(rhs.order());
        let lay = layout(self.nvars());
        let mut out = Jet::constant(self.nvars(), order, 0.0);
        for &(a, b, c) in &lay.triples[..lay.triples_upto[order]] {
            out.c[c] += self.c[a] * rhs.c[b];
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        for v in self.c.iter_mut() {
            *v = -*v;
        }
        self
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, rhs: f64) -> Jet {
        for v in self.c.iter_mut() {
            *v *= rhs;
        }
        self
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(mut self, rhs: f64) -> Jet {
        for v in self.c.iter_mut() {
            *v /= rhs;
        }
        self
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = *self + rhs;
    }
}

impl SubAssign for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self = *self - rhs;
    }
}

impl MulAssign for Jet {
    fn mul_assign(&mut self, rhs: Jet) {
        *self = *self * rhs;
    }
}

/// Scalar type closed-form fields are written against: `f64` for plain
/// evaluation, [`Jet`] for exact derivatives.
pub trait Real:
    Copy
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn value(&self) -> f64;
    /// A constant with the same layout as `self`.
    fn lift(&self, c: f64) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn recip(&self) -> Self;
    fn powi(&self, n: i32) -> Self;
    fn powf(&self, p: f64) -> Self;
}

impl Real for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn lift(&self, c: f64) -> Self {
        c
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn recip(&self) -> Self {
        f64::recip(*self)
    }
    fn powi(&self, n: i32) -> Self {
        f64::powi(*self, n)
    }
    fn powf(&self, p: f64) -> Self {
        f64::powf(*self, p)
    }
}

impl Real for Jet {
    fn value(&self) -> f64 {
        self.c[0]
    }
    fn lift(&self, c: f64) -> Self {
        Jet::lift(self, c)
    }
    fn exp(&self) -> Self {
        let e = self.c[0].exp();
        self.compose(&[e; MAX_ORDER + 1][..=self.order()])
    }
    fn ln(&self) -> Self {
        let u = self.c[0];
        let mut d = vec![u.ln()];
        let mut fact = 1.0;
        for m in 1..=self.order() {
            if m > 1 {
                fact *= (m - 1) as f64;
            }
            let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
            d.push(sign * fact / u.powi(m as i32));
        }
        self.compose(&d)
    }
    fn sin(&self) -> Self {
        let (s, c) = self.c[0].sin_cos();
        let cycle = [s, c, -s, -c];
        let d: Vec<f64> = (0..=self.order()).map(|m| cycle[m % 4]).collect();
        self.compose(&d)
    }
    fn cos(&self) -> Self {
        let (s, c) = self.c[0].sin_cos();
        let cycle = [c, -s, -c, s];
        let d: Vec<f64> = (0..=self.order()).map(|m| cycle[m % 4]).collect();
        self.compose(&d)
    }
    fn sqrt(&self) -> Self {
        self.powf(0.5)
    }
    fn recip(&self) -> Self {
        let u = self.c[0];
        let mut d = Vec::with_capacity(self.order() + 1);
        let mut coef = 1.0;
        for m in 0..=self.order() {
            d.push(coef / u.powi(m as i32 + 1));
            coef *= -((m + 1) as f64);
        }
        self.compose(&d)
    }
    fn powi(&self, n: i32) -> Self {
        let u = self.c[0];
        let mut d = Vec::with_capacity(self.order() + 1);
        let mut ff = 1.0;
        for m in 0..=self.order() {
            let e = n - m as i32;
            d.push(if ff == 0.0 { 0.0 } else { ff * u.powi(e) });
            ff *= (n - m as i32) as f64;
        }
        self.compose(&d)
    }
    fn powf(&self, p: f64) -> Self {
        let u = self.c[0];
        let mut d = Vec::with_capacity(self.order() + 1);
        let mut ff = 1.0;
        for m in 0..=self.order() {
            d.push(ff * u.powf(p - m as f64));
            ff *= p - m as f64;
        }
        self.compose(&d)
    }
}

/// `exp(-1/u)` for `u > 0`, zero otherwise: the C^∞ function flat at the origin.
pub fn flat_bump<R: Real>(u: R) -> R {
    if u.value() > 0.0 {
        (-u.recip()).exp()
    } else {
        u.lift(0.0)
    }
}

/// Smooth step `s(u) = B(u) / (B(u) + B(1-u))`: 0 for `u ≤ 0`, 1 for `u ≥ 1`.
pub fn smooth_step<R: Real>(u: R) -> R {
    let a = flat_bump(u);
    let b = flat_bump(-u + 1.0);
    a / (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_counts() {
        assert_eq!(coefficient_count(4, 3), MAX_COEFFS);
        assert_eq!(coefficient_count(3, 3), 20);
        assert_eq!(coefficient_count(2, 2), 6);
        assert_eq!(coefficient_count(1, 3), 4);
    }

    #[test]
    fn polynomial_partials_are_exact() {
        // f = x^2 y + 3 y^3 at (2, -1)
        let v = Jet::variables(&[2.0, -1.0], 3);
        let f = v[0] * v[0] * v[1] + v[1] * v[1] * v[1] * 3.0;
        assert_eq!(f.value(), -4.0 - 3.0);
        assert_eq!(f.partial(&[1, 0]).unwrap(), 2.0 * 2.0 * -1.0);
        assert_eq!(f.partial(&[0, 1]).unwrap(), 4.0 + 9.0);
        assert_eq!(f.partial(&[2, 1]).unwrap(), 2.0);
        assert_eq!(f.partial(&[0, 3]).unwrap(), 18.0);
        assert_eq!(f.partial(&[1, 1]).unwrap(), 4.0);
        assert!(f.partial(&[2, 2]).is_none());
    }

    #[test]
    fn elementary_functions_match_closed_forms() {
        let x = Jet::variable(1, 3, 0.7, 0);
        let e = x.exp();
        for m in 0..=3 {
            assert!((e.partial(&[m]).unwrap() - 0.7f64.exp()).abs() < 1e-14);
        }
        let s = x.sin();
        assert!((s.partial(&[3]).unwrap() + 0.7f64.cos()).abs() < 1e-14);
        let l = x.ln();
        assert!((l.partial(&[3]).unwrap() - 2.0 / 0.7f64.powi(3)).abs() < 1e-12);
        let r = x.recip();
        assert!((r.partial(&[2]).unwrap() - 2.0 / 0.7f64.powi(3)).abs() < 1e-12);
        let q = x.sqrt();
        assert!((q.partial(&[2]).unwrap() + 0.25 * 0.7f64.powf(-1.5)).abs() < 1e-12);
        let p = x.powi(-2);
        assert!((p.partial(&[1]).unwrap() + 2.0 * 0.7f64.powi(-3)).abs() < 1e-12);
    }

    #[test]
    fn diff_lowers_order_and_commutes() {
        let v = Jet::variables(&[0.3, 0.4, 0.5], 3);
        let f = (v[0] * v[1]).sin() * v[2].exp();
        let a = f.diff(0).diff(1);
        let b = f.diff(1).diff(0);
        assert_eq!(a.order(), 1);
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn drop_and_permute_vars() {
        let v = Jet::variables(&[1.0, 2.0, 3.0], 2);
        let f = v[0] * v[1] * v[1] + v[2];
        let g = f.drop_var(0);
        assert_eq!(g.nvars(), 2);
        assert_eq!(g.partial(&[2, 0]).unwrap(), 2.0);
        assert_eq!(g.partial(&[0, 1]).unwrap(), 1.0);
        let p = f.permute_vars(&[1, 0, 2]);
        assert_eq!(p.partial(&[1, 1, 0]).unwrap(), f.partial(&[1, 1, 0]).unwrap());
        assert_eq!(p.partial(&[0, 1, 0]).unwrap(), f.partial(&[1, 0, 0]).unwrap());
    }

    #[test]
    fn flat_bump_is_flat_at_zero() {
        let u = Jet::variable(1, 3, 0.0, 0);
        let b = flat_bump(u);
        assert!(b.coeffs().iter().all(|&c| c == 0.0));
        let s = smooth_step(Jet::variable(1, 3, 0.5, 0));
        assert!((s.value() - 0.5).abs() < 1e-15);
    }
}
