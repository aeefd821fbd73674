//! Coordinate charts: points, boxes with periodic axes, and sample grids.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{GeomError, Result};

/// A coordinate tuple in a chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || coords.len() > crate::jet::MAX_VARS {
            return Err(GeomError::Dimension {
                expected: crate::jet::MAX_VARS,
                found: coords.len(),
            });
        }
        if let Some(&bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(GeomError::NonFinite {
                what: "point coordinate".into(),
                value: bad,
            });
        }
        Ok(Point(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// Copy of the point with one coordinate replaced.
    pub fn with_coord(&self, axis: usize, value: f64) -> Point {
        let mut c = self.0.clone();
        c[axis] = value;
        Point(c)
    }

    pub fn offset(&self, axis: usize, delta: f64) -> Point {
        self.with_coord(axis, self.0[axis] + delta)
    }
}

impl std::ops::Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl std::fmt::Display for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c:.4}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lower: f64,
    pub upper: f64,
    pub periodic: bool,
}

impl Axis {
    pub fn interval(lower: f64, upper: f64) -> Self {
        Axis {
            lower,
            upper,
            periodic: false,
        }
    }

    pub fn periodic(lower: f64, upper: f64) -> Self {
        Axis {
            lower,
            upper,
            periodic: true,
        }
    }

    /// The circle `[0, 2π)`.
    pub fn circle() -> Self {
        Self::periodic(0.0, TAU)
    }

    pub fn period(&self) -> Option<f64> {
        self.periodic.then(|| self.upper - self.lower)
    }
}

/// Product of axis intervals; periodic axes have period `upper - lower`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordinateBox {
    axes: Vec<Axis>,
}

impl CoordinateBox {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > crate::jet::MAX_VARS {
            return Err(GeomError::Dimension {
                expected: crate::jet::MAX_VARS,
                found: axes.len(),
            });
        }
        for (i, a) in axes.iter().enumerate() {
            if !(a.lower.is_finite() && a.upper.is_finite() && a.lower < a.upper) {
                return Err(GeomError::Config(format!(
                    "axis {i}: lower bound {} must be below upper bound {}",
                    a.lower, a.upper
                )));
            }
        }
        Ok(CoordinateBox { axes })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> &Axis {
        &self.axes[i]
    }

    /// Box with one axis removed (the chart of a coordinate hypersurface).
    pub fn without_axis(&self, axis: usize) -> Result<Self> {
        let mut axes = self.axes.clone();
        axes.remove(axis);
        CoordinateBox::new(axes)
    }

    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        CoordinateBox::new(perm.iter().map(|&p| self.axes[p]).collect())
    }

    /// Reduce periodic coordinates into `[lower, upper)`.
    pub fn wrap(&self, coords: &[f64]) -> Vec<f64> {
        coords
            .iter()
            .zip(&self.axes)
            .map(|(&c, a)| match a.period() {
                Some(p) => a.lower + (c - a.lower).rem_euclid(p),
                None => c,
            })
            .collect()
    }

    /// Error unless every non-periodic coordinate lies in its interval.
    pub fn check(&self, coords: &[f64]) -> Result<()> {
        if coords.len() != self.dim() {
            return Err(GeomError::Dimension {
                expected: self.dim(),
                found: coords.len(),
            });
        }
        for (i, (&c, a)) in coords.iter().zip(&self.axes).enumerate() {
            if !a.periodic && !(c >= a.lower && c <= a.upper) {
                return Err(GeomError::Domain {
                    axis: i,
                    coord: c,
                    lower: a.lower,
                    upper: a.upper,
                });
            }
        }
        Ok(())
    }
}

/// Row-major sample grid (last axis fastest) together with its shape.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    points: Vec<Point>,
    shape: Vec<usize>,
}

impl Grid {
    pub fn from_points(points: Vec<Point>) -> Self {
        let n = points.len();
        Grid {
            points,
            shape: vec![n],
        }
    }

    /// Cartesian product of explicit per-axis samples, row-major.
    pub fn product(per_axis: &[Vec<f64>]) -> Result<Self> {
        if per_axis.iter().any(|a| a.is_empty()) {
            return Err(GeomError::Config("empty axis sample list".into()));
        }
        let shape: Vec<usize> = per_axis.iter().map(|a| a.len()).collect();
        let total: usize = shape.iter().product();
        let mut points = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut coords = vec![0.0; shape.len()];
            for axis in (0..shape.len()).rev() {
                coords[axis] = per_axis[axis][rem % shape[axis]];
                rem /= shape[axis];
            }
            points.push(Point::new(coords)?);
        }
        Ok(Grid { points, shape })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the neighbor one step along `axis` (no wrap-around).
    pub fn neighbor(&self, index: usize, axis: usize, step: isize) -> Option<usize> {
        if axis >= self.shape.len() {
            return None;
        }
        let stride: usize = self.shape[axis + 1..].iter().product();
        let pos = (index / stride) % self.shape[axis];
        let target = pos as isize + step;
        if target < 0 || target >= self.shape[axis] as isize {
            return None;
        }
        Some((index as isize + step * stride as isize) as usize)
    }

    /// Multi-index of a flat grid index.
    pub fn multi_index(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.shape.len()];
        for axis in (0..self.shape.len()).rev() {
            out[axis] = index % self.shape[axis];
            index /= self.shape[axis];
        }
        out
    }
}

/// Values sampled along one axis.
pub fn axis_samples(axis: &Axis, resolution: usize, margin: f64) -> Vec<f64> {
    if axis.periodic {
        let step = (axis.upper - axis.lower) / resolution as f64;
        (0..resolution).map(|k| axis.lower + k as f64 * step).collect()
    } else {
        let lo = axis.lower + margin;
        let hi = axis.upper - margin;
        let step = (hi - lo) / (resolution - 1) as f64;
        (0..resolution)
            .map(|k| if k + 1 == resolution { hi } else { lo + k as f64 * step })
            .collect()
    }
}

/// Uniform grid over `bx`; non-periodic axes are inset by `margin`.
pub fn sample_grid(bx: &CoordinateBox, resolution: &[usize], margin: f64) -> Result<Grid> {
    if resolution.len() != bx.dim() {
        return Err(GeomError::Dimension {
            expected: bx.dim(),
            found: resolution.len(),
        });
    }
    if let Some(r) = resolution.iter().find(|&&r| r < 2) {
        return Err(GeomError::Config(format!("grid resolution {r} below 2")));
    }
    let mut per_axis = Vec::with_capacity(bx.dim());
    for (a, &r) in bx.axes().iter().zip(resolution) {
        if !a.periodic && a.upper - a.lower <= 2.0 * margin {
            return Err(GeomError::Config(format!(
                "axis [{}, {}] too short for margin {margin}",
                a.lower, a.upper
            )));
        }
        per_axis.push(axis_samples(a, r, margin));
    }
    Grid::product(&per_axis)
}
