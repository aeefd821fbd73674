//! Numerical tensor calculus on coordinate charts: curvature, Codazzi
//! tensors, hypersurface geometry of level sets, and gradient Ricci solitons.

pub mod chart;
pub mod codazzi;
pub mod config;
pub mod curvature;
pub mod diff;
pub mod error;
pub mod field;
pub mod jet;
pub mod leaf;
pub mod linalg;
pub mod merton;
pub mod report;
pub mod runner;
pub mod soliton;

pub use chart::{Axis, CoordinateBox, Grid, Point};
pub use diff::DiffScheme;
pub use error::{GeomError, Result};
pub use field::{MetricField, ScalarField, Sym2Field};
pub use jet::Jet;
