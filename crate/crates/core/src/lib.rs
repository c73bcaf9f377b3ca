//! Random Green currents and measures on the Riemann sphere.
//!
//! A driver map `F` on a parameter space generates a sequence of degree-d
//! rational maps `f_i = F^i(f_0)`. This crate builds the associated random
//! Green potential `g_n = sum u_i o f_{i-1} o ... o f_0 / d^i`, the Green
//! measure `omega + dd^c g` (by grid Laplacian and by preimage sampling),
//! and the diagnostics needed to check invariance, continuity and mixing
//! properties of those measures at desk scale.

pub mod driver;
pub mod error;
pub mod grid;
pub mod map;
pub mod measure;
pub mod mixing;
pub mod observable;
pub mod point;
pub mod potential;
pub mod roots;
pub mod stats;

pub use driver::{DriverKind, DriverSystem, MapFamily, OrbitDiagnostics};
pub use error::CoreError;
pub use grid::{BinnedMass, Chart, GridSpec};
pub use map::{DegeneracyProxy, RationalMapP1};
pub use measure::{GreenMeasure, MeasureDistance, MeasureMethod};
pub use mixing::{MixingReport, PairingReport};
pub use observable::Observable;
pub use point::PointP1;
pub use potential::{LipschitzSample, PotentialSeries};

pub type C64 = num_complex::Complex64;
