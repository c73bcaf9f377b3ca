//! Test observables on P^1: bounded factors and DSH-norm candidates.
//!
//! Builtins are chart-free formulas in the homogeneous representative, so
//! they agree exactly across the chart overlap. The circle harmonics are
//! scaled to restrict to `cos(k theta)` / `sin(k theta)` on the unit
//! circle, which gives exact zero-correlation oracles for `z -> z^2`.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::grid::{Chart, GridSpec, GridValues};
use crate::point::PointP1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    /// Constant 1.
    One,
    /// `Re(z w~)` on the unit representative, i.e. `Re z / (1 + |z|^2)`.
    CoordRe,
    /// `Im z / (1 + |z|^2)`.
    CoordIm,
    /// `|w|^2`, i.e. `1 / (1 + |z|^2)`.
    InvSq,
    /// `2^k Re((z w~)^k)`: equals `cos(k theta)` on `|z| = 1`.
    HarmonicCos(u32),
    /// `2^k Im((z w~)^k)`: equals `sin(k theta)` on `|z| = 1`.
    HarmonicSin(u32),
}

impl Builtin {
    pub fn eval(&self, p: &PointP1) -> f64 {
        let zw = p.z() * p.w().conj();
        match self {
            Builtin::One => 1.0,
            Builtin::CoordRe => zw.re,
            Builtin::CoordIm => zw.im,
            Builtin::InvSq => p.w().norm_sqr(),
            Builtin::HarmonicCos(k) => 2f64.powi(*k as i32) * zw.powu(*k).re,
            Builtin::HarmonicSin(k) => 2f64.powi(*k as i32) * zw.powu(*k).im,
        }
    }

    /// Exact sup norm over P^1.
    pub fn sup_bound(&self) -> f64 {
        match self {
            Builtin::One | Builtin::InvSq => 1.0,
            Builtin::CoordRe | Builtin::CoordIm => 0.5,
            // |z w~| <= 1/2 on the unit sphere, so 2^k |(z w~)^k| <= 1.
            Builtin::HarmonicCos(_) | Builtin::HarmonicSin(_) => 1.0,
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        let b = match name {
            "one" => Builtin::One,
            "coord_re" => Builtin::CoordRe,
            "coord_im" => Builtin::CoordIm,
            "inv_sq" => Builtin::InvSq,
            _ => {
                let parse_k = |prefix: &str| -> Option<u32> {
                    name.strip_prefix(prefix).and_then(|s| s.parse().ok())
                };
                if let Some(k) = parse_k("harmonic_cos_") {
                    Builtin::HarmonicCos(k)
                } else if let Some(k) = parse_k("harmonic_sin_") {
                    Builtin::HarmonicSin(k)
                } else {
                    return Err(CoreError::InvalidInput(format!(
                        "unknown observable '{name}'"
                    )));
                }
            }
        };
        Ok(b)
    }
}

/// A function sampled on grid nodes, evaluated by bilinear interpolation in
/// the chart that owns the point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridObservable {
    grid: GridSpec,
    values: GridValues,
}

impl GridObservable {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &GridValues {
        &self.values
    }

    pub fn from_fn(grid: &GridSpec, f: impl Fn(&PointP1) -> f64) -> Result<Self> {
        let nps = grid.nodes_per_side();
        let mut values = GridValues::zeros(grid);
        for chart in [Chart::Zero, Chart::Inf] {
            let field = values.get_mut(chart);
            for i in 0..nps {
                for j in 0..nps {
                    let v = f(&grid.node_point(chart, i, j));
                    if !v.is_finite() {
                        return Err(CoreError::NonFiniteObservable);
                    }
                    field[grid.flat(i, j)] = v;
                }
            }
        }
        Ok(Self {
            grid: *grid,
            values,
        })
    }

    pub fn eval(&self, p: &PointP1) -> f64 {
        let (flipped, c) = p.chart_coord();
        let chart = if flipped { Chart::Inf } else { Chart::Zero };
        let field = self.values.get(chart);
        let e = self.grid.extent();
        let s = self.grid.spacing();
        let res = self.grid.resolution();
        let locate = |x: f64| -> (usize, f64) {
            let u = ((x + e) / s).clamp(0.0, res as f64 - 1e-9);
            let i = (u.floor() as usize).min(res - 1);
            (i, u - i as f64)
        };
        let (i, fx) = locate(c.re);
        let (j, fy) = locate(c.im);
        let v00 = field[self.grid.flat(i, j)];
        let v10 = field[self.grid.flat(i + 1, j)];
        let v01 = field[self.grid.flat(i, j + 1)];
        let v11 = field[self.grid.flat(i + 1, j + 1)];
        v00 * (1.0 - fx) * (1.0 - fy)
            + v10 * fx * (1.0 - fy)
            + v01 * (1.0 - fx) * fy
            + v11 * fx * fy
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Observable {
    Builtin(Builtin),
    Grid(GridObservable),
}

impl Observable {
    pub fn builtin(b: Builtin) -> Self {
        Observable::Builtin(b)
    }

    pub fn parse(name: &str) -> Result<Self> {
        Builtin::parse(name).map(Observable::Builtin)
    }

    pub fn eval(&self, p: &PointP1) -> f64 {
        match self {
            Observable::Builtin(b) => b.eval(p),
            Observable::Grid(g) => g.eval(p),
        }
    }

    /// `||phi||_inf`: exact for builtins, max node value for grid functions.
    pub fn sup_bound(&self) -> f64 {
        match self {
            Observable::Builtin(b) => b.sup_bound(),
            Observable::Grid(g) => g
                .values
                .chart_zero
                .iter()
                .chain(g.values.chart_inf.iter())
                .fold(0.0f64, |acc, v| acc.max(v.abs())),
        }
    }
}
