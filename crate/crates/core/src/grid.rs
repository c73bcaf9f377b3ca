//! Two-chart grid atlas on P^1, Fubini-Study quadrature, and the coarse
//! binning shared by measure comparisons.
//!
//! Chart `Zero` is the affine coordinate `z/w`, chart `Inf` is `w/z`. A grid
//! covers `[-extent, extent]^2` in each chart with `resolution` cells per
//! side (`resolution + 1` nodes, endpoints included, so doubling the
//! resolution refines the node set). The sphere is partitioned between the
//! charts along the unit circle: a point belongs to chart `Zero` when its
//! `Zero`-coordinate has modulus <= 1, to chart `Inf` otherwise.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::point::PointP1;

pub const TV_BINS_PER_SIDE: usize = 64;

/// The chart split used by the binning sits at `|z| = 1.25`, and the mass
/// assembly blends the charts over `1.1 < |z| < 1.8`: both keep the unit
/// circle, where the measures of polynomial families concentrate, well in
/// the interior of a single chart.
pub const BIN_SPLIT_RADIUS: f64 = 1.25;
/// Bin squares cover `[-2, 2]^2`, matching the default grid extent so bin
/// edges align with node columns (the bin width is an integer number of
/// cells for power-of-two resolutions, which avoids aliasing when binning
/// node masses).
pub const BIN_EXTENT: f64 = 2.0;
const BLEND_LO: f64 = 1.1;
const BLEND_HI: f64 = 1.8;

/// Partition-of-unity weight of chart `Zero` as a function of the z-chart
/// modulus: 1 below the blend annulus, 0 above, cosine ramp between.
pub fn chart_zero_weight(r: f64) -> f64 {
    if r <= BLEND_LO {
        1.0
    } else if r >= BLEND_HI {
        0.0
    } else {
        0.5 * (1.0 + (std::f64::consts::PI * (r - BLEND_LO) / (BLEND_HI - BLEND_LO)).cos())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    Zero,
    Inf,
}

pub const CHARTS: [Chart; 2] = [Chart::Zero, Chart::Inf];

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSpec {
    resolution: usize,
    extent: f64,
}

impl GridSpec {
    /// `resolution` cells per side (>= 64). The extent must be at least 2 so
    /// the two charts jointly cover P^1 with overlap annulus 1/2 < |z| < 2.
    pub fn new(resolution: usize, extent: f64) -> Result<Self> {
        if resolution < 64 {
            return Err(CoreError::InvalidInput(format!(
                "grid resolution {resolution} below minimum 64"
            )));
        }
        if !(extent >= 2.0) {
            return Err(CoreError::InvalidInput(format!(
                "grid extent {extent} must be >= 2 for the chart overlap"
            )));
        }
        Ok(Self { resolution, extent })
    }

    pub fn with_resolution(resolution: usize) -> Result<Self> {
        Self::new(resolution, 2.0)
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn nodes_per_side(&self) -> usize {
        self.resolution + 1
    }

    pub fn node_count(&self) -> usize {
        self.nodes_per_side() * self.nodes_per_side()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / self.resolution as f64
    }

    pub fn node_coord(&self, i: usize, j: usize) -> Complex64 {
        let s = self.spacing();
        Complex64::new(
            -self.extent + i as f64 * s,
            -self.extent + j as f64 * s,
        )
    }

    pub fn flat(&self, i: usize, j: usize) -> usize {
        i * self.nodes_per_side() + j
    }

    pub fn node_point(&self, chart: Chart, i: usize, j: usize) -> PointP1 {
        let c = self.node_coord(i, j);
        match chart {
            Chart::Zero => PointP1::from_affine(c),
            Chart::Inf => PointP1::new(Complex64::new(1.0, 0.0), c)
                .expect("chart-Inf node pair is nonzero"),
        }
    }

    /// Whether the node belongs to the chart's own unit disk. The two disks
    /// cover P^1 once (the shared circle belongs to chart `Zero`); used
    /// wherever the sphere must be scanned without double counting.
    pub fn node_in_region(&self, chart: Chart, i: usize, j: usize) -> bool {
        let r2 = self.node_coord(i, j).norm_sqr();
        match chart {
            Chart::Zero => r2 <= 1.0,
            Chart::Inf => r2 < 1.0,
        }
    }

    /// Partition-of-unity weight of the chart at a node, in terms of the
    /// node's z-chart modulus.
    pub fn node_blend_weight(&self, chart: Chart, i: usize, j: usize) -> f64 {
        let c = self.node_coord(i, j).norm();
        match chart {
            Chart::Zero => chart_zero_weight(c),
            Chart::Inf => {
                let r = if c == 0.0 { f64::INFINITY } else { 1.0 / c };
                1.0 - chart_zero_weight(r)
            }
        }
    }

    /// All node points of one chart, row-major.
    pub fn chart_points(&self, chart: Chart) -> Vec<PointP1> {
        let nps = self.nodes_per_side();
        let mut points = Vec::with_capacity(nps * nps);
        for i in 0..nps {
            for j in 0..nps {
                points.push(self.node_point(chart, i, j));
            }
        }
        points
    }

    /// Local Fubini-Study potential of the chart coordinate at each node:
    /// `(1/2) log(1 + |c|^2)`.
    pub fn fs_local_potential(&self) -> Vec<f64> {
        let nps = self.nodes_per_side();
        let mut values = Vec::with_capacity(nps * nps);
        for i in 0..nps {
            for j in 0..nps {
                values.push(0.5 * (1.0 + self.node_coord(i, j).norm_sqr()).ln());
            }
        }
        values
    }

    /// Normalized Fubini-Study quadrature weights over the nodes of both
    /// chart regions (zero outside the regions). The weights sum to 1, so
    /// quadrature of a constant is exact.
    pub fn fs_weights(&self) -> GridValues {
        let nps = self.nodes_per_side();
        let s2 = self.spacing() * self.spacing();
        let mut values = GridValues::zeros(self);
        let mut total = 0.0;
        for chart in CHARTS {
            for i in 0..nps {
                for j in 0..nps {
                    if self.node_in_region(chart, i, j) {
                        let r2 = self.node_coord(i, j).norm_sqr();
                        let w = s2 / (std::f64::consts::PI * (1.0 + r2) * (1.0 + r2));
                        values.get_mut(chart)[self.flat(i, j)] = w;
                        total += w;
                    }
                }
            }
        }
        for chart in CHARTS {
            for v in values.get_mut(chart).iter_mut() {
                *v /= total;
            }
        }
        values
    }

    /// `(1/2pi) * (h_E + h_W + h_N + h_S - 4 h_C)` at an interior node: the
    /// discrete `dd^c` mass attached to the node's dual cell.
    pub fn laplacian_mass(&self, h: &[f64], i: usize, j: usize) -> f64 {
        let nps = self.nodes_per_side();
        debug_assert!(i >= 1 && i + 1 < nps && j >= 1 && j + 1 < nps);
        let c = h[self.flat(i, j)];
        let sum = h[self.flat(i + 1, j)] + h[self.flat(i - 1, j)] + h[self.flat(i, j + 1)]
            + h[self.flat(i, j - 1)];
        (sum - 4.0 * c) / (2.0 * std::f64::consts::PI)
    }
}

/// A scalar field sampled on the nodes of both charts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridValues {
    pub chart_zero: Vec<f64>,
    pub chart_inf: Vec<f64>,
}

impl GridValues {
    pub fn zeros(spec: &GridSpec) -> Self {
        Self {
            chart_zero: vec![0.0; spec.node_count()],
            chart_inf: vec![0.0; spec.node_count()],
        }
    }

    pub fn get(&self, chart: Chart) -> &[f64] {
        match chart {
            Chart::Zero => &self.chart_zero,
            Chart::Inf => &self.chart_inf,
        }
    }

    pub fn get_mut(&mut self, chart: Chart) -> &mut Vec<f64> {
        match chart {
            Chart::Zero => &mut self.chart_zero,
            Chart::Inf => &mut self.chart_inf,
        }
    }
}

/// Mass distribution over a fixed 64 x 64 binning of each chart's unit
/// disk. All compared measures share this partition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BinnedMass {
    mass: Vec<f64>,
}

impl BinnedMass {
    const SIDE: usize = TV_BINS_PER_SIDE;

    pub fn empty() -> Self {
        Self {
            mass: vec![0.0; 2 * Self::SIDE * Self::SIDE],
        }
    }

    /// Bin index of a sphere point: chart `Zero` bins when
    /// `|z| <= BIN_SPLIT_RADIUS`, chart `Inf` bins otherwise; each chart
    /// bins its coordinate on the square `[-BIN_EXTENT, BIN_EXTENT]^2`.
    pub fn bin_of(point: &PointP1) -> usize {
        let side = Self::SIDE;
        let r = BIN_SPLIT_RADIUS;
        // |z/w| <= R without dividing by a possibly-zero w.
        let zero_chart = point.z().norm_sqr() <= r * r * point.w().norm_sqr();
        let c = if zero_chart {
            point.z() / point.w()
        } else {
            point.w() / point.z()
        };
        let clamp = |x: f64| -> usize {
            let b = ((x + BIN_EXTENT) / (2.0 * BIN_EXTENT) * side as f64).floor();
            (b.max(0.0) as usize).min(side - 1)
        };
        let base = if zero_chart { 0 } else { side * side };
        base + clamp(c.re) * side + clamp(c.im)
    }

    pub fn from_points(points: &[PointP1]) -> Self {
        let mut binned = Self::empty();
        if points.is_empty() {
            return binned;
        }
        let w = 1.0 / points.len() as f64;
        for p in points {
            binned.mass[Self::bin_of(p)] += w;
        }
        binned
    }

    pub fn add(&mut self, point: &PointP1, mass: f64) {
        self.mass[Self::bin_of(point)] += mass;
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn normalized(mut self) -> Self {
        let t = self.total();
        if t > 0.0 {
            for m in self.mass.iter_mut() {
                *m /= t;
            }
        }
        self
    }

    /// Total variation distance over the common binning (inputs are
    /// normalized first).
    pub fn tv(&self, other: &Self) -> f64 {
        let ta = self.total();
        let tb = other.total();
        if ta == 0.0 || tb == 0.0 {
            return if ta == tb { 0.0 } else { 1.0 };
        }
        0.5 * self
            .mass
            .iter()
            .zip(other.mass.iter())
            .map(|(a, b)| (a / ta - b / tb).abs())
            .sum::<f64>()
    }

    fn occupied(&self) -> Vec<(PointP1, f64)> {
        let side = Self::SIDE;
        let t = self.total();
        let mut out = Vec::new();
        if t == 0.0 {
            return out;
        }
        let r = BIN_EXTENT;
        for (idx, &m) in self.mass.iter().enumerate() {
            if m > 0.0 {
                let flipped = idx >= side * side;
                let local = idx % (side * side);
                let (bi, bj) = (local / side, local % side);
                let x = -r + (bi as f64 + 0.5) * 2.0 * r / side as f64;
                let y = -r + (bj as f64 + 0.5) * 2.0 * r / side as f64;
                let c = Complex64::new(x, y);
                let p = if flipped {
                    PointP1::new(Complex64::new(1.0, 0.0), c).unwrap()
                } else {
                    PointP1::from_affine(c)
                };
                out.push((p, m / t));
            }
        }
        out
    }

    /// Energy distance under the chordal metric, computed between the two
    /// binned distributions: `sqrt(2 E d(X,Y) - E d(X,X') - E d(Y,Y'))`.
    pub fn energy_distance(&self, other: &Self) -> f64 {
        let a = self.occupied();
        let b = other.occupied();
        if a.is_empty() || b.is_empty() {
            return if a.len() == b.len() { 0.0 } else { 1.0 };
        }
        let pair_sum = |xs: &[(PointP1, f64)], ys: &[(PointP1, f64)]| -> f64 {
            let mut sum = 0.0;
            for (p, mp) in xs {
                for (q, mq) in ys {
                    sum += mp * mq * p.dist(q);
                }
            }
            sum
        };
        let cross = pair_sum(&a, &b);
        let within_a = pair_sum(&a, &a);
        let within_b = pair_sum(&b, &b);
        (2.0 * cross - within_a - within_b).max(0.0).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_invariants_enforced() {
        assert!(GridSpec::new(32, 2.0).is_err());
        assert!(GridSpec::new(64, 1.0).is_err());
        assert!(GridSpec::new(64, 2.0).is_ok());
    }

    #[test]
    fn doubled_resolution_nests_nodes() {
        let coarse = GridSpec::with_resolution(64).unwrap();
        let fine = GridSpec::with_resolution(128).unwrap();
        for i in 0..=64usize {
            for j in [0usize, 17, 64] {
                let a = coarse.node_coord(i, j);
                let b = fine.node_coord(2 * i, 2 * j);
                assert!((a - b).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn chart_regions_partition_the_sphere() {
        // Any point is claimed by exactly one chart region, by construction
        // of the binning rule.
        let spec = GridSpec::with_resolution(64).unwrap();
        let mut zero_count = 0;
        let mut inf_count = 0;
        let nps = spec.nodes_per_side();
        for i in 0..nps {
            for j in 0..nps {
                if spec.node_in_region(Chart::Zero, i, j) {
                    zero_count += 1;
                }
                if spec.node_in_region(Chart::Inf, i, j) {
                    inf_count += 1;
                }
            }
        }
        // Unit disk of radius 1 inside extent-2 square: about pi/16 of nodes.
        let frac = zero_count as f64 / (nps * nps) as f64;
        assert!((frac - std::f64::consts::PI / 16.0).abs() < 0.01, "{frac}");
        assert!(inf_count < zero_count);
    }

    #[test]
    fn fs_weights_sum_to_one_and_quadrature_is_exact_for_constants() {
        let spec = GridSpec::with_resolution(128).unwrap();
        let w = spec.fs_weights();
        let total: f64 =
            w.chart_zero.iter().sum::<f64>() + w.chart_inf.iter().sum::<f64>();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn laplacian_of_fs_potential_integrates_to_one() {
        // Blend-weighted sum of discrete dd^c masses of the local FS
        // potential over both charts approximates total mass 1.
        let spec = GridSpec::with_resolution(256).unwrap();
        let h = spec.fs_local_potential();
        let nps = spec.nodes_per_side();
        let mut total = 0.0;
        for chart in CHARTS {
            for i in 1..nps - 1 {
                for j in 1..nps - 1 {
                    let w = spec.node_blend_weight(chart, i, j);
                    if w > 0.0 {
                        total += w * spec.laplacian_mass(&h, i, j);
                    }
                }
            }
        }
        assert!((total - 1.0).abs() < 5e-3, "total FS mass {total}");
    }

    #[test]
    fn blend_weights_form_a_partition_of_unity() {
        // At any sphere point the two chart weights sum to 1.
        for k in 0..200 {
            let r = 0.02 + 0.04 * k as f64;
            let w0 = chart_zero_weight(r);
            let w1 = 1.0 - chart_zero_weight(r);
            assert!((w0 + w1 - 1.0).abs() < 1e-15);
            assert!((0.0..=1.0).contains(&w0));
        }
        assert_eq!(chart_zero_weight(1.0), 1.0);
        assert_eq!(chart_zero_weight(2.0), 0.0);
    }

    #[test]
    fn binning_splits_away_from_the_unit_circle() {
        // Points on either side of |z| = 1 share the chart-Zero bin layout;
        // the chart split sits at the bin radius.
        let side = TV_BINS_PER_SIDE;
        let inside = PointP1::from_affine(Complex64::new(0.999, 0.0));
        let outside = PointP1::from_affine(Complex64::new(1.001, 0.0));
        assert!(BinnedMass::bin_of(&inside) < side * side);
        assert!(BinnedMass::bin_of(&outside) < side * side);
        assert_eq!(BinnedMass::bin_of(&inside), BinnedMass::bin_of(&outside));
        let far = PointP1::from_affine(Complex64::new(BIN_SPLIT_RADIUS + 0.01, 0.0));
        assert!(BinnedMass::bin_of(&far) >= side * side);
        assert!(BinnedMass::bin_of(&PointP1::infinity()) >= side * side);
    }

    #[test]
    fn tv_and_energy_are_zero_for_identical_inputs() {
        let points: Vec<PointP1> = (0..500)
            .map(|k| {
                let theta = k as f64 * 0.1;
                PointP1::from_affine(Complex64::new(theta.cos(), theta.sin()))
            })
            .collect();
        let a = BinnedMass::from_points(&points);
        let b = BinnedMass::from_points(&points);
        assert_eq!(a.tv(&b), 0.0);
        assert_eq!(a.energy_distance(&b), 0.0);
    }

    #[test]
    fn tv_separates_disjoint_clouds() {
        let a = BinnedMass::from_points(&[PointP1::zero()]);
        let b = BinnedMass::from_points(&[PointP1::infinity()]);
        assert!((a.tv(&b) - 1.0).abs() < 1e-15);
        assert!(a.energy_distance(&b) > 0.5);
    }
}

#[cfg(test)]
impl BinnedMass {
    /// Test-only: dump bins sorted by |p - q| against another distribution.
    pub fn top_discrepancies(&self, other: &Self, k: usize) -> Vec<(usize, usize, usize, f64, f64)> {
        let side = Self::SIDE;
        let (ta, tb) = (self.total(), other.total());
        let mut rows: Vec<(usize, usize, usize, f64, f64)> = self
            .mass
            .iter()
            .zip(other.mass.iter())
            .enumerate()
            .map(|(idx, (&a, &b))| {
                let chart = idx / (side * side);
                let local = idx % (side * side);
                (chart, local / side, local % side, a / ta, b / tb)
            })
            .filter(|r| (r.3 - r.4).abs() > 0.0)
            .collect();
        rows.sort_by(|x, y| (y.3 - y.4).abs().total_cmp(&(x.3 - x.4).abs()));
        rows.truncate(k);
        rows
    }
}
