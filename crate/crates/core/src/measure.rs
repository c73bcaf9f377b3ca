//! Random Green measures, built two independent ways.
//!
//! The distributional route reads `mu = omega + dd^c g` off the grid via
//! the discrete Laplacian of the transported potential. The sampling route
//! walks d-ary preimage trees backwards along the orbit, pulling a point
//! mass at the root into an approximate `mu`-cloud. The two routes
//! cross-validate each other through a shared coarse binning.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::grid::{BinnedMass, Chart, GridSpec, GridValues, CHARTS};
use crate::map::RationalMapP1;
use crate::point::PointP1;
use crate::potential::PotentialSeries;
use crate::stats::task_rng;

const TAIL_REQUIRED: f64 = 1e-4;
const MASS_DEFECT_LIMIT: f64 = 0.01;
const MIN_SAMPLES: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureMethod {
    Laplacian,
    Preimage,
}

/// Per-node masses on both chart regions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridMasses {
    pub grid: GridSpec,
    pub masses: GridValues,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GreenMeasure {
    /// Index `i` when this represents `mu(f_i)` along an orbit.
    pub orbit_index: usize,
    pub depth_used: usize,
    pub method: MeasureMethod,
    pub grid_masses: Option<GridMasses>,
    pub sample_cloud: Vec<PointP1>,
    pub binned: BinnedMass,
    /// Grid total before renormalization (1 for sampled measures).
    pub total_before_renorm: f64,
    /// Absolute mass removed by clipping negative cells.
    pub clipped_negative: f64,
    pub mass_defect_flagged: bool,
}

impl GreenMeasure {
    /// Pairing `<mu, psi>`: Monte-Carlo over the sample cloud when one is
    /// available, otherwise quadrature against the grid masses.
    pub fn pair(&self, psi: impl Fn(&PointP1) -> f64) -> f64 {
        if !self.sample_cloud.is_empty() {
            return self.sample_cloud.iter().map(|p| psi(p)).sum::<f64>()
                / self.sample_cloud.len() as f64;
        }
        let Some(gm) = &self.grid_masses else {
            return f64::NAN;
        };
        let spec = &gm.grid;
        let nps = spec.nodes_per_side();
        let mut acc = 0.0;
        for chart in CHARTS {
            let field = gm.masses.get(chart);
            for i in 0..nps {
                for j in 0..nps {
                    let m = field[spec.flat(i, j)];
                    if m != 0.0 {
                        acc += m * psi(&spec.node_point(chart, i, j));
                    }
                }
            }
        }
        acc
    }

    /// Mass carried by grid nodes whose z-coordinate modulus lies in
    /// `(r_lo, r_hi)`.
    pub fn annulus_mass(&self, r_lo: f64, r_hi: f64) -> f64 {
        let Some(gm) = &self.grid_masses else {
            return f64::NAN;
        };
        let spec = &gm.grid;
        let nps = spec.nodes_per_side();
        let mut mass = 0.0;
        for chart in CHARTS {
            for i in 0..nps {
                for j in 0..nps {
                    let c = spec.node_coord(i, j).norm();
                    let r = match chart {
                        Chart::Zero => c,
                        Chart::Inf => {
                            if c == 0.0 {
                                f64::INFINITY
                            } else {
                                1.0 / c
                            }
                        }
                    };
                    if r > r_lo && r < r_hi {
                        mass += gm.masses.get(chart)[spec.flat(i, j)];
                    }
                }
            }
        }
        mass
    }
}

pub(crate) fn laplacian_measure(grid: &GridSpec, g: &GridValues) -> (GridMasses, f64, f64) {
    let nps = grid.nodes_per_side();
    let fs = grid.fs_local_potential();
    let mut masses = GridValues::zeros(grid);
    let mut total_raw = 0.0;
    let mut clipped = 0.0;
    for chart in CHARTS {
        let mut h = fs.clone();
        for (hv, gv) in h.iter_mut().zip(g.get(chart).iter()) {
            *hv += gv;
        }
        let out = masses.get_mut(chart);
        for i in 1..nps - 1 {
            for j in 1..nps - 1 {
                let w = grid.node_blend_weight(chart, i, j);
                if w > 0.0 {
                    let m = w * grid.laplacian_mass(&h, i, j);
                    total_raw += m;
                    if m < 0.0 {
                        clipped += -m;
                    } else {
                        out[grid.flat(i, j)] = m;
                    }
                }
            }
        }
    }
    (
        GridMasses {
            grid: *grid,
            masses,
        },
        total_raw,
        clipped,
    )
}

/// Green measure of the series' orbit start: cell masses are the discrete
/// `dd^c` of the local Fubini-Study potential plus the transported Green
/// potential, assembled over both chart regions and renormalized to total
/// mass 1.
pub fn measure_from_potential(series: &PotentialSeries) -> Result<GreenMeasure> {
    if !(series.tail_bound() < TAIL_REQUIRED) {
        return Err(CoreError::TailTooLarge {
            tail: series.tail_bound(),
            required: TAIL_REQUIRED,
        });
    }
    let grid = series.grid();
    let (mut gm, total_raw, clipped) = laplacian_measure(grid, series.values());

    let total_clipped = total_raw + clipped;
    if total_clipped <= 0.0 {
        return Err(CoreError::InvalidInput(
            "grid measure has no positive mass".into(),
        ));
    }
    let renorm = 1.0 / total_clipped;
    let nps = grid.nodes_per_side();
    for chart in CHARTS {
        let field = gm.masses.get_mut(chart);
        for v in field.iter_mut() {
            *v *= renorm;
        }
    }
    // Bin each node's mass at the center of mass of its 3x3 neighborhood:
    // the discrete Laplacian splits line-supported mass linearly between
    // bracketing node rows, and the local centroid undoes the split. For
    // smooth densities the centroid stays within O(h^2) of the node.
    let mut binned = BinnedMass::empty();
    for chart in CHARTS {
        let field = gm.masses.get(chart);
        for i in 0..nps {
            for j in 0..nps {
                let mass = field[grid.flat(i, j)];
                if mass == 0.0 {
                    continue;
                }
                let mut weight = 0.0;
                let mut com = Complex64::new(0.0, 0.0);
                for di in i.saturating_sub(1)..=(i + 1).min(nps - 1) {
                    for dj in j.saturating_sub(1)..=(j + 1).min(nps - 1) {
                        let m = field[grid.flat(di, dj)];
                        weight += m;
                        com += m * grid.node_coord(di, dj);
                    }
                }
                let coord = if weight > 0.0 {
                    com / weight
                } else {
                    grid.node_coord(i, j)
                };
                let point = match chart {
                    Chart::Zero => PointP1::from_affine(coord),
                    Chart::Inf => PointP1::new(Complex64::new(1.0, 0.0), coord)
                        .unwrap_or_else(|_| grid.node_point(chart, i, j)),
                };
                binned.add(&point, mass);
            }
        }
    }
    Ok(GreenMeasure {
        orbit_index: 0,
        depth_used: series.depth(),
        method: MeasureMethod::Laplacian,
        grid_masses: Some(gm),
        sample_cloud: Vec::new(),
        binned: binned.normalized(),
        total_before_renorm: total_raw,
        clipped_negative: clipped,
        mass_defect_flagged: (total_raw - 1.0).abs() > MASS_DEFECT_LIMIT,
    })
}

/// Approximate `mu(f_0)`-samples: each path pulls the root back through
/// `f_depth, ..., f_0`, choosing one of the `d` preimages (with
/// multiplicity) uniformly at each step. Reproducible under `seed`; sample
/// paths are independent tasks seeded by `(seed, path index)`.
pub fn measure_by_preimages(
    orbit: &[RationalMapP1],
    depth: usize,
    root: &PointP1,
    count: usize,
    seed: u64,
) -> Result<GreenMeasure> {
    crate::potential::check_orbit(orbit, depth + 1)?;
    if count < MIN_SAMPLES {
        return Err(CoreError::InvalidInput(format!(
            "preimage sampler needs at least {MIN_SAMPLES} samples, got {count}"
        )));
    }
    let d = orbit[0].degree();
    let cloud: Result<Vec<PointP1>> = (0..count)
        .into_par_iter()
        .with_min_len(64)
        .map(|path| {
            let mut rng = task_rng(seed, path as u64);
            let mut x = *root;
            for i in (0..=depth).rev() {
                let pre = orbit[i].preimages(&x)?;
                debug_assert_eq!(pre.len(), d);
                x = pre[rng.gen_range(0..pre.len())];
            }
            Ok(x)
        })
        .collect();
    let cloud = cloud?;
    let binned = BinnedMass::from_points(&cloud);
    Ok(GreenMeasure {
        orbit_index: 0,
        depth_used: depth,
        method: MeasureMethod::Preimage,
        grid_masses: None,
        sample_cloud: cloud,
        binned,
        total_before_renorm: 1.0,
        clipped_negative: 0.0,
        mass_defect_flagged: false,
    })
}

/// Distances between measures over the shared coarse binning.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MeasureDistance {
    /// Total variation over the fixed 64x64-per-chart binning.
    pub tv_binned: f64,
    /// Energy distance (chordal metric) between the binned distributions.
    pub energy_dist: f64,
}

impl MeasureDistance {
    pub fn between(a: &GreenMeasure, b: &GreenMeasure) -> Self {
        Self::between_binned(&a.binned, &b.binned)
    }

    pub fn between_binned(a: &BinnedMass, b: &BinnedMass) -> Self {
        Self {
            tv_binned: a.tv(b),
            energy_dist: a.energy_distance(b),
        }
    }
}

/// Pulls each `mu(f_{i+1})`-sample back through one uniformly chosen
/// preimage under `f_i` (sampling `d^{-1} f_i^* mu(f_{i+1})`) and measures
/// the distance to the `mu(f_i)` cloud.
pub fn invariance_pullback_check(
    mu_next: &GreenMeasure,
    f: &RationalMapP1,
    mu_i: &GreenMeasure,
    seed: u64,
) -> Result<MeasureDistance> {
    if mu_next.sample_cloud.is_empty() || mu_i.sample_cloud.is_empty() {
        return Err(CoreError::InvalidInput(
            "invariance checks need sample clouds on both measures".into(),
        ));
    }
    let pulled: Result<Vec<PointP1>> = mu_next
        .sample_cloud
        .par_iter()
        .with_min_len(64)
        .enumerate()
        .map(|(idx, y)| {
            let mut rng = task_rng(seed, idx as u64);
            let pre = f.preimages(y)?;
            Ok(pre[rng.gen_range(0..pre.len())])
        })
        .collect();
    let binned = BinnedMass::from_points(&pulled?);
    Ok(MeasureDistance::between_binned(&binned, &mu_i.binned))
}

/// Pushes every `mu(f_i)`-sample forward through `f_i` and measures the
/// distance to the `mu(f_{i+1})` cloud.
pub fn invariance_pushforward_check(
    mu_i: &GreenMeasure,
    f: &RationalMapP1,
    mu_next: &GreenMeasure,
) -> Result<MeasureDistance> {
    if mu_next.sample_cloud.is_empty() || mu_i.sample_cloud.is_empty() {
        return Err(CoreError::InvalidInput(
            "invariance checks need sample clouds on both measures".into(),
        ));
    }
    let pushed: Result<Vec<PointP1>> = mu_i
        .sample_cloud
        .par_iter()
        .with_min_len(256)
        .map(|x| f.evaluate(x))
        .collect();
    let binned = BinnedMass::from_points(&pushed?);
    Ok(MeasureDistance::between_binned(&binned, &mu_next.binned))
}

/// Pushforward of a cloud through a map, as points.
pub fn push_cloud(f: &RationalMapP1, cloud: &[PointP1]) -> Result<Vec<PointP1>> {
    cloud
        .par_iter()
        .with_min_len(256)
        .map(|x| f.evaluate(x))
        .collect()
}

/// Samples of the Fubini-Study measure: normalized complex Gaussian pairs
/// are unitary-invariant, hence FS-distributed on P^1. Used as a negative
/// control.
pub fn fubini_study_cloud(count: usize, seed: u64) -> Vec<PointP1> {
    (0..count)
        .map(|idx| {
            let mut rng = task_rng(seed ^ 0xf5, idx as u64);
            let g = |r: &mut rand_chacha::ChaCha8Rng| {
                Complex64::new(r.sample(StandardNormal), r.sample(StandardNormal))
            };
            let (z, w) = (g(&mut rng), g(&mut rng));
            PointP1::new(z, w).unwrap_or_else(|_| PointP1::zero())
        })
        .collect()
}
