//! Per-map potentials and the random Green potential series.
//!
//! With a sup-normalized lift `F`, the potential `u_f(x) = (1/d) log|F(x~)|`
//! (unit representative `x~`) satisfies `f^* omega / d = omega + dd^c u_f`
//! and `u_f <= 0`. Along a driver orbit the partial sums
//! `g_n = sum_{i<=n} u_i o f_{i-1} o ... o f_0 / d^i` converge uniformly;
//! the recorded per-term sups certify a geometric tail bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::driver::{DriverSystem, OrbitDiagnostics};
use crate::error::{CoreError, Result};
use crate::grid::{Chart, GridSpec, GridValues, CHARTS};
use crate::map::{coefficient_distance, RationalMapP1};
use crate::point::PointP1;

/// `u_f(x) = (1/d) log |F(x~)| - log |x~|`; representatives are unit
/// vectors, so the second term vanishes. Nonpositive up to the lift
/// normalization tolerance.
pub fn potential_u(f: &RationalMapP1, x: &PointP1) -> Result<f64> {
    f.ensure_holomorphic("potential_u")?;
    let (p, q) = f.apply_lift(x.z(), x.w());
    let norm_sqr = p.norm_sqr() + q.norm_sqr();
    if norm_sqr == 0.0 {
        return Err(CoreError::LiftVanishes);
    }
    Ok(0.5 * norm_sqr.ln() / f.degree() as f64)
}

/// Deterministic 2D pattern search maximizing `value` from `(x0, y0)`.
fn refine_max(
    value: &dyn Fn(f64, f64) -> f64,
    x0: f64,
    y0: f64,
    step0: f64,
    bound: f64,
) -> f64 {
    let (mut x, mut y) = (x0, y0);
    let mut current = value(x, y);
    let mut step = step0;
    for _ in 0..300 {
        let mut improved = false;
        for (cx, cy) in [
            ((x + step).clamp(-bound, bound), y),
            ((x - step).clamp(-bound, bound), y),
            (x, (y + step).clamp(-bound, bound)),
            (x, (y - step).clamp(-bound, bound)),
        ] {
            let v = value(cx, cy);
            if v > current {
                current = v;
                x = cx;
                y = cy;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
            if step < 1e-9 {
                break;
            }
        }
    }
    current
}

/// Estimated `max |u_f|` over the grid, sharpened by a local pattern search
/// from the best nodes. Always a lower bound of the true sup.
pub fn sup_norm_u(f: &RationalMapP1, grid: &GridSpec) -> Result<f64> {
    f.ensure_holomorphic("sup_norm_u")?;
    let nps = grid.nodes_per_side();
    let mut best = 0.0f64;
    let mut top: Vec<(f64, Chart, f64, f64)> = Vec::new();
    for chart in CHARTS {
        for i in 0..nps {
            for j in 0..nps {
                let p = grid.node_point(chart, i, j);
                let v = potential_u(f, &p)?.abs();
                best = best.max(v);
                let c = grid.node_coord(i, j);
                if top.len() < 3 {
                    top.push((v, chart, c.re, c.im));
                    top.sort_by(|a, b| b.0.total_cmp(&a.0));
                } else if v > top[2].0 {
                    top[2] = (v, chart, c.re, c.im);
                    top.sort_by(|a, b| b.0.total_cmp(&a.0));
                }
            }
        }
    }
    for (_, chart, x, y) in top {
        let value = |a: f64, b: f64| -> f64 {
            let c = num_complex::Complex64::new(a, b);
            let p = match chart {
                Chart::Zero => PointP1::from_affine(c),
                Chart::Inf => PointP1::new(num_complex::Complex64::new(1.0, 0.0), c).unwrap(),
            };
            potential_u(f, &p).map(f64::abs).unwrap_or(0.0)
        };
        best = best.max(refine_max(&value, x, y, 0.5 * grid.spacing(), grid.extent()));
    }
    Ok(best)
}

/// Sup of `|u_f - u_g|` on the grid paired with the coefficient-space
/// distance of the normalized lifts.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LipschitzSample {
    pub sup_diff: f64,
    pub dist: f64,
}

pub fn lipschitz_check(
    f: &RationalMapP1,
    g: &RationalMapP1,
    grid: &GridSpec,
) -> Result<LipschitzSample> {
    f.ensure_holomorphic("lipschitz_check")?;
    g.ensure_holomorphic("lipschitz_check")?;
    let nps = grid.nodes_per_side();
    let mut sup_diff = 0.0f64;
    for chart in CHARTS {
        for i in 0..nps {
            for j in 0..nps {
                let p = grid.node_point(chart, i, j);
                let diff = (potential_u(f, &p)? - potential_u(g, &p)?).abs();
                sup_diff = sup_diff.max(diff);
            }
        }
    }
    Ok(LipschitzSample {
        sup_diff,
        dist: coefficient_distance(f, g),
    })
}

pub(crate) fn check_orbit(orbit: &[RationalMapP1], needed: usize) -> Result<()> {
    if orbit.len() < needed {
        return Err(CoreError::InvalidInput(format!(
            "orbit of length {} is too short, need {}",
            orbit.len(),
            needed
        )));
    }
    for (index, f) in orbit.iter().enumerate().take(needed) {
        if f.is_degenerate() {
            return Err(CoreError::DegenerateAtIndex { index });
        }
    }
    Ok(())
}

/// Values of `g_depth` at arbitrary points, by forward transport.
pub fn series_at_points(
    orbit: &[RationalMapP1],
    depth: usize,
    points: &[PointP1],
) -> Result<Vec<f64>> {
    check_orbit(orbit, depth + 1)?;
    let mut current: Vec<PointP1> = points.to_vec();
    let mut values = vec![0.0f64; points.len()];
    let d = orbit[0].degree() as f64;
    for i in 0..=depth {
        if i > 0 {
            let f = &orbit[i - 1];
            for p in current.iter_mut() {
                *p = f.evaluate(p)?;
            }
        }
        let weight = d.powi(-(i as i32));
        let u = &orbit[i];
        for (v, p) in values.iter_mut().zip(current.iter()) {
            *v += weight * potential_u(u, p)?;
        }
    }
    Ok(values)
}

/// Partial sums of the random Green potential on a grid, with per-term
/// sup records, forward-transported grid points (so deepening costs one
/// map application per point) and a certified geometric tail bound.
#[derive(Debug, Clone)]
pub struct PotentialSeries {
    orbit: Vec<RationalMapP1>,
    grid: GridSpec,
    depth: usize,
    values: GridValues,
    transported_zero: Vec<PointP1>,
    transported_inf: Vec<PointP1>,
    terms_sup: Vec<f64>,
    tail_bound: f64,
    term_growth: f64,
    p_hat: f64,
}

impl PotentialSeries {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn grid(&self) -> &GridSpec {
        self.grid_ref()
    }

    fn grid_ref(&self) -> &GridSpec {
        &self.grid
    }

    pub fn orbit(&self) -> &[RationalMapP1] {
        &self.orbit
    }

    pub fn degree(&self) -> usize {
        self.orbit[0].degree()
    }

    pub fn values(&self) -> &GridValues {
        &self.values
    }

    pub fn terms_sup(&self) -> &[f64] {
        &self.terms_sup
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn p_hat(&self) -> f64 {
        self.p_hat
    }

    /// Per-term extrapolation growth factor `rho = exp(eps_hat * p_hat)`.
    pub fn term_growth(&self) -> f64 {
        self.term_growth
    }

    /// Sup of `|g_depth|` over all grid nodes.
    pub fn sup_abs(&self) -> f64 {
        CHARTS
            .iter()
            .flat_map(|&c| self.values.get(c).iter())
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// Sup of `|g - g'|` over grid nodes; both series must share a grid.
    pub fn sup_diff(&self, other: &PotentialSeries) -> f64 {
        let mut sup = 0.0f64;
        for chart in CHARTS {
            for (a, b) in self
                .values
                .get(chart)
                .iter()
                .zip(other.values.get(chart).iter())
            {
                sup = sup.max((a - b).abs());
            }
        }
        sup
    }

    fn tail_formula(&self) -> f64 {
        let window = self.terms_sup.len().min(5);
        let base = self.terms_sup[self.terms_sup.len() - window..]
            .iter()
            .fold(0.0f64, |a, &b| a.max(b));
        let d = self.degree() as f64;
        let q = self.term_growth / d;
        if q >= 1.0 {
            return f64::INFINITY;
        }
        base * d.powi(-(self.depth as i32)) * q / (1.0 - q)
    }

    fn add_term(&mut self, i: usize) -> Result<()> {
        let d = self.degree() as f64;
        let weight = d.powi(-(i as i32));
        let u_map = self.orbit[i].clone();
        if i > 0 {
            let f = self.orbit[i - 1].clone();
            for chart in CHARTS {
                let transported = match chart {
                    Chart::Zero => &mut self.transported_zero,
                    Chart::Inf => &mut self.transported_inf,
                };
                let moved: Result<Vec<PointP1>> = transported
                    .par_iter()
                    .with_min_len(1024)
                    .map(|p| f.evaluate(p))
                    .collect();
                *transported = moved?;
            }
        }
        let mut term_sup = 0.0f64;
        for chart in CHARTS {
            let transported = match chart {
                Chart::Zero => &self.transported_zero,
                Chart::Inf => &self.transported_inf,
            };
            let contributions: Result<Vec<f64>> = transported
                .par_iter()
                .with_min_len(1024)
                .map(|p| potential_u(&u_map, p))
                .collect();
            let contributions = contributions?;
            for (v, u) in self
                .values
                .get_mut(chart)
                .iter_mut()
                .zip(contributions.iter())
            {
                *v += weight * u;
            }
            term_sup = contributions
                .iter()
                .fold(term_sup, |acc, u| acc.max(u.abs()));
        }
        self.terms_sup.push(term_sup);
        Ok(())
    }

    /// Extends the series by one term. The tail bound is the minimum of the
    /// geometric formula and the previous bound, so it never increases.
    pub fn deepen(mut self) -> Result<Self> {
        let next = self.depth + 1;
        check_orbit(&self.orbit, next + 1)?;
        self.depth = next;
        self.add_term(next)?;
        self.tail_bound = self.tail_bound.min(self.tail_formula());
        Ok(self)
    }
}

/// Builds `g_depth` on the grid. `p_hat` is the fitted degeneracy exponent
/// used in the tail extrapolation `||u_i|| <= S rho^i` with
/// `rho = exp(eps_hat p_hat)` and `eps_hat` the epsilon certificate of the
/// orbit's own log-eta diagnostics.
pub fn green_series(
    orbit: &[RationalMapP1],
    depth: usize,
    grid: &GridSpec,
    p_hat: f64,
) -> Result<PotentialSeries> {
    check_orbit(orbit, depth + 1)?;
    let log_eta: Vec<f64> = orbit.iter().map(|f| f.log_eta()).collect();
    let eps_hat = OrbitDiagnostics::from_log_eta(&log_eta)
        .epsilon_certificate
        .epsilon;
    let term_growth = (eps_hat * p_hat).exp();

    let mut series = PotentialSeries {
        orbit: orbit.to_vec(),
        grid: *grid,
        depth: 0,
        values: GridValues::zeros(grid),
        transported_zero: grid.chart_points(Chart::Zero),
        transported_inf: grid.chart_points(Chart::Inf),
        terms_sup: Vec::with_capacity(depth + 1),
        tail_bound: f64::INFINITY,
        term_growth,
        p_hat,
    };
    series.add_term(0)?;
    series.tail_bound = series.tail_formula();
    for _ in 0..depth {
        series = series.deepen()?;
    }
    Ok(series)
}

/// One row of the perturbation table: a perturbed start against the base.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ContinuityRow {
    pub param: f64,
    pub sup_diff: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinuityTable {
    pub rows: Vec<ContinuityRow>,
    /// Truncated `sum_i sup_n eta(F^i(t_n))^{-p_hat} / d^i`.
    pub h_diagnostic: f64,
    pub hypothesis_violated: bool,
    pub p_hat: f64,
}

/// Depth-capped potentials for a sequence of starts converging to the base
/// parameter, compared in sup norm against the base potential, together
/// with the summability diagnostic of the continuity hypothesis.
pub fn continuity_experiment(
    driver: &DriverSystem,
    base_param: f64,
    perturbations: &[f64],
    depth: usize,
    grid: &GridSpec,
    p_hat: f64,
) -> Result<ContinuityTable> {
    let base_orbit = driver.orbit(base_param, depth + 1)?;
    let base_series = green_series(&base_orbit, depth, grid, p_hat)?;

    let mut rows = Vec::with_capacity(perturbations.len());
    let mut orbits = vec![base_orbit];
    for &t in perturbations {
        let orbit = driver.orbit(t, depth + 1)?;
        let series = green_series(&orbit, depth, grid, p_hat)?;
        rows.push(ContinuityRow {
            param: t,
            sup_diff: series.sup_diff(&base_series),
        });
        orbits.push(orbit);
    }

    let d = driver.degree() as f64;
    let mut h_diagnostic = 0.0f64;
    let mut first_term = 0.0f64;
    let mut last_term = 0.0f64;
    let mut violated = false;
    for i in 0..=depth {
        let sup_inv_eta = orbits
            .iter()
            .map(|orbit| (-p_hat * orbit[i].log_eta()).exp())
            .fold(0.0f64, f64::max);
        let term = sup_inv_eta * d.powi(-(i as i32));
        if !term.is_finite() {
            violated = true;
        }
        if i == 0 {
            first_term = term;
        }
        last_term = term;
        h_diagnostic += term;
    }
    if last_term > first_term {
        violated = true;
    }
    Ok(ContinuityTable {
        rows,
        h_diagnostic,
        hypothesis_violated: violated,
        p_hat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::{DriverKind, MapFamily};
    use num_complex::Complex64;

    const LN2: f64 = std::f64::consts::LN_2;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn grid64() -> GridSpec {
        GridSpec::with_resolution(64).unwrap()
    }

    #[test]
    fn potential_of_squaring_hand_values() {
        let f = RationalMapP1::power_map(2).unwrap();
        assert_eq!(potential_u(&f, &PointP1::infinity()).unwrap(), 0.0);
        assert!(
            (potential_u(&f, &PointP1::from_affine(re(1.0))).unwrap() + LN2 / 4.0).abs() < 1e-14
        );
        assert!(potential_u(&f, &PointP1::zero()).unwrap().abs() < 1e-15);
    }

    #[test]
    fn potential_is_scale_independent_and_nonpositive() {
        let f = RationalMapP1::power_plus(3, Complex64::new(0.2, -0.4)).unwrap();
        let x = PointP1::new(Complex64::new(0.3, 1.1), Complex64::new(-0.2, 0.9)).unwrap();
        let lam = Complex64::new(-2.3, 0.7);
        let y = PointP1::new(lam * x.z(), lam * x.w()).unwrap();
        let ux = potential_u(&f, &x).unwrap();
        let uy = potential_u(&f, &y).unwrap();
        assert!((ux - uy).abs() < 1e-13);
        assert!(ux <= 1e-9);
    }

    #[test]
    fn sup_norm_matches_closed_form_for_power_maps() {
        // |u| for z^d is radial with max (log 2)(d-1)/(2d) on |z| = 1;
        // brute-force radial oracle confirms the closed form.
        let grid = GridSpec::with_resolution(128).unwrap();
        for d in 2..=4usize {
            let brute = (0..=20_000)
                .map(|k| {
                    let r: f64 = k as f64 * 1e-4;
                    (0.5 * (1.0 + r * r).ln()
                        - (1.0 / (2.0 * d as f64)) * (1.0 + r.powi(2 * d as i32)).ln())
                    .abs()
                })
                .fold(0.0f64, f64::max);
            let closed = LN2 * (d as f64 - 1.0) / (2.0 * d as f64);
            assert!((brute - closed).abs() < 1e-6, "brute oracle d={d}");
            let f = RationalMapP1::power_map(d).unwrap();
            let est = sup_norm_u(&f, &grid).unwrap();
            assert!((est - closed).abs() < 1e-3, "d={d}: est {est} vs {closed}");
        }
    }

    #[test]
    fn sup_norm_estimate_grows_with_resolution() {
        let f = RationalMapP1::power_plus(2, Complex64::new(0.0, 0.3)).unwrap();
        let coarse = sup_norm_u(&f, &grid64()).unwrap();
        let fine = sup_norm_u(&f, &GridSpec::with_resolution(128).unwrap()).unwrap();
        assert!(fine >= coarse - 1e-12, "coarse {coarse} fine {fine}");
    }

    #[test]
    fn lipschitz_identity_and_projective_scale() {
        let f = RationalMapP1::power_plus(2, re(0.1)).unwrap();
        let s = lipschitz_check(&f, &f, &grid64()).unwrap();
        assert_eq!((s.sup_diff, s.dist), (0.0, 0.0));

        let g = RationalMapP1::from_lift(
            2,
            f.num().iter().map(|c| c * 5.0).collect(),
            f.den().iter().map(|c| c * 5.0).collect(),
        )
        .unwrap();
        let s = lipschitz_check(&f, &g, &grid64()).unwrap();
        assert!(s.sup_diff < 1e-12 && s.dist < 1e-12);
    }

    #[test]
    fn lipschitz_ratio_is_stable_across_spacings() {
        let grid = grid64();
        let base = RationalMapP1::power_map(2).unwrap();
        let mut ratios = Vec::new();
        for c in [0.01, 0.02, 0.04] {
            let g = RationalMapP1::power_plus(2, re(c)).unwrap();
            let s = lipschitz_check(&base, &g, &grid).unwrap();
            assert!(s.dist > 0.0);
            ratios.push(s.sup_diff / s.dist);
        }
        let lo = ratios.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let hi = ratios.iter().fold(0.0f64, |a, &b| a.max(b));
        assert!(hi / lo < 2.0, "ratios {ratios:?}");
    }

    #[test]
    fn constant_squaring_series_hand_values() {
        let orbit = vec![RationalMapP1::power_map(2).unwrap(); 21];
        let points = [PointP1::zero(), PointP1::from_affine(re(1.0))];
        let vals = series_at_points(&orbit, 20, &points).unwrap();
        assert!(vals[0].abs() < 1e-14, "g(0) = {}", vals[0]);
        let expected = -(LN2 / 2.0) * (1.0 - 0.5f64.powi(21));
        assert!((vals[1] - expected).abs() < 1e-12);
        assert!((vals[1] + LN2 / 2.0).abs() < 1e-6);
    }

    #[test]
    fn series_values_are_nonpositive_and_zero_attained_at_infinity() {
        let orbit = vec![RationalMapP1::power_map(2).unwrap(); 13];
        let grid = grid64();
        let series = green_series(&orbit, 12, &grid, 1.0).unwrap();
        for chart in CHARTS {
            for &v in series.values().get(chart) {
                assert!(v <= 1e-9);
            }
        }
        let g_inf = series_at_points(&orbit, 12, &[PointP1::infinity()]).unwrap()[0];
        assert_eq!(g_inf, 0.0);
    }

    fn golden_rotation_orbit(len: usize) -> Vec<RationalMapP1> {
        let driver = DriverSystem::new(
            DriverKind::CircleRotation {
                alpha: 0.618_033_988_749_894_9,
            },
            MapFamily::PowerCircle {
                degree: 2,
                radius: 0.1,
            },
        );
        driver.orbit(0.0, len).unwrap()
    }

    #[test]
    fn functional_equation_at_finite_depth() {
        // g_n(x) = u_0(x) + g^{shifted}_{n-1}(f_0 x) / d
        let orbit = golden_rotation_orbit(12);
        let n = 10;
        let points: Vec<PointP1> = (0..40)
            .map(|k| PointP1::from_affine(Complex64::new(0.05 * k as f64 - 1.0, 0.3)))
            .collect();
        let lhs = series_at_points(&orbit, n, &points).unwrap();
        let images: Vec<PointP1> = points
            .iter()
            .map(|p| orbit[0].evaluate(p).unwrap())
            .collect();
        let shifted = series_at_points(&orbit[1..], n - 1, &images).unwrap();
        for ((l, p), s) in lhs.iter().zip(points.iter()).zip(shifted.iter()) {
            let rhs = potential_u(&orbit[0], p).unwrap() + s / 2.0;
            assert!((l - rhs).abs() < 1e-8, "lhs {l} rhs {rhs}");
        }
    }

    #[test]
    fn cauchy_bound_on_grid_differences() {
        let orbit = golden_rotation_orbit(16);
        let grid = grid64();
        let s5 = green_series(&orbit, 5, &grid, 1.0).unwrap();
        let s10 = green_series(&orbit, 10, &grid, 1.0).unwrap();
        let s15 = green_series(&orbit, 15, &grid, 1.0).unwrap();
        for (a, b) in [(&s5, &s10), (&s10, &s15), (&s5, &s15)] {
            let diff = a.sup_diff(b);
            let bound: f64 = (a.depth() + 1..=b.depth())
                .map(|i| b.terms_sup()[i] / 2f64.powi(i as i32))
                .sum();
            assert!(diff <= bound + 1e-12, "diff {diff} bound {bound}");
        }
    }

    #[test]
    fn tail_bound_is_nonincreasing_and_dominates_differences() {
        let orbit = golden_rotation_orbit(22);
        let grid = grid64();
        let mut series = green_series(&orbit, 5, &grid, 1.0).unwrap();
        let mut snapshots = vec![series.clone()];
        for _ in 0..16 {
            series = series.deepen().unwrap();
            snapshots.push(series.clone());
        }
        for w in snapshots.windows(2) {
            assert!(w[1].tail_bound() <= w[0].tail_bound() + 1e-18);
        }
        // ||g_{n+5} - g_n|| <= tail_bound(n)
        for n in [5usize, 10] {
            let a = &snapshots[n - 5];
            let b = &snapshots[n];
            assert!(a.depth() == n && b.depth() == n + 5);
            let diff = a.sup_diff(b);
            assert!(
                diff <= a.tail_bound(),
                "n={n}: diff {diff} tail {}",
                a.tail_bound()
            );
        }
    }

    #[test]
    fn degenerate_orbit_entry_is_rejected_with_index() {
        let stress = MapFamily::stress_family();
        let good = stress.map_at(0.0).unwrap();
        let bad = stress.map_at(1.0).unwrap();
        let orbit = vec![good.clone(), bad, good];
        let err = green_series(&orbit, 2, &grid64(), 1.0).unwrap_err();
        match err {
            CoreError::DegenerateAtIndex { index } => assert_eq!(index, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn continuity_zero_perturbation_is_exactly_zero() {
        let driver = DriverSystem::new(
            DriverKind::Constant { at: 0.0 },
            MapFamily::PowerLine { degree: 2 },
        );
        let table =
            continuity_experiment(&driver, 0.1, &[0.1, 0.1], 8, &grid64(), 1.0).unwrap();
        for row in &table.rows {
            assert_eq!(row.sup_diff, 0.0);
        }
        assert!(!table.hypothesis_violated);
    }

    #[test]
    fn continuity_constant_driver_perturbations_decrease() {
        let driver = DriverSystem::new(
            DriverKind::Constant { at: 0.0 },
            MapFamily::PowerLine { degree: 2 },
        );
        let perts = [0.25, 0.125, 0.0625];
        let table = continuity_experiment(&driver, 0.0, &perts, 10, &grid64(), 1.0).unwrap();
        let diffs: Vec<f64> = table.rows.iter().map(|r| r.sup_diff).collect();
        assert!(diffs[0] > diffs[1] && diffs[1] > diffs[2], "{diffs:?}");
        assert!(diffs[2] > 0.0);
        assert!(!table.hypothesis_violated);
    }

    #[test]
    fn continuity_attracting_fixed_point_driver() {
        let driver = DriverSystem::new(
            DriverKind::Contraction { factor: 0.5 },
            MapFamily::PowerLine { degree: 2 },
        );
        let perts = [0.2, 0.1, 0.05];
        let table = continuity_experiment(&driver, 0.0, &perts, 10, &grid64(), 1.0).unwrap();
        let diffs: Vec<f64> = table.rows.iter().map(|r| r.sup_diff).collect();
        assert!(diffs[0] > diffs[1] && diffs[1] > diffs[2], "{diffs:?}");
    }

    #[test]
    fn continuity_flags_degenerate_approach() {
        // A start sitting exactly on the degenerate map cannot build a
        // series at all.
        let driver = DriverSystem::new(
            DriverKind::Constant { at: 1.0 },
            MapFamily::stress_family(),
        );
        assert!(continuity_experiment(&driver, 1.0, &[0.9], 4, &grid64(), 1.0).is_err());

        // A family degenerate at t = 0 under a contraction toward 0: eta
        // decays geometrically along every orbit, so the (H)-terms grow
        // and the experiment completes flagged.
        let family = MapFamily::LinearLift {
            degree: 2,
            num0: vec![[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
            num1: vec![[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
            den0: vec![[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
            den1: vec![[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]],
        };
        let driver = DriverSystem::new(DriverKind::Contraction { factor: 0.5 }, family);
        let table =
            continuity_experiment(&driver, 0.5, &[0.4, 0.45], 6, &grid64(), 1.0).unwrap();
        assert!(table.h_diagnostic.is_finite());
        assert!(table.hypothesis_violated);
    }
}
