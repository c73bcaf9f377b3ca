//! Drivers on parameter space and the orbit diagnostics of the
//! integrability hypothesis.
//!
//! A driver is a self-map `F` of a low-dimensional parameter space together
//! with a family sending parameters to rational maps. Orbits
//! `f_i = F^i(f_0)` feed every downstream construction; the Birkhoff
//! diagnostics on `log eta(f_i)` decide whether the starting parameter
//! behaves like a generic point of the invariant measure.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::map::{MapLiteral, RationalMapP1};
use crate::stats::{splitmix64, task_rng};

/// Parameter-space self-map. The invariant measure is exact for each
/// built-in: a point mass for `Constant` and `Contraction`, Lebesgue on the
/// circle for `CircleRotation` and `Doubling`, the arcsine density for
/// `Logistic` (a = 4), and the product of uniforms for `IidShift`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriverKind {
    Constant { at: f64 },
    CircleRotation { alpha: f64 },
    Doubling,
    Logistic,
    IidShift { stream_seed: u64 },
    /// `F(t) = factor * t` with `|factor| < 1`; realizes an attracting
    /// fixed point of the driver at `t = 0`.
    Contraction { factor: f64 },
}

/// Continuous family mapping a real parameter to a rational map.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapFamily {
    /// `z -> z^d + r e^{2 pi i t}`.
    PowerCircle { degree: usize, radius: f64 },
    /// `z -> z^d + t` for real `t`.
    PowerLine { degree: usize },
    /// Lift coefficients linear in `t`: `(1 - t) L0 + t L1`. Lets a family
    /// cross the degeneracy locus at a chosen parameter.
    LinearLift {
        degree: usize,
        num0: Vec<[f64; 2]>,
        num1: Vec<[f64; 2]>,
        den0: Vec<[f64; 2]>,
        den1: Vec<[f64; 2]>,
    },
    /// A fixed map literal, for constant drivers.
    Explicit { map: MapLiteral },
}

impl MapFamily {
    pub fn degree(&self) -> usize {
        match self {
            MapFamily::PowerCircle { degree, .. } => *degree,
            MapFamily::PowerLine { degree } => *degree,
            MapFamily::LinearLift { degree, .. } => *degree,
            MapFamily::Explicit { map } => map.degree,
        }
    }

    /// Degenerate-approach stress family: lift `(z^2, (1-t) w^2 + t z^2)`,
    /// which hits the degeneracy locus exactly at `t = 1`.
    pub fn stress_family() -> Self {
        MapFamily::LinearLift {
            degree: 2,
            num0: vec![[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
            num1: vec![[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
            den0: vec![[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]],
            den1: vec![[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
        }
    }

    pub fn map_at(&self, t: f64) -> Result<RationalMapP1> {
        if !t.is_finite() {
            return Err(CoreError::InvalidInput(format!(
                "non-finite family parameter {t}"
            )));
        }
        match self {
            MapFamily::PowerCircle { degree, radius } => {
                let theta = 2.0 * std::f64::consts::PI * t;
                let c = radius * Complex64::new(theta.cos(), theta.sin());
                RationalMapP1::power_plus(*degree, c)
            }
            MapFamily::PowerLine { degree } => {
                RationalMapP1::power_plus(*degree, Complex64::new(t, 0.0))
            }
            MapFamily::LinearLift {
                degree,
                num0,
                num1,
                den0,
                den1,
            } => {
                let blend = |a: &[[f64; 2]], b: &[[f64; 2]]| -> Vec<Complex64> {
                    a.iter()
                        .zip(b.iter())
                        .map(|(x, y)| {
                            Complex64::new(
                                (1.0 - t) * x[0] + t * y[0],
                                (1.0 - t) * x[1] + t * y[1],
                            )
                        })
                        .collect()
                };
                RationalMapP1::from_lift(*degree, blend(num0, num1), blend(den0, den1))
            }
            MapFamily::Explicit { map } => RationalMapP1::try_from(map.clone()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DriverSystem {
    pub kind: DriverKind,
    pub family: MapFamily,
}

impl DriverSystem {
    pub fn new(kind: DriverKind, family: MapFamily) -> Self {
        Self { kind, family }
    }

    pub fn degree(&self) -> usize {
        self.family.degree()
    }

    /// One application of `F`.
    pub fn step(&self, t: f64) -> Result<f64> {
        match &self.kind {
            DriverKind::Constant { .. } => Ok(t),
            DriverKind::CircleRotation { alpha } => Ok((t + alpha).rem_euclid(1.0)),
            DriverKind::Doubling => Ok((2.0 * t).rem_euclid(1.0)),
            DriverKind::Logistic => {
                if !(0.0..=1.0).contains(&t) {
                    return Err(CoreError::InvalidInput(format!(
                        "logistic parameter {t} outside [0, 1]"
                    )));
                }
                Ok(4.0 * t * (1.0 - t))
            }
            DriverKind::IidShift { .. } => Ok(t + 1.0),
            DriverKind::Contraction { factor } => Ok(factor * t),
        }
    }

    /// The parameter handed to the map family. For the i.i.d. shift the
    /// orbit parameter is a stream index; the family parameter is the
    /// uniform variate at that index.
    fn family_parameter(&self, t: f64) -> f64 {
        match &self.kind {
            DriverKind::IidShift { stream_seed } => {
                let index = t.max(0.0) as u64;
                let bits = splitmix64(*stream_seed ^ splitmix64(index));
                (bits >> 11) as f64 / (1u64 << 53) as f64
            }
            _ => t,
        }
    }

    pub fn map_at(&self, t: f64) -> Result<RationalMapP1> {
        self.family.map_at(self.family_parameter(t))
    }

    /// `[t, F(t), ..., F^{length-1}(t)]`.
    pub fn param_orbit(&self, t0: f64, length: usize) -> Result<Vec<f64>> {
        let mut params = Vec::with_capacity(length);
        let mut t = t0;
        for index in 0..length {
            params.push(t);
            if index + 1 < length {
                t = self.step(t).map_err(|e| CoreError::ParameterDomain {
                    index: index + 1,
                    reason: e.to_string(),
                })?;
            }
        }
        Ok(params)
    }

    /// `[f_0, ..., f_{length-1}]` with `f_i = F^i(f_0)`, each normalized.
    /// Deterministic in `(driver, t0)`.
    pub fn orbit(&self, t0: f64, length: usize) -> Result<Vec<RationalMapP1>> {
        if length == 0 {
            return Err(CoreError::InvalidInput("orbit length must be >= 1".into()));
        }
        let params = self.param_orbit(t0, length)?;
        params
            .iter()
            .enumerate()
            .map(|(index, &t)| {
                self.map_at(t).map_err(|e| CoreError::ParameterDomain {
                    index,
                    reason: e.to_string(),
                })
            })
            .collect()
    }

    /// Independent draws from the driver's declared invariant measure.
    pub fn sample_lambda(&self, count: usize, seed: u64) -> Vec<f64> {
        let mut rng = task_rng(seed, 0x1a);
        (0..count)
            .map(|_| match &self.kind {
                DriverKind::Constant { at } => *at,
                DriverKind::CircleRotation { .. } | DriverKind::Doubling => rng.gen::<f64>(),
                DriverKind::Logistic => {
                    let u: f64 = rng.gen();
                    let s = (std::f64::consts::FRAC_PI_2 * u).sin();
                    s * s
                }
                DriverKind::IidShift { .. } => rng.gen_range(0u64..1 << 32) as f64,
                DriverKind::Contraction { .. } => 0.0,
            })
            .collect()
    }

    /// Distance on parameter space: circle metric for torus drivers,
    /// absolute difference otherwise.
    pub fn param_distance(&self, a: f64, b: f64) -> f64 {
        match &self.kind {
            DriverKind::CircleRotation { .. } | DriverKind::Doubling => {
                let frac = (a - b).rem_euclid(1.0);
                frac.min(1.0 - frac)
            }
            _ => (a - b).abs(),
        }
    }

    /// All `n <= horizon` with `dist(F^n(t0), t0) < radius`.
    pub fn recurrence_times(&self, t0: f64, horizon: usize, radius: f64) -> Result<Vec<usize>> {
        if radius <= 0.0 {
            return Err(CoreError::InvalidInput("radius must be positive".into()));
        }
        let params = self.param_orbit(t0, horizon + 1)?;
        Ok((1..=horizon)
            .filter(|&n| self.param_distance(params[n], t0) < radius)
            .collect())
    }

    /// Birkhoff diagnostics of `log eta` along the orbit from `t0`.
    pub fn birkhoff_diagnostics(&self, t0: f64, length: usize) -> Result<OrbitDiagnostics> {
        if length < 16 {
            return Err(CoreError::InvalidInput(
                "diagnostics need orbit length >= 16".into(),
            ));
        }
        let orbit = self.orbit(t0, length)?;
        let log_eta: Vec<f64> = orbit.iter().map(|f| f.log_eta()).collect();
        Ok(OrbitDiagnostics::from_log_eta(&log_eta))
    }

    /// Quick compliance gate for experiments that assume the integrability
    /// hypothesis: no degenerate map on the sampled orbit, no linear drift
    /// of the partial means, and an epsilon certificate small against
    /// `log d / p_hat`.
    pub fn compliance(&self, t0: f64, length: usize, p_hat: f64) -> Result<ComplianceReport> {
        let diag = self.birkhoff_diagnostics(t0, length.max(16))?;
        let eps_budget = 0.9 * (self.degree() as f64).ln() / p_hat.max(1e-9);
        let mut reasons = Vec::new();
        if let Some(i) = diag.degenerate_hit {
            reasons.push(format!("orbit hits degenerate map at index {i}"));
        }
        if diag.non_integrability_flag {
            reasons.push("partial means of log eta drift linearly".into());
        }
        if diag.epsilon_certificate.epsilon >= eps_budget {
            reasons.push(format!(
                "epsilon certificate {:.3e} >= budget {:.3e}",
                diag.epsilon_certificate.epsilon, eps_budget
            ));
        }
        Ok(ComplianceReport {
            compliant: reasons.is_empty(),
            reasons,
            diagnostics: diag,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplianceReport {
    pub compliant: bool,
    pub reasons: Vec<String>,
    pub diagnostics: OrbitDiagnostics,
}

/// Smallest `epsilon` with `log eta(f_n) >= -epsilon n` for all `n >= n0`,
/// over admissible `n0` up to half the observed window.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EpsilonCertificate {
    pub epsilon: f64,
    pub n0: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrbitDiagnostics {
    pub per_step_log_eta: Vec<f64>,
    /// `partial_means[n-1] = (1/n) sum_{i<n} log eta(f_i)`.
    pub birkhoff_partial_means: Vec<f64>,
    pub epsilon_certificate: EpsilonCertificate,
    pub degenerate_hit: Option<usize>,
    pub non_integrability_flag: bool,
}

impl OrbitDiagnostics {
    pub fn from_log_eta(log_eta: &[f64]) -> Self {
        let n = log_eta.len();
        let degenerate_hit = log_eta.iter().position(|v| *v == f64::NEG_INFINITY);

        let mut partial_means = Vec::with_capacity(n);
        let mut sum = 0.0;
        for (i, &v) in log_eta.iter().enumerate() {
            sum += v;
            partial_means.push(sum / (i + 1) as f64);
        }

        // Suffix maxima of (-log eta / n)_+ give the certificate for each n0;
        // the certificate is the smallest over n0 <= n/2.
        let mut suffix = vec![0.0f64; n.max(1)];
        let mut acc = 0.0f64;
        for k in (1..n).rev() {
            let a = (-log_eta[k] / k as f64).max(0.0);
            acc = acc.max(a);
            suffix[k] = acc;
        }
        let n0_max = (n / 2).max(1);
        let mut best = EpsilonCertificate {
            epsilon: if n > 1 { suffix[1] } else { 0.0 },
            n0: 1,
        };
        for n0 in 1..=n0_max.min(n.saturating_sub(1)) {
            if suffix[n0] < best.epsilon {
                best = EpsilonCertificate {
                    epsilon: suffix[n0],
                    n0,
                };
            }
        }

        // Linear-drift detector: slope of the partial means over the second
        // half of the window.
        let non_integrability_flag = degenerate_hit.is_some() || {
            let half = n / 2;
            if half >= 2 && n > half {
                let a = partial_means[half - 1];
                let b = partial_means[n - 1];
                let drift = (b - a) / (n - half) as f64;
                drift < -0.01 || !drift.is_finite()
            } else {
                false
            }
        };

        Self {
            per_step_log_eta: log_eta.to_vec(),
            birkhoff_partial_means: partial_means,
            epsilon_certificate: best,
            degenerate_hit,
            non_integrability_flag,
        }
    }
}
