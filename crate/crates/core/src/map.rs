//! Degree-d rational self-maps of P^1 via homogeneous lifts.
//!
//! A map is a pair of degree-d binary forms `(P, Q)` with coefficients
//! ordered from `z^d` down to `w^d`. Construction normalizes the lift so
//! that `sup_{|(z,w)|=1} |F(z,w)| = 1`, which makes the potential
//! `u_f = (1/d) log |F| - log |.|` nonpositive. The resultant of `(P, Q)`
//! detects the degeneracy locus: it vanishes exactly when the two forms
//! share a projective root.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::point::{spherical_distance, PointP1};
use crate::roots::binary_form_roots;

pub const MAX_DEGREE: usize = 8;
const SPHERE_GRID: usize = 64;
const NORMALIZATION_TOL: f64 = 1e-12;
const PREIMAGE_RESIDUAL_TOL: f64 = 1e-8;

/// Scale-invariant closeness-to-degeneracy diagnostic,
/// `eta = |Res(P, Q)| / max|coeff|^{2d}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DegeneracyProxy {
    pub log_resultant: f64,
    pub log_coeff_norm: f64,
    /// `log |Res| - 2d log max|coeff|`; `-inf` exactly for degenerate maps.
    pub log_eta: f64,
}

/// Upper bound on `log eta` over all degree-d maps (Hadamard bound on the
/// 2d x 2d Sylvester determinant with entries at most `max|coeff|`).
pub fn log_eta_max(degree: usize) -> f64 {
    degree as f64 * ((degree + 1) as f64).ln()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "MapLiteral", into = "MapLiteral")]
pub struct RationalMapP1 {
    degree: usize,
    num: Vec<Complex64>,
    den: Vec<Complex64>,
    resultant: Complex64,
    log_eta: f64,
}

/// Wire format for map literals:
/// `{"degree": d, "num": [[re,im],...], "den": [[re,im],...]}`,
/// coefficients ordered from `z^d` down to `w^d`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapLiteral {
    pub degree: usize,
    pub num: Vec<[f64; 2]>,
    pub den: Vec<[f64; 2]>,
}

impl From<RationalMapP1> for MapLiteral {
    fn from(map: RationalMapP1) -> Self {
        MapLiteral {
            degree: map.degree,
            num: map.num.iter().map(|c| [c.re, c.im]).collect(),
            den: map.den.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

impl TryFrom<MapLiteral> for RationalMapP1 {
    type Error = CoreError;

    fn try_from(lit: MapLiteral) -> Result<Self> {
        let to_c = |v: &[[f64; 2]]| -> Vec<Complex64> {
            v.iter().map(|p| Complex64::new(p[0], p[1])).collect()
        };
        RationalMapP1::from_lift(lit.degree, to_c(&lit.num), to_c(&lit.den))
    }
}

impl RationalMapP1 {
    /// Builds a map from lift coefficients and normalizes the lift sup to 1.
    /// Degenerate lifts (zero resultant) are representable; dynamical
    /// operations reject them explicitly.
    pub fn from_lift(degree: usize, num: Vec<Complex64>, den: Vec<Complex64>) -> Result<Self> {
        if !(2..=MAX_DEGREE).contains(&degree) {
            return Err(CoreError::InvalidInput(format!(
                "degree {degree} outside supported range 2..={MAX_DEGREE}"
            )));
        }
        if num.len() != degree + 1 || den.len() != degree + 1 {
            return Err(CoreError::InvalidInput(format!(
                "lift coefficient arrays must have length degree+1 = {}",
                degree + 1
            )));
        }
        if num.iter().chain(den.iter()).any(|c| !c.is_finite()) {
            return Err(CoreError::InvalidInput("non-finite coefficient".into()));
        }
        let mut map = Self {
            degree,
            num,
            den,
            resultant: Complex64::new(0.0, 0.0),
            log_eta: f64::NEG_INFINITY,
        };
        let sup = map.lift_sup_on_sphere();
        if sup == 0.0 {
            return Err(CoreError::InvalidInput(
                "lift is identically zero".into(),
            ));
        }
        if (sup - 1.0).abs() > NORMALIZATION_TOL {
            for c in map.num.iter_mut().chain(map.den.iter_mut()) {
                *c /= sup;
            }
        }
        map.resultant = map.compute_resultant();
        map.log_eta = if map.resultant.norm() == 0.0 {
            f64::NEG_INFINITY
        } else {
            map.resultant.norm().ln() - 2.0 * degree as f64 * map.max_coeff().ln()
        };
        Ok(map)
    }

    /// The polynomial `a_0 z^d + a_1 z^{d-1} + ... + a_d` (leading coefficient
    /// first) as a rational map with lift `(sum a_i z^{d-i} w^i, w^d)`.
    pub fn polynomial(coeffs: &[Complex64]) -> Result<Self> {
        let degree = coeffs.len().saturating_sub(1);
        let mut den = vec![Complex64::new(0.0, 0.0); degree + 1];
        den[degree] = Complex64::new(1.0, 0.0);
        Self::from_lift(degree, coeffs.to_vec(), den)
    }

    /// `z -> z^d`.
    pub fn power_map(degree: usize) -> Result<Self> {
        Self::power_plus(degree, Complex64::new(0.0, 0.0))
    }

    /// `z -> z^d + c`.
    pub fn power_plus(degree: usize, c: Complex64) -> Result<Self> {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); degree + 1];
        coeffs[0] = Complex64::new(1.0, 0.0);
        coeffs[degree] = c;
        Self::polynomial(&coeffs)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num(&self) -> &[Complex64] {
        &self.num
    }

    pub fn den(&self) -> &[Complex64] {
        &self.den
    }

    pub fn resultant(&self) -> Complex64 {
        self.resultant
    }

    pub fn is_degenerate(&self) -> bool {
        self.resultant.norm() == 0.0
    }

    pub fn ensure_holomorphic(&self, context: &str) -> Result<()> {
        if self.is_degenerate() {
            Err(CoreError::DegenerateMap {
                context: context.to_string(),
            })
        } else {
            Ok(())
        }
    }

    fn max_coeff(&self) -> f64 {
        self.num
            .iter()
            .chain(self.den.iter())
            .map(|c| c.norm())
            .fold(0.0f64, f64::max)
    }

    pub fn degeneracy_proxy(&self) -> DegeneracyProxy {
        DegeneracyProxy {
            log_resultant: if self.resultant.norm() == 0.0 {
                f64::NEG_INFINITY
            } else {
                self.resultant.norm().ln()
            },
            log_coeff_norm: self.max_coeff().ln(),
            log_eta: self.log_eta,
        }
    }

    pub fn log_eta(&self) -> f64 {
        self.log_eta
    }

    /// Applies the raw lift `F = (P, Q)` to a homogeneous pair.
    pub fn apply_lift(&self, z: Complex64, w: Complex64) -> (Complex64, Complex64) {
        let d = self.degree;
        let mut pow_z = [Complex64::new(1.0, 0.0); MAX_DEGREE + 1];
        let mut pow_w = [Complex64::new(1.0, 0.0); MAX_DEGREE + 1];
        for k in 1..=d {
            pow_z[k] = pow_z[k - 1] * z;
            pow_w[k] = pow_w[k - 1] * w;
        }
        let mut p = Complex64::new(0.0, 0.0);
        let mut q = Complex64::new(0.0, 0.0);
        for i in 0..=d {
            let mono = pow_z[d - i] * pow_w[i];
            p += self.num[i] * mono;
            q += self.den[i] * mono;
        }
        (p, q)
    }

    /// Projective image `f(x)`, renormalized.
    pub fn evaluate(&self, x: &PointP1) -> Result<PointP1> {
        self.ensure_holomorphic("evaluate")?;
        let (p, q) = self.apply_lift(x.z(), x.w());
        PointP1::new(p, q).map_err(|_| CoreError::LiftVanishes)
    }

    /// The d preimages of `y` (with multiplicity): projective roots of
    /// `w_y P(z, w) - z_y Q(z, w)`, polished and residual-checked.
    pub fn preimages(&self, y: &PointP1) -> Result<Vec<PointP1>> {
        self.ensure_holomorphic("preimages")?;
        let coeffs: Vec<Complex64> = (0..=self.degree)
            .map(|i| y.w() * self.num[i] - y.z() * self.den[i])
            .collect();
        let roots = binary_form_roots(&coeffs)?;
        for x in &roots {
            let image = self.evaluate(x)?;
            let residual = spherical_distance(&image, y);
            if residual > PREIMAGE_RESIDUAL_TOL {
                return Err(CoreError::PreimageResidual {
                    residual,
                    coeffs,
                });
            }
        }
        Ok(roots)
    }

    /// Sup of `|F|` over the unit sphere of C^2, by dense sampling of
    /// P^1 (the sup is phase-invariant) followed by local pattern-search
    /// refinement from the best cells.
    fn lift_sup_on_sphere(&self) -> f64 {
        let value = |alpha: f64, beta: f64| -> f64 {
            let z = Complex64::new(alpha.cos(), 0.0);
            let w = alpha.sin() * Complex64::new(beta.cos(), beta.sin());
            let (p, q) = self.apply_lift(z, w);
            (p.norm_sqr() + q.norm_sqr()).sqrt()
        };

        let step_a = std::f64::consts::FRAC_PI_2 / (SPHERE_GRID - 1) as f64;
        let step_b = 2.0 * std::f64::consts::PI / SPHERE_GRID as f64;
        // Best three grid nodes seed the refinement.
        let mut top = [(f64::MIN, 0.0, 0.0); 3];
        for i in 0..SPHERE_GRID {
            let alpha = i as f64 * step_a;
            for j in 0..SPHERE_GRID {
                let beta = j as f64 * step_b;
                let v = value(alpha, beta);
                if v > top[2].0 {
                    top[2] = (v, alpha, beta);
                    top.sort_by(|a, b| b.0.total_cmp(&a.0));
                }
            }
        }

        let mut best = top[0].0;
        for &(_, a0, b0) in &top {
            let (mut a, mut b) = (a0, b0);
            let mut current = value(a, b);
            let (mut sa, mut sb) = (step_a * 0.5, step_b * 0.5);
            for _ in 0..400 {
                let mut improved = false;
                let candidates = [
                    ((a + sa).min(std::f64::consts::FRAC_PI_2), b),
                    ((a - sa).max(0.0), b),
                    (a, b + sb),
                    (a, b - sb),
                ];
                for (ca, cb) in candidates {
                    let v = value(ca, cb);
                    if v > current {
                        current = v;
                        a = ca;
                        b = cb;
                        improved = true;
                    }
                }
                if !improved {
                    sa *= 0.5;
                    sb *= 0.5;
                    if sa < 1e-10 {
                        break;
                    }
                }
            }
            best = best.max(current);
        }
        best
    }

    /// Resultant of `(P, Q)` as the determinant of the 2d x 2d Sylvester
    /// matrix of the two binary forms. A total function of the
    /// coefficients: zero exactly on the degeneracy locus.
    pub fn compute_resultant(&self) -> Complex64 {
        let d = self.degree;
        let n = 2 * d;
        let mut mat = vec![Complex64::new(0.0, 0.0); n * n];
        for row in 0..d {
            for (k, &c) in self.num.iter().enumerate() {
                mat[row * n + row + k] = c;
            }
            for (k, &c) in self.den.iter().enumerate() {
                mat[(d + row) * n + row + k] = c;
            }
        }
        determinant(&mut mat, n)
    }
}

/// In-place LU determinant with partial pivoting.
fn determinant(mat: &mut [Complex64], n: usize) -> Complex64 {
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&a, &b| mat[a * n + col].norm().total_cmp(&mat[b * n + col].norm()))
            .unwrap();
        let pivot = mat[pivot_row * n + col];
        if pivot.norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot_row != col {
            for k in 0..n {
                mat.swap(col * n + k, pivot_row * n + k);
            }
            det = -det;
        }
        det *= pivot;
        for row in col + 1..n {
            let factor = mat[row * n + col] / pivot;
            if factor.norm() == 0.0 {
                continue;
            }
            for k in col..n {
                let sub = factor * mat[col * n + k];
                mat[row * n + k] -= sub;
            }
        }
    }
    det
}

/// Euclidean distance between the normalized lift coefficient vectors after
/// aligning the projective phase on the first significant coefficient.
pub fn coefficient_distance(f: &RationalMapP1, g: &RationalMapP1) -> f64 {
    let stack = |m: &RationalMapP1| -> Vec<Complex64> {
        m.num().iter().chain(m.den().iter()).copied().collect()
    };
    let align = |v: &mut [Complex64]| {
        if let Some(lead) = v.iter().find(|c| c.norm() > 1e-12).copied() {
            let phase = lead / lead.norm();
            for c in v.iter_mut() {
                *c /= phase;
            }
        }
    };
    let mut a = stack(f);
    let mut b = stack(g);
    align(&mut a);
    align(&mut b);
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}
