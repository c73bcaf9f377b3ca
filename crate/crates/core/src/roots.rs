//! Root finding for complex polynomials and binary forms.
//!
//! Degrees 1 and 2 are solved in closed form; higher degrees use
//! Aberth-Ehrlich simultaneous iteration followed by Newton polishing.
//! Binary forms are solved projectively: vanishing leading coefficients
//! become roots at `[1:0]`, and roots with modulus above 1 are polished
//! in the flipped chart.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::point::PointP1;

const ZERO_COEFF_REL: f64 = 1e-13;
const ABERTH_TOL: f64 = 1e-13;
const ABERTH_MAX_ITER: usize = 220;

/// Evaluates `p` and `p'` at `x`. Coefficients are ordered from the leading
/// term down to the constant.
fn horner(coeffs: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

fn quadratic_roots(a: Complex64, b: Complex64, c: Complex64) -> Vec<Complex64> {
    if c.norm() == 0.0 {
        return vec![Complex64::new(0.0, 0.0), -b / a];
    }
    let disc = b * b - 4.0 * a * c;
    let sq = disc.sqrt();
    // Pick the sign that avoids cancellation in b + s*sq.
    let q = if (b + sq).norm() >= (b - sq).norm() {
        -0.5 * (b + sq)
    } else {
        -0.5 * (b - sq)
    };
    vec![q / a, c / q]
}

/// All roots (with multiplicity) of a monic-izable polynomial, leading
/// coefficient first. The leading coefficient must be nonzero.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let deg = coeffs.len().saturating_sub(1);
    match deg {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![-coeffs[1] / coeffs[0]]),
        2 => return Ok(quadratic_roots(coeffs[0], coeffs[1], coeffs[2])),
        _ => {}
    }

    let lead = coeffs[0];
    let monic: Vec<Complex64> = coeffs.iter().map(|&c| c / lead).collect();

    // Cauchy bound: all roots lie in |z| <= 1 + max |c_i|.
    let bound = 1.0
        + monic[1..]
            .iter()
            .map(|c| c.norm())
            .fold(0.0f64, f64::max);
    let radius = 0.5 + 0.5 * bound;
    let mut zs: Vec<Complex64> = (0..deg)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / deg as f64 + 0.3761;
            radius * Complex64::new(theta.cos(), theta.sin())
        })
        .collect();

    for _ in 0..ABERTH_MAX_ITER {
        let mut max_step = 0.0f64;
        for k in 0..deg {
            let (p, dp) = horner(&monic, zs[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let dp = if dp.norm() == 0.0 {
                Complex64::new(1e-300, 0.0)
            } else {
                dp
            };
            let newton = p / dp;
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..deg {
                if j != k {
                    let diff = zs[k] - zs[j];
                    if diff.norm() > 0.0 {
                        sum += diff.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * sum;
            let step = if denom.norm() > 1e-300 {
                newton / denom
            } else {
                newton
            };
            zs[k] -= step;
            max_step = max_step.max(step.norm() / (1.0 + zs[k].norm()));
        }
        if max_step < ABERTH_TOL {
            return Ok(zs);
        }
    }
    Err(CoreError::RootFinding {
        coeffs: coeffs.to_vec(),
    })
}

fn newton_polish(coeffs: &[Complex64], mut x: Complex64) -> Complex64 {
    for _ in 0..4 {
        let (p, dp) = horner(coeffs, x);
        if dp.norm() < 1e-300 {
            break;
        }
        let step = p / dp;
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        x -= step;
        if step.norm() < 1e-16 * (1.0 + x.norm()) {
            break;
        }
    }
    x
}

/// Projective roots of the binary form
/// `R(z, w) = c_0 z^d + c_1 z^{d-1} w + ... + c_d w^d`,
/// returned with multiplicity as a multiset of exactly `d` points.
///
/// An identically zero form is rejected; vanishing leading coefficients give
/// roots at infinity.
pub fn binary_form_roots(coeffs: &[Complex64]) -> Result<Vec<PointP1>> {
    let d = coeffs.len().saturating_sub(1);
    let max_c = coeffs.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    if max_c == 0.0 {
        return Err(CoreError::InvalidInput(
            "binary form is identically zero".into(),
        ));
    }
    let tol = ZERO_COEFF_REL * max_c;

    let mut lead_zeros = 0;
    while lead_zeros < d && coeffs[lead_zeros].norm() <= tol {
        lead_zeros += 1;
    }

    let mut points = vec![PointP1::infinity(); lead_zeros];
    let finite_coeffs = &coeffs[lead_zeros..];
    if finite_coeffs.len() <= 1 {
        return Ok(points);
    }

    let raw = polynomial_roots(finite_coeffs)?;
    // Reversed coefficients give the polynomial with roots 1/zeta; used to
    // polish large roots near [1:0] in the flipped chart.
    let reversed: Vec<Complex64> = finite_coeffs.iter().rev().copied().collect();
    for zeta in raw {
        let point = if zeta.norm() <= 1.0 {
            PointP1::from_affine(newton_polish(finite_coeffs, zeta))
        } else {
            let eta = newton_polish(&reversed, zeta.inv());
            PointP1::new(Complex64::new(1.0, 0.0), eta)?
        };
        points.push(point);
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn residual(coeffs: &[Complex64], x: Complex64) -> f64 {
        horner(coeffs, x).0.norm()
    }

    #[test]
    fn quadratic_closed_form() {
        // z^2 - 4 = 0
        let roots = polynomial_roots(&[c(1.0, 0.0), c(0.0, 0.0), c(-4.0, 0.0)]).unwrap();
        let mut mods: Vec<f64> = roots.iter().map(|r| r.re).collect();
        mods.sort_by(f64::total_cmp);
        assert!((mods[0] + 2.0).abs() < 1e-14);
        assert!((mods[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn double_root_at_zero() {
        let roots = polynomial_roots(&[c(0.5, 0.5), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(roots.len(), 2);
        for r in roots {
            assert!(r.norm() < 1e-12);
        }
    }

    #[test]
    fn aberth_on_roots_of_unity() {
        // z^5 - 1
        let mut coeffs = vec![c(0.0, 0.0); 6];
        coeffs[0] = c(1.0, 0.0);
        coeffs[5] = c(-1.0, 0.0);
        let roots = polynomial_roots(&coeffs).unwrap();
        assert_eq!(roots.len(), 5);
        for r in &roots {
            assert!((r.norm() - 1.0).abs() < 1e-10);
            assert!(residual(&coeffs, *r) < 1e-10);
        }
        // All five distinct.
        for i in 0..5 {
            for j in 0..i {
                assert!((roots[i] - roots[j]).norm() > 0.1);
            }
        }
    }

    #[test]
    fn aberth_with_complex_coefficients() {
        // (z - 2i)(z + 1)(z - 3)(z - 0.5i) expanded on the fly via evaluation checks.
        let coeffs = vec![
            c(1.0, 0.0),
            c(-2.0, -2.5),
            c(-3.0, 3.5),
            c(0.0, 5.5),
            c(0.0, -3.0),
        ];
        let roots = polynomial_roots(&coeffs).unwrap();
        assert_eq!(roots.len(), 4);
        for r in roots {
            assert!(residual(&coeffs, r) < 1e-8, "residual {}", residual(&coeffs, r));
        }
    }

    #[test]
    fn binary_form_roots_at_infinity() {
        // R = z w^2 viewed as a cubic form: roots [0:1] twice... coefficients of
        // z^3, z^2 w, z w^2, w^3 are 0, 0, 1, 0: roots [1:0] x2 and [0:1].
        let pts = binary_form_roots(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(pts.len(), 3);
        let at_inf = pts
            .iter()
            .filter(|p| p.close_to(&PointP1::infinity(), 1e-12))
            .count();
        let at_zero = pts
            .iter()
            .filter(|p| p.close_to(&PointP1::zero(), 1e-12))
            .count();
        assert_eq!((at_inf, at_zero), (2, 1));
    }

    #[test]
    fn binary_form_rejects_zero_form() {
        assert!(binary_form_roots(&[c(0.0, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn large_roots_polished_in_flipped_chart() {
        // (z - 1e6)(z - 1/2): roots far apart across the charts.
        let coeffs = vec![c(1.0, 0.0), c(-1e6 - 0.5, 0.0), c(0.5e6, 0.0)];
        let pts = binary_form_roots(&coeffs).unwrap();
        assert_eq!(pts.len(), 2);
        let big = PointP1::from_affine(c(1e6, 0.0));
        let small = PointP1::from_affine(c(0.5, 0.0));
        assert!(pts.iter().any(|p| p.close_to(&big, 1e-10)));
        assert!(pts.iter().any(|p| p.close_to(&small, 1e-10)));
    }
}
