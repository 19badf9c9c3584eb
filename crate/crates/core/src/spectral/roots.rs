//! Numeric roots of integer polynomials with a-posteriori inclusion radii.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::IntPolynomial;

/// A root of the characteristic polynomial: either exact (integer) or a
/// numeric approximation whose true value lies within `radius` of `(re, im)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootEstimate {
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
    /// Inclusion radius; 0 for exact roots.
    pub radius: f64,
    pub exact: Option<i128>,
    /// False when inclusion disks of distinct roots overlap.
    pub certified: bool,
    pub multiplicity: usize,
}

impl RootEstimate {
    pub fn exact(r: i128, multiplicity: usize) -> Self {
        RootEstimate {
            re: r as f64,
            im: 0.0,
            modulus: (r as f64).abs(),
            radius: 0.0,
            exact: Some(r),
            certified: true,
            multiplicity,
        }
    }

    /// Lower and upper bounds on the modulus.
    pub fn modulus_bounds(&self) -> (f64, f64) {
        ((self.modulus - self.radius).max(0.0), self.modulus + self.radius)
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn position_vs_unit_circle(&self) -> UnitCirclePosition {
        if let Some(r) = self.exact {
            return match r.unsigned_abs() {
                0 => UnitCirclePosition::Inside,
                1 => UnitCirclePosition::On,
                _ => UnitCirclePosition::Outside,
            };
        }
        if !self.certified {
            return UnitCirclePosition::Undecided;
        }
        let (lo, hi) = self.modulus_bounds();
        if hi < 1.0 {
            UnitCirclePosition::Inside
        } else if lo > 1.0 {
            UnitCirclePosition::Outside
        } else {
            UnitCirclePosition::Undecided
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitCirclePosition {
    Inside,
    On,
    Outside,
    Undecided,
}

fn horner(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Rounding-error bound for evaluating the polynomial at `z` with Horner.
fn eval_error_bound(coeffs: &[f64], z: Complex64) -> f64 {
    let r = z.norm();
    let mag = coeffs.iter().rev().fold(0.0, |acc, &c| acc * r + c.abs());
    let n = coeffs.len() as f64;
    4.0 * n * f64::EPSILON * mag
}

/// Approximates all roots of a squarefree polynomial by Aberth–Ehrlich
/// iteration, then certifies each with the inclusion radius
/// `deg · |p(z)| / |p'(z)|` (a disk that contains at least one root). When the
/// disks are pairwise disjoint, each contains exactly one root.
pub fn squarefree_roots(p: &IntPolynomial) -> Vec<RootEstimate> {
    let n = p.degree();
    if n == 0 {
        return Vec::new();
    }
    let lead = p.leading() as f64;
    let coeffs: Vec<f64> = p.coeffs().iter().map(|&c| c as f64 / lead).collect();
    if n == 1 {
        let z = Complex64::new(-coeffs[0], 0.0);
        return vec![finish(&coeffs, vec![z]).remove(0)];
    }

    // Cauchy bound for the initial circle.
    let bound = 1.0 + coeffs[..n].iter().map(|c| c.abs()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64) + 0.4;
            Complex64::from_polar(bound * 0.5 + 0.1, theta)
        })
        .collect();

    for _ in 0..500 {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let (pv, dpv) = horner(&coeffs, z[i]);
            if pv.norm() == 0.0 {
                continue;
            }
            let ratio = pv / dpv;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    s += Complex64::new(1.0, 0.0) / (z[i] - z[j]);
                }
            }
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            z[i] -= step;
            max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
        }
        if max_step < 1e-17 {
            break;
        }
    }
    // Newton polish.
    for zi in z.iter_mut() {
        for _ in 0..4 {
            let (pv, dpv) = horner(&coeffs, *zi);
            if dpv.norm() == 0.0 || pv.norm() == 0.0 {
                break;
            }
            *zi -= pv / dpv;
        }
    }
    finish(&coeffs, z)
}

fn finish(coeffs: &[f64], z: Vec<Complex64>) -> Vec<RootEstimate> {
    let n = coeffs.len() - 1;
    let mut out: Vec<RootEstimate> = z
        .iter()
        .map(|&zi| {
            let (pv, dpv) = horner(coeffs, zi);
            let err = eval_error_bound(coeffs, zi);
            let radius = if dpv.norm() == 0.0 {
                f64::INFINITY
            } else {
                n as f64 * (pv.norm() + err) / dpv.norm()
            };
            // Snap conjugation noise on real roots.
            let im = if zi.im.abs() <= radius { 0.0 } else { zi.im };
            RootEstimate {
                re: zi.re,
                im,
                modulus: Complex64::new(zi.re, im).norm(),
                radius: radius.max(f64::EPSILON * zi.norm()),
                exact: None,
                certified: radius.is_finite(),
                multiplicity: 1,
            }
        })
        .collect();
    for i in 0..out.len() {
        for j in 0..out.len() {
            if i == j {
                continue;
            }
            let d = (out[i].value() - out[j].value()).norm();
            if d <= out[i].radius + out[j].radius {
                out[i].certified = false;
            }
        }
    }
    out.sort_by(|a, b| {
        b.modulus
            .partial_cmp(&a.modulus)
            .unwrap()
            .then(b.re.partial_cmp(&a.re).unwrap())
            .then(b.im.partial_cmp(&a.im).unwrap())
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_ratio_roots() {
        let r = squarefree_roots(&IntPolynomial::new(vec![-1, -1, 1]));
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert_eq!(r.len(), 2);
        assert!((r[0].re - phi).abs() < 1e-14);
        assert!((r[1].re + 1.0 / phi).abs() < 1e-14);
        assert!(r.iter().all(|x| x.certified && x.radius < 1e-12));
        assert_eq!(r[0].position_vs_unit_circle(), UnitCirclePosition::Outside);
        assert_eq!(r[1].position_vs_unit_circle(), UnitCirclePosition::Inside);
    }

    #[test]
    fn tribonacci_conjugates_inside() {
        let r = squarefree_roots(&IntPolynomial::new(vec![-1, -1, -1, 1]));
        assert!((r[0].re - 1.839_286_755_214_161).abs() < 1e-13);
        assert_eq!(r[0].im, 0.0);
        assert!(r[1].im.abs() > 0.5);
        assert!((r[1].modulus - (1.0 / r[0].re).sqrt()).abs() < 1e-13);
        assert_eq!(r[1].position_vs_unit_circle(), UnitCirclePosition::Inside);
    }

    #[test]
    fn root_on_unit_circle_is_undecided_numerically() {
        // x^2 + 1: roots ±i have modulus exactly 1.
        let r = squarefree_roots(&IntPolynomial::new(vec![1, 0, 1]));
        assert!(r.iter().all(|x| x.position_vs_unit_circle() == UnitCirclePosition::Undecided));
    }

    #[test]
    fn exact_roots() {
        assert_eq!(RootEstimate::exact(1, 1).position_vs_unit_circle(), UnitCirclePosition::On);
        assert_eq!(RootEstimate::exact(-1, 1).position_vs_unit_circle(), UnitCirclePosition::On);
        assert_eq!(RootEstimate::exact(0, 1).position_vs_unit_circle(), UnitCirclePosition::Inside);
        assert_eq!(RootEstimate::exact(4, 1).position_vs_unit_circle(), UnitCirclePosition::Outside);
    }
}
