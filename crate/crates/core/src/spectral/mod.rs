//! Exact and certified-numeric analysis of the abelianization matrix.

pub mod matrix;
pub mod poly;
pub mod roots;

use serde::{Deserialize, Serialize};

pub use matrix::{abelianization_matrix, is_primitive, AbelianizationMatrix};
pub use poly::{characteristic_polynomial, factor, is_irreducible, Factor, IntPolynomial};
pub use roots::{RootEstimate, UnitCirclePosition};

use crate::error::Result;
use crate::word::Substitution;

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// A decimal approximation together with an error bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Approximation {
    pub value: f64,
    pub error: f64,
}

impl Approximation {
    pub fn contains(&self, x: f64) -> bool {
        (self.value - x).abs() <= self.error
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerronVector {
    /// Positive right eigenvector with unit Euclidean norm.
    pub components: Vec<f64>,
    /// Estimated distance to the true normalized eigenvector.
    pub error: f64,
    /// Collatz–Wielandt bounds `min (Mw)_i/w_i ≤ λ ≤ max (Mw)_i/w_i`.
    pub collatz_wielandt: (f64, f64),
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PisotVerdict {
    Yes,
    No,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub alphabet: Vec<char>,
    pub matrix: AbelianizationMatrix,
    pub primitive: bool,
    pub primitivity_exponent: Option<u32>,
    /// Coefficients of `det(xI - M)`, lowest degree first.
    pub char_poly: IntPolynomial,
    pub factors: Vec<Factor>,
    pub irreducible: bool,
    /// All eigenvalues with multiplicity, largest modulus first.
    pub roots: Option<Vec<RootEstimate>>,
    pub dilation: Option<Approximation>,
    pub perron_vector: Option<PerronVector>,
    /// Dominant root outside the unit circle and every other eigenvalue
    /// certified inside.
    pub pisot_type: Option<PisotVerdict>,
    /// The dilation is a Pisot number: only its algebraic conjugates (the
    /// other roots of its minimal polynomial) are required inside.
    pub dilation_pisot_number: Option<PisotVerdict>,
    pub irreducible_pisot: bool,
}

/// Full spectral report. Non-primitive inputs get only the exact fields.
pub fn classify(sub: &Substitution, tolerance: f64) -> Result<ClassificationReport> {
    let m = abelianization_matrix(sub);
    let (primitive, exponent) = is_primitive(&m);
    let char_poly = characteristic_polynomial(&m)?;
    let factors = factor(&char_poly)?;
    let irreducible = factors.len() == 1 && factors[0].multiplicity == 1;
    let mut report = ClassificationReport {
        alphabet: sub.alphabet().letters().to_vec(),
        matrix: m.clone(),
        primitive,
        primitivity_exponent: exponent,
        char_poly,
        factors,
        irreducible,
        roots: None,
        dilation: None,
        perron_vector: None,
        pisot_type: None,
        dilation_pisot_number: None,
        irreducible_pisot: false,
    };
    if !primitive {
        return Ok(report);
    }

    // Roots per irreducible factor, remembering which factor each came from.
    let mut tagged: Vec<(usize, RootEstimate)> = Vec::new();
    for (fi, f) in report.factors.iter().enumerate() {
        if f.poly.degree() == 1 {
            tagged.push((fi, RootEstimate::exact(-f.poly.coeff(0), f.multiplicity)));
        } else {
            for mut r in roots::squarefree_roots(&f.poly) {
                r.multiplicity = f.multiplicity;
                tagged.push((fi, r));
            }
        }
    }
    tagged.sort_by(|a, b| b.1.modulus.partial_cmp(&a.1.modulus).unwrap());
    let (dominant_factor, dominant) = tagged[0].clone();

    let dilation = Approximation {
        value: dominant.re,
        error: dominant.radius,
    };
    let perron = perron_vector(&m, dilation.value, second_modulus(&tagged), tolerance);

    let position = |r: &RootEstimate| {
        let p = r.position_vs_unit_circle();
        if r.exact.is_none() && r.radius > tolerance && p != UnitCirclePosition::Outside {
            UnitCirclePosition::Undecided
        } else {
            p
        }
    };
    let verdict = |others: &mut dyn Iterator<Item = &RootEstimate>| -> PisotVerdict {
        let mut v = match position(&dominant) {
            UnitCirclePosition::Outside if dominant.multiplicity == 1 => PisotVerdict::Yes,
            UnitCirclePosition::Undecided => PisotVerdict::Indeterminate,
            _ => return PisotVerdict::No,
        };
        for r in others {
            match position(r) {
                UnitCirclePosition::Inside => {}
                UnitCirclePosition::Undecided => v = PisotVerdict::Indeterminate,
                UnitCirclePosition::On | UnitCirclePosition::Outside => return PisotVerdict::No,
            }
        }
        v
    };
    let pisot_type = verdict(&mut tagged.iter().skip(1).map(|t| &t.1));
    let dilation_pisot = verdict(
        &mut tagged
            .iter()
            .skip(1)
            .filter(|t| t.0 == dominant_factor)
            .map(|t| &t.1),
    );

    report.roots = Some(tagged.into_iter().map(|t| t.1).collect());
    report.dilation = Some(dilation);
    report.perron_vector = Some(perron);
    report.pisot_type = Some(pisot_type);
    report.dilation_pisot_number = Some(dilation_pisot);
    report.irreducible_pisot = irreducible && pisot_type == PisotVerdict::Yes;
    Ok(report)
}

fn second_modulus(tagged: &[(usize, RootEstimate)]) -> f64 {
    if tagged[0].1.multiplicity > 1 {
        return tagged[0].1.modulus;
    }
    tagged.get(1).map(|t| t.1.modulus).unwrap_or(0.0)
}

/// Power iteration for the normalized positive right eigenvector, stopped by
/// the Collatz–Wielandt gap.
pub fn perron_vector(m: &AbelianizationMatrix, dilation: f64, second: f64, tolerance: f64) -> PerronVector {
    let n = m.dim();
    let mut w = vec![1.0 / (n as f64).sqrt(); n];
    let mut iterations = 0;
    let mut cw = (0.0, f64::INFINITY);
    while iterations < 100_000 {
        iterations += 1;
        let mw = m.apply_f64(&w);
        let norm = mw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let ratios = mw.iter().zip(&w).map(|(a, b)| a / b);
        cw = ratios.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
        let done = cw.1 - cw.0 <= tolerance * cw.1.max(1.0);
        w = mw.into_iter().map(|x| x / norm).collect();
        if done {
            break;
        }
    }
    let mw = m.apply_f64(&w);
    let residual = mw
        .iter()
        .zip(&w)
        .map(|(a, b)| (a - dilation * b).powi(2))
        .sum::<f64>()
        .sqrt();
    let gap = dilation - second;
    let error = if gap > 0.0 { residual / gap + f64::EPSILON * n as f64 } else { f64::INFINITY };
    PerronVector {
        components: w,
        error,
        collatz_wielandt: cw,
        iterations,
    }
}
