//! Strands: chains of unit lattice segments whose types spell a word, the
//! inflation map they carry, and their projections onto the expanding and
//! contracting directions of the abelianization matrix.
//!
//! Vertices are exact integer vectors; only projections are floating point.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::coincidence::delta_sequence;
use crate::error::{Error, Result};
use crate::spectral::{perron_vector, AbelianizationMatrix, ClassificationReport};
use crate::word::{FixedPointStream, Letter, Substitution, Word};

pub const SPLITTING_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_BURN_IN: usize = 3;
/// Upper bound on segments held by one scan.
pub const MAX_SEGMENTS: usize = 20_000_000;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `R^n = E^u ⊕ E^s` for an irreducible Pisot matrix.
///
/// With `w` the right and `ℓ` the left Perron vector, `pr^u = w ℓᵀ / (ℓ·w)`
/// and `pr^s = I - pr^u`. The stable basis is orthonormal and spans `ker ℓᵀ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantSplitting {
    pub matrix: AbelianizationMatrix,
    pub dilation: f64,
    /// Unit right Perron vector.
    pub unstable: Vec<f64>,
    pub unstable_error: f64,
    /// Unit left Perron vector.
    pub left: Vec<f64>,
    pub stable_basis: Vec<Vec<f64>>,
    pub pr_u: Vec<Vec<f64>>,
    pub pr_s: Vec<Vec<f64>>,
    /// Largest entry of `pr^u∘pr^u - pr^u`, `pr^s∘pr^s - pr^s` and `M w - λ w`.
    pub defect: f64,
}

pub fn invariant_splitting(report: &ClassificationReport) -> Result<InvariantSplitting> {
    if !report.irreducible_pisot {
        return Err(Error::Unsupported(
            "invariant splitting needs an irreducible Pisot substitution".into(),
        ));
    }
    let (Some(dilation), Some(roots), Some(right)) = (&report.dilation, &report.roots, &report.perron_vector)
    else {
        return Err(Error::Unsupported("classification is incomplete".into()));
    };
    let m = &report.matrix;
    let n = m.dim();
    let lambda = dilation.value;
    let second = roots.get(1).map_or(0.0, |r| r.modulus);
    let transpose = AbelianizationMatrix::from_rows((0..n).map(|j| m.column(j)).collect());
    let left = perron_vector(&transpose, lambda, second, SPLITTING_TOLERANCE * 1e-3).components;
    let w = right.components.clone();

    let lw = dot(&left, &w);
    let pr_u: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| w[i] * left[j] / lw).collect()).collect();
    let pr_s: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 } - pr_u[i][j]).collect())
        .collect();

    // Orthonormal basis of ℓ^⊥ by Gram–Schmidt on the projected unit vectors.
    let ll = dot(&left, &left);
    let mut stable_basis: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        let mut v: Vec<f64> = (0..n).map(|j| if i == j { 1.0 } else { 0.0 } - left[i] * left[j] / ll).collect();
        for b in &stable_basis {
            let c = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let len = norm(&v);
        if len > 1e-6 && stable_basis.len() + 1 < n {
            stable_basis.push(v.into_iter().map(|x| x / len).collect());
        }
    }

    let square_defect = |p: &[Vec<f64>]| {
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let pp: f64 = (0..n).map(|k| p[i][k] * p[k][j]).sum();
                worst = worst.max((pp - p[i][j]).abs());
            }
        }
        worst
    };
    let mw = m.apply_f64(&w);
    let eig_defect = mw.iter().zip(&w).map(|(a, b)| (a - lambda * b).abs()).fold(0.0, f64::max);
    let defect = square_defect(&pr_u).max(square_defect(&pr_s)).max(eig_defect);
    if defect > SPLITTING_TOLERANCE {
        return Err(Error::Unsupported(format!(
            "numeric splitting defect {defect:e} exceeds {SPLITTING_TOLERANCE:e}"
        )));
    }
    Ok(InvariantSplitting {
        matrix: m.clone(),
        dilation: lambda,
        unstable: w,
        unstable_error: right.error,
        left,
        stable_basis,
        pr_u,
        pr_s,
        defect,
    })
}

impl InvariantSplitting {
    pub fn dim(&self) -> usize {
        self.unstable.len()
    }

    /// `c` with `pr^u(v) = c·w`.
    pub fn unstable_coordinate(&self, v: &[f64]) -> f64 {
        dot(&self.left, v) / dot(&self.left, &self.unstable)
    }

    pub fn stable_projection(&self, v: &[f64]) -> Vec<f64> {
        let c = self.unstable_coordinate(v);
        v.iter().zip(&self.unstable).map(|(x, w)| x - c * w).collect()
    }

    /// Coordinates of `pr^s(v)` in the stable basis.
    pub fn stable_coordinates(&self, v: &[f64]) -> Vec<f64> {
        let p = self.stable_projection(v);
        self.stable_basis.iter().map(|b| dot(&p, b)).collect()
    }

    pub fn stable_norm(&self, v: &[f64]) -> f64 {
        norm(&self.stable_projection(v))
    }
}

/// The unit segment from `start` to `start + e_letter`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Segment {
    pub start: Vec<i64>,
    pub letter: Letter,
}

impl Segment {
    pub fn end(&self) -> Vec<i64> {
        let mut v = self.start.clone();
        v[self.letter as usize] += 1;
        v
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Strand {
    pub segments: Vec<Segment>,
}

impl Strand {
    pub fn pattern(&self) -> Word {
        Word(self.segments.iter().map(|s| s.letter).collect())
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Each segment ends where the next one starts.
    pub fn is_connected(&self) -> bool {
        self.segments.windows(2).all(|p| p[0].end() == p[1].start)
    }

    /// Initial vertices followed by the final terminal vertex.
    pub fn vertices(&self) -> Vec<Vec<i64>> {
        let mut out: Vec<Vec<i64>> = self.segments.iter().map(|s| s.start.clone()).collect();
        if let Some(last) = self.segments.last() {
            out.push(last.end());
        }
        out
    }
}

/// Strand following `w` from `origin`; segment `j` starts at
/// `origin + ab(w_0 … w_{j-1})`.
pub fn build_strand(w: &[Letter], origin: &[i64]) -> Strand {
    let mut v = origin.to_vec();
    let segments = w
        .iter()
        .map(|&l| {
            let s = Segment { start: v.clone(), letter: l };
            v[l as usize] += 1;
            s
        })
        .collect();
    Strand { segments }
}

/// The inflation map: a segment of type `i` at `v` becomes the strand
/// following `τ(i)` from `M v`.
pub fn substitute_strand(sub: &Substitution, m: &AbelianizationMatrix, s: &Strand) -> Result<Strand> {
    let total: usize = s.segments.iter().map(|seg| sub.image(seg.letter).len()).sum();
    if total > MAX_SEGMENTS {
        return Err(Error::InvalidArgument(format!("strand would have {total} segments")));
    }
    let mut segments = Vec::with_capacity(total);
    for seg in &s.segments {
        let mut v = m.apply_slice(&seg.start);
        for &l in sub.image(seg.letter).iter() {
            segments.push(Segment { start: v.clone(), letter: l });
            v[l as usize] = v[l as usize].checked_add(1).ok_or(Error::Overflow("strand vertex"))?;
        }
    }
    Ok(Strand { segments })
}

/// Segment with a real initial vertex, for translates of integer strands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealSegment {
    pub start: Vec<f64>,
    pub letter: Letter,
}

pub fn translate_strand(s: &Strand, shift: &[f64]) -> Vec<RealSegment> {
    s.segments
        .iter()
        .map(|seg| RealSegment {
            start: seg.start.iter().zip(shift).map(|(&a, b)| a as f64 + b).collect(),
            letter: seg.letter,
        })
        .collect()
}

pub fn substitute_real(sub: &Substitution, m: &AbelianizationMatrix, s: &[RealSegment]) -> Vec<RealSegment> {
    let mut out = Vec::new();
    for seg in s {
        let mut v = m.apply_f64(&seg.start);
        for &l in sub.image(seg.letter).iter() {
            out.push(RealSegment { start: v.clone(), letter: l });
            v[l as usize] += 1.0;
        }
    }
    out
}

/// Largest deviation in `Σ(S - t w) = Σ(S) - λ t w` over the given shifts.
pub fn conjugation_error(sub: &Substitution, split: &InvariantSplitting, s: &Strand, shifts: &[f64]) -> Result<f64> {
    let m = &split.matrix;
    let image = substitute_strand(sub, m, s)?;
    let mut worst: f64 = 0.0;
    for &t in shifts {
        let back: Vec<f64> = split.unstable.iter().map(|w| -t * w).collect();
        let lhs = substitute_real(sub, m, &translate_strand(s, &back));
        let fwd: Vec<f64> = split.unstable.iter().map(|w| -split.dilation * t * w).collect();
        let rhs = translate_strand(&image, &fwd);
        for (a, b) in lhs.iter().zip(&rhs) {
            if a.letter != b.letter {
                return Ok(f64::INFINITY);
            }
            let scale = 1.0 + norm(&b.start);
            for (x, y) in a.start.iter().zip(&b.start) {
                worst = worst.max((x - y).abs() / scale);
            }
        }
    }
    Ok(worst)
}

pub const CONJUGATION_SHIFTS: [f64; 5] = [-2.5, -1.0, 0.3, 1.0, 7.25];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub iterations: usize,
    pub burn_in: usize,
    /// `max ‖pr^s(v)‖` over the vertices of `Σ^k(S)`, for `k = 0..=iterations`.
    pub envelopes: Vec<f64>,
    pub segment_counts: Vec<usize>,
    /// Largest envelope from the burn-in on; an empirical stand-in for the
    /// confinement radius, not a proven bound.
    pub empirical_r0: f64,
    /// Some envelope after the burn-in exceeds every earlier one by more
    /// than the tolerance.
    pub new_max_after_burn_in: bool,
    pub tolerance: f64,
    pub conjugation_error: f64,
}

fn envelope(split: &InvariantSplitting, s: &Strand) -> f64 {
    s.vertices()
        .iter()
        .map(|v| split.stable_norm(&v.iter().map(|&x| x as f64).collect::<Vec<_>>()))
        .fold(0.0, f64::max)
}

/// Iterates the inflation map on `seed` and records stable-norm envelopes.
pub fn stability_scan(
    sub: &Substitution,
    seed: &Strand,
    iterations: usize,
    split: &InvariantSplitting,
    tolerance: f64,
) -> Result<StabilityReport> {
    if iterations == 0 {
        return Err(Error::InvalidArgument("iterations must be at least 1".into()));
    }
    if split.dim() != sub.size() {
        return Err(Error::InvalidArgument("splitting does not match the alphabet".into()));
    }
    let burn_in = DEFAULT_BURN_IN;
    let mut envelopes = vec![envelope(split, seed)];
    let mut segment_counts = vec![seed.len()];
    let conj = conjugation_error(sub, split, seed, &CONJUGATION_SHIFTS)?;
    let mut current = seed.clone();
    for _ in 0..iterations {
        current = substitute_strand(sub, &split.matrix, &current)?;
        envelopes.push(envelope(split, &current));
        segment_counts.push(current.len());
    }
    let head = envelopes.iter().take(burn_in + 1).copied().fold(0.0, f64::max);
    let new_max_after_burn_in = envelopes.iter().skip(burn_in + 1).any(|&e| e > head + tolerance);
    let tail = envelopes.iter().skip(burn_in.min(iterations)).copied().fold(0.0, f64::max);
    Ok(StabilityReport {
        iterations,
        burn_in,
        envelopes,
        segment_counts,
        empirical_r0: tail,
        new_max_after_burn_in,
        tolerance,
        conjugation_error: conj,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaGeometry {
    pub horizon: usize,
    pub max_stable_norm: f64,
    /// `(k, max ‖pr^s(Δ_j)‖ for j ≤ k)` at powers of ten and at the horizon.
    pub checkpoints: Vec<(usize, f64)>,
}

/// Stable norms of the abelian differences `Δ_k` between two fixed points.
pub fn delta_stable_norms(
    x: &mut FixedPointStream,
    y: &mut FixedPointStream,
    horizon: usize,
    split: &InvariantSplitting,
) -> Result<DeltaGeometry> {
    let d = delta_sequence(x, y, horizon)?;
    let mut best: f64 = 0.0;
    let mut checkpoints = Vec::new();
    let mut next = 10;
    for (k, v) in d.values.iter().enumerate() {
        best = best.max(split.stable_norm(&v.as_f64()));
        if k == next || k == horizon {
            checkpoints.push((k, best));
            next *= 10;
        }
    }
    Ok(DeltaGeometry {
        horizon,
        max_stable_norm: best,
        checkpoints,
    })
}

/// One CSV row per segment of `Σ^k(seed)`, `k = 0..=iterations`.
pub fn export_csv(sub: &Substitution, seed: &Strand, iterations: usize, split: &InvariantSplitting) -> Result<String> {
    let alphabet = sub.alphabet();
    let mut out = String::from("iteration");
    for c in alphabet.letters() {
        write!(out, ",v_{c}").unwrap();
    }
    out.push_str(",type,unstable");
    for i in 0..split.stable_basis.len() {
        write!(out, ",stable_{i}").unwrap();
    }
    out.push('\n');
    let mut current = seed.clone();
    for k in 0..=iterations {
        if k > 0 {
            current = substitute_strand(sub, &split.matrix, &current)?;
        }
        for seg in &current.segments {
            let v: Vec<f64> = seg.start.iter().map(|&x| x as f64).collect();
            write!(out, "{k}").unwrap();
            for x in &seg.start {
                write!(out, ",{x}").unwrap();
            }
            write!(out, ",{},{:.12}", alphabet.symbol(seg.letter), split.unstable_coordinate(&v)).unwrap();
            for c in split.stable_coordinates(&v) {
                write!(out, ",{c:.12}").unwrap();
            }
            out.push('\n');
        }
    }
    Ok(out)
}

const SVG_SIZE: f64 = 512.0;
const SVG_MARGIN: f64 = 16.0;

/// Scatter plot of the stable coordinates of the vertices of
/// `Σ^iterations(seed)`, colored by segment type. A one-dimensional stable
/// space is drawn along the horizontal axis.
pub fn export_svg(sub: &Substitution, seed: &Strand, iterations: usize, split: &InvariantSplitting) -> Result<String> {
    let mut current = seed.clone();
    for _ in 0..iterations {
        current = substitute_strand(sub, &split.matrix, &current)?;
    }
    let points: Vec<(f64, f64, Letter)> = current
        .segments
        .iter()
        .map(|seg| {
            let v: Vec<f64> = seg.start.iter().map(|&x| x as f64).collect();
            let c = split.stable_coordinates(&v);
            (c.first().copied().unwrap_or(0.0), c.get(1).copied().unwrap_or(0.0), seg.letter)
        })
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &(x, y, _) in &points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let scale = (SVG_SIZE - 2.0 * SVG_MARGIN) / span;
    const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {SVG_SIZE} {SVG_SIZE}" width="{SVG_SIZE}" height="{SVG_SIZE}">"#
    )
    .unwrap();
    writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##).unwrap();
    for (x, y, l) in points {
        let px = SVG_MARGIN + (x - x0) * scale;
        let py = SVG_SIZE - SVG_MARGIN - (y - y0) * scale;
        writeln!(
            out,
            r#"<circle cx="{px:.3}" cy="{py:.3}" r="1.5" fill="{}"/>"#,
            PALETTE[l as usize % PALETTE.len()]
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{abelianization_matrix, classify, DEFAULT_TOLERANCE};

    const FIB: &[(char, &str)] = &[('a', "ab"), ('b', "a")];
    const TRIB: &[(char, &str)] = &[('a', "ab"), ('b', "ac"), ('c', "a")];

    fn setup(rules: &[(char, &str)]) -> (Substitution, Result<InvariantSplitting>) {
        let s = Substitution::from_rules(rules).unwrap();
        let r = classify(&s, DEFAULT_TOLERANCE).unwrap();
        (s, invariant_splitting(&r))
    }

    #[test]
    fn fibonacci_splitting() {
        let (_, sp) = setup(FIB);
        let sp = sp.unwrap();
        assert!((sp.unstable[0] - 0.8507).abs() < 1e-4 && (sp.unstable[1] - 0.5257).abs() < 1e-4);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let b = &sp.stable_basis[0];
        assert!((b[1] / b[0] + phi).abs() < 1e-9);
        assert_eq!(sp.stable_basis.len(), 1);
    }

    #[test]
    fn tribonacci_stable_plane() {
        let (_, sp) = setup(TRIB);
        assert_eq!(sp.unwrap().stable_basis.len(), 2);
    }

    #[test]
    fn thue_morse_unsupported() {
        let (_, sp) = setup(&[('a', "ab"), ('b', "ba")]);
        assert!(matches!(sp, Err(Error::Unsupported(_))));
    }

    #[test]
    fn strand_construction() {
        let s = build_strand(&[0, 1], &[0, 0]);
        assert_eq!(
            s.segments,
            vec![Segment { start: vec![0, 0], letter: 0 }, Segment { start: vec![1, 0], letter: 1 }]
        );
        assert!(build_strand(&[], &[0, 0]).is_empty());
        let f = build_strand(&[0, 1, 0, 0, 1], &[0, 0]);
        assert_eq!(f.vertices().last().unwrap(), &vec![3, 2]);
        assert!(f.is_connected());
    }

    #[test]
    fn inflation_examples() {
        let s = Substitution::from_rules(FIB).unwrap();
        let m = abelianization_matrix(&s);
        let a = build_strand(&[0], &[0, 0]);
        assert_eq!(substitute_strand(&s, &m, &a).unwrap(), build_strand(&[0, 1], &[0, 0]));
        let b = build_strand(&[1], &[1, 0]);
        assert_eq!(substitute_strand(&s, &m, &b).unwrap(), build_strand(&[0], &[1, 1]));
        let e = build_strand(&[], &[0, 0]);
        assert!(substitute_strand(&s, &m, &e).unwrap().is_empty());
    }

    #[test]
    fn scans_are_bounded() {
        for rules in [FIB, TRIB] {
            let (s, sp) = setup(rules);
            let sp = sp.unwrap();
            let seed = build_strand(&[0], &vec![0; s.size()]);
            let r = stability_scan(&s, &seed, 10, &sp, 1e-9).unwrap();
            assert!(r.envelopes.iter().all(|&e| e < 2.0), "{:?}", r.envelopes);
            assert!(r.conjugation_error < 1e-9);
        }
        let (s, sp) = setup(FIB);
        let r = stability_scan(&s, &build_strand(&[], &[0, 0]), 1, &sp.unwrap(), 1e-9).unwrap();
        assert_eq!(r.envelopes, vec![0.0, 0.0]);
    }

    #[test]
    fn exports_are_deterministic() {
        let (s, sp) = setup(TRIB);
        let sp = sp.unwrap();
        let seed = build_strand(&[0], &[0, 0, 0]);
        let csv = export_csv(&s, &seed, 3, &sp).unwrap();
        assert!(csv.starts_with("iteration,v_a,v_b,v_c,type,unstable,stable_0,stable_1\n"));
        assert_eq!(csv.lines().count(), 1 + 1 + 2 + 4 + 7);
        let svg = export_svg(&s, &seed, 5, &sp).unwrap();
        assert_eq!(svg, export_svg(&s, &seed, 5, &sp).unwrap());
        assert!(svg.contains(r#"viewBox="0 0 512 512""#));
    }
}
