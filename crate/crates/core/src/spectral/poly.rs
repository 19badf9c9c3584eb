//! Exact integer polynomials: characteristic polynomials, rational roots and
//! factorization over the rationals for monic inputs of desk-scale degree.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::matrix::AbelianizationMatrix;
use crate::error::{Error, Result};

/// Integer polynomial with coefficients stored lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntPolynomial {
    coeffs: Vec<i128>,
}

impl IntPolynomial {
    /// Builds a polynomial from ascending coefficients, trimming leading zeros.
    pub fn new(mut coeffs: Vec<i128>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0);
        }
        IntPolynomial { coeffs }
    }

    /// `x - r`
    pub fn linear(root: i128) -> Self {
        IntPolynomial::new(vec![-root, 1])
    }

    pub fn coeffs(&self) -> &[i128] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> i128 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> i128 {
        *self.coeffs.last().unwrap()
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0
    }

    pub fn eval(&self, x: i128) -> Option<i128> {
        let mut acc: i128 = 0;
        for &c in self.coeffs.iter().rev() {
            acc = acc.checked_mul(x)?.checked_add(c)?;
        }
        Some(acc)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c as f64)
    }

    pub fn mul(&self, other: &IntPolynomial) -> Option<IntPolynomial> {
        let mut out = vec![0i128; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].checked_add(a.checked_mul(b)?)?;
            }
        }
        Some(IntPolynomial::new(out))
    }

    /// Exact division by a monic divisor; `None` if the remainder is nonzero
    /// (or on overflow).
    pub fn div_exact_monic(&self, divisor: &IntPolynomial) -> Option<IntPolynomial> {
        debug_assert!(divisor.is_monic());
        let dd = divisor.degree();
        if self.degree() < dd {
            return if self.is_zero() { Some(self.clone()) } else { None };
        }
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0i128; self.degree() - dd + 1];
        for k in (0..quot.len()).rev() {
            let q = rem[k + dd];
            quot[k] = q;
            if q == 0 {
                continue;
            }
            for (i, &d) in divisor.coeffs.iter().enumerate() {
                rem[k + i] = rem[k + i].checked_sub(q.checked_mul(d)?)?;
            }
        }
        if rem[..dd].iter().all(|&c| c == 0) {
            Some(IntPolynomial::new(quot))
        } else {
            None
        }
    }

    /// Evaluates the polynomial at a square matrix, exactly.
    pub fn eval_matrix(&self, m: &AbelianizationMatrix) -> Option<Vec<Vec<i128>>> {
        let n = m.dim();
        let mut acc = vec![vec![0i128; n]; n];
        for &c in self.coeffs.iter().rev() {
            let mut next = vec![vec![0i128; n]; n];
            for i in 0..n {
                for j in 0..n {
                    let mut s: i128 = 0;
                    for k in 0..n {
                        s = s.checked_add(acc[i][k].checked_mul(m.get(k, j) as i128)?)?;
                    }
                    next[i][j] = s;
                }
                next[i][i] = next[i][i].checked_add(c)?;
            }
            acc = next;
        }
        Some(acc)
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let sign = if c < 0 { "-" } else { "+" };
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.unsigned_abs();
            match (i, a) {
                (0, _) => write!(f, "{a}")?,
                (1, 1) => write!(f, "x")?,
                (1, _) => write!(f, "{a}x")?,
                (_, 1) => write!(f, "x^{i}")?,
                _ => write!(f, "{a}x^{i}")?,
            }
        }
        Ok(())
    }
}

/// `det(xI - M)`, computed exactly with the Faddeev–LeVerrier recurrence.
///
/// Each division by `k` is exact over the integers.
pub fn characteristic_polynomial(m: &AbelianizationMatrix) -> Result<IntPolynomial> {
    let n = m.dim();
    let overflow = || Error::Overflow("characteristic polynomial");
    let mat: Vec<Vec<i128>> = m.rows().iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut coeffs = vec![0i128; n + 1];
    coeffs[n] = 1;
    // aux = M_k, starting from M_0 = 0
    let mut aux = vec![vec![0i128; n]; n];
    for k in 1..=n {
        // M_k = M * M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![0i128; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s: i128 = 0;
                for l in 0..n {
                    s = s
                        .checked_add(mat[i][l].checked_mul(aux[l][j]).ok_or_else(overflow)?)
                        .ok_or_else(overflow)?;
                }
                next[i][j] = s;
            }
            next[i][i] = next[i][i].checked_add(coeffs[n - k + 1]).ok_or_else(overflow)?;
        }
        aux = next;
        // c_{n-k} = -tr(M M_k) / k
        let mut trace: i128 = 0;
        for i in 0..n {
            for l in 0..n {
                trace = trace
                    .checked_add(mat[i][l].checked_mul(aux[l][i]).ok_or_else(overflow)?)
                    .ok_or_else(overflow)?;
            }
        }
        debug_assert_eq!(trace % k as i128, 0);
        coeffs[n - k] = -trace / k as i128;
    }
    Ok(IntPolynomial::new(coeffs))
}

/// Integer roots of a monic polynomial, with multiplicity, and the cofactor
/// left after dividing them out.
pub fn extract_integer_roots(p: &IntPolynomial) -> (Vec<i128>, IntPolynomial) {
    debug_assert!(p.is_monic());
    let mut roots = Vec::new();
    let mut rest = p.clone();
    loop {
        if rest.degree() == 0 {
            break;
        }
        let c0 = rest.coeff(0);
        let found = if c0 == 0 {
            Some(0)
        } else {
            signed_divisors(c0)
                .into_iter()
                .find(|&d| rest.eval(d) == Some(0))
        };
        match found {
            Some(r) => {
                rest = rest
                    .div_exact_monic(&IntPolynomial::linear(r))
                    .expect("root divides exactly");
                roots.push(r);
            }
            None => break,
        }
    }
    roots.sort();
    (roots, rest)
}

fn divisors(n: u128) -> Vec<u128> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d: u128 = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

fn signed_divisors(n: i128) -> Vec<i128> {
    let mut out = Vec::new();
    for d in divisors(n.unsigned_abs()) {
        out.push(d as i128);
        out.push(-(d as i128));
    }
    out
}

/// An irreducible factor and its multiplicity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub poly: IntPolynomial,
    pub multiplicity: usize,
}

/// Factors a monic integer polynomial into monic irreducibles over Q.
///
/// Integer roots come out first; the remaining part is screened modulo small
/// primes (degree patterns of the factorization mod p restrict which factor
/// degrees are possible) and split by Kronecker's method over the surviving
/// degrees.
pub fn factor(p: &IntPolynomial) -> Result<Vec<Factor>> {
    if !p.is_monic() {
        return Err(Error::Unsupported("factorization needs a monic polynomial".into()));
    }
    let (roots, rest) = extract_integer_roots(p);
    let mut irreducibles: Vec<IntPolynomial> = roots.into_iter().map(IntPolynomial::linear).collect();
    let mut stack = vec![rest];
    while let Some(q) = stack.pop() {
        if q.degree() == 0 {
            continue;
        }
        match split_once(&q)? {
            Some((g, h)) => {
                stack.push(g);
                stack.push(h);
            }
            None => irreducibles.push(q),
        }
    }
    let mut factors: Vec<Factor> = Vec::new();
    for f in irreducibles {
        match factors.iter_mut().find(|x| x.poly == f) {
            Some(x) => x.multiplicity += 1,
            None => factors.push(Factor { poly: f, multiplicity: 1 }),
        }
    }
    factors.sort_by(|a, b| {
        (a.poly.degree(), a.poly.coeffs().iter().rev().collect::<Vec<_>>())
            .cmp(&(b.poly.degree(), b.poly.coeffs().iter().rev().collect::<Vec<_>>()))
    });
    Ok(factors)
}

/// Irreducibility over Q of a monic integer polynomial.
pub fn is_irreducible(p: &IntPolynomial) -> Result<bool> {
    if p.degree() == 0 {
        return Ok(false);
    }
    let f = factor(p)?;
    Ok(f.len() == 1 && f[0].multiplicity == 1)
}

/// Finds a nontrivial monic factorization `q = g·h` with no integer roots
/// in `q`, or `None` if `q` is irreducible.
fn split_once(q: &IntPolynomial) -> Result<Option<(IntPolynomial, IntPolynomial)>> {
    let n = q.degree();
    if n <= 1 {
        return Ok(None);
    }
    let candidates = candidate_factor_degrees(q);
    for d in candidates {
        if d == 1 {
            // integer roots were already removed
            continue;
        }
        if let Some(g) = kronecker_factor_of_degree(q, d)? {
            let h = q.div_exact_monic(&g).expect("factor divides");
            return Ok(Some((g, h)));
        }
    }
    Ok(None)
}

const SCREEN_PRIMES: [u64; 20] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
];

/// Degrees `1..=n/2` a rational factor could have, given the factor-degree
/// patterns modulo small primes where the polynomial stays squarefree.
pub fn candidate_factor_degrees(q: &IntPolynomial) -> Vec<usize> {
    let n = q.degree();
    let mut possible = vec![true; n + 1];
    for &p in &SCREEN_PRIMES {
        let f = modp::reduce(q, p);
        if !modp::is_squarefree(&f, p) {
            continue;
        }
        let degrees = modp::distinct_degree_pattern(&f, p);
        let mut sums = vec![false; n + 1];
        sums[0] = true;
        for d in degrees {
            for s in (d..=n).rev() {
                if sums[s - d] {
                    sums[s] = true;
                }
            }
        }
        for (k, ok) in possible.iter_mut().enumerate() {
            *ok &= sums[k];
        }
    }
    (1..=n / 2).filter(|&d| possible[d]).collect()
}

/// Searches for a monic integer factor of degree `d` by interpolation through
/// divisors of values at `d` integer points (Kronecker).
fn kronecker_factor_of_degree(q: &IntPolynomial, d: usize) -> Result<Option<IntPolynomial>> {
    let overflow = || Error::Overflow("Kronecker factor search");
    // Pick d evaluation points with the fewest divisors.
    let mut pts: Vec<(usize, i128, i128)> = Vec::new();
    for x in -12i128..=12 {
        let v = q.eval(x).ok_or_else(overflow)?;
        if v == 0 {
            // q has no integer roots by construction; a zero means x - root divides.
            return Ok(Some(IntPolynomial::linear(x)));
        }
        pts.push((divisors(v.unsigned_abs()).len(), x, v));
    }
    pts.sort();
    pts.truncate(d);
    let xs: Vec<i128> = pts.iter().map(|p| p.1).collect();
    let choices: Vec<Vec<i128>> = pts.iter().map(|p| signed_divisors(p.2)).collect();
    let mut idx = vec![0usize; d];
    loop {
        let values: Vec<i128> = idx.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
        if let Some(g) = interpolate_monic(&xs, &values, d) {
            if g.degree() == d && q.div_exact_monic(&g).is_some() {
                return Ok(Some(g));
            }
        }
        // odometer
        let mut k = 0;
        loop {
            if k == d {
                return Ok(None);
            }
            idx[k] += 1;
            if idx[k] < choices[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// The monic polynomial `x^d + h(x)`, `deg h < d`, taking `values[i]` at
/// `xs[i]`, if it has integer coefficients.
fn interpolate_monic(xs: &[i128], values: &[i128], d: usize) -> Option<IntPolynomial> {
    // Newton divided differences of h(x) = g(x) - x^d. For integer polynomials
    // at integer nodes every divided difference is an integer.
    let mut dd: Vec<i128> = Vec::with_capacity(d);
    for (&x, &v) in xs.iter().zip(values) {
        dd.push(v.checked_sub(x.checked_pow(d as u32)?)?);
    }
    for level in 1..d {
        for i in (level..d).rev() {
            let num = dd[i].checked_sub(dd[i - 1])?;
            let den = xs[i] - xs[i - level];
            if num % den != 0 {
                return None;
            }
            dd[i] = num / den;
        }
    }
    // Expand Newton form into monomial coefficients.
    let mut coeffs = vec![0i128; d + 1];
    for k in (0..d).rev() {
        // coeffs = coeffs * (x - xs[k]) + dd[k]
        let mut next = vec![0i128; d + 1];
        for i in 0..d {
            next[i + 1] = next[i + 1].checked_add(coeffs[i])?;
            next[i] = next[i].checked_sub(coeffs[i].checked_mul(xs[k])?)?;
        }
        next[0] = next[0].checked_add(dd[k])?;
        coeffs = next;
    }
    coeffs[d] = coeffs[d].checked_add(1)?;
    Some(IntPolynomial::new(coeffs))
}

/// Arithmetic in `F_p[x]`, enough for squarefreeness and distinct-degree
/// factorization.
pub(crate) mod modp {
    use super::IntPolynomial;

    pub type Poly = Vec<u64>;

    fn trim(mut a: Poly) -> Poly {
        while a.len() > 1 && *a.last().unwrap() == 0 {
            a.pop();
        }
        if a.is_empty() {
            a.push(0);
        }
        a
    }

    fn deg(a: &Poly) -> Option<usize> {
        if a.len() == 1 && a[0] == 0 {
            None
        } else {
            Some(a.len() - 1)
        }
    }

    fn inv(a: u64, p: u64) -> u64 {
        pow(a, p - 2, p)
    }

    fn pow(mut b: u64, mut e: u64, p: u64) -> u64 {
        let mut r = 1u64;
        b %= p;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        r
    }

    pub fn reduce(q: &IntPolynomial, p: u64) -> Poly {
        trim(q.coeffs().iter().map(|&c| c.rem_euclid(p as i128) as u64).collect())
    }

    fn rem(a: &Poly, m: &Poly, p: u64) -> Poly {
        let dm = deg(m).expect("division by zero polynomial");
        let mut r = a.clone();
        let li = inv(m[dm], p);
        while let Some(dr) = deg(&r) {
            if dr < dm {
                break;
            }
            let f = r[dr] * li % p;
            for i in 0..=dm {
                let t = f * m[i] % p;
                r[dr - dm + i] = (r[dr - dm + i] + p - t) % p;
            }
            r = trim(r);
        }
        r
    }

    fn div(a: &Poly, m: &Poly, p: u64) -> Poly {
        let dm = deg(m).expect("division by zero polynomial");
        let mut r = a.clone();
        let li = inv(m[dm], p);
        let Some(da) = deg(a) else { return vec![0] };
        if da < dm {
            return vec![0];
        }
        let mut q = vec![0u64; da - dm + 1];
        while let Some(dr) = deg(&r) {
            if dr < dm {
                break;
            }
            let f = r[dr] * li % p;
            q[dr - dm] = f;
            for i in 0..=dm {
                let t = f * m[i] % p;
                r[dr - dm + i] = (r[dr - dm + i] + p - t) % p;
            }
            r = trim(r);
        }
        trim(q)
    }

    fn mul_mod(a: &Poly, b: &Poly, m: &Poly, p: u64) -> Poly {
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % p;
            }
        }
        rem(&trim(out), m, p)
    }

    fn pow_mod(base: &Poly, mut e: u64, m: &Poly, p: u64) -> Poly {
        let mut r = vec![1u64];
        let mut b = rem(base, m, p);
        while e > 0 {
            if e & 1 == 1 {
                r = mul_mod(&r, &b, m, p);
            }
            b = mul_mod(&b, &b, m, p);
            e >>= 1;
        }
        r
    }

    fn gcd(a: &Poly, b: &Poly, p: u64) -> Poly {
        let mut a = trim(a.clone());
        let mut b = trim(b.clone());
        while deg(&b).is_some() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        match deg(&a) {
            None => a,
            Some(d) => {
                let li = inv(a[d], p);
                a.iter().map(|&c| c * li % p).collect()
            }
        }
    }

    fn sub(a: &Poly, b: &Poly, p: u64) -> Poly {
        let n = a.len().max(b.len());
        trim(
            (0..n)
                .map(|i| {
                    let x = a.get(i).copied().unwrap_or(0);
                    let y = b.get(i).copied().unwrap_or(0);
                    (x + p - y) % p
                })
                .collect(),
        )
    }

    fn derivative(a: &Poly, p: u64) -> Poly {
        if a.len() <= 1 {
            return vec![0];
        }
        trim(a.iter().enumerate().skip(1).map(|(i, &c)| (i as u64 % p) * c % p).collect())
    }

    pub fn is_squarefree(f: &Poly, p: u64) -> bool {
        match deg(f) {
            None | Some(0) => false,
            Some(_) => {
                let d = derivative(f, p);
                deg(&d).is_some() && deg(&gcd(f, &d, p)) == Some(0)
            }
        }
    }

    /// Degrees of the irreducible factors of a squarefree monic `f` mod p.
    pub fn distinct_degree_pattern(f: &Poly, p: u64) -> Vec<usize> {
        let mut out = Vec::new();
        let mut rest = f.clone();
        let x: Poly = vec![0, 1];
        let mut xp = x.clone();
        let mut i = 0usize;
        while let Some(dr) = deg(&rest) {
            if dr == 0 {
                break;
            }
            i += 1;
            if 2 * i > dr {
                out.push(dr);
                break;
            }
            xp = pow_mod(&xp, p, &rest, p);
            let g = gcd(&rest, &sub(&xp, &x, p), p);
            let dg = deg(&g).unwrap_or(0);
            if dg > 0 {
                out.extend(std::iter::repeat(i).take(dg / i));
                rest = div(&rest, &g, p);
                xp = rem(&xp, &rest, p);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::matrix::abelianization_matrix;
    use crate::word::Substitution;

    fn cp(rules: &[(char, &str)]) -> IntPolynomial {
        characteristic_polynomial(&abelianization_matrix(&Substitution::from_rules(rules).unwrap())).unwrap()
    }

    #[test]
    fn characteristic_polynomial_examples() {
        assert_eq!(cp(&[('a', "ab"), ('b', "a")]).coeffs(), &[-1, -1, 1]);
        assert_eq!(cp(&[('a', "ab"), ('b', "ac"), ('c', "a")]).coeffs(), &[-1, -1, -1, 1]);
        assert_eq!(cp(&[('a', "ab"), ('b', "ba")]).coeffs(), &[0, -2, 1]);
        assert_eq!(cp(&[('a', "aab"), ('b', "bbaab")]).coeffs(), &[4, -5, 1]);
    }

    #[test]
    fn display() {
        assert_eq!(cp(&[('a', "ab"), ('b', "ac"), ('c', "a")]).to_string(), "x^3 - x^2 - x - 1");
        assert_eq!(IntPolynomial::new(vec![0, -2, 1]).to_string(), "x^2 - 2x");
    }

    #[test]
    fn integer_roots() {
        let (r, rest) = extract_integer_roots(&IntPolynomial::new(vec![8, -6, 1]));
        assert_eq!(r, vec![2, 4]);
        assert_eq!(rest.coeffs(), &[1]);
        let (r, rest) = extract_integer_roots(&IntPolynomial::new(vec![-1, -1, 1]));
        assert!(r.is_empty());
        assert_eq!(rest.degree(), 2);
    }

    #[test]
    fn factors_products_of_quadratics() {
        // (x^2 - x - 1)(x^2 + 1)
        let a = IntPolynomial::new(vec![-1, -1, 1]);
        let b = IntPolynomial::new(vec![1, 0, 1]);
        let f = factor(&a.mul(&b).unwrap()).unwrap();
        assert_eq!(f.len(), 2);
        assert!(f.iter().any(|x| x.poly == a));
        assert!(f.iter().any(|x| x.poly == b));
        // (x^2 - x - 1)^2 (x - 3)
        let sq = a.mul(&a).unwrap().mul(&IntPolynomial::linear(3)).unwrap();
        let f = factor(&sq).unwrap();
        assert_eq!(f[0], Factor { poly: IntPolynomial::linear(3), multiplicity: 1 });
        assert_eq!(f[1], Factor { poly: a, multiplicity: 2 });
    }

    #[test]
    fn x4_plus_1_is_irreducible_despite_splitting_mod_every_prime() {
        // Reducible modulo every prime; the screen only rules out linear factors.
        let p = IntPolynomial::new(vec![1, 0, 0, 0, 1]);
        assert_eq!(candidate_factor_degrees(&p), vec![2]);
        assert!(is_irreducible(&p).unwrap());
    }

    #[test]
    fn tribonacci_is_irreducible() {
        assert!(is_irreducible(&IntPolynomial::new(vec![-1, -1, -1, 1])).unwrap());
        assert!(candidate_factor_degrees(&IntPolynomial::new(vec![-1, -1, -1, 1])).is_empty());
    }

    #[test]
    fn cayley_hamilton_small() {
        let m = abelianization_matrix(&Substitution::from_rules(&[('a', "abc"), ('b', "ac"), ('c', "b")]).unwrap());
        let p = characteristic_polynomial(&m).unwrap();
        let z = p.eval_matrix(&m).unwrap();
        assert!(z.iter().all(|r| r.iter().all(|&x| x == 0)));
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        let g = IntPolynomial::new(vec![3, -2, 1]);
        let xs = [0, 1];
        let vals: Vec<i128> = xs.iter().map(|&x| g.eval(x).unwrap()).collect();
        assert_eq!(interpolate_monic(&xs, &vals, 2), Some(g));
    }
}
