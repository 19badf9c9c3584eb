use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::word::{abelianize, AbelianVector, Letter, Substitution};

/// Abelianization matrix: `M[i][j]` is the number of occurrences of letter
/// `i` in the image of letter `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AbelianizationMatrix {
    rows: Vec<Vec<i64>>,
}

impl AbelianizationMatrix {
    pub fn from_rows(rows: Vec<Vec<i64>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        AbelianizationMatrix { rows }
    }

    pub fn identity(n: usize) -> Self {
        let mut rows = vec![vec![0; n]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = 1;
        }
        AbelianizationMatrix { rows }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.rows[i][j]
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn mul(&self, other: &AbelianizationMatrix) -> AbelianizationMatrix {
        let n = self.dim();
        let mut rows = vec![vec![0i64; n]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            for (k, &a) in self.rows[i].iter().enumerate() {
                if a == 0 {
                    continue;
                }
                for (j, out) in row.iter_mut().enumerate() {
                    *out += a * other.rows[k][j];
                }
            }
        }
        AbelianizationMatrix { rows }
    }

    pub fn pow(&self, k: u32) -> AbelianizationMatrix {
        let mut out = AbelianizationMatrix::identity(self.dim());
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn apply(&self, v: &AbelianVector) -> AbelianVector {
        AbelianVector(self.apply_slice(v.counts()))
    }

    pub fn apply_slice(&self, v: &[i64]) -> Vec<i64> {
        self.rows
            .iter()
            .map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn apply_f64(&self, v: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().zip(v).map(|(&a, b)| a as f64 * b).sum())
            .collect()
    }

    pub fn transpose_apply_f64(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|j| (0..n).map(|i| self.rows[i][j] as f64 * v[i]).sum())
            .collect()
    }

    /// `M · v` over big naturals.
    pub fn apply_big(&self, v: &[BigUint]) -> Vec<BigUint> {
        self.rows
            .iter()
            .map(|r| {
                let mut acc = BigUint::zero();
                for (&m, vi) in r.iter().zip(v) {
                    if m != 0 {
                        acc += vi * (m as u64);
                    }
                }
                acc
            })
            .collect()
    }

    /// Row vector product `v · M` over big naturals; used for exact image lengths.
    pub fn left_apply_big(&self, v: &[BigUint]) -> Vec<BigUint> {
        let n = self.dim();
        (0..n)
            .map(|j| {
                let mut acc = BigUint::zero();
                for (i, vi) in v.iter().enumerate() {
                    let m = self.rows[i][j];
                    if m != 0 {
                        acc += vi * (m as u64);
                    }
                }
                acc
            })
            .collect()
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&x| x as f64).collect())
            .collect()
    }
}

/// `M[i][j] = |τ(j)|_i`.
pub fn abelianization_matrix(sub: &Substitution) -> AbelianizationMatrix {
    let n = sub.size();
    let mut rows = vec![vec![0i64; n]; n];
    for j in 0..n {
        let col = abelianize(sub.image(j as Letter), n);
        for (i, &c) in col.counts().iter().enumerate() {
            rows[i][j] = c;
        }
    }
    AbelianizationMatrix { rows }
}

/// Primitivity test: smallest `k ≤ (n-1)^2 + 1` with `M^k` entrywise positive.
pub fn is_primitive(m: &AbelianizationMatrix) -> (bool, Option<u32>) {
    let n = m.dim();
    let pattern: Vec<Vec<bool>> = m.rows.iter().map(|r| r.iter().map(|&x| x > 0).collect()).collect();
    let bound = ((n - 1) * (n - 1) + 1) as u32;
    let mut power = pattern.clone();
    for k in 1..=bound {
        if power.iter().all(|r| r.iter().all(|&b| b)) {
            return (true, Some(k));
        }
        let mut next = vec![vec![false; n]; n];
        for i in 0..n {
            for l in 0..n {
                if !power[i][l] {
                    continue;
                }
                for j in 0..n {
                    if pattern[l][j] {
                        next[i][j] = true;
                    }
                }
            }
        }
        power = next;
    }
    (false, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(sub: &[(char, &str)]) -> AbelianizationMatrix {
        abelianization_matrix(&Substitution::from_rules(sub).unwrap())
    }

    #[test]
    fn matrix_examples() {
        assert_eq!(m(&[('a', "ab"), ('b', "a")]).rows(), &[vec![1, 1], vec![1, 0]]);
        assert_eq!(m(&[('a', "aab"), ('b', "bbaab")]).rows(), &[vec![2, 2], vec![1, 3]]);
        assert_eq!(m(&[('a', "aa")]).rows(), &[vec![2]]);
    }

    #[test]
    fn primitivity_examples() {
        assert_eq!(is_primitive(&m(&[('a', "ab"), ('b', "a")])), (true, Some(2)));
        assert_eq!(is_primitive(&m(&[('a', "ab"), ('b', "b")])), (false, None));
        assert_eq!(is_primitive(&m(&[('a', "ab"), ('b', "ba")])), (true, Some(1)));
        assert_eq!(is_primitive(&m(&[('a', "a")])), (true, Some(1)));
    }

    #[test]
    fn wielandt_extremal_matrix_is_found() {
        // Cycles of length 3 and 2: the extremal case for n = 3 needs k = 5.
        let mm = m(&[('a', "b"), ('b', "c"), ('c', "ab")]);
        assert_eq!(is_primitive(&mm), (true, Some(5)));
    }
}
