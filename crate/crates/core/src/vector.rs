//! Small dense-vector helpers on `&[f64]`.
//!
//! Points of the ambient space are plain `Vec<f64>` / `&[f64]`; every
//! Hessian in the catalog is diagonal and is carried as a [`Diagonal`].

use std::cmp::Ordering;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `a + t (b - a)`.
pub fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn dist_inf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Lexicographic total order on coordinates.
pub fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

/// Hausdorff distance between two finite point sets (Euclidean).
pub fn hausdorff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() { 0.0 } else { f64::INFINITY };
    }
    let directed = |p: &[Vec<f64>], q: &[Vec<f64>]| {
        p.iter()
            .map(|x| q.iter().map(|y| dist(x, y)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

/// Diagonal matrix, the storage form of every catalog Hessian.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagonal(pub Vec<f64>);

impl Diagonal {
    pub fn identity(dimension: usize) -> Self {
        Diagonal(vec![1.0; dimension])
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.0.iter().zip(v).map(|(d, x)| d * x).collect()
    }

    /// Operator 2-norm, i.e. the largest absolute diagonal entry.
    pub fn norm(&self) -> f64 {
        norm_inf(&self.0)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.0.iter().all(|d| d.is_finite() && *d > 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hausdorff_of_shifted_pairs() {
        let a = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        let b = vec![vec![0.0, 0.5]];
        assert!((hausdorff(&a, &b) - 1.25f64.sqrt()).abs() < 1e-15);
        assert_eq!(hausdorff(&a, &a), 0.0);
    }

    #[test]
    fn lex_order_breaks_ties_on_later_coordinates() {
        assert_eq!(lex_cmp(&[1.0, 2.0], &[1.0, 3.0]), Ordering::Less);
        assert_eq!(lex_cmp(&[2.0, 0.0], &[1.0, 3.0]), Ordering::Greater);
    }
}
