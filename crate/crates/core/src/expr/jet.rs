//! Second-order forward-mode jets: value, gradient and Hessian with respect
//! to a fixed list of active variables.

use std::fmt;

/// Truncated second-order Taylor bundle in `n` active variables.
///
/// The Hessian is stored as a packed upper triangle, so `hess(i, j)` and
/// `hess(j, i)` read the same cell and are equal bit for bit.
#[derive(Clone, PartialEq)]
pub struct Jet2 {
    value: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
}

fn tri_len(n: usize) -> usize {
    n * (n + 1) / 2
}

#[inline]
fn tri_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl Jet2 {
    pub fn constant(value: f64, n: usize) -> Self {
        Jet2 { value, grad: vec![0.0; n], hess: vec![0.0; tri_len(n)] }
    }

    /// The jet of the `k`-th active variable itself.
    pub fn variable(value: f64, k: usize, n: usize) -> Self {
        let mut j = Jet2::constant(value, n);
        j.grad[k] = 1.0;
        j
    }

    pub fn from_parts(value: f64, grad: Vec<f64>, hess_full: &[Vec<f64>]) -> Self {
        let n = grad.len();
        let mut hess = vec![0.0; tri_len(n)];
        for i in 0..n {
            for j in i..n {
                hess[tri_index(n, i, j)] = hess_full[i][j];
            }
        }
        Jet2 { value, grad, hess }
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn grad(&self) -> &[f64] {
        &self.grad
    }

    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.hess[tri_index(self.dim(), i, j)]
    }

    pub fn hessian(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.hess(i, j)).collect()).collect()
    }

    pub fn is_constant(&self) -> bool {
        self.grad.iter().all(|g| *g == 0.0) && self.hess.iter().all(|h| *h == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|g| g.is_finite())
            && self.hess.iter().all(|h| h.is_finite())
    }

    pub fn add(&self, o: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value + o.value,
            grad: self.grad.iter().zip(&o.grad).map(|(a, b)| a + b).collect(),
            hess: self.hess.iter().zip(&o.hess).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn neg(&self) -> Jet2 {
        Jet2 {
            value: -self.value,
            grad: self.grad.iter().map(|g| -g).collect(),
            hess: self.hess.iter().map(|h| -h).collect(),
        }
    }

    pub fn scale(&self, k: f64) -> Jet2 {
        Jet2 {
            value: k * self.value,
            grad: self.grad.iter().map(|g| k * g).collect(),
            hess: self.hess.iter().map(|h| k * h).collect(),
        }
    }

    pub fn mul(&self, o: &Jet2) -> Jet2 {
        let n = self.dim();
        let (a, b) = (self.value, o.value);
        let grad = (0..n).map(|i| self.grad[i] * b + a * o.grad[i]).collect();
        let mut hess = vec![0.0; tri_len(n)];
        for i in 0..n {
            for j in i..n {
                let k = tri_index(n, i, j);
                hess[k] = self.hess[k] * b
                    + self.grad[i] * o.grad[j]
                    + self.grad[j] * o.grad[i]
                    + a * o.hess[k];
            }
        }
        Jet2 { value: a * b, grad, hess }
    }

    /// Applies a scalar function with value `f0`, first derivative `f1` and
    /// second derivative `f2` at `self.value()`.
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Jet2 {
        let n = self.dim();
        let grad = self.grad.iter().map(|g| f1 * g).collect();
        let mut hess = vec![0.0; tri_len(n)];
        for i in 0..n {
            for j in i..n {
                let k = tri_index(n, i, j);
                hess[k] = f1 * self.hess[k] + f2 * self.grad[i] * self.grad[j];
            }
        }
        Jet2 { value: f0, grad, hess }
    }
}

impl fmt::Debug for Jet2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet2")
            .field("value", &self.value)
            .field("grad", &self.grad)
            .field("hess", &self.hessian())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_bilinear() {
        let x = Jet2::variable(3.0, 0, 2);
        let y = Jet2::variable(4.0, 1, 2);
        let p = x.mul(&y);
        assert_eq!(p.value(), 12.0);
        assert_eq!(p.grad(), &[4.0, 3.0]);
        assert_eq!(p.hess(0, 1), 1.0);
        assert_eq!(p.hess(0, 0), 0.0);
    }

    #[test]
    fn chain_rule_exp() {
        let x = Jet2::variable(0.0, 0, 1);
        let e = x.chain(1.0, 1.0, 1.0);
        assert_eq!((e.value(), e.grad()[0], e.hess(0, 0)), (1.0, 1.0, 1.0));
    }

    #[test]
    fn packed_index_covers_triangle() {
        let n = 4;
        let mut seen = vec![false; tri_len(n)];
        for i in 0..n {
            for j in i..n {
                seen[tri_index(n, i, j)] = true;
                assert_eq!(tri_index(n, i, j), tri_index(n, j, i));
            }
        }
        assert!(seen.iter().all(|s| *s));
    }
}
