//! Dense linear algebra: row-major matrices and LU with partial pivoting.
//!
//! Everything here is O(n^3) textbook material on purpose. The chain
//! analyses solve many small systems exactly once each, determinism
//! matters more than speed, and the state counts are capped at desk
//! scale (n <= 2000) by the callers.

use crate::error::{Error, Result};

/// Row-major square matrix of f64.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    n: usize,
    a: Vec<f64>,
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        Mat { n, a: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::NotSquare { row: i, cols: r.len(), expected: n });
            }
        }
        let mut a = Vec::with_capacity(n * n);
        for r in rows {
            a.extend_from_slice(r);
        }
        Ok(Mat { n, a })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.n..(i + 1) * self.n]
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.a[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.a[i * self.n + j]
    }
}

/// LU factorization PA = LU with partial pivoting, reusable across
/// right-hand sides.
#[derive(Debug)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(m: &Mat) -> Result<Lu> {
        let n = m.n;
        let mut lu = m.a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            // pivot search in column k
            let mut p = k;
            let mut best = lu[k * n + k].abs();
            for i in k + 1..n {
                let v = lu[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(Error::SingularSystem);
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let factor = lu[i * n + k] / pivot;
                lu[i * n + k] = factor;
                if factor != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= factor * lu[k * n + j];
                    }
                }
            }
        }
        Ok(Lu { n, lu, perm })
    }

    /// Solve A x = b for one right-hand side.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        // forward: L y = P b (unit lower triangular)
        for i in 1..n {
            let row = &self.lu[i * n..i * n + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        // backward: U x = y
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s: f64 = row.iter().zip(&x[i + 1..]).map(|(u, v)| u * v).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        x
    }

    /// Diagonal of A^{-1} summed, via one solve per unit vector.
    pub fn inverse_trace(&self) -> f64 {
        let n = self.n;
        let mut tr = 0.0;
        let mut e = vec![0.0; n];
        for k in 0..n {
            e[k] = 1.0;
            let col = self.solve(&e);
            tr += col[k];
            e[k] = 0.0;
        }
        tr
    }
}

/// Strong connectivity of the digraph with an edge x -> y wherever
/// `edge(x, y)` holds, via forward and backward reachability from node 0.
pub fn strongly_connected(n: usize, edge: impl Fn(usize, usize) -> bool) -> bool {
    let reaches_all = |reversed: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for (y, visited) in seen.iter_mut().enumerate() {
                let connected = if reversed { edge(y, x) } else { edge(x, y) };
                if connected && !*visited {
                    *visited = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count == n
    };
    reaches_all(false) && reaches_all(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_small_system() {
        let m = Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let lu = Lu::factor(&m).unwrap();
        let x = lu.solve(&[5.0, 10.0]);
        assert!((x[0] - 1.0).abs() < 1e-14);
        assert!((x[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn lu_pivots_on_zero_diagonal() {
        let m = Mat::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let lu = Lu::factor(&m).unwrap();
        let x = lu.solve(&[2.0, 3.0]);
        assert_eq!(x, vec![3.0, 2.0]);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let m = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(Lu::factor(&m).unwrap_err(), Error::SingularSystem);
    }

    #[test]
    fn inverse_trace_of_identity() {
        let lu = Lu::factor(&Mat::identity(4)).unwrap();
        assert!((lu.inverse_trace() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn connectivity_detects_absorbing_state() {
        // 0 -> 1 but nothing leaves 1
        let ok = strongly_connected(2, |x, y| x == 0 && y == 1);
        assert!(!ok);
        let cycle = strongly_connected(3, |x, y| y == (x + 1) % 3);
        assert!(cycle);
    }
}
