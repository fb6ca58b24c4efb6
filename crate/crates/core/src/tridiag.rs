//! Symmetric tridiagonal matrices, optionally with the two corner entries of a
//! periodic chain.

use faer::Mat;

#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    /// Entry at `(0, n-1)` and `(n-1, 0)` for periodic chains.
    pub corner: Option<f64>,
}

impl SymTridiag {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let n = self.len();
        let mut m = Mat::<f64>::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
        }
        for i in 0..n.saturating_sub(1) {
            m[(i, i + 1)] += self.off[i];
            m[(i + 1, i)] += self.off[i];
        }
        if let Some(c) = self.corner {
            if n > 1 {
                m[(0, n - 1)] += c;
                m[(n - 1, 0)] += c;
            }
        }
        m
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y: Vec<f64> = (0..n).map(|i| self.diag[i] * x[i]).collect();
        for i in 0..n.saturating_sub(1) {
            y[i] += self.off[i] * x[i + 1];
            y[i + 1] += self.off[i] * x[i];
        }
        if let (Some(c), true) = (self.corner, n > 1) {
            y[0] += c * x[n - 1];
            y[n - 1] += c * x[0];
        }
        y
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let n = self.len();
        let mut best = 0.0f64;
        for i in 0..n {
            let mut s = self.diag[i].abs();
            if i > 0 {
                s += self.off[i - 1].abs();
            }
            if i + 1 < n {
                s += self.off[i].abs();
            }
            if let (Some(c), true) = (self.corner, i == 0 || i == n - 1) {
                s += c.abs();
            }
            best = best.max(s);
        }
        best
    }

    /// Solve `(T + shift I) x = b` by LDLᵀ. Returns `None` when a pivot is not
    /// positive, i.e. the shifted matrix is not positive definite. Corner
    /// entries are handled with a Sherman-Morrison correction, in which case
    /// positive definiteness is not certified.
    pub fn solve_shifted(&self, shift: f64, b: &[f64]) -> Option<Vec<f64>> {
        let n = self.len();
        match self.corner {
            Some(c) if n > 2 => {
                let gamma = -(self.diag[0] + shift);
                let mut core = self.clone();
                core.corner = None;
                core.diag[0] -= gamma;
                core.diag[n - 1] -= c * c / gamma;
                let y = core.thomas(shift, b)?;
                let mut u = vec![0.0; n];
                u[0] = gamma;
                u[n - 1] = c;
                let z = core.thomas(shift, &u)?;
                let vy = y[0] + c / gamma * y[n - 1];
                let vz = z[0] + c / gamma * z[n - 1];
                let f = vy / (1.0 + vz);
                Some(y.iter().zip(&z).map(|(yi, zi)| yi - f * zi).collect())
            }
            Some(_) => {
                let mut plain = self.clone();
                plain.corner = None;
                let n = plain.len();
                if n == 2 {
                    plain.off[0] += self.corner.unwrap();
                }
                plain.ldlt_solve(shift, b)
            }
            None => self.ldlt_solve(shift, b),
        }
    }

    fn ldlt_solve(&self, shift: f64, b: &[f64]) -> Option<Vec<f64>> {
        let n = self.len();
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n];
        d[0] = self.diag[0] + shift;
        if d[0] <= 0.0 {
            return None;
        }
        for i in 1..n {
            l[i] = self.off[i - 1] / d[i - 1];
            d[i] = self.diag[i] + shift - l[i] * self.off[i - 1];
            if d[i] <= 0.0 || !d[i].is_finite() {
                return None;
            }
        }
        let mut y = b.to_vec();
        for i in 1..n {
            y[i] -= l[i] * y[i - 1];
        }
        for i in 0..n {
            y[i] /= d[i];
        }
        for i in (0..n - 1).rev() {
            y[i] -= l[i + 1] * y[i + 1];
        }
        Some(y)
    }

    /// Plain Thomas elimination without a definiteness requirement.
    fn thomas(&self, shift: f64, b: &[f64]) -> Option<Vec<f64>> {
        let n = self.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut beta = self.diag[0] + shift;
        if beta == 0.0 {
            return None;
        }
        d[0] = b[0] / beta;
        for i in 1..n {
            c[i - 1] = self.off[i - 1] / beta;
            beta = self.diag[i] + shift - self.off[i - 1] * c[i - 1];
            if beta == 0.0 || !beta.is_finite() {
                return None;
            }
            d[i] = (b[i] - self.off[i - 1] * d[i - 1]) / beta;
        }
        for i in (0..n - 1).rev() {
            let next = d[i + 1];
            d[i] -= c[i] * next;
        }
        Some(d)
    }

    /// Number of eigenvalues strictly below `x` (Sturm count). Only valid
    /// without corner entries.
    pub fn count_below(&self, x: f64) -> usize {
        debug_assert!(self.corner.is_none());
        let n = self.len();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..n {
            let denom = if q == 0.0 { f64::EPSILON * self.off[i - 1].abs().max(1.0) } else { q };
            q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / denom;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based) by Sturm bisection, absolute
    /// accuracy about `eps * norm`.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let norm = self.norm_inf();
        let (mut lo, mut hi) = (-norm - 1.0, norm + 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SymTridiag {
        SymTridiag { diag: vec![4.0, 5.0, 3.0, 6.0], off: vec![-1.0, 0.5, -2.0], corner: None }
    }

    #[test]
    fn solve_matches_multiply() {
        let t = sample();
        let x = vec![1.0, -2.0, 0.5, 3.0];
        let b = t.mul_vec(&x);
        let y = t.solve_shifted(0.0, &b).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn periodic_solve_matches_multiply() {
        let mut t = sample();
        t.corner = Some(-0.7);
        let x = vec![1.0, -2.0, 0.5, 3.0];
        let b = t.mul_vec(&x);
        let y = t.solve_shifted(0.3, &b.iter().zip(&x).map(|(b, x)| b + 0.3 * x).collect::<Vec<_>>()).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_is_rejected() {
        let t = SymTridiag { diag: vec![1.0, -1.0], off: vec![0.0], corner: None };
        assert!(t.solve_shifted(0.0, &[1.0, 1.0]).is_none());
        assert!(t.solve_shifted(2.0, &[1.0, 1.0]).is_some());
    }

    #[test]
    fn sturm_eigenvalues_match_dense() {
        let t = sample();
        let dense = t.to_dense();
        let evd = dense.self_adjoint_eigen(faer::Side::Lower).unwrap();
        let s = evd.S().column_vector();
        for k in 0..4 {
            assert!((t.eigenvalue(k) - s[k]).abs() < 1e-12);
        }
        assert_eq!(t.count_below(-100.0), 0);
        assert_eq!(t.count_below(100.0), 4);
    }
}
