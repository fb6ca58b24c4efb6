//! Normal modes of small oscillations around a static configuration.

use std::io::Write;

use faer::{Mat, Side};

use crate::classical::{self, ChainSpec, ClassicalSolution};
use crate::error::{Error, Result};
use crate::tridiag::SymTridiag;

/// Eigenvalues below `-UNSTABLE_TOL` mark an unstable configuration.
pub const UNSTABLE_TOL: f64 = 1e-9;
/// Distance below the phonon band edge `omega^2 = 1` for an internal mode.
pub const BAND_TOL: f64 = 1e-6;

/// Orthonormal fluctuation modes, sorted by frequency.
#[derive(Debug, Clone)]
pub struct ModeBasis {
    /// Column `l` is the mode `eta_l(n)`.
    pub eta: Mat<f64>,
    /// Frequencies used downstream. Eigenvalues below the resolution floor
    /// are lifted to it before the square root.
    pub omega: Vec<f64>,
    /// Raw eigenvalues of the stability matrix.
    pub omega_sq: Vec<f64>,
    /// Smallest eigenvalue the solver can resolve, `8 eps ||B||_inf`.
    pub floor: f64,
}

impl ModeBasis {
    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// Mode `l` as a vector over sites.
    pub fn mode(&self, l: usize) -> Vec<f64> {
        (0..self.eta.nrows()).map(|n| self.eta[(n, l)]).collect()
    }

    /// Indices of modes whose raw eigenvalue lies below the resolution floor.
    pub fn unresolved(&self) -> Vec<usize> {
        self.omega_sq.iter().enumerate().filter(|(_, &w)| w < self.floor).map(|(i, _)| i).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeClassification {
    pub internal: Vec<usize>,
    pub phonon: Vec<usize>,
}

/// The matrix `B` of second derivatives of the static energy at the solution.
pub fn stability_matrix(spec: &ChainSpec, solution: &ClassicalSolution) -> SymTridiag {
    classical::hessian(spec, &solution.phi)
}

/// All eigenpairs of `B`.
pub fn diagonalize(b: &SymTridiag) -> Result<ModeBasis> {
    let n = b.len();
    let norm = b.norm_inf();
    let evd = b
        .to_dense()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::NotConverged { iterations: 0, grad_norm: f64::NAN })?;
    let s = evd.S().column_vector();
    let omega_sq: Vec<f64> = (0..n).map(|i| s[i]).collect();
    if let Some(&w) = omega_sq.first() {
        if w < -UNSTABLE_TOL {
            return Err(Error::Unstable { min_eigenvalue: w });
        }
    }
    let mut eta = evd.U().to_owned();
    order_degenerate(&mut eta, &omega_sq, 1e-10 * norm.max(1.0));
    fix_signs(&mut eta);
    let floor = 8.0 * f64::EPSILON * norm;
    let omega = omega_sq.iter().map(|&w| w.max(floor).sqrt()).collect();
    Ok(ModeBasis { eta, omega, omega_sq, floor })
}

/// Within clusters of equal eigenvalues, rotate to reflection eigenvectors
/// and put the symmetric ones first.
fn order_degenerate(eta: &mut Mat<f64>, w: &[f64], tol: f64) {
    let n = w.len();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && w[end] - w[end - 1] < tol {
            end += 1;
        }
        let c = end - start;
        if c > 1 {
            let v = Mat::<f64>::from_fn(n, c, |i, j| eta[(i, start + j)]);
            let pv = Mat::<f64>::from_fn(n, c, |i, j| v[(n - 1 - i, j)]);
            let r = v.transpose() * &pv;
            let r = Mat::<f64>::from_fn(c, c, |i, j| 0.5 * (r[(i, j)] + r[(j, i)]));
            if let Ok(e) = r.self_adjoint_eigen(Side::Lower) {
                let u = e.U();
                // descending reflection eigenvalue: symmetric first
                let rot = Mat::<f64>::from_fn(c, c, |i, j| u[(i, c - 1 - j)]);
                let new = &v * &rot;
                for j in 0..c {
                    for i in 0..n {
                        eta[(i, start + j)] = new[(i, j)];
                    }
                }
            }
        }
        start = end;
    }
}

fn fix_signs(eta: &mut Mat<f64>) {
    for j in 0..eta.ncols() {
        let mut best = 0.0f64;
        let mut sign = 1.0;
        for i in 0..eta.nrows() {
            let x = eta[(i, j)];
            if x.abs() > best {
                best = x.abs();
                sign = x.signum();
            }
        }
        if sign < 0.0 {
            for i in 0..eta.nrows() {
                eta[(i, j)] = -eta[(i, j)];
            }
        }
    }
}

/// Modes below the phonon band edge are internal.
pub fn classify_modes(basis: &ModeBasis) -> ModeClassification {
    let (internal, phonon) = (0..basis.len()).partition(|&l| basis.omega_sq[l] < 1.0 - BAND_TOL);
    ModeClassification { internal, phonon }
}

/// The `count` lowest eigenvalues of `B` by Sturm bisection (no corner
/// entries), cheaper than a full decomposition.
pub fn lowest_eigenvalues(b: &SymTridiag, count: usize) -> Vec<f64> {
    (0..count.min(b.len())).map(|k| b.eigenvalue(k)).collect()
}

/// Relaxed single soliton on fixed ends at coupling `g`.
fn single_soliton(n: usize, g: f64) -> Result<(ChainSpec, ClassicalSolution)> {
    let spec = ChainSpec::new(n, g, classical::soliton_boundary())?;
    let seed = classical::continuum_soliton(&spec, None, 1)?;
    let sol = classical::sample_and_relax(&spec, &seed.phi)?;
    Ok((spec, sol))
}

fn has_internal_mode(n: usize, g: f64) -> Result<bool> {
    let (spec, sol) = single_soliton(n, g)?;
    let b = stability_matrix(&spec, &sol);
    Ok(b.count_below(1.0 - BAND_TOL) > 0)
}

/// Largest coupling at which the single soliton on an `n`-site chain still has
/// a mode below the phonon band, by bisection in `log g`.
pub fn g_max_scan(n: usize) -> Result<f64> {
    if n < 100 {
        return Err(Error::Domain(format!("g_max scan needs N >= 100, got {n}")));
    }
    let (mut lo, mut hi) = (classical::G_CONTINUUM, 1e9f64);
    if !has_internal_mode(n, lo)? {
        return Err(Error::NoRoot("no internal mode even at the smallest coupling".into()));
    }
    if has_internal_mode(n, hi)? {
        return Ok(hi);
    }
    for _ in 0..40 {
        let mid = (lo * hi).sqrt();
        if has_internal_mode(n, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo < 1.001 {
            break;
        }
    }
    Ok(lo)
}

/// Write `index, omega_sq, omega, class` rows.
pub fn write_spectrum_csv<W: Write>(basis: &ModeBasis, out: W) -> Result<()> {
    let class = classify_modes(basis);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "omega_sq", "omega", "class"]).map_err(|e| Error::Io(e.to_string()))?;
    for l in 0..basis.len() {
        let kind = if class.internal.contains(&l) { "internal" } else { "phonon" };
        w.write_record([
            l.to_string(),
            format!("{:?}", basis.omega_sq[l]),
            format!("{:?}", basis.omega[l]),
            kind.to_string(),
        ])
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{vacuum_solution, Boundary};
    use std::f64::consts::PI;

    #[test]
    fn small_periodic_matrix() {
        let spec = ChainSpec::new(4, 1.0, Boundary::Periodic).unwrap();
        let b = stability_matrix(&spec, &vacuum_solution(&spec)).to_dense();
        for i in 0..4 {
            assert_eq!(b[(i, i)], 3.0);
            assert_eq!(b[(i, (i + 1) % 4)], -1.0);
            assert_eq!(b[((i + 1) % 4, i)], -1.0);
        }
        assert_eq!(b[(0, 2)], 0.0);
    }

    #[test]
    fn interior_row_sums_at_vacuum() {
        let spec = ChainSpec::new(6, 7.0, Boundary::Free).unwrap();
        let b = stability_matrix(&spec, &vacuum_solution(&spec));
        let ones = vec![1.0; 6];
        let y = b.mul_vec(&ones);
        for v in &y[1..5] {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn center_row_has_negative_curvature() {
        let spec = ChainSpec::new(5, 10.0, Boundary::Free).unwrap();
        let sol = ClassicalSolution {
            phi: vec![0.0, 0.5, PI, 5.0, 2.0 * PI],
            sector: crate::classical::Sector::SingleSoliton,
            energy: 0.0,
            centers: vec![3.0],
        };
        let b = stability_matrix(&spec, &sol);
        assert!((b.diag[2] - 19.0).abs() < 1e-12);
        assert!((b.diag[0] - 11.0).abs() < 1e-12);
    }

    #[test]
    fn vacuum_spectrum_is_analytic() {
        let (n, g) = (64, 30.0);
        let spec = ChainSpec::new(n, g, Boundary::Periodic).unwrap();
        let basis = diagonalize(&stability_matrix(&spec, &vacuum_solution(&spec))).unwrap();
        let mut exact: Vec<f64> =
            (0..n).map(|l| 1.0 + 2.0 * g * (1.0 - (2.0 * PI * l as f64 / n as f64).cos())).collect();
        exact.sort_by(f64::total_cmp);
        for (a, b) in basis.omega_sq.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(classify_modes(&basis).internal.is_empty());
    }

    #[test]
    fn basis_is_orthonormal_with_small_residuals() {
        let spec = ChainSpec::new(50, 12.0, Boundary::Periodic).unwrap();
        let phi: Vec<f64> = (0..50).map(|i| 0.3 * (i as f64 * 0.7).sin()).collect();
        let b = crate::classical::hessian(&spec, &phi);
        let basis = diagonalize(&b).unwrap();
        let gram = basis.eta.transpose() * &basis.eta;
        for i in 0..50 {
            for j in 0..50 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - e).abs() < 1e-10);
            }
            let v = basis.mode(i);
            let bv = b.mul_vec(&v);
            let r = bv.iter().zip(&v).map(|(x, y)| (x - basis.omega_sq[i] * y).abs()).fold(0.0, f64::max);
            assert!(r < 1e-8 * b.norm_inf());
        }
        assert!(basis.omega.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn degenerate_pairs_put_symmetric_first() {
        let spec = ChainSpec::new(20, 3.0, Boundary::Periodic).unwrap();
        let basis = diagonalize(&stability_matrix(&spec, &vacuum_solution(&spec))).unwrap();
        // modes 1 and 2 are the degenerate pair of the smallest nonzero momentum
        let m1 = basis.mode(1);
        let m2 = basis.mode(2);
        let sym = |v: &[f64]| v.iter().zip(v.iter().rev()).map(|(a, b)| a * b).sum::<f64>();
        assert!(sym(&m1) > 0.99);
        assert!(sym(&m2) < -0.99);
        for l in 0..20 {
            let v = basis.mode(l);
            let big = v.iter().cloned().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            assert!(big > 0.0);
        }
    }

    #[test]
    fn unstable_matrix_is_rejected() {
        let b = SymTridiag { diag: vec![-1.0, 2.0], off: vec![0.0], corner: None };
        assert!(matches!(diagonalize(&b), Err(Error::Unstable { .. })));
    }

    #[test]
    fn sturm_lowest_agree_with_dense() {
        let spec = ChainSpec::new(80, 20.0, classical::soliton_boundary()).unwrap();
        let seed = classical::continuum_soliton(&spec, None, 1).unwrap();
        let sol = classical::sample_and_relax(&spec, &seed.phi).unwrap();
        let b = stability_matrix(&spec, &sol);
        let dense = diagonalize(&b).unwrap();
        let low = lowest_eigenvalues(&b, 3);
        for k in 0..3 {
            assert!((low[k] - dense.omega_sq[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn spectrum_csv_has_header_and_rows() {
        let spec = ChainSpec::new(5, 1.0, Boundary::Periodic).unwrap();
        let basis = diagonalize(&stability_matrix(&spec, &vacuum_solution(&spec))).unwrap();
        let mut buf = Vec::new();
        write_spectrum_csv(&basis, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("index,omega_sq,omega,class"));
        assert_eq!(text.lines().count(), 6);
    }
}
