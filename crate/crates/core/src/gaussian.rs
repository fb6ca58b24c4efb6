//! Gaussian ground states and their entanglement measures.

use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::modes::ModeBasis;

/// Frequencies at or below this are treated as zero modes.
pub const ZERO_MODE_TOL: f64 = 1e-12;
/// Symplectic eigenvalues this far below 1/2 are rounding, not physics.
pub const LAMBDA_TOL: f64 = 1e-9;

/// Second moments `G = <phi phi^T>` and `H = <pi pi^T>` of a Gaussian state
/// with no `phi`-`pi` correlations.
#[derive(Debug, Clone)]
pub struct GaussianState {
    pub g: Mat<f64>,
    pub h: Mat<f64>,
    /// Identifier of each row, e.g. the 0-based site index.
    pub labels: Vec<usize>,
}

impl GaussianState {
    pub fn new(g: Mat<f64>, h: Mat<f64>, labels: Vec<usize>) -> Result<Self> {
        let m = labels.len();
        if g.nrows() != m || g.ncols() != m || h.nrows() != m || h.ncols() != m {
            return Err(Error::Domain("covariance blocks and labels disagree in size".into()));
        }
        Ok(Self { g, h, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Rows of a [`GaussianState`] forming one side of a bipartition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSelection {
    pub indices: Vec<usize>,
}

impl BlockSelection {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        let mut sorted = indices.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Domain("block indices must be distinct".into()));
        }
        Ok(Self { indices })
    }

    /// `len` consecutive rows starting at `start` (0-based).
    pub fn contiguous(start: usize, len: usize) -> Self {
        Self { indices: (start..start + len).collect() }
    }

    /// `len` consecutive sites centered on the 1-based position `center`,
    /// shifted if needed to stay inside an `n`-site chain.
    pub fn centered(center: f64, len: usize, n: usize) -> Result<Self> {
        if len == 0 || len > n {
            return Err(Error::Domain(format!("block of {len} sites does not fit a chain of {n}")));
        }
        let first = (center - (len as f64 - 1.0) / 2.0).round() as i64;
        let first = first.clamp(1, (n - len + 1) as i64) as usize;
        Ok(Self::contiguous(first - 1, len))
    }

    /// Every row of an `m`-row state not in `self`.
    pub fn complement(&self, m: usize) -> Self {
        let mut keep = vec![true; m];
        for &i in &self.indices {
            if i < m {
                keep[i] = false;
            }
        }
        Self { indices: (0..m).filter(|&i| keep[i]).collect() }
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut indices = self.indices.clone();
        indices.extend(other.indices.iter().copied());
        Self { indices }
    }

    pub fn overlaps(&self, other: &Self) -> bool {
        self.indices.iter().any(|i| other.indices.contains(i))
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum {
    pub lambdas: Vec<f64>,
}

/// Ground state of the quadratic fluctuation Hamiltonian:
/// `G = sum eta eta^T / (2 omega)`, `H = sum eta eta^T omega / 2`.
pub fn ground_state(basis: &ModeBasis) -> Result<GaussianState> {
    for (index, &omega) in basis.omega.iter().enumerate() {
        if !(omega > ZERO_MODE_TOL) {
            return Err(Error::ZeroMode { index, omega });
        }
    }
    let n = basis.eta.nrows();
    let eta = &basis.eta;
    let a = Mat::<f64>::from_fn(n, n, |i, l| eta[(i, l)] / (2.0 * basis.omega[l]));
    let b = Mat::<f64>::from_fn(n, n, |i, l| eta[(i, l)] * basis.omega[l] / 2.0);
    let g = symmetrize(&a * eta.transpose());
    let h = symmetrize(&b * eta.transpose());
    GaussianState::new(g, h, (0..n).collect())
}

pub(crate) fn symmetrize(m: Mat<f64>) -> Mat<f64> {
    let n = m.nrows();
    Mat::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
}

fn submatrix(m: &Mat<f64>, idx: &[usize]) -> Mat<f64> {
    Mat::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

fn check_block(state: &GaussianState, block: &BlockSelection) -> Result<()> {
    if block.indices.iter().any(|&i| i >= state.len()) {
        return Err(Error::Domain("block index outside the state".into()));
    }
    Ok(())
}

/// Restrict a state to the rows in `block`.
pub fn reduce(state: &GaussianState, block: &BlockSelection) -> Result<GaussianState> {
    check_block(state, block)?;
    let idx = &block.indices;
    Ok(GaussianState {
        g: submatrix(&state.g, idx),
        h: submatrix(&state.h, idx),
        labels: idx.iter().map(|&i| state.labels[i]).collect(),
    })
}

struct SqrtDecomp {
    /// `G^{1/2}`
    root: Mat<f64>,
    /// `G^{-1/2}`
    inv_root: Mat<f64>,
}

fn sqrt_decomp(g: &Mat<f64>) -> Result<SqrtDecomp> {
    let m = g.nrows();
    let evd = g.self_adjoint_eigen(Side::Lower).map_err(|_| Error::NotPositiveDefinite(f64::NAN))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let min = (0..m).map(|i| s[i]).fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return Err(Error::NotPositiveDefinite(min));
    }
    let us = Mat::<f64>::from_fn(m, m, |i, j| u[(i, j)] * s[j].sqrt());
    let ui = Mat::<f64>::from_fn(m, m, |i, j| u[(i, j)] / s[j].sqrt());
    Ok(SqrtDecomp { root: symmetrize(&us * u.transpose()), inv_root: symmetrize(&ui * u.transpose()) })
}

fn spectrum_with_vectors(g: &Mat<f64>, h: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>, SqrtDecomp)> {
    let d = sqrt_decomp(g)?;
    let m = symmetrize(&d.root * h * &d.root);
    let evd = m.self_adjoint_eigen(Side::Lower).map_err(|_| Error::NotPositiveDefinite(f64::NAN))?;
    let s = evd.S().column_vector();
    let lambdas = (0..g.nrows()).map(|i| s[i].max(0.0).sqrt()).collect();
    Ok((lambdas, evd.U().to_owned(), d))
}

/// Williamson eigenvalues `sqrt(eig(G H))`, via the symmetric form
/// `G^{1/2} H G^{1/2}`. Sorted ascending.
pub fn symplectic_eigenvalues(state: &GaussianState) -> Result<SymplecticSpectrum> {
    if state.is_empty() {
        return Ok(SymplecticSpectrum { lambdas: Vec::new() });
    }
    let (lambdas, _, _) = spectrum_with_vectors(&state.g, &state.h)?;
    Ok(SymplecticSpectrum { lambdas })
}

/// Entropy of one Williamson mode,
/// `(l + 1/2) ln(l + 1/2) - (l - 1/2) ln(l - 1/2)`.
pub fn mode_entropy(lambda: f64) -> f64 {
    if lambda < 0.5 - LAMBDA_TOL {
        log::warn!("symplectic eigenvalue {lambda} below 1/2; clamped");
    }
    let l = lambda.max(0.5);
    let a = l + 0.5;
    let b = l - 0.5;
    let tail = if b > 0.0 { b * b.ln() } else { 0.0 };
    a * a.ln() - tail
}

pub fn entropy_of_spectrum(spectrum: &SymplecticSpectrum) -> f64 {
    spectrum.lambdas.iter().map(|&l| mode_entropy(l)).sum()
}

/// Von Neumann entropy of the rows in `block`.
pub fn entropy(state: &GaussianState, block: &BlockSelection) -> Result<f64> {
    Ok(entropy_of_spectrum(&symplectic_eigenvalues(&reduce(state, block)?)?))
}

/// Logarithmic negativity between disjoint blocks `a` and `b`: the
/// partially time-reversed state flips the sign of `H_AB`, and
/// `E = -sum ln(2 lambda)` over its eigenvalues below 1/2.
pub fn log_negativity(state: &GaussianState, a: &BlockSelection, b: &BlockSelection) -> Result<f64> {
    if a.overlaps(b) {
        return Err(Error::OverlappingBlocks);
    }
    let ab = a.union(b);
    let mut red = reduce(state, &ab)?;
    let na = a.len();
    let m = ab.len();
    for i in 0..m {
        for j in 0..m {
            if (i < na) != (j < na) {
                red.h[(i, j)] = -red.h[(i, j)];
            }
        }
    }
    let spec = symplectic_eigenvalues(&red)?;
    Ok(spec.lambdas.iter().filter(|&&l| l < 0.5).map(|&l| -(2.0 * l).ln()).sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Participation {
    pub lambda: f64,
    /// `z(n) = u(n) v(n)` over the rows of the block.
    pub z: Vec<f64>,
}

/// Participation functions of the Williamson modes of block `a`, ordered by
/// descending entropy contribution. `H_A G_A u = l^2 u`, `G_A H_A v = l^2 v`,
/// normalized to `u^T v = 1`.
pub fn participation_functions(state: &GaussianState, a: &BlockSelection) -> Result<Vec<Participation>> {
    if a.is_empty() || a.len() >= state.len() {
        return Err(Error::InvalidPartition("participation needs a proper nonempty block".into()));
    }
    let red = reduce(state, a)?;
    let (lambdas, w, d) = spectrum_with_vectors(&red.g, &red.h)?;
    let m = a.len();
    let v = &d.root * &w;
    let u = &d.inv_root * &w;
    let mut out: Vec<Participation> = (0..m)
        .map(|j| {
            let big = (0..m).map(|i| u[(i, j)]).fold(0.0f64, |b, x| if x.abs() > b.abs() { x } else { b });
            let s = if big < 0.0 { -1.0 } else { 1.0 };
            Participation { lambda: lambdas[j], z: (0..m).map(|i| s * u[(i, j)] * s * v[(i, j)]).collect() }
        })
        .collect();
    out.sort_by(|x, y| y.lambda.total_cmp(&x.lambda));
    if out.windows(2).any(|p| (p[0].lambda - p[1].lambda).abs() < 1e-10 && p[0].lambda > 0.5 + 1e-9) {
        log::warn!("degenerate symplectic spectrum: participation functions are not unique");
    }
    Ok(out)
}

/// `xi[n] = G(r, r+n)` and `nu[n] = H(r, r+n)` for `n = 0..M-r`.
pub fn correlation_profile(state: &GaussianState, reference: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if reference >= state.len() {
        return Err(Error::Domain(format!("reference row {reference} outside the state")));
    }
    let xi = (reference..state.len()).map(|j| state.g[(reference, j)]).collect();
    let nu = (reference..state.len()).map(|j| state.h[(reference, j)]).collect();
    Ok((xi, nu))
}

/// Two coupled oscillators with normal-mode frequencies `omega1 <= omega2`:
/// each site carries `lambda = sqrt(2 + a + 1/a)/4`, `a = omega2/omega1`, and
/// the returned entropy is `2 S(lambda)`.
pub fn toy_two_oscillator(omega1: f64, omega2: f64) -> Result<(f64, f64)> {
    if !(omega1 > 0.0 && omega1 <= omega2) {
        return Err(Error::Domain(format!("need 0 < omega1 <= omega2, got {omega1}, {omega2}")));
    }
    let a = omega2 / omega1;
    let lambda = 0.25 * (2.0 + a + 1.0 / a).sqrt();
    Ok((lambda, 2.0 * mode_entropy(lambda)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{vacuum_solution, Boundary, ChainSpec};
    use crate::modes::{diagonalize, stability_matrix};

    fn diag_state(g: &[f64], h: &[f64]) -> GaussianState {
        let n = g.len();
        GaussianState::new(
            Mat::from_fn(n, n, |i, j| if i == j { g[i] } else { 0.0 }),
            Mat::from_fn(n, n, |i, j| if i == j { h[i] } else { 0.0 }),
            (0..n).collect(),
        )
        .unwrap()
    }

    fn vacuum_state(n: usize, g: f64) -> GaussianState {
        let spec = ChainSpec::new(n, g, Boundary::Periodic).unwrap();
        let basis = diagonalize(&stability_matrix(&spec, &vacuum_solution(&spec))).unwrap();
        ground_state(&basis).unwrap()
    }

    #[test]
    fn single_oscillator_ground_state() {
        let basis =
            ModeBasis { eta: Mat::from_fn(1, 1, |_, _| 1.0), omega: vec![1.0], omega_sq: vec![1.0], floor: 0.0 };
        let s = ground_state(&basis).unwrap();
        assert!((s.g[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((s.h[(0, 0)] - 0.5).abs() < 1e-15);
        let zero = ModeBasis { omega: vec![0.0], ..basis };
        assert!(matches!(ground_state(&zero), Err(Error::ZeroMode { .. })));
    }

    #[test]
    fn pure_states_have_half_spectra() {
        let s = diag_state(&[0.5, 0.5], &[0.5, 0.5]);
        assert!(symplectic_eigenvalues(&s).unwrap().lambdas.iter().all(|l| (l - 0.5).abs() < 1e-14));
        let s = diag_state(&[1.5, 0.1], &[1.0 / 6.0, 2.5]);
        assert!(symplectic_eigenvalues(&s).unwrap().lambdas.iter().all(|l| (l - 0.5).abs() < 1e-14));
        let full = vacuum_state(24, 40.0);
        let spec = symplectic_eigenvalues(&full).unwrap();
        assert!(spec.lambdas.iter().all(|l| (l - 0.5).abs() < 1e-8));
        assert!(entropy_of_spectrum(&spec).abs() < 1e-6);
    }

    #[test]
    fn non_positive_g_is_rejected() {
        let s = diag_state(&[0.5, -0.1], &[0.5, 0.5]);
        assert!(matches!(symplectic_eigenvalues(&s), Err(Error::NotPositiveDefinite(_))));
    }

    #[test]
    fn thermal_mode_entropy() {
        assert_eq!(mode_entropy(0.5), 0.0);
        // lambda = nbar + 1/2 with nbar = 1
        let nbar: f64 = 1.0;
        let thermal = (nbar + 1.0) * (nbar + 1.0).ln() - nbar * nbar.ln();
        assert!((mode_entropy(1.5) - thermal).abs() < 1e-15);
        assert!((mode_entropy(1.5) - 2.0 * 2f64.ln()).abs() < 1e-15);
        let spec = SymplecticSpectrum { lambdas: vec![1.5, 0.7] };
        assert!((entropy_of_spectrum(&spec) - mode_entropy(1.5) - mode_entropy(0.7)).abs() < 1e-15);
    }

    #[test]
    fn reduction_and_schmidt_symmetry() {
        let s = vacuum_state(30, 20.0);
        let all = BlockSelection::contiguous(0, 30);
        let r = reduce(&s, &all).unwrap();
        assert_eq!(r.g, s.g);
        let one = reduce(&s, &BlockSelection::contiguous(4, 1)).unwrap();
        assert!(one.g[(0, 0)] * one.h[(0, 0)] >= 0.25 - 1e-12);
        for (start, len) in [(0, 7), (5, 11), (10, 1)] {
            let a = BlockSelection::contiguous(start, len);
            let ea = entropy(&s, &a).unwrap();
            let eb = entropy(&s, &a.complement(30)).unwrap();
            assert!((ea - eb).abs() < 1e-8);
            assert!(ea > 0.0);
        }
    }

    #[test]
    fn negativity_of_product_and_swap() {
        let s = diag_state(&[0.5, 2.0, 0.3], &[0.5, 0.125, 1.0]);
        let a = BlockSelection::contiguous(0, 1);
        let b = BlockSelection::contiguous(1, 2);
        assert!(log_negativity(&s, &a, &b).unwrap().abs() < 1e-14);
        let v = vacuum_state(16, 5.0);
        let a = BlockSelection::contiguous(2, 3);
        let b = BlockSelection::contiguous(6, 4);
        let ab = log_negativity(&v, &a, &b).unwrap();
        let ba = log_negativity(&v, &b, &a).unwrap();
        assert!((ab - ba).abs() < 1e-10);
        assert!(ab > 0.0);
        assert_eq!(log_negativity(&v, &a, &a), Err(Error::OverlappingBlocks));
    }

    #[test]
    fn toy_model_formula() {
        let (l, e) = toy_two_oscillator(1.0, 1.0).unwrap();
        assert!((l - 0.5).abs() < 1e-15 && e.abs() < 1e-15);
        let (l, _) = toy_two_oscillator(1.0, 4.0).unwrap();
        assert!((l - 0.625).abs() < 1e-15);
        assert!(toy_two_oscillator(2.0, 1.0).is_err());
    }

    #[test]
    fn participation_sums_to_one() {
        let s = vacuum_state(40, 30.0);
        let a = BlockSelection::contiguous(0, 20);
        let parts = participation_functions(&s, &a).unwrap();
        assert!(parts.windows(2).all(|p| p[0].lambda >= p[1].lambda));
        for p in parts.iter().take(5) {
            assert!((p.z.iter().sum::<f64>() - 1.0).abs() < 1e-8);
        }
        // the leading mode sits at the cut (rows 0 and 19 both border the complement)
        let z = &parts[0].z;
        let peak = (0..20).max_by(|&i, &j| z[i].abs().total_cmp(&z[j].abs())).unwrap();
        assert!(peak <= 2 || peak >= 17, "peak at {peak}");
        assert!(participation_functions(&s, &BlockSelection::contiguous(0, 40)).is_err());
    }

    #[test]
    fn correlation_profile_reads_rows() {
        let s = vacuum_state(12, 4.0);
        let (xi, nu) = correlation_profile(&s, 3).unwrap();
        assert_eq!(xi.len(), 9);
        assert!(xi[0] > 0.0 && nu[0] > 0.0);
        assert_eq!(xi[2], s.g[(3, 5)]);
        assert!(correlation_profile(&s, 12).is_err());
    }

    #[test]
    fn centered_blocks() {
        let b = BlockSelection::centered(500.5, 100, 1000).unwrap();
        assert_eq!(b.indices[0], 450);
        assert_eq!(b.len(), 100);
        let edge = BlockSelection::centered(2.0, 10, 20).unwrap();
        assert_eq!(edge.indices[0], 0);
        assert!(BlockSelection::centered(5.0, 30, 20).is_err());
        assert!(BlockSelection::new(vec![1, 2, 1]).is_err());
    }
}
