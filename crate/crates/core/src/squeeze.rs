//! Two-mode squeezing of internal modes and hashing bounds on the
//! distillable entanglement it creates.

use faer::Mat;

use crate::error::{Error, Result};
use crate::gaussian::{entropy, symmetrize, BlockSelection, GaussianState};
use crate::modes::{classify_modes, ModeBasis};

/// Auxiliary oscillator appended to the chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExternalMode {
    pub omega_q: f64,
}

impl ExternalMode {
    pub fn new(omega_q: f64) -> Result<Self> {
        if !(omega_q > 0.0) {
            return Err(Error::Domain(format!("external frequency must be positive, got {omega_q}")));
        }
        Ok(Self { omega_q })
    }
}

/// Chain normal modes plus any external modes, with second moments held in
/// the normal-mode frame.
#[derive(Debug, Clone)]
pub struct ModeSystem {
    /// Sites by normal modes.
    pub eta: Mat<f64>,
    /// Frequencies of all modes: chain modes first, then external ones.
    pub omega: Vec<f64>,
    /// `<x x^T>` in the mode frame.
    pub gt: Mat<f64>,
    /// `<p p^T>` in the mode frame.
    pub ht: Mat<f64>,
}

impl ModeSystem {
    /// Ground state of the chain modes alone.
    pub fn from_basis(basis: &ModeBasis) -> Self {
        let omega = basis.omega.clone();
        let m = omega.len();
        Self {
            eta: basis.eta.clone(),
            gt: Mat::from_fn(m, m, |i, j| if i == j { 0.5 / omega[i] } else { 0.0 }),
            ht: Mat::from_fn(m, m, |i, j| if i == j { 0.5 * omega[i] } else { 0.0 }),
            omega,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.eta.nrows()
    }

    pub fn n_modes(&self) -> usize {
        self.omega.len()
    }

    /// Index of the `j`-th external mode in the mode frame and in
    /// [`ModeSystem::site_state`].
    pub fn external_index(&self, j: usize) -> usize {
        self.n_sites() + j
    }

    /// Whether both moment matrices are still diagonal.
    pub fn is_ground_form(&self) -> bool {
        let m = self.n_modes();
        let scale = (0..m).map(|i| self.gt[(i, i)].abs() + self.ht[(i, i)].abs()).fold(0.0, f64::max);
        for i in 0..m {
            for j in 0..m {
                if i != j && (self.gt[(i, j)].abs() > 1e-14 * scale || self.ht[(i, j)].abs() > 1e-14 * scale) {
                    return false;
                }
            }
        }
        true
    }

    /// Moments over sites followed by external modes.
    pub fn site_state(&self) -> GaussianState {
        let n = self.n_sites();
        let m = self.n_modes();
        let e = Mat::<f64>::from_fn(m, m, |i, j| {
            if i < n && j < n {
                self.eta[(i, j)]
            } else if i == j {
                1.0
            } else {
                0.0
            }
        });
        let g = symmetrize(&e * &self.gt * e.transpose());
        let h = symmetrize(&e * &self.ht * e.transpose());
        GaussianState { g, h, labels: (0..m).collect() }
    }
}

/// Append an uncoupled oscillator in its ground state.
pub fn append_external_mode(basis: &ModeBasis, q: ExternalMode) -> ModeSystem {
    let base = ModeSystem::from_basis(basis);
    let n = base.n_modes();
    let m = n + 1;
    let mut omega = base.omega.clone();
    omega.push(q.omega_q);
    let pad = |src: &Mat<f64>, last: f64| {
        Mat::<f64>::from_fn(m, m, |i, j| {
            if i < n && j < n {
                src[(i, j)]
            } else if i == j {
                last
            } else {
                0.0
            }
        })
    };
    ModeSystem { eta: base.eta.clone(), gt: pad(&base.gt, 0.5 / q.omega_q), ht: pad(&base.ht, 0.5 * q.omega_q), omega }
}

/// A direction in the mode frame.
#[derive(Debug, Clone, PartialEq)]
pub enum ModeRef {
    /// Chain normal mode `l`.
    Normal(usize),
    /// External mode `j`.
    External(usize),
    /// Unit-norm combination of modes, one coefficient per mode.
    Collective(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SqueezeSpec {
    pub r: f64,
    pub a: ModeRef,
    pub b: ModeRef,
}

fn unit_vector(system: &ModeSystem, m: &ModeRef) -> Result<Vec<f64>> {
    let size = system.n_modes();
    let mut v = vec![0.0; size];
    match m {
        ModeRef::Normal(l) if *l < system.n_sites() => v[*l] = 1.0,
        ModeRef::External(j) if system.external_index(*j) < size => v[system.external_index(*j)] = 1.0,
        ModeRef::Collective(c) if c.len() == size => {
            let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-10 {
                return Err(Error::Domain(format!("collective mode has norm {norm}")));
            }
            v.copy_from_slice(c);
        }
        _ => return Err(Error::Domain(format!("mode {m:?} does not exist in this system"))),
    }
    Ok(v)
}

/// Position and momentum parts `(S_x, S_p)` of the squeezing map
/// `x_a -> (e^r x_a + e^-r x_b)/sqrt2`, `x_b -> (e^r x_a - e^-r x_b)/sqrt2`,
/// `p_a -> (e^-r p_a + e^r p_b)/sqrt2`, `p_b -> (e^-r p_a - e^r p_b)/sqrt2`,
/// identity on the orthogonal complement of `a`, `b`.
pub fn squeeze_matrices(system: &ModeSystem, spec: &SqueezeSpec) -> Result<(Mat<f64>, Mat<f64>)> {
    if !(spec.r >= 0.0) {
        return Err(Error::Domain(format!("squeezing must be non-negative, got {}", spec.r)));
    }
    let a = unit_vector(system, &spec.a)?;
    let b = unit_vector(system, &spec.b)?;
    let overlap: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    if overlap.abs() > 1e-10 {
        return Err(Error::Domain("squeezed modes must be distinct and orthogonal".into()));
    }
    let m = a.len();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (ep, em) = (spec.r.exp(), (-spec.r).exp());
    let build = |k: [[f64; 2]; 2]| {
        Mat::<f64>::from_fn(m, m, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            let (ai, bi, aj, bj) = (a[i], b[i], a[j], b[j]);
            id - ai * aj - bi * bj + ai * (k[0][0] * aj + k[0][1] * bj) + bi * (k[1][0] * aj + k[1][1] * bj)
        })
    };
    let sx = build([[s * ep, s * em], [s * ep, -s * em]]);
    let sp = build([[s * em, s * ep], [s * em, -s * ep]]);
    Ok((sx, sp))
}

/// Largest entry of `S J S^T - J` for `S = S_x (+) S_p` acting on `(x, p)`.
pub fn symplectic_defect(sx: &Mat<f64>, sp: &Mat<f64>) -> f64 {
    let m = sx.nrows();
    let s = Mat::<f64>::from_fn(2 * m, 2 * m, |i, j| match (i < m, j < m) {
        (true, true) => sx[(i, j)],
        (false, false) => sp[(i - m, j - m)],
        _ => 0.0,
    });
    let j = Mat::<f64>::from_fn(2 * m, 2 * m, |i, k| {
        if i < m && k == i + m {
            1.0
        } else if i >= m && k + m == i {
            -1.0
        } else {
            0.0
        }
    });
    let d = &s * &j * s.transpose() - &j;
    let mut worst = 0.0f64;
    for i in 0..2 * m {
        for k in 0..2 * m {
            worst = worst.max(d[(i, k)].abs());
        }
    }
    worst
}

/// Apply a two-mode squeeze in the normal-mode frame, as the congruence
/// `G~ -> S_x G~ S_x^T`, `H~ -> S_p H~ S_p^T`.
pub fn two_mode_squeeze(system: &ModeSystem, spec: &SqueezeSpec) -> Result<ModeSystem> {
    if !system.is_ground_form() {
        return Err(Error::NotGroundForm);
    }
    let (sx, sp) = squeeze_matrices(system, spec)?;
    Ok(ModeSystem {
        eta: system.eta.clone(),
        omega: system.omega.clone(),
        gt: symmetrize(&sx * &system.gt * sx.transpose()),
        ht: symmetrize(&sp * &system.ht * sp.transpose()),
    })
}

/// Entanglement a two-mode squeeze inserts between two vacua:
/// `cosh^2 r ln cosh^2 r - sinh^2 r ln sinh^2 r`.
pub fn inserted_entropy(r: f64) -> f64 {
    let c = r.cosh().powi(2);
    let s = r.sinh().powi(2);
    let tail = if s > 0.0 { s * s.ln() } else { 0.0 };
    c * c.ln() - tail
}

/// `(eta_1 + eta_2)/sqrt2` and `(eta_1 - eta_2)/sqrt2` over sites, from the
/// two lowest internal modes.
pub fn collective_pm_modes(basis: &ModeBasis) -> Result<(Vec<f64>, Vec<f64>)> {
    let internal = classify_modes(basis).internal;
    if internal.len() < 2 {
        return Err(Error::TooFewInternalModes(internal.len()));
    }
    let (e1, e2) = (basis.mode(internal[0]), basis.mode(internal[1]));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = e1.iter().zip(&e2).map(|(a, b)| s * (a + b)).collect();
    let minus = e1.iter().zip(&e2).map(|(a, b)| s * (a - b)).collect();
    Ok((plus, minus))
}

/// Mode-frame coefficients of the `+` and `-` combinations of modes `l1`, `l2`.
pub fn pm_coefficients(system: &ModeSystem, l1: usize, l2: usize) -> (Vec<f64>, Vec<f64>) {
    let m = system.n_modes();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut plus = vec![0.0; m];
    let mut minus = vec![0.0; m];
    plus[l1] = s;
    plus[l2] = s;
    minus[l1] = s;
    minus[l2] = -s;
    (plus, minus)
}

/// Rows of a site-plus-external state split into `A`, `B` and `Q`.
#[derive(Debug, Clone)]
pub struct Partition {
    pub a: BlockSelection,
    pub b: BlockSelection,
    pub q: BlockSelection,
}

impl Partition {
    /// `A` given, `Q` the external rows from `n_sites` on, `B` the rest.
    pub fn around(a: BlockSelection, n_sites: usize, n_rows: usize) -> Self {
        let q = BlockSelection { indices: (n_sites..n_rows).collect() };
        let b = BlockSelection { indices: (0..n_sites).filter(|i| !a.indices.contains(i)).collect() };
        Self { a, b, q }
    }

    fn validate(&self, rows: usize) -> Result<()> {
        if self.a.is_empty() || self.q.is_empty() {
            return Err(Error::InvalidPartition("A and Q must be nonempty".into()));
        }
        let mut seen = vec![false; rows];
        for i in self.a.indices.iter().chain(&self.b.indices).chain(&self.q.indices) {
            if *i >= rows || seen[*i] {
                return Err(Error::InvalidPartition("parts overlap or leave the state".into()));
            }
            seen[*i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidPartition("parts do not cover the state".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HashingBound {
    pub bound: f64,
    pub e_a: f64,
    pub e_b: f64,
    pub e_q: f64,
}

/// Coherent-information bound `E_D(A, Q) >= max(0, E(Q) - E(A u Q), E(A) - E(A u Q))`
/// for a pure state, where `E(A u Q) = E(B)`.
pub fn hashing_lower_bound(state: &GaussianState, partition: &Partition) -> Result<HashingBound> {
    partition.validate(state.len())?;
    let e_a = entropy(state, &partition.a)?;
    let e_q = entropy(state, &partition.q)?;
    let e_b = if partition.b.is_empty() { 0.0 } else { entropy(state, &partition.b)? };
    let bound = 0.0f64.max(e_q - e_b).max(e_a - e_b);
    Ok(HashingBound { bound, e_a, e_b, e_q })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairBound {
    pub bound: f64,
    pub e_a1: f64,
    pub e_a2: f64,
    pub e_union: f64,
}

/// `E_D(A1, A2) >= E(A1) - E(A1 u A2)`.
pub fn double_soliton_squeeze_bound(
    state: &GaussianState,
    a1: &BlockSelection,
    a2: &BlockSelection,
) -> Result<PairBound> {
    if a1.overlaps(a2) || a1.len() != a2.len() || a1.is_empty() {
        return Err(Error::InvalidPartition("blocks must be disjoint, nonempty and of equal size".into()));
    }
    let e_a1 = entropy(state, a1)?;
    let e_a2 = entropy(state, a2)?;
    let e_union = entropy(state, &a1.union(a2))?;
    Ok(PairBound { bound: e_a1 - e_union, e_a1, e_a2, e_union })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{mode_entropy, symplectic_eigenvalues};

    fn identity_basis(omega: &[f64]) -> ModeBasis {
        let n = omega.len();
        ModeBasis {
            eta: Mat::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 }),
            omega: omega.to_vec(),
            omega_sq: omega.iter().map(|w| w * w).collect(),
            floor: 0.0,
        }
    }

    #[test]
    fn external_mode_starts_in_vacuum() {
        let basis = identity_basis(&[0.3, 1.2]);
        let sys = append_external_mode(&basis, ExternalMode::new(1.0).unwrap());
        let st = sys.site_state();
        assert_eq!(st.g[(2, 2)], 0.5);
        assert_eq!(st.h[(2, 2)], 0.5);
        let q = BlockSelection::contiguous(2, 1);
        assert!(entropy(&st, &q).unwrap().abs() < 1e-14);
        assert!(ExternalMode::new(0.0).is_err());
    }

    #[test]
    fn squeeze_is_symplectic_and_keeps_purity() {
        let basis = identity_basis(&[0.2, 0.9, 1.5]);
        let sys = append_external_mode(&basis, ExternalMode::new(0.2).unwrap());
        for r in [0.0, 0.4, 2.0] {
            let spec = SqueezeSpec { r, a: ModeRef::Normal(0), b: ModeRef::External(0) };
            let (sx, sp) = squeeze_matrices(&sys, &spec).unwrap();
            assert!(symplectic_defect(&sx, &sp) < 1e-12);
            let out = two_mode_squeeze(&sys, &spec).unwrap();
            let lam = symplectic_eigenvalues(&out.site_state()).unwrap().lambdas;
            assert!(lam.iter().all(|l| (l - 0.5).abs() < 1e-8));
            let q = BlockSelection::contiguous(3, 1);
            let eq = entropy(&out.site_state(), &q).unwrap();
            assert!((eq - inserted_entropy(r)).abs() < 1e-8, "r = {r}");
        }
    }

    #[test]
    fn second_squeeze_needs_ground_form() {
        let basis = identity_basis(&[0.2, 0.9]);
        let sys = append_external_mode(&basis, ExternalMode::new(0.2).unwrap());
        let spec = SqueezeSpec { r: 0.5, a: ModeRef::Normal(0), b: ModeRef::External(0) };
        let once = two_mode_squeeze(&sys, &spec).unwrap();
        assert!(matches!(two_mode_squeeze(&once, &spec), Err(Error::NotGroundForm)));
        let bad = SqueezeSpec { r: 0.5, a: ModeRef::Normal(0), b: ModeRef::Normal(0) };
        assert!(squeeze_matrices(&sys, &bad).is_err());
    }

    #[test]
    fn inserted_entropy_matches_thermal_form() {
        assert_eq!(inserted_entropy(0.0), 0.0);
        let mut last = -1.0;
        for i in 0..=30 {
            let r = 0.1 * i as f64;
            let e = inserted_entropy(r);
            assert!((e - mode_entropy((2.0 * r).cosh() / 2.0)).abs() < 1e-10);
            assert!(e > last);
            last = e;
        }
    }

    #[test]
    fn collective_modes_need_two_internal() {
        let basis = identity_basis(&[0.2, 1.5, 2.0]);
        assert_eq!(collective_pm_modes(&basis), Err(Error::TooFewInternalModes(1)));
        let basis = identity_basis(&[0.2, 0.3, 2.0]);
        let (p, m) = collective_pm_modes(&basis).unwrap();
        let dot: f64 = p.iter().zip(&m).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-15);
        assert!((p.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-15);
    }

    /// Four oscillators: A1-B1 share entanglement r1, A2-Q share r. With
    /// A = {A1, A2} the hashing bound equals E(Q) exactly.
    #[test]
    fn mode_wise_saturation_example() {
        let (r1, r) = (0.7, 1.1);
        let basis = identity_basis(&[1.0, 1.0, 1.0]);
        let sys = append_external_mode(&basis, ExternalMode::new(1.0).unwrap());
        let s1 = SqueezeSpec { r: r1, a: ModeRef::Normal(0), b: ModeRef::Normal(2) };
        let (x1, p1) = squeeze_matrices(&sys, &s1).unwrap();
        let s2 = SqueezeSpec { r, a: ModeRef::Normal(1), b: ModeRef::External(0) };
        let (x2, p2) = squeeze_matrices(&sys, &s2).unwrap();
        let gt = symmetrize(&x2 * &x1 * &sys.gt * x1.transpose() * x2.transpose());
        let ht = symmetrize(&p2 * &p1 * &sys.ht * p1.transpose() * p2.transpose());
        let both = ModeSystem { gt, ht, ..sys };
        let st = both.site_state();
        let part = Partition {
            a: BlockSelection::new(vec![0, 1]).unwrap(),
            b: BlockSelection::new(vec![2]).unwrap(),
            q: BlockSelection::new(vec![3]).unwrap(),
        };
        let hb = hashing_lower_bound(&st, &part).unwrap();
        assert!((hb.e_q - inserted_entropy(r)).abs() < 1e-10);
        assert!((hb.e_b - inserted_entropy(r1)).abs() < 1e-10);
        assert!((hb.bound - hb.e_q).abs() < 1e-10);
        assert!(hb.bound <= hb.e_a + 1e-12);
    }

    #[test]
    fn bound_vanishes_before_squeezing_and_stays_below_inserted() {
        let b = crate::tridiag::SymTridiag { diag: vec![2.3; 12], off: vec![-1.0; 11], corner: None };
        let basis = crate::modes::diagonalize(&b).unwrap();
        let sys = append_external_mode(&basis, ExternalMode::new(basis.omega[0]).unwrap());
        let part = Partition::around(BlockSelection::contiguous(3, 6), 12, 13);
        let before = hashing_lower_bound(&sys.site_state(), &part).unwrap();
        assert!(before.bound < 1e-10, "{}", before.bound);
        let spec = SqueezeSpec { r: 0.8, a: ModeRef::Normal(0), b: ModeRef::External(0) };
        let after = hashing_lower_bound(&two_mode_squeeze(&sys, &spec).unwrap().site_state(), &part).unwrap();
        assert!(after.bound > 0.0);
        assert!(after.bound <= inserted_entropy(0.8) + 1e-10);
    }

    #[test]
    fn partitions_are_validated() {
        let basis = identity_basis(&[1.0, 1.0]);
        let st = append_external_mode(&basis, ExternalMode::new(1.0).unwrap()).site_state();
        let bad = Partition {
            a: BlockSelection::new(vec![0]).unwrap(),
            b: BlockSelection::new(vec![0, 1]).unwrap(),
            q: BlockSelection::new(vec![2]).unwrap(),
        };
        assert!(matches!(hashing_lower_bound(&st, &bad), Err(Error::InvalidPartition(_))));
        let ok = Partition::around(BlockSelection::new(vec![0]).unwrap(), 2, 3);
        assert_eq!(hashing_lower_bound(&st, &ok).unwrap().bound, 0.0);
        let a = BlockSelection::new(vec![0]).unwrap();
        assert!(double_soliton_squeeze_bound(&st, &a, &a).is_err());
    }
}
