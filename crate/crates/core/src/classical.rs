//! Classical background configurations: vacuum, sampled solitons, finite
//! sine-Gordon profiles, and their relaxation to static minima.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::elliptic::{am_comp, complete_k_comp, sn_cn_dn_comp};
use crate::error::{Error, Result};
use crate::tridiag::SymTridiag;

pub const SUBSTRATE_PERIOD: f64 = 2.0 * PI;
pub const SUBSTRATE_AMPLITUDE: f64 = 2.0;
/// Coupling above which the continuum soliton is a good starting point.
pub const G_CONTINUUM: f64 = 16.0;

/// How the two ends of the chain are closed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Boundary {
    /// Site N couples back to site 1.
    Periodic,
    /// No coupling beyond the end sites.
    Free,
    /// Free ends with a constant end torque: adds `-torque * (phi_N - phi_1)`
    /// to the energy, the lattice form of a fixed boundary slope.
    Driven { torque: f64 },
    /// Ghost sites 0 and N+1 pinned at the given angles.
    Fixed { left: f64, right: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n: usize,
    pub g: f64,
    pub boundary: Boundary,
}

impl ChainSpec {
    pub fn new(n: usize, g: f64, boundary: Boundary) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("chain needs N >= 2, got {n}")));
        }
        if !(g > 0.0) || !g.is_finite() {
            return Err(Error::Domain(format!("coupling must be positive, got {g}")));
        }
        Ok(Self { n, g, boundary })
    }

    fn check_len(&self, phi: &[f64]) -> Result<()> {
        if phi.len() != self.n {
            return Err(Error::Domain(format!("configuration has {} sites, chain has {}", phi.len(), self.n)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    Vacuum,
    SingleSoliton,
    DoubleSoliton,
    Kink,
}

impl Sector {
    pub fn name(self) -> &'static str {
        match self {
            Sector::Vacuum => "vacuum",
            Sector::SingleSoliton => "single_soliton",
            Sector::DoubleSoliton => "double_soliton",
            Sector::Kink => "kink",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "vacuum" => Some(Sector::Vacuum),
            "single_soliton" => Some(Sector::SingleSoliton),
            "double_soliton" => Some(Sector::DoubleSoliton),
            "kink" => Some(Sector::Kink),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalSolution {
    pub phi: Vec<f64>,
    pub sector: Sector,
    pub energy: f64,
    /// Soliton centers in 1-based lattice units.
    pub centers: Vec<f64>,
}

pub fn substrate_potential(phi: f64) -> f64 {
    1.0 - phi.cos()
}

fn energy_of(spec: &ChainSpec, phi: &[f64]) -> f64 {
    let g = spec.g;
    let mut e: f64 = phi.iter().map(|&p| substrate_potential(p)).sum();
    let mut bond: f64 = phi.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    let n = phi.len();
    match spec.boundary {
        Boundary::Periodic => bond += (phi[0] - phi[n - 1]).powi(2),
        Boundary::Free => {}
        Boundary::Driven { torque } => e -= torque * (phi[n - 1] - phi[0]),
        Boundary::Fixed { left, right } => bond += (phi[0] - left).powi(2) + (phi[n - 1] - right).powi(2),
    }
    e + 0.5 * g * bond
}

/// Static energy `sum [1 - cos phi_n + g/2 (phi_{n+1} - phi_n)^2]` plus the
/// boundary terms of `spec.boundary`.
pub fn total_energy(spec: &ChainSpec, phi: &[f64]) -> Result<f64> {
    spec.check_len(phi)?;
    Ok(energy_of(spec, phi))
}

/// Gradient of [`total_energy`].
pub fn energy_gradient(spec: &ChainSpec, phi: &[f64]) -> Vec<f64> {
    let g = spec.g;
    let n = phi.len();
    let mut grad: Vec<f64> = phi.iter().map(|p| p.sin()).collect();
    for i in 0..n - 1 {
        let d = g * (phi[i + 1] - phi[i]);
        grad[i] -= d;
        grad[i + 1] += d;
    }
    match spec.boundary {
        Boundary::Periodic => {
            let d = g * (phi[0] - phi[n - 1]);
            grad[n - 1] -= d;
            grad[0] += d;
        }
        Boundary::Free => {}
        Boundary::Driven { torque } => {
            grad[0] += torque;
            grad[n - 1] -= torque;
        }
        Boundary::Fixed { left, right } => {
            grad[0] += g * (phi[0] - left);
            grad[n - 1] += g * (phi[n - 1] - right);
        }
    }
    grad
}

/// Hessian of the static energy at `phi`: diagonal `2g + cos phi_n`, with
/// `g + cos phi_n` at open ends, off-diagonal `-g`.
pub fn hessian(spec: &ChainSpec, phi: &[f64]) -> SymTridiag {
    let g = spec.g;
    let n = phi.len();
    let mut diag: Vec<f64> = phi.iter().map(|p| 2.0 * g + p.cos()).collect();
    let mut corner = None;
    match spec.boundary {
        Boundary::Periodic => corner = Some(-g),
        Boundary::Free | Boundary::Driven { .. } => {
            diag[0] -= g;
            diag[n - 1] -= g;
        }
        Boundary::Fixed { .. } => {}
    }
    SymTridiag { diag, off: vec![-g; n - 1], corner }
}

pub fn vacuum_solution(spec: &ChainSpec) -> ClassicalSolution {
    let phi = vec![0.0; spec.n];
    let energy = energy_of(spec, &phi);
    ClassicalSolution { phi, sector: Sector::Vacuum, energy, centers: Vec::new() }
}

/// Chain midpoint `(N+1)/2` in 1-based site units.
pub fn chain_middle(n: usize) -> f64 {
    (n as f64 + 1.0) / 2.0
}

/// Continuum sine-Gordon soliton `4 atan(exp(-sigma (n - X)/sqrt g))` sampled
/// at `n = 1..N`. `x` defaults to the chain middle.
pub fn continuum_soliton(spec: &ChainSpec, x: Option<f64>, sigma: i32) -> Result<ClassicalSolution> {
    if sigma != 1 && sigma != -1 {
        return Err(Error::Domain(format!("soliton charge must be +1 or -1, got {sigma}")));
    }
    if spec.g <= G_CONTINUUM {
        log::warn!("g = {} is below the continuum regime (g > {G_CONTINUUM})", spec.g);
    }
    let x0 = x.unwrap_or_else(|| chain_middle(spec.n));
    let w = spec.g.sqrt();
    let phi: Vec<f64> = (1..=spec.n).map(|n| 4.0 * (-(sigma as f64) * (n as f64 - x0) / w).exp().atan()).collect();
    let energy = energy_of(spec, &phi);
    let sector = if spec.g > G_CONTINUUM { Sector::SingleSoliton } else { Sector::Kink };
    Ok(ClassicalSolution { phi, sector, energy, centers: vec![x0] })
}

/// Boundary for a single soliton running from `2 pi` down to 0.
pub fn soliton_boundary() -> Boundary {
    Boundary::Fixed { left: 2.0 * PI, right: 0.0 }
}

fn modulus_from_comp(kp: f64) -> f64 {
    ((1.0 - kp) * (1.0 + kp)).sqrt()
}

/// Bisection on the complementary modulus for an increasing function of `k`
/// (decreasing in `k'`). Returns `k'` with `f(k') = 0`.
fn bisect_comp(f: impl Fn(f64) -> f64, what: &str) -> Result<f64> {
    let (mut lo, mut hi) = (1e-300f64, 1.0f64);
    if f(lo) < 0.0 || f(hi) > 0.0 {
        return Err(Error::NoRoot(what.to_string()));
    }
    // bisect in log k' for resolution near k = 1
    let (mut a, mut b) = (lo.ln(), hi.ln());
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(m.exp()) > 0.0 {
            a = m;
        } else {
            b = m;
        }
        if b - a < 1e-15 {
            break;
        }
    }
    lo = a.exp();
    hi = b.exp();
    Ok(0.5 * (lo + hi))
}

/// Moduli `k_s` solving `s K(k) = L` for `s = 1..sigma_max`.
pub fn bifurcation_points(l: f64, sigma_max: usize) -> Result<Vec<f64>> {
    if !(l > 0.0) {
        return Err(Error::Domain(format!("half-length must be positive, got {l}")));
    }
    (1..=sigma_max)
        .map(|s| {
            let s = s as f64;
            if s * PI / 2.0 > l {
                return Err(Error::NoRoot(format!("{s} K(k) = {l} has no solution since K >= pi/2")));
            }
            let kp = bisect_comp(|kp| s * complete_k_comp(kp) - l, "bifurcation point")?;
            Ok(modulus_from_comp(kp))
        })
        .collect()
}

/// Stability window in `H` for topological index `sigma`:
/// `sigma = 0 -> (0, H_0)`, otherwise `(sqrt(H_{sigma-1}^2 - 1), H_sigma)`
/// with `(s+1) K(1/H_s) = H_s L`, `K` taken as a function of the parameter.
pub fn stability_window_h(l: f64, sigma: usize) -> Result<(f64, f64)> {
    window(l, sigma, WindowForm::Parameter)
}

/// Range of `H` over which [`FiniteSgParams::from_h`] finds a profile with
/// index `sigma`. Same construction as [`stability_window_h`] with `K` taken
/// as a function of the modulus, which is the form consistent with the
/// profile's boundary slope.
pub fn profile_window_h(l: f64, sigma: usize) -> Result<(f64, f64)> {
    window(l, sigma, WindowForm::Modulus)
}

#[derive(Clone, Copy)]
enum WindowForm {
    Parameter,
    Modulus,
}

/// Returns `(H_s, sqrt(H_s^2 - 1))` for edge index `s`.
fn window_edge(l: f64, s: usize, form: WindowForm) -> Result<(f64, f64)> {
    let c = (s + 1) as f64;
    match form {
        WindowForm::Modulus => {
            // H = 1/k:  c K(k) k = L
            let kp = bisect_comp(|kp| c * complete_k_comp(kp) * modulus_from_comp(kp) - l, "window edge")?;
            let k = modulus_from_comp(kp);
            Ok((1.0 / k, kp / k))
        }
        WindowForm::Parameter => {
            // H = 1/m with m = k^2:  c K(k) m = L
            let kp = bisect_comp(|kp| c * complete_k_comp(kp) * (1.0 - kp * kp) - l, "window edge")?;
            let m = 1.0 - kp * kp;
            Ok((1.0 / m, kp * (1.0 + m).sqrt() / m))
        }
    }
}

fn window(l: f64, sigma: usize, form: WindowForm) -> Result<(f64, f64)> {
    if !(l > 0.0) {
        return Err(Error::Domain(format!("half-length must be positive, got {l}")));
    }
    let (hi, _) = window_edge(l, sigma, form)?;
    if sigma == 0 {
        return Ok((0.0, hi));
    }
    let (_, lo) = window_edge(l, sigma - 1, form)?;
    Ok((lo, hi))
}

/// Parameters of a finite sine-Gordon profile on `[-L, L]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteSgParams {
    pub l: f64,
    pub sigma: usize,
    pub k: f64,
    /// Complementary modulus, kept separately for accuracy near `k = 1`.
    pub kp: f64,
    pub h: f64,
    pub x0: f64,
}

impl FiniteSgParams {
    /// Half-length that maps an `n`-site chain onto `[-L, L]` with `sqrt(g)`
    /// sites per unit length.
    pub fn chain_half_length(n: usize, g: f64) -> f64 {
        n as f64 / (2.0 * g.sqrt())
    }

    /// Residual of the boundary-slope relation at complementary modulus `kp`.
    fn slope_residual(l: f64, sigma: usize, h: f64, kp: f64) -> f64 {
        let k = modulus_from_comp(kp);
        let (_, _, dn) = sn_cn_dn_comp(l / k, k, kp);
        if sigma % 2 == 1 {
            dn - k * h
        } else {
            dn * k * h - kp
        }
    }

    /// Boundary field implied by `k`: `dn(L/k) = kH` (odd) or
    /// `dn(L/k) = k'/(kH)` (even).
    fn field_from_comp(l: f64, sigma: usize, kp: f64) -> f64 {
        let k = modulus_from_comp(kp);
        let (_, _, dn) = sn_cn_dn_comp(l / k, k, kp);
        if sigma % 2 == 1 {
            dn / k
        } else {
            kp / (k * dn)
        }
    }

    /// Interval of complementary moduli whose profile has index `sigma`:
    /// `s k K(k) = L` at `s = sigma` and `sigma + 1`.
    fn comp_interval(l: f64, sigma: usize) -> Result<(f64, f64)> {
        let edge = |s: f64| bisect_comp(|kp| s * complete_k_comp(kp) * modulus_from_comp(kp) - l, "profile interval");
        let lo = if sigma == 0 { 1e-300 } else { edge(sigma as f64)? };
        let hi = edge(sigma as f64 + 1.0)?;
        Ok((lo, hi))
    }

    pub fn from_k(l: f64, sigma: usize, k: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&k) {
            return Err(Error::Domain(format!("modulus {k} outside [0, 1)")));
        }
        Self::from_comp(l, sigma, modulus_comp(k))
    }

    pub fn from_comp(l: f64, sigma: usize, kp: f64) -> Result<Self> {
        if !(l > 0.0) {
            return Err(Error::Domain(format!("half-length must be positive, got {l}")));
        }
        let (lo, hi) = Self::comp_interval(l, sigma)?;
        if !(kp >= lo * (1.0 - 1e-9) && kp <= hi * (1.0 + 1e-9)) {
            return Err(Error::Domain(format!("k' = {kp} outside ({lo}, {hi}) for index {sigma}")));
        }
        let k = modulus_from_comp(kp);
        let h = Self::field_from_comp(l, sigma, kp);
        Ok(Self { l, sigma, k, kp, h, x0: 0.0 })
    }

    /// Solve the boundary-slope relation for `k` given the field `H`.
    pub fn from_h(l: f64, sigma: usize, h: f64) -> Result<Self> {
        let kp = comp_from_h(l, sigma, h)?;
        Ok(Self { l, sigma, k: modulus_from_comp(kp), kp, h, x0: 0.0 })
    }

    pub fn profile(&self) -> FiniteSgProfile {
        FiniteSgProfile { params: *self, quarter: complete_k_comp(self.kp) }
    }
}

fn modulus_comp(k: f64) -> f64 {
    ((1.0 - k) * (1.0 + k)).sqrt()
}

fn comp_from_h(l: f64, sigma: usize, h: f64) -> Result<f64> {
    let (wlo, whi) = profile_window_h(l, sigma)?;
    if !(h > wlo && h < whi) {
        return Err(Error::NoRoot(format!("H = {h} outside ({wlo}, {whi}) for index {sigma}")));
    }
    let (lo, hi) = FiniteSgParams::comp_interval(l, sigma)?;
    let f = |kp: f64| FiniteSgParams::slope_residual(l, sigma, h, kp);
    let steps = 400;
    let (a, b) = (lo.ln(), hi.ln());
    let grid: Vec<f64> = (0..=steps).map(|i| (a + (b - a) * i as f64 / steps as f64).exp()).collect();
    let mut prev = f(grid[0]);
    for w in grid.windows(2) {
        let next = f(w[1]);
        if prev == 0.0 {
            return Ok(w[0]);
        }
        if prev.signum() != next.signum() {
            let (mut x0, mut x1, mut f0) = (w[0], w[1], prev);
            for _ in 0..200 {
                let m = 0.5 * (x0 + x1);
                let fm = f(m);
                if fm.signum() == f0.signum() {
                    x0 = m;
                    f0 = fm;
                } else {
                    x1 = m;
                }
                if x1 - x0 <= 1e-16 * x1 {
                    break;
                }
            }
            return Ok(0.5 * (x0 + x1));
        }
        prev = next;
    }
    Err(Error::NoRoot(format!("no modulus satisfies the boundary relation at H = {h}")))
}

/// Modulus `k` of the index-`sigma` profile whose boundary slope is `2H`.
pub fn k_from_h(l: f64, sigma: usize, h: f64) -> Result<f64> {
    comp_from_h(l, sigma, h).map(modulus_from_comp)
}

/// Finite sine-Gordon profile: `phi_o = pi s + 2 am(x/k)` for odd `s`,
/// `phi_e = pi (s-1) + 2 am(x/k + K)` for even `s`. Solves `phi'' = sin phi`
/// with `phi'(+-L) = 2H`.
#[derive(Debug, Clone, Copy)]
pub struct FiniteSgProfile {
    params: FiniteSgParams,
    quarter: f64,
}

impl FiniteSgProfile {
    fn arg(&self, x: f64) -> Result<f64> {
        let p = &self.params;
        if !(x.abs() <= p.l * (1.0 + 1e-12)) {
            return Err(Error::Domain(format!("x = {x} outside [-{}, {}]", p.l, p.l)));
        }
        let u = (x - p.x0) / p.k;
        Ok(if p.sigma % 2 == 1 { u } else { u + self.quarter })
    }

    fn offset(&self) -> f64 {
        let s = self.params.sigma as f64;
        if self.params.sigma % 2 == 1 {
            PI * s
        } else {
            PI * (s - 1.0)
        }
    }

    pub fn phi(&self, x: f64) -> Result<f64> {
        let u = self.arg(x)?;
        Ok(self.offset() + 2.0 * am_comp(u, self.params.k, self.params.kp))
    }

    pub fn dphi(&self, x: f64) -> Result<f64> {
        let u = self.arg(x)?;
        let (_, _, dn) = sn_cn_dn_comp(u, self.params.k, self.params.kp);
        Ok(2.0 * dn / self.params.k)
    }

    pub fn params(&self) -> &FiniteSgParams {
        &self.params
    }
}

/// Sample a finite sine-Gordon profile onto an `n`-site chain with
/// `sqrt(g)` sites per unit length. The profile's `L` must equal
/// [`FiniteSgParams::chain_half_length`]. The returned chain has driven ends
/// whose torque reproduces the boundary slope `2H`.
pub fn sample_finite_sg(n: usize, g: f64, params: &FiniteSgParams) -> Result<(ChainSpec, Vec<f64>)> {
    let l = FiniteSgParams::chain_half_length(n, g);
    if (params.l - l).abs() > 1e-9 * l {
        return Err(Error::Domain(format!("profile half-length {} does not match chain half-length {l}", params.l)));
    }
    let w = g.sqrt();
    let prof = params.profile();
    let mid = chain_middle(n);
    let phi = (1..=n).map(|i| prof.phi((i as f64 - mid) / w)).collect::<Result<Vec<_>>>()?;
    let spec = ChainSpec::new(n, g, Boundary::Driven { torque: 2.0 * params.h * w })?;
    Ok((spec, phi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelaxMethod {
    /// Newton steps on the tridiagonal Hessian with an energy line search.
    Newton,
    /// Steepest descent with a backtracking line search.
    GradientDescent,
}

#[derive(Debug, Clone, Copy)]
pub struct RelaxOptions {
    pub method: RelaxMethod,
    pub tol: f64,
    pub max_iter: usize,
    pub check_stability: bool,
}

impl Default for RelaxOptions {
    fn default() -> Self {
        Self { method: RelaxMethod::Newton, tol: 1e-10, max_iter: 1_000_000, check_stability: true }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RelaxLog {
    pub energies: Vec<f64>,
    pub grad_norms: Vec<f64>,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Energy change below which two energies cannot be told apart.
fn rounding_slack(spec: &ChainSpec, e: f64) -> f64 {
    1e-14 * (e.abs() + spec.n as f64)
}

fn line_search(
    spec: &ChainSpec,
    phi: &[f64],
    dir: &[f64],
    grad: &[f64],
    e0: f64,
    t0: f64,
) -> Option<(Vec<f64>, f64, f64)> {
    let slope = dot(dir, grad);
    let g0 = inf_norm(grad);
    let slack = rounding_slack(spec, e0);
    let mut t = t0;
    while t > 1e-14 {
        let trial: Vec<f64> = phi.iter().zip(dir).map(|(p, d)| p - t * d).collect();
        let e = energy_of(spec, &trial);
        if e <= e0 - 1e-4 * t * slope {
            return Some((trial, e, t));
        }
        if e <= e0 + slack && inf_norm(&energy_gradient(spec, &trial)) < g0 {
            return Some((trial, e.min(e0), t));
        }
        t *= 0.5;
    }
    None
}

/// Minimize the static energy from `initial` and report the descent history.
pub fn relax(spec: &ChainSpec, initial: &[f64], opts: &RelaxOptions) -> Result<(ClassicalSolution, RelaxLog)> {
    spec.check_len(initial)?;
    let mut phi = initial.to_vec();
    let mut e = energy_of(spec, &phi);
    let mut log = RelaxLog::default();
    let mut step = 1.0 / (4.0 * spec.g + 1.0);
    let mut iter = 0;
    // gradient rounding noise grows with g and with the winding of phi
    let floor = 64.0 * f64::EPSILON * (4.0 * spec.g + 1.0) * inf_norm(initial).max(1.0);
    let tol = opts.tol.max(floor);
    loop {
        let grad = energy_gradient(spec, &phi);
        let gnorm = inf_norm(&grad);
        log.energies.push(e);
        log.grad_norms.push(gnorm);
        if gnorm < tol {
            break;
        }
        if iter >= opts.max_iter {
            return Err(Error::NotConverged { iterations: iter, grad_norm: gnorm });
        }
        iter += 1;
        let accepted = match opts.method {
            RelaxMethod::Newton => {
                let hess = hessian(spec, &phi);
                let scale = hess.norm_inf();
                let mut shift = 0.0;
                let mut found = None;
                for _ in 0..60 {
                    if let Some(dir) = hess.solve_shifted(shift, &grad) {
                        if dot(&dir, &grad) > 0.0 {
                            found = line_search(spec, &phi, &dir, &grad, e, 1.0);
                            if found.is_some() {
                                break;
                            }
                        }
                    }
                    shift = if shift == 0.0 { 1e-8 * scale.max(1.0) } else { shift * 4.0 };
                }
                found
            }
            RelaxMethod::GradientDescent => {
                let r = line_search(spec, &phi, &grad, &grad, e, step * 2.0);
                if let Some((_, _, t)) = &r {
                    step = *t;
                }
                r
            }
        };
        match accepted {
            Some((next, en, _)) => {
                phi = next;
                e = en;
            }
            None => {
                if gnorm < 1e3 * tol {
                    break;
                }
                return Err(Error::NotConverged { iterations: iter, grad_norm: gnorm });
            }
        }
    }
    if opts.check_stability {
        check_stable(spec, &phi)?;
    }
    let centers = crossings(&phi);
    let sector = match centers.len() {
        0 => Sector::Vacuum,
        _ if spec.g <= G_CONTINUUM => Sector::Kink,
        1 => Sector::SingleSoliton,
        _ => Sector::DoubleSoliton,
    };
    let energy = energy_of(spec, &phi);
    Ok((ClassicalSolution { phi, sector, energy, centers }, log))
}

/// Relax with default options; see [`relax`].
pub fn sample_and_relax(spec: &ChainSpec, initial: &[f64]) -> Result<ClassicalSolution> {
    relax(spec, initial, &RelaxOptions::default()).map(|(s, _)| s)
}

const STABILITY_TOL: f64 = 1e-9;

fn check_stable(spec: &ChainSpec, phi: &[f64]) -> Result<()> {
    let hess = hessian(spec, phi);
    let lowest = if hess.corner.is_some() {
        let dense = hess.to_dense();
        let ev = dense
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .map_err(|_| Error::NotConverged { iterations: 0, grad_norm: f64::NAN })?;
        ev.into_iter().fold(f64::INFINITY, f64::min)
    } else if hess.count_below(-STABILITY_TOL) > 0 {
        hess.eigenvalue(0)
    } else {
        0.0
    };
    if lowest < -STABILITY_TOL {
        return Err(Error::Unstable { min_eigenvalue: lowest });
    }
    Ok(())
}

/// Interpolated positions where `phi` crosses an odd multiple of pi.
fn crossings(phi: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for (i, w) in phi.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let lo = a.min(b);
        let hi = a.max(b);
        // odd multiples (2j+1) pi in [lo, hi)
        let mut j = ((lo / PI - 1.0) / 2.0).ceil() as i64;
        loop {
            let t = (2 * j + 1) as f64 * PI;
            if t >= hi {
                break;
            }
            if t >= lo {
                let frac = if a == b { 0.0 } else { (t - a) / (b - a) };
                out.push(i as f64 + 1.0 + frac);
            }
            j += 1;
        }
    }
    if let Some(&last) = phi.last() {
        let r = (last / PI - 1.0) / 2.0;
        if r == r.round() {
            out.push(phi.len() as f64);
        }
    }
    out
}

/// Sub-lattice soliton centers of a non-vacuum solution.
pub fn soliton_centers(solution: &ClassicalSolution) -> Result<Vec<f64>> {
    if solution.sector == Sector::Vacuum {
        return Err(Error::NoCenters);
    }
    let c = crossings(&solution.phi);
    if c.is_empty() {
        return Err(Error::NoCenters);
    }
    Ok(c)
}
