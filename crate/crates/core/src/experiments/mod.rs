//! Scenario runner: builds backgrounds from a config, sweeps one parameter
//! and assembles a report.

pub mod config;
pub mod report;
mod scenarios;

use std::f64::consts::PI;

use crate::classical::{self, Boundary, ChainSpec, ClassicalSolution, FiniteSgParams, RelaxMethod, RelaxOptions};
use crate::error::{Error, Result};
use crate::gaussian::{ground_state, BlockSelection, GaussianState};
use crate::modes::{diagonalize, stability_matrix, ModeBasis};

pub use config::{
    ChainConfig, ExperimentConfig, FiniteSgTarget, Grid, Scenario, ScenarioParams, SectorSpec, Sweep, SweepParam,
};
pub use report::{EntanglementReport, Fit, Metadata, Row, SolutionRecord, SCHEMA_VERSION};
pub use scenarios::*;

/// A relaxed configuration with its modes and ground state.
#[derive(Debug, Clone)]
pub struct Background {
    pub spec: ChainSpec,
    pub solution: ClassicalSolution,
    pub basis: ModeBasis,
    pub state: GaussianState,
    pub finite_sg: Option<FiniteSgParams>,
}

impl Background {
    pub fn from_solution(
        spec: ChainSpec,
        solution: ClassicalSolution,
        finite_sg: Option<FiniteSgParams>,
    ) -> Result<Self> {
        let basis = diagonalize(&stability_matrix(&spec, &solution))?;
        let state = ground_state(&basis)?;
        Ok(Self { spec, solution, basis, state, finite_sg })
    }

    /// First soliton center, or the chain middle for the vacuum.
    pub fn center(&self) -> f64 {
        self.solution.centers.first().copied().unwrap_or_else(|| classical::chain_middle(self.spec.n))
    }

    /// Midpoint between the outermost centers, or the chain middle.
    pub fn midpoint(&self) -> f64 {
        match (self.solution.centers.first(), self.solution.centers.last()) {
            (Some(a), Some(b)) => 0.5 * (a + b),
            _ => classical::chain_middle(self.spec.n),
        }
    }

    /// Distance between the outermost centers.
    pub fn separation(&self) -> Option<f64> {
        match self.solution.centers.as_slice() {
            [a, .., b] => Some(b - a),
            _ => None,
        }
    }
}

pub fn relax_options(method: Option<RelaxMethod>) -> RelaxOptions {
    RelaxOptions { method: method.unwrap_or(RelaxMethod::Newton), ..RelaxOptions::default() }
}

fn relaxed(spec: ChainSpec, seed: &[f64], opts: &RelaxOptions) -> Result<(ChainSpec, ClassicalSolution)> {
    let (sol, _) = classical::relax(&spec, seed, opts)?;
    Ok((spec, sol))
}

fn kink(n: f64, center: f64, w: f64) -> f64 {
    4.0 * (-(n - center) / w).exp().atan()
}

/// Relaxed finite sine-Gordon profile with the given parameters.
pub fn relax_finite_sg(
    n: usize,
    g: f64,
    params: &FiniteSgParams,
    opts: &RelaxOptions,
) -> Result<(ChainSpec, ClassicalSolution)> {
    let (spec, phi) = classical::sample_finite_sg(n, g, params)?;
    relaxed(spec, &phi, opts)
}

/// Quantity a boundary-field scan tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanMeasure {
    Separation,
    LowestFrequency,
}

fn measure(kind: ScanMeasure, spec: &ChainSpec, sol: &ClassicalSolution) -> Option<f64> {
    match kind {
        ScanMeasure::Separation => match sol.centers.as_slice() {
            [a, .., b] => Some(b - a),
            _ => None,
        },
        ScanMeasure::LowestFrequency => {
            let b = classical::hessian(spec, &sol.phi);
            Some(b.eigenvalue(0).max(0.0).sqrt())
        }
    }
}

/// Relaxed finite profiles sampled across the boundary-field window, used to
/// hit a target separation or lowest frequency by bisection in `H`.
#[derive(Debug, Clone)]
pub struct FieldScan {
    pub n: usize,
    pub g: f64,
    pub sigma: usize,
    pub kind: ScanMeasure,
    opts: RelaxOptions,
    /// `(ln H, measured value)` for every relaxation that succeeded.
    pub points: Vec<(f64, f64)>,
}

const SCAN_POINTS: usize = 64;

impl FieldScan {
    pub fn new(n: usize, g: f64, sigma: usize, kind: ScanMeasure, opts: RelaxOptions) -> Result<Self> {
        let l = FiniteSgParams::chain_half_length(n, g);
        let (lo, hi) = classical::profile_window_h(l, sigma)?;
        let (a, b) = (lo.ln(), hi.ln());
        // uniform in ln H, plus points crowding toward both window edges
        let mut fracs: Vec<f64> = (0..SCAN_POINTS).map(|i| (i as f64 + 0.5) / SCAN_POINTS as f64).collect();
        for e in 3..=9 {
            let f = 10f64.powi(-e);
            fracs.push(f);
            fracs.push(1.0 - f);
        }
        fracs.sort_by(f64::total_cmp);
        let points = fracs
            .into_iter()
            .filter_map(|f| {
                let t = a + (b - a) * f;
                let params = FiniteSgParams::from_h(l, sigma, t.exp()).ok()?;
                let (spec, sol) = relax_finite_sg(n, g, &params, &opts).ok()?;
                measure(kind, &spec, &sol).map(|v| (t, v))
            })
            .collect();
        Ok(Self { n, g, sigma, kind, opts, points })
    }

    fn at(&self, t: f64) -> Option<(FiniteSgParams, ChainSpec, ClassicalSolution, f64)> {
        let l = FiniteSgParams::chain_half_length(self.n, self.g);
        let params = FiniteSgParams::from_h(l, self.sigma, t.exp()).ok()?;
        let (spec, sol) = relax_finite_sg(self.n, self.g, &params, &self.opts).ok()?;
        let v = measure(self.kind, &spec, &sol)?;
        Some((params, spec, sol, v))
    }

    /// Configuration whose measured value equals `target`, from the lowest
    /// bracketing field.
    pub fn solve(&self, target: f64) -> Result<(FiniteSgParams, ChainSpec, ClassicalSolution)> {
        let fail = || {
            Error::NoStableConfiguration(format!(
                "no stable index-{} configuration at g = {} reaches {:?} = {target}",
                self.sigma, self.g, self.kind
            ))
        };
        for w in self.points.windows(2) {
            let ((mut a, fa), (mut b, fb)) = (w[0], w[1]);
            if (fa - target).signum() == (fb - target).signum() {
                continue;
            }
            let below = fa < target;
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                match self.at(m) {
                    Some((.., v)) if (v < target) == below => a = m,
                    Some(_) => b = m,
                    None => break,
                }
                if b - a < 1e-13 {
                    break;
                }
            }
            let pick = |t: f64| self.at(t).map(|(p, s, sol, v)| ((v - target).abs(), p, s, sol));
            let best = [pick(a), pick(b)].into_iter().flatten().min_by(|x, y| x.0.total_cmp(&y.0));
            if let Some((_, p, s, sol)) = best {
                return Ok((p, s, sol));
            }
        }
        Err(fail())
    }
}

/// Static configuration for a sector at coupling `g`.
pub fn solve_sector(
    n: usize,
    g: f64,
    sector: &SectorSpec,
    boundary: Option<Boundary>,
    opts: &RelaxOptions,
) -> Result<(ChainSpec, ClassicalSolution, Option<FiniteSgParams>)> {
    let w = g.sqrt();
    match *sector {
        SectorSpec::Vacuum => {
            let spec = ChainSpec::new(n, g, boundary.unwrap_or(Boundary::Periodic))?;
            Ok((spec, classical::vacuum_solution(&spec), None))
        }
        SectorSpec::SingleSoliton { center } => {
            let spec = ChainSpec::new(n, g, boundary.unwrap_or_else(classical::soliton_boundary))?;
            let seed = classical::continuum_soliton(&spec, center, 1)?;
            let (spec, sol) = relaxed(spec, &seed.phi, opts)?;
            Ok((spec, sol, None))
        }
        SectorSpec::KinkPair { centers } => {
            let spec = ChainSpec::new(n, g, boundary.unwrap_or(Boundary::Fixed { left: 4.0 * PI, right: 0.0 }))?;
            let seed: Vec<f64> =
                (1..=n).map(|i| kink(i as f64, centers[0], w) + kink(i as f64, centers[1], w)).collect();
            let (spec, sol) = relaxed(spec, &seed, opts)?;
            Ok((spec, sol, None))
        }
        SectorSpec::FiniteSg { sigma, target } => {
            let l = FiniteSgParams::chain_half_length(n, g);
            let (params, spec, sol) = match target {
                FiniteSgTarget::Field { h } => {
                    let p = FiniteSgParams::from_h(l, sigma, h)?;
                    let (s, sol) = relax_finite_sg(n, g, &p, opts)?;
                    (p, s, sol)
                }
                FiniteSgTarget::Modulus { k } => {
                    let p = FiniteSgParams::from_k(l, sigma, k)?;
                    let (s, sol) = relax_finite_sg(n, g, &p, opts)?;
                    (p, s, sol)
                }
                FiniteSgTarget::Separation { d } => {
                    FieldScan::new(n, g, sigma, ScanMeasure::Separation, *opts)?.solve(d)?
                }
                FiniteSgTarget::LowestFrequency { omega } => {
                    FieldScan::new(n, g, sigma, ScanMeasure::LowestFrequency, *opts)?.solve(omega)?
                }
            };
            Ok((spec, sol, Some(params)))
        }
    }
}

/// Background for `cfg` at coupling `g`, reusing the persisted seed solution
/// when it matches.
pub fn background_at(cfg: &ExperimentConfig, g: f64) -> Result<Background> {
    if let Some(path) = &cfg.seed_solution_path {
        if g == cfg.chain.g {
            let rec = SolutionRecord::load(path)?;
            if rec.chain.n != cfg.chain.n || rec.chain.g != cfg.chain.g {
                return Err(Error::Config(format!(
                    "seed solution {} does not match the configured chain",
                    path.display()
                )));
            }
            return Background::from_solution(rec.chain, rec.solution, None);
        }
    }
    let (spec, sol, fsg) = solve_sector(cfg.chain.n, g, &cfg.sector, cfg.chain.boundary, &relax_options(cfg.relax))?;
    Background::from_solution(spec, sol, fsg)
}

/// `len` sites centered on the 1-based position `center`; fails instead of
/// shifting when the block would leave the chain.
pub fn block_at(center: f64, len: usize, n: usize) -> Result<BlockSelection> {
    let first = (center - (len as f64 - 1.0) / 2.0).round();
    if len == 0 || first < 1.0 || first + len as f64 - 1.0 > n as f64 {
        return Err(Error::Domain(format!("block of {len} sites at {center} leaves the {n}-site chain")));
    }
    Ok(BlockSelection::contiguous(first as usize - 1, len))
}

/// Two blocks of `len` sites centered `distance` apart around `mid`.
pub fn block_pair(mid: f64, distance: f64, len: usize, n: usize) -> Result<(BlockSelection, BlockSelection)> {
    let a = block_at(mid - 0.5 * distance, len, n)?;
    let b = block_at(mid + 0.5 * distance, len, n)?;
    if a.overlaps(&b) {
        return Err(Error::OverlappingBlocks);
    }
    Ok((a, b))
}

/// Block sizes searched when maximizing the entropy: steps of
/// `max(1, sqrt(g)/25)` up to `min(N/2, 3 sqrt(g))`.
pub fn default_block_grid(n: usize, g: f64) -> Vec<usize> {
    let w = g.sqrt();
    let step = ((w / 25.0).round() as usize).max(1);
    let top = ((3.0 * w).ceil() as usize).clamp(2, n / 2);
    (1..).map(|i| i * step).take_while(|&l| l <= top).collect()
}

/// Least squares `y = a + b x`; returns `(b, a, rms residual)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let icept = my - slope * mx;
    let rms = (x.iter().zip(y).map(|(a, b)| (b - icept - slope * a).powi(2)).sum::<f64>() / n).sqrt();
    (slope, icept, rms)
}

/// Spearman rank correlation.
pub fn rank_correlation(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        for (rank, &i) in idx.iter().enumerate() {
            r[i] = rank as f64;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let m = (n - 1.0) / 2.0;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - m) * (b - m)).sum();
    let var: f64 = rx.iter().map(|a| (a - m).powi(2)).sum();
    cov / var
}
