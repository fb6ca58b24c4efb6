use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classical::{Boundary, RelaxMethod};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    EntropyProfile,
    SlidingBlocks,
    LnVsSeparation,
    AlphaFit,
    BetaFit,
    MaxEntropySweep,
    CorrelationCompare,
    WeakCouplingProfile,
    SqueezeSingle,
    SqueezeDouble,
    WkbCheck,
    NoncriticalOscillation,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::EntropyProfile => "entropy_profile",
            Scenario::SlidingBlocks => "sliding_blocks",
            Scenario::LnVsSeparation => "ln_vs_separation",
            Scenario::AlphaFit => "alpha_fit",
            Scenario::BetaFit => "beta_fit",
            Scenario::MaxEntropySweep => "max_entropy_sweep",
            Scenario::CorrelationCompare => "correlation_compare",
            Scenario::WeakCouplingProfile => "weak_coupling_profile",
            Scenario::SqueezeSingle => "squeeze_single",
            Scenario::SqueezeDouble => "squeeze_double",
            Scenario::WkbCheck => "wkb_check",
            Scenario::NoncriticalOscillation => "noncritical_oscillation",
        }
    }

    /// The sweep axis each scenario runs along.
    pub fn sweep_param(self) -> SweepParam {
        match self {
            Scenario::EntropyProfile
            | Scenario::WeakCouplingProfile
            | Scenario::SqueezeSingle
            | Scenario::SqueezeDouble => SweepParam::BlockSize,
            Scenario::AlphaFit | Scenario::BetaFit | Scenario::MaxEntropySweep => SweepParam::Coupling,
            Scenario::SlidingBlocks => SweepParam::Shift,
            Scenario::LnVsSeparation | Scenario::WkbCheck | Scenario::NoncriticalOscillation => SweepParam::Separation,
            Scenario::CorrelationCompare => SweepParam::Distance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// Number of sites in the measured block.
    BlockSize,
    /// Coupling `g`.
    Coupling,
    /// Offset of a block pair from the midpoint between the solitons.
    Shift,
    /// Soliton (or block) center separation in sites.
    Separation,
    /// Site offset from a reference site.
    Distance,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::BlockSize => "block_size",
            SweepParam::Coupling => "coupling",
            SweepParam::Shift => "shift",
            SweepParam::Separation => "separation",
            SweepParam::Distance => "distance",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Grid {
    /// Explicit points, in any order; they are swept in ascending order.
    Values {
        values: Vec<f64>,
    },
    Linear {
        start: f64,
        stop: f64,
        step: f64,
    },
    /// Logarithmic grid, `per_decade` points per factor of ten.
    Log {
        start: f64,
        stop: f64,
        per_decade: usize,
    },
}

impl Grid {
    pub fn points(&self) -> Result<Vec<f64>> {
        let pts = match self {
            Grid::Values { values } => {
                let mut v = values.clone();
                v.sort_by(f64::total_cmp);
                v
            }
            Grid::Linear { start, stop, step } => {
                if !(*step > 0.0) || !(stop >= start) {
                    return Err(Error::Config(format!("bad linear grid {start}..{stop} step {step}")));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..count).map(|i| start + step * i as f64).collect()
            }
            Grid::Log { start, stop, per_decade } => {
                if !(*start > 0.0) || !(stop >= start) || *per_decade == 0 {
                    return Err(Error::Config(format!("bad log grid {start}..{stop}, {per_decade} per decade")));
                }
                let (a, b) = (start.log10(), stop.log10());
                let count = ((b - a) * *per_decade as f64 + 1e-9).floor() as usize + 1;
                (0..count).map(|i| 10f64.powf(a + i as f64 / *per_decade as f64)).collect()
            }
        };
        if pts.is_empty() {
            return Err(Error::Config("sweep grid is empty".into()));
        }
        if pts.iter().any(|x| !x.is_finite()) || pts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("sweep grid values must be finite and distinct".into()));
        }
        Ok(pts)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub param: SweepParam,
    pub grid: Grid,
}

/// Which quantity pins a finite sine-Gordon profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "by", rename_all = "snake_case")]
pub enum FiniteSgTarget {
    /// Boundary field `H`.
    Field { h: f64 },
    /// Elliptic modulus.
    Modulus { k: f64 },
    /// Distance between the outermost relaxed soliton centers.
    Separation { d: f64 },
    /// Lowest fluctuation frequency of the relaxed configuration.
    LowestFrequency { omega: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SectorSpec {
    Vacuum,
    /// Relaxed continuum soliton (a kink at weak coupling), centered at the
    /// chain middle unless `center` is given.
    SingleSoliton {
        #[serde(default)]
        center: Option<f64>,
    },
    /// Relaxed finite sine-Gordon profile with `sigma` half-periods.
    FiniteSg {
        sigma: usize,
        target: FiniteSgTarget,
    },
    /// Two relaxed kinks running from `4 pi` to 0.
    KinkPair {
        centers: [f64; 2],
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub n: usize,
    pub g: f64,
    /// Overrides the boundary the sector would choose.
    #[serde(default)]
    pub boundary: Option<Boundary>,
}

/// Scenario-specific knobs; which ones are required depends on the scenario.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioParams {
    /// Block size `l`; chosen by maximizing the entropy when absent.
    #[serde(default)]
    pub block: Option<usize>,
    /// Center-to-center distance of a block pair.
    #[serde(default)]
    pub block_separation: Option<f64>,
    /// Squeezing parameter.
    #[serde(default)]
    pub r: Option<f64>,
    /// Frequency of the external mode; defaults to the squeezed mode's.
    #[serde(default)]
    pub omega_q: Option<f64>,
    /// Window of the sweep (in gap-over-block units) used for exponential fits.
    #[serde(default)]
    pub fit_window: Option<[f64; 2]>,
    /// Block sizes searched when maximizing the entropy.
    #[serde(default)]
    pub block_grid: Option<Grid>,
    /// Gap-over-block ratios for decay fits.
    #[serde(default)]
    pub ratio_grid: Option<Grid>,
    /// 1-based reference site for correlation profiles.
    #[serde(default)]
    pub reference: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub chain: ChainConfig,
    pub sector: SectorSpec,
    pub sweep: Sweep,
    #[serde(default)]
    pub params: ScenarioParams,
    #[serde(default)]
    pub seed_solution_path: Option<PathBuf>,
    #[serde(default)]
    pub relax: Option<RelaxMethod>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.chain.n < 2 {
            return bad(format!("chain needs at least 2 sites, got {}", self.chain.n));
        }
        if !(self.chain.g > 0.0) || !self.chain.g.is_finite() {
            return bad(format!("coupling must be positive, got {}", self.chain.g));
        }
        let want = self.scenario.sweep_param();
        if self.sweep.param != want {
            return bad(format!("{} sweeps {}, not {}", self.scenario.name(), want.name(), self.sweep.param.name()));
        }
        let pts = self.sweep.grid.points()?;
        if matches!(want, SweepParam::BlockSize | SweepParam::Distance)
            && pts.iter().any(|&x| x < 0.0 || x.fract() != 0.0 || x as usize > self.chain.n)
        {
            return bad("block sizes and distances must be whole numbers within the chain".into());
        }
        if want == SweepParam::Coupling && pts[0] <= 0.0 {
            return bad("couplings must be positive".into());
        }
        for grid in [&self.params.block_grid, &self.params.ratio_grid].into_iter().flatten() {
            grid.points()?;
        }
        let p = &self.params;
        let double = matches!(self.sector, SectorSpec::FiniteSg { .. } | SectorSpec::KinkPair { .. });
        match self.scenario {
            Scenario::SlidingBlocks if p.block.is_none() => return bad("sliding_blocks needs params.block".into()),
            Scenario::SlidingBlocks if !double && p.block_separation.is_none() => {
                return bad("sliding_blocks on a single background needs params.block_separation".into())
            }
            Scenario::SqueezeSingle | Scenario::SqueezeDouble if p.r.is_none() => {
                return bad(format!("{} needs params.r", self.scenario.name()))
            }
            Scenario::SqueezeDouble if p.block_separation.is_none() => {
                return bad("squeeze_double needs params.block_separation".into())
            }
            Scenario::BetaFit if p.ratio_grid.is_none() => return bad("beta_fit needs params.ratio_grid".into()),
            _ => {}
        }
        if let Some(r) = p.r {
            if !(r >= 0.0) {
                return bad(format!("squeezing must be non-negative, got {r}"));
            }
        }
        if let SectorSpec::FiniteSg { sigma, .. } = self.sector {
            if sigma == 0 {
                return bad("finite sine-Gordon index must be at least 1".into());
            }
        }
        let needs_pair = matches!(
            self.scenario,
            Scenario::LnVsSeparation | Scenario::WkbCheck | Scenario::NoncriticalOscillation | Scenario::SqueezeDouble
        );
        let pair_ok = matches!(self.sector, SectorSpec::FiniteSg { sigma: 2, .. })
            || (self.scenario == Scenario::LnVsSeparation && self.sector == SectorSpec::Vacuum);
        if needs_pair && !pair_ok {
            return bad(format!("{} needs a two-soliton finite sine-Gordon sector", self.scenario.name()));
        }
        Ok(())
    }

    /// Canonical serialization used for hashing.
    pub fn canonical(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of [`ExperimentConfig::canonical`].
    pub fn hash(&self) -> String {
        format!("{:x}", Sha256::digest(self.canonical().as_bytes()))
    }
}
