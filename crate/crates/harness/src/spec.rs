//! Run descriptions: everything needed to re-execute an experiment.

use serde::{Deserialize, Serialize};
use wpbc::algorithms::{DesignChannel, ScaOptions};
use wpbc::{
    db_to_linear, draw_realization, stream_rng, ChannelFile, ChannelRealization, EhModel, LinkBudget,
    PowerDelayProfile, SystemConfig64, Tap,
};

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Alg2,
    Alg3,
}

impl Algorithm {
    pub fn options(self, design: DesignChannel) -> ScaOptions<f64> {
        match self {
            Self::Alg2 => ScaOptions::algorithm2(),
            Self::Alg3 => ScaOptions::algorithm3(),
        }
        .with_design(design)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Alg2 => "alg2",
            Self::Alg3 => "alg3",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Design {
    Forward,
    BackscatterOnly,
}

impl From<Design> for DesignChannel {
    fn from(d: Design) -> Self {
        match d {
            Design::Forward => DesignChannel::Forward,
            Design::BackscatterOnly => DesignChannel::BackscatterOnly,
        }
    }
}

impl Design {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Forward => "forward",
            Self::BackscatterOnly => "backscatter_only",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Nonlinear,
    Linear,
}

impl From<Model> for EhModel {
    fn from(m: Model) -> Self {
        match m {
            Model::Nonlinear => EhModel::Nonlinear4th,
            Model::Linear => EhModel::Linear2nd,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ChannelSource {
    /// Realization `r` is drawn from RNG stream `r` of `seed`.
    Drawn { seed: u64, realizations: usize },
    /// Stored realizations, used in order.
    Replay { channels: Vec<ChannelFile> },
}

/// System, propagation and channel inputs shared by all experiments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub system: SystemConfig64,
    pub budget: LinkBudget,
    pub pdp: Vec<Tap>,
    #[serde(default)]
    pub reciprocal: bool,
    pub channels: ChannelSource,
}

impl Scenario {
    /// Default link budget with noise set for a reader SNR `P/σ²` in dB.
    pub fn standard(n_tones: usize, n_tags: usize, snr_db: f64, target_db: f64, seed: u64, realizations: usize) -> Self {
        let budget = LinkBudget::default();
        let p = budget.tx_power_w();
        let mut system = SystemConfig64::uniform(
            n_tones,
            n_tags,
            p,
            budget.noise_var_for_snr_db(p, snr_db),
            db_to_linear(target_db),
        );
        system.rng_seed = seed;
        Self {
            system,
            budget,
            pdp: PowerDelayProfile::default().into(),
            reciprocal: false,
            channels: ChannelSource::Drawn { seed, realizations },
        }
    }

    pub fn realizations(&self) -> usize {
        match &self.channels {
            ChannelSource::Drawn { realizations, .. } => *realizations,
            ChannelSource::Replay { channels } => channels.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        PowerDelayProfile::new(self.pdp.clone())?;
        if self.realizations() == 0 {
            return Err(HarnessError::Spec("realization count must be at least 1".into()));
        }
        Ok(())
    }

    /// Realization `r` with `n_tags × n_tones` responses.
    pub fn channel(&self, r: usize, n_tags: usize, n_tones: usize) -> Result<ChannelRealization<f64>> {
        match &self.channels {
            ChannelSource::Drawn { seed, .. } => {
                let pdp = PowerDelayProfile::new(self.pdp.clone())?;
                let mut rng = stream_rng(*seed, r as u64);
                Ok(draw_realization(&pdp, n_tags, n_tones, &self.budget, self.reciprocal, &mut rng)?)
            }
            ChannelSource::Replay { channels } => {
                let ch = ChannelRealization::from_file(&channels[r])?;
                if ch.n_tags() < n_tags || ch.n_tones() != n_tones {
                    return Err(HarnessError::Spec(format!(
                        "stored realization {r} is {}×{}, experiment needs {n_tags}×{n_tones}",
                        ch.n_tags(),
                        ch.n_tones()
                    )));
                }
                let tags: Vec<usize> = (0..n_tags).collect();
                Ok(ch.select_tags(&tags))
            }
        }
    }

    /// System configuration for one work item.
    pub fn system_for(&self, n_tags: usize, n_tones: usize, r: usize) -> SystemConfig64 {
        let mut cfg = self.system.clone();
        if cfg.n_tags != n_tags {
            let t = cfg.sinr_targets.first().copied().unwrap_or(0.0);
            let c = cfg.tag_weights.first().copied().unwrap_or(1.0);
            cfg.sinr_targets = vec![t; n_tags];
            cfg.tag_weights = vec![c; n_tags];
            cfg.n_tags = n_tags;
        }
        cfg.n_tones = n_tones;
        cfg.rng_seed = self.system.rng_seed.wrapping_add(r as u64);
        cfg
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionParams {
    /// Empty: −10 dB up to the realization's max-SNR bound in `step_db` steps.
    pub targets_db: Vec<f64>,
    pub step_db: f64,
    pub algorithm: Algorithm,
    pub design: Design,
    pub model: Model,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareParams {
    pub targets_db: Vec<f64>,
    pub n_tones: Vec<usize>,
    pub algorithm: Algorithm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TdmaParams {
    pub target_db: f64,
    /// Slot owner transmits with `P·10/T_j` instead of `P`.
    pub energy_conserving: bool,
    pub algorithm: Algorithm,
}

/// One design under test in a grid cell; always scored with the nonlinear
/// metric on the forward channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variant {
    pub model: Model,
    pub algorithm: Algorithm,
    pub design: Design,
}

impl Variant {
    pub fn all() -> Vec<Self> {
        vec![
            Self::new(Model::Nonlinear, Algorithm::Alg2, Design::Forward),
            Self::new(Model::Nonlinear, Algorithm::Alg3, Design::Forward),
            Self::new(Model::Linear, Algorithm::Alg2, Design::Forward),
            Self::new(Model::Nonlinear, Algorithm::Alg2, Design::BackscatterOnly),
        ]
    }

    pub fn new(model: Model, algorithm: Algorithm, design: Design) -> Self {
        Self {
            model,
            algorithm,
            design,
        }
    }

    pub fn label(&self) -> String {
        let m = match self.model {
            Model::Nonlinear => "nonlinear",
            Model::Linear => "linear",
        };
        format!("{m}/{}/{}", self.algorithm.as_str(), self.design.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    /// `(K, N)` cells.
    pub cells: Vec<(usize, usize)>,
    pub target_db: f64,
    pub variants: Vec<Variant>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "experiment")]
pub enum Experiment {
    Region(RegionParams),
    CompareModels(CompareParams),
    Tdma(TdmaParams),
    Grid(GridParams),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Region(_) => "region",
            Self::CompareModels(_) => "compare-models",
            Self::Tdma(_) => "tdma",
            Self::Grid(_) => "grid",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub scenario: Scenario,
    pub experiment: Experiment,
}

impl RunSpec {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        let sorted = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]) && v.iter().all(|x| x.is_finite());
        match &self.experiment {
            Experiment::Region(p) => {
                if !sorted(&p.targets_db) {
                    return Err(HarnessError::Spec("targets must be finite and strictly ascending".into()));
                }
                if !(p.step_db > 0.0) {
                    return Err(HarnessError::Spec("step_db must be positive".into()));
                }
            }
            Experiment::CompareModels(p) => {
                if !sorted(&p.targets_db) || p.targets_db.is_empty() {
                    return Err(HarnessError::Spec("targets must be nonempty and strictly ascending".into()));
                }
                if p.n_tones.is_empty() || p.n_tones.iter().any(|&n| n < self.scenario.system.n_tags) {
                    return Err(HarnessError::Spec("every N must be at least K".into()));
                }
            }
            Experiment::Tdma(_) => {
                if self.scenario.system.n_tags != 2 {
                    return Err(HarnessError::Spec("the TDMA comparison needs K = 2".into()));
                }
            }
            Experiment::Grid(p) => {
                if p.cells.is_empty() || p.cells.iter().any(|&(k, n)| k == 0 || n < k) {
                    return Err(HarnessError::Spec("grid cells need 1 ≤ K ≤ N".into()));
                }
                if p.variants.is_empty() {
                    return Err(HarnessError::Spec("at least one grid variant required".into()));
                }
            }
        }
        Ok(())
    }
}
