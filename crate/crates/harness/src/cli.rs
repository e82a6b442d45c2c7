//! Command-line interface.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use wpbc::{ChannelFile, LinkBudget, PowerDelayProfile, SystemConfig64};

use crate::error::{HarnessError, Result};
use crate::experiments::{default_cells, execute, RunOutput};
use crate::output::{persist, replay};
use crate::spec::{
    Algorithm, ChannelSource, CompareParams, Design, Experiment, GridParams, Model, RegionParams, RunSpec, Scenario,
    TdmaParams, Variant,
};

pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "wpbc", version, about = "Waveform and combiner optimization for wirelessly powered backscatter")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// SINR-target versus harvested-DC tradeoff sweep.
    Region {
        #[command(flatten)]
        common: Common,
        /// Targets in dB; default −10 dB up to the max-SNR bound.
        #[arg(long, value_delimiter = ',')]
        targets_db: Vec<f64>,
        #[arg(long, default_value_t = 2.0)]
        step_db: f64,
        #[arg(long, value_enum, default_value_t = Algorithm::Alg2)]
        algorithm: Algorithm,
        #[arg(long, value_enum, default_value_t = Design::Forward)]
        design: Design,
        #[arg(long, value_enum, default_value_t = Model::Nonlinear)]
        eh_model: Model,
    },
    /// Nonlinear versus linear harvester model, both scored nonlinearly.
    CompareModels {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        targets_db: Vec<f64>,
        /// Tone counts to compare; default is `--n-tones`.
        #[arg(long, value_delimiter = ',')]
        n_list: Vec<usize>,
        #[arg(long, value_enum, default_value_t = Algorithm::Alg2)]
        algorithm: Algorithm,
    },
    /// Simultaneous service versus TDMA slot splits for two tags.
    Tdma {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10.0)]
        target_db: f64,
        /// Give the slot owner `P·10/T_j` instead of `P`.
        #[arg(long)]
        energy_conserving: bool,
        #[arg(long, value_enum, default_value_t = Algorithm::Alg2)]
        algorithm: Algorithm,
    },
    /// Averaged harvested DC over a grid of (K, N).
    Grid {
        #[command(flatten)]
        common: Common,
        /// Cells as `KxN`, comma separated.
        #[arg(long, value_delimiter = ',')]
        cells: Vec<String>,
        #[arg(long, default_value_t = 3.0)]
        target_db: f64,
    },
    /// Re-executes a manifest and checks every CSV digest.
    Replay {
        manifest: PathBuf,
        #[arg(long, default_value = "replay")]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// SystemConfig JSON; overrides the size and SNR flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub realizations: usize,
    #[arg(long, default_value_t = 8)]
    pub n_tones: usize,
    #[arg(long, default_value_t = 1)]
    pub n_tags: usize,
    /// Reader SNR `P/σ²` on the mean backscatter gain.
    #[arg(long, default_value_t = 10.0)]
    pub snr_db: f64,
    /// Power delay profile JSON: list of `{delay_ns, power}`.
    #[arg(long)]
    pub pdp: Option<PathBuf>,
    /// Link budget JSON.
    #[arg(long)]
    pub budget: Option<PathBuf>,
    /// Stored channel realizations (JSON list) instead of drawing.
    #[arg(long)]
    pub channels: Option<PathBuf>,
    #[arg(long)]
    pub reciprocal: bool,
}

fn read(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))
}

impl Common {
    pub fn scenario(&self) -> Result<Scenario> {
        let mut s = Scenario::standard(self.n_tones, self.n_tags, self.snr_db, 0.0, self.seed, self.realizations);
        if let Some(p) = &self.budget {
            s.budget = serde_json::from_str::<LinkBudget>(&read(p)?)?;
            let p = s.budget.tx_power_w();
            s.system.tx_power = p;
            s.system.noise_var = s.budget.noise_var_for_snr_db(p, self.snr_db);
        }
        if let Some(path) = &self.config {
            s.system = SystemConfig64::from_json(&read(path)?)?;
        }
        if let Some(p) = &self.pdp {
            s.pdp = PowerDelayProfile::from_json(&read(p)?)?.into();
        }
        if let Some(p) = &self.channels {
            let channels: Vec<ChannelFile> = serde_json::from_str(&read(p)?)?;
            s.channels = ChannelSource::Replay { channels };
        }
        s.reciprocal = self.reciprocal;
        Ok(s)
    }
}

fn parse_cell(s: &str) -> Result<(usize, usize)> {
    let bad = || HarnessError::Spec(format!("cell '{s}' is not of the form KxN"));
    let (k, n) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((k.trim().parse().map_err(|_| bad())?, n.trim().parse().map_err(|_| bad())?))
}

/// What a finished command reports back to `main`.
#[derive(Debug)]
pub enum Finished {
    Ran { dir: PathBuf, output: RunOutput },
    Replayed { dir: PathBuf, files: Vec<String> },
}

impl Finished {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Ran { output, .. } if !output.any_feasible => EXIT_INFEASIBLE,
            _ => 0,
        }
    }
}

pub fn build_spec(command: &Command) -> Result<Option<(RunSpec, PathBuf)>> {
    let (common, experiment) = match command {
        Command::Region {
            common,
            targets_db,
            step_db,
            algorithm,
            design,
            eh_model,
        } => {
            let mut targets_db = targets_db.clone();
            targets_db.sort_by(f64::total_cmp);
            (
                common,
                Experiment::Region(RegionParams {
                    targets_db,
                    step_db: *step_db,
                    algorithm: *algorithm,
                    design: *design,
                    model: *eh_model,
                }),
            )
        }
        Command::CompareModels {
            common,
            targets_db,
            n_list,
            algorithm,
        } => {
            let mut targets_db = targets_db.clone();
            targets_db.sort_by(f64::total_cmp);
            let n_tones = if n_list.is_empty() {
                vec![common.n_tones]
            } else {
                n_list.clone()
            };
            (
                common,
                Experiment::CompareModels(CompareParams {
                    targets_db,
                    n_tones,
                    algorithm: *algorithm,
                }),
            )
        }
        Command::Tdma {
            common,
            target_db,
            energy_conserving,
            algorithm,
        } => (
            common,
            Experiment::Tdma(TdmaParams {
                target_db: *target_db,
                energy_conserving: *energy_conserving,
                algorithm: *algorithm,
            }),
        ),
        Command::Grid {
            common,
            cells,
            target_db,
        } => {
            let cells = if cells.is_empty() {
                default_cells()
            } else {
                cells.iter().map(|c| parse_cell(c)).collect::<Result<_>>()?
            };
            (
                common,
                Experiment::Grid(GridParams {
                    cells,
                    target_db: *target_db,
                    variants: Variant::all(),
                }),
            )
        }
        Command::Replay { .. } => return Ok(None),
    };
    let mut scenario = common.scenario()?;
    if matches!(experiment, Experiment::Tdma(_)) && common.config.is_none() {
        scenario = Scenario {
            system: scenario.system_for(2, scenario.system.n_tones, 0),
            ..scenario
        };
        scenario.system.rng_seed = common.seed;
    }
    Ok(Some((RunSpec { scenario, experiment }, common.out.clone())))
}

pub fn run(cli: &Cli) -> Result<Finished> {
    if let Command::Replay { manifest, out } = &cli.command {
        let r = replay(manifest, out)?;
        return Ok(Finished::Replayed {
            dir: r.dir,
            files: r.matched,
        });
    }
    let (spec, dir) = build_spec(&cli.command)?.expect("non-replay command");
    let output = execute(&spec)?;
    persist(&spec, &output, &dir)?;
    Ok(Finished::Ran { dir, output })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_parse_either_case() {
        assert_eq!(parse_cell("2x8").unwrap(), (2, 8));
        assert_eq!(parse_cell(" 3X16").unwrap(), (3, 16));
        assert!(parse_cell("3by4").is_err());
        assert!(parse_cell("x4").is_err());
    }
}
