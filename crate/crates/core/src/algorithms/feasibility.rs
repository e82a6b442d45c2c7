//! Max-min SINR feasibility by alternating MMSE combining and bisection on
//! the SINR scaling factor `δ`.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::conic::{solve_socp_step_with, ConicSolver, InteriorPoint, SocpStepSpec, SolveStatus};
use crate::error::{check_len, Error, Result};
use crate::link::{mmse_combiners, CombinerSet};
use crate::model::{SystemConfig, Waveform};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FeasibilityOptions<T: Real> {
    /// Bisection width on `δ` and minimum outer gain.
    pub bisection_tol: T,
    pub max_outer: usize,
    /// Value reported for `δ*` when every target is zero.
    pub delta_cap: T,
}

impl<T: Real> Default for FeasibilityOptions<T> {
    fn default() -> Self {
        Self {
            bisection_tol: T::lit(1e-4),
            max_outer: 50,
            delta_cap: T::lit(1e6),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FeasibilityResult<T: Real> {
    pub delta_star: T,
    pub waveform: Waveform<T>,
    pub combiners: CombinerSet<T>,
    pub iterations: usize,
    /// `δ_min` after each outer iteration.
    pub delta_min_trace: Vec<T>,
    /// Conic solves performed.
    pub probes: usize,
    /// Irregular events, e.g. a carried `δ_min` that had to be re-probed.
    pub events: Vec<String>,
}

impl<T: Real> FeasibilityResult<T> {
    pub fn is_feasible(&self) -> bool {
        self.delta_star >= T::one()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Largest single-tone SNR reachable by tag `j` alone: `2P max_n |h h^b|² / σ²`.
pub fn single_tone_snr_bound<T: Real>(cfg: &SystemConfig<T>, channel: &ChannelRealization<T>, j: usize) -> T {
    let best = channel
        .h_diag(j)
        .iter()
        .fold(T::zero(), |a, z| a.max(z.norm_sqr()));
    T::lit(2.0) * cfg.tx_power * best / cfg.noise_var
}

pub fn algorithm1_feasibility<T: Real>(
    cfg: &SystemConfig<T>,
    channel: &ChannelRealization<T>,
) -> Result<FeasibilityResult<T>> {
    algorithm1_with(cfg, channel, &FeasibilityOptions::default(), &InteriorPoint::default())
}

pub fn algorithm1_with<T: Real>(
    cfg: &SystemConfig<T>,
    channel: &ChannelRealization<T>,
    opts: &FeasibilityOptions<T>,
    solver: &dyn ConicSolver<T>,
) -> Result<FeasibilityResult<T>> {
    cfg.validate()?;
    check_len(cfg.n_tags, channel.n_tags())?;
    check_len(cfg.n_tones, channel.n_tones())?;
    let mut w = Waveform::uniform(cfg.n_tones, cfg.tx_power);
    let mut g = mmse_combiners(&w, channel, cfg.noise_var)?;
    let active: Vec<usize> = (0..cfg.n_tags).filter(|&j| cfg.sinr_targets[j] > T::zero()).collect();
    if active.is_empty() {
        return Ok(FeasibilityResult {
            delta_star: opts.delta_cap,
            waveform: w,
            combiners: g,
            iterations: 0,
            delta_min_trace: vec![opts.delta_cap],
            probes: 0,
            events: vec![],
        });
    }

    let mut probes = 0usize;
    let mut probe = |delta: T, g: &CombinerSet<T>| -> Result<Option<Waveform<T>>> {
        probes += 1;
        let thresholds = cfg.sinr_targets.iter().map(|&r| r * delta).collect();
        let spec = SocpStepSpec::new(channel, g, thresholds, cfg.noise_var, cfg.tx_power, cfg.psd_limit)?;
        let r = solve_socp_step_with(&spec, solver)?;
        match r.status.status {
            SolveStatus::Optimal => Ok(r.waveform),
            SolveStatus::Infeasible => Ok(None),
            SolveStatus::MaxIter | SolveStatus::NumericalTrouble => Err(Error::NumericalTrouble(format!(
                "feasibility step at delta = {delta} ended with {:?}",
                r.status.status
            ))),
        }
    };

    let mut delta_min = T::zero();
    let mut best = w.clone();
    let mut trace = Vec::new();
    let mut events = Vec::new();
    let mut iterations = 0;
    let tol = opts.bisection_tol;
    let two = T::lit(2.0);
    for outer in 1..=opts.max_outer {
        iterations = outer;
        g = mmse_combiners(&w, channel, cfg.noise_var)?;
        let delta_max = two
            * active
                .iter()
                .map(|&j| single_tone_snr_bound(cfg, channel, j) / cfg.sinr_targets[j])
                .fold(T::zero(), T::max);
        let mut lo = delta_min;
        if lo > T::zero() {
            match probe(lo, &g)? {
                Some(wl) => w = wl,
                None => {
                    events.push(format!(
                        "outer iteration {outer}: carried delta_min = {lo} infeasible with refreshed combiners"
                    ));
                    loop {
                        lo /= two;
                        if lo < tol {
                            lo = T::zero();
                            break;
                        }
                        if let Some(wl) = probe(lo, &g)? {
                            w = wl;
                            break;
                        }
                    }
                }
            }
        }
        let mut hi = delta_max;
        while hi - lo > tol {
            let mid = (lo + hi) / two;
            match probe(mid, &g)? {
                Some(wm) => {
                    lo = mid;
                    w = wm;
                }
                None => hi = mid,
            }
        }
        let gain = lo - delta_min;
        if lo >= delta_min {
            delta_min = lo;
            best = w.clone();
        }
        trace.push(delta_min);
        if delta_min >= T::one() || gain <= tol {
            break;
        }
    }
    if delta_min > T::zero() {
        g = mmse_combiners(&best, channel, cfg.noise_var)?;
    }
    Ok(FeasibilityResult {
        delta_star: delta_min,
        waveform: best,
        combiners: g,
        iterations,
        delta_min_trace: trace,
        probes,
        events,
    })
}
