//! Successive convex approximation of the harvested-DC maximization
//! (Algorithms 2 and 3), on the lifted variable `X = w wᴴ`.

use serde::{Deserialize, Serialize};

use super::rank_one::{extract_rank_one, ExtractionMethod, ExtractionOptions};
use super::{DesignChannel, FeasibilityResult};
use crate::channel::ChannelRealization;
use crate::conic::{solve_sdp_step_with, ConicSolver, InteriorPoint, SdpStepSpec, SolveStatus};
use crate::error::{check_len, Error, Result};
use crate::linalg::{CMatrix, trace_real};
use crate::link::{all_sinrs, eigen_combiners, CombinerSet};
use crate::model::{z_dc_matrix, z_dc_scalar, EhModel, HarvestReport, MDiagonalSet, SystemConfig, Waveform};
use crate::scalar::{Cplx, Real};

fn a0_diag<T: Real>(k: usize, beta4: T) -> T {
    if k == 0 {
        -T::lit(0.375) * beta4
    } else {
        -T::lit(0.75) * beta4
    }
}

/// `q(t) = tᴴ A₀ t` with `A₀ = diag(−3β₄/8, −3β₄/4, …)`.
pub fn sca_quadratic<T: Real>(t: &[Cplx<T>], beta4: T) -> T {
    t.iter()
        .enumerate()
        .fold(T::zero(), |acc, (k, v)| acc + a0_diag(k, beta4) * v.norm_sqr())
}

/// Tangent majorant `q̃(t, t') = 2 Re{t'ᴴ A₀ t} − t'ᴴ A₀ t'` of the concave
/// quadratic [`sca_quadratic`].
pub fn sca_linearize<T: Real>(t_prev: &[Cplx<T>], t: &[Cplx<T>], beta4: T) -> T {
    assert_eq!(t_prev.len(), t.len(), "t-vectors must have equal length");
    let cross = t_prev
        .iter()
        .zip(t)
        .enumerate()
        .fold(T::zero(), |acc, (k, (p, v))| acc + a0_diag(k, beta4) * (p.conj() * v).re);
    T::lit(2.0) * cross - sca_quadratic(t_prev, beta4)
}

/// Hermitian `A` and offset with `Tr(A X) + offset = Σ_j c_j(−β₂/2 t_{j,0} + q̃_j)`
/// (nonlinear model) or `Σ_j c_j(−β₂/2 t_{j,0})` (linear model).
pub fn sca_objective<T: Real>(
    mset: &MDiagonalSet<T>,
    t_prev: &[Vec<Cplx<T>>],
    cfg: &SystemConfig<T>,
) -> (CMatrix<T>, T) {
    let n = mset.n_tones();
    let b2 = cfg.rectenna.beta2();
    let b4 = cfg.rectenna.beta4();
    let mut c = CMatrix::zeros(n, n);
    let mut offset = T::zero();
    for j in 0..mset.n_tags() {
        let cj = cfg.tag_weights[j];
        if cj == T::zero() {
            continue;
        }
        // C_j such that Re Tr(2 C_j X) is the tag's linearized objective
        let mut coeff0 = -b2 / T::lit(4.0);
        if cfg.eh_model == EhModel::Nonlinear4th {
            let tp = &t_prev[j];
            coeff0 += a0_diag(0, b4) * tp[0].re;
            for (k, tk) in tp.iter().enumerate().skip(1) {
                let f = tk.conj() * Cplx::new(a0_diag(k, b4) * cj, T::zero());
                for (i, m) in mset.diagonal(j, k).iter().enumerate() {
                    c[(i, i + k)] += m * f;
                }
            }
            offset -= cj * sca_quadratic(tp, b4);
        }
        for (i, m) in mset.diagonal(j, 0).iter().enumerate() {
            c[(i, i)] += m * Cplx::new(coeff0 * cj, T::zero());
        }
    }
    (&c + c.adjoint(), offset)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CombinerRefresh {
    /// Algorithm 2: eigen-combiners recomputed before every SDP.
    EveryIteration,
    /// Algorithm 3: eigen-combiners computed once from `X⁰`.
    Once,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ScaOptions<T: Real> {
    pub refresh: CombinerRefresh,
    pub design: DesignChannel,
    pub max_iter: usize,
    /// Overrides `cfg.tolerance` when set.
    pub tolerance: Option<T>,
    pub extraction: ExtractionOptions,
}

impl<T: Real> ScaOptions<T> {
    pub fn algorithm2() -> Self {
        Self {
            refresh: CombinerRefresh::EveryIteration,
            design: DesignChannel::Forward,
            max_iter: 100,
            tolerance: None,
            extraction: ExtractionOptions::default(),
        }
    }

    pub fn algorithm3() -> Self {
        Self {
            refresh: CombinerRefresh::Once,
            ..Self::algorithm2()
        }
    }

    pub fn with_design(mut self, design: DesignChannel) -> Self {
        self.design = design;
        self
    }
}

/// Iterate of the SCA loop.
#[derive(Clone, Debug)]
pub struct ScaState<T: Real> {
    pub x: CMatrix<T>,
    pub t: Vec<Vec<Cplx<T>>>,
    pub gamma: T,
    pub combiners: CombinerSet<T>,
    pub iteration: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct IterationRecord<T: Real> {
    pub iteration: usize,
    /// Optimal value of the linearized step.
    pub gamma: T,
    /// Design-metric `Z_DC` at the new iterate.
    pub z_dc: T,
    pub trace: T,
    /// Smallest `Tr(G_j X) − ρ̄_j(σ² + Tr(G̃_j X))` over tags, scaled by `1/σ²`.
    pub min_sinr_slack: T,
    pub solver_iterations: usize,
    pub used_warm_start: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct WaveformSolution<T: Real> {
    pub waveform: Waveform<T>,
    pub combiners: CombinerSet<T>,
    pub sinrs: Vec<T>,
    /// Harvested DC of the rounded waveform under `cfg.eh_model` and the
    /// forward channel.
    pub harvest: HarvestReport<T>,
    /// `−γ` of the last linearized step.
    pub relaxed_objective: T,
    /// Design-metric `Z_DC` of the relaxed `X`.
    pub relaxed_z_dc: T,
    pub rounded_objective: T,
    pub method: ExtractionMethod,
    pub iterations: usize,
    pub trace: Vec<IterationRecord<T>>,
}

impl<T: Real> WaveformSolution<T> {
    pub fn trace_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.trace)?)
    }
}

pub fn algorithm2_optimize<T: Real>(
    cfg: &SystemConfig<T>,
    channel: &ChannelRealization<T>,
    warm: &FeasibilityResult<T>,
) -> Result<WaveformSolution<T>> {
    optimize_with(cfg, channel, warm, &ScaOptions::algorithm2(), &InteriorPoint::default())
}

pub fn algorithm3_simplified<T: Real>(
    cfg: &SystemConfig<T>,
    channel: &ChannelRealization<T>,
    warm: &FeasibilityResult<T>,
) -> Result<WaveformSolution<T>> {
    optimize_with(cfg, channel, warm, &ScaOptions::algorithm3(), &InteriorPoint::default())
}

pub fn design_m_diagonals<T: Real>(channel: &ChannelRealization<T>, design: DesignChannel) -> MDiagonalSet<T> {
    match design {
        DesignChannel::Forward => MDiagonalSet::from_gains(&channel.forward),
        DesignChannel::BackscatterOnly => MDiagonalSet::from_gains(&channel.backscatter()),
    }
}

fn min_slack<T: Real>(spec: &SdpStepSpec<T>, x: &CMatrix<T>) -> T {
    spec.sinr
        .iter()
        .map(|c| c.slack(x, spec.noise_var) / spec.noise_var)
        .fold(T::max_value().expect("bounded"), T::min)
}

pub fn optimize_with<T: Real>(
    cfg: &SystemConfig<T>,
    channel: &ChannelRealization<T>,
    warm: &FeasibilityResult<T>,
    opts: &ScaOptions<T>,
    solver: &dyn ConicSolver<T>,
) -> Result<WaveformSolution<T>> {
    cfg.validate()?;
    check_len(cfg.n_tags, channel.n_tags())?;
    check_len(cfg.n_tones, channel.n_tones())?;
    if !warm.is_feasible() {
        return Err(Error::Invalid(format!(
            "SINR targets infeasible (delta* = {})",
            warm.delta_star
        )));
    }
    let tol = opts.tolerance.unwrap_or(cfg.tolerance);
    let mset = design_m_diagonals(channel, opts.design);
    let x0 = warm.waveform.outer();
    let t0: Vec<_> = (0..cfg.n_tags).map(|j| mset.t_vector(j, &x0)).collect();
    let z0 = z_dc_matrix(&x0, &mset, cfg)?.total;
    let mut state = ScaState {
        x: x0,
        t: t0,
        gamma: -z0,
        combiners: eigen_combiners(&warm.waveform.outer(), channel, cfg.noise_var)?,
        iteration: 0,
    };
    let mut trace: Vec<IterationRecord<T>> = Vec::new();
    let single_pass = cfg.eh_model == EhModel::Linear2nd;
    let max_iter = if single_pass { 1 } else { opts.max_iter };

    for l in 1..=max_iter {
        if opts.refresh == CombinerRefresh::EveryIteration && l > 1 {
            state.combiners = eigen_combiners(&state.x, channel, cfg.noise_var)?;
        }
        let (a, offset) = sca_objective(&mset, &state.t, cfg);
        let spec = SdpStepSpec::new(
            a,
            offset,
            channel,
            &state.combiners,
            &cfg.sinr_targets,
            cfg.noise_var,
            cfg.tx_power,
            cfg.psd_limit,
            mset.clone(),
        )?
        .with_warm_start(state.x.clone());
        let step = solve_sdp_step_with(&spec, solver)?;
        if step.status.status != SolveStatus::Optimal {
            let trace_json = serde_json::to_string(&trace)?;
            return Err(Error::NumericalTrouble(format!(
                "SDP step {l} ended with {:?}; trace: {trace_json}",
                step.status.status
            )));
        }
        let prev_gamma = state.gamma;
        let z = z_dc_matrix(&step.x, &mset, cfg)?.total;
        trace.push(IterationRecord {
            iteration: l,
            gamma: step.gamma,
            z_dc: z,
            trace: trace_real(&step.x),
            min_sinr_slack: min_slack(&spec, &step.x),
            solver_iterations: step.status.iterations,
            used_warm_start: step.used_warm_start,
        });
        state = ScaState {
            x: step.x,
            t: step.t,
            gamma: step.gamma,
            combiners: state.combiners,
            iteration: l,
        };
        let change = (state.gamma - prev_gamma).abs();
        if change <= tol * state.gamma.abs() {
            break;
        }
    }

    let relaxed_z_dc = z_dc_matrix(&state.x, &mset, cfg)?.total;
    let ext = extract_rank_one(&state.x, channel, cfg, &state.combiners, &opts.extraction)?;
    let harvest = z_dc_scalar(&ext.waveform, channel, cfg)?;
    let rounded_objective = match opts.design {
        DesignChannel::Forward => harvest.total,
        DesignChannel::BackscatterOnly => z_dc_matrix(&ext.waveform.outer(), &mset, cfg)?.total,
    };
    let sinrs = all_sinrs(&ext.waveform, &ext.combiners, channel, cfg.noise_var)?;
    Ok(WaveformSolution {
        waveform: ext.waveform,
        combiners: ext.combiners,
        sinrs,
        harvest,
        relaxed_objective: -state.gamma,
        relaxed_z_dc,
        rounded_objective,
        method: ext.method,
        iterations: state.iteration,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{algorithm1_feasibility, check_solution};
    use crate::algorithms::fixtures::{instance, instance_with};
    use crate::channel::{stream_rng, PowerDelayProfile};
    use rand::Rng;

    fn random_t(rng: &mut impl Rng, n: usize) -> Vec<Cplx<f64>> {
        (0..n)
            .map(|k| {
                let re = rng.random::<f64>() * 4.0 - 2.0;
                if k == 0 {
                    Cplx::new(re.abs(), 0.0)
                } else {
                    Cplx::new(re, rng.random::<f64>() * 4.0 - 2.0)
                }
            })
            .collect()
    }

    #[test]
    fn linearization_is_a_tangent_majorant() {
        let mut rng = stream_rng(9, 1);
        let b4 = 0.38 * 2500.0;
        for _ in 0..200 {
            let tp = random_t(&mut rng, 8);
            let t = random_t(&mut rng, 8);
            assert_eq!(sca_linearize(&tp, &tp, b4), sca_quadratic(&tp, b4));
            let q = sca_quadratic(&t, b4);
            assert!(q <= sca_linearize(&tp, &t, b4) + 1e-12 * q.abs());
            assert_eq!(sca_linearize(&vec![Cplx::new(0.0, 0.0); 8], &t, b4), 0.0);
        }
    }

    #[test]
    fn surrogate_touches_objective_at_expansion_point() {
        let (cfg, ch) = instance(6, 2, 0.0, 4);
        let mset = design_m_diagonals(&ch, DesignChannel::Forward);
        let mut rng = stream_rng(2, 2);
        let w = Waveform::from_polar(
            &(0..6).map(|_| rng.random::<f64>()).collect::<Vec<_>>(),
            &(0..6).map(|_| rng.random::<f64>() * 6.0).collect::<Vec<_>>(),
        );
        let x = w.outer();
        let t: Vec<_> = (0..2).map(|j| mset.t_vector(j, &x)).collect();
        let z = z_dc_matrix(&x, &mset, &cfg).unwrap().total;
        let (a, offset) = sca_objective(&mset, &t, &cfg);
        let surrogate = (a.clone() * &x).trace().re + offset;
        assert!((surrogate + z).abs() <= 1e-12 * z.abs(), "{surrogate} vs {}", -z);

        let w2 = w.rotated(0.3).scaled(1.3);
        let x2 = w2.outer();
        let z2 = z_dc_matrix(&x2, &mset, &cfg).unwrap().total;
        let s2 = (a * &x2).trace().re + offset;
        assert!(s2 >= -z2 - 1e-12 * z2.abs());

        let lin = cfg.with_model(EhModel::Linear2nd);
        let (a, offset) = sca_objective(&mset, &t, &lin);
        assert_eq!(offset, 0.0);
        let z = z_dc_matrix(&x, &mset, &lin).unwrap().total;
        assert!(((a * &x).trace().re + z).abs() <= 1e-12 * z);
    }

    fn assert_monotone(sol: &WaveformSolution<f64>) {
        for w in sol.trace.windows(2) {
            assert!(w[1].gamma <= w[0].gamma + 1e-9 * w[0].gamma.abs(), "{} -> {}", w[0].gamma, w[1].gamma);
        }
    }

    #[test]
    fn gamma_trace_is_non_increasing() {
        let (cfg, ch) = instance(8, 3, 3.0, 7);
        let warm = algorithm1_feasibility(&cfg, &ch).unwrap();
        assert!(warm.is_feasible());
        for sol in [
            algorithm2_optimize(&cfg, &ch, &warm).unwrap(),
            algorithm3_simplified(&cfg, &ch, &warm).unwrap(),
        ] {
            assert!(!sol.trace.is_empty());
            assert_monotone(&sol);
            assert!(check_solution(&cfg, &ch, &sol.waveform, &sol.combiners, 1e-6).passed());
            assert!(sol.trace_json().unwrap().starts_with('['));
        }
    }

    #[test]
    fn pure_power_design_beats_matched_uniform_waveform() {
        let (cfg, ch) = instance(8, 1, 0.0, 3);
        let cfg = cfg.with_targets(0.0);
        let warm = algorithm1_feasibility(&cfg, &ch).unwrap();
        let sol = algorithm2_optimize(&cfg, &ch, &warm).unwrap();
        let h = ch.forward_row(0);
        let amp = (2.0 * cfg.tx_power / 8.0).sqrt();
        let phases: Vec<f64> = h.iter().map(|z| -z.im.atan2(z.re)).collect();
        let base = Waveform::from_polar(&[amp; 8], &phases);
        let zb = z_dc_scalar(&base, &ch, &cfg).unwrap().total;
        assert!(sol.harvest.total >= zb, "{} < {zb}", sol.harvest.total);
    }

    #[test]
    fn boundary_targets_are_met_tightly() {
        let (cfg, ch) = instance(4, 2, 6.0, 21);
        let warm = algorithm1_feasibility(&cfg, &ch).unwrap();
        let scaled = SystemConfig {
            sinr_targets: cfg.sinr_targets.iter().map(|r| r * warm.delta_star).collect(),
            ..cfg.clone()
        };
        let warm = algorithm1_feasibility(&scaled, &ch).unwrap();
        assert!(warm.is_feasible());
        let sol = algorithm2_optimize(&scaled, &ch, &warm).unwrap();
        assert_monotone(&sol);
        let tight = sol
            .sinrs
            .iter()
            .zip(&scaled.sinr_targets)
            .map(|(s, r)| (s - r) / r)
            .fold(f64::INFINITY, f64::min);
        assert!(tight >= -1e-6 && tight <= 1e-4, "{tight}");
    }

    #[test]
    fn fixed_combiners_suffice_on_flat_single_tag_channel() {
        let (cfg, ch) = instance_with(4, 1, 0.0, 8, &PowerDelayProfile::flat());
        let warm = algorithm1_feasibility(&cfg, &ch).unwrap();
        let a2 = algorithm2_optimize(&cfg, &ch, &warm).unwrap();
        let a3 = algorithm3_simplified(&cfg, &ch, &warm).unwrap();
        assert!((a3.harvest.total - a2.harvest.total).abs() <= 0.01 * a2.harvest.total);
    }

    #[test]
    fn linear_model_runs_a_single_pass() {
        let (cfg, ch) = instance(8, 2, 0.0, 2);
        let cfg = cfg.with_model(EhModel::Linear2nd);
        let warm = algorithm1_feasibility(&cfg, &ch).unwrap();
        let sol = algorithm2_optimize(&cfg, &ch, &warm).unwrap();
        assert_eq!(sol.trace.len(), 1);
        assert!(sol.rounded_objective <= sol.relaxed_objective * (1.0 + 1e-6));
    }

    #[test]
    fn infeasible_warm_start_is_rejected() {
        let (cfg, ch) = instance(4, 1, 0.0, 1);
        let bound = crate::algorithms::single_tone_snr_bound(&cfg, &ch, 0);
        let cfg = cfg.with_targets(2.0 * bound);
        let warm = algorithm1_feasibility(&cfg, &ch).unwrap();
        assert!(matches!(algorithm2_optimize(&cfg, &ch, &warm), Err(Error::Invalid(_))));
    }
}
