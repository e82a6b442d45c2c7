//! Recovery of a rank-one waveform from a relaxed solution `X*`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{stream_rng, ChannelRealization};
use crate::error::{Error, Result};
use crate::linalg::{herm_dim, herm_from_params, herm_functional, hermitian_eigen, trace_real, CMatrix, CVector};
use crate::link::{all_sinrs, mmse_combiners, CombinerSet};
use crate::model::{z_dc_scalar, SystemConfig, Waveform};
use crate::scalar::{polar, Cplx, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExtractionMethod {
    AlreadyRankOne,
    RankReduction,
    Randomization,
}

impl ExtractionMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::AlreadyRankOne => "rank_one",
            Self::RankReduction => "rank_reduction",
            Self::Randomization => "randomization",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionOptions {
    pub draws: usize,
    /// RNG stream index combined with `cfg.rng_seed`.
    pub stream: u64,
}

impl Default for ExtractionOptions {
    fn default() -> Self {
        Self { draws: 1000, stream: 0x5eed }
    }
}

#[derive(Clone, Debug)]
pub struct Extraction<T: Real> {
    pub waveform: Waveform<T>,
    pub combiners: CombinerSet<T>,
    pub method: ExtractionMethod,
}

const RANK_ONE_SHARE: f64 = 1.0 - 1e-6;
/// Relative SINR shortfall tolerated when accepting a rounded waveform.
pub const SINR_SLACK: f64 = 1e-6;

fn meets_targets<T: Real>(sinrs: &[T], cfg: &SystemConfig<T>) -> bool {
    let slack = T::one() - T::lit(SINR_SLACK);
    sinrs
        .iter()
        .zip(&cfg.sinr_targets)
        .all(|(&s, &r)| s >= r * slack)
}

fn principal<T: Real>(x: &CMatrix<T>) -> (T, T, Waveform<T>) {
    let (vals, vecs) = hermitian_eigen(x);
    let top = vals[0].max(T::zero());
    let tr = trace_real(x);
    let w = vecs.column(0).map(|z| z * Cplx::new(top.sqrt(), T::zero()));
    (top, tr, Waveform::new(w))
}

fn finish<T: Real>(
    w: Waveform<T>,
    channel: &ChannelRealization<T>,
    cfg: &SystemConfig<T>,
    method: ExtractionMethod,
) -> Result<Option<Extraction<T>>> {
    let g = mmse_combiners(&w, channel, cfg.noise_var)?;
    let s = all_sinrs(&w, &g, channel, cfg.noise_var)?;
    Ok(meets_targets(&s, cfg).then_some(Extraction {
        waveform: w,
        combiners: g,
        method,
    }))
}

/// Rank-one recovery: principal eigenvector when `X*` is numerically rank
/// one; otherwise rank-reduction purification for `K ≤ 2`; otherwise (or if
/// that fails) Gaussian-style randomization with unit-modulus phases.
pub fn extract_rank_one<T: Real>(
    x: &CMatrix<T>,
    channel: &ChannelRealization<T>,
    cfg: &SystemConfig<T>,
    combiners: &CombinerSet<T>,
    opts: &ExtractionOptions,
) -> Result<Extraction<T>> {
    let (top, tr, w) = principal(x);
    if top >= T::lit(RANK_ONE_SHARE) * tr {
        if let Some(e) = finish(w, channel, cfg, ExtractionMethod::AlreadyRankOne)? {
            return Ok(e);
        }
    }
    if cfg.n_tags <= 2 {
        if let Some(xr) = rank_reduce(x, channel, cfg, combiners) {
            let (top, tr, w) = principal(&xr);
            if top >= T::lit(RANK_ONE_SHARE) * tr {
                if let Some(e) = finish(w, channel, cfg, ExtractionMethod::RankReduction)? {
                    return Ok(e);
                }
            }
        }
    }
    if let Some(e) = randomize(x, channel, cfg, opts.draws, opts.stream)? {
        return Ok(e);
    }
    if let Some(e) = randomize(x, channel, cfg, 10 * opts.draws, opts.stream + 1)? {
        return Ok(e);
    }
    Err(Error::Extraction(format!(
        "no feasible candidate among {} + {} randomization draws (rank share {})",
        opts.draws,
        10 * opts.draws,
        top / tr
    )))
}

/// Constraint functionals kept fixed during purification.
fn constraint_matrices<T: Real>(
    channel: &ChannelRealization<T>,
    cfg: &SystemConfig<T>,
    combiners: &CombinerSet<T>,
) -> Vec<CMatrix<T>> {
    let n = cfg.n_tones;
    let mut out = Vec::new();
    for j in 0..cfg.n_tags {
        let rho = cfg.sinr_targets[j];
        if !(rho > T::zero()) {
            continue;
        }
        let g = combiners.get(j);
        let a = channel.h_diag(j).map(|z| z.conj()).component_mul(g);
        let b = channel.h_tilde_diag(j).map(|z| z.conj()).component_mul(g);
        out.push(&a * a.adjoint() - &b * b.adjoint() * Cplx::new(rho, T::zero()));
    }
    out.push(CMatrix::identity(n, n));
    if cfg.psd_limit.is_some() {
        for i in 0..n {
            let mut e = CMatrix::zeros(n, n);
            e[(i, i)] = Cplx::new(T::one(), T::zero());
            out.push(e);
        }
    }
    out
}

/// Purification `X ← V (I − Δ/δ) Vᴴ` with `Tr(Vᴴ B_i V Δ) = 0` for every
/// constraint matrix, repeated while the rank exceeds what the number of
/// constraints allows.
fn rank_reduce<T: Real>(
    x: &CMatrix<T>,
    channel: &ChannelRealization<T>,
    cfg: &SystemConfig<T>,
    combiners: &CombinerSet<T>,
) -> Option<CMatrix<T>> {
    let bs = constraint_matrices(channel, cfg, combiners);
    let m = bs.len();
    let mut x = x.clone();
    for _ in 0..cfg.n_tones {
        let (vals, vecs) = hermitian_eigen(&x);
        let floor = vals[0] * T::lit(1e-9);
        let r = vals.iter().take_while(|&&v| v > floor).count();
        if r <= 1 || r * r <= m {
            return Some(x);
        }
        let v = CMatrix::from_fn(x.nrows(), r, |i, c| vecs[(i, c)] * Cplx::new(vals[c].sqrt(), T::zero()));
        let rows: Vec<Vec<T>> = bs
            .iter()
            .map(|b| {
                let row = herm_functional(&(v.adjoint() * b * &v));
                let norm = row.iter().fold(T::zero(), |a, &c| a + c * c).sqrt();
                if norm > T::zero() {
                    row.into_iter().map(|c| c / norm).collect()
                } else {
                    row
                }
            })
            .collect();
        let d = herm_dim(r);
        let gram = nalgebra::DMatrix::from_fn(d, d, |p, q| {
            rows.iter().fold(T::zero(), |acc, row| acc + row[p] * row[q])
        });
        let eig = gram.symmetric_eigen();
        let (idx, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .fold((0, T::max_value().expect("bounded")), |(bi, bv), (i, &val)| {
                if val < bv {
                    (i, val)
                } else {
                    (bi, bv)
                }
            });
        let params: Vec<T> = eig.eigenvectors.column(idx).iter().copied().collect();
        let delta = herm_from_params(r, &params);
        let (dv, _) = hermitian_eigen(&delta);
        let lead = if dv[0].abs() >= dv[r - 1].abs() { dv[0] } else { dv[r - 1] };
        if lead == T::zero() {
            return None;
        }
        let mut inner = CMatrix::identity(r, r) - delta * Cplx::new(T::one() / lead, T::zero());
        inner = (&inner + inner.adjoint()) * Cplx::new(T::lit(0.5), T::zero());
        x = &v * inner * v.adjoint();
        x = (&x + x.adjoint()) * Cplx::new(T::lit(0.5), T::zero());
    }
    Some(x)
}

/// Largest scaling of `w` allowed by the power budget and per-tone caps.
pub fn max_feasible_scale<T: Real>(w: &Waveform<T>, cfg: &SystemConfig<T>) -> T {
    let p = w.power();
    if !(p > T::zero()) {
        return T::zero();
    }
    let mut a = (cfg.tx_power / p).sqrt();
    if let Some(cap) = cfg.psd_limit {
        for z in w.weights.iter() {
            let e = z.norm_sqr() * T::lit(0.5);
            if e > T::zero() {
                a = a.min((cap / e).sqrt());
            }
        }
    }
    a
}

/// Candidates `w_t = U Σ^{1/2} v_t` with unit-modulus uniform-phase `v_t`,
/// each rescaled to the largest admissible power (SINR is nondecreasing in a
/// common scaling of `w` under MMSE combining), keeping the feasible
/// candidate with the largest `Z_DC`.
fn randomize<T: Real>(
    x: &CMatrix<T>,
    channel: &ChannelRealization<T>,
    cfg: &SystemConfig<T>,
    draws: usize,
    stream: u64,
) -> Result<Option<Extraction<T>>> {
    let n = x.nrows();
    let (vals, vecs) = hermitian_eigen(x);
    let floor = vals[0] * T::lit(1e-12);
    let r = vals.iter().take_while(|&&v| v > floor).count().max(1);
    let factor = CMatrix::from_fn(n, r, |i, c| vecs[(i, c)] * Cplx::new(vals[c].max(T::zero()).sqrt(), T::zero()));
    let mut rng = stream_rng(cfg.rng_seed, stream);
    let two_pi = T::lit(std::f64::consts::TAU);
    let mut best: Option<(T, Extraction<T>)> = None;
    for _ in 0..draws {
        let v = CVector::from_fn(r, |_, _| polar(T::one(), T::lit(rng.random::<f64>()) * two_pi));
        let w = Waveform::new(&factor * v);
        let w = w.scaled(max_feasible_scale(&w, cfg));
        if !(w.power() > T::zero()) {
            continue;
        }
        let g = mmse_combiners(&w, channel, cfg.noise_var)?;
        let s = all_sinrs(&w, &g, channel, cfg.noise_var)?;
        if !meets_targets(&s, cfg) {
            continue;
        }
        let z = z_dc_scalar(&w, channel, cfg)?.total;
        if best.as_ref().is_none_or(|(bz, _)| z > *bz) {
            best = Some((
                z,
                Extraction {
                    waveform: w,
                    combiners: g,
                    method: ExtractionMethod::Randomization,
                },
            ));
        }
    }
    Ok(best.map(|(_, e)| e))
}
