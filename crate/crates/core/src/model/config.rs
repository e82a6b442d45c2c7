use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Diode and antenna parameters of the rectenna, with the 2nd and 4th order
/// Taylor coefficients cached alongside the primaries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "RectennaPrimaries<T>",
    into = "RectennaPrimaries<T>",
    bound = "T: Real"
)]
pub struct RectennaParams<T: Real> {
    /// Reverse saturation current (A).
    pub i_s: T,
    pub n_ideality: T,
    /// Thermal voltage (V).
    pub v_t: T,
    /// Antenna resistance (Ω).
    pub r_ant: T,
    k2: T,
    k4: T,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
struct RectennaPrimaries<T: Real> {
    i_s: T,
    n_ideality: T,
    v_t: T,
    r_ant: T,
}

impl<T: Real> TryFrom<RectennaPrimaries<T>> for RectennaParams<T> {
    type Error = Error;

    fn try_from(p: RectennaPrimaries<T>) -> Result<Self> {
        RectennaParams::new(p.i_s, p.n_ideality, p.v_t, p.r_ant)
    }
}

impl<T: Real> From<RectennaParams<T>> for RectennaPrimaries<T> {
    fn from(p: RectennaParams<T>) -> Self {
        RectennaPrimaries {
            i_s: p.i_s,
            n_ideality: p.n_ideality,
            v_t: p.v_t,
            r_ant: p.r_ant,
        }
    }
}

/// `k_u = i_s / (u! (n v_t)^u)` for `u ∈ {2, 4}`.
pub fn derive_taylor_coeffs<T: Real>(i_s: T, n_ideality: T, v_t: T) -> Result<(T, T)> {
    for (name, v) in [("i_s", i_s), ("n_ideality", n_ideality), ("v_t", v_t)] {
        if !(v > T::zero()) || !v.is_finite() {
            return Err(Error::Domain(format!("{name} must be positive, got {v}")));
        }
    }
    let nvt = n_ideality * v_t;
    let nvt2 = nvt * nvt;
    let k2 = i_s / (T::lit(2.0) * nvt2);
    let k4 = i_s / (T::lit(24.0) * nvt2 * nvt2);
    Ok((k2, k4))
}

impl<T: Real> RectennaParams<T> {
    pub fn new(i_s: T, n_ideality: T, v_t: T, r_ant: T) -> Result<Self> {
        let (k2, k4) = derive_taylor_coeffs(i_s, n_ideality, v_t)?;
        if !(r_ant > T::zero()) {
            return Err(Error::Domain(format!("r_ant must be positive, got {r_ant}")));
        }
        Ok(Self {
            i_s,
            n_ideality,
            v_t,
            r_ant,
            k2,
            k4,
        })
    }

    pub fn k2(&self) -> T {
        self.k2
    }

    pub fn k4(&self) -> T {
        self.k4
    }

    /// `β₂ = k₂ R_ant`.
    pub fn beta2(&self) -> T {
        self.k2 * self.r_ant
    }

    /// `β₄ = k₄ R_ant²`.
    pub fn beta4(&self) -> T {
        self.k4 * self.r_ant * self.r_ant
    }
}

impl<T: Real> Default for RectennaParams<T> {
    /// 5 µA saturation current, ideality 1.05, 25.86 mV thermal voltage, 50 Ω.
    fn default() -> Self {
        Self::new(T::lit(5e-6), T::lit(1.05), T::lit(0.02586), T::lit(50.0))
            .expect("default rectenna parameters are positive")
    }
}

/// Energy-harvester model used in the design objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EhModel {
    /// 2nd and 4th order Taylor terms.
    Nonlinear4th,
    /// 2nd order term only.
    Linear2nd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct SystemConfig<T: Real> {
    /// Number of tones `N`.
    pub n_tones: usize,
    /// Number of tags `K`.
    pub n_tags: usize,
    /// Average transmit power `P` (W); the waveform satisfies `‖w‖² ≤ 2P`.
    pub tx_power: T,
    /// Per-tone noise variance at the reader (W).
    pub noise_var: T,
    /// Linear-scale SINR targets, one per tag.
    pub sinr_targets: Vec<T>,
    /// Harvested-energy weights `c_j`, one per tag.
    pub tag_weights: Vec<T>,
    pub rectenna: RectennaParams<T>,
    pub eh_model: EhModel,
    /// Optional per-tone power cap: `|w_n|²/2 ≤ psd_limit`.
    #[serde(default)]
    pub psd_limit: Option<T>,
    /// Relative stopping tolerance of the SCA loops.
    pub tolerance: T,
    pub rng_seed: u64,
}

impl<T: Real> SystemConfig<T> {
    /// Uniform targets and unit weights.
    pub fn uniform(n_tones: usize, n_tags: usize, tx_power: T, noise_var: T, target: T) -> Self {
        Self {
            n_tones,
            n_tags,
            tx_power,
            noise_var,
            sinr_targets: vec![target; n_tags],
            tag_weights: vec![T::one(); n_tags],
            rectenna: RectennaParams::default(),
            eh_model: EhModel::Nonlinear4th,
            psd_limit: None,
            tolerance: T::lit(1e-7),
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_tags < 1 {
            return Err(Error::Invalid("at least one tag required".into()));
        }
        if self.n_tones < self.n_tags {
            return Err(Error::Invalid(format!(
                "n_tones ({}) must be at least n_tags ({})",
                self.n_tones, self.n_tags
            )));
        }
        if !(self.tx_power > T::zero()) {
            return Err(Error::Invalid("tx_power must be positive".into()));
        }
        if !(self.noise_var > T::zero()) {
            return Err(Error::Invalid("noise_var must be positive".into()));
        }
        if self.sinr_targets.len() != self.n_tags || self.tag_weights.len() != self.n_tags {
            return Err(Error::Invalid(format!(
                "expected {} SINR targets and weights, got {} and {}",
                self.n_tags,
                self.sinr_targets.len(),
                self.tag_weights.len()
            )));
        }
        if self.sinr_targets.iter().any(|r| !(*r >= T::zero()) || !r.is_finite()) {
            return Err(Error::Invalid("SINR targets must be finite and nonnegative".into()));
        }
        if self.tag_weights.iter().any(|c| !(*c >= T::zero())) {
            return Err(Error::Invalid("tag weights must be nonnegative".into()));
        }
        if let Some(cap) = self.psd_limit {
            if !(cap > T::zero()) {
                return Err(Error::Invalid("psd_limit must be positive".into()));
            }
        }
        if !(self.tolerance > T::zero()) {
            return Err(Error::Invalid("tolerance must be positive".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_targets(&self, target: T) -> Self {
        let mut c = self.clone();
        c.sinr_targets = vec![target; self.n_tags];
        c
    }

    pub fn with_model(&self, model: EhModel) -> Self {
        let mut c = self.clone();
        c.eh_model = model;
        c
    }
}

/// `10^(dB/10)`.
pub fn db_to_linear<T: Real>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}

pub fn linear_to_db<T: Real>(lin: T) -> T {
    T::lit(10.0) * lin.log10()
}
