//! Frequency-selective forward/backward channels and their replay format.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::scalar::{Cplx, Real};

/// One multipath tap of a power delay profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tap {
    pub delay_ns: f64,
    pub power: f64,
}

/// Average tap powers `β_l` (normalized to unit sum) at delays `τ_l`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Tap>", into = "Vec<Tap>")]
pub struct PowerDelayProfile {
    taps: Vec<Tap>,
}

impl PowerDelayProfile {
    pub fn new(taps: Vec<Tap>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::Invalid("power delay profile has no taps".into()));
        }
        if taps
            .iter()
            .any(|t| !(t.power >= 0.0) || !t.delay_ns.is_finite() || !t.power.is_finite())
        {
            return Err(Error::Invalid("tap powers must be finite and nonnegative".into()));
        }
        let total: f64 = taps.iter().map(|t| t.power).sum();
        if !(total > 0.0) {
            return Err(Error::Invalid("power delay profile has zero total power".into()));
        }
        let taps = taps
            .into_iter()
            .map(|t| Tap {
                delay_ns: t.delay_ns,
                power: t.power / total,
            })
            .collect();
        Ok(Self { taps })
    }

    /// Single zero-delay tap: a frequency-flat channel.
    pub fn flat() -> Self {
        Self::new(vec![Tap {
            delay_ns: 0.0,
            power: 1.0,
        }])
        .expect("valid")
    }

    /// Exponentially decaying profile with `count` taps.
    pub fn exponential(count: usize, spacing_ns: f64, decay_ns: f64) -> Result<Self> {
        Self::new(
            (0..count)
                .map(|l| {
                    let d = l as f64 * spacing_ns;
                    Tap {
                        delay_ns: d,
                        power: (-d / decay_ns).exp(),
                    }
                })
                .collect(),
        )
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl Default for PowerDelayProfile {
    /// Six taps, 10 ns apart, 30 ns decay constant.
    fn default() -> Self {
        Self::exponential(6, 10.0, 30.0).expect("valid")
    }
}

impl TryFrom<Vec<Tap>> for PowerDelayProfile {
    type Error = Error;
    fn try_from(t: Vec<Tap>) -> Result<Self> {
        Self::new(t)
    }
}

impl From<PowerDelayProfile> for Vec<Tap> {
    fn from(p: PowerDelayProfile) -> Self {
        p.taps
    }
}

/// Carrier layout and large-scale link budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkBudget {
    pub center_freq_hz: f64,
    pub bandwidth_hz: f64,
    pub eirp_dbm: f64,
    /// One-way path loss, applied to both forward and backward links.
    pub path_loss_db: f64,
    pub tag_gain_dbi: f64,
    pub reader_gain_dbi: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            center_freq_hz: 5.18e9,
            bandwidth_hz: 10e6,
            eirp_dbm: 36.0,
            path_loss_db: 58.0,
            tag_gain_dbi: 2.0,
            reader_gain_dbi: 2.0,
        }
    }
}

impl LinkBudget {
    /// Same carrier layout with unit forward and backward power gains.
    pub fn unit() -> Self {
        Self {
            path_loss_db: 0.0,
            tag_gain_dbi: 0.0,
            reader_gain_dbi: 0.0,
            ..Self::default()
        }
    }

    /// Transmit power implied by the EIRP (W).
    pub fn tx_power_w(&self) -> f64 {
        10f64.powf((self.eirp_dbm - 30.0) / 10.0)
    }

    /// Mean `|h_{j,n}|²` of the transmitter→tag link.
    pub fn forward_gain(&self) -> f64 {
        10f64.powf((self.tag_gain_dbi - self.path_loss_db) / 10.0)
    }

    /// Mean `|h^b_{j,n}|²` of the tag→reader link.
    pub fn backward_gain(&self) -> f64 {
        10f64.powf((self.tag_gain_dbi + self.reader_gain_dbi - self.path_loss_db) / 10.0)
    }

    /// Mean backscatter power gain `E|h h^b|²` for independent links.
    pub fn backscatter_gain(&self) -> f64 {
        self.forward_gain() * self.backward_gain()
    }

    /// Noise variance for a reader SNR `P/σ²` measured on the
    /// unit-mean-gain backscatter channel.
    pub fn noise_var_for_snr_db(&self, tx_power: f64, snr_db: f64) -> f64 {
        tx_power * self.backscatter_gain() / 10f64.powf(snr_db / 10.0)
    }

    /// Tone frequencies `f_c + (n − (N−1)/2)·B/N`.
    pub fn tone_frequencies(&self, n_tones: usize) -> Vec<f64> {
        let df = self.bandwidth_hz / n_tones as f64;
        let mid = (n_tones as f64 - 1.0) / 2.0;
        (0..n_tones)
            .map(|n| self.center_freq_hz + (n as f64 - mid) * df)
            .collect()
    }
}

/// Forward `h_{j,n}` and backward `h^b_{j,n}` responses, both `K×N`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization<T: Real> {
    pub forward: CMatrix<T>,
    pub backward: CMatrix<T>,
}

impl<T: Real> ChannelRealization<T> {
    pub fn new(forward: CMatrix<T>, backward: CMatrix<T>) -> Result<Self> {
        if forward.shape() != backward.shape() {
            return Err(Error::Invalid(format!(
                "forward {:?} and backward {:?} shapes differ",
                forward.shape(),
                backward.shape()
            )));
        }
        if forward.nrows() == 0 || forward.ncols() == 0 {
            return Err(Error::Invalid("empty channel".into()));
        }
        Ok(Self { forward, backward })
    }

    pub fn reciprocal(forward: CMatrix<T>) -> Result<Self> {
        let backward = reciprocal_backward(&forward);
        Self::new(forward, backward)
    }

    pub fn n_tags(&self) -> usize {
        self.forward.nrows()
    }

    pub fn n_tones(&self) -> usize {
        self.forward.ncols()
    }

    pub fn forward_row(&self, j: usize) -> CVector<T> {
        self.forward.row(j).transpose()
    }

    /// `h_{j,n} h^b_{j,n}` as a `K×N` matrix.
    pub fn backscatter(&self) -> CMatrix<T> {
        self.forward.component_mul(&self.backward)
    }

    /// Diagonal of `H_j`.
    pub fn h_diag(&self, j: usize) -> CVector<T> {
        CVector::from_fn(self.n_tones(), |n, _| self.forward[(j, n)] * self.backward[(j, n)])
    }

    /// Diagonal of `H̃_j = diag(Σ_{u≠j} h_{u,n} h^b_{u,n})`.
    pub fn h_tilde_diag(&self, j: usize) -> CVector<T> {
        CVector::from_fn(self.n_tones(), |n, _| {
            (0..self.n_tags())
                .filter(|&u| u != j)
                .fold(Cplx::new(T::zero(), T::zero()), |acc, u| {
                    acc + self.forward[(u, n)] * self.backward[(u, n)]
                })
        })
    }

    /// Channel restricted to the given tags.
    pub fn select_tags(&self, tags: &[usize]) -> Self {
        let f = CMatrix::from_fn(tags.len(), self.n_tones(), |r, c| self.forward[(tags[r], c)]);
        let b = CMatrix::from_fn(tags.len(), self.n_tones(), |r, c| self.backward[(tags[r], c)]);
        Self {
            forward: f,
            backward: b,
        }
    }

    pub fn to_file(&self) -> ChannelFile {
        let rows = |m: &CMatrix<T>| {
            (0..m.nrows())
                .map(|r| {
                    (0..m.ncols())
                        .map(|c| [m[(r, c)].re.as_f64(), m[(r, c)].im.as_f64()])
                        .collect()
                })
                .collect()
        };
        ChannelFile {
            forward: rows(&self.forward),
            backward: rows(&self.backward),
        }
    }

    pub fn from_file(file: &ChannelFile) -> Result<Self> {
        let mat = |rows: &Vec<Vec<[f64; 2]>>| -> Result<CMatrix<T>> {
            let k = rows.len();
            let n = rows.first().map_or(0, |r| r.len());
            if rows.iter().any(|r| r.len() != n) {
                return Err(Error::Invalid("ragged channel matrix".into()));
            }
            Ok(CMatrix::from_fn(k, n, |r, c| {
                Cplx::new(T::lit(rows[r][c][0]), T::lit(rows[r][c][1]))
            }))
        };
        Self::new(mat(&file.forward)?, mat(&file.backward)?)
    }
}

/// JSON replay format: `[re, im]` pairs, row per tag. Values are written
/// with shortest round-trip decimal representation so replays are exact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub forward: Vec<Vec<[f64; 2]>>,
    pub backward: Vec<Vec<[f64; 2]>>,
}

/// Reciprocal links: `h^b = h`.
pub fn reciprocal_backward<T: Real>(forward: &CMatrix<T>) -> CMatrix<T> {
    forward.clone()
}

/// Deterministic RNG for work item `index` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn draw_response<R: Rng + ?Sized>(
    pdp: &PowerDelayProfile,
    freqs: &[f64],
    amplitude: f64,
    rng: &mut R,
) -> Vec<(f64, f64)> {
    let taps: Vec<(f64, f64, f64)> = pdp
        .taps()
        .iter()
        .map(|t| {
            let sd = (t.power / 2.0).sqrt();
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            (re * sd, im * sd, t.delay_ns * 1e-9)
        })
        .collect();
    freqs
        .iter()
        .map(|&f| {
            taps.iter().fold((0.0, 0.0), |(ar, ai), &(re, im, tau)| {
                let (s, c) = (-2.0 * PI * f * tau).sin_cos();
                (ar + amplitude * (re * c - im * s), ai + amplitude * (re * s + im * c))
            })
        })
        .collect()
}

/// Draws independent Rayleigh taps `α_{j,l} ~ CN(0, β_l)` per tag and per
/// direction and evaluates `h_{j,n} = Σ_l α_{j,l} e^{−i2π f_n τ_l}`, scaled
/// by the link budget's mean power gains. With `reciprocal` the backward
/// link equals the forward one.
pub fn draw_realization<T: Real, R: Rng + ?Sized>(
    pdp: &PowerDelayProfile,
    n_tags: usize,
    n_tones: usize,
    budget: &LinkBudget,
    reciprocal: bool,
    rng: &mut R,
) -> Result<ChannelRealization<T>> {
    if n_tags == 0 || n_tones == 0 {
        return Err(Error::Invalid("channel needs at least one tag and tone".into()));
    }
    let freqs = budget.tone_frequencies(n_tones);
    let fwd_amp = budget.forward_gain().sqrt();
    let bwd_amp = budget.backward_gain().sqrt();
    let mut forward = DMatrix::zeros(n_tags, n_tones);
    for j in 0..n_tags {
        for (n, (re, im)) in draw_response(pdp, &freqs, fwd_amp, rng).into_iter().enumerate() {
            forward[(j, n)] = Cplx::new(T::lit(re), T::lit(im));
        }
    }
    if reciprocal {
        return ChannelRealization::reciprocal(forward);
    }
    let mut backward = DMatrix::zeros(n_tags, n_tones);
    for j in 0..n_tags {
        for (n, (re, im)) in draw_response(pdp, &freqs, bwd_amp, rng).into_iter().enumerate() {
            backward[(j, n)] = Cplx::new(T::lit(re), T::lit(im));
        }
    }
    ChannelRealization::new(forward, backward)
}
