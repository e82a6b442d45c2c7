//! Solver-independent feasibility check of a waveform and combiner set,
//! evaluated tone by tone from the channel coefficients.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::link::CombinerSet;
use crate::model::{SystemConfig, Waveform};
use crate::scalar::{Cplx, Real};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub power: f64,
    pub max_tone_power: f64,
    pub sinrs: Vec<f64>,
    pub violations: Vec<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `‖w‖²/2 ≤ P(1 + tol)`, `|w_n|²/2 ≤ P̄_s(1 + tol)` and
/// `ρ_j ≥ ρ̄_j(1 − tol)`, all in `f64`.
pub fn check_solution<T: Real>(
    cfg: &SystemConfig<T>,
    channel: &ChannelRealization<T>,
    w: &Waveform<T>,
    combiners: &CombinerSet<T>,
    tol: f64,
) -> CheckReport {
    let c64 = |z: Cplx<T>| (z.re.as_f64(), z.im.as_f64());
    let mul = |a: (f64, f64), b: (f64, f64)| (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0);
    let k = channel.n_tags();
    let n = channel.n_tones();
    let x: Vec<(f64, f64)> = w.weights.iter().map(|&z| c64(z)).collect();
    let power: f64 = x.iter().map(|v| v.0 * v.0 + v.1 * v.1).sum::<f64>() / 2.0;
    let max_tone_power = x.iter().map(|v| (v.0 * v.0 + v.1 * v.1) / 2.0).fold(0.0, f64::max);
    let mut violations = Vec::new();
    let p = cfg.tx_power.as_f64();
    if power > p * (1.0 + tol) {
        violations.push(format!("power {power} exceeds budget {p}"));
    }
    if let Some(cap) = cfg.psd_limit {
        let cap = cap.as_f64();
        if max_tone_power > cap * (1.0 + tol) {
            violations.push(format!("tone power {max_tone_power} exceeds cap {cap}"));
        }
    }
    let sigma2 = cfg.noise_var.as_f64();
    let mut sinrs = Vec::with_capacity(k);
    for j in 0..k {
        let g = combiners.get(j);
        // z_n for tag u: h_{u,n} h^b_{u,n} x_n, combined with conj(g_n)
        let mut own = (0.0, 0.0);
        let mut other = (0.0, 0.0);
        let mut gn = 0.0;
        for t in 0..n {
            let gc = c64(g[t]);
            let gc = (gc.0, -gc.1);
            gn += gc.0 * gc.0 + gc.1 * gc.1;
            for u in 0..k {
                let hb = mul(c64(channel.forward[(u, t)]), c64(channel.backward[(u, t)]));
                let term = mul(gc, mul(hb, x[t]));
                if u == j {
                    own = (own.0 + term.0, own.1 + term.1);
                } else {
                    other = (other.0 + term.0, other.1 + term.1);
                }
            }
        }
        let num = own.0 * own.0 + own.1 * own.1;
        let den = sigma2 * gn + other.0 * other.0 + other.1 * other.1;
        let s = num / den;
        let target = cfg.sinr_targets[j].as_f64();
        if s < target * (1.0 - tol) {
            violations.push(format!("tag {}: SINR {s} below target {target}", j + 1));
        }
        sinrs.push(s);
    }
    CheckReport {
        power,
        max_tone_power,
        sinrs,
        violations,
    }
}
