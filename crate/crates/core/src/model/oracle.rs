//! Time-domain reference for the 2nd and 4th moments of the received
//! multisine, computed by sampling one period of the waveform.

use std::f64::consts::PI;

use crate::error::{check_len, Error, Result};
use crate::linalg::CVector;
use crate::model::waveform::Waveform;
use crate::scalar::Real;

/// Mean of `y(t)^moment` over one period, where tone `n` sits at
/// `(n + 4N)·Δf` and `y(t) = Σ s_n A_n cos(2π f_n t + ψ_n)`. The offset keeps
/// every sum-frequency term of the 4th power away from DC, and the sample
/// count `64·moment·5N` exceeds the Nyquist rate of `y⁴`, so the uniform
/// average is exact up to rounding. Computed in `f64` regardless of `T`.
pub fn time_domain_oracle<T: Real>(w: &Waveform<T>, gains: &CVector<T>, moment: u32) -> Result<f64> {
    check_len(w.len(), gains.len())?;
    if moment != 2 && moment != 4 {
        return Err(Error::Invalid(format!("moment must be 2 or 4, got {moment}")));
    }
    let n = w.len();
    if n == 0 {
        return Ok(0.0);
    }
    let amps: Vec<(f64, f64, f64)> = w
        .weights
        .iter()
        .zip(gains.iter())
        .enumerate()
        .map(|(i, (x, h))| {
            let a = x * h;
            ((i + 4 * n) as f64, a.re.as_f64(), a.im.as_f64())
        })
        .collect();
    let samples = 64 * moment as usize * 5 * n;
    let mut acc = 0.0;
    for s in 0..samples {
        let t = s as f64 / samples as f64;
        // y(t) = Re Σ a_n e^{i 2π f_n t}
        let y: f64 = amps
            .iter()
            .map(|&(f, re, im)| {
                let (sn, cs) = (2.0 * PI * f * t).sin_cos();
                re * cs - im * sn
            })
            .sum();
        acc += y.powi(moment as i32);
    }
    Ok(acc / samples as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Cplx;

    #[test]
    fn single_tone_moments() {
        let w = Waveform::new(CVector::from_vec(vec![Cplx::new(1.0, 0.0)]));
        let h = CVector::from_vec(vec![Cplx::new(1.0, 0.0)]);
        assert!((time_domain_oracle(&w, &h, 2).unwrap() - 0.5).abs() < 1e-10);
        assert!((time_domain_oracle(&w, &h, 4).unwrap() - 0.375).abs() < 1e-10);
        assert!(time_domain_oracle(&w, &h, 3).is_err());
    }
}
