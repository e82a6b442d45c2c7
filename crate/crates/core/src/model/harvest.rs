//! Harvested-DC metric in its scalar (per-tone) and matrix (`Tr(M X)`) forms.

use serde::{Deserialize, Serialize};

use super::config::{EhModel, SystemConfig};
use super::waveform::Waveform;
use crate::channel::ChannelRealization;
use crate::error::{check_len, Result};
use crate::linalg::{check_hermitian_psd, CMatrix, CVector};
use crate::scalar::{Cplx, Real};

/// `A{y²} = ½ Σ_n s_n² A_n²`.
pub fn dc_power_2nd<T: Real>(w: &Waveform<T>, gains: &CVector<T>) -> Result<T> {
    check_len(w.len(), gains.len())?;
    let sum = w
        .weights
        .iter()
        .zip(gains.iter())
        .fold(T::zero(), |acc, (x, h)| acc + x.norm_sqr() * h.norm_sqr());
    Ok(sum * T::lit(0.5))
}

/// `A{y⁴} = 3/8 Σ_{n1+n2=n3+n4} Π s A · cos(ψ1+ψ2−ψ3−ψ4)`, by direct
/// enumeration over `(n1, n2, n3)`.
pub fn dc_power_4th<T: Real>(w: &Waveform<T>, gains: &CVector<T>) -> Result<T> {
    check_len(w.len(), gains.len())?;
    let a: Vec<Cplx<T>> = w
        .weights
        .iter()
        .zip(gains.iter())
        .map(|(x, h)| x * h)
        .collect();
    let n = a.len() as isize;
    let mut sum = T::zero();
    for n1 in 0..n {
        for n2 in 0..n {
            let p12 = a[n1 as usize] * a[n2 as usize];
            for n3 in 0..n {
                let n4 = n1 + n2 - n3;
                if n4 < 0 || n4 >= n {
                    continue;
                }
                // Re(a1 a2 conj(a3) conj(a4)) = Π sA cos(ψ1+ψ2−ψ3−ψ4)
                let p34 = a[n3 as usize] * a[n4 as usize];
                sum += (p12 * p34.conj()).re;
            }
        }
    }
    Ok(sum * T::lit(0.375))
}

/// Per-tag `z_DC` and the weighted total `Z_DC = Σ c_j z_{DC,j}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct HarvestReport<T: Real> {
    pub per_tag: Vec<T>,
    pub total: T,
}

impl<T: Real> HarvestReport<T> {
    pub fn from_per_tag(per_tag: Vec<T>, weights: &[T]) -> Self {
        let total = per_tag
            .iter()
            .zip(weights)
            .fold(T::zero(), |acc, (z, c)| acc + *z * *c);
        Self { per_tag, total }
    }
}

/// Harvested-DC proxy from the per-tone amplitudes and phases, using the
/// forward channel and the configured energy-harvester model.
pub fn z_dc_scalar<T: Real>(
    w: &Waveform<T>,
    channel: &ChannelRealization<T>,
    cfg: &SystemConfig<T>,
) -> Result<HarvestReport<T>> {
    check_len(cfg.n_tags, channel.n_tags())?;
    let b2 = cfg.rectenna.beta2();
    let b4 = cfg.rectenna.beta4();
    let mut per_tag = Vec::with_capacity(cfg.n_tags);
    for j in 0..cfg.n_tags {
        let h = channel.forward_row(j);
        let mut z = b2 * dc_power_2nd(w, &h)?;
        if cfg.eh_model == EhModel::Nonlinear4th {
            z += b4 * dc_power_4th(w, &h)?;
        }
        per_tag.push(z);
    }
    Ok(HarvestReport::from_per_tag(per_tag, &cfg.tag_weights))
}

/// The diagonals of `M_j = h_j^* h_j^T`: `M_{j,k}` keeps only the `k`-th
/// superdiagonal, whose entries are `conj(h_{j,n}) h_{j,n+k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MDiagonalSet<T: Real> {
    n_tones: usize,
    /// `diags[j][k][n]` = entry `(n, n+k)` of `M_{j,k}`.
    diags: Vec<Vec<Vec<Cplx<T>>>>,
}

impl<T: Real> MDiagonalSet<T> {
    /// Builds the set from arbitrary per-tag gains (`K×N`).
    pub fn from_gains(gains: &CMatrix<T>) -> Self {
        let (k_tags, n) = gains.shape();
        let diags = (0..k_tags)
            .map(|j| {
                (0..n)
                    .map(|k| {
                        (0..n - k)
                            .map(|i| gains[(j, i)].conj() * gains[(j, i + k)])
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self { n_tones: n, diags }
    }

    pub fn n_tags(&self) -> usize {
        self.diags.len()
    }

    pub fn n_tones(&self) -> usize {
        self.n_tones
    }

    pub fn diagonal(&self, j: usize, k: usize) -> &[Cplx<T>] {
        &self.diags[j][k]
    }

    /// Dense `M_{j,k}`.
    pub fn matrix(&self, j: usize, k: usize) -> CMatrix<T> {
        let mut m = CMatrix::zeros(self.n_tones, self.n_tones);
        for (i, v) in self.diags[j][k].iter().enumerate() {
            m[(i, i + k)] = *v;
        }
        m
    }

    /// `t_{j,k} = Tr(M_{j,k} X) = Σ_n M[n, n+k] X[n+k, n]`.
    pub fn trace_with(&self, j: usize, k: usize, x: &CMatrix<T>) -> Cplx<T> {
        self.diags[j][k]
            .iter()
            .enumerate()
            .fold(Cplx::new(T::zero(), T::zero()), |acc, (i, m)| {
                acc + m * x[(i + k, i)]
            })
    }

    /// All `t_{j,k}` for one tag.
    pub fn t_vector(&self, j: usize, x: &CMatrix<T>) -> Vec<Cplx<T>> {
        (0..self.n_tones).map(|k| self.trace_with(j, k, x)).collect()
    }

    /// `M_j` rebuilt from its diagonals (superdiagonals plus their adjoints).
    pub fn reconstruct(&self, j: usize) -> CMatrix<T> {
        let mut m = self.matrix(j, 0);
        for k in 1..self.n_tones {
            let mk = self.matrix(j, k);
            m += &mk + mk.adjoint();
        }
        m
    }
}

pub fn build_m_diagonals<T: Real>(channel: &ChannelRealization<T>) -> MDiagonalSet<T> {
    MDiagonalSet::from_gains(&channel.forward)
}

/// Per-tag `z_DC` for a tag with t-vector `t` (`Tr(M_{j,k} X)`).
pub fn z_dc_from_t<T: Real>(t: &[Cplx<T>], cfg: &SystemConfig<T>) -> T {
    let b2 = cfg.rectenna.beta2();
    let b4 = cfg.rectenna.beta4();
    let mut z = b2 * T::lit(0.5) * t[0].re;
    if cfg.eh_model == EhModel::Nonlinear4th {
        z += T::lit(0.375) * b4 * t[0].norm_sqr();
        let tail = t[1..].iter().fold(T::zero(), |acc, v| acc + v.norm_sqr());
        z += T::lit(0.75) * b4 * tail;
    }
    z
}

/// Harvested-DC proxy in matrix form for a Hermitian PSD `X`; equals
/// [`z_dc_scalar`] when `X = w w^H`.
pub fn z_dc_matrix<T: Real>(
    x: &CMatrix<T>,
    mset: &MDiagonalSet<T>,
    cfg: &SystemConfig<T>,
) -> Result<HarvestReport<T>> {
    check_len(mset.n_tones(), x.nrows())?;
    check_len(cfg.n_tags, mset.n_tags())?;
    check_hermitian_psd(x, T::solver_tol())?;
    let per_tag = (0..mset.n_tags())
        .map(|j| z_dc_from_t(&mset.t_vector(j, x), cfg))
        .collect();
    Ok(HarvestReport::from_per_tag(per_tag, &cfg.tag_weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelRealization;
    use crate::model::config::SystemConfig;

    fn c(re: f64, im: f64) -> Cplx<f64> {
        Cplx::new(re, im)
    }

    #[test]
    fn second_moment_examples() {
        let w = Waveform::new(CVector::from_vec(vec![c(1.0, 0.0)]));
        let h = CVector::from_vec(vec![c(2.0, 0.0)]);
        assert_eq!(dc_power_2nd(&w, &h).unwrap(), 2.0);
        assert_eq!(dc_power_2nd(&Waveform::zeros(1), &h).unwrap(), 0.0);
        assert!(dc_power_2nd(&Waveform::zeros(2), &h).is_err());
    }

    #[test]
    fn fourth_moment_examples() {
        let w = Waveform::new(CVector::from_vec(vec![c(0.0, 1.0)]));
        let h = CVector::from_vec(vec![c(0.6, 0.8)]);
        assert!((dc_power_4th(&w, &h).unwrap() - 0.375).abs() < 1e-15);

        let w2 = Waveform::new(CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]));
        let h2 = CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        assert!((dc_power_4th(&w2, &h2).unwrap() - 2.25).abs() < 1e-14);
        assert!(dc_power_4th(&w2, &h).is_err());
    }

    #[test]
    fn single_tone_closed_form() {
        let p = 0.7;
        let a = 1.3;
        let cfg = SystemConfig::<f64>::uniform(1, 1, p, 1.0, 0.0);
        let ch = ChannelRealization::reciprocal(CMatrix::from_element(1, 1, c(a, 0.0))).unwrap();
        let w = Waveform::uniform(1, p);
        let z = z_dc_scalar(&w, &ch, &cfg).unwrap();
        let b2 = cfg.rectenna.beta2();
        let b4 = cfg.rectenna.beta4();
        let want = b2 * p * a * a + b4 * 0.375 * (2.0 * p).powi(2) * a.powi(4);
        assert!((z.total / want - 1.0).abs() < 1e-13);
        assert_eq!(z_dc_scalar(&Waveform::zeros(1), &ch, &cfg).unwrap().total, 0.0);

        let mset = build_m_diagonals(&ch);
        let x = CMatrix::from_element(1, 1, c(2.0 * p, 0.0));
        let zm = z_dc_matrix(&x, &mset, &cfg).unwrap();
        assert!((zm.total / want - 1.0).abs() < 1e-13);
    }

    #[test]
    fn m_diagonal_examples() {
        let one = CMatrix::from_element(1, 1, c(0.5, -2.0));
        let m = MDiagonalSet::from_gains(&one);
        assert!((m.matrix(0, 0)[(0, 0)] - c(4.25, 0.0)).norm() < 1e-15);

        let h = CMatrix::from_row_slice(1, 2, &[c(1.0, 0.0), c(0.0, 1.0)]);
        let m = MDiagonalSet::from_gains(&h);
        let m0 = m.matrix(0, 0);
        assert_eq!(m0[(0, 0)], c(1.0, 0.0));
        assert_eq!(m0[(1, 1)], c(1.0, 0.0));
        assert_eq!(m0[(0, 1)], c(0.0, 0.0));
        let m1 = m.matrix(0, 1);
        assert_eq!(m1[(0, 1)], c(0.0, 1.0));
        assert_eq!(m1[(0, 0)], c(0.0, 0.0));
        assert_eq!(m1[(1, 0)], c(0.0, 0.0));
    }

    #[test]
    fn zero_matrix_harvests_nothing() {
        let h = CMatrix::from_row_slice(1, 2, &[c(1.0, 0.5), c(0.2, 1.0)]);
        let cfg = SystemConfig::<f64>::uniform(2, 1, 1.0, 1.0, 0.0);
        let z = z_dc_matrix(&CMatrix::zeros(2, 2), &MDiagonalSet::from_gains(&h), &cfg).unwrap();
        assert_eq!(z.total, 0.0);
    }

    #[test]
    fn rejects_non_psd() {
        let h = CMatrix::from_row_slice(1, 2, &[c(1.0, 0.5), c(0.2, 1.0)]);
        let cfg = SystemConfig::<f64>::uniform(2, 1, 1.0, 1.0, 0.0);
        let x = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        assert!(z_dc_matrix(&x, &MDiagonalSet::from_gains(&h), &cfg).is_err());
    }
}
