//! Reader-side detection model: SINR of a tag after linear combining across
//! the per-tone product-detector outputs, and the two combiner designs.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::linalg::{dominant_eigvec, CMatrix, CVector};
use crate::model::Waveform;
use crate::scalar::{Cplx, Real};

/// Per-tag unit-norm receive combiners `g_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CombinerSet<T: Real> {
    pub combiners: Vec<CVector<T>>,
}

impl<T: Real> CombinerSet<T> {
    /// Normalizes each vector to unit norm.
    pub fn new(combiners: Vec<CVector<T>>) -> Result<Self> {
        let combiners = combiners
            .into_iter()
            .enumerate()
            .map(|(j, g)| {
                let n = g.norm();
                if n > T::zero() {
                    Ok(g.unscale(n))
                } else {
                    Err(Error::ZeroCombiner(j))
                }
            })
            .collect::<Result<_>>()?;
        Ok(Self { combiners })
    }

    pub fn get(&self, j: usize) -> &CVector<T> {
        &self.combiners[j]
    }

    pub fn len(&self) -> usize {
        self.combiners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.combiners.is_empty()
    }
}

fn diag_dot<T: Real>(g: &CVector<T>, diag: &CVector<T>, w: &CVector<T>) -> Cplx<T> {
    // g^H diag(d) w
    g.iter()
        .zip(diag.iter())
        .zip(w.iter())
        .fold(Cplx::new(T::zero(), T::zero()), |acc, ((g, d), w)| {
            acc + g.conj() * d * w
        })
}

/// `ρ_j = |g^H H_j w|² / (σ² ‖g‖² + |g^H H̃_j w|²)`.
pub fn sinr<T: Real>(
    w: &Waveform<T>,
    g: &CVector<T>,
    channel: &ChannelRealization<T>,
    tag: usize,
    noise_var: T,
) -> Result<T> {
    let gn = g.norm_squared();
    if !(gn > T::zero()) {
        return Err(Error::ZeroCombiner(tag));
    }
    let sig = diag_dot(g, &channel.h_diag(tag), &w.weights).norm_sqr();
    let intf = diag_dot(g, &channel.h_tilde_diag(tag), &w.weights).norm_sqr();
    Ok(sig / (noise_var * gn + intf))
}

/// SINR of every tag for a waveform and combiner set.
pub fn all_sinrs<T: Real>(
    w: &Waveform<T>,
    combiners: &CombinerSet<T>,
    channel: &ChannelRealization<T>,
    noise_var: T,
) -> Result<Vec<T>> {
    (0..channel.n_tags())
        .map(|j| sinr(w, combiners.get(j), channel, j, noise_var))
        .collect()
}

/// `g* ∝ (H̃ w w^H H̃^H + σ² I)^{-1} H w`, via Sherman–Morrison on the
/// rank-one interference term.
pub fn mmse_combiner<T: Real>(
    w: &Waveform<T>,
    channel: &ChannelRealization<T>,
    tag: usize,
    noise_var: T,
) -> Result<CVector<T>> {
    let v = channel.h_diag(tag).component_mul(&w.weights);
    let u = channel.h_tilde_diag(tag).component_mul(&w.weights);
    let uv = u.dotc(&v);
    let denom = Cplx::new(noise_var + u.norm_squared(), T::zero());
    let g = &v - u * (uv / denom);
    let n = g.norm();
    if !(n > T::zero()) || !n.is_finite() {
        return Err(Error::ZeroCombiner(tag));
    }
    Ok(g.unscale(n))
}

pub fn mmse_combiners<T: Real>(
    w: &Waveform<T>,
    channel: &ChannelRealization<T>,
    noise_var: T,
) -> Result<CombinerSet<T>> {
    let gs = (0..channel.n_tags())
        .map(|j| mmse_combiner(w, channel, j, noise_var))
        .collect::<Result<Vec<_>>>()?;
    CombinerSet::new(gs)
}

/// Maximizer of `g^H H X H^H g / g^H (σ² I + H̃ X H̃^H) g` for a PSD `X`:
/// whiten with the Cholesky factor `C` of the denominator, take the dominant
/// eigenvector of `D = C^{-1} H X H^H C^{-H}`, and map back through `C^{-H}`.
pub fn eigen_combiner<T: Real>(
    x: &CMatrix<T>,
    channel: &ChannelRealization<T>,
    tag: usize,
    noise_var: T,
) -> Result<CVector<T>> {
    let n = channel.n_tones();
    let hd = channel.h_diag(tag);
    let ht = channel.h_tilde_diag(tag);
    // diag(d) X diag(d)^H
    let congruence = |d: &CVector<T>| CMatrix::from_fn(n, n, |r, c| d[r] * x[(r, c)] * d[c].conj());
    let mut den = congruence(&ht);
    for i in 0..n {
        den[(i, i)] += Cplx::new(noise_var, T::zero());
    }
    let chol = match den.clone().cholesky() {
        Some(c) => c,
        None => {
            let tr = (0..n).fold(T::zero(), |a, i| a + x[(i, i)].re);
            let jitter = T::lit(1e-12) * tr / T::of_usize(n);
            let mut d2 = den;
            for i in 0..n {
                d2[(i, i)] += Cplx::new(jitter, T::zero());
            }
            d2.cholesky()
                .ok_or_else(|| Error::Cholesky(format!("combiner whitening for tag {tag}")))?
        }
    };
    let l = chol.l();
    let num = congruence(&hd);
    // D = L^{-1} num L^{-H}
    let linv_num = l
        .solve_lower_triangular(&num)
        .ok_or_else(|| Error::Cholesky("singular factor".into()))?;
    let d = l
        .solve_lower_triangular(&linv_num.adjoint())
        .ok_or_else(|| Error::Cholesky("singular factor".into()))?
        .adjoint();
    let (_, gt) = dominant_eigvec(&d);
    let g = l
        .adjoint()
        .solve_upper_triangular(&gt)
        .ok_or_else(|| Error::Cholesky("singular factor".into()))?;
    let nrm = g.norm();
    if !(nrm > T::zero()) {
        return Err(Error::ZeroCombiner(tag));
    }
    Ok(g.unscale(nrm))
}

pub fn eigen_combiners<T: Real>(
    x: &CMatrix<T>,
    channel: &ChannelRealization<T>,
    noise_var: T,
) -> Result<CombinerSet<T>> {
    let gs = (0..channel.n_tags())
        .map(|j| eigen_combiner(x, channel, j, noise_var))
        .collect::<Result<Vec<_>>>()?;
    CombinerSet::new(gs)
}

/// Matrix-form SINR `Tr(G_j X) / (σ²‖g‖² + Tr(G̃_j X))`.
pub fn sinr_matrix<T: Real>(
    x: &CMatrix<T>,
    g: &CVector<T>,
    channel: &ChannelRealization<T>,
    tag: usize,
    noise_var: T,
) -> T {
    let a = channel.h_diag(tag).map(|z| z.conj()).component_mul(g);
    let b = channel.h_tilde_diag(tag).map(|z| z.conj()).component_mul(g);
    let quad = |v: &CVector<T>| (v.adjoint() * x * v)[(0, 0)].re;
    quad(&a) / (noise_var * g.norm_squared() + quad(&b))
}
