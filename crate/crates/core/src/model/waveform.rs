use serde::{Deserialize, Serialize};

use crate::linalg::{outer, CMatrix, CVector};
use crate::scalar::{cabs, carg, polar, Cplx, Real};

/// Complex tone weights `w_n = s_n e^{iφ_n}` of a multisine, tones indexed
/// `0..N`. Transmit power is `‖w‖²/2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Waveform<T: Real> {
    pub weights: CVector<T>,
}

impl<T: Real> Waveform<T> {
    pub fn new(weights: CVector<T>) -> Self {
        Self { weights }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(CVector::zeros(n))
    }

    pub fn from_polar(magnitudes: &[T], phases: &[T]) -> Self {
        assert_eq!(magnitudes.len(), phases.len());
        Self::new(CVector::from_iterator(
            magnitudes.len(),
            magnitudes
                .iter()
                .zip(phases)
                .map(|(&s, &p)| polar(s, p)),
        ))
    }

    /// Equal power on every tone at total power `power`, zero phases.
    pub fn uniform(n: usize, power: T) -> Self {
        let s = (T::lit(2.0) * power / T::of_usize(n)).sqrt();
        Self::new(CVector::from_element(n, Cplx::new(s, T::zero())))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `‖w‖²/2`.
    pub fn power(&self) -> T {
        self.weights.norm_squared() * T::lit(0.5)
    }

    pub fn magnitudes(&self) -> Vec<T> {
        self.weights.iter().map(|z| cabs(*z)).collect()
    }

    pub fn phases(&self) -> Vec<T> {
        self.weights.iter().map(|z| carg(*z)).collect()
    }

    pub fn scaled(&self, alpha: T) -> Self {
        Self::new(self.weights.map(|z| z * alpha))
    }

    /// Multiplies every weight by `e^{iθ}`.
    pub fn rotated(&self, theta: T) -> Self {
        let r = polar(T::one(), theta);
        Self::new(self.weights.map(|z| z * r))
    }

    /// `X = w w^H`.
    pub fn outer(&self) -> CMatrix<T> {
        outer(&self.weights)
    }
}
