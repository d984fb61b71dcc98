use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Adam<T> {
    pub alpha: T,
    pub beta1: T,
    pub beta2: T,
    pub eps: T,
    m: Vec<T>,
    v: Vec<T>,
    t: u64,
}

impl<T: Scalar> Adam<T> {
    pub fn new(n_params: usize, alpha: T) -> Self {
        Self::with_betas(n_params, alpha, T::lit(0.9), T::lit(0.999), T::lit(1e-8))
    }

    pub fn with_betas(n_params: usize, alpha: T, beta1: T, beta2: T, eps: T) -> Self {
        Adam {
            alpha,
            beta1,
            beta2,
            eps,
            m: vec![T::zero(); n_params],
            v: vec![T::zero(); n_params],
            t: 0,
        }
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// One bias-corrected update. Non-finite gradients leave both the
    /// parameters and the optimizer state untouched.
    pub fn step(&mut self, params: &mut [T], grads: &[T]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::validation("optimizer shape mismatch"));
        }
        if !grads.iter().all(|g| g.is_finite()) {
            return Err(Error::NonFinite("gradient".into()));
        }
        self.t += 1;
        let t = self.t as i32;
        let c1 = T::one() - self.beta1.powi(t);
        let c2 = T::one() - self.beta2.powi(t);
        let (b1, b2) = (self.beta1, self.beta2);
        for (((p, g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            *m = b1 * *m + (T::one() - b1) * *g;
            *v = b2 * *v + (T::one() - b2) * *g * *g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p = *p - self.alpha * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}
