use rand::seq::index::sample;
use rand::Rng;

use super::{ForwardCache, Mlp};
use crate::error::Result;
use crate::scalar::Scalar;

/// Outcome of a finite-difference comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheck<T> {
    pub max_rel_error: T,
    /// Parameter index with the largest error.
    pub worst_index: Option<usize>,
    pub checked: usize,
}

/// `|a - b| / max(|a|, |b|)`, zero when both are exactly zero. Magnitudes below
/// `floor` are measured against `floor` so round-off on vanishing gradients
/// does not dominate.
pub fn relative_error<T: Scalar>(a: T, b: T, floor: T) -> T {
    let diff = (a - b).abs();
    if diff == T::zero() {
        return T::zero();
    }
    diff / a.abs().max(b.abs()).max(floor)
}

/// Probe loss `0.5 * |q|^2`, whose output gradient is `q` itself.
fn probe_loss<T: Scalar>(net: &Mlp<T>, x: &[T]) -> Result<T> {
    Ok(net.forward(x)?.iter().map(|q| *q * *q).sum::<T>() * T::half())
}

/// Backpropagated gradient of the probe loss at `x`.
pub fn probe_gradient<T: Scalar>(net: &Mlp<T>, x: &[T]) -> Result<Vec<T>> {
    let mut cache = ForwardCache::default();
    let q = net.forward_cached(x, &mut cache)?.to_vec();
    let mut grads = vec![T::zero(); net.n_params()];
    net.backward(&mut cache, &q, &mut grads)?;
    Ok(grads)
}

/// Compares `analytic` with central differences of the probe loss on `coords`.
pub fn compare_gradients<T: Scalar>(net: &Mlp<T>, x: &[T], analytic: &[T], coords: &[usize], h: T) -> Result<GradCheck<T>> {
    let mut probe = net.clone();
    let mut worst = (T::zero(), None);
    for &i in coords {
        let orig = probe.params()[i];
        probe.params_mut()[i] = orig + h;
        let up = probe_loss(&probe, x)?;
        probe.params_mut()[i] = orig - h;
        let down = probe_loss(&probe, x)?;
        probe.params_mut()[i] = orig;
        let numeric = (up - down) / (T::two() * h);
        let err = relative_error(analytic[i], numeric, T::lit(1e-7));
        if worst.1.is_none() || err > worst.0 {
            worst = (err, Some(i));
        }
    }
    Ok(GradCheck {
        max_rel_error: worst.0,
        worst_index: worst.1,
        checked: coords.len(),
    })
}

/// Backpropagation against central differences (step `h`) on a random subset
/// of at least `min_coords` parameters (all of them if the net is smaller).
pub fn grad_check<T: Scalar, R: Rng + ?Sized>(net: &Mlp<T>, x: &[T], h: T, min_coords: usize, rng: &mut R) -> Result<GradCheck<T>> {
    let analytic = probe_gradient(net, x)?;
    let n = net.n_params();
    let coords = sample(rng, n, min_coords.min(n)).into_vec();
    compare_gradients(net, x, &analytic, &coords, h)
}
