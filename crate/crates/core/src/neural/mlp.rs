use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    /// `z` for `z >= 0`, `exp(z) - 1` otherwise.
    Elu,
    Identity,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Elu => "elu",
            Activation::Identity => "identity",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "elu" => Some(Activation::Elu),
            "identity" => Some(Activation::Identity),
            _ => None,
        }
    }

    #[inline]
    pub fn apply<T: Scalar>(self, z: T) -> T {
        match self {
            Activation::Elu if z < T::zero() => z.exp_m1(),
            _ => z,
        }
    }

    /// Derivative in terms of the pre-activation.
    #[inline]
    pub fn derivative<T: Scalar>(self, z: T) -> T {
        match self {
            Activation::Elu if z < T::zero() => z.exp(),
            _ => T::one(),
        }
    }
}

pub fn elu<T: Scalar>(z: T) -> T {
    Activation::Elu.apply(z)
}

#[inline]
pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [T::zero(); 4];
    let chunks = n / 4;
    for i in 0..chunks {
        let k = 4 * i;
        acc[0] = acc[0] + a[k] * b[k];
        acc[1] = acc[1] + a[k + 1] * b[k + 1];
        acc[2] = acc[2] + a[k + 2] * b[k + 2];
        acc[3] = acc[3] + a[k + 3] * b[k + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..n {
        s = s + a[k] * b[k];
    }
    s
}

#[inline]
fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * *xi;
    }
}

/// Offsets of one affine layer inside the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerShape {
    pub n_in: usize,
    pub n_out: usize,
    pub weights: usize,
    pub bias: usize,
}

/// Fully connected network with a shared hidden activation and identity output.
/// Parameters live in one flat vector: per layer a row-major `n_out x n_in`
/// weight block followed by `n_out` biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T> {
    dims: Vec<usize>,
    hidden: Activation,
    layers: Vec<LayerShape>,
    params: Vec<T>,
    /// Number of optimizer updates applied so far.
    pub step: u64,
}

/// Intermediates of one forward pass, needed by `backward`.
#[derive(Debug, Clone, Default)]
pub struct ForwardCache<T> {
    /// `activations[0]` is the input; `activations[l + 1]` the output of layer `l`.
    pub activations: Vec<Vec<T>>,
    pub pre: Vec<Vec<T>>,
    delta: Vec<T>,
    delta_next: Vec<T>,
}

impl<T: Scalar> Mlp<T> {
    pub fn zeros(dims: &[usize], hidden: Activation) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::validation(format!("invalid layer dims {dims:?}")));
        }
        let mut layers = Vec::with_capacity(dims.len() - 1);
        let mut offset = 0;
        for w in dims.windows(2) {
            let (n_in, n_out) = (w[0], w[1]);
            layers.push(LayerShape {
                n_in,
                n_out,
                weights: offset,
                bias: offset + n_in * n_out,
            });
            offset += n_in * n_out + n_out;
        }
        Ok(Mlp {
            dims: dims.to_vec(),
            hidden,
            layers,
            params: vec![T::zero(); offset],
            step: 0,
        })
    }

    /// Uniform Glorot initialization of the weights; biases start at zero.
    pub fn new<R: Rng + ?Sized>(dims: &[usize], hidden: Activation, rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(dims, hidden)?;
        for l in net.layers.clone() {
            let limit = (6.0 / (l.n_in + l.n_out) as f64).sqrt();
            for w in &mut net.params[l.weights..l.bias] {
                *w = T::lit(rng.gen_range(-limit..=limit));
            }
        }
        Ok(net)
    }

    pub fn from_params(dims: &[usize], hidden: Activation, params: Vec<T>, step: u64) -> Result<Self> {
        let mut net = Self::zeros(dims, hidden)?;
        if params.len() != net.params.len() {
            return Err(Error::validation(format!(
                "expected {} parameters, got {}",
                net.params.len(),
                params.len()
            )));
        }
        net.params = params;
        net.step = step;
        Ok(net)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden
    }

    pub fn layers(&self) -> &[LayerShape] {
        &self.layers
    }

    pub fn n_inputs(&self) -> usize {
        self.dims[0]
    }

    pub fn n_outputs(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    pub fn all_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    fn activation_of(&self, layer: usize) -> Activation {
        if layer + 1 == self.layers.len() {
            Activation::Identity
        } else {
            self.hidden
        }
    }

    fn check_input(&self, x: &[T]) -> Result<()> {
        if x.len() != self.n_inputs() {
            return Err(Error::validation(format!(
                "input length {} does not match network input {}",
                x.len(),
                self.n_inputs()
            )));
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("network input".into()));
        }
        Ok(())
    }

    pub fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        let mut cache = ForwardCache::default();
        self.forward_cached(x, &mut cache)?;
        Ok(cache.activations.pop().unwrap_or_default())
    }

    /// Forward pass that keeps every intermediate in `cache`; returns the output.
    pub fn forward_cached<'c>(&self, x: &[T], cache: &'c mut ForwardCache<T>) -> Result<&'c [T]> {
        self.check_input(x)?;
        let n = self.layers.len();
        cache.activations.resize_with(n + 1, Vec::new);
        cache.pre.resize_with(n, Vec::new);
        cache.activations[0].clear();
        cache.activations[0].extend_from_slice(x);
        for (l, shape) in self.layers.iter().enumerate() {
            let act = self.activation_of(l);
            let (head, tail) = cache.activations.split_at_mut(l + 1);
            let input = &head[l];
            let out = &mut tail[0];
            let z = &mut cache.pre[l];
            z.clear();
            out.clear();
            let w = &self.params[shape.weights..shape.bias];
            let b = &self.params[shape.bias..shape.bias + shape.n_out];
            for (o, bias) in b.iter().enumerate() {
                let zo = dot(&w[o * shape.n_in..(o + 1) * shape.n_in], input) + *bias;
                z.push(zo);
                out.push(act.apply(zo));
            }
        }
        Ok(&cache.activations[n])
    }

    /// Accumulates `dL/dparams` into `grads` given `dL/doutput` for the pass
    /// recorded in `cache`.
    pub fn backward(&self, cache: &mut ForwardCache<T>, grad_out: &[T], grads: &mut [T]) -> Result<()> {
        let n = self.layers.len();
        if cache.pre.len() != n || cache.activations.len() != n + 1 || cache.activations[0].len() != self.n_inputs() {
            return Err(Error::validation("backward called without a matching forward cache"));
        }
        if grad_out.len() != self.n_outputs() || grads.len() != self.params.len() {
            return Err(Error::validation("gradient buffer shape mismatch"));
        }
        let ForwardCache {
            activations,
            pre,
            delta,
            delta_next,
        } = cache;
        delta.clear();
        delta.extend_from_slice(grad_out);
        for l in (0..n).rev() {
            let shape = self.layers[l];
            let act = self.activation_of(l);
            for (d, z) in delta.iter_mut().zip(&pre[l]) {
                *d = *d * act.derivative(*z);
            }
            let input = &activations[l];
            let w = &self.params[shape.weights..shape.bias];
            let (gw, gb) = grads[shape.weights..shape.bias + shape.n_out].split_at_mut(shape.n_in * shape.n_out);
            delta_next.clear();
            delta_next.resize(shape.n_in, T::zero());
            for (o, d) in delta.iter().enumerate() {
                if *d == T::zero() {
                    continue;
                }
                gb[o] = gb[o] + *d;
                axpy(*d, input, &mut gw[o * shape.n_in..(o + 1) * shape.n_in]);
                if l > 0 {
                    axpy(*d, &w[o * shape.n_in..(o + 1) * shape.n_in], delta_next);
                }
            }
            std::mem::swap(delta, delta_next);
        }
        Ok(())
    }
}
