use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::train::{TrainingSet, TARGET_MAGNITUDE};
use super::AnnError;
use crate::Scalar;

pub const N_IN: usize = 5;
pub const N_OUT: usize = 4;

/// Weights and biases of the 5→H→4 network.
///
/// Storage is hidden-unit major: `w[j][i]` is the weight from input `i` to
/// hidden unit `j`, `u[j][k]` the weight from hidden unit `j` to output `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    w: Vec<[T; N_IN]>,
    bw: Vec<T>,
    u: Vec<[T; N_OUT]>,
    bu: [T; N_OUT],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Activations<T> {
    pub hidden: Vec<T>,
    pub out: [T; N_OUT],
}

impl<T: Scalar> Network<T> {
    pub fn new(w: Vec<[T; N_IN]>, bw: Vec<T>, u: Vec<[T; N_OUT]>, bu: [T; N_OUT]) -> Result<Self, AnnError> {
        let h = w.len();
        if h == 0 {
            return Err(AnnError::Dimension("hidden layer must have at least one unit".into()));
        }
        if bw.len() != h || u.len() != h {
            return Err(AnnError::Dimension(format!("W has {h} hidden rows, Bw has {}, U has {}", bw.len(), u.len())));
        }
        let net = Self { w, bw, u, bu };
        if net.params().any(|p| !p.is_finite()) {
            return Err(AnnError::NonFinite);
        }
        Ok(net)
    }

    pub fn zeros(hidden: usize) -> Self {
        assert!(hidden > 0, "hidden layer must have at least one unit");
        Self {
            w: vec![[T::zero(); N_IN]; hidden],
            bw: vec![T::zero(); hidden],
            u: vec![[T::zero(); N_OUT]; hidden],
            bu: [T::zero(); N_OUT],
        }
    }

    /// Uniform initialization in `[-scale, scale]`, drawn in parameter order.
    pub fn random(hidden: usize, scale: T, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = scale.to_f64_lossy();
        let mut net = Self::zeros(hidden);
        for p in net.params_mut() {
            *p = T::lit(rng.gen_range(-scale..=scale));
        }
        net
    }

    pub fn hidden(&self) -> usize {
        self.w.len()
    }

    /// W_ij: input `i` → hidden `j`.
    pub fn w(&self, i: usize, j: usize) -> T {
        self.w[j][i]
    }

    /// B_wj: bias of hidden unit `j`.
    pub fn bw(&self, j: usize) -> T {
        self.bw[j]
    }

    /// U_jk: hidden `j` → output `k`.
    pub fn u(&self, j: usize, k: usize) -> T {
        self.u[j][k]
    }

    /// B_uk: bias of output unit `k`.
    pub fn bu(&self, k: usize) -> T {
        self.bu[k]
    }

    pub(crate) fn w_rows(&self) -> &[[T; N_IN]] {
        &self.w
    }

    pub(crate) fn bw_row(&self) -> &[T] {
        &self.bw
    }

    pub(crate) fn u_rows(&self) -> &[[T; N_OUT]] {
        &self.u
    }

    pub(crate) fn bu_row(&self) -> &[T; N_OUT] {
        &self.bu
    }

    pub fn param_count(&self) -> usize {
        self.hidden() * (N_IN + 1 + N_OUT) + N_OUT
    }

    /// All parameters in file order: W rows, Bw, U rows, Bu.
    pub fn params(&self) -> impl Iterator<Item = T> + '_ {
        self.w.iter().flatten().chain(&self.bw).chain(self.u.iter().flatten()).chain(&self.bu).copied()
    }

    fn params_mut(&mut self) -> impl Iterator<Item = &mut T> + '_ {
        self.w.iter_mut().flatten().chain(&mut self.bw).chain(self.u.iter_mut().flatten()).chain(&mut self.bu)
    }

    fn param_mut(&mut self, idx: usize) -> &mut T {
        let h = self.hidden();
        let mut idx = idx;
        if idx < h * N_IN {
            return &mut self.w[idx / N_IN][idx % N_IN];
        }
        idx -= h * N_IN;
        if idx < h {
            return &mut self.bw[idx];
        }
        idx -= h;
        if idx < h * N_OUT {
            return &mut self.u[idx / N_OUT][idx % N_OUT];
        }
        idx -= h * N_OUT;
        &mut self.bu[idx]
    }

    pub fn param(&self, idx: usize) -> T {
        self.params().nth(idx).expect("parameter index in range")
    }

    pub fn set_param(&mut self, idx: usize, value: T) {
        *self.param_mut(idx) = value;
    }

    /// Reorders output units so that new output `k` is old output `order[k]`.
    pub fn permute_outputs(&self, order: [usize; N_OUT]) -> Self {
        let mut out = self.clone();
        for (j, row) in out.u.iter_mut().enumerate() {
            *row = order.map(|k| self.u[j][k]);
        }
        out.bu = order.map(|k| self.bu[k]);
        out
    }

    pub fn forward(&self, x: &[T; N_IN]) -> Activations<T> {
        let hidden: Vec<T> = self
            .w
            .iter()
            .zip(&self.bw)
            .map(|(row, b)| row.iter().zip(x).fold(*b, |acc, (w, xi)| acc + *w * *xi).tanh())
            .collect();
        let mut out = self.bu;
        for (h, row) in hidden.iter().zip(&self.u) {
            for (o, u) in out.iter_mut().zip(row) {
                *o = *o + *h * *u;
            }
        }
        Activations { hidden, out: out.map(T::tanh) }
    }

    /// Sum of squared output errors over the batch.
    pub fn sse(&self, data: &TrainingSet) -> T {
        data.rows()
            .iter()
            .map(|(bits, target)| {
                let act = self.forward(&bits.as_inputs());
                act.out
                    .iter()
                    .zip(target_vector::<T>(target.index()))
                    .fold(T::zero(), |acc, (o, t)| acc + (*o - t) * (*o - t))
            })
            .fold(T::zero(), |a, b| a + b)
    }

    /// Analytic gradient of [`Network::sse`], shaped like the network, plus the sse itself.
    pub fn gradient(&self, data: &TrainingSet) -> (Self, T) {
        let two = T::lit(2.0);
        let mut grad = Self::zeros(self.hidden());
        let mut sse = T::zero();
        for (bits, target) in data.rows() {
            let x = bits.as_inputs::<T>();
            let act = self.forward(&x);
            let t = target_vector::<T>(target.index());
            let mut delta_out = [T::zero(); N_OUT];
            for k in 0..N_OUT {
                let err = act.out[k] - t[k];
                sse = sse + err * err;
                delta_out[k] = two * err * (T::one() - act.out[k] * act.out[k]);
                grad.bu[k] = grad.bu[k] + delta_out[k];
            }
            for (j, h) in act.hidden.iter().enumerate() {
                let mut back = T::zero();
                for ((g, d), u) in grad.u[j].iter_mut().zip(&delta_out).zip(&self.u[j]) {
                    *g = *g + *d * *h;
                    back = back + *d * *u;
                }
                let delta_h = back * (T::one() - *h * *h);
                grad.bw[j] = grad.bw[j] + delta_h;
                for (g, xi) in grad.w[j].iter_mut().zip(&x) {
                    *g = *g + delta_h * *xi;
                }
            }
        }
        (grad, sse)
    }

    /// One full-batch gradient-descent update; returns the new network and the pre-update sse.
    ///
    /// The step is `lr` times the batch-mean gradient of the sse, so `lr` does
    /// not have to shrink as rows are added.
    pub fn backprop_step(&self, data: &TrainingSet, lr: T) -> (Self, T) {
        let (grad, sse) = self.gradient(data);
        let step = lr / T::lit(data.len().max(1) as f64);
        let mut next = self.clone();
        for (p, g) in next.params_mut().zip(grad.params()) {
            *p = *p - step * g;
        }
        (next, sse)
    }
}

/// `+m` for the hot class, `-m` elsewhere, with `m` = [`TARGET_MAGNITUDE`].
pub(crate) fn target_vector<T: Scalar>(hot: usize) -> [T; N_OUT] {
    let m = T::lit(TARGET_MAGNITUDE);
    std::array::from_fn(|k| if k == hot { m } else { -m })
}
