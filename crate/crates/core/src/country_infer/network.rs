use std::collections::BTreeMap;

use crate::rng::SeededRng;

use super::tokenize::SparseFeatures;

/// Hashed bag of tokens -> one ReLU hidden layer -> softmax.
///
/// `w1` is `dim x hidden` row-major so a sparse input touches whole rows;
/// `w2` is `classes x hidden` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub dim: usize,
    pub hidden: usize,
    pub n_classes: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

/// Mean-over-batch gradients. Only rows of `w1` touched by the batch are
/// present.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w1: BTreeMap<u32, Vec<f64>>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

pub(crate) struct Activations {
    pub z: Vec<f64>,
    pub a: Vec<f64>,
    pub p: Vec<f64>,
}

impl Network {
    pub fn zeros(dim: usize, hidden: usize, n_classes: usize) -> Self {
        Network {
            dim,
            hidden,
            n_classes,
            w1: vec![0.0; dim * hidden],
            b1: vec![0.0; hidden],
            w2: vec![0.0; n_classes * hidden],
            b2: vec![0.0; n_classes],
        }
    }

    /// Uniform initialisation: `w1` rows in `±1` like embedding rows, `w2` in
    /// `±sqrt(6 / (hidden + classes))`, biases zero.
    pub fn init(dim: usize, hidden: usize, n_classes: usize, rng: &mut SeededRng) -> Self {
        let mut net = Network::zeros(dim, hidden, n_classes);
        for w in &mut net.w1 {
            *w = rng.uniform() * 2.0 - 1.0;
        }
        let a = (6.0 / (hidden + n_classes) as f64).sqrt();
        for w in &mut net.w2 {
            *w = (rng.uniform() * 2.0 - 1.0) * a;
        }
        net
    }

    pub(crate) fn forward(&self, x: &SparseFeatures) -> Activations {
        let h = self.hidden;
        let mut z = self.b1.clone();
        for &(i, c) in x {
            let row = &self.w1[i as usize * h..(i as usize + 1) * h];
            for (zk, w) in z.iter_mut().zip(row) {
                *zk += c * w;
            }
        }
        let a: Vec<f64> = z.iter().map(|&v| v.max(0.0)).collect();
        let mut p: Vec<f64> = (0..self.n_classes)
            .map(|c| self.b2[c] + dot(&self.w2[c * h..(c + 1) * h], &a))
            .collect();
        softmax_in_place(&mut p);
        Activations { z, a, p }
    }

    pub fn probabilities(&self, x: &SparseFeatures) -> Vec<f64> {
        self.forward(x).p
    }

    /// Mean cross-entropy over `batch`.
    pub fn loss(&self, batch: &[(&SparseFeatures, usize)]) -> f64 {
        if batch.is_empty() {
            return 0.0;
        }
        let total: f64 = batch
            .iter()
            .map(|(x, y)| -self.forward(x).p[*y].max(f64::MIN_POSITIVE).ln())
            .sum();
        total / batch.len() as f64
    }

    /// Mean cross-entropy over `batch` and its analytic gradient.
    pub fn loss_and_gradients(&self, batch: &[(&SparseFeatures, usize)]) -> (f64, Gradients) {
        let h = self.hidden;
        let mut g = Gradients {
            w1: BTreeMap::new(),
            b1: vec![0.0; h],
            w2: vec![0.0; self.n_classes * h],
            b2: vec![0.0; self.n_classes],
        };
        if batch.is_empty() {
            return (0.0, g);
        }
        let scale = 1.0 / batch.len() as f64;
        let mut loss = 0.0;
        let mut dz = vec![0.0; h];
        for (x, y) in batch {
            let act = self.forward(x);
            loss -= act.p[*y].max(f64::MIN_POSITIVE).ln();
            dz.iter_mut().for_each(|v| *v = 0.0);
            for c in 0..self.n_classes {
                let dl = (act.p[c] - if c == *y { 1.0 } else { 0.0 }) * scale;
                g.b2[c] += dl;
                let w2row = &self.w2[c * h..(c + 1) * h];
                let g2row = &mut g.w2[c * h..(c + 1) * h];
                for k in 0..h {
                    g2row[k] += dl * act.a[k];
                    dz[k] += dl * w2row[k];
                }
            }
            for k in 0..h {
                if act.z[k] <= 0.0 {
                    dz[k] = 0.0;
                }
                g.b1[k] += dz[k];
            }
            for &(i, cnt) in x.iter() {
                let row = g.w1.entry(i).or_insert_with(|| vec![0.0; h]);
                for k in 0..h {
                    row[k] += cnt * dz[k];
                }
            }
        }
        (loss * scale, g)
    }

    pub fn apply(&mut self, g: &Gradients, lr: f64) {
        let h = self.hidden;
        for (i, row) in &g.w1 {
            let w = &mut self.w1[*i as usize * h..(*i as usize + 1) * h];
            for (wk, gk) in w.iter_mut().zip(row) {
                *wk -= lr * gk;
            }
        }
        axpy(&mut self.b1, &g.b1, lr);
        axpy(&mut self.w2, &g.w2, lr);
        axpy(&mut self.b2, &g.b2, lr);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(w: &mut [f64], g: &[f64], lr: f64) {
    for (wk, gk) in w.iter_mut().zip(g) {
        *wk -= lr * gk;
    }
}

fn softmax_in_place(v: &mut [f64]) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in v.iter_mut() {
        *x /= sum;
    }
}
