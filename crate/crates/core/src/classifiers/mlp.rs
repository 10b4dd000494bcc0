//! A single-hidden-layer perceptron: ReLU hidden units, sigmoid output,
//! full-batch gradient descent on cross-entropy. Weights start Glorot
//! uniform from the model seed; biases start at zero.

use rand::Rng;

use super::linear::sigmoid;
use super::{ModelParams, ModelSpec};
use crate::error::Result;
use crate::rng::{stream, Stage};

#[derive(Debug, Clone)]
pub(crate) struct MlpParams {
    /// hidden x input.
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl MlpParams {
    pub fn forward(&self, row: &[f64]) -> f64 {
        let mut z2 = self.b2;
        for (h, (w_row, &b)) in self.w1.iter().zip(&self.b1).enumerate() {
            let z = crate::linalg::dot(w_row, row) + b;
            if z > 0.0 {
                z2 += self.w2[h] * z;
            }
        }
        sigmoid(z2)
    }
}

pub(crate) fn fit_mlp(spec: &ModelSpec, x: &[Vec<f64>], y: &[u8]) -> Result<ModelParams> {
    let n = x.len();
    let d = x[0].len();
    let hidden = spec.param_usize("hidden", 16).max(1);
    let lr = spec.param("learning_rate", 0.1);
    let epochs = spec.param_usize("epochs", 500);

    let mut rng = stream(spec.seed, Stage::Model, 0);
    let limit1 = (6.0 / (d + hidden) as f64).sqrt();
    let mut w1: Vec<Vec<f64>> = (0..hidden)
        .map(|_| (0..d).map(|_| rng.random_range(-limit1..limit1)).collect())
        .collect();
    let mut b1 = vec![0.0; hidden];
    let limit2 = (6.0 / (hidden + 1) as f64).sqrt();
    let mut w2: Vec<f64> = (0..hidden)
        .map(|_| rng.random_range(-limit2..limit2))
        .collect();
    let mut b2 = 0.0;

    let inv_n = 1.0 / n as f64;
    let mut hidden_pre = vec![0.0; hidden];
    let mut grad_w1 = vec![vec![0.0; d]; hidden];
    let mut grad_b1 = vec![0.0; hidden];
    let mut grad_w2 = vec![0.0; hidden];

    for _ in 0..epochs {
        grad_w1.iter_mut().for_each(|r| r.iter_mut().for_each(|g| *g = 0.0));
        grad_b1.iter_mut().for_each(|g| *g = 0.0);
        grad_w2.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b2 = 0.0;

        for (row, &label) in x.iter().zip(y) {
            let mut z2 = b2;
            for h in 0..hidden {
                let z = crate::linalg::dot(&w1[h], row) + b1[h];
                hidden_pre[h] = z;
                if z > 0.0 {
                    z2 += w2[h] * z;
                }
            }
            let delta_out = sigmoid(z2) - f64::from(label);
            grad_b2 += delta_out;
            for h in 0..hidden {
                if hidden_pre[h] > 0.0 {
                    grad_w2[h] += delta_out * hidden_pre[h];
                    let delta_h = delta_out * w2[h];
                    grad_b1[h] += delta_h;
                    for (g, &v) in grad_w1[h].iter_mut().zip(row) {
                        *g += delta_h * v;
                    }
                }
            }
        }

        for h in 0..hidden {
            for (w, g) in w1[h].iter_mut().zip(&grad_w1[h]) {
                *w -= lr * inv_n * g;
            }
            b1[h] -= lr * inv_n * grad_b1[h];
            w2[h] -= lr * inv_n * grad_w2[h];
        }
        b2 -= lr * inv_n * grad_b2;
    }

    Ok(ModelParams::Mlp(MlpParams { w1, b1, w2, b2 }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{fit, ModelFamily};

    #[test]
    fn mlp_learns_a_nonlinear_boundary() {
        // XOR-ish: class 1 in opposite corners.
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..5 {
            for j in 0..5 {
                let (a, b) = (i as f64 / 4.0, j as f64 / 4.0);
                x.push(vec![a, b]);
                y.push(u8::from((a < 0.5) == (b < 0.5)));
            }
        }
        let spec = ModelSpec::new(ModelFamily::Mlp)
            .with_seed(1)
            .with_param("epochs", 3000.0)
            .with_param("learning_rate", 0.5);
        let model = fit(&spec, &x, &y).unwrap();
        let acc = model.accuracy(&x, &y).unwrap();
        assert!(acc >= 0.9, "accuracy {acc}");
    }

    #[test]
    fn mlp_is_seed_deterministic() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 * 0.1]).collect();
        let y: Vec<u8> = (0..10).map(|i| u8::from(i >= 5)).collect();
        let spec = ModelSpec::new(ModelFamily::Mlp).with_seed(77);
        let a = fit(&spec, &x, &y).unwrap();
        let b = fit(&spec, &x, &y).unwrap();
        assert_eq!(a.predict_score(&x).unwrap(), b.predict_score(&x).unwrap());
        let other = fit(&spec.clone().with_seed(78), &x, &y).unwrap();
        assert_ne!(
            a.predict_score(&x).unwrap(),
            other.predict_score(&x).unwrap()
        );
    }
}
