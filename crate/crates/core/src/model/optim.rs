use serde::{Deserialize, Serialize};

use crate::model::ModelParams;

/// Adam moments and hyperparameters for one parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub step_count: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(dim: usize, learning_rate: f64) -> Self {
        AdamState {
            first_moment: vec![0.0; dim],
            second_moment: vec![0.0; dim],
            step_count: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    /// In-place bias-corrected Adam update.
    pub fn step(&mut self, params: &mut ModelParams, gradient: &ModelParams) {
        self.step_count += 1;
        let t = self.step_count as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for (((theta, g), m), v) in params
            .as_mut_slice()
            .iter_mut()
            .zip(gradient.as_slice())
            .zip(&mut self.first_moment)
            .zip(&mut self.second_moment)
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *theta -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}

/// Pure form of [`AdamState::step`].
pub fn adam_step(
    state: &AdamState,
    params: &ModelParams,
    gradient: &ModelParams,
) -> (AdamState, ModelParams) {
    let mut state = state.clone();
    let mut params = params.clone();
    state.step(&mut params, gradient);
    (state, params)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    #[default]
    Adam,
    /// Plain gradient descent, `theta -= lr * g`.
    Sgd,
}

/// Local optimizer owned by a single client update.
#[derive(Debug, Clone)]
pub enum Optimizer {
    Adam(AdamState),
    Sgd { learning_rate: f64 },
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, dim: usize, learning_rate: f64) -> Self {
        match kind {
            OptimizerKind::Adam => Optimizer::Adam(AdamState::new(dim, learning_rate)),
            OptimizerKind::Sgd => Optimizer::Sgd { learning_rate },
        }
    }

    pub fn step(&mut self, params: &mut ModelParams, gradient: &ModelParams) {
        match self {
            Optimizer::Adam(state) => state.step(params, gradient),
            Optimizer::Sgd { learning_rate } => params.axpy(-*learning_rate, gradient),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let state = AdamState::new(3, 0.01);
        let p = ModelParams::from_flat(vec![1.0, -2.0, 0.5]);
        let (next, q) = adam_step(&state, &p, &ModelParams::zeros(2));
        assert_eq!(q, p);
        assert_eq!(next.step_count, 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let lr = 0.002;
        let state = AdamState::new(3, lr);
        let p = ModelParams::zeros(2);
        let g = ModelParams::from_flat(vec![0.3, -5.0, 1e-3]);
        let (_, q) = adam_step(&state, &p, &g);
        for (delta, gi) in q.as_slice().iter().zip(g.as_slice()) {
            assert!((delta + lr * gi.signum()).abs() <= lr * 1e-3, "{delta}");
        }
    }

    #[test]
    fn converges_on_one_dimensional_quadratic() {
        let mut state = AdamState::new(1, 0.05);
        let mut p = ModelParams::from_flat(vec![0.0]);
        for _ in 0..1000 {
            let g = ModelParams::from_flat(vec![p.as_slice()[0] - 2.0]);
            state.step(&mut p, &g);
        }
        assert!((p.as_slice()[0] - 2.0).abs() <= 0.01, "{:?}", p);
    }

    #[test]
    fn adam_is_deterministic() {
        let state = AdamState::new(2, 0.1);
        let p = ModelParams::from_flat(vec![0.4, -0.1]);
        let g = ModelParams::from_flat(vec![1.5, 0.2]);
        assert_eq!(adam_step(&state, &p, &g), adam_step(&state, &p, &g));
    }

    #[test]
    fn sgd_is_plain_descent() {
        let mut opt = Optimizer::new(OptimizerKind::Sgd, 2, 0.5);
        let mut p = ModelParams::from_flat(vec![1.0, 1.0]);
        opt.step(&mut p, &ModelParams::from_flat(vec![2.0, -2.0]));
        assert_eq!(p.as_slice(), &[0.0, 2.0]);
    }
}
