//! Parameter update rules. Both optimizers refuse to step on a non-finite
//! gradient, skip frozen parameters and zero every gradient afterwards.

use serde::{Deserialize, Serialize};

use super::{NnError, Parameter, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerConfig {
    Sgd { lr: f64, momentum: f64 },
    Adam { lr: f64, beta1: f64, beta2: f64, eps: f64 },
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig::Adam {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl OptimizerConfig {
    pub fn build(self) -> Box<dyn Optimizer> {
        match self {
            OptimizerConfig::Sgd { lr, momentum } => Box::new(Sgd::new(lr, momentum)),
            OptimizerConfig::Adam { lr, beta1, beta2, eps } => Box::new(Adam::new(lr, beta1, beta2, eps)),
        }
    }
}

pub trait Optimizer: Send {
    fn step(&mut self, params: &mut [Parameter]) -> Result<(), NnError>;
}

fn check_grads(params: &[Parameter]) -> Result<(), NnError> {
    for p in params.iter().filter(|p| !p.frozen) {
        if !p.grad.is_finite() {
            return Err(NnError::NonFiniteGradient(p.name.clone()));
        }
    }
    Ok(())
}

fn state_for(params: &[Parameter]) -> Vec<Tensor> {
    params.iter().map(|p| Tensor::zeros(p.value.shape())).collect()
}

/// `v ← μ·v + g; w ← w − lr·v`.
#[derive(Debug, Clone)]
pub struct Sgd {
    pub lr: f64,
    pub momentum: f64,
    velocity: Vec<Tensor>,
}

impl Sgd {
    pub fn new(lr: f64, momentum: f64) -> Self {
        Sgd {
            lr,
            momentum,
            velocity: Vec::new(),
        }
    }
}

impl Optimizer for Sgd {
    fn step(&mut self, params: &mut [Parameter]) -> Result<(), NnError> {
        check_grads(params)?;
        if self.velocity.len() != params.len() {
            self.velocity = state_for(params);
        }
        for (p, v) in params.iter_mut().zip(&mut self.velocity) {
            if !p.frozen {
                for ((w, g), v) in p.value.data_mut().iter_mut().zip(p.grad.data()).zip(v.data_mut()) {
                    *v = self.momentum * *v + g;
                    *w -= self.lr * *v;
                }
            }
            p.zero_grad();
        }
        Ok(())
    }
}

/// Adam with bias-corrected moment estimates.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: u64,
    m: Vec<Tensor>,
    v: Vec<Tensor>,
}

impl Adam {
    pub fn new(lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Adam {
            lr,
            beta1,
            beta2,
            eps,
            t: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.t
    }
}

impl Optimizer for Adam {
    fn step(&mut self, params: &mut [Parameter]) -> Result<(), NnError> {
        check_grads(params)?;
        if self.m.len() != params.len() {
            self.m = state_for(params);
            self.v = state_for(params);
        }
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for ((p, m), v) in params.iter_mut().zip(&mut self.m).zip(&mut self.v) {
            if !p.frozen {
                let it = p
                    .value
                    .data_mut()
                    .iter_mut()
                    .zip(p.grad.data())
                    .zip(m.data_mut().iter_mut().zip(v.data_mut()));
                for ((w, &g), (m, v)) in it {
                    *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                    *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                    *w -= self.lr * (*m / c1) / ((*v / c2).sqrt() + self.eps);
                }
            }
            p.zero_grad();
        }
        Ok(())
    }
}

/// One SGD update with fresh (zero) momentum state.
pub fn sgd_step(params: &mut [Parameter], lr: f64, momentum: f64) -> Result<(), NnError> {
    Sgd::new(lr, momentum).step(params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(w: f64, g: f64) -> Parameter {
        let mut p = Parameter::new("w", Tensor::vector(vec![w]));
        p.grad = Tensor::vector(vec![g]);
        p
    }

    #[test]
    fn sgd_example() {
        let mut ps = [scalar(1.0, 0.5)];
        sgd_step(&mut ps, 0.1, 0.0).unwrap();
        assert!((ps[0].value.data()[0] - 0.95).abs() < 1e-15);
        assert_eq!(ps[0].grad.data(), &[0.0]);
    }

    #[test]
    fn sgd_momentum_accumulates() {
        let mut opt = Sgd::new(0.1, 0.9);
        let mut ps = [scalar(0.0, 1.0)];
        opt.step(&mut ps).unwrap();
        ps[0].grad = Tensor::vector(vec![1.0]);
        opt.step(&mut ps).unwrap();
        // v1 = 1, v2 = 1.9: w = -0.1 - 0.19
        assert!((ps[0].value.data()[0] + 0.29).abs() < 1e-15);
    }

    #[test]
    fn adam_first_step_is_lr_sized() {
        // Bias-corrected m̂ = g and v̂ = g², so the step is lr·g/(|g| + ε).
        for g in [0.5, -3.0, 1e-3] {
            let mut ps = [scalar(1.0, g)];
            Adam::new(1e-3, 0.9, 0.999, 1e-8).step(&mut ps).unwrap();
            let expected = 1.0 - 1e-3 * g / (g.abs() + 1e-8);
            assert!((ps[0].value.data()[0] - expected).abs() < 1e-15);
            assert!(((1.0 - ps[0].value.data()[0]).abs() - 1e-3).abs() < 1e-8);
        }
    }

    #[test]
    fn frozen_untouched() {
        for mut opt in [OptimizerConfig::default().build(), OptimizerConfig::Sgd { lr: 0.5, momentum: 0.9 }.build()] {
            let mut ps = [scalar(2.0, 1.0).frozen(true), scalar(2.0, 1.0)];
            opt.step(&mut ps).unwrap();
            assert_eq!(ps[0].value.data(), &[2.0]);
            assert_ne!(ps[1].value.data(), &[2.0]);
            assert_eq!(ps[0].grad.data(), &[0.0]);
        }
    }

    #[test]
    fn non_finite_gradient_rejected() {
        let mut ps = [scalar(1.0, f64::NAN)];
        assert_eq!(
            Adam::new(1e-3, 0.9, 0.999, 1e-8).step(&mut ps),
            Err(NnError::NonFiniteGradient("w".into()))
        );
        assert_eq!(ps[0].value.data(), &[1.0]);
    }
}
