//! Outer-minimization optimizers: SGD, Heavy Ball, and Nesterov accelerated
//! gradient, with optional coupled weight decay.
//!
//! With effective gradient `g' = g + wd * theta`:
//!
//! - SGD:        `theta -= lr * g'`
//! - Heavy Ball: `v = mu * v + g'; theta -= lr * v`
//! - NAG:        `v = mu * v + g'; theta -= lr * (g' + mu * v)`
//!
//! These are the velocity-accumulation conventions of the ecosystem the
//! default hyperparameters come from; the classical Polyak and Nesterov
//! formulations differ in where the learning rate enters but produce
//! comparable trajectories at these settings. With `mu = 0` both momentum
//! methods reduce to SGD bitwise.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::nn::ParameterSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptimizerFamily {
    Sgd,
    HeavyBall,
    Nag,
}

impl fmt::Display for OptimizerFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptimizerFamily::Sgd => "sgd",
            OptimizerFamily::HeavyBall => "hb",
            OptimizerFamily::Nag => "nag",
        })
    }
}

impl FromStr for OptimizerFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sgd" => Ok(OptimizerFamily::Sgd),
            "hb" | "heavyball" | "heavy-ball" => Ok(OptimizerFamily::HeavyBall),
            "nag" | "nesterov" => Ok(OptimizerFamily::Nag),
            other => Err(Error::config(format!(
                "unknown optimizer {other:?} (expected sgd, hb, or nag)"
            ))),
        }
    }
}

/// Hyperparameters of one optimizer instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub family: OptimizerFamily,
    pub learning_rate: f32,
    /// Ignored for SGD.
    pub momentum: f32,
    pub weight_decay: f32,
}

impl OptimizerConfig {
    pub fn sgd(learning_rate: f32) -> Self {
        OptimizerConfig {
            family: OptimizerFamily::Sgd,
            learning_rate,
            momentum: 0.0,
            weight_decay: 0.0,
        }
    }

    pub fn heavy_ball(learning_rate: f32, momentum: f32) -> Self {
        OptimizerConfig {
            family: OptimizerFamily::HeavyBall,
            learning_rate,
            momentum,
            weight_decay: 0.0,
        }
    }

    pub fn nag(learning_rate: f32, momentum: f32) -> Self {
        OptimizerConfig {
            family: OptimizerFamily::Nag,
            learning_rate,
            momentum,
            weight_decay: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::config(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        if self.weight_decay < 0.0 {
            return Err(Error::config(format!(
                "weight decay must be non-negative, got {}",
                self.weight_decay
            )));
        }
        Ok(())
    }
}

/// Optimizer configuration plus per-parameter velocity state.
///
/// Single-writer: one optimizer mutates one parameter set.
#[derive(Debug, Clone)]
pub struct Optimizer {
    config: OptimizerConfig,
    /// Zero-initialized velocities, allocated lazily for HB/NAG.
    velocity: Option<ParameterSet>,
}

impl Optimizer {
    pub fn new(config: OptimizerConfig) -> Result<Self> {
        config.validate()?;
        Ok(Optimizer {
            config,
            velocity: None,
        })
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.config
    }

    /// Applies one update step in place. `grads` must be congruent with `params`.
    pub fn step(&mut self, params: &mut ParameterSet, grads: &ParameterSet) -> Result<()> {
        if !params.congruent(grads) {
            return Err(Error::shape(format!(
                "gradients for {:?} are not congruent with parameters for {:?}",
                grads.arch(),
                params.arch()
            )));
        }
        let cfg = self.config;
        match cfg.family {
            OptimizerFamily::Sgd => {
                for (theta, grad) in params.tensors_mut().iter_mut().zip(grads.tensors()) {
                    sgd_step(theta.data_mut(), grad.data(), cfg.learning_rate, cfg.weight_decay);
                }
            }
            OptimizerFamily::HeavyBall | OptimizerFamily::Nag => {
                let velocity = self
                    .velocity
                    .get_or_insert_with(|| params.zeros_like());
                if !velocity.congruent(params) {
                    return Err(Error::shape(
                        "optimizer state is not congruent with the parameter set".to_string(),
                    ));
                }
                let nesterov = cfg.family == OptimizerFamily::Nag;
                for ((theta, vel), grad) in params
                    .tensors_mut()
                    .iter_mut()
                    .zip(velocity.tensors_mut())
                    .zip(grads.tensors())
                {
                    momentum_step(
                        theta.data_mut(),
                        vel.data_mut(),
                        grad.data(),
                        cfg.learning_rate,
                        cfg.momentum,
                        cfg.weight_decay,
                        nesterov,
                    );
                }
            }
        }
        Ok(())
    }
}

fn sgd_step(theta: &mut [f32], grad: &[f32], lr: f32, wd: f32) {
    if wd == 0.0 {
        for (t, &g) in theta.iter_mut().zip(grad) {
            *t -= lr * g;
        }
    } else {
        for (t, &g) in theta.iter_mut().zip(grad) {
            *t -= lr * (g + wd * *t);
        }
    }
}

fn momentum_step(
    theta: &mut [f32],
    vel: &mut [f32],
    grad: &[f32],
    lr: f32,
    mu: f32,
    wd: f32,
    nesterov: bool,
) {
    for ((t, v), &g) in theta.iter_mut().zip(vel.iter_mut()).zip(grad) {
        let gp = if wd == 0.0 { g } else { g + wd * *t };
        *v = mu * *v + gp;
        let update = if nesterov { gp + mu * *v } else { *v };
        *t -= lr * update;
    }
}
