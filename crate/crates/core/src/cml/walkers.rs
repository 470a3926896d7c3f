//! Stochastic walkers following `x(t) = x(0) ± (u ± δu) t`.
//!
//! A walker keeps its emission point `x(0)` and two independent signs. At
//! time `t` its deterministic speed is the outward osmotic speed at the
//! self-similar position `x(0) sigma(t) / sigma0`, i.e.
//! `|u| = D |x(0)| / (sigma0 sigma(t))`, whose ensemble mean square is
//! `D^2 / sigma(t)^2`. The fluctuation `δu` is zero-mean Gaussian with
//! variance `u0^2 - D^2 / sigma(t)^2`, so each walker's speed has mean square
//! `u0^2` at every time.
//!
//! Random draws come from ChaCha8 with one stream per block of walkers, so
//! results do not depend on how blocks are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::dispersion::{delta_u_variance, sigma_t};
use crate::error::{Error, Result};
use crate::params::PhysicalParams;

const BLOCK: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct WalkerEnsemble {
    params: PhysicalParams,
    pub seed: u64,
    pub x0: Vec<f64>,
    /// Unit-normal draw, scaled by the fluctuation amplitude when evaluated.
    pub du_draw: Vec<f64>,
    /// Outer `±` of `±(u ± δu)`.
    pub sign: Vec<i8>,
    /// Inner `±` of `u ± δu`.
    pub du_sign: Vec<i8>,
}

impl WalkerEnsemble {
    pub fn new(params: PhysicalParams, count: usize, seed: u64) -> Result<Self> {
        if count < 1 {
            return Err(Error::InvalidParameter {
                name: "count",
                value: count as f64,
                reason: "need at least one walker",
            });
        }
        let blocks: Vec<Vec<(f64, f64, i8, i8)>> = (0..count.div_ceil(BLOCK))
            .into_par_iter()
            .map(|b| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(b as u64);
                let n = BLOCK.min(count - b * BLOCK);
                (0..n)
                    .map(|_| {
                        let x0: f64 = rng.sample::<f64, _>(StandardNormal) * params.sigma0();
                        let z: f64 = rng.sample(StandardNormal);
                        let s: bool = rng.random();
                        let s2: bool = rng.random();
                        (x0, z, if s { 1 } else { -1 }, if s2 { 1 } else { -1 })
                    })
                    .collect()
            })
            .collect();
        let mut ens = Self {
            params,
            seed,
            x0: Vec::with_capacity(count),
            du_draw: Vec::with_capacity(count),
            sign: Vec::with_capacity(count),
            du_sign: Vec::with_capacity(count),
        };
        for (x0, z, s, s2) in blocks.into_iter().flatten() {
            ens.x0.push(x0);
            ens.du_draw.push(z);
            ens.sign.push(s);
            ens.du_sign.push(s2);
        }
        Ok(ens)
    }

    pub fn len(&self) -> usize {
        self.x0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x0.is_empty()
    }

    /// Deterministic osmotic speed of walker `i` at time `t`.
    pub fn speed(&self, i: usize, t: f64) -> f64 {
        let p = &self.params;
        p.diffusion_constant() * self.x0[i].abs() / (p.sigma0() * sigma_t(p, t))
    }

    pub fn position(&self, i: usize, t: f64) -> f64 {
        let du = self.du_draw[i] * delta_u_variance(&self.params, t).sqrt();
        let v = self.speed(i, t) + f64::from(self.du_sign[i]) * du;
        self.x0[i] + f64::from(self.sign[i]) * v * t
    }

    /// Ensemble mean of `x(t)^2`, summed block-wise in a fixed order.
    pub fn mean_square(&self, t: f64) -> f64 {
        let partial: Vec<f64> = (0..self.len().div_ceil(BLOCK))
            .into_par_iter()
            .map(|b| {
                let end = ((b + 1) * BLOCK).min(self.len());
                (b * BLOCK..end).map(|i| self.position(i, t).powi(2)).sum()
            })
            .collect();
        partial.iter().sum::<f64>() / self.len() as f64
    }
}

/// Mean-square position of `count` fresh walkers at time `t`.
pub fn walker_ensemble_msd(params: &PhysicalParams, count: usize, t: f64, seed: u64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "t",
            value: t,
            reason: "must be >= 0",
        });
    }
    Ok(WalkerEnsemble::new(*params, count, seed)?.mean_square(t))
}
