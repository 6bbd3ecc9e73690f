use rand_chacha::ChaCha8Rng;

use crate::accept::metropolis_accept;
use crate::error::{invalid, Result};
use crate::forces::BatchDraw;
use crate::integrators::{euler_maruyama, ForceField, Leapfrog};
use crate::potentials::VectorTarget;
use crate::rng::{fill_momentum, ChainStreams};
use crate::scalar::{lit, Scalar};

use super::{ChainSetup, Changed, GradClock, Kernel, SamplerKind};

/// Chain over a single parameter vector; every iteration moves all coordinates.
pub struct VectorChain<S: Scalar, T> {
    target: T,
    setup: ChainSetup,
    sub_batch: Option<usize>,
    x0: Vec<S>,
    x: Vec<S>,
    p: Vec<S>,
    force: Vec<S>,
    lf: Leapfrog<S>,
    draw: BatchDraw,
    streams: ChainStreams,
    clock: GradClock,
}

impl<S: Scalar, T: VectorTarget<S>> VectorChain<S, T> {
    pub fn new(target: T, init: Vec<S>, setup: ChainSetup) -> Result<Self> {
        let d = target.dim();
        if init.len() != d {
            return Err(invalid(format!("expected {d} initial coordinates, got {}", init.len())));
        }
        if init.iter().any(|v| !v.is_finite()) {
            return Err(invalid("initial point must be finite"));
        }
        let uses_batch = matches!(setup.kind, SamplerKind::RbShmcBayes | SamplerKind::Rbmc);
        let sub_batch = match setup.kind {
            SamplerKind::RbShmcParticle => {
                return Err(invalid("the pair random-batch sampler needs a particle system"));
            }
            SamplerKind::RbShmcBayes if setup.batch_size.is_none() => {
                return Err(invalid("mini-batch sampler needs a batch size"));
            }
            _ if uses_batch && setup.batch_size.is_some() => {
                let s = setup.batch_size.unwrap();
                let n = target
                    .data_len()
                    .ok_or_else(|| invalid("target has no data to batch over"))?;
                if s == 0 || s > n {
                    return Err(invalid(format!("batch size must lie in 1..={n}, got {s}")));
                }
                (s < n).then_some(s)
            }
            _ => None,
        };
        Ok(Self {
            streams: ChainStreams::new(setup.seed, setup.chain),
            clock: GradClock::new(setup.time_gradients),
            lf: Leapfrog::new(d),
            x: init.clone(),
            p: vec![S::zero(); d],
            force: vec![S::zero(); d],
            draw: BatchDraw::new(),
            x0: init,
            target,
            setup,
            sub_batch,
        })
    }

    pub fn target(&self) -> &T {
        &self.target
    }

    fn batch_path(&self) -> bool {
        matches!(self.setup.kind, SamplerKind::RbShmcBayes | SamplerKind::Rbmc) && self.setup.batch_size.is_some()
    }
}

impl<S: Scalar, T: VectorTarget<S>> Kernel<S> for VectorChain<S, T> {
    fn positions(&self) -> &[S] {
        &self.x0
    }

    fn n_particles(&self) -> usize {
        1
    }

    fn moves_all(&self) -> bool {
        true
    }

    fn iterate(&mut self, steps: usize, dt: S) -> Result<(bool, Changed)> {
        let beta = self.target.beta();
        let mass = self.target.mass();
        let kind = self.setup.kind;
        let batch_path = self.batch_path();
        self.x.copy_from_slice(&self.x0);
        let mut field = TargetField {
            target: &self.target,
            full_u: kind == SamplerKind::Hmc,
            batch: self.sub_batch.map(|s| (s, &mut self.streams.batch)),
            draw: &mut self.draw,
            clock: &mut self.clock,
        };
        let mut kinetic0 = S::zero();
        let completed = if kind == SamplerKind::Rbmc {
            let mut ok = true;
            for _ in 0..steps {
                field.begin_step();
                if !euler_maruyama(&mut self.x, &mut field, dt, beta, &mut self.streams.momentum, &mut self.force) {
                    ok = false;
                    break;
                }
            }
            ok
        } else {
            fill_momentum(&mut self.streams.momentum, &mut self.p, mass, beta);
            kinetic0 = kinetic(&self.p, mass);
            let out = if batch_path {
                self.lf.run_random_batch(&mut self.x, &mut self.p, &mut field, steps, dt, mass)
            } else {
                self.lf.run(&mut self.x, &mut self.p, &mut field, steps, dt, mass)
            };
            out.completed
        };

        let u: S = S::unit_uniform(&mut self.streams.uniform);
        if !completed || self.x.iter().any(|v| !v.is_finite()) {
            return Ok((false, Changed::Nothing));
        }
        let delta = if kind == SamplerKind::Hmc {
            self.target.u(&self.x) - self.target.u(&self.x0) + kinetic(&self.p, mass) - kinetic0
        } else {
            self.target.u2(&self.x) - self.target.u2(&self.x0)
        };
        if !metropolis_accept(delta, beta, u)? {
            return Ok((false, Changed::Nothing));
        }
        self.x0.copy_from_slice(&self.x);
        Ok((true, Changed::All))
    }

    fn grad_time(&self) -> f64 {
        self.clock.seconds()
    }
}

fn kinetic<S: Scalar>(p: &[S], mass: S) -> S {
    p.iter().map(|&v| v * v).sum::<S>() / (lit::<S>(2.0) * mass)
}

struct TargetField<'a, T> {
    target: &'a T,
    full_u: bool,
    batch: Option<(usize, &'a mut ChaCha8Rng)>,
    draw: &'a mut BatchDraw,
    clock: &'a mut GradClock,
}

impl<S: Scalar, T: VectorTarget<S>> ForceField<S> for TargetField<'_, T> {
    fn begin_step(&mut self) {
        if let Some((s, rng)) = &mut self.batch {
            let n = self.target.data_len().unwrap_or(0);
            self.draw.redraw(&mut **rng, n, *s);
        }
    }

    fn force(&mut self, x: &[S], out: &mut [S]) -> bool {
        let (target, draw, full_u, batched) = (self.target, &*self.draw, self.full_u, self.batch.is_some());
        self.clock.time(|| {
            if full_u {
                target.grad_u(x, out);
            } else if batched {
                target.grad_u1_batch(x, draw.indices(), out);
            } else {
                target.grad_u1(x, out);
            }
        });
        let mut ok = true;
        for o in out.iter_mut() {
            if !o.is_finite() {
                ok = false;
            }
            *o = -*o;
        }
        ok
    }
}
