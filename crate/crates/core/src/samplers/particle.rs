use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::accept::metropolis_accept;
use crate::error::{invalid, Result};
use crate::forces::{batch_force_on_particle, force_on_particle, forces_all, short_range_u2_delta, BatchDraw, CellList, Part};
use crate::integrators::{euler_maruyama, ForceField, Leapfrog};
use crate::potentials::{Confinement, PairKernel, ParticleSystem};
use crate::rng::{fill_momentum, ChainStreams};
use crate::scalar::{lit, Scalar};

use super::{ChainSetup, Changed, GradClock, Kernel, SamplerKind, UpdateMode};

/// Chain over an interacting particle system.
///
/// Single-particle mode moves one uniformly chosen particle with the others
/// frozen and checks `U2` through a cell list; all-coordinates mode moves
/// the whole configuration, drawing an independent batch per particle.
pub struct ParticleChain<S: Scalar, C, K> {
    sys: ParticleSystem<S, C, K>,
    setup: ChainSetup,
    /// Batch size when strictly smaller than `N - 1`.
    sub_batch: Option<usize>,
    positions: Vec<S>,
    cells: Option<CellList<S>>,
    streams: ChainStreams,
    lf: Leapfrog<S>,
    x: Vec<S>,
    p: Vec<S>,
    force: Vec<S>,
    draws: Vec<BatchDraw>,
    clock: GradClock,
}

impl<S: Scalar, C: Confinement<S>, K: PairKernel<S>> ParticleChain<S, C, K> {
    pub fn new(sys: ParticleSystem<S, C, K>, init: Vec<S>, setup: ChainSetup) -> Result<Self> {
        let n = sys.n();
        let d = sys.dim();
        if init.len() != n * d {
            return Err(invalid(format!("expected {} initial coordinates, got {}", n * d, init.len())));
        }
        if init.iter().any(|v| !v.is_finite()) {
            return Err(invalid("initial positions must be finite"));
        }
        match setup.kind {
            SamplerKind::RbShmcBayes => {
                return Err(invalid("the mini-batch data sampler needs a data-indexed target"));
            }
            SamplerKind::RbShmcParticle if setup.batch_size.is_none() => {
                return Err(invalid("random-batch sampler needs a batch size"));
            }
            _ => {}
        }
        let uses_batch = matches!(setup.kind, SamplerKind::RbShmcParticle | SamplerKind::Rbmc);
        let sub_batch = match (uses_batch, setup.batch_size) {
            (true, Some(s)) if s == 0 || s > n - 1 => {
                return Err(invalid(format!("batch size must lie in 1..={}, got {s}", n - 1)));
            }
            (true, Some(s)) if s < n - 1 => Some(s),
            _ => None,
        };
        let cells = match (setup.mode, sys.cutoff()) {
            (UpdateMode::SingleParticle, Some(c)) => Some(CellList::new(&init, d, c)?),
            _ => None,
        };
        let width = match setup.mode {
            UpdateMode::SingleParticle => d,
            UpdateMode::AllCoordinates => n * d,
        };
        let draws = match setup.mode {
            UpdateMode::SingleParticle => vec![BatchDraw::new()],
            UpdateMode::AllCoordinates => vec![BatchDraw::new(); n],
        };
        Ok(Self {
            streams: ChainStreams::new(setup.seed, setup.chain),
            clock: GradClock::new(setup.time_gradients),
            sys,
            setup,
            sub_batch,
            positions: init,
            cells,
            lf: Leapfrog::new(width),
            x: vec![S::zero(); width],
            p: vec![S::zero(); width],
            force: vec![S::zero(); width],
            draws,
        })
    }

    pub fn system(&self) -> &ParticleSystem<S, C, K> {
        &self.sys
    }

    pub fn setup(&self) -> &ChainSetup {
        &self.setup
    }

    fn part(&self) -> Part {
        if self.setup.kind == SamplerKind::Hmc {
            Part::Full
        } else {
            Part::Smooth
        }
    }

    /// Whether the integrator goes through the per-step batch path.
    fn batch_path(&self) -> bool {
        matches!(self.setup.kind, SamplerKind::RbShmcParticle | SamplerKind::Rbmc) && self.setup.batch_size.is_some()
    }

    fn iterate_single(&mut self, steps: usize, dt: S) -> Result<(bool, Changed)> {
        let n = self.sys.n();
        let d = self.sys.dim();
        let beta = self.sys.beta_eff();
        let mass = self.sys.mass();
        let part = self.part();
        let batch_path = self.batch_path();
        let i = self.streams.particle.random_range(0..n);
        let old = &self.positions[i * d..(i + 1) * d];
        self.x.copy_from_slice(old);

        let mut field = SingleField {
            sys: &self.sys,
            part,
            i,
            positions: &self.positions,
            batch: self.sub_batch.map(|s| (s, &mut self.streams.batch, &mut self.draws[0])),
            clock: &mut self.clock,
        };
        let mut kinetic0 = S::zero();
        let completed = if self.setup.kind == SamplerKind::Rbmc {
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
        let old = &self.positions[i * d..(i + 1) * d];
        let delta = if self.setup.kind == SamplerKind::Hmc {
            self.sys.u_local(i, &self.x, &self.positions) - self.sys.u_local(i, old, &self.positions)
                + kinetic(&self.p, mass)
                - kinetic0
        } else if let Some(cells) = &self.cells {
            short_range_u2_delta(&self.sys, i, old, &self.x, &self.positions, cells)
        } else {
            S::zero()
        };
        if !metropolis_accept(delta, beta, u)? {
            return Ok((false, Changed::Nothing));
        }
        self.positions[i * d..(i + 1) * d].copy_from_slice(&self.x);
        if let Some(cells) = &mut self.cells {
            cells.relocate(i, &self.x);
        }
        Ok((true, Changed::Particle(i)))
    }

    fn iterate_all(&mut self, steps: usize, dt: S) -> Result<(bool, Changed)> {
        let beta = self.sys.beta_eff();
        let mass = self.sys.mass();
        let part = self.part();
        let batch_path = self.batch_path();
        self.x.copy_from_slice(&self.positions);
        let mut field = AllField {
            sys: &self.sys,
            part,
            batch: self.sub_batch.map(|s| (s, &mut self.streams.batch)),
            draws: &mut self.draws,
            clock: &mut self.clock,
        };
        let mut kinetic0 = S::zero();
        let completed = if self.setup.kind == SamplerKind::Rbmc {
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
        let delta = if self.setup.kind == SamplerKind::Hmc {
            self.sys.total_u(&self.x) - self.sys.total_u(&self.positions) + kinetic(&self.p, mass) - kinetic0
        } else if self.sys.cutoff().is_some() {
            self.sys.total_u2(&self.x) - self.sys.total_u2(&self.positions)
        } else {
            S::zero()
        };
        if !metropolis_accept(delta, beta, u)? {
            return Ok((false, Changed::Nothing));
        }
        self.positions.copy_from_slice(&self.x);
        Ok((true, Changed::All))
    }
}

fn kinetic<S: Scalar>(p: &[S], mass: S) -> S {
    p.iter().map(|&v| v * v).sum::<S>() / (lit::<S>(2.0) * mass)
}

impl<S: Scalar, C: Confinement<S>, K: PairKernel<S>> Kernel<S> for ParticleChain<S, C, K> {
    fn positions(&self) -> &[S] {
        &self.positions
    }

    fn n_particles(&self) -> usize {
        self.sys.n()
    }

    fn moves_all(&self) -> bool {
        self.setup.mode == UpdateMode::AllCoordinates
    }

    fn iterate(&mut self, steps: usize, dt: S) -> Result<(bool, Changed)> {
        match self.setup.mode {
            UpdateMode::SingleParticle => self.iterate_single(steps, dt),
            UpdateMode::AllCoordinates => self.iterate_all(steps, dt),
        }
    }

    fn grad_time(&self) -> f64 {
        self.clock.seconds()
    }
}

struct SingleField<'a, S: Scalar, C, K> {
    sys: &'a ParticleSystem<S, C, K>,
    part: Part,
    i: usize,
    positions: &'a [S],
    batch: Option<(usize, &'a mut ChaCha8Rng, &'a mut BatchDraw)>,
    clock: &'a mut GradClock,
}

impl<S: Scalar, C: Confinement<S>, K: PairKernel<S>> ForceField<S> for SingleField<'_, S, C, K> {
    fn begin_step(&mut self) {
        if let Some((s, rng, draw)) = &mut self.batch {
            draw.redraw_excluding(&mut **rng, self.sys.n(), self.i, *s);
        }
    }

    #[inline]
    fn force(&mut self, x: &[S], out: &mut [S]) -> bool {
        let (sys, part, i, positions) = (self.sys, self.part, self.i, self.positions);
        match &self.batch {
            Some((_, _, draw)) => self.clock.time(|| batch_force_on_particle(sys, x, positions, draw, out)),
            None => self.clock.time(|| force_on_particle(part, sys, i, x, positions, out)),
        }
    }
}

struct AllField<'a, S: Scalar, C, K> {
    sys: &'a ParticleSystem<S, C, K>,
    part: Part,
    batch: Option<(usize, &'a mut ChaCha8Rng)>,
    draws: &'a mut [BatchDraw],
    clock: &'a mut GradClock,
}

impl<S: Scalar, C: Confinement<S>, K: PairKernel<S>> ForceField<S> for AllField<'_, S, C, K> {
    fn begin_step(&mut self) {
        if let Some((s, rng)) = &mut self.batch {
            let n = self.sys.n();
            for (i, draw) in self.draws.iter_mut().enumerate() {
                draw.redraw_excluding(&mut **rng, n, i, *s);
            }
        }
    }

    fn force(&mut self, x: &[S], out: &mut [S]) -> bool {
        let (sys, part, draws) = (self.sys, self.part, &*self.draws);
        let batched = self.batch.is_some();
        self.clock.time(|| {
            if !batched {
                return forces_all(part, sys, x, out);
            }
            let d = sys.dim();
            let mut ok = true;
            for (i, draw) in draws.iter().enumerate() {
                ok &= batch_force_on_particle(sys, &x[i * d..(i + 1) * d], x, draw, &mut out[i * d..(i + 1) * d]);
            }
            ok
        })
    }
}
