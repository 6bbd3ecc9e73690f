//! Leapfrog for Hamiltonian proposals and Euler–Maruyama for overdamped ones.

use rand::Rng;

use crate::scalar::{lit, Scalar};

/// A force `-grad U1` as seen by an integrator.
pub trait ForceField<S: Scalar> {
    /// Called once before each integration step. Random-batch fields draw
    /// their batch here so both half-kicks of a step share it.
    fn begin_step(&mut self) {}

    /// Writes the force at `x` into `out`; `false` signals a non-finite force.
    fn force(&mut self, x: &[S], out: &mut [S]) -> bool;
}

impl<S: Scalar, F: FnMut(&[S], &mut [S]) -> bool> ForceField<S> for F {
    fn force(&mut self, x: &[S], out: &mut [S]) -> bool {
        self(x, out)
    }
}

/// How an integration ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outcome {
    /// `false` when a non-finite force stopped the trajectory early.
    pub completed: bool,
    pub force_evals: usize,
}

/// End point of a standalone leapfrog run.
#[derive(Debug, Clone, PartialEq)]
pub struct LeapfrogReport<S> {
    pub positions: Vec<S>,
    pub momenta: Vec<S>,
    /// Hamiltonian after each step, when traced.
    pub energies: Option<Vec<S>>,
    pub force_evals: usize,
    pub completed: bool,
}

/// Leapfrog integrator owning its force buffer, for use inside chain loops.
#[derive(Debug, Clone)]
pub struct Leapfrog<S> {
    force: Vec<S>,
}

impl<S: Scalar> Leapfrog<S> {
    pub fn new(dim: usize) -> Self {
        Self { force: vec![S::zero(); dim] }
    }

    fn ensure(&mut self, dim: usize) {
        if self.force.len() != dim {
            self.force.resize(dim, S::zero());
        }
    }

    /// `steps` kick-drift-kick steps with a deterministic force, evaluating
    /// it `steps + 1` times.
    pub fn run<F: ForceField<S>>(&mut self, x: &mut [S], p: &mut [S], field: &mut F, steps: usize, dt: S, mass: S) -> Outcome {
        self.integrate(x, p, field, steps, dt, mass, true, |_, _, _| {})
    }

    /// As [`run`](Self::run) but calling `begin_step` before every step and
    /// re-evaluating the force at its start: `2 * steps` evaluations.
    pub fn run_random_batch<F: ForceField<S>>(
        &mut self,
        x: &mut [S],
        p: &mut [S],
        field: &mut F,
        steps: usize,
        dt: S,
        mass: S,
    ) -> Outcome {
        self.integrate(x, p, field, steps, dt, mass, false, |_, _, _| {})
    }

    /// General form; `observe(step, x, p)` runs after each completed step.
    #[allow(clippy::too_many_arguments)]
    pub fn integrate<F: ForceField<S>>(
        &mut self,
        x: &mut [S],
        p: &mut [S],
        field: &mut F,
        steps: usize,
        dt: S,
        mass: S,
        reuse_force: bool,
        mut observe: impl FnMut(usize, &[S], &[S]),
    ) -> Outcome {
        self.ensure(x.len());
        let half = dt * lit::<S>(0.5);
        let mut evals = 0;
        let mut fresh = false;
        for step in 0..steps {
            if !reuse_force {
                field.begin_step();
            }
            if !(reuse_force && fresh) {
                evals += 1;
                if !field.force(x, &mut self.force) {
                    return Outcome { completed: false, force_evals: evals };
                }
            }
            for (pk, &fk) in p.iter_mut().zip(&self.force) {
                *pk += half * fk;
            }
            for (xk, &pk) in x.iter_mut().zip(p.iter()) {
                *xk += dt * pk / mass;
            }
            evals += 1;
            if !field.force(x, &mut self.force) {
                return Outcome { completed: false, force_evals: evals };
            }
            fresh = true;
            for (pk, &fk) in p.iter_mut().zip(&self.force) {
                *pk += half * fk;
            }
            observe(step, x, p);
        }
        Outcome { completed: true, force_evals: evals }
    }
}

fn standalone<S: Scalar, F: ForceField<S>>(
    x: &[S],
    p: &[S],
    field: &mut F,
    steps: usize,
    dt: S,
    mass: S,
    reuse: bool,
) -> LeapfrogReport<S> {
    let mut xs = x.to_vec();
    let mut ps = p.to_vec();
    let out = Leapfrog::new(x.len()).integrate(&mut xs, &mut ps, field, steps, dt, mass, reuse, |_, _, _| {});
    LeapfrogReport {
        positions: xs,
        momenta: ps,
        energies: None,
        force_evals: out.force_evals,
        completed: out.completed,
    }
}

/// Deterministic leapfrog from `(x, p)`.
pub fn leapfrog<S: Scalar, F: ForceField<S>>(x: &[S], p: &[S], field: &mut F, steps: usize, dt: S, mass: S) -> LeapfrogReport<S> {
    standalone(x, p, field, steps, dt, mass, true)
}

/// Leapfrog with a fresh batch per step, shared by that step's two half-kicks.
pub fn leapfrog_random_batch<S: Scalar, F: ForceField<S>>(
    x: &[S],
    p: &[S],
    field: &mut F,
    steps: usize,
    dt: S,
    mass: S,
) -> LeapfrogReport<S> {
    standalone(x, p, field, steps, dt, mass, false)
}

/// Deterministic leapfrog recording `energy(x, p)` after every step.
pub fn leapfrog_traced<S: Scalar, F: ForceField<S>>(
    x: &[S],
    p: &[S],
    field: &mut F,
    steps: usize,
    dt: S,
    mass: S,
    energy: impl Fn(&[S], &[S]) -> S,
) -> LeapfrogReport<S> {
    let mut xs = x.to_vec();
    let mut ps = p.to_vec();
    let mut trace = Vec::with_capacity(steps);
    let out = Leapfrog::new(x.len()).integrate(&mut xs, &mut ps, field, steps, dt, mass, true, |_, x, p| {
        trace.push(energy(x, p))
    });
    LeapfrogReport {
        positions: xs,
        momenta: ps,
        energies: Some(trace),
        force_evals: out.force_evals,
        completed: out.completed,
    }
}

/// One overdamped Langevin step `x += dt F(x) + sqrt(2 dt / beta) z`.
///
/// `force` is scratch space of the same length as `x`. Returns `false`, with
/// `x` untouched, if the force is non-finite.
pub fn euler_maruyama<S: Scalar, F: ForceField<S>, R: Rng + ?Sized>(
    x: &mut [S],
    field: &mut F,
    dt: S,
    beta: S,
    rng: &mut R,
    force: &mut [S],
) -> bool {
    if !field.force(x, force) {
        return false;
    }
    let noise = (lit::<S>(2.0) * dt / beta).sqrt();
    for (xk, &fk) in x.iter_mut().zip(force.iter()) {
        *xk += dt * fk + noise * S::standard_normal(rng);
    }
    true
}
