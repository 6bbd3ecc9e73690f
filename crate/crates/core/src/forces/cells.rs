use std::collections::HashMap;

use crate::error::{invalid, Result};
use crate::potentials::{Confinement, PairKernel, ParticleSystem};
use crate::scalar::Scalar;

type Key = [i64; 3];

const MAX_DIM: usize = 3;
const MAX_KEYS: usize = 54;

/// Uniform spatial buckets of side `width` for `dim <= 3`.
///
/// Only occupied cells are stored. A particle is moved between buckets only
/// when it crosses a cell boundary.
#[derive(Debug, Clone)]
pub struct CellList<S> {
    dim: usize,
    width: S,
    cells: HashMap<Key, Vec<usize>>,
    home: Vec<Key>,
}

impl<S: Scalar> CellList<S> {
    pub fn new(positions: &[S], dim: usize, width: S) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(invalid(format!("cell lists support 1 to {MAX_DIM} dimensions, got {dim}")));
        }
        if !(width > S::zero()) || !width.is_finite() {
            return Err(invalid("cell width must be positive"));
        }
        if !positions.len().is_multiple_of(dim) {
            return Err(invalid("positions length is not a multiple of the dimension"));
        }
        let mut list = Self { dim, width, cells: HashMap::new(), home: Vec::new() };
        list.rebuild(positions);
        Ok(list)
    }

    pub fn rebuild(&mut self, positions: &[S]) {
        self.cells.clear();
        self.home.clear();
        for (i, x) in positions.chunks_exact(self.dim).enumerate() {
            let key = self.key(x);
            self.home.push(key);
            self.cells.entry(key).or_default().push(i);
        }
    }

    pub fn width(&self) -> S {
        self.width
    }

    pub fn len(&self) -> usize {
        self.home.len()
    }

    pub fn is_empty(&self) -> bool {
        self.home.is_empty()
    }

    #[inline]
    pub fn key(&self, x: &[S]) -> Key {
        let mut k = [0i64; 3];
        for (slot, &v) in k.iter_mut().zip(x) {
            *slot = (v / self.width).floor().to_i64().unwrap_or(if v > S::zero() { i64::MAX } else { i64::MIN });
        }
        k
    }

    /// Records that particle `i` now sits at `x`.
    pub fn relocate(&mut self, i: usize, x: &[S]) {
        let key = self.key(x);
        let old = self.home[i];
        if key == old {
            return;
        }
        if let Some(members) = self.cells.get_mut(&old) {
            if let Some(pos) = members.iter().position(|&m| m == i) {
                members.swap_remove(pos);
            }
            if members.is_empty() {
                self.cells.remove(&old);
            }
        }
        self.cells.entry(key).or_default().push(i);
        self.home[i] = key;
    }

    fn push_adjacent(&self, centre: Key, keys: &mut [Key; MAX_KEYS], count: &mut usize) {
        let span = |axis: usize| if axis < self.dim { -1i64..=1 } else { 0..=0 };
        for a in span(0) {
            for b in span(1) {
                for c in span(2) {
                    let k = [
                        centre[0].saturating_add(a),
                        centre[1].saturating_add(b),
                        centre[2].saturating_add(c),
                    ];
                    if !keys[..*count].contains(&k) {
                        keys[*count] = k;
                        *count += 1;
                    }
                }
            }
        }
    }

    /// Calls `f` for every particle in a cell adjacent to any of `points`
    /// (at most two points), each particle once.
    pub fn for_each_near(&self, points: &[&[S]], mut f: impl FnMut(usize)) {
        debug_assert!(points.len() <= 2);
        let mut keys = [[0i64; 3]; MAX_KEYS];
        let mut count = 0;
        for p in points {
            self.push_adjacent(self.key(p), &mut keys, &mut count);
        }
        for k in &keys[..count] {
            if let Some(members) = self.cells.get(k) {
                for &j in members {
                    f(j);
                }
            }
        }
    }

    /// Indices `j != exclude` with `|x_j - x| < radius`; needs `radius <= width`.
    pub fn neighbors_within(&self, x: &[S], radius: S, positions: &[S], exclude: Option<usize>) -> Vec<usize> {
        let d = self.dim;
        let mut out = Vec::new();
        self.for_each_near(&[x], |j| {
            if Some(j) == exclude {
                return;
            }
            let r2: S = x
                .iter()
                .zip(&positions[j * d..(j + 1) * d])
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum();
            if r2 < radius * radius {
                out.push(j);
            }
        });
        out.sort_unstable();
        out
    }
}

/// `U2` change when particle `i` moves from `old` to `new`, summed over the
/// neighbours the cell list reports near either endpoint.
///
/// Returns `+inf` when the new position is singular. Requires a cell width
/// of at least the kernel cutoff.
pub fn short_range_u2_delta<S, C, K>(
    sys: &ParticleSystem<S, C, K>,
    i: usize,
    old: &[S],
    new: &[S],
    positions: &[S],
    cells: &CellList<S>,
) -> S
where
    S: Scalar,
    C: Confinement<S>,
    K: PairKernel<S>,
{
    if sys.cutoff().is_none() {
        return S::zero();
    }
    let d = sys.dim();
    let k = sys.kernel();
    let mut gain = S::zero();
    let mut loss = S::zero();
    cells.for_each_near(&[old, new], |j| {
        if j == i {
            return;
        }
        let xj = &positions[j * d..(j + 1) * d];
        gain += k.phi2(sys.distance(new, xj));
        loss += k.phi2(sys.distance(old, xj));
    });
    if gain == S::infinity() {
        return S::infinity();
    }
    (gain - loss) * sys.pair_scale()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn relocation_keeps_every_particle_in_one_cell() {
        let mut pos = vec![0.0f64, 0.5, 0.013, -0.7, 0.011];
        let mut cells = CellList::new(&pos, 1, 0.01).unwrap();
        pos[2] = -0.695;
        cells.relocate(2, &pos[2..3]);
        let mut seen = vec![0; 5];
        for members in cells.cells.values() {
            for &m in members {
                seen[m] += 1;
            }
        }
        assert_eq!(seen, vec![1; 5]);
        assert_eq!(cells.neighbors_within(&[-0.7], 0.01, &pos, Some(3)), vec![2]);
    }

    #[test]
    fn isolated_move_has_no_short_range_change() {
        let sys = ParticleSystem::<f64, _, _>::dyson(4, 1.0).unwrap();
        let pos = vec![-1.0, -0.5, 0.5, 1.0];
        let cells = CellList::new(&pos, 1, 0.01).unwrap();
        assert_eq!(short_range_u2_delta(&sys, 0, &[-1.0], &[-0.9], &pos, &cells), 0.0);
    }

    #[test]
    fn coincident_move_is_infinite() {
        let sys = ParticleSystem::<f64, _, _>::dyson(3, 1.0).unwrap();
        let pos = vec![0.0, 0.3, 1.0];
        let cells = CellList::new(&pos, 1, 0.01).unwrap();
        assert_eq!(short_range_u2_delta(&sys, 0, &[0.0], &[0.3], &pos, &cells), f64::INFINITY);
    }

    #[test]
    fn matches_brute_force_on_crowded_configuration() {
        let sys = ParticleSystem::<f64, _, _>::dyson(10, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let pos: Vec<f64> = (0..10).map(|_| rng.random_range(-0.03..0.03)).collect();
            let cells = CellList::new(&pos, 1, 0.01).unwrap();
            let i = rng.random_range(0..10);
            let new = [pos[i] + rng.random_range(-0.02..0.02)];
            let fast = short_range_u2_delta(&sys, i, &pos[i..i + 1], &new, &pos, &cells);
            let brute = sys.u2_local(i, &new, &pos) - sys.u2_local(i, &pos[i..i + 1], &pos);
            assert!((fast - brute).abs() <= 1e-12 * brute.abs().max(1.0), "{fast} vs {brute}");
        }
    }
}
