//! Base and strong generating set for a permutation group.
//!
//! Construction runs a seeded random Schreier–Sims pass, then a deterministic
//! completion that sifts every Schreier generator of every level. The random
//! pass only affects speed; the completion makes the chain exact for any seed.

use num_bigint::BigUint;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::perm::Permutation;

/// Consecutive successful sifts that end the random phase.
const RANDOM_QUIET_ROUNDS: usize = 24;
const PRODUCT_REPLACEMENT_SLOTS: usize = 10;
const PRODUCT_REPLACEMENT_WARMUP: usize = 60;

#[derive(Debug, Clone)]
struct Level {
    base_point: usize,
    /// Strong generators fixing every earlier base point.
    generators: Vec<Permutation>,
    /// Basic orbit in discovery order.
    orbit: Vec<usize>,
    /// `inv_reps[β] = u_β^{-1}` where `u_β` maps the base point to `β`.
    inv_reps: Vec<Option<Permutation>>,
}

impl Level {
    fn new(base_point: usize, degree: usize) -> Self {
        let mut inv_reps = vec![None; degree];
        inv_reps[base_point] = Some(Permutation::identity(degree));
        Level {
            base_point,
            generators: Vec::new(),
            orbit: vec![base_point],
            inv_reps,
        }
    }

    fn rep(&self, beta: usize) -> Option<Permutation> {
        self.inv_reps[beta].as_ref().map(Permutation::inverse)
    }

    /// Adds a generator and extends the orbit and transversal.
    fn add_generator(&mut self, g: Permutation) {
        self.generators.push(g);
        let new = self.generators.len() - 1;
        // Existing points only need the new generator; points found along
        // the way need all of them.
        let mut frontier: Vec<usize> = Vec::new();
        for i in 0..self.orbit.len() {
            let beta = self.orbit[i];
            if let Some(p) = self.try_extend(beta, new) {
                frontier.push(p);
            }
        }
        while let Some(beta) = frontier.pop() {
            for s in 0..self.generators.len() {
                if let Some(p) = self.try_extend(beta, s) {
                    frontier.push(p);
                }
            }
        }
    }

    fn try_extend(&mut self, beta: usize, s: usize) -> Option<usize> {
        let g = &self.generators[s];
        let gamma = g.apply0(beta);
        if self.inv_reps[gamma].is_some() {
            return None;
        }
        // u_γ = g ∘ u_β, so u_γ^{-1} = u_β^{-1} ∘ g^{-1}
        let inv_beta = self.inv_reps[beta]
            .as_ref()
            .expect("orbit point has a representative");
        let inv_gamma = inv_beta.compose_unchecked(&g.inverse());
        self.inv_reps[gamma] = Some(inv_gamma);
        self.orbit.push(gamma);
        Some(gamma)
    }
}

/// A verified stabilizer chain.
#[derive(Debug, Clone)]
pub struct StabilizerChain {
    degree: usize,
    levels: Vec<Level>,
    generators: Vec<Permutation>,
}

impl StabilizerChain {
    /// Builds the chain of `⟨generators⟩`. All generators must share one
    /// degree; an empty list gives the trivial group of degree 0.
    pub fn build(generators: &[Permutation], seed: u64) -> Result<Self> {
        let degree = generators.first().map_or(0, Permutation::degree);
        for g in generators {
            if g.degree() != degree {
                return Err(Error::DegreeMismatch {
                    left: degree,
                    right: g.degree(),
                });
            }
        }
        let mut chain = StabilizerChain {
            degree,
            levels: Vec::new(),
            generators: generators.to_vec(),
        };
        let nontrivial: Vec<Permutation> = generators
            .iter()
            .filter(|g| !g.is_identity())
            .cloned()
            .collect();
        if nontrivial.is_empty() {
            return Ok(chain);
        }
        for g in &nontrivial {
            chain.sift_and_add(g.clone(), 0);
        }
        chain.random_phase(&nontrivial, seed);
        chain.complete();
        Ok(chain)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// The generators the chain was built from.
    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    /// Base points, 1-based.
    pub fn base(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.base_point + 1).collect()
    }

    /// Basic orbit sizes along the base.
    pub fn orbit_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.orbit.len()).collect()
    }

    /// All strong generators (each listed once, at the deepest level it is
    /// attached to first).
    pub fn strong_generators(&self) -> Vec<Permutation> {
        let mut out: Vec<Permutation> = Vec::new();
        for level in &self.levels {
            for g in &level.generators {
                if !out.contains(g) {
                    out.push(g.clone());
                }
            }
        }
        out
    }

    pub fn order(&self) -> BigUint {
        self.levels
            .iter()
            .fold(BigUint::one(), |acc, l| acc * BigUint::from(l.orbit.len()))
    }

    pub fn contains(&self, g: &Permutation) -> Result<bool> {
        if g.degree() != self.degree {
            return Err(Error::DegreeMismatch {
                left: self.degree,
                right: g.degree(),
            });
        }
        let (residue, depth) = self.sift(g.clone(), 0);
        Ok(depth == self.levels.len() && residue.is_identity())
    }

    /// A uniformly random element, as a product of random transversal
    /// representatives.
    pub fn random_element(&self, seed: u64) -> Permutation {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = Permutation::identity(self.degree);
        for level in self.levels.iter().rev() {
            let beta = level.orbit[rng.gen_range(0..level.orbit.len())];
            let u = level.rep(beta).expect("orbit point has a representative");
            g = u.compose_unchecked(&g);
        }
        g
    }

    /// Strips `g` through the levels starting at `from`. Returns the residue
    /// and the index of the first level where stripping failed (or the chain
    /// length when it went all the way down).
    fn sift(&self, mut g: Permutation, from: usize) -> (Permutation, usize) {
        for (i, level) in self.levels.iter().enumerate().skip(from) {
            let beta = g.apply0(level.base_point);
            match &level.inv_reps[beta] {
                Some(inv) => g = inv.compose_unchecked(&g),
                None => return (g, i),
            }
        }
        (g, self.levels.len())
    }

    /// Sifts `g` from level `from`; on failure adds the residue as a strong
    /// generator. Returns the deepest level index that changed.
    fn sift_and_add(&mut self, g: Permutation, from: usize) -> Option<usize> {
        let (residue, depth) = self.sift(g, from);
        if residue.is_identity() {
            return None;
        }
        if depth == self.levels.len() {
            let point = residue.first_moved().expect("non-identity moves a point") - 1;
            self.levels.push(Level::new(point, self.degree));
        }
        // The residue fixes the base points before `depth`, so it lies in
        // every stabilizer from `from` down to `depth`.
        for l in from..=depth {
            self.levels[l].add_generator(residue.clone());
        }
        Some(depth)
    }

    fn random_phase(&mut self, gens: &[Permutation], seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pool = ProductReplacement::new(gens, &mut rng);
        let mut quiet = 0;
        while quiet < RANDOM_QUIET_ROUNDS {
            let g = pool.next(&mut rng);
            if self.sift_and_add(g, 0).is_some() {
                quiet = 0;
            } else {
                quiet += 1;
            }
        }
    }

    /// Deterministic Schreier–Sims completion: every Schreier generator of
    /// every level must sift through the levels below it.
    fn complete(&mut self) {
        let mut i = self.levels.len();
        'outer: while i > 0 {
            let level_idx = i - 1;
            let orbit = self.levels[level_idx].orbit.clone();
            let n_gens = self.levels[level_idx].generators.len();
            for &beta in &orbit {
                let u_beta = self.levels[level_idx].rep(beta).expect("orbit point");
                for s in 0..n_gens {
                    let level = &self.levels[level_idx];
                    let gen = &level.generators[s];
                    let image = gen.apply0(beta);
                    let inv = level.inv_reps[image].as_ref().expect("orbit is closed");
                    let schreier = inv.compose_unchecked(&gen.compose_unchecked(&u_beta));
                    if schreier.is_identity() {
                        continue;
                    }
                    if let Some(depth) = self.sift_and_add(schreier, level_idx + 1) {
                        i = depth + 1;
                        continue 'outer;
                    }
                }
            }
            i -= 1;
        }
    }
}

/// Product-replacement random element generator.
struct ProductReplacement {
    slots: Vec<Permutation>,
    accumulator: Permutation,
}

impl ProductReplacement {
    fn new(gens: &[Permutation], rng: &mut ChaCha8Rng) -> Self {
        let n = PRODUCT_REPLACEMENT_SLOTS.max(gens.len());
        let slots = (0..n).map(|i| gens[i % gens.len()].clone()).collect();
        let mut pr = ProductReplacement {
            slots,
            accumulator: Permutation::identity(gens[0].degree()),
        };
        for _ in 0..PRODUCT_REPLACEMENT_WARMUP {
            pr.next(rng);
        }
        pr
    }

    fn next(&mut self, rng: &mut ChaCha8Rng) -> Permutation {
        let n = self.slots.len();
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let factor = if rng.gen_bool(0.5) {
            self.slots[j].clone()
        } else {
            self.slots[j].inverse()
        };
        self.slots[i] = if rng.gen_bool(0.5) {
            self.slots[i].compose_unchecked(&factor)
        } else {
            factor.compose_unchecked(&self.slots[i])
        };
        self.accumulator = self.accumulator.compose_unchecked(&self.slots[i]);
        self.accumulator.clone()
    }
}
