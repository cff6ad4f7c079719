//! Seeded Monte Carlo simulation of a POMDP under a finite-memory
//! strategy. The generator is ChaCha8 seeded directly from the user
//! seed, so trajectories are bit-identical across runs and platforms.

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{validate_strategy, FiniteStrategy, Pomdp};
use crate::num::Real;

/// Outcome of one simulated trajectory.
#[derive(Clone, Debug)]
pub struct SimulationReport<R: Real = f64> {
    pub steps: usize,
    pub seed: u64,
    /// Running-average reward over the trajectory.
    pub empirical_average: R,
    /// Visits per product node `(state, memory)`, including the start.
    pub visit_counts: HashMap<(usize, usize), u64>,
}

/// Samples one trajectory of the product process for `steps` steps.
pub fn simulate<R: Real>(
    model: &Pomdp<R>,
    sigma: &FiniteStrategy<R>,
    steps: usize,
    seed: u64,
) -> Result<SimulationReport<R>> {
    if steps == 0 {
        return Err(Error::input("simulation needs at least one step"));
    }
    let violations = validate_strategy(model, sigma);
    if let Some(v) = violations.first() {
        return Err(Error::input(format!("invalid strategy: {}", v)));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = model.initial;
    let mut m = sigma.initial_memory;
    let mut total = R::zero();
    let mut visit_counts: HashMap<(usize, usize), u64> = HashMap::new();
    *visit_counts.entry((s, m)).or_insert(0) += 1;

    for _ in 0..steps {
        let a = sigma.next_action[m].sample_with(rng.gen::<f64>());
        total += model.reward[s][a];
        let s2 = model.transition[s][a].sample_with(rng.gen::<f64>());
        let o = model.obs_of[s2];
        let m2 = sigma.update[m][o][a].sample_with(rng.gen::<f64>());
        s = s2;
        m = m2;
        *visit_counts.entry((s, m)).or_insert(0) += 1;
    }

    let empirical_average = total / R::of(steps as f64);
    Ok(SimulationReport { steps, seed, empirical_average, visit_counts })
}
