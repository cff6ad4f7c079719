//! Shared helpers for the integration suites: seeded random instance
//! generators, an independent power-iteration stationary oracle, word
//! enumeration, and a small digraph-isomorphism check.

#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pomdp_limavg::model::{Distribution, FiniteStrategy, Pomdp};
use pomdp_limavg::MarkovChain;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random distribution over a non-empty subset of `0..n` with support
/// size at most `max_support`.
pub fn random_dist(rng: &mut ChaCha8Rng, n: usize, max_support: usize) -> Distribution<f64> {
    let k = rng.gen_range(1..=max_support.min(n));
    let mut targets: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        targets.swap(i, j);
    }
    let mut entries: Vec<(usize, f64)> = Vec::with_capacity(k);
    let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(1..=8) as f64).collect();
    let total: f64 = weights.iter().sum();
    for (i, w) in weights.iter().enumerate() {
        entries.push((targets[i], w / total));
    }
    Distribution::new_unchecked(entries)
}

/// Random POMDP with surjective observations and rewards that are 1
/// with probability `reward_one_prob` (0 otherwise).
pub fn random_pomdp(
    rng: &mut ChaCha8Rng,
    max_states: usize,
    max_actions: usize,
    max_obs: usize,
    reward_one_prob: f64,
) -> Pomdp<f64> {
    let ns = rng.gen_range(1..=max_states);
    let na = rng.gen_range(1..=max_actions);
    let no = rng.gen_range(1..=max_obs.min(ns));
    let obs_of: Vec<usize> = (0..ns)
        .map(|s| if s < no { s } else { rng.gen_range(0..no) })
        .collect();
    let transition: Vec<Vec<Distribution<f64>>> = (0..ns)
        .map(|_| (0..na).map(|_| random_dist(rng, ns, 2)).collect())
        .collect();
    let reward: Vec<Vec<f64>> = (0..ns)
        .map(|_| {
            (0..na)
                .map(|_| if rng.gen::<f64>() < reward_one_prob { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    Pomdp {
        name: "random".into(),
        states: (0..ns).map(|s| format!("s{}", s)).collect(),
        actions: (0..na).map(|a| format!("a{}", a)).collect(),
        observations: (0..no).map(|o| format!("o{}", o)).collect(),
        obs_of,
        transition,
        reward,
        initial: 0,
    }
}

/// Random finite-memory strategy with at most `max_memory` elements.
pub fn random_strategy(
    rng: &mut ChaCha8Rng,
    model: &Pomdp<f64>,
    max_memory: usize,
) -> FiniteStrategy<f64> {
    let nm = rng.gen_range(1..=max_memory);
    let na = model.action_count();
    let no = model.observation_count();
    let next_action: Vec<Distribution<f64>> =
        (0..nm).map(|_| random_dist(rng, na, na)).collect();
    let update: Vec<Vec<Vec<Distribution<f64>>>> = (0..nm)
        .map(|_| {
            (0..no)
                .map(|_| (0..na).map(|_| random_dist(rng, nm, nm)).collect())
                .collect()
        })
        .collect();
    FiniteStrategy {
        name: "random".into(),
        memory: (0..nm).map(|m| format!("m{}", m)).collect(),
        initial_memory: 0,
        next_action,
        update,
    }
}

/// Independent stationary oracle: lazy power iteration pi <- (pi + pi P)/2
/// over the nodes of a recurrent class, which converges even on
/// periodic classes.
pub fn power_iteration_stationary(chain: &MarkovChain<f64>, class: &[usize]) -> Vec<f64> {
    let k = class.len();
    let pos: std::collections::HashMap<usize, usize> =
        class.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let mut pi = vec![1.0 / k as f64; k];
    for _ in 0..200_000 {
        let mut next = vec![0.0; k];
        for (i, &node) in class.iter().enumerate() {
            for &(t, p) in chain.step[node].entries() {
                next[pos[&t]] += pi[i] * p;
            }
        }
        let mut delta = 0.0f64;
        for i in 0..k {
            let mixed = 0.5 * (pi[i] + next[i]);
            delta = delta.max((mixed - pi[i]).abs());
            pi[i] = mixed;
        }
        if delta < 1e-14 {
            break;
        }
    }
    pi
}

/// All words of length 0..=max_len over `alphabet` letters, shortest
/// first.
pub fn all_words(alphabet: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for a in 0..alphabet {
                let mut w2 = w.clone();
                w2.push(a);
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Edge-labeled digraph isomorphism preserving a distinguished root,
/// by backtracking over bijections. Edges are `(from, label, to)`
/// triples. Only intended for graphs with a handful of vertices.
pub fn digraph_isomorphic(
    n: usize,
    root_a: usize,
    edges_a: &std::collections::BTreeSet<(usize, usize, usize)>,
    root_b: usize,
    edges_b: &std::collections::BTreeSet<(usize, usize, usize)>,
) -> bool {
    if edges_a.len() != edges_b.len() {
        return false;
    }
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    map[root_a] = root_b;
    used[root_b] = true;
    fn consistent(
        map: &[usize],
        edges_a: &std::collections::BTreeSet<(usize, usize, usize)>,
        edges_b: &std::collections::BTreeSet<(usize, usize, usize)>,
    ) -> bool {
        for &(u, l, v) in edges_a {
            if map[u] != usize::MAX && map[v] != usize::MAX
                && !edges_b.contains(&(map[u], l, map[v]))
            {
                return false;
            }
        }
        true
    }
    fn go(
        i: usize,
        n: usize,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        edges_a: &std::collections::BTreeSet<(usize, usize, usize)>,
        edges_b: &std::collections::BTreeSet<(usize, usize, usize)>,
    ) -> bool {
        if i == n {
            return true;
        }
        if map[i] != usize::MAX {
            return go(i + 1, n, map, used, edges_a, edges_b);
        }
        for j in 0..n {
            if used[j] {
                continue;
            }
            map[i] = j;
            used[j] = true;
            if consistent(map, edges_a, edges_b) && go(i + 1, n, map, used, edges_a, edges_b) {
                return true;
            }
            map[i] = usize::MAX;
            used[j] = false;
        }
        false
    }
    consistent(&map, edges_a, edges_b) && go(0, n, &mut map, &mut used, edges_a, edges_b)
}
