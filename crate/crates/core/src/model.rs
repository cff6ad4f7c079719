//! POMDP and strategy data model, validation, and belief updates.

use std::collections::HashMap;

use crate::bits::{Mask64, MASK_CAPACITY};
use crate::error::{Error, Result};
use crate::num::Real;

/// A probability distribution over an indexed finite set, stored sparsely
/// as `(index, probability)` pairs sorted by index. Entries are strictly
/// positive; the support is never empty.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution<R: Real = f64> {
    entries: Vec<(usize, R)>,
}

impl<R: Real> Distribution<R> {
    /// Checked constructor: drops exact zeros, rejects entries below the
    /// support cutoff, duplicate indices, and sums off one by more than
    /// the tolerance.
    pub fn new(mut entries: Vec<(usize, R)>) -> Result<Distribution<R>> {
        entries.retain(|&(_, p)| p != R::zero());
        entries.sort_by_key(|&(i, _)| i);
        if entries.is_empty() {
            return Err(Error::input("distribution has empty support"));
        }
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::input(format!(
                    "duplicate index {} in distribution",
                    w[0].0
                )));
            }
        }
        let mut sum = R::zero();
        for &(i, p) in &entries {
            if p < R::zero() {
                return Err(Error::input(format!("negative probability at index {i}")));
            }
            if p < R::support_cutoff() {
                return Err(Error::input(format!(
                    "probability {p} at index {i} is below the support cutoff; write 0 or a larger value"
                )));
            }
            sum += p;
        }
        if (sum - R::one()).abs() > R::sum_tolerance() {
            return Err(Error::input(format!("distribution sums to {sum}, not 1")));
        }
        Ok(Distribution { entries })
    }

    /// Unchecked constructor for staging possibly-invalid data that a
    /// validator will inspect afterwards.
    pub fn new_unchecked(mut entries: Vec<(usize, R)>) -> Distribution<R> {
        entries.sort_by_key(|&(i, _)| i);
        Distribution { entries }
    }

    pub fn dirac(i: usize) -> Distribution<R> {
        Distribution {
            entries: vec![(i, R::one())],
        }
    }

    pub fn uniform(items: impl IntoIterator<Item = usize>) -> Result<Distribution<R>> {
        let items: Vec<usize> = items.into_iter().collect();
        if items.is_empty() {
            return Err(Error::input("uniform distribution over empty set"));
        }
        let p = R::one() / R::of(items.len() as f64);
        Distribution::new(items.into_iter().map(|i| (i, p)).collect())
    }

    pub fn entries(&self) -> &[(usize, R)] {
        &self.entries
    }

    pub fn prob(&self, i: usize) -> R {
        self.entries
            .iter()
            .find(|&&(j, _)| j == i)
            .map(|&(_, p)| p)
            .unwrap_or_else(R::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().filter(|&&(_, p)| p > R::zero()).map(|&(i, _)| i)
    }

    pub fn support_mask(&self) -> Mask64 {
        self.support().collect()
    }

    pub fn is_dirac(&self) -> bool {
        self.entries.len() == 1
    }

    pub fn sum(&self) -> R {
        self.entries.iter().map(|&(_, p)| p).sum()
    }

    /// Checks the construction invariants; used by validators over
    /// possibly-unchecked data.
    pub fn check(&self) -> Result<()> {
        Distribution::new(self.entries.clone()).map(|_| ())
    }

    /// Samples an index given a uniform draw in [0, 1).
    pub fn sample_with(&self, draw: f64) -> usize {
        let mut acc = 0.0;
        for &(i, p) in &self.entries {
            acc += p.as_f64();
            if draw < acc {
                return i;
            }
        }
        self.entries.last().expect("non-empty support").0
    }
}

/// A belief: the non-empty set of states the system can occupy with
/// positive probability given the observation/action history.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Belief(pub Mask64);

impl Belief {
    pub fn singleton(s: usize) -> Belief {
        Belief(Mask64::singleton(s))
    }

    pub fn members(&self) -> impl Iterator<Item = usize> {
        self.0.iter()
    }
}

/// A partially observable MDP with a reward function on state-action
/// pairs and a single observation per state.
#[derive(Clone, Debug)]
pub struct Pomdp<R: Real = f64> {
    pub name: String,
    pub states: Vec<String>,
    pub actions: Vec<String>,
    pub observations: Vec<String>,
    /// Observation index of each state.
    pub obs_of: Vec<usize>,
    /// `transition[s][a]` is the successor distribution.
    pub transition: Vec<Vec<Distribution<R>>>,
    /// `reward[s][a]` in [0, 1].
    pub reward: Vec<Vec<R>>,
    pub initial: usize,
}

/// A single invariant violation, reported as data rather than an error.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub location: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

impl<R: Real> Pomdp<R> {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn action_count(&self) -> usize {
        self.actions.len()
    }

    pub fn observation_count(&self) -> usize {
        self.observations.len()
    }

    pub fn state_index(&self, name: &str) -> Result<usize> {
        self.states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::input(format!("unknown state `{name}`")))
    }

    pub fn action_index(&self, name: &str) -> Result<usize> {
        self.actions
            .iter()
            .position(|a| a == name)
            .ok_or_else(|| Error::input(format!("unknown action `{name}`")))
    }

    pub fn observation_index(&self, name: &str) -> Result<usize> {
        self.observations
            .iter()
            .position(|o| o == name)
            .ok_or_else(|| Error::input(format!("unknown observation `{name}`")))
    }

    /// States carrying observation `o`.
    pub fn obs_class(&self, o: usize) -> Mask64 {
        (0..self.state_count()).filter(|&s| self.obs_of[s] == o).collect()
    }
}

/// Returns every invariant violation of the model; the empty list means
/// the model is well-formed.
pub fn validate_pomdp<R: Real>(model: &Pomdp<R>) -> Vec<Violation> {
    let mut out = Vec::new();
    let ns = model.state_count();
    let na = model.action_count();
    let no = model.observation_count();
    let mut push = |location: String, message: String| out.push(Violation { location, message });

    if ns == 0 {
        push("states".into(), "state set is empty".into());
        return out;
    }
    if na == 0 {
        push("actions".into(), "action set is empty".into());
    }
    if ns > MASK_CAPACITY || na > MASK_CAPACITY || no > MASK_CAPACITY {
        push(
            "model".into(),
            format!("state/action/observation counts are capped at {MASK_CAPACITY}"),
        );
        return out;
    }
    if model.initial >= ns {
        push("init".into(), format!("initial state index {} out of range", model.initial));
    }
    if model.obs_of.len() != ns {
        push("obs".into(), "obs_of must assign an observation to every state".into());
    } else {
        for (s, &o) in model.obs_of.iter().enumerate() {
            if o >= no {
                push(
                    format!("see {}", model.states[s]),
                    format!("observation index {o} out of range"),
                );
            }
        }
        for o in 0..no {
            if !model.obs_of.contains(&o) {
                push(
                    format!("obs {}", model.observations[o]),
                    "observation is not assigned to any state".into(),
                );
            }
        }
    }
    if model.transition.len() != ns || model.transition.iter().any(|row| row.len() != na) {
        push("trans".into(), "transition must be total over states x actions".into());
        return out;
    }
    if model.reward.len() != ns || model.reward.iter().any(|row| row.len() != na) {
        push("reward".into(), "reward must be total over states x actions".into());
        return out;
    }
    for s in 0..ns {
        for a in 0..na {
            let loc = format!("trans {} {}", model.states[s], model.actions[a]);
            let d = &model.transition[s][a];
            if let Err(e) = d.check() {
                push(loc.clone(), e.to_string());
            }
            if let Some(&(i, _)) = d.entries().iter().find(|&&(i, _)| i >= ns) {
                push(loc, format!("successor index {i} out of range"));
            }
            let r = model.reward[s][a];
            if r < R::zero() || r > R::one() {
                push(
                    format!("reward {} {}", model.states[s], model.actions[a]),
                    format!("reward {r} outside [0, 1]"),
                );
            }
        }
    }
    out
}

/// A finite-memory strategy: stochastic action selection per memory
/// element and stochastic memory update on (memory, observation, action).
#[derive(Clone, Debug)]
pub struct FiniteStrategy<R: Real = f64> {
    pub name: String,
    pub memory: Vec<String>,
    pub initial_memory: usize,
    /// `next_action[m]` over action indices.
    pub next_action: Vec<Distribution<R>>,
    /// `update[m][o][a]` over memory indices.
    pub update: Vec<Vec<Vec<Distribution<R>>>>,
}

impl<R: Real> FiniteStrategy<R> {
    pub fn memory_count(&self) -> usize {
        self.memory.len()
    }

    /// Memoryless strategy playing the uniform distribution over all
    /// actions regardless of the observation.
    pub fn uniform_memoryless(model: &Pomdp<R>) -> FiniteStrategy<R> {
        let na = model.action_count();
        let no = model.observation_count();
        FiniteStrategy {
            name: "uniform".into(),
            memory: vec!["m0".into()],
            initial_memory: 0,
            next_action: vec![Distribution::uniform(0..na).expect("non-empty actions")],
            update: vec![vec![vec![Distribution::dirac(0); na]; no]],
        }
    }

    /// Memoryless strategy always playing action `a`.
    pub fn constant(model: &Pomdp<R>, a: usize) -> FiniteStrategy<R> {
        let na = model.action_count();
        let no = model.observation_count();
        FiniteStrategy {
            name: format!("always_{}", model.actions[a]),
            memory: vec!["m0".into()],
            initial_memory: 0,
            next_action: vec![Distribution::dirac(a)],
            update: vec![vec![vec![Distribution::dirac(0); na]; no]],
        }
    }

    /// True iff every action-selection and memory-update distribution is
    /// a point distribution.
    pub fn is_pure(&self) -> bool {
        self.next_action.iter().all(|d| d.is_dirac())
            && self
                .update
                .iter()
                .flat_map(|per_o| per_o.iter().flat_map(|per_a| per_a.iter()))
                .all(|d| d.is_dirac())
    }
}

/// Checks totality and distribution invariants of `sigma` against the
/// model's action/observation sets.
pub fn validate_strategy<R: Real>(model: &Pomdp<R>, sigma: &FiniteStrategy<R>) -> Vec<Violation> {
    let mut out = Vec::new();
    let nm = sigma.memory_count();
    let na = model.action_count();
    let no = model.observation_count();
    let mut push = |location: String, message: String| out.push(Violation { location, message });

    if nm == 0 {
        push("memory".into(), "memory set is empty".into());
        return out;
    }
    if nm > MASK_CAPACITY {
        push("memory".into(), format!("memory size is capped at {MASK_CAPACITY}"));
        return out;
    }
    if sigma.initial_memory >= nm {
        push("init".into(), format!("initial memory index {} out of range", sigma.initial_memory));
    }
    if sigma.next_action.len() != nm {
        push("act".into(), "next_action must be total over memory".into());
    } else {
        for (m, d) in sigma.next_action.iter().enumerate() {
            let loc = format!("act {}", sigma.memory[m]);
            if let Err(e) = d.check() {
                push(loc.clone(), e.to_string());
            }
            if d.entries().iter().any(|&(a, _)| a >= na) {
                push(loc, "action index out of range".into());
            }
        }
    }
    if sigma.update.len() != nm
        || sigma.update.iter().any(|per_o| per_o.len() != no)
        || sigma
            .update
            .iter()
            .any(|per_o| per_o.iter().any(|per_a| per_a.len() != na))
    {
        push(
            "upd".into(),
            "update must be total over memory x observations x actions".into(),
        );
        return out;
    }
    for m in 0..nm {
        for o in 0..no {
            for a in 0..na {
                let d = &sigma.update[m][o][a];
                let loc = format!(
                    "upd {} {} {}",
                    sigma.memory[m], model.observations[o], model.actions[a]
                );
                if let Err(e) = d.check() {
                    push(loc.clone(), e.to_string());
                }
                if d.entries().iter().any(|&(m2, _)| m2 >= nm) {
                    push(loc, "memory index out of range".into());
                }
            }
        }
    }
    out
}

/// One-step belief update: the states with observation `o` reachable with
/// positive probability from `b` under action `a`. `None` means the
/// observation is impossible after `a` from `b`.
pub fn belief_update<R: Real>(
    model: &Pomdp<R>,
    b: Belief,
    a: usize,
    o: usize,
) -> Result<Option<Belief>> {
    if a >= model.action_count() {
        return Err(Error::input(format!("unknown action index {a}")));
    }
    if o >= model.observation_count() {
        return Err(Error::input(format!("unknown observation index {o}")));
    }
    let mut next = Mask64::EMPTY;
    for s in b.members() {
        if s >= model.state_count() {
            return Err(Error::input(format!("belief contains unknown state index {s}")));
        }
        next = next.union(model.transition[s][a].support_mask());
    }
    let next = next.intersect(model.obs_class(o));
    Ok(if next.is_empty() { None } else { Some(Belief(next)) })
}

/// Convenience map interning state names to indices; used by the parser.
pub fn index_map(names: &[String]) -> HashMap<&str, usize> {
    names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn two_state() -> Pomdp<f64> {
        // Two fully observable states, one action, deterministic swap.
        Pomdp {
            name: "swap".into(),
            states: vec!["s0".into(), "s1".into()],
            actions: vec!["a".into()],
            observations: vec!["o0".into(), "o1".into()],
            obs_of: vec![0, 1],
            transition: vec![
                vec![Distribution::dirac(1)],
                vec![Distribution::dirac(0)],
            ],
            reward: vec![vec![1.0], vec![0.5]],
            initial: 0,
        }
    }

    #[test]
    fn well_formed_model_validates() {
        assert_eq!(validate_pomdp(&two_state()), vec![]);
    }

    #[test]
    fn bad_row_sum_is_reported_with_location() {
        let mut m = two_state();
        m.transition[0][0] = Distribution::new_unchecked(vec![(0, 0.5), (1, 0.4)]);
        let v = validate_pomdp(&m);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].location, "trans s0 a");
        assert!(v[0].message.contains("0.9"));
    }

    #[test]
    fn reward_out_of_range_is_reported() {
        let mut m = two_state();
        m.reward[1][0] = 1.5;
        let v = validate_pomdp(&m);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].location, "reward s1 a");
    }

    #[test]
    fn distribution_rejects_tiny_entries_and_bad_sums() {
        assert!(Distribution::<f64>::new(vec![(0, 0.5), (1, 0.5)]).is_ok());
        assert!(Distribution::<f64>::new(vec![(0, 1.0 - 1e-13), (1, 1e-13)]).is_err());
        assert!(Distribution::<f64>::new(vec![(0, 0.9)]).is_err());
        assert!(Distribution::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn belief_update_identity_case() {
        // Single state with a deterministic self-loop and its own
        // observation maps to itself.
        let m = Pomdp::<f64> {
            name: "one".into(),
            states: vec!["s".into()],
            actions: vec!["a".into()],
            observations: vec!["o".into()],
            obs_of: vec![0],
            transition: vec![vec![Distribution::dirac(0)]],
            reward: vec![vec![1.0]],
            initial: 0,
        };
        let b = Belief::singleton(0);
        assert_eq!(belief_update(&m, b, 0, 0).unwrap(), Some(b));
        assert!(belief_update(&m, b, 1, 0).is_err());
        assert!(belief_update(&m, b, 0, 1).is_err());
    }

    #[test]
    fn belief_update_impossible_observation_is_empty() {
        let m = two_state();
        // From s0, action a reaches only s1 (observation o1).
        assert_eq!(belief_update(&m, Belief::singleton(0), 0, 0).unwrap(), None);
        assert_eq!(
            belief_update(&m, Belief::singleton(0), 0, 1).unwrap(),
            Some(Belief::singleton(1))
        );
    }

    #[test]
    fn strategy_validation_reports_totality_and_sums() {
        let m = two_state();
        let ok = FiniteStrategy::uniform_memoryless(&m);
        assert_eq!(validate_strategy(&m, &ok), vec![]);

        let mut missing = ok.clone();
        missing.update[0][1].clear();
        let v = validate_strategy(&m, &missing);
        assert_eq!(v.len(), 1);
        assert!(v[0].message.contains("total"));

        let mut bad = ok.clone();
        bad.next_action[0] = Distribution::new_unchecked(vec![(0, 0.5)]);
        let v = validate_strategy(&m, &bad);
        assert_eq!(v.len(), 1);
        assert!(v[0].location.starts_with("act"));
    }

    #[test]
    fn f32_lane_accepts_rounded_sums() {
        let d = Distribution::<f32>::new(vec![(0, 0.1), (1, 0.2), (2, 0.7)]);
        assert!(d.is_ok());
    }
}
