//! Bounded brute-force oracle: enumerates small finite-memory
//! strategies and certifies each one exactly. Used to cross-validate
//! the decision procedure on small instances. A negative exhaust of the
//! grid is *not* a NO answer — the outcome is `Unknown`.

use crate::bits::Mask64;
use crate::chain::certify_limavg1;
use crate::error::Result;
use crate::model::{Distribution, FiniteStrategy, Pomdp};
use crate::num::Real;

/// Outcome of the bounded search.
#[derive(Clone, Debug)]
pub enum OracleOutcome<R: Real = f64> {
    /// A certified winning strategy was found.
    Yes(FiniteStrategy<R>),
    /// The searched grid contains no winner (or the budget ran out);
    /// larger strategies may still win.
    Unknown,
}

impl<R: Real> OracleOutcome<R> {
    pub fn is_yes(&self) -> bool {
        matches!(self, OracleOutcome::Yes(_))
    }
}

/// Searches strategies with up to `max_memory` memory elements.
///
/// With `support_only == false` only deterministic (pure) strategies are
/// tried. With `support_only == true` the grid additionally contains
/// uniform distributions over every non-empty action subset and memory
/// subset, ordered smallest support first, so pure strategies are still
/// visited early. At most `budget` strategies are certified; exceeding
/// the budget yields `Unknown`.
#[allow(clippy::needless_range_loop)]
pub fn bounded_oracle<R: Real>(
    model: &Pomdp<R>,
    max_memory: usize,
    support_only: bool,
    budget: usize,
) -> Result<OracleOutcome<R>> {
    let na = model.action_count();
    let no = model.observation_count();
    let mut tried = 0usize;
    for mem in 1..=max_memory.max(1) {
        let action_choices: Vec<Mask64> = subset_choices(na, support_only);
        let update_choices: Vec<Mask64> = subset_choices(mem, support_only);

        // odometer over: one action choice per memory, one update choice
        // per (memory, observation, action)
        let dims = mem + mem * no * na;
        let radix = |d: usize| {
            if d < mem {
                action_choices.len()
            } else {
                update_choices.len()
            }
        };
        let mut digits = vec![0usize; dims];
        'grid: loop {
            tried += 1;
            if tried > budget {
                return Ok(OracleOutcome::Unknown);
            }
            let sigma = assemble(
                model,
                mem,
                &digits,
                &action_choices,
                &update_choices,
                tried,
            )?;
            let cert = certify_limavg1(model, &sigma);
            if cert.winning {
                return Ok(OracleOutcome::Yes(sigma));
            }
            // advance odometer
            for d in 0..dims {
                digits[d] += 1;
                if digits[d] < radix(d) {
                    continue 'grid;
                }
                digits[d] = 0;
            }
            break;
        }
    }
    Ok(OracleOutcome::Unknown)
}

fn subset_choices(n: usize, support_only: bool) -> Vec<Mask64> {
    if support_only {
        let mut subs = Mask64::full(n).nonempty_subsets();
        subs.sort_by_key(|m| m.len());
        subs
    } else {
        (0..n).map(Mask64::singleton).collect()
    }
}

fn assemble<R: Real>(
    model: &Pomdp<R>,
    mem: usize,
    digits: &[usize],
    action_choices: &[Mask64],
    update_choices: &[Mask64],
    serial: usize,
) -> Result<FiniteStrategy<R>> {
    let na = model.action_count();
    let no = model.observation_count();
    let mut next_action = Vec::with_capacity(mem);
    for m in 0..mem {
        let members: Vec<usize> = action_choices[digits[m]].iter().collect();
        next_action.push(Distribution::uniform(members)?);
    }
    let mut update = Vec::with_capacity(mem);
    let mut d = mem;
    for _m in 0..mem {
        let mut per_obs = Vec::with_capacity(no);
        for _o in 0..no {
            let mut per_act = Vec::with_capacity(na);
            for _a in 0..na {
                let members: Vec<usize> = update_choices[digits[d]].iter().collect();
                per_act.push(Distribution::uniform(members)?);
                d += 1;
            }
            per_obs.push(per_act);
        }
        update.push(per_obs);
    }
    Ok(FiniteStrategy {
        name: format!("grid{}", serial),
        memory: (0..mem).map(|m| format!("m{}", m)).collect(),
        initial_memory: 0,
        next_action,
        update,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_state(reward: f64) -> Pomdp<f64> {
        Pomdp {
            name: "one".into(),
            states: vec!["s".into()],
            actions: vec!["a".into(), "b".into()],
            observations: vec!["o".into()],
            obs_of: vec![0],
            transition: vec![vec![Distribution::dirac(0), Distribution::dirac(0)]],
            reward: vec![vec![reward, 0.0]],
            initial: 0,
        }
    }

    #[test]
    fn finds_pure_winner() {
        let outcome = bounded_oracle(&one_state(1.0), 1, false, 100).unwrap();
        match outcome {
            OracleOutcome::Yes(sigma) => assert!(sigma.is_pure()),
            OracleOutcome::Unknown => panic!("expected a winner"),
        }
    }

    #[test]
    fn exhausts_to_unknown() {
        let outcome = bounded_oracle(&one_state(0.5), 2, true, 10_000).unwrap();
        assert!(!outcome.is_yes());
    }

    #[test]
    fn budget_yields_unknown() {
        let outcome = bounded_oracle(&one_state(0.5), 2, true, 3).unwrap();
        assert!(matches!(outcome, OracleOutcome::Unknown));
    }
}
