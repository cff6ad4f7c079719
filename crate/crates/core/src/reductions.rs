//! Reductions from probabilistic finite automaton (PFA) emptiness
//! problems to the qualitative limit-average problem on blind POMDPs,
//! plus word strategies (ultimately periodic action sequences).

use crate::bits::Mask64;
use crate::error::{Error, Result};
use crate::model::{Distribution, FiniteStrategy, Pomdp};
use crate::num::Real;

/// A probabilistic finite automaton. Transitions may be partial: a
/// missing `(state, letter)` pair drops into an implicit reject sink.
#[derive(Clone, Debug)]
pub struct Pfa<R: Real = f64> {
    pub name: String,
    pub states: Vec<String>,
    pub letters: Vec<String>,
    /// `transition[s][x]`: distribution over successor states, or `None`
    /// when the letter is unavailable at the state.
    pub transition: Vec<Vec<Option<Distribution<R>>>>,
    pub initial: usize,
    pub finals: Mask64,
}

impl<R: Real> Pfa<R> {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn letter_count(&self) -> usize {
        self.letters.len()
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn letter_index(&self, name: &str) -> Option<usize> {
        self.letters.iter().position(|s| s == name)
    }
}

/// Exact acceptance probability of a finite word (given as letter
/// indices): the probability mass sitting on final states after reading
/// the word from the initial state.
pub fn pfa_accept_prob<R: Real>(pfa: &Pfa<R>, word: &[usize]) -> Result<R> {
    let n = pfa.state_count();
    let mut cur = vec![R::zero(); n];
    cur[pfa.initial] = R::one();
    for &x in word {
        if x >= pfa.letter_count() {
            return Err(Error::input(format!("letter index {} out of range", x)));
        }
        let mut next = vec![R::zero(); n];
        for (s, &mass) in cur.iter().enumerate() {
            if mass <= R::zero() {
                continue;
            }
            if let Some(dist) = &pfa.transition[s][x] {
                for &(t, p) in dist.entries() {
                    next[t] += mass * p;
                }
            }
            // missing transition: mass is rejected
        }
        cur = next;
    }
    Ok(pfa
        .finals
        .iter()
        .map(|s| cur[s])
        .fold(R::zero(), |acc, p| acc + p))
}

/// State layout shared by both reductions, exposed so tests can address
/// reduction states symbolically.
pub mod layout {
    /// Strict-emptiness reduction: index of the "fresh copy" of a PFA
    /// state (reward 1).
    pub fn fresh(s: usize) -> usize {
        s
    }
    /// Strict-emptiness reduction: index of the "spent copy" of a PFA
    /// state (reward 0).
    pub fn spent(n: usize, s: usize) -> usize {
        n + s
    }
    pub fn good(n: usize) -> usize {
        2 * n
    }
    pub fn bad(n: usize) -> usize {
        2 * n + 1
    }
    pub fn sink(n: usize) -> usize {
        2 * n + 2
    }
}

/// Reduces strict emptiness (is some word accepted with probability
/// above 1/2?) to the quantitative threshold question: the returned blind
/// POMDP, together with a word strategy spelling `$ w # #` forever, has
/// limit-average value above 1/2 if and only if `w` is accepted with
/// probability above 1/2.
///
/// Layout: two copies of every PFA state — a rewarding "fresh" copy and
/// a non-rewarding "spent" copy — plus `good`, `bad` and an absorbing
/// zero-reward `sink`. The pay action `$` moves fresh to spent; letters
/// act on spent copies and return to fresh ones; the check action `#`
/// resolves fresh copies to `good`/`bad` by finality and restarts from
/// `good`/`bad` to the fresh initial state. Any out-of-protocol action
/// falls into the sink.
#[allow(clippy::needless_range_loop)]
pub fn reduce_strict_emptiness<R: Real>(pfa: &Pfa<R>) -> Pomdp<R> {
    let n = pfa.state_count();
    let nl = pfa.letter_count();
    let total = 2 * n + 3;
    let good = layout::good(n);
    let bad = layout::bad(n);
    let sink = layout::sink(n);
    let pay = nl; // action index of '$'
    let check = nl + 1; // action index of '#'
    let na = nl + 2;

    let mut states: Vec<String> = pfa.states.iter().map(|s| format!("{}_fresh", s)).collect();
    states.extend(pfa.states.iter().map(|s| format!("{}_spent", s)));
    states.push("good".into());
    states.push("bad".into());
    states.push("sink".into());
    let mut actions: Vec<String> = pfa.letters.clone();
    actions.push("$".into());
    actions.push("#".into());

    let mut transition: Vec<Vec<Distribution<R>>> =
        vec![vec![Distribution::dirac(sink); na]; total];
    for s in 0..n {
        transition[layout::fresh(s)][pay] = Distribution::dirac(layout::spent(n, s));
        transition[layout::fresh(s)][check] =
            Distribution::dirac(if pfa.finals.contains(s) { good } else { bad });
        for x in 0..nl {
            if let Some(dist) = &pfa.transition[s][x] {
                let entries: Vec<(usize, R)> = dist
                    .entries()
                    .iter()
                    .map(|&(t, p)| (layout::fresh(t), p))
                    .collect();
                transition[layout::spent(n, s)][x] = Distribution::new_unchecked(entries);
            }
        }
    }
    transition[good][check] = Distribution::dirac(layout::fresh(pfa.initial));
    transition[bad][check] = Distribution::dirac(layout::fresh(pfa.initial));

    // state-based rewards: fresh copies and good pay 1
    let mut reward = vec![vec![R::zero(); na]; total];
    for s in 0..n {
        reward[layout::fresh(s)].iter_mut().for_each(|r| *r = R::one());
    }
    reward[good].iter_mut().for_each(|r| *r = R::one());

    Pomdp {
        name: format!("{}_strict", pfa.name),
        states,
        actions,
        observations: vec!["blind".into()],
        obs_of: vec![0; total],
        transition,
        reward,
        initial: layout::fresh(pfa.initial),
    }
}

/// Reduces the value-1 problem (does the acceptance probability get
/// arbitrarily close to 1?) to the qualitative limit-average-one
/// question: the returned blind POMDP admits an almost-sure
/// limit-average-one strategy if and only if the PFA has value 1.
///
/// Layout: the PFA states plus `good`, `bad` and an absorbing sink.
/// Letters act as in the PFA; `$` resolves the current PFA state to
/// `good`/`bad` by finality and restarts from `good`/`bad` to the
/// initial state; `#` idles on `good`/`bad` and is otherwise illegal.
/// Only `good` is rewarding.
#[allow(clippy::needless_range_loop)]
pub fn reduce_value1<R: Real>(pfa: &Pfa<R>) -> Pomdp<R> {
    let n = pfa.state_count();
    let nl = pfa.letter_count();
    let good = n;
    let bad = n + 1;
    let sink = n + 2;
    let total = n + 3;
    let pay = nl; // '$'
    let check = nl + 1; // '#'
    let na = nl + 2;

    let mut states: Vec<String> = pfa.states.clone();
    states.push("good".into());
    states.push("bad".into());
    states.push("sink".into());
    let mut actions: Vec<String> = pfa.letters.clone();
    actions.push("$".into());
    actions.push("#".into());

    let mut transition: Vec<Vec<Distribution<R>>> =
        vec![vec![Distribution::dirac(sink); na]; total];
    for s in 0..n {
        for x in 0..nl {
            if let Some(dist) = &pfa.transition[s][x] {
                transition[s][x] = dist.clone();
            }
        }
        transition[s][pay] =
            Distribution::dirac(if pfa.finals.contains(s) { good } else { bad });
    }
    transition[good][check] = Distribution::dirac(good);
    transition[bad][check] = Distribution::dirac(bad);
    transition[good][pay] = Distribution::dirac(pfa.initial);
    transition[bad][pay] = Distribution::dirac(pfa.initial);

    let mut reward = vec![vec![R::zero(); na]; total];
    reward[good].iter_mut().for_each(|r| *r = R::one());

    Pomdp {
        name: format!("{}_value1", pfa.name),
        states,
        actions,
        observations: vec!["blind".into()],
        obs_of: vec![0; total],
        transition,
        reward,
        initial: pfa.initial,
    }
}

/// Turns an ultimately periodic word `u v v v ...` (action indices) into
/// a pure, observation-independent finite-memory strategy with
/// `|u| + |v|` memory elements. The cycle `v` must be non-empty.
pub fn word_to_strategy<R: Real>(
    model: &Pomdp<R>,
    prefix: &[usize],
    cycle: &[usize],
) -> Result<FiniteStrategy<R>> {
    if cycle.is_empty() {
        return Err(Error::input("word strategy needs a non-empty cycle"));
    }
    let na = model.action_count();
    let no = model.observation_count();
    let word: Vec<usize> = prefix.iter().chain(cycle.iter()).copied().collect();
    for &a in &word {
        if a >= na {
            return Err(Error::input(format!("action index {} out of range", a)));
        }
    }
    let mem = word.len();
    let next_of = |m: usize| if m + 1 < mem { m + 1 } else { prefix.len() };
    let next_action: Vec<Distribution<R>> =
        word.iter().map(|&a| Distribution::dirac(a)).collect();
    let update: Vec<Vec<Vec<Distribution<R>>>> = (0..mem)
        .map(|m| vec![vec![Distribution::dirac(next_of(m)); na]; no])
        .collect();
    Ok(FiniteStrategy {
        name: "word".into(),
        memory: (0..mem).map(|m| format!("p{}", m)).collect(),
        initial_memory: 0,
        next_action,
        update,
    })
}
