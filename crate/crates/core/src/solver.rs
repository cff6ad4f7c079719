//! Decision procedure for existence of a finite-memory almost-sure
//! winning strategy for the qualitative limit-average objective.
//!
//! The input POMDP is expanded into a belief-observation POMDP whose
//! states pair a concrete state with a memory annotation
//! (belief, winning set, recurrent set, action support). Composite
//! actions pick a base action together with a successor annotation per
//! observation, subject to the consistency clauses below; almost-sure
//! reachability of winning-and-recurrent nodes is then a greatest
//! fixpoint over observation groups. Every YES is re-certified by the
//! independent chain analysis before being returned.

use std::collections::HashMap;
use std::time::Instant;

use crate::bits::Mask64;
use crate::chain::{almost_sure_reach_graph, certify_limavg1, Certificate};
use crate::collapse::MemoryAnnotation;
use crate::error::{Error, Result};
use crate::model::{validate_pomdp, Distribution, FiniteStrategy, Pomdp};
use crate::num::Real;

/// Resource limits for the exponential construction. Exceeding them is a
/// loud capacity error, never a wrong answer.
#[derive(Clone, Copy, Debug)]
pub struct SolverLimits {
    /// Cap on belief-observation nodes (state-annotation pairs).
    pub max_nodes: usize,
}

impl Default for SolverLimits {
    fn default() -> Self {
        SolverLimits { max_nodes: 1_000_000 }
    }
}

/// Successor data for one observation under a fixed (group, base action):
/// the updated belief and the candidate successor annotations.
#[derive(Clone, Debug)]
pub struct ObsMove {
    pub obs: usize,
    pub belief: Mask64,
    pub candidates: Vec<usize>,
}

/// The belief-observation POMDP, stored at observation-group granularity.
/// Nodes are the implicit pairs `(s, group)` with `s` in the group's
/// belief, plus a distinguished pre-initial node whose composite actions
/// pick the initial annotation.
#[derive(Clone, Debug)]
pub struct BeliefObsPomdp {
    pub groups: Vec<MemoryAnnotation>,
    /// `moves[g][a]`: `None` when the base action is outside the group's
    /// action support or violates the reward-consistency clause;
    /// otherwise one entry per observation with a non-empty belief
    /// update.
    pub moves: Vec<Vec<Option<Vec<ObsMove>>>>,
    /// Groups eligible as the initial annotation (belief `{s0}`).
    pub initial_groups: Vec<usize>,
    /// Which groups survive consistency pruning (all true at build).
    pub alive: Vec<bool>,
    pub node_count: usize,
    pub edge_count: usize,
}

impl BeliefObsPomdp {
    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    /// True for target nodes: winning and recurrent at the node's state.
    pub fn is_target(&self, s: usize, g: usize) -> bool {
        self.groups[g].winning.contains(s) && self.groups[g].recurrent.contains(s)
    }
}

/// Builds the reachable belief-observation POMDP.
///
/// Composite action consistency for a group `(Y, W, R, A)` and base
/// action `a`:
///  * the base action lies in `A`;
///  * every state of `Y` marked winning and recurrent has reward 1
///    under `a`;
///  * per observation, successor annotations carry the updated belief,
///    mark every state reached from a winning (resp. recurrent) state
///    as winning (resp. recurrent), and have a non-empty action set.
///
/// Winning marks propagate to the whole successor belief (every belief
/// member is reached from some winning member), so the winning component
/// always equals the belief and the free choices are the recurrent bits
/// above the forced ones plus the successor action set.
pub fn build_belief_obs<R: Real>(
    model: &Pomdp<R>,
    limits: SolverLimits,
) -> Result<BeliefObsPomdp> {
    let na = model.action_count();
    let no = model.observation_count();
    let all_actions = Mask64::full(na);
    let action_subsets = all_actions.nonempty_subsets();

    let mut groups: Vec<MemoryAnnotation> = Vec::new();
    let mut index: HashMap<MemoryAnnotation, usize> = HashMap::new();
    let mut node_count = 1usize; // pre-initial
    let mut intern = |ann: MemoryAnnotation,
                      groups: &mut Vec<MemoryAnnotation>,
                      node_count: &mut usize|
     -> Result<usize> {
        if let Some(&g) = index.get(&ann) {
            return Ok(g);
        }
        *node_count += ann.belief.len();
        if *node_count > limits.max_nodes {
            return Err(Error::Capacity(format!(
                "belief-observation construction exceeded {} nodes",
                limits.max_nodes
            )));
        }
        groups.push(ann);
        index.insert(ann, groups.len() - 1);
        Ok(groups.len() - 1)
    };

    // Pre-initial composite actions: one per initial annotation, with
    // the recurrent bit of the initial state free (fewest bits first).
    let init_belief = Mask64::singleton(model.initial);
    let mut initial_groups = Vec::new();
    for r0 in init_belief.supersets_within(Mask64::EMPTY) {
        for &a0 in &action_subsets {
            let ann = MemoryAnnotation {
                belief: init_belief,
                winning: init_belief,
                recurrent: r0,
                action_support: a0,
            };
            initial_groups.push(intern(ann, &mut groups, &mut node_count)?);
        }
    }

    let mut moves: Vec<Vec<Option<Vec<ObsMove>>>> = Vec::new();
    let mut edge_count = 0usize;
    let mut next = 0usize;
    while next < groups.len() {
        let g = next;
        next += 1;
        let ann = groups[g];
        let mut per_action: Vec<Option<Vec<ObsMove>>> = Vec::with_capacity(na);
        for a in 0..na {
            if !ann.action_support.contains(a) {
                per_action.push(None);
                continue;
            }
            // reward consistency at winning-and-recurrent states
            let wr = ann.winning.intersect(ann.recurrent);
            if wr
                .iter()
                .any(|s| model.reward[s][a] < R::one() - R::reward_one_slack())
            {
                per_action.push(None);
                continue;
            }
            let mut image = Mask64::EMPTY;
            let mut forced_from_recurrent = Mask64::EMPTY;
            for s in ann.belief.iter() {
                let supp = model.transition[s][a].support_mask();
                image = image.union(supp);
                if ann.recurrent.contains(s) {
                    forced_from_recurrent = forced_from_recurrent.union(supp);
                }
            }
            let mut obs_moves = Vec::new();
            for o in 0..no {
                let belief2 = image.intersect(model.obs_class(o));
                if belief2.is_empty() {
                    continue;
                }
                let forced_r = forced_from_recurrent.intersect(belief2);
                let mut candidates = Vec::new();
                for r2 in belief2.supersets_within(forced_r) {
                    for &a2 in &action_subsets {
                        let cand = MemoryAnnotation {
                            belief: belief2,
                            winning: belief2,
                            recurrent: r2,
                            action_support: a2,
                        };
                        candidates.push(intern(cand, &mut groups, &mut node_count)?);
                    }
                }
                edge_count += candidates.len() * belief2.len();
                obs_moves.push(ObsMove { obs: o, belief: belief2, candidates });
            }
            per_action.push(Some(obs_moves));
        }
        moves.push(per_action);
    }

    let alive = vec![true; groups.len()];
    Ok(BeliefObsPomdp {
        groups,
        moves,
        initial_groups,
        alive,
        node_count,
        edge_count,
    })
}

fn group_has_consistent_action(bo: &BeliefObsPomdp, alive: &[bool], g: usize) -> bool {
    bo.moves[g].iter().any(|mv| match mv {
        None => false,
        Some(obs_moves) => obs_moves
            .iter()
            .all(|om| om.candidates.iter().any(|&c| alive[c])),
    })
}

/// Iteratively removes observation groups with no consistently playable
/// composite action (a composite action is playable when every possible
/// observation still has a surviving successor annotation). The result
/// is the restriction to the consistent fragment.
pub fn prune_consistent(bo: &BeliefObsPomdp) -> BeliefObsPomdp {
    let mut out = bo.clone();
    prune_in_place(&mut out.alive, bo, false);
    out
}

fn prune_in_place(alive: &mut [bool], bo: &BeliefObsPomdp, reversed: bool) {
    loop {
        let mut changed = false;
        let order: Vec<usize> = if reversed {
            (0..bo.group_count()).rev().collect()
        } else {
            (0..bo.group_count()).collect()
        };
        for g in order {
            if alive[g] && !group_has_consistent_action(bo, alive, g) {
                alive[g] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}

#[cfg(test)]
pub(crate) fn prune_consistent_reversed(bo: &BeliefObsPomdp) -> BeliefObsPomdp {
    let mut out = bo.clone();
    prune_in_place(&mut out.alive, bo, true);
    out
}

/// Base actions currently playable at a group: in the action support,
/// reward-consistent, and with a surviving successor annotation for
/// every observation.
pub fn allowed_actions(bo: &BeliefObsPomdp, alive: &[bool], g: usize) -> Vec<usize> {
    bo.moves[g]
        .iter()
        .enumerate()
        .filter_map(|(a, mv)| match mv {
            Some(obs_moves)
                if obs_moves
                    .iter()
                    .all(|om| om.candidates.iter().any(|&c| alive[c])) =>
            {
                Some(a)
            }
            _ => None,
        })
        .collect()
}

/// Result of the greatest-fixpoint almost-sure reachability computation.
#[derive(Clone, Debug)]
pub struct FixpointResult {
    /// Surviving observation groups (with non-empty Allow).
    pub surviving: Vec<bool>,
    /// Whether the pre-initial observation survives.
    pub pre_initial: bool,
    pub iterations: usize,
}

/// Greatest fixpoint over observation groups: repeatedly form the chain
/// of uniform play over all still-playable composite actions (with the
/// target absorbing) and drop every observation group containing a node
/// that does not almost-surely reach the target.
pub fn almost_sure_reach_obs<R, F>(
    model: &Pomdp<R>,
    bo: &BeliefObsPomdp,
    target: F,
) -> FixpointResult
where
    R: Real,
    F: Fn(usize, usize) -> bool,
{
    let mut surviving = bo.alive.clone();
    let mut pre_initial = true;
    let mut iterations = 0usize;
    loop {
        iterations += 1;
        let mut changed = false;

        // drop groups with no playable composite action
        prune_in_place(&mut surviving, bo, false);

        // node ids over surviving groups
        let mut node_id: HashMap<(usize, usize), usize> = HashMap::new();
        let mut nodes: Vec<(usize, usize)> = Vec::new();
        for (g, &ok) in surviving.iter().enumerate() {
            if !ok {
                continue;
            }
            for s in bo.groups[g].belief.iter() {
                node_id.insert((s, g), nodes.len());
                nodes.push((s, g));
            }
        }
        let pre_node = nodes.len();

        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes.len() + 1];
        let mut targets: Vec<usize> = Vec::new();
        for (n, &(s, g)) in nodes.iter().enumerate() {
            if target(s, g) {
                targets.push(n); // made absorbing by almost_sure_reach_graph
                continue;
            }
            for a in allowed_actions(bo, &surviving, g) {
                let obs_moves = bo.moves[g][a].as_ref().expect("allowed action");
                let supp = model.transition[s][a].support_mask();
                for om in obs_moves {
                    for s2 in om.belief.intersect(supp).iter() {
                        for &c in &om.candidates {
                            if surviving[c] {
                                adj[n].push(node_id[&(s2, c)]);
                            }
                        }
                    }
                }
            }
        }
        // pre-initial node moves to (s0, g0) for each surviving initial
        // annotation
        for &g0 in &bo.initial_groups {
            if surviving[g0] {
                adj[pre_node].push(node_id[&(model.initial, g0)]);
            }
        }
        if adj[pre_node].is_empty() {
            pre_initial = false;
        }

        let ok = almost_sure_reach_graph(&mut adj, &targets);
        for (n, &(_, g)) in nodes.iter().enumerate() {
            if !ok[n] && surviving[g] {
                surviving[g] = false;
                changed = true;
            }
        }
        if pre_initial && !ok[pre_node] {
            pre_initial = false;
            changed = true;
        }

        if !changed {
            break;
        }
    }
    FixpointResult { surviving, pre_initial, iterations }
}

/// Summary statistics reported alongside a decision.
#[derive(Clone, Debug)]
pub struct SolveStats {
    pub groups: usize,
    pub nodes: usize,
    pub edges: usize,
    pub iterations: usize,
    pub wall_ms: f64,
}

/// Outcome of the decision procedure. When the decision is YES the
/// synthesized strategy and its independently computed certificate are
/// attached; the certificate is guaranteed winning.
#[derive(Clone, Debug)]
pub struct SolveResult<R: Real = f64> {
    pub decision: bool,
    pub strategy: Option<FiniteStrategy<R>>,
    pub certificate: Option<Certificate<R>>,
    pub stats: SolveStats,
}

/// Decides whether a finite-memory strategy wins the limit-average-one
/// objective almost surely, synthesizing and certifying a witness on
/// YES.
pub fn solve_limavg1<R: Real>(model: &Pomdp<R>) -> Result<SolveResult<R>> {
    solve_limavg1_with(model, SolverLimits::default())
}

pub fn solve_limavg1_with<R: Real>(
    model: &Pomdp<R>,
    limits: SolverLimits,
) -> Result<SolveResult<R>> {
    let start = Instant::now();
    let violations = validate_pomdp(model);
    if !violations.is_empty() {
        return Err(Error::input(format!("invalid model: {}", violations[0])));
    }

    let bo = build_belief_obs(model, limits)?;
    let pruned = prune_consistent(&bo);
    let fix = almost_sure_reach_obs(model, &pruned, |s, g| pruned.is_target(s, g));

    let stats = |iters: usize| SolveStats {
        groups: bo.group_count(),
        nodes: bo.node_count,
        edges: bo.edge_count,
        iterations: iters,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    };

    if !fix.pre_initial {
        return Ok(SolveResult {
            decision: false,
            strategy: None,
            certificate: None,
            stats: stats(fix.iterations),
        });
    }

    let strategy = extract_strategy(model, &pruned, &fix)?;
    let certificate = certify_limavg1(model, &strategy);
    if !certificate.winning {
        return Err(Error::Internal(format!(
            "synthesized strategy failed certification: {}",
            certificate
        )));
    }
    Ok(SolveResult {
        decision: true,
        strategy: Some(strategy),
        certificate: Some(certificate),
        stats: stats(fix.iterations),
    })
}

/// Reads a finite-memory strategy off the surviving fragment: one memory
/// element per surviving group, uniform play over the allowed base
/// actions, uniform memory update over the surviving successor
/// annotations for the realized observation.
fn extract_strategy<R: Real>(
    model: &Pomdp<R>,
    bo: &BeliefObsPomdp,
    fix: &FixpointResult,
) -> Result<FiniteStrategy<R>> {
    let surviving: Vec<usize> = (0..bo.group_count())
        .filter(|&g| fix.surviving[g])
        .collect();
    let mem_of: HashMap<usize, usize> = surviving
        .iter()
        .enumerate()
        .map(|(m, &g)| (g, m))
        .collect();
    let initial_group = bo
        .initial_groups
        .iter()
        .copied()
        .find(|&g| fix.surviving[g])
        .ok_or_else(|| Error::Internal("no surviving initial annotation".into()))?;

    let na = model.action_count();
    let no = model.observation_count();
    let mut next_action = Vec::with_capacity(surviving.len());
    let mut update = Vec::with_capacity(surviving.len());
    for (m, &g) in surviving.iter().enumerate() {
        let allowed = allowed_actions(bo, &fix.surviving, g);
        if allowed.is_empty() {
            return Err(Error::Internal(format!(
                "surviving group {} has no allowed action",
                g
            )));
        }
        next_action.push(Distribution::uniform(allowed.iter().copied())?);
        let mut per_obs = Vec::with_capacity(no);
        for o in 0..no {
            let mut per_act = Vec::with_capacity(na);
            for a in 0..na {
                let successors: Vec<usize> = if allowed.contains(&a) {
                    match &bo.moves[g][a] {
                        Some(obs_moves) => obs_moves
                            .iter()
                            .find(|om| om.obs == o)
                            .map(|om| {
                                om.candidates
                                    .iter()
                                    .copied()
                                    .filter(|&c| fix.surviving[c])
                                    .map(|c| mem_of[&c])
                                    .collect()
                            })
                            .unwrap_or_default(),
                        None => Vec::new(),
                    }
                } else {
                    Vec::new()
                };
                if successors.is_empty() {
                    // combination cannot occur under this strategy
                    per_act.push(Distribution::dirac(m));
                } else {
                    per_act.push(Distribution::uniform(successors.iter().copied())?);
                }
            }
            per_obs.push(per_act);
        }
        update.push(per_obs);
    }

    Ok(FiniteStrategy {
        name: "synth".into(),
        memory: surviving.iter().map(|g| format!("g{}", g)).collect(),
        initial_memory: mem_of[&initial_group],
        next_action,
        update,
    })
}
