//! Exact analysis of finite Markov chains.
//!
//! This is the independent verifier: every synthesized strategy is checked
//! here against the recurrent-class criterion, with no shared code path
//! into the solver.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{Distribution, FiniteStrategy, Pomdp};
use crate::num::Real;

/// A finite Markov chain. Each node carries a `(state, memory)` payload
/// so product chains stay inspectable.
#[derive(Clone, Debug)]
pub struct MarkovChain<R: Real = f64> {
    pub payload: Vec<(usize, usize)>,
    pub step: Vec<Distribution<R>>,
    pub node_reward: Vec<R>,
}

impl<R: Real> MarkovChain<R> {
    pub fn node_count(&self) -> usize {
        self.step.len()
    }

    /// Support-graph adjacency lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        self.step.iter().map(|d| d.support().collect()).collect()
    }
}

/// A bottom strongly connected component of a chain's support graph.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct RecurrentClass {
    pub nodes: Vec<usize>,
}

/// A product chain together with its `(state, memory) -> node` index.
#[derive(Clone, Debug)]
pub struct ProductChain<R: Real = f64> {
    pub chain: MarkovChain<R>,
    pub node_of: HashMap<(usize, usize), usize>,
}

fn product_step<R: Real>(
    model: &Pomdp<R>,
    sigma: &FiniteStrategy<R>,
    s: usize,
    m: usize,
) -> Vec<((usize, usize), R)> {
    let mut acc: HashMap<(usize, usize), R> = HashMap::new();
    for &(a, pa) in sigma.next_action[m].entries() {
        for &(s2, ps) in model.transition[s][a].entries() {
            let o = model.obs_of[s2];
            for &(m2, pm) in sigma.update[m][o][a].entries() {
                *acc.entry((s2, m2)).or_insert_with(R::zero) += pa * ps * pm;
            }
        }
    }
    let mut out: Vec<((usize, usize), R)> = acc.into_iter().collect();
    out.sort_by_key(|&(k, _)| k);
    out
}

fn expected_reward<R: Real>(model: &Pomdp<R>, sigma: &FiniteStrategy<R>, s: usize, m: usize) -> R {
    sigma.next_action[m]
        .entries()
        .iter()
        .map(|&(a, pa)| pa * model.reward[s][a])
        .sum()
}

/// Builds the chain induced by a finite-memory strategy, restricted to
/// the nodes reachable from the given roots.
pub fn product_chain_from<R: Real>(
    model: &Pomdp<R>,
    sigma: &FiniteStrategy<R>,
    roots: &[(usize, usize)],
) -> ProductChain<R> {
    let mut node_of: HashMap<(usize, usize), usize> = HashMap::new();
    let mut payload: Vec<(usize, usize)> = Vec::new();
    let mut queue: Vec<usize> = Vec::new();
    for &r in roots {
        if let std::collections::hash_map::Entry::Vacant(e) = node_of.entry(r) {
            e.insert(payload.len());
            payload.push(r);
            queue.push(payload.len() - 1);
        }
    }
    let mut steps: Vec<Vec<((usize, usize), R)>> = Vec::new();
    let mut head = 0;
    while head < queue.len() {
        let n = queue[head];
        head += 1;
        let (s, m) = payload[n];
        let succ = product_step(model, sigma, s, m);
        for &(key, _) in &succ {
            if let std::collections::hash_map::Entry::Vacant(e) = node_of.entry(key) {
                e.insert(payload.len());
                payload.push(key);
                queue.push(payload.len() - 1);
            }
        }
        steps.push(succ);
    }
    // nodes discovered after their step was computed
    while steps.len() < payload.len() {
        let (s, m) = payload[steps.len()];
        steps.push(product_step(model, sigma, s, m));
    }
    let step: Vec<Distribution<R>> = steps
        .iter()
        .map(|succ| {
            Distribution::new_unchecked(succ.iter().map(|&(k, p)| (node_of[&k], p)).collect())
        })
        .collect();
    let node_reward = payload
        .iter()
        .map(|&(s, m)| expected_reward(model, sigma, s, m))
        .collect();
    ProductChain {
        chain: MarkovChain { payload, step, node_reward },
        node_of,
    }
}

/// Product chain reachable from `(initial, initial_memory)`.
pub fn product_chain<R: Real>(model: &Pomdp<R>, sigma: &FiniteStrategy<R>) -> ProductChain<R> {
    product_chain_from(model, sigma, &[(model.initial, sigma.initial_memory)])
}

/// Product chain over the full `S x M` space, rooted everywhere.
pub fn product_chain_all<R: Real>(model: &Pomdp<R>, sigma: &FiniteStrategy<R>) -> ProductChain<R> {
    let roots: Vec<(usize, usize)> = (0..model.state_count())
        .flat_map(|s| (0..sigma.memory_count()).map(move |m| (s, m)))
        .collect();
    product_chain_from(model, sigma, &roots)
}

/// Tarjan's algorithm, iterative. Returns SCCs in reverse topological
/// order (every SCC precedes the SCCs that can reach it).
pub fn tarjan_sccs(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut sccs: Vec<Vec<usize>> = Vec::new();
    // (node, edge position) call frames
    let mut frames: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        frames.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = frames.last_mut() {
            if *pos < adj[v].len() {
                let w = adj[v][*pos];
                *pos += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                frames.pop();
                if let Some(&(parent, _)) = frames.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    sccs.push(comp);
                }
            }
        }
    }
    sccs
}

/// The recurrent classes: bottom SCCs of the support graph.
pub fn bottom_sccs<R: Real>(chain: &MarkovChain<R>) -> Vec<RecurrentClass> {
    let adj = chain.adjacency();
    bottom_sccs_of(&adj)
}

pub fn bottom_sccs_of(adj: &[Vec<usize>]) -> Vec<RecurrentClass> {
    let sccs = tarjan_sccs(adj);
    let mut comp_of = vec![0usize; adj.len()];
    for (c, comp) in sccs.iter().enumerate() {
        for &v in comp {
            comp_of[v] = c;
        }
    }
    let mut out = Vec::new();
    for (c, comp) in sccs.iter().enumerate() {
        let bottom = comp
            .iter()
            .all(|&v| adj[v].iter().all(|&w| comp_of[w] == c));
        if bottom {
            out.push(RecurrentClass { nodes: comp.clone() });
        }
    }
    out.sort();
    out
}

/// Recurrent classes reachable from `from` in the support graph.
pub fn reachable_recurrent<R: Real>(chain: &MarkovChain<R>, from: usize) -> Vec<RecurrentClass> {
    let adj = chain.adjacency();
    let reach = forward_closure(&adj, &[from]);
    bottom_sccs_of(&adj)
        .into_iter()
        .filter(|c| reach[c.nodes[0]])
        .collect()
}

pub fn forward_closure(adj: &[Vec<usize>], roots: &[usize]) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut queue: Vec<usize> = Vec::new();
    for &r in roots {
        if !seen[r] {
            seen[r] = true;
            queue.push(r);
        }
    }
    while let Some(v) = queue.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push(w);
            }
        }
    }
    seen
}

fn reverse(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut rev = vec![Vec::new(); adj.len()];
    for (v, succ) in adj.iter().enumerate() {
        for &w in succ {
            rev[w].push(v);
        }
    }
    rev
}

/// Probability-1 reachability of `target` in a finite chain, with the
/// target treated as absorbing: the nodes from which every reachable node
/// can still reach the target.
pub fn almost_sure_reach_mc<R: Real>(chain: &MarkovChain<R>, target: &[usize]) -> Vec<bool> {
    let mut adj = chain.adjacency();
    almost_sure_reach_graph(&mut adj, target)
}

/// Graph form of [`almost_sure_reach_mc`]; `adj` is mutated to make the
/// target absorbing.
pub fn almost_sure_reach_graph(adj: &mut [Vec<usize>], target: &[usize]) -> Vec<bool> {
    let n = adj.len();
    let mut is_target = vec![false; n];
    for &t in target {
        is_target[t] = true;
        adj[t] = vec![t];
    }
    let rev = reverse(adj);
    let can_reach = forward_closure(&rev, target);
    let doomed: Vec<usize> = (0..n).filter(|&v| !can_reach[v]).collect();
    let tainted = forward_closure(&rev, &doomed);
    (0..n).map(|v| !tainted[v]).collect()
}

/// The unique stationary distribution of a recurrent class, solved by
/// partial-pivoting Gaussian elimination with a residual check.
#[allow(clippy::needless_range_loop)]
pub fn stationary_distribution<R: Real>(
    chain: &MarkovChain<R>,
    class: &RecurrentClass,
) -> Result<Vec<R>> {
    let k = class.nodes.len();
    let pos: HashMap<usize, usize> = class.nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    // Local transition matrix p[i][j] = P(nodes[i] -> nodes[j]).
    let mut p = vec![vec![R::zero(); k]; k];
    for (i, &n) in class.nodes.iter().enumerate() {
        for &(succ, prob) in chain.step[n].entries() {
            let j = *pos.get(&succ).ok_or_else(|| {
                Error::input("class is not closed: not a bottom SCC".to_string())
            })?;
            p[i][j] = prob;
        }
    }
    // (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
    let mut a = vec![vec![R::zero(); k + 1]; k];
    for j in 0..k {
        for i in 0..k {
            a[j][i] = p[i][j];
        }
        a[j][j] -= R::one();
    }
    for i in 0..k {
        a[k - 1][i] = R::one();
    }
    a[k - 1][k] = R::one();
    solve_in_place(&mut a)?;
    let mut pi: Vec<R> = (0..k).map(|i| a[i][k]).collect();
    let total: R = pi.iter().copied().sum();
    for x in pi.iter_mut() {
        *x = *x / total;
    }
    // Residual of pi P = pi.
    let mut residual = R::zero();
    for j in 0..k {
        let mut acc = R::zero();
        for i in 0..k {
            acc += pi[i] * p[i][j];
        }
        residual = residual.max((acc - pi[j]).abs());
    }
    if residual > R::residual_tolerance() {
        return Err(Error::Numerical {
            message: "stationary distribution did not converge".into(),
            residual: residual.as_f64(),
        });
    }
    if pi.iter().any(|&x| x <= R::zero()) {
        return Err(Error::Numerical {
            message: "stationary distribution has a non-positive entry".into(),
            residual: residual.as_f64(),
        });
    }
    Ok(pi)
}

/// Gaussian elimination with partial pivoting on an augmented matrix;
/// leaves the solution in the last column.
#[allow(clippy::needless_range_loop)]
fn solve_in_place<R: Real>(a: &mut [Vec<R>]) -> Result<()> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .abs()
                    .partial_cmp(&a[j][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("non-empty system");
        if a[pivot][col].abs() < R::support_cutoff() * R::support_cutoff() {
            return Err(Error::Numerical {
                message: "singular linear system".into(),
                residual: a[pivot][col].abs().as_f64(),
            });
        }
        a.swap(col, pivot);
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row][col] / a[col][col];
            if factor == R::zero() {
                continue;
            }
            for k in col..=n {
                let v = a[col][k];
                a[row][k] -= factor * v;
            }
        }
    }
    for row in 0..n {
        let d = a[row][row];
        a[row][n] = a[row][n] / d;
    }
    Ok(())
}

/// The almost-sure limit-average payoff of any run entering the class.
pub fn class_mean_payoff<R: Real>(chain: &MarkovChain<R>, class: &RecurrentClass) -> Result<R> {
    let pi = stationary_distribution(chain, class)?;
    Ok(class
        .nodes
        .iter()
        .zip(pi.iter())
        .map(|(&n, &p)| p * chain.node_reward[n])
        .sum())
}

#[derive(Clone, Debug)]
pub enum Witness<R: Real = f64> {
    /// Success: every reachable recurrent node plays only reward-1
    /// actions.
    AllRecurrentRewardOne,
    /// A reachable recurrent node plays an action with reward below 1.
    OffendingAction {
        state: String,
        memory: String,
        action: String,
        reward: R,
    },
    /// Success: mean payoffs of all reachable recurrent classes.
    ClassMeans { means: Vec<R> },
    /// A reachable recurrent class with mean payoff at or below the
    /// threshold.
    FailingClass { states: Vec<String>, mean: R },
}

/// Outcome of an exact certification run.
#[derive(Clone, Debug)]
pub struct Certificate<R: Real = f64> {
    pub winning: bool,
    pub objective: String,
    pub witness: Witness<R>,
    pub chain_nodes: usize,
    pub reachable_classes: usize,
}

impl<R: Real> std::fmt::Display for Certificate<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "certificate: {} for {}",
            if self.winning { "winning" } else { "not winning" },
            self.objective
        )?;
        writeln!(
            f,
            "product chain: {} nodes, {} reachable recurrent classes",
            self.chain_nodes, self.reachable_classes
        )?;
        writeln!(f, "{}", self.witness)
    }
}

impl<R: Real> std::fmt::Display for Witness<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Witness::AllRecurrentRewardOne => {
                write!(f, "all reachable recurrent nodes play only reward-1 actions")
            }
            Witness::OffendingAction { state, memory, action, reward } => write!(
                f,
                "offending node: state {state}, memory {memory}, action {action} has reward {reward}"
            ),
            Witness::ClassMeans { means } => {
                write!(f, "class mean payoffs:")?;
                for m in means {
                    write!(f, " {m}")?;
                }
                Ok(())
            }
            Witness::FailingClass { states, mean } => {
                write!(f, "failing class (mean {mean}): {}", states.join(" "))
            }
        }
    }
}

/// Certifies that `sigma` wins the qualitative objective (limit-average
/// payoff 1 with probability 1): every node of every reachable recurrent
/// class must play only actions with reward exactly 1.
pub fn certify_limavg1<R: Real>(model: &Pomdp<R>, sigma: &FiniteStrategy<R>) -> Certificate<R> {
    let product = product_chain(model, sigma);
    let chain = &product.chain;
    let classes = bottom_sccs(chain);
    let mut reachable_classes = 0;
    for class in &classes {
        reachable_classes += 1;
        for &n in &class.nodes {
            let (s, m) = chain.payload[n];
            for a in sigma.next_action[m].support() {
                if model.reward[s][a] < R::one() - R::reward_one_slack() {
                    return Certificate {
                        winning: false,
                        objective: "limit-average payoff = 1 almost surely".into(),
                        witness: Witness::OffendingAction {
                            state: model.states[s].clone(),
                            memory: sigma.memory[m].clone(),
                            action: model.actions[a].clone(),
                            reward: model.reward[s][a],
                        },
                        chain_nodes: chain.node_count(),
                        reachable_classes: classes.len(),
                    };
                }
            }
        }
    }
    Certificate {
        winning: true,
        objective: "limit-average payoff = 1 almost surely".into(),
        witness: Witness::AllRecurrentRewardOne,
        chain_nodes: chain.node_count(),
        reachable_classes,
    }
}

/// Certifies that `sigma` wins the quantitative objective: every
/// reachable recurrent class must have mean payoff strictly above
/// `lambda` (with a strictness margin).
pub fn certify_limavg_gt<R: Real>(
    model: &Pomdp<R>,
    sigma: &FiniteStrategy<R>,
    lambda: R,
) -> Result<Certificate<R>> {
    if lambda <= R::zero() || lambda >= R::one() {
        return Err(Error::input(format!("threshold {lambda} outside (0, 1)")));
    }
    let product = product_chain(model, sigma);
    let chain = &product.chain;
    let classes = bottom_sccs(chain);
    let objective = format!("limit-average payoff > {lambda} almost surely");
    let mut means = Vec::new();
    for class in &classes {
        let mean = class_mean_payoff(chain, class)?;
        if mean <= lambda + R::threshold_margin() {
            return Ok(Certificate {
                winning: false,
                objective,
                witness: Witness::FailingClass {
                    states: class
                        .nodes
                        .iter()
                        .map(|&n| {
                            let (s, m) = chain.payload[n];
                            format!("({},{})", model.states[s], sigma.memory[m])
                        })
                        .collect(),
                    mean,
                },
                chain_nodes: chain.node_count(),
                reachable_classes: classes.len(),
            });
        }
        means.push(mean);
    }
    Ok(Certificate {
        winning: true,
        objective,
        witness: Witness::ClassMeans { means },
        chain_nodes: chain.node_count(),
        reachable_classes: classes.len(),
    })
}
