//! Memory collapse: quotienting a finite-memory strategy by its
//! per-memory annotations.
//!
//! A memory element is annotated with the set of states that are
//! almost-sure winning when paired with it, the set that is recurrent
//! when paired with it, and the support of its action distribution.
//! Memory elements agreeing on all three (under equal beliefs) are one
//! vertex of the collapsed graph, which bounds the memory of the
//! quotient strategy by `2^(3|S|+|A|)`.

use std::collections::{BTreeSet, HashMap};

use crate::bits::Mask64;
use crate::chain::{bottom_sccs, product_chain_all, tarjan_sccs};
use crate::model::{Distribution, FiniteStrategy, Pomdp};
use crate::num::Real;

/// A collapsed-graph vertex: belief plus winning/recurrent/action-support
/// annotations. Equality and hashing are componentwise.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct MemoryAnnotation {
    pub belief: Mask64,
    pub winning: Mask64,
    pub recurrent: Mask64,
    pub action_support: Mask64,
}

/// Per-memory annotation components (winning set, recurrent set, action
/// support), before pairing with a belief.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Annotation {
    pub winning: Mask64,
    pub recurrent: Mask64,
    pub action_support: Mask64,
}

#[derive(Clone, Debug)]
pub struct CollapsedGraph {
    pub vertices: Vec<MemoryAnnotation>,
    pub initial: usize,
    /// `(source vertex, action, target vertex)` triples.
    pub edges: BTreeSet<(usize, usize, usize)>,
}

impl CollapsedGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Dot-like adjacency listing for manual inspection.
    pub fn to_dot<R: Real>(&self, model: &Pomdp<R>) -> String {
        let fmt_set = |m: Mask64| {
            let names: Vec<&str> = m.iter().map(|s| model.states[s].as_str()).collect();
            format!("{{{}}}", names.join(","))
        };
        let fmt_acts = |m: Mask64| {
            let names: Vec<&str> = m.iter().map(|a| model.actions[a].as_str()).collect();
            format!("{{{}}}", names.join(","))
        };
        let mut out = String::from("digraph collapsed {\n");
        for (i, v) in self.vertices.iter().enumerate() {
            out.push_str(&format!(
                "  v{} [label=\"Y={} W={} R={} A={}{}\"]\n",
                i,
                fmt_set(v.belief),
                fmt_set(v.winning),
                fmt_set(v.recurrent),
                fmt_acts(v.action_support),
                if i == self.initial { " (init)" } else { "" },
            ));
        }
        for &(u, a, v) in &self.edges {
            out.push_str(&format!("  v{} -> v{} [label=\"{}\"]\n", u, v, model.actions[a]));
        }
        out.push_str("}\n");
        out
    }
}

/// Computes the winning/recurrent/action-support annotation of every
/// memory element of `sigma`. The analysis runs on the chain over the
/// full product space, which subsumes re-rooting at pairs unreachable
/// from the initial configuration.
pub fn annotate<R: Real>(model: &Pomdp<R>, sigma: &FiniteStrategy<R>) -> Vec<Annotation> {
    let product = product_chain_all(model, sigma);
    let chain = &product.chain;
    let n = chain.node_count();
    let adj = chain.adjacency();

    let mut recurrent = vec![false; n];
    for class in bottom_sccs(chain) {
        for node in class.nodes {
            recurrent[node] = true;
        }
    }

    // A node is "good" when every action in its memory's support has
    // reward exactly 1 at its state. A node is almost-sure winning iff
    // no reachable recurrent node is bad (the recurrent-class reward
    // criterion applied from that node).
    let good: Vec<bool> = (0..n)
        .map(|v| {
            let (s, m) = chain.payload[v];
            sigma.next_action[m]
                .support()
                .all(|a| model.reward[s][a] >= R::one() - R::reward_one_slack())
        })
        .collect();
    // Tarjan emits components in reverse topological order: every
    // component is emitted before the components that can reach it, so a
    // single pass propagates badness backwards.
    let sccs = tarjan_sccs(&adj);
    let mut comp_of = vec![0usize; n];
    for (c, comp) in sccs.iter().enumerate() {
        for &v in comp {
            comp_of[v] = c;
        }
    }
    let mut comp_bad = vec![false; sccs.len()];
    for (c, comp) in sccs.iter().enumerate() {
        let mut bad = comp.iter().any(|&v| recurrent[v] && !good[v]);
        if !bad {
            bad = comp
                .iter()
                .flat_map(|&v| adj[v].iter())
                .any(|&w| comp_bad[comp_of[w]]);
        }
        comp_bad[c] = bad;
    }
    let winning: Vec<bool> = (0..n).map(|v| !comp_bad[comp_of[v]]).collect();

    (0..sigma.memory_count())
        .map(|m| {
            let mut w = Mask64::EMPTY;
            let mut r = Mask64::EMPTY;
            for s in 0..model.state_count() {
                let node = product.node_of[&(s, m)];
                if winning[node] {
                    w.insert(s);
                }
                if recurrent[node] {
                    r.insert(s);
                }
            }
            Annotation {
                winning: w,
                recurrent: r,
                action_support: sigma.next_action[m].support_mask(),
            }
        })
        .collect()
}

/// Builds the collapsed graph of `sigma`: vertices are
/// (belief, winning, recurrent, action-support) quadruples reachable
/// from `({initial}, annotation of initial memory)`; there is an
/// `a`-labeled edge when some observation yields a non-empty belief
/// update and a supported memory update. Vertices are in a canonical
/// order (sorted componentwise) for reproducibility.
pub fn collapsed_graph<R: Real>(model: &Pomdp<R>, sigma: &FiniteStrategy<R>) -> CollapsedGraph {
    let annotations = annotate(model, sigma);
    let vertex_of = |belief: Mask64, m: usize| MemoryAnnotation {
        belief,
        winning: annotations[m].winning,
        recurrent: annotations[m].recurrent,
        action_support: annotations[m].action_support,
    };

    // BFS over (belief, memory) pairs; vertices are their quotient.
    let init_pair = (Mask64::singleton(model.initial), sigma.initial_memory);
    let mut seen_pairs: BTreeSet<(Mask64, usize)> = BTreeSet::new();
    seen_pairs.insert(init_pair);
    let mut queue = vec![init_pair];
    let mut raw_edges: BTreeSet<(MemoryAnnotation, usize, MemoryAnnotation)> = BTreeSet::new();
    let mut raw_vertices: BTreeSet<MemoryAnnotation> = BTreeSet::new();
    raw_vertices.insert(vertex_of(init_pair.0, init_pair.1));
    while let Some((belief, m)) = queue.pop() {
        let src = vertex_of(belief, m);
        for a in annotations[m].action_support.iter() {
            let mut image = Mask64::EMPTY;
            for s in belief.iter() {
                image = image.union(model.transition[s][a].support_mask());
            }
            for o in 0..model.observation_count() {
                let belief2 = image.intersect(model.obs_class(o));
                if belief2.is_empty() {
                    continue;
                }
                for m2 in sigma.update[m][o][a].support() {
                    let dst = vertex_of(belief2, m2);
                    raw_vertices.insert(dst);
                    raw_edges.insert((src, a, dst));
                    if seen_pairs.insert((belief2, m2)) {
                        queue.push((belief2, m2));
                    }
                }
            }
        }
    }

    let vertices: Vec<MemoryAnnotation> = raw_vertices.into_iter().collect();
    let index: HashMap<MemoryAnnotation, usize> =
        vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let edges = raw_edges
        .into_iter()
        .map(|(u, a, v)| (index[&u], a, index[&v]))
        .collect();
    CollapsedGraph {
        initial: index[&vertex_of(init_pair.0, init_pair.1)],
        vertices,
        edges,
    }
}

/// The collapsed strategy: memory is the collapsed-graph vertex set,
/// playing uniformly over edge actions and updating uniformly over edge
/// targets consistent with the received observation.
pub fn collapsed_strategy<R: Real>(
    model: &Pomdp<R>,
    sigma: &FiniteStrategy<R>,
) -> FiniteStrategy<R> {
    let graph = collapsed_graph(model, sigma);
    let nv = graph.vertex_count();
    let na = model.action_count();
    let no = model.observation_count();

    let mut next_action = Vec::with_capacity(nv);
    let mut update = Vec::with_capacity(nv);
    for v in 0..nv {
        let acts: BTreeSet<usize> = graph
            .edges
            .iter()
            .filter(|&&(u, _, _)| u == v)
            .map(|&(_, a, _)| a)
            .collect();
        next_action.push(
            Distribution::uniform(acts.iter().copied())
                .expect("collapsed vertex has at least one edge"),
        );
        let mut per_obs = Vec::with_capacity(no);
        for o in 0..no {
            let class = model.obs_class(o);
            let mut per_act = Vec::with_capacity(na);
            for a in 0..na {
                let targets: BTreeSet<usize> = graph
                    .edges
                    .iter()
                    .filter(|&&(u, ea, t)| {
                        u == v && ea == a && graph.vertices[t].belief.is_subset(class)
                    })
                    .map(|&(_, _, t)| t)
                    .collect();
                per_act.push(if targets.is_empty() {
                    // combination unreachable in play; stay put
                    Distribution::dirac(v)
                } else {
                    Distribution::uniform(targets.iter().copied()).expect("non-empty")
                });
            }
            per_obs.push(per_act);
        }
        update.push(per_obs);
    }

    FiniteStrategy {
        name: format!("{}_collapsed", sigma.name),
        memory: (0..nv).map(|v| format!("v{v}")).collect(),
        initial_memory: graph.initial,
        next_action,
        update,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::certify_limavg1;
    use crate::model::Distribution;

    fn one_state_model() -> Pomdp<f64> {
        Pomdp {
            name: "one".into(),
            states: vec!["s".into()],
            actions: vec!["a".into(), "b".into()],
            observations: vec!["o".into()],
            obs_of: vec![0],
            transition: vec![vec![Distribution::dirac(0), Distribution::dirac(0)]],
            reward: vec![vec![1.0, 1.0]],
            initial: 0,
        }
    }

    #[test]
    fn all_reward_one_annotations() {
        let m = one_state_model();
        let sigma = FiniteStrategy::uniform_memoryless(&m);
        let ann = annotate(&m, &sigma);
        assert_eq!(ann.len(), 1);
        assert_eq!(ann[0].winning, Mask64::singleton(0));
        assert_eq!(ann[0].recurrent, Mask64::singleton(0));
        assert_eq!(ann[0].action_support, Mask64::from_iter([0, 1]));
    }

    #[test]
    fn memoryless_on_one_state_collapses_to_one_vertex() {
        let m = one_state_model();
        let sigma = FiniteStrategy::uniform_memoryless(&m);
        let g = collapsed_graph(&m, &sigma);
        assert_eq!(g.vertex_count(), 1);
        // self-loop per supported action
        assert_eq!(g.edges.len(), 2);
        assert!(g.edges.contains(&(0, 0, 0)) && g.edges.contains(&(0, 1, 0)));
    }

    #[test]
    fn identical_annotations_merge() {
        // Two memory elements with identical behavior collapse to one
        // vertex.
        let m = one_state_model();
        let sigma = FiniteStrategy {
            name: "dup".into(),
            memory: vec!["m0".into(), "m1".into()],
            initial_memory: 0,
            next_action: vec![
                Distribution::uniform(0..2).unwrap(),
                Distribution::uniform(0..2).unwrap(),
            ],
            update: vec![
                vec![vec![Distribution::dirac(1), Distribution::dirac(1)]],
                vec![vec![Distribution::dirac(0), Distribution::dirac(0)]],
            ],
        };
        let g = collapsed_graph(&m, &sigma);
        assert_eq!(g.vertex_count(), 1);
    }

    #[test]
    fn collapse_of_winning_strategy_stays_winning() {
        let m = one_state_model();
        let sigma = FiniteStrategy::uniform_memoryless(&m);
        assert!(certify_limavg1(&m, &sigma).winning);
        let collapsed = collapsed_strategy(&m, &sigma);
        assert!(certify_limavg1(&m, &collapsed).winning);
    }
}
