//! Collapse-specific structural tests: annotation correctness on the
//! built-in example, idempotence of the quotient (up to action-labeled
//! graph isomorphism), and solver/collapse interplay.

mod common;

use pomdp_limavg::chain::certify_limavg1;
use pomdp_limavg::collapse::{annotate, collapsed_graph, collapsed_strategy};
use pomdp_limavg::fixtures;
use pomdp_limavg::solver::solve_limavg1;

#[test]
fn example_annotations_match_analysis() {
    let model = fixtures::example1();
    let s0 = 0usize;

    // playing a forever: both recurrent classes of the induced chain
    // contain a zero-reward state, so nothing is winning
    let ann_a = annotate(&model, &fixtures::always_a(&model));
    assert!(ann_a[0].winning.is_empty());
    assert!(!ann_a[0].recurrent.is_empty());

    // uniform mixing: the ring is one recurrent class containing the
    // zero-reward states, so again nothing is winning
    let ann_u = annotate(&model, &fixtures::uniform_ab(&model));
    assert!(ann_u[0].winning.is_empty());

    // alternation wins from every state, at both phases
    let ann_alt = annotate(&model, &fixtures::alternate_ab(&model));
    for ann in &ann_alt {
        for s in 0..model.state_count() {
            assert!(ann.winning.contains(s), "alternation wins from every product state");
        }
    }
    assert!(ann_alt[0].winning.contains(s0));
}

#[test]
fn collapse_preserves_winning_on_example() {
    let model = fixtures::example1();
    let alt = fixtures::alternate_ab(&model);
    let collapsed = collapsed_strategy(&model, &alt);
    assert!(certify_limavg1(&model, &collapsed).winning);
    let bound = 1u128 << (3 * model.state_count() + model.action_count());
    assert!((collapsed.memory.len() as u128) <= bound);
}

#[test]
fn collapse_idempotent_on_example() {
    let model = fixtures::example1();
    let alt = fixtures::alternate_ab(&model);
    let g1 = collapsed_graph(&model, &alt);
    let once = collapsed_strategy(&model, &alt);
    let g2 = collapsed_graph(&model, &once);
    assert_eq!(g1.vertex_count(), g2.vertex_count(), "second collapse must not change size");
    assert!(
        common::digraph_isomorphic(g1.vertex_count(), g1.initial, &g1.edges, g2.initial, &g2.edges),
        "collapsed graphs must be isomorphic under re-collapse"
    );
}

#[test]
fn collapse_idempotent_on_random_winners() {
    let mut rng = common::rng(0xC0AA);
    let mut done = 0usize;
    let mut attempts = 0usize;
    while done < 25 {
        attempts += 1;
        assert!(attempts < 5000);
        let model = common::random_pomdp(&mut rng, 4, 2, 2, 0.85);
        let sigma = common::random_strategy(&mut rng, &model, 2);
        if !certify_limavg1(&model, &sigma).winning {
            continue;
        }
        let g1 = collapsed_graph(&model, &sigma);
        if g1.vertex_count() > 8 {
            continue; // keep the backtracking isomorphism cheap
        }
        let once = collapsed_strategy(&model, &sigma);
        let g2 = collapsed_graph(&model, &once);
        assert_eq!(g1.vertex_count(), g2.vertex_count());
        assert!(common::digraph_isomorphic(
            g1.vertex_count(),
            g1.initial,
            &g1.edges,
            g2.initial,
            &g2.edges
        ));
        done += 1;
    }
}

#[test]
fn solver_output_collapses_and_stays_winning() {
    let model = fixtures::example1();
    let res = solve_limavg1(&model).unwrap();
    let sigma = res.strategy.unwrap();
    let collapsed = collapsed_strategy(&model, &sigma);
    assert!(
        collapsed.memory.len() <= sigma.memory.len() * 4,
        "collapse should not blow up the synthesized strategy"
    );
    assert!(certify_limavg1(&model, &collapsed).winning);
}

#[test]
fn dot_export_mentions_every_vertex() {
    let model = fixtures::example1();
    let alt = fixtures::alternate_ab(&model);
    let graph = collapsed_graph(&model, &alt);
    let dot = graph.to_dot(&model);
    assert!(dot.starts_with("digraph"));
    for v in 0..graph.vertex_count() {
        assert!(dot.contains(&format!("v{} [label=", v)));
    }
}
