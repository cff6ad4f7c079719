//! Command-line interface: solve, verify, collapse, reduce, oracle,
//! simulate. Exit codes: 0 = YES / winning, 1 = NO / not winning,
//! 2 = input error, 3 = capacity exceeded.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use pomdp_limavg::chain::{certify_limavg_gt, Certificate};
use pomdp_limavg::collapse::{collapsed_graph, collapsed_strategy};
use pomdp_limavg::error::{Error, Result};
use pomdp_limavg::format::{
    parse_pfa, parse_pomdp, parse_strategy, serialize_pomdp, serialize_strategy,
};
use pomdp_limavg::model::{FiniteStrategy, Pomdp};
use pomdp_limavg::oracle::{bounded_oracle, OracleOutcome};
use pomdp_limavg::reductions::{reduce_strict_emptiness, reduce_value1};
use pomdp_limavg::sim::simulate;
use pomdp_limavg::solver::{solve_limavg1_with, SolverLimits};
use pomdp_limavg::{certify_limavg1, Real};

#[derive(Parser)]
#[command(
    name = "pomdp-limavg",
    version,
    about = "Finite-memory almost-sure winning for limit-average objectives in POMDPs"
)]
struct Cli {
    /// Emit machine-readable JSON reports.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide the limit-average-one problem; on YES, synthesize and
    /// certify a strategy.
    Solve {
        model: PathBuf,
        /// Write the synthesized strategy to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Node cap for the exponential construction.
        #[arg(long, default_value_t = 1_000_000)]
        max_nodes: usize,
    },
    /// Certify a given strategy (limit-average = 1, or > lambda).
    Verify {
        model: PathBuf,
        strategy: PathBuf,
        /// Check limit-average > lambda instead of = 1.
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Compress a strategy through its annotation quotient.
    Collapse {
        model: PathBuf,
        strategy: PathBuf,
        /// Write the collapsed strategy to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the collapsed graph in DOT format to this file.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Build the POMDP gadget for a PFA emptiness problem.
    Reduce {
        kind: ReduceKind,
        pfa: PathBuf,
        /// Write the gadget POMDP to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force search for a small certified winning strategy.
    Oracle {
        model: PathBuf,
        /// Maximum memory size to try.
        #[arg(long, default_value_t = 2)]
        memory: usize,
        /// Also try uniform distributions over supports (not just pure
        /// strategies).
        #[arg(long)]
        support: bool,
        /// Maximum number of strategies to certify.
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
    },
    /// Sample one trajectory and report the empirical average reward.
    Simulate {
        model: PathBuf,
        strategy: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ReduceKind {
    /// Strict emptiness: some word accepted with probability > 1/2.
    StrictEmptiness,
    /// Value 1: acceptance probabilities approach 1.
    Value1,
}

fn read(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::input(format!("cannot read {}: {}", path.display(), e)))
}

fn write_out(path: &PathBuf, text: &str) -> Result<()> {
    fs::write(path, text)
        .map_err(|e| Error::input(format!("cannot write {}: {}", path.display(), e)))
}

fn load_pair(model: &PathBuf, strategy: &PathBuf) -> Result<(Pomdp<f64>, FiniteStrategy<f64>)> {
    let m = parse_pomdp(&read(model)?)?;
    let s = parse_strategy(&read(strategy)?, &m)?;
    Ok((m, s))
}

fn cert_json<R: Real>(cert: &Certificate<R>) -> serde_json::Value {
    json!({
        "winning": cert.winning,
        "objective": cert.objective,
        "witness": cert.witness.to_string(),
        "chain_nodes": cert.chain_nodes,
        "reachable_classes": cert.reachable_classes,
    })
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.cmd {
        Cmd::Solve { model, out, max_nodes } => {
            let m: Pomdp<f64> = parse_pomdp(&read(model)?)?;
            let res = solve_limavg1_with(&m, SolverLimits { max_nodes: *max_nodes })?;
            if cli.json {
                println!(
                    "{}",
                    json!({
                        "decision": if res.decision { "YES" } else { "NO" },
                        "memory_size": res.strategy.as_ref().map(|s| s.memory.len()),
                        "node_count": res.stats.nodes,
                        "groups": res.stats.groups,
                        "iterations": res.stats.iterations,
                        "certificate": res.certificate.as_ref().map(cert_json),
                        "wall_ms": res.stats.wall_ms,
                    })
                );
            } else if res.decision {
                let sigma = res.strategy.as_ref().expect("YES carries a strategy");
                println!("YES: almost-sure limit-average-1 strategy with {} memory elements", sigma.memory.len());
                println!("{}", res.certificate.as_ref().expect("YES carries a certificate"));
                if out.is_none() {
                    print!("{}", serialize_strategy(&m, sigma));
                }
            } else {
                println!("NO: no finite-memory strategy wins almost surely");
            }
            if let Some(path) = out {
                if let Some(sigma) = &res.strategy {
                    write_out(path, &serialize_strategy(&m, sigma))?;
                }
            }
            Ok(if res.decision { 0 } else { 1 })
        }
        Cmd::Verify { model, strategy, lambda } => {
            let (m, sigma) = load_pair(model, strategy)?;
            let cert = match lambda {
                Some(l) => certify_limavg_gt(&m, &sigma, *l)?,
                None => certify_limavg1(&m, &sigma),
            };
            if cli.json {
                println!("{}", cert_json(&cert));
            } else {
                println!("{}", cert);
            }
            Ok(if cert.winning { 0 } else { 1 })
        }
        Cmd::Collapse { model, strategy, out, dot } => {
            let (m, sigma) = load_pair(model, strategy)?;
            let graph = collapsed_graph(&m, &sigma);
            let collapsed = collapsed_strategy(&m, &sigma);
            if let Some(path) = out {
                write_out(path, &serialize_strategy(&m, &collapsed))?;
            }
            if let Some(path) = dot {
                write_out(path, &graph.to_dot(&m))?;
            }
            if cli.json {
                println!(
                    "{}",
                    json!({
                        "original_memory": sigma.memory.len(),
                        "collapsed_memory": collapsed.memory.len(),
                        "vertices": graph.vertices.len(),
                        "edges": graph.edges.len(),
                    })
                );
            } else {
                println!(
                    "collapsed {} memory elements to {} vertices ({} edges)",
                    sigma.memory.len(),
                    graph.vertices.len(),
                    graph.edges.len()
                );
                if out.is_none() {
                    print!("{}", serialize_strategy(&m, &collapsed));
                }
            }
            Ok(0)
        }
        Cmd::Reduce { kind, pfa, out } => {
            let p = parse_pfa::<f64>(&read(pfa)?)?;
            let gadget = match kind {
                ReduceKind::StrictEmptiness => reduce_strict_emptiness(&p),
                ReduceKind::Value1 => reduce_value1(&p),
            };
            let text = serialize_pomdp(&gadget);
            if let Some(path) = out {
                write_out(path, &text)?;
            }
            if cli.json {
                println!(
                    "{}",
                    json!({
                        "name": gadget.name,
                        "states": gadget.state_count(),
                        "actions": gadget.action_count(),
                    })
                );
            } else if out.is_none() {
                print!("{}", text);
            }
            Ok(0)
        }
        Cmd::Oracle { model, memory, support, budget } => {
            let m: Pomdp<f64> = parse_pomdp(&read(model)?)?;
            let outcome = bounded_oracle(&m, *memory, *support, *budget)?;
            match outcome {
                OracleOutcome::Yes(sigma) => {
                    if cli.json {
                        println!(
                            "{}",
                            json!({
                                "outcome": "YES",
                                "memory_size": sigma.memory.len(),
                            })
                        );
                    } else {
                        println!("YES: certified winner with {} memory elements", sigma.memory.len());
                        print!("{}", serialize_strategy(&m, &sigma));
                    }
                    Ok(0)
                }
                OracleOutcome::Unknown => {
                    if cli.json {
                        println!("{}", json!({ "outcome": "UNKNOWN" }));
                    } else {
                        println!("UNKNOWN: no winner in the searched grid");
                    }
                    Ok(1)
                }
            }
        }
        Cmd::Simulate { model, strategy, steps, seed } => {
            let (m, sigma) = load_pair(model, strategy)?;
            let rep = simulate(&m, &sigma, *steps, *seed)?;
            if cli.json {
                let visits: Vec<serde_json::Value> = {
                    let mut items: Vec<_> = rep.visit_counts.iter().collect();
                    items.sort();
                    items
                        .into_iter()
                        .map(|(&(s, mem), &c)| {
                            json!({
                                "state": m.states[s],
                                "memory": sigma.memory[mem],
                                "visits": c,
                            })
                        })
                        .collect()
                };
                println!(
                    "{}",
                    json!({
                        "steps": rep.steps,
                        "seed": rep.seed,
                        "empirical_average": rep.empirical_average,
                        "visit_counts": visits,
                    })
                );
            } else {
                println!(
                    "empirical average over {} steps (seed {}): {:.6}",
                    rep.steps, rep.seed, rep.empirical_average
                );
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            if cli.json {
                eprintln!("{}", json!({ "error": e.to_string() }));
            } else {
                eprintln!("error: {}", e);
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
