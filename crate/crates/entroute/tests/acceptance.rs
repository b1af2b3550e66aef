//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Run with `cargo test -p entroute --test acceptance`.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{all_paths, fresh, instance_with, respects_capacity, Profile, Small};
use entroute::formats::to_json;
use entroute::{
    route_instance, route_with_catalog, run_experiment, Algorithm, ExperimentConfig, InstanceFile,
    PlanFile,
};
use entroute_core::kpaths::path_order;
use entroute_core::lp::{build_step1_lp, build_step2_lp, solve_lp};
use entroute_core::oracle::{brute_force_step1, brute_force_step2};
use entroute_core::{
    generate_topology, simulate_throughput, solve_step1, solve_throughput_direct, yen_k_shortest,
    NetworkGraph, NodeId, Point, RoutePath, RoutingPlan, TopologyConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const MIN_INSTANCES: usize = 200;
const PLAIN_PER_PROFILE: u64 = 300;
const THROUGHPUT_TOL: f64 = 1e-9;
const LP_TOL: f64 = 1e-7;
const RESIDUAL_TOL: f64 = 1e-9;
const FLOOR_TOL: f64 = 1e-9;
const MC_PATHS: usize = 20;
const MC_TRIALS: u64 = 1_000_000;
const MC_SIGMAS: f64 = 4.0;
const MC_REQUIRED: usize = 19;
const YEN_GRAPHS: u64 = 50;
const YEN_MAX_SWITCHES: u32 = 8;
const TREND_SEEDS: u64 = 5;
const BUDGET_C1: Duration = Duration::from_secs(120);
const BUDGET_C3: Duration = Duration::from_secs(60);
const BUDGET_C6: Duration = Duration::from_secs(600);

struct Outcome {
    pass: bool,
    detail: String,
}

/// Instance families shared by criteria 1, 2, 4 and 7.
struct Corpus {
    /// (label, seed, instance)
    instances: Vec<(&'static str, u64, Small)>,
}

fn step1_fractional(s: &Small) -> bool {
    let f = build_step1_lp(&s.catalog, &s.instance.graph);
    let r = solve_lp(&f.problem);
    r.values.iter().any(|&v| v > FLOOR_TOL && v < 1.0 - FLOOR_TOL)
}

fn step2_fractional(s: &Small) -> bool {
    let g = &s.instance.graph;
    let f = build_step2_lp(&s.catalog, g, &fresh(g), &vec![true; s.catalog.pair_count()]);
    let r = solve_lp(&f.problem);
    r.values
        .iter()
        .any(|&v| v - (v + FLOOR_TOL).floor() > FLOOR_TOL)
}

fn sample(filter: fn(&Small) -> bool, start: u64, want: usize) -> Vec<(u64, Small)> {
    let mut out = Vec::new();
    let mut seed = start;
    while out.len() < want {
        let s = instance_with(Profile::Contended, seed);
        if filter(&s) {
            out.push((seed, s));
        }
        seed += 1;
    }
    out
}

impl Corpus {
    fn build() -> Self {
        let mut instances = Vec::new();
        for seed in 0..PLAIN_PER_PROFILE {
            instances.push(("sparse", seed, instance_with(Profile::Sparse, seed)));
            instances.push(("contended", seed, instance_with(Profile::Contended, seed)));
        }
        for (seed, s) in sample(step1_fractional, 1_000_000, MIN_INSTANCES) {
            instances.push(("fractional-step1", seed, s));
        }
        for (seed, s) in sample(step2_fractional, 2_000_000, MIN_INSTANCES) {
            instances.push(("fractional-step2", seed, s));
        }
        Corpus { instances }
    }
}

fn criterion1(corpus: &Corpus) -> Outcome {
    let mut violations = Vec::new();
    let mut suboptimal = 0;
    let mut lp_ratio_exceeded = Vec::new();
    for (label, seed, s) in &corpus.instances {
        let g = &s.instance.graph;
        let plan = solve_step1(g, &s.catalog, &mut fresh(g)).expect("step I runs");
        let oracle = brute_force_step1(&s.catalog, g).expect("within guard");
        if oracle.served > 2 * plan.served_count || plan.served_count > oracle.served {
            violations.push(format!("{label}:{seed}"));
        }
        if plan.served_count < oracle.served {
            suboptimal += 1;
        }
        if plan.lp_optimum > 2.0 * plan.served_count as f64 + LP_TOL {
            lp_ratio_exceeded.push(format!("{label}:{seed}"));
        }
    }
    Outcome {
        pass: violations.is_empty(),
        detail: format!(
            "{} instances, {} violations {:?}; served < oracle on {suboptimal}; \
             LP optimum > 2 x served on {} {:?}",
            corpus.instances.len(),
            violations.len(),
            violations,
            lp_ratio_exceeded.len(),
            lp_ratio_exceeded
        ),
    }
}

/// Best value reachable by the floor-then-residue decision space: the LP
/// floors committed in descending order (skipping units that no longer fit),
/// then at most one extra channel on each path with a fractional residue.
fn restricted_optimum(s: &Small) -> f64 {
    let g = &s.instance.graph;
    let include = vec![true; s.catalog.pair_count()];
    let f = build_step2_lp(&s.catalog, g, &fresh(g), &include);
    let r = solve_lp(&f.problem);
    let paths: Vec<&RoutePath> = f.paths.iter().map(|&gi| s.catalog.get(gi).1).collect();
    let mut order: Vec<usize> = (0..paths.len()).collect();
    order.sort_by(|&a, &b| r.values[b].total_cmp(&r.values[a]).then(a.cmp(&b)));
    let mut ledger = fresh(g);
    let mut base = 0.0;
    let mut residual_paths = Vec::new();
    for &j in &order {
        let v = r.values[j];
        let units = (v + FLOOR_TOL).floor() as u32;
        for _ in 0..units {
            if ledger.reserve_path(g, paths[j], 1).is_ok() {
                base += paths[j].success_prob();
            }
        }
        if v - f64::from(units) > FLOOR_TOL {
            residual_paths.push(paths[j]);
        }
    }
    let mut best = 0.0f64;
    for mask in 0u32..(1 << residual_paths.len()) {
        let mut l = ledger.clone();
        let mut value = 0.0;
        let mut ok = true;
        for (i, p) in residual_paths.iter().enumerate() {
            if mask & (1 << i) != 0 {
                ok &= l.reserve_path(g, p, 1).is_ok();
                value += p.success_prob();
            }
        }
        if ok {
            best = best.max(value);
        }
    }
    base + best
}

fn criterion2(corpus: &Corpus) -> Outcome {
    let mut explained = Vec::new();
    let mut unexplained = Vec::new();
    for (label, seed, s) in &corpus.instances {
        let g = &s.instance.graph;
        let plan = solve_throughput_direct(g, &s.catalog).expect("direct runs");
        let oracle = brute_force_step2(g, &fresh(g), &all_paths(&s.catalog)).expect("within guard");
        if (plan.additional_throughput - oracle.throughput).abs() <= THROUGHPUT_TOL {
            continue;
        }
        let tag = format!(
            "{label}:{seed} got {:.6e} oracle {:.6e}",
            plan.additional_throughput, oracle.throughput
        );
        if (plan.additional_throughput - restricted_optimum(s)).abs() <= THROUGHPUT_TOL {
            explained.push(tag);
        } else {
            unexplained.push(tag);
        }
    }
    Outcome {
        pass: unexplained.is_empty(),
        detail: format!(
            "{} instances, {} below the oracle: {} explained by the floor/residue decision space {:?}, \
             {} unexplained {:?}",
            corpus.instances.len(),
            explained.len() + unexplained.len(),
            explained.len(),
            explained,
            unexplained.len(),
            unexplained
        ),
    }
}

/// A chain of `hops + 1` switches with random link and swap probabilities.
fn random_chain(rng: &mut ChaCha8Rng) -> (NetworkGraph, RoutingPlan, f64) {
    let hops = rng.gen_range(1..=4u32);
    let q = rng.gen_range(0.5..=1.0);
    let mut b = NetworkGraph::builder(1.0, q);
    for s in 0..=hops {
        b.add_switch(NodeId(s), Point::default(), 8);
    }
    for s in 0..hops {
        let p: f64 = rng.gen_range(0.1..=1.0);
        b.add_link(NodeId(s), NodeId(s + 1), -p.ln());
    }
    let g = b.build().unwrap();
    let path = g.route_path((0..=hops).map(NodeId).collect()).unwrap();
    let channels = rng.gen_range(1..=3);
    let mut plan = RoutingPlan::new();
    plan.add(0, &path, channels);
    let analytic = plan.expected_throughput();
    (g, plan, analytic)
}

fn criterion3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let chains: Vec<_> = (0..MC_PATHS).map(|_| random_chain(&mut rng)).collect();
    let start = Instant::now();
    let z: Vec<f64> = chains
        .par_iter()
        .enumerate()
        .map(|(i, (g, plan, analytic))| {
            let r = simulate_throughput(g, plan, MC_TRIALS, i as u64).unwrap();
            (r.mean_throughput - analytic).abs() / r.std_error.max(f64::MIN_POSITIVE)
        })
        .collect();
    let elapsed = start.elapsed();
    let inside = z.iter().filter(|&&z| z <= MC_SIGMAS).count();
    let worst = z.iter().cloned().fold(0.0, f64::max);
    Outcome {
        pass: inside >= MC_REQUIRED && elapsed < BUDGET_C3,
        detail: format!(
            "{inside}/{MC_PATHS} paths within {MC_SIGMAS} standard errors (largest |z| = {worst:.2}), \
             {MC_TRIALS} trials each, {:.1}s",
            elapsed.as_secs_f64()
        ),
    }
}

fn criterion4(corpus: &Corpus) -> Outcome {
    let mut violations = Vec::new();
    let mut worst_residual = 0.0f64;
    let mut check = |label: &str, seed: u64, what: &str, lp: &entroute_core::lp::LpProblem, integer: f64| {
        let r = solve_lp(lp);
        let residual = if r.is_optimal() { lp.max_violation(&r.values) } else { f64::INFINITY };
        worst_residual = worst_residual.max(residual);
        if !r.is_optimal() || residual > RESIDUAL_TOL || r.objective_value < integer - LP_TOL {
            violations.push(format!("{label}:{seed}:{what}"));
        }
    };
    for (label, seed, s) in &corpus.instances {
        let g = &s.instance.graph;
        let o1 = brute_force_step1(&s.catalog, g).unwrap();
        check(label, *seed, "S1", &build_step1_lp(&s.catalog, g).problem, o1.served as f64);

        let include = vec![true; s.catalog.pair_count()];
        let o3 = brute_force_step2(g, &fresh(g), &all_paths(&s.catalog)).unwrap();
        let f3 = build_step2_lp(&s.catalog, g, &fresh(g), &include);
        check(label, *seed, "S3-full", &f3.problem, o3.throughput);

        let mut ledger = fresh(g);
        let s1 = solve_step1(g, &s.catalog, &mut ledger).unwrap();
        let mask = s1.served_mask();
        let f = build_step2_lp(&s.catalog, g, &ledger, &mask);
        if !f.paths.is_empty() {
            let served: Vec<&RoutePath> = f.paths.iter().map(|&gi| s.catalog.get(gi).1).collect();
            let o = brute_force_step2(g, &ledger, &served).unwrap();
            check(label, *seed, "S3-residual", &f.problem, o.throughput);
        }
    }
    Outcome {
        pass: violations.is_empty(),
        detail: format!(
            "{} instances x 3 relaxations, {} violations {:?}, largest residual {worst_residual:.1e}",
            corpus.instances.len(),
            violations.len(),
            violations
        ),
    }
}

fn enumerate_paths(g: &NetworkGraph, src: NodeId, dst: NodeId) -> Vec<RoutePath> {
    fn dfs(g: &NetworkGraph, at: usize, dst: usize, stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if at == dst {
            out.push(stack.clone());
            return;
        }
        if stack.len() > 1 && !g.is_switch_at(at) {
            return;
        }
        for &(next, _) in g.neighbors(at) {
            if !stack.contains(&next) {
                stack.push(next);
                dfs(g, next, dst, stack, out);
                stack.pop();
            }
        }
    }
    let (s, d) = (g.index_of(src).unwrap(), g.index_of(dst).unwrap());
    let mut raw = Vec::new();
    dfs(g, s, d, &mut vec![s], &mut raw);
    let mut paths: Vec<RoutePath> = raw
        .into_iter()
        .map(|idx| g.route_path(idx.iter().map(|&i| g.node_at(i).id).collect()).unwrap())
        .collect();
    paths.sort_by(path_order);
    paths
}

fn criterion5() -> Outcome {
    let mut mismatches = Vec::new();
    let mut total_paths = 0;
    for seed in 0..YEN_GRAPHS {
        let mut rng = ChaCha8Rng::seed_from_u64(5_000 + seed);
        let n = rng.gen_range(2..=YEN_MAX_SWITCHES);
        let integer_lengths = seed % 2 == 0;
        let density = rng.gen_range(0.2..0.9);
        let mut b = NetworkGraph::builder(1.0, 0.9);
        for s in 0..n {
            b.add_switch(NodeId(s), Point::default(), 2);
        }
        let length = |rng: &mut ChaCha8Rng| {
            if integer_lengths {
                f64::from(rng.gen_range(1..=3))
            } else {
                rng.gen_range(0.1..3.0)
            }
        };
        for a in 0..n {
            for c in a + 1..n {
                if rng.gen_bool(density) {
                    let l = length(&mut rng);
                    b.add_link(NodeId(a), NodeId(c), l);
                }
            }
        }
        let (u, v) = (NodeId(100), NodeId(101));
        for user in [u, v] {
            b.add_user(user, Point::default());
            let at = rng.gen_range(0..n);
            let l = length(&mut rng);
            b.add_link(user, NodeId(at), l);
        }
        let g = b.build().unwrap();
        let expected = enumerate_paths(&g, u, v);
        total_paths += expected.len();
        let k = expected.len().max(1);
        let got = yen_k_shortest(&g, u, v, k).unwrap();
        let extra = yen_k_shortest(&g, u, v, k + 3).unwrap();
        if got != expected || extra != expected {
            mismatches.push(seed);
        }
    }
    Outcome {
        pass: mismatches.is_empty(),
        detail: format!(
            "{YEN_GRAPHS} graphs, {total_paths} simple paths in total, {} mismatches {:?}",
            mismatches.len(),
            mismatches
        ),
    }
}

fn trend_config() -> ExperimentConfig {
    ExperimentConfig {
        seeds: (0..TREND_SEEDS).collect(),
        ..ExperimentConfig::default()
    }
}

fn criterion6() -> (Outcome, String) {
    let start = Instant::now();
    let table = run_experiment(&trend_config()).expect("experiment runs");
    let elapsed = start.elapsed();
    let mean = |a| table.mean_of(None, a).expect("mean row with results");
    let (mr, direct, fer, qpass, b1) = (
        mean(Algorithm::MultiR),
        mean(Algorithm::Alg4Direct),
        mean(Algorithm::Fer),
        mean(Algorithm::Qpass),
        mean(Algorithm::B1),
    );
    let errors = table.rows.iter().filter(|r| !r.error.is_empty()).count();
    let a = [fer, qpass, b1].iter().all(|m| mr.served_pairs >= m.served_pairs);
    let b = [fer, qpass, b1].iter().all(|m| direct.throughput >= m.throughput);
    let c = qpass.throughput <= fer.throughput && b1.throughput <= fer.throughput;
    let detail = format!(
        "(a) {} served multi_r {} vs fer {} qpass {} b1 {}; (b) {} throughput alg4_direct {:.4e} vs fer {:.4e} \
         qpass {:.4e} b1 {:.4e}; (c) {}; {errors} error rows; {:.1}s",
        ok(a),
        mr.served_pairs,
        fer.served_pairs,
        qpass.served_pairs,
        b1.served_pairs,
        ok(b),
        direct.throughput,
        fer.throughput,
        qpass.throughput,
        b1.throughput,
        ok(c),
        elapsed.as_secs_f64()
    );
    (
        Outcome {
            pass: a && b && c && errors == 0 && elapsed < BUDGET_C6,
            detail,
        },
        table.to_csv().unwrap(),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "holds"
    } else {
        "FAILS"
    }
}

fn criterion7(corpus: &Corpus) -> Outcome {
    let mut plans = 0;
    let mut violations = Vec::new();
    let mut record = |tag: String, graph: &NetworkGraph, result: entroute::Result<entroute::RouteOutcome>| {
        plans += 1;
        match result {
            Ok(out) if respects_capacity(graph, &out.plan) => {}
            Ok(_) => violations.push(tag),
            Err(e) => violations.push(format!("{tag}: {e}")),
        }
    };
    for (label, seed, s) in &corpus.instances {
        for a in Algorithm::ALL {
            record(
                format!("{label}:{seed}:{a}"),
                &s.instance.graph,
                route_with_catalog(&s.instance, &s.catalog, a),
            );
        }
    }
    for seed in 0..TREND_SEEDS {
        let inst = generate_topology(&TopologyConfig {
            seed,
            ..TopologyConfig::default()
        })
        .unwrap();
        for a in Algorithm::ALL {
            record(format!("default:{seed}:{a}"), &inst.graph, route_instance(&inst, a));
        }
    }
    Outcome {
        pass: violations.is_empty(),
        detail: format!(
            "{plans} plans from 5 algorithms, {} violations {:?}",
            violations.len(),
            violations
        ),
    }
}

fn criterion8(corpus: &Corpus, trend_csv: &str) -> Outcome {
    let mut differing = Vec::new();

    if run_experiment(&trend_config()).unwrap().to_csv().unwrap() != trend_csv {
        differing.push("trend CSV");
    }
    let mc = ExperimentConfig {
        seeds: vec![0, 1],
        mc_trials: 2_000,
        ..ExperimentConfig::default()
    };
    if run_experiment(&mc).unwrap().to_csv().unwrap() != run_experiment(&mc).unwrap().to_csv().unwrap() {
        differing.push("Monte Carlo CSV");
    }

    let instance_json = || {
        let inst = generate_topology(&TopologyConfig::default()).unwrap();
        to_json(&InstanceFile::from_instance(&inst)).unwrap()
    };
    if instance_json() != instance_json() {
        differing.push("instance JSON");
    }

    let plan_json = || {
        let inst = generate_topology(&TopologyConfig::default()).unwrap();
        Algorithm::ALL
            .iter()
            .map(|&a| {
                let out = route_instance(&inst, a).unwrap();
                to_json(&PlanFile::new(a.name(), &out.plan, out.lp_optimum)).unwrap()
            })
            .collect::<String>()
    };
    if plan_json() != plan_json() {
        differing.push("plan JSON");
    }

    let small_json = || {
        corpus
            .instances
            .iter()
            .take(100)
            .flat_map(|(_, _, s)| {
                Algorithm::ALL.iter().map(|&a| {
                    let out = route_with_catalog(&s.instance, &s.catalog, a).unwrap();
                    to_json(&PlanFile::new(a.name(), &out.plan, out.lp_optimum)).unwrap()
                })
            })
            .collect::<String>()
    };
    if small_json() != small_json() {
        differing.push("small-instance plan JSON");
    }

    Outcome {
        pass: differing.is_empty(),
        detail: format!("5 repeated outputs, differing: {:?}", differing),
    }
}

fn report(id: u32, name: &str, start: Instant, o: &Outcome) {
    println!(
        "{} criterion {id} ({name}): {} [{:.1}s]",
        if o.pass { "PASS" } else { "FAIL" },
        o.detail,
        start.elapsed().as_secs_f64()
    );
}

fn main() -> ExitCode {
    let mut all = true;
    let mut run = |id: u32, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        report(id, name, start, &o);
        all &= o.pass;
    };

    let corpus_start = Instant::now();
    let corpus = Corpus::build();
    println!(
        "corpus: {} small instances built in {:.1}s",
        corpus.instances.len(),
        corpus_start.elapsed().as_secs_f64()
    );

    run(1, "approximation bound", &mut || {
        let start = Instant::now();
        let mut o = criterion1(&corpus);
        if start.elapsed() >= BUDGET_C1 {
            o.pass = false;
            o.detail.push_str("; over the time budget");
        }
        o
    });
    run(2, "throughput optimality", &mut || criterion2(&corpus));
    run(3, "Monte Carlo agreement", &mut criterion3);
    run(4, "LP correctness", &mut || criterion4(&corpus));
    run(5, "K-shortest paths", &mut criterion5);
    let mut trend_csv = String::new();
    run(6, "trend reproduction", &mut || {
        let (o, csv) = criterion6();
        trend_csv = csv;
        o
    });
    run(7, "capacity feasibility", &mut || criterion7(&corpus));
    run(8, "determinism", &mut || criterion8(&corpus, &trend_csv));

    println!("acceptance: {}", if all { "all criteria pass" } else { "FAILURES" });
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
