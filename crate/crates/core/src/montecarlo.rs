//! Monte Carlo estimate of the ebits a plan delivers per time slot.
//!
//! Each trial draws every link and every swap of every channel independently.
//! Trial `t` uses its own ChaCha stream, so results do not depend on how
//! trials are scheduled.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::NetworkGraph;
use crate::plan::RoutingPlan;

#[derive(Debug, Clone, PartialEq)]
pub struct McResult {
    pub trials: u64,
    pub mean_throughput: f64,
    /// Standard error of the mean (sample standard deviation over `sqrt(trials)`).
    pub std_error: f64,
    pub per_pair_mean: BTreeMap<usize, f64>,
}

struct Channelized {
    pair: usize,
    channels: u32,
    link_probs: Vec<f64>,
    swaps: usize,
}

fn draw(rng: &mut ChaCha8Rng, p: f64) -> bool {
    rng.gen::<f64>() < p
}

pub fn simulate_throughput(
    graph: &NetworkGraph,
    plan: &RoutingPlan,
    trials: u64,
    seed: u64,
) -> Result<McResult> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trial count must be positive".into()));
    }
    let q = graph.swap_prob();
    let mut items = Vec::with_capacity(plan.assignments.len());
    for a in &plan.assignments {
        let mut link_probs = Vec::with_capacity(a.path.hop_count());
        for w in a.path.nodes().windows(2) {
            let link = graph.link_between(w[0], w[1]).ok_or_else(|| {
                Error::InvalidPath(alloc::format!("no link between {} and {}", w[0], w[1]))
            })?;
            link_probs.push(link.success_prob);
        }
        items.push(Channelized {
            pair: a.pair,
            channels: a.channels,
            swaps: a.path.hop_count() - 1,
            link_probs,
        });
    }

    let base = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut per_pair: BTreeMap<usize, u64> = items.iter().map(|c| (c.pair, 0)).collect();
    for t in 0..trials {
        let mut rng = base.clone();
        rng.set_stream(t);
        let mut delivered: u64 = 0;
        for c in &items {
            for _ in 0..c.channels {
                // evaluate every draw so the stream layout does not depend on outcomes
                let mut ok = true;
                for &p in &c.link_probs {
                    ok &= draw(&mut rng, p);
                }
                for _ in 0..c.swaps {
                    ok &= draw(&mut rng, q);
                }
                if ok {
                    delivered += 1;
                    *per_pair.get_mut(&c.pair).expect("pair registered above") += 1;
                }
            }
        }
        let d = delivered as f64;
        sum += d;
        sum_sq += d * d;
    }

    let n = trials as f64;
    let mean = sum / n;
    let variance = if trials > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(McResult {
        trials,
        mean_throughput: mean,
        std_error: libm::sqrt(variance / n),
        per_pair_mean: per_pair.into_iter().map(|(m, s)| (m, s as f64 / n)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{NodeId, Point};
    use alloc::vec;

    fn line(q: f64) -> (NetworkGraph, RoutingPlan) {
        let g = NetworkGraph::builder(1.0, q)
            .switch(10, Point::default(), 4)
            .user(0, Point::default())
            .user(1, Point::default())
            .link_with_prob(0, 10, 0.5)
            .link_with_prob(10, 1, 1.0)
            .build()
            .unwrap();
        let path = g.route_path(vec![NodeId(0), NodeId(10), NodeId(1)]).unwrap();
        let mut plan = RoutingPlan::new();
        plan.add(0, &path, 2);
        (g, plan)
    }

    #[test]
    fn deterministic_per_seed() {
        let (g, plan) = line(0.9);
        let a = simulate_throughput(&g, &plan, 1000, 7).unwrap();
        let b = simulate_throughput(&g, &plan, 1000, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn certain_links_give_exact_counts() {
        let g = NetworkGraph::builder(1.0, 1.0)
            .switch(10, Point::default(), 4)
            .user(0, Point::default())
            .user(1, Point::default())
            .link_with_prob(0, 10, 1.0)
            .link_with_prob(10, 1, 1.0)
            .build()
            .unwrap();
        let path = g.route_path(vec![NodeId(0), NodeId(10), NodeId(1)]).unwrap();
        let mut plan = RoutingPlan::new();
        plan.add(0, &path, 2);
        let r = simulate_throughput(&g, &plan, 100, 1).unwrap();
        assert_eq!(r.mean_throughput, 2.0);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn mean_near_analytic() {
        let (g, plan) = line(0.9);
        let r = simulate_throughput(&g, &plan, 20_000, 3).unwrap();
        assert!((r.mean_throughput - 0.9).abs() < 5.0 * r.std_error);
    }

    #[test]
    fn rejects_zero_trials() {
        let (g, plan) = line(0.9);
        assert!(simulate_throughput(&g, &plan, 0, 0).is_err());
    }
}
