//! Random Waxman-style network instances.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{NetworkGraph, NetworkInstance, NodeId, Point, UserPair};

#[derive(Debug, Clone, PartialEq)]
pub struct TopologyConfig {
    pub area_side: f64,
    pub num_switches: u32,
    pub num_pairs: u32,
    pub avg_degree: f64,
    pub qubits_per_switch: u32,
    pub swap_prob: f64,
    pub single_link_target_prob: f64,
    /// Switch-to-switch edges are admitted up to `cutoff_factor * area_side / sqrt(N)`.
    pub cutoff_factor: f64,
    pub max_attempts: u32,
    pub seed: u64,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        TopologyConfig {
            area_side: 10_000.0,
            num_switches: 50,
            num_pairs: 20,
            avg_degree: 10.0,
            qubits_per_switch: 2,
            swap_prob: 0.9,
            single_link_target_prob: 1e-4,
            cutoff_factor: 5.0,
            max_attempts: 100,
            seed: 0,
        }
    }
}

/// Accepted relative deviation of the realized mean degree from its target.
pub const DEGREE_TOLERANCE: f64 = 0.1;

impl TopologyConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(what.into()));
        if !(self.area_side > 0.0 && self.area_side.is_finite()) {
            return bad("area_side must be positive");
        }
        if self.num_switches == 0 {
            return bad("num_switches must be positive");
        }
        if self.num_pairs == 0 {
            return bad("num_pairs must be positive");
        }
        if !(self.avg_degree > 0.0 && self.avg_degree.is_finite()) {
            return bad("avg_degree must be positive");
        }
        if self.qubits_per_switch == 0 || self.qubits_per_switch % 2 != 0 {
            return bad("qubits_per_switch must be a positive even integer");
        }
        if !(0.0..=1.0).contains(&self.swap_prob) {
            return bad("swap_prob must lie in [0, 1]");
        }
        if !(self.single_link_target_prob > 0.0 && self.single_link_target_prob < 1.0) {
            return bad("single_link_target_prob must lie in (0, 1)");
        }
        if !(self.cutoff_factor > 0.0 && self.cutoff_factor.is_finite()) {
            return bad("cutoff_factor must be positive");
        }
        if self.max_attempts == 0 {
            return bad("max_attempts must be positive");
        }
        Ok(())
    }

    pub fn edge_cutoff(&self) -> f64 {
        self.cutoff_factor * self.area_side / libm::sqrt(f64::from(self.num_switches))
    }
}

/// Attenuation that gives a link of `reference_length` success probability `target_prob`.
pub fn calibrate_alpha(target_prob: f64, reference_length: f64) -> Result<f64> {
    if !(target_prob > 0.0 && target_prob < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "target probability {target_prob} is outside (0, 1)"
        )));
    }
    if !(reference_length > 0.0 && reference_length.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "reference length {reference_length} must be positive"
        )));
    }
    Ok(-libm::log(target_prob) / reference_length)
}

fn random_point(rng: &mut ChaCha8Rng, side: f64) -> Point {
    Point::new(rng.gen::<f64>() * side, rng.gen::<f64>() * side)
}

/// Waxman `beta` whose expected mean degree over `weights` hits `target`,
/// capped where every candidate edge becomes certain.
fn tune_beta(weights: &[f64], n: f64, target: f64) -> f64 {
    let degree = |beta: f64| 2.0 * weights.iter().map(|w| (beta * w).min(1.0)).sum::<f64>() / n;
    let beta_max = weights
        .iter()
        .fold(0.0f64, |acc, &w| if w > 0.0 { acc.max(1.0 / w) } else { acc });
    if degree(beta_max) <= target {
        return beta_max;
    }
    let (mut lo, mut hi) = (0.0, beta_max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if degree(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn attempt(config: &TopologyConfig, rng: &mut ChaCha8Rng, alpha: f64) -> Result<Option<NetworkInstance>> {
    let n = config.num_switches as usize;
    let cutoff = config.edge_cutoff();
    let switches: Vec<Point> = (0..n).map(|_| random_point(rng, config.area_side)).collect();

    let mut candidates: Vec<(usize, usize, f64, f64)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let d = switches[i].distance(&switches[j]);
            if d <= cutoff {
                candidates.push((i, j, d, libm::exp(-d / cutoff)));
            }
        }
    }
    let weights: Vec<f64> = candidates.iter().map(|c| c.3).collect();
    let achievable = 2.0 * candidates.len() as f64 / n as f64;
    let target = config.avg_degree.min(achievable);
    let beta = tune_beta(&weights, n as f64, target);

    let mut builder = NetworkGraph::builder(alpha, config.swap_prob);
    for (i, p) in switches.iter().enumerate() {
        builder.add_switch(NodeId(i as u32), *p, config.qubits_per_switch);
    }
    let mut edges = 0usize;
    for &(i, j, d, w) in &candidates {
        if rng.gen::<f64>() < (beta * w).min(1.0) {
            builder.add_link(NodeId(i as u32), NodeId(j as u32), d);
            edges += 1;
        }
    }

    let users = 2 * config.num_pairs as usize;
    for u in 0..users {
        let p = random_point(rng, config.area_side);
        let (nearest, d) = switches
            .iter()
            .enumerate()
            .map(|(i, s)| (i, p.distance(s)))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
        let id = NodeId((n + u) as u32);
        builder.add_user(id, p);
        builder.add_link(id, NodeId(nearest as u32), d);
    }

    let graph = builder.build()?;
    let realized = 2.0 * edges as f64 / n as f64;
    if !graph.switches_connected() || (realized - target).abs() > DEGREE_TOLERANCE * target {
        return Ok(None);
    }
    let pairs = (0..config.num_pairs as usize)
        .map(|m| UserPair {
            source: NodeId((n + 2 * m) as u32),
            destination: NodeId((n + 2 * m + 1) as u32),
        })
        .collect();
    NetworkInstance::new(graph, pairs).map(Some)
}

/// Places switches and users, samples edges and forms pairs.
///
/// Switches get ids `0..N`; users get `N..N + 2M` and pair `m` joins users
/// `N + 2m` and `N + 2m + 1`. Placements are redrawn until the switch graph
/// is connected and its mean degree is within tolerance of the target.
pub fn generate_topology(config: &TopologyConfig) -> Result<NetworkInstance> {
    config.validate()?;
    let alpha = calibrate_alpha(config.single_link_target_prob, config.edge_cutoff())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..config.max_attempts {
        if let Some(instance) = attempt(config, &mut rng, alpha)? {
            return Ok(instance);
        }
    }
    Err(Error::GenerationFailed {
        seed: config.seed,
        attempts: config.max_attempts,
    })
}
