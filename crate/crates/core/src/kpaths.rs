//! Loopless k-shortest paths (Yen) and the per-pair candidate path catalog.
//!
//! Distance is hop count. Physical length breaks ties, then the node
//! sequence compared lexicographically by id.

use alloc::collections::{BTreeSet, BinaryHeap};
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::Result;
use crate::model::{NetworkGraph, NodeId, RoutePath, UserPair};

/// Total order used everywhere a list of paths is sorted.
pub fn path_order(a: &RoutePath, b: &RoutePath) -> Ordering {
    a.hop_count()
        .cmp(&b.hop_count())
        .then_with(|| a.total_length().total_cmp(&b.total_length()))
        .then_with(|| a.nodes().cmp(b.nodes()))
}

struct Ranked(RoutePath);

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        path_order(&self.0, &other.0) == Ordering::Equal
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        path_order(&self.0, &other.0)
    }
}

/// Lexicographic (hops, length) cost, additive along a path.
#[derive(Clone, Copy, PartialEq)]
struct Cost {
    hops: u32,
    length: f64,
}

impl Cost {
    const ZERO: Cost = Cost { hops: 0, length: 0.0 };

    fn cmp(&self, other: &Cost) -> Ordering {
        self.hops
            .cmp(&other.hops)
            .then_with(|| self.length.total_cmp(&other.length))
    }
}

#[derive(PartialEq)]
struct HeapEntry {
    cost: Cost,
    node: usize,
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    // min-heap on (cost, node index)
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Dijkstra from `from` to `to` over dense indices, avoiding `blocked` nodes
/// and `blocked_links`. Only switches may be crossed; `to` may be a user.
fn spur_search(
    graph: &NetworkGraph,
    from: usize,
    to: usize,
    blocked: &[bool],
    blocked_links: &BTreeSet<usize>,
) -> Option<Vec<usize>> {
    let n = graph.node_count();
    let mut best: Vec<Option<Cost>> = alloc::vec![None; n];
    let mut prev = alloc::vec![usize::MAX; n];
    let mut done = alloc::vec![false; n];
    let mut heap = BinaryHeap::new();
    best[from] = Some(Cost::ZERO);
    heap.push(HeapEntry {
        cost: Cost::ZERO,
        node: from,
    });
    while let Some(HeapEntry { cost, node }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        if node == to {
            break;
        }
        if node != from && !graph.is_switch_at(node) {
            continue;
        }
        for &(next, link) in graph.neighbors(node) {
            if done[next] || blocked[next] || blocked_links.contains(&link) {
                continue;
            }
            if next != to && !graph.is_switch_at(next) {
                continue;
            }
            let candidate = Cost {
                hops: cost.hops + 1,
                length: cost.length + graph.link(link).length,
            };
            let better = match best[next] {
                None => true,
                Some(c) => candidate.cmp(&c) == Ordering::Less,
            };
            if better {
                best[next] = Some(candidate);
                prev[next] = node;
                heap.push(HeapEntry {
                    cost: candidate,
                    node: next,
                });
            }
        }
    }
    if !done[to] {
        return None;
    }
    let mut path = alloc::vec![to];
    let mut cur = to;
    while cur != from {
        cur = prev[cur];
        path.push(cur);
    }
    path.reverse();
    Some(path)
}

/// Up to `k` loopless paths from `source` to `destination`, shortest first.
///
/// An unreachable destination yields an empty list.
pub fn yen_k_shortest(
    graph: &NetworkGraph,
    source: NodeId,
    destination: NodeId,
    k: usize,
) -> Result<Vec<RoutePath>> {
    let s = graph.index_of(source)?;
    let d = graph.index_of(destination)?;
    if s == d {
        return Err(crate::Error::InvalidArgument(alloc::format!(
            "source and destination are both {source}"
        )));
    }
    let mut accepted: Vec<Vec<usize>> = Vec::new();
    let mut out: Vec<RoutePath> = Vec::new();
    if k == 0 {
        return Ok(out);
    }
    let to_path = |idx: &[usize]| -> RoutePath {
        let ids = idx.iter().map(|&i| graph.node_at(i).id).collect();
        RoutePath::new(graph, ids).expect("search only follows existing links")
    };

    let no_links = BTreeSet::new();
    let mut blocked = alloc::vec![false; graph.node_count()];
    let Some(first) = spur_search(graph, s, d, &blocked, &no_links) else {
        return Ok(out);
    };
    out.push(to_path(&first));
    accepted.push(first);

    let mut candidates: BTreeSet<Ranked> = BTreeSet::new();
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    seen.insert(accepted[0].clone());

    while out.len() < k {
        let last = accepted.last().expect("at least one accepted path").clone();
        for i in 0..last.len() - 1 {
            let root = &last[..=i];
            let spur = last[i];
            let mut removed = BTreeSet::new();
            for p in &accepted {
                if p.len() > i + 1 && p[..=i] == *root {
                    if let Some(l) = graph.link_index_between(p[i], p[i + 1]) {
                        removed.insert(l);
                    }
                }
            }
            blocked.iter_mut().for_each(|b| *b = false);
            for &r in &root[..i] {
                blocked[r] = true;
            }
            if let Some(tail) = spur_search(graph, spur, d, &blocked, &removed) {
                let mut full = root[..i].to_vec();
                full.extend_from_slice(&tail);
                if seen.insert(full.clone()) {
                    candidates.insert(Ranked(to_path(&full)));
                }
            }
        }
        let Some(Ranked(next)) = candidates.pop_first() else {
            break;
        };
        let idx: Vec<usize> = next
            .nodes()
            .iter()
            .map(|&id| graph.index_of(id).expect("node exists"))
            .collect();
        accepted.push(idx);
        out.push(next);
    }
    out.sort_by(path_order);
    Ok(out)
}

/// Candidate paths per user pair: the reduced path set the LP relaxations run on.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSetCatalog {
    per_pair: Vec<Vec<RoutePath>>,
    offsets: Vec<usize>,
}

impl PathSetCatalog {
    /// Wraps explicit per-pair lists; each list is sorted by [`path_order`].
    pub fn from_lists(mut per_pair: Vec<Vec<RoutePath>>) -> Self {
        for list in &mut per_pair {
            list.sort_by(path_order);
        }
        let mut offsets = Vec::with_capacity(per_pair.len() + 1);
        let mut total = 0;
        offsets.push(0);
        for list in &per_pair {
            total += list.len();
            offsets.push(total);
        }
        PathSetCatalog { per_pair, offsets }
    }

    pub fn pair_count(&self) -> usize {
        self.per_pair.len()
    }

    /// Total number of paths across all pairs.
    pub fn len(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pair_paths(&self, pair: usize) -> &[RoutePath] {
        &self.per_pair[pair]
    }

    /// Global index of a pair's first path. Global indices are pair-major.
    pub fn offset(&self, pair: usize) -> usize {
        self.offsets[pair]
    }

    pub fn global_index(&self, pair: usize, local: usize) -> usize {
        self.offsets[pair] + local
    }

    /// `(pair, path)` for a global index.
    pub fn get(&self, global: usize) -> (usize, &RoutePath) {
        let pair = self.offsets.partition_point(|&o| o <= global) - 1;
        (pair, &self.per_pair[pair][global - self.offsets[pair]])
    }

    /// `(global index, pair, path)` in global order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &RoutePath)> + '_ {
        self.per_pair
            .iter()
            .enumerate()
            .flat_map(move |(m, list)| {
                list.iter()
                    .enumerate()
                    .map(move |(j, p)| (self.offsets[m] + j, m, p))
            })
    }

    /// Pairs with no candidate path at all; they can never be served.
    pub fn unroutable_pairs(&self) -> Vec<usize> {
        (0..self.per_pair.len())
            .filter(|&m| self.per_pair[m].is_empty())
            .collect()
    }
}

/// Builds the candidate catalog for `pairs`.
///
/// Each pair gets its `M` shortest loopless paths, `M = pairs.len()`.
/// Pooling `M^2` Yen paths per pair and trimming the pool to the `M^2`
/// globally shortest only ever removes a suffix of each pair's sorted list,
/// and the per-pair refill restores that list to its first `M` entries; the
/// final catalog is therefore each pair's `M`-prefix, which is computed here
/// directly. The catalog holds at most `M^2` paths.
pub fn selective_paths(graph: &NetworkGraph, pairs: &[UserPair]) -> Result<PathSetCatalog> {
    let per_pair_limit = pairs.len();
    let mut per_pair = Vec::with_capacity(pairs.len());
    for pair in pairs {
        per_pair.push(yen_k_shortest(
            graph,
            pair.source,
            pair.destination,
            per_pair_limit,
        )?);
    }
    Ok(PathSetCatalog::from_lists(per_pair))
}
