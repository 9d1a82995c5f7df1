//! Synthetic graphs with planted overlapping communities.
//!
//! A simplified planted-partition model with the knobs that matter for
//! overlap detection: size `n`, mean degree, mixing fraction `mu`, number of
//! overlapping nodes `On` and memberships per overlapping node `Om`.
//! Community sizes are uniform in `[c_min, c_max]` and all nodes share the
//! same target degree.

use std::collections::HashSet;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cover::Cover;
use crate::engine::{rng_from_seed, SlpaRng};
use crate::graph::Graph;

/// Attempts per stub before it is dropped.
pub const STUB_RETRIES: usize = 50;
const MIN_DEGREE: usize = 3;

#[derive(Debug, Error, PartialEq)]
pub enum BenchError {
    #[error("infeasible benchmark spec: {0}")]
    Infeasible(String),
}

fn infeasible<T>(msg: impl Into<String>) -> Result<T, BenchError> {
    Err(BenchError::Infeasible(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchSpec {
    pub n: usize,
    pub k_avg: f64,
    pub mu: f64,
    /// Number of overlapping nodes.
    pub overlapping_nodes: usize,
    /// Communities per overlapping node.
    pub memberships: usize,
    pub c_min: usize,
    pub c_max: usize,
    pub seed: u64,
}

impl Default for BenchSpec {
    fn default() -> Self {
        BenchSpec {
            n: 1000,
            k_avg: 10.0,
            mu: 0.1,
            overlapping_nodes: 100,
            memberships: 2,
            c_min: 20,
            c_max: 50,
            seed: 0,
        }
    }
}

impl BenchSpec {
    /// Total community slots needed: one per node plus `Om - 1` extra per
    /// overlapping node.
    pub fn required_slots(&self) -> usize {
        self.n + self.overlapping_nodes * self.memberships.saturating_sub(1)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.n == 0 {
            return infeasible("n must be positive");
        }
        if !(self.k_avg.is_finite() && self.k_avg > 0.0) {
            return infeasible("k_avg must be positive");
        }
        if !(0.0..1.0).contains(&self.mu) {
            return infeasible(format!("mu = {} is outside [0, 1)", self.mu));
        }
        if self.overlapping_nodes > self.n {
            return infeasible("more overlapping nodes than nodes");
        }
        if self.overlapping_nodes > 0 && self.memberships < 2 {
            return infeasible("overlapping nodes need at least 2 memberships");
        }
        if self.c_min < 3 {
            return infeasible("c_min must be at least 3");
        }
        if self.c_min > self.c_max {
            return infeasible("c_min exceeds c_max");
        }
        if self.c_max >= self.n {
            return infeasible(format!(
                "c_max = {} must be below n = {}",
                self.c_max, self.n
            ));
        }
        let target = self.k_avg.round() as usize;
        if target.max(MIN_DEGREE) >= self.n {
            return infeasible("target degree must be below n");
        }
        Ok(())
    }

    /// One-line-per-field description used as a header comment in output files.
    pub fn header(&self) -> String {
        format!(
            "# benchgen n={} k_avg={} mu={} on={} om={} c_min={} c_max={} seed={}\n",
            self.n,
            self.k_avg,
            self.mu,
            self.overlapping_nodes,
            self.memberships,
            self.c_min,
            self.c_max,
            self.seed
        )
    }
}

/// Generated graph with its planted cover.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub spec: BenchSpec,
    pub graph: Graph,
    pub truth: Cover,
    pub dropped_stubs: usize,
    /// Edges added to join pieces of communities that came out disconnected.
    pub bridging_edges: usize,
}

impl Benchmark {
    /// Fraction of each node's edges that leave all of its communities,
    /// averaged over nodes with at least one edge.
    pub fn mean_external_fraction(&self) -> f64 {
        let memberships = self.truth.memberships();
        let mut sum = 0.0;
        let mut counted = 0usize;
        for v in 0..self.graph.node_count() {
            let ns = self.graph.neighbors(v);
            if ns.is_empty() {
                continue;
            }
            let external = ns
                .iter()
                .filter(|&&u| !shares_community(&memberships[v], &memberships[u]))
                .count();
            sum += external as f64 / ns.len() as f64;
            counted += 1;
        }
        if counted == 0 {
            0.0
        } else {
            sum / counted as f64
        }
    }

    pub fn graph_file(&self) -> String {
        format!("{}{}", self.spec.header(), self.graph.to_edge_list())
    }

    pub fn truth_file(&self) -> String {
        format!(
            "{}{}",
            self.spec.header(),
            self.truth.to_file_string(&self.graph)
        )
    }
}

fn shares_community(a: &[usize], b: &[usize]) -> bool {
    a.iter().any(|c| b.contains(c))
}

/// Draws community sizes whose total is exactly `required`.
fn community_sizes(spec: &BenchSpec, rng: &mut SlpaRng) -> Result<Vec<usize>, BenchError> {
    let required = spec.required_slots();
    let mut sizes = Vec::new();
    let mut total = 0;
    while total < required {
        let s = rng.random_range(spec.c_min..=spec.c_max);
        sizes.push(s);
        total += s;
    }
    let mut excess = total - required;
    // shrink communities toward c_min until the total fits
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.shuffle(rng);
    for &c in &order {
        let cut = excess.min(sizes[c] - spec.c_min);
        sizes[c] -= cut;
        excess -= cut;
    }
    if excess > 0 {
        // drop one community and grow the rest toward c_max instead
        let dropped = sizes.pop().expect("at least one community");
        let mut deficit = dropped - excess;
        let kept = sizes.len();
        for &c in order.iter().filter(|&&c| c < kept) {
            let add = deficit.min(spec.c_max - sizes[c]);
            sizes[c] += add;
            deficit -= add;
        }
        if deficit > 0 || sizes.is_empty() {
            return infeasible(format!(
                "cannot tile {required} memberships with sizes in [{}, {}]",
                spec.c_min, spec.c_max
            ));
        }
    }
    Ok(sizes)
}

/// Assigns memberships so each community is filled to its size exactly.
fn assign_memberships(
    spec: &BenchSpec,
    sizes: &[usize],
    rng: &mut SlpaRng,
) -> Result<Vec<Vec<usize>>, BenchError> {
    let n = spec.n;
    let om = spec.memberships;
    if spec.overlapping_nodes > 0 && om > sizes.len() {
        return infeasible(format!(
            "{om} memberships requested but only {} communities",
            sizes.len()
        ));
    }
    let mut remaining: Vec<usize> = sizes.to_vec();
    let mut node_communities: Vec<Vec<usize>> = vec![Vec::new(); n];

    let overlapping = index::sample(rng, n, spec.overlapping_nodes).into_vec();
    let mut is_overlapping = vec![false; n];
    for &v in &overlapping {
        is_overlapping[v] = true;
        // capacity-weighted choice of om distinct communities
        let mut chosen: Vec<usize> = Vec::with_capacity(om);
        for _ in 0..om {
            let available: usize = remaining
                .iter()
                .enumerate()
                .filter(|(c, _)| !chosen.contains(c))
                .map(|(_, &r)| r)
                .sum();
            if available == 0 {
                return infeasible("ran out of community capacity for overlapping nodes");
            }
            let mut pick = rng.random_range(0..available);
            let c = remaining
                .iter()
                .enumerate()
                .filter(|(c, _)| !chosen.contains(c))
                .find(|(_, &r)| {
                    if pick < r {
                        true
                    } else {
                        pick -= r;
                        false
                    }
                })
                .map(|(c, _)| c)
                .expect("pick below available capacity");
            chosen.push(c);
            remaining[c] -= 1;
        }
        chosen.sort_unstable();
        node_communities[v] = chosen;
    }

    let mut slots: Vec<usize> = remaining
        .iter()
        .enumerate()
        .flat_map(|(c, &r)| std::iter::repeat_n(c, r))
        .collect();
    slots.shuffle(rng);
    let singles = (0..n).filter(|&v| !is_overlapping[v]);
    let mut filled = 0;
    for (v, c) in singles.zip(slots.iter()) {
        node_communities[v].push(*c);
        filled += 1;
    }
    debug_assert_eq!(filled, slots.len());
    Ok(node_communities)
}

struct EdgeSet {
    adjacency: Vec<HashSet<usize>>,
}

impl EdgeSet {
    fn try_add(&mut self, u: usize, v: usize) -> bool {
        if u == v || self.adjacency[u].contains(&v) {
            return false;
        }
        self.adjacency[u].insert(v);
        self.adjacency[v].insert(u);
        true
    }

    /// Connected pieces of the subgraph induced by `subset`, each sorted,
    /// ordered by smallest member.
    fn components(&self, subset: &[usize]) -> Vec<Vec<usize>> {
        let inside: HashSet<usize> = subset.iter().copied().collect();
        let mut seen: HashSet<usize> = HashSet::with_capacity(subset.len());
        let mut parts = Vec::new();
        for &start in subset {
            if !seen.insert(start) {
                continue;
            }
            let mut part = vec![start];
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for &w in &self.adjacency[u] {
                    if inside.contains(&w) && seen.insert(w) {
                        part.push(w);
                        stack.push(w);
                    }
                }
            }
            part.sort_unstable();
            parts.push(part);
        }
        parts.sort_unstable_by_key(|p| p[0]);
        parts
    }
}

/// Builds a graph and its planted cover from `spec`.
///
/// Every node initiates about half of its target degree worth of edges (the
/// other half arrives from other nodes' stubs). Each stub goes, with
/// probability `1 - mu`, to a random co-member in a community chosen
/// uniformly among the node's communities, and otherwise to a random node
/// sharing none of its communities. Stubs that keep hitting duplicates are
/// dropped after [`STUB_RETRIES`] attempts. Communities left disconnected
/// are joined with bridging edges.
pub fn generate(spec: &BenchSpec) -> Result<Benchmark, BenchError> {
    spec.validate()?;
    let mut rng = rng_from_seed(spec.seed);
    let n = spec.n;

    let sizes = community_sizes(spec, &mut rng)?;
    let node_communities = assign_memberships(spec, &sizes, &mut rng)?;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); sizes.len()];
    for (v, cs) in node_communities.iter().enumerate() {
        for &c in cs {
            members[c].push(v);
        }
    }

    let target = (spec.k_avg.round() as usize).max(MIN_DEGREE);
    let mut edges = EdgeSet {
        adjacency: vec![HashSet::new(); n],
    };
    let mut dropped = 0usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    for &v in &order {
        let stubs = target / 2 + usize::from(target % 2 == 1 && rng.random_bool(0.5));
        for _ in 0..stubs {
            let internal = !rng.random_bool(spec.mu);
            let mut placed = false;
            for _ in 0..STUB_RETRIES {
                let u = if internal {
                    let cs = &node_communities[v];
                    let c = cs[rng.random_range(0..cs.len())];
                    members[c][rng.random_range(0..members[c].len())]
                } else {
                    let u = rng.random_range(0..n);
                    if shares_community(&node_communities[v], &node_communities[u]) {
                        continue;
                    }
                    u
                };
                if edges.try_add(v, u) {
                    placed = true;
                    break;
                }
            }
            if !placed {
                dropped += 1;
            }
        }
    }

    // join community pieces so every planted community is connected
    let mut bridging = 0usize;
    for community in &members {
        let parts = edges.components(community);
        for pair in parts.windows(2) {
            let a = pair[0][rng.random_range(0..pair[0].len())];
            let b = pair[1][rng.random_range(0..pair[1].len())];
            // distinct pieces are never adjacent
            edges.try_add(a, b);
            bridging += 1;
        }
    }

    let graph = snapshot(&edges, n);
    let truth = Cover::new(n, members).expect("every community is filled");
    Ok(Benchmark {
        spec: *spec,
        graph,
        truth,
        dropped_stubs: dropped,
        bridging_edges: bridging,
    })
}

fn snapshot(edges: &EdgeSet, n: usize) -> Graph {
    let ids = (1..=n).map(|i| i.to_string()).collect();
    let pairs = edges
        .adjacency
        .iter()
        .enumerate()
        .flat_map(|(u, ns)| ns.iter().filter(move |&&v| u < v).map(move |&v| (u, v)));
    Graph::from_edges(ids, pairs)
        .expect("generated ids are unique")
        .0
}
