#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slpa::{Cover, Graph};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

pub fn load_data(name: &str) -> Option<Graph> {
    let path = data_path(name);
    path.exists()
        .then(|| slpa::load_edge_list(&path).expect("bundled data parses").0)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// G(n, p) random graph.
pub fn random_graph(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::with_node_count(n, edges).unwrap()
}

pub fn clique(n: usize) -> Graph {
    Graph::with_node_count(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)))).unwrap()
}

/// Triangles {0,1,2} and {3,4,5} joined by the edge 2-3.
pub fn bridged_triangles() -> Graph {
    Graph::with_node_count(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)]).unwrap()
}

/// Cover where every node joins between 1 and `max_memberships` of `k`
/// communities chosen at random.
pub fn random_cover(n: usize, k: usize, max_memberships: usize, rng: &mut impl Rng) -> Cover {
    let mut communities = vec![Vec::new(); k];
    for v in 0..n {
        let count = rng.random_range(1..=max_memberships.min(k));
        let mut chosen = Vec::new();
        while chosen.len() < count {
            let c = rng.random_range(0..k);
            if !chosen.contains(&c) {
                chosen.push(c);
            }
        }
        for c in chosen {
            communities[c].push(v);
        }
    }
    communities.retain(|c| !c.is_empty());
    Cover::new(n, communities).unwrap()
}

/// Small graphs (n <= 12) paired with covers, including overlapping ones.
pub fn small_corpus() -> Vec<(Graph, Cover)> {
    let mut out = Vec::new();
    let tri = Graph::with_node_count(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
    out.push((tri.clone(), Cover::new(3, vec![vec![0, 1, 2]]).unwrap()));
    out.push((tri, Cover::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap()));
    let bowtie =
        Graph::with_node_count(5, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)]).unwrap();
    out.push((
        bowtie,
        Cover::new(5, vec![vec![0, 1, 2], vec![2, 3, 4]]).unwrap(),
    ));
    out.push((
        bridged_triangles(),
        Cover::new(6, vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap(),
    ));
    out.push((clique(6), Cover::new(6, vec![(0..6).collect()]).unwrap()));
    let star = Graph::with_node_count(7, (1..7).map(|i| (0, i))).unwrap();
    out.push((
        star,
        Cover::new(7, vec![vec![0, 1, 2, 3], vec![0, 4, 5, 6]]).unwrap(),
    ));

    let mut r = rng(2024);
    while out.len() < 30 {
        let n = r.random_range(3..=12);
        let p = r.random_range(0.15..0.7);
        let g = random_graph(n, p, &mut r);
        let k = r.random_range(1..=4);
        let cover = random_cover(n, k, 3, &mut r);
        out.push((g, cover));
    }
    out
}

/// Overlapping modularity evaluated term by term over every
/// (community, i, j) triple with a dense adjacency matrix.
pub fn brute_force_qov(graph: &Graph, cover: &Cover) -> f64 {
    let n = graph.node_count();
    let mut adjacency = vec![vec![0.0f64; n]; n];
    for (u, v) in graph.edges() {
        adjacency[u][v] = 1.0;
        adjacency[v][u] = 1.0;
    }
    let degree: Vec<f64> = adjacency.iter().map(|row| row.iter().sum()).collect();
    let m_dir: f64 = degree.iter().sum();
    if m_dir == 0.0 {
        return 0.0;
    }

    let mut memberships = vec![0usize; n];
    for c in cover.communities() {
        for &v in c {
            memberships[v] += 1;
        }
    }
    let f = |x: f64| 60.0 * x - 30.0;
    let pair = |a: f64, b: f64| 1.0 / ((1.0 + (-f(a)).exp()) * (1.0 + (-f(b)).exp()));

    let mut total = 0.0;
    for c in cover.communities() {
        let alpha: Vec<f64> = (0..n)
            .map(|v| {
                if c.contains(&v) {
                    1.0 / memberships[v] as f64
                } else {
                    0.0
                }
            })
            .collect();
        let beta_out: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| pair(alpha[i], alpha[j])).sum::<f64>() / n as f64)
            .collect();
        let beta_in: Vec<f64> = (0..n)
            .map(|j| (0..n).map(|i| pair(alpha[i], alpha[j])).sum::<f64>() / n as f64)
            .collect();
        for i in 0..n {
            for j in 0..n {
                total += pair(alpha[i], alpha[j]) * adjacency[i][j]
                    - beta_out[i] * degree[i] * beta_in[j] * degree[j] / m_dir;
            }
        }
    }
    total / m_dir
}

/// Cover NMI computed from explicit 0/1 membership vectors, counting the
/// joint 2x2 table node by node.
pub fn brute_force_nmi(x: &Cover, y: &Cover) -> f64 {
    let n = x.num_nodes();
    let indicator = |cover: &Cover| -> Vec<Vec<bool>> {
        cover
            .communities()
            .iter()
            .map(|c| (0..n).map(|v| c.contains(&v)).collect())
            .collect()
    };
    let xs = indicator(x);
    let ys = indicator(y);
    let h = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    let entropy = |v: &[bool]| {
        let ones = v.iter().filter(|&&b| b).count() as f64 / n as f64;
        h(ones) + h(1.0 - ones)
    };

    let normalized = |a: &[Vec<bool>], b: &[Vec<bool>]| -> f64 {
        let mut ratios = Vec::new();
        for ak in a {
            let ha = entropy(ak);
            if ha <= 1e-15 {
                continue;
            }
            let mut best: Option<f64> = None;
            for bl in b {
                let mut table = [[0usize; 2]; 2];
                for v in 0..n {
                    table[ak[v] as usize][bl[v] as usize] += 1;
                }
                let p = |i: usize, j: usize| table[i][j] as f64 / n as f64;
                if h(p(1, 1)) + h(p(0, 0)) < h(p(0, 1)) + h(p(1, 0)) {
                    continue;
                }
                let joint = h(p(0, 0)) + h(p(0, 1)) + h(p(1, 0)) + h(p(1, 1));
                let conditional = joint - entropy(bl);
                best = Some(best.map_or(conditional, |b: f64| b.min(conditional)));
            }
            ratios.push(best.unwrap_or(ha) / ha);
        }
        if ratios.is_empty() {
            0.0
        } else {
            ratios.iter().sum::<f64>() / ratios.len() as f64
        }
    };
    1.0 - 0.5 * (normalized(&xs, &ys) + normalized(&ys, &xs))
}
