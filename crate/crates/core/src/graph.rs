//! Undirected simple graphs with dense internal indices.
//!
//! Nodes are addressed internally by `usize` indices in `[0, n)`. The
//! external token read from an edge-list file is kept in an id map so that
//! output files can be written back in the caller's vocabulary.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: expected 2 tokens, found {found}")]
    Parse { line: usize, found: usize },
    #[error("graph has no nodes")]
    Empty,
    #[error("node index {0} out of range")]
    NodeOutOfRange(usize),
    #[error("duplicate external id {0:?}")]
    DuplicateId(String),
    #[error("invalid graph: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Counters from parsing an edge list that did not prevent loading.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub self_loops_dropped: usize,
    pub duplicate_edges: usize,
}

/// An immutable, undirected, simple graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    /// Compressed rows: the neighbors of `v` are
    /// `targets[offsets[v]..offsets[v + 1]]`.
    offsets: Vec<usize>,
    targets: Vec<usize>,
    ids: Vec<String>,
    index: HashMap<String, usize>,
    edges: usize,
}

impl Graph {
    /// Builds a graph from external ids and index pairs. Self-loops are
    /// dropped and duplicate edges collapsed; both are tallied in the report.
    pub fn from_edges(
        ids: Vec<String>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<(Self, LoadReport), GraphError> {
        let n = ids.len();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        if u32::try_from(n).is_err() {
            return Err(GraphError::Invalid(format!(
                "{n} nodes exceeds the supported maximum"
            )));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(GraphError::DuplicateId(id.clone()));
            }
        }

        let mut report = LoadReport::default();
        let mut adjacency = vec![Vec::new(); n];
        let mut raw = 0usize;
        for (u, v) in edges {
            if u >= n {
                return Err(GraphError::NodeOutOfRange(u));
            }
            if v >= n {
                return Err(GraphError::NodeOutOfRange(v));
            }
            if u == v {
                report.self_loops_dropped += 1;
                continue;
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
            raw += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut targets = Vec::new();
        for mut neighbors in adjacency {
            neighbors.sort_unstable();
            neighbors.dedup();
            targets.extend(neighbors);
            offsets.push(targets.len());
        }
        let edges = targets.len() / 2;
        report.duplicate_edges = raw - edges;

        Ok((
            Graph {
                offsets,
                targets,
                ids,
                index,
                edges,
            },
            report,
        ))
    }

    /// Graph on nodes labelled `0..n` with the given edges.
    pub fn with_node_count(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        let ids = (0..n).map(|i| i.to_string()).collect();
        Graph::from_edges(ids, edges).map(|(g, _)| g)
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    /// Sorted neighbor indices of `node`.
    #[inline]
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.targets[self.offsets[node]..self.offsets[node + 1]]
    }

    #[inline]
    pub fn degree(&self, node: usize) -> usize {
        self.offsets[node + 1] - self.offsets[node]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn mean_degree(&self) -> f64 {
        2.0 * self.edges as f64 / self.node_count() as f64
    }

    pub fn external_id(&self, node: usize) -> &str {
        &self.ids[node]
    }

    pub fn external_ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&v| u < v)
                .map(move |&v| (u, v))
        })
    }

    /// Checks symmetry, simplicity, sortedness and the handshake identity.
    pub fn validate(&self) -> Result<(), GraphError> {
        let n = self.node_count();
        let mut degree_sum = 0;
        for u in 0..n {
            let ns = self.neighbors(u);
            degree_sum += ns.len();
            for w in ns.windows(2) {
                if w[0] >= w[1] {
                    return Err(GraphError::Invalid(format!(
                        "adjacency of {u} not strictly increasing"
                    )));
                }
            }
            for &v in ns {
                if v >= n {
                    return Err(GraphError::NodeOutOfRange(v));
                }
                if v == u {
                    return Err(GraphError::Invalid(format!("self-loop at {u}")));
                }
                if !self.has_edge(v, u) {
                    return Err(GraphError::Invalid(format!("edge {u}-{v} not symmetric")));
                }
            }
        }
        if degree_sum != 2 * self.edges {
            return Err(GraphError::Invalid(format!(
                "degree sum {degree_sum} != 2m = {}",
                2 * self.edges
            )));
        }
        Ok(())
    }

    /// Partitions `subset` into the connected components of the subgraph it
    /// induces. Components come out sorted by smallest member, members
    /// ascending. Duplicates in `subset` are ignored.
    pub fn connected_components(&self, subset: &[usize]) -> Vec<Vec<usize>> {
        let mut marks = ComponentMarks::new(self.node_count());
        marks.components(self, subset)
    }

    pub fn summary(&self) -> GraphSummary {
        let (min_degree, max_degree) = (0..self.node_count())
            .map(|v| self.degree(v))
            .fold((usize::MAX, 0), |(lo, hi), d| (lo.min(d), hi.max(d)));
        GraphSummary {
            nodes: self.node_count(),
            edges: self.edges,
            mean_degree: self.mean_degree(),
            min_degree,
            max_degree,
        }
    }

    /// Serializes to the edge-list format accepted by [`parse_edge_list`].
    /// Isolated nodes cannot be expressed in that format and are lost.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (u, v) in self.edges() {
            out.push_str(&self.ids[u]);
            out.push(' ');
            out.push_str(&self.ids[v]);
            out.push('\n');
        }
        out
    }
}

/// Reusable scratch for repeated component queries over one graph.
pub(crate) struct ComponentMarks {
    // 0 = not in subset, 1 = in subset and unvisited, 2 = visited
    state: Vec<u8>,
    stack: Vec<usize>,
}

impl ComponentMarks {
    pub(crate) fn new(n: usize) -> Self {
        ComponentMarks {
            state: vec![0; n],
            stack: Vec::new(),
        }
    }

    pub(crate) fn components(&mut self, graph: &Graph, subset: &[usize]) -> Vec<Vec<usize>> {
        for &v in subset {
            self.state[v] = 1;
        }
        let mut out = Vec::new();
        for &start in subset {
            if self.state[start] != 1 {
                continue;
            }
            self.state[start] = 2;
            self.stack.push(start);
            let mut component = Vec::new();
            while let Some(u) = self.stack.pop() {
                component.push(u);
                for &v in graph.neighbors(u) {
                    if self.state[v] == 1 {
                        self.state[v] = 2;
                        self.stack.push(v);
                    }
                }
            }
            component.sort_unstable();
            out.push(component);
        }
        for &v in subset {
            self.state[v] = 0;
        }
        out.sort_unstable_by_key(|c| c[0]);
        out
    }
}

/// One-line graph description for logs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphSummary {
    pub nodes: usize,
    pub edges: usize,
    pub mean_degree: f64,
    pub min_degree: usize,
    pub max_degree: usize,
}

impl fmt::Display for GraphSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} m={} k_avg={:.4} k_min={} k_max={}",
            self.nodes, self.edges, self.mean_degree, self.min_degree, self.max_degree
        )
    }
}

/// Parses a whitespace-separated edge list. Lines starting with `#` or `%`
/// are comments. Node ids are assigned in first-seen order.
pub fn parse_edge_list(text: &str) -> Result<(Graph, LoadReport), GraphError> {
    let mut ids: Vec<String> = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut edges = Vec::new();

    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let (Some(a), Some(b), None) = (tokens.next(), tokens.next(), tokens.next()) else {
            return Err(GraphError::Parse {
                line: lineno + 1,
                found: trimmed.split_whitespace().count(),
            });
        };
        let u = *index.entry(a).or_insert_with(|| {
            ids.push(a.to_string());
            ids.len() - 1
        });
        let v = *index.entry(b).or_insert_with(|| {
            ids.push(b.to_string());
            ids.len() - 1
        });
        edges.push((u, v));
    }

    let (graph, report) = Graph::from_edges(ids, edges)?;
    if report.self_loops_dropped > 0 {
        log::warn!("dropped {} self-loop(s)", report.self_loops_dropped);
    }
    Ok((graph, report))
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<(Graph, LoadReport), GraphError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| GraphError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_edge_list(&text)
}
