//! Turning memories into communities: label distributions, thresholding,
//! per-label connectivity grouping and removal of nested communities.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::cover::Cover;
use crate::engine::{self, EngineConfig, Label, MemoryState};
use crate::graph::{ComponentMarks, Graph};

#[derive(Debug, Error, PartialEq)]
pub enum ThresholdError {
    #[error("threshold {0} is outside [0, 1]")]
    OutOfRange(f64),
}

/// Post-processing cutoff `r`: labels heard with probability below it are
/// dropped from a node.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Threshold(f64);

impl Threshold {
    pub fn new(r: f64) -> Result<Self, ThresholdError> {
        if (0.0..=1.0).contains(&r) {
            Ok(Threshold(r))
        } else {
            Err(ThresholdError::OutOfRange(r))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Threshold {
    type Error = ThresholdError;

    fn try_from(r: f64) -> Result<Self, Self::Error> {
        Threshold::new(r)
    }
}

/// Per-node label probabilities, each row sorted by label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelDistribution {
    rows: Vec<Vec<(Label, f64)>>,
}

impl LabelDistribution {
    pub fn rows(&self) -> &[Vec<(Label, f64)>] {
        &self.rows
    }

    pub fn row(&self, node: usize) -> &[(Label, f64)] {
        &self.rows[node]
    }

    pub fn node_count(&self) -> usize {
        self.rows.len()
    }

    /// Fuzzy membership file: `node<TAB>label<TAB>probability` with external
    /// ids and six decimals.
    pub fn to_tsv(&self, graph: &Graph) -> String {
        let mut out = String::new();
        for (node, row) in self.rows.iter().enumerate() {
            for &(label, p) in row {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{:.6}",
                    graph.external_id(node),
                    graph.external_id(label.origin()),
                    p
                );
            }
        }
        out
    }
}

impl From<Vec<Vec<(Label, f64)>>> for LabelDistribution {
    fn from(mut rows: Vec<Vec<(Label, f64)>>) -> Self {
        for row in &mut rows {
            row.sort_unstable_by_key(|&(l, _)| l);
        }
        LabelDistribution { rows }
    }
}

/// Relative label frequencies of every memory.
pub fn to_distribution(state: &MemoryState) -> LabelDistribution {
    let rows = state
        .memories()
        .iter()
        .map(|memory| {
            let total = memory.total() as f64;
            memory
                .counts()
                .into_iter()
                .map(|(label, count)| (label, count as f64 / total))
                .collect()
        })
        .collect();
    LabelDistribution { rows }
}

/// Label sets that survived thresholding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSets {
    pub sets: Vec<Vec<Label>>,
    /// Labels each node kept before the empty-set fallback was applied.
    pub kept_before_fallback: Vec<usize>,
}

impl LabelSets {
    pub fn fallback_count(&self) -> usize {
        self.kept_before_fallback
            .iter()
            .filter(|&&k| k == 0)
            .count()
    }

    pub fn mean_kept_before_fallback(&self) -> f64 {
        let n = self.kept_before_fallback.len();
        if n == 0 {
            return 0.0;
        }
        self.kept_before_fallback.iter().sum::<usize>() as f64 / n as f64
    }
}

/// Keeps every label with probability `>= r`. A node left with nothing
/// keeps its single most probable label (smallest label on ties).
pub fn apply_threshold(dist: &LabelDistribution, r: Threshold) -> LabelSets {
    let mut sets = Vec::with_capacity(dist.rows.len());
    let mut kept_before_fallback = Vec::with_capacity(dist.rows.len());
    for row in &dist.rows {
        let kept: Vec<Label> = row
            .iter()
            .filter(|&&(_, p)| p >= r.0)
            .map(|&(l, _)| l)
            .collect();
        kept_before_fallback.push(kept.len());
        if kept.is_empty() {
            let mut best: Option<(Label, f64)> = None;
            for &(l, p) in row {
                if best.is_none_or(|(_, bp)| p > bp) {
                    best = Some((l, p));
                }
            }
            sets.push(best.map(|(l, _)| vec![l]).unwrap_or_default());
        } else {
            sets.push(kept);
        }
    }
    LabelSets {
        sets,
        kept_before_fallback,
    }
}

/// Groups nodes sharing a label into connected communities and drops every
/// community contained in another. Duplicate node sets from different
/// labels collapse into one community carrying all of their labels.
pub fn build_cover(graph: &Graph, label_sets: &[Vec<Label>]) -> Cover {
    let n = graph.node_count();
    assert_eq!(label_sets.len(), n, "one label set per node");

    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (node, set) in label_sets.iter().enumerate() {
        for &label in set {
            holders[label.origin()].push(node);
        }
    }

    let mut marks = ComponentMarks::new(n);
    let mut candidates: Vec<Vec<usize>> = Vec::new();
    let mut sources: Vec<Vec<Label>> = Vec::new();
    let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
    for (label, nodes) in holders.iter().enumerate() {
        if nodes.is_empty() {
            continue;
        }
        for component in marks.components(graph, nodes) {
            match seen.get(&component) {
                Some(&idx) => sources[idx].push(Label(label)),
                None => {
                    seen.insert(component.clone(), candidates.len());
                    candidates.push(component);
                    sources.push(vec![Label(label)]);
                }
            }
        }
    }

    let mut containing: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (ci, c) in candidates.iter().enumerate() {
        for &v in c {
            containing[v].push(ci);
        }
    }
    let nested: Vec<bool> = candidates
        .iter()
        .enumerate()
        .map(|(ci, c)| {
            containing[c[0]]
                .iter()
                .any(|&other| other != ci && is_strict_subset(c, &candidates[other]))
        })
        .collect();

    let (communities, provenance): (Vec<_>, Vec<_>) = candidates
        .into_iter()
        .zip(sources)
        .zip(nested)
        .filter(|(_, nested)| !nested)
        .map(|(pair, _)| pair)
        .unzip();
    let mut cover = Cover::with_provenance(n, communities, provenance)
        .expect("components are nonempty and in range");
    cover.canonicalize();
    cover
}

/// `a ⊊ b` for sorted, duplicate-free slices.
fn is_strict_subset(a: &[usize], b: &[usize]) -> bool {
    if a.len() >= b.len() {
        return false;
    }
    let mut bi = b.iter();
    'outer: for x in a {
        for y in bi.by_ref() {
            if y == x {
                continue 'outer;
            }
            if y > x {
                return false;
            }
        }
        return false;
    }
    true
}

/// Output of a full detection run.
#[derive(Debug, Clone)]
pub struct Detection {
    pub cover: Cover,
    pub distribution: LabelDistribution,
    pub labels: LabelSets,
    pub sweeps: usize,
}

/// Runs the dynamic and post-processes its memories into a cover.
pub fn detect(
    graph: &Graph,
    config: &EngineConfig,
    r: Threshold,
) -> Result<Detection, crate::Error> {
    let state = engine::run(graph, config)?;
    Ok(postprocess(graph, &state, r))
}

/// Post-processing of an already evolved state.
pub fn postprocess(graph: &Graph, state: &MemoryState, r: Threshold) -> Detection {
    let distribution = to_distribution(state);
    let labels = apply_threshold(&distribution, r);
    let cover = build_cover(graph, &labels.sets);
    Detection {
        cover,
        distribution,
        labels,
        sweeps: state.sweeps_completed(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Memory;

    fn dist(rows: Vec<Vec<(usize, f64)>>) -> LabelDistribution {
        rows.into_iter()
            .map(|r| r.into_iter().map(|(l, p)| (Label(l), p)).collect())
            .collect::<Vec<_>>()
            .into()
    }

    fn th(r: f64) -> Threshold {
        Threshold::new(r).unwrap()
    }

    #[test]
    fn threshold_range() {
        assert!(Threshold::new(-0.1).is_err());
        assert!(Threshold::new(1.5).is_err());
        assert!(Threshold::new(f64::NAN).is_err());
        assert_eq!(Threshold::new(1.0).unwrap().value(), 1.0);
    }

    #[test]
    fn distribution_from_counts() {
        let state = MemoryState::from_memories(
            vec![
                Memory::from_counts([(Label(0), 101)]),
                Memory::from_counts([(Label(0), 75), (Label(1), 26)]),
            ],
            100,
        );
        let d = to_distribution(&state);
        assert_eq!(d.row(0), [(Label(0), 1.0)]);
        assert_eq!(
            d.row(1),
            [(Label(0), 75.0 / 101.0), (Label(1), 26.0 / 101.0)]
        );
    }

    #[test]
    fn threshold_keeps_labels_at_or_above_r() {
        let d = dist(vec![vec![(0, 0.7), (1, 0.3)]]);
        assert_eq!(apply_threshold(&d, th(0.2)).sets[0], [Label(0), Label(1)]);
        assert_eq!(apply_threshold(&d, th(0.33)).sets[0], [Label(0)]);
        // equality survives
        assert_eq!(apply_threshold(&d, th(0.3)).sets[0], [Label(0), Label(1)]);
    }

    #[test]
    fn threshold_fallback_keeps_argmax() {
        let d = dist(vec![vec![(0, 0.6), (1, 0.4)], vec![(3, 0.5), (2, 0.5)]]);
        let sets = apply_threshold(&d, th(0.8));
        assert_eq!(sets.sets, [vec![Label(0)], vec![Label(2)]]);
        assert_eq!(sets.kept_before_fallback, [0, 0]);
        assert_eq!(sets.fallback_count(), 2);
    }

    #[test]
    fn cover_of_two_triangles_sharing_a_node() {
        // triangles {0,1,2} and {2,3,4}
        let g =
            Graph::with_node_count(5, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)]).unwrap();
        let sets = vec![
            vec![Label(0)],
            vec![Label(0)],
            vec![Label(0), Label(4)],
            vec![Label(4)],
            vec![Label(4)],
        ];
        let cover = build_cover(&g, &sets);
        assert_eq!(cover.communities(), [vec![0, 1, 2], vec![2, 3, 4]]);
        assert_eq!(cover.overlapping_nodes(), [2]);
    }

    #[test]
    fn nested_candidates_removed() {
        let g = Graph::with_node_count(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let sets = vec![
            vec![Label(0)],
            vec![Label(0), Label(1)],
            vec![Label(0), Label(1)],
        ];
        let cover = build_cover(&g, &sets);
        assert_eq!(cover.communities(), [vec![0, 1, 2]]);
        assert_eq!(cover.provenance(), [vec![Label(0)]]);
    }

    #[test]
    fn duplicates_collapse_with_all_labels() {
        let g = Graph::with_node_count(2, [(0, 1)]).unwrap();
        let sets = vec![vec![Label(0), Label(1)], vec![Label(0), Label(1)]];
        let cover = build_cover(&g, &sets);
        assert_eq!(cover.communities(), [vec![0, 1]]);
        assert_eq!(cover.provenance(), [vec![Label(0), Label(1)]]);
    }

    #[test]
    fn one_label_on_disconnected_groups_gives_two_communities() {
        // path 0-1-2-3 where only the ends hold label 0
        let g = Graph::with_node_count(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let sets = vec![
            vec![Label(0)],
            vec![Label(1)],
            vec![Label(1)],
            vec![Label(0)],
        ];
        let cover = build_cover(&g, &sets);
        assert_eq!(cover.communities(), [vec![0], vec![1, 2], vec![3]]);
        assert_eq!(cover.provenance()[0], [Label(0)]);
        assert_eq!(cover.provenance()[2], [Label(0)]);
    }

    #[test]
    fn strict_subset_check() {
        assert!(is_strict_subset(&[1, 3], &[0, 1, 2, 3]));
        assert!(!is_strict_subset(&[1, 4], &[0, 1, 2, 3]));
        assert!(!is_strict_subset(&[0, 1], &[0, 1]));
        assert!(!is_strict_subset(&[5], &[0, 1, 2]));
    }

    #[test]
    fn fuzzy_tsv_format() {
        let (g, _) = crate::graph::parse_edge_list("a b\n").unwrap();
        let d = dist(vec![vec![(0, 1.0)], vec![(0, 2.0 / 3.0), (1, 1.0 / 3.0)]]);
        assert_eq!(
            d.to_tsv(&g),
            "a\ta\t1.000000\nb\ta\t0.666667\nb\tb\t0.333333\n"
        );
    }

    #[test]
    fn clique_detects_single_community() {
        let edges = (0..5).flat_map(|i| (i + 1..5).map(move |j| (i, j)));
        let g = Graph::with_node_count(5, edges).unwrap();
        let det = detect(&g, &EngineConfig::slpa(100, 0), th(0.1)).unwrap();
        assert!(det.cover.is_maximal());
        assert!(det.cover.covers_all_nodes());
    }
}
