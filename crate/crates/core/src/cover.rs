//! Covers: sets of possibly overlapping communities over a node universe.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::engine::Label;
use crate::graph::Graph;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoverError {
    #[error("community {0} is empty")]
    EmptyCommunity(usize),
    #[error("node {node} in community {community} is outside the universe of {universe} nodes")]
    NodeOutOfRange {
        node: usize,
        community: usize,
        universe: usize,
    },
    #[error("covers are over different universes ({0} vs {1} nodes)")]
    UniverseMismatch(usize, usize),
    #[error("node universes differ; offending ids: {}", .0.join(" "))]
    UnknownIds(Vec<String>),
}

/// A list of communities over nodes `0..num_nodes`, each kept sorted.
///
/// `provenance[c]` holds the labels that produced community `c`; covers read
/// from files or generated as ground truth carry empty provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cover {
    num_nodes: usize,
    communities: Vec<Vec<usize>>,
    provenance: Vec<Vec<Label>>,
}

impl Cover {
    /// Builds a cover, sorting and deduplicating each community's members.
    /// Community order is preserved.
    pub fn new(num_nodes: usize, communities: Vec<Vec<usize>>) -> Result<Self, CoverError> {
        let provenance = vec![Vec::new(); communities.len()];
        Cover::with_provenance(num_nodes, communities, provenance)
    }

    pub fn with_provenance(
        num_nodes: usize,
        mut communities: Vec<Vec<usize>>,
        provenance: Vec<Vec<Label>>,
    ) -> Result<Self, CoverError> {
        assert_eq!(communities.len(), provenance.len());
        for (c, members) in communities.iter_mut().enumerate() {
            members.sort_unstable();
            members.dedup();
            match members.last() {
                None => return Err(CoverError::EmptyCommunity(c)),
                Some(&last) if last >= num_nodes => {
                    return Err(CoverError::NodeOutOfRange {
                        node: last,
                        community: c,
                        universe: num_nodes,
                    })
                }
                Some(_) => {}
            }
        }
        Ok(Cover {
            num_nodes,
            communities,
            provenance,
        })
    }

    /// Cover with one community per distinct label, grouping nodes by label.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
        for (node, &l) in labels.iter().enumerate() {
            groups.entry(l).or_default().push(node);
        }
        let mut communities: Vec<Vec<usize>> = groups.into_values().collect();
        communities.sort_unstable_by_key(|c| c[0]);
        Cover::new(labels.len(), communities).expect("label groups are nonempty and in range")
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn len(&self) -> usize {
        self.communities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.communities.is_empty()
    }

    pub fn communities(&self) -> &[Vec<usize>] {
        &self.communities
    }

    pub fn provenance(&self) -> &[Vec<Label>] {
        &self.provenance
    }

    /// Number of communities each node belongs to.
    pub fn membership_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_nodes];
        for c in &self.communities {
            for &v in c {
                counts[v] += 1;
            }
        }
        counts
    }

    /// Indices of the communities containing each node.
    pub fn memberships(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_nodes];
        for (ci, c) in self.communities.iter().enumerate() {
            for &v in c {
                out[v].push(ci);
            }
        }
        out
    }

    /// Nodes in two or more communities, ascending.
    pub fn overlapping_nodes(&self) -> Vec<usize> {
        self.membership_counts()
            .iter()
            .enumerate()
            .filter(|(_, &k)| k >= 2)
            .map(|(v, _)| v)
            .collect()
    }

    pub fn covers_all_nodes(&self) -> bool {
        self.membership_counts().iter().all(|&k| k > 0)
    }

    pub fn is_disjoint(&self) -> bool {
        self.membership_counts().iter().all(|&k| k <= 1)
    }

    /// No community is contained in another.
    pub fn is_maximal(&self) -> bool {
        let sets: Vec<HashSet<usize>> = self
            .communities
            .iter()
            .map(|c| c.iter().copied().collect())
            .collect();
        for (a, sa) in sets.iter().enumerate() {
            for (b, sb) in sets.iter().enumerate() {
                if a != b && sa.len() <= sb.len() && sa.is_subset(sb) {
                    return false;
                }
            }
        }
        true
    }

    /// Orders communities by smallest member, then lexicographically.
    pub fn canonicalize(&mut self) {
        let mut paired: Vec<(Vec<usize>, Vec<Label>)> = self
            .communities
            .drain(..)
            .zip(self.provenance.drain(..))
            .collect();
        paired.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        for (c, p) in paired {
            self.communities.push(c);
            self.provenance.push(p);
        }
    }

    /// Crisp cover file: one community per line, space-separated external
    /// ids. Members are listed in ascending id order (numeric when both ids
    /// are integers) and lines are ordered by their first member.
    pub fn to_file_string(&self, graph: &Graph) -> String {
        let mut lines: Vec<Vec<&str>> = self
            .communities
            .iter()
            .map(|c| {
                let mut ids: Vec<&str> = c.iter().map(|&v| graph.external_id(v)).collect();
                ids.sort_by(|a, b| compare_ids(a, b));
                ids
            })
            .collect();
        lines.sort_by(|a, b| {
            a.iter()
                .zip(b.iter())
                .map(|(x, y)| compare_ids(x, y))
                .find(|o| o.is_ne())
                .unwrap_or_else(|| a.len().cmp(&b.len()))
        });
        let mut out = String::new();
        for line in lines {
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Orders external ids numerically when both parse as integers, otherwise
/// numbers first and then lexicographically.
pub fn compare_ids(a: &str, b: &str) -> Ordering {
    match (a.parse::<i64>(), b.parse::<i64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

/// Communities as read from a cover file, still in external ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawCover {
    pub communities: Vec<Vec<String>>,
}

impl RawCover {
    /// Distinct ids in first-seen order.
    pub fn ids(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for c in &self.communities {
            for id in c {
                if seen.insert(id.as_str()) {
                    out.push(id.clone());
                }
            }
        }
        out
    }

    /// Maps ids through `graph` and requires the cover's universe to equal
    /// the graph's node set exactly.
    pub fn resolve(&self, graph: &Graph) -> Result<Cover, CoverError> {
        let mut unknown = Vec::new();
        let mut communities = Vec::with_capacity(self.communities.len());
        for c in &self.communities {
            let mut members = Vec::with_capacity(c.len());
            for id in c {
                match graph.index_of(id) {
                    Some(v) => members.push(v),
                    None => unknown.push(id.clone()),
                }
            }
            communities.push(members);
        }
        if unknown.is_empty() {
            let cover = Cover::new(graph.node_count(), communities)?;
            let counts = cover.membership_counts();
            unknown.extend(
                counts
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k == 0)
                    .map(|(v, _)| graph.external_id(v).to_string()),
            );
            if unknown.is_empty() {
                return Ok(cover);
            }
        }
        unknown.sort();
        unknown.dedup();
        Err(CoverError::UnknownIds(unknown))
    }
}

/// Resolves two raw covers over their shared id universe. Any id present in
/// only one of them is reported.
pub fn resolve_pair(a: &RawCover, b: &RawCover) -> Result<(Cover, Cover, Vec<String>), CoverError> {
    let ids_a = a.ids();
    let ids_b = b.ids();
    let set_a: HashSet<&str> = ids_a.iter().map(String::as_str).collect();
    let set_b: HashSet<&str> = ids_b.iter().map(String::as_str).collect();
    let mut offending: Vec<String> = set_a
        .symmetric_difference(&set_b)
        .map(|s| s.to_string())
        .collect();
    if !offending.is_empty() {
        offending.sort();
        return Err(CoverError::UnknownIds(offending));
    }
    let index: HashMap<&str, usize> = ids_a
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let map = |raw: &RawCover| -> Result<Cover, CoverError> {
        let communities = raw
            .communities
            .iter()
            .map(|c| c.iter().map(|id| index[id.as_str()]).collect())
            .collect();
        Cover::new(ids_a.len(), communities)
    };
    Ok((map(a)?, map(b)?, ids_a))
}

/// Parses a cover file. `#` lines are comments; blank lines are skipped.
pub fn parse_cover(text: &str) -> RawCover {
    let communities = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .collect();
    RawCover { communities }
}
