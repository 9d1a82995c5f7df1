//! Cover quality measures: overlapping-node F-score, the cover extension of
//! normalized mutual information, overlapping modularity, and descriptive
//! statistics.

use serde::{Deserialize, Serialize};

use crate::cover::{Cover, CoverError};
use crate::graph::Graph;

/// Precision/recall of a binary classification and their harmonic mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryClassificationResult {
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

impl BinaryClassificationResult {
    pub fn from_precision_recall(precision: f64, recall: f64) -> Self {
        let f_score = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        BinaryClassificationResult {
            precision,
            recall,
            f_score,
        }
    }
}

fn same_universe(a: &Cover, b: &Cover) -> Result<usize, CoverError> {
    if a.num_nodes() != b.num_nodes() {
        return Err(CoverError::UniverseMismatch(a.num_nodes(), b.num_nodes()));
    }
    Ok(a.num_nodes())
}

/// Scores detection of overlapping nodes (members of two or more
/// communities) against a ground-truth cover.
///
/// With no detected overlapping nodes precision is 1 if the truth has none
/// either, else 0. With no true overlapping nodes recall is 1.
pub fn overlap_fscore(
    detected: &Cover,
    truth: &Cover,
) -> Result<BinaryClassificationResult, CoverError> {
    same_universe(detected, truth)?;
    let d = detected.membership_counts();
    let t = truth.membership_counts();
    let detected_count = d.iter().filter(|&&k| k >= 2).count();
    let true_count = t.iter().filter(|&&k| k >= 2).count();
    let hits = d.iter().zip(&t).filter(|(&a, &b)| a >= 2 && b >= 2).count();

    let precision = match (detected_count, true_count) {
        (0, 0) => 1.0,
        (0, _) => 0.0,
        (dc, _) => hits as f64 / dc as f64,
    };
    let recall = if true_count == 0 {
        1.0
    } else {
        hits as f64 / true_count as f64
    };
    Ok(BinaryClassificationResult::from_precision_recall(
        precision, recall,
    ))
}

#[inline]
fn h(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Entropy of a binary membership variable with `size` of `n` nodes inside.
fn membership_entropy(size: usize, n: usize) -> f64 {
    let n_f = n as f64;
    h(size as f64 / n_f) + h((n - size) as f64 / n_f)
}

/// Normalized conditional entropy H(X|Y)_norm, averaged over the
/// communities of `x` with nonzero entropy. Returns 0 when there are none.
fn normalized_conditional_entropy(x: &Cover, y: &Cover, y_entropy: &[f64]) -> f64 {
    let n = x.num_nodes();
    let n_f = n as f64;
    let y_members = {
        let mut m = vec![Vec::new(); n];
        for (l, c) in y.communities().iter().enumerate() {
            for &v in c {
                m[v].push(l);
            }
        }
        m
    };
    let mut overlap = vec![0usize; y.len()];
    let mut touched = Vec::new();

    let mut sum = 0.0;
    let mut terms = 0usize;
    for xk in x.communities() {
        let hx = membership_entropy(xk.len(), n);
        if hx <= 0.0 {
            continue;
        }
        for &v in xk {
            for &l in &y_members[v] {
                if overlap[l] == 0 {
                    touched.push(l);
                }
                overlap[l] += 1;
            }
        }

        let mut best = f64::INFINITY;
        for (l, yl) in y.communities().iter().enumerate() {
            let n11 = overlap[l];
            let n10 = xk.len() - n11;
            let n01 = yl.len() - n11;
            let n00 = n - n11 - n10 - n01;
            let (p11, p10, p01, p00) = (
                n11 as f64 / n_f,
                n10 as f64 / n_f,
                n01 as f64 / n_f,
                n00 as f64 / n_f,
            );
            if h(p11) + h(p00) < h(p01) + h(p10) {
                continue;
            }
            let joint = h(p11) + h(p10) + h(p01) + h(p00);
            best = best.min((joint - y_entropy[l]).max(0.0));
        }
        for &l in &touched {
            overlap[l] = 0;
        }
        touched.clear();

        let conditional = if best.is_finite() { best } else { hx };
        sum += conditional / hx;
        terms += 1;
    }
    if terms == 0 {
        0.0
    } else {
        sum / terms as f64
    }
}

/// Normalized mutual information between two covers, in `[0, 1]`.
///
/// Each community is a binary membership variable. For a community of one
/// cover, its conditional entropy given the other cover is the smallest
/// conditional entropy against any single community there whose joint
/// distribution is admissible (`h(p11) + h(p00) >= h(p01) + h(p10)`); with no
/// admissible partner it is the community's own entropy.
/// Communities with zero entropy (empty or the whole universe) are skipped.
pub fn extended_nmi(x: &Cover, y: &Cover) -> Result<f64, CoverError> {
    let n = same_universe(x, y)?;
    let hx: Vec<f64> = x
        .communities()
        .iter()
        .map(|c| membership_entropy(c.len(), n))
        .collect();
    let hy: Vec<f64> = y
        .communities()
        .iter()
        .map(|c| membership_entropy(c.len(), n))
        .collect();
    let x_given_y = normalized_conditional_entropy(x, y, &hy);
    let y_given_x = normalized_conditional_entropy(y, x, &hx);
    Ok((1.0 - 0.5 * (x_given_y + y_given_x)).clamp(0.0, 1.0))
}

/// Per-node community weights; each row sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct BelongingCoefficients {
    rows: Vec<Vec<(usize, f64)>>,
}

impl BelongingCoefficients {
    /// `(community, alpha)` pairs with nonzero alpha for `node`.
    pub fn row(&self, node: usize) -> &[(usize, f64)] {
        &self.rows[node]
    }

    pub fn get(&self, node: usize, community: usize) -> f64 {
        self.rows[node]
            .iter()
            .find(|&&(c, _)| c == community)
            .map_or(0.0, |&(_, a)| a)
    }

    pub fn node_count(&self) -> usize {
        self.rows.len()
    }
}

/// Splits each node's membership equally over its communities.
pub fn belonging_coefficients(cover: &Cover) -> BelongingCoefficients {
    let rows = cover
        .memberships()
        .into_iter()
        .map(|cs| {
            let alpha = 1.0 / cs.len() as f64;
            cs.into_iter().map(|c| (c, alpha)).collect()
        })
        .collect();
    BelongingCoefficients { rows }
}

/// Logistic weight `1 / (1 + e^{-(60a - 30)})` applied to a belonging
/// coefficient. The pair weight is the product of two of these.
#[inline]
pub fn belonging_weight(alpha: f64) -> f64 {
    1.0 / (1.0 + (-(60.0 * alpha - 30.0)).exp())
}

/// Overlapping modularity with the logistic belonging function.
///
/// The undirected graph is read as bidirected: every edge counts in both
/// directions, `m_dir = 2m`, and in/out degrees equal the degree.
///
/// Because the pair weight factorizes as `w(a_i) w(a_j)`, the null-model
/// term of each community collapses to a square of a degree-weighted sum,
/// and the edge term only needs the edges touching the community; pairs of
/// non-members contribute the constant `w(0)^2` per edge.
pub fn qov(graph: &Graph, cover: &Cover) -> Result<f64, CoverError> {
    let n = graph.node_count();
    if cover.num_nodes() != n {
        return Err(CoverError::UniverseMismatch(n, cover.num_nodes()));
    }
    let m_dir = 2.0 * graph.edge_count() as f64;
    if m_dir == 0.0 {
        return Ok(0.0);
    }
    let n_f = n as f64;
    let coefficients = belonging_coefficients(cover);
    let w0 = belonging_weight(0.0);

    // weight of each node in the community being scored; w0 for non-members
    let mut weight = vec![w0; n];
    let mut member = vec![false; n];
    let mut total = 0.0;
    for (ci, members) in cover.communities().iter().enumerate() {
        for &v in members {
            weight[v] = belonging_weight(coefficients.get(v, ci));
            member[v] = true;
        }

        let mut internal_dir = 0usize;
        let mut member_degree = 0usize;
        let mut edge_term = 0.0;
        let mut member_weight = 0.0;
        let mut member_weighted_degree = 0.0;
        for &i in members {
            let wi = weight[i];
            let ki = graph.degree(i);
            member_degree += ki;
            member_weight += wi;
            member_weighted_degree += wi * ki as f64;
            for &j in graph.neighbors(i) {
                if member[j] {
                    edge_term += wi * weight[j];
                    internal_dir += 1;
                } else {
                    // both directions of a crossing edge
                    edge_term += 2.0 * wi * w0;
                }
            }
        }
        let crossing_dir = member_degree - internal_dir;
        let outside_dir = 2 * graph.edge_count() - internal_dir - 2 * crossing_dir;
        edge_term += w0 * w0 * outside_dir as f64;

        let outside_count = (n - members.len()) as f64;
        let weight_sum = member_weight + w0 * outside_count;
        let outside_degree = m_dir - member_degree as f64;
        let degree_weight = member_weighted_degree + w0 * outside_degree;
        // sum_i beta_i k_i, where beta_i = w_i * weight_sum / n
        let null_sum = weight_sum / n_f * degree_weight;

        total += edge_term - null_sum * null_sum / m_dir;

        for &v in members {
            weight[v] = w0;
            member[v] = false;
        }
    }
    Ok(total / m_dir)
}

/// Community count and overlap summary of a cover.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverStats {
    pub num_communities: usize,
    /// Nodes in two or more communities.
    pub num_overlapping_nodes: usize,
    /// Mean membership count over overlapping nodes only; 0 when there are
    /// none.
    pub avg_memberships_of_overlapping: f64,
}

pub fn cover_stats(cover: &Cover) -> CoverStats {
    let counts = cover.membership_counts();
    let (on, total) = counts
        .iter()
        .filter(|&&k| k >= 2)
        .fold((0usize, 0usize), |(c, s), &k| (c + 1, s + k));
    CoverStats {
        num_communities: cover.len(),
        num_overlapping_nodes: on,
        avg_memberships_of_overlapping: if on == 0 {
            0.0
        } else {
            total as f64 / on as f64
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cover(n: usize, cs: &[&[usize]]) -> Cover {
        Cover::new(n, cs.iter().map(|c| c.to_vec()).collect()).unwrap()
    }

    #[test]
    fn fscore_identity() {
        let c = cover(5, &[&[0, 1, 2], &[2, 3, 4]]);
        let r = overlap_fscore(&c, &c).unwrap();
        assert_eq!((r.precision, r.recall, r.f_score), (1.0, 1.0, 1.0));
    }

    #[test]
    fn fscore_half_overlap() {
        // truth overlapping {1,2}; detected overlapping {2,3}
        let truth = cover(5, &[&[0, 1, 2], &[1, 2, 4], &[3]]);
        let detected = cover(5, &[&[0, 2, 3], &[1, 2, 3, 4]]);
        let r = overlap_fscore(&detected, &truth).unwrap();
        assert_eq!((r.precision, r.recall, r.f_score), (0.5, 0.5, 0.5));
    }

    #[test]
    fn fscore_nothing_detected() {
        let truth = cover(3, &[&[0, 1], &[1, 2]]);
        let detected = cover(3, &[&[0, 1, 2]]);
        let r = overlap_fscore(&detected, &truth).unwrap();
        assert_eq!(r.precision, 0.0);
        assert_eq!(r.f_score, 0.0);
    }

    #[test]
    fn fscore_universe_mismatch() {
        assert_eq!(
            overlap_fscore(&cover(3, &[&[0, 1, 2]]), &cover(4, &[&[0, 1, 2, 3]])),
            Err(CoverError::UniverseMismatch(3, 4))
        );
    }

    #[test]
    fn nmi_of_identical_covers_is_one() {
        let c = cover(6, &[&[0, 1, 2], &[2, 3], &[3, 4, 5], &[0, 1, 2, 3, 4, 5]]);
        assert_eq!(extended_nmi(&c, &c).unwrap(), 1.0);
    }

    #[test]
    fn nmi_of_unrelated_partitions_is_small() {
        // halves vs. odd/even
        let n = 8;
        let x = cover(n, &[&[0, 1, 2, 3], &[4, 5, 6, 7]]);
        let y = cover(n, &[&[0, 2, 4, 6], &[1, 3, 5, 7]]);
        assert_eq!(extended_nmi(&x, &y).unwrap(), 0.0);
    }

    #[test]
    fn belonging_rows_sum_to_one() {
        let c = cover(4, &[&[0, 1], &[1, 2, 3], &[1, 3]]);
        let b = belonging_coefficients(&c);
        assert_eq!(b.row(0), [(0, 1.0)]);
        assert_eq!(b.get(1, 2), 1.0 / 3.0);
        assert_eq!(b.get(3, 1), 0.5);
        assert_eq!(b.get(0, 1), 0.0);
        for v in 0..4 {
            let s: f64 = b.row(v).iter().map(|&(_, a)| a).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn belonging_weight_shape() {
        assert_eq!(belonging_weight(0.5), 0.5);
        assert!(belonging_weight(1.0) > 1.0 - 1e-12);
        assert!(belonging_weight(0.0) < 1e-12);
    }

    #[test]
    fn stats_examples() {
        let disjoint = cover(4, &[&[0, 1], &[2, 3]]);
        assert_eq!(
            cover_stats(&disjoint),
            CoverStats {
                num_communities: 2,
                num_overlapping_nodes: 0,
                avg_memberships_of_overlapping: 0.0
            }
        );
        let shared = cover(5, &[&[0, 1, 2], &[2, 3, 4]]);
        assert_eq!(
            cover_stats(&shared),
            CoverStats {
                num_communities: 2,
                num_overlapping_nodes: 1,
                avg_memberships_of_overlapping: 2.0
            }
        );
    }

    #[test]
    fn qov_edgeless_graph_is_zero() {
        let g = Graph::with_node_count(2, []).unwrap();
        assert_eq!(qov(&g, &cover(2, &[&[0], &[1]])).unwrap(), 0.0);
    }
}
