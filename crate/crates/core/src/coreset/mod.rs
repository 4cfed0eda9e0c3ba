//! Greedy minimum-similarity subset selection over a complete weighted
//! graph, with an exhaustive search for small instances.

mod lsim;

pub use lsim::{lsim_bytes, parse_lsim, read_lsim, write_lsim};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Enumeration budget for [`exhaustive_select`].
pub const EXHAUSTIVE_LIMIT: u128 = 10_000_000;

/// Position of pair `(i, j)`, `i < j`, in the condensed upper triangle.
pub fn condensed_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Complete graph with one non-negative weight per unordered vertex pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    n: usize,
    weights: Vec<f64>,
    labels: Vec<String>,
}

impl SimilarityGraph {
    pub fn new(n: usize, weights: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        if n < 2 {
            return Err(Error::param(format!("graph needs at least 2 vertices, got {n}")));
        }
        if weights.len() != n * (n - 1) / 2 {
            return Err(Error::param(format!(
                "{n} vertices need {} weights, got {}",
                n * (n - 1) / 2,
                weights.len()
            )));
        }
        if labels.len() != n {
            return Err(Error::param(format!("{n} vertices but {} labels", labels.len())));
        }
        if let Some(k) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::data(format!("weight #{k} = {} is not a finite non-negative value", weights[k])));
        }
        Ok(Self { n, weights, labels })
    }

    /// Builds a graph from a dense symmetric matrix given as rows; only the
    /// upper triangle is read.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut weights = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for (i, row) in rows.iter().enumerate() {
            weights.extend_from_slice(&row[i + 1..n]);
        }
        Self::new(n, weights, (0..n).map(|i| i.to_string()).collect())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.weights[condensed_index(self.n, i, j)],
            std::cmp::Ordering::Greater => self.weights[condensed_index(self.n, j, i)],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    /// Graph with every weight replaced by `max - w`, turning a
    /// dissimilarity into a similarity.
    pub fn inverted(&self) -> Self {
        let max = self.max_weight();
        Self {
            n: self.n,
            weights: self.weights.iter().map(|w| max - w).collect(),
            labels: self.labels.clone(),
        }
    }

    /// Applies `f` to every weight.
    pub fn map_weights(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.n,
            self.weights.iter().map(|&w| f(w)).collect(),
            self.labels.clone(),
        )
    }
}

/// Evaluates `similarity` once per unordered pair, in parallel, and
/// assembles the weights in condensed order.
pub fn build_graph<T, F>(items: &[T], labels: Vec<String>, similarity: F) -> Result<SimilarityGraph>
where
    T: Sync,
    F: Fn(&T, &T) -> Result<f64> + Sync,
{
    let n = items.len();
    if n < 2 {
        return Err(Error::param(format!("graph needs at least 2 items, got {n}")));
    }
    if labels.len() != n {
        return Err(Error::param(format!("{n} items but {} labels", labels.len())));
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let weights = pairs
        .par_iter()
        .map(|&(i, j)| {
            let w = similarity(&items[i], &items[j])?;
            if !w.is_finite() || w < 0.0 {
                return Err(Error::data(format!(
                    "similarity of ({}, {}) is {w}",
                    labels[i], labels[j]
                )));
            }
            Ok(w)
        })
        .collect::<Result<Vec<f64>>>()?;
    SimilarityGraph::new(n, weights, labels)
}

/// How a greedy step scores a candidate vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GreedyPolicy {
    /// Summed weight to the already selected vertices.
    #[default]
    ToSelected,
    /// Summed weight to the vertices not yet selected.
    ToUnselected,
}

impl fmt::Display for GreedyPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GreedyPolicy::ToSelected => "to-selected",
            GreedyPolicy::ToUnselected => "to-unselected",
        })
    }
}

impl FromStr for GreedyPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "to-selected" => Ok(GreedyPolicy::ToSelected),
            "to-unselected" => Ok(GreedyPolicy::ToUnselected),
            other => Err(Error::param(format!(
                "unknown policy '{other}' (expected to-selected or to-unselected)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionRule {
    Greedy(GreedyPolicy),
    Exhaustive,
}

impl fmt::Display for SelectionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionRule::Greedy(p) => write!(f, "greedy/{p}"),
            SelectionRule::Exhaustive => f.write_str("exhaustive"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    /// Vertex indices in selection order.
    pub selected: Vec<usize>,
    /// Sum of pairwise weights inside the selection.
    pub objective: f64,
    pub rule: SelectionRule,
}

fn check_k(g: &SimilarityGraph, k: usize) -> Result<()> {
    if k < 2 || k > g.len() {
        return Err(Error::param(format!("K = {k} outside 2..={}", g.len())));
    }
    Ok(())
}

/// Sum of weights over unordered pairs inside `subset`.
pub fn objective(g: &SimilarityGraph, subset: &[usize]) -> Result<f64> {
    let mut seen = vec![false; g.len()];
    for &v in subset {
        if v >= g.len() {
            return Err(Error::param(format!("vertex {v} out of range 0..{}", g.len())));
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(Error::param(format!("vertex {v} listed twice")));
        }
    }
    Ok(pair_sum(g, subset))
}

// Sums in ascending vertex order so a set scores the same however it is
// listed.
fn pair_sum(g: &SimilarityGraph, subset: &[usize]) -> f64 {
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    let mut total = 0.0;
    for (a, &i) in sorted.iter().enumerate() {
        for &j in &sorted[a + 1..] {
            total += g.weight(i, j);
        }
    }
    total
}

/// Greedy selection of `k` vertices with small summed similarity.
///
/// Seeds with the minimum-weight pair, then adds one vertex per step by the
/// chosen policy. Every tie goes to the lowest index.
pub fn greedy_select(g: &SimilarityGraph, k: usize, policy: GreedyPolicy) -> Result<SelectionResult> {
    check_k(g, k)?;
    let n = g.len();

    let mut seed = (0, 1);
    let mut best = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            let w = g.weight(i, j);
            if w < best {
                best = w;
                seed = (i, j);
            }
        }
    }

    let mut selected = vec![seed.0, seed.1];
    let mut in_set = vec![false; n];
    in_set[seed.0] = true;
    in_set[seed.1] = true;

    while selected.len() < k {
        let mut pick = None;
        let mut best = f64::INFINITY;
        for cand in (0..n).filter(|&c| !in_set[c]) {
            let score: f64 = match policy {
                GreedyPolicy::ToSelected => selected.iter().map(|&l| g.weight(cand, l)).sum(),
                GreedyPolicy::ToUnselected => (0..n)
                    .filter(|&l| !in_set[l] && l != cand)
                    .map(|l| g.weight(cand, l))
                    .sum(),
            };
            if score < best {
                best = score;
                pick = Some(cand);
            }
        }
        let v = pick.expect("k <= n leaves a candidate");
        in_set[v] = true;
        selected.push(v);
    }

    Ok(SelectionResult {
        objective: pair_sum(g, &selected),
        selected,
        rule: SelectionRule::Greedy(policy),
    })
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > EXHAUSTIVE_LIMIT * 1000 {
            return acc;
        }
    }
    acc
}

/// Exact minimum-objective `k`-subset by enumeration. Ties go to the
/// lexicographically smallest index set.
pub fn exhaustive_select(g: &SimilarityGraph, k: usize) -> Result<SelectionResult> {
    check_k(g, k)?;
    let n = g.len();
    let count = binomial(n, k);
    if count > EXHAUSTIVE_LIMIT {
        return Err(Error::Capacity(format!(
            "C({n}, {k}) = {count} subsets exceeds the limit of {EXHAUSTIVE_LIMIT}"
        )));
    }

    let mut combo: Vec<usize> = (0..k).collect();
    let mut best = combo.clone();
    let mut best_obj = pair_sum(g, &combo);
    loop {
        // Next combination in lexicographic order.
        let mut i = k;
        while i > 0 && combo[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        combo[i - 1] += 1;
        for j in i..k {
            combo[j] = combo[j - 1] + 1;
        }
        let obj = pair_sum(g, &combo);
        if obj < best_obj {
            best_obj = obj;
            best.copy_from_slice(&combo);
        }
    }
    Ok(SelectionResult {
        selected: best,
        objective: best_obj,
        rule: SelectionRule::Exhaustive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three() -> SimilarityGraph {
        SimilarityGraph::new(3, vec![1.0, 5.0, 9.0], vec!["1".into(), "2".into(), "3".into()]).unwrap()
    }

    /// a, b, c, d = 0, 1, 2, 3.
    fn four() -> SimilarityGraph {
        SimilarityGraph::from_dense(&[
            vec![0.0, 1.0, 2.0, 10.0],
            vec![1.0, 0.0, 10.0, 2.0],
            vec![2.0, 10.0, 0.0, 10.0],
            vec![10.0, 2.0, 10.0, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn condensed_layout() {
        let n = 5;
        let mut k = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                assert_eq!(condensed_index(n, i, j), k);
                k += 1;
            }
        }
        let g = build_graph(&[0, 1, 2, 3], (0..4).map(|i| i.to_string()).collect(), |_, _| Ok(1.0)).unwrap();
        assert_eq!(g.weights().len(), 6);
    }

    #[test]
    fn build_graph_rejects_non_finite() {
        let labels = vec!["a".to_string(), "b".into(), "c".into()];
        let err = build_graph(&[0.0, 1.0, 2.0], labels, |a, b| {
            Ok(if *a == 1.0 && *b == 2.0 { f64::NAN } else { 1.0 })
        })
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("(b, c)"), "{msg}");
    }

    #[test]
    fn k_two_picks_min_pair() {
        for policy in [GreedyPolicy::ToSelected, GreedyPolicy::ToUnselected] {
            let r = greedy_select(&three(), 2, policy).unwrap();
            assert_eq!(r.selected, vec![0, 1]);
            assert_eq!(r.objective, 1.0);
        }
    }

    #[test]
    fn worked_four_vertex_instance() {
        let g = four();
        let r = greedy_select(&g, 3, GreedyPolicy::ToSelected).unwrap();
        assert_eq!(r.selected, vec![0, 1, 2]);
        assert_eq!(r.objective, 13.0);
        let ex = exhaustive_select(&g, 3).unwrap();
        assert_eq!(ex.objective, 13.0);
        assert_eq!(objective(&g, &[0, 1, 2, 3]).unwrap(), 35.0);
    }

    #[test]
    fn k_equal_n_takes_everything() {
        let g = four();
        let r = greedy_select(&g, 4, GreedyPolicy::ToUnselected).unwrap();
        let mut sorted = r.selected.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 1, 2, 3]);
        assert_eq!(r.objective, 35.0);
    }

    #[test]
    fn equal_weights_choose_first_indices() {
        let g = SimilarityGraph::new(6, vec![2.0; 15], (0..6).map(|i| i.to_string()).collect()).unwrap();
        let ex = exhaustive_select(&g, 4).unwrap();
        assert_eq!(ex.selected, vec![0, 1, 2, 3]);
        assert_eq!(ex.objective, 12.0);
        let gr = greedy_select(&g, 4, GreedyPolicy::ToSelected).unwrap();
        assert_eq!(gr.selected, vec![0, 1, 2, 3]);
    }

    #[test]
    fn objective_validation() {
        let g = three();
        assert_eq!(objective(&g, &[1]).unwrap(), 0.0);
        assert_eq!(objective(&g, &[0, 1]).unwrap(), 1.0);
        assert!(objective(&g, &[0, 0]).is_err());
        assert!(objective(&g, &[3]).is_err());
    }

    #[test]
    fn k_out_of_range() {
        assert!(greedy_select(&three(), 1, GreedyPolicy::ToSelected).is_err());
        assert!(greedy_select(&three(), 4, GreedyPolicy::ToSelected).is_err());
        assert!(exhaustive_select(&three(), 4).is_err());
    }

    #[test]
    fn capacity_guard() {
        let n = 60;
        let g = SimilarityGraph::new(n, vec![1.0; n * (n - 1) / 2], (0..n).map(|i| i.to_string()).collect()).unwrap();
        assert!(matches!(exhaustive_select(&g, 30), Err(Error::Capacity(_))));
        assert!(exhaustive_select(&g, 2).is_ok());
    }

    #[test]
    fn inversion_and_policy_parsing() {
        let g = three().inverted();
        assert_eq!(g.weights(), &[8.0, 4.0, 0.0]);
        assert_eq!("to-unselected".parse::<GreedyPolicy>().unwrap(), GreedyPolicy::ToUnselected);
        assert!("nearest".parse::<GreedyPolicy>().is_err());
        assert_eq!(GreedyPolicy::default().to_string(), "to-selected");
    }
}
