//! Word graphs, maximum spanning forests, and micro-cluster separation.
//!
//! Candidate words form a complete undirected graph weighted by hit-count
//! Jaccard similarity. A maximum spanning forest keeps the strongest
//! connections; cutting every node back to a bounded degree then splits the
//! forest into micro clusters of closely co-occurring words.
//!
//! All tie-breaks are lexicographic, so identical inputs always produce
//! byte-identical serialized forests.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::cooccur::{jaccard, HitCounter};
use crate::error::{Error, Result};
use crate::weighting::CandidateSet;

pub const DEFAULT_CUT_DEGREE: usize = 2;

/// Undirected weighted graph over words. No self-loops, at most one edge
/// per unordered pair, weights in [0, 1].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WordGraph {
    nodes: BTreeSet<String>,
    edges: BTreeMap<(String, String), f64>,
}

impl WordGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_edges(edges: &[(&str, &str, f64)]) -> Result<Self> {
        let mut g = WordGraph::new();
        for (a, b, w) in edges {
            g.add_edge(a, b, *w)?;
        }
        Ok(g)
    }

    pub fn add_node(&mut self, word: &str) {
        self.nodes.insert(word.to_string());
    }

    pub fn add_edge(&mut self, a: &str, b: &str, weight: f64) -> Result<()> {
        if a == b {
            return Err(Error::Config(format!("self-loop on {a:?}")));
        }
        if !weight.is_finite() || !(0.0..=1.0).contains(&weight) {
            return Err(Error::Config(format!(
                "edge weight {weight} for ({a:?}, {b:?}) outside [0, 1]"
            )));
        }
        let key = ordered(a, b);
        if self.edges.contains_key(&key) {
            return Err(Error::Config(format!("duplicate edge ({a:?}, {b:?})")));
        }
        self.nodes.insert(a.to_string());
        self.nodes.insert(b.to_string());
        self.edges.insert(key, weight);
        Ok(())
    }

    pub fn remove_edge(&mut self, a: &str, b: &str) -> Option<f64> {
        self.edges.remove(&ordered(a, b))
    }

    pub fn nodes(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(String::as_str)
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.edges.iter().map(|((a, b), w)| (a.as_str(), b.as_str(), *w))
    }

    pub fn edge_weight(&self, a: &str, b: &str) -> Option<f64> {
        self.edges.get(&ordered(a, b)).copied()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, word: &str) -> usize {
        self.edges
            .keys()
            .filter(|(a, b)| a == word || b == word)
            .count()
    }

    /// Edges at `word` as (neighbor, weight) pairs.
    pub fn incident(&self, word: &str) -> Vec<(String, f64)> {
        self.edges
            .iter()
            .filter_map(|((a, b), w)| {
                if a == word {
                    Some((b.clone(), *w))
                } else if b == word {
                    Some((a.clone(), *w))
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.values().sum()
    }

    /// Connected components as induced subgraphs, ordered by their
    /// lexicographically smallest node.
    pub fn components(&self) -> Vec<WordGraph> {
        let mut adjacency: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (a, b) in self.edges.keys() {
            adjacency.entry(a).or_default().push(b);
            adjacency.entry(b).or_default().push(a);
        }
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        let mut out = Vec::new();
        for start in &self.nodes {
            if seen.contains(start.as_str()) {
                continue;
            }
            let mut member: BTreeSet<&str> = BTreeSet::new();
            let mut queue = vec![start.as_str()];
            while let Some(node) = queue.pop() {
                if !member.insert(node) {
                    continue;
                }
                seen.insert(node);
                if let Some(next) = adjacency.get(node) {
                    queue.extend(next.iter().copied());
                }
            }
            let mut sub = WordGraph::new();
            for n in &member {
                sub.add_node(n);
            }
            for ((a, b), w) in &self.edges {
                if member.contains(a.as_str()) && member.contains(b.as_str()) {
                    sub.edges.insert((a.clone(), b.clone()), *w);
                }
            }
            out.push(sub);
        }
        out
    }

    fn is_tree(&self) -> bool {
        self.edge_count() + 1 == self.node_count() && self.components().len() == 1
    }
}

fn ordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

/// One hub reduction: the edges deleted at `hub` when its degree was cut
/// back to the configured bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutRecord {
    pub hub: String,
    pub removed: Vec<(String, String, f64)>,
}

/// A set of disjoint trees over words, plus the record of every cut that
/// produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordForest {
    pub trees: Vec<WordGraph>,
    pub provenance: Vec<CutRecord>,
}

impl WordForest {
    /// Word sets of the trees, each sorted, ordered by first member.
    pub fn clusters(&self) -> Vec<Vec<String>> {
        self.trees
            .iter()
            .map(|t| t.nodes().map(str::to_string).collect())
            .collect()
    }

    pub fn node_count(&self) -> usize {
        self.trees.iter().map(WordGraph::node_count).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.trees.iter().map(WordGraph::total_weight).sum()
    }

    /// Every tree is connected and acyclic, and no word appears twice.
    pub fn is_valid(&self) -> bool {
        let mut seen = BTreeSet::new();
        for tree in &self.trees {
            if !tree.is_tree() {
                return false;
            }
            for node in tree.nodes() {
                if !seen.insert(node.to_string()) {
                    return false;
                }
            }
        }
        true
    }

    fn merged(&self) -> WordGraph {
        let mut g = WordGraph::new();
        for tree in &self.trees {
            for n in tree.nodes() {
                g.add_node(n);
            }
            for ((a, b), w) in &tree.edges {
                g.edges.insert((a.clone(), b.clone()), *w);
            }
        }
        g
    }

    /// Serializable view: every surviving edge flagged `kept`, every cut
    /// edge flagged otherwise, plus per-hub cut records.
    pub fn dump(&self) -> ForestDump {
        let mut edges: Vec<EdgeDump> = self
            .merged()
            .edges()
            .map(|(a, b, w)| EdgeDump {
                a: a.to_string(),
                b: b.to_string(),
                weight: w,
                kept: true,
            })
            .collect();
        for cut in &self.provenance {
            for (a, b, w) in &cut.removed {
                edges.push(EdgeDump {
                    a: a.clone(),
                    b: b.clone(),
                    weight: *w,
                    kept: false,
                });
            }
        }
        ForestDump {
            nodes: self.merged().nodes().map(str::to_string).collect(),
            edges,
            cuts: self.provenance.clone(),
        }
    }

    /// DOT rendering; cut edges are dashed. Rendering itself is left to
    /// external tooling.
    pub fn to_dot(&self) -> String {
        let dump = self.dump();
        let mut out = String::from("graph word_forest {\n");
        for node in &dump.nodes {
            out.push_str(&format!("  {:?};\n", node));
        }
        for e in &dump.edges {
            let style = if e.kept { "" } else { ", style=dashed" };
            out.push_str(&format!(
                "  {:?} -- {:?} [label=\"{:.6}\"{}];\n",
                e.a, e.b, e.weight, style
            ));
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeDump {
    pub a: String,
    pub b: String,
    pub weight: f64,
    pub kept: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestDump {
    pub nodes: Vec<String>,
    pub edges: Vec<EdgeDump>,
    pub cuts: Vec<CutRecord>,
}

/// Complete graph over the candidate words, weighted by hit-count Jaccard.
/// Zero-weight edges are kept; they may be needed to span a component.
pub fn build_word_graph(candidates: &CandidateSet, counter: &HitCounter) -> Result<WordGraph> {
    let words = candidates.words();
    let mut g = WordGraph::new();
    for w in &words {
        g.add_node(w);
    }
    for (i, a) in words.iter().enumerate() {
        for b in &words[i + 1..] {
            if a == b {
                continue;
            }
            let ha = counter.hit_count(a)?;
            let hb = counter.hit_count(b)?;
            let hab = counter.co_hit_count(a, b)?;
            let weight = jaccard(ha, hb, hab);
            if g.edge_weight(a, b).is_none() {
                g.add_edge(a, b, weight)?;
            }
        }
    }
    Ok(g)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Maximum-weight spanning tree of every connected component, computed
/// greedily over edges sorted by descending weight with lexicographic
/// endpoint tie-breaks.
pub fn max_spanning_forest(g: &WordGraph) -> WordForest {
    let index: BTreeMap<&str, usize> = g.nodes().enumerate().map(|(i, n)| (n, i)).collect();
    let mut edges: Vec<(&str, &str, f64)> = g.edges().collect();
    edges.sort_by(|x, y| {
        y.2.total_cmp(&x.2)
            .then_with(|| x.0.cmp(y.0))
            .then_with(|| x.1.cmp(y.1))
    });
    let mut uf = UnionFind::new(index.len());
    let mut selected = WordGraph::new();
    for n in g.nodes() {
        selected.add_node(n);
    }
    for (a, b, w) in edges {
        if uf.union(index[a], index[b]) {
            selected.edges.insert(ordered(a, b), w);
        }
    }
    WordForest {
        trees: selected.components(),
        provenance: Vec::new(),
    }
}

/// Cuts every hub whose degree exceeds `cut_degree` down to its
/// `cut_degree` heaviest incident edges, recording removals, until no such
/// hub remains. Hubs are processed by descending degree, then word order;
/// retained edges tie-break toward the lexicographically smaller neighbor.
/// Nodes are never deleted, so separated words survive as singleton trees.
pub fn separate_trees(forest: WordForest, cut_degree: usize) -> Result<WordForest> {
    if cut_degree < 1 {
        return Err(Error::Config("cut degree must be at least 1".into()));
    }
    let mut graph = forest.merged();
    let mut provenance = forest.provenance;
    loop {
        let hub = graph
            .nodes()
            .map(|n| (n.to_string(), graph.degree(n)))
            .filter(|(_, d)| *d > cut_degree)
            .max_by(|(na, da), (nb, db)| da.cmp(db).then_with(|| nb.cmp(na)))
            .map(|(n, _)| n);
        let Some(hub) = hub else { break };
        let mut incident = graph.incident(&hub);
        incident.sort_by(|(na, wa), (nb, wb)| wb.total_cmp(wa).then_with(|| na.cmp(nb)));
        let mut removed = Vec::new();
        for (neighbor, weight) in incident.into_iter().skip(cut_degree) {
            graph.remove_edge(&hub, &neighbor);
            let (a, b) = ordered(&hub, &neighbor);
            removed.push((a, b, weight));
        }
        provenance.push(CutRecord { hub, removed });
    }
    Ok(WordForest {
        trees: graph.components(),
        provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cooccur::{
        canonical_doubleton_query, canonical_singleton_query, HitCounter, OfflineHitSource,
    };
    use crate::corpus::ActorRef;

    fn counter_for(singles: &[(&str, u64)], doubles: &[(&str, &str, u64)]) -> HitCounter {
        let mut map = BTreeMap::new();
        for (t, c) in singles {
            map.insert(canonical_singleton_query(t), *c);
        }
        for (a, b, c) in doubles {
            map.insert(canonical_doubleton_query(a, b), *c);
        }
        HitCounter::new(Box::new(OfflineHitSource::from_map(map)))
    }

    fn candidate_set(words: &[&str]) -> CandidateSet {
        let scores: Vec<(String, f64)> = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.to_string(), 1.0 - i as f64 * 0.01))
            .collect();
        CandidateSet::from_scores(ActorRef::new("x").unwrap(), &scores, 0.3, 30).unwrap()
    }

    #[test]
    fn word_graph_is_complete_over_candidates() {
        let counter = counter_for(
            &[("a", 100), ("b", 200), ("c", 300)],
            &[("a", "b", 50), ("a", "c", 0), ("b", "c", 200)],
        );
        let g = build_word_graph(&candidate_set(&["a", "b", "c"]), &counter).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.edge_weight("a", "c"), Some(0.0));
        assert!((g.edge_weight("a", "b").unwrap() - 0.2).abs() < 1e-15);
        assert!((g.edge_weight("b", "c").unwrap() - 200.0 / 300.0).abs() < 1e-15);
    }

    #[test]
    fn five_word_graph_matches_hand_computed_weights() {
        let counter = counter_for(
            &[("a", 100), ("b", 200), ("c", 300), ("d", 400), ("e", 500)],
            &[
                ("a", "b", 50),
                ("a", "c", 0),
                ("a", "d", 100),
                ("a", "e", 20),
                ("b", "c", 200),
                ("b", "d", 40),
                ("b", "e", 0),
                ("c", "d", 150),
                ("c", "e", 250),
                ("d", "e", 400),
            ],
        );
        let g = build_word_graph(&candidate_set(&["a", "b", "c", "d", "e"]), &counter).unwrap();
        assert_eq!(g.edge_count(), 10);
        let expected = [
            ("a", "b", 50.0 / 250.0),
            ("a", "c", 0.0),
            ("a", "d", 100.0 / 400.0),
            ("a", "e", 20.0 / 580.0),
            ("b", "c", 200.0 / 300.0),
            ("b", "d", 40.0 / 560.0),
            ("b", "e", 0.0),
            ("c", "d", 150.0 / 550.0),
            ("c", "e", 250.0 / 550.0),
            ("d", "e", 400.0 / 500.0),
        ];
        for (a, b, w) in expected {
            assert!(
                (g.edge_weight(a, b).unwrap() - w).abs() < 1e-15,
                "({a}, {b})"
            );
        }
    }

    #[test]
    fn spanning_forest_of_two_nodes_is_the_single_edge() {
        let g = WordGraph::from_edges(&[("a", "b", 0.4)]).unwrap();
        let f = max_spanning_forest(&g);
        assert_eq!(f.trees.len(), 1);
        assert_eq!(f.trees[0].edge_weight("a", "b"), Some(0.4));
    }

    #[test]
    fn spanning_forest_drops_the_lightest_triangle_edge() {
        let g = WordGraph::from_edges(&[("a", "b", 0.9), ("b", "c", 0.5), ("a", "c", 0.2)])
            .unwrap();
        let f = max_spanning_forest(&g);
        let tree = &f.trees[0];
        assert_eq!(tree.edge_count(), 2);
        assert_eq!(tree.edge_weight("a", "b"), Some(0.9));
        assert_eq!(tree.edge_weight("b", "c"), Some(0.5));
        assert_eq!(tree.edge_weight("a", "c"), None);
    }

    #[test]
    fn spanning_forest_spans_each_component_separately() {
        let g = WordGraph::from_edges(&[
            ("a", "b", 0.9),
            ("b", "c", 0.5),
            ("a", "c", 0.2),
            ("x", "y", 0.1),
        ])
        .unwrap();
        let f = max_spanning_forest(&g);
        assert_eq!(f.trees.len(), 2);
        assert!(f.is_valid());
        assert_eq!(f.node_count(), 5);
    }

    #[test]
    fn zero_weight_edges_can_be_forced_into_the_tree() {
        let g = WordGraph::from_edges(&[("a", "b", 0.9), ("b", "c", 0.0)]).unwrap();
        let f = max_spanning_forest(&g);
        assert_eq!(f.trees.len(), 1);
        assert_eq!(f.trees[0].edge_weight("b", "c"), Some(0.0));
    }

    #[test]
    fn compliant_forests_are_a_fixed_point_of_separation() {
        let g = WordGraph::from_edges(&[("a", "b", 0.9), ("b", "c", 0.5)]).unwrap();
        let before = max_spanning_forest(&g);
        let after = separate_trees(before.clone(), 2).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn star_hub_keeps_its_two_heaviest_edges() {
        let g = WordGraph::from_edges(&[
            ("hub", "l1", 0.9),
            ("hub", "l2", 0.8),
            ("hub", "l3", 0.7),
            ("hub", "l4", 0.6),
            ("hub", "l5", 0.5),
        ])
        .unwrap();
        let forest = separate_trees(max_spanning_forest(&g), 2).unwrap();
        assert_eq!(
            forest.clusters(),
            vec![
                vec!["hub".to_string(), "l1".to_string(), "l2".to_string()],
                vec!["l3".to_string()],
                vec!["l4".to_string()],
                vec!["l5".to_string()],
            ]
        );
        assert_eq!(forest.provenance.len(), 1);
        assert_eq!(forest.provenance[0].hub, "hub");
        assert_eq!(forest.provenance[0].removed.len(), 3);
    }

    #[test]
    fn retention_ties_prefer_the_smaller_neighbor() {
        let g = WordGraph::from_edges(&[
            ("hub", "l1", 0.9),
            ("hub", "l2", 0.9),
            ("hub", "l3", 0.9),
        ])
        .unwrap();
        let forest = separate_trees(max_spanning_forest(&g), 2).unwrap();
        assert_eq!(forest.provenance[0].removed, vec![(
            "hub".to_string(),
            "l3".to_string(),
            0.9
        )]);
    }

    #[test]
    fn separation_preserves_the_node_partition() {
        let g = WordGraph::from_edges(&[
            ("a", "b", 0.9),
            ("a", "c", 0.8),
            ("a", "d", 0.7),
            ("d", "e", 0.6),
        ])
        .unwrap();
        let forest = separate_trees(max_spanning_forest(&g), 2).unwrap();
        let mut all: Vec<String> = forest.clusters().into_iter().flatten().collect();
        all.sort();
        assert_eq!(all, vec!["a", "b", "c", "d", "e"]);
        assert!(forest.is_valid());
    }

    #[test]
    fn cut_weight_is_reconciled_in_provenance() {
        let g = WordGraph::from_edges(&[
            ("a", "b", 0.9),
            ("a", "c", 0.8),
            ("a", "d", 0.7),
            ("a", "e", 0.6),
        ])
        .unwrap();
        let before = max_spanning_forest(&g);
        let total_before = before.total_weight();
        let after = separate_trees(before, 2).unwrap();
        let removed: f64 = after
            .provenance
            .iter()
            .flat_map(|c| c.removed.iter().map(|(_, _, w)| *w))
            .sum();
        assert!((total_before - after.total_weight() - removed).abs() < 1e-12);
    }

    // Thirty-word tree shaped like the worked example for the academic
    // actor: eight word groups chained by weak bridges. Separation at
    // degree 2 must cut exactly the bridges.
    #[test]
    fn thirty_word_tree_splits_into_the_expected_eight_clusters() {
        let g = WordGraph::from_edges(&[
            // group 1 path
            ("network", "international", 0.30),
            ("international", "computer", 0.28),
            ("computer", "system", 0.26),
            ("system", "software", 0.24),
            ("software", "use", 0.22),
            // group 2 path
            ("malaysia", "accuracy", 0.20),
            // group 3 path
            ("datuk", "nazri", 0.19),
            ("nazri", "kebangsaan", 0.18),
            // group 4 path
            ("minister", "journal", 0.29),
            ("journal", "ictac", 0.27),
            ("ictac", "dblp", 0.25),
            ("dblp", "communications", 0.23),
            ("communications", "utilization", 0.21),
            // group 5 path
            ("department", "learning", 0.17),
            ("learning", "said", 0.16),
            ("said", "performance", 0.15),
            // group 6 path
            ("dr", "university", 0.14),
            ("university", "based", 0.13),
            // group 7 path
            ("prime", "foxley", 0.12),
            ("foxley", "eric", 0.115),
            ("eric", "author", 0.11),
            // group 8 path
            ("allah", "ismail", 0.105),
            // weak bridges, each attached to at least one path-interior node
            ("international", "journal", 0.010),
            ("computer", "nazri", 0.009),
            ("system", "learning", 0.008),
            ("software", "university", 0.007),
            ("journal", "malaysia", 0.006),
            ("foxley", "allah", 0.005),
            ("learning", "prime", 0.004),
        ])
        .unwrap();
        let forest = separate_trees(max_spanning_forest(&g), 2).unwrap();
        let clusters = forest.clusters();
        let sizes: Vec<usize> = clusters.iter().map(Vec::len).collect();
        let mut sorted_sizes = sizes.clone();
        sorted_sizes.sort_unstable();
        assert_eq!(sorted_sizes, vec![2, 2, 3, 3, 4, 4, 6, 6]);

        let want = |ws: &[&str]| {
            let mut v: Vec<String> = ws.iter().map(|s| s.to_string()).collect();
            v.sort();
            v
        };
        assert!(clusters.contains(&want(&[
            "network",
            "international",
            "computer",
            "system",
            "software",
            "use"
        ])));
        assert!(clusters.contains(&want(&["malaysia", "accuracy"])));
        assert!(clusters.contains(&want(&["datuk", "nazri", "kebangsaan"])));
        assert!(clusters.contains(&want(&[
            "minister",
            "journal",
            "ictac",
            "dblp",
            "communications",
            "utilization"
        ])));
        assert!(clusters.contains(&want(&[
            "department",
            "learning",
            "said",
            "performance"
        ])));
        assert!(clusters.contains(&want(&["dr", "university", "based"])));
        assert!(clusters.contains(&want(&["prime", "foxley", "eric", "author"])));
        assert!(clusters.contains(&want(&["allah", "ismail"])));

        // Exactly the seven bridges were cut.
        let removed: usize = forest.provenance.iter().map(|c| c.removed.len()).sum();
        assert_eq!(removed, 7);
        assert!(forest.is_valid());
    }

    #[test]
    fn dump_flags_cut_edges_and_dot_renders_them_dashed() {
        let g = WordGraph::from_edges(&[
            ("a", "b", 0.9),
            ("a", "c", 0.8),
            ("a", "d", 0.7),
        ])
        .unwrap();
        let forest = separate_trees(max_spanning_forest(&g), 2).unwrap();
        let dump = forest.dump();
        assert_eq!(dump.nodes.len(), 4);
        assert_eq!(dump.edges.iter().filter(|e| e.kept).count(), 2);
        assert_eq!(dump.edges.iter().filter(|e| !e.kept).count(), 1);
        let dot = forest.to_dot();
        assert!(dot.contains("style=dashed"));
    }

    #[test]
    fn invalid_cut_degree_is_rejected() {
        let g = WordGraph::from_edges(&[("a", "b", 0.9)]).unwrap();
        let forest = max_spanning_forest(&g);
        assert!(matches!(separate_trees(forest, 0), Err(Error::Config(_))));
    }
}
