//! Exhaustive automorphism search for small vertex- and edge-colored graphs.
//!
//! Candidates are pruned by a stable color refinement (vertices only map to
//! vertices of the same refined color) and by adjacency consistency with the
//! partial assignment.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::model::FrameworkGraph;

/// Default bound on the number of vertices searched.
pub const DEFAULT_VERTEX_BOUND: usize = 64;

/// A bijection of `0..n`, stored as the image of each index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// Returns `None` unless `images` is a bijection of `0..images.len()`.
    pub fn from_images(images: Vec<usize>) -> Option<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || std::mem::replace(&mut seen[i], true) {
                return None;
            }
        }
        Some(Self(images))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Permutation(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn fixed_points(&self) -> usize {
        self.0.iter().enumerate().filter(|(i, j)| i == *j).count()
    }

    pub fn order(&self) -> usize {
        let mut p = self.clone();
        let mut k = 1;
        while !p.is_identity() {
            p = self.compose(&p);
            k += 1;
        }
        k
    }
}

/// Graph with colored vertices and colored undirected edges.
#[derive(Clone, Debug)]
pub struct ColoredGraph {
    vertex_colors: Vec<u32>,
    adjacency: Vec<Vec<Option<u32>>>,
}

impl ColoredGraph {
    pub fn new(vertex_colors: Vec<u32>) -> Self {
        let n = vertex_colors.len();
        Self {
            vertex_colors,
            adjacency: vec![vec![None; n]; n],
        }
    }

    pub fn add_edge(&mut self, a: usize, b: usize, color: u32) {
        self.adjacency[a][b] = Some(color);
        self.adjacency[b][a] = Some(color);
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_colors.len()
    }

    pub fn edge_color(&self, a: usize, b: usize) -> Option<u32> {
        self.adjacency[a][b]
    }

    /// Stable refinement of the vertex coloring.
    fn refined_colors(&self) -> Vec<usize> {
        let n = self.vertex_count();
        let mut colors: Vec<usize> =
            canonical_relabel(self.vertex_colors.iter().map(|&c| vec![c as usize]));
        loop {
            let signatures = (0..n).map(|v| {
                let mut nbrs: Vec<(u32, usize)> = (0..n)
                    .filter_map(|w| self.adjacency[v][w].map(|c| (c, colors[w])))
                    .collect();
                nbrs.sort_unstable();
                let mut sig = vec![colors[v]];
                for (c, w) in nbrs {
                    sig.push(c as usize);
                    sig.push(w);
                }
                sig
            });
            let next = canonical_relabel(signatures);
            let classes = |c: &[usize]| c.iter().max().map_or(0, |m| m + 1);
            if classes(&next) == classes(&colors) {
                return next;
            }
            colors = next;
        }
    }
}

/// Relabels signatures by their rank in sorted order, which keeps the
/// labeling invariant under automorphisms.
fn canonical_relabel<I: Iterator<Item = Vec<usize>>>(signatures: I) -> Vec<usize> {
    let signatures: Vec<Vec<usize>> = signatures.collect();
    let mut distinct: Vec<&Vec<usize>> = signatures.iter().collect();
    distinct.sort();
    distinct.dedup();
    let rank: HashMap<&Vec<usize>, usize> = distinct
        .into_iter()
        .enumerate()
        .map(|(i, s)| (s, i))
        .collect();
    signatures.iter().map(|s| rank[s]).collect()
}

/// All automorphisms of `graph`, sorted lexicographically by image list
/// (the identity comes first).
pub fn colored_automorphisms(graph: &ColoredGraph, bound: usize) -> Result<Vec<Permutation>> {
    colored_automorphisms_pruned(graph, bound, &|_, _, _, _| true)
}

/// Automorphisms `sigma` that also satisfy `pair_ok(u, v, sigma(u), sigma(v))`
/// for every pair of vertices, including `u == v`.
///
/// The predicate is checked while the search extends partial maps, so a
/// restrictive one keeps the search small.
pub fn colored_automorphisms_pruned(
    graph: &ColoredGraph,
    bound: usize,
    pair_ok: &dyn Fn(usize, usize, usize, usize) -> bool,
) -> Result<Vec<Permutation>> {
    let n = graph.vertex_count();
    if n > bound {
        return Err(Error::BoundExceeded { found: n, bound });
    }
    if n == 0 {
        return Ok(vec![Permutation::identity(0)]);
    }
    let colors = graph.refined_colors();
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (v, &c) in colors.iter().enumerate() {
        classes.entry(c).or_default().push(v);
    }
    let order = search_order(graph, &colors, &classes);
    let mut search = Search {
        graph,
        colors: &colors,
        classes: &classes,
        order: &order,
        image: vec![usize::MAX; n],
        used: vec![false; n],
        found: Vec::new(),
        pair_ok,
    };
    search.extend(0);
    let mut found = search.found;
    found.sort();
    Ok(found)
}

/// Visit vertices from small color classes outwards, preferring neighbors
/// of already placed vertices.
fn search_order(
    graph: &ColoredGraph,
    colors: &[usize],
    classes: &BTreeMap<usize, Vec<usize>>,
) -> Vec<usize> {
    let n = graph.vertex_count();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let next = (0..n)
            .filter(|&v| !placed[v])
            .max_by_key(|&v| {
                let links = order
                    .iter()
                    .filter(|&&u: &&usize| graph.adjacency[u][v].is_some())
                    .count();
                let class_size = classes[&colors[v]].len();
                (links, std::cmp::Reverse(class_size), std::cmp::Reverse(v))
            })
            .expect("unplaced vertex exists");
        placed[next] = true;
        order.push(next);
    }
    order
}

struct Search<'a> {
    graph: &'a ColoredGraph,
    colors: &'a [usize],
    classes: &'a BTreeMap<usize, Vec<usize>>,
    order: &'a [usize],
    image: Vec<usize>,
    used: Vec<bool>,
    found: Vec<Permutation>,
    pair_ok: &'a dyn Fn(usize, usize, usize, usize) -> bool,
}

impl Search<'_> {
    fn extend(&mut self, depth: usize) {
        if depth == self.order.len() {
            self.found.push(Permutation(self.image.clone()));
            return;
        }
        let v = self.order[depth];
        for &w in &self.classes[&self.colors[v]] {
            if self.used[w] || !self.consistent(depth, v, w) {
                continue;
            }
            self.image[v] = w;
            self.used[w] = true;
            self.extend(depth + 1);
            self.used[w] = false;
            self.image[v] = usize::MAX;
        }
    }

    fn consistent(&self, depth: usize, v: usize, w: usize) -> bool {
        (self.pair_ok)(v, v, w, w)
            && self.order[..depth].iter().all(|&u| {
                self.graph.adjacency[u][v] == self.graph.adjacency[self.image[u]][w]
                    && (self.pair_ok)(u, v, self.image[u], w)
            })
    }
}

/// Automorphisms of a framework graph; pinned vertices only map to pinned
/// vertices.
pub fn graph_automorphisms(graph: &FrameworkGraph) -> Result<Vec<Permutation>> {
    graph_automorphisms_bounded(graph, DEFAULT_VERTEX_BOUND)
}

pub fn graph_automorphisms_bounded(
    graph: &FrameworkGraph,
    bound: usize,
) -> Result<Vec<Permutation>> {
    graph_automorphisms_pruned(graph, bound, &|_, _, _, _| true)
}

/// [`graph_automorphisms_bounded`] restricted by a pair predicate, as in
/// [`colored_automorphisms_pruned`].
pub fn graph_automorphisms_pruned(
    graph: &FrameworkGraph,
    bound: usize,
    pair_ok: &dyn Fn(usize, usize, usize, usize) -> bool,
) -> Result<Vec<Permutation>> {
    let n = graph.vertex_count();
    if n > bound {
        return Err(Error::BoundExceeded { found: n, bound });
    }
    let colors = (0..n)
        .map(|i| u32::from(graph.is_pinned_index(i)))
        .collect();
    let mut colored = ColoredGraph::new(colors);
    for (a, b) in graph.edge_indices() {
        colored.add_edge(a, b, 0);
    }
    colored_automorphisms_pruned(&colored, bound, pair_ok)
}

/// The permutation induced on `edges` (unordered index pairs) by a vertex
/// permutation, or `None` if some edge image is not an edge.
pub fn edge_permutation(edges: &[(usize, usize)], sigma: &Permutation) -> Option<Permutation> {
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let lookup: HashMap<(usize, usize), usize> = edges
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| (key(a, b), k))
        .collect();
    let images = edges
        .iter()
        .map(|&(a, b)| lookup.get(&key(sigma.apply(a), sigma.apply(b))).copied())
        .collect::<Option<Vec<_>>>()?;
    Permutation::from_images(images)
}
