//! Graph and framework data model.
//!
//! Vertex ids are arbitrary integers. Every matrix built from a framework
//! orders its columns by sorted vertex id (coordinate-minor) and its rows by
//! input edge order.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type VertexId = i64;

/// Relative scale for the coincidence test used by [`Framework::is_proper`].
pub const COINCIDENCE_TOLERANCE: f64 = 1e-9;

/// A broken data-model invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    BadDimension(usize),
    EmptyGraph,
    DuplicateVertex(VertexId),
    CoordinateLength {
        vertex: VertexId,
        expected: usize,
        found: usize,
    },
    NonFiniteCoordinate(VertexId),
    SelfLoop(VertexId),
    UnknownEndpoint {
        edge: (VertexId, VertexId),
        vertex: VertexId,
    },
    DuplicateEdge(VertexId, VertexId),
    UnknownPinned(VertexId),
    Disconnected {
        components: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BadDimension(d) => write!(f, "dimension: {d} is not a positive dimension"),
            Violation::EmptyGraph => write!(f, "nonempty: graph has no vertices"),
            Violation::DuplicateVertex(v) => write!(f, "distinct vertex ids: {v} declared twice"),
            Violation::CoordinateLength {
                vertex,
                expected,
                found,
            } => write!(
                f,
                "coordinate length: vertex {vertex} has {found} coordinates, expected {expected}"
            ),
            Violation::NonFiniteCoordinate(v) => {
                write!(
                    f,
                    "finite coordinates: vertex {v} has a non-finite coordinate"
                )
            }
            Violation::SelfLoop(v) => write!(f, "no self-loops: edge ({v}, {v})"),
            Violation::UnknownEndpoint { edge, vertex } => write!(
                f,
                "declared endpoints: edge ({}, {}) uses undeclared vertex {vertex}",
                edge.0, edge.1
            ),
            Violation::DuplicateEdge(a, b) => write!(f, "no duplicate edges: ({a}, {b}) repeated"),
            Violation::UnknownPinned(v) => write!(f, "pinned subset: {v} is not a vertex"),
            Violation::Disconnected { components } => {
                write!(f, "connected: graph has {components} components")
            }
        }
    }
}

/// Vertices, undirected edges and an optional pinned set.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameworkGraph {
    vertex_ids: Vec<VertexId>,
    edges: Vec<(VertexId, VertexId)>,
    pinned: BTreeSet<VertexId>,
}

impl FrameworkGraph {
    pub fn new(
        vertex_ids: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Self {
        let mut vertex_ids: Vec<VertexId> = vertex_ids.into_iter().collect();
        vertex_ids.sort();
        Self {
            vertex_ids,
            edges: edges.into_iter().collect(),
            pinned: BTreeSet::new(),
        }
    }

    pub fn with_pinned(mut self, pinned: impl IntoIterator<Item = VertexId>) -> Self {
        self.pinned = pinned.into_iter().collect();
        self
    }

    /// Sorted vertex ids.
    pub fn vertex_ids(&self) -> &[VertexId] {
        &self.vertex_ids
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn pinned(&self) -> &BTreeSet<VertexId> {
        &self.pinned
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Column-block index of a vertex id.
    pub fn index_of(&self, id: VertexId) -> Option<usize> {
        self.vertex_ids.binary_search(&id).ok()
    }

    pub fn is_pinned_index(&self, index: usize) -> bool {
        self.pinned.contains(&self.vertex_ids[index])
    }

    /// Edges as index pairs. Only meaningful on a structurally valid graph.
    pub fn edge_indices(&self) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .map(|&(a, b)| {
                (
                    self.index_of(a).expect("edge endpoint is a vertex"),
                    self.index_of(b).expect("edge endpoint is a vertex"),
                )
            })
            .collect()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertex_count()];
        for (a, b) in self.edge_indices() {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    /// Invariants other than connectivity.
    pub fn structural_violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.vertex_ids.is_empty() {
            out.push(Violation::EmptyGraph);
        }
        for w in self.vertex_ids.windows(2) {
            if w[0] == w[1] {
                out.push(Violation::DuplicateVertex(w[0]));
            }
        }
        let mut seen = HashSet::new();
        for &(a, b) in &self.edges {
            if a == b {
                out.push(Violation::SelfLoop(a));
                continue;
            }
            let mut known = true;
            for v in [a, b] {
                if self.index_of(v).is_none() {
                    out.push(Violation::UnknownEndpoint {
                        edge: (a, b),
                        vertex: v,
                    });
                    known = false;
                }
            }
            if known && !seen.insert((a.min(b), a.max(b))) {
                out.push(Violation::DuplicateEdge(a, b));
            }
        }
        for &p in &self.pinned {
            if self.index_of(p).is_none() {
                out.push(Violation::UnknownPinned(p));
            }
        }
        out
    }

    /// Number of connected components (structurally valid graphs only).
    pub fn component_count(&self) -> usize {
        let n = self.vertex_count();
        let adj = self.adjacency_lists();
        let mut seen = vec![false; n];
        let mut components = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        components
    }

    pub fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertex_count()];
        for (a, b) in self.edge_indices() {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = self.structural_violations();
        if out.is_empty() {
            let components = self.component_count();
            if components > 1 {
                out.push(Violation::Disconnected { components });
            }
        }
        out
    }
}

/// A graph placed in R^d.
#[derive(Clone, Debug, PartialEq)]
pub struct Framework {
    graph: FrameworkGraph,
    dimension: usize,
    coords: Vec<Vec<f64>>,
}

impl Framework {
    /// Builds a framework without validating it; see [`Framework::validate`].
    pub fn new(
        dimension: usize,
        vertices: impl IntoIterator<Item = (VertexId, Vec<f64>)>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Self {
        let mut vertices: Vec<(VertexId, Vec<f64>)> = vertices.into_iter().collect();
        vertices.sort_by_key(|(id, _)| *id);
        let graph = FrameworkGraph::new(vertices.iter().map(|(id, _)| *id), edges);
        let coords = vertices.into_iter().map(|(_, c)| c).collect();
        Self {
            graph,
            dimension,
            coords,
        }
    }

    /// Builds and validates.
    pub fn checked(
        dimension: usize,
        vertices: impl IntoIterator<Item = (VertexId, Vec<f64>)>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self> {
        let fw = Self::new(dimension, vertices, edges);
        fw.ensure_valid()?;
        Ok(fw)
    }

    pub fn with_pinned(mut self, pinned: impl IntoIterator<Item = VertexId>) -> Self {
        self.graph = self.graph.with_pinned(pinned);
        self
    }

    pub fn graph(&self) -> &FrameworkGraph {
        &self.graph
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    /// Coordinates of the vertex at sorted position `index`.
    pub fn point(&self, index: usize) -> &[f64] {
        &self.coords[index]
    }

    pub fn point_of(&self, id: VertexId) -> Option<&[f64]> {
        self.graph.index_of(id).map(|i| self.coords[i].as_slice())
    }

    pub fn points(&self) -> impl Iterator<Item = (VertexId, &[f64])> {
        self.graph
            .vertex_ids()
            .iter()
            .copied()
            .zip(self.coords.iter().map(Vec::as_slice))
    }

    /// Points as the columns of a d × v matrix.
    pub fn point_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dimension, self.vertex_count(), |r, c| {
            self.coords[c][r]
        })
    }

    /// Stacked coordinate vector (vertex-major, coordinate-minor).
    pub fn coordinate_vector(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.dimension * self.vertex_count(),
            self.coords.iter().flat_map(|c| c.iter().copied()),
        )
    }

    /// Same graph with the stacked coordinate vector replaced.
    pub fn with_coordinates(&self, x: &DVector<f64>) -> Framework {
        let d = self.dimension;
        let coords = (0..self.vertex_count())
            .map(|i| x.rows(i * d, d).iter().copied().collect())
            .collect();
        Framework {
            graph: self.graph.clone(),
            dimension: d,
            coords,
        }
    }

    /// Applies `p -> s p + t` to every point.
    pub fn transformed(&self, s: &DMatrix<f64>, t: &DVector<f64>) -> Framework {
        let coords = self
            .coords
            .iter()
            .map(|c| {
                let p = s * DVector::from_column_slice(c) + t;
                p.iter().copied().collect()
            })
            .collect();
        Framework {
            graph: self.graph.clone(),
            dimension: self.dimension,
            coords,
        }
    }

    /// Largest pairwise distance between framework points.
    pub fn diameter(&self) -> f64 {
        let mut best: f64 = 0.0;
        for i in 0..self.coords.len() {
            for j in i + 1..self.coords.len() {
                best = best.max(distance(&self.coords[i], &self.coords[j]));
            }
        }
        best
    }

    /// First pair of coincident points, if any.
    pub fn coincident_pair(&self) -> Option<(VertexId, VertexId)> {
        let tol = COINCIDENCE_TOLERANCE * (1.0 + self.diameter());
        let ids = self.graph.vertex_ids();
        for i in 0..self.coords.len() {
            for j in i + 1..self.coords.len() {
                if distance(&self.coords[i], &self.coords[j]) < tol {
                    return Some((ids[i], ids[j]));
                }
            }
        }
        None
    }

    /// True iff all framework points are pairwise distinct.
    pub fn is_proper(&self) -> bool {
        self.coincident_pair().is_none()
    }

    pub fn ensure_proper(&self) -> Result<()> {
        match self.coincident_pair() {
            Some((a, b)) => Err(Error::NotProper(a, b)),
            None => Ok(()),
        }
    }

    /// Every invariant except connectivity. Subframeworks only need these.
    pub fn structural_violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.dimension == 0 {
            out.push(Violation::BadDimension(0));
        }
        for (id, c) in self.points() {
            if c.len() != self.dimension {
                out.push(Violation::CoordinateLength {
                    vertex: id,
                    expected: self.dimension,
                    found: c.len(),
                });
            } else if c.iter().any(|x| !x.is_finite()) {
                out.push(Violation::NonFiniteCoordinate(id));
            }
        }
        out.extend(self.graph.structural_violations());
        out
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = self.structural_violations();
        if out.is_empty() {
            let components = self.graph.component_count();
            if components > 1 {
                out.push(Violation::Disconnected { components });
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(v))
        }
    }

    pub(crate) fn ensure_structural(&self) -> Result<()> {
        let v = self.structural_violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(v))
        }
    }
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// All invariant violations of `framework`; empty iff it is well formed.
pub fn validate(framework: &Framework) -> Vec<Violation> {
    framework.validate()
}

/// Induced subframework on `vertex_subset`, inheriting coordinates and pins.
///
/// The result need not be connected.
pub fn subframework(framework: &Framework, vertex_subset: &[VertexId]) -> Result<Framework> {
    framework.ensure_structural()?;
    if vertex_subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let keep: BTreeSet<VertexId> = vertex_subset.iter().copied().collect();
    for &v in &keep {
        if framework.graph.index_of(v).is_none() {
            return Err(Error::UnknownVertex(v));
        }
    }
    let edges: Vec<(VertexId, VertexId)> = framework
        .graph
        .edges()
        .iter()
        .copied()
        .filter(|(a, b)| keep.contains(a) && keep.contains(b))
        .collect();
    if edges.is_empty() {
        return Err(Error::EdgelessSubgraph(keep.into_iter().collect()));
    }
    let vertices: Vec<(VertexId, Vec<f64>)> = framework
        .points()
        .filter(|(id, _)| keep.contains(id))
        .map(|(id, c)| (id, c.to_vec()))
        .collect();
    let pinned: Vec<VertexId> = framework
        .graph
        .pinned()
        .iter()
        .copied()
        .filter(|p| keep.contains(p))
        .collect();
    Ok(Framework::new(framework.dimension, vertices, edges).with_pinned(pinned))
}

/// A partition of the vertex set into nonempty disjoint blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexPartition {
    blocks: Vec<Vec<VertexId>>,
}

impl VertexPartition {
    pub fn new(blocks: Vec<Vec<VertexId>>) -> Self {
        let blocks = blocks
            .into_iter()
            .map(|mut b| {
                b.sort();
                b
            })
            .collect();
        Self { blocks }
    }

    /// One block per vertex.
    pub fn singletons(graph: &FrameworkGraph) -> Self {
        Self::new(graph.vertex_ids().iter().map(|&v| vec![v]).collect())
    }

    pub fn blocks(&self) -> &[Vec<VertexId>] {
        &self.blocks
    }

    /// Checks the partition against the vertex set of `graph`.
    pub fn validate_for(&self, graph: &FrameworkGraph) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (k, block) in self.blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPartition(format!("block {k} is empty")));
            }
            for &v in block {
                if graph.index_of(v).is_none() {
                    return Err(Error::InvalidPartition(format!(
                        "vertex {v} is not in the graph"
                    )));
                }
                if !seen.insert(v) {
                    return Err(Error::InvalidPartition(format!("vertex {v} appears twice")));
                }
            }
        }
        if seen.len() != graph.vertex_count() {
            let missing: Vec<VertexId> = graph
                .vertex_ids()
                .iter()
                .copied()
                .filter(|v| !seen.contains(v))
                .collect();
            return Err(Error::InvalidPartition(format!(
                "vertices {missing:?} are not covered"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Framework {
        Framework::new(
            2,
            vec![
                (1, vec![0.0, 0.0]),
                (2, vec![1.0, 0.0]),
                (3, vec![0.0, 1.0]),
            ],
            vec![(1, 2), (2, 3), (1, 3)],
        )
    }

    #[test]
    fn triangle_is_valid() {
        assert!(validate(&triangle()).is_empty());
        assert!(triangle().is_proper());
    }

    #[test]
    fn duplicate_edge_reported_once() {
        let fw = Framework::new(
            2,
            vec![(1, vec![0.0, 0.0]), (2, vec![1.0, 0.0])],
            vec![(1, 2), (2, 1)],
        );
        assert_eq!(validate(&fw), vec![Violation::DuplicateEdge(2, 1)]);
    }

    #[test]
    fn disconnected_reported() {
        let fw = Framework::new(
            2,
            vec![
                (1, vec![0.0, 0.0]),
                (2, vec![1.0, 0.0]),
                (3, vec![5.0, 0.0]),
                (4, vec![6.0, 0.0]),
            ],
            vec![(1, 2), (3, 4)],
        );
        assert_eq!(
            validate(&fw),
            vec![Violation::Disconnected { components: 2 }]
        );
    }

    #[test]
    fn malformed_inputs() {
        let fw = Framework::new(
            2,
            vec![(1, vec![0.0, 0.0]), (1, vec![1.0, 0.0]), (3, vec![0.0])],
            vec![(1, 1), (1, 9)],
        )
        .with_pinned([7]);
        let v = validate(&fw);
        assert!(v.contains(&Violation::DuplicateVertex(1)));
        assert!(v.contains(&Violation::SelfLoop(1)));
        assert!(v.contains(&Violation::UnknownEndpoint {
            edge: (1, 9),
            vertex: 9
        }));
        assert!(v.contains(&Violation::UnknownPinned(7)));
        assert!(v.contains(&Violation::CoordinateLength {
            vertex: 3,
            expected: 2,
            found: 1
        }));
    }

    #[test]
    fn coincident_points_are_not_proper() {
        let fw = Framework::new(
            2,
            vec![(1, vec![0.0, 0.0]), (2, vec![0.0, 1e-12])],
            vec![(1, 2)],
        );
        assert!(!fw.is_proper());
        assert!(matches!(fw.ensure_proper(), Err(Error::NotProper(1, 2))));
    }

    #[test]
    fn subframework_cases() {
        let t = triangle();
        assert_eq!(subframework(&t, &[1, 2, 3]).unwrap(), t);
        let bar = subframework(&t, &[2, 1]).unwrap();
        assert_eq!(bar.vertex_count(), 2);
        assert_eq!(bar.graph().edges(), &[(1, 2)]);
        assert!(matches!(subframework(&t, &[]), Err(Error::EmptySubset)));
        assert!(matches!(
            subframework(&t, &[3]),
            Err(Error::EdgelessSubgraph(_))
        ));
        assert!(matches!(
            subframework(&t, &[3, 8]),
            Err(Error::UnknownVertex(8))
        ));
    }

    #[test]
    fn subframework_may_be_disconnected() {
        let path = Framework::new(
            2,
            (1..=4).map(|i| (i, vec![i as f64, 0.0])),
            vec![(1, 2), (2, 3), (3, 4)],
        );
        let sub = subframework(&path, &[1, 2, 4]).unwrap();
        assert_eq!(sub.edge_count(), 1);
        assert!(sub.structural_violations().is_empty());
    }

    #[test]
    fn partition_checks() {
        let t = triangle();
        assert!(VertexPartition::new(vec![vec![1, 2], vec![3]])
            .validate_for(t.graph())
            .is_ok());
        assert!(VertexPartition::new(vec![vec![1, 2]])
            .validate_for(t.graph())
            .is_err());
        assert!(VertexPartition::new(vec![vec![1, 2], vec![2, 3]])
            .validate_for(t.graph())
            .is_err());
        assert!(VertexPartition::new(vec![vec![1, 2, 3], vec![]])
            .validate_for(t.graph())
            .is_err());
    }
}
