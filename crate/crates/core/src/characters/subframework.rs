//! Character bounds on subframeworks, each taken with its own symmetry group.

use std::collections::HashSet;

use rayon::prelude::*;

use super::audit::{AuditCheck, AuditReport, Scope};
use super::{classify_element, cycle_notation, snap_trace, ElementKind};
use crate::error::{Error, Result};
use crate::model::{subframework, Framework, FrameworkGraph, VertexId};
use crate::rigidity::rigid_motion_basis;
use crate::symmetry::{edge_permutation, spatial_symmetry_group, trace_rho_rig};

/// Default vertex bound for subgraph enumeration.
pub const DEFAULT_SUBGRAPH_BOUND: usize = 8;

/// Hard cap on the number of enumerated subgraphs.
pub const MAX_ENUMERATED_SUBGRAPHS: usize = 50_000;

const BOUND_TOLERANCE: f64 = 1e-8;

const SUBFRAMEWORK_CITATION: &str =
    "subframework bound: in an isostatic framework every subframework X and every \
     symmetry g of X satisfy |j*tr(S) - b - tr(rig)| <= d*v_X - e_X - rig_X";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubgraphSelection {
    Explicit(Vec<Vec<VertexId>>),
    /// All proper connected induced subgraphs with 2 to `max_vertices` vertices.
    Enumerate {
        max_vertices: usize,
    },
}

/// Vertex sets of all proper connected induced subgraphs with between 2 and
/// `max_vertices` vertices, each sorted, in lexicographic order.
pub fn connected_induced_subsets(
    graph: &FrameworkGraph,
    max_vertices: usize,
) -> Result<Vec<Vec<VertexId>>> {
    let n = graph.vertex_count();
    if n > 64 {
        return Err(Error::BoundExceeded {
            found: n,
            bound: 64,
        });
    }
    let adjacency: Vec<u64> = graph
        .adjacency_lists()
        .iter()
        .map(|nbrs| nbrs.iter().fold(0u64, |m, &w| m | (1 << w)))
        .collect();
    let mut seen: HashSet<u64> = HashSet::new();
    let mut layer: Vec<u64> = (0..n).map(|v| 1u64 << v).collect();
    let mut found = Vec::new();
    for size in 2..=max_vertices.min(n.saturating_sub(1)) {
        let mut next = Vec::new();
        for &mask in &layer {
            let mut frontier = (0..n)
                .filter(|&v| mask & (1 << v) != 0)
                .fold(0u64, |m, v| m | adjacency[v])
                & !mask;
            while frontier != 0 {
                let w = frontier.trailing_zeros();
                frontier &= frontier - 1;
                let grown = mask | (1 << w);
                if seen.insert(grown) {
                    next.push(grown);
                    found.push(grown);
                    if found.len() > MAX_ENUMERATED_SUBGRAPHS {
                        return Err(Error::EnumerationBound(MAX_ENUMERATED_SUBGRAPHS));
                    }
                }
            }
        }
        debug_assert!(next.iter().all(|m| m.count_ones() as usize == size));
        layer = next;
    }
    let ids = graph.vertex_ids();
    let mut subsets: Vec<Vec<VertexId>> = found
        .into_iter()
        .map(|mask| {
            (0..n)
                .filter(|&v| mask & (1 << v) != 0)
                .map(|v| ids[v])
                .collect()
        })
        .collect();
    subsets.sort();
    Ok(subsets)
}

/// Checks the character bound on every selected subframework.
pub fn subframework_audit(fw: &Framework, selection: &SubgraphSelection) -> Result<AuditReport> {
    let subsets = match selection {
        SubgraphSelection::Explicit(sets) => {
            let mut sets: Vec<Vec<VertexId>> = sets
                .iter()
                .map(|s| {
                    let mut s = s.clone();
                    s.sort();
                    s.dedup();
                    s
                })
                .collect();
            sets.sort();
            sets
        }
        SubgraphSelection::Enumerate { max_vertices } => {
            connected_induced_subsets(fw.graph(), *max_vertices)?
        }
    };
    let per_subset: Vec<Vec<AuditCheck>> = subsets
        .par_iter()
        .map(|subset| audit_subset(fw, subset))
        .collect::<Result<_>>()?;
    Ok(AuditReport {
        checks: per_subset.into_iter().flatten().collect(),
    })
}

fn audit_subset(fw: &Framework, subset: &[VertexId]) -> Result<Vec<AuditCheck>> {
    let induced = subframework(fw, subset)?;
    let x = Framework::new(
        induced.dimension(),
        induced.points().map(|(id, p)| (id, p.to_vec())),
        induced.graph().edges().iter().copied(),
    );
    let d = x.dimension();
    let (v, e) = (x.vertex_count(), x.edge_count());
    let rig = rigid_motion_basis(&x).dim();
    let bound = (d * v) as f64 - e as f64 - rig as f64;
    let group = spatial_symmetry_group(&x)?;
    let edges = x.graph().edge_indices();
    let mut checks = Vec::with_capacity(group.order());
    for g in group.elements() {
        let b = edge_permutation(&edges, &g.sigma)
            .map(|p| p.fixed_points())
            .ok_or_else(|| {
                Error::ClosureFailure("subframework symmetry is not an automorphism".into())
            })?;
        let j = g.sigma.fixed_points();
        let kind = classify_element(&g.orthogonal)?;
        let tr_s = snap_trace(kind, g.trace());
        let tr_rig = snap_trace(kind, trace_rho_rig(&x, g)?);
        let character = j as f64 * tr_s - b as f64 - tr_rig;
        let slack = bound - character.abs();
        let rule = if d == 2 && kind == ElementKind::Reflection {
            "subframework-planar-reflection"
        } else {
            "subframework-character-bound"
        };
        checks.push(AuditCheck::new(
            rule,
            Scope::Subframework {
                vertices: subset.to_vec(),
            },
            Some(cycle_notation(&g.sigma, x.graph().vertex_ids())),
            Some(kind),
            &[
                ("v", v as f64),
                ("e", e as f64),
                ("rig", rig as f64),
                ("j", j as f64),
                ("b", b as f64),
                ("tr_sp", tr_s),
                ("tr_rig", tr_rig),
            ],
            "(d*v - e - rig) - |j*tr(S) - b - tr(rig)| >= 0",
            slack,
            slack >= -BOUND_TOLERANCE,
            SUBFRAMEWORK_CITATION,
        ));
    }
    Ok(checks)
}
