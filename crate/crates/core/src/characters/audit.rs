//! Necessary conditions for isostaticity read off the character counts.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{classify_element, cycle_notation, snap_trace, ElementKind};
use crate::model::{Framework, VertexId};
use crate::rigidity::{free_vertex_indices, rigid_motion_basis};
use crate::symmetry::{edge_permutation, trace_rho_rig, SpatialSymmetry, SymmetryGroup};

const COUNT_TOLERANCE: f64 = 1e-8;

/// Where a check was evaluated.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "scope", rename_all = "kebab-case")]
pub enum Scope {
    Framework,
    Subframework { vertices: Vec<VertexId> },
    Partition,
}

/// One evaluated counting rule.
#[derive(Clone, Debug, Serialize)]
pub struct AuditCheck {
    pub rule: String,
    #[serde(flatten)]
    pub scope: Scope,
    /// Cycle notation of the group element, if the rule is per element.
    pub element: Option<String>,
    pub kind: Option<ElementKind>,
    pub counts: BTreeMap<String, f64>,
    pub requirement: String,
    pub value: f64,
    pub satisfied: bool,
    pub citation: String,
    /// Set on failure: what the failure rules out.
    pub consequence: Option<String>,
}

impl AuditCheck {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        rule: &str,
        scope: Scope,
        element: Option<String>,
        kind: Option<ElementKind>,
        counts: &[(&str, f64)],
        requirement: &str,
        value: f64,
        satisfied: bool,
        citation: &str,
    ) -> Self {
        Self {
            rule: rule.to_owned(),
            scope,
            element,
            kind,
            counts: counts.iter().map(|&(k, v)| (k.to_owned(), v)).collect(),
            requirement: requirement.to_owned(),
            value,
            satisfied,
            citation: citation.to_owned(),
            consequence: (!satisfied).then(|| "not isostatic".to_owned()),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AuditReport {
    pub checks: Vec<AuditCheck>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.satisfied)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AuditCheck> {
        self.checks.iter().filter(|c| !c.satisfied)
    }

    pub fn extend(&mut self, other: AuditReport) {
        self.checks.extend(other.checks);
    }
}

const MAXWELL_CITATION: &str =
    "Maxwell count: an isostatic framework has d*v - e equal to the rigid-motion dimension";
const CHARACTER_CITATION: &str =
    "symmetry-adapted Maxwell count: an isostatic framework has zero character j*tr(S) - b - tr(rig) for every element";
const GROUNDED_CITATION: &str = "grounded count: an isostatic grounded framework has e = d*v' and equal edge and free-velocity characters";

/// Rule id and requirement text for an element kind in dimension `d`.
fn element_rule(d: usize, kind: ElementKind) -> (&'static str, &'static str) {
    match (d, kind) {
        (2, ElementKind::Reflection) => ("planar-reflection", "1 - b = 0"),
        (2, ElementKind::HalfTurn) => ("planar-half-turn", "1 - 2j - b = 0"),
        (3, ElementKind::HalfTurn) => ("half-turn-3d", "2 - j - b = 0"),
        (3, ElementKind::Reflection) => ("reflection-3d", "j - b = 0"),
        (3, ElementKind::Inversion) => ("inversion-3d", "-3j - b = 0"),
        _ => ("symmetric-count", "j*tr(S) - b - tr(rig) = 0"),
    }
}

fn fixed_edges(fw: &Framework, g: &SpatialSymmetry) -> Option<usize> {
    edge_permutation(&fw.graph().edge_indices(), &g.sigma).map(|p| p.fixed_points())
}

/// Identity count plus one symmetry-adapted count per non-identity element.
///
/// Every check is necessary for isostaticity; none is sufficient.
pub fn isostatic_necessary_checks(fw: &Framework, group: &SymmetryGroup) -> AuditReport {
    if !fw.graph().pinned().is_empty() {
        return grounded_checks(fw, group);
    }
    let d = fw.dimension();
    let (v, e) = (fw.vertex_count(), fw.edge_count());
    let rig = rigid_motion_basis(fw).dim();
    let full_rig = rig == d * (d + 1) / 2;
    let ids = fw.graph().vertex_ids();
    let maxwell = (d * v) as f64 - e as f64 - rig as f64;
    let mut checks = vec![AuditCheck::new(
        "maxwell-count",
        Scope::Framework,
        None,
        Some(ElementKind::Identity),
        &[
            ("d", d as f64),
            ("v", v as f64),
            ("e", e as f64),
            ("rig", rig as f64),
        ],
        "d*v - e - rig = 0",
        maxwell,
        maxwell == 0.0,
        MAXWELL_CITATION,
    )];
    for g in group.elements().iter().filter(|g| !g.is_identity()) {
        let Some(b) = fixed_edges(fw, g) else {
            continue;
        };
        let kind = classify_element(&g.orthogonal).unwrap_or(ElementKind::Unclassified);
        let j = g.sigma.fixed_points();
        let tr_s = snap_trace(kind, g.trace());
        let tr_rig = snap_trace(
            kind,
            if full_rig {
                crate::symmetry::rigid_character(&g.orthogonal)
            } else {
                trace_rho_rig(fw, g).unwrap_or(f64::NAN)
            },
        );
        let (rule, requirement) = if full_rig {
            element_rule(d, kind)
        } else {
            element_rule(0, kind)
        };
        let value = j as f64 * tr_s - b as f64 - tr_rig;
        checks.push(AuditCheck::new(
            rule,
            Scope::Framework,
            Some(cycle_notation(&g.sigma, ids)),
            Some(kind),
            &[
                ("j", j as f64),
                ("b", b as f64),
                ("tr_sp", tr_s),
                ("tr_rig", tr_rig),
            ],
            requirement,
            value,
            value.abs() < COUNT_TOLERANCE,
            CHARACTER_CITATION,
        ));
    }
    AuditReport { checks }
}

fn grounded_checks(fw: &Framework, group: &SymmetryGroup) -> AuditReport {
    let d = fw.dimension();
    let free = free_vertex_indices(fw);
    let e = fw.edge_count();
    let ids = fw.graph().vertex_ids();
    let value = e as f64 - (d * free.len()) as f64;
    let mut checks = vec![AuditCheck::new(
        "grounded-count",
        Scope::Framework,
        None,
        Some(ElementKind::Identity),
        &[
            ("d", d as f64),
            ("v_free", free.len() as f64),
            ("e", e as f64),
        ],
        "e - d*v' = 0",
        value,
        value == 0.0,
        GROUNDED_CITATION,
    )];
    for g in group.elements().iter().filter(|g| !g.is_identity()) {
        let Some(b) = fixed_edges(fw, g) else {
            continue;
        };
        let kind = classify_element(&g.orthogonal).unwrap_or(ElementKind::Unclassified);
        let j = free.iter().filter(|&&i| g.sigma.apply(i) == i).count();
        let tr_s = snap_trace(kind, g.trace());
        let value = b as f64 - j as f64 * tr_s;
        checks.push(AuditCheck::new(
            "grounded-trace",
            Scope::Framework,
            Some(cycle_notation(&g.sigma, ids)),
            Some(kind),
            &[("j_free", j as f64), ("b", b as f64), ("tr_sp", tr_s)],
            "b - j'*tr(S) = 0",
            value,
            value.abs() < COUNT_TOLERANCE,
            GROUNDED_CITATION,
        ));
    }
    AuditReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetry::spatial_symmetry_group;

    fn kite_with_cross() -> Framework {
        // Mirror in the x-axis fixes vertices 1, 3 and the edge (1, 3).
        Framework::new(
            2,
            [
                (1, vec![0.0, 0.0]),
                (2, vec![1.0, 1.0]),
                (3, vec![3.0, 0.0]),
                (4, vec![1.0, -1.0]),
            ],
            [(1, 2), (2, 3), (3, 4), (4, 1), (1, 3)],
        )
    }

    #[test]
    fn kite_passes() {
        let fw = kite_with_cross();
        let group = spatial_symmetry_group(&fw).unwrap();
        let report = isostatic_necessary_checks(&fw, &group);
        assert_eq!(report.checks.len(), 2);
        assert_eq!(report.checks[1].rule, "planar-reflection");
        assert!(report.passed());
    }

    #[test]
    fn mirror_fixing_three_edges_fails() {
        let fw = Framework::new(
            2,
            [
                (1, vec![-2.0, 0.0]),
                (2, vec![-1.0, 0.0]),
                (3, vec![1.0, 0.0]),
                (4, vec![2.0, 0.0]),
                (5, vec![0.0, 1.0]),
                (6, vec![0.0, -1.0]),
            ],
            [
                (1, 2),
                (3, 4),
                (5, 6),
                (1, 5),
                (1, 6),
                (3, 5),
                (3, 6),
                (4, 5),
                (4, 6),
            ],
        );
        let group = spatial_symmetry_group(&fw).unwrap();
        let report = isostatic_necessary_checks(&fw, &group);
        assert!(report.checks[0].satisfied);
        let failed: Vec<_> = report.failures().collect();
        assert!(failed
            .iter()
            .any(|c| c.rule == "planar-reflection" && c.counts["b"] == 3.0));
        assert_eq!(failed[0].consequence.as_deref(), Some("not isostatic"));
    }

    #[test]
    fn grounded_trace_rule() {
        let fw = Framework::new(
            2,
            [
                (1, vec![-1.0, 0.0]),
                (2, vec![1.0, 0.0]),
                (3, vec![0.0, 1.0]),
            ],
            [(1, 3), (2, 3)],
        )
        .with_pinned([1, 2]);
        let group = spatial_symmetry_group(&fw).unwrap();
        let report = isostatic_necessary_checks(&fw, &group);
        assert_eq!(report.checks.len(), 2);
        assert!(report.passed());
    }
}
