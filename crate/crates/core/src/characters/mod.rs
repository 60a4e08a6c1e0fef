//! Character tables of the rigidity representation and the counting rules
//! derived from them.

mod audit;
mod subframework;

use std::fmt;

use nalgebra::DMatrix;
use serde::Serialize;

pub use audit::{isostatic_necessary_checks, AuditCheck, AuditReport, Scope};
pub use subframework::{
    connected_induced_subsets, subframework_audit, SubgraphSelection, DEFAULT_SUBGRAPH_BOUND,
};

use crate::error::{Error, Result};
use crate::linalg::{restricted_trace, DEFAULT_RANK_TOLERANCE};
use crate::model::{Framework, VertexId};
use crate::rigidity::{
    analyze_grounded, analyze_with_tolerance, free_vertex_indices, RigidityAnalysis,
};
use crate::symmetry::{representations, vertex_operator, Permutation, SymmetryGroup};

/// Tolerance on `m_g - s_g - rhs`.
pub const BALANCE_TOLERANCE: f64 = 1e-8;

const CLASSIFY_TOLERANCE: f64 = 1e-8;
const UNCLASSIFIED_BAND: f64 = 1e-6;

/// Geometric type of an orthogonal map, decided by determinant and trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ElementKind {
    Identity,
    /// Proper rotation by `angle` radians in `(0, pi)`.
    Rotation {
        angle: f64,
    },
    Reflection,
    HalfTurn,
    Inversion,
    /// Rotation by `angle` composed with the reflection in its plane.
    ImproperRotation {
        angle: f64,
    },
    Unclassified,
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Identity => write!(f, "identity"),
            Self::Rotation { angle } => write!(f, "rotation by {:.4} deg", angle.to_degrees()),
            Self::Reflection => write!(f, "reflection"),
            Self::HalfTurn => write!(f, "half-turn"),
            Self::Inversion => write!(f, "inversion"),
            Self::ImproperRotation { angle } => {
                write!(f, "improper rotation by {:.4} deg", angle.to_degrees())
            }
            Self::Unclassified => write!(f, "unclassified"),
        }
    }
}

/// Classifies an orthogonal matrix of dimension 1, 2 or 3.
pub fn classify_element(s: &DMatrix<f64>) -> Result<ElementKind> {
    let d = s.nrows();
    if s.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} is not square",
            d,
            s.ncols()
        )));
    }
    let deviation = (s.transpose() * s - DMatrix::identity(d, d)).amax();
    if deviation > 1e-10 {
        return Err(Error::NotOrthogonal(deviation));
    }
    let det = s.determinant();
    let tr = s.trace();
    // Exact boundary hit, near miss (unclassified) or clearly away.
    let near = |target: f64| -> Option<bool> {
        let gap = (tr - target).abs();
        if gap <= CLASSIFY_TOLERANCE {
            Some(true)
        } else if gap <= UNCLASSIFIED_BAND {
            None
        } else {
            Some(false)
        }
    };
    macro_rules! at {
        ($target:expr) => {
            match near($target) {
                Some(hit) => hit,
                None => return Ok(ElementKind::Unclassified),
            }
        };
    }
    let kind = match (d, det > 0.0) {
        (1, true) => ElementKind::Identity,
        (1, false) => ElementKind::Reflection,
        (2, true) => {
            if at!(2.0) {
                ElementKind::Identity
            } else if at!(-2.0) {
                ElementKind::HalfTurn
            } else {
                ElementKind::Rotation {
                    angle: (tr / 2.0).clamp(-1.0, 1.0).acos(),
                }
            }
        }
        (2, false) => ElementKind::Reflection,
        (3, true) => {
            if at!(3.0) {
                ElementKind::Identity
            } else if at!(-1.0) {
                ElementKind::HalfTurn
            } else {
                ElementKind::Rotation {
                    angle: ((tr - 1.0) / 2.0).clamp(-1.0, 1.0).acos(),
                }
            }
        }
        (3, false) => {
            if at!(1.0) {
                ElementKind::Reflection
            } else if at!(-3.0) {
                ElementKind::Inversion
            } else {
                ElementKind::ImproperRotation {
                    angle: ((tr + 1.0) / 2.0).clamp(-1.0, 1.0).acos(),
                }
            }
        }
        _ => {
            if (s - DMatrix::identity(d, d)).amax() <= CLASSIFY_TOLERANCE {
                ElementKind::Identity
            } else {
                ElementKind::Unclassified
            }
        }
    };
    Ok(kind)
}

/// Cycle notation of `sigma` in terms of vertex ids, fixed points omitted.
pub fn cycle_notation(sigma: &Permutation, ids: &[VertexId]) -> String {
    let mut seen = vec![false; sigma.len()];
    let mut out = String::new();
    for start in 0..sigma.len() {
        if seen[start] || sigma.apply(start) == start {
            continue;
        }
        let mut cycle = Vec::new();
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            cycle.push(ids[i].to_string());
            i = sigma.apply(i);
        }
        out.push('(');
        out.push_str(&cycle.join(" "));
        out.push(')');
    }
    if out.is_empty() {
        out.push_str("()");
    }
    out
}

/// Rounds a trace to the nearest integer when `kind` is the identity or an
/// involution, whose traces on invariant subspaces are integers.
pub fn snap_trace(kind: ElementKind, trace: f64) -> f64 {
    match kind {
        ElementKind::Identity
        | ElementKind::Reflection
        | ElementKind::HalfTurn
        | ElementKind::Inversion => trace.round(),
        _ => trace,
    }
}

/// One column of the character table.
#[derive(Clone, Debug, Serialize)]
pub struct CharacterRow {
    pub element: usize,
    pub cycles: String,
    pub kind: ElementKind,
    /// Fixed vertices (free vertices for grounded frameworks).
    pub j: usize,
    /// Fixed edges.
    pub b: usize,
    pub tr_sp: f64,
    pub tr_rig: f64,
    /// Trace on the mechanism space.
    pub mech: f64,
    /// Trace on the self-stress space.
    pub stress: f64,
    /// `j * tr_sp - b - tr_rig`.
    pub rhs: f64,
}

impl CharacterRow {
    pub fn balance_residual(&self) -> f64 {
        (self.mech - self.stress - self.rhs).abs()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CharacterTable {
    pub dimension: usize,
    pub vertices: usize,
    pub edges: usize,
    pub grounded: bool,
    pub mechanisms: usize,
    pub stresses: usize,
    pub rows: Vec<CharacterRow>,
}

impl CharacterTable {
    pub fn max_balance_residual(&self) -> f64 {
        self.rows
            .iter()
            .map(CharacterRow::balance_residual)
            .fold(0.0, f64::max)
    }
}

/// Traces of one group element on the mechanism and stress spaces, checked
/// against the counted right-hand side.
#[allow(clippy::too_many_arguments)]
pub(crate) fn balance_row(
    analysis: &RigidityAnalysis,
    element: usize,
    cycles: String,
    kind: ElementKind,
    j: usize,
    b: usize,
    tr_sp: f64,
    tr_rig: f64,
    rho_v: &DMatrix<f64>,
    rho_e: &DMatrix<f64>,
) -> Result<CharacterRow> {
    let mech = restricted_trace(&analysis.mechanism_basis, rho_v)?;
    let stress = restricted_trace(&analysis.stress_basis, rho_e)?;
    let (tr_sp, tr_rig) = (snap_trace(kind, tr_sp), snap_trace(kind, tr_rig));
    let row = CharacterRow {
        element,
        cycles,
        kind,
        j,
        b,
        tr_sp,
        tr_rig,
        mech,
        stress,
        rhs: j as f64 * tr_sp - b as f64 - tr_rig,
    };
    check_balance(analysis, element, row.balance_residual())?;
    Ok(row)
}

pub(crate) fn check_balance(
    analysis: &RigidityAnalysis,
    element: usize,
    residual: f64,
) -> Result<()> {
    if residual > BALANCE_TOLERANCE {
        let (smallest_kept, largest_dropped) = analysis.matrix.spectral_gap();
        return Err(Error::BalanceViolation {
            element,
            residual,
            smallest_kept,
            largest_dropped,
        });
    }
    Ok(())
}

/// Character table of the rigidity representation.
///
/// Frameworks with pinned vertices are treated as grounded: only free
/// vertices carry velocities and there are no rigid motions.
pub fn fowler_guest_table(fw: &Framework, group: &SymmetryGroup) -> Result<CharacterTable> {
    fowler_guest_table_with_tolerance(fw, group, DEFAULT_RANK_TOLERANCE)
}

pub fn fowler_guest_table_with_tolerance(
    fw: &Framework,
    group: &SymmetryGroup,
    tol: f64,
) -> Result<CharacterTable> {
    fw.ensure_structural()?;
    fw.ensure_proper()?;
    let grounded = !fw.graph().pinned().is_empty();
    let analysis = if grounded {
        analyze_grounded(fw, tol)?
    } else {
        analyze_with_tolerance(fw, tol)?
    };
    let reps = representations(fw, group)?;
    let free = free_vertex_indices(fw);
    let ids = fw.graph().vertex_ids();
    let mut rows = Vec::with_capacity(group.order());
    for (k, (g, rep)) in group.elements().iter().zip(&reps.elements).enumerate() {
        let kind = classify_element(&g.orthogonal)?;
        let b = rep.edge_sigma.fixed_points();
        let (j, rho_v, tr_rig) = if grounded {
            let j = free.iter().filter(|&&i| g.sigma.apply(i) == i).count();
            (j, vertex_operator(&g.sigma, &g.orthogonal, &free)?, 0.0)
        } else {
            let tr_rig = restricted_trace(&analysis.rigid_basis, &rep.rho_v_hat)?;
            (g.sigma.fixed_points(), rep.rho_v_hat.clone(), tr_rig)
        };
        rows.push(balance_row(
            &analysis,
            k,
            cycle_notation(&g.sigma, ids),
            kind,
            j,
            b,
            g.trace(),
            tr_rig,
            &rho_v,
            &rep.rho_e,
        )?);
    }
    Ok(CharacterTable {
        dimension: fw.dimension(),
        vertices: fw.vertex_count(),
        edges: fw.edge_count(),
        grounded,
        mechanisms: analysis.mechanisms,
        stresses: analysis.stresses,
        rows,
    })
}
