//! Planar point-line constraint systems.
//!
//! A line is stored by its closest point `q` to the origin, so lines through
//! the origin cannot be represented. Coordinates are ordered points first,
//! then lines, each sorted by id, two entries per object.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::characters::{
    balance_row, classify_element, cycle_notation, snap_trace, AuditCheck, AuditReport,
    CharacterTable, ElementKind, Scope,
};
use crate::error::{Error, Result};
use crate::linalg::{restricted_trace, SubspaceBasis, TolerancedMatrix, DEFAULT_RANK_TOLERANCE};
use crate::model::VertexId;
use crate::rigidity::RigidityAnalysis;
use crate::symmetry::{
    colored_automorphisms_pruned, distance_filter, edge_permutation, fit_point_isometry,
    permutation_matrix, symmetry_equation_residual, ColoredGraph, Permutation, SymmetryGroup,
    DEFAULT_VERTEX_BOUND,
};

/// Smallest admissible distance from a line to the origin.
pub const ORIGIN_CLEARANCE: f64 = 1e-9;

const RESIDUAL_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    /// Point-point distance.
    Pp,
    /// Signed point-line distance.
    Pl,
    /// Angle between lines.
    Ll,
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pp => "pp",
            Self::Pl => "pl",
            Self::Ll => "ll",
        })
    }
}

/// A constraint; for `Pl` the ends are normalized to (point, line). Angles
/// are in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constraint {
    pub kind: ConstraintKind,
    pub ends: (VertexId, VertexId),
    pub value: f64,
}

impl Constraint {
    pub fn new(kind: ConstraintKind, a: VertexId, b: VertexId, value: f64) -> Self {
        Self {
            kind,
            ends: (a, b),
            value,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PointLineSystem {
    points: BTreeMap<VertexId, [f64; 2]>,
    lines: BTreeMap<VertexId, [f64; 2]>,
    constraints: Vec<Constraint>,
    /// Frozen orientation sign per constraint (1 for `Pp`).
    signs: Vec<f64>,
    /// Constraint endpoints as object indices.
    ends: Vec<(usize, usize)>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl PointLineSystem {
    /// Builds and validates a system; the stored configuration must satisfy
    /// every constraint.
    pub fn new(
        points: impl IntoIterator<Item = (VertexId, [f64; 2])>,
        lines: impl IntoIterator<Item = (VertexId, [f64; 2])>,
        constraints: Vec<Constraint>,
    ) -> Result<Self> {
        let mut point_map = BTreeMap::new();
        for (id, p) in points {
            if point_map.insert(id, p).is_some() {
                return Err(Error::InvalidPointLine(format!("duplicate point id {id}")));
            }
        }
        let mut line_map = BTreeMap::new();
        for (id, q) in lines {
            if point_map.contains_key(&id) || line_map.insert(id, q).is_some() {
                return Err(Error::InvalidPointLine(format!("duplicate object id {id}")));
            }
        }
        if point_map.is_empty() && line_map.is_empty() {
            return Err(Error::InvalidPointLine("no points or lines".into()));
        }
        for (&id, c) in point_map.iter().chain(&line_map) {
            if !c.iter().all(|x| x.is_finite()) {
                return Err(Error::InvalidPointLine(format!(
                    "object {id} has a non-finite coordinate"
                )));
            }
        }
        for (&id, q) in &line_map {
            if norm(q) <= ORIGIN_CLEARANCE {
                return Err(Error::LineThroughOrigin(id));
            }
        }
        let mut sys = Self {
            points: point_map,
            lines: line_map,
            constraints: Vec::with_capacity(constraints.len()),
            signs: Vec::new(),
            ends: Vec::new(),
        };
        let mut pairs = std::collections::BTreeSet::new();
        for c in constraints {
            let c = sys.normalize(c)?;
            let (a, b) = (
                sys.index_of(c.ends.0).unwrap(),
                sys.index_of(c.ends.1).unwrap(),
            );
            if !pairs.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidPointLine(format!(
                    "more than one constraint between {} and {}",
                    c.ends.0, c.ends.1
                )));
            }
            sys.ends.push((a, b));
            sys.constraints.push(c);
        }
        let x = sys.coordinate_vector();
        sys.signs = (0..sys.constraints.len())
            .map(|k| sys.orientation(k, &x))
            .collect();
        sys.check_residuals()?;
        Ok(sys)
    }

    fn normalize(&self, c: Constraint) -> Result<Constraint> {
        let (a, b) = c.ends;
        for id in [a, b] {
            if !self.points.contains_key(&id) && !self.lines.contains_key(&id) {
                return Err(Error::UnknownVertex(id));
            }
        }
        if a == b {
            return Err(Error::InvalidPointLine(format!(
                "constraint joins {a} to itself"
            )));
        }
        let is_point = |id| self.points.contains_key(&id);
        let ends = match c.kind {
            ConstraintKind::Pp if is_point(a) && is_point(b) => (a, b),
            ConstraintKind::Ll if !is_point(a) && !is_point(b) => (a, b),
            ConstraintKind::Pl if is_point(a) && !is_point(b) => (a, b),
            ConstraintKind::Pl if !is_point(a) && is_point(b) => (b, a),
            kind => {
                return Err(Error::InvalidPointLine(format!(
                    "{kind} constraint does not match the kinds of {a} and {b}"
                )))
            }
        };
        let valid_value = match c.kind {
            ConstraintKind::Pp | ConstraintKind::Pl => c.value >= 0.0,
            ConstraintKind::Ll => (0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&c.value),
        };
        if !c.value.is_finite() || !valid_value {
            return Err(Error::InvalidPointLine(format!(
                "target {} out of range for {} constraint between {a} and {b}",
                c.value, c.kind
            )));
        }
        Ok(Constraint { ends, ..c })
    }

    pub fn points(&self) -> &BTreeMap<VertexId, [f64; 2]> {
        &self.points
    }

    pub fn lines(&self) -> &BTreeMap<VertexId, [f64; 2]> {
        &self.lines
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn point_count(&self) -> usize {
        self.points.len()
    }

    pub fn line_count(&self) -> usize {
        self.lines.len()
    }

    pub fn object_count(&self) -> usize {
        self.points.len() + self.lines.len()
    }

    /// Object ids in coordinate order: points, then lines.
    pub fn object_ids(&self) -> Vec<VertexId> {
        self.points
            .keys()
            .chain(self.lines.keys())
            .copied()
            .collect()
    }

    pub fn index_of(&self, id: VertexId) -> Option<usize> {
        match self.points.keys().position(|&k| k == id) {
            Some(i) => Some(i),
            None => self
                .lines
                .keys()
                .position(|&k| k == id)
                .map(|i| self.points.len() + i),
        }
    }

    fn is_point_index(&self, i: usize) -> bool {
        i < self.points.len()
    }

    pub fn coordinate_vector(&self) -> DVector<f64> {
        DVector::from_iterator(
            2 * self.object_count(),
            self.points
                .values()
                .chain(self.lines.values())
                .flat_map(|c| c.iter().copied()),
        )
    }

    /// Objects as columns of a 2 × (n + r) matrix.
    fn object_matrix(&self) -> DMatrix<f64> {
        let x = self.coordinate_vector();
        DMatrix::from_column_slice(2, self.object_count(), x.as_slice())
    }

    /// Rebuilds the system at new coordinates; fails unless every
    /// constraint still holds.
    pub fn at_coordinates(&self, x: &DVector<f64>) -> Result<Self> {
        let n = self.points.len();
        let points = self
            .points
            .keys()
            .enumerate()
            .map(|(i, &id)| (id, [x[2 * i], x[2 * i + 1]]));
        let lines = self
            .lines
            .keys()
            .enumerate()
            .map(|(i, &id)| (id, [x[2 * (n + i)], x[2 * (n + i) + 1]]));
        Self::new(points, lines, self.constraints.clone())
    }

    /// Centroid of the points, or the origin when there are none.
    pub fn point_centroid(&self) -> [f64; 2] {
        if self.points.is_empty() {
            return [0.0, 0.0];
        }
        let n = self.points.len() as f64;
        let (sx, sy) = self
            .points
            .values()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p[0], sy + p[1]));
        [sx / n, sy / n]
    }

    /// Image under `p -> S p + t`, applied to points and lines alike.
    pub fn transformed(&self, s: &DMatrix<f64>, t: &[f64; 2]) -> Result<Self> {
        let apply = |v: &[f64; 2]| {
            [
                s[(0, 0)] * v[0] + s[(0, 1)] * v[1],
                s[(1, 0)] * v[0] + s[(1, 1)] * v[1],
            ]
        };
        let points: Vec<_> = self
            .points
            .iter()
            .map(|(&id, p)| {
                let sp = apply(p);
                (id, [sp[0] + t[0], sp[1] + t[1]])
            })
            .collect();
        let lines: Vec<_> = self
            .lines
            .iter()
            .map(|(&id, q)| {
                let sq = apply(q);
                let r = norm(&sq);
                let shift = dot(&sq, t) / r;
                (id, [sq[0] + shift * sq[0] / r, sq[1] + shift * sq[1] / r])
            })
            .collect();
        Self::new(points, lines, self.constraints.clone())
    }

    /// The system translated so that its point centroid is the origin.
    pub fn centered(&self) -> Result<Self> {
        let c = self.point_centroid();
        self.transformed(&DMatrix::identity(2, 2), &[-c[0], -c[1]])
    }

    fn raw_value(&self, k: usize, x: &DVector<f64>) -> f64 {
        let (a, b) = self.ends[k];
        let pa = [x[2 * a], x[2 * a + 1]];
        let pb = [x[2 * b], x[2 * b + 1]];
        match self.constraints[k].kind {
            ConstraintKind::Pp => 0.5 * ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)),
            ConstraintKind::Pl => (dot(&pa, &pb) - dot(&pb, &pb)) / norm(&pb),
            ConstraintKind::Ll => dot(&pa, &pb) / (norm(&pa) * norm(&pb)),
        }
    }

    fn orientation(&self, k: usize, x: &DVector<f64>) -> f64 {
        match self.constraints[k].kind {
            ConstraintKind::Pp => 1.0,
            _ if self.raw_value(k, x) < 0.0 => -1.0,
            _ => 1.0,
        }
    }

    /// Constraint residuals at coordinates `x`.
    pub fn residuals_at(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.constraints.len(),
            (0..self.constraints.len()).map(|k| {
                let c = &self.constraints[k];
                let raw = self.raw_value(k, x);
                match c.kind {
                    ConstraintKind::Pp => raw - 0.5 * c.value * c.value,
                    ConstraintKind::Pl => raw - self.signs[k] * c.value,
                    ConstraintKind::Ll => self.signs[k] * raw - c.value.cos(),
                }
            }),
        )
    }

    pub fn residuals(&self) -> DVector<f64> {
        self.residuals_at(&self.coordinate_vector())
    }

    fn check_residuals(&self) -> Result<()> {
        let x = self.coordinate_vector();
        let scale = 1.0 + x.amax();
        let r = self.residuals_at(&x);
        for (k, c) in self.constraints.iter().enumerate() {
            let limit = match c.kind {
                ConstraintKind::Pp => RESIDUAL_TOLERANCE * scale * scale,
                ConstraintKind::Pl => RESIDUAL_TOLERANCE * scale,
                ConstraintKind::Ll => RESIDUAL_TOLERANCE,
            };
            if r[k].abs() > limit {
                return Err(Error::InvalidPointLine(format!(
                    "{} constraint between {} and {} is violated by {:.3e}",
                    c.kind, c.ends.0, c.ends.1, r[k]
                )));
            }
        }
        Ok(())
    }

    /// Analytic Jacobian of the residuals at `x`.
    pub fn jacobian_at(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut jac = DMatrix::zeros(self.constraints.len(), x.len());
        for (k, c) in self.constraints.iter().enumerate() {
            let (a, b) = self.ends[k];
            let pa = [x[2 * a], x[2 * a + 1]];
            let pb = [x[2 * b], x[2 * b + 1]];
            let (ga, gb) = match c.kind {
                ConstraintKind::Pp => {
                    let diff = [pa[0] - pb[0], pa[1] - pb[1]];
                    (diff, [-diff[0], -diff[1]])
                }
                ConstraintKind::Pl => {
                    let (p, q) = (pa, pb);
                    let r = norm(&q);
                    let pq = dot(&p, &q);
                    let gq = [
                        p[0] / r - pq * q[0] / r.powi(3) - q[0] / r,
                        p[1] / r - pq * q[1] / r.powi(3) - q[1] / r,
                    ];
                    ([q[0] / r, q[1] / r], gq)
                }
                ConstraintKind::Ll => {
                    let (ra, rb) = (norm(&pa), norm(&pb));
                    let ab = dot(&pa, &pb);
                    let s = self.signs[k];
                    let grad = |u: &[f64; 2], v: &[f64; 2], ru: f64, rv: f64| {
                        [
                            s * (v[0] / (ru * rv) - ab * u[0] / (ru.powi(3) * rv)),
                            s * (v[1] / (ru * rv) - ab * u[1] / (ru.powi(3) * rv)),
                        ]
                    };
                    (grad(&pa, &pb, ra, rb), grad(&pb, &pa, rb, ra))
                }
            };
            for t in 0..2 {
                jac[(k, 2 * a + t)] = ga[t];
                jac[(k, 2 * b + t)] = gb[t];
            }
        }
        jac
    }

    pub fn jacobian(&self) -> Result<TolerancedMatrix> {
        self.jacobian_with_tolerance(DEFAULT_RANK_TOLERANCE)
    }

    pub fn jacobian_with_tolerance(&self, tol: f64) -> Result<TolerancedMatrix> {
        TolerancedMatrix::new(self.jacobian_at(&self.coordinate_vector()), tol)
    }

    /// Velocities of the two translations and the rotation about the origin,
    /// as unnormalized columns.
    pub fn rigid_motion_vectors(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(2 * self.object_count(), 3);
        for (i, c) in self.points.values().chain(self.lines.values()).enumerate() {
            if self.is_point_index(i) {
                m[(2 * i, 0)] = 1.0;
                m[(2 * i + 1, 1)] = 1.0;
            } else {
                let r = norm(c);
                let n = [c[0] / r, c[1] / r];
                for (col, t) in [[1.0, 0.0], [0.0, 1.0]].iter().enumerate() {
                    let tn = dot(t, &n);
                    m[(2 * i, col)] = tn * n[0];
                    m[(2 * i + 1, col)] = tn * n[1];
                }
            }
            m[(2 * i, 2)] = -c[1];
            m[(2 * i + 1, 2)] = c[0];
        }
        m
    }

    pub fn rigid_basis(&self) -> SubspaceBasis {
        SubspaceBasis::from_spanning(&self.rigid_motion_vectors(), 1e-9)
    }

    pub fn analyze(&self) -> Result<RigidityAnalysis> {
        self.analyze_with_tolerance(DEFAULT_RANK_TOLERANCE)
    }

    pub fn analyze_with_tolerance(&self, tol: f64) -> Result<RigidityAnalysis> {
        RigidityAnalysis::from_parts(self.jacobian_with_tolerance(tol)?, self.rigid_basis())
    }

    fn colored_graph(&self) -> ColoredGraph {
        let colors = (0..self.object_count())
            .map(|i| u32::from(!self.is_point_index(i)))
            .collect();
        let mut g = ColoredGraph::new(colors);
        for (k, &(a, b)) in self.ends.iter().enumerate() {
            g.add_edge(a, b, self.constraints[k].kind as u32);
        }
        g
    }
}

/// Symmetries of the centered system: object permutations preserving kinds
/// and constraint types, realized by a linear orthogonal map on the
/// centered coordinates.
///
/// Translations of the returned elements refer to the original frame.
pub fn pointline_symmetry_group(sys: &PointLineSystem) -> Result<SymmetryGroup> {
    let centered = sys.centered()?;
    let objects = centered.object_matrix();
    let c = sys.point_centroid();
    let centroid = DVector::from_vec(c.to_vec());
    let pair_ok = distance_filter(&objects);
    let elements =
        colored_automorphisms_pruned(&centered.colored_graph(), DEFAULT_VERTEX_BOUND, &pair_ok)?
            .iter()
            .filter_map(|sigma| fit_point_isometry(&objects, sigma, false))
            .map(|mut g| {
                g.translation = &centroid - &g.orthogonal * &centroid;
                g
            })
            .collect();
    SymmetryGroup::from_elements(elements)
}

/// `J - rho_e(g^-1) J rho_v_hat(g)` per element, on the centered system.
pub fn pointline_symmetry_residuals(
    sys: &PointLineSystem,
    group: &SymmetryGroup,
) -> Result<Vec<f64>> {
    let centered = sys.centered()?;
    let jac = centered.jacobian()?.into_entries();
    group
        .elements()
        .iter()
        .map(|g| {
            let rho_e = constraint_permutation_matrix(&centered, &g.sigma)?;
            let rho_v = permutation_matrix(&g.sigma).kronecker(&g.orthogonal);
            Ok(symmetry_equation_residual(&jac, &rho_e, &rho_v))
        })
        .collect()
}

fn constraint_permutation(sys: &PointLineSystem, sigma: &Permutation) -> Result<Permutation> {
    edge_permutation(&sys.ends, sigma).ok_or_else(|| {
        Error::ClosureFailure(format!(
            "{:?} does not permute the constraints",
            sigma.images()
        ))
    })
}

fn constraint_permutation_matrix(
    sys: &PointLineSystem,
    sigma: &Permutation,
) -> Result<DMatrix<f64>> {
    Ok(permutation_matrix(&constraint_permutation(sys, sigma)?))
}

/// Character table on the centered system; `j` counts fixed points and lines.
pub fn pointline_fowler_guest(
    sys: &PointLineSystem,
    group: &SymmetryGroup,
) -> Result<CharacterTable> {
    pointline_fowler_guest_with_tolerance(sys, group, DEFAULT_RANK_TOLERANCE)
}

pub fn pointline_fowler_guest_with_tolerance(
    sys: &PointLineSystem,
    group: &SymmetryGroup,
    tol: f64,
) -> Result<CharacterTable> {
    let centered = sys.centered()?;
    let analysis = centered.analyze_with_tolerance(tol)?;
    let ids = centered.object_ids();
    let mut rows = Vec::with_capacity(group.order());
    for (k, g) in group.elements().iter().enumerate() {
        let edge_sigma = constraint_permutation(&centered, &g.sigma)?;
        let rho_e = permutation_matrix(&edge_sigma);
        let rho_v = permutation_matrix(&g.sigma).kronecker(&g.orthogonal);
        let tr_rig = restricted_trace(&analysis.rigid_basis, &rho_v)?;
        rows.push(balance_row(
            &analysis,
            k,
            cycle_notation(&g.sigma, &ids),
            classify_element(&g.orthogonal)?,
            g.sigma.fixed_points(),
            edge_sigma.fixed_points(),
            g.trace(),
            tr_rig,
            &rho_v,
            &rho_e,
        )?);
    }
    Ok(CharacterTable {
        dimension: 2,
        vertices: centered.object_count(),
        edges: centered.constraints.len(),
        grounded: false,
        mechanisms: analysis.mechanisms,
        stresses: analysis.stresses,
        rows,
    })
}

/// Identity count and, per reflection, the rule `b_pp + b_pl + b_ll - 1 = 0`.
pub fn pointline_audit(sys: &PointLineSystem, group: &SymmetryGroup) -> Result<AuditReport> {
    let centered = sys.centered()?;
    let rig = centered.rigid_basis().dim();
    let (v, e) = (centered.object_count(), centered.constraints.len());
    let count = (2 * v) as f64 - e as f64 - rig as f64;
    let mut checks = vec![AuditCheck::new(
        "pointline-count",
        Scope::Framework,
        None,
        Some(ElementKind::Identity),
        &[("v", v as f64), ("e", e as f64), ("rig", rig as f64)],
        "2*v - e - rig = 0",
        count,
        count == 0.0,
        "point-line Maxwell count: an isostatic system has 2*(points + lines) - constraints - 3 = 0",
    )];
    let ids = centered.object_ids();
    for g in group.elements().iter().filter(|g| !g.is_identity()) {
        let edge_sigma = constraint_permutation(&centered, &g.sigma)?;
        let mut fixed = BTreeMap::from([
            (ConstraintKind::Pp, 0),
            (ConstraintKind::Pl, 0),
            (ConstraintKind::Ll, 0),
        ]);
        for (k, c) in centered.constraints.iter().enumerate() {
            if edge_sigma.apply(k) == k {
                *fixed.get_mut(&c.kind).unwrap() += 1;
            }
        }
        let b: usize = fixed.values().sum();
        let j = g.sigma.fixed_points();
        let kind = classify_element(&g.orthogonal)?;
        let rho_v = permutation_matrix(&g.sigma).kronecker(&g.orthogonal);
        let tr_s = snap_trace(kind, g.trace());
        let tr_rig = snap_trace(kind, restricted_trace(&centered.rigid_basis(), &rho_v)?);
        let value = j as f64 * tr_s - b as f64 - tr_rig;
        let (rule, requirement, citation) = if kind == ElementKind::Reflection {
            (
                "pointline-reflection",
                "1 - (b_pp + b_pl + b_ll) = 0",
                "point-line reflection count: an isostatic system has exactly one constraint fixed by each reflection",
            )
        } else {
            (
                "pointline-symmetric-count",
                "j*tr(S) - b - tr(rig) = 0",
                "symmetry-adapted point-line count: an isostatic system has zero character on every element",
            )
        };
        checks.push(AuditCheck::new(
            rule,
            Scope::Framework,
            Some(cycle_notation(&g.sigma, &ids)),
            Some(kind),
            &[
                ("j", j as f64),
                ("b_pp", fixed[&ConstraintKind::Pp] as f64),
                ("b_pl", fixed[&ConstraintKind::Pl] as f64),
                ("b_ll", fixed[&ConstraintKind::Ll] as f64),
                ("tr_sp", tr_s),
                ("tr_rig", tr_rig),
            ],
            requirement,
            value,
            value.abs() < 1e-8,
            citation,
        ));
    }
    Ok(AuditReport { checks })
}
