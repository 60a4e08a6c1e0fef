//! JSON file formats. Unknown fields are rejected everywhere.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bodypin::BodyFramework;
use crate::error::{Error, Result};
use crate::model::{Framework, VertexId, VertexPartition};
use crate::periodic::{point_group_from_candidates, PeriodicFramework, PointGroup};
use crate::pointline::{Constraint, ConstraintKind, PointLineSystem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexRecord {
    pub id: VertexId,
    pub coords: Vec<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub pinned: bool,
}

/// `{"dimension", "vertices": [{"id", "coords", "pinned"}], "edges": [[a, b]]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameworkFile {
    pub dimension: usize,
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<[VertexId; 2]>,
}

impl FrameworkFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// Builds the framework and checks structural validity.
    pub fn into_framework(self) -> Result<Framework> {
        let pinned: Vec<VertexId> = self
            .vertices
            .iter()
            .filter(|v| v.pinned)
            .map(|v| v.id)
            .collect();
        let fw = Framework::new(
            self.dimension,
            self.vertices.into_iter().map(|v| (v.id, v.coords)),
            self.edges.into_iter().map(|[a, b]| (a, b)),
        );
        let fw = if pinned.is_empty() {
            fw
        } else {
            fw.with_pinned(pinned)
        };
        fw.ensure_structural()?;
        Ok(fw)
    }

    pub fn from_framework(fw: &Framework) -> Self {
        let pinned = fw.graph().pinned();
        Self {
            dimension: fw.dimension(),
            vertices: fw
                .points()
                .map(|(id, c)| VertexRecord {
                    id,
                    coords: c.to_vec(),
                    pinned: pinned.contains(&id),
                })
                .collect(),
            edges: fw.graph().edges().iter().map(|&(a, b)| [a, b]).collect(),
        }
    }
}

pub fn parse_framework(text: &str) -> Result<Framework> {
    FrameworkFile::from_json(text)?.into_framework()
}

/// A list of vertex-id lists, used for partitions and explicit subgraphs.
pub fn parse_vertex_sets(text: &str) -> Result<Vec<Vec<VertexId>>> {
    Ok(serde_json::from_str(text)?)
}

pub fn parse_partition(text: &str) -> Result<VertexPartition> {
    Ok(VertexPartition::new(parse_vertex_sets(text)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectKind {
    Point,
    Line,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectRecord {
    pub id: VertexId,
    pub kind: ObjectKind,
    /// Point coordinates, or the point of the line closest to the origin.
    pub coords: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintRecord {
    pub ends: [VertexId; 2],
    pub kind: ConstraintKind,
    /// Distance, or angle in degrees for `ll`.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointLineFile {
    pub dimension: usize,
    pub vertices: Vec<ObjectRecord>,
    pub edges: Vec<ConstraintRecord>,
}

impl PointLineFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn into_system(self) -> Result<PointLineSystem> {
        if self.dimension != 2 {
            return Err(Error::InvalidPointLine(format!(
                "point-line systems are planar, got dimension {}",
                self.dimension
            )));
        }
        let pick = |kind| {
            self.vertices
                .iter()
                .filter(move |v| v.kind == kind)
                .map(|v| (v.id, v.coords))
        };
        let constraints = self
            .edges
            .iter()
            .map(|c| {
                let value = match c.kind {
                    ConstraintKind::Ll => c.value.to_radians(),
                    _ => c.value,
                };
                Constraint::new(c.kind, c.ends[0], c.ends[1], value)
            })
            .collect();
        PointLineSystem::new(pick(ObjectKind::Point), pick(ObjectKind::Line), constraints)
    }

    pub fn from_system(sys: &PointLineSystem) -> Self {
        let mut vertices: Vec<ObjectRecord> = sys
            .points()
            .iter()
            .map(|(&id, &coords)| ObjectRecord {
                id,
                kind: ObjectKind::Point,
                coords,
            })
            .chain(sys.lines().iter().map(|(&id, &coords)| ObjectRecord {
                id,
                kind: ObjectKind::Line,
                coords,
            }))
            .collect();
        vertices.sort_by_key(|v| v.id);
        Self {
            dimension: 2,
            vertices,
            edges: sys
                .constraints()
                .iter()
                .map(|c| ConstraintRecord {
                    ends: [c.ends.0, c.ends.1],
                    kind: c.kind,
                    value: match c.kind {
                        ConstraintKind::Ll => c.value.to_degrees(),
                        _ => c.value,
                    },
                })
                .collect(),
        }
    }
}

pub fn parse_point_line(text: &str) -> Result<PointLineSystem> {
    PointLineFile::from_json(text)?.into_system()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinRecord {
    pub id: VertexId,
    pub coords: [f64; 2],
}

/// `{"pins": [{"id", "coords"}], "bodies": [[pin ids]]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyFile {
    pub pins: Vec<PinRecord>,
    pub bodies: Vec<Vec<VertexId>>,
}

impl BodyFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn into_body_framework(self) -> Result<BodyFramework> {
        BodyFramework::new(self.pins.into_iter().map(|p| (p.id, p.coords)), self.bodies)
    }

    pub fn from_body_framework(bf: &BodyFramework) -> Self {
        Self {
            pins: bf
                .pin_ids()
                .iter()
                .enumerate()
                .map(|(i, &id)| PinRecord {
                    id,
                    coords: bf.pin(i),
                })
                .collect(),
            bodies: bf.bodies(),
        }
    }
}

pub fn parse_body(text: &str) -> Result<BodyFramework> {
    BodyFile::from_json(text)?.into_body_framework()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitRecord {
    pub id: VertexId,
    pub coords: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeOrbitRecord {
    pub i: VertexId,
    pub j: VertexId,
    pub offset: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateRecord {
    /// Orthogonal part, row by row.
    #[serde(rename = "S")]
    pub s: Vec<Vec<f64>>,
    pub t: Vec<f64>,
}

/// `lattice` lists the generators, one per entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodicFile {
    pub dimension: usize,
    pub lattice: Vec<Vec<f64>>,
    pub orbits: Vec<OrbitRecord>,
    pub edges: Vec<EdgeOrbitRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_group: Option<Vec<CandidateRecord>>,
}

fn square_matrix(rows: &[Vec<f64>], d: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidPeriodic(format!("{what} must be {d} x {d}")));
    }
    Ok(DMatrix::from_fn(d, d, |r, c| rows[r][c]))
}

impl PeriodicFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn to_framework(&self) -> Result<PeriodicFramework> {
        let d = self.dimension;
        // Generators are stored as rows here and as columns in the lattice.
        let lattice = square_matrix(&self.lattice, d, "lattice")?.transpose();
        PeriodicFramework::new(
            d,
            lattice,
            self.orbits.iter().map(|o| (o.id, o.coords.clone())),
            self.edges.iter().map(|e| (e.i, e.j, e.offset.clone())),
        )
    }

    /// Candidates as `(S, t)` pairs, if any were given.
    pub fn candidates(&self) -> Result<Option<Vec<(DMatrix<f64>, DVector<f64>)>>> {
        let d = self.dimension;
        self.point_group
            .as_ref()
            .map(|list| {
                list.iter()
                    .map(|c| {
                        if c.t.len() != d {
                            return Err(Error::InvalidPeriodic(format!("t must have {d} entries")));
                        }
                        Ok((square_matrix(&c.s, d, "S")?, DVector::from_vec(c.t.clone())))
                    })
                    .collect()
            })
            .transpose()
    }

    /// The supplied point group, or `None` if detection is left to the caller.
    pub fn point_group(&self, pf: &PeriodicFramework) -> Result<Option<PointGroup>> {
        self.candidates()?
            .map(|c| point_group_from_candidates(pf, &c))
            .transpose()
    }

    pub fn from_framework(pf: &PeriodicFramework) -> Self {
        let d = pf.dimension();
        let l = pf.lattice();
        let ids = pf.orbit_ids();
        Self {
            dimension: d,
            lattice: (0..d)
                .map(|c| l.column(c).iter().copied().collect())
                .collect(),
            orbits: ids
                .iter()
                .enumerate()
                .map(|(k, &id)| OrbitRecord {
                    id,
                    coords: pf.point(k).iter().copied().collect(),
                })
                .collect(),
            edges: pf
                .edges()
                .iter()
                .map(|e| EdgeOrbitRecord {
                    i: ids[e.i],
                    j: ids[e.j],
                    offset: e.offset.clone(),
                })
                .collect(),
            point_group: None,
        }
    }
}
