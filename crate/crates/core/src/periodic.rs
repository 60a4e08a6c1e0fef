//! Periodic bar-joint frameworks with a fixed lattice.
//!
//! A framework is given by one representative point per translation orbit
//! and one quotient edge `(i, j, n)` per edge orbit, joining `p_i` to
//! `p_j + L n`. Periodic velocities are constant on orbits, so the quotient
//! rigidity matrix has `|E_p|` rows and `d |V_p|` columns.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::characters::{
    check_balance, classify_element, cycle_notation, snap_trace, AuditCheck, AuditReport,
    ElementKind, Scope,
};
use crate::error::{Error, Result};
use crate::linalg::{restricted_trace, SubspaceBasis, TolerancedMatrix, DEFAULT_RANK_TOLERANCE};
use crate::model::VertexId;
use crate::rigidity::RigidityAnalysis;
use crate::symmetry::{permutation_matrix, symmetry_equation_residual, Permutation};

/// Tolerance for integrality and orthogonality tests on lattice data.
pub const LATTICE_TOLERANCE: f64 = 1e-8;

/// Largest absolute entry of the integer matrices searched by
/// [`detect_point_group`].
pub const POINT_GROUP_SEARCH_BOUND: i64 = 2;

/// Quotient edge `(i, j, n)` on orbit indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeOrbit {
    pub i: usize,
    pub j: usize,
    pub offset: Vec<i64>,
}

impl EdgeOrbit {
    /// Orders the ends so that `i <= j`; a loop keeps a lexicographically
    /// positive offset.
    pub fn normalized(i: usize, j: usize, offset: Vec<i64>) -> Self {
        let flip = i > j || (i == j && offset.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0));
        if flip {
            Self {
                i: j,
                j: i,
                offset: offset.iter().map(|x| -x).collect(),
            }
        } else {
            Self { i, j, offset }
        }
    }
}

#[derive(Clone, Debug)]
pub struct PeriodicFramework {
    dimension: usize,
    lattice: DMatrix<f64>,
    lattice_inverse: DMatrix<f64>,
    orbit_ids: Vec<VertexId>,
    points: Vec<DVector<f64>>,
    edges: Vec<EdgeOrbit>,
}

impl PeriodicFramework {
    /// `lattice` holds the generators as columns. Representatives must lie in
    /// the fundamental cell `L [0, 1)^d`.
    pub fn new(
        dimension: usize,
        lattice: DMatrix<f64>,
        orbits: impl IntoIterator<Item = (VertexId, Vec<f64>)>,
        edges: impl IntoIterator<Item = (VertexId, VertexId, Vec<i64>)>,
    ) -> Result<Self> {
        let d = dimension;
        if d == 0 || lattice.shape() != (d, d) {
            return Err(Error::InvalidPeriodic(format!(
                "lattice must be {d} x {d}, got {:?}",
                lattice.shape()
            )));
        }
        if !lattice.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidPeriodic(
                "lattice has a non-finite entry".into(),
            ));
        }
        let sv = lattice.singular_values();
        if sv.min() <= 1e-12 * sv.max().max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidPeriodic("lattice is singular".into()));
        }
        let lattice_inverse = lattice.clone().try_inverse().expect("nonsingular");
        let mut map = BTreeMap::new();
        for (id, p) in orbits {
            if p.len() != d || !p.iter().all(|x| x.is_finite()) {
                return Err(Error::InvalidPeriodic(format!(
                    "orbit {id} needs {d} finite coordinates"
                )));
            }
            if map.insert(id, DVector::from_vec(p)).is_some() {
                return Err(Error::InvalidPeriodic(format!("duplicate orbit id {id}")));
            }
        }
        if map.is_empty() {
            return Err(Error::InvalidPeriodic("no orbits".into()));
        }
        let orbit_ids: Vec<VertexId> = map.keys().copied().collect();
        let points: Vec<DVector<f64>> = map.into_values().collect();
        for (k, p) in points.iter().enumerate() {
            let f = &lattice_inverse * p;
            if f.iter().any(|&x| !(-1e-12..1.0).contains(&x)) {
                return Err(Error::InvalidPeriodic(format!(
                    "orbit {} lies outside the fundamental cell",
                    orbit_ids[k]
                )));
            }
        }
        let mut normalized = Vec::new();
        let mut seen = HashMap::new();
        for (a, b, offset) in edges {
            let i = orbit_ids
                .binary_search(&a)
                .map_err(|_| Error::UnknownVertex(a))?;
            let j = orbit_ids
                .binary_search(&b)
                .map_err(|_| Error::UnknownVertex(b))?;
            if offset.len() != d {
                return Err(Error::InvalidPeriodic(format!(
                    "edge ({a}, {b}) needs a {d}-entry offset"
                )));
            }
            if i == j && offset.iter().all(|&x| x == 0) {
                return Err(Error::InvalidPeriodic(format!(
                    "edge ({a}, {a}) is a loop without offset"
                )));
            }
            let e = EdgeOrbit::normalized(i, j, offset);
            if seen.insert(e.clone(), normalized.len()).is_some() {
                return Err(Error::InvalidPeriodic(format!(
                    "duplicate edge orbit ({a}, {b})"
                )));
            }
            normalized.push(e);
        }
        let pf = Self {
            dimension: d,
            lattice,
            lattice_inverse,
            orbit_ids,
            points,
            edges: normalized,
        };
        for e in &pf.edges {
            if pf.bond(e).norm() <= 1e-12 * (1.0 + pf.lattice.amax()) {
                return Err(Error::ZeroBond {
                    i: pf.orbit_ids[e.i],
                    j: pf.orbit_ids[e.j],
                });
            }
        }
        Ok(pf)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn lattice(&self) -> &DMatrix<f64> {
        &self.lattice
    }

    pub fn orbit_ids(&self) -> &[VertexId] {
        &self.orbit_ids
    }

    pub fn point(&self, i: usize) -> &DVector<f64> {
        &self.points[i]
    }

    pub fn edges(&self) -> &[EdgeOrbit] {
        &self.edges
    }

    pub fn vertex_orbit_count(&self) -> usize {
        self.points.len()
    }

    pub fn edge_orbit_count(&self) -> usize {
        self.edges.len()
    }

    fn offset_vector(&self, n: &[i64]) -> DVector<f64> {
        let n = DVector::from_iterator(n.len(), n.iter().map(|&x| x as f64));
        &self.lattice * n
    }

    /// `p_i - p_j - L n`.
    pub fn bond(&self, e: &EdgeOrbit) -> DVector<f64> {
        &self.points[e.i] - &self.points[e.j] - self.offset_vector(&e.offset)
    }

    pub fn rigidity_entries(&self) -> DMatrix<f64> {
        let d = self.dimension;
        let mut r = DMatrix::zeros(self.edges.len(), d * self.points.len());
        for (row, e) in self.edges.iter().enumerate() {
            let b = self.bond(e);
            for k in 0..d {
                r[(row, d * e.i + k)] += b[k];
                r[(row, d * e.j + k)] -= b[k];
            }
        }
        r
    }

    /// Periodic rigid flexes. A rigid motion `x -> A x + c` is periodic only
    /// if `A L = 0`, so these are the `d` translations.
    pub fn translation_basis(&self) -> SubspaceBasis {
        let d = self.dimension;
        let m = DMatrix::from_fn(d * self.points.len(), d, |r, c| {
            f64::from(u8::from(r % d == c))
        });
        SubspaceBasis::from_spanning(&m, 1e-9)
    }

    /// The same framework over the sublattice generated by `k W_1, ..., k W_d`.
    ///
    /// Orbit `id` in cell `c` (mixed radix index in `0..k^d`) gets the id
    /// `id * k^d + c`.
    pub fn supercell(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidPeriodic(
                "supercell factor must be positive".into(),
            ));
        }
        let d = self.dimension;
        let cells = k.pow(d as u32);
        let ki = k as i64;
        let cell_vec = |c: usize| -> Vec<i64> {
            let mut rem = c;
            (0..d)
                .map(|_| {
                    let x = (rem % k) as i64;
                    rem /= k;
                    x
                })
                .collect()
        };
        let cell_index =
            |v: &[i64]| -> usize { v.iter().rev().fold(0usize, |acc, &x| acc * k + x as usize) };
        let new_id = |i: usize, c: usize| self.orbit_ids[i] * cells as VertexId + c as VertexId;
        let mut orbits = Vec::with_capacity(self.points.len() * cells);
        for (i, p) in self.points.iter().enumerate() {
            for c in 0..cells {
                let q = p + self.offset_vector(&cell_vec(c));
                orbits.push((new_id(i, c), q.iter().copied().collect::<Vec<_>>()));
            }
        }
        let mut edges = Vec::with_capacity(self.edges.len() * cells);
        for e in &self.edges {
            for c in 0..cells {
                let target: Vec<i64> = cell_vec(c)
                    .iter()
                    .zip(&e.offset)
                    .map(|(a, b)| a + b)
                    .collect();
                let cell: Vec<i64> = target.iter().map(|x| x.rem_euclid(ki)).collect();
                let offset: Vec<i64> = target.iter().map(|x| x.div_euclid(ki)).collect();
                edges.push((new_id(e.i, c), new_id(e.j, cell_index(&cell)), offset));
            }
        }
        Self::new(d, &self.lattice * k as f64, orbits, edges)
    }
}

pub fn periodic_rigidity_matrix(pf: &PeriodicFramework) -> Result<TolerancedMatrix> {
    periodic_rigidity_matrix_with_tolerance(pf, DEFAULT_RANK_TOLERANCE)
}

pub fn periodic_rigidity_matrix_with_tolerance(
    pf: &PeriodicFramework,
    tol: f64,
) -> Result<TolerancedMatrix> {
    TolerancedMatrix::new(pf.rigidity_entries(), tol)
}

pub fn analyze_periodic(pf: &PeriodicFramework, tol: f64) -> Result<RigidityAnalysis> {
    RigidityAnalysis::from_parts(
        periodic_rigidity_matrix_with_tolerance(pf, tol)?,
        pf.translation_basis(),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodicCounts {
    pub vertex_orbits: usize,
    pub edge_orbits: usize,
    pub rank: usize,
    pub kernel_dim: usize,
    pub m_p: usize,
    pub s_p: usize,
    /// `d |V_p| - |E_p| - d`.
    pub maxwell: i64,
}

pub fn periodic_counts(pf: &PeriodicFramework) -> Result<PeriodicCounts> {
    periodic_counts_with_tolerance(pf, DEFAULT_RANK_TOLERANCE)
}

pub fn periodic_counts_with_tolerance(pf: &PeriodicFramework, tol: f64) -> Result<PeriodicCounts> {
    let a = analyze_periodic(pf, tol)?;
    let d = pf.dimension as i64;
    let maxwell = d * pf.vertex_orbit_count() as i64 - pf.edge_orbit_count() as i64 - d;
    let counts = PeriodicCounts {
        vertex_orbits: pf.vertex_orbit_count(),
        edge_orbits: pf.edge_orbit_count(),
        rank: a.rank,
        kernel_dim: a.flex_basis.dim(),
        m_p: a.mechanisms,
        s_p: a.stresses,
        maxwell,
    };
    check_balance(
        &a,
        0,
        (a.mechanisms as f64 - a.stresses as f64 - maxwell as f64).abs(),
    )?;
    Ok(counts)
}

/// A coset `g + T` of the translation lattice, acting on orbits.
#[derive(Clone, Debug)]
pub struct PointGroupElement {
    pub orthogonal: DMatrix<f64>,
    /// Translation part, reduced into the fundamental cell.
    pub translation: DVector<f64>,
    /// Integer matrix with `S L = L M`.
    pub lattice_map: DMatrix<i64>,
    /// Orbit permutation.
    pub sigma: Permutation,
    /// `S p_i + t = p_sigma(i) + L k_i`.
    pub offsets: Vec<Vec<i64>>,
    pub edge_sigma: Permutation,
}

impl PointGroupElement {
    pub fn trace(&self) -> f64 {
        self.orthogonal.trace()
    }

    pub fn is_identity(&self) -> bool {
        self.lattice_map == DMatrix::identity(self.lattice_map.nrows(), self.lattice_map.ncols())
            && self.sigma.is_identity()
    }

    /// `pi_n ⊗ S` on periodic velocities.
    pub fn vertex_operator(&self) -> DMatrix<f64> {
        permutation_matrix(&self.sigma).kronecker(&self.orthogonal)
    }

    pub fn edge_operator(&self) -> DMatrix<f64> {
        permutation_matrix(&self.edge_sigma)
    }

    fn key(&self) -> (Vec<i64>, Vec<usize>) {
        (
            self.lattice_map.iter().copied().collect(),
            self.sigma.images().to_vec(),
        )
    }
}

fn near_integer(x: f64) -> Option<i64> {
    let r = x.round();
    ((x - r).abs() < LATTICE_TOLERANCE).then_some(r as i64)
}

fn is_orthogonal(s: &DMatrix<f64>) -> f64 {
    (s.transpose() * s - DMatrix::identity(s.nrows(), s.ncols())).amax()
}

/// Checks that `x -> S x + t` maps the framework onto itself modulo the
/// lattice and records its action. `Ok(None)` means it is a lattice symmetry
/// that does not preserve the framework.
pub fn match_point_group_element(
    pf: &PeriodicFramework,
    orthogonal: &DMatrix<f64>,
    translation: &DVector<f64>,
) -> Result<Option<PointGroupElement>> {
    let d = pf.dimension;
    if orthogonal.shape() != (d, d) || translation.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "point-group element must act on R^{d}"
        )));
    }
    let deviation = is_orthogonal(orthogonal);
    if deviation > LATTICE_TOLERANCE {
        return Err(Error::NotOrthogonal(deviation));
    }
    let m = &pf.lattice_inverse * orthogonal * &pf.lattice;
    let lattice_map = DMatrix::from_iterator(
        d,
        d,
        m.iter()
            .map(|&x| near_integer(x))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::LatticeIncompatible(format!("L^-1 S L is not integral: {m}")))?,
    );
    let frac = &pf.lattice_inverse * translation;
    let reduced = &pf.lattice * frac.map(|x| x - (x + 1e-12).floor());
    let n = pf.points.len();
    let mut images = Vec::with_capacity(n);
    let mut offsets = Vec::with_capacity(n);
    for p in &pf.points {
        let q = orthogonal * p + &reduced;
        let hit = (0..n).find_map(|j| {
            let f = &pf.lattice_inverse * (&q - &pf.points[j]);
            f.iter()
                .map(|&x| near_integer(x))
                .collect::<Option<Vec<_>>>()
                .map(|k| (j, k))
        });
        let Some((j, k)) = hit else { return Ok(None) };
        images.push(j);
        offsets.push(k);
    }
    let Some(sigma) = Permutation::from_images(images) else {
        return Ok(None);
    };
    let index: HashMap<&EdgeOrbit, usize> =
        pf.edges.iter().enumerate().map(|(k, e)| (e, k)).collect();
    let mut edge_images = Vec::with_capacity(pf.edges.len());
    for e in &pf.edges {
        let offset: Vec<i64> = (0..d)
            .map(|r| {
                offsets[e.j][r] - offsets[e.i][r]
                    + (0..d)
                        .map(|c| lattice_map[(r, c)] * e.offset[c])
                        .sum::<i64>()
            })
            .collect();
        let image = EdgeOrbit::normalized(sigma.apply(e.i), sigma.apply(e.j), offset);
        let Some(&k) = index.get(&image) else {
            return Ok(None);
        };
        edge_images.push(k);
    }
    let Some(edge_sigma) = Permutation::from_images(edge_images) else {
        return Ok(None);
    };
    Ok(Some(PointGroupElement {
        orthogonal: orthogonal.clone(),
        translation: reduced,
        lattice_map,
        sigma,
        offsets,
        edge_sigma,
    }))
}

/// Finite group of cosets of the lattice, identity first.
#[derive(Clone, Debug)]
pub struct PointGroup {
    elements: Vec<PointGroupElement>,
}

impl PointGroup {
    /// Sorts the elements and checks closure under composition.
    pub fn from_elements(mut elements: Vec<PointGroupElement>) -> Result<Self> {
        elements.sort_by_key(|g| (!g.is_identity(), g.key()));
        elements.dedup_by(|a, b| a.key() == b.key());
        if !elements.first().is_some_and(PointGroupElement::is_identity) {
            return Err(Error::ClosureFailure("identity is missing".into()));
        }
        let keys: HashMap<_, usize> = elements
            .iter()
            .enumerate()
            .map(|(k, g)| (g.key(), k))
            .collect();
        for a in &elements {
            for b in &elements {
                let m = &a.lattice_map * &b.lattice_map;
                let sigma = a.sigma.compose(&b.sigma);
                let key = (m.iter().copied().collect(), sigma.images().to_vec());
                if !keys.contains_key(&key) {
                    return Err(Error::ClosureFailure(
                        "point group is not closed under composition".into(),
                    ));
                }
            }
        }
        Ok(Self { elements })
    }

    pub fn trivial(pf: &PeriodicFramework) -> Self {
        let d = pf.dimension;
        let g = match_point_group_element(pf, &DMatrix::identity(d, d), &DVector::zeros(d))
            .ok()
            .flatten()
            .expect("identity preserves every framework");
        Self { elements: vec![g] }
    }

    pub fn elements(&self) -> &[PointGroupElement] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }
}

/// Point group from user-supplied `(S, t)` candidates.
pub fn point_group_from_candidates(
    pf: &PeriodicFramework,
    candidates: &[(DMatrix<f64>, DVector<f64>)],
) -> Result<PointGroup> {
    let mut elements = vec![PointGroup::trivial(pf).elements[0].clone()];
    for (k, (s, t)) in candidates.iter().enumerate() {
        match match_point_group_element(pf, s, t)? {
            Some(g) => elements.push(g),
            None => {
                return Err(Error::InvalidPeriodic(format!(
                    "candidate {k} does not map the framework onto itself"
                )))
            }
        }
    }
    PointGroup::from_elements(elements)
}

/// Searches integer matrices `M` with entries in `-2..=2` for which
/// `L M L^-1` is orthogonal, and translations sending the first orbit to
/// each orbit. Planar frameworks only; other dimensions get the trivial
/// group.
pub fn detect_point_group(pf: &PeriodicFramework) -> Result<PointGroup> {
    if pf.dimension != 2 {
        return Ok(PointGroup::trivial(pf));
    }
    let b = POINT_GROUP_SEARCH_BOUND;
    let range = || -b..=b;
    let mut elements = Vec::new();
    for m00 in range() {
        for m01 in range() {
            for m10 in range() {
                for m11 in range() {
                    if (m00 * m11 - m01 * m10).abs() != 1 {
                        continue;
                    }
                    let m = DMatrix::from_row_slice(
                        2,
                        2,
                        &[m00 as f64, m01 as f64, m10 as f64, m11 as f64],
                    );
                    let s = &pf.lattice * m * &pf.lattice_inverse;
                    if is_orthogonal(&s) > LATTICE_TOLERANCE {
                        continue;
                    }
                    for target in &pf.points {
                        let t = target - &s * &pf.points[0];
                        if let Some(g) = match_point_group_element(pf, &s, &t)? {
                            elements.push(g);
                        }
                    }
                }
            }
        }
    }
    PointGroup::from_elements(elements)
}

/// `R - pi_e^T R pi_v` per element.
pub fn periodic_symmetry_residuals(pf: &PeriodicFramework, group: &PointGroup) -> Vec<f64> {
    let r = pf.rigidity_entries();
    group
        .elements()
        .iter()
        .map(|g| symmetry_equation_residual(&r, &g.edge_operator(), &g.vertex_operator()))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct PeriodicCharacterRow {
    pub element: usize,
    pub cycles: String,
    pub kind: ElementKind,
    pub translation: Vec<f64>,
    pub fixed_vertex_orbits: usize,
    pub fixed_edge_orbits: usize,
    pub tr_sp: f64,
    pub tr_rig: f64,
    pub mech: f64,
    pub stress: f64,
    /// `j tr(S) - b - tr(rig)`.
    pub rhs: f64,
}

impl PeriodicCharacterRow {
    pub fn balance_residual(&self) -> f64 {
        (self.mech - self.stress - self.rhs).abs()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PeriodicCharacterTable {
    pub counts: PeriodicCounts,
    pub rows: Vec<PeriodicCharacterRow>,
}

impl PeriodicCharacterTable {
    pub fn max_balance_residual(&self) -> f64 {
        self.rows
            .iter()
            .map(PeriodicCharacterRow::balance_residual)
            .fold(0.0, f64::max)
    }
}

pub fn periodic_fowler_guest(
    pf: &PeriodicFramework,
    group: &PointGroup,
) -> Result<PeriodicCharacterTable> {
    periodic_fowler_guest_with_tolerance(pf, group, DEFAULT_RANK_TOLERANCE)
}

pub fn periodic_fowler_guest_with_tolerance(
    pf: &PeriodicFramework,
    group: &PointGroup,
    tol: f64,
) -> Result<PeriodicCharacterTable> {
    let analysis = analyze_periodic(pf, tol)?;
    let counts = periodic_counts_with_tolerance(pf, tol)?;
    let mut rows = Vec::with_capacity(group.order());
    for (k, g) in group.elements().iter().enumerate() {
        let pi_v = g.vertex_operator();
        let pi_e = g.edge_operator();
        let j = g.sigma.fixed_points();
        let b = g.edge_sigma.fixed_points();
        let tr_sp = g.trace();
        let tr_rig = restricted_trace(&analysis.rigid_basis, &pi_v)?;
        let row = PeriodicCharacterRow {
            element: k,
            cycles: cycle_notation(&g.sigma, &pf.orbit_ids),
            kind: classify_element(&g.orthogonal)?,
            translation: g.translation.iter().copied().collect(),
            fixed_vertex_orbits: j,
            fixed_edge_orbits: b,
            tr_sp,
            tr_rig,
            mech: restricted_trace(&analysis.mechanism_basis, &pi_v)?,
            stress: restricted_trace(&analysis.stress_basis, &pi_e)?,
            rhs: j as f64 * tr_sp - b as f64 - tr_rig,
        };
        check_balance(&analysis, k, row.balance_residual())?;
        rows.push(row);
    }
    Ok(PeriodicCharacterTable { counts, rows })
}

/// Kind, reduced translation and orbit cycles, e.g. `reflection t=(0, 0.5) (1 2)`.
pub fn element_label(pf: &PeriodicFramework, g: &PointGroupElement) -> String {
    let kind = classify_element(&g.orthogonal).unwrap_or(ElementKind::Unclassified);
    let t: Vec<String> = g
        .translation
        .iter()
        .map(|x| format!("{}", (x * 1e9).round() / 1e9 + 0.0))
        .collect();
    format!(
        "{kind} t=({}) {}",
        t.join(", "),
        cycle_notation(&g.sigma, &pf.orbit_ids)
    )
}

const PERIODIC_CITATION: &str =
    "periodic Maxwell count: a periodic isostatic framework has d|V_p| - |E_p| - d = 0 and zero periodic character for every point-group element";

/// Periodic Maxwell count and one symmetry-adapted count per non-identity
/// coset.
pub fn periodic_audit(pf: &PeriodicFramework, group: &PointGroup) -> AuditReport {
    let d = pf.dimension as f64;
    let (v, e) = (pf.vertex_orbit_count() as f64, pf.edge_orbit_count() as f64);
    let value = d * v - e - d;
    let mut checks = vec![AuditCheck::new(
        "periodic-count",
        Scope::Framework,
        None,
        Some(ElementKind::Identity),
        &[("d", d), ("v_p", v), ("e_p", e)],
        "d*|V_p| - |E_p| - d = 0",
        value,
        value == 0.0,
        PERIODIC_CITATION,
    )];
    for g in group.elements().iter().filter(|g| !g.is_identity()) {
        let j = g.sigma.fixed_points() as f64;
        let b = g.edge_sigma.fixed_points() as f64;
        let kind = classify_element(&g.orthogonal).unwrap_or(ElementKind::Unclassified);
        let tr = snap_trace(kind, g.trace());
        let value = j * tr - b - tr;
        checks.push(AuditCheck::new(
            "periodic-symmetric-count",
            Scope::Framework,
            Some(element_label(pf, g)),
            Some(kind),
            &[("j_p", j), ("b_p", b), ("tr_sp", tr)],
            "j_p*tr(S) - b_p - tr(S) = 0",
            value,
            value.abs() < LATTICE_TOLERANCE,
            PERIODIC_CITATION,
        ));
    }
    AuditReport { checks }
}
