//! Planar pin-jointed body frameworks and frameworks derived from vertex
//! partitions.
//!
//! Columns hold two velocity entries per pin (sorted by id) followed by
//! `(v_x, v_y, a)` per body; rows come in pairs, one pair per membership,
//! ordered by body and then by pin.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::characters::{
    check_balance, classify_element, cycle_notation, AuditCheck, AuditReport, ElementKind, Scope,
};
use crate::error::{Error, Result};
use crate::linalg::{restricted_trace, SubspaceBasis, TolerancedMatrix, DEFAULT_RANK_TOLERANCE};
use crate::model::{Framework, VertexId, VertexPartition};
use crate::rigidity::RigidityAnalysis;
use crate::symmetry::{
    colored_automorphisms_pruned, distance_filter, fit_point_isometry, permutation_matrix,
    symmetry_equation_residual, ColoredGraph, Permutation, SpatialSymmetry, SymmetryGroup,
    DEFAULT_VERTEX_BOUND,
};

#[derive(Clone, Debug)]
pub struct BodyFramework {
    pin_ids: Vec<VertexId>,
    pins: Vec<[f64; 2]>,
    /// Pin indices of each body, sorted.
    bodies: Vec<Vec<usize>>,
    /// `(pin, body)` index pairs in row order.
    memberships: Vec<(usize, usize)>,
}

fn perp(v: [f64; 2]) -> [f64; 2] {
    [-v[1], v[0]]
}

impl BodyFramework {
    /// Every pin must lie in at least two bodies, every body must hold at
    /// least two distinct pins and the pin-body incidence graph must be
    /// connected.
    pub fn new(
        pins: impl IntoIterator<Item = (VertexId, [f64; 2])>,
        bodies: Vec<Vec<VertexId>>,
    ) -> Result<Self> {
        let pin_map: BTreeMap<VertexId, [f64; 2]> = {
            let mut m = BTreeMap::new();
            for (id, p) in pins {
                if !p.iter().all(|x| x.is_finite()) {
                    return Err(Error::InvalidBody(format!(
                        "pin {id} has a non-finite coordinate"
                    )));
                }
                if m.insert(id, p).is_some() {
                    return Err(Error::InvalidBody(format!("duplicate pin id {id}")));
                }
            }
            m
        };
        let pin_ids: Vec<VertexId> = pin_map.keys().copied().collect();
        let pins: Vec<[f64; 2]> = pin_map.values().copied().collect();
        let mut indexed = Vec::with_capacity(bodies.len());
        for (k, body) in bodies.iter().enumerate() {
            let mut members = BTreeSet::new();
            for &id in body {
                let i = pin_ids
                    .binary_search(&id)
                    .map_err(|_| Error::UnknownVertex(id))?;
                if !members.insert(i) {
                    return Err(Error::InvalidBody(format!("body {k} lists pin {id} twice")));
                }
            }
            if members.len() < 2 {
                return Err(Error::InvalidBody(format!(
                    "body {k} has fewer than two pins"
                )));
            }
            indexed.push(members.into_iter().collect::<Vec<_>>());
        }
        let memberships: Vec<(usize, usize)> = indexed
            .iter()
            .enumerate()
            .flat_map(|(e, members)| members.iter().map(move |&i| (i, e)))
            .collect();
        let mut counts = vec![0usize; pins.len()];
        for &(i, _) in &memberships {
            counts[i] += 1;
        }
        if let Some(i) = counts.iter().position(|&c| c < 2) {
            return Err(Error::InvalidBody(format!(
                "pin {} lies in fewer than two bodies",
                pin_ids[i]
            )));
        }
        let bf = Self {
            pin_ids,
            pins,
            bodies: indexed,
            memberships,
        };
        if !bf.incidence_connected() {
            return Err(Error::InvalidBody(
                "pin-body incidence graph is disconnected".into(),
            ));
        }
        Ok(bf)
    }

    fn incidence_connected(&self) -> bool {
        let n = self.pins.len();
        let total = n + self.bodies.len();
        let mut adj = vec![Vec::new(); total];
        for &(i, e) in &self.memberships {
            adj[i].push(n + e);
            adj[n + e].push(i);
        }
        let mut seen = vec![false; total];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if !std::mem::replace(&mut seen[w], true) {
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    pub fn pin_ids(&self) -> &[VertexId] {
        &self.pin_ids
    }

    pub fn pin(&self, i: usize) -> [f64; 2] {
        self.pins[i]
    }

    pub fn pin_count(&self) -> usize {
        self.pins.len()
    }

    pub fn body_count(&self) -> usize {
        self.bodies.len()
    }

    pub fn membership_count(&self) -> usize {
        self.memberships.len()
    }

    /// Pin ids of each body.
    pub fn bodies(&self) -> Vec<Vec<VertexId>> {
        self.bodies
            .iter()
            .map(|b| b.iter().map(|&i| self.pin_ids[i]).collect())
            .collect()
    }

    pub fn memberships(&self) -> &[(usize, usize)] {
        &self.memberships
    }

    pub fn centroid(&self, body: usize) -> [f64; 2] {
        let members = &self.bodies[body];
        let k = members.len() as f64;
        let (sx, sy) = members.iter().fold((0.0, 0.0), |(sx, sy), &i| {
            (sx + self.pins[i][0], sy + self.pins[i][1])
        });
        [sx / k, sy / k]
    }

    pub fn column_count(&self) -> usize {
        2 * self.pins.len() + 3 * self.bodies.len()
    }

    fn body_column(&self, body: usize) -> usize {
        2 * self.pins.len() + 3 * body
    }

    /// The 2c × (2n + 3e) rigidity matrix.
    pub fn rigidity_entries(&self) -> DMatrix<f64> {
        let mut r = DMatrix::zeros(2 * self.memberships.len(), self.column_count());
        for (k, &(i, e)) in self.memberships.iter().enumerate() {
            let (p, c) = (self.pins[i], self.centroid(e));
            let b = self.body_column(e);
            r[(2 * k, 2 * i)] = 1.0;
            r[(2 * k + 1, 2 * i + 1)] = 1.0;
            r[(2 * k, b)] = -1.0;
            r[(2 * k + 1, b + 1)] = -1.0;
            r[(2 * k, b + 2)] = -(p[1] - c[1]);
            r[(2 * k + 1, b + 2)] = p[0] - c[0];
        }
        r
    }

    /// Translations `u = v = t, a = 0` and the rotation `u_i = p_i^perp,
    /// v_e = p_e^perp`, whose angular entry is fixed by the block sign.
    pub fn rigid_motion_vectors(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.column_count(), 3);
        for (i, p) in self.pins.iter().enumerate() {
            m[(2 * i, 0)] = 1.0;
            m[(2 * i + 1, 1)] = 1.0;
            let q = perp(*p);
            m[(2 * i, 2)] = q[0];
            m[(2 * i + 1, 2)] = q[1];
        }
        for e in 0..self.bodies.len() {
            let b = self.body_column(e);
            let q = perp(self.centroid(e));
            m[(b, 0)] = 1.0;
            m[(b + 1, 1)] = 1.0;
            m[(b, 2)] = q[0];
            m[(b + 1, 2)] = q[1];
            m[(b + 2, 2)] = -1.0;
        }
        m
    }

    pub fn rigid_basis(&self) -> SubspaceBasis {
        SubspaceBasis::from_spanning(&self.rigid_motion_vectors(), 1e-9)
    }

    fn colored_graph(&self) -> ColoredGraph {
        let n = self.pins.len();
        let colors = (0..n + self.bodies.len())
            .map(|k| u32::from(k >= n))
            .collect();
        let mut g = ColoredGraph::new(colors);
        for &(i, e) in &self.memberships {
            g.add_edge(i, n + e, 0);
        }
        g
    }

    /// Pins followed by body centroids, as columns.
    fn object_matrix(&self) -> DMatrix<f64> {
        let n = self.pins.len();
        DMatrix::from_fn(2, n + self.bodies.len(), |r, c| {
            if c < n {
                self.pins[c][r]
            } else {
                self.centroid(c - n)[r]
            }
        })
    }

    fn membership_permutation(&self, sigma: &Permutation) -> Result<Permutation> {
        let n = self.pins.len();
        let lookup: BTreeMap<(usize, usize), usize> = self
            .memberships
            .iter()
            .enumerate()
            .map(|(k, &m)| (m, k))
            .collect();
        let images = self
            .memberships
            .iter()
            .map(|&(i, e)| {
                let image = (sigma.apply(i), sigma.apply(n + e) - n);
                lookup.get(&image).copied()
            })
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| {
                Error::ClosureFailure("symmetry does not preserve memberships".into())
            })?;
        Permutation::from_images(images)
            .ok_or_else(|| Error::ClosureFailure("membership map is not a bijection".into()))
    }

    /// `(rho_pin ⊗ S) ⊕ (rho_body ⊗ S+)` and `rho_mem ⊗ S` for one element.
    pub fn operators(&self, g: &SpatialSymmetry) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let n = self.pins.len();
        let s = &g.orthogonal;
        let mut s_plus = DMatrix::zeros(3, 3);
        s_plus.view_mut((0, 0), (2, 2)).copy_from(s);
        s_plus[(2, 2)] = g.determinant().signum();
        let mut dom = DMatrix::zeros(self.column_count(), self.column_count());
        for i in 0..n {
            let j = g.sigma.apply(i);
            dom.view_mut((2 * j, 2 * i), (2, 2)).copy_from(s);
        }
        for e in 0..self.bodies.len() {
            let f = g.sigma.apply(n + e) - n;
            dom.view_mut((self.body_column(f), self.body_column(e)), (3, 3))
                .copy_from(&s_plus);
        }
        let codom = permutation_matrix(&self.membership_permutation(&g.sigma)?).kronecker(s);
        Ok((dom, codom))
    }
}

pub fn body_rigidity_matrix(bf: &BodyFramework) -> Result<TolerancedMatrix> {
    body_rigidity_matrix_with_tolerance(bf, DEFAULT_RANK_TOLERANCE)
}

pub fn body_rigidity_matrix_with_tolerance(
    bf: &BodyFramework,
    tol: f64,
) -> Result<TolerancedMatrix> {
    TolerancedMatrix::new(bf.rigidity_entries(), tol)
}

pub fn analyze_body(bf: &BodyFramework, tol: f64) -> Result<RigidityAnalysis> {
    RigidityAnalysis::from_parts(
        body_rigidity_matrix_with_tolerance(bf, tol)?,
        bf.rigid_basis(),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BodyCounts {
    pub pins: usize,
    pub bodies: usize,
    pub memberships: usize,
    /// `2c`.
    pub rows: usize,
    /// `2n + 3e - 3`.
    pub free_dof: i64,
    pub rank: usize,
    pub kernel_dim: usize,
    pub stresses: usize,
    pub infinitesimally_rigid: bool,
    pub isostatic: bool,
}

pub fn body_counts(bf: &BodyFramework) -> Result<BodyCounts> {
    body_counts_with_tolerance(bf, DEFAULT_RANK_TOLERANCE)
}

pub fn body_counts_with_tolerance(bf: &BodyFramework, tol: f64) -> Result<BodyCounts> {
    let a = analyze_body(bf, tol)?;
    let rows = 2 * bf.membership_count();
    let free_dof = (2 * bf.pin_count() + 3 * bf.body_count()) as i64 - 3;
    let kernel_dim = a.flex_basis.dim();
    Ok(BodyCounts {
        pins: bf.pin_count(),
        bodies: bf.body_count(),
        memberships: bf.membership_count(),
        rows,
        free_dof,
        rank: a.rank,
        kernel_dim,
        stresses: a.stresses,
        infinitesimally_rigid: kernel_dim == 3,
        isostatic: rows as i64 == free_dof && a.rank == rows,
    })
}

/// Isometries of the pins that permute pins among pins and bodies among
/// bodies, fitted on pins together with body centroids.
pub fn body_symmetry_group(bf: &BodyFramework) -> Result<SymmetryGroup> {
    let objects = bf.object_matrix();
    let pair_ok = distance_filter(&objects);
    let elements =
        colored_automorphisms_pruned(&bf.colored_graph(), DEFAULT_VERTEX_BOUND, &pair_ok)?
            .iter()
            .filter_map(|sigma| fit_point_isometry(&objects, sigma, true))
            .collect();
    SymmetryGroup::from_elements(elements)
}

/// `R - rho_codom(g^-1) R rho_dom(g)` per element.
pub fn body_symmetry_residuals(bf: &BodyFramework, group: &SymmetryGroup) -> Result<Vec<f64>> {
    let r = bf.rigidity_entries();
    group
        .elements()
        .iter()
        .map(|g| {
            let (dom, codom) = bf.operators(g)?;
            Ok(symmetry_equation_residual(&r, &codom, &dom))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct BodyCharacterRow {
    pub element: usize,
    pub cycles: String,
    pub kind: ElementKind,
    pub fixed_pins: usize,
    pub fixed_bodies: usize,
    pub fixed_memberships: usize,
    pub tr_sp: f64,
    pub tr_sp_plus: f64,
    pub tr_rig: f64,
    pub mech: f64,
    pub stress: f64,
    /// `tr(S+) n_body + tr(S) n_pin - tr(S) c - tr(rig)`.
    pub rhs: f64,
}

impl BodyCharacterRow {
    pub fn balance_residual(&self) -> f64 {
        (self.mech - self.stress - self.rhs).abs()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BodyCharacterTable {
    pub counts: BodyCounts,
    pub rows: Vec<BodyCharacterRow>,
}

impl BodyCharacterTable {
    pub fn max_balance_residual(&self) -> f64 {
        self.rows
            .iter()
            .map(BodyCharacterRow::balance_residual)
            .fold(0.0, f64::max)
    }
}

fn object_ids(bf: &BodyFramework) -> Vec<String> {
    bf.pin_ids
        .iter()
        .map(|id| id.to_string())
        .chain((0..bf.body_count()).map(|e| format!("B{e}")))
        .collect()
}

fn body_cycles(bf: &BodyFramework, sigma: &Permutation) -> String {
    // Reuse the id-based notation with a numeric stand-in, then relabel.
    let labels = object_ids(bf);
    let stand_in: Vec<VertexId> = (0..labels.len() as VertexId).collect();
    let raw = cycle_notation(sigma, &stand_in);
    let mut out = String::new();
    let mut number = String::new();
    for ch in raw.chars().chain(std::iter::once(' ')) {
        if ch.is_ascii_digit() {
            number.push(ch);
        } else {
            if !number.is_empty() {
                out.push_str(&labels[number.parse::<usize>().expect("digits")]);
                number.clear();
            }
            out.push(ch);
        }
    }
    out.pop();
    out
}

pub fn body_fowler_guest(bf: &BodyFramework, group: &SymmetryGroup) -> Result<BodyCharacterTable> {
    body_fowler_guest_with_tolerance(bf, group, DEFAULT_RANK_TOLERANCE)
}

pub fn body_fowler_guest_with_tolerance(
    bf: &BodyFramework,
    group: &SymmetryGroup,
    tol: f64,
) -> Result<BodyCharacterTable> {
    let analysis = analyze_body(bf, tol)?;
    let counts = body_counts_with_tolerance(bf, tol)?;
    let n = bf.pin_count();
    let mut rows = Vec::with_capacity(group.order());
    for (k, g) in group.elements().iter().enumerate() {
        let (dom, codom) = bf.operators(g)?;
        let fixed_pins = (0..n).filter(|&i| g.sigma.apply(i) == i).count();
        let fixed_bodies = (n..n + bf.body_count())
            .filter(|&e| g.sigma.apply(e) == e)
            .count();
        let fixed_memberships = bf.membership_permutation(&g.sigma)?.fixed_points();
        let tr_sp = g.trace();
        let tr_sp_plus = tr_sp + g.determinant().signum();
        let tr_rig = restricted_trace(&analysis.rigid_basis, &dom)?;
        let mech = restricted_trace(&analysis.mechanism_basis, &dom)?;
        let stress = restricted_trace(&analysis.stress_basis, &codom)?;
        let rhs = tr_sp_plus * fixed_bodies as f64 + tr_sp * fixed_pins as f64
            - tr_sp * fixed_memberships as f64
            - tr_rig;
        let row = BodyCharacterRow {
            element: k,
            cycles: body_cycles(bf, &g.sigma),
            kind: classify_element(&g.orthogonal)?,
            fixed_pins,
            fixed_bodies,
            fixed_memberships,
            tr_sp,
            tr_sp_plus,
            tr_rig,
            mech,
            stress,
            rhs,
        };
        check_balance(&analysis, k, row.balance_residual())?;
        rows.push(row);
    }
    Ok(BodyCharacterTable { counts, rows })
}

/// Identity count `2c = 2n + 3e - 3` and, per reflection, exactly one fixed
/// body. `bar_bodies` marks bodies that stand for single bars, reported
/// separately.
pub fn body_reflection_checks(
    bf: &BodyFramework,
    group: &SymmetryGroup,
    scope: Scope,
    bar_bodies: &[bool],
) -> AuditReport {
    let n = bf.pin_count();
    let rows = 2 * bf.membership_count();
    let free = (2 * n + 3 * bf.body_count()) as f64 - 3.0;
    let value = rows as f64 - free;
    let mut checks = vec![AuditCheck::new(
        "body-count",
        scope.clone(),
        None,
        Some(ElementKind::Identity),
        &[
            ("n_pin", n as f64),
            ("n_body", bf.body_count() as f64),
            ("c", bf.membership_count() as f64),
        ],
        "2c - (2n + 3e - 3) = 0",
        value,
        value == 0.0,
        "body-pin count: an isostatic body framework has 2c = 2n + 3e - 3",
    )];
    for g in group.elements().iter().filter(|g| !g.is_identity()) {
        let Ok(kind) = classify_element(&g.orthogonal) else {
            continue;
        };
        if kind != ElementKind::Reflection {
            continue;
        }
        let fixed: Vec<usize> = (0..bf.body_count())
            .filter(|&e| g.sigma.apply(n + e) == n + e)
            .collect();
        let fixed_bars = fixed
            .iter()
            .filter(|&&e| bar_bodies.get(e).copied().unwrap_or(false))
            .count();
        let value = fixed.len() as f64 - 1.0;
        checks.push(AuditCheck::new(
            "body-reflection",
            scope.clone(),
            Some(body_cycles(bf, &g.sigma)),
            Some(kind),
            &[("fixed_bodies", fixed.len() as f64), ("fixed_bar_bodies", fixed_bars as f64)],
            "fixed_bodies - 1 = 0",
            value,
            value == 0.0,
            "body-pin reflection count: a reflection of an isostatic body framework fixes exactly one body",
        ));
    }
    AuditReport { checks }
}

/// A body framework derived from a bar-joint framework and a vertex
/// partition, with the bookkeeping needed to transfer flexes back.
#[derive(Clone, Debug)]
pub struct DerivedBodyFramework {
    pub body: BodyFramework,
    pub framework: Framework,
    /// Body index of each partition block, or `None` if it was dropped.
    pub block_bodies: Vec<Option<usize>>,
    /// Whether each body stands for a single crossing bar.
    pub bar_bodies: Vec<bool>,
    block_of: Vec<usize>,
}

/// Pins are the endpoints of crossing edges; bodies are the blocks that keep
/// at least two pins, then one two-pin body per crossing edge.
pub fn derive_from_partition(
    fw: &Framework,
    partition: &VertexPartition,
) -> Result<DerivedBodyFramework> {
    fw.ensure_structural()?;
    if fw.dimension() != 2 {
        return Err(Error::InvalidPartition("body frameworks are planar".into()));
    }
    partition.validate_for(fw.graph())?;
    let graph = fw.graph();
    if let Some(i) = graph.degrees().iter().position(|&d| d <= 1) {
        return Err(Error::InvalidPartition(format!(
            "vertex {} has degree at most one",
            graph.vertex_ids()[i]
        )));
    }
    let mut block_of = vec![0; fw.vertex_count()];
    for (k, block) in partition.blocks().iter().enumerate() {
        for &v in block {
            block_of[graph.index_of(v).expect("validated")] = k;
        }
    }
    let crossing: Vec<(usize, usize)> = graph
        .edge_indices()
        .into_iter()
        .filter(|&(a, b)| block_of[a] != block_of[b])
        .collect();
    let pin_set: BTreeSet<usize> = crossing.iter().flat_map(|&(a, b)| [a, b]).collect();
    let ids = graph.vertex_ids();
    let mut bodies = Vec::new();
    let mut bar_bodies = Vec::new();
    let mut block_bodies = Vec::new();
    for block in partition.blocks() {
        let pins: Vec<VertexId> = block
            .iter()
            .copied()
            .filter(|&v| pin_set.contains(&graph.index_of(v).expect("validated")))
            .collect();
        if pins.len() >= 2 {
            block_bodies.push(Some(bodies.len()));
            bodies.push(pins);
            bar_bodies.push(false);
        } else {
            block_bodies.push(None);
        }
    }
    for &(a, b) in &crossing {
        bodies.push(vec![ids[a], ids[b]]);
        bar_bodies.push(true);
    }
    if bodies.len() < 2 {
        return Err(Error::InvalidPartition(format!(
            "derived framework has {} bodies; at least two are needed",
            bodies.len()
        )));
    }
    let pins = pin_set.iter().map(|&i| {
        let p = fw.point(i);
        (ids[i], [p[0], p[1]])
    });
    let body = BodyFramework::new(pins, bodies)
        .map_err(|e| Error::InvalidPartition(format!("derived body framework is invalid: {e}")))?;
    Ok(DerivedBodyFramework {
        body,
        framework: fw.clone(),
        block_bodies,
        bar_bodies,
        block_of,
    })
}

impl DerivedBodyFramework {
    /// Reflection checks on the derived framework with its own symmetry group.
    pub fn audit(&self) -> Result<AuditReport> {
        let group = body_symmetry_group(&self.body)?;
        Ok(body_reflection_checks(
            &self.body,
            &group,
            Scope::Partition,
            &self.bar_bodies,
        ))
    }
}

/// Largest `|(u_i - u_j)·(p_i - p_j)|` over the edges of `fw`.
pub fn bar_compatibility_residual(fw: &Framework, u: &DVector<f64>) -> f64 {
    let d = fw.dimension();
    fw.graph()
        .edge_indices()
        .iter()
        .map(|&(i, j)| {
            (0..d)
                .map(|k| (u[d * i + k] - u[d * j + k]) * (fw.point(i)[k] - fw.point(j)[k]))
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max)
}

/// Bar-joint velocities induced by a body flex: pins keep their velocity,
/// other vertices follow their block's body, or the single surviving pin of
/// a dropped block.
pub fn flex_transfer(derived: &DerivedBodyFramework, flex: &DVector<f64>) -> Result<DVector<f64>> {
    let bf = &derived.body;
    let fw = &derived.framework;
    if flex.len() != bf.column_count() {
        return Err(Error::DimensionMismatch(format!(
            "flex has length {}, body framework has {} columns",
            flex.len(),
            bf.column_count()
        )));
    }
    let scale = 1.0 + flex.amax() * (1.0 + fw.diameter());
    let body_residual = (bf.rigidity_entries() * flex).amax();
    if body_residual > 1e-8 * scale {
        return Err(Error::Compatibility(body_residual));
    }
    let ids = fw.graph().vertex_ids();
    let pin_index: BTreeMap<VertexId, usize> = bf
        .pin_ids()
        .iter()
        .enumerate()
        .map(|(k, &id)| (id, k))
        .collect();
    let pin_velocity = |k: usize| [flex[2 * k], flex[2 * k + 1]];
    let mut u = DVector::zeros(2 * fw.vertex_count());
    for i in 0..fw.vertex_count() {
        let velocity = if let Some(&k) = pin_index.get(&ids[i]) {
            pin_velocity(k)
        } else {
            let block = derived.block_of[i];
            match derived.block_bodies[block] {
                Some(e) => {
                    let b = bf.body_column(e);
                    let c = bf.centroid(e);
                    let p = fw.point(i);
                    let r = perp([p[0] - c[0], p[1] - c[1]]);
                    let a = flex[b + 2];
                    [flex[b] - a * r[0], flex[b + 1] - a * r[1]]
                }
                None => (0..fw.vertex_count())
                    .find(|&w| derived.block_of[w] == block && pin_index.contains_key(&ids[w]))
                    .map_or([0.0, 0.0], |w| pin_velocity(pin_index[&ids[w]])),
            }
        };
        u[2 * i] = velocity[0];
        u[2 * i + 1] = velocity[1];
    }
    let residual = bar_compatibility_residual(fw, &u);
    if residual > 1e-8 * scale {
        return Err(Error::Compatibility(residual));
    }
    Ok(u)
}
