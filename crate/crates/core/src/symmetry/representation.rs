//! Matrix representations of a symmetry group on edges, vertices and
//! vertex velocities.

use nalgebra::DMatrix;

use super::{edge_permutation, Permutation, SpatialSymmetry, SymmetryGroup};
use crate::error::{Error, Result};
use crate::linalg::restricted_trace;
use crate::model::Framework;
use crate::rigidity::{rigid_motion_basis, rigidity_matrix};

/// Representation matrices of one group element.
#[derive(Clone, Debug)]
pub struct ElementRepresentation {
    pub edge_sigma: Permutation,
    /// Edge permutation matrix.
    pub rho_e: DMatrix<f64>,
    /// Vertex permutation matrix.
    pub rho_n: DMatrix<f64>,
    /// The orthogonal part `S`.
    pub rho_sp: DMatrix<f64>,
    /// `rho_n ⊗ S`, acting on stacked velocities.
    pub rho_v_hat: DMatrix<f64>,
}

#[derive(Clone, Debug)]
pub struct RepresentationSet {
    pub elements: Vec<ElementRepresentation>,
}

/// `P` with `P[sigma(i), i] = 1`.
pub fn permutation_matrix(p: &Permutation) -> DMatrix<f64> {
    let n = p.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(p.apply(i), i)] = 1.0;
    }
    m
}

/// `rho_n ⊗ S` restricted to the vertices in `indices` (which must be closed
/// under `sigma`), with blocks ordered as `indices`.
pub fn vertex_operator(
    sigma: &Permutation,
    s: &DMatrix<f64>,
    indices: &[usize],
) -> Result<DMatrix<f64>> {
    let d = s.nrows();
    let mut m = DMatrix::zeros(d * indices.len(), d * indices.len());
    for (c, &i) in indices.iter().enumerate() {
        let target = sigma.apply(i);
        let r = indices.iter().position(|&k| k == target).ok_or_else(|| {
            Error::DimensionMismatch(format!(
                "vertex subset is not closed under the permutation at index {i}"
            ))
        })?;
        m.view_mut((d * r, d * c), (d, d)).copy_from(s);
    }
    Ok(m)
}

fn element_representation(fw: &Framework, g: &SpatialSymmetry) -> Result<ElementRepresentation> {
    let edges = fw.graph().edge_indices();
    let edge_sigma = edge_permutation(&edges, &g.sigma).ok_or_else(|| {
        Error::ClosureFailure(format!(
            "{:?} is not a graph automorphism",
            g.sigma.images()
        ))
    })?;
    let rho_n = permutation_matrix(&g.sigma);
    let rho_v_hat = rho_n.kronecker(&g.orthogonal);
    Ok(ElementRepresentation {
        rho_e: permutation_matrix(&edge_sigma),
        edge_sigma,
        rho_n,
        rho_sp: g.orthogonal.clone(),
        rho_v_hat,
    })
}

pub fn representations(fw: &Framework, group: &SymmetryGroup) -> Result<RepresentationSet> {
    let elements = group
        .elements()
        .iter()
        .map(|g| element_representation(fw, g))
        .collect::<Result<_>>()?;
    Ok(RepresentationSet { elements })
}

/// Largest entry of `R - rho_e(g^-1) R rho_v_hat(g)`; `rho_e(g^-1)` is the
/// transpose of the permutation matrix `rho_e`.
pub fn symmetry_equation_residual(
    r: &DMatrix<f64>,
    rho_e: &DMatrix<f64>,
    rho_v_hat: &DMatrix<f64>,
) -> f64 {
    (r - rho_e.transpose() * r * rho_v_hat).amax()
}

/// Residual of the symmetry equation for every group element, in group order.
pub fn verify_symmetry_equation(fw: &Framework, group: &SymmetryGroup) -> Result<Vec<f64>> {
    let r = rigidity_matrix(fw)?.into_entries();
    let reps = representations(fw, group)?;
    Ok(reps
        .elements
        .iter()
        .map(|rep| symmetry_equation_residual(&r, &rep.rho_e, &rep.rho_v_hat))
        .collect())
}

/// `((tr S)^2 - tr(S^2)) / 2`, the character of the exterior square.
pub fn exterior_square_trace(s: &DMatrix<f64>) -> f64 {
    let t = s.trace();
    (t * t - (s * s).trace()) / 2.0
}

/// Character of the rigid motions of a framework spanning full dimension.
pub fn rigid_character(s: &DMatrix<f64>) -> f64 {
    s.trace() + exterior_square_trace(s)
}

/// Trace of `rho_v_hat(g)` on the rigid-motion subspace of `fw`.
pub fn trace_rho_rig(fw: &Framework, g: &SpatialSymmetry) -> Result<f64> {
    let rho = permutation_matrix(&g.sigma).kronecker(&g.orthogonal);
    restricted_trace(&rigid_motion_basis(fw), &rho)
}
