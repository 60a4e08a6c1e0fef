//! Spatial symmetries: graph automorphisms realized by isometries.

mod automorphism;
mod representation;

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

pub use automorphism::{
    colored_automorphisms, colored_automorphisms_pruned, edge_permutation, graph_automorphisms,
    graph_automorphisms_bounded, graph_automorphisms_pruned, ColoredGraph, Permutation,
    DEFAULT_VERTEX_BOUND,
};
pub use representation::{
    exterior_square_trace, permutation_matrix, representations, rigid_character,
    symmetry_equation_residual, trace_rho_rig, verify_symmetry_equation, vertex_operator,
    ElementRepresentation, RepresentationSet,
};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::Framework;

/// Relative acceptance threshold for isometry residuals.
pub const ISOMETRY_TOLERANCE: f64 = 1e-8;

/// Largest allowed mismatch between a composed element and its stored fit.
const COMPOSITION_DRIFT: f64 = 1e-7;

/// A vertex permutation together with the isometry `p -> S p + t` realizing it.
#[derive(Clone, Debug, PartialEq)]
pub struct SpatialSymmetry {
    pub sigma: Permutation,
    pub orthogonal: DMatrix<f64>,
    pub translation: DVector<f64>,
    /// Largest realization error `|S p_i + t - p_sigma(i)|`.
    pub residual: f64,
}

impl SpatialSymmetry {
    pub fn identity(n: usize, d: usize) -> Self {
        Self {
            sigma: Permutation::identity(n),
            orthogonal: DMatrix::identity(d, d),
            translation: DVector::zeros(d),
            residual: 0.0,
        }
    }

    pub fn dimension(&self) -> usize {
        self.orthogonal.nrows()
    }

    pub fn determinant(&self) -> f64 {
        self.orthogonal.determinant()
    }

    pub fn trace(&self) -> f64 {
        self.orthogonal.trace()
    }

    pub fn is_identity(&self) -> bool {
        self.sigma.is_identity()
    }
}

/// Least-squares orthogonal map between the point columns of `points` and
/// their permuted copy.
///
/// With `centered`, both clouds are centered on their (common) centroid and a
/// translation is fitted; otherwise the isometry is linear. When the points
/// span a proper subspace the map is extended by the identity on its
/// orthogonal complement.
pub fn fit_point_isometry(
    points: &DMatrix<f64>,
    sigma: &Permutation,
    centered: bool,
) -> Option<SpatialSymmetry> {
    let (d, n) = points.shape();
    if sigma.len() != n {
        return None;
    }
    let centroid = if centered && n > 0 {
        points.column_mean()
    } else {
        DVector::zeros(d)
    };
    let p = DMatrix::from_fn(d, n, |r, c| points[(r, c)] - centroid[r]);
    let q = DMatrix::from_fn(d, n, |r, c| p[(r, sigma.apply(c))]);
    let s = procrustes(&p, &q);
    let translation = &centroid - &s * &centroid;
    let mut residual: f64 = 0.0;
    for i in 0..n {
        let mapped = &s * points.column(i) + &translation;
        residual = residual.max((mapped - points.column(sigma.apply(i))).norm());
    }
    let mut diameter: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            diameter = diameter.max((points.column(i) - points.column(j)).norm());
        }
    }
    let scale = if centered {
        diameter
    } else {
        diameter.max(points.amax())
    };
    (residual < ISOMETRY_TOLERANCE * (1.0 + scale)).then(|| SpatialSymmetry {
        sigma: sigma.clone(),
        orthogonal: s,
        translation,
        residual,
    })
}

fn procrustes(p: &DMatrix<f64>, q: &DMatrix<f64>) -> DMatrix<f64> {
    let d = p.nrows();
    let h = q * p.transpose();
    let svd = linalg::svd(&h);
    let (u, v_t) = (svd.u, svd.v_t);
    let largest = svd.singular_values.max();
    let mut s = DMatrix::identity(d, d);
    if largest > 0.0 {
        for k in 0..svd.singular_values.len() {
            if svd.singular_values[k] > 1e-10 * largest {
                let vk = v_t.row(k).transpose();
                s += u.column(k) * vk.transpose() - &vk * vk.transpose();
            }
        }
    }
    // Polar factor removes round-off from the complement extension.
    let svd = linalg::svd(&s);
    svd.u * svd.v_t
}

/// Fits the isometry realizing `sigma` on the framework points.
pub fn fit_isometry(fw: &Framework, sigma: &Permutation) -> Option<SpatialSymmetry> {
    fit_point_isometry(&fw.point_matrix(), sigma, true)
}

/// A finite set of spatial symmetries closed under composition.
#[derive(Clone, Debug)]
pub struct SymmetryGroup {
    elements: Vec<SpatialSymmetry>,
    index: HashMap<Permutation, usize>,
}

impl SymmetryGroup {
    /// Sorts the elements by permutation and verifies closure.
    pub fn from_elements(mut elements: Vec<SpatialSymmetry>) -> Result<Self> {
        elements.sort_by(|a, b| a.sigma.cmp(&b.sigma));
        elements.dedup_by(|a, b| a.sigma == b.sigma);
        if !elements.first().is_some_and(SpatialSymmetry::is_identity) {
            return Err(Error::ClosureFailure("identity is missing".into()));
        }
        let index: HashMap<Permutation, usize> = elements
            .iter()
            .enumerate()
            .map(|(i, g)| (g.sigma.clone(), i))
            .collect();
        let group = Self { elements, index };
        group.check_closure()?;
        Ok(group)
    }

    fn check_closure(&self) -> Result<()> {
        for a in &self.elements {
            for b in &self.elements {
                let composed = a.sigma.compose(&b.sigma);
                let Some(&k) = self.index.get(&composed) else {
                    return Err(Error::ClosureFailure(format!(
                        "composition {:?} of {:?} and {:?} is missing",
                        composed.images(),
                        a.sigma.images(),
                        b.sigma.images()
                    )));
                };
                let c = &self.elements[k];
                let s_drift = (&a.orthogonal * &b.orthogonal - &c.orthogonal).amax();
                let t_drift =
                    (&a.orthogonal * &b.translation + &a.translation - &c.translation).amax();
                let scale = 1.0 + c.translation.amax();
                if s_drift > COMPOSITION_DRIFT || t_drift > COMPOSITION_DRIFT * scale {
                    return Err(Error::ClosureFailure(format!(
                        "isometry of composed element {:?} drifts by {:.3e}",
                        composed.images(),
                        s_drift.max(t_drift)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn trivial(n: usize, d: usize) -> Self {
        Self::from_elements(vec![SpatialSymmetry::identity(n, d)]).expect("identity is a group")
    }

    pub fn elements(&self) -> &[SpatialSymmetry] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, k: usize) -> &SpatialSymmetry {
        &self.elements[k]
    }

    pub fn position(&self, sigma: &Permutation) -> Option<usize> {
        self.index.get(sigma).copied()
    }

    /// Index of `elements[a] ∘ elements[b]`.
    pub fn compose(&self, a: usize, b: usize) -> usize {
        self.index[&self.elements[a].sigma.compose(&self.elements[b].sigma)]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.index[&self.elements[a].sigma.inverse()]
    }

    /// Conjugacy classes as sorted index lists, ordered by smallest member.
    pub fn conjugacy_classes(&self) -> Vec<Vec<usize>> {
        let mut assigned = vec![false; self.order()];
        let mut classes = Vec::new();
        for g in 0..self.order() {
            if assigned[g] {
                continue;
            }
            let mut class: Vec<usize> = (0..self.order())
                .map(|h| self.compose(self.compose(h, g), self.inverse(h)))
                .collect();
            class.sort_unstable();
            class.dedup();
            for &c in &class {
                assigned[c] = true;
            }
            classes.push(class);
        }
        classes
    }
}

/// Pair predicate accepting partial maps that preserve the distances between
/// points (columns of `points`) and to their centroid; a permutation passing
/// it on all pairs extends to an isometry.
pub fn distance_filter(points: &DMatrix<f64>) -> impl Fn(usize, usize, usize, usize) -> bool {
    let n = points.ncols();
    let centroid = if n == 0 {
        DVector::zeros(points.nrows())
    } else {
        points.column_mean()
    };
    let dist = DMatrix::from_fn(n, n, |i, j| (points.column(i) - points.column(j)).norm());
    let radius: Vec<f64> = (0..n)
        .map(|i| (points.column(i) - &centroid).norm())
        .collect();
    let tol = 1e-6 * (1.0 + dist.max() + radius.iter().fold(0.0_f64, |a, &b| a.max(b)));
    move |u, v, x, y| {
        if u == v {
            (radius[u] - radius[x]).abs() <= tol
        } else {
            (dist[(u, v)] - dist[(x, y)]).abs() <= tol
        }
    }
}

/// Graph automorphisms of a proper framework that are realized by isometries.
pub fn spatial_symmetry_group(fw: &Framework) -> Result<SymmetryGroup> {
    spatial_symmetry_group_bounded(fw, DEFAULT_VERTEX_BOUND)
}

pub fn spatial_symmetry_group_bounded(fw: &Framework, bound: usize) -> Result<SymmetryGroup> {
    fw.ensure_structural()?;
    fw.ensure_proper()?;
    let points = fw.point_matrix();
    let pair_ok = distance_filter(&points);
    let elements = graph_automorphisms_pruned(fw.graph(), bound, &pair_ok)?
        .iter()
        .filter_map(|sigma| fit_point_isometry(&points, sigma, true))
        .collect();
    SymmetryGroup::from_elements(elements)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fw2(points: &[[f64; 2]], edges: &[(i64, i64)]) -> Framework {
        Framework::new(
            2,
            points
                .iter()
                .enumerate()
                .map(|(i, p)| (i as i64 + 1, p.to_vec())),
            edges.iter().copied(),
        )
    }

    #[test]
    fn identity_fit_is_exact() {
        let t = fw2(
            &[[0.0, 0.0], [3.0, 0.5], [1.0, 2.0]],
            &[(1, 2), (2, 3), (1, 3)],
        );
        let g = fit_isometry(&t, &Permutation::identity(3)).unwrap();
        assert!((g.orthogonal.clone() - DMatrix::identity(2, 2)).amax() < 1e-14);
        assert!(g.translation.amax() < 1e-14);
        assert!(g.residual < 1e-14);
    }

    #[test]
    fn rectangle_rotation_by_one_is_rejected() {
        let r = fw2(
            &[[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]],
            &[(1, 2), (2, 3), (3, 4), (4, 1)],
        );
        let shift = Permutation::from_images(vec![1, 2, 3, 0]).unwrap();
        assert!(fit_isometry(&r, &shift).is_none());
    }

    #[test]
    fn scalene_triangle_is_asymmetric() {
        let t = fw2(
            &[[0.0, 0.0], [3.0, 0.0], [0.4, 1.7]],
            &[(1, 2), (2, 3), (1, 3)],
        );
        assert_eq!(spatial_symmetry_group(&t).unwrap().order(), 1);
    }

    #[test]
    fn equilateral_triangle_has_six() {
        let h = 3f64.sqrt() / 2.0;
        let t = fw2(
            &[[0.0, 0.0], [1.0, 0.0], [0.5, h]],
            &[(1, 2), (2, 3), (1, 3)],
        );
        let g = spatial_symmetry_group(&t).unwrap();
        assert_eq!(g.order(), 6);
        assert_eq!(g.conjugacy_classes().len(), 3);
    }

    #[test]
    fn collinear_swap_uses_mirror_extension() {
        let bar = fw2(&[[0.0, 0.0], [2.0, 0.0]], &[(1, 2)]);
        let g = spatial_symmetry_group(&bar).unwrap();
        assert_eq!(g.order(), 2);
        let swap = g.element(1);
        assert!(
            (swap.orthogonal.clone() - DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]))
                .amax()
                < 1e-12
        );
        assert!((swap.translation.clone() - DVector::from_vec(vec![2.0, 0.0])).amax() < 1e-12);
    }

    #[test]
    fn improper_framework_rejected() {
        let bar = fw2(&[[0.0, 0.0], [0.0, 0.0]], &[(1, 2)]);
        assert!(matches!(
            spatial_symmetry_group(&bar),
            Err(Error::NotProper(1, 2))
        ));
    }

    #[test]
    fn non_group_is_rejected() {
        let mut swap = SpatialSymmetry::identity(3, 2);
        swap.sigma = Permutation::from_images(vec![1, 2, 0]).unwrap();
        let r = SymmetryGroup::from_elements(vec![SpatialSymmetry::identity(3, 2), swap]);
        assert!(matches!(r, Err(Error::ClosureFailure(_))));
    }
}
