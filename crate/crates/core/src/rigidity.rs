//! Bar-joint rigidity matrices, rigid-motion flexes and the Maxwell count.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{SubspaceBasis, TolerancedMatrix, DEFAULT_RANK_TOLERANCE};
use crate::model::Framework;

/// Relative cut used when orthonormalizing the rigid-motion spanning set.
const RIGID_SPAN_TOLERANCE: f64 = 1e-9;

/// Kernel/cokernel decomposition of a rigidity matrix.
#[derive(Clone, Debug)]
pub struct RigidityAnalysis {
    pub matrix: TolerancedMatrix,
    pub rank: usize,
    pub rigid_basis: SubspaceBasis,
    pub flex_basis: SubspaceBasis,
    pub mechanism_basis: SubspaceBasis,
    pub stress_basis: SubspaceBasis,
    /// Number of independent non-trivial flexes.
    pub mechanisms: usize,
    /// Number of independent self-stresses.
    pub stresses: usize,
    pub infinitesimally_rigid: bool,
    pub isostatic: bool,
}

impl RigidityAnalysis {
    /// Splits `matrix` into flex, rigid, mechanism and stress spaces.
    ///
    /// Fails if `rigid_basis` is not contained in the kernel.
    pub fn from_parts(matrix: TolerancedMatrix, rigid_basis: SubspaceBasis) -> Result<Self> {
        let rank = matrix.numeric_rank();
        let flex_basis = matrix.kernel_basis();
        let stress_basis = matrix.cokernel_basis();
        let leakage = flex_basis.leakage(rigid_basis.columns());
        if leakage > crate::linalg::INVARIANCE_TOLERANCE * (1.0 + rigid_basis.dim() as f64) {
            return Err(Error::InvarianceViolation {
                leakage,
                limit: crate::linalg::INVARIANCE_TOLERANCE,
            });
        }
        let mechanism_basis = flex_basis.complement_of(&rigid_basis);
        let mechanisms = mechanism_basis.dim();
        let stresses = stress_basis.dim();
        Ok(Self {
            matrix,
            rank,
            rigid_basis,
            flex_basis,
            mechanism_basis,
            stress_basis,
            mechanisms,
            stresses,
            infinitesimally_rigid: mechanisms == 0,
            isostatic: mechanisms == 0 && stresses == 0,
        })
    }
}

/// Rigidity-matrix entries for `edges` between points of dimension `d`.
pub(crate) fn bar_joint_entries(
    d: usize,
    points: &[&[f64]],
    edges: &[(usize, usize)],
) -> DMatrix<f64> {
    let mut r = DMatrix::zeros(edges.len(), d * points.len());
    for (row, &(i, j)) in edges.iter().enumerate() {
        for k in 0..d {
            let diff = points[i][k] - points[j][k];
            r[(row, d * i + k)] = diff;
            r[(row, d * j + k)] = -diff;
        }
    }
    r
}

fn framework_entries(fw: &Framework) -> DMatrix<f64> {
    let points: Vec<&[f64]> = (0..fw.vertex_count()).map(|i| fw.point(i)).collect();
    bar_joint_entries(fw.dimension(), &points, &fw.graph().edge_indices())
}

/// The e × d·v rigidity matrix.
pub fn rigidity_matrix(fw: &Framework) -> Result<TolerancedMatrix> {
    rigidity_matrix_with_tolerance(fw, DEFAULT_RANK_TOLERANCE)
}

pub fn rigidity_matrix_with_tolerance(fw: &Framework, tol: f64) -> Result<TolerancedMatrix> {
    fw.ensure_structural()?;
    TolerancedMatrix::new(framework_entries(fw), tol)
}

/// Sorted indices of unpinned vertices.
pub fn free_vertex_indices(fw: &Framework) -> Vec<usize> {
    (0..fw.vertex_count())
        .filter(|&i| !fw.graph().is_pinned_index(i))
        .collect()
}

/// Rigidity matrix with the columns of pinned vertices removed.
pub fn pinned_rigidity_matrix(fw: &Framework) -> Result<TolerancedMatrix> {
    pinned_rigidity_matrix_with_tolerance(fw, DEFAULT_RANK_TOLERANCE)
}

pub fn pinned_rigidity_matrix_with_tolerance(fw: &Framework, tol: f64) -> Result<TolerancedMatrix> {
    fw.ensure_structural()?;
    let pinned = fw.graph().pinned().len();
    if pinned == 0 || pinned == fw.vertex_count() {
        return Err(Error::PinnedSet);
    }
    let full = framework_entries(fw);
    let d = fw.dimension();
    let free = free_vertex_indices(fw);
    let mut r = DMatrix::zeros(full.nrows(), d * free.len());
    for (c, &v) in free.iter().enumerate() {
        for k in 0..d {
            r.set_column(d * c + k, &full.column(d * v + k));
        }
    }
    TolerancedMatrix::new(r, tol)
}

/// Velocity fields of the d translations and d(d-1)/2 rotations about the
/// origin, as columns (unnormalized).
pub fn rigid_motion_vectors(d: usize, points: &[&[f64]]) -> DMatrix<f64> {
    let n = points.len();
    let rotations = d * (d - 1) / 2;
    let mut m = DMatrix::zeros(d * n, d + rotations);
    for (i, p) in points.iter().enumerate() {
        for k in 0..d {
            m[(d * i + k, k)] = 1.0;
        }
        let mut col = d;
        for a in 0..d {
            for b in a + 1..d {
                m[(d * i + a, col)] = -p[b];
                m[(d * i + b, col)] = p[a];
                col += 1;
            }
        }
    }
    m
}

/// Orthonormal basis of the rigid-motion flexes; the dimension drops below
/// d(d+1)/2 for degenerate placements.
pub fn rigid_motion_basis(fw: &Framework) -> SubspaceBasis {
    let points: Vec<&[f64]> = (0..fw.vertex_count()).map(|i| fw.point(i)).collect();
    SubspaceBasis::from_spanning(
        &rigid_motion_vectors(fw.dimension(), &points),
        RIGID_SPAN_TOLERANCE,
    )
}

pub fn analyze(fw: &Framework) -> Result<RigidityAnalysis> {
    analyze_with_tolerance(fw, DEFAULT_RANK_TOLERANCE)
}

pub fn analyze_with_tolerance(fw: &Framework, tol: f64) -> Result<RigidityAnalysis> {
    let matrix = rigidity_matrix_with_tolerance(fw, tol)?;
    RigidityAnalysis::from_parts(matrix, rigid_motion_basis(fw))
}

/// Analysis of the grounded framework: pinned vertices are fixed absolutely,
/// so there are no rigid-motion flexes.
pub fn analyze_grounded(fw: &Framework, tol: f64) -> Result<RigidityAnalysis> {
    let matrix = pinned_rigidity_matrix_with_tolerance(fw, tol)?;
    let cols = matrix.ncols();
    RigidityAnalysis::from_parts(matrix, SubspaceBasis::empty(cols))
}

/// `d·v − e − d(d+1)/2`.
pub fn maxwell_count(d: usize, v: usize, e: usize) -> i64 {
    (d * v) as i64 - e as i64 - (d * (d + 1) / 2) as i64
}

/// Stacked squared edge lengths, whose Jacobian is twice the rigidity matrix.
pub fn squared_length_map(fw: &Framework, x: &DVector<f64>) -> DVector<f64> {
    let d = fw.dimension();
    let edges = fw.graph().edge_indices();
    DVector::from_iterator(
        edges.len(),
        edges.iter().map(|&(i, j)| {
            (0..d)
                .map(|k| {
                    let diff = x[d * i + k] - x[d * j + k];
                    diff * diff
                })
                .sum::<f64>()
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Framework;

    fn fw(points: &[(i64, [f64; 2])], edges: &[(i64, i64)]) -> Framework {
        Framework::new(
            2,
            points.iter().map(|(i, p)| (*i, p.to_vec())),
            edges.iter().copied(),
        )
    }

    #[test]
    fn single_bar_matrix() {
        let bar = fw(&[(1, [0.0, 0.0]), (2, [1.0, 0.0])], &[(1, 2)]);
        let r = rigidity_matrix(&bar).unwrap();
        assert_eq!(
            r.entries(),
            &DMatrix::from_row_slice(1, 4, &[-1.0, 0.0, 1.0, 0.0])
        );
    }

    #[test]
    fn scaled_coordinates_scale_matrix() {
        let t = fw(
            &[(1, [0.0, 0.0]), (2, [4.0, 0.0]), (3, [0.5, 3.0])],
            &[(1, 2), (2, 3), (3, 1)],
        );
        let scaled = t.transformed(&(DMatrix::identity(2, 2) * 2.5), &DVector::zeros(2));
        let a = rigidity_matrix(&t).unwrap().into_entries();
        let b = rigidity_matrix(&scaled).unwrap().into_entries();
        assert!((a * 2.5 - b).amax() < 1e-12);
    }

    #[test]
    fn right_triangle_rank() {
        // Hand row reduction of the 3×6 matrix gives three pivots.
        let t = fw(
            &[(1, [0.0, 0.0]), (2, [4.0, 0.0]), (3, [0.0, 3.0])],
            &[(1, 2), (2, 3), (1, 3)],
        );
        assert_eq!(rigidity_matrix(&t).unwrap().numeric_rank(), 3);
    }

    #[test]
    fn pinned_single_bar() {
        let bar = fw(&[(1, [0.0, 0.0]), (2, [1.0, 0.0])], &[(1, 2)]).with_pinned([1]);
        let r = pinned_rigidity_matrix(&bar).unwrap();
        assert_eq!(r.entries(), &DMatrix::from_row_slice(1, 2, &[1.0, 0.0]));
    }

    #[test]
    fn pinned_triangle_two_pins() {
        let t = fw(
            &[(1, [0.0, 0.0]), (2, [1.0, 0.0]), (3, [0.0, 1.0])],
            &[(1, 2), (2, 3), (1, 3)],
        )
        .with_pinned([1, 2]);
        let r = pinned_rigidity_matrix(&t).unwrap();
        assert_eq!(r.entries().shape(), (3, 2));
        assert_eq!(r.numeric_rank(), 2);
        let a = analyze_grounded(&t, DEFAULT_RANK_TOLERANCE).unwrap();
        assert_eq!(a.mechanisms, 0);
        assert_eq!(a.stresses, 1);
    }

    #[test]
    fn pinned_set_errors() {
        let bar = fw(&[(1, [0.0, 0.0]), (2, [1.0, 0.0])], &[(1, 2)]);
        assert!(matches!(
            pinned_rigidity_matrix(&bar),
            Err(Error::PinnedSet)
        ));
        let all = bar.clone().with_pinned([1, 2]);
        assert!(matches!(
            pinned_rigidity_matrix(&all),
            Err(Error::PinnedSet)
        ));
    }

    #[test]
    fn rigid_basis_dimensions() {
        let single = Framework::new(2, vec![(1, vec![0.0, 0.0])], vec![]);
        assert_eq!(rigid_motion_basis(&single).dim(), 2);
        let bar = fw(&[(1, [0.0, 0.0]), (2, [1.0, 0.0])], &[(1, 2)]);
        assert_eq!(rigid_motion_basis(&bar).dim(), 3);
        let bar3 = Framework::new(
            3,
            vec![(1, vec![0.0, 0.0, 0.0]), (2, vec![1.0, 2.0, 0.5])],
            vec![(1, 2)],
        );
        assert_eq!(rigid_motion_basis(&bar3).dim(), 5);
    }

    #[test]
    fn triangle_is_isostatic() {
        let t = fw(
            &[(1, [0.0, 0.0]), (2, [1.0, 0.0]), (3, [0.0, 1.0])],
            &[(1, 2), (2, 3), (1, 3)],
        );
        let a = analyze(&t).unwrap();
        assert_eq!((a.mechanisms, a.stresses), (0, 0));
        assert!(a.isostatic);
    }

    #[test]
    fn square_four_cycle_has_one_mechanism() {
        let sq = fw(
            &[
                (1, [0.0, 0.0]),
                (2, [1.0, 0.0]),
                (3, [1.0, 1.0]),
                (4, [0.0, 1.0]),
            ],
            &[(1, 2), (2, 3), (3, 4), (4, 1)],
        );
        let a = analyze(&sq).unwrap();
        assert_eq!((a.mechanisms, a.stresses), (1, 0));
        assert!(!a.infinitesimally_rigid);
    }

    #[test]
    fn k4_on_square_has_one_stress() {
        let k4 = fw(
            &[
                (1, [0.0, 0.0]),
                (2, [1.0, 0.0]),
                (3, [1.0, 1.0]),
                (4, [0.0, 1.0]),
            ],
            &[(1, 2), (2, 3), (3, 4), (4, 1), (1, 3), (2, 4)],
        );
        let a = analyze(&k4).unwrap();
        assert_eq!(a.stress_basis.dim(), 1);
        assert_eq!(a.mechanisms, 0);
    }

    #[test]
    fn maxwell_examples() {
        assert_eq!(maxwell_count(2, 8, 12), 1);
        assert_eq!(maxwell_count(2, 6, 9), 0);
        assert_eq!(maxwell_count(3, 3, 3), 0);
    }
}
