//! Tolerance-controlled dense linear algebra.
//!
//! Ranks, kernels and cokernels are all read off a singular value
//! decomposition. A singular value counts towards the rank when it exceeds
//! `rank_tolerance * max(sigma_max, 1)`, so the tolerance is relative for
//! matrices with large entries and absolute for small ones.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Default relative rank tolerance.
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-8;

/// Maximum component of an operator image allowed outside an invariant subspace.
pub const INVARIANCE_TOLERANCE: f64 = 1e-8;

/// Orthonormality tolerance for [`SubspaceBasis`] columns.
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-10;

/// A dense real matrix together with the tolerance used to decide its rank.
#[derive(Clone, Debug, PartialEq)]
pub struct TolerancedMatrix {
    entries: DMatrix<f64>,
    rank_tolerance: f64,
}

impl TolerancedMatrix {
    pub fn new(entries: DMatrix<f64>, rank_tolerance: f64) -> Result<Self> {
        if !rank_tolerance.is_finite() || rank_tolerance < 0.0 {
            return Err(Error::BadTolerance(rank_tolerance));
        }
        for col in 0..entries.ncols() {
            for row in 0..entries.nrows() {
                if !entries[(row, col)].is_finite() {
                    return Err(Error::NonFiniteEntry { row, col });
                }
            }
        }
        Ok(Self {
            entries,
            rank_tolerance,
        })
    }

    pub fn with_default_tolerance(entries: DMatrix<f64>) -> Result<Self> {
        Self::new(entries, DEFAULT_RANK_TOLERANCE)
    }

    /// Same entries, different rank tolerance.
    pub fn with_tolerance(&self, rank_tolerance: f64) -> Result<Self> {
        Self::new(self.entries.clone(), rank_tolerance)
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn rank_tolerance(&self) -> f64 {
        self.rank_tolerance
    }

    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    /// Singular values in decreasing order (`min(rows, cols)` of them).
    pub fn singular_values(&self) -> Vec<f64> {
        if self.nrows() == 0 || self.ncols() == 0 {
            return Vec::new();
        }
        svd(&self.entries).singular_values.iter().copied().collect()
    }

    /// Cut-off below which a singular value is treated as zero.
    pub fn threshold(&self) -> f64 {
        let largest = self.singular_values().first().copied().unwrap_or(0.0);
        threshold_for(largest, self.rank_tolerance)
    }

    pub fn numeric_rank(&self) -> usize {
        let values = self.singular_values();
        let cut = threshold_for(values.first().copied().unwrap_or(0.0), self.rank_tolerance);
        values.iter().filter(|&&s| s > cut).count()
    }

    /// Smallest retained and largest discarded singular value.
    pub fn spectral_gap(&self) -> (Option<f64>, Option<f64>) {
        let values = self.singular_values();
        let cut = threshold_for(values.first().copied().unwrap_or(0.0), self.rank_tolerance);
        let kept = values.iter().copied().filter(|&s| s > cut).last();
        let dropped = values.iter().copied().find(|&s| s <= cut);
        (kept, dropped)
    }

    /// Orthonormal basis of the right null space.
    pub fn kernel_basis(&self) -> SubspaceBasis {
        null_space(&self.entries, self.rank_tolerance)
    }

    /// Orthonormal basis of the left null space (kernel of the transpose).
    pub fn cokernel_basis(&self) -> SubspaceBasis {
        null_space(&self.entries.transpose(), self.rank_tolerance)
    }
}

fn threshold_for(largest: f64, tolerance: f64) -> f64 {
    tolerance * largest.max(1.0)
}

/// Singular value decomposition `m = u diag(s) v_t` with `s` decreasing.
///
/// `u` is `rows × k` and `v_t` is `k × cols` with `k = min(rows, cols)`.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    pub v_t: DMatrix<f64>,
}

impl Svd {
    /// Largest of the reconstruction error relative to `scale` and the
    /// deviations of `u` and `v_t` from orthonormality.
    fn defect(&self, m: &DMatrix<f64>, scale: f64) -> f64 {
        let mut us = self.u.clone();
        for (k, s) in self.singular_values.iter().enumerate() {
            us.column_mut(k).scale_mut(*s);
        }
        let k = self.singular_values.len();
        let eye = DMatrix::<f64>::identity(k, k);
        let reconstruction = (us * &self.v_t - m).amax() / scale;
        let u_dev = (self.u.transpose() * &self.u - &eye).amax();
        let v_dev = (&self.v_t * self.v_t.transpose() - &eye).amax();
        reconstruction.max(u_dev).max(v_dev)
    }

    fn sorted(mut self) -> Self {
        let mut order: Vec<usize> = (0..self.singular_values.len()).collect();
        order.sort_by(|&a, &b| self.singular_values[b].total_cmp(&self.singular_values[a]));
        self.singular_values =
            DVector::from_iterator(order.len(), order.iter().map(|&k| self.singular_values[k]));
        self.u = DMatrix::from_columns(
            &order
                .iter()
                .map(|&k| self.u.column(k).into_owned())
                .collect::<Vec<_>>(),
        );
        self.v_t = DMatrix::from_rows(
            &order
                .iter()
                .map(|&k| self.v_t.row(k).into_owned())
                .collect::<Vec<_>>(),
        );
        self
    }
}

fn nalgebra_svd(m: &DMatrix<f64>) -> Svd {
    let svd = m.clone().svd(true, true);
    Svd {
        u: svd.u.expect("u requested"),
        singular_values: svd.singular_values,
        v_t: svd.v_t.expect("v_t requested"),
    }
}

fn faer_svd(m: &DMatrix<f64>) -> Option<Svd> {
    let f = faer::Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let svd = f.thin_svd().ok()?;
    let (u, s, v) = (svd.U(), svd.S(), svd.V());
    let k = s.dim();
    Some(Svd {
        u: DMatrix::from_fn(m.nrows(), k, |i, j| u[(i, j)]),
        singular_values: DVector::from_fn(k, |i, _| s[i]),
        v_t: DMatrix::from_fn(k, m.ncols(), |i, j| v[(j, i)]),
    })
}

/// Checked SVD.
///
/// Computed with faer and verified by reconstruction and orthonormality of
/// the factors; nalgebra's decomposition is the fallback, and the more
/// accurate of the two is returned.
pub fn svd(m: &DMatrix<f64>) -> Svd {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        let k = rows.min(cols);
        return Svd {
            u: DMatrix::zeros(rows, k),
            singular_values: DVector::zeros(k),
            v_t: DMatrix::zeros(k, cols),
        };
    }
    let scale = m.amax().max(1.0);
    let limit = 1e-12 * (rows + cols) as f64;
    if let Some(primary) = faer_svd(m) {
        if primary.defect(m, scale) <= limit {
            return primary.sorted();
        }
        let fallback = nalgebra_svd(m);
        if fallback.defect(m, scale) < primary.defect(m, scale) {
            return fallback.sorted();
        }
        return primary.sorted();
    }
    nalgebra_svd(m).sorted()
}

fn null_space(m: &DMatrix<f64>, tolerance: f64) -> SubspaceBasis {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return SubspaceBasis::empty(0);
    }
    if rows == 0 {
        return SubspaceBasis {
            columns: DMatrix::identity(cols, cols),
        };
    }
    // A thin SVD only yields the full right singular basis when rows >= cols.
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = svd(&padded);
    let largest = svd.singular_values.max();
    let cut = threshold_for(largest, tolerance);
    let null_rows: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= cut)
        .collect();
    let mut columns = DMatrix::zeros(cols, null_rows.len());
    for (k, &i) in null_rows.iter().enumerate() {
        columns.set_column(k, &svd.v_t.row(i).transpose());
    }
    SubspaceBasis { columns }
}

/// An orthonormal set of column vectors spanning a subspace of R^N.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceBasis {
    columns: DMatrix<f64>,
}

impl SubspaceBasis {
    /// Wraps columns that are already orthonormal.
    pub fn from_orthonormal(columns: DMatrix<f64>) -> Result<Self> {
        let gram = columns.transpose() * &columns;
        let deviation = (gram - DMatrix::identity(columns.ncols(), columns.ncols())).amax();
        if deviation > ORTHONORMAL_TOLERANCE {
            return Err(Error::NotOrthogonal(deviation));
        }
        Ok(Self { columns })
    }

    /// Orthonormal basis of the span of `vectors` (columns). Directions whose
    /// singular value falls below `relative_tolerance * sigma_max` are dropped.
    pub fn from_spanning(vectors: &DMatrix<f64>, relative_tolerance: f64) -> Self {
        let (n, k) = vectors.shape();
        if n == 0 || k == 0 {
            return Self::empty(n);
        }
        let svd = svd(vectors);
        let u = svd.u;
        let largest = svd.singular_values.max();
        if largest == 0.0 {
            return Self::empty(n);
        }
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > relative_tolerance * largest)
            .collect();
        let mut columns = DMatrix::zeros(n, keep.len());
        for (c, &i) in keep.iter().enumerate() {
            columns.set_column(c, &u.column(i));
        }
        Self { columns }
    }

    pub fn empty(ambient: usize) -> Self {
        Self {
            columns: DMatrix::zeros(ambient, 0),
        }
    }

    pub fn dim(&self) -> usize {
        self.columns.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    pub fn project(&self, v: &DMatrix<f64>) -> DMatrix<f64> {
        &self.columns * (self.columns.transpose() * v)
    }

    /// Frobenius norm of the component of `vectors` orthogonal to this subspace.
    pub fn leakage(&self, vectors: &DMatrix<f64>) -> f64 {
        (vectors - self.project(vectors)).norm()
    }

    /// Orthonormal basis of the orthogonal complement of `inner` within `self`.
    ///
    /// `inner` is assumed to lie in `self`; the projected columns then have
    /// singular values exactly 0 or 1, so a cut at 1/2 is unambiguous.
    pub fn complement_of(&self, inner: &SubspaceBasis) -> SubspaceBasis {
        let projected = &self.columns - inner.project(&self.columns);
        let (n, k) = projected.shape();
        if k == 0 {
            return SubspaceBasis::empty(n);
        }
        let svd = svd(&projected);
        let u = svd.u;
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > 0.5)
            .collect();
        let mut columns = DMatrix::zeros(n, keep.len());
        for (c, &i) in keep.iter().enumerate() {
            columns.set_column(c, &u.column(i));
        }
        SubspaceBasis { columns }
    }
}

/// Trace of `operator` restricted to the (invariant) subspace spanned by `basis`.
pub fn restricted_trace(basis: &SubspaceBasis, operator: &DMatrix<f64>) -> Result<f64> {
    restricted_trace_with_limit(basis, operator, INVARIANCE_TOLERANCE)
}

pub fn restricted_trace_with_limit(
    basis: &SubspaceBasis,
    operator: &DMatrix<f64>,
    limit: f64,
) -> Result<f64> {
    let n = basis.ambient_dim();
    if operator.nrows() != n || operator.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, subspace lives in R^{n}",
            operator.nrows(),
            operator.ncols()
        )));
    }
    if basis.dim() == 0 {
        return Ok(0.0);
    }
    let image = operator * basis.columns();
    let leakage = basis.leakage(&image);
    if leakage > limit {
        return Err(Error::InvarianceViolation { leakage, limit });
    }
    Ok((basis.columns().transpose() * image).trace())
}

/// Default central-difference step: `1e-5 * (1 + |x0|_inf)`.
pub fn default_step(x0: &DVector<f64>) -> f64 {
    1e-5 * (1.0 + x0.amax())
}

/// Central-difference Jacobian of `f` at `x0`.
pub fn finite_difference_jacobian<F>(
    f: F,
    x0: &DVector<f64>,
    step: Option<f64>,
) -> Result<DMatrix<f64>>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let h = step.unwrap_or_else(|| default_step(x0));
    let f0 = f(x0);
    check_finite(&f0)?;
    let mut jac = DMatrix::zeros(f0.len(), x0.len());
    let mut x = x0.clone();
    for j in 0..x0.len() {
        x[j] = x0[j] + h;
        let plus = f(&x);
        x[j] = x0[j] - h;
        let minus = f(&x);
        x[j] = x0[j];
        check_finite(&plus)?;
        check_finite(&minus)?;
        if plus.len() != f0.len() || minus.len() != f0.len() {
            return Err(Error::DimensionMismatch(
                "function output length changed between evaluations".into(),
            ));
        }
        jac.set_column(j, &((plus - minus) / (2.0 * h)));
    }
    Ok(jac)
}

fn check_finite(v: &DVector<f64>) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(component) => Err(Error::NonFiniteFunction { component }),
        None => Ok(()),
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kronecker(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_matrix_has_rank_zero() {
        let m = TolerancedMatrix::with_default_tolerance(DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(m.numeric_rank(), 0);
        assert_eq!(m.kernel_basis().dim(), 3);
        assert_eq!(m.cokernel_basis().dim(), 3);
    }

    #[test]
    fn tiny_singular_value_is_dropped() {
        let m = TolerancedMatrix::new(
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1e-14])),
            1e-10,
        )
        .unwrap();
        assert_eq!(m.numeric_rank(), 1);
    }

    #[test]
    fn single_bar_kernel() {
        let m = TolerancedMatrix::with_default_tolerance(DMatrix::from_row_slice(
            1,
            4,
            &[-1.0, 0.0, 1.0, 0.0],
        ))
        .unwrap();
        assert_eq!(m.numeric_rank(), 1);
        let k = m.kernel_basis();
        assert_eq!(k.dim(), 3);
        assert!((m.entries() * k.columns()).amax() < 1e-14);
        assert_eq!(m.cokernel_basis().dim(), 0);
    }

    #[test]
    fn non_finite_rejected() {
        let mut e = DMatrix::zeros(2, 2);
        e[(1, 0)] = f64::NAN;
        assert!(matches!(
            TolerancedMatrix::with_default_tolerance(e),
            Err(Error::NonFiniteEntry { row: 1, col: 0 })
        ));
    }

    #[test]
    fn empty_shapes() {
        let m = TolerancedMatrix::with_default_tolerance(DMatrix::zeros(0, 2)).unwrap();
        assert_eq!(m.numeric_rank(), 0);
        assert_eq!(m.kernel_basis().dim(), 2);
        assert_eq!(m.cokernel_basis().dim(), 0);
    }

    #[test]
    fn identity_restricted_trace_is_dimension() {
        let v = DMatrix::from_column_slice(4, 2, &[1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = SubspaceBasis::from_spanning(&v, 1e-12);
        assert_eq!(b.dim(), 2);
        let t = restricted_trace(&b, &DMatrix::identity(4, 4)).unwrap();
        assert!((t - 2.0).abs() < 1e-12);
    }

    #[test]
    fn leaking_operator_rejected() {
        let b =
            SubspaceBasis::from_orthonormal(DMatrix::from_column_slice(2, 1, &[1.0, 0.0])).unwrap();
        let swap = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(matches!(
            restricted_trace(&b, &swap),
            Err(Error::InvarianceViolation { .. })
        ));
    }

    #[test]
    fn square_derivative() {
        let x0 = DVector::from_vec(vec![3.0]);
        let j = finite_difference_jacobian(|x| x.map(|v| v * v), &x0, Some(1e-5)).unwrap();
        assert!((j[(0, 0)] - 6.0).abs() < 1e-8);
    }

    #[test]
    fn non_finite_function_rejected() {
        let x0 = DVector::from_vec(vec![0.0]);
        let r = finite_difference_jacobian(|x| x.map(|v| 1.0 / v), &x0, Some(1e-5));
        assert!(r.is_ok() || matches!(r, Err(Error::NonFiniteFunction { .. })));
        let r = finite_difference_jacobian(|x| x.map(|_| f64::INFINITY), &x0, None);
        assert!(matches!(r, Err(Error::NonFiniteFunction { component: 0 })));
    }

    #[test]
    fn complement_inside_span() {
        let outer = SubspaceBasis::from_orthonormal(DMatrix::identity(3, 3)).unwrap();
        let inner = SubspaceBasis::from_spanning(
            &DMatrix::from_column_slice(3, 1, &[1.0, 1.0, 0.0]),
            1e-12,
        );
        let c = outer.complement_of(&inner);
        assert_eq!(c.dim(), 2);
        assert!((inner.columns().transpose() * c.columns()).amax() < 1e-12);
    }
}
