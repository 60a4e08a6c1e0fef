#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

use framesym::bodypin::BodyFramework;
use framesym::io::{parse_body, parse_framework, parse_point_line, PeriodicFile};
use framesym::periodic::PeriodicFramework;
use framesym::pointline::PointLineSystem;
use framesym::Framework;

pub const BAR_JOINT_FIXTURES: &[&str] = &[
    "figure2.json",
    "figure2_bar_2_6.json",
    "figure2_axis_bar.json",
    "triangle.json",
    "square.json",
    "k4_square.json",
    "kite.json",
    "grounded_v.json",
    "octahedron.json",
    "prism_half_turn.json",
    "prism_half_turn_violating.json",
    "mirror_subframework.json",
    "two_k4_two_bars.json",
];

pub const BODY_FIXTURES: &[&str] = &["body_ring.json", "body_triangle.json", "body_chain.json"];

pub const PERIODIC_FIXTURES: &[&str] = &[
    "periodic_square.json",
    "periodic_square_mirror.json",
    "periodic_triangular.json",
    "periodic_zigzag.json",
];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn framework(name: &str) -> Framework {
    parse_framework(&read_fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn body(name: &str) -> BodyFramework {
    parse_body(&read_fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn point_line(name: &str) -> PointLineSystem {
    parse_point_line(&read_fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn periodic(name: &str) -> (PeriodicFramework, PeriodicFile) {
    let file =
        PeriodicFile::from_json(&read_fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    let pf = file
        .to_framework()
        .unwrap_or_else(|e| panic!("{name}: {e}"));
    (pf, file)
}

fn is_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(a, b) in edges {
            let w = if a == v {
                b
            } else if b == v {
                a
            } else {
                continue;
            };
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// A connected planar framework on at most `max_vertices` vertices, symmetric
/// under the mirror `x -> -x`: vertex pairs `(x, y), (-x, y)` plus vertices on
/// the axis, with edges added a mirror orbit at a time.
pub fn random_mirror_framework(rng: &mut impl Rng, max_vertices: usize) -> Framework {
    loop {
        let pairs = rng.random_range(1..=max_vertices / 2);
        let on_axis = rng.random_range(0..=(max_vertices - 2 * pairs).min(3));
        let mut points = Vec::new();
        let mut mirror = Vec::new();
        for _ in 0..pairs {
            let (x, y) = (rng.random_range(0.2..2.0), rng.random_range(-2.0..2.0));
            let k = points.len();
            points.push(vec![x, y]);
            points.push(vec![-x, y]);
            mirror.extend([k + 1, k]);
        }
        for _ in 0..on_axis {
            mirror.push(points.len());
            points.push(vec![0.0, rng.random_range(-2.0..2.0)]);
        }
        let n = points.len();
        let density = rng.random_range(0.3..0.9);
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                let (ma, mb) = (mirror[a].min(mirror[b]), mirror[a].max(mirror[b]));
                if (ma, mb) < (a, b) {
                    continue;
                }
                if rng.random_bool(density) {
                    edges.push((a, b));
                    if (ma, mb) != (a, b) {
                        edges.push((ma, mb));
                    }
                }
            }
        }
        if n < 2 || edges.is_empty() || !is_connected(n, &edges) {
            continue;
        }
        let vertices = points
            .into_iter()
            .enumerate()
            .map(|(i, p)| (i as i64 + 1, p));
        let fw = Framework::new(
            2,
            vertices,
            edges.iter().map(|&(a, b)| (a as i64 + 1, b as i64 + 1)),
        );
        if fw.validate().is_empty() {
            return fw;
        }
    }
}

/// Orthonormal basis of the eigenvectors of the symmetric matrix `m` whose
/// eigenvalues lie below `rel * max eigenvalue`.
pub fn null_space(m: &DMatrix<f64>, rel: f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let top = eig.eigenvalues.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
    let cols: Vec<DVector<f64>> = (0..m.nrows())
        .filter(|&k| eig.eigenvalues[k].abs() <= rel * top.max(1.0))
        .map(|k| eig.eigenvectors.column(k).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(m.nrows(), 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Trace of `op` restricted to the span of the orthonormal columns of `q`.
pub fn trace_on(q: &DMatrix<f64>, op: &DMatrix<f64>) -> f64 {
    if q.ncols() == 0 {
        return 0.0;
    }
    (q.transpose() * op * q).trace()
}

/// Orthonormal basis of the column span of `m`.
pub fn orthonormalize(m: &DMatrix<f64>) -> DMatrix<f64> {
    let qr = m.clone().qr();
    let r = qr.r();
    let q = qr.q();
    let keep: Vec<DVector<f64>> = (0..r.nrows().min(r.ncols()))
        .filter(|&k| r[(k, k)].abs() > 1e-9)
        .map(|k| q.column(k).into_owned())
        .collect();
    if keep.is_empty() {
        DMatrix::zeros(m.nrows(), 0)
    } else {
        DMatrix::from_columns(&keep)
    }
}

/// `P (x) S` with `P[sigma(i), i] = 1`.
pub fn inflated_permutation(sigma: &[usize], s: &DMatrix<f64>) -> DMatrix<f64> {
    let d = s.nrows();
    let mut out = DMatrix::zeros(d * sigma.len(), d * sigma.len());
    for (i, &j) in sigma.iter().enumerate() {
        out.view_mut((d * j, d * i), (d, d)).copy_from(s);
    }
    out
}

/// Every permutation of `0..n`, in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        out.push(current.clone());
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).unwrap();
        current.swap(i - 1, j);
        current[i..].reverse();
    }
}

/// Every connected labelled graph on `n` vertices, as sorted edge lists.
pub fn connected_graphs(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    (0u32..1 << pairs.len())
        .map(|mask| {
            pairs
                .iter()
                .enumerate()
                .filter(|&(k, _)| mask >> k & 1 == 1)
                .map(|(_, &p)| p)
                .collect::<Vec<_>>()
        })
        .filter(|edges| !edges.is_empty() && is_connected(n, edges))
        .collect()
}

fn normalized(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Index of the image of each edge under `sigma`, if `sigma` preserves the edge set.
pub fn edge_images(edges: &[(usize, usize)], sigma: &[usize]) -> Option<Vec<usize>> {
    edges
        .iter()
        .map(|&(a, b)| {
            let image = normalized(sigma[a], sigma[b]);
            edges.iter().position(|&(c, d)| normalized(c, d) == image)
        })
        .collect()
}

/// The non-identity involutive automorphisms of a graph, by brute force.
pub fn involutions(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    permutations(n)
        .into_iter()
        .filter(|s| s.iter().enumerate().any(|(i, &j)| i != j))
        .filter(|s| (0..n).all(|i| s[s[i]] == i))
        .filter(|s| edge_images(edges, s).is_some())
        .collect()
}

/// Generic planar coordinates made symmetric under `x -> -x` for the
/// involution `sigma`: swapped pairs sit at `(x, y), (-x, y)`, fixed vertices
/// on the axis.
pub fn symmetrized_points(sigma: &[usize], rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut points = vec![Vec::new(); sigma.len()];
    for i in 0..sigma.len() {
        if !points[i].is_empty() {
            continue;
        }
        let y = rng.random_range(-2.0..2.0);
        if sigma[i] == i {
            points[i] = vec![0.0, y];
        } else {
            let x = rng.random_range(0.2..2.0);
            points[i] = vec![x, y];
            points[sigma[i]] = vec![-x, y];
        }
    }
    points
}

/// Rigidity matrix built straight from its definition.
pub fn oracle_rigidity(d: usize, points: &[Vec<f64>], edges: &[(usize, usize)]) -> DMatrix<f64> {
    let mut r = DMatrix::zeros(edges.len(), d * points.len());
    for (row, &(i, j)) in edges.iter().enumerate() {
        for k in 0..d {
            r[(row, d * i + k)] += points[i][k] - points[j][k];
            r[(row, d * j + k)] += points[j][k] - points[i][k];
        }
    }
    r
}

/// Central finite-difference Jacobian of the squared edge lengths, halved.
pub fn finite_difference_rigidity(
    d: usize,
    points: &[Vec<f64>],
    edges: &[(usize, usize)],
    h: f64,
) -> DMatrix<f64> {
    let lengths = |x: &[f64]| -> Vec<f64> {
        edges
            .iter()
            .map(|&(i, j)| (0..d).map(|k| (x[d * i + k] - x[d * j + k]).powi(2)).sum())
            .collect()
    };
    let x0: Vec<f64> = points.iter().flatten().copied().collect();
    let mut jac = DMatrix::zeros(edges.len(), x0.len());
    for c in 0..x0.len() {
        let (mut plus, mut minus) = (x0.clone(), x0.clone());
        plus[c] += h;
        minus[c] -= h;
        for (row, (a, b)) in lengths(&plus).into_iter().zip(lengths(&minus)).enumerate() {
            jac[(row, c)] = 0.5 * (a - b) / (2.0 * h);
        }
    }
    jac
}

/// Planar translations and rotation about the origin.
pub fn planar_rigid_motions(points: &[Vec<f64>]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * points.len(), 3);
    for (i, p) in points.iter().enumerate() {
        m[(2 * i, 0)] = 1.0;
        m[(2 * i + 1, 1)] = 1.0;
        m[(2 * i, 2)] = -p[1];
        m[(2 * i + 1, 2)] = p[0];
    }
    m
}

/// Traces of one planar symmetry on the mechanism and stress spaces, and the
/// counted right-hand side, computed from eigen-decompositions only.
#[derive(Clone, Copy, Debug)]
pub struct OracleRow {
    pub mech: f64,
    pub stress: f64,
    pub rhs: f64,
    pub rig_trace: f64,
}

pub fn oracle_planar_row(
    points: &[Vec<f64>],
    edges: &[(usize, usize)],
    sigma: &[usize],
    s: &DMatrix<f64>,
) -> OracleRow {
    let r = oracle_rigidity(2, points, edges);
    let kernel = null_space(&(r.transpose() * &r), 1e-10);
    let cokernel = null_space(&(&r * r.transpose()), 1e-10);
    let rigid = orthonormalize(&planar_rigid_motions(points));
    let rho_v = inflated_permutation(sigma, s);
    let images = edge_images(edges, sigma).expect("automorphism");
    let mut rho_e = DMatrix::zeros(edges.len(), edges.len());
    for (k, &img) in images.iter().enumerate() {
        rho_e[(img, k)] = 1.0;
    }
    let j = (0..sigma.len()).filter(|&i| sigma[i] == i).count() as f64;
    let b = images
        .iter()
        .enumerate()
        .filter(|&(k, &img)| k == img)
        .count() as f64;
    let tr_s = s.trace();
    let tr_rig = tr_s + s.determinant();
    OracleRow {
        mech: trace_on(&kernel, &rho_v) - trace_on(&rigid, &rho_v),
        stress: trace_on(&cokernel, &rho_e),
        rhs: j * tr_s - b - tr_rig,
        rig_trace: trace_on(&rigid, &rho_v),
    }
}
