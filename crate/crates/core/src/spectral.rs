//! Bottom of the adjacency spectrum and the spectral initial coloring.
//!
//! Eigenpairs are found one at a time by Lanczos with full
//! reorthogonalization. Each converged pair is locked and the next run
//! starts from a fresh random vector orthogonal to everything locked so far,
//! which is what lets repeated eigenvalues (a single Krylov space only ever
//! sees one direction of each eigenspace) come out with full multiplicity.
//! Only the smallest Ritz pair of a run is ever locked.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::error::{param, Error, Result};
use crate::graph::{monochromatic_edges, Color, Coloring, Graph};
use crate::rng::{self, Stream};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_SWEEPS: usize = 500;

/// Krylov dimension after which a run restarts from its best Ritz vector.
const RESTART_DIM: usize = 300;

#[derive(Clone, Debug)]
pub struct EigenResult {
    /// Ascending.
    pub values: Vec<f64>,
    /// Unit vectors, mutually orthogonal, aligned with `values`.
    pub vectors: Vec<Vec<f64>>,
    /// `‖A v − λ v‖₂` per pair.
    pub residuals: Vec<f64>,
}

fn matvec(g: &Graph, x: &[f64], y: &mut [f64]) {
    for (v, out) in y.iter_mut().enumerate() {
        *out = g.neighbors(v).iter().map(|&w| x[w]).sum();
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Two rounds of Gram-Schmidt against every vector in `bases`.
fn orthogonalize(w: &mut [f64], bases: &[&[Vec<f64>]]) {
    for _ in 0..2 {
        for basis in bases {
            for q in basis.iter() {
                let c = dot(q, w);
                axpy(-c, q, w);
            }
        }
    }
}

fn residual(g: &Graph, v: &[f64], lambda: f64, scratch: &mut [f64]) -> f64 {
    matvec(g, v, scratch);
    scratch
        .iter()
        .zip(v)
        .map(|(av, x)| (av - lambda * x).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// The `m` algebraically smallest adjacency eigenpairs, start vectors drawn
/// from seed 0.
pub fn smallest_eigenpairs(
    g: &Graph,
    m: usize,
    tol: f64,
    max_sweeps: usize,
) -> Result<EigenResult> {
    smallest_eigenpairs_seeded(g, m, tol, max_sweeps, 0)
}

/// As [`smallest_eigenpairs`]; `max_sweeps` bounds the Lanczos steps spent
/// on each eigenpair.
pub fn smallest_eigenpairs_seeded(
    g: &Graph,
    m: usize,
    tol: f64,
    max_sweeps: usize,
    seed: u64,
) -> Result<EigenResult> {
    let n = g.n();
    if m > n {
        return param(format!("asked for {m} eigenpairs of a {n}-vertex graph"));
    }
    if tol.is_nan() || tol <= 0.0 {
        return param("tolerance must be positive");
    }
    let mut rng = rng::stream_rng(seed, Stream::Eigensolver);
    let mut locked: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut values = Vec::with_capacity(m);
    let mut residuals = Vec::with_capacity(m);
    let mut scratch = vec![0.0; n];

    while locked.len() < m {
        let mut start = random_unit_orthogonal(&mut rng, n, &locked)?;
        let mut steps = 0;
        let mut best_residual = f64::INFINITY;
        let (theta, vector, res) = loop {
            let budget = max_sweeps.saturating_sub(steps);
            if budget == 0 {
                return Err(Error::Convergence {
                    steps,
                    best_residual,
                });
            }
            let run = lanczos_run(
                g,
                &start,
                &locked,
                tol,
                budget.min(RESTART_DIM),
                &mut scratch,
            );
            steps += run.steps;
            best_residual = best_residual.min(run.residual);
            if run.residual <= tol {
                break (run.theta, run.vector, run.residual);
            }
            start = run.vector;
        };
        values.push(theta);
        residuals.push(res);
        locked.push(vector);
    }

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    Ok(EigenResult {
        values: order.iter().map(|&i| values[i]).collect(),
        residuals: order.iter().map(|&i| residuals[i]).collect(),
        vectors: order
            .into_iter()
            .map(|i| std::mem::take(&mut locked[i]))
            .collect(),
    })
}

fn random_unit_orthogonal<R: Rng>(rng: &mut R, n: usize, locked: &[Vec<f64>]) -> Result<Vec<f64>> {
    for _ in 0..16 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        orthogonalize(&mut v, &[locked]);
        let nv = norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            return Ok(v);
        }
    }
    param("could not draw a start vector outside the locked subspace")
}

struct RitzPair {
    theta: f64,
    vector: Vec<f64>,
    residual: f64,
    steps: usize,
}

/// One Lanczos run of at most `max_dim` steps from the unit vector `start`
/// (orthogonal to `locked`). Returns as soon as the smallest Ritz pair has
/// true residual `<= tol`, otherwise the best pair seen at the end.
fn lanczos_run(
    g: &Graph,
    start: &[f64],
    locked: &[Vec<f64>],
    tol: f64,
    max_dim: usize,
    scratch: &mut [f64],
) -> RitzPair {
    let n = g.n();
    let max_dim = max_dim.min(n - locked.len()).max(1);
    let mut basis: Vec<Vec<f64>> = vec![start.to_vec()];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut scale: f64 = 1.0;
    let mut best: Option<RitzPair> = None;

    for j in 0..max_dim {
        let mut w = vec![0.0; n];
        matvec(g, &basis[j], &mut w);
        let a = dot(&basis[j], &w);
        axpy(-a, &basis[j], &mut w);
        if j > 0 {
            axpy(-beta[j - 1], &basis[j - 1], &mut w);
        }
        orthogonalize(&mut w, &[locked, &basis]);
        let b = norm(&w);
        alpha.push(a);
        scale = scale.max(a.abs()).max(b);
        let dim = j + 1;
        let invariant = b <= 1e-12 * scale;
        let last = invariant || dim == max_dim;

        if last || dim <= 30 || dim % 5 == 0 {
            let (_, s) = smallest_ritz(&alpha, &beta);
            let estimate = b * s[dim - 1].abs();
            if last || estimate <= tol {
                let mut y = vec![0.0; n];
                for (q, &c) in basis.iter().zip(&s) {
                    axpy(c, q, &mut y);
                }
                orthogonalize(&mut y, &[locked]);
                let ny = norm(&y);
                y.iter_mut().for_each(|x| *x /= ny);
                matvec(g, &y, scratch);
                let rq = dot(&y, scratch);
                let r = residual(g, &y, rq, scratch);
                let pair = RitzPair {
                    theta: rq,
                    vector: y,
                    residual: r,
                    steps: dim,
                };
                if r <= tol || last {
                    return pair;
                }
                if best.as_ref().is_none_or(|p| r < p.residual) {
                    best = Some(pair);
                }
            }
        }
        beta.push(b);
        w.iter_mut().for_each(|x| *x /= b);
        basis.push(w);
    }
    let mut pair = best.expect("the final step always produces a Ritz pair");
    pair.steps = max_dim;
    pair
}

/// Smallest eigenpair of the symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta[..alpha.len() - 1]`.
fn smallest_ritz(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let d = alpha.len();
    let t = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let mut best = 0;
    for i in 1..d {
        if eig.eigenvalues[i] < eig.eigenvalues[best] {
            best = i;
        }
    }
    (
        eig.eigenvalues[best],
        eig.eigenvectors.column(best).iter().copied().collect(),
    )
}

#[derive(Clone, Debug)]
pub struct SpectralColoring {
    pub coloring: Coloring,
    /// The embedding collapsed to one point and a uniform random coloring
    /// was returned instead.
    pub degenerate: bool,
    /// Monochromatic edges of `coloring`.
    pub conflicts: usize,
}

/// Initial 3-coloring from the two bottom adjacency eigenvectors.
///
/// Each vertex becomes the point `√n · (v₁[u], v₂[u])`; k-means with
/// k-means++ seeding is run `restarts` times and the clustering with the
/// fewest monochromatic edges is returned (earliest restart on ties).
pub fn spectral_coloring(
    g: &Graph,
    k: usize,
    restarts: usize,
    seed: u64,
) -> Result<SpectralColoring> {
    if k != 3 {
        return param(format!("spectral coloring supports k = 3 only (got {k})"));
    }
    let n = g.n();
    if n < k {
        return param(format!("spectral coloring needs at least {k} vertices"));
    }
    let eig = smallest_eigenpairs_seeded(g, k - 1, DEFAULT_TOL, DEFAULT_MAX_SWEEPS, seed)?;
    let scale = (n as f64).sqrt();
    let points: Vec<Vec<f64>> = (0..n)
        .map(|u| eig.vectors.iter().map(|v| v[u] * scale).collect())
        .collect();

    let spread = points
        .iter()
        .map(|p| sq_dist(p, &points[0]))
        .fold(0.0, f64::max);
    if spread <= 1e-20 {
        let mut rng = rng::stream_rng(seed, Stream::Fallback);
        let colors: Vec<Color> = (0..n).map(|_| rng::index(&mut rng, k) as Color).collect();
        let coloring = Coloring::from_colors(k, &colors)?;
        return Ok(SpectralColoring {
            conflicts: monochromatic_edges(g, &coloring),
            coloring,
            degenerate: true,
        });
    }

    let mut rng = rng::stream_rng(seed, Stream::Clustering);
    let mut best: Option<(usize, Vec<Color>)> = None;
    for _ in 0..restarts.max(1) {
        let labels = kmeans(&points, k, &mut rng);
        let coloring = Coloring::from_colors(k, &labels)?;
        let conflicts = monochromatic_edges(g, &coloring);
        if best.as_ref().is_none_or(|(c, _)| conflicts < *c) {
            best = Some((conflicts, labels));
        }
    }
    let (conflicts, labels) = best.expect("at least one restart");
    Ok(SpectralColoring {
        coloring: Coloring::from_colors(k, &labels)?,
        degenerate: false,
        conflicts,
    })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

const KMEANS_MAX_ROUNDS: usize = 100;

/// Lloyd's algorithm from k-means++ seeds. Empty clusters keep their
/// previous centroid.
pub fn kmeans<R: Rng>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Color> {
    let n = points.len();
    let dim = points[0].len();
    let mut centers: Vec<Vec<f64>> = vec![points[rng::index(rng, n)].clone()];
    let mut nearest: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = nearest.iter().sum();
        let next = if total <= 0.0 {
            rng::index(rng, n)
        } else {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in nearest.iter().enumerate() {
                if target < d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            pick
        };
        centers.push(points[next].clone());
        for (i, p) in points.iter().enumerate() {
            nearest[i] = nearest[i].min(sq_dist(p, &centers[centers.len() - 1]));
        }
    }

    let mut labels = vec![0 as Color; n];
    for round in 0..KMEANS_MAX_ROUNDS {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, center) in centers.iter().enumerate() {
                let d = sq_dist(p, center);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if labels[i] != best as Color {
                labels[i] = best as Color;
                changed = true;
            }
        }
        if !changed && round > 0 {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l as usize] += 1;
            axpy(1.0, p, &mut sums[l as usize]);
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
    }
    labels
}
