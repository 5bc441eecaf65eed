//! Effective resistances on unit-conductance graphs.
//!
//! Potentials are solved from the Laplacian in the sum-zero gauge. The system
//! is grounded at the last vertex and factored once: dense Cholesky for small
//! graphs, sparse Cholesky with a fill-reducing ordering otherwise. Jacobi
//! preconditioned conjugate gradients are available as an alternative solver.

use std::f64::consts::{PI, TAU};

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{mu_ball_origin, ModelParams, PolarPoint};
use crate::graph::Graph;
use crate::hrg::HrgGraph;
use crate::rng::rng_from_seed;

/// Relative residual every solve must meet.
pub const SOLVE_TOL: f64 = 1e-10;
/// Below this size the grounded Laplacian is factored densely.
pub const DENSE_LIMIT: usize = 500;
/// Default size cap for [`resistance_matrix`].
pub const MATRIX_CAP: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverKind {
    Dense,
    SparseCholesky,
    ConjugateGradient,
}

impl SolverKind {
    pub fn auto(n: usize) -> Self {
        if n < DENSE_LIMIT {
            SolverKind::Dense
        } else {
            SolverKind::SparseCholesky
        }
    }
}

enum Factor {
    Single,
    Dense(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Sparse(faer::sparse::linalg::solvers::Llt<usize, f64>),
    Cg,
}

/// Factored Laplacian of a connected graph.
pub struct LaplacianSystem {
    graph: Graph,
    degrees: Vec<f64>,
    factor: Factor,
    kind: SolverKind,
}

impl std::fmt::Debug for LaplacianSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LaplacianSystem").field("n", &self.graph.vertex_count()).field("kind", &self.kind).finish()
    }
}

impl LaplacianSystem {
    pub fn new(g: &Graph) -> Result<Self> {
        Self::with_solver(g, SolverKind::auto(g.vertex_count()))
    }

    pub fn with_solver(g: &Graph, kind: SolverKind) -> Result<Self> {
        let n = g.vertex_count();
        g.require_connected()?;
        let degrees: Vec<f64> = g.degrees().into_iter().map(|d| d as f64).collect();
        let m = n - 1;
        let factor = if n == 1 {
            Factor::Single
        } else {
            match kind {
                SolverKind::Dense => {
                    let mut a = DMatrix::<f64>::zeros(m, m);
                    for u in 0..m {
                        a[(u, u)] = degrees[u];
                        for &v in g.neighbors(u) {
                            if v < m {
                                a[(u, v)] = -1.0;
                            }
                        }
                    }
                    let c = nalgebra::Cholesky::new(a)
                        .ok_or_else(|| Error::SolverFailure("grounded Laplacian is not positive definite".into()))?;
                    Factor::Dense(c)
                }
                SolverKind::SparseCholesky => {
                    let mut trips = Vec::with_capacity(m + g.edge_count());
                    for u in 0..m {
                        trips.push(Triplet::new(u, u, degrees[u]));
                        for &v in g.neighbors(u) {
                            if v < u {
                                trips.push(Triplet::new(u, v, -1.0));
                            }
                        }
                    }
                    let a = SparseColMat::<usize, f64>::try_new_from_triplets(m, m, &trips)
                        .map_err(|e| Error::SolverFailure(format!("{e:?}")))?;
                    let llt = a.sp_cholesky(Side::Lower).map_err(|e| Error::SolverFailure(format!("{e:?}")))?;
                    Factor::Sparse(llt)
                }
                SolverKind::ConjugateGradient => Factor::Cg,
            }
        };
        Ok(LaplacianSystem { graph: g.clone(), degrees, factor, kind })
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn kind(&self) -> SolverKind {
        self.kind
    }

    /// `L x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..x.len())
            .map(|u| self.degrees[u] * x[u] - self.graph.neighbors(u).iter().map(|&v| x[v]).sum::<f64>())
            .collect()
    }

    fn relative_residual(&self, x: &[f64], b: &[f64]) -> f64 {
        let lx = self.apply(x);
        let num: f64 = lx.iter().zip(b).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt();
        let den: f64 = b.iter().map(|c| c * c).sum::<f64>().sqrt();
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }

    /// Solves `L x = b` for `b` summing to zero; `x` sums to zero.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.vertex_count();
        if b.len() != n {
            return invalid(format!("right-hand side has length {} for {n} vertices", b.len()));
        }
        let scale: f64 = b.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
        let total: f64 = b.iter().sum();
        if total.abs() > 1e-9 * scale {
            return invalid(format!("right-hand side sums to {total}, not zero"));
        }
        let mean = total / n as f64;
        let b: Vec<f64> = b.iter().map(|x| x - mean).collect();
        if n == 1 {
            return Ok(vec![0.0]);
        }
        let mut x = match &self.factor {
            Factor::Cg => self.pcg(&b)?,
            _ => self.direct(&b),
        };
        let mut res = self.relative_residual(&x, &b);
        // one step of iterative refinement if the direct solve fell short
        if res > SOLVE_TOL && !matches!(self.factor, Factor::Cg) {
            let lx = self.apply(&x);
            let r: Vec<f64> = b.iter().zip(&lx).map(|(a, c)| a - c).collect();
            let dx = self.direct(&r);
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += di;
            }
            res = self.relative_residual(&x, &b);
        }
        if !(res <= SOLVE_TOL) {
            return Err(Error::SolverFailure(format!("relative residual {res:e} above {SOLVE_TOL:e}")));
        }
        let shift = x.iter().sum::<f64>() / n as f64;
        x.iter_mut().for_each(|xi| *xi -= shift);
        Ok(x)
    }

    fn direct(&self, b: &[f64]) -> Vec<f64> {
        let m = b.len() - 1;
        let mut x = match &self.factor {
            Factor::Dense(c) => c.solve(&DVector::from_column_slice(&b[..m])).as_slice().to_vec(),
            Factor::Sparse(llt) => {
                let mut rhs = Mat::<f64>::from_fn(m, 1, |i, _| b[i]);
                llt.solve_in_place(rhs.as_mut());
                (0..m).map(|i| rhs[(i, 0)]).collect()
            }
            _ => unreachable!("direct solve without a factor"),
        };
        x.push(0.0);
        x
    }

    fn pcg(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = b.len();
        let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut x = vec![0.0; n];
        if bnorm == 0.0 {
            return Ok(x);
        }
        let project = |v: &mut [f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter_mut().for_each(|x| *x -= m);
        };
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&self.degrees).map(|(a, d)| a / d).collect();
        project(&mut z);
        let mut p = z.clone();
        let mut rz: f64 = r.iter().zip(&z).map(|(a, c)| a * c).sum();
        let max_iter = 20 * n + 100;
        for _ in 0..max_iter {
            let ap = self.apply(&p);
            let alpha = rz / p.iter().zip(&ap).map(|(a, c)| a * c).sum::<f64>();
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if rnorm <= 0.1 * SOLVE_TOL * bnorm {
                project(&mut x);
                return Ok(x);
            }
            z = r.iter().zip(&self.degrees).map(|(a, d)| a / d).collect();
            project(&mut z);
            let rz_new: f64 = r.iter().zip(&z).map(|(a, c)| a * c).sum();
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(Error::SolverFailure(format!("conjugate gradients did not converge in {max_iter} iterations")))
    }

    /// `R(u, v)` within this connected graph.
    pub fn effective_resistance(&self, u: usize, v: usize) -> Result<f64> {
        let n = self.vertex_count();
        if u >= n || v >= n {
            return invalid(format!("vertex out of range for {n} vertices"));
        }
        if u == v {
            return Ok(0.0);
        }
        let mut b = vec![0.0; n];
        b[u] = 1.0;
        b[v] = -1.0;
        let x = self.solve(&b)?;
        Ok(x[u] - x[v])
    }

    /// Resistances for many pairs, solved in parallel.
    pub fn resistances(&self, pairs: &[(usize, usize)]) -> Result<Vec<f64>> {
        pairs.par_iter().map(|&(u, v)| self.effective_resistance(u, v)).collect()
    }
}

/// `R(u, v)` in `g`, solved on the component holding both vertices.
pub fn effective_resistance(g: &Graph, u: usize, v: usize) -> Result<f64> {
    let n = g.vertex_count();
    if u >= n || v >= n {
        return invalid(format!("vertex out of range for {n} vertices"));
    }
    if u == v {
        return Ok(0.0);
    }
    let comps = g.components();
    if comps.label(u) != comps.label(v) {
        return Err(Error::DisconnectedPair(u, v));
    }
    let sub = g.induced_subgraph(&comps.members(comps.label(u)));
    let sys = LaplacianSystem::new(&sub.graph)?;
    sys.effective_resistance(sub.local_id(u).unwrap(), sub.local_id(v).unwrap())
}

/// All pairwise resistances of a connected graph with at most `cap` vertices.
pub fn resistance_matrix(g: &Graph, cap: usize) -> Result<DMatrix<f64>> {
    let n = g.vertex_count();
    if n > cap {
        return Err(Error::SizeCap { size: n, cap });
    }
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if !g.is_connected() {
        return Err(Error::NotConnected);
    }
    let m = n - 1;
    let mut a = DMatrix::<f64>::zeros(m, m);
    for u in 0..m {
        a[(u, u)] = g.degree(u) as f64;
        for &v in g.neighbors(u) {
            if v < m {
                a[(u, v)] = -1.0;
            }
        }
    }
    let inv = if m == 0 {
        a
    } else {
        nalgebra::Cholesky::new(a)
            .ok_or_else(|| Error::SolverFailure("grounded Laplacian is not positive definite".into()))?
            .inverse()
    };
    let green = |u: usize, v: usize| if u < m && v < m { inv[(u, v)] } else { 0.0 };
    Ok(DMatrix::from_fn(n, n, |u, v| if u == v { 0.0 } else { green(u, u) + green(v, v) - 2.0 * green(u, v) }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KirchhoffOptions {
    /// Largest graph handled exactly.
    pub cap: usize,
    /// Ordered pairs sampled above the cap.
    pub pairs: usize,
    pub seed: u64,
}

impl Default for KirchhoffOptions {
    fn default() -> Self {
        KirchhoffOptions { cap: MATRIX_CAP, pairs: 1000, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KirchhoffEstimate {
    /// Sum of `R(u, v)` over ordered pairs.
    pub kirchhoff: f64,
    /// `kirchhoff / |V|^2`.
    pub average: f64,
    /// Half-width of the 95% normal confidence interval for `average`;
    /// zero when exact.
    pub average_ci: f64,
    pub exact: bool,
}

/// Kirchhoff index and average resistance of a connected graph. Exact up to
/// `opts.cap` vertices, otherwise estimated from uniformly sampled ordered
/// pairs (diagonal pairs included, as in the double sum).
pub fn kirchhoff_and_average(g: &Graph, opts: &KirchhoffOptions) -> Result<KirchhoffEstimate> {
    let n = g.vertex_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let nn = (n * n) as f64;
    if n <= opts.cap {
        let m = resistance_matrix(g, opts.cap)?;
        let k = m.sum();
        return Ok(KirchhoffEstimate { kirchhoff: k, average: k / nn, average_ci: 0.0, exact: true });
    }
    let sys = LaplacianSystem::new(g)?;
    sampled_average(&sys, opts.pairs, opts.seed)
}

/// Average resistance from `pairs` uniform ordered pairs.
pub fn sampled_average(sys: &LaplacianSystem, pairs: usize, seed: u64) -> Result<KirchhoffEstimate> {
    if pairs < 2 {
        return invalid("need at least two sampled pairs");
    }
    let n = sys.vertex_count();
    let mut rng = rng_from_seed(seed);
    let sample: Vec<(usize, usize)> = (0..pairs).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
    let values = sys.resistances(&sample)?;
    let avg = crate::stats::mean(&values);
    let ci = 1.96 * crate::stats::std_error(&values);
    let nn = (n * n) as f64;
    Ok(KirchhoffEstimate { kirchhoff: avg * nn, average: avg, average_ci: ci, exact: false })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutSpec {
    pub apex: PolarPoint,
    pub phi: f64,
    /// Vertices inside the sector.
    pub inside: Vec<usize>,
    /// Edges `(u, v)` with `u` inside and `v` outside.
    pub edges: Vec<(usize, usize)>,
}

impl CutSpec {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Whether angle `theta` lies in the sector of angle `phi` bisected by the
/// ray at `center`: `-phi/2 <= theta - center < phi/2` modulo `2 pi`.
pub fn in_sector(theta: f64, center: f64, phi: f64) -> bool {
    let d = (theta - center + PI).rem_euclid(TAU) - PI;
    -0.5 * phi <= d && d < 0.5 * phi
}

/// Edge boundary of the vertices inside the sector of angle `phi` bisected
/// by the ray through `p`.
pub fn sector_cut(g: &HrgGraph, p: PolarPoint, phi: f64) -> Result<CutSpec> {
    if !(phi > 0.0 && phi < TAU) {
        return invalid(format!("sector angle must lie in (0, 2 pi), got {phi}"));
    }
    let inside_flag: Vec<bool> = g.points().iter().map(|q| in_sector(q.theta(), p.theta(), phi)).collect();
    let inside: Vec<usize> = (0..inside_flag.len()).filter(|&v| inside_flag[v]).collect();
    let mut edges = Vec::new();
    for &u in &inside {
        for &v in g.graph().neighbors(u) {
            if !inside_flag[v] {
                edges.push((u, v));
            }
        }
    }
    Ok(CutSpec { apex: p, phi, inside, edges })
}

/// Default `omega = ln ln n`.
pub fn default_omega(n: f64) -> f64 {
    n.ln().ln()
}

/// Sector angle `phi_r = 2 pi nu e^{-omega} / (n mu(B_O(r)))`.
pub fn phi_r(r: f64, params: &ModelParams, omega: f64) -> Result<f64> {
    let big_r = params.radius();
    let lower = (1.0 - 1.0 / (2.0 * params.alpha())) * big_r;
    if !(r > lower && r <= big_r) {
        return invalid(format!("phi_r needs r in ({lower}, {big_r}], got {r}"));
    }
    Ok(TAU * params.nu() * (-omega).exp() / (params.n() * mu_ball_origin(r, params)))
}

/// Asymptotic form `2 pi (nu / n) e^{alpha (R - r) - omega}` of [`phi_r`].
pub fn phi_r_estimate(r: f64, params: &ModelParams, omega: f64) -> f64 {
    TAU * params.nu() / params.n() * (params.alpha() * (params.radius() - r) - omega).exp()
}

/// Lower bound `1 / |cut|` on the resistance between the two sides.
pub fn nash_williams_lower(cut: &CutSpec) -> Result<f64> {
    if cut.is_empty() {
        return Err(Error::EmptyCut);
    }
    Ok(1.0 / cut.len() as f64)
}
