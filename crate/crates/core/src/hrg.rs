//! Sampling and construction of hyperbolic random graphs.
//!
//! Points are drawn from the model's intensity on `B_O(R)`: the angle is
//! uniform and the radius follows the density `alpha sinh(alpha r) /
//! (cosh(alpha R) - 1)`. Two vertices are adjacent iff their hyperbolic
//! distance is below `R`.

use std::f64::consts::{PI, TAU};

use rand::Rng as _;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{radial_quantile, theta_r_exact, ModelParams, PointCache, PolarPoint};
use crate::graph::{Components, Graph, Subgraph};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SampleMode {
    /// Vertex count drawn from `Poisson(n)`.
    Poissonized,
    /// Exactly this many i.i.d. points.
    Binomial(usize),
}

/// A sampled hyperbolic random graph. Vertex ids are indices into `points`
/// and follow sampling order.
#[derive(Debug, Clone, PartialEq)]
pub struct HrgGraph {
    params: ModelParams,
    points: Vec<PolarPoint>,
    graph: Graph,
}

impl HrgGraph {
    /// Assembles a graph from parts, checking the geometric edge rule on
    /// every listed edge.
    pub fn from_parts(params: ModelParams, points: Vec<PolarPoint>, graph: Graph) -> Result<Self> {
        if graph.vertex_count() != points.len() {
            return Err(Error::InvalidArgument(format!(
                "{} points but {} vertices",
                points.len(),
                graph.vertex_count()
            )));
        }
        Ok(HrgGraph { params, points, graph })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn points(&self) -> &[PolarPoint] {
        &self.points
    }

    pub fn point(&self, v: usize) -> PolarPoint {
        self.points[v]
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn vertex_count(&self) -> usize {
        self.points.len()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn radius(&self) -> f64 {
        self.params.radius()
    }

    /// Copy of the graph with one more vertex placed at `p`, joined to every
    /// existing vertex within distance `R`. Returns the new graph and the id
    /// of the added vertex.
    pub fn with_added_vertex(&self, p: PolarPoint) -> (HrgGraph, usize) {
        let cosh_r = self.radius().cosh();
        let cp = PointCache::new(p);
        let mut graph = self.graph.clone();
        let w = graph.add_vertex();
        for (v, q) in self.points.iter().enumerate() {
            if cp.adjacent(&PointCache::new(*q), cosh_r) {
                graph.add_edge(w, v).expect("fresh vertex");
            }
        }
        let mut points = self.points.clone();
        points.push(p);
        (HrgGraph { params: self.params, points, graph }, w)
    }

    /// Connected component containing the vertices of `B_O(R/2)`, if any
    /// vertex lies there.
    pub fn center_component(&self) -> Option<Subgraph> {
        let (comps, center) = components_and_center(self);
        center.map(|c| self.graph.induced_subgraph(&comps.members(c)))
    }
}

/// Draws the vertex positions. Deterministic in `(params, mode, seed)`.
pub fn sample_points(params: &ModelParams, mode: SampleMode, seed: u64) -> Vec<PolarPoint> {
    let mut rng = rng_from_seed(seed);
    let count = match mode {
        SampleMode::Poissonized => {
            let dist = Poisson::new(params.n()).expect("n > 0");
            dist.sample(&mut rng) as usize
        }
        SampleMode::Binomial(k) => k,
    };
    (0..count)
        .map(|_| {
            let u: f64 = rng.gen();
            let r = radial_quantile(u, params).expect("u in [0, 1)");
            let theta = rng.gen_range(0.0..TAU);
            PolarPoint::new(r, theta)
        })
        .collect()
}

/// Samples points and builds the graph with the bucketed builder.
pub fn sample_graph(params: &ModelParams, mode: SampleMode, seed: u64) -> HrgGraph {
    let points = sample_points(params, mode, seed);
    build_graph_bucketed(points, params)
}

/// All-pairs construction. Quadratic; serves as the reference for
/// [`build_graph_bucketed`].
pub fn build_graph_naive(points: Vec<PolarPoint>, params: &ModelParams) -> HrgGraph {
    let cosh_r = params.radius().cosh();
    let cache: Vec<PointCache> = points.iter().map(|&p| PointCache::new(p)).collect();
    let mut adj = vec![Vec::new(); points.len()];
    for u in 0..points.len() {
        for v in (u + 1)..points.len() {
            if cache[u].adjacent(&cache[v], cosh_r) {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
    }
    HrgGraph { params: *params, points, graph: Graph::from_adjacency_unchecked(adj) }
}

struct Band {
    inner: f64,
    // (angle, vertex) sorted by angle
    members: Vec<(f64, usize)>,
}

/// Near-linear construction by radial bands and angular windows.
///
/// A vertex at radius `r_p` can only be adjacent to a vertex of a band with
/// inner radius `b` if their angular difference is at most
/// `theta_R(r_p, b)`, so each band is scanned only inside that window. The
/// final adjacency decision is the same floating-point test the naive
/// builder uses, so the two edge sets coincide exactly.
pub fn build_graph_bucketed(points: Vec<PolarPoint>, params: &ModelParams) -> HrgGraph {
    let big_r = params.radius();
    let cosh_r = big_r.cosh();
    let cache: Vec<PointCache> = points.iter().map(|&p| PointCache::new(p)).collect();

    let mut bounds = vec![0.0, 0.5 * big_r];
    while *bounds.last().unwrap() + 1.0 < big_r {
        let next = bounds.last().unwrap() + 1.0;
        bounds.push(next);
    }
    let mut bands: Vec<Band> = bounds.iter().map(|&inner| Band { inner, members: Vec::new() }).collect();
    for (v, p) in points.iter().enumerate() {
        let k = bounds.partition_point(|&b| b <= p.r()).saturating_sub(1);
        bands[k].members.push((p.theta(), v));
    }
    for band in bands.iter_mut() {
        band.members.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    }

    let adj: Vec<Vec<usize>> = points
        .par_iter()
        .enumerate()
        .map(|(v, p)| {
            let mut out = Vec::new();
            for band in &bands {
                if band.members.is_empty() {
                    continue;
                }
                let window = theta_r_exact(p.r(), band.inner, big_r) * (1.0 + 1e-9) + 1e-12;
                let mut visit = |lo: usize, hi: usize| {
                    for &(_, u) in &band.members[lo..hi] {
                        if u != v && cache[v].adjacent(&cache[u], cosh_r) {
                            out.push(u);
                        }
                    }
                };
                if window >= PI {
                    visit(0, band.members.len());
                    continue;
                }
                let lo_angle = p.theta() - window;
                let hi_angle = p.theta() + window;
                let idx = |a: f64| band.members.partition_point(|m| m.0 < a);
                if lo_angle < 0.0 {
                    visit(idx(lo_angle + TAU), band.members.len());
                    visit(0, idx(hi_angle));
                    continue;
                }
                if hi_angle >= TAU {
                    visit(idx(lo_angle), band.members.len());
                    visit(0, idx(hi_angle - TAU));
                    continue;
                }
                let (a, b) = (idx(lo_angle), band.members.partition_point(|m| m.0 <= hi_angle));
                visit(a, b);
            }
            out
        })
        .collect();
    HrgGraph { params: *params, points, graph: Graph::from_adjacency_unchecked(adj) }
}

/// Component labeling plus the label of the center component, the one
/// holding the vertices with `r < R/2` (they form a clique). `None` when no
/// vertex lies strictly inside `B_O(R/2)`.
pub fn components_and_center(g: &HrgGraph) -> (Components, Option<usize>) {
    let comps = g.graph.components();
    let half = 0.5 * g.radius();
    let center = g.points.iter().position(|p| p.r() < half).map(|v| comps.label(v));
    (comps, center)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeBin {
    /// Inclusive lower bound.
    pub lo: usize,
    /// Exclusive upper bound.
    pub hi: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeSummary {
    pub mean: f64,
    pub max: usize,
    pub histogram: Vec<DegreeBin>,
    /// Power-law exponent `gamma` of the degree tail, `P(D >= d) ~ d^{1-gamma}`,
    /// from a least-squares fit over degrees `>= 10`. `None` with fewer than
    /// two distinct such degrees.
    pub tail_exponent: Option<f64>,
}

pub fn degree_summary(g: &Graph) -> Result<DegreeSummary> {
    let n = g.vertex_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let degrees = g.degrees();
    let max = *degrees.iter().max().unwrap();
    let mean = 2.0 * g.edge_count() as f64 / n as f64;

    let mut histogram = vec![DegreeBin { lo: 0, hi: 1, count: 0 }];
    let mut lo = 1;
    while lo <= max {
        histogram.push(DegreeBin { lo, hi: 2 * lo, count: 0 });
        lo *= 2;
    }
    for &d in &degrees {
        let bin = if d == 0 { 0 } else { (usize::BITS - d.leading_zeros()) as usize };
        histogram[bin].count += 1;
    }

    let mut sorted = degrees.clone();
    sorted.sort_unstable();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let d = sorted[i];
        let at_least = (sorted.len() - i) as f64 / n as f64;
        if d >= 10 {
            xs.push((d as f64).ln());
            ys.push(at_least.ln());
        }
        while i < sorted.len() && sorted[i] == d {
            i += 1;
        }
    }
    let tail_exponent = crate::stats::least_squares(&xs, &ys).map(|fit| 1.0 - fit.slope);
    Ok(DegreeSummary { mean, max, histogram, tail_exponent })
}
