//! Edge flows and the explicit tiling-compatible unit flows.
//!
//! A [`Flow`] stores one value per undirected edge on the orientation
//! `lower id -> higher id`; the reverse orientation carries the negated value,
//! so antisymmetry holds by construction. Energy uses unit conductances.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{theta_r_exact, PolarPoint};
use crate::graph::Graph;
use crate::hrg::HrgGraph;
use crate::tiling::{last_level_below, locate_on_ray, rho, HalfTileId, TileId, TileIndex, TilingSpec};

/// Default tolerance for node-law and strength checks.
pub const FLOW_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Flow {
    values: BTreeMap<(usize, usize), f64>,
    sources: Vec<usize>,
    sinks: Vec<usize>,
}

impl Flow {
    pub fn new(sources: Vec<usize>, sinks: Vec<usize>) -> Self {
        Flow { values: BTreeMap::new(), sources, sinks }
    }

    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    pub fn sinks(&self) -> &[usize] {
        &self.sinks
    }

    pub fn set_terminals(&mut self, sources: Vec<usize>, sinks: Vec<usize>) {
        self.sources = sources;
        self.sinks = sinks;
    }

    /// Adds `x` to the flow on `u -> v`.
    pub fn add(&mut self, u: usize, v: usize, x: f64) {
        assert_ne!(u, v, "flow on a self-loop");
        let (key, x) = if u < v { ((u, v), x) } else { ((v, u), -x) };
        *self.values.entry(key).or_insert(0.0) += x;
    }

    /// Value on the oriented edge `u -> v`.
    pub fn value(&self, u: usize, v: usize) -> f64 {
        if u < v {
            self.values.get(&(u, v)).copied().unwrap_or(0.0)
        } else {
            -self.values.get(&(v, u)).copied().unwrap_or(0.0)
        }
    }

    /// `(u, v, value)` with `u < v`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.values.iter().map(|(&(u, v), &x)| (u, v, x))
    }

    pub fn support_len(&self) -> usize {
        self.values.values().filter(|x| **x != 0.0).count()
    }

    pub fn is_zero(&self) -> bool {
        self.support_len() == 0
    }

    pub fn energy(&self) -> f64 {
        energy(self)
    }

    /// Pointwise sum; terminals are taken from `self`.
    pub fn plus(&self, other: &Flow) -> Flow {
        let mut out = self.clone();
        for (u, v, x) in other.iter() {
            out.add(u, v, x);
        }
        out
    }

    pub fn negated(&self) -> Flow {
        Flow {
            values: self.values.iter().map(|(&k, &x)| (k, -x)).collect(),
            sources: self.sinks.clone(),
            sinks: self.sources.clone(),
        }
    }

    /// Net outflow `sum_u f(v -> u)` at every vertex below `n`.
    pub fn divergence(&self, n: usize) -> Vec<f64> {
        let mut div = vec![0.0; n];
        for (u, v, x) in self.iter() {
            div[u] += x;
            div[v] -= x;
        }
        div
    }

    /// Writes `u,v,value` rows on the canonical orientation.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["u", "v", "value"])?;
        for (u, v, x) in self.iter() {
            wr.write_record([u.to_string(), v.to_string(), crate::io::fmt_f64(x)])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Dissipated energy `sum_e f(e)^2` over undirected edges.
pub fn energy(f: &Flow) -> f64 {
    f.values.values().map(|x| x * x).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowReport {
    /// Net outflow summed over the sources.
    pub strength: f64,
    /// Worst node-law violation over vertices outside `S ∪ T`.
    pub max_node_residual: f64,
    pub energy: f64,
    pub balanced: bool,
    /// Flow-carrying pairs that are not edges of the graph.
    pub off_graph_edges: usize,
}

impl FlowReport {
    /// Valid unit flow: node law, unit strength, support on the graph.
    pub fn is_unit(&self, tol: f64) -> bool {
        self.max_node_residual <= tol && (self.strength - 1.0).abs() <= tol && self.off_graph_edges == 0
    }
}

pub fn validate_flow(g: &Graph, f: &Flow, tol: f64) -> FlowReport {
    let n = g.vertex_count();
    let max_id = f.iter().map(|(_, v, _)| v + 1).max().unwrap_or(0);
    let div = f.divergence(n.max(max_id));
    let mut terminal = vec![false; div.len()];
    for &v in f.sources.iter().chain(&f.sinks) {
        if v < terminal.len() {
            terminal[v] = true;
        }
    }
    let max_node_residual =
        div.iter().zip(&terminal).filter(|(_, &t)| !t).map(|(d, _)| d.abs()).fold(0.0, f64::max);
    let out_at = |v: usize| div.get(v).copied().unwrap_or(0.0);
    let strength: f64 = f.sources.iter().map(|&s| out_at(s)).sum();
    let spread = |xs: Vec<f64>| {
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        xs.is_empty() || hi - lo <= tol
    };
    let balanced = spread(f.sources.iter().map(|&s| out_at(s)).collect())
        && spread(f.sinks.iter().map(|&t| -out_at(t)).collect());
    let off_graph_edges = f.iter().filter(|&(u, v, x)| x != 0.0 && (v >= n || !g.has_edge(u, v))).count();
    FlowReport { strength, max_node_residual, energy: energy(f), balanced, off_graph_edges }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Source,
    Sink,
}

/// A graph together with its tiling and half-tile membership.
#[derive(Debug, Clone)]
pub struct FlowContext<'a> {
    graph: &'a Graph,
    spec: &'a TilingSpec,
    index: TileIndex,
}

impl<'a> FlowContext<'a> {
    pub fn new(g: &'a HrgGraph, spec: &'a TilingSpec) -> Result<Self> {
        Self::from_parts(g.graph(), g.points(), spec)
    }

    /// `points` gives the tiled vertices; `graph` may hold extra vertices
    /// (an added terminal) beyond them.
    pub fn from_parts(graph: &'a Graph, points: &[PolarPoint], spec: &'a TilingSpec) -> Result<Self> {
        Ok(FlowContext { graph, spec, index: TileIndex::build(points, spec)? })
    }

    pub fn index(&self) -> &TileIndex {
        &self.index
    }

    pub fn spec(&self) -> &TilingSpec {
        self.spec
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    fn members(&self, ht: HalfTileId) -> Result<&[usize]> {
        let m = self.index.half_members(ht);
        if m.is_empty() {
            return Err(Error::EmptyHalfTile(ht));
        }
        Ok(m)
    }

    fn place(&self, f: &mut Flow, u: usize, v: usize, x: f64) -> Result<()> {
        if !self.graph.has_edge(u, v) {
            return Err(Error::GeometryViolation(u, v));
        }
        f.add(u, v, x);
        Ok(())
    }

    /// `f_{s,H(s)}` (source) or `f_{H(t),t}` (sink).
    pub fn source_sink_flow(&self, v: usize, direction: Direction) -> Result<Flow> {
        let h = self.index.location(v);
        let members = self.members(h)?;
        let x = 1.0 / members.len() as f64;
        let mut f = match direction {
            Direction::Source => Flow::new(vec![v], members.to_vec()),
            Direction::Sink => Flow::new(members.to_vec(), vec![v]),
        };
        for &u in members.iter().filter(|&&u| u != v) {
            match direction {
                Direction::Source => self.place(&mut f, v, u, x)?,
                Direction::Sink => self.place(&mut f, u, v, x)?,
            }
        }
        Ok(f)
    }

    /// Balanced unit flow from `V ∩ hs` to `V ∩ ht`.
    pub fn half_tile_flow(&self, hs: HalfTileId, ht: HalfTileId) -> Result<Flow> {
        let plan = plan_middle(hs, ht);
        for h in collection(hs, ht, &plan) {
            self.members(h)?;
        }
        let mut f = Flow::new(self.members(hs)?.to_vec(), self.members(ht)?.to_vec());
        match plan {
            Plan::Identical => {}
            Plan::SameRay { toward_t } => {
                let chain = if toward_t { self.chain_flow(hs, ht)? } else { self.chain_flow(ht, hs)?.negated() };
                f = f.plus(&chain);
            }
            Plan::Split { a_s, a_t } => {
                f = f.plus(&self.chain_flow(hs, a_s)?);
                let (ms, mt) = (self.members(a_s)?, self.members(a_t)?);
                let x = 1.0 / (ms.len() * mt.len()) as f64;
                for &u in ms {
                    for &v in mt {
                        self.place(&mut f, u, v, x)?;
                    }
                }
                f = f.plus(&self.chain_flow(ht, a_t)?.negated());
            }
        }
        Ok(f)
    }

    /// Pushes one unit from `V ∩ from` down the lineage to `V ∩ to`,
    /// equalizing inside each tile before every radial step.
    fn chain_flow(&self, from: HalfTileId, to: HalfTileId) -> Result<Flow> {
        let mut f = Flow::default();
        let mut h = from;
        while h != to {
            let t = h.tile;
            let mh = self.members(h)?;
            let mt = self.index.half_members(h.twin());
            let size_t = (mh.len() + mt.len()) as f64;
            let x = 1.0 / (size_t * mh.len() as f64);
            for &u in mh {
                for &v in mt {
                    self.place(&mut f, u, v, x)?;
                }
            }
            let p = t.parent_half().expect("target lies on the lineage");
            let mp = self.members(p)?;
            let y = 1.0 / (size_t * mp.len() as f64);
            for &u in mh.iter().chain(mt) {
                for &w in mp {
                    self.place(&mut f, u, w, y)?;
                }
            }
            h = p;
        }
        Ok(f)
    }

    /// Composite `f_{s,t} = f_{s,H(s)} + f_{H(s),H(t)} + f_{H(t),t}`.
    pub fn st_flow(&self, s: usize, t: usize) -> Result<Flow> {
        if s == t {
            return Err(Error::SameVertex(s));
        }
        let hs = self.index.location(s);
        let ht = self.index.location(t);
        let mut f = self.source_sink_flow(s, Direction::Source)?;
        f = f.plus(&self.half_tile_flow(hs, ht)?);
        f = f.plus(&self.source_sink_flow(t, Direction::Sink)?);
        f.set_terminals(vec![s], vec![t]);
        Ok(f)
    }
}

/// How the middle flow between two half-tiles is routed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plan {
    Identical,
    /// One half-tile lies on the other's lineage toward the origin.
    /// `toward_t` when `H_t` is the one closer to the origin.
    SameRay { toward_t: bool },
    /// Route `H_s -> a_s`, then `a_s -> a_t` directly, then `a_t -> H_t`.
    Split { a_s: HalfTileId, a_t: HalfTileId },
}

/// `h`, the parent half-tile of its tile, and so on up to a root tile.
pub fn chain(h: HalfTileId) -> Vec<HalfTileId> {
    let mut out = vec![h];
    let mut cur = h;
    while let Some(p) = cur.tile.parent_half() {
        out.push(p);
        cur = p;
    }
    out
}

pub fn plan_middle(hs: HalfTileId, ht: HalfTileId) -> Plan {
    if hs == ht {
        return Plan::Identical;
    }
    let cs = chain(hs);
    let ct = chain(ht);
    if cs.contains(&ht) {
        return Plan::SameRay { toward_t: true };
    }
    if ct.contains(&hs) {
        return Plan::SameRay { toward_t: false };
    }
    let (ts, tt) = (hs.tile, ht.tile);
    let top = ts.level.min(tt.level);
    let common = (0..=top).rev().find(|&l| ts.ancestor_at(l) == tt.ancestor_at(l));
    let level = common.unwrap_or(0);
    Plan::Split { a_s: cs[ts.level - level], a_t: ct[tt.level - level] }
}

/// Half-tiles that must be nonempty for the middle flow: the two anchors
/// and both halves of every tile on exactly one of the two lineages.
fn collection(hs: HalfTileId, ht: HalfTileId, plan: &Plan) -> Vec<HalfTileId> {
    let mut out = match *plan {
        Plan::Identical => vec![hs],
        Plan::SameRay { toward_t: true } => vec![ht],
        Plan::SameRay { toward_t: false } => vec![hs],
        Plan::Split { a_s, a_t } => vec![a_s, a_t],
    };
    let anc_s = hs.tile.ancestors();
    let anc_t = ht.tile.ancestors();
    for t in anc_s.iter().filter(|t| !anc_t.contains(t)).chain(anc_t.iter().filter(|t| !anc_s.contains(t))) {
        out.push(t.half(0));
        out.push(t.half(1));
    }
    out
}

pub fn source_sink_flow(g: &HrgGraph, spec: &TilingSpec, v: usize, direction: Direction) -> Result<Flow> {
    FlowContext::new(g, spec)?.source_sink_flow(v, direction)
}

pub fn half_tile_flow(g: &HrgGraph, spec: &TilingSpec, hs: HalfTileId, ht: HalfTileId) -> Result<Flow> {
    FlowContext::new(g, spec)?.half_tile_flow(hs, ht)
}

pub fn st_flow(g: &HrgGraph, spec: &TilingSpec, s: usize, t: usize) -> Result<Flow> {
    FlowContext::new(g, spec)?.st_flow(s, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommuteLevels {
    /// Largest level with `h <= rho(C)`.
    pub ell: usize,
    /// Level of the tile holding the added vertex.
    pub ell_w: usize,
    pub ell_prime_w: usize,
    pub k_w: usize,
}

impl CommuteLevels {
    /// Level of `T_w` and `H_w`.
    pub fn anchor_level(&self) -> usize {
        self.ell_prime_w - self.k_w
    }
}

/// Levels steering the flow out of a vertex added at radius `r_w`.
///
/// Requires `(1 - 1/(2 alpha)) R <= r_w < rho(C)` and `rho(C) >= R/2`.
pub fn commute_levels(spec: &TilingSpec, r_w: f64, c_big: f64) -> Result<CommuteLevels> {
    let p = spec.params();
    let (a, big_r) = (p.alpha(), p.radius());
    let rho_v = rho(p, c_big);
    let lower = (1.0 - 1.0 / (2.0 * a)) * big_r;
    if !(lower <= r_w && r_w < rho_v) {
        return invalid(format!("added vertex radius {r_w} outside [{lower}, {rho_v})"));
    }
    let ell = match last_level_below(spec, rho_v) {
        Some(l) => l,
        None => return invalid(format!("rho = {rho_v} lies below R/2, no level fits")),
    };
    let ell_w = spec.level_of(r_w)?;
    let first = (0..spec.level_count()).find(|&i| big_r - spec.h(i as isize) <= (2.0 * a - 1.0) * (big_r - r_w));
    let ell_prime_w = first.map_or(ell + 1, |f| f.min(ell + 1));
    let h_lw = spec.h(ell_prime_w as isize);
    let bound = theta_r_exact(r_w, h_lw, big_r);
    let mut k_w = 0;
    while k_w < ell_prime_w {
        let h = spec.h((ell_prime_w - k_w - 1) as isize);
        if theta_r_exact(h, h, big_r) <= bound {
            k_w += 1;
        } else {
            break;
        }
    }
    let levels = CommuteLevels { ell, ell_w, ell_prime_w, k_w };
    if !(r_w <= h_lw && ell_w <= ell_prime_w && ell_prime_w <= ell + 1 && k_w <= ell_prime_w - ell_w) {
        return Err(Error::InvalidArgument(format!("commute level postconditions fail: {levels:?}")));
    }
    Ok(levels)
}

/// `2^{k_w} e^{R - h} / e^{(R - r_w)/2 + (R - h)/2}` with `h = h_{ell'_w}`;
/// bounded above and below by constants.
pub fn fact_ratio(spec: &TilingSpec, r_w: f64, levels: &CommuteLevels) -> f64 {
    let big_r = spec.params().radius();
    let h = spec.h(levels.ell_prime_w as isize);
    let log = levels.k_w as f64 * std::f64::consts::LN_2 + (big_r - h) - 0.5 * (big_r - r_w) - 0.5 * (big_r - h);
    log.exp()
}

/// Whether every tile meeting `B_O(rho(C))` is non-faulty, the hypothesis
/// under which [`commute_flow`] is guaranteed to exist.
pub fn no_faulty_within_rho(report: &crate::tiling::OccupancyReport, spec: &TilingSpec) -> bool {
    report.tiles_meeting_ball(spec, report.rho).all(|t| !report.is_faulty(t))
}

/// The graph with `w` added, plus the unit flow from `w` onto `V ∩ H_w`.
#[derive(Debug, Clone)]
pub struct CommuteFlow {
    pub graph: HrgGraph,
    pub w: usize,
    pub h_w: HalfTileId,
    pub levels: CommuteLevels,
    pub flow: Flow,
}

/// Builds `f_{w,H_w}` for a vertex added to `g` at `w`.
///
/// One unit leaves `w` split evenly over the `2^{k_w}` level-`ell'_w`
/// half-tiles below `H_w`. Then, level by level toward `H_w`, each tile first
/// equalizes its vertices' load across its two halves and then pushes it into
/// its parent half-tile.
pub fn commute_flow(g: &HrgGraph, spec: &TilingSpec, w: PolarPoint, c_big: f64) -> Result<CommuteFlow> {
    let levels = commute_levels(spec, w.r(), c_big)?;
    let (aug, wid) = g.with_added_vertex(w);
    let ctx = FlowContext::from_parts(aug.graph(), g.points(), spec)?;
    let base = levels.anchor_level();
    let k = levels.k_w;
    let h_w = locate_on_ray(w.theta(), base, spec);

    // tiles below H_w, by generation 1..=k
    let tiles_at = |s: usize| -> Vec<TileId> {
        let first = h_w.half_index() << (s - 1);
        (first..first + (1 << (s - 1))).map(|j| TileId::new(base + s, j)).collect()
    };
    ctx.members(h_w)?;
    for s in 1..=k {
        for t in tiles_at(s) {
            ctx.members(t.half(0))?;
            ctx.members(t.half(1))?;
        }
    }

    let mut f = Flow::new(vec![wid], ctx.index.half_members(h_w).to_vec());
    let leaves: Vec<HalfTileId> =
        if k == 0 { vec![h_w] } else { tiles_at(k).into_iter().flat_map(|t| [t.half(0), t.half(1)]).collect() };
    let share = 1.0 / (1u64 << k) as f64;
    for h in leaves {
        let m = ctx.members(h)?;
        for &v in m {
            ctx.place(&mut f, wid, v, share / m.len() as f64)?;
        }
    }
    for s in (1..=k).rev() {
        let a = 1.0 / (1u64 << s) as f64;
        for t in tiles_at(s) {
            let (m0, m1) = (ctx.members(t.half(0))?, ctx.members(t.half(1))?);
            let size_t = (m0.len() + m1.len()) as f64;
            let (small, large) = if m0.len() <= m1.len() { (m0, m1) } else { (m1, m0) };
            if small.len() < large.len() {
                let x = (a / small.len() as f64 - a / large.len() as f64) / size_t;
                for &u in small {
                    for &v in large {
                        ctx.place(&mut f, u, v, x)?;
                    }
                }
            }
            let p = t.parent_half().expect("descendant tiles are not roots");
            let mp = ctx.members(p)?;
            let y = 2.0 * a / size_t / mp.len() as f64;
            for &u in m0.iter().chain(m1) {
                for &v in mp {
                    ctx.place(&mut f, u, v, y)?;
                }
            }
        }
    }
    Ok(CommuteFlow { graph: aug, w: wid, h_w, levels, flow: f })
}
