//! The recursive tiling of the disk into annular sectors.
//!
//! Level `i` covers radii `[h_{i-1}, h_i)` with `h_{-1} = 0`, `h_0 = R/2`,
//! `h_1 = (R + c)/2`, and for `i >= 2` the radius `h_i` halves the critical
//! angle: `theta_R(h_i, h_i) = theta_R(h_{i-1}, h_{i-1}) / 2`. Level `i` is cut
//! into `N_i = 2^i N_0` sectors of angle `theta_i = 2 pi / N_i`, and each tile
//! is split into two half-tiles of equal angle. Sector `0` of every level
//! starts at angle `0`, so tile `(i, j)` sits inside `(i - 1, j / 2)`.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, TAU};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{mu_ball_origin, theta_r_exact, ModelParams, PolarPoint};
use crate::hrg::HrgGraph;

/// Default constant in `rho(C)`.
pub const DEFAULT_C: f64 = 20.0;
/// Default constant in `rho'(C')`, the smallest value allowed, `32 ln 2`.
pub const DEFAULT_C_PRIME: f64 = 32.0 * LN_2;
/// Default tolerance for spacing validation.
pub const DEFAULT_EPSILON: f64 = 0.5 * LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TileId {
    pub level: usize,
    pub index: usize,
}

impl TileId {
    pub fn new(level: usize, index: usize) -> Self {
        TileId { level, index }
    }

    /// Root tiles are their own parent.
    pub fn parent(self) -> TileId {
        if self.level == 0 {
            self
        } else {
            TileId::new(self.level - 1, self.index / 2)
        }
    }

    pub fn children(self) -> [TileId; 2] {
        [TileId::new(self.level + 1, 2 * self.index), TileId::new(self.level + 1, 2 * self.index + 1)]
    }

    pub fn half(self, side: u8) -> HalfTileId {
        HalfTileId::new(self, side)
    }

    /// The half-tile of the parent crossed by every ray through this tile.
    /// `None` for root tiles.
    pub fn parent_half(self) -> Option<HalfTileId> {
        (self.level > 0).then(|| HalfTileId::new(self.parent(), (self.index % 2) as u8))
    }

    /// `self`, its parent, and so on down to the root tile.
    pub fn ancestors(self) -> Vec<TileId> {
        let mut out = vec![self];
        let mut t = self;
        while t.level > 0 {
            t = t.parent();
            out.push(t);
        }
        out
    }

    /// Whether `self` is `other` or one of its ancestors.
    pub fn is_ancestor_of(self, other: TileId) -> bool {
        self.level <= other.level && other.index >> (other.level - self.level) == self.index
    }

    /// Tile at `level <= self.level` containing this one.
    pub fn ancestor_at(self, level: usize) -> TileId {
        assert!(level <= self.level);
        TileId::new(level, self.index >> (self.level - level))
    }
}

impl fmt::Display for TileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T[{},{}]", self.level, self.index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HalfTileId {
    pub tile: TileId,
    pub side: u8,
}

impl HalfTileId {
    pub fn new(tile: TileId, side: u8) -> Self {
        assert!(side < 2, "side must be 0 or 1");
        HalfTileId { tile, side }
    }

    pub fn level(self) -> usize {
        self.tile.level
    }

    pub fn twin(self) -> HalfTileId {
        HalfTileId::new(self.tile, 1 - self.side)
    }

    /// Position of this half-tile among the `2 N_level` half-tiles of its level.
    pub fn half_index(self) -> usize {
        2 * self.tile.index + self.side as usize
    }

    pub fn from_half_index(level: usize, half_index: usize) -> Self {
        HalfTileId::new(TileId::new(level, half_index / 2), (half_index % 2) as u8)
    }

    /// The two level-`level + 1` tiles whose rays cross this half-tile, i.e.
    /// the child tile it is the parent half of.
    pub fn child_tile(self) -> TileId {
        TileId::new(self.tile.level + 1, self.half_index())
    }
}

impl fmt::Display for HalfTileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.tile, self.side)
    }
}

/// Everything [`lineage`] reports about a tile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lineage {
    pub parent: TileId,
    pub children: [TileId; 2],
    pub parent_half: Option<HalfTileId>,
    pub ancestors: Vec<TileId>,
}

pub fn lineage(t: TileId) -> Lineage {
    Lineage { parent: t.parent(), children: t.children(), parent_half: t.parent_half(), ancestors: t.ancestors() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TilingSpec {
    c: f64,
    epsilon: f64,
    params: ModelParams,
    /// `h[i]` is `h_i` for levels `0..=max_level`.
    h: Vec<f64>,
    n0: usize,
}

impl TilingSpec {
    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn level_count(&self) -> usize {
        self.h.len()
    }

    pub fn max_level(&self) -> usize {
        self.h.len() - 1
    }

    /// `h_i`; `h(-1) = 0`.
    pub fn h(&self, i: isize) -> f64 {
        if i < 0 {
            0.0
        } else {
            self.h[i as usize]
        }
    }

    pub fn radii(&self) -> &[f64] {
        &self.h
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    /// `N_i`, the number of tiles at level `i`.
    pub fn tiles_at(&self, level: usize) -> usize {
        self.n0 << level
    }

    /// `theta_i = 2 pi / N_i`.
    pub fn theta(&self, level: usize) -> f64 {
        TAU / self.tiles_at(level) as f64
    }

    pub fn inner_radius(&self, level: usize) -> f64 {
        self.h(level as isize - 1)
    }

    pub fn outer_radius(&self, level: usize) -> f64 {
        self.h[level]
    }

    /// Angular interval `[start, end)` of a half-tile.
    pub fn half_interval(&self, ht: HalfTileId) -> (f64, f64) {
        let w = 0.5 * self.theta(ht.level());
        let a = ht.half_index() as f64 * w;
        (a, a + w)
    }

    pub fn tile_interval(&self, t: TileId) -> (f64, f64) {
        let w = self.theta(t.level);
        (t.index as f64 * w, (t.index + 1) as f64 * w)
    }

    pub fn contains_tile(&self, t: TileId) -> bool {
        t.level < self.h.len() && t.index < self.tiles_at(t.level)
    }

    /// Radial level of a radius: the `i` with `h_{i-1} <= r < h_i`. Radii in
    /// `[h_max, R]` (possible only when `h_max = R`) go to the last level.
    pub fn level_of(&self, r: f64) -> Result<usize> {
        let big_r = self.params.radius();
        if !(r >= 0.0) || r > big_r.max(*self.h.last().unwrap()) {
            return invalid(format!("radius {r} outside the tiled disk"));
        }
        let i = self.h.partition_point(|&h| h <= r);
        Ok(i.min(self.max_level()))
    }

    /// Half-tile index of an angle at a level. The angle is scaled to root
    /// sector units once and then by `2^(level + 1)`, which is exact, so the
    /// indices of different levels nest without rounding disagreements.
    fn half_index_at(&self, theta: f64, level: usize) -> usize {
        let t = theta / TAU * self.n0 as f64;
        let scaled = t * (1u64 << (level + 1)) as f64;
        let count = 2 * self.tiles_at(level);
        (scaled.floor() as usize).min(count - 1)
    }
}

/// Builds the tiling for spacing constant `c`.
pub fn build_tiling(params: &ModelParams, c: f64) -> Result<TilingSpec> {
    build_tiling_eps(params, c, DEFAULT_EPSILON)
}

pub fn build_tiling_eps(params: &ModelParams, c: f64, epsilon: f64) -> Result<TilingSpec> {
    if !(c > 0.0) || !c.is_finite() {
        return invalid(format!("spacing constant must be positive, got {c}"));
    }
    let big_r = params.radius();
    let diag = |h: f64| theta_r_exact(h, h, big_r);
    let h1 = 0.5 * (big_r + c);
    let n0 = (TAU / diag(h1)).ceil() as usize;
    let mut h = vec![0.5 * big_r, h1];
    while *h.last().unwrap() < big_r {
        let prev = *h.last().unwrap();
        let target = 0.5 * diag(prev);
        let mut lo = prev;
        let mut hi = prev + 2.0;
        while diag(hi) > target {
            lo = hi;
            hi += 2.0;
        }
        assert!(diag(lo) >= target, "bisection bracket lost");
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if diag(mid) >= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        h.push(0.5 * (lo + hi));
    }
    Ok(TilingSpec { c, epsilon, params: *params, h, n0 })
}

/// Half-tile containing a point.
pub fn locate(p: PolarPoint, spec: &TilingSpec) -> Result<HalfTileId> {
    let level = spec.level_of(p.r())?;
    Ok(HalfTileId::from_half_index(level, spec.half_index_at(p.theta(), level)))
}

/// Half-tile at a given level on the ray through angle `theta`.
pub fn locate_on_ray(theta: f64, level: usize, spec: &TilingSpec) -> HalfTileId {
    HalfTileId::from_half_index(level, spec.half_index_at(crate::geometry::normalize_angle(theta), level))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSlack {
    pub level: usize,
    /// `eps - max_i |h_j - h_i - (j - i) ln 2|` over `1 <= i <= j = level`.
    pub spacing: f64,
    /// `eps/2 - |ln(2 e^{(R - 2 h_i)/2} / theta_{i-1})|`.
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacingReport {
    pub epsilon: f64,
    pub passed: bool,
    pub spacing_passed: bool,
    pub angle_passed: bool,
    pub levels: Vec<LevelSlack>,
}

/// Checks the two spacing families for every built level `i >= 1`.
///
/// The angle family compares `2 e^{(R - 2 h_i)/2}` against `theta_{i-1}`:
/// with `N_0` derived from `theta_R(h_1, h_1)`, the sector angle `theta_i` is
/// about half of `theta_R(h_i, h_i)`, so `theta_{i-1}` is the quantity that
/// matches the critical angle at `h_i`.
pub fn validate_spacing(spec: &TilingSpec, epsilon: f64) -> SpacingReport {
    let big_r = spec.params.radius();
    let mut levels = Vec::new();
    for j in 1..spec.level_count() {
        let spacing = (1..=j)
            .map(|i| epsilon - (spec.h[j] - spec.h[i] - (j - i) as f64 * LN_2).abs())
            .fold(f64::INFINITY, f64::min);
        let approx = 2.0 * (0.5 * (big_r - 2.0 * spec.h[j])).exp();
        let angle = 0.5 * epsilon - (approx / spec.theta(j - 1)).ln().abs();
        levels.push(LevelSlack { level: j, spacing, angle });
    }
    let spacing_passed = levels.iter().all(|l| l.spacing >= 0.0);
    let angle_passed = levels.iter().all(|l| l.angle >= 0.0);
    SpacingReport { epsilon, passed: spacing_passed && angle_passed, spacing_passed, angle_passed, levels }
}

/// Smallest `c` in `0.5, 1, 2, 4, ...` whose tiling passes
/// [`validate_spacing`]. Gives up once `c` reaches `R`.
pub fn calibrate_c(params: &ModelParams, epsilon: f64) -> Result<TilingSpec> {
    let mut c = 0.5;
    while c < params.radius() {
        let spec = build_tiling_eps(params, c, epsilon)?;
        if validate_spacing(&spec, epsilon).passed {
            return Ok(spec);
        }
        c *= 2.0;
    }
    Err(Error::InsufficientData(format!(
        "no spacing constant below R = {} passes validation with eps = {epsilon}",
        params.radius()
    )))
}

/// `rho(C) = R - ln(C R / nu) / (1 - alpha)`.
pub fn rho(params: &ModelParams, c_big: f64) -> f64 {
    params.radius() - (c_big * params.radius() / params.nu()).ln() / (1.0 - params.alpha())
}

/// `rho'(C') = R - ln(2 C' / nu) / (1 - alpha)`.
pub fn rho_prime(params: &ModelParams, c_prime: f64) -> f64 {
    params.radius() - (2.0 * c_prime / params.nu()).ln() / (1.0 - params.alpha())
}

/// Largest level `i` with `h_i <= x`.
pub fn last_level_below(spec: &TilingSpec, x: f64) -> Option<usize> {
    spec.h.iter().rposition(|&h| h <= x)
}

/// Vertices grouped by half-tile.
#[derive(Debug, Clone)]
pub struct TileIndex {
    locations: Vec<HalfTileId>,
    members: BTreeMap<HalfTileId, Vec<usize>>,
}

impl TileIndex {
    pub fn build(points: &[PolarPoint], spec: &TilingSpec) -> Result<Self> {
        let locations: Vec<HalfTileId> = points.par_iter().map(|&p| locate(p, spec)).collect::<Result<_>>()?;
        let mut members: BTreeMap<HalfTileId, Vec<usize>> = BTreeMap::new();
        for (v, &ht) in locations.iter().enumerate() {
            members.entry(ht).or_default().push(v);
        }
        Ok(TileIndex { locations, members })
    }

    pub fn location(&self, v: usize) -> HalfTileId {
        self.locations[v]
    }

    pub fn half_members(&self, ht: HalfTileId) -> &[usize] {
        self.members.get(&ht).map_or(&[], |v| v.as_slice())
    }

    pub fn tile_members(&self, t: TileId) -> Vec<usize> {
        let mut out = self.half_members(t.half(0)).to_vec();
        out.extend_from_slice(self.half_members(t.half(1)));
        out
    }

    pub fn tile_count(&self, t: TileId) -> usize {
        self.half_members(t.half(0)).len() + self.half_members(t.half(1)).len()
    }

    pub fn nonempty(&self) -> impl Iterator<Item = (&HalfTileId, &Vec<usize>)> {
        self.members.iter()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub level: usize,
    pub inner: f64,
    pub outer: f64,
    pub tiles: usize,
    pub expected_per_half: f64,
    pub vertices: usize,
    pub sparse_halves: usize,
    pub faulty_tiles: usize,
    pub robust_tiles: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyReport {
    /// Vertex count per half-tile, by level then half index.
    counts: Vec<Vec<u32>>,
    /// Expected vertices per half-tile at each level.
    expected: Vec<f64>,
    faulty: Vec<Vec<bool>>,
    robust: Vec<Vec<bool>>,
    pub rho: f64,
    pub rho_prime: f64,
    pub ell: Option<usize>,
    pub ell_prime: Option<usize>,
}

impl OccupancyReport {
    pub fn count(&self, ht: HalfTileId) -> usize {
        self.counts[ht.level()][ht.half_index()] as usize
    }

    pub fn expected(&self, level: usize) -> f64 {
        self.expected[level]
    }

    pub fn is_sparse(&self, ht: HalfTileId) -> bool {
        (self.count(ht) as f64) < 0.5 * self.expected[ht.level()]
    }

    pub fn is_faulty(&self, t: TileId) -> bool {
        self.faulty[t.level][t.index]
    }

    pub fn is_robust(&self, t: TileId) -> bool {
        self.robust[t.level][t.index]
    }

    pub fn levels(&self) -> usize {
        self.counts.len()
    }

    /// Tiles at levels whose inner radius is below `x`, i.e. the tiles
    /// meeting the open ball `B_O(x)`.
    pub fn tiles_meeting_ball<'a>(&'a self, spec: &'a TilingSpec, x: f64) -> impl Iterator<Item = TileId> + 'a {
        (0..self.levels())
            .filter(move |&i| spec.inner_radius(i) < x)
            .flat_map(move |i| (0..spec.tiles_at(i)).map(move |j| TileId::new(i, j)))
    }

    pub fn summaries(&self, spec: &TilingSpec) -> Vec<LevelSummary> {
        (0..self.levels())
            .map(|i| LevelSummary {
                level: i,
                inner: spec.inner_radius(i),
                outer: spec.outer_radius(i),
                tiles: spec.tiles_at(i),
                expected_per_half: self.expected[i],
                vertices: self.counts[i].iter().map(|&c| c as usize).sum(),
                sparse_halves: (0..2 * spec.tiles_at(i))
                    .filter(|&k| self.is_sparse(HalfTileId::from_half_index(i, k)))
                    .count(),
                faulty_tiles: self.faulty[i].iter().filter(|&&f| f).count(),
                robust_tiles: self.robust[i].iter().filter(|&&r| r).count(),
            })
            .collect()
    }

    /// JSON document with per-level summaries, the thresholds, and the
    /// faulty tiles meeting `B_O(rho')`.
    pub fn to_json(&self, spec: &TilingSpec) -> serde_json::Value {
        let flagged: Vec<String> = self
            .tiles_meeting_ball(spec, self.rho_prime)
            .filter(|&t| self.is_faulty(t))
            .map(|t| t.to_string())
            .collect();
        serde_json::json!({
            "c": spec.c(),
            "N0": spec.n0(),
            "rho": self.rho,
            "rho_prime": self.rho_prime,
            "ell": self.ell,
            "ell_prime": self.ell_prime,
            "levels": self.summaries(spec),
            "faulty_within_rho_prime": flagged,
        })
    }
}

/// Expected vertex count of one level-`i` half-tile under the exact measure.
pub fn expected_half_count(spec: &TilingSpec, level: usize) -> f64 {
    let p = spec.params();
    let mass = mu_ball_origin(spec.outer_radius(level), p) - mu_ball_origin(spec.inner_radius(level), p);
    p.n() * 0.5 * spec.theta(level) / TAU * mass
}

pub fn classify_occupancy(g: &HrgGraph, spec: &TilingSpec, c_big: f64, c_prime: f64) -> Result<OccupancyReport> {
    let levels = spec.level_count();
    let mut counts: Vec<Vec<u32>> = (0..levels).map(|i| vec![0; 2 * spec.tiles_at(i)]).collect();
    let locs: Vec<HalfTileId> = g.points().par_iter().map(|&p| locate(p, spec)).collect::<Result<_>>()?;
    for ht in locs {
        counts[ht.level()][ht.half_index()] += 1;
    }
    let expected: Vec<f64> = (0..levels).map(|i| expected_half_count(spec, i)).collect();
    let mut faulty = Vec::with_capacity(levels);
    let mut robust: Vec<Vec<bool>> = Vec::with_capacity(levels);
    for i in 0..levels {
        let threshold = 0.5 * expected[i];
        let f: Vec<bool> = (0..spec.tiles_at(i))
            .map(|j| (counts[i][2 * j] as f64) < threshold || (counts[i][2 * j + 1] as f64) < threshold)
            .collect();
        let r: Vec<bool> = (0..spec.tiles_at(i)).map(|j| !f[j] && (i == 0 || robust[i - 1][j / 2])).collect();
        faulty.push(f);
        robust.push(r);
    }
    let p = spec.params();
    let rho_v = rho(p, c_big);
    let rho_p = rho_prime(p, c_prime);
    Ok(OccupancyReport {
        counts,
        expected,
        faulty,
        robust,
        rho: rho_v,
        rho_prime: rho_p,
        ell: last_level_below(spec, rho_v),
        ell_prime: last_level_below(spec, rho_p),
    })
}

/// Angle of the midpoint of a tile.
pub fn tile_midangle(spec: &TilingSpec, t: TileId) -> f64 {
    let (a, b) = spec.tile_interval(t);
    0.5 * (a + b)
}
