//! Simple random walks: Monte Carlo estimators and exact linear-algebra
//! counterparts for hitting, commute, cover and target times.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::Graph;
use crate::resistance::LaplacianSystem;
use crate::rng::{derive_seed, rng_from_seed, Rng};
use crate::stats;

/// Default per-realization step cap.
pub const DEFAULT_MAX_STEPS: u64 = 1_000_000_000;
/// Largest component accepted by [`exact_hitting_vector`].
pub const HITTING_CAP: usize = 50_000;
/// Largest component for the exact target-time double sum.
pub const TARGET_EXACT_CAP: usize = 2000;
/// Up to this size the maximum hitting time is computed over all targets.
pub const MAX_HITTING_EXACT: usize = 500;
/// Constant `c` in `t_target = c / |E| * sum_{u,v} R(u,v) d(u) d(v)` over
/// ordered pairs.
pub const TARGET_TIME_CONSTANT: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub seed: u64,
    pub max_steps: u64,
    pub repetitions: usize,
}

impl WalkConfig {
    pub fn new(seed: u64, repetitions: usize) -> Self {
        WalkConfig { seed, max_steps: DEFAULT_MAX_STEPS, repetitions }
    }

    fn check(&self) -> Result<()> {
        if self.max_steps < 1 || self.repetitions < 1 {
            return invalid("walk config needs max_steps >= 1 and repetitions >= 1");
        }
        Ok(())
    }
}

/// Summary of completed repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkStats {
    pub mean: f64,
    pub std_error: f64,
    /// Completed repetitions.
    pub reps: usize,
}

impl WalkStats {
    fn from_samples(xs: &[f64]) -> Self {
        let std_error = if xs.len() > 1 { stats::std_error(xs) } else { 0.0 };
        WalkStats { mean: stats::mean(xs), std_error, reps: xs.len() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDist {
    pi: Vec<f64>,
    cumulative: Vec<f64>,
}

impl StationaryDist {
    /// `pi(v) = d(v) / (2|E|)` on a connected graph.
    pub fn new(g: &Graph) -> Result<Self> {
        if g.vertex_count() == 0 {
            return Err(Error::EmptyGraph);
        }
        if !g.is_connected() || g.edge_count() == 0 {
            return Err(Error::NotConnected);
        }
        let two_m = 2.0 * g.edge_count() as f64;
        let pi: Vec<f64> = g.degrees().iter().map(|&d| d as f64 / two_m).collect();
        let mut acc = 0.0;
        let cumulative = pi
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(StationaryDist { pi, cumulative })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.pi
    }

    pub fn sample(&self, rng: &mut Rng) -> usize {
        let total = *self.cumulative.last().unwrap();
        let u = rng.gen::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= u).min(self.pi.len() - 1)
    }
}

#[inline]
fn step(g: &Graph, v: usize, rng: &mut Rng) -> usize {
    let nb = g.neighbors(v);
    nb[rng.gen_range(0..nb.len())]
}

/// Steps from `from` until `to` is reached, or `None` past the cap.
fn walk_until(g: &Graph, from: usize, to: usize, cap: u64, rng: &mut Rng) -> Option<u64> {
    let mut v = from;
    let mut t = 0;
    while v != to {
        if t >= cap {
            return None;
        }
        v = step(g, v, rng);
        t += 1;
    }
    Some(t)
}

fn run_reps<F>(cfg: &WalkConfig, one: F) -> Result<WalkStats>
where
    F: Fn(&mut Rng) -> Option<u64> + Sync,
{
    cfg.check()?;
    let outcomes: Vec<Option<u64>> = (0..cfg.repetitions)
        .into_par_iter()
        .map(|i| one(&mut rng_from_seed(derive_seed(cfg.seed, i as u64))))
        .collect();
    let done: Vec<f64> = outcomes.iter().flatten().map(|&t| t as f64).collect();
    let failures = cfg.repetitions - done.len();
    let stats = WalkStats::from_samples(&done);
    if failures > 0 {
        return Err(Error::StepCapExceeded { cap: cfg.max_steps, failures, reps: cfg.repetitions, partial: stats });
    }
    Ok(stats)
}

fn same_component(g: &Graph, u: usize, v: usize) -> Result<()> {
    let n = g.vertex_count();
    if u >= n || v >= n {
        return invalid(format!("vertex out of range for {n} vertices"));
    }
    if g.bfs_distances(u)[v] == usize::MAX {
        return Err(Error::DisconnectedPair(u, v));
    }
    Ok(())
}

/// Steps for a walk from `u` to first reach `v`.
pub fn simulate_hitting(g: &Graph, u: usize, v: usize, cfg: &WalkConfig) -> Result<WalkStats> {
    same_component(g, u, v)?;
    run_reps(cfg, |rng| walk_until(g, u, v, cfg.max_steps, rng))
}

/// Steps for a walk from `u` to reach `v` and return to `u`.
pub fn simulate_commute(g: &Graph, u: usize, v: usize, cfg: &WalkConfig) -> Result<WalkStats> {
    same_component(g, u, v)?;
    run_reps(cfg, |rng| {
        let there = walk_until(g, u, v, cfg.max_steps, rng)?;
        let back = walk_until(g, v, u, cfg.max_steps - there, rng)?;
        Some(there + back)
    })
}

/// Steps for a walk from `start` to visit every vertex of a connected graph.
pub fn simulate_cover(g: &Graph, start: usize, cfg: &WalkConfig) -> Result<WalkStats> {
    let n = g.vertex_count();
    if start >= n {
        return invalid(format!("start {start} out of range for {n} vertices"));
    }
    if !g.is_connected() {
        return Err(Error::NotConnected);
    }
    run_reps(cfg, |rng| {
        let mut seen = vec![false; n];
        seen[start] = true;
        let mut left = n - 1;
        let mut v = start;
        let mut t = 0;
        while left > 0 {
            if t >= cfg.max_steps {
                return None;
            }
            v = step(g, v, rng);
            t += 1;
            if !seen[v] {
                seen[v] = true;
                left -= 1;
            }
        }
        Some(t)
    })
}

/// `E_u[tau_v]` for every `u`.
///
/// `h` solves `L h = d` off `v` with `h(v) = 0`; equivalently
/// `h = x - x(v)` where `L x = d - 2|E| e_v`.
pub fn exact_hitting_vector(sys: &LaplacianSystem, v: usize) -> Result<Vec<f64>> {
    let n = sys.vertex_count();
    if n > HITTING_CAP {
        return Err(Error::SizeCap { size: n, cap: HITTING_CAP });
    }
    if v >= n {
        return invalid(format!("target {v} out of range for {n} vertices"));
    }
    let mut b = sys.degrees().to_vec();
    b[v] -= 2.0 * sys.edge_count() as f64;
    let x = sys.solve(&b)?;
    Ok(x.iter().map(|xi| xi - x[v]).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TargetMethod {
    Exact,
    /// Average over this many targets drawn from `pi`.
    Sampled(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetTime {
    pub value: f64,
    /// Standard error; zero when exact.
    pub std_error: f64,
}

/// `sum_u pi(u) E_u[tau_v]` for one target.
fn stationary_hitting(sys: &LaplacianSystem, pi: &[f64], v: usize) -> Result<f64> {
    let h = exact_hitting_vector(sys, v)?;
    Ok(h.iter().zip(pi).map(|(a, b)| a * b).sum())
}

/// Target time `sum_{u,v} E_u[tau_v] pi(u) pi(v)`.
pub fn target_time(sys: &LaplacianSystem, method: TargetMethod, seed: u64) -> Result<TargetTime> {
    let n = sys.vertex_count();
    if n < 2 {
        return invalid("target time needs at least two vertices");
    }
    let dist = StationaryDist::new(sys.graph())?;
    let pi = dist.probabilities();
    match method {
        TargetMethod::Exact => {
            if n > TARGET_EXACT_CAP {
                return Err(Error::SizeCap { size: n, cap: TARGET_EXACT_CAP });
            }
            let per: Vec<f64> =
                (0..n).into_par_iter().map(|v| stationary_hitting(sys, pi, v).map(|x| x * pi[v])).collect::<Result<_>>()?;
            Ok(TargetTime { value: per.iter().sum(), std_error: 0.0 })
        }
        TargetMethod::Sampled(m) => {
            if m < 2 {
                return invalid("sampled target time needs at least two targets");
            }
            let mut rng = rng_from_seed(seed);
            let targets: Vec<usize> = (0..m).map(|_| dist.sample(&mut rng)).collect();
            let vals: Vec<f64> =
                targets.par_iter().map(|&v| stationary_hitting(sys, pi, v)).collect::<Result<_>>()?;
            Ok(TargetTime { value: stats::mean(&vals), std_error: stats::std_error(&vals) })
        }
    }
}

/// `sum_{u,v} R(u,v) d(u) d(v) / |E|` over ordered pairs, from the dense
/// resistance matrix.
pub fn resistance_degree_sum(g: &Graph, cap: usize) -> Result<f64> {
    let r = crate::resistance::resistance_matrix(g, cap)?;
    let d: Vec<f64> = g.degrees().iter().map(|&x| x as f64).collect();
    let n = g.vertex_count();
    let mut s = 0.0;
    for u in 0..n {
        for v in 0..n {
            s += r[(u, v)] * d[u] * d[v];
        }
    }
    Ok(s / g.edge_count() as f64)
}

/// Target time through resistances: `constant / |E| * sum R(u,v) d(u) d(v)`.
pub fn target_time_resistance_form(g: &Graph, constant: f64, cap: usize) -> Result<f64> {
    Ok(constant * resistance_degree_sum(g, cap)?)
}

/// The constant that makes the resistance form equal the definition sum.
pub fn calibrate_target_constant(sys: &LaplacianSystem, cap: usize) -> Result<f64> {
    let t = target_time(sys, TargetMethod::Exact, 0)?.value;
    Ok(t / resistance_degree_sum(sys.graph(), cap)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HittingStrategy {
    /// Every target.
    Exact,
    /// The `k` targets with lowest degree, ties broken by largest radius.
    Candidates(usize),
    /// `Exact` up to 500 vertices, `Candidates(k)` above.
    Auto(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxHitting {
    pub value: f64,
    pub source: usize,
    pub target: usize,
    /// False when only candidate targets were scanned; the value is then a
    /// lower bound on the true maximum.
    pub exact: bool,
}

/// Largest `E_u[tau_v]`. `radii` breaks degree ties among candidates.
pub fn max_hitting_estimate(
    sys: &LaplacianSystem,
    radii: Option<&[f64]>,
    strategy: HittingStrategy,
) -> Result<MaxHitting> {
    let n = sys.vertex_count();
    let (targets, exact): (Vec<usize>, bool) = match strategy {
        HittingStrategy::Exact => ((0..n).collect(), true),
        HittingStrategy::Auto(_) if n <= MAX_HITTING_EXACT => ((0..n).collect(), true),
        HittingStrategy::Candidates(k) | HittingStrategy::Auto(k) => {
            let mut order: Vec<usize> = (0..n).collect();
            let deg = sys.degrees();
            order.sort_by(|&a, &b| {
                deg[a].total_cmp(&deg[b]).then_with(|| match radii {
                    Some(r) => r[b].total_cmp(&r[a]),
                    None => a.cmp(&b),
                })
            });
            order.truncate(k.max(1));
            let all = order.len() == n;
            (order, all)
        }
    };
    let best: Vec<(f64, usize, usize)> = targets
        .par_iter()
        .map(|&v| {
            let h = exact_hitting_vector(sys, v)?;
            let (u, val) = h.iter().enumerate().fold((v, 0.0), |acc, (u, &x)| if x > acc.1 { (u, x) } else { acc });
            Ok((val, u, v))
        })
        .collect::<Result<_>>()?;
    let (value, source, target) = best.into_iter().fold((0.0, 0, 0), |acc, x| if x.0 > acc.0 { x } else { acc });
    Ok(MaxHitting { value, source, target, exact })
}

/// Upper bound `t_hit * H_n` on the cover time.
pub fn matthews_upper(t_hit: f64, n: usize) -> f64 {
    t_hit * stats::harmonic(n)
}

/// Lower bound `kappa_U ln|U| / 2` on the cover time, with `kappa_U` the
/// smallest commute time `2|E| R(u, v)` between distinct vertices of `U`.
pub fn kklv_lower(sys: &LaplacianSystem, set: &[usize]) -> Result<f64> {
    let mut u_set = set.to_vec();
    u_set.sort_unstable();
    u_set.dedup();
    if u_set.len() < 2 {
        return invalid("the vertex set needs at least two vertices");
    }
    let n = sys.vertex_count();
    if u_set.iter().any(|&u| u >= n) {
        return invalid("vertex out of range");
    }
    // Green's function columns: R(u,v) = G(u,u) + G(v,v) - 2 G(u,v)
    let cols: Vec<Vec<f64>> = u_set
        .par_iter()
        .map(|&u| {
            let mut b = vec![-1.0 / n as f64; n];
            b[u] += 1.0;
            sys.solve(&b)
        })
        .collect::<Result<_>>()?;
    let mut min_r = f64::INFINITY;
    for i in 0..u_set.len() {
        for j in (i + 1)..u_set.len() {
            let (a, b) = (u_set[i], u_set[j]);
            let r = cols[i][a] + cols[j][b] - 2.0 * cols[i][b];
            min_r = min_r.min(r);
        }
    }
    let kappa = 2.0 * sys.edge_count() as f64 * min_r;
    Ok(0.5 * kappa * (u_set.len() as f64).ln())
}

/// Maximal dangling paths with at least `min_length` vertices, each listed
/// from its free end toward the attachment vertex (which is not included).
///
/// A path hanging off a vertex of degree `>= 3` through a single edge is
/// found by walking inward from its degree-1 end across degree-2 vertices.
/// A component that is itself a path has no attachment and is skipped.
pub fn find_dangling_paths(g: &Graph, min_length: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for leaf in 0..g.vertex_count() {
        if g.degree(leaf) != 1 {
            continue;
        }
        let mut path = vec![leaf];
        let mut prev = leaf;
        let mut cur = g.neighbors(leaf)[0];
        while g.degree(cur) == 2 {
            path.push(cur);
            let nb = g.neighbors(cur);
            let next = if nb[0] == prev { nb[1] } else { nb[0] };
            prev = cur;
            cur = next;
        }
        if g.degree(cur) >= 3 && path.len() >= min_length {
            out.push(path);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named;
    use crate::resistance::{effective_resistance, resistance_matrix};
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};

    fn sys(g: &Graph) -> LaplacianSystem {
        LaplacianSystem::new(g).unwrap()
    }

    /// Expected cover time from every start by solving the chain on
    /// (position, visited set) states. Test-only, `|V| <= 10`.
    fn brute_cover(g: &Graph) -> Vec<f64> {
        let n = g.vertex_count();
        assert!(n <= 10);
        let full = (1usize << n) - 1;
        let mut e = vec![vec![0.0; n]; 1 << n];
        let mut masks: Vec<usize> = (1..=full).collect();
        masks.sort_by_key(|m| std::cmp::Reverse(m.count_ones()));
        for &mask in &masks {
            if mask == full {
                continue;
            }
            let inside: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
            let k = inside.len();
            let pos = |v: usize| inside.iter().position(|&x| x == v);
            let mut a = DMatrix::<f64>::identity(k, k);
            let mut b = DVector::<f64>::from_element(k, 1.0);
            for (i, &v) in inside.iter().enumerate() {
                let p = 1.0 / g.degree(v) as f64;
                for &w in g.neighbors(v) {
                    match pos(w) {
                        Some(j) => a[(i, j)] -= p,
                        None => b[i] += p * e[mask | 1 << w][w],
                    }
                }
            }
            let x = a.lu().solve(&b).unwrap();
            for (i, &v) in inside.iter().enumerate() {
                e[mask][v] = x[i];
            }
        }
        (0..n).map(|v| e[1 << v][v]).collect()
    }

    #[test]
    fn brute_cover_small_cases() {
        assert_relative_eq!(brute_cover(&named::path(2))[0], 1.0, epsilon = 1e-12);
        for c in brute_cover(&named::complete(3)) {
            assert_relative_eq!(c, 3.0, epsilon = 1e-12);
        }
        // P3 from an end is 4; from the middle it is 1 + 4 = 5... via hitting the far end
        let p3 = brute_cover(&named::path(3));
        assert_relative_eq!(p3[0], 4.0, epsilon = 1e-12);
    }

    #[test]
    fn exact_hitting_examples() {
        let h = exact_hitting_vector(&sys(&named::complete(3)), 0).unwrap();
        assert_relative_eq!(h[1], 2.0, epsilon = 1e-12);
        assert_relative_eq!(h[2], 2.0, epsilon = 1e-12);
        assert_eq!(h[0], 0.0);
        let h = exact_hitting_vector(&sys(&named::path(3)), 2).unwrap();
        assert_relative_eq!(h[0], 4.0, epsilon = 1e-12);
        assert_relative_eq!(h[1], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn target_time_examples() {
        let k3 = sys(&named::complete(3));
        assert_relative_eq!(target_time(&k3, TargetMethod::Exact, 0).unwrap().value, 4.0 / 3.0, epsilon = 1e-12);
        let e = sys(&named::path(2));
        assert_relative_eq!(target_time(&e, TargetMethod::Exact, 0).unwrap().value, 0.5, epsilon = 1e-12);
        assert_relative_eq!(calibrate_target_constant(&k3, 100).unwrap(), TARGET_TIME_CONSTANT, epsilon = 1e-12);
        for g in [named::path(7), named::star(5), named::lollipop(5, 4), named::cycle(9)] {
            let s = sys(&g);
            let t = target_time(&s, TargetMethod::Exact, 0).unwrap().value;
            assert!(t >= g.vertex_count() as f64 / 8.0);
            let r = target_time_resistance_form(&g, TARGET_TIME_CONSTANT, 100).unwrap();
            assert_relative_eq!(t, r, max_relative = 1e-10);
        }
    }

    #[test]
    fn sampled_target_time_tracks_exact() {
        let g = named::lollipop(12, 10);
        let s = sys(&g);
        let exact = target_time(&s, TargetMethod::Exact, 0).unwrap().value;
        let est = target_time(&s, TargetMethod::Sampled(200), 5).unwrap();
        assert!((est.value - exact).abs() <= 3.0 * 1.96 * est.std_error, "{est:?} vs {exact}");
    }

    #[test]
    fn max_hitting_examples() {
        let p3 = max_hitting_estimate(&sys(&named::path(3)), None, HittingStrategy::Exact).unwrap();
        assert_relative_eq!(p3.value, 4.0, epsilon = 1e-12);
        let star = max_hitting_estimate(&sys(&named::star(3)), None, HittingStrategy::Exact).unwrap();
        assert_relative_eq!(star.value, 6.0, epsilon = 1e-12);
        let g = named::lollipop(6, 5);
        let exact = max_hitting_estimate(&sys(&g), None, HittingStrategy::Exact).unwrap();
        let cand = max_hitting_estimate(&sys(&g), None, HittingStrategy::Candidates(2)).unwrap();
        assert!(!cand.exact && cand.value <= exact.value + 1e-9);
    }

    #[test]
    fn commute_identity_on_small_graphs() {
        for g in [named::path(5), named::lollipop(4, 3), named::cycle(6), named::star(4)] {
            let s = sys(&g);
            let r = resistance_matrix(&g, 100).unwrap();
            let two_m = 2.0 * g.edge_count() as f64;
            let hs: Vec<Vec<f64>> = (0..g.vertex_count()).map(|v| exact_hitting_vector(&s, v).unwrap()).collect();
            for u in 0..g.vertex_count() {
                for v in 0..g.vertex_count() {
                    assert_relative_eq!(hs[v][u] + hs[u][v], two_m * r[(u, v)], epsilon = 1e-8);
                }
            }
        }
    }

    #[test]
    fn monte_carlo_small_values() {
        let k3 = named::complete(3);
        let cfg = WalkConfig::new(7, 10_000);
        let h = simulate_hitting(&k3, 0, 1, &cfg).unwrap();
        assert!((h.mean - 2.0).abs() <= 3.0 * h.std_error);
        let c = simulate_cover(&k3, 0, &cfg).unwrap();
        assert!((c.mean - 3.0).abs() <= 3.0 * c.std_error);
        let m = simulate_commute(&k3, 0, 1, &cfg).unwrap();
        assert!((m.mean - 4.0).abs() <= 3.0 * m.std_error);
        let p3 = named::path(3);
        let h = simulate_hitting(&p3, 0, 2, &cfg).unwrap();
        assert!((h.mean - 4.0).abs() <= 3.0 * h.std_error);
        let m = simulate_commute(&p3, 0, 2, &cfg).unwrap();
        assert!((m.mean - 8.0).abs() <= 3.0 * m.std_error);
    }

    #[test]
    fn trivial_walks() {
        let cfg = WalkConfig::new(1, 50);
        assert_eq!(simulate_hitting(&named::path(3), 1, 1, &cfg).unwrap().mean, 0.0);
        assert_eq!(simulate_cover(&Graph::with_vertices(1), 0, &cfg).unwrap().mean, 0.0);
        let edge = named::path(2);
        let c = simulate_cover(&edge, 0, &cfg).unwrap();
        assert_eq!((c.mean, c.std_error), (1.0, 0.0));
        assert_eq!(simulate_commute(&edge, 0, 1, &cfg).unwrap().mean, 2.0);
        let two = Graph::with_vertices(2);
        assert!(matches!(simulate_hitting(&two, 0, 1, &cfg), Err(Error::DisconnectedPair(0, 1))));
    }

    #[test]
    fn step_cap_reports_partial() {
        let cfg = WalkConfig { seed: 3, max_steps: 3, repetitions: 200 };
        match simulate_hitting(&named::path(6), 0, 5, &cfg) {
            Err(Error::StepCapExceeded { failures, reps, partial, .. }) => {
                assert_eq!(reps, 200);
                assert_eq!(failures + partial.reps, 200);
                assert!(failures > 0);
            }
            other => panic!("expected a cap breach, got {other:?}"),
        }
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let g = named::lollipop(6, 4);
        let cfg = WalkConfig::new(11, 300);
        let a = simulate_cover(&g, 0, &cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| simulate_cover(&g, 0, &cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn bounds_sandwich_cover_time() {
        for g in [named::path(3), named::complete(4), named::lollipop(4, 3), named::star(4), named::cycle(7)] {
            let s = sys(&g);
            let cover = brute_cover(&g);
            let t_hit = max_hitting_estimate(&s, None, HittingStrategy::Exact).unwrap().value;
            let cov_max = cover.iter().copied().fold(0.0, f64::max);
            assert!(cov_max <= matthews_upper(t_hit, g.vertex_count()) + 1e-9);
            let all: Vec<usize> = (0..g.vertex_count()).collect();
            assert!(kklv_lower(&s, &all).unwrap() <= cov_max + 1e-9);
        }
        let p3 = sys(&named::path(3));
        assert_relative_eq!(kklv_lower(&p3, &[0, 2]).unwrap(), 4.0 * 2f64.ln(), epsilon = 1e-9);
        assert_relative_eq!(matthews_upper(2.0, 3), 11.0 / 3.0, epsilon = 1e-12);
        assert_eq!(matthews_upper(5.0, 1), 5.0);
        assert!(kklv_lower(&p3, &[1]).is_err());
    }

    #[test]
    fn kklv_matches_resistance_formula() {
        let g = named::lollipop(5, 3);
        let s = sys(&g);
        let r = effective_resistance(&g, 0, 7).unwrap();
        let want = 2f64.ln() * g.edge_count() as f64 * r * 2.0 * 0.5;
        assert_relative_eq!(kklv_lower(&s, &[0, 7]).unwrap(), want, epsilon = 1e-9);
    }

    #[test]
    fn dangling_path_examples() {
        let g = named::lollipop(5, 4);
        let paths = find_dangling_paths(&g, 1);
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].len(), 4);
        assert_eq!(paths[0][0], g.vertex_count() - 1);
        assert!(find_dangling_paths(&named::cycle(8), 1).is_empty());
        assert!(find_dangling_paths(&named::path(8), 1).is_empty());
        assert!(find_dangling_paths(&g, 5).is_empty());
        // two legs on one star centre
        let spider = Graph::from_edges(6, &[(0, 1), (0, 2), (0, 3), (3, 4), (4, 5)]).unwrap();
        let mut lens: Vec<usize> = find_dangling_paths(&spider, 1).iter().map(|p| p.len()).collect();
        lens.sort_unstable();
        assert_eq!(lens, vec![1, 1, 3]);
    }

    #[test]
    fn stationary_occupation() {
        let g = named::lollipop(30, 20);
        let dist = StationaryDist::new(&g).unwrap();
        assert_relative_eq!(dist.probabilities().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        let mut rng = rng_from_seed(2);
        let mut counts = vec![0usize; g.vertex_count()];
        // start from a stationary draw so the chain is in equilibrium
        let mut v = dist.sample(&mut rng);
        let steps = 1_000_000;
        for _ in 0..steps {
            v = step(&g, v, &mut rng);
            counts[v] += 1;
        }
        let tv: f64 = counts
            .iter()
            .zip(dist.probabilities())
            .map(|(&c, p)| (c as f64 / steps as f64 - p).abs())
            .sum::<f64>()
            * 0.5;
        assert!(tv <= 0.02, "total variation {tv}");
    }
}
