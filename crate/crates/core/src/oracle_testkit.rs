//! Brute-force oracles and seeded random instances.
//!
//! The oracles walk explicit finite graphs and avoid the cone machinery and
//! reachability code of the main path.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::finite_projection::admg_latent_project;
use crate::graph_model::{FiniteMixedGraph, LaggedEdge, TsGraphTemplate, Vertex};
use crate::summary_mwdg::MwSummaryGraph;

fn parent_map(g: &FiniteMixedGraph) -> HashMap<Vertex, Vec<Vertex>> {
    let mut map: HashMap<Vertex, Vec<Vertex>> = HashMap::new();
    for &(u, v) in g.directed() {
        map.entry(v).or_default().push(u);
    }
    map
}

fn naive_ancestors(parents: &HashMap<Vertex, Vec<Vertex>>, v: Vertex) -> HashSet<Vertex> {
    let mut seen = HashSet::from([v]);
    let mut queue = VecDeque::from([v]);
    while let Some(x) = queue.pop_front() {
        for &p in parents.get(&x).into_iter().flatten() {
            if seen.insert(p) {
                queue.push_back(p);
            }
        }
    }
    seen
}

/// Whether `(i, t - tau)` and `(j, t)` share an ancestor inside the window
/// of offsets `0..=w`.
pub fn window_common_ancestor(tpl: &TsGraphTemplate, i: usize, tau: u64, j: usize, w: u64) -> Result<bool> {
    if !tpl.is_ts_dag() {
        return Err(Error::BidirectedEntries);
    }
    if tau > w {
        return Err(Error::WindowTooShort { w, need: tau });
    }
    for v in [i, j] {
        if v >= tpl.n_vars() {
            return Err(Error::UnknownVariable(format!("#{v}")));
        }
    }
    let parents = parent_map(&tpl.unroll_window(w));
    let a = naive_ancestors(&parents, Vertex::new(i, tau));
    let b = naive_ancestors(&parents, Vertex::new(j, 0));
    Ok(!a.is_disjoint(&b))
}

/// Latent projection of the window `0..=w` onto `observed x 0..=p`.
pub fn window_marginal(tpl: &TsGraphTemplate, observed: &[usize], p: u64, w: u64) -> Result<FiniteMixedGraph> {
    if w < p {
        return Err(Error::WindowTooShort { w, need: p });
    }
    if observed.is_empty() {
        return Err(Error::EmptyObserved);
    }
    let g = tpl.unroll_window(w);
    let mut keep = BTreeSet::new();
    for &v in observed {
        if v >= tpl.n_vars() {
            return Err(Error::UnknownVariable(format!("#{v}")));
        }
        keep.extend((0..=p).map(|o| Vertex::new(v, o)));
    }
    admg_latent_project(&g, &keep)
}

/// Weights `<= bound` of directed walks from `k` to `i`; the trivial walk
/// contributes 0 when `k == i`.
pub fn walk_weight_enumeration(s: &MwSummaryGraph, k: usize, i: usize, bound: u64) -> BTreeSet<u64> {
    let mut seen = HashSet::from([(k, 0u64)]);
    let mut queue = VecDeque::from([(k, 0u64)]);
    let mut out = BTreeSet::new();
    while let Some((v, w)) = queue.pop_front() {
        if v == i {
            out.insert(w);
        }
        for (&(a, b), weights) in s.edges().range((v, 0)..=(v, usize::MAX)) {
            debug_assert_eq!(a, v);
            for &x in weights {
                let nw = w + x;
                if nw <= bound && seen.insert((b, nw)) {
                    queue.push_back((b, nw));
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct RandomTemplateConfig {
    pub n_vars: usize,
    pub max_lag: u64,
    pub edge_density: f64,
    pub bidirected_density: f64,
    pub max_bidirected: Option<usize>,
    /// Adds a lag-1 auto edge on every variable.
    pub lag1_autos: bool,
}

impl RandomTemplateConfig {
    pub fn new(n_vars: usize, max_lag: u64, edge_density: f64, bidirected_density: f64) -> Self {
        Self { n_vars, max_lag, edge_density, bidirected_density, max_bidirected: None, lag1_autos: false }
    }
}

pub fn random_template(
    seed: u64,
    n_vars: usize,
    max_lag: u64,
    edge_density: f64,
    bidirected_density: f64,
) -> TsGraphTemplate {
    random_template_with(seed, &RandomTemplateConfig::new(n_vars, max_lag, edge_density, bidirected_density))
}

pub fn random_template_with(seed: u64, cfg: &RandomTemplateConfig) -> TsGraphTemplate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cfg.n_vars.max(1);
    let vars: Vec<String> = (1..=n).map(|k| format!("X{k}")).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut rank = vec![0; n];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }
    let mut directed = Vec::new();
    let mut bidirected = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for lag in 0..=cfg.max_lag {
                if lag == 0 && rank[a] >= rank[b] {
                    continue;
                }
                if rng.gen_bool(cfg.edge_density.clamp(0.0, 1.0)) {
                    directed.push(LaggedEdge::new(a, b, lag));
                }
            }
        }
    }
    if cfg.lag1_autos {
        directed.extend((0..n).map(|v| LaggedEdge::new(v, v, 1)));
    }
    for a in 0..n {
        for b in 0..n {
            for lag in 0..=cfg.max_lag {
                if lag == 0 && a >= b {
                    continue;
                }
                if rng.gen_bool(cfg.bidirected_density.clamp(0.0, 1.0)) {
                    bidirected.push(LaggedEdge::new(a, b, lag));
                }
            }
        }
    }
    if let Some(cap) = cfg.max_bidirected {
        bidirected.shuffle(&mut rng);
        bidirected.truncate(cap);
    }
    TsGraphTemplate::new(vars, directed, bidirected).expect("generator respects template invariants")
}

/// Weakly acyclic multi-weighted digraph: zero weights only on edges that
/// go forward in a random node order.
pub fn random_mwdg(seed: u64, n: usize, max_weight: u64, max_per_edge: usize, density: f64) -> MwSummaryGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut rank = vec![0; n];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }
    let mut edges = BTreeMap::new();
    for a in 0..n {
        for b in 0..n {
            if !rng.gen_bool(density) {
                continue;
            }
            let min = if a == b || rank[a] > rank[b] { 1 } else { 0 };
            let count = rng.gen_range(1..=max_per_edge.max(1));
            let w: Vec<u64> = (0..count).map(|_| rng.gen_range(min..=max_weight.max(min))).collect();
            edges.insert((a, b), w);
        }
    }
    let nodes = (0..n).map(|k| format!("v{k}")).collect();
    MwSummaryGraph::new(nodes, edges).expect("generator keeps weak acyclicity")
}

/// Random DAG on `n` vertices (all at offset 0) with `n_latent` of them
/// marked latent.
pub fn random_dag(seed: u64, n: usize, n_latent: usize, density: f64) -> FiniteMixedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (0..n).map(|k| format!("V{k}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut g = FiniteMixedGraph::with_vertices(&refs);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(density) {
                g.add_directed(Vertex::new(order[a], 0), Vertex::new(order[b], 0)).unwrap();
            }
        }
    }
    let mut pick: Vec<usize> = (0..n).collect();
    pick.shuffle(&mut rng);
    for &v in pick.iter().take(n_latent.min(n)) {
        g.set_latent(Vertex::new(v, 0)).unwrap();
    }
    g
}

/// Whether `x` and `y` are d-separated by `z` in a DAG, by listing every
/// simple path.
pub fn dsep_by_paths(dag: &FiniteMixedGraph, x: Vertex, y: Vertex, z: &BTreeSet<Vertex>) -> bool {
    let parents = parent_map(dag);
    let mut nbrs: HashMap<Vertex, Vec<Vertex>> = HashMap::new();
    for &(u, v) in dag.directed() {
        nbrs.entry(u).or_default().push(v);
        nbrs.entry(v).or_default().push(u);
    }
    let an_z: HashSet<Vertex> = z.iter().flat_map(|&v| naive_ancestors(&parents, v)).collect();
    let mut path = vec![x];
    !connecting_path(dag, &nbrs, &mut path, y, z, &an_z)
}

fn connecting_path(
    dag: &FiniteMixedGraph,
    nbrs: &HashMap<Vertex, Vec<Vertex>>,
    path: &mut Vec<Vertex>,
    y: Vertex,
    z: &BTreeSet<Vertex>,
    an_z: &HashSet<Vertex>,
) -> bool {
    let last = *path.last().unwrap();
    if last == y {
        return true;
    }
    for &next in nbrs.get(&last).into_iter().flatten() {
        if path.contains(&next) {
            continue;
        }
        if path.len() >= 2 {
            let prev = path[path.len() - 2];
            let collider = dag.has_directed(prev, last) && dag.has_directed(next, last);
            let open = if collider { an_z.contains(&last) } else { !z.contains(&last) };
            if !open {
                continue;
            }
        }
        path.push(next);
        if connecting_path(dag, nbrs, path, y, z, an_z) {
            return true;
        }
        path.pop();
    }
    false
}

pub const SUBSET_GUARD: usize = 16;

/// DMAG by testing every observed conditioning set for each pair.
pub fn dmag_by_subset_enumeration(dag: &FiniteMixedGraph, observed: &BTreeSet<Vertex>) -> Result<FiniteMixedGraph> {
    if observed.len() > SUBSET_GUARD {
        return Err(Error::GuardExceeded { n: observed.len(), guard: SUBSET_GUARD });
    }
    dag.check_subset(observed)?;
    let parents = parent_map(dag);
    let obs: Vec<Vertex> = observed.iter().copied().collect();
    let mut out = FiniteMixedGraph::new(dag.names().to_vec());
    for &v in &obs {
        out.add_vertex(v)?;
    }
    for a in 0..obs.len() {
        for b in a + 1..obs.len() {
            let (u, v) = (obs[a], obs[b]);
            let rest: Vec<Vertex> = obs.iter().copied().filter(|&w| w != u && w != v).collect();
            let separable = (0u32..1 << rest.len()).any(|mask| {
                let z: BTreeSet<Vertex> =
                    rest.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &w)| w).collect();
                dsep_by_paths(dag, u, v, &z)
            });
            if separable {
                continue;
            }
            if naive_ancestors(&parents, v).contains(&u) {
                out.add_directed(u, v)?;
            } else if naive_ancestors(&parents, u).contains(&v) {
                out.add_directed(v, u)?;
            } else {
                out.add_bidirected(u, v)?;
            }
        }
    }
    Ok(out)
}
