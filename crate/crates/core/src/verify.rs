//! Seeded oracle-equivalence suites, shared by the `verify` subcommand and
//! the acceptance tests.

use std::collections::BTreeSet;
use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ancestor_query::CommonAncestorSolver;
use crate::diophantine::{bounded_representable, gcd, has_nonneg_solution, shortcut, Case, SolvabilityInstance};
use crate::error::Result;
use crate::finite_projection::{admg_latent_project, dmag_project, is_ancestral, is_maximal, m_separated};
use crate::graph_model::{TsGraphTemplate, Vertex};
use crate::oracle_testkit::{
    dmag_by_subset_enumeration, dsep_by_paths, random_dag, random_mwdg, random_template_with, walk_weight_enumeration,
    window_common_ancestor, window_marginal, RandomTemplateConfig,
};
use crate::summary_mwdg::{
    build_graph_of_cycles, closure, cycle_free_paths, enumerate_cycle_classes, get_monoid, path_weightset, touch,
    tuple_sets_from, ConeTuple, MwSummaryGraph,
};
use crate::ts_projection::{canonical_ts_dag, cutoff_bound, marginal_ts_admg};

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    pub mismatches: Vec<String>,
    pub elapsed: Duration,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{status} {}: {} cases, {} mismatches, {:.2}s",
            self.name,
            self.cases,
            self.mismatches.len(),
            self.elapsed.as_secs_f64()
        )?;
        for m in self.mismatches.iter().take(5) {
            write!(f, "\n    {m}")?;
        }
        Ok(())
    }
}

fn rng(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Random template drawn with the sizes used by the projection suites.
pub fn suite_template(r: &mut ChaCha8Rng, max_bidirected: usize, lag1_autos: bool) -> TsGraphTemplate {
    let cfg = RandomTemplateConfig {
        n_vars: r.gen_range(1..=4),
        max_lag: r.gen_range(0..=3),
        edge_density: r.gen_range(0.05..0.3),
        bidirected_density: if max_bidirected == 0 { 0.0 } else { 0.15 },
        max_bidirected: Some(max_bidirected),
        lag1_autos,
    };
    random_template_with(r.gen(), &cfg)
}

/// Diophantine marginal against the latent projection of the cutoff window.
pub fn window_equivalence(seed: u64, count: usize, ps: &[u64]) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut r = rng(seed, 1);
    let mut mismatches = Vec::new();
    let mut cases = 0;
    for n in 0..count {
        let tpl = suite_template(&mut r, 2, false);
        let mut observed: Vec<usize> = (0..tpl.n_vars()).filter(|_| r.gen_bool(0.7)).collect();
        if observed.is_empty() {
            observed.push(r.gen_range(0..tpl.n_vars()));
        }
        let canonical = canonical_ts_dag(&tpl);
        for &p in ps {
            cases += 1;
            let dioph = marginal_ts_admg(&tpl, &observed, p)?;
            let cut = cutoff_bound(&canonical, p)?;
            let window = window_marginal(&tpl, &observed, p, cut.p_cut + p)?;
            if dioph.to_json() != window.to_json() {
                mismatches.push(format!(
                    "template #{n} p={p} observed={observed:?} {}\n      dioph  {}\n      window {}",
                    tpl.to_json(),
                    dioph.to_json(),
                    window.to_json()
                ));
            }
        }
    }
    Ok(SuiteReport { name: "window equivalence", cases, mismatches, elapsed: start.elapsed() })
}

/// Common-ancestor decisions against window search at the cutoff length.
pub fn ancestor_oracle(seed: u64, count: usize, max_tau: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut r = rng(seed, 2);
    let mut mismatches = Vec::new();
    let mut cases = 0;
    for n in 0..count {
        let tpl = suite_template(&mut r, 0, false);
        let solver = CommonAncestorSolver::new(&tpl)?;
        for tau in 0..=max_tau {
            let w = cutoff_bound(&tpl, tau)?.p_cut;
            for i in 0..tpl.n_vars() {
                for j in 0..tpl.n_vars() {
                    cases += 1;
                    let got = solver.query(i, tau, j)?;
                    let want = window_common_ancestor(&tpl, i, tau, j, w)?;
                    if got != want {
                        mismatches.push(format!(
                            "template #{n} ({i},{tau},{j}): dioph {got}, window {want}: {}",
                            tpl.to_json()
                        ));
                    }
                }
            }
        }
    }
    Ok(SuiteReport { name: "common ancestor oracle", cases, mismatches, elapsed: start.elapsed() })
}

fn in_cone(w: u64, t: &ConeTuple) -> bool {
    if w < t.a0 {
        return false;
    }
    let rest = w - t.a0;
    rest == 0 || (!t.coeffs.is_empty() && bounded_representable(rest, &t.coeffs).unwrap_or(false))
}

/// Cones of all `(path, monoid element)` pairs from `k` to `i`.
pub fn decomposition_cones(s: &MwSummaryGraph, k: usize, i: usize, tau: u64) -> Result<Vec<ConeTuple>> {
    let classes = enumerate_cycle_classes(s);
    let goc = build_graph_of_cycles(&classes);
    let mut out = Vec::new();
    for path in cycle_free_paths(s, k, i) {
        let t = touch(&classes, &path);
        let weights = path_weightset(s, &path)?;
        for set in get_monoid(&path, &classes, &goc) {
            let cl = closure(&set, &t, &goc);
            out.extend(tuple_sets_from(tau, &weights, &set, &cl, &classes));
        }
    }
    Ok(out)
}

/// Cone membership against walk enumeration on `0..=bound`.
pub fn decomposition(seed: u64, count: usize, bound: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut r = rng(seed, 3);
    let mut mismatches = Vec::new();
    let mut cases = 0;
    for n in 0..count {
        let nodes = r.gen_range(1..=4);
        let s = random_mwdg(r.gen(), nodes, 4, 2, r.gen_range(0.2..0.6));
        for k in 0..nodes {
            for i in 0..nodes {
                let walks = walk_weight_enumeration(&s, k, i, bound);
                for tau in 0..=3 {
                    cases += 1;
                    let cones = decomposition_cones(&s, k, i, tau)?;
                    for w in 0..=bound {
                        let got = cones.iter().any(|c| in_cone(w, c));
                        let want = w >= tau && walks.contains(&(w - tau));
                        if got != want {
                            mismatches.push(format!(
                                "graph #{n} {:?} k={k} i={i} tau={tau} w={w}: cones {got}, walks {want}",
                                s.edges()
                            ));
                            break;
                        }
                    }
                }
            }
        }
    }
    Ok(SuiteReport { name: "cone decomposition", cases, mismatches, elapsed: start.elapsed() })
}

/// Reachable values `<= limit` of `base + sum n_k a_k`.
fn reachable(base: u64, coeffs: &[u64], limit: u64) -> BTreeSet<u64> {
    let mut out = BTreeSet::new();
    let mut stack = vec![base];
    while let Some(v) = stack.pop() {
        if v > limit || !out.insert(v) {
            continue;
        }
        for &a in coeffs {
            stack.push(v + a);
        }
    }
    out
}

fn coeffs(r: &mut ChaCha8Rng, max_len: usize) -> Vec<u64> {
    let len = r.gen_range(0..=max_len);
    (0..len).map(|_| r.gen_range(1..=9)).collect()
}

pub fn diophantine(seed: u64, count: usize) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut r = rng(seed, 4);
    let mut mismatches = Vec::new();
    let mut cases = 0;

    // forward-constructed solvable instances
    for _ in 0..count {
        let (a, b) = (coeffs(&mut r, 3), coeffs(&mut r, 3));
        let s: u64 = a.iter().map(|x| x * r.gen_range(0..=5)).sum();
        let t: u64 = b.iter().map(|x| x * r.gen_range(0..=5)).sum();
        let top = s.max(t) + r.gen_range(0..=20);
        let inst = SolvabilityInstance::new(ConeTuple::new(top - s, a), ConeTuple::new(top - t, b));
        cases += 1;
        if !has_nonneg_solution(&inst)? {
            mismatches.push(format!("constructed {} = {} reported unsolvable", inst.lhs, inst.rhs));
        }
    }

    // both-free instances violating the gcd condition
    let mut violating = 0;
    while violating < count {
        let g = r.gen_range(2..=5);
        let a: Vec<u64> = (0..r.gen_range(1..=3)).map(|_| g * r.gen_range(1..=3)).collect();
        let b: Vec<u64> = (0..r.gen_range(1..=3)).map(|_| g * r.gen_range(1..=3)).collect();
        let (a0, b0) = (r.gen_range(0..=30), r.gen_range(0..=30));
        let inst = SolvabilityInstance::new(ConeTuple::new(a0, a.clone()), ConeTuple::new(b0, b.clone()));
        let gg = gcd(inst.g_a().unwrap(), inst.g_b().unwrap());
        if inst.c()?.unsigned_abs() % gg == 0 {
            continue;
        }
        violating += 1;
        cases += 1;
        let bound = 10 * (inst.c()?.unsigned_abs() + a.iter().chain(&b).sum::<u64>());
        let limit = a0.max(b0) + bound;
        let witness = !reachable(a0, &a, limit).is_disjoint(&reachable(b0, &b, limit));
        if has_nonneg_solution(&inst)? || witness {
            mismatches.push(format!("gcd-violating {} = {} not rejected", inst.lhs, inst.rhs));
        }
    }

    // one-sided instances: shortcut against the table, and both against
    // explicit enumeration
    for _ in 0..count {
        let mut b = coeffs(&mut r, 3);
        if b.is_empty() {
            b.push(r.gen_range(1..=9));
        }
        let c = r.gen_range(1..=60);
        let table = bounded_representable(c, &b)?;
        let brute = reachable(0, &b, c).contains(&c);
        cases += 1;
        if let Some(fast) = shortcut(c, &b)? {
            if fast != table {
                mismatches.push(format!("shortcut {fast} vs table {table} for c={c} coeffs={b:?}"));
            }
        }
        if table != brute {
            mismatches.push(format!("table {table} vs enumeration {brute} for c={c} coeffs={b:?}"));
        }
        let inst = SolvabilityInstance::new(ConeTuple::new(c, vec![]), ConeTuple::new(0, b.clone()));
        debug_assert_eq!(inst.case()?, Case::LeftFixed);
        if has_nonneg_solution(&inst)? != brute {
            mismatches.push(format!("solver disagrees on {} = {}", inst.lhs, inst.rhs));
        }
    }
    Ok(SuiteReport { name: "diophantine solver", cases, mismatches, elapsed: start.elapsed() })
}

/// DMAG projection, its invariants, and m-separation under latent projection.
pub fn dmag(seed: u64, count: usize) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut r = rng(seed, 5);
    let mut mismatches = Vec::new();
    let mut cases = 0;
    for n in 0..count {
        let size = r.gen_range(2..=8);
        let latents = r.gen_range(0..=3.min(size - 1));
        let dag = random_dag(r.gen(), size, latents, r.gen_range(0.2..0.6));
        let observed = dag.observed();
        cases += 1;
        let fast = dmag_project(&dag, &observed)?;
        let slow = dmag_by_subset_enumeration(&dag, &observed)?;
        if fast != slow {
            mismatches.push(format!(
                "dag #{n}: inducing-path DMAG {} vs subset DMAG {}",
                fast.to_json(),
                slow.to_json()
            ));
        }
        if !is_ancestral(&fast) || !is_maximal(&fast) {
            mismatches.push(format!("dag #{n}: DMAG not ancestral and maximal: {}", fast.to_json()));
        }
        let proj = admg_latent_project(&dag, &observed)?;
        let obs: Vec<Vertex> = observed.iter().copied().collect();
        for a in 0..obs.len() {
            for b in a + 1..obs.len() {
                let rest: Vec<Vertex> = obs.iter().copied().filter(|&v| v != obs[a] && v != obs[b]).collect();
                for mask in 0u32..1 << rest.len() {
                    let z: BTreeSet<Vertex> =
                        rest.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &v)| v).collect();
                    let (x, y) = (BTreeSet::from([obs[a]]), BTreeSet::from([obs[b]]));
                    let in_dag = m_separated(&dag, &x, &y, &z)?;
                    let in_proj = m_separated(&proj, &x, &y, &z)?;
                    let by_paths = dsep_by_paths(&dag, obs[a], obs[b], &z);
                    if in_dag != in_proj || in_dag != by_paths {
                        mismatches.push(format!(
                            "dag #{n} {}: {} vs {} given {z:?}: dag {in_dag}, projection {in_proj}, paths {by_paths}",
                            dag.to_json(),
                            dag.label(obs[a]),
                            dag.label(obs[b])
                        ));
                    }
                }
            }
        }
    }
    Ok(SuiteReport { name: "DMAG projection", cases, mismatches, elapsed: start.elapsed() })
}

/// Summary-graph shortcut against the full cone search on templates with
/// lag-1 auto edges everywhere.
pub fn lag1(seed: u64, count: usize) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut r = rng(seed, 6);
    let mut mismatches = Vec::new();
    let mut cases = 0;
    for n in 0..count {
        let tpl = suite_template(&mut r, 0, true);
        let solver = CommonAncestorSolver::new(&tpl)?;
        for i in 0..tpl.n_vars() {
            for j in 0..tpl.n_vars() {
                for tau in 0..=3 {
                    cases += 1;
                    let short = solver.lag1_shortcut(i, tau, j);
                    let full = solver.pipeline(i, tau, j)?;
                    if short != Some(full) {
                        mismatches.push(format!("template #{n} ({i},{tau},{j}): shortcut {short:?}, pipeline {full}"));
                    }
                }
            }
        }
    }
    Ok(SuiteReport { name: "lag-1 shortcut", cases, mismatches, elapsed: start.elapsed() })
}

/// All suites with counts multiplied by `scale` percent.
pub fn run_all(seed: u64, scale: usize) -> Result<Vec<SuiteReport>> {
    let n = |base: usize| (base * scale / 100).max(1);
    Ok(vec![
        diophantine(seed, n(1000))?,
        decomposition(seed, n(50), 50)?,
        ancestor_oracle(seed, n(50), 3)?,
        lag1(seed, n(50))?,
        dmag(seed, n(100))?,
        window_equivalence(seed, n(200), &[0, 1, 2])?,
    ])
}
