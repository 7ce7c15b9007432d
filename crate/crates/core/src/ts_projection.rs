//! Marginal ts-ADMGs and ts-DMAGs of stationary templates on a finite window.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::ancestor_query::CommonAncestorSolver;
use crate::error::{Error, Result};
use crate::finite_projection::{admg_latent_project, canonical_dag, dmag_project};
use crate::graph_model::{incoming, FiniteMixedGraph, LaggedEdge, TsGraphTemplate, Vertex};
use crate::oracle_testkit::window_marginal;
use crate::summary_mwdg::{build_mw_summary, cycle_free_paths, enumerate_cycle_classes, path_weightset};

/// Replaces each bidirected entry by an auxiliary variable `L_a_b_lag`
/// driving both endpoints. Original variables keep their indices.
pub fn canonical_ts_dag(tpl: &TsGraphTemplate) -> TsGraphTemplate {
    if tpl.is_ts_dag() {
        return tpl.clone();
    }
    let mut vars = tpl.variables().to_vec();
    let mut directed: Vec<LaggedEdge> = tpl.directed().iter().copied().collect();
    for e in tpl.bidirected() {
        let mut name = format!("L_{}_{}_{}", vars[e.from], vars[e.to], e.lag);
        while vars.contains(&name) {
            name.push('\'');
        }
        vars.push(name);
        let aux = vars.len() - 1;
        directed.push(LaggedEdge::new(aux, e.to, e.lag));
        directed.push(LaggedEdge::new(aux, e.from, 0));
    }
    TsGraphTemplate::new(vars, directed, []).expect("auxiliary variables keep the template valid")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Dioph,
    Window,
}

#[derive(Clone, Copy, Debug)]
pub struct ProjectionOptions {
    pub method: Method,
    pub jobs: usize,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        Self { method: Method::Dioph, jobs: 1 }
    }
}

pub fn simple_marginal_ts_admg(tpl: &TsGraphTemplate, p: u64) -> Result<FiniteMixedGraph> {
    let solver = CommonAncestorSolver::new(tpl)?;
    simple_marginal_with(tpl, p, &solver, 1)
}

fn simple_marginal_with(
    tpl: &TsGraphTemplate,
    p: u64,
    solver: &CommonAncestorSolver,
    jobs: usize,
) -> Result<FiniteMixedGraph> {
    if !tpl.is_ts_dag() {
        return Err(Error::BidirectedEntries);
    }
    let mut g = tpl.unroll_window(p);
    let inc = incoming(tpl);
    let n = tpl.n_vars();
    let mut triples = Vec::new();
    for delta in 0..=p {
        for i in 0..n {
            for j in 0..n {
                if i < j || delta > 0 {
                    triples.push((i, j, delta));
                }
            }
        }
    }
    let scan = |chunk: &[(usize, usize, u64)]| -> Result<Vec<(Vertex, Vertex)>> {
        let mut memo = HashMap::new();
        let mut found = Vec::new();
        for &(i, j, delta) in chunk {
            for tau_j in 0..=p - delta {
                let v1 = Vertex::new(i, tau_j + delta);
                let v2 = Vertex::new(j, tau_j);
                if confounded_from_past(&inc, p, v1, v2, solver, &mut memo)? {
                    for t in tau_j..=p - delta {
                        found.push((Vertex::new(i, t + delta), Vertex::new(j, t)));
                    }
                    break;
                }
            }
        }
        Ok(found)
    };
    let jobs = jobs.max(1).min(triples.len().max(1));
    let found: Vec<(Vertex, Vertex)> = if jobs == 1 {
        scan(&triples)?
    } else {
        let size = triples.len().div_ceil(jobs);
        let results: Vec<Result<Vec<(Vertex, Vertex)>>> = std::thread::scope(|s| {
            let handles: Vec<_> = triples.chunks(size).map(|c| s.spawn(|| scan(c))).collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        let mut all = Vec::new();
        for r in results {
            all.extend(r?);
        }
        all
    };
    for (u, v) in found {
        g.insert_bidirected(u, v);
    }
    Ok(g)
}

/// Whether some parent of `v1` and some parent of `v2`, both before the
/// window, share an ancestor.
fn confounded_from_past(
    inc: &std::collections::BTreeMap<usize, Vec<(usize, u64)>>,
    p: u64,
    v1: Vertex,
    v2: Vertex,
    solver: &CommonAncestorSolver,
    memo: &mut HashMap<(usize, u64, usize), bool>,
) -> Result<bool> {
    let far = |v: Vertex| -> Vec<Vertex> {
        inc.get(&v.var)
            .map(|ps| {
                ps.iter()
                    .filter(|&&(_, lag)| v.offset + lag > p)
                    .map(|&(src, lag)| Vertex::new(src, v.offset + lag))
                    .collect()
            })
            .unwrap_or_default()
    };
    let (f1, f2) = (far(v1), far(v2));
    for &a in &f1 {
        for &b in &f2 {
            // the parent closer to t is shifted to offset 0
            let key = if a.offset > b.offset || (a.offset == b.offset && a.var < b.var) {
                (a.var, a.offset - b.offset, b.var)
            } else {
                (b.var, b.offset - a.offset, a.var)
            };
            let hit = match memo.get(&key) {
                Some(&h) => h,
                None => {
                    let h = solver.query(key.0, key.1, key.2)?;
                    memo.insert(key, h);
                    h
                }
            };
            if hit {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

fn observed_vertices(tpl: &TsGraphTemplate, observed: &[usize], p: u64) -> Result<BTreeSet<Vertex>> {
    if observed.is_empty() {
        return Err(Error::EmptyObserved);
    }
    let mut out = BTreeSet::new();
    for &v in observed {
        if v >= tpl.n_vars() {
            return Err(Error::UnknownVariable(format!("#{v}")));
        }
        for o in 0..=p {
            out.insert(Vertex::new(v, o));
        }
    }
    Ok(out)
}

pub fn marginal_ts_admg(tpl: &TsGraphTemplate, observed: &[usize], p: u64) -> Result<FiniteMixedGraph> {
    marginal_ts_admg_with(tpl, observed, p, &ProjectionOptions::default())
}

pub fn marginal_ts_admg_with(
    tpl: &TsGraphTemplate,
    observed: &[usize],
    p: u64,
    opts: &ProjectionOptions,
) -> Result<FiniteMixedGraph> {
    let canonical = canonical_ts_dag(tpl);
    let keep = observed_vertices(tpl, observed, p)?;
    match opts.method {
        Method::Dioph => {
            let solver = CommonAncestorSolver::new(&canonical)?;
            let simple = simple_marginal_with(&canonical, p, &solver, opts.jobs)?;
            admg_latent_project(&simple, &keep)
        }
        Method::Window => {
            let cut = cutoff_bound(&canonical, p)?;
            window_marginal(tpl, observed, p, cut.p_cut + p)
        }
    }
}

pub fn marginal_ts_dmag(tpl: &TsGraphTemplate, observed: &[usize], p: u64) -> Result<FiniteMixedGraph> {
    marginal_ts_dmag_with(tpl, observed, p, &ProjectionOptions::default())
}

pub fn marginal_ts_dmag_with(
    tpl: &TsGraphTemplate,
    observed: &[usize],
    p: u64,
    opts: &ProjectionOptions,
) -> Result<FiniteMixedGraph> {
    let marg = marginal_ts_admg_with(tpl, observed, p, opts)?;
    let observed = marg.vertices().clone();
    dmag_project(&canonical_dag(&marg), &observed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CutoffQuantities {
    pub k: u64,
    pub l: u64,
    pub m: u64,
    pub p_cut: u64,
}

pub fn cutoff_bound(tpl: &TsGraphTemplate, p: u64) -> Result<CutoffQuantities> {
    let s = build_mw_summary(tpl)?;
    let classes = enumerate_cycle_classes(&s);
    let k = classes.iter().map(|c| c.max_weight()).max().unwrap_or(0);
    let m = classes.iter().try_fold(0u64, |acc, c| acc.checked_add(c.max_weight())).ok_or(Error::Overflow)?;
    let mut l = 0;
    for a in 0..s.len() {
        for b in 0..s.len() {
            for path in cycle_free_paths(&s, a, b) {
                l = l.max(*path_weightset(&s, &path)?.last().unwrap());
            }
        }
    }
    let p_cut = cutoff_formula(k, l, m, p).ok_or(Error::Overflow)?;
    Ok(CutoffQuantities { k, l, m, p_cut })
}

fn cutoff_formula(k: u64, l: u64, m: u64, p: u64) -> Option<u64> {
    let k2 = k.checked_mul(k)?.checked_add(1)?;
    let first = k2.checked_mul(p.checked_add(l)?.checked_add(m)?)?;
    let km1 = k.saturating_sub(1);
    let second = k.checked_mul(km1.checked_mul(km1)?.checked_add(1)?)?;
    first.checked_add(second)
}

pub fn project_arbitrary(marg: &FiniteMixedGraph, keep: &BTreeSet<Vertex>) -> Result<FiniteMixedGraph> {
    admg_latent_project(marg, keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_projection::{is_ancestral, is_maximal};

    fn running() -> TsGraphTemplate {
        TsGraphTemplate::from_names(
            &["X", "Y", "Z"],
            &[("X", "X", 2), ("X", "Y", 1), ("Y", "X", 2), ("Y", "Z", 0), ("Y", "Z", 5)],
            &[],
        )
        .unwrap()
    }

    fn slow_loops() -> TsGraphTemplate {
        TsGraphTemplate::from_names(&["X", "Y"], &[("X", "X", 5), ("Y", "Y", 3), ("Y", "X", 1)], &[]).unwrap()
    }

    fn confounded_loop() -> TsGraphTemplate {
        TsGraphTemplate::from_names(
            &["X1", "X2", "X3"],
            &[("X2", "X3", 1), ("X3", "X2", 1), ("X2", "X2", 1)],
            &[("X2", "X1", 1)],
        )
        .unwrap()
    }

    #[test]
    fn canonical_template() {
        let t = TsGraphTemplate::from_names(&["X", "Y"], &[], &[("X", "Y", 1)]).unwrap();
        let c = canonical_ts_dag(&t);
        assert_eq!(c.variables()[2], "L_X_Y_1");
        assert!(c.directed().contains(&LaggedEdge::new(2, 1, 1)));
        assert!(c.directed().contains(&LaggedEdge::new(2, 0, 0)));
        assert!(c.is_ts_dag());
        assert_eq!(canonical_ts_dag(&running()), running());
        assert_eq!(canonical_ts_dag(&confounded_loop()).n_vars(), 4);
    }

    #[test]
    fn cutoff_examples() {
        for p in 0..3 {
            let c = cutoff_bound(&running(), p).unwrap();
            assert_eq!((c.k, c.l, c.m), (3, 6, 5));
            assert_eq!(c.p_cut, 10 * p + 125);
            let c = cutoff_bound(&slow_loops(), p).unwrap();
            assert_eq!((c.k, c.l, c.m), (5, 1, 8));
            assert_eq!(c.p_cut, 26 * p + 319);
        }
        let acyclic = TsGraphTemplate::from_names(&["A", "B"], &[("A", "B", 4)], &[]).unwrap();
        let c = cutoff_bound(&acyclic, 2).unwrap();
        assert_eq!((c.k, c.m, c.p_cut), (0, 0, 2 + 4));
    }

    #[test]
    fn b1_simple_marginal() {
        let g = simple_marginal_ts_admg(&slow_loops(), 1).unwrap();
        let (x, y) = (0, 1);
        assert!(g.has_directed(Vertex::new(y, 1), Vertex::new(x, 0)));
        assert!(g.has_bidirected(Vertex::new(x, 1), Vertex::new(y, 0)));
        assert!(g.has_bidirected(Vertex::new(x, 1), Vertex::new(x, 0)));
        assert!(g.has_bidirected(Vertex::new(y, 1), Vertex::new(x, 0)));
    }

    #[test]
    fn edgeless_marginal() {
        let t = TsGraphTemplate::from_names(&["A", "B"], &[], &[]).unwrap();
        let g = marginal_ts_admg(&t, &[0, 1], 2).unwrap();
        assert!(g.directed().is_empty() && g.bidirected().is_empty());
        assert_eq!(g.vertices().len(), 6);
        assert!(matches!(marginal_ts_admg(&t, &[], 1), Err(Error::EmptyObserved)));
    }

    #[test]
    fn confounded_loop_marginal() {
        let g = marginal_ts_admg(&confounded_loop(), &[0, 1], 2).unwrap();
        assert!(g.has_bidirected(Vertex::new(0, 2), Vertex::new(1, 2)));
        assert!(g.has_directed(Vertex::new(1, 2), Vertex::new(1, 0)));
        let d = marginal_ts_dmag(&confounded_loop(), &[0, 1], 2).unwrap();
        assert!(is_ancestral(&d) && is_maximal(&d));
        assert!(d.has_directed(Vertex::new(1, 2), Vertex::new(1, 0)));
    }

    #[test]
    fn all_observed_dag_equals_simple() {
        let t = running();
        let simple = simple_marginal_ts_admg(&t, 2).unwrap();
        assert_eq!(marginal_ts_admg(&t, &[0, 1, 2], 2).unwrap(), simple);
    }

    #[test]
    fn methods_agree_and_jobs_do_not_matter() {
        for t in [slow_loops(), confounded_loop(), running()] {
            let all: Vec<usize> = (0..t.n_vars()).collect();
            let d = marginal_ts_admg(&t, &all, 1).unwrap();
            let w = marginal_ts_admg_with(&t, &all, 1, &ProjectionOptions { method: Method::Window, jobs: 1 }).unwrap();
            assert_eq!(d.to_json(), w.to_json());
            let par =
                marginal_ts_admg_with(&t, &all, 1, &ProjectionOptions { method: Method::Dioph, jobs: 4 }).unwrap();
            assert_eq!(d, par);
        }
    }

    #[test]
    fn project_arbitrary_subsets() {
        let g = marginal_ts_admg(&slow_loops(), &[0, 1], 1).unwrap();
        assert_eq!(project_arbitrary(&g, g.vertices()).unwrap(), g);
        let keep = BTreeSet::from([Vertex::new(0, 1), Vertex::new(1, 0)]);
        let sub = project_arbitrary(&g, &keep).unwrap();
        assert!(sub.has_bidirected(Vertex::new(0, 1), Vertex::new(1, 0)));
        assert!(project_arbitrary(&g, &BTreeSet::from([Vertex::new(0, 9)])).is_err());
    }

    #[test]
    fn lagged_chain_dmag() {
        let t = TsGraphTemplate::from_names(&["X", "Y"], &[("X", "Y", 1)], &[]).unwrap();
        let d = marginal_ts_dmag(&t, &[0, 1], 1).unwrap();
        assert!(d.has_directed(Vertex::new(0, 1), Vertex::new(1, 0)));
        assert_eq!(d.directed().len(), 1);
        assert!(d.bidirected().is_empty());
    }
}
