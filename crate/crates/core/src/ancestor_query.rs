//! Common ancestorship of `(i, t - tau)` and `(j, t)` in an infinite ts-DAG.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use serde_json::{json, Value};

use crate::diophantine::{has_nonneg_solution, SolvabilityInstance};
use crate::error::{Error, Result};
use crate::graph_model::TsGraphTemplate;
use crate::summary_mwdg::{
    build_graph_of_cycles, build_mw_summary, closure, cycle_free_paths, enumerate_cycle_classes,
    monoid_representatives, path_weightset, touch, tuple_sets_from, ClassSet, ConeTuple, CycleClass, GraphOfCycles,
    MwSummaryGraph,
};

/// Per-template query engine. Caches are filled lazily and are safe to share
/// between threads.
pub struct CommonAncestorSolver {
    summary: MwSummaryGraph,
    classes: Vec<CycleClass>,
    goc: GraphOfCycles,
    ancestors: Vec<Vec<bool>>,
    all_lag1: bool,
    profiles: Vec<OnceLock<Arc<Vec<ConeTuple>>>>,
    monoids: Mutex<HashMap<ClassSet, Arc<Vec<ClassSet>>>>,
}

impl CommonAncestorSolver {
    pub fn new(tpl: &TsGraphTemplate) -> Result<Self> {
        let summary = build_mw_summary(tpl)?;
        let classes = enumerate_cycle_classes(&summary);
        let goc = build_graph_of_cycles(&classes);
        let n = summary.len();
        let ancestors = (0..n).map(|v| summary.ancestor_mask(v)).collect();
        let all_lag1 = n > 0 && (0..n).all(|v| summary.weights(v, v).is_some_and(|w| w.contains(&1)));
        Ok(Self {
            summary,
            classes,
            goc,
            ancestors,
            all_lag1,
            profiles: (0..n * n).map(|_| OnceLock::new()).collect(),
            monoids: Mutex::new(HashMap::new()),
        })
    }

    pub fn summary(&self) -> &MwSummaryGraph {
        &self.summary
    }

    pub fn classes(&self) -> &[CycleClass] {
        &self.classes
    }

    pub fn graph_of_cycles(&self) -> &GraphOfCycles {
        &self.goc
    }

    fn check(&self, v: usize) -> Result<()> {
        if v < self.summary.len() {
            Ok(())
        } else {
            Err(Error::UnknownVariable(format!("#{v}")))
        }
    }

    /// Common ancestor in the unweighted summary graph.
    pub fn prefilter(&self, i: usize, j: usize) -> bool {
        let (a, b) = (&self.ancestors[i], &self.ancestors[j]);
        a.iter().zip(b).any(|(x, y)| *x && *y)
    }

    /// Exact answer from the summary graph when every variable has a lag-1
    /// auto edge.
    pub fn lag1_shortcut(&self, i: usize, _tau: u64, j: usize) -> Option<bool> {
        self.all_lag1.then(|| self.prefilter(i, j))
    }

    /// Decision with fast paths in front of the full pipeline.
    pub fn query(&self, i: usize, tau: u64, j: usize) -> Result<bool> {
        self.check(i)?;
        self.check(j)?;
        if i == j && tau == 0 {
            return Ok(true);
        }
        if !self.prefilter(i, j) {
            return Ok(false);
        }
        if let Some(answer) = self.lag1_shortcut(i, tau, j) {
            return Ok(answer);
        }
        self.pipeline(i, tau, j)
    }

    /// The cone-intersection search without any shortcut.
    pub fn pipeline(&self, i: usize, tau: u64, j: usize) -> Result<bool> {
        self.check(i)?;
        self.check(j)?;
        let mut deferred = Vec::new();
        for k in 0..self.summary.len() {
            let lhs = self.profile(k, i)?;
            if lhs.is_empty() {
                continue;
            }
            let rhs = self.profile(k, j)?;
            for a in lhs.iter() {
                let a = a.shifted(tau);
                for b in rhs.iter() {
                    let inst = SolvabilityInstance::new(a.clone(), b.clone());
                    if inst.case()?.is_cheap() {
                        if has_nonneg_solution(&inst)? {
                            return Ok(true);
                        }
                    } else {
                        deferred.push(inst);
                    }
                }
            }
        }
        for inst in &deferred {
            if has_nonneg_solution(inst)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn monoid(&self, touch: &ClassSet) -> Arc<Vec<ClassSet>> {
        if let Some(m) = self.monoids.lock().unwrap().get(touch) {
            return m.clone();
        }
        let m = Arc::new(monoid_representatives(touch, &self.goc));
        self.monoids.lock().unwrap().insert(touch.clone(), m.clone());
        m
    }

    /// Deduplicated cone tuples at `tau = 0` over all base paths from `k` to
    /// `i` and the monoid representatives; generators are sorted and
    /// deduplicated.
    fn profile(&self, k: usize, i: usize) -> Result<Arc<Vec<ConeTuple>>> {
        let cell = &self.profiles[k * self.summary.len() + i];
        if let Some(p) = cell.get() {
            return Ok(p.clone());
        }
        let mut set = BTreeSet::new();
        for path in cycle_free_paths(&self.summary, k, i) {
            let t = touch(&self.classes, &path);
            let weights = path_weightset(&self.summary, &path)?;
            for s in self.monoid(&t).iter() {
                let cl = closure(s, &t, &self.goc);
                for mut tuple in tuple_sets_from(0, &weights, s, &cl, &self.classes) {
                    tuple.coeffs.sort_unstable();
                    tuple.coeffs.dedup();
                    set.insert(tuple);
                }
            }
        }
        let p = Arc::new(set.into_iter().collect::<Vec<_>>());
        Ok(cell.get_or_init(|| p).clone())
    }

    /// JSON trace of the intermediate objects used for one query.
    pub fn explain(&self, i: usize, tau: u64, j: usize) -> Result<Value> {
        let name = |v: usize| self.summary.nodes()[v].clone();
        let classes: Vec<Value> = self
            .classes
            .iter()
            .map(|c| {
                json!({
                    "cycle": c.representative.iter().map(|&v| name(v)).collect::<Vec<_>>(),
                    "weights": c.weights,
                })
            })
            .collect();
        let mut roots = Vec::new();
        for k in 0..self.summary.len() {
            if !(self.ancestors[i][k] && self.ancestors[j][k]) {
                continue;
            }
            let side = |target: usize, shift: u64| -> Result<Vec<Value>> {
                let mut out = Vec::new();
                for path in cycle_free_paths(&self.summary, k, target) {
                    let t = touch(&self.classes, &path);
                    let weights = path_weightset(&self.summary, &path)?;
                    let monoid = self.monoid(&t);
                    let mut elems = Vec::new();
                    for s in monoid.iter() {
                        let cl = closure(s, &t, &self.goc);
                        let tuples = tuple_sets_from(shift, &weights, s, &cl, &self.classes);
                        elems.push(json!({
                            "set": s,
                            "closure": cl,
                            "tuples": tuples.iter().map(ToString::to_string).collect::<Vec<_>>(),
                        }));
                    }
                    out.push(json!({
                        "path": path.iter().map(|&v| name(v)).collect::<Vec<_>>(),
                        "weights": weights,
                        "touch": t,
                        "monoid": elems,
                    }));
                }
                Ok(out)
            };
            roots.push(json!({ "root": name(k), "lhs": side(i, tau)?, "rhs": side(j, 0)? }));
        }
        Ok(json!({
            "query": { "i": name(i), "tau": tau, "j": name(j) },
            "answer": self.query(i, tau, j)?,
            "cycle_classes": classes,
            "graph_of_cycles": self.goc.adjacency,
            "roots": roots,
        }))
    }
}

pub fn have_common_ancestor(tpl: &TsGraphTemplate, i: usize, tau: u64, j: usize) -> Result<bool> {
    CommonAncestorSolver::new(tpl)?.query(i, tau, j)
}

pub fn summary_prefilter(s: &MwSummaryGraph, i: usize, j: usize) -> bool {
    let (a, b) = (s.ancestor_mask(i), s.ancestor_mask(j));
    a.iter().zip(&b).any(|(x, y)| *x && *y)
}

pub fn lag1_shortcut(tpl: &TsGraphTemplate, i: usize, tau: u64, j: usize) -> Result<Option<bool>> {
    Ok(CommonAncestorSolver::new(tpl)?.lag1_shortcut(i, tau, j))
}
