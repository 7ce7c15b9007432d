//! Multi-weighted summary graphs and the cycle-class machinery behind the
//! cone decomposition of walk weights.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph_model::TsGraphTemplate;

/// Summary digraph whose edges carry sorted, deduplicated lag sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MwSummaryGraph {
    nodes: Vec<String>,
    edges: BTreeMap<(usize, usize), Vec<u64>>,
    succ: Vec<Vec<usize>>,
}

impl MwSummaryGraph {
    pub fn new(nodes: Vec<String>, edges: BTreeMap<(usize, usize), Vec<u64>>) -> Result<Self> {
        let n = nodes.len();
        let mut clean = BTreeMap::new();
        for ((a, b), mut w) in edges {
            if a >= n || b >= n {
                return Err(Error::Invalid(format!("edge ({a}, {b}) out of range")));
            }
            w.sort_unstable();
            w.dedup();
            if w.is_empty() {
                return Err(Error::Invalid(format!("empty weight set on ({a}, {b})")));
            }
            clean.insert((a, b), w);
        }
        let mut succ = vec![Vec::new(); n];
        for &(a, b) in clean.keys() {
            succ[a].push(b);
        }
        let s = Self { nodes, edges: clean, succ };
        s.check_weakly_acyclic()?;
        Ok(s)
    }

    fn check_weakly_acyclic(&self) -> Result<()> {
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        let mut zero: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (&(a, b), w) in &self.edges {
            if w[0] == 0 {
                if a == b {
                    return Err(Error::NotWeaklyAcyclic(format!("zero self loop on {}", self.nodes[a])));
                }
                zero[a].push(b);
                indeg[b] += 1;
            }
        }
        let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut done = 0;
        while let Some(v) = stack.pop() {
            done += 1;
            for &w in &zero[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    stack.push(w);
                }
            }
        }
        if done < n {
            return Err(Error::NotWeaklyAcyclic("zero-weight cycle".into()));
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edges(&self) -> &BTreeMap<(usize, usize), Vec<u64>> {
        &self.edges
    }

    pub fn weights(&self, a: usize, b: usize) -> Option<&[u64]> {
        self.edges.get(&(a, b)).map(Vec::as_slice)
    }

    pub fn successors(&self, a: usize) -> &[usize] {
        &self.succ[a]
    }

    /// Reflexive ancestors in the unweighted summary graph.
    pub fn ancestor_mask(&self, v: usize) -> Vec<bool> {
        let n = self.len();
        let mut pred = vec![Vec::new(); n];
        for &(a, b) in self.edges.keys() {
            pred[b].push(a);
        }
        let mut mask = vec![false; n];
        mask[v] = true;
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            for &p in &pred[x] {
                if !mask[p] {
                    mask[p] = true;
                    stack.push(p);
                }
            }
        }
        mask
    }
}

pub fn build_mw_summary(tpl: &TsGraphTemplate) -> Result<MwSummaryGraph> {
    if !tpl.is_ts_dag() {
        return Err(Error::BidirectedEntries);
    }
    let mut edges: BTreeMap<(usize, usize), Vec<u64>> = BTreeMap::new();
    for e in tpl.directed() {
        edges.entry((e.from, e.to)).or_default().push(e.lag);
    }
    MwSummaryGraph::new(tpl.variables().to_vec(), edges)
}

/// Sorted, deduplicated Minkowski sum.
pub fn minkowski(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out: Vec<u64> = a.iter().flat_map(|x| b.iter().map(move |y| x + y)).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Rotation class of an irreducible directed cycle. The representative
/// starts at its smallest node and omits the closing repetition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CycleClass {
    pub representative: Vec<usize>,
    pub node_set: BTreeSet<usize>,
    pub weights: Vec<u64>,
}

impl CycleClass {
    pub fn max_weight(&self) -> u64 {
        *self.weights.last().expect("cycle weights are non-empty")
    }
}

pub fn enumerate_cycle_classes(s: &MwSummaryGraph) -> Vec<CycleClass> {
    let n = s.len();
    let mut reps: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        let mut path = vec![start];
        let mut on = vec![false; n];
        on[start] = true;
        cycles_from(s, start, &mut path, &mut on, &mut reps);
    }
    reps.sort();
    reps.into_iter()
        .map(|rep| {
            let mut closed = rep.clone();
            closed.push(rep[0]);
            let weights = walk_weights(s, &closed).expect("cycle edges exist");
            CycleClass { node_set: rep.iter().copied().collect(), representative: rep, weights }
        })
        .collect()
}

fn cycles_from(s: &MwSummaryGraph, start: usize, path: &mut Vec<usize>, on: &mut [bool], out: &mut Vec<Vec<usize>>) {
    let v = *path.last().unwrap();
    for &w in s.successors(v) {
        if w == start {
            out.push(path.clone());
        } else if w > start && !on[w] {
            on[w] = true;
            path.push(w);
            cycles_from(s, start, path, on, out);
            path.pop();
            on[w] = false;
        }
    }
}

/// Undirected graph over cycle classes; classes sharing a node are adjacent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GraphOfCycles {
    pub adjacency: Vec<BTreeSet<usize>>,
}

impl GraphOfCycles {
    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbors(&self, c: usize) -> &BTreeSet<usize> {
        &self.adjacency[c]
    }

    /// Whether `from` and some member of `targets` are connected (possibly
    /// trivially) once `removed` is deleted.
    fn connected(&self, from: usize, targets: &BTreeSet<usize>, removed: usize) -> bool {
        if from == removed {
            return false;
        }
        let mut seen = vec![false; self.len()];
        seen[from] = true;
        seen[removed] = true;
        let mut stack = vec![from];
        while let Some(c) = stack.pop() {
            if targets.contains(&c) {
                return true;
            }
            for &d in &self.adjacency[c] {
                if !seen[d] {
                    seen[d] = true;
                    stack.push(d);
                }
            }
        }
        false
    }
}

pub fn build_graph_of_cycles(classes: &[CycleClass]) -> GraphOfCycles {
    let mut adjacency = vec![BTreeSet::new(); classes.len()];
    for a in 0..classes.len() {
        for b in a + 1..classes.len() {
            if !classes[a].node_set.is_disjoint(&classes[b].node_set) {
                adjacency[a].insert(b);
                adjacency[b].insert(a);
            }
        }
    }
    GraphOfCycles { adjacency }
}

/// Cycle-free directed paths from `k` to `i`; only the trivial path when
/// `k == i`.
pub fn cycle_free_paths(s: &MwSummaryGraph, k: usize, i: usize) -> Vec<Vec<usize>> {
    if k == i {
        return vec![vec![k]];
    }
    let mut out = Vec::new();
    let mut path = vec![k];
    let mut on = vec![false; s.len()];
    on[k] = true;
    simple_paths(s, i, &mut path, &mut on, &mut out);
    out.sort();
    out
}

fn simple_paths(s: &MwSummaryGraph, target: usize, path: &mut Vec<usize>, on: &mut [bool], out: &mut Vec<Vec<usize>>) {
    let v = *path.last().unwrap();
    for &w in s.successors(v) {
        if w == target {
            let mut p = path.clone();
            p.push(w);
            out.push(p);
        } else if !on[w] {
            on[w] = true;
            path.push(w);
            simple_paths(s, target, path, on, out);
            path.pop();
            on[w] = false;
        }
    }
}

/// Weight set of a walk given as its node sequence; `{0}` for a single node.
pub fn path_weightset(s: &MwSummaryGraph, walk: &[usize]) -> Result<Vec<u64>> {
    if walk.is_empty() {
        return Err(Error::Invalid("empty walk".into()));
    }
    walk_weights(s, walk)
}

fn walk_weights(s: &MwSummaryGraph, walk: &[usize]) -> Result<Vec<u64>> {
    let mut acc = vec![0];
    for pair in walk.windows(2) {
        let w = s.weights(pair[0], pair[1]).ok_or_else(|| {
            let name = |i: usize| s.nodes.get(i).cloned().unwrap_or_else(|| format!("#{i}"));
            Error::MissingEdge(name(pair[0]), name(pair[1]))
        })?;
        acc = minkowski(&acc, w);
    }
    Ok(acc)
}

pub type ClassSet = BTreeSet<usize>;

/// Classes sharing at least one node with the path.
pub fn touch(classes: &[CycleClass], path: &[usize]) -> ClassSet {
    classes.iter().enumerate().filter(|(_, c)| path.iter().any(|v| c.node_set.contains(v))).map(|(i, _)| i).collect()
}

/// Nodes that are `s`-access points for some node outside `s`.
pub fn access_points(goc: &GraphOfCycles, s: &ClassSet) -> ClassSet {
    let mut out = ClassSet::new();
    for v in 0..goc.len() {
        let found = goc.neighbors(v).iter().filter(|w| !s.contains(w)).any(|&w| goc.connected(v, s, w));
        if found {
            out.insert(v);
        }
    }
    out
}

/// Node sets of the generating paths, including the empty set.
pub fn generating_set(goc: &GraphOfCycles, s: &ClassSet, access: &ClassSet) -> BTreeSet<ClassSet> {
    let mut q = BTreeSet::new();
    q.insert(ClassSet::new());
    let starts: Vec<usize> = s.intersection(access).copied().collect();
    let outside: ClassSet = access.difference(s).copied().collect();
    for &v in &starts {
        // paths from v through nodes of `outside`; each prefix ends at a
        // node of `outside` and is therefore one of the enumerated paths
        let mut seen: HashSet<(ClassSet, usize)> = HashSet::new();
        let mut stack = vec![(ClassSet::from([v]), v)];
        while let Some((set, at)) = stack.pop() {
            if !seen.insert((set.clone(), at)) {
                continue;
            }
            q.insert(set.clone());
            for &w in goc.neighbors(at) {
                if outside.contains(&w) && !set.contains(&w) {
                    let mut next = set.clone();
                    next.insert(w);
                    stack.push((next, w));
                }
            }
        }
    }
    q
}

/// Closes a family of sets under pairwise union and adds the empty set.
pub fn union_closure(generators: &BTreeSet<ClassSet>) -> BTreeSet<ClassSet> {
    let mut monoid: BTreeSet<ClassSet> = generators.clone();
    monoid.insert(ClassSet::new());
    let gens: Vec<&ClassSet> = generators.iter().filter(|g| !g.is_empty()).collect();
    let mut frontier: Vec<ClassSet> = monoid.iter().cloned().collect();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for m in &frontier {
            for g in &gens {
                if g.is_subset(m) {
                    continue;
                }
                let u: ClassSet = m.union(g).copied().collect();
                if monoid.insert(u.clone()) {
                    next.push(u);
                }
            }
        }
        frontier = next;
    }
    monoid
}

/// The set monoid attached to a path: union closure of the generating set
/// relative to the path's touch set.
pub fn get_monoid(path: &[usize], classes: &[CycleClass], goc: &GraphOfCycles) -> BTreeSet<ClassSet> {
    monoid_for_touch(&touch(classes, path), goc)
}

pub fn monoid_for_touch(touch: &ClassSet, goc: &GraphOfCycles) -> BTreeSet<ClassSet> {
    let access = access_points(goc, touch);
    union_closure(&generating_set(goc, touch, &access))
}

/// Monoid elements built from generators that each strictly grow the
/// closure, minimal per closure. Every monoid element contains one of them
/// with the same closure.
pub fn monoid_representatives(touch: &ClassSet, goc: &GraphOfCycles) -> Vec<ClassSet> {
    let access = access_points(goc, touch);
    let mut gens: Vec<(ClassSet, ClassSet)> = generating_set(goc, touch, &access)
        .into_iter()
        .filter(|g| !g.is_empty())
        .map(|g| {
            let c = closure(&g, touch, goc);
            (g, c)
        })
        .collect();
    gens.sort_by_key(|(g, _)| g.len());
    let mut kept: Vec<(ClassSet, ClassSet)> = Vec::new();
    for (g, c) in gens {
        if !kept.iter().any(|(h, d)| *d == c && h.is_subset(&g)) {
            kept.push((g, c));
        }
    }

    let base = closure(&ClassSet::new(), touch, goc);
    let mut seen: HashSet<ClassSet> = HashSet::from([ClassSet::new()]);
    let mut out = vec![(ClassSet::new(), base.clone())];
    let mut frontier = vec![(ClassSet::new(), base)];
    while let Some((s, cl)) = frontier.pop() {
        for (g, c) in &kept {
            if c.is_subset(&cl) {
                continue;
            }
            let next: ClassSet = s.union(g).copied().collect();
            if seen.insert(next.clone()) {
                let ncl: ClassSet = cl.union(c).copied().collect();
                out.push((next.clone(), ncl.clone()));
                frontier.push((next, ncl));
            }
        }
    }
    out.sort_by_key(|(s, _)| s.len());
    let mut reps: Vec<(ClassSet, ClassSet)> = Vec::new();
    for (s, c) in out {
        if !reps.iter().any(|(r, d)| *d == c && r.is_subset(&s)) {
            reps.push((s, c));
        }
    }
    reps.into_iter().map(|(s, _)| s).collect()
}

/// `s` together with the touch set and every class outside the touch set
/// for which `s` holds a touch-access point.
pub fn closure(s: &ClassSet, touch: &ClassSet, goc: &GraphOfCycles) -> ClassSet {
    let mut out: ClassSet = s.union(touch).copied().collect();
    for &v in s {
        for &w in goc.neighbors(v) {
            if !touch.contains(&w) && !out.contains(&w) && goc.connected(v, touch, w) {
                out.insert(w);
            }
        }
    }
    out
}

/// `(a0; a1, ..., a_mu)` standing for `{a0 + sum n_k a_k : n_k >= 0}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ConeTuple {
    pub a0: u64,
    pub coeffs: Vec<u64>,
}

impl ConeTuple {
    pub fn new(a0: u64, coeffs: Vec<u64>) -> Self {
        Self { a0, coeffs }
    }

    pub fn shifted(&self, by: u64) -> Self {
        Self { a0: self.a0 + by, coeffs: self.coeffs.clone() }
    }
}

impl std::fmt::Display for ConeTuple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let rest: Vec<String> = self.coeffs.iter().map(u64::to_string).collect();
        write!(f, "({};{})", self.a0, rest.join(","))
    }
}

impl std::str::FromStr for ConeTuple {
    type Err = Error;

    /// Parses `a0;a1,a2` with optional surrounding parentheses.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Invalid(format!("bad cone tuple `{s}`"));
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        let (head, tail) = t.split_once(';').unwrap_or((t, ""));
        let a0 = head.trim().parse().map_err(|_| bad())?;
        let mut coeffs = Vec::new();
        for part in tail.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let c: u64 = part.parse().map_err(|_| bad())?;
            if c == 0 {
                return Err(bad());
            }
            coeffs.push(c);
        }
        Ok(Self { a0, coeffs })
    }
}

/// Cone tuples for base weights `path_weights` decorated by the classes in
/// `set`. Every weight of every class in `closure` becomes a generator, in
/// canonical class order.
pub fn tuple_sets_from(
    tau: u64,
    path_weights: &[u64],
    set: &ClassSet,
    closure: &ClassSet,
    classes: &[CycleClass],
) -> Vec<ConeTuple> {
    let mut base = minkowski(&[tau], path_weights);
    for &c in set {
        base = minkowski(&base, &classes[c].weights);
    }
    let coeffs: Vec<u64> = closure.iter().flat_map(|&c| classes[c].weights.iter().copied()).collect();
    base.into_iter().map(|a0| ConeTuple::new(a0, coeffs.clone())).collect()
}

pub fn tuple_sets(
    s: &MwSummaryGraph,
    classes: &[CycleClass],
    goc: &GraphOfCycles,
    tau: u64,
    path: &[usize],
    set: &ClassSet,
) -> Result<Vec<ConeTuple>> {
    let t = touch(classes, path);
    let cl = closure(set, &t, goc);
    Ok(tuple_sets_from(tau, &path_weightset(s, path)?, set, &cl, classes))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn running() -> MwSummaryGraph {
        let tpl = TsGraphTemplate::from_names(
            &["X", "Y", "Z"],
            &[("X", "X", 2), ("X", "Y", 1), ("Y", "X", 2), ("Y", "Z", 0), ("Y", "Z", 5)],
            &[],
        )
        .unwrap();
        build_mw_summary(&tpl).unwrap()
    }

    // 1 -> 2 -> 3 -> 4, 4 -> 3, 3 -> 2, all lags 1 (nodes shifted to 0..4)
    fn toy() -> MwSummaryGraph {
        let edges = [(0, 1), (1, 2), (2, 3), (3, 2), (2, 1)].into_iter().map(|e| (e, vec![1])).collect();
        MwSummaryGraph::new(vec!["1".into(), "2".into(), "3".into(), "4".into()], edges).unwrap()
    }

    #[test]
    fn running_summary_edges() {
        let s = running();
        assert_eq!(s.weights(0, 0), Some(&[2][..]));
        assert_eq!(s.weights(0, 1), Some(&[1][..]));
        assert_eq!(s.weights(1, 0), Some(&[2][..]));
        assert_eq!(s.weights(1, 2), Some(&[0, 5][..]));
        assert_eq!(s.edges().len(), 4);
    }

    #[test]
    fn rejects_bidirected_and_zero_cycles() {
        let tpl = TsGraphTemplate::from_names(&["X", "Y"], &[], &[("X", "Y", 1)]).unwrap();
        assert!(matches!(build_mw_summary(&tpl), Err(Error::BidirectedEntries)));
        let bad = [((0, 1), vec![0]), ((1, 0), vec![0, 2])].into_iter().collect();
        assert!(MwSummaryGraph::new(vec!["a".into(), "b".into()], bad).is_err());
        let self0 = [((0, 0), vec![0])].into_iter().collect();
        assert!(MwSummaryGraph::new(vec!["a".into()], self0).is_err());
    }

    #[test]
    fn running_cycle_classes() {
        let classes = enumerate_cycle_classes(&running());
        assert_eq!(classes.len(), 2);
        assert_eq!(classes[0].representative, vec![0]);
        assert_eq!(classes[0].weights, vec![2]);
        assert_eq!(classes[1].representative, vec![0, 1]);
        assert_eq!(classes[1].weights, vec![3]);
        let goc = build_graph_of_cycles(&classes);
        assert!(goc.neighbors(0).contains(&1));
    }

    #[test]
    fn toy_cycle_classes() {
        let classes = enumerate_cycle_classes(&toy());
        let reps: Vec<_> = classes.iter().map(|c| c.representative.clone()).collect();
        // [(2,3,2)] and [(3,4,3)] in one-based labels
        assert_eq!(reps, vec![vec![1, 2], vec![2, 3]]);
        let goc = build_graph_of_cycles(&classes);
        assert_eq!(goc.neighbors(0), &BTreeSet::from([1]));
        assert!(enumerate_cycle_classes(&MwSummaryGraph::new(vec!["a".into()], BTreeMap::new()).unwrap()).is_empty());
    }

    #[test]
    fn paths_and_weights() {
        let s = running();
        assert!(cycle_free_paths(&s, 0, 2).contains(&vec![0, 1, 2]));
        assert_eq!(cycle_free_paths(&s, 0, 0), vec![vec![0]]);
        assert_eq!(path_weightset(&s, &[0, 1, 2]).unwrap(), vec![1, 6]);
        assert_eq!(path_weightset(&s, &[0]).unwrap(), vec![0]);
        assert_eq!(path_weightset(&s, &[0, 1, 0, 1, 2]).unwrap(), vec![4, 9]);
        assert!(matches!(path_weightset(&s, &[2, 0]), Err(Error::MissingEdge(..))));
        assert_eq!(cycle_free_paths(&toy(), 0, 2), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn toy_monoid_and_closure() {
        let s = toy();
        let classes = enumerate_cycle_classes(&s);
        let goc = build_graph_of_cycles(&classes);
        // classes: 0 = [(2,3,2)], 1 = [(3,4,3)]; path (1,2) touches only class 0
        let path = [0, 1];
        let t = touch(&classes, &path);
        assert_eq!(t, ClassSet::from([0]));
        assert_eq!(access_points(&goc, &t), ClassSet::from([0]));
        let m = get_monoid(&path, &classes, &goc);
        assert_eq!(m, BTreeSet::from([ClassSet::new(), ClassSet::from([0])]));
        assert_eq!(closure(&ClassSet::new(), &t, &goc), ClassSet::from([0]));
        assert_eq!(closure(&ClassSet::from([0]), &t, &goc), ClassSet::from([0, 1]));
    }

    #[test]
    fn running_tuple_sets() {
        let s = running();
        let classes = enumerate_cycle_classes(&s);
        let goc = build_graph_of_cycles(&classes);
        let empty = ClassSet::new();
        let d = tuple_sets(&s, &classes, &goc, 0, &[0, 1, 2], &empty).unwrap();
        assert_eq!(d, vec![ConeTuple::new(1, vec![2, 3]), ConeTuple::new(6, vec![2, 3])]);
        let d = tuple_sets(&s, &classes, &goc, 0, &[0], &empty).unwrap();
        assert_eq!(d, vec![ConeTuple::new(0, vec![2, 3])]);
        let monoid = get_monoid(&[0, 1, 2], &classes, &goc);
        assert!(monoid.contains(&empty));
        assert_eq!(closure(&empty, &touch(&classes, &[0, 1, 2]), &goc), ClassSet::from([0, 1]));
    }

    #[test]
    fn tuple_without_cycles() {
        let s = MwSummaryGraph::new(vec!["a".into()], BTreeMap::new()).unwrap();
        let d = tuple_sets(&s, &[], &build_graph_of_cycles(&[]), 5, &[0], &ClassSet::new()).unwrap();
        assert_eq!(d, vec![ConeTuple::new(5, vec![])]);
        assert_eq!(get_monoid(&[0], &[], &build_graph_of_cycles(&[])), BTreeSet::from([ClassSet::new()]));
    }

    #[test]
    fn cone_tuple_text() {
        let t: ConeTuple = "(1;2,3)".parse().unwrap();
        assert_eq!(t, ConeTuple::new(1, vec![2, 3]));
        assert_eq!(t.to_string(), "(1;2,3)");
        assert_eq!("5".parse::<ConeTuple>().unwrap(), ConeTuple::new(5, vec![]));
        assert!("1;0".parse::<ConeTuple>().is_err());
    }
}
