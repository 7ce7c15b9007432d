//! Edge templates of infinite time-series graphs and the finite mixed graphs
//! obtained from them.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Template entry `(from, t - lag) -> (to, t)`, or `(from, t - lag) <-> (to, t)`
/// for bidirected entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LaggedEdge {
    pub from: usize,
    pub to: usize,
    pub lag: u64,
}

impl LaggedEdge {
    pub fn new(from: usize, to: usize, lag: u64) -> Self {
        Self { from, to, lag }
    }

    fn canonical_bidirected(self) -> Self {
        if self.lag == 0 && self.from > self.to {
            Self::new(self.to, self.from, 0)
        } else {
            self
        }
    }
}

/// Finite description of a stationary ts-ADMG.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TsGraphTemplate {
    variables: Vec<String>,
    directed: BTreeSet<LaggedEdge>,
    bidirected: BTreeSet<LaggedEdge>,
}

#[derive(Deserialize, Serialize)]
struct RawTemplate {
    variables: Vec<String>,
    #[serde(default)]
    directed: Vec<(String, String, i64)>,
    #[serde(default)]
    bidirected: Vec<(String, String, i64)>,
}

impl TsGraphTemplate {
    /// Validates and canonicalizes. Duplicate entries are merged.
    pub fn new(
        variables: Vec<String>,
        directed: impl IntoIterator<Item = LaggedEdge>,
        bidirected: impl IntoIterator<Item = LaggedEdge>,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for v in &variables {
            if !seen.insert(v.as_str()) {
                return Err(Error::DuplicateVariable(v.clone()));
            }
        }
        let n = variables.len();
        let check = |e: &LaggedEdge| -> Result<()> {
            for idx in [e.from, e.to] {
                if idx >= n {
                    return Err(Error::UnknownVariable(format!("#{idx}")));
                }
            }
            if e.from == e.to && e.lag == 0 {
                return Err(Error::SelfEdge(variables[e.from].clone()));
            }
            Ok(())
        };
        let mut d = BTreeSet::new();
        for e in directed {
            check(&e)?;
            d.insert(e);
        }
        let mut b = BTreeSet::new();
        for e in bidirected {
            check(&e)?;
            b.insert(e.canonical_bidirected());
        }
        let tpl = Self { variables, directed: d, bidirected: b };
        tpl.check_contemporaneous_acyclic()?;
        Ok(tpl)
    }

    /// Convenience constructor from variable names.
    pub fn from_names(
        variables: &[&str],
        directed: &[(&str, &str, u64)],
        bidirected: &[(&str, &str, u64)],
    ) -> Result<Self> {
        let vars: Vec<String> = variables.iter().map(|s| s.to_string()).collect();
        let idx =
            |name: &str| vars.iter().position(|v| v == name).ok_or_else(|| Error::UnknownVariable(name.to_string()));
        let mut d = Vec::new();
        for &(a, b, lag) in directed {
            d.push(LaggedEdge::new(idx(a)?, idx(b)?, lag));
        }
        let mut bi = Vec::new();
        for &(a, b, lag) in bidirected {
            bi.push(LaggedEdge::new(idx(a)?, idx(b)?, lag));
        }
        Self::new(vars.clone(), d, bi)
    }

    fn check_contemporaneous_acyclic(&self) -> Result<()> {
        let n = self.variables.len();
        let mut indeg = vec![0usize; n];
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in self.directed.iter().filter(|e| e.lag == 0) {
            indeg[e.to] += 1;
            out[e.from].push(e.to);
        }
        let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut done = 0;
        while let Some(v) = stack.pop() {
            done += 1;
            for &w in &out[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    stack.push(w);
                }
            }
        }
        if done < n {
            let bad = (0..n).find(|&v| indeg[v] > 0).unwrap();
            return Err(Error::ContemporaneousCycle(self.variables[bad].clone()));
        }
        Ok(())
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.variables.iter().position(|v| v == name).ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn directed(&self) -> &BTreeSet<LaggedEdge> {
        &self.directed
    }

    pub fn bidirected(&self) -> &BTreeSet<LaggedEdge> {
        &self.bidirected
    }

    pub fn is_ts_dag(&self) -> bool {
        self.bidirected.is_empty()
    }

    pub fn max_lag(&self) -> u64 {
        self.directed.iter().chain(&self.bidirected).map(|e| e.lag).max().unwrap_or(0)
    }

    /// Segment of the infinite graph on offsets `0..=w`.
    pub fn unroll_window(&self, w: u64) -> FiniteMixedGraph {
        let mut g = FiniteMixedGraph::new(self.variables.clone());
        for var in 0..self.n_vars() {
            for offset in 0..=w {
                g.vertices.insert(Vertex::new(var, offset));
            }
        }
        for e in &self.directed {
            for o in 0..=w.saturating_sub(e.lag) {
                if o + e.lag <= w {
                    g.directed.insert((Vertex::new(e.from, o + e.lag), Vertex::new(e.to, o)));
                }
            }
        }
        for e in &self.bidirected {
            for o in 0..=w.saturating_sub(e.lag) {
                if o + e.lag <= w {
                    g.insert_bidirected(Vertex::new(e.from, o + e.lag), Vertex::new(e.to, o));
                }
            }
        }
        g
    }

    pub fn to_json(&self) -> String {
        let name = |i: usize| self.variables[i].clone();
        let raw = RawTemplate {
            variables: self.variables.clone(),
            directed: self.directed.iter().map(|e| (name(e.from), name(e.to), e.lag as i64)).collect(),
            bidirected: self.bidirected.iter().map(|e| (name(e.from), name(e.to), e.lag as i64)).collect(),
        };
        serde_json::to_string(&raw).expect("template serializes")
    }
}

pub fn parse_template(text: &str) -> Result<TsGraphTemplate> {
    let raw: RawTemplate = serde_json::from_str(text)?;
    let pos: HashMap<&str, usize> = raw.variables.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let convert = |list: &[(String, String, i64)]| -> Result<Vec<LaggedEdge>> {
        list.iter()
            .map(|(a, b, lag)| {
                let from = *pos.get(a.as_str()).ok_or_else(|| Error::UnknownVariable(a.clone()))?;
                let to = *pos.get(b.as_str()).ok_or_else(|| Error::UnknownVariable(b.clone()))?;
                if *lag < 0 {
                    return Err(Error::NegativeLag(*lag));
                }
                Ok(LaggedEdge::new(from, to, *lag as u64))
            })
            .collect()
    };
    let d = convert(&raw.directed)?;
    let b = convert(&raw.bidirected)?;
    TsGraphTemplate::new(raw.variables.clone(), d, b)
}

pub fn max_lag(tpl: &TsGraphTemplate) -> u64 {
    tpl.max_lag()
}

pub fn unroll_window(tpl: &TsGraphTemplate, w: u64) -> FiniteMixedGraph {
    tpl.unroll_window(w)
}

/// Vertex `(var, t - offset)`. Ordering is by variable index, then offset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex {
    pub var: usize,
    pub offset: u64,
}

impl Vertex {
    pub fn new(var: usize, offset: u64) -> Self {
        Self { var, offset }
    }
}

/// Finite ADMG over time-indexed vertices. Bidirected pairs are stored with
/// the smaller vertex first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteMixedGraph {
    names: Vec<String>,
    vertices: BTreeSet<Vertex>,
    directed: BTreeSet<(Vertex, Vertex)>,
    bidirected: BTreeSet<(Vertex, Vertex)>,
    latent: BTreeSet<Vertex>,
}

#[derive(Deserialize, Serialize)]
struct RawGraph {
    vertices: Vec<(String, u64)>,
    #[serde(default)]
    directed: Vec<((String, u64), (String, u64))>,
    #[serde(default)]
    bidirected: Vec<((String, u64), (String, u64))>,
    #[serde(default)]
    latent: Vec<(String, u64)>,
}

impl FiniteMixedGraph {
    pub fn new(names: Vec<String>) -> Self {
        Self {
            names,
            vertices: BTreeSet::new(),
            directed: BTreeSet::new(),
            bidirected: BTreeSet::new(),
            latent: BTreeSet::new(),
        }
    }

    /// Graph over plain named vertices, each at offset 0.
    pub fn with_vertices(names: &[&str]) -> Self {
        let mut g = Self::new(names.iter().map(|s| s.to_string()).collect());
        for i in 0..names.len() {
            g.vertices.insert(Vertex::new(i, 0));
        }
        g
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Registers a variable name if missing and returns its index.
    pub fn intern(&mut self, name: &str) -> usize {
        match self.names.iter().position(|n| n == name) {
            Some(i) => i,
            None => {
                self.names.push(name.to_string());
                self.names.len() - 1
            }
        }
    }

    pub fn vertices(&self) -> &BTreeSet<Vertex> {
        &self.vertices
    }

    pub fn directed(&self) -> &BTreeSet<(Vertex, Vertex)> {
        &self.directed
    }

    pub fn bidirected(&self) -> &BTreeSet<(Vertex, Vertex)> {
        &self.bidirected
    }

    pub fn latent(&self) -> &BTreeSet<Vertex> {
        &self.latent
    }

    pub fn observed(&self) -> BTreeSet<Vertex> {
        self.vertices.difference(&self.latent).copied().collect()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.vertices.contains(&v)
    }

    pub fn has_directed(&self, u: Vertex, v: Vertex) -> bool {
        self.directed.contains(&(u, v))
    }

    pub fn has_bidirected(&self, u: Vertex, v: Vertex) -> bool {
        self.bidirected.contains(&ordered(u, v))
    }

    pub fn adjacent(&self, u: Vertex, v: Vertex) -> bool {
        self.has_directed(u, v) || self.has_directed(v, u) || self.has_bidirected(u, v)
    }

    pub fn add_vertex(&mut self, v: Vertex) -> Result<()> {
        if v.var >= self.names.len() {
            return Err(Error::UnknownVariable(format!("#{}", v.var)));
        }
        self.vertices.insert(v);
        Ok(())
    }

    pub fn add_directed(&mut self, u: Vertex, v: Vertex) -> Result<()> {
        self.check_edge(u, v)?;
        self.directed.insert((u, v));
        Ok(())
    }

    pub fn add_bidirected(&mut self, u: Vertex, v: Vertex) -> Result<()> {
        self.check_edge(u, v)?;
        self.insert_bidirected(u, v);
        Ok(())
    }

    pub fn set_latent(&mut self, v: Vertex) -> Result<()> {
        self.check_vertex(v)?;
        self.latent.insert(v);
        Ok(())
    }

    pub(crate) fn insert_vertex(&mut self, v: Vertex) {
        self.vertices.insert(v);
    }

    pub(crate) fn insert_directed(&mut self, u: Vertex, v: Vertex) {
        self.directed.insert((u, v));
    }

    pub(crate) fn insert_bidirected(&mut self, u: Vertex, v: Vertex) {
        self.bidirected.insert(ordered(u, v));
    }

    pub(crate) fn clear_bidirected(&mut self) {
        self.bidirected.clear();
    }

    pub(crate) fn insert_latent(&mut self, v: Vertex) {
        self.latent.insert(v);
    }

    fn check_edge(&self, u: Vertex, v: Vertex) -> Result<()> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(Error::SameEndpoint(self.label(u)));
        }
        Ok(())
    }

    pub fn check_vertex(&self, v: Vertex) -> Result<()> {
        if self.vertices.contains(&v) {
            Ok(())
        } else {
            Err(Error::UnknownVertex(self.label(v)))
        }
    }

    pub fn check_subset<'a>(&self, set: impl IntoIterator<Item = &'a Vertex>) -> Result<()> {
        set.into_iter().try_for_each(|&v| self.check_vertex(v))
    }

    /// `X[t]` for offset 0, `X[t-3]` otherwise.
    pub fn label(&self, v: Vertex) -> String {
        let name = self.names.get(v.var).map(String::as_str).unwrap_or("?");
        if v.offset == 0 {
            format!("{name}[t]")
        } else {
            format!("{name}[t-{}]", v.offset)
        }
    }

    /// Inverse of [`label`](Self::label); also accepts `X:3`.
    pub fn parse_label(&self, s: &str) -> Result<Vertex> {
        let s = s.trim();
        let bad = || Error::UnknownVertex(s.to_string());
        let (name, offset) = if let Some(open) = s.find('[') {
            let inner = s[open..].strip_prefix("[t").and_then(|r| r.strip_suffix(']')).ok_or_else(bad)?;
            let offset = if inner.is_empty() {
                0
            } else {
                inner.strip_prefix('-').ok_or_else(bad)?.parse().map_err(|_| bad())?
            };
            (&s[..open], offset)
        } else if let Some((name, off)) = s.rsplit_once(':') {
            (name, off.parse().map_err(|_| bad())?)
        } else {
            (s, 0)
        };
        let var = self.names.iter().position(|n| n == name).ok_or_else(bad)?;
        let v = Vertex::new(var, offset);
        self.check_vertex(v)?;
        Ok(v)
    }

    pub fn is_acyclic(&self) -> bool {
        let dense = Dense::new(self);
        let n = dense.len();
        let mut indeg: Vec<usize> = (0..n).map(|v| dense.parents[v].len()).collect();
        let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut done = 0;
        while let Some(v) = stack.pop() {
            done += 1;
            for &c in &dense.children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    stack.push(c);
                }
            }
        }
        done == n
    }

    /// Subgraph induced on `keep`, keeping latent marks.
    pub fn induced(&self, keep: &BTreeSet<Vertex>) -> FiniteMixedGraph {
        let mut g = FiniteMixedGraph::new(self.names.clone());
        g.vertices = self.vertices.intersection(keep).copied().collect();
        g.directed = self.directed.iter().filter(|(u, v)| keep.contains(u) && keep.contains(v)).copied().collect();
        g.bidirected = self.bidirected.iter().filter(|(u, v)| keep.contains(u) && keep.contains(v)).copied().collect();
        g.latent = self.latent.intersection(keep).copied().collect();
        g
    }

    /// Same vertices and edges, names compared by string rather than index.
    pub fn same_edges(&self, other: &FiniteMixedGraph) -> bool {
        self.to_json() == other.to_json()
    }

    pub fn to_json(&self) -> String {
        let named = |v: &Vertex| (self.names[v.var].clone(), v.offset);
        let raw = RawGraph {
            vertices: self.vertices.iter().map(named).collect(),
            directed: self.directed.iter().map(|(u, v)| (named(u), named(v))).collect(),
            bidirected: self.bidirected.iter().map(|(u, v)| (named(u), named(v))).collect(),
            latent: self.latent.iter().map(named).collect(),
        };
        serde_json::to_string(&raw).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawGraph = serde_json::from_str(text)?;
        let mut g = FiniteMixedGraph::new(Vec::new());
        for (name, offset) in &raw.vertices {
            let var = g.intern(name);
            g.vertices.insert(Vertex::new(var, *offset));
        }
        let find = |g: &FiniteMixedGraph, (name, offset): &(String, u64)| -> Result<Vertex> {
            let var = g
                .names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::UnknownVertex(format!("{name}:{offset}")))?;
            let v = Vertex::new(var, *offset);
            g.check_vertex(v)?;
            Ok(v)
        };
        for (a, b) in &raw.directed {
            let (u, v) = (find(&g, a)?, find(&g, b)?);
            g.add_directed(u, v)?;
        }
        for (a, b) in &raw.bidirected {
            let (u, v) = (find(&g, a)?, find(&g, b)?);
            g.add_bidirected(u, v)?;
        }
        for l in &raw.latent {
            let v = find(&g, l)?;
            g.latent.insert(v);
        }
        if !g.is_acyclic() {
            return Err(Error::NotADag("directed part has a cycle".into()));
        }
        Ok(g)
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph G {\n");
        for &v in &self.vertices {
            let style = if self.latent.contains(&v) { " [style=dashed]" } else { "" };
            let _ = writeln!(out, "  \"{}\"{};", self.label(v), style);
        }
        for &(u, v) in &self.directed {
            let _ = writeln!(out, "  \"{}\" -> \"{}\";", self.label(u), self.label(v));
        }
        for &(u, v) in &self.bidirected {
            let _ = writeln!(out, "  \"{}\" -> \"{}\" [dir=both];", self.label(u), self.label(v));
        }
        out.push_str("}\n");
        out
    }
}

fn ordered(u: Vertex, v: Vertex) -> (Vertex, Vertex) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Integer-indexed adjacency lists, used by the graph algorithms.
pub(crate) struct Dense {
    pub verts: Vec<Vertex>,
    pub pos: HashMap<Vertex, usize>,
    pub parents: Vec<Vec<usize>>,
    pub children: Vec<Vec<usize>>,
    pub spouses: Vec<Vec<usize>>,
}

impl Dense {
    pub fn new(g: &FiniteMixedGraph) -> Self {
        let verts: Vec<Vertex> = g.vertices.iter().copied().collect();
        let pos: HashMap<Vertex, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let n = verts.len();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        let mut spouses = vec![Vec::new(); n];
        for (u, v) in &g.directed {
            let (a, b) = (pos[u], pos[v]);
            children[a].push(b);
            parents[b].push(a);
        }
        for (u, v) in &g.bidirected {
            let (a, b) = (pos[u], pos[v]);
            spouses[a].push(b);
            spouses[b].push(a);
        }
        Self { verts, pos, parents, children, spouses }
    }

    pub fn len(&self) -> usize {
        self.verts.len()
    }

    /// Reflexive ancestors of `seeds` as a membership mask.
    pub fn ancestor_mask(&self, seeds: impl IntoIterator<Item = usize>) -> Vec<bool> {
        let mut mask = vec![false; self.len()];
        let mut stack: Vec<usize> = Vec::new();
        for s in seeds {
            if !mask[s] {
                mask[s] = true;
                stack.push(s);
            }
        }
        while let Some(v) = stack.pop() {
            for &p in &self.parents[v] {
                if !mask[p] {
                    mask[p] = true;
                    stack.push(p);
                }
            }
        }
        mask
    }
}

/// Groups template entries by target variable: `(source, lag)` pairs.
pub(crate) fn incoming(tpl: &TsGraphTemplate) -> BTreeMap<usize, Vec<(usize, u64)>> {
    let mut map: BTreeMap<usize, Vec<(usize, u64)>> = BTreeMap::new();
    for e in tpl.directed() {
        map.entry(e.to).or_default().push((e.from, e.lag));
    }
    map
}
