//! Latent projections and separation queries on finite mixed graphs.

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::graph_model::{Dense, FiniteMixedGraph, Vertex};

pub fn ancestors(g: &FiniteMixedGraph, seeds: &BTreeSet<Vertex>) -> Result<BTreeSet<Vertex>> {
    g.check_subset(seeds)?;
    let dense = Dense::new(g);
    let mask = dense.ancestor_mask(seeds.iter().map(|v| dense.pos[v]));
    Ok(collect(&dense, &mask))
}

fn collect(dense: &Dense, mask: &[bool]) -> BTreeSet<Vertex> {
    mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| dense.verts[i]).collect()
}

/// ADMG latent projection onto `observed`; everything else is marginalized.
pub fn admg_latent_project(g: &FiniteMixedGraph, observed: &BTreeSet<Vertex>) -> Result<FiniteMixedGraph> {
    g.check_subset(observed)?;
    let dense = Dense::new(g);
    let n = dense.len();
    let mut is_obs = vec![false; n];
    for v in observed {
        is_obs[dense.pos[v]] = true;
    }

    let mut out = FiniteMixedGraph::new(g.names().to_vec());
    for &v in observed {
        out.insert_vertex(v);
    }

    let mut seen = vec![usize::MAX; n];
    // reaches[l] lists the observed vertices that l reaches along a directed
    // chain whose intermediate vertices are all latent
    let mut reaches: Vec<Vec<usize>> = vec![Vec::new(); n];
    let obs_idx: Vec<usize> = observed.iter().map(|v| dense.pos[v]).collect();
    for &o in &obs_idx {
        reaches[o].push(o);
        // directed edges: forward through latents
        let mut stack = vec![o];
        seen[o] = o;
        while let Some(v) = stack.pop() {
            for &c in &dense.children[v] {
                if seen[c] == o {
                    continue;
                }
                seen[c] = o;
                if is_obs[c] {
                    if c != o {
                        out.insert_directed(dense.verts[o], dense.verts[c]);
                    }
                } else {
                    stack.push(c);
                }
            }
        }
    }
    let mut seen = vec![usize::MAX; n];
    for &o in &obs_idx {
        let mut stack = vec![o];
        seen[o] = o;
        while let Some(v) = stack.pop() {
            for &p in &dense.parents[v] {
                if seen[p] == o || is_obs[p] {
                    continue;
                }
                seen[p] = o;
                reaches[p].push(o);
                stack.push(p);
            }
        }
    }
    for (v, list) in reaches.iter().enumerate() {
        if is_obs[v] {
            continue;
        }
        for (k, &a) in list.iter().enumerate() {
            for &b in &list[k + 1..] {
                out.insert_bidirected(dense.verts[a], dense.verts[b]);
            }
        }
    }
    for &(u, v) in g.bidirected() {
        let (a, b) = (dense.pos[&u], dense.pos[&v]);
        for &x in &reaches[a] {
            for &y in &reaches[b] {
                if x != y {
                    out.insert_bidirected(dense.verts[x], dense.verts[y]);
                }
            }
        }
    }
    Ok(out)
}

/// Replaces every bidirected edge `u <-> v` by a fresh latent parent of both.
pub fn canonical_dag(g: &FiniteMixedGraph) -> FiniteMixedGraph {
    let mut out = g.clone();
    out.clear_bidirected();
    for &(u, v) in g.bidirected() {
        let mut name = format!("L({},{})", g.label(u), g.label(v));
        while out.names().contains(&name) {
            name.push('\'');
        }
        let var = out.intern(&name);
        let l = Vertex::new(var, 0);
        out.insert_vertex(l);
        out.insert_latent(l);
        out.insert_directed(l, u);
        out.insert_directed(l, v);
    }
    out
}

// Edge marks seen from the current vertex: (head at current, head at next).
fn incident(dense: &Dense, v: usize) -> impl Iterator<Item = (usize, bool, bool)> + '_ {
    let p = dense.parents[v].iter().map(|&w| (w, true, false));
    let c = dense.children[v].iter().map(|&w| (w, false, true));
    let s = dense.spouses[v].iter().map(|&w| (w, true, true));
    p.chain(c).chain(s)
}

pub fn m_separated(
    g: &FiniteMixedGraph,
    x: &BTreeSet<Vertex>,
    y: &BTreeSet<Vertex>,
    z: &BTreeSet<Vertex>,
) -> Result<bool> {
    g.check_subset(x.iter().chain(y).chain(z))?;
    for (a, b) in [(x, y), (x, z), (y, z)] {
        if let Some(v) = a.intersection(b).next() {
            return Err(Error::Overlap(g.label(*v)));
        }
    }
    let dense = Dense::new(g);
    let n = dense.len();
    let mut in_z = vec![false; n];
    for v in z {
        in_z[dense.pos[v]] = true;
    }
    let an_z = dense.ancestor_mask(z.iter().map(|v| dense.pos[v]));
    let mut in_y = vec![false; n];
    for v in y {
        in_y[dense.pos[v]] = true;
    }

    // visited[v][h]: v reached with an arrowhead at v iff h
    let mut visited = vec![[false; 2]; n];
    let mut queue = VecDeque::new();
    for v in x {
        let s = dense.pos[v];
        for (w, _, head_w) in incident(&dense, s) {
            if !visited[w][head_w as usize] {
                visited[w][head_w as usize] = true;
                queue.push_back((w, head_w));
            }
        }
    }
    while let Some((v, head_in)) = queue.pop_front() {
        if in_y[v] {
            return Ok(false);
        }
        for (w, head_v, head_w) in incident(&dense, v) {
            let pass = if head_in && head_v { an_z[v] } else { !in_z[v] };
            if pass && !visited[w][head_w as usize] {
                visited[w][head_w as usize] = true;
                queue.push_back((w, head_w));
            }
        }
    }
    Ok(true)
}

/// Path from `i` to `j` whose middle vertices are colliders unless latent,
/// with every collider an ancestor of `i` or `j`.
pub fn has_inducing_path(g: &FiniteMixedGraph, i: Vertex, j: Vertex, latents: &BTreeSet<Vertex>) -> Result<bool> {
    g.check_vertex(i)?;
    g.check_vertex(j)?;
    if i == j {
        return Err(Error::SameEndpoint(g.label(i)));
    }
    let dense = Dense::new(g);
    Ok(inducing(&dense, dense.pos[&i], dense.pos[&j], &latent_mask(&dense, latents)))
}

fn latent_mask(dense: &Dense, latents: &BTreeSet<Vertex>) -> Vec<bool> {
    let mut mask = vec![false; dense.len()];
    for v in latents {
        if let Some(&k) = dense.pos.get(v) {
            mask[k] = true;
        }
    }
    mask
}

fn inducing(dense: &Dense, i: usize, j: usize, latent: &[bool]) -> bool {
    let an = dense.ancestor_mask([i, j]);
    let mut visited = vec![[false; 2]; dense.len()];
    let mut queue = VecDeque::new();
    for (w, _, head_w) in incident(dense, i) {
        if w == j {
            return true;
        }
        if w != i && !visited[w][head_w as usize] {
            visited[w][head_w as usize] = true;
            queue.push_back((w, head_w));
        }
    }
    while let Some((v, head_in)) = queue.pop_front() {
        for (w, head_v, head_w) in incident(dense, v) {
            let pass = if head_in && head_v { an[v] } else { latent[v] };
            if !pass || w == i {
                continue;
            }
            if w == j {
                return true;
            }
            if !visited[w][head_w as usize] {
                visited[w][head_w as usize] = true;
                queue.push_back((w, head_w));
            }
        }
    }
    false
}

/// DMAG latent projection of a DAG onto `observed`.
pub fn dmag_project(dag: &FiniteMixedGraph, observed: &BTreeSet<Vertex>) -> Result<FiniteMixedGraph> {
    if !dag.bidirected().is_empty() {
        return Err(Error::NotADag("bidirected edges present".into()));
    }
    if !dag.is_acyclic() {
        return Err(Error::NotADag("directed cycle".into()));
    }
    dag.check_subset(observed)?;
    let latents: BTreeSet<Vertex> = dag.vertices().difference(observed).copied().collect();
    let dense = Dense::new(dag);
    let latent = latent_mask(&dense, &latents);
    let obs: Vec<usize> = observed.iter().map(|v| dense.pos[v]).collect();
    let an: Vec<Vec<bool>> = obs.iter().map(|&o| dense.ancestor_mask([o])).collect();

    let mut out = FiniteMixedGraph::new(dag.names().to_vec());
    for &v in observed {
        out.insert_vertex(v);
    }
    for (a, &u) in obs.iter().enumerate() {
        for (b, &v) in obs.iter().enumerate().skip(a + 1) {
            if !inducing(&dense, u, v, &latent) {
                continue;
            }
            let (vu, vv) = (dense.verts[u], dense.verts[v]);
            if an[b][u] {
                out.insert_directed(vu, vv);
            } else if an[a][v] {
                out.insert_directed(vv, vu);
            } else {
                out.insert_bidirected(vu, vv);
            }
        }
    }
    Ok(out)
}

/// At most one edge per pair, acyclic, and no `u <-> v` with `u` an ancestor
/// of `v`.
pub fn is_ancestral(g: &FiniteMixedGraph) -> bool {
    if !g.is_acyclic() {
        return false;
    }
    for &(u, v) in g.directed() {
        if g.has_directed(v, u) || g.has_bidirected(u, v) {
            return false;
        }
    }
    let dense = Dense::new(g);
    g.bidirected().iter().all(|(u, v)| {
        let (a, b) = (dense.pos[u], dense.pos[v]);
        let an_a = dense.ancestor_mask([a]);
        let an_b = dense.ancestor_mask([b]);
        !an_a[b] && !an_b[a]
    })
}

/// No inducing path (with no latents) between non-adjacent vertices.
pub fn is_maximal(g: &FiniteMixedGraph) -> bool {
    let dense = Dense::new(g);
    let none = vec![false; dense.len()];
    let n = dense.len();
    for a in 0..n {
        for b in a + 1..n {
            let (u, v) = (dense.verts[a], dense.verts[b]);
            if !g.adjacent(u, v) && inducing(&dense, a, b, &none) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: usize) -> Vertex {
        Vertex::new(i, 0)
    }

    fn set(vs: &[usize]) -> BTreeSet<Vertex> {
        vs.iter().map(|&i| v(i)).collect()
    }

    #[test]
    fn ancestors_reflexive() {
        let mut g = FiniteMixedGraph::with_vertices(&["a", "b"]);
        g.add_directed(v(0), v(1)).unwrap();
        assert_eq!(ancestors(&g, &set(&[1])).unwrap(), set(&[0, 1]));
        assert_eq!(ancestors(&g, &set(&[0])).unwrap(), set(&[0]));
        assert!(ancestors(&g, &set(&[5])).is_err());
    }

    #[test]
    fn project_common_latent_cause() {
        let mut g = FiniteMixedGraph::with_vertices(&["i", "j", "l"]);
        g.add_directed(v(2), v(0)).unwrap();
        g.add_directed(v(2), v(1)).unwrap();
        let p = admg_latent_project(&g, &set(&[0, 1])).unwrap();
        assert!(p.has_bidirected(v(0), v(1)));
        assert!(p.directed().is_empty());
        assert_eq!(admg_latent_project(&g, g.vertices()).unwrap(), g);
    }

    #[test]
    fn project_chain_and_subset_violation() {
        let mut g = FiniteMixedGraph::with_vertices(&["a", "b", "c"]);
        g.add_directed(v(0), v(1)).unwrap();
        g.add_directed(v(1), v(2)).unwrap();
        let p = admg_latent_project(&g, &set(&[0, 2])).unwrap();
        assert!(p.has_directed(v(0), v(2)));
        assert!(p.bidirected().is_empty());
        assert!(admg_latent_project(&g, &set(&[7])).is_err());
    }

    #[test]
    fn project_through_bidirected() {
        // i <- l1 <-> l2 -> j
        let mut g = FiniteMixedGraph::with_vertices(&["i", "j", "l1", "l2"]);
        g.add_directed(v(2), v(0)).unwrap();
        g.add_directed(v(3), v(1)).unwrap();
        g.add_bidirected(v(2), v(3)).unwrap();
        let p = admg_latent_project(&g, &set(&[0, 1])).unwrap();
        assert!(p.has_bidirected(v(0), v(1)));
    }

    #[test]
    fn canonical_dag_adds_latents() {
        let mut g = FiniteMixedGraph::with_vertices(&["i", "j"]);
        g.add_directed(v(0), v(1)).unwrap();
        g.add_bidirected(v(0), v(1)).unwrap();
        let c = canonical_dag(&g);
        assert!(c.bidirected().is_empty());
        assert_eq!(c.latent().len(), 1);
        let l = *c.latent().iter().next().unwrap();
        assert!(c.has_directed(l, v(0)) && c.has_directed(l, v(1)) && c.has_directed(v(0), v(1)));
        let mut dag = FiniteMixedGraph::with_vertices(&["i", "j"]);
        dag.add_directed(v(0), v(1)).unwrap();
        assert_eq!(canonical_dag(&dag), dag);
    }

    #[test]
    fn msep_chain_and_collider() {
        let mut chain = FiniteMixedGraph::with_vertices(&["i", "k", "j"]);
        chain.add_directed(v(0), v(1)).unwrap();
        chain.add_directed(v(1), v(2)).unwrap();
        assert!(m_separated(&chain, &set(&[0]), &set(&[2]), &set(&[1])).unwrap());
        assert!(!m_separated(&chain, &set(&[0]), &set(&[2]), &set(&[])).unwrap());

        let mut col = FiniteMixedGraph::with_vertices(&["i", "k", "j"]);
        col.add_directed(v(0), v(1)).unwrap();
        col.add_directed(v(2), v(1)).unwrap();
        assert!(m_separated(&col, &set(&[0]), &set(&[2]), &set(&[])).unwrap());
        assert!(!m_separated(&col, &set(&[0]), &set(&[2]), &set(&[1])).unwrap());
        assert!(matches!(m_separated(&col, &set(&[0]), &set(&[0]), &set(&[])), Err(Error::Overlap(_))));
    }

    #[test]
    fn msep_collider_descendant_opens() {
        let mut g = FiniteMixedGraph::with_vertices(&["i", "k", "j", "d"]);
        g.add_directed(v(0), v(1)).unwrap();
        g.add_bidirected(v(2), v(1)).unwrap();
        g.add_directed(v(1), v(3)).unwrap();
        assert!(m_separated(&g, &set(&[0]), &set(&[2]), &set(&[])).unwrap());
        assert!(!m_separated(&g, &set(&[0]), &set(&[2]), &set(&[3])).unwrap());
    }

    #[test]
    fn inducing_paths() {
        let mut g = FiniteMixedGraph::with_vertices(&["i", "k", "j"]);
        g.add_bidirected(v(0), v(1)).unwrap();
        g.add_bidirected(v(1), v(2)).unwrap();
        g.add_directed(v(1), v(0)).unwrap();
        assert!(has_inducing_path(&g, v(0), v(2), &set(&[1])).unwrap());

        let mut chain = FiniteMixedGraph::with_vertices(&["i", "k", "j"]);
        chain.add_directed(v(0), v(1)).unwrap();
        chain.add_directed(v(1), v(2)).unwrap();
        assert!(!has_inducing_path(&chain, v(0), v(2), &set(&[])).unwrap());
        assert!(has_inducing_path(&chain, v(0), v(1), &set(&[])).unwrap());
        assert!(has_inducing_path(&chain, v(0), v(0), &set(&[])).is_err());
    }

    #[test]
    fn dmag_examples() {
        let mut fork = FiniteMixedGraph::with_vertices(&["i", "j", "l"]);
        fork.add_directed(v(2), v(0)).unwrap();
        fork.add_directed(v(2), v(1)).unwrap();
        let d = dmag_project(&fork, &set(&[0, 1])).unwrap();
        assert!(d.has_bidirected(v(0), v(1)) && d.directed().is_empty());

        let mut chain = FiniteMixedGraph::with_vertices(&["i", "j", "l"]);
        chain.add_directed(v(0), v(2)).unwrap();
        chain.add_directed(v(2), v(1)).unwrap();
        let d = dmag_project(&chain, &set(&[0, 1])).unwrap();
        assert!(d.has_directed(v(0), v(1)) && d.bidirected().is_empty());

        let mut single = FiniteMixedGraph::with_vertices(&["i", "j"]);
        single.add_directed(v(0), v(1)).unwrap();
        assert_eq!(dmag_project(&single, &set(&[0, 1])).unwrap(), single);
        assert!(is_ancestral(&single) && is_maximal(&single));
    }

    #[test]
    fn ancestrality_and_maximality_checks() {
        let mut g = FiniteMixedGraph::with_vertices(&["a", "b"]);
        g.add_directed(v(0), v(1)).unwrap();
        g.add_bidirected(v(0), v(1)).unwrap();
        assert!(!is_ancestral(&g));
        // a <-> b <-> c with b -> a: collider b is an ancestor of a
        let mut m = FiniteMixedGraph::with_vertices(&["a", "b", "c"]);
        m.add_directed(v(1), v(0)).unwrap();
        m.add_bidirected(v(1), v(2)).unwrap();
        m.add_bidirected(v(0), v(2)).unwrap();
        assert!(is_maximal(&m));
        let mut nm = FiniteMixedGraph::with_vertices(&["a", "b", "c", "d"]);
        nm.add_bidirected(v(0), v(1)).unwrap();
        nm.add_bidirected(v(1), v(2)).unwrap();
        nm.add_directed(v(1), v(3)).unwrap();
        nm.add_directed(v(3), v(0)).unwrap();
        assert!(!is_maximal(&nm));
    }
}
