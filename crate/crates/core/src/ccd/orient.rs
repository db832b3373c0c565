//! Directed edge rays for swept-volume queries: every mesh edge gets a direction such
//! that each connected mesh component forms a strongly connected graph, so any vertex
//! outside a swept volume has a directed ray path to any vertex inside it.

use std::collections::VecDeque;

use crate::mesh::TriangleMesh;

#[derive(Debug, Clone, PartialEq)]
pub struct DirectedEdgeSet {
    /// Directed `(from, to)` vertex pairs; duplicated edges appear once per direction.
    pub edges: Vec<[u32; 2]>,
    /// Per undirected mesh edge (mesh edge order): traced in both directions.
    pub duplicated: Vec<bool>,
}

impl DirectedEdgeSet {
    pub fn duplicated_count(&self) -> usize {
        self.duplicated.iter().filter(|&&d| d).count()
    }

    /// Fraction of undirected edges traced in both directions.
    pub fn duplication_ratio(&self) -> f64 {
        if self.duplicated.is_empty() {
            0.0
        } else {
            self.duplicated_count() as f64 / self.duplicated.len() as f64
        }
    }
}

/// Direction of an undirected edge relative to its stored `(v0, v1)` order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dir {
    Unset,
    Forward,
    Backward,
}

/// Greedy orientation by breadth-first region growing, then a repair pass that
/// traces a spanning set of inter-component edges both ways.
pub fn orient_edges(mesh: &TriangleMesh) -> DirectedEdgeSet {
    let edges = mesh.edges();
    let tris = mesh.triangles();
    let nv = mesh.vertices().len();

    // triangle -> its three edge indices, in winding order (k: t[k] -> t[k+1])
    let mut edge_index = std::collections::HashMap::with_capacity(edges.len());
    for (i, e) in edges.iter().enumerate() {
        edge_index.insert((e.v[0], e.v[1]), i);
    }
    let tri_edges: Vec<[usize; 3]> = tris
        .iter()
        .map(|t| {
            [0, 1, 2].map(|k| {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                edge_index[&(a.min(b), a.max(b))]
            })
        })
        .collect();

    let mut dir = vec![Dir::Unset; edges.len()];
    let mut visited = vec![false; tris.len()];
    let mut queue = VecDeque::new();
    // For the triangle's winding cycle, the direction each edge would get.
    let winding_dir = |t: usize, k: usize| {
        let a = tris[t][k];
        if a == edges[tri_edges[t][k]].v[0] {
            Dir::Forward
        } else {
            Dir::Backward
        }
    };
    let flip = |d: Dir| match d {
        Dir::Forward => Dir::Backward,
        Dir::Backward => Dir::Forward,
        Dir::Unset => Dir::Unset,
    };

    for seed in 0..tris.len() {
        if visited[seed] {
            continue;
        }
        visited[seed] = true;
        queue.push_back((seed, None::<usize>));
        while let Some((t, via_edge)) = queue.pop_front() {
            let mut agree_fwd = 0;
            let mut agree_rev = 0;
            for k in 0..3 {
                let d = dir[tri_edges[t][k]];
                if d == Dir::Unset {
                    continue;
                }
                if d == winding_dir(t, k) {
                    agree_fwd += 1;
                } else {
                    agree_rev += 1;
                }
            }
            let reverse = match agree_fwd.cmp(&agree_rev) {
                std::cmp::Ordering::Greater => false,
                std::cmp::Ordering::Less => true,
                std::cmp::Ordering::Equal => match via_edge {
                    Some(e) => {
                        let k = (0..3).find(|&k| tri_edges[t][k] == e).expect("shared edge");
                        dir[e] != winding_dir(t, k)
                    }
                    None => false,
                },
            };
            for k in 0..3 {
                let e = tri_edges[t][k];
                if dir[e] == Dir::Unset {
                    let w = winding_dir(t, k);
                    dir[e] = if reverse { flip(w) } else { w };
                }
            }
            for k in 0..3 {
                let e = tri_edges[t][k];
                let other = edges[e].tris.iter().copied().find(|&o| o as usize != t);
                if let Some(o) = other {
                    let o = o as usize;
                    if !visited[o] {
                        visited[o] = true;
                        queue.push_back((o, Some(e)));
                    }
                }
            }
        }
    }

    let directed = |e: usize| {
        let [a, b] = edges[e].v;
        if dir[e] == Dir::Backward {
            [b, a]
        } else {
            [a, b]
        }
    };
    let mut out: Vec<[u32; 2]> = (0..edges.len()).map(directed).collect();
    let mut duplicated = vec![false; edges.len()];

    // repair: make inter-SCC spanning-tree edges bidirectional
    let scc = strongly_connected_components(nv, &out);
    let mut uf = UnionFind::new(scc.count);
    for (e, d) in out.clone().iter().enumerate() {
        let (ca, cb) = (scc.component[d[0] as usize], scc.component[d[1] as usize]);
        if ca != cb && uf.union(ca, cb) {
            duplicated[e] = true;
            out.push([d[1], d[0]]);
        }
    }
    DirectedEdgeSet { edges: out, duplicated }
}

/// Strongly connected component labels for a directed graph on `n` vertices.
#[derive(Debug, Clone)]
pub struct Scc {
    pub component: Vec<usize>,
    pub count: usize,
}

/// Iterative Tarjan.
pub fn strongly_connected_components(n: usize, edges: &[[u32; 2]]) -> Scc {
    let mut start = vec![0usize; n + 1];
    for e in edges {
        start[e[0] as usize + 1] += 1;
    }
    for i in 0..n {
        start[i + 1] += start[i];
    }
    let mut adj = vec![0u32; edges.len()];
    let mut fill = start.clone();
    for e in edges {
        adj[fill[e[0] as usize]] = e[1];
        fill[e[0] as usize] += 1;
    }

    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut component = vec![UNSEEN; n];
    let mut count = 0;
    let mut next = 0;
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, start[root]));
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < start[v + 1] {
                let w = adj[*pos] as usize;
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, start[w]));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        component[w] = count;
                        if w == v {
                            break;
                        }
                    }
                    count += 1;
                }
            }
        }
    }
    Scc { component, count }
}

/// True when every connected component of the mesh is one SCC of `set`.
pub fn is_strongly_connected(mesh: &TriangleMesh, set: &DirectedEdgeSet) -> bool {
    let nv = mesh.vertices().len();
    let covered = {
        let mut c = vec![false; mesh.edges().len()];
        let mut lookup = std::collections::HashMap::new();
        for (i, e) in mesh.edges().iter().enumerate() {
            lookup.insert((e.v[0], e.v[1]), i);
        }
        for d in &set.edges {
            match lookup.get(&(d[0].min(d[1]), d[0].max(d[1]))) {
                Some(&i) => c[i] = true,
                None => return false,
            }
        }
        c
    };
    if !covered.iter().all(|&c| c) {
        return false;
    }
    let scc = strongly_connected_components(nv, &set.edges);
    let mut uf = UnionFind::new(nv);
    for e in mesh.edges() {
        uf.union(e.v[0] as usize, e.v[1] as usize);
    }
    // vertices used by triangles: same mesh component <=> same SCC
    let mut rep_scc: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    let mut seen_scc: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    for e in mesh.edges() {
        for &v in &e.v {
            let v = v as usize;
            let root = uf.find(v);
            if *rep_scc.entry(root).or_insert(scc.component[v]) != scc.component[v] {
                return false;
            }
            if *seen_scc.entry(scc.component[v]).or_insert(root) != root {
                return false;
            }
        }
    }
    true
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        self.parent[hi] = lo;
        true
    }
}
