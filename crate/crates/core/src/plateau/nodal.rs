use super::mesh::SurfaceMesh;
use crate::ambient::PointM;
use crate::polygon::ArcTag;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Where a nodal polyline ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodalEnd {
    Arc(ArcTag),
    /// The chain stops inside the mesh (only with a degenerate zero set).
    Open,
    /// Closed loop.
    Closed,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NodalCurve {
    pub points: Vec<PointM>,
    pub ends: [NodalEnd; 2],
}

impl NodalCurve {
    pub fn touches(&self, arc: ArcTag) -> bool {
        self.ends.contains(&NodalEnd::Arc(arc))
    }
}

type EdgeKey = (usize, usize);

fn key(a: usize, b: usize) -> EdgeKey {
    (a.min(b), a.max(b))
}

/// Zero set of ν as polylines through edge crossings. ν vanishes identically along ṽ, so edges
/// touching ṽ are ignored and a curve reaching them ends on ṽ.
pub fn nodal_set(mesh: &SurfaceMesh) -> Vec<NodalCurve> {
    let nu = &mesh.nu;
    let on_v = |v: usize| mesh.tags[v].on(ArcTag::V);
    let crosses = |a: usize, b: usize| !on_v(a) && !on_v(b) && ((nu[a] > 0.0) != (nu[b] > 0.0));

    let mut edge_tris: HashMap<EdgeKey, Vec<usize>> = HashMap::new();
    for (k, t) in mesh.triangles.iter().enumerate() {
        for i in 0..3 {
            edge_tris.entry(key(t[i], t[(i + 1) % 3])).or_default().push(k);
        }
    }

    // graph nodes: crossing edges, plus one terminal per triangle reaching ṽ
    #[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
    enum Node {
        Edge(EdgeKey),
        VEnd(usize),
    }
    let mut adj: HashMap<Node, Vec<Node>> = HashMap::new();
    let link = |a: Node, b: Node, adj: &mut HashMap<Node, Vec<Node>>| {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    };
    for (k, t) in mesh.triangles.iter().enumerate() {
        let cross: Vec<EdgeKey> = (0..3)
            .map(|i| (t[i], t[(i + 1) % 3]))
            .filter(|&(a, b)| crosses(a, b))
            .map(|(a, b)| key(a, b))
            .collect();
        match cross.len() {
            2 => link(Node::Edge(cross[0]), Node::Edge(cross[1]), &mut adj),
            1 if t.iter().any(|&v| on_v(v)) => link(Node::Edge(cross[0]), Node::VEnd(k), &mut adj),
            _ => {}
        }
    }

    let point = |n: Node| -> PointM {
        match n {
            Node::Edge((a, b)) => {
                let s = nu[a] / (nu[a] - nu[b]);
                mesh.vertices[a] + (mesh.vertices[b] - mesh.vertices[a]) * s
            }
            Node::VEnd(k) => {
                let t = mesh.triangles[k];
                let vs: Vec<usize> = t.iter().copied().filter(|&v| on_v(v)).collect();
                vs.iter().map(|&v| mesh.vertices[v]).sum::<PointM>() / vs.len() as f64
            }
        }
    };
    let end_tag = |n: Node| -> NodalEnd {
        match n {
            Node::VEnd(_) => NodalEnd::Arc(ArcTag::V),
            Node::Edge((a, b)) => {
                if edge_tris.get(&(a, b)).map_or(0, |v| v.len()) == 1 {
                    let shared = mesh.tags[a].0 & mesh.tags[b].0;
                    ArcTag::ALL
                        .into_iter()
                        .find(|t| shared & (1 << *t as u8) != 0)
                        .map_or(NodalEnd::Open, NodalEnd::Arc)
                } else {
                    NodalEnd::Open
                }
            }
        }
    };

    let mut nodes: Vec<Node> = adj.keys().copied().collect();
    nodes.sort_by_key(|n| match n {
        Node::Edge(e) => (0, e.0, e.1),
        Node::VEnd(k) => (1, *k, 0),
    });
    let mut seen: HashMap<Node, bool> = HashMap::new();
    let mut curves = Vec::new();
    // open chains first, starting from degree-1 nodes
    for pass in 0..2 {
        for &start in &nodes {
            if seen.contains_key(&start) || (pass == 0 && adj[&start].len() != 1) {
                continue;
            }
            let mut chain = vec![start];
            seen.insert(start, true);
            let mut cur = start;
            loop {
                let next = adj[&cur].iter().copied().find(|n| !seen.contains_key(n));
                match next {
                    Some(n) => {
                        seen.insert(n, true);
                        chain.push(n);
                        cur = n;
                    }
                    None => break,
                }
            }
            let closed = pass == 1 && chain.len() > 2 && adj[&cur].contains(&start);
            let ends = if closed {
                [NodalEnd::Closed, NodalEnd::Closed]
            } else {
                [end_tag(chain[0]), end_tag(*chain.last().expect("non-empty chain"))]
            };
            curves.push(NodalCurve { points: chain.into_iter().map(point).collect(), ends });
        }
    }
    curves
}
