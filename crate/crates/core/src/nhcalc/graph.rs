use std::collections::BTreeSet;

use petgraph::graph::{NodeIndex, UnGraph};
use petgraph::unionfind::UnionFind;
use thiserror::Error;

use super::separation::{separation, Verdict};
use crate::atlas::{AdjunctionSystem, AtlasError, MfdPoint};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error(transparent)]
    Atlas(#[from] AtlasError),
    #[error("points {0} and {1} are the same point of the quotient")]
    DuplicateVertex(String, String),
    #[error("separation of {0} and {1} is unknown")]
    UnknownEdge(String, String),
    #[error("vertex index {0} out of range")]
    BadVertex(usize),
}

/// Vertices are points, edges join non-Hausdorff pairs.
#[derive(Clone, Debug)]
pub struct NhGraph<T> {
    pub points: Vec<MfdPoint<T>>,
    pub graph: UnGraph<usize, ()>,
    /// Whether any edge relied on declared data.
    pub tier2: bool,
}

impl<T: Scalar> NhGraph<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut v: Vec<(usize, usize)> = self
            .graph
            .edge_indices()
            .filter_map(|e| self.graph.edge_endpoints(e))
            .map(|(a, b)| (a.index().min(b.index()), a.index().max(b.index())))
            .collect();
        v.sort_unstable();
        v
    }

    pub fn neighbors(&self, v: usize) -> BTreeSet<usize> {
        self.graph.neighbors(NodeIndex::new(v)).map(|n| n.index()).collect()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.graph.contains_edge(NodeIndex::new(a), NodeIndex::new(b))
    }
}

/// Builds the graph on `pts`; the points must be pairwise distinct in the quotient.
pub fn nh_graph<T: Scalar>(s: &AdjunctionSystem<T>, pts: &[MfdPoint<T>]) -> Result<NhGraph<T>, GraphError> {
    let mut graph = UnGraph::new_undirected();
    for i in 0..pts.len() {
        graph.add_node(i);
    }
    let mut tier2 = false;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let r = separation(s, &pts[i], &pts[j])?;
            tier2 |= r.tier2;
            match r.verdict {
                Verdict::Equal => return Err(GraphError::DuplicateVertex(pts[i].to_string(), pts[j].to_string())),
                Verdict::Unknown { .. } => return Err(GraphError::UnknownEdge(pts[i].to_string(), pts[j].to_string())),
                Verdict::NotSeparated(_) => {
                    graph.add_edge(NodeIndex::new(i), NodeIndex::new(j), ());
                }
                Verdict::Separated { .. } => {}
            }
        }
    }
    Ok(NhGraph { points: pts.to_vec(), graph, tier2 })
}

/// Classes of the transitive closure of "equal or non-Hausdorff": the
/// connected components, each sorted, ordered by least member.
pub fn bumpeq_classes<T: Scalar>(g: &NhGraph<T>) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::<usize>::new(g.len());
    for (a, b) in g.edges() {
        uf.union(a, b);
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; g.len()];
    for v in 0..g.len() {
        let r = uf.find(v);
        match root_of[r] {
            Some(k) => classes[k].push(v),
            None => {
                root_of[r] = Some(classes.len());
                classes.push(vec![v]);
            }
        }
    }
    classes
}

/// `NH¹(A) = NH(A)` and `NHⁿ(A) = NH(NHⁿ⁻¹(A))`, restricted to the graph.
pub fn nh_iterate<T: Scalar>(g: &NhGraph<T>, seed: &[usize], n: u32) -> Result<BTreeSet<usize>, GraphError> {
    if let Some(&v) = seed.iter().find(|v| **v >= g.len()) {
        return Err(GraphError::BadVertex(v));
    }
    let mut cur: BTreeSet<usize> = seed.iter().copied().collect();
    for _ in 0..n {
        cur = cur.iter().flat_map(|v| g.neighbors(*v)).collect();
    }
    Ok(cur)
}

/// Non-Hausdorff points of a product at `(v_1, …, v_k)`: tuples drawn from
/// `NH(v_α) ∪ {v_α}` in each factor, other than the point itself.
pub fn product_nh<T: Scalar>(factors: &[(&NhGraph<T>, usize)]) -> Result<Vec<Vec<usize>>, GraphError> {
    let mut choices: Vec<Vec<usize>> = Vec::new();
    for (g, v) in factors {
        if *v >= g.len() {
            return Err(GraphError::BadVertex(*v));
        }
        let mut c: Vec<usize> = g.neighbors(*v).into_iter().collect();
        c.push(*v);
        c.sort_unstable();
        choices.push(c);
    }
    let base: Vec<usize> = factors.iter().map(|(_, v)| *v).collect();
    let mut out: Vec<Vec<usize>> = vec![vec![]];
    for c in &choices {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                c.iter().map(move |x| {
                    let mut p = prefix.clone();
                    p.push(*x);
                    p
                })
            })
            .collect();
    }
    out.retain(|t| *t != base);
    Ok(out)
}
