//! Embedded planar graphs given by rotation systems.
//!
//! Rotations are stored counterclockwise. A dart is a directed edge side; the
//! face of a dart is the face on its left. Bounded faces are therefore traced
//! counterclockwise and the outer face clockwise.

use std::collections::HashSet;
use thiserror::Error;

pub type VertexId = u32;
pub type EdgeId = u32;
pub type FaceId = u32;

/// Directed edge: `2 * edge + dir`, where dir 0 runs from the first endpoint
/// to the second.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dart(pub u32);

impl Dart {
    pub fn new(e: EdgeId, reversed: bool) -> Self {
        Dart(2 * e + reversed as u32)
    }
    pub fn edge(self) -> EdgeId {
        self.0 >> 1
    }
    pub fn twin(self) -> Dart {
        Dart(self.0 ^ 1)
    }
    fn idx(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge {edge} references vertex {vertex} out of range (n = {n})")]
    VertexOutOfRange { edge: EdgeId, vertex: VertexId, n: usize },
    #[error("edge {0} is a self-loop")]
    SelfLoop(EdgeId),
    #[error("rotation of vertex {vertex} lists edge {edge} which is not incident to it")]
    ForeignEdge { vertex: VertexId, edge: EdgeId },
    #[error("rotation of vertex {vertex} lists edge {edge} more than once")]
    RepeatedEdge { vertex: VertexId, edge: EdgeId },
    #[error("edge {edge} is missing from the rotation of vertex {vertex}")]
    MissingEdge { vertex: VertexId, edge: EdgeId },
    #[error("rotation list has {got} entries but the graph has {n} vertices")]
    RotationCount { got: usize, n: usize },
    #[error("edge {0} out of range")]
    EdgeOutOfRange(EdgeId),
    #[error("face set was traced from generation {traced}, graph is at generation {current}")]
    StaleFaces { traced: u64, current: u64 },
    #[error("no face matches the given boundary cycle")]
    UnknownFace,
    #[error("dart {0:?} does not close a face cycle")]
    OpenFace(Dart),
}

/// Plane graph given by a counterclockwise rotation system.
#[derive(Clone, Debug)]
pub struct PlaneGraph {
    edges: Vec<[VertexId; 2]>,
    rot: Vec<Vec<EdgeId>>,
    /// Position of each dart within the rotation of its tail.
    pos: Vec<u32>,
    outer: Option<Dart>,
    generation: u64,
}

impl PlaneGraph {
    /// Builds a plane graph and checks rotation consistency.
    pub fn new(n: usize, edges: Vec<(VertexId, VertexId)>, rotation: Vec<Vec<EdgeId>>) -> Result<Self, GraphError> {
        if rotation.len() != n {
            return Err(GraphError::RotationCount { got: rotation.len(), n });
        }
        let edges: Vec<[VertexId; 2]> = edges.into_iter().map(|(a, b)| [a, b]).collect();
        for (i, e) in edges.iter().enumerate() {
            for &v in e {
                if v as usize >= n {
                    return Err(GraphError::VertexOutOfRange { edge: i as EdgeId, vertex: v, n });
                }
            }
            if e[0] == e[1] {
                return Err(GraphError::SelfLoop(i as EdgeId));
            }
        }
        let mut pos = vec![u32::MAX; 2 * edges.len()];
        for (v, list) in rotation.iter().enumerate() {
            for (i, &e) in list.iter().enumerate() {
                let Some(ends) = edges.get(e as usize) else {
                    return Err(GraphError::EdgeOutOfRange(e));
                };
                let d = if ends[0] as usize == v {
                    Dart::new(e, false)
                } else if ends[1] as usize == v {
                    Dart::new(e, true)
                } else {
                    return Err(GraphError::ForeignEdge { vertex: v as VertexId, edge: e });
                };
                if pos[d.idx()] != u32::MAX {
                    return Err(GraphError::RepeatedEdge { vertex: v as VertexId, edge: e });
                }
                pos[d.idx()] = i as u32;
            }
        }
        for (i, p) in pos.iter().enumerate() {
            if *p == u32::MAX {
                let e = (i / 2) as EdgeId;
                let vertex = edges[e as usize][i % 2];
                return Err(GraphError::MissingEdge { vertex, edge: e });
            }
        }
        Ok(PlaneGraph { edges, rot: rotation, pos, outer: None, generation: 0 })
    }

    /// Builds a simple plane graph from counterclockwise neighbour lists.
    pub fn from_neighbor_rotation(rot: &[Vec<VertexId>]) -> Result<Self, GraphError> {
        let n = rot.len();
        let mut edges = Vec::new();
        let mut index = std::collections::HashMap::new();
        let mut rotation = vec![Vec::new(); n];
        for (v, list) in rot.iter().enumerate() {
            for &w in list {
                if w as usize >= n {
                    return Err(GraphError::VertexOutOfRange { edge: edges.len() as EdgeId, vertex: w, n });
                }
                let key = (v.min(w as usize), v.max(w as usize));
                let e = *index.entry(key).or_insert_with(|| {
                    edges.push((v as VertexId, w));
                    (edges.len() - 1) as EdgeId
                });
                rotation[v].push(e);
            }
        }
        Self::new(n, edges, rotation)
    }

    pub fn n(&self) -> usize {
        self.rot.len()
    }
    pub fn m(&self) -> usize {
        self.edges.len()
    }
    pub fn generation(&self) -> u64 {
        self.generation
    }
    pub fn endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        let [a, b] = self.edges[e as usize];
        (a, b)
    }
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.edges.iter().map(|e| (e[0], e[1]))
    }
    pub fn rotation(&self, v: VertexId) -> &[EdgeId] {
        &self.rot[v as usize]
    }
    pub fn degree(&self, v: VertexId) -> usize {
        self.rot[v as usize].len()
    }
    pub fn tail(&self, d: Dart) -> VertexId {
        self.edges[d.edge() as usize][(d.0 & 1) as usize]
    }
    pub fn head(&self, d: Dart) -> VertexId {
        self.edges[d.edge() as usize][1 - (d.0 & 1) as usize]
    }
    /// Dart leaving `v` along the edge at rotation index `i`.
    pub fn dart_at(&self, v: VertexId, i: usize) -> Dart {
        let e = self.rot[v as usize][i];
        Dart::new(e, self.edges[e as usize][0] != v)
    }
    /// Darts leaving `v` in counterclockwise order.
    pub fn out_darts(&self, v: VertexId) -> impl Iterator<Item = Dart> + '_ {
        (0..self.degree(v)).map(move |i| self.dart_at(v, i))
    }
    /// Next dart counterclockwise around the tail of `d`.
    pub fn rot_next(&self, d: Dart) -> Dart {
        let v = self.tail(d);
        let deg = self.degree(v);
        self.dart_at(v, (self.pos[d.idx()] as usize + 1) % deg)
    }
    /// Next dart clockwise around the tail of `d`.
    pub fn rot_prev(&self, d: Dart) -> Dart {
        let v = self.tail(d);
        let deg = self.degree(v);
        self.dart_at(v, (self.pos[d.idx()] as usize + deg - 1) % deg)
    }
    /// Successor of `d` along the face on its left.
    pub fn face_next(&self, d: Dart) -> Dart {
        self.rot_prev(d.twin())
    }
    /// Dart from `u` to `v`, if the edge exists.
    pub fn find_dart(&self, u: VertexId, v: VertexId) -> Option<Dart> {
        self.out_darts(u).find(|&d| self.head(d) == v)
    }

    /// Dart whose left face is the outer face.
    pub fn outer(&self) -> Option<Dart> {
        self.outer
    }
    pub fn set_outer(&mut self, d: Dart) {
        self.outer = Some(d);
        self.generation += 1;
    }

    /// Mirror image: every rotation reversed. Faces keep their vertex sets
    /// but their boundaries run the other way; the outer dart is flipped so
    /// that the same face stays outer.
    pub fn mirror(&self) -> PlaneGraph {
        let rot: Vec<Vec<EdgeId>> = self.rot.iter().map(|r| r.iter().rev().copied().collect()).collect();
        let edges = self.edges.iter().map(|e| (e[0], e[1])).collect();
        let mut g = PlaneGraph::new(self.n(), edges, rot).expect("mirror keeps consistency");
        g.outer = self.outer.map(|d| d.twin());
        g
    }

    /// Traces every face. Fails only if the rotation system is corrupt.
    pub fn trace_faces(&self) -> Result<FaceSet, GraphError> {
        let nd = 2 * self.m();
        let mut face_of = vec![u32::MAX; nd];
        let mut faces = Vec::new();
        for start in 0..nd {
            if face_of[start] != u32::MAX {
                continue;
            }
            let fid = faces.len() as FaceId;
            let mut darts = Vec::new();
            let mut d = Dart(start as u32);
            loop {
                if face_of[d.idx()] != u32::MAX {
                    return Err(GraphError::OpenFace(Dart(start as u32)));
                }
                face_of[d.idx()] = fid;
                darts.push(d);
                d = self.face_next(d);
                if d.0 as usize == start {
                    break;
                }
                if darts.len() > nd {
                    return Err(GraphError::OpenFace(Dart(start as u32)));
                }
            }
            faces.push(Face { darts });
        }
        let outer = self.outer.map(|d| face_of[d.idx()]);
        Ok(FaceSet { faces, face_of, outer, generation: self.generation })
    }

    /// True when no two edges join the same pair of vertices.
    pub fn is_simple(&self) -> bool {
        let mut seen = HashSet::with_capacity(self.m());
        self.edges.iter().all(|e| seen.insert((e[0].min(e[1]), e[0].max(e[1]))))
    }

    /// Connected components as lists of vertices.
    pub fn connected_components(&self) -> Vec<Vec<VertexId>> {
        let n = self.n();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut list = vec![s as VertexId];
            comp[s] = id;
            let mut i = 0;
            while i < list.len() {
                let v = list[i];
                i += 1;
                for d in self.out_darts(v) {
                    let w = self.head(d) as usize;
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        list.push(w as VertexId);
                    }
                }
            }
            out.push(list);
        }
        out
    }

    /// Cut vertices, found with an iterative Hopcroft–Tarjan search.
    pub fn cut_vertices(&self) -> Vec<VertexId> {
        let n = self.n();
        let mut disc = vec![u32::MAX; n];
        let mut low = vec![0u32; n];
        let mut is_cut = vec![false; n];
        let mut timer = 0u32;
        for root in 0..n {
            if disc[root] != u32::MAX {
                continue;
            }
            disc[root] = timer;
            low[root] = timer;
            timer += 1;
            let mut root_children = 0;
            // (vertex, parent edge, next rotation index)
            let mut stack: Vec<(usize, u32, usize)> = vec![(root, u32::MAX, 0)];
            while let Some(&mut (v, pe, ref mut i)) = stack.last_mut() {
                if *i < self.rot[v].len() {
                    let e = self.rot[v][*i];
                    *i += 1;
                    if e == pe {
                        continue;
                    }
                    let [a, b] = self.edges[e as usize];
                    let w = if a as usize == v { b } else { a } as usize;
                    if disc[w] == u32::MAX {
                        disc[w] = timer;
                        low[w] = timer;
                        timer += 1;
                        if v == root {
                            root_children += 1;
                        }
                        stack.push((w, e, 0));
                    } else {
                        low[v] = low[v].min(disc[w]);
                    }
                } else {
                    stack.pop();
                    if let Some(&(p, _, _)) = stack.last() {
                        low[p] = low[p].min(low[v]);
                        if p != root && low[v] >= disc[p] {
                            is_cut[p] = true;
                        }
                    }
                }
            }
            if root_children > 1 {
                is_cut[root] = true;
            }
        }
        (0..n as VertexId).filter(|&v| is_cut[v as usize]).collect()
    }

    /// Connected, at least three vertices, no cut vertex. A single edge
    /// counts as biconnected too.
    pub fn is_biconnected(&self) -> bool {
        let n = self.n();
        if n < 2 {
            return false;
        }
        if self.connected_components().len() != 1 {
            return false;
        }
        n == 2 || self.cut_vertices().is_empty()
    }

    /// Subgraph on the edges accepted by `keep_edge`, with inherited
    /// rotations. Vertices not touched by a kept edge are dropped unless
    /// `keep_vertex` accepts them. Returns the graph and the local→parent
    /// vertex and edge maps.
    pub fn subgraph(
        &self,
        keep_vertex: impl Fn(VertexId) -> bool,
        keep_edge: impl Fn(EdgeId) -> bool,
    ) -> (PlaneGraph, Vec<VertexId>, Vec<EdgeId>) {
        let mut vmap = Vec::new();
        let mut local = vec![u32::MAX; self.n()];
        let mut emap = Vec::new();
        let mut elocal = vec![u32::MAX; self.m()];
        for e in 0..self.m() as EdgeId {
            if keep_edge(e) {
                elocal[e as usize] = emap.len() as u32;
                emap.push(e);
            }
        }
        for v in 0..self.n() as VertexId {
            let touched = self.rot[v as usize].iter().any(|&e| elocal[e as usize] != u32::MAX);
            if touched || keep_vertex(v) {
                local[v as usize] = vmap.len() as u32;
                vmap.push(v);
            }
        }
        let edges = emap
            .iter()
            .map(|&e| {
                let [a, b] = self.edges[e as usize];
                (local[a as usize], local[b as usize])
            })
            .collect();
        let rot = vmap
            .iter()
            .map(|&v| {
                self.rot[v as usize]
                    .iter()
                    .filter(|&&e| elocal[e as usize] != u32::MAX)
                    .map(|&e| elocal[e as usize])
                    .collect()
            })
            .collect();
        let mut g = PlaneGraph::new(vmap.len(), edges, rot).expect("subgraph of a consistent graph");
        if let Some(d) = self.outer {
            let le = elocal[d.edge() as usize];
            if le != u32::MAX {
                g.outer = Some(Dart::new(le, d.0 & 1 == 1));
            }
        }
        (g, vmap, emap)
    }
}

/// One face: the cyclic list of darts that have it on their left.
#[derive(Clone, Debug)]
pub struct Face {
    pub darts: Vec<Dart>,
}

impl Face {
    pub fn degree(&self) -> usize {
        self.darts.len()
    }
}

/// All faces of a plane graph.
#[derive(Clone, Debug)]
pub struct FaceSet {
    pub faces: Vec<Face>,
    face_of: Vec<FaceId>,
    outer: Option<FaceId>,
    generation: u64,
}

impl FaceSet {
    pub fn len(&self) -> usize {
        self.faces.len()
    }
    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }
    pub fn face_of(&self, d: Dart) -> FaceId {
        self.face_of[d.0 as usize]
    }
    pub fn outer(&self) -> Option<FaceId> {
        self.outer
    }
    pub fn face(&self, f: FaceId) -> &Face {
        &self.faces[f as usize]
    }
    /// Boundary vertices in trace order.
    pub fn vertices(&self, g: &PlaneGraph, f: FaceId) -> Vec<VertexId> {
        self.faces[f as usize].darts.iter().map(|&d| g.tail(d)).collect()
    }
    /// Errors when `g` was modified after this set was traced.
    pub fn check_fresh(&self, g: &PlaneGraph) -> Result<(), GraphError> {
        if g.generation != self.generation {
            return Err(GraphError::StaleFaces { traced: self.generation, current: g.generation });
        }
        Ok(())
    }
    /// Face whose vertex cycle equals `cycle` read in either direction.
    /// Bounded faces win over the outer face when both match.
    pub fn find_by_cycle(&self, g: &PlaneGraph, cycle: &[VertexId]) -> Option<FaceId> {
        let key = canonical_cycle(cycle);
        let mut hit = None;
        for f in 0..self.len() as FaceId {
            if self.faces[f as usize].degree() != cycle.len() {
                continue;
            }
            if canonical_cycle(&self.vertices(g, f)) == key {
                if Some(f) != self.outer {
                    return Some(f);
                }
                hit = Some(f);
            }
        }
        hit
    }
}

/// Canonical form of a vertex cycle: start at the smallest id and read in the
/// direction whose second element is smaller.
pub fn canonical_cycle(cycle: &[VertexId]) -> Vec<VertexId> {
    let n = cycle.len();
    if n == 0 {
        return Vec::new();
    }
    let (i, _) = cycle.iter().enumerate().min_by_key(|(_, &v)| v).unwrap();
    let fwd: Vec<VertexId> = (0..n).map(|j| cycle[(i + j) % n]).collect();
    let bwd: Vec<VertexId> = (0..n).map(|j| cycle[(i + n - j) % n]).collect();
    if n > 1 && bwd[1] < fwd[1] {
        bwd
    } else {
        fwd
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: u32) -> PlaneGraph {
        let rot: Vec<Vec<u32>> = (0..n).map(|i| vec![(i + 1) % n, (i + n - 1) % n]).collect();
        PlaneGraph::from_neighbor_rotation(&rot).unwrap()
    }

    #[test]
    fn triangle_has_two_faces_of_degree_three() {
        let g = cycle(3);
        let fs = g.trace_faces().unwrap();
        assert_eq!(fs.len(), 2);
        assert!(fs.faces.iter().all(|f| f.degree() == 3));
    }

    #[test]
    fn plane_k4_has_four_triangles() {
        // 0,1,2 counterclockwise triangle with 3 in the middle.
        let rot = vec![vec![1, 3, 2], vec![2, 3, 0], vec![0, 3, 1], vec![0, 1, 2]];
        let g = PlaneGraph::from_neighbor_rotation(&rot).unwrap();
        let fs = g.trace_faces().unwrap();
        assert_eq!(fs.len(), 4);
        assert!(fs.faces.iter().all(|f| f.degree() == 3));
        assert_eq!(g.n() as i64 - g.m() as i64 + fs.len() as i64, 2);
    }

    #[test]
    fn biconnectivity_predicates() {
        assert!(cycle(5).is_biconnected());
        let path = PlaneGraph::from_neighbor_rotation(&[vec![1], vec![0, 2], vec![1]]).unwrap();
        assert!(!path.is_biconnected());
        // Bowtie: triangles 0-1-2 and 2-3-4 sharing vertex 2.
        let bow =
            PlaneGraph::from_neighbor_rotation(&[vec![1, 2], vec![2, 0], vec![0, 1, 3, 4], vec![4, 2], vec![2, 3]])
                .unwrap();
        assert!(!bow.is_biconnected());
        assert_eq!(bow.cut_vertices(), vec![2]);
    }

    #[test]
    fn mirror_reverses_boundaries() {
        let rot = vec![vec![1, 3, 2], vec![2, 3, 0], vec![0, 3, 1], vec![0, 1, 2]];
        let g = PlaneGraph::from_neighbor_rotation(&rot).unwrap();
        let m = g.mirror();
        let a = g.trace_faces().unwrap();
        let b = m.trace_faces().unwrap();
        let mut fa: Vec<Vec<u32>> = (0..a.len() as u32).map(|f| canonical_cycle(&a.vertices(&g, f))).collect();
        let mut fb: Vec<Vec<u32>> = (0..b.len() as u32).map(|f| canonical_cycle(&b.vertices(&m, f))).collect();
        fa.sort();
        fb.sort();
        assert_eq!(fa, fb);
        for f in 0..a.len() as u32 {
            let d = a.face(f).darts[0];
            let mf = b.face_of(d.twin());
            let mut rev = b.vertices(&m, mf);
            rev.reverse();
            let orig = a.vertices(&g, f);
            assert_eq!(canonical_cycle(&rev), canonical_cycle(&orig));
        }
    }

    #[test]
    fn rotation_errors_are_reported() {
        let err = PlaneGraph::new(2, vec![(0, 1)], vec![vec![0], vec![]]).unwrap_err();
        assert_eq!(err, GraphError::MissingEdge { vertex: 1, edge: 0 });
        let err = PlaneGraph::new(2, vec![(0, 0)], vec![vec![0], vec![]]).unwrap_err();
        assert_eq!(err, GraphError::SelfLoop(0));
    }

    #[test]
    fn canonical_cycle_picks_smaller_direction() {
        assert_eq!(canonical_cycle(&[3, 1, 4, 2]), vec![1, 3, 2, 4]);
        assert_eq!(canonical_cycle(&[2, 0, 1]), vec![0, 1, 2]);
    }
}
