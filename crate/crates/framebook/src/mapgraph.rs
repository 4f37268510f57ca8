//! Map graphs. A map witness is a plane bipartite graph on nations and
//! points; its half-square joins two nations whenever they share a point.
//!
//! Nations are vertices `0..nations` of the witness, points the rest.

use crate::graph_core::{FaceId, FaceSet, GraphError, PlaneGraph, VertexId};
use crate::kframed::{CrossingEdge, EdgeOrigin, KFramedDrawing, KFramedError};
use std::collections::{BTreeSet, HashMap, HashSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MapError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("witness has {nations} nations but only {n} vertices")]
    NationCount { nations: usize, n: usize },
    #[error("edge {u}-{v} does not join a nation to a point")]
    NotBipartite { u: VertexId, v: VertexId },
    #[error("point {point} has degree {degree}, allowed range is 2..={k}")]
    PointDegree { point: VertexId, degree: usize, k: usize },
    #[error("witness has parallel edges")]
    NotSimple,
    #[error("witness has no nations")]
    Empty,
    #[error("face {face} does not induce a clique; augment the drawing first")]
    NotAugmented { face: FaceId },
    #[error(transparent)]
    Framed(#[from] KFramedError),
}

#[derive(Clone, Debug)]
pub struct MapWitness {
    graph: PlaneGraph,
    nations: usize,
    k: usize,
}

impl MapWitness {
    pub fn new(graph: PlaneGraph, nations: usize, k: usize) -> Result<Self, MapError> {
        if nations > graph.n() {
            return Err(MapError::NationCount { nations, n: graph.n() });
        }
        if nations == 0 {
            return Err(MapError::Empty);
        }
        for (u, v) in graph.edges() {
            if ((u as usize) < nations) == ((v as usize) < nations) {
                return Err(MapError::NotBipartite { u, v });
            }
        }
        for p in nations..graph.n() {
            let degree = graph.degree(p as VertexId);
            if degree < 2 || degree > k {
                return Err(MapError::PointDegree { point: p as VertexId, degree, k });
            }
        }
        if !graph.is_simple() {
            return Err(MapError::NotSimple);
        }
        Ok(MapWitness { graph, nations, k })
    }
    /// Nations with no points at all.
    pub fn edgeless(nations: usize, k: usize) -> Self {
        let graph = PlaneGraph::new(nations, vec![], vec![Vec::new(); nations]).expect("empty graph");
        MapWitness { graph, nations, k }
    }
    pub fn graph(&self) -> &PlaneGraph {
        &self.graph
    }
    pub fn nations(&self) -> usize {
        self.nations
    }
    pub fn points(&self) -> usize {
        self.graph.n() - self.nations
    }
    pub fn k(&self) -> usize {
        self.k
    }
    fn is_nation(&self, v: VertexId) -> bool {
        (v as usize) < self.nations
    }
    /// Neighbours of `v` in counterclockwise order.
    fn neighbors(&self, v: VertexId) -> Vec<VertexId> {
        self.graph.out_darts(v).map(|d| self.graph.head(d)).collect()
    }
}

/// Nation pairs sharing at least one point, as `(min, max)`.
pub fn half_square(w: &MapWitness) -> BTreeSet<(VertexId, VertexId)> {
    let mut out = BTreeSet::new();
    for p in w.nations..w.graph.n() {
        let ns = w.neighbors(p as VertexId);
        for i in 0..ns.len() {
            for j in i + 1..ns.len() {
                out.insert((ns[i].min(ns[j]), ns[i].max(ns[j])));
            }
        }
    }
    out
}

/// Witness whose nations are the vertices of `g`, with one point on every
/// selected edge and one inside every selected face. Edge points come first,
/// in edge order, then face points in face order.
pub fn witness_from_plane(g: &PlaneGraph, fs: &FaceSet, edge_pt: &[bool], face_pt: &[bool], k: usize) -> MapWitness {
    let nations = g.n();
    let mut id = nations as VertexId;
    let mut epid = vec![u32::MAX; g.m()];
    for (e, &on) in edge_pt.iter().enumerate() {
        if on {
            epid[e] = id;
            id += 1;
        }
    }
    let mut fpid = vec![u32::MAX; fs.len()];
    for (f, &on) in face_pt.iter().enumerate() {
        if on {
            fpid[f] = id;
            id += 1;
        }
    }
    let mut rot: Vec<Vec<VertexId>> = vec![Vec::new(); id as usize];
    // For each dart, how many witness items its tail lists up to and
    // including the dart's own group.
    let mut upto = vec![0usize; 2 * g.m()];
    for v in 0..nations as VertexId {
        for d in g.out_darts(v) {
            let e = d.edge() as usize;
            if edge_pt[e] {
                rot[v as usize].push(epid[e]);
            }
            let f = fs.face_of(d) as usize;
            if face_pt[f] {
                rot[v as usize].push(fpid[f]);
            }
            upto[d.0 as usize] = rot[v as usize].len();
        }
    }
    for e in 0..g.m() {
        if edge_pt[e] {
            let (a, b) = g.endpoints(e as u32);
            rot[epid[e] as usize] = vec![a, b];
        }
    }
    for f in 0..fs.len() {
        if face_pt[f] {
            rot[fpid[f] as usize] = fs.vertices(g, f as FaceId);
        }
    }
    let mut graph = PlaneGraph::from_neighbor_rotation(&rot).expect("witness rotation");
    // Outer face: the witness face covering the skeleton's outer wedge.
    let mut anchor = None;
    if let (Some(_), Some(of)) = (g.outer(), fs.outer()) {
        for &d in &fs.face(of).darts {
            let a = g.tail(d);
            let items = &rot[a as usize];
            if items.is_empty() {
                continue;
            }
            let i = (upto[d.0 as usize] + items.len() - 1) % items.len();
            anchor = Some((a, items[i]));
            break;
        }
    }
    let dart = anchor.and_then(|(a, b)| graph.find_dart(a, b));
    if let Some(d) = dart.or_else(|| (graph.m() > 0).then(|| crate::graph_core::Dart::new(0, false))) {
        graph.set_outer(d);
    }
    MapWitness { graph, nations, k }
}

/// k'-framed drawing, k' = 2k, containing the half-square of `w` on the
/// nation vertices `0..nations`. Extra vertices are dummies.
///
/// Points of degree at least 3 become alternating nation/dummy cages that
/// host the clique; degree-2 points become plain edges (one per nation
/// pair). Components are tied to a join vertex in the outer face. Faces
/// whose walk repeats a vertex get a ring of dummies, and every other face
/// of degree above 3 outside the cages gets a hub.
pub fn map_to_framed(w: &MapWitness) -> Result<KFramedDrawing, MapError> {
    let nations = w.nations;
    let k2 = 2 * w.k.max(2);
    let mut rot: Vec<Vec<VertexId>> = vec![Vec::new(); nations];
    let fresh = |rot: &mut Vec<Vec<VertexId>>| {
        rot.push(Vec::new());
        (rot.len() - 1) as VertexId
    };

    // Cages and plain edges.
    let mut cages: Vec<(Vec<VertexId>, Vec<VertexId>)> = Vec::new();
    let mut slot: HashMap<(VertexId, VertexId), (usize, usize)> = HashMap::new();
    let mut realized: HashSet<(VertexId, VertexId)> = HashSet::new();
    let mut realizer: HashMap<VertexId, bool> = HashMap::new();
    for p in nations..w.graph.n() {
        let p = p as VertexId;
        let ms = w.neighbors(p);
        if ms.len() >= 3 {
            let ds: Vec<VertexId> = (0..ms.len()).map(|_| fresh(&mut rot)).collect();
            for (i, &m) in ms.iter().enumerate() {
                slot.insert((p, m), (cages.len(), i));
                rot[ds[i] as usize] = vec![m, ms[(i + 1) % ms.len()]];
            }
            cages.push((ms, ds));
        } else {
            let key = (ms[0].min(ms[1]), ms[0].max(ms[1]));
            realizer.insert(p, realized.insert(key));
        }
    }
    // Outer wedge of the witness at a nation, as (nation, neighbour before it).
    let mut anchor: Option<(VertexId, VertexId)> = None;
    let outer_tail = w.graph.outer().and_then(|d0| {
        let mut d = d0;
        loop {
            if w.is_nation(w.graph.tail(d)) {
                return Some(d);
            }
            d = w.graph.face_next(d);
            if d == d0 {
                return None;
            }
        }
    });
    for v in 0..nations as VertexId {
        let mut mark = None;
        for d in w.graph.out_darts(v) {
            let p = w.graph.head(d);
            if let Some(&(c, i)) = slot.get(&(p, v)) {
                let (ms, ds) = &cages[c];
                rot[v as usize].push(ds[i]);
                rot[v as usize].push(ds[(i + ms.len() - 1) % ms.len()]);
            } else if realizer[&p] {
                let ns = w.neighbors(p);
                let other = if ns[0] == v { ns[1] } else { ns[0] };
                rot[v as usize].push(other);
            }
            if Some(d) == outer_tail {
                mark = Some(rot[v as usize].len());
            }
        }
        if let Some(m) = mark {
            let items = &rot[v as usize];
            if !items.is_empty() {
                anchor = Some((v, items[(m + items.len() - 1) % items.len()]));
            }
        }
    }

    // Join the components in the outer face.
    let g0 = PlaneGraph::from_neighbor_rotation(&rot)?;
    let comps = g0.connected_components();
    if comps.len() > 1 {
        let fs0 = g0.trace_faces()?;
        let caged: HashSet<FaceId> =
            cages.iter().map(|(ms, ds)| fs0.face_of(g0.find_dart(ms[0], ds[0]).expect("cage edge"))).collect();
        let z = fresh(&mut rot);
        let mut zl = Vec::new();
        for comp in &comps {
            let (x, after) = match anchor {
                Some((a, b)) if comp.contains(&a) => (a, Some(b)),
                _ => {
                    // Any wedge outside the cages will do.
                    let mut vs = comp.clone();
                    vs.sort_unstable();
                    vs.iter()
                        .find_map(|&x| {
                            g0.out_darts(x).find(|&d| !caged.contains(&fs0.face_of(d))).map(|d| (x, Some(g0.head(d))))
                        })
                        .unwrap_or((vs[0], None))
                }
            };
            insert_after(&mut rot[x as usize], after, z);
            zl.push(x);
        }
        rot[z as usize] = zl;
        anchor = Some(match anchor {
            Some((a, _)) => (a, z),
            None => (z, rot[z as usize][0]),
        });
    }
    if rot.len() == 1 {
        let a = fresh(&mut rot);
        let b = fresh(&mut rot);
        rot[0] = vec![a, b];
        rot[a as usize] = vec![b, 0];
        rot[b as usize] = vec![0, a];
        anchor = Some((0, a));
    }

    // Rings and hubs.
    let mut g1 = PlaneGraph::from_neighbor_rotation(&rot)?;
    let (a, b) = anchor.unwrap_or_else(|| {
        let (u, v) = g1.edges().next().expect("at least one edge");
        (u, v)
    });
    g1.set_outer(g1.find_dart(a, b).expect("anchor edge"));
    let fs1 = g1.trace_faces()?;
    let cage_faces: HashSet<FaceId> =
        cages.iter().map(|(ms, ds)| fs1.face_of(g1.find_dart(ms[0], ds[0]).expect("cage edge"))).collect();
    for f in 0..fs1.len() as FaceId {
        if cage_faces.contains(&f) {
            continue;
        }
        let walk = fs1.vertices(&g1, f);
        let l = walk.len();
        let repeated = walk.iter().collect::<HashSet<_>>().len() < l;
        if repeated {
            let ring: Vec<VertexId> = (0..l).map(|_| fresh(&mut rot)).collect();
            for j in 0..l {
                insert_after(&mut rot[walk[j] as usize], Some(walk[(j + 1) % l]), ring[j]);
                rot[ring[j] as usize] = vec![ring[(j + l - 1) % l], walk[j], ring[(j + 1) % l]];
            }
            if l > 3 {
                let h = fresh(&mut rot);
                for &r in &ring {
                    rot[r as usize].push(h);
                }
                rot[h as usize] = ring;
            }
        } else if l != 3 {
            let h = fresh(&mut rot);
            for j in 0..l {
                insert_after(&mut rot[walk[j] as usize], Some(walk[(j + 1) % l]), h);
            }
            rot[h as usize] = walk;
        }
    }

    let mut g = PlaneGraph::from_neighbor_rotation(&rot)?;
    g.set_outer(g.find_dart(a, b).expect("anchor edge"));
    let fs = g.trace_faces()?;
    let mut crossings = Vec::new();
    for (ms, ds) in &cages {
        let host = fs.face_of(g.find_dart(ms[0], ds[0]).expect("cage edge"));
        for i in 0..ms.len() {
            for j in i + 1..ms.len() {
                let (u, v) = (ms[i].min(ms[j]), ms[i].max(ms[j]));
                crossings.push(CrossingEdge { u, v, host, origin: EdgeOrigin::Input });
            }
        }
    }
    Ok(KFramedDrawing::new(g, k2, crossings)?)
}

fn insert_after(list: &mut Vec<VertexId>, after: Option<VertexId>, x: VertexId) {
    match after.and_then(|y| list.iter().position(|&v| v == y)) {
        Some(i) => list.insert(i + 1, x),
        None => list.push(x),
    }
}

/// Map witness of an augmented k-framed drawing: a point on every skeleton
/// edge and one inside every face of degree at least 4. Its half-square is
/// the drawing's graph.
pub fn framed_to_map(d: &KFramedDrawing) -> Result<MapWitness, MapError> {
    let g = d.skeleton();
    let fs = d.faces();
    let mut hosted: HashSet<(VertexId, VertexId, FaceId)> = HashSet::new();
    for c in &d.crossings {
        hosted.insert((c.u.min(c.v), c.u.max(c.v), c.host));
    }
    for f in 0..fs.len() as FaceId {
        let cyc = d.face_vertices(f);
        let l = cyc.len();
        for x in 0..l {
            for y in x + 2..l {
                if x == 0 && y == l - 1 {
                    continue;
                }
                if !hosted.contains(&(cyc[x].min(cyc[y]), cyc[x].max(cyc[y]), f)) {
                    return Err(MapError::NotAugmented { face: f });
                }
            }
        }
    }
    let edge_pt = vec![true; g.m()];
    let face_pt: Vec<bool> = (0..fs.len() as FaceId).map(|f| fs.face(f).degree() >= 4).collect();
    Ok(witness_from_plane(g, fs, &edge_pt, &face_pt, d.k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::gen_witness;
    use crate::kframed::{augment_cliques, validate_kframed};

    fn contains_half_square(w: &MapWitness, d: &KFramedDrawing) -> bool {
        let have: HashSet<(VertexId, VertexId)> = d.edge_pairs().into_iter().collect();
        half_square(w).iter().all(|p| have.contains(p))
    }

    #[test]
    fn single_point_of_degree_three() {
        // Point 3 inside the triangle of nations 0, 1, 2.
        let rot = vec![vec![3], vec![3], vec![3], vec![0, 1, 2]];
        let g = PlaneGraph::from_neighbor_rotation(&rot).unwrap();
        let w = MapWitness::new(g, 3, 3).unwrap();
        assert_eq!(half_square(&w).into_iter().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (1, 2)]);
        let d = map_to_framed(&w).unwrap();
        assert!(validate_kframed(&d).is_valid(), "{}", validate_kframed(&d));
        assert!(d.k <= 6);
        assert!(contains_half_square(&w, &d));
    }

    #[test]
    fn lone_and_paired_nations() {
        let w = MapWitness::edgeless(1, 3);
        assert!(validate_kframed(&map_to_framed(&w).unwrap()).is_valid());
        let w = MapWitness::edgeless(4, 3);
        assert!(validate_kframed(&map_to_framed(&w).unwrap()).is_valid());
        let rot = vec![vec![2], vec![2], vec![0, 1]];
        let w = MapWitness::new(PlaneGraph::from_neighbor_rotation(&rot).unwrap(), 2, 3).unwrap();
        let d = map_to_framed(&w).unwrap();
        assert!(validate_kframed(&d).is_valid());
        assert!(contains_half_square(&w, &d));
    }

    #[test]
    fn random_witnesses_round_trip() {
        for seed in 0..80 {
            let k = 2 + seed as usize % 5;
            let nations = 3 + seed as usize % 17;
            let points = seed as usize % (nations + 2);
            let w = match gen_witness(seed, nations, points, k) {
                Ok(w) => w,
                Err(_) => continue,
            };
            let d = map_to_framed(&w).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
            let rep = validate_kframed(&d);
            assert!(rep.is_valid(), "seed {seed}: {rep}");
            assert!(d.k <= 2 * k.max(2));
            assert!(contains_half_square(&w, &d), "seed {seed}");
        }
    }

    #[test]
    fn framed_to_map_half_square_is_the_graph() {
        let p = crate::generator::GenParams { seed: 5, k: 5, n: 30, depth: 3, density: 0.3, ..Default::default() };
        let d = crate::generator::gen_kframed(&p).unwrap();
        assert!(matches!(framed_to_map(&d), Err(MapError::NotAugmented { .. })));
        let a = augment_cliques(&d);
        let w = framed_to_map(&a).unwrap();
        let hs: Vec<_> = half_square(&w).into_iter().collect();
        let mut edges = a.edge_pairs();
        edges.sort();
        edges.dedup();
        assert_eq!(hs, edges);
    }
}
