//! Peeling into levels and the per-level structures built on it.

use crate::graph_core::{Dart, EdgeId, FaceId, FaceSet, PlaneGraph, VertexId};
use crate::kframed::KFramedDrawing;
use std::collections::VecDeque;

/// Level of every vertex. Level 0 is the outer face.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Leveling {
    pub level: Vec<u32>,
    /// Number of levels (max level + 1).
    pub depth: usize,
}

impl Leveling {
    pub fn vertices_at(&self, i: u32) -> Vec<VertexId> {
        (0..self.level.len() as VertexId).filter(|&v| self.level[v as usize] == i).collect()
    }
}

/// Levels via breadth-first search over vertex/face incidences: a vertex
/// sits one level below the shallowest vertex it shares a bounded face
/// with. Same result as stripping the outer face round by round.
pub fn peel(g: &PlaneGraph, fs: &FaceSet) -> Leveling {
    let n = g.n();
    let mut level = vec![u32::MAX; n];
    let mut face_done = vec![false; fs.len()];
    let mut queue = VecDeque::new();
    if let Some(outer) = fs.outer() {
        face_done[outer as usize] = true;
        for v in fs.vertices(g, outer) {
            if level[v as usize] == u32::MAX {
                level[v as usize] = 0;
                queue.push_back(v);
            }
        }
    }
    while let Some(v) = queue.pop_front() {
        for d in g.out_darts(v) {
            let f = fs.face_of(d);
            if face_done[f as usize] {
                continue;
            }
            face_done[f as usize] = true;
            for w in fs.vertices(g, f) {
                if level[w as usize] == u32::MAX {
                    level[w as usize] = level[v as usize] + 1;
                    queue.push_back(w);
                }
            }
        }
    }
    let depth = level.iter().filter(|&&l| l != u32::MAX).map(|&l| l as usize + 1).max().unwrap_or(0);
    Leveling { level, depth }
}

pub fn peel_levels(d: &KFramedDrawing) -> Leveling {
    peel(d.skeleton(), d.faces())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    /// Both ends on level `i`, on the outer face of that level's graph.
    Level(u32),
    /// Both ends on level `i`, not on the outer face of that level's graph.
    Chord(u32),
    /// Joins level `i` to level `i + 1`.
    Binding(u32),
}

/// Per-level view.
#[derive(Clone, Debug, Default)]
pub struct LevelInfo {
    pub vertices: Vec<VertexId>,
    /// Edges of the graph induced by this level.
    pub sigma_edges: Vec<EdgeId>,
    pub chords: Vec<EdgeId>,
    /// `sigma_edges` without the chords: a forest of cacti.
    pub cactus_edges: Vec<EdgeId>,
    /// Bounded faces whose shallowest vertex is on the level above
    /// (empty for level 0).
    pub intra_faces: Vec<FaceId>,
}

/// One biconnected piece of the graph between two consecutive levels: a
/// two-level instance once cut out of the skeleton.
#[derive(Clone, Debug)]
pub struct Bicomponent {
    /// Inner level; the boundary lies on `level - 1`.
    pub level: usize,
    pub faces: Vec<FaceId>,
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
    /// Boundary cycle, counterclockwise (interior on the left), starting at
    /// its smallest vertex.
    pub boundary: Vec<VertexId>,
    /// Dart on the boundary with the interior on its right.
    pub outside_dart: Dart,
    /// Bicomponent one level up that has this boundary as a block.
    pub parent: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct LevelStructures {
    pub leveling: Leveling,
    /// Smallest level on each face; `u32::MAX` for the outer face.
    pub face_minlevel: Vec<u32>,
    pub edge_kind: Vec<EdgeKind>,
    pub levels: Vec<LevelInfo>,
    /// Ordered by level, then by smallest face id.
    pub bicomponents: Vec<Bicomponent>,
    /// Bicomponent of each bounded face.
    pub face_group: Vec<u32>,
    /// Children of each bicomponent.
    pub children: Vec<Vec<usize>>,
}

pub fn derive_level_structures(d: &KFramedDrawing, lv: &Leveling) -> LevelStructures {
    derive(d.skeleton(), d.faces(), lv)
}

/// Builds all per-level structures. `fs` must be the face set of `g`.
pub fn derive(g: &PlaneGraph, fs: &FaceSet, lv: &Leveling) -> LevelStructures {
    let nf = fs.len();
    let outer = fs.outer();
    let lvl = |v: VertexId| lv.level[v as usize];
    let face_minlevel: Vec<u32> = (0..nf as FaceId)
        .map(|f| {
            if Some(f) == outer {
                u32::MAX
            } else {
                fs.face(f).darts.iter().map(|&d| lvl(g.tail(d))).min().unwrap_or(u32::MAX)
            }
        })
        .collect();
    // Smallest level on either side, counting the outer face as -1.
    let side = |d: Dart| -> i64 {
        let f = fs.face_of(d);
        if Some(f) == outer {
            -1
        } else {
            face_minlevel[f as usize] as i64
        }
    };

    let mut levels: Vec<LevelInfo> = vec![LevelInfo::default(); lv.depth];
    for v in 0..g.n() as VertexId {
        if lvl(v) != u32::MAX {
            levels[lvl(v) as usize].vertices.push(v);
        }
    }
    let mut edge_kind = Vec::with_capacity(g.m());
    for e in 0..g.m() as EdgeId {
        let (a, b) = g.endpoints(e);
        let (la, lb) = (lvl(a), lvl(b));
        let kind = if la == lb {
            let dn = Dart::new(e, false);
            let info = &mut levels[la as usize];
            info.sigma_edges.push(e);
            if side(dn).min(side(dn.twin())) < la as i64 {
                info.cactus_edges.push(e);
                EdgeKind::Level(la)
            } else {
                info.chords.push(e);
                EdgeKind::Chord(la)
            }
        } else {
            EdgeKind::Binding(la.min(lb))
        };
        edge_kind.push(kind);
    }

    // Faces with equal minimum level glued along shared edges.
    let mut parent: Vec<usize> = (0..nf).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for e in 0..g.m() as EdgeId {
        let dn = Dart::new(e, false);
        let (f1, f2) = (fs.face_of(dn) as usize, fs.face_of(dn.twin()) as usize);
        if Some(f1 as FaceId) == outer || Some(f2 as FaceId) == outer {
            continue;
        }
        if face_minlevel[f1] == face_minlevel[f2] {
            let (a, b) = (find(&mut parent, f1), find(&mut parent, f2));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut roots: Vec<usize> = (0..nf).filter(|&f| Some(f as FaceId) != outer && find(&mut parent, f) == f).collect();
    roots.sort_by_key(|&f| (face_minlevel[f], f));
    let mut root_id = vec![u32::MAX; nf];
    for (i, &r) in roots.iter().enumerate() {
        root_id[r] = i as u32;
    }
    let mut face_group = vec![u32::MAX; nf];
    let mut bicomponents: Vec<Bicomponent> = roots
        .iter()
        .map(|&r| Bicomponent {
            level: face_minlevel[r] as usize + 1,
            faces: Vec::new(),
            vertices: Vec::new(),
            edges: Vec::new(),
            boundary: Vec::new(),
            outside_dart: Dart(u32::MAX),
            parent: None,
        })
        .collect();
    for f in 0..nf {
        if Some(f as FaceId) == outer {
            continue;
        }
        let gid = root_id[find(&mut parent, f)];
        face_group[f] = gid;
        bicomponents[gid as usize].faces.push(f as FaceId);
        let ml = face_minlevel[f] as usize;
        if ml + 1 < lv.depth {
            levels[ml + 1].intra_faces.push(f as FaceId);
        }
    }

    let mut vmark = vec![u32::MAX; g.n()];
    let mut emark = vec![u32::MAX; g.m()];
    let mut next_on_boundary = vec![u32::MAX; g.n()];
    for (gid, bc) in bicomponents.iter_mut().enumerate() {
        let gid = gid as u32;
        let ml = bc.level as i64 - 1;
        let mut start: Option<Dart> = None;
        for &f in &bc.faces {
            for &dd in &fs.face(f).darts {
                let v = g.tail(dd);
                if vmark[v as usize] != gid {
                    vmark[v as usize] = gid;
                    bc.vertices.push(v);
                }
                let e = dd.edge();
                if emark[e as usize] != gid {
                    emark[e as usize] = gid;
                    bc.edges.push(e);
                }
                // Boundary dart: the interior is on the left, the other
                // side is shallower.
                if side(dd.twin()) < ml {
                    next_on_boundary[v as usize] = g.head(dd);
                    if start.is_none_or(|s| v < g.tail(s)) {
                        start = Some(dd);
                    }
                }
            }
        }
        let start = start.expect("bicomponent has a boundary");
        let first = g.tail(start);
        let mut cyc = vec![first];
        let mut v = next_on_boundary[first as usize];
        while v != first {
            cyc.push(v);
            v = next_on_boundary[v as usize];
            assert!(cyc.len() <= g.n(), "boundary walk does not close");
        }
        bc.boundary = cyc;
        bc.outside_dart = start.twin();
        if bc.level > 1 {
            let pf = fs.face_of(start.twin());
            bc.parent = Some(face_group[pf as usize] as usize);
        }
    }
    let mut children = vec![Vec::new(); bicomponents.len()];
    for (i, bc) in bicomponents.iter().enumerate() {
        if let Some(p) = bc.parent {
            children[p].push(i);
        }
    }
    LevelStructures { leveling: lv.clone(), face_minlevel, edge_kind, levels, bicomponents, face_group, children }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Triangles nested three deep, consecutive shells joined by a full
    /// ring of binding edges (octahedral bands).
    pub(crate) fn nested_triangles(shells: u32) -> PlaneGraph {
        // Shell t holds 3t, 3t+1, 3t+2, placed clockwise, shell t+1 rotated
        // and shrunk so inner vertex i sits between outer i and i+1.
        let n = 3 * shells;
        let mut adj: Vec<Vec<(f64, u32)>> = vec![Vec::new(); n as usize];
        let pos = |v: u32| -> (f64, f64) {
            let t = v / 3;
            let i = v % 3;
            let r = 0.4f64.powi(t as i32);
            let a = -(i as f64) * 2.0 * std::f64::consts::PI / 3.0 - t as f64 * 0.5;
            (r * a.cos(), r * a.sin())
        };
        let mut add = |a: u32, b: u32| {
            let (pa, pb) = (pos(a), pos(b));
            adj[a as usize].push(((pb.1 - pa.1).atan2(pb.0 - pa.0), b));
            adj[b as usize].push(((pa.1 - pb.1).atan2(pa.0 - pb.0), a));
        };
        for t in 0..shells {
            for i in 0..3 {
                add(3 * t + i, 3 * t + (i + 1) % 3);
                if t + 1 < shells {
                    add(3 * t + i, 3 * (t + 1) + i);
                    add(3 * t + i, 3 * (t + 1) + (i + 2) % 3);
                }
            }
        }
        let rot: Vec<Vec<u32>> = adj
            .into_iter()
            .map(|mut l| {
                l.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
                l.into_iter().map(|x| x.1).collect()
            })
            .collect();
        let mut g = PlaneGraph::from_neighbor_rotation(&rot).unwrap();
        // 0 -> 1 runs clockwise on the outer triangle: outer face on its left.
        g.set_outer(g.find_dart(0, 1).unwrap());
        g
    }

    #[test]
    fn nested_triangles_have_three_levels() {
        let g = nested_triangles(3);
        let fs = g.trace_faces().unwrap();
        assert_eq!(fs.vertices(&g, fs.outer().unwrap()).len(), 3);
        let lv = peel(&g, &fs);
        assert_eq!(lv.depth, 3);
        assert_eq!(lv.level, vec![0, 0, 0, 1, 1, 1, 2, 2, 2]);
        let ls = derive(&g, &fs, &lv);
        assert_eq!(ls.bicomponents.len(), 3);
        assert_eq!(ls.bicomponents[1].parent, Some(0));
        assert_eq!(ls.bicomponents[2].parent, Some(1));
        // The innermost triangle face has no deeper level and forms its own
        // bicomponent at level 3.
        assert_eq!(ls.bicomponents[2].level, 3);
        assert_eq!(ls.bicomponents[2].faces.len(), 1);
        assert!(ls.edge_kind.iter().all(|k| !matches!(k, EdgeKind::Chord(_))));
    }

    #[test]
    fn single_cycle_is_one_level() {
        let rot: Vec<Vec<u32>> = (0..5).map(|i| vec![(i + 1) % 5, (i + 4) % 5]).collect();
        let mut g = PlaneGraph::from_neighbor_rotation(&rot).unwrap();
        g.set_outer(g.find_dart(0, 1).unwrap());
        let fs = g.trace_faces().unwrap();
        let lv = peel(&g, &fs);
        assert_eq!(lv.depth, 1);
        let ls = derive(&g, &fs, &lv);
        assert_eq!(ls.bicomponents.len(), 1);
        assert_eq!(ls.bicomponents[0].boundary.len(), 5);
    }

    #[test]
    fn boundary_runs_counterclockwise() {
        let g = nested_triangles(2);
        let fs = g.trace_faces().unwrap();
        let lv = peel(&g, &fs);
        let ls = derive(&g, &fs, &lv);
        let root = &ls.bicomponents[0];
        // Outer trace is clockwise 0,1,2; counterclockwise is 0,2,1.
        assert_eq!(root.boundary, vec![0, 2, 1]);
        assert_eq!(fs.face_of(root.outside_dart), fs.outer().unwrap());
    }
}
