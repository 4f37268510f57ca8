//! k-framed drawings: a plane skeleton plus crossing edges caged in its faces.

use crate::graph_core::{canonical_cycle, FaceId, FaceSet, GraphError, PlaneGraph, VertexId};
use crate::oracle::BookEmbedding;
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeOrigin {
    Input,
    Augmented,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CrossingEdge {
    pub u: VertexId,
    pub v: VertexId,
    /// Face of the skeleton (as traced by [`KFramedDrawing::faces`]).
    pub host: FaceId,
    pub origin: EdgeOrigin,
}

#[derive(Debug, Error)]
pub enum KFramedError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("skeleton has no designated outer face")]
    NoOuterFace,
    #[error("invalid k-framed drawing: {0}")]
    Invalid(ValidationReport),
}

/// One violated invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    KTooSmall(usize),
    NotSimple,
    NotBiconnected,
    FaceDegreeExceedsK { face: FaceId, degree: usize, k: usize },
    HostOutOfRange { crossing: usize, host: FaceId },
    EndpointNotOnHost { crossing: usize, vertex: VertexId },
    CrossingIsBoundaryEdge { crossing: usize },
    CrossingIsLoop { crossing: usize },
    DuplicateCrossing { crossing: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::KTooSmall(k) => write!(f, "k = {k} is below 3"),
            Violation::NotSimple => write!(f, "skeleton has parallel edges"),
            Violation::NotBiconnected => write!(f, "skeleton is not biconnected"),
            Violation::FaceDegreeExceedsK { face, degree, k } => {
                write!(f, "face {face} has degree {degree}: face degree exceeds k = {k}")
            }
            Violation::HostOutOfRange { crossing, host } => {
                write!(f, "crossing edge {crossing} names face {host}, which does not exist")
            }
            Violation::EndpointNotOnHost { crossing, vertex } => {
                write!(f, "crossing edge {crossing}: vertex {vertex} is not on its host face")
            }
            Violation::CrossingIsBoundaryEdge { crossing } => {
                write!(f, "crossing edge {crossing} joins two consecutive vertices of its host face")
            }
            Violation::CrossingIsLoop { crossing } => write!(f, "crossing edge {crossing} is a loop"),
            Violation::DuplicateCrossing { crossing } => {
                write!(f, "crossing edge {crossing} repeats a pair inside the same face")
            }
        }
    }
}

/// Result of [`validate_kframed`]; empty means valid.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Skeleton, parameter k and caged crossing edges.
#[derive(Clone, Debug)]
pub struct KFramedDrawing {
    skeleton: PlaneGraph,
    faces: FaceSet,
    pub k: usize,
    pub crossings: Vec<CrossingEdge>,
}

impl KFramedDrawing {
    /// Wraps a skeleton with a designated outer face. No invariant check
    /// beyond the outer face; call [`validate_kframed`] for that.
    pub fn new(skeleton: PlaneGraph, k: usize, crossings: Vec<CrossingEdge>) -> Result<Self, KFramedError> {
        if skeleton.outer().is_none() {
            return Err(KFramedError::NoOuterFace);
        }
        let faces = skeleton.trace_faces()?;
        Ok(KFramedDrawing { skeleton, faces, k, crossings })
    }

    /// Like [`KFramedDrawing::new`] but fails unless the drawing validates.
    pub fn checked(skeleton: PlaneGraph, k: usize, crossings: Vec<CrossingEdge>) -> Result<Self, KFramedError> {
        let d = Self::new(skeleton, k, crossings)?;
        let report = validate_kframed(&d);
        if !report.is_valid() {
            return Err(KFramedError::Invalid(report));
        }
        Ok(d)
    }

    pub fn skeleton(&self) -> &PlaneGraph {
        &self.skeleton
    }
    pub fn faces(&self) -> &FaceSet {
        &self.faces
    }
    pub fn n(&self) -> usize {
        self.skeleton.n()
    }
    pub fn outer_face(&self) -> FaceId {
        self.faces.outer().expect("outer face set at construction")
    }

    /// Edge set of the drawn graph as normalized pairs, duplicates collapsed.
    pub fn edge_pairs(&self) -> Vec<(VertexId, VertexId)> {
        let mut set: Vec<(VertexId, VertexId)> = self
            .skeleton
            .edges()
            .chain(self.crossings.iter().map(|c| (c.u, c.v)))
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        set.sort_unstable();
        set.dedup();
        set
    }

    /// Edge pairs of input origin only (skeleton and input crossings).
    pub fn input_edge_pairs(&self) -> Vec<(VertexId, VertexId)> {
        let mut set: Vec<(VertexId, VertexId)> = self
            .skeleton
            .edges()
            .chain(self.crossings.iter().filter(|c| c.origin == EdgeOrigin::Input).map(|c| (c.u, c.v)))
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        set.sort_unstable();
        set.dedup();
        set
    }

    /// Boundary vertices of face `f` in trace order.
    pub fn face_vertices(&self, f: FaceId) -> Vec<VertexId> {
        self.faces.vertices(&self.skeleton, f)
    }

    /// Canonical boundary cycle of `f`.
    pub fn face_cycle(&self, f: FaceId) -> Vec<VertexId> {
        canonical_cycle(&self.face_vertices(f))
    }
}

/// Lists every violated k-framed invariant.
pub fn validate_kframed(d: &KFramedDrawing) -> ValidationReport {
    let mut violations = Vec::new();
    let g = &d.skeleton;
    if d.k < 3 {
        violations.push(Violation::KTooSmall(d.k));
    }
    if !g.is_simple() {
        violations.push(Violation::NotSimple);
    }
    if !g.is_biconnected() || g.n() < 3 {
        violations.push(Violation::NotBiconnected);
    }
    for f in 0..d.faces.len() as FaceId {
        let degree = d.faces.face(f).degree();
        if degree > d.k {
            violations.push(Violation::FaceDegreeExceedsK { face: f, degree, k: d.k });
        }
    }
    let mut seen = HashSet::new();
    for (i, c) in d.crossings.iter().enumerate() {
        if c.host as usize >= d.faces.len() {
            violations.push(Violation::HostOutOfRange { crossing: i, host: c.host });
            continue;
        }
        if c.u == c.v {
            violations.push(Violation::CrossingIsLoop { crossing: i });
            continue;
        }
        let cyc = d.face_vertices(c.host);
        let mut ok = true;
        for w in [c.u, c.v] {
            if !cyc.contains(&w) {
                violations.push(Violation::EndpointNotOnHost { crossing: i, vertex: w });
                ok = false;
            }
        }
        if !ok {
            continue;
        }
        let len = cyc.len();
        let consecutive = (0..len).any(|j| {
            let (a, b) = (cyc[j], cyc[(j + 1) % len]);
            (a == c.u && b == c.v) || (a == c.v && b == c.u)
        });
        if consecutive {
            violations.push(Violation::CrossingIsBoundaryEdge { crossing: i });
        }
        if !seen.insert((c.u.min(c.v), c.u.max(c.v), c.host)) {
            violations.push(Violation::DuplicateCrossing { crossing: i });
        }
    }
    ValidationReport { violations }
}

/// Adds every missing pair of each face as an augmented crossing edge.
/// The outer face is included.
pub fn augment_cliques(d: &KFramedDrawing) -> KFramedDrawing {
    let mut out = d.clone();
    let mut present: HashSet<(VertexId, VertexId, FaceId)> =
        d.crossings.iter().map(|c| (c.u.min(c.v), c.u.max(c.v), c.host)).collect();
    for f in 0..d.faces.len() as FaceId {
        let cyc = d.face_vertices(f);
        let len = cyc.len();
        let mut boundary = HashSet::new();
        for j in 0..len {
            let (a, b) = (cyc[j], cyc[(j + 1) % len]);
            boundary.insert((a.min(b), a.max(b)));
        }
        for x in 0..len {
            for y in x + 1..len {
                let (a, b) = (cyc[x].min(cyc[y]), cyc[x].max(cyc[y]));
                if a == b || boundary.contains(&(a, b)) {
                    continue;
                }
                if present.insert((a, b, f)) {
                    out.crossings.push(CrossingEdge { u: a, v: b, host: f, origin: EdgeOrigin::Augmented });
                }
            }
        }
    }
    out
}

/// Restricts an embedding computed on the augmented drawing to the input
/// edge set. Parallel copies already share one page entry keyed by the
/// vertex pair, so only the augmented pairs need to go.
pub fn strip_augmentation(e: &BookEmbedding, d: &KFramedDrawing) -> BookEmbedding {
    let keep: HashSet<(VertexId, VertexId)> = d.input_edge_pairs().into_iter().collect();
    let pages: BTreeMap<(VertexId, VertexId), _> =
        e.pages.iter().filter(|(k, _)| keep.contains(k)).map(|(k, v)| (*k, *v)).collect();
    BookEmbedding { order: e.order.clone(), pages, registry: e.registry }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn cycle_drawing(n: u32, k: usize) -> KFramedDrawing {
        let rot: Vec<Vec<u32>> = (0..n).map(|i| vec![(i + 1) % n, (i + n - 1) % n]).collect();
        let mut g = PlaneGraph::from_neighbor_rotation(&rot).unwrap();
        // dart 0 -> 1 has the bounded face on its left, so use its twin.
        let d = g.find_dart(1, 0).unwrap();
        g.set_outer(d);
        KFramedDrawing::new(g, k, vec![]).unwrap()
    }

    fn bounded(d: &KFramedDrawing) -> FaceId {
        (0..2).find(|&f| f != d.outer_face()).unwrap()
    }

    #[test]
    fn pentagon_with_five_diagonals_is_valid() {
        let mut d = cycle_drawing(5, 5);
        let f = bounded(&d);
        for (u, v) in [(0, 2), (0, 3), (1, 3), (1, 4), (2, 4)] {
            d.crossings.push(CrossingEdge { u, v, host: f, origin: EdgeOrigin::Input });
        }
        assert!(validate_kframed(&d).is_valid());
    }

    #[test]
    fn oversized_face_is_reported() {
        let d = cycle_drawing(7, 6);
        let r = validate_kframed(&d);
        assert!(r.violations.iter().any(|v| matches!(v, Violation::FaceDegreeExceedsK { degree: 7, .. })));
        assert!(r.to_string().contains("face degree exceeds k"));
    }

    #[test]
    fn boundary_crossing_is_reported() {
        let mut d = cycle_drawing(4, 4);
        let f = bounded(&d);
        d.crossings.push(CrossingEdge { u: 0, v: 1, host: f, origin: EdgeOrigin::Input });
        assert_eq!(validate_kframed(&d).violations, vec![Violation::CrossingIsBoundaryEdge { crossing: 0 }]);
    }

    #[test]
    fn augmentation_counts() {
        let d = cycle_drawing(4, 4);
        let a = augment_cliques(&d);
        // Both faces of a 4-cycle receive the two diagonals.
        assert_eq!(a.crossings.len(), 4);
        let f = bounded(&d);
        assert_eq!(a.crossings.iter().filter(|c| c.host == f).count(), 2);
        let t = cycle_drawing(3, 3);
        assert!(augment_cliques(&t).crossings.is_empty());
        let mut p = cycle_drawing(5, 5);
        let f = bounded(&p);
        p.crossings.push(CrossingEdge { u: 0, v: 2, host: f, origin: EdgeOrigin::Input });
        p.crossings.push(CrossingEdge { u: 1, v: 3, host: f, origin: EdgeOrigin::Input });
        let a = augment_cliques(&p);
        let added = a.crossings.iter().filter(|c| c.host == f && c.origin == EdgeOrigin::Augmented).count();
        assert_eq!(added, 3);
    }

    #[test]
    fn augmentation_is_idempotent() {
        let d = cycle_drawing(6, 6);
        let a = augment_cliques(&d);
        let b = augment_cliques(&a);
        assert_eq!(a.crossings, b.crossings);
        assert!(validate_kframed(&b).is_valid());
    }
}
