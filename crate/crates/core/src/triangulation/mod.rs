//! Ordered ideal triangulations.
//!
//! Tetrahedra have vertices 0..3 and face slot `k` is the face opposite
//! vertex `k`.  Every gluing identifies the vertices of two faces by the
//! unique order-preserving bijection, so edge orientations (lower to higher
//! local vertex) are respected by all identifications.
//!
//! Class ids (edges, faces, short edges, cusps) are 0-based and assigned in
//! discovery order: tetrahedra in index order, then local items in their
//! canonical order.

mod format;

pub use format::{parse_triangulation, parse_triangulation_file, DualLoop, Literal, PathStep, PathStepKind, TriangulationFile};

use std::collections::BTreeMap;

use thiserror::Error;

/// Local edges in canonical order.
pub const EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Local index of the edge {i, j}.
pub fn edge_index(i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    EDGES.iter().position(|&e| e == (a, b)).expect("distinct vertices in 0..4")
}

/// Vertices of face slot `k`, increasing.
pub fn face_vertices(k: usize) -> [usize; 3] {
    let mut out = [0; 3];
    let mut n = 0;
    for v in 0..4 {
        if v != k {
            out[n] = v;
            n += 1;
        }
    }
    out
}

/// Face slot containing the three given vertices.
pub fn face_slot(a: usize, b: usize, c: usize) -> usize {
    6 - a - b - c
}

/// Short edges `e^i_{jk}` (j < k) of one tetrahedron in canonical order.
pub fn local_short_edges() -> [(usize, usize, usize); 12] {
    let mut out = [(0, 0, 0); 12];
    let mut n = 0;
    for i in 0..4 {
        let o: Vec<usize> = (0..4).filter(|&v| v != i).collect();
        for (j, k) in [(o[0], o[1]), (o[0], o[2]), (o[1], o[2])] {
            out[n] = (i, j, k);
            n += 1;
        }
    }
    out
}

/// Local index of the short edge `e^i_{jk}` with `j < k`.
pub fn short_index(i: usize, j: usize, k: usize) -> usize {
    local_short_edges().iter().position(|&s| s == (i, j, k)).expect("valid short edge")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TriangulationError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("gluing is not a fixed-point-free involution: {0}")]
    GluingNotInvolutive(String),
    #[error("gluing of tetrahedron {tet} face {slot} does not preserve the vertex order")]
    NotOrdered { tet: usize, slot: usize },
    #[error("line {line}: {what} out of range")]
    SlotOutOfRange { line: usize, what: String },
    #[error("line {line}: vertex map {map} does not send face {slot} onto face {target}")]
    InvalidVertexMap { line: usize, map: String, slot: usize, target: usize },
    #[error("one cusp but {edges} edge classes for {tets} tetrahedra")]
    EdgeCount { edges: usize, tets: usize },
    #[error("line {line}: no {kind} class with id {id}")]
    UnknownClass { line: usize, kind: &'static str, id: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FaceSlot {
    pub tet: usize,
    pub slot: usize,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
    /// Class ids in order of first appearance of `0..n`.
    fn labels(&mut self) -> (Vec<usize>, usize) {
        let mut ids = BTreeMap::new();
        let n = self.0.len();
        let mut out = vec![0; n];
        for (x, slot) in out.iter_mut().enumerate() {
            let r = self.find(x);
            let next = ids.len();
            *slot = *ids.entry(r).or_insert(next);
        }
        (out, ids.len())
    }
}

/// An ordered triangulation with all derived class data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangulation {
    gluing: Vec<[FaceSlot; 4]>,
    edge_class: Vec<[usize; 6]>,
    num_edges: usize,
    face_class: Vec<[usize; 4]>,
    face_sides: Vec<[FaceSlot; 2]>,
    cusp: Vec<[usize; 4]>,
    num_cusps: usize,
    short_class: Vec<[usize; 12]>,
    num_shorts: usize,
    point_class: Vec<[usize; 16]>,
}

impl Triangulation {
    /// Builds a triangulation from a complete, involutive, ordered gluing table.
    pub fn from_gluing(gluing: Vec<[FaceSlot; 4]>) -> Result<Self, TriangulationError> {
        let n = gluing.len();
        for (t, row) in gluing.iter().enumerate() {
            for (k, g) in row.iter().enumerate() {
                if g.tet >= n || g.slot >= 4 {
                    return Err(TriangulationError::GluingNotInvolutive(format!("({t},{k}) glued to missing ({},{})", g.tet, g.slot)));
                }
                if g.tet == t && g.slot == k {
                    return Err(TriangulationError::GluingNotInvolutive(format!("({t},{k}) glued to itself")));
                }
                let back = gluing[g.tet][g.slot];
                if back != (FaceSlot { tet: t, slot: k }) {
                    return Err(TriangulationError::GluingNotInvolutive(format!(
                        "({t},{k}) -> ({},{}) but ({},{}) -> ({},{})",
                        g.tet, g.slot, g.tet, g.slot, back.tet, back.slot
                    )));
                }
            }
        }
        let mut tri = Triangulation {
            gluing,
            edge_class: vec![],
            num_edges: 0,
            face_class: vec![],
            face_sides: vec![],
            cusp: vec![],
            num_cusps: 0,
            short_class: vec![],
            num_shorts: 0,
            point_class: vec![],
        };
        tri.derive();
        if tri.num_cusps == 1 && tri.num_edges != n {
            return Err(TriangulationError::EdgeCount { edges: tri.num_edges, tets: n });
        }
        Ok(tri)
    }

    fn derive(&mut self) {
        let n = self.gluing.len();
        let mut edges = UnionFind::new(6 * n);
        let mut cusps = UnionFind::new(4 * n);
        let mut shorts = UnionFind::new(12 * n);
        let mut points = UnionFind::new(16 * n);
        for t in 0..n {
            for k in 0..4 {
                let fv = face_vertices(k);
                let map = |v: usize| self.glue_vertex(t, k, v);
                let t2 = self.gluing[t][k].tet;
                for &v in &fv {
                    cusps.union(4 * t + v, 4 * t2 + map(v));
                }
                for (a, b) in [(fv[0], fv[1]), (fv[0], fv[2]), (fv[1], fv[2])] {
                    edges.union(6 * t + edge_index(a, b), 6 * t2 + edge_index(map(a), map(b)));
                    points.union(16 * t + 4 * a + b, 16 * t2 + 4 * map(a) + map(b));
                    points.union(16 * t + 4 * b + a, 16 * t2 + 4 * map(b) + map(a));
                }
                for &i in &fv {
                    let o: Vec<usize> = fv.iter().copied().filter(|&v| v != i).collect();
                    shorts.union(12 * t + short_index(i, o[0], o[1]), 12 * t2 + short_index(map(i), map(o[0]), map(o[1])));
                }
            }
        }
        let (labels, num) = edges.labels();
        self.num_edges = num;
        self.edge_class = (0..n).map(|t| std::array::from_fn(|e| labels[6 * t + e])).collect();
        let (labels, num) = cusps.labels();
        self.num_cusps = num;
        self.cusp = (0..n).map(|t| std::array::from_fn(|v| labels[4 * t + v])).collect();
        let (labels, num) = shorts.labels();
        self.num_shorts = num;
        self.short_class = (0..n).map(|t| std::array::from_fn(|s| labels[12 * t + s])).collect();
        let (labels, _) = points.labels();
        self.point_class = (0..n).map(|t| std::array::from_fn(|p| labels[16 * t + p])).collect();

        self.face_class = vec![[usize::MAX; 4]; n];
        self.face_sides.clear();
        for t in 0..n {
            for k in 0..4 {
                if self.face_class[t][k] != usize::MAX {
                    continue;
                }
                let here = FaceSlot { tet: t, slot: k };
                let there = self.gluing[t][k];
                let id = self.face_sides.len();
                self.face_class[t][k] = id;
                self.face_class[there.tet][there.slot] = id;
                self.face_sides.push([here.min(there), here.max(there)]);
            }
        }
    }

    pub fn num_tets(&self) -> usize {
        self.gluing.len()
    }
    pub fn num_edge_classes(&self) -> usize {
        self.num_edges
    }
    pub fn num_face_classes(&self) -> usize {
        self.face_sides.len()
    }
    pub fn num_cusps(&self) -> usize {
        self.num_cusps
    }
    pub fn num_short_classes(&self) -> usize {
        self.num_shorts
    }

    /// Target of the face `(tet, slot)`.
    pub fn glued_to(&self, tet: usize, slot: usize) -> FaceSlot {
        self.gluing[tet][slot]
    }

    pub fn gluing(&self) -> &[[FaceSlot; 4]] {
        &self.gluing
    }

    /// Image of vertex `v` of `tet` under the gluing of face `slot`.
    pub fn glue_vertex(&self, tet: usize, slot: usize, v: usize) -> usize {
        let p = face_vertices(slot).iter().position(|&x| x == v).expect("vertex lies on the face");
        face_vertices(self.gluing[tet][slot].slot)[p]
    }

    /// Edge class of the local edge {i, j}.
    pub fn edge_class(&self, tet: usize, i: usize, j: usize) -> usize {
        self.edge_class[tet][edge_index(i, j)]
    }

    /// Instances `(tet, local edge index)` of an edge class.
    pub fn edge_members(&self, class: usize) -> Vec<(usize, usize)> {
        (0..self.num_tets())
            .flat_map(|t| (0..6).map(move |e| (t, e)))
            .filter(|&(t, e)| self.edge_class[t][e] == class)
            .collect()
    }

    pub fn face_class(&self, tet: usize, slot: usize) -> usize {
        self.face_class[tet][slot]
    }

    /// The two embeddings of a face class, lexicographically ordered.
    pub fn face_sides(&self, class: usize) -> [FaceSlot; 2] {
        self.face_sides[class]
    }

    pub fn cusp(&self, tet: usize, v: usize) -> usize {
        self.cusp[tet][v]
    }

    /// Short-edge class of `e^i_{jk}` (either order of j, k).
    pub fn short_class(&self, tet: usize, i: usize, j: usize, k: usize) -> usize {
        self.short_class[tet][short_index(i, j.min(k), j.max(k))]
    }

    /// Instances `(tet, i, j, k)` with `j < k` of a short-edge class.
    pub fn short_members(&self, class: usize) -> Vec<(usize, usize, usize, usize)> {
        let mut out = vec![];
        for t in 0..self.num_tets() {
            for (s, &(i, j, k)) in local_short_edges().iter().enumerate() {
                if self.short_class[t][s] == class {
                    out.push((t, i, j, k));
                }
            }
        }
        out
    }

    /// Class of the truncation vertex near vertex `i` on the edge {i, j}.
    pub fn point_class(&self, tet: usize, i: usize, j: usize) -> usize {
        self.point_class[tet][4 * i + j]
    }

    /// For every edge class, the signed sum of `w` along the loop of faces
    /// encircling it.  A weight vector defines a class on the manifold only if
    /// all sums vanish.
    pub fn edge_cycle_sums(&self, w: &FaceWeights) -> Vec<i64> {
        let mut sums = vec![0; self.num_edges];
        let mut seen = vec![[false; 6]; self.num_tets()];
        for t0 in 0..self.num_tets() {
            for e0 in 0..6 {
                if seen[t0][e0] {
                    continue;
                }
                let class = self.edge_class[t0][e0];
                let (mut t, mut e) = (t0, e0);
                let (i, j) = EDGES[e];
                let mut exit = (0..4).find(|&v| v != i && v != j).expect("edge has two opposite vertices");
                let mut total = 0;
                loop {
                    seen[t][e] = true;
                    let f = self.face_class[t][exit];
                    let sign = if self.face_sides[f][0] == (FaceSlot { tet: t, slot: exit }) { 1 } else { -1 };
                    total += sign * w.get(f);
                    let (a, b) = EDGES[e];
                    let (a2, b2) = (self.glue_vertex(t, exit, a), self.glue_vertex(t, exit, b));
                    let entry = self.gluing[t][exit];
                    t = entry.tet;
                    e = edge_index(a2, b2);
                    exit = (0..4).find(|&v| v != a2 && v != b2 && v != entry.slot).expect("second face around the edge");
                    if t == t0 && e == e0 {
                        let (i, j) = EDGES[e0];
                        let first = (0..4).find(|&v| v != i && v != j).expect("edge has two opposite vertices");
                        if exit == first {
                            break;
                        }
                    }
                }
                sums[class] += total;
            }
        }
        sums
    }
}

/// An integer weight per face class: crossing a face from its side-0
/// embedding to its side-1 embedding contributes `+w(f)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FaceWeights(pub Vec<i64>);

impl FaceWeights {
    pub fn zero(n: usize) -> Self {
        FaceWeights(vec![0; n])
    }
    pub fn get(&self, f: usize) -> i64 {
        self.0.get(f).copied().unwrap_or(0)
    }
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }
}

/// Monomial exponents `k(tet, slot)`: zero on side 0 of each face class and
/// `w(f)` on side 1.
pub fn lift_exponents(tri: &Triangulation, w: &FaceWeights) -> Vec<[i64; 4]> {
    let mut k = vec![[0; 4]; tri.num_tets()];
    for f in 0..tri.num_face_classes() {
        let [_, s1] = tri.face_sides(f);
        k[s1.tet][s1.slot] += w.get(f);
    }
    k
}

/// One crossing of a face class in a dual loop; `forward` means side 0 to side 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Crossing {
    pub face: usize,
    pub forward: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoopError {
    #[error("dual path is not closed at crossing {0}")]
    NotClosed(usize),
    #[error("no face class {0}")]
    UnknownFace(usize),
}

/// Signed sum of `w` along a closed path in the dual graph.
pub fn evaluate_class_on_loop(tri: &Triangulation, w: &FaceWeights, path: &[Crossing]) -> Result<i64, LoopError> {
    let mut total = 0;
    let mut start = None;
    let mut here = None;
    for (n, c) in path.iter().enumerate() {
        if c.face >= tri.num_face_classes() {
            return Err(LoopError::UnknownFace(c.face));
        }
        let [s0, s1] = tri.face_sides(c.face);
        let (from, to) = if c.forward { (s0.tet, s1.tet) } else { (s1.tet, s0.tet) };
        if let Some(h) = here {
            if h != from {
                return Err(LoopError::NotClosed(n));
            }
        } else {
            start = Some(from);
        }
        here = Some(to);
        total += if c.forward { w.get(c.face) } else { -w.get(c.face) };
    }
    if here != start {
        return Err(LoopError::NotClosed(path.len()));
    }
    Ok(total)
}

/// A 1-cell of the truncated complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cell {
    /// `e^v_{jk}` with `j < k`, traversed from near `j` to near `k`.
    Short { tet: usize, v: usize, j: usize, k: usize },
    /// The long edge `e_{ij}` with `i < j`, traversed from the `i` end.
    Long { tet: usize, i: usize, j: usize },
}

/// A cell traversed forwards or backwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub cell: Cell,
    pub forward: bool,
}

impl Step {
    fn fwd(cell: Cell) -> Self {
        Step { cell, forward: true }
    }
    fn bwd(cell: Cell) -> Self {
        Step { cell, forward: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationKind {
    Hexagon { face: usize },
    Triangle { tet: usize, vertex: usize },
}

/// A closed boundary word of a 2-cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub kind: RelationKind,
    pub word: Vec<Step>,
}

/// The truncated cell structure: short and long edges with their relations.
#[derive(Debug, Clone)]
pub struct TruncatedComplex {
    pub short_edges: Vec<Cell>,
    pub long_edges: Vec<Cell>,
    pub short_classes: Vec<Vec<Cell>>,
    pub hexagons: Vec<Relation>,
    pub triangles: Vec<Relation>,
}

pub fn truncate(tri: &Triangulation) -> TruncatedComplex {
    let n = tri.num_tets();
    let mut short_edges = vec![];
    let mut short_classes = vec![vec![]; tri.num_short_classes()];
    let mut long_edges = vec![];
    let mut triangles = vec![];
    for t in 0..n {
        for (i, j, k) in local_short_edges() {
            let cell = Cell::Short { tet: t, v: i, j, k };
            short_edges.push(cell);
            short_classes[tri.short_class(t, i, j, k)].push(cell);
        }
        for (i, j) in EDGES {
            long_edges.push(Cell::Long { tet: t, i, j });
        }
        for v in 0..4 {
            let o: Vec<usize> = (0..4).filter(|&x| x != v).collect();
            let s = |a: usize, b: usize| Cell::Short { tet: t, v, j: a, k: b };
            triangles.push(Relation {
                kind: RelationKind::Triangle { tet: t, vertex: v },
                word: vec![Step::fwd(s(o[0], o[1])), Step::fwd(s(o[1], o[2])), Step::bwd(s(o[0], o[2]))],
            });
        }
    }
    let hexagons = (0..tri.num_face_classes())
        .map(|f| {
            let side = tri.face_sides(f)[0];
            let t = side.tet;
            let [a, b, c] = face_vertices(side.slot);
            let long = |i, j| Cell::Long { tet: t, i, j };
            let short = |v, j, k| Cell::Short { tet: t, v, j, k };
            Relation {
                kind: RelationKind::Hexagon { face: f },
                word: vec![
                    Step::fwd(long(a, b)),
                    Step::fwd(short(b, a, c)),
                    Step::fwd(long(b, c)),
                    Step::bwd(short(c, a, b)),
                    Step::bwd(long(a, c)),
                    Step::bwd(short(a, b, c)),
                ],
            }
        })
        .collect();
    TruncatedComplex { short_edges, long_edges, short_classes, hexagons, triangles }
}

impl Triangulation {
    /// Start and end truncation-vertex classes of a traversed cell.
    pub fn step_endpoints(&self, step: &Step) -> (usize, usize) {
        let (s, e) = match step.cell {
            Cell::Short { tet, v, j, k } => (self.point_class(tet, v, j), self.point_class(tet, v, k)),
            Cell::Long { tet, i, j } => (self.point_class(tet, i, j), self.point_class(tet, j, i)),
        };
        if step.forward {
            (s, e)
        } else {
            (e, s)
        }
    }
}
