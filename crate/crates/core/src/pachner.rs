//! The 2–3 Pachner move on ordered triangulations.
//!
//! Two distinct tetrahedra A and B glued along a face span a bipyramid with
//! apexes `a` (the vertex of A off the face) and `b` (the vertex of B off
//! the face).  Its five vertices get the unique total order extending both
//! vertex orders (with `a < b` when they fall into the same gap), and the
//! bipyramid is re-cut into three tetrahedra around the new edge `ab`.  The
//! surviving tetrahedra keep their relative order; the three new ones are
//! appended, new tetrahedron `x` omitting the `x`-th face vertex.

use thiserror::Error;

use crate::oneloop::{monic, one_loop_polynomial, EdgeChoice, OneLoopError};
use crate::ptolemy::{PtolemyError, SigmaCocycle, TetCoefficients};
use crate::scalars::{LaurentPoly, Scalar};
use crate::triangulation::{
    edge_index, face_vertices, lift_exponents, local_short_edges, FaceSlot, FaceWeights, Triangulation,
    TriangulationError, EDGES,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PachnerError {
    #[error("tetrahedron {0} does not exist")]
    NoSuchTet(usize),
    #[error("face {slot} of tetrahedron {tet} is not glued to tetrahedron {other}")]
    NotAdjacent { tet: usize, slot: usize, other: usize },
    #[error("face slot {0} is not in 0..4")]
    NoSuchFace(usize),
    #[error("the two tetrahedra coincide")]
    SameTet,
    #[error("vertex orders admit no common extension")]
    OrderingObstruction,
    #[error("transported edge value is not determined: {0}")]
    DegenerateTransport(&'static str),
    #[error("transported data fails the relation of new tetrahedron {0}")]
    TransportFailed(usize),
    #[error(transparent)]
    Triangulation(#[from] TriangulationError),
    #[error(transparent)]
    Ptolemy(#[from] PtolemyError),
    #[error(transparent)]
    OneLoop(#[from] OneLoopError),
}

/// The result of a 2–3 move with correspondence tables.
#[derive(Debug, Clone)]
pub struct PachnerMove {
    pub before: Triangulation,
    pub after: Triangulation,
    pub tet_a: usize,
    pub tet_b: usize,
    /// Slot of A on the shared face.
    pub slot_a: usize,
    pub slot_b: usize,
    /// Bipyramid labels (0..5) of the local vertices of A and B.
    pub labels_a: [usize; 4],
    pub labels_b: [usize; 4],
    /// Bipyramid labels of the three new tetrahedra, increasing.
    pub new_tets: [[usize; 4]; 3],
    /// New index of each old tetrahedron other than A and B.
    pub tet_map: Vec<Option<usize>>,
    /// New class of each old edge class.
    pub edge_map: Vec<usize>,
    /// New class of each old face class; `None` for the shared face.
    pub face_map: Vec<Option<usize>>,
    pub new_edge: usize,
}

impl PachnerMove {
    fn first_new(&self) -> usize {
        self.before.num_tets() - 2
    }

    /// Bipyramid labels of the apexes.
    pub fn apexes(&self) -> (usize, usize) {
        (self.labels_a[self.slot_a], self.labels_b[self.slot_b])
    }

    /// New position of an old face slot that survives the move.
    fn map_slot(&self, fs: FaceSlot) -> FaceSlot {
        let (a, b) = self.apexes();
        if fs.tet == self.tet_a {
            self.new_face(self.labels_a[fs.slot], b)
        } else if fs.tet == self.tet_b {
            self.new_face(self.labels_b[fs.slot], a)
        } else {
            FaceSlot { tet: self.tet_map[fs.tet].expect("surviving tetrahedron"), slot: fs.slot }
        }
    }

    /// The face of the new tetrahedron omitting label `omit` that is opposite
    /// label `opposite`.
    fn new_face(&self, omit: usize, opposite: usize) -> FaceSlot {
        let x = self.new_index(omit);
        let slot = self.new_tets[x].iter().position(|&l| l == opposite).expect("label in new tetrahedron");
        FaceSlot { tet: self.first_new() + x, slot }
    }

    fn new_index(&self, omit: usize) -> usize {
        self.new_tets.iter().position(|t| !t.contains(&omit)).expect("omitted label is a face vertex")
    }

    /// Locates the old local item spanned by labels inside tetrahedron A or B.
    fn old_local(&self, labels: &[usize]) -> Option<(usize, Vec<usize>)> {
        for (tet, map) in [(self.tet_a, &self.labels_a), (self.tet_b, &self.labels_b)] {
            let local: Option<Vec<usize>> = labels.iter().map(|l| map.iter().position(|m| m == l)).collect();
            if let Some(v) = local {
                return Some((tet, v));
            }
        }
        None
    }
}

/// Performs the 2–3 move on tetrahedra `tet_a` and `tet_b`, glued along face
/// slot `slot_a` of `tet_a`.
pub fn two_three_move(tri: &Triangulation, tet_a: usize, tet_b: usize, slot_a: usize) -> Result<PachnerMove, PachnerError> {
    for t in [tet_a, tet_b] {
        if t >= tri.num_tets() {
            return Err(PachnerError::NoSuchTet(t));
        }
    }
    if tet_a == tet_b {
        return Err(PachnerError::SameTet);
    }
    if slot_a > 3 {
        return Err(PachnerError::NoSuchFace(slot_a));
    }
    let other = tri.glued_to(tet_a, slot_a);
    if other.tet != tet_b {
        return Err(PachnerError::NotAdjacent { tet: tet_a, slot: slot_a, other: tet_b });
    }
    let slot_b = other.slot;
    let fa = face_vertices(slot_a);
    let key_a = |v: usize| -> f64 {
        if v == slot_a {
            slot_a as f64 - 0.5
        } else {
            fa.iter().position(|&u| u == v).expect("face vertex") as f64
        }
    };
    let key_b = |v: usize| -> f64 {
        if v == slot_b {
            slot_b as f64 - 0.25
        } else {
            key_a(tri.glue_vertex(tet_b, slot_b, v))
        }
    };
    let mut keys: Vec<f64> = (0..3).map(|i| i as f64).collect();
    keys.push(key_a(slot_a));
    keys.push(key_b(slot_b));
    let mut sorted = keys.clone();
    sorted.sort_by(f64::total_cmp);
    let label = |k: f64| sorted.iter().position(|&s| s == k).expect("key present");
    let labels_a: [usize; 4] = std::array::from_fn(|v| label(key_a(v)));
    let labels_b: [usize; 4] = std::array::from_fn(|v| label(key_b(v)));
    let face_labels: Vec<usize> = fa.iter().map(|&v| labels_a[v]).collect();
    let new_tets: [[usize; 4]; 3] = std::array::from_fn(|x| {
        let mut t: Vec<usize> = (0..5).filter(|&l| l != face_labels[x]).collect();
        t.sort_unstable();
        [t[0], t[1], t[2], t[3]]
    });

    let n = tri.num_tets();
    let mut tet_map = vec![None; n];
    let mut next = 0;
    for (t, slot) in tet_map.iter_mut().enumerate() {
        if t != tet_a && t != tet_b {
            *slot = Some(next);
            next += 1;
        }
    }
    let mut mv = PachnerMove {
        before: tri.clone(),
        after: tri.clone(),
        tet_a,
        tet_b,
        slot_a,
        slot_b,
        labels_a,
        labels_b,
        new_tets,
        tet_map,
        edge_map: vec![],
        face_map: vec![],
        new_edge: 0,
    };

    let (a, b) = mv.apexes();
    let mut gluing = vec![[FaceSlot { tet: 0, slot: 0 }; 4]; n + 1];
    for t in 0..n {
        if let Some(nt) = mv.tet_map[t] {
            for s in 0..4 {
                gluing[nt][s] = mv.map_slot(tri.glued_to(t, s));
            }
        }
    }
    for (old_tet, map, apex) in [(tet_a, labels_a, b), (tet_b, labels_b, a)] {
        for s in 0..4 {
            if (old_tet == tet_a && s == slot_a) || (old_tet == tet_b && s == slot_b) {
                continue;
            }
            let here = mv.new_face(map[s], apex);
            gluing[here.tet][here.slot] = mv.map_slot(tri.glued_to(old_tet, s));
        }
    }
    for x in 0..3 {
        for y in 0..3 {
            if x != y {
                let here = mv.new_face(face_labels[x], face_labels[y]);
                let there = mv.new_face(face_labels[y], face_labels[x]);
                gluing[here.tet][here.slot] = there;
            }
        }
    }
    let after = Triangulation::from_gluing(gluing).map_err(|e| match e {
        TriangulationError::NotOrdered { .. } => PachnerError::OrderingObstruction,
        other => PachnerError::Triangulation(other),
    })?;

    let first = n - 2;
    let edge_at = |tri_new: &Triangulation, l0: usize, l1: usize| {
        let x = (0..3).find(|&x| new_tets[x].contains(&l0) && new_tets[x].contains(&l1)).expect("edge in bipyramid");
        let p = |l: usize| new_tets[x].iter().position(|&m| m == l).expect("label");
        tri_new.edge_class(first + x, p(l0), p(l1))
    };
    mv.edge_map = (0..tri.num_edge_classes())
        .map(|k| {
            let (t, e) = tri.edge_members(k)[0];
            let (i, j) = EDGES[e];
            if let Some(nt) = mv.tet_map[t] {
                after.edge_class(nt, i, j)
            } else {
                let map = if t == tet_a { &labels_a } else { &labels_b };
                edge_at(&after, map[i], map[j])
            }
        })
        .collect();
    mv.new_edge = edge_at(&after, a, b);
    mv.face_map = (0..tri.num_face_classes())
        .map(|f| {
            let side = tri.face_sides(f)[0];
            if tri.face_class(tet_a, slot_a) == f {
                None
            } else {
                let ns = mv.map_slot(side);
                Some(after.face_class(ns.tet, ns.slot))
            }
        })
        .collect();
    mv.after = after;
    Ok(mv)
}

/// Transports face weights so that every closed dual path keeps its value.
pub fn transport_weights(mv: &PachnerMove, w: &FaceWeights) -> FaceWeights {
    let old = lift_exponents(&mv.before, w);
    let shift = old[mv.tet_b][mv.slot_b] - old[mv.tet_a][mv.slot_a];
    let (a, b) = mv.apexes();
    let mut k = vec![[0i64; 4]; mv.after.num_tets()];
    for (t, nt) in mv.tet_map.iter().enumerate() {
        if let Some(nt) = nt {
            k[*nt] = old[t];
        }
    }
    for s in 0..4 {
        if s != mv.slot_a {
            let f = mv.new_face(mv.labels_a[s], b);
            k[f.tet][f.slot] = old[mv.tet_a][s];
        }
        if s != mv.slot_b {
            let f = mv.new_face(mv.labels_b[s], a);
            k[f.tet][f.slot] = old[mv.tet_b][s] - shift;
        }
    }
    let after = &mv.after;
    FaceWeights(
        (0..after.num_face_classes())
            .map(|f| {
                let [s0, s1] = after.face_sides(f);
                k[s1.tet][s1.slot] - k[s0.tet][s0.slot]
            })
            .collect(),
    )
}

/// Transports σ: short edges on surviving faces keep their values, the new
/// ones follow from triangle multiplicativity with one gauge value 1 per
/// undetermined cusp-triangulation vertex.
pub fn transport_sigma<S: Scalar>(mv: &PachnerMove, sigma: &SigmaCocycle<S>) -> Result<SigmaCocycle<S>, PachnerError> {
    let after = &mv.after;
    let ctx = sigma.values()[0].ctx();
    let mut vals: Vec<Option<S>> = vec![None; after.num_short_classes()];
    let first = mv.first_new();
    for (t, nt) in mv.tet_map.iter().enumerate() {
        if let Some(nt) = nt {
            for (v, j, k) in local_short_edges() {
                vals[after.short_class(*nt, v, j, k)] = Some(sigma.local(&mv.before, t, v, j, k));
            }
        }
    }
    for x in 0..3 {
        let lab = mv.new_tets[x];
        for (v, j, k) in local_short_edges() {
            if let Some((tet, old)) = mv.old_local(&[lab[v], lab[j], lab[k]]) {
                vals[after.short_class(first + x, v, j, k)] = Some(sigma.local(&mv.before, tet, old[0], old[1], old[2]));
            }
        }
    }
    let get = |vals: &Vec<Option<S>>, t: usize, v: usize, p: usize, q: usize| -> Option<S> {
        let c = after.short_class(t, v, p, q);
        vals[c].clone().map(|x| if p < q { x } else { x.inv().expect("σ invertible") })
    };
    let set = |vals: &mut Vec<Option<S>>, t: usize, v: usize, p: usize, q: usize, x: S| {
        let c = after.short_class(t, v, p, q);
        vals[c] = Some(if p < q { x } else { x.inv().expect("σ invertible") });
    };
    loop {
        let mut progress = false;
        let mut pending = None;
        for t in first..after.num_tets() {
            for v in 0..4 {
                let o: Vec<usize> = (0..4).filter(|&u| u != v).collect();
                let s01 = get(&vals, t, v, o[0], o[1]);
                let s12 = get(&vals, t, v, o[1], o[2]);
                let s02 = get(&vals, t, v, o[0], o[2]);
                match (s01, s12, s02) {
                    (Some(x), Some(y), None) => set(&mut vals, t, v, o[0], o[2], x * y),
                    (Some(x), None, Some(z)) => set(&mut vals, t, v, o[1], o[2], x.inv().expect("σ invertible") * z),
                    (None, Some(y), Some(z)) => set(&mut vals, t, v, o[0], o[1], z * y.inv().expect("σ invertible")),
                    (Some(_), Some(_), Some(_)) => continue,
                    _ => {
                        pending.get_or_insert((t, v));
                        continue;
                    }
                }
                progress = true;
            }
        }
        if progress {
            continue;
        }
        match pending {
            Some((t, v)) => {
                let o: Vec<usize> = (0..4).filter(|&u| u != v).collect();
                let (p, q) = [(o[0], o[1]), (o[1], o[2]), (o[0], o[2])]
                    .into_iter()
                    .find(|&(p, q)| get(&vals, t, v, p, q).is_none())
                    .expect("undetermined short edge");
                set(&mut vals, t, v, p, q, S::one(&ctx));
            }
            None => break,
        }
    }
    let values = vals.into_iter().map(|v| v.unwrap_or_else(|| S::one(&ctx))).collect();
    Ok(SigmaCocycle::new(after, values)?)
}

/// Transports edge values; the new edge is solved from the relation of the
/// first new tetrahedron and checked against all three.
pub fn transport_ptolemy<S: Scalar>(
    mv: &PachnerMove,
    c: &[S],
    sigma_after: Option<&SigmaCocycle<S>>,
) -> Result<Vec<S>, PachnerError> {
    let after = &mv.after;
    let ctx = c[0].ctx();
    let mut out = vec![S::zero(&ctx); after.num_edge_classes()];
    for (k, &nk) in mv.edge_map.iter().enumerate() {
        out[nk] = c[k].clone();
    }
    let first = mv.first_new();
    let residual = |t: usize, vals: &[S]| {
        let local: [S; 6] = std::array::from_fn(|e| vals[after.edge_class(t, EDGES[e].0, EDGES[e].1)].clone());
        let k = match sigma_after {
            Some(s) => TetCoefficients::of(after, s, t),
            None => TetCoefficients::trivial(&ctx),
        };
        crate::ptolemy::tet_ptolemy_residual(&local, &k)
    };
    let mut probe = out.clone();
    probe[mv.new_edge] = S::zero(&ctx);
    let beta = residual(first, &probe);
    probe[mv.new_edge] = S::one(&ctx);
    let alpha = residual(first, &probe) - beta.clone();
    if alpha.is_zero() {
        return Err(PachnerError::DegenerateTransport("new edge does not enter the relation"));
    }
    out[mv.new_edge] = -beta.div(&alpha).map_err(PtolemyError::from)?;
    if out[mv.new_edge].is_zero() {
        return Err(PachnerError::DegenerateTransport("new edge value vanishes"));
    }
    for t in 0..after.num_tets() {
        if !residual(t, &out).is_zero() {
            return Err(PachnerError::TransportFailed(t));
        }
    }
    Ok(out)
}

/// Outcome of comparing `δ(t)` across one move.
#[derive(Debug, Clone)]
pub struct PachnerReport<S: Scalar> {
    pub before: LaurentPoly<S>,
    pub after: LaurentPoly<S>,
    /// Equal after normalization.
    pub equal: bool,
    /// Equal up to a nonzero scalar.
    pub equal_up_to_scalar: bool,
    pub new_edge_value: S,
}

pub fn pachner_invariance_check<S: Scalar>(
    tri: &Triangulation,
    c: &[S],
    weights: &FaceWeights,
    sigma: Option<&SigmaCocycle<S>>,
    tet_a: usize,
    tet_b: usize,
    slot: usize,
) -> Result<PachnerReport<S>, PachnerError> {
    let mv = two_three_move(tri, tet_a, tet_b, slot)?;
    let sigma_after = sigma.map(|s| transport_sigma(&mv, s)).transpose()?;
    let c_after = transport_ptolemy(&mv, c, sigma_after.as_ref())?;
    let w_after = transport_weights(&mv, weights);
    let before = one_loop_polynomial(tri, c, &EdgeChoice::uniform(tri.num_tets(), 0), weights, sigma)?;
    let after = one_loop_polynomial(
        &mv.after,
        &c_after,
        &EdgeChoice::uniform(mv.after.num_tets(), 0),
        &w_after,
        sigma_after.as_ref(),
    )?;
    let equal = before == after;
    let equal_up_to_scalar = match (monic(&before), monic(&after)) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    };
    Ok(PachnerReport { before, after, equal, equal_up_to_scalar, new_edge_value: c_after[mv.new_edge].clone() })
}

/// The local edge index of labels `(l0, l1)` in a new tetrahedron.
pub fn new_tet_edge(labels: &[usize; 4], l0: usize, l1: usize) -> Option<usize> {
    let p0 = labels.iter().position(|&l| l == l0)?;
    let p1 = labels.iter().position(|&l| l == l1)?;
    (p0 != p1).then(|| edge_index(p0, p1))
}
