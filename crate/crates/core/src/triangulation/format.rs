//! Line-oriented text format.
//!
//! ```text
//! tetrahedra 2
//! glue 0 0 -> 1 2
//! faceweight 1 1
//! param m 1
//! sigma 7 l*m^2
//! dualloop a +1 -0
//! path meridian -s1
//! c 1 1/2+1/2*sqrt(-3)
//! theta 0 e1
//! ```
//!
//! `#` starts a comment.  A `glue` line may end with a vertex map such as
//! `1023`, listing the images of vertices 0..3; without one the
//! order-preserving map is implied.

use std::collections::BTreeMap;
use std::path::Path;

use super::{Crossing, FaceSlot, FaceWeights, Triangulation, TriangulationError};
use crate::expr::Expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathStepKind {
    /// A short-edge class.
    Short,
    /// A long edge given by its edge class.
    Long,
}

/// One signed item of a peripheral path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathStep {
    pub kind: PathStepKind,
    pub id: usize,
    pub forward: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualLoop {
    pub name: String,
    pub crossings: Vec<Crossing>,
}

/// A literal kept with its source text.
#[derive(Debug, Clone, PartialEq)]
pub struct Literal {
    pub text: String,
    pub expr: Expr,
}

/// Everything a triangulation file can carry.
#[derive(Debug, Clone)]
pub struct TriangulationFile {
    pub triangulation: Triangulation,
    pub weights: Option<FaceWeights>,
    pub params: Vec<(String, Literal)>,
    pub sigma: BTreeMap<usize, Literal>,
    pub dual_loops: Vec<DualLoop>,
    pub paths: Vec<(String, Vec<PathStep>)>,
    pub c: BTreeMap<usize, Literal>,
    pub theta: BTreeMap<usize, Literal>,
}

impl TriangulationFile {
    pub fn param(&self, name: &str) -> Option<&Literal> {
        self.params.iter().find(|(n, _)| n == name).map(|(_, l)| l)
    }

    pub fn path(&self, name: &str) -> Option<&[PathStep]> {
        self.paths.iter().find(|(n, _)| n == name).map(|(_, p)| p.as_slice())
    }

    /// Canonical text; parsing it gives back an equal file.
    pub fn render(&self) -> String {
        let tri = &self.triangulation;
        let mut out = format!("tetrahedra {}\n", tri.num_tets());
        for f in 0..tri.num_face_classes() {
            let [a, b] = tri.face_sides(f);
            out += &format!("glue {} {} -> {} {}\n", a.tet, a.slot, b.tet, b.slot);
        }
        if let Some(w) = &self.weights {
            for (f, v) in w.0.iter().enumerate() {
                if *v != 0 {
                    out += &format!("faceweight {f} {v}\n");
                }
            }
        }
        for (name, lit) in &self.params {
            out += &format!("param {name} {}\n", lit.text);
        }
        for (id, lit) in &self.sigma {
            out += &format!("sigma {id} {}\n", lit.text);
        }
        for l in &self.dual_loops {
            let items: Vec<String> =
                l.crossings.iter().map(|c| format!("{}{}", if c.forward { '+' } else { '-' }, c.face)).collect();
            out += &format!("dualloop {} {}\n", l.name, items.join(" "));
        }
        for (name, steps) in &self.paths {
            let items: Vec<String> = steps
                .iter()
                .map(|s| {
                    let sign = if s.forward { '+' } else { '-' };
                    let kind = match s.kind {
                        PathStepKind::Short => 's',
                        PathStepKind::Long => 'L',
                    };
                    format!("{sign}{kind}{}", s.id)
                })
                .collect();
            out += &format!("path {name} {}\n", items.join(" "));
        }
        for (id, lit) in &self.c {
            out += &format!("c {id} {}\n", lit.text);
        }
        for (id, lit) in &self.theta {
            out += &format!("theta {id} {}\n", lit.text);
        }
        out
    }
}

/// Reads and parses a triangulation file from disk.
pub fn parse_triangulation_file(path: &Path) -> Result<TriangulationFile, std::io::Error> {
    let text = std::fs::read_to_string(path)?;
    parse_triangulation(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
}

struct Cursor<'a> {
    line: usize,
    raw: &'a str,
    tokens: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(line: usize, raw: &'a str) -> Self {
        let mut tokens = vec![];
        let mut start = None;
        for (i, ch) in raw.char_indices() {
            if ch.is_whitespace() {
                if let Some(s) = start.take() {
                    tokens.push((s, &raw[s..i]));
                }
            } else if start.is_none() {
                start = Some(i);
            }
        }
        if let Some(s) = start {
            tokens.push((s, &raw[s..]));
        }
        Cursor { line, raw, tokens, pos: 0 }
    }

    fn err(&self, column: usize, message: impl Into<String>) -> TriangulationError {
        TriangulationError::Syntax { line: self.line, column: column + 1, message: message.into() }
    }

    fn column(&self) -> usize {
        self.tokens.get(self.pos).map(|t| t.0).unwrap_or(self.raw.len())
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str), TriangulationError> {
        let t = self.tokens.get(self.pos).copied().ok_or_else(|| self.err(self.raw.len(), format!("expected {what}")))?;
        self.pos += 1;
        Ok(t)
    }

    fn peek(&self) -> Option<&'a str> {
        self.tokens.get(self.pos).map(|t| t.1)
    }

    fn usize(&mut self, what: &str) -> Result<usize, TriangulationError> {
        let (col, tok) = self.next(what)?;
        tok.parse().map_err(|_| self.err(col, format!("expected {what}, found '{tok}'")))
    }

    fn i64(&mut self, what: &str) -> Result<i64, TriangulationError> {
        let (col, tok) = self.next(what)?;
        tok.parse().map_err(|_| self.err(col, format!("expected {what}, found '{tok}'")))
    }

    fn keyword(&mut self, kw: &str) -> Result<(), TriangulationError> {
        let (col, tok) = self.next(&format!("'{kw}'"))?;
        if tok != kw {
            return Err(self.err(col, format!("expected '{kw}', found '{tok}'")));
        }
        Ok(())
    }

    fn name(&mut self) -> Result<&'a str, TriangulationError> {
        let (col, tok) = self.next("a name")?;
        let mut chars = tok.chars();
        let ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !ok {
            return Err(self.err(col, format!("invalid name '{tok}'")));
        }
        Ok(tok)
    }

    fn rest_literal(&mut self) -> Result<Literal, TriangulationError> {
        let col = self.column();
        if col >= self.raw.len() {
            return Err(self.err(col, "expected a literal"));
        }
        let text = self.raw[col..].trim().to_string();
        self.pos = self.tokens.len();
        let expr = Expr::parse(&text).map_err(|e| self.err(col + e.column.saturating_sub(1), e.message))?;
        Ok(Literal { text, expr })
    }

    fn end(&self) -> Result<(), TriangulationError> {
        match self.tokens.get(self.pos) {
            Some(&(col, tok)) => Err(self.err(col, format!("unexpected '{tok}'"))),
            None => Ok(()),
        }
    }
}

fn signed_token(tok: &str) -> Option<(bool, &str)> {
    if let Some(r) = tok.strip_prefix('+') {
        Some((true, r))
    } else {
        tok.strip_prefix('-').map(|r| (false, r))
    }
}

/// Parses and validates a triangulation file.
pub fn parse_triangulation(text: &str) -> Result<TriangulationFile, TriangulationError> {
    let mut n = None;
    let mut table: Vec<[Option<(FaceSlot, usize)>; 4]> = vec![];
    let mut order_violation: Option<(usize, usize)> = None;
    let mut weights: Vec<(usize, usize, i64)> = vec![];
    let mut params: Vec<(String, Literal)> = vec![];
    let mut sigma: Vec<(usize, usize, Literal)> = vec![];
    let mut loops: Vec<(usize, DualLoop)> = vec![];
    let mut paths: Vec<(usize, String, Vec<PathStep>)> = vec![];
    let mut cs: Vec<(usize, usize, Literal)> = vec![];
    let mut thetas: Vec<(usize, usize, Literal)> = vec![];

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let raw = raw_line.split('#').next().unwrap_or("");
        let mut cur = Cursor::new(line_no, raw);
        let Some(kw) = cur.peek() else { continue };
        let kw_col = cur.column();
        cur.pos += 1;
        if n.is_none() && kw != "tetrahedra" {
            return Err(cur.err(kw_col, "expected 'tetrahedra <N>' first"));
        }
        match kw {
            "tetrahedra" => {
                if n.is_some() {
                    return Err(cur.err(kw_col, "duplicate 'tetrahedra' line"));
                }
                let count = cur.usize("a tetrahedron count")?;
                if count == 0 {
                    return Err(cur.err(kw_col, "at least one tetrahedron is required"));
                }
                n = Some(count);
                table = vec![[None; 4]; count];
            }
            "glue" => {
                let count = n.unwrap_or(0);
                let t = cur.usize("a tetrahedron index")?;
                let k = cur.usize("a face slot")?;
                cur.keyword("->")?;
                let t2 = cur.usize("a tetrahedron index")?;
                let k2 = cur.usize("a face slot")?;
                for (v, what) in [(t, "tetrahedron"), (t2, "tetrahedron")] {
                    if v >= count {
                        return Err(TriangulationError::SlotOutOfRange { line: line_no, what: format!("{what} {v}") });
                    }
                }
                for v in [k, k2] {
                    if v >= 4 {
                        return Err(TriangulationError::SlotOutOfRange { line: line_no, what: format!("face slot {v}") });
                    }
                }
                if let Some(tok) = cur.peek() {
                    let col = cur.column();
                    cur.pos += 1;
                    let map: Vec<usize> = tok.chars().filter_map(|c| c.to_digit(10).map(|d| d as usize)).collect();
                    let mut sorted = map.clone();
                    sorted.sort_unstable();
                    if tok.len() != 4 || sorted != [0, 1, 2, 3] {
                        return Err(cur.err(col, format!("invalid vertex map '{tok}'")));
                    }
                    if map[k] != k2 {
                        return Err(TriangulationError::InvalidVertexMap {
                            line: line_no,
                            map: tok.to_string(),
                            slot: k,
                            target: k2,
                        });
                    }
                    let fv = super::face_vertices(k);
                    let images: Vec<usize> = fv.iter().map(|&v| map[v]).collect();
                    if images.windows(2).any(|w| w[0] > w[1]) && order_violation.is_none() {
                        order_violation = Some((t, k));
                    }
                }
                cur.end()?;
                let here = FaceSlot { tet: t, slot: k };
                let there = FaceSlot { tet: t2, slot: k2 };
                for (a, b) in [(here, there), (there, here)] {
                    match table[a.tet][a.slot] {
                        None => table[a.tet][a.slot] = Some((b, line_no)),
                        Some((prev, _)) if prev == b => {}
                        Some((prev, prev_line)) => {
                            return Err(TriangulationError::GluingNotInvolutive(format!(
                                "line {line_no}: ({},{}) already glued to ({},{}) on line {prev_line}",
                                a.tet, a.slot, prev.tet, prev.slot
                            )))
                        }
                    }
                }
            }
            "faceweight" => {
                let f = cur.usize("a face class id")?;
                let w = cur.i64("an integer weight")?;
                cur.end()?;
                weights.push((line_no, f, w));
            }
            "param" => {
                let name = cur.name()?.to_string();
                let lit = cur.rest_literal()?;
                if params.iter().any(|(p, _)| *p == name) {
                    return Err(cur.err(kw_col, format!("duplicate parameter '{name}'")));
                }
                params.push((name, lit));
            }
            "sigma" => {
                let id = cur.usize("a short-edge class id")?;
                sigma.push((line_no, id, cur.rest_literal()?));
            }
            "c" => {
                let id = cur.usize("an edge class id")?;
                cs.push((line_no, id, cur.rest_literal()?));
            }
            "theta" => {
                let id = cur.usize("a face class id")?;
                thetas.push((line_no, id, cur.rest_literal()?));
            }
            "dualloop" => {
                let name = cur.name()?.to_string();
                let mut crossings = vec![];
                while cur.peek().is_some() {
                    let (col, tok) = cur.next("a crossing")?;
                    let (forward, rest) =
                        signed_token(tok).ok_or_else(|| cur.err(col, format!("expected a signed face id, found '{tok}'")))?;
                    let face = rest.parse().map_err(|_| cur.err(col, format!("expected a signed face id, found '{tok}'")))?;
                    crossings.push(Crossing { face, forward });
                }
                if crossings.is_empty() {
                    return Err(cur.err(raw.len(), "expected at least one crossing"));
                }
                loops.push((line_no, DualLoop { name, crossings }));
            }
            "path" => {
                let name = cur.name()?.to_string();
                let mut steps = vec![];
                while cur.peek().is_some() {
                    let (col, tok) = cur.next("a path step")?;
                    let bad = || cur.err(col, format!("expected a step like +s3 or -L0, found '{tok}'"));
                    let (forward, rest) = signed_token(tok).ok_or_else(bad)?;
                    let (kind, num) = if let Some(r) = rest.strip_prefix('s') {
                        (PathStepKind::Short, r)
                    } else if let Some(r) = rest.strip_prefix('L') {
                        (PathStepKind::Long, r)
                    } else {
                        return Err(bad());
                    };
                    let id = num.parse().map_err(|_| bad())?;
                    steps.push(PathStep { kind, id, forward });
                }
                if steps.is_empty() {
                    return Err(cur.err(raw.len(), "expected at least one step"));
                }
                paths.push((line_no, name, steps));
            }
            other => return Err(cur.err(kw_col, format!("unknown directive '{other}'"))),
        }
    }

    let Some(count) = n else {
        return Err(TriangulationError::Syntax { line: 1, column: 1, message: "missing 'tetrahedra <N>' line".into() });
    };
    let mut gluing = Vec::with_capacity(count);
    for (t, row) in table.iter().enumerate() {
        let mut out = [FaceSlot { tet: 0, slot: 0 }; 4];
        for (k, entry) in row.iter().enumerate() {
            out[k] = entry
                .ok_or_else(|| TriangulationError::GluingNotInvolutive(format!("face ({t},{k}) is not glued")))?
                .0;
        }
        gluing.push(out);
    }
    for (t, row) in gluing.iter().enumerate() {
        for (k, g) in row.iter().enumerate() {
            if g.tet == t && g.slot == k {
                return Err(TriangulationError::GluingNotInvolutive(format!("({t},{k}) glued to itself")));
            }
        }
    }
    if let Some((tet, slot)) = order_violation {
        return Err(TriangulationError::NotOrdered { tet, slot });
    }
    let tri = Triangulation::from_gluing(gluing)?;

    let check = |line: usize, kind: &'static str, id: usize, bound: usize| {
        if id < bound {
            Ok(())
        } else {
            Err(TriangulationError::UnknownClass { line, kind, id })
        }
    };
    let face_weights = if weights.is_empty() {
        None
    } else {
        let mut w = FaceWeights::zero(tri.num_face_classes());
        for (line, f, v) in weights {
            check(line, "face", f, tri.num_face_classes())?;
            w.0[f] = v;
        }
        Some(w)
    };
    let mut sigma_map = BTreeMap::new();
    for (line, id, lit) in sigma {
        check(line, "short-edge", id, tri.num_short_classes())?;
        sigma_map.insert(id, lit);
    }
    let mut c_map = BTreeMap::new();
    for (line, id, lit) in cs {
        check(line, "edge", id, tri.num_edge_classes())?;
        c_map.insert(id, lit);
    }
    let mut theta_map = BTreeMap::new();
    for (line, id, lit) in thetas {
        check(line, "face", id, tri.num_face_classes())?;
        theta_map.insert(id, lit);
    }
    let mut dual_loops = vec![];
    for (line, l) in loops {
        for c in &l.crossings {
            check(line, "face", c.face, tri.num_face_classes())?;
        }
        dual_loops.push(l);
    }
    let mut path_list = vec![];
    for (line, name, steps) in paths {
        for s in &steps {
            match s.kind {
                PathStepKind::Short => check(line, "short-edge", s.id, tri.num_short_classes())?,
                PathStepKind::Long => check(line, "edge", s.id, tri.num_edge_classes())?,
            }
        }
        path_list.push((name, steps));
    }
    Ok(TriangulationFile {
        triangulation: tri,
        weights: face_weights,
        params,
        sigma: sigma_map,
        dual_loops,
        paths: path_list,
        c: c_map,
        theta: theta_map,
    })
}
