//! Development of cusp link triangulations.
//!
//! Each ideal vertex of the triangulation carries a link surface: one
//! Euclidean triangle per incident tetrahedron corner, glued edge-to-edge
//! across the faces.  In the tangency decoration (all horoballs pairwise
//! tangent) every triangle has unit sides, and its corner angles are the
//! dihedral angles arg z, arg 1/(1-z), arg (z-1)/z of the ambient
//! tetrahedron.  A breadth-first walk develops the triangles into ℂ and
//! yields
//!
//!   * a flat chart per corner together with the abelianized word of face
//!     pairings joining it to the seed corner (the datum the cocycle
//!     pullback onto the cusp shells consumes),
//!   * deck transformations z ↦ αz + β — glides α·z̄ + β on nonorientable
//!     links — harvested whenever the walk re-enters a developed corner;
//!     their pure translations span the cross-section lattice, and on a
//!     Klein-bottle link the shortest glide supplies the (ξ, η) data of the
//!     quotient.
//!
//! The combinatorial side is the link Δ-complex: vertices are half-edge
//! classes, edges are matched pairs of triangle sides, faces are the corners.
//! Its 4^r refinement grids the cross-section for the neck meshes.  Grid
//! points and grid segments are named by provenance — corner of a half-edge
//! class, i-th point along an edge class, interior point of one corner —
//! because small links contain loops and parallel edges (the Klein-bottle
//! link of the one-tetrahedron nonorientable manifold has V = 2, E = 6,
//! F = 4) that coordinate pairs would alias.

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::io::ManifoldFile;
use crate::lattice::FlatSection;
use crate::manifold::{edge_index, half_edge_index, Triangulation, EDGE_PARAM_SLOT};

/// The three vertex labels adjacent to corner `v`, ascending.
pub fn others(v: usize) -> [usize; 3] {
    let mut out = [0usize; 3];
    let mut k = 0;
    for w in 0..4 {
        if w != v {
            out[k] = w;
            k += 1;
        }
    }
    out
}

/// Position of `w` in `others(v)`.
pub fn slot_of(v: usize, w: usize) -> usize {
    debug_assert!(v != w && w < 4);
    if w < v {
        w
    } else {
        w - 1
    }
}

/// Corner angle of the link triangle of `(t, v)` at its vertex on edge
/// `{v, w}`: the dihedral angle along that edge, read off the shape parameter
/// of the edge's slot.
fn corner_angle(z: Complex64, v: usize, w: usize) -> f64 {
    let one = Complex64::new(1.0, 0.0);
    match EDGE_PARAM_SLOT[edge_index(v, w)] {
        0 => z.arg(),
        1 => (one / (one - z)).arg(),
        _ => ((z - one) / z).arg(),
    }
}

/// A deck transformation of the developed link: `z -> alpha*z + beta`, or
/// `z -> alpha*conj(z) + beta` when `flip`, together with the abelianized
/// face-pairing word of the loop that produced it.
#[derive(Clone, Debug)]
pub struct Deck {
    pub flip: bool,
    pub alpha: Complex64,
    pub beta: Complex64,
    pub genvec: Vec<i64>,
}

/// Glide data of a Klein-bottle link: `xi` is half the translation part of
/// the shortest glide (the glide-core geodesic has length `|xi|`), `eta` the
/// shortest pure translation orthogonal to the glide axis, and
/// `(alpha, beta)` the chosen glide itself.
#[derive(Clone, Debug)]
pub struct GlideData {
    pub xi: Complex64,
    pub eta: Complex64,
    pub alpha: Complex64,
    pub beta: Complex64,
}

/// A developed cusp link: charts, deck group, and Δ-complex structure.
#[derive(Clone, Debug)]
pub struct LinkComplex {
    /// Cusp index (position in `vertex_classes` order).
    pub cusp: usize,
    /// Whether the link surface is orientable (torus vs Klein bottle).
    pub orientable: bool,
    /// Corners `(t, v)` in ascending order; these are the faces of the link.
    pub corners: Vec<(usize, usize)>,
    /// Half-edge class of each corner vertex, slots in `others(v)` order.
    pub verts: Vec<[usize; 3]>,
    /// Developed position of each corner vertex, same slot order.
    pub pos: Vec<[Complex64; 3]>,
    /// Per corner `(link edge class, flip)` for the side crossing face
    /// `others(v)[j]`; `flip` records that the side's ascending direction
    /// (lower slot to higher slot) runs against the class orientation.
    pub sides: Vec<[(usize, bool); 3]>,
    /// The two `(corner, side)` incidences of each link edge class; the first
    /// one defines the class orientation.
    pub edge_sides: Vec<[(usize, usize); 2]>,
    /// Abelianized face-pairing word from the seed corner to each corner.
    pub words: Vec<Vec<i64>>,
    /// Deck transformations found at walk re-entries.
    pub decks: Vec<Deck>,
    /// Number of face pairings of the ambient triangulation (word length).
    pub n_pairings: usize,
    /// Largest chart mismatch across all deck fits.
    pub dev_residual: f64,
    corner_index: HashMap<(usize, usize), usize>,
}

fn vec_sub(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn cross(u: Complex64, w: Complex64) -> f64 {
    u.re * w.im - u.im * w.re
}

/// Fit `z -> alpha*z + beta` (or the conjugated form) sending `e` to `n`
/// exactly on two points; the residual on the third decides the chirality.
fn fit_similarity(e: [Complex64; 3], n: [Complex64; 3]) -> Result<(Complex64, Complex64, bool, f64)> {
    let al = (n[1] - n[0]) / (e[1] - e[0]);
    let be = n[0] - al * e[0];
    let r = (al * e[2] + be - n[2]).norm();
    if r < 1e-7 {
        return Ok((al, be, false, r));
    }
    let al = (n[1] - n[0]) / (e[1] - e[0]).conj();
    let be = n[0] - al * e[0].conj();
    let rc = (al * e[2].conj() + be - n[2]).norm();
    if rc < 1e-7 {
        return Ok((al, be, true, rc));
    }
    Err(Error::Internal(format!(
        "link development re-entry fits neither chirality \
         (residuals {r:.3e} / {rc:.3e})"
    )))
}

impl LinkComplex {
    /// Develop the link of one cusp.  The seed corner is the least `(t, v)`;
    /// its triangle is placed with vertices 0, 1, e^{iθ} (θ the angle at the
    /// vertex on the edge to the least adjacent label) and the walk proceeds
    /// breadth-first across the faces.
    pub fn develop(tri: &Triangulation, shapes: &[Complex64], cusp: usize) -> Result<LinkComplex> {
        if shapes.len() != tri.n {
            return Err(Error::Precondition(format!(
                "{} shapes for {} tetrahedra",
                shapes.len(),
                tri.n
            )));
        }
        let vcls = tri.vertex_classes();
        let cls = vcls.get(cusp).ok_or_else(|| {
            Error::Precondition(format!("cusp {cusp} of {} does not exist", vcls.len()))
        })?;
        let corners: Vec<(usize, usize)> = cls.iter().map(|&x| (x / 4, x % 4)).collect();
        let corner_index: HashMap<(usize, usize), usize> =
            corners.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let orientable = tri.cusp_orientable(cls);
        let (pl, dmap) = tri.pairings();
        let npair = pl.len();

        let nan = Complex64::new(f64::NAN, f64::NAN);
        let mut pos: Vec<Option<[Complex64; 4]>> = vec![None; corners.len()];
        let mut words: Vec<Option<Vec<i64>>> = vec![None; corners.len()];
        let mut decks = Vec::new();
        let mut dev_residual = 0.0f64;

        let (t0, v0) = corners[0];
        let oth0 = others(v0);
        let th = corner_angle(shapes[t0], v0, oth0[0]);
        let mut seedpos = [nan; 4];
        seedpos[oth0[0]] = Complex64::new(0.0, 0.0);
        seedpos[oth0[1]] = Complex64::new(1.0, 0.0);
        seedpos[oth0[2]] = Complex64::from_polar(1.0, th);
        pos[0] = Some(seedpos);
        words[0] = Some(vec![0i64; npair]);

        let mut queue = VecDeque::from([0usize]);
        while let Some(ci) = queue.pop_front() {
            let (t, v) = corners[ci];
            let oth = others(v);
            let cur = pos[ci].unwrap();
            let curword = words[ci].clone().unwrap();
            for &o in &oth {
                let mut sh = oth.iter().copied().filter(|&w| w != o);
                let (sh1, sh2) = (sh.next().unwrap(), sh.next().unwrap());
                let (t2, p) = tri.glue[t][o];
                let nci = corner_index[&(t2, p.apply(v))];
                let (k, s) = dmap[4 * t + o];
                let (pa, pb, po) = (cur[sh1], cur[sh2], cur[o]);
                // the crossed triangle shares the segment pa--pb and lies on
                // the side opposite the current third vertex
                let th2 = corner_angle(shapes[t2], p.apply(v), p.apply(sh1));
                let rot = Complex64::from_polar(1.0, th2);
                let cand1 = pa + (pb - pa) * rot;
                let cand2 = pa + (pb - pa) * rot.conj();
                let s_old = cross(pb - pa, po - pa);
                let s_1 = cross(pb - pa, cand1 - pa);
                let new3 = if s_1 * s_old < 0.0 { cand1 } else { cand2 };
                let mut newpos = [nan; 4];
                newpos[p.apply(sh1)] = pa;
                newpos[p.apply(sh2)] = pb;
                newpos[p.apply(o)] = new3;
                let mut wvec = curword.clone();
                wvec[k] += s as i64;
                match &words[nci] {
                    None => {
                        pos[nci] = Some(newpos);
                        words[nci] = Some(wvec);
                        queue.push_back(nci);
                    }
                    Some(prev) => {
                        // deck transformation carrying the stored chart of
                        // `nci` onto this new copy
                        let e = pos[nci].unwrap();
                        let mut labels = [p.apply(sh1), p.apply(sh2), p.apply(o)];
                        labels.sort_unstable();
                        let ev = labels.map(|l| e[l]);
                        let nv = labels.map(|l| newpos[l]);
                        let (alpha, beta, flip, res) = fit_similarity(ev, nv)?;
                        dev_residual = dev_residual.max(res);
                        decks.push(Deck {
                            flip,
                            alpha,
                            beta,
                            genvec: vec_sub(&wvec, prev),
                        });
                    }
                }
            }
        }
        if words.iter().any(Option::is_none) {
            return Err(Error::Internal(format!(
                "link of cusp {cusp} is not connected"
            )));
        }

        // Δ-complex structure: vertices from half-edge classes, edges from
        // matched triangle sides.
        let hcls = tri.half_edge_classes();
        let mut hclass_of = vec![usize::MAX; 12 * tri.n];
        for (k, c) in hcls.iter().enumerate() {
            for &h in c {
                hclass_of[h] = k;
            }
        }
        let nc = corners.len();
        let mut verts = vec![[0usize; 3]; nc];
        let mut posv = vec![[nan; 3]; nc];
        for ci in 0..nc {
            let (t, v) = corners[ci];
            let oth = others(v);
            let arr = pos[ci].unwrap();
            for j in 0..3 {
                verts[ci][j] = hclass_of[half_edge_index(t, v, oth[j])];
                posv[ci][j] = arr[oth[j]];
            }
        }
        let mut sides = vec![[(usize::MAX, false); 3]; nc];
        let mut edge_sides: Vec<[(usize, usize); 2]> = Vec::new();
        for ci in 0..nc {
            for j in 0..3 {
                if sides[ci][j].0 != usize::MAX {
                    continue;
                }
                let (t, v) = corners[ci];
                let oth = others(v);
                let o = oth[j];
                let (t2, p) = tri.glue[t][o];
                let ci2 = corner_index[&(t2, p.apply(v))];
                let j2 = slot_of(p.apply(v), p.apply(o));
                if (ci2, j2) == (ci, j) || sides[ci2][j2].0 != usize::MAX {
                    return Err(Error::Internal(format!(
                        "side pairing of corner ({t}, {v}) across face {o} is \
                         not an involution"
                    )));
                }
                let mut sh = oth.iter().copied().filter(|&w| w != o);
                let (sh1, sh2) = (sh.next().unwrap(), sh.next().unwrap());
                let flip2 = p.apply(sh1) > p.apply(sh2);
                let k = edge_sides.len();
                sides[ci][j] = (k, false);
                sides[ci2][j2] = (k, flip2);
                edge_sides.push([(ci, j), (ci2, j2)]);
            }
        }

        Ok(LinkComplex {
            cusp,
            orientable,
            corners,
            verts,
            pos: posv,
            sides,
            edge_sides,
            words: words.into_iter().map(Option::unwrap).collect(),
            decks,
            n_pairings: npair,
            dev_residual,
            corner_index,
        })
    }

    /// `(corner index, side index)` of the link side of corner `(t, v)` lying
    /// in face `o` of tet `t`.
    pub fn side_lookup(&self, t: usize, v: usize, o: usize) -> Option<(usize, usize)> {
        let ci = *self.corner_index.get(&(t, v))?;
        Some((ci, slot_of(v, o)))
    }

    /// V - E + F of the link surface; 0 for every torus or Klein bottle.
    pub fn euler_characteristic(&self) -> i64 {
        let verts: BTreeSet<usize> = self.verts.iter().flatten().copied().collect();
        verts.len() as i64 - self.edge_sides.len() as i64 + self.corners.len() as i64
    }

    /// The translation lattice of the deck group, Lagrange-reduced and
    /// positively oriented.  Glide pairs are composed first so that
    /// nonorientable links contribute the translations of their orientation
    /// double cover.
    pub fn translation_lattice(&self) -> Result<(Complex64, Complex64)> {
        let mut iso: Vec<(bool, Complex64, Complex64)> = self
            .decks
            .iter()
            .map(|d| (d.flip, d.alpha, d.beta))
            .collect();
        let glides: Vec<(Complex64, Complex64)> = self
            .decks
            .iter()
            .filter(|d| d.flip)
            .map(|d| (d.alpha, d.beta))
            .collect();
        for &(a1, b1) in &glides {
            for &(a2, b2) in &glides {
                // g1 ∘ g2 : z -> a1 conj(a2 conj z + b2) + b1
                iso.push((false, a1 * a2.conj(), a1 * b2.conj() + b1));
            }
        }
        let trans: Vec<Complex64> = iso
            .into_iter()
            .filter(|&(f, al, be)| {
                !f && (al - Complex64::new(1.0, 0.0)).norm() < 1e-7 && be.norm() > 1e-9
            })
            .map(|(_, _, be)| be)
            .collect();
        reduce_translation_lattice(&trans)
    }

    /// Glide data of a nonorientable link; errs on orientable ones.
    pub fn klein_data(&self) -> Result<GlideData> {
        let (b1, b2) = self.translation_lattice()?;
        let mut best: Option<(Complex64, Complex64, Complex64)> = None;
        for d in &self.decks {
            if !d.flip {
                continue;
            }
            // translation part of the glide squared is beta + alpha*conj(beta)
            let tvec = d.beta + d.alpha * d.beta.conj();
            if best.is_none() || tvec.norm() < best.as_ref().unwrap().0.norm() {
                best = Some((tvec, d.alpha, d.beta));
            }
        }
        let (tvec, alpha, beta) = best.ok_or_else(|| {
            Error::Validation("link has no glide decks; it is orientable".into())
        })?;
        let xi = tvec / 2.0;
        let mut eta: Option<Complex64> = None;
        for i in -3i32..=3 {
            for j in -3i32..=3 {
                let v = i as f64 * b1 + j as f64 * b2;
                if v.norm() > 1e-9 && (v * tvec.conj()).re.abs() < 1e-7 * v.norm() {
                    if eta.is_none() || v.norm() < eta.unwrap().norm() {
                        eta = Some(v);
                    }
                }
            }
        }
        let eta = eta.ok_or_else(|| {
            Error::Internal("no deck translation orthogonal to the glide axis".into())
        })?;
        Ok(GlideData {
            xi,
            eta,
            alpha,
            beta,
        })
    }

    /// The cross-section in the normal form the manifold files use: for a
    /// torus, ξ rotated onto the positive real axis and η shifted into
    /// Im η > 0, Re η ∈ [0, ξ); for a Klein bottle, ξ = glide half-translation
    /// on the real axis and η the orthogonal translation on the imaginary
    /// axis.
    pub fn normalized_section(&self) -> Result<FlatSection> {
        if self.orientable {
            let (xi, eta) = self.translation_lattice()?;
            let sc = xi.norm();
            let mut en = xi.conj() * eta / sc;
            if en.im < 0.0 {
                en = en.conj();
            }
            en -= (en.re / sc).floor() * sc;
            FlatSection::torus(Complex64::new(sc, 0.0), en)
        } else {
            let g = self.klein_data()?;
            FlatSection::klein(
                Complex64::new(g.xi.norm(), 0.0),
                Complex64::new(0.0, g.eta.norm()),
            )
        }
    }

    /// Refine every corner triangle into `4^level` congruent pieces, naming
    /// the grid by provenance.
    pub fn subdivide(&self, level: u32) -> Result<SubdividedLink> {
        if level > 8 {
            return Err(Error::Precondition(format!(
                "refinement level {level} exceeds the supported bound 8"
            )));
        }
        let n = 1u32 << level;
        let mut tris = Vec::with_capacity(self.corners.len() * (n as usize) * (n as usize));
        for ci in 0..self.corners.len() {
            let p = self.pos[ci];
            let node_pos = |(a, b): (u32, u32)| {
                p[0] + (p[1] - p[0]) * (a as f64 / n as f64) + (p[2] - p[0]) * (b as f64 / n as f64)
            };
            let mut push = |nodes: [(u32, u32); 3]| {
                let mut edges = [(LinkEdgeId::Boundary { class: 0, seg: 0 }, false); 3];
                for j in 0..3 {
                    let (p1, p2) = (nodes[(j + 1) % 3], nodes[(j + 2) % 3]);
                    let (id, tail) = self.edge_of(n, ci, p1, p2);
                    edges[j] = (id, tail == p1);
                }
                tris.push(SmallTriangle {
                    corner: ci,
                    nodes,
                    verts: nodes.map(|q| self.node_lv(n, ci, q)),
                    pos: nodes.map(node_pos),
                    edges,
                });
            };
            for a in 0..n {
                for b in 0..(n - a) {
                    push([(a, b), (a + 1, b), (a, b + 1)]);
                    if a + b + 2 <= n {
                        push([(a + 1, b), (a + 1, b + 1), (a, b + 1)]);
                    }
                }
            }
        }
        Ok(SubdividedLink {
            level,
            grid: n,
            tris,
        })
    }

    /// Grid point `i` steps along side `j` of corner `ci` in the side's
    /// ascending direction (lower slot towards higher slot), `0 <= i <= n`.
    pub fn side_grid_lv(&self, n: u32, ci: usize, j: usize, i: u32) -> LinkVertexId {
        let (lo, hi) = match j {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        if i == 0 {
            return LinkVertexId::Corner(self.verts[ci][lo]);
        }
        if i == n {
            return LinkVertexId::Corner(self.verts[ci][hi]);
        }
        let (class, flip) = self.sides[ci][j];
        LinkVertexId::EdgeGrid {
            class,
            i: if flip { n - i } else { i },
        }
    }

    /// The grid segment between side params `i` and `i+1` of side `(ci, j)`,
    /// plus whether the class orientation runs with ascending side params.
    pub fn side_segment(&self, n: u32, ci: usize, j: usize, i: u32) -> (LinkEdgeId, bool) {
        let (class, flip) = self.sides[ci][j];
        if flip {
            (
                LinkEdgeId::Boundary {
                    class,
                    seg: n - 1 - i,
                },
                false,
            )
        } else {
            (LinkEdgeId::Boundary { class, seg: i }, true)
        }
    }

    fn node_lv(&self, n: u32, ci: usize, (a, b): (u32, u32)) -> LinkVertexId {
        match (a, b) {
            (0, 0) => LinkVertexId::Corner(self.verts[ci][0]),
            (a, 0) if a == n => LinkVertexId::Corner(self.verts[ci][1]),
            (0, b) if b == n => LinkVertexId::Corner(self.verts[ci][2]),
            (a, 0) => self.side_grid_lv(n, ci, 2, a),
            (0, b) => self.side_grid_lv(n, ci, 1, b),
            (a, b) if a + b == n => self.side_grid_lv(n, ci, 0, b),
            (a, b) => LinkVertexId::FaceGrid { corner: ci, a, b },
        }
    }

    /// Identify the grid segment with endpoints `p`, `q` (unordered) and the
    /// structural node at its canonical tail.
    fn edge_of(&self, n: u32, ci: usize, p: (u32, u32), q: (u32, u32)) -> (LinkEdgeId, (u32, u32)) {
        let side_node = |j: usize, x: u32| match j {
            0 => (n - x, x),
            1 => (0, x),
            _ => (x, 0),
        };
        let boundary = |j: usize, i: u32| {
            let (id, with) = self.side_segment(n, ci, j, i);
            (id, side_node(j, if with { i } else { i + 1 }))
        };
        if p.1 == q.1 {
            // horizontal: {(a,b), (a+1,b)}
            let (a, b) = (p.0.min(q.0), p.1);
            if b == 0 {
                boundary(2, a)
            } else {
                (LinkEdgeId::Horizontal { corner: ci, a, b }, (a, b))
            }
        } else if p.0 == q.0 {
            // vertical: {(a,b), (a,b+1)}
            let (a, b) = (p.0, p.1.min(q.1));
            if a == 0 {
                boundary(1, b)
            } else {
                (LinkEdgeId::Vertical { corner: ci, a, b }, (a, b))
            }
        } else {
            // diagonal: {(a+1,b), (a,b+1)}
            let (a, b) = (p.0.min(q.0), p.1.min(q.1));
            if a + b + 1 == n {
                boundary(0, b)
            } else {
                (LinkEdgeId::Diagonal { corner: ci, a, b }, (a + 1, b))
            }
        }
    }
}

/// Lagrange-Gauss reduction of the rank-2 lattice spanned by the collected
/// deck translations; every input must be an integer combination of the
/// result, and the returned basis is positively oriented.
fn reduce_translation_lattice(vecs: &[Complex64]) -> Result<(Complex64, Complex64)> {
    let mut v = vecs.to_vec();
    v.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let mut b1 = *v
        .first()
        .ok_or_else(|| Error::Validation("link deck group has no translations".into()))?;
    let mut b2 = v
        .iter()
        .skip(1)
        .copied()
        .find(|w| (w / b1).im.abs() > 1e-6)
        .ok_or_else(|| Error::Validation("link deck translations have rank < 2".into()))?;
    loop {
        let m = ((b2 * b1.conj()).re / b1.norm_sqr()).round();
        b2 -= m * b1;
        if b2.norm() < b1.norm() {
            std::mem::swap(&mut b1, &mut b2);
        } else {
            break;
        }
    }
    let det = b1.re * b2.im - b1.im * b2.re;
    for &w in &v {
        let c1 = (w.re * b2.im - w.im * b2.re) / det;
        let c2 = (b1.re * w.im - b1.im * w.re) / det;
        if (c1 - c1.round()).abs() > 1e-6 || (c2 - c2.round()).abs() > 1e-6 {
            return Err(Error::Internal(format!(
                "deck translation {w} lies outside the reduced lattice"
            )));
        }
    }
    if det < 0.0 {
        b2 = -b2;
    }
    Ok((b1, b2))
}

/// A point of the refined link grid, named so that distinct points never
/// alias: identified corner vertices are half-edge classes, points interior
/// to an edge class are indexed along the class orientation, and points
/// interior to one corner triangle carry barycentric grid coordinates.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum LinkVertexId {
    Corner(usize),
    EdgeGrid { class: usize, i: u32 },
    FaceGrid { corner: usize, a: u32, b: u32 },
}

/// A segment of the refined link grid.  Boundary segments subdivide a link
/// edge class (indexed along its orientation); the three interior families
/// live in a single corner chart: `Horizontal` joins `(a,b)-(a+1,b)`,
/// `Vertical` joins `(a,b)-(a,b+1)`, `Diagonal` joins `(a+1,b)-(a,b+1)`.
/// Every segment has a canonical orientation — along the class for boundary
/// segments, from the named node for interior ones — which the shell meshes
/// use to split prism walls consistently from both sides.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum LinkEdgeId {
    Boundary { class: usize, seg: u32 },
    Horizontal { corner: usize, a: u32, b: u32 },
    Vertical { corner: usize, a: u32, b: u32 },
    Diagonal { corner: usize, a: u32, b: u32 },
}

/// One triangle of the refined link, in its parent corner's chart.
#[derive(Clone, Debug)]
pub struct SmallTriangle {
    /// Parent corner index.
    pub corner: usize,
    /// Grid coordinates of the three vertices in the parent triangle.
    pub nodes: [(u32, u32); 3],
    /// Global names of the three vertices.
    pub verts: [LinkVertexId; 3],
    /// Chart positions of the three vertices.
    pub pos: [Complex64; 3],
    /// Side opposite each vertex `j`, with a flag telling whether the side's
    /// canonical tail is vertex `(j+1) % 3`.
    pub edges: [(LinkEdgeId, bool); 3],
}

impl SmallTriangle {
    /// `(tail, head)` of side `j` in canonical orientation, as global names.
    pub fn oriented_side(&self, j: usize) -> (LinkVertexId, LinkVertexId) {
        let (u, v) = (self.verts[(j + 1) % 3], self.verts[(j + 2) % 3]);
        if self.edges[j].1 {
            (u, v)
        } else {
            (v, u)
        }
    }
}

/// The `4^level` refinement of a link complex.
#[derive(Clone, Debug)]
pub struct SubdividedLink {
    pub level: u32,
    /// Grid size `2^level` per original triangle side.
    pub grid: u32,
    pub tris: Vec<SmallTriangle>,
}

/// Develop every cusp link, in cusp order.
pub fn develop_cusps(m: &ManifoldFile) -> Result<Vec<LinkComplex>> {
    (0..m.cusps.len())
        .map(|c| LinkComplex::develop(&m.tri, &m.shapes, c))
        .collect()
}

/// Develop every cusp link and check the ingested `(xi, eta)` rows against
/// the normalized developed sections; η is compared modulo the ξ translation
/// so that a representative on either boundary of the fundamental strip
/// passes.  Tolerance 1e-9.
pub fn verify_cusp_sections(m: &ManifoldFile) -> Result<Vec<LinkComplex>> {
    let links = develop_cusps(m)?;
    for link in &links {
        let dev = link.normalized_section()?;
        let (xi, eta) = m.cusps[link.cusp];
        let (dx, de) = match dev {
            FlatSection::Torus { xi: dxi, eta: deta } | FlatSection::Klein { xi: dxi, eta: deta } => {
                (dxi, deta)
            }
        };
        let sc = dx.norm();
        let eta_err = (-1..=1)
            .map(|k| (de - eta - Complex64::new(k as f64 * sc, 0.0)).norm())
            .fold(f64::INFINITY, f64::min);
        if (dx - xi).norm() > 1e-9 || eta_err > 1e-9 {
            return Err(Error::Validation(format!(
                "cusp {}: developed cross-section ({dx}, {de}) does not match \
                 the ingested ({xi}, {eta})",
                link.cusp
            )));
        }
    }
    Ok(links)
}

/// The abelianized words of all deck transformations of all links: the
/// peripheral subgroup rows the compactly-supported cohomology computation
/// quotients by.
pub fn peripheral_vectors(links: &[LinkComplex]) -> Vec<Vec<i64>> {
    links
        .iter()
        .flat_map(|l| l.decks.iter().map(|d| d.genvec.clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_manifold;
    use crate::manifold::tables::{fig8, gieseking, sister, SISTER5_GENS};

    const SHAPE_IM: f64 = 0.8660254037844386; // sin(pi/3)
    const TWO_SQRT3: f64 = 3.4641016151377544;

    fn regular_shapes(n: usize) -> Vec<Complex64> {
        vec![Complex64::new(0.5, SHAPE_IM); n]
    }

    fn fixture(name: &str) -> String {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../fixtures")
            .join(name);
        std::fs::read_to_string(dir).expect("fixture readable")
    }

    #[test]
    fn fig8_link_is_a_flat_torus() {
        let tri = fig8();
        let link = LinkComplex::develop(&tri, &regular_shapes(2), 0).unwrap();
        assert_eq!(link.corners.len(), 8);
        assert!(link.orientable);
        assert_eq!(link.euler_characteristic(), 0);
        assert_eq!(link.edge_sides.len(), 12);
        let nverts: std::collections::BTreeSet<usize> =
            link.verts.iter().flatten().copied().collect();
        assert_eq!(nverts.len(), 4);
        assert!(link.dev_residual <= 1e-9, "residual {}", link.dev_residual);
        assert!(link.decks.iter().all(|d| !d.flip));
        assert!(link.words[0].iter().all(|&x| x == 0));

        let (xi, eta) = link.translation_lattice().unwrap();
        let area = (xi.conj() * eta).im.abs();
        assert!((area - TWO_SQRT3).abs() < 1e-9, "area {area}");
        let sec = link.normalized_section().unwrap();
        let FlatSection::Torus { xi, eta } = sec else {
            panic!("expected a torus")
        };
        assert!((xi - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        // eta = 2 sqrt(3) i, up to the xi-translation normal form
        let err = (-1..=1)
            .map(|k| (eta - Complex64::new(k as f64, TWO_SQRT3)).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(err < 1e-9, "eta {eta}");
    }

    #[test]
    fn sister_link_lattice() {
        let tri = sister();
        let link = LinkComplex::develop(&tri, &regular_shapes(2), 0).unwrap();
        assert_eq!(link.corners.len(), 8);
        let sec = link.normalized_section().unwrap();
        let FlatSection::Torus { xi, eta } = sec else {
            panic!("expected a torus")
        };
        assert!((xi - Complex64::new(2.0, 0.0)).norm() < 1e-9);
        let want = Complex64::new(1.0, 1.7320508075688772);
        assert!((eta - want).norm() < 1e-9, "eta {eta}");
    }

    #[test]
    fn gieseking_link_is_a_klein_bottle() {
        let tri = gieseking();
        let link = LinkComplex::develop(&tri, &regular_shapes(1), 0).unwrap();
        assert_eq!(link.corners.len(), 4);
        assert!(!link.orientable);
        assert_eq!(link.euler_characteristic(), 0);
        assert_eq!(link.edge_sides.len(), 6);
        let nverts: std::collections::BTreeSet<usize> =
            link.verts.iter().flatten().copied().collect();
        assert_eq!(nverts.len(), 2);
        assert_eq!(link.decks.iter().filter(|d| d.flip).count(), 4);

        let g = link.klein_data().unwrap();
        assert!((g.xi.norm() - 0.5).abs() < 1e-9, "glide part {}", g.xi);
        assert!((g.eta.norm() - TWO_SQRT3).abs() < 1e-9, "eta {}", g.eta);
        let sec = link.normalized_section().unwrap();
        assert!((sec.area() - 1.7320508075688772).abs() < 1e-9);
    }

    #[test]
    fn developed_sections_match_every_fixture() {
        for (file, ncusps) in [
            ("figure_eight.mfd", 1),
            ("sister.mfd", 1),
            ("gieseking.mfd", 1),
            ("sister_cover5.mfd", 2),
            ("sister_cover5_double.mfd", 4),
        ] {
            let m = parse_manifold(&fixture(file)).unwrap();
            let links = verify_cusp_sections(&m).unwrap_or_else(|e| {
                panic!("{file}: {e}");
            });
            assert_eq!(links.len(), ncusps, "{file}");
        }
    }

    #[test]
    fn cover_cusp_link_sizes() {
        let gens: Vec<Vec<usize>> = SISTER5_GENS.iter().map(|g| g.to_vec()).collect();
        let tri = sister().cover(&gens).unwrap();
        let l0 = LinkComplex::develop(&tri, &regular_shapes(10), 0).unwrap();
        let l1 = LinkComplex::develop(&tri, &regular_shapes(10), 1).unwrap();
        assert_eq!(l0.corners.len(), 24);
        assert_eq!(l1.corners.len(), 16);
        let s0 = l0.normalized_section().unwrap();
        let FlatSection::Torus { xi, eta } = s0 else {
            panic!()
        };
        assert!((xi - Complex64::new(2.0, 0.0)).norm() < 1e-9);
        assert!((eta - Complex64::new(1.0, 5.196152422706632)).norm() < 1e-9);
        let s1 = l1.normalized_section().unwrap();
        let FlatSection::Torus { xi, eta } = s1 else {
            panic!()
        };
        assert!((xi - Complex64::new(2.0, 0.0)).norm() < 1e-9);
        let err = (-1..=1)
            .map(|k| (eta - Complex64::new(k as f64 * 2.0, TWO_SQRT3)).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(err < 1e-9, "eta {eta}");
    }

    #[test]
    fn peripheral_word_ranks() {
        // ranks of the deck words in the free abelianization of the pairing
        // letters: the rank-2 peripheral subgroup plus relator contributions
        // (words equal in the fundamental group may differ by abelianized
        // relators here, which downstream kernels quotient out anyway)
        use num_bigint::BigInt;
        for (tri, n, want) in [
            (fig8(), 2usize, 3usize),
            (sister(), 2, 3),
            (gieseking(), 1, 2),
        ] {
            let link = LinkComplex::develop(&tri, &regular_shapes(n), 0).unwrap();
            let rows: Vec<Vec<BigInt>> = peripheral_vectors(&[link])
                .iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect();
            assert_eq!(crate::exact::rank(&rows), want);
        }
    }

    #[test]
    fn subdivision_counts_and_euler() {
        // V' = V + E(n-1) + F(n-1)(n-2)/2, E' = En + 3Fn(n-1)/2, F' = Fn^2
        for (tri, ntets) in [(fig8(), 2usize), (gieseking(), 1)] {
            let link = LinkComplex::develop(&tri, &regular_shapes(ntets), 0).unwrap();
            let (v0, e0, f0) = (
                link.verts
                    .iter()
                    .flatten()
                    .copied()
                    .collect::<std::collections::BTreeSet<_>>()
                    .len(),
                link.edge_sides.len(),
                link.corners.len(),
            );
            for level in 0..=2u32 {
                let n = (1u32 << level) as usize;
                let sub = link.subdivide(level).unwrap();
                let verts: std::collections::BTreeSet<LinkVertexId> =
                    sub.tris.iter().flat_map(|t| t.verts).collect();
                let edges: std::collections::BTreeSet<LinkEdgeId> =
                    sub.tris.iter().flat_map(|t| t.edges.map(|e| e.0)).collect();
                assert_eq!(sub.tris.len(), f0 * n * n);
                let interior = f0 * (n - 1) * n.saturating_sub(2) / 2;
                assert_eq!(verts.len(), v0 + e0 * (n - 1) + interior);
                assert_eq!(edges.len(), e0 * n + 3 * f0 * n * (n - 1) / 2);
                let chi = verts.len() as i64 - edges.len() as i64 + sub.tris.len() as i64;
                assert_eq!(chi, 0);
            }
        }
    }

    #[test]
    fn subdivision_is_conforming_across_charts() {
        // every grid segment is shared by exactly two triangles, and both
        // report the same oriented endpoints; chart side lengths are 1/n
        for file in [
            "figure_eight.mfd",
            "sister.mfd",
            "gieseking.mfd",
            "sister_cover5.mfd",
        ] {
            let m = parse_manifold(&fixture(file)).unwrap();
            for link in develop_cusps(&m).unwrap() {
                for level in 0..=2u32 {
                    let sub = link.subdivide(level).unwrap();
                    let mut seen: HashMap<LinkEdgeId, Vec<(LinkVertexId, LinkVertexId)>> =
                        HashMap::new();
                    for t in &sub.tris {
                        for j in 0..3 {
                            seen.entry(t.edges[j].0).or_default().push(t.oriented_side(j));
                            let (p1, p2) = (t.pos[(j + 1) % 3], t.pos[(j + 2) % 3]);
                            let len = (p1 - p2).norm() * sub.grid as f64;
                            assert!((len - 1.0).abs() < 1e-9, "{file}: side length {len}");
                        }
                    }
                    for (id, incidences) in &seen {
                        assert_eq!(incidences.len(), 2, "{file}: {id:?}");
                        assert_eq!(
                            incidences[0], incidences[1],
                            "{file}: oriented mismatch at {id:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn gieseking_grid_contains_loops() {
        // one edge class of the ambient triangulation forces loop segments at
        // level 0: both endpoints of some side are the same half-edge class
        let tri = gieseking();
        let link = LinkComplex::develop(&tri, &regular_shapes(1), 0).unwrap();
        let sub = link.subdivide(0).unwrap();
        let loops = sub
            .tris
            .iter()
            .flat_map(|t| (0..3).map(|j| t.oriented_side(j)))
            .filter(|(u, v)| u == v)
            .count();
        assert!(loops > 0, "expected loop segments in the level-0 grid");
    }
}
