//! Piecewise-linear metric meshes: tetrahedra described by their edge lengths
//! alone (Regge calculus), with no embedding required.
//!
//! A mesh is a Δ-complex, not a simplicial complex: edges and triangles are
//! stored as explicit entities rather than recovered from vertex tuples.
//! Quotient spaces force this.  The unit 3-torus on a 2×2×2 grid has two
//! distinct straight edges joining the same vertex pair, on a 1×1×1 grid every
//! edge is a loop, and the cusp-neck meshes pinch all layer-zero edge-tangency
//! points of an edge class into one vertex, so keying anything by vertex pairs
//! silently merges cells.  Each incidence therefore carries its own
//! bookkeeping: a face records, per side, the edge entity and whether the
//! side runs with or against the edge's stored direction; a tetrahedron
//! records, per face slot, the face entity and the permutation matching its
//! local corners to the stored ones.  The permutations are computed by the
//! builders from structural identities (grid coordinates, provenance keys),
//! which stay distinct even when the vertex ids they map to collide.
//!
//! All geometry derives from the edge lengths.  A cell with squared lengths
//! d_ij has volume V given by the Cayley–Menger determinant
//!
//!   288 V² = det [ 0 1 1 1 1 ; 1 0 d01 d02 d03 ; 1 d01 0 d12 d13 ;
//!                  1 d02 d12 0 d23 ; 1 d03 d13 d23 0 ],
//!
//! and a non-positive determinant marks the cell degenerate.  Boundary faces
//! (one cell incidence) may carry a tag naming the cusp torus they lie on and
//! the height of that torus, where height t means the horospherical
//! cross-section at distance t above the cusp's base section (upper-half-space
//! coordinate z = e^t).
//!
//! Two builders live here.  `flat_torus_mesh` cuts the unit cube into k³
//! subcubes and each subcube into the six Kuhn tetrahedra (the chains
//! ∅ ⊂ {σ1} ⊂ {σ1,σ2} ⊂ {x,y,z} over orderings σ), giving 6k³ cells whose
//! edge, face, and cell entities are keyed by base grid point and direction
//! masks so that the torus identification never merges parallel copies.
//! `model_cusp_mesh` crosses a triangulated flat torus with a graded stack of
//! horospheres: between consecutive layers every triangle prism splits into
//! three tetrahedra by the staircase rule, with each wall quad's diagonal
//! rising along its cross-edge's stored direction so that neighbouring prisms
//! cut the shared wall the same way.  Layer heights are uniform in t, i.e.
//! geometric in z = e^t, with the step bounded by the caller's grading ratio.
//! Edge lengths are hyperbolic distances in the cusp metric
//! (|dw|² + dz²)/z²: between placements (w₁, z₁) and (w₂, z₂) the distance is
//! arccosh(1 + (|Δw|² + (z₁−z₂)²)/(2 z₁ z₂)), so vertical edges measure
//! exactly Δt and horizontal ones the chord of the horosphere.

use crate::error::{Error, Result};
use crate::io::MeshFile;
use crate::lattice::FlatSection;
use crate::link::others;
use crate::manifold::{edge_index, EDGE_PAIRS};
use num_complex::Complex64;
use std::collections::{BTreeMap, HashMap};

/// Which truncation torus a boundary face lies on and at what height
/// (distance above the cusp's base section; z = e^height upstairs).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryTag {
    pub cusp: usize,
    pub height: f64,
}

/// A triangle entity.  Side `j` joins `verts[(j+1)%3]` to `verts[(j+2)%3]`
/// (opposite corner `j`); `sides[j]` names the edge entity and is `+1` when
/// the side runs from the edge's stored tail to its head, `-1` otherwise.
#[derive(Clone, Debug)]
pub struct Face {
    pub verts: [usize; 3],
    pub sides: [(usize, i8); 3],
}

/// A tetrahedron entity.  Edge slot `k` spans the local vertex pair
/// `EDGE_PAIRS[k]`, with sign `+1` when the edge entity's tail sits at the
/// lower local vertex.  Face slot `f` is opposite local vertex `f`; its
/// corner map sends the i-th remaining local vertex (ascending order) to
/// position `map[i]` of the face's stored corners.
#[derive(Clone, Debug)]
pub struct Tet {
    pub verts: [usize; 4],
    pub edges: [(usize, i8); 6],
    pub faces: [(usize, [u8; 3]); 4],
}

/// Δ-complex with one length per edge entity and optional boundary tags.
#[derive(Clone, Debug)]
pub struct MetricMesh {
    pub nverts: usize,
    /// Edge entities as (tail, head) vertex ids; loops and parallel edges
    /// are legal.
    pub edges: Vec<(usize, usize)>,
    /// Length of each edge entity, in the same order.
    pub lengths: Vec<f64>,
    pub faces: Vec<Face>,
    pub tets: Vec<Tet>,
    /// Per face entity: `Some` on tagged boundary faces, `None` elsewhere.
    pub boundary: Vec<Option<BoundaryTag>>,
}

/// One edge-connected component of the boundary surface.
#[derive(Clone, Debug)]
pub struct BoundarySummary {
    pub cusp: usize,
    pub faces: usize,
    pub chi: i64,
    pub height_min: f64,
    pub height_max: f64,
}

/// 288 V² for a cell with edge lengths `l` in `EDGE_PAIRS` slot order,
/// divided through: returns V² (negative or zero when degenerate).
pub fn cm_volume2(l: &[f64; 6]) -> f64 {
    let d = [
        l[0] * l[0],
        l[1] * l[1],
        l[2] * l[2],
        l[3] * l[3],
        l[4] * l[4],
        l[5] * l[5],
    ];
    #[rustfmt::skip]
    let m = nalgebra::Matrix5::new(
        0.0, 1.0,  1.0,  1.0,  1.0,
        1.0, 0.0,  d[0], d[1], d[2],
        1.0, d[0], 0.0,  d[3], d[4],
        1.0, d[1], d[3], 0.0,  d[5],
        1.0, d[2], d[4], d[5], 0.0,
    );
    m.determinant() / 288.0
}

/// Triangle area from side lengths, by the numerically stable form of
/// Heron's formula (sides sorted a ≥ b ≥ c first).
pub fn triangle_area(a: f64, b: f64, c: f64) -> f64 {
    let mut s = [a, b, c];
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let (a, b, c) = (s[0], s[1], s[2]);
    let q = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    0.25 * q.max(0.0).sqrt()
}

impl MetricMesh {
    /// Edge lengths of cell `ci` in local slot order.
    pub fn tet_lengths(&self, ci: usize) -> [f64; 6] {
        let t = &self.tets[ci];
        let mut l = [0.0; 6];
        for k in 0..6 {
            l[k] = self.lengths[t.edges[k].0];
        }
        l
    }

    /// Cayley–Menger volume of cell `ci`; degenerate cells are an error
    /// naming the cell.
    pub fn tet_volume(&self, ci: usize) -> Result<f64> {
        let l = self.tet_lengths(ci);
        let v2 = cm_volume2(&l);
        let scale = l.iter().cloned().fold(0.0f64, f64::max);
        // Relative floor: a flat cell's determinant only vanishes up to
        // roundoff in the sixth power of the edge scale.
        if v2 <= 1e-20 * scale.powi(6) {
            return Err(Error::Mesh(format!(
                "cell {ci}: non-positive Cayley-Menger volume ({v2:.3e} from edge lengths {l:?})"
            )));
        }
        Ok(v2.sqrt())
    }

    /// Total volume; fails on the first degenerate cell.
    pub fn volume(&self) -> Result<f64> {
        let mut v = 0.0;
        for ci in 0..self.tets.len() {
            v += self.tet_volume(ci)?;
        }
        Ok(v)
    }

    /// Isometric placement of cell `ci` in R³ from its edge lengths
    /// (vertex 0 at the origin, vertex 1 on the x-axis, vertex 2 in the
    /// xy-plane).
    pub fn tet_embedding(&self, ci: usize) -> Result<[[f64; 3]; 4]> {
        let l = self.tet_lengths(ci);
        let bad = || {
            Error::Mesh(format!(
                "cell {ci}: no isometric embedding for edge lengths {l:?}"
            ))
        };
        let (l01, l02, l03, l12, l13, l23) = (l[0], l[1], l[2], l[3], l[4], l[5]);
        if l01 <= 0.0 {
            return Err(bad());
        }
        let x2 = (l01 * l01 + l02 * l02 - l12 * l12) / (2.0 * l01);
        let y2q = l02 * l02 - x2 * x2;
        if y2q <= 0.0 {
            return Err(bad());
        }
        let y2 = y2q.sqrt();
        let x3 = (l01 * l01 + l03 * l03 - l13 * l13) / (2.0 * l01);
        let y3 = (l02 * l02 + l03 * l03 - l23 * l23 - 2.0 * x2 * x3) / (2.0 * y2);
        let z3q = l03 * l03 - x3 * x3 - y3 * y3;
        if z3q <= 0.0 {
            return Err(bad());
        }
        Ok([
            [0.0, 0.0, 0.0],
            [l01, 0.0, 0.0],
            [x2, y2, 0.0],
            [x3, y3, z3q.sqrt()],
        ])
    }

    /// V − E + F − C over entity counts.
    pub fn euler_characteristic(&self) -> i64 {
        self.nverts as i64 - self.edges.len() as i64 + self.faces.len() as i64
            - self.tets.len() as i64
    }

    fn face_incidence(&self) -> Vec<u8> {
        let mut inc = vec![0u8; self.faces.len()];
        for t in &self.tets {
            for &(fid, _) in &t.faces {
                inc[fid] = inc[fid].saturating_add(1);
            }
        }
        inc
    }

    /// Face entities with exactly one cell incidence.
    pub fn boundary_faces(&self) -> Vec<usize> {
        self.face_incidence()
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c == 1)
            .map(|(f, _)| f)
            .collect()
    }

    /// Structural and metric audit: index ranges, side/slot consistency
    /// (every face side names the same edge entity as the owning cell's
    /// corresponding edge slot), incidence counts, tag placement, and
    /// positive cell volumes.
    pub fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Mesh(msg));
        if self.lengths.len() != self.edges.len() {
            return bad(format!(
                "{} edge entities but {} lengths",
                self.edges.len(),
                self.lengths.len()
            ));
        }
        if self.boundary.len() != self.faces.len() {
            return bad(format!(
                "{} face entities but {} boundary tags",
                self.faces.len(),
                self.boundary.len()
            ));
        }
        for (ei, &(a, b)) in self.edges.iter().enumerate() {
            if a >= self.nverts || b >= self.nverts {
                return bad(format!("edge {ei}: vertex out of range"));
            }
            if !(self.lengths[ei] > 0.0 && self.lengths[ei].is_finite()) {
                return bad(format!("edge {ei}: non-positive length {}", self.lengths[ei]));
            }
        }
        for (fi, f) in self.faces.iter().enumerate() {
            for j in 0..3 {
                if f.verts[j] >= self.nverts {
                    return bad(format!("face {fi}: vertex out of range"));
                }
                let (eid, s) = f.sides[j];
                if eid >= self.edges.len() || (s != 1 && s != -1) {
                    return bad(format!("face {fi} side {j}: bad edge reference"));
                }
                let (tail, head) = self.edges[eid];
                let (u, v) = (f.verts[(j + 1) % 3], f.verts[(j + 2) % 3]);
                let want = if s == 1 { (tail, head) } else { (head, tail) };
                if (u, v) != want {
                    return bad(format!(
                        "face {fi} side {j}: runs {u}->{v} but edge {eid} gives {want:?}"
                    ));
                }
            }
        }
        for (ci, t) in self.tets.iter().enumerate() {
            for &v in &t.verts {
                if v >= self.nverts {
                    return bad(format!("cell {ci}: vertex out of range"));
                }
            }
            for k in 0..6 {
                let (eid, s) = t.edges[k];
                if eid >= self.edges.len() || (s != 1 && s != -1) {
                    return bad(format!("cell {ci} edge slot {k}: bad edge reference"));
                }
                let (a, b) = EDGE_PAIRS[k];
                let (tail, head) = self.edges[eid];
                let want = if s == 1 { (tail, head) } else { (head, tail) };
                if (t.verts[a], t.verts[b]) != want {
                    return bad(format!(
                        "cell {ci} edge slot {k}: endpoints disagree with edge {eid}"
                    ));
                }
            }
            for f in 0..4 {
                let (fid, map) = t.faces[f];
                if fid >= self.faces.len() {
                    return bad(format!("cell {ci} face slot {f}: face out of range"));
                }
                let mut seen = [false; 3];
                for &m in &map {
                    if m > 2 || seen[m as usize] {
                        return bad(format!("cell {ci} face slot {f}: corner map {map:?}"));
                    }
                    seen[m as usize] = true;
                }
                let locals = others(f);
                let face = &self.faces[fid];
                for i in 0..3 {
                    if face.verts[map[i] as usize] != t.verts[locals[i]] {
                        return bad(format!(
                            "cell {ci} face slot {f}: corner {i} maps to a different vertex"
                        ));
                    }
                }
                // The face's side between two mapped corners must be the same
                // edge entity as the cell's own edge slot for that local pair.
                for i in 0..3 {
                    for j in (i + 1)..3 {
                        let side = 3 - map[i] as usize - map[j] as usize;
                        let slot = edge_index(locals[i], locals[j]);
                        if face.sides[side].0 != t.edges[slot].0 {
                            return bad(format!(
                                "cell {ci} face slot {f}: side {side} is edge {} but slot {slot} is edge {}",
                                face.sides[side].0, t.edges[slot].0
                            ));
                        }
                    }
                }
            }
        }
        let inc = self.face_incidence();
        for (fid, &c) in inc.iter().enumerate() {
            match c {
                1 => {}
                2 => {
                    if self.boundary[fid].is_some() {
                        return bad(format!("face {fid}: interior face carries a boundary tag"));
                    }
                }
                n => return bad(format!("face {fid}: {n} cell incidences")),
            }
        }
        for ci in 0..self.tets.len() {
            self.tet_volume(ci)?;
        }
        Ok(())
    }

    /// Group the boundary faces into edge-connected closed surfaces.  Every
    /// boundary face must be tagged, each boundary edge must bound exactly
    /// two boundary faces, and each component must carry a single cusp tag;
    /// the caller checks the per-cusp count and χ = 0.
    pub fn boundary_components(&self) -> Result<Vec<BoundarySummary>> {
        let bfaces = self.boundary_faces();
        for &fid in &bfaces {
            if self.boundary[fid].is_none() {
                return Err(Error::Mesh(format!("boundary face {fid} has no cusp tag")));
            }
        }
        let mut by_edge: HashMap<usize, Vec<usize>> = HashMap::new();
        for &fid in &bfaces {
            for &(eid, _) in &self.faces[fid].sides {
                by_edge.entry(eid).or_default().push(fid);
            }
        }
        // Union-find over boundary faces, merging across shared edges.
        let mut parent: HashMap<usize, usize> = bfaces.iter().map(|&f| (f, f)).collect();
        fn find(parent: &mut HashMap<usize, usize>, x: usize) -> usize {
            let p = parent[&x];
            if p == x {
                return x;
            }
            let r = find(parent, p);
            parent.insert(x, r);
            r
        }
        for (eid, fids) in &by_edge {
            if fids.len() != 2 {
                return Err(Error::Mesh(format!(
                    "boundary surface is not closed: edge {eid} bounds {} boundary faces",
                    fids.len()
                )));
            }
            let (a, b) = (find(&mut parent, fids[0]), find(&mut parent, fids[1]));
            if a != b {
                parent.insert(a, b);
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &fid in &bfaces {
            let r = find(&mut parent, fid);
            groups.entry(r).or_default().push(fid);
        }
        let mut out = Vec::new();
        for fids in groups.values() {
            let tag0 = self.boundary[fids[0]].unwrap();
            let mut verts = std::collections::BTreeSet::new();
            let mut edges = std::collections::BTreeSet::new();
            let (mut hmin, mut hmax) = (f64::INFINITY, f64::NEG_INFINITY);
            for &fid in fids {
                let tag = self.boundary[fid].unwrap();
                if tag.cusp != tag0.cusp {
                    return Err(Error::Mesh(format!(
                        "boundary component mixes cusp tags {} and {}",
                        tag0.cusp, tag.cusp
                    )));
                }
                hmin = hmin.min(tag.height);
                hmax = hmax.max(tag.height);
                verts.extend(self.faces[fid].verts);
                edges.extend(self.faces[fid].sides.iter().map(|&(e, _)| e));
            }
            out.push(BoundarySummary {
                cusp: tag0.cusp,
                faces: fids.len(),
                chi: verts.len() as i64 - edges.len() as i64 + fids.len() as i64,
                height_min: hmin,
                height_max: hmax,
            });
        }
        out.sort_by(|a, b| (a.cusp, a.faces).cmp(&(b.cusp, b.faces)));
        Ok(out)
    }
}

/// Build a Δ-complex from a parsed mesh file.  File meshes are simplicial
/// (distinct vertices per cell, one edge per vertex pair), so entities are
/// keyed by sorted vertex tuples; boundary faces are left untagged.
pub fn mesh_from_file(mf: &MeshFile) -> Result<MetricMesh> {
    let mut edge_id: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (&(a, b), _) in &mf.edge_lengths {
        if a >= mf.nverts || b >= mf.nverts {
            return Err(Error::Validation(format!(
                "edge ({a}, {b}) exceeds the vertex count"
            )));
        }
        let n = edge_id.len();
        edge_id.entry((a, b)).or_insert(n);
    }
    let mut edges = vec![(0usize, 0usize); edge_id.len()];
    let mut lengths = vec![0.0; edge_id.len()];
    for (&(a, b), &id) in &edge_id {
        edges[id] = (a, b);
        lengths[id] = mf.edge_lengths[&(a, b)];
    }
    let mut face_id: BTreeMap<[usize; 3], usize> = BTreeMap::new();
    let mut faces: Vec<Face> = Vec::new();
    let mut tets = Vec::new();
    for (ci, cell) in mf.cells.iter().enumerate() {
        for a in 0..4 {
            for b in (a + 1)..4 {
                if cell[a] == cell[b] {
                    return Err(Error::Validation(format!(
                        "cell {ci} repeats vertex {}",
                        cell[a]
                    )));
                }
            }
        }
        let mut eslots = [(0usize, 0i8); 6];
        for k in 0..6 {
            let (a, b) = EDGE_PAIRS[k];
            let (u, v) = (cell[a], cell[b]);
            let key = (u.min(v), u.max(v));
            eslots[k] = (edge_id[&key], if u < v { 1 } else { -1 });
        }
        let mut fslots = [(0usize, [0u8; 3]); 4];
        for f in 0..4 {
            let locals = others(f);
            let mut tri = [cell[locals[0]], cell[locals[1]], cell[locals[2]]];
            tri.sort_unstable();
            let fid = *face_id.entry(tri).or_insert_with(|| {
                let mut sides = [(0usize, 0i8); 3];
                for j in 0..3 {
                    let (u, v) = (tri[(j + 1) % 3], tri[(j + 2) % 3]);
                    let key = (u.min(v), u.max(v));
                    sides[j] = (edge_id[&key], if u < v { 1 } else { -1 });
                }
                faces.push(Face { verts: tri, sides });
                faces.len() - 1
            });
            let stored = faces[fid].verts;
            let mut map = [0u8; 3];
            for i in 0..3 {
                map[i] = stored
                    .iter()
                    .position(|&v| v == cell[locals[i]])
                    .expect("cell vertex missing from its own face") as u8;
            }
            fslots[f] = (fid, map);
        }
        tets.push(Tet {
            verts: *cell,
            edges: eslots,
            faces: fslots,
        });
    }
    let boundary = vec![None; faces.len()];
    let mesh = MetricMesh {
        nverts: mf.nverts,
        edges,
        lengths,
        faces,
        tets,
        boundary,
    };
    mesh.check()?;
    Ok(mesh)
}

/// Direction masks of the Kuhn subdivision: bit 0 = x, bit 1 = y, bit 2 = z.
const AXIS_MASKS: [u8; 3] = [1, 2, 4];

fn mask_step(p: [usize; 3], m: u8, k: usize) -> [usize; 3] {
    [
        (p[0] + (m & 1) as usize) % k,
        (p[1] + ((m >> 1) & 1) as usize) % k,
        (p[2] + ((m >> 2) & 1) as usize) % k,
    ]
}

/// Unit flat 3-torus on a k×k×k grid, six Kuhn tetrahedra per subcube
/// (6k³ cells total), all lengths Euclidean.  Entities are keyed by base
/// grid point and direction mask, so k = 1 (every edge a loop) and k = 2
/// (parallel edges between every neighbouring pair) build correctly.
pub fn flat_torus_mesh(k: usize) -> Result<MetricMesh> {
    if k == 0 {
        return Err(Error::Precondition(
            "flat torus grid must have at least one subcube per side".to_string(),
        ));
    }
    let vid = |p: [usize; 3]| p[0] + k * (p[1] + k * p[2]);
    let mut grid = Vec::with_capacity(k * k * k);
    for z in 0..k {
        for y in 0..k {
            for x in 0..k {
                grid.push([x, y, z]);
            }
        }
    }
    // Edge entities: (base point, nonzero mask).
    let mut edges = Vec::with_capacity(7 * k * k * k);
    let mut lengths = Vec::with_capacity(7 * k * k * k);
    let eid = |p: [usize; 3], m: u8| vid(p) * 7 + (m as usize - 1);
    for &p in &grid {
        for m in 1u8..8 {
            edges.push((vid(p), vid(mask_step(p, m, k))));
            lengths.push(f64::from(m.count_ones() as u8).sqrt() / k as f64);
        }
    }
    // Face entities: (base point, chain masks 0 < A ⊂ B); twelve per base.
    let mut chain_pairs = Vec::new();
    for b in 1u8..8 {
        for a in 1u8..b {
            if a & b == a {
                chain_pairs.push((a, b));
            }
        }
    }
    assert_eq!(chain_pairs.len(), 12);
    let pair_idx: HashMap<(u8, u8), usize> = chain_pairs
        .iter()
        .enumerate()
        .map(|(i, &ab)| (ab, i))
        .collect();
    let fid = |p: [usize; 3], a: u8, b: u8| vid(p) * 12 + pair_idx[&(a, b)];
    let mut faces = Vec::with_capacity(12 * k * k * k);
    for &p in &grid {
        for &(a, b) in &chain_pairs {
            let pa = mask_step(p, a, k);
            faces.push(Face {
                verts: [vid(p), vid(pa), vid(mask_step(p, b, k))],
                sides: [
                    (eid(pa, b ^ a), 1),
                    (eid(p, b), -1),
                    (eid(p, a), 1),
                ],
            });
        }
    }
    // Cells: for each subcube and each axis ordering, the chain simplex
    // ∅ ⊂ {σ0} ⊂ {σ0,σ1} ⊂ {x,y,z}.
    let mut tets = Vec::with_capacity(6 * k * k * k);
    let mut perms = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            if j != i {
                let l = 3 - i - j;
                perms.push([AXIS_MASKS[i], AXIS_MASKS[j], AXIS_MASKS[l]]);
            }
        }
    }
    for &p in &grid {
        for sigma in &perms {
            let masks = [0u8, sigma[0], sigma[0] | sigma[1], 7];
            let pts = masks.map(|m| mask_step(p, m, k));
            let mut eslots = [(0usize, 0i8); 6];
            for slot in 0..6 {
                let (a, b) = EDGE_PAIRS[slot];
                // Chains ascend, so the entity tail is always the lower
                // local vertex.
                eslots[slot] = (eid(pts[a], masks[b] ^ masks[a]), 1);
            }
            let mut fslots = [(0usize, [0u8; 3]); 4];
            for f in 0..4 {
                let l = others(f);
                let (a, b) = (masks[l[1]] ^ masks[l[0]], masks[l[2]] ^ masks[l[0]]);
                // Canonicalizing by the smallest chain element keeps the
                // corner order, so the map is the identity.
                fslots[f] = (fid(pts[l[0]], a, b), [0, 1, 2]);
            }
            tets.push(Tet {
                verts: pts.map(vid),
                edges: eslots,
                faces: fslots,
            });
        }
    }
    let boundary = vec![None; faces.len()];
    let mesh = MetricMesh {
        nverts: k * k * k,
        edges,
        lengths,
        faces,
        tets,
        boundary,
    };
    mesh.check()?;
    Ok(mesh)
}

fn cusp_dist(w1: Complex64, z1: f64, w2: Complex64, z2: f64) -> f64 {
    let q = ((w1 - w2).norm_sqr() + (z1 - z2) * (z1 - z2)) / (2.0 * z1 * z2);
    (1.0 + q).acosh()
}

/// Product mesh of a flat torus cross-section with a stack of horospheres
/// between heights `t0` and `t1` (t = log z), for standalone model-cusp
/// computations.  The cross-section is an n×n grid over the translation
/// parallelogram; layer spacing is uniform in t with step ≤ `max_step`
/// (geometric grading in z of ratio ≤ e^max_step).  Both boundary tori are
/// tagged as cusp 0 at their heights.
pub fn model_cusp_mesh(
    section: &FlatSection,
    n: usize,
    t0: f64,
    t1: f64,
    max_step: f64,
) -> Result<MetricMesh> {
    let (xi, eta) = match *section {
        FlatSection::Torus { xi, eta } => (xi, eta),
        FlatSection::Klein { .. } => {
            return Err(Error::Unsupported(
                "model cusp meshes require a torus cross-section".to_string(),
            ))
        }
    };
    if n == 0 {
        return Err(Error::Precondition(
            "model cusp cross grid must have at least one cell per side".to_string(),
        ));
    }
    if !(t1 > t0) {
        return Err(Error::Precondition(format!(
            "model cusp needs t1 > t0, got [{t0}, {t1}]"
        )));
    }
    if !(max_step > 0.0) {
        return Err(Error::Precondition(
            "model cusp grading step must be positive".to_string(),
        ));
    }
    let m = ((t1 - t0) / max_step).ceil().max(1.0) as usize;
    let zs: Vec<f64> = (0..=m)
        .map(|l| (t0 + (t1 - t0) * l as f64 / m as f64).exp())
        .collect();

    let nn = n * n;
    let cv = |i: usize, j: usize| (i % n) + n * (j % n);
    // Cross edges: directions (1,0), (0,1), (1,1) from each node, the last
    // being the cell diagonal shared by the two triangles of a cell.
    const DIRS: [(usize, usize); 3] = [(1, 0), (0, 1), (1, 1)];
    let ce = |i: usize, j: usize, d: usize| 3 * cv(i, j) + d;
    let mut cross_tail = vec![0usize; 3 * nn];
    let mut cross_head = vec![0usize; 3 * nn];
    let mut cross_dw = vec![Complex64::new(0.0, 0.0); 3 * nn];
    for j in 0..n {
        for i in 0..n {
            for (d, &(dx, dy)) in DIRS.iter().enumerate() {
                let id = ce(i, j, d);
                cross_tail[id] = cv(i, j);
                cross_head[id] = cv(i + dx, j + dy);
                cross_dw[id] = (xi * dx as f64 + eta * dy as f64) / n as f64;
            }
        }
    }
    // Cross triangles in topological order of their directed sides; both
    // triangles of a cell share the diagonal entity, and every side's
    // entity tail is the lower position, so wall diagonals below always
    // rise from a prism's lower-ordered corner.
    struct CrossTri {
        nodes: [usize; 3],
        sides: [usize; 3], // between positions (0,1), (1,2), (0,2)
    }
    let mut tris = Vec::with_capacity(2 * nn);
    for j in 0..n {
        for i in 0..n {
            tris.push(CrossTri {
                nodes: [cv(i, j), cv(i + 1, j), cv(i + 1, j + 1)],
                sides: [ce(i, j, 0), ce(i + 1, j, 1), ce(i, j, 2)],
            });
            tris.push(CrossTri {
                nodes: [cv(i, j), cv(i, j + 1), cv(i + 1, j + 1)],
                sides: [ce(i, j, 1), ce(i, j + 1, 0), ce(i, j, 2)],
            });
        }
    }

    let vid = |node: usize, l: usize| node + l * nn;
    // Edge entity layout: per-layer cross copies, then verticals, then
    // rising diagonals over each cross edge.
    let e_cross = |id: usize, l: usize| l * 3 * nn + id;
    let v0 = 3 * nn * (m + 1);
    let e_vert = |node: usize, l: usize| v0 + l * nn + node;
    let d0 = v0 + nn * m;
    let e_diag = |id: usize, l: usize| d0 + l * 3 * nn + id;
    let nedges = d0 + 3 * nn * m;
    let mut edges = vec![(0usize, 0usize); nedges];
    let mut lengths = vec![0.0; nedges];
    for l in 0..=m {
        for id in 0..3 * nn {
            edges[e_cross(id, l)] = (vid(cross_tail[id], l), vid(cross_head[id], l));
            lengths[e_cross(id, l)] = cusp_dist(Complex64::ZERO, zs[l], cross_dw[id], zs[l]);
        }
    }
    for l in 0..m {
        for node in 0..nn {
            edges[e_vert(node, l)] = (vid(node, l), vid(node, l + 1));
            lengths[e_vert(node, l)] = (zs[l + 1] / zs[l]).ln();
        }
        for id in 0..3 * nn {
            edges[e_diag(id, l)] = (vid(cross_tail[id], l), vid(cross_head[id], l + 1));
            lengths[e_diag(id, l)] = cusp_dist(Complex64::ZERO, zs[l], cross_dw[id], zs[l + 1]);
        }
    }

    // Face entity layout: per-layer cross triangles, then the two halves of
    // each prism wall, then the two interior triangles of each prism.
    let f_cross = |t: usize, l: usize| l * 2 * nn + t;
    let w0 = 2 * nn * (m + 1);
    let f_wall = |id: usize, l: usize, half: usize| w0 + (l * 3 * nn + id) * 2 + half;
    let i0 = w0 + 6 * nn * m;
    let f_int = |t: usize, l: usize, h: usize| i0 + (l * 2 * nn + t) * 2 + h;
    let nfaces = i0 + 4 * nn * m;
    let mut faces = vec![
        Face {
            verts: [0; 3],
            sides: [(0, 0); 3],
        };
        nfaces
    ];
    for l in 0..=m {
        for (t, tri) in tris.iter().enumerate() {
            faces[f_cross(t, l)] = Face {
                verts: [vid(tri.nodes[0], l), vid(tri.nodes[1], l), vid(tri.nodes[2], l)],
                sides: [
                    (e_cross(tri.sides[1], l), 1),
                    (e_cross(tri.sides[2], l), -1),
                    (e_cross(tri.sides[0], l), 1),
                ],
            };
        }
    }
    for l in 0..m {
        for id in 0..3 * nn {
            let (a, b) = (cross_tail[id], cross_head[id]);
            // Wall quad over a cross edge, diagonal rising tail -> head:
            // half 0 = (tail, head, head'), half 1 = (tail, head', tail').
            faces[f_wall(id, l, 0)] = Face {
                verts: [vid(a, l), vid(b, l), vid(b, l + 1)],
                sides: [
                    (e_vert(b, l), 1),
                    (e_diag(id, l), -1),
                    (e_cross(id, l), 1),
                ],
            };
            faces[f_wall(id, l, 1)] = Face {
                verts: [vid(a, l), vid(b, l + 1), vid(a, l + 1)],
                sides: [
                    (e_cross(id, l + 1), -1),
                    (e_vert(a, l), -1),
                    (e_diag(id, l), 1),
                ],
            };
        }
        for (t, tri) in tris.iter().enumerate() {
            let [p0, p1, p2] = tri.nodes;
            let [s01, s12, s02] = tri.sides;
            faces[f_int(t, l, 0)] = Face {
                verts: [vid(p0, l), vid(p1, l), vid(p2, l + 1)],
                sides: [
                    (e_diag(s12, l), 1),
                    (e_diag(s02, l), -1),
                    (e_cross(s01, l), 1),
                ],
            };
            faces[f_int(t, l, 1)] = Face {
                verts: [vid(p0, l), vid(p1, l + 1), vid(p2, l + 1)],
                sides: [
                    (e_cross(s12, l + 1), 1),
                    (e_diag(s02, l), -1),
                    (e_diag(s01, l), 1),
                ],
            };
        }
    }

    // Staircase split of each prism: with bottom corners b0 b1 b2 and top
    // t0 t1 t2 in the triangle's topological order, the cells are
    // (b0,b1,b2,t2), (b0,b1,t1,t2), (b0,t0,t1,t2).
    let mut tets = Vec::with_capacity(6 * nn * m);
    for l in 0..m {
        for (t, tri) in tris.iter().enumerate() {
            let [p0, p1, p2] = tri.nodes;
            let [s01, s12, s02] = tri.sides;
            tets.push(Tet {
                verts: [vid(p0, l), vid(p1, l), vid(p2, l), vid(p2, l + 1)],
                edges: [
                    (e_cross(s01, l), 1),
                    (e_cross(s02, l), 1),
                    (e_diag(s02, l), 1),
                    (e_cross(s12, l), 1),
                    (e_diag(s12, l), 1),
                    (e_vert(p2, l), 1),
                ],
                faces: [
                    (f_wall(s12, l, 0), [0, 1, 2]),
                    (f_wall(s02, l, 0), [0, 1, 2]),
                    (f_int(t, l, 0), [0, 1, 2]),
                    (f_cross(t, l), [0, 1, 2]),
                ],
            });
            tets.push(Tet {
                verts: [vid(p0, l), vid(p1, l), vid(p1, l + 1), vid(p2, l + 1)],
                edges: [
                    (e_cross(s01, l), 1),
                    (e_diag(s01, l), 1),
                    (e_diag(s02, l), 1),
                    (e_vert(p1, l), 1),
                    (e_diag(s12, l), 1),
                    (e_cross(s12, l + 1), 1),
                ],
                faces: [
                    (f_wall(s12, l, 1), [0, 2, 1]),
                    (f_int(t, l, 1), [0, 1, 2]),
                    (f_int(t, l, 0), [0, 1, 2]),
                    (f_wall(s01, l, 0), [0, 1, 2]),
                ],
            });
            tets.push(Tet {
                verts: [vid(p0, l), vid(p0, l + 1), vid(p1, l + 1), vid(p2, l + 1)],
                edges: [
                    (e_vert(p0, l), 1),
                    (e_diag(s01, l), 1),
                    (e_diag(s02, l), 1),
                    (e_cross(s01, l + 1), 1),
                    (e_cross(s02, l + 1), 1),
                    (e_cross(s12, l + 1), 1),
                ],
                faces: [
                    (f_cross(t, l + 1), [0, 1, 2]),
                    (f_int(t, l, 1), [0, 1, 2]),
                    (f_wall(s02, l, 1), [0, 2, 1]),
                    (f_wall(s01, l, 1), [0, 2, 1]),
                ],
            });
        }
    }

    let mut boundary = vec![None; nfaces];
    for t in 0..2 * nn {
        boundary[f_cross(t, 0)] = Some(BoundaryTag {
            cusp: 0,
            height: t0,
        });
        boundary[f_cross(t, m)] = Some(BoundaryTag {
            cusp: 0,
            height: t1,
        });
    }
    let mesh = MetricMesh {
        nverts: nn * (m + 1),
        edges,
        lengths,
        faces,
        tets,
        boundary,
    };
    mesh.check()?;
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_mesh;
    use num_complex::Complex64;

    fn fixture(name: &str) -> String {
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../fixtures")
            .join(name);
        std::fs::read_to_string(path).unwrap()
    }

    #[test]
    fn corner_tet_fixture_measures_one_sixth() {
        let mesh = mesh_from_file(&parse_mesh(&fixture("corner_tet.mesh")).unwrap()).unwrap();
        assert_eq!(mesh.tets.len(), 1);
        assert_eq!(mesh.edges.len(), 6);
        assert_eq!(mesh.faces.len(), 4);
        assert_eq!(mesh.boundary_faces().len(), 4);
        assert_eq!(mesh.euler_characteristic(), 1);
        assert!((mesh.volume().unwrap() - 1.0 / 6.0).abs() < 1e-14);
        // The placement reproduces the right-corner coordinates.
        let pts = mesh.tet_embedding(0).unwrap();
        for (i, want) in [
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ]
        .iter()
        .enumerate()
        {
            for c in 0..3 {
                assert!((pts[i][c] - want[c]).abs() < 1e-12, "vertex {i}");
            }
        }
    }

    #[test]
    fn regular_tet_volume_from_lengths() {
        let l = [1.0; 6];
        // sqrt(2)/12 is the classical value.
        assert!((cm_volume2(&l).sqrt() - 2f64.sqrt() / 12.0).abs() < 1e-15);
        assert!((triangle_area(1.0, 1.0, 1.0) - 3f64.sqrt() / 4.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_cell_error_names_the_cell() {
        // A flat cell: one face's triangle inequality is met with equality.
        let text = "vertices 4\ntetrahedra\n0 1 2 3\nend\nedge_lengths\n\
                    0 1 1\n0 2 1\n0 3 1\n1 2 2\n1 3 1\n2 3 1\nend\n";
        let err = mesh_from_file(&parse_mesh(text).unwrap()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("cell 0"), "{msg}");
        assert!(msg.contains("Cayley-Menger"), "{msg}");
    }

    #[test]
    fn flat_torus_counts_volume_and_euler() {
        for k in 1..=4 {
            let mesh = flat_torus_mesh(k).unwrap();
            let k3 = k * k * k;
            assert_eq!(mesh.nverts, k3);
            assert_eq!(mesh.edges.len(), 7 * k3);
            assert_eq!(mesh.faces.len(), 12 * k3);
            assert_eq!(mesh.tets.len(), 6 * k3);
            assert_eq!(mesh.euler_characteristic(), 0);
            assert!(mesh.boundary_faces().is_empty());
            assert!((mesh.volume().unwrap() - 1.0).abs() < 1e-12, "k = {k}");
        }
        assert!(flat_torus_mesh(0).is_err());
    }

    #[test]
    fn small_tori_need_entity_storage() {
        // k = 1: every edge is a loop at the single vertex.
        let m1 = flat_torus_mesh(1).unwrap();
        assert!(m1.edges.iter().all(|&(a, b)| a == b));
        // k = 2: each axis neighbour is reached by two distinct parallel
        // edges, so vertex pairs do not determine edges.
        let m2 = flat_torus_mesh(2).unwrap();
        let mut seen = std::collections::HashMap::new();
        let mut parallel = 0;
        for &(a, b) in &m2.edges {
            let key = (a.min(b), a.max(b));
            parallel += seen.get(&key).copied().unwrap_or(0usize).min(1);
            *seen.entry(key).or_insert(0) += 1;
        }
        assert!(parallel > 0);
    }

    #[test]
    fn model_cusp_mesh_counts_and_volume() {
        let sec = FlatSection::torus(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)).unwrap();
        let (t0, t1) = (0.0, 0.6);
        let mesh = model_cusp_mesh(&sec, 4, t0, t1, 0.25).unwrap();
        let (nn, m) = (16, 3);
        assert_eq!(mesh.nverts, nn * (m + 1));
        assert_eq!(mesh.edges.len(), 3 * nn * (m + 1) + 4 * nn * m);
        assert_eq!(mesh.faces.len(), 2 * nn * (m + 1) + 10 * nn * m);
        assert_eq!(mesh.tets.len(), 6 * nn * m);
        assert_eq!(mesh.euler_characteristic(), 0);
        // Vertical edges measure exactly the layer step in t.
        let step = (t1 - t0) / m as f64;
        let nvert = mesh
            .lengths
            .iter()
            .filter(|&&l| (l - step).abs() < 1e-13)
            .count();
        assert_eq!(nvert, nn * m);
        // Volume of area(T) * int e^{-2t} dt, approached from below by the
        // chordal mesh and closer at double resolution.
        let exact = (1.0 - (-2.0 * t1).exp()) / 2.0;
        let v1 = mesh.volume().unwrap();
        let fine = model_cusp_mesh(&sec, 8, t0, t1, 0.125).unwrap();
        let v2 = fine.volume().unwrap();
        assert!((v2 - exact).abs() < (v1 - exact).abs());
        assert!((v2 - exact).abs() / exact < 0.02, "v2 = {v2}, exact = {exact}");
        // Boundary: two tagged tori at the two heights.
        let comps = mesh.boundary_components().unwrap();
        assert_eq!(comps.len(), 2);
        for c in &comps {
            assert_eq!(c.cusp, 0);
            assert_eq!(c.faces, 2 * nn);
            assert_eq!(c.chi, 0);
            assert!(c.height_max - c.height_min < 1e-15);
        }
        let mut hts: Vec<f64> = comps.iter().map(|c| c.height_min).collect();
        hts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((hts[0] - t0).abs() < 1e-15 && (hts[1] - t1).abs() < 1e-15);
    }

    #[test]
    fn model_cusp_mesh_rejects_bad_inputs() {
        let sec = FlatSection::torus(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)).unwrap();
        assert!(matches!(
            model_cusp_mesh(&sec, 0, 0.0, 1.0, 0.25),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            model_cusp_mesh(&sec, 4, 1.0, 1.0, 0.25),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            model_cusp_mesh(&sec, 4, 0.0, 1.0, 0.0),
            Err(Error::Precondition(_))
        ));
        let klein = FlatSection::klein(
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, 2.0 * 3f64.sqrt()),
        )
        .unwrap();
        assert!(matches!(
            model_cusp_mesh(&klein, 4, 0.0, 1.0, 0.25),
            Err(Error::Unsupported(_))
        ));
    }
}
