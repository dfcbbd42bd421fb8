//! Metric meshes of truncated cusped manifolds.
//!
//! The compact core `M_T` (every cusp cut at height `T` above its tangency
//! horotorus) splits along the tangency cross-sections into two kinds of
//! pieces, and the mesh is assembled piece by piece:
//!
//! * **Blocks** — one per ideal tetrahedron: the tetrahedron truncated by the
//!   four horoballs of the tangency configuration.  In the Minkowski model a
//!   horoball is a null vector `u` (horosphere `⟨X, u⟩ = 1/2`), two balls are
//!   tangent exactly when `⟨u, u'⟩ = 1/2`, and then `T = u + u'` is the
//!   tangency point itself.  For the regular shape `exp(iπ/3)` the four unit
//!   decorations at `∞, 0, 1, z` are pairwise tangent, so the block boundary
//!   is a sphere pinched at the six edge-tangency points: four horospherical
//!   *caps* (the level-0 link grids of the four corners) and four flat-ish
//!   *medial* triangles spanning the pinches inside each face.  Cap grids are
//!   placed by flat barycentric combination on the horosphere,
//!   `N = S + (1 − ⟨S,S⟩)u` with `S` the weighted sum of the cap corners,
//!   which is an isometry onto the developed link chart; the block is then
//!   filled radially with `2^refinement` shrinking copies of its boundary
//!   complex joined by prism layers and coned to the incenter, so interior
//!   cells refine at the same `8^r` rate as the boundary.
//! * **Shells** — one prism column per refined link triangle per cusp,
//!   stacked from the tangency section `z = 1` to `z = e^T` in uniform steps
//!   of `log z`.  The step is `T/M` with `M = ceil(T · 2^r / log ρ)`, so the
//!   height ratio per layer never exceeds the configured grading ratio `ρ`
//!   and refinement subdivides vertically at the same rate as laterally.
//!
//! Every simplex is stored against a *provenance key* naming the structural
//! role of the entity rather than its vertex set: the quotient identifies
//! distinct structural edges with equal endpoints (the two ends of an edge
//! class meet at one tangency point, and re-entrant link sides create genuine
//! loops), so vertex pairs cannot name edges.  Each cell computes its metric
//! data in its own isometric chart; the interner cross-checks that every
//! chart reports the same length for a shared entity, which is a strong
//! global consistency test of the whole construction.
//!
//! Six-cell prisms are avoided everywhere in favour of an 8-cell center
//! split (cone from a fresh prism center over the 8 boundary triangles of
//! the prism, quad walls split by diagonals that rise along the canonical
//! orientation of the shared wall entity): the split needs no compatible
//! tetrahedralization of neighbouring prisms and cannot produce Schönhardt
//! configurations on the pinched walls.
//!
//! Alongside the mesh the builder returns *chart offsets*: per cell and
//! vertex slot, the abelianized face-pairing word `õ` carrying the entity's
//! canonical chart to the cell's chart.  For any integer cocycle `φ` on the
//! face pairings that kills the edge relations, the simplicial pullback of
//! the corresponding flat 1-form is `α(tail → head) = φ·(õ[head] − õ[tail])`
//! on each edge, independent of the cell used to evaluate it — the offset
//! rules are exactly the fan-prefix and link-development bookkeeping of
//! [`crate::manifold`] and [`crate::link`], and [`pullback_cocycle`] verifies
//! the cell-independence exactly in integers.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{cusp_geometry, truncation_constants};
use crate::hyper::{combine, dist_mvec, lift_ideal, minkowski_dot, Ideal, MVec};
use crate::io::ManifoldFile;
use crate::link::{
    develop_cusps, others, slot_of, LinkComplex, LinkEdgeId, LinkVertexId, SubdividedLink,
};
use crate::manifold::{edge_index, half_edge_index, FaceGenMap, Pairing, EDGE_PAIRS};
use crate::mesh::{BoundaryTag, Face, MetricMesh, Tet};

/// Mesh generation knobs; `rho` is the cusp-neck grading ratio bound at
/// refinement 0 (each refinement halves the log-height step `log ρ` once per
/// level) and `max_refine` caps the refinement exponent.
#[derive(Clone, Copy, Debug)]
pub struct MeshOptions {
    pub rho: f64,
    pub max_refine: u32,
}

impl Default for MeshOptions {
    fn default() -> Self {
        MeshOptions {
            rho: 1.25,
            max_refine: 6,
        }
    }
}

/// Tolerance for the regular-shape scope check `|z − exp(iπ/3)| ≤ tol`.
pub const REGULAR_SHAPE_TOL: f64 = 1e-9;
/// Relative tolerance for cross-chart agreement of entity lengths.
const EDGE_TOL: f64 = 1e-8;

/// Structural name of a mesh vertex.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum VKey {
    /// Tangency point of the horoballs at the ends of an edge class.
    Tang(usize),
    /// Cusp-surface vertex: link grid point `lv` on the layer-`j` horotorus.
    Surf { c: u32, j: u32, lv: LinkVertexId },
    /// Interior grid point of the medial triangle of face pairing `k`, in
    /// the canonical (positive-side) barycentric frame.
    Med { k: u32, a: u32, b: u32 },
    /// Radial copy `q ≥ 1` of block-boundary location `loc` of tet `t`.
    BCopy { t: u32, q: u32, loc: u32 },
    /// Block center (incenter of the truncated tetrahedron).
    BCen(u32),
    /// Center of the radial prism over boundary triangle `lt`, layer `q`.
    BPrismC { t: u32, q: u32, lt: u32 },
    /// Center of the shell prism over link triangle `gt`, layer `j`.
    ShPrismC { c: u32, j: u32, gt: u32 },
}

/// Structural name of a mesh edge, with a canonical orientation.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum EKey {
    /// Horizontal link-grid segment at layer `j` (canonical orientation of
    /// the underlying [`LinkEdgeId`]).
    LinkE { c: u32, j: u32, id: LinkEdgeId },
    /// Vertical segment from layer `j` to `j + 1` at link vertex `lv`.
    VertE { c: u32, j: u32, lv: LinkVertexId },
    /// Wall diagonal over link segment `id`, rising tail`@j` → head`@j+1`.
    DiagE { c: u32, j: u32, id: LinkEdgeId },
    /// Interior medial-grid segment, canonical frame; `fam` 0/1/2 is
    /// horizontal/vertical/diagonal with the link-grid tail conventions.
    MedE { k: u32, fam: u8, a: u32, b: u32 },
    /// Radial copy `q ≥ 1` of block-boundary edge `le`.
    BCopyE { t: u32, q: u32, le: u32 },
    /// Radial strut from copy `q` to copy `q + 1` of location `loc`.
    BRad { t: u32, q: u32, loc: u32 },
    /// Spoke from the block center to the innermost copy of `loc`.
    BSpoke { t: u32, loc: u32 },
    /// Radial-wall diagonal over boundary edge `le`, rising `q` → `q + 1`.
    BDiag { t: u32, q: u32, le: u32 },
    /// Center-split strut of a block radial prism (0–2 outer, 3–5 inner).
    BPrismE { t: u32, q: u32, lt: u32, slot: u8 },
    /// Center-split strut of a shell prism (0–2 bottom, 3–5 top corners).
    ShPrismE { c: u32, j: u32, gt: u32, slot: u8 },
}

/// Structural name of a mesh face.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum FKey {
    /// Link triangle `gt` at layer `j` (layer 0 = block cap = shell floor).
    LinkT { c: u32, j: u32, gt: u32 },
    /// Shell wall half over link segment `id` between layers `j`, `j + 1`:
    /// half 0 = (tail low, head low, head high), half 1 = (tail low,
    /// head high, tail high).
    WallH { c: u32, j: u32, id: LinkEdgeId, half: u8 },
    /// Medial-grid triangle in the canonical frame (`up` as in the link
    /// grid: `{(a,b),(a+1,b),(a,b+1)}`).
    MedT { k: u32, a: u32, b: u32, up: bool },
    /// Radial copy `q ≥ 1` of block-boundary triangle `lt`.
    BCopyT { t: u32, q: u32, lt: u32 },
    /// Radial wall half over boundary edge `le` between copies `q`, `q + 1`.
    BWallH { t: u32, q: u32, le: u32, half: u8 },
    /// Cone face from the block center over the innermost copy of `le`.
    BConeF { t: u32, le: u32 },
    /// Center-split interior face of a block radial prism.
    BPrismF { t: u32, q: u32, lt: u32, kk: u8 },
    /// Center-split interior face of a shell prism.
    ShPrismF { c: u32, j: u32, gt: u32, kk: u8 },
}

/// A built mesh together with the chart data that later stages need: the
/// per-vertex provenance keys, the offset-vector table with per-cell slot
/// assignments (for cocycle pullback), and the developed links.
pub struct BuiltMesh {
    pub mesh: MetricMesh,
    pub vkeys: Vec<VKey>,
    /// Deduplicated chart-offset vectors (length = number of face pairings).
    pub offsets: Vec<Vec<i64>>,
    /// Per cell, the offset-table row of each of the four vertex slots.
    pub cell_offsets: Vec<[u32; 4]>,
    pub links: Vec<LinkComplex>,
    pub subs: Vec<SubdividedLink>,
    pub n_pairings: usize,
    /// Truncation height above the tangency section.
    pub height: f64,
    pub refine: u32,
    /// Number of shell prism layers per cusp (all cusps share the count).
    pub shell_layers: usize,
    /// Uniform log-height step of the shell layers.
    pub step: f64,
}

// ---------------------------------------------------------------------------
// entity interner

struct Interner {
    vmap: HashMap<VKey, usize>,
    vkeys: Vec<VKey>,
    emap: HashMap<EKey, usize>,
    edges: Vec<(usize, usize)>,
    lengths: Vec<f64>,
    fmap: HashMap<FKey, usize>,
    faces: Vec<Face>,
    ftag: Vec<Option<BoundaryTag>>,
    tets: Vec<Tet>,
    cell_offsets: Vec<[u32; 4]>,
    omap: HashMap<Vec<i64>, u32>,
    offsets: Vec<Vec<i64>>,
}

impl Interner {
    fn new() -> Self {
        Interner {
            vmap: HashMap::new(),
            vkeys: Vec::new(),
            emap: HashMap::new(),
            edges: Vec::new(),
            lengths: Vec::new(),
            fmap: HashMap::new(),
            faces: Vec::new(),
            ftag: Vec::new(),
            tets: Vec::new(),
            cell_offsets: Vec::new(),
            omap: HashMap::new(),
            offsets: Vec::new(),
        }
    }

    fn vert(&mut self, k: VKey) -> usize {
        if let Some(&v) = self.vmap.get(&k) {
            return v;
        }
        let v = self.vkeys.len();
        self.vkeys.push(k);
        self.vmap.insert(k, v);
        v
    }

    fn off(&mut self, v: Vec<i64>) -> u32 {
        if let Some(&i) = self.omap.get(&v) {
            return i;
        }
        let i = self.offsets.len() as u32;
        self.omap.insert(v.clone(), i);
        self.offsets.push(v);
        i
    }

    /// Intern an edge in its canonical orientation; every chart that touches
    /// the entity must agree on the endpoints exactly and on the length to
    /// relative tolerance [`EDGE_TOL`].
    fn edge(&mut self, k: EKey, tail: usize, head: usize, len: f64) -> Result<usize> {
        if !(len.is_finite() && len > 0.0) {
            return Err(Error::Internal(format!(
                "degenerate length {len} for edge {k:?}"
            )));
        }
        if let Some(&e) = self.emap.get(&k) {
            if self.edges[e] != (tail, head) {
                return Err(Error::Internal(format!(
                    "edge {k:?} interned with endpoints {:?}, now {:?}",
                    self.edges[e],
                    (tail, head)
                )));
            }
            if (self.lengths[e] - len).abs() > EDGE_TOL * self.lengths[e].max(1.0) {
                return Err(Error::Internal(format!(
                    "edge {k:?} length mismatch across charts: {} vs {len}",
                    self.lengths[e]
                )));
            }
            return Ok(e);
        }
        let e = self.edges.len();
        self.edges.push((tail, head));
        self.lengths.push(len);
        self.emap.insert(k, e);
        Ok(e)
    }

    /// Intern a face with its canonical corner order and side entities.
    fn face(&mut self, k: FKey, verts: [usize; 3], sides: [(usize, i8); 3]) -> Result<usize> {
        if let Some(&f) = self.fmap.get(&k) {
            if self.faces[f].verts != verts || self.faces[f].sides != sides {
                return Err(Error::Internal(format!(
                    "face {k:?} interned twice with different structure"
                )));
            }
            return Ok(f);
        }
        let f = self.faces.len();
        self.faces.push(Face { verts, sides });
        self.ftag.push(None);
        self.fmap.insert(k, f);
        Ok(f)
    }

    fn cell(
        &mut self,
        verts: [usize; 4],
        edges: [(usize, i8); 6],
        faces: [(usize, [u8; 3]); 4],
        offs: [u32; 4],
    ) {
        self.tets.push(Tet {
            verts,
            edges,
            faces,
        });
        self.cell_offsets.push(offs);
    }
}

// ---------------------------------------------------------------------------
// generic cell emitters

/// Intern the cone face `(apex, tail, head)` over a directed edge.
fn cone_face(
    it: &mut Interner,
    key: FKey,
    apex: usize,
    tail: usize,
    head: usize,
    e_th: usize,
    sp_tail: usize,
    sp_head: usize,
) -> Result<usize> {
    it.face(key, [apex, tail, head], [(e_th, 1), (sp_head, -1), (sp_tail, 1)])
}

/// Emit the cone cell `[apex, c0, c1, c2]` over a triangle whose corners are
/// given in the base face's canonical order.  `sides[j] = (eid, tail_jp1)`
/// describes the side opposite corner `j` (`tail_jp1`: the entity's tail is
/// corner `(j+1)%3`); `cones[j]` is the cone face over side `j`, canonical
/// order `(apex, tail, head)`; `spokes[k]` runs apex → corner `k`.
#[allow(clippy::too_many_arguments)]
fn cone_cell(
    it: &mut Interner,
    apex: (usize, u32),
    corners: [(usize, u32); 3],
    spokes: [usize; 3],
    sides: [(usize, bool); 3],
    base: usize,
    cones: [usize; 3],
) {
    let sgn = |b: bool| if b { 1i8 } else { -1i8 };
    let perm = |b: bool| if b { [0, 1, 2] } else { [0, 2, 1] };
    it.cell(
        [apex.0, corners[0].0, corners[1].0, corners[2].0],
        [
            (spokes[0], 1),
            (spokes[1], 1),
            (spokes[2], 1),
            (sides[2].0, sgn(sides[2].1)),
            (sides[1].0, sgn(!sides[1].1)),
            (sides[0].0, sgn(sides[0].1)),
        ],
        [
            (base, [0, 1, 2]),
            (cones[0], perm(sides[0].1)),
            (cones[1], perm(!sides[1].1)),
            (cones[2], perm(sides[2].1)),
        ],
        [apex.1, corners[0].1, corners[1].1, corners[2].1],
    );
}

/// Shared per-side data of a center-split prism: the entity tail corner
/// (side `j` joins corners `(j+1)%3` and `(j+2)%3`; bottom, top and diagonal
/// entities of one wall all share the canonical tail).
struct PrismSides {
    tails: [usize; 3],
    bot: [usize; 3],
    top: [usize; 3],
    vert: [usize; 3],
    diag: [usize; 3],
}

/// Intern the 12 interior cone faces of a center-split prism, keyed
/// `0..3` over bottom sides, `3..6` top sides, `6..9` verticals, `9..12`
/// diagonals.
fn prism_int_faces(
    it: &mut Interner,
    mut key: impl FnMut(u8) -> FKey,
    center: usize,
    bot: [(usize, u32); 3],
    top: [(usize, u32); 3],
    s: &PrismSides,
    rad: [usize; 6],
) -> Result<[usize; 12]> {
    let mut f = [0usize; 12];
    for j in 0..3 {
        let (tl, hd) = (s.tails[j], 3 - s.tails[j] - j.min(3) - ((j + 1) % 3 == s.tails[j]) as usize * 0);
        let _ = hd;
        let tl2 = s.tails[j];
        let hd2 = if tl2 == (j + 1) % 3 { (j + 2) % 3 } else { (j + 1) % 3 };
        f[j] = cone_face(
            it,
            key(j as u8),
            center,
            bot[tl2].0,
            bot[hd2].0,
            s.bot[j],
            rad[tl2],
            rad[hd2],
        )?;
        f[3 + j] = cone_face(
            it,
            key(3 + j as u8),
            center,
            top[tl2].0,
            top[hd2].0,
            s.top[j],
            rad[3 + tl2],
            rad[3 + hd2],
        )?;
        f[9 + j] = cone_face(
            it,
            key(9 + j as u8),
            center,
            bot[tl2].0,
            top[hd2].0,
            s.diag[j],
            rad[tl2],
            rad[3 + hd2],
        )?;
        let _ = tl;
    }
    for k in 0..3 {
        f[6 + k] = cone_face(
            it,
            key(6 + k as u8),
            center,
            bot[k].0,
            top[k].0,
            s.vert[k],
            rad[k],
            rad[3 + k],
        )?;
    }
    Ok(f)
}

/// Emit the 8 cells of a center-split prism.  Corner arrays are in the cap
/// faces' canonical order; `rad[0..3]` are the center→bottom spokes and
/// `rad[3..6]` the center→top spokes; `f_wall[j]` are the two halves of the
/// wall over side `j` and `f_int` the faces from [`prism_int_faces`].
#[allow(clippy::too_many_arguments)]
fn prism_cells(
    it: &mut Interner,
    center: (usize, u32),
    bot: [(usize, u32); 3],
    top: [(usize, u32); 3],
    s: &PrismSides,
    rad: [usize; 6],
    f_bot: usize,
    f_top: usize,
    f_wall: [[usize; 2]; 3],
    f_int: [usize; 12],
) {
    let flag = |j: usize| s.tails[j] == (j + 1) % 3;
    cone_cell(
        it,
        center,
        bot,
        [rad[0], rad[1], rad[2]],
        [(s.bot[0], flag(0)), (s.bot[1], flag(1)), (s.bot[2], flag(2))],
        f_bot,
        [f_int[0], f_int[1], f_int[2]],
    );
    cone_cell(
        it,
        center,
        top,
        [rad[3], rad[4], rad[5]],
        [(s.top[0], flag(0)), (s.top[1], flag(1)), (s.top[2], flag(2))],
        f_top,
        [f_int[3], f_int[4], f_int[5]],
    );
    for j in 0..3 {
        let tl = s.tails[j];
        let hd = if tl == (j + 1) % 3 { (j + 2) % 3 } else { (j + 1) % 3 };
        // half 0: [C, tail low, head low, head high]
        it.cell(
            [center.0, bot[tl].0, bot[hd].0, top[hd].0],
            [
                (rad[tl], 1),
                (rad[hd], 1),
                (rad[3 + hd], 1),
                (s.bot[j], 1),
                (s.diag[j], 1),
                (s.vert[hd], 1),
            ],
            [
                (f_wall[j][0], [0, 1, 2]),
                (f_int[6 + hd], [0, 1, 2]),
                (f_int[9 + j], [0, 1, 2]),
                (f_int[j], [0, 1, 2]),
            ],
            [center.1, bot[tl].1, bot[hd].1, top[hd].1],
        );
        // half 1: [C, tail low, head high, tail high]
        it.cell(
            [center.0, bot[tl].0, top[hd].0, top[tl].0],
            [
                (rad[tl], 1),
                (rad[3 + hd], 1),
                (rad[3 + tl], 1),
                (s.diag[j], 1),
                (s.vert[tl], 1),
                (s.top[j], -1),
            ],
            [
                (f_wall[j][1], [0, 1, 2]),
                (f_int[3 + j], [0, 2, 1]),
                (f_int[6 + tl], [0, 1, 2]),
                (f_int[9 + j], [0, 1, 2]),
            ],
            [center.1, bot[tl].1, top[hd].1, top[tl].1],
        );
    }
}

/// Intern the two canonical wall halves over a directed edge between two
/// layers: half 0 = (tail low, head low, head high), half 1 = (tail low,
/// head high, tail high).
#[allow(clippy::too_many_arguments)]
fn wall_faces(
    it: &mut Interner,
    key0: FKey,
    key1: FKey,
    bt: usize,
    bh: usize,
    tt: usize,
    th: usize,
    e_bot: usize,
    e_top: usize,
    e_vt: usize,
    e_vh: usize,
    e_diag: usize,
) -> Result<[usize; 2]> {
    let f0 = it.face(key0, [bt, bh, th], [(e_vh, 1), (e_diag, -1), (e_bot, 1)])?;
    let f1 = it.face(key1, [bt, th, tt], [(e_top, -1), (e_vt, -1), (e_diag, 1)])?;
    Ok([f0, f1])
}

// ---------------------------------------------------------------------------
// shared combinatorial context

/// Classification of a grid coordinate inside a subdivided triangle.
enum GridPos {
    Corner(usize),
    /// `(side, param)`: side `j` is opposite corner `j`, the parameter runs
    /// ascending from the lower-numbered corner.
    Side(usize, u32),
    Interior,
}

fn grid_pos(n: u32, (a, b): (u32, u32)) -> GridPos {
    match (a, b) {
        (0, 0) => GridPos::Corner(0),
        (a, 0) if a == n => GridPos::Corner(1),
        (0, b) if b == n => GridPos::Corner(2),
        (a, 0) => GridPos::Side(2, a),
        (0, b) => GridPos::Side(1, b),
        (a, b) if a + b == n => GridPos::Side(0, b),
        _ => GridPos::Interior,
    }
}

struct Ctx<'a> {
    m: &'a ManifoldFile,
    links: &'a [LinkComplex],
    subs: &'a [SubdividedLink],
    n: u32,
    pl: Vec<Pairing>,
    dmap: FaceGenMap,
    npair: usize,
    eclass_of: Vec<usize>,
    /// Fan prefix (abelianized word from the fan root) per tet edge.
    prefix: HashMap<(usize, usize), Vec<i64>>,
    /// Per half-edge class, the fan prefix of the first member wedge seen in
    /// the deterministic fan scan: the owner chart of the link vertex.
    owner_p: Vec<Vec<i64>>,
    hclass_of: Vec<usize>,
    /// `(t, v)` → `(cusp, corner index)`.
    cmap: HashMap<(usize, usize), (usize, usize)>,
    /// `[c][ci]` → indices into `subs[c].tris`.
    tris_of: Vec<Vec<Vec<usize>>>,
}

impl<'a> Ctx<'a> {
    fn build(
        m: &'a ManifoldFile,
        links: &'a [LinkComplex],
        subs: &'a [SubdividedLink],
        n: u32,
    ) -> Result<Ctx<'a>> {
        let tri = &m.tri;
        let (pl, dmap) = tri.pairings();
        let npair = pl.len();
        let mut eclass_of = vec![usize::MAX; 6 * tri.n];
        for (k, cls) in tri.edge_classes().iter().enumerate() {
            for &e in cls {
                eclass_of[e] = k;
            }
        }
        let mut hclass_of = vec![usize::MAX; 12 * tri.n];
        for (k, cls) in tri.half_edge_classes().iter().enumerate() {
            for &h in cls {
                hclass_of[h] = k;
            }
        }
        let fans = tri.edge_fan_prefixes()?;
        let mut prefix = HashMap::new();
        let mut owner_p: Vec<Option<Vec<i64>>> = vec![None; hclass_of.iter().max().unwrap() + 1];
        for fan in &fans {
            for ((t, ei), p) in fan {
                prefix.insert((*t, *ei), p.clone());
                let (a, b) = EDGE_PAIRS[*ei];
                for (x, y) in [(a, b), (b, a)] {
                    let h = hclass_of[half_edge_index(*t, x, y)];
                    if owner_p[h].is_none() {
                        owner_p[h] = Some(p.clone());
                    }
                }
            }
        }
        let owner_p = owner_p
            .into_iter()
            .map(|o| o.ok_or_else(|| Error::Internal("half-edge class missed by fans".into())))
            .collect::<Result<Vec<_>>>()?;
        let mut cmap = HashMap::new();
        let mut tris_of = Vec::with_capacity(links.len());
        for (c, link) in links.iter().enumerate() {
            for (ci, &(t, v)) in link.corners.iter().enumerate() {
                cmap.insert((t, v), (c, ci));
            }
            let mut per = vec![Vec::new(); link.corners.len()];
            for (gt, st) in subs[c].tris.iter().enumerate() {
                per[st.corner].push(gt);
            }
            tris_of.push(per);
        }
        Ok(Ctx {
            m,
            links,
            subs,
            n,
            pl,
            dmap,
            npair,
            eclass_of,
            prefix,
            owner_p,
            hclass_of,
            cmap,
            tris_of,
        })
    }

    /// Abelianized letter picked up leaving tet `t` through face `f`.
    fn letter(&self, t: usize, f: usize) -> Vec<i64> {
        let mut v = vec![0i64; self.npair];
        let (k, s) = self.dmap[4 * t + f];
        v[k] = s as i64;
        v
    }

    /// Chart offset of an edge-interior surface node relative to its owner
    /// incidence `edge_sides[class][0]`: zero on the owner side, the owner's
    /// crossing letter on the other side.
    fn side_off(&self, c: usize, ci: usize, j: usize) -> Result<Vec<i64>> {
        let link = &self.links[c];
        let (class, _) = link.sides[ci][j];
        let [inc0, inc1] = link.edge_sides[class];
        if inc0 == (ci, j) {
            return Ok(vec![0i64; self.npair]);
        }
        if inc1 != (ci, j) {
            return Err(Error::Internal(format!(
                "side ({ci}, {j}) is not an incidence of its class {class}"
            )));
        }
        let (t0, v0) = link.corners[inc0.0];
        let o0 = others(v0)[inc0.1];
        Ok(self.letter(t0, o0))
    }

    /// Chart offset of a shell-prism node at corner `ci`, where `coords` are
    /// the node's grid coordinates; `tang` marks the layer-0 corner case
    /// whose entity is the tangency point (owner chart = fan root).
    fn shell_off(&self, c: usize, ci: usize, coords: (u32, u32), tang: bool) -> Result<Vec<i64>> {
        let link = &self.links[c];
        let (t, v) = link.corners[ci];
        match grid_pos(self.n, coords) {
            GridPos::Corner(k) => {
                let w = others(v)[k];
                let member = (t, edge_index(v, w));
                let p = self
                    .prefix
                    .get(&member)
                    .ok_or_else(|| Error::Internal(format!("no fan prefix for {member:?}")))?;
                if tang {
                    Ok(p.clone())
                } else {
                    let h = self.hclass_of[half_edge_index(t, v, w)];
                    Ok(vec_sub(p, &self.owner_p[h]))
                }
            }
            GridPos::Side(j, _) => self.side_off(c, ci, j),
            GridPos::Interior => Ok(vec![0i64; self.npair]),
        }
    }
}

fn vec_sub(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Geodesic distance between upper-half-space points, written in the
/// cancellation-free form `arccosh(1 + (|Δw|² + Δz²) / (2 z₁ z₂))`.
fn uhs_dist(w1: Complex64, z1: f64, w2: Complex64, z2: f64) -> f64 {
    let q = ((w1 - w2).norm_sqr() + (z1 - z2) * (z1 - z2)) / (2.0 * z1 * z2);
    (1.0 + q).acosh()
}

/// Flat barycentric combination on the horosphere of the null decoration
/// `u`: `N = S + (1 − ⟨S,S⟩)u` lies on the hyperboloid and realizes the flat
/// affine structure of the horosphere through the `pts`.
fn hor_combine(u: &MVec, pts: &[MVec; 3], w: [f64; 3]) -> MVec {
    let mut s = [0.0f64; 4];
    for k in 0..3 {
        for i in 0..4 {
            s[i] += w[k] * pts[k][i];
        }
    }
    let lam = 1.0 - minkowski_dot(&s, &s);
    let mut out = [0.0f64; 4];
    for i in 0..4 {
        out[i] = s[i] + lam * u[i];
    }
    out
}

// ---------------------------------------------------------------------------
// block assembly

/// One location of the block-boundary sphere.  Locations, not entity keys,
/// index the radial copies: a provenance entity (a tangency point, say) can
/// occur at several distinct spots of one block's boundary, and their radial
/// copies must stay separate.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum LKey {
    /// Tangency pinch at tet edge `ei`.
    P(usize),
    /// Node `i` on side `j` of the cap at local vertex `v`.
    S(u8, u8, u32),
    /// Cap-interior node.
    CI(u8, u32, u32),
    /// Medial-interior node of face `f`, local barycentric coordinates.
    MI(u8, u32, u32),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum LEKey {
    /// Segment `i..i+1` on side `j` of the cap at local vertex `v`.
    S(u8, u8, u32),
    /// Cap-interior segment (the link id carries the corner).
    CE(LinkEdgeId),
    /// Medial-interior segment of face `f` between two local grid nodes.
    ME(u8, (u32, u32), (u32, u32)),
}

struct Loc {
    pos: MVec,
    vid: usize,
    off: u32,
}

struct LEdge {
    /// Entity-canonical tail and head locations.
    u: usize,
    v: usize,
    eid: usize,
}

struct LTri {
    /// Corner locations in the face entity's canonical order.
    corners: [usize; 3],
    /// Per side `j`: boundary-edge index and whether its tail is corner
    /// `(j+1)%3`.
    sides: [(usize, bool); 3],
    fid: usize,
}

struct BComplex {
    locs: Vec<Loc>,
    lmap: HashMap<LKey, usize>,
    ledges: Vec<LEdge>,
    lemap: HashMap<LEKey, usize>,
    ltris: Vec<LTri>,
}

impl BComplex {
    fn add_loc(&mut self, it: &mut Interner, key: LKey, pos: MVec, vkey: VKey, off: Vec<i64>) -> usize {
        if let Some(&i) = self.lmap.get(&key) {
            return i;
        }
        let vid = it.vert(vkey);
        let off = it.off(off);
        let i = self.locs.len();
        self.locs.push(Loc { pos, vid, off });
        self.lmap.insert(key, i);
        i
    }

    fn add_ledge(&mut self, key: LEKey, u: usize, v: usize, eid: usize) -> Result<usize> {
        if let Some(&i) = self.lemap.get(&key) {
            let le = &self.ledges[i];
            if (le.u, le.v, le.eid) != (u, v, eid) {
                return Err(Error::Internal(format!(
                    "boundary edge {key:?} re-registered inconsistently"
                )));
            }
            return Ok(i);
        }
        let i = self.ledges.len();
        self.ledges.push(LEdge { u, v, eid });
        self.lemap.insert(key, i);
        Ok(i)
    }
}

/// Index of a triangular-grid node `(a, b)` with `a + b ≤ n`.
fn gidx(n: u32, a: u32, b: u32) -> usize {
    (a * (n + 1) + b) as usize
}

/// Build the boundary complex of the block of tet `t`: caps from the level-0
/// link grids, medial grids from scratch, all positions in the tetrahedron's
/// own Minkowski chart with corners at `∞, 0, 1, shape`.
fn block_boundary(ctx: &Ctx, it: &mut Interner, t: usize) -> Result<BComplex> {
    let n = ctx.n;
    let zt = ctx.m.shapes[t];
    let ideals = [
        Ideal::Infinity,
        Ideal::finite(0.0, 0.0),
        Ideal::finite(1.0, 0.0),
        Ideal::Finite(zt),
    ];
    let uv: [MVec; 4] = [
        lift_ideal(ideals[0]),
        lift_ideal(ideals[1]),
        lift_ideal(ideals[2]),
        lift_ideal(ideals[3]),
    ];
    let mut bc = BComplex {
        locs: Vec::new(),
        lmap: HashMap::new(),
        ledges: Vec::new(),
        lemap: HashMap::new(),
        ltris: Vec::new(),
    };

    // tangency pinches
    let mut pinch = [0usize; 6];
    for (ei, &(a, b)) in EDGE_PAIRS.iter().enumerate() {
        let mut p = [0.0f64; 4];
        for i in 0..4 {
            p[i] = uv[a][i] + uv[b][i];
        }
        let res = (minkowski_dot(&p, &p) - 1.0).abs();
        if res > 1e-6 {
            return Err(Error::Internal(format!(
                "tet {t} edge {ei}: decorations are not tangent (residual {res:.2e})"
            )));
        }
        let off = ctx
            .prefix
            .get(&(t, ei))
            .ok_or_else(|| Error::Internal(format!("no fan prefix for ({t}, {ei})")))?
            .clone();
        pinch[ei] = bc.add_loc(
            it,
            LKey::P(ei),
            p,
            VKey::Tang(ctx.eclass_of[6 * t + ei]),
            off,
        );
    }

    // caps: one level-0 link grid per corner
    let mut cap_nodes: [Vec<usize>; 4] = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for v in 0..4 {
        let &(c, ci) = ctx
            .cmap
            .get(&(t, v))
            .ok_or_else(|| Error::Internal(format!("corner ({t}, {v}) missing from links")))?;
        let link = &ctx.links[c];
        let oth = others(v);
        let tcorn = [
            bc.locs[pinch[edge_index(v, oth[0])]].pos,
            bc.locs[pinch[edge_index(v, oth[1])]].pos,
            bc.locs[pinch[edge_index(v, oth[2])]].pos,
        ];
        let mut nodes = vec![usize::MAX; gidx(n, n, 0) + 1];
        for a in 0..=n {
            for b in 0..=(n - a) {
                let w = [
                    (n - a - b) as f64 / n as f64,
                    a as f64 / n as f64,
                    b as f64 / n as f64,
                ];
                let loc = match grid_pos(n, (a, b)) {
                    GridPos::Corner(k) => pinch[edge_index(v, oth[k])],
                    GridPos::Side(j, i) => {
                        let lv = link.side_grid_lv(n, ci, j, i);
                        bc.add_loc(
                            it,
                            LKey::S(v as u8, j as u8, i),
                            hor_combine(&uv[v], &tcorn, w),
                            VKey::Surf {
                                c: c as u32,
                                j: 0,
                                lv,
                            },
                            ctx.side_off(c, ci, j)?,
                        )
                    }
                    GridPos::Interior => bc.add_loc(
                        it,
                        LKey::CI(v as u8, a, b),
                        hor_combine(&uv[v], &tcorn, w),
                        VKey::Surf {
                            c: c as u32,
                            j: 0,
                            lv: LinkVertexId::FaceGrid { corner: ci, a, b },
                        },
                        vec![0i64; ctx.npair],
                    ),
                };
                nodes[gidx(n, a, b)] = loc;
            }
        }
        // cap triangles reuse the subdivided link structure verbatim
        for &gt in &ctx.tris_of[c][ci] {
            let st = &ctx.subs[c].tris[gt];
            let corners = st.nodes.map(|q| nodes[gidx(n, q.0, q.1)]);
            let mut sides = [(0usize, false); 3];
            let mut esides = [(0usize, 0i8); 3];
            for j in 0..3 {
                let (p1, p2) = (st.nodes[(j + 1) % 3], st.nodes[(j + 2) % 3]);
                let flag = st.edges[j].1;
                let (tl, hd) = if flag {
                    (corners[(j + 1) % 3], corners[(j + 2) % 3])
                } else {
                    (corners[(j + 2) % 3], corners[(j + 1) % 3])
                };
                let len = dist_mvec(&bc.locs[tl].pos, &bc.locs[hd].pos);
                let eid = it.edge(
                    EKey::LinkE {
                        c: c as u32,
                        j: 0,
                        id: st.edges[j].0,
                    },
                    bc.locs[tl].vid,
                    bc.locs[hd].vid,
                    len,
                )?;
                let lek = match st.edges[j].0 {
                    LinkEdgeId::Boundary { .. } => {
                        let (sj, si) = boundary_side_params(n, p1, p2)?;
                        LEKey::S(v as u8, sj, si)
                    }
                    id => LEKey::CE(id),
                };
                let le = bc.add_ledge(lek, tl, hd, eid)?;
                sides[j] = (le, flag);
                esides[j] = (eid, if flag { 1 } else { -1 });
            }
            let fid = it.face(
                FKey::LinkT {
                    c: c as u32,
                    j: 0,
                    gt: gt as u32,
                },
                corners.map(|l| bc.locs[l].vid),
                esides,
            )?;
            bc.ltris.push(LTri {
                corners,
                sides,
                fid,
            });
        }
        cap_nodes[v] = nodes;
    }

    // medial grids: one per face, named in the canonical frame of the face
    // pairing's positive side
    for f in 0..4 {
        let (kp, sg) = ctx.dmap[4 * t + f];
        let us = others(f);
        // medial corner k = pinch of the tet edge omitting us[k]
        let em = [
            edge_index(us[1], us[2]),
            edge_index(us[0], us[2]),
            edge_index(us[0], us[1]),
        ];
        // slot permutation into the canonical frame
        let mut sigma = [0usize; 3];
        if sg > 0 {
            sigma = [0, 1, 2];
        } else {
            let pr = &ctx.pl[kp];
            let pinv = pr.perm.inverse();
            let usc = others(pr.from.1);
            for (sl, &u) in us.iter().enumerate() {
                let vc = pinv.apply(u);
                sigma[sl] = usc
                    .iter()
                    .position(|&x| x == vc)
                    .ok_or_else(|| Error::Internal("pairing permutation does not fix the face".into()))?;
            }
        }
        let canon = |a: u32, b: u32| -> (u32, u32) {
            let w = [n - a - b, a, b];
            let mut wc = [0u32; 3];
            for sl in 0..3 {
                wc[sigma[sl]] = w[sl];
            }
            (wc[1], wc[2])
        };
        let moff = if sg > 0 {
            vec![0i64; ctx.npair]
        } else {
            let (tc, fc) = ctx.pl[kp].from;
            ctx.letter(tc, fc)
        };
        let pcorn = [
            bc.locs[pinch[em[0]]].pos,
            bc.locs[pinch[em[1]]].pos,
            bc.locs[pinch[em[2]]].pos,
        ];
        let mut nodes = vec![usize::MAX; gidx(n, n, 0) + 1];
        for a in 0..=n {
            for b in 0..=(n - a) {
                let loc = match grid_pos(n, (a, b)) {
                    GridPos::Corner(k) => pinch[em[k]],
                    GridPos::Side(k, par) => {
                        // this medial side coincides with a cap side of the
                        // corner at us[k]; align parameters by matching the
                        // pinch entities at the ends
                        let (sj, si) = medial_to_cap(ctx, t, f, k, par, em)?;
                        *bc.lmap.get(&LKey::S(us[k] as u8, sj, si)).ok_or_else(|| {
                            Error::Internal("medial side node missing from its cap".into())
                        })?
                    }
                    GridPos::Interior => {
                        let w = [
                            (n - a - b) as f64 / n as f64,
                            a as f64 / n as f64,
                            b as f64 / n as f64,
                        ];
                        let pos = combine(&[(w[0], pcorn[0]), (w[1], pcorn[1]), (w[2], pcorn[2])])?;
                        let (ac, bcn) = canon(a, b);
                        bc.add_loc(
                            it,
                            LKey::MI(f as u8, a, b),
                            pos,
                            VKey::Med {
                                k: kp as u32,
                                a: ac,
                                b: bcn,
                            },
                            moff.clone(),
                        )
                    }
                };
                nodes[gidx(n, a, b)] = loc;
            }
        }
        // medial triangles, canonicalized
        let mut tri_nodes: Vec<[(u32, u32); 3]> = Vec::new();
        for a in 0..n {
            for b in 0..(n - a) {
                tri_nodes.push([(a, b), (a + 1, b), (a, b + 1)]);
                if a + b + 2 <= n {
                    tri_nodes.push([(a + 1, b), (a + 1, b + 1), (a, b + 1)]);
                }
            }
        }
        for tn in tri_nodes {
            let cn: Vec<(u32, u32)> = tn.iter().map(|&(a, b)| canon(a, b)).collect();
            let amin = cn.iter().map(|p| p.0).min().unwrap();
            let bmin = cn.iter().map(|p| p.1).min().unwrap();
            let up = cn.contains(&(amin, bmin));
            let order: [(u32, u32); 3] = if up {
                [(amin, bmin), (amin + 1, bmin), (amin, bmin + 1)]
            } else {
                [(amin + 1, bmin), (amin + 1, bmin + 1), (amin, bmin + 1)]
            };
            // local coordinates of the canonical corner sequence
            let mut corners = [usize::MAX; 3];
            for (slot, oc) in order.iter().enumerate() {
                let li = cn
                    .iter()
                    .position(|p| p == oc)
                    .ok_or_else(|| Error::Internal("medial triangle classification failed".into()))?;
                corners[slot] = nodes[gidx(n, tn[li].0, tn[li].1)];
            }
            let mut sides = [(0usize, false); 3];
            let mut esides = [(0usize, 0i8); 3];
            for j in 0..3 {
                let (ca, cb) = (order[(j + 1) % 3], order[(j + 2) % 3]);
                let (la, lb) = (corners[(j + 1) % 3], corners[(j + 2) % 3]);
                // canonical tail of the segment, in canonical coordinates
                let (fam, tail_c) = segment_family(ca, cb);
                let (tl, hd, lek_eid) = if is_boundary_segment(n, ca, cb) {
                    // boundary segments are cap entities already registered;
                    // recover the ledge through the local coordinates
                    let p1 = tn[cn.iter().position(|p| *p == ca).unwrap()];
                    let p2 = tn[cn.iter().position(|p| *p == cb).unwrap()];
                    let (sj_m, si_m) = boundary_side_params(n, p1, p2)?;
                    let k = sj_m as usize;
                    let (cj, cimin) = medial_to_cap(ctx, t, f, k, si_m, em)?;
                    let (cj2, ci2) = medial_to_cap(ctx, t, f, k, si_m + 1, em)?;
                    debug_assert_eq!(cj, cj2);
                    let le = *bc
                        .lemap
                        .get(&LEKey::S(us[k] as u8, cj, cimin.min(ci2)))
                        .ok_or_else(|| {
                            Error::Internal("medial boundary segment missing from its cap".into())
                        })?;
                    let e = &bc.ledges[le];
                    (e.u, e.v, (le, e.eid))
                } else {
                    let tl_loc = if tail_c == ca { la } else { lb };
                    let hd_loc = if tail_c == ca { lb } else { la };
                    let (aa, bb) = segment_anchor(ca, cb);
                    let len = dist_mvec(&bc.locs[tl_loc].pos, &bc.locs[hd_loc].pos);
                    let eid = it.edge(
                        EKey::MedE {
                            k: kp as u32,
                            fam,
                            a: aa,
                            b: bb,
                        },
                        bc.locs[tl_loc].vid,
                        bc.locs[hd_loc].vid,
                        len,
                    )?;
                    let p1 = tn[cn.iter().position(|p| *p == ca).unwrap()];
                    let p2 = tn[cn.iter().position(|p| *p == cb).unwrap()];
                    let le = bc.add_ledge(
                        LEKey::ME(f as u8, p1.min(p2), p1.max(p2)),
                        tl_loc,
                        hd_loc,
                        eid,
                    )?;
                    (tl_loc, hd_loc, (le, eid))
                };
                let flag = tl == corners[(j + 1) % 3];
                if !flag && hd != corners[(j + 1) % 3] {
                    return Err(Error::Internal("medial side does not join its corners".into()));
                }
                sides[j] = (lek_eid.0, flag);
                esides[j] = (lek_eid.1, if flag { 1 } else { -1 });
                let _ = (fam, tl, hd);
            }
            let (ac, bcn) = (order[0].0.min(order[2].0), order[0].1.min(order[1].1));
            let fid = it.face(
                FKey::MedT {
                    k: kp as u32,
                    a: if up { ac } else { order[2].0 },
                    b: if up { bcn } else { order[0].1 },
                    up,
                },
                corners.map(|l| bc.locs[l].vid),
                esides,
            )?;
            bc.ltris.push(LTri {
                corners,
                sides,
                fid,
            });
        }
    }
    Ok(bc)
}

/// Canonical family and tail of an interior grid segment given the two node
/// coordinates (canonical frame): 0 horizontal `(a,b)→(a+1,b)`, 1 vertical
/// `(a,b)→(a,b+1)`, 2 diagonal `(a+1,b)→(a,b+1)`.
fn segment_family(p: (u32, u32), q: (u32, u32)) -> (u8, (u32, u32)) {
    if p.1 == q.1 {
        (0, (p.0.min(q.0), p.1))
    } else if p.0 == q.0 {
        (1, (p.0, p.1.min(q.1)))
    } else {
        (2, (p.0.max(q.0), p.1.min(q.1)))
    }
}

/// Anchor coordinates `(a, b)` naming an interior segment of each family.
fn segment_anchor(p: (u32, u32), q: (u32, u32)) -> (u32, u32) {
    (p.0.min(q.0), p.1.min(q.1))
}

fn is_boundary_segment(n: u32, p: (u32, u32), q: (u32, u32)) -> bool {
    (p.1 == 0 && q.1 == 0)
        || (p.0 == 0 && q.0 == 0)
        || (p.0 + p.1 == n && q.0 + q.1 == n)
}

/// Side index and minimum parameter of a boundary segment from its two node
/// coordinates.
fn boundary_side_params(n: u32, p: (u32, u32), q: (u32, u32)) -> Result<(u8, u32)> {
    if p.1 == 0 && q.1 == 0 {
        Ok((2, p.0.min(q.0)))
    } else if p.0 == 0 && q.0 == 0 {
        Ok((1, p.1.min(q.1)))
    } else if p.0 + p.1 == n && q.0 + q.1 == n {
        Ok((0, p.1.min(q.1)))
    } else {
        Err(Error::Internal(format!(
            "segment {p:?}-{q:?} is not on the grid boundary"
        )))
    }
}

/// Translate a node on the medial side around corner `us[k]` of face `f`
/// (side parameter `par`, ascending per [`grid_pos`]) into the cap side
/// `(j, i)` of the corner `(t, us[k])`, by matching the tangency pinches at
/// the side's ends.
fn medial_to_cap(
    ctx: &Ctx,
    t: usize,
    f: usize,
    k: usize,
    par: u32,
    em: [usize; 6usize.min(3)],
) -> Result<(u8, u32)> {
    let n = ctx.n;
    let us = others(f);
    let v2 = us[k];
    let &(c2, ci2) = ctx
        .cmap
        .get(&(t, v2))
        .ok_or_else(|| Error::Internal("corner missing from links".into()))?;
    let _ = c2;
    let j2 = slot_of(v2, f);
    // ends of the medial side in ascending parameter order
    let (start, end) = match k {
        0 => (em[1], em[2]),
        1 => (em[0], em[2]),
        _ => (em[0], em[1]),
    };
    let (lo, hi) = match j2 {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let oth2 = others(v2);
    let lo_p = edge_index(v2, oth2[lo]);
    let hi_p = edge_index(v2, oth2[hi]);
    let _ = ci2;
    if (lo_p, hi_p) == (start, end) {
        Ok((j2 as u8, par))
    } else if (lo_p, hi_p) == (end, start) {
        Ok((j2 as u8, n - par))
    } else {
        Err(Error::Internal(format!(
            "medial side of face {f} around vertex {v2} does not match cap side {j2}"
        )))
    }
}

/// Fill the block of tet `t` with radial prism layers and a central cone.
fn block_cells(ctx: &Ctx, it: &mut Interner, t: usize, bc: &BComplex) -> Result<()> {
    let n = ctx.n as usize;
    let zero = it.off(vec![0i64; ctx.npair]);
    let uv: [MVec; 4] = [
        lift_ideal(Ideal::Infinity),
        lift_ideal(Ideal::finite(0.0, 0.0)),
        lift_ideal(Ideal::finite(1.0, 0.0)),
        lift_ideal(Ideal::Finite(ctx.m.shapes[t])),
    ];
    let bpos = combine(&[(1.0, uv[0]), (1.0, uv[1]), (1.0, uv[2]), (1.0, uv[3])])?;
    let bvid = it.vert(VKey::BCen(t as u32));

    // radial copies of every boundary location (copy 0 = the boundary)
    let nl = bc.locs.len();
    let mut cpos = vec![vec![[0.0f64; 4]; nl]; n];
    let mut cvid = vec![vec![0usize; nl]; n];
    for (l, loc) in bc.locs.iter().enumerate() {
        cpos[0][l] = loc.pos;
        cvid[0][l] = loc.vid;
    }
    for q in 1..n {
        let s = q as f64 / n as f64;
        for (l, loc) in bc.locs.iter().enumerate() {
            cpos[q][l] = combine(&[(1.0 - s, loc.pos), (s, bpos)])?;
            cvid[q][l] = it.vert(VKey::BCopy {
                t: t as u32,
                q: q as u32,
                loc: l as u32,
            });
        }
    }

    // copy edges and faces
    let ne = bc.ledges.len();
    let mut ceid = vec![vec![0usize; ne]; n];
    for (e, le) in bc.ledges.iter().enumerate() {
        ceid[0][e] = le.eid;
    }
    for q in 1..n {
        for (e, le) in bc.ledges.iter().enumerate() {
            let len = dist_mvec(&cpos[q][le.u], &cpos[q][le.v]);
            ceid[q][e] = it.edge(
                EKey::BCopyE {
                    t: t as u32,
                    q: q as u32,
                    le: e as u32,
                },
                cvid[q][le.u],
                cvid[q][le.v],
                len,
            )?;
        }
    }
    let nt = bc.ltris.len();
    let mut cfid = vec![vec![0usize; nt]; n];
    for (ti, lt) in bc.ltris.iter().enumerate() {
        cfid[0][ti] = lt.fid;
    }
    for q in 1..n {
        for (ti, lt) in bc.ltris.iter().enumerate() {
            let mut esides = [(0usize, 0i8); 3];
            for j in 0..3 {
                esides[j] = (ceid[q][lt.sides[j].0], if lt.sides[j].1 { 1 } else { -1 });
            }
            cfid[q][ti] = it.face(
                FKey::BCopyT {
                    t: t as u32,
                    q: q as u32,
                    lt: ti as u32,
                },
                [
                    cvid[q][lt.corners[0]],
                    cvid[q][lt.corners[1]],
                    cvid[q][lt.corners[2]],
                ],
                esides,
            )?;
        }
    }

    // radial struts between consecutive copies and spokes to the center
    let mut reid = vec![vec![0usize; nl]; n.saturating_sub(1)];
    for (q, row) in reid.iter_mut().enumerate() {
        for (l, slot) in row.iter_mut().enumerate() {
            let len = dist_mvec(&cpos[q][l], &cpos[q + 1][l]);
            *slot = it.edge(
                EKey::BRad {
                    t: t as u32,
                    q: q as u32,
                    loc: l as u32,
                },
                cvid[q][l],
                cvid[q + 1][l],
                len,
            )?;
        }
    }
    let mut spoke = vec![0usize; nl];
    for (l, slot) in spoke.iter_mut().enumerate() {
        let len = dist_mvec(&bpos, &cpos[n - 1][l]);
        *slot = it.edge(
            EKey::BSpoke {
                t: t as u32,
                loc: l as u32,
            },
            bvid,
            cvid[n - 1][l],
            len,
        )?;
    }

    // radial prisms between copies q and q+1
    for q in 0..n.saturating_sub(1) {
        let mut deid = vec![0usize; ne];
        let mut wfid = vec![[0usize; 2]; ne];
        for (e, le) in bc.ledges.iter().enumerate() {
            let len = dist_mvec(&cpos[q][le.u], &cpos[q + 1][le.v]);
            deid[e] = it.edge(
                EKey::BDiag {
                    t: t as u32,
                    q: q as u32,
                    le: e as u32,
                },
                cvid[q][le.u],
                cvid[q + 1][le.v],
                len,
            )?;
            wfid[e] = wall_faces(
                it,
                FKey::BWallH {
                    t: t as u32,
                    q: q as u32,
                    le: e as u32,
                    half: 0,
                },
                FKey::BWallH {
                    t: t as u32,
                    q: q as u32,
                    le: e as u32,
                    half: 1,
                },
                cvid[q][le.u],
                cvid[q][le.v],
                cvid[q + 1][le.u],
                cvid[q + 1][le.v],
                ceid[q][e],
                ceid[q + 1][e],
                reid[q][le.u],
                reid[q][le.v],
                deid[e],
            )?;
        }
        for (ti, lt) in bc.ltris.iter().enumerate() {
            let bot: [(usize, u32); 3] = [
                (
                    cvid[q][lt.corners[0]],
                    if q == 0 { bc.locs[lt.corners[0]].off } else { zero },
                ),
                (
                    cvid[q][lt.corners[1]],
                    if q == 0 { bc.locs[lt.corners[1]].off } else { zero },
                ),
                (
                    cvid[q][lt.corners[2]],
                    if q == 0 { bc.locs[lt.corners[2]].off } else { zero },
                ),
            ];
            let top: [(usize, u32); 3] = [
                (cvid[q + 1][lt.corners[0]], zero),
                (cvid[q + 1][lt.corners[1]], zero),
                (cvid[q + 1][lt.corners[2]], zero),
            ];
            let mut tails = [0usize; 3];
            let mut sbot = [0usize; 3];
            let mut stop = [0usize; 3];
            let mut sdiag = [0usize; 3];
            for j in 0..3 {
                let (le, flag) = lt.sides[j];
                tails[j] = if flag { (j + 1) % 3 } else { (j + 2) % 3 };
                if bc.ledges[le].u != lt.corners[tails[j]] {
                    return Err(Error::Internal(
                        "boundary triangle side flag disagrees with its edge".into(),
                    ));
                }
                sbot[j] = ceid[q][le];
                stop[j] = ceid[q + 1][le];
                sdiag[j] = deid[le];
            }
            let svert = [
                reid[q][lt.corners[0]],
                reid[q][lt.corners[1]],
                reid[q][lt.corners[2]],
            ];
            let sides = PrismSides {
                tails,
                bot: sbot,
                top: stop,
                vert: svert,
                diag: sdiag,
            };
            // prism center: equal-weight hyperboloid mean of the six corners
            let terms: Vec<(f64, MVec)> = lt
                .corners
                .iter()
                .map(|&l| (1.0, cpos[q][l]))
                .chain(lt.corners.iter().map(|&l| (1.0, cpos[q + 1][l])))
                .collect();
            let cen_pos = combine(&terms)?;
            let cvidc = it.vert(VKey::BPrismC {
                t: t as u32,
                q: q as u32,
                lt: ti as u32,
            });
            let mut rad = [0usize; 6];
            for k in 0..3 {
                rad[k] = it.edge(
                    EKey::BPrismE {
                        t: t as u32,
                        q: q as u32,
                        lt: ti as u32,
                        slot: k as u8,
                    },
                    cvidc,
                    bot[k].0,
                    dist_mvec(&cen_pos, &cpos[q][lt.corners[k]]),
                )?;
                rad[3 + k] = it.edge(
                    EKey::BPrismE {
                        t: t as u32,
                        q: q as u32,
                        lt: ti as u32,
                        slot: (3 + k) as u8,
                    },
                    cvidc,
                    top[k].0,
                    dist_mvec(&cen_pos, &cpos[q + 1][lt.corners[k]]),
                )?;
            }
            let f_wall = [
                wfid[lt.sides[0].0],
                wfid[lt.sides[1].0],
                wfid[lt.sides[2].0],
            ];
            let tt = t as u32;
            let (qq, lti) = (q as u32, ti as u32);
            let f_int = prism_int_faces(
                it,
                |kk| FKey::BPrismF {
                    t: tt,
                    q: qq,
                    lt: lti,
                    kk,
                },
                cvidc,
                bot,
                top,
                &sides,
                rad,
            )?;
            prism_cells(
                it,
                (cvidc, zero),
                bot,
                top,
                &sides,
                rad,
                cfid[q][ti],
                cfid[q + 1][ti],
                f_wall,
                f_int,
            );
        }
    }

    // central cone over the innermost copy
    let qin = n - 1;
    let mut conef = vec![0usize; ne];
    for (e, le) in bc.ledges.iter().enumerate() {
        conef[e] = cone_face(
            it,
            FKey::BConeF {
                t: t as u32,
                le: e as u32,
            },
            bvid,
            cvid[qin][le.u],
            cvid[qin][le.v],
            ceid[qin][e],
            spoke[le.u],
            spoke[le.v],
        )?;
    }
    for lt in bc.ltris.iter() {
        let corners: [(usize, u32); 3] = [
            (
                cvid[qin][lt.corners[0]],
                if qin == 0 { bc.locs[lt.corners[0]].off } else { zero },
            ),
            (
                cvid[qin][lt.corners[1]],
                if qin == 0 { bc.locs[lt.corners[1]].off } else { zero },
            ),
            (
                cvid[qin][lt.corners[2]],
                if qin == 0 { bc.locs[lt.corners[2]].off } else { zero },
            ),
        ];
        let spokes = [
            spoke[lt.corners[0]],
            spoke[lt.corners[1]],
            spoke[lt.corners[2]],
        ];
        let mut sides = [(0usize, false); 3];
        let mut cones = [0usize; 3];
        for j in 0..3 {
            let (le, flag) = lt.sides[j];
            sides[j] = (ceid[qin][le], flag);
            cones[j] = conef[le];
        }
        cone_cell(it, (bvid, zero), corners, spokes, sides, cfid[qin][lt.fid.min(usize::MAX)], cones);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// shell assembly

/// Stack the prism layers of cusp `c` from the tangency section to height
/// `t_height`, tagging the top faces.
fn shell_cells(
    ctx: &Ctx,
    it: &mut Interner,
    c: usize,
    m_layers: usize,
    step: f64,
    t_height: f64,
) -> Result<()> {
    let n = ctx.n;
    let link = &ctx.links[c];
    let sub = &ctx.subs[c];
    let cu = c as u32;
    let zero = it.off(vec![0i64; ctx.npair]);

    // vertex id of link vertex `lv` at layer `j` (layer-0 corners pinch to
    // the tangency points)
    let vid_of = |it: &mut Interner, j: usize, ci: usize, coords: (u32, u32), lv: LinkVertexId| {
        if j == 0 {
            if let GridPos::Corner(k) = grid_pos(n, coords) {
                let (t, v) = link.corners[ci];
                let w = others(v)[k];
                return it.vert(VKey::Tang(ctx.eclass_of[6 * t + edge_index(v, w)]));
            }
        }
        it.vert(VKey::Surf {
            c: cu,
            j: j as u32,
            lv,
        })
    };

    for j in 0..m_layers {
        let (z0, z1) = (((j as f64) * step).exp(), ((j as f64 + 1.0) * step).exp());
        let ju = j as u32;
        for (gt, st) in sub.tris.iter().enumerate() {
            let ci = st.corner;
            let gtu = gt as u32;
            let mut bot = [(0usize, 0u32); 3];
            let mut top = [(0usize, 0u32); 3];
            for s in 0..3 {
                let off_bot = it.off(ctx.shell_off(c, ci, st.nodes[s], j == 0)?);
                let off_top = it.off(ctx.shell_off(c, ci, st.nodes[s], false)?);
                bot[s] = (vid_of(it, j, ci, st.nodes[s], st.verts[s]), off_bot);
                top[s] = (vid_of(it, j + 1, ci, st.nodes[s], st.verts[s]), off_top);
            }
            let mut tails = [0usize; 3];
            let mut sbot = [0usize; 3];
            let mut stop = [0usize; 3];
            let mut svert = [0usize; 3];
            let mut sdiag = [0usize; 3];
            let mut f_wall = [[0usize; 2]; 3];
            for jj in 0..3 {
                let (id, flag) = st.edges[jj];
                let (tl, hd) = if flag { ((jj + 1) % 3, (jj + 2) % 3) } else { ((jj + 2) % 3, (jj + 1) % 3) };
                tails[jj] = tl;
                let (wt, wh) = (st.pos[tl], st.pos[hd]);
                sbot[jj] = it.edge(
                    EKey::LinkE { c: cu, j: ju, id },
                    bot[tl].0,
                    bot[hd].0,
                    uhs_dist(wt, z0, wh, z0),
                )?;
                stop[jj] = it.edge(
                    EKey::LinkE { c: cu, j: ju + 1, id },
                    top[tl].0,
                    top[hd].0,
                    uhs_dist(wt, z1, wh, z1),
                )?;
                sdiag[jj] = it.edge(
                    EKey::DiagE { c: cu, j: ju, id },
                    bot[tl].0,
                    top[hd].0,
                    uhs_dist(wt, z0, wh, z1),
                )?;
            }
            for s in 0..3 {
                svert[s] = it.edge(
                    EKey::VertE {
                        c: cu,
                        j: ju,
                        lv: st.verts[s],
                    },
                    bot[s].0,
                    top[s].0,
                    step,
                )?;
            }
            for jj in 0..3 {
                let (id, _) = st.edges[jj];
                let tl = tails[jj];
                let hd = if tl == (jj + 1) % 3 { (jj + 2) % 3 } else { (jj + 1) % 3 };
                f_wall[jj] = wall_faces(
                    it,
                    FKey::WallH { c: cu, j: ju, id, half: 0 },
                    FKey::WallH { c: cu, j: ju, id, half: 1 },
                    bot[tl].0,
                    bot[hd].0,
                    top[tl].0,
                    top[hd].0,
                    sbot[jj],
                    stop[jj],
                    svert[tl],
                    svert[hd],
                    sdiag[jj],
                )?;
            }
            let mk_cap = |it: &mut Interner, layer: u32, vs: [(usize, u32); 3], es: [usize; 3]| {
                let mut esides = [(0usize, 0i8); 3];
                for jj in 0..3 {
                    esides[jj] = (es[jj], if st.edges[jj].1 { 1 } else { -1 });
                }
                it.face(
                    FKey::LinkT {
                        c: cu,
                        j: layer,
                        gt: gtu,
                    },
                    [vs[0].0, vs[1].0, vs[2].0],
                    esides,
                )
            };
            let f_bot = mk_cap(it, ju, bot, sbot)?;
            let f_top = mk_cap(it, ju + 1, top, stop)?;
            let wc = (st.pos[0] + st.pos[1] + st.pos[2]) / 3.0;
            let zc = (z0 * z1).sqrt();
            let cvidc = it.vert(VKey::ShPrismC {
                c: cu,
                j: ju,
                gt: gtu,
            });
            let mut rad = [0usize; 6];
            for s in 0..3 {
                rad[s] = it.edge(
                    EKey::ShPrismE {
                        c: cu,
                        j: ju,
                        gt: gtu,
                        slot: s as u8,
                    },
                    cvidc,
                    bot[s].0,
                    uhs_dist(wc, zc, st.pos[s], z0),
                )?;
                rad[3 + s] = it.edge(
                    EKey::ShPrismE {
                        c: cu,
                        j: ju,
                        gt: gtu,
                        slot: (3 + s) as u8,
                    },
                    cvidc,
                    top[s].0,
                    uhs_dist(wc, zc, st.pos[s], z1),
                )?;
            }
            let sides = PrismSides {
                tails,
                bot: sbot,
                top: stop,
                vert: svert,
                diag: sdiag,
            };
            let f_int = prism_int_faces(
                it,
                |kk| FKey::ShPrismF {
                    c: cu,
                    j: ju,
                    gt: gtu,
                    kk,
                },
                cvidc,
                bot,
                top,
                &sides,
                rad,
            )?;
            prism_cells(
                it,
                (cvidc, zero),
                bot,
                top,
                &sides,
                rad,
                f_bot,
                f_top,
                f_wall,
                f_int,
            );
        }
    }
    // tag the top layer
    for gt in 0..sub.tris.len() {
        let fid = it.fmap[&FKey::LinkT {
            c: cu,
            j: m_layers as u32,
            gt: gt as u32,
        }];
        it.ftag[fid] = Some(BoundaryTag {
            cusp: c,
            height: t_height,
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// driver

/// Build the metric mesh of `m` truncated at height `t_height` above the
/// tangency horotori.
///
/// Preconditions: `t_height ≥ τ` from [`truncation_constants`], `refine`
/// within the configured maximum, and every shape equal to the regular
/// `exp(iπ/3)` (the tangency decoration of the blocks is the unit one, which
/// is exact for regular ideal triangulations; other shapes would need a
/// decoration solve and are out of scope).
pub fn build_metric_mesh(
    m: &ManifoldFile,
    t_height: f64,
    refine: u32,
    opts: &MeshOptions,
) -> Result<BuiltMesh> {
    if refine > opts.max_refine {
        return Err(Error::Precondition(format!(
            "refinement {refine} exceeds the configured maximum {}",
            opts.max_refine
        )));
    }
    if !(opts.rho > 1.0) || !opts.rho.is_finite() {
        return Err(Error::Domain(format!(
            "grading ratio must exceed 1, got {}",
            opts.rho
        )));
    }
    let reg = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_3);
    for (t, z) in m.shapes.iter().enumerate() {
        if (z - reg).norm() > REGULAR_SHAPE_TOL {
            return Err(Error::Unsupported(format!(
                "meshing requires the regular shape exp(iπ/3) at every \
                 tetrahedron; tet {t} has {z}"
            )));
        }
    }
    let cusps = cusp_geometry(m)?;
    let tc = truncation_constants(&cusps, m.tau0)?;
    if t_height < tc.tau - 1e-12 {
        return Err(Error::Precondition(format!(
            "truncation height {t_height} is below tau = {:.12}",
            tc.tau
        )));
    }
    let links = develop_cusps(m)?;
    let n = 1u32 << refine;
    let subs = links
        .iter()
        .map(|l| l.subdivide(refine))
        .collect::<Result<Vec<_>>>()?;
    let ctx = Ctx::build(m, &links, &subs, n)?;

    let step_max = opts.rho.ln() / n as f64;
    let m_layers = ((t_height / step_max).ceil() as usize).max(1);
    let step = t_height / m_layers as f64;

    let mut it = Interner::new();
    for t in 0..m.tri.n {
        let bcx = block_boundary(&ctx, &mut it, t)?;
        block_cells(&ctx, &mut it, t, &bcx)?;
    }
    for c in 0..links.len() {
        shell_cells(&ctx, &mut it, c, m_layers, step, t_height)?;
    }

    let mesh = MetricMesh {
        nverts: it.vkeys.len(),
        edges: it.edges,
        lengths: it.lengths,
        faces: it.faces,
        tets: it.tets,
        boundary: it.ftag,
    };
    mesh.check()?;
    Ok(BuiltMesh {
        mesh,
        vkeys: it.vkeys,
        offsets: it.offsets,
        cell_offsets: it.cell_offsets,
        links,
        subs,
        n_pairings: ctx.npair,
        height: t_height,
        refine,
        shell_layers: m_layers,
        step,
    })
}

/// Pull an integer face-pairing cocycle back to an edge cochain:
/// `α(tail → head) = φ·(õ[head] − õ[tail])` evaluated in any incident cell.
/// Every pair of cells sharing an edge must agree exactly; a mismatch means
/// `φ` does not kill an edge relation (or a builder bug) and is an error.
pub fn pullback_cocycle(bm: &BuiltMesh, phi: &[i64]) -> Result<Vec<i64>> {
    if phi.len() != bm.n_pairings {
        return Err(Error::Precondition(format!(
            "cocycle has {} entries, manifold has {} face pairings",
            phi.len(),
            bm.n_pairings
        )));
    }
    let dots: Vec<i64> = bm
        .offsets
        .iter()
        .map(|o| o.iter().zip(phi).map(|(a, b)| a * b).sum())
        .collect();
    let mut alpha: Vec<Option<i64>> = vec![None; bm.mesh.edges.len()];
    for (ci, tet) in bm.mesh.tets.iter().enumerate() {
        let offs = bm.cell_offsets[ci];
        for (k, &(a, b)) in EDGE_PAIRS.iter().enumerate() {
            let v = dots[offs[b] as usize] - dots[offs[a] as usize];
            let (eid, sign) = tet.edges[k];
            let val = if sign > 0 { v } else { -v };
            match alpha[eid] {
                None => alpha[eid] = Some(val),
                Some(prev) if prev != val => {
                    return Err(Error::Internal(format!(
                        "cocycle pullback disagrees across cells on edge {eid}: \
                         {prev} vs {val}"
                    )));
                }
                _ => {}
            }
        }
    }
    alpha
        .into_iter()
        .enumerate()
        .map(|(e, v)| v.ok_or_else(|| Error::Internal(format!("edge {e} belongs to no cell"))))
        .collect()
}
