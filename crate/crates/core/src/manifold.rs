//! Ideal-triangulation combinatorics.
//!
//! Conventions (SnapPea-style):
//!   * tetrahedra `0..n-1`, vertices of each tetrahedron labelled `0..3`;
//!   * face `f` of a tetrahedron is the face opposite vertex `f`;
//!   * a gluing of face `f` of tet `t` is `(t2, p)` where `p` is a permutation
//!     of `{0,1,2,3}` (`p[v]` = image of vertex `v`) with `p[f]` the glued face
//!     of `t2`.  Consistency: `glue(t2, p[f]) == (t, p^-1)`.
//!
//! From the gluing data alone this module derives the identification classes
//! of tetrahedron edges (the edges of the quotient pseudo-manifold), of ideal
//! vertices (the cusps), and of half-edges (the vertices of each cusp's link
//! triangulation), plus orientability, the face-pairing generators of the dual
//! spine presentation of the fundamental group, the cyclic word of generators
//! around each edge class, and `H_1(M; Z)` by Smith reduction of the
//! abelianized relations.

use crate::error::{Error, Result};
use crate::exact;
use num_bigint::BigInt;
use std::collections::BTreeSet;

/// The six edges of a tetrahedron as vertex pairs, in index order.
pub const EDGE_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Index into [`EDGE_PAIRS`] of the edge spanned by vertices `a != b`.
pub fn edge_index(a: usize, b: usize) -> usize {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    match (a, b) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        (2, 3) => 5,
        _ => panic!("invalid edge ({a}, {b})"),
    }
}

/// Shape-parameter slot of each edge index: opposite edges `{01,23}`, `{02,13}`,
/// `{03,12}` carry the cross-ratio parameters `z`, `1/(1-z)`, `1 - 1/z`.
pub const EDGE_PARAM_SLOT: [usize; 6] = [0, 1, 2, 2, 1, 0];

/// A permutation of `{0,1,2,3}` stored as its image array.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Perm4(pub [u8; 4]);

impl Perm4 {
    pub const IDENTITY: Perm4 = Perm4([0, 1, 2, 3]);

    pub fn new(images: [u8; 4]) -> Result<Perm4> {
        let mut seen = [false; 4];
        for &v in &images {
            if v > 3 || seen[v as usize] {
                return Err(Error::Validation(format!(
                    "not a permutation of 0..=3: {images:?}"
                )));
            }
            seen[v as usize] = true;
        }
        Ok(Perm4(images))
    }

    /// Parse a compact digit string such as `"0231"`.
    pub fn parse(s: &str) -> Result<Perm4> {
        let digits: Vec<u8> = s
            .chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as u8)
                    .ok_or_else(|| Error::Validation(format!("bad permutation digit in {s:?}")))
            })
            .collect::<Result<_>>()?;
        if digits.len() != 4 {
            return Err(Error::Validation(format!(
                "permutation needs 4 digits, got {s:?}"
            )));
        }
        Perm4::new([digits[0], digits[1], digits[2], digits[3]])
    }

    pub fn apply(&self, v: usize) -> usize {
        self.0[v] as usize
    }

    /// `(self ∘ other)(v) = self(other(v))`.
    pub fn compose(&self, other: &Perm4) -> Perm4 {
        let mut out = [0u8; 4];
        for v in 0..4 {
            out[v] = self.0[other.0[v] as usize];
        }
        Perm4(out)
    }

    pub fn inverse(&self) -> Perm4 {
        let mut out = [0u8; 4];
        for (i, &v) in self.0.iter().enumerate() {
            out[v as usize] = i as u8;
        }
        Perm4(out)
    }

    /// Parity as inversion count mod 2: `0` even, `1` odd.
    pub fn parity(&self) -> u8 {
        let mut par = 0u8;
        for i in 0..4 {
            for j in (i + 1)..4 {
                if self.0[i] > self.0[j] {
                    par ^= 1;
                }
            }
        }
        par
    }

    pub fn to_digits(&self) -> String {
        self.0.iter().map(|d| char::from(b'0' + d)).collect()
    }
}

/// A face-pairing orbit: the chosen positive side `(t, f)`, the opposite side
/// `(t2, f2)`, and the gluing permutation carrying tet `t` to tet `t2`.
#[derive(Clone, Debug)]
pub struct Pairing {
    pub from: (usize, usize),
    pub to: (usize, usize),
    pub perm: Perm4,
}

/// Directed face `(t, f)` -> (pairing index, +1 on the positive side, -1 on
/// the other).  Indexed by `4t + f`.
pub type FaceGenMap = Vec<(usize, i8)>;

/// Gluing table of an ideal triangulation: `glue[t][f] = (t2, p)`.
#[derive(Clone, Debug)]
pub struct Triangulation {
    pub n: usize,
    pub glue: Vec<[(usize, Perm4); 4]>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }

    /// Classes ordered by smallest member, members ascending.
    fn classes(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut order: Vec<Option<usize>> = vec![None; n];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            let r = self.find(i);
            match order[r] {
                Some(k) => out[k].push(i),
                None => {
                    order[r] = Some(out.len());
                    out.push(vec![i]);
                }
            }
        }
        out
    }
}

impl Triangulation {
    pub fn new(n: usize, glue: Vec<[(usize, Perm4); 4]>) -> Result<Triangulation> {
        if n == 0 || glue.len() != n {
            return Err(Error::Validation(format!(
                "gluing table has {} tetrahedra, expected {}",
                glue.len(),
                n
            )));
        }
        let tri = Triangulation { n, glue };
        tri.check_consistent()?;
        Ok(tri)
    }

    /// Every face glued, involutive (`glue(t2, p[f]) == (t, p^-1)`), no face
    /// glued to itself, dual graph connected.
    pub fn check_consistent(&self) -> Result<()> {
        for t in 0..self.n {
            for f in 0..4 {
                let (t2, p) = self.glue[t][f];
                if t2 >= self.n {
                    return Err(Error::Validation(format!(
                        "face ({t}, {f}) glued to missing tetrahedron {t2}"
                    )));
                }
                let f2 = p.apply(f);
                if (t2, f2) == (t, f) {
                    return Err(Error::Validation(format!(
                        "face ({t}, {f}) glued to itself; quotient is an orbifold"
                    )));
                }
                let (t3, q) = self.glue[t2][f2];
                if (t3, q) != (t, p.inverse()) {
                    return Err(Error::Validation(format!(
                        "gluing of face ({t}, {f}) is not matched by face ({t2}, {f2})"
                    )));
                }
            }
        }
        // connectivity of the dual graph
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(t) = stack.pop() {
            for f in 0..4 {
                let t2 = self.glue[t][f].0;
                if !seen[t2] {
                    seen[t2] = true;
                    stack.push(t2);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Validation(
                "triangulation is not connected".to_string(),
            ));
        }
        Ok(())
    }

    /// Identification classes of tetrahedron edges; members are `6t + ei`.
    pub fn edge_classes(&self) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::new(6 * self.n);
        for t in 0..self.n {
            for f in 0..4 {
                let (t2, p) = self.glue[t][f];
                let verts: Vec<usize> = (0..4).filter(|&v| v != f).collect();
                for i in 0..3 {
                    for j in (i + 1)..3 {
                        let (a, b) = (verts[i], verts[j]);
                        let e1 = 6 * t + edge_index(a, b);
                        let e2 = 6 * t2 + edge_index(p.apply(a), p.apply(b));
                        uf.union(e1, e2);
                    }
                }
            }
        }
        uf.classes()
    }

    /// Identification classes of ideal vertices (the cusps); members `4t + v`.
    pub fn vertex_classes(&self) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::new(4 * self.n);
        for t in 0..self.n {
            for f in 0..4 {
                let (t2, p) = self.glue[t][f];
                for v in 0..4 {
                    if v != f {
                        uf.union(4 * t + v, 4 * t2 + p.apply(v));
                    }
                }
            }
        }
        uf.classes()
    }

    /// Identification classes of half-edges `(t, v -> w)`, `v` the near end;
    /// these are the vertices of the link triangulations.  Members are
    /// `12t + 3v + (w
    /// if w < v then w else w - 1)`.
    pub fn half_edge_classes(&self) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::new(12 * self.n);
        for t in 0..self.n {
            for f in 0..4 {
                let (t2, p) = self.glue[t][f];
                for v in 0..4 {
                    for w in 0..4 {
                        if v != w && v != f && w != f {
                            uf.union(
                                half_edge_index(t, v, w),
                                half_edge_index(t2, p.apply(v), p.apply(w)),
                            );
                        }
                    }
                }
            }
        }
        uf.classes()
    }

    /// Euler characteristic of each vertex-link surface, in cusp order.
    /// Every cusp of a finite-volume structure must report 0 (torus/Klein).
    pub fn cusp_euler_chars(&self) -> Vec<i64> {
        let vcls = self.vertex_classes();
        let hcls = self.half_edge_classes();
        // map each half-edge to its class index
        let mut hclass_of = vec![0usize; 12 * self.n];
        for (k, cls) in hcls.iter().enumerate() {
            for &h in cls {
                hclass_of[h] = k;
            }
        }
        vcls.iter()
            .map(|cls| {
                let faces = cls.len() as i64; // one link triangle per corner
                let mut roots = BTreeSet::new();
                for &c in cls {
                    let (t, v) = (c / 4, c % 4);
                    for w in 0..4 {
                        if w != v {
                            roots.insert(hclass_of[half_edge_index(t, v, w)]);
                        }
                    }
                }
                roots.len() as i64 - 3 * faces / 2 + faces
            })
            .collect()
    }

    /// A coherent orientation of the tetrahedra exists iff sign propagation
    /// across all gluings is consistent (odd permutations preserve the sign).
    pub fn orientable(&self) -> bool {
        let mut sign = vec![0i8; self.n];
        sign[0] = 1;
        let mut stack = vec![0usize];
        while let Some(t) = stack.pop() {
            for f in 0..4 {
                let (t2, p) = self.glue[t][f];
                let want = if p.parity() == 1 { sign[t] } else { -sign[t] };
                if sign[t2] == 0 {
                    sign[t2] = want;
                    stack.push(t2);
                } else if sign[t2] != want {
                    return false;
                }
            }
        }
        sign.iter().all(|&s| s != 0)
    }

    /// Whether the link surface of the given cusp (a class from
    /// [`vertex_classes`]) is orientable: sign propagation over its corners
    /// `(t, v)`, flipping across gluings of even parity.  A torus link is
    /// orientable; a Klein-bottle link is not.
    pub fn cusp_orientable(&self, corners: &[usize]) -> bool {
        let mut sign = vec![0i8; 4 * self.n];
        let start = corners[0];
        sign[start] = 1;
        let mut stack = vec![start];
        while let Some(c) = stack.pop() {
            let (t, v) = (c / 4, c % 4);
            for f in 0..4 {
                if f == v {
                    continue;
                }
                let (t2, p) = self.glue[t][f];
                let c2 = 4 * t2 + p.apply(v);
                let want = if p.parity() == 1 { sign[c] } else { -sign[c] };
                if sign[c2] == 0 {
                    sign[c2] = want;
                    stack.push(c2);
                } else if sign[c2] != want {
                    return false;
                }
            }
        }
        true
    }

    /// Face pairings as unordered orbits, positive side first in sorted
    /// `(t, f)` order, plus the directed-face map.
    pub fn pairings(&self) -> (Vec<Pairing>, FaceGenMap) {
        let mut dmap: FaceGenMap = vec![(usize::MAX, 0); 4 * self.n];
        let mut pl = Vec::new();
        for t in 0..self.n {
            for f in 0..4 {
                if dmap[4 * t + f].1 != 0 {
                    continue;
                }
                let (t2, p) = self.glue[t][f];
                let f2 = p.apply(f);
                let k = pl.len();
                pl.push(Pairing {
                    from: (t, f),
                    to: (t2, f2),
                    perm: p,
                });
                dmap[4 * t + f] = (k, 1);
                dmap[4 * t2 + f2] = (k, -1);
            }
        }
        (pl, dmap)
    }

    /// For each edge class (in [`edge_classes`] order) the cyclic word of
    /// face-pairing generators crossed while walking the fan of tetrahedra
    /// around the edge, starting from the least member with its
    /// `EDGE_PAIRS` orientation.
    pub fn edge_words(&self) -> Result<Vec<Vec<(usize, i8)>>> {
        let (_pl, dmap) = self.pairings();
        let ecls = self.edge_classes();
        let mut words = Vec::with_capacity(ecls.len());
        for cls in &ecls {
            let e0 = cls[0];
            let (t0, ei) = (e0 / 6, e0 % 6);
            let (a0, b0) = EDGE_PAIRS[ei];
            let comp: Vec<usize> = (0..4).filter(|&v| v != a0 && v != b0).collect();
            let start = (t0, a0, b0, comp[0]);
            let mut state = start;
            let mut word = Vec::new();
            let mut visited = 0usize;
            loop {
                let (t, a, b, c) = state;
                word.push(dmap[4 * t + c]);
                let (t2, p) = self.glue[t][c];
                let (a2, b2, cin) = (p.apply(a), p.apply(b), p.apply(c));
                let comp2: Vec<usize> = (0..4).filter(|&v| v != a2 && v != b2).collect();
                let cout = if comp2[1] == cin { comp2[0] } else { comp2[1] };
                state = (t2, a2, b2, cout);
                visited += 1;
                if state == start {
                    break;
                }
                if visited > 10 * cls.len() + 20 {
                    return Err(Error::Internal(format!(
                        "edge cycle did not close around class starting at tet-edge {e0}"
                    )));
                }
            }
            words.push(word);
        }
        Ok(words)
    }

    /// For each edge class (in [`edge_classes`] order) the members `(t, edge
    /// index)` in fan-walk order, each with the abelianized prefix of the
    /// edge word crossed to reach that member's wedge from the first member.
    /// The first entry is the least member with the zero prefix, so the
    /// prefixes are chart offsets relative to the root wedge.
    ///
    /// Errs when a fan closes with the edge orientation reversed (both ends
    /// of the edge on one half-edge class): the walk would then pass every
    /// wedge twice and no single-valued offset per wedge exists.
    pub fn edge_fan_prefixes(&self) -> Result<Vec<Vec<((usize, usize), Vec<i64>)>>> {
        let (pl, dmap) = self.pairings();
        let npair = pl.len();
        let ecls = self.edge_classes();
        let mut out = Vec::with_capacity(ecls.len());
        for cls in &ecls {
            let e0 = cls[0];
            let (t0, ei) = (e0 / 6, e0 % 6);
            let (a0, b0) = EDGE_PAIRS[ei];
            let comp: Vec<usize> = (0..4).filter(|&v| v != a0 && v != b0).collect();
            let start = (t0, a0, b0, comp[0]);
            let mut state = start;
            let mut prefix = vec![0i64; npair];
            let mut seen = BTreeSet::new();
            let mut fan = Vec::with_capacity(cls.len());
            loop {
                let (t, a, b, c) = state;
                let member = 6 * t + edge_index(a, b);
                if !seen.insert(member) {
                    return Err(Error::Unsupported(format!(
                        "edge fan through tet-edge {member} reverses the edge \
                         orientation; per-wedge chart offsets are undefined"
                    )));
                }
                fan.push(((t, edge_index(a, b)), prefix.clone()));
                let (k, s) = dmap[4 * t + c];
                prefix[k] += s as i64;
                let (t2, p) = self.glue[t][c];
                let (a2, b2, cin) = (p.apply(a), p.apply(b), p.apply(c));
                let comp2: Vec<usize> = (0..4).filter(|&v| v != a2 && v != b2).collect();
                let cout = if comp2[1] == cin { comp2[0] } else { comp2[1] };
                state = (t2, a2, b2, cout);
                if state == start {
                    break;
                }
            }
            if fan.len() != cls.len() {
                return Err(Error::Internal(format!(
                    "fan around tet-edge {e0} visited {} wedges, class has {}",
                    fan.len(),
                    cls.len()
                )));
            }
            out.push(fan);
        }
        Ok(out)
    }

    /// Pairing indices of a spanning tree of the dual graph (depth-first from
    /// tet 0); the corresponding generators are killed in the spine
    /// presentation of the fundamental group.
    pub fn spine_tree(&self) -> BTreeSet<usize> {
        let (_pl, dmap) = self.pairings();
        let mut seen = vec![false; self.n];
        seen[0] = true;
        let mut tree = BTreeSet::new();
        let mut frontier = vec![0usize];
        while let Some(t) = frontier.pop() {
            for f in 0..4 {
                let (t2, _p) = self.glue[t][f];
                if !seen[t2] {
                    seen[t2] = true;
                    tree.insert(dmap[4 * t + f].0);
                    frontier.push(t2);
                }
            }
        }
        tree
    }

    /// Abelianized relation rows over the face-pairing generators: one row per
    /// edge word plus a unit row per spanning-tree generator.  The integer
    /// kernel of this matrix is the lattice of cohomology classes
    /// `H^1(M; Z)` expressed as cocycles vanishing on the tree.
    pub fn relation_rows(&self) -> Result<Vec<Vec<i64>>> {
        let (pl, _dmap) = self.pairings();
        let g = pl.len();
        let words = self.edge_words()?;
        let tree = self.spine_tree();
        let mut rows = Vec::with_capacity(words.len() + tree.len());
        for w in &words {
            let mut r = vec![0i64; g];
            for &(k, s) in w {
                r[k] += s as i64;
            }
            rows.push(r);
        }
        for &k in &tree {
            let mut r = vec![0i64; g];
            r[k] = 1;
            rows.push(r);
        }
        Ok(rows)
    }

    /// `H_1(M; Z)`: free rank and torsion invariant factors (each > 1), via
    /// Smith reduction of the abelianized spine relations.
    pub fn h1(&self) -> Result<(usize, Vec<u64>)> {
        let rows = self.relation_rows()?;
        let g = self.pairings().0.len();
        let mat: Vec<Vec<BigInt>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        let d = exact::smith_diagonal(&mat);
        let nonzero = d.iter().filter(|x| **x != BigInt::from(0)).count();
        let rank = g - nonzero;
        let tors: Vec<u64> = d
            .iter()
            .filter(|x| **x > BigInt::from(1))
            .map(|x| {
                let s = x.to_string();
                s.parse::<u64>().unwrap_or(u64::MAX)
            })
            .collect();
        Ok((rank, tors))
    }

    /// Regular cover determined by sheet permutations `gens[k]` (one per face
    /// pairing of the base): sheet `i` of tet `t` is tet `t + n*i`, and
    /// crossing pairing `k` with sign `s` sends sheet `i` to `gens[k]^s(i)`.
    pub fn cover(&self, gens: &[Vec<usize>]) -> Result<Triangulation> {
        let (pl, dmap) = self.pairings();
        if gens.len() != pl.len() {
            return Err(Error::Validation(format!(
                "cover needs {} sheet permutations, got {}",
                pl.len(),
                gens.len()
            )));
        }
        let deg = gens.first().map(|g| g.len()).unwrap_or(0);
        if deg == 0 || gens.iter().any(|g| g.len() != deg) {
            return Err(Error::Validation(
                "sheet permutations must share a positive degree".to_string(),
            ));
        }
        let mut glue = vec![[(0usize, Perm4::IDENTITY); 4]; self.n * deg];
        for t in 0..self.n {
            for f in 0..4 {
                let (t2, p) = self.glue[t][f];
                let (k, s) = dmap[4 * t + f];
                for i in 0..deg {
                    let j = if s > 0 {
                        gens[k][i]
                    } else {
                        gens[k]
                            .iter()
                            .position(|&x| x == i)
                            .expect("sheet permutation is a bijection")
                    };
                    glue[t + self.n * i][f] = (t2 + self.n * j, p);
                }
            }
        }
        Triangulation::new(self.n * deg, glue)
    }
}

/// Index of half-edge `(t, v -> w)` with `v != w`.
pub fn half_edge_index(t: usize, v: usize, w: usize) -> usize {
    debug_assert!(v != w && v < 4 && w < 4);
    12 * t + 3 * v + if w < v { w } else { w - 1 }
}

#[cfg(test)]
pub(crate) mod tables {
    use super::{Perm4, Triangulation};

    fn build(n: usize, rows: &[(usize, usize, usize, [u8; 4])]) -> Triangulation {
        let mut glue = vec![[(0usize, Perm4::IDENTITY); 4]; n];
        for &(t, f, t2, p) in rows {
            glue[t][f] = (t2, Perm4(p));
        }
        Triangulation::new(n, glue).expect("fixture table is consistent")
    }

    /// Two-tetrahedron figure-eight-knot-complement gluing table.
    pub fn fig8() -> Triangulation {
        build(
            2,
            &[
                (0, 0, 1, [0, 2, 3, 1]),
                (0, 1, 1, [2, 1, 3, 0]),
                (0, 2, 1, [1, 3, 2, 0]),
                (0, 3, 1, [1, 2, 0, 3]),
                (1, 0, 0, [0, 3, 1, 2]),
                (1, 1, 0, [3, 1, 0, 2]),
                (1, 2, 0, [3, 0, 2, 1]),
                (1, 3, 0, [2, 0, 1, 3]),
            ],
        )
    }

    /// The sister of the figure-eight complement (two tetrahedra).
    pub fn sister() -> Triangulation {
        build(
            2,
            &[
                (0, 0, 1, [0, 1, 3, 2]),
                (0, 1, 1, [2, 1, 0, 3]),
                (0, 2, 1, [0, 3, 2, 1]),
                (0, 3, 1, [1, 0, 2, 3]),
                (1, 0, 0, [0, 1, 3, 2]),
                (1, 1, 0, [2, 1, 0, 3]),
                (1, 2, 0, [0, 3, 2, 1]),
                (1, 3, 0, [1, 0, 2, 3]),
            ],
        )
    }

    /// One-tetrahedron non-orientable Gieseking gluing table.
    pub fn gieseking() -> Triangulation {
        build(
            1,
            &[
                (0, 0, 0, [1, 2, 0, 3]),
                (0, 1, 0, [2, 0, 1, 3]),
                (0, 2, 0, [0, 2, 3, 1]),
                (0, 3, 0, [0, 3, 1, 2]),
            ],
        )
    }

    /// Sheet permutations of the five-fold cover of the sister manifold,
    /// indexed by the sister's four face pairings.
    pub const SISTER5_GENS: [[usize; 5]; 4] = [
        [0, 1, 2, 3, 4],
        [0, 2, 3, 4, 1],
        [1, 0, 4, 2, 3],
        [2, 1, 4, 3, 0],
    ];
}

#[cfg(test)]
mod tests {
    use super::tables::*;
    use super::*;

    #[test]
    fn perm_algebra() {
        let p = Perm4::parse("0231").unwrap();
        let q = Perm4([1, 0, 3, 2]);
        assert_eq!(p.inverse().compose(&p), Perm4::IDENTITY);
        assert_eq!(p.compose(&p.inverse()), Perm4::IDENTITY);
        // (p.q)(v) = p(q(v))
        for v in 0..4 {
            assert_eq!(p.compose(&q).apply(v), p.apply(q.apply(v)));
        }
        assert_eq!(Perm4::IDENTITY.parity(), 0);
        assert_eq!(Perm4([1, 0, 2, 3]).parity(), 1);
        assert_eq!(Perm4([1, 2, 0, 3]).parity(), 0);
        assert_eq!(p.to_digits(), "0231");
        assert!(Perm4::parse("0012").is_err());
        assert!(Perm4::parse("012").is_err());
    }

    #[test]
    fn fig8_combinatorics() {
        let tri = fig8();
        let ecls = tri.edge_classes();
        assert_eq!(
            ecls.iter().map(|c| c.len()).collect::<Vec<_>>(),
            vec![6, 6]
        );
        assert_eq!(tri.vertex_classes().len(), 1);
        assert_eq!(tri.cusp_euler_chars(), vec![0]);
        assert!(tri.orientable());
        let vcls = tri.vertex_classes();
        assert!(tri.cusp_orientable(&vcls[0]));
        let (rank, tors) = tri.h1().unwrap();
        assert_eq!((rank, tors), (1, vec![]));
        // 8 glued faces -> 4 pairings; words close with length = valence 6
        let (pl, _dmap) = tri.pairings();
        assert_eq!(pl.len(), 4);
        let words = tri.edge_words().unwrap();
        assert!(words.iter().all(|w| w.len() == 6));
        // tree has n-1 = 1 generator
        assert_eq!(tri.spine_tree().len(), 1);
    }

    #[test]
    fn sister_h1_has_five_torsion() {
        let tri = sister();
        let (rank, tors) = tri.h1().unwrap();
        assert_eq!((rank, tors), (1, vec![5]));
        assert!(tri.orientable());
    }

    #[test]
    fn gieseking_combinatorics() {
        let tri = gieseking();
        let ecls = tri.edge_classes();
        assert_eq!(ecls.len(), 1);
        assert_eq!(ecls[0].len(), 6);
        assert_eq!(tri.vertex_classes().len(), 1);
        assert_eq!(tri.cusp_euler_chars(), vec![0]);
        assert!(!tri.orientable());
        // the single cusp has a Klein-bottle link
        let vcls = tri.vertex_classes();
        assert!(!tri.cusp_orientable(&vcls[0]));
        let (rank, tors) = tri.h1().unwrap();
        assert_eq!((rank, tors), (1, vec![]));
    }

    #[test]
    fn five_fold_cover_of_sister() {
        let base = sister();
        let gens: Vec<Vec<usize>> = SISTER5_GENS.iter().map(|g| g.to_vec()).collect();
        let cover = base.cover(&gens).unwrap();
        assert_eq!(cover.n, 10);
        let ecls = cover.edge_classes();
        assert_eq!(ecls.len(), 10);
        assert!(ecls.iter().all(|c| c.len() == 6));
        let vcls = cover.vertex_classes();
        assert_eq!(vcls.len(), 2);
        // corner counts 24 + 16 in cusp order
        assert_eq!(
            vcls.iter().map(|c| c.len()).collect::<Vec<_>>(),
            vec![24, 16]
        );
        assert_eq!(cover.cusp_euler_chars(), vec![0, 0]);
        assert!(cover.orientable());
        let (rank, tors) = cover.h1().unwrap();
        assert_eq!((rank, tors), (3, vec![]));
    }

    #[test]
    fn cover_h1_lattice_ranks() {
        // kernel of the relation rows = H^1(M; Z) as tree-normalized cocycles
        use num_bigint::BigInt;
        let check = |tri: &Triangulation, expect: usize| {
            let rows = tri.relation_rows().unwrap();
            let mat: Vec<Vec<BigInt>> = rows
                .iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect();
            let ker = exact::integer_kernel(&mat);
            assert_eq!(ker.len(), expect);
        };
        check(&fig8(), 1);
        check(&sister(), 1);
        let gens: Vec<Vec<usize>> = SISTER5_GENS.iter().map(|g| g.to_vec()).collect();
        check(&sister().cover(&gens).unwrap(), 3);
    }

    #[test]
    fn edge_words_cross_each_pairing_three_times() {
        // each fan crossing consumes one (pairing, edge-of-face) slot and the
        // glued face has three edges, so every pairing is crossed exactly
        // three times over all edge words combined.
        for tri in [fig8(), sister(), gieseking()] {
            let words = tri.edge_words().unwrap();
            let (pl, _d) = tri.pairings();
            let mut count = vec![0usize; pl.len()];
            for w in &words {
                for &(k, _s) in w {
                    count[k] += 1;
                }
            }
            assert!(count.iter().all(|&c| c == 3), "counts {count:?}");
        }
    }

    #[test]
    fn fan_prefixes_walk_each_wedge_once() {
        let gens: Vec<Vec<usize>> = SISTER5_GENS.iter().map(|g| g.to_vec()).collect();
        for tri in [fig8(), sister(), gieseking(), sister().cover(&gens).unwrap()] {
            let fans = tri.edge_fan_prefixes().unwrap();
            let words = tri.edge_words().unwrap();
            let classes = tri.edge_classes();
            for ((fan, word), cls) in fans.iter().zip(&words).zip(&classes) {
                assert_eq!(fan.len(), cls.len());
                // root wedge is the least member with the empty prefix
                let ((t, ei), root) = &fan[0];
                assert_eq!(6 * t + ei, cls[0]);
                assert!(root.iter().all(|&x| x == 0));
                // members enumerate the class exactly
                let mut seen: Vec<usize> = fan.iter().map(|((t, ei), _)| 6 * t + ei).collect();
                seen.sort_unstable();
                assert_eq!(&seen, cls);
                // prefix of member j = sum of the first j letters of the word
                let (pl, _d) = tri.pairings();
                let mut acc = vec![0i64; pl.len()];
                for (j, (_m, pre)) in fan.iter().enumerate() {
                    assert_eq!(pre, &acc, "prefix mismatch at wedge {j}");
                    let (k, s) = word[j];
                    acc[k] += s as i64;
                }
            }
        }
    }
}
