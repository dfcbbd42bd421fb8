//! Plain-text input formats: triangulated-manifold files, model-cusp files,
//! and metric-mesh files.
//!
//! A manifold file carries a gluing table, tetrahedron shape parameters,
//! per-cusp translation data, the manifold's systole (ingested, never
//! computed here), the horoball inflation offset `tau0`, and optionally
//! covering data tying the file to a base manifold.  Grammar is
//! line-oriented; `#` starts a full-line comment; sections close with `end`:
//!
//! ```text
//! name <identifier>
//! tetrahedra <n>
//! systole <float>
//! tau0 <float>
//! gluings
//! <t> <f> <t2> <perm digits>        (4n rows, e.g. "0 0 1 0231")
//! end
//! shapes
//! <re> <im>                         (n rows)
//! end
//! cusps
//! <re xi> <im xi> <re eta> <im eta> (one row per cusp, in cusp order)
//! end
//! cover_of <base name> <degree>     (optional section)
//! <integer row>                     (pullback coefficient rows)
//! end
//! ```
//!
//! Cusp rows store the normalized translation basis: `xi` real positive and,
//! for orientable links, `eta` in the upper half plane reduced modulo `xi`.
//! Whether a cusp is a torus or a Klein bottle is not flagged; it is derived
//! from the gluing table (see [`crate::manifold::Triangulation::cusp_orientable`]).
//!
//! Model-cusp files (`xi`/`eta`/`base_height` lines) describe a flat torus
//! cross-section for the standalone cusp-neighborhood computations, and mesh
//! files (`vertices`/`tetrahedra`/`edge_lengths`) give a raw metric complex.

use crate::error::{Error, Result};
use crate::manifold::{Perm4, Triangulation};
use num_complex::Complex64;
use std::collections::HashMap;
use std::path::Path;

/// Parsed manifold file.
#[derive(Clone, Debug)]
pub struct ManifoldFile {
    pub name: String,
    pub tri: Triangulation,
    pub systole: f64,
    pub tau0: f64,
    /// One cross-ratio shape per tetrahedron, upper half plane.
    pub shapes: Vec<Complex64>,
    /// Normalized `(xi, eta)` translation data per cusp, in cusp order.
    pub cusps: Vec<(Complex64, Complex64)>,
    pub cover_of: Option<CoverData>,
    /// Ingested Thurston norms: interior-class coefficient vector -> value.
    pub class_norms: Vec<(Vec<i64>, f64)>,
    /// Ingested Thurston-unit-ball vertices in the interior-class basis.
    pub thurston_ball: Vec<Vec<f64>>,
    /// Angle-sum residual of the shapes over all edge classes (see
    /// [`edge_consistency_residual`]).
    pub edge_residual: f64,
}

/// Covering description: base manifold name, sheet count, and the integer
/// matrix expressing the pullbacks of the base's interior classes in the
/// cover's interior-class basis (one row per base class).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverData {
    pub base: String,
    pub degree: usize,
    pub coeffs: Vec<Vec<i64>>,
}

/// Model cusp: flat torus `C / (Z xi + Z eta)` entered at `base_height`.
#[derive(Clone, Copy, Debug)]
pub struct CuspModelFile {
    pub xi: Complex64,
    pub eta: Complex64,
    pub base_height: f64,
}

/// Raw metric mesh: cells as vertex quadruples plus one length per edge.
#[derive(Clone, Debug)]
pub struct MeshFile {
    pub nverts: usize,
    pub cells: Vec<[usize; 4]>,
    pub edge_lengths: HashMap<(usize, usize), f64>,
}

/// Numbered, comment-stripped lines.
struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            iter: text.lines().enumerate(),
        }
    }

    /// Next non-blank, non-comment line as (1-based line number, content).
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, raw) in self.iter.by_ref() {
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            return Some((i + 1, s));
        }
        None
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_f64(tok: &str, line: usize, what: &str) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| parse_err(line, format!("{what}: expected a number, got {tok:?}")))
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| parse_err(line, format!("{what}: expected a non-negative integer, got {tok:?}")))
}

/// Parse manifold-file text.
pub fn parse_manifold(text: &str) -> Result<ManifoldFile> {
    let mut lines = Lines::new(text);
    let mut name: Option<String> = None;
    let mut n: Option<usize> = None;
    let mut systole: Option<f64> = None;
    let mut tau0 = 0.0f64;
    let mut glue: Option<Vec<[(usize, Perm4); 4]>> = None;
    // line number at which each directed face was first glued
    let mut glue_line: Vec<usize> = Vec::new();
    let mut shapes: Option<Vec<Complex64>> = None;
    let mut cusps: Option<Vec<(Complex64, Complex64)>> = None;
    let mut cover_of: Option<CoverData> = None;
    let mut class_norms: Vec<(Vec<i64>, f64)> = Vec::new();
    let mut thurston_ball: Vec<Vec<f64>> = Vec::new();

    while let Some((ln, s)) = lines.next() {
        let mut toks = s.split_whitespace();
        let key = toks.next().unwrap();
        match key {
            "name" => {
                let v = toks
                    .next()
                    .ok_or_else(|| parse_err(ln, "name: missing value"))?;
                name = Some(v.to_string());
            }
            "tetrahedra" => {
                let v = toks
                    .next()
                    .ok_or_else(|| parse_err(ln, "tetrahedra: missing count"))?;
                let v = parse_usize(v, ln, "tetrahedra")?;
                if v == 0 {
                    return Err(parse_err(ln, "tetrahedra: count must be positive"));
                }
                n = Some(v);
            }
            "systole" => {
                let v = toks
                    .next()
                    .ok_or_else(|| parse_err(ln, "systole: missing value"))?;
                let v = parse_f64(v, ln, "systole")?;
                if !(v > 0.0) {
                    return Err(parse_err(ln, "systole: must be positive"));
                }
                systole = Some(v);
            }
            "tau0" => {
                let v = toks
                    .next()
                    .ok_or_else(|| parse_err(ln, "tau0: missing value"))?;
                tau0 = parse_f64(v, ln, "tau0")?;
                if tau0 < 0.0 {
                    return Err(parse_err(ln, "tau0: must be non-negative"));
                }
            }
            "gluings" => {
                let nn =
                    n.ok_or_else(|| parse_err(ln, "gluings: tetrahedra count must come first"))?;
                let mut table = vec![[(usize::MAX, Perm4::IDENTITY); 4]; nn];
                let mut first_line = vec![0usize; 4 * nn];
                loop {
                    let (gln, gs) = lines
                        .next()
                        .ok_or_else(|| parse_err(ln, "gluings: unterminated section"))?;
                    if gs == "end" {
                        break;
                    }
                    let t: Vec<&str> = gs.split_whitespace().collect();
                    if t.len() != 4 {
                        return Err(parse_err(
                            gln,
                            "gluing row: expected `t f t2 perm`, e.g. `0 0 1 0231`",
                        ));
                    }
                    let tt = parse_usize(t[0], gln, "gluing tet")?;
                    let ff = parse_usize(t[1], gln, "gluing face")?;
                    let t2 = parse_usize(t[2], gln, "gluing target tet")?;
                    if tt >= nn || t2 >= nn {
                        return Err(parse_err(
                            gln,
                            format!("gluing row references tetrahedron out of range 0..{nn}"),
                        ));
                    }
                    if ff >= 4 {
                        return Err(parse_err(gln, "gluing face must be 0..=3"));
                    }
                    let p =
                        Perm4::parse(t[3]).map_err(|e| parse_err(gln, format!("gluing {e}")))?;
                    if table[tt][ff].0 != usize::MAX {
                        return Err(parse_err(
                            gln,
                            format!(
                                "face ({tt}, {ff}) glued twice: first at line {}, again here",
                                first_line[4 * tt + ff]
                            ),
                        ));
                    }
                    table[tt][ff] = (t2, p);
                    first_line[4 * tt + ff] = gln;
                }
                for (t, row) in table.iter().enumerate() {
                    for (f, &(t2, _)) in row.iter().enumerate() {
                        if t2 == usize::MAX {
                            return Err(Error::Validation(format!(
                                "face ({t}, {f}) has no gluing"
                            )));
                        }
                    }
                }
                glue = Some(table);
                glue_line = first_line;
            }
            "shapes" => {
                let nn =
                    n.ok_or_else(|| parse_err(ln, "shapes: tetrahedra count must come first"))?;
                let mut v = Vec::with_capacity(nn);
                loop {
                    let (sln, ss) = lines
                        .next()
                        .ok_or_else(|| parse_err(ln, "shapes: unterminated section"))?;
                    if ss == "end" {
                        break;
                    }
                    let t: Vec<&str> = ss.split_whitespace().collect();
                    if t.len() != 2 {
                        return Err(parse_err(sln, "shape row: expected `re im`"));
                    }
                    let re = parse_f64(t[0], sln, "shape re")?;
                    let im = parse_f64(t[1], sln, "shape im")?;
                    if !(im > 0.0) {
                        return Err(parse_err(
                            sln,
                            "shape must lie in the upper half plane (im > 0)",
                        ));
                    }
                    v.push(Complex64::new(re, im));
                }
                if v.len() != nn {
                    return Err(Error::Validation(format!(
                        "expected {nn} shape rows, found {}",
                        v.len()
                    )));
                }
                shapes = Some(v);
            }
            "cusps" => {
                let mut v = Vec::new();
                loop {
                    let (cln, cs) = lines
                        .next()
                        .ok_or_else(|| parse_err(ln, "cusps: unterminated section"))?;
                    if cs == "end" {
                        break;
                    }
                    let t: Vec<&str> = cs.split_whitespace().collect();
                    if t.len() != 4 {
                        return Err(parse_err(
                            cln,
                            "cusp row: expected `re_xi im_xi re_eta im_eta`",
                        ));
                    }
                    let xi = Complex64::new(
                        parse_f64(t[0], cln, "xi re")?,
                        parse_f64(t[1], cln, "xi im")?,
                    );
                    let eta = Complex64::new(
                        parse_f64(t[2], cln, "eta re")?,
                        parse_f64(t[3], cln, "eta im")?,
                    );
                    v.push((xi, eta));
                }
                cusps = Some(v);
            }
            "cover_of" => {
                let base = toks
                    .next()
                    .ok_or_else(|| parse_err(ln, "cover_of: missing base name"))?
                    .to_string();
                let deg = toks
                    .next()
                    .ok_or_else(|| parse_err(ln, "cover_of: missing degree"))?;
                let degree = parse_usize(deg, ln, "cover_of degree")?;
                if degree < 2 {
                    return Err(parse_err(ln, "cover_of: degree must be at least 2"));
                }
                let mut coeffs = Vec::new();
                loop {
                    let (rln, rs) = lines
                        .next()
                        .ok_or_else(|| parse_err(ln, "cover_of: unterminated section"))?;
                    if rs == "end" {
                        break;
                    }
                    let row: Vec<i64> = rs
                        .split_whitespace()
                        .map(|t| {
                            t.parse::<i64>().map_err(|_| {
                                parse_err(rln, format!("cover_of row: bad integer {t:?}"))
                            })
                        })
                        .collect::<Result<_>>()?;
                    coeffs.push(row);
                }
                cover_of = Some(CoverData {
                    base,
                    degree,
                    coeffs,
                });
            }
            "class_norms" => loop {
                let (rln, rs) = lines
                    .next()
                    .ok_or_else(|| parse_err(ln, "class_norms: unterminated section"))?;
                if rs == "end" {
                    break;
                }
                let toks: Vec<&str> = rs.split_whitespace().collect();
                if toks.len() < 2 {
                    return Err(parse_err(
                        rln,
                        "class_norms row: expected `<coeffs...> <norm>`",
                    ));
                }
                let coeffs: Vec<i64> = toks[..toks.len() - 1]
                    .iter()
                    .map(|t| {
                        t.parse::<i64>().map_err(|_| {
                            parse_err(rln, format!("class_norms row: bad integer {t:?}"))
                        })
                    })
                    .collect::<Result<_>>()?;
                let norm = parse_f64(toks[toks.len() - 1], rln, "class norm")?;
                if norm < 0.0 {
                    return Err(parse_err(rln, "class norm must be non-negative"));
                }
                class_norms.push((coeffs, norm));
            },
            "thurston_ball" => loop {
                let (rln, rs) = lines
                    .next()
                    .ok_or_else(|| parse_err(ln, "thurston_ball: unterminated section"))?;
                if rs == "end" {
                    break;
                }
                let row: Vec<f64> = rs
                    .split_whitespace()
                    .map(|t| parse_f64(t, rln, "ball vertex coordinate"))
                    .collect::<Result<_>>()?;
                thurston_ball.push(row);
            },
            other => {
                return Err(parse_err(ln, format!("unknown directive {other:?}")));
            }
        }
    }

    let name = name.ok_or_else(|| Error::Validation("name required".to_string()))?;
    let n = n.ok_or_else(|| Error::Validation("tetrahedra count required".to_string()))?;
    let systole =
        systole.ok_or_else(|| Error::Validation(format!("systole required for {name}")))?;
    let glue = glue.ok_or_else(|| Error::Validation("gluings section required".to_string()))?;
    let shapes = shapes.ok_or_else(|| Error::Validation("shapes section required".to_string()))?;
    let cusps = cusps.ok_or_else(|| Error::Validation("cusps section required".to_string()))?;
    let _ = glue_line;

    let tri = Triangulation::new(n, glue)?;
    let ncusps = tri.vertex_classes().len();
    if cusps.len() != ncusps {
        return Err(Error::Validation(format!(
            "{name}: {} cusp rows but the gluing table has {ncusps} ideal vertex classes",
            cusps.len()
        )));
    }
    let edge_residual = edge_consistency_residual(&tri, &shapes);
    if edge_residual > 1e-9 {
        return Err(Error::Validation(format!(
            "{name}: edge angle-sum residual {edge_residual:.3e} exceeds 1e-9; \
             shapes do not solve the gluing equations"
        )));
    }
    Ok(ManifoldFile {
        name,
        tri,
        systole,
        tau0,
        shapes,
        cusps,
        cover_of,
        class_norms,
        thurston_ball,
        edge_residual,
    })
}

/// Largest deviation of `sum of log(shape parameter)` from `2*pi*i` over the
/// edge classes: zero exactly when the shapes solve the edge consistency
/// (angle-sum and modulus) equations.  Edge slots carry the cross-ratio
/// parameters `z`, `1/(1-z)`, `(z-1)/z` per [`crate::manifold::EDGE_PARAM_SLOT`].
pub fn edge_consistency_residual(tri: &Triangulation, shapes: &[Complex64]) -> f64 {
    let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    tri.edge_classes()
        .iter()
        .map(|cls| {
            let sum: Complex64 = cls
                .iter()
                .map(|&e| {
                    let (t, ei) = (e / 6, e % 6);
                    let z = shapes[t];
                    let param = match crate::manifold::EDGE_PARAM_SLOT[ei] {
                        0 => z,
                        1 => 1.0 / (1.0 - z),
                        _ => (z - 1.0) / z,
                    };
                    param.ln()
                })
                .sum();
            (sum - two_pi_i).norm()
        })
        .fold(0.0, f64::max)
}

/// Read and parse a manifold file from disk.
pub fn read_manifold(path: &Path) -> Result<ManifoldFile> {
    let text = std::fs::read_to_string(path)?;
    parse_manifold(&text)
}

/// Serialize a manifold file in canonical section order.  Floats print in
/// shortest round-trip form, so `parse(serialize(m))` reproduces `m` exactly.
pub fn serialize_manifold(m: &ManifoldFile) -> String {
    let mut out = String::new();
    out.push_str(&format!("name {}\n", m.name));
    out.push_str(&format!("tetrahedra {}\n", m.tri.n));
    out.push_str(&format!("systole {}\n", m.systole));
    out.push_str(&format!("tau0 {}\n", m.tau0));
    out.push_str("gluings\n");
    for t in 0..m.tri.n {
        for f in 0..4 {
            let (t2, p) = m.tri.glue[t][f];
            out.push_str(&format!("{t} {f} {t2} {}\n", p.to_digits()));
        }
    }
    out.push_str("end\nshapes\n");
    for z in &m.shapes {
        out.push_str(&format!("{} {}\n", z.re, z.im));
    }
    out.push_str("end\ncusps\n");
    for (xi, eta) in &m.cusps {
        out.push_str(&format!("{} {} {} {}\n", xi.re, xi.im, eta.re, eta.im));
    }
    out.push_str("end\n");
    if let Some(c) = &m.cover_of {
        out.push_str(&format!("cover_of {} {}\n", c.base, c.degree));
        for row in &c.coeffs {
            let toks: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            out.push_str(&toks.join(" "));
            out.push('\n');
        }
        out.push_str("end\n");
    }
    if !m.class_norms.is_empty() {
        out.push_str("class_norms\n");
        for (coeffs, norm) in &m.class_norms {
            let mut toks: Vec<String> = coeffs.iter().map(|x| x.to_string()).collect();
            toks.push(norm.to_string());
            out.push_str(&toks.join(" "));
            out.push('\n');
        }
        out.push_str("end\n");
    }
    if !m.thurston_ball.is_empty() {
        out.push_str("thurston_ball\n");
        for row in &m.thurston_ball {
            let toks: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            out.push_str(&toks.join(" "));
            out.push('\n');
        }
        out.push_str("end\n");
    }
    out
}

/// Parse model-cusp text (`xi re im`, `eta re im`, `base_height h`).
pub fn parse_cusp_model(text: &str) -> Result<CuspModelFile> {
    let mut lines = Lines::new(text);
    let mut xi: Option<Complex64> = None;
    let mut eta: Option<Complex64> = None;
    let mut base_height: Option<f64> = None;
    while let Some((ln, s)) = lines.next() {
        let t: Vec<&str> = s.split_whitespace().collect();
        match t[0] {
            "xi" | "eta" => {
                if t.len() != 3 {
                    return Err(parse_err(ln, format!("{}: expected `re im`", t[0])));
                }
                let z = Complex64::new(
                    parse_f64(t[1], ln, t[0])?,
                    parse_f64(t[2], ln, t[0])?,
                );
                if t[0] == "xi" {
                    xi = Some(z);
                } else {
                    eta = Some(z);
                }
            }
            "base_height" => {
                if t.len() != 2 {
                    return Err(parse_err(ln, "base_height: expected one value"));
                }
                let h = parse_f64(t[1], ln, "base_height")?;
                if !(h > 0.0) {
                    return Err(parse_err(ln, "base_height must be positive"));
                }
                base_height = Some(h);
            }
            other => return Err(parse_err(ln, format!("unknown directive {other:?}"))),
        }
    }
    let xi = xi.ok_or_else(|| Error::Validation("xi required".to_string()))?;
    let eta = eta.ok_or_else(|| Error::Validation("eta required".to_string()))?;
    let base_height =
        base_height.ok_or_else(|| Error::Validation("base_height required".to_string()))?;
    if (xi.conj() * eta).im.abs() < 1e-14 {
        return Err(Error::Validation(
            "xi and eta are linearly dependent; the quotient is not a torus".to_string(),
        ));
    }
    Ok(CuspModelFile {
        xi,
        eta,
        base_height,
    })
}

pub fn read_cusp_model(path: &Path) -> Result<CuspModelFile> {
    let text = std::fs::read_to_string(path)?;
    parse_cusp_model(&text)
}

pub fn serialize_cusp_model(c: &CuspModelFile) -> String {
    format!(
        "xi {} {}\neta {} {}\nbase_height {}\n",
        c.xi.re, c.xi.im, c.eta.re, c.eta.im, c.base_height
    )
}

/// Parse metric-mesh text (`vertices`, `tetrahedra` rows, `edge_lengths` rows).
pub fn parse_mesh(text: &str) -> Result<MeshFile> {
    let mut lines = Lines::new(text);
    let mut nverts: Option<usize> = None;
    let mut cells: Option<Vec<[usize; 4]>> = None;
    let mut edge_lengths: Option<HashMap<(usize, usize), f64>> = None;
    while let Some((ln, s)) = lines.next() {
        let mut toks = s.split_whitespace();
        match toks.next().unwrap() {
            "vertices" => {
                let v = toks
                    .next()
                    .ok_or_else(|| parse_err(ln, "vertices: missing count"))?;
                nverts = Some(parse_usize(v, ln, "vertices")?);
            }
            "tetrahedra" => {
                let nv = nverts
                    .ok_or_else(|| parse_err(ln, "tetrahedra: vertex count must come first"))?;
                let mut v = Vec::new();
                loop {
                    let (cln, cs) = lines
                        .next()
                        .ok_or_else(|| parse_err(ln, "tetrahedra: unterminated section"))?;
                    if cs == "end" {
                        break;
                    }
                    let t: Vec<&str> = cs.split_whitespace().collect();
                    if t.len() != 4 {
                        return Err(parse_err(cln, "tetrahedron row: expected 4 vertex ids"));
                    }
                    let mut cell = [0usize; 4];
                    for (i, tok) in t.iter().enumerate() {
                        cell[i] = parse_usize(tok, cln, "vertex id")?;
                        if cell[i] >= nv {
                            return Err(parse_err(
                                cln,
                                format!("vertex id {} out of range 0..{nv}", cell[i]),
                            ));
                        }
                    }
                    v.push(cell);
                }
                cells = Some(v);
            }
            "edge_lengths" => {
                let nv = nverts
                    .ok_or_else(|| parse_err(ln, "edge_lengths: vertex count must come first"))?;
                let mut map = HashMap::new();
                loop {
                    let (eln, es) = lines
                        .next()
                        .ok_or_else(|| parse_err(ln, "edge_lengths: unterminated section"))?;
                    if es == "end" {
                        break;
                    }
                    let t: Vec<&str> = es.split_whitespace().collect();
                    if t.len() != 3 {
                        return Err(parse_err(eln, "edge length row: expected `i j length`"));
                    }
                    let i = parse_usize(t[0], eln, "edge endpoint")?;
                    let j = parse_usize(t[1], eln, "edge endpoint")?;
                    let l = parse_f64(t[2], eln, "edge length")?;
                    if i >= nv || j >= nv || i == j {
                        return Err(parse_err(eln, "edge endpoints must be distinct vertex ids"));
                    }
                    if !(l > 0.0) {
                        return Err(parse_err(eln, "edge length must be positive"));
                    }
                    let key = (i.min(j), i.max(j));
                    if map.insert(key, l).is_some() {
                        return Err(parse_err(
                            eln,
                            format!("edge ({}, {}) given two lengths", key.0, key.1),
                        ));
                    }
                }
                edge_lengths = Some(map);
            }
            other => return Err(parse_err(ln, format!("unknown directive {other:?}"))),
        }
    }
    let nverts = nverts.ok_or_else(|| Error::Validation("vertices count required".to_string()))?;
    let cells = cells.ok_or_else(|| Error::Validation("tetrahedra section required".to_string()))?;
    let edge_lengths =
        edge_lengths.ok_or_else(|| Error::Validation("edge_lengths section required".to_string()))?;
    for (ci, cell) in cells.iter().enumerate() {
        for a in 0..4 {
            for b in (a + 1)..4 {
                let key = (cell[a].min(cell[b]), cell[a].max(cell[b]));
                if !edge_lengths.contains_key(&key) {
                    return Err(Error::Validation(format!(
                        "cell {ci} edge ({}, {}) has no length",
                        key.0, key.1
                    )));
                }
            }
        }
    }
    Ok(MeshFile {
        nverts,
        cells,
        edge_lengths,
    })
}

pub fn read_mesh(path: &Path) -> Result<MeshFile> {
    let text = std::fs::read_to_string(path)?;
    parse_mesh(&text)
}

/// Importing SnapPea-format triangulation files is recognized but not
/// implemented; convert to the manifold format above instead.
pub fn import_snappea(_text: &str) -> Result<ManifoldFile> {
    Err(Error::Unsupported(
        "SnapPea triangulation import; convert to the manifold file format".to_string(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(name: &str) -> String {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../fixtures")
            .join(name);
        std::fs::read_to_string(dir).expect("fixture readable")
    }

    #[test]
    fn parses_all_manifold_fixtures() {
        for (file, n, ncusps) in [
            ("figure_eight.mfd", 2, 1),
            ("sister.mfd", 2, 1),
            ("gieseking.mfd", 1, 1),
            ("sister_cover5.mfd", 10, 2),
            ("sister_cover5_double.mfd", 20, 4),
        ] {
            let m = parse_manifold(&fixture(file)).unwrap();
            assert_eq!(m.tri.n, n, "{file}");
            assert_eq!(m.cusps.len(), ncusps, "{file}");
            assert!(m.systole > 0.0);
            assert_eq!(m.shapes.len(), n);
            // fixtures all use the regular shape and solve the edge equations
            for z in &m.shapes {
                assert!((z - Complex64::new(0.5, 0.75f64.sqrt())).norm() < 1e-12);
            }
            assert!(m.edge_residual < 1e-9, "{file}: {}", m.edge_residual);
        }
    }

    #[test]
    fn inconsistent_shapes_are_rejected() {
        // perturb one of the two shapes so the angle sums no longer close up
        // (a one-class table like gieseking's satisfies its single equation
        // identically, since z * 1/(1-z) * (z-1)/z = -1 for every z)
        let text = fixture("figure_eight.mfd").replacen(
            "0.5 0.8660254037844386",
            "0.5 0.9",
            1,
        );
        let err = parse_manifold(&text).unwrap_err();
        assert!(err.to_string().contains("angle-sum residual"), "{err}");
    }

    #[test]
    fn optional_norm_sections_round_trip() {
        let mut text = fixture("sister_cover5.mfd");
        text.push_str("class_norms\n1 2\nend\nthurston_ball\n0.5\n-0.5\nend\n");
        let m = parse_manifold(&text).unwrap();
        assert_eq!(m.class_norms, vec![(vec![1], 2.0)]);
        assert_eq!(m.thurston_ball, vec![vec![0.5], vec![-0.5]]);
        let m2 = parse_manifold(&serialize_manifold(&m)).unwrap();
        assert_eq!(m2.class_norms, m.class_norms);
        assert_eq!(m2.thurston_ball, m.thurston_ball);
    }

    #[test]
    fn fixture_tables_match_builtin_tables() {
        use crate::manifold::tables;
        let pairs = [
            ("figure_eight.mfd", tables::fig8()),
            ("sister.mfd", tables::sister()),
            ("gieseking.mfd", tables::gieseking()),
        ];
        for (file, expect) in pairs {
            let m = parse_manifold(&fixture(file)).unwrap();
            assert_eq!(m.tri.n, expect.n);
            for t in 0..expect.n {
                for f in 0..4 {
                    assert_eq!(m.tri.glue[t][f], expect.glue[t][f], "{file} ({t},{f})");
                }
            }
        }
        // the five-fold cover fixture equals the cover built from the sister
        let gens: Vec<Vec<usize>> = tables::SISTER5_GENS.iter().map(|g| g.to_vec()).collect();
        let built = tables::sister().cover(&gens).unwrap();
        let m = parse_manifold(&fixture("sister_cover5.mfd")).unwrap();
        for t in 0..10 {
            for f in 0..4 {
                assert_eq!(m.tri.glue[t][f], built.glue[t][f], "cover tet {t} face {f}");
            }
        }
    }

    #[test]
    fn cover_section_round_trips() {
        let m = parse_manifold(&fixture("sister_cover5_double.mfd")).unwrap();
        let c = m.cover_of.as_ref().unwrap();
        assert_eq!(c.base, "sister_cover5");
        assert_eq!(c.degree, 2);
        assert_eq!(c.coeffs, vec![vec![2]]);
        let text = serialize_manifold(&m);
        let m2 = parse_manifold(&text).unwrap();
        assert_eq!(m2.cover_of, m.cover_of);
        assert_eq!(m2.systole, m.systole);
        assert_eq!(m2.cusps, m.cusps);
    }

    #[test]
    fn manifold_round_trip_is_exact() {
        for file in ["figure_eight.mfd", "gieseking.mfd", "sister_cover5.mfd"] {
            let m = parse_manifold(&fixture(file)).unwrap();
            let m2 = parse_manifold(&serialize_manifold(&m)).unwrap();
            assert_eq!(m.name, m2.name);
            assert_eq!(m.systole, m2.systole);
            assert_eq!(m.tau0, m2.tau0);
            assert_eq!(m.shapes, m2.shapes);
            assert_eq!(m.cusps, m2.cusps);
            for t in 0..m.tri.n {
                assert_eq!(m.tri.glue[t], m2.tri.glue[t]);
            }
        }
    }

    #[test]
    fn duplicate_gluing_names_both_lines() {
        let text = "name x\ntetrahedra 1\nsystole 1\ngluings\n0 0 0 1203\n0 0 0 1203\n";
        let err = parse_manifold(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 6"), "{msg}");
        assert!(msg.contains("glued twice"), "{msg}");
        assert!(msg.contains("line 5"), "{msg}");
    }

    #[test]
    fn missing_systole_is_rejected() {
        let base = fixture("gieseking.mfd");
        let text: String = base
            .lines()
            .filter(|l| !l.trim_start().starts_with("systole"))
            .collect::<Vec<_>>()
            .join("\n");
        let err = parse_manifold(&text).unwrap_err();
        assert!(err.to_string().contains("systole required"), "{err}");
    }

    #[test]
    fn bad_permutation_reports_line() {
        let text = "name x\ntetrahedra 1\nsystole 1\ngluings\n0 0 0 1###\n";
        let err = parse_manifold(text).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 5),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn cusp_count_must_match_vertex_classes() {
        let base = fixture("gieseking.mfd");
        let text = base.replace(
            "cusps\n0.5 0 0 3.464101615137754\nend",
            "cusps\n0.5 0 0 3.464101615137754\n1 0 0 1\nend",
        );
        let err = parse_manifold(&text).unwrap_err();
        assert!(err.to_string().contains("ideal vertex classes"), "{err}");
    }

    #[test]
    fn parses_cusp_models() {
        let sq = parse_cusp_model(&fixture("model_square.cusp")).unwrap();
        assert_eq!(sq.xi, Complex64::new(1.0, 0.0));
        assert_eq!(sq.eta, Complex64::new(0.0, 1.0));
        assert_eq!(sq.base_height, 1.0);
        let hex = parse_cusp_model(&fixture("model_hex.cusp")).unwrap();
        assert!((hex.eta - Complex64::new(0.5, 0.75f64.sqrt())).norm() < 1e-15);
        let rect = parse_cusp_model(&fixture("model_rect.cusp")).unwrap();
        assert_eq!(rect.xi, Complex64::new(2.0, 0.0));
        assert_eq!(rect.eta, Complex64::new(0.0, 2.0));
        // round trip
        let sq2 = parse_cusp_model(&serialize_cusp_model(&sq)).unwrap();
        assert_eq!(sq2.xi, sq.xi);
        assert_eq!(sq2.eta, sq.eta);
        // degenerate lattice rejected
        assert!(parse_cusp_model("xi 1 0\neta 2 0\nbase_height 1\n").is_err());
    }

    #[test]
    fn parses_corner_tet_mesh() {
        let m = parse_mesh(&fixture("corner_tet.mesh")).unwrap();
        assert_eq!(m.nverts, 4);
        assert_eq!(m.cells, vec![[0, 1, 2, 3]]);
        assert_eq!(m.edge_lengths.len(), 6);
        assert_eq!(m.edge_lengths[&(0, 1)], 1.0);
        assert!((m.edge_lengths[&(2, 3)] - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn mesh_missing_edge_length_is_rejected() {
        let text = "vertices 4\ntetrahedra\n0 1 2 3\nend\nedge_lengths\n0 1 1\nend\n";
        let err = parse_mesh(text).unwrap_err();
        assert!(err.to_string().contains("has no length"), "{err}");
    }

    #[test]
    fn snappea_import_is_unsupported() {
        match import_snappea("% Triangulation") {
            Err(Error::Unsupported(_)) => {}
            other => panic!("expected unsupported, got {other:?}"),
        }
    }
}
