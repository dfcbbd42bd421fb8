//! Flat cusp cross-sections: lattice reduction, covering radii, and spectra.
//!
//! A horospherical cusp cross-section carries a flat metric: a torus
//! ℝ²/(ℤξ + ℤη) when the cusp is orientable, or a flat Klein bottle
//! (glide reflection by ξ along its own axis composed with the reflection of
//! the orthogonal coordinate, plus a translation η ⊥ ξ) when it is not.
//! The comparison constants consume three numbers per cusp — the area
//! |Im ξ̄η|, the waist (shortest closed geodesic), and the diameter — and the
//! cusp expansions need the Fourier decay rates 2π|w| over the dual lattice.

use crate::error::{Error, Result};
use num_complex::Complex64;

fn inner(a: Complex64, b: Complex64) -> f64 {
    // ℝ² inner product under ℂ ≅ ℝ².
    (a * b.conj()).re
}

/// Flat cusp cross-section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlatSection {
    /// ℝ²/(ℤξ + ℤη).
    Torus { xi: Complex64, eta: Complex64 },
    /// Quotient of ℝ² by the glide reflection that translates by ξ and
    /// reflects the coordinate orthogonal to ξ, together with the
    /// translation by η (required orthogonal to ξ). The orientation double
    /// cover is the torus ℝ²/(ℤ·2ξ + ℤη).
    Klein { xi: Complex64, eta: Complex64 },
}

/// One Laplace-spectral line of a flat torus: all dual-lattice vectors of a
/// common length |w| = rate/2π, stored up to sign.
#[derive(Debug, Clone)]
pub struct SpectralLine {
    /// Exponential decay rate λ = 2π|w| of the associated cusp mode.
    pub rate: f64,
    /// One representative from each ±w pair on this line.
    pub vectors: Vec<Complex64>,
    /// Eigenvalue multiplicity (= number of dual vectors, counting both signs).
    pub multiplicity: usize,
}

impl FlatSection {
    pub fn torus(xi: Complex64, eta: Complex64) -> Result<Self> {
        let s = FlatSection::Torus { xi, eta };
        s.validate()?;
        Ok(s)
    }

    pub fn klein(xi: Complex64, eta: Complex64) -> Result<Self> {
        let s = FlatSection::Klein { xi, eta };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        match *self {
            FlatSection::Torus { xi, eta } => {
                if (xi.conj() * eta).im.abs() < 1e-12 * (xi.norm() * eta.norm()).max(1e-300) {
                    return Err(Error::Validation(format!(
                        "degenerate cusp lattice: xi = {xi}, eta = {eta} are dependent"
                    )));
                }
            }
            FlatSection::Klein { xi, eta } => {
                if xi.norm() < 1e-300 || eta.norm() < 1e-300 {
                    return Err(Error::Validation(
                        "degenerate Klein section: zero translation part".into(),
                    ));
                }
                if inner(xi, eta).abs() > 1e-9 * xi.norm() * eta.norm() {
                    return Err(Error::Validation(format!(
                        "Klein section needs eta orthogonal to the glide axis; \
                         got xi = {xi}, eta = {eta}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Area of the section: |Im ξ̄η| in both cases (the Klein quotient halves
    /// the double-cover area |Im(2ξ)·η̄| again).
    pub fn area(&self) -> f64 {
        let (FlatSection::Torus { xi, eta } | FlatSection::Klein { xi, eta }) = *self;
        (xi.conj() * eta).im.abs()
    }

    /// The translation lattice: the section itself for a torus, the
    /// orientation double cover ℤ·2ξ + ℤη for a Klein section.
    pub fn translation_lattice(&self) -> (Complex64, Complex64) {
        match *self {
            FlatSection::Torus { xi, eta } => (xi, eta),
            FlatSection::Klein { xi, eta } => (2.0 * xi, eta),
        }
    }

    /// Length of the shortest closed geodesic. On a Klein section the
    /// horizontal glide cores (length |ξ|) compete with the translation
    /// lattice of the double cover.
    pub fn waist(&self) -> f64 {
        let (a, b) = self.translation_lattice();
        let (ra, _) = lagrange_reduce(a, b);
        match *self {
            FlatSection::Torus { .. } => ra.norm(),
            FlatSection::Klein { xi, .. } => ra.norm().min(xi.norm()),
        }
    }

    /// Diameter of the flat section.
    ///
    /// A flat torus is homogeneous, so its diameter equals the covering
    /// radius of the lattice, read off exactly from the Voronoi cell
    /// vertices. A Klein bottle is homogeneous only along the glide axis;
    /// its diameter is maximized numerically (coarse grid plus coordinate
    /// descent, accurate to ~1e−6 — far below the tolerance of any constant
    /// that consumes it).
    pub fn diameter(&self) -> f64 {
        match *self {
            FlatSection::Torus { xi, eta } => covering_radius(xi, eta),
            FlatSection::Klein { xi, eta } => klein_diameter(xi.norm(), eta.norm()),
        }
    }

    /// Fourier decay rates λ = 2π|w| over the dual of the translation
    /// lattice, grouped into spectral lines, the `count` smallest.
    ///
    /// Only torus sections carry the character basis used by the cusp
    /// expansion; a Klein section would need glide-equivariant characters of
    /// its double cover, which no current fixture requires.
    pub fn spectrum(&self, count: usize) -> Result<Vec<SpectralLine>> {
        let (xi, eta) = match *self {
            FlatSection::Torus { xi, eta } => (xi, eta),
            FlatSection::Klein { .. } => {
                return Err(Error::Unsupported(
                    "Fourier spectrum of a Klein section: pass its orientation double cover"
                        .into(),
                ))
            }
        };
        let (dx, de) = dual_basis(xi, eta)?;
        // Enumerate m·dx + n·de with |w| ≤ R, growing R until `count`
        // distinct lines are found. |m| = |⟨w, ξ⟩| ≤ R|ξ| bounds the box.
        let mut radius = (dx.norm() + de.norm()) * ((count as f64) + 1.0).sqrt();
        loop {
            let mb = (radius * xi.norm()).ceil() as i64;
            let nb = (radius * eta.norm()).ceil() as i64;
            let mut vecs: Vec<Complex64> = Vec::new();
            for m in -mb..=mb {
                for n in -nb..=nb {
                    if m < 0 || (m == 0 && n <= 0) {
                        continue; // keep one of each ±w pair, drop the origin
                    }
                    let w = (m as f64) * dx + (n as f64) * de;
                    if w.norm() <= radius {
                        vecs.push(w);
                    }
                }
            }
            vecs.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
            let mut lines: Vec<SpectralLine> = Vec::new();
            for w in vecs {
                let rate = 2.0 * std::f64::consts::PI * w.norm();
                match lines.last_mut() {
                    Some(line) if (rate - line.rate).abs() < 1e-9 * rate => {
                        line.vectors.push(w);
                        line.multiplicity += 2;
                    }
                    _ => lines.push(SpectralLine { rate, vectors: vec![w], multiplicity: 2 }),
                }
            }
            // A line at radius R is complete only if no vector just outside
            // could join it; requiring count+1 lines within R settles that.
            if lines.len() > count {
                lines.truncate(count);
                return Ok(lines);
            }
            radius *= 1.5;
        }
    }
}

/// Lagrange–Gauss reduction: returns a basis of the same lattice with
/// |a| ≤ |b| ≤ |b ± a|.
pub fn lagrange_reduce(mut a: Complex64, mut b: Complex64) -> (Complex64, Complex64) {
    loop {
        if a.norm() > b.norm() {
            std::mem::swap(&mut a, &mut b);
        }
        let k = (inner(b, a) / inner(a, a)).round();
        if k == 0.0 {
            return (a, b);
        }
        b -= k * a;
        if b.norm() >= a.norm() {
            return (a, b);
        }
    }
}

/// Dual basis of (ξ, η) under ⟨·,·⟩ = Re(a b̄): the inverse-transpose of the
/// real 2×2 basis matrix.
pub fn dual_basis(xi: Complex64, eta: Complex64) -> Result<(Complex64, Complex64)> {
    let det = xi.re * eta.im - xi.im * eta.re;
    if det.abs() < 1e-300 {
        return Err(Error::Validation("degenerate lattice has no dual basis".into()));
    }
    let dx = Complex64::new(eta.im, -eta.re) / det;
    let de = Complex64::new(-xi.im, xi.re) / det;
    Ok((dx, de))
}

/// Covering radius of ℤa + ℤb: the farthest Voronoi-cell vertex.
///
/// After Lagrange reduction the Voronoi cell of the origin is cut out by the
/// bisectors of ±a, ±b, ±(a+b), ±(a−b); its vertices are pairwise bisector
/// intersections that satisfy every constraint.
fn covering_radius(a: Complex64, b: Complex64) -> f64 {
    let (a, b) = lagrange_reduce(a, b);
    let viol = |x: Complex64, v: Complex64| 2.0 * inner(x, v) - inner(v, v);
    let mut relevant = Vec::new();
    for v in [a, b, a + b, a - b] {
        relevant.push(v);
        relevant.push(-v);
    }
    let mut best: f64 = 0.0;
    for (i, &v) in relevant.iter().enumerate() {
        for &w in &relevant[i + 1..] {
            // Solve 2⟨x,v⟩ = |v|², 2⟨x,w⟩ = |w|².
            let det = v.re * w.im - v.im * w.re;
            if det.abs() < 1e-12 * v.norm() * w.norm() {
                continue;
            }
            let rv = inner(v, v) / 2.0;
            let rw = inner(w, w) / 2.0;
            let x = Complex64::new((rv * w.im - rw * v.im) / det, (rw * v.re - rv * w.re) / det);
            if relevant.iter().all(|&u| viol(x, u) <= 1e-9 * inner(u, u)) {
                best = best.max(x.norm());
            }
        }
    }
    best
}

/// Diameter of the flat Klein bottle with glide length `s` and orthogonal
/// translation `h` (both > 0), by grid search plus coordinate descent.
fn klein_diameter(s: f64, h: f64) -> f64 {
    // Orbit of q seen from p (glide ↦ (x+s, −y), translation ↦ (x, y+h));
    // enough images to cover one fundamental domain of separation.
    let orbit_dist = |p: (f64, f64), q: (f64, f64)| -> f64 {
        let mut best = f64::INFINITY;
        for m in -3i32..=3 {
            let x = q.0 + m as f64 * s;
            let y = if m % 2 == 0 { q.1 } else { -q.1 };
            for n in -2i32..=2 {
                let d = ((p.0 - x).powi(2) + (p.1 - (y + n as f64 * h)).powi(2)).sqrt();
                best = best.min(d);
            }
        }
        best
    };
    // Glide-axis translations are isometries, so fix p = (0, y1).
    let coarse = 40;
    let mut best = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..=coarse {
        let y1 = 0.5 * h * i as f64 / coarse as f64;
        for j in 0..=coarse {
            let x2 = s * j as f64 / coarse as f64;
            for k in 0..=coarse {
                let y2 = h * k as f64 / coarse as f64;
                let d = orbit_dist((0.0, y1), (x2, y2));
                if d > best.0 {
                    best = (d, y1, x2, y2);
                }
            }
        }
    }
    let (mut d0, mut y1, mut x2, mut y2) = best;
    let mut step = h / coarse as f64;
    while step > 1e-9 {
        let mut improved = false;
        for dy1 in [-step, 0.0, step] {
            for dx2 in [-step, 0.0, step] {
                for dy2 in [-step, 0.0, step] {
                    let d = orbit_dist((0.0, y1 + dy1), (x2 + dx2, y2 + dy2));
                    if d > d0 {
                        d0 = d;
                        y1 += dy1;
                        x2 += dx2;
                        y2 += dy2;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    d0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn reduction() {
        let (a, b) = lagrange_reduce(c(1.0, 0.0), c(5.0, 1.0));
        assert!((a.norm() - 1.0).abs() < 1e-15);
        assert!((b.norm() - 1.0).abs() < 1e-15);
        assert!(inner(a, b).abs() < 1e-12);
    }

    #[test]
    fn torus_quantities() {
        let sq = FlatSection::torus(c(1.0, 0.0), c(0.0, 1.0)).unwrap();
        assert!((sq.area() - 1.0).abs() < 1e-15);
        assert!((sq.waist() - 1.0).abs() < 1e-15);
        assert!((sq.diameter() - 0.7071067811865476).abs() < 1e-12);

        let big = FlatSection::torus(c(3.0, 0.0), c(0.0, 3.0)).unwrap();
        assert!((big.diameter() - 2.121320343559643).abs() < 1e-12);

        let hex = FlatSection::torus(c(1.0, 0.0), c(0.5, 0.8660254037844386)).unwrap();
        assert!((hex.area() - 0.8660254037844386).abs() < 1e-15);
        assert!((hex.diameter() - 0.5773502691896257).abs() < 1e-12);

        // The two cusp sections of the 5-fold cover fixture.
        let c0 = FlatSection::torus(c(2.0, 0.0), c(1.0, 5.196152422706632)).unwrap();
        assert!((c0.diameter() - 2.6943012562182533).abs() < 1e-12); // 14√3/9
        assert!((c0.waist() - 2.0).abs() < 1e-12);
        let c1 = FlatSection::torus(c(2.0, 0.0), c(0.0, 3.464101615137754)).unwrap();
        assert!((c1.diameter() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn klein_quantities() {
        let k = FlatSection::klein(c(0.5, 0.0), c(0.0, 3.464101615137754)).unwrap();
        assert!((k.area() - 1.7320508075688772).abs() < 1e-12);
        assert!((k.waist() - 0.5).abs() < 1e-12);
        assert!((k.diameter() - 1.75).abs() < 1e-4);
        assert!(k.spectrum(1).is_err());
    }

    #[test]
    fn spectral_lines() {
        let sq = FlatSection::torus(c(1.0, 0.0), c(0.0, 1.0)).unwrap();
        let lines = sq.spectrum(3).unwrap();
        assert!((lines[0].rate - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(lines[0].multiplicity, 4);
        assert!((lines[1].rate - 2.0 * std::f64::consts::PI * 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(lines[1].multiplicity, 4);

        let dbl = FlatSection::torus(c(2.0, 0.0), c(0.0, 2.0)).unwrap();
        let lines = dbl.spectrum(1).unwrap();
        assert!((lines[0].rate - std::f64::consts::PI).abs() < 1e-12);

        let hex = FlatSection::torus(c(1.0, 0.0), c(0.5, 0.8660254037844386)).unwrap();
        let lines = hex.spectrum(1).unwrap();
        // Dual of the hexagonal lattice is hexagonal with |w| = 2/√3.
        assert!((lines[0].rate - 4.0 * std::f64::consts::PI / 3f64.sqrt()).abs() < 1e-9);
        assert_eq!(lines[0].multiplicity, 6);
    }

    #[test]
    fn packing_invariants() {
        // waist ≤ 2·diameter and waist² ≤ (4/3)·area on assorted sections.
        let sections = [
            FlatSection::torus(c(1.0, 0.0), c(0.0, 1.0)).unwrap(),
            FlatSection::torus(c(1.0, 0.0), c(0.5, 0.8660254037844386)).unwrap(),
            FlatSection::torus(c(2.0, 0.0), c(1.0, 5.196152422706632)).unwrap(),
            FlatSection::torus(c(1.3, 0.2), c(-0.4, 2.6)).unwrap(),
            FlatSection::klein(c(0.5, 0.0), c(0.0, 3.464101615137754)).unwrap(),
        ];
        for s in sections {
            assert!(s.waist() <= 2.0 * s.diameter() + 1e-9);
            assert!(s.waist().powi(2) <= 4.0 / 3.0 * s.area() + 1e-9);
        }
    }

    #[test]
    fn rejects_degenerate() {
        assert!(FlatSection::torus(c(1.0, 0.0), c(2.0, 0.0)).is_err());
        assert!(FlatSection::klein(c(1.0, 0.0), c(1.0, 1.0)).is_err());
    }
}
