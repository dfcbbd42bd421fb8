//! Hyperbolic 3-space in two charts: the upper half-space model
//! {(w, z) : w ∈ ℂ, z > 0} with metric (|dw|² + dz²)/z², and the hyperboloid
//! {X ∈ ℝ^{1,3} : ⟨X,X⟩ = 1, X₀ > 0} with ⟨X,Y⟩ = X₀Y₀ − X₁Y₁ − X₂Y₂ − X₃Y₃.
//!
//! The half-space chart is where triangulations are developed (ideal vertices
//! live on ℂ ∪ {∞}, horoballs are round), while the hyperboloid chart makes
//! geodesic interpolation linear: normalize(Σλᵢ Xᵢ) is the weighted geodesic
//! combination, valid even when some Xᵢ are light-cone (ideal) vectors.
//! Isometries are 2×2 complex matrices acting projectively, together with a
//! conjugation flag for the orientation-reversing ones.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Point of the open upper half-space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UhsPoint {
    pub w: Complex64,
    pub z: f64,
}

impl UhsPoint {
    pub fn new(w: Complex64, z: f64) -> Self {
        debug_assert!(z > 0.0, "half-space point needs z > 0, got z = {z}");
        UhsPoint { w, z }
    }

    pub fn from_coords(x: f64, y: f64, z: f64) -> Self {
        UhsPoint::new(Complex64::new(x, y), z)
    }
}

/// Ideal boundary point of H³: the Riemann sphere ℂ ∪ {∞}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ideal {
    Finite(Complex64),
    Infinity,
}

impl Ideal {
    pub fn finite(re: f64, im: f64) -> Self {
        Ideal::Finite(Complex64::new(re, im))
    }

    /// Chordal distance on the Riemann sphere (bounded metric, ∞-safe):
    /// 2|p₁q₂ − p₂q₁| in unit-normalized homogeneous coordinates [p₁ : p₂].
    pub fn chordal_dist(self, other: Ideal) -> f64 {
        let lift = |p: Ideal| -> (Complex64, f64) {
            match p {
                Ideal::Finite(w) => {
                    let s = (1.0 + w.norm_sqr()).sqrt();
                    (w / s, 1.0 / s)
                }
                Ideal::Infinity => (Complex64::new(1.0, 0.0), 0.0),
            }
        };
        let (a, s) = lift(self);
        let (b, t) = lift(other);
        2.0 * (a * t - b * s).norm()
    }
}

/// Minkowski vector in ℝ^{1,3}.
pub type MVec = [f64; 4];

pub fn minkowski_dot(a: &MVec, b: &MVec) -> f64 {
    a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]
}

/// Hyperboloid lift of a half-space point.
pub fn lift(p: UhsPoint) -> MVec {
    let q = p.w.norm_sqr() + p.z * p.z;
    [
        (q + 1.0) / (2.0 * p.z),
        p.w.re / p.z,
        p.w.im / p.z,
        (q - 1.0) / (2.0 * p.z),
    ]
}

/// Light-cone lift of an ideal point (future-pointing, fixed scale).
pub fn lift_ideal(p: Ideal) -> MVec {
    match p {
        Ideal::Finite(w) => {
            let q = w.norm_sqr();
            [(q + 1.0) / 2.0, w.re, w.im, (q - 1.0) / 2.0]
        }
        Ideal::Infinity => [0.5, 0.0, 0.0, 0.5],
    }
}

/// Back to the half-space chart; requires a time-like future vector.
pub fn unlift(x: &MVec) -> UhsPoint {
    let z = 1.0 / (x[0] - x[3]);
    UhsPoint::new(Complex64::new(x[1] * z, x[2] * z), z)
}

/// Scale a future time-like vector onto the hyperboloid ⟨X,X⟩ = 1.
pub fn normalize_timelike(x: &MVec) -> Result<MVec> {
    let n = minkowski_dot(x, x);
    if n <= 0.0 || x[0] <= 0.0 {
        return Err(Error::Internal(format!(
            "expected a future time-like vector, got ⟨X,X⟩ = {n}, X₀ = {}",
            x[0]
        )));
    }
    let s = n.sqrt();
    Ok([x[0] / s, x[1] / s, x[2] / s, x[3] / s])
}

/// Weighted geodesic combination normalize(Σ λᵢ Xᵢ) of hyperboloid and/or
/// light-cone vectors with positive weights.
pub fn combine(terms: &[(f64, MVec)]) -> Result<MVec> {
    let mut acc = [0.0; 4];
    for (lam, x) in terms {
        for i in 0..4 {
            acc[i] += lam * x[i];
        }
    }
    normalize_timelike(&acc)
}

/// Hyperbolic distance between half-space points:
/// cosh d = 1 + (|Δw|² + Δz²)/(2 z₁ z₂).
pub fn dist(p: UhsPoint, q: UhsPoint) -> f64 {
    let dw = (p.w - q.w).norm_sqr();
    let dz = (p.z - q.z) * (p.z - q.z);
    let c = 1.0 + (dw + dz) / (2.0 * p.z * q.z);
    c.max(1.0).acosh()
}

/// Distance on the hyperboloid: cosh d = ⟨X,Y⟩.
pub fn dist_mvec(x: &MVec, y: &MVec) -> f64 {
    minkowski_dot(x, y).max(1.0).acosh()
}

/// Isometry of H³: the Möbius map of the matrix [[a,b],[c,d]] (normalized to
/// determinant 1), preceded by complex conjugation of the boundary when
/// `conjugate` is set (the orientation-reversing case).
#[derive(Debug, Clone, Copy)]
pub struct Mobius {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
    pub conjugate: bool,
}

impl Mobius {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        Self::with_flag(a, b, c, d, false)
    }

    pub fn with_flag(
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
        conjugate: bool,
    ) -> Result<Self> {
        let det = a * d - b * c;
        if det.norm() < 1e-14 {
            return Err(Error::Validation("singular Möbius matrix".into()));
        }
        let s = det.sqrt();
        Ok(Mobius { a: a / s, b: b / s, c: c / s, d: d / s, conjugate })
    }

    pub fn identity() -> Self {
        Mobius {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
            conjugate: false,
        }
    }

    /// self ∘ other (apply `other` first).
    pub fn compose(&self, other: &Mobius) -> Mobius {
        // M₁σ^{c₁} M₂σ^{c₂} = (M₁ · σ^{c₁}(M₂)) σ^{c₁⊕c₂}, where σ(M) is the
        // entrywise conjugate.
        let (a2, b2, c2, d2) = if self.conjugate {
            (other.a.conj(), other.b.conj(), other.c.conj(), other.d.conj())
        } else {
            (other.a, other.b, other.c, other.d)
        };
        Mobius {
            a: self.a * a2 + self.b * c2,
            b: self.a * b2 + self.b * d2,
            c: self.c * a2 + self.d * c2,
            d: self.c * b2 + self.d * d2,
            conjugate: self.conjugate ^ other.conjugate,
        }
    }

    pub fn inverse(&self) -> Mobius {
        // (Mσ^c)⁻¹ = σ^c M⁻¹ = σ^c(M⁻¹) σ^c; det is already 1.
        let (a, b, c, d) = (self.d, -self.b, -self.c, self.a);
        if self.conjugate {
            Mobius { a: a.conj(), b: b.conj(), c: c.conj(), d: d.conj(), conjugate: true }
        } else {
            Mobius { a, b, c, d, conjugate: false }
        }
    }

    /// Action on the ideal boundary.
    pub fn apply_ideal(&self, p: Ideal) -> Ideal {
        let p = match (p, self.conjugate) {
            (Ideal::Finite(w), true) => Ideal::Finite(w.conj()),
            (p, _) => p,
        };
        match p {
            Ideal::Infinity => {
                if self.c.norm() < 1e-14 {
                    Ideal::Infinity
                } else {
                    Ideal::Finite(self.a / self.c)
                }
            }
            Ideal::Finite(w) => {
                let den = self.c * w + self.d;
                if den.norm() < 1e-14 {
                    Ideal::Infinity
                } else {
                    Ideal::Finite((self.a * w + self.b) / den)
                }
            }
        }
    }

    /// Action on the half-space interior (Poincaré extension).
    pub fn apply(&self, p: UhsPoint) -> UhsPoint {
        let w = if self.conjugate { p.w.conj() } else { p.w };
        let z = p.z;
        let den = (self.c * w + self.d).norm_sqr() + self.c.norm_sqr() * z * z;
        let w2 = ((self.a * w + self.b) * (self.c * w + self.d).conj()
            + self.a * self.c.conj() * z * z)
            / den;
        UhsPoint::new(w2, z / den)
    }

    /// The holomorphic map sending (p₁,p₂,p₃) ↦ (0, ∞, 1).
    fn to_standard(p: [Ideal; 3]) -> Result<Mobius> {
        use Ideal::*;
        let m = match p {
            [Finite(z1), Finite(z2), Finite(z3)] => {
                (z3 - z2, -z1 * (z3 - z2), z3 - z1, -z2 * (z3 - z1))
            }
            [Infinity, Finite(z2), Finite(z3)] => {
                let one = Complex64::new(1.0, 0.0);
                (Complex64::new(0.0, 0.0), z3 - z2, one, -z2)
            }
            [Finite(z1), Infinity, Finite(z3)] => {
                let one = Complex64::new(1.0, 0.0);
                (one, -z1, Complex64::new(0.0, 0.0), z3 - z1)
            }
            [Finite(z1), Finite(z2), Infinity] => {
                let one = Complex64::new(1.0, 0.0);
                (one, -z1, one, -z2)
            }
            _ => {
                return Err(Error::Validation(
                    "three-point Möbius construction needs distinct points".into(),
                ))
            }
        };
        Mobius::new(m.0, m.1, m.2, m.3)
    }

    /// The unique holomorphic Möbius map with from[i] ↦ to[i].
    pub fn three_point(from: [Ideal; 3], to: [Ideal; 3]) -> Result<Mobius> {
        let s = Self::to_standard(from)?;
        let t = Self::to_standard(to)?;
        Ok(t.inverse().compose(&s))
    }

    /// The isometry (holomorphic or anti-holomorphic, detected from the side
    /// of the fourth point) sending one ideal 4-tuple to another. The tuples
    /// must be genuinely Möbius-equivalent; the fourth image is verified.
    pub fn four_point(from: [Ideal; 4], to: [Ideal; 4]) -> Result<Mobius> {
        // The cross-ratio is preserved by holomorphic maps and conjugated by
        // anti-holomorphic ones; its imaginary sign picks the chirality.
        let cr = |p: [Ideal; 4]| -> Result<Complex64> {
            let s = Self::to_standard([p[0], p[1], p[2]])?;
            match s.apply_ideal(p[3]) {
                Ideal::Finite(v) => Ok(v),
                Ideal::Infinity => Err(Error::Validation(
                    "degenerate ideal 4-tuple (repeated point)".into(),
                )),
            }
        };
        let cf = cr(from)?;
        let ct = cr(to)?;
        let base = [from[0], from[1], from[2]];
        let m = if (cf - ct).norm() <= (cf.conj() - ct).norm() {
            Self::three_point(base, [to[0], to[1], to[2]])?
        } else {
            let conj_pt = |p: Ideal| match p {
                Ideal::Finite(w) => Ideal::Finite(w.conj()),
                Ideal::Infinity => Ideal::Infinity,
            };
            let holo = Self::three_point(base.map(conj_pt), [to[0], to[1], to[2]])?;
            Mobius { conjugate: true, ..holo }
        };
        let img = m.apply_ideal(from[3]);
        if img.chordal_dist(to[3]) > 1e-8 {
            return Err(Error::Internal(format!(
                "ideal 4-tuples are not isometric: fourth point maps to {img:?}, \
                 expected {:?}",
                to[3]
            )));
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const OMEGA: Complex64 = Complex64::new(0.5, 0.8660254037844386);

    #[test]
    fn vertical_distance() {
        let p = UhsPoint::from_coords(0.0, 0.0, 1.0);
        let q = UhsPoint::from_coords(0.0, 0.0, std::f64::consts::E);
        assert!((dist(p, q) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lift_is_isometric() {
        let pts = [
            UhsPoint::from_coords(0.3, -1.2, 0.7),
            UhsPoint::from_coords(2.0, 0.1, 3.0),
            UhsPoint::from_coords(-0.5, 0.5, 0.05),
        ];
        for p in pts {
            for q in pts {
                let (x, y) = (lift(p), lift(q));
                assert!((minkowski_dot(&x, &x) - 1.0).abs() < 1e-10);
                // acosh amplifies roundoff to √ε near coincident points, so
                // the cross-model comparison is only good to ~1e-7 there.
                assert!((dist(p, q) - dist_mvec(&x, &y)).abs() < 1e-7);
                let back = unlift(&x);
                assert!((back.w - p.w).norm() < 1e-12 && (back.z - p.z).abs() < 1e-12);
            }
        }
        for b in [Ideal::finite(2.0, -1.0), Ideal::Infinity] {
            let v = lift_ideal(b);
            assert!(minkowski_dot(&v, &v).abs() < 1e-12);
            assert!(v[0] > 0.0);
        }
    }

    #[test]
    fn geodesic_midpoint_on_vertical_line() {
        // Midpoint of z = 1 and z = e² is z = e (geometric mean).
        let x = lift(UhsPoint::from_coords(0.0, 0.0, 1.0));
        let y = lift(UhsPoint::from_coords(0.0, 0.0, (2.0f64).exp()));
        let mid = unlift(&combine(&[(1.0, x), (1.0, y)]).unwrap());
        assert!((mid.z - std::f64::consts::E).abs() < 1e-12);
        assert!(mid.w.norm() < 1e-12);
    }

    #[test]
    fn mobius_is_isometry_both_chiralities() {
        let m = Mobius::new(c(2.0, 1.0), c(0.0, -1.0), c(1.0, 0.0), c(1.0, 1.0)).unwrap();
        let r = Mobius { conjugate: true, ..m };
        let pts = [
            UhsPoint::from_coords(0.1, 0.2, 1.0),
            UhsPoint::from_coords(-1.0, 3.0, 0.4),
            UhsPoint::from_coords(0.0, 0.0, 2.5),
        ];
        for iso in [m, r] {
            for p in pts {
                for q in pts {
                    assert!((dist(iso.apply(p), iso.apply(q)) - dist(p, q)).abs() < 1e-11);
                }
            }
            // Inverse really inverts, interior and boundary alike.
            let inv = iso.inverse();
            for p in pts {
                let back = inv.apply(iso.apply(p));
                assert!((back.w - p.w).norm() < 1e-11 && (back.z - p.z).abs() < 1e-11);
            }
            let b = Ideal::finite(0.7, -0.3);
            assert!(inv.apply_ideal(iso.apply_ideal(b)).chordal_dist(b) < 1e-11);
        }
    }

    #[test]
    fn boundary_action_is_interior_limit() {
        let m = Mobius::new(c(1.0, 0.5), c(-2.0, 0.0), c(0.3, 0.0), c(1.0, -1.0)).unwrap();
        let w = c(1.5, -0.25);
        let img = m.apply(UhsPoint::new(w, 1e-7));
        match m.apply_ideal(Ideal::Finite(w)) {
            Ideal::Finite(v) => assert!((img.w - v).norm() < 1e-5),
            Ideal::Infinity => panic!("finite image expected"),
        }
    }

    #[test]
    fn three_point_construction() {
        let from = [Ideal::finite(0.0, 0.0), Ideal::Infinity, Ideal::finite(1.0, 0.0)];
        let to = [
            Ideal::finite(2.0, 1.0),
            Ideal::finite(-1.0, 0.0),
            Ideal::finite(0.0, 3.0),
        ];
        let m = Mobius::three_point(from, to).unwrap();
        for (f, t) in from.iter().zip(&to) {
            assert!(m.apply_ideal(*f).chordal_dist(*t) < 1e-12);
        }
    }

    #[test]
    fn four_point_detects_chirality() {
        // Regular ideal tetrahedron {∞, 0, 1, ω}.
        let inf = Ideal::Infinity;
        let z0 = Ideal::finite(0.0, 0.0);
        let z1 = Ideal::finite(1.0, 0.0);
        let zw = Ideal::Finite(OMEGA);

        // Even rotation (∞ fixed, 0→1→ω→0): holomorphic.
        let m = Mobius::four_point([inf, z0, z1, zw], [inf, z1, zw, z0]).unwrap();
        assert!(!m.conjugate);

        // Transposition of 0 and 1 (∞, ω fixed): orientation-reversing.
        let r = Mobius::four_point([inf, z0, z1, zw], [inf, z1, z0, zw]).unwrap();
        assert!(r.conjugate);
        assert!(r.apply_ideal(zw).chordal_dist(zw) < 1e-12);

        // Non-isometric tuples must be rejected.
        let bad = Mobius::four_point(
            [inf, z0, z1, zw],
            [inf, z0, z1, Ideal::finite(0.5, 0.1)],
        );
        assert!(bad.is_err());
    }
}
