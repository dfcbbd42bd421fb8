//! Global geometric invariants of a triangulated cusped manifold: hyperbolic
//! volume, cusp cross-section geometry, truncation constants, and thick-thin
//! constants.
//!
//! The truncation constants are
//!
//! ```text
//! L0  = max{ e^{tau0}, |xi_1| + |eta_1|, ..., |xi_k| + |eta_k| }
//! tau = log(3 L0)
//! ```
//!
//! where `(xi_i, eta_i)` generate the translations of cusp `i` at the maximal
//! (tangency) horotorus and `tau0` is the ingested minimal disjointness
//! height.  Truncating every cusp at height `tau` leaves a compact core on
//! which the norm comparisons are run; heights are measured from the tangency
//! horotorus, so the cross-section area decays as `area * e^{-2t}`.

use crate::error::{Error, Result};
use crate::io::{CuspModelFile, ManifoldFile};
use crate::lattice::FlatSection;
use crate::lobachevsky::ideal_tet_volume;

/// Margulis constant adopted throughout: below this scale thin parts are
/// tubes and cusp neighborhoods.
pub const MARGULIS: f64 = 0.29;

/// One cusp cross-section with its derived flat invariants.
#[derive(Clone, Debug)]
pub struct CuspData {
    pub section: FlatSection,
    /// `|Im(conj(xi) * eta)|`, the flat area of the cross-section.
    pub area: f64,
    /// Length of the shortest closed flat geodesic (shortest lattice vector,
    /// or the glide core for Klein-bottle sections).
    pub waist: f64,
    /// Intrinsic diameter of the flat cross-section.
    pub diameter: f64,
    /// Torus link (true) or Klein-bottle link (false).
    pub orientable: bool,
}

impl CuspData {
    pub fn from_section(section: FlatSection) -> Result<CuspData> {
        let area = section.area();
        let waist = section.waist();
        let diameter = section.diameter();
        let orientable = matches!(section, FlatSection::Torus { .. });
        Ok(CuspData {
            section,
            area,
            waist,
            diameter,
            orientable,
        })
    }

    pub fn xi(&self) -> num_complex::Complex64 {
        match self.section {
            FlatSection::Torus { xi, .. } | FlatSection::Klein { xi, .. } => xi,
        }
    }

    pub fn eta(&self) -> num_complex::Complex64 {
        match self.section {
            FlatSection::Torus { eta, .. } | FlatSection::Klein { eta, .. } => eta,
        }
    }

    /// A maximal cusp neighborhood has waist at least 1; smaller values are
    /// legal input (e.g. Klein glide cores) but worth surfacing.
    pub fn waist_warning(&self) -> bool {
        self.waist < 1.0
    }
}

/// Hyperbolic volume: sum of ideal-tetrahedron volumes
/// `L(arg z) + L(arg 1/(1-z)) + L(arg (z-1)/z)` over the shapes, with `L`
/// the Lobachevsky function.
pub fn volume(m: &ManifoldFile) -> Result<f64> {
    m.shapes.iter().map(|&z| ideal_tet_volume(z)).sum()
}

/// Derived flat data for every cusp, in cusp order.  Orientability of each
/// link is decided from the gluing table; the `(xi, eta)` rows of the input
/// are interpreted as torus translations or as (glide, orthogonal
/// translation) accordingly.
pub fn cusp_geometry(m: &ManifoldFile) -> Result<Vec<CuspData>> {
    let vcls = m.tri.vertex_classes();
    m.cusps
        .iter()
        .zip(vcls.iter())
        .map(|(&(xi, eta), corners)| {
            let section = if m.tri.cusp_orientable(corners) {
                FlatSection::torus(xi, eta)?
            } else {
                FlatSection::klein(xi, eta)?
            };
            CuspData::from_section(section)
        })
        .collect()
}

/// Cusp data for a standalone model cusp (always a torus).
pub fn cusp_data_from_model(c: &CuspModelFile) -> Result<CuspData> {
    CuspData::from_section(FlatSection::torus(c.xi, c.eta)?)
}

/// The heights `(tau0, L0, tau)`; see the module docs for the formulas.
#[derive(Clone, Copy, Debug)]
pub struct TruncationConstants {
    pub tau0: f64,
    pub l0: f64,
    pub tau: f64,
}

pub fn truncation_constants(cusps: &[CuspData], tau0: f64) -> Result<TruncationConstants> {
    if cusps.is_empty() {
        return Err(Error::Validation(
            "closed manifold has no truncation constants".to_string(),
        ));
    }
    if tau0 < 0.0 {
        return Err(Error::Domain(format!("tau0 must be non-negative, got {tau0}")));
    }
    let mut l0 = tau0.exp();
    for c in cusps {
        l0 = l0.max(c.xi().norm() + c.eta().norm());
    }
    Ok(TruncationConstants {
        tau0,
        l0,
        tau: (3.0 * l0).ln(),
    })
}

/// Largest intrinsic boundary-torus diameter, the `d` of the right-hand
/// constants.
pub fn max_cusp_diameter(cusps: &[CuspData]) -> f64 {
    cusps.iter().map(|c| c.diameter).fold(0.0, f64::max)
}

/// Margulis constant and the ingested systole, with the tube flag.
#[derive(Clone, Copy, Debug)]
pub struct ThickThin {
    pub margulis: f64,
    pub systole: f64,
    /// True when `sys(M) >= margulis`: no Margulis tubes below that scale.
    pub no_thin_tubes: bool,
}

pub fn thick_thin_constants(m: &ManifoldFile) -> Result<ThickThin> {
    let (rank, _tors) = m.tri.h1()?;
    if rank == 0 {
        return Err(Error::Precondition(format!(
            "{}: thick-thin constants are only used for manifolds with b1 >= 1",
            m.name
        )));
    }
    Ok(ThickThin {
        margulis: MARGULIS,
        systole: m.systole,
        no_thin_tubes: m.systole >= MARGULIS,
    })
}

/// Volume of the compact core truncated at height `t` above the tangency
/// horotori: the full volume minus the cusp tails
/// `integral_t^inf area_i e^{-2s} ds = area_i e^{-2t} / 2`.
pub fn truncated_volume(m: &ManifoldFile, t: f64) -> Result<f64> {
    let full = volume(m)?;
    let cusps = cusp_geometry(m)?;
    let tail: f64 = cusps.iter().map(|c| c.area * (-2.0 * t).exp() / 2.0).sum();
    Ok(full - tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_manifold;
    use num_complex::Complex64;

    fn fixture(name: &str) -> ManifoldFile {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../fixtures")
            .join(name);
        parse_manifold(&std::fs::read_to_string(dir).unwrap()).unwrap()
    }

    #[test]
    fn volumes_of_fixtures() {
        // n * (volume of the regular ideal tetrahedron), all shapes regular
        let v1 = 1.0149416064096536;
        for (file, n) in [
            ("figure_eight.mfd", 2.0),
            ("sister.mfd", 2.0),
            ("gieseking.mfd", 1.0),
            ("sister_cover5.mfd", 10.0),
            ("sister_cover5_double.mfd", 20.0),
        ] {
            let m = fixture(file);
            let v = volume(&m).unwrap();
            assert!((v - n * v1).abs() < 1e-12, "{file}: {v}");
        }
    }

    #[test]
    fn fig8_cusp_is_a_long_torus() {
        let m = fixture("figure_eight.mfd");
        let cd = cusp_geometry(&m).unwrap();
        assert_eq!(cd.len(), 1);
        let c = &cd[0];
        assert!(c.orientable);
        assert!((c.area - 2.0 * 3f64.sqrt()).abs() < 1e-12);
        assert!((c.waist - 1.0).abs() < 1e-12);
        // diameter of C/(Z + Z*2sqrt(3) i) = half the fundamental diagonal
        assert!((c.diameter - 13f64.sqrt() / 2.0).abs() < 1e-9, "{}", c.diameter);
        assert!(!c.waist_warning());
    }

    #[test]
    fn gieseking_cusp_is_a_klein_bottle() {
        let m = fixture("gieseking.mfd");
        let cd = cusp_geometry(&m).unwrap();
        let c = &cd[0];
        assert!(!c.orientable);
        assert!((c.area - 3f64.sqrt()).abs() < 1e-12);
        assert!((c.waist - 0.5).abs() < 1e-12);
        assert!((c.diameter - 1.75).abs() < 1e-4);
        assert!(c.waist_warning());
    }

    #[test]
    fn cover_cusp_diameters() {
        let m = fixture("sister_cover5.mfd");
        let cd = cusp_geometry(&m).unwrap();
        assert_eq!(cd.len(), 2);
        // exact Voronoi circumradius of Z*2 + Z*(1 + 3 sqrt(3) i)
        assert!((cd[0].diameter - 14.0 * 3f64.sqrt() / 9.0).abs() < 1e-12);
        assert!((cd[1].diameter - 2.0).abs() < 1e-12);
        assert!((max_cusp_diameter(&cd) - 14.0 * 3f64.sqrt() / 9.0).abs() < 1e-12);
        assert!((cd[0].waist - 2.0).abs() < 1e-12);
        assert!((cd[1].waist - 2.0).abs() < 1e-12);
    }

    #[test]
    fn truncation_constant_examples() {
        let square = CuspData::from_section(
            FlatSection::torus(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)).unwrap(),
        )
        .unwrap();
        let tc = truncation_constants(&[square.clone()], 0.2).unwrap();
        assert_eq!(tc.l0, 2.0);
        assert_eq!(tc.tau, 6f64.ln());

        let two = CuspData::from_section(
            FlatSection::torus(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)).unwrap(),
        )
        .unwrap();
        let four = CuspData::from_section(
            FlatSection::torus(Complex64::new(2.0, 0.0), Complex64::new(0.0, 2.0)).unwrap(),
        )
        .unwrap();
        let tc = truncation_constants(&[two, four], 1.0).unwrap();
        assert_eq!(tc.l0, 4.0);
        assert_eq!(tc.tau, 12f64.ln());

        let err = truncation_constants(&[], 0.0).unwrap_err();
        assert!(
            err.to_string().contains("closed manifold has no truncation constants"),
            "{err}"
        );

        // invariants hold exactly on a fixture
        let m = fixture("figure_eight.mfd");
        let cd = cusp_geometry(&m).unwrap();
        let tc = truncation_constants(&cd, m.tau0).unwrap();
        assert!(tc.l0 >= tc.tau0.exp());
        for c in &cd {
            assert!(tc.l0 >= c.xi().norm() + c.eta().norm());
        }
        assert_eq!(tc.tau, (3.0 * tc.l0).ln());
    }

    #[test]
    fn thick_thin_flags() {
        let mut m = fixture("figure_eight.mfd");
        let tt = thick_thin_constants(&m).unwrap();
        assert_eq!(tt.margulis, 0.29);
        assert_eq!(tt.systole, m.systole);
        assert!(tt.no_thin_tubes);
        m.systole = 0.5;
        assert!(thick_thin_constants(&m).unwrap().no_thin_tubes);
        m.systole = 0.1;
        assert!(!thick_thin_constants(&m).unwrap().no_thin_tubes);
    }

    #[test]
    fn truncated_volume_formula() {
        let m = fixture("figure_eight.mfd");
        let vol = volume(&m).unwrap();
        let area = 2.0 * 3f64.sqrt();
        for t in [1.0, 2.0, 4.0] {
            let vt = truncated_volume(&m, t).unwrap();
            assert!((vt - (vol - area * (-2.0 * t).exp() / 2.0)).abs() < 1e-14);
            assert!(vt < vol);
        }
        assert!(truncated_volume(&m, 1.0).unwrap() < truncated_volume(&m, 2.0).unwrap());
    }

    #[test]
    fn flat_lattice_bounds_hold_on_fixture_cusps() {
        for file in [
            "figure_eight.mfd",
            "sister.mfd",
            "gieseking.mfd",
            "sister_cover5.mfd",
            "sister_cover5_double.mfd",
        ] {
            let m = fixture(file);
            for c in cusp_geometry(&m).unwrap() {
                assert!(c.waist <= 2.0 * c.diameter + 1e-12, "{file}");
                assert!(c.waist * c.waist <= 4.0 / 3.0 * c.area + 1e-12, "{file}");
            }
        }
    }

    #[test]
    fn model_cusp_data() {
        let c = CuspModelFile {
            xi: Complex64::new(2.0, 0.0),
            eta: Complex64::new(0.0, 2.0),
            base_height: 1.0,
        };
        let cd = cusp_data_from_model(&c).unwrap();
        assert_eq!(cd.area, 4.0);
        assert_eq!(cd.waist, 2.0);
        assert!((cd.diameter - 2f64.sqrt()).abs() < 1e-12);
    }
}
