//! Ambient magnetic field of rail return currents.
//!
//! Rails are modelled as straight line conductors in vacuum. Two geometries
//! are covered: the two-rail track (infinitely long, parallel, both rails on
//! the `y = 0` plane) and the rectangular laboratory loop built from finite
//! straight segments. Every current and field is an RMS quantity.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Vacuum permeability in H/m.
pub const MU0: f64 = 4.0e-7 * PI;

/// RMS magnitude and frequency of the rail return current.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceCurrent {
    i_rms: f64,
    frequency: f64,
}

impl SourceCurrent {
    pub fn new(i_rms: f64, frequency: f64) -> Result<Self> {
        if !(i_rms >= 0.0) || !i_rms.is_finite() {
            return Err(Error::domain(format!(
                "rail current must be >= 0 A, got {i_rms}"
            )));
        }
        if !(frequency > 0.0) || !frequency.is_finite() {
            return Err(Error::domain(format!(
                "frequency must be > 0 Hz, got {frequency}"
            )));
        }
        Ok(Self { i_rms, frequency })
    }

    /// Builds the source from a sinusoid's peak amplitude.
    pub fn from_peak(i_peak: f64, frequency: f64) -> Result<Self> {
        Self::new(i_peak / 2f64.sqrt(), frequency)
    }

    pub fn i_rms(&self) -> f64 {
        self.i_rms
    }

    pub fn i_peak(&self) -> f64 {
        self.i_rms * 2f64.sqrt()
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn angular_frequency(&self) -> f64 {
        2.0 * PI * self.frequency
    }

    /// Same frequency, current multiplied by `factor` (attenuation, scaling).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.i_rms * factor, self.frequency)
    }
}

/// Harvester placement relative to a two-rail track.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RailSiteGeometry {
    r_n: f64,
    d_rr: f64,
    current_split: f64,
}

impl RailSiteGeometry {
    /// `r_n` is the distance from the nearest rail centre to the coil axis,
    /// measured outward (away from the far rail); `d_rr` the rail separation.
    /// The return current is split evenly between the rails.
    pub fn new(r_n: f64, d_rr: f64) -> Result<Self> {
        Self::with_current_split(r_n, d_rr, 0.5)
    }

    /// `current_split` is the fraction of the total return current carried by the near rail.
    pub fn with_current_split(r_n: f64, d_rr: f64, current_split: f64) -> Result<Self> {
        check_radius_pair(r_n, d_rr)?;
        if !(0.0..=1.0).contains(&current_split) {
            return Err(Error::domain(format!(
                "current split must lie in [0, 1], got {current_split}"
            )));
        }
        Ok(Self {
            r_n,
            d_rr,
            current_split,
        })
    }

    pub fn r_n(&self) -> f64 {
        self.r_n
    }

    pub fn d_rr(&self) -> f64 {
        self.d_rr
    }

    /// Distance to the far rail.
    pub fn r_f(&self) -> f64 {
        self.r_n + self.d_rr
    }

    pub fn current_split(&self) -> f64 {
        self.current_split
    }

    /// Same track, harvester moved to `r_n`.
    pub fn at_distance(&self, r_n: f64) -> Result<Self> {
        Self::with_current_split(r_n, self.d_rr, self.current_split)
    }
}

/// Laboratory loop: near conductor of length `a` at distance `r`, return
/// conductor `b` further away carrying the same current in reverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabLoopGeometry {
    r: f64,
    a: f64,
    b: f64,
}

impl LabLoopGeometry {
    pub fn new(r: f64, a: f64, b: f64) -> Result<Self> {
        for (name, v) in [("r", r), ("a", a), ("b", b)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(format!(
                    "lab loop {name} must be > 0 m, got {v}"
                )));
            }
        }
        Ok(Self { r, a, b })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn at_distance(&self, r: f64) -> Result<Self> {
        Self::new(r, self.a, self.b)
    }
}

/// Applied field at the harvester, directed along the vertical axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldStrength {
    /// A/m RMS.
    pub h_rms: f64,
    /// Free-air flux density, T RMS. Always `MU0 * h_rms`.
    pub b_rms: f64,
}

impl FieldStrength {
    pub fn from_h(h_rms: f64) -> Self {
        Self {
            h_rms,
            b_rms: MU0 * h_rms,
        }
    }

    pub fn zero() -> Self {
        Self::from_h(0.0)
    }
}

fn check_radius_pair(r_n: f64, d_rr: f64) -> Result<()> {
    if !(r_n > 0.0) || !r_n.is_finite() {
        return Err(Error::domain(format!(
            "distance to nearest rail must be > 0 m, got {r_n}"
        )));
    }
    if !(d_rr >= 0.0) || !d_rr.is_finite() {
        return Err(Error::domain(format!(
            "rail separation must be >= 0 m, got {d_rr}"
        )));
    }
    Ok(())
}

/// Field of an infinitely long straight conductor, `I / (2πr)`.
pub fn infinite_wire_h(i_rms: f64, r: f64) -> f64 {
    i_rms / (2.0 * PI * r)
}

/// Single-conductor-equivalent distance of an evenly loaded rail pair:
/// `2 r_n (r_n + d_rr) / (2 r_n + d_rr)`, always in `[r_n, 2 r_n)`.
pub fn effective_radius(r_n: f64, d_rr: f64) -> Result<f64> {
    check_radius_pair(r_n, d_rr)?;
    Ok(2.0 * r_n * (r_n + d_rr) / (2.0 * r_n + d_rr))
}

/// Field on the rail plane outside the track, both rail contributions adding up.
pub fn field_two_rail(src: &SourceCurrent, geom: &RailSiteGeometry) -> FieldStrength {
    let near = geom.current_split * src.i_rms;
    let far = (1.0 - geom.current_split) * src.i_rms;
    FieldStrength::from_h(infinite_wire_h(near, geom.r_n) + infinite_wire_h(far, geom.r_f()))
}

/// Signed vertical field at horizontal offset `x` on the rail plane.
///
/// The near rail sits at `x = 0`, the far rail at `x = -d_rr`; positive `x`
/// points away from the track. Unlike [`field_two_rail`] this also covers the
/// region between the rails, where the two contributions oppose each other.
pub fn rail_plane_field(src: &SourceCurrent, geom: &RailSiteGeometry, x: f64) -> Result<f64> {
    let to_far = x + geom.d_rr;
    if x == 0.0 || to_far == 0.0 || !x.is_finite() {
        return Err(Error::domain(format!(
            "field is singular on a rail (x = {x})"
        )));
    }
    let near = geom.current_split * src.i_rms;
    let far = (1.0 - geom.current_split) * src.i_rms;
    Ok(near / (2.0 * PI * x) + far / (2.0 * PI * to_far))
}

/// `a / sqrt(4r² + a²)`: the share of the infinite-wire field produced by a
/// centred segment of length `a`.
pub fn finite_length_factor(r: f64, a: f64) -> f64 {
    a / (4.0 * r * r + a * a).sqrt()
}

fn segment_h(i_rms: f64, r: f64, a: f64) -> f64 {
    infinite_wire_h(i_rms, r) * finite_length_factor(r, a)
}

/// Field at perpendicular distance `r` from the midpoint of a straight
/// conductor of length `a`.
pub fn field_finite_segment(src: &SourceCurrent, r: f64, a: f64) -> Result<FieldStrength> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain(format!(
            "segment distance must be > 0 m, got {r}"
        )));
    }
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(format!(
            "segment length must be > 0 m, got {a}"
        )));
    }
    Ok(FieldStrength::from_h(segment_h(src.i_rms, r, a)))
}

/// Near side minus far side of the laboratory loop. Side conductors cancel.
pub fn field_lab_loop(src: &SourceCurrent, lab: &LabLoopGeometry) -> FieldStrength {
    let near = segment_h(src.i_rms, lab.r, lab.a);
    let far = segment_h(src.i_rms, lab.r + lab.b, lab.a);
    FieldStrength::from_h(near - far)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn src(i: f64) -> SourceCurrent {
        SourceCurrent::new(i, 50.0 / 3.0).unwrap()
    }

    #[test]
    fn effective_radius_examples() {
        assert_relative_eq!(
            effective_radius(0.5, 1.435).unwrap(),
            0.79466119,
            max_relative = 1e-7
        );
        assert_eq!(effective_radius(0.7, 0.0).unwrap(), 0.7);
        assert_relative_eq!(
            effective_radius(0.5, 1e12).unwrap(),
            1.0,
            max_relative = 1e-9
        );
    }

    #[test]
    fn effective_radius_rejects_bad_input() {
        assert!(matches!(effective_radius(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(effective_radius(-1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(effective_radius(0.5, -0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn free_air_field_at_half_metre() {
        let g = RailSiteGeometry::new(0.5, 1.435).unwrap();
        let f = field_two_rail(&src(100.0), &g);
        assert_relative_eq!(f.b_rms, 25.2e-6, max_relative = 5e-3);
        assert_relative_eq!(f.h_rms, 20.028025, max_relative = 1e-7);
        assert_eq!(f.b_rms, MU0 * f.h_rms);

        assert_eq!(field_two_rail(&src(0.0), &g).h_rms, 0.0);
        let doubled = field_two_rail(&src(200.0), &g);
        assert_eq!(doubled.h_rms, 2.0 * f.h_rms);
    }

    #[test]
    fn uneven_split_weights_each_rail() {
        let g = RailSiteGeometry::with_current_split(0.5, 1.5, 1.0).unwrap();
        let f = field_two_rail(&src(10.0), &g);
        assert_relative_eq!(f.h_rms, 10.0 / (2.0 * PI * 0.5), max_relative = 1e-15);
        assert!(RailSiteGeometry::with_current_split(0.5, 1.5, 1.1).is_err());
    }

    #[test]
    fn midpoint_between_rails_cancels() {
        let g = RailSiteGeometry::new(0.5, 1.435).unwrap();
        let h = rail_plane_field(&src(321.0), &g, -1.435 / 2.0).unwrap();
        assert_eq!(h, 0.0);
        assert!(rail_plane_field(&src(1.0), &g, 0.0).is_err());
        assert!(rail_plane_field(&src(1.0), &g, -1.435).is_err());
        let outside = rail_plane_field(&src(100.0), &g, 0.5).unwrap();
        assert_relative_eq!(
            outside,
            field_two_rail(&src(100.0), &g).h_rms,
            max_relative = 1e-14
        );
    }

    #[test]
    fn finite_segment_examples() {
        let long = field_finite_segment(&src(100.0), 0.5, 1e6).unwrap();
        assert_relative_eq!(long.h_rms, 31.830989, max_relative = 1e-6);
        let lab = field_finite_segment(&src(100.0), 1.0, 1.2).unwrap();
        assert_relative_eq!(lab.h_rms, 8.1884543, max_relative = 1e-7);
        assert_relative_eq!(
            finite_length_factor(0.3, 0.6),
            1.0 / 2f64.sqrt(),
            max_relative = 1e-15
        );
        assert!(field_finite_segment(&src(1.0), 0.0, 1.0).is_err());
        assert!(field_finite_segment(&src(1.0), 1.0, 0.0).is_err());
    }

    #[test]
    fn lab_loop_examples() {
        let near = LabLoopGeometry::new(0.25, 1.2, 3.0).unwrap();
        assert_relative_eq!(
            field_lab_loop(&src(1.0), &near).h_rms,
            0.57875850,
            max_relative = 1e-7
        );
        let mid = LabLoopGeometry::new(0.5, 1.2, 3.0).unwrap();
        assert_relative_eq!(
            field_lab_loop(&src(1.0), &mid).h_rms,
            0.23684916,
            max_relative = 1e-7
        );

        let open = LabLoopGeometry::new(0.5, 1.2, 1e9).unwrap();
        let seg = field_finite_segment(&src(1.0), 0.5, 1.2).unwrap();
        assert_relative_eq!(
            field_lab_loop(&src(1.0), &open).h_rms,
            seg.h_rms,
            max_relative = 1e-12
        );
        assert!(LabLoopGeometry::new(0.5, 1.2, 0.0).is_err());
    }

    #[test]
    fn source_current_invariants() {
        assert!(SourceCurrent::new(-1.0, 50.0).is_err());
        assert!(SourceCurrent::new(1.0, 0.0).is_err());
        assert!(SourceCurrent::new(f64::NAN, 50.0).is_err());
        let s = SourceCurrent::from_peak(2f64.sqrt() * 10.0, 50.0).unwrap();
        assert_relative_eq!(s.i_rms(), 10.0, max_relative = 1e-15);
        assert_relative_eq!(s.i_peak(), 2f64.sqrt() * 10.0, max_relative = 1e-15);
    }

    proptest! {
        #[test]
        fn superposition_matches_effective_radius(r_n in 0.01f64..10.0, d_rr in 0.0f64..5.0, i in 0.1f64..1000.0) {
            let g = RailSiteGeometry::new(r_n, d_rr).unwrap();
            let h = field_two_rail(&src(i), &g).h_rms;
            let via_re = infinite_wire_h(i, effective_radius(r_n, d_rr).unwrap());
            let two_wires = infinite_wire_h(i / 2.0, r_n) + infinite_wire_h(i / 2.0, r_n + d_rr);
            prop_assert!(((h - via_re) / via_re).abs() < 1e-12);
            prop_assert!(((h - two_wires) / two_wires).abs() < 1e-12);
            let re = effective_radius(r_n, d_rr).unwrap();
            prop_assert!(re >= r_n && re < 2.0 * r_n);
        }

        #[test]
        fn fields_decrease_with_distance(r in 0.05f64..5.0, dr in 1e-3f64..1.0, a in 0.1f64..10.0, b in 0.1f64..10.0) {
            let s = src(100.0);
            let g1 = RailSiteGeometry::new(r, 1.435).unwrap();
            let g2 = RailSiteGeometry::new(r + dr, 1.435).unwrap();
            prop_assert!(field_two_rail(&s, &g2).h_rms < field_two_rail(&s, &g1).h_rms);
            let s1 = field_finite_segment(&s, r, a).unwrap().h_rms;
            let s2 = field_finite_segment(&s, r + dr, a).unwrap().h_rms;
            prop_assert!(s2 < s1);
            let l1 = field_lab_loop(&s, &LabLoopGeometry::new(r, a, b).unwrap()).h_rms;
            let l2 = field_lab_loop(&s, &LabLoopGeometry::new(r + dr, a, b).unwrap()).h_rms;
            prop_assert!(l2 < l1);
            prop_assert!(l1 > 0.0 && l1 < s1);
        }

        #[test]
        fn fields_are_linear_in_current(i in 0.0f64..1000.0, k in 0.0f64..10.0, r in 0.1f64..3.0) {
            let base = src(i);
            let scaled = src(i * k);
            let g = RailSiteGeometry::new(r, 1.435).unwrap();
            let lab = LabLoopGeometry::new(r, 1.2, 3.0).unwrap();
            let tol = 1e-12 * (1.0 + field_two_rail(&scaled, &g).h_rms);
            prop_assert!((field_two_rail(&scaled, &g).h_rms - k * field_two_rail(&base, &g).h_rms).abs() <= tol);
            let tol = 1e-12 * (1.0 + field_lab_loop(&scaled, &lab).h_rms);
            prop_assert!((field_lab_loop(&scaled, &lab).h_rms - k * field_lab_loop(&base, &lab).h_rms).abs() <= tol);
        }

        #[test]
        fn long_segment_limit(r in 0.05f64..2.0, ratio in 10.0f64..1e4) {
            let a = r * ratio;
            let seg = field_finite_segment(&src(1.0), r, a).unwrap().h_rms;
            let inf = infinite_wire_h(1.0, r);
            let rel = (inf - seg) / inf;
            prop_assert!(rel >= 0.0);
            prop_assert!(rel <= (2.0 * r / a).powi(2));
        }
    }
}
