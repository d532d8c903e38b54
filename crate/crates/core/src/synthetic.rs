//! Combinatorial model of the two-strip family on the unit torus.
//!
//! The field equals `(phi, 1)` near the meridians `y = 0` and `y = 1/2`.
//! The strip `0 < y < 1/2` carries two saddles whose region `U1` holds a
//! pair of nodes; the strip `1/2 < y < 1` is the same picture shifted right
//! by `rho`, except that its region `U2` holds a limit cycle. Only the data
//! the equivalence argument uses is kept: the correspondence maps of the two
//! strips and where the four outer separatrices cross the meridians.
//!
//! All positions are in `R / Z` and reduced to `[0, 1)`.

use crate::error::{Error, Result};
use crate::field::wrap_scalar;
use crate::rotation::{circle_norm, e_phi_equiv, orbit_membership, Decision, EquivVerdict};

/// Points closer than this on `R / Z` are treated as equal.
pub const COINCIDENCE_TOL: f64 = 1e-12;

/// Smallest spacing accepted by [`decomposition`].
pub const MIN_SPACING: f64 = 1e-10;

fn unit(x: f64) -> f64 {
    wrap_scalar(x, 1.0)
}

/// Phase portrait inside one of the saddle regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interior {
    /// One attracting and one repelling node.
    Nodes,
    /// An attracting node and a repelling limit cycle around a node.
    LimitCycle,
}

/// Correspondence map across one strip, `x -> x + shift`, undefined where
/// the stable separatrix of the strip's saddle crosses the entry meridian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripMap {
    pub shift: f64,
    /// Entry point of the stable separatrix.
    pub singular: f64,
    /// Exit point of the unstable separatrix.
    pub exit: f64,
}

impl StripMap {
    pub fn apply(&self, x: f64) -> Option<f64> {
        if circle_norm(x - self.singular) <= COINCIDENCE_TOL {
            None
        } else {
            Some(unit(x + self.shift))
        }
    }

    /// The continuous extension through the singular point.
    pub fn extended(&self, x: f64) -> f64 {
        unit(x + self.shift)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticField {
    pub rho: f64,
    pub phi: f64,
    /// From `M_0` to `M_1/2`.
    pub lower: StripMap,
    /// From `M_1/2` to `M_1 = M_0`.
    pub upper: StripMap,
    pub u1: Interior,
    pub u2: Interior,
}

/// A separatrix coincidence detected by [`SyntheticField::connections`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connection {
    /// The unstable separatrix of `S1` is the stable one of `s2`.
    Gamma1ToGamma2 { crossings: usize },
    /// The unstable separatrix of `S2` is the stable one of `s1`.
    Gamma2ToGamma1 { crossings: usize },
}

pub fn build(rho: f64, phi: f64) -> Result<SyntheticField> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidArgument(format!("rho must lie in [0, 1), got {rho}")));
    }
    if !(phi > 0.0 && phi < 1.0) {
        return Err(Error::InvalidArgument(format!("phi must lie in (0, 1), got {phi}")));
    }
    let half = 0.5 * phi;
    Ok(SyntheticField {
        rho,
        phi,
        lower: StripMap {
            shift: half,
            singular: 0.0,
            exit: unit(half),
        },
        upper: StripMap {
            shift: half,
            singular: unit(rho + half),
            exit: unit(rho + phi),
        },
        u1: Interior::Nodes,
        u2: Interior::LimitCycle,
    })
}

impl SyntheticField {
    /// First return to `M_0`, `x -> x + phi`; `None` on `gamma1` and `gamma2`.
    pub fn return_map(&self, x: f64) -> Option<f64> {
        self.lower.apply(x).and_then(|m| self.upper.apply(m))
    }

    /// The first `depth + 1` crossings of the stable separatrix of `s1`
    /// with `M_0`, walking backwards: `-n phi`, `n = 0..=depth`.
    pub fn gamma1_hits(&self, depth: usize) -> Vec<f64> {
        (0..=depth).map(|n| unit(-(n as f64) * self.phi)).collect()
    }

    /// Stable separatrix of `s2`: `rho - n phi`.
    pub fn gamma2_hits(&self, depth: usize) -> Vec<f64> {
        (0..=depth)
            .map(|n| unit(self.rho - n as f64 * self.phi))
            .collect()
    }

    /// Unstable separatrix of `S1` (leaves `M_1/2` at `phi/2`): `n phi`, `n >= 1`.
    pub fn big_gamma1_hits(&self, depth: usize) -> Vec<f64> {
        (1..=depth + 1).map(|n| unit(n as f64 * self.phi)).collect()
    }

    /// Unstable separatrix of `S2`: `rho + n phi`, `n >= 1`.
    pub fn big_gamma2_hits(&self, depth: usize) -> Vec<f64> {
        (1..=depth + 1)
            .map(|n| unit(self.rho + n as f64 * self.phi))
            .collect()
    }

    /// Separatrix connections visible within `depth` meridian crossings.
    ///
    /// Happens exactly when `rho` lies on the orbit `{n phi}`.
    pub fn connections(&self, depth: usize) -> Vec<Connection> {
        let mut out = Vec::new();
        // S1 leaves M_1/2 at phi/2; s2's stable separatrix enters it at rho + phi/2.
        if circle_norm(self.upper.singular - self.lower.exit) <= COINCIDENCE_TOL {
            out.push(Connection::Gamma1ToGamma2 { crossings: 0 });
        }
        let g1 = self.gamma1_hits(depth);
        let g2 = self.gamma2_hits(depth);
        for (k, h) in self.big_gamma1_hits(depth).iter().enumerate() {
            if g2.iter().any(|g| circle_norm(g - h) <= COINCIDENCE_TOL) {
                out.push(Connection::Gamma1ToGamma2 { crossings: k + 1 });
                break;
            }
        }
        for (k, h) in self.big_gamma2_hits(depth).iter().enumerate() {
            if g1.iter().any(|g| circle_norm(g - h) <= COINCIDENCE_TOL) {
                out.push(Connection::Gamma2ToGamma1 { crossings: k + 1 });
                break;
            }
        }
        out
    }
}

/// Decides whether two members of the family are orbitally equivalent, up
/// to `|n| <= horizon` and tolerance `eps`.
///
/// Both `rho` must stay off the orbit `{n phi}`; the rotation parameters
/// must agree; then equivalence holds iff `rho2 = rho1 + n phi (mod 1)`.
pub fn equivalence_oracle(
    f1: &SyntheticField,
    f2: &SyntheticField,
    horizon: u64,
    eps: f64,
) -> Result<EquivVerdict> {
    for (name, f) in [("first", f1), ("second", f2)] {
        if orbit_membership(f.rho, f.phi, horizon, eps) {
            return Err(Error::PreconditionViolated(format!(
                "{name} field has rho = {} on the orbit of 0 under rotation by phi",
                f.rho
            )));
        }
    }
    let mismatch = (f1.phi - f2.phi).abs();
    if mismatch > eps {
        return Ok(EquivVerdict {
            decision: Decision::NotEquivalent,
            residual: mismatch,
            horizon,
            eps,
        });
    }
    Ok(e_phi_equiv(f1.rho, f2.rho, f1.phi, horizon, eps))
}

/// Closed arc `[center - radius, center + radius]` of `R / Z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub center: f64,
    pub radius: f64,
}

impl Arc {
    pub fn start(&self) -> f64 {
        unit(self.center - self.radius)
    }

    pub fn end(&self) -> f64 {
        unit(self.center + self.radius)
    }

    pub fn contains(&self, x: f64) -> bool {
        circle_norm(x - self.center) <= self.radius
    }

    pub fn interior_contains(&self, x: f64) -> bool {
        circle_norm(x - self.center) < self.radius
    }

    /// Gap between the two arcs along the circle (negative when they overlap).
    pub fn gap(&self, other: &Arc) -> f64 {
        circle_norm(self.center - other.center) - self.radius - other.radius
    }
}

/// `J = [-eps, eps]` and `I_k = [rho2 + k phi - eps, rho2 + k phi + eps]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalDecomposition {
    pub n: usize,
    pub eps: f64,
    /// Largest admissible half-width; `eps` is half of it.
    pub eps_max: f64,
    pub j: Arc,
    pub i: Vec<Arc>,
}

impl IntervalDecomposition {
    /// `J` followed by `I_0 ..= I_n`.
    pub fn arcs(&self) -> Vec<Arc> {
        std::iter::once(self.j).chain(self.i.iter().copied()).collect()
    }

    pub fn total_length(&self) -> f64 {
        self.arcs().iter().map(|a| 2.0 * a.radius).sum()
    }

    pub fn pairwise_disjoint(&self) -> bool {
        let arcs = self.arcs();
        arcs.iter()
            .enumerate()
            .all(|(a, x)| arcs[a + 1..].iter().all(|y| x.gap(y) > 0.0))
    }

    /// Arcs one above another as CSV: `name,start,end`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("arc,center,start,end\n");
        let mut row = |name: String, a: &Arc| {
            s.push_str(&format!(
                "{name},{:.15},{:.15},{:.15}\n",
                a.center,
                a.start(),
                a.end()
            ));
        };
        row("J".into(), &self.j);
        for (k, a) in self.i.iter().enumerate() {
            row(format!("I{k}"), a);
        }
        s
    }
}

/// Builds the arcs for `rho1 = rho2 + n phi (mod 1)`, `n >= 0`.
///
/// The half-width is half the largest admissible one, which is half the
/// minimal circular spacing of `{0} U {rho2 + k phi : k = 0..=n}`.
pub fn decomposition(rho1: f64, rho2: f64, phi: f64, n: i64) -> Result<IntervalDecomposition> {
    if n < 0 {
        return Err(Error::InvalidArgument(format!(
            "witness must be non-negative (swap the fields), got {n}"
        )));
    }
    if circle_norm(rho1 - (rho2 + n as f64 * phi)) > 1e-12 {
        return Err(Error::PreconditionViolated(format!(
            "rho1 = {rho1} is not rho2 + {n} phi mod 1"
        )));
    }
    let n = n as usize;
    let points: Vec<f64> = std::iter::once(0.0)
        .chain((0..=n).map(|k| unit(rho2 + k as f64 * phi)))
        .collect();
    let mut min_spacing = f64::INFINITY;
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            min_spacing = min_spacing.min(circle_norm(points[a] - points[b]));
        }
    }
    if min_spacing < MIN_SPACING {
        return Err(Error::DegenerateSpacing { min_spacing });
    }
    let eps_max = 0.5 * min_spacing;
    let eps = 0.5 * eps_max;
    let dec = IntervalDecomposition {
        n,
        eps,
        eps_max,
        j: Arc {
            center: 0.0,
            radius: eps,
        },
        i: points[1..]
            .iter()
            .map(|&c| Arc { center: c, radius: eps })
            .collect(),
    };
    debug_assert!(dec.pairwise_disjoint());
    Ok(dec)
}

/// Value of the boundary map at a point of `M_0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Footprint {
    /// The map is the identity here.
    Identity(f64),
    /// Inside this arc only the end points are pinned.
    Free(Arc),
}

/// Restriction to `M_0` of the equivalence built from a decomposition:
/// identity off `J, I_1, ..., I_{n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryConjugacy {
    pub free_arcs: Vec<Arc>,
}

impl BoundaryConjugacy {
    pub fn map(&self, x: f64) -> Footprint {
        let x = unit(x);
        match self.free_arcs.iter().find(|a| a.interior_contains(x)) {
            Some(a) => Footprint::Free(*a),
            None => Footprint::Identity(x),
        }
    }
}

pub fn boundary_conjugacy(dec: &IntervalDecomposition) -> BoundaryConjugacy {
    let mut free_arcs = vec![dec.j];
    if dec.n >= 2 {
        free_arcs.extend_from_slice(&dec.i[1..dec.n]);
    }
    BoundaryConjugacy { free_arcs }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> f64 {
        (5f64.sqrt() - 1.0) / 2.0
    }

    #[test]
    fn build_rejects_bad_parameters() {
        assert!(build(1.0, 0.3).is_err());
        assert!(build(-0.1, 0.3).is_err());
        assert!(build(0.1, 0.0).is_err());
        assert!(build(0.1, 1.0).is_err());
    }

    #[test]
    fn gamma2_hits_to_depth_three() {
        let phi = golden();
        let f = build(0.3, phi).unwrap();
        let hits = f.gamma2_hits(3);
        let expected: Vec<f64> = (0..4).map(|n| (0.3 - n as f64 * phi).rem_euclid(1.0)).collect();
        for (h, e) in hits.iter().zip(&expected) {
            assert!(circle_norm(h - e) < 1e-15);
        }
        assert_eq!(hits.len(), 4);
    }

    #[test]
    fn return_map_is_rotation() {
        let phi = golden();
        let f = build(0.3, phi).unwrap();
        let y = f.return_map(0.11).unwrap();
        assert!(circle_norm(y - (0.11 + phi)) < 1e-15);
        assert_eq!(f.return_map(0.0), None);
        assert_eq!(f.return_map(0.3), None);
    }

    #[test]
    fn zero_rho_connects_separatrices() {
        let f = build(0.0, golden()).unwrap();
        assert!(f.connections(10).contains(&Connection::Gamma1ToGamma2 { crossings: 0 }));
        // Gamma1 leaves the lower strip exactly where gamma2 enters the upper one.
        assert_eq!(f.lower.exit, f.upper.singular);
    }

    #[test]
    fn generic_rho_has_no_connection() {
        let f = build(0.2, golden()).unwrap();
        assert!(f.connections(100).is_empty());
    }

    #[test]
    fn negative_orbit_rho_connects_the_other_pair() {
        let phi = golden();
        let f = build((-2.0 * phi).rem_euclid(1.0), phi).unwrap();
        assert!(f
            .connections(10)
            .contains(&Connection::Gamma2ToGamma1 { crossings: 1 }));
    }

    #[test]
    fn decomposition_small_cases() {
        let phi = golden();
        let d = decomposition(0.45, 0.45, phi, 0).unwrap();
        assert_eq!(d.arcs().len(), 2);
        assert!(d.pairwise_disjoint());
        assert!(matches!(
            decomposition(0.45, 0.45, phi, -1),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            decomposition(0.5, 0.45, phi, 0),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn decomposition_on_zero_orbit_collides() {
        let phi = golden();
        // rho2 + phi = 0 (mod 1), so I_1 lands on J.
        let rho2 = 1.0 - phi;
        let rho1 = (rho2 + phi).rem_euclid(1.0);
        assert!(matches!(
            decomposition(rho1, rho2, phi, 1),
            Err(Error::DegenerateSpacing { .. })
        ));
    }

    #[test]
    fn boundary_map_identity_outside() {
        let phi = golden();
        let rho2 = 0.2;
        let rho1 = (rho2 + 3.0 * phi).rem_euclid(1.0);
        let d = decomposition(rho1, rho2, phi, 3).unwrap();
        let h = boundary_conjugacy(&d);
        assert_eq!(h.free_arcs.len(), 3);
        assert!(matches!(h.map(0.0), Footprint::Free(_)));
        for a in &h.free_arcs {
            assert_eq!(h.map(a.start()), Footprint::Identity(a.start()));
            assert_eq!(h.map(a.end()), Footprint::Identity(a.end()));
        }
        // I_0 and I_n are not free.
        assert_eq!(h.map(d.i[0].center), Footprint::Identity(d.i[0].center));
        assert_eq!(h.map(d.i[3].center), Footprint::Identity(d.i[3].center));
    }
}
