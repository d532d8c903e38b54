//! Rotation numbers of circle maps, continued fractions, and the
//! bounded-horizon test for `x ~ y  <=>  y = x + n*phi (mod 1)`.

use crate::error::{Error, Result};
use crate::field::{centered, PERIOD};
use crate::flow::TorusFlow;

/// Lift `F: R -> R` of a degree-one circle map on `R / Z`.
pub trait CircleLift {
    fn lift(&self, x: f64) -> Result<f64>;
}

/// `x -> x + alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidRotation(pub f64);

impl CircleLift for RigidRotation {
    fn lift(&self, x: f64) -> Result<f64> {
        Ok(x + self.0)
    }
}

/// Lift given by a closure.
pub struct FnLift<F>(pub F);

impl<F: Fn(f64) -> f64> CircleLift for FnLift<F> {
    fn lift(&self, x: f64) -> Result<f64> {
        Ok((self.0)(x))
    }
}

/// Lift tabulated at points of `[0, 1)`; `F(x) - x` is interpolated
/// linearly and extended periodically.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledLift {
    xs: Vec<f64>,
    displacement: Vec<f64>,
}

impl SampledLift {
    /// `xs` strictly increasing in `[0, 1)`, `fs[i] = F(xs[i])`.
    pub fn new(xs: Vec<f64>, fs: Vec<f64>) -> Result<Self> {
        if xs.len() != fs.len() || xs.len() < 2 {
            return Err(Error::InvalidArgument(
                "need at least two samples and matching lengths".into(),
            ));
        }
        for w in xs.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidArgument("sample abscissae must increase".into()));
            }
        }
        if xs[0] < 0.0 || *xs.last().unwrap() >= 1.0 {
            return Err(Error::InvalidArgument("sample abscissae must lie in [0, 1)".into()));
        }
        for (i, w) in fs.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::NotMonotone { at: xs[i + 1] });
            }
        }
        // wrap-around: F(x_last) < F(x_0 + 1) = F(x_0) + 1
        if !(fs[fs.len() - 1] < fs[0] + 1.0) {
            return Err(Error::NotMonotone { at: xs[xs.len() - 1] });
        }
        let displacement = xs.iter().zip(&fs).map(|(x, f)| f - x).collect();
        Ok(Self { xs, displacement })
    }

    fn displacement_at(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let frac = x - x.floor();
        let k = self.xs.partition_point(|&s| s <= frac);
        let (x0, d0, x1, d1) = if k == 0 {
            (self.xs[n - 1] - 1.0, self.displacement[n - 1], self.xs[0], self.displacement[0])
        } else if k == n {
            (self.xs[n - 1], self.displacement[n - 1], self.xs[0] + 1.0, self.displacement[0])
        } else {
            (self.xs[k - 1], self.displacement[k - 1], self.xs[k], self.displacement[k])
        };
        d0 + (d1 - d0) * (frac - x0) / (x1 - x0)
    }
}

impl CircleLift for SampledLift {
    fn lift(&self, x: f64) -> Result<f64> {
        Ok(x + self.displacement_at(x))
    }
}

/// Return map of the meridian of a [`TorusFlow`], rescaled to `R / Z`.
pub struct MeridianReturn<'a>(pub &'a TorusFlow);

impl CircleLift for MeridianReturn<'_> {
    fn lift(&self, x: f64) -> Result<f64> {
        Ok(self.0.poincare_lift(x * PERIOD)? / PERIOD)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationEstimate {
    /// `(F^n(x0) - x0) / n`.
    pub value: f64,
    /// `1 / n`, valid for lifts of circle homeomorphisms.
    pub error_bound: f64,
    /// Convergent `p / q` of `value` with the smallest `q` inside the bound.
    pub convergent: (i64, i64),
    pub iterations: usize,
}

/// Points sampled over one period to check monotonicity and degree one.
pub const MONOTONICITY_SAMPLES: usize = 64;

pub fn check_lift<L: CircleLift + ?Sized>(map: &L, x0: f64, samples: usize) -> Result<()> {
    let f0 = map.lift(x0)?;
    let mut prev = f0;
    for k in 1..=samples {
        let x = x0 + k as f64 / samples as f64;
        let f = map.lift(x)?;
        if !(f > prev) {
            return Err(Error::NotMonotone { at: x });
        }
        prev = f;
    }
    if (prev - f0 - 1.0).abs() > 1e-9 {
        return Err(Error::NotMonotone { at: x0 + 1.0 });
    }
    Ok(())
}

/// Estimates the rotation number from `n_iters` iterates of `x0`.
pub fn rotation_number<L: CircleLift + ?Sized>(map: &L, x0: f64, n_iters: usize) -> Result<RotationEstimate> {
    rotation_number_checked(map, x0, n_iters, MONOTONICITY_SAMPLES)
}

/// As [`rotation_number`], sampling `check_samples` points for the lift check
/// (0 skips it).
pub fn rotation_number_checked<L: CircleLift + ?Sized>(
    map: &L,
    x0: f64,
    n_iters: usize,
    check_samples: usize,
) -> Result<RotationEstimate> {
    if n_iters == 0 {
        return Err(Error::InvalidArgument("n_iters must be at least 1".into()));
    }
    if check_samples > 0 {
        check_lift(map, x0, check_samples)?;
    }
    let mut x = x0;
    for _ in 0..n_iters {
        x = map.lift(x)?;
    }
    let value = (x - x0) / n_iters as f64;
    let bound = 1.0 / n_iters as f64;
    let convergent = convergents(value, 64)
        .into_iter()
        .find(|&(p, q)| (value - p as f64 / q as f64).abs() <= bound)
        .unwrap_or((value.round() as i64, 1));
    Ok(RotationEstimate {
        value,
        error_bound: bound,
        convergent,
        iterations: n_iters,
    })
}

/// Continued-fraction convergents `p_0/q_0, ..., p_depth/q_depth` of
/// `alpha`, stopping early once a convergent reproduces `alpha`.
pub fn convergents(alpha: f64, depth: usize) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    if !alpha.is_finite() {
        return out;
    }
    let (mut p_prev, mut q_prev) = (1i64, 0i64);
    let a0 = alpha.floor();
    let (mut p, mut q) = (a0 as i64, 1i64);
    out.push((p, q));
    let mut r = alpha - a0;
    let exact = |p: i64, q: i64| (alpha - p as f64 / q as f64).abs() <= 4.0 * f64::EPSILON * alpha.abs().max(1.0);
    for _ in 0..depth {
        if r <= 0.0 || exact(p, q) {
            break;
        }
        let inv = 1.0 / r;
        let a = inv.floor();
        if a > 1e12 {
            break;
        }
        r = inv - a;
        let a = a as i64;
        let Some(pn) = a.checked_mul(p).and_then(|v| v.checked_add(p_prev)) else { break };
        let Some(qn) = a.checked_mul(q).and_then(|v| v.checked_add(q_prev)) else { break };
        p_prev = p;
        q_prev = q;
        p = pn;
        q = qn;
        out.push((p, q));
    }
    out
}

/// `|t|` on `R / Z`.
pub fn circle_norm(t: f64) -> f64 {
    centered(t, 1.0).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    /// `rho2 = rho1 + n phi (mod 1)` within tolerance.
    Equivalent(i64),
    /// No `|n| <= N` works; says nothing about larger `n`.
    NotEquivalentUpTo(u64),
    /// Definitely inequivalent (the rotation parameters differ).
    NotEquivalent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivVerdict {
    pub decision: Decision,
    /// Best `||rho2 - rho1 - n phi||` found (or the `phi` mismatch).
    pub residual: f64,
    pub horizon: u64,
    pub eps: f64,
}

impl EquivVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self.decision, Decision::Equivalent(_))
    }

    pub fn witness(&self) -> Option<i64> {
        match self.decision {
            Decision::Equivalent(n) => Some(n),
            _ => None,
        }
    }
}

/// Default horizon and tolerance of the command-line front end.
pub const DEFAULT_HORIZON: u64 = 10_000;
pub const DEFAULT_EPS: f64 = 1e-9;

/// Searches `|n| <= horizon` for the `n` minimising `||rho2 - rho1 - n phi||`.
///
/// Ties go to the smaller `|n|`, then to the positive one.
pub fn e_phi_equiv(rho1: f64, rho2: f64, phi: f64, horizon: u64, eps: f64) -> EquivVerdict {
    let base = rho2 - rho1;
    let n_max = horizon as i64;
    let mut best = (circle_norm(base), 0i64);
    for k in 1..=n_max {
        for n in [k, -k] {
            let r = circle_norm(base - n as f64 * phi);
            if r < best.0 {
                best = (r, n);
            }
        }
    }
    let decision = if best.0 <= eps {
        Decision::Equivalent(best.1)
    } else {
        Decision::NotEquivalentUpTo(horizon)
    };
    EquivVerdict {
        decision,
        residual: best.0,
        horizon,
        eps,
    }
}

/// Whether `rho` is within `eps` of `n phi (mod 1)` for some `|n| <= horizon`.
pub fn orbit_membership(rho: f64, phi: f64, horizon: u64, eps: f64) -> bool {
    e_phi_equiv(rho, 0.0, phi, horizon, eps).is_equivalent()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> f64 {
        (5f64.sqrt() - 1.0) / 2.0
    }

    #[test]
    fn convergents_of_one_third() {
        assert_eq!(convergents(1.0 / 3.0, 10), vec![(0, 1), (1, 3)]);
    }

    #[test]
    fn convergents_of_golden_mean_are_fibonacci() {
        assert_eq!(
            convergents(golden(), 5),
            vec![(0, 1), (1, 1), (1, 2), (2, 3), (3, 5), (5, 8)]
        );
    }

    #[test]
    fn rigid_rotation_estimate() {
        let est = rotation_number(&RigidRotation(1.0 / 3.0), 0.0, 300).unwrap();
        assert!((est.value - 1.0 / 3.0).abs() <= 1.0 / 300.0);
        assert_eq!(est.convergent, (1, 3));
    }

    #[test]
    fn golden_rotation_estimate() {
        let est = rotation_number(&RigidRotation(golden()), 0.0, 10_000).unwrap();
        assert!((est.value - golden()).abs() < 1e-4);
    }

    #[test]
    fn non_monotone_lift_is_rejected() {
        let map = FnLift(|x: f64| x + 0.3 * (std::f64::consts::TAU * x).sin());
        assert!(matches!(rotation_number(&map, 0.0, 10), Err(Error::NotMonotone { .. })));
        let degree_two = FnLift(|x: f64| 2.0 * x);
        assert!(matches!(rotation_number(&degree_two, 0.0, 10), Err(Error::NotMonotone { .. })));
    }

    #[test]
    fn sampled_lift_validation() {
        assert!(matches!(
            SampledLift::new(vec![0.0, 0.5], vec![0.3, 0.2]),
            Err(Error::NotMonotone { .. })
        ));
        assert!(matches!(
            SampledLift::new(vec![0.0, 0.5], vec![0.3, 1.4]),
            Err(Error::NotMonotone { .. })
        ));
        let l = SampledLift::new(vec![0.0, 0.25, 0.5, 0.75], vec![0.1, 0.35, 0.6, 0.85]).unwrap();
        assert!((l.lift(0.9).unwrap() - 1.0).abs() < 1e-15);
        assert!((l.lift(-0.1).unwrap() - 0.0).abs() < 1e-15);
        let est = rotation_number(&l, 0.0, 100).unwrap();
        assert!((est.value - 0.1).abs() < 1e-12);
    }

    #[test]
    fn zero_iterations_rejected() {
        assert!(rotation_number(&RigidRotation(0.1), 0.0, 0).is_err());
    }

    #[test]
    fn equivalence_examples() {
        let phi = golden();
        let v = e_phi_equiv(0.2, 0.2, phi, 0, 1e-12);
        assert_eq!(v.decision, Decision::Equivalent(0));
        let rho2 = (0.2 + 3.0 * phi).rem_euclid(1.0);
        let v = e_phi_equiv(0.2, rho2, phi, 10, 1e-10);
        assert_eq!(v.decision, Decision::Equivalent(3));
        let v = e_phi_equiv(rho2, 0.2, phi, 10, 1e-10);
        assert_eq!(v.decision, Decision::Equivalent(-3));
    }

    #[test]
    fn membership_examples() {
        let phi = golden();
        assert!(orbit_membership(0.0, phi, 1, 1e-12));
        assert!(orbit_membership((5.0 * phi).rem_euclid(1.0), phi, 10, 1e-10));
    }

    #[test]
    fn circle_norm_wraps() {
        assert!((circle_norm(0.9) - 0.1).abs() < 1e-15);
        assert!((circle_norm(-2.25) - 0.25).abs() < 1e-15);
    }
}
