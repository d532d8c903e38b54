//! Zeros of the field: mesh-seeded damped Newton, classification, saddle ordering.

use crate::error::{Error, Result};
use crate::field::{torus_distance, wrap_scalar, FieldParams, Mat2, PlanarField, Vec2, PERIOD};

/// Determinants below this are treated as non-hyperbolic.
pub const DEGENERACY_THRESHOLD: f64 = 1e-6;

const MAX_NEWTON_ITERS: usize = 100;
const MAX_HALVINGS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Saddle,
    Minimum,
    Maximum,
}

impl Kind {
    /// Poincare index of a nondegenerate zero of this kind.
    pub fn index(self) -> i32 {
        match self {
            Kind::Saddle => -1,
            Kind::Minimum | Kind::Maximum => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::Saddle => "saddle",
            Kind::Minimum => "minimum",
            Kind::Maximum => "maximum",
        }
    }
}

/// Eigenvalues of the linearisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spectrum {
    /// `stable <= unstable`.
    Real { stable: f64, unstable: f64 },
    /// `re +- i*im`, `im > 0`.
    Complex { re: f64, im: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Singularity {
    /// Canonical representative (wrapped into `[0, 2pi)^2` for periodic fields).
    pub point: Vec2,
    pub kind: Kind,
    pub spectrum: Spectrum,
    pub jacobian: Mat2,
    pub det_j: f64,
    /// First integral at `point`, if the field has one.
    pub u_value: Option<f64>,
}

impl Singularity {
    /// `(lambda_1, lambda_2)` with `lambda_1 < 0 < lambda_2` for saddles.
    pub fn saddle_eigenvalues(&self) -> Option<(f64, f64)> {
        match (self.kind, self.spectrum) {
            (Kind::Saddle, Spectrum::Real { stable, unstable }) => Some((stable, unstable)),
            _ => None,
        }
    }

    /// Unit eigenvector of the stable eigenvalue, oriented to the right.
    pub fn stable_direction(&self) -> Option<Vec2> {
        let (s, _) = self.saddle_eigenvalues()?;
        Some(eigenvector(&self.jacobian, s))
    }

    /// Unit eigenvector of the unstable eigenvalue, oriented to the right.
    pub fn unstable_direction(&self) -> Option<Vec2> {
        let (_, u) = self.saddle_eigenvalues()?;
        Some(eigenvector(&self.jacobian, u))
    }

    pub fn level(&self) -> f64 {
        self.u_value.unwrap_or(f64::NAN)
    }
}

/// Unit null vector of `J - lambda I`, with positive x component
/// (positive y when x vanishes).
pub fn eigenvector(j: &Mat2, lambda: f64) -> Vec2 {
    let e1 = Vec2::new(j.b, lambda - j.a);
    let e2 = Vec2::new(lambda - j.d, j.c);
    let e = if e1.norm() >= e2.norm() { e1 } else { e2 };
    let e = if e.norm() == 0.0 {
        // J = lambda I: any direction works.
        Vec2::new(1.0, 0.0)
    } else {
        e.normalized()
    };
    if e.x < -1e-14 || (e.x.abs() <= 1e-14 && e.y < 0.0) {
        -e
    } else {
        e
    }
}

/// Classifies a zero of `field`.
///
/// Centres are told apart by the Hessian of the first integral recovered
/// from `J = [[u_xy, u_yy], [-u_xx, -u_xy]]`, so a zero with `det J > 0` is
/// only accepted when `J` is trace-free.
pub fn classify<F: PlanarField + ?Sized>(field: &F, q: Vec2) -> Result<Singularity> {
    let residual = field.velocity(q).norm();
    if residual > 1e-6 {
        return Err(Error::PreconditionViolated(format!(
            "classify called at a non-zero (|v| = {residual:.3e})"
        )));
    }
    let point = match field.period() {
        Some(p) => Vec2::new(wrap_scalar(q.x, p), wrap_scalar(q.y, p)),
        None => q,
    };
    let j = field.jacobian(point);
    let det = j.det();
    if det.abs() < DEGENERACY_THRESHOLD {
        return Err(Error::DegenerateZero { at: point, det });
    }
    let tr = j.trace();
    let disc = tr * tr - 4.0 * det;
    let (kind, spectrum) = if det < 0.0 {
        let r = disc.sqrt();
        (
            Kind::Saddle,
            Spectrum::Real {
                stable: 0.5 * (tr - r),
                unstable: 0.5 * (tr + r),
            },
        )
    } else {
        let scale = j.a.abs() + j.b.abs() + j.c.abs() + j.d.abs();
        if tr.abs() > 1e-9 * scale.max(1.0) {
            return Err(Error::PreconditionViolated(
                "zero with det J > 0 of a field without a first integral".into(),
            ));
        }
        let uxx = -j.c;
        let kind = if uxx > 0.0 { Kind::Minimum } else { Kind::Maximum };
        (
            kind,
            Spectrum::Complex {
                re: 0.5 * tr,
                im: 0.5 * (-disc).max(0.0).sqrt(),
            },
        )
    };
    Ok(Singularity {
        point,
        kind,
        spectrum,
        jacobian: j,
        det_j: det,
        u_value: field.level(point),
    })
}

// Far-out lifts lose digits in the trigonometric terms.
fn to_domain(q: Vec2) -> Vec2 {
    Vec2::new(wrap_scalar(q.x, PERIOD), wrap_scalar(q.y, PERIOD))
}

/// Outcome of one damped Newton run.
fn newton(p: &FieldParams, seed: Vec2, tol: f64) -> Option<Vec2> {
    let mut q = seed;
    let mut r = p.field_at(q).norm();
    for _ in 0..MAX_NEWTON_ITERS {
        if r < tol {
            // a few extra steps to land on the root to rounding
            for _ in 0..3 {
                let Some(step) = p.jacobian(q).solve(p.field_at(q)) else { break };
                let trial = to_domain(q - step);
                let rt = p.field_at(trial).norm();
                if rt < r {
                    q = trial;
                    r = rt;
                } else {
                    break;
                }
            }
            return Some(q);
        }
        let step = p.jacobian(q).solve(p.field_at(q))?;
        if !step.is_finite() {
            return None;
        }
        let mut alpha = 1.0;
        let mut improved = false;
        for _ in 0..=MAX_HALVINGS {
            let trial = to_domain(q - alpha * step);
            let rt = p.field_at(trial).norm();
            if rt < r {
                q = trial;
                r = rt;
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !improved {
            return None;
        }
    }
    None
}

/// All zeros of the field in one fundamental domain.
///
/// Newton is seeded from the centres of a `mesh_n x mesh_n` grid; roots are
/// merged when they lie within `10 tol` of each other on the torus. Returns
/// [`Error::NonConvergence`] when a seed sitting at a local minimum of `|v|`
/// below `sqrt(tol)` fails and no root was found near it.
pub fn find_zeros(p: &FieldParams, mesh_n: usize, tol: f64) -> Result<Vec<Singularity>> {
    if mesh_n < 16 {
        return Err(Error::InvalidArgument(format!("mesh_n must be >= 16, got {mesh_n}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let h = PERIOD / mesh_n as f64;
    let seed = |i: usize, j: usize| Vec2::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);

    let mut residual = vec![0.0; mesh_n * mesh_n];
    let mut converged: Vec<Option<Vec2>> = Vec::with_capacity(mesh_n * mesh_n);
    for i in 0..mesh_n {
        for j in 0..mesh_n {
            let s = seed(i, j);
            residual[i * mesh_n + j] = p.field_at(s).norm();
            converged.push(newton(p, s, tol));
        }
    }

    let dedup_radius = 10.0 * tol;
    let mut roots: Vec<Vec2> = Vec::new();
    for q in converged.iter().flatten() {
        let q = Vec2::new(wrap_scalar(q.x, PERIOD), wrap_scalar(q.y, PERIOD));
        if !roots.iter().any(|r| torus_distance(*r, q, PERIOD) <= dedup_radius) {
            roots.push(q);
        }
    }

    let threshold = tol.sqrt();
    for i in 0..mesh_n {
        for j in 0..mesh_n {
            let idx = i * mesh_n + j;
            let r = residual[idx];
            if r >= threshold || converged[idx].is_some() {
                continue;
            }
            let is_local_min = (-1i64..=1).all(|di| {
                (-1i64..=1).all(|dj| {
                    let ni = (i as i64 + di).rem_euclid(mesh_n as i64) as usize;
                    let nj = (j as i64 + dj).rem_euclid(mesh_n as i64) as usize;
                    residual[ni * mesh_n + nj] >= r
                })
            });
            let s = seed(i, j);
            let covered = roots.iter().any(|q| torus_distance(*q, s, PERIOD) <= 1.5 * h);
            if is_local_min && !covered {
                return Err(Error::NonConvergence { at: s, residual: r });
            }
        }
    }

    let mut zeros = roots
        .into_iter()
        .map(|q| classify(p, q))
        .collect::<Result<Vec<_>>>()?;
    zeros.sort_by(|a, b| {
        a.point
            .x
            .total_cmp(&b.point.x)
            .then(a.point.y.total_cmp(&b.point.y))
    });
    Ok(zeros)
}

/// Number of saddles, minima and maxima.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Census {
    pub saddles: usize,
    pub minima: usize,
    pub maxima: usize,
}

impl Census {
    pub fn of(zeros: &[Singularity]) -> Self {
        zeros.iter().fold(Census::default(), |mut c, z| {
            match z.kind {
                Kind::Saddle => c.saddles += 1,
                Kind::Minimum => c.minima += 1,
                Kind::Maximum => c.maxima += 1,
            }
            c
        })
    }

    pub fn index_sum(&self) -> i32 {
        self.minima as i32 + self.maxima as i32 - self.saddles as i32
    }
}

/// The three saddles, left to right in x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleTriple {
    pub s1: Singularity,
    pub s2: Singularity,
    pub s3: Singularity,
}

impl SaddleTriple {
    pub fn as_array(&self) -> [Singularity; 3] {
        [self.s1, self.s2, self.s3]
    }
}

pub fn order_saddles(zeros: &[Singularity]) -> Result<SaddleTriple> {
    let mut saddles: Vec<Singularity> = zeros
        .iter()
        .filter(|z| z.kind == Kind::Saddle)
        .copied()
        .collect();
    if saddles.len() != 3 {
        return Err(Error::WrongSaddleCount { found: saddles.len() });
    }
    saddles.sort_by(|a, b| a.point.x.total_cmp(&b.point.x));
    Ok(SaddleTriple {
        s1: saddles[0],
        s2: saddles[1],
        s3: saddles[2],
    })
}

/// `|lambda_1| / |lambda_2|`.
pub fn characteristic_number(s: &Singularity) -> Result<f64> {
    let (stable, unstable) = s.saddle_eigenvalues().ok_or(Error::KindMismatch)?;
    Ok(stable.abs() / unstable.abs())
}
