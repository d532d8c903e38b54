//! Torus geometry and the analytic Hamiltonian family
//!
//! ```text
//! u(x, y) = x - phi*y + (cos y - 1) * (b sin(x - y) + c sin x + d cos y)
//! ```
//!
//! with the Hamiltonian vector field `v = (du/dy, -du/dx)` on `(R / 2piZ)^2`.
//! `u` itself is multivalued on the torus (`u(x + 2pi, y) = u + 2pi`,
//! `u(x, y + 2pi) = u - 2pi*phi`), so every function here takes a point of the
//! lift `R^2` and the caller picks the lift.

use std::f64::consts::TAU;
use std::ops::{Add, Mul, Neg, Sub};

/// Period of both torus coordinates.
pub const PERIOD: f64 = TAU;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        Vec2::new(self.x / n, self.y / n)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self * rhs.x, self * rhs.y)
    }
}

/// Row-major 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    /// Matrix with the given columns.
    pub fn from_columns(c0: Vec2, c1: Vec2) -> Self {
        Self::new(c0.x, c1.x, c0.y, c1.y)
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        Vec2::new(self.a * v.x + self.b * v.y, self.c * v.x + self.d * v.y)
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some(Mat2::new(self.d / det, -self.b / det, -self.c / det, self.a / det))
    }

    /// Solves `self * z = rhs`.
    pub fn solve(&self, rhs: Vec2) -> Option<Vec2> {
        self.inverse().map(|inv| inv.apply(rhs))
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        [
            self.a - other.a,
            self.b - other.b,
            self.c - other.c,
            self.d - other.d,
        ]
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// A point on the torus, both coordinates in `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPoint {
    x: f64,
    y: f64,
}

impl TorusPoint {
    pub fn new(x: f64, y: f64) -> Self {
        wrap(Vec2::new(x, y))
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn as_vec(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    /// Distance in the flat torus metric.
    pub fn distance(&self, other: &TorusPoint) -> f64 {
        torus_distance(self.as_vec(), other.as_vec(), PERIOD)
    }
}

/// Reduces `v` into `[0, period)`; values that round up to `period` map to 0.
pub fn wrap_scalar(v: f64, period: f64) -> f64 {
    let r = v.rem_euclid(period);
    if r >= period {
        0.0
    } else {
        r
    }
}

/// Signed representative of `v` in `[-period/2, period/2)`.
pub fn centered(v: f64, period: f64) -> f64 {
    wrap_scalar(v + 0.5 * period, period) - 0.5 * period
}

pub fn wrap(point: Vec2) -> TorusPoint {
    debug_assert!(point.is_finite(), "wrap needs finite coordinates");
    TorusPoint {
        x: wrap_scalar(point.x, PERIOD),
        y: wrap_scalar(point.y, PERIOD),
    }
}

/// Flat distance between `a` and the nearest lattice translate of `b`.
pub fn torus_distance(a: Vec2, b: Vec2, period: f64) -> f64 {
    centered(a.x - b.x, period).hypot(centered(a.y - b.y, period))
}

/// The four coefficients of the family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldParams {
    pub phi: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

/// Second derivatives of `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hessian {
    pub uxx: f64,
    pub uxy: f64,
    pub uyy: f64,
}

impl Hessian {
    pub fn det(&self) -> f64 {
        self.uxx * self.uyy - self.uxy * self.uxy
    }
}

// Shared trigonometric pieces of u and its derivatives at one point.
struct Terms {
    cos_y: f64,
    sin_y: f64,
    sin_xy: f64,
    cos_xy: f64,
    sin_x: f64,
    cos_x: f64,
    /// cos y - 1
    k: f64,
    /// b sin(x - y) + c sin x + d cos y
    s: f64,
}

impl FieldParams {
    pub const fn new(phi: f64, b: f64, c: f64, d: f64) -> Self {
        Self { phi, b, c, d }
    }

    /// The parameters used for the portrait of the connection case, `(1/3, 2, 1, 1.0016)`.
    pub fn reference() -> Self {
        Self::new(1.0 / 3.0, 2.0, 1.0, 1.0016)
    }

    pub fn with_d(self, d: f64) -> Self {
        Self { d, ..self }
    }

    pub fn with_c(self, c: f64) -> Self {
        Self { c, ..self }
    }

    fn terms(&self, q: Vec2) -> Terms {
        let (sin_y, cos_y) = q.y.sin_cos();
        let (sin_x, cos_x) = q.x.sin_cos();
        let (sin_xy, cos_xy) = (q.x - q.y).sin_cos();
        let k = cos_y - 1.0;
        // cos y - 1 loses all relative precision near y = 0; -2 sin^2(y/2) does not.
        let k = if k.abs() < 0.5 {
            let h = (0.5 * q.y).sin();
            -2.0 * h * h
        } else {
            k
        };
        let s = self.b * sin_xy + self.c * sin_x + self.d * cos_y;
        Terms {
            cos_y,
            sin_y,
            sin_xy,
            cos_xy,
            sin_x,
            cos_x,
            k,
            s,
        }
    }

    /// `u` on the lift.
    pub fn hamiltonian(&self, q: Vec2) -> f64 {
        let t = self.terms(q);
        q.x - self.phi * q.y + t.k * t.s
    }

    /// `(du/dx, du/dy)`.
    pub fn grad_u(&self, q: Vec2) -> Vec2 {
        let t = self.terms(q);
        let sx = self.b * t.cos_xy + self.c * t.cos_x;
        let sy = -self.b * t.cos_xy - self.d * t.sin_y;
        Vec2::new(1.0 + t.k * sx, -self.phi - t.sin_y * t.s + t.k * sy)
    }

    pub fn hessian_u(&self, q: Vec2) -> Hessian {
        let t = self.terms(q);
        let sx = self.b * t.cos_xy + self.c * t.cos_x;
        let sy = -self.b * t.cos_xy - self.d * t.sin_y;
        let sxx = -self.b * t.sin_xy - self.c * t.sin_x;
        let sxy = self.b * t.sin_xy;
        let syy = -self.b * t.sin_xy - self.d * t.cos_y;
        Hessian {
            uxx: t.k * sxx,
            uxy: -t.sin_y * sx + t.k * sxy,
            uyy: -t.cos_y * t.s - 2.0 * t.sin_y * sy + t.k * syy,
        }
    }

    /// `v = (du/dy, -du/dx)`.
    pub fn field_at(&self, q: Vec2) -> Vec2 {
        let g = self.grad_u(q);
        Vec2::new(g.y, -g.x)
    }

    /// Jacobian of [`field_at`](Self::field_at); trace-free.
    pub fn jacobian(&self, q: Vec2) -> Mat2 {
        let h = self.hessian_u(q);
        Mat2::new(h.uxy, h.uyy, -h.uxx, -h.uxy)
    }

    /// `du/dd = (cos y - 1) cos y`, the sensitivity of `u` to the coefficient `d`.
    pub fn du_dd(&self, q: Vec2) -> f64 {
        let t = self.terms(q);
        t.k * t.cos_y
    }
}

/// A smooth planar vector field, possibly periodic.
///
/// Implemented by the torus family and by the model saddles and constant
/// fields used elsewhere in the crate, so the integrator and the classifier
/// can run on any of them.
pub trait PlanarField {
    fn velocity(&self, q: Vec2) -> Vec2;

    fn jacobian(&self, q: Vec2) -> Mat2;

    /// First integral on the lift, when the field has one.
    fn level(&self, _q: Vec2) -> Option<f64> {
        None
    }

    /// Common period of both coordinates, `None` on the plane.
    fn period(&self) -> Option<f64> {
        None
    }
}

impl PlanarField for FieldParams {
    fn velocity(&self, q: Vec2) -> Vec2 {
        self.field_at(q)
    }

    fn jacobian(&self, q: Vec2) -> Mat2 {
        FieldParams::jacobian(self, q)
    }

    fn level(&self, q: Vec2) -> Option<f64> {
        Some(self.hamiltonian(q))
    }

    fn period(&self) -> Option<f64> {
        Some(PERIOD)
    }
}

/// Linear field `q' = A q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearField(pub Mat2);

impl LinearField {
    /// Saddle with the stable eigenvalue along `y` and the unstable one along `x`.
    pub fn saddle(stable: f64, unstable: f64) -> Self {
        LinearField(Mat2::new(unstable, 0.0, 0.0, stable))
    }
}

impl PlanarField for LinearField {
    fn velocity(&self, q: Vec2) -> Vec2 {
        self.0.apply(q)
    }

    fn jacobian(&self, _q: Vec2) -> Mat2 {
        self.0
    }
}

/// Constant field on a torus of the given period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantField {
    pub v: Vec2,
    pub period: f64,
}

impl PlanarField for ConstantField {
    fn velocity(&self, _q: Vec2) -> Vec2 {
        self.v
    }

    fn jacobian(&self, _q: Vec2) -> Mat2 {
        Mat2::new(0.0, 0.0, 0.0, 0.0)
    }

    fn level(&self, q: Vec2) -> Option<f64> {
        Some(self.v.y * q.x - self.v.x * q.y)
    }

    fn period(&self) -> Option<f64> {
        Some(self.period)
    }
}
