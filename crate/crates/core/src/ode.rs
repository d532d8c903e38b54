//! Dormand-Prince 5(4) stepper with the classical continuous extension
//! (Hairer, Norsett & Wanner, `dopri5`), plus a bracketing root finder on
//! the dense output used for event location.

use crate::error::{Error, Result};
use crate::field::{PlanarField, Vec2};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    /// Accepted plus rejected steps before giving up.
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-13,
            h_init: 1e-3,
            h_max: 0.25,
            max_steps: 500_000,
        }
    }
}

/// One accepted step with its interpolant.
#[derive(Debug, Clone, Copy)]
pub struct DenseStep {
    pub t0: f64,
    pub h: f64,
    r: [Vec2; 5],
}

impl DenseStep {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn start(&self) -> Vec2 {
        self.r[0]
    }

    pub fn end(&self) -> Vec2 {
        self.r[0] + self.r[1]
    }

    /// Fourth-order continuous extension, exact at both ends.
    pub fn eval(&self, t: f64) -> Vec2 {
        let s = ((t - self.t0) / self.h).clamp(0.0, 1.0);
        let s1 = 1.0 - s;
        let [r0, r1, r2, r3, r4] = self.r;
        r0 + s * (r1 + s1 * (r2 + s * (r3 + s1 * r4)))
    }
}

/// Adaptive integrator of `dq/dt = direction * v(q)`.
pub struct Stepper<'a, F: PlanarField + ?Sized> {
    field: &'a F,
    direction: f64,
    opts: IntegratorOptions,
    t: f64,
    q: Vec2,
    k1: Vec2,
    h: f64,
    steps: usize,
}

impl<'a, F: PlanarField + ?Sized> Stepper<'a, F> {
    pub fn new(field: &'a F, start: Vec2, direction: f64, opts: IntegratorOptions) -> Self {
        let direction = if direction < 0.0 { -1.0 } else { 1.0 };
        let k1 = direction * field.velocity(start);
        Self {
            field,
            direction,
            opts,
            t: 0.0,
            q: start,
            k1,
            h: opts.h_init.min(opts.h_max),
            steps: 0,
        }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn position(&self) -> Vec2 {
        self.q
    }

    pub fn speed(&self) -> f64 {
        self.k1.norm()
    }

    fn f(&self, q: Vec2) -> Vec2 {
        self.direction * self.field.velocity(q)
    }

    /// Takes one accepted step, no longer than `h_cap`.
    pub fn step(&mut self, h_cap: f64) -> Result<DenseStep> {
        loop {
            if self.steps >= self.opts.max_steps {
                return Err(Error::StepBudgetExhausted {
                    steps: self.opts.max_steps,
                });
            }
            self.steps += 1;
            let h = self.h.min(h_cap).min(self.opts.h_max);
            let y = self.q;
            let k1 = self.k1;
            let k2 = self.f(y + (h * A21) * k1);
            let k3 = self.f(y + h * (A31 * k1 + A32 * k2));
            let k4 = self.f(y + h * (A41 * k1 + A42 * k2 + A43 * k3));
            let k5 = self.f(y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
            let k6 = self.f(y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
            let y1 = y + h * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6);
            let k7 = self.f(y1);
            let err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);

            let sx = self.opts.atol + self.opts.rtol * y.x.abs().max(y1.x.abs());
            let sy = self.opts.atol + self.opts.rtol * y.y.abs().max(y1.y.abs());
            let en = (0.5 * ((err.x / sx).powi(2) + (err.y / sy).powi(2))).sqrt();
            if !en.is_finite() || !y1.is_finite() {
                self.h = 0.1 * h;
                continue;
            }
            let factor = if en == 0.0 {
                5.0
            } else {
                (0.9 * en.powf(-0.2)).clamp(0.2, 5.0)
            };
            if en <= 1.0 {
                let ydiff = y1 - y;
                let bspl = h * k1 - ydiff;
                let dense = DenseStep {
                    t0: self.t,
                    h,
                    r: [
                        y,
                        ydiff,
                        bspl,
                        ydiff - h * k7 - bspl,
                        h * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7),
                    ],
                };
                self.t += h;
                self.q = y1;
                self.k1 = k7;
                self.h = h * factor;
                return Ok(dense);
            }
            self.h = h * factor.min(1.0);
            if self.h < 1e-14 * (1.0 + self.t.abs()) {
                return Err(Error::StepBudgetExhausted { steps: self.steps });
            }
        }
    }
}

/// Root of `g` in `[a, b]` given `g(a)` and `g(b)` of opposite signs, to
/// within `t_tol` (Illinois variant of regula falsi).
pub fn locate_root<G: Fn(f64) -> f64>(g: G, mut a: f64, mut b: f64, t_tol: f64) -> f64 {
    let mut ga = g(a);
    let mut gb = g(b);
    if ga == 0.0 {
        return a;
    }
    if gb == 0.0 {
        return b;
    }
    debug_assert!(ga.signum() != gb.signum(), "root not bracketed");
    let mut side = 0i8;
    for _ in 0..200 {
        if (b - a).abs() <= t_tol {
            break;
        }
        let mut c = (a * gb - b * ga) / (gb - ga);
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let gc = g(c);
        if gc == 0.0 {
            return c;
        }
        if gc.signum() == gb.signum() {
            b = c;
            gb = gc;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            ga = gc;
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        }
    }
    if ga.abs() < gb.abs() {
        a
    } else {
        b
    }
}
