//! Trajectories on the lift of the torus, the first-return map of the
//! meridian `y = 0`, separatrix tracing and level-curve continuation.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::field::{centered, torus_distance, wrap_scalar, FieldParams, PlanarField, Vec2, PERIOD};
use crate::ode::{locate_root, DenseStep, IntegratorOptions, Stepper};
use crate::singularity::{find_zeros, Kind, Singularity};

/// Event times are located to this absolute accuracy.
pub const EVENT_TIME_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Stop when the given coordinate crosses `value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub axis: Axis,
    pub value: f64,
}

/// Stop when the trajectory enters this ball from outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: Vec2,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StopSpec {
    /// Record crossings of `y = k * period`.
    pub meridian_period: Option<f64>,
    /// Stop at this crossing (1 = first); `None` records without stopping.
    pub meridian_stop: Option<usize>,
    pub lines: Vec<Line>,
    pub balls: Vec<Ball>,
    /// Balls repeat with this lattice period.
    pub ball_period: Option<f64>,
    pub t_max: f64,
}

impl StopSpec {
    pub fn until(t_max: f64) -> Self {
        Self {
            meridian_period: None,
            meridian_stop: None,
            lines: Vec::new(),
            balls: Vec::new(),
            ball_period: None,
            t_max,
        }
    }

    pub fn next_meridian(period: f64, t_max: f64) -> Self {
        Self {
            meridian_period: Some(period),
            meridian_stop: Some(1),
            ..Self::until(t_max)
        }
    }

    pub fn with_balls(mut self, balls: Vec<Ball>, period: Option<f64>) -> Self {
        self.balls = balls;
        self.ball_period = period;
        self
    }

    pub fn with_line(mut self, axis: Axis, value: f64) -> Self {
        self.lines.push(Line { axis, value });
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalEvent {
    MeridianCross,
    /// Entered `StopSpec::balls[ball]`.
    SaddleApproach { ball: usize },
    LineCross { line: usize },
    /// `t_max` reached.
    StepLimit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub q: Vec2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Start, every accepted step, and the terminal event point.
    pub samples: Vec<Sample>,
    pub meridian_hits: Vec<Sample>,
    pub terminal: TerminalEvent,
    /// `max |u(q(t)) - u(q(0))|` over the samples, for fields with a first integral.
    pub max_level_drift: Option<f64>,
}

impl Trajectory {
    pub fn start(&self) -> Sample {
        self.samples[0]
    }

    pub fn end(&self) -> Sample {
        *self.samples.last().expect("trajectory has at least one sample")
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "t,x,y")?;
        for s in &self.samples {
            writeln!(out, "{:.12e},{:.12e},{:.12e}", s.t, s.q.x, s.q.y)?;
        }
        Ok(())
    }
}

struct DriftTracker<'a, F: PlanarField + ?Sized> {
    field: &'a F,
    u0: Option<f64>,
    max: f64,
}

impl<'a, F: PlanarField + ?Sized> DriftTracker<'a, F> {
    fn observe(&mut self, q: Vec2) {
        if let (Some(u0), Some(u)) = (self.u0, self.field.level(q)) {
            self.max = self.max.max((u - u0).abs());
        }
    }

    fn result(&self) -> Option<f64> {
        self.u0.map(|_| self.max)
    }
}

#[derive(Debug, Clone, Copy)]
enum EventKind {
    Meridian,
    Line(usize),
    Ball(usize),
}

fn ball_gap(ball: &Ball, q: Vec2, period: Option<f64>) -> f64 {
    let d = match period {
        Some(p) => torus_distance(q, ball.center, p),
        None => (q - ball.center).norm(),
    };
    d - ball.radius
}

fn coordinate(q: Vec2, axis: Axis) -> f64 {
    match axis {
        Axis::X => q.x,
        Axis::Y => q.y,
    }
}

/// Integrates `dq/dt = direction * v(q)` from `start` until the first
/// stopping event of `stop`.
///
/// `start` is a point of the lift; meridian crossings are detected on the
/// lift as `y` passing a multiple of the period, never at `t = 0`.
pub fn integrate<F: PlanarField + ?Sized>(
    field: &F,
    start: Vec2,
    direction: f64,
    stop: &StopSpec,
    opts: IntegratorOptions,
) -> Result<Trajectory> {
    if !start.is_finite() {
        return Err(Error::InvalidArgument("non-finite start point".into()));
    }
    let mut stepper = Stepper::new(field, start, direction, opts);
    let mut samples = vec![Sample { t: 0.0, q: start }];
    let mut hits = Vec::new();
    let mut drift = DriftTracker {
        field,
        u0: field.level(start),
        max: 0.0,
    };
    let mut armed: Vec<bool> = stop
        .balls
        .iter()
        .map(|b| ball_gap(b, start, stop.ball_period) > 0.0)
        .collect();

    loop {
        let t = stepper.time();
        if t >= stop.t_max {
            return Ok(Trajectory {
                samples,
                meridian_hits: hits,
                terminal: TerminalEvent::StepLimit,
                max_level_drift: drift.result(),
            });
        }
        if stepper.speed() < 1e-14 {
            return Err(Error::SingularityEncountered {
                at: stepper.position(),
            });
        }
        let step = stepper.step(stop.t_max - t)?;
        let mut events = step_events(&step, stop, &mut armed);
        events.sort_by(|a, b| a.0.total_cmp(&b.0));

        for (te, kind) in events {
            let q = step.eval(te);
            let terminal = match kind {
                EventKind::Meridian => {
                    hits.push(Sample { t: te, q });
                    match stop.meridian_stop {
                        Some(n) if hits.len() >= n => Some(TerminalEvent::MeridianCross),
                        _ => None,
                    }
                }
                EventKind::Line(i) => Some(TerminalEvent::LineCross { line: i }),
                EventKind::Ball(i) => Some(TerminalEvent::SaddleApproach { ball: i }),
            };
            if let Some(terminal) = terminal {
                drift.observe(q);
                samples.push(Sample { t: te, q });
                return Ok(Trajectory {
                    samples,
                    meridian_hits: hits,
                    terminal,
                    max_level_drift: drift.result(),
                });
            }
        }
        let end = step.end();
        drift.observe(end);
        samples.push(Sample {
            t: step.t1(),
            q: end,
        });
    }
}

fn step_events(step: &DenseStep, stop: &StopSpec, armed: &mut [bool]) -> Vec<(f64, EventKind)> {
    let mut events = Vec::new();
    let (t0, t1) = (step.t0, step.t1());
    let first_step = t0 == 0.0;

    if let Some(period) = stop.meridian_period {
        let ya = step.start().y;
        let yb = step.end().y;
        let levels: Vec<f64> = if yb > ya {
            let k0 = (ya / period).floor() as i64 + 1;
            let k1 = (yb / period).floor() as i64;
            (k0..=k1).map(|k| k as f64 * period).collect()
        } else if yb < ya {
            let k0 = (yb / period).ceil() as i64;
            let k1 = (ya / period).ceil() as i64 - 1;
            (k0..=k1).rev().map(|k| k as f64 * period).collect()
        } else {
            Vec::new()
        };
        for level in levels {
            let te = locate_root(|t| step.eval(t).y - level, t0, t1, EVENT_TIME_TOL);
            events.push((te, EventKind::Meridian));
        }
    }

    const LINE_SAMPLES: usize = 4;
    for (i, line) in stop.lines.iter().enumerate() {
        let g = |t: f64| coordinate(step.eval(t), line.axis) - line.value;
        let mut ta = t0;
        let mut ga = g(t0);
        for k in 1..=LINE_SAMPLES {
            let tb = if k == LINE_SAMPLES {
                t1
            } else {
                t0 + step.h * k as f64 / LINE_SAMPLES as f64
            };
            let gb = g(tb);
            let starts_on_line = first_step && ta == 0.0 && ga == 0.0;
            if !starts_on_line && (ga.signum() != gb.signum() || gb == 0.0) && ga != 0.0 {
                events.push((locate_root(g, ta, tb, EVENT_TIME_TOL), EventKind::Line(i)));
                break;
            }
            ta = tb;
            ga = gb;
        }
    }

    const BALL_SAMPLES: usize = 8;
    for (i, ball) in stop.balls.iter().enumerate() {
        let g = |t: f64| ball_gap(ball, step.eval(t), stop.ball_period);
        let mut ta = t0;
        let mut ga = g(t0);
        for k in 1..=BALL_SAMPLES {
            let tb = t0 + step.h * k as f64 / BALL_SAMPLES as f64;
            let gb = g(tb);
            if armed[i] && ga > 0.0 && gb <= 0.0 {
                events.push((locate_root(g, ta, tb, EVENT_TIME_TOL), EventKind::Ball(i)));
                break;
            }
            if gb > 0.0 {
                armed[i] = true;
            }
            ta = tb;
            ga = gb;
        }
    }
    events
}

/// Knobs shared by the torus-flow operations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    pub integrator: IntegratorOptions,
    /// Radius of the balls around saddles that end a trace.
    pub saddle_radius: f64,
    /// Distance from the saddle along the eigenvector where separatrices start.
    pub launch_offset: f64,
    /// Start points whose level is this close to a saddle level are refused
    /// by the return map.
    pub separatrix_guard: f64,
    pub t_max: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            integrator: IntegratorOptions::default(),
            saddle_radius: 1e-4,
            launch_offset: 1e-7,
            separatrix_guard: 1e-8,
            t_max: 500.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    StableLeft,
    StableRight,
    UnstableLeft,
    UnstableRight,
}

impl Branch {
    pub const ALL: [Branch; 4] = [
        Branch::StableLeft,
        Branch::StableRight,
        Branch::UnstableLeft,
        Branch::UnstableRight,
    ];

    pub fn is_stable(self) -> bool {
        matches!(self, Branch::StableLeft | Branch::StableRight)
    }

    fn sign(self) -> f64 {
        match self {
            Branch::StableLeft | Branch::UnstableLeft => -1.0,
            Branch::StableRight | Branch::UnstableRight => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Branch::StableLeft => "stable-left",
            Branch::StableRight => "stable-right",
            Branch::UnstableLeft => "unstable-left",
            Branch::UnstableRight => "unstable-right",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparatrixTrace {
    pub saddle: Singularity,
    pub branch: Branch,
    pub trajectory: Trajectory,
    /// Wrapped x of every meridian crossing, in order.
    pub meridian_hits: Vec<f64>,
    /// The saddle whose ball ended the trace, if any.
    pub reached: Option<Singularity>,
}

impl SeparatrixTrace {
    /// The branch came back to its own saddle: a separatrix loop.
    pub fn is_loop(&self) -> bool {
        self.reached
            .map(|r| torus_distance(r.point, self.saddle.point, PERIOD) < 1e-9)
            .unwrap_or(false)
    }
}

/// How a continued level curve ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelCurveEnd {
    Closed,
    /// Reached `y = 2pi` on the lift.
    StripTop,
    /// Reached `y = 0` on the lift.
    StripBottom,
    Budget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelCurve {
    pub level: f64,
    pub points: Vec<Vec2>,
    pub end: LevelCurveEnd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcBudget {
    pub max_length: f64,
    pub max_points: usize,
    pub max_step: f64,
}

impl Default for ArcBudget {
    fn default() -> Self {
        Self {
            max_length: 60.0,
            max_points: 100_000,
            max_step: 0.05,
        }
    }
}

/// The analytic family with its zeros computed once.
#[derive(Debug, Clone)]
pub struct TorusFlow {
    pub params: FieldParams,
    pub zeros: Vec<Singularity>,
    pub opts: FlowOptions,
}

impl TorusFlow {
    pub fn new(params: FieldParams, zeros: Vec<Singularity>, opts: FlowOptions) -> Self {
        Self { params, zeros, opts }
    }

    /// Locates the zeros with [`find_zeros`] and default options.
    pub fn compute(params: FieldParams, mesh_n: usize, tol: f64) -> Result<Self> {
        let zeros = find_zeros(&params, mesh_n, tol)?;
        Ok(Self::new(params, zeros, FlowOptions::default()))
    }

    pub fn saddles(&self) -> impl Iterator<Item = &Singularity> {
        self.zeros.iter().filter(|z| z.kind == Kind::Saddle)
    }

    fn saddle_list(&self) -> Vec<Singularity> {
        self.saddles().copied().collect()
    }

    fn saddle_balls(&self) -> Vec<Ball> {
        self.saddles()
            .map(|s| Ball {
                center: s.point,
                radius: self.opts.saddle_radius,
            })
            .collect()
    }

    pub fn integrate(&self, start: Vec2, direction: f64, stop: &StopSpec) -> Result<Trajectory> {
        integrate(&self.params, start, direction, stop, self.opts.integrator)
    }

    /// Direction of time in which orbits cross `y = 0` upwards.
    fn upward(&self) -> f64 {
        if self.params.field_at(Vec2::ZERO).y < 0.0 {
            -1.0
        } else {
            1.0
        }
    }

    /// First return of `(x0, 0)` to the meridian, following the orbit upwards
    /// through the strip `0 < y < 2pi`, as an unwrapped x on the lift.
    pub fn poincare_lift(&self, x0: f64) -> Result<f64> {
        self.return_trajectory(x0, true).map(|t| t.end().q.x)
    }

    /// Like [`poincare_lift`](Self::poincare_lift), wrapped into `[0, 2pi)`.
    pub fn poincare_map(&self, x0: f64) -> Result<f64> {
        self.poincare_lift(x0).map(|x| wrap_scalar(x, PERIOD))
    }

    /// Return map without the separatrix-level screen on `x0`.
    pub fn poincare_map_unchecked(&self, x0: f64) -> Result<f64> {
        self.return_trajectory(x0, false)
            .map(|t| wrap_scalar(t.end().q.x, PERIOD))
    }

    /// The orbit segment behind [`poincare_lift`](Self::poincare_lift).
    pub fn return_trajectory(&self, x0: f64, guard: bool) -> Result<Trajectory> {
        if self.params.phi == 0.0 {
            return Err(Error::PreconditionViolated(
                "phi = 0: the field is not transverse to the meridian".into(),
            ));
        }
        if guard {
            // (x0, 0) has level x0; only the saddle copies in the strip at
            // levels u(s) + 2pi m can lie on its orbit.
            for s in self.saddles() {
                if centered(x0 - s.level(), PERIOD).abs() < self.opts.separatrix_guard {
                    return Err(Error::SeparatrixHit { x0 });
                }
            }
        }
        let stop = StopSpec::next_meridian(PERIOD, self.opts.t_max)
            .with_balls(self.saddle_balls(), Some(PERIOD));
        let traj = self.integrate(Vec2::new(x0, 0.0), self.upward(), &stop)?;
        match traj.terminal {
            TerminalEvent::MeridianCross => Ok(traj),
            TerminalEvent::SaddleApproach { .. } => Err(Error::SeparatrixHit { x0 }),
            _ => Err(Error::StepBudgetExhausted {
                steps: traj.samples.len(),
            }),
        }
    }

    /// Follows one separatrix of `saddle` until `max_meridian_hits` meridian
    /// crossings, a saddle ball (loop or connection), or `t_max`.
    ///
    /// `max_meridian_hits = 0` records crossings without stopping on them.
    pub fn trace_separatrix(
        &self,
        saddle: &Singularity,
        branch: Branch,
        max_meridian_hits: usize,
    ) -> Result<SeparatrixTrace> {
        let dir = if branch.is_stable() {
            saddle.stable_direction()
        } else {
            saddle.unstable_direction()
        }
        .ok_or(Error::KindMismatch)?;
        let launch = saddle.point + (branch.sign() * self.opts.launch_offset) * dir;
        let time_dir = if branch.is_stable() { -1.0 } else { 1.0 };
        let stop = StopSpec {
            meridian_period: Some(PERIOD),
            meridian_stop: (max_meridian_hits > 0).then_some(max_meridian_hits),
            ..StopSpec::until(self.opts.t_max)
        }
        .with_balls(self.saddle_balls(), Some(PERIOD));
        let trajectory = self.integrate(launch, time_dir, &stop)?;
        let reached = match trajectory.terminal {
            TerminalEvent::SaddleApproach { ball } => Some(self.saddle_list()[ball]),
            _ => None,
        };
        let meridian_hits = trajectory
            .meridian_hits
            .iter()
            .map(|h| wrap_scalar(h.q.x, PERIOD))
            .collect();
        Ok(SeparatrixTrace {
            saddle: *saddle,
            branch,
            trajectory,
            meridian_hits,
            reached,
        })
    }

    pub fn trace_level_curve(
        &self,
        level: f64,
        seed: Vec2,
        direction: f64,
        budget: ArcBudget,
    ) -> Result<LevelCurve> {
        trace_level_curve(&self.params, level, seed, direction, budget)
    }
}

const CRITICAL_GRAD: f64 = 1e-8;

fn correct(p: &FieldParams, level: f64, mut q: Vec2) -> Result<(Vec2, usize)> {
    let target = 1e-13 * level.abs().max(1.0);
    for it in 0..12 {
        let r = p.hamiltonian(q) - level;
        if r.abs() <= target {
            return Ok((q, it));
        }
        let g = p.grad_u(q);
        let g2 = g.dot(g);
        if g2.sqrt() < CRITICAL_GRAD {
            return Err(Error::NearCriticalPoint { at: q });
        }
        q = q - (r / g2) * g;
    }
    let r = p.hamiltonian(q) - level;
    if r.abs() <= 1e-11 * level.abs().max(1.0) {
        Ok((q, 12))
    } else {
        Err(Error::NearCriticalPoint { at: q })
    }
}

fn tangent(p: &FieldParams, q: Vec2, direction: f64) -> Result<Vec2> {
    let v = p.field_at(q);
    let n = v.norm();
    if n < CRITICAL_GRAD {
        return Err(Error::NearCriticalPoint { at: q });
    }
    Ok((direction.signum() / n) * v)
}

/// Pseudo-arclength continuation of `{u = level}` from `seed`.
///
/// `direction = +1` follows the field, `-1` runs against it (upwards across
/// the meridian for the analytic family). Points are on the lift; the curve
/// stops when it closes up, leaves the strip `0 <= y <= 2pi` (the exact
/// boundary point is appended, since `u(x, 0) = x` and `u(x, 2pi) = x - 2pi phi`),
/// or exhausts `budget`.
pub fn trace_level_curve(
    p: &FieldParams,
    level: f64,
    seed: Vec2,
    direction: f64,
    budget: ArcBudget,
) -> Result<LevelCurve> {
    if p.grad_u(seed).norm() <= CRITICAL_GRAD {
        return Err(Error::NearCriticalPoint { at: seed });
    }
    let g = p.grad_u(seed);
    let once = seed - ((p.hamiltonian(seed) - level) / g.dot(g)) * g;
    if (p.hamiltonian(once) - level).abs() > 1e-8 {
        return Err(Error::PreconditionViolated(format!(
            "seed is not on the level curve u = {level}"
        )));
    }
    let (start, _) = correct(p, level, once)?;
    let mut points = vec![start];
    let mut q = start;
    let mut h = budget.max_step.min(0.02);
    let mut arc = 0.0;
    let h_min = 1e-9;

    loop {
        if arc >= budget.max_length || points.len() >= budget.max_points {
            return Ok(LevelCurve {
                level,
                points,
                end: LevelCurveEnd::Budget,
            });
        }
        let t0 = tangent(p, q, direction)?;
        let next = loop {
            let predicted = q + h * t0;
            let attempt = correct(p, level, predicted).and_then(|(qn, its)| {
                let t1 = tangent(p, qn, direction)?;
                Ok((qn, its, t1))
            });
            match attempt {
                Ok((qn, its, t1)) => {
                    let dist = (qn - q).norm();
                    let turn = t0.dot(t1).clamp(-1.0, 1.0).acos();
                    if turn < 0.15 && dist > 0.5 * h && dist < 1.5 * h {
                        break (qn, its);
                    }
                }
                Err(Error::NearCriticalPoint { .. }) if h > h_min => {}
                Err(e) => return Err(e),
            }
            h *= 0.5;
            if h < h_min {
                return Err(Error::NearCriticalPoint { at: q });
            }
        };
        let (qn, its) = next;
        arc += (qn - q).norm();

        if qn.y > PERIOD && q.y <= PERIOD {
            points.push(Vec2::new(level + PERIOD * p.phi, PERIOD));
            return Ok(LevelCurve {
                level,
                points,
                end: LevelCurveEnd::StripTop,
            });
        }
        if qn.y < 0.0 && q.y >= 0.0 && points.len() > 1 {
            points.push(Vec2::new(level, 0.0));
            return Ok(LevelCurve {
                level,
                points,
                end: LevelCurveEnd::StripBottom,
            });
        }
        if arc > 4.0 * h && (qn - start).norm() < 1.5 * h && points.len() > 4 {
            points.push(qn);
            points.push(start);
            return Ok(LevelCurve {
                level,
                points,
                end: LevelCurveEnd::Closed,
            });
        }
        points.push(qn);
        q = qn;
        if its <= 3 {
            h = (h * 1.5).min(budget.max_step);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{ConstantField, LinearField};

    #[test]
    fn constant_field_crosses_unit_meridian() {
        let f = ConstantField {
            v: Vec2::new(0.3, 1.0),
            period: 1.0,
        };
        let stop = StopSpec::next_meridian(1.0, 10.0);
        let t = integrate(&f, Vec2::new(0.2, 0.0), 1.0, &stop, IntegratorOptions::default()).unwrap();
        assert_eq!(t.terminal, TerminalEvent::MeridianCross);
        let end = t.end();
        assert!((end.t - 1.0).abs() < 1e-12);
        assert!((end.q.x - 0.5).abs() < 1e-12);
        assert!((end.q.y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn downward_meridian_crossing_skips_the_start() {
        let f = ConstantField {
            v: Vec2::new(0.0, -1.0),
            period: 1.0,
        };
        let stop = StopSpec::next_meridian(1.0, 10.0);
        let t = integrate(&f, Vec2::new(0.0, 0.0), 1.0, &stop, IntegratorOptions::default()).unwrap();
        assert!((t.end().q.y + 1.0).abs() < 1e-12);
    }

    #[test]
    fn line_event_on_linear_saddle() {
        let f = LinearField::saddle(-1.0, 1.0);
        let stop = StopSpec::until(100.0).with_line(Axis::X, 1.0);
        let t = integrate(&f, Vec2::new(0.01, 1.0), 1.0, &stop, IntegratorOptions::default()).unwrap();
        assert_eq!(t.terminal, TerminalEvent::LineCross { line: 0 });
        assert!((t.end().q.x - 1.0).abs() < 1e-12);
        assert!((t.end().t - 100f64.ln()).abs() < 1e-9);
        assert!((t.end().q.y - 0.01).abs() < 1e-10);
    }

    #[test]
    fn ball_entry_is_located() {
        let f = ConstantField {
            v: Vec2::new(1.0, 0.0),
            period: 10.0,
        };
        let stop = StopSpec::until(10.0).with_balls(
            vec![Ball {
                center: Vec2::new(3.0, 0.0),
                radius: 0.5,
            }],
            None,
        );
        let t = integrate(&f, Vec2::ZERO, 1.0, &stop, IntegratorOptions::default()).unwrap();
        assert_eq!(t.terminal, TerminalEvent::SaddleApproach { ball: 0 });
        assert!((t.end().t - 2.5).abs() < 1e-12);
    }

    #[test]
    fn ball_containing_start_needs_exit_first() {
        let f = ConstantField {
            v: Vec2::new(1.0, 0.0),
            period: 10.0,
        };
        let stop = StopSpec::until(3.0).with_balls(
            vec![Ball {
                center: Vec2::ZERO,
                radius: 0.5,
            }],
            None,
        );
        let t = integrate(&f, Vec2::ZERO, 1.0, &stop, IntegratorOptions::default()).unwrap();
        assert_eq!(t.terminal, TerminalEvent::StepLimit);
    }

    #[test]
    fn periodic_ball_catches_lattice_copies() {
        let f = ConstantField {
            v: Vec2::new(1.0, 0.0),
            period: 2.0,
        };
        let stop = StopSpec::until(10.0).with_balls(
            vec![Ball {
                center: Vec2::new(1.0, 0.0),
                radius: 0.1,
            }],
            Some(2.0),
        );
        let t = integrate(&f, Vec2::new(1.5, 0.0), 1.0, &stop, IntegratorOptions::default()).unwrap();
        assert!((t.end().q.x - 2.9).abs() < 1e-12);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let f = ConstantField {
            v: Vec2::new(0.0, 1.0),
            period: 1.0,
        };
        let stop = StopSpec::next_meridian(1.0, 10.0);
        let t = integrate(&f, Vec2::new(0.5, 0.0), 1.0, &stop, IntegratorOptions::default()).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,x,y\n"));
        assert_eq!(text.lines().count(), t.samples.len() + 1);
    }

    #[test]
    fn level_curve_rejects_critical_seed() {
        let flow = TorusFlow::compute(FieldParams::reference(), 32, 1e-12).unwrap();
        let s = flow.zeros[0];
        assert!(matches!(
            flow.trace_level_curve(s.level(), s.point, 1.0, ArcBudget::default()),
            Err(Error::NearCriticalPoint { .. })
        ));
    }

    #[test]
    fn level_curve_rejects_off_level_seed() {
        let p = FieldParams::reference();
        assert!(matches!(
            trace_level_curve(&p, 1.0, Vec2::new(2.0, 0.0), -1.0, ArcBudget::default()),
            Err(Error::PreconditionViolated(_))
        ));
    }
}
