//! Dulac correspondence maps of hyperbolic saddles and power-law fits of
//! their exponent.
//!
//! In coordinates where the unstable separatrix is the positive `x` axis and
//! the stable one the positive `y` axis, an orbit entering through `(x, h)`
//! leaves through `(h, y)` with `y ~ c x^mu`, `mu = |lambda_1| / lambda_2`.

use crate::error::{Error, Result};
use crate::field::{FieldParams, LinearField, Mat2, PlanarField, Vec2};
use crate::flow::{integrate, Axis, StopSpec, TerminalEvent};
use crate::ode::IntegratorOptions;
use crate::singularity::{characteristic_number, Singularity};

/// `x' = x`, `y' = -mu y + coupling x y`; both axes stay invariant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbedSaddle {
    pub mu: f64,
    pub coupling: f64,
}

impl PlanarField for PerturbedSaddle {
    fn velocity(&self, q: Vec2) -> Vec2 {
        Vec2::new(q.x, -self.mu * q.y + self.coupling * q.x * q.y)
    }

    fn jacobian(&self, q: Vec2) -> Mat2 {
        Mat2::new(1.0, 0.0, self.coupling * q.y, -self.mu + self.coupling * q.x)
    }
}

/// A field seen in the affine chart `q = origin + basis * z`.
struct Chart<'a, F: PlanarField> {
    field: &'a F,
    origin: Vec2,
    basis: Mat2,
    inverse: Mat2,
}

impl<F: PlanarField> PlanarField for Chart<'_, F> {
    fn velocity(&self, z: Vec2) -> Vec2 {
        self.inverse
            .apply(self.field.velocity(self.origin + self.basis.apply(z)))
    }

    fn jacobian(&self, z: Vec2) -> Mat2 {
        let j = self.field.jacobian(self.origin + self.basis.apply(z));
        let ji = mat_mul(&j, &self.basis);
        mat_mul(&self.inverse, &ji)
    }
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    Mat2::new(
        a.a * b.a + a.b * b.c,
        a.a * b.b + a.b * b.d,
        a.c * b.a + a.d * b.c,
        a.c * b.b + a.d * b.d,
    )
}

/// Saddle whose Dulac map is sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SaddleSpec {
    /// `x' = unstable * x`, `y' = stable * y`.
    Linear { stable: f64, unstable: f64 },
    Perturbed(PerturbedSaddle),
    /// A saddle of the analytic torus family, in its eigenvector chart with
    /// the entry and exit transversals re-centred on the true separatrices.
    Hamiltonian { params: FieldParams, saddle: Singularity },
}

impl SaddleSpec {
    /// Characteristic number of the saddle.
    pub fn mu(&self) -> Result<f64> {
        match self {
            SaddleSpec::Linear { stable, unstable } => {
                if !(*stable < 0.0 && *unstable > 0.0) {
                    return Err(Error::KindMismatch);
                }
                Ok(stable.abs() / unstable)
            }
            SaddleSpec::Perturbed(p) => Ok(p.mu),
            SaddleSpec::Hamiltonian { saddle, .. } => characteristic_number(saddle),
        }
    }
}

/// Logarithmically spaced points from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => return Vec::new(),
        1 => return vec![lo],
        _ => {}
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut xs: Vec<f64> = (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
        .collect();
    xs[0] = lo;
    xs[n - 1] = hi;
    xs
}

fn dulac_options(atol: f64) -> IntegratorOptions {
    IntegratorOptions {
        rtol: 1e-11,
        atol,
        h_init: 1e-4,
        h_max: 0.1,
        max_steps: 2_000_000,
    }
}

fn pass<F: PlanarField>(field: &F, start: Vec2, exit: f64, atol: f64) -> Result<Vec2> {
    let stop = StopSpec::until(1e4).with_line(Axis::X, exit);
    let traj = integrate(field, start, 1.0, &stop, dulac_options(atol))?;
    match traj.terminal {
        TerminalEvent::LineCross { .. } => Ok(traj.end().q),
        _ => Err(Error::StepBudgetExhausted {
            steps: traj.samples.len(),
        }),
    }
}

fn samples_on<F: PlanarField>(
    field: &F,
    h: f64,
    xs: &[f64],
    entry_offset: f64,
    exit_offset: f64,
    atol: f64,
) -> Result<Vec<(f64, f64)>> {
    xs.iter()
        .map(|&x| {
            let out = pass(field, Vec2::new(entry_offset + x, h), h, atol)?;
            Ok((x, out.y - exit_offset))
        })
        .collect()
}

/// Dulac map from the transversal `{y = h}` to `{x = h}` at the points `xs`.
///
/// `xs` must lie in `(0, h/10]`. Returns `(x, exit y)` pairs.
pub fn dulac_samples(spec: &SaddleSpec, h: f64, xs: &[f64]) -> Result<Vec<(f64, f64)>> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("transversal offset must be positive, got {h}")));
    }
    if let Some(&bad) = xs.iter().find(|&&x| !(x > 0.0 && x <= 0.1 * h)) {
        return Err(Error::InvalidArgument(format!(
            "entry point {bad} outside (0, h/10] for h = {h}"
        )));
    }
    match *spec {
        SaddleSpec::Linear { stable, unstable } => {
            spec.mu()?;
            samples_on(&LinearField::saddle(stable, unstable), h, xs, 0.0, 0.0, 0.0)
        }
        SaddleSpec::Perturbed(p) => samples_on(&p, h, xs, 0.0, 0.0, 0.0),
        SaddleSpec::Hamiltonian { params, saddle } => {
            let (eu, es) = saddle
                .unstable_direction()
                .zip(saddle.stable_direction())
                .ok_or(Error::KindMismatch)?;
            let basis = Mat2::from_columns(eu, es);
            let inverse = basis
                .inverse()
                .ok_or_else(|| Error::InvalidArgument("degenerate eigenbasis".into()))?;
            let chart = Chart {
                field: &params,
                origin: saddle.point,
                basis,
                inverse,
            };
            let atol = 1e-15;
            let delta = 1e-9;
            // Where the stable separatrix crosses {eta = h} (traced backwards)
            let stop = StopSpec::until(1e4).with_line(Axis::Y, h);
            let stable = integrate(&chart, Vec2::new(0.0, delta), -1.0, &stop, dulac_options(atol))?;
            if !matches!(stable.terminal, TerminalEvent::LineCross { .. }) {
                return Err(Error::StepBudgetExhausted {
                    steps: stable.samples.len(),
                });
            }
            let entry_offset = stable.end().q.x;
            // and where the unstable one crosses {xi = h}.
            let unstable = pass(&chart, Vec2::new(delta, 0.0), h, atol)?;
            let exit_offset = unstable.y;
            samples_on(&chart, h, xs, entry_offset, exit_offset, atol)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DulacFit {
    /// Characteristic number of the saddle, when known.
    pub mu_true: Option<f64>,
    /// Slope of `log y` against `log x`.
    pub mu_hat: f64,
    /// `exp(intercept)`.
    pub c_hat: f64,
    pub x_min: f64,
    pub x_max: f64,
    /// Largest deviation of a sample from the fitted line, in `log y`.
    pub residual: f64,
    pub samples: usize,
}

pub const MIN_FIT_SAMPLES: usize = 8;

/// Least-squares line through `(log x, log y)`.
pub fn fit_exponent(samples: &[(f64, f64)]) -> Result<DulacFit> {
    if samples.len() < MIN_FIT_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_FIT_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if let Some(&(x, y)) = samples.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::NonPositiveSample { x, y });
    }
    let logs: Vec<(f64, f64)> = samples.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("all sample abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = logs
        .iter()
        .map(|(lx, ly)| (ly - intercept - slope * lx).abs())
        .fold(0.0, f64::max);
    let x_min = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let x_max = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    Ok(DulacFit {
        mu_true: None,
        mu_hat: slope,
        c_hat: intercept.exp(),
        x_min,
        x_max,
        residual,
        samples: samples.len(),
    })
}

/// Samples the Dulac map of `spec` at `n` log-spaced points of
/// `[x_min, x_max]` and fits the exponent.
pub fn measure(spec: &SaddleSpec, h: f64, x_min: f64, x_max: f64, n: usize) -> Result<DulacFit> {
    let samples = dulac_samples(spec, h, &log_spaced(x_min, x_max, n))?;
    let mut fit = fit_exponent(&samples)?;
    fit.mu_true = spec.mu().ok();
    Ok(fit)
}

pub const CODIM_TOL: f64 = 1e-6;

/// For each pair of characteristic numbers, whether their product is 1
/// within [`CODIM_TOL`].
pub fn codim_check(pairs: &[(f64, f64)]) -> Vec<bool> {
    pairs
        .iter()
        .map(|(mu, nu)| (mu * nu - 1.0).abs() <= CODIM_TOL)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_fit() {
        let samples: Vec<(f64, f64)> = log_spaced(1e-4, 1e-1, 10)
            .into_iter()
            .map(|x| (x, 3.0 * x.powf(0.7)))
            .collect();
        let fit = fit_exponent(&samples).unwrap();
        assert!((fit.mu_hat - 0.7).abs() < 1e-10);
        assert!((fit.c_hat - 3.0).abs() < 1e-10);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn fit_rejects_bad_input() {
        let few = vec![(0.1, 0.1); 7];
        assert!(matches!(fit_exponent(&few), Err(Error::InvalidArgument(_))));
        let mut samples: Vec<(f64, f64)> = log_spaced(1e-3, 1e-1, 8).into_iter().map(|x| (x, x)).collect();
        samples[3].1 = 0.0;
        assert!(matches!(fit_exponent(&samples), Err(Error::NonPositiveSample { .. })));
    }

    #[test]
    fn codim_examples() {
        assert_eq!(codim_check(&[(0.5, 2.0), (0.5, 1.9), (1.0, 1.0)]), vec![true, false, true]);
    }

    #[test]
    fn linear_closed_form() {
        let spec = SaddleSpec::Linear {
            stable: -1.0,
            unstable: 2.0,
        };
        let xs = log_spaced(1e-5, 1e-2, 6);
        for (x, y) in dulac_samples(&spec, 1.0, &xs).unwrap() {
            assert!((y - x.sqrt()).abs() <= 1e-8 * x.sqrt(), "x={x}");
        }
        let spec = SaddleSpec::Linear {
            stable: -3.0,
            unstable: 1.0,
        };
        for (x, y) in dulac_samples(&spec, 1.0, &xs).unwrap() {
            assert!((y - x.powi(3)).abs() <= 1e-8 * x.powi(3), "x={x}");
        }
    }

    #[test]
    fn entry_points_must_be_close() {
        let spec = SaddleSpec::Linear {
            stable: -1.0,
            unstable: 1.0,
        };
        assert!(dulac_samples(&spec, 1.0, &[0.2]).is_err());
        assert!(dulac_samples(&spec, 1.0, &[0.0]).is_err());
        assert!(dulac_samples(&spec, 0.0, &[0.01]).is_err());
    }

    #[test]
    fn non_saddle_linear_spec_is_rejected() {
        let spec = SaddleSpec::Linear {
            stable: 1.0,
            unstable: 2.0,
        };
        assert_eq!(spec.mu(), Err(Error::KindMismatch));
    }
}
