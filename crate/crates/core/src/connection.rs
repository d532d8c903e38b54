//! The connection surface `d = D(phi, b, c)` on which the saddles `s2`, `s3`
//! share a level, the modulus `rho = u(s2) - u(s1)` along it, and the grid
//! verification of the analytic family over a parameter box.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::field::{centered, FieldParams, Vec2, PERIOD};
use crate::flow::{trace_level_curve, ArcBudget, LevelCurveEnd};
use crate::singularity::{find_zeros, order_saddles, Census, SaddleTriple, Singularity};

/// Mesh and Newton tolerance used to locate zeros.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroSearch {
    pub mesh_n: usize,
    pub tol: f64,
}

impl Default for ZeroSearch {
    fn default() -> Self {
        Self {
            mesh_n: 64,
            tol: 1e-12,
        }
    }
}

pub fn saddle_triple(p: &FieldParams, search: ZeroSearch) -> Result<SaddleTriple> {
    order_saddles(&find_zeros(p, search.mesh_n, search.tol)?)
}

/// Level mismatch `u(s2) - u(s3)` of the two right-hand saddles.
///
/// Oriented so that it increases with `d` across the verified box.
pub fn delta(p: &FieldParams, search: ZeroSearch) -> Result<f64> {
    let t = saddle_triple(p, search)?;
    Ok(delta_of(&t))
}

fn delta_of(t: &SaddleTriple) -> f64 {
    t.s2.level() - t.s3.level()
}

/// `d delta / dd` by the envelope formula: saddles are critical points of
/// `u`, so their motion drops out and only `du/dd = (cos y - 1) cos y`
/// evaluated at each saddle remains.
pub fn delta_derivative(p: &FieldParams, search: ZeroSearch) -> Result<f64> {
    let t = saddle_triple(p, search)?;
    Ok(delta_derivative_of(p, &t))
}

pub fn delta_derivative_of(p: &FieldParams, t: &SaddleTriple) -> f64 {
    p.du_dd(t.s2.point) - p.du_dd(t.s3.point)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectionSolution {
    pub phi: f64,
    pub b: f64,
    pub c: f64,
    pub d_star: f64,
    /// `u(s2) - u(s1)` at `d_star`.
    pub rho: f64,
    pub d_delta_dd: f64,
    /// `delta` at `d_star`.
    pub residual: f64,
    pub saddles: SaddleTriple,
    pub iterations: usize,
}

impl ConnectionSolution {
    pub fn params(&self) -> FieldParams {
        FieldParams::new(self.phi, self.b, self.c, self.d_star)
    }
}

/// Bracket searched for the connection.
pub const D_BRACKET: (f64, f64) = (0.9, 1.3);

/// Solves `delta(phi, b, c, d) = 0` for `d` in [`D_BRACKET`] by Newton's
/// method with bisection safeguard, to `|delta| <= tol`.
pub fn solve_d(phi: f64, b: f64, c: f64, tol: f64, search: ZeroSearch) -> Result<ConnectionSolution> {
    solve_d_in(phi, b, c, D_BRACKET, tol, search)
}

pub fn solve_d_in(
    phi: f64,
    b: f64,
    c: f64,
    bracket: (f64, f64),
    tol: f64,
    search: ZeroSearch,
) -> Result<ConnectionSolution> {
    let at = |d: f64| -> Result<(f64, f64, SaddleTriple)> {
        let p = FieldParams::new(phi, b, c, d);
        let t = saddle_triple(&p, search)?;
        Ok((delta_of(&t), delta_derivative_of(&p, &t), t))
    };
    let (mut lo, mut hi) = bracket;
    let (f_lo, _, _) = at(lo)?;
    let (f_hi, _, _) = at(hi)?;
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoSignChange { lo, hi });
    }
    let rising = f_hi > f_lo;
    let mut d = lo - f_lo * (hi - lo) / (f_hi - f_lo);
    for iteration in 1..=100 {
        let (f, df, saddles) = at(d)?;
        if f.abs() <= tol {
            return Ok(ConnectionSolution {
                phi,
                b,
                c,
                d_star: d,
                rho: saddles.s2.level() - saddles.s1.level(),
                d_delta_dd: df,
                residual: f,
                saddles,
                iterations: iteration,
            });
        }
        if (f > 0.0) == rising {
            hi = d;
        } else {
            lo = d;
        }
        let newton = d - f / df;
        d = if df != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-15 {
            break;
        }
    }
    Err(Error::PreconditionViolated(format!(
        "connection solve did not reach |delta| <= {tol} at c = {c}"
    )))
}

/// Distance of the critical values from the levels `target + 2 pi k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Separation {
    pub separated: bool,
    /// Smallest distance over all values and targets.
    pub margin: f64,
    pub min_margin: f64,
}

/// Whether every value in `values` stays more than `min_margin` away from
/// `t + 2 pi k` for every target `t` and integer `k`.
pub fn critical_value_separation(values: &[f64], targets: &[f64], min_margin: f64) -> Separation {
    let margin = values
        .iter()
        .flat_map(|v| targets.iter().map(move |t| centered(v - t, PERIOD).abs()))
        .fold(f64::INFINITY, f64::min);
    Separation {
        separated: margin > min_margin,
        margin,
        min_margin,
    }
}

/// Critical values of the zeros, on the lift `0 <= y < 2pi`.
pub fn critical_values(zeros: &[Singularity]) -> Vec<f64> {
    zeros.iter().map(|z| z.level()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub phi: f64,
    pub b: f64,
    pub c_range: (f64, f64),
    pub d_range: (f64, f64),
    pub grid_n: usize,
    pub search: ZeroSearch,
    pub min_abs_det: f64,
    pub derivative_band: (f64, f64),
    pub level_targets: Vec<f64>,
    pub separation_margin: f64,
    pub connection_tol: f64,
    /// Minimal spread of rho across the rows for it to count as non-constant.
    pub rho_spread_min: f64,
    /// Tolerance on the end point of a level curve at the top of the strip.
    pub level_end_tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            phi: 1.0 / 3.0,
            b: 2.0,
            c_range: (0.7, 1.1),
            d_range: (0.9, 1.3),
            grid_n: 9,
            search: ZeroSearch::default(),
            min_abs_det: 2.0,
            derivative_band: (2.05, 2.15),
            level_targets: vec![1.0, 5.0],
            separation_margin: 0.05,
            connection_tol: 1e-10,
            rho_spread_min: 1e-3,
            level_end_tol: 1e-8,
        }
    }
}

impl VerifyConfig {
    fn axis(range: (f64, f64), n: usize, i: usize) -> f64 {
        if n == 1 {
            range.0
        } else {
            range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64
        }
    }

    pub fn c_at(&self, i: usize) -> f64 {
        Self::axis(self.c_range, self.grid_n, i)
    }

    pub fn d_at(&self, j: usize) -> f64 {
        Self::axis(self.d_range, self.grid_n, j)
    }
}

/// Outcome of the per-vertex checks at one `(c, d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub i: usize,
    pub j: usize,
    pub c: f64,
    pub d: f64,
    pub zero_count: usize,
    pub census: Census,
    pub min_abs_det: f64,
    pub derivative: Option<f64>,
    pub separation: Option<f64>,
    pub level_curves_cross: bool,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowResult {
    pub i: usize,
    pub c: f64,
    pub solution: std::result::Result<ConnectionSolution, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub config: VerifyConfig,
    pub cells: Vec<CellResult>,
    pub rows: Vec<RowResult>,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// `key=value` lines, one section per cell and per row, then the checks.
    pub fn render(&self, header: &[(String, String)]) -> String {
        let cfg = &self.config;
        let mut s = String::new();
        for (k, v) in header {
            let _ = writeln!(s, "{k}={v}");
        }
        let _ = writeln!(s, "phi={}", fmt(cfg.phi));
        let _ = writeln!(s, "b={}", fmt(cfg.b));
        let _ = writeln!(s, "c_range={},{}", fmt(cfg.c_range.0), fmt(cfg.c_range.1));
        let _ = writeln!(s, "d_range={},{}", fmt(cfg.d_range.0), fmt(cfg.d_range.1));
        let _ = writeln!(s, "grid_n={}", cfg.grid_n);
        let _ = writeln!(s, "mesh_n={}", cfg.search.mesh_n);
        let _ = writeln!(s, "zero_tol={:e}", cfg.search.tol);
        let _ = writeln!(s, "min_abs_det={}", fmt(cfg.min_abs_det));
        let _ = writeln!(
            s,
            "derivative_band={},{}",
            fmt(cfg.derivative_band.0),
            fmt(cfg.derivative_band.1)
        );
        let targets: Vec<String> = cfg.level_targets.iter().map(|t| fmt(*t)).collect();
        let _ = writeln!(s, "level_targets={}", targets.join(","));
        let _ = writeln!(s, "separation_margin={}", fmt(cfg.separation_margin));
        let _ = writeln!(s, "connection_tol={:e}", cfg.connection_tol);
        let _ = writeln!(s, "rho_spread_min={:e}", cfg.rho_spread_min);
        let _ = writeln!(s, "level_end_tol={:e}", cfg.level_end_tol);
        let _ = writeln!(s, "strip=0<y<2pi");

        for cell in &self.cells {
            let key = format!("cell.{}.{}", cell.i, cell.j);
            let _ = writeln!(s, "{key}.c={}", fmt(cell.c));
            let _ = writeln!(s, "{key}.d={}", fmt(cell.d));
            let _ = writeln!(s, "{key}.zeros={}", cell.zero_count);
            let _ = writeln!(
                s,
                "{key}.census={}/{}/{}",
                cell.census.saddles, cell.census.minima, cell.census.maxima
            );
            let _ = writeln!(s, "{key}.min_abs_det={}", fmt(cell.min_abs_det));
            let _ = writeln!(s, "{key}.derivative={}", opt(cell.derivative));
            let _ = writeln!(s, "{key}.separation_margin={}", opt(cell.separation));
            let _ = writeln!(s, "{key}.level_curves_cross={}", cell.level_curves_cross);
            for (n, e) in cell.errors.iter().enumerate() {
                let _ = writeln!(s, "{key}.error.{n}={e}");
            }
        }
        for row in &self.rows {
            let key = format!("row.{}", row.i);
            let _ = writeln!(s, "{key}.c={}", fmt(row.c));
            match &row.solution {
                Ok(sol) => {
                    let _ = writeln!(s, "{key}.d_star={}", fmt(sol.d_star));
                    let _ = writeln!(s, "{key}.rho={}", fmt(sol.rho));
                    let _ = writeln!(s, "{key}.d_delta_dd={}", fmt(sol.d_delta_dd));
                    let _ = writeln!(s, "{key}.residual={:.3e}", sol.residual);
                }
                Err(e) => {
                    let _ = writeln!(s, "{key}.error={e}");
                }
            }
        }
        for check in &self.checks {
            let _ = writeln!(
                s,
                "check.{}={}",
                check.name,
                if check.passed { "pass" } else { "fail" }
            );
            let _ = writeln!(s, "check.{}.detail={}", check.name, check.detail);
        }
        let _ = writeln!(s, "overall={}", if self.passed() { "pass" } else { "fail" });
        s
    }

    /// `c,d_star,rho,derivative` for each row that solved.
    pub fn rows_csv(&self) -> String {
        let mut s = String::from("c,d_star,rho,derivative\n");
        for row in &self.rows {
            if let Ok(sol) = &row.solution {
                let _ = writeln!(
                    s,
                    "{},{},{},{}",
                    fmt(row.c),
                    fmt(sol.d_star),
                    fmt(sol.rho),
                    fmt(sol.d_delta_dd)
                );
            }
        }
        s
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.10}")
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_else(|| "none".into())
}

fn check_cell(cfg: &VerifyConfig, i: usize, j: usize) -> CellResult {
    let c = cfg.c_at(i);
    let d = cfg.d_at(j);
    let p = FieldParams::new(cfg.phi, cfg.b, c, d);
    let mut cell = CellResult {
        i,
        j,
        c,
        d,
        zero_count: 0,
        census: Census::default(),
        min_abs_det: 0.0,
        derivative: None,
        separation: None,
        level_curves_cross: false,
        errors: Vec::new(),
    };
    let zeros = match find_zeros(&p, cfg.search.mesh_n, cfg.search.tol) {
        Ok(z) => z,
        Err(e) => {
            cell.errors.push(e.to_string());
            return cell;
        }
    };
    cell.zero_count = zeros.len();
    cell.census = Census::of(&zeros);
    cell.min_abs_det = zeros
        .iter()
        .map(|z| z.det_j.abs())
        .fold(f64::INFINITY, f64::min);
    match order_saddles(&zeros) {
        Ok(t) => cell.derivative = Some(delta_derivative_of(&p, &t)),
        Err(e) => cell.errors.push(e.to_string()),
    }
    let sep = critical_value_separation(
        &critical_values(&zeros),
        &cfg.level_targets,
        cfg.separation_margin,
    );
    cell.separation = Some(sep.margin);

    cell.level_curves_cross = cfg.level_targets.iter().all(|&level| {
        match trace_level_curve(&p, level, Vec2::new(level, 0.0), -1.0, ArcBudget::default()) {
            Ok(curve) => {
                let end = curve.points.last().copied().unwrap_or(Vec2::ZERO);
                curve.end == LevelCurveEnd::StripTop
                    && (p.hamiltonian(end) - level).abs() <= cfg.level_end_tol
            }
            Err(e) => {
                cell.errors.push(format!("level {level}: {e}"));
                false
            }
        }
    });
    cell
}

/// Runs every check over the `grid_n x grid_n` vertices of the box.
///
/// Failures are recorded in the report; nothing here returns early.
pub fn verify(cfg: &VerifyConfig) -> VerificationReport {
    let n = cfg.grid_n;
    let cells: Vec<CellResult> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| check_cell(cfg, i, j))
        .collect();
    let rows: Vec<RowResult> = (0..n)
        .map(|i| {
            let c = cfg.c_at(i);
            let solution = solve_d_in(cfg.phi, cfg.b, c, cfg.d_range, cfg.connection_tol, cfg.search)
                .map_err(|e| e.to_string());
            RowResult { i, c, solution }
        })
        .collect();

    let mut checks = Vec::new();

    let bad: Vec<_> = cells.iter().filter(|c| c.zero_count != 6).collect();
    checks.push(Check {
        name: "six_zeros",
        passed: bad.is_empty(),
        detail: format!("{} of {} vertices without exactly 6 zeros", bad.len(), cells.len()),
    });

    let expected = Census {
        saddles: 3,
        minima: 2,
        maxima: 1,
    };
    let bad = cells
        .iter()
        .filter(|c| c.census != expected || !(c.min_abs_det > cfg.min_abs_det))
        .count();
    let worst_det = cells.iter().map(|c| c.min_abs_det).fold(f64::INFINITY, f64::min);
    checks.push(Check {
        name: "hyperbolic_census",
        passed: bad == 0,
        detail: format!(
            "{bad} vertices off census 3/2/1 or with |det J| <= {}; min |det J| = {}",
            fmt(cfg.min_abs_det),
            fmt(worst_det)
        ),
    });

    let bad = cells
        .iter()
        .filter(|c| {
            !c.level_curves_cross || !c.separation.is_some_and(|m| m > cfg.separation_margin)
        })
        .count();
    let worst_sep = cells
        .iter()
        .filter_map(|c| c.separation)
        .fold(f64::INFINITY, f64::min);
    checks.push(Check {
        name: "strip_division",
        passed: bad == 0,
        detail: format!(
            "{bad} vertices where a level curve fails to cross the strip or a critical value is within {} of a target; min margin = {}",
            fmt(cfg.separation_margin),
            fmt(worst_sep)
        ),
    });

    let derivs: Vec<f64> = cells.iter().filter_map(|c| c.derivative).collect();
    let (lo, hi) = cfg.derivative_band;
    let dmin = derivs.iter().copied().fold(f64::INFINITY, f64::min);
    let dmax = derivs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check {
        name: "transversality",
        passed: derivs.len() == cells.len() && dmin >= lo && dmax <= hi,
        detail: format!("d delta/dd in [{}, {}] over {} vertices", fmt(dmin), fmt(dmax), derivs.len()),
    });

    let solved: Vec<&ConnectionSolution> = rows.iter().filter_map(|r| r.solution.as_ref().ok()).collect();
    let in_range = solved
        .iter()
        .filter(|s| s.d_star >= cfg.d_range.0 && s.d_star <= cfg.d_range.1)
        .count();
    checks.push(Check {
        name: "connection_surface",
        passed: in_range == rows.len(),
        detail: format!("{in_range} of {} rows solved with d_star inside the d range", rows.len()),
    });

    let rmin = solved.iter().map(|s| s.rho).fold(f64::INFINITY, f64::min);
    let rmax = solved.iter().map(|s| s.rho).fold(f64::NEG_INFINITY, f64::max);
    let spread = if solved.len() >= 2 { rmax - rmin } else { 0.0 };
    checks.push(Check {
        name: "rho_nonconstant",
        passed: spread > cfg.rho_spread_min,
        detail: format!("rho spans [{}, {}]", fmt(rmin), fmt(rmax)),
    });

    VerificationReport {
        config: cfg.clone(),
        cells,
        rows,
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separation_detects_exact_hit() {
        let s = critical_value_separation(&[1.0], &[1.0, 5.0], 0.0);
        assert!(!s.separated);
        assert_eq!(s.margin, 0.0);
    }

    #[test]
    fn separation_wraps_by_two_pi() {
        let s = critical_value_separation(&[1.0 + PERIOD + 0.2], &[1.0], 0.05);
        assert!(s.separated);
        assert!((s.margin - 0.2).abs() < 1e-12);
        let s = critical_value_separation(&[5.0 - 3.0 * PERIOD], &[1.0, 5.0], 0.05);
        assert!(!s.separated);
    }

    #[test]
    fn axis_endpoints() {
        let cfg = VerifyConfig::default();
        assert_eq!(cfg.c_at(0), 0.7);
        assert!((cfg.c_at(8) - 1.1).abs() < 1e-15);
        assert!((cfg.d_at(4) - 1.1).abs() < 1e-15);
    }

    #[test]
    fn envelope_derivative_vanishes_for_equal_heights() {
        // Two saddles at the same y contribute equally.
        let p = FieldParams::reference();
        let mut t = saddle_triple(&p, ZeroSearch::default()).unwrap();
        t.s3.point.y = t.s2.point.y;
        assert_eq!(delta_derivative_of(&p, &t), 0.0);
    }
}
