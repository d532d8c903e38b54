//! Run configuration: built-in defaults, then an optional `key=value` file,
//! then command-line flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use sha2::{Digest, Sha256};
use torus_core::ode::IntegratorOptions;
use torus_core::rotation::{DEFAULT_EPS, DEFAULT_HORIZON};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "TORUSFLOW_OUT_DIR";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub phi: f64,
    pub b: f64,
    pub c: f64,
    /// `None` means: solve for the connection value `D(phi, b, c)`.
    pub d: Option<f64>,
    pub c_range: (f64, f64),
    pub d_range: (f64, f64),
    pub grid_n: usize,
    pub mesh_n: usize,
    pub tol: f64,
    pub connection_tol: f64,
    pub horizon: u64,
    pub eps: f64,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            phi: 1.0 / 3.0,
            b: 2.0,
            c: 1.0,
            d: None,
            c_range: (0.7, 1.1),
            d_range: (0.9, 1.3),
            grid_n: 9,
            mesh_n: 64,
            tol: 1e-12,
            connection_tol: 1e-10,
            horizon: DEFAULT_HORIZON,
            eps: DEFAULT_EPS,
            out: None,
        }
    }
}

/// Values given on the command line; `None` leaves the lower layers alone.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub phi: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub d: Option<f64>,
    pub c_range: Option<(f64, f64)>,
    pub d_range: Option<(f64, f64)>,
    pub grid_n: Option<usize>,
    pub mesh_n: Option<usize>,
    pub tol: Option<f64>,
    pub horizon: Option<u64>,
    pub eps: Option<f64>,
    pub out: Option<PathBuf>,
}

pub fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .or_else(|| s.split_once(':'))
        .ok_or_else(|| format!("expected LO,HI, got '{s}'"))?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("bad range start '{a}': {e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("bad range end '{b}': {e}"))?;
    if !(lo <= hi) {
        return Err(format!("range start {lo} exceeds end {hi}"));
    }
    Ok((lo, hi))
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>()
        .map_err(|e| anyhow::anyhow!("config key '{key}': cannot parse '{v}': {e}"))
}

impl RunConfig {
    fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("{}:{}: expected key=value", path.display(), lineno + 1);
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "phi" => self.phi = parse_num(key, value)?,
                "b" => self.b = parse_num(key, value)?,
                "c" => self.c = parse_num(key, value)?,
                "d" => self.d = Some(parse_num(key, value)?),
                "c_range" | "c-range" => self.c_range = parse_range(value).map_err(anyhow::Error::msg)?,
                "d_range" | "d-range" => self.d_range = parse_range(value).map_err(anyhow::Error::msg)?,
                "grid_n" | "grid-n" => self.grid_n = parse_num(key, value)?,
                "mesh_n" | "mesh-n" => self.mesh_n = parse_num(key, value)?,
                "tol" => self.tol = parse_num(key, value)?,
                "connection_tol" => self.connection_tol = parse_num(key, value)?,
                "horizon" => self.horizon = parse_num(key, value)?,
                "eps" => self.eps = parse_num(key, value)?,
                "out" => self.out = Some(PathBuf::from(value)),
                other => bail!("{}:{}: unknown key '{other}'", path.display(), lineno + 1),
            }
        }
        Ok(())
    }

    fn apply(&mut self, o: &Overrides) {
        macro_rules! set {
            ($($f:ident),*) => {$( if let Some(v) = o.$f.clone() { self.$f = v; } )*};
        }
        set!(phi, b, c, c_range, d_range, grid_n, mesh_n, tol, horizon, eps);
        if let Some(d) = o.d {
            self.d = Some(d);
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
    }

    pub fn resolve(file: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let mut cfg = Self::default();
        if let Some(path) = file {
            cfg.apply_file(path)?;
        }
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !(self.eps > 0.0) {
            bail!("tolerances must be positive");
        }
        if self.grid_n == 0 {
            bail!("grid_n must be at least 1");
        }
        if self.mesh_n < 16 {
            bail!("mesh_n must be at least 16");
        }
        Ok(())
    }

    /// Every resolved value, in a fixed order.
    pub fn entries(&self) -> BTreeMap<&'static str, String> {
        let mut m = BTreeMap::new();
        m.insert("phi", format!("{:?}", self.phi));
        m.insert("b", format!("{:?}", self.b));
        m.insert("c", format!("{:?}", self.c));
        m.insert("d", self.d.map(|d| format!("{d:?}")).unwrap_or_else(|| "solve".into()));
        m.insert("c_range", format!("{:?},{:?}", self.c_range.0, self.c_range.1));
        m.insert("d_range", format!("{:?},{:?}", self.d_range.0, self.d_range.1));
        m.insert("grid_n", self.grid_n.to_string());
        m.insert("mesh_n", self.mesh_n.to_string());
        m.insert("tol", format!("{:e}", self.tol));
        m.insert("connection_tol", format!("{:e}", self.connection_tol));
        m.insert("horizon", self.horizon.to_string());
        m.insert("eps", format!("{:e}", self.eps));
        m
    }

    /// Output file: `--out`, else `$TORUSFLOW_OUT_DIR/<default_name>`, else stdout.
    pub fn output_path(&self, default_name: &str) -> Option<PathBuf> {
        self.out.clone().or_else(|| {
            std::env::var_os(OUT_DIR_ENV)
                .filter(|d| !d.is_empty())
                .map(|d| PathBuf::from(d).join(default_name))
        })
    }
}

/// Version, command, config hash and tolerances, recorded at the top of
/// every output.
pub fn header(command: &str, cfg: &RunConfig, extra: &[(&str, String)]) -> Vec<(String, String)> {
    let integ = IntegratorOptions::default();
    let mut canonical = format!("command={command}\n");
    for (k, v) in cfg.entries() {
        canonical.push_str(&format!("{k}={v}\n"));
    }
    for (k, v) in extra {
        canonical.push_str(&format!("{k}={v}\n"));
    }
    let hash = hex::encode(Sha256::digest(canonical.as_bytes()));
    let mut h = vec![
        ("tool".to_string(), "torusflow".to_string()),
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("command".to_string(), command.to_string()),
        ("config_hash".to_string(), hash),
        ("zero_tol".to_string(), format!("{:e}", cfg.tol)),
        ("mesh_n".to_string(), cfg.mesh_n.to_string()),
        ("connection_tol".to_string(), format!("{:e}", cfg.connection_tol)),
        ("ode_rtol".to_string(), format!("{:e}", integ.rtol)),
        ("ode_atol".to_string(), format!("{:e}", integ.atol)),
        ("event_tol".to_string(), format!("{:e}", torus_core::flow::EVENT_TIME_TOL)),
        ("horizon".to_string(), cfg.horizon.to_string()),
        ("eps".to_string(), format!("{:e}", cfg.eps)),
    ];
    for (k, v) in extra {
        h.push((k.to_string(), v.clone()));
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0.7,1.1"), Ok((0.7, 1.1)));
        assert_eq!(parse_range("-1:2"), Ok((-1.0, 2.0)));
        assert!(parse_range("2,1").is_err());
        assert!(parse_range("x").is_err());
    }

    #[test]
    fn flags_override_file_override_defaults() {
        let dir = std::env::temp_dir().join(format!("torusflow-cfg-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.cfg");
        fs::write(&path, "# comment\nphi = 0.25\nb=3\ngrid_n=4\n").unwrap();
        let o = Overrides {
            b: Some(5.0),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(Some(&path), &o).unwrap();
        assert_eq!(cfg.phi, 0.25);
        assert_eq!(cfg.b, 5.0);
        assert_eq!(cfg.grid_n, 4);
        assert_eq!(cfg.c, 1.0);
        fs::write(&path, "bogus=1\n").unwrap();
        assert!(RunConfig::resolve(Some(&path), &Overrides::default()).is_err());
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn hash_depends_on_config() {
        let a = RunConfig::default();
        let b = RunConfig { b: 20.0, ..a.clone() };
        let ha = &header("verify", &a, &[])[3].1;
        assert_eq!(ha, &header("verify", &a, &[])[3].1);
        assert_ne!(ha, &header("verify", &b, &[])[3].1);
    }
}
