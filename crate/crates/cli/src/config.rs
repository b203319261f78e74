//! Flat key=value configuration with command-line overrides (later wins).
//! Unknown keys are rejected; every numeric field is range-checked at parse
//! time so experiments start from a validated state.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    KernelCheck,
    GField,
    Decompose,
    Hankel,
    BergerCoburn,
    DbarCheck,
    Beurling,
    Quantize,
    Suite,
}

impl Experiment {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "kernel-check" => Experiment::KernelCheck,
            "g-field" => Experiment::GField,
            "decompose" => Experiment::Decompose,
            "hankel" => Experiment::Hankel,
            "berger-coburn" => Experiment::BergerCoburn,
            "dbar-check" => Experiment::DbarCheck,
            "beurling" => Experiment::Beurling,
            "quantize" => Experiment::Quantize,
            "suite" => Experiment::Suite,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::KernelCheck => "kernel-check",
            Experiment::GField => "g-field",
            Experiment::Decompose => "decompose",
            Experiment::Hankel => "hankel",
            Experiment::BergerCoburn => "berger-coburn",
            Experiment::DbarCheck => "dbar-check",
            Experiment::Beurling => "beurling",
            Experiment::Quantize => "quantize",
            Experiment::Suite => "suite",
        }
    }

    pub fn all_names() -> &'static [&'static str] {
        &[
            "kernel-check",
            "g-field",
            "decompose",
            "hankel",
            "berger-coburn",
            "dbar-check",
            "beurling",
            "quantize",
            "suite",
        ]
    }
}

#[derive(Debug, Clone)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Everything an experiment can be told. Defaults are experiment-agnostic;
/// each runner reads the fields it needs.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Symbol spec: corpus id or expression over z.
    pub symbol: String,
    /// Companion symbol for pair experiments.
    pub symbol_g: String,
    pub alpha: f64,
    /// Basis cutoff N.
    pub basis_n: usize,
    pub extent: f64,
    pub q: f64,
    pub p: f64,
    /// Seminorm exponent; "inf" encodes the sup norm.
    pub s: f64,
    /// True once `s` was set explicitly (otherwise it derives from `(p, q)`).
    pub s_explicit: bool,
    pub r: f64,
    /// Lattice scale for decompositions.
    pub t: f64,
    /// Local polynomial degree.
    pub degree: usize,
    /// Decreasing scale schedule for quantize.
    pub t_schedule: Vec<f64>,
    /// Ring radii for probes.
    pub rings: Vec<f64>,
    /// Sample count for kernel-check.
    pub samples: usize,
    /// Output directory for CSVs and the manifest.
    pub out: PathBuf,
    /// Suite name filter.
    pub filter: String,
    /// Optional override of the experiment's pass/fail tolerance.
    pub tol: Option<f64>,
    /// Declared sup bounds for expression symbols (corpus ids carry their own).
    pub f_bound: Option<f64>,
    pub g_bound: Option<f64>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            symbol: "zbar".into(),
            symbol_g: "sinre".into(),
            alpha: 1.0,
            basis_n: 60,
            extent: 6.0,
            q: 2.0,
            p: 2.0,
            s: f64::INFINITY,
            s_explicit: false,
            r: 1.0,
            t: 1.0,
            degree: 4,
            t_schedule: vec![1.0, 0.5, 0.25, 0.1],
            rings: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            samples: 10_000,
            out: PathBuf::from("out"),
            filter: String::new(),
            tol: None,
            f_bound: None,
            g_bound: None,
        }
    }

    /// Apply one key=value pair; unknown keys are rejected.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let fnum = |what: &str| -> Result<f64, ConfigError> {
            value
                .parse::<f64>()
                .map_err(|_| err(format!("{what} must be a number, got '{value}'")))
        };
        match key {
            "symbol" | "f" => self.symbol = value.to_string(),
            "g" => self.symbol_g = value.to_string(),
            "alpha" => {
                self.alpha = fnum("alpha")?;
                if !(self.alpha > 0.0) {
                    return Err(err("alpha must be > 0"));
                }
            }
            "n" => {
                self.basis_n = value
                    .parse()
                    .map_err(|_| err(format!("n must be a nonnegative integer, got '{value}'")))?;
                if self.basis_n > 200 {
                    return Err(err("n above 200 blows the runtime budget"));
                }
            }
            "extent" => {
                self.extent = fnum("extent")?;
                if !(self.extent > 0.0 && self.extent <= 20.0) {
                    return Err(err("extent must lie in (0, 20]"));
                }
            }
            "q" => {
                self.q = fnum("q")?;
                if !(self.q > 0.0) {
                    return Err(err("q must be > 0"));
                }
            }
            "p" => {
                self.p = fnum("p")?;
                if !(self.p > 0.0) {
                    return Err(err("p must be > 0"));
                }
            }
            "s" => {
                self.s = if value == "inf" {
                    f64::INFINITY
                } else {
                    fnum("s")?
                };
                if !(self.s > 0.0) {
                    return Err(err("s must be > 0 (or 'inf')"));
                }
                self.s_explicit = true;
            }
            "r" => {
                self.r = fnum("r")?;
                if !(self.r > 0.0 && self.r <= 8.0) {
                    return Err(err("r must lie in (0, 8]"));
                }
            }
            "t" => {
                self.t = fnum("t")?;
                if !(self.t > 0.0 && self.t <= 4.0) {
                    return Err(err("t must lie in (0, 4]"));
                }
            }
            "degree" => {
                self.degree = value
                    .parse()
                    .map_err(|_| err(format!("degree must be an integer, got '{value}'")))?;
                if self.degree > 16 {
                    return Err(err("degree above 16 is not supported"));
                }
            }
            "tschedule" => {
                let mut sched = Vec::new();
                for part in value.split(',') {
                    sched.push(
                        part.trim()
                            .parse::<f64>()
                            .map_err(|_| err(format!("bad schedule entry '{part}'")))?,
                    );
                }
                self.t_schedule = sched;
            }
            "tmin" => {
                let tmin = fnum("tmin")?;
                if !(tmin > 0.0 && tmin <= 1.0) {
                    return Err(err("tmin must lie in (0, 1]"));
                }
                self.t_schedule.retain(|t| *t > tmin);
                self.t_schedule.push(tmin);
            }
            "rings" => {
                let mut rings = Vec::new();
                for part in value.split(',') {
                    rings.push(
                        part.trim()
                            .parse::<f64>()
                            .map_err(|_| err(format!("bad ring radius '{part}'")))?,
                    );
                }
                if rings.is_empty() || rings.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(err("rings must be strictly increasing"));
                }
                self.rings = rings;
            }
            "samples" => {
                self.samples = value
                    .parse()
                    .map_err(|_| err(format!("samples must be an integer, got '{value}'")))?;
                if self.samples == 0 || self.samples > 10_000_000 {
                    return Err(err("samples must lie in 1..=10^7"));
                }
            }
            "out" => self.out = PathBuf::from(value),
            "filter" => self.filter = value.to_string(),
            "tol" => {
                let tol = fnum("tol")?;
                if !(tol > 0.0) {
                    return Err(err("tol must be > 0"));
                }
                self.tol = Some(tol);
            }
            "fbound" => {
                let b = fnum("fbound")?;
                if !(b > 0.0) {
                    return Err(err("fbound must be > 0"));
                }
                self.f_bound = Some(b);
            }
            "gbound" => {
                let b = fnum("gbound")?;
                if !(b > 0.0) {
                    return Err(err("gbound must be > 0"));
                }
                self.g_bound = Some(b);
            }
            unknown => {
                return Err(err(format!(
                    "unknown key '{unknown}' (keys: symbol/f, g, alpha, n, extent, q, p, s, r, t, \
                     degree, tschedule, tmin, rings, samples, out, filter, tol, fbound, gbound)"
                )))
            }
        }
        Ok(())
    }

    /// Load key=value lines ('#' comments, blank lines allowed).
    pub fn apply_file(&mut self, text: &str) -> Result<(), ConfigError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(format!("line {}: expected key=value", lineno + 1)))?;
            self.apply(k.trim(), v.trim())?;
        }
        Ok(())
    }

    /// Final cross-field validation, including parsing both symbol specs.
    pub fn validate(&self) -> Result<(), ConfigError> {
        crate::expr::resolve_symbol(&self.symbol)
            .map_err(|e| err(format!("symbol '{}': {e}", self.symbol)))?;
        crate::expr::resolve_symbol(&self.symbol_g)
            .map_err(|e| err(format!("symbol g '{}': {e}", self.symbol_g)))?;
        if self.t_schedule.is_empty()
            || self.t_schedule.windows(2).any(|w| w[1] >= w[0])
            || self.t_schedule.iter().any(|t| !(*t > 0.0 && *t <= 1.0))
        {
            return Err(err("tschedule must be strictly decreasing within (0, 1]"));
        }
        Ok(())
    }

    /// Key=value echo of every field, for the run manifest.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut m = BTreeMap::new();
        m.insert("experiment".into(), self.experiment.name().into());
        m.insert("symbol".into(), self.symbol.clone());
        m.insert("g".into(), self.symbol_g.clone());
        m.insert("alpha".into(), self.alpha.to_string());
        m.insert("n".into(), self.basis_n.to_string());
        m.insert("extent".into(), self.extent.to_string());
        m.insert("q".into(), self.q.to_string());
        m.insert("p".into(), self.p.to_string());
        m.insert(
            "s".into(),
            if self.s.is_infinite() {
                "inf".into()
            } else {
                self.s.to_string()
            },
        );
        m.insert("r".into(), self.r.to_string());
        m.insert("t".into(), self.t.to_string());
        m.insert("degree".into(), self.degree.to_string());
        m.insert("tschedule".into(), join(&self.t_schedule));
        m.insert("rings".into(), join(&self.rings));
        m.insert("samples".into(), self.samples.to_string());
        m.insert("out".into(), self.out.display().to_string());
        m.insert("filter".into(), self.filter.clone());
        if let Some(t) = self.tol {
            m.insert("tol".into(), t.to_string());
        }
        if let Some(b) = self.f_bound {
            m.insert("fbound".into(), b.to_string());
        }
        if let Some(b) = self.g_bound {
            m.insert("gbound".into(), b.to_string());
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = ExperimentConfig::new(Experiment::GField);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut cfg = ExperimentConfig::new(Experiment::GField);
        assert!(cfg.apply("nope", "1").is_err());
    }

    #[test]
    fn file_then_cli_override_order() {
        let mut cfg = ExperimentConfig::new(Experiment::GField);
        cfg.apply_file("# comment\nq = 1.5\nextent=4\n").unwrap();
        assert_eq!(cfg.q, 1.5);
        cfg.apply("q", "2").unwrap();
        assert_eq!(cfg.q, 2.0);
    }

    #[test]
    fn range_checks() {
        let mut cfg = ExperimentConfig::new(Experiment::GField);
        assert!(cfg.apply("alpha", "-1").is_err());
        assert!(cfg.apply("q", "0").is_err());
        assert!(cfg.apply("n", "10000").is_err());
        assert!(cfg.apply("rings", "2,1").is_err());
        assert!(cfg.apply("s", "inf").is_ok());
    }

    #[test]
    fn tmin_truncates_the_schedule() {
        let mut cfg = ExperimentConfig::new(Experiment::Quantize);
        cfg.apply("tmin", "0.3").unwrap();
        assert_eq!(cfg.t_schedule, vec![1.0, 0.5, 0.3]);
        cfg.validate().unwrap();
    }

    #[test]
    fn bad_symbol_fails_validation() {
        let mut cfg = ExperimentConfig::new(Experiment::GField);
        cfg.apply("symbol", "frob(z)").unwrap();
        assert!(cfg.validate().is_err());
    }
}
