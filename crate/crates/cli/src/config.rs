//! Experiment configuration: per-problem defaults, an optional flat
//! key = value config file, and command-line flags layered on top in that
//! order. Flags win over file values; file values win over defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use riemann_accel_core::integrate::StepVersion;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Problem {
    Rayleigh,
    Hyperbolic,
    Quadratic,
}

impl Problem {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "rayleigh" => Ok(Self::Rayleigh),
            "hyperbolic" => Ok(Self::Hyperbolic),
            "quadratic" => Ok(Self::Quadratic),
            other => Err(format!(
                "unknown problem '{other}', expected rayleigh, hyperbolic, or quadratic"
            )),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Rayleigh => "rayleigh",
            Self::Hyperbolic => "hyperbolic",
            Self::Quadratic => "quadratic",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Bregman(StepVersion),
    Rgd,
    Reference,
}

impl Algorithm {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "bregman-I" => Ok(Self::Bregman(StepVersion::I)),
            "bregman-II" => Ok(Self::Bregman(StepVersion::II)),
            "rgd" => Ok(Self::Rgd),
            "reference" => Ok(Self::Reference),
            other => Err(format!(
                "unknown algorithm '{other}', expected bregman-I, bregman-II, rgd, or reference"
            )),
        }
    }

    pub fn name(self) -> String {
        match self {
            Self::Bregman(v) => format!("bregman-{}", v.label()),
            Self::Rgd => "rgd".into(),
            Self::Reference => "reference".into(),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Fully resolved experiment parameters.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub problem: Problem,
    pub algo: Algorithm,
    pub p: f64,
    pub c: f64,
    pub h: f64,
    pub alpha: f64,
    pub mu: f64,
    pub diameter: f64,
    pub iters: usize,
    pub seed: u64,
    pub n: usize,
    pub spectrum: (f64, f64),
    pub condition: f64,
    pub record_every: usize,
    pub stop_tolerance: f64,
    pub out: PathBuf,
}

/// Unresolved overrides, either from the config file or from flags.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub problem: Option<Problem>,
    pub algo: Option<Algorithm>,
    pub version: Option<StepVersion>,
    pub p: Option<f64>,
    pub c: Option<f64>,
    pub h: Option<f64>,
    pub alpha: Option<f64>,
    pub mu: Option<f64>,
    pub diameter: Option<f64>,
    pub iters: Option<usize>,
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub spectrum_lo: Option<f64>,
    pub spectrum_hi: Option<f64>,
    pub condition: Option<f64>,
    pub record_every: Option<usize>,
    pub stop_tolerance: Option<f64>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    fn layer(&mut self, over: &Overrides) {
        macro_rules! take {
            ($($field:ident),+) => {
                $(if over.$field.is_some() { self.$field = over.$field.clone(); })+
            };
        }
        take!(
            problem, algo, version, p, c, h, alpha, mu, diameter, iters, seed, n, spectrum_lo,
            spectrum_hi, condition, record_every, stop_tolerance, out
        );
    }
}

pub fn parse_config_file(path: &Path) -> Result<Overrides, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            format!("{}:{}: expected 'key = value', got '{raw}'", path.display(), idx + 1)
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }

    let mut over = Overrides::default();
    for (key, value) in &map {
        let at = |e: String| format!("{}: key '{key}': {e}", path.display());
        let float = || value.parse::<f64>().map_err(|e| at(e.to_string()));
        let int = || value.parse::<usize>().map_err(|e| at(e.to_string()));
        match key.as_str() {
            "problem" => over.problem = Some(Problem::parse(value).map_err(at)?),
            "algo" => over.algo = Some(Algorithm::parse(value).map_err(at)?),
            "version" => {
                over.version = Some(match value.as_str() {
                    "1" => StepVersion::I,
                    "2" => StepVersion::II,
                    other => return Err(at(format!("expected 1 or 2, got '{other}'"))),
                })
            }
            "p" => over.p = Some(float()?),
            "C" => over.c = Some(float()?),
            "h" => over.h = Some(float()?),
            "alpha" => over.alpha = Some(float()?),
            "mu" => over.mu = Some(float()?),
            "diameter" => over.diameter = Some(float()?),
            "iters" => over.iters = Some(int()?),
            "seed" => over.seed = Some(value.parse::<u64>().map_err(|e| at(e.to_string()))?),
            "n" => over.n = Some(int()?),
            "spectrum_lo" => over.spectrum_lo = Some(float()?),
            "spectrum_hi" => over.spectrum_hi = Some(float()?),
            "condition" => over.condition = Some(float()?),
            "record_every" => over.record_every = Some(int()?),
            "stop_tolerance" => over.stop_tolerance = Some(float()?),
            "out" => over.out = Some(PathBuf::from(value)),
            other => return Err(format!("{}: unknown key '{other}'", path.display())),
        }
    }
    Ok(over)
}

/// Layer defaults, config file, and flags; fill the step size and output
/// path last because their defaults depend on other resolved values.
pub fn resolve(file: Option<Overrides>, flags: Overrides) -> Result<ExperimentConfig, String> {
    let mut merged = Overrides::default();
    if let Some(f) = file {
        merged.layer(&f);
    }
    merged.layer(&flags);

    let problem = merged.problem.unwrap_or(Problem::Rayleigh);
    let mut algo = merged.algo.unwrap_or(Algorithm::Bregman(StepVersion::I));
    if let Some(v) = merged.version {
        match algo {
            Algorithm::Bregman(_) => algo = Algorithm::Bregman(v),
            _ => {
                return Err(format!(
                    "--version applies to the bregman algorithms, not {algo}"
                ))
            }
        }
    }

    let p = merged.p.unwrap_or(2.0);
    let (def_h, def_iters) = match problem {
        // Higher p needs a finer step to stay stable.
        Problem::Rayleigh => (if p >= 4.0 { 1e-4 } else { 1e-3 }, 20_000),
        Problem::Hyperbolic => (1e-3, 15_000),
        Problem::Quadratic => (1e-2, 5_000),
    };

    let config = ExperimentConfig {
        problem,
        algo,
        p,
        c: merged.c.unwrap_or(0.25),
        h: merged.h.unwrap_or(def_h),
        alpha: merged.alpha.unwrap_or(1.0),
        mu: merged.mu.unwrap_or(1.0),
        diameter: merged.diameter.unwrap_or(1.0),
        iters: merged.iters.unwrap_or(def_iters),
        seed: merged.seed.unwrap_or(42),
        n: merged.n.unwrap_or(10),
        spectrum: (
            merged.spectrum_lo.unwrap_or(1.0),
            merged.spectrum_hi.unwrap_or(100.0),
        ),
        condition: merged.condition.unwrap_or(10.0),
        record_every: merged.record_every.unwrap_or(10),
        stop_tolerance: merged.stop_tolerance.unwrap_or(0.0),
        out: merged
            .out
            .unwrap_or_else(|| PathBuf::from(format!("{}-{}.csv", problem.name(), algo.name()))),
    };

    if !(config.h > 0.0 && config.h.is_finite()) {
        return Err(format!("h must be positive and finite, got {}", config.h));
    }
    if config.iters == 0 {
        return Err("iters must be at least 1".into());
    }
    if config.record_every == 0 {
        return Err("record_every must be at least 1".into());
    }
    if !(config.diameter > 0.0 && config.diameter.is_finite()) {
        return Err(format!("diameter must be positive, got {}", config.diameter));
    }
    if config.n < 2 && config.problem == Problem::Rayleigh {
        return Err(format!("rayleigh needs n >= 2, got {}", config.n));
    }
    if !(config.spectrum.0 > 0.0 && config.spectrum.1 >= config.spectrum.0) {
        return Err(format!(
            "spectrum bounds must satisfy 0 < lo <= hi, got [{}, {}]",
            config.spectrum.0, config.spectrum.1
        ));
    }
    Ok(config)
}
