//! Experiment files: parsing, validation and resolution into runnable plans.

use std::fmt;

use anderson_clt::functions::catalog::{lookup, resolve, CATALOG_NAMES};
use anderson_clt::functions::{ApproxScheme, Polynomial, SmoothFunction, TestFunction};
use anderson_clt::model::cube::DEFAULT_SITE_BUDGET;
use anderson_clt::model::{spectrum_support, SpectrumSupport, SsdSpec};
use anderson_clt::moments::DEFAULT_WALK_BUDGET;
use anderson_clt::clt::MAX_ENUMERATION_SITES;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Clt,
    VarianceScan,
    ApproxConvergence,
    Moments,
    Nubar,
    Martingale,
    Directional,
    HfCheck,
    Ids,
}

pub const KINDS: [(&str, Kind, &str); 9] = [
    ("clt", Kind::Clt, "sample X_f, normality and positivity checks"),
    ("variance-scan", Kind::VarianceScan, "variance of a polynomial statistic over an L grid"),
    ("approx-convergence", Kind::ApproxConvergence, "σ_Q vs σ_f for polynomial approximations of f′"),
    ("moments", Kind::Moments, "exact moments of the DOS and modified measures"),
    ("nubar", Kind::Nubar, "Monte Carlo moments of the modified measure, exact when two-point"),
    ("martingale", Kind::Martingale, "exact martingale decomposition by enumeration"),
    ("directional", Kind::Directional, "directional half-space lower bound by enumeration"),
    ("hf-check", Kind::HfCheck, "trace derivative formula against finite differences"),
    ("ids", Kind::Ids, "empirical IDS moments against the exact DOS moment"),
];

impl Kind {
    pub fn name(self) -> &'static str {
        KINDS.iter().find(|(_, k, _)| *k == self).map(|(n, _, _)| *n).unwrap()
    }
}

/// A test function given either by catalog name or by polynomial coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionRef {
    Name(String),
    Coefficients { polynomial: Vec<f64> },
}

/// The experiment file as written; see `print-config-schema`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: String,
    #[serde(default = "default_dim")]
    pub d: usize,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(rename = "L_grid", default, skip_serializing_if = "Option::is_none")]
    pub l_grid: Option<Vec<usize>>,
    #[serde(default = "SsdSpec::rademacher")]
    pub ssd: SsdSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionRef>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_grid: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_grid: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degrees: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
    #[serde(default)]
    pub scheme: ApproxScheme,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_replicates: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_sites: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instances: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub workers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default)]
    pub assert: bool,
}

fn default_dim() -> usize {
    1
}

/// A validation failure at a field path such as `ssd.std` or `L_grid[2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid config:\n{}", .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<FieldError>),
}

pub fn parse_config(text: &str, path: &str) -> Result<ExperimentConfig, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::Parse {
        path: path.to_string(),
        message: e.to_string(),
    })
}

pub fn load_config(path: &str) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_string(),
        source,
    })?;
    parse_config(&text, path)
}

/// Closest names by edit distance, best first.
fn suggestions<'a>(input: &str, names: impl IntoIterator<Item = &'a str>) -> Vec<&'a str> {
    let mut scored: Vec<(usize, &str)> = names
        .into_iter()
        .map(|n| (strsim::levenshtein(input, n), n))
        .filter(|(d, n)| *d <= 3.max(n.len() / 2))
        .collect();
    scored.sort();
    scored.into_iter().map(|(_, n)| n).collect()
}

pub fn parse_kind(name: &str) -> Result<Kind, FieldError> {
    if let Some((_, k, _)) = KINDS.iter().find(|(n, _, _)| *n == name) {
        return Ok(*k);
    }
    let all: Vec<&str> = KINDS.iter().map(|(n, _, _)| *n).collect();
    let close = suggestions(name, all.iter().copied());
    let hint = match close.first() {
        Some(best) => format!("; did you mean `{best}`?"),
        None => String::new(),
    };
    Err(FieldError {
        path: "kind".into(),
        message: format!("unknown experiment kind `{name}`{hint} valid kinds: {}", all.join(", ")),
    })
}

/// Fully resolved parameters, one variant per experiment kind.
#[derive(Debug, Clone)]
pub enum Plan {
    Clt {
        grid: Vec<usize>,
        f: TestFunction,
        replicates: usize,
        interval: (f64, f64),
        norm_replicates: Option<usize>,
    },
    VarianceScan {
        grid: Vec<usize>,
        poly: Polynomial,
        replicates: usize,
    },
    ApproxConvergence {
        l: usize,
        f: SmoothFunction,
        degrees: Vec<usize>,
        interval: (f64, f64),
        replicates: usize,
        norm_replicates: usize,
        norm_sites: Option<usize>,
        scheme: ApproxScheme,
    },
    Moments {
        k_grid: Vec<usize>,
        p_grid: Vec<u32>,
        l: Option<usize>,
    },
    Nubar {
        l: usize,
        p: u32,
        k_grid: Vec<usize>,
        replicates: usize,
    },
    Martingale {
        l: usize,
        f: TestFunction,
    },
    Directional {
        l: usize,
        poly: Polynomial,
    },
    HfCheck {
        grid: Vec<usize>,
        f: TestFunction,
        instances: usize,
        step: f64,
    },
    Ids {
        grid: Vec<usize>,
        k_grid: Vec<usize>,
    },
}

/// A config that passed validation.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub kind: Kind,
    pub config: ExperimentConfig,
    pub plan: Plan,
}

struct Checker<'a> {
    cfg: &'a ExperimentConfig,
    errors: Vec<FieldError>,
}

impl<'a> Checker<'a> {
    fn fail(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.errors.push(FieldError {
            path: path.into(),
            message: message.into(),
        });
    }

    fn require<T: Clone>(&mut self, value: &Option<T>, path: &str, what: &str) -> Option<T> {
        if value.is_none() {
            self.fail(path, format!("required for kind `{}` ({what})", self.cfg.kind));
        }
        value.clone()
    }

    fn at_least(&mut self, value: Option<usize>, min: usize, path: &str) -> Option<usize> {
        match value {
            Some(v) if v < min => {
                self.fail(path, format!("must be at least {min}, got {v}"));
                None
            }
            v => v,
        }
    }

    /// Sites of the cube `(2L+1)^d` must stay within `budget`.
    fn cube_fits(&mut self, l: usize, path: &str, budget: usize) -> bool {
        let d = self.cfg.d as u32;
        let sites = (2 * l as u128 + 1).checked_pow(d).unwrap_or(u128::MAX);
        if sites > budget as u128 {
            self.fail(path, format!("cube with (2·{l}+1)^{d} = {sites} sites exceeds the limit of {budget}"));
            return false;
        }
        true
    }

    fn grid(&mut self) -> Option<Vec<usize>> {
        let grid = match (&self.cfg.l, &self.cfg.l_grid) {
            (Some(_), Some(_)) => {
                self.fail("L", "give either `L` or `L_grid`, not both");
                return None;
            }
            (Some(l), None) => vec![*l],
            (None, Some(g)) if g.is_empty() => {
                self.fail("L_grid", "must not be empty");
                return None;
            }
            (None, Some(g)) => g.clone(),
            (None, None) => {
                self.fail("L", format!("`L` or `L_grid` is required for kind `{}`", self.cfg.kind));
                return None;
            }
        };
        let path = |i| if self.cfg.l.is_some() { "L".to_string() } else { format!("L_grid[{i}]") };
        let paths: Vec<String> = (0..grid.len()).map(path).collect();
        let mut ok = true;
        for (i, &l) in grid.iter().enumerate() {
            ok &= self.cube_fits(l, &paths[i], DEFAULT_SITE_BUDGET);
        }
        ok.then_some(grid)
    }

    fn single_l(&mut self) -> Option<usize> {
        if self.cfg.l_grid.is_some() {
            self.fail("L_grid", format!("kind `{}` takes a single `L`", self.cfg.kind));
            return None;
        }
        let l = self.require(&self.cfg.l, "L", "cube half-side")?;
        self.cube_fits(l, "L", DEFAULT_SITE_BUDGET).then_some(l)
    }

    fn function(&mut self) -> Option<TestFunction> {
        let f = self.require(&self.cfg.function, "function", "catalog name or `{ polynomial = [...] }`")?;
        match f {
            FunctionRef::Name(name) => match resolve(&name) {
                Some(f) => Some(f),
                None => {
                    let close = suggestions(&name, CATALOG_NAMES);
                    let hint = close.first().map(|b| format!("; did you mean `{b}`?")).unwrap_or_default();
                    self.fail(
                        "function",
                        format!("unknown test function `{name}`{hint} catalog: {}", CATALOG_NAMES.join(", ")),
                    );
                    None
                }
            },
            FunctionRef::Coefficients { polynomial } => {
                if polynomial.is_empty() || polynomial.iter().any(|c| !c.is_finite()) {
                    self.fail("function.polynomial", "coefficients must be a nonempty list of finite numbers");
                    return None;
                }
                Some(TestFunction::Polynomial(Polynomial::new(polynomial)))
            }
        }
    }

    fn polynomial(&mut self) -> Option<Polynomial> {
        match self.function()? {
            TestFunction::Polynomial(p) if p.degree() >= 1 => Some(p),
            TestFunction::Polynomial(_) => {
                self.fail("function", "polynomial must have degree at least 1");
                None
            }
            TestFunction::Smooth(s) => {
                self.fail("function", format!("kind `{}` needs a polynomial, `{}` is not one", self.cfg.kind, s.label()));
                None
            }
        }
    }

    fn smooth(&mut self) -> Option<SmoothFunction> {
        match self.require(&self.cfg.function, "function", "catalog name")? {
            FunctionRef::Name(name) => {
                let f = lookup(&name);
                if f.is_none() {
                    self.fail("function", format!("unknown test function `{name}`; catalog: {}", CATALOG_NAMES.join(", ")));
                }
                f
            }
            FunctionRef::Coefficients { .. } => {
                self.fail("function", "approximation experiments need a catalog function");
                None
            }
        }
    }

    fn interval(&mut self, required: bool) -> Option<(f64, f64)> {
        match self.cfg.interval {
            Some([lo, hi]) if lo.is_finite() && hi.is_finite() && lo < hi => Some((lo, hi)),
            Some([lo, hi]) => {
                self.fail("interval", format!("need finite lo < hi, got [{lo}, {hi}]"));
                None
            }
            None => match spectrum_support(&self.cfg.ssd, self.cfg.d) {
                SpectrumSupport::Interval(lo, hi) => Some((lo, hi)),
                SpectrumSupport::Unbounded if required => {
                    self.fail("interval", "required when the SSD has unbounded support");
                    None
                }
                SpectrumSupport::Unbounded => Some((f64::NEG_INFINITY, f64::INFINITY)),
            },
        }
    }

    fn k_grid(&mut self) -> Option<Vec<usize>> {
        let grid = match (&self.cfg.k, &self.cfg.k_grid) {
            (Some(_), Some(_)) => {
                self.fail("k", "give either `k` or `k_grid`, not both");
                return None;
            }
            (Some(k), None) => vec![*k],
            (None, Some(g)) if !g.is_empty() => g.clone(),
            (None, Some(_)) => {
                self.fail("k_grid", "must not be empty");
                return None;
            }
            (None, None) => {
                self.fail("k", format!("`k` or `k_grid` is required for kind `{}`", self.cfg.kind));
                return None;
            }
        };
        let states = (2 * self.cfg.d as u128 + 1).checked_pow(*grid.iter().max().unwrap() as u32);
        if states.is_none_or(|s| s > DEFAULT_WALK_BUDGET) {
            self.fail(
                if self.cfg.k.is_some() { "k" } else { "k_grid" },
                format!("(2d+1)^k exceeds the walk budget of {DEFAULT_WALK_BUDGET}"),
            );
            return None;
        }
        Some(grid)
    }

    fn two_point_enumeration(&mut self, l: usize) -> bool {
        if !matches!(self.cfg.ssd, SsdSpec::TwoPoint { .. }) {
            self.fail("ssd.kind", "enumeration needs a two_point SSD");
            return false;
        }
        self.cube_fits(l, "L", MAX_ENUMERATION_SITES)
    }
}

/// Field path of an SSD validation message.
fn ssd_field(ssd: &SsdSpec, message: &str) -> &'static str {
    let starts = |name: &str| message.starts_with(&format!("{name} "));
    match ssd {
        SsdSpec::TwoPoint { .. } if starts("a") => "ssd.a",
        SsdSpec::TwoPoint { .. } if starts("b") || message.contains("a != b") => "ssd.b",
        SsdSpec::TwoPoint { .. } => "ssd.prob_a",
        SsdSpec::Uniform { .. } if starts("lo") => "ssd.lo",
        SsdSpec::Uniform { .. } => "ssd.hi",
        SsdSpec::Gaussian { .. } if starts("mean") => "ssd.mean",
        SsdSpec::Gaussian { .. } => "ssd.std",
    }
}

pub fn validate(cfg: ExperimentConfig) -> Result<Experiment, ConfigError> {
    let kind = parse_kind(&cfg.kind).map_err(|e| ConfigError::Invalid(vec![e]))?;
    let mut c = Checker {
        cfg: &cfg,
        errors: Vec::new(),
    };
    if cfg.d == 0 {
        c.fail("d", "must be at least 1");
    }
    if let Err(e) = cfg.ssd.validate() {
        let message = match e {
            anderson_clt::Error::InvalidSsd(m) => m,
            other => other.to_string(),
        };
        c.fail(ssd_field(&cfg.ssd, &message), message);
    }
    if !c.errors.is_empty() {
        return Err(ConfigError::Invalid(c.errors));
    }
    let plan = match kind {
        Kind::Clt => {
            let grid = c.grid();
            let f = c.function();
            let r = c.require(&cfg.r, "R", "replicates");
            let replicates = c.at_least(r, 200, "R");
            // positivity needs an open interval strictly containing the spectrum
            let interval = c.interval(false).map(|(lo, hi)| match cfg.interval {
                Some(_) => (lo, hi),
                None => (lo - 1.0, hi + 1.0),
            });
            let norm_replicates = c.at_least(cfg.norm_replicates, 2, "norm_replicates");
            match (grid, f, replicates, interval) {
                (Some(grid), Some(f), Some(replicates), Some(interval)) => Some(Plan::Clt {
                    grid,
                    f,
                    replicates,
                    interval,
                    norm_replicates,
                }),
                _ => None,
            }
        }
        Kind::VarianceScan => {
            let grid = c.grid();
            let poly = c.polynomial();
            let r = c.require(&cfg.r, "R", "replicates");
            let replicates = c.at_least(r, 8, "R");
            match (grid, poly, replicates) {
                (Some(grid), Some(poly), Some(replicates)) => Some(Plan::VarianceScan { grid, poly, replicates }),
                _ => None,
            }
        }
        Kind::ApproxConvergence => {
            let l = c.single_l();
            let f = c.smooth();
            let r = c.require(&cfg.r, "R", "replicates");
            let replicates = c.at_least(r, 8, "R");
            let interval = c.interval(true);
            let norm_replicates = c.at_least(cfg.norm_replicates.or(replicates), 2, "norm_replicates");
            let norm_sites = c.at_least(cfg.norm_sites, 1, "norm_sites");
            let degrees = c.require(&cfg.degrees, "degrees", "approximation degrees");
            let degrees = degrees.and_then(|d| {
                if d.is_empty() || d[0] == 0 || d.windows(2).any(|w| w[0] >= w[1]) {
                    c.fail("degrees", format!("must be nonempty, positive and strictly ascending, got {d:?}"));
                    None
                } else {
                    Some(d)
                }
            });
            match (l, f, replicates, interval, norm_replicates, degrees) {
                (Some(l), Some(f), Some(replicates), Some(interval), Some(norm_replicates), Some(degrees)) => {
                    Some(Plan::ApproxConvergence {
                        l,
                        f,
                        degrees,
                        interval,
                        replicates,
                        norm_replicates,
                        norm_sites,
                        scheme: cfg.scheme,
                    })
                }
                _ => None,
            }
        }
        Kind::Moments => {
            let k_grid = c.k_grid();
            let p_grid = cfg.p_grid.clone().or(cfg.p.map(|p| vec![p])).unwrap_or_default();
            if cfg.l_grid.is_some() {
                c.fail("L_grid", "kind `moments` takes an optional single `L` (finite volume)");
            }
            k_grid.map(|k_grid| Plan::Moments { k_grid, p_grid, l: cfg.l })
        }
        Kind::Nubar => {
            let l = c.single_l();
            let k_grid = c.k_grid();
            let r = c.require(&cfg.r, "R", "replicates");
            let replicates = c.at_least(r, 2, "R");
            match (l, k_grid, replicates) {
                (Some(l), Some(k_grid), Some(replicates)) => Some(Plan::Nubar {
                    l,
                    p: cfg.p.unwrap_or(1),
                    k_grid,
                    replicates,
                }),
                _ => None,
            }
        }
        Kind::Martingale => {
            let l = c.require(&cfg.l, "L", "cube half-side");
            let fits = l.map(|l| c.two_point_enumeration(l));
            let f = c.function();
            match (l, fits, f) {
                (Some(l), Some(true), Some(f)) => Some(Plan::Martingale { l, f }),
                _ => None,
            }
        }
        Kind::Directional => {
            let l = c.require(&cfg.l, "L", "cube half-side");
            let fits = l.map(|l| c.two_point_enumeration(l));
            let poly = c.polynomial();
            if let (Some(l), Some(p)) = (l, &poly) {
                if l < p.degree() {
                    c.fail("L", format!("must be at least the polynomial degree {}", p.degree()));
                }
            }
            match (l, fits, poly) {
                (Some(l), Some(true), Some(poly)) if l >= poly.degree() => Some(Plan::Directional { l, poly }),
                _ => None,
            }
        }
        Kind::HfCheck => {
            let grid = c.grid();
            let f = c.function();
            let instances = c.at_least(Some(cfg.instances.unwrap_or(100)), 1, "instances");
            let step = cfg.step.unwrap_or(1e-4);
            if !(step > 0.0 && step.is_finite()) {
                c.fail("step", format!("must be a positive finite number, got {step}"));
            }
            match (grid, f, instances) {
                (Some(grid), Some(f), Some(instances)) => Some(Plan::HfCheck { grid, f, instances, step }),
                _ => None,
            }
        }
        Kind::Ids => {
            let grid = c.grid();
            let k_grid = c.k_grid();
            match (grid, k_grid) {
                (Some(grid), Some(k_grid)) => Some(Plan::Ids { grid, k_grid }),
                _ => None,
            }
        }
    };
    match plan {
        Some(plan) if c.errors.is_empty() => Ok(Experiment { kind, config: cfg, plan }),
        _ => Err(ConfigError::Invalid(c.errors)),
    }
}
