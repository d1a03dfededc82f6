//! `key = value` run configuration. `#` starts a comment; keys are the field
//! names of [`SolverConfig`] and [`NoiseSpec`]. Ranges are written `lo..hi`
//! (a single value means a fixed setting), pairs as `a,b`, triples as `a,b,c`.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::noise::{BandRange, NoiseSpec};
use crate::solver::SolverConfig;
use crate::sstv::DiffWeights;

#[derive(Debug, Clone, PartialEq)]
enum NoiseField {
    CaseId(u8),
    Sigma((f64, f64)),
    Impulse((f64, f64)),
    StripeBands(Option<BandRange>),
    StripeCount((usize, usize)),
    DeadlineBands(Option<BandRange>),
    DeadlineCount((usize, usize)),
    DeadlineWidth((usize, usize)),
    Seed(u64),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub solver: SolverConfig,
    noise: Vec<NoiseField>,
}

impl RunConfig {
    pub fn has_noise_keys(&self) -> bool {
        !self.noise.is_empty()
    }

    /// The `case_id` key, if present.
    pub fn case_id(&self) -> Option<u8> {
        self.noise.iter().find_map(|f| match f {
            NoiseField::CaseId(c) => Some(*c),
            _ => None,
        })
    }

    /// Noise spec for a cube with `bands` bands: the defaults of `case_id`
    /// when given (otherwise no noise), overridden by every other noise key.
    pub fn noise_spec(&self, bands: usize) -> Result<NoiseSpec> {
        let mut spec = match self.case_id() {
            Some(case) => NoiseSpec::default_case(case, bands)?,
            None => NoiseSpec::none(0),
        };
        self.override_noise(&mut spec);
        spec.validate(bands)?;
        Ok(spec)
    }

    /// Applies every noise key of this config on top of `spec`.
    pub fn override_noise(&self, spec: &mut NoiseSpec) {
        for field in &self.noise {
            match *field {
                NoiseField::CaseId(c) => spec.case_id = c,
                NoiseField::Sigma(r) => spec.sigma = r,
                NoiseField::Impulse(r) => spec.impulse = r,
                NoiseField::StripeBands(b) => spec.stripe_bands = b,
                NoiseField::StripeCount(r) => spec.stripe_count = r,
                NoiseField::DeadlineBands(b) => spec.deadline_bands = b,
                NoiseField::DeadlineCount(r) => spec.deadline_count = r,
                NoiseField::DeadlineWidth(r) => spec.deadline_width = r,
                NoiseField::Seed(s) => spec.seed = s,
            }
        }
    }
}

fn scalar<T: FromStr>(v: &str) -> std::result::Result<T, String> {
    v.trim().parse().map_err(|_| format!("cannot parse `{}`", v.trim()))
}

fn range<T: FromStr + Copy + PartialOrd>(v: &str) -> std::result::Result<(T, T), String> {
    let (lo, hi) = match v.split_once("..") {
        Some((a, b)) => (scalar(a)?, scalar(b)?),
        None => {
            let x = scalar(v)?;
            (x, x)
        }
    };
    if lo > hi {
        return Err(format!("range `{v}` is reversed"));
    }
    Ok((lo, hi))
}

fn list<T: FromStr>(v: &str, len: usize) -> std::result::Result<Vec<T>, String> {
    let items: Vec<T> = v.split(',').map(scalar).collect::<std::result::Result<_, _>>()?;
    match items.len() {
        k if k == len => Ok(items),
        _ => Err(format!("expected {len} comma-separated values")),
    }
}

fn pair(v: &str) -> std::result::Result<(usize, usize), String> {
    if v.contains(',') {
        let x = list(v, 2)?;
        Ok((x[0], x[1]))
    } else {
        let x = scalar(v)?;
        Ok((x, x))
    }
}

fn bands(v: &str) -> std::result::Result<Option<BandRange>, String> {
    if v.trim() == "none" {
        return Ok(None);
    }
    let (a, b) = range(v)?;
    Ok(Some(BandRange::new(a, b)))
}

fn boolean(v: &str) -> std::result::Result<bool, String> {
    match v.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("expected true/false, got `{other}`")),
    }
}

fn apply_key(cfg: &mut RunConfig, key: &str, v: &str) -> std::result::Result<(), String> {
    let s = &mut cfg.solver;
    match key {
        "lambda_c" => s.lambda_c = scalar(v)?,
        "tau" => s.tau = scalar(v)?,
        "beta" => s.beta = if v.trim() == "auto" { None } else { Some(scalar(v)?) },
        "gamma" => s.gamma = scalar(v)?,
        "weights" => {
            let w: Vec<f64> = list(v, 3)?;
            s.weights = DiffWeights::new(w[0], w[1], w[2]).map_err(|e| e.to_string())?;
        }
        "patch" => s.patch = pair(v)?,
        "stride" => s.stride = pair(v)?,
        "mu0" => s.mu0 = scalar(v)?,
        "rho" => s.rho = scalar(v)?,
        "mu_max" => s.mu_max = scalar(v)?,
        "eps" => s.eps = scalar(v)?,
        "max_iter" => s.max_iter = scalar(v)?,
        "record_trace" => s.record_trace = boolean(v)?,
        "case_id" => cfg.noise.push(NoiseField::CaseId(scalar(v)?)),
        "sigma" => cfg.noise.push(NoiseField::Sigma(range(v)?)),
        "impulse" => cfg.noise.push(NoiseField::Impulse(range(v)?)),
        "stripe_bands" => cfg.noise.push(NoiseField::StripeBands(bands(v)?)),
        "stripe_count" => cfg.noise.push(NoiseField::StripeCount(range(v)?)),
        "deadline_bands" => cfg.noise.push(NoiseField::DeadlineBands(bands(v)?)),
        "deadline_count" => cfg.noise.push(NoiseField::DeadlineCount(range(v)?)),
        "deadline_width" => cfg.noise.push(NoiseField::DeadlineWidth(range(v)?)),
        "seed" => cfg.noise.push(NoiseField::Seed(scalar(v)?)),
        _ => return Err("unknown key".into()),
    }
    Ok(())
}

/// Parses a run config. The solver part is validated here; noise keys are
/// validated when resolved against a band count.
pub fn parse_run_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut seen = std::collections::HashSet::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Config {
                line,
                key: content.to_string(),
                reason: "expected `key = value`".into(),
            });
        };
        let key = key.trim();
        if !seen.insert(key.to_string()) {
            return Err(Error::Config {
                line,
                key: key.into(),
                reason: "duplicate key".into(),
            });
        }
        apply_key(&mut cfg, key, value).map_err(|reason| Error::Config {
            line,
            key: key.into(),
            reason,
        })?;
    }
    cfg.solver.validate()?;
    Ok(cfg)
}

fn fmt_range<T: PartialEq + std::fmt::Display>((lo, hi): (T, T)) -> String {
    if lo == hi {
        format!("{lo}")
    } else {
        format!("{lo}..{hi}")
    }
}

fn fmt_bands(b: Option<BandRange>) -> String {
    b.map_or_else(|| "none".to_string(), |r| r.to_string())
}

impl NoiseSpec {
    /// `key=value` lines that [`parse_run_config`] reads back to the same spec.
    pub fn to_config(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "case_id={}", self.case_id);
        let _ = writeln!(out, "sigma={}", fmt_range(self.sigma));
        let _ = writeln!(out, "impulse={}", fmt_range(self.impulse));
        let _ = writeln!(out, "stripe_bands={}", fmt_bands(self.stripe_bands));
        let _ = writeln!(out, "stripe_count={}", fmt_range(self.stripe_count));
        let _ = writeln!(out, "deadline_bands={}", fmt_bands(self.deadline_bands));
        let _ = writeln!(out, "deadline_count={}", fmt_range(self.deadline_count));
        let _ = writeln!(out, "deadline_width={}", fmt_range(self.deadline_width));
        let _ = writeln!(out, "seed={}", self.seed);
        out
    }
}

impl SolverConfig {
    pub fn to_config(&self) -> String {
        let w = self.weights.as_array();
        let mut out = String::new();
        let _ = writeln!(out, "lambda_c={}", self.lambda_c);
        let _ = writeln!(out, "tau={}", self.tau);
        let _ = writeln!(out, "beta={}", self.beta.map_or("auto".to_string(), |b| b.to_string()));
        let _ = writeln!(out, "gamma={}", self.gamma);
        let _ = writeln!(out, "weights={},{},{}", w[0], w[1], w[2]);
        let _ = writeln!(out, "patch={},{}", self.patch.0, self.patch.1);
        let _ = writeln!(out, "stride={},{}", self.stride.0, self.stride.1);
        let _ = writeln!(out, "mu0={}", self.mu0);
        let _ = writeln!(out, "rho={}", self.rho);
        let _ = writeln!(out, "mu_max={}", self.mu_max);
        let _ = writeln!(out, "eps={}", self.eps);
        let _ = writeln!(out, "max_iter={}", self.max_iter);
        let _ = writeln!(out, "record_trace={}", self.record_trace);
        out
    }
}
