//! Run configuration: built-in defaults, an optional `key = value` file, and
//! command-line flags, merged in that order of increasing priority.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hhbar_core::basis::BasisSpec;
use hhbar_core::potential::Flavor;
use hhbar_core::scattering::MAX_WINDOW_RADIUS;
use serde::Serialize;

use crate::error::CliError;

/// Keys accepted in a config file, in echo order.
pub const CONFIG_KEYS: [&str; 12] =
    ["flavor", "l", "n_max", "r_min", "r_max", "tau", "window_lo", "window_hi", "d", "D", "output", "format"];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// One layer of settings. `None` means "not given here".
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Settings {
    pub flavor: Option<Flavor>,
    pub l: Option<u32>,
    pub n_max: Option<usize>,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub tau: Option<f64>,
    pub window_lo: Option<f64>,
    pub window_hi: Option<f64>,
    pub d: Option<f64>,
    pub big_d: Option<f64>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| CliError::Config(format!("{key}: cannot parse `{}`: {e}", value.trim())))
}

impl Settings {
    /// Parses a config file body. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut s = Settings::default();
        let mut seen: Vec<String> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`, got `{line}`", n + 1)))?;
            let key = key.trim();
            if seen.iter().any(|k| k == key) {
                return Err(CliError::Config(format!("{key}: given twice")));
            }
            seen.push(key.to_string());
            match key {
                "flavor" => s.flavor = Some(parse_value(key, value)?),
                "l" => s.l = Some(parse_value(key, value)?),
                "n_max" => s.n_max = Some(parse_value(key, value)?),
                "r_min" => s.r_min = Some(parse_value(key, value)?),
                "r_max" => s.r_max = Some(parse_value(key, value)?),
                "tau" => s.tau = Some(parse_value(key, value)?),
                "window_lo" => s.window_lo = Some(parse_value(key, value)?),
                "window_hi" => s.window_hi = Some(parse_value(key, value)?),
                "d" => s.d = Some(parse_value(key, value)?),
                "D" => s.big_d = Some(parse_value(key, value)?),
                "output" => s.output = Some(PathBuf::from(value.trim())),
                "format" => s.format = Some(parse_value(key, value)?),
                other => {
                    return Err(CliError::Config(format!(
                        "unknown key `{other}` on line {} (known: {})",
                        n + 1,
                        CONFIG_KEYS.join(", ")
                    )))
                }
            }
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("config: cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: Settings) -> Settings {
        Settings {
            flavor: over.flavor.or(self.flavor),
            l: over.l.or(self.l),
            n_max: over.n_max.or(self.n_max),
            r_min: over.r_min.or(self.r_min),
            r_max: over.r_max.or(self.r_max),
            tau: over.tau.or(self.tau),
            window_lo: over.window_lo.or(self.window_lo),
            window_hi: over.window_hi.or(self.window_hi),
            d: over.d.or(self.d),
            big_d: over.big_d.or(self.big_d),
            output: over.output.or(self.output),
            format: over.format.or(self.format),
        }
    }
}

/// Fully resolved and validated settings shared by every command.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub flavor: Flavor,
    pub l: u32,
    pub n_max: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub tau: f64,
    pub window: (f64, f64),
    /// Tail constants; `None` means calibrate.
    pub d: Option<f64>,
    #[serde(rename = "D")]
    pub big_d: Option<f64>,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        let basis = BasisSpec::reference(0);
        Self {
            flavor: Flavor::BornOppenheimer,
            l: 0,
            n_max: basis.n_max,
            r_min: basis.r_min,
            r_max: basis.r_max,
            tau: 1e-12,
            window: hhbar_core::scattering::DEFAULT_WINDOW,
            d: None,
            big_d: None,
            output: None,
            format: Format::Csv,
        }
    }
}

impl RunConfig {
    /// Applies `settings` over the defaults and validates the result.
    pub fn resolve(settings: Settings) -> Result<Self, CliError> {
        let base = RunConfig::default();
        let config = RunConfig {
            flavor: settings.flavor.unwrap_or(base.flavor),
            l: settings.l.unwrap_or(base.l),
            n_max: settings.n_max.unwrap_or(base.n_max),
            r_min: settings.r_min.unwrap_or(base.r_min),
            r_max: settings.r_max.unwrap_or(base.r_max),
            tau: settings.tau.unwrap_or(base.tau),
            window: (settings.window_lo.unwrap_or(base.window.0), settings.window_hi.unwrap_or(base.window.1)),
            d: settings.d,
            big_d: settings.big_d,
            output: settings.output,
            format: settings.format.unwrap_or(base.format),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.n_max < 2 {
            return bad(format!("n_max: need at least 2 exponent pairs, got {}", self.n_max));
        }
        if !(self.r_min > 0.0 && self.r_min.is_finite()) {
            return bad(format!("r_min: must be positive, got {}", self.r_min));
        }
        if !(self.r_max > self.r_min && self.r_max.is_finite()) {
            return bad(format!("r_max: must exceed r_min = {}, got {}", self.r_min, self.r_max));
        }
        if !(0.0..1.0).contains(&self.tau) {
            return bad(format!("tau: must lie in [0, 1), got {}", self.tau));
        }
        let (lo, hi) = self.window;
        if !(lo > 0.0) {
            return bad(format!("window_lo: must be positive, got {lo}"));
        }
        if !(hi > lo && hi <= MAX_WINDOW_RADIUS) {
            return bad(format!("window_hi: need window_lo < window_hi <= {MAX_WINDOW_RADIUS}, got {hi}"));
        }
        match (self.d, self.big_d) {
            (Some(d), _) if !(d >= 0.0 && d.is_finite()) => return bad(format!("d: must be a non-negative length, got {d}")),
            (_, Some(big_d)) if !big_d.is_finite() => return bad(format!("D: must be finite, got {big_d}")),
            (Some(_), None) => return bad("D: required when d is given".into()),
            (None, Some(_)) => return bad("d: required when D is given".into()),
            _ => {}
        }
        if let Some(path) = &self.output {
            check_writable(path)?;
        }
        Ok(())
    }

    pub fn basis(&self, l: u32) -> BasisSpec {
        BasisSpec::new(self.n_max, self.r_min, self.r_max, l)
    }

    /// `(key, value)` pairs in [`CONFIG_KEYS`] order, as echoed into outputs.
    pub fn echo(&self) -> Vec<(&'static str, String)> {
        let tail = |v: Option<f64>| v.map_or("calibrated".to_string(), short);
        vec![
            ("flavor", self.flavor.label().to_string()),
            ("l", self.l.to_string()),
            ("n_max", self.n_max.to_string()),
            ("r_min", short(self.r_min)),
            ("r_max", short(self.r_max)),
            ("tau", short(self.tau)),
            ("window_lo", short(self.window.0)),
            ("window_hi", short(self.window.1)),
            ("d", tail(self.d)),
            ("D", tail(self.big_d)),
            ("output", self.output.as_ref().map_or("-".to_string(), |p| p.display().to_string())),
            ("format", self.format.to_string()),
        ]
    }
}

/// Shortest round-trip text, in exponent form for very small or large values.
fn short(x: f64) -> String {
    if x != 0.0 && !(1e-3..1e6).contains(&x.abs()) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn check_writable(path: &Path) -> Result<(), CliError> {
    if path.is_dir() {
        return Err(CliError::Config(format!("output: {} is a directory", path.display())));
    }
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if !parent.is_dir() {
        return Err(CliError::Config(format!("output: directory {} does not exist", parent.display())));
    }
    let readonly = fs::metadata(parent).map(|m| m.permissions().readonly()).unwrap_or(true);
    if readonly {
        return Err(CliError::Config(format!("output: directory {} is not writable", parent.display())));
    }
    Ok(())
}

/// Parses `lo:hi` or `lo:hi:n`.
pub fn parse_range(key: &str, text: &str) -> Result<(f64, f64, Option<usize>), CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let err = || CliError::Config(format!("{key}: expected `lo:hi` or `lo:hi:n`, got `{text}`"));
    if !(2..=3).contains(&parts.len()) {
        return Err(err());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| err())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| err())?;
    let n = match parts.get(2) {
        Some(p) => Some(p.trim().parse::<usize>().map_err(|_| err())?),
        None => None,
    };
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(CliError::Config(format!("{key}: need 0 < lo <= hi, got {lo}:{hi}")));
    }
    if matches!(n, Some(n) if n < 2) && hi > lo {
        return Err(CliError::Config(format!("{key}: need at least 2 points")));
    }
    Ok((lo, hi, n))
}
