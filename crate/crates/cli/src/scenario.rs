//! Scenario files: `key = value` lines grouped under `[section]` headers.
//!
//! Keys before the first header live in the root section `""`. `#` starts a
//! comment. Lists are comma-separated.

use crate::error::CliError;
use ecopattern::kinetics::{nondimensionalize, DimensionalParams};
use ecopattern::{Params, State};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Task {
    Equilibria,
    Bifurcate,
    Codim2,
    Cycles,
    Ode,
    Transient,
    Dispersion,
    Turing,
    Surface,
    Pde,
    Wna,
    Sweep,
}

impl Task {
    pub const ALL: [Task; 12] = [
        Task::Equilibria,
        Task::Bifurcate,
        Task::Codim2,
        Task::Cycles,
        Task::Ode,
        Task::Transient,
        Task::Dispersion,
        Task::Turing,
        Task::Surface,
        Task::Pde,
        Task::Wna,
        Task::Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Equilibria => "equilibria",
            Task::Bifurcate => "bifurcate",
            Task::Codim2 => "codim2",
            Task::Cycles => "cycles",
            Task::Ode => "ode",
            Task::Transient => "transient",
            Task::Dispersion => "dispersion",
            Task::Turing => "turing",
            Task::Surface => "surface",
            Task::Pde => "pde",
            Task::Wna => "wna",
            Task::Sweep => "sweep",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s.trim())
            .ok_or_else(|| CliError::Parse(format!("unknown task `{}`", s.trim())))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scenario {
    pub sections: BTreeMap<String, BTreeMap<String, String>>,
    /// Original text, kept for the manifest.
    pub source: String,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        sections.insert(String::new(), BTreeMap::new());
        let mut current = String::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| CliError::Parse(format!("line {}: {msg}: `{}`", no + 1, raw.trim()));
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| err("unterminated section header"))?.trim();
                if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    return Err(err("bad section name"));
                }
                current = name.to_string();
                sections.entry(current.clone()).or_default();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected `key = value`"))?;
            let key = key.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(err("bad key"));
            }
            let section = sections.get_mut(&current).expect("section registered on header");
            if section.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(err("duplicate key"));
            }
        }
        Ok(Self { sections, source: text.to_string() })
    }

    pub fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section).and_then(|s| s.get(key)).map(String::as_str)
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    /// Override a value, creating the section if needed.
    pub fn set(&mut self, section: &str, key: &str, value: String) {
        self.sections.entry(section.to_string()).or_default().insert(key.to_string(), value);
    }

    fn parse_value<T: FromStr>(section: &str, key: &str, s: &str) -> Result<T, CliError> {
        s.trim()
            .parse()
            .map_err(|_| CliError::Parse(format!("[{section}] {key}: cannot parse `{s}`")))
    }

    pub fn get<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>, CliError> {
        self.raw(section, key).map(|s| Self::parse_value(section, key, s)).transpose()
    }

    pub fn require<T: FromStr>(&self, section: &str, key: &str) -> Result<T, CliError> {
        self.get(section, key)?
            .ok_or_else(|| CliError::Parse(format!("missing `{key}` in [{section}]")))
    }

    pub fn get_or<T: FromStr>(&self, section: &str, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.get(section, key)?.unwrap_or(default))
    }

    pub fn list<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<Vec<T>>, CliError> {
        self.raw(section, key)
            .map(|s| s.split(',').map(|x| Self::parse_value(section, key, x)).collect())
            .transpose()
    }

    /// `lo, hi` pair.
    pub fn range(&self, section: &str, key: &str) -> Result<Option<(f64, f64)>, CliError> {
        match self.list::<f64>(section, key)? {
            None => Ok(None),
            Some(v) if v.len() == 2 && v[0] < v[1] => Ok(Some((v[0], v[1]))),
            Some(_) => Err(CliError::Parse(format!("[{section}] {key}: expected `lo, hi` with lo < hi"))),
        }
    }

    /// `lo, hi, n` uniform grid, endpoints included.
    pub fn grid(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        match self.list::<f64>(section, key)? {
            None => Ok(None),
            Some(v) if v.len() == 3 && v[2] >= 1.0 && v[2].fract() == 0.0 => Ok(Some(linspace(v[0], v[1], v[2] as usize))),
            Some(_) => Err(CliError::Parse(format!("[{section}] {key}: expected `lo, hi, count`"))),
        }
    }

    pub fn state(&self, section: &str, key: &str) -> Result<Option<State>, CliError> {
        match self.list::<f64>(section, key)? {
            None => Ok(None),
            Some(v) if v.len() == 2 => Ok(Some(State::new(v[0], v[1]))),
            Some(_) => Err(CliError::Parse(format!("[{section}] {key}: expected `u, v`"))),
        }
    }

    /// Task named in the root section, if any.
    pub fn task(&self) -> Result<Option<Task>, CliError> {
        self.raw("", "task").map(str::parse).transpose()
    }

    /// Model parameters from `[params]`, or from `[dimensional]` when present.
    ///
    /// `c` defaults to 0 and `d` to 1 for purely temporal tasks.
    pub fn params(&self) -> Result<Params, CliError> {
        let p = if self.has_section("dimensional") {
            let s = "dimensional";
            let dp = DimensionalParams {
                alpha: self.require(s, "alpha")?,
                beta: self.require(s, "beta")?,
                gamma: self.require(s, "gamma")?,
                delta: self.require(s, "delta")?,
                zeta: self.require(s, "zeta")?,
                sigma: self.require(s, "sigma")?,
                eta: self.require(s, "eta")?,
                chi: self.get_or(s, "chi", 0.0)?,
                d1: self.get_or(s, "d1", 1.0)?,
                d2: self.get_or(s, "d2", 1.0)?,
            };
            nondimensionalize(&dp)
        } else {
            let s = "params";
            Params::new(
                self.require(s, "a")?,
                self.require(s, "b")?,
                self.get_or(s, "c", 0.0)?,
                self.get_or(s, "d", 1.0)?,
                self.require(s, "e")?,
                self.require(s, "f")?,
            )
        };
        p.map_err(|e| CliError::Parse(format!("invalid parameters: {e}")))
    }

    /// Parameters with the spatial pair required.
    pub fn spatial_params(&self) -> Result<Params, CliError> {
        if !self.has_section("dimensional") {
            self.require::<f64>("params", "d")?;
        }
        self.params()
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = "task = turing\nseed = 3 # trailing comment\n\n[params]\na = 7\nb = 5.65\ne = 0.95\nf = 0.98\nd = 80\n\n[pde]\nic = 0.2, 0.1\nf_grid = 0.9, 1.1, 3\n";

    #[test]
    fn parses_sections_and_lists() {
        let s = Scenario::parse(TEXT).unwrap();
        assert_eq!(s.task().unwrap(), Some(Task::Turing));
        assert_eq!(s.require::<u64>("", "seed").unwrap(), 3);
        let p = s.spatial_params().unwrap();
        assert_eq!((p.a, p.c, p.d), (7.0, 0.0, 80.0));
        assert_eq!(s.state("pde", "ic").unwrap(), Some(State::new(0.2, 0.1)));
        assert_eq!(s.grid("pde", "f_grid").unwrap().unwrap(), vec![0.9, 1.0, 1.1]);
    }

    #[test]
    fn missing_parameter_is_a_parse_error() {
        let s = Scenario::parse("[params]\nb = 7\ne = 0.95\nf = 0.8\n").unwrap();
        assert!(matches!(s.params(), Err(CliError::Parse(_))));
    }

    #[test]
    fn malformed_lines_rejected() {
        assert!(Scenario::parse("[params\na = 1").is_err());
        assert!(Scenario::parse("a 1").is_err());
        assert!(Scenario::parse("a = 1\na = 2").is_err());
        assert!(Scenario::parse("task = nonsense").unwrap().task().is_err());
    }

    #[test]
    fn dimensional_parameters() {
        let s = Scenario::parse(
            "[dimensional]\nalpha = 7\nbeta = 7\ngamma = 0.8\ndelta = 1\nzeta = 0.95\nsigma = 1\neta = 1\n",
        )
        .unwrap();
        let p = s.params().unwrap();
        assert!((p.a - 7.0).abs() < 1e-12 && (p.f - 0.8).abs() < 1e-12);
    }
}
