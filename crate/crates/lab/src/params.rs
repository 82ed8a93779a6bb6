//! `key = value` parameter files.
//!
//! Blank lines and text after `#` are ignored. Keys must come from
//! [`KNOWN_KEYS`] and may appear once. Integers accept plain digits or an
//! exact scientific form such as `1e6`; lists are comma separated.

use std::collections::BTreeMap;
use std::path::Path;

use roughn_core::bump::BumpConfig;
use roughn_core::sieve::SieveParams;

use crate::LabError;

pub const KNOWN_KEYS: &[&str] = &[
    // sieve
    "x",
    "K",
    "w",
    "a",
    "c",
    "gamma",
    "t_exponent",
    "A",
    "k_max",
    "levels",
    // bump
    "conv_panels",
    "u_panels",
    "t_max",
    "t_step",
    // sampling and record search
    "samples",
    "tuples",
    "chunk",
    // moments
    "shifts",
    "s_max",
    "ranges",
    "c3",
    "c_values",
    "radii",
    "g_max",
    "rho_grid",
    "c1",
    "c3_prime",
    // axioms
    "axiom",
    "s",
    "budget",
    // random model
    "rate",
    "scale",
    "N",
    "trials",
    "warmup",
    "trial_chunk",
    // counts and searches
    "x_grid",
    "k_list",
    "variant",
    "threshold",
    "width",
    "n",
    "delta",
    "c0",
    "d",
];

#[derive(Debug, Clone, Default)]
pub struct ParamFile {
    entries: BTreeMap<String, String>,
    raw: Vec<u8>,
}

fn bad(msg: impl Into<String>) -> LabError {
    LabError::Config(msg.into())
}

impl ParamFile {
    pub fn load(path: &Path) -> Result<Self, LabError> {
        let raw = std::fs::read(path).map_err(|e| {
            bad(format!(
                "cannot read parameter file {}: {e}",
                path.display()
            ))
        })?;
        Self::parse_bytes(raw)
    }

    pub fn parse(text: &str) -> Result<Self, LabError> {
        Self::parse_bytes(text.as_bytes().to_vec())
    }

    fn parse_bytes(raw: Vec<u8>) -> Result<Self, LabError> {
        let text = std::str::from_utf8(&raw).map_err(|_| bad("parameter file is not UTF-8"))?;
        let mut entries = BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("line {}: expected key = value", no + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KNOWN_KEYS.contains(&k) {
                return Err(bad(format!("line {}: unknown key {k:?}", no + 1)));
            }
            if entries.insert(k.to_string(), v.to_string()).is_some() {
                return Err(bad(format!("line {}: duplicate key {k:?}", no + 1)));
            }
        }
        Ok(ParamFile { entries, raw })
    }

    /// The file contents as read, for fingerprinting.
    pub fn raw(&self) -> &[u8] {
        &self.raw
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, LabError> {
        self.get(key).map_or(Ok(default), |v| parse_u64(key, v))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, LabError> {
        self.get(key).map_or(Ok(default), |v| parse_f64(key, v))
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.get(key).unwrap_or(default)
    }

    pub fn u64_list_or(&self, key: &str, default: &[u64]) -> Result<Vec<u64>, LabError> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => split(v).map(|s| parse_u64(key, s)).collect(),
        }
    }

    pub fn f64_list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, LabError> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => split(v).map(|s| parse_f64(key, s)).collect(),
        }
    }

    pub fn str_list_or(&self, key: &str, default: &[&str]) -> Vec<String> {
        match self.get(key) {
            None => default.iter().map(|s| s.to_string()).collect(),
            Some(v) => split(v).map(str::to_string).collect(),
        }
    }

    /// `d:k` pairs.
    pub fn pairs_or(&self, key: &str, default: &[(u64, u64)]) -> Result<Vec<(u64, u64)>, LabError> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => split(v)
                .map(|s| {
                    let (a, b) = s
                        .split_once(':')
                        .ok_or_else(|| bad(format!("{key}: expected d:k, got {s:?}")))?;
                    Ok((parse_u64(key, a.trim())?, parse_u64(key, b.trim())?))
                })
                .collect(),
        }
    }

    /// Sieve parameters on top of the toy regime.
    pub fn sieve(&self) -> Result<SieveParams, LabError> {
        let base = SieveParams::toy();
        let levels = match self.get("levels") {
            None => None,
            Some(_) => Some(self.f64_list_or("levels", &[])?),
        };
        let p = SieveParams {
            x: self.u64_or("x", base.x)?,
            big_k: self.u64_or("K", base.big_k as u64)? as usize,
            w: self.u64_or("w", base.w)?,
            a: u32::try_from(self.u64_or("a", base.a as u64)?)
                .map_err(|_| bad("a is too large"))?,
            c: self.f64_or("c", base.c)?,
            gamma: self.f64_or("gamma", base.gamma)?,
            t_exponent: self.f64_or("t_exponent", base.t_exponent)?,
            big_a: self.f64_or("A", base.big_a)?,
            k_max: self.u64_or("k_max", base.k_max)?,
            custom_levels: levels,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn bump(&self) -> Result<BumpConfig, LabError> {
        let base = BumpConfig::default();
        Ok(BumpConfig {
            conv_panels: self.u64_or("conv_panels", base.conv_panels as u64)? as usize,
            u_panels: self.u64_or("u_panels", base.u_panels as u64)? as usize,
            t_max: self.f64_or("t_max", base.t_max)?,
            t_step: self.f64_or("t_step", base.t_step)?,
            ..base
        })
    }
}

fn split(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_f64(key: &str, v: &str) -> Result<f64, LabError> {
    v.parse::<f64>()
        .ok()
        .filter(|f| f.is_finite())
        .ok_or_else(|| bad(format!("{key}: {v:?} is not a finite number")))
}

fn parse_u64(key: &str, v: &str) -> Result<u64, LabError> {
    if let Ok(n) = v.parse::<u64>() {
        return Ok(n);
    }
    let f = parse_f64(key, v).map_err(|_| bad(format!("{key}: {v:?} is not an integer")))?;
    if f >= 0.0 && f.fract() == 0.0 && f < 2f64.powi(53) {
        Ok(f as u64)
    } else {
        Err(bad(format!(
            "{key}: {v:?} is not an exact nonnegative integer"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_lists_and_scientific_integers() {
        let p =
            ParamFile::parse("# toy\nx = 1e6  # window\nshifts = 1, 2,3\ntuples = 7:1, 11:3\n\n")
                .unwrap();
        assert_eq!(p.u64_or("x", 0).unwrap(), 1_000_000);
        assert_eq!(p.u64_list_or("shifts", &[]).unwrap(), vec![1, 2, 3]);
        assert_eq!(p.pairs_or("tuples", &[]).unwrap(), vec![(7, 1), (11, 3)]);
        assert_eq!(p.u64_or("N", 5).unwrap(), 5);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ParamFile::parse("bogus = 1").is_err());
        assert!(ParamFile::parse("x = 1\nx = 2").is_err());
        assert!(ParamFile::parse("x 1").is_err());
        let p = ParamFile::parse("x = 1.5\nc = nan").unwrap();
        assert!(p.u64_or("x", 0).is_err());
        assert!(p.f64_or("c", 0.0).is_err());
    }

    #[test]
    fn sieve_params_are_validated() {
        assert_eq!(
            ParamFile::parse("").unwrap().sieve().unwrap(),
            SieveParams::toy()
        );
        assert!(ParamFile::parse("w = 7\nK = 4\nc = 0.1\ngamma = 3")
            .unwrap()
            .sieve()
            .is_err());
    }
}
