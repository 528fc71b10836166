//! `key = value` run configuration with `#` comments.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{json, Value};

use d2alf::connection::TransportOptions;
use d2alf::duy::DuyOptions;
use d2alf::periods::PeriodOptions;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("bad value `{value}` for `{key}`: {reason}")]
    BadValue { key: String, value: String, reason: String },
}

/// A `start:stop:count` sample range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Range {
    pub fn samples(&self) -> Vec<f64> {
        match self.count {
            0 => vec![],
            1 => vec![self.start],
            n => (0..n)
                .map(|k| self.start + (self.stop - self.start) * k as f64 / (n - 1) as f64)
                .collect(),
        }
    }

    fn parse(s: &str) -> Result<Range, String> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return Err("expected start:stop:count".into());
        }
        let f = |x: &str| x.parse::<f64>().map_err(|e| e.to_string());
        Ok(Range {
            start: f(parts[0])?,
            stop: f(parts[1])?,
            count: parts[2].parse().map_err(|e: std::num::ParseIntError| e.to_string())?,
        })
    }

    fn show(&self) -> String {
        format!("{}:{}:{}", self.start, self.stop, self.count)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub l: f64,
    pub duy_tol: f64,
    pub duy_max_iter: usize,
    pub seed: u64,
    pub threads: usize,
    pub output: String,
    pub csv_output: String,
    pub period_n: usize,
    pub period_level: usize,
    pub period_fd_step: f64,
    pub period_chart_scale: f64,
    pub transport_steps_per_unit: f64,
    pub transport_correctors: usize,
    pub transport_wall_radius: f64,
    pub orbifold_k: usize,
    pub chart_re_alpha0: Range,
    pub chart_im_alpha0: Range,
    pub chart_re_beta_x: Range,
    pub chart_im_beta_x: Range,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 64,
            l: 1.0,
            duy_tol: 1e-9,
            duy_max_iter: 200,
            seed: 42,
            threads: 0,
            output: String::new(),
            csv_output: String::new(),
            period_n: 64,
            period_level: 1,
            period_fd_step: 1e-4,
            period_chart_scale: 1.0,
            transport_steps_per_unit: 64.0,
            transport_correctors: 2,
            transport_wall_radius: 1e-3,
            orbifold_k: 64,
            chart_re_alpha0: Range {
                start: 0.3,
                stop: 0.6,
                count: 2,
            },
            chart_im_alpha0: Range {
                start: 0.2,
                stop: 0.2,
                count: 1,
            },
            chart_re_beta_x: Range {
                start: 0.0,
                stop: 0.5,
                count: 2,
            },
            chart_im_beta_x: Range {
                start: 0.0,
                stop: 0.0,
                count: 1,
            },
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::BadValue {
        key: key.into(),
        value: value.into(),
        reason: e.to_string(),
    })
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg = RunConfig::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let range = |v: &str| {
            Range::parse(v).map_err(|reason| ConfigError::BadValue {
                key: key.into(),
                value: v.into(),
                reason,
            })
        };
        match key {
            "n" => self.n = parse_num(key, value)?,
            "l" => self.l = parse_num(key, value)?,
            "duy_tol" => self.duy_tol = parse_num(key, value)?,
            "duy_max_iter" => self.duy_max_iter = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "threads" => self.threads = parse_num(key, value)?,
            "output" => self.output = value.to_string(),
            "csv_output" => self.csv_output = value.to_string(),
            "period_n" => self.period_n = parse_num(key, value)?,
            "period_level" => self.period_level = parse_num(key, value)?,
            "period_fd_step" => self.period_fd_step = parse_num(key, value)?,
            "period_chart_scale" => self.period_chart_scale = parse_num(key, value)?,
            "transport_steps_per_unit" => self.transport_steps_per_unit = parse_num(key, value)?,
            "transport_correctors" => self.transport_correctors = parse_num(key, value)?,
            "transport_wall_radius" => self.transport_wall_radius = parse_num(key, value)?,
            "orbifold_k" => self.orbifold_k = parse_num(key, value)?,
            "chart_re_alpha0" => self.chart_re_alpha0 = range(value)?,
            "chart_im_alpha0" => self.chart_im_alpha0 = range(value)?,
            "chart_re_beta_x" => self.chart_re_beta_x = range(value)?,
            "chart_im_beta_x" => self.chart_im_beta_x = range(value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Every key with its effective value.
    pub fn echo(&self) -> Value {
        let mut m = BTreeMap::new();
        m.insert("n", json!(self.n));
        m.insert("l", json!(self.l));
        m.insert("duy_tol", json!(self.duy_tol));
        m.insert("duy_max_iter", json!(self.duy_max_iter));
        m.insert("seed", json!(self.seed));
        m.insert("threads", json!(self.threads));
        m.insert("output", json!(self.output));
        m.insert("csv_output", json!(self.csv_output));
        m.insert("period_n", json!(self.period_n));
        m.insert("period_level", json!(self.period_level));
        m.insert("period_fd_step", json!(self.period_fd_step));
        m.insert("period_chart_scale", json!(self.period_chart_scale));
        m.insert("transport_steps_per_unit", json!(self.transport_steps_per_unit));
        m.insert("transport_correctors", json!(self.transport_correctors));
        m.insert("transport_wall_radius", json!(self.transport_wall_radius));
        m.insert("orbifold_k", json!(self.orbifold_k));
        m.insert("chart_re_alpha0", json!(self.chart_re_alpha0.show()));
        m.insert("chart_im_alpha0", json!(self.chart_im_alpha0.show()));
        m.insert("chart_re_beta_x", json!(self.chart_re_beta_x.show()));
        m.insert("chart_im_beta_x", json!(self.chart_im_beta_x.show()));
        json!(m)
    }

    pub fn duy(&self) -> DuyOptions {
        DuyOptions {
            tol: self.duy_tol,
            max_iter: self.duy_max_iter,
        }
    }

    pub fn periods(&self) -> PeriodOptions {
        PeriodOptions {
            n: self.period_n,
            l: self.l,
            level: self.period_level,
            fd_step: self.period_fd_step,
            chart_scale: self.period_chart_scale,
            duy: self.duy(),
        }
    }

    pub fn transport(&self) -> TransportOptions {
        TransportOptions {
            steps_per_unit: self.transport_steps_per_unit,
            correctors: self.transport_correctors,
            wall_radius: self.transport_wall_radius,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_overrides() {
        let mut c = RunConfig::default();
        c.apply_text("# grid\nn = 48  # samples\n\nl=1.5\nchart_re_alpha0 = 0.1:0.4:4\n")
            .unwrap();
        assert_eq!(c.n, 48);
        assert_eq!(c.l, 1.5);
        assert_eq!(c.chart_re_alpha0.samples().len(), 4);
        assert_eq!(c.seed, 42);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let mut c = RunConfig::default();
        assert!(matches!(c.apply_text("grid_size = 3"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(c.apply_text("n 3"), Err(ConfigError::Syntax { line: 1 })));
        assert!(matches!(c.apply_text("n = many"), Err(ConfigError::BadValue { .. })));
    }

    #[test]
    fn echo_lists_every_key() {
        let e = RunConfig::default().echo();
        let mut c = RunConfig::default();
        for (k, v) in e.as_object().unwrap() {
            let s = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            c.set(k, &s).unwrap();
        }
        assert_eq!(c, RunConfig::default());
    }
}
