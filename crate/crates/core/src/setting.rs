//! Network settings: controller capacities, per-switch arrival rates and the
//! switch-to-controller delay matrix that together define one scenario.
//!
//! Settings are read from small TOML files:
//!
//! ```toml
//! name = "env1"
//! capacities = [9000, 9000]        # requests/second per controller
//! arrival_rates = [5000]           # requests/second per switch
//! delay_matrix = [[0.002, 0.02]]   # seconds, one row per switch
//! t_max = 240.0
//! report_period = 0.05
//! seed = 1
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::SettingError;

/// Default controller status report period, in simulated seconds.
pub const DEFAULT_REPORT_PERIOD: f64 = 0.05;

/// Default episode length, in simulated seconds.
pub const DEFAULT_T_MAX: f64 = 240.0;

const PRESETS: [(&str, &str); 7] = [
    ("env1", include_str!("../presets/env1.toml")),
    ("env2", include_str!("../presets/env2.toml")),
    ("env3", include_str!("../presets/env3.toml")),
    ("env4", include_str!("../presets/env4.toml")),
    ("env5", include_str!("../presets/env5.toml")),
    ("env6", include_str!("../presets/env6.toml")),
    ("env7", include_str!("../presets/env7.toml")),
];

/// One simulation scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkSetting {
    pub name: String,
    /// Requests/second each controller can serve.
    pub capacities: Vec<f64>,
    /// Poisson request rate of each switch, requests/second.
    pub arrival_rates: Vec<f64>,
    /// `delay[s][c]`: one-way latency from switch `s` to controller `c`, seconds.
    pub delay: Vec<Vec<f64>>,
    pub t_max: f64,
    pub report_period: f64,
    pub seed: u64,
    /// Factor applied to `t_max` and to every time window. 1.0 for an unscaled setting.
    pub time_scale: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSetting {
    name: Option<String>,
    capacities: Vec<f64>,
    arrival_rates: Vec<f64>,
    delay_matrix: Vec<Vec<f64>>,
    t_max: Option<f64>,
    report_period: Option<f64>,
    seed: Option<u64>,
}

impl NetworkSetting {
    /// Builds and validates a setting with default horizon and report period.
    pub fn new(
        capacities: Vec<f64>,
        arrival_rates: Vec<f64>,
        delay: Vec<Vec<f64>>,
    ) -> Result<Self, SettingError> {
        let setting = Self {
            name: String::from("custom"),
            capacities,
            arrival_rates,
            delay,
            t_max: DEFAULT_T_MAX,
            report_period: DEFAULT_REPORT_PERIOD,
            seed: 0,
            time_scale: 1.0,
        };
        setting.validate()?;
        Ok(setting)
    }

    pub fn with_t_max(mut self, t_max: f64) -> Result<Self, SettingError> {
        self.t_max = t_max;
        self.validate()?;
        Ok(self)
    }

    pub fn with_report_period(mut self, period: f64) -> Result<Self, SettingError> {
        self.report_period = period;
        self.validate()?;
        Ok(self)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Uniformly shrinks (or stretches) the horizon and the time windows
    /// without touching any rate. Factors compose.
    pub fn time_scaled(mut self, factor: f64) -> Result<Self, SettingError> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(SettingError::Invalid {
                line: None,
                message: format!("time scale must be positive, got {factor}"),
            });
        }
        self.t_max *= factor;
        self.report_period *= factor;
        self.time_scale *= factor;
        Ok(self)
    }

    pub fn num_controllers(&self) -> usize {
        self.capacities.len()
    }

    pub fn num_switches(&self) -> usize {
        self.arrival_rates.len()
    }

    pub fn total_capacity(&self) -> f64 {
        self.capacities.iter().sum()
    }

    pub fn total_arrival_rate(&self) -> f64 {
        self.arrival_rates.iter().sum()
    }

    /// Mean delay weighted by switch traffic share and controller capacity share.
    pub fn weighted_avg_delay(&self) -> f64 {
        let total_cap = self.total_capacity();
        let total_rate = self.total_arrival_rate();
        let n_s = self.num_switches() as f64;
        self.delay
            .iter()
            .zip(&self.arrival_rates)
            .map(|(row, &rate)| {
                let switch_share = if total_rate > 0.0 { rate / total_rate } else { 1.0 / n_s };
                switch_share
                    * row
                        .iter()
                        .zip(&self.capacities)
                        .map(|(d, a)| d * a / total_cap)
                        .sum::<f64>()
            })
            .sum()
    }

    pub fn validate(&self) -> Result<(), SettingError> {
        validate_parts(
            &self.capacities,
            &self.arrival_rates,
            &self.delay,
            self.t_max,
            self.report_period,
        )
        .map_err(|(_, message)| SettingError::Invalid { line: None, message })
    }

    /// Parses a setting from TOML text. Errors carry the line of the offending key.
    pub fn from_toml_str(text: &str) -> Result<Self, SettingError> {
        let raw: RawSetting = toml::from_str(text).map_err(|e| SettingError::Malformed {
            line: e.span().map(|s| line_of_offset(text, s.start)),
            message: e.message().to_string(),
        })?;
        let t_max = raw.t_max.unwrap_or(DEFAULT_T_MAX);
        let report_period = raw.report_period.unwrap_or(DEFAULT_REPORT_PERIOD);
        validate_parts(
            &raw.capacities,
            &raw.arrival_rates,
            &raw.delay_matrix,
            t_max,
            report_period,
        )
        .map_err(|(key, message)| SettingError::Invalid {
            line: line_of_key(text, key),
            message,
        })?;
        Ok(Self {
            name: raw.name.unwrap_or_else(|| String::from("custom")),
            capacities: raw.capacities,
            arrival_rates: raw.arrival_rates,
            delay: raw.delay_matrix,
            t_max,
            report_period,
            seed: raw.seed.unwrap_or(0),
            time_scale: 1.0,
        })
    }

    pub fn to_toml_string(&self) -> String {
        let fmt_vec = |v: &[f64]| {
            let items: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
            format!("[{}]", items.join(", "))
        };
        let rows: Vec<String> = self.delay.iter().map(|r| format!("    {},", fmt_vec(r))).collect();
        format!(
            "name = {:?}\ncapacities = {}\narrival_rates = {}\ndelay_matrix = [\n{}\n]\nt_max = {:?}\nreport_period = {:?}\nseed = {}\n",
            self.name,
            fmt_vec(&self.capacities),
            fmt_vec(&self.arrival_rates),
            rows.join("\n"),
            self.t_max,
            self.report_period,
            self.seed
        )
    }

    /// Loads a setting file, or a shipped preset when `path` names one (`env1` .. `env7`).
    pub fn load(path: impl AsRef<Path>) -> Result<Self, SettingError> {
        let path = path.as_ref();
        if !path.exists() {
            if let Some(name) = path.to_str() {
                let bare = path.extension().is_none() && path.parent().is_none_or(|p| p.as_os_str().is_empty());
                if bare {
                    return Self::preset(name);
                }
            }
        }
        let text = std::fs::read_to_string(path).map_err(|source| SettingError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// One of the shipped settings `env1` .. `env7`.
    pub fn preset(name: &str) -> Result<Self, SettingError> {
        let key = name.trim().to_ascii_lowercase();
        PRESETS
            .iter()
            .find(|(n, _)| *n == key)
            .ok_or_else(|| SettingError::UnknownPreset(name.to_string()))
            .and_then(|(_, text)| Self::from_toml_str(text))
    }

    pub fn preset_names() -> impl Iterator<Item = &'static str> {
        PRESETS.iter().map(|(n, _)| *n)
    }
}

fn validate_parts(
    capacities: &[f64],
    arrival_rates: &[f64],
    delay: &[Vec<f64>],
    t_max: f64,
    report_period: f64,
) -> Result<(), (&'static str, String)> {
    if capacities.is_empty() {
        return Err(("capacities", "at least one controller is required".into()));
    }
    if arrival_rates.is_empty() {
        return Err(("arrival_rates", "at least one switch is required".into()));
    }
    if let Some((i, a)) = capacities.iter().enumerate().find(|(_, a)| !(a.is_finite() && **a > 0.0)) {
        return Err(("capacities", format!("capacity {i} must be positive, got {a}")));
    }
    if let Some((i, l)) = arrival_rates.iter().enumerate().find(|(_, l)| !(l.is_finite() && **l >= 0.0)) {
        return Err(("arrival_rates", format!("arrival rate {i} must be non-negative, got {l}")));
    }
    if delay.len() != arrival_rates.len() {
        return Err((
            "delay_matrix",
            format!(
                "delay matrix has {} rows but there are {} switches",
                delay.len(),
                arrival_rates.len()
            ),
        ));
    }
    for (s, row) in delay.iter().enumerate() {
        if row.len() != capacities.len() {
            return Err((
                "delay_matrix",
                format!(
                    "delay row {s} has {} entries but there are {} controllers",
                    row.len(),
                    capacities.len()
                ),
            ));
        }
        if let Some((c, d)) = row.iter().enumerate().find(|(_, d)| !(d.is_finite() && **d >= 0.0)) {
            return Err(("delay_matrix", format!("delay[{s}][{c}] must be non-negative, got {d}")));
        }
    }
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(("t_max", format!("t_max must be positive, got {t_max}")));
    }
    if !(report_period.is_finite() && report_period > 0.0) {
        return Err(("report_period", format!("report period must be positive, got {report_period}")));
    }
    Ok(())
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn line_of_key(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| {
        let l = l.trim_start();
        l.strip_prefix(key)
            .map(|rest| rest.trim_start().starts_with('='))
            .unwrap_or(false)
    })
    .map(|i| i + 1)
}
