//! Run configuration: a `key = value` file plus command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};

use bss_core::geo::Metric;
use bss_core::placement::DEFAULT_EXACT_LIMIT;
use bss_core::rebalance::{PassKind, TargetRounding, DEFAULT_ROUTE_EXACT_LIMIT};
use bss_core::synth::SynthConfig;
use bss_core::time::TimeWindow;
use bss_core::GeoPoint;

/// Every key accepted in a config file or by `--set`.
pub const VALID_KEYS: &[&str] = &[
    "trips",
    "stations",
    "candidates",
    "features",
    "tracts",
    "station_state",
    "classification",
    "out",
    "seed",
    "n_max",
    "m_max",
    "l_max",
    "dm_m",
    "dl_m",
    "alpha",
    "beta",
    "gamma",
    "metric",
    "w_demand",
    "isolation_constraint",
    "solver",
    "placement_exact_limit",
    "n_values",
    "window",
    "pass",
    "truck_capacity",
    "truck_start_load",
    "depot_lat",
    "depot_lon",
    "zones",
    "exact_limit",
    "target_rounding",
    "synth_stations",
    "synth_candidates",
    "synth_features",
    "synth_tracts",
    "synth_trips",
    "synth_days",
    "origin_fraction",
    "origin_ratio",
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown config key `{0}`; valid keys: {keys}", keys = VALID_KEYS.join(", "))]
    UnknownKey(String),
    #[error("invalid value for `{key}`: `{value}` ({expected})")]
    BadValue { key: String, value: String, expected: &'static str },
    #[error("{origin}:{line}: expected `key = value`")]
    Syntax { origin: String, line: usize },
}

/// Which placement solver a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverChoice {
    /// Exact when the candidate count fits the exact limit.
    #[default]
    Auto,
    Exact,
    Heuristic,
}

impl SolverChoice {
    pub fn name(self) -> &'static str {
        match self {
            SolverChoice::Auto => "auto",
            SolverChoice::Exact => "exact",
            SolverChoice::Heuristic => "heuristic",
        }
    }
}

impl fmt::Display for SolverChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub trips: Option<PathBuf>,
    pub stations: Option<PathBuf>,
    pub candidates: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub tracts: Option<PathBuf>,
    pub station_state: Option<PathBuf>,
    pub classification: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,

    pub n_max: usize,
    pub m_max: usize,
    pub l_max: usize,
    pub dm_m: f64,
    pub dl_m: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub metric: Metric,
    pub w_demand: f64,
    pub isolation_constraint: bool,
    pub solver: SolverChoice,
    pub placement_exact_limit: usize,
    pub n_values: Vec<usize>,

    /// Classification window of the `demand` command.
    pub window: TimeWindow,
    pub pass: PassKind,
    pub truck_capacity: u32,
    pub truck_start_load: u32,
    pub depot_lat: Option<f64>,
    pub depot_lon: Option<f64>,
    pub zones: usize,
    pub exact_limit: usize,
    pub target_rounding: TargetRounding,

    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            trips: None,
            stations: None,
            candidates: None,
            features: None,
            tracts: None,
            station_state: None,
            classification: None,
            out: PathBuf::from("out"),
            seed: 0,
            n_max: 400,
            m_max: 50,
            l_max: 50,
            dm_m: 300.0,
            dl_m: 1500.0,
            alpha: 1.0,
            beta: 1.5,
            gamma: 2.0,
            metric: Metric::GreatCircle,
            w_demand: 10.0,
            isolation_constraint: true,
            solver: SolverChoice::Auto,
            placement_exact_limit: DEFAULT_EXACT_LIMIT,
            n_values: (5..=60).step_by(5).collect(),
            window: TimeWindow::MORNING,
            pass: PassKind::Midday,
            truck_capacity: 20,
            truck_start_load: 0,
            depot_lat: None,
            depot_lon: None,
            zones: 1,
            exact_limit: DEFAULT_ROUTE_EXACT_LIMIT,
            target_rounding: TargetRounding::Ceil,
            synth: SynthConfig::default(),
        }
    }
}

fn bad(key: &str, value: &str, expected: &'static str) -> ConfigError {
    ConfigError::BadValue { key: key.into(), value: value.into(), expected }
}

fn num<T: std::str::FromStr>(key: &str, value: &str, expected: &'static str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| bad(key, value, expected))
}

fn non_negative(key: &str, value: &str) -> Result<f64, ConfigError> {
    let x: f64 = num(key, value, "non-negative number")?;
    if x >= 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(bad(key, value, "non-negative number"))
    }
}

fn flag(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        _ => Err(bad(key, value, "on/off")),
    }
}

/// `5:60:5` (start:end:step, inclusive) or a comma list.
fn n_values(key: &str, value: &str) -> Result<Vec<usize>, ConfigError> {
    let expected = "start:end:step or a comma-separated list";
    let parts: Vec<&str> = value.split(':').map(str::trim).collect();
    let mut out: Vec<usize> = if parts.len() == 3 {
        let [a, b, s] = [parts[0], parts[1], parts[2]].map(|p| p.parse::<usize>().map_err(|_| bad(key, value, expected)));
        let (a, b, s) = (a?, b?, s?);
        if s == 0 || a > b {
            return Err(bad(key, value, expected));
        }
        (a..=b).step_by(s).collect()
    } else {
        value
            .split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|_| bad(key, value, expected)))
            .collect::<Result<_, _>>()?
    };
    if out.is_empty() {
        return Err(bad(key, value, expected));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

impl RunConfig {
    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn from_file(path: &Path) -> Result<Self, crate::commands::CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => crate::commands::CliError::MissingInput(path.to_path_buf()),
            _ => crate::commands::CliError::Io { path: path.to_path_buf(), source: e },
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let mut config = RunConfig::default();
        config.apply_text(&text, &path.display().to_string(), base)?;
        Ok(config)
    }

    pub fn apply_text(&mut self, text: &str, origin: &str, base: &Path) -> Result<(), ConfigError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { origin: origin.into(), line: i + 1 })?;
            self.set(key.trim(), value.trim(), base)?;
        }
        Ok(())
    }

    /// Applies one `key = value`; path values are joined onto `base` unless
    /// absolute.
    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<(), ConfigError> {
        let path = || Some(base.join(value));
        match key {
            "trips" => self.trips = path(),
            "stations" => self.stations = path(),
            "candidates" => self.candidates = path(),
            "features" => self.features = path(),
            "tracts" => self.tracts = path(),
            "station_state" => self.station_state = path(),
            "classification" => self.classification = path(),
            "out" => self.out = base.join(value),
            "seed" => self.seed = num(key, value, "unsigned integer")?,
            "n_max" => self.n_max = num(key, value, "unsigned integer")?,
            "m_max" => self.m_max = num(key, value, "unsigned integer")?,
            "l_max" => self.l_max = num(key, value, "unsigned integer")?,
            "dm_m" => self.dm_m = non_negative(key, value)?,
            "dl_m" => self.dl_m = non_negative(key, value)?,
            "alpha" => self.alpha = non_negative(key, value)?,
            "beta" => self.beta = non_negative(key, value)?,
            "gamma" => self.gamma = non_negative(key, value)?,
            "metric" => self.metric = Metric::parse(value).ok_or_else(|| bad(key, value, "great_circle or manhattan"))?,
            "w_demand" => self.w_demand = non_negative(key, value)?,
            "isolation_constraint" => self.isolation_constraint = flag(key, value)?,
            "solver" => {
                self.solver = match value {
                    "auto" => SolverChoice::Auto,
                    "exact" => SolverChoice::Exact,
                    "heuristic" => SolverChoice::Heuristic,
                    _ => return Err(bad(key, value, "auto, exact or heuristic")),
                }
            }
            "placement_exact_limit" => self.placement_exact_limit = num(key, value, "unsigned integer")?,
            "n_values" => self.n_values = n_values(key, value)?,
            "window" => self.window = TimeWindow::parse(value).ok_or_else(|| bad(key, value, "morning, evening, full_day or H-H"))?,
            "pass" => self.pass = PassKind::parse(value).ok_or_else(|| bad(key, value, "midday, evening or overnight"))?,
            "truck_capacity" => {
                self.truck_capacity = num(key, value, "positive integer")?;
                if self.truck_capacity == 0 {
                    return Err(bad(key, value, "positive integer"));
                }
            }
            "truck_start_load" => self.truck_start_load = num(key, value, "unsigned integer")?,
            "depot_lat" => self.depot_lat = Some(num(key, value, "latitude")?),
            "depot_lon" => self.depot_lon = Some(num(key, value, "longitude")?),
            "zones" => {
                self.zones = num(key, value, "positive integer")?;
                if self.zones == 0 {
                    return Err(bad(key, value, "positive integer"));
                }
            }
            "exact_limit" => self.exact_limit = num(key, value, "unsigned integer")?,
            "target_rounding" => {
                self.target_rounding = match value {
                    "ceil" => TargetRounding::Ceil,
                    "floor" => TargetRounding::Floor,
                    _ => return Err(bad(key, value, "ceil or floor")),
                }
            }
            "synth_stations" => self.synth.stations = num(key, value, "unsigned integer")?,
            "synth_candidates" => self.synth.candidates = num(key, value, "unsigned integer")?,
            "synth_features" => self.synth.features = num(key, value, "unsigned integer")?,
            "synth_tracts" => self.synth.tracts = num(key, value, "unsigned integer")?,
            "synth_trips" => self.synth.trips = num(key, value, "unsigned integer")?,
            "synth_days" => self.synth.days = num(key, value, "unsigned integer")?,
            "origin_fraction" => {
                let x = non_negative(key, value)?;
                if x > 1.0 {
                    return Err(bad(key, value, "fraction in [0, 1]"));
                }
                self.synth.origin_fraction = x;
            }
            "origin_ratio" => self.synth.origin_ratio = non_negative(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.into())),
        }
        Ok(())
    }

    /// Depot point when both coordinates are set.
    pub fn depot(&self) -> Result<Option<GeoPoint>, ConfigError> {
        match (self.depot_lat, self.depot_lon) {
            (None, None) => Ok(None),
            (Some(lat), Some(lon)) => GeoPoint::new(lat, lon)
                .map(Some)
                .map_err(|_| bad("depot_lat", &format!("{lat},{lon}"), "valid coordinate")),
            _ => Err(bad("depot_lat", "", "depot_lat and depot_lon must be set together")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_text() {
        let mut c = RunConfig::default();
        let text = "# comment\ntrips = data/trips.csv\n n_max=10 # inline\nisolation_constraint = off\nn_values = 5:20:5\n";
        c.apply_text(text, "test", Path::new("/base")).unwrap();
        assert_eq!(c.trips, Some(PathBuf::from("/base/data/trips.csv")));
        assert_eq!(c.n_max, 10);
        assert!(!c.isolation_constraint);
        assert_eq!(c.n_values, [5, 10, 15, 20]);
    }

    #[test]
    fn absolute_paths_are_kept() {
        let mut c = RunConfig::default();
        c.set("stations", "/abs/s.csv", Path::new("/base")).unwrap();
        assert_eq!(c.stations, Some(PathBuf::from("/abs/s.csv")));
    }

    #[test]
    fn unknown_key_lists_valid_keys() {
        let err = RunConfig::default().set("n_maxx", "3", Path::new("")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("n_maxx"));
        for k in VALID_KEYS {
            assert!(msg.contains(k));
        }
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = RunConfig::default();
        assert!(c.set("dm_m", "-3", Path::new("")).is_err());
        assert!(c.set("metric", "euclid", Path::new("")).is_err());
        assert!(c.set("n_values", "5:1:1", Path::new("")).is_err());
        assert!(c.set("zones", "0", Path::new("")).is_err());
        assert!(c.apply_text("just words", "x", Path::new("")).is_err());
        assert_eq!(n_values("n_values", "30, 10,20").unwrap(), [10, 20, 30]);
    }

    #[test]
    fn depot_needs_both_coordinates() {
        let mut c = RunConfig::default();
        assert_eq!(c.depot().unwrap(), None);
        c.depot_lat = Some(38.9);
        assert!(c.depot().is_err());
        c.depot_lon = Some(-77.0);
        assert_eq!(c.depot().unwrap(), Some(GeoPoint { lat: 38.9, lon: -77.0 }));
    }
}
