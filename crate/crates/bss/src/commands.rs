//! Subcommands of the `bss-opt` binary.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use bss_core::demand::{
    assign_tracts, candidate_values, classify_stations, hourly_profile, station_flows, tract_demand, with_demand,
    FlowClass, ValueConfig,
};
use bss_core::placement::{
    solve_exact_with, solve_heuristic, sweep_n, validate_placement, Placement, PlacementModel,
};
use bss_core::rebalance::{
    solve_route_exact_with, solve_route_heuristic, target_for, validate_plan, zone_partition, RebalanceInstance,
    StationState,
};
use bss_core::synth::{generate_synthetic, synthetic_bikes};
use bss_core::{CandidateLocation, FeatureSite, GeoPoint, Station, StationId, Tract, TripRecord};
use clap::{Parser, Subcommand};
use log::{info, warn};

use crate::config::{ConfigError, RunConfig, SolverChoice};
use crate::emit::{self, ZonePlan};
use crate::ingest::{self, IngestError, IngestReport, StationStateRow};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("input file not found: {}", .0.display())]
    MissingInput(PathBuf),
    #[error(transparent)]
    Ingest(IngestError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Solver(#[from] bss_core::Error),
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Missing(path) => CliError::MissingInput(path),
            other => CliError::Ingest(other),
        }
    }
}

impl CliError {
    /// 1 for usage and configuration problems, 2 for data problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Solver(bss_core::Error::InvalidModel(_) | bss_core::Error::ExactLimitExceeded { .. }) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Bike-share station placement and truck rebalancing.
#[derive(Debug, Parser)]
#[command(name = "bss-opt", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Config file of `key = value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Seed for every random choice (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Override a config key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Validate the configured inputs and print counts.
    Ingest,
    /// Tract demand, hourly profile and station classes.
    Demand,
    /// Solve the placement program.
    Place,
    /// Objective as a function of the station budget.
    Sweep,
    /// Plan truck routes for one pass.
    Rebalance,
    /// Write a synthetic data set and a config pointing at it.
    Synth,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = resolve_config(&cli).and_then(|config| run(cli.command, &config));
    match result {
        Ok(summary) => {
            print!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Config file, then `--set` overrides, then `--seed`/`--out`.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    for pair in &cli.set {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got `{pair}`")))?;
        config.set(key.trim(), value.trim(), Path::new(""))?;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.out = out.clone();
    }
    Ok(config)
}

/// Runs one command; returns the text printed on standard output.
pub fn run(command: Command, config: &RunConfig) -> Result<String> {
    match command {
        Command::Ingest => cmd_ingest(config),
        Command::Demand => cmd_demand(config),
        Command::Place => cmd_place(config),
        Command::Sweep => cmd_sweep(config),
        Command::Rebalance => cmd_rebalance(config),
        Command::Synth => cmd_synth(config),
    }
}

fn require<'a>(path: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
    path.as_deref().ok_or_else(|| CliError::Usage(format!("no `{key}` input configured (set it in the config or with --set {key}=PATH)")))
}

fn out_dir(config: &RunConfig) -> Result<&Path> {
    fs::create_dir_all(&config.out).map_err(|e| CliError::Io { path: config.out.clone(), source: e })?;
    Ok(&config.out)
}

fn write(path: PathBuf, bytes: impl AsRef<[u8]>) -> Result<()> {
    info!("writing {}", path.display());
    fs::write(&path, bytes).map_err(|e| CliError::Io { path, source: e })
}

fn write_json(path: PathBuf, value: &serde_json::Value) -> Result<()> {
    info!("writing {}", path.display());
    emit::write_json(&path, value).map_err(|e| CliError::Io { path, source: e })
}

fn log_report(what: &str, path: &Path, report: &IngestReport) {
    info!("{what} {}: {report}", path.display());
    for r in report.rejected.iter().take(20) {
        warn!("{}: record {} rejected: {}", path.display(), r.record, r.reason);
    }
}

fn load_stations(config: &RunConfig) -> Result<Option<Vec<Station>>> {
    let Some(path) = &config.stations else { return Ok(None) };
    let (stations, report) = ingest::parse_stations(path)?;
    log_report("stations", path, &report);
    Ok(Some(stations))
}

fn load_trips(path: &Path, stations: Option<&[Station]>) -> Result<(Vec<TripRecord>, IngestReport)> {
    let (trips, report) = ingest::parse_trips(path, stations)?;
    log_report("trips", path, &report);
    Ok((trips, report))
}

fn load_tracts(config: &RunConfig) -> Result<Option<Vec<Tract>>> {
    let Some(path) = &config.tracts else { return Ok(None) };
    let (tracts, report) = ingest::parse_tracts(path)?;
    log_report("tracts", path, &report);
    Ok(Some(tracts))
}

fn load_features(config: &RunConfig) -> Result<Vec<FeatureSite>> {
    let Some(path) = &config.features else { return Ok(Vec::new()) };
    let (features, report) = ingest::parse_features(path)?;
    log_report("features", path, &report);
    Ok(features)
}

fn report_line(out: &mut String, what: &str, path: &Path, report: &IngestReport) {
    out.push_str(&format!("{what} {}: {report}\n", path.display()));
}

pub fn cmd_ingest(config: &RunConfig) -> Result<String> {
    let mut out = String::new();
    let mut any = false;
    let mut stations = None;
    if let Some(path) = &config.stations {
        any = true;
        let (s, report) = ingest::parse_stations(path)?;
        report_line(&mut out, "stations", path, &report);
        stations = Some(s);
    }
    if let Some(path) = &config.trips {
        any = true;
        let (_, report) = load_trips(path, stations.as_deref())?;
        report_line(&mut out, "trips", path, &report);
    }
    if let Some(path) = &config.candidates {
        any = true;
        let (_, report) = ingest::parse_candidates(path)?;
        report_line(&mut out, "candidates", path, &report);
    }
    if let Some(path) = &config.features {
        any = true;
        let (sites, report) = ingest::parse_features(path)?;
        report_line(&mut out, "features", path, &report);
        out.push_str(&format!("  {} feature points after line sampling\n", sites.len()));
    }
    if let Some(path) = &config.tracts {
        any = true;
        let (_, report) = ingest::parse_tracts(path)?;
        report_line(&mut out, "tracts", path, &report);
    }
    if let Some(path) = &config.station_state {
        any = true;
        let (_, report) = ingest::parse_station_states(path)?;
        report_line(&mut out, "station_state", path, &report);
    }
    if let Some(path) = &config.classification {
        any = true;
        let (_, report) = ingest::parse_classification(path)?;
        report_line(&mut out, "classification", path, &report);
    }
    if !any {
        return Err(CliError::Usage("no inputs configured".into()));
    }
    Ok(out)
}

/// Tracts with stations assigned; without a tract file, one tract per
/// distinct station `tract_id` centered on its stations.
fn tracts_for(stations: &mut [Station], tracts: Option<Vec<Tract>>) -> Vec<Tract> {
    if let Some(tracts) = tracts {
        if !tracts.is_empty() {
            assign_tracts(stations, &tracts);
        }
        return tracts;
    }
    let mut groups: BTreeMap<_, Vec<GeoPoint>> = BTreeMap::new();
    for s in stations.iter() {
        groups.entry(s.tract_id.clone()).or_default().push(s.location);
    }
    groups
        .into_iter()
        .map(|(id, pts)| Tract {
            id,
            centroid: GeoPoint {
                lat: pts.iter().map(|p| p.lat).sum::<f64>() / pts.len() as f64,
                lon: pts.iter().map(|p| p.lon).sum::<f64>() / pts.len() as f64,
            },
            demand: 0.0,
        })
        .collect()
}

pub fn cmd_demand(config: &RunConfig) -> Result<String> {
    let trips_path = require(&config.trips, "trips")?;
    let stations_path = require(&config.stations, "stations")?;
    let mut stations = load_stations(config)?.unwrap_or_default();
    let (trips, report) = load_trips(trips_path, Some(&stations))?;
    let tracts = tracts_for(&mut stations, load_tracts(config)?);

    let demand = tract_demand(&trips, &stations, &tracts);
    let flows = station_flows(&trips, &stations);
    let classes = classify_stations(flows.values(), config.window);
    let profile = hourly_profile(&trips);

    let dir = out_dir(config)?;
    write(dir.join("tract_demand.csv"), emit::tract_demand_csv(&demand))?;
    write(dir.join("hourly_profile.csv"), emit::hourly_profile_csv(&profile))?;
    write_json(dir.join("station_classes.geojson"), &emit::classification_geojson(&classes, &stations))?;

    let origins = classes.iter().filter(|c| c.class == FlowClass::Origin).count();
    let silent = classes.iter().filter(|c| c.zero_flow).count();
    let mut out = String::new();
    report_line(&mut out, "trips", trips_path, &report);
    out.push_str(&format!("stations {} ({}): {} tracts\n", stations.len(), stations_path.display(), tracts.len()));
    out.push_str(&format!("demand total {} over {} tracts\n", demand.values().sum::<u64>(), demand.len()));
    out.push_str(&format!(
        "window {}: {origins} origin, {} destination ({silent} without trips)\n",
        config.window.name(),
        classes.len() - origins
    ));
    Ok(out)
}

/// Candidate values: file value plus feature and demand terms when either
/// features or tracts are configured.
fn valued_candidates(config: &RunConfig) -> Result<Vec<CandidateLocation>> {
    let path = require(&config.candidates, "candidates")?;
    let (candidates, report) = ingest::parse_candidates(path)?;
    log_report("candidates", path, &report);
    if candidates.is_empty() {
        return Err(CliError::Data(format!("{}: no usable candidates", path.display())));
    }
    let features = load_features(config)?;
    let mut tracts = load_tracts(config)?.unwrap_or_default();
    if !tracts.is_empty() {
        if let (Some(trips_path), Some(mut stations)) = (&config.trips, load_stations(config)?) {
            let (trips, _) = load_trips(trips_path, Some(&stations))?;
            assign_tracts(&mut stations, &tracts);
            tracts = with_demand(&tracts, &tract_demand(&trips, &stations, &tracts));
        }
    }
    if features.is_empty() && tracts.is_empty() {
        return Ok(candidates);
    }
    let derived = candidate_values(&candidates, &features, &tracts, ValueConfig { w_demand: config.w_demand });
    Ok(candidates
        .iter()
        .zip(derived)
        .map(|(c, d)| CandidateLocation { base_value: c.base_value + d.base_value, ..d })
        .collect())
}

fn placement_model(config: &RunConfig, candidates: Vec<CandidateLocation>) -> PlacementModel {
    let mut model = PlacementModel::new(candidates);
    model.n_max = config.n_max;
    model.m_max = config.m_max.min(config.n_max);
    model.l_max = config.l_max.min(config.n_max);
    if model.m_max < config.m_max || model.l_max < config.l_max {
        info!("tier caps clamped to n_max = {}", config.n_max);
    }
    model.dm_m = config.dm_m;
    model.dl_m = config.dl_m;
    model.alpha = config.alpha;
    model.beta = config.beta;
    model.gamma = config.gamma;
    model.metric = config.metric;
    model.isolation_constraint = config.isolation_constraint;
    model
}

fn solve_placement(config: &RunConfig, model: &PlacementModel) -> Result<(Placement, &'static str)> {
    let exact = match config.solver {
        SolverChoice::Exact => true,
        SolverChoice::Heuristic => false,
        SolverChoice::Auto => model.candidates.len() <= config.placement_exact_limit,
    };
    if exact {
        Ok((solve_exact_with(model, config.placement_exact_limit)?, "exact"))
    } else {
        Ok((solve_heuristic(model, config.seed)?, "heuristic"))
    }
}

pub fn cmd_place(config: &RunConfig) -> Result<String> {
    let model = placement_model(config, valued_candidates(config)?);
    model.validate()?;
    let (placement, solver) = solve_placement(config, &model)?;
    let violations = validate_placement(&model, &placement);
    if !violations.is_empty() {
        return Err(CliError::Data(format!("placement failed validation: {violations:?}")));
    }
    let dir = out_dir(config)?;
    write_json(dir.join("placement.geojson"), &emit::placement_geojson(&model, &placement))?;
    write_json(dir.join("placement_summary.json"), &emit::placement_summary(&model, &placement, solver))?;
    Ok(format!(
        "{solver} placement over {} candidates: {} stations, objective {}\n",
        model.candidates.len(),
        placement.len(),
        placement.objective
    ))
}

pub fn cmd_sweep(config: &RunConfig) -> Result<String> {
    let model = placement_model(config, valued_candidates(config)?);
    let mut probe = model.with_n_max(config.n_values.last().copied().unwrap_or(1).max(1));
    probe.n_max = probe.n_max.max(1);
    probe.validate()?;
    let points = sweep_n(&model, &config.n_values, config.seed)?;
    let dir = out_dir(config)?;
    write(dir.join("sweep.csv"), emit::sweep_csv(&points))?;
    let mut out = String::new();
    for p in &points {
        out.push_str(&format!("N={:<5} objective {:.3} ({} stations)\n", p.n, p.objective, p.stations));
    }
    Ok(out)
}

/// Station classes for a rebalancing run: classification file, else the
/// state file's `class` column, else trips in the pass window.
fn classes_for(config: &RunConfig, rows: &[StationStateRow]) -> Result<BTreeMap<StationId, FlowClass>> {
    let mut classes: BTreeMap<StationId, FlowClass> =
        rows.iter().filter_map(|r| r.class.map(|c| (r.id.clone(), c))).collect();
    if let Some(path) = &config.classification {
        let (from_file, report) = ingest::parse_classification(path)?;
        log_report("classification", path, &report);
        classes.extend(from_file);
    } else if classes.len() < rows.len() {
        if let Some(trips_path) = &config.trips {
            let stations: Vec<Station> = match load_stations(config)? {
                Some(s) => s,
                None => rows
                    .iter()
                    .map(|r| Station {
                        id: r.id.clone(),
                        name: String::new(),
                        location: r.location,
                        capacity: r.capacity,
                        tract_id: Default::default(),
                    })
                    .collect(),
            };
            let (trips, _) = load_trips(trips_path, Some(&stations))?;
            let flows = station_flows(&trips, &stations);
            for c in classify_stations(flows.values(), config.pass.window()) {
                classes.entry(c.station_id).or_insert(c.class);
            }
        } else if classes.is_empty() {
            return Err(CliError::Usage(
                "no station classes: configure `classification`, a `class` column, or `trips`".into(),
            ));
        }
    }
    Ok(classes)
}

pub fn cmd_rebalance(config: &RunConfig) -> Result<String> {
    let path = require(&config.station_state, "station_state")?;
    let (rows, report) = ingest::parse_station_states(path)?;
    log_report("station_state", path, &report);
    let classes = classes_for(config, &rows)?;
    let depot = config.depot()?;

    let states: Vec<StationState> = rows
        .iter()
        .map(|r| {
            let class = classes.get(&r.id).copied().unwrap_or_else(|| {
                warn!("station {} has no class; treating it as a destination", r.id);
                FlowClass::Destination
            });
            StationState {
                station_id: r.id.clone(),
                location: r.location,
                bikes: r.bikes,
                capacity: r.capacity,
                class,
                target: target_for(class, r.capacity, config.target_rounding),
            }
        })
        .collect();

    let locations: Vec<GeoPoint> = states.iter().map(|s| s.location).collect();
    let partition = zone_partition(&locations, config.zones, config.seed)?;
    if partition.has_empty_zones {
        warn!("{} zones requested for {} stations; some zones are empty", config.zones, states.len());
    }

    let mut zones = Vec::with_capacity(partition.zones.len());
    for (z, members) in partition.zones.iter().enumerate() {
        let subset: Vec<StationState> = members.iter().map(|&i| states[i].clone()).collect();
        let instance = RebalanceInstance::new(subset, config.truck_capacity, config.truck_start_load, depot)?;
        let seed = config.seed.wrapping_add(z as u64);
        let (plan, solver) = if instance.active().len() <= config.exact_limit {
            (solve_route_exact_with(&instance, config.exact_limit)?, "exact")
        } else {
            (solve_route_heuristic(&instance, seed)?, "heuristic")
        };
        let violations = validate_plan(&instance, &plan);
        if !violations.is_empty() {
            return Err(CliError::Data(format!("zone {z} plan failed validation: {violations:?}")));
        }
        zones.push(ZonePlan { zone: z, solver, instance, plan });
    }

    let dir = out_dir(config)?;
    let window = config.pass.window();
    write_json(dir.join("plan.json"), &emit::plan_json(config.pass.name(), window.name(), &zones, partition.has_empty_zones))?;
    write_json(dir.join("route.geojson"), &emit::route_geojson(&zones))?;

    let mut out = String::new();
    for z in &zones {
        out.push_str(&format!(
            "zone {} ({}): {} stops, {} at target, {} bikes moved, {:.1} m, {} unmet\n",
            z.zone,
            z.solver,
            z.plan.stops.len(),
            z.plan.skipped.len(),
            z.plan.moved(),
            z.plan.total_distance_m,
            z.plan.unmet.len()
        ));
    }
    Ok(out)
}

pub fn cmd_synth(config: &RunConfig) -> Result<String> {
    let data = generate_synthetic(&config.synth, config.seed);
    let dir = out_dir(config)?;
    let csv_bytes = |f: &dyn Fn(&mut Vec<u8>) -> csv::Result<()>| -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        f(&mut buf).map_err(|e| CliError::Data(e.to_string()))?;
        Ok(buf)
    };
    write(dir.join("stations.csv"), csv_bytes(&|b| ingest::write_stations(b, &data.stations))?)?;
    write(dir.join("candidates.csv"), csv_bytes(&|b| ingest::write_candidates(b, &data.candidates))?)?;
    write(dir.join("trips.csv"), csv_bytes(&|b| ingest::write_trips(b, &data.trips))?)?;
    write_json(dir.join("features.geojson"), &ingest::features_geojson(&data.features))?;
    write_json(dir.join("tracts.geojson"), &ingest::tracts_geojson(&data.tracts))?;

    let bikes = synthetic_bikes(&data.stations, config.seed);
    let rows: Vec<StationStateRow> = data
        .stations
        .iter()
        .zip(bikes)
        .map(|(s, b)| StationStateRow { id: s.id.clone(), location: s.location, bikes: b, capacity: s.capacity, class: None })
        .collect();
    write(dir.join("station_state.csv"), csv_bytes(&|b| ingest::write_station_states(b, &rows))?)?;

    let conf = format!(
        "# Synthetic data set (seed {seed}).\n\
         trips = trips.csv\n\
         stations = stations.csv\n\
         candidates = candidates.csv\n\
         features = features.geojson\n\
         tracts = tracts.geojson\n\
         station_state = station_state.csv\n\
         out = results\n\
         seed = {seed}\n",
        seed = config.seed
    );
    write(dir.join("bss.conf"), conf)?;

    let origin_heavy: BTreeSet<_> = data.origin_heavy.iter().collect();
    Ok(format!(
        "wrote {} stations ({} origin-heavy), {} candidates, {} features, {} tracts, {} trips to {}\n",
        data.stations.len(),
        origin_heavy.len(),
        data.candidates.len(),
        data.features.len(),
        data.tracts.len(),
        data.trips.len(),
        dir.display()
    ))
}
