use hhbar_core::constants::PhysicalConstants;
use hhbar_core::eigensolver::ConditioningPolicy;
use hhbar_core::io::{self, fmt_f64, CsvTable};
use hhbar_core::potential::{self, Flavor, PotentialModel};
use hhbar_core::reference::{LEPTONIC_SHIFT, LEVELS_L0, LEVELS_L1, THRESHOLD_NUMBERS};
use hhbar_core::scattering;
use hhbar_core::spectrum::{self, SpectrumConfig, SpectrumResult};
use hhbar_core::wkb::{self, TailParams};
use serde_json::json;

use crate::config::{parse_range, RunConfig};
use crate::error::CliError;
use crate::output::{table_json, Artifact};
use crate::Command;

/// Validates the command's own arguments, then runs it.
pub fn execute(command: &Command, config: &RunConfig) -> Result<Artifact, CliError> {
    let plan = Plan::new(command, config)?;
    plan.run(config)
}

/// A command with its arguments checked and defaults filled in.
enum Plan {
    Potential(Vec<f64>),
    Spectrum,
    Table2,
    Table3,
    Table4,
    Table5(Vec<f64>),
    Scatter { n_max: Vec<usize>, r_max: Vec<f64> },
    Wkb { rows: Vec<u32> },
    Scan { n_max: Vec<usize>, r_max: Vec<f64>, states: Vec<usize> },
}

fn config_error<T>(msg: String) -> Result<T, CliError> {
    Err(CliError::Config(msg))
}

fn uniform(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 || hi == lo {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn strictly_increasing<T: PartialOrd>(values: &[T]) -> bool {
    values.windows(2).all(|w| w[0] < w[1])
}

fn check_scan_lists(config: &RunConfig, n_max: &[usize], r_max: &[f64]) -> Result<(), CliError> {
    if !strictly_increasing(n_max) || n_max.iter().any(|&n| n < 2) {
        return config_error(format!("nmax-list: need strictly increasing values >= 2, got {n_max:?}"));
    }
    if !strictly_increasing(r_max) || r_max.iter().any(|&r| !(r > config.r_min && r.is_finite())) {
        return config_error(format!("rmax-list: need strictly increasing values above r_min, got {r_max:?}"));
    }
    Ok(())
}

fn require_s_wave(config: &RunConfig, command: &str) -> Result<(), CliError> {
    if config.l != 0 {
        return config_error(format!("l: {command} needs l = 0, got {}", config.l));
    }
    Ok(())
}

impl Plan {
    fn new(command: &Command, config: &RunConfig) -> Result<Self, CliError> {
        Ok(match command {
            Command::Potential { r, rgrid } => {
                if !r.is_empty() && rgrid.is_some() {
                    return config_error("r: give either --r or --rgrid".into());
                }
                let grid = if !r.is_empty() {
                    r.clone()
                } else {
                    let (lo, hi, n) = parse_range("rgrid", rgrid.as_deref().unwrap_or("0.1:20:200"))?;
                    uniform(lo, hi, n.unwrap_or(200))
                };
                if let Some(bad) = grid.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
                    return config_error(format!("r: radii must be positive, got {bad}"));
                }
                Plan::Potential(grid)
            }
            Command::Spectrum => Plan::Spectrum,
            Command::Table2 => Plan::Table2,
            Command::Table3 => Plan::Table3,
            Command::Table4 => Plan::Table4,
            Command::Table5 { rgrid } => {
                let grid = match rgrid {
                    None => LEPTONIC_SHIFT.iter().map(|row| row.0).collect(),
                    Some(text) => match parse_range("rgrid", text)? {
                        (lo, hi, None) => LEPTONIC_SHIFT.iter().map(|row| row.0).filter(|r| (lo..=hi).contains(r)).collect(),
                        (lo, hi, Some(n)) => uniform(lo, hi, n),
                    },
                };
                if grid.is_empty() {
                    return config_error("rgrid: no tabulated radius in range".into());
                }
                Plan::Table5(grid)
            }
            Command::Scatter { scan_nmax, scan_rmax } => {
                require_s_wave(config, "scatter")?;
                let n_max = if scan_nmax.is_empty() {
                    [config.n_max.checked_sub(20).filter(|&n| n >= 2), Some(config.n_max)].into_iter().flatten().collect()
                } else {
                    scan_nmax.clone()
                };
                let r_max = if scan_rmax.is_empty() {
                    [config.r_max - 2.0, config.r_max, config.r_max + 2.0].into_iter().filter(|&r| r > config.r_min).collect()
                } else {
                    scan_rmax.clone()
                };
                check_scan_lists(config, &n_max, &r_max)?;
                Plan::Scatter { n_max, r_max }
            }
            Command::Wkb { calibration_rows } => {
                require_s_wave(config, "wkb")?;
                let rows = if calibration_rows.is_empty() {
                    wkb::DEFAULT_CALIBRATION_ROWS.to_vec()
                } else {
                    calibration_rows.clone()
                };
                if config.d.is_none() {
                    if rows.len() < 4 {
                        return config_error(format!("calibration-rows: need at least 4 rows, got {}", rows.len()));
                    }
                    if let Some(nu) = rows.iter().find(|nu| !THRESHOLD_NUMBERS.iter().any(|row| row.0 == **nu)) {
                        return config_error(format!("calibration-rows: no tabulated threshold number for row {nu}"));
                    }
                }
                Plan::Wkb { rows }
            }
            Command::Scan { nmax_list, rmax_list, states } => {
                let n_max = if nmax_list.is_empty() { vec![config.n_max] } else { nmax_list.clone() };
                let r_max = if rmax_list.is_empty() { vec![config.r_max] } else { rmax_list.clone() };
                check_scan_lists(config, &n_max, &r_max)?;
                let states = if states.is_empty() { vec![1, 20, 29] } else { states.clone() };
                if states.contains(&0) {
                    return config_error("states: indices are 1-based".into());
                }
                Plan::Scan { n_max, r_max, states }
            }
        })
    }

    fn run(self, config: &RunConfig) -> Result<Artifact, CliError> {
        match self {
            Plan::Potential(grid) => potential_curves(&grid),
            Plan::Spectrum => spectrum_listing(config),
            Plan::Table2 => table2(config),
            Plan::Table3 => table3(config),
            Plan::Table4 => table4(config),
            Plan::Table5(grid) => table5(&grid),
            Plan::Scatter { n_max, r_max } => scatter(config, &n_max, &r_max),
            Plan::Wkb { rows } => wkb_listing(config, &rows),
            Plan::Scan { n_max, r_max, states } => scan(config, &n_max, &r_max, &states),
        }
    }
}

fn spectrum_config(config: &RunConfig, flavor: Flavor, l: u32) -> SpectrumConfig {
    SpectrumConfig::builtin(flavor, config.basis(l)).with_policy(ConditioningPolicy { cutoff: config.tau, compensated: true })
}

fn solve(config: &RunConfig, flavor: Flavor, l: u32) -> Result<SpectrumResult, CliError> {
    Ok(spectrum_config(config, flavor, l).run()?)
}

/// `E_ν` of 1-based state `nu`, or NaN when the run has fewer states.
fn energy(result: &SpectrumResult, nu: usize) -> f64 {
    result.state(nu).map_or(f64::NAN, |s| s.energy)
}

fn cell(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        fmt_f64(x)
    }
}

/// A row led by an integer state index.
fn push_indexed(table: &mut CsvTable, nu: u32, values: &[f64]) {
    let mut row = vec![nu.to_string()];
    row.extend(values.iter().map(|&x| cell(x)));
    table.push(row);
}

fn push_cells(table: &mut CsvTable, values: &[f64]) {
    table.push(values.iter().map(|&x| cell(x)).collect());
}

fn diagnostics(artifact: &mut Artifact, label: &str, result: &SpectrumResult) {
    let d = &result.diagnostics;
    artifact
        .note(format!("{label}bound_states"), result.bound_count())
        .note(format!("{label}retained_dimension"), d.retained_dimension)
        .note(format!("{label}overlap_condition"), d.overlap_condition)
        .note(format!("{label}eigen_residual"), d.eigen_residual);
}

fn potential_curves(grid: &[f64]) -> Result<Artifact, CliError> {
    let bo = PotentialModel::load_builtin(Flavor::BornOppenheimer);
    let scaled = PotentialModel::load_builtin(Flavor::MassScaled);
    let table = io::potential_curve_table(&bo, &scaled, grid)?;
    Ok(Artifact::new("potential", table))
}

fn spectrum_listing(config: &RunConfig) -> Result<Artifact, CliError> {
    let result = solve(config, config.flavor, config.l)?;
    let mut table = CsvTable::new(["nu", "energy", "eps", "bound"]);
    for s in &result.states {
        table.push(vec![s.nu_index.to_string(), fmt_f64(s.energy), fmt_f64(result.threshold - s.energy), s.bound.to_string()]);
    }
    let mut artifact = Artifact::new("spectrum", table);
    artifact.note("threshold", result.threshold);
    diagnostics(&mut artifact, "", &result);
    artifact.data = Some(serde_json::to_value(&result).expect("results serialize"));
    Ok(artifact)
}

fn both(config: &RunConfig, l: u32) -> Result<(SpectrumResult, SpectrumResult), CliError> {
    let (bo, scaled) = join(|| solve(config, Flavor::BornOppenheimer, l), || solve(config, Flavor::MassScaled, l));
    Ok((bo?, scaled?))
}

fn join<A: Send, B: Send>(a: impl FnOnce() -> A + Send, b: impl FnOnce() -> B + Send) -> (A, B) {
    std::thread::scope(|scope| {
        let handle = scope.spawn(b);
        let first = a();
        (first, handle.join().expect("solver thread panicked"))
    })
}

fn table2(config: &RunConfig) -> Result<Artifact, CliError> {
    let (bo, scaled) = both(config, 0)?;
    let constants = PhysicalConstants::default();
    let mut table = CsvTable::new([
        "nu", "E_BO", "E_scaled", "E_Pn", "delta", "eps_BO", "eps_scaled",
        "ref_E_BO", "ref_E_scaled", "ref_delta", "ref_eps_BO", "ref_eps_scaled",
        "dev_E_BO", "dev_E_scaled", "dev_eps_BO", "dev_eps_scaled",
    ]);
    for row in &LEVELS_L0 {
        let nu = row.0 as usize;
        let (e_bo, e_sc) = (energy(&bo, nu), energy(&scaled, nu));
        let e_pn = potential::protonium_level(row.0, &constants)?;
        let (eps_bo, eps_sc) = (bo.threshold - e_bo, scaled.threshold - e_sc);
        push_indexed(
            &mut table,
            row.0,
            &[
                e_bo, e_sc, e_pn, e_pn - e_bo, eps_bo, eps_sc,
                row.1, row.2, row.4, row.5, row.6,
                e_bo - row.1, e_sc - row.2, eps_bo - row.5, eps_sc - row.6,
            ],
        );
    }
    let mut artifact = Artifact::new("table2", table);
    artifact.note("table_l", 0);
    diagnostics(&mut artifact, "bo_", &bo);
    diagnostics(&mut artifact, "scaled_", &scaled);
    Ok(artifact)
}

fn table3(config: &RunConfig) -> Result<Artifact, CliError> {
    let (bo, scaled) = both(config, 1)?;
    let mut table = CsvTable::new([
        "nu", "E_BO", "E_scaled", "eps_BO", "eps_scaled",
        "ref_E_BO", "ref_E_scaled", "ref_eps_BO", "ref_eps_scaled",
        "dev_E_BO", "dev_E_scaled", "dev_eps_BO", "dev_eps_scaled",
    ]);
    for row in &LEVELS_L1 {
        let nu = row.0 as usize;
        let (e_bo, e_sc) = (energy(&bo, nu), energy(&scaled, nu));
        let (eps_bo, eps_sc) = (bo.threshold - e_bo, scaled.threshold - e_sc);
        push_indexed(
            &mut table,
            row.0,
            &[
                e_bo, e_sc, eps_bo, eps_sc,
                row.1, row.2, row.3, row.4,
                e_bo - row.1, e_sc - row.2, eps_bo - row.3, eps_sc - row.4,
            ],
        );
    }
    let mut artifact = Artifact::new("table3", table);
    artifact.note("table_l", 1);
    diagnostics(&mut artifact, "bo_", &bo);
    diagnostics(&mut artifact, "scaled_", &scaled);
    Ok(artifact)
}

/// Tail constants from the config, or calibrated on `rows` with the run's own
/// dissociation energies.
fn tail(config: &RunConfig, flavor: Flavor, eps: &[f64], rows: &[u32], artifact: &mut Artifact) -> Result<TailParams, CliError> {
    let base = wkb::builtin_tail(flavor, &PhysicalConstants::default());
    let label = flavor.label();
    artifact.note(format!("{label}_beta6"), base.beta6);
    if let (Some(d), Some(big_d)) = (config.d, config.big_d) {
        artifact.note(format!("{label}_tail_source"), "config");
        return Ok(base.with_constants(d, big_d));
    }
    let calibration_rows = wkb::tabulated_rows(flavor, rows, eps).map_err(|e| CliError::Numerical(e.to_string()))?;
    let fit = wkb::calibrate_tail_constants(&calibration_rows, &base)?;
    artifact
        .note(format!("{label}_tail_source"), format!("calibrated on rows {rows:?}"))
        .note(format!("{label}_d"), fit.d)
        .note(format!("{label}_D"), fit.big_d)
        .note(format!("{label}_d_pinned"), fit.pinned)
        .note(format!("{label}_calibration_residual"), fit.max_residual);
    Ok(base.with_constants(fit.d, fit.big_d))
}

fn wkb_length(params: &TailParams, eps: &[f64]) -> Result<f64, CliError> {
    let last = *eps.last().ok_or_else(|| CliError::Numerical("no bound states".into()))?;
    Ok(wkb::wkb_scattering_length(last, params)?)
}

fn table4(config: &RunConfig) -> Result<Artifact, CliError> {
    let (bo, scaled) = both(config, 0)?;
    let mut artifact = Artifact::new("table4", CsvTable::default());
    let mut columns = Vec::new();
    for (flavor, result) in [(Flavor::BornOppenheimer, &bo), (Flavor::MassScaled, &scaled)] {
        let eps = spectrum::dissociation_energies(result);
        let params = tail(config, flavor, &eps, &wkb::DEFAULT_CALIBRATION_ROWS, &mut artifact)?;
        artifact.note(format!("{}_a_wkb", flavor.label()), wkb_length(&params, &eps)?);
        let nu_th = THRESHOLD_NUMBERS
            .iter()
            .map(|row| match eps.get(row.0 as usize - 1) {
                Some(&e) => wkb::threshold_quantum_number(row.0, e, &params).map_err(CliError::from),
                None => Ok(f64::NAN),
            })
            .collect::<Result<Vec<_>, _>>()?;
        columns.push(nu_th);
    }
    let mut table = CsvTable::new(["nu", "nu_th_BO", "nu_th_scaled", "ref_nu_th_BO", "ref_nu_th_scaled", "dev_BO", "dev_scaled"]);
    for (i, row) in THRESHOLD_NUMBERS.iter().enumerate() {
        let (b, s) = (columns[0][i], columns[1][i]);
        push_indexed(&mut table, row.0, &[b, s, row.1, row.2, b - row.1, s - row.2]);
    }
    artifact.table = table;
    Ok(artifact)
}

fn table5(grid: &[f64]) -> Result<Artifact, CliError> {
    let bo = PotentialModel::load_builtin(Flavor::BornOppenheimer);
    let scaled = PotentialModel::load_builtin(Flavor::MassScaled);
    let mut table = CsvTable::new(["R", "delta_lep_mh", "ref_delta_lep_mh", "dev"]);
    for &r in grid {
        let value = potential::delta_lep(&bo, &scaled, r)?;
        let reference = LEPTONIC_SHIFT.iter().find(|row| (row.0 - r).abs() < 1e-9).map_or(f64::NAN, |row| row.1);
        push_cells(&mut table, &[r, value, reference, value - reference]);
    }
    let mut artifact = Artifact::new("table5", table);
    artifact.note("limit_mh", 1e3 / (PhysicalConstants::default().proton_mass + 1.0));
    Ok(artifact)
}

fn scatter(config: &RunConfig, n_max: &[usize], r_max: &[f64]) -> Result<Artifact, CliError> {
    let base = spectrum_config(config, config.flavor, 0);
    let scan = scattering::uncertainty_scan(&base, config.window, n_max, r_max, &[config.window])?;
    let result = base.run()?;
    let state = result.first_continuum().ok_or_else(|| CliError::Numerical("run has no continuum state".into()))?;
    let e = &scan.estimate;
    let top = config.r_max.min(scattering::MAX_WINDOW_RADIUS);
    let grid = uniform(top / 400.0, top, 400);
    let mut table = CsvTable::new(["R", "u", "line"]);
    for &r in &grid {
        push_cells(&mut table, &[r, r * result.amplitude(state, r), e.slope * r + e.intercept]);
    }
    let mut artifact = Artifact::new("scatter", table);
    artifact
        .note("a", e.a)
        .note("uncertainty", e.uncertainty)
        .note("slope", e.slope)
        .note("intercept", e.intercept)
        .note("fit_residual", e.fit_residual)
        .note("continuum_energy", e.continuum_energy);
    if let Some(w) = &e.warning {
        artifact.note("warning", w.clone());
    }
    artifact.data = Some(json!({
        "estimate": e,
        "samples": scan.samples,
        "curve": table_json(&artifact.table),
    }));
    Ok(artifact)
}

fn wkb_listing(config: &RunConfig, rows: &[u32]) -> Result<Artifact, CliError> {
    let result = solve(config, config.flavor, 0)?;
    let eps = spectrum::dissociation_energies(&result);
    let mut artifact = Artifact::new("wkb", CsvTable::default());
    let params = tail(config, config.flavor, &eps, rows, &mut artifact)?;
    let mut table = CsvTable::new(["nu", "eps", "F", "nu_th", "ref_nu_th", "dev"]);
    let mut last_nu_th = f64::NAN;
    for (i, &e) in eps.iter().enumerate() {
        let nu = i as u32 + 1;
        let f = wkb::quantization_function(e, &params)?;
        let nu_th = f64::from(nu) + f;
        last_nu_th = nu_th;
        let reference = THRESHOLD_NUMBERS.iter().find(|row| row.0 == nu).map_or(f64::NAN, |row| match config.flavor {
            Flavor::BornOppenheimer => row.1,
            Flavor::MassScaled => row.2,
        });
        push_indexed(&mut table, nu, &[e, f, nu_th, reference, nu_th - reference]);
    }
    artifact
        .note("a_wkb", wkb_length(&params, &eps)?)
        .note("predicted_bound_states", wkb::predicted_bound_count(last_nu_th))
        .note("variational_bound_states", result.bound_count());
    artifact.table = table;
    Ok(artifact)
}

fn scan(config: &RunConfig, n_max: &[usize], r_max: &[f64], states: &[usize]) -> Result<Artifact, CliError> {
    let base = spectrum_config(config, config.flavor, config.l);
    let points = spectrum::convergence_scan(&base, n_max, r_max, states)?;
    let mut columns = vec!["n_max".to_string(), "r_max".to_string(), "bound_count".to_string()];
    columns.extend(states.iter().map(|nu| format!("E_{nu}")));
    let mut table = CsvTable::new(columns);
    for p in &points {
        let mut row = vec![p.n_max.to_string(), fmt_f64(p.r_max), p.bound_count.to_string()];
        row.extend(p.energies.iter().map(|e| e.map_or(String::new(), fmt_f64)));
        table.push(row);
    }
    let mut artifact = Artifact::new("scan", table);
    artifact.data = Some(serde_json::to_value(&points).expect("scan points serialize"));
    Ok(artifact)
}
