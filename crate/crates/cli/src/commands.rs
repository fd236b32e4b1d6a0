use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use serde::Serialize;
use singularcs::diagnostics::{diagnostics_report, write_series_csv, DiagnosticsReport};
use singularcs::dynamics::{
    integrate_with, read_trajectory_csv, trajectory_summary, uniform_times, write_trajectory_csv, Trajectory,
    TrajectorySummary,
};
use singularcs::meanfield::{
    pair_alignment_study, refinement_study, sample_initial, LocalField, PairRow, StudyReport,
};
use singularcs::measures::{dbl_with, EmpiricalMeasure, Space};
use singularcs::weakform::{
    field_residual_report, kinetic_residual_report, test_battery, FieldResidualReport, KineticResidualReport,
};

use crate::config::{
    check_positive, default_bin_widths, DblConfig, DiagnoseConfig, MfstudyConfig, PairstudyConfig, ResidualConfig,
    SimulateConfig,
};
use crate::report::Sink;
use crate::{core, CliError};

#[derive(Serialize)]
struct SimulateResult {
    summary: TrajectorySummary,
    diagnostics: DiagnosticsReport,
}

pub fn simulate(cfg: &SimulateConfig, sink: &mut Sink) -> Result<(), CliError> {
    let p = &cfg.params;
    p.validate().map_err(core)?;
    cfg.initial.validate(p).map_err(core)?;
    check_positive("options.tol", cfg.options.tol)?;
    if cfg.snapshots == 0 {
        return Err(CliError::Config("snapshots must be >= 1".into()));
    }
    let bins = cfg.bin_widths.clone().unwrap_or_else(|| default_bin_widths(p));
    for h in &bins {
        check_positive("bin width", *h)?;
    }

    let initial = sample_initial(&cfg.initial, p, p.n_particles).map_err(core)?;
    let traj = match integrate_with(&initial, p, &cfg.options, &uniform_times(p.horizon, cfg.snapshots)) {
        Ok(t) => t,
        Err(failure) => {
            sink.file("trajectory.csv", |w| write_trajectory_csv(&failure.partial, w))?;
            return Err(core(failure.error));
        }
    };
    sink.file("trajectory.csv", |w| write_trajectory_csv(&traj, w))?;
    let diagnostics = diagnostics_report(&traj, &cfg.eta_ladder, &bins).map_err(core)?;
    sink.file("series.csv", |w| write_series_csv(&diagnostics, w))?;
    let result = SimulateResult {
        summary: trajectory_summary(&traj),
        diagnostics,
    };
    sink.report("simulate", cfg, &result)
}

#[derive(Serialize)]
struct DblResult<'a> {
    a: &'a str,
    b: &'a str,
    value: f64,
    support_size: usize,
    max_violation: f64,
}

fn read_measure(path: &Path) -> Result<EmpiricalMeasure, CliError> {
    EmpiricalMeasure::read_csv(BufReader::new(File::open(path)?)).map_err(core)
}

pub fn dbl(a: &Path, b: &Path, cfg: &DblConfig, sink: &mut Sink) -> Result<(), CliError> {
    let mu = read_measure(a)?;
    let nu = read_measure(b)?;
    let sol = dbl_with(&mu, &nu, &cfg.dbl).map_err(core)?;
    let (sa, sb) = (a.display().to_string(), b.display().to_string());
    let result = DblResult {
        a: &sa,
        b: &sb,
        value: sol.value,
        support_size: sol.len(),
        max_violation: sol.max_violation(),
    };
    sink.report("dbl", cfg, &result)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{:?}", sol.value)?;
    Ok(())
}

fn read_trajectory(path: &Path, cfg_params: &singularcs::dynamics::ModelParams) -> Result<Trajectory, CliError> {
    let mut traj = read_trajectory_csv(
        BufReader::new(File::open(path)?),
        cfg_params,
        crate::config::SimulateConfig::default().options,
    )
    .map_err(core)?;
    traj.params.n_particles = traj.first().len();
    traj.params.validate().map_err(core)?;
    Ok(traj)
}

pub fn diagnose(path: &Path, cfg: &DiagnoseConfig, sink: &mut Sink) -> Result<(), CliError> {
    cfg.params.validate().map_err(core)?;
    let bins = cfg.bin_widths.clone().unwrap_or_else(|| default_bin_widths(&cfg.params));
    for h in &bins {
        check_positive("bin width", *h)?;
    }
    let traj = read_trajectory(path, &cfg.params)?;
    let report = diagnostics_report(&traj, &cfg.eta_ladder, &bins).map_err(core)?;
    sink.file("series.csv", |w| write_series_csv(&report, w))?;
    sink.report("diagnose", cfg, &report)
}

#[derive(Serialize)]
struct ResidualResult {
    input: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    kinetic: Option<KineticResidualReport>,
    fields: FieldResidualReport,
}

/// Phase-space measure with one atom `(node, mean velocity)` per cell.
fn cell_measure(field: &LocalField) -> Result<EmpiricalMeasure, CliError> {
    let mut points = Vec::with_capacity(field.cells.len() * 2 * field.dim);
    for c in &field.cells {
        points.extend_from_slice(&c.point);
        points.extend_from_slice(&c.mean);
    }
    let weights = field.cells.iter().map(|c| c.mass).collect();
    EmpiricalMeasure::new_finite(2 * field.dim, Space::Phase, points, weights).map_err(core)
}

pub fn residual(path: &Path, cfg: &ResidualConfig, sink: &mut Sink) -> Result<(), CliError> {
    cfg.params.validate().map_err(core)?;
    if let Some(h) = cfg.h {
        check_positive("h", h)?;
    }
    let battery = test_battery(&cfg.params, cfg.battery_size, cfg.battery_seed).map_err(core)?;
    let alpha = cfg.params.alpha;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let (kinetic, fields, initial) = if is_json {
        let fields: Vec<LocalField> = serde_json::from_reader(BufReader::new(File::open(path)?))?;
        let first = fields
            .first()
            .ok_or_else(|| CliError::Config(format!("{} holds no fields", path.display())))?;
        let initial = cell_measure(first)?;
        (None, fields, initial)
    } else {
        let traj = read_trajectory(path, &cfg.params)?;
        let kinetic = kinetic_residual_report(&traj, &battery, alpha).map_err(core)?;
        let first = traj.first();
        let radius = (0..first.len())
            .map(|i| first.x(i).iter().map(|c| c * c).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        let h = cfg.h.unwrap_or(if radius > 0.0 {
            2.0 * radius / 16.0
        } else {
            2.0 * cfg.params.position_bound() / 16.0
        });
        let fields = traj
            .snapshots
            .iter()
            .map(|s| LocalField::from_state(s, h, cfg.node))
            .collect::<Result<Vec<_>, _>>()
            .map_err(core)?;
        (Some(kinetic), fields, EmpiricalMeasure::from_particles(first))
    };
    let report = field_residual_report(&fields, &battery, alpha, &initial).map_err(core)?;
    let result = ResidualResult {
        input: path.display().to_string(),
        kinetic,
        fields: report,
    };
    sink.report("residual", cfg, &result)
}

pub fn mfstudy(cfg: &MfstudyConfig, sink: &mut Sink) -> Result<(), CliError> {
    cfg.params.validate().map_err(core)?;
    cfg.spec.validate(&cfg.params).map_err(core)?;
    check_positive("options.tol", cfg.options.tol)?;
    let report = refinement_study(&cfg.spec, &cfg.params, &cfg.options, &cfg.study).map_err(core)?;
    write_study_tables(&report, sink)?;
    sink.report("mfstudy", cfg, &report)
}

fn write_study_tables(r: &StudyReport, sink: &mut Sink) -> Result<(), CliError> {
    sink.file("runs.csv", |w| {
        writeln!(
            w,
            "n,status,accepted_steps,min_distance,continuity_max,momentum_max,dissipation_min_margin,dissipation_worst_excess"
        )?;
        for run in &r.runs {
            let status = match &run.status {
                singularcs::meanfield::RunStatus::Ok => "ok".to_string(),
                singularcs::meanfield::RunStatus::Failed { kind, .. } => kind.clone(),
            };
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                run.n,
                status,
                run.accepted_steps,
                run.min_distance,
                run.continuity_max,
                run.momentum_max,
                run.dissipation_min_margin,
                run.dissipation_worst_excess
            )?;
        }
        Ok(())
    })?;
    sink.file("mk_index.csv", |w| {
        writeln!(w, "n,t,h,mk_index,max_cell_mass,energy")?;
        for run in &r.runs {
            for (k, t) in r.probe_times.iter().enumerate() {
                for (j, h) in r.h_ladder.iter().enumerate() {
                    let (Some(mk), Some(mass), Some(e)) = (
                        run.mk_index.get(k).and_then(|row| row.get(j)),
                        run.max_cell_mass.get(k).and_then(|row| row.get(j)),
                        run.energy.get(k),
                    ) else {
                        continue;
                    };
                    writeln!(w, "{},{t},{h},{mk},{mass},{e}", run.n)?;
                }
            }
        }
        Ok(())
    })?;
    sink.file("cauchy.csv", |w| {
        writeln!(w, "n_coarse,n_fine,t,dbl,energy_diff")?;
        for row in &r.cauchy {
            for (k, t) in r.probe_times.iter().enumerate() {
                writeln!(w, "{},{},{t},{},{}", row.n_coarse, row.n_fine, row.dbl[k], row.energy_diff[k])?;
            }
        }
        Ok(())
    })
}

fn write_pairs(rows: &[PairRow], sink: &mut Sink) -> Result<(), CliError> {
    sink.file("pairs.csv", |w| {
        writeln!(w, "eps,t_half,integrated_dissipation,initial_energy,accepted_steps,min_distance")?;
        for r in rows {
            let t_half = r.t_half.map(|t| t.to_string()).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.eps, t_half, r.integrated_dissipation, r.initial_energy, r.accepted_steps, r.min_distance
            )?;
        }
        Ok(())
    })
}

pub fn pairstudy(cfg: &PairstudyConfig, sink: &mut Sink) -> Result<(), CliError> {
    let mut p = cfg.params.clone();
    p.n_particles = 2;
    p.validate().map_err(core)?;
    check_positive("options.tol", cfg.options.tol)?;
    let mut rows = Vec::with_capacity(cfg.eps_list.len());
    for &eps in &cfg.eps_list {
        match pair_alignment_study(&[eps], &cfg.v1, &cfg.v2, &p, &cfg.options) {
            Ok(mut r) => rows.append(&mut r),
            Err(e) => {
                write_pairs(&rows, sink)?;
                return Err(core(e));
            }
        }
    }
    write_pairs(&rows, sink)?;
    sink.report("pairstudy", cfg, &rows)
}
