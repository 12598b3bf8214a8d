//! Experiment execution: descent (fresh or resumed from an archive), the
//! selected analyses, and the output files. The field archive, contour
//! file, and report are deterministic functions of the configuration, so
//! identical inputs produce byte-identical outputs.

use std::fmt::Display;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use morrey_core::{
    check_cylindrical_symmetry, check_midplane_gradient_sign, check_nonvanishing_gradient,
    check_pointwise_bounds, check_quasiconcavity, check_reflection_antisymmetry, check_stability,
    default_initial_guess, dirac_mass_from_gamma, discrete_energy, extremal_1d_general,
    fit_singular_exponent, holder_seminorm, load_field, make_grid, morrey_estimate_gap,
    physical_dirichlet_norm, run_descent, save_field, AnalysisError, ArchiveError, ArchiveHeader,
    CheckTolerances, ConstraintSet, DescentConfig, DescentError, DescentState, EnergyParams,
    HolderReport, Node, ScalarField,
};
use thiserror::Error;

use crate::config::{AnalysisKind, ConfigError, ExperimentConfig};
use crate::contour::{extract_contours, render_contours};

/// Slack below `-STABILITY_REL_TOL * rhs` fails the stability check.
const STABILITY_REL_TOL: f64 = 1e-3;
/// Fitted singular exponents may deviate this much (relative) from the
/// predicted slope `(p - n) / (p - 1)`.
const SINGULAR_REL_TOL: f64 = 0.15;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid problem: {0}")]
    Validation(String),
    #[error(transparent)]
    Descent(#[from] DescentError),
    #[error(transparent)]
    Archive(#[from] ArchiveError),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

impl RunError {
    /// Process exit code: 1 validation, 2 divergence, 3 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Descent(DescentError::Diverged { .. }) => 2,
            RunError::Descent(DescentError::Checkpoint(ArchiveError::Io(_))) => 3,
            RunError::Archive(ArchiveError::Io(_)) => 3,
            RunError::Io(_) => 3,
            _ => 1,
        }
    }
}

/// Where the outputs landed and how the run went.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub archive_path: PathBuf,
    pub contour_path: Option<PathBuf>,
    pub report_path: PathBuf,
    pub iterations: u64,
    pub final_energy: f64,
    pub all_pass: bool,
}

/// Runs descent from the configured initial state (or a resumed archive),
/// applies the selected analyses, and writes the archive, contours (2D),
/// and report into the output directory.
pub fn run_experiment(
    config: &ExperimentConfig,
    resume: Option<&Path>,
) -> Result<RunSummary, RunError> {
    config.validate()?;
    let grid = make_grid(config.n, config.ell, config.k)
        .map_err(|e| RunError::Validation(e.to_string()))?;
    let constraints = config.constraints.resolve(&grid)?;
    let params = EnergyParams::with_smoothing(config.p, config.smoothing);
    params
        .validate(grid.dim())
        .map_err(|e| RunError::Validation(e.to_string()))?;

    let (initial, base_iteration) = match resume {
        Some(path) => {
            let archive = load_field(path)?;
            let got = *archive.field.grid();
            if got != grid {
                return Err(RunError::Validation(format!(
                    "archived grid (n = {}, ell = {}, k = {}) does not match the configured problem",
                    got.dim(),
                    got.ell(),
                    got.k()
                )));
            }
            if archive.header.p != config.p {
                return Err(RunError::Validation(format!(
                    "archived exponent p = {} does not match configured p = {}",
                    archive.header.p, config.p
                )));
            }
            (archive.field, archive.header.iteration)
        }
        None => {
            let field = if grid.dim() == 2 && constraints.is_canonical(&grid) {
                default_initial_guess(&grid, &constraints)?
            } else if grid.dim() == 1 && constraints.len() == 2 {
                // The two-pin ramp is the exact discrete minimizer, so descent
                // starts at (and certifies) the stationary point.
                let (a, b) = (constraints.entries()[0], constraints.entries()[1]);
                let (xa, xb) = (grid.coord(a.0.i), grid.coord(b.0.i));
                ScalarField::from_fn_1d(grid, |x| extremal_1d_general(xa, xb, a.1, b.1, x))
            } else {
                let mut field = ScalarField::zeros(grid);
                constraints.apply(&mut field);
                field
            };
            (field, 0)
        }
    };

    fs::create_dir_all(&config.out_dir)?;

    // A resumed run spends only the budget the archive has not used yet,
    // so split runs land on the same final iterate as uninterrupted ones.
    let remaining = config.max_iters.saturating_sub(base_iteration);
    let state = if remaining == 0 {
        let mut field = initial;
        constraints.apply(&mut field);
        let energy =
            discrete_energy(&field, &params).map_err(|e| RunError::Validation(e.to_string()))?;
        DescentState {
            field,
            iteration: 0,
            energy_history: vec![(0, energy)],
            grad_inf_history: Vec::new(),
        }
    } else {
        let descent_config = DescentConfig {
            tau: config.tau,
            max_iters: remaining,
            grad_tol: config.grad_tol,
            grad_tol_rel: config.grad_tol_rel,
            adaptive: config.adaptive,
            checkpoint_every: config.checkpoint_every,
            checkpoint_dir: (config.checkpoint_every > 0).then(|| config.out_dir.clone()),
            seed: config.seed,
        };
        run_descent(&initial, &params, &descent_config, &constraints)?
    };

    let iterations = base_iteration + state.iteration;
    let final_energy = state
        .energy_history
        .last()
        .map(|&(_, e)| e)
        .unwrap_or(f64::NAN);

    let archive_path = config.out_dir.join("field.archive");
    let header = ArchiveHeader {
        p: config.p,
        iteration: iterations,
        energy: final_energy,
    };
    save_field(&state.field, &header, &archive_path)?;

    let contour_path = if grid.dim() == 2 {
        let contours = extract_contours(&state.field, &config.levels)?;
        let path = config.out_dir.join("contours.txt");
        fs::write(&path, render_contours(&contours))?;
        Some(path)
    } else {
        None
    };

    let (report, all_pass) = build_report(config, &state, base_iteration, &params, &constraints)?;
    let report_path = config.out_dir.join("report.txt");
    fs::write(&report_path, report)?;

    Ok(RunSummary {
        archive_path,
        contour_path,
        report_path,
        iterations,
        final_energy,
        all_pass,
    })
}

/// Accumulates `key = value` lines and verdict counts.
struct ReportBuilder {
    out: String,
    checks: usize,
    passed: usize,
}

impl ReportBuilder {
    fn new() -> Self {
        ReportBuilder {
            out: String::from("morrey report v1\n"),
            checks: 0,
            passed: 0,
        }
    }

    fn section(&mut self, name: &str) {
        let _ = writeln!(self.out, "\n[{name}]");
    }

    fn line(&mut self, key: &str, value: impl Display) {
        let _ = writeln!(self.out, "{key} = {value}");
    }

    fn verdict(&mut self, key: &str, pass: bool) {
        self.checks += 1;
        if pass {
            self.passed += 1;
        }
        self.line(key, if pass { "PASS" } else { "FAIL" });
    }

    fn skipped(&mut self, analysis: &str, why: &str) {
        self.line(&format!("{analysis}.status"), format!("skipped ({why})"));
    }

    fn error(&mut self, analysis: &str, err: &AnalysisError) {
        self.line(&format!("{analysis}.error"), err);
        self.verdict(&format!("{analysis}.verdict"), false);
    }
}

fn node_text(node: Node) -> String {
    format!("{} {}", node.i, node.j)
}

/// Renders the full report and returns it with the overall verdict.
fn build_report(
    config: &ExperimentConfig,
    state: &DescentState,
    base_iteration: u64,
    params: &EnergyParams,
    constraints: &ConstraintSet,
) -> Result<(String, bool), RunError> {
    let field = &state.field;
    let grid = field.grid();
    let mut rb = ReportBuilder::new();

    rb.section("config");
    rb.out.push_str(&config.serialize());

    rb.section("run");
    rb.line("nodes_per_axis", grid.nodes_per_axis());
    rb.line("spacing", grid.spacing());
    rb.line("iterations_run", state.iteration);
    rb.line("iterations_total", base_iteration + state.iteration);
    if let Some(&(_, first)) = state.energy_history.first() {
        rb.line("initial_energy", first);
    }
    if let Some(&(_, last)) = state.energy_history.last() {
        rb.line("final_energy", last);
    }
    let nonincreasing = state.energy_history.windows(2).all(|w| w[1].1 <= w[0].1);
    rb.line("energy_nonincreasing", nonincreasing);
    if let Some(&(_, res)) = state.grad_inf_history.last() {
        rb.line("final_residual", res);
    }
    let norm =
        physical_dirichlet_norm(field, params).map_err(|e| RunError::Validation(e.to_string()))?;
    rb.line("physical_dirichlet_norm", norm);

    rb.section("analysis");
    let mode = config.seminorm_mode.to_mode(config.seed);
    let tol = CheckTolerances::default();
    let needs_holder = config
        .analyses
        .iter()
        .any(|k| matches!(k, AnalysisKind::Symmetry | AnalysisKind::Seminorm));
    let holder: Option<HolderReport> = if needs_holder {
        Some(holder_seminorm(field, params, constraints, mode)?)
    } else {
        None
    };

    for kind in &config.analyses {
        match kind {
            AnalysisKind::Symmetry => {
                if grid.dim() != 2 {
                    rb.skipped("symmetry", "needs a 2d field");
                    continue;
                }
                let scale = holder.as_ref().unwrap().seminorm;
                let tolerance = tol.symmetry_rel * scale;
                match check_reflection_antisymmetry(field) {
                    Ok(residual) => {
                        rb.line("symmetry.antisymmetry.residual", residual);
                        rb.line("symmetry.antisymmetry.tolerance", tolerance);
                        rb.verdict("symmetry.antisymmetry.verdict", residual <= tolerance);
                    }
                    Err(err) => rb.error("symmetry.antisymmetry", &err),
                }
                match check_cylindrical_symmetry(field) {
                    Ok(residual) => {
                        rb.line("symmetry.mirror.residual", residual);
                        rb.line("symmetry.mirror.tolerance", tolerance);
                        rb.verdict("symmetry.mirror.verdict", residual <= tolerance);
                    }
                    Err(err) => rb.error("symmetry.mirror", &err),
                }
            }
            AnalysisKind::Bounds => {
                if grid.dim() != 2 {
                    rb.skipped("bounds", "needs a 2d field");
                    continue;
                }
                match check_pointwise_bounds(field, constraints) {
                    Ok(report) => {
                        rb.line("bounds.range_overshoot", report.range_overshoot);
                        rb.line("bounds.upper_half_overshoot", report.upper_half_overshoot);
                        rb.line("bounds.lower_half_overshoot", report.lower_half_overshoot);
                        rb.line("bounds.tolerance", tol.bounds);
                        rb.verdict("bounds.verdict", report.max_violation() <= tol.bounds);
                    }
                    Err(err) => rb.error("bounds", &err),
                }
            }
            AnalysisKind::Quasiconcavity => {
                if grid.dim() != 2 {
                    rb.skipped("quasiconcavity", "needs a 2d field");
                    continue;
                }
                let levels = config.quasiconcavity_levels();
                if levels.is_empty() {
                    rb.skipped("quasiconcavity", "no levels inside (0, 1)");
                    continue;
                }
                let level_text: Vec<String> = levels.iter().map(|t| format!("{t}")).collect();
                rb.line("quasiconcavity.levels", level_text.join(","));
                match check_quasiconcavity(field, &levels) {
                    Ok(report) => {
                        rb.line("quasiconcavity.worst_deficit", report.worst_deficit());
                        rb.line("quasiconcavity.tolerance", tol.hull_deficit);
                        rb.verdict(
                            "quasiconcavity.verdict",
                            report.worst_deficit() <= tol.hull_deficit,
                        );
                    }
                    Err(err) => rb.error("quasiconcavity", &err),
                }
            }
            AnalysisKind::Midplane => {
                if grid.dim() != 2 {
                    rb.skipped("midplane", "needs a 2d field");
                    continue;
                }
                match check_midplane_gradient_sign(field) {
                    Ok(report) => {
                        rb.line("midplane.checked", report.checked);
                        rb.line("midplane.violations", report.violations);
                        rb.line("midplane.min_derivative", report.min_derivative);
                        rb.verdict("midplane.verdict", report.violations == 0);
                    }
                    Err(err) => rb.error("midplane", &err),
                }
            }
            AnalysisKind::GradientFloor => {
                if grid.dim() != 2 {
                    rb.skipped("gradient_floor", "needs a 2d field");
                    continue;
                }
                match check_nonvanishing_gradient(field, constraints, 0.0) {
                    Ok(report) => {
                        rb.line("gradient_floor.min_magnitude", report.min_magnitude);
                        rb.line("gradient_floor.argmin", node_text(report.argmin));
                        rb.verdict("gradient_floor.verdict", !report.degenerate);
                    }
                    Err(err) => rb.error("gradient_floor", &err),
                }
            }
            AnalysisKind::Seminorm => {
                let report = holder.as_ref().unwrap();
                rb.line("seminorm.value", report.seminorm);
                match report.argmax_pair {
                    Some((a, b)) => {
                        rb.line(
                            "seminorm.argmax",
                            format!("{} {}", node_text(a), node_text(b)),
                        );
                    }
                    None => rb.line("seminorm.argmax", "none"),
                }
                rb.line("seminorm.ratio_at_constraints", report.ratio_at_constraints);
                rb.line("seminorm.c_star_estimate", report.c_star_estimate);
                rb.verdict("seminorm.verdict", !report.degenerate);
            }
            AnalysisKind::Singular => {
                if grid.dim() != 2 {
                    rb.skipped("singular", "needs a 2d field");
                    continue;
                }
                if constraints.is_empty() {
                    rb.skipped("singular", "no pinned nodes");
                    continue;
                }
                let expected = (params.p - grid.dim() as f64) / (params.p - 1.0);
                rb.line("singular.expected_exponent", expected);
                for (idx, &(node, _)) in constraints.entries().iter().enumerate() {
                    let key = format!("singular.pin{}", idx + 1);
                    let coords = grid.node_coords(node);
                    rb.line(
                        &format!("{key}.center"),
                        format!("{} {}", coords[0], coords[1]),
                    );
                    match fit_singular_exponent(field, node, params, constraints) {
                        Ok(fit) => {
                            let rel = (fit.exponent - expected).abs() / expected;
                            rb.line(&format!("{key}.exponent"), fit.exponent);
                            rb.line(&format!("{key}.relative_error"), rel);
                            rb.line(&format!("{key}.gamma"), fit.gamma);
                            rb.line(&format!("{key}.fit_residual"), fit.residual);
                            rb.line(
                                &format!("{key}.dirac_mass"),
                                dirac_mass_from_gamma(fit.gamma, params.p, grid.dim()),
                            );
                            rb.verdict(&format!("{key}.verdict"), rel <= SINGULAR_REL_TOL);
                        }
                        Err(err) => rb.error(&key, &err),
                    }
                }
            }
            AnalysisKind::Gap => match morrey_estimate_gap(field, params) {
                Ok(report) => {
                    rb.line("gap.total_energy", report.total_energy);
                    rb.line("gap.outside_energy", report.outside_energy);
                    rb.line("gap.fraction_outside", report.fraction_outside);
                    rb.verdict("gap.verdict", !report.degenerate);
                }
                Err(err) => rb.error("gap", &err),
            },
            AnalysisKind::Stability => {
                // Self-test: the converged field doubles as the reference
                // extremal, so the slack should sit near zero.
                match check_stability(field, params, field, constraints) {
                    Ok(report) => {
                        rb.line("stability.exponent", report.exponent);
                        rb.line("stability.c_star", report.c_star);
                        rb.line("stability.seminorm", report.seminorm);
                        rb.line("stability.lhs", report.lhs);
                        rb.line("stability.rhs", report.rhs);
                        rb.line("stability.slack", report.slack);
                        rb.verdict(
                            "stability.verdict",
                            report.slack >= -STABILITY_REL_TOL * report.rhs,
                        );
                    }
                    Err(err) => rb.error("stability", &err),
                }
            }
        }
    }

    rb.section("summary");
    rb.line("checks", rb.checks);
    rb.line("passed", rb.passed);
    let all_pass = rb.passed == rb.checks;
    let _ = writeln!(
        rb.out,
        "verdict = {}",
        if all_pass { "PASS" } else { "FAIL" }
    );

    Ok((rb.out, all_pass))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SeminormModeSpec;
    use tempfile::TempDir;

    fn scaled_config(out: &Path) -> ExperimentConfig {
        let mut config = ExperimentConfig::default();
        config.ell = 3;
        config.k = 2;
        config.p = 4.0;
        config.adaptive = true;
        config.max_iters = 20_000;
        config.grad_tol_rel = 1e-6;
        config.seminorm_mode = SeminormModeSpec::Exact;
        config.out_dir = out.to_path_buf();
        config
    }

    #[test]
    fn experiment_writes_archive_contours_and_report() {
        let dir = TempDir::new().unwrap();
        let config = scaled_config(&dir.path().join("out"));
        let summary = run_experiment(&config, None).unwrap();
        assert!(summary.archive_path.is_file());
        assert!(summary.contour_path.as_ref().unwrap().is_file());
        assert!(summary.report_path.is_file());
        let report = fs::read_to_string(&summary.report_path).unwrap();
        assert!(report.contains("[config]"));
        assert!(report.contains("energy_nonincreasing = true"));
        assert!(report.contains("seminorm.c_star_estimate = "));
        assert!(report.contains("verdict = "));
    }

    #[test]
    fn identical_runs_produce_identical_bytes() {
        let dir = TempDir::new().unwrap();
        let out_a = dir.path().join("a");
        let out_b = dir.path().join("b");
        let summary_a = run_experiment(&scaled_config(&out_a), None).unwrap();
        let summary_b = run_experiment(&scaled_config(&out_b), None).unwrap();
        let archive_a = fs::read(&summary_a.archive_path).unwrap();
        let archive_b = fs::read(&summary_b.archive_path).unwrap();
        assert_eq!(archive_a, archive_b);
        let contours_a = fs::read(summary_a.contour_path.as_ref().unwrap()).unwrap();
        let contours_b = fs::read(summary_b.contour_path.as_ref().unwrap()).unwrap();
        assert_eq!(contours_a, contours_b);
        // Reports echo the output directory, which differs; compare the
        // rest line by line.
        let report_a = fs::read_to_string(&summary_a.report_path).unwrap();
        let report_b = fs::read_to_string(&summary_b.report_path).unwrap();
        for (la, lb) in report_a.lines().zip(report_b.lines()) {
            if la.starts_with("out = ") {
                continue;
            }
            assert_eq!(la, lb);
        }
        assert_eq!(report_a.lines().count(), report_b.lines().count());
    }

    #[test]
    fn split_run_resumes_to_the_uninterrupted_iterate() {
        let dir = TempDir::new().unwrap();
        // Fixed-step descent for exact reproducibility across the split.
        let mut full = scaled_config(&dir.path().join("full"));
        full.adaptive = false;
        full.tau = 1e-3;
        full.max_iters = 400;
        full.grad_tol_rel = 0.0;
        full.analyses = Vec::new();
        let full_summary = run_experiment(&full, None).unwrap();

        let mut half = full.clone();
        half.out_dir = dir.path().join("half");
        half.max_iters = 150;
        let half_summary = run_experiment(&half, None).unwrap();
        assert_eq!(half_summary.iterations, 150);

        let mut rest = full.clone();
        rest.out_dir = dir.path().join("rest");
        let rest_summary =
            run_experiment(&rest, Some(half_summary.archive_path.as_path())).unwrap();
        assert_eq!(rest_summary.iterations, 400);

        let full_bytes = fs::read(&full_summary.archive_path).unwrap();
        let rest_bytes = fs::read(&rest_summary.archive_path).unwrap();
        assert_eq!(full_bytes, rest_bytes);
    }

    #[test]
    fn resume_rejects_mismatched_grid_and_exponent() {
        let dir = TempDir::new().unwrap();
        let mut config = scaled_config(&dir.path().join("out"));
        config.max_iters = 10;
        config.analyses = Vec::new();
        let summary = run_experiment(&config, None).unwrap();

        let mut other = config.clone();
        other.k = 4;
        other.out_dir = dir.path().join("other");
        let err = run_experiment(&other, Some(summary.archive_path.as_path())).unwrap_err();
        assert!(matches!(err, RunError::Validation(_)));
        assert_eq!(err.exit_code(), 1);

        let mut other_p = config.clone();
        other_p.p = 3.0;
        other_p.out_dir = dir.path().join("other_p");
        let err = run_experiment(&other_p, Some(summary.archive_path.as_path())).unwrap_err();
        assert!(matches!(err, RunError::Validation(_)));
    }

    #[test]
    fn one_dimensional_run_reports_the_sharp_constant() {
        let dir = TempDir::new().unwrap();
        let mut config = ExperimentConfig::default();
        config.n = 1;
        config.ell = 2;
        config.k = 10;
        config.p = 4.0;
        config.adaptive = true;
        config.max_iters = 50_000;
        config.grad_tol = 1e-12;
        config.grad_tol_rel = 0.0;
        config.seminorm_mode = SeminormModeSpec::Exact;
        config.out_dir = dir.path().join("out");
        let summary = run_experiment(&config, None).unwrap();
        assert!(summary.contour_path.is_none());
        let report = fs::read_to_string(&summary.report_path).unwrap();
        let c_star: f64 = report
            .lines()
            .find_map(|line| line.strip_prefix("seminorm.c_star_estimate = "))
            .unwrap()
            .parse()
            .unwrap();
        assert!((c_star - 1.0).abs() <= 1e-10, "C* estimate {c_star}");
    }

    #[test]
    fn divergent_step_maps_to_exit_code_two() {
        let dir = TempDir::new().unwrap();
        let mut config = scaled_config(&dir.path().join("out"));
        config.adaptive = false;
        config.tau = 10.0;
        config.max_iters = 500;
        let err = run_experiment(&config, None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
