//! Cross-module properties: the discrete fundamental-theorem bound in 1D,
//! and bitwise reproducibility of descent across archive round trips and
//! checkpoint files.

use morrey_core::{
    holder_seminorm, load_field, make_grid, physical_dirichlet_norm, run_descent, save_field,
    ArchiveHeader, ConstraintSet, DescentConfig, EnergyParams, ScalarField, SeminormMode,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

fn random_field(grid: morrey_core::Grid, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = ScalarField::zeros(grid);
    for v in f.values_mut() {
        *v = rng.random::<f64>() * 2.0 - 1.0;
    }
    if let Some(corner) = grid.dead_corner() {
        f.set(corner, 0.0);
    }
    f
}

/// In one dimension the discrete Hölder ratio of any field is bounded by
/// its discrete Dirichlet norm: the telescoped difference over any node
/// pair obeys the same power-mean inequality as the continuum integral,
/// so the sharp constant 1 holds without discretization defect.
#[test]
fn one_dimensional_ratio_never_exceeds_the_dirichlet_norm() {
    let empty = |grid: &morrey_core::Grid| ConstraintSet::new(grid, Vec::new()).unwrap();
    for (k, seed) in [(3u32, 11u64), (5, 12), (8, 13)] {
        let grid = make_grid(1, 2, k).unwrap();
        for trial in 0..17 {
            let field = random_field(grid, seed * 100 + trial);
            for p in [1.5, 2.5, 4.0] {
                let params = EnergyParams::new(p);
                let holder =
                    holder_seminorm(&field, &params, &empty(&grid), SeminormMode::Exact).unwrap();
                let norm = physical_dirichlet_norm(&field, &params).unwrap();
                assert!(
                    holder.seminorm <= norm * (1.0 + 1e-12),
                    "k = {k}, trial {trial}, p = {p}: seminorm {} exceeds norm {norm}",
                    holder.seminorm
                );
            }
        }
    }
}

fn fixed_tau_config(max_iters: u64) -> DescentConfig {
    DescentConfig {
        tau: 1e-3,
        max_iters,
        grad_tol: 0.0,
        grad_tol_rel: 0.0,
        adaptive: false,
        checkpoint_every: 0,
        checkpoint_dir: None,
        seed: 0,
    }
}

/// Splitting a fixed-step run across an archive round trip lands on the
/// same iterate bit for bit.
#[test]
fn split_descent_across_an_archive_matches_the_whole_run() {
    let dir = TempDir::new().unwrap();
    let grid = make_grid(2, 2, 2).unwrap();
    let constraints = ConstraintSet::canonical(&grid);
    let params = EnergyParams::new(4.0);
    let initial = {
        let mut f = random_field(grid, 99);
        constraints.apply(&mut f);
        f
    };

    let whole = run_descent(&initial, &params, &fixed_tau_config(300), &constraints).unwrap();

    let head = run_descent(&initial, &params, &fixed_tau_config(120), &constraints).unwrap();
    let path = dir.path().join("head.archive");
    let header = ArchiveHeader {
        p: 4.0,
        iteration: head.iteration,
        energy: head.energy_history.last().unwrap().1,
    };
    save_field(&head.field, &header, &path).unwrap();
    let resumed = load_field(&path).unwrap();
    assert_eq!(resumed.header.iteration, 120);
    let tail = run_descent(
        &resumed.field,
        &params,
        &fixed_tau_config(180),
        &constraints,
    )
    .unwrap();

    assert_eq!(whole.field.values(), tail.field.values());
}

/// Checkpoint files written mid-run restart to the uninterrupted iterate.
#[test]
fn checkpoint_files_restart_to_the_uninterrupted_iterate() {
    let dir = TempDir::new().unwrap();
    let grid = make_grid(2, 2, 2).unwrap();
    let constraints = ConstraintSet::canonical(&grid);
    let params = EnergyParams::new(4.0);
    let initial = {
        let mut f = random_field(grid, 7);
        constraints.apply(&mut f);
        f
    };

    let whole = run_descent(&initial, &params, &fixed_tau_config(300), &constraints).unwrap();

    let mut config = fixed_tau_config(300);
    config.checkpoint_every = 100;
    config.checkpoint_dir = Some(dir.path().to_path_buf());
    run_descent(&initial, &params, &config, &constraints).unwrap();

    let checkpoint = load_field(&dir.path().join("checkpoint_000000200.archive")).unwrap();
    assert_eq!(checkpoint.header.iteration, 200);
    let tail = run_descent(
        &checkpoint.field,
        &params,
        &fixed_tau_config(100),
        &constraints,
    )
    .unwrap();

    assert_eq!(whole.field.values(), tail.field.values());
}
